use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{ComponentId, ComponentKind, ResourceGraph};

/// Component counts for [`random_topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub backbones: usize,
    pub local_areas: usize,
    pub end_nodes: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("infeasible topology: {0}")]
    InfeasibleTopology(String),
}

/// Component ids of the two-hub example network.
pub struct Dumbbell;

impl Dumbbell {
    pub const I1: ComponentId = ComponentId(1);
    pub const I2: ComponentId = ComponentId(2);
    pub const I3: ComponentId = ComponentId(3);
    pub const J1: ComponentId = ComponentId(4);
    pub const J2: ComponentId = ComponentId(5);
    pub const B1: ComponentId = ComponentId(6);
    pub const NODES_PER_EGI: u32 = 5;

    /// `k`-th end node on EGI `egi` (0 for I1, 1 for I2, 2 for I3).
    pub fn end_node(egi: u32, k: u32) -> ComponentId {
        ComponentId(10 + egi * Self::NODES_PER_EGI + k)
    }
}

/// Two metropolitan hubs joined by one backbone: I1, I2 behind J1 and I3 behind J2,
/// five end nodes per EGI.
pub fn dumbbell() -> ResourceGraph {
    use ComponentKind::*;
    let mut g = ResourceGraph::new();
    for (id, kind) in
        [(Dumbbell::I1, Egi), (Dumbbell::I2, Egi), (Dumbbell::I3, Egi), (Dumbbell::J1, Junction), (Dumbbell::J2, Junction), (Dumbbell::B1, Backbone)]
    {
        g.add_vertex(id, kind).unwrap();
    }
    for (egi_index, egi) in [Dumbbell::I1, Dumbbell::I2, Dumbbell::I3].into_iter().enumerate() {
        for k in 0..Dumbbell::NODES_PER_EGI {
            let e = Dumbbell::end_node(egi_index as u32, k);
            g.add_vertex(e, EndNode).unwrap();
            g.add_edge(e, egi).unwrap();
        }
    }
    for (a, b) in [
        (Dumbbell::I1, Dumbbell::J1),
        (Dumbbell::I2, Dumbbell::J1),
        (Dumbbell::J1, Dumbbell::B1),
        (Dumbbell::B1, Dumbbell::J2),
        (Dumbbell::J2, Dumbbell::I3),
    ] {
        g.add_edge(a, b).unwrap();
    }
    g
}

/// Random member of the allowed-edge family with the requested counts.
///
/// Areas get a balanced share of end nodes over 1-3 EGIs. Backbones first
/// form a random spanning tree over the areas, the rest join random area
/// pairs. Each backbone endpoint is a fresh junction linked to every EGI of
/// its area.
pub fn random_topology(params: TopologyParams, seed: u64) -> Result<ResourceGraph, TopologyError> {
    let TopologyParams { backbones, local_areas, end_nodes } = params;
    let infeasible = |m: &str| Err(TopologyError::InfeasibleTopology(m.to_string()));
    if local_areas == 0 {
        return infeasible("at least one local area is required");
    }
    if end_nodes < 2 {
        return infeasible("at least two end nodes are required");
    }
    if local_areas > 1 && backbones + 1 < local_areas {
        return infeasible("too few backbones to connect the local areas");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut links: Vec<(usize, usize)> = Vec::with_capacity(backbones);
    if local_areas == 1 {
        links.extend((0..backbones).map(|_| (0, 0)));
    } else {
        for a in 1..local_areas {
            links.push((rng.random_range(0..a), a));
        }
        while links.len() < backbones {
            let a = rng.random_range(0..local_areas);
            let mut b = rng.random_range(0..local_areas - 1);
            if b >= a {
                b += 1;
            }
            links.push((a.min(b), a.max(b)));
        }
    }

    let mut share = vec![end_nodes / local_areas; local_areas];
    for s in share.iter_mut().take(end_nodes % local_areas) {
        *s += 1;
    }

    let mut g = ResourceGraph::new();
    let mut next = 0u32;
    let mut fresh = |g: &mut ResourceGraph, kind| {
        let id = ComponentId(next);
        next += 1;
        g.add_vertex(id, kind).unwrap();
        id
    };

    let mut egis: Vec<Vec<ComponentId>> = Vec::with_capacity(local_areas);
    let mut junctions: Vec<Vec<ComponentId>> = vec![Vec::new(); local_areas];
    let mut backbone_ends: Vec<[Option<ComponentId>; 2]> = vec![[None, None]; links.len()];
    for (area, &count) in share.iter().enumerate() {
        let n = rng.random_range(1..=count.clamp(1, 3));
        egis.push((0..n).map(|_| fresh(&mut g, ComponentKind::Egi)).collect());
        for (l, &(a, b)) in links.iter().enumerate() {
            // Self-links in the single-area case need two junctions.
            let hits = usize::from(a == area) + usize::from(b == area);
            for _ in 0..hits {
                let j = fresh(&mut g, ComponentKind::Junction);
                junctions[area].push(j);
                let slot = usize::from(backbone_ends[l][0].is_some());
                backbone_ends[l][slot] = Some(j);
            }
        }
        if junctions[area].is_empty() && egis[area].len() > 1 {
            junctions[area].push(fresh(&mut g, ComponentKind::Junction));
        }
        for &j in &junctions[area] {
            for &i in &egis[area] {
                g.add_edge(i, j).unwrap();
            }
        }
    }
    for &[ja, jb] in &backbone_ends {
        let (ja, jb) = (ja.unwrap(), jb.unwrap());
        let b = fresh(&mut g, ComponentKind::Backbone);
        g.add_edge(ja, b).unwrap();
        g.add_edge(b, jb).unwrap();
    }
    for (area, &count) in share.iter().enumerate() {
        let pool = &egis[area];
        for k in 0..count {
            let e = fresh(&mut g, ComponentKind::EndNode);
            let egi = if k < pool.len() { pool[k] } else { pool[rng.random_range(0..pool.len())] };
            g.add_edge(e, egi).unwrap();
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::areas::compute_local_areas;
    use crate::network::graph::validate_graph;

    #[test]
    fn dumbbell_counts() {
        let g = dumbbell();
        assert_eq!(g.count(ComponentKind::EndNode), 15);
        assert_eq!(g.count(ComponentKind::Egi), 3);
        assert_eq!(g.count(ComponentKind::Junction), 2);
        assert_eq!(g.count(ComponentKind::Backbone), 1);
    }

    #[test]
    fn table_rows_are_valid() {
        let rows = [(1, 2, 15), (2, 2, 15), (2, 2, 50), (2, 3, 30), (2, 3, 50), (3, 3, 30), (5, 4, 40), (6, 3, 35), (7, 5, 50), (12, 4, 40)];
        for (backbones, local_areas, end_nodes) in rows {
            for seed in 0..5 {
                let g = random_topology(TopologyParams { backbones, local_areas, end_nodes }, seed).unwrap();
                assert!(validate_graph(&g).is_valid());
                assert_eq!(g.count(ComponentKind::Backbone), backbones);
                assert_eq!(g.count(ComponentKind::EndNode), end_nodes);
                assert_eq!(compute_local_areas(&g).len(), local_areas);
                for b in g.vertices_of(ComponentKind::Backbone) {
                    assert!(g.neighbors(b).all(|n| g.kind(n) == Some(ComponentKind::Junction)));
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = TopologyParams { backbones: 2, local_areas: 3, end_nodes: 30 };
        assert_eq!(random_topology(p, 7).unwrap(), random_topology(p, 7).unwrap());
    }

    #[test]
    fn infeasible_inputs() {
        let p = TopologyParams { backbones: 0, local_areas: 2, end_nodes: 10 };
        assert!(matches!(random_topology(p, 0), Err(TopologyError::InfeasibleTopology(_))));
        let p = TopologyParams { backbones: 0, local_areas: 1, end_nodes: 1 };
        assert!(random_topology(p, 0).is_err());
    }

    #[test]
    fn single_area_variants() {
        for backbones in 0..3 {
            let g = random_topology(TopologyParams { backbones, local_areas: 1, end_nodes: 9 }, 3).unwrap();
            assert!(validate_graph(&g).is_valid());
            assert_eq!(compute_local_areas(&g).len(), 1);
        }
    }
}
