//! Assignment of applications to end-node pairs.

use std::collections::BTreeMap;

use qnet_core::demand::DemandId;
use qnet_core::network::{CellKey, PathPartition, ResourceGraph};
use qnet_core::ComponentId;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{ApplicationSpec, Platform, PlatformPresets};
use crate::config::Fractions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Interface,
    Junction,
    Backbone,
}

impl From<CellKey> for CellKind {
    fn from(key: CellKey) -> Self {
        match key {
            CellKey::Backbone => CellKind::Backbone,
            CellKey::Junction(_) => CellKind::Junction,
            CellKey::Interface(_) => CellKind::Interface,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub platform: Platform,
    pub discoverable: bool,
}

/// One application session submitting demands from `src` to `dst`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSource {
    pub app: ApplicationSpec,
    pub src: ComponentId,
    pub dst: ComponentId,
    pub kind: CellKind,
    /// Absolute seconds.
    pub next_submit: f64,
    pub active_demand: Option<DemandId>,
}

/// Random platform and discoverability per end node. Nodes marked
/// discoverable in the graph stay discoverable.
pub fn node_profiles<R: Rng>(
    graph: &ResourceGraph,
    presets: &PlatformPresets,
    server_probability: f64,
    rng: &mut R,
) -> BTreeMap<ComponentId, NodeProfile> {
    graph
        .end_nodes()
        .map(|n| {
            let platform = if rng.random_bool(presets.trapped_ion_share) { Platform::TrappedIon } else { Platform::Nv };
            let discoverable = rng.random_bool(server_probability) || graph.is_discoverable(n);
            (n, NodeProfile { platform, discoverable })
        })
        .collect()
}

/// End-node pairs grouped by the kind of cell their paths lie in.
pub fn pairs_by_kind(partition: &PathPartition) -> BTreeMap<CellKind, Vec<(ComponentId, ComponentId)>> {
    let mut out: BTreeMap<CellKind, Vec<_>> = BTreeMap::new();
    for (a, b) in partition.pairs() {
        if let Some(&id) = partition.between(a, b).first() {
            out.entry(partition.cell_of(id).into()).or_default().push((a, b));
        }
    }
    out
}

fn share(fractions: &Fractions, kind: CellKind) -> f64 {
    match kind {
        CellKind::Interface => fractions.interface,
        CellKind::Junction => fractions.junction,
        CellKind::Backbone => fractions.backbone,
    }
}

/// Samples pairs per cell kind and gives each an application both nodes
/// can run and `viable` accepts for the pair. Pairs of two discoverable
/// nodes get nothing; the non-discoverable node submits. `next_submit` is
/// left at zero.
#[allow(clippy::too_many_arguments)]
pub fn assign_applications<R: Rng>(
    partition: &PathPartition,
    profiles: &BTreeMap<ComponentId, NodeProfile>,
    presets: &PlatformPresets,
    fractions: &Fractions,
    catalog: &[ApplicationSpec],
    viable: impl Fn(&ApplicationSpec, ComponentId, ComponentId) -> bool,
    rng: &mut R,
) -> Vec<DemandSource> {
    let mut sources = Vec::new();
    for (kind, mut pairs) in pairs_by_kind(partition) {
        let take = (share(fractions, kind) * pairs.len() as f64).round() as usize;
        pairs.shuffle(rng);
        for (a, b) in pairs.into_iter().take(take) {
            let (Some(pa), Some(pb)) = (profiles.get(&a), profiles.get(&b)) else { continue };
            let (src, dst) = match (pa.discoverable, pb.discoverable) {
                (true, true) => continue,
                (false, true) => (a, b),
                (true, false) => (b, a),
                (false, false) => {
                    if rng.random_bool(0.5) {
                        (a, b)
                    } else {
                        (b, a)
                    }
                }
            };
            let floor = presets.lifetime(pa.platform).min(presets.lifetime(pb.platform));
            let fitting: Vec<&ApplicationSpec> = catalog.iter().filter(|app| app.platform_window_floor <= floor && viable(app, src, dst)).collect();
            if let Some(app) = fitting.choose(rng) {
                sources.push(DemandSource { app: (*app).clone(), src, dst, kind, next_submit: 0.0, active_demand: None });
            }
        }
    }
    sources
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;
    use qnet_core::network::{dumbbell, NetworkModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(fractions: Fractions, seed: u64) -> Vec<DemandSource> {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let presets = PlatformPresets::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profiles = node_profiles(&m.graph, &presets, 0.3, &mut rng);
        assign_applications(&m.partition, &profiles, &presets, &fractions, &default_catalog(), |_, _, _| true, &mut rng)
    }

    #[test]
    fn zero_fractions_give_no_sources() {
        assert!(run(Fractions { interface: 0.0, junction: 0.0, backbone: 0.0 }, 1).is_empty());
    }

    #[test]
    fn dumbbell_pair_counts() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let by_kind = pairs_by_kind(&m.partition);
        assert_eq!(by_kind[&CellKind::Interface].len(), 30);
        assert_eq!(by_kind[&CellKind::Junction].len(), 25);
        assert_eq!(by_kind[&CellKind::Backbone].len(), 50);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(run(Fractions::DUMBBELL, 4), run(Fractions::DUMBBELL, 4));
    }

    #[test]
    fn pairs_are_reachable_in_their_cell_kind() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        for seed in 0..20 {
            for s in run(Fractions::DUMBBELL, seed) {
                let ids = m.partition.between(s.src, s.dst);
                assert!(!ids.is_empty());
                assert!(ids.iter().all(|&id| CellKind::from(m.partition.cell_of(id)) == s.kind));
            }
        }
    }
}
