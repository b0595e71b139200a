use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::areas::{compute_local_areas, LocalAreaSet};
use super::graph::{ComponentId, ComponentKind, ResourceGraph};

/// Ordered vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<ComponentId>);

impl Path {
    pub fn vertices(&self) -> &[ComponentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn source(&self) -> ComponentId {
        self.0[0]
    }

    pub fn target(&self) -> ComponentId {
        *self.0.last().unwrap()
    }

    /// Endpoints with the lower id first.
    pub fn endpoints(&self) -> (ComponentId, ComponentId) {
        let (a, b) = (self.source(), self.target());
        (a.min(b), a.max(b))
    }

    /// Interior vertices: the internal resources of a valid path.
    pub fn interior(&self) -> &[ComponentId] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn contains(&self, id: ComponentId) -> bool {
        self.0.contains(&id)
    }

    pub fn count_kind(&self, graph: &ResourceGraph, kind: ComponentKind) -> usize {
        self.0.iter().filter(|&&v| graph.kind(v) == Some(kind)).count()
    }

    /// Consecutive vertices are adjacent and no vertex repeats.
    pub fn is_simple_walk(&self, graph: &ResourceGraph) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.0.iter().all(|v| seen.insert(*v)) && self.0.windows(2).all(|w| graph.has_edge(w[0], w[1]))
    }

    /// Distinct end-node endpoints, internal interior, simple.
    pub fn is_valid_generation_path(&self, graph: &ResourceGraph) -> bool {
        self.0.len() >= 3
            && graph.kind(self.source()) == Some(ComponentKind::EndNode)
            && graph.kind(self.target()) == Some(ComponentKind::EndNode)
            && self.source() != self.target()
            && self.interior().iter().all(|&v| graph.kind(v).is_some_and(|k| k.is_internal()))
            && self.is_simple_walk(graph)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("-"))
    }
}

/// Allowed paths for every unordered end-node pair, lower endpoint first.
pub fn enumerate_allowed_paths(graph: &ResourceGraph) -> Vec<Path> {
    enumerate_allowed_paths_with(graph, &compute_local_areas(graph))
}

pub fn enumerate_allowed_paths_with(graph: &ResourceGraph, areas: &LocalAreaSet) -> Vec<Path> {
    let search = Search::new(graph, areas);
    let ends: Vec<(ComponentId, ComponentId)> = graph.end_nodes().filter_map(|e| graph.egis_of(e).first().map(|&i| (e, i))).collect();
    let mut cache: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
    let mut out = Vec::new();
    for (x, &(e, ie)) in ends.iter().enumerate() {
        for &(f, jf) in &ends[x + 1..] {
            let (a, b) = (search.index[&ie], search.index[&jf]);
            let internal = cache.entry((a, b)).or_insert_with(|| search.between(a, b));
            for route in internal.iter() {
                let mut v = Vec::with_capacity(route.len() + 2);
                v.push(e);
                v.extend(route.iter().map(|&i| search.ids[i]));
                v.push(f);
                out.push(Path(v));
            }
        }
    }
    out.sort();
    out
}

/// Dense view of the internal subgraph with per-area EGI distances.
struct Search {
    ids: Vec<ComponentId>,
    index: BTreeMap<ComponentId, usize>,
    adj: Vec<Vec<usize>>,
    is_backbone: Vec<bool>,
    is_egi: Vec<bool>,
    area: Vec<Option<usize>>,
    /// egi_dist[u][v]: fewest EGIs on a path from u to v inside their area (both ends counted).
    egi_dist: Vec<BTreeMap<usize, u32>>,
}

impl Search {
    fn new(graph: &ResourceGraph, areas: &LocalAreaSet) -> Self {
        let ids: Vec<ComponentId> = graph.vertices().filter(|(_, k)| k.is_internal()).map(|(id, _)| id).collect();
        let index: BTreeMap<ComponentId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let adj: Vec<Vec<usize>> = ids.iter().map(|&id| graph.neighbors(id).filter_map(|n| index.get(&n).copied()).collect()).collect();
        let is_backbone: Vec<bool> = ids.iter().map(|&id| graph.kind(id) == Some(ComponentKind::Backbone)).collect();
        let is_egi: Vec<bool> = ids.iter().map(|&id| graph.kind(id) == Some(ComponentKind::Egi)).collect();
        let area: Vec<Option<usize>> = ids.iter().map(|&id| areas.area_of(id)).collect();
        let mut s = Search { ids, index, adj, is_backbone, is_egi, area, egi_dist: Vec::new() };
        s.egi_dist = (0..s.ids.len()).map(|u| s.area_distances(u)).collect();
        s
    }

    fn weight(flag: bool) -> u32 {
        u32::from(flag)
    }

    /// 0-1 BFS restricted to u's area, counting EGIs.
    fn area_distances(&self, u: usize) -> BTreeMap<usize, u32> {
        let mut dist = BTreeMap::new();
        let Some(area) = self.area[u] else { return dist };
        let mut deque = VecDeque::from([(u, Self::weight(self.is_egi[u]))]);
        while let Some((v, d)) = deque.pop_front() {
            if dist.get(&v).is_some_and(|&old| old <= d) {
                continue;
            }
            dist.insert(v, d);
            for &n in &self.adj[v] {
                if self.area[n] == Some(area) {
                    let w = Self::weight(self.is_egi[n]);
                    if w == 0 {
                        deque.push_front((n, d));
                    } else {
                        deque.push_back((n, d + 1));
                    }
                }
            }
        }
        dist
    }

    /// Fewest backbones from every vertex to `target` (vertex itself counted).
    fn backbone_distances(&self, target: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.ids.len()];
        let mut deque = VecDeque::from([(target, Self::weight(self.is_backbone[target]))]);
        while let Some((v, d)) = deque.pop_front() {
            if dist[v] <= d {
                continue;
            }
            dist[v] = d;
            for &n in &self.adj[v] {
                let w = Self::weight(self.is_backbone[n]);
                if w == 0 {
                    deque.push_front((n, d));
                } else {
                    deque.push_back((n, d + 1));
                }
            }
        }
        dist
    }

    /// All allowed internal routes from EGI `a` to EGI `b`.
    fn between(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        if a == b {
            return vec![vec![a]];
        }
        let db = self.backbone_distances(b);
        if db[a] == u32::MAX {
            return Vec::new();
        }
        let mut dfs = Dfs { s: self, db: &db, bstar: db[a], target: b, path: Vec::new(), on_path: vec![false; self.ids.len()], out: Vec::new() };
        dfs.visit(a, 0, Segment { entry: a, egis: 0, area: None });
        dfs.out
    }
}

#[derive(Clone, Copy)]
struct Segment {
    entry: usize,
    egis: u32,
    area: Option<usize>,
}

struct Dfs<'a> {
    s: &'a Search,
    db: &'a [u32],
    bstar: u32,
    target: usize,
    path: Vec<usize>,
    on_path: Vec<bool>,
    out: Vec<Vec<usize>>,
}

impl Dfs<'_> {
    fn visit(&mut self, v: usize, backbones_before: u32, seg: Segment) {
        let s = self.s;
        if backbones_before.saturating_add(self.db[v]) > self.bstar {
            return;
        }
        let backbones = backbones_before + Search::weight(s.is_backbone[v]);
        let seg = if s.is_backbone[v] {
            Segment { entry: v, egis: 0, area: None }
        } else if seg.area.is_some() && seg.area == s.area[v] {
            Segment { egis: seg.egis + Search::weight(s.is_egi[v]), ..seg }
        } else {
            Segment { entry: v, egis: Search::weight(s.is_egi[v]), area: s.area[v] }
        };
        if seg.area.is_some() && s.egi_dist[seg.entry].get(&v) != Some(&seg.egis) {
            return;
        }
        self.path.push(v);
        self.on_path[v] = true;
        if v == self.target {
            self.out.push(self.path.clone());
        } else {
            for i in 0..s.adj[v].len() {
                let n = s.adj[v][i];
                if !self.on_path[n] {
                    self.visit(n, backbones, seg);
                }
            }
        }
        self.on_path[v] = false;
        self.path.pop();
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Exhaustive reference enumeration used by tests.
    use super::*;

    fn simple_paths(graph: &ResourceGraph, from: ComponentId, to: ComponentId, allow: &dyn Fn(ComponentId) -> bool) -> Vec<Vec<ComponentId>> {
        fn go(
            graph: &ResourceGraph,
            v: ComponentId,
            to: ComponentId,
            allow: &dyn Fn(ComponentId) -> bool,
            path: &mut Vec<ComponentId>,
            out: &mut Vec<Vec<ComponentId>>,
        ) {
            path.push(v);
            if v == to {
                out.push(path.clone());
            } else {
                for n in graph.neighbors(v) {
                    if !path.contains(&n) && (n == to || allow(n)) {
                        go(graph, n, to, allow, path, out);
                    }
                }
            }
            path.pop();
        }
        let mut out = Vec::new();
        go(graph, from, to, allow, &mut Vec::new(), &mut out);
        out
    }

    fn min_area_egis(graph: &ResourceGraph, areas: &LocalAreaSet, from: ComponentId, to: ComponentId) -> usize {
        let area = areas.area_of(from);
        let in_area = |v: ComponentId| graph.kind(v).unwrap().is_internal() && areas.area_of(v) == area;
        simple_paths(graph, from, to, &in_area)
            .iter()
            .map(|p| p.iter().filter(|&&v| graph.kind(v) == Some(ComponentKind::Egi)).count())
            .min()
            .unwrap()
    }

    /// Every simple valid path, filtered by backbone count then per-segment EGI minimality.
    pub fn allowed_paths(graph: &ResourceGraph) -> Vec<Path> {
        let areas = compute_local_areas(graph);
        let ends: Vec<ComponentId> = graph.end_nodes().collect();
        let internal = |v: ComponentId| graph.kind(v).unwrap().is_internal();
        let mut out = Vec::new();
        for (i, &e) in ends.iter().enumerate() {
            for &f in &ends[i + 1..] {
                let all = simple_paths(graph, e, f, &internal);
                let bb = |p: &Vec<ComponentId>| p.iter().filter(|&&v| graph.kind(v) == Some(ComponentKind::Backbone)).count();
                let Some(bstar) = all.iter().map(bb).min() else { continue };
                for p in all.iter().filter(|p| bb(p) == bstar) {
                    let inner = &p[1..p.len() - 1];
                    let mut ok = true;
                    let mut start = 0;
                    while start < inner.len() {
                        if graph.kind(inner[start]) == Some(ComponentKind::Backbone) {
                            start += 1;
                            continue;
                        }
                        let area = areas.area_of(inner[start]);
                        let mut end = start;
                        while end + 1 < inner.len()
                            && graph.kind(inner[end + 1]) != Some(ComponentKind::Backbone)
                            && areas.area_of(inner[end + 1]) == area
                        {
                            end += 1;
                        }
                        let used = inner[start..=end].iter().filter(|&&v| graph.kind(v) == Some(ComponentKind::Egi)).count();
                        if used != min_area_egis(graph, &areas, inner[start], inner[end]) {
                            ok = false;
                        }
                        start = end + 1;
                    }
                    if ok {
                        out.push(Path(p.clone()));
                    }
                }
            }
        }
        out.sort();
        out
    }
}
