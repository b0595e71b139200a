//! Per-path end-to-end generation rate and minimum fidelity.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::network::{ComponentId, ComponentKind, Path, PathPartition, ResourceGraph};

pub const MIN_FIDELITY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityEntry {
    /// Mean successful end-to-end generations per second.
    pub rate: f64,
    pub fidelity: f64,
}

/// Length-scaling capability model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityModel {
    pub base_rate_mean: f64,
    pub base_rate_std: f64,
    pub base_fid_mean: f64,
    pub base_fid_std: f64,
    /// Rate multiplier per internal hop beyond the first internal resource.
    pub per_hop_rate_factor: f64,
    pub per_backbone_rate_factor: f64,
    pub per_hop_fid_penalty: f64,
    pub per_backbone_fid_penalty: f64,
}

impl Default for CapabilityModel {
    fn default() -> Self {
        CapabilityModel {
            base_rate_mean: 2.0,
            base_rate_std: 0.4,
            base_fid_mean: 0.95,
            base_fid_std: 0.01,
            per_hop_rate_factor: 0.7,
            per_backbone_rate_factor: 0.2,
            per_hop_fid_penalty: 0.01,
            per_backbone_fid_penalty: 0.03,
        }
    }
}

impl CapabilityModel {
    /// Field path and message of the first invalid parameter.
    pub fn check(&self) -> Result<(), (String, String)> {
        let fields = [
            ("base_rate_mean", self.base_rate_mean, self.base_rate_mean > 0.0),
            ("base_fid_mean", self.base_fid_mean, self.base_fid_mean > 0.0 && self.base_fid_mean <= 1.0),
            ("base_rate_std", self.base_rate_std, self.base_rate_std >= 0.0),
            ("base_fid_std", self.base_fid_std, self.base_fid_std >= 0.0),
            ("per_hop_rate_factor", self.per_hop_rate_factor, self.per_hop_rate_factor > 0.0 && self.per_hop_rate_factor <= 1.0),
            ("per_backbone_rate_factor", self.per_backbone_rate_factor, self.per_backbone_rate_factor > 0.0 && self.per_backbone_rate_factor <= 1.0),
            ("per_hop_fid_penalty", self.per_hop_fid_penalty, self.per_hop_fid_penalty >= 0.0),
            ("per_backbone_fid_penalty", self.per_backbone_fid_penalty, self.per_backbone_fid_penalty >= 0.0),
        ];
        match fields.iter().find(|(_, v, ok)| !ok || !v.is_finite()) {
            Some((name, v, _)) => Err((name.to_string(), format!("value {v} is out of range"))),
            None => Ok(()),
        }
    }

    fn scaled(&self, base: CapabilityEntry, hops: usize, backbones: usize) -> CapabilityEntry {
        let rate = base.rate * self.per_hop_rate_factor.powi(hops as i32) * self.per_backbone_rate_factor.powi(backbones as i32);
        let fidelity = base.fidelity - self.per_hop_fid_penalty * hops as f64 - self.per_backbone_fid_penalty * backbones as f64;
        CapabilityEntry { rate, fidelity: fidelity.clamp(MIN_FIDELITY, 1.0) }
    }
}

/// Versioned capability table keyed by canonical path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilitiesTable {
    entries: BTreeMap<Path, CapabilityEntry>,
    by_pair: BTreeMap<(ComponentId, ComponentId), Vec<Path>>,
    pub version: u64,
}

/// One CSV export row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilityRow {
    pub path_id: usize,
    pub path: String,
    pub hop_count: usize,
    pub backbone_count: usize,
    pub rate: f64,
    pub fidelity: f64,
}

fn sample_positive(normal: Option<Normal<f64>>, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    let Some(normal) = normal else { return mean };
    for _ in 0..64 {
        let x = normal.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
    mean
}

/// Samples one entry per path of the partition.
pub fn generate_capabilities(graph: &ResourceGraph, partition: &PathPartition, model: &CapabilityModel, seed: u64) -> CapabilitiesTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate_dist = (model.base_rate_std > 0.0).then(|| Normal::new(model.base_rate_mean, model.base_rate_std).unwrap());
    let fid_dist = (model.base_fid_std > 0.0).then(|| Normal::new(model.base_fid_mean, model.base_fid_std).unwrap());
    let mut entries = BTreeMap::new();
    let mut by_pair: BTreeMap<(ComponentId, ComponentId), Vec<Path>> = BTreeMap::new();
    for path in partition.paths() {
        let rate = sample_positive(rate_dist, model.base_rate_mean, &mut rng);
        let fidelity = fid_dist.map_or(model.base_fid_mean, |d| d.sample(&mut rng)).clamp(MIN_FIDELITY, 1.0);
        let backbones = path.count_kind(graph, ComponentKind::Backbone);
        let hops = path.interior().len().saturating_sub(1);
        entries.insert(path.clone(), model.scaled(CapabilityEntry { rate, fidelity }, hops, backbones));
        by_pair.entry(path.endpoints()).or_default().push(path.clone());
    }
    CapabilitiesTable { entries, by_pair, version: partition.version }
}

impl CapabilitiesTable {
    /// Fresh table for a new partition; the version always moves forward.
    pub fn regenerate(&self, graph: &ResourceGraph, partition: &PathPartition, model: &CapabilityModel, seed: u64) -> Self {
        let mut next = generate_capabilities(graph, partition, model, seed);
        next.version = next.version.max(self.version + 1);
        next
    }

    pub fn get(&self, path: &Path) -> Option<&CapabilityEntry> {
        self.entries.get(path)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Path, &CapabilityEntry)> {
        self.entries.iter()
    }

    /// Paths between `src` and `dst` meeting `min_fidelity`, fastest first.
    pub fn feasible_paths(&self, src: ComponentId, dst: ComponentId, min_fidelity: f64) -> Vec<(&Path, CapabilityEntry)> {
        let mut out: Vec<(&Path, CapabilityEntry)> = self
            .by_pair
            .get(&(src.min(dst), src.max(dst)))
            .into_iter()
            .flatten()
            .map(|p| (p, self.entries[p]))
            .filter(|(_, e)| e.fidelity >= min_fidelity)
            .collect();
        out.sort_by(|a, b| b.1.rate.total_cmp(&a.1.rate).then_with(|| a.0.cmp(b.0)));
        out
    }

    pub fn rows(&self, graph: &ResourceGraph) -> Vec<CapabilityRow> {
        self.entries
            .iter()
            .enumerate()
            .map(|(path_id, (p, e))| CapabilityRow {
                path_id,
                path: p.to_string(),
                hop_count: p.interior().len().saturating_sub(1),
                backbone_count: p.count_kind(graph, ComponentKind::Backbone),
                rate: e.rate,
                fidelity: e.fidelity,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{dumbbell, Dumbbell, NetworkModel};

    fn flat() -> CapabilityModel {
        CapabilityModel {
            base_rate_mean: 50.0,
            base_rate_std: 0.0,
            base_fid_mean: 0.9,
            base_fid_std: 0.0,
            per_hop_rate_factor: 1.0,
            per_backbone_rate_factor: 0.1,
            per_hop_fid_penalty: 0.0,
            per_backbone_fid_penalty: 0.0,
        }
    }

    #[test]
    fn identity_scaling_on_single_egi_path() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let t = generate_capabilities(&m.graph, &m.partition, &flat(), 0);
        let p = Path(vec![Dumbbell::end_node(0, 0), Dumbbell::I1, Dumbbell::end_node(0, 1)]);
        assert_eq!(t.get(&p), Some(&CapabilityEntry { rate: 50.0, fidelity: 0.9 }));
    }

    #[test]
    fn backbone_factor_applies_once() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let t = generate_capabilities(&m.graph, &m.partition, &flat(), 0);
        let local = Path(vec![Dumbbell::end_node(0, 0), Dumbbell::I1, Dumbbell::J1, Dumbbell::I2, Dumbbell::end_node(1, 0)]);
        let far =
            Path(vec![Dumbbell::end_node(0, 0), Dumbbell::I1, Dumbbell::J1, Dumbbell::B1, Dumbbell::J2, Dumbbell::I3, Dumbbell::end_node(2, 0)]);
        let ratio = t.get(&far).unwrap().rate / t.get(&local).unwrap().rate;
        assert!((ratio - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sampled_entries_in_range() {
        let m = NetworkModel::build(
            crate::network::random_topology(crate::network::TopologyParams { backbones: 3, local_areas: 3, end_nodes: 50 }, 2).unwrap(),
            1,
        )
        .unwrap();
        let model = CapabilityModel { base_rate_std: 30.0, base_fid_std: 0.3, ..CapabilityModel::default() };
        let t = generate_capabilities(&m.graph, &m.partition, &model, 9);
        assert!(t.len() >= 1000);
        assert!(t.iter().all(|(_, e)| e.rate > 0.0 && (0.0..=1.0).contains(&e.fidelity)));
    }

    #[test]
    fn deterministic_and_versioned() {
        let m = NetworkModel::build(dumbbell(), 4).unwrap();
        let model = CapabilityModel::default();
        let a = generate_capabilities(&m.graph, &m.partition, &model, 3);
        assert_eq!(a, generate_capabilities(&m.graph, &m.partition, &model, 3));
        assert_eq!(a.version, 4);
        let b = a.regenerate(&m.graph, &m.partition, &model, 3);
        assert!(b.version > a.version);
    }

    #[test]
    fn feasible_paths_filter_and_order() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let t = generate_capabilities(&m.graph, &m.partition, &CapabilityModel::default(), 1);
        let (a, b) = (Dumbbell::end_node(0, 0), Dumbbell::end_node(2, 3));
        assert_eq!(t.feasible_paths(a, b, 0.0).len(), 1);
        assert!(t.feasible_paths(a, b, 1.01).is_empty());

        let mut manual = t.clone();
        let p1 = Path(vec![a, ComponentId(900), b]);
        let p2 = Path(vec![a, ComponentId(901), b]);
        manual.entries.insert(p1.clone(), CapabilityEntry { rate: 50.0, fidelity: 0.9 });
        manual.entries.insert(p2.clone(), CapabilityEntry { rate: 80.0, fidelity: 0.9 });
        manual.by_pair.insert((a.min(b), a.max(b)), vec![p1.clone(), p2.clone()]);
        let order: Vec<&Path> = manual.feasible_paths(a, b, 0.0).into_iter().map(|x| x.0).collect();
        assert_eq!(order, vec![&p2, &p1]);
    }

    #[test]
    fn model_check_reports_field() {
        let bad = CapabilityModel { per_hop_rate_factor: 1.5, ..CapabilityModel::default() };
        assert_eq!(bad.check().unwrap_err().0, "per_hop_rate_factor");
        assert!(CapabilityModel::default().check().is_ok());
    }
}
