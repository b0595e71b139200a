use std::collections::HashMap;

use super::classes::FillingClassSet;
use crate::demand::{DemandId, Pgt, TaskAlternatives};
use crate::network::ComponentId;
use crate::time::Nanos;

/// Decisions of one admission round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmitOutcome {
    pub accepted: Vec<Pgt>,
    pub rejected: Vec<DemandId>,
}

/// Admits front-to-back: each demand gets its first alternative whose class
/// still fits within `t_si` on every associated resource.
pub fn admit_tasks(intake: Vec<TaskAlternatives>, classes: &mut FillingClassSet, t_si: Nanos) -> AdmitOutcome {
    let mut available: HashMap<ComponentId, Nanos> = HashMap::new();
    for class in classes.iter() {
        for &r in classes.resources(class.cell) {
            *available.entry(r).or_insert(t_si) -= class.required_time();
        }
    }
    let mut out = AdmitOutcome::default();
    for alternatives in intake {
        let Some(demand) = alternatives.first().map(|p| p.demand) else { continue };
        let mut admitted = None;
        for pgt in alternatives {
            let Ok(cell) = classes.class_of(&pgt.path) else { continue };
            let class = classes.get(cell).expect("class for every cell");
            let old = class.required_time();
            let new = class.required_time_with(&pgt);
            let fits = classes.resources(cell).iter().all(|r| available.get(r).copied().unwrap_or(t_si) + old - new >= 0);
            if fits {
                for &r in classes.resources(cell) {
                    *available.entry(r).or_insert(t_si) += old - new;
                }
                admitted = Some(pgt);
                break;
            }
        }
        match admitted {
            Some(pgt) => {
                classes.assign(pgt.clone()).expect("class checked above");
                out.accepted.push(pgt);
            }
            None => out.rejected.push(demand),
        }
    }
    out
}
