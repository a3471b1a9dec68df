//! Ownership-blind greedy set cover, kept as the comparison point for the
//! round-based solver.

use serde::{Deserialize, Serialize};

use crate::bitset::ElementSet;
use crate::error::{Error, Result};
use crate::exact::{exact_solve, OracleLimits};
use crate::greedy::{greedy_solve, GreedyConfig};
use crate::model::{objective, Instance};

/// Classic greedy: repeatedly take the unpicked set with the largest number
/// of uncovered elements over all sets, lowest index on ties, until covered.
pub fn classic_greedy(inst: &Instance) -> Vec<usize> {
    let mut covered = ElementSet::empty(inst.n());
    let mut picked_flag = vec![false; inst.k()];
    let mut picked = Vec::new();
    while !covered.is_full() {
        let best = (0..inst.k())
            .filter(|&j| !picked_flag[j])
            .map(|j| (j, inst.set(j).difference_count(&covered)))
            .fold(None, |best: Option<(usize, usize)>, (j, g)| match best {
                Some((_, bg)) if bg >= g => best,
                _ => Some((j, g)),
            });
        match best {
            Some((j, g)) if g > 0 => {
                picked_flag[j] = true;
                picked.push(j);
                covered.union_with(inst.set(j));
            }
            // unreachable for validated instances
            _ => break,
        }
    }
    picked
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    pub baseline_objective: usize,
    pub vsc_objective: usize,
    pub vsc_rounds: usize,
    pub opt: Option<usize>,
}

/// Objective of an ownership-blind `cover` next to the round-based greedy's
/// objective and rounds. `opt` is filled in when `limits` is given and the
/// oracle answers.
pub fn imbalance_report(
    inst: &Instance,
    cover: &[usize],
    limits: Option<&OracleLimits>,
) -> Result<ImbalanceReport> {
    let baseline_objective = objective(inst, cover)?;
    if let Some(element) = inst.coverage_of(cover).first_absent() {
        return Err(Error::InvalidCover { element });
    }
    let (sol, _) = greedy_solve(inst, &GreedyConfig::default())?;
    let opt = match limits {
        Some(l) => match exact_solve(inst, l) {
            Ok(r) => Some(r.opt),
            Err(Error::Oracle(e)) => {
                log::info!("imbalance report without opt: {e}");
                None
            }
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(ImbalanceReport {
        baseline_objective,
        vsc_objective: sol.objective,
        vsc_rounds: sol.rounds,
        opt,
    })
}
