//! Exact minimum-objective solver for small instances.
//!
//! The min-max objective converts to per-agent cardinality budgets: a cover
//! with objective at most `t` exists iff `U` can be covered using at most
//! `t * w_i` sets of each agent `i`. [`exact_solve`] tries `t = 1, 2, ...`
//! and decides each budget with a depth-first search that always branches on
//! the lowest uncovered element. Candidate sets are tried in descending
//! residual gain; a set rejected at a branch point is excluded from the later
//! sibling branches. Nodes are pruned when the best achievable coverage under
//! the remaining budgets falls short, and failed states are memoized.
//!
//! The search is exponential. Instances over `max_sets` are refused, and a
//! search that exceeds `max_nodes` reports [`OracleError::Unknown`] rather
//! than a bound.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::ElementSet;
use crate::error::{Error, Result};
use crate::greedy::{greedy_solve, GreedyConfig, ResidualTrace};
use crate::model::Instance;

const MEMO_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_sets: usize,
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_sets: 24,
            max_nodes: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle size cap exceeded: k = {k} > max_sets = {max_sets}")]
    TooManySets { k: usize, max_sets: usize },
    #[error("oracle result unknown: node budget of {max_nodes} exhausted")]
    Unknown { max_nodes: u64 },
    #[error("oracle limits must be positive")]
    BadLimits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub opt: usize,
    /// Ascending set indices of an optimal cover.
    pub witness: Vec<usize>,
}

struct Search<'a> {
    inst: &'a Instance,
    nodes: u64,
    max_nodes: u64,
    failed: HashSet<(Vec<u64>, Vec<usize>, Vec<u64>)>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn new(inst: &Instance, max_nodes: u64) -> Search<'_> {
        Search {
            inst,
            nodes: 0,
            max_nodes,
            failed: HashSet::new(),
            chosen: Vec::new(),
        }
    }

    /// Most elements coverable with the remaining budgets, ignoring overlap.
    fn coverage_bound(&self, covered: &ElementSet, budget: &[usize], available: &ElementSet) -> usize {
        let mut total = 0;
        let mut gains = Vec::new();
        for (agent, &b) in budget.iter().enumerate() {
            if b == 0 {
                continue;
            }
            gains.clear();
            gains.extend(
                self.inst
                    .agent_sets(agent)
                    .iter()
                    .filter(|&&j| available.contains(j))
                    .map(|&j| self.inst.set(j).difference_count(covered)),
            );
            gains.sort_unstable_by(|a, b| b.cmp(a));
            total += gains.iter().take(b).sum::<usize>();
        }
        total
    }

    fn feasible(
        &mut self,
        covered: &ElementSet,
        budget: &mut [usize],
        available: &mut ElementSet,
    ) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::Unknown {
                max_nodes: self.max_nodes,
            });
        }
        let Some(elem) = covered.first_absent() else {
            return Ok(true);
        };
        let uncovered = covered.len() - covered.cardinality();
        if self.coverage_bound(covered, budget, available) < uncovered {
            return Ok(false);
        }
        let key = (
            covered.words().to_vec(),
            budget.to_vec(),
            available.words().to_vec(),
        );
        if self.failed.contains(&key) {
            return Ok(false);
        }

        let mut candidates: Vec<(usize, usize)> = available
            .iter()
            .filter(|&j| self.inst.set(j).contains(elem) && budget[self.inst.owner(j)] > 0)
            .map(|j| (j, self.inst.set(j).difference_count(covered)))
            .collect();
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut found = false;
        for &(j, _) in &candidates {
            available.remove(j);
            let agent = self.inst.owner(j);
            budget[agent] -= 1;
            self.chosen.push(j);
            let mut next = covered.clone();
            next.union_with(self.inst.set(j));
            let r = self.feasible(&next, budget, available);
            budget[agent] += 1;
            match r {
                Ok(true) => {
                    found = true;
                    break;
                }
                Ok(false) => {
                    self.chosen.pop();
                }
                Err(e) => return Err(e),
            }
        }
        for &(j, _) in &candidates {
            available.insert(j);
        }
        if !found && self.failed.len() < MEMO_CAP {
            self.failed.insert(key);
        }
        Ok(found)
    }
}

fn check_limits(inst: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    if limits.max_sets == 0 || limits.max_nodes == 0 {
        return Err(OracleError::BadLimits);
    }
    if inst.k() > limits.max_sets {
        return Err(OracleError::TooManySets {
            k: inst.k(),
            max_sets: limits.max_sets,
        });
    }
    Ok(())
}

fn search_budget(
    search: &mut Search<'_>,
    t: usize,
) -> Result<Option<Vec<usize>>, OracleError> {
    let inst = search.inst;
    let mut budget: Vec<usize> = (0..inst.num_agents())
        .map(|i| (t * inst.weight(i) as usize).min(inst.agent_sets(i).len()))
        .collect();
    let mut available = ElementSet::full(inst.k());
    search.failed.clear();
    search.chosen.clear();
    let ok = search.feasible(&ElementSet::empty(inst.n()), &mut budget, &mut available)?;
    Ok(ok.then(|| {
        let mut w = search.chosen.clone();
        w.sort_unstable();
        w
    }))
}

/// Decides whether a cover with objective at most `t` exists and returns one.
pub fn feasible_within(
    inst: &Instance,
    t: usize,
    limits: &OracleLimits,
) -> Result<Option<Vec<usize>>> {
    check_limits(inst, limits)?;
    let mut search = Search::new(inst, limits.max_nodes);
    Ok(search_budget(&mut search, t)?)
}

pub fn exact_solve(inst: &Instance, limits: &OracleLimits) -> Result<ExactSolution> {
    check_limits(inst, limits)?;
    if inst.n() == 0 {
        return Ok(ExactSolution {
            opt: 0,
            witness: Vec::new(),
        });
    }
    let (greedy, _) = greedy_solve(inst, &GreedyConfig::default())?;
    let upper = greedy.objective;
    let mut search = Search::new(inst, limits.max_nodes);
    for t in 1..upper {
        if let Some(witness) = search_budget(&mut search, t)? {
            log::debug!("exact: opt = {t} after {} nodes", search.nodes);
            return Ok(ExactSolution { opt: t, witness });
        }
    }
    // nothing below the greedy objective works, so greedy's cover is optimal
    let mut witness = greedy.picked;
    witness.sort_unstable();
    Ok(ExactSolution {
        opt: upper,
        witness,
    })
}

/// The residual instance after some number of greedy rounds: covered
/// elements removed, picked sets removed, empty residual sets dropped,
/// agents and weights unchanged.
#[derive(Debug, Clone)]
pub struct ResidualInstance {
    pub instance: Instance,
    /// Residual set index to original set index.
    pub set_map: Vec<usize>,
    /// Residual element index to original element.
    pub element_map: Vec<usize>,
}

pub fn residual_instance(
    inst: &Instance,
    trace: &ResidualTrace,
    round: usize,
) -> Result<ResidualInstance> {
    let rec = trace.record(round)?;
    let element_map: Vec<usize> = (0..inst.n()).filter(|&e| !rec.covered.contains(e)).collect();
    let mut new_index = vec![usize::MAX; inst.n()];
    for (ne, &e) in element_map.iter().enumerate() {
        new_index[e] = ne;
    }
    let set_map = rec.surviving.clone();
    let sets = set_map
        .iter()
        .map(|&j| {
            inst.set(j)
                .iter()
                .filter(|&e| !rec.covered.contains(e))
                .map(|e| new_index[e])
                .collect()
        })
        .collect();
    let owner = set_map.iter().map(|&j| inst.owner(j)).collect();
    let instance = Instance::new(element_map.len(), sets, owner, inst.weights().to_vec())
        .map_err(|e| Error::Internal(format!("residual instance at round {round}: {e}")))?;
    Ok(ResidualInstance {
        instance,
        set_map,
        element_map,
    })
}

/// Exact optimum of the residual instance after `round` greedy rounds.
pub fn residual_opt(
    inst: &Instance,
    trace: &ResidualTrace,
    round: usize,
    limits: &OracleLimits,
) -> Result<usize> {
    let residual = residual_instance(inst, trace, round)?;
    Ok(exact_solve(&residual.instance, limits)?.opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::objective;

    fn limits() -> OracleLimits {
        OracleLimits::default()
    }

    #[test]
    fn single_agent_disjoint_singletons() {
        let inst = Instance::new(2, vec![vec![0], vec![1]], vec![0, 0], vec![1]).unwrap();
        let r = exact_solve(&inst, &limits()).unwrap();
        assert_eq!(r.opt, 2);
        assert_eq!(r.witness, vec![0, 1]);
    }

    #[test]
    fn two_agents_work_in_parallel() {
        let inst = Instance::new(2, vec![vec![0], vec![1]], vec![0, 1], vec![1, 1]).unwrap();
        assert_eq!(exact_solve(&inst, &limits()).unwrap().opt, 1);
    }

    #[test]
    fn four_element_two_agent_example() {
        let inst = Instance::new(
            4,
            vec![vec![0, 1], vec![2], vec![2, 3], vec![0]],
            vec![0, 0, 1, 1],
            vec![1, 1],
        )
        .unwrap();
        let r = exact_solve(&inst, &limits()).unwrap();
        assert_eq!(r.opt, 1);
        assert_eq!(r.witness, vec![0, 2]);
        assert!(inst.coverage_of(&r.witness).is_full());
        assert_eq!(objective(&inst, &r.witness).unwrap(), 1);
    }

    #[test]
    fn witness_found_below_greedy() {
        // Greedy takes the 3-element middle set first and then needs two
        // more rounds; the two disjoint halves finish in two.
        let inst = Instance::new(
            6,
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3, 4]],
            vec![0, 0, 0],
            vec![1],
        )
        .unwrap();
        let (g, _) = greedy_solve(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(g.rounds, 3);
        let r = exact_solve(&inst, &limits()).unwrap();
        assert_eq!(r.opt, 2);
        assert_eq!(r.witness, vec![0, 1]);
    }

    #[test]
    fn size_cap_and_node_budget() {
        let sets: Vec<Vec<usize>> = (0..5).map(|e| vec![e]).collect();
        let inst = Instance::new(5, sets, vec![0; 5], vec![1]).unwrap();
        let capped = OracleLimits { max_sets: 4, max_nodes: 10 };
        assert!(matches!(
            exact_solve(&inst, &capped),
            Err(Error::Oracle(OracleError::TooManySets { k: 5, max_sets: 4 }))
        ));

        // two agents, seven overlapping pairs: needs real search
        let sets: Vec<Vec<usize>> = (0..8).map(|e| vec![e, (e + 1) % 8]).collect();
        let owner = (0..8).map(|j| j % 2).collect();
        let inst = Instance::new(8, sets, owner, vec![1, 1]).unwrap();
        let tiny = OracleLimits { max_sets: 24, max_nodes: 1 };
        assert!(matches!(
            exact_solve(&inst, &tiny),
            Err(Error::Oracle(OracleError::Unknown { .. }))
        ));
    }

    #[test]
    fn feasibility_is_monotone_in_budget() {
        let sets: Vec<Vec<usize>> = (0..9).map(|e| vec![e, (e + 3) % 9]).collect();
        let owner = (0..9).map(|j| j % 3).collect();
        let inst = Instance::new(9, sets, owner, vec![1, 1, 2]).unwrap();
        let answers: Vec<bool> = (1..6)
            .map(|t| feasible_within(&inst, t, &limits()).unwrap().is_some())
            .collect();
        let first = answers.iter().position(|&b| b).unwrap();
        assert!(answers[first..].iter().all(|&b| b));
        let opt = exact_solve(&inst, &limits()).unwrap().opt;
        assert_eq!(opt, first + 1);
    }

    #[test]
    fn residual_at_zero_and_final_round() {
        let inst = Instance::new(
            6,
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3, 4]],
            vec![0, 0, 0],
            vec![1],
        )
        .unwrap();
        let (_, trace) = greedy_solve(&inst, &GreedyConfig::traced()).unwrap();
        let trace = trace.unwrap();
        let full = exact_solve(&inst, &limits()).unwrap().opt;
        assert_eq!(residual_opt(&inst, &trace, 0, &limits()).unwrap(), full);
        let last = trace.final_round();
        assert_eq!(residual_opt(&inst, &trace, last, &limits()).unwrap(), 0);

        // after round 1 the middle set is gone; {0} and {5} remain uncovered
        let r1 = residual_instance(&inst, &trace, 1).unwrap();
        assert_eq!(r1.element_map, vec![0, 5]);
        assert_eq!(r1.set_map, vec![0, 1]);
        assert_eq!(r1.instance.n(), 2);
        assert_eq!(residual_opt(&inst, &trace, 1, &limits()).unwrap(), 2);
        assert!(residual_instance(&inst, &trace, last + 1).is_err());
    }
}
