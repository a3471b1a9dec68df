//! Round-based greedy for validation set cover.
//!
//! Each round visits the agents in index order; agent `i` makes up to `w_i`
//! picks, each time taking its not-yet-picked set with the largest number of
//! still-uncovered elements (lowest set index on ties). An agent whose best
//! gain is zero forfeits the rest of its turn. The run stops the moment every
//! element is covered, even mid-round, and reports the number of rounds
//! started.
//!
//! With tracing enabled the solver also records the residual state after
//! every round: uncovered count `n_l`, covered set `C_l`, the sets that are
//! unpicked and still have uncovered elements, and per-agent unpicked counts.
//!
//! Cost is O(rounds * k * n / 64).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bitset::ElementSet;
use crate::error::{Error, Result};
use crate::model::{objective, AgentPicks, Instance, Solution};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub trace: bool,
    pub tie_break: TieBreak,
}

impl GreedyConfig {
    pub fn traced() -> Self {
        GreedyConfig {
            trace: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickRecord {
    pub agent: usize,
    pub set: usize,
    pub gain: usize,
}

/// Residual state after round `round` (round 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    /// Uncovered elements remaining.
    pub n_l: usize,
    pub covered: ElementSet,
    /// Unpicked sets with a nonempty residual, ascending.
    pub surviving: Vec<usize>,
    /// Unpicked set count per agent.
    pub agent_remaining: Vec<usize>,
    /// Picks made during this round; empty for round 0.
    pub picks: Vec<PickRecord>,
}

impl RoundRecord {
    pub fn gained(&self) -> usize {
        self.picks.iter().map(|p| p.gain).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualTrace {
    records: Vec<RoundRecord>,
}

/// Borrowed view returned by [`residual_state`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualSnapshot<'a> {
    pub n_l: usize,
    pub surviving: &'a [usize],
    pub agent_remaining: &'a [usize],
}

#[derive(Serialize)]
struct TraceLine<'a> {
    round: usize,
    n_l: usize,
    gained: usize,
    picks: &'a [PickRecord],
}

impl ResidualTrace {
    /// Index of the last recorded round.
    pub fn final_round(&self) -> usize {
        self.records.len() - 1
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn record(&self, round: usize) -> Result<&RoundRecord> {
        self.records.get(round).ok_or(Error::RoundRange {
            round,
            rounds: self.final_round(),
        })
    }

    /// Uncovered counts `n_0, n_1, ...`.
    pub fn uncovered_counts(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.n_l).collect()
    }

    /// JSON lines export, one record per completed round (round 0 omitted).
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records[1..] {
            let line = TraceLine {
                round: r.round,
                n_l: r.n_l,
                gained: r.gained(),
                picks: &r.picks,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn residual_state(trace: &ResidualTrace, round: usize) -> Result<ResidualSnapshot<'_>> {
    let r = trace.record(round)?;
    Ok(ResidualSnapshot {
        n_l: r.n_l,
        surviving: &r.surviving,
        agent_remaining: &r.agent_remaining,
    })
}

fn snapshot(
    inst: &Instance,
    round: usize,
    covered: &ElementSet,
    picked: &[bool],
    picks: Vec<PickRecord>,
) -> RoundRecord {
    let surviving = (0..inst.k())
        .filter(|&j| !picked[j] && inst.set(j).difference_count(covered) > 0)
        .collect();
    let agent_remaining = (0..inst.num_agents())
        .map(|i| inst.agent_sets(i).iter().filter(|&&j| !picked[j]).count())
        .collect();
    RoundRecord {
        round,
        n_l: inst.n() - covered.cardinality(),
        covered: covered.clone(),
        surviving,
        agent_remaining,
        picks,
    }
}

/// Best unpicked set of `agent` by marginal gain; lowest index wins ties.
fn best_for_agent(
    inst: &Instance,
    agent: usize,
    covered: &ElementSet,
    picked: &[bool],
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    // agent_sets is ascending, so a strict `>` keeps the lowest index on ties
    for &j in inst.agent_sets(agent) {
        if picked[j] {
            continue;
        }
        let gain = inst.set(j).difference_count(covered);
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((j, gain));
        }
    }
    best
}

pub fn greedy_solve(
    inst: &Instance,
    cfg: &GreedyConfig,
) -> Result<(Solution, Option<ResidualTrace>)> {
    let TieBreak::LowestIndex = cfg.tie_break;
    let n = inst.n();
    let mut covered = ElementSet::empty(n);
    let mut uncovered = n;
    let mut picked_flag = vec![false; inst.k()];
    let mut picked = Vec::new();
    let mut schedule = Vec::new();
    let mut records = Vec::new();
    if cfg.trace {
        records.push(snapshot(inst, 0, &covered, &picked_flag, Vec::new()));
    }

    let mut rounds = 0;
    while uncovered > 0 {
        rounds += 1;
        let mut round_entries = Vec::new();
        let mut round_picks = Vec::new();
        for agent in 0..inst.num_agents() {
            let mut sets = Vec::new();
            for _ in 0..inst.weight(agent) {
                // a zero best gain ends this agent's turn
                let Some((j, gain)) = best_for_agent(inst, agent, &covered, &picked_flag)
                    .filter(|&(_, g)| g > 0)
                else {
                    break;
                };
                picked_flag[j] = true;
                picked.push(j);
                sets.push(j);
                covered.union_with(inst.set(j));
                uncovered -= gain;
                round_picks.push(PickRecord { agent, set: j, gain });
                if uncovered == 0 {
                    break;
                }
            }
            if !sets.is_empty() {
                round_entries.push(AgentPicks { agent, sets });
            }
            if uncovered == 0 {
                break;
            }
        }
        if round_picks.is_empty() {
            return Err(Error::Internal(format!(
                "round {rounds} covered nothing with {uncovered} elements uncovered"
            )));
        }
        schedule.push(round_entries);
        if cfg.trace {
            records.push(snapshot(inst, rounds, &covered, &picked_flag, round_picks));
        }
    }

    let objective = objective(inst, &picked)?;
    let sol = Solution {
        rounds,
        objective,
        picked,
        schedule,
    };
    let trace = cfg.trace.then_some(ResidualTrace { records });
    Ok((sol, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_solution;

    fn two_agent() -> Instance {
        Instance::new(
            4,
            vec![vec![0, 1], vec![2], vec![2, 3], vec![0]],
            vec![0, 0, 1, 1],
            vec![1, 1],
        )
        .unwrap()
    }

    #[test]
    fn single_covering_set() {
        let inst = Instance::new(2, vec![vec![0, 1]], vec![0], vec![1]).unwrap();
        let (sol, _) = greedy_solve(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!((sol.rounds, sol.objective), (1, 1));
        assert_eq!(sol.picked, vec![0]);
    }

    #[test]
    fn one_pick_per_round_lowest_index_first() {
        let inst = Instance::new(2, vec![vec![0], vec![1]], vec![0, 0], vec![1]).unwrap();
        let (sol, _) = greedy_solve(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(sol.rounds, 2);
        assert_eq!(sol.picked, vec![0, 1]);
        assert_eq!(sol.schedule.len(), 2);
    }

    #[test]
    fn two_agents_finish_in_one_round() {
        let inst = two_agent();
        let (sol, trace) = greedy_solve(&inst, &GreedyConfig::traced()).unwrap();
        assert_eq!(sol.picked, vec![0, 2]);
        assert_eq!((sol.rounds, sol.objective), (1, 1));
        assert_eq!(
            sol.schedule,
            vec![vec![
                AgentPicks { agent: 0, sets: vec![0] },
                AgentPicks { agent: 1, sets: vec![2] },
            ]]
        );
        let trace = trace.unwrap();
        assert_eq!(trace.uncovered_counts(), vec![4, 0]);
        let s0 = residual_state(&trace, 0).unwrap();
        assert_eq!(s0.n_l, 4);
        assert_eq!(s0.surviving, &[0, 1, 2, 3]);
        assert_eq!(s0.agent_remaining, &[2, 2]);
        let s1 = residual_state(&trace, 1).unwrap();
        assert_eq!(s1.n_l, 0);
        assert!(s1.surviving.is_empty());
        assert_eq!(s1.agent_remaining, &[1, 1]);
        assert!(matches!(
            residual_state(&trace, 2),
            Err(Error::RoundRange { round: 2, rounds: 1 })
        ));
    }

    #[test]
    fn exits_mid_round() {
        // agent 0 covers everything; agent 1 never gets a turn
        let inst = Instance::new(3, vec![vec![0, 1, 2], vec![0]], vec![0, 1], vec![1, 1]).unwrap();
        let (sol, _) = greedy_solve(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(sol.picked, vec![0]);
        assert_eq!(sol.schedule, vec![vec![AgentPicks { agent: 0, sets: vec![0] }]]);
    }

    #[test]
    fn zero_gain_forfeits_turn() {
        // agent 0 has weight 3 but only its first pick helps in round 1
        let inst = Instance::new(
            4,
            vec![vec![0, 1], vec![0], vec![1], vec![2, 3]],
            vec![0, 0, 0, 1],
            vec![3, 1],
        )
        .unwrap();
        let (sol, _) = greedy_solve(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(sol.picked, vec![0, 3]);
        assert_eq!(sol.rounds, 1);
        assert!(verify_solution(&inst, &sol).ok);
    }

    #[test]
    fn weight_allows_several_picks_per_round() {
        let inst = Instance::new(
            3,
            vec![vec![0], vec![1], vec![2]],
            vec![0, 0, 0],
            vec![2],
        )
        .unwrap();
        let (sol, _) = greedy_solve(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(sol.rounds, 2);
        assert_eq!(sol.objective, 2);
        assert_eq!(sol.schedule[0][0].sets, vec![0, 1]);
    }

    #[test]
    fn empty_universe_needs_no_rounds() {
        let inst = Instance::new(0, vec![vec![]], vec![0], vec![1]).unwrap();
        let (sol, trace) = greedy_solve(&inst, &GreedyConfig::traced()).unwrap();
        assert_eq!((sol.rounds, sol.objective), (0, 0));
        assert_eq!(trace.unwrap().final_round(), 0);
    }

    #[test]
    fn trace_jsonl_lines() {
        let (_, trace) = greedy_solve(&two_agent(), &GreedyConfig::traced()).unwrap();
        let mut out = Vec::new();
        trace.unwrap().write_jsonl(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "{\"round\":1,\"n_l\":0,\"gained\":4,\"picks\":[{\"agent\":0,\"set\":0,\"gain\":2},{\"agent\":1,\"set\":2,\"gain\":2}]}\n"
        );
    }
}
