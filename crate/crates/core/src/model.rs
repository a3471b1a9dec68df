//! Instance and solution data model, the min-max objective, solution
//! verification, and the JSON file formats.
//!
//! Universe elements are dense integers `0..n`. Each set is owned by exactly
//! one agent; an agent with weight `w` can execute `w` sets per round. The
//! objective of a subcollection is `max_i ceil(c_i / w_i)` where `c_i` counts
//! the chosen sets owned by agent `i`.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bitset::ElementSet;
use crate::error::{Error, Result};

/// A validation set cover instance.
///
/// Immutable once built; every constructor validates the partition, weight
/// and coverage invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    sets: Vec<ElementSet>,
    owner: Vec<usize>,
    weights: Vec<u32>,
    agent_names: Vec<Option<String>>,
    element_labels: Option<Vec<String>>,
    // derived: ascending set indices per agent
    agent_sets: Vec<Vec<usize>>,
}

impl Instance {
    /// Builds and validates an instance.
    ///
    /// `sets[j]` lists the elements of set `j`, `owner[j]` the agent owning it,
    /// `weights[i]` the per-round capacity of agent `i`.
    pub fn new(
        n: usize,
        sets: Vec<Vec<usize>>,
        owner: Vec<usize>,
        weights: Vec<u32>,
    ) -> Result<Self> {
        if owner.len() != sets.len() {
            return Err(Error::Partition(format!(
                "{} sets but {} owner entries",
                sets.len(),
                owner.len()
            )));
        }
        let m = weights.len();
        for (i, &w) in weights.iter().enumerate() {
            if w == 0 {
                return Err(Error::Weight { agent: i, weight: 0 });
            }
        }
        let mut agent_sets = vec![Vec::new(); m];
        for (j, &a) in owner.iter().enumerate() {
            if a >= m {
                return Err(Error::Partition(format!(
                    "set {j} owned by agent {a} but only {m} agents exist"
                )));
            }
            agent_sets[a].push(j);
        }
        let mut bitsets = Vec::with_capacity(sets.len());
        for (j, elems) in sets.into_iter().enumerate() {
            if let Some(&bad) = elems.iter().find(|&&e| e >= n) {
                return Err(Error::ElementRange { set: j, element: bad, n });
            }
            bitsets.push(ElementSet::from_elements(n, elems));
        }
        let mut covered = ElementSet::empty(n);
        for s in &bitsets {
            covered.union_with(s);
        }
        if let Some(element) = covered.first_absent() {
            return Err(Error::Coverage { element });
        }
        Ok(Instance {
            n,
            sets: bitsets,
            owner,
            weights,
            agent_names: vec![None; m],
            element_labels: None,
            agent_sets,
        })
    }

    pub fn with_agent_names(mut self, names: Vec<Option<String>>) -> Result<Self> {
        if names.len() != self.num_agents() {
            return Err(Error::Labels(format!(
                "{} agent names for {} agents",
                names.len(),
                self.num_agents()
            )));
        }
        self.agent_names = names;
        Ok(self)
    }

    /// Attaches display labels for elements (e.g. `"12-40"` for an AS edge).
    pub fn with_element_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Labels(format!(
                "{} element labels for n = {}",
                labels.len(),
                self.n
            )));
        }
        self.element_labels = Some(labels);
        Ok(self)
    }

    /// Universe size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of sets.
    pub fn k(&self) -> usize {
        self.sets.len()
    }

    /// Number of agents.
    pub fn num_agents(&self) -> usize {
        self.weights.len()
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn set(&self, j: usize) -> &ElementSet {
        &self.sets[j]
    }

    pub fn owner(&self, j: usize) -> usize {
        self.owner[j]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn weight(&self, agent: usize) -> u32 {
        self.weights[agent]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Set indices owned by `agent`, ascending.
    pub fn agent_sets(&self, agent: usize) -> &[usize] {
        &self.agent_sets[agent]
    }

    pub fn agent_name(&self, agent: usize) -> Option<&str> {
        self.agent_names[agent].as_deref()
    }

    pub fn element_labels(&self) -> Option<&[String]> {
        self.element_labels.as_deref()
    }

    pub fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.k() {
            Err(Error::SetIndex { index: j, k: self.k() })
        } else {
            Ok(())
        }
    }

    /// Union of the given sets.
    pub fn coverage_of(&self, picked: &[usize]) -> ElementSet {
        let mut c = ElementSet::empty(self.n);
        for &j in picked {
            c.union_with(&self.sets[j]);
        }
        c
    }
}

/// `max_i ceil(c_i / w_i)` for the picked sets. Does not require a cover.
pub fn objective(inst: &Instance, picked: &[usize]) -> Result<usize> {
    let counts = agent_counts(inst, picked)?;
    Ok(counts
        .iter()
        .zip(inst.weights())
        .map(|(&c, &w)| c.div_ceil(w as usize))
        .max()
        .unwrap_or(0))
}

/// Number of picked sets owned by each agent. Rejects bad or repeated indices.
pub fn agent_counts(inst: &Instance, picked: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; inst.k()];
    let mut counts = vec![0usize; inst.num_agents()];
    for &j in picked {
        inst.check_index(j)?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::DuplicateIndex { index: j });
        }
        counts[inst.owner(j)] += 1;
    }
    Ok(counts)
}

/// One agent's picks within a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPicks {
    pub agent: usize,
    pub sets: Vec<usize>,
}

/// A solver result: the chosen subcollection and the round schedule that
/// produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    /// Number of rounds the solver started.
    pub rounds: usize,
    pub objective: usize,
    /// Chosen set indices in pick order.
    pub picked: Vec<usize>,
    pub schedule: Vec<Vec<AgentPicks>>,
}

impl Solution {
    /// Drops agent entries without picks and rounds without entries.
    pub fn canonicalize(&mut self) {
        for round in self.schedule.iter_mut() {
            round.retain(|p| !p.sets.is_empty());
        }
        self.schedule.retain(|r| !r.is_empty());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Failure {
    Cover { element: usize },
    Objective { stored: usize, recomputed: usize },
    Budget { round: usize, agent: usize, picks: usize, weight: u32 },
    Rounds { objective: usize, rounds: usize },
    Consistency { detail: String },
}

/// Outcome of [`verify_solution`]; failures are content, never errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub cover_valid: bool,
    pub objective_matches: bool,
    pub budgets_respected: bool,
    pub objective_within_rounds: bool,
    pub schedule_consistent: bool,
    pub failures: Vec<Failure>,
}

pub fn verify_solution(inst: &Instance, sol: &Solution) -> VerificationReport {
    let mut failures = Vec::new();
    let k = inst.k();

    // picked: in range, distinct
    let mut picked_ok = Vec::new();
    let mut seen = BTreeSet::new();
    for &j in &sol.picked {
        if j >= k {
            failures.push(Failure::Consistency {
                detail: format!("picked set {j} out of range (k = {k})"),
            });
        } else if !seen.insert(j) {
            failures.push(Failure::Consistency {
                detail: format!("set {j} picked more than once"),
            });
        } else {
            picked_ok.push(j);
        }
    }

    // schedule vs picked, ownership
    let mut scheduled = BTreeSet::new();
    for (r, round) in sol.schedule.iter().enumerate() {
        for entry in round {
            if entry.agent >= inst.num_agents() {
                failures.push(Failure::Consistency {
                    detail: format!("round {} names unknown agent {}", r + 1, entry.agent),
                });
                continue;
            }
            for &j in &entry.sets {
                if j >= k {
                    failures.push(Failure::Consistency {
                        detail: format!("round {} schedules set {j} out of range", r + 1),
                    });
                    continue;
                }
                if inst.owner(j) != entry.agent {
                    failures.push(Failure::Consistency {
                        detail: format!(
                            "round {} assigns set {j} to agent {} but it is owned by agent {}",
                            r + 1,
                            entry.agent,
                            inst.owner(j)
                        ),
                    });
                }
                if !scheduled.insert(j) {
                    failures.push(Failure::Consistency {
                        detail: format!("set {j} scheduled more than once"),
                    });
                }
            }
        }
    }
    for j in seen.difference(&scheduled) {
        failures.push(Failure::Consistency {
            detail: format!("set {j} picked but never scheduled"),
        });
    }
    for j in scheduled.difference(&seen) {
        failures.push(Failure::Consistency {
            detail: format!("set {j} scheduled but not picked"),
        });
    }
    if sol.schedule.len() > sol.rounds {
        failures.push(Failure::Consistency {
            detail: format!(
                "schedule has {} rounds but rounds = {}",
                sol.schedule.len(),
                sol.rounds
            ),
        });
    }
    let schedule_consistent = failures.is_empty();

    // (a) cover
    let covered = inst.coverage_of(&picked_ok);
    let uncovered: Vec<usize> = (0..inst.n()).filter(|&e| !covered.contains(e)).collect();
    let cover_valid = uncovered.is_empty();
    failures.extend(uncovered.into_iter().map(|element| Failure::Cover { element }));

    // (b) objective
    let recomputed = objective(inst, &picked_ok).unwrap_or(0);
    let objective_matches = recomputed == sol.objective;
    if !objective_matches {
        failures.push(Failure::Objective {
            stored: sol.objective,
            recomputed,
        });
    }

    // (c) per-round budgets
    let mut budgets_respected = true;
    for (r, round) in sol.schedule.iter().enumerate() {
        let mut per_agent = vec![0usize; inst.num_agents()];
        for entry in round.iter().filter(|e| e.agent < inst.num_agents()) {
            per_agent[entry.agent] += entry.sets.len();
        }
        for (agent, &picks) in per_agent.iter().enumerate() {
            let weight = inst.weight(agent);
            if picks > weight as usize {
                budgets_respected = false;
                failures.push(Failure::Budget {
                    round: r + 1,
                    agent,
                    picks,
                    weight,
                });
            }
        }
    }

    // (d) objective <= rounds
    let objective_within_rounds = sol.objective <= sol.rounds;
    if !objective_within_rounds {
        failures.push(Failure::Rounds {
            objective: sol.objective,
            rounds: sol.rounds,
        });
    }

    VerificationReport {
        ok: failures.is_empty(),
        cover_valid,
        objective_matches,
        budgets_respected,
        objective_within_rounds,
        schedule_consistent,
        failures,
    }
}

// ---- file formats ----

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    sets: Vec<Vec<usize>>,
    agents: Vec<AgentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elements: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AgentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    weight: i64,
    sets: Vec<usize>,
}

pub fn load_instance<R: Read>(reader: R) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_reader(reader)?;
    instance_from_file(file)
}

pub fn instance_from_str(s: &str) -> Result<Instance> {
    instance_from_file(serde_json::from_str(s)?)
}

fn instance_from_file(file: InstanceFile) -> Result<Instance> {
    let k = file.sets.len();
    let mut owner: Vec<Option<usize>> = vec![None; k];
    let mut weights = Vec::with_capacity(file.agents.len());
    let mut names = Vec::with_capacity(file.agents.len());
    for (i, agent) in file.agents.into_iter().enumerate() {
        if agent.weight < 1 || agent.weight > u32::MAX as i64 {
            return Err(Error::Weight {
                agent: i,
                weight: agent.weight,
            });
        }
        weights.push(agent.weight as u32);
        names.push(agent.name);
        for j in agent.sets {
            let slot = owner.get_mut(j).ok_or_else(|| {
                Error::Partition(format!("agent {i} lists set {j} but only {k} sets exist"))
            })?;
            if let Some(prev) = slot.replace(i) {
                return Err(Error::Partition(format!(
                    "set {j} is owned by agents {prev} and {i}"
                )));
            }
        }
    }
    let owner = owner
        .into_iter()
        .enumerate()
        .map(|(j, o)| o.ok_or_else(|| Error::Partition(format!("set {j} has no owner"))))
        .collect::<Result<Vec<_>>>()?;
    let inst = Instance::new(file.n, file.sets, owner, weights)?.with_agent_names(names)?;
    match file.elements {
        Some(labels) => inst.with_element_labels(labels),
        None => Ok(inst),
    }
}

fn instance_to_file(inst: &Instance) -> InstanceFile {
    InstanceFile {
        n: inst.n(),
        sets: inst.sets().iter().map(|s| s.to_vec()).collect(),
        agents: (0..inst.num_agents())
            .map(|i| AgentFile {
                name: inst.agent_name(i).map(str::to_owned),
                weight: inst.weight(i) as i64,
                sets: inst.agent_sets(i).to_vec(),
            })
            .collect(),
        elements: inst.element_labels().map(<[String]>::to_vec),
    }
}

/// Writes the canonical JSON form: elements ascending, agent sets ascending.
pub fn save_instance<W: Write>(inst: &Instance, writer: W) -> Result<()> {
    serde_json::to_writer(writer, &instance_to_file(inst))?;
    Ok(())
}

pub fn instance_to_string(inst: &Instance) -> String {
    serde_json::to_string(&instance_to_file(inst)).expect("instance serialization cannot fail")
}

/// Parses a solution file. Structural only; use [`verify_solution`] to check
/// it against an instance.
pub fn load_solution<R: Read>(reader: R) -> Result<Solution> {
    Ok(serde_json::from_reader(reader)?)
}

/// Writes the canonical JSON form (no empty rounds or empty agent entries).
pub fn save_solution<W: Write>(sol: &Solution, writer: W) -> Result<()> {
    let mut sol = sol.clone();
    sol.canonicalize();
    serde_json::to_writer(writer, &sol)?;
    Ok(())
}

pub fn solution_to_string(sol: &Solution) -> String {
    let mut buf = Vec::new();
    save_solution(sol, &mut buf).expect("solution serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits utf-8")
}
