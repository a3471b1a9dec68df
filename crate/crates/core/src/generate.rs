//! Seeded instance generators.
//!
//! `random` draws an arbitrary set system. `traceroute` mimics a measurement
//! platform: agents sit at distinct nodes of a random graph, each measures a
//! shortest path to a handful of destinations, and every path's edge set
//! becomes one set owned by that agent. In both cases the universe is
//! defined as the union of the generated sets, re-indexed densely, so the
//! coverage precondition holds by construction.
//!
//! Generation is a pure function of the spec; the RNG is ChaCha8 seeded from
//! `seed`, so output is stable across platforms and releases.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;

const CONNECT_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    #[serde(flatten)]
    pub kind: GenKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    Random(RandomParams),
    Traceroute(TracerouteParams),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Inclusive set-size bounds.
    pub set_size: (usize, usize),
    /// Inclusive weight bounds.
    pub weight: (u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    /// G(V, p); resampled until connected.
    ErdosRenyi { p: f64 },
    /// Each new node links to `attach` existing nodes chosen by degree.
    PreferentialAttachment { attach: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracerouteParams {
    pub nodes: usize,
    pub graph: GraphModel,
    pub agents: usize,
    /// Destinations measured per agent.
    pub destinations: usize,
    pub weight: (u32, u32),
}

/// The graph and paths behind a traceroute-style instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub adjacency: Vec<Vec<usize>>,
    pub agent_nodes: Vec<usize>,
    /// Node sequence of the path behind each set.
    pub paths: Vec<Vec<usize>>,
    /// Undirected edge `(lo, hi)` behind each universe element.
    pub edges: Vec<(usize, usize)>,
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    match &spec.kind {
        GenKind::Random(p) => generate_random(spec.seed, p),
        GenKind::Traceroute(p) => generate_traceroute(spec.seed, p).map(|(inst, _)| inst),
    }
}

fn check_weights((lo, hi): (u32, u32)) -> Result<()> {
    if lo == 0 || lo > hi {
        return Err(Error::GenSpec(format!(
            "weight bounds [{lo}, {hi}] must satisfy 1 <= min <= max"
        )));
    }
    Ok(())
}

/// Maps the elements used by `sets` onto `0..n'` preserving order.
fn reindex(sets: &[Vec<usize>]) -> (usize, Vec<Vec<usize>>, Vec<usize>) {
    let used: BTreeSet<usize> = sets.iter().flatten().copied().collect();
    let index: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let sets = sets
        .iter()
        .map(|s| {
            let mut v: Vec<usize> = s.iter().map(|e| index[e]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    (used.len(), sets, used.into_iter().collect())
}

pub fn generate_random(seed: u64, p: &RandomParams) -> Result<Instance> {
    let (s_min, s_max) = p.set_size;
    if p.n == 0 || p.k == 0 || p.m == 0 {
        return Err(Error::GenSpec("n, k and m must be positive".into()));
    }
    if p.m > p.k {
        return Err(Error::GenSpec(format!(
            "m = {} agents cannot each own one of k = {} sets",
            p.m, p.k
        )));
    }
    if s_min == 0 || s_min > s_max || s_max > p.n {
        return Err(Error::GenSpec(format!(
            "set size bounds [{s_min}, {s_max}] must satisfy 1 <= min <= max <= n = {}",
            p.n
        )));
    }
    check_weights(p.weight)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(p.k);
    let mut owner = Vec::with_capacity(p.k);
    for j in 0..p.k {
        let size = rng.gen_range(s_min..=s_max);
        raw.push(sample(&mut rng, p.n, size).into_vec());
        // round-robin for the first m sets so no agent is empty
        owner.push(if j < p.m { j } else { rng.gen_range(0..p.m) });
    }
    let weights = (0..p.m)
        .map(|_| rng.gen_range(p.weight.0..=p.weight.1))
        .collect();
    let (n, sets, _) = reindex(&raw);
    Instance::new(n, sets, owner, weights)
}

fn connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adj.len()
}

fn erdos_renyi(rng: &mut ChaCha8Rng, nodes: usize, p: f64) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); nodes];
    for u in 0..nodes {
        for v in u + 1..nodes {
            if rng.gen_bool(p) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    adj
}

fn preferential_attachment(rng: &mut ChaCha8Rng, nodes: usize, attach: usize) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for v in 1..nodes {
        let want = attach.min(v);
        let mut targets = BTreeSet::new();
        while targets.len() < want {
            // degree + 1 so isolated early nodes can still be chosen
            let total: usize = (0..v).map(|u| adj[u].len() + 1).sum();
            let mut x = rng.gen_range(0..total);
            let mut pick = 0;
            for (u, nbrs) in adj[..v].iter().enumerate() {
                let w = nbrs.len() + 1;
                if x < w {
                    pick = u;
                    break;
                }
                x -= w;
            }
            targets.insert(pick);
        }
        for u in targets {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    adj
}

/// Shortest path from `src` to `dst` with the lexicographically smallest
/// node sequence among all shortest paths.
pub fn lex_shortest_path(adj: &[Vec<usize>], src: usize, dst: usize) -> Option<Vec<usize>> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[dst] = 0;
    queue.push_back(dst);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if dist[src] == usize::MAX {
        return None;
    }
    let mut path = vec![src];
    let mut u = src;
    while u != dst {
        u = adj[u]
            .iter()
            .copied()
            .filter(|&v| dist[v] + 1 == dist[u])
            .min()
            .expect("bfs distances admit a predecessor");
        path.push(u);
    }
    Some(path)
}

pub fn generate_traceroute(seed: u64, p: &TracerouteParams) -> Result<(Instance, Topology)> {
    if p.nodes < 2 || p.agents == 0 || p.destinations == 0 {
        return Err(Error::GenSpec(
            "need at least 2 nodes, 1 agent and 1 destination".into(),
        ));
    }
    if p.agents > p.nodes {
        return Err(Error::GenSpec(format!(
            "{} agents cannot sit at distinct nodes of a {}-node graph",
            p.agents, p.nodes
        )));
    }
    if p.destinations > p.nodes - 1 {
        return Err(Error::GenSpec(format!(
            "{} destinations per agent exceeds the {} other nodes",
            p.destinations,
            p.nodes - 1
        )));
    }
    match p.graph {
        GraphModel::ErdosRenyi { p } if !(p > 0.0 && p <= 1.0) => {
            return Err(Error::GenSpec(format!("edge probability {p} not in (0, 1]")));
        }
        GraphModel::PreferentialAttachment { attach: 0 } => {
            return Err(Error::GenSpec("attachment count must be positive".into()));
        }
        _ => {}
    }
    check_weights(p.weight)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adjacency = match p.graph {
        GraphModel::ErdosRenyi { p: prob } => {
            let mut found = None;
            for _ in 0..CONNECT_ATTEMPTS {
                let g = erdos_renyi(&mut rng, p.nodes, prob);
                if connected(&g) {
                    found = Some(g);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::Generation(format!(
                    "no connected G({}, {prob}) in {CONNECT_ATTEMPTS} attempts",
                    p.nodes
                ))
            })?
        }
        GraphModel::PreferentialAttachment { attach } => {
            preferential_attachment(&mut rng, p.nodes, attach)
        }
    };
    let mut adjacency = adjacency;
    for nbrs in adjacency.iter_mut() {
        nbrs.sort_unstable();
    }

    let agent_nodes = sample(&mut rng, p.nodes, p.agents).into_vec();
    let mut paths = Vec::new();
    let mut raw = Vec::new();
    let mut owner = Vec::new();
    for (agent, &src) in agent_nodes.iter().enumerate() {
        let others: Vec<usize> = (0..p.nodes).filter(|&v| v != src).collect();
        for idx in sample(&mut rng, others.len(), p.destinations) {
            let dst = others[idx];
            let path = lex_shortest_path(&adjacency, src, dst)
                .ok_or_else(|| Error::Internal("connected graph without a path".into()))?;
            let edges: Vec<(usize, usize)> = path
                .windows(2)
                .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
                .collect();
            raw.push(edges);
            paths.push(path);
            owner.push(agent);
        }
    }
    let weights = (0..p.agents)
        .map(|_| rng.gen_range(p.weight.0..=p.weight.1))
        .collect();

    // edges are keyed as lo * nodes + hi for re-indexing
    let keyed: Vec<Vec<usize>> = raw
        .iter()
        .map(|s| s.iter().map(|&(a, b)| a * p.nodes + b).collect())
        .collect();
    let (n, sets, used) = reindex(&keyed);
    let edges: Vec<(usize, usize)> = used.iter().map(|&key| (key / p.nodes, key % p.nodes)).collect();
    let labels = edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
    let inst = Instance::new(n, sets, owner, weights)?.with_element_labels(labels)?;
    Ok((
        inst,
        Topology {
            adjacency,
            agent_nodes,
            paths,
            edges,
        },
    ))
}

/// Instances where ownership-blind set cover piles every pick onto agent 0.
///
/// Universe of `2m` elements split into `m` pairs. Agent 0 owns every pair
/// (sets `0..m`); agent `i >= 1` owns a copy of pair `i` (set `m + i - 1`).
/// All weights are 1. Classic greedy takes sets `0..m` (ties go to the lower
/// index) for objective `m`; the round-based greedy finishes in one round.
pub fn imbalance_family(m: usize) -> Result<Instance> {
    if m < 1 {
        return Err(Error::GenSpec("imbalance family needs m >= 1".into()));
    }
    let pair = |i: usize| vec![2 * i, 2 * i + 1];
    let mut sets: Vec<Vec<usize>> = (0..m).map(pair).collect();
    let mut owner = vec![0; m];
    for i in 1..m {
        sets.push(pair(i));
        owner.push(i);
    }
    Instance::new(2 * m, sets, owner, vec![1; m])
}

/// Parameters for the seeded random benchmark corpus. Every instance has
/// `n <= max_n` and `k <= max_k`.
pub fn corpus_random_spec(seed: u64, max_n: usize, max_k: usize) -> GenSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de_0000_0001);
    let m = rng.gen_range(1..=3.min(max_k));
    let k = rng.gen_range(m.max(2).min(max_k)..=max_k);
    let n = rng.gen_range(4.min(max_n)..=max_n);
    let s_max = rng.gen_range(1..=n.min(6));
    GenSpec {
        seed,
        kind: GenKind::Random(RandomParams {
            n,
            k,
            m,
            set_size: (1, s_max),
            weight: (1, 2),
        }),
    }
}

/// Single agent of weight 1: the plain set cover corner of the problem.
pub fn corpus_single_agent_spec(seed: u64, max_n: usize, max_k: usize) -> GenSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de_0000_0002);
    let k = rng.gen_range(1..=max_k);
    let n = rng.gen_range(1..=max_n);
    let s_max = rng.gen_range(1..=n);
    GenSpec {
        seed,
        kind: GenKind::Random(RandomParams {
            n,
            k,
            m: 1,
            set_size: (1, s_max),
            weight: (1, 1),
        }),
    }
}

/// Traceroute-style corpus entry: 20-node G(V, 0.15), up to 4 agents with
/// up to 4 destinations each.
pub fn corpus_traceroute_spec(seed: u64) -> GenSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de_0000_0003);
    GenSpec {
        seed,
        kind: GenKind::Traceroute(TracerouteParams {
            nodes: 20,
            graph: GraphModel::ErdosRenyi { p: 0.15 },
            agents: rng.gen_range(1..=4),
            destinations: rng.gen_range(1..=4),
            weight: (1, 2),
        }),
    }
}
