//! Test-only oracles that share no code path with the library solvers.

#![allow(dead_code)]

use std::collections::HashSet;

use vsc::Instance;

/// Literal minimum over all `2^k` subcollections of `max_i ceil(c_i / w_i)`,
/// restricted to covers. Plain hash sets, no bitsets.
pub fn brute_force_opt(inst: &Instance) -> usize {
    let k = inst.k();
    assert!(k <= 20, "enumeration over 2^{k} subsets");
    let sets: Vec<HashSet<usize>> = inst.sets().iter().map(|s| s.iter().collect()).collect();
    let mut best = usize::MAX;
    for mask in 0u32..(1u32 << k) {
        let mut covered = HashSet::new();
        let mut counts = vec![0usize; inst.num_agents()];
        for (j, set) in sets.iter().enumerate() {
            if mask & (1 << j) != 0 {
                covered.extend(set.iter().copied());
                counts[inst.owner(j)] += 1;
            }
        }
        if covered.len() != inst.n() {
            continue;
        }
        let value = counts
            .iter()
            .zip(inst.weights())
            .map(|(&c, &w)| c.div_ceil(w as usize))
            .max()
            .unwrap_or(0);
        best = best.min(value);
    }
    best
}
