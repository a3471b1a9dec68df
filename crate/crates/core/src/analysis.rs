//! Approximation diagnostics for the round-based greedy.
//!
//! Checks come in two grades:
//!
//! * **Hard**: definitional or provable. `rounds >= objective >= opt`, the
//!   relaxed envelope `rounds <= 1 + 2 ln(n) opt`, and `opt_l <= opt` for
//!   every residual instance. A failure here is a bug.
//! * **Findings**: the tighter statements for the round greedy, measured and
//!   reported. The bound `rounds <= 1 + ln(n) opt`, the per-round decay
//!   `n_l <= n (1 - 1/opt)^l`, and the per-round progress
//!   `gained_l >= n_{l-1} / opt_{l-1}`.
//!
//! Logs are natural; the bound's derivation goes through `e^{1/opt}`.
//! Real-valued bounds are compared against the integral round count with an
//! absolute slack of [`BOUND_SLACK`] toward acceptance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_solve, residual_opt, OracleLimits};
use crate::greedy::{greedy_solve, GreedyConfig, ResidualTrace};
use crate::model::Instance;

pub const BOUND_SLACK: f64 = 1e-9;

/// Relative guard band for [`taylor_inequality_check`].
pub const TAYLOR_GUARD: f64 = 1e-12;

pub const CSV_HEADER: [&str; 11] = [
    "seed",
    "n",
    "k",
    "m",
    "rounds",
    "objective",
    "opt",
    "ln_bound",
    "safe_bound",
    "lemma_ok",
    "claim_ok",
];

/// `1 + ln(n) * opt`.
pub fn ln_bound(n: usize, opt: usize) -> f64 {
    1.0 + (n as f64).ln() * opt as f64
}

/// `1 + 2 ln(n) * opt`.
pub fn safe_bound(n: usize, opt: usize) -> f64 {
    1.0 + 2.0 * (n as f64).ln() * opt as f64
}

fn within(value: usize, bound: f64) -> bool {
    value as f64 <= bound + BOUND_SLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub n: usize,
    pub rounds: usize,
    pub objective: usize,
    /// `None` when the oracle could not answer; the bounds are then not
    /// evaluated.
    pub opt: Option<usize>,
    pub ln_bound: Option<f64>,
    pub safe_bound: Option<f64>,
    pub ln_bound_holds: Option<bool>,
    pub safe_bound_holds: Option<bool>,
}

fn oracle_opt(inst: &Instance, limits: &OracleLimits) -> Result<Option<usize>> {
    match exact_solve(inst, limits) {
        Ok(r) => Ok(Some(r.opt)),
        Err(Error::Oracle(e)) => {
            log::debug!("oracle gave no answer: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn theorem_from(n: usize, rounds: usize, objective: usize, opt: Option<usize>) -> TheoremCheck {
    let bounds = opt.filter(|_| n > 0).map(|o| (ln_bound(n, o), safe_bound(n, o)));
    TheoremCheck {
        n,
        rounds,
        objective,
        opt,
        ln_bound: bounds.map(|b| b.0),
        safe_bound: bounds.map(|b| b.1),
        // an empty universe takes zero rounds, trivially inside both bounds
        ln_bound_holds: opt.map(|_| bounds.is_none_or(|b| within(rounds, b.0))),
        safe_bound_holds: opt.map(|_| bounds.is_none_or(|b| within(rounds, b.1))),
    }
}

pub fn theorem_check(inst: &Instance, limits: &OracleLimits) -> Result<TheoremCheck> {
    let (sol, _) = greedy_solve(inst, &GreedyConfig::default())?;
    let opt = oracle_opt(inst, limits)?;
    Ok(theorem_from(inst.n(), sol.rounds, sol.objective, opt))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRound {
    pub round: usize,
    pub remaining: usize,
    /// `n (1 - 1/opt)^round`
    pub bound: f64,
    pub holds: bool,
}

/// Per-round decay check against a known `opt`.
pub fn lemma_rounds(trace: &ResidualTrace, n: usize, opt: usize) -> Vec<LemmaRound> {
    let base = if opt == 0 { 0.0 } else { 1.0 - 1.0 / opt as f64 };
    trace.records()[1..]
        .iter()
        .map(|r| {
            // opt = 1 gives base 0: the first round must finish the job
            let bound = n as f64 * base.powi(r.round as i32);
            LemmaRound {
                round: r.round,
                remaining: r.n_l,
                bound,
                holds: within(r.n_l, bound),
            }
        })
        .collect()
}

/// Runs the traced greedy and the oracle, then checks
/// `n_l <= n (1 - 1/opt)^l` for every round `l >= 1`.
pub fn lemma_check(inst: &Instance, limits: &OracleLimits) -> Result<Vec<LemmaRound>> {
    let (_, trace) = greedy_solve(inst, &GreedyConfig::traced())?;
    let opt = exact_solve(inst, limits)?.opt;
    Ok(lemma_rounds(&trace.expect("traced run"), inst.n(), opt))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRound {
    pub round: usize,
    /// `n_{l-1}`
    pub remaining_before: usize,
    pub gained: usize,
    /// `opt_{l-1}`; `None` when the residual oracle gave no answer.
    pub residual_opt: Option<usize>,
    /// `None` when unevaluated.
    pub holds: Option<bool>,
}

fn claim_rounds(
    inst: &Instance,
    trace: &ResidualTrace,
    opt: Option<usize>,
    limits: &OracleLimits,
) -> Result<Vec<ClaimRound>> {
    let records = trace.records();
    let mut out = Vec::with_capacity(records.len().saturating_sub(1));
    for l in 1..records.len() {
        let before = records[l - 1].n_l;
        let gained = records[l].gained();
        let prev_opt = match (l, opt) {
            (1, Some(o)) => Some(o),
            _ => match residual_opt(inst, trace, l - 1, limits) {
                Ok(o) => Some(o),
                Err(Error::Oracle(e)) => {
                    log::debug!("round {l} left unevaluated: {e}");
                    None
                }
                Err(e) => return Err(e),
            },
        };
        // gained >= before / opt, in integers
        let holds = prev_opt.map(|o| gained * o >= before);
        out.push(ClaimRound {
            round: l,
            remaining_before: before,
            gained,
            residual_opt: prev_opt,
            holds,
        });
    }
    Ok(out)
}

/// Checks `gained_l >= n_{l-1} / opt_{l-1}` per round, solving each residual
/// instance exactly.
pub fn claim_check(inst: &Instance, limits: &OracleLimits) -> Result<Vec<ClaimRound>> {
    let (_, trace) = greedy_solve(inst, &GreedyConfig::traced())?;
    claim_rounds(inst, &trace.expect("traced run"), None, limits)
}

/// `(1 + 1/(x-1)) - e^{1/x}`, computed as `1/(x-1) - expm1(1/x)` to avoid
/// cancellation.
pub fn taylor_margin(x: u64) -> f64 {
    let x = x as f64;
    1.0 / (x - 1.0) - (1.0 / x).exp_m1()
}

/// Verifies `1 + 1/(x-1) >= e^{1/x}` for every integer `x` in `2..=x_max`,
/// accepting values within a relative band of [`TAYLOR_GUARD`].
pub fn taylor_inequality_check(x_max: u64) -> bool {
    (2..=x_max).all(|x| {
        let xf = x as f64;
        let lhs = 1.0 + 1.0 / (xf - 1.0);
        let rhs = (1.0 / xf).exp();
        lhs >= rhs * (1.0 - TAYLOR_GUARD)
    })
}

/// One corpus row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub rounds: usize,
    pub objective: usize,
    pub opt: Option<usize>,
    pub ln_bound: Option<f64>,
    pub safe_bound: Option<f64>,
    pub ln_bound_holds: Option<bool>,
    pub safe_bound_holds: Option<bool>,
    pub lemma_ok: Option<bool>,
    pub claim_ok: Option<bool>,
    /// Residual optima never exceed `opt`; `None` when not evaluated.
    pub residual_opt_ok: Option<bool>,
    pub lemma: Vec<LemmaRound>,
    pub claim: Vec<ClaimRound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub limits: OracleLimits,
    /// Solve every residual instance for the progress check.
    pub claim: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            limits: OracleLimits::default(),
            claim: true,
        }
    }
}

pub fn evaluate(inst: &Instance, seed: u64, opts: &EvalOptions) -> Result<RatioRecord> {
    let (sol, trace) = greedy_solve(inst, &GreedyConfig::traced())?;
    let trace = trace.expect("traced run");
    let opt = oracle_opt(inst, &opts.limits)?;
    let th = theorem_from(inst.n(), sol.rounds, sol.objective, opt);

    let lemma = opt
        .map(|o| lemma_rounds(&trace, inst.n(), o))
        .unwrap_or_default();
    let lemma_ok = opt.map(|_| lemma.iter().all(|r| r.holds));

    let (claim, claim_ok, residual_opt_ok) = if opts.claim {
        let claim = claim_rounds(inst, &trace, opt, &opts.limits)?;
        let ok = if claim.iter().any(|c| c.holds.is_none()) {
            None
        } else {
            Some(claim.iter().all(|c| c.holds == Some(true)))
        };
        let residual_ok = opt.map(|o| claim.iter().filter_map(|c| c.residual_opt).all(|r| r <= o));
        (claim, ok, residual_ok)
    } else {
        (Vec::new(), None, None)
    };

    Ok(RatioRecord {
        seed,
        n: inst.n(),
        k: inst.k(),
        m: inst.num_agents(),
        rounds: sol.rounds,
        objective: sol.objective,
        opt,
        ln_bound: th.ln_bound,
        safe_bound: th.safe_bound,
        ln_bound_holds: th.ln_bound_holds,
        safe_bound_holds: th.safe_bound_holds,
        lemma_ok,
        claim_ok,
        residual_opt_ok,
        lemma,
        claim,
    })
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "unknown".to_owned(), |x| x.to_string())
}

impl RatioRecord {
    /// Descriptions of failed hard checks.
    pub fn hard_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.objective > self.rounds {
            out.push(format!("objective {} > rounds {}", self.objective, self.rounds));
        }
        if let Some(opt) = self.opt {
            if self.objective < opt {
                out.push(format!("objective {} < opt {opt}", self.objective));
            }
            if self.rounds < opt {
                out.push(format!("rounds {} < opt {opt}", self.rounds));
            }
        }
        if self.safe_bound_holds == Some(false) {
            out.push(format!(
                "rounds {} > 1 + 2 ln(n) opt = {}",
                self.rounds,
                cell(self.safe_bound)
            ));
        }
        if self.residual_opt_ok == Some(false) {
            out.push("a residual optimum exceeds opt".to_owned());
        }
        out
    }

    /// Descriptions of failed approximation-level statements.
    pub fn bound_findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.ln_bound_holds == Some(false) {
            out.push(format!(
                "rounds {} > 1 + ln(n) opt = {}",
                self.rounds,
                cell(self.ln_bound)
            ));
        }
        for r in self.lemma.iter().filter(|r| !r.holds) {
            out.push(format!(
                "round {}: n_l = {} > n (1 - 1/opt)^l = {}",
                r.round, r.remaining, r.bound
            ));
        }
        for c in self.claim.iter().filter(|c| c.holds == Some(false)) {
            out.push(format!(
                "round {}: gained {} < n_prev / opt_prev = {} / {}",
                c.round,
                c.gained,
                c.remaining_before,
                c.residual_opt.unwrap_or(0)
            ));
        }
        out
    }

    /// Row matching [`CSV_HEADER`]; unknowns print as `unknown`.
    pub fn csv_fields(&self) -> [String; 11] {
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.m.to_string(),
            self.rounds.to_string(),
            self.objective.to_string(),
            cell(self.opt),
            cell(self.ln_bound),
            cell(self.safe_bound),
            cell(self.lemma_ok),
            cell(self.claim_ok),
        ]
    }
}

/// Corpus summary; counts are instances with at least one entry of the kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    pub hard_violations: usize,
    pub bound_findings: usize,
}

pub fn summarize(records: &[RatioRecord]) -> Summary {
    Summary {
        instances: records.len(),
        hard_violations: records
            .iter()
            .filter(|r| !r.hard_violations().is_empty())
            .count(),
        bound_findings: records
            .iter()
            .filter(|r| !r.bound_findings().is_empty())
            .count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> OracleLimits {
        OracleLimits::default()
    }

    #[test]
    fn single_element() {
        let inst = Instance::new(1, vec![vec![0]], vec![0], vec![1]).unwrap();
        let t = theorem_check(&inst, &limits()).unwrap();
        assert_eq!((t.rounds, t.opt), (1, Some(1)));
        assert_eq!(t.ln_bound, Some(1.0));
        assert_eq!(t.ln_bound_holds, Some(true));
        assert_eq!(t.safe_bound_holds, Some(true));
    }

    #[test]
    fn disjoint_singletons_greedy_is_optimal() {
        let sets = (0..8).map(|e| vec![e]).collect();
        let inst = Instance::new(8, sets, vec![0; 8], vec![1]).unwrap();
        let t = theorem_check(&inst, &limits()).unwrap();
        assert_eq!((t.rounds, t.opt), (8, Some(8)));
        assert!((t.ln_bound.unwrap() - (1.0 + 8.0 * 8f64.ln())).abs() < 1e-12);
        assert_eq!(t.ln_bound_holds, Some(true));
    }

    #[test]
    fn unknown_oracle_leaves_bounds_unevaluated() {
        let sets: Vec<Vec<usize>> = (0..8).map(|e| vec![e, (e + 1) % 8]).collect();
        let inst = Instance::new(8, sets, (0..8).map(|j| j % 2).collect(), vec![1, 1]).unwrap();
        let tiny = OracleLimits { max_sets: 24, max_nodes: 1 };
        let t = theorem_check(&inst, &tiny).unwrap();
        assert_eq!(t.opt, None);
        assert_eq!(t.ln_bound_holds, None);
        assert!(matches!(lemma_check(&inst, &tiny), Err(Error::Oracle(_))));
    }

    #[test]
    fn lemma_opt_one_requires_one_round_finish() {
        let inst = Instance::new(
            4,
            vec![vec![0, 1], vec![2], vec![2, 3], vec![0]],
            vec![0, 0, 1, 1],
            vec![1, 1],
        )
        .unwrap();
        let l = lemma_check(&inst, &limits()).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!((l[0].remaining, l[0].bound), (0, 0.0));
        assert!(l[0].holds);
    }

    #[test]
    fn lemma_flags_slow_decay() {
        // n = 6, opt = 2: bounds are 3, 1.5, 0.75
        let inst = Instance::new(
            6,
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3, 4]],
            vec![0, 0, 0],
            vec![1],
        )
        .unwrap();
        let (_, trace) = greedy_solve(&inst, &GreedyConfig::traced()).unwrap();
        let rounds = lemma_rounds(&trace.unwrap(), 6, 2);
        // greedy leaves {0, 5} after round 1 (2 <= 3), {5} after round 2 (1 <= 1.5)
        assert_eq!(rounds.iter().map(|r| r.remaining).collect::<Vec<_>>(), vec![2, 1, 0]);
        assert!(rounds.iter().all(|r| r.holds));
        // against a (wrong) opt of 1 the first round must already finish
        let (_, trace) = greedy_solve(&inst, &GreedyConfig::traced()).unwrap();
        assert!(!lemma_rounds(&trace.unwrap(), 6, 1)[0].holds);
    }

    #[test]
    fn claim_examples() {
        let inst = Instance::new(
            6,
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3, 4]],
            vec![0, 0, 0],
            vec![1],
        )
        .unwrap();
        let c = claim_check(&inst, &limits()).unwrap();
        assert_eq!(c.len(), 3);
        // round 1: gained 4 of 6, opt 2
        assert_eq!((c[0].gained, c[0].remaining_before, c[0].residual_opt), (4, 6, Some(2)));
        // final round covers everything that was left
        let last = c.last().unwrap();
        assert_eq!(last.gained, last.remaining_before);
        assert!(c.iter().all(|r| r.holds == Some(true)));
    }

    #[test]
    fn taylor_examples() {
        assert!(2.0 >= 0.5f64.exp());
        assert!(taylor_inequality_check(2));
        assert!(taylor_inequality_check(1000));
        // margin at 10^6, evaluated at 50 digits: 5.0000083e-13
        let m = taylor_margin(1_000_000);
        assert!((m - 5.000_008_333e-13).abs() < 1e-17, "{m}");
        assert!((taylor_margin(2) - 0.351_278_729_299_871_85).abs() < 1e-15);
    }

    #[test]
    fn record_csv_and_summary() {
        let inst = Instance::new(2, vec![vec![0], vec![1]], vec![0, 0], vec![1]).unwrap();
        let r = evaluate(&inst, 42, &EvalOptions::default()).unwrap();
        let f = r.csv_fields();
        assert_eq!(&f[..7], &["42", "2", "2", "1", "2", "2", "2"]);
        assert_eq!(f[9], "true");
        assert!(r.hard_violations().is_empty());
        let s = summarize(&[r.clone(), r]);
        assert_eq!(s, Summary { instances: 2, hard_violations: 0, bound_findings: 0 });
    }

    #[test]
    fn unknown_cells_in_csv() {
        let sets: Vec<Vec<usize>> = (0..8).map(|e| vec![e, (e + 1) % 8]).collect();
        let inst = Instance::new(8, sets, (0..8).map(|j| j % 2).collect(), vec![1, 1]).unwrap();
        let opts = EvalOptions {
            limits: OracleLimits { max_sets: 24, max_nodes: 1 },
            claim: true,
        };
        let r = evaluate(&inst, 0, &opts).unwrap();
        assert_eq!(r.csv_fields()[6], "unknown");
        assert_eq!(r.csv_fields()[10], "unknown");
        assert!(r.hard_violations().is_empty());
    }
}
