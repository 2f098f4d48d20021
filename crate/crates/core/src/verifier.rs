//! The walk verifier: step tests, stopping random walks, exact truncated statistics
//! and seeded Monte Carlo estimates.
//!
//! Randomness comes from ChaCha8; trial `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` with stream `i` ([`RNG_CONTRACT`]), so estimates do
//! not depend on how trials are scheduled across threads.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplify::power::{check_walk_cap, for_each_walk, Walk};
use crate::amplify::proof::Proof;
use crate::amplify::squared::consistent;
use crate::csp::{ConstraintGraph, Step};
use crate::error::{Error, Result};
use crate::rational::ratio;

pub const RNG_CONTRACT: &str = "chacha8-stream-v1";

/// The generator for trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Whether the opinions of `x` and `y` pass the test at `step`.
pub fn test_step(g: &ConstraintGraph, proof: &Proof, x: usize, y: usize, step: &Step) -> bool {
    let (v, w) = (step.from, step.to);
    let (Some(xv), Some(yv), Some(xw), Some(yw)) = (proof.get(x, v), proof.get(y, v), proof.get(x, w), proof.get(y, w))
    else {
        return true;
    };
    if !consistent(xv, yv) || !consistent(xw, yw) {
        return false;
    }
    let constraint = &g.edge(step.edge).constraint;
    let at_v = xv.union_with(yv);
    let at_w = xw.union_with(yw);
    at_v.iter().all(|&a| {
        at_w.iter().all(|&b| {
            let tuple = if step.forward { [a, b] } else { [b, a] };
            constraint.allows(&tuple)
        })
    })
}

fn count_failures(g: &ConstraintGraph, proof: &Proof, start: usize, steps: &[Step], faulty: Option<&[bool]>) -> (usize, usize) {
    let end = steps.last().map_or(start, |s| s.to);
    let mut failed = 0;
    let mut counted = 0;
    for s in steps {
        if !test_step(g, proof, start, end, s) {
            failed += 1;
            if faulty.is_none_or(|f| f[s.edge]) {
                counted += 1;
            }
        }
    }
    (failed, counted)
}

/// All steps of the walk pass against its two terminals.
pub fn test_walk(g: &ConstraintGraph, proof: &Proof, walk: &Walk) -> bool {
    let end = walk.end();
    walk.steps.iter().all(|s| test_step(g, proof, walk.start, end, s))
}

/// Failing steps of `walk`, restricted to edges flagged in `faulty` when given.
pub fn faulty_steps(g: &ConstraintGraph, proof: &Proof, walk: &Walk, faulty: Option<&[bool]>) -> usize {
    count_failures(g, proof, walk.start, &walk.steps, faulty).1
}

/// Membership mask for an edge list.
pub fn edge_mask(g: &ConstraintGraph, edges: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.num_edges()];
    for &e in edges {
        if e >= mask.len() {
            return Err(Error::validation(format!("edge {e} does not exist")));
        }
        mask[e] = true;
    }
    Ok(mask)
}

/// Stopping random walks with stop probability `1/r` per iteration.
pub struct WalkSampler<'g, R: Rng = ChaCha8Rng> {
    g: &'g ConstraintGraph,
    r: u32,
    rng: R,
}

impl<'g> WalkSampler<'g, ChaCha8Rng> {
    pub fn seeded(g: &'g ConstraintGraph, r: usize, seed: u64, stream: u64) -> Result<Self> {
        WalkSampler::new(g, r, trial_rng(seed, stream))
    }
}

impl<'g, R: Rng> WalkSampler<'g, R> {
    pub fn new(g: &'g ConstraintGraph, r: usize, rng: R) -> Result<Self> {
        g.require_binary("random walks")?;
        g.require_regular()?;
        if r < 1 || r > u32::MAX as usize {
            return Err(Error::validation("r must be a positive 32-bit integer"));
        }
        Ok(WalkSampler { g, r: r as u32, rng })
    }

    pub fn rng(&mut self) -> &mut R {
        &mut self.rng
    }

    fn stop(&mut self) -> bool {
        self.rng.gen_range(0..self.r) == 0
    }

    fn step_from(&mut self, v: usize) -> Step {
        let options = self.g.steps_from(v);
        options[self.rng.gen_range(0..options.len())]
    }

    /// After-stopping walk: step, then stop with probability `1/r`. Stops at `limit`
    /// steps when given (the walk is then a prefix of the untruncated one).
    pub fn asrw_limited(&mut self, start: usize, limit: Option<usize>) -> (Walk, bool) {
        let mut walk = Walk::empty(start);
        let mut at = start;
        loop {
            let s = self.step_from(at);
            walk.steps.push(s);
            at = s.to;
            if self.stop() {
                return (walk, false);
            }
            if limit.is_some_and(|l| walk.steps.len() >= l) {
                return (walk, true);
            }
        }
    }

    pub fn sample_asrw(&mut self, start: usize) -> Walk {
        self.asrw_limited(start, None).0
    }

    /// Before-stopping walk: stop with probability `1/r`, then step.
    pub fn sample_bsrw(&mut self, start: usize) -> Walk {
        let mut walk = Walk::empty(start);
        let mut at = start;
        while !self.stop() {
            let s = self.step_from(at);
            walk.steps.push(s);
            at = s.to;
        }
        walk
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierOutcome {
    pub accepted: bool,
    pub walk: Walk,
    /// Failing steps, counted only on flagged edges when a faulty set is given.
    pub faulty: usize,
    /// The walk ran past the truncation length and was accepted unread.
    pub truncated: bool,
}

/// One verifier run. With `truncate_at = Some(R)` a walk longer than `R` is accepted
/// without testing and reports `faulty = 0`; the reported walk is then its first `R + 1`
/// steps.
pub fn run_verifier<R: Rng>(
    g: &ConstraintGraph,
    proof: &Proof,
    r: usize,
    truncate_at: Option<usize>,
    faulty: Option<&[bool]>,
    rng: &mut R,
) -> Result<VerifierOutcome> {
    if g.num_vertices() == 0 {
        return Err(Error::validation("graph has no vertices"));
    }
    let x = rng.gen_range(0..g.num_vertices());
    let mut sampler = WalkSampler::new(g, r, &mut *rng)?;
    let (walk, _) = sampler.asrw_limited(x, truncate_at.map(|t| t + 1));
    if truncate_at.is_some_and(|t| walk.len() > t) {
        return Ok(VerifierOutcome { accepted: true, walk, faulty: 0, truncated: true });
    }
    let (failed, counted) = count_failures(g, proof, walk.start, &walk.steps, faulty);
    Ok(VerifierOutcome { accepted: failed == 0, walk, faulty: counted, truncated: false })
}

/// Exact moments of the truncated faulty-step count `N'`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedStats {
    pub mean: BigRational,
    pub second_moment: BigRational,
    pub prob_positive: BigRational,
    /// Probability that the truncated verifier rejects (some step fails, any edge).
    pub prob_reject: BigRational,
}

/// Exact `E[N']`, `E[N'^2]`, `Pr[N' > 0]` and rejection probability by enumerating every
/// walk of length `1..=R`; a length-`k` walk has probability `(1/n)(1−1/r)^(k−1)(1/r)d^(−k)`.
pub fn exact_truncated_stats(
    g: &ConstraintGraph,
    proof: &Proof,
    faulty: Option<&[bool]>,
    r: usize,
    radius: usize,
    cap: u64,
) -> Result<TruncatedStats> {
    g.require_binary("verifier statistics")?;
    let d = g.require_regular()?;
    if r < 2 {
        return Err(Error::validation("r must be at least 2"));
    }
    if let Some(f) = faulty {
        if f.len() != g.num_edges() {
            return Err(Error::validation("faulty mask length differs from the edge count"));
        }
    }
    check_walk_cap(g, d, radius, cap)?;
    // Integer weight of a length-k walk: (r-1)^(k-1) r^(R-k) d^(R-k); the common
    // denominator is n r^R d^R.
    let weights = crate::amplify::power::multiplicities(r, radius, d);
    let mut s1 = vec![0u64; radius];
    let mut s2 = vec![0u64; radius];
    let mut pos = vec![0u64; radius];
    let mut rej = vec![0u64; radius];
    for_each_walk(g, radius, |start, steps| {
        let k = steps.len() - 1;
        let (failed, counted) = count_failures(g, proof, start, steps, faulty);
        let c = counted as u64;
        s1[k] += c;
        s2[k] += c * c;
        pos[k] += (c > 0) as u64;
        rej[k] += (failed > 0) as u64;
    });
    let denom = BigInt::from(g.num_vertices())
        * BigInt::from(r).pow(radius as u32)
        * BigInt::from(d).pow(radius as u32);
    let combine = |sums: &[u64]| {
        let num: BigUint = sums.iter().zip(&weights).map(|(&s, w)| w * s).sum();
        BigRational::new(BigInt::from(num), denom.clone())
    };
    Ok(TruncatedStats {
        mean: combine(&s1),
        second_moment: combine(&s2),
        prob_positive: combine(&pos),
        prob_reject: combine(&rej),
    })
}

/// Integer tallies over a block of trials; merging is order independent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    rejections: u64,
    positive: u64,
    s1: u128,
    s2: u128,
    s4: u128,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            rejections: self.rejections + o.rejections,
            positive: self.positive + o.positive,
            s1: self.s1 + o.s1,
            s2: self.s2 + o.s2,
            s4: self.s4 + o.s4,
        }
    }
}

struct TrialSpec<'a> {
    g: &'a ConstraintGraph,
    proof: &'a Proof,
    faulty: Option<&'a [bool]>,
    r: usize,
    radius: usize,
    seed: u64,
}

impl TrialSpec<'_> {
    fn run_range(&self, range: std::ops::Range<u64>) -> Result<Tally> {
        let mut t = Tally::default();
        for i in range {
            let mut rng = trial_rng(self.seed, i);
            let out = run_verifier(self.g, self.proof, self.r, Some(self.radius), self.faulty, &mut rng)?;
            let n = out.faulty as u128;
            t.trials += 1;
            t.rejections += (!out.accepted) as u64;
            t.positive += (n > 0) as u64;
            t.s1 += n;
            t.s2 += n * n;
            t.s4 += n * n * n * n;
        }
        Ok(t)
    }

    fn run(&self, trials: u64, threads: usize) -> Result<Tally> {
        if trials == 0 {
            return Err(Error::validation("trials must be at least 1"));
        }
        self.g.require_regular()?;
        let threads = threads.max(1) as u64;
        let chunk = trials.div_ceil(threads);
        let ranges: Vec<_> = (0..threads).map(|i| (i * chunk).min(trials)..((i + 1) * chunk).min(trials)).collect();
        let tallies = run_ranges(self, &ranges)?;
        Ok(tallies.into_iter().fold(Tally::default(), Tally::merge))
    }
}

#[cfg(feature = "parallel")]
fn run_ranges(spec: &TrialSpec<'_>, ranges: &[std::ops::Range<u64>]) -> Result<Vec<Tally>> {
    use rayon::prelude::*;
    if ranges.len() <= 1 {
        return ranges.iter().map(|r| spec.run_range(r.clone())).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ranges.len())
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    pool.install(|| ranges.par_iter().map(|r| spec.run_range(r.clone())).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_ranges(spec: &TrialSpec<'_>, ranges: &[std::ops::Range<u64>]) -> Result<Vec<Tally>> {
    ranges.iter().map(|r| spec.run_range(r.clone())).collect()
}

/// Monte Carlo estimate with standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_sums(n: u64, sum: f64, sum_sq: f64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, stderr: (var / nf).sqrt() }
    }

    /// `|mean − exact| ≤ k·stderr`, with exact agreement required at zero spread.
    pub fn within(&self, exact: f64, k: f64) -> bool {
        (self.mean - exact).abs() <= k * self.stderr + 1e-12
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloStats {
    pub trials: u64,
    pub mean: Estimate,
    pub second_moment: Estimate,
    pub prob_positive: Estimate,
    pub prob_reject: Estimate,
}

/// Seeded Monte Carlo estimates of the same quantities as [`exact_truncated_stats`].
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_stats(
    g: &ConstraintGraph,
    proof: &Proof,
    faulty: Option<&[bool]>,
    r: usize,
    radius: usize,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<MonteCarloStats> {
    let spec = TrialSpec { g, proof, faulty, r, radius, seed: master_seed };
    let t = spec.run(trials, threads)?;
    let indicator = |k: u64| Estimate::from_sums(t.trials, k as f64, k as f64);
    Ok(MonteCarloStats {
        trials: t.trials,
        mean: Estimate::from_sums(t.trials, t.s1 as f64, t.s2 as f64),
        second_moment: Estimate::from_sums(t.trials, t.s2 as f64, t.s4 as f64),
        prob_positive: indicator(t.positive),
        prob_reject: indicator(t.rejections),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RejectionEstimate {
    pub trials: u64,
    pub rejections: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

/// Fraction of truncated-verifier runs that reject.
pub fn estimate_rejection(
    g: &ConstraintGraph,
    proof: &Proof,
    r: usize,
    radius: usize,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<RejectionEstimate> {
    let spec = TrialSpec { g, proof, faulty: None, r, radius, seed: master_seed };
    let t = spec.run(trials, threads)?;
    let e = Estimate::from_sums(t.trials, t.rejections as f64, t.rejections as f64);
    Ok(RejectionEstimate { trials: t.trials, rejections: t.rejections, p_hat: e.mean, stderr: e.stderr })
}

/// Exact `Pr[e_j ∈ F | e_i ∈ F]` for the verifier's walk (survival to step `j`
/// included). `F` must be loop-free.
pub fn step_pair_conditional(g: &ConstraintGraph, faulty: &[bool], r: usize, i: usize, j: usize) -> Result<BigRational> {
    g.require_binary("walk statistics")?;
    let d = g.require_regular()?;
    if i == 0 || j <= i {
        return Err(Error::validation("need 1 ≤ i < j"));
    }
    if faulty.len() != g.num_edges() {
        return Err(Error::validation("faulty mask length differs from the edge count"));
    }
    let f_edges: Vec<usize> = (0..g.num_edges()).filter(|&e| faulty[e]).collect();
    if f_edges.is_empty() {
        return Err(Error::validation("F must be nonempty"));
    }
    if f_edges.iter().any(|&e| g.edge(e).members[0] == g.edge(e).members[1]) {
        return Err(Error::validation("F must not contain self-loops"));
    }
    let n = g.num_vertices();
    // Endpoint of a uniformly random directed F-step.
    let mut mu = vec![BigRational::zero(); n];
    let half = ratio(1, 2 * f_edges.len());
    for &e in &f_edges {
        for &m in &g.edge(e).members {
            mu[m] += &half;
        }
    }
    // Advance j - i - 1 steps of the simple random walk.
    let step_prob = ratio(1, d);
    for _ in 0..j - i - 1 {
        let mut next = vec![BigRational::zero(); n];
        for (u, p) in mu.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let share = p * &step_prob;
            for s in g.steps_from(u) {
                next[s.to] += &share;
            }
        }
        mu = next;
    }
    let mut hit = BigRational::zero();
    for (u, p) in mu.iter().enumerate() {
        let deg_f = g.steps_from(u).iter().filter(|s| faulty[s.edge]).count();
        hit += p * ratio(deg_f, d);
    }
    let survive = num_traits::pow(BigRational::one() - ratio(1, r), j - i);
    Ok(survive * hit)
}

/// `(1 − 1/r)^(j−i) (|F|/|E| + (λ/d)^(j−i−1))`.
pub fn step_pair_bound(f_fraction: f64, lambda_over_d: f64, r: usize, i: usize, j: usize) -> f64 {
    let gap = (j - i) as i32;
    (1.0 - 1.0 / r as f64).powi(gap) * (f_fraction + lambda_over_d.powi(gap - 1))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::proof::lift_assignment;
    use crate::amplify::squared::SqSymbol;
    use crate::csp::{Alphabet, Assignment, Constraint, Symbol};
    use crate::gen::{complete_neq, cycle_neq};

    fn edge_vw() -> ConstraintGraph {
        // v = 0, w = 1 joined by a 3-colouring edge; x = 2 and y = 3 hold the opinions.
        let mut edges = vec![(0, 1, Constraint::not_equal(3))];
        for (a, b) in [(0, 2), (1, 2), (0, 3), (1, 3), (2, 3)] {
            edges.push((a, b, Constraint::Any));
        }
        ConstraintGraph::binary(4, Alphabet::new(["r", "g", "b"]).unwrap(), edges).unwrap()
    }

    fn proof_with(xv: SqSymbol, yv: SqSymbol, xw: SqSymbol, yw: SqSymbol) -> Proof {
        Proof::from_opinions(
            1,
            vec![vec![], vec![], vec![(0, xv), (1, xw)], vec![(0, yv), (1, yw)]],
        )
    }

    #[test]
    fn step_test_figure_cases() {
        let (r, g, b) = (Symbol(0), Symbol(1), Symbol(2));
        let s = SqSymbol::single;
        let graph = edge_vw();
        let step = graph.steps_from(0)[0];
        assert_eq!((step.from, step.to), (0, 1));

        let p = proof_with(s(r), s(b), s(r), s(r));
        assert!(!test_step(&graph, &p, 2, 3, &step));
        let p = proof_with(s(r), SqSymbol::pair(r, b), s(r), s(r));
        assert!(!test_step(&graph, &p, 2, 3, &step));
        let p = proof_with(s(r), SqSymbol::pair(r, b), s(g), s(g));
        assert!(test_step(&graph, &p, 2, 3, &step));
        assert!(test_step(&graph, &p, 3, 2, &step));

        let undefined = Proof::from_opinions(1, vec![vec![], vec![], vec![(0, s(r))], vec![(0, s(r)), (1, s(r))]]);
        assert!(test_step(&graph, &undefined, 2, 3, &step));
    }

    #[test]
    fn orientation_is_respected() {
        // Relation allows only (0, 1) in member order.
        let c = Constraint::table([vec![Symbol(0), Symbol(1)]]);
        let g = ConstraintGraph::binary(2, Alphabet::numeric(2), [(0, 1, c)]).unwrap();
        let proof = lift_assignment(&g, &Assignment::from_indices(&[0, 1]), 1).unwrap();
        for v in 0..2 {
            for s in g.steps_from(v) {
                assert!(test_step(&g, &proof, 0, 1, s));
            }
        }
        let bad = lift_assignment(&g, &Assignment::from_indices(&[1, 0]), 1).unwrap();
        assert!(g.steps_from(1).iter().all(|s| !test_step(&g, &bad, 0, 1, s)));
    }

    #[test]
    fn satisfying_lift_always_accepted() {
        let g = cycle_neq(6, 2);
        let proof = lift_assignment(&g, &Assignment::from_indices(&[0, 1, 0, 1, 0, 1]), 3).unwrap();
        for seed in 0..200 {
            let mut rng = trial_rng(seed, 0);
            let out = run_verifier(&g, &proof, 3, None, None, &mut rng).unwrap();
            assert!(out.accepted);
            assert_eq!(out.faulty, 0);
        }
        let stats = exact_truncated_stats(&g, &proof, None, 2, 3, 1 << 20).unwrap();
        assert!(stats.mean.is_zero() && stats.prob_reject.is_zero());
        let est = estimate_rejection(&g, &proof, 2, 3, 500, 1, 1).unwrap();
        assert_eq!(est.p_hat, 0.0);
    }

    #[test]
    fn truncation_reports_accept() {
        let g = complete_neq(4, 3);
        let proof = lift_assignment(&g, &Assignment::from_indices(&[0, 0, 0, 0]), 1).unwrap();
        let mut seen = false;
        for seed in 0..400 {
            let mut rng = trial_rng(seed, 0);
            let out = run_verifier(&g, &proof, 4, Some(1), None, &mut rng).unwrap();
            if out.walk.len() > 1 {
                assert!(out.truncated && out.accepted && out.faulty == 0);
                seen = true;
            } else {
                assert!(!out.accepted);
            }
        }
        assert!(seen);
    }

    #[test]
    fn empty_faulty_set_gives_zero_stats() {
        let g = complete_neq(4, 3);
        let proof = lift_assignment(&g, &Assignment::from_indices(&[0, 0, 0, 0]), 2).unwrap();
        let none = vec![false; g.num_edges()];
        let s = exact_truncated_stats(&g, &proof, Some(&none), 2, 2, 1 << 20).unwrap();
        assert!(s.mean.is_zero() && s.second_moment.is_zero() && s.prob_positive.is_zero());
        assert!(!s.prob_reject.is_zero());
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let g = complete_neq(4, 3);
        let proof = lift_assignment(&g, &Assignment::from_indices(&[0, 1, 1, 2]), 2).unwrap();
        let one = monte_carlo_stats(&g, &proof, None, 2, 2, 3000, 9, 1).unwrap();
        let four = monte_carlo_stats(&g, &proof, None, 2, 2, 3000, 9, 4).unwrap();
        assert_eq!(one, four);
    }
}
