//! Distances to stationarity and their mixing times.
//!
//! Four metrics are computed from exact distribution vectors (never sampled):
//!
//! - total variation, as the one-sided sum `Σ_{y: π(y)>μ(y)} (π(y) − μ(y))`,
//! - the L²(π) norm `‖μ/π − 1‖₂ = (Σ_y (μ(y)/π(y) − 1)² π(y))^{1/2}`,
//! - separation `max_y (1 − μ(y)/π(y))`,
//! - relative entropy `D(μ‖π) = Σ_y μ(y) log(μ(y)/π(y))` in nats, with
//!   `0·log 0 = 0`.
//!
//! The inequalities tying the four together (tv ≤ sep, Pinsker `2·tv² ≤ D`,
//! `D ≤ sep·log(1/π_*)`, `tv ≤ l2/2`) hold at every time step and are
//! enforced by the checks below at 1e-12.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::Accumulator;
use crate::spectral::second_singular_value;
use crate::{chain::DistributionVector, Error, MarkovChain, Result};

/// One value per metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerMetric<T> {
    pub tv: T,
    pub l2: T,
    pub sep: T,
    pub entropy: T,
}

impl<T> PerMetric<T> {
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerMetric<U> {
        PerMetric {
            tv: f(&self.tv),
            l2: f(&self.l2),
            sep: f(&self.sep),
            entropy: f(&self.entropy),
        }
    }
}

/// Default thresholds: 1/4 for tv and L², 1/e for separation and entropy.
pub fn default_epsilons() -> PerMetric<f64> {
    PerMetric {
        tv: 0.25,
        l2: 0.25,
        sep: (-1.0f64).exp(),
        entropy: (-1.0f64).exp(),
    }
}

/// All four distances at one time, with the start state that attains each
/// (the given start when evaluated from a single distribution).
#[derive(Debug, Clone, Serialize)]
pub struct DistanceProfile {
    pub time: u64,
    pub tv: f64,
    pub l2: f64,
    pub sep: f64,
    pub entropy: f64,
    pub worst_start: PerMetric<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingTimes {
    pub tau_tv: u64,
    pub tau_2: u64,
    pub tau_sep: u64,
    pub tau_ent: u64,
    pub epsilons: PerMetric<f64>,
}

impl MixingTimes {
    pub fn get(&self) -> PerMetric<u64> {
        PerMetric { tv: self.tau_tv, l2: self.tau_2, sep: self.tau_sep, entropy: self.tau_ent }
    }
}

pub(crate) struct MetricValues {
    pub tv: f64,
    pub l2: f64,
    pub sep: f64,
    pub entropy: f64,
}

/// Evaluate all four metrics of `mu` against `pi`. `pi` must be strictly
/// positive (validated at chain construction).
pub(crate) fn metrics_against(pi: &[f64], mu: &[f64]) -> MetricValues {
    let mut tv = Accumulator::new();
    let mut l2 = Accumulator::new();
    let mut ent = Accumulator::new();
    let mut sep = f64::NEG_INFINITY;
    for (&p, &m) in pi.iter().zip(mu) {
        let ratio = m / p;
        if p > m {
            tv.add(p - m);
        }
        let dev = ratio - 1.0;
        l2.add(dev * dev * p);
        if m > 0.0 {
            ent.add(m * ratio.ln());
        }
        sep = sep.max(1.0 - ratio);
    }
    MetricValues {
        tv: tv.total(),
        l2: l2.total().max(0.0).sqrt(),
        sep,
        entropy: ent.total(),
    }
}

fn check_positive_stationary(chain: &MarkovChain) -> Result<()> {
    if let Some(state) = chain.stationary().iter().position(|&p| p <= 0.0) {
        return Err(Error::AbsoluteContinuity { state });
    }
    Ok(())
}

/// Distances of `Pᵗ(start, ·)` from π.
pub fn distances_at(chain: &MarkovChain, start: usize, t: u64) -> Result<DistanceProfile> {
    let dist = DistributionVector::point(chain.n_states(), start)?;
    distances_at_dist(chain, &dist, t)
}

/// Distances of `dist · Pᵗ` from π (the `worst_start` fields carry the index
/// of the maximal point mass of the start).
pub fn distances_at_dist(
    chain: &MarkovChain,
    dist: &DistributionVector,
    t: u64,
) -> Result<DistanceProfile> {
    check_positive_stationary(chain)?;
    let evolved = crate::chain::evolve(chain, dist, t)?;
    let v = metrics_against(chain.stationary(), evolved.probs());
    let start = dist
        .probs()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(DistanceProfile {
        time: evolved.time(),
        tv: v.tv,
        l2: v.l2,
        sep: v.sep,
        entropy: v.entropy,
        worst_start: PerMetric { tv: start, l2: start, sep: start, entropy: start },
    })
}

/// Tracks `P^t` row by row so worst-case-over-starts metrics can be read off
/// at successive times. Memory is n².
pub struct WorstCaseCurve<'a> {
    chain: &'a MarkovChain,
    rows: Vec<Vec<f64>>,
    t: u64,
}

impl<'a> WorstCaseCurve<'a> {
    pub fn new(chain: &'a MarkovChain) -> Result<Self> {
        check_positive_stationary(chain)?;
        let n = chain.n_states();
        let rows = (0..n)
            .map(|x| {
                let mut r = vec![0.0; n];
                r[x] = 1.0;
                r
            })
            .collect();
        Ok(Self { chain, rows, t: 0 })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// The rows of `P^t` (row x = distribution started from x).
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn step(&mut self) {
        let kernel = self.chain.kernel();
        let next: Vec<Vec<f64>> = if self.rows.len() >= 32 {
            self.rows.par_iter().map(|r| kernel.apply_left(r)).collect()
        } else {
            self.rows.iter().map(|r| kernel.apply_left(r)).collect()
        };
        self.rows = next;
        self.t += 1;
    }

    /// Per-start metric values at the current time.
    pub fn per_start(&self) -> Vec<DistanceProfile> {
        let pi = self.chain.stationary();
        self.rows
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let v = metrics_against(pi, row);
                DistanceProfile {
                    time: self.t,
                    tv: v.tv,
                    l2: v.l2,
                    sep: v.sep,
                    entropy: v.entropy,
                    worst_start: PerMetric { tv: x, l2: x, sep: x, entropy: x },
                }
            })
            .collect()
    }

    /// Worst-case-over-starts profile at the current time.
    pub fn profile(&self) -> DistanceProfile {
        let per_start = self.per_start();
        let mut out = DistanceProfile {
            time: self.t,
            tv: f64::NEG_INFINITY,
            l2: f64::NEG_INFINITY,
            sep: f64::NEG_INFINITY,
            entropy: f64::NEG_INFINITY,
            worst_start: PerMetric { tv: 0, l2: 0, sep: 0, entropy: 0 },
        };
        for (x, p) in per_start.iter().enumerate() {
            if p.tv > out.tv {
                out.tv = p.tv;
                out.worst_start.tv = x;
            }
            if p.l2 > out.l2 {
                out.l2 = p.l2;
                out.worst_start.l2 = x;
            }
            if p.sep > out.sep {
                out.sep = p.sep;
                out.worst_start.sep = x;
            }
            if p.entropy > out.entropy {
                out.entropy = p.entropy;
                out.worst_start.entropy = x;
            }
        }
        out
    }
}

/// Worst-case profile at a single time.
pub fn worst_case_profile(chain: &MarkovChain, t: u64) -> Result<DistanceProfile> {
    let mut curve = WorstCaseCurve::new(chain)?;
    for _ in 0..t {
        curve.step();
    }
    Ok(curve.profile())
}

/// First-crossing tracker shared by the mixing-time searches. A crossing
/// only counts once the value has stayed at or below the threshold for
/// `GUARD` consecutive observations (distances from a fixed start need not
/// be monotone for non-reversible chains; worst-case distances are).
pub(crate) struct CrossingTracker {
    eps: PerMetric<f64>,
    candidate: PerMetric<Option<u64>>,
    confirmed: PerMetric<Option<u64>>,
}

pub(crate) const GUARD: u64 = 3;

impl CrossingTracker {
    pub fn new(eps: PerMetric<f64>) -> Self {
        Self {
            eps,
            candidate: PerMetric { tv: None, l2: None, sep: None, entropy: None },
            confirmed: PerMetric { tv: None, l2: None, sep: None, entropy: None },
        }
    }

    pub fn observe(&mut self, t: u64, values: PerMetric<f64>) {
        fn one(
            t: u64,
            value: f64,
            eps: f64,
            candidate: &mut Option<u64>,
            confirmed: &mut Option<u64>,
        ) {
            if confirmed.is_some() {
                return;
            }
            if value <= eps {
                let c = candidate.get_or_insert(t);
                if t >= *c + GUARD {
                    *confirmed = Some(*c);
                }
            } else {
                *candidate = None;
            }
        }
        one(t, values.tv, self.eps.tv, &mut self.candidate.tv, &mut self.confirmed.tv);
        one(t, values.l2, self.eps.l2, &mut self.candidate.l2, &mut self.confirmed.l2);
        one(t, values.sep, self.eps.sep, &mut self.candidate.sep, &mut self.confirmed.sep);
        one(
            t,
            values.entropy,
            self.eps.entropy,
            &mut self.candidate.entropy,
            &mut self.confirmed.entropy,
        );
    }

    pub fn done(&self) -> bool {
        self.confirmed.tv.is_some()
            && self.confirmed.l2.is_some()
            && self.confirmed.sep.is_some()
            && self.confirmed.entropy.is_some()
    }

    pub fn result(&self) -> Option<MixingTimes> {
        Some(MixingTimes {
            tau_tv: self.confirmed.tv?,
            tau_2: self.confirmed.l2?,
            tau_sep: self.confirmed.sep?,
            tau_ent: self.confirmed.entropy?,
            epsilons: self.eps,
        })
    }
}

pub const DEFAULT_HORIZON: u64 = 100_000;

/// Worst-case mixing times: the minimal n such that the worst-start distance
/// stays at or below ε from n on. Errors with the last profile if the horizon
/// is exhausted (periodic chains plateau and are caught early).
pub fn mixing_times(
    chain: &MarkovChain,
    epsilons: PerMetric<f64>,
    horizon: u64,
) -> Result<MixingTimes> {
    let mut curve = WorstCaseCurve::new(chain)?;
    let mut tracker = CrossingTracker::new(epsilons);
    let mut last;
    let mut plateau: u64 = 0;
    let mut prev_key = f64::NAN;
    loop {
        let p = curve.profile();
        tracker.observe(
            p.time,
            PerMetric { tv: p.tv, l2: p.l2, sep: p.sep, entropy: p.entropy },
        );
        if tracker.done() {
            return Ok(tracker.result().unwrap());
        }
        // Plateau detection: periodic chains repeat the same worst-case
        // distances forever; bail out once the signature freezes.
        let key = p.tv + 3.0 * p.sep + 7.0 * p.l2.min(1e6);
        if (key - prev_key).abs() <= f64::EPSILON * key.abs() {
            plateau += 1;
        } else {
            plateau = 0;
        }
        prev_key = key;
        last = p;
        if curve.t() >= horizon || plateau >= 512 {
            return Err(Error::HorizonExceeded {
                horizon,
                t: last.time,
                tv: last.tv,
                l2: last.l2,
                sep: last.sep,
                entropy: last.entropy,
            });
        }
        curve.step();
    }
}

pub fn mixing_times_default(chain: &MarkovChain) -> Result<MixingTimes> {
    mixing_times(chain, default_epsilons(), DEFAULT_HORIZON)
}

/// Covariance decay check: `Cov(f(X₁), f(X_{1+t})) ≤ σ₁ᵗ · Var_π(f)` with the
/// chain started from stationarity, computed exactly from the joint law.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub sigma1: f64,
    pub variance: f64,
    pub points: Vec<CovariancePoint>,
    pub max_violation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CovariancePoint {
    pub t: u64,
    pub covariance: f64,
    pub bound: f64,
}

pub fn check_covariance_lemma(
    chain: &MarkovChain,
    f: &[f64],
    t_max: u64,
) -> Result<CovarianceReport> {
    let n = chain.n_states();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    let pi = chain.stationary();
    let sigma1 = second_singular_value(chain)?;
    let mean: f64 = pi.iter().zip(f).map(|(p, v)| p * v).sum();
    let variance: f64 = pi
        .iter()
        .zip(f)
        .map(|(p, v)| p * (v - mean) * (v - mean))
        .sum();

    let mut g = f.to_vec();
    let mut points = Vec::with_capacity(t_max as usize + 1);
    let mut max_violation = f64::NEG_INFINITY;
    for t in 0..=t_max {
        let mut acc = Accumulator::new();
        for ((&p, &fv), &gv) in pi.iter().zip(f).zip(&g) {
            acc.add(p * fv * gv);
        }
        let covariance = acc.total() - mean * mean;
        let bound = sigma1.powi(t as i32) * variance;
        max_violation = max_violation.max(covariance - bound);
        points.push(CovariancePoint { t, covariance, bound });
        if t < t_max {
            g = chain.kernel().apply_right(&g);
        }
    }
    Ok(CovarianceReport {
        sigma1,
        variance,
        points,
        max_violation,
        pass: max_violation <= 1e-10,
    })
}

/// Separation / entropy bound suite: the pointwise bound
/// `D(Pⁿ(x,·)‖π) ≤ sep(x,n)·log(1/π_*)`, monotonicity and
/// submultiplicativity of worst-case separation, and the two mixing-time
/// consequences.
#[derive(Debug, Clone, Serialize)]
pub struct SepEntropyReport {
    pub t_max: u64,
    pub epsilon: f64,
    pub log_inv_pi_star: f64,
    /// max over x and n ≤ t_max of D − sep·log(1/π_*).
    pub proposition_max_violation: f64,
    pub proposition_pass: bool,
    pub sep_monotone_pass: bool,
    pub sep_submultiplicative_pass: bool,
    /// τ_ent(ε) ≤ ⌈log log(1/π_*) + log(1/ε)⌉ · τ_sep(1/e), the integer-block
    /// form implied by the pointwise bound plus submultiplicativity.
    pub entropy_from_sep: BoundCheck,
    /// τ_tv(√(ε/2)) ≤ τ_ent(ε): what Pinsker gives directly.
    pub tv_from_entropy: BoundCheck,
    /// The literal τ_tv(ε/2) ≤ τ_ent(ε) comparison, reported but not
    /// asserted: Pinsker only yields the square-root form, and flat two-state
    /// chains violate the literal one.
    pub tv_half_literal_holds: bool,
    /// τ_ent(ε) ≤ C · τ_tv(1/2e) · [log log(1/π_*) + log(1/ε)] with a
    /// configurable C (order-of-magnitude check; the sharp constant is not
    /// pinned down).
    pub entropy_from_tv: BoundCheck,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            ratio: if rhs != 0.0 { lhs / rhs } else { f64::INFINITY },
            pass: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SepEntropyConfig {
    pub epsilon: f64,
    /// Constant for the order-of-magnitude upper bound.
    pub c_upper: f64,
    pub horizon: u64,
}

impl Default for SepEntropyConfig {
    fn default() -> Self {
        Self { epsilon: (-1.0f64).exp(), c_upper: 16.0, horizon: DEFAULT_HORIZON }
    }
}

pub fn check_sep_entropy_bounds(
    chain: &MarkovChain,
    t_max: u64,
    cfg: SepEntropyConfig,
) -> Result<SepEntropyReport> {
    check_positive_stationary(chain)?;
    let log_inv_pi_star = (1.0 / chain.min_stationary()).ln();
    let pi = chain.stationary();

    let mut curve = WorstCaseCurve::new(chain)?;
    let mut worst_sep = Vec::with_capacity(t_max as usize + 1);
    let mut prop_violation = f64::NEG_INFINITY;
    for _ in 0..=t_max {
        let mut sep_t = f64::NEG_INFINITY;
        for row in &curve.rows {
            let v = metrics_against(pi, row);
            prop_violation = prop_violation.max(v.entropy - v.sep * log_inv_pi_star);
            sep_t = sep_t.max(v.sep);
        }
        worst_sep.push(sep_t);
        curve.step();
    }

    let mut sep_monotone = true;
    for w in worst_sep.windows(2) {
        if w[1] > w[0] + 1e-12 {
            sep_monotone = false;
        }
    }
    let mut sep_submult = true;
    for m in 1..worst_sep.len() {
        for nn in m..worst_sep.len() {
            if m + nn >= worst_sep.len() {
                break;
            }
            if worst_sep[m + nn] > worst_sep[m] * worst_sep[nn] + 1e-12 {
                sep_submult = false;
            }
        }
    }

    let eps = cfg.epsilon;
    let tau_ent = mixing_one(chain, MetricKind::Entropy, eps, cfg.horizon)?;
    let tau_sep_e = mixing_one(chain, MetricKind::Sep, (-1.0f64).exp(), cfg.horizon)?;
    let tau_tv_sqrt = mixing_one(chain, MetricKind::Tv, (eps / 2.0).sqrt(), cfg.horizon)?;
    let tau_tv_half = mixing_one(chain, MetricKind::Tv, eps / 2.0, cfg.horizon)?;
    let tau_tv_2e = mixing_one(chain, MetricKind::Tv, 0.5 * (-1.0f64).exp(), cfg.horizon)?;

    let blocks = (log_inv_pi_star.ln() + (1.0 / eps).ln()).ceil().max(0.0);
    let entropy_from_sep = BoundCheck::new(tau_ent as f64, blocks * tau_sep_e as f64);
    let tv_from_entropy = BoundCheck::new(tau_tv_sqrt as f64, tau_ent as f64);
    let tv_half_literal_holds = tau_tv_half <= tau_ent;
    let factor = log_inv_pi_star.ln() + (1.0 / eps).ln();
    let entropy_from_tv =
        BoundCheck::new(tau_ent as f64, cfg.c_upper * tau_tv_2e as f64 * factor.max(0.1));

    let proposition_pass = prop_violation <= 1e-12;
    let pass = proposition_pass
        && sep_monotone
        && sep_submult
        && entropy_from_sep.pass
        && tv_from_entropy.pass
        && entropy_from_tv.pass;
    Ok(SepEntropyReport {
        t_max,
        epsilon: eps,
        log_inv_pi_star,
        proposition_max_violation: prop_violation,
        proposition_pass,
        sep_monotone_pass: sep_monotone,
        sep_submultiplicative_pass: sep_submult,
        entropy_from_sep,
        tv_from_entropy,
        tv_half_literal_holds,
        entropy_from_tv,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Tv,
    L2,
    Sep,
    Entropy,
}

/// Mixing time for a single metric at a single threshold.
pub fn mixing_one(
    chain: &MarkovChain,
    metric: MetricKind,
    epsilon: f64,
    horizon: u64,
) -> Result<u64> {
    let wide = 1e18;
    let eps = match metric {
        MetricKind::Tv => PerMetric { tv: epsilon, l2: wide, sep: wide, entropy: wide },
        MetricKind::L2 => PerMetric { tv: wide, l2: epsilon, sep: wide, entropy: wide },
        MetricKind::Sep => PerMetric { tv: wide, l2: wide, sep: epsilon, entropy: wide },
        MetricKind::Entropy => PerMetric { tv: wide, l2: wide, sep: wide, entropy: epsilon },
    };
    let times = mixing_times(chain, eps, horizon)?;
    Ok(match metric {
        MetricKind::Tv => times.tau_tv,
        MetricKind::L2 => times.tau_2,
        MetricKind::Sep => times.tau_sep,
        MetricKind::Entropy => times.tau_ent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{build_complete, build_cycle, build_hypercube, chain};

    #[test]
    fn time_zero_closed_forms() {
        let n = 6;
        let chain = build_cycle(n, 0.5).unwrap();
        let p = distances_at(&chain, 2, 0).unwrap();
        let nf = n as f64;
        assert!((p.tv - (1.0 - 1.0 / nf)).abs() < 1e-14);
        assert!((p.sep - 1.0).abs() < 1e-14);
        assert!((p.entropy - nf.ln()).abs() < 1e-14);
        assert!((p.l2 - (nf - 1.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stationary_start_is_already_mixed() {
        let chain = build_cycle(5, 0.25).unwrap();
        let pi = DistributionVector::from_probs(chain.stationary().to_vec(), 0).unwrap();
        for t in [0u64, 3, 11] {
            let p = distances_at_dist(&chain, &pi, t).unwrap();
            assert!(p.tv < 1e-12 && p.sep < 1e-10 && p.entropy < 1e-12 && p.l2 < 1e-10);
        }
    }

    #[test]
    fn complete_graph_mixes_in_one_step() {
        let chain = build_complete(7, true).unwrap();
        let p = distances_at(&chain, 0, 1).unwrap();
        assert!(p.tv < 1e-14 && p.sep < 1e-12 && p.entropy < 1e-14 && p.l2 < 1e-12);
        let times = mixing_times_default(&chain).unwrap();
        assert_eq!(
            (times.tau_tv, times.tau_2, times.tau_sep, times.tau_ent),
            (1, 1, 1, 1)
        );
    }

    #[test]
    fn two_state_tv_mixing_time() {
        // Worst-start one-sided tv is (2/3)·0.7^t; brute-force iteration puts
        // the 1/4 crossing at t = 3.
        let chain = chain::from_dense_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let mut curve = WorstCaseCurve::new(&chain).unwrap();
        let mut expect = None;
        for t in 0..=20u64 {
            let p = curve.profile();
            assert!((p.tv - (2.0 / 3.0) * 0.7f64.powi(t as i32)).abs() < 1e-12);
            if expect.is_none() && p.tv <= 0.25 {
                expect = Some(t);
            }
            curve.step();
        }
        assert_eq!(expect, Some(3));
        let tau = mixing_one(&chain, MetricKind::Tv, 0.25, 1000).unwrap();
        assert_eq!(tau, 3);
        // Minimality: the distance one step earlier exceeds the threshold.
        let before = worst_case_profile(&chain, tau - 1).unwrap();
        assert!(before.tv > 0.25);
    }

    #[test]
    fn periodic_cycle_never_mixes() {
        let chain = build_cycle(4, 0.0).unwrap();
        match mixing_times_default(&chain) {
            Err(Error::HorizonExceeded { tv, .. }) => assert!(tv >= 0.25),
            other => panic!("expected horizon error, got {other:?}"),
        }
    }

    #[test]
    fn inequality_chain_holds_pointwise() {
        for chain in [
            build_cycle(8, 0.5).unwrap(),
            build_hypercube(3, 0.5).unwrap(),
            build_complete(5, false).unwrap(),
        ] {
            let log_inv = (1.0 / chain.min_stationary()).ln();
            let mut curve = WorstCaseCurve::new(&chain).unwrap();
            for _ in 0..=60 {
                for p in curve.per_start() {
                    assert!(p.tv <= p.sep + 1e-12);
                    assert!(2.0 * p.tv * p.tv <= p.entropy + 1e-12);
                    assert!(p.entropy <= p.sep * log_inv + 1e-12);
                    assert!(p.tv <= p.l2 / 2.0 + 1e-12);
                }
                curve.step();
            }
        }
    }

    #[test]
    fn covariance_lemma_examples() {
        // Constant f: covariance identically 0.
        let chain = build_cycle(6, 0.5).unwrap();
        let report = check_covariance_lemma(&chain, &[3.0; 6], 10).unwrap();
        assert!(report.variance.abs() < 1e-12);
        assert!(report.pass);

        // One-step mixing: σ₁ = 0 and covariances vanish for t ≥ 1.
        let k = build_complete(4, true).unwrap();
        let f = [1.0, -2.0, 0.5, 4.0];
        let report = check_covariance_lemma(&k, &f, 5).unwrap();
        assert!(report.sigma1 < 1e-9);
        for p in &report.points[1..] {
            assert!(p.covariance.abs() < 1e-12);
        }
        assert!(report.pass);

        // Indicator on the lazy cycle: strict slack at positive times.
        let f = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let report = check_covariance_lemma(&chain, &f, 20).unwrap();
        assert!(report.pass, "violation {}", report.max_violation);
        for p in &report.points[1..] {
            assert!(p.covariance <= p.bound + 1e-12);
        }
    }

    #[test]
    fn sep_entropy_suite_on_lazy_cycle() {
        let chain = build_cycle(8, 0.5).unwrap();
        let report = check_sep_entropy_bounds(&chain, 200, SepEntropyConfig::default()).unwrap();
        assert!(report.proposition_pass, "violation {}", report.proposition_max_violation);
        assert!(report.sep_monotone_pass);
        assert!(report.sep_submultiplicative_pass);
        assert!(report.entropy_from_sep.pass, "{:?}", report.entropy_from_sep);
        assert!(report.tv_from_entropy.pass, "{:?}", report.tv_from_entropy);
        assert!(report.entropy_from_tv.pass, "{:?}", report.entropy_from_tv);
        assert!(report.pass);
    }

    #[test]
    fn literal_tv_half_fails_on_flat_two_state_chain() {
        // D ≈ 2.25·e² while tv = e here, so the entropy threshold is hit well
        // before tv reaches ε/2: the literal lower corollary fails while the
        // Pinsker-derived square-root form holds.
        let chain = chain::from_dense_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let report = check_sep_entropy_bounds(&chain, 60, SepEntropyConfig::default()).unwrap();
        assert!(report.tv_from_entropy.pass);
        assert!(!report.tv_half_literal_holds);
        assert!(report.pass);
    }
}
