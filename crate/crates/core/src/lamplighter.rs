//! Wreath-product (lamplighter) chains: a walker moves on a base chain and
//! fully randomizes the m-state lamp at every vertex it touches.
//!
//! Two computation paths are provided and cross-checked against each other:
//!
//! - an explicit chain over the full `mⁿ·n` state space, for tiny bases;
//! - the covered-set reduction: conditioned on `(visited set V_t, position)`,
//!   the lamp configuration is uniform on visited coordinates and pinned to
//!   zero elsewhere, so every distance to stationarity is a closed-form
//!   functional of the coverage law — no lamp enumeration needed. Under the
//!   default randomize-both-endpoints convention the randomized set at t ≥ 1
//!   is exactly the visited set (the start lamp is randomized on departure).
//!
//! Lamp configurations are mixed-radix numbers: `config = Σ lamp_i·mⁱ`, and
//! an explicit state is `config·n + position`.

use serde::{Deserialize, Serialize};

use crate::chain::{assemble_validated, detailed_balance_holds, Kernel};
use crate::coverage::{ExactCoverage, StartDist};
use crate::linalg::Accumulator;
use crate::metrics::{
    metrics_against, CrossingTracker, DistanceProfile, MixingTimes, PerMetric,
};
use crate::{DistributionVector, Error, MarkovChain, Result};

/// Cap on explicit wreath state counts (mⁿ·n).
pub const EXPLICIT_WREATH_CAP: usize = 1 << 20;

/// Cap on the lamp alphabet.
pub const LAMP_M_CAP: u64 = 1 << 16;

/// When the lamp at a vertex gets rerandomized relative to the move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomizeConvention {
    /// Randomize the lamp at the current vertex, move, then randomize the
    /// lamp at the new vertex. Keeps the wreath chain reversible when the
    /// base is; the default everywhere.
    BothEndpoints,
    RandomizeThenMove,
    MoveThenRandomize,
}

/// Lamp alphabet and randomization convention. The initial configuration is
/// fixed to all-lamps-zero: under full randomization a lamp relabeling maps
/// the chain to itself, so any fixed configuration is exactly as far from
/// stationarity as any other, and enumerating worst starts over
/// configurations would buy nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LampSpec {
    pub m: u64,
    pub convention: RandomizeConvention,
}

impl LampSpec {
    /// `m = 1` is accepted as the degenerate single-letter alphabet (the
    /// wreath chain collapses onto its base), used by cross-checks.
    pub fn new(m: u64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidSize { what: "lamp alphabet", min: 1, got: 0 });
        }
        if m > LAMP_M_CAP {
            return Err(Error::Capacity {
                what: "lamp alphabet",
                requested: m as usize,
                cap: LAMP_M_CAP as usize,
                hint: "larger alphabets are handled by the reduction in log-space",
            });
        }
        Ok(Self { m, convention: RandomizeConvention::BothEndpoints })
    }

    pub fn with_convention(mut self, convention: RandomizeConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// A wreath chain: the base, the lamp spec, and the explicitly built chain
/// over `mⁿ·n` states.
#[derive(Debug, Clone)]
pub struct WreathChain {
    base: MarkovChain,
    spec: LampSpec,
    explicit: MarkovChain,
}

impl WreathChain {
    pub fn base(&self) -> &MarkovChain {
        &self.base
    }

    pub fn spec(&self) -> &LampSpec {
        &self.spec
    }

    pub fn explicit(&self) -> &MarkovChain {
        &self.explicit
    }

    pub fn n_states(&self) -> usize {
        self.explicit.n_states()
    }

    /// Explicit index of `(lamps, position)`.
    pub fn encode(&self, lamps: &[u64], position: usize) -> usize {
        let n = self.base.n_states();
        let mut config = 0u64;
        for (i, &l) in lamps.iter().enumerate() {
            config += l * self.spec.m.pow(i as u32);
        }
        config as usize * n + position
    }
}

fn wreath_size(base_n: usize, m: u64) -> Option<usize> {
    m.checked_pow(base_n as u32)
        .and_then(|c| c.checked_mul(base_n as u64))
        .and_then(|s| usize::try_from(s).ok())
}

/// Build the explicit wreath chain. Requires a uniform-stationary base and
/// `mⁿ·n` within [`EXPLICIT_WREATH_CAP`]; beyond the cap use
/// [`reduced_distances`], which never materializes the lamp space.
pub fn build_wreath(base: &MarkovChain, spec: &LampSpec) -> Result<WreathChain> {
    let n = base.n_states();
    if spec.m > LAMP_M_CAP {
        return Err(Error::Capacity {
            what: "lamp alphabet",
            requested: spec.m as usize,
            cap: LAMP_M_CAP as usize,
            hint: "use reduced_distances",
        });
    }
    if !base.is_uniform_stationary() {
        return Err(Error::Precondition(
            "wreath construction requires a uniform-stationary base".into(),
        ));
    }
    let total = match wreath_size(n, spec.m) {
        Some(t) if t <= EXPLICIT_WREATH_CAP => t,
        _ => {
            return Err(Error::Capacity {
                what: "explicit wreath states",
                requested: usize::MAX,
                cap: EXPLICIT_WREATH_CAP,
                hint: "use reduced_distances",
            })
        }
    };

    let m = spec.m;
    let mu = m as usize;
    let pows: Vec<u64> = (0..n).map(|i| m.pow(i as u32)).collect();
    let set_lamp = |config: u64, i: usize, v: u64| -> u64 {
        let digit = (config / pows[i]) % m;
        config - digit * pows[i] + v * pows[i]
    };

    let base_rows: Vec<Vec<(usize, f64)>> =
        (0..n).map(|x| base.kernel().sparse_row(x)).collect();

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(total);
    for state in 0..total {
        let pos = state % n;
        let config = (state / n) as u64;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &(y, p) in &base_rows[pos] {
            match spec.convention {
                RandomizeConvention::BothEndpoints => {
                    if y == pos {
                        for r in 0..m {
                            let g = set_lamp(config, pos, r);
                            row.push((g as usize * n + y, p / mu as f64));
                        }
                    } else {
                        for rx in 0..m {
                            let g1 = set_lamp(config, pos, rx);
                            for ry in 0..m {
                                let g = set_lamp(g1, y, ry);
                                row.push((g as usize * n + y, p / (mu * mu) as f64));
                            }
                        }
                    }
                }
                RandomizeConvention::RandomizeThenMove => {
                    for r in 0..m {
                        let g = set_lamp(config, pos, r);
                        row.push((g as usize * n + y, p / mu as f64));
                    }
                }
                RandomizeConvention::MoveThenRandomize => {
                    for r in 0..m {
                        let g = set_lamp(config, y, r);
                        row.push((g as usize * n + y, p / mu as f64));
                    }
                }
            }
        }
        row.sort_unstable_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (c, p) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += p,
                _ => merged.push((c, p)),
            }
        }
        rows.push(merged);
    }

    let kernel = Kernel::from_rows(total, rows);
    let stationary = vec![1.0 / total as f64; total];
    let reversible = detailed_balance_holds(&kernel, &stationary);
    let explicit = assemble_validated(kernel, stationary, None, reversible, base.laziness())?;
    Ok(WreathChain { base: base.clone(), spec: *spec, explicit })
}

/// Exact wreath-chain distance profiles computed from the coverage law,
/// without building the `mⁿ·n` space. Stepping advances the underlying
/// subset DP; profiles can be read for any alphabet size m at each step.
pub struct ReducedWreath {
    dp: ExactCoverage,
    start: usize,
}

impl ReducedWreath {
    /// Requires the default randomize-both-endpoints convention, a
    /// uniform-stationary base within the subset-DP cap, and all-zero initial
    /// lamps (the fixed convention).
    pub fn new(base: &MarkovChain, spec: &LampSpec, start: usize) -> Result<Self> {
        if spec.convention != RandomizeConvention::BothEndpoints {
            return Err(Error::UnsupportedMode(
                "the covered-set reduction requires the randomize-both-endpoints convention"
                    .into(),
            ));
        }
        if !base.is_uniform_stationary() {
            return Err(Error::Precondition(
                "the covered-set reduction requires a uniform-stationary base".into(),
            ));
        }
        let dp = ExactCoverage::new(base, &StartDist::Point(start))?;
        Ok(Self { dp, start })
    }

    pub fn t(&self) -> u64 {
        self.dp.t()
    }

    pub fn step(&mut self) {
        self.dp.step();
    }

    pub fn coverage(&self) -> &ExactCoverage {
        &self.dp
    }

    /// Distance profile of the m-lamp wreath chain at the current time.
    pub fn profile(&self, m: u64) -> DistanceProfile {
        wreath_profile_from_coverage(&self.dp, m, self.start)
    }
}

/// Evaluate all four wreath-chain metrics from the coverage law at its
/// current time. `m ≥ 2`; at t = 0 the distribution is a point mass and the
/// closed forms are used directly.
pub(crate) fn wreath_profile_from_coverage(
    dp: &ExactCoverage,
    m: u64,
    start: usize,
) -> DistanceProfile {
    let n = dp.n();
    let nf = n as f64;
    let mf = m as f64;
    debug_assert!(m >= 2);
    let n_state = nf * mf.powi(n as i32);
    let ws = PerMetric { tv: start, l2: start, sep: start, entropy: start };
    if dp.t() == 0 {
        // Point mass: no lamp has been randomized yet.
        return DistanceProfile {
            time: 0,
            tv: 1.0 - 1.0 / n_state,
            l2: (n_state - 1.0).sqrt(),
            sep: 1.0,
            entropy: n_state.ln(),
            worst_start: ws,
        };
    }

    let masks = 1usize << n;
    let inv_n_state = 1.0 / n_state;
    let ln_n_state = nf.ln() + nf * mf.ln();
    let pow_mneg: Vec<f64> = (0..=n).map(|k| mf.powi(-(k as i32))).collect();
    let count_supp: Vec<f64> = (0..=n).map(|k| (mf - 1.0).powi(k as i32)).collect();
    let full = masks - 1;

    let mut tv = Accumulator::new();
    let mut l2sum = Accumulator::new();
    let mut ent = Accumulator::new();
    let mut min_q_full = f64::INFINITY;
    let mut w = vec![0.0f64; masks];
    for x in 0..n {
        // w[S] = Σ_{M ⊇ S} Pr[V_t = M, X_t = x] · m^{−|M|}: the density of any
        // lamp state with support S at position x.
        for (mask, wm) in w.iter_mut().enumerate() {
            *wm = dp.mass(mask, x) * pow_mneg[mask.count_ones() as usize];
        }
        for bit in 0..n {
            let b = 1usize << bit;
            for mask in 0..masks {
                if mask & b == 0 {
                    w[mask] += w[mask | b];
                }
            }
        }
        for (mask, &wsx) in w.iter().enumerate() {
            let c = count_supp[mask.count_ones() as usize];
            if wsx < inv_n_state {
                tv.add(c * (inv_n_state - wsx));
            }
            // Deviation form keeps l2² a sum of squares; the algebraically
            // equal N·Σw² − 1 cancels catastrophically once μ is close to π.
            let dev = wsx - inv_n_state;
            l2sum.add(c * dev * dev);
            if wsx > 0.0 {
                ent.add(c * wsx * (wsx.ln() + ln_n_state));
            }
        }
        min_q_full = min_q_full.min(dp.mass(full, x));
    }

    DistanceProfile {
        time: dp.t(),
        tv: tv.total(),
        l2: (n_state * l2sum.total()).max(0.0).sqrt(),
        sep: 1.0 - nf * min_q_full,
        entropy: ent.total(),
        worst_start: ws,
    }
}

/// Pair-of-trajectories collision form of the L² identity:
/// `1 + ‖μ_t/π − 1‖² = n · Σ_x Σ_{M,M'} q(M,x) q(M',x) m^{n−|M∪M'|}`.
/// Quadratic in the mask space; kept as an independent cross-check of the
/// transform route.
pub fn l2_sq_collision(dp: &ExactCoverage, m: u64) -> f64 {
    let n = dp.n();
    let masks = 1usize << n;
    let mf = m as f64;
    let mut acc = Accumulator::new();
    for x in 0..n {
        for m1 in 0..masks {
            let q1 = dp.mass(m1, x);
            if q1 == 0.0 {
                continue;
            }
            for m2 in 0..masks {
                let q2 = dp.mass(m2, x);
                if q2 == 0.0 {
                    continue;
                }
                let union = (m1 | m2).count_ones() as i32;
                acc.add(q1 * q2 * mf.powi(n as i32 - union));
            }
        }
    }
    (n as f64 * acc.total() - 1.0).max(0.0)
}

/// Exact distance profile of the wreath chain at time `t` via the reduction.
pub fn reduced_distances(
    base: &MarkovChain,
    spec: &LampSpec,
    start: usize,
    t: u64,
) -> Result<DistanceProfile> {
    if spec.m == 1 {
        // Degenerate lamps: the wreath chain is the base chain.
        return crate::metrics::distances_at(base, start, t);
    }
    let mut reduced = ReducedWreath::new(base, spec, start)?;
    for _ in 0..t {
        reduced.step();
    }
    Ok(reduced.profile(spec.m))
}

pub const WREATH_HORIZON: u64 = 1 << 20;

/// Mixing times of the wreath chain from `(all lamps zero, start)` via the
/// reduction.
pub fn wreath_mixing_times(
    base: &MarkovChain,
    spec: &LampSpec,
    start: usize,
    epsilons: PerMetric<f64>,
    horizon: u64,
) -> Result<MixingTimes> {
    if spec.m == 1 {
        return fixed_start_mixing_times(base, start, epsilons, horizon);
    }
    let mut reduced = ReducedWreath::new(base, spec, start)?;
    let mut tracker = CrossingTracker::new(epsilons);
    loop {
        let p = reduced.profile(spec.m);
        tracker.observe(p.time, PerMetric { tv: p.tv, l2: p.l2, sep: p.sep, entropy: p.entropy });
        if tracker.done() {
            return Ok(tracker.result().unwrap());
        }
        if reduced.t() >= horizon {
            return Err(Error::HorizonExceeded {
                horizon,
                t: p.time,
                tv: p.tv,
                l2: p.l2,
                sep: p.sep,
                entropy: p.entropy,
            });
        }
        reduced.step();
    }
}

/// Mixing times of an ordinary chain from a fixed point start (used for the
/// m = 1 degenerate case and for explicit-chain cross-checks).
pub fn fixed_start_mixing_times(
    chain: &MarkovChain,
    start: usize,
    epsilons: PerMetric<f64>,
    horizon: u64,
) -> Result<MixingTimes> {
    let mut dist = DistributionVector::point(chain.n_states(), start)?;
    let mut tracker = CrossingTracker::new(epsilons);
    let pi = chain.stationary();
    loop {
        let v = metrics_against(pi, dist.probs());
        tracker.observe(
            dist.time(),
            PerMetric { tv: v.tv, l2: v.l2, sep: v.sep, entropy: v.entropy },
        );
        if tracker.done() {
            return Ok(tracker.result().unwrap());
        }
        if dist.time() >= horizon {
            return Err(Error::HorizonExceeded {
                horizon,
                t: dist.time(),
                tv: v.tv,
                l2: v.l2,
                sep: v.sep,
                entropy: v.entropy,
            });
        }
        dist = crate::chain::evolve(chain, &dist, 1)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{default_epsilons, distances_at};
    use crate::{build_complete, build_cycle, chain};

    #[test]
    fn single_state_base_mixes_in_one_step() {
        let base = chain::from_dense_rows(vec![vec![1.0]]).unwrap();
        let wreath = build_wreath(&base, &LampSpec::new(2).unwrap()).unwrap();
        assert_eq!(wreath.n_states(), 2);
        let p = distances_at(wreath.explicit(), 0, 1).unwrap();
        assert!(p.tv < 1e-14 && p.l2 < 1e-12);
    }

    #[test]
    fn two_vertex_base_gives_uniform_eight_state_chain() {
        let base = build_complete(2, false).unwrap();
        let wreath = build_wreath(&base, &LampSpec::new(2).unwrap()).unwrap();
        assert_eq!(wreath.n_states(), 8);
        for &p in wreath.explicit().stationary() {
            assert!((p - 0.125).abs() < 1e-15);
        }
        assert!(wreath.explicit().reversible());
    }

    #[test]
    fn explicit_build_validates_on_cycle() {
        // Row sums, uniform stationarity and detailed balance are all checked
        // by the chain validator during assembly.
        let base = build_cycle(4, 0.0).unwrap();
        let wreath = build_wreath(&base, &LampSpec::new(2).unwrap()).unwrap();
        assert_eq!(wreath.n_states(), 64);
        assert!(wreath.explicit().reversible());
        assert!(wreath.explicit().is_uniform_stationary());
    }

    #[test]
    fn other_conventions_build_but_are_not_reversible() {
        let base = build_cycle(4, 0.5).unwrap();
        for convention in [
            RandomizeConvention::RandomizeThenMove,
            RandomizeConvention::MoveThenRandomize,
        ] {
            let spec = LampSpec::new(2).unwrap().with_convention(convention);
            let wreath = build_wreath(&base, &spec).unwrap();
            assert!(wreath.explicit().is_uniform_stationary());
            assert!(
                ReducedWreath::new(&base, &spec, 0).is_err(),
                "reduction must refuse {convention:?}"
            );
        }
    }

    #[test]
    fn reduction_matches_explicit_on_c3_m2() {
        let base = build_cycle(3, 0.0).unwrap();
        let spec = LampSpec::new(2).unwrap();
        let wreath = build_wreath(&base, &spec).unwrap();
        let mut reduced = ReducedWreath::new(&base, &spec, 0).unwrap();
        for t in 0..=40u64 {
            let exact = distances_at(wreath.explicit(), 0, t).unwrap();
            let red = reduced.profile(2);
            assert!((exact.tv - red.tv).abs() < 1e-10, "tv at t={t}");
            assert!((exact.l2 - red.l2).abs() < 1e-10, "l2 at t={t}");
            assert!((exact.sep - red.sep).abs() < 1e-10, "sep at t={t}");
            assert!((exact.entropy - red.entropy).abs() < 1e-10, "entropy at t={t}");
            reduced.step();
        }
    }

    #[test]
    fn l2_collision_identity_matches_both_routes() {
        let base = build_cycle(3, 0.0).unwrap();
        let spec = LampSpec::new(2).unwrap();
        let wreath = build_wreath(&base, &spec).unwrap();
        let mut reduced = ReducedWreath::new(&base, &spec, 0).unwrap();
        for t in 1..=20u64 {
            reduced.step();
            let collision = l2_sq_collision(reduced.coverage(), 2);
            let transform = reduced.profile(2).l2.powi(2);
            let explicit = distances_at(wreath.explicit(), 0, t).unwrap().l2.powi(2);
            assert!((collision - transform).abs() < 1e-10, "t={t}");
            assert!((collision - explicit).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn degenerate_lamps_reduce_to_base() {
        let base = build_cycle(5, 0.5).unwrap();
        let spec = LampSpec::new(1).unwrap();
        for t in [0u64, 3, 10] {
            let red = reduced_distances(&base, &spec, 0, t).unwrap();
            let direct = distances_at(&base, 0, t).unwrap();
            assert_eq!(red.tv.to_bits(), direct.tv.to_bits());
        }
        let wt = wreath_mixing_times(&base, &spec, 0, default_epsilons(), 1 << 16).unwrap();
        let bt = fixed_start_mixing_times(&base, 0, default_epsilons(), 1 << 16).unwrap();
        assert_eq!(wt.tau_tv, bt.tau_tv);
        assert_eq!(wt.tau_ent, bt.tau_ent);
    }

    #[test]
    fn mixing_times_across_alphabets() {
        // Frozen goldens from the reduction on the lazy 5-cycle. L² mixing
        // grows strictly with the alphabet; separation is exactly m-free
        // (sep = 1 − n·min_x q(full, x) never sees m); variation mixing
        // drifts upward by several steps at this scale — the m-independence
        // of τ_tv is an asymptotic statement, not a small-n identity.
        let base = build_cycle(5, 0.5).unwrap();
        let eps = default_epsilons();
        let m2 = wreath_mixing_times(&base, &LampSpec::new(2).unwrap(), 0, eps, 1 << 16).unwrap();
        let m4 = wreath_mixing_times(&base, &LampSpec::new(4).unwrap(), 0, eps, 1 << 16).unwrap();
        let m16 =
            wreath_mixing_times(&base, &LampSpec::new(16).unwrap(), 0, eps, 1 << 16).unwrap();
        assert_eq!((m2.tau_tv, m2.tau_2), (14, 23));
        assert_eq!((m16.tau_tv, m16.tau_2), (23, 37));
        assert!(m2.tau_2 < m4.tau_2 && m4.tau_2 < m16.tau_2);
        assert_eq!(m2.tau_sep, m16.tau_sep);
        assert!(m2.tau_tv <= m4.tau_tv && m4.tau_tv <= m16.tau_tv);
    }

    #[test]
    fn explicit_cap_is_enforced() {
        let base = build_cycle(8, 0.0).unwrap();
        let err = build_wreath(&base, &LampSpec::new(1 << 10).unwrap());
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }

    #[test]
    fn encode_places_zero_config_at_position() {
        let base = build_cycle(4, 0.0).unwrap();
        let wreath = build_wreath(&base, &LampSpec::new(3).unwrap()).unwrap();
        assert_eq!(wreath.encode(&[0, 0, 0, 0], 2), 2);
        assert_eq!(wreath.encode(&[1, 0, 0, 0], 0), 4);
        assert_eq!(wreath.encode(&[0, 2, 0, 0], 1), 6 * 4 + 1);
    }
}
