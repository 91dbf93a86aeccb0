//! First-passage analysis: expected hitting times, the maximal hitting time
//! H, return-time tails, and coverage-by-excursion checks.
//!
//! Hitting times come from the fundamental matrix `Z = (I − P + 1πᵀ)^{-1}`
//! (one dense LU with partial pivoting, valid for any irreducible chain,
//! periodic or not): `E_x T_y = (Z(y,y) − Z(x,y)) / π(y)`. The identity
//! `h(x) = 1 + Σ_z P(x,z) h(z)` for x ≠ y is what the tests check it against.

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{invert, neumaier_sum, DenseMatrix};
use crate::rng::{replicate_rng, TrajectoryEngine};
use crate::{Error, MarkovChain, Result};

/// Dense hitting-time solve cap; beyond it use [`mc_hitting_estimate`].
pub const DENSE_HITTING_CAP: usize = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct HittingSummary {
    /// `expected_hitting[x][y] = E_x T_y` in steps; zero diagonal.
    pub expected_hitting: Vec<Vec<f64>>,
    /// `H = max_{x,y} E_x T_y`.
    pub max_hitting: f64,
    /// Per-state `Pr_x(T_x⁺ ≥ ⌈n/2⌉)`.
    pub return_tail: Vec<f64>,
    /// The threshold ⌈n/2⌉ used for the tail.
    pub return_threshold: u64,
}

pub fn hitting_times(chain: &MarkovChain) -> Result<HittingSummary> {
    let n = chain.n_states();
    if n > DENSE_HITTING_CAP {
        return Err(Error::Capacity {
            what: "dense hitting-time solve",
            requested: n,
            cap: DENSE_HITTING_CAP,
            hint: "use mc_hitting_estimate for chains this large",
        });
    }
    let pi = chain.stationary();
    let mut a = DenseMatrix::zeros(n);
    for x in 0..n {
        for y in 0..n {
            *a.at_mut(x, y) = pi[y];
        }
        *a.at_mut(x, x) += 1.0;
    }
    for x in 0..n {
        chain.kernel().for_each_in_row(x, |y, p| {
            *a.at_mut(x, y) -= p;
        });
    }
    let z = invert(&a)?;

    let mut expected = vec![vec![0.0; n]; n];
    let mut max_hitting = 0.0f64;
    for y in 0..n {
        let zyy = z.at(y, y);
        for x in 0..n {
            if x == y {
                continue;
            }
            let h = (zyy - z.at(x, y)) / pi[y];
            expected[x][y] = h;
            max_hitting = max_hitting.max(h);
        }
    }

    let threshold = (n as u64).div_ceil(2);
    let return_tail = (0..n)
        .into_par_iter()
        .map(|x| return_tail_from(chain, x, threshold))
        .collect();

    Ok(HittingSummary {
        expected_hitting: expected,
        max_hitting,
        return_tail,
        return_threshold: threshold,
    })
}

/// `Pr_x(T_x⁺ ≥ m)` by powering the x-absorbed kernel: survive = avoid x at
/// steps 1..m−1.
fn return_tail_from(chain: &MarkovChain, x: usize, m: u64) -> f64 {
    if m <= 1 {
        return 1.0;
    }
    let n = chain.n_states();
    let mut v = vec![0.0; n];
    chain.kernel().for_each_in_row(x, |y, p| {
        if y != x {
            v[y] += p;
        }
    });
    for _ in 0..m.saturating_sub(2) {
        let mut next = chain.kernel().apply_left(&v);
        next[x] = 0.0;
        v = next;
    }
    neumaier_sum(v.iter().copied())
}

/// Monte Carlo first-passage estimate with standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: u64,
}

pub fn mc_hitting_estimate(
    chain: &MarkovChain,
    from: usize,
    to: usize,
    replicates: u64,
    seed: u64,
) -> Result<McEstimate> {
    let n = chain.n_states();
    if from >= n {
        return Err(Error::InvalidState { state: from, n });
    }
    if to >= n {
        return Err(Error::InvalidState { state: to, n });
    }
    if replicates < 1 {
        return Err(Error::InvalidSize { what: "replicates", min: 1, got: 0 });
    }
    // Convention: the passage time from y to itself is 0.
    if from == to {
        return Ok(McEstimate { mean: 0.0, std_error: 0.0, replicates });
    }
    let engine = TrajectoryEngine::new(chain);
    let samples: Vec<u64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut state = from;
            let mut steps = 0u64;
            while state != to {
                state = engine.step(state, &mut rng);
                steps += 1;
            }
            steps
        })
        .collect();
    let mean = neumaier_sum(samples.iter().map(|&s| s as f64)) / replicates as f64;
    let var = if replicates > 1 {
        neumaier_sum(samples.iter().map(|&s| {
            let d = s as f64 - mean;
            d * d
        })) / (replicates - 1) as f64
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / replicates as f64).sqrt(),
        replicates,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetCoverageCheck {
    pub subset_size: usize,
    pub start: usize,
    /// Monte Carlo probability of visiting at least half of the subset
    /// within ⌈4H⌉ steps.
    pub estimate: f64,
    pub std_error: f64,
    /// The claimed floor (1/2).
    pub required: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcursionReport {
    pub n_states: usize,
    pub uniform_stationary: bool,
    pub return_threshold: u64,
    pub return_tail: Vec<f64>,
    pub min_tail: f64,
    /// `|X| / (2H)`.
    pub tail_bound: f64,
    /// Exact inequality `min_x Pr_x(T_x⁺ ≥ ⌈|X|/2⌉) ≥ |X|/(2H)`; only
    /// asserted for uniform-stationary chains.
    pub tail_pass: bool,
    pub max_hitting: f64,
    /// ⌈4H⌉, the step budget of the coverage checks.
    pub coverage_horizon: u64,
    pub subset_checks: Vec<SubsetCoverageCheck>,
    pub coverage_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ExcursionConfig {
    pub replicates: u64,
    pub seed: u64,
}

impl Default for ExcursionConfig {
    fn default() -> Self {
        Self { replicates: 100_000, seed: 0x0b5e55ed }
    }
}

/// Exact return-tail floor plus Monte Carlo half-coverage-by-4H checks over a
/// small family of subsets (full set, half, quarter, worst singleton).
pub fn check_excursion_lemma(chain: &MarkovChain, cfg: ExcursionConfig) -> Result<ExcursionReport> {
    let n = chain.n_states();
    let hitting = hitting_times(chain)?;
    let uniform = chain.is_uniform_stationary();
    let h = hitting.max_hitting;
    let tail_bound = n as f64 / (2.0 * h);
    let min_tail = hitting
        .return_tail
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tail_pass = !uniform || min_tail >= tail_bound - 1e-12;

    let horizon = (4.0 * h).ceil() as u64;
    let engine = TrajectoryEngine::new(chain);

    let mut subsets: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut pick_rng = replicate_rng(cfg.seed, u64::MAX);
    for frac in [2usize, 4] {
        let k = (n / frac).max(1);
        subsets.push(sample_subset(n, k, &mut pick_rng));
    }
    // Worst singleton: the hardest target to reach from anywhere.
    let (mut worst_y, mut worst_val) = (0usize, -1.0);
    for y in 0..n {
        let far = (0..n)
            .map(|x| hitting.expected_hitting[x][y])
            .fold(0.0, f64::max);
        if far > worst_val {
            worst_val = far;
            worst_y = y;
        }
    }
    subsets.push(vec![worst_y]);

    let mut subset_checks = Vec::new();
    for (si, subset) in subsets.iter().enumerate() {
        // Adversarial-ish start: maximize the distance to the nearest subset
        // element.
        let start = (0..n)
            .max_by(|&a, &b| {
                let da = subset
                    .iter()
                    .map(|&y| hitting.expected_hitting[a][y])
                    .fold(f64::INFINITY, f64::min);
                let db = subset
                    .iter()
                    .map(|&y| hitting.expected_hitting[b][y])
                    .fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap_or(0);
        let member = {
            let mut m = vec![false; n];
            for &y in subset {
                m[y] = true;
            }
            m
        };
        let need = subset.len(); // success when 2·hits ≥ |Y|
        let successes: u64 = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(cfg.seed ^ ((si as u64) << 32), r);
                let mut visited = vec![false; n];
                let mut hits = 0usize;
                let mut state = start;
                if member[state] {
                    visited[state] = true;
                    hits = 1;
                }
                for _ in 0..horizon {
                    state = engine.step(state, &mut rng);
                    if member[state] && !visited[state] {
                        visited[state] = true;
                        hits += 1;
                        if 2 * hits >= need {
                            break;
                        }
                    }
                }
                u64::from(2 * hits >= need)
            })
            .sum();
        let p = successes as f64 / cfg.replicates as f64;
        let se = (p * (1.0 - p) / cfg.replicates as f64).sqrt();
        let pass = p >= 0.5 - 3.0 * se;
        subset_checks.push(SubsetCoverageCheck {
            subset_size: subset.len(),
            start,
            estimate: p,
            std_error: se,
            required: 0.5,
            pass,
        });
    }

    let coverage_pass = subset_checks.iter().all(|c| c.pass);
    Ok(ExcursionReport {
        n_states: n,
        uniform_stationary: uniform,
        return_threshold: hitting.return_threshold,
        return_tail: hitting.return_tail,
        min_tail,
        tail_bound,
        tail_pass,
        max_hitting: h,
        coverage_horizon: horizon,
        subset_checks,
        coverage_pass,
        pass: tail_pass && coverage_pass,
    })
}

fn sample_subset(n: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut states: Vec<usize> = (0..n).collect();
    // Partial Fisher-Yates.
    for i in 0..k {
        let j = i + (rng.random::<u64>() as usize) % (n - i);
        states.swap(i, j);
    }
    let mut subset = states[..k].to_vec();
    subset.sort_unstable();
    subset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{build_complete, build_cycle, build_hypercube};

    #[test]
    fn complete_graph_hitting_is_n() {
        for n in [4usize, 8] {
            let chain = build_complete(n, true).unwrap();
            let h = hitting_times(&chain).unwrap();
            for x in 0..n {
                for y in 0..n {
                    let want = if x == y { 0.0 } else { n as f64 };
                    assert!(
                        (h.expected_hitting[x][y] - want).abs() < 1e-9,
                        "E_{x} T_{y} = {}",
                        h.expected_hitting[x][y]
                    );
                }
            }
            assert!((h.max_hitting - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn cycle_hitting_follows_gamblers_ruin() {
        // E_0 T_k = k(n−k) for the simple walk on the n-cycle.
        let c4 = build_cycle(4, 0.0).unwrap();
        let h = hitting_times(&c4).unwrap();
        assert!((h.max_hitting - 4.0).abs() < 1e-9);

        let c6 = build_cycle(6, 0.0).unwrap();
        let h = hitting_times(&c6).unwrap();
        assert!((h.max_hitting - 9.0).abs() < 1e-9);
        for k in 1..6 {
            let want = (k * (6 - k)) as f64;
            assert!((h.expected_hitting[0][k] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn first_step_identity_holds() {
        for chain in [
            build_cycle(7, 0.3).unwrap(),
            build_hypercube(4, 0.5).unwrap(),
            build_complete(5, false).unwrap(),
        ] {
            let n = chain.n_states();
            let h = hitting_times(&chain).unwrap();
            for y in 0..n {
                for x in 0..n {
                    if x == y {
                        continue;
                    }
                    let mut rhs = 1.0;
                    chain.kernel().for_each_in_row(x, |z, p| {
                        rhs += p * h.expected_hitting[z][y];
                    });
                    assert!(
                        (rhs - h.expected_hitting[x][y]).abs() < 1e-8,
                        "first-step identity off by {}",
                        rhs - h.expected_hitting[x][y]
                    );
                }
            }
            // Uniform stationary: E_x T_x⁺ = n via the same first-step sums.
            for x in 0..n {
                let mut ret = 1.0;
                chain.kernel().for_each_in_row(x, |z, p| {
                    ret += p * h.expected_hitting[z][x];
                });
                assert!((ret - n as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn return_tail_on_complete_graph() {
        let chain = build_complete(4, true).unwrap();
        let h = hitting_times(&chain).unwrap();
        assert_eq!(h.return_threshold, 2);
        for &t in &h.return_tail {
            assert!((t - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn mc_agrees_with_exact() {
        let chain = build_complete(8, true).unwrap();
        let est = mc_hitting_estimate(&chain, 0, 3, 100_000, 42).unwrap();
        assert!((est.mean - 8.0).abs() <= 3.0 * est.std_error, "{est:?}");

        let c4 = build_cycle(4, 0.0).unwrap();
        let est = mc_hitting_estimate(&c4, 0, 2, 100_000, 42).unwrap();
        assert!((est.mean - 4.0).abs() <= 3.0 * est.std_error, "{est:?}");

        let same = mc_hitting_estimate(&c4, 1, 1, 10, 42).unwrap();
        assert_eq!(same.mean, 0.0);
        assert_eq!(same.std_error, 0.0);
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let chain = build_cycle(5, 0.2).unwrap();
        let a = mc_hitting_estimate(&chain, 0, 2, 5_000, 7).unwrap();
        let b = mc_hitting_estimate(&chain, 0, 2, 5_000, 7).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn excursion_lemma_on_small_chains() {
        let cfg = ExcursionConfig { replicates: 20_000, seed: 3 };
        for chain in [
            build_complete(4, true).unwrap(),
            build_cycle(6, 0.0).unwrap(),
            build_hypercube(3, 0.5).unwrap(),
        ] {
            let report = check_excursion_lemma(&chain, cfg).unwrap();
            assert!(report.uniform_stationary);
            assert!(
                report.tail_pass,
                "tail {} < bound {}",
                report.min_tail, report.tail_bound
            );
            assert!(report.coverage_pass, "{:#?}", report.subset_checks);
        }
    }

    #[test]
    fn excursion_tail_complete4_exact() {
        let chain = build_complete(4, true).unwrap();
        let report =
            check_excursion_lemma(&chain, ExcursionConfig { replicates: 1_000, seed: 1 }).unwrap();
        assert!((report.min_tail - 0.75).abs() < 1e-12);
        assert!((report.tail_bound - 0.5).abs() < 1e-12);
    }
}
