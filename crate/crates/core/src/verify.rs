//! Orchestrated verification experiments over chain ladders: inequality
//! suites, scaling-band measurements for the wreath L² mixing time, the
//! m-lamp cycle metric separation, and the torus trend table.
//!
//! Every experiment emits an [`ExperimentReport`]: measured rows, fitted
//! ratios, and named assertions with pass/fail. Reports are deterministic
//! under fixed seeds — byte-identical JSON modulo the wall-time field — so
//! golden fixtures can be compared exactly even on Monte Carlo paths.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{find_t_star, SearchMode, SUBSET_DP_CAP};
use crate::lamplighter::{wreath_mixing_times, LampSpec, ReducedWreath};
use crate::metrics::{
    check_covariance_lemma, metrics_against, mixing_one, MetricKind, PerMetric,
    WorstCaseCurve,
};
use crate::passage::{check_excursion_lemma, hitting_times, ExcursionConfig};
use crate::rng::replicate_rng;
use crate::spectral::analyze;
use crate::{ChainSpec, Error, MarkovChain, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssertionResult {
    pub name: String,
    /// What is being checked, in plain words.
    pub claim: String,
    pub pass: bool,
    pub details: String,
}

impl AssertionResult {
    fn new(name: &str, claim: &str, pass: bool, details: String) -> Self {
        Self { name: name.into(), claim: claim.into(), pass, details }
    }
}

/// Structured record of one verification run. `wall_time_ms` is the only
/// field allowed to differ between reruns with identical inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub id: String,
    pub family: String,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub rows: serde_json::Value,
    pub fitted: Vec<(String, f64)>,
    pub assertions: Vec<AssertionResult>,
    pub passed: bool,
    pub wall_time_ms: u64,
}

impl ExperimentReport {
    /// Canonical JSON with the wall-time zeroed, for determinism checks and
    /// golden comparisons.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_ms = 0;
        serde_json::to_string_pretty(&clone).expect("report serialization")
    }
}

fn finalize(
    id: &str,
    family: String,
    sizes: Vec<usize>,
    seeds: Vec<u64>,
    rows: serde_json::Value,
    fitted: Vec<(String, f64)>,
    assertions: Vec<AssertionResult>,
    started: Instant,
) -> ExperimentReport {
    let passed = assertions.iter().all(|a| a.pass);
    ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        id: id.into(),
        family,
        sizes,
        seeds,
        rows,
        fitted,
        assertions,
        passed,
        wall_time_ms: started.elapsed().as_millis() as u64,
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Random walk on a dense random symmetric weight matrix: reversible,
/// irreducible and aperiodic by construction (positive weights, positive
/// diagonal).
pub fn random_reversible_spec(seed: u64, index: u64) -> ChainSpec {
    let mut rng = replicate_rng(seed ^ 0xC4A1_5EED, index);
    let n = 3 + (rand::Rng::random::<u64>(&mut rng) % 10) as usize;
    let mut w = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let u: f64 = rand::Rng::random(&mut rng);
            let v = 0.1 + 0.9 * u;
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    let rows = w
        .into_iter()
        .map(|row| {
            let sum: f64 = row.iter().sum();
            row.into_iter().map(|x| x / sum).collect()
        })
        .collect();
    ChainSpec::Raw { rows }
}

/// The default verification set: lazy cycles, lazy hypercubes, complete
/// graphs with and without self-loops, and seeded random reversible chains.
pub fn default_chain_set(seed: u64) -> Vec<ChainSpec> {
    let mut specs = Vec::new();
    for n in 3..=10 {
        specs.push(ChainSpec::Cycle { n, laziness: 0.5 });
    }
    for dim in 2..=6 {
        specs.push(ChainSpec::Hypercube { dim, laziness: 0.5 });
    }
    for n in 3..=8 {
        specs.push(ChainSpec::Complete { n, self_loops: true });
        specs.push(ChainSpec::Complete { n, self_loops: false });
    }
    for i in 0..20 {
        specs.push(random_reversible_spec(seed, i));
    }
    specs
}

#[derive(Debug, Clone, Copy)]
pub struct InequalitySuiteConfig {
    pub t_max: u64,
    pub seed: u64,
    /// Random test functions per chain for the covariance check.
    pub functions_per_chain: usize,
    pub covariance_t_max: u64,
    pub excursion_replicates: u64,
}

impl Default for InequalitySuiteConfig {
    fn default() -> Self {
        Self {
            t_max: 200,
            seed: 7,
            functions_per_chain: 50,
            covariance_t_max: 50,
            excursion_replicates: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct InequalityRow {
    chain: String,
    n: usize,
    reversible: bool,
    uniform: bool,
    metric_violation: f64,
    sep_monotone_violation: f64,
    sep_submult_violation: f64,
    covariance_violation: f64,
    excursion_tail_margin: Option<f64>,
    excursion_coverage_min: Option<f64>,
}

/// Exact inequality suite over a chain set: the pointwise metric inequality
/// chain, separation monotonicity and submultiplicativity, covariance decay
/// against σ₁, and the return-tail / half-coverage excursion checks on
/// uniform-stationary chains. Any construction error aborts the whole suite.
pub fn run_inequality_suite(
    specs: &[ChainSpec],
    cfg: &InequalitySuiteConfig,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if specs.is_empty() {
        return Ok(finalize(
            "inequality-suite",
            "empty".into(),
            vec![],
            vec![cfg.seed],
            serde_json::Value::Array(vec![]),
            vec![],
            vec![AssertionResult::new(
                "non_empty_set",
                "chain set is non-empty",
                true,
                "warning: empty chain set, vacuous pass".into(),
            )],
            started,
        ));
    }

    // Construction errors surface immediately and abort the suite.
    let chains: Vec<(String, MarkovChain)> = specs
        .iter()
        .map(|s| Ok((s.describe(), s.build()?)))
        .collect::<Result<_>>()?;

    // Pointwise inequality scan, parallel over chains.
    let scans: Vec<(f64, f64, f64)> = chains
        .par_iter()
        .map(|(_, chain)| inequality_scan(chain, cfg.t_max))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut metric_max = f64::NEG_INFINITY;
    let mut sep_mono_max = f64::NEG_INFINITY;
    let mut sep_sub_max = f64::NEG_INFINITY;
    let mut cov_max = f64::NEG_INFINITY;
    let mut tail_min_margin = f64::INFINITY;
    let mut coverage_min = f64::INFINITY;

    for (i, ((label, chain), &(metric_v, mono_v, sub_v))) in
        chains.iter().zip(&scans).enumerate()
    {
        let n = chain.n_states();
        // Covariance decay with seeded random test functions.
        let mut cov_v = f64::NEG_INFINITY;
        for k in 0..cfg.functions_per_chain {
            let mut rng = replicate_rng(cfg.seed ^ 0xF0_0F, (i * 1000 + k) as u64);
            let f: Vec<f64> = (0..n)
                .map(|_| 2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0)
                .collect();
            let rep = check_covariance_lemma(chain, &f, cfg.covariance_t_max)?;
            cov_v = cov_v.max(rep.max_violation);
        }

        let uniform = chain.is_uniform_stationary();
        let (tail_margin, cov_floor) = if uniform {
            let rep = check_excursion_lemma(
                chain,
                ExcursionConfig {
                    replicates: cfg.excursion_replicates,
                    seed: cfg.seed ^ ((i as u64) << 40),
                },
            )?;
            let margin = rep.min_tail - rep.tail_bound;
            let floor = rep
                .subset_checks
                .iter()
                .map(|c| c.estimate + 3.0 * c.std_error - c.required)
                .fold(f64::INFINITY, f64::min);
            (Some(margin), Some(floor))
        } else {
            (None, None)
        };

        metric_max = metric_max.max(metric_v);
        sep_mono_max = sep_mono_max.max(mono_v);
        sep_sub_max = sep_sub_max.max(sub_v);
        cov_max = cov_max.max(cov_v);
        if let Some(m) = tail_margin {
            tail_min_margin = tail_min_margin.min(m);
        }
        if let Some(c) = cov_floor {
            coverage_min = coverage_min.min(c);
        }
        rows.push(InequalityRow {
            chain: label.clone(),
            n,
            reversible: chain.reversible(),
            uniform,
            metric_violation: metric_v,
            sep_monotone_violation: mono_v,
            sep_submult_violation: sub_v,
            covariance_violation: cov_v,
            excursion_tail_margin: tail_margin,
            excursion_coverage_min: cov_floor,
        });
    }

    let assertions = vec![
        AssertionResult::new(
            "metric_inequality_chain",
            "tv <= sep, 2tv^2 <= D, D <= sep*log(1/pi_min), tv <= l2/2 for every start and t",
            metric_max <= 1e-12,
            format!("max violation {metric_max:.3e}"),
        ),
        AssertionResult::new(
            "sep_monotone",
            "worst-case separation is non-increasing in t",
            sep_mono_max <= 1e-12,
            format!("max violation {sep_mono_max:.3e}"),
        ),
        AssertionResult::new(
            "sep_submultiplicative",
            "sep(m+n) <= sep(m) * sep(n)",
            sep_sub_max <= 1e-12,
            format!("max violation {sep_sub_max:.3e}"),
        ),
        AssertionResult::new(
            "covariance_decay",
            "Cov(f(X_1), f(X_{1+t})) <= sigma1^t * Var(f) for random f",
            cov_max <= 1e-10,
            format!("max violation {cov_max:.3e}"),
        ),
        AssertionResult::new(
            "return_tail_floor",
            "min_x Pr_x(return >= ceil(n/2)) >= n/(2H) on uniform chains, exactly",
            tail_min_margin >= -1e-12,
            format!("min margin {tail_min_margin:.3e}"),
        ),
        AssertionResult::new(
            "half_coverage_by_4h",
            "half of any sampled subset is visited within ceil(4H) steps with prob >= 1/2 (3 s.e.)",
            coverage_min >= 0.0,
            format!("min slack at +3 s.e. {coverage_min:.3e}"),
        ),
    ];

    Ok(finalize(
        "inequality-suite",
        "default-chain-set".into(),
        chains.iter().map(|(_, c)| c.n_states()).collect(),
        vec![cfg.seed],
        serde_json::to_value(&rows).expect("rows"),
        vec![
            ("max_metric_violation".into(), metric_max),
            ("max_covariance_violation".into(), cov_max),
        ],
        assertions,
        started,
    ))
}

/// Max violations of (metric chain, sep monotonicity, sep submultiplicativity)
/// over all starts and times up to `t_max`.
fn inequality_scan(chain: &MarkovChain, t_max: u64) -> Result<(f64, f64, f64)> {
    let log_inv = (1.0 / chain.min_stationary()).ln();
    let pi = chain.stationary();
    let mut curve = WorstCaseCurve::new(chain)?;
    let mut metric_v = f64::NEG_INFINITY;
    let mut worst_sep = Vec::with_capacity(t_max as usize + 1);
    for _ in 0..=t_max {
        let mut sep_t = f64::NEG_INFINITY;
        for row in curve.rows() {
            let v = metrics_against(pi, row);
            metric_v = metric_v.max(v.tv - v.sep);
            metric_v = metric_v.max(2.0 * v.tv * v.tv - v.entropy);
            metric_v = metric_v.max(v.entropy - v.sep * log_inv);
            metric_v = metric_v.max(v.tv - v.l2 / 2.0);
            sep_t = sep_t.max(v.sep);
        }
        worst_sep.push(sep_t);
        curve.step();
    }
    let mut mono_v = f64::NEG_INFINITY;
    for w in worst_sep.windows(2) {
        mono_v = mono_v.max(w[1] - w[0]);
    }
    let mut sub_v = f64::NEG_INFINITY;
    for m in 1..worst_sep.len() {
        for n in m..worst_sep.len() {
            if m + n >= worst_sep.len() {
                break;
            }
            sub_v = sub_v.max(worst_sep[m + n] - worst_sep[m] * worst_sep[n]);
        }
    }
    Ok((metric_v, mono_v, sub_v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingFamily {
    Hypercube,
    Complete,
    Cycle,
}

impl ScalingFamily {
    fn spec(&self, size: usize, laziness: f64) -> ChainSpec {
        match self {
            ScalingFamily::Hypercube => ChainSpec::Hypercube { dim: size, laziness },
            ScalingFamily::Complete => ChainSpec::Complete { n: size, self_loops: true },
            ScalingFamily::Cycle => ChainSpec::Cycle { n: size, laziness },
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingConfig {
    pub laziness: f64,
    pub theta: f64,
    pub m: u64,
    pub replicates: u64,
    pub seed: u64,
    pub horizon: u64,
    /// Two-sided band on the ratio spread.
    pub band: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            laziness: 0.5,
            theta: 2.0,
            m: 2,
            replicates: 20_000,
            seed: 0x7EAA,
            horizon: 1 << 16,
            band: 8.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ScalingRow {
    size: usize,
    n: usize,
    t_rel: f64,
    h: f64,
    kappa: f64,
    /// |G| (T_rel + log|G|).
    predictor: f64,
    tau2_wreath: u64,
    mode: String,
    ratio: f64,
}

/// Wreath L² mixing time across a size ladder against the predictor
/// `|G|(T_rel + log|G|)`: exact reduction inside the DP cap, Monte Carlo
/// threshold-time proxy (τ₂(base) + t*) beyond it. Asserts the two-sided
/// ratio band and the linear-hitting admissibility of the family.
pub fn run_theorem1_scaling(
    family: ScalingFamily,
    sizes: &[usize],
    cfg: &ScalingConfig,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut rows: Vec<ScalingRow> = Vec::new();
    for &size in sizes {
        let spec = family.spec(size, cfg.laziness);
        let chain = spec.build()?;
        let n = chain.n_states();
        let summary = analyze(&chain)?;
        let h = hitting_times(&chain)?.max_hitting;
        let kappa = h / n as f64;
        let nf = n as f64;
        let predictor = nf * (summary.t_rel + nf.ln());
        let (tau2, mode) = if n <= SUBSET_DP_CAP {
            let eps = PerMetric { tv: 1e18, l2: 0.25, sep: 1e18, entropy: 1e18 };
            let times =
                wreath_mixing_times(&chain, &LampSpec::new(cfg.m)?, 0, eps, cfg.horizon)?;
            (times.tau_2, "exact-reduction".to_string())
        } else {
            let base_tau2 = mixing_one(&chain, MetricKind::L2, 0.25, cfg.horizon)?;
            let t_star = find_t_star(
                &chain,
                0,
                cfg.theta,
                1.0,
                1,
                SearchMode::Mc {
                    replicates: cfg.replicates,
                    seed: cfg.seed ^ (size as u64),
                    horizon: cfg.horizon,
                },
            )?;
            (base_tau2 + t_star.estimate(), "mc-proxy".to_string())
        };
        rows.push(ScalingRow {
            size,
            n,
            t_rel: summary.t_rel,
            h,
            kappa,
            predictor,
            tau2_wreath: tau2,
            mode,
            ratio: tau2 as f64 / predictor,
        });
    }

    let kappas: Vec<f64> = rows.iter().map(|r| r.kappa).collect();
    let kappa_monotone_up = kappas.windows(2).all(|w| w[1] > w[0] + 1e-9);
    let kappa_growth = kappas.last().unwrap_or(&1.0) / kappas.first().unwrap_or(&1.0);
    let admissible = !(kappa_monotone_up && kappa_growth > 1.5);

    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::MAX, f64::min);
    let spread = max_ratio / min_ratio;

    let mut assertions = vec![AssertionResult::new(
        "hitting_linear_in_size",
        "max hitting time stays within a constant multiple of |G| across the ladder",
        admissible,
        format!("kappa column {kappas:?}"),
    )];
    if admissible {
        assertions.push(AssertionResult::new(
            "l2_scaling_band",
            "tau2(wreath) / [|G|(T_rel + log|G|)] spread bounded across the ladder (two-sided)",
            spread < cfg.band,
            format!("spread {spread:.3} over ratios {ratios:?}"),
        ));
    } else {
        assertions.push(AssertionResult::new(
            "l2_scaling_band",
            "family inadmissible: hitting time grows superlinearly, band not asserted",
            true,
            format!("kappa grows by {kappa_growth:.2}x; ratios recorded only"),
        ));
    }

    Ok(finalize(
        "l2-scaling-band",
        format!("{family:?}"),
        sizes.to_vec(),
        vec![cfg.seed],
        serde_json::to_value(&rows).expect("rows"),
        vec![
            ("ratio_spread".into(), spread),
            ("max_ratio".into(), max_ratio),
            ("min_ratio".into(), min_ratio),
        ],
        assertions,
        started,
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct SeparationConfig {
    pub laziness: f64,
    pub horizon: u64,
    pub eps_tv: f64,
    pub eps_l2: f64,
    pub eps_ent: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            laziness: 0.5,
            horizon: 1 << 16,
            eps_tv: 0.25,
            eps_l2: 0.25,
            eps_ent: (-1.0f64).exp(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SeparationRow {
    m: u64,
    tau_tv: u64,
    tau_2: u64,
    tau_sep: u64,
    tau_ent: u64,
    ent_tv_ratio: f64,
    log_state_count: f64,
    /// ent_tv_ratio / log log(state count).
    c_prime: f64,
}

/// The m-lamp lazy cycle: variation, L² and entropy mixing times as the lamp
/// alphabet grows. One coverage DP serves every m.
pub fn run_example_separation(
    n: usize,
    m_list: &[u64],
    cfg: &SeparationConfig,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("m_list must be strictly ascending".into()));
    }
    let base = crate::build_cycle(n, cfg.laziness)?;
    let spec0 = LampSpec::new(*m_list.first().unwrap_or(&2))?;
    let mut reduced = ReducedWreath::new(&base, &spec0, 0)?;

    struct Work {
        m: u64,
        tracker: crate::metrics::CrossingTracker,
    }
    let eps = PerMetric {
        tv: cfg.eps_tv,
        l2: cfg.eps_l2,
        sep: (-1.0f64).exp(),
        entropy: cfg.eps_ent,
    };
    let mut work: Vec<Work> = m_list
        .iter()
        .map(|&m| Work { m, tracker: crate::metrics::CrossingTracker::new(eps) })
        .collect();

    loop {
        let t = reduced.t();
        let mut all_done = true;
        for w in &mut work {
            if w.tracker.done() {
                continue;
            }
            let p = reduced.profile(w.m);
            w.tracker.observe(
                t,
                PerMetric { tv: p.tv, l2: p.l2, sep: p.sep, entropy: p.entropy },
            );
            if !w.tracker.done() {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
        if t >= cfg.horizon {
            let p = reduced.profile(work[0].m);
            return Err(Error::HorizonExceeded {
                horizon: cfg.horizon,
                t,
                tv: p.tv,
                l2: p.l2,
                sep: p.sep,
                entropy: p.entropy,
            });
        }
        reduced.step();
    }

    let rows: Vec<SeparationRow> = work
        .iter()
        .map(|w| {
            let times = w.tracker.result().expect("tracker done");
            let nf = n as f64;
            let log_state_count = nf.ln() + nf * (w.m as f64).ln();
            let ratio = times.tau_ent as f64 / times.tau_tv as f64;
            SeparationRow {
                m: w.m,
                tau_tv: times.tau_tv,
                tau_2: times.tau_2,
                tau_sep: times.tau_sep,
                tau_ent: times.tau_ent,
                ent_tv_ratio: ratio,
                log_state_count,
                c_prime: ratio / log_state_count.ln(),
            }
        })
        .collect();

    let tv_col: Vec<u64> = rows.iter().map(|r| r.tau_tv).collect();
    let tv_spread = tv_col.iter().max().unwrap() - tv_col.iter().min().unwrap();
    let l2_col: Vec<u64> = rows.iter().map(|r| r.tau_2).collect();
    let l2_strictly_up = l2_col.windows(2).all(|w| w[1] > w[0]);
    let log_ms: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
    let l2_f: Vec<f64> = rows.iter().map(|r| r.tau_2 as f64).collect();
    let slope = least_squares_slope(&log_ms, &l2_f);
    let ratios: Vec<f64> = rows.iter().map(|r| r.ent_tv_ratio).collect();
    let ratio_nondecreasing = ratios.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let c_prime = rows.iter().map(|r| r.c_prime).fold(f64::MIN, f64::max);

    let assertions = vec![
        AssertionResult::new(
            "tv_time_m_invariant",
            "variation mixing time constant in m within +/-1 step",
            tv_spread <= 1,
            format!(
                "tau_tv column {tv_col:?} (spread {tv_spread}); the m-independence of the \
                 variation time is an asymptotic statement and drifts by several steps at n={n}"
            ),
        ),
        AssertionResult::new(
            "l2_time_strictly_increasing",
            "L2 mixing time strictly increasing in m",
            l2_strictly_up,
            format!("tau_2 column {l2_col:?}"),
        ),
        AssertionResult::new(
            "l2_slope_vs_log_m_positive",
            "fitted slope of tau_2 against log m is positive",
            slope > 0.0,
            format!("slope {slope:.3}"),
        ),
        AssertionResult::new(
            "ent_tv_ratio_non_decreasing",
            "tau_ent / tau_tv non-decreasing in m",
            ratio_nondecreasing,
            format!("ratio column {ratios:?}"),
        ),
        AssertionResult::new(
            "ent_tv_ratio_loglog_bounded",
            "tau_ent / tau_tv bounded by C' * log log(state count), C' reported",
            c_prime.is_finite(),
            format!("C' = {c_prime:.4}"),
        ),
    ];

    Ok(finalize(
        "m-lamp-cycle-separation",
        format!("cycle:{n}(lazy={})", cfg.laziness),
        m_list.iter().map(|&m| m as usize).collect(),
        vec![],
        serde_json::to_value(&rows).expect("rows"),
        vec![
            ("tau2_slope_vs_log_m".into(), slope),
            ("c_prime".into(), c_prime),
            ("tau_tv_spread".into(), tv_spread as f64),
        ],
        assertions,
        started,
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct TorusConfig {
    pub m: u64,
    pub laziness: f64,
    pub replicates: u64,
    pub seed: u64,
    pub horizon: u64,
    pub eps_ent: f64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            m: 2,
            laziness: 0.5,
            replicates: 20_000,
            seed: 0x70_0105,
            horizon: 1 << 16,
            eps_ent: (-1.0f64).exp(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct TorusRow {
    side: usize,
    n: usize,
    h: f64,
    h_over_n_log_n: f64,
    cover_mean: f64,
    cover_se: f64,
    cover_exact: Option<f64>,
    tau_ent: u64,
    tau_ent_mode: String,
    tau_ent_over_n_log_n_log_m: f64,
}

/// Trend table for the m-lamp walk on the 2-d torus: maximal hitting time,
/// cover-time statistics, and the wreath entropy mixing time (exact reduction
/// up to side 4, a pinned-lamp-entropy proxy beyond). Growth columns are
/// recorded, not asserted — the constants are unknown at these sizes.
pub fn run_torus_entropy_remark(sides: &[usize], cfg: &TorusConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut cross_checks = Vec::new();
    for &side in sides {
        let chain = crate::build_torus2d(side, cfg.laziness)?;
        let n = chain.n_states();
        let nf = n as f64;
        let h = hitting_times(&chain)?.max_hitting;

        let cover = mc_cover_times(&chain, 0, cfg.replicates, cfg.seed ^ ((side as u64) << 8));
        let cover_mean =
            cover.iter().map(|&c| c as f64).sum::<f64>() / cover.len() as f64;
        let var = cover
            .iter()
            .map(|&c| (c as f64 - cover_mean) * (c as f64 - cover_mean))
            .sum::<f64>()
            / (cover.len() - 1) as f64;
        let cover_se = (var / cover.len() as f64).sqrt();

        let (cover_exact, tau_ent, mode) = if n <= SUBSET_DP_CAP {
            let exact_cover = exact_expected_cover(&chain, 0)?;
            cross_checks.push((side, exact_cover, cover_mean, cover_se));
            let eps = PerMetric { tv: 1e18, l2: 1e18, sep: 1e18, entropy: cfg.eps_ent };
            let times =
                wreath_mixing_times(&chain, &LampSpec::new(cfg.m)?, 0, eps, cfg.horizon)?;
            (Some(exact_cover), times.tau_ent, "exact-reduction".to_string())
        } else {
            // Pinned-lamp entropy proxy: the entropy deficit of unrandomized
            // lamps is E|S_t|·log m; take its ε crossing from the MC curve.
            let tau = mc_entropy_proxy_crossing(
                &chain,
                0,
                cfg.m,
                cfg.eps_ent,
                cfg.replicates,
                cfg.seed ^ ((side as u64) << 16),
                cfg.horizon,
            )?;
            (None, tau, "mc-pinned-lamp-proxy".to_string())
        };

        rows.push(TorusRow {
            side,
            n,
            h,
            h_over_n_log_n: h / (nf * nf.ln()),
            cover_mean,
            cover_se,
            cover_exact,
            tau_ent,
            tau_ent_mode: mode,
            tau_ent_over_n_log_n_log_m: tau_ent as f64
                / (nf * (nf * (cfg.m as f64).ln()).ln()),
        });
    }

    let mut assertions = Vec::new();
    for (side, exact, mean, se) in &cross_checks {
        assertions.push(AssertionResult::new(
            &format!("cover_exact_mc_agree_side{side}"),
            "Monte Carlo cover-time mean within 4 s.e. of the exact DP value",
            (exact - mean).abs() <= 4.0 * se,
            format!("exact {exact:.4}, mc {mean:.4} +/- {se:.4}"),
        ));
    }
    // Degenerate-lamp sanity on the smallest side: m = 1 collapses onto the base.
    if let Some(&side) = sides.iter().find(|&&s| s * s <= SUBSET_DP_CAP) {
        let chain = crate::build_torus2d(side, cfg.laziness)?;
        let eps = PerMetric { tv: 1e18, l2: 1e18, sep: 1e18, entropy: cfg.eps_ent };
        let degenerate =
            wreath_mixing_times(&chain, &LampSpec::new(1)?, 0, eps, cfg.horizon)?;
        let base =
            crate::lamplighter::fixed_start_mixing_times(&chain, 0, eps, cfg.horizon)?;
        assertions.push(AssertionResult::new(
            "degenerate_lamps_match_base",
            "m = 1 wreath entropy time equals the base chain's",
            degenerate.tau_ent == base.tau_ent,
            format!("wreath {} vs base {}", degenerate.tau_ent, base.tau_ent),
        ));
    }
    assertions.push(AssertionResult::new(
        "growth_columns_recorded",
        "hitting, cover and entropy growth columns recorded (trend-level only)",
        true,
        "constants unknown at desk scale; no strict assertion".into(),
    ));

    Ok(finalize(
        "torus-entropy-trend",
        format!("torus2d(m={}, lazy={})", cfg.m, cfg.laziness),
        sides.to_vec(),
        vec![cfg.seed],
        serde_json::to_value(&rows).expect("rows"),
        vec![],
        assertions,
        started,
    ))
}

/// Exact expected cover time from the subset DP: Σ_t Pr[not covered by t].
fn exact_expected_cover(chain: &MarkovChain, start: usize) -> Result<f64> {
    let mut dp = crate::coverage::ExactCoverage::new(
        chain,
        &crate::coverage::StartDist::Point(start),
    )?;
    let mut acc = 0.0;
    loop {
        let uncovered = 1.0 - dp.prob_covered();
        if uncovered <= 1e-13 {
            return Ok(acc);
        }
        acc += uncovered;
        if dp.t() > 1 << 22 {
            return Err(Error::SearchHorizonExceeded {
                horizon: 1 << 22,
                t: dp.t(),
                last_value: uncovered,
            });
        }
        dp.step();
    }
}

/// Seed-deterministic cover-time samples.
fn mc_cover_times(chain: &MarkovChain, start: usize, replicates: u64, seed: u64) -> Vec<u64> {
    let engine = crate::rng::TrajectoryEngine::new(chain);
    let n = chain.n_states();
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut visited = vec![false; n];
            visited[start] = true;
            let mut left = n - 1;
            let mut state = start;
            let mut t = 0u64;
            while left > 0 {
                t += 1;
                state = engine.step(state, &mut rng);
                if !visited[state] {
                    visited[state] = true;
                    left -= 1;
                }
            }
            t
        })
        .collect()
}

/// First t with `E|S_t| · log m ≤ ε`, from a Monte Carlo mean curve of the
/// uncovered-set size (segment accumulation over first-visit events, merged
/// in fixed chunk order).
fn mc_entropy_proxy_crossing(
    chain: &MarkovChain,
    start: usize,
    m: u64,
    eps: f64,
    replicates: u64,
    seed: u64,
    horizon: u64,
) -> Result<u64> {
    let engine = crate::rng::TrajectoryEngine::new(chain);
    let n = chain.n_states();
    let len = horizon as usize + 1;
    let chunk_size = 1024u64;
    let chunks = replicates.div_ceil(chunk_size);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut diff = vec![0.0f64; len + 1];
            for r in chunk * chunk_size..((chunk + 1) * chunk_size).min(replicates) {
                let mut rng = replicate_rng(seed, r);
                let mut visited = vec![false; n];
                visited[start] = true;
                let mut s = (n - 1) as u64;
                let mut state = start;
                let mut seg = 0u64;
                let mut t = 0u64;
                while s > 0 && t < horizon {
                    t += 1;
                    state = engine.step(state, &mut rng);
                    if !visited[state] {
                        visited[state] = true;
                        diff[seg as usize] += s as f64;
                        diff[t as usize] -= s as f64;
                        seg = t;
                        s -= 1;
                    }
                }
                diff[seg as usize] += s as f64;
                diff[len] -= s as f64;
            }
            diff
        })
        .collect();
    let mut sum = vec![0.0f64; len + 1];
    for d in &partials {
        for i in 0..=len {
            sum[i] += d[i];
        }
    }
    for i in 1..len {
        sum[i] += sum[i - 1];
    }
    let log_m = (m as f64).ln();
    for t in 0..len as u64 {
        let mean_s = sum[t as usize] / replicates as f64;
        if mean_s * log_m <= eps {
            return Ok(t);
        }
    }
    Err(Error::SearchHorizonExceeded {
        horizon,
        t: horizon,
        last_value: sum[len - 1] / replicates as f64,
    })
}

/// Golden fixture store. First verified run freezes a report; later runs
/// compare the canonical JSON exactly (reports are seed-deterministic, so
/// exact comparison is valid even on Monte Carlo paths).
#[derive(Debug, Clone)]
pub struct GoldenStore {
    dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldenOutcome {
    Frozen,
    Match,
    Mismatch,
}

impl GoldenStore {
    /// Directory from `MIXLAB_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os("MIXLAB_CACHE_DIR").map(|d| Self { dir: PathBuf::from(d) })
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn compare_or_freeze(&self, report: &ExperimentReport) -> std::io::Result<GoldenOutcome> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{}.json", report.id));
        let canonical = report.canonical_json();
        if path.exists() {
            let existing = std::fs::read_to_string(&path)?;
            Ok(if existing == canonical { GoldenOutcome::Match } else { GoldenOutcome::Mismatch })
        } else {
            std::fs::write(&path, canonical)?;
            Ok(GoldenOutcome::Frozen)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_is_vacuous_pass() {
        let report = run_inequality_suite(&[], &InequalitySuiteConfig::default()).unwrap();
        assert!(report.passed);
        assert!(report.assertions[0].details.contains("vacuous"));
    }

    #[test]
    fn corrupted_kernel_aborts_suite() {
        let specs = vec![
            ChainSpec::Cycle { n: 4, laziness: 0.5 },
            ChainSpec::Raw { rows: vec![vec![0.5, 0.4], vec![0.5, 0.5]] },
        ];
        match run_inequality_suite(&specs, &InequalitySuiteConfig::default()) {
            Err(Error::NonStochasticRow { row, .. }) => assert_eq!(row, 0),
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn small_suite_passes() {
        let specs = vec![
            ChainSpec::Cycle { n: 5, laziness: 0.5 },
            ChainSpec::Complete { n: 4, self_loops: true },
            random_reversible_spec(3, 0),
        ];
        let cfg = InequalitySuiteConfig {
            t_max: 60,
            excursion_replicates: 5_000,
            functions_per_chain: 8,
            ..Default::default()
        };
        let report = run_inequality_suite(&specs, &cfg).unwrap();
        assert!(report.passed, "{:#?}", report.assertions);
    }

    #[test]
    fn reports_are_deterministic() {
        let specs = vec![ChainSpec::Cycle { n: 5, laziness: 0.5 }];
        let cfg = InequalitySuiteConfig {
            t_max: 40,
            excursion_replicates: 2_000,
            functions_per_chain: 4,
            ..Default::default()
        };
        let a = run_inequality_suite(&specs, &cfg).unwrap();
        let b = run_inequality_suite(&specs, &cfg).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn random_reversible_specs_are_reversible() {
        for i in 0..20 {
            let chain = random_reversible_spec(42, i).build().unwrap();
            assert!(chain.reversible(), "chain {i} not detected reversible");
            assert!(chain.n_states() >= 3 && chain.n_states() <= 12);
        }
    }

    #[test]
    fn scaling_on_complete_ladder() {
        let cfg = ScalingConfig { replicates: 4_000, ..Default::default() };
        let report =
            run_theorem1_scaling(ScalingFamily::Complete, &[4, 5, 6, 7, 8], &cfg).unwrap();
        assert!(report.passed, "{:#?}", report.assertions);
    }

    #[test]
    fn scaling_flags_cycle_family_inadmissible() {
        let cfg = ScalingConfig { replicates: 2_000, ..Default::default() };
        let report = run_theorem1_scaling(ScalingFamily::Cycle, &[4, 6, 8, 10], &cfg).unwrap();
        let admissibility = &report.assertions[0];
        assert!(
            !admissibility.pass,
            "quadratic hitting must be flagged: {admissibility:?}"
        );
    }

    #[test]
    fn separation_experiment_shape() {
        let report =
            run_example_separation(5, &[2, 4, 16], &SeparationConfig::default()).unwrap();
        let by_name = |n: &str| {
            report
                .assertions
                .iter()
                .find(|a| a.name == n)
                .unwrap_or_else(|| panic!("missing assertion {n}"))
                .clone()
        };
        assert!(by_name("l2_time_strictly_increasing").pass);
        assert!(by_name("l2_slope_vs_log_m_positive").pass);
        assert!(by_name("ent_tv_ratio_non_decreasing").pass);
        // The +/-1 invariance of the variation time does not hold at this
        // scale; the report must say so rather than hide it.
        assert!(!by_name("tv_time_m_invariant").pass);
    }

    #[test]
    fn torus_trend_runs_on_side3() {
        let cfg = TorusConfig { replicates: 3_000, ..Default::default() };
        let report = run_torus_entropy_remark(&[3], &cfg).unwrap();
        assert!(report.passed, "{:#?}", report.assertions);
    }

    #[test]
    fn golden_store_freeze_then_match() {
        let dir = std::env::temp_dir().join(format!("mixlab-goldens-{}", std::process::id()));
        let store = GoldenStore::at(&dir);
        let specs = vec![ChainSpec::Complete { n: 4, self_loops: true }];
        let cfg = InequalitySuiteConfig {
            t_max: 20,
            excursion_replicates: 1_000,
            functions_per_chain: 2,
            ..Default::default()
        };
        let report = run_inequality_suite(&specs, &cfg).unwrap();
        assert_eq!(store.compare_or_freeze(&report).unwrap(), GoldenOutcome::Frozen);
        let again = run_inequality_suite(&specs, &cfg).unwrap();
        assert_eq!(store.compare_or_freeze(&again).unwrap(), GoldenOutcome::Match);
        std::fs::remove_dir_all(&dir).ok();
    }
}
