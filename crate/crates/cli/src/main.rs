//! `mixlab`: build finite chains, analyze their spectra, hitting times and
//! mixing metrics, run coverage simulations, and reproduce the verification
//! experiments.
//!
//! Output goes to stdout as JSON by default; `--csv` switches tabular
//! commands to CSV and `--out` redirects to a file. Every subcommand accepts
//! `--config <file>` with a JSON-serialized command that overrides the
//! command line; configs round-trip losslessly. Exit codes: 0 success,
//! 1 failed verification assertion, 2 usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use mixlab_core::coverage::{
    self, CoverageProfile, KeyTheoremConfig, KeyTheoremParams, SearchMode,
};
use mixlab_core::lamplighter::{self, LampSpec, RandomizeConvention};
use mixlab_core::metrics::{self};
use mixlab_core::passage;
use mixlab_core::spectral;
use mixlab_core::verify::{
    self, GoldenOutcome, GoldenStore, InequalitySuiteConfig, ScalingConfig, ScalingFamily,
    SeparationConfig, TorusConfig,
};
use mixlab_core::{chain, ChainSpec, MarkovChain};

#[derive(Parser, Debug)]
#[command(name = "mixlab", version, about = "Markov chain mixing laboratory")]
struct Cli {
    /// Worker thread cap (defaults to available cores). Results are
    /// independent of this by the deterministic-reduction contract.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Emit tabular output as CSV instead of JSON.
    #[arg(long, global = true)]
    csv: bool,

    /// JSON file holding a serialized command; overrides all other flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
enum Command {
    /// Build a chain and emit its definition file.
    Build(BuildArgs),
    /// Eigenvalues, relaxation time, spectral gap, second singular value.
    Spectral(SpectralArgs),
    /// Expected hitting times and return-time tails (or a Monte Carlo
    /// first-passage estimate with --mc).
    Hitting(HittingArgs),
    /// Distance-to-stationarity curves and mixing times.
    Metrics(MetricsArgs),
    /// Uncovered-set laws, MGFs and threshold times.
    #[command(subcommand)]
    Coverage(CoverageCmd),
    /// Wreath-product chain metrics via the covered-set reduction.
    Lamplighter(LamplighterArgs),
    /// Verification experiments; exits 1 if any assertion fails.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ChainArgs {
    /// cycle:N | torus2d:SIDE | hypercube:DIM | complete:N | file:PATH
    #[arg(long)]
    chain: String,
    /// Holding probability mixed into the builders.
    #[arg(long, default_value_t = 0.0)]
    lazy: f64,
    /// Give the complete graph self-loops.
    #[arg(long, default_value_t = false)]
    self_loops: bool,
}

impl ChainArgs {
    fn build(&self) -> anyhow::Result<MarkovChain> {
        let (kind, arg) = self
            .chain
            .split_once(':')
            .with_context(|| format!("expected kind:value, got {:?}", self.chain))?;
        let chain = match kind {
            "file" => {
                let text = std::fs::read_to_string(arg)
                    .with_context(|| format!("reading chain file {arg}"))?;
                let file: chain::ChainFile = serde_json::from_str(&text)?;
                file.build()?
            }
            _ => {
                let size: usize = arg.parse().with_context(|| format!("bad size {arg:?}"))?;
                let spec = match kind {
                    "cycle" => ChainSpec::Cycle { n: size, laziness: self.lazy },
                    "torus2d" => ChainSpec::Torus2d { side: size, laziness: self.lazy },
                    "hypercube" => ChainSpec::Hypercube { dim: size, laziness: self.lazy },
                    "complete" => ChainSpec::Complete { n: size, self_loops: self.self_loops },
                    other => bail!("unknown chain kind {other:?}"),
                };
                spec.build()?
            }
        };
        Ok(chain)
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BuildArgs {
    #[command(flatten)]
    spec: ChainArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SpectralArgs {
    #[command(flatten)]
    spec: ChainArgs,
    /// Demand the full spectrum (errors on non-reversible chains).
    #[arg(long, default_value_t = false)]
    full_spectrum: bool,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HittingArgs {
    #[command(flatten)]
    spec: ChainArgs,
    /// Monte Carlo estimate of one first-passage time instead of the dense solve.
    #[arg(long, default_value_t = false)]
    mc: bool,
    #[arg(long, default_value_t = 0)]
    from: usize,
    #[arg(long, default_value_t = 0)]
    to: usize,
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetricsArgs {
    #[command(flatten)]
    spec: ChainArgs,
    #[arg(long, default_value_t = 100)]
    tmax: u64,
    /// Fixed start state; worst-case over starts when omitted.
    #[arg(long)]
    start: Option<usize>,
    /// Emit mixing times instead of the per-t curve.
    #[arg(long, default_value_t = false)]
    mixing_times: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
enum CoverageCmd {
    /// Exact subset-DP law of (position, visited set) at time t.
    Exact(CoverageExactArgs),
    /// Monte Carlo coverage samples over a time grid.
    Mc(CoverageMcArgs),
    /// Minimal t with E[theta^|S_t|] <= 1 + delta.
    Tstar(CoverageTstarArgs),
    /// Instance check of the uncovered-set MGF bound at t'.
    KeyTheorem(KeyTheoremArgs),
    /// Threshold-time ladder against |X|(gamma + T_rel + log|X|).
    Explorer(ExplorerArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoverageExactArgs {
    #[command(flatten)]
    spec: ChainArgs,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoverageMcArgs {
    #[command(flatten)]
    spec: ChainArgs,
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Comma-separated sorted times, e.g. 2,5,10,20.
    #[arg(long)]
    t_grid: String,
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    gamma: u32,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoverageTstarArgs {
    #[command(flatten)]
    spec: ChainArgs,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    gamma: u32,
    /// Force Monte Carlo search (default: exact within the DP caps).
    #[arg(long, default_value_t = false)]
    mc: bool,
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1 << 20)]
    horizon: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KeyTheoremArgs {
    #[command(flatten)]
    spec: ChainArgs,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Universal constant in t' (default 96 = 6*16).
    #[arg(long, default_value_t = 96.0)]
    c: f64,
    #[arg(long, default_value_t = 20_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ExplorerArgs {
    /// cycle | hypercube | complete | torus2d
    #[arg(long)]
    family: String,
    /// Size range lo..hi (inclusive).
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 0.0)]
    lazy: f64,
    #[arg(long, default_value_t = true)]
    self_loops: bool,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    #[arg(long, default_value_t = 1)]
    gamma: u32,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 20_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0xF00D)]
    seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LamplighterArgs {
    /// Base chain (same syntax as --chain).
    #[arg(long)]
    base: String,
    #[arg(long, default_value_t = 0.0)]
    lazy: f64,
    #[arg(long, default_value_t = false)]
    self_loops: bool,
    #[arg(long, default_value_t = 2)]
    m: u64,
    /// both | pre | post (randomize-both-endpoints / randomize-then-move /
    /// move-then-randomize).
    #[arg(long, default_value = "both")]
    convention: String,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long, default_value_t = 40)]
    tmax: u64,
    /// Compute through the explicitly built wreath chain instead of the
    /// reduction (tiny bases only).
    #[arg(long, default_value_t = false)]
    explicit: bool,
    /// Emit wreath mixing times instead of the per-t curve.
    #[arg(long, default_value_t = false)]
    mixing_times: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
enum VerifyCmd {
    /// Exact inequality suite over the default chain set.
    InequalitySuite(InequalitySuiteArgs),
    /// Wreath L2 mixing-time scaling band over a size ladder.
    Scaling(ScalingArgs),
    /// m-lamp cycle metric separation table.
    Separation(SeparationArgs),
    /// 2-d torus hitting/cover/entropy trend table.
    Torus(TorusArgs),
    /// Uncovered-set MGF bound instance checks over a ladder.
    KeyTheorem(KeyTheoremLadderArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InequalitySuiteArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    tmax: u64,
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScalingArgs {
    /// hypercube | complete | cycle
    #[arg(long, default_value = "hypercube")]
    family: String,
    /// Size range lo..hi (inclusive), e.g. 3..8.
    #[arg(long, default_value = "3..8")]
    sizes: String,
    #[arg(long, default_value_t = 0.5)]
    lazy: f64,
    #[arg(long, default_value_t = 2)]
    m: u64,
    #[arg(long, default_value_t = 20_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0x7EAA)]
    seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SeparationArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Comma-separated ascending alphabet sizes.
    #[arg(long, default_value = "2,4,16,256")]
    m_list: String,
    #[arg(long, default_value_t = 0.5)]
    lazy: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TorusArgs {
    /// Comma-separated side lengths.
    #[arg(long, default_value = "3,4")]
    sides: String,
    #[arg(long, default_value_t = 2)]
    m: u64,
    #[arg(long, default_value_t = 20_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0x700105)]
    seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KeyTheoremLadderArgs {
    /// complete | hypercube
    #[arg(long, default_value = "complete")]
    family: String,
    #[arg(long, default_value = "4..10")]
    sizes: String,
    #[arg(long, default_value_t = 0.5)]
    lazy: f64,
    #[arg(long, default_value_t = 20_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

fn parse_range(s: &str) -> anyhow::Result<Vec<usize>> {
    let (lo, hi) = s
        .split_once("..")
        .with_context(|| format!("expected lo..hi, got {s:?}"))?;
    let lo: usize = lo.trim().parse()?;
    let hi: usize = hi.trim().parse()?;
    if hi < lo {
        bail!("empty range {s:?}");
    }
    Ok((lo..=hi).collect())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(Into::into))
        .collect()
}

struct Output {
    out: Option<PathBuf>,
    csv: bool,
}

impl Output {
    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => {
                let mut f = std::fs::File::create(path)?;
                writeln!(f, "{text}")?;
            }
            None => println!("{text}"),
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        self.emit(&serde_json::to_string_pretty(value)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    let command = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).context("parsing config")?
        }
        None => cli.command,
    };
    let output = Output { out: cli.out, csv: cli.csv };
    dispatch(command, &output)
}

fn dispatch(command: Command, output: &Output) -> anyhow::Result<bool> {
    match command {
        Command::Build(args) => {
            let chain = args.spec.build()?;
            output.emit_json(&chain::ChainFile::from_chain(&chain))?;
            Ok(true)
        }
        Command::Spectral(args) => {
            let chain = args.spec.build()?;
            let mode = if args.full_spectrum {
                spectral::SpectrumMode::FullSpectrum
            } else {
                spectral::SpectrumMode::Auto
            };
            let summary = spectral::analyze_with_mode(&chain, mode)?;
            output.emit_json(&summary)?;
            Ok(true)
        }
        Command::Hitting(args) => {
            let chain = args.spec.build()?;
            if args.mc {
                let est = passage::mc_hitting_estimate(
                    &chain,
                    args.from,
                    args.to,
                    args.replicates,
                    args.seed,
                )?;
                output.emit_json(&est)?;
            } else {
                let summary = passage::hitting_times(&chain)?;
                output.emit_json(&summary)?;
            }
            Ok(true)
        }
        Command::Metrics(args) => {
            let chain = args.spec.build()?;
            if args.mixing_times {
                let times = metrics::mixing_times_default(&chain)?;
                output.emit_json(&times)?;
                return Ok(true);
            }
            let profiles = metric_curve(&chain, args.start, args.tmax)?;
            if output.csv {
                output.emit(&profiles_csv(&profiles))?;
            } else {
                output.emit_json(&profiles)?;
            }
            Ok(true)
        }
        Command::Coverage(cmd) => dispatch_coverage(cmd, output),
        Command::Lamplighter(args) => dispatch_lamplighter(args, output),
        Command::Verify(cmd) => dispatch_verify(cmd, output),
    }
}

fn metric_curve(
    chain: &MarkovChain,
    start: Option<usize>,
    tmax: u64,
) -> anyhow::Result<Vec<metrics::DistanceProfile>> {
    let mut out = Vec::with_capacity(tmax as usize + 1);
    match start {
        Some(x) => {
            let mut dist = mixlab_core::DistributionVector::point(chain.n_states(), x)?;
            for _ in 0..=tmax {
                out.push(metrics::distances_at_dist(chain, &dist, 0)?);
                dist = mixlab_core::evolve(chain, &dist, 1)?;
            }
        }
        None => {
            let mut curve = metrics::WorstCaseCurve::new(chain)?;
            for _ in 0..=tmax {
                out.push(curve.profile());
                curve.step();
            }
        }
    }
    Ok(out)
}

fn profiles_csv(profiles: &[metrics::DistanceProfile]) -> String {
    let mut s = String::from("t,tv,l2,sep,entropy");
    for p in profiles {
        s.push_str(&format!("\n{},{},{},{},{}", p.time, p.tv, p.l2, p.sep, p.entropy));
    }
    s
}

fn dispatch_coverage(cmd: CoverageCmd, output: &Output) -> anyhow::Result<bool> {
    match cmd {
        CoverageCmd::Exact(args) => {
            let chain = args.spec.build()?;
            let profile = coverage::exact_coverage(
                &chain,
                &coverage::StartDist::Point(args.start),
                args.t,
            )?;
            let estimates = coverage::theta_mgf(&profile, args.theta)?;
            #[derive(Serialize)]
            struct ExactOut {
                t: u64,
                theta: f64,
                mgf: f64,
                s_marginal: Vec<f64>,
            }
            let CoverageProfile::Exact(dp) = &profile else { unreachable!() };
            output.emit_json(&ExactOut {
                t: args.t,
                theta: args.theta,
                mgf: estimates[0].value,
                s_marginal: dp.s_marginal(),
            })?;
            Ok(true)
        }
        CoverageCmd::Mc(args) => {
            let chain = args.spec.build()?;
            let grid: Vec<u64> = parse_list(&args.t_grid)?;
            let (profile, stats) = coverage::mc_coverage(
                &chain,
                args.start,
                &grid,
                args.replicates,
                args.seed,
                args.gamma,
            )?;
            let estimates = coverage::theta_mgf(&profile, args.theta)?;
            if output.csv {
                let mut s = String::from("t,E_theta_mgf,ci_lo,ci_hi,mode");
                for e in &estimates {
                    let (lo, hi) = e.ci.unwrap_or((e.value, e.value));
                    s.push_str(&format!("\n{},{},{},{},mc", e.t, e.value, lo, hi));
                }
                output.emit(&s)?;
            } else {
                #[derive(Serialize)]
                struct McOut<'a> {
                    estimates: &'a [coverage::MgfEstimate],
                    occupancy: &'a [coverage::OccupancyStats],
                }
                output.emit_json(&McOut { estimates: &estimates, occupancy: &stats })?;
            }
            Ok(true)
        }
        CoverageCmd::Tstar(args) => {
            let chain = args.spec.build()?;
            let exact_feasible = !args.mc
                && ((args.gamma <= 1 && chain.n_states() <= coverage::SUBSET_DP_CAP)
                    || (args.gamma >= 2 && chain.n_states() <= coverage::COUNT_DP_CAP));
            let mode = if exact_feasible {
                SearchMode::Exact { horizon: args.horizon }
            } else {
                SearchMode::Mc {
                    replicates: args.replicates,
                    seed: args.seed,
                    horizon: args.horizon,
                }
            };
            let t = coverage::find_t_star(
                &chain, args.start, args.theta, args.delta, args.gamma, mode,
            )?;
            output.emit_json(&t)?;
            Ok(true)
        }
        CoverageCmd::KeyTheorem(args) => {
            let chain = args.spec.build()?;
            let params = KeyTheoremParams {
                theta: args.theta,
                a: args.a,
                b: args.b,
                c: args.c,
                c1: None,
            };
            let cfg = KeyTheoremConfig { replicates: args.replicates, seed: args.seed };
            let report = coverage::verify_key_theorem(&chain, &params, &cfg)?;
            let pass = report.pass;
            output.emit_json(&report)?;
            Ok(pass)
        }
        CoverageCmd::Explorer(args) => {
            let sizes = parse_range(&args.sizes)?;
            let family: Vec<ChainSpec> = sizes
                .iter()
                .map(|&size| match args.family.as_str() {
                    "cycle" => Ok(ChainSpec::Cycle { n: size, laziness: args.lazy }),
                    "hypercube" => Ok(ChainSpec::Hypercube { dim: size, laziness: args.lazy }),
                    "complete" => {
                        Ok(ChainSpec::Complete { n: size, self_loops: args.self_loops })
                    }
                    "torus2d" => Ok(ChainSpec::Torus2d { side: size, laziness: args.lazy }),
                    other => bail!("unknown family {other:?}"),
                })
                .collect::<anyhow::Result<_>>()?;
            let cfg = coverage::ExplorerConfig {
                replicates: args.replicates,
                seed: args.seed,
                horizon: 1 << 22,
            };
            let table =
                coverage::conjecture_explorer(&family, args.theta, args.gamma, args.delta, &cfg)?;
            if output.csv {
                let mut s = String::from("n,T_rel,H,F_measured,ratio");
                for r in &table.rows {
                    s.push_str(&format!(
                        "\n{},{},{},{},{}",
                        r.n, r.t_rel, r.max_hitting, r.f_measured, r.ratio
                    ));
                }
                output.emit(&s)?;
            } else {
                output.emit_json(&table)?;
            }
            Ok(true)
        }
    }
}

fn dispatch_lamplighter(args: LamplighterArgs, output: &Output) -> anyhow::Result<bool> {
    let base = ChainArgs {
        chain: args.base.clone(),
        lazy: args.lazy,
        self_loops: args.self_loops,
    }
    .build()?;
    let convention = match args.convention.as_str() {
        "both" => RandomizeConvention::BothEndpoints,
        "pre" => RandomizeConvention::RandomizeThenMove,
        "post" => RandomizeConvention::MoveThenRandomize,
        other => bail!("unknown convention {other:?} (both | pre | post)"),
    };
    let spec = LampSpec::new(args.m)?.with_convention(convention);

    if args.mixing_times {
        let times = lamplighter::wreath_mixing_times(
            &base,
            &spec,
            args.start,
            metrics::default_epsilons(),
            lamplighter::WREATH_HORIZON,
        )?;
        output.emit_json(&times)?;
        return Ok(true);
    }

    let profiles: Vec<metrics::DistanceProfile> = if args.explicit {
        let wreath = lamplighter::build_wreath(&base, &spec)?;
        let start = args.start;
        (0..=args.tmax)
            .map(|t| Ok(metrics::distances_at(wreath.explicit(), start, t)?))
            .collect::<anyhow::Result<_>>()?
    } else {
        let mut reduced = lamplighter::ReducedWreath::new(&base, &spec, args.start)?;
        let mut out = Vec::with_capacity(args.tmax as usize + 1);
        for _ in 0..=args.tmax {
            out.push(reduced.profile(args.m));
            reduced.step();
        }
        out
    };
    if output.csv {
        output.emit(&profiles_csv(&profiles))?;
    } else {
        output.emit_json(&profiles)?;
    }
    Ok(true)
}

fn dispatch_verify(cmd: VerifyCmd, output: &Output) -> anyhow::Result<bool> {
    let report = match cmd {
        VerifyCmd::InequalitySuite(args) => {
            let specs = verify::default_chain_set(args.seed);
            let cfg = InequalitySuiteConfig {
                t_max: args.tmax,
                seed: args.seed,
                excursion_replicates: args.replicates,
                ..Default::default()
            };
            verify::run_inequality_suite(&specs, &cfg)?
        }
        VerifyCmd::Scaling(args) => {
            let family = match args.family.as_str() {
                "hypercube" => ScalingFamily::Hypercube,
                "complete" => ScalingFamily::Complete,
                "cycle" => ScalingFamily::Cycle,
                other => bail!("unknown family {other:?}"),
            };
            let sizes = parse_range(&args.sizes)?;
            let cfg = ScalingConfig {
                laziness: args.lazy,
                m: args.m,
                replicates: args.replicates,
                seed: args.seed,
                ..Default::default()
            };
            verify::run_theorem1_scaling(family, &sizes, &cfg)?
        }
        VerifyCmd::Separation(args) => {
            let m_list: Vec<u64> = parse_list(&args.m_list)?;
            let cfg = SeparationConfig { laziness: args.lazy, ..Default::default() };
            verify::run_example_separation(args.n, &m_list, &cfg)?
        }
        VerifyCmd::Torus(args) => {
            let sides: Vec<usize> = parse_list(&args.sides)?;
            let cfg = TorusConfig {
                m: args.m,
                replicates: args.replicates,
                seed: args.seed,
                ..Default::default()
            };
            verify::run_torus_entropy_remark(&sides, &cfg)?
        }
        VerifyCmd::KeyTheorem(args) => {
            let sizes = parse_range(&args.sizes)?;
            let mut rows = Vec::new();
            let mut all_pass = true;
            for &size in &sizes {
                let spec = match args.family.as_str() {
                    "complete" => ChainSpec::Complete { n: size, self_loops: true },
                    "hypercube" => ChainSpec::Hypercube { dim: size, laziness: args.lazy },
                    other => bail!("unknown family {other:?}"),
                };
                let chain = spec.build()?;
                let report = coverage::verify_key_theorem(
                    &chain,
                    &KeyTheoremParams::default(),
                    &KeyTheoremConfig { replicates: args.replicates, seed: args.seed },
                )?;
                all_pass &= report.pass;
                rows.push(report);
            }
            output.emit_json(&rows)?;
            return Ok(all_pass);
        }
    };

    // Golden fixtures: freeze on first verified run, compare afterwards.
    if let Some(store) = GoldenStore::from_env() {
        match store.compare_or_freeze(&report) {
            Ok(GoldenOutcome::Mismatch) => {
                eprintln!("golden mismatch for {}", report.id);
                output.emit_json(&report)?;
                return Ok(false);
            }
            Ok(_) => {}
            Err(err) => eprintln!("golden store unavailable: {err}"),
        }
    }
    let passed = report.passed;
    output.emit_json(&report)?;
    Ok(passed)
}
