//! Command-line front end: simulation, estimation, Monte Carlo tables and a
//! score-fit demo.

mod config;
mod seriesio;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fracadapt::adapt::{
    one_step_adaptive, one_step_parametric, wald_test, EstimationResult, ParamBlock, Restriction,
};
use fracadapt::families::family_by_name;
use fracadapt::initial::{initial_fit, GridSpec, InitialFit, InitialMethod};
use fracadapt::innovations::{InnovationDist, InnovationKind};
use fracadapt::mc::{run_tables, McConfig};
use fracadapt::model::{simulate, ModelSpec, Params};
use fracadapt::residuals::{power_columns, RegressionDesign};
use fracadapt::score::{fit_score, BasisConfig, PhiKind};

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "fracadapt",
    version,
    about = "Adaptive estimation of fractional time-series models with deterministic trends"
)]
struct Cli {
    /// Cap worker parallelism (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Optional key=value config file mirroring the flags; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a fractional series and write it to a text file
    Simulate(SimulateArgs),
    /// Estimate memory, short-memory and trend parameters from a series file
    Estimate(EstimateArgs),
    /// Monte Carlo relative-efficiency tables
    Mc(McArgs),
    /// Fit the series score on a synthetic sample and print its terms
    ScoreDemo(ScoreDemoArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Memory order xi
    #[arg(long)]
    xi: Option<f64>,
    /// AR coefficients, comma separated
    #[arg(long)]
    ar: Option<String>,
    /// MA coefficients, comma separated
    #[arg(long)]
    ma: Option<String>,
    /// Innovation-scale variance sigma^2
    #[arg(long)]
    sigma2: Option<f64>,
    /// Innovation distribution: gaussian|mixsym|mixasym|laplace|t5
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trend exponents tau_1,..,tau_q (columns t^tau added to the series)
    #[arg(long)]
    trend: Option<String>,
    /// Trend coefficients matching --trend
    #[arg(long)]
    theta2: Option<String>,
    /// Output series file
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EstimateArgs {
    /// Input series file
    #[arg(long = "in")]
    input: PathBuf,
    /// Model orders as farima:p,q
    #[arg(long)]
    model: Option<String>,
    /// Trend exponents tau_1,..,tau_q
    #[arg(long)]
    trend: Option<String>,
    /// Basis map: id|bounded
    #[arg(long)]
    phi: Option<String>,
    /// Number of series-score terms
    #[arg(long = "L")]
    l: Option<usize>,
    /// Initial estimator: css|whittle
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    grid_lo: Option<f64>,
    #[arg(long)]
    grid_hi: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Whittle frequency skip factor
    #[arg(long)]
    freq_skip: Option<usize>,
    /// Use the fully parametric one-step with this family:
    /// gaussian|laplace|t
    #[arg(long)]
    parametric: Option<String>,
    /// Wald test of the memory order against this value
    #[arg(long)]
    wald_memory: Option<f64>,
    /// One-sided Wald alternative (memory greater than the tested value)
    #[arg(long, default_value_t = false)]
    one_sided: bool,
    /// Wald test that all trend coefficients are zero
    #[arg(long, default_value_t = false)]
    wald_trend: bool,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(clap::Args)]
struct McArgs {
    /// Preset 1..5 choosing the innovation distribution
    /// (1 gaussian, 2 mixsym, 3 mixasym, 4 laplace, 5 t5)
    #[arg(long)]
    table: Option<u8>,
    /// Innovation distribution (overridden by --table)
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Memory orders, comma separated
    #[arg(long)]
    xi0: Option<String>,
    /// Basis maps, comma separated subset of id,bounded
    #[arg(long)]
    phi: Option<String>,
    /// Series-score orders, comma separated
    #[arg(long = "L")]
    l: Option<String>,
    /// Initial estimator: css|whittle
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    trim_lo: Option<f64>,
    #[arg(long)]
    trim_hi: Option<f64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    freq_skip: Option<usize>,
    /// Write the CSV table to this path
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(clap::Args)]
struct ScoreDemoArgs {
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Basis map: id|bounded
    #[arg(long)]
    phi: Option<String>,
    /// Fit orders 1..=max
    #[arg(long = "max-L")]
    max_l: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            other => bail!("unknown format '{other}' (expected text|csv)"),
        }
    }
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("'{s}' is not a number"))
        })
        .collect()
}

fn parse_model(raw: &str) -> Result<(usize, usize)> {
    let body = raw
        .strip_prefix("farima:")
        .ok_or_else(|| anyhow!("model must look like farima:p,q, got '{raw}'"))?;
    let (p, q) = body
        .split_once(',')
        .ok_or_else(|| anyhow!("model must look like farima:p,q, got '{raw}'"))?;
    Ok((p.trim().parse()?, q.trim().parse()?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // ignore the error when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, &file_cfg),
        Command::Estimate(args) => cmd_estimate(args, &file_cfg),
        Command::Mc(args) => cmd_mc(args, &file_cfg),
        Command::ScoreDemo(args) => cmd_score_demo(args, &file_cfg),
    }
}

fn cmd_simulate(args: SimulateArgs, cfg: &FileConfig) -> Result<()> {
    let xi = cfg
        .resolve_opt(&args.xi, "xi")?
        .ok_or_else(|| anyhow!("--xi is required"))?;
    let ar = parse_f64_list(&cfg.resolve(&args.ar, "ar", String::new())?)?;
    let ma = parse_f64_list(&cfg.resolve(&args.ma, "ma", String::new())?)?;
    let sigma2 = cfg.resolve(&args.sigma2, "sigma2", 1.0)?;
    let dist: InnovationKind = cfg.resolve(&args.dist, "dist", "gaussian".to_string())?.parse()?;
    let n = cfg.resolve(&args.n, "n", 256)?;
    let burn_in = cfg.resolve(&args.burn_in, "burn_in", 5000)?;
    let seed = cfg.resolve(&args.seed, "seed", 1)?;
    let trend = parse_f64_list(&cfg.resolve(&args.trend, "trend", String::new())?)?;
    let theta2 = parse_f64_list(&cfg.resolve(&args.theta2, "theta2", String::new())?)?;
    if trend.len() != theta2.len() {
        bail!("--trend and --theta2 must have the same length");
    }

    let spec = ModelSpec::new(ar, ma, trend.clone())?;
    let params = Params::new(xi, spec.short_params(), theta2.clone(), sigma2);
    params.validate(&spec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = InnovationDist::new(dist).sample(&mut rng, n + burn_in)?;
    let mut y = simulate(&params, &spec, n, &eps, burn_in)?;
    for (col, coef) in power_columns(&trend, n).iter().zip(&theta2) {
        for (yt, zt) in y.iter_mut().zip(col) {
            *yt += coef * zt;
        }
    }

    let header = format!(
        "fracadapt simulate: xi={xi} sigma2={sigma2} dist={dist} n={n} burn_in={burn_in} seed={seed}"
    );
    seriesio::write_series(&args.out, &y, &header)?;
    println!("wrote {n} observations to {}", args.out.display());
    Ok(())
}

struct EstimateSetup {
    spec: ModelSpec,
    design: RegressionDesign,
    init: InitialFit,
    grid: GridSpec,
}

/// Run the initial estimator, classifying the trend exponents at the fitted
/// memory order (a second pass drops exponents that turn out inestimable).
fn initial_with_design(
    y: &[f64],
    exponents: &[f64],
    orders: (usize, usize),
    method: InitialMethod,
    freq_skip: usize,
    grid: GridSpec,
) -> Result<EstimateSetup> {
    let spec = ModelSpec {
        ar: vec![0.0; orders.0],
        ma: vec![0.0; orders.1],
        regression_exponents: exponents.to_vec(),
    };
    let design = RegressionDesign::all_estimable(exponents)?;
    let init = initial_fit(method, y, &design, &spec, freq_skip, &grid)?;
    let classified = RegressionDesign::classify(exponents, init.params.memory)?;
    if classified.chi == design.chi {
        return Ok(EstimateSetup { spec, design, init, grid });
    }
    if !classified.t1.is_empty() || !classified.t2.is_empty() {
        eprintln!(
            "note: {} trend exponent(s) not estimable at memory {:.3}; refitting without them",
            classified.t1.len() + classified.t2.len(),
            init.params.memory
        );
    }
    let init = initial_fit(method, y, &classified, &spec, freq_skip, &grid)?;
    Ok(EstimateSetup { spec, design: classified, init, grid })
}

fn print_kv(format: OutputFormat, key: &str, value: &str) {
    match format {
        OutputFormat::Text => println!("{key} = {value}"),
        OutputFormat::Csv => println!("{key},{value}"),
    }
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn print_result(format: OutputFormat, label: &str, res: &EstimationResult, grid: &GridSpec) {
    let trimmed = res.params.memory.clamp(grid.lo, grid.hi);
    print_kv(format, &format!("{label}.memory"), &format!("{trimmed:.6}"));
    if trimmed != res.params.memory {
        print_kv(
            format,
            &format!("{label}.memory_untrimmed"),
            &format!("{:.6}", res.params.memory),
        );
    }
    if !res.params.short.is_empty() {
        print_kv(format, &format!("{label}.arma"), &vec_str(&res.params.short));
    }
    if !res.params.trend.is_empty() {
        print_kv(format, &format!("{label}.trend"), &vec_str(&res.params.trend));
    }
    let p1 = 1 + res.params.short.len();
    print_kv(
        format,
        &format!("{label}.memory_se"),
        &format!("{:.6}", res.cov_first[0].sqrt()),
    );
    for i in 0..p1 {
        let row: Vec<f64> = (0..p1).map(|j| res.cov_first[i * p1 + j]).collect();
        print_kv(format, &format!("{label}.cov1.row{i}"), &vec_str(&row));
    }
    let p2 = res.params.trend.len();
    for i in 0..p2 {
        let row: Vec<f64> = (0..p2).map(|j| res.cov_second[i * p2 + j]).collect();
        print_kv(format, &format!("{label}.cov2.row{i}"), &vec_str(&row));
    }
    if p2 > 0 {
        print_kv(format, &format!("{label}.trend_rates"), &vec_str(&res.trend_rates.diag));
    }
    print_kv(format, &format!("{label}.info"), &format!("{:.6}", res.info));
    if let Some(rc) = res.score_rcond {
        print_kv(format, &format!("{label}.score_rcond"), &format!("{rc:.3e}"));
    }
}

fn cmd_estimate(args: EstimateArgs, cfg: &FileConfig) -> Result<()> {
    let y = seriesio::read_series(&args.input)?;
    let orders = parse_model(&cfg.resolve(&args.model, "model", "farima:0,0".to_string())?)?;
    let trend = parse_f64_list(&cfg.resolve(&args.trend, "trend", String::new())?)?;
    let phi: PhiKind = cfg.resolve(&args.phi, "phi", "id".to_string())?.parse()?;
    let l = cfg.resolve(&args.l, "L", 1)?;
    let method: InitialMethod =
        cfg.resolve(&args.initial, "initial", "whittle".to_string())?.parse()?;
    let grid = GridSpec {
        lo: cfg.resolve(&args.grid_lo, "grid_lo", -0.4)?,
        hi: cfg.resolve(&args.grid_hi, "grid_hi", 1.75)?,
        step: cfg.resolve(&args.grid_step, "grid_step", 0.01)?,
    };
    let freq_skip = cfg.resolve(&args.freq_skip, "freq_skip", 2)?;
    let format = cfg.resolve(&args.format, "format", OutputFormat::Text)?;

    let setup = initial_with_design(&y, &trend, orders, method, freq_skip, grid)?;
    print_kv(format, "n", &y.len().to_string());
    print_kv(format, "initial.method", setup.init.method.name());
    print_kv(format, "initial.memory", &format!("{:.6}", setup.init.params.memory));
    if !setup.init.params.short.is_empty() {
        print_kv(format, "initial.arma", &vec_str(&setup.init.params.short));
    }
    if !setup.init.params.trend.is_empty() {
        print_kv(format, "initial.trend", &vec_str(&setup.init.params.trend));
    }
    print_kv(format, "initial.sigma2", &format!("{:.6}", setup.init.params.noise_var));
    print_kv(format, "initial.boundary_hit", &setup.init.hit_boundary.to_string());

    let result = match cfg.resolve_opt(&args.parametric, "parametric")? {
        Some(name) => {
            let family = family_by_name(&name)?;
            let res =
                one_step_parametric(&y, &setup.design, &setup.spec, &setup.init, family.as_ref())?;
            if !res.theta3.is_empty() {
                print_kv(format, "parametric.theta3", &vec_str(&res.theta3));
                print_kv(format, "parametric.theta3_cov", &vec_str(&res.cov_theta3));
            }
            print_kv(format, "parametric.family", &name);
            res.base
        }
        None => {
            let basis = BasisConfig::new(phi, l)?;
            let res = one_step_adaptive(&y, &setup.design, &setup.spec, &setup.init, basis)?;
            print_kv(format, "adaptive.phi", phi.name());
            print_kv(format, "adaptive.L", &l.to_string());
            res
        }
    };
    print_result(format, "onestep", &result, &setup.grid);

    if let Some(value) = cfg.resolve_opt(&args.wald_memory, "wald_memory")? {
        let p1 = 1 + result.params.short.len();
        let restriction = Restriction::coordinate(ParamBlock::MemoryArma, 0, p1, value);
        let w = wald_test(&result, &restriction, args.one_sided)?;
        print_kv(format, "wald.memory.statistic", &format!("{:.6}", w.statistic));
        print_kv(format, "wald.memory.p_value", &format!("{:.6}", w.p_value));
    }
    if args.wald_trend {
        let p2 = result.params.trend.len();
        if p2 == 0 {
            bail!("--wald-trend requires a trend block");
        }
        let contrasts: Vec<Vec<f64>> = (0..p2)
            .map(|i| {
                let mut row = vec![0.0; p2];
                row[i] = 1.0;
                row
            })
            .collect();
        let restriction =
            Restriction { block: ParamBlock::Trend, contrasts, values: vec![0.0; p2] };
        let w = wald_test(&result, &restriction, false)?;
        print_kv(format, "wald.trend.statistic", &format!("{:.6}", w.statistic));
        print_kv(format, "wald.trend.p_value", &format!("{:.6}", w.p_value));
    }
    Ok(())
}

fn cmd_mc(args: McArgs, cfg: &FileConfig) -> Result<()> {
    let dist: InnovationKind = match cfg.resolve_opt(&args.table, "table")? {
        Some(1) => InnovationKind::Gaussian,
        Some(2) => InnovationKind::MixtureSymmetric,
        Some(3) => InnovationKind::MixtureContaminated,
        Some(4) => InnovationKind::Laplace,
        Some(5) => InnovationKind::StudentT5,
        Some(k) => bail!("--table must be 1..5, got {k}"),
        None => cfg.resolve(&args.dist, "dist", "gaussian".to_string())?.parse()?,
    };
    let seed = cfg.resolve(&args.seed, "seed", 0)?;
    let mut mc = McConfig::table_defaults(dist, seed);
    mc.n = cfg.resolve(&args.n, "n", mc.n)?;
    mc.reps = cfg.resolve(&args.reps, "reps", mc.reps)?;
    if let Some(raw) = cfg.resolve_opt(&args.xi0, "xi0")? {
        mc.xi0_list = parse_f64_list(&raw)?;
    }
    if let Some(raw) = cfg.resolve_opt(&args.phi, "phi")? {
        mc.phi_kinds = raw
            .split(',')
            .map(|s| s.trim().parse::<PhiKind>().map_err(|e| anyhow!("{e}")))
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(raw) = cfg.resolve_opt(&args.l, "L")? {
        mc.l_list = raw
            .split(',')
            .map(|s| s.trim().parse::<usize>().context("bad L value"))
            .collect::<Result<Vec<_>>>()?;
    }
    mc.initial = cfg.resolve(&args.initial, "initial", "whittle".to_string())?.parse()?;
    mc.trim.0 = cfg.resolve(&args.trim_lo, "trim_lo", mc.trim.0)?;
    mc.trim.1 = cfg.resolve(&args.trim_hi, "trim_hi", mc.trim.1)?;
    mc.burn_in = cfg.resolve(&args.burn_in, "burn_in", mc.burn_in)?;
    mc.grid_step = cfg.resolve(&args.grid_step, "grid_step", mc.grid_step)?;
    mc.freq_skip = cfg.resolve(&args.freq_skip, "freq_skip", mc.freq_skip)?;
    let format = cfg.resolve(&args.format, "format", OutputFormat::Text)?;

    let table = run_tables(&mc)?;
    if let Some(path) = &args.out {
        std::fs::write(path, table.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote CSV table to {}", path.display());
    }
    match format {
        OutputFormat::Text => print!("{}", table.to_text()),
        OutputFormat::Csv => print!("{}", table.to_csv()),
    }
    Ok(())
}

fn cmd_score_demo(args: ScoreDemoArgs, cfg: &FileConfig) -> Result<()> {
    let dist_kind: InnovationKind =
        cfg.resolve(&args.dist, "dist", "gaussian".to_string())?.parse()?;
    let n = cfg.resolve(&args.n, "n", 100_000)?;
    let seed = cfg.resolve(&args.seed, "seed", 1)?;
    let phi: PhiKind = cfg.resolve(&args.phi, "phi", "id".to_string())?.parse()?;
    let max_l = cfg.resolve(&args.max_l, "max_L", 4)?;

    let dist = InnovationDist::new(dist_kind);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = dist.sample(&mut rng, n)?;
    println!(
        "score fit on {n} draws from {dist_kind}, phi = {} (true information J = {:.4})",
        phi.name(),
        dist.info()
    );
    for l in 1..=max_l {
        match fit_score(&h, BasisConfig::new(phi, l)?) {
            Ok(fit) => println!(
                "L = {l}: a = {}, J_L = {:.4}, rcond(W) = {:.2e}",
                vec_str(&fit.coeffs),
                fit.info,
                fit.rcond
            ),
            Err(e) => println!("L = {l}: {e}"),
        }
    }
    Ok(())
}
