use clap::{Args, Parser, Subcommand, ValueEnum};
use qrd::channels::{alpha_sweep_channel, channel_divergence, channel_dmax, ChannelDivergenceKind, SweepKind};
use qrd::divergences::{
    d_alpha_z, d_alpha_zero, d_hat_alpha, d_max, umegaki, DivergenceParams, DivergenceValue, ZParam,
};
use qrd::families::FamilySpec;
use qrd::lab::config::{Digest, ExperimentConfig, OutputFormat};
use qrd::lab::io::{parse_json, read_channel, read_state, sweep_csv};
use qrd::lab::{exit_code, run_suite, Suite, EXIT_OK, EXIT_VERIFY_FAILED};
use qrd::measured::{measured_renyi_lower, test_measured};
use qrd::{Error, ExtendedReal, HermitianOperator, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

const AFTER_HELP: &str = "\
Matrices are JSON files {\"dim\": d, \"re\": [...], \"im\": [...]} in row-major order.
+infinity is written as the string \"inf\" in JSON and as an empty cell in CSV.
QRD_THREADS caps the number of worker threads.

Exit codes: 0 success, 1 verification failure, 2 malformed input,
3 parameter outside its domain, 4 divergence kind not allowed for channels.";

#[derive(Parser)]
#[command(name = "qrd", version, about = "Quantum Renyi divergences", after_help = AFTER_HELP)]
struct Cli {
    /// JSON experiment config; fields present override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print wall-clock time to stderr; stdout is unchanged.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one divergence on a pair of operators.
    Eval(EvalArgs),
    /// Tabulate D_{alpha,z} over an alpha grid as CSV.
    Sweep(SweepArgs),
    /// Channel divergences over an alpha grid plus the channel max-divergence.
    Channel(ChannelArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct PairArgs {
    #[arg(long, requires = "sigma", conflicts_with = "family")]
    rho: Option<PathBuf>,
    #[arg(long, requires = "rho")]
    sigma: Option<PathBuf>,
    /// Generate the pair from a family spec instead, e.g. '{"family":"pure_family","c":1,"eps":0.25}'.
    #[arg(long)]
    family: Option<String>,
}

impl PairArgs {
    fn load(&self) -> Result<(HermitianOperator, HermitianOperator)> {
        match (&self.rho, &self.sigma, &self.family) {
            (Some(r), Some(s), None) => Ok((read_state(r)?, read_state(s)?)),
            (None, None, Some(f)) => parse_json::<FamilySpec>(f, "family")?.generate(),
            _ => Err(Error::Malformed("give --rho and --sigma, or --family".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalKind {
    Daz,
    Dmax,
    Umegaki,
    Dhat,
    Dzero,
    Dinf,
    Measured,
    Test,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    kind: EvalKind,
    #[arg(long)]
    alpha: Option<f64>,
    /// A positive number or "inf".
    #[arg(long)]
    z: Option<String>,
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ZMode {
    Fixed,
    Alpha,
    AlphaHalf,
    AlphaMinus1OverKappa,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Comma-separated alpha grid.
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    #[arg(long, value_enum, default_value = "fixed")]
    z_mode: ZMode,
    /// z for --z-mode fixed.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelKind {
    Sandwiched,
    Petz,
    Measured,
    Umegaki,
    Dmax,
    /// D_{alpha,z} with the z given by --z.
    Renyi,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long)]
    n1: PathBuf,
    #[arg(long)]
    n2: PathBuf,
    #[arg(long, value_enum)]
    kind: ChannelKind,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write every per-case record to this JSON file.
    #[arg(long)]
    records: Option<PathBuf>,
}

struct Output {
    text: String,
    code: i32,
}

fn parse_z(s: &str) -> Result<ZParam> {
    match s {
        "inf" => Ok(ZParam::Infinity),
        "0" => Ok(ZParam::ZeroLimit),
        _ => s.parse::<f64>().map(ZParam::Finite).map_err(|_| Error::BadParams(format!("bad z `{s}`"))),
    }
}

fn z_value(z: ZParam) -> ExtendedReal {
    match z {
        ZParam::Finite(z) => ExtendedReal::Finite(z),
        ZParam::Infinity => ExtendedReal::PosInf,
        ZParam::ZeroLimit => ExtendedReal::Finite(0.0),
    }
}

fn need<T>(x: Option<T>, what: &str) -> Result<T> {
    x.ok_or_else(|| Error::BadParams(format!("--{what} is required here")))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn pair_digest(rho: &HermitianOperator, sigma: &HermitianOperator) -> String {
    format!("{:016x}", Digest::default().matrix(rho.matrix()).matrix(sigma.matrix()).finish())
}

fn eval(args: &EvalArgs, cfg: &ExperimentConfig) -> Result<Output> {
    let alpha = cfg.alpha.as_ref().and_then(|a| a.first().copied()).or(args.alpha);
    let z = match (cfg.z.as_ref().and_then(|z| z.first().copied()), &args.z) {
        (Some(z), _) => Some(ZParam::Finite(z)),
        (None, Some(s)) => Some(parse_z(s)?),
        (None, None) => None,
    };
    let restarts = cfg.restarts.unwrap_or(args.restarts);
    let (rho, sigma) = args.pair.load()?;
    let mut meta = serde_json::Map::new();
    let from_value = |v: DivergenceValue, meta: &mut serde_json::Map<String, Value>| {
        if !v.notes.is_empty() {
            meta.insert("notes".into(), json!(v.notes));
        }
        v.d
    };
    let value = match args.kind {
        EvalKind::Daz => {
            let params = DivergenceParams::new(need(alpha, "alpha")?, need(z, "z")?)?;
            from_value(d_alpha_z(&rho, &sigma, params)?, &mut meta)
        }
        EvalKind::Dinf => from_value(
            d_alpha_z(&rho, &sigma, DivergenceParams::new(need(alpha, "alpha")?, ZParam::Infinity)?)?,
            &mut meta,
        ),
        EvalKind::Dzero => from_value(d_alpha_zero(&rho, &sigma, need(alpha, "alpha")?)?, &mut meta),
        EvalKind::Dhat => from_value(d_hat_alpha(&rho, &sigma, need(alpha, "alpha")?)?, &mut meta),
        EvalKind::Dmax => d_max(&rho, &sigma)?,
        EvalKind::Umegaki => umegaki(&rho, &sigma)?,
        EvalKind::Measured | EvalKind::Test => {
            let seed = cfg.require_seed(args.seed)?;
            let alpha = need(alpha, "alpha")?;
            let res = match args.kind {
                EvalKind::Measured => measured_renyi_lower(&rho, &sigma, alpha, restarts, seed)?,
                _ => test_measured(&rho, &sigma, alpha, restarts, seed)?,
            };
            meta.insert("seed".into(), json!(seed));
            meta.insert("restarts_used".into(), json!(res.restarts_used));
            meta.insert("converged".into(), json!(res.converged));
            res.value
        }
    };
    let kind = args.kind.to_possible_value().expect("named").get_name().to_string();
    meta.insert("kind".into(), json!(kind));
    if let Some(a) = alpha {
        meta.insert("alpha".into(), json!(a));
    }
    if let (EvalKind::Daz, Some(z)) = (args.kind, z) {
        meta.insert("z".into(), json!(z_value(z)));
    }
    meta.insert("inputs_digest".into(), json!(pair_digest(&rho, &sigma)));
    Ok(Output { text: pretty(&json!({ "value": value, "metadata": meta })), code: EXIT_OK })
}

fn sweep(args: &SweepArgs, cfg: &ExperimentConfig) -> Result<Output> {
    let alphas = cfg.alpha.clone().unwrap_or_else(|| args.alphas.clone());
    let fixed = cfg.z.as_ref().and_then(|z| z.first().copied()).or(args.z);
    let (rho, sigma) = args.pair.load()?;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let z = match args.z_mode {
            ZMode::Fixed => need(fixed, "z")?,
            ZMode::Alpha => alpha,
            ZMode::AlphaHalf => alpha / 2.0,
            ZMode::AlphaMinus1OverKappa => (alpha - 1.0) / args.kappa,
        };
        let v = d_alpha_z(&rho, &sigma, DivergenceParams::finite(alpha, z)?)?;
        rows.push((alpha, ExtendedReal::Finite(z), v.d));
    }
    Ok(Output { text: sweep_csv(&rows)?, code: EXIT_OK })
}

fn channel(args: &ChannelArgs, cfg: &ExperimentConfig) -> Result<Output> {
    let n1 = read_channel(&args.n1)?;
    let n2 = read_channel(&args.n2)?;
    let alphas = cfg.alpha.clone().unwrap_or_else(|| args.alphas.clone());
    let restarts = cfg.restarts.unwrap_or(args.restarts);
    let sweep_kind = match args.kind {
        ChannelKind::Sandwiched => Some(SweepKind::Sandwiched),
        ChannelKind::Petz => Some(SweepKind::Petz),
        ChannelKind::Measured => Some(SweepKind::Measured),
        _ => None,
    };
    let kinds: Vec<(Option<f64>, ChannelDivergenceKind)> = match args.kind {
        ChannelKind::Umegaki => vec![(None, ChannelDivergenceKind::Umegaki)],
        ChannelKind::Dmax => vec![(None, ChannelDivergenceKind::Dmax)],
        ChannelKind::Renyi => {
            let z = parse_z(&need(args.z.clone(), "z")?)?;
            alphas.iter().map(|&alpha| (Some(alpha), ChannelDivergenceKind::Renyi { alpha, z })).collect()
        }
        _ => alphas.iter().map(|&a| (Some(a), sweep_kind.expect("sweep kind").at(a))).collect(),
    };
    if kinds.is_empty() {
        return Err(Error::BadParams("--alphas is required for this kind".into()));
    }
    // whitelist first, so a bad kind fails before any optimization
    for (_, k) in &kinds {
        k.check_whitelisted()?;
    }
    let seed = match args.kind {
        ChannelKind::Dmax => cfg.seed.or(args.seed).unwrap_or(0),
        _ => cfg.require_seed(args.seed)?,
    };
    let dmax = channel_dmax(&n1, &n2)?;
    let mut monotone = None;
    let values: Vec<(ExtendedReal, usize, bool)> = match sweep_kind {
        Some(sk) => {
            let sw = alpha_sweep_channel(&n1, &n2, sk, &alphas, restarts, seed)?;
            monotone = Some(sw.monotone);
            sw.points.iter().map(|p| (p.1, restarts, true)).collect()
        }
        None => kinds
            .iter()
            .map(|(_, k)| {
                channel_divergence(&n1, &n2, *k, restarts, seed).map(|r| (r.value, r.restarts_used, r.converged))
            })
            .collect::<Result<_>>()?,
    };
    let mut records = Vec::with_capacity(kinds.len());
    let mut dominated = true;
    for ((alpha, kind), (value, used, converged)) in kinds.iter().zip(values) {
        let below = value.le_within(dmax, 1e-9);
        dominated &= below;
        let mut rec = json!({
            "kind": kind.to_string(),
            "value": value,
            "restarts_used": used,
            "converged": converged,
            "below_channel_dmax": below,
        });
        if let Some(a) = alpha {
            rec["alpha"] = json!(a);
        }
        records.push(rec);
    }
    let mut out = json!({ "records": records, "channel_dmax": dmax, "dominated": dominated, "seed": seed });
    if let Some(m) = monotone {
        out["monotone"] = json!(m);
    }
    Ok(Output { text: pretty(&out), code: if dominated { EXIT_OK } else { EXIT_VERIFY_FAILED } })
}

fn verify(args: &VerifyArgs, cfg: &ExperimentConfig) -> Result<Output> {
    let name = cfg
        .suite
        .clone()
        .or_else(|| args.suite.clone())
        .ok_or_else(|| Error::BadParams("--suite is required".into()))?;
    let suite: Suite = name.parse()?;
    let trials = cfg.trials.unwrap_or(args.trials);
    if trials == 0 {
        return Err(Error::BadParams("trials must be positive".into()));
    }
    let seed = cfg.require_seed(args.seed)?;
    let report = run_suite(suite, trials, seed);
    if let Some(path) = &args.records {
        qrd::lab::io::write_json(path, &report.records)?;
    }
    let code = if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Ok(Output { text: pretty(&report), code })
}

fn init_threads() {
    if let Some(n) = std::env::var("QRD_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Malformed(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)
        }
    }
}

fn emit(out: &Output, cfg: &ExperimentConfig, elapsed: Option<f64>) -> Result<()> {
    let mut text = out.text.clone();
    if let Some(ms) = elapsed {
        // timing goes to stderr so stdout stays comparable across runs
        eprintln!("wall_time_ms: {ms:.3}");
    }
    if let Some(spec) = &cfg.output {
        if spec.format == OutputFormat::Csv && !text.starts_with("alpha,") {
            return Err(Error::BadParams("csv output is only available for sweep".into()));
        }
        if let Some(path) = &spec.path {
            return std::fs::write(path, std::mem::take(&mut text))
                .map_err(|e| Error::Malformed(format!("{path}: {e}")));
        }
    }
    print!("{text}");
    Ok(())
}

fn run(cli: &Cli) -> Result<i32> {
    let cfg = load_config(&cli.config)?;
    let start = Instant::now();
    let out = match &cli.cmd {
        Command::Eval(a) => eval(a, &cfg)?,
        Command::Sweep(a) => sweep(a, &cfg)?,
        Command::Channel(a) => channel(a, &cfg)?,
        Command::Verify(a) => verify(a, &cfg)?,
    };
    let elapsed = cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    emit(&out, &cfg, elapsed)?;
    Ok(out.code)
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
