//! Command-line runner. Every command loads an experiment file, calls the
//! library, and renders the result as a JSON summary plus CSV data files.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bfree::{bfree_density_exact, build_bfree, haar_regularity_report, hereditary_entropy_estimate};
use crate::configuration::{
    empirical_density, generate, is_continuity_point, is_maximal_density, pattern_frequency, pattern_prediction,
    sample_mirsky, sample_torus_points, torus_parameters, Configuration, TorusParameters,
};
use crate::descriptor::{ExperimentConfig, SCHEMA_VERSION};
use crate::diffraction::autocorr_spectrum;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::quotient::{mef_descriptor, quotient_scheme, verify_projection_identity};
use crate::scheme::{GCoord, Physical, Region, Scheme};

#[derive(Debug, Parser)]
#[command(name = "weakmodel", version, about = "Cut-and-project schemes and weak model sets")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment file (TOML).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Directory for summary.json and CSV outputs.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the experiment file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BfreeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated elements of B.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<u64>>,
    /// Number of elements of B to keep.
    #[arg(long)]
    pub truncate: Option<usize>,
    /// Report the exact density.
    #[arg(long)]
    pub density: bool,
    /// Count hereditary words of this length.
    #[arg(long)]
    pub entropy_n: Option<usize>,
    /// Report Haar regularity and coprime-subset flags.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Points of the weak model set on a region.
    Generate(Common),
    /// Empirical densities over the averaging sets.
    Density(Common),
    /// Exact and empirical autocorrelation coefficients.
    Autocorr(Common),
    /// Period group and Haar period group of the window.
    Periods(Common),
    /// Haar regularization, interior, closure and boundary.
    Regularize(Common),
    /// Quotient by a window period subgroup, with identity checks.
    Quotient(Common),
    /// Torus parameters compatible with a projected configuration.
    Torusparam(Common),
    /// Whether a torus parameter avoids the boundary orbit.
    Continuity(Common),
    /// Pattern frequencies over Haar-random torus parameters.
    Mirsky(Common),
    /// B-free densities, structural flags and word counts.
    Bfree(BfreeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Density(_) => "density",
            Command::Autocorr(_) => "autocorr",
            Command::Periods(_) => "periods",
            Command::Regularize(_) => "regularize",
            Command::Quotient(_) => "quotient",
            Command::Torusparam(_) => "torusparam",
            Command::Continuity(_) => "continuity",
            Command::Mirsky(_) => "mirsky",
            Command::Bfree(_) => "bfree",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Generate(c)
            | Command::Density(c)
            | Command::Autocorr(c)
            | Command::Periods(c)
            | Command::Regularize(c)
            | Command::Quotient(c)
            | Command::Torusparam(c)
            | Command::Continuity(c)
            | Command::Mirsky(c) => c,
            Command::Bfree(b) => &b.common,
        }
    }
}

/// A finished command: the JSON summary and named data files.
#[derive(Debug, Clone)]
pub struct Output {
    pub summary: Value,
    pub files: Vec<(String, Vec<u8>)>,
}

/// Exit status for an error: 2 config, 3 refusal, 4 budget, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Refused(_) | Error::EmptyConfiguration => 3,
        Error::BudgetExceeded { .. } => 4,
        _ => 1,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match exit_code(err) {
        2 => "config",
        3 => "refused",
        4 => "budget",
        _ => "computation",
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    match &common.config {
        Some(path) => ExperimentConfig::from_path(path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn measure_json(m: &Measure) -> Value {
    serde_json::to_value(m).unwrap_or(Value::Null)
}

fn scheme_json(s: &Scheme) -> Value {
    json!({
        "physical": match s.physical() { Physical::Integers => "integers", Physical::Reals => "reals" },
        "internal": s.internal().name(),
        "star": match (s.generator(), s.basis()) {
            (Some(g), _) => json!({ "generator": g.to_string() }),
            (_, Some(b)) => json!({ "basis": b }),
            _ => Value::Null,
        },
        "lattice_density": measure_json(&s.lattice_density()),
    })
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn default_region(scheme: &Scheme, cfg: &ExperimentConfig, fallback: Region) -> Result<Region> {
    if cfg.params.region.is_some() {
        cfg.region(scheme)
    } else {
        Ok(fallback)
    }
}

/// Runs one command without touching the filesystem (except reading the
/// experiment file and any input CSV).
pub fn run(command: &Command) -> Result<Output> {
    let common = command.common();
    let cfg = load(common)?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let mut files = Vec::new();
    let mut summary = match command {
        Command::Bfree(args) => run_bfree(args, &cfg)?,
        _ => {
            let scheme = cfg.build_scheme()?;
            let w = cfg.build_window(&scheme)?;
            let mut body = json!({ "scheme": scheme_json(&scheme), "window": w.to_string() });
            let extra = match command {
                Command::Generate(_) => {
                    let x = cfg.torus_point(&scheme)?;
                    let region = cfg.region(&scheme)?;
                    let full = generate(&scheme, &w, &x, &region)?;
                    let out = match cfg.params.flavor.as_deref() {
                        None | Some("full") => full,
                        Some("projected") => full.projected(),
                        Some(other) => return Err(Error::Config(format!("unknown flavor `{other}`"))),
                    };
                    files.push(("points.csv".to_string(), csv_bytes(|b| out.write_csv(b))?));
                    json!({ "region": region.to_string(), "torus_point": x, "points": out.len() })
                }
                Command::Density(_) => {
                    let x = cfg.torus_point(&scheme)?;
                    let scales = cfg.scales()?;
                    let rows = empirical_density(&scheme, &w, &x, &scales)?;
                    let mut wtr = csv::Writer::from_writer(Vec::new());
                    wtr.write_record(["n", "density", "density_f64"])?;
                    for (n, d) in &rows {
                        wtr.write_record([n.to_string(), d.to_string(), d.to_f64().to_string()])?;
                    }
                    files.push(("density.csv".to_string(), wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?));
                    let top = *scales.iter().max().ok_or_else(|| Error::Config("empty scale list".into()))?;
                    let report = is_maximal_density(&scheme, &w, &x, top, cfg.params.tolerance.unwrap_or(0.0))?;
                    json!({
                        "torus_point": x,
                        "densities": rows.iter().map(|(n, d)| json!({ "n": n, "density": measure_json(d) })).collect::<Vec<_>>(),
                        "maximal_density": report,
                    })
                }
                Command::Autocorr(_) => {
                    let x = cfg.torus_point(&scheme)?;
                    let range = cfg.params.max_range.unwrap_or(12);
                    let n = cfg.params.scale.ok_or_else(|| Error::Config("missing `params.scale`".into()))?;
                    // the patch must cover A_n and all its shifts by |ℓ_G| ≤ range
                    let region = match scheme.physical() {
                        Physical::Integers => Region::integers(-(range as i64), (n + range) as i64)?,
                        Physical::Reals => Region::reals(-((n + range + 1) as f64), (n + range + 1) as f64)?,
                    };
                    let patch = generate(&scheme, &w, &x, &region)?.projected();
                    let table = autocorr_spectrum(&scheme, &w, &patch, range, n)?;
                    files.push(("spectrum.csv".to_string(), csv_bytes(|b| table.write_csv(b))?));
                    json!({
                        "torus_point": x,
                        "region": region.to_string(),
                        "scale": n,
                        "rows": table.rows.len(),
                        "max_abs_error": measure_json(&table.max_abs_error),
                    })
                }
                Command::Periods(_) => {
                    let interior = w.interior().periods()?;
                    json!({
                        "H_W": w.periods()?.labels(),
                        "H_W_haar": w.haar_periods()?.labels(),
                        "H_int_W": interior.labels(),
                    })
                }
                Command::Regularize(_) => {
                    let reg = w.regularize();
                    let parts = w.topo_parts()?;
                    json!({
                        "regularized": reg.to_string(),
                        "interior": parts.interior.to_string(),
                        "closure": parts.closure.to_string(),
                        "boundary": parts.boundary.to_string(),
                        "measure": measure_json(&w.measure()?),
                        "regularized_measure": measure_json(&reg.measure()?),
                    })
                }
                Command::Quotient(_) => {
                    let kernel = match cfg.kernel(&scheme)? {
                        Some(k) => k,
                        None => w.periods()?,
                    };
                    let qs = quotient_scheme(&scheme, &kernel)?;
                    let wq = qs.quotient_window(&w)?;
                    let x = cfg.torus_point(&scheme)?;
                    let region = default_region(&scheme, &cfg, Region::integers(0, 1000)?)?;
                    let check = verify_projection_identity(&qs, &w, &x, &region)?;
                    let mef = mef_descriptor(&scheme, &w)?;
                    json!({
                        "kernel": kernel.labels(),
                        "quotient": scheme_json(&qs.quotient),
                        "quotient_window": wq.to_string(),
                        "quotient_window_periods": wq.periods()?.labels(),
                        "verification": { "region": region.to_string(), "torus_point": x, "result": check },
                        "mef": {
                            "group": mef.group,
                            "order": mef.order,
                            "kernel": mef.kernel.labels(),
                            "window_periods": mef.window_periods.labels(),
                            "periods_agree": mef.periods_agree,
                            "trivial": mef.trivial,
                        },
                    })
                }
                Command::Torusparam(_) => {
                    let region = cfg.region(&scheme)?;
                    let gcfg = match &cfg.params.input {
                        Some(path) => {
                            let file = std::fs::File::open(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
                            Configuration::read_projected_csv(file, region)?
                        }
                        None => generate(&scheme, &w, &cfg.torus_point(&scheme)?, &region)?.projected(),
                    };
                    let params = torus_parameters(&scheme, &w, &gcfg)?;
                    let listed = match &params {
                        TorusParameters::Finite(v) => json!(v.iter().map(|t| t.h.to_string()).collect::<Vec<_>>()),
                        TorusParameters::Circle(iu) => json!(iu.to_string()),
                    };
                    json!({
                        "region": region.to_string(),
                        "support_size": gcfg.len(),
                        "count": params.count(),
                        "parameters": listed,
                    })
                }
                Command::Continuity(_) => {
                    let x = cfg.torus_point(&scheme)?;
                    let radius = cfg.params.radius.unwrap_or(1000);
                    json!({
                        "torus_point": x,
                        "radius": radius,
                        "continuity": is_continuity_point(&scheme, &w, &x, radius)?,
                    })
                }
                Command::Mirsky(_) => {
                    let count = cfg.params.count.unwrap_or(1000);
                    let region = default_region(&scheme, &cfg, Region::integers(0, 1)?)?;
                    let samples = sample_mirsky(&scheme, &w, count, &region, seed)?;
                    let xs = sample_torus_points(&scheme, count, seed)?;
                    let mut wtr = csv::Writer::from_writer(Vec::new());
                    wtr.write_record(["sample", "x", "points"])?;
                    for (i, (x, c)) in xs.iter().zip(&samples).enumerate() {
                        wtr.write_record([i.to_string(), x.h.to_string(), c.len().to_string()])?;
                    }
                    files.push(("samples.csv".to_string(), wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?));
                    let patterns = cfg.params.patterns.clone().unwrap_or_else(|| vec![vec![0]]);
                    let mut rows = Vec::new();
                    for p in patterns {
                        let pattern: Vec<GCoord> = p.iter().map(|&g| GCoord::Int(g)).collect();
                        let (hits, freq) = pattern_frequency(&samples, &pattern);
                        let prediction = pattern_prediction(&scheme, &w, &pattern)?;
                        let q = prediction.to_f64();
                        let sigma = (q * (1.0 - q) / count.max(1) as f64).sqrt();
                        rows.push(json!({
                            "pattern": p,
                            "hits": hits,
                            "frequency": freq,
                            "prediction": measure_json(&prediction),
                            "sigma": sigma,
                            "within_3_sigma": (freq - q).abs() <= 3.0 * sigma,
                        }));
                    }
                    json!({ "seed": seed, "count": count, "region": region.to_string(), "patterns": rows })
                }
                Command::Bfree(_) => unreachable!("handled above"),
            };
            if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
                b.extend(e);
            }
            body
        }
    };
    if let Value::Object(map) = &mut summary {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
        map.insert("command".into(), json!(command.name()));
    }
    Ok(Output { summary, files })
}

fn run_bfree(args: &BfreeArgs, cfg: &ExperimentConfig) -> Result<Value> {
    let from_cfg = cfg.scheme.as_ref().and_then(|s| s.bfree.clone());
    let set = match (&args.set, &from_cfg) {
        (Some(s), _) => s.clone(),
        (None, Some(b)) => b.set.clone(),
        (None, None) => return Err(Error::Config("bfree needs --set or scheme.bfree".into())),
    };
    let k = args
        .truncate
        .or(from_cfg.as_ref().and_then(|b| b.truncate))
        .unwrap_or(set.len());
    let sys = build_bfree(&set, k)?;
    let everything = !args.density && !args.report && args.entropy_n.is_none() && cfg.params.entropy_n.is_none();
    let mut out = json!({
        "set": set,
        "truncation": k,
        "internal": sys.scheme().internal().name(),
        "window_measure": measure_json(&sys.window().measure()?),
    });
    let map = out.as_object_mut().expect("object");
    if args.density || everything {
        map.insert("density".into(), measure_json(&bfree_density_exact(&sys)?));
    }
    if args.report || everything {
        map.insert("report".into(), serde_json::to_value(haar_regularity_report(&sys)?)?);
    }
    if let Some(n) = args.entropy_n.or(cfg.params.entropy_n) {
        map.insert("entropy".into(), serde_json::to_value(hereditary_entropy_estimate(&sys, n)?)?);
    }
    Ok(out)
}

fn write_outputs(out: &Output, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.json"), render(&out.summary))?;
    for (name, bytes) in &out.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

/// Parses arguments, runs the command, prints the summary and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = cli.threads.or_else(|| load(cli.command.common()).ok().and_then(|c| c.threads));
    if let Some(n) = threads {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = run(&cli.command).and_then(|out| {
        if let Some(dir) = &cli.command.common().out {
            write_outputs(&out, dir)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", render(&out.summary));
            0
        }
        Err(err) => {
            let body = json!({
                "schema_version": SCHEMA_VERSION,
                "command": cli.command.name(),
                "error": { "kind": error_kind(&err), "message": err.to_string() },
            });
            eprint!("{}", render(&body));
            exit_code(&err)
        }
    }
}
