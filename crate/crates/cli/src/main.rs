//! Experiment front end: runs one subcommand, prints a one-line report, and
//! persists CSV tables, a JSON manifest, and gnuplot scripts.

mod alpha;
mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use alpha::AlphaSpec;
use output::{fmt, Manifest};
use paircorr_core::{
    degeneracy_curve, degeneracy_curve_critical, enumerate_spectrum, estimate_type, growth_fit,
    horocycle_average, limit_smoothed, r2_smoothed_direct, r2_theta_integral, r2_windowed,
    scan_trace, spectrum, unit_ball_volume, HorocycleProbe, Observable, TestPsi, WeightH, Window,
};

const OUT_DIR_ENV: &str = "PAIRCORR_OUT_DIR";

#[derive(Parser)]
#[command(name = "paircorr", version, about = "pair-correlation experiments on quasi-periodic torus spectra")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Torus dimension
    #[arg(long)]
    k: usize,
    /// Shift vector: decimals, p/q list, algebraic:base, or critical:base,r1,r2
    #[arg(long)]
    alpha: String,
    /// Output directory (default: $PAIRCORR_OUT_DIR or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results are byte-identical for any value
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate eigenvalues up to a cutoff, optionally caching them
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Eigenvalue cutoff (unrescaled)
        #[arg(long)]
        cutoff: f64,
        /// Print rows to stdout as well
        #[arg(long)]
        dump: bool,
        /// Write the binary spectrum cache here
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Load from a binary cache instead of enumerating
        #[arg(long)]
        use_cache: Option<PathBuf>,
    },
    /// Windowed pair-correlation estimate at one or more X
    Paircorr {
        #[command(flatten)]
        common: Common,
        /// Rescaled threshold X (pairs live in [X, 2X])
        #[arg(long)]
        x: f64,
        /// Correlation window "a,b"
        #[arg(long)]
        window: String,
    },
    /// Cross-check the lattice-side and theta-side smoothed estimators
    ThetaCheck {
        #[command(flatten)]
        common: Common,
        /// Smoothing scale lambda
        #[arg(long)]
        lambda: f64,
    },
    /// Horocycle averages of an observable at small cusp heights
    Equidist {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cusp heights v
        #[arg(long)]
        v_grid: String,
        /// Observable: constant | theta-pair
        #[arg(long, default_value = "theta-pair")]
        observable: String,
        /// v^sigma prefactor exponent
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Diophantine-type scan of the shift vector
    Dioph {
        #[command(flatten)]
        common: Common,
        /// Scan bound Q_max
        #[arg(long)]
        q_max: u64,
        /// Also write the (q, e(q)) trace CSV
        #[arg(long)]
        trace: bool,
    },
    /// Equal-eigenvalue pair counts and growth fit over an X grid
    Degeneracy {
        #[command(flatten)]
        common: Common,
        /// Comma-separated X values, strictly increasing
        #[arg(long)]
        x_grid: String,
    },
    /// Windowed estimates across an X grid against the Poisson density
    ConvergenceStudy {
        #[command(flatten)]
        common: Common,
        /// Correlation window "a,b"
        #[arg(long)]
        window: String,
        /// Comma-separated X values
        #[arg(long)]
        x_grid: String,
    },
}

fn main() {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::expand_args(raw) {
        Ok(a) => a,
        Err(e) => fail("config", &e),
    };
    let cli = Cli::parse_from(args);
    if let Err(e) = run(cli) {
        fail(e.0, &e.1);
    }
}

fn fail(kind: &str, message: &str) -> ! {
    // machine-readable error record on stderr
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    std::process::exit(1);
}

struct CmdError(&'static str, String);

impl From<paircorr_core::Error> for CmdError {
    fn from(e: paircorr_core::Error) -> Self {
        let kind = match e {
            paircorr_core::Error::Domain(_) => "domain",
            paircorr_core::Error::InsufficientData(_) => "insufficient-data",
            paircorr_core::Error::Budget(_) => "budget",
            paircorr_core::Error::CacheFormat(_) => "cache-format",
            paircorr_core::Error::Io(_) => "io",
        };
        CmdError(kind, e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError("io", e.to_string())
    }
}

impl From<String> for CmdError {
    fn from(e: String) -> Self {
        CmdError("config", e)
    }
}

fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn init_pool(workers: usize) {
    // ignore "already initialized": only possible in-process, not per run
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global();
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CmdError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CmdError("config", format!("grid entry `{p}` is not a number")))
        })
        .collect()
}

fn parse_window(text: &str) -> Result<Window, CmdError> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| CmdError("config", "window form is a,b".into()))?;
    let a = a.trim().parse::<f64>().map_err(|_| CmdError("config", "bad window start".into()))?;
    let b = b.trim().parse::<f64>().map_err(|_| CmdError("config", "bad window end".into()))?;
    Ok(Window::new(a, b)?)
}

fn manifest(common: &Common, subcommand: &str, extra: serde_json::Value) -> Manifest {
    let mut config = json!({
        "k": common.k,
        "alpha": common.alpha,
    });
    if let (Some(obj), Some(add)) = (config.as_object_mut(), extra.as_object()) {
        for (key, value) in add {
            obj.insert(key.clone(), value.clone());
        }
    }
    Manifest {
        subcommand: subcommand.to_string(),
        config,
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        workers: common.workers,
        elapsed_seconds: 0.0,
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let started = Instant::now();
    match cli.cmd {
        Cmd::Spectrum { common, cutoff, dump, cache, use_cache } => {
            init_pool(common.workers);
            let spec = AlphaSpec::parse(&common.alpha)?.to_spec(common.k)?;
            let slice = match &use_cache {
                Some(path) => spectrum::read_cache(path)?,
                None => enumerate_spectrum(&spec, cutoff)?,
            };
            if let Some(path) = &cache {
                spectrum::write_cache(&slice, path)?;
            }
            let mut m = manifest(&common, "spectrum", json!({ "cutoff": cutoff }));
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            let rows: Vec<Vec<String>> = slice
                .lambdas()
                .iter()
                .zip(slice.rescaled())
                .enumerate()
                .map(|(i, (l, r))| vec![i.to_string(), fmt(*l), fmt(*r)])
                .collect();
            out.write_csv(
                "spectrum.csv",
                &[
                    ("index", "dimensionless"),
                    ("lambda", "eigenvalue"),
                    ("rescaled", "norm^k"),
                ],
                &rows,
            )?;
            if dump {
                for row in &rows {
                    println!("{}", row.join(","));
                }
            }
            println!(
                "spectrum: {} eigenvalues up to cutoff {cutoff} (k = {})",
                slice.len(),
                common.k
            );
        }
        Cmd::Paircorr { common, x, window } => {
            init_pool(common.workers);
            let spec = AlphaSpec::parse(&common.alpha)?.to_spec(common.k)?;
            let w = parse_window(&window)?;
            let slice = enumerate_spectrum(&spec, (2.0 * x).powf(2.0 / common.k as f64))?;
            let est = r2_windowed(&slice, x, w)?;
            let poisson = unit_ball_volume(common.k as u32)? * (w.b - w.a);
            let mut m = manifest(&common, "paircorr", json!({ "x": x, "window": window }));
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            out.write_csv(
                "paircorr.csv",
                &[
                    ("x", "rescaled threshold"),
                    ("window_a", "rescaled gap"),
                    ("window_b", "rescaled gap"),
                    ("r2", "density"),
                    ("pairs", "count"),
                    ("poisson", "density"),
                ],
                &[vec![
                    fmt(x),
                    fmt(w.a),
                    fmt(w.b),
                    fmt(est.value),
                    est.pair_count.unwrap_or(0).to_string(),
                    fmt(poisson),
                ]],
            )?;
            println!(
                "paircorr: R2[{},{}]({x}) = {} (poisson {poisson}, rel err {})",
                w.a,
                w.b,
                est.value,
                (est.value - poisson).abs() / poisson
            );
        }
        Cmd::ThetaCheck { common, lambda } => {
            init_pool(common.workers);
            let spec = AlphaSpec::parse(&common.alpha)?.to_spec(common.k)?;
            let psi = TestPsi::gaussian();
            let h = WeightH::triangle(1.0, 1.0).unwrap();
            let cutoff = lambda * psi.truncation_radius(1e-14);
            let slice = enumerate_spectrum(&spec, cutoff)?;
            let direct = r2_smoothed_direct(&slice, &psi, &psi, &h, lambda)?;
            let theta = r2_theta_integral(&psi, &psi, &h, lambda, &spec)?;
            let delta = (direct.value - theta).abs();
            let mut m = manifest(&common, "theta-check", json!({ "lambda": lambda }));
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            out.write_csv(
                "theta_check.csv",
                &[
                    ("lambda", "smoothing scale"),
                    ("direct", "density"),
                    ("theta_integral", "density"),
                    ("abs_delta", "density"),
                ],
                &[vec![fmt(lambda), fmt(direct.value), fmt(theta), fmt(delta)]],
            )?;
            println!("theta-check: direct vs theta-integral max |Delta| = {delta:.3e}");
        }
        Cmd::Equidist { common, v_grid, observable, sigma } => {
            init_pool(common.workers);
            let spec = AlphaSpec::parse(&common.alpha)?.to_spec(common.k)?;
            let psi = TestPsi::gaussian();
            let h = WeightH::triangle(1.0, 1.0).unwrap();
            let target = match observable.as_str() {
                "constant" => Observable::Constant,
                "theta-pair" => Observable::ThetaPair,
                other => {
                    return Err(CmdError(
                        "config",
                        format!("unknown observable `{other}` (use constant or theta-pair)"),
                    ))
                }
            };
            let limit = match target {
                Observable::Constant => h.integral(),
                _ => {
                    unit_ball_volume(common.k as u32)?
                        * limit_smoothed(&psi, &psi, &h, common.k as u32)?
                }
            };
            let vs = parse_grid(&v_grid)?;
            let mut rows = Vec::new();
            for &v in &vs {
                let probe = HorocycleProbe::new(v, sigma, h.clone(), target.clone())?;
                let avg = horocycle_average(&probe, &spec, &psi, &psi)?;
                rows.push(vec![
                    fmt(v),
                    fmt(avg),
                    fmt(limit),
                    fmt((avg - limit).abs() / limit.abs().max(1e-300)),
                ]);
            }
            let mut m = manifest(
                &common,
                "equidist",
                json!({ "v_grid": v_grid, "observable": observable, "sigma": sigma }),
            );
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            out.write_csv(
                "equidist.csv",
                &[
                    ("v", "cusp height"),
                    ("average", "density"),
                    ("limit", "density"),
                    ("rel_err", "dimensionless"),
                ],
                &rows,
            )?;
            out.write_plot_script("equidist.csv", 1, 4, "horocycle average error", true)?;
            println!("equidist: {} heights, limit {limit}", vs.len());
        }
        Cmd::Dioph { common, q_max, trace } => {
            init_pool(common.workers);
            let spec = AlphaSpec::parse(&common.alpha)?.to_spec(common.k)?;
            let report = estimate_type(&spec, q_max)?;
            let mut m = manifest(&common, "dioph", json!({ "q_max": q_max }));
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            if trace {
                let rows: Vec<Vec<String>> = scan_trace(&spec, q_max)
                    .into_iter()
                    .map(|(q, e)| vec![q.to_string(), fmt(e)])
                    .collect();
                out.write_csv(
                    "dioph_trace.csv",
                    &[("q", "denominator"), ("e", "max_j dist(q alpha_j, Z)")],
                    &rows,
                )?;
                out.write_plot_script("dioph_trace.csv", 1, 2, "approximation quality", true)?;
            }
            out.write_csv(
                "dioph.csv",
                &[
                    ("q_max", "denominator"),
                    ("kappa_hat", "type exponent"),
                    ("worst_q", "denominator"),
                    ("worst_error", "distance"),
                    ("rational", "flag"),
                    ("c_hat", "type constant"),
                ],
                &[vec![
                    q_max.to_string(),
                    fmt(report.kappa_hat),
                    report.worst_q.to_string(),
                    fmt(report.worst_error),
                    (report.rational_flag as u8).to_string(),
                    fmt(report.c_hat),
                ]],
            )?;
            println!(
                "dioph: kappa_hat = {} (worst q = {}, rational = {})",
                report.kappa_hat, report.worst_q, report.rational_flag
            );
        }
        Cmd::Degeneracy { common, x_grid } => {
            init_pool(common.workers);
            let xs = parse_grid(&x_grid)?;
            let parsed = AlphaSpec::parse(&common.alpha)?;
            let curve = if let Ok((head, tail)) = parsed.critical_parts(common.k) {
                degeneracy_curve_critical(&head, &tail, &xs)?
            } else {
                let spec = parsed.to_spec(common.k)?;
                degeneracy_curve(&spec, &xs)?
            };
            let fit = growth_fit(&curve).ok();
            let mut m = manifest(&common, "degeneracy", json!({ "x_grid": x_grid }));
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            let rows: Vec<Vec<String>> = curve
                .samples
                .iter()
                .map(|&(x, n)| vec![fmt(x), fmt(n * x), fmt(n)])
                .collect();
            out.write_csv(
                "degeneracy.csv",
                &[
                    ("x", "rescaled threshold"),
                    ("pairs", "count"),
                    ("normalized", "count per X"),
                ],
                &rows,
            )?;
            out.write_plot_script("degeneracy.csv", 1, 3, "degenerate pair growth", true)?;
            match fit {
                Some((slope, r2)) => println!(
                    "degeneracy: fitted exponent {slope:.4} (r^2 = {r2:.4}), log coefficient {:.4}",
                    curve.fitted_log_coefficient
                ),
                None => println!("degeneracy: {} samples (fit needs >= 5 over two decades)", xs.len()),
            }
        }
        Cmd::ConvergenceStudy { common, window, x_grid } => {
            init_pool(common.workers);
            let spec = AlphaSpec::parse(&common.alpha)?.to_spec(common.k)?;
            let w = parse_window(&window)?;
            let xs = parse_grid(&x_grid)?;
            let poisson = unit_ball_volume(common.k as u32)? * (w.b - w.a);
            let x_max = xs.iter().cloned().fold(0.0f64, f64::max);
            let slice = enumerate_spectrum(&spec, (2.0 * x_max).powf(2.0 / common.k as f64))?;
            let mut rows = Vec::new();
            for &x in &xs {
                let est = r2_windowed(&slice, x, w)?;
                rows.push(vec![
                    fmt(x),
                    fmt(est.value),
                    est.pair_count.unwrap_or(0).to_string(),
                    fmt(poisson),
                    fmt((est.value - poisson).abs() / poisson),
                ]);
            }
            let mut m = manifest(
                &common,
                "convergence-study",
                json!({ "window": window, "x_grid": x_grid }),
            );
            m.elapsed_seconds = started.elapsed().as_secs_f64();
            let out = output::prepare(&out_dir(&common), &m)?;
            out.write_csv(
                "convergence.csv",
                &[
                    ("x", "rescaled threshold"),
                    ("r2", "density"),
                    ("pairs", "count"),
                    ("poisson", "density"),
                    ("rel_err", "dimensionless"),
                ],
                &rows,
            )?;
            out.write_plot_script("convergence.csv", 1, 5, "pair-correlation convergence", true)?;
            let last_err = rows.last().map(|r| r[4].clone()).unwrap_or_default();
            println!("convergence-study: {} thresholds, final rel err {last_err}", xs.len());
        }
    }
    Ok(())
}
