//! Command dispatch for the `crlab` binary: JSON/CSV I/O, report envelopes,
//! and exit-code policy.
//!
//! Every command prints a self-describing JSON envelope
//! `{command, config, results, pass}` to stdout. Exit codes: 0 when the run
//! passed, 1 when a mathematical check failed (the envelope embeds the
//! witness), 2 on input errors. Exact values are serialized as strings;
//! floating-point values are rendered with 17 significant digits so that
//! reports with a fixed seed are byte-identical across runs. The config echo
//! covers inputs and numeric parameters only, never output paths.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crlab::construct::{
    check_subharmonic, gen_sequences, taylor_extract, verify_spike_conditions, SequenceFamily,
    SurfaceModel,
};
use crlab::hypersurface::{tangency_order, xm_tangency_check, Curve};
use crlab::obstruct::{
    certify_batch, obstruction_certificate, random_normalized_curve, ObstructError,
};
use crlab::typecheck::{dangelo_lower_bound, ModelFunction};

#[derive(Parser)]
#[command(name = "crlab", version, about = "Certified potentials: generation, verification, and type diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a coefficient family from a spike schedule and write it out.
    GenSeq {
        /// Number of coordinate sequences.
        #[arg(long)]
        n: usize,
        /// Comma-separated spike positions, e.g. 2,4; omit for a spike-free
        /// family.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        spikes: Vec<usize>,
        /// Highest retained degree.
        #[arg(long)]
        mmax: usize,
        /// Where to write the family JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the Laplacian of the assembled potential region by region.
    CheckSubharmonic {
        #[arg(long)]
        family: PathBuf,
        /// Potential truncation order.
        #[arg(long = "M")]
        m_upper: usize,
        /// Log-polar samples per support annulus.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Relative tolerance on the sampled minimum.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the full envelope here as well as stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write per-region rows (j,m,r_or_annulus,value) for plotting.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recover one Taylor coefficient through circle averages.
    TaylorExtract {
        #[arg(long)]
        family: PathBuf,
        /// Coordinate index (1-based).
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Potential truncation order.
        #[arg(long = "M")]
        m_upper: usize,
        /// Degree to extract.
        #[arg(long)]
        m: usize,
        /// Circle radius.
        #[arg(long)]
        r: f64,
        /// Power-of-two node count.
        #[arg(long, default_value_t = 4096)]
        nodes: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compose an analytic curve into the family and report its contact order.
    Tangency {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// Write the results payload here as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the slice curves of every coordinate at one order.
    XmCheck {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        m: usize,
    },
    /// Certify one curve's finite contact against the family spikes.
    Obstruct {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// Write the certificate JSON here as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw seeded random normalized curves and certify the whole batch.
    ObstructBatch {
        #[arg(long)]
        family: PathBuf,
        /// Directory to save the drawn curves into (created if missing).
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Highest degree of the drawn coefficients.
        #[arg(long, default_value_t = 5)]
        deg: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Lowest mixed degree of a polynomial model.
    BgType {
        #[arg(long)]
        model: PathBuf,
        /// Degree window; unresolved values report as ">=K+1".
        #[arg(long = "K")]
        window: usize,
    },
    /// Monomial-curve contact lower bound of a polynomial model.
    DangeloBound {
        #[arg(long)]
        model: PathBuf,
        /// Highest exponent tried per coordinate.
        #[arg(long)]
        budget: usize,
        #[arg(long = "K")]
        window: usize,
    },
}

pub struct InputError(pub String);

fn input(message: impl Into<String>) -> InputError {
    InputError(message.into())
}

struct Outcome {
    envelope: Value,
    pass: bool,
}

/// Canonical 17-significant-digit rendering used for every float in reports.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn envelope(command: &str, config: Value, results: Value, pass: bool) -> Value {
    json!({ "command": command, "config": config, "results": results, "pass": pass })
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {what} {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| input(format!("{what} {}: {e}", path.display())))
}

fn write_pretty(path: &Path, value: &Value) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| input(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), InputError> {
    std::fs::write(path, text).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

/// Loads a family and refuses ones that fail the spike-condition audit:
/// downstream guarantees hold only for verified families.
fn load_family(path: &Path) -> Result<SequenceFamily, InputError> {
    let family: SequenceFamily = read_json(path, "family")?;
    let check = verify_spike_conditions(&family);
    if !check.pass {
        let witness = check
            .violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(input(format!(
            "family {} fails verification: {witness}",
            path.display()
        )));
    }
    Ok(family)
}

fn configure_threads() -> Result<(), String> {
    let raw = match std::env::var("CRLAB_THREADS") {
        Ok(raw) => raw,
        Err(_) => return Ok(()),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("CRLAB_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        return Err("CRLAB_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    {
        // A pool may already exist (e.g. under a test harness); the cap is
        // best-effort in that case.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return 2;
    }
    match dispatch(cli.command) {
        Ok(outcome) => {
            let mut text = serde_json::to_string_pretty(&outcome.envelope)
                .expect("envelopes are plain JSON values");
            text.push('\n');
            print!("{text}");
            if outcome.pass {
                0
            } else {
                1
            }
        }
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome, InputError> {
    match command {
        Command::GenSeq { n, spikes, mmax, out } => gen_seq(n, spikes, mmax, out),
        Command::CheckSubharmonic {
            family,
            m_upper,
            samples,
            tol,
            report,
            csv,
        } => subharmonic(family, m_upper, samples, tol, report, csv),
        Command::TaylorExtract {
            family,
            j,
            m_upper,
            m,
            r,
            nodes,
            report,
            csv,
        } => taylor(family, j, m_upper, m, r, nodes, report, csv),
        Command::Tangency { family, curve, out } => tangency(family, curve, out),
        Command::XmCheck { family, m } => xm_check(family, m),
        Command::Obstruct { family, curve, out } => obstruct(family, curve, out),
        Command::ObstructBatch {
            family,
            curves,
            seed,
            count,
            deg,
            report,
        } => obstruct_batch(family, curves, seed, count, deg, report),
        Command::BgType { model, window } => bg_type(model, window),
        Command::DangeloBound {
            model,
            budget,
            window,
        } => dangelo(model, budget, window),
    }
}

fn gen_seq(n: usize, spikes: Vec<usize>, mmax: usize, out: PathBuf) -> Result<Outcome, InputError> {
    let family = gen_sequences(n, &spikes, mmax).map_err(|e| input(e.to_string()))?;
    let check = verify_spike_conditions(&family);
    let family_json =
        serde_json::to_value(&family).map_err(|e| input(format!("serialization failed: {e}")))?;
    write_pretty(&out, &family_json)?;
    let config = json!({ "n": n, "spikes": spikes, "mmax": mmax });
    let results = json!({
        "written": out.display().to_string(),
        "verified": check.pass,
    });
    Ok(Outcome {
        envelope: envelope("gen-seq", config, results, check.pass),
        pass: check.pass,
    })
}

fn subharmonic(
    family_path: PathBuf,
    m_upper: usize,
    samples: usize,
    tol: f64,
    report_path: Option<PathBuf>,
    csv_path: Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let family = load_family(&family_path)?;
    if !(1..=family.m_max()).contains(&m_upper) {
        return Err(input(format!(
            "M must lie in 1..={}, got {m_upper}",
            family.m_max()
        )));
    }
    let model = SurfaceModel::new(family);
    let report = check_subharmonic(&model, m_upper, samples, tol);
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "j": e.j,
                "region": serde_json::to_value(&e.region).expect("region serializes"),
                "samples": e.samples,
                "min_laplacian": sig17(e.min_laplacian),
                "min_relative": sig17(e.min_relative),
                "scale": sig17(e.scale),
                "argmin_r": sig17(e.argmin.0),
                "argmin_theta": sig17(e.argmin.1),
            })
        })
        .collect();
    let config = json!({
        "family": family_path.display().to_string(),
        "M": m_upper,
        "samples": samples,
        "tol": sig17(tol),
    });
    let results = json!({
        "constant": sig17(model.constant().c),
        "entries": entries,
    });
    let env = envelope("check-subharmonic", config, results, report.pass);
    if let Some(path) = report_path {
        write_pretty(&path, &env)?;
    }
    if let Some(path) = csv_path {
        let mut csv = String::from("j,m,r_or_annulus,value\n");
        for e in &report.entries {
            let m_label = match e.region {
                crlab::construct::SampleRegion::Annulus { m } => m.to_string(),
                crlab::construct::SampleRegion::Global => String::new(),
            };
            csv.push_str(&format!(
                "{},{},{},{}\n",
                e.j,
                m_label,
                sig17(e.argmin.0),
                sig17(e.min_laplacian)
            ));
        }
        write_text(&path, &csv)?;
    }
    Ok(Outcome {
        envelope: env,
        pass: report.pass,
    })
}

#[allow(clippy::too_many_arguments)]
fn taylor(
    family_path: PathBuf,
    j: usize,
    m_upper: usize,
    m: usize,
    r: f64,
    nodes: usize,
    report_path: Option<PathBuf>,
    csv_path: Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let family = load_family(&family_path)?;
    if j < 1 || j > family.n() {
        return Err(input(format!("j must lie in 1..={}, got {j}", family.n())));
    }
    if !(1..=family.m_max()).contains(&m_upper) {
        return Err(input(format!(
            "M must lie in 1..={}, got {m_upper}",
            family.m_max()
        )));
    }
    let model = SurfaceModel::new(family);
    let value = taylor_extract(&model, j, m_upper, m, r, nodes).map_err(|e| input(e.to_string()))?;
    let expected = if m >= 1 && m <= m_upper {
        model.family().a_f64(j, m)
    } else {
        0.0
    };
    let rel_error = if expected != 0.0 {
        ((value - expected) / expected).abs()
    } else {
        value.abs()
    };
    let config = json!({
        "family": family_path.display().to_string(),
        "j": j,
        "M": m_upper,
        "m": m,
        "r": sig17(r),
        "nodes": nodes,
    });
    let results = json!({
        "value": sig17(value),
        "expected": sig17(expected),
        "rel_error": sig17(rel_error),
    });
    let env = envelope("taylor-extract", config, results, true);
    if let Some(path) = report_path {
        write_pretty(&path, &env)?;
    }
    if let Some(path) = csv_path {
        let csv = format!(
            "m,extracted,rel_error\n{},{},{}\n",
            m,
            sig17(value),
            sig17(rel_error)
        );
        write_text(&path, &csv)?;
    }
    Ok(Outcome {
        envelope: env,
        pass: true,
    })
}

fn tangency(
    family_path: PathBuf,
    curve_path: PathBuf,
    out: Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let family = load_family(&family_path)?;
    let curve: Curve = read_json(&curve_path, "curve")?;
    let result = tangency_order(&curve, &family).map_err(|e| input(e.to_string()))?;
    let leading = result.leading.as_ref().map(|(degree, coeff)| {
        json!({
            "degree": degree,
            "coeff": serde_json::to_value(coeff).expect("coefficient serializes"),
        })
    });
    let config = json!({
        "family": family_path.display().to_string(),
        "curve": curve_path.display().to_string(),
    });
    let results = json!({
        "order": result.order.to_string(),
        "leading": leading,
    });
    if let Some(path) = out {
        write_pretty(&path, &results)?;
    }
    Ok(Outcome {
        envelope: envelope("tangency", config, results, true),
        pass: true,
    })
}

fn xm_check(family_path: PathBuf, m: usize) -> Result<Outcome, InputError> {
    let family = load_family(&family_path)?;
    let check = xm_tangency_check(&family, m).map_err(|e| input(e.to_string()))?;
    let per_component: Vec<Value> = check
        .per_component
        .iter()
        .map(|c| {
            json!({
                "j": c.j,
                "order": c.order.to_string(),
                "expected_order": c.expected_order,
                "leading": c.leading.as_ref().map(|v| serde_json::to_value(v).expect("coefficient serializes")),
                "expected_leading": serde_json::to_value(&c.expected_leading).expect("coefficient serializes"),
                "pass": c.pass,
            })
        })
        .collect();
    let config = json!({
        "family": family_path.display().to_string(),
        "m": m,
    });
    let results = json!({
        "m": check.m,
        "per_component": per_component,
    });
    Ok(Outcome {
        envelope: envelope("xm-check", config, results, check.pass),
        pass: check.pass,
    })
}

fn obstruct(
    family_path: PathBuf,
    curve_path: PathBuf,
    out: Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let family = load_family(&family_path)?;
    let curve: Curve = read_json(&curve_path, "curve")?;
    let config = json!({
        "family": family_path.display().to_string(),
        "curve": curve_path.display().to_string(),
    });
    match obstruction_certificate(&curve, &family) {
        Ok(cert) => {
            let results =
                serde_json::to_value(&cert).map_err(|e| input(format!("serialization failed: {e}")))?;
            if let Some(path) = out {
                write_pretty(&path, &results)?;
            }
            Ok(Outcome {
                envelope: envelope("obstruct", config, results, cert.bound_respected),
                pass: cert.bound_respected,
            })
        }
        Err(ObstructError::TruncationTooSmall {
            k0,
            m_star,
            truncation,
        }) => {
            // An honest certification shortfall: report the witness and fail.
            let results = json!({
                "error": "truncation_too_small",
                "k0": k0,
                "m_star": m_star,
                "truncation": truncation,
            });
            if let Some(path) = out {
                write_pretty(&path, &results)?;
            }
            Ok(Outcome {
                envelope: envelope("obstruct", config, results, false),
                pass: false,
            })
        }
        Err(ObstructError::Curve(e)) => Err(input(e.to_string())),
    }
}

fn obstruct_batch(
    family_path: PathBuf,
    curves_dir: Option<PathBuf>,
    seed: u64,
    count: usize,
    deg: usize,
    report_path: Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let family = load_family(&family_path)?;
    if deg < 1 || deg > family.m_max() {
        return Err(input(format!(
            "deg must lie in 1..={}, got {deg}",
            family.m_max()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curves: Vec<Curve> = (0..count)
        .map(|_| random_normalized_curve(&mut rng, family.n(), deg, family.m_max()))
        .collect();
    if let Some(dir) = &curves_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| input(format!("cannot create {}: {e}", dir.display())))?;
        for (i, curve) in curves.iter().enumerate() {
            let value = serde_json::to_value(curve)
                .map_err(|e| input(format!("serialization failed: {e}")))?;
            write_pretty(&dir.join(format!("curve_{i:03}.json")), &value)?;
        }
    }
    let outcomes = certify_batch(&curves, &family);
    let mut pass = true;
    let entries: Vec<Value> = outcomes
        .iter()
        .enumerate()
        .map(|(index, outcome)| match outcome {
            Ok(cert) => {
                pass &= cert.bound_respected;
                json!({
                    "index": index,
                    "certificate": serde_json::to_value(cert).expect("certificate serializes"),
                })
            }
            Err(ObstructError::TruncationTooSmall {
                k0,
                m_star,
                truncation,
            }) => {
                pass = false;
                json!({
                    "index": index,
                    "error": {
                        "kind": "truncation_too_small",
                        "k0": k0,
                        "m_star": m_star,
                        "truncation": truncation,
                    },
                })
            }
            Err(ObstructError::Curve(e)) => {
                pass = false;
                json!({ "index": index, "error": { "kind": "curve", "message": e.to_string() } })
            }
        })
        .collect();
    let config = json!({
        "family": family_path.display().to_string(),
        "seed": seed,
        "count": count,
        "deg": deg,
    });
    let results = json!({ "certificates": entries });
    let env = envelope("obstruct-batch", config, results, pass);
    if let Some(path) = report_path {
        write_pretty(&path, &env)?;
    }
    Ok(Outcome {
        envelope: env,
        pass,
    })
}

fn bg_type(model_path: PathBuf, window: usize) -> Result<Outcome, InputError> {
    let model: ModelFunction = read_json(&model_path, "model")?;
    let value = model.bg_type(window);
    let config = json!({
        "model": model_path.display().to_string(),
        "K": window,
    });
    let results = json!({ "bg_type": value.to_string() });
    Ok(Outcome {
        envelope: envelope("bg-type", config, results, true),
        pass: true,
    })
}

fn dangelo(model_path: PathBuf, budget: usize, window: usize) -> Result<Outcome, InputError> {
    let model: ModelFunction = read_json(&model_path, "model")?;
    if budget < 1 {
        return Err(input("budget must be at least 1".to_string()));
    }
    if window < 1 {
        return Err(input("K must be at least 1".to_string()));
    }
    let bound = dangelo_lower_bound(&model, budget, window);
    let witness = &bound.witness;
    let w_poly: Vec<Value> = witness
        .w_poly
        .iter()
        .map(|(degree, coeff)| {
            json!({
                "degree": degree,
                "coeff": serde_json::to_value(coeff).expect("coefficient serializes"),
            })
        })
        .collect();
    let config = json!({
        "model": model_path.display().to_string(),
        "budget": budget,
        "K": window,
    });
    let results = json!({
        "bound": bound.bound.to_string(),
        "witness": {
            "coefficients": serde_json::to_value(&witness.coefficients).expect("coefficients serialize"),
            "exponents": witness.exponents,
            "w_poly": w_poly,
            "curve_valuation": witness.curve_valuation,
            "pullback_valuation": witness.pullback_valuation.to_string(),
        },
    });
    Ok(Outcome {
        envelope: envelope("dangelo-bound", config, results, true),
        pass: true,
    })
}
