//! Batch front door: load and validate models, sweep the fixed-point
//! family, build and certify slabs, shadow prescribed symbol words, and run
//! the conjugacy and sensitivity experiments. Every run writes a manifest
//! with the input hash, tool version, tolerances and any sub-failures, next
//! to its result files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use shilnikov::fixed_points::{
    family_to_csv, fixed_point_family, leading_order_data, leading_return_time,
};
use shilnikov::horseshoe::{certificates_to_csv, Horseshoe, Verdict};
use shilnikov::model::{load_model, validate_model, ModelSpec};
use shilnikov::symbols::SymbolWord;

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit classes: 2 validation failure, 3 solver nonconvergence,
/// 4 horseshoe verification failure, 5 I/O.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FailClass {
    Validation = 2,
    Solver = 3,
    Horseshoe = 4,
    Io = 5,
}

#[derive(Debug)]
struct Failure {
    class: FailClass,
    message: String,
}

impl Failure {
    fn new(class: FailClass, message: impl Into<String>) -> Self {
        Failure {
            class,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "shilnikov",
    version,
    about = "Constructs and certifies Smale horseshoes near a Shilnikov homoclinic orbit"
)]
struct Cli {
    /// Path to the model JSON file.
    #[arg(long, global = true, default_value = "configs/m0.json")]
    model: PathBuf,
    /// Output directory for result files and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Seed for the deterministic samplers.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output format for the fixed-point sweep (csv or json).
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct EllArg {
    /// Slab index.
    #[arg(long, default_value_t = 4)]
    ell: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the assumption checks and write validation.json.
    Validate,
    /// Sweep the fixed-point family over an inclusive index range.
    FixedPoints {
        /// Range as `lo..hi` (inclusive).
        #[arg(long, default_value = "1..40")]
        ell: String,
    },
    /// Build the slab for one index and write slab_<ell>.json.
    Slab(EllArg),
    /// Certify the Conley–Moser conditions on one slab.
    Horseshoe(EllArg),
    /// Shadow one symbol word on a certified slab.
    Shadow {
        #[command(flatten)]
        ell: EllArg,
        /// Word, e.g. `0100,11` (anchor left of the comma) or `010011`.
        #[arg(long)]
        word: String,
    },
    /// Shadow all anchored words of a given length and check the
    /// commutation with the shift.
    Conjugacy {
        #[command(flatten)]
        ell: EllArg,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Sensitive-dependence experiment: word pairs agreeing up to depth j.
    Sensitivity(EllArg),
}

struct Run {
    out_dir: PathBuf,
    outputs: Vec<String>,
    failures: Vec<(FailClass, String)>,
}

impl Run {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Failure::new(FailClass::Io, format!("writing {name}: {e}")))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::new(FailClass::Io, format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn note_failure(&mut self, class: FailClass, message: impl Into<String>) {
        self.failures.push((class, message.into()));
    }
}

fn parse_range(text: &str) -> Result<(usize, usize), Failure> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| {
        Failure::new(
            FailClass::Io,
            format!("range `{text}` must have the form lo..hi"),
        )
    })?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| Failure::new(FailClass::Io, format!("range start: {e}")))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|e| Failure::new(FailClass::Io, format!("range end: {e}")))?;
    if lo < 1 || hi < lo {
        return Err(Failure::new(
            FailClass::Io,
            format!("range `{text}` must satisfy 1 <= lo <= hi"),
        ));
    }
    Ok((lo, hi))
}

fn certified_horseshoe(
    ell: usize,
    spec: &ModelSpec,
    seed: u64,
    run: &mut Run,
) -> Result<(Horseshoe, shilnikov::horseshoe::ConleyMoserReport), Failure> {
    let hs = Horseshoe::new(ell, spec).map_err(horseshoe_failure)?;
    let report = hs.verify_conley_moser(seed).map_err(horseshoe_failure)?;
    run.write_json(
        &format!("conley_moser_{ell}.json"),
        &serde_json::to_value(&report).map_err(|e| Failure::new(FailClass::Io, e.to_string()))?,
    )?;
    if report.verdict != Verdict::Pass {
        return Err(Failure::new(
            FailClass::Horseshoe,
            format!("slab {ell} certificate verdict {:?}", report.verdict),
        ));
    }
    Ok((hs, report))
}

fn horseshoe_failure(e: shilnikov::HorseshoeError) -> Failure {
    use shilnikov::HorseshoeError as E;
    let class = match &e {
        E::MissingFixedPoint { .. } | E::FixedPoint(_) | E::InversionFailed { .. } => {
            FailClass::Solver
        }
        E::Flight(_) => FailClass::Solver,
        E::Model(_) => FailClass::Validation,
        _ => FailClass::Horseshoe,
    };
    Failure::new(class, e.to_string())
}

fn slab_json(slab: &shilnikov::Slab, spec: &ModelSpec) -> serde_json::Value {
    let fp = |record: &shilnikov::FixedPointRecord| {
        json!({
            "ell": record.ell,
            "T_ell": record.t_ell,
            "residual": record.residual,
            "converged": record.converged,
            "x0": record.raw.x0,
            "z0": record.raw.z0,
            "v_plus0": record.raw.v_plus0.as_slice(),
            "v_minus0": record.raw.v_minus0.as_slice(),
        })
    };
    let membership = |record: &shilnikov::FixedPointRecord| {
        slab.membership(&record.raw, spec)
            .map(|m| json!({"min_margin": m.min_margin(), "contains": m.contains()}))
            .unwrap_or(json!({"contains": false}))
    };
    json!({
        "ell": slab.ell,
        "z_lo": slab.z_lo,
        "z_hi": slab.z_hi,
        "x_bound": slab.x_bound,
        "vm_bound": slab.vm_bound,
        "vp_bound": slab.vp_bound,
        "z_split": slab.z_split(spec),
        "return_times": slab.t_anchor,
        "fp_plus": fp(&slab.fp_plus),
        "fp_minus": fp(&slab.fp_minus),
        "fp_plus_membership": membership(&slab.fp_plus),
        "fp_minus_membership": membership(&slab.fp_minus),
    })
}

fn execute(cli: &Cli, spec: &ModelSpec, run: &mut Run) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate => {
            let report = validate_model(spec);
            run.write_json(
                "validation.json",
                &serde_json::to_value(&report)
                    .map_err(|e| Failure::new(FailClass::Io, e.to_string()))?,
            )?;
            if !report.passed {
                for check in report.checks.iter().filter(|c| c.failed()) {
                    run.note_failure(
                        FailClass::Validation,
                        format!("check {} failed", check.name),
                    );
                }
                return Err(Failure::new(
                    FailClass::Validation,
                    "validation reported failed checks",
                ));
            }
            Ok(())
        }
        Command::FixedPoints { ell } => {
            let (lo, hi) = parse_range(ell)?;
            let family = fixed_point_family(lo, hi, spec)
                .map_err(|e| Failure::new(FailClass::Solver, e.to_string()))?;
            for record in family.records.iter().filter(|r| !r.converged) {
                run.note_failure(
                    FailClass::Solver,
                    format!("index {} did not converge", record.ell),
                );
            }
            if cli.format == "json" {
                let lod = leading_order_data(spec)
                    .map_err(|e| Failure::new(FailClass::Solver, e.to_string()))?;
                let rows: Vec<serde_json::Value> = family
                    .records
                    .iter()
                    .map(|r| {
                        let lead = leading_return_time(r.ell, lod.phi, spec.spectrum.beta);
                        json!({
                            "ell": r.ell,
                            "T_ell": r.t_ell,
                            "leading_T": lead,
                            "gap": (r.t_ell - lead).abs(),
                            "residual": r.residual,
                            "converged": r.converged,
                        })
                    })
                    .collect();
                run.write_json(
                    "fixed_points.json",
                    &json!({"ell_0": family.ell_0, "records": rows}),
                )?;
            } else {
                run.write("fixed_points.csv", &family_to_csv(&family, spec))?;
            }
            if family.records.iter().all(|r| !r.converged) {
                return Err(Failure::new(
                    FailClass::Solver,
                    "no index in the requested range converged",
                ));
            }
            Ok(())
        }
        Command::Slab(args) => {
            let slab =
                shilnikov::horseshoe::build_slab(args.ell, spec).map_err(horseshoe_failure)?;
            run.write_json(&format!("slab_{}.json", args.ell), &slab_json(&slab, spec))
        }
        Command::Horseshoe(args) => {
            let (_, report) = certified_horseshoe(args.ell, spec, cli.seed, run)?;
            println!(
                "slab {}: verdict pass, mu_u = {:.6e}, mu_s = {:.6e}",
                args.ell, report.mu_u, report.mu_s
            );
            Ok(())
        }
        Command::Shadow { ell, word } => {
            let word = SymbolWord::parse(word).map_err(horseshoe_failure)?;
            let (hs, _) = certified_horseshoe(ell.ell, spec, cli.seed, run)?;
            let cert = hs.shadow_orbit(&word).map_err(horseshoe_failure)?;
            run.write("certificates.csv", &certificates_to_csv(&[cert]))
        }
        Command::Conjugacy { ell, depth } => {
            let (hs, report) = certified_horseshoe(ell.ell, spec, cli.seed, run)?;
            let mut certs = Vec::new();
            for word in SymbolWord::enumerate(*depth) {
                certs.push(hs.shadow_orbit(&word).map_err(horseshoe_failure)?);
            }
            run.write("certificates.csv", &certificates_to_csv(&certs))?;
            let summary = hs
                .conjugacy_sweep(*depth, report.mu_u, report.mu_s)
                .map_err(horseshoe_failure)?;
            run.write_json(
                "conjugacy.json",
                &serde_json::to_value(&summary)
                    .map_err(|e| Failure::new(FailClass::Io, e.to_string()))?,
            )?;
            if !summary.all_passed {
                return Err(Failure::new(
                    FailClass::Horseshoe,
                    format!(
                        "conjugacy distance {:e} exceeded tolerance",
                        summary.max_distance
                    ),
                ));
            }
            println!(
                "conjugacy at depth {depth}: max distance {:.6e} (tol {:.6e})",
                summary.max_distance, summary.max_tol
            );
            Ok(())
        }
        Command::Sensitivity(args) => {
            let (hs, _) = certified_horseshoe(args.ell, spec, cli.seed, run)?;
            let report = hs.sensitivity(6).map_err(horseshoe_failure)?;
            let mut csv = String::from("j,delta,separation,strip_gap\n");
            for row in &report.rows {
                let _ = writeln!(
                    csv,
                    "{},{:.17e},{:.17e},{:.17e}",
                    row.j, row.delta, row.separation, report.strip_gap
                );
            }
            run.write("sensitivity.csv", &csv)?;
            if !report.deltas_strictly_decreasing || !report.separations_reach_gap {
                return Err(Failure::new(
                    FailClass::Horseshoe,
                    "sensitivity run violated the separation law",
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!("cannot create output directory: {e}");
        return ExitCode::from(FailClass::Io as u8);
    }
    let mut run = Run {
        out_dir: cli.out_dir.clone(),
        outputs: Vec::new(),
        failures: Vec::new(),
    };

    let model_bytes = match std::fs::read(&cli.model) {
        Ok(bytes) => bytes,
        Err(e) => {
            eprintln!("cannot read model file {}: {e}", cli.model.display());
            return ExitCode::from(FailClass::Io as u8);
        }
    };
    let model_sha256: String =
        Sha256::digest(&model_bytes)
            .iter()
            .fold(String::new(), |mut acc, b| {
                let _ = write!(acc, "{b:02x}");
                acc
            });
    let spec = match load_model(&cli.model) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("model file rejected: {e}");
            write_manifest(&cli, &run, &model_sha256, Some(&e.to_string()));
            return ExitCode::from(FailClass::Validation as u8);
        }
    };

    let result = execute(&cli, &spec, &mut run);
    let (code, error_text) = match &result {
        Ok(()) => (ExitCode::SUCCESS, None),
        Err(failure) => {
            eprintln!("{}", failure.message);
            run.failures.push((failure.class, failure.message.clone()));
            (
                ExitCode::from(failure.class as u8),
                Some(failure.message.clone()),
            )
        }
    };
    write_manifest(&cli, &run, &model_sha256, error_text.as_deref());
    code
}

fn write_manifest(cli: &Cli, run: &Run, model_sha256: &str, error: Option<&str>) {
    let spec_tolerances = load_model(&cli.model)
        .map(|s| serde_json::to_value(&s.tolerances).unwrap_or(json!(null)))
        .unwrap_or(json!(null));
    let failures: Vec<serde_json::Value> = run
        .failures
        .iter()
        .map(|(class, msg)| json!({"class": *class as u8, "message": msg}))
        .collect();
    let manifest = json!({
        "tool_version": TOOL_VERSION,
        "command": format!("{:?}", cli.command),
        "model_path": cli.model.display().to_string(),
        "model_sha256": model_sha256,
        "seed": cli.seed,
        "format": cli.format,
        "tolerances": spec_tolerances,
        "outputs": run.outputs,
        "failures": failures,
        "error": error,
    });
    let path = Path::new(&run.out_dir).join("manifest.json");
    if let Ok(mut text) = serde_json::to_string_pretty(&manifest) {
        text.push('\n');
        let _ = std::fs::write(path, text);
    }
}
