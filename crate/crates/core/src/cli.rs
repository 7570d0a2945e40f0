//! Command-line front end. Exit codes: 0 success or smooth, 10 corners,
//! 20 indeterminate, 1 other failures, 2 invalid domain, 3 insufficient
//! spectrum, 4 missing artifacts, 64 usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytic_spectra::detect_reference_family;
use crate::asymptotic_fit::{fit_report, fit_spectrum, half_window_fit, ModelTerms, WindowConfig, DEFAULT_KAPPA};
use crate::classifier::{decide, DEFAULT_DECISION_Z};
use crate::error::{Error, Result};
use crate::fem::{fem_spectrum, FemOptions, DEFAULT_GRADING};
use crate::geometry::{shapes, DomainSpec};
use crate::heat_trace::theoretical_coefficients;
use crate::io;
use crate::spectrum::Spectrum;
use crate::verify::{self, VerifyConfig};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_DOMAIN: i32 = 2;
pub const EXIT_INSUFFICIENT: i32 = 3;
pub const EXIT_MISSING: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

pub const DEFAULT_H: f64 = 0.02;
pub const DEFAULT_COUNT: usize = 400;
pub const DEFAULT_CUTOFF: f64 = 1e5;
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const TRACE_FILE: &str = "trace.csv";
pub const MESH_FILE: &str = "mesh.txt";
pub const RESIDUAL_TABLE: &str = "fit_residuals.csv";
pub const POLYGON_TABLE: &str = "polygon_a0.csv";
/// Largest `n` in the regular-polygon table.
pub const POLYGON_TABLE_MAX: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "spectral-corners", version, about = "Hear the corners of a planar drum from its Dirichlet spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a spectrum: closed form for reference domains, FEM otherwise.
    Spectrum {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit the heat trace and decide whether the domain has corners.
    Classify {
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the bundled verification corpus.
    Verify {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Fault injection: shift every fitted a0 before classification.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        inject_a0_shift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export plot tables from a spectrum artifact.
    Plotdata {
        /// Spectrum file, or a directory holding `spectrum.csv`.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_KAPPA)]
        kappa: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long, conflicts_with = "domain")]
    spectrum: Option<PathBuf>,
    /// Eigenvalue cutoff Λ (closed-form spectra; truncates FEM spectra).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Number of FEM modes.
    #[arg(long)]
    count: Option<usize>,
    /// Finest FEM mesh size.
    #[arg(long)]
    h: Option<f64>,
    /// Corner grading exponent in (0, 1]; 1 disables grading.
    #[arg(long)]
    grading: Option<f64>,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    chi: i64,
    #[arg(long = "decision-z", default_value_t = DEFAULT_DECISION_Z)]
    decision_z: f64,
}

#[derive(Debug)]
struct Usage(String);

fn usage(msg: impl Into<String>) -> std::result::Result<(), Usage> {
    Err(Usage(msg.into()))
}

fn positive(name: &str, v: Option<f64>) -> std::result::Result<(), Usage> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => usage(format!("--{name} must be positive, got {x}")),
        _ => Ok(()),
    }
}

impl SolverArgs {
    fn validate(&self, need_input: bool) -> std::result::Result<(), Usage> {
        if need_input && self.domain.is_none() && self.spectrum.is_none() {
            return usage("one of --domain or --spectrum is required");
        }
        positive("cutoff", self.cutoff)?;
        positive("h", self.h)?;
        if let Some(g) = self.grading {
            if !(g > 0.0 && g <= 1.0) {
                return usage(format!("--grading must lie in (0, 1], got {g}"));
            }
        }
        if self.count == Some(0) {
            return usage("--count must be at least 1");
        }
        if self.spectrum.is_some() && (self.count.is_some() || self.h.is_some() || self.grading.is_some()) {
            return usage("--count, --h and --grading apply only with --domain");
        }
        Ok(())
    }
}

impl FitArgs {
    fn validate(&self) -> std::result::Result<(), Usage> {
        positive("kappa", Some(self.kappa))?;
        positive("decision-z", Some(self.decision_z))?;
        if self.chi > 1 {
            return usage(format!("--chi must be at most 1 for planar domains, got {}", self.chi));
        }
        Ok(())
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDomain { .. } | Error::Parse { .. } => EXIT_INVALID_DOMAIN,
        Error::InsufficientSpectrum { .. } | Error::EmptySpectrum(_) => EXIT_INSUFFICIENT,
        _ => EXIT_FAILURE,
    }
}

fn read_input<T>(path: &Path, read: impl Fn(&Path) -> Result<T>) -> std::result::Result<T, (i32, String)> {
    if !path.exists() {
        return Err((EXIT_MISSING, format!("missing input {}", path.display())));
    }
    read(path).map_err(|e| (exit_code(&e), e.to_string()))
}

struct Computed {
    spectrum: Spectrum<f64>,
    domain: Option<DomainSpec<f64>>,
    inputs: Vec<(String, String)>,
    mesh: Option<String>,
}

impl Computed {
    // Output files carry the tool version and every input digest and setting.
    fn stamped(spectrum: Spectrum<f64>, domain: Option<DomainSpec<f64>>, inputs: Vec<(String, String)>, mesh: Option<String>) -> Self {
        let mut spectrum = spectrum.with_annotation("tool", env!("CARGO_PKG_NAME")).with_annotation("version", env!("CARGO_PKG_VERSION"));
        for (k, v) in &inputs {
            spectrum = spectrum.with_annotation(k.as_str(), v);
        }
        let mesh = mesh.map(|m| io::provenance_line(&inputs) + &m);
        Self { spectrum, domain, inputs, mesh }
    }
}

fn obtain_spectrum(args: &SolverArgs) -> std::result::Result<Computed, (i32, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    if let Some(path) = &args.spectrum {
        let spectrum = read_input(path, io::read_spectrum)?;
        let spectrum = match args.cutoff {
            Some(c) => spectrum.truncated(c).map_err(fail)?,
            None => spectrum,
        };
        let inputs = vec![("spectrum.sha256".into(), io::file_digest(path).map_err(fail)?)];
        return Ok(Computed::stamped(spectrum, None, inputs, None));
    }
    let path = args.domain.as_ref().expect("validated");
    let domain = read_input(path, io::read_domain)?;
    let mut inputs = vec![("domain.sha256".into(), io::file_digest(path).map_err(fail)?)];
    let (spectrum, mesh) = match detect_reference_family(&domain) {
        Some(family) if args.h.is_none() && args.count.is_none() => {
            let cutoff = args.cutoff.unwrap_or(DEFAULT_CUTOFF);
            inputs.push(("setting.cutoff".into(), cutoff.to_string()));
            let s = family.spectrum(cutoff).map_err(fail)?.with_annotation("family", family.name());
            (s, None)
        }
        _ => {
            let h = args.h.unwrap_or(DEFAULT_H);
            let count = args.count.unwrap_or(DEFAULT_COUNT);
            let mut options = FemOptions::new(h, count);
            options.mesh = options.mesh.with_grading(args.grading.unwrap_or(DEFAULT_GRADING));
            options.eigen.seed = args.seed;
            inputs.extend([
                ("setting.h".into(), h.to_string()),
                ("setting.count".into(), count.to_string()),
                ("setting.grading".into(), options.mesh.grading.to_string()),
                ("setting.seed".into(), args.seed.to_string()),
            ]);
            let result = fem_spectrum(&domain, &options).map_err(fail)?;
            let spectrum = match args.cutoff {
                Some(c) => result.spectrum.truncated(c).map_err(fail)?,
                None => result.spectrum,
            };
            (spectrum, Some(result.mesh.to_table()))
        }
    };
    Ok(Computed::stamped(spectrum, Some(domain), inputs, mesh))
}

fn write(path: &Path, text: &str) -> std::result::Result<(), (i32, String)> {
    io::write_text(path, text).map_err(|e| (EXIT_FAILURE, format!("cannot write {}: {e}", path.display())))
}

fn cmd_spectrum(solver: &SolverArgs, out: &Path) -> std::result::Result<i32, (i32, String)> {
    let c = obtain_spectrum(solver)?;
    write(&out.join(SPECTRUM_FILE), &io::spectrum_to_text(&c.spectrum))?;
    if let Some(mesh) = &c.mesh {
        write(&out.join(MESH_FILE), mesh)?;
    }
    println!(
        "{} spectrum of {}: {} eigenvalues, complete to {:.6e} -> {}",
        c.spectrum.source(),
        c.spectrum.domain_label(),
        c.spectrum.len(),
        c.spectrum.cutoff(),
        out.join(SPECTRUM_FILE).display()
    );
    Ok(0)
}

fn cmd_classify(solver: &SolverArgs, fit: &FitArgs, out: &Path) -> std::result::Result<i32, (i32, String)> {
    let fail = |e: Error| {
        let code = exit_code(&e);
        (code, e.to_string())
    };
    let c = obtain_spectrum(solver)?;
    if c.domain.is_some() {
        write(&out.join(SPECTRUM_FILE), &io::spectrum_to_text(&c.spectrum))?;
    }
    let window = WindowConfig { kappa: fit.kappa, ..WindowConfig::default() };
    let terms = ModelTerms::blind();
    let pipeline = fit_spectrum(&c.spectrum, &window, &terms).map_err(fail)?;
    let half = half_window_fit(&c.spectrum, &pipeline, &terms).map_err(fail)?;
    let mut inputs = c.inputs.clone();
    inputs.push(("setting.kappa".into(), fit.kappa.to_string()));
    write(&out.join(TRACE_FILE), &(io::provenance_line(&inputs) + &io::trace_to_text(&pipeline.samples)))?;
    let verdict = decide(pipeline.fit, &half, fit.chi, fit.decision_z).map_err(fail)?;
    let theory = c.domain.as_ref().map(theoretical_coefficients).transpose().map_err(fail)?;
    let mut report = fit_report(&verdict.fit, theory.as_ref());
    report.verdict = Some(verdict.record());
    for (k, v) in c.inputs {
        report = report.with_input(k, v);
    }
    report = report
        .with_input("setting.kappa", fit.kappa.to_string())
        .with_input("setting.chi", fit.chi.to_string())
        .with_input("setting.decision_z", fit.decision_z.to_string());
    write(&out.join(REPORT_FILE), &report.to_toml().map_err(fail)?)?;
    println!(
        "{}: a0 = {:.6} ± {:.2e} (threshold {:.6}, margin {:.2}) -> {}",
        verdict.decision,
        verdict.a0_estimate,
        verdict.uncertainty,
        verdict.threshold,
        verdict.margin,
        out.join(REPORT_FILE).display()
    );
    Ok(verdict.decision.exit_code())
}

fn cmd_verify(config: VerifyConfig, out: Option<&Path>) -> std::result::Result<i32, (i32, String)> {
    if let Some(f) = &config.filter {
        if !verify::row_ids().iter().any(|id| verify::filter_matches(f, id)) {
            return Err((EXIT_USAGE, format!("--filter {f:?} matches no verification row")));
        }
    }
    let rows = verify::run(&config);
    let text = verify::render(&rows);
    print!("{text}");
    if let Some(dir) = out {
        let mut inputs = vec![("setting.seed".to_string(), config.seed.to_string()), ("setting.a0_shift".into(), config.a0_shift.to_string())];
        if let Some(f) = &config.filter {
            inputs.push(("setting.filter".into(), f.clone()));
        }
        write(&dir.join("verify.txt"), &(io::provenance_line(&inputs) + &text))?;
        let failed: Vec<String> = rows.iter().filter(|r| !r.passed).map(|r| r.id()).collect();
        write(&dir.join("failures.txt"), &(io::provenance_line(&inputs) + &failed.iter().map(|f| format!("{f}\n")).collect::<String>()))?;
    }
    Ok(if rows.iter().all(|r| r.passed) { 0 } else { EXIT_FAILURE })
}

fn cmd_plotdata(spectrum: Option<&Path>, kappa: f64, out: &Path) -> std::result::Result<i32, (i32, String)> {
    use std::fmt::Write;
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let Some(path) = spectrum else {
        return Err((EXIT_MISSING, "plotdata needs a spectrum artifact (--spectrum)".into()));
    };
    let path = if path.is_dir() { path.join(SPECTRUM_FILE) } else { path.to_path_buf() };
    let s = read_input(&path, io::read_spectrum)?;
    let inputs = [("spectrum.sha256".to_string(), io::file_digest(&path).map_err(fail)?), ("setting.kappa".into(), kappa.to_string())];
    let window = WindowConfig { kappa, ..WindowConfig::default() };
    let pipeline = fit_spectrum(&s, &window, &ModelTerms::blind()).map_err(fail)?;
    let c = &pipeline.fit.coefficients;
    let mut table = io::provenance_line(&inputs);
    let _ = write!(
        table,
        "# a_minus1={:e} a_minus_half={:e} a0={:e} a_half={:e} max_rel_residual={:e}\nt,h,model,residual,remainder\n",
        c.a_minus1,
        c.a_minus_half,
        c.a0,
        c.a_half,
        pipeline.fit.max_rel_residual
    );
    // remainder: h minus the three-term expansion, i.e. what the sqrt(t) term has to absorb
    for (&t, &h) in pipeline.samples.grid.iter().zip(&pipeline.samples.values) {
        let model = pipeline.fit.model(t);
        let three_term = c.a_minus1 / t + c.a_minus_half / t.sqrt() + c.a0;
        let _ = writeln!(table, "{t:.16e},{h:.16e},{model:.16e},{:.16e},{:.16e}", h - model, h - three_term);
    }
    write(&out.join(RESIDUAL_TABLE), &table)?;
    let mut polygons = io::provenance_line(&[]) + "n,a0\n";
    for n in 3..=POLYGON_TABLE_MAX {
        let a0 = theoretical_coefficients(&shapes::regular_polygon(n, 1.0).map_err(fail)?).map_err(fail)?.a0;
        let _ = writeln!(polygons, "{n},{a0:.16e}");
    }
    write(&out.join(POLYGON_TABLE), &polygons)?;
    println!("wrote {} and {}", out.join(RESIDUAL_TABLE).display(), out.join(POLYGON_TABLE).display());
    Ok(0)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let checked = match &cli.command {
        Command::Spectrum { solver, .. } => solver.validate(true),
        Command::Classify { solver, fit, .. } => solver.validate(true).and_then(|_| fit.validate()),
        Command::Verify { inject_a0_shift, .. } => {
            if inject_a0_shift.is_finite() {
                Ok(())
            } else {
                usage("--inject-a0-shift must be finite")
            }
        }
        Command::Plotdata { kappa, .. } => positive("kappa", Some(*kappa)),
    };
    if let Err(Usage(msg)) = checked {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let result = match &cli.command {
        Command::Spectrum { solver, out } => cmd_spectrum(solver, out),
        Command::Classify { solver, fit, out } => cmd_classify(solver, fit, out),
        Command::Verify { filter, seed, inject_a0_shift, out } => {
            cmd_verify(VerifyConfig { filter: filter.clone(), seed: *seed, a0_shift: *inject_a0_shift }, out.as_deref())
        }
        Command::Plotdata { spectrum, kappa, out } => cmd_plotdata(spectrum.as_deref(), *kappa, out),
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
