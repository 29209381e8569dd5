//! `osc-spectra` command line: `spectrum`, `verify` and `accumulation`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::{
    self, LatticeParams, Multiplicity, SpectralLine, SpinStructure, SymmetryClass, TableCell,
    DEFAULT_SHIFT_SEARCH, TABLE_COLS, TABLE_ROWS,
};
use crate::reps::IrrepLabel;
use crate::surd::Scalar;
use crate::verify::{self, Suite, VerifyOptions};

pub const THREADS_ENV: &str = "OSC_SPECTRA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "osc-spectra", version, about = "Dirac spectra on compact oscillator quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Point spectrum of -Omega or D^t on L \ Osc_1.
    Spectrum(SpectrumArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
    /// Eigenvalues of Omega near an accumulation point for a shifted lattice.
    Accumulation(AccumulationArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Casimir,
    Dirac,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(clap::Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub kappa: u32,
    /// Rational, surd (`sqrt2`, `1/2*sqrt3`) or float.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub mu: Scalar,
    #[arg(long, default_value = "1")]
    pub nu: Scalar,
    /// Four bits eps1..eps4, e.g. 0101.
    #[arg(long)]
    pub eps: String,
    #[arg(long, default_value = "1/3", allow_hyphen_values = true)]
    pub t: Scalar,
    #[arg(long)]
    pub cutoff: f64,
    #[arg(long, value_enum, default_value = "casimir")]
    pub operator: Operator,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 64)]
    pub trunc: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(clap::Args, Debug)]
pub struct AccumulationArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub utilde: Scalar,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, default_value_t = 1)]
    pub kappa: u32,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub mu: Scalar,
    #[arg(long, default_value = "1")]
    pub nu: Scalar,
    /// Defaults to eps3 = 0, eps4 = kappa mod 2, the only admissible choice up to (eps1, eps2).
    #[arg(long)]
    pub eps: Option<String>,
    /// Largest |m| searched.
    #[arg(long, default_value_t = DEFAULT_SHIFT_SEARCH)]
    pub search: i128,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

/// Exit status for an error: 2 for bad input, 3 when the two spectrum routes disagree.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpin(_)
        | Error::InvalidArgument(_)
        | Error::InvalidLabel(_)
        | Error::Surd(_)
        | Error::MalformedAutomorphism(_)
        | Error::CTypeLabel => 2,
        Error::RouteMismatch(_) => 3,
        _ => 1,
    }
}

/// Eigenvalue as decimal strings with 15 significant digits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocEigenvalue {
    pub re: String,
    pub im: String,
}

fn fmt15(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

impl DocEigenvalue {
    pub fn new(z: Complex64) -> Self {
        DocEigenvalue {
            re: fmt15(z.re),
            im: fmt15(z.im),
        }
    }

    pub fn value(&self) -> Result<Complex64, Error> {
        let p = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad eigenvalue component `{s}`")))
        };
        Ok(Complex64::new(p(&self.re)?, p(&self.im)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocLine {
    pub eigenvalue: DocEigenvalue,
    pub multiplicity: Multiplicity,
    pub sources: Vec<IrrepLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocMetadata {
    pub lattice: LatticeParams,
    pub eps: SpinStructure,
    pub t: Scalar,
    pub cutoff: f64,
    pub operator: Operator,
    pub beta: f64,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocFlags {
    /// Read off the computed lines.
    pub symmetry: SymmetryClass,
    /// Predicted from the spin structure.
    pub predicted_symmetry: SymmetryClass,
    /// Lattice and spin structure after the (1,0) -> (0,1) swap, when it was applied.
    pub normalization: Option<(LatticeParams, SpinStructure)>,
    pub grouped_by_tolerance: bool,
    pub cell: TableCell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub metadata: DocMetadata,
    pub lines: Vec<DocLine>,
    pub flags: DocFlags,
}

impl SpectrumDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(format!("spectrum document: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eigenvalue_re,eigenvalue_im,multiplicity,sources\n");
        for l in &self.lines {
            let src: Vec<String> = l.sources.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},\"{}\"",
                l.eigenvalue.re,
                l.eigenvalue.im,
                l.multiplicity,
                src.join(";")
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(
            out,
            "r={} kappa={} mu={} nu={} eps={} operator={:?} t={} cutoff={} beta={:.12}",
            m.lattice.r, m.lattice.kappa, m.lattice.mu, m.lattice.nu, m.eps, m.operator, m.t, m.cutoff, m.beta
        );
        if let Some((l, e)) = &self.flags.normalization {
            let _ = writeln!(out, "normalized to mu={} nu={} eps={}", l.mu, l.nu, e);
        }
        let _ = writeln!(out, "spec(-Omega) by (eps1,eps2) x (eps3, eps4+kappa):");
        let _ = write!(out, "{:>8}", "");
        for c in TABLE_COLS {
            let _ = write!(out, "{:>16}", format!("({},{})", c.0, c.1));
        }
        out.push('\n');
        for r in TABLE_ROWS {
            let _ = write!(out, "{:>8}", format!("({},{})", r.0, r.1));
            for c in TABLE_COLS {
                let cell = lattice::table_entry(r, c);
                let mut text = match cell.a_part {
                    Some(j) => format!("A{j} u {}", cell.beta_part.describe()),
                    None => cell.beta_part.describe().to_string(),
                };
                if cell == self.flags.cell {
                    text = format!("[{text}]");
                }
                let _ = write!(out, "{text:>16}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "symmetry: {:?} (predicted {:?}); {} lines",
            self.flags.symmetry,
            self.flags.predicted_symmetry,
            self.lines.len()
        );
        let _ = writeln!(out, "{:>24} {:>24} {:>6}  sources", "re", "im", "mult");
        for l in &self.lines {
            let src: Vec<String> = l.sources.iter().take(3).map(|s| s.to_string()).collect();
            let more = if l.sources.len() > 3 {
                format!(" +{}", l.sources.len() - 3)
            } else {
                String::new()
            };
            let _ = writeln!(
                out,
                "{:>24} {:>24} {:>6}  {}{}",
                l.eigenvalue.re,
                l.eigenvalue.im,
                l.multiplicity.to_string(),
                src.join(" "),
                more
            );
        }
        out
    }
}

fn doc_lines(lines: &[SpectralLine]) -> Vec<DocLine> {
    lines
        .iter()
        .map(|l| DocLine {
            eigenvalue: DocEigenvalue::new(l.eigenvalue),
            multiplicity: l.multiplicity,
            sources: l.sources.clone(),
        })
        .collect()
}

pub fn spectrum_document(a: &SpectrumArgs) -> Result<SpectrumDocument, Error> {
    let l = LatticeParams::new(a.r, a.kappa, a.mu, a.nu)?;
    let eps: SpinStructure = a.eps.parse()?;
    eps.validate(l.r)?;
    if !(a.cutoff.is_finite() && a.cutoff >= 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff must be finite and >= 0, got {}", a.cutoff)));
    }
    let detailed = lattice::casimir_spectrum_detailed(&l, &eps, a.cutoff)?;
    let lines = match a.operator {
        Operator::Casimir => detailed.lines.clone(),
        Operator::Dirac => lattice::dirac_point_spectrum(&l, &eps, a.t.value(), a.cutoff)?,
    };
    Ok(SpectrumDocument {
        metadata: DocMetadata {
            lattice: l,
            eps,
            t: a.t,
            cutoff: a.cutoff,
            operator: a.operator,
            beta: l.beta(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        flags: DocFlags {
            symmetry: lattice::negation_closure(&lines),
            predicted_symmetry: lattice::symmetry_check(&l, &eps)?,
            normalization: detailed.normalized,
            grouped_by_tolerance: detailed.grouped_by_tolerance,
            cell: detailed.cell,
        },
        lines: doc_lines(&lines),
    })
}

fn cmd_spectrum(a: &SpectrumArgs, out: &mut dyn std::io::Write) -> Result<i32, Error> {
    let doc = spectrum_document(a)?;
    let text = match a.format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
        Format::Table => doc.to_table(),
    };
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(0)
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("write failed: {e}"))
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn std::io::Write) -> Result<i32, Error> {
    let start = Instant::now();
    let checks = verify::run_suite(
        a.suite,
        &VerifyOptions {
            trunc: a.trunc,
            seed: a.seed,
        },
    )?;
    let failed: Vec<&verify::Check> = checks.iter().filter(|c| !c.passed()).collect();
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&checks).expect("checks serialize")).map_err(io_err)?;
    } else {
        for c in &checks {
            writeln!(out, "{c}").map_err(io_err)?;
        }
        writeln!(
            out,
            "{} checks, {} failed, {:.2}s",
            checks.len(),
            failed.len(),
            start.elapsed().as_secs_f64()
        )
        .map_err(io_err)?;
    }
    for c in &failed {
        eprintln!("failed: {} / {}", c.suite, c.name);
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

fn cmd_accumulation(a: &AccumulationArgs, out: &mut dyn std::io::Write) -> Result<i32, Error> {
    let l = LatticeParams::new(a.r, a.kappa, a.mu, a.nu)?;
    let eps: SpinStructure = match &a.eps {
        Some(s) => s.parse()?,
        None => SpinStructure::new([0, 0, 0, (a.kappa % 2) as u8])?,
    };
    let report = lattice::accumulation_report(&l, &eps, &a.utilde, a.count, a.search)?;
    let spec = lattice::shifted_spectrum(&l, &eps, &a.utilde, a.count, a.search)?;
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    if a.format == Format::Json {
        #[derive(Serialize)]
        struct Doc<'a> {
            smallest: &'a lattice::ShiftedSpectrum,
            report: &'a lattice::AccumulationReport,
        }
        let doc = Doc {
            smallest: &spec,
            report: &report,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes")).map_err(io_err)?;
        return Ok(0);
    }
    let b = report.beta;
    let mut s = String::new();
    let _ = writeln!(s, "utilde={} beta={:.12} eps={} search |m|<={}", report.utilde, b, eps, report.m_max);
    let _ = writeln!(s, "{} smallest |eigenvalues| of Omega:", spec.values.len());
    for (v, (m, n)) in spec.values.iter().zip(&spec.pairs) {
        let v = if *v == 0.0 { 0.0 } else { *v };
        let _ = writeln!(s, "  {:>22.14e}  ({:>+.10} beta)  m'={m} n'={n}", v, v / b);
    }
    let _ = writeln!(s, "convergents:");
    let _ = writeln!(s, "{:>12} {:>12} {:>6} {:>20} {:>20} {:>12}", "m'", "n'", "pell", "Omega/beta", "limit/beta", "distance");
    for c in &report.convergents {
        let fmt_opt = |x: Option<f64>, w: usize| x.map_or(format!("{:>w$}", "-"), |v| format!("{:>w$.12}", v));
        let _ = writeln!(
            s,
            "{:>12} {:>12} {:>6} {:>20.12} {} {}",
            c.m,
            c.n,
            c.pell.map_or("-".to_string(), |p| p.to_string()),
            c.omega_eigenvalue / b,
            fmt_opt(c.limit.map(|x| x / b), 20),
            fmt_opt(c.distance.map(|x| x / b), 12),
        );
    }
    let pts: Vec<String> = report.accumulation_points.iter().map(|x| format!("{:.12}", x / b)).collect();
    let _ = writeln!(s, "accumulation points (units of beta): {}", pts.join(", "));
    let _ = writeln!(
        s,
        "distinct eigenvalues in [-8 beta, 0): Omega {}, -Omega {}",
        report.omega_in_window, report.neg_omega_in_window
    );
    out.write_all(s.as_bytes()).map_err(io_err)?;
    Ok(0)
}

/// Caps the global rayon pool at OSC_SPECTRA_THREADS when set.
pub fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a positive integer")))?;
        // a pool built earlier in the process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run_with(cli: Cli, out: &mut dyn std::io::Write) -> i32 {
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Accumulation(a) => cmd_accumulation(a, out),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = run_with(cli, &mut lock);
    let _ = lock.flush();
    code
}
