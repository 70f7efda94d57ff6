//! Command-line interface: validation, cohomology reports, Hodge-locus
//! scans, doubles and catalog export for torus-quotient data files.
//!
//! Exit codes: 0 success/valid, 1 invalid data, 2 I/O or parse error,
//! 3 internal consistency failure.

use clap::{Parser, Subcommand};
use flatkahler::catalog;
use flatkahler::cohomology::{
    betti_numbers, hodge_numbers, holomorphic_two_forms, invariant_two_forms, CohomologyError,
    TwoForm,
};
use flatkahler::crystal::{validate, CrystalError, FlatKahlerData, ValidationReport};
use flatkahler::doubles::{coquaternionic_double, quaternionic_double};
use flatkahler::hyperhermitian::assemble;
use flatkahler::numeric::symmetric_eigenvalues;
use flatkahler::tol::{DEFAULT_CLOSURE_CAP, DEFAULT_GRID, TAU_FULL};
use flatkahler::twistor::{scan_locus, twistor_grid, LocusReport};
use flatkahler_cli::format::{self, FormatError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "flatkahler",
    version,
    about = "Flat Kähler manifolds as torus quotients: validate, compute invariants, scan twistor Hodge loci, build doubles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a manifold file: group closure, freeness, holomorphy.
    Validate {
        path: PathBuf,
        /// Cap on the group closure size.
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        cap: usize,
    },
    /// Print the Betti table and Hodge diamond.
    Hodge { path: PathBuf },
    /// Report whether the manifold admits a non-algebraic deformation.
    Obstruct { path: PathBuf },
    /// Scan the twistor sphere for the Hodge locus of rational 2-form classes.
    Scan {
        path: PathBuf,
        /// Index into the rational invariant 2-form basis.
        #[arg(long, conflicts_with = "all")]
        form: Option<usize>,
        /// Scan every basis form (requires --out; files get numbered).
        #[arg(long)]
        all: bool,
        /// Number of sphere sample points.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Output CSV file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Index of the holomorphic 2-form seeding the twistor family
        /// (defaults to the first basis element).
        #[arg(long, default_value_t = 0)]
        sigma: usize,
    },
    /// Write the quaternionic (or co-quaternionic) double as a manifold file.
    Double {
        path: PathBuf,
        /// Build the co-quaternionic double (cotangent construction).
        #[arg(long)]
        co: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a catalog entry as a manifold file, or list all entries.
    Catalog {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// List the available entries.
        #[arg(long)]
        list: bool,
    },
    /// Bounded-height search for a rational polarization (a G-invariant
    /// rational (1,1)-class with positive associated form). Finding one
    /// certifies algebraicity; not finding one is inconclusive.
    CertifyNonalgebraic {
        path: PathBuf,
        /// Coefficient height bound for the integer combinations.
        #[arg(long, default_value_t = 3)]
        height: i64,
    },
}

enum CliError {
    Invalid(String),
    Io(String),
    Parse(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) | CliError::Parse(m) | CliError::Internal(m) => {
                m
            }
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Malformed(m) => CliError::Parse(m),
            FormatError::Invalid(m) => CliError::Invalid(m),
        }
    }
}

impl From<CrystalError> for CliError {
    fn from(e: CrystalError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<CohomologyError> for CliError {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::NonIntegralInvariant { .. }
            | CohomologyError::RoundingFailure { .. }
            | CohomologyError::Inconsistent(_) => CliError::Internal(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<FlatKahlerData, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(format::parse_str(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn render_report(data: &FlatKahlerData, report: &ValidationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("label: {}\n", data.label()));
    out.push_str(&format!(
        "lattice rank: {} (complex dimension {})\n",
        data.rank(),
        data.n()
    ));
    out.push_str(&format!("group order: {}\n", report.group_order));
    out.push_str(&format!(
        "closed under composition: {}\n",
        if report.closed { "yes" } else { "NO" }
    ));
    out.push_str(&format!(
        "complex structure residual |J^2 + Id|: {:e}\n",
        report.cplx_residual
    ));
    out.push_str(&format!(
        "holomorphic: {} (max commutator residual {:e})\n",
        if report.holomorphic { "yes" } else { "NO" },
        report.max_commutator_residual
    ));
    match (&report.free, &report.freeness_witness) {
        (true, _) => out.push_str("free: yes\n"),
        (false, Some(w)) => {
            let point: Vec<String> = w.fixed_point.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!(
                "free: NO (element with rotation {:?} fixes ({}))\n",
                w.element.rotation(),
                point.join(", ")
            ));
        }
        (false, None) => out.push_str("free: NO\n"),
    }
    out.push_str(&format!(
        "verdict: {}\n",
        if report.is_valid() {
            "VALID"
        } else {
            "INVALID"
        }
    ));
    out
}

fn ensure_valid(data: &FlatKahlerData, cap: usize) -> Result<ValidationReport, CliError> {
    let report = validate(data, cap)?;
    if report.is_valid() {
        Ok(report)
    } else {
        Err(CliError::Invalid(format!(
            "data does not describe a flat Kähler quotient:\n{}",
            render_report(data, &report)
        )))
    }
}

fn cmd_validate(path: &Path, cap: usize) -> Result<(), CliError> {
    let data = load(path)?;
    let report = validate(&data, cap)?;
    print!("{}", render_report(&data, &report));
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Invalid("validation failed".to_string()))
    }
}

fn cmd_hodge(path: &Path) -> Result<(), CliError> {
    let data = load(path)?;
    ensure_valid(&data, DEFAULT_CLOSURE_CAP)?;
    let betti = betti_numbers(&data)?;
    let diamond = hodge_numbers(&data)?;
    println!("label: {}", data.label());
    let row: Vec<String> = betti
        .iter()
        .enumerate()
        .map(|(k, b)| format!("b_{k} = {b}"))
        .collect();
    println!("betti: {}", row.join(", "));
    println!("hodge diamond h^(p,q), rows p = 0..n, columns q = 0..n:");
    for p in 0..=data.n() {
        let row: Vec<String> = (0..=data.n())
            .map(|q| diamond.h[p][q].to_string())
            .collect();
        println!("  [{}]", row.join(", "));
    }
    Ok(())
}

fn cmd_obstruct(path: &Path) -> Result<(), CliError> {
    let data = load(path)?;
    ensure_valid(&data, DEFAULT_CLOSURE_CAP)?;
    let diamond = hodge_numbers(&data)?;
    let h20 = diamond.h20();
    println!(
        "non-algebraic deformations: {} (h^{{2,0}} = {})",
        if h20 > 0 { "YES" } else { "NO" },
        h20
    );
    Ok(())
}

fn render_csv(report: &LocusReport) -> String {
    let grid = twistor_grid(report.grid_size);
    let mut out = String::with_capacity(report.grid_size * 32);
    out.push_str("q_a,q_b,q_c,residual\n");
    for (point, residual) in grid.iter().zip(&report.residuals) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            point.a, point.b, point.c, residual
        ));
    }
    let points: Vec<String> = report
        .points
        .iter()
        .map(|p| format!("({},{},{})", p.a, p.b, p.c))
        .collect();
    out.push_str(&format!(
        "# classification={} points={}\n",
        report.classification,
        points.join(";")
    ));
    out
}

fn numbered_path(base: &Path, index: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("scan");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.{index}.{ext}"))
}

fn cmd_scan(
    path: &Path,
    form: Option<usize>,
    all: bool,
    grid: usize,
    out: Option<&Path>,
    sigma_index: usize,
) -> Result<(), CliError> {
    let data = load(path)?;
    ensure_valid(&data, DEFAULT_CLOSURE_CAP)?;
    let basis = invariant_two_forms(&data)?;
    let holomorphic = holomorphic_two_forms(&data)?;
    if holomorphic.is_empty() {
        return Err(CliError::Invalid(
            "no holomorphic 2-form: the twistor family is undefined (h^{2,0} = 0)".to_string(),
        ));
    }
    let sigma = holomorphic.get(sigma_index).ok_or_else(|| {
        CliError::Invalid(format!(
            "sigma index {sigma_index} out of range: {} holomorphic directions",
            holomorphic.len()
        ))
    })?;
    let hyper = assemble(&data, sigma).map_err(|e| CliError::Invalid(e.to_string()))?;
    let indices: Vec<usize> = if all {
        (0..basis.len()).collect()
    } else {
        let idx = form.unwrap_or(0);
        if idx >= basis.len() {
            return Err(CliError::Invalid(format!(
                "form index {idx} out of range: the invariant basis has {} elements",
                basis.len()
            )));
        }
        vec![idx]
    };
    if all && out.is_none() {
        return Err(CliError::Invalid("--all requires --out".to_string()));
    }
    for &idx in &indices {
        let report =
            scan_locus(&hyper, &basis[idx], grid).map_err(|e| CliError::Invalid(e.to_string()))?;
        let csv = render_csv(&report);
        match out {
            Some(base) if all => write_file(&numbered_path(base, idx), &csv)?,
            Some(base) => write_file(base, &csv)?,
            None => print!("{csv}"),
        }
        eprintln!(
            "form {idx}: {} ({} points, residual range [{:e}, {:e}])",
            report.classification,
            report.points.len(),
            report.min_residual,
            report.max_residual
        );
    }
    Ok(())
}

fn cmd_double(path: &Path, co: bool, out: &Path) -> Result<(), CliError> {
    let data = load(path)?;
    ensure_valid(&data, DEFAULT_CLOSURE_CAP)?;
    let result = if co {
        coquaternionic_double(&data)
    } else {
        quaternionic_double(&data)
    }
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    write_file(out, &format::to_canonical_string(&result.data)?)?;
    eprintln!(
        "wrote {} (complex dimension {})",
        result.data.label(),
        result.data.n()
    );
    Ok(())
}

fn cmd_catalog(name: Option<&str>, out: Option<&Path>, list: bool) -> Result<(), CliError> {
    if list || name.is_none() {
        println!("{:<36} {:>5}  description", "name", "dim");
        for entry in catalog::list_catalog() {
            println!(
                "{:<36} {:>5}  {}",
                entry.name, entry.complex_dim, entry.description
            );
        }
        return Ok(());
    }
    let name = name.unwrap();
    let data = catalog::build(name)
        .ok_or_else(|| CliError::Invalid(format!("unknown catalog entry `{name}`")))?;
    let text = format::to_canonical_string(&data)?;
    match out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_certify_nonalgebraic(path: &Path, height: i64) -> Result<(), CliError> {
    if height < 1 {
        return Err(CliError::Invalid("height must be at least 1".to_string()));
    }
    let data = load(path)?;
    ensure_valid(&data, DEFAULT_CLOSURE_CAP)?;
    let basis = invariant_two_forms(&data)?;
    let k = basis.len();
    let states = (2.0 * height as f64 + 1.0).powi(k as i32);
    if states > 2e7 {
        return Err(CliError::Invalid(format!(
            "search space of {states:.1e} combinations is too large (basis size {k}, height {height})"
        )));
    }
    let j = data.cplx();
    let mut coeffs = vec![-height; k];
    let mut scanned = 0u64;
    loop {
        if coeffs.iter().any(|&c| c != 0) {
            scanned += 1;
            let alpha = TwoForm::integer_combination(&basis, &coeffs)?;
            let a = alpha.matrix();
            let residual = (j.transpose() * a * j - a).norm() / a.norm();
            if residual <= TAU_FULL {
                let sym = a * j;
                let sym_defect = (&sym - sym.transpose()).norm() / sym.norm().max(1e-300);
                let min_eig = symmetric_eigenvalues(&((&sym + sym.transpose()) * 0.5))[0];
                if sym_defect <= 1e-8 && min_eig > 0.0 {
                    println!("polarization found: coefficients {coeffs:?} (smallest eigenvalue {min_eig:.3e})");
                    println!("the manifold is algebraic");
                    return Ok(());
                }
            }
        }
        let mut idx = 0;
        loop {
            if idx == k {
                println!("none up to height {height} (inconclusive); scanned {scanned} classes");
                return Ok(());
            }
            coeffs[idx] += 1;
            if coeffs[idx] <= height {
                break;
            }
            coeffs[idx] = -height;
            idx += 1;
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { path, cap } => cmd_validate(&path, cap),
        Command::Hodge { path } => cmd_hodge(&path),
        Command::Obstruct { path } => cmd_obstruct(&path),
        Command::Scan {
            path,
            form,
            all,
            grid,
            out,
            sigma,
        } => cmd_scan(&path, form, all, grid, out.as_deref(), sigma),
        Command::Double { path, co, out } => cmd_double(&path, co, &out),
        Command::Catalog { name, out, list } => cmd_catalog(name.as_deref(), out.as_deref(), list),
        Command::CertifyNonalgebraic { path, height } => cmd_certify_nonalgebraic(&path, height),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
