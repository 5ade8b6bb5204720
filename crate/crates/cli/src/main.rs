//! `unc-lab`: sweeps, family checks, bound crossings, alpha* searches and
//! series-vs-quadrature verification from the command line.
//!
//! Exit codes:
//!   0 success
//!   1 invalid input, usage error or I/O failure
//!   2 a moment diverges
//!   3 check: no unique dominant index
//!   4 check: inconclusive dominance
//!   5 no alpha* / no bracket
//!   6 verify: a row failed
//!   7 numerical failure (non-convergent series, quadrature cap, degenerate state)

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use unc_lab_core::analysis::{
    alpha_grid, check_admissibility, check_dominance, find_alpha_star, find_bound_crossing, sweep,
    AdmissibilityReport, DominanceVerdict, Engine, Evaluator, Scale, Verdict,
};
use unc_lab_core::oracle::{compare_report, CompareReport, RowStatus};
use unc_lab_core::spectrum::load_family;
use unc_lab_core::{build_spectrum, BuildOptions, CoefficientFamily, Error, TruncatedSpectrum};

#[derive(Parser)]
#[command(
    name = "unc-lab",
    version,
    about = "Angle / L_z uncertainty products for families of periodic states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate variances and products over an alpha grid as CSV.
    Sweep(SweepArgs),
    /// Admissibility and dominance report for a family.
    Check(CheckArgs),
    /// Alpha where the product crosses a target value.
    Crossing(CrossingArgs),
    /// Some alpha with product below epsilon.
    AlphaStar(AlphaStarArgs),
    /// Compare every series moment with adaptive quadrature at one alpha.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exp,
    Poly,
    Single,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Series,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(Args)]
struct FamilyOpts {
    #[arg(long, value_enum, default_value = "exp")]
    family: FamilyArg,
    /// Mode index for `--family single`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    mode: i64,
    /// JSON definition for `--family custom`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineArg,
    /// Relative truncation tolerance of the spectrum builder.
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    fam: FamilyOpts,
    #[arg(long)]
    min: f64,
    #[arg(long)]
    max: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, value_enum, default_value = "linear")]
    scale: ScaleArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mark failing rows instead of aborting.
    #[arg(long)]
    keep_going: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    fam: FamilyOpts,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long, default_value_t = 16)]
    steps: usize,
    /// Largest |n| probed by the dominance and monotonicity checks.
    #[arg(long, default_value_t = 8)]
    n_probe: u64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// Cutoff N of the tail condition.
    #[arg(long, default_value_t = 100)]
    tail_n: u64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CrossingArgs {
    #[command(flatten)]
    fam: FamilyOpts,
    #[arg(long, default_value_t = 0.5)]
    target: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AlphaStarArgs {
    #[command(flatten)]
    fam: FamilyOpts,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    hint: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    fam: FamilyOpts,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Window used when the series cannot be truncated to tolerance.
    #[arg(long, default_value_t = 2048)]
    max_cutoff: usize,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::InvalidFamily(_) | Error::Io(_) => 1,
            Error::DivergentMoment { .. } => 2,
            Error::NotAttainable { .. } | Error::NoBracket { .. } => 5,
            Error::NonConvergent { .. }
            | Error::ToleranceNotMet { .. }
            | Error::DegenerateState => 7,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Error::Io(e.to_string()).into()
}

type CmdResult = Result<u8, Failure>;

impl FamilyOpts {
    fn family(&self) -> Result<CoefficientFamily, Failure> {
        if self.spec.is_some() && !matches!(self.family, FamilyArg::Custom) {
            return Err(Error::invalid("--spec is only used with --family custom").into());
        }
        Ok(match self.family {
            FamilyArg::Exp => CoefficientFamily::exponential(),
            FamilyArg::Poly => CoefficientFamily::polynomial(),
            FamilyArg::Single => CoefficientFamily::single_mode(self.mode),
            FamilyArg::Custom => {
                let path = self
                    .spec
                    .as_ref()
                    .ok_or_else(|| Error::invalid("--family custom needs --spec FILE"))?;
                load_family(path)?
            }
        })
    }

    fn build(&self) -> Result<BuildOptions, Failure> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(
                Error::invalid(format!("--rel-tol {} must lie in (0, 1)", self.rel_tol)).into(),
            );
        }
        Ok(BuildOptions {
            rel_tol: self.rel_tol,
            ..Default::default()
        })
    }

    fn evaluator(&self) -> Result<Evaluator, Failure> {
        Ok(Evaluator {
            engine: match self.engine {
                EngineArg::Auto => Engine::Auto,
                EngineArg::Series => Engine::Series,
            },
            build: self.build()?,
        })
    }

    fn engine_name(&self) -> &'static str {
        match self.engine {
            EngineArg::Auto => "auto",
            EngineArg::Series => "series",
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values always serialize")
    );
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    let family = a.fam.family()?;
    let ev = a.fam.evaluator()?;
    if !(a.min > 0.0 && a.min < a.max) {
        return Err(Error::invalid(format!(
            "need 0 < min < max, got min = {}, max = {}",
            a.min, a.max
        ))
        .into());
    }
    if a.steps < 2 {
        return Err(Error::invalid("--steps must be at least 2").into());
    }
    let scale = match a.scale {
        ScaleArg::Linear => Scale::Linear,
        ScaleArg::Log => Scale::Log,
    };
    let grid = alpha_grid(a.min, a.max, a.steps, scale)?;
    let rows = sweep(&family, &grid, &ev)?;

    let mut body = String::new();
    let mut code = 0u8;
    let mut first_error = None;
    for (alpha, row) in grid.iter().zip(&rows) {
        match row {
            Ok(r) => {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{}",
                    num(r.alpha),
                    num(r.var_phi),
                    num(r.var_lz),
                    num(r.product),
                    num(r.hr_bound),
                    num(r.state_bound)
                );
            }
            Err(e) => {
                let (mark, c) = match e {
                    Error::DivergentMoment { .. } => ("div", 2),
                    other => ("err", Failure::from(other.clone()).code),
                };
                if code == 0 {
                    code = c;
                }
                if first_error.is_none() {
                    first_error = Some(format!("alpha = {alpha}: {e}"));
                }
                if !a.keep_going {
                    return Err(Failure {
                        code: c,
                        message: format!("alpha = {alpha}: {e}"),
                    });
                }
                let _ = writeln!(
                    body,
                    "{},{mark},{mark},{mark},{},{mark}",
                    num(*alpha),
                    num(unc_lab_core::HR_BOUND)
                );
            }
        }
    }

    let cutoffs: Vec<usize> = rows
        .iter()
        .filter_map(|r| r.as_ref().ok().and_then(|r| r.cutoff))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "# unc-lab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# family: {}", family.name());
    let _ = writeln!(out, "# engine: {}", a.fam.engine_name());
    let _ = writeln!(out, "# rel_tol: {:e}", ev.build.rel_tol);
    match (cutoffs.iter().min(), cutoffs.iter().max()) {
        (Some(lo), Some(hi)) => {
            let _ = writeln!(out, "# cutoffs: {lo}..{hi}");
        }
        _ => {
            let _ = writeln!(out, "# cutoffs: closed form");
        }
    }
    out.push_str("alpha,var_phi,var_lz,product,hr_bound,state_bound\n");
    out.push_str(&body);

    match &a.out {
        Some(path) => fs::write(path, out).map_err(io_failure)?,
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .map_err(io_failure)?,
    }
    if let Some(msg) = first_error {
        eprintln!("unc-lab: {msg}");
    }
    Ok(code)
}

fn default_check_range(family: &FamilyArg) -> (f64, f64) {
    match family {
        FamilyArg::Poly => (2.0, 50.0),
        _ => (0.5, 20.0),
    }
}

fn describe_dominance(d: &DominanceVerdict) -> String {
    match d.verdict {
        Verdict::Dominant => format!("dominant k={}", d.dominant_index.unwrap_or_default()),
        Verdict::NoUniqueDominant => {
            let tied: Vec<String> = d.tied.iter().map(|n| n.to_string()).collect();
            format!("no unique dominant (tied: {})", tied.join(", "))
        }
        Verdict::Inconclusive => {
            let off: Vec<String> = d.offenders.iter().map(|n| n.to_string()).collect();
            format!("inconclusive (unsettled indices: {})", off.join(", "))
        }
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn describe_admissibility(r: &AdmissibilityReport) -> String {
    let mut s = String::new();
    let i = &r.cond_i;
    let _ = writeln!(
        s,
        "  (i)   {}: min var_phi = {:.6e} at alpha = {} (kappa = {})",
        pass(i.pass),
        i.min_var_phi,
        i.argmin_alpha,
        i.kappa
    );
    let ii = &r.cond_ii;
    let _ = writeln!(
        s,
        "  (ii)  {}: max tail of n^2 |C_n|^2 beyond N = {} is {:.6e} at alpha = {} (eps = {})",
        pass(ii.pass),
        ii.n,
        ii.max_tail,
        ii.argmax_alpha,
        ii.eps
    );
    let iii = &r.cond_iii;
    let _ = writeln!(
        s,
        "  (iii) {}: chain length needed {}; nonstrict {} ({}), strict on nonzero {} ({}), strict everywhere {} ({})",
        pass(iii.pass),
        iii.required_len,
        pass(iii.nonstrict.pass),
        iii.nonstrict.chain.len(),
        pass(iii.strict_nonzero.pass),
        iii.strict_nonzero.chain.len(),
        pass(iii.strict_all.pass),
        iii.strict_all.chain.len()
    );
    for n in &r.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    s
}

fn cmd_check(a: &CheckArgs) -> CmdResult {
    let family = a.fam.family()?;
    let ev = a.fam.evaluator()?;
    let (dmin, dmax) = default_check_range(&a.fam.family);
    let grid = alpha_grid(
        a.min.unwrap_or(dmin),
        a.max.unwrap_or(dmax),
        a.steps,
        Scale::Log,
    )?;
    let dominance = check_dominance(&family, &grid, a.n_probe)?;
    let admissibility = check_admissibility(&family, &grid, a.kappa, a.tail_n, a.eps, &ev)?;
    let code = match dominance.verdict {
        Verdict::Dominant => 0,
        Verdict::NoUniqueDominant => 3,
        Verdict::Inconclusive => 4,
    };
    if a.json {
        print_json(&json!({
            "family": family.name(),
            "dominance": dominance,
            "admissibility": admissibility,
        }));
    } else {
        println!("family: {}", family.name());
        println!(
            "grid: {} log points on [{}, {}]",
            grid.len(),
            grid[0],
            grid[grid.len() - 1]
        );
        println!("dominance: {}", describe_dominance(&dominance));
        println!(
            "admissibility: {}",
            if admissibility.all_pass {
                "admissible"
            } else {
                "not admissible"
            }
        );
        print!("{}", describe_admissibility(&admissibility));
    }
    Ok(code)
}

fn report_search_failure(e: Error, json_out: bool) -> Failure {
    if json_out {
        match &e {
            Error::NotAttainable {
                epsilon,
                best_product,
                best_alpha,
            } => print_json(&json!({
                "status": "not_attainable",
                "epsilon": epsilon,
                "infimum": best_product,
                "best_alpha": best_alpha,
            })),
            Error::NoBracket { target, lo, hi } => print_json(&json!({
                "status": "no_bracket",
                "target": target,
                "lo": lo,
                "hi": hi,
            })),
            _ => {}
        }
    } else if let Error::NotAttainable {
        best_product,
        best_alpha,
        ..
    } = &e
    {
        println!("not attainable; infimum {best_product:.6} at alpha = {best_alpha:.6}");
    }
    e.into()
}

fn cmd_crossing(a: &CrossingArgs) -> CmdResult {
    let family = a.fam.family()?;
    let ev = a.fam.evaluator()?;
    match find_bound_crossing(&family, a.target, &ev) {
        Ok(c) => {
            if a.json {
                print_json(
                    &json!({"status": "ok", "alpha": c.alpha, "product": c.product, "target": c.target}),
                );
            } else {
                println!("alpha = {:.9}  product = {:.12}", c.alpha, c.product);
            }
            Ok(0)
        }
        Err(e) => Err(report_search_failure(e, a.json)),
    }
}

fn cmd_alpha_star(a: &AlphaStarArgs) -> CmdResult {
    let family = a.fam.family()?;
    let ev = a.fam.evaluator()?;
    match find_alpha_star(&family, a.epsilon, a.hint, &ev) {
        Ok(s) => {
            if a.json {
                print_json(
                    &json!({"status": "ok", "alpha": s.alpha, "product": s.product, "epsilon": s.epsilon}),
                );
            } else {
                println!("alpha* = {:.9}  product = {:.12e}", s.alpha, s.product);
            }
            Ok(0)
        }
        Err(e) => Err(report_search_failure(e, a.json)),
    }
}

fn verify_spectrum(
    a: &VerifyArgs,
    family: &CoefficientFamily,
) -> Result<(TruncatedSpectrum, Option<String>), Failure> {
    match build_spectrum(family, a.alpha, &a.fam.build()?) {
        Ok(s) => Ok((s, None)),
        Err(e @ Error::NonConvergent { .. }) => {
            let s = TruncatedSpectrum::with_cutoff(family, a.alpha, a.max_cutoff)?;
            Ok((
                s,
                Some(format!(
                    "{e}; compared on the window |n| <= {}",
                    a.max_cutoff
                )),
            ))
        }
        Err(e) => Err(e.into()),
    }
}

fn describe_compare(r: &CompareReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "alpha = {}  cutoff = {}  tol = {:e}  evaluations = {}",
        r.alpha, r.cutoff, r.tol, r.evaluations
    );
    let _ = writeln!(
        s,
        "{:<12} {:>24} {:>24} {:>10}  status",
        "quantity", "series", "quadrature", "abs_diff"
    );
    let cell = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$e}"));
    for row in &r.rows {
        let status = match row.status {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "FAIL",
            RowStatus::NotApplicable => "n/a",
        };
        let _ = write!(
            s,
            "{:<12} {:>24} {:>24} {:>10}  {status}",
            row.quantity,
            cell(row.series, 15),
            cell(row.quadrature, 15),
            cell(row.abs_diff, 2)
        );
        if let Some(n) = &row.note {
            let _ = write!(s, "  ({n})");
        }
        s.push('\n');
    }
    s
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let family = a.fam.family()?;
    if !(a.tol > 0.0) {
        return Err(Error::invalid("--tol must be positive").into());
    }
    let (s, note) = verify_spectrum(a, &family)?;
    let r = compare_report(&s, a.tol);
    if a.json {
        print_json(&json!({"family": family.name(), "note": note, "report": r}));
    } else {
        println!("family: {}", family.name());
        if let Some(n) = &note {
            println!("note: {n}");
        }
        print!("{}", describe_compare(&r));
    }
    Ok(if r.all_pass { 0 } else { 6 })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("UNC_LAB_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Error::invalid(format!("UNC_LAB_THREADS = {v:?} is not a positive integer"))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let run = || -> CmdResult {
        configure_threads()?;
        match &cli.command {
            Command::Sweep(a) => cmd_sweep(a),
            Command::Check(a) => cmd_check(a),
            Command::Crossing(a) => cmd_crossing(a),
            Command::AlphaStar(a) => cmd_alpha_star(a),
            Command::Verify(a) => cmd_verify(a),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("unc-lab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
