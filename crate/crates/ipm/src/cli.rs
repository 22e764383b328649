//! `inexact-ipm solve FILE [flags]`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use inexact_ipm_core::ipm::{Clock, Driver, StepRecord};
use inexact_ipm_core::ldl::PivotBlock;
use inexact_ipm_core::{CscMatrix, IpmParams, Status, SymLowerMatrix, Triplets};
use log::{debug, LevelFilter};

use crate::matrix_market::{write_general, write_symmetric};
use crate::mps::parse_mps;
use crate::report::{status_name, IterationReport, RunReport, Totals};
use crate::standard_form::{recover_solution, to_standard_form};

#[derive(Debug, Parser)]
#[command(
    name = "inexact-ipm",
    version,
    about = "Inexact primal-dual interior point LP solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the LP in an MPS file.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// MPS file.
    pub file: PathBuf,
    /// Relative primal, dual and gap tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Centering parameter.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Loosest allowed linear-solve tolerance.
    #[arg(long)]
    pub eta_max: Option<f64>,
    /// Tightest allowed linear-solve tolerance.
    #[arg(long)]
    pub eta_min: Option<f64>,
    /// Bound on the inverse norm of each level's L factor (must exceed 1).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Relative drop tolerance for L.
    #[arg(long)]
    pub droptol_l: Option<f64>,
    /// Relative drop tolerance for Schur complements.
    #[arg(long)]
    pub droptol_s: Option<f64>,
    /// Maximum number of factorization levels.
    #[arg(long)]
    pub max_levels: Option<usize>,
    /// Order at or below which the remainder is factored densely.
    #[arg(long)]
    pub dense_threshold: Option<usize>,
    /// Maximum number of interior point iterations.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Primal regularization.
    #[arg(long)]
    pub delta_p: Option<f64>,
    /// Dual regularization.
    #[arg(long)]
    pub delta_d: Option<f64>,
    /// Write a JSON report here.
    #[arg(long, value_name = "PATH")]
    pub stats_json: Option<PathBuf>,
    /// Write K, every level's L, D and Schur complement, and the final dense
    /// factor, per iteration.
    #[arg(long, value_name = "DIR")]
    pub dump_mm: Option<PathBuf>,
    /// Log per-step detail to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

impl SolveArgs {
    pub fn params(&self) -> IpmParams {
        let mut p = IpmParams::default();
        if let Some(t) = self.tol {
            (p.tol_p, p.tol_d, p.tol_gap) = (t, t, t);
        }
        let fp = &mut p.factor_params;
        set(&mut p.sigma, self.sigma);
        set(&mut p.eta_max, self.eta_max);
        set(&mut p.eta_min, self.eta_min);
        set(&mut fp.kappa, self.kappa);
        set(&mut fp.tau_l, self.droptol_l);
        set(&mut fp.tau_s, self.droptol_s);
        set(&mut fp.max_levels, self.max_levels);
        set(&mut fp.final_dense_threshold, self.dense_threshold);
        fp.retain_schur = self.dump_mm.is_some();
        set(&mut p.max_iters, self.max_iters);
        set(&mut p.delta_p, self.delta_p);
        set(&mut p.delta_d, self.delta_d);
        p
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub fn exit_code(s: Status) -> i32 {
    match s {
        Status::Optimal => 0,
        Status::MaxIters => 2,
        Status::NumericalFailure => 3,
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let Command::Solve(args) = cli.command;
    let level = if args.verbose {
        LevelFilter::Debug
    } else {
        LevelFilter::Warn
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match solve(&args) {
        Ok((_, status)) => exit_code(status),
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

/// Runs one solve, prints the summary and writes the requested files.
pub fn solve(args: &SolveArgs) -> Result<(RunReport, Status), String> {
    let params = args.params();
    params
        .validate()
        .map_err(|e| format!("invalid parameters: {e}"))?;
    let path = &args.file;
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let model = parse_mps(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let (lp, map) = to_standard_form(&model).map_err(|e| format!("{}: {e}", path.display()))?;
    let instance = if model.name.is_empty() {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    } else {
        model.name.clone()
    };

    if let Some(dir) = &args.dump_mm {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let mut dump_error: Option<String> = None;
    let observer = |r: &StepRecord<'_>| {
        if let (Some(dir), None) = (&args.dump_mm, &dump_error) {
            dump_error = dump_step(dir, r)
                .err()
                .map(|e| format!("{}: {e}", dir.display()));
        }
    };
    let start = Instant::now();
    let solution = Driver::with(&lp, params, WallClock(start), observer).solve();
    let wall_seconds = start.elapsed().as_secs_f64();
    if let Some(e) = dump_error {
        return Err(e);
    }

    let values = recover_solution(&map, &solution.x).map_err(|e| e.to_string())?;
    let objective = model.objective_value(&values);
    debug!(
        "largest row or bound violation {:e}",
        model.max_violation(&values)
    );
    let report = RunReport {
        instance,
        rows: lp.m(),
        cols: lp.n(),
        nnz_a: lp.a().nnz(),
        status: status_name(solution.status).to_string(),
        objective,
        wall_seconds,
        iterations: solution.logs.iter().map(IterationReport::from).collect(),
        totals: Totals::from_logs(&solution.logs),
    };
    print_summary(&report);
    if let Some(out) = &args.stats_json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
        fs::write(out, json + "\n").map_err(|e| format!("{}: {e}", out.display()))?;
    }
    Ok((report, solution.status))
}

fn print_summary(r: &RunReport) {
    println!(
        "{}: {} rows, {} columns, {} nonzeros",
        r.instance, r.rows, r.cols, r.nnz_a
    );
    println!(
        "{:>4} {:>11} {:>11} {:>11} {:>11} {:>9} {:>5} {:>3} {:>7}",
        "k", "mu", "|rp|", "|rd|", "gap", "eta", "sqmr", "rs", "fill"
    );
    for it in &r.iterations {
        println!(
            "{:>4} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>9.2e} {:>5} {:>3} {:>7.2}",
            it.k, it.mu, it.rp, it.rd, it.gap, it.eta, it.sqmr_iters, it.resolves, it.fill_ratio
        );
    }
    println!(
        "status {}  objective {:.10e}  iterations {}  sqmr {}  avg fill {:.3}  time {:.3}s",
        r.status,
        r.objective,
        r.iterations.len(),
        r.totals.sqmr_iters,
        r.totals.fill_ratio_avg,
        r.wall_seconds
    );
}

fn dump_step(dir: &Path, r: &StepRecord<'_>) -> io::Result<()> {
    let file = |name: String| File::create(dir.join(name)).map(BufWriter::new);
    let k = r.iteration;
    write_symmetric(&mut file(format!("iter{k:03}_K.mtx"))?, &r.kkt.k)?;
    for (l, level) in r.factor.levels.iter().enumerate() {
        write_general(&mut file(format!("iter{k:03}_level{l}_L.mtx"))?, &level.l)?;
        write_symmetric(
            &mut file(format!("iter{k:03}_level{l}_D.mtx"))?,
            &block_diagonal(&level.d),
        )?;
        if let Some(s) = &level.schur {
            write_symmetric(&mut file(format!("iter{k:03}_level{l}_S.mtx"))?, s)?;
        }
    }
    let dense = &r.factor.final_dense;
    let n = dense.order();
    let mut t = Triplets::new(n, n);
    for j in 0..n {
        for i in j + 1..n {
            if dense.l(i, j) != 0.0 {
                t.push(i, j, dense.l(i, j));
            }
        }
    }
    let l = CscMatrix::from_triplets(&t).expect("factor entries are finite");
    write_general(&mut file(format!("iter{k:03}_final_L.mtx"))?, &l)?;
    write_symmetric(
        &mut file(format!("iter{k:03}_final_D.mtx"))?,
        &block_diagonal(dense.blocks()),
    )?;
    Ok(())
}

fn block_diagonal(blocks: &[PivotBlock]) -> SymLowerMatrix {
    let n = blocks.iter().map(PivotBlock::size).sum();
    let mut t = Triplets::new(n, n);
    let mut pos = 0;
    for b in blocks {
        match *b {
            PivotBlock::One(d) => t.push(pos, pos, d),
            PivotBlock::Two([a, b, c]) => {
                t.push(pos, pos, a);
                t.push(pos + 1, pos, b);
                t.push(pos + 1, pos + 1, c);
            }
        }
        pos += b.size();
    }
    SymLowerMatrix::from_triplets(&t).expect("pivot entries are finite")
}
