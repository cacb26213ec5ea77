use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::Parser;
use fracsolve::specfun::mittleff;
use fracsolve::{
    case_by_id, exact_error, BenchmarkCase, CaseProblem, ErrorMetric, MethodId, MultiTermMethod, Solution, SolverConfig,
};

use crate::args::{BenchArgs, Cli, Command, MittleffArgs, SolveArgs};
use crate::exit;
use crate::format::{round_trip, significant15};
use crate::record::{records_to_csv, ErrorValue, WorkPrecisionRecord};
use crate::svg::work_precision_svg;

/// Parses `argv` and dispatches. Parse failures are usage errors (exit 1);
/// `--help` and `--version` exit 0.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Mittleff(a) => cmd_mittleff(&a, out, err),
    }
}

/// A method token checked against the case it will run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedMethod {
    pub engine: MethodId,
    /// Token written to records: the multi-term spelling on multi-term cases.
    pub label: &'static str,
}

/// Accepts single-term tokens everywhere (mapped to the multi-term variant
/// on multi-term cases) and multi-term tokens on multi-term cases.
pub fn resolve_method(case: &BenchmarkCase, token: &str) -> Result<ResolvedMethod, String> {
    let multiterm = matches!(case.problem, CaseProblem::MultiTerm(_));
    if let Ok(mt) = token.parse::<MultiTermMethod>() {
        if !multiterm {
            return Err(format!("`{token}` only applies to multi-term cases; `{}` is single-term", case.id));
        }
        return Ok(ResolvedMethod { engine: mt.engine(), label: mt.token() });
    }
    let method: MethodId = token.parse().map_err(|e: String| {
        let mt: Vec<&str> = MultiTermMethod::ALL.iter().map(|m| m.token()).collect();
        format!("{e}; multi-term cases also take {}", mt.join(", "))
    })?;
    if !multiterm {
        return Ok(ResolvedMethod { engine: method, label: method.token() });
    }
    match MultiTermMethod::from_engine(method) {
        Some(mt) => Ok(ResolvedMethod { engine: method, label: mt.token() }),
        None => Err(format!("method `{token}` does not apply to the multi-term case `{}`", case.id)),
    }
}

fn applicable_methods(case: &BenchmarkCase) -> Vec<ResolvedMethod> {
    MethodId::ALL.iter().filter_map(|m| resolve_method(case, m.token()).ok()).collect()
}

fn load_case(id: &str, tf: Option<f64>) -> Result<BenchmarkCase, String> {
    let case = case_by_id(id)?;
    match tf {
        Some(tf) => case.with_final_time(tf).map_err(|e| e.to_string()),
        None => Ok(case),
    }
}

/// Trajectory as `t,u1,...,ud` text.
pub fn solution_csv(solution: &Solution) -> String {
    let mut out = String::from("t");
    for i in 1..=solution.dim {
        out.push_str(&format!(",u{i}"));
    }
    out.push('\n');
    for (t, row) in solution.rows() {
        out.push_str(&round_trip(t));
        for v in row {
            out.push(',');
            out.push_str(&round_trip(*v));
        }
        out.push('\n');
    }
    out
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let prepared = load_case(&args.case, args.tf).and_then(|case| {
        let method = resolve_method(&case, &args.method)?;
        Ok((case, method))
    });
    let (case, method) = match prepared {
        Ok(v) => v,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return exit::USAGE;
        }
    };
    let config = SolverConfig::new(args.dt).with_fft(args.fft);
    let solution = match case.solve(&config, method.engine) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::USAGE;
        }
    };
    let csv = solution_csv(&solution);
    // the CSV owns standard output when no file is given
    let report: &mut dyn Write = match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return exit::USAGE;
            }
            out
        }
        None => {
            let _ = out.write_all(csv.as_bytes());
            err
        }
    };
    let s = &solution.stats;
    let _ = writeln!(
        report,
        "retcode={} rows={} rhs_evals={} newton_iters={} wall_time_s={:.6}{}",
        solution.retcode,
        solution.len(),
        s.rhs_evals,
        s.newton_iters_total,
        s.wall_time,
        if s.mesh_end_mismatch { " (last step overshoots tf)" } else { "" }
    );
    if solution.is_success() {
        exit::SUCCESS
    } else {
        exit::SOLVER_FAILURE
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct SweepPoint {
    method: ResolvedMethod,
    n: i32,
}

fn run_point(case: &BenchmarkCase, point: &SweepPoint, metric: ErrorMetric, reps: usize, fft: bool) -> WorkPrecisionRecord {
    let dt = 2f64.powi(-point.n);
    let config = SolverConfig::new(dt).with_fft(fft);
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let started = Instant::now();
        let result = case.solve(&config, point.method.engine);
        times.push(started.elapsed().as_secs_f64());
        last = Some(result);
    }
    let (error, retcode) = match last.expect("at least one repetition") {
        Ok(sol) => {
            let e = exact_error(&sol, case, metric).unwrap_or(f64::INFINITY);
            let error = if sol.is_success() { ErrorValue::from_error(e) } else { ErrorValue::Diverged };
            (error, sol.retcode.to_string())
        }
        Err(e) => (ErrorValue::Diverged, format!("Error: {e}")),
    };
    WorkPrecisionRecord {
        case_id: case.id.to_string(),
        method: point.method.label.to_string(),
        dt,
        error,
        wall_time_s: median(times),
        retcode,
    }
}

/// Worker count from `FRACSOLVE_THREADS`, one by default.
fn thread_count() -> usize {
    std::env::var("FRACSOLVE_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&n| n > 0).unwrap_or(1)
}

/// Runs the sweep; records come back in method-major, step-minor order
/// whatever the thread count.
pub fn sweep(
    case: &BenchmarkCase,
    methods: &[ResolvedMethod],
    nmin: i32,
    nmax: i32,
    metric: ErrorMetric,
    reps: usize,
    fft: bool,
) -> Vec<WorkPrecisionRecord> {
    let points: Vec<SweepPoint> =
        methods.iter().flat_map(|&method| (nmin..=nmax).map(move |n| SweepPoint { method, n })).collect();
    let threads = thread_count().min(points.len().max(1));
    if threads <= 1 {
        return points.iter().map(|p| run_point(case, p, metric, reps, fft)).collect();
    }
    let mut slots: Vec<Option<WorkPrecisionRecord>> = vec![None; points.len()];
    let chunk = points.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (pts, out) in points.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (p, slot) in pts.iter().zip(out.iter_mut()) {
                    *slot = Some(run_point(case, p, metric, reps, fft));
                }
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every point ran")).collect()
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let setup = (|| -> Result<_, String> {
        let case = case_by_id(&args.case)?;
        if case.exact.is_none() {
            return Err(format!("case `{}` has no analytical oracle to measure error against", case.id));
        }
        let metric: ErrorMetric = args.metric.parse()?;
        let methods = match &args.methods {
            Some(tokens) => tokens.iter().map(|t| resolve_method(&case, t.trim())).collect::<Result<Vec<_>, _>>()?,
            None => applicable_methods(&case),
        };
        if args.nmin > args.nmax {
            return Err(format!("--nmin {} exceeds --nmax {}", args.nmin, args.nmax));
        }
        if args.reps == 0 {
            return Err("--reps must be at least 1".to_string());
        }
        Ok((case, metric, methods))
    })();
    let (case, metric, methods) = match setup {
        Ok(v) => v,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return exit::USAGE;
        }
    };

    let records = sweep(&case, &methods, args.nmin, args.nmax, metric, args.reps, args.fft);
    for r in &records {
        let _ = writeln!(err, "{:>14} dt={:<10} error={:<24} time={:.3e}s {}", r.method, r.dt, r.error.to_string(), r.wall_time_s, r.retcode);
    }

    let json = serde_json::to_string_pretty(&records).expect("records serialize");
    match &args.out {
        Some(path) => {
            let body = if has_extension(path, "csv") { records_to_csv(&records) } else { json + "\n" };
            if let Err(e) = fs::write(path, body) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return exit::USAGE;
            }
        }
        None => {
            let _ = writeln!(out, "{json}");
        }
    }
    if let Some(path) = &args.svg {
        let title = format!("{} work-precision ({})", case.id, metric.token());
        if let Err(e) = fs::write(path, work_precision_svg(&records, &title)) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return exit::USAGE;
        }
    }
    exit::SUCCESS
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

pub fn cmd_mittleff(args: &MittleffArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match mittleff(args.alpha, args.beta, args.gamma, args.z) {
        Ok(v) => {
            let _ = writeln!(out, "{}", significant15(v));
            exit::SUCCESS
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit::USAGE
        }
    }
}
