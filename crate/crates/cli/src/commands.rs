use std::fs::File;
use std::io::{self, BufWriter, Write};

use lens_torsion::combinatorics::coprime;
use lens_torsion::oracle::compare_with;
use lens_torsion::torsion::{KPart, RunPlan};
use lens_torsion::{
    build_triangulation, closed_form_invariant, Error, FormulaBranch, LensSpec, Options, ParamSource, TorsionReport,
};
use rayon::prelude::*;

use crate::args::{ComputeArgs, Format, OracleArgs, SelfcheckArgs, VerifyArgs};
use crate::output::{short, to_json, write_csv, write_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Environment variable overriding the worker count of parallel runs.
pub const WORKERS_ENV: &str = "LENS_TORSION_WORKERS";

/// Bad input and degenerate geometry exit with 2, anything else found by the pipeline with 1.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::InvalidSpec(_)
        | Error::NotCoprime { .. }
        | Error::DegenerateParams(_)
        | Error::DegenerateK { .. }
        | Error::DegenerateTet { .. }
        | Error::ZeroLengthEdge { .. }
        | Error::NotRealizable { .. } => EXIT_INVALID,
        _ => EXIT_FAIL,
    }
}

fn pool() -> rayon::ThreadPool {
    let n = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
}

/// Every representation index of one lens space, evaluated in parallel.
pub fn compute_report(spec: LensSpec, source: ParamSource, opts: &Options) -> lens_torsion::Result<TorsionReport> {
    let tri = build_triangulation(spec);
    let plan = RunPlan::new(&spec, source, opts)?;
    let parts: Vec<KPart> =
        pool().install(|| plan.ks.par_iter().map(|&k| plan.run_k(&tri, k, opts)).collect::<Result<_, _>>())?;
    Ok(plan.assemble(parts, opts))
}

fn fail(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    exit_code(e)
}

pub fn compute(args: &ComputeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match LensSpec::new(args.lens.p, args.lens.q) {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    if let Some(bad) = args.j.iter().flatten().find(|&&j| j >= spec.p()) {
        let _ = writeln!(err, "error: j={bad} outside 0..{}", spec.p());
        return EXIT_INVALID;
    }
    let opts = Options { tolerances: args.tol.tolerances(), pivot_spread: false, ks: args.k.clone() };
    let report = match compute_report(spec, args.geometry.source(), &opts) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let js = args.j.as_deref();
    let written = match &args.output {
        Some(path) => File::create(path).and_then(|f| render(&mut BufWriter::new(f), &report, js, args)),
        None => render(out, &report, js, args),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAIL
        }
    }
}

fn render(w: &mut dyn Write, report: &TorsionReport, js: Option<&[usize]>, args: &ComputeArgs) -> io::Result<()> {
    match args.format {
        Format::Json => write_json(w, &to_json(report, js, args.compare_tol)),
        Format::Csv => write_csv(&mut *w, report, js),
    }?;
    w.flush()
}

/// Outcome of a sweep over all lens spaces with `3 ≤ p ≤ p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub spaces: Vec<SpaceSummary>,
    pub worst_rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSummary {
    pub p: usize,
    pub q: usize,
    pub cells: usize,
    pub excluded: usize,
    pub failed_checks: usize,
    pub worst_rel_err: f64,
    pub pass: bool,
    pub error: Option<String>,
}

/// Compare every cell with `oracle(p, q, j, k)`; cells run in parallel and are
/// collected back in `(p, q, k)` order.
pub fn sweep(p_max: usize, tol: f64, seed: u64, oracle: impl Fn(usize, usize, usize, usize) -> f64 + Sync) -> Sweep {
    let opts = Options::default();
    let spaces: Vec<(LensSpec, lens_torsion::Triangulation, lens_torsion::Result<RunPlan>)> = (3..=p_max)
        .flat_map(|p| (1..p).filter(move |&q| coprime(p, q)).map(move |q| LensSpec::new(p, q).unwrap()))
        .map(|spec| (spec, build_triangulation(spec), RunPlan::new(&spec, ParamSource::Seed(seed), &opts)))
        .collect();
    let tasks: Vec<(usize, usize)> = spaces
        .iter()
        .enumerate()
        .flat_map(|(i, (_, _, plan))| plan.iter().flat_map(|pl| pl.ks.iter()).map(move |&k| (i, k)))
        .collect();
    let results: Vec<lens_torsion::Result<KPart>> = pool().install(|| {
        tasks
            .par_iter()
            .map(|&(i, k)| {
                let (_, tri, plan) = &spaces[i];
                plan.as_ref().map_err(Clone::clone)?.run_k(tri, k, &opts)
            })
            .collect()
    });
    let mut by_space: Vec<Vec<lens_torsion::Result<KPart>>> = spaces.iter().map(|_| Vec::new()).collect();
    for (&(i, _), r) in tasks.iter().zip(results) {
        by_space[i].push(r);
    }
    let mut summaries = Vec::new();
    for ((spec, _, plan), parts) in spaces.iter().zip(by_space) {
        let (p, q) = (spec.p(), spec.q());
        let assembled = plan.clone().and_then(|plan| {
            let parts = parts.into_iter().collect::<lens_torsion::Result<Vec<_>>>()?;
            Ok(plan.assemble(parts, &opts))
        });
        summaries.push(match assembled {
            Ok(report) => {
                let v = compare_with(&report, tol, &oracle);
                SpaceSummary {
                    p,
                    q,
                    cells: v.cells.len(),
                    excluded: v.excluded.len(),
                    failed_checks: v.failed_checks.len(),
                    worst_rel_err: v.worst_rel_err,
                    pass: v.pass,
                    error: None,
                }
            }
            Err(e) => SpaceSummary {
                p,
                q,
                cells: 0,
                excluded: 0,
                failed_checks: 0,
                worst_rel_err: f64::NAN,
                pass: false,
                error: Some(e.to_string()),
            },
        });
    }
    let worst_rel_err = summaries.iter().map(|s| s.worst_rel_err).fold(0.0, f64::max);
    let pass = summaries.iter().all(|s| s.pass);
    Sweep { spaces: summaries, worst_rel_err, pass }
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    verify_with(args, out, err, |p, q, j, k| closed_form_invariant(p, q, j, k).value)
}

pub fn verify_with(
    args: &VerifyArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
    oracle: impl Fn(usize, usize, usize, usize) -> f64 + Sync,
) -> i32 {
    if args.p_max < 3 {
        let _ = writeln!(err, "error: p must be ≥ 3");
        return EXIT_INVALID;
    }
    let result = sweep(args.p_max, args.tol, args.seed, oracle);
    let mut lines = String::new();
    for s in &result.spaces {
        let status = if s.pass { "ok" } else { "FAIL" };
        match &s.error {
            Some(e) => lines.push_str(&format!("L({},{}) {status} error: {e}\n", s.p, s.q)),
            None => lines.push_str(&format!(
                "L({},{}) {status} cells={} degenerate={} failed_checks={} worst_rel_err={:.3e}\n",
                s.p, s.q, s.cells, s.excluded, s.failed_checks, s.worst_rel_err
            )),
        }
    }
    lines.push_str(&format!(
        "worst relative error: {:.3e} (tol {:e}) over {} lens spaces: {}\n",
        result.worst_rel_err,
        args.tol,
        result.spaces.len(),
        if result.pass { "pass" } else { "FAIL" }
    ));
    if out.write_all(lines.as_bytes()).is_err() {
        return EXIT_FAIL;
    }
    if result.pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn selfcheck(args: &SelfcheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match LensSpec::new(args.lens.p, args.lens.q) {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    let opts = Options { tolerances: args.tol.tolerances(), pivot_spread: true, ks: None };
    let report = match compute_report(spec, args.geometry.source(), &opts) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let text = selfcheck_text(&report);
    if out.write_all(text.as_bytes()).is_err() {
        return EXIT_FAIL;
    }
    if report.all_checks_pass() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn selfcheck_text(report: &TorsionReport) -> String {
    let (p, q) = (report.spec.p(), report.spec.q());
    let sh = report.shape;
    let tol = &report.tolerances;
    let mut s = format!(
        "L({p},{q}) q_inv={} alpha={} rho={} sigma={} s={}\n",
        report.spec.q_inv(),
        short(sh.alpha),
        short(sh.rho),
        short(sh.sigma),
        short(sh.s)
    );
    for c in &report.checks {
        let row = |name: &str, v: f64, t: f64| format!("  {name:<14} {v:.3e}  (tol {t:.0e}) {}\n", mark(v < t));
        s.push_str(&format!("k={}\n", c.k));
        s.push_str(&row("max |defect|", c.max_defect, tol.defect));
        s.push_str(&row("|A B|", c.ab, tol.ab));
        s.push_str(&row("|B C|", c.bc, tol.bc));
        s.push_str(&row("|A - A^T|", c.symmetry, tol.symmetry));
        s.push_str(&row("off-block", c.off_block, tol.block));
        s.push_str(&row("|A_j - A_j^*|", c.hermitian, tol.symmetry));
        s.push_str(&row("schlafli", c.schlafli, tol.schlafli));
        s.push_str(&row("pivot spread", c.pivot_spread.unwrap_or(0.0), tol.pivot_spread));
        let (g, e) = (c.global_ranks, c.expected_global_ranks);
        s.push_str(&format!(
            "  ranks C,B,A    {},{},{}  (expected {},{},{}) {}\n",
            g.0,
            g.1,
            g.2,
            e.0,
            e.1,
            e.2,
            mark(g == e)
        ));
        s.push_str("  j   rank C  rank B  rank A  torsion                 invariant               closed form\n");
        for cell in report.cells.iter().filter(|x| x.k == c.k) {
            let r = cell.ranks.expect("computed cell");
            let rc = r.c.map_or("-".to_string(), |x| x.to_string());
            s.push_str(&format!(
                "  {:<3} {:<7} {:<7} {:<7} {:<23.16e} {:<23.16e} {:.16e}\n",
                cell.j, rc, r.b, r.a, cell.torsion, cell.invariant, cell.closed_form
            ));
        }
    }
    for k in report.spec.k_range().filter(|&k| !report.spec.k_is_regular(k)) {
        s.push_str(&format!("k={k} degenerate (gcd(k,p) > 1)\n"));
    }
    s.push_str(if report.all_checks_pass() { "all checks pass\n" } else { "CHECKS FAILED\n" });
    s
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn oracle(args: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match LensSpec::new(args.lens.p, args.lens.q) {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    let (p, q) = (spec.p(), spec.q());
    let mut s = format!("L({p},{q})\n{:<4}{:<8}", "j", "branch");
    for k in spec.k_range() {
        let label = if spec.k_is_regular(k) { format!("k={k}") } else { format!("k={k}*") };
        s.push_str(&format!("{label:<22}"));
    }
    s.truncate(s.trim_end().len());
    s.push('\n');
    for j in 0..p {
        let branch = match FormulaBranch::of(p, j) {
            FormulaBranch::J0 => "j0",
            FormulaBranch::JPm1 => "j±1",
            FormulaBranch::Middle => "middle",
        };
        s.push_str(&format!("{j:<4}{branch:<8}"));
        for k in spec.k_range() {
            s.push_str(&format!("{:<22}", short(closed_form_invariant(p, q, j, k).value)));
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
    }
    if spec.k_range().any(|k| !spec.k_is_regular(k)) {
        s.push_str("* gcd(k,p) > 1: not computed by the pipeline\n");
    }
    match out.write_all(s.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_FAIL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_spec_is_input_error() {
        let e = LensSpec::new(2, 1).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_INVALID);
        assert_eq!(exit_code(&Error::SingularMinor { j: 0 }), EXIT_FAIL);
    }

    #[test]
    fn sweep_p3() {
        let s = sweep(3, 1e-6, 0, |p, q, j, k| closed_form_invariant(p, q, j, k).value);
        assert_eq!(s.spaces.len(), 2);
        assert!(s.pass);
        assert!(s.worst_rel_err < 1e-9);
    }
}
