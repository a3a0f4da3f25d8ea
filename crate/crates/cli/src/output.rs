//! JSON and CSV renderings of a [`TorsionReport`].

use std::io::{self, Write};

use lens_torsion::oracle::relative_error;
use lens_torsion::{CellStatus, Checks, TorsionReport};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Serialize)]
pub struct ReportJson {
    pub p: usize,
    pub q: usize,
    pub params: ParamsJson,
    pub results: Vec<CellJson>,
    pub checks: ChecksJson,
}

#[derive(Serialize)]
pub struct ParamsJson {
    pub q_inv: usize,
    pub seed: Option<u64>,
    pub alpha: f64,
    pub rho: f64,
    pub sigma: f64,
    pub s: f64,
}

#[derive(Serialize)]
pub struct CellJson {
    pub j: usize,
    pub k: usize,
    pub torsion: f64,
    pub invariant: f64,
    pub closed_form: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub status: &'static str,
}

#[derive(Serialize)]
pub struct ChecksJson {
    pub compare_tol: f64,
    pub worst_rel_err: f64,
    pub pass: bool,
    pub per_k: Vec<KChecksJson>,
}

#[derive(Serialize)]
pub struct KChecksJson {
    pub k: usize,
    pub max_defect: f64,
    pub ab: f64,
    pub bc: f64,
    pub symmetry: f64,
    pub off_block: f64,
    pub hermitian: f64,
    pub schlafli: f64,
    pub global_ranks: [usize; 3],
    pub expected_global_ranks: [usize; 3],
    pub block_ranks_ok: bool,
    pub pivot_spread: Option<f64>,
    pub failures: Vec<&'static str>,
}

/// One output row per cell, before serialization.
pub struct Row {
    pub j: usize,
    pub k: usize,
    pub torsion: f64,
    pub invariant: f64,
    pub closed_form: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub status: CellStatus,
}

pub fn rows(report: &TorsionReport, js: Option<&[usize]>) -> Vec<Row> {
    report
        .cells
        .iter()
        .filter(|c| js.is_none_or(|js| js.contains(&c.j)))
        .map(|c| {
            let computed = c.status != CellStatus::Degenerate;
            Row {
                j: c.j,
                k: c.k,
                torsion: c.torsion,
                invariant: c.invariant,
                closed_form: c.closed_form,
                abs_err: if computed { (c.invariant - c.closed_form).abs() } else { f64::NAN },
                rel_err: if computed { relative_error(c.invariant, c.closed_form) } else { f64::NAN },
                status: c.status,
            }
        })
        .collect()
}

fn k_checks(c: &Checks, report: &TorsionReport) -> KChecksJson {
    KChecksJson {
        k: c.k,
        max_defect: c.max_defect,
        ab: c.ab,
        bc: c.bc,
        symmetry: c.symmetry,
        off_block: c.off_block,
        hermitian: c.hermitian,
        schlafli: c.schlafli,
        global_ranks: [c.global_ranks.0, c.global_ranks.1, c.global_ranks.2],
        expected_global_ranks: [c.expected_global_ranks.0, c.expected_global_ranks.1, c.expected_global_ranks.2],
        block_ranks_ok: c.block_ranks_ok,
        pivot_spread: c.pivot_spread,
        failures: c.failures(&report.tolerances),
    }
}

pub fn to_json(report: &TorsionReport, js: Option<&[usize]>, compare_tol: f64) -> ReportJson {
    let rows = rows(report, js);
    let ok = || rows.iter().filter(|r| r.status == CellStatus::Ok);
    let worst_rel_err = ok().map(|r| r.rel_err).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.status != CellStatus::Failed) && ok().all(|r| r.rel_err < compare_tol);
    ReportJson {
        p: report.spec.p(),
        q: report.spec.q(),
        params: ParamsJson {
            q_inv: report.spec.q_inv(),
            seed: report.seed,
            alpha: report.shape.alpha,
            rho: report.shape.rho,
            sigma: report.shape.sigma,
            s: report.shape.s,
        },
        results: rows
            .iter()
            .map(|r| CellJson {
                j: r.j,
                k: r.k,
                torsion: r.torsion,
                invariant: r.invariant,
                closed_form: r.closed_form,
                abs_err: r.abs_err,
                rel_err: r.rel_err,
                status: r.status.as_str(),
            })
            .collect(),
        checks: ChecksJson {
            compare_tol,
            worst_rel_err,
            pass,
            per_k: report.checks.iter().map(|c| k_checks(c, report)).collect(),
        },
    }
}

/// Pretty printing with every float written to 17 significant digits.
struct SigFormatter(PrettyFormatter<'static>);

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Non-finite floats become `null`.
pub fn write_json<W: Write + ?Sized>(w: &mut W, value: &impl Serialize) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *w, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    writeln!(w)
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn write_csv<W: Write>(w: W, report: &TorsionReport, js: Option<&[usize]>) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["p", "q", "j", "k", "invariant", "closed_form", "rel_err", "status"])?;
    let (p, q) = (report.spec.p().to_string(), report.spec.q().to_string());
    for r in rows(report, js) {
        out.write_record([
            p.clone(),
            q.clone(),
            r.j.to_string(),
            r.k.to_string(),
            csv_float(r.invariant),
            csv_float(r.closed_form),
            csv_float(r.rel_err),
            r.status.as_str().to_string(),
        ])?;
    }
    out.flush()
}

/// Shortest decimal of `x` rounded to 12 significant digits.
pub fn short(x: f64) -> String {
    if !x.is_finite() {
        return "-".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}
