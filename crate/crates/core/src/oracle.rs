//! Closed-form values of the invariants, built from the moduli of the
//! components of the Reidemeister torsion `Δ_m = 4·sin(πm/p)·sin(πqm/p)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::torsion::{CellStatus, TorsionReport};

/// Below this magnitude an oracle value is compared absolutely.
pub const REL_ERR_FLOOR: f64 = 1e-12;

/// `Δ_m` with `m` reduced modulo `p` first.
pub fn delta(m: i64, p: usize, q: usize) -> f64 {
    let p_i = p as i64;
    let m = m.rem_euclid(p_i) as f64;
    let p = p as f64;
    4.0 * libm::sin(PI * m / p) * libm::sin(PI * q as f64 * m / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaBranch {
    /// `j = 0`
    J0,
    /// `j ≡ ±1 (mod p)`
    JPm1,
    Middle,
}

impl FormulaBranch {
    pub fn of(p: usize, j: usize) -> Self {
        if j.is_multiple_of(p) {
            FormulaBranch::J0
        } else if j % p == 1 || j % p == p - 1 {
            FormulaBranch::JPm1
        } else {
            FormulaBranch::Middle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub p: usize,
    pub q: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
    pub branch: FormulaBranch,
}

/// Closed-form `I_{j,1}` for representation index `k`.
pub fn closed_form_invariant(p: usize, q: usize, j: usize, k: usize) -> OracleValue {
    closed_form_with(p, q, j, k, delta)
}

/// Closed form with a caller-supplied `Δ`; lets tests inject a faulty table.
pub fn closed_form_with(
    p: usize,
    q: usize,
    j: usize,
    k: usize,
    delta: impl Fn(i64, usize, usize) -> f64,
) -> OracleValue {
    let branch = FormulaBranch::of(p, j);
    let (pi, ji, ki) = (p as i64, j as i64, k as i64);
    let d = |m: i64| delta(m, p, q);
    let sign = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
    let p4 = (p * p * p * p) as f64;
    let value = match branch {
        FormulaBranch::J0 => {
            let dk = d(ki);
            sign(p - 1) * (dk * dk) * (dk * dk) / p4
        }
        FormulaBranch::JPm1 => {
            let (a, b) = (d(ki), d(2 * ki));
            sign(p - 1) * (a * a) * (b * b) / p4
        }
        FormulaBranch::Middle => {
            let prod = d((ji - 1) * ki % pi) * d(ji * ki % pi) * d((ji + 1) * ki % pi);
            sign(p) * prod * prod
        }
    };
    // + 0.0 turns a negative zero positive
    OracleValue { p, q, j, k, value: value + 0.0, branch }
}

/// Oracle values for block `j` over `k = 1..=⌊p/2⌋`, sorted ascending.
pub fn oracle_multiset(p: usize, q: usize, j: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (1..=p / 2).map(|k| closed_form_invariant(p, q, j, k).value).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest sorted-position difference between two multisets, or `None` on size mismatch.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(a.iter().zip(&b).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max))
}

/// `|computed − oracle| / max(|oracle|, floor)`; near-zero oracle values are compared absolutely.
pub fn relative_error(computed: f64, oracle: f64) -> f64 {
    let abs = libm::fabs(computed - oracle);
    if libm::fabs(oracle) < REL_ERR_FLOOR {
        abs
    } else {
        abs / libm::fabs(oracle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellVerdict {
    pub j: usize,
    pub k: usize,
    pub computed: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub cells: Vec<CellVerdict>,
    /// `(j, k)` cells excluded from comparison (degenerate representation index).
    pub excluded: Vec<(usize, usize)>,
    /// `(j, k)` cells that failed their structural checks.
    pub failed_checks: Vec<(usize, usize)>,
    pub worst_rel_err: f64,
    pub pass: bool,
}

/// Compare every ok cell of a report against the closed form.
pub fn compare(report: &TorsionReport, tol: f64) -> Verdict {
    compare_with(report, tol, |p, q, j, k| closed_form_invariant(p, q, j, k).value)
}

pub fn compare_with(report: &TorsionReport, tol: f64, oracle: impl Fn(usize, usize, usize, usize) -> f64) -> Verdict {
    let (p, q) = (report.spec.p(), report.spec.q());
    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    let mut failed_checks = Vec::new();
    for cell in &report.cells {
        match cell.status {
            CellStatus::Degenerate => excluded.push((cell.j, cell.k)),
            CellStatus::Failed => failed_checks.push((cell.j, cell.k)),
            CellStatus::Ok => {
                let o = oracle(p, q, cell.j, cell.k);
                let abs_err = libm::fabs(cell.invariant - o);
                let rel_err = relative_error(cell.invariant, o);
                cells.push(CellVerdict {
                    j: cell.j,
                    k: cell.k,
                    computed: cell.invariant,
                    oracle: o,
                    abs_err,
                    rel_err,
                    pass: rel_err < tol,
                });
            }
        }
    }
    let worst_rel_err = cells.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    let pass = failed_checks.is_empty() && cells.iter().all(|c| c.pass);
    Verdict { cells, excluded, failed_checks, worst_rel_err, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta_values() {
        assert_eq!(delta(0, 7, 3), 0.0);
        assert_relative_eq!(delta(1, 5, 2), libm::sqrt(5.0), epsilon = 1e-14);
        assert_relative_eq!(delta(1, 5, 2), 2.2360680, epsilon = 1e-7);
        let d12 = delta(1, 5, 2) * delta(2, 5, 2);
        assert_relative_eq!(d12 * d12, 25.0, epsilon = 1e-12);
        // reduction modulo p
        assert_relative_eq!(delta(6, 5, 2), delta(1, 5, 2), epsilon = 1e-14);
        assert_relative_eq!(delta(-1, 5, 2), delta(4, 5, 2), epsilon = 1e-14);
    }

    #[test]
    fn spot_values() {
        let v = closed_form_invariant(5, 2, 0, 1);
        assert_eq!(v.branch, FormulaBranch::J0);
        assert_relative_eq!(v.value, 0.04, max_relative = 1e-12);
        let v = closed_form_invariant(4, 1, 2, 1);
        assert_eq!(v.branch, FormulaBranch::Middle);
        assert_relative_eq!(v.value, 256.0, max_relative = 1e-12);
        let v = closed_form_invariant(3, 1, 1, 1);
        assert_eq!(v.branch, FormulaBranch::JPm1);
        assert_relative_eq!(v.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn branches() {
        assert_eq!(FormulaBranch::of(7, 0), FormulaBranch::J0);
        assert_eq!(FormulaBranch::of(7, 6), FormulaBranch::JPm1);
        assert_eq!(FormulaBranch::of(7, 3), FormulaBranch::Middle);
        assert_eq!(FormulaBranch::of(3, 2), FormulaBranch::JPm1);
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1e-13, 0.0), 1e-13);
        assert_relative_eq!(relative_error(1.1, 1.0), 0.1, epsilon = 1e-12);
    }
}
