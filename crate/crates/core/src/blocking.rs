//! Fourier change of basis splitting the complex into `p` isotypic blocks.
//!
//! With `ε = e^{2πi/p}`:
//!
//! * `U1` (6 × 6) turns the rotation/translation pairs about the two in-plane
//!   axes into eigenvectors of the deck rotation;
//! * `H_m = U1·diag(ε^{−mk}, ε^{mk}, 1, ε^{−mk}, ε^{mk}, 1)` undoes the frame
//!   rotation carried by coordinate block `m`;
//! * `U2` has blocks `ε^{mnk}·H_m/√p` and `U3` blocks `ε^{mnk}·I_{p+2}/√p`.
//!
//! `C → U2†·C·U1`, `B → U3†·B·U2`, `A → U3†·A·U3` are then block diagonal up to
//! a pairing of blocks, which is detected from where the mass sits rather than
//! assumed.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::combinatorics::coprime;
use crate::error::{Error, Result};
use crate::jacobian::JacobianSet;
use crate::linalg::CMatrix;

/// Off-block mass below this fraction of a matrix's largest entry counts as zero.
pub const DEFAULT_BLOCK_TOL: f64 = 1e-9;

/// Whether block `j` carries rigid motions (`j ≡ 0, ±1 mod p`).
pub fn is_motion_block(p: usize, j: usize) -> bool {
    j == 0 || j == 1 || j + 1 == p
}

#[derive(Debug, Clone)]
pub struct BlockingContext {
    p: usize,
    k: usize,
    epsilon: Complex64,
    u1: CMatrix,
    h: Vec<CMatrix>,
    u2: CMatrix,
    u3: CMatrix,
}

pub fn build_context(p: usize, k: usize) -> Result<BlockingContext> {
    if p < 3 {
        return Err(Error::InvalidSpec("p must be ≥ 3".into()));
    }
    if k == 0 || k >= p || !coprime(p, k) {
        return Err(Error::DegenerateK { p, k });
    }
    let epsilon = Complex64::from_polar(1.0, 2.0 * PI / p as f64);
    let pow = |e: i64| Complex64::from_polar(1.0, 2.0 * PI * e.rem_euclid(p as i64) as f64 / p as f64);
    let h2 = libm::sqrt(2.0) / 2.0;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let u1 = CMatrix::from_fn(6, 6, |r, c| {
        if r / 3 != c / 3 {
            return re(0.0);
        }
        match (r % 3, c % 3) {
            (0, 0) | (1, 1) => re(h2),
            (0, 1) | (1, 0) => im(h2),
            (2, 2) => re(1.0),
            _ => re(0.0),
        }
    });
    let h: Vec<CMatrix> = (0..p)
        .map(|m| {
            let mk = (m * k) as i64;
            let diag = [pow(-mk), pow(mk), re(1.0)];
            CMatrix::from_fn(6, 6, |r, c| u1[(r, c)] * diag[c % 3])
        })
        .collect();
    let inv_sqrt_p = re(1.0 / libm::sqrt(p as f64));
    let u2 = CMatrix::from_fn(6 * p, 6 * p, |r, c| {
        let (m, n) = (r / 6, c / 6);
        pow((m * n * k) as i64) * h[m][(r % 6, c % 6)] * inv_sqrt_p
    });
    let w = p + 2;
    let u3 = CMatrix::from_fn(w * p, w * p, |r, c| {
        if r % w != c % w {
            return re(0.0);
        }
        pow(((r / w) * (c / w) * k) as i64) * inv_sqrt_p
    });
    Ok(BlockingContext { p, k, epsilon, u1, h, u2, u3 })
}

impl BlockingContext {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }

    pub fn u1(&self) -> &CMatrix {
        &self.u1
    }

    pub fn h(&self, m: usize) -> &CMatrix {
        &self.h[m]
    }

    pub fn u2(&self) -> &CMatrix {
        &self.u2
    }

    pub fn u3(&self) -> &CMatrix {
        &self.u3
    }

    /// `‖U†U − I‖_max` over `U1`, every `H_m`, `U2`, `U3`.
    pub fn unitarity_residual(&self) -> f64 {
        core::iter::once(&self.u1)
            .chain(self.h.iter())
            .chain([&self.u2, &self.u3])
            .map(|u| u.adjoint().matmul(u).sub(&CMatrix::identity(u.rows())).max_abs())
            .fold(0.0, f64::max)
    }
}

/// One isotypic subcomplex.
///
/// `c` is present for motion blocks only; it is the `6 × 2` block of
/// `U2†·C·U1` divided by `√p`, so that the subcomplex map is `√p·C_j`.
#[derive(Debug, Clone)]
pub struct BlockComplex {
    pub j: usize,
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: Option<CMatrix>,
    /// Largest off-block magnitude after conjugation, relative to each matrix's largest entry.
    pub residual: f64,
    /// Largest singular values of the full conjugated `A`, `B` and `C/√p`;
    /// block ranks are measured against these.
    pub sigma_ref: [f64; 3],
}

/// Ranks of one block's maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRanks {
    pub a: usize,
    pub b: usize,
    pub c: Option<usize>,
}

impl BlockRanks {
    /// Ranks forced by acyclicity: `(C, B, A) = (2, 4, p−2)` for motion blocks, `(−, 6, p−4)` otherwise.
    pub fn expected(p: usize, j: usize) -> Self {
        if is_motion_block(p, j) {
            BlockRanks { a: p - 2, b: 4, c: Some(2) }
        } else {
            BlockRanks { a: p - 4, b: 6, c: None }
        }
    }
}

impl BlockComplex {
    pub fn ranks(&self, rel_tol: f64) -> BlockRanks {
        BlockRanks {
            a: self.a.rank_above(rel_tol * self.sigma_ref[0]),
            b: self.b.rank_above(rel_tol * self.sigma_ref[1]),
            c: self.c.as_ref().map(|c| c.rank_above(rel_tol * self.sigma_ref[2])),
        }
    }

    /// `‖A_j − A_j†‖_max`.
    pub fn hermitian_residual(&self) -> f64 {
        self.a.sub(&self.a.adjoint()).max_abs()
    }

    /// `‖A_j·B_j‖_max` and `‖B_j·C_j‖_max` (zero when `C_j` is absent).
    pub fn complex_residuals(&self) -> (f64, f64) {
        let ab = self.a.matmul(&self.b).max_abs();
        let bc = self.c.as_ref().map_or(0.0, |c| self.b.matmul(c).max_abs());
        (ab, bc)
    }
}

/// Conjugate `A`, `B`, `C` and cut them into blocks.
pub fn conjugate_and_split(ctx: &BlockingContext, jac: &JacobianSet) -> Result<Vec<BlockComplex>> {
    conjugate_and_split_with_tol(ctx, jac, DEFAULT_BLOCK_TOL)
}

pub fn conjugate_and_split_with_tol(ctx: &BlockingContext, jac: &JacobianSet, tol: f64) -> Result<Vec<BlockComplex>> {
    let p = ctx.p;
    let w = p + 2;
    if jac.a.rows() != w * p || jac.b.cols() != 6 * p || jac.c.rows() != 6 * p {
        return Err(Error::BlockStructureViolation(format!(
            "matrix shapes do not match p={p}: A {}x{}, B {}x{}, C {}x{}",
            jac.a.rows(),
            jac.a.cols(),
            jac.b.rows(),
            jac.b.cols(),
            jac.c.rows(),
            jac.c.cols()
        )));
    }
    let at = ctx.u3.adjoint().matmul(&jac.a.to_complex()).matmul(&ctx.u3);
    let bt = ctx.u3.adjoint().matmul(&jac.b.to_complex()).matmul(&ctx.u2);
    let ct = ctx.u2.adjoint().matmul(&jac.c.to_complex()).matmul(&ctx.u1);
    let (a_max, b_max, c_max) = (at.max_abs(), bt.max_abs(), ct.max_abs());

    // B: each length block j pairs with exactly one coordinate block pair_of[j].
    let mut pair_of = Vec::with_capacity(p);
    for j in 0..p {
        let hits: Vec<usize> = (0..p).filter(|&n| bt.block(j * w, n * 6, w, 6).max_abs() > tol * b_max).collect();
        match hits.as_slice() {
            [n] => pair_of.push(*n),
            _ => {
                return Err(Error::BlockStructureViolation(format!(
                    "length block {j} couples to coordinate blocks {hits:?}"
                )))
            }
        }
    }
    let mut seen = alloc::vec![false; p];
    for &n in &pair_of {
        if core::mem::replace(&mut seen[n], true) {
            return Err(Error::BlockStructureViolation(format!("coordinate block {n} paired twice")));
        }
    }
    let block_of_coord: Vec<usize> = {
        let mut inv = alloc::vec![0; p];
        for (j, &n) in pair_of.iter().enumerate() {
            inv[n] = j;
        }
        inv
    };

    // C: each motion column lands in exactly one coordinate block.
    let mut c_cols: Vec<Vec<usize>> = alloc::vec![Vec::new(); p];
    for col in 0..6 {
        let hits: Vec<usize> = (0..p).filter(|&n| ct.block(n * 6, col, 6, 1).max_abs() > tol * c_max).collect();
        match hits.as_slice() {
            [n] => c_cols[block_of_coord[*n]].push(col),
            _ => {
                return Err(Error::BlockStructureViolation(format!(
                    "motion column {col} spreads over coordinate blocks {hits:?}"
                )))
            }
        }
    }
    for (j, cols) in c_cols.iter().enumerate() {
        let want = if is_motion_block(p, j) { 2 } else { 0 };
        if cols.len() != want {
            return Err(Error::BlockStructureViolation(format!(
                "block {j} receives {} motion columns, expected {want}",
                cols.len()
            )));
        }
    }

    // Off-block residuals.
    let mut res_a: f64 = 0.0;
    for r in 0..w * p {
        for c in 0..w * p {
            if r / w != c / w {
                res_a = res_a.max(at[(r, c)].norm());
            }
        }
    }
    let mut res_b: f64 = 0.0;
    for r in 0..w * p {
        for c in 0..6 * p {
            if pair_of[r / w] != c / 6 {
                res_b = res_b.max(bt[(r, c)].norm());
            }
        }
    }
    let mut res_c: f64 = 0.0;
    for r in 0..6 * p {
        for c in 0..6 {
            if !c_cols[block_of_coord[r / 6]].contains(&c) {
                res_c = res_c.max(ct[(r, c)].norm());
            }
        }
    }
    let rel = |x: f64, m: f64| if m > 0.0 { x / m } else { 0.0 };
    let residual = rel(res_a, a_max).max(rel(res_b, b_max)).max(rel(res_c, c_max));
    if residual > tol {
        return Err(Error::BlockStructureViolation(format!("off-block residual {residual:e} exceeds {tol:e}")));
    }

    let scale = Complex64::new(1.0 / libm::sqrt(p as f64), 0.0);
    let mut blocks: Vec<BlockComplex> = (0..p)
        .map(|j| {
            let n = pair_of[j];
            let c = if c_cols[j].is_empty() {
                None
            } else {
                let rows: Vec<usize> = (n * 6..n * 6 + 6).collect();
                Some(ct.select(&rows, &c_cols[j]).scale(scale))
            };
            BlockComplex {
                j,
                a: at.block(j * w, j * w, w, w),
                b: bt.block(j * w, n * 6, w, 6),
                c,
                residual,
                sigma_ref: [0.0; 3],
            }
        })
        .collect();

    // Block-diagonal after a unitary change of basis: the global largest
    // singular value is the largest over blocks.
    let mut sigma_ref = [0.0f64; 3];
    for b in &blocks {
        sigma_ref[0] = sigma_ref[0].max(first_sv(&b.a));
        sigma_ref[1] = sigma_ref[1].max(first_sv(&b.b));
        if let Some(c) = &b.c {
            sigma_ref[2] = sigma_ref[2].max(first_sv(c));
        }
    }
    for b in &mut blocks {
        b.sigma_ref = sigma_ref;
    }
    Ok(blocks)
}

fn first_sv(m: &CMatrix) -> f64 {
    m.singular_values().first().copied().unwrap_or(0.0)
}
