//! The three matrices of the acyclic complex.
//!
//! * `C`: rigid motions → vertex displacements (6p × 6)
//! * `B`: vertex displacements → edge-length differentials ((p²+2p) × 6p)
//! * `A`: length differentials → defect-angle differentials ((p²+2p) × (p²+2p))
//!
//! Row and column orders follow the block layout of [`Triangulation`].

use crate::combinatorics::{Triangulation, TET_EDGE_PAIRS};
use crate::error::{Error, Result};
use crate::geometry::{opposite, tet_from_lengths, Point3, Realization};
use crate::linalg::RMatrix;

/// Motion generators, in column order of `C`: rotations about the `u`, `v`, `w`
/// axes, then translations along them.
pub const MOTION_GENERATORS: [&str; 6] = ["dphi_u", "dphi_v", "dphi_w", "dx_u", "dx_v", "dx_w"];

/// Displacement of `x` under motion generator `g` (see [`MOTION_GENERATORS`]).
pub fn motion_displacement(g: usize, x: Point3) -> Point3 {
    match g {
        // axis × x
        0 => [0.0, -x[2], x[1]],
        1 => [x[2], 0.0, -x[0]],
        2 => [-x[1], x[0], 0.0],
        3 => [1.0, 0.0, 0.0],
        4 => [0.0, 1.0, 0.0],
        5 => [0.0, 0.0, 1.0],
        _ => panic!("motion generator index {g} out of range"),
    }
}

pub fn matrix_c(tri: &Triangulation, real: &Realization) -> RMatrix {
    let nv = tri.vertices().len();
    let mut c = RMatrix::zeros(3 * nv, 6);
    for (vi, &x) in real.points().iter().enumerate() {
        for g in 0..6 {
            let d = motion_displacement(g, x);
            for axis in 0..3 {
                c[(3 * vi + axis, g)] = d[axis];
            }
        }
    }
    c
}

pub fn matrix_b(tri: &Triangulation, real: &Realization) -> Result<RMatrix> {
    let p = tri.p();
    let mut b = RMatrix::zeros(tri.edges().len(), 3 * tri.vertices().len());
    for (ei, e) in tri.edges().iter().enumerate() {
        let (u, v) = e.endpoints(p);
        let (iu, iv) = (tri.vertex_index(u), tri.vertex_index(v));
        let (xu, xv) = (real.points()[iu], real.points()[iv]);
        let l = real.lengths()[ei];
        if !(l > 0.0) {
            return Err(Error::ZeroLengthEdge { edge: ei });
        }
        for axis in 0..3 {
            let g = (xu[axis] - xv[axis]) / l;
            b[(ei, 3 * iu + axis)] = g;
            b[(ei, 3 * iv + axis)] = -g;
        }
    }
    Ok(b)
}

/// Gradient of each dihedral angle with respect to the 12 vertex coordinates.
///
/// Moving an apex `c` off the plane of face `abc` rotates that face about the
/// edge: `∂θ/∂x_c = −n_c / h_c` with `n_c` the unit face normal pointing to the
/// fourth vertex and `h_c` the height of `c` over the edge line. The edge
/// endpoints take the remaining weight so that translations and rotations
/// leave `θ` unchanged.
pub fn dihedral_gradient(pts: &[Point3; 4]) -> RMatrix {
    let mut g = RMatrix::zeros(6, 12);
    for (row, &(a, b)) in TET_EDGE_PAIRS.iter().enumerate() {
        let (c, d) = opposite(a, b);
        let e = sub(pts[b], pts[a]);
        let ee = dot(e, e);
        let apex = |c: usize, d: usize| -> (Point3, f64) {
            let rel = sub(pts[c], pts[a]);
            let t = dot(rel, e) / ee;
            let h = norm(sub(rel, scale(e, t)));
            let mut n = cross(e, rel);
            let nn = norm(n);
            n = scale(n, 1.0 / nn);
            if dot(n, sub(pts[d], pts[a])) < 0.0 {
                n = scale(n, -1.0);
            }
            (scale(n, -1.0 / h), t)
        };
        let (gc, tc) = apex(c, d);
        let (gd, td) = apex(d, c);
        for axis in 0..3 {
            g[(row, 3 * c + axis)] = gc[axis];
            g[(row, 3 * d + axis)] = gd[axis];
            g[(row, 3 * a + axis)] = -(1.0 - tc) * gc[axis] - (1.0 - td) * gd[axis];
            g[(row, 3 * b + axis)] = -tc * gc[axis] - td * gd[axis];
        }
    }
    g
}

/// Gradient of the six edge lengths with respect to the 12 vertex coordinates.
pub fn length_gradient(pts: &[Point3; 4]) -> RMatrix {
    let mut g = RMatrix::zeros(6, 12);
    for (row, &(a, b)) in TET_EDGE_PAIRS.iter().enumerate() {
        let e = sub(pts[b], pts[a]);
        let u = scale(e, 1.0 / norm(e));
        for axis in 0..3 {
            g[(row, 3 * b + axis)] = u[axis];
            g[(row, 3 * a + axis)] = -u[axis];
        }
    }
    g
}

/// `J[e][e'] = ∂θ_e/∂l_{e'}` for the tetrahedron with edge lengths `l`.
///
/// Dihedral angles are motion invariant, so their coordinate gradient factors
/// through the length gradient `L` (6 × 12, full row rank):
/// `∂θ/∂x = J·L`, hence `J = (∂θ/∂x)·Lᵀ·(L·Lᵀ)⁻¹`.
pub fn tet_angle_jacobian(l: &[f64; 6]) -> Result<[[f64; 6]; 6]> {
    let pts = tet_from_lengths(l)?;
    let dtheta = dihedral_gradient(&pts);
    let dl = length_gradient(&pts);
    let gram = dl.matmul(&dl.transpose());
    let rhs = dl.matmul(&dtheta.transpose());
    let jt = gram.solve(&rhs).ok_or(Error::NotRealizable { cayley_menger: 0.0 })?;
    Ok(core::array::from_fn(|i| core::array::from_fn(|j| jt[(j, i)])))
}

/// `A[e,e'] = −Σ_t sign(V_t)·J_t[e,e']` over tetrahedra containing both edges.
pub fn matrix_a(tri: &Triangulation, real: &Realization) -> Result<RMatrix> {
    let ne = tri.edges().len();
    let mut a = RMatrix::zeros(ne, ne);
    for (ti, edges) in tri.tet_edges().iter().enumerate() {
        let l = edges.map(|e| real.lengths()[e]);
        let jac = tet_angle_jacobian(&l)?;
        let eps = real.orientation(ti);
        for (i, &ei) in edges.iter().enumerate() {
            for (j, &ej) in edges.iter().enumerate() {
                a[(ei, ej)] -= eps * jac[i][j];
            }
        }
    }
    Ok(a)
}

/// The matrices `A`, `B`, `C` of one realization.
#[derive(Debug, Clone)]
pub struct JacobianSet {
    pub a: RMatrix,
    pub b: RMatrix,
    pub c: RMatrix,
}

pub fn assemble(tri: &Triangulation, real: &Realization) -> Result<JacobianSet> {
    Ok(JacobianSet { a: matrix_a(tri, real)?, b: matrix_b(tri, real)?, c: matrix_c(tri, real) })
}

impl JacobianSet {
    /// `‖A·B‖_max / (‖A‖_max·‖B‖_max)`.
    pub fn ab_residual(&self) -> f64 {
        relative_product(&self.a, &self.b)
    }

    /// `‖B·C‖_max / (‖B‖_max·‖C‖_max)`.
    pub fn bc_residual(&self) -> f64 {
        relative_product(&self.b, &self.c)
    }

    /// `‖A − Aᵀ‖_max`.
    pub fn symmetry_residual(&self) -> f64 {
        self.a.sub(&self.a.transpose()).max_abs()
    }

    /// Ranks of `(C, B, A)` with singular values below `rel_tol·σ_max` counted as zero.
    pub fn ranks(&self, rel_tol: f64) -> (usize, usize, usize) {
        (self.c.rank(rel_tol), self.b.rank(rel_tol), self.a.rank(rel_tol))
    }
}

fn relative_product(x: &RMatrix, y: &RMatrix) -> f64 {
    let denom = x.max_abs() * y.max_abs();
    if denom == 0.0 {
        return 0.0;
    }
    x.matmul(y).max_abs() / denom
}

/// Largest `|Σ_e' J[e][e']·l_e'|`; zero by the Schläfli identity.
pub fn schlafli_residual(l: &[f64; 6], jac: &[[f64; 6]; 6]) -> f64 {
    jac.iter().map(|row| libm::fabs(row.iter().zip(l).map(|(a, b)| a * b).sum::<f64>())).fold(0.0, f64::max)
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm(a: Point3) -> f64 {
    libm::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{build_triangulation, LensSpec};
    use crate::geometry::{realize, GeomParams};

    #[test]
    fn translation_and_rotation_columns() {
        assert_eq!(motion_displacement(5, [3.0, -1.0, 2.0]), [0.0, 0.0, 1.0]);
        assert_eq!(motion_displacement(2, [1.5, 0.0, 0.0]), [0.0, 1.5, 0.0]);
        let tri = build_triangulation(LensSpec::new(5, 2).unwrap());
        let real = realize(&tri, GeomParams { alpha: 0.4, rho: 1.3, sigma: 0.7, s: 1.1, k: 1 }).unwrap();
        let c = matrix_c(&tri, &real);
        for v in 0..10 {
            assert_eq!([c[(3 * v, 5)], c[(3 * v + 1, 5)], c[(3 * v + 2, 5)]], [0.0, 0.0, 1.0]);
        }
        // B_0 sits at (ρ, 0, 0); rotation about w moves it along v
        assert_eq!([c[(0, 2)], c[(1, 2)], c[(2, 2)]], [0.0, 1.3, 0.0]);
    }

    #[test]
    fn regular_tet_jacobian_annihilates_ones() {
        let j = tet_angle_jacobian(&[1.0; 6]).unwrap();
        for row in j {
            assert!(row.iter().sum::<f64>().abs() < 1e-13);
        }
    }

    #[test]
    fn opposite_edge_entry() {
        // ∂θ_e/∂l_opp = l_e·l_opp/(6V); regular unit tet has V = 1/(6√2)
        let j = tet_angle_jacobian(&[1.0; 6]).unwrap();
        let expected = libm::sqrt(2.0);
        // local edges 0 = (0,1) and 5 = (2,3) are opposite
        assert!((j[0][5] - expected).abs() < 1e-12, "{}", j[0][5]);
    }
}
