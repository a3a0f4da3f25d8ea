#![allow(dead_code, clippy::needless_range_loop)]

use lens_torsion::geometry::{cayley_menger, dihedral_angles, tet_from_lengths};
use lens_torsion::{RMatrix, Realization, Triangulation};

/// Ridders' extrapolation of central differences, starting from step `h`;
/// returns the estimate with the smallest error.
pub fn richardson(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const N: usize = 10;
    let mut table = [[0.0f64; N]; N];
    let mut hh = h;
    table[0][0] = (f(hh) - f(-hh)) / (2.0 * hh);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..N {
        hh /= CON;
        table[0][i] = (f(hh) - f(-hh)) / (2.0 * hh);
        let mut fac = CON2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (table[j][i] - table[j - 1][i]).abs().max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    best
}

fn angles(l: &[f64; 6]) -> [f64; 6] {
    dihedral_angles(&tet_from_lengths(l).unwrap()).unwrap()
}

/// `∂θ_e/∂l_e'` by differencing dihedral angles of reconstructed tetrahedra.
pub fn fd_tet_jacobian(l: &[f64; 6]) -> [[f64; 6]; 6] {
    // step small against the thinnest direction of the tetrahedron
    let lmax = l.iter().copied().fold(0.0, f64::max);
    let height = 6.0 * (cayley_menger(l) / 288.0).sqrt() / (lmax * lmax);
    let h = 0.01 * height.min(lmax);
    let mut out = [[0.0; 6]; 6];
    for col in 0..6 {
        for row in 0..6 {
            out[row][col] = richardson(
                |t| {
                    let mut m = *l;
                    m[col] += t;
                    angles(&m)[row]
                },
                h,
            );
        }
    }
    out
}

/// Unreduced `ω_e` as a function of all edge lengths.
pub fn raw_defect(tri: &Triangulation, real: &Realization, lengths: &[f64], e: usize) -> f64 {
    -tri.incidence(e)
        .iter()
        .map(|&(t, local)| {
            let l = tri.tet_edges()[t].map(|i| lengths[i]);
            real.volumes()[t].signum() * angles(&l)[local]
        })
        .sum::<f64>()
}

/// `∂ω_e/∂l_e'` by differencing the defect sums.
pub fn fd_matrix_a(tri: &Triangulation, real: &Realization) -> RMatrix {
    let n = tri.edges().len();
    let mut a = RMatrix::zeros(n, n);
    for col in 0..n {
        let h = 1e-4 * real.lengths()[col].max(1.0);
        for row in 0..n {
            a[(row, col)] = richardson(
                |t| {
                    let mut l = real.lengths().to_vec();
                    l[col] += t;
                    raw_defect(tri, real, &l, row)
                },
                h,
            );
        }
    }
    a
}

/// `∂l_e/∂x` by differencing edge lengths of displaced vertices.
pub fn fd_matrix_b(tri: &Triangulation, real: &Realization) -> RMatrix {
    let p = tri.p();
    let n = tri.edges().len();
    let mut b = RMatrix::zeros(n, 3 * tri.vertices().len());
    for col in 0..3 * tri.vertices().len() {
        let (vi, axis) = (col / 3, col % 3);
        for (row, e) in tri.edges().iter().enumerate() {
            let (u, v) = e.endpoints(p);
            let (iu, iv) = (tri.vertex_index(u), tri.vertex_index(v));
            b[(row, col)] = richardson(
                |t| {
                    let mut xu = real.points()[iu];
                    let mut xv = real.points()[iv];
                    if iu == vi {
                        xu[axis] += t;
                    }
                    if iv == vi {
                        xv[axis] += t;
                    }
                    lens_torsion::geometry::distance(xu, xv)
                },
                1e-4,
            );
        }
    }
    b
}

pub fn max_diff(a: &RMatrix, b: &RMatrix) -> f64 {
    a.sub(b).max_abs()
}

pub fn coprime_pairs(p_max: usize) -> Vec<(usize, usize)> {
    (3..=p_max)
        .flat_map(|p| (1..p).filter(move |&q| lens_torsion::combinatorics::coprime(q, p)).map(move |q| (p, q)))
        .collect()
}
