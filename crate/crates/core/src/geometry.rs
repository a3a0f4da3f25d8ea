//! Euclidean realization of the cover and its metric quantities.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::combinatorics::{LensSpec, Tet, Triangulation, Vertex, TET_EDGE_PAIRS};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

pub type Point3 = [f64; 3];

/// Default nondegeneracy floor, relative to `ρσs`.
pub const DEFAULT_DELTA_MIN: f64 = 1e-6;

/// Placement of the vertices: `B_m` on a circle of radius `rho` in the plane
/// `w = 0`, `C_n` on a circle of radius `sigma` in the plane `w = s`, rotated
/// by `alpha`. `k` selects the deck rotation angle `2πk/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomParams {
    pub alpha: f64,
    pub rho: f64,
    pub sigma: f64,
    pub s: f64,
    pub k: usize,
}

impl GeomParams {
    /// Smallest `|sin(α + π(q−1−2m)k/p)|` over `m`; every tetrahedron volume is
    /// proportional to one of these factors.
    pub fn volume_sine_floor(&self, spec: &LensSpec) -> f64 {
        let p = spec.p() as f64;
        let (q, k) = (spec.q() as f64, self.k as f64);
        (0..spec.p())
            .map(|m| libm::fabs(libm::sin(self.alpha + PI * (q - 1.0 - 2.0 * m as f64) * k / p)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, spec: &LensSpec, delta_min: f64) -> Result<()> {
        for (name, v) in [("rho", self.rho), ("sigma", self.sigma), ("s", self.s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::DegenerateParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::DegenerateParams(format!("alpha must be finite, got {}", self.alpha)));
        }
        if self.k == 0 || self.k >= spec.p() {
            return Err(Error::DegenerateParams(format!("k must satisfy 1 ≤ k ≤ p−1, got k={}", self.k)));
        }
        let floor = self.volume_sine_floor(spec);
        if floor <= delta_min {
            return Err(Error::DegenerateParams(format!(
                "alpha={} puts a tetrahedron volume factor at {floor:e} (floor {delta_min:e})",
                self.alpha
            )));
        }
        Ok(())
    }
}

pub fn vertex_position(spec: &LensSpec, params: &GeomParams, v: Vertex) -> Point3 {
    let p = spec.p() as f64;
    let k = params.k as f64;
    match v {
        Vertex::B(m) => {
            let phi = 2.0 * PI * m as f64 * k / p;
            [params.rho * libm::cos(phi), params.rho * libm::sin(phi), 0.0]
        }
        Vertex::C(n) => {
            let phi = params.alpha + 2.0 * PI * spec.q() as f64 * n as f64 * k / p;
            [params.sigma * libm::cos(phi), params.sigma * libm::sin(phi), params.s]
        }
    }
}

/// Closed-form oriented volume of `T(n,m)`; the `C_n` phase enters as a shift of `α`.
pub fn closed_form_volume(spec: &LensSpec, params: &GeomParams, tet: Tet) -> f64 {
    let p = spec.p() as f64;
    let (q, k) = (spec.q() as f64, params.k as f64);
    let alpha = params.alpha + 2.0 * PI * q * tet.n as f64 * k / p;
    4.0 / 6.0
        * params.rho
        * params.sigma
        * params.s
        * libm::sin(PI * k / p)
        * libm::sin(PI * q * k / p)
        * libm::sin(alpha + PI * (q - 1.0 - 2.0 * tet.m as f64) * k / p)
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

pub(crate) fn norm(a: Point3) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

/// One sixth of `det[x1−x0, x2−x0, x3−x0]`.
pub fn signed_volume(pts: &[Point3; 4]) -> f64 {
    let a = sub(pts[1], pts[0]);
    let b = sub(pts[2], pts[0]);
    let c = sub(pts[3], pts[0]);
    dot(a, cross(b, c)) / 6.0
}

/// Edge lengths in [`TET_EDGE_PAIRS`] order.
pub fn tet_lengths(pts: &[Point3; 4]) -> [f64; 6] {
    TET_EDGE_PAIRS.map(|(a, b)| distance(pts[a], pts[b]))
}

/// Area of the face opposite each vertex.
pub fn face_areas(pts: &[Point3; 4]) -> [f64; 4] {
    core::array::from_fn(|skip| {
        let f: Vec<Point3> = (0..4).filter(|&i| i != skip).map(|i| pts[i]).collect();
        0.5 * norm(cross(sub(f[1], f[0]), sub(f[2], f[0])))
    })
}

fn is_degenerate(pts: &[Point3; 4]) -> Option<f64> {
    let v = signed_volume(pts);
    let scale = tet_lengths(pts).into_iter().fold(0.0, f64::max);
    if !(libm::fabs(v) > 1e-12 * scale * scale * scale) {
        Some(v)
    } else {
        None
    }
}

/// Interior dihedral angle at each of the six edges, in `(0, π)`.
///
/// `sin θ` comes from `3·l·|V| / (2·A₁·A₂)` and `cos θ` from the face normals;
/// the angle is their `atan2`.
pub fn dihedral_angles(pts: &[Point3; 4]) -> Result<[f64; 6]> {
    if let Some(volume) = is_degenerate(pts) {
        return Err(Error::DegenerateTet { volume });
    }
    let vol = libm::fabs(signed_volume(pts));
    let mut out = [0.0; 6];
    for (slot, &(a, b)) in out.iter_mut().zip(TET_EDGE_PAIRS.iter()) {
        let (c, d) = opposite(a, b);
        let e = sub(pts[b], pts[a]);
        let l = norm(e);
        let nc = cross(e, sub(pts[c], pts[a]));
        let nd = cross(e, sub(pts[d], pts[a]));
        // |nc| = 2·A(abc), |nd| = 2·A(abd)
        let area_c = 0.5 * norm(nc);
        let area_d = 0.5 * norm(nd);
        let sin = 3.0 * l * vol / (2.0 * area_c * area_d);
        let cos = dot(nc, nd) / (norm(nc) * norm(nd));
        *slot = libm::atan2(sin, cos);
    }
    Ok(out)
}

/// The two local vertices not on edge `(a, b)`.
pub(crate) fn opposite(a: usize, b: usize) -> (usize, usize) {
    let mut it = (0..4).filter(|&i| i != a && i != b);
    (it.next().unwrap(), it.next().unwrap())
}

/// Cayley–Menger determinant of six lengths; equals `288·V²`.
pub fn cayley_menger(l: &[f64; 6]) -> f64 {
    let d = l.map(|x| x * x);
    let [d01, d02, d03, d12, d13, d23] = d;
    let rows = [
        [0.0, 1.0, 1.0, 1.0, 1.0],
        [1.0, 0.0, d01, d02, d03],
        [1.0, d01, 0.0, d12, d13],
        [1.0, d02, d12, 0.0, d23],
        [1.0, d03, d13, d23, 0.0],
    ];
    RMatrix::from_fn(5, 5, |i, j| rows[i][j]).determinant()
}

/// Embed six lengths (in [`TET_EDGE_PAIRS`] order) as a positively oriented
/// tetrahedron: first point at the origin, second on the first axis, third in
/// the first coordinate plane.
pub fn tet_from_lengths(l: &[f64; 6]) -> Result<[Point3; 4]> {
    let cm = cayley_menger(l);
    let scale = l.iter().fold(0.0f64, |a, &b| a.max(b));
    if !(cm > 1e-14 * (scale * scale * scale) * (scale * scale * scale)) || l.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NotRealizable { cayley_menger: cm });
    }
    let [l01, l02, l03, l12, l13, l23] = *l;
    let x2a = (l01 * l01 + l02 * l02 - l12 * l12) / (2.0 * l01);
    let h2 = l02 * l02 - x2a * x2a;
    if !(h2 > 0.0) {
        return Err(Error::NotRealizable { cayley_menger: cm });
    }
    let x2b = libm::sqrt(h2);
    let x3a = (l01 * l01 + l03 * l03 - l13 * l13) / (2.0 * l01);
    let x3b = (l03 * l03 - l23 * l23 + x2a * x2a + x2b * x2b - 2.0 * x3a * x2a) / (2.0 * x2b);
    let h3 = l03 * l03 - x3a * x3a - x3b * x3b;
    if !(h3 > 0.0) {
        return Err(Error::NotRealizable { cayley_menger: cm });
    }
    Ok([[0.0; 3], [l01, 0.0, 0.0], [x2a, x2b, 0.0], [x3a, x3b, libm::sqrt(h3)]])
}

/// Reduce an angle to `(−π, π]`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = libm::fmod(x + PI, 2.0 * PI);
    let r = if r <= 0.0 { r + 2.0 * PI } else { r };
    r - PI
}

/// A triangulation placed in ℝ³ with all metric quantities cached.
#[derive(Debug, Clone)]
pub struct Realization {
    spec: LensSpec,
    params: GeomParams,
    points: Vec<Point3>,
    lengths: Vec<f64>,
    volumes: Vec<f64>,
    dihedrals: Vec<[f64; 6]>,
    defects: Vec<f64>,
}

pub fn realize(tri: &Triangulation, params: GeomParams) -> Result<Realization> {
    realize_with_floor(tri, params, DEFAULT_DELTA_MIN)
}

pub fn realize_with_floor(tri: &Triangulation, params: GeomParams, delta_min: f64) -> Result<Realization> {
    let spec = *tri.spec();
    params.validate(&spec, delta_min)?;
    let p = spec.p();
    let points: Vec<Point3> = tri.vertices().iter().map(|&v| vertex_position(&spec, &params, v)).collect();
    let at = |v: Vertex| points[tri.vertex_index(v)];
    let lengths: Vec<f64> = tri
        .edges()
        .iter()
        .map(|e| {
            let (u, v) = e.endpoints(p);
            distance(at(u), at(v))
        })
        .collect();
    let floor = delta_min * params.rho * params.sigma * params.s;
    let mut volumes = Vec::with_capacity(tri.tets().len());
    let mut dihedrals = Vec::with_capacity(tri.tets().len());
    for t in tri.tets() {
        let pts = t.vertices(p).map(at);
        let v = signed_volume(&pts);
        if !(libm::fabs(v) >= floor) {
            return Err(Error::DegenerateParams(format!("{t} has volume {v:e} below {floor:e}")));
        }
        volumes.push(v);
        dihedrals.push(dihedral_angles(&pts)?);
    }
    let mut real = Realization { spec, params, points, lengths, volumes, dihedrals, defects: Vec::new() };
    real.defects = defect_angles(tri, &real);
    Ok(real)
}

/// `ω_e = −Σ_{t∋e} sign(V_t)·θ_{t,e}`, reduced to `(−π, π]`.
pub fn defect_angles(tri: &Triangulation, real: &Realization) -> Vec<f64> {
    (0..tri.edges().len())
        .map(|e| {
            let total: f64 = tri
                .incidence(e)
                .iter()
                .map(|&(t, local)| libm::copysign(1.0, real.volumes[t]) * real.dihedrals[t][local])
                .sum();
            reduce_angle(-total)
        })
        .collect()
}

impl Realization {
    pub fn spec(&self) -> &LensSpec {
        &self.spec
    }

    pub fn params(&self) -> &GeomParams {
        &self.params
    }

    /// Vertex positions in coordinate-space order.
    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, tri: &Triangulation, v: Vertex) -> Point3 {
        self.points[tri.vertex_index(v)]
    }

    pub fn tet_points(&self, tri: &Triangulation, t: Tet) -> [Point3; 4] {
        t.vertices(self.spec.p()).map(|v| self.point(tri, v))
    }

    /// Edge lengths in length-space order.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn dihedrals(&self) -> &[[f64; 6]] {
        &self.dihedrals
    }

    pub fn defects(&self) -> &[f64] {
        &self.defects
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|x| libm::fabs(*x)).fold(0.0, f64::max)
    }

    /// Sign of the oriented volume of each tetrahedron.
    pub fn orientation(&self, tet_index: usize) -> f64 {
        libm::copysign(1.0, self.volumes[tet_index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::build_triangulation;
    use approx::assert_relative_eq;
    use core::f64::consts::FRAC_PI_2;

    const CORNER: [Point3; 4] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    fn regular() -> [Point3; 4] {
        // alternate cube corners, scaled to unit edge length
        let h = 1.0 / (2.0 * libm::sqrt(2.0));
        [[h, h, h], [h, -h, -h], [-h, h, -h], [-h, -h, h]]
    }

    #[test]
    fn corner_volume_and_flip() {
        assert_relative_eq!(signed_volume(&CORNER), 1.0 / 6.0, epsilon = 1e-15);
        let mut swapped = CORNER;
        swapped.swap(1, 2);
        assert_relative_eq!(signed_volume(&swapped), -1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn corner_dihedrals() {
        let th = dihedral_angles(&CORNER).unwrap();
        // edges at the corner vertex 0 are local edges 0, 1, 2
        for &i in &[0, 1, 2] {
            assert_relative_eq!(th[i], FRAC_PI_2, epsilon = 1e-14);
        }
    }

    #[test]
    fn regular_dihedrals() {
        let pts = regular();
        for x in tet_lengths(&pts) {
            assert_relative_eq!(x, 1.0, epsilon = 1e-14);
        }
        let th = dihedral_angles(&pts).unwrap();
        for t in th {
            assert_relative_eq!(t, libm::acos(1.0 / 3.0), epsilon = 1e-14);
            assert_relative_eq!(t, 1.2309594, epsilon = 1e-7);
        }
    }

    #[test]
    fn degenerate_tet_rejected() {
        let flat = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(dihedral_angles(&flat), Err(Error::DegenerateTet { .. })));
    }

    #[test]
    fn lengths_embedding() {
        let unit = tet_from_lengths(&[1.0; 6]).unwrap();
        for x in tet_lengths(&unit) {
            assert_relative_eq!(x, 1.0, epsilon = 1e-15);
        }
        let r2 = libm::sqrt(2.0);
        let l = [1.0, 1.0, 1.0, r2, r2, r2];
        let pts = tet_from_lengths(&l).unwrap();
        for (a, b) in tet_lengths(&pts).iter().zip(l) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
        assert!(signed_volume(&pts) > 0.0);
        assert_relative_eq!(cayley_menger(&l), 288.0 / 36.0, epsilon = 1e-12);
    }

    #[test]
    fn triangle_inequality_violation_not_realizable() {
        // face (0,1,2) has sides 1, 1, 3
        let l = [1.0, 1.0, 1.0, 3.0, 1.0, 1.0];
        assert!(matches!(tet_from_lengths(&l), Err(Error::NotRealizable { .. })));
    }

    #[test]
    fn l41_coordinates_and_volume() {
        let spec = LensSpec::new(4, 1).unwrap();
        let params = GeomParams { alpha: FRAC_PI_2, rho: 1.0, sigma: 1.0, s: 1.0, k: 1 };
        let b1 = vertex_position(&spec, &params, Vertex::B(1));
        assert!(distance(b1, [0.0, 1.0, 0.0]) < 1e-15);
        let c0 = vertex_position(&spec, &params, Vertex::C(0));
        assert!(distance(c0, [0.0, 1.0, 1.0]) < 1e-15);
        let t00 = Tet { n: 0, m: 0 }.vertices(4).map(|v| vertex_position(&spec, &params, v));
        assert_relative_eq!(signed_volume(&t00), 1.0 / 3.0, epsilon = 1e-14);
        // the same α flattens T(0,1), so a full realization is refused
        let tri = build_triangulation(spec);
        assert!(matches!(realize(&tri, params), Err(Error::DegenerateParams(_))));
        assert_relative_eq!(closed_form_volume(&spec, &params, Tet { n: 0, m: 0 }), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn reduce_angle_range() {
        assert_relative_eq!(reduce_angle(2.0 * PI), 0.0, epsilon = 1e-15);
        assert_relative_eq!(reduce_angle(-PI), PI, epsilon = 1e-15);
        assert_relative_eq!(reduce_angle(3.0 * PI), PI, epsilon = 1e-14);
        assert_relative_eq!(reduce_angle(-0.25), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_alpha_rejected() {
        // q=2, p=7, k=1, m=4: α + π(1−8)/7 = α − π
        let tri = build_triangulation(LensSpec::new(7, 2).unwrap());
        let params = GeomParams { alpha: 0.0, rho: 1.0, sigma: 1.0, s: 1.0, k: 1 };
        assert!(matches!(realize(&tri, params), Err(Error::DegenerateParams(_))));
    }
}
