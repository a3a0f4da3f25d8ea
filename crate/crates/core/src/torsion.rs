//! Minors, torsions and the invariants `I_{j,1}`.
//!
//! For each block the torsion is
//!
//! ```text
//! T_j = p⁻²·|det C_j|_D̄|⁻²·|det B_j[C̄, D]|²·(det A_j[C, C])⁻¹   (j ≡ 0, ±1)
//! T_j =              |det B_j[C̄, D]|²·(det A_j[C, C])⁻¹        (otherwise)
//! ```
//!
//! where `C` indexes a nonsingular principal minor of `A_j` of full rank and
//! `D` a nonsingular set of coordinate columns of `B_j` on the complementary
//! rows. Multiplying by `l²_{B₀B₁}·l²_{C₀C₁}·Π l²_{B_mC₀} / Π 6V(C₀C₁B_{m+1}B_m)`
//! gives the invariant.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::blocking::{build_context, conjugate_and_split_with_tol, BlockComplex, BlockRanks};
use crate::combinatorics::{build_triangulation, LensSpec, Tet, Triangulation, Vertex};
use crate::error::{Error, Result};
use crate::geometry::{distance, realize_with_floor, GeomParams, Realization};
use crate::jacobian::{assemble, schlafli_residual, tet_angle_jacobian, JacobianSet};
use crate::linalg::CMatrix;
use crate::oracle::closed_form_invariant;
use crate::params::{ParamSource, ShapeParams};

/// Numerical thresholds for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular values below `rank_rel·σ_max` count as zero.
    pub rank_rel: f64,
    /// Largest defect angle.
    pub defect: f64,
    /// `‖A·B‖_max / (‖A‖_max·‖B‖_max)`.
    pub ab: f64,
    /// `‖B·C‖_max / (‖B‖_max·‖C‖_max)`.
    pub bc: f64,
    /// `‖A − Aᵀ‖_max`, also `‖A_j − A_j†‖_max`.
    pub symmetry: f64,
    /// Off-block residual relative to each conjugated matrix's largest entry.
    pub block: f64,
    /// Per-tetrahedron `|J·l|`.
    pub schlafli: f64,
    /// Relative spread of `|T_j|` across pivot selections.
    pub pivot_spread: f64,
    /// Nondegeneracy floor for volumes, relative to `ρσs`.
    pub delta_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-9,
            defect: 1e-9,
            ab: 1e-8,
            bc: 1e-12,
            symmetry: 1e-9,
            block: 1e-9,
            schlafli: 1e-8,
            pivot_spread: 1e-8,
            delta_min: 1e-6,
        }
    }
}

impl Tolerances {
    /// Every structural residual tolerance set to `tol`.
    pub fn uniform_residual(tol: f64) -> Self {
        Self {
            defect: tol,
            ab: tol,
            bc: tol,
            symmetry: tol,
            block: tol,
            schlafli: tol,
            pivot_spread: tol,
            ..Self::default()
        }
    }
}

/// Index sets selecting the minors of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotSelection {
    /// Edges (block positions) of the nonsingular principal minor of `A_j`.
    pub c_set: Vec<usize>,
    pub c_bar: Vec<usize>,
    /// Coordinate columns of `B_j` on the rows `c_bar`.
    pub d_set: Vec<usize>,
    /// Rows of `C_j` used for its minor; empty when `C_j` is absent.
    pub d_bar: Vec<usize>,
}

/// Relative magnitude under which a pivot counts as zero.
const PIVOT_TOL: f64 = 1e-9;
/// Normalized-determinant floor for accepting a selection during enumeration.
const ENUM_QUALITY_FLOOR: f64 = 1e-6;

fn complement(set: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !set.contains(i)).collect()
}

fn with(set: &[usize], extra: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().chain(extra).copied().collect();
    v.sort_unstable();
    v
}

fn principal_det(a: &CMatrix, set: &[usize]) -> f64 {
    a.select(set, set).determinant().norm()
}

/// Greedy choice of a principal minor of a Hermitian matrix: grow the set by
/// the index with the largest Schur-complement pivot, falling back to a 2 × 2
/// pivot when every diagonal pivot vanishes.
fn greedy_principal(a: &CMatrix, rank: usize, scale: f64) -> Option<Vec<usize>> {
    let n = a.rows();
    let tol = PIVOT_TOL * scale;
    let mut set: Vec<usize> = Vec::new();
    let mut base = 1.0;
    while set.len() < rank {
        let free = complement(&set, n);
        let single =
            free.iter().map(|&i| (principal_det(a, &with(&set, &[i])) / base, i)).max_by(|x, y| x.0.total_cmp(&y.0));
        match single {
            Some((ratio, i)) if ratio > tol => {
                set = with(&set, &[i]);
                base *= ratio;
            }
            _ if set.len() + 2 <= rank => {
                let mut best: Option<(f64, usize, usize)> = None;
                for (x, &i) in free.iter().enumerate() {
                    for &j in &free[x + 1..] {
                        let r = principal_det(a, &with(&set, &[i, j])) / base;
                        if best.is_none_or(|b| r > b.0) {
                            best = Some((r, i, j));
                        }
                    }
                }
                let (r, i, j) = best?;
                if r <= tol * tol {
                    return None;
                }
                set = with(&set, &[i, j]);
                base *= r;
            }
            _ => return None,
        }
    }
    Some(set)
}

/// Columns picked by Gaussian elimination with complete pivoting.
fn greedy_columns(m: &CMatrix, scale: f64) -> Option<Vec<usize>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut row_done = alloc::vec![false; rows];
    let mut chosen = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut best: Option<(f64, usize, usize)> = None;
        for r in (0..rows).filter(|&r| !row_done[r]) {
            for c in (0..cols).filter(|c| !chosen.contains(c)) {
                let v = a[(r, c)].norm();
                if best.is_none_or(|b| v > b.0) {
                    best = Some((v, r, c));
                }
            }
        }
        let (v, pr, pc) = best?;
        if v <= PIVOT_TOL * scale {
            return None;
        }
        row_done[pr] = true;
        chosen.push(pc);
        let piv = a[(pr, pc)];
        for r in (0..rows).filter(|&r| !row_done[r]) {
            let f = a[(r, pc)] / piv;
            for c in 0..cols {
                let sub = f * a[(pr, c)];
                a[(r, c)] -= sub;
            }
        }
    }
    chosen.sort_unstable();
    Some(chosen)
}

/// The three minors of a selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minors {
    /// `det A_j[C, C]`; real up to rounding for Hermitian `A_j`.
    pub a: Complex64,
    /// `|det B_j[C̄, D]|`
    pub b: f64,
    /// `|det C_j[D̄, :]|`, for motion blocks.
    pub c: Option<f64>,
}

impl Minors {
    pub fn of(block: &BlockComplex, piv: &PivotSelection) -> Self {
        let a = block.a.select(&piv.c_set, &piv.c_set).determinant();
        let b = block.b.select(&piv.c_bar, &piv.d_set).determinant().norm();
        let c = block.c.as_ref().map(|c| c.select(&piv.d_bar, &[0, 1]).determinant().norm());
        Minors { a, b, c }
    }

    /// Scale-free size of the smallest minor: each determinant's geometric-mean
    /// pivot relative to its matrix's largest singular value.
    pub fn quality(&self, block: &BlockComplex, piv: &PivotSelection) -> f64 {
        let norm = |d: f64, n: usize, s: f64| if n == 0 { 1.0 } else { libm::pow(d, 1.0 / n as f64) / s };
        let qa = norm(self.a.norm(), piv.c_set.len(), block.sigma_ref[0]);
        let qb = norm(self.b, piv.d_set.len(), block.sigma_ref[1]);
        let qc = self.c.map_or(1.0, |c| norm(c, 2, block.sigma_ref[2]));
        qa.min(qb).min(qc)
    }

    pub fn torsion(&self, p: usize) -> f64 {
        let mut t = self.b * self.b / self.a.re;
        if let Some(c) = self.c {
            t /= (p * p) as f64 * c * c;
        }
        t
    }
}

fn validate_sizes(block: &BlockComplex, ranks: &BlockRanks) -> Result<()> {
    let n = block.a.rows();
    if n < ranks.a || n - ranks.a != ranks.b || block.c.is_some() != ranks.c.is_some() {
        return Err(Error::RankDeficient { j: block.j });
    }
    if let Some(rc) = ranks.c {
        if 6 - ranks.b != rc {
            return Err(Error::RankDeficient { j: block.j });
        }
    }
    Ok(())
}

fn selection_from(block: &BlockComplex, c_set: Vec<usize>, d_set: Vec<usize>) -> PivotSelection {
    let c_bar = complement(&c_set, block.a.rows());
    let d_bar = if block.c.is_some() { complement(&d_set, 6) } else { Vec::new() };
    PivotSelection { c_set, c_bar, d_set, d_bar }
}

/// Greedy pivot selection; falls back to exhaustive search if the greedy
/// choice leaves a singular `C_j` minor.
pub fn select_pivots(block: &BlockComplex, ranks: &BlockRanks) -> Result<PivotSelection> {
    validate_sizes(block, ranks)?;
    let greedy = greedy_principal(&block.a, ranks.a, block.sigma_ref[0]).and_then(|c_set| {
        let c_bar = complement(&c_set, block.a.rows());
        let d_set = greedy_columns(&block.b.select(&c_bar, &[0, 1, 2, 3, 4, 5]), block.sigma_ref[1])?;
        Some(selection_from(block, c_set, d_set))
    });
    if let Some(sel) = greedy {
        let minors = Minors::of(block, &sel);
        let floor = PIVOT_TOL * block.sigma_ref[2];
        let c_ok = minors.c.is_none_or(|c| c > floor * floor);
        if c_ok {
            return Ok(sel);
        }
    }
    enumerate_pivot_selections(block, ranks).into_iter().next().ok_or(Error::RankDeficient { j: block.j })
}

/// Every selection with all three minors nonsingular, best conditioned first.
pub fn enumerate_pivot_selections(block: &BlockComplex, ranks: &BlockRanks) -> Vec<PivotSelection> {
    if validate_sizes(block, ranks).is_err() {
        return Vec::new();
    }
    let n = block.a.rows();
    let mut scored: Vec<(f64, PivotSelection)> = Vec::new();
    for c_set in subsets(n, ranks.a) {
        let qa_sel = selection_from(block, c_set.clone(), Vec::new());
        let da = block.a.select(&c_set, &c_set).determinant().norm();
        if ranks.a > 0 && libm::pow(da, 1.0 / ranks.a as f64) / block.sigma_ref[0] < ENUM_QUALITY_FLOOR {
            continue;
        }
        for d_set in subsets(6, ranks.b) {
            let sel = selection_from(block, qa_sel.c_set.clone(), d_set);
            let minors = Minors::of(block, &sel);
            let q = minors.quality(block, &sel);
            if q > ENUM_QUALITY_FLOOR {
                scored.push((q, sel));
            }
        }
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    scored.into_iter().map(|x| x.1).collect()
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Torsion of one block for a given selection.
pub fn torsion(block: &BlockComplex, piv: &PivotSelection, p: usize) -> Result<f64> {
    let minors = Minors::of(block, piv);
    let tiny = |x: f64, n: usize, s: f64| n > 0 && !(x > libm::pow(PIVOT_TOL * s, n as f64));
    if tiny(minors.a.norm(), piv.c_set.len(), block.sigma_ref[0])
        || tiny(minors.b, piv.d_set.len(), block.sigma_ref[1])
        || minors.c.is_some_and(|c| tiny(c, 2, block.sigma_ref[2]))
    {
        return Err(Error::SingularMinor { j: block.j });
    }
    Ok(minors.torsion(p))
}

/// `l²_{B₀B₁}·l²_{C₀C₁}·Π_m l²_{B_mC₀} / Π_m 6·V(C₀C₁B_{m+1}B_m)`.
pub fn invariant_factor(tri: &Triangulation, real: &Realization) -> Result<f64> {
    let p = tri.p();
    let at = |v| real.point(tri, v);
    let sq = |a, b| {
        let d = distance(at(a), at(b));
        d * d
    };
    let mut num = sq(Vertex::B(0), Vertex::B(1)) * sq(Vertex::C(0), Vertex::C(1));
    let mut den = 1.0;
    let floor = 1e-12 * real.params().rho * real.params().sigma * real.params().s;
    for m in 0..p {
        num *= sq(Vertex::B(m), Vertex::C(0));
        let v = real.volumes()[tri.tet_index(Tet { n: 0, m })];
        if !(libm::fabs(v) > floor) {
            return Err(Error::DegenerateParams(format!("T(0,{m}) has volume {v:e}")));
        }
        den *= 6.0 * v;
    }
    Ok(num / den)
}

pub fn invariant(torsion: f64, tri: &Triangulation, real: &Realization) -> Result<f64> {
    Ok(torsion * invariant_factor(tri, real)?)
}

/// Everything computed for one representation index.
#[derive(Debug, Clone)]
pub struct KPipeline {
    pub params: GeomParams,
    pub realization: Realization,
    pub jacobians: JacobianSet,
    pub blocks: Vec<BlockComplex>,
    pub factor: f64,
}

pub fn run_k(tri: &Triangulation, params: GeomParams, tol: &Tolerances) -> Result<KPipeline> {
    let k = params.k;
    let realization = realize_with_floor(tri, params, tol.delta_min).map_err(|e| e.in_cell(None, k))?;
    let jacobians = assemble(tri, &realization).map_err(|e| e.in_cell(None, k))?;
    let ctx = build_context(tri.p(), k).map_err(|e| e.in_cell(None, k))?;
    let blocks = conjugate_and_split_with_tol(&ctx, &jacobians, tol.block).map_err(|e| e.in_cell(None, k))?;
    let factor = invariant_factor(tri, &realization).map_err(|e| e.in_cell(None, k))?;
    Ok(KPipeline { params, realization, jacobians, blocks, factor })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// `gcd(k, p) > 1`: the change of basis is singular, nothing is computed.
    Degenerate,
    /// Computed, but a structural check for this `k` exceeded its tolerance.
    Failed,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Degenerate => "degenerate",
            CellStatus::Failed => "failed",
        }
    }
}

/// Agreement of `T_j` across alternative pivot selections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotSpread {
    /// Number of selections compared.
    pub count: usize,
    /// `(max |T| − min |T|) / max |T|`
    pub rel_spread: f64,
    /// Whether every selection gave the same sign.
    pub signs_agree: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub j: usize,
    pub k: usize,
    pub torsion: f64,
    pub invariant: f64,
    pub closed_form: f64,
    pub status: CellStatus,
    pub ranks: Option<BlockRanks>,
    pub pivots: Option<PivotSelection>,
    /// `|Im det A_j[C]| / |det A_j[C]|`
    pub a_minor_imag: f64,
    pub spread: Option<PivotSpread>,
}

/// Structural residuals for one representation index.
#[derive(Debug, Clone, PartialEq)]
pub struct Checks {
    pub k: usize,
    pub max_defect: f64,
    pub ab: f64,
    pub bc: f64,
    pub symmetry: f64,
    pub off_block: f64,
    pub hermitian: f64,
    pub schlafli: f64,
    /// `(C, B, A)`
    pub global_ranks: (usize, usize, usize),
    pub expected_global_ranks: (usize, usize, usize),
    pub block_ranks_ok: bool,
    pub pivot_spread: Option<f64>,
}

impl Checks {
    /// Names of the checks exceeding their tolerance.
    pub fn failures(&self, tol: &Tolerances) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut check = |name, ok: bool| {
            if !ok {
                out.push(name);
            }
        };
        check("defect", self.max_defect < tol.defect);
        check("ab", self.ab < tol.ab);
        check("bc", self.bc < tol.bc);
        check("symmetry", self.symmetry < tol.symmetry);
        check("off_block", self.off_block < tol.block);
        check("hermitian", self.hermitian < tol.symmetry);
        check("schlafli", self.schlafli < tol.schlafli);
        check("global_ranks", self.global_ranks == self.expected_global_ranks);
        check("block_ranks", self.block_ranks_ok);
        check("pivot_spread", self.pivot_spread.is_none_or(|s| s < tol.pivot_spread));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Options {
    pub tolerances: Tolerances,
    /// Compare `|T_j|` across the best few pivot selections (exhaustive search per block).
    pub pivot_spread: bool,
    /// Representation indices to compute; all of `1..=⌊p/2⌋` when `None`.
    pub ks: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorsionReport {
    pub spec: LensSpec,
    pub shape: ShapeParams,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    /// Sorted by `(j, k)`.
    pub cells: Vec<CellResult>,
    /// One entry per computed (non-degenerate) `k`.
    pub checks: Vec<Checks>,
}

impl TorsionReport {
    pub fn cell(&self, j: usize, k: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.j == j && c.k == k)
    }

    /// Invariants of block `j` over all ok cells, sorted ascending.
    pub fn multiset(&self, j: usize) -> Vec<f64> {
        let mut v: Vec<f64> =
            self.cells.iter().filter(|c| c.j == j && c.status == CellStatus::Ok).map(|c| c.invariant).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.failures(&self.tolerances).is_empty())
    }
}

/// Relative spread of `|T_j|` over the `limit` best-conditioned selections.
pub fn pivot_spread(block: &BlockComplex, ranks: &BlockRanks, p: usize, limit: usize) -> Option<PivotSpread> {
    let values: Vec<f64> = enumerate_pivot_selections(block, ranks)
        .iter()
        .take(limit)
        .filter_map(|sel| torsion(block, sel, p).ok())
        .collect();
    if values.is_empty() {
        return None;
    }
    let max = values.iter().map(|x| libm::fabs(*x)).fold(0.0, f64::max);
    let min = values.iter().map(|x| libm::fabs(*x)).fold(f64::INFINITY, f64::min);
    let signs_agree = values.iter().all(|x| (*x > 0.0) == (values[0] > 0.0));
    Some(PivotSpread { count: values.len(), rel_spread: (max - min) / max, signs_agree })
}

/// All `p` cells of one regular representation index, with its structural checks.
pub fn compute_k(tri: &Triangulation, params: GeomParams, opts: &Options) -> Result<(Vec<CellResult>, Checks)> {
    let p = tri.p();
    let k = params.k;
    let tol = &opts.tolerances;
    let pipe = run_k(tri, params, tol)?;
    let jac = &pipe.jacobians;

    let mut schlafli: f64 = 0.0;
    for edges in tri.tet_edges() {
        let l = edges.map(|e| pipe.realization.lengths()[e]);
        let j = tet_angle_jacobian(&l).map_err(|e| e.in_cell(None, k))?;
        schlafli = schlafli.max(schlafli_residual(&l, &j));
    }

    let mut cells = Vec::with_capacity(p);
    let mut block_ranks_ok = true;
    let mut hermitian: f64 = 0.0;
    let mut worst_spread: Option<f64> = None;
    for block in &pipe.blocks {
        let j = block.j;
        let ranks = block.ranks(tol.rank_rel);
        let expected = BlockRanks::expected(p, j);
        block_ranks_ok &= ranks == expected;
        hermitian = hermitian.max(block.hermitian_residual());
        // Pivots are sized from the predicted ranks; a mismatch is reported through the checks.
        let piv = select_pivots(block, &expected).map_err(|e| e.in_cell(Some(j), k))?;
        let minors = Minors::of(block, &piv);
        let t = torsion(block, &piv, p).map_err(|e| e.in_cell(Some(j), k))?;
        let spread = if opts.pivot_spread { pivot_spread(block, &expected, p, 3) } else { None };
        if let Some(s) = spread {
            worst_spread = Some(worst_spread.unwrap_or(0.0).max(s.rel_spread));
        }
        let a_norm = minors.a.norm();
        cells.push(CellResult {
            j,
            k,
            torsion: t,
            invariant: t * pipe.factor,
            closed_form: closed_form_invariant(p, tri.spec().q(), j, k).value,
            status: CellStatus::Ok,
            ranks: Some(ranks),
            pivots: Some(piv),
            a_minor_imag: if a_norm > 0.0 { libm::fabs(minors.a.im) / a_norm } else { 0.0 },
            spread,
        });
    }

    let checks = Checks {
        k,
        max_defect: pipe.realization.max_defect(),
        ab: jac.ab_residual(),
        bc: jac.bc_residual(),
        symmetry: jac.symmetry_residual(),
        off_block: pipe.blocks.first().map_or(0.0, |b| b.residual),
        hermitian,
        schlafli,
        global_ranks: jac.ranks(tol.rank_rel),
        expected_global_ranks: (6, 6 * p - 6, p * p + 6 - 4 * p),
        block_ranks_ok,
        pivot_spread: worst_spread,
    };
    if !checks.failures(tol).is_empty() {
        for c in &mut cells {
            c.status = CellStatus::Failed;
        }
    }
    Ok((cells, checks))
}

/// Compute every `(j, k)` cell for `j = 0..p` and `k = 1..=⌊p/2⌋`.
pub fn compute_all(spec: LensSpec, source: ParamSource, opts: &Options) -> Result<TorsionReport> {
    let tri = build_triangulation(spec);
    compute_all_on(&tri, source, opts)
}

pub fn compute_all_on(tri: &Triangulation, source: ParamSource, opts: &Options) -> Result<TorsionReport> {
    let plan = RunPlan::new(tri.spec(), source, opts)?;
    let parts = plan.ks.iter().map(|&k| plan.run_k(tri, k, opts)).collect::<Result<Vec<_>>>()?;
    Ok(plan.assemble(parts, opts))
}

/// Resolved inputs of a run; lets callers evaluate the representation
/// indices independently (e.g. in parallel) and assemble the report after.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub spec: LensSpec,
    pub shape: ShapeParams,
    pub seed: Option<u64>,
    pub ks: Vec<usize>,
}

/// Cells and checks of one representation index; `checks` is `None` when it is degenerate.
pub type KPart = (Vec<CellResult>, Option<Checks>);

impl RunPlan {
    pub fn new(spec: &LensSpec, source: ParamSource, opts: &Options) -> Result<Self> {
        let p = spec.p();
        let ks: Vec<usize> = match &opts.ks {
            Some(ks) => {
                if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > p / 2) {
                    return Err(Error::InvalidSpec(format!("k={bad} outside 1..={}", p / 2)));
                }
                let mut ks = ks.clone();
                ks.sort_unstable();
                ks.dedup();
                ks
            }
            None => spec.k_range().collect(),
        };
        let regular: Vec<usize> = ks.iter().copied().filter(|&k| spec.k_is_regular(k)).collect();
        let shape = source.resolve(spec, &regular);
        Ok(RunPlan { spec: *spec, shape, seed: source.seed(), ks })
    }

    pub fn run_k(&self, tri: &Triangulation, k: usize, opts: &Options) -> Result<KPart> {
        if self.spec.k_is_regular(k) {
            let (cells, checks) = compute_k(tri, self.shape.with_k(k), opts)?;
            Ok((cells, Some(checks)))
        } else {
            Ok((degenerate_cells(&self.spec, k), None))
        }
    }

    pub fn assemble(&self, parts: Vec<KPart>, opts: &Options) -> TorsionReport {
        let mut cells = Vec::new();
        let mut checks = Vec::new();
        for (c, chk) in parts {
            cells.extend(c);
            checks.extend(chk);
        }
        cells.sort_by_key(|c| (c.j, c.k));
        checks.sort_by_key(|c| c.k);
        TorsionReport {
            spec: self.spec,
            shape: self.shape,
            seed: self.seed,
            tolerances: opts.tolerances,
            cells,
            checks,
        }
    }
}

fn degenerate_cells(spec: &LensSpec, k: usize) -> Vec<CellResult> {
    let p = spec.p();
    (0..p)
        .map(|j| CellResult {
            j,
            k,
            torsion: f64::NAN,
            invariant: f64::NAN,
            closed_form: closed_form_invariant(p, spec.q(), j, k).value,
            status: CellStatus::Degenerate,
            ranks: None,
            pivots: None,
            a_minor_imag: f64::NAN,
            spread: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(6, 4).len(), 15);
        assert_eq!(subsets(6, 0), alloc::vec![Vec::<usize>::new()]);
        assert_eq!(subsets(12, 8).len(), 495);
    }

    #[test]
    fn l52_sizes() {
        let report = compute_all(LensSpec::new(5, 2).unwrap(), ParamSource::Seed(1), &Options::default()).unwrap();
        let c = report.cell(0, 1).unwrap();
        let piv = c.pivots.as_ref().unwrap();
        assert_eq!((piv.c_set.len(), piv.d_set.len(), piv.d_bar.len()), (3, 4, 2));
        assert_eq!(report.cells.len(), 10);
        assert!(report.cells.iter().all(|c| c.status == CellStatus::Ok));
    }

    #[test]
    fn l41_empty_principal_minor() {
        let opts = Options { ks: Some(alloc::vec![1]), ..Options::default() };
        let report = compute_all(LensSpec::new(4, 1).unwrap(), ParamSource::Seed(0), &opts).unwrap();
        let c = report.cell(2, 1).unwrap();
        let piv = c.pivots.as_ref().unwrap();
        assert!(piv.c_set.is_empty());
        assert_eq!(piv.d_set, alloc::vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(c.ranks.unwrap().a, 0);
    }

    #[test]
    fn l71_middle_sizes() {
        let opts = Options { ks: Some(alloc::vec![1]), ..Options::default() };
        let report = compute_all(LensSpec::new(7, 1).unwrap(), ParamSource::Seed(0), &opts).unwrap();
        let piv = report.cell(3, 1).unwrap().pivots.clone().unwrap();
        assert_eq!((piv.c_set.len(), piv.c_bar.len()), (3, 6));
    }

    #[test]
    fn degenerate_k_flagged() {
        let report = compute_all(LensSpec::new(4, 1).unwrap(), ParamSource::Seed(0), &Options::default()).unwrap();
        assert!(report.cells.iter().filter(|c| c.k == 1).all(|c| c.status == CellStatus::Ok));
        assert!(report.cells.iter().filter(|c| c.k == 2).all(|c| c.status == CellStatus::Degenerate));
        assert_eq!(report.checks.len(), 1);
    }
}
