//! Simplicial structure of the universal cover of `L(p,q)`.
//!
//! The cover S³ is the join of two p-gons, `B_0…B_{p−1}` and `C_0…C_{p−1}`.
//! Each pair of polygon edges spans one tetrahedron `T(n,m) = (C_n, C_{n+1},
//! B_{m+1}, B_m)`, giving p² tetrahedra, 2p² triangles, p² + 2p edges and 2p
//! vertices. The deck generator sends `B_m → B_{m+1}` and
//! `C_n → C_{n+q⁻¹}`; the coordinate and edge spaces are laid out in p blocks
//! that this generator permutes cyclically.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Inverse of `q` modulo `p`, in `[0, p)`.
pub fn mod_inverse(q: i64, p: i64) -> Result<i64> {
    if p < 1 {
        return Err(Error::NotCoprime { q, p });
    }
    // extended Euclid on (q mod p, p)
    let (mut r0, mut r1) = (p, q.rem_euclid(p));
    let (mut s0, mut s1) = (0i64, 1i64);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (s0, s1) = (s1, s0 - quot * s1);
    }
    if r0 != 1 {
        return Err(Error::NotCoprime { q, p });
    }
    Ok(s0.rem_euclid(p))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn coprime(a: usize, b: usize) -> bool {
    gcd(a, b) == 1
}

/// The pair `(p, q)` naming a lens space, with `q⁻¹ mod p` precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LensSpec {
    p: usize,
    q: usize,
    q_inv: usize,
}

impl LensSpec {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidSpec("p must be ≥ 3".into()));
        }
        if q == 0 || q >= p {
            return Err(Error::InvalidSpec(format!("q must satisfy 1 ≤ q < p, got q={q}, p={p}")));
        }
        if !coprime(p, q) {
            return Err(Error::InvalidSpec(format!("gcd({p}, {q}) ≠ 1")));
        }
        let q_inv = mod_inverse(q as i64, p as i64)? as usize;
        Ok(Self { p, q, q_inv })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn q_inv(&self) -> usize {
        self.q_inv
    }

    /// Representation indices `1..=⌊p/2⌋`.
    pub fn k_range(&self) -> core::ops::RangeInclusive<usize> {
        1..=self.p / 2
    }

    /// Whether representation index `k` is coprime to `p`.
    pub fn k_is_regular(&self, k: usize) -> bool {
        coprime(self.p, k % self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    B(usize),
    C(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::B(m) => write!(f, "B{m}"),
            Vertex::C(n) => write!(f, "C{n}"),
        }
    }
}

/// Edge of the cover. Indices are always reduced modulo p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    /// `B_m B_{m+1}`
    BB(usize),
    /// `C_n C_{n+1}`
    CC(usize),
    /// `B_b C_c`
    BC { b: usize, c: usize },
}

impl Edge {
    pub fn endpoints(&self, p: usize) -> (Vertex, Vertex) {
        match *self {
            Edge::BB(m) => (Vertex::B(m), Vertex::B((m + 1) % p)),
            Edge::CC(n) => (Vertex::C(n), Vertex::C((n + 1) % p)),
            Edge::BC { b, c } => (Vertex::B(b), Vertex::C(c)),
        }
    }

    /// The edge joining two distinct vertices, if they are adjacent.
    pub fn between(u: Vertex, v: Vertex, p: usize) -> Option<Edge> {
        match (u, v) {
            (Vertex::B(b), Vertex::C(c)) | (Vertex::C(c), Vertex::B(b)) => Some(Edge::BC { b: b % p, c: c % p }),
            (Vertex::B(x), Vertex::B(y)) if (x + 1) % p == y % p => Some(Edge::BB(x % p)),
            (Vertex::B(x), Vertex::B(y)) if (y + 1) % p == x % p => Some(Edge::BB(y % p)),
            (Vertex::C(x), Vertex::C(y)) if (x + 1) % p == y % p => Some(Edge::CC(x % p)),
            (Vertex::C(x), Vertex::C(y)) if (y + 1) % p == x % p => Some(Edge::CC(y % p)),
            _ => None,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Edge::BB(m) => write!(f, "B{m}B{}", m + 1),
            Edge::CC(n) => write!(f, "C{n}C{}", n + 1),
            Edge::BC { b, c } => write!(f, "B{b}C{c}"),
        }
    }
}

/// Vertex pairs of a tetrahedron's six edges, in local edge order.
pub const TET_EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Tetrahedron `T(n,m)` with ordered vertices `(C_n, C_{n+1}, B_{m+1}, B_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tet {
    pub n: usize,
    pub m: usize,
}

impl Tet {
    pub fn vertices(&self, p: usize) -> [Vertex; 4] {
        [Vertex::C(self.n), Vertex::C((self.n + 1) % p), Vertex::B((self.m + 1) % p), Vertex::B(self.m)]
    }

    /// The six edges in [`TET_EDGE_PAIRS`] order.
    pub fn edges(&self, p: usize) -> [Edge; 6] {
        let v = self.vertices(p);
        TET_EDGE_PAIRS.map(|(a, b)| Edge::between(v[a], v[b], p).expect("tetrahedron edges are adjacent"))
    }
}

impl fmt::Display for Tet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({},{})", self.n, self.m)
    }
}

/// The triangulated universal cover with its block layout.
#[derive(Debug, Clone)]
pub struct Triangulation {
    spec: LensSpec,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    tets: Vec<Tet>,
    tet_edges: Vec<[usize; 6]>,
    incidence: Vec<Vec<(usize, usize)>>,
}

pub fn build_triangulation(spec: LensSpec) -> Triangulation {
    let p = spec.p;
    let mut vertices = Vec::with_capacity(2 * p);
    let mut edges = Vec::with_capacity(p * p + 2 * p);
    for m in 0..p {
        let c = (m * spec.q_inv) % p;
        vertices.push(Vertex::B(m));
        vertices.push(Vertex::C(c));
        edges.push(Edge::BB(m));
        for i in 0..p {
            edges.push(Edge::BC { b: (m + i) % p, c });
        }
        edges.push(Edge::CC(c));
    }
    let tets: Vec<Tet> = (0..p).flat_map(|n| (0..p).map(move |m| Tet { n, m })).collect();
    let mut tri = Triangulation { spec, vertices, edges, tets, tet_edges: Vec::new(), incidence: Vec::new() };
    tri.tet_edges = tri.tets.iter().map(|t| t.edges(p).map(|e| tri.edge_index(&e))).collect();
    let mut incidence = alloc::vec![Vec::new(); tri.edges.len()];
    for (ti, te) in tri.tet_edges.iter().enumerate() {
        for (local, &e) in te.iter().enumerate() {
            incidence[e].push((ti, local));
        }
    }
    tri.incidence = incidence;
    tri
}

impl Triangulation {
    pub fn spec(&self) -> &LensSpec {
        &self.spec
    }

    pub fn p(&self) -> usize {
        self.spec.p
    }

    /// Vertices in coordinate-space order: block m holds `(B_m, C_{m·q⁻¹})`.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edges in length-space order (p blocks of p + 2).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tets(&self) -> &[Tet] {
        &self.tets
    }

    /// Global edge indices of each tetrahedron, in local edge order.
    pub fn tet_edges(&self) -> &[[usize; 6]] {
        &self.tet_edges
    }

    pub fn tet_index(&self, t: Tet) -> usize {
        t.n * self.spec.p + t.m
    }

    pub fn block_len(&self) -> usize {
        self.spec.p + 2
    }

    pub fn vertex_index(&self, v: Vertex) -> usize {
        let p = self.spec.p;
        match v {
            Vertex::B(m) => 2 * (m % p),
            Vertex::C(n) => 2 * ((n * self.spec.q) % p) + 1,
        }
    }

    pub fn edge_index(&self, e: &Edge) -> usize {
        let p = self.spec.p;
        let q = self.spec.q;
        match *e {
            Edge::BB(m) => (m % p) * (p + 2),
            Edge::BC { b, c } => {
                let m = (c * q) % p;
                m * (p + 2) + 1 + (b + p - m) % p
            }
            Edge::CC(c) => ((c * q) % p) * (p + 2) + p + 1,
        }
    }

    /// `(block, position)` of an edge in the length-space layout.
    pub fn edge_block(&self, e: &Edge) -> (usize, usize) {
        let i = self.edge_index(e);
        (i / self.block_len(), i % self.block_len())
    }

    /// Edges owned by block `m`: `B_mB_{m+1}`, `B_mC_c … B_{m−1}C_c`, `C_cC_{c+1}` with `c = m·q⁻¹`.
    pub fn block_edges(&self, m: usize) -> &[Edge] {
        let n = self.block_len();
        &self.edges[m * n..(m + 1) * n]
    }

    pub fn block_vertices(&self, m: usize) -> &[Vertex] {
        &self.vertices[2 * m..2 * m + 2]
    }

    /// Image of a vertex under the deck generator.
    pub fn shift_vertex(&self, v: Vertex) -> Vertex {
        let p = self.spec.p;
        match v {
            Vertex::B(m) => Vertex::B((m + 1) % p),
            Vertex::C(n) => Vertex::C((n + self.spec.q_inv) % p),
        }
    }

    pub fn shift_edge(&self, e: &Edge) -> Edge {
        let p = self.spec.p;
        let (u, v) = e.endpoints(p);
        Edge::between(self.shift_vertex(u), self.shift_vertex(v), p).expect("deck generator preserves adjacency")
    }

    /// Tetrahedra containing `edge`, with the edge's local index in each.
    pub fn incident_tets(&self, edge: &Edge) -> Result<Vec<(Tet, usize)>> {
        let p = self.spec.p;
        let valid = match *edge {
            Edge::BB(m) | Edge::CC(m) => m < p,
            Edge::BC { b, c } => b < p && c < p,
        };
        if !valid {
            return Err(Error::UnknownEdge(edge.to_string()));
        }
        let i = self.edge_index(edge);
        Ok(self.incidence[i].iter().map(|&(t, l)| (self.tets[t], l)).collect())
    }

    /// Incidence by global edge index: `(tet index, local edge index)`.
    pub fn incidence(&self, edge_index: usize) -> &[(usize, usize)] {
        &self.incidence[edge_index]
    }

    /// Number of distinct triangles.
    pub fn face_count(&self) -> usize {
        let p = self.spec.p;
        let mut faces = BTreeSet::new();
        for t in &self.tets {
            let v = t.vertices(p);
            for skip in 0..4 {
                let mut f: Vec<Vertex> = (0..4).filter(|&i| i != skip).map(|i| v[i]).collect();
                f.sort();
                faces.insert(f);
            }
        }
        faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.face_count() as i64 - self.tets.len() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(2, 5).unwrap(), 3);
        let brute = (0..7).find(|r| (3 * r) % 7 == 1).unwrap();
        assert_eq!(mod_inverse(3, 7).unwrap(), brute);
        assert_eq!(brute, 5);
    }

    #[test]
    fn mod_inverse_rejects_common_factor() {
        assert_eq!(mod_inverse(2, 4), Err(Error::NotCoprime { q: 2, p: 4 }));
        assert!(mod_inverse(6, 9).is_err());
    }

    #[test]
    fn spec_bounds() {
        assert!(matches!(LensSpec::new(2, 1), Err(Error::InvalidSpec(_))));
        assert!(matches!(LensSpec::new(6, 2), Err(Error::InvalidSpec(_))));
        assert!(matches!(LensSpec::new(5, 5), Err(Error::InvalidSpec(_))));
        assert_eq!(LensSpec::new(4, 3).unwrap().q_inv(), 3);
    }

    #[test]
    fn l31_counts() {
        let tri = build_triangulation(LensSpec::new(3, 1).unwrap());
        assert_eq!(tri.vertices().len(), 6);
        assert_eq!(tri.edges().len(), 15);
        assert_eq!(tri.tets().len(), 9);
        assert_eq!(tri.face_count(), 18);
        assert_eq!(tri.euler_characteristic(), 0);
    }

    #[test]
    fn block_layout_l52() {
        let tri = build_triangulation(LensSpec::new(5, 2).unwrap());
        assert_eq!(tri.block_vertices(1), &[Vertex::B(1), Vertex::C(3)]);
        let expected: Vec<Edge> = core::iter::once(Edge::BB(1))
            .chain([1, 2, 3, 4, 0].into_iter().map(|b| Edge::BC { b, c: 3 }))
            .chain(core::iter::once(Edge::CC(3)))
            .collect();
        assert_eq!(tri.block_edges(1), expected.as_slice());
    }

    #[test]
    fn incident_tets_examples() {
        let tri = build_triangulation(LensSpec::new(4, 1).unwrap());
        let mut cc: Vec<Tet> = tri.incident_tets(&Edge::CC(0)).unwrap().into_iter().map(|x| x.0).collect();
        cc.sort();
        assert_eq!(cc, (0..4).map(|m| Tet { n: 0, m }).collect::<Vec<_>>());
        let mut bb: Vec<Tet> = tri.incident_tets(&Edge::BB(0)).unwrap().into_iter().map(|x| x.0).collect();
        bb.sort();
        assert_eq!(bb, (0..4).map(|n| Tet { n, m: 0 }).collect::<Vec<_>>());

        let tri = build_triangulation(LensSpec::new(5, 2).unwrap());
        let got: BTreeSet<Tet> =
            tri.incident_tets(&Edge::BC { b: 2, c: 1 }).unwrap().into_iter().map(|x| x.0).collect();
        let want: BTreeSet<Tet> = [(1, 2), (1, 1), (0, 2), (0, 1)].into_iter().map(|(n, m)| Tet { n, m }).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn incident_tets_rejects_unknown_edge() {
        let tri = build_triangulation(LensSpec::new(4, 1).unwrap());
        assert!(matches!(tri.incident_tets(&Edge::BC { b: 4, c: 0 }), Err(Error::UnknownEdge(_))));
    }

    #[test]
    fn local_index_points_back_to_edge() {
        let tri = build_triangulation(LensSpec::new(5, 2).unwrap());
        for e in tri.edges() {
            for (t, local) in tri.incident_tets(e).unwrap() {
                assert_eq!(t.edges(5)[local], *e);
            }
        }
    }
}
