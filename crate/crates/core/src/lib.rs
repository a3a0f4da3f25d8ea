//! Geometric torsion invariants of lens spaces.
//!
//! The universal cover S³ of a lens space `L(p,q)` is triangulated as the join
//! of two p-gons and realized in Euclidean 3-space so that the deck group acts
//! by rotations. Infinitesimal vertex motions, edge lengths and defect angles
//! form an acyclic complex
//!
//! ```text
//! 0 -> e(3) --C--> (dx) --B--> (dl) --A--> (dω) -> ...
//! ```
//!
//! whose matrices split into `p` isotypic blocks after a Fourier change of
//! basis. The torsion of each block, normalized by edge lengths and volumes,
//! is a topological invariant which [`oracle`] evaluates in closed form.
//!
//! The crate is `no_std` (with `alloc`); IO and the command line live in the
//! `lens-torsion-cli` companion crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod blocking;
pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod jacobian;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod torsion;

pub use combinatorics::{build_triangulation, mod_inverse, Edge, LensSpec, Tet, Triangulation, Vertex};
pub use error::{Error, Result};
pub use geometry::{realize, GeomParams, Point3, Realization};
pub use jacobian::{assemble, JacobianSet};
pub use linalg::{CMatrix, RMatrix};

pub use blocking::{build_context, conjugate_and_split, BlockComplex, BlockRanks, BlockingContext};
pub use oracle::{closed_form_invariant, compare, delta, FormulaBranch, OracleValue, Verdict};
pub use params::{ParamSource, ShapeParams};
pub use torsion::{compute_all, CellResult, CellStatus, Checks, Options, PivotSelection, Tolerances, TorsionReport};
