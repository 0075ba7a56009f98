//! Truncated intrinsic mirror algebras of log Calabi-Yau pairs.
//!
//! The crate tropicalizes a simple normal crossings pair into a cone complex,
//! builds the theta-function module over `A_I = k[P]/I`, prunes curve classes by
//! intersection constraints, and recomputes products through a rank-2 wall
//! structure with broken lines.
//!
//! All arithmetic is exact (`BigRational`); nothing here touches floating point
//! except the SVG renderer.

pub mod broken_lines;
pub mod class_solver;
pub mod cone_complex;
pub mod error;
pub mod io;
pub mod render;
pub mod scattering2d;
pub mod snc_pair;
pub mod theta_algebra;
pub mod trop_types;
pub mod trunc_ring;

pub use class_solver::{assemble_product, candidates, Candidate, CandidateSet};
pub use cone_complex::{BasisCone, ConeComplex, LatticeVector};
pub use error::{MirrorError, MissingInvariant, Result};
pub use snc_pair::{Pair, PairDescriptor, TropicalSpace};
pub use theta_algebra::{InvariantTable, ThetaElement};
pub use trunc_ring::{CurveClass, LaurentElement, TruncatedSeries, TruncationIdeal, Q};
