//! Continuous frames in Hilbert modules `A^k` over finite-dimensional
//! C*-algebras `A = ⊕ M_{n_j}(ℂ)`, with certified frame bounds, dual
//! certificates and constructions of new duals.
//!
//! Maps `F: Ω → A^k` are polynomial or tabulated; integrals against the
//! measure are evaluated by quadrature that is exact for the polynomial
//! degrees involved.

pub mod algebra;
pub mod duals;
pub mod error;
pub mod frame;
pub mod map;
pub mod measure;
pub mod module;
pub mod par;
pub mod report;
pub mod sampling;
pub mod sums;
pub mod tol;

pub use algebra::{order_leq, AlgebraDescriptor, AlgebraElement, CMatrix, OrderReport, C64};
pub use error::{FrameError, Result};
pub use frame::{
    analysis, bessel_bound, canonical_dual, certify_frame, frame_operator, gram, is_dual_pair,
    optimal_frame_bounds, riesz_type_diagnostic, synthesis, verify_claimed_bounds, DualCertificate,
    FrameBounds, FrameCertificate,
};
pub use map::{default_rule, FrameMap, MapAction, MapRepr};
pub use measure::{build_rule, Exactness, L2Element, MeasureSpace, QuadratureRule};
pub use module::{inner, left_act, ModuleElement, ModuleOperator, Side};
pub use tol::Tolerances;
