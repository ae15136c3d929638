//! Frames and duals built from sums: `F X₁ + G X₂` for a dual pair, pairs
//! moved by operators, maps scaled by algebra elements, and combinations of
//! two duals with central, operator or scalar weights.
//!
//! An operator `L` acts as `f̂ ↦ f̂ X`, so `L₁ L₂*` is `f̂ ↦ f̂ X₂* X₁`.

use serde::Serialize;

use crate::algebra::{spectral_norm, AlgebraElement, CMatrix, OrderReport, C64};
use crate::error::{FrameError, Result};
use crate::frame::{
    extreme_eigenvalues, frame_operator, is_dual_pair, optimal_frame_bounds, require_dual,
    synthesis, DualCertificate, FrameBounds,
};
use crate::map::FrameMap;
use crate::measure::{L2Element, QuadratureRule};
use crate::module::{ModuleOperator, Side};
use crate::tol::Tolerances;

fn composition_residual(x1: &ModuleOperator, x2: &ModuleOperator) -> Result<f64> {
    // matrix of L₁L₂*
    Ok(x2.adjoint().try_mul(x1)?.distance_to_identity())
}

#[derive(Debug, Clone, Serialize)]
pub struct SumFrameCertificate {
    /// `‖X₂* X₁ − I‖`, the matrix form of `L₁L₂* = I`.
    pub hypothesis_residual: f64,
    /// `2·I ⪯ Q_H`.
    pub lower_check: OrderReport,
    /// `B_F‖X₁‖² + 2 + B_G‖X₂‖²`.
    pub guaranteed_upper: f64,
    pub upper_holds: bool,
    pub optimal: FrameBounds,
}

/// `H(ω) = F(ω) X₁ + G(ω) X₂` for a dual pair `(F, G)` and `X₂* X₁ = I`.
pub fn operator_sum_frame(
    frame: &FrameMap,
    dual: &FrameMap,
    x1: &ModuleOperator,
    x2: &ModuleOperator,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<(FrameMap, SumFrameCertificate)> {
    require_dual(frame, dual, rule, tol)?;
    let hypothesis_residual = composition_residual(x1, x2)?;
    if hypothesis_residual > tol.dual {
        return Err(FrameError::HypothesisViolated {
            what: "X2* X1 = I",
            residual: hypothesis_residual,
            tol: tol.dual,
        });
    }
    let h = frame
        .apply(x1, Side::Right)?
        .add(&dual.apply(x2, Side::Right)?)?;
    let qh = frame_operator(&h, rule)?;
    let two = ModuleOperator::scalar(frame.descriptor(), frame.rank(), C64::new(2.0, 0.0));
    let shifted = qh.try_add(&two.scale(C64::new(-1.0, 0.0)))?;
    let lower_check = shifted.positivity(tol.positivity);
    let bf = optimal_frame_bounds(frame, rule)?.upper;
    let bg = optimal_frame_bounds(dual, rule)?.upper;
    let guaranteed_upper = bf * x1.quadratic_bound() + 2.0 + bg * x2.quadratic_bound();
    let optimal = extreme_eigenvalues(qh.matrix());
    let upper_holds = optimal.upper <= guaranteed_upper + tol.positivity * (1.0 + guaranteed_upper);
    Ok((
        h,
        SumFrameCertificate {
            hypothesis_residual,
            lower_check,
            guaranteed_upper,
            upper_holds,
            optimal,
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorPairCertificate {
    /// Quadrature-based certificate for `(F X₁, G X₂)`.
    pub certificate: DualCertificate,
    /// `‖X₂* X₁ − I‖`.
    pub operator_residual: f64,
}

/// Certifies `(F X₁, G X₂)` as a dual pair.
pub fn dual_pair_under_operators(
    frame: &FrameMap,
    dual: &FrameMap,
    x1: &ModuleOperator,
    x2: &ModuleOperator,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<OperatorPairCertificate> {
    require_dual(frame, dual, rule, tol)?;
    let certificate = is_dual_pair(
        &frame.apply(x1, Side::Right)?,
        &dual.apply(x2, Side::Right)?,
        rule,
        tol,
    )?;
    Ok(OperatorPairCertificate {
        certificate,
        operator_residual: composition_residual(x1, x2)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledRelations {
    /// `‖a‖² · B`.
    pub claimed_bessel_bound: f64,
    pub bessel_bound: f64,
    pub bound_holds: bool,
    /// `‖Q_{aF} − Q_F‖`, present when `a` is unitary.
    pub unitary_deviation: Option<f64>,
    /// `‖Q_{aF} − diag(a*a) Q_F‖`, present when `a` is central.
    pub central_operator_deviation: Option<f64>,
    /// `‖T_{aF} φ − a T_F φ‖` on a test function, present when `a` is central.
    pub central_synthesis_deviation: Option<f64>,
}

/// `ω ↦ a·F(ω)` with the Bessel bound `‖a‖² B` and, for unitary or central
/// `a`, the relations between the frame and synthesis operators of `aF` and
/// `F`.
pub fn scaled_map(
    a: &AlgebraElement,
    frame: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<(FrameMap, ScaledRelations)> {
    let scaled = frame.left_scale(a)?;
    let qf = frame_operator(frame, rule)?;
    let qa = frame_operator(&scaled, rule)?;
    let b = extreme_eigenvalues(qf.matrix()).upper;
    let claimed_bessel_bound = a.op_norm().powi(2) * b;
    let bessel_bound = extreme_eigenvalues(qa.matrix()).upper.max(0.0);
    let bound_holds = bessel_bound <= claimed_bessel_bound + tol.positivity * (1.0 + claimed_bessel_bound);

    let desc = a.descriptor();
    let aa = a.adjoint().try_mul(a)?;
    let unitary = aa.distance(&AlgebraElement::identity(desc)) <= tol.hermitian
        && a.try_mul(&a.adjoint())?.distance(&AlgebraElement::identity(desc)) <= tol.hermitian;
    let unitary_deviation = unitary.then(|| qa.distance(&qf));

    let (central_operator_deviation, central_synthesis_deviation) = if a.is_central() {
        let d = ModuleOperator::block_diagonal(&aa, frame.rank());
        let predicted: CMatrix = d.matrix() * qf.matrix();
        let op_dev = spectral_norm(&(qa.matrix() - predicted));
        let phi = L2Element::from_fn(rule, |x| {
            AlgebraElement::scalar(desc, C64::new(1.0 + x, 0.5 * x))
        })?;
        let lhs = synthesis(&scaled, &phi)?;
        let rhs = crate::module::left_act(a, &synthesis(frame, &phi)?)?;
        (Some(op_dev), Some((&lhs - &rhs).norm()))
    } else {
        (None, None)
    };

    Ok((
        scaled,
        ScaledRelations {
            claimed_bessel_bound,
            bessel_bound,
            bound_holds,
            unitary_deviation,
            central_operator_deviation,
            central_synthesis_deviation,
        },
    ))
}

/// A dual assembled from two duals, with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CombinedDual {
    #[serde(skip)]
    pub map: FrameMap,
    pub certificate: DualCertificate,
}

/// `ω ↦ a₁ G(ω) + a₂ K(ω)` for central `a₁, a₂` with `a₁ + a₂ = 1`.
pub fn central_sum_dual(
    frame: &FrameMap,
    g: &FrameMap,
    k: &FrameMap,
    a1: &AlgebraElement,
    a2: &AlgebraElement,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<CombinedDual> {
    require_dual(frame, g, rule, tol)?;
    require_dual(frame, k, rule, tol)?;
    if !a1.is_central() || !a2.is_central() {
        return Err(FrameError::NotCentral);
    }
    a1.descriptor().ensure_same(a2.descriptor())?;
    let residual = (a1 + a2).distance(&AlgebraElement::identity(a1.descriptor()));
    if residual > tol.dual {
        return Err(FrameError::AffinityViolated { residual });
    }
    let map = g.left_scale(a1)?.add(&k.left_scale(a2)?)?;
    let certificate = require_dual(frame, &map, rule, tol)?;
    Ok(CombinedDual { map, certificate })
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorSumDual {
    #[serde(flatten)]
    pub dual: CombinedDual,
    /// `‖X₁ + X₂ − I‖`.
    pub iff_residual: f64,
}

/// `ω ↦ G(ω) X₁ + K(ω) X₂`; a dual exactly when `X₁ + X₂ = I`.
pub fn operator_sum_dual(
    frame: &FrameMap,
    g: &FrameMap,
    k: &FrameMap,
    x1: &ModuleOperator,
    x2: &ModuleOperator,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<OperatorSumDual> {
    require_dual(frame, g, rule, tol)?;
    require_dual(frame, k, rule, tol)?;
    let iff_residual = x1.try_add(x2)?.distance_to_identity();
    let map = g.apply(x1, Side::Right)?.add(&k.apply(x2, Side::Right)?)?;
    let certificate = is_dual_pair(frame, &map, rule, tol)?;
    Ok(OperatorSumDual {
        dual: CombinedDual { map, certificate },
        iff_residual,
    })
}

/// `α G + β K` with `α + β = 1`.
pub fn affine_sum_dual(
    frame: &FrameMap,
    g: &FrameMap,
    k: &FrameMap,
    alpha: C64,
    beta: C64,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<CombinedDual> {
    let residual = (alpha + beta - C64::new(1.0, 0.0)).norm();
    if residual > tol.dual {
        return Err(FrameError::AffinityViolated { residual });
    }
    let x1 = ModuleOperator::scalar(frame.descriptor(), frame.rank(), alpha);
    let x2 = ModuleOperator::scalar(frame.descriptor(), frame.rank(), beta);
    let out = operator_sum_dual(frame, g, k, &x1, &x2, rule, tol)?;
    if !out.dual.certificate.is_dual() {
        return Err(FrameError::NotADual {
            residual: out.dual.certificate.residual_norm,
            tol: tol.dual,
        });
    }
    Ok(out.dual)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    /// Certificate for `(F, G X)`.
    pub certificate: DualCertificate,
    /// `‖X − I‖`.
    pub operator_residual: f64,
}

/// Whether `G X` is still a dual of `F`, which forces `X = I`.
pub fn identity_check(
    frame: &FrameMap,
    dual: &FrameMap,
    x: &ModuleOperator,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<IdentityCheck> {
    require_dual(frame, dual, rule, tol)?;
    let certificate = is_dual_pair(frame, &dual.apply(x, Side::Right)?, rule, tol)?;
    Ok(IdentityCheck {
        certificate,
        operator_residual: x.distance_to_identity(),
    })
}
