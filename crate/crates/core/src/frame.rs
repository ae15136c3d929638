//! Synthesis, analysis and frame operators, frame bounds, and the frame and
//! dual certificates.
//!
//! For `U = A^k` the frame operator acts as `f̂ ↦ f̂ Q` with the Gram matrix
//! `Q = ∫ F̂(ω)* F̂(ω) dμ(ω)`, so the frame inequality
//! `A⟨f,f⟩ ⪯ ⟨S f, f⟩ ⪯ B⟨f,f⟩` for all `f` is the matrix sandwich
//! `A·I ⪯ Q ⪯ B·I`, and `(F, G)` is a dual pair exactly when
//! `∫ Ĝ(ω)* F̂(ω) dμ(ω) = I`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{eigh, psd_report, spectral_norm, AlgebraElement, CMatrix, OrderReport};
use crate::error::{FrameError, Result};
use crate::map::FrameMap;
use crate::measure::{L2Element, QuadratureRule};
use crate::module::{self, ModuleElement, ModuleOperator, Side};
use crate::par;
use crate::report::{matrix_rows, Pair};
use crate::tol::Tolerances;

fn ensure_pair(a: &FrameMap, b: &FrameMap) -> Result<()> {
    a.descriptor().ensure_same(b.descriptor())?;
    if a.rank() != b.rank() {
        return Err(FrameError::ShapeMismatch(format!(
            "map ranks differ: {} vs {}",
            a.rank(),
            b.rank()
        )));
    }
    Ok(())
}

/// `∫ L̂(ω)* R̂(ω) dμ(ω)`.
pub fn gram(left: &FrameMap, right: &FrameMap, rule: &QuadratureRule) -> Result<CMatrix> {
    ensure_pair(left, right)?;
    let size = left.descriptor().dim() * left.rank();
    let l = left.block_rows_on(rule)?;
    let r = right.block_rows_on(rule)?;
    Ok(rule.integrate_dense(size, size, |q, _| l[q].adjoint() * &r[q]))
}

/// The frame operator, as right multiplication by `Q = ∫ F̂* F̂ dμ`.
pub fn frame_operator(map: &FrameMap, rule: &QuadratureRule) -> Result<ModuleOperator> {
    let q = gram(map, map, rule)?;
    Ok(ModuleOperator::from_parts(map.descriptor(), map.rank(), q))
}

/// `T*_F f`, sampled as `ω_q ↦ ⟨f, F(ω_q)⟩`.
pub fn analysis(map: &FrameMap, f: &ModuleElement, rule: &QuadratureRule) -> Result<L2Element> {
    map.descriptor().ensure_same(f.descriptor())?;
    if map.rank() != f.rank() {
        return Err(FrameError::ShapeMismatch(format!(
            "map rank {} vs element rank {}",
            map.rank(),
            f.rank()
        )));
    }
    let samples = map.samples_on(rule)?;
    let values = par::map_indexed(samples.len(), |q| module::inner_unchecked(f, &samples[q]));
    L2Element::new(rule, values)
}

/// `T_F φ = ∫ φ(ω) F(ω) dμ(ω)` on `φ`'s rule.
pub fn synthesis(map: &FrameMap, phi: &L2Element) -> Result<ModuleElement> {
    let rule = phi.rule();
    let samples = map.samples_on(rule)?;
    if let Some(first) = phi.samples().first() {
        first.descriptor().ensure_same(map.descriptor())?;
    }
    let n = map.descriptor().dim();
    let phis = phi.samples();
    let row = rule.integrate_dense(n, n * map.rank(), |q, _| {
        phis[q].to_dense() * samples[q].to_block_row()
    });
    Ok(ModuleElement::project_row(map.descriptor(), map.rank(), &row))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Extreme eigenvalues of a Hermitian Gram matrix.
pub(crate) fn extreme_eigenvalues(q: &CMatrix) -> FrameBounds {
    let (values, _) = eigh(&crate::algebra::hermitian_part(q));
    FrameBounds {
        lower: values.first().copied().unwrap_or(0.0),
        upper: values.last().copied().unwrap_or(0.0),
    }
}

/// Tightest frame bounds `(min eig Q, max eig Q)`.
pub fn optimal_frame_bounds(map: &FrameMap, rule: &QuadratureRule) -> Result<FrameBounds> {
    Ok(extreme_eigenvalues(frame_operator(map, rule)?.matrix()))
}

/// Least Bessel constant, `max eig Q`.
pub fn bessel_bound(map: &FrameMap, rule: &QuadratureRule) -> Result<f64> {
    Ok(optimal_frame_bounds(map, rule)?.upper.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameVerdict {
    Frame,
    BesselOnly,
    NotBesselEvidence,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameCertificate {
    pub claimed: Option<FrameBounds>,
    pub optimal: FrameBounds,
    /// `min eig(Q − A·I)`; for unclaimed certificates, `A*` itself.
    pub lower_margin: f64,
    /// `min eig(B·I − Q)`; for unclaimed certificates, zero.
    pub upper_margin: f64,
    pub lower: Option<OrderReport>,
    pub upper: Option<OrderReport>,
    pub verdict: FrameVerdict,
}

/// Whether the optimal lower bound clears the positivity tolerance.
pub(crate) fn is_frame(bounds: &FrameBounds, tol: &Tolerances) -> bool {
    bounds.lower > tol.positivity * (1.0 + bounds.upper.abs())
}

/// Certificate from the optimal bounds alone.
pub fn certify_frame(map: &FrameMap, rule: &QuadratureRule, tol: &Tolerances) -> Result<FrameCertificate> {
    let optimal = optimal_frame_bounds(map, rule)?;
    let verdict = if is_frame(&optimal, tol) {
        FrameVerdict::Frame
    } else {
        FrameVerdict::BesselOnly
    };
    Ok(FrameCertificate {
        claimed: None,
        optimal,
        lower_margin: optimal.lower,
        upper_margin: 0.0,
        lower: None,
        upper: None,
        verdict,
    })
}

/// Checks `A·I ⪯ Q ⪯ B·I` for claimed bounds.
pub fn verify_claimed_bounds(
    map: &FrameMap,
    lower: f64,
    upper: f64,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<FrameCertificate> {
    let q = frame_operator(map, rule)?;
    let size = q.matrix().nrows();
    let id = CMatrix::identity(size, size);
    let low = psd_report(&(q.matrix() - id.scale(lower)), tol.positivity);
    let up = psd_report(&(id.scale(upper) - q.matrix()), tol.positivity);
    let verdict = match (low.holds && lower > 0.0, up.holds) {
        (_, false) => FrameVerdict::NotBesselEvidence,
        (true, true) => FrameVerdict::Frame,
        (false, true) => FrameVerdict::BesselOnly,
    };
    Ok(FrameCertificate {
        claimed: Some(FrameBounds { lower, upper }),
        optimal: extreme_eigenvalues(q.matrix()),
        lower_margin: low.margin,
        upper_margin: up.margin,
        lower: Some(low),
        upper: Some(up),
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualVerdict {
    Dual,
    NotDual,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualCertificate {
    /// `‖∫ Ĝ* F̂ dμ − I‖`.
    pub residual_norm: f64,
    #[serde(serialize_with = "ser_matrix")]
    pub residual: CMatrix,
    pub tolerance: f64,
    pub verdict: DualVerdict,
}

impl DualCertificate {
    pub fn is_dual(&self) -> bool {
        self.verdict == DualVerdict::Dual
    }

    pub(crate) fn from_cross_gram(cross: &CMatrix, tol: f64) -> Self {
        let size = cross.nrows();
        let residual = cross - CMatrix::identity(size, size);
        let residual_norm = spectral_norm(&residual);
        let verdict = if residual_norm <= tol {
            DualVerdict::Dual
        } else {
            DualVerdict::NotDual
        };
        Self {
            residual_norm,
            residual,
            tolerance: tol,
            verdict,
        }
    }
}

pub(crate) fn ser_matrix<S: serde::Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Pair>> = matrix_rows(m);
    rows.serialize(s)
}

/// Certifies `f = ∫ ⟨f, G(ω)⟩ F(ω) dμ(ω)` for all `f` via the residual of
/// `∫ Ĝ* F̂ dμ = I`.
pub fn is_dual_pair(
    frame: &FrameMap,
    dual: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<DualCertificate> {
    let cross = gram(dual, frame, rule)?;
    Ok(DualCertificate::from_cross_gram(&cross, tol.dual))
}

pub(crate) fn require_dual(
    frame: &FrameMap,
    dual: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<DualCertificate> {
    let cert = is_dual_pair(frame, dual, rule, tol)?;
    if cert.is_dual() {
        Ok(cert)
    } else {
        Err(FrameError::NotADual {
            residual: cert.residual_norm,
            tol: tol.dual,
        })
    }
}

/// Frame operator, checked to be invertible, together with its inverse.
pub(crate) fn frame_operator_pair(
    frame: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<(ModuleOperator, ModuleOperator, FrameBounds)> {
    let q = frame_operator(frame, rule)?;
    let bounds = extreme_eigenvalues(q.matrix());
    if !is_frame(&bounds, tol) {
        return Err(FrameError::NotAFrame {
            lower: bounds.lower,
            tol: tol.positivity * (1.0 + bounds.upper.abs()),
        });
    }
    let qinv = q.inverse(tol.invertibility)?;
    Ok((q, qinv, bounds))
}

/// The canonical dual `S⁻¹F`, i.e. `ω ↦ F̂(ω) Q⁻¹`.
pub fn canonical_dual(frame: &FrameMap, rule: &QuadratureRule, tol: &Tolerances) -> Result<FrameMap> {
    let (_, qinv, _) = frame_operator_pair(frame, rule, tol)?;
    frame.apply(&qinv, Side::Right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RieszVerdict {
    RieszType,
    NotRieszType,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct RieszReport {
    pub verdict: RieszVerdict,
    /// Complex dimension of `U`.
    pub domain_dim: usize,
    /// Complex dimension of the node-sampled `L²(Ω, A)`.
    pub sampled_codomain_dim: usize,
    /// Numerical rank of the sampled analysis operator.
    pub rank: usize,
    /// `sampled_codomain_dim − rank`, the part of the sampled space missed by
    /// the analysis operator.
    pub dimension_gap: usize,
    /// The measure has a continuous part, so `L²(Ω, A)` is infinite
    /// dimensional and cannot be reached by a finite-dimensional `U`.
    pub nonatomic: bool,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
}

/// Surjectivity of the analysis operator, which characterizes frames with a
/// unique dual.
///
/// On discrete measures the analysis operator is assembled as a complex
/// matrix `U → A^N` and its rank decides. On intervals the verdict is
/// structural (`not_riesz_type`); the sampled rank is still reported.
pub fn riesz_type_diagnostic(
    frame: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<RieszReport> {
    frame_operator_pair(frame, rule, tol)?;
    let desc = frame.descriptor();
    let k = frame.rank();
    let n = desc.dim();
    let adim = desc.complex_dim();
    let samples = frame.block_rows_on(rule)?;
    let nodes = rule.len();

    // coordinates of the algebra inside M_n
    let coords: Vec<(usize, usize)> = desc
        .blocks()
        .iter()
        .zip(desc.offsets())
        .flat_map(|(&b, &off)| (0..b).flat_map(move |r| (0..b).map(move |c| (off + r, off + c))))
        .collect();
    let domain_dim = k * adim;
    let codomain_dim = nodes * adim;

    // column j: image of the j-th basis element E (component i, entry (r, c))
    let mut mat = DMatrix::zeros(codomain_dim.max(domain_dim), domain_dim);
    for i in 0..k {
        for (e, &(r, c)) in coords.iter().enumerate() {
            let col = i * adim + e;
            for (q, row) in samples.iter().enumerate() {
                // ⟨E, F(ω_q)⟩ = E F̂(ω_q)*: row r holds conj of column i·n + c of F̂
                for (t, &(rr, cc)) in coords.iter().enumerate() {
                    if rr == r {
                        mat[(q * adim + t, col)] = row[(cc, i * n + c)].conj();
                    }
                }
            }
        }
    }
    let sv = mat.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = tol.positivity * largest;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let ambiguous = sv.iter().any(|&s| s > cut * 1e-3 && s < cut * 1e3);
    let nonatomic = !rule.is_discrete();
    let verdict = if nonatomic {
        RieszVerdict::NotRieszType
    } else if ambiguous {
        RieszVerdict::Inconclusive
    } else if rank == codomain_dim {
        RieszVerdict::RieszType
    } else {
        RieszVerdict::NotRieszType
    };
    Ok(RieszReport {
        verdict,
        domain_dim,
        sampled_codomain_dim: codomain_dim,
        rank,
        dimension_gap: codomain_dim.saturating_sub(rank),
        nonatomic,
        smallest_singular_value: smallest,
        largest_singular_value: largest,
    })
}

/// `⟨f Q, f⟩`, the quadratic form of the frame operator at `f`.
pub fn frame_form(q: &ModuleOperator, f: &ModuleElement) -> Result<AlgebraElement> {
    module::inner(&module::apply_operator(q, f)?, f)
}
