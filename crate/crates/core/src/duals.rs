//! Constructions of duals of a continuous frame: dual sequences, the
//! decomposition `G = S⁻¹F + L` with a null Bessel part, the correspondence
//! with operators `K: U → L²(Ω, A)` satisfying `T_F K = 0`, and the two
//! characterizations of the canonical dual.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{spectral_norm, CMatrix, C64, ZERO};
use crate::error::{FrameError, Result};
use crate::frame::{
    analysis, frame_operator_pair, gram, is_dual_pair, require_dual, synthesis, DualCertificate,
};
use crate::map::FrameMap;
use crate::measure::{l2_inner, L2Element, QuadratureRule};
use crate::module::{self, ModuleElement, Side};
use crate::par;
use crate::sampling::random_unit_element;
use crate::tol::Tolerances;

/// A constructed dual together with its certificate.
#[derive(Debug, Clone)]
pub struct CertifiedDual {
    pub map: FrameMap,
    pub certificate: DualCertificate,
}

fn certified(
    frame: &FrameMap,
    map: FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<CertifiedDual> {
    let certificate = is_dual_pair(frame, &map, rule, tol)?;
    Ok(CertifiedDual { map, certificate })
}

/// One step `G_{i+1} = S⁻¹F + S G_i − F`, with `S` and `S⁻¹` applied from
/// `side`.
pub fn dual_sequence_step(
    frame: &FrameMap,
    current: &FrameMap,
    rule: &QuadratureRule,
    side: Side,
    tol: &Tolerances,
) -> Result<CertifiedDual> {
    require_dual(frame, current, rule, tol)?;
    let (q, qinv, _) = frame_operator_pair(frame, rule, tol)?;
    let next = frame
        .apply(&qinv, side)?
        .add(&current.apply(&q, side)?)?
        .sub(frame)?;
    certified(frame, next, rule, tol)
}

/// `S G − F`, the factor that the closed-form sequence multiplies by `S^i`.
pub fn dual_sequence_correction(
    frame: &FrameMap,
    dual: &FrameMap,
    rule: &QuadratureRule,
    side: Side,
    tol: &Tolerances,
) -> Result<FrameMap> {
    let (q, _, _) = frame_operator_pair(frame, rule, tol)?;
    dual.apply(&q, side)?.sub(frame)
}

/// Closed form `V_{i+1} = S⁻¹F + S^{i+1} G − S^i F = S⁻¹F + S^i (S G − F)`.
///
/// `index = 0` gives `V_1`; in general `V_{i+1}` equals `i + 1` applications
/// of [`dual_sequence_step`] starting from `G`.
pub fn dual_sequence_closed(
    frame: &FrameMap,
    dual: &FrameMap,
    index: u32,
    rule: &QuadratureRule,
    side: Side,
    tol: &Tolerances,
) -> Result<CertifiedDual> {
    require_dual(frame, dual, rule, tol)?;
    let (q, qinv, _) = frame_operator_pair(frame, rule, tol)?;
    let correction = dual.apply(&q, side)?.sub(frame)?;
    let map = frame
        .apply(&qinv, side)?
        .add(&correction.apply(&q.power(index), side)?)?;
    certified(frame, map, rule, tol)
}

/// `G = S⁻¹F + L`, with the size of `∫ F̂* L̂ dμ` measuring how far `L` is
/// from the null condition.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub null_part: FrameMap,
    pub nullity_residual: f64,
    pub is_dual: bool,
}

pub fn dual_decompose(
    frame: &FrameMap,
    candidate: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<Decomposition> {
    let (_, qinv, _) = frame_operator_pair(frame, rule, tol)?;
    let canonical = frame.apply(&qinv, Side::Right)?;
    let null_part = candidate.sub(&canonical)?;
    let nullity_residual = spectral_norm(&gram(frame, &null_part, rule)?);
    Ok(Decomposition {
        null_part,
        nullity_residual,
        is_dual: nullity_residual <= tol.dual,
    })
}

/// Basis of the polynomial maps `L` of degree at most `degree` with
/// `∫ F̂* L̂ dμ = 0`.
///
/// The moment system is solved by SVD and the null space brought to reduced
/// row echelon form with the highest-degree coefficients as pivots, so each
/// basis map has a unit entry in its leading coefficient.
pub fn null_bessel_family(
    frame: &FrameMap,
    degree: usize,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<Vec<FrameMap>> {
    let desc = frame.descriptor().clone();
    let k = frame.rank();
    let n = desc.dim();
    let size = n * k;
    let rows = frame.block_rows_on(rule)?;

    // moments M_j = ∫ ω^j F̂(ω)* dμ, each kn × n
    let moments: Vec<CMatrix> = (0..=degree)
        .map(|j| {
            rule.integrate_dense(size, n, |q, x| rows[q].adjoint().scale(x.powi(j as i32)))
        })
        .collect();

    // unknowns ordered by degree (highest first), component, algebra coordinate
    let coords: Vec<(usize, usize)> = desc
        .blocks()
        .iter()
        .zip(desc.offsets())
        .flat_map(|(&b, &off)| (0..b).flat_map(move |r| (0..b).map(move |c| (off + r, off + c))))
        .collect();
    let adim = coords.len();
    let unknowns: Vec<(usize, usize, usize, usize)> = (0..=degree)
        .rev()
        .flat_map(|j| (0..k).flat_map(move |i| (0..adim).map(move |e| (j, i, e, 0))))
        .map(|(j, i, e, _)| (j, i, coords[e].0, coords[e].1))
        .collect();
    let count = unknowns.len();

    // column u: vec of M_j Ê with Ê the unit block row at (r, i·n + c)
    let equations = size * size;
    let mut system = DMatrix::<C64>::zeros(equations.max(count), count);
    for (u, &(j, i, r, c)) in unknowns.iter().enumerate() {
        let col = i * n + c;
        for row in 0..size {
            system[(col * size + row, u)] = moments[j][(row, r)];
        }
    }
    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = tol.positivity * largest.max(1.0);
    let null: Vec<Vec<C64>> = (0..v_t.nrows())
        .filter(|&s| svd.singular_values[s] <= cut)
        .map(|s| v_t.row(s).iter().map(|z| z.conj()).collect())
        .collect();
    if null.is_empty() {
        return Ok(Vec::new());
    }
    let basis = reduced_row_echelon(null);

    basis
        .into_iter()
        .map(|vector| {
            let mut coeffs: Vec<CMatrix> = vec![CMatrix::zeros(n, size); degree + 1];
            for (&(j, i, r, c), &z) in unknowns.iter().zip(&vector) {
                coeffs[j][(r, i * n + c)] = z;
            }
            let coeffs = coeffs
                .iter()
                .map(|row| ModuleElement::project_row(&desc, k, row))
                .collect();
            FrameMap::polynomial(coeffs)
        })
        .collect()
}

/// Row-reduces a set of independent vectors with partial pivoting.
fn reduced_row_echelon(mut rows: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let width = rows[0].len();
    let mut pivot_row = 0;
    for col in 0..width {
        if pivot_row == rows.len() {
            break;
        }
        let (best, mag) = (pivot_row..rows.len())
            .map(|r| (r, rows[r][col].norm()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= 1e-12 {
            continue;
        }
        rows.swap(pivot_row, best);
        let p = rows[pivot_row][col];
        for z in rows[pivot_row].iter_mut() {
            *z /= p;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pivot_row {
                continue;
            }
            let factor = row[col];
            if factor != ZERO {
                for (z, &pz) in row.iter_mut().zip(&pivot) {
                    *z -= factor * pz;
                }
            }
        }
        pivot_row += 1;
    }
    rows
}

/// The operator `K f = ⟨f, G(·) − S⁻¹F(·)⟩`, stored through its generating
/// map `L = G − S⁻¹F`.
#[derive(Debug, Clone)]
pub struct KOperator {
    pub null_part: FrameMap,
    rule: QuadratureRule,
}

impl KOperator {
    /// `(K f)(ω_q) = ⟨f, L(ω_q)⟩`.
    pub fn apply(&self, f: &ModuleElement) -> Result<L2Element> {
        analysis(&self.null_part, f, &self.rule)
    }

    /// Exact norm `√‖∫ L̂* L̂ dμ‖`, an upper bound for every sampled ratio
    /// `‖K f‖ / ‖f‖`.
    pub fn norm_upper(&self) -> Result<f64> {
        Ok(spectral_norm(&gram(&self.null_part, &self.null_part, &self.rule)?).sqrt())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KChecks {
    pub samples: usize,
    /// Largest `‖T_F K f‖ / ‖f‖` over the sampled `f`.
    pub synthesis_residual: f64,
    /// Largest `‖K f‖` over sampled unit `f`.
    pub sampled_norm: f64,
    /// `√‖∫ L̂* L̂ dμ‖`.
    pub norm_upper: f64,
    /// Least Bessel bound `D` of the dual.
    pub dual_bessel_bound: f64,
    /// Optimal lower frame bound `A*` of the frame.
    pub frame_lower_bound: f64,
    /// `√D + 1/√A*`.
    pub norm_bound: f64,
    pub bound_holds: bool,
}

/// Builds `K` from a dual and checks `T_F K = 0` and the norm bound on
/// `samples` random unit elements.
pub fn k_operator_from_dual<R: Rng>(
    frame: &FrameMap,
    dual: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
    samples: usize,
    rng: &mut R,
) -> Result<(KOperator, KChecks)> {
    require_dual(frame, dual, rule, tol)?;
    let (_, qinv, bounds) = frame_operator_pair(frame, rule, tol)?;
    let null_part = dual.sub(&frame.apply(&qinv, Side::Right)?)?;
    let k = KOperator {
        null_part,
        rule: rule.clone(),
    };
    let inputs: Vec<ModuleElement> = (0..samples)
        .map(|_| random_unit_element(frame.descriptor(), frame.rank(), rng))
        .collect();
    let results = par::map_indexed(inputs.len(), |s| -> Result<(f64, f64)> {
        let f = &inputs[s];
        let kf = k.apply(f)?;
        let tfk = synthesis(frame, &kf)?;
        let norm_f = f.norm().max(f64::MIN_POSITIVE);
        Ok((tfk.norm() / norm_f, l2_inner(&kf, &kf)?.op_norm().sqrt() / norm_f))
    });
    let mut synthesis_residual: f64 = 0.0;
    let mut sampled_norm: f64 = 0.0;
    for r in results {
        let (res, norm) = r?;
        synthesis_residual = synthesis_residual.max(res);
        sampled_norm = sampled_norm.max(norm);
    }
    let dual_bessel_bound = crate::frame::bessel_bound(dual, rule)?;
    let norm_bound = dual_bessel_bound.sqrt() + 1.0 / bounds.lower.sqrt();
    let norm_upper = k.norm_upper()?;
    let slack = tol.positivity * (1.0 + norm_bound);
    let checks = KChecks {
        samples,
        synthesis_residual,
        sampled_norm,
        norm_upper,
        dual_bessel_bound,
        frame_lower_bound: bounds.lower,
        norm_bound,
        bound_holds: sampled_norm <= norm_bound + slack && norm_upper <= norm_bound + slack,
    };
    Ok((k, checks))
}

/// `G = S⁻¹F + L` for a null map `L`, i.e. the dual attached to `K`.
pub fn dual_from_k_operator(
    frame: &FrameMap,
    null_part: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<CertifiedDual> {
    let residual = spectral_norm(&gram(frame, null_part, rule)?);
    if residual > tol.dual {
        return Err(FrameError::NullityViolated {
            residual,
            tol: tol.dual,
        });
    }
    let (_, qinv, _) = frame_operator_pair(frame, rule, tol)?;
    let map = frame.apply(&qinv, Side::Right)?.add(null_part)?;
    certified(frame, map, rule, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    /// `max ‖⟨F(ω), G(γ)⟩ − ⟨G(ω), F(γ)⟩‖` over the grid.
    pub max_deviation: f64,
    /// `(ω, γ)` attaining the maximum (first in scan order).
    pub witness: (f64, f64),
    pub grid_size: usize,
}

/// Scans `⟨F(ω), G(γ)⟩ = ⟨G(ω), F(γ)⟩` over `grid × grid`.
pub fn kernel_symmetry_check(frame: &FrameMap, dual: &FrameMap, grid: &[f64]) -> Result<SymmetryReport> {
    if grid.is_empty() {
        return Err(FrameError::ShapeMismatch("empty grid".into()));
    }
    let fs: Vec<ModuleElement> = grid.iter().map(|&x| frame.eval(x)).collect::<Result<_>>()?;
    let gs: Vec<ModuleElement> = grid.iter().map(|&x| dual.eval(x)).collect::<Result<_>>()?;
    if let (Some(f), Some(g)) = (fs.first(), gs.first()) {
        module::inner(f, g)?;
    }
    let rows = par::map_indexed(grid.len(), |i| {
        let mut best = (-1.0, 0);
        for j in 0..grid.len() {
            let lhs = module::inner_unchecked(&fs[i], &gs[j]);
            let rhs = module::inner_unchecked(&gs[i], &fs[j]);
            let d = lhs.distance(&rhs);
            if d > best.0 {
                best = (d, j);
            }
        }
        best
    });
    let mut max_deviation = -1.0;
    let mut witness = (grid[0], grid[0]);
    for (i, &(d, j)) in rows.iter().enumerate() {
        if d > max_deviation {
            max_deviation = d;
            witness = (grid[i], grid[j]);
        }
    }
    Ok(SymmetryReport {
        max_deviation,
        witness,
        grid_size: grid.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalityVerdict {
    Canonical,
    NonCanonical,
    /// `Q_D − Q⁻¹` failed the positivity test.
    OrderViolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimalityReport {
    /// Certified lower bound for `min eig(Q_D − Q⁻¹)`.
    pub margin: f64,
    /// Certified upper bound for `max eig(Q_D − Q⁻¹)`; zero exactly for the
    /// canonical dual.
    pub excess: f64,
    /// `‖Q⁻¹R* + RQ⁻¹‖` with `R` the dual residual, the amount by which
    /// `Q_D − Q⁻¹` can differ from the Gram matrix of `D − S⁻¹F`.
    pub cross_term: f64,
    pub order_holds: bool,
    pub verdict: MinimalityVerdict,
}

/// Compares the frame operator of a dual `D` with that of the canonical dual,
/// which is `Q⁻¹`.
///
/// With `L = D − S⁻¹F` and `R = ∫ D̂* F̂ dμ − I`,
/// `Q_D − Q⁻¹ = ∫ L̂* L̂ dμ + Q⁻¹R* + RQ⁻¹`. The first term is evaluated in
/// square-root form as the squared singular values of the weighted samples
/// of `L`, which stays accurate when `‖Q_D‖` is large; the second is folded
/// in through Weyl's inequality.
pub fn minimality_check(
    frame: &FrameMap,
    dual: &FrameMap,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<MinimalityReport> {
    let cert = require_dual(frame, dual, rule, tol)?;
    let (_, qinv, _) = frame_operator_pair(frame, rule, tol)?;
    let null_part = dual.sub(&frame.apply(&qinv, Side::Right)?)?;
    let rows = null_part.block_rows_on(rule)?;
    let n = frame.descriptor().dim();
    let size = n * frame.rank();
    let mut stacked = CMatrix::zeros(rows.len() * n, size);
    for (q, (row, &w)) in rows.iter().zip(rule.weights()).enumerate() {
        stacked
            .view_mut((q * n, 0), (n, size))
            .copy_from(&row.scale(w.sqrt()));
    }
    let singular = stacked.singular_values();
    let top = singular.iter().copied().fold(0.0, f64::max);
    let bottom = if stacked.nrows() < size {
        0.0
    } else {
        singular.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let r = &cert.residual;
    let cross = qinv.matrix() * r.adjoint() + r * qinv.matrix();
    let cross_term = spectral_norm(&cross);
    let margin = bottom * bottom - cross_term;
    let excess = top * top + cross_term;
    let slack = tol.positivity * (1.0 + spectral_norm(qinv.matrix()));
    let order_holds = margin >= -slack;
    let verdict = if !order_holds {
        MinimalityVerdict::OrderViolated
    } else if excess <= slack {
        MinimalityVerdict::Canonical
    } else {
        MinimalityVerdict::NonCanonical
    };
    Ok(MinimalityReport {
        margin,
        excess,
        cross_term,
        order_holds,
        verdict,
    })
}
