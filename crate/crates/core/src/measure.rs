//! Measure spaces, quadrature rules, algebra-valued integration and the
//! Hilbert module `L²(Ω, A)` sampled at quadrature nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{AlgebraElement, CMatrix};
use crate::error::{FrameError, Result};
use crate::par;

/// `(Ω, μ)`: a weighted interval or a finite set of atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureSpace {
    /// `dμ = w(ω) dω` on `[a, b]`; `weight` holds the monomial coefficients
    /// of `w`, constant term first.
    Interval { a: f64, b: f64, weight: Vec<f64> },
    Discrete { points: Vec<f64>, masses: Vec<f64> },
}

impl MeasureSpace {
    /// Lebesgue measure on `[a, b]`.
    pub fn lebesgue(a: f64, b: f64) -> Self {
        Self::Interval {
            a,
            b,
            weight: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Interval { a, b, weight } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(FrameError::InvalidMeasure(format!(
                        "interval needs finite a < b, got [{a}, {b}]"
                    )));
                }
                if weight.iter().any(|c| !c.is_finite()) {
                    return Err(FrameError::InvalidMeasure("non-finite weight coefficient".into()));
                }
                if weight.iter().all(|&c| c == 0.0) {
                    return Err(FrameError::InvalidMeasure("weight vanishes identically".into()));
                }
                Ok(())
            }
            Self::Discrete { points, masses } => {
                if points.is_empty() {
                    return Err(FrameError::InvalidMeasure("no atoms".into()));
                }
                if points.len() != masses.len() {
                    return Err(FrameError::InvalidMeasure(format!(
                        "{} points but {} masses",
                        points.len(),
                        masses.len()
                    )));
                }
                if masses.iter().any(|&m| !(m.is_finite() && m > 0.0)) {
                    return Err(FrameError::InvalidMeasure("masses must be positive".into()));
                }
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(FrameError::InvalidMeasure("non-finite atom".into()));
                }
                let mut sorted = points.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(FrameError::InvalidMeasure("repeated atom".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::Discrete { .. })
    }
}

/// Polynomial degree of a coefficient list, ignoring trailing zeros.
pub fn poly_degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

pub fn eval_real_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Degree of polynomials a rule integrates exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    /// All polynomials up to this degree.
    Degree(usize),
    /// Every integrand: the measure is a finite sum of atoms.
    Exact,
}

impl Exactness {
    pub fn covers(&self, degree: usize) -> bool {
        match self {
            Self::Degree(d) => degree <= *d,
            Self::Exact => true,
        }
    }
}

#[derive(Debug, PartialEq)]
struct RuleInner {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness: Exactness,
}

/// Nodes and weights; cloning shares the storage.
#[derive(Debug, Clone)]
pub struct QuadratureRule(Arc<RuleInner>);

impl PartialEq for QuadratureRule {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Serialize for QuadratureRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QuadratureRule", 3)?;
        st.serialize_field("nodes", &self.0.nodes)?;
        st.serialize_field("weights", &self.0.weights)?;
        st.serialize_field("exactness", &self.0.exactness)?;
        st.end()
    }
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, exactness: Exactness) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(FrameError::RuleMismatch(format!(
                "{} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        Ok(Self(Arc::new(RuleInner {
            nodes,
            weights,
            exactness,
        })))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.0.weights
    }

    pub fn exactness(&self) -> Exactness {
        self.0.exactness
    }

    pub fn len(&self) -> usize {
        self.0.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nodes.is_empty()
    }

    /// True for rules over finite discrete measures.
    pub fn is_discrete(&self) -> bool {
        self.0.exactness == Exactness::Exact
    }

    /// Index of the node equal to `x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        self.0.nodes.iter().position(|&n| n == x)
    }

    pub fn total_mass(&self) -> f64 {
        self.0.weights.iter().sum()
    }

    /// `Σ_q w_q f(ω_q)` for a scalar integrand.
    pub fn integrate_scalar(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes()
            .iter()
            .zip(self.weights())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(FrameError::RuleMismatch("values live on different rules".into()))
        }
    }

    /// `Σ_q w_q M_q` over dense per-node matrices produced by `term`.
    ///
    /// Terms are computed through [`par::map_indexed`] and summed in node
    /// order, so the result does not depend on the backend.
    pub fn integrate_dense<F>(&self, rows: usize, cols: usize, term: F) -> CMatrix
    where
        F: Fn(usize, f64) -> CMatrix + Sync + Send,
    {
        let nodes = self.nodes();
        let terms = par::map_indexed(nodes.len(), |q| term(q, nodes[q]));
        let mut acc = CMatrix::zeros(rows, cols);
        for (t, &w) in terms.iter().zip(self.weights()) {
            acc += t.scale(w);
        }
        acc
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Builds a rule integrating `∫ p dμ` exactly for `deg p ≤ target_degree`.
///
/// Interval rules fold the weight polynomial into Gauss–Legendre weights;
/// discrete spaces return their own atoms.
pub fn build_rule(space: &MeasureSpace, target_degree: usize) -> Result<QuadratureRule> {
    space.validate()?;
    match space {
        MeasureSpace::Discrete { points, masses } => {
            QuadratureRule::new(points.clone(), masses.clone(), Exactness::Exact)
        }
        MeasureSpace::Interval { a, b, weight } => {
            let wdeg = poly_degree(weight);
            let total = target_degree + wdeg;
            let m = (total + 2) / 2;
            let (ref_nodes, ref_weights) = gauss_legendre(m);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut nodes = Vec::with_capacity(m);
            let mut weights = Vec::with_capacity(m);
            for (t, w) in ref_nodes.into_iter().zip(ref_weights) {
                let x = mid + half * t;
                let wx = eval_real_poly(weight, x);
                if wx < 0.0 {
                    return Err(FrameError::NegativeWeight { node: x, value: wx });
                }
                nodes.push(x);
                weights.push(half * w * wx);
            }
            QuadratureRule::new(nodes, weights, Exactness::Degree(2 * m - 1 - wdeg))
        }
    }
}

/// `Σ_q w_q · values_q`, summed in node order.
pub fn integrate_alg(rule: &QuadratureRule, values: &[AlgebraElement]) -> Result<AlgebraElement> {
    if values.len() != rule.len() {
        return Err(FrameError::RuleMismatch(format!(
            "{} values for {} nodes",
            values.len(),
            rule.len()
        )));
    }
    let first = &values[0];
    let mut acc = AlgebraElement::zero(first.descriptor());
    for (v, &w) in values.iter().zip(rule.weights()) {
        first.descriptor().ensure_same(v.descriptor())?;
        acc = &acc + &v.scale_real(w);
    }
    Ok(acc)
}

/// An element of `L²(Ω, A)`, known through its values at the rule's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Element {
    rule: QuadratureRule,
    samples: Vec<AlgebraElement>,
}

impl L2Element {
    pub fn new(rule: &QuadratureRule, samples: Vec<AlgebraElement>) -> Result<Self> {
        if samples.len() != rule.len() {
            return Err(FrameError::RuleMismatch(format!(
                "{} samples for {} nodes",
                samples.len(),
                rule.len()
            )));
        }
        for s in &samples[1..] {
            samples[0].descriptor().ensure_same(s.descriptor())?;
        }
        Ok(Self {
            rule: rule.clone(),
            samples,
        })
    }

    /// Samples `φ(ω_q)` of a function given pointwise.
    pub fn from_fn(rule: &QuadratureRule, f: impl Fn(f64) -> AlgebraElement) -> Result<Self> {
        Self::new(rule, rule.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn samples(&self) -> &[AlgebraElement] {
        &self.samples
    }

    /// Norm `‖⟨φ, φ⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        l2_inner(self, self)
            .map(|a| a.op_norm().sqrt())
            .unwrap_or(0.0)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            rule: self.rule.clone(),
            samples: self.samples.iter().map(|s| s.scale_real(c)).collect(),
        }
    }
}

/// `⟨φ, ψ⟩ = ∫ φ(ω) ψ(ω)* dμ(ω)`.
pub fn l2_inner(phi: &L2Element, psi: &L2Element) -> Result<AlgebraElement> {
    phi.rule.ensure_same(&psi.rule)?;
    let values: Vec<AlgebraElement> = phi
        .samples
        .iter()
        .zip(&psi.samples)
        .map(|(a, b)| a.try_mul(&b.adjoint()))
        .collect::<Result<_>>()?;
    integrate_alg(&phi.rule, &values)
}
