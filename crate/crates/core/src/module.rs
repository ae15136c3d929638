//! The free Hilbert module `U = A^k` and its adjointable operators.
//!
//! An element `f = (f_1, …, f_k)` is identified with the `n × kn` block row
//! `f̂ = [f_1 … f_k]`; the inner product is `⟨f, g⟩ = f̂ ĝ*`. Adjointable
//! operators act by right multiplication `f̂ ↦ f̂ X` with `X` a `k × k` array
//! of algebra elements, so the adjoint is the conjugate transpose of `X`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{
    psd_report, spectral_norm, AlgebraDescriptor, AlgebraElement, CMatrix, OrderReport, C64,
};
use crate::error::{FrameError, Result};

/// Which side an operator acts from when applied pointwise to a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `f̂ ↦ f̂ X`, the adjointable-operator action.
    Right,
    /// `f ↦ X f` for rank-1 modules, with `X` read as an algebra element.
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleElement {
    comps: Vec<AlgebraElement>,
}

impl ModuleElement {
    pub fn new(comps: Vec<AlgebraElement>) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| FrameError::ShapeMismatch("module rank must be at least 1".into()))?;
        for c in &comps[1..] {
            first.descriptor().ensure_same(c.descriptor())?;
        }
        Ok(Self { comps })
    }

    pub fn zero(desc: &AlgebraDescriptor, rank: usize) -> Self {
        Self {
            comps: vec![AlgebraElement::zero(desc); rank.max(1)],
        }
    }

    /// Rank-1 element wrapping a single algebra element.
    pub fn single(a: AlgebraElement) -> Self {
        Self { comps: vec![a] }
    }

    /// Builds an element from an `n × kn` block row, checking each block.
    pub fn from_block_row(desc: &AlgebraDescriptor, rank: usize, row: &CMatrix) -> Result<Self> {
        let n = desc.dim();
        if row.nrows() != n || row.ncols() != n * rank || rank == 0 {
            return Err(FrameError::ShapeMismatch(format!(
                "expected {n}x{} block row, got {}x{}",
                n * rank,
                row.nrows(),
                row.ncols()
            )));
        }
        let comps = (0..rank)
            .map(|i| {
                let block = row.view((0, i * n), (n, n)).into_owned();
                AlgebraElement::from_dense(desc, &block).map_err(|e| match e {
                    FrameError::BlockPatternViolation { row, col } => {
                        FrameError::BlockPatternViolation {
                            row,
                            col: col + i * n,
                        }
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { comps })
    }

    pub(crate) fn project_row(desc: &AlgebraDescriptor, rank: usize, row: &CMatrix) -> Self {
        let n = desc.dim();
        let comps = (0..rank)
            .map(|i| AlgebraElement::project(desc, &row.view((0, i * n), (n, n)).into_owned()))
            .collect();
        Self { comps }
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        self.comps[0].descriptor()
    }

    pub fn rank(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[AlgebraElement] {
        &self.comps
    }

    pub fn to_block_row(&self) -> CMatrix {
        let n = self.descriptor().dim();
        let mut row = CMatrix::zeros(n, n * self.rank());
        for (i, c) in self.comps.iter().enumerate() {
            row.view_mut((0, i * n), (n, n)).copy_from(&c.to_dense());
        }
        row
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.descriptor().ensure_same(other.descriptor())?;
        if self.rank() != other.rank() {
            return Err(FrameError::ShapeMismatch(format!(
                "module ranks differ: {} vs {}",
                self.rank(),
                other.rank()
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            comps: self.comps.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// Norm `‖⟨f, f⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        inner_unchecked(self, self).op_norm().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.comps
            .iter()
            .map(AlgebraElement::max_abs_entry)
            .fold(0.0, f64::max)
    }

    fn zip(&self, other: &Self, f: impl Fn(&AlgebraElement, &AlgebraElement) -> AlgebraElement) -> Self {
        assert_eq!(self.rank(), other.rank(), "module ranks differ");
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

pub(crate) fn inner_unchecked(f: &ModuleElement, g: &ModuleElement) -> AlgebraElement {
    let mut acc = AlgebraElement::zero(f.descriptor());
    for (a, b) in f.comps.iter().zip(&g.comps) {
        acc = &acc + &(a * &b.adjoint());
    }
    acc
}

/// A-valued inner product `⟨f, g⟩ = Σ f_i g_i*`.
pub fn inner(f: &ModuleElement, g: &ModuleElement) -> Result<AlgebraElement> {
    f.ensure_compatible(g)?;
    Ok(inner_unchecked(f, g))
}

/// Left module action `a·f = (a f_1, …, a f_k)`.
pub fn left_act(a: &AlgebraElement, f: &ModuleElement) -> Result<ModuleElement> {
    a.descriptor().ensure_same(f.descriptor())?;
    Ok(ModuleElement {
        comps: f.comps.iter().map(|c| a * c).collect(),
    })
}

impl Add for &ModuleElement {
    type Output = ModuleElement;
    fn add(self, rhs: &ModuleElement) -> ModuleElement {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &ModuleElement {
    type Output = ModuleElement;
    fn sub(self, rhs: &ModuleElement) -> ModuleElement {
        self.zip(rhs, |a, b| a - b)
    }
}

/// An adjointable operator on `A^k`, acting as `f̂ ↦ f̂ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOperator {
    desc: AlgebraDescriptor,
    rank: usize,
    matrix: CMatrix,
}

impl ModuleOperator {
    /// Validates that every `n × n` block of `matrix` lies in the algebra.
    pub fn new(desc: &AlgebraDescriptor, rank: usize, matrix: CMatrix) -> Result<Self> {
        let n = desc.dim();
        let size = n * rank;
        if rank == 0 || matrix.nrows() != size || matrix.ncols() != size {
            return Err(FrameError::ShapeMismatch(format!(
                "operator must be {size}x{size}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for bi in 0..rank {
            for bj in 0..rank {
                let block = matrix.view((bi * n, bj * n), (n, n)).into_owned();
                desc.check_pattern(&block).map_err(|e| match e {
                    FrameError::BlockPatternViolation { row, col } => {
                        FrameError::BlockPatternViolation {
                            row: row + bi * n,
                            col: col + bj * n,
                        }
                    }
                    other => other,
                })?;
            }
        }
        Ok(Self {
            desc: desc.clone(),
            rank,
            matrix,
        })
    }

    /// Builds from a matrix that is known to respect the block pattern.
    pub(crate) fn from_parts(desc: &AlgebraDescriptor, rank: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), desc.dim() * rank);
        Self {
            desc: desc.clone(),
            rank,
            matrix,
        }
    }

    pub fn identity(desc: &AlgebraDescriptor, rank: usize) -> Self {
        let size = desc.dim() * rank;
        Self::from_parts(desc, rank, DMatrix::identity(size, size))
    }

    pub fn scalar(desc: &AlgebraDescriptor, rank: usize, c: C64) -> Self {
        let size = desc.dim() * rank;
        Self::from_parts(
            desc,
            rank,
            CMatrix::from_diagonal_element(size, size, c),
        )
    }

    /// Block-diagonal operator `diag(a, …, a)`, i.e. `f_i ↦ f_i a`.
    pub fn block_diagonal(a: &AlgebraElement, rank: usize) -> Self {
        let desc = a.descriptor();
        let n = desc.dim();
        let mut m = CMatrix::zeros(n * rank, n * rank);
        let dense = a.to_dense();
        for i in 0..rank {
            m.view_mut((i * n, i * n), (n, n)).copy_from(&dense);
        }
        Self::from_parts(desc, rank, m)
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.desc
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(&self.desc, self.rank, self.matrix.adjoint())
    }

    /// `‖X‖`, which equals the operator norm on `U`.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    /// Smallest `k` with `⟨Tf, Tf⟩ ⪯ k⟨f, f⟩` for every `f`, namely `‖X‖²`.
    pub fn quadratic_bound(&self) -> f64 {
        self.norm().powi(2)
    }

    pub fn inverse(&self, cutoff: f64) -> Result<Self> {
        let sv = self.matrix.singular_values();
        let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let largest = sv.iter().copied().fold(0.0, f64::max);
        if smallest <= cutoff * largest || largest == 0.0 {
            return Err(FrameError::SingularElement {
                smallest,
                cutoff: cutoff * largest,
            });
        }
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(FrameError::SingularElement {
                smallest,
                cutoff: cutoff * largest,
            })?;
        Ok(Self::from_parts(&self.desc, self.rank, inv))
    }

    /// Reads a rank-1 operator as the algebra element it multiplies by.
    pub fn as_algebra_element(&self) -> Result<AlgebraElement> {
        if self.rank != 1 {
            return Err(FrameError::ConventionUnsupported(self.rank));
        }
        Ok(AlgebraElement::project(&self.desc, &self.matrix))
    }

    /// Positivity of `X` in the C*-order of `M_k(A)`.
    pub fn positivity(&self, tol: f64) -> OrderReport {
        psd_report(&self.matrix, tol)
    }

    /// `‖X − Y‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        spectral_norm(&(&self.matrix - &other.matrix))
    }

    pub fn distance_to_identity(&self) -> f64 {
        self.distance(&Self::identity(&self.desc, self.rank))
    }

    fn ensure_acts_on(&self, f: &ModuleElement) -> Result<()> {
        self.desc.ensure_same(f.descriptor())?;
        if self.rank != f.rank() {
            return Err(FrameError::ShapeMismatch(format!(
                "operator rank {} vs element rank {}",
                self.rank,
                f.rank()
            )));
        }
        Ok(())
    }

    fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        self.desc.ensure_same(&other.desc)?;
        if self.rank != other.rank {
            return Err(FrameError::ShapeMismatch(format!(
                "operator ranks differ: {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    /// Matrix product `X Y`; as operators this applies `X` first, then `Y`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self::from_parts(&self.desc, self.rank, &self.matrix * &other.matrix))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self::from_parts(&self.desc, self.rank, &self.matrix + &other.matrix))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(&self.desc, self.rank, &self.matrix * c)
    }

    /// `X^p` for `p ≥ 0`.
    pub fn power(&self, p: u32) -> Self {
        let mut out = Self::identity(&self.desc, self.rank);
        for _ in 0..p {
            out = Self::from_parts(&self.desc, self.rank, &out.matrix * &self.matrix);
        }
        out
    }
}

impl Mul for &ModuleOperator {
    type Output = ModuleOperator;
    fn mul(self, rhs: &ModuleOperator) -> ModuleOperator {
        self.try_mul(rhs).expect("operators of different shapes")
    }
}

pub(crate) fn apply_unchecked(t: &ModuleOperator, f: &ModuleElement) -> ModuleElement {
    let row = f.to_block_row() * &t.matrix;
    ModuleElement::project_row(&t.desc, t.rank, &row)
}

/// `T f`, computed as `f̂ X`.
pub fn apply_operator(t: &ModuleOperator, f: &ModuleElement) -> Result<ModuleElement> {
    t.ensure_acts_on(f)?;
    Ok(apply_unchecked(t, f))
}

/// Applies `T` from the chosen side; `Left` requires rank 1.
pub fn apply_sided(t: &ModuleOperator, f: &ModuleElement, side: Side) -> Result<ModuleElement> {
    match side {
        Side::Right => apply_operator(t, f),
        Side::Left => {
            t.ensure_acts_on(f)?;
            let a = t.as_algebra_element()?;
            left_act(&a, f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_module_element, random_operator, seeded};
    use approx::assert_relative_eq;

    fn m2() -> AlgebraDescriptor {
        AlgebraDescriptor::full(2).unwrap()
    }

    fn real(desc: &AlgebraDescriptor, rows: &[&[f64]]) -> AlgebraElement {
        AlgebraElement::from_real_rows(desc, rows).unwrap()
    }

    #[test]
    fn inner_examples() {
        let d = m2();
        let id = ModuleElement::single(AlgebraElement::identity(&d));
        assert_eq!(inner(&id, &id).unwrap(), AlgebraElement::identity(&d));
        let f = ModuleElement::single(real(&d, &[&[2.0, 1.0], &[1.0, 3.0]]));
        let expected = real(&d, &[&[5.0, 5.0], &[5.0, 10.0]]);
        assert!(inner(&f, &f).unwrap().distance(&expected) < 1e-14);
    }

    #[test]
    fn inner_rejects_rank_mismatch() {
        let d = m2();
        let f = ModuleElement::zero(&d, 1);
        let g = ModuleElement::zero(&d, 2);
        assert!(matches!(inner(&f, &g), Err(FrameError::ShapeMismatch(_))));
    }

    #[test]
    fn left_act_examples() {
        let d = m2();
        let mut rng = seeded(1);
        let f = random_module_element(&d, 2, &mut rng);
        assert_eq!(left_act(&AlgebraElement::identity(&d), &f).unwrap(), f);
        let doubled = left_act(&AlgebraElement::scalar(&d, C64::new(2.0, 0.0)), &f).unwrap();
        assert!((&doubled - &f.scale(C64::new(2.0, 0.0))).max_abs_entry() < 1e-15);

        let diag = AlgebraDescriptor::diagonal(2).unwrap();
        let f = ModuleElement::single(real(&diag, &[&[4.0, 0.0], &[0.0, 5.0]]));
        let p = real(&diag, &[&[1.0, 0.0], &[0.0, 0.0]]);
        let out = left_act(&p, &f).unwrap();
        assert_eq!(out.components()[0], real(&diag, &[&[4.0, 0.0], &[0.0, 0.0]]));
    }

    #[test]
    fn elem_norm_examples() {
        let d = m2();
        assert_relative_eq!(
            ModuleElement::single(AlgebraElement::identity(&d)).norm(),
            1.0,
            epsilon = 1e-15
        );
        let f = ModuleElement::single(real(&d, &[&[2.0, 1.0], &[1.0, 3.0]]));
        assert_relative_eq!(f.norm(), (5.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-13);
        assert_eq!(ModuleElement::zero(&d, 3).norm(), 0.0);
        // equals the largest singular value of the block row
        let mut rng = seeded(2);
        let g = random_module_element(&d, 3, &mut rng);
        assert_relative_eq!(g.norm(), spectral_norm(&g.to_block_row()), epsilon = 1e-12);
    }

    #[test]
    fn apply_operator_examples() {
        let d = m2();
        let f1 = ModuleElement::single(real(&d, &[&[2.0, 1.0], &[1.0, 3.0]]));
        let id = ModuleOperator::identity(&d, 1);
        assert_eq!(apply_operator(&id, &f1).unwrap(), f1);

        let q = ModuleOperator::block_diagonal(
            &real(&d, &[&[5.0 / 3.0, 5.0 / 3.0], &[5.0 / 3.0, 10.0 / 3.0]]),
            1,
        );
        let qinv = q.inverse(1e-12).unwrap();
        // F(ω)Q⁻¹ at ω = 1
        let out = apply_operator(&qinv, &f1).unwrap();
        let expected = real(&d, &[&[1.8, -0.6], &[-0.6, 1.2]]);
        assert!(out.components()[0].distance(&expected) < 1e-14);

        // left convention at ω = 1 with the dual G(1) = [[2.3, -0.1], [-0.1, 1.7]]
        let g1 = ModuleElement::single(real(&d, &[&[2.3, -0.1], &[-0.1, 1.7]]));
        let left = apply_sided(&q, &g1, Side::Left).unwrap();
        let expected = real(&d, &[&[7.0 - 10.0 / 3.0, 6.0 - 10.0 / 3.0], &[3.5, 5.5]]);
        assert!(left.components()[0].distance(&expected) < 1e-14);
    }

    #[test]
    fn left_side_needs_rank_one() {
        let d = m2();
        let t = ModuleOperator::identity(&d, 2);
        let f = ModuleElement::zero(&d, 2);
        assert_eq!(
            apply_sided(&t, &f, Side::Left),
            Err(FrameError::ConventionUnsupported(2))
        );
    }

    #[test]
    fn adjoint_examples() {
        let d = m2();
        let h = ModuleOperator::block_diagonal(&real(&d, &[&[1.0, 2.0], &[2.0, 5.0]]), 1);
        assert_eq!(h.adjoint(), h);
        let t = ModuleOperator::scalar(&d, 1, C64::new(0.0, 2.0));
        assert_eq!(t.adjoint(), ModuleOperator::scalar(&d, 1, C64::new(0.0, -2.0)));

        let mut rng = seeded(3);
        let t = random_operator(&d, 2, &mut rng);
        let ta = t.adjoint();
        for _ in 0..50 {
            let f = random_module_element(&d, 2, &mut rng);
            let g = random_module_element(&d, 2, &mut rng);
            let lhs = inner(&apply_operator(&t, &f).unwrap(), &g).unwrap();
            let rhs = inner(&f, &apply_operator(&ta, &g).unwrap()).unwrap();
            assert!(lhs.distance(&rhs) <= 1e-12 * (1.0 + lhs.op_norm()));
        }
    }

    #[test]
    fn quadratic_bound_examples() {
        let d = m2();
        assert_relative_eq!(ModuleOperator::identity(&d, 1).quadratic_bound(), 1.0, epsilon = 1e-14);
        let q = ModuleOperator::block_diagonal(
            &real(&d, &[&[5.0 / 3.0, 5.0 / 3.0], &[5.0 / 3.0, 10.0 / 3.0]]),
            1,
        );
        let top = (15.0 + 5.0 * 5f64.sqrt()) / 6.0;
        assert_relative_eq!(q.quadratic_bound(), top * top, epsilon = 1e-13);

        let mut rng = seeded(4);
        let t = random_operator(&d, 2, &mut rng);
        let k = t.quadratic_bound();
        for _ in 0..100 {
            let f = random_module_element(&d, 2, &mut rng);
            let tf = apply_operator(&t, &f).unwrap();
            let lhs = inner(&tf, &tf).unwrap();
            let rhs = inner(&f, &f).unwrap().scale_real(k);
            assert!(crate::algebra::order_leq(&lhs, &rhs, 1e-10).unwrap().holds);
        }
    }

    #[test]
    fn operator_pattern_is_enforced() {
        let d = AlgebraDescriptor::new(vec![1, 1]).unwrap();
        let mut m = CMatrix::identity(4, 4);
        assert!(ModuleOperator::new(&d, 2, m.clone()).is_ok());
        m[(0, 3)] = C64::new(1.0, 0.0);
        assert_eq!(
            ModuleOperator::new(&d, 2, m.clone()),
            Err(FrameError::BlockPatternViolation { row: 0, col: 3 })
        );
        m[(0, 3)] = C64::new(0.0, 0.0);
        m[(0, 2)] = C64::new(1.0, 0.0);
        assert!(ModuleOperator::new(&d, 2, m).is_ok());
    }
}
