//! Block-diagonal complex matrix C*-algebras `A = M_{n_1} ⊕ … ⊕ M_{n_m}`.
//!
//! Elements are stored block by block, so membership in the algebra is a
//! structural property rather than something checked by zero-testing a dense
//! matrix. Dense `n × n` views are produced on demand.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{FrameError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, PartialEq, Eq, Hash)]
struct DescriptorInner {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

/// Shape of the algebra: the ordered list of diagonal block sizes.
///
/// Cloning is cheap; all elements of one algebra share the same handle.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraDescriptor(Arc<DescriptorInner>);

impl AlgebraDescriptor {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(FrameError::InvalidDescriptor("no blocks".into()));
        }
        if blocks.contains(&0) {
            return Err(FrameError::InvalidDescriptor(format!(
                "zero-sized block in {blocks:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for &b in &blocks {
            offsets.push(dim);
            dim += b;
        }
        Ok(Self(Arc::new(DescriptorInner {
            blocks,
            offsets,
            dim,
        })))
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// The commutative algebra of `n × n` diagonal matrices.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0.blocks
    }

    pub fn offsets(&self) -> &[usize] {
        &self.0.offsets
    }

    /// Ambient matrix dimension `n = Σ n_j`.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Dimension of the algebra as a complex vector space, `Σ n_j²`.
    pub fn complex_dim(&self) -> usize {
        self.0.blocks.iter().map(|b| b * b).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.0.blocks.len()
    }

    /// Index of the block containing ambient row/column `i`.
    pub fn block_of(&self, i: usize) -> usize {
        match self.0.offsets.binary_search(&i) {
            Ok(j) => j,
            Err(j) => j - 1,
        }
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(FrameError::DescriptorMismatch {
                left: self.blocks().to_vec(),
                right: other.blocks().to_vec(),
            })
        }
    }

    /// Checks that a dense `n × n` matrix vanishes outside the diagonal blocks.
    pub fn check_pattern(&self, m: &CMatrix) -> Result<()> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(FrameError::ShapeMismatch(format!(
                "expected {n}x{n} matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for r in 0..n {
            let br = self.block_of(r);
            for c in 0..n {
                if self.block_of(c) != br && m[(r, c)] != ZERO {
                    return Err(FrameError::BlockPatternViolation { row: r, col: c });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraDescriptor{:?}", self.blocks())
    }
}

impl Serialize for AlgebraDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks().serialize(s)
    }
}

/// Result of an order comparison `a ⪯ b`, or of a positivity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub holds: bool,
    /// `b − a` passed the Hermitian test.
    pub hermitian: bool,
    /// Smallest eigenvalue of the Hermitian part of `b − a`.
    pub margin: f64,
    /// Eigenvector for `margin`, present when the comparison fails.
    #[serde(serialize_with = "crate::report::ser_opt_cvec")]
    pub witness: Option<Vec<C64>>,
}

/// Hermitian eigen-decomposition of a dense matrix, eigenvalues ascending.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value.
pub(crate) fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Positivity test on a dense matrix with slack `tol·(1 + ‖m‖)`.
pub(crate) fn psd_report(m: &CMatrix, tol: f64) -> OrderReport {
    let scale = 1.0 + spectral_norm(m);
    let skew = (m - m.adjoint()).scale(0.5);
    let hermitian = spectral_norm(&skew) <= tol * scale;
    let (values, vectors) = eigh(&hermitian_part(m));
    let margin = values.first().copied().unwrap_or(0.0);
    let holds = hermitian && margin >= -tol * scale;
    let witness = if holds || values.is_empty() {
        None
    } else {
        Some(vectors.column(0).iter().copied().collect())
    };
    OrderReport {
        holds,
        hermitian,
        margin,
        witness,
    }
}

/// An element of a block-diagonal matrix algebra.
#[derive(Clone, PartialEq)]
pub struct AlgebraElement {
    desc: AlgebraDescriptor,
    blocks: Vec<CMatrix>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement{:?}{}", self.desc.blocks(), self.to_dense())
    }
}

impl AlgebraElement {
    pub fn from_blocks(desc: &AlgebraDescriptor, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != desc.num_blocks() {
            return Err(FrameError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                desc.num_blocks(),
                blocks.len()
            )));
        }
        for (j, (b, &size)) in blocks.iter().zip(desc.blocks()).enumerate() {
            if b.nrows() != size || b.ncols() != size {
                return Err(FrameError::ShapeMismatch(format!(
                    "block {j} must be {size}x{size}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self {
            desc: desc.clone(),
            blocks,
        })
    }

    /// Builds an element from a dense matrix, rejecting off-block entries.
    pub fn from_dense(desc: &AlgebraDescriptor, m: &CMatrix) -> Result<Self> {
        desc.check_pattern(m)?;
        Ok(Self::project(desc, m))
    }

    /// Reads the diagonal blocks of `m`, ignoring everything else.
    pub(crate) fn project(desc: &AlgebraDescriptor, m: &CMatrix) -> Self {
        let blocks = desc
            .blocks()
            .iter()
            .zip(desc.offsets())
            .map(|(&size, &off)| m.view((off, off), (size, size)).into_owned())
            .collect();
        Self {
            desc: desc.clone(),
            blocks,
        }
    }

    /// Convenience constructor from real row-major entries of a dense matrix.
    pub fn from_real_rows(desc: &AlgebraDescriptor, rows: &[&[f64]]) -> Result<Self> {
        let n = desc.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(FrameError::ShapeMismatch(format!("expected {n}x{n} rows")));
        }
        let m = CMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c], 0.0));
        Self::from_dense(desc, &m)
    }

    pub fn zero(desc: &AlgebraDescriptor) -> Self {
        let blocks = desc.blocks().iter().map(|&b| CMatrix::zeros(b, b)).collect();
        Self {
            desc: desc.clone(),
            blocks,
        }
    }

    pub fn identity(desc: &AlgebraDescriptor) -> Self {
        Self::scalar(desc, ONE)
    }

    pub fn scalar(desc: &AlgebraDescriptor, c: C64) -> Self {
        let blocks = desc
            .blocks()
            .iter()
            .map(|&b| CMatrix::from_diagonal_element(b, b, c))
            .collect();
        Self {
            desc: desc.clone(),
            blocks,
        }
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.desc
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.desc.dim();
        let mut m = CMatrix::zeros(n, n);
        for (b, &off) in self.blocks.iter().zip(self.desc.offsets()) {
            m.view_mut((off, off), b.shape()).copy_from(b);
        }
        m
    }

    /// Entry of the dense matrix at `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let j = self.desc.block_of(row);
        if self.desc.block_of(col) != j {
            return ZERO;
        }
        let off = self.desc.offsets()[j];
        self.blocks[j][(row - off, col - off)]
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|b| b * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|b| b.scale(c))
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            desc: self.desc.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        assert_eq!(
            self.desc, other.desc,
            "algebra elements from different algebras"
        );
        Self {
            desc: self.desc.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Product, with a descriptor check instead of a panic.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.desc.ensure_same(&other.desc)?;
        Ok(self * other)
    }

    /// C*-norm, the largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Frobenius norm, used for entrywise comparisons.
    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = 1.0 + self.op_norm();
        self.blocks
            .iter()
            .all(|b| spectral_norm(&(b - b.adjoint())) * 0.5 <= tol * scale)
    }

    /// All eigenvalues in ascending order.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        if !self.is_hermitian(tol) {
            let skew = self
                .blocks
                .iter()
                .map(|b| spectral_norm(&(b - b.adjoint())) * 0.5)
                .fold(0.0, f64::max);
            return Err(FrameError::NotHermitian { skew });
        }
        let mut all: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| eigh(&hermitian_part(b)).0)
            .collect();
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Positivity of `self` in the C*-order, evaluated block by block.
    pub fn positivity(&self, tol: f64) -> OrderReport {
        let scale = 1.0 + self.op_norm();
        let mut hermitian = true;
        let mut best: Option<(f64, usize, CVector)> = None;
        for (j, b) in self.blocks.iter().enumerate() {
            let skew = spectral_norm(&(b - b.adjoint())) * 0.5;
            hermitian &= skew <= tol * scale;
            let (values, vectors) = eigh(&hermitian_part(b));
            if best.as_ref().is_none_or(|(m, _, _)| values[0] < *m) {
                best = Some((values[0], j, vectors.column(0).into_owned()));
            }
        }
        let (margin, j, v) = best.expect("descriptor has at least one block");
        let holds = hermitian && margin >= -tol * scale;
        let witness = (!holds).then(|| {
            let mut w = vec![ZERO; self.desc.dim()];
            let off = self.desc.offsets()[j];
            for (i, z) in v.iter().enumerate() {
                w[off + i] = *z;
            }
            w
        });
        OrderReport {
            holds,
            hermitian,
            margin,
            witness,
        }
    }

    /// Inverse, failing when the smallest singular value is at most
    /// `cutoff·‖a‖`.
    pub fn inverse(&self, cutoff: f64) -> Result<Self> {
        let norm = self.op_norm();
        let mut out = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let smallest = b
                .singular_values()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if smallest <= cutoff * norm || norm == 0.0 {
                return Err(FrameError::SingularElement {
                    smallest,
                    cutoff: cutoff * norm,
                });
            }
            let inv = b
                .clone()
                .try_inverse()
                .ok_or(FrameError::SingularElement {
                    smallest,
                    cutoff: cutoff * norm,
                })?;
            out.push(inv);
        }
        Ok(Self {
            desc: self.desc.clone(),
            blocks: out,
        })
    }

    /// Membership in the center: every block is a multiple of its identity.
    pub fn is_central(&self) -> bool {
        let tol = 1e-12 * self.op_norm().max(1.0);
        self.blocks.iter().all(|b| {
            let d = b[(0, 0)];
            (0..b.nrows()).all(|r| {
                (0..b.ncols()).all(|c| {
                    let target = if r == c { d } else { ZERO };
                    (b[(r, c)] - target).norm() <= tol
                })
            })
        })
    }

    /// `‖self − other‖` in operator norm.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).op_norm()
    }
}

/// `a ⪯ b` in the C*-order with slack `tol·(1 + ‖b − a‖)`.
pub fn order_leq(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> Result<OrderReport> {
    a.desc.ensure_same(&b.desc)?;
    Ok((b - a).positivity(tol))
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.map_blocks(|b| -b)
    }
}
