//! Seeded random generators for algebra elements, module elements,
//! operators and polynomial maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraDescriptor, AlgebraElement, CMatrix, C64};
use crate::map::FrameMap;
use crate::module::{ModuleElement, ModuleOperator};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_element<R: Rng>(desc: &AlgebraDescriptor, rng: &mut R) -> AlgebraElement {
    let blocks = desc
        .blocks()
        .iter()
        .map(|&b| random_matrix(b, b, rng))
        .collect();
    AlgebraElement::from_blocks(desc, blocks).expect("block shapes follow the descriptor")
}

pub fn random_hermitian<R: Rng>(desc: &AlgebraDescriptor, rng: &mut R) -> AlgebraElement {
    let x = random_element(desc, rng);
    (&x + &x.adjoint()).scale_real(0.5)
}

/// Random unitary, from the QR factor of a random matrix in each block.
pub fn random_unitary<R: Rng>(desc: &AlgebraDescriptor, rng: &mut R) -> AlgebraElement {
    let blocks = desc
        .blocks()
        .iter()
        .map(|&b| random_matrix(b, b, rng).qr().q())
        .collect();
    AlgebraElement::from_blocks(desc, blocks).expect("block shapes follow the descriptor")
}

/// Random central element: a random scalar on each block.
pub fn random_central<R: Rng>(desc: &AlgebraDescriptor, rng: &mut R) -> AlgebraElement {
    let blocks = desc
        .blocks()
        .iter()
        .map(|&b| CMatrix::from_diagonal_element(b, b, random_complex(rng)))
        .collect();
    AlgebraElement::from_blocks(desc, blocks).expect("block shapes follow the descriptor")
}

pub fn random_module_element<R: Rng>(
    desc: &AlgebraDescriptor,
    rank: usize,
    rng: &mut R,
) -> ModuleElement {
    ModuleElement::new((0..rank).map(|_| random_element(desc, rng)).collect())
        .expect("components share one descriptor")
}

/// Random element scaled to norm one (or zero if the draw vanished).
pub fn random_unit_element<R: Rng>(
    desc: &AlgebraDescriptor,
    rank: usize,
    rng: &mut R,
) -> ModuleElement {
    let f = random_module_element(desc, rank, rng);
    let norm = f.norm();
    if norm > 0.0 {
        f.scale(C64::new(1.0 / norm, 0.0))
    } else {
        f
    }
}

/// Random operator whose `n × n` blocks are random algebra elements.
pub fn random_operator<R: Rng>(desc: &AlgebraDescriptor, rank: usize, rng: &mut R) -> ModuleOperator {
    let n = desc.dim();
    let mut m = CMatrix::zeros(n * rank, n * rank);
    for bi in 0..rank {
        for bj in 0..rank {
            let block = random_element(desc, rng).to_dense();
            m.view_mut((bi * n, bj * n), (n, n)).copy_from(&block);
        }
    }
    ModuleOperator::new(desc, rank, m).expect("blocks lie in the algebra")
}

/// Random operator shifted towards the identity so that it is comfortably
/// invertible.
pub fn random_invertible_operator<R: Rng>(
    desc: &AlgebraDescriptor,
    rank: usize,
    rng: &mut R,
) -> ModuleOperator {
    let size = (desc.dim() * rank) as f64;
    let t = random_operator(desc, rank, rng);
    t.try_add(&ModuleOperator::scalar(desc, rank, C64::new(2.0 * size, 0.0)))
        .expect("same shape")
}

/// Random polynomial map of the given degree.
pub fn random_polynomial_map<R: Rng>(
    desc: &AlgebraDescriptor,
    rank: usize,
    degree: usize,
    rng: &mut R,
) -> FrameMap {
    let coeffs = (0..=degree)
        .map(|_| random_module_element(desc, rank, rng))
        .collect();
    FrameMap::polynomial(coeffs).expect("coefficients share one shape")
}
