//! Maps `F: Ω → U`, either polynomial in `ω` with module-element
//! coefficients or tabulated at the nodes of a quadrature rule.

use crate::algebra::{AlgebraDescriptor, AlgebraElement, CMatrix, C64};
use crate::error::{FrameError, Result};
use crate::measure::{MeasureSpace, QuadratureRule};
use crate::module::{self, ModuleElement, ModuleOperator, Side};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub enum MapRepr {
    /// `F(ω) = Σ_j ω^j C_j`, constant coefficient first.
    Polynomial(Vec<ModuleElement>),
    /// `F(ω_q)` at each node of `rule`.
    Tabulated {
        rule: QuadratureRule,
        samples: Vec<ModuleElement>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMap {
    desc: AlgebraDescriptor,
    rank: usize,
    repr: MapRepr,
}

/// Pointwise transformations accepted by [`FrameMap::transform`].
#[derive(Debug, Clone, Copy)]
pub enum MapAction<'a> {
    /// `ω ↦ a·F(ω)`.
    ScaleByAlgebra(&'a AlgebraElement),
    /// `ω ↦ T F(ω)` from the given side.
    ApplyOperator(&'a ModuleOperator, Side),
    /// `ω ↦ F(ω) + G(ω)`.
    Add(&'a FrameMap),
    /// `ω ↦ λ F(ω)`.
    Scalar(C64),
}

fn ensure_same_shape(coeffs: &[ModuleElement]) -> Result<(AlgebraDescriptor, usize)> {
    let first = coeffs
        .first()
        .ok_or_else(|| FrameError::ShapeMismatch("map needs at least one coefficient".into()))?;
    for c in &coeffs[1..] {
        first.descriptor().ensure_same(c.descriptor())?;
        if c.rank() != first.rank() {
            return Err(FrameError::ShapeMismatch(format!(
                "coefficient ranks differ: {} vs {}",
                first.rank(),
                c.rank()
            )));
        }
    }
    Ok((first.descriptor().clone(), first.rank()))
}

impl FrameMap {
    pub fn polynomial(coeffs: Vec<ModuleElement>) -> Result<Self> {
        let (desc, rank) = ensure_same_shape(&coeffs)?;
        Ok(Self {
            desc,
            rank,
            repr: MapRepr::Polynomial(coeffs),
        })
    }

    pub fn tabulated(rule: &QuadratureRule, samples: Vec<ModuleElement>) -> Result<Self> {
        if samples.len() != rule.len() {
            return Err(FrameError::RuleMismatch(format!(
                "{} samples for {} nodes",
                samples.len(),
                rule.len()
            )));
        }
        let (desc, rank) = ensure_same_shape(&samples)?;
        Ok(Self {
            desc,
            rank,
            repr: MapRepr::Tabulated {
                rule: rule.clone(),
                samples,
            },
        })
    }

    /// Constant map `ω ↦ f`.
    pub fn constant(f: ModuleElement) -> Self {
        Self {
            desc: f.descriptor().clone(),
            rank: f.rank(),
            repr: MapRepr::Polynomial(vec![f]),
        }
    }

    pub fn zero(desc: &AlgebraDescriptor, rank: usize) -> Self {
        Self::constant(ModuleElement::zero(desc, rank))
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.desc
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn repr(&self) -> &MapRepr {
        &self.repr
    }

    /// Number of polynomial coefficients minus one; `None` when tabulated.
    pub fn degree(&self) -> Option<usize> {
        match &self.repr {
            MapRepr::Polynomial(c) => Some(c.len() - 1),
            MapRepr::Tabulated { .. } => None,
        }
    }

    pub fn coefficients(&self) -> Option<&[ModuleElement]> {
        match &self.repr {
            MapRepr::Polynomial(c) => Some(c),
            MapRepr::Tabulated { .. } => None,
        }
    }

    pub fn rule(&self) -> Option<&QuadratureRule> {
        match &self.repr {
            MapRepr::Polynomial(_) => None,
            MapRepr::Tabulated { rule, .. } => Some(rule),
        }
    }

    /// `F(ω)`. Tabulated maps only answer at their own nodes.
    pub fn eval(&self, omega: f64) -> Result<ModuleElement> {
        match &self.repr {
            MapRepr::Polynomial(coeffs) => Ok(horner(coeffs, omega)),
            MapRepr::Tabulated { rule, samples } => rule
                .node_index(omega)
                .map(|q| samples[q].clone())
                .ok_or(FrameError::OffNodeEvaluation(omega)),
        }
    }

    /// Values at every node of `rule`.
    pub fn samples_on(&self, rule: &QuadratureRule) -> Result<Vec<ModuleElement>> {
        match &self.repr {
            MapRepr::Polynomial(coeffs) => {
                let nodes = rule.nodes();
                Ok(par::map_indexed(nodes.len(), |q| horner(coeffs, nodes[q])))
            }
            MapRepr::Tabulated { rule: own, samples } => {
                own.ensure_same(rule)?;
                Ok(samples.clone())
            }
        }
    }

    /// Block rows `F̂(ω_q)` at every node of `rule`.
    pub fn block_rows_on(&self, rule: &QuadratureRule) -> Result<Vec<CMatrix>> {
        let samples = self.samples_on(rule)?;
        Ok(par::map_indexed(samples.len(), |q| samples[q].to_block_row()))
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.desc.ensure_same(&other.desc)?;
        if self.rank != other.rank {
            return Err(FrameError::ShapeMismatch(format!(
                "map ranks differ: {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    fn map_values(&self, f: impl Fn(&ModuleElement) -> Result<ModuleElement>) -> Result<Self> {
        let repr = match &self.repr {
            MapRepr::Polynomial(c) => {
                MapRepr::Polynomial(c.iter().map(&f).collect::<Result<_>>()?)
            }
            MapRepr::Tabulated { rule, samples } => MapRepr::Tabulated {
                rule: rule.clone(),
                samples: samples.iter().map(&f).collect::<Result<_>>()?,
            },
        };
        Ok(Self {
            desc: self.desc.clone(),
            rank: self.rank,
            repr,
        })
    }

    /// Applies a pointwise action. Polynomial maps stay polynomial; adding a
    /// polynomial to a tabulated map tabulates the sum on the shared rule.
    pub fn transform(&self, action: MapAction<'_>) -> Result<Self> {
        match action {
            MapAction::ScaleByAlgebra(a) => self.map_values(|c| module::left_act(a, c)),
            MapAction::ApplyOperator(t, side) => {
                self.map_values(|c| module::apply_sided(t, c, side))
            }
            MapAction::Scalar(s) => self.map_values(|c| Ok(c.scale(s))),
            MapAction::Add(other) => self.add_map(other),
        }
    }

    fn add_map(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let repr = match (&self.repr, &other.repr) {
            (MapRepr::Polynomial(a), MapRepr::Polynomial(b)) => {
                let len = a.len().max(b.len());
                let zero = ModuleElement::zero(&self.desc, self.rank);
                let coeffs = (0..len)
                    .map(|j| a.get(j).unwrap_or(&zero) + b.get(j).unwrap_or(&zero))
                    .collect();
                MapRepr::Polynomial(coeffs)
            }
            (MapRepr::Tabulated { rule, samples }, _) => {
                let theirs = other.samples_on(rule)?;
                MapRepr::Tabulated {
                    rule: rule.clone(),
                    samples: samples.iter().zip(&theirs).map(|(x, y)| x + y).collect(),
                }
            }
            (MapRepr::Polynomial(_), MapRepr::Tabulated { rule, samples }) => {
                let ours = self.samples_on(rule)?;
                MapRepr::Tabulated {
                    rule: rule.clone(),
                    samples: ours.iter().zip(samples).map(|(x, y)| x + y).collect(),
                }
            }
        };
        Ok(Self {
            desc: self.desc.clone(),
            rank: self.rank,
            repr,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.transform(MapAction::Add(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.transform(MapAction::Scalar(s))
            .expect("scalar multiples never fail")
    }

    pub fn left_scale(&self, a: &AlgebraElement) -> Result<Self> {
        self.transform(MapAction::ScaleByAlgebra(a))
    }

    pub fn apply(&self, t: &ModuleOperator, side: Side) -> Result<Self> {
        self.transform(MapAction::ApplyOperator(t, side))
    }

    /// Largest entry modulus over coefficients (or samples).
    pub fn max_abs_coefficient(&self) -> f64 {
        let values = match &self.repr {
            MapRepr::Polynomial(c) => c,
            MapRepr::Tabulated { samples, .. } => samples,
        };
        values
            .iter()
            .map(ModuleElement::max_abs_entry)
            .fold(0.0, f64::max)
    }

    /// Entrywise distance between two maps of the same representation:
    /// coefficientwise for polynomials (padding with zeros), samplewise
    /// otherwise.
    pub fn coefficient_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_coefficient())
    }
}

fn horner(coeffs: &[ModuleElement], omega: f64) -> ModuleElement {
    let x = C64::new(omega, 0.0);
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = &acc.scale(x) + c;
    }
    acc
}

/// Largest polynomial degree among `maps`; tabulated maps count as zero.
pub fn max_degree(maps: &[&FrameMap]) -> usize {
    maps.iter().filter_map(|m| m.degree()).max().unwrap_or(0)
}

/// Rule for a set of maps: the shared tabulation rule if any map is
/// tabulated, otherwise one exact for degree `2·d + 2`, `d` the largest
/// polynomial degree.
pub fn default_rule(space: &MeasureSpace, maps: &[&FrameMap]) -> Result<QuadratureRule> {
    let mut tabulated = maps.iter().filter_map(|m| m.rule());
    if let Some(rule) = tabulated.next() {
        for other in tabulated {
            rule.ensure_same(other)?;
        }
        return Ok(rule.clone());
    }
    crate::measure::build_rule(space, 2 * max_degree(maps) + 2)
}
