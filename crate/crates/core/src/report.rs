//! JSON-friendly views of matrices and map coefficients.
//!
//! Complex numbers are written as `[re, im]` pairs and matrices as row-major
//! arrays of rows; algebra elements are written block by block.

use serde::{Serialize, Serializer};

use crate::algebra::{AlgebraElement, CMatrix, C64};
use crate::map::{FrameMap, MapRepr};
use crate::module::ModuleElement;

pub type Pair = [f64; 2];

pub fn pair(c: C64) -> Pair {
    [c.re, c.im]
}

pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
        .collect()
}

pub fn element_blocks(a: &AlgebraElement) -> Vec<Vec<Vec<Pair>>> {
    a.blocks().iter().map(matrix_rows).collect()
}

pub fn module_element(f: &ModuleElement) -> Vec<Vec<Vec<Vec<Pair>>>> {
    f.components().iter().map(element_blocks).collect()
}

/// Coefficient dump of a map: polynomial coefficients by degree, or samples by
/// node.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapDump {
    Polynomial(Vec<Vec<Vec<Vec<Vec<Pair>>>>>),
    Tabulated {
        nodes: Vec<f64>,
        samples: Vec<Vec<Vec<Vec<Vec<Pair>>>>>,
    },
}

pub fn map_dump(map: &FrameMap) -> MapDump {
    match map.repr() {
        MapRepr::Polynomial(coeffs) => MapDump::Polynomial(coeffs.iter().map(module_element).collect()),
        MapRepr::Tabulated { rule, samples } => MapDump::Tabulated {
            nodes: rule.nodes().to_vec(),
            samples: samples.iter().map(module_element).collect(),
        },
    }
}

pub(crate) fn ser_opt_cvec<S: Serializer>(
    v: &Option<Vec<C64>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    v.as_ref()
        .map(|v| v.iter().copied().map(pair).collect::<Vec<_>>())
        .serialize(s)
}
