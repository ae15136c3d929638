//! Problem files: one algebra, one module rank, one measure, and named maps,
//! operators, scalars and algebra elements.
//!
//! ```json
//! {
//!   "algebra": {"blocks": [2]},
//!   "rank": 1,
//!   "measure": {"type": "interval", "a": 0, "b": 1, "weight": [1]},
//!   "quadrature_degree": 6,
//!   "maps": {"F": {"polynomial": [C0, C1]}, "T": {"tabulated": [S0, S1]}},
//!   "operators": {"X": {"matrix": ROWS}, "Y": {"scalar": [2, 0]}, "Z": {"file": "z.json"}},
//!   "scalars": {"alpha": [2, 0]},
//!   "elements": {"a": {"dense": ROWS}, "b": [BLOCK, BLOCK]}
//! }
//! ```
//!
//! Complex numbers are `[re, im]`; matrices are row-major arrays of rows. A
//! module element is an array of `rank` algebra elements, and an algebra
//! element is either an array of its diagonal blocks or `{"dense": ROWS}`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cframe::map::max_degree;
use cframe::{
    build_rule, AlgebraDescriptor, AlgebraElement, CMatrix, FrameError, FrameMap, MeasureSpace,
    ModuleElement, ModuleOperator, QuadratureRule, C64,
};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Problem {
    pub space: MeasureSpace,
    pub quadrature_degree: Option<usize>,
    /// Nodes shared by tabulated maps.
    pub table_rule: Option<QuadratureRule>,
    maps: BTreeMap<String, FrameMap>,
    operators: BTreeMap<String, ModuleOperator>,
    scalars: BTreeMap<String, C64>,
    elements: BTreeMap<String, AlgebraElement>,
}

const TOP_LEVEL: [&str; 8] = [
    "algebra",
    "rank",
    "measure",
    "quadrature_degree",
    "maps",
    "operators",
    "scalars",
    "elements",
];

fn parse_json(text: &str, origin: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

// serde_json appends the position to its message; it is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn object<'a>(v: &'a Value, field: &str) -> CliResult<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| CliError::schema(field, "expected an object"))
}

fn array<'a>(v: &'a Value, field: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| CliError::schema(field, "expected an array"))
}

fn number(v: &Value, field: &str) -> CliResult<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::schema(field, "expected a finite number"))
}

fn count(v: &Value, field: &str) -> CliResult<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| CliError::schema(field, "expected a non-negative integer"))
}

fn numbers(v: &Value, field: &str) -> CliResult<Vec<f64>> {
    array(v, field)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{field}[{i}]")))
        .collect()
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], field: &str) -> CliResult<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(CliError::schema(
            format!("{field}.{k}"),
            format!("unknown key (expected one of {})", allowed.join(", ")),
        )),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, field: &str) -> CliResult<&'a Value> {
    obj.get(key)
        .ok_or_else(|| CliError::schema(format!("{field}.{key}"), "missing"))
}

/// Exactly one key out of `keys`, returned with its value.
fn one_of<'a>(v: &'a Value, keys: &[&str], field: &str) -> CliResult<(&'a str, &'a Value)> {
    let obj = object(v, field)?;
    only_keys(obj, keys, field)?;
    let mut present = obj.iter().filter(|(k, _)| keys.contains(&k.as_str()));
    match (present.next(), present.next()) {
        (Some((k, v)), None) => Ok((k.as_str(), v)),
        _ => Err(CliError::schema(
            field,
            format!("expected exactly one of {}", keys.join(", ")),
        )),
    }
}

pub fn complex(v: &Value, field: &str) -> CliResult<C64> {
    let parts = array(v, field)?;
    if parts.len() != 2 {
        return Err(CliError::schema(field, "complex numbers are [re, im] pairs"));
    }
    Ok(C64::new(
        number(&parts[0], &format!("{field}[0]"))?,
        number(&parts[1], &format!("{field}[1]"))?,
    ))
}

fn matrix(v: &Value, field: &str) -> CliResult<CMatrix> {
    let rows = array(v, field)?;
    let width = match rows.first() {
        Some(r) => array(r, &format!("{field}[0]"))?.len(),
        None => 0,
    };
    let mut m = CMatrix::zeros(rows.len(), width);
    for (r, row) in rows.iter().enumerate() {
        let path = format!("{field}[{r}]");
        let row = array(row, &path)?;
        if row.len() != width {
            return Err(CliError::schema(path, format!("row has {} entries, expected {width}", row.len())));
        }
        for (c, x) in row.iter().enumerate() {
            m[(r, c)] = complex(x, &format!("{field}[{r}][{c}]"))?;
        }
    }
    Ok(m)
}

fn pattern(field: &str) -> impl FnOnce(FrameError) -> CliError + '_ {
    move |e| match e {
        FrameError::BlockPatternViolation { .. } => CliError::BlockPattern {
            field: field.to_string(),
            source: e,
        },
        other => CliError::schema(field, other.to_string()),
    }
}

pub fn algebra_element(desc: &AlgebraDescriptor, v: &Value, field: &str) -> CliResult<AlgebraElement> {
    if v.is_object() {
        let (_, rows) = one_of(v, &["dense"], field)?;
        let path = format!("{field}.dense");
        let m = matrix(rows, &path)?;
        if m.nrows() != desc.dim() || m.ncols() != desc.dim() {
            return Err(CliError::schema(
                path,
                format!("expected a {0}x{0} matrix", desc.dim()),
            ));
        }
        return AlgebraElement::from_dense(desc, &m).map_err(pattern(&path));
    }
    let blocks = array(v, field)?;
    if blocks.len() != desc.num_blocks() {
        return Err(CliError::schema(
            field,
            format!("expected {} blocks, got {}", desc.num_blocks(), blocks.len()),
        ));
    }
    let mats = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| matrix(b, &format!("{field}[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    AlgebraElement::from_blocks(desc, mats).map_err(|e| CliError::schema(field, e.to_string()))
}

fn module_element(desc: &AlgebraDescriptor, rank: usize, v: &Value, field: &str) -> CliResult<ModuleElement> {
    let comps = array(v, field)?;
    if comps.len() != rank {
        return Err(CliError::schema(
            field,
            format!("expected {rank} components, got {}", comps.len()),
        ));
    }
    let comps = comps
        .iter()
        .enumerate()
        .map(|(i, c)| algebra_element(desc, c, &format!("{field}[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ModuleElement::new(comps)?)
}

fn module_elements(desc: &AlgebraDescriptor, rank: usize, v: &Value, field: &str) -> CliResult<Vec<ModuleElement>> {
    array(v, field)?
        .iter()
        .enumerate()
        .map(|(i, c)| module_element(desc, rank, c, &format!("{field}[{i}]")))
        .collect()
}

fn measure(v: &Value, field: &str) -> CliResult<MeasureSpace> {
    let obj = object(v, field)?;
    let kind = required(obj, "type", field)?
        .as_str()
        .ok_or_else(|| CliError::schema(format!("{field}.type"), "expected a string"))?;
    let space = match kind {
        "interval" => {
            only_keys(obj, &["type", "a", "b", "weight"], field)?;
            let weight = match obj.get("weight") {
                Some(w) => numbers(w, &format!("{field}.weight"))?,
                None => vec![1.0],
            };
            MeasureSpace::Interval {
                a: number(required(obj, "a", field)?, &format!("{field}.a"))?,
                b: number(required(obj, "b", field)?, &format!("{field}.b"))?,
                weight,
            }
        }
        "discrete" => {
            only_keys(obj, &["type", "points", "masses"], field)?;
            MeasureSpace::Discrete {
                points: numbers(required(obj, "points", field)?, &format!("{field}.points"))?,
                masses: numbers(required(obj, "masses", field)?, &format!("{field}.masses"))?,
            }
        }
        other => {
            return Err(CliError::schema(
                format!("{field}.type"),
                format!("unknown measure type '{other}' (expected interval or discrete)"),
            ))
        }
    };
    space
        .validate()
        .map_err(|e| CliError::schema(field, e.to_string()))?;
    Ok(space)
}

fn operator(
    desc: &AlgebraDescriptor,
    rank: usize,
    v: &Value,
    field: &str,
    base: Option<&Path>,
) -> CliResult<ModuleOperator> {
    let (kind, body) = one_of(v, &["matrix", "scalar", "file"], field)?;
    let path = format!("{field}.{kind}");
    match kind {
        "scalar" => Ok(ModuleOperator::scalar(desc, rank, complex(body, &path)?)),
        "matrix" => {
            let m = matrix(body, &path)?;
            let size = desc.dim() * rank;
            if m.nrows() != size || m.ncols() != size {
                return Err(CliError::schema(path, format!("expected a {size}x{size} matrix")));
            }
            ModuleOperator::new(desc, rank, m).map_err(pattern(&path))
        }
        _ => {
            let name = body
                .as_str()
                .ok_or_else(|| CliError::schema(&path, "expected a file path"))?;
            let file = match base {
                Some(dir) => dir.join(name),
                None => PathBuf::from(name),
            };
            let text = std::fs::read_to_string(&file).map_err(|source| CliError::Io {
                path: file.display().to_string(),
                source,
            })?;
            let origin = file.display().to_string();
            let inner = parse_json(&text, &origin)?;
            let inner = if inner.is_array() {
                serde_json::json!({ "matrix": inner })
            } else {
                inner
            };
            if inner.get("file").is_some() {
                return Err(CliError::schema(origin, "operator files cannot refer to further files"));
            }
            operator(desc, rank, &inner, &origin, None)
        }
    }
}

impl Problem {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string(), path.parent())
    }

    pub fn parse(text: &str, origin: &str, base: Option<&Path>) -> CliResult<Self> {
        let root = parse_json(text, origin)?;
        let top = object(&root, "$")?;
        only_keys(top, &TOP_LEVEL, "$")?;

        let algebra = object(required(top, "algebra", "$")?, "$.algebra")?;
        only_keys(algebra, &["blocks"], "$.algebra")?;
        let blocks = array(required(algebra, "blocks", "$.algebra")?, "$.algebra.blocks")?
            .iter()
            .enumerate()
            .map(|(i, b)| count(b, &format!("$.algebra.blocks[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        let desc = AlgebraDescriptor::new(blocks).map_err(|e| CliError::schema("$.algebra.blocks", e.to_string()))?;
        let rank = count(required(top, "rank", "$")?, "$.rank")?;
        if rank == 0 {
            return Err(CliError::schema("$.rank", "rank must be positive"));
        }
        let space = measure(required(top, "measure", "$")?, "$.measure")?;
        let quadrature_degree = top
            .get("quadrature_degree")
            .map(|v| count(v, "$.quadrature_degree"))
            .transpose()?;

        let section = |key: &str| -> CliResult<Vec<(String, Value)>> {
            match top.get(key) {
                None => Ok(Vec::new()),
                Some(v) => Ok(object(v, &format!("$.{key}"))?
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect()),
            }
        };

        let map_entries = section("maps")?;
        let has_tabulated = map_entries
            .iter()
            .any(|(_, v)| v.get("tabulated").is_some());
        let table_rule = match (&space, quadrature_degree) {
            (MeasureSpace::Discrete { .. }, _) => Some(build_rule(&space, 0)?),
            (_, Some(d)) => Some(build_rule(&space, d)?),
            (_, None) if has_tabulated => {
                return Err(CliError::schema(
                    "$.quadrature_degree",
                    "tabulated maps on an interval need quadrature_degree to fix their nodes",
                ))
            }
            _ => None,
        };

        let mut maps = BTreeMap::new();
        for (name, v) in &map_entries {
            let field = format!("$.maps.{name}");
            let (kind, body) = one_of(v, &["polynomial", "tabulated"], &field)?;
            let path = format!("{field}.{kind}");
            let values = module_elements(&desc, rank, body, &path)?;
            let map = if kind == "polynomial" {
                if values.is_empty() {
                    return Err(CliError::schema(path, "needs at least one coefficient"));
                }
                FrameMap::polynomial(values)?
            } else {
                let rule = table_rule.as_ref().expect("checked above");
                if values.len() != rule.len() {
                    return Err(CliError::schema(
                        path,
                        format!("{} samples for {} quadrature nodes", values.len(), rule.len()),
                    ));
                }
                FrameMap::tabulated(rule, values)?
            };
            maps.insert(name.clone(), map);
        }
        if let (Some(d), false) = (quadrature_degree, space.is_discrete()) {
            let polys: Vec<&FrameMap> = maps.values().collect();
            let needed = 2 * max_degree(&polys);
            if d < needed {
                return Err(CliError::schema(
                    "$.quadrature_degree",
                    format!("{d} is below {needed}, the degree of the Gram integrands"),
                ));
            }
        }

        let mut operators = BTreeMap::new();
        for (name, v) in section("operators")? {
            let op = operator(&desc, rank, &v, &format!("$.operators.{name}"), base)?;
            operators.insert(name, op);
        }
        let mut scalars = BTreeMap::new();
        for (name, v) in section("scalars")? {
            scalars.insert(name.clone(), complex(&v, &format!("$.scalars.{name}"))?);
        }
        let mut elements = BTreeMap::new();
        for (name, v) in section("elements")? {
            let a = algebra_element(&desc, &v, &format!("$.elements.{name}"))?;
            elements.insert(name, a);
        }

        Ok(Self {
            space,
            quadrature_degree,
            table_rule,
            maps,
            operators,
            scalars,
            elements,
        })
    }

    pub fn map(&self, name: &str) -> CliResult<&FrameMap> {
        self.maps.get(name).ok_or_else(|| CliError::NamedObjectMissing {
            kind: "map",
            name: name.to_string(),
        })
    }

    pub fn operator(&self, name: &str) -> CliResult<&ModuleOperator> {
        self.operators.get(name).ok_or_else(|| CliError::NamedObjectMissing {
            kind: "operator",
            name: name.to_string(),
        })
    }

    pub fn scalar(&self, name: &str) -> CliResult<C64> {
        self.scalars.get(name).copied().ok_or_else(|| CliError::NamedObjectMissing {
            kind: "scalar",
            name: name.to_string(),
        })
    }

    pub fn element(&self, name: &str) -> CliResult<&AlgebraElement> {
        self.elements.get(name).ok_or_else(|| CliError::NamedObjectMissing {
            kind: "element",
            name: name.to_string(),
        })
    }

    /// Rule for integrals involving `maps` and constructed maps of degree up
    /// to `extra_degree`: the tabulation nodes when a tabulated map is
    /// involved or the measure is discrete, otherwise Gauss nodes exact for
    /// `2·d + 2` (raised to `quadrature_degree` when that is larger).
    pub fn rule_for(&self, maps: &[&FrameMap], extra_degree: usize) -> CliResult<QuadratureRule> {
        if let Some(rule) = &self.table_rule {
            if self.space.is_discrete() || maps.iter().any(|m| m.rule().is_some()) {
                return Ok(rule.clone());
            }
        }
        let d = max_degree(maps).max(extra_degree);
        let target = (2 * d + 2).max(self.quadrature_degree.unwrap_or(0));
        Ok(build_rule(&self.space, target)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cframe::frame_operator;

    const EXAMPLE: &str = include_str!("../examples/example25.json");

    #[test]
    fn example_parses() {
        let p = Problem::parse(EXAMPLE, "example25.json", None).unwrap();
        let f = p.map("F").unwrap();
        let rule = p.rule_for(&[f], 0).unwrap();
        let q = frame_operator(f, &rule).unwrap();
        let expected = [[5.0 / 3.0, 5.0 / 3.0], [5.0 / 3.0, 10.0 / 3.0]];
        for (r, row) in expected.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                assert!((q.matrix()[(r, c)] - C64::new(e, 0.0)).norm() < 1e-14);
            }
        }
        assert_eq!(p.scalar("alpha").unwrap(), C64::new(2.0, 0.0));
    }

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"algebra": {{"blocks": [1, 1]}}, "rank": 1,
                "measure": {{"type": "interval", "a": 0, "b": 1}}{extra}}}"#
        )
    }

    #[test]
    fn off_block_entry_is_rejected() {
        let text = minimal(r#", "elements": {"a": {"dense": [[[1,0],[1,0]],[[0,0],[1,0]]]}}"#);
        let err = Problem::parse(&text, "t", None).unwrap_err();
        assert!(matches!(err, CliError::BlockPattern { ref field, .. } if field == "$.elements.a.dense"));
        let text = minimal(r#", "operators": {"X": {"matrix": [[[1,0],[0,0]],[[2,0],[1,0]]]}}"#);
        assert!(matches!(
            Problem::parse(&text, "t", None),
            Err(CliError::BlockPattern { .. })
        ));
    }

    #[test]
    fn empty_maps_section_is_valid() {
        let p = Problem::parse(&minimal(r#", "maps": {}"#), "t", None).unwrap();
        assert!(matches!(p.map("F"), Err(CliError::NamedObjectMissing { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = Problem::parse("{\n  \"rank\": ,\n}", "bad.json", None).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = minimal(r#", "scalars": {"s": [1]}"#);
        let err = Problem::parse(&text, "t", None).unwrap_err();
        assert!(matches!(err, CliError::Schema { ref field, .. } if field == "$.scalars.s"));
        let err = Problem::parse(&minimal(r#", "extra": 1"#), "t", None).unwrap_err();
        assert!(matches!(err, CliError::Schema { ref field, .. } if field == "$.extra"));
        let text = minimal(r#", "maps": {"T": {"tabulated": []}}"#);
        assert!(matches!(
            Problem::parse(&text, "t", None),
            Err(CliError::Schema { ref field, .. }) if field == "$.quadrature_degree"
        ));
    }

    #[test]
    fn low_quadrature_degree_is_rejected() {
        let text = minimal(
            r#", "quadrature_degree": 1, "maps": {"F": {"polynomial": [[[[[[1,0]]],[[[1,0]]]]], [[[[[1,0]]],[[[1,0]]]]]]}}"#,
        );
        assert!(matches!(
            Problem::parse(&text, "t", None),
            Err(CliError::Schema { ref field, .. }) if field == "$.quadrature_degree"
        ));
    }
}
