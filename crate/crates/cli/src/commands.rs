//! Command execution. Each command returns a JSON report and whether the
//! certified property holds.

use cframe::duals::{
    dual_decompose, dual_sequence_closed, dual_sequence_correction, dual_sequence_step,
    k_operator_from_dual, kernel_symmetry_check, minimality_check, null_bessel_family,
};
use cframe::frame::{FrameVerdict, RieszVerdict};
use cframe::report::{map_dump, matrix_rows};
use cframe::sampling::seeded;
use cframe::sums::{
    affine_sum_dual, central_sum_dual, operator_sum_dual, operator_sum_frame, scaled_map,
};
use cframe::{
    canonical_dual, certify_frame, frame_operator, gram, is_dual_pair, optimal_frame_bounds,
    riesz_type_diagnostic, verify_claimed_bounds, CMatrix, FrameMap, MeasureSpace, Side, Tolerances,
    C64,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::problem::Problem;

pub struct Outcome {
    pub pass: bool,
    pub report: Value,
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn dump(map: &FrameMap) -> Value {
    value(&map_dump(map))
}

pub fn bounds(p: &Problem, frame: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let f = p.map(frame)?;
    let rule = p.rule_for(&[f], 0)?;
    let cert = certify_frame(f, &rule, tol)?;
    Ok(Outcome {
        pass: cert.verdict == FrameVerdict::Frame,
        report: json!({ "frame": frame, "certificate": value(&cert) }),
    })
}

pub fn verify_bounds(p: &Problem, frame: &str, lower: f64, upper: f64, tol: &Tolerances) -> CliResult<Outcome> {
    let f = p.map(frame)?;
    let rule = p.rule_for(&[f], 0)?;
    let cert = verify_claimed_bounds(f, lower, upper, &rule, tol)?;
    Ok(Outcome {
        pass: cert.verdict == FrameVerdict::Frame,
        report: json!({ "frame": frame, "certificate": value(&cert) }),
    })
}

pub fn canonical(p: &Problem, frame: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let f = p.map(frame)?;
    let rule = p.rule_for(&[f], 0)?;
    let q = frame_operator(f, &rule)?;
    let dual = canonical_dual(f, &rule, tol)?;
    let cert = is_dual_pair(f, &dual, &rule, tol)?;
    let qinv = q.inverse(tol.invertibility)?;
    Ok(Outcome {
        pass: cert.is_dual(),
        report: json!({
            "frame": frame,
            "frame_operator": matrix_rows(q.matrix()),
            "frame_operator_inverse": matrix_rows(qinv.matrix()),
            "canonical_dual": dump(&dual),
            "certificate": value(&cert),
        }),
    })
}

pub fn dual_check(p: &Problem, frame: &str, dual: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let cert = is_dual_pair(f, g, &rule, tol)?;
    Ok(Outcome {
        pass: cert.is_dual(),
        report: json!({ "frame": frame, "dual": dual, "certificate": value(&cert) }),
    })
}

pub fn dual_seq(
    p: &Problem,
    frame: &str,
    dual: &str,
    steps: u32,
    closed: Option<u32>,
    side: Side,
    tol: &Tolerances,
) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let correction = dual_sequence_correction(f, g, &rule, side, tol)?;
    let mut iterates = Vec::new();
    let mut pass = true;
    match closed {
        Some(i) => {
            let out = dual_sequence_closed(f, g, i, &rule, side, tol)?;
            pass &= out.certificate.is_dual();
            iterates.push(json!({
                "index": i + 1,
                "map": dump(&out.map),
                "certificate": value(&out.certificate),
            }));
        }
        None => {
            let mut current = g.clone();
            for i in 1..=steps {
                let out = dual_sequence_step(f, &current, &rule, side, tol)?;
                pass &= out.certificate.is_dual();
                iterates.push(json!({
                    "index": i,
                    "map": dump(&out.map),
                    "certificate": value(&out.certificate),
                }));
                current = out.map;
            }
        }
    }
    Ok(Outcome {
        pass,
        report: json!({
            "frame": frame,
            "dual": dual,
            "side": value(&side),
            "correction": dump(&correction),
            "iterates": iterates,
        }),
    })
}

pub fn decompose(p: &Problem, frame: &str, dual: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let d = dual_decompose(f, g, &rule, tol)?;
    Ok(Outcome {
        pass: d.is_dual,
        report: json!({
            "frame": frame,
            "dual": dual,
            "null_part": dump(&d.null_part),
            "nullity_residual": d.nullity_residual,
            "tolerance": tol.dual,
            "is_dual": d.is_dual,
        }),
    })
}

pub fn null_family(p: &Problem, frame: &str, degree: usize, tol: &Tolerances) -> CliResult<Outcome> {
    let f = p.map(frame)?;
    let rule = p.rule_for(&[f], degree)?;
    let basis = null_bessel_family(f, degree, &rule, tol)?;
    let mut residuals = Vec::with_capacity(basis.len());
    for b in &basis {
        residuals.push(spectral(&gram(f, b, &rule)?));
    }
    let pass = residuals.iter().all(|&r| r <= tol.dual);
    Ok(Outcome {
        pass,
        report: json!({
            "frame": frame,
            "degree": degree,
            "dimension": basis.len(),
            "basis": basis.iter().map(dump).collect::<Vec<_>>(),
            "nullity_residuals": residuals,
        }),
    })
}

fn spectral(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn k_op(p: &Problem, frame: &str, dual: &str, samples: usize, seed: u64, tol: &Tolerances) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let (k, checks) = k_operator_from_dual(f, g, &rule, tol, samples, &mut seeded(seed))?;
    Ok(Outcome {
        pass: checks.synthesis_residual <= tol.dual && checks.bound_holds,
        report: json!({
            "frame": frame,
            "dual": dual,
            "seed": seed,
            "generating_map": dump(&k.null_part),
            "checks": value(&checks),
        }),
    })
}

pub fn kernel_symmetry(
    p: &Problem,
    frame: &str,
    dual: &str,
    points: Option<usize>,
    tol: &Tolerances,
) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let grid = match (points, &p.space) {
        (None, _) => rule.nodes().to_vec(),
        (Some(n), MeasureSpace::Interval { a, b, .. }) if n >= 2 => {
            if f.rule().is_some() || g.rule().is_some() {
                return Err(CliError::Usage("--points needs polynomial maps; tabulated maps live on their nodes".into()));
            }
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        }
        (Some(_), MeasureSpace::Interval { .. }) => {
            return Err(CliError::Usage("--points must be at least 2".into()))
        }
        (Some(_), MeasureSpace::Discrete { .. }) => {
            return Err(CliError::Usage("--points applies to interval measures only".into()))
        }
    };
    let rep = kernel_symmetry_check(f, g, &grid)?;
    Ok(Outcome {
        pass: rep.max_deviation <= tol.dual,
        report: json!({ "frame": frame, "dual": dual, "tolerance": tol.dual, "report": value(&rep) }),
    })
}

pub fn minimality(p: &Problem, frame: &str, dual: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let rep = minimality_check(f, g, &rule, tol)?;
    Ok(Outcome {
        pass: rep.order_holds,
        report: json!({ "frame": frame, "dual": dual, "report": value(&rep) }),
    })
}

pub fn sum_frame(p: &Problem, frame: &str, dual: &str, x1: &str, x2: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let (f, g) = (p.map(frame)?, p.map(dual)?);
    let (a, b) = (p.operator(x1)?, p.operator(x2)?);
    let rule = p.rule_for(&[f, g], 0)?;
    let (h, cert) = operator_sum_frame(f, g, a, b, &rule, tol)?;
    Ok(Outcome {
        pass: cert.lower_check.holds && cert.upper_holds,
        report: json!({
            "frame": frame,
            "dual": dual,
            "x1": x1,
            "x2": x2,
            "map": dump(&h),
            "certificate": value(&cert),
        }),
    })
}

pub enum Weights<'a> {
    Operators(&'a str, &'a str),
    Scalars(&'a str, &'a str),
    Central(&'a str, &'a str),
}

pub fn sum_dual(
    p: &Problem,
    frame: &str,
    dual: &str,
    other: &str,
    weights: Weights<'_>,
    tol: &Tolerances,
) -> CliResult<Outcome> {
    let (f, g, k) = (p.map(frame)?, p.map(dual)?, p.map(other)?);
    let rule = p.rule_for(&[f, g, k], 0)?;
    let mut report = json!({ "frame": frame, "dual": dual, "other": other });
    let (map, cert) = match weights {
        Weights::Operators(x1, x2) => {
            let out = operator_sum_dual(f, g, k, p.operator(x1)?, p.operator(x2)?, &rule, tol)?;
            report["weights"] = json!({ "operators": [x1, x2] });
            report["iff_residual"] = json!(out.iff_residual);
            (out.dual.map, out.dual.certificate)
        }
        Weights::Scalars(a, b) => {
            let out = affine_sum_dual(f, g, k, p.scalar(a)?, p.scalar(b)?, &rule, tol)?;
            report["weights"] = json!({ "scalars": [a, b] });
            (out.map, out.certificate)
        }
        Weights::Central(a, b) => {
            let out = central_sum_dual(f, g, k, p.element(a)?, p.element(b)?, &rule, tol)?;
            report["weights"] = json!({ "central": [a, b] });
            (out.map, out.certificate)
        }
    };
    report["map"] = dump(&map);
    report["certificate"] = value(&cert);
    Ok(Outcome {
        pass: cert.is_dual(),
        report,
    })
}

pub fn scaled(p: &Problem, frame: &str, element: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let f = p.map(frame)?;
    let a = p.element(element)?;
    let rule = p.rule_for(&[f], 0)?;
    let (af, rel) = scaled_map(a, f, &rule, tol)?;
    let within = |d: Option<f64>| d.is_none_or(|d| d <= tol.dual);
    let pass = rel.bound_holds
        && within(rel.unitary_deviation)
        && within(rel.central_operator_deviation)
        && within(rel.central_synthesis_deviation);
    Ok(Outcome {
        pass,
        report: json!({
            "frame": frame,
            "element": element,
            "map": dump(&af),
            "relations": value(&rel),
        }),
    })
}

pub fn riesz(p: &Problem, frame: &str, tol: &Tolerances) -> CliResult<Outcome> {
    let f = p.map(frame)?;
    let rule = p.rule_for(&[f], 0)?;
    let rep = riesz_type_diagnostic(f, &rule, tol)?;
    Ok(Outcome {
        pass: rep.verdict != RieszVerdict::Inconclusive,
        report: json!({ "frame": frame, "report": value(&rep) }),
    })
}

/// Displayed matrices of the worked example, constant coefficient first.
struct Golden {
    name: &'static str,
    expected: Vec<[[f64; 2]; 2]>,
}

fn goldens() -> Vec<Golden> {
    vec![
        Golden {
            name: "frame_operator",
            expected: vec![[[5.0 / 3.0, 5.0 / 3.0], [5.0 / 3.0, 10.0 / 3.0]]],
        },
        Golden {
            name: "frame_operator_inverse",
            expected: vec![[[6.0 / 5.0, -3.0 / 5.0], [-3.0 / 5.0, 3.0 / 5.0]]],
        },
        Golden {
            name: "canonical_dual",
            expected: vec![
                [[0.0, 0.0], [0.0, 0.0]],
                [[9.0 / 5.0, -3.0 / 5.0], [-3.0 / 5.0, 6.0 / 5.0]],
            ],
        },
        Golden {
            name: "first_sequence_dual",
            expected: vec![
                [[-50.0 / 15.0, -50.0 / 15.0], [-50.0 / 10.0, -50.0 / 10.0]],
                [[102.0 / 15.0, 66.0 / 15.0], [69.0 / 10.0, 87.0 / 10.0]],
            ],
        },
        Golden {
            name: "sequence_correction",
            expected: vec![
                [[-10.0 / 3.0, -10.0 / 3.0], [-5.0, -5.0]],
                [[5.0, 5.0], [7.5, 7.5]],
            ],
        },
    ]
}

const GOLDEN_TOL: f64 = 1e-12;

fn compare(computed: &[CMatrix], expected: &[[[f64; 2]; 2]]) -> f64 {
    if computed.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (m, e) in computed.iter().zip(expected) {
        if m.nrows() != 2 || m.ncols() != 2 {
            return f64::INFINITY;
        }
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((m[(r, c)] - C64::new(e[r][c], 0.0)).norm());
            }
        }
    }
    worst
}

fn coefficient_matrices(map: &FrameMap) -> Vec<CMatrix> {
    map.coefficients()
        .map(|c| c.iter().map(|e| e.to_block_row()).collect())
        .unwrap_or_default()
}

/// Recomputes every displayed matrix of the worked example from maps `F` and
/// `G` and diffs them entrywise.
pub fn example25(p: &Problem, tol: &Tolerances) -> CliResult<Outcome> {
    let (f, g) = (p.map("F")?, p.map("G")?);
    let rule = p.rule_for(&[f, g], 0)?;
    let q = frame_operator(f, &rule)?;
    let qinv = q.inverse(tol.invertibility)?;
    let can = canonical_dual(f, &rule, tol)?;
    let v1 = dual_sequence_step(f, g, &rule, Side::Left, tol)?;
    let correction = dual_sequence_correction(f, g, &rule, Side::Left, tol)?;
    let computed: Vec<Vec<CMatrix>> = vec![
        vec![q.matrix().clone()],
        vec![qinv.matrix().clone()],
        coefficient_matrices(&can),
        coefficient_matrices(&v1.map),
        coefficient_matrices(&correction),
    ];
    let mut pass = true;
    let mut checks = Vec::new();
    for (gold, comp) in goldens().iter().zip(&computed) {
        let err = compare(comp, &gold.expected);
        pass &= err <= GOLDEN_TOL;
        checks.push(json!({
            "name": gold.name,
            "max_abs_error": err,
            "computed": comp.iter().map(matrix_rows).collect::<Vec<_>>(),
        }));
    }
    let claimed = verify_claimed_bounds(f, 0.5, 4.5, &rule, tol)?;
    let optimal = optimal_frame_bounds(f, &rule)?;
    let g_cert = is_dual_pair(f, g, &rule, tol)?;
    pass &= claimed.verdict == FrameVerdict::Frame && g_cert.is_dual() && v1.certificate.is_dual();
    Ok(Outcome {
        pass,
        report: json!({
            "golden_tolerance": GOLDEN_TOL,
            "matrices": checks,
            "claimed_bounds": value(&claimed),
            "optimal_bounds": value(&optimal),
            "dual_certificate_g": value(&g_cert),
            "dual_certificate_first_sequence_dual": value(&v1.certificate),
        }),
    })
}
