//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use cframe::duals::{
    dual_from_k_operator, dual_sequence_correction, dual_sequence_step,
    k_operator_from_dual, kernel_symmetry_check, minimality_check, null_bessel_family,
};
use cframe::frame::RieszVerdict;
use cframe::sampling::{
    random_element, random_invertible_operator, random_module_element, random_operator,
    random_polynomial_map, random_unitary, seeded, SampleRng,
};
use cframe::sums::{operator_sum_dual, operator_sum_frame, scaled_map};
use cframe::*;
use rand::Rng;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn m2() -> AlgebraDescriptor {
    AlgebraDescriptor::full(2).unwrap()
}

fn el(rows: [[f64; 2]; 2]) -> AlgebraElement {
    AlgebraElement::from_real_rows(&m2(), &[&rows[0], &rows[1]]).unwrap()
}

fn poly(coeffs: &[[[f64; 2]; 2]]) -> FrameMap {
    FrameMap::polynomial(coeffs.iter().map(|c| ModuleElement::single(el(*c))).collect()).unwrap()
}

fn example_f() -> FrameMap {
    poly(&[[[0.0, 0.0], [0.0, 0.0]], [[2.0, 1.0], [1.0, 3.0]]])
}

fn example_g() -> FrameMap {
    poly(&[[[-1.0, -1.0], [-1.0, -1.0]], [[3.3, 0.9], [0.9, 2.7]]])
}

fn unit_interval() -> MeasureSpace {
    MeasureSpace::lebesgue(0.0, 1.0)
}

fn rule() -> QuadratureRule {
    default_rule(&unit_interval(), &[&example_f(), &example_g()]).unwrap()
}

fn max_entry_diff(m: &CMatrix, rows: [[f64; 2]; 2]) -> f64 {
    let mut d: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            d = d.max((m[(r, c)] - C64::new(rows[r][c], 0.0)).norm());
        }
    }
    d
}

fn coefficient_diff(map: &FrameMap, expected: &[[[f64; 2]; 2]]) -> f64 {
    map.coefficient_distance(&poly(expected)).unwrap()
}

fn v1() -> FrameMap {
    dual_sequence_step(&example_f(), &example_g(), &rule(), Side::Left, &Tolerances::default())
        .unwrap()
        .map
}

fn criterion_1() -> Outcome {
    let tol = Tolerances::default();
    let r = rule();
    let q = frame_operator(&example_f(), &r).unwrap();
    let d_q = max_entry_diff(q.matrix(), [[5.0 / 3.0, 5.0 / 3.0], [5.0 / 3.0, 10.0 / 3.0]]);
    let qinv = q.inverse(tol.invertibility).unwrap();
    let d_qinv = max_entry_diff(qinv.matrix(), [[6.0 / 5.0, -3.0 / 5.0], [-3.0 / 5.0, 3.0 / 5.0]]);
    let can = canonical_dual(&example_f(), &r, &tol).unwrap();
    let d_can = coefficient_diff(
        &can,
        &[[[0.0, 0.0], [0.0, 0.0]], [[9.0 / 5.0, -3.0 / 5.0], [-3.0 / 5.0, 6.0 / 5.0]]],
    );
    let d_v1 = coefficient_diff(
        &v1(),
        &[
            [[-50.0 / 15.0, -50.0 / 15.0], [-50.0 / 10.0, -50.0 / 10.0]],
            [[102.0 / 15.0, 66.0 / 15.0], [69.0 / 10.0, 87.0 / 10.0]],
        ],
    );
    let corr = dual_sequence_correction(&example_f(), &example_g(), &r, Side::Left, &tol).unwrap();
    let d_corr = coefficient_diff(
        &corr,
        &[[[-10.0 / 3.0, -10.0 / 3.0], [-5.0, -5.0]], [[5.0, 5.0], [7.5, 7.5]]],
    );
    let worst = d_q.max(d_qinv).max(d_can).max(d_v1).max(d_corr);
    check(
        worst <= 1e-12,
        format!(
            "golden matrices: S {d_q:.1e}, S^-1 {d_qinv:.1e}, S^-1 F {d_can:.1e}, V1 {d_v1:.1e}, correction {d_corr:.1e}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let r = rule();
    let cert = verify_claimed_bounds(&example_f(), 0.5, 4.5, &r, &tol).unwrap();
    // closed-form eigenvalues of [[a, b], [b, c]]
    let (a, b, c): (f64, f64, f64) = (5.0 / 3.0, 5.0 / 3.0, 10.0 / 3.0);
    let mid = (a + c) / 2.0;
    let rad = (((a - c) / 2.0) * ((a - c) / 2.0) + b * b).sqrt();
    let opt = optimal_frame_bounds(&example_f(), &r).unwrap();
    let d_low = (opt.lower - (mid - rad)).abs();
    let d_up = (opt.upper - (mid + rad)).abs();
    let d_closed = (opt.lower - (15.0 - 5.0 * 5f64.sqrt()) / 6.0)
        .abs()
        .max((opt.upper - (15.0 + 5.0 * 5f64.sqrt()) / 6.0).abs());
    let ok = cert.verdict == frame::FrameVerdict::Frame
        && cert.lower_margin > 0.0
        && cert.upper_margin > 0.0
        && d_low.max(d_up).max(d_closed) <= 1e-12;
    check(
        ok,
        format!(
            "claimed (1/2, 9/2): margins {:.4}/{:.4}; optimal ({:.6}, {:.6}) off by {:.1e}",
            cert.lower_margin,
            cert.upper_margin,
            opt.lower,
            opt.upper,
            d_low.max(d_up).max(d_closed)
        ),
    )
}

/// Every dual the suite generates for the Example frame.
fn generated_duals(rng: &mut SampleRng) -> Vec<(String, FrameMap)> {
    let tol = Tolerances::default();
    let r = rule();
    let f = example_f();
    let can = canonical_dual(&f, &r, &tol).unwrap();
    let mut out = vec![
        ("G".to_string(), example_g()),
        ("canonical".to_string(), can.clone()),
        ("V1".to_string(), v1()),
    ];
    for side in [Side::Left, Side::Right] {
        let mut g = example_g();
        for i in 1..=5 {
            g = dual_sequence_step(&f, &g, &r, side, &tol).unwrap().map;
            out.push((format!("step {i} ({side:?})"), g.clone()));
        }
    }
    let basis = null_bessel_family(&f, 1, &r, &tol).unwrap();
    for m in 0..20 {
        let mut d = can.clone();
        for b in &basis {
            let c = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            d = d.add(&b.scale(c)).unwrap();
        }
        out.push((format!("null family member {m}"), d));
    }
    out
}

fn criterion_3() -> Outcome {
    let tol = Tolerances::default();
    let r = rule();
    let duals = generated_duals(&mut seeded(3));
    let basis_len = null_bessel_family(&example_f(), 1, &r, &tol).unwrap().len();
    let mut worst = (0.0, String::new());
    for (name, d) in &duals {
        let res = is_dual_pair(&example_f(), d, &r, &tol).unwrap().residual_norm;
        if res >= worst.0 {
            worst = (res, name.clone());
        }
    }
    check(
        worst.0 <= 1e-10 && basis_len == 4,
        format!(
            "{} duals certified (null family dimension {basis_len}); worst residual {:.1e} ({})",
            duals.len(),
            worst.0,
            worst.1
        ),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let r = rule();
    let mut rng = seeded(4);
    let (k, checks) = k_operator_from_dual(&example_f(), &example_g(), &r, &tol, 100, &mut rng).unwrap();
    let back = dual_from_k_operator(&example_f(), &k.null_part, &r, &tol).unwrap();
    let round_trip = back.map.coefficient_distance(&example_g()).unwrap();
    let ok = round_trip <= 1e-13 && checks.synthesis_residual <= 1e-12 && checks.bound_holds;
    check(
        ok,
        format!(
            "round trip {round_trip:.1e}; max |T_F K f|/|f| {:.1e}; sampled |K| {:.4} <= {:.4}",
            checks.synthesis_residual, checks.sampled_norm, checks.norm_bound
        ),
    )
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    // 20 Gauss nodes crossed with themselves
    let nodes = build_rule(&unit_interval(), 39).unwrap();
    let grid = nodes.nodes().to_vec();
    let can = canonical_dual(&example_f(), &rule(), &tol).unwrap();
    let sym = kernel_symmetry_check(&example_f(), &can, &grid).unwrap();
    let asym = kernel_symmetry_check(&example_f(), &example_g(), &grid).unwrap();
    check(
        grid.len() == 20 && sym.max_deviation <= 1e-10 && asym.max_deviation >= 0.1,
        format!(
            "{}x{} grid: canonical deviation {:.1e}; G deviation {:.4} at (w, g) = ({:.4}, {:.4})",
            grid.len(),
            grid.len(),
            sym.max_deviation,
            asym.max_deviation,
            asym.witness.0,
            asym.witness.1
        ),
    )
}

fn criterion_6() -> Outcome {
    let tol = Tolerances::default();
    let r = rule();
    let duals = generated_duals(&mut seeded(6));
    let mut lowest = f64::INFINITY;
    let mut canonical_margin = f64::NAN;
    for (name, d) in &duals {
        let rep = minimality_check(&example_f(), d, &r, &tol).unwrap();
        lowest = lowest.min(rep.margin);
        if name == "canonical" {
            canonical_margin = rep.margin.abs().max(rep.excess.abs());
        }
    }
    check(
        lowest >= -1e-10 && canonical_margin <= 1e-10,
        format!(
            "min eig(Q_D - Q^-1) over {} duals: {lowest:.1e}; canonical |Q_D - Q^-1| {canonical_margin:.1e}",
            duals.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let r = rule();
    let desc = m2();
    let mut rng = seeded(7);
    let f = example_f();
    let g = example_g();
    let v = v1();
    let id = ModuleOperator::identity(&desc, 1);
    let mut worst_iff: f64 = 0.0;
    for i in 0..50 {
        let x1 = random_operator(&desc, 1, &mut rng);
        // half the draws satisfy X1 + X2 = I exactly, the rest are perturbed
        let e = random_operator(&desc, 1, &mut rng).scale(C64::new(if i % 2 == 0 { 0.0 } else { 0.3 }, 0.0));
        let x2 = id.try_add(&x1.scale(C64::new(-1.0, 0.0))).unwrap().try_add(&e).unwrap();
        let out = operator_sum_dual(&f, &g, &v, &x1, &x2, &r, &tol).unwrap();
        worst_iff = worst_iff.max((out.dual.certificate.residual_norm - out.iff_residual).abs());
    }
    let mut lowest = f64::INFINITY;
    let mut tested = 0;
    for i in 0..50 {
        let (x1, x2) = if i % 2 == 0 {
            let x1 = random_invertible_operator(&desc, 1, &mut rng);
            let x2 = x1.inverse(tol.invertibility).unwrap().adjoint();
            (x1, x2)
        } else {
            let u = ModuleOperator::block_diagonal(&random_unitary(&desc, &mut rng), 1);
            (u.clone(), u)
        };
        let hyp = x1.try_mul(&x2.adjoint()).unwrap().distance_to_identity();
        if hyp > 1e-12 {
            continue;
        }
        let (_, cert) = operator_sum_frame(&f, &g, &x1, &x2, &r, &tol).unwrap();
        lowest = lowest.min(cert.optimal.lower);
        tested += 1;
    }
    check(
        worst_iff <= 1e-9 && lowest >= 2.0 - 1e-9 && tested >= 25,
        format!(
            "iff: max |residual - |X1+X2-I|| {worst_iff:.1e} over 50 pairs; sum frames: min eig(Q_H) {lowest:.6} over {tested} pairs"
        ),
    )
}

/// Random frame on a random block algebra; degree at least the rank keeps
/// the frame operator invertible for generic draws.
fn random_frame(rng: &mut SampleRng) -> (FrameMap, QuadratureRule) {
    let shapes: [&[usize]; 4] = [&[2], &[1, 1], &[2, 1], &[3]];
    let desc = AlgebraDescriptor::new(shapes[rng.random_range(0..shapes.len())].to_vec()).unwrap();
    let rank = rng.random_range(1..=2);
    let degree = rank + rng.random_range(0..=1);
    let map = random_polynomial_map(&desc, rank, degree, rng);
    let r = default_rule(&MeasureSpace::lebesgue(-1.0, 1.0), &[&map]).unwrap();
    (map, r)
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = seeded(8);
    let instances = 100;
    let mut failures = Vec::new();

    let mut cstar: f64 = 0.0;
    for _ in 0..instances {
        let (map, _) = random_frame(&mut rng);
        let a = random_element(map.descriptor(), &mut rng);
        let n2 = a.op_norm().powi(2);
        cstar = cstar.max((a.adjoint().try_mul(&a).unwrap().op_norm() - n2).abs() / n2.max(1e-300));
    }
    if cstar > 1e-12 {
        failures.push(format!("C*-identity {cstar:.1e}"));
    }

    let mut cs: f64 = f64::NEG_INFINITY;
    for _ in 0..instances {
        let (map, _) = random_frame(&mut rng);
        let f = random_module_element(map.descriptor(), map.rank(), &mut rng);
        let g = random_module_element(map.descriptor(), map.rank(), &mut rng);
        let lhs = inner(&f, &g).unwrap().op_norm().powi(2);
        let rhs = inner(&f, &f).unwrap().op_norm() * inner(&g, &g).unwrap().op_norm();
        cs = cs.max((lhs - rhs) / rhs);
    }
    if cs > 1e-12 {
        failures.push(format!("Cauchy-Schwarz {cs:.1e}"));
    }

    let mut adj: f64 = 0.0;
    for _ in 0..instances {
        let (map, r) = random_frame(&mut rng);
        let f = random_module_element(map.descriptor(), map.rank(), &mut rng);
        let phi = L2Element::new(
            &r,
            (0..r.len()).map(|_| random_element(map.descriptor(), &mut rng)).collect(),
        )
        .unwrap();
        let lhs = inner(&synthesis(&map, &phi).unwrap(), &f).unwrap();
        let rhs = measure::l2_inner(&phi, &analysis(&map, &f, &r).unwrap()).unwrap();
        adj = adj.max(lhs.distance(&rhs) / (1.0 + lhs.op_norm()));
    }
    if adj > 1e-12 {
        failures.push(format!("adjointness {adj:.1e}"));
    }

    let mut recon: f64 = 0.0;
    for _ in 0..instances {
        let (map, r) = random_frame(&mut rng);
        let can = canonical_dual(&map, &r, &tol).unwrap();
        let f = random_module_element(map.descriptor(), map.rank(), &mut rng);
        let one = synthesis(&map, &analysis(&can, &f, &r).unwrap()).unwrap();
        let two = synthesis(&can, &analysis(&map, &f, &r).unwrap()).unwrap();
        let e = (&one - &f).norm().max((&two - &f).norm()) / f.norm();
        recon = recon.max(e);
    }
    if recon > 1e-10 {
        failures.push(format!("reconstruction {recon:.1e}"));
    }

    let mut bessel: f64 = f64::NEG_INFINITY;
    let mut unitary: f64 = 0.0;
    for _ in 0..instances {
        let (map, r) = random_frame(&mut rng);
        let a = random_element(map.descriptor(), &mut rng);
        let (_, rel) = scaled_map(&a, &map, &r, &tol).unwrap();
        bessel = bessel.max(rel.bessel_bound - rel.claimed_bessel_bound);
        let u = random_unitary(map.descriptor(), &mut rng);
        let (_, rel) = scaled_map(&u, &map, &r, &tol).unwrap();
        unitary = unitary.max(rel.unitary_deviation.unwrap_or(f64::INFINITY));
    }
    if bessel > 1e-9 {
        failures.push(format!("scaled Bessel bound {bessel:.1e}"));
    }
    if unitary > 1e-12 {
        failures.push(format!("unitary invariance {unitary:.1e}"));
    }

    let detail = format!(
        "{instances} instances each: C* {cstar:.1e}, Cauchy-Schwarz {cs:.1e}, adjointness {adj:.1e}, reconstruction {recon:.1e}, Bessel excess {bessel:.1e}, unitary {unitary:.1e}"
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failures.join(", ")))
    }
}

fn criterion_9() -> Outcome {
    let tol = Tolerances::default();
    let one_atom = MeasureSpace::Discrete {
        points: vec![1.0],
        masses: vec![1.0],
    };
    let r1 = build_rule(&one_atom, 0).unwrap();
    let single = FrameMap::tabulated(&r1, vec![ModuleElement::single(AlgebraElement::identity(&m2()))]).unwrap();
    let rep1 = riesz_type_diagnostic(&single, &r1, &tol).unwrap();

    let two_atoms = MeasureSpace::Discrete {
        points: vec![1.0, 2.0],
        masses: vec![1.0, 1.0],
    };
    let r2 = build_rule(&two_atoms, 0).unwrap();
    let id = ModuleElement::single(AlgebraElement::identity(&m2()));
    let double = FrameMap::tabulated(&r2, vec![id.clone(), id]).unwrap();
    let rep2 = riesz_type_diagnostic(&double, &r2, &tol).unwrap();

    let rep3 = riesz_type_diagnostic(&example_f(), &rule(), &tol).unwrap();
    let family = null_bessel_family(&example_f(), 1, &rule(), &tol).unwrap().len();
    let ok = rep1.verdict == RieszVerdict::RieszType
        && rep2.verdict == RieszVerdict::NotRieszType
        && rep3.verdict == RieszVerdict::NotRieszType
        && family > 0;
    check(
        ok,
        format!(
            "single atom {:?} (rank {}/{}); two atoms {:?} (gap {}); Example {:?} with {family}-dimensional null family",
            rep1.verdict, rep1.rank, rep1.sampled_codomain_dim, rep2.verdict, rep2.dimension_gap, rep3.verdict
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("worked example golden values", criterion_1),
        ("claimed and optimal frame bounds", criterion_2),
        ("dual certificates", criterion_3),
        ("K operator round trip and norm bound", criterion_4),
        ("kernel symmetry", criterion_5),
        ("canonical dual minimality", criterion_6),
        ("operator sums", criterion_7),
        ("property suites", criterion_8),
        ("Riesz-type diagnostic", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
