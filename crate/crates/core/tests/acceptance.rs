//! Acceptance suite: one PASS/FAIL line per criterion.

use innerfn_core::sequences::{regular_punctured_runs, regularity_functional_runs};
use innerfn_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const ANCHOR_TOL: f64 = 1e-12;
const TWO_ATOM_TOL: f64 = 1e-10;
const ATOM_LIMIT_REL: f64 = 1e-6;
const WINDING_TOL: f64 = 1e-6;
const CROSS_ROUTE_REL: f64 = 1e-6;
const ANTISYMMETRY_TOL: f64 = 1e-10;
const PLATEAU_GROWTH: f64 = 0.05;
const DISCREPANCY_GROWTH: f64 = 0.10;
const NORMALIZED_DRIFT: f64 = 0.10;
const ALPHA_RATIO_DRIFT: f64 = 0.10;
const LOG_INTEGRAL_TOL: f64 = 1e-8;
const SWEEP_BUDGET: Duration = Duration::from_secs(120);
const REGULARITY_INCREMENT: f64 = 1e-6;
const COUNTING_FLOOR: f64 = 1.0;
const COUNTING_DRIFT: f64 = 0.01;

/// Criteria known to fail under the exact construction; see the project notes.
const EXPECTED_FAILURES: &[usize] = &[11];

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn custom_model(a: &[f64], w: &[f64]) -> InnerFunctionModel {
    let s = SeparatedSequence::from_points(a.to_vec()).unwrap();
    let m = build_measure(&s, WeightStrategy::Custom, Some(w)).unwrap();
    InnerFunctionModel::clark(m, 0.0, EvaluationConfig::default()).unwrap()
}

fn family_model(f: &Family, w: IndexWindow, strategy: WeightStrategy) -> InnerFunctionModel {
    let s = generate(f, w).unwrap();
    let m = build_measure(&s, strategy, None).unwrap();
    InnerFunctionModel::clark(m, 0.0, EvaluationConfig::default()).unwrap()
}

fn full_sup(m: &InnerFunctionModel) -> f64 {
    let p = m.measure().positions();
    m.sup_derivative((p[0], p[p.len() - 1])).unwrap().sup
}

/// 50 random finite measures: N ≤ 50, gaps ≥ 0.5, weights in [0.1, 10].
fn random_models() -> Vec<InnerFunctionModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..50)
        .map(|_| {
            let n = rng.gen_range(1..=50);
            let mut x = rng.gen_range(-40.0..0.0);
            let a: Vec<f64> = (0..n)
                .map(|_| {
                    x += rng.gen_range(0.5..3.0);
                    x
                })
                .collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
            custom_model(&a, &w)
        })
        .collect()
}

/// `|Θ'|` through the transform route: `(2/π) Σ w/(x-a)² / (1 + s²)`.
fn transform_route_derivative(m: &InnerFunctionModel, x: f64) -> f64 {
    let meas = m.measure();
    let s = boundary_s(meas, x, m.config()).unwrap();
    let d: f64 = meas.positions().iter().zip(meas.weights()).map(|(a, w)| w / ((x - a) * (x - a))).sum();
    2.0 / PI * d / (1.0 + s * s)
}

fn criterion_1() -> Outcome {
    let m = custom_model(&[0.0], &[PI]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let y = if i % 10 == 0 { 0.0 } else { rng.gen_range(1e-3..10.0) };
        let z = c(rng.gen_range(-10.0..10.0), y);
        let exact = -(z - Complex64::i()) / (z + Complex64::i());
        worst = worst.max((m.theta(z) - exact).norm());
    }
    let d0 = m.theta_prime_abs(0.0);
    let zs = find_zeros(&m, None).unwrap();
    let res = zs.residuals[0];
    let ok = worst <= ANCHOR_TOL
        && (d0 - 2.0).abs() <= ANCHOR_TOL
        && zs.zeros.len() == 1
        && (zs.zeros[0] - Complex64::i()).norm() <= ANCHOR_TOL
        && res <= ANCHOR_TOL;
    (ok, format!("max|Θ-closed|={worst:.2e}, |Θ'(0)|={d0}, zero={}, residual={res:.1e}", zs.zeros[0]))
}

fn criterion_2() -> Outcome {
    let m = custom_model(&[-1.0, 1.0], &[1.0, 1.0]);
    let k = cauchy_transform(m.measure(), Complex64::i(), m.config()).unwrap().value;
    let d0 = m.theta_prime_abs(0.0);
    let zs = find_zeros(&m, None).unwrap();
    let re = (PI * PI - 1.0).sqrt() / PI;
    let expected = [c(-re, 1.0 / PI), c(re, 1.0 / PI)];
    let zero_err = zs.zeros.iter().zip(expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let ok = (k - 1.0 / PI).norm() <= TWO_ATOM_TOL
        && (d0 - 4.0 / PI).abs() <= TWO_ATOM_TOL
        && zs.zeros.len() == 2
        && zero_err <= TWO_ATOM_TOL;
    (ok, format!("Kμ(i)={k:.12}, |Θ'(0)|={d0:.12}, zero error={zero_err:.1e}"))
}

fn criterion_3(models: &[InnerFunctionModel]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact_at_atom = true;
    for m in models {
        for (&a, &w) in m.measure().positions().iter().zip(m.measure().weights()) {
            let target = 2.0 * PI / w;
            // symmetric averages are even in h; extrapolate in h²
            let avg = |h: f64| 0.5 * (transform_route_derivative(m, a + h) + transform_route_derivative(m, a - h));
            let (f4, f5) = (avg(1e-4), avg(1e-5));
            let limit = f5 + (f5 - f4) / 99.0;
            worst = worst.max((limit - target).abs() / target);
            exact_at_atom &= m.theta_prime_abs(a) == target;
        }
    }
    (worst <= ATOM_LIMIT_REL && exact_at_atom, format!("max relative gap to 2π/w_k = {worst:.2e}, atom branch exact = {exact_at_atom}"))
}

fn criterion_4(models: &[InnerFunctionModel]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for m in models {
        for w in m.measure().positions().windows(2) {
            let p = m.phase_increment(w[0], w[1]).unwrap();
            worst = worst.max((p.value - 2.0 * PI).abs());
            pairs += 1;
        }
    }
    (worst <= WINDING_TOL, format!("{pairs} atom pairs, max |increment - 2π| = {worst:.2e}"))
}

fn criterion_5(models: &[InnerFunctionModel]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut certified = true;
    for m in models {
        let zs = find_zeros(m, None).unwrap();
        certified &= zs.certified;
        let p = m.measure().positions();
        let mut done = 0;
        while done < 1000 {
            let x = rng.gen_range(p[0] - 5.0..p[p.len() - 1] + 5.0);
            if (x - p[m.measure().nearest_atom(x)]).abs() < 1e-6 {
                continue;
            }
            let b = blaschke_phase_derivative(&zs, 0.0, x).value;
            let t = m.theta_prime_abs(x);
            worst = worst.max((b - t).abs() / t);
            done += 1;
        }
    }
    (worst <= CROSS_ROUTE_REL && certified, format!("max relative gap = {worst:.2e}, all zero sets certified = {certified}"))
}

fn criterion_6(models: &[InnerFunctionModel]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut min_re = f64::INFINITY;
    for m in models {
        let p = m.measure().positions();
        for _ in 0..1000 {
            let z = c(rng.gen_range(p[0] - 10.0..p[p.len() - 1] + 10.0), 10f64.powf(rng.gen_range(-3.0..2.0)));
            worst = worst.max((m.theta(z.conj()) * m.theta(z).conj() - 1.0).norm());
            min_re = min_re.min(cauchy_transform(m.measure(), z, m.config()).unwrap().value.re);
        }
    }
    (worst <= ANTISYMMETRY_TOL && min_re > 0.0, format!("max|Θ(z̄)conj Θ(z) - 1| = {worst:.2e}, min Re Kμ = {min_re:.2e}"))
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn growth(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]) / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn drift(values: &[f64]) -> f64 {
    values.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max)
}

fn criterion_7() -> Outcome {
    let power: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&m| full_sup(&family_model(&Family::Power { k: 2.0 }, IndexWindow::symmetric(m), WeightStrategy::Gap)))
        .collect();
    let geo: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&m| full_sup(&family_model(&Family::Geometric { r: 2.0 }, IndexWindow::symmetric(m), WeightStrategy::Gap)))
        .collect();
    let (gp, gg) = (growth(&power), growth(&geo));
    (gp < PLATEAU_GROWTH && gg < PLATEAU_GROWTH, format!("power sups {power:.6?} (growth {gp:.2e}); geometric sups {geo:.6?} (growth {gg:.2e})"))
}

fn criterion_8() -> Outcome {
    let mut disc = Vec::new();
    let mut sups = Vec::new();
    for m in [4, 5, 6] {
        let model = family_model(&Family::DoubleExponential, IndexWindow::symmetric(m), WeightStrategy::Unit);
        disc.push(discrepancy_report(model.measure()).unwrap().sup_abs);
        sups.push(full_sup(&model));
    }
    let (gd, gs) = (growth(&disc), growth(&sups));
    (gd <= DISCREPANCY_GROWTH && gs < PLATEAU_GROWTH, format!("discrepancy sups {disc:.6?} (growth {gd:.2e}); derivative sups {sups:.6?} (growth {gs:.2e})"))
}

fn criterion_9() -> Outcome {
    let vals: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&m| {
            let model = family_model(&Family::Power { k: 2.0 }, IndexWindow::symmetric(m), WeightStrategy::Gap);
            discrepancy_report(model.measure()).unwrap().normalized_sup.unwrap()
        })
        .collect();
    let d = drift(&vals);
    (d < NORMALIZED_DRIFT, format!("max|D_k|/ln|a_k| = {vals:.6?}, drift {d:.2e}"))
}

fn criterion_10() -> Outcome {
    let mut ratios = Vec::new();
    let mut log_gap = 0.0f64;
    for m in [200, 400] {
        let s = generate(&Family::LogGap { a1: 10.0, c: 1.0 }, IndexWindow::new(1, m)).unwrap();
        let model = krein_build(&s, IndexWindow::new(1, m), 0.0).unwrap();
        let k = model.krein_data().unwrap();
        let a = k.atoms();
        let r = (0..a.len() - 1)
            .map(|n| {
                let g = a[n + 1] - a[n];
                k.derived_alpha[n] / (g * g.ln())
            })
            .fold(0.0, f64::max);
        ratios.push(r);
        log_gap = log_gap.max(k.log_integral_discrepancy(400));
    }
    let d = drift(&ratios);
    let ok = ratios.iter().all(|r| r.is_finite()) && d < ALPHA_RATIO_DRIFT && log_gap <= LOG_INTEGRAL_TOL;
    (ok, format!("max α/(Δ lnΔ) = {ratios:.6?} (drift {d:.2e}); log integral gap {log_gap:.1e}"))
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for strategy in [WeightStrategy::Unit, WeightStrategy::Gap] {
        let r = counterexample_sweep(&[8, 16, 32, 64], 1.0, 0.0, strategy).unwrap();
        let heights: Vec<f64> = r.iter().map(|b| b.min_height).collect();
        let sups: Vec<f64> = r.iter().map(|b| b.sup_phase_derivative).collect();
        let dec = heights.windows(2).all(|w| w[1] < w[0]);
        let inc = sups.windows(2).all(|w| w[1] > w[0]);
        let ratio = sups[3] / sups[0];
        let boxes = r.iter().filter(|b| b.n >= 32).all(|b| 2 * b.z >= b.n);
        ok &= dec && inc && ratio >= 2.0 && boxes && r.iter().all(|b| b.certified);
        lines.push(format!(
            "{strategy:?}: heights [{}] decreasing={dec}, sups {sups:.4?} increasing={inc}, sup64/sup8={ratio:.3}, Z={:?}",
            sci(&heights),
            r.iter().map(|b| b.z).collect::<Vec<_>>()
        ));
    }
    let t = start.elapsed();
    ok &= t <= SWEEP_BUDGET;
    (ok, format!("{} ({:.2}s)", lines.join("; "), t.as_secs_f64()))
}

fn criterion_12() -> Outcome {
    let mut values = Vec::new();
    for k in 1..=4 {
        let hi = 2f64.powi(3i32.pow(k));
        let runs = regular_punctured_runs(hi).unwrap();
        values.push(regularity_functional_runs(&runs, 1.0, (0.0, hi)).unwrap().value);
    }
    let inc: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let cauchy = inc[2] < REGULARITY_INCREMENT && inc.windows(2).all(|w| w[1] < w[0]);
    let s = generate(&Family::RegularPunctured, IndexWindow::new(1, 600)).unwrap();
    let cfg = ClassifyConfig { counterexample_n: 3, counterexample_d: Some(1.0), ..Default::default() };
    let verdict = classify(&s, &cfg).unwrap();
    let flagged = verdict.regime == Regime::CounterexamplePattern;
    (cauchy && flagged, format!("increments [{}]; classify -> {:?}", sci(&inc), verdict.regime))
}

fn criterion_13() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [-100.0, -1000.0] {
        let r1 = counting_check(10_000, t).unwrap();
        let r2 = counting_check(20_000, t).unwrap();
        let d = ((r2 - r1) / r1).abs();
        ok &= r1 >= COUNTING_FLOOR && r2 >= COUNTING_FLOOR && d < COUNTING_DRIFT;
        parts.push(format!("t={t}: {r1:.6} -> {r2:.6} (drift {d:.2e})"));
    }
    (ok, parts.join("; "))
}

fn main() {
    let models = random_models();
    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3(&models)),
        (4, criterion_4(&models)),
        (5, criterion_5(&models)),
        (6, criterion_6(&models)),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
        (11, criterion_11()),
        (12, criterion_12()),
        (13, criterion_13()),
    ];
    let mut unexpected = Vec::new();
    for (n, (ok, detail)) in &results {
        println!("{} criterion {n}: {detail}", if *ok { "PASS" } else { "FAIL" });
        if *ok == EXPECTED_FAILURES.contains(n) {
            unexpected.push(*n);
        }
    }
    let passed = results.iter().filter(|r| r.1 .0).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if !unexpected.is_empty() {
        eprintln!("acceptance outcome changed for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
