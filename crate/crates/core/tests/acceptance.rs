//! Acceptance suite. Every criterion prints one PASS/FAIL line with the
//! measured quantity and its runtime; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{Isometry3, Translation3, UnitQuaternion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slenderquad::cli::{
    eigen_errors, field_reference, field_sweep, random_coefficients, subsample, testf, testf_simple, FieldGridSpec,
    FieldMode, FieldPoint, ForceFn,
};
use slenderquad::finitepart::{apply_k, apply_l, build_weight_table, eval_k, g_pointwise, qk_signkernel, LineDensity};
use slenderquad::geometry::{discretize, make_helix, make_straight, FiberCurve};
use slenderquad::nearsing::{qkp_moments, NearEvalConfig};
use slenderquad::oracle::{
    adaptive_integrate_split, convergence_study, reference_k, reference_moment_scales, reference_moments,
};
use slenderquad::quadcore::gauss_legendre;
use slenderquad::Vec3;

fn report(id: u32, name: &str, passed: bool, detail: String, elapsed: Duration, budget: Duration) {
    let in_time = elapsed <= budget;
    let verdict = if passed && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {id} ({name}): {verdict}; {detail}; runtime {:.3} s of {:.1} s",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(passed, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} over time budget: {elapsed:?}");
}

fn helix() -> FiberCurve {
    make_helix(8.0, 3.0, 1.5).unwrap()
}

fn testf_derivative(length: f64) -> impl Fn(f64) -> Vec3 {
    move |s| {
        Vec3::new(
            -2.0 * PI * (4.0 * PI * s).sin() - (-s).exp() + (s - length).exp(),
            4.0 * PI * (8.0 * PI * s).sin(),
            -2.0 * (-2.0 * s).exp(),
        )
    }
}

#[test]
fn criterion_1_eigenfunctions() {
    let start = Instant::now();
    let alpha = random_coefficients(5, 2019);
    let rows = eigen_errors(&alpha, 1.0, 16, &[1, 2, 4, 8]).unwrap();
    let worst = rows.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let detail = rows
        .iter()
        .map(|(m, e)| format!("M={m}: {e:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(1, "eigenfunction suite", worst <= 1e-13, detail, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn criterion_2_moment_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eta_bar: f64 = rng.random_range(-1.0..1.0);
        for k in 0..16 {
            // Kronrod-15 is exact for these monomials on each piece
            let piece = adaptive_integrate_split(
                |eta| [if eta < eta_bar { -eta.powi(k) } else { eta.powi(k) }],
                &[-1.0, eta_bar, 1.0],
                1e-15,
            )
            .unwrap();
            let closed = qk_signkernel(k as usize, eta_bar).unwrap();
            worst = worst.max((closed - piece.value[0]).abs());
        }
    }
    report(
        2,
        "sign-kernel moments",
        worst <= 1e-14,
        format!("max abs diff {worst:.2e} over k <= 15 and 100 targets"),
        start.elapsed(),
        Duration::from_millis(100),
    );
}

#[test]
fn criterion_3_k_self_convergence() {
    let start = Instant::now();
    let grid = convergence_study(&helix(), testf(1.5), &[4, 8, 16, 32, 64], 128, 400, 16).unwrap();
    let e: Vec<f64> = grid.errors.iter().map(|(_, e)| *e).collect();
    let decreasing = e[..4].windows(2).all(|w| w[1] < w[0]);
    let passed = decreasing && e[4] <= 1e-10;
    let detail = grid
        .errors
        .iter()
        .map(|(m, e)| format!("e_{m}={e:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(3, "K self-convergence", passed, detail, start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_4_k_oracle() {
    let start = Instant::now();
    let curve = helix();
    let rule = gauss_legendre(16).unwrap();
    let table = build_weight_table(&rule).unwrap();
    let disc = discretize(&curve, 16, &rule).unwrap();
    let f = testf(1.5);
    let density = LineDensity::sample(&disc.grid, &f);
    let nodes = disc.grid.node_count();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for j in 0..40 {
        let t = (j * nodes) / 40 + j % 7;
        let s_bar = disc.grid.global_nodes()[t];
        let k = eval_k(&disc, &density, &table, t).unwrap();
        let reference = match reference_k(&curve, &f, testf_derivative(1.5), s_bar, 1e-12) {
            Ok(v) => v,
            Err(e) => {
                failures += 1;
                println!("oracle did not reach tolerance at s = {s_bar}: {e}");
                continue;
            }
        };
        worst = worst.max((k - reference).amax());
    }
    report(
        4,
        "K oracle equivalence",
        worst <= 1e-8 && failures == 0,
        format!("max componentwise diff {worst:.2e} at 40 nodes, {failures} oracle failures"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

struct FieldOutcome {
    special_8: f64,
    regular_6: f64,
    regular_12: f64,
    flagged: usize,
}

fn field_study(points: &[FieldPoint]) -> FieldOutcome {
    let curve = helix();
    let force: ForceFn = std::sync::Arc::new(testf_simple(&curve));
    let reference = field_reference(&curve, &force, points);
    let near = NearEvalConfig::default();
    let sweep = |mode, m| {
        field_sweep(&curve, &force, points, &reference, mode, m, 16, &near)
            .unwrap()
            .max_error()
    };
    FieldOutcome {
        special_8: sweep(FieldMode::Special, 8),
        regular_6: sweep(FieldMode::Regular, 6),
        regular_12: sweep(FieldMode::Regular, 12),
        flagged: reference.iter().filter(|r| r.is_none()).count(),
    }
}

fn field_verdict(o: &FieldOutcome) -> (bool, String) {
    let passed = o.special_8 <= 1e-8 && o.regular_12 >= 1e-4 && o.regular_6 / o.regular_12 <= 2.0 && o.flagged == 0;
    let detail = format!(
        "special M=8 max {:.2e}, regular M=6 max {:.2e}, regular M=12 max {:.2e}, {} flagged",
        o.special_8, o.regular_6, o.regular_12, o.flagged
    );
    (passed, detail)
}

#[test]
fn criterion_5_near_singular_stokeslet() {
    let start = Instant::now();
    let points = FieldGridSpec::default().points(8.0, 3.0, 1.5).unwrap();
    let outcome = field_study(&points);
    let (passed, detail) = field_verdict(&outcome);
    report(
        5,
        "near-singular Stokeslet, 20x20x16 grid",
        passed,
        detail,
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_5_subsample() {
    let start = Instant::now();
    // error thresholds belong to the full grid; this subset of it keeps the
    // runtime budget and the absolute bounds. The M=6 to M=12 ratio is
    // reported only, since the subset misses the (angle, height) pairs
    // where the helix passes closest.
    let full = FieldGridSpec::default().points(8.0, 3.0, 1.5).unwrap();
    let o = field_study(&subsample(&full, 5, 5, 4));
    let passed = o.special_8 <= 1e-8 && o.regular_12 >= 1e-4 && o.flagged == 0;
    let detail = format!(
        "special M=8 max {:.2e}, regular M=12 max {:.2e}, M=6/M=12 ratio {:.2} (not asserted), {} flagged",
        o.special_8,
        o.regular_12,
        o.regular_6 / o.regular_12,
        o.flagged
    );
    report(
        5,
        "near-singular Stokeslet, 5x5x4 subsample",
        passed,
        detail,
        start.elapsed(),
        Duration::from_secs(15),
    );
}

#[test]
fn criterion_6_moment_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let z = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(1e-3..=1.0));
        for p in [1, 3] {
            let q = qkp_moments(z, p, 16).unwrap();
            let exact = reference_moments(z, p, 16, 1e-15).unwrap();
            let scale = reference_moment_scales(z, p, 16, 1e-13).unwrap();
            for k in 0..16 {
                worst = worst.max((q[k] - exact[k]).abs() / scale[k]);
            }
        }
    }
    report(
        6,
        "moment oracle",
        worst <= 1e-11,
        format!("max relative error {worst:.2e} for p in {{1,3}}, k <= 15, 50 roots"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_7_structural_identities() {
    let start = Instant::now();
    let rule = gauss_legendre(16).unwrap();
    let table = build_weight_table(&rule).unwrap();

    // straight fiber: K = (I + ss) L componentwise
    let direction = Vec3::new(0.48, 0.6, 0.64);
    let line = discretize(&make_straight(direction, 1.5).unwrap(), 8, &rule).unwrap();
    let f = LineDensity::sample(&line.grid, testf(1.5));
    let k = apply_k(&line, &f, &table).unwrap();
    let mut l = vec![Vec3::zeros(); k.len()];
    for c in 0..3 {
        for (li, v) in l.iter_mut().zip(apply_l(&f.component(c), &line.grid, &table).unwrap()) {
            li[c] = v;
        }
    }
    let projector = nalgebra::Matrix3::identity() + direction * direction.transpose();
    let straight = k
        .iter()
        .zip(&l)
        .map(|(k, l)| (k - projector * l).amax())
        .fold(0.0, f64::max);

    // constant force on a straight fiber
    let constant = LineDensity::sample(&line.grid, |_| Vec3::new(1.0, -0.5, 0.25));
    let zero = apply_k(&line, &constant, &table)
        .unwrap()
        .iter()
        .map(|v| v.amax())
        .fold(0.0, f64::max);

    // rigid motion of helix and force
    let curve = helix();
    let rotation = UnitQuaternion::from_euler_angles(0.3, -1.1, 2.0);
    let moved = curve.with_placement(Isometry3::from_parts(Translation3::new(0.7, -2.0, 5.0), rotation));
    let base = discretize(&curve, 16, &rule).unwrap();
    let shifted = discretize(&moved, 16, &rule).unwrap();
    let force = testf(1.5);
    let k0 = apply_k(&base, &LineDensity::sample(&base.grid, &force), &table).unwrap();
    let k1 = apply_k(&shifted, &LineDensity::sample(&shifted.grid, |s| rotation * force(s)), &table).unwrap();
    let invariance = k0
        .iter()
        .zip(&k1)
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max);

    report(
        7,
        "structural identities",
        straight <= 1e-12 && zero <= 1e-14 && invariance <= 1e-12,
        format!("straight {straight:.2e}, constant {zero:.2e}, rigid motion {invariance:.2e}"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_8_limit() {
    let start = Instant::now();
    let curve = helix();
    let (f, df) = (testf(1.5), testf_derivative(1.5));
    let mut ratios = Vec::new();
    for s_bar in [0.2, 0.75, 1.3] {
        let limit = g_pointwise(&curve, &f, &df, s_bar, s_bar);
        let errors: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|h| (g_pointwise(&curve, &f, &df, s_bar + h, s_bar) - limit).norm())
            .collect();
        ratios.extend(errors.windows(2).map(|w| w[0] / w[1]));
    }
    let passed = ratios.iter().all(|r| (5.0..=20.0).contains(r));
    let detail = format!(
        "error ratios {}",
        ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
    );
    report(8, "limit correctness", passed, detail, start.elapsed(), Duration::from_secs(1));
}
