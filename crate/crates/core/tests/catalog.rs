use std::f64::consts::PI;

use factorineq::catalog::*;
use factorineq::coeff::{scan_grid, scan_nonnegativity, ScanSpec};
use factorineq::exprlang::ParamMap;
use factorineq::roots::golden_section_min;
use factorineq::specials::{bessel_j, iter_exp, iter_log};

fn params(pairs: &[(&str, f64)]) -> ParamMap {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn nonnegative(id: &str, p: &[(&str, f64)]) -> bool {
    let inst = instantiate(id, &params(p)).unwrap();
    scan_nonnegativity(&inst.weights(), &ScanSpec::default()).nonnegative
}

#[test]
fn every_entry_passes_at_defaults() {
    let opts = CheckOptions::default();
    for (info, rep) in ENTRIES.iter().zip(check_all(&opts)) {
        let rep = rep.unwrap_or_else(|e| panic!("{}: {e}", info.id));
        assert!(rep.scan.nonnegative, "{}: {:?}", info.id, rep.scan);
        for c in &rep.closed_form {
            assert!(c.passed, "{} m={}: {} at {}", info.id, c.m, c.max_rel_err, c.worst_x);
        }
        assert!(rep.corpus.passed, "{}: {:?}", info.id, rep.corpus.failures);
        assert!(rep.corpus.min_margin >= 0.0);
        assert!(rep.passed);
    }
}

#[test]
fn hardy_power_closed_form() {
    for gamma in [-2.0f64, 0.0, 1.0, 3.0] {
        let inst = instantiate("hardy_power", &params(&[("gamma", gamma)])).unwrap();
        let w = inst.weights();
        for i in 0..200 {
            let x = 0.01 * 1.05f64.powi(i);
            let want = (1.0 - gamma).powi(2) / 4.0 * x.powf(gamma - 2.0);
            let got = w.values(x).unwrap()[0];
            assert!((got - want).abs() <= 1e-12 * x.powf(gamma - 2.0), "gamma={gamma} x={x}");
        }
    }
    // gamma = 0 is the classical 1/(4x^2)
    let w = instantiate("hardy_power", &ParamMap::new()).unwrap().weights();
    assert!((w.values(2.0).unwrap()[0] - 1.0 / 16.0).abs() < 1e-15);
}

#[test]
fn trig_and_hyperbolic_closed_forms() {
    let th = instantiate("trig_hardy", &ParamMap::new()).unwrap().weights();
    let half = instantiate("trig_half", &ParamMap::new()).unwrap().weights();
    let hyp = instantiate("hyperbolic", &ParamMap::new()).unwrap().weights();
    for i in 1..100 {
        let x = PI * i as f64 / 100.0;
        let want = 0.25 + 0.25 / x.sin().powi(2);
        assert!((th.values(x).unwrap()[0] - want).abs() <= 1e-12 * want);
        let y = x / 2.0;
        let want = 1.0 + 0.25 / y.sin().powi(2) + 0.25 / y.cos().powi(2);
        assert!((half.values(y).unwrap()[0] - want).abs() <= 1e-12 * want);
        let z = 5.0 * i as f64 / 100.0;
        let want = 0.75 / z.cosh().powi(2) + 0.25 / z.sinh().powi(2);
        assert!((hyp.values(z).unwrap()[0] - want).abs() <= 1e-12 * want.max(1e-3), "z={z}");
    }
}

#[test]
fn rellich_maximizers() {
    for gamma in [0.0, 1.0, 5.0, -1.5, 2.5] {
        let opt = optimize_rellich_alpha(gamma).unwrap();
        assert!((opt.alpha_plus - opt.closed_plus).abs() <= 1e-8, "{opt:?}");
        assert!((opt.alpha_minus - opt.closed_minus).abs() <= 1e-8, "{opt:?}");
        assert!((opt.constant_plus - opt.closed_constant).abs() <= 1e-10 * (1.0 + opt.closed_constant));
        assert!((opt.constant_minus - opt.closed_constant).abs() <= 1e-10 * (1.0 + opt.closed_constant));
        // independent oracle: golden section on -F around each maximizer
        for a in [opt.alpha_plus, opt.alpha_minus] {
            let (x, _) = golden_section_min(|t| -rellich_f(gamma, t), a - 0.4, a + 0.4, 1e-10);
            assert!((x - a).abs() < 1e-6, "gamma={gamma}: {x} vs {a}");
        }
    }
    let opt = optimize_rellich_alpha(0.0).unwrap();
    assert!((opt.constant_plus - 9.0 / 16.0).abs() < 1e-12);
    assert_eq!(optimize_rellich_alpha(1.0).unwrap().closed_constant, 0.0);
}

#[test]
fn classical_rellich_weights() {
    let inst = instantiate("rellich_power", &ParamMap::new()).unwrap();
    let w = inst.weights();
    for x in scan_grid(inst.domain(), 500, 1e-4, &[]) {
        let v = w.values(x).unwrap();
        assert!(v[1].abs() <= 1e-10 * x.powi(-2).max(1.0), "c21({x}) = {}", v[1]);
    }
    assert!((w.values(1.0).unwrap()[0] - 9.0 / 16.0).abs() <= 1e-9);
}

#[test]
fn trig_weight_range() {
    let r = trig_alpha_range();
    assert!((r.numeric - r.closed_form).abs() <= 1e-6, "{r:?}");
    // the quoted four digits are truncated, not rounded
    assert_eq!((r.closed_form * 1e4).trunc() / 1e4, -4.1995);
    assert_eq!(r.upper, 0.0);
    // alpha = 0: F vanishes identically
    for x in [0.1, 1.0, 3.0] {
        assert_eq!(trig_weight_f(0.0, x), 0.0);
    }
    let (x, v) = trig_weight_min(-5.0);
    assert!(v < 0.0 && x > 0.0 && x < PI);
}

#[test]
fn simple_optima() {
    let h = optimize_simple(SimpleFamily::HardyPowerAlpha, 3.0);
    assert!((h.argopt - 1.0).abs() < 1e-12, "{h:?}");
    assert_eq!(h.stated_argopt, 1.0);
    let t = optimize_simple(SimpleFamily::TrigHardyAlpha, 0.0);
    assert!((t.argopt + 0.5).abs() < 1e-12 && (t.value + 0.25).abs() < 1e-12);
    let b = optimize_simple(SimpleFamily::HyperbolicBeta, 0.0);
    assert!((b.argopt - 0.5).abs() < 1e-12 && (b.value - 0.25).abs() < 1e-12);
}

#[test]
fn dist_boundary_is_symmetric() {
    for (gamma, mu, nu, a, b) in [(0.0, 0.0, 0.0, 0.0, 2.0), (0.5, 1.0, 0.2, -1.0, 3.0), (-1.0, 0.0, 0.3, 1.0, 1.5)] {
        let db = dist_boundary_build(gamma, mu, nu, a, b).unwrap();
        assert!((db.coef_a - 1.0).abs() < 1e-8 && db.coef_b.abs() < 1e-8, "{db:?}");
        let scale = (1..20).map(|i| db.u(a + (b - a) * i as f64 / 20.0).unwrap().abs()).fold(0.0, f64::max);
        for i in 1..40 {
            let x = a + (b - a) * (i as f64 + 0.37) / 40.5;
            let (l, r) = (db.u(x).unwrap(), db.u(a + b - x).unwrap());
            assert!((l - r).abs() <= 1e-8 * scale, "x={x}: {l} vs {r}");
        }
    }
}

#[test]
fn dist_boundary_defaults_match_closed_form() {
    let inst = instantiate("dist_boundary", &ParamMap::new()).unwrap();
    let checks = check_closed_forms(&inst, 500, 1e-4, 1e-9, Default::default());
    assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    // gamma = mu = nu = 0: lambda is the first zero of J_0(z) - 2 z J_1(z)
    let lambda = inst.derived["lambda"];
    let g = |z: f64| bessel_j(0.0, z).unwrap() - 2.0 * z * bessel_j(1.0, z).unwrap();
    assert!(g(lambda).abs() < 1e-12, "{lambda}");
    assert!(g(lambda - 1e-6) > 0.0 && g(lambda + 1e-6) < 0.0);
    let first = (1..1000).map(|i| i as f64 * 1e-3).find(|&z| g(z) < 0.0).unwrap();
    assert!(first > lambda && first - lambda < 1e-3);
}

#[test]
fn admissibility_boundaries_are_sharp() {
    assert!(nonnegative("trig_hardy", &[("alpha", -1.0)]));
    assert!(nonnegative("trig_hardy", &[("alpha", 0.0)]));
    assert!(!nonnegative("trig_hardy", &[("alpha", -1.01)]));
    assert!(!nonnegative("trig_hardy", &[("alpha", 0.01)]));

    let lo = trig_alpha_closed_form();
    assert!(nonnegative("trig_weight", &[("alpha", 0.99 * lo)]));
    assert!(!nonnegative("trig_weight", &[("alpha", 1.01 * lo)]));
    assert!(!nonnegative("trig_weight", &[("alpha", 0.01)]));

    // gamma = 0: F_0(alpha) = alpha (1 - alpha)(alpha - 3)(alpha - 4) / 4
    assert!(nonnegative("rellich_power", &[("alpha", 3.96)]));
    assert!(!nonnegative("rellich_power", &[("alpha", 4.04)]));
    assert!(!nonnegative("rellich_power", &[("alpha", 2.97)]));

    let bound: f64 = 0.5; // |1 - gamma| / (2 + mu - gamma) at the defaults
    assert!(nonnegative("hardy_bessel", &[("nu", 0.99 * bound)]));
    let inst = instantiate("hardy_bessel", &params(&[("nu", 1.01 * bound)])).unwrap();
    assert!(!inst.admissible);
    assert!(!scan_nonnegativity(&inst.weights(), &ScanSpec::default()).nonnegative);
    assert!(!instantiate("dist_boundary", &params(&[("nu", 1.01 * bound)])).unwrap().admissible);
    assert!(!nonnegative("dist_boundary", &[("nu", 1.01 * bound)]));
}

#[test]
fn negative_weight_locations() {
    let inst = instantiate("trig_weight", &params(&[("alpha", -5.0)])).unwrap();
    assert!(!inst.admissible);
    let scan = scan_nonnegativity(&inst.weights(), &ScanSpec::default());
    assert!(!scan.nonnegative);
    let s = &scan.weights[0];
    assert!(s.min < 0.0 && s.argmin > 0.0 && s.argmin < PI);
    // the located minimum agrees with the closed form there
    assert!((s.min - trig_weight_f(-5.0, s.argmin)).abs() < 1e-9 * s.min.abs());
}

#[test]
fn iterated_log_family_at_the_boundary_scale() {
    for n in 1..=3u32 {
        let eta = iter_exp(n).unwrap();
        let inst = instantiate("hardy_log", &params(&[("N", n as f64), ("R", 1.0), ("eta", eta)])).unwrap();
        assert!(inst.admissible);
        let grid = scan_grid(inst.domain(), 400, 1e-4, &[]);
        for &x in &grid {
            for p in 1..=n {
                assert!(iter_log(p, eta / x).unwrap() > 0.0, "N={n} p={p} x={x}");
            }
        }
        assert!(scan_nonnegativity(&inst.weights(), &ScanSpec::default()).nonnegative, "N={n}");
        let checks = check_closed_forms(&inst, 500, 1e-4, 1e-9, Default::default());
        assert!(checks.iter().all(|c| c.passed), "N={n}: {checks:?}");
    }
}

#[test]
fn batch_is_execution_independent() {
    use factorineq::par::Execution;
    let par = CheckOptions { corpus: 4, exec: Execution::Parallel, ..Default::default() };
    let seq = CheckOptions { exec: Execution::Sequential, ..par };
    let a: Vec<_> = check_all(&par).into_iter().map(Result::unwrap).collect();
    let b: Vec<_> = check_all(&seq).into_iter().map(Result::unwrap).collect();
    assert_eq!(a, b);
}
