use std::f64::consts::{E, PI};

use factorineq::coeff::specialize_first_order;
use factorineq::jets::{constant_map, FnMap, Interval, MapRef};
use factorineq::specials::{bessel_j, bessel_zero};
use factorineq::sturm::*;
use proptest::prelude::*;

fn half_line() -> Interval {
    Interval::new(0.0, f64::INFINITY)
}

fn interval_problem() -> SturmProblem {
    let d = half_line();
    let g = FnMap::new(d, |x| Ok(x.powi(-2)? * (0.25 + PI * PI))).shared();
    SturmProblem::new(constant_map(d, 1.0), g, 1.0, E, Start::Exponent(1.0)).unwrap()
}

#[test]
fn linear_solution_from_the_left_end() {
    let d = Interval::real_line();
    let prob = SturmProblem::new(constant_map(d, 1.0), constant_map(d, 0.0), -1.0, 3.0, Start::Values { u: 0.0, du: 1.0 })
        .unwrap()
        .with_start_offset(0.0);
    let sol = solve_sturm(&prob).unwrap();
    for x in [-0.5, 0.0, 1.7, 2.9] {
        assert!((sol.state_at(x).unwrap().0 - (x + 1.0)).abs() < 1e-13);
    }
    // a0 = -1/(x - a) and the weight is identically zero
    let a1 = constant_map(d, 1.0);
    let a0 = construct_a0(a1.clone(), &sol).unwrap();
    let w = specialize_first_order(a0.clone(), a1);
    for x in [-0.5, 0.5, 2.0] {
        assert!((a0.value(x).unwrap() + 1.0 / (x + 1.0)).abs() < 1e-9);
        assert!(w.value(x).unwrap().abs() < 1e-8);
    }
}

#[test]
fn interval_hardy_example() {
    let sol = solve_sturm(&interval_problem()).unwrap();
    assert_eq!(sol.verdict, Positivity::BoundaryZero);
    // u proportional to sqrt(x) sin(pi ln x)
    let exact = |x: f64| x.sqrt() * (PI * x.ln()).sin();
    let k = sol.state_at(1.5).unwrap().0 / exact(1.5);
    for x in [1.1, 1.4, 2.0, 2.5, 2.7] {
        let u = sol.state_at(x).unwrap().0;
        assert!((u - k * exact(x)).abs() <= 1e-8 * k.abs(), "x={x}");
    }
    let a0 = construct_a0(constant_map(half_line(), 1.0), &sol).unwrap();
    let at = E.sqrt();
    assert!((a0.value(at).unwrap() + E.powf(-0.5) / 2.0).abs() < 1e-9);
}

#[test]
fn ode_residual_on_dense_output() {
    let sol = solve_sturm(&interval_problem()).unwrap();
    let g = |x: f64| (0.25 + PI * PI) / (x * x);
    let max_gu = sol.nodes.iter().map(|n| (g(n.x) * n.u).abs()).fold(0.0, f64::max);
    let h = 1e-2;
    let v = |x: f64| sol.state_at(x).unwrap().1;
    for w in sol.nodes.windows(2) {
        let x = 0.5 * (w[0].x + w[1].x);
        if x - 2.0 * h < sol.start() || x + 2.0 * h > sol.end() {
            continue;
        }
        let dv = (-v(x + 2.0 * h) + 8.0 * v(x + h) - 8.0 * v(x - h) + v(x - 2.0 * h)) / (12.0 * h);
        let res = -dv - g(x) * sol.state_at(x).unwrap().0;
        assert!(res.abs() <= 1e-7 * max_gu, "x={x}: {res}");
    }
}

fn bessel_setup(gamma: f64, mu: f64, nu: f64, b: f64) -> (MapRef, MapRef, f64, impl Fn(f64) -> f64) {
    let d = half_line();
    let kappa = (2.0 + mu - gamma) / 2.0;
    let j = bessel_zero(nu, 1).unwrap();
    let c = (j * kappa / b.powf(kappa)).powi(2);
    let k0 = ((1.0 - gamma).powi(2) - 4.0 * kappa * kappa * nu * nu) / 4.0;
    let p = FnMap::new(d, move |x| x.powf(gamma)).shared();
    let g = FnMap::new(d, move |x| Ok(x.powf(gamma - 2.0)? * k0 + x.powf(mu)? * c)).shared();
    let sigma = (1.0 - gamma) / 2.0 + kappa * nu;
    let u1 = move |x: f64| x.powf((1.0 - gamma) / 2.0) * bessel_j(nu, c.sqrt() * x.powf(kappa) / kappa).unwrap();
    (p, g, sigma, u1)
}

#[test]
fn bessel_form_solution() {
    for (gamma, mu, nu, b) in [(0.5, 1.0, 0.2, 1.0), (0.0, 0.0, 0.0, 2.0), (-1.0, 0.5, 0.4, 1.5)] {
        let (p, g, sigma, u1) = bessel_setup(gamma, mu, nu, b);
        let sol = solve_sturm(&SturmProblem::new(p, g, 0.0, b, Start::Exponent(sigma)).unwrap()).unwrap();
        assert_eq!(sol.verdict, Positivity::BoundaryZero, "{gamma} {mu} {nu}");
        let xs: Vec<f64> = (1..10).map(|i| b * i as f64 / 10.0).collect();
        let k = sol.state_at(xs[4]).unwrap().0 / u1(xs[4]);
        let scale = xs.iter().map(|&x| u1(x).abs()).fold(0.0, f64::max);
        for &x in &xs {
            let u = sol.state_at(x).unwrap().0 / k;
            assert!((u - u1(x)).abs() <= 1e-6 * scale, "({gamma},{mu},{nu}) x={x}: {u} vs {}", u1(x));
        }
    }
}

#[test]
fn round_trip_reproduces_g() {
    let gamma = 0.5;
    let (p, g, sigma, _) = bessel_setup(gamma, 1.0, 0.2, 1.0);
    let sol = solve_sturm(&SturmProblem::new(p, g.clone(), 0.0, 1.0, Start::Exponent(sigma)).unwrap()).unwrap();
    let a1 = FnMap::new(half_line(), move |x| x.powf(gamma / 2.0)).shared();
    let a0 = construct_a0(a1.clone(), &sol).unwrap();
    let w = specialize_first_order(a0, a1);
    for i in 1..100 {
        let x = 0.01 + 0.98 * i as f64 / 100.0;
        let (got, want) = (w.value(x).unwrap(), g.value(x).unwrap());
        assert!((got - want).abs() <= 1e-6 * (1.0 + want.abs()), "x={x}: {got} vs {want}");
    }
}

#[test]
fn hardy_power_recovers_classical_a0() {
    // u = x^{(1-gamma)/2}: a0 = ((gamma-1)/2) x^{gamma/2 - 1}
    let d = half_line();
    for gamma in [-1.0f64, 0.0, 0.5] {
        let k = (1.0 - gamma).powi(2) / 4.0;
        let p = FnMap::new(d, move |x| x.powf(gamma)).shared();
        let g = FnMap::new(d, move |x| Ok(x.powf(gamma - 2.0)? * k)).shared();
        let sol = solve_sturm(&SturmProblem::new(p, g, 0.0, 2.0, Start::Exponent((1.0 - gamma) / 2.0)).unwrap()).unwrap();
        assert!(sol.verdict.is_positive());
        let a1 = FnMap::new(d, move |x| x.powf(gamma / 2.0)).shared();
        let a0 = construct_a0(a1, &sol).unwrap();
        for x in [0.1f64, 0.7, 1.9] {
            let want = (gamma - 1.0) / 2.0 * x.powf(gamma / 2.0 - 1.0);
            assert!((a0.value(x).unwrap() - want).abs() <= 1e-8 * want.abs().max(1.0), "gamma={gamma} x={x}");
        }
    }
}

#[test]
fn rescaling_u_leaves_a0_unchanged() {
    let prob = interval_problem();
    let eps = prob.start_offset;
    let a1 = constant_map(half_line(), 1.0);
    let base = construct_a0(a1.clone(), &solve_sturm(&prob).unwrap()).unwrap();
    let mut scaled = prob.clone();
    scaled.start = Start::Values { u: 7.5 * eps, du: 7.5 };
    let other = construct_a0(a1, &solve_sturm(&scaled).unwrap()).unwrap();
    for x in [1.2, 1.9, 2.5] {
        let (a, b) = (base.eval(x, 3).unwrap(), other.eval(x, 3).unwrap());
        for k in 0..=3 {
            assert!((a.deriv(k) - b.deriv(k)).abs() <= 1e-8 * a.deriv(k).abs().max(1.0));
        }
    }
}

#[test]
fn construct_rejects_zero_at_start() {
    let d = Interval::real_line();
    let prob = SturmProblem::new(constant_map(d, 1.0), constant_map(d, 0.0), 0.0, 1.0, Start::Values { u: 0.0, du: 1.0 })
        .unwrap()
        .with_start_offset(0.0);
    let sol = solve_sturm(&prob).unwrap();
    let a0 = construct_a0(constant_map(d, 1.0), &sol).unwrap();
    assert!(a0.value(0.0).is_err());
}

#[test]
fn hi_check_bessel_threshold() {
    let j01 = bessel_zero(0.0, 1).unwrap();
    for r in [1.0, 2.5] {
        let one = constant_map(half_line(), 1.0);
        let c = (j01 / r).powi(2);
        let rep = hi_potential_check(one.clone(), c, r).unwrap();
        assert_eq!(rep.verdict, Positivity::BoundaryZero);
        assert!(rep.verdict.is_positive());
        for i in 1..10 {
            let x = r * i as f64 / 10.0;
            let y = rep.solution.state_at(x).unwrap().0;
            assert!((y - bessel_j(0.0, j01 * x / r).unwrap()).abs() < 1e-8, "x={x}");
        }
        let rep = hi_potential_check(one.clone(), 1.1 * c, r).unwrap();
        match rep.verdict {
            Positivity::SignChange { at } => {
                assert!((at - r / 1.1f64.sqrt()).abs() < 1e-8, "{at}");
                assert!(rep.solution.state_at(at).unwrap().0.abs() < 1e-10);
                assert!(rep.solution.state_at(at - 1e-6).unwrap().0 > 0.0);
                assert!(rep.solution.state_at(at + 1e-6).unwrap().0 < 0.0);
            }
            v => panic!("{v:?}"),
        }
        assert_eq!(hi_potential_check(one, 1e-6, r).unwrap().verdict, Positivity::Positive);
    }
}

#[test]
fn critical_constant_is_bessel_zero_squared() {
    let one = constant_map(half_line(), 1.0);
    let j01 = bessel_zero(0.0, 1).unwrap();
    let c = critical_c(|c| hi_potential_check(one.clone(), c, 1.0), 1.0).unwrap();
    assert!((c - j01 * j01).abs() < 1e-8 * j01 * j01, "{c}");
}

#[test]
fn bessel_pair_reductions() {
    let d = half_line();
    let one = constant_map(d, 1.0);
    let x = FnMap::new(d, |x| Ok(*x)).shared();
    let p_pot = FnMap::new(d, |x| Ok(x.add_const(1.0).recip()? * 2.0)).shared();
    for c in [1.0, 3.0, 6.0] {
        // k = 2, V = 1 is the HI equation
        let hi = hi_potential_check(p_pot.clone(), c, 1.0).unwrap();
        let bp = bessel_pair_check(one.clone(), p_pot.clone(), 2, c, 1.0).unwrap();
        assert_eq!(hi.verdict, bp.verdict);
        for t in [0.2, 0.5, 0.9] {
            let (a, b) = (hi.solution.state_at(t).unwrap().0, bp.solution.state_at(t).unwrap().0);
            assert!((a - b).abs() < 1e-12);
        }
        // r^0 * x = r^1 * 1
        let k1 = bessel_pair_check(x.clone(), x.clone(), 1, c, 1.0).unwrap();
        let k2 = bessel_pair_check(one.clone(), one.clone(), 2, c, 1.0).unwrap();
        assert_eq!(k1.verdict.is_positive(), k2.verdict.is_positive());
    }
    let j01 = bessel_zero(0.0, 1).unwrap();
    let rep = bessel_pair_check(one.clone(), one, 2, j01 * j01, 1.0).unwrap();
    assert_eq!(rep.verdict, Positivity::BoundaryZero);
}

#[test]
fn alt_construction_recovers_hardy() {
    let d = half_line();
    let a0 = FnMap::new(d, |x| Ok(x.recip()? * -0.5)).shared();
    let g = FnMap::new(d, |x| Ok(x.powi(-2)? * 0.25)).shared();
    let a1 = alt_construct_a1(a0.clone(), g.clone(), 1.0, -0.5).unwrap();
    for x in [0.2, 1.0, 3.0, 10.0] {
        let j = a1.eval(x, 2).unwrap();
        assert!((j.value() - 1.0).abs() < 1e-10, "x={x}: {}", j.value());
        assert!(j.deriv(1).abs() < 1e-10 && j.deriv(2).abs() < 1e-9);
    }
}

#[test]
fn alt_construction_rejects_vanishing_a0() {
    let d = Interval::real_line();
    let a0 = FnMap::new(d, |x| Ok(*x)).shared();
    let a1 = alt_construct_a1(a0, constant_map(d, 1.0), 1.0, 0.0).unwrap();
    assert!(a1.value(0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alt_construction_round_trip(
        a in 0.5f64..2.0, s in -0.4f64..0.4, w in 0.3f64..2.0,
        g0 in -1.0f64..1.0, g1 in -1.0f64..1.0, cst in -1.0f64..1.0,
        x in -1.5f64..1.5,
    ) {
        let d = Interval::real_line();
        let a0 = FnMap::new(d, move |x| Ok((*x * w).sin()? * (a * s) + a)).shared();
        let g = FnMap::new(d, move |x| Ok(x.square() * g1 + g0)).shared();
        let a1 = alt_construct_a1(a0.clone(), g.clone(), 0.1, cst).unwrap();
        let c10 = specialize_first_order(a0, a1);
        let (got, want) = (c10.value(x).unwrap(), g.value(x).unwrap());
        prop_assert!((got - want).abs() <= 1e-6 * (1.0 + want.abs()));
    }
}
