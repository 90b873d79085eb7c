mod common;

use common::*;
use sobolev1d::fcurve::{self, FCurve};
use sobolev1d::fundamental::{self, Side};
use sobolev1d::green::GreenEvaluator;
use sobolev1d::minimizer::{self, SolverConfig};
use sobolev1d::Potential;

#[test]
fn frozen_values_match_closed_forms() {
    let ex = Example::new(1.0, 2.0);
    assert!((ex.m() - M_EXAMPLE).abs() < 1e-14);
    assert!((ex.m().powf(-0.5) - C_EXAMPLE).abs() < 1e-14);
    assert!((ex.a1() - A1_EXAMPLE).abs() < 1e-15);
    assert!((ex.a2() - A2_EXAMPLE).abs() < 1e-15);
    assert!((ex.phi_plus(1.0) - PHI_PLUS_AT_1).abs() < 1e-16);
    assert!((ex.phi_minus(1.0) - PHI_MINUS_AT_1).abs() < 1e-14);
    assert!((ex.f(0.0) - 32.0 / 9.0).abs() < 1e-15);
    assert!((ex.f(ex.a1()) - ex.m()).abs() < 1e-14);
    assert!((ex.phi_minus(1.0) - 13.0 * 1f64.exp().powi(2) / (9.0 * 2f64.sqrt())).abs() < 1e-13);
}

#[test]
fn closed_form_potential_matches_log_derivatives() {
    let ex = Example::new(1.3, 1.7);
    let pot = ex.potential();
    for x in linspace(-20.0, 20.0, 1000) {
        let q = x * x + 1.69;
        let ell2 = (x * x - 1.69) / (q * q);
        let via_plus = ell2 + ex.r_plus(x).powi(2);
        assert!((pot.evaluate(x) - via_plus).abs() < 1e-12, "x = {x}");
        assert!((ex.v(x) - via_plus).abs() < 1e-12);
    }
}

#[test]
fn riccati_states_match_closed_forms() {
    let ex = Example::new(1.0, 2.0);
    let pot = ex.potential();
    let (lo, hi) = fundamental::default_window(&pot);
    let (plus, minus) = fundamental::solve_pair(&pot, lo, hi, 1e-11).unwrap();
    assert_eq!(plus.side(), Side::Plus);
    assert!((plus.ell_prime(0.0).unwrap() + 2.0).abs() < 1e-9);
    assert!((minus.ell_prime(0.0).unwrap() - 14.0 / 9.0).abs() < 1e-9);
    assert_eq!(plus.ell(0.0).unwrap(), 0.0);
    assert_eq!(minus.ell(0.0).unwrap(), 0.0);
    for x in linspace(-10.0, 10.0, 401) {
        assert!((plus.ell_prime(x).unwrap() - ex.r_plus(x)).abs() < 1e-9, "x = {x}");
        assert!((minus.ell_prime(x).unwrap() - ex.r_minus(x)).abs() < 1e-9, "x = {x}");
        assert!((plus.ell(x).unwrap() - ex.phi_plus(x).ln()).abs() < 1e-9);
        assert!((minus.ell(x).unwrap() - ex.phi_minus(x).ln()).abs() < 1e-9);
    }
}

#[test]
fn curve_and_green_function_match_closed_forms() {
    let ex = Example::new(1.0, 2.0);
    let pot = ex.potential();
    let (lo, hi) = fundamental::default_window(&pot);
    let (plus, minus) = fundamental::solve_pair(&pot, lo, hi, 1e-10).unwrap();
    let curve = FCurve::build(&plus, &minus, &pot, &linspace(-12.5, 12.5, 501)).unwrap();
    for s in curve.samples() {
        assert!((s.f - ex.f(s.a)).abs() < 1e-9 * ex.f(s.a), "a = {}", s.a);
    }
    assert!((curve.samples()[0].f - 296.0 / 77.0).abs() < 1e-9);
    assert!((curve.wronskian() - 32.0 / 9.0).abs() < 1e-10);
    let g = GreenEvaluator::new(&plus, &minus).unwrap();
    assert!((g.eval(0.0, A1_EXAMPLE).unwrap() - G_AT_0_A1).abs() < 1e-10);
    assert!((g.eval(A1_EXAMPLE, A1_EXAMPLE).unwrap() - 1.0 / M_EXAMPLE).abs() < 1e-10);
    for (x, y) in [(-3.0, 1.0), (2.0, 0.5), (0.0, 0.0)] {
        let (mn, mx) = if x < y { (x, y) } else { (y, x) };
        let exact = ex.phi_minus(mn) * ex.phi_plus(mx) / (32.0 / 9.0);
        assert!((g.eval(x, y).unwrap() - exact).abs() < 1e-9 * exact);
    }
}

#[test]
fn other_parameters_reach_closed_form_minimum() {
    for (a, b) in [(1.0, 1.7), (2.0, 1.0), (0.8, 3.0)] {
        let ex = Example::new(a, b);
        let r = minimizer::minimize(&ex.potential(), &SolverConfig::default()).unwrap();
        assert!((r.m - ex.m()).abs() < 1e-8, "A = {a}, B = {b}: {} vs {}", r.m, ex.m());
        assert!((r.a_star.unwrap() - ex.a1()).abs() < 1e-6);
    }
}

#[test]
fn table_potential_reproduces_example() {
    let ex = Example::new(1.0, 2.0);
    let xs = linspace(-30.0, 30.0, 6001);
    let d1: Vec<f64> = xs.iter().map(|&x| ex.r_plus(x)).collect();
    let d2: Vec<f64> = xs.iter().map(|&x| (x * x - 1.0) / (x * x + 1.0).powi(2)).collect();
    let pot = Potential::from_log_derivative(&xs, &d1, &d2).unwrap();
    for x in linspace(-10.0, 10.0, 333) {
        assert!((pot.evaluate(x) - ex.v(x)).abs() < 1e-6, "x = {x}");
    }
    let r = minimizer::minimize(&pot, &SolverConfig::default()).unwrap();
    assert!((r.m - M_EXAMPLE).abs() < 1e-5);
    let search = fcurve::find_critical_points(
        &minimizer::run(&pot, &SolverConfig::default()).unwrap().curve,
        &pot,
        &Default::default(),
    )
    .unwrap();
    assert_eq!(search.points.len(), 1);
}
