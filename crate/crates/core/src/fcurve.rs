//! The first-step value `F(a) = min ‖u‖²_V` over `u(a) = ‖u‖_∞ = 1`, its
//! derivatives, and the search for its second-order critical points.
//!
//! Everything is expressed through the Riccati variables `r± = ℓ±'`:
//! `F = r₋ - r₊`, `F' = -F(r₊ + r₋)`, `F'' = 2F(r₊² + r₊r₋ + r₋² - V)`.

use std::fmt::Write as _;

use roots::{find_root_brent, Convergency};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundamental::{LogSolution, Side};
use crate::potential::Potential;

/// Default spacing of the evaluation grid.
pub const DEFAULT_SPACING: f64 = 0.01;
/// Shared tolerance for the equivalence of the critical-point conditions.
pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-6;

/// Everything known about `F` at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FSample {
    pub a: f64,
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub ell_plus: f64,
    pub ell_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    /// `r₊'` and `r₋'` from the continuous extension of the solutions.
    pub r_plus_slope: f64,
    pub r_minus_slope: f64,
    pub v: f64,
}

impl FSample {
    pub fn phi_plus(&self) -> f64 {
        self.ell_plus.exp()
    }

    pub fn phi_minus(&self) -> f64 {
        self.ell_minus.exp()
    }
}

/// Evaluates `F`, `F'`, `F''` at `a` directly from the solutions.
pub fn evaluate_at(plus: &LogSolution, minus: &LogSolution, a: f64) -> Result<FSample> {
    let p = plus.state(a)?;
    let m = minus.state(a)?;
    Ok(sample_from(plus.potential().evaluate(a), a, p, m))
}

fn sample_from(v: f64, a: f64, p: crate::fundamental::LogState, m: crate::fundamental::LogState) -> FSample {
    let (rp, rm) = (p.ell_prime, m.ell_prime);
    let f = rm - rp;
    FSample {
        a,
        f,
        df: -f * (rp + rm),
        d2f: 2.0 * f * (rp * rp + rp * rm + rm * rm - v),
        ell_plus: p.ell,
        ell_minus: m.ell,
        r_plus: rp,
        r_minus: rm,
        r_plus_slope: p.ell_prime_slope,
        r_minus_slope: m.ell_prime_slope,
        v,
    }
}

#[derive(Debug, Clone)]
pub struct FCurve {
    plus: LogSolution,
    minus: LogSolution,
    samples: Vec<FSample>,
    wronskian: f64,
}

/// Evenly spaced grid over the gluing-safe part of the window.
pub fn default_grid(plus: &LogSolution, spacing: f64) -> Vec<f64> {
    let (lo, hi) = plus.safe_interval();
    let n = ((hi - lo) / spacing).round().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Builds the curve on the default grid.
pub fn build_fcurve(plus: &LogSolution, minus: &LogSolution, potential: &Potential) -> Result<FCurve> {
    FCurve::build(plus, minus, potential, &default_grid(plus, DEFAULT_SPACING))
}

impl FCurve {
    pub fn build(plus: &LogSolution, minus: &LogSolution, potential: &Potential, grid: &[f64]) -> Result<Self> {
        if plus.side() != Side::Plus || minus.side() != Side::Minus {
            return Err(Error::Incompatible("expected a (plus, minus) pair of solutions".into()));
        }
        if !plus.same_problem(minus) || !plus.potential().same_profile(potential) {
            return Err(Error::Incompatible(
                "solutions belong to different potentials or windows".into(),
            ));
        }
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty evaluation grid".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("evaluation grid must be strictly increasing".into()));
        }
        let samples = grid
            .iter()
            .map(|&a| evaluate_at(plus, minus, a))
            .collect::<Result<Vec<_>>>()?;
        let wronskian = minus.ell_prime(0.0)? - plus.ell_prime(0.0)?;
        Ok(Self {
            plus: plus.clone(),
            minus: minus.clone(),
            samples,
            wronskian,
        })
    }

    pub fn samples(&self) -> &[FSample] {
        &self.samples
    }

    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.a).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f).collect()
    }

    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    pub fn plus(&self) -> &LogSolution {
        &self.plus
    }

    pub fn minus(&self) -> &LogSolution {
        &self.minus
    }

    pub fn potential(&self) -> &Potential {
        self.plus.potential()
    }

    pub fn evaluate(&self, a: f64) -> Result<FSample> {
        evaluate_at(&self.plus, &self.minus, a)
    }

    pub fn min_sample(&self) -> &FSample {
        self.samples
            .iter()
            .min_by(|x, y| x.f.total_cmp(&y.f))
            .expect("curve has at least one sample")
    }

    /// Largest `|F φ₊ φ₋ - W| / W` over the grid.
    pub fn wronskian_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| ((s.f * (s.ell_plus + s.ell_minus).exp() - self.wronskian) / self.wronskian).abs())
            .fold(0.0, f64::max)
    }

    /// Largest difference between `-F(r₊ + r₋)` and the forms
    /// `-(W F / φ₊φ₋)(h±'H± ± 1)`, with `H±` recovered from `φ∓ = W φ± H±`;
    /// scaled by `F²`.
    pub fn derivative_identity_deviation(&self) -> f64 {
        let w = self.wronskian;
        self.samples
            .iter()
            .map(|s| {
                let prod = (s.ell_plus + s.ell_minus).exp();
                let hp = 2.0 * s.r_plus * prod / w;
                let hm = 2.0 * s.r_minus * prod / w;
                let scale = w * s.f / prod;
                let via_plus = -scale * (hp + 1.0);
                let via_minus = -scale * (hm - 1.0);
                let d = (s.df - via_plus).abs().max((s.df - via_minus).abs());
                d / (s.f * s.f)
            })
            .fold(0.0, f64::max)
    }

    /// Largest difference between `F''` and `-2F'r∓ - 2Fℓ±''`, with `ℓ±''`
    /// from the continuous extension; scaled by `F³`.
    pub fn second_derivative_identity_deviation(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| !self.near_breakpoint(s.a))
            .map(|s| {
                let a = -2.0 * s.df * s.r_minus - 2.0 * s.f * s.r_plus_slope;
                let b = -2.0 * s.df * s.r_plus - 2.0 * s.f * s.r_minus_slope;
                (s.d2f - a).abs().max((s.d2f - b).abs()) / s.f.powi(3)
            })
            .fold(0.0, f64::max)
    }

    fn near_breakpoint(&self, a: f64) -> bool {
        self.potential()
            .breakpoints()
            .iter()
            .any(|b| (a - b).abs() <= 1e-12 * b.abs().max(1.0))
    }

    /// Compares `F'`, `F''` with centered differences of step `h` at the
    /// given positions.
    pub fn finite_difference_errors(&self, points: &[f64], h: f64) -> Result<FiniteDifferenceErrors> {
        let mut first = 0.0f64;
        let mut second = 0.0f64;
        for &a in points {
            let c = self.evaluate(a)?;
            let l = self.evaluate(a - h)?;
            let r = self.evaluate(a + h)?;
            first = first.max((c.df - (r.f - l.f) / (2.0 * h)).abs());
            second = second.max((c.d2f - (r.f - 2.0 * c.f + l.f) / (h * h)).abs());
        }
        Ok(FiniteDifferenceErrors { h, first, second })
    }

    /// CSV with header `a,F,dF,d2F,phi_plus,phi_minus`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,F,dF,d2F,phi_plus,phi_minus\n");
        for s in &self.samples {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                s.a,
                s.f,
                s.df,
                s.d2f,
                s.phi_plus(),
                s.phi_minus()
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteDifferenceErrors {
    pub h: f64,
    pub first: f64,
    pub second: f64,
}

/// Truth values of the four equivalent descriptions of a second-order
/// critical point at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionEvaluation {
    pub a: f64,
    /// `F'(a) = 0` and `F''(a) ≥ 0`.
    pub stationary: bool,
    /// `-ℓ₊'(a) = ℓ₋'(a) ≥ √V(a)`.
    pub condition1: bool,
    /// `h₊'H₊ = -1` and `ℓ₊'' ≤ 0`.
    pub condition2: bool,
    /// `h₋'H₋ = 1` and `ℓ₋'' ≤ 0`.
    pub condition3: bool,
}

impl ConditionEvaluation {
    pub fn consistent(&self) -> bool {
        let s = self.stationary;
        self.condition1 == s && self.condition2 == s && self.condition3 == s
    }
}

/// Evaluates the four conditions at `a`. Equalities and inequalities are
/// tested on residuals scaled by powers of `F` and compared to `tol`.
pub fn evaluate_conditions(plus: &LogSolution, minus: &LogSolution, a: f64, wronskian: f64, tol: f64) -> Result<ConditionEvaluation> {
    let s = evaluate_at(plus, minus, a)?;
    let f = s.f;
    let f2 = f * f;
    let stationary = (s.df / f2).abs() <= tol && s.d2f / (2.0 * f * f2) >= -tol;

    let condition1 = ((s.r_plus + s.r_minus) / f).abs() <= tol && s.r_minus * s.r_minus - s.v >= -tol * f2;

    let prod = (s.ell_plus + s.ell_minus).exp();
    let hh_plus = 2.0 * s.r_plus * prod / wronskian;
    let hh_minus = 2.0 * s.r_minus * prod / wronskian;
    let condition2 = (hh_plus + 1.0).abs() <= tol && s.v - s.r_plus * s.r_plus <= tol * f2;
    let condition3 = (hh_minus - 1.0).abs() <= tol && s.v - s.r_minus * s.r_minus <= tol * f2;
    Ok(ConditionEvaluation {
        a,
        stationary,
        condition1,
        condition2,
        condition3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub tol: f64,
    pub evaluations: Vec<ConditionEvaluation>,
    /// Positions where the four truth values differ.
    pub disagreements: Vec<f64>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Evaluates the four conditions at every sample. Requires a continuous
/// potential.
pub fn check_condition_equivalence(curve: &FCurve, potential: &Potential, samples: &[f64], tol: f64) -> Result<EquivalenceReport> {
    if !potential.is_continuous() {
        return Err(Error::Incompatible(
            "the equivalence of the critical-point conditions needs a continuous potential".into(),
        ));
    }
    if !curve.potential().same_profile(potential) {
        return Err(Error::Incompatible("curve was built for a different potential".into()));
    }
    let evaluations = samples
        .iter()
        .map(|&a| evaluate_conditions(&curve.plus, &curve.minus, a, curve.wronskian, tol))
        .collect::<Result<Vec<_>>>()?;
    let disagreements = evaluations.iter().filter(|e| !e.consistent()).map(|e| e.a).collect();
    Ok(EquivalenceReport {
        tol,
        evaluations,
        disagreements,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalSearchOptions {
    /// Accept a polished root when `|F'| ≤ root_tol·max(1, F)`.
    pub root_tol: f64,
    /// Keep a root when `F'' ≥ -second_tol`.
    pub second_tol: f64,
    /// Tolerance used for the condition flags.
    pub condition_tol: f64,
}

impl Default for CriticalSearchOptions {
    fn default() -> Self {
        Self {
            root_tol: 1e-9,
            second_tol: 1e-8,
            condition_tol: DEFAULT_EQUIVALENCE_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub a: f64,
    pub f_value: f64,
    pub f_second: f64,
    pub condition1: bool,
    pub condition2: bool,
    pub condition3: bool,
    /// `|F'(a)|` after polishing.
    pub refinement_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedCandidate {
    pub a: f64,
    pub f_value: f64,
    pub f_second: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSearch {
    /// `F` is constant on the grid to within the root tolerance; `points`
    /// then holds the single representative `a = 0`.
    pub flat: bool,
    pub points: Vec<CriticalPoint>,
    pub rejected: Vec<RejectedCandidate>,
    /// The potential is discontinuous, so minima were recognized by the sign
    /// pattern of `F'` rather than by `F''`.
    pub derivative_sign_only: bool,
}

struct RootConvergence {
    y_tol: f64,
}

impl Convergency<f64> for RootConvergence {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() <= self.y_tol
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= 4.0 * f64::EPSILON * x1.abs().max(1.0)
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= 200
    }
}

/// Scans `F'` on the curve's grid for sign changes and polishes each one.
///
/// Samples with `|F'| ≤ root_tol·max(1, F)` count as zero, so noise in the
/// nearly flat tails cannot produce sign changes; a critical point is a
/// transition between nonzero signs.
pub fn find_critical_points(curve: &FCurve, potential: &Potential, options: &CriticalSearchOptions) -> Result<CriticalSearch> {
    if !curve.potential().same_profile(potential) {
        return Err(Error::Incompatible("curve was built for a different potential".into()));
    }
    let derivative_sign_only = !potential.is_continuous();
    let samples = curve.samples();
    let floor = |s: &FSample| options.root_tol * s.f.abs().max(1.0);
    let sign = |s: &FSample| {
        if s.df.abs() <= floor(s) {
            0
        } else if s.df > 0.0 {
            1
        } else {
            -1
        }
    };

    let mut search = CriticalSearch {
        flat: false,
        points: Vec::new(),
        rejected: Vec::new(),
        derivative_sign_only,
    };

    if samples.iter().all(|s| sign(s) == 0) {
        search.flat = true;
        let a = if samples[0].a <= 0.0 && samples[samples.len() - 1].a >= 0.0 {
            0.0
        } else {
            samples[0].a
        };
        search.points.push(critical_point(curve, a, options)?);
        return Ok(search);
    }

    let mut last: Option<(usize, i32)> = None;
    for (i, s) in samples.iter().enumerate() {
        let sg = sign(s);
        if sg == 0 {
            continue;
        }
        if let Some((j, prev)) = last {
            if prev != sg {
                let a = polish(curve, samples[j].a, s.a, options)?;
                let cp = critical_point(curve, a, options)?;
                let minimum_by_sign = prev < 0 && sg > 0;
                let keep = if derivative_sign_only {
                    minimum_by_sign
                } else {
                    cp.f_second >= -options.second_tol
                };
                let converged = cp.refinement_residual <= options.root_tol * cp.f_value.abs().max(1.0);
                if keep && converged {
                    search.points.push(cp);
                } else {
                    let reason = if !converged {
                        format!("root polishing stalled at |F'| = {:e}", cp.refinement_residual)
                    } else if derivative_sign_only {
                        "F' changes sign from + to -".to_string()
                    } else {
                        format!("F'' = {:e} < 0", cp.f_second)
                    };
                    search.rejected.push(RejectedCandidate {
                        a,
                        f_value: cp.f_value,
                        f_second: cp.f_second,
                        reason,
                    });
                }
            }
        }
        last = Some((i, sg));
    }
    Ok(search)
}

fn polish(curve: &FCurve, lo: f64, hi: f64, options: &CriticalSearchOptions) -> Result<f64> {
    let scale = curve.evaluate(lo)?.f.abs().max(1.0);
    let mut conv = RootConvergence {
        y_tol: 1e-3 * options.root_tol * scale,
    };
    let mut failure = None;
    let root = find_root_brent(
        lo,
        hi,
        |a| match curve.evaluate(a) {
            Ok(s) => s.df,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        &mut conv,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    match root {
        Ok(a) => Ok(a),
        // bracket shrank to roundoff without meeting the y tolerance
        Err(_) => Ok(0.5 * (lo + hi)),
    }
}

fn critical_point(curve: &FCurve, a: f64, options: &CriticalSearchOptions) -> Result<CriticalPoint> {
    let s = curve.evaluate(a)?;
    let cond = evaluate_conditions(&curve.plus, &curve.minus, a, curve.wronskian, options.condition_tol)?;
    Ok(CriticalPoint {
        a,
        f_value: s.f,
        f_second: s.d2f,
        condition1: cond.condition1,
        condition2: cond.condition2,
        condition3: cond.condition3,
        refinement_residual: s.df.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental::solve_pair;
    use crate::potential::ExamplePotentialParams;

    fn curve_for(v: &Potential) -> FCurve {
        let half = 25.0 / v.lower_bound().sqrt();
        let (p, m) = solve_pair(v, -half, half, 1e-10).unwrap();
        build_fcurve(&p, &m, v).unwrap()
    }

    #[test]
    fn constant_potential_is_flat() {
        let v = Potential::constant(1.0).unwrap();
        let c = curve_for(&v);
        for s in c.samples() {
            assert!((s.f - 2.0).abs() < 1e-10);
            assert!(s.df.abs() < 1e-10 && s.d2f.abs() < 1e-9);
        }
        let cs = find_critical_points(&c, &v, &CriticalSearchOptions::default()).unwrap();
        assert!(cs.flat);
        assert_eq!(cs.points.len(), 1);
        assert_eq!(cs.points[0].a, 0.0);
        assert!(cs.points[0].condition1 && cs.points[0].condition2 && cs.points[0].condition3);
    }

    #[test]
    fn example_curve_values() {
        let v = Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap()).unwrap();
        let c = curve_for(&v);
        let s0 = c.evaluate(0.0).unwrap();
        assert!((s0.f - 32.0 / 9.0).abs() < 1e-9);
        assert_eq!(s0.f, c.wronskian());
        assert!(s0.df > 0.0);
        assert!(c.wronskian_deviation() < 1e-9);
        let edge = c.samples()[0].f;
        // closed form at a = -12.5: 296/77
        assert!((edge - 296.0 / 77.0).abs() < 1e-9);
    }

    #[test]
    fn example_critical_points() {
        let v = Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap()).unwrap();
        let c = curve_for(&v);
        let cs = find_critical_points(&c, &v, &CriticalSearchOptions::default()).unwrap();
        assert!(!cs.flat && !cs.derivative_sign_only);
        assert_eq!(cs.points.len(), 1);
        let a1 = (1.0 - 17f64.sqrt()) / 4.0;
        assert!((cs.points[0].a - a1).abs() < 1e-8);
        assert!(cs.points[0].condition1 && cs.points[0].condition2 && cs.points[0].condition3);
        assert_eq!(cs.rejected.len(), 1);
        assert!((cs.rejected[0].a - (1.0 + 17f64.sqrt()) / 4.0).abs() < 1e-8);
    }

    #[test]
    fn discontinuous_potential_uses_sign_pattern() {
        let v = Potential::piecewise_constant(vec![-1.0, 1.0], vec![2.0, 1.0, 2.0]).unwrap();
        let c = curve_for(&v);
        let cs = find_critical_points(&c, &v, &CriticalSearchOptions::default()).unwrap();
        assert!(cs.derivative_sign_only);
        assert_eq!(cs.points.len(), 1);
        assert!(cs.points[0].a.abs() < 1e-8);
        assert!(check_condition_equivalence(&c, &v, &[0.0], 1e-6).is_err());
    }

    #[test]
    fn csv_header() {
        let v = Potential::constant(1.0).unwrap();
        let c = curve_for(&v);
        let csv = c.to_csv();
        assert!(csv.starts_with("a,F,dF,d2F,phi_plus,phi_minus\n"));
        assert_eq!(csv.lines().count(), c.samples().len() + 1);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let v = Potential::constant(1.0).unwrap();
        let w = Potential::constant(1.0).unwrap();
        let (p, m) = solve_pair(&v, -25.0, 25.0, 1e-10).unwrap();
        assert!(FCurve::build(&p, &m, &w, &[0.0]).is_err());
        assert!(FCurve::build(&m, &p, &v, &[0.0]).is_err());
        assert!(FCurve::build(&p, &m, &v, &[]).is_err());
        assert!(FCurve::build(&p, &m, &v, &[30.0]).is_err());
    }
}
