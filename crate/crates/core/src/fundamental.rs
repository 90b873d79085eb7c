//! Decaying fundamental solutions of `-u'' + V u = 0`, stored in log space.
//!
//! With `ℓ = log φ` and `r = ℓ'` the equation becomes the Riccati equation
//! `r' = V - r²`. The solution decaying at `+∞` is integrated backward from
//! the right edge of the window and the one decaying at `-∞` forward from
//! the left edge; in those directions the decaying branch is attracting, so
//! the error of seeding with the local exponential rate dies off like
//! `exp(-2√v0·distance)`.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, DenseSegment, StepControl};
use crate::potential::Potential;

/// Required value of `√v0·min(|x_min|, x_max)`.
pub const MIN_DECAY_MARGIN: f64 = 20.0;
/// Half-width of the default window in units of `1/√v0`.
pub const DEFAULT_WINDOW_SCALE: f64 = 25.0;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-6;
/// Default distance (in units of `1/√v0`) kept between a gluing point and
/// the window edges.
pub const SAFE_INSET_SCALE: f64 = 12.5;

const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Decays at `+∞`.
    Plus,
    /// Decays at `-∞`.
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Default window `[-25/√v0, 25/√v0]`.
pub fn default_window(potential: &Potential) -> (f64, f64) {
    let half = DEFAULT_WINDOW_SCALE / potential.lower_bound().sqrt();
    (-half, half)
}

/// Validates a window and tolerance against the solver preconditions.
pub fn validate_window(potential: &Potential, x_min: f64, x_max: f64, tol: f64) -> Result<()> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::ToleranceOutOfRange(tol));
    }
    if !(x_min < 0.0 && 0.0 < x_max) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidWindow {
            x_min,
            x_max,
            reason: "window must satisfy x_min < 0 < x_max".into(),
        });
    }
    let margin = potential.lower_bound().sqrt() * x_min.abs().min(x_max);
    if margin < MIN_DECAY_MARGIN {
        return Err(Error::InsufficientMargin {
            margin,
            required: MIN_DECAY_MARGIN,
        });
    }
    Ok(())
}

#[derive(Debug)]
struct Inner {
    side: Side,
    potential: Potential,
    x_min: f64,
    x_max: f64,
    tol: f64,
    // ascending in x
    segments: Vec<DenseSegment<2>>,
    ell_shift: f64,
}

/// `ℓ = log φ` and `r = ℓ'` for one decaying solution, normalized so that
/// `ℓ(0) = 0`. Cheap to clone.
#[derive(Debug, Clone)]
pub struct LogSolution {
    inner: Arc<Inner>,
}

/// Local state of a [`LogSolution`] at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogState {
    pub ell: f64,
    /// `r = ℓ'`
    pub ell_prime: f64,
    /// `r'` from differentiating the continuous extension.
    pub ell_prime_slope: f64,
}

/// Outcome of [`LogSolution::check_invariants`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub points_checked: usize,
    /// Grid points where `r` leaves its admissible band.
    pub riccati_band_violations: Vec<f64>,
    /// Grid points where `φ` leaves its exponential envelope.
    pub envelope_violations: Vec<f64>,
    /// Largest `|r' + r² - V|` at step midpoints.
    pub max_riccati_residual: f64,
    pub normalization_error: f64,
}

impl InvariantReport {
    pub fn passed(&self, residual_tol: f64) -> bool {
        self.riccati_band_violations.is_empty()
            && self.envelope_violations.is_empty()
            && self.max_riccati_residual <= residual_tol
            && self.normalization_error == 0.0
    }
}

/// Convenience wrapper around [`LogSolution::solve`].
pub fn solve_log_solution(potential: &Potential, side: Side, x_min: f64, x_max: f64, tol: f64) -> Result<LogSolution> {
    LogSolution::solve(potential, side, x_min, x_max, tol)
}

impl LogSolution {
    pub fn solve(potential: &Potential, side: Side, x_min: f64, x_max: f64, tol: f64) -> Result<Self> {
        validate_window(potential, x_min, x_max, tol)?;
        let v0 = potential.lower_bound();
        let v1 = potential.upper_bound();
        let r_cap = 8.0 * (v1 / v0.sqrt() + v1.sqrt());

        let mut cuts: Vec<f64> = potential
            .breakpoints()
            .iter()
            .copied()
            .filter(|b| *b > x_min && *b < x_max && *b != 0.0)
            .collect();
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        let mut nodes = Vec::with_capacity(cuts.len() + 2);
        nodes.push(x_min);
        nodes.extend(cuts);
        nodes.push(x_max);

        let control = StepControl {
            rtol: [tol, 0.0],
            atol: [tol, tol],
            // the continuous extension, not the error estimate, limits the step here
            max_step: 0.1 / v1.sqrt(),
            max_steps: MAX_STEPS,
        };

        let mut segments = Vec::new();
        let mut h_guess = None;
        let (mut y, pieces): ([f64; 2], Vec<(f64, f64)>) = match side {
            Side::Plus => {
                let seed = -potential.evaluate_within(x_max, x_min, x_max).sqrt();
                let pieces = nodes.windows(2).rev().map(|w| (w[1], w[0])).collect();
                ([seed, 0.0], pieces)
            }
            Side::Minus => {
                let seed = potential.evaluate_within(x_min, x_min, x_max).sqrt();
                let pieces = nodes.windows(2).map(|w| (w[0], w[1])).collect();
                ([seed, 0.0], pieces)
            }
        };
        for (from, to) in pieces {
            let (lo, hi) = (from.min(to), from.max(to));
            let rhs = |x: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
                let r = s[0];
                if !(r.abs() <= r_cap) {
                    return Err(Error::RiccatiBlowUp { x, r });
                }
                Ok([potential.evaluate_within(x, lo, hi) - r * r, r])
            };
            let (end, h) = ode::integrate(rhs, from, to, y, h_guess, &control, &mut segments)?;
            y = end;
            h_guess = Some(h);
        }
        if side == Side::Plus {
            segments.reverse();
        }
        let mut sol = Inner {
            side,
            potential: potential.clone(),
            x_min,
            x_max,
            tol,
            segments,
            ell_shift: 0.0,
        };
        let (raw, _) = sol.raw(0.0);
        sol.ell_shift = raw[1];
        Ok(Self { inner: Arc::new(sol) })
    }

    pub fn side(&self) -> Side {
        self.inner.side
    }

    pub fn potential(&self) -> &Potential {
        &self.inner.potential
    }

    pub fn x_min(&self) -> f64 {
        self.inner.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.inner.x_max
    }

    pub fn tol(&self) -> f64 {
        self.inner.tol
    }

    /// `√v0·min(|x_min|, x_max)`.
    pub fn domain_margin(&self) -> f64 {
        self.inner.potential.lower_bound().sqrt() * self.inner.x_min.abs().min(self.inner.x_max)
    }

    /// Accepted step nodes, ascending, including both window edges.
    pub fn grid(&self) -> Vec<f64> {
        let segs = &self.inner.segments;
        let mut g: Vec<f64> = segs.iter().map(|s| s.lo()).collect();
        if let Some(last) = segs.last() {
            g.push(last.hi());
        }
        g
    }

    /// Interval of gluing points kept `12.5/√v0` away from both edges.
    pub fn safe_interval(&self) -> (f64, f64) {
        let d = SAFE_INSET_SCALE / self.inner.potential.lower_bound().sqrt();
        (self.inner.x_min + d, self.inner.x_max - d)
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if x >= self.inner.x_min && x <= self.inner.x_max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                x,
                lo: self.inner.x_min,
                hi: self.inner.x_max,
            })
        }
    }

    pub fn state(&self, x: f64) -> Result<LogState> {
        self.check_range(x)?;
        Ok(self.state_unchecked(x))
    }

    pub(crate) fn state_unchecked(&self, x: f64) -> LogState {
        let (y, dy) = self.inner.raw(x);
        LogState {
            ell: y[1] - self.inner.ell_shift,
            ell_prime: y[0],
            ell_prime_slope: dy[0],
        }
    }

    pub fn ell(&self, x: f64) -> Result<f64> {
        Ok(self.state(x)?.ell)
    }

    pub fn ell_prime(&self, x: f64) -> Result<f64> {
        Ok(self.state(x)?.ell_prime)
    }

    /// `ℓ'' = V - (ℓ')²`, evaluated algebraically.
    pub fn ell_double_prime(&self, x: f64) -> Result<f64> {
        let r = self.ell_prime(x)?;
        Ok(self.inner.potential.evaluate(x) - r * r)
    }

    pub fn evaluate_phi(&self, x: f64) -> Result<f64> {
        Ok(self.ell(x)?.exp())
    }

    /// `|r' + r² - V|` with `r'` taken from the continuous extension.
    pub fn riccati_residual(&self, x: f64) -> Result<f64> {
        let s = self.state(x)?;
        Ok((s.ell_prime_slope + s.ell_prime * s.ell_prime - self.inner.potential.evaluate(x)).abs())
    }

    /// Admissible band for `r` implied by the bounds of `V`.
    pub fn riccati_band(&self) -> (f64, f64) {
        let v0 = self.inner.potential.lower_bound();
        let v1 = self.inner.potential.upper_bound();
        match self.inner.side {
            Side::Plus => (-v1 / v0.sqrt(), -v0 / v1.sqrt()),
            Side::Minus => (v0 / v1.sqrt(), v1 / v0.sqrt()),
        }
    }

    /// Log of the lower and upper exponential envelopes of `φ` at `x`.
    pub fn log_envelope(&self, x: f64) -> (f64, f64) {
        let s0 = self.inner.potential.lower_bound().sqrt();
        let s1 = self.inner.potential.upper_bound().sqrt();
        let t = self.inner.side.sign() * x;
        let half_log_ratio = (s1 / s0).ln();
        (-half_log_ratio - (s0 * t).max(s1 * t), half_log_ratio - (s0 * t).min(s1 * t))
    }

    /// Checks the Riccati band and exponential envelope at every step node
    /// and the Riccati residual at every step midpoint.
    pub fn check_invariants(&self) -> InvariantReport {
        let tol = self.inner.tol;
        let (r_lo, r_hi) = self.riccati_band();
        let mut band = Vec::new();
        let mut envelope = Vec::new();
        let grid = self.grid();
        for &x in &grid {
            let s = self.state_unchecked(x);
            let slack = tol * (1.0 + s.ell_prime.abs());
            if s.ell_prime < r_lo - slack || s.ell_prime > r_hi + slack {
                band.push(x);
            }
            let (lo, hi) = self.log_envelope(x);
            let slack = tol * (1.0 + s.ell.abs()) * 10.0;
            if s.ell < lo - slack || s.ell > hi + slack {
                envelope.push(x);
            }
        }
        let max_riccati_residual = self
            .inner
            .segments
            .iter()
            .map(|seg| {
                let x = seg.x0 + 0.5 * seg.h;
                let s = self.state_unchecked(x);
                let (lo, hi) = (seg.lo(), seg.hi());
                let v = self.inner.potential.evaluate_within(x, lo, hi);
                (s.ell_prime_slope + s.ell_prime * s.ell_prime - v).abs()
            })
            .fold(0.0, f64::max);
        InvariantReport {
            points_checked: grid.len(),
            riccati_band_violations: band,
            envelope_violations: envelope,
            max_riccati_residual,
            normalization_error: self.state_unchecked(0.0).ell.abs(),
        }
    }

    /// CSV rows `x,ell,ell_prime,phi` at the given positions.
    pub fn to_csv(&self, xs: &[f64]) -> Result<String> {
        let mut out = String::from("x,ell,ell_prime,phi\n");
        for &x in xs {
            let s = self.state(x)?;
            writeln!(out, "{:e},{:e},{:e},{:e}", x, s.ell, s.ell_prime, s.ell.exp()).unwrap();
        }
        Ok(out)
    }

    pub(crate) fn same_problem(&self, other: &LogSolution) -> bool {
        self.inner.potential.same_profile(&other.inner.potential)
            && self.inner.x_min == other.inner.x_min
            && self.inner.x_max == other.inner.x_max
    }
}

impl Inner {
    fn raw(&self, x: f64) -> ([f64; 2], [f64; 2]) {
        let idx = self
            .segments
            .partition_point(|s| s.lo() <= x)
            .saturating_sub(1)
            .min(self.segments.len() - 1);
        self.segments[idx].eval(x)
    }
}

/// Solves both sides on the same window.
pub fn solve_pair(potential: &Potential, x_min: f64, x_max: f64, tol: f64) -> Result<(LogSolution, LogSolution)> {
    let plus = LogSolution::solve(potential, Side::Plus, x_min, x_max, tol)?;
    let minus = LogSolution::solve(potential, Side::Minus, x_min, x_max, tol)?;
    Ok((plus, minus))
}

/// The first-step minimizer `u_a`: `φ₋` normalized at `a` to the left of
/// `a`, `φ₊` normalized at `a` to the right.
#[derive(Debug, Clone)]
pub struct ExtremalFunction {
    a: f64,
    plus: LogSolution,
    minus: LogSolution,
    ell_plus_a: f64,
    ell_minus_a: f64,
}

/// Result of checking `e^{-√v1|x-a|} ≤ u_a(x) ≤ e^{-√v0|x-a|}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub points_checked: usize,
    pub violations: Vec<f64>,
    pub max_value: f64,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn extremal_function(phi_plus: &LogSolution, phi_minus: &LogSolution, a: f64) -> Result<ExtremalFunction> {
    ExtremalFunction::new(phi_plus, phi_minus, a)
}

impl ExtremalFunction {
    pub fn new(phi_plus: &LogSolution, phi_minus: &LogSolution, a: f64) -> Result<Self> {
        if phi_plus.side() != Side::Plus || phi_minus.side() != Side::Minus {
            return Err(Error::Incompatible("expected a (plus, minus) pair of solutions".into()));
        }
        if !phi_plus.same_problem(phi_minus) {
            return Err(Error::Incompatible(
                "solutions belong to different potentials or windows".into(),
            ));
        }
        let (lo, hi) = phi_plus.safe_interval();
        if !(a >= lo && a <= hi) {
            return Err(Error::OutOfRange { x: a, lo, hi });
        }
        Ok(Self {
            a,
            ell_plus_a: phi_plus.state_unchecked(a).ell,
            ell_minus_a: phi_minus.state_unchecked(a).ell,
            plus: phi_plus.clone(),
            minus: phi_minus.clone(),
        })
    }

    pub fn center(&self) -> f64 {
        self.a
    }

    pub fn window(&self) -> (f64, f64) {
        (self.plus.x_min(), self.plus.x_max())
    }

    pub fn potential(&self) -> &Potential {
        self.plus.potential()
    }

    /// `log u_a(x)`.
    pub fn log_value(&self, x: f64) -> Result<f64> {
        if x < self.a {
            Ok(self.minus.ell(x)? - self.ell_minus_a)
        } else {
            Ok(self.plus.ell(x)? - self.ell_plus_a)
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.log_value(x)?.exp())
    }

    /// `u_a'(x)`; at `x = a` this is the right derivative.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let (sol, shift) = if x < self.a {
            (&self.minus, self.ell_minus_a)
        } else {
            (&self.plus, self.ell_plus_a)
        };
        let s = sol.state(x)?;
        Ok((s.ell - shift).exp() * s.ell_prime)
    }

    /// Checks the two-sided exponential envelope on `grid`.
    pub fn check_decay_bounds(&self, grid: &[f64]) -> Result<DecayReport> {
        let s0 = self.potential().lower_bound().sqrt();
        let s1 = self.potential().upper_bound().sqrt();
        let tol = self.plus.tol();
        let mut violations = Vec::new();
        let mut max_value = 0.0f64;
        for &x in grid {
            let lu = self.log_value(x)?;
            max_value = max_value.max(lu.exp());
            let d = (x - self.a).abs();
            let slack = 10.0 * tol * (1.0 + lu.abs());
            if lu < -s1 * d - slack || lu > -s0 * d + slack {
                violations.push(x);
            }
        }
        Ok(DecayReport {
            points_checked: grid.len(),
            violations,
            max_value,
        })
    }
}

/// Pointwise comparison `u_a(·; V) ≥ u_a(·; Ṽ)` for `V ≤ Ṽ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Grid points where `V ≤ Ṽ` fails.
    pub precondition_violations: Vec<f64>,
    /// `(x, u_a(x; V) - u_a(x; Ṽ))`.
    pub margins: Vec<(f64, f64)>,
    pub tol: f64,
}

impl ComparisonReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.precondition_violations.is_empty() && self.min_margin() >= -self.tol
    }
}

pub fn check_comparison(
    v: &Potential,
    v_tilde: &Potential,
    a: f64,
    grid: &[f64],
    tol: f64,
) -> Result<ComparisonReport> {
    let precondition_violations: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&x| v.evaluate(x) > v_tilde.evaluate(x))
        .collect();
    let v0 = v.lower_bound().min(v_tilde.lower_bound());
    let half = DEFAULT_WINDOW_SCALE / v0.sqrt();
    let (p, m) = solve_pair(v, -half, half, tol)?;
    let (pt, mt) = solve_pair(v_tilde, -half, half, tol)?;
    let u = ExtremalFunction::new(&p, &m, a)?;
    let ut = ExtremalFunction::new(&pt, &mt, a)?;
    let margins = grid
        .iter()
        .map(|&x| Ok((x, u.value(x)? - ut.value(x)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        precondition_violations,
        margins,
        tol: 100.0 * tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GluingReport {
    pub points_checked: usize,
    pub max_residual: f64,
}

/// Checks `u_a = u_b / u_b(a)` left of `a` and `u_b = u_a / u_a(b)` right of
/// `b`, for `a ≤ b`, on the sampled positions. Between `a` and `b` the second
/// relation does not hold (`u_b` follows `φ₋` there, `u_a` follows `φ₊`).
pub fn check_gluing(
    phi_plus: &LogSolution,
    phi_minus: &LogSolution,
    a: f64,
    b: f64,
    samples: &[f64],
) -> Result<GluingReport> {
    if a > b {
        return Err(Error::InvalidArgument(format!("gluing check needs a <= b, got {a} > {b}")));
    }
    let ua = ExtremalFunction::new(phi_plus, phi_minus, a)?;
    let ub = ExtremalFunction::new(phi_plus, phi_minus, b)?;
    let ub_a = ub.value(a)?;
    let ua_b = ua.value(b)?;
    let mut max_residual = 0.0f64;
    for &x in samples {
        if x <= a {
            max_residual = max_residual.max((ua.value(x)? - ub.value(x)? / ub_a).abs());
        }
        if x >= b {
            max_residual = max_residual.max((ub.value(x)? - ua.value(x)? / ua_b).abs());
        }
    }
    Ok(GluingReport {
        points_checked: samples.len(),
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ExamplePotentialParams;

    fn example() -> Potential {
        Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap()).unwrap()
    }

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_potential_is_exponential() {
        let v = Potential::constant(1.0).unwrap();
        let s = LogSolution::solve(&v, Side::Plus, -25.0, 25.0, 1e-10).unwrap();
        for x in linspace(-25.0, 25.0, 301) {
            let st = s.state(x).unwrap();
            assert!((st.ell_prime + 1.0).abs() < 1e-12);
            assert!((st.ell + x).abs() < 1e-9, "x={x} ell={}", st.ell);
        }
        assert_eq!(s.ell(0.0).unwrap(), 0.0);
        assert!((s.evaluate_phi(2.0).unwrap() - (-2f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn example_riccati_values_at_origin() {
        let v = example();
        let (p, m) = solve_pair(&v, -25.0, 25.0, 1e-10).unwrap();
        assert!((p.ell_prime(0.0).unwrap() + 2.0).abs() < 1e-9);
        assert!((m.ell_prime(0.0).unwrap() - 14.0 / 9.0).abs() < 1e-9);
        assert_eq!(m.ell(0.0).unwrap(), 0.0);
        let phi = p.evaluate_phi(1.0).unwrap();
        assert!((phi - (-2f64).exp() / 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_windows() {
        let v = Potential::constant(1.0).unwrap();
        assert!(matches!(
            LogSolution::solve(&v, Side::Plus, -10.0, 25.0, 1e-10),
            Err(Error::InsufficientMargin { .. })
        ));
        assert!(matches!(
            LogSolution::solve(&v, Side::Plus, 1.0, 25.0, 1e-10),
            Err(Error::InvalidWindow { .. })
        ));
        assert!(matches!(
            LogSolution::solve(&v, Side::Plus, -25.0, 25.0, 1e-3),
            Err(Error::ToleranceOutOfRange(_))
        ));
        let s = LogSolution::solve(&v, Side::Plus, -25.0, 25.0, 1e-10).unwrap();
        assert!(matches!(s.ell(26.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn invariants_hold_for_example() {
        let v = example();
        for side in [Side::Plus, Side::Minus] {
            let s = LogSolution::solve(&v, side, -25.0, 25.0, 1e-10).unwrap();
            let rep = s.check_invariants();
            assert!(rep.passed(1e-9), "{side:?}: {rep:?}");
        }
    }

    #[test]
    fn piecewise_constant_splits_at_breakpoints() {
        let v = Potential::piecewise_constant(vec![-1.0, 2.0], vec![3.0, 1.0, 2.0]).unwrap();
        let (p, m) = solve_pair(&v, -25.0, 25.0, 1e-10).unwrap();
        assert!(p.grid().contains(&-1.0) && p.grid().contains(&2.0));
        // r is exactly -√V right of the last breakpoint
        assert!((p.ell_prime(10.0).unwrap() + 2f64.sqrt()).abs() < 1e-12);
        assert!((m.ell_prime(-10.0).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!(p.check_invariants().passed(1e-9));
        assert!(m.check_invariants().passed(1e-9));
    }

    #[test]
    fn extremal_function_for_constant_potential() {
        let v = Potential::constant(1.0).unwrap();
        let (p, m) = solve_pair(&v, -25.0, 25.0, 1e-10).unwrap();
        let u = extremal_function(&p, &m, 0.5).unwrap();
        assert_eq!(u.value(0.5).unwrap(), 1.0);
        for x in linspace(-20.0, 20.0, 173) {
            assert!((u.value(x).unwrap() - (-(x - 0.5f64).abs()).exp()).abs() < 1e-9);
        }
        assert!((u.derivative(0.0).unwrap() - (-0.5f64).exp()).abs() < 1e-9);
        assert!(u.check_decay_bounds(&linspace(-25.0, 25.0, 500)).unwrap().passed());
        assert!(extremal_function(&p, &m, 20.0).is_err());
        assert!(extremal_function(&m, &p, 0.0).is_err());
    }

    #[test]
    fn gluing_for_constant_potential() {
        let v = Potential::constant(1.0).unwrap();
        let (p, m) = solve_pair(&v, -25.0, 25.0, 1e-10).unwrap();
        let u0 = extremal_function(&p, &m, 0.0).unwrap();
        let u1 = extremal_function(&p, &m, 1.0).unwrap();
        assert!((u0.value(-1.0).unwrap() - (-1f64).exp()).abs() < 1e-10);
        assert!((u1.value(-1.0).unwrap() / u1.value(0.0).unwrap() - (-1f64).exp()).abs() < 1e-10);
        let rep = check_gluing(&p, &m, 0.0, 1.0, &linspace(-10.0, 10.0, 200)).unwrap();
        assert!(rep.max_residual < 1e-10);
        let rep = check_gluing(&p, &m, 0.3, 0.3, &linspace(-10.0, 10.0, 200)).unwrap();
        assert!(rep.max_residual < 1e-15);
        assert!(check_gluing(&p, &m, 1.0, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn comparison_of_constants() {
        let v = Potential::constant(1.0).unwrap();
        let w = Potential::constant(4.0).unwrap();
        let grid = linspace(-10.0, 10.0, 101);
        let rep = check_comparison(&v, &w, 0.0, &grid, 1e-10).unwrap();
        assert!(rep.passed());
        let rep = check_comparison(&w, &v, 0.0, &grid, 1e-10).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.precondition_violations.len(), grid.len());
    }

    #[test]
    fn csv_export() {
        let v = Potential::constant(1.0).unwrap();
        let s = LogSolution::solve(&v, Side::Minus, -25.0, 25.0, 1e-10).unwrap();
        let csv = s.to_csv(&[0.0, 1.0]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,ell,ell_prime,phi");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0e0,0e0,"));
    }
}
