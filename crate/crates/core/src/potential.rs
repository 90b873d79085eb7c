//! Bounded positive potentials `V` with certified bounds `0 < v0 <= V <= v1`.
//!
//! A [`Potential`] is an immutable, cheaply clonable handle around a profile
//! function plus the metadata the solvers rely on: the bounds, the positions
//! where the profile may jump, and (when known) the limits at `±∞`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative widening applied to the extrema of tabulated potentials.
pub const TABLE_BOUND_MARGIN: f64 = 0.01;

#[derive(Clone)]
pub struct Potential {
    profile: Profile,
    lower_bound: f64,
    upper_bound: f64,
    breakpoints: Vec<f64>,
    tail_limits: Option<(f64, f64)>,
    continuous: bool,
    label: String,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("lower_bound", &self.lower_bound)
            .field("upper_bound", &self.upper_bound)
            .field("breakpoints", &self.breakpoints)
            .field("tail_limits", &self.tail_limits)
            .field("continuous", &self.continuous)
            .finish()
    }
}

/// Parameters of the closed-form example family, built from
/// `φ₊(x) = A e^{-Bx} / √(x² + A²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExamplePotentialParams {
    pub a: f64,
    pub b: f64,
}

impl ExamplePotentialParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "example needs A > 0 and B > 0, got A = {a}, B = {b}"
            )));
        }
        if a * b <= golden {
            return Err(Error::InvalidPotential(format!(
                "example needs A·B > (1+√5)/2 for positivity, got A·B = {}",
                a * b
            )));
        }
        Ok(Self { a, b })
    }

    /// `(A²B² − AB − 1)/A²`, the sum of the termwise minima.
    pub fn lower_bound(&self) -> f64 {
        let ab = self.a * self.b;
        (ab * ab - ab - 1.0) / (self.a * self.a)
    }

    /// `B² + B/A + 2/A²`, the sum of termwise upper bounds.
    pub fn upper_bound(&self) -> f64 {
        self.b * self.b + self.b / self.a + 2.0 / (self.a * self.a)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let q = x * x + a * a;
        b * b + 2.0 * b * x / q + (2.0 * x * x - a * a) / (q * q)
    }
}

/// Result of sampling a potential against its declared bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `(x, V(x))` for every sample outside `[v0, v1]`.
    pub violations: Vec<(f64, f64)>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Potential {
    /// General constructor. `breakpoints` must be strictly increasing.
    pub fn custom<F>(
        label: impl Into<String>,
        profile: F,
        lower_bound: f64,
        upper_bound: f64,
        breakpoints: Vec<f64>,
        tail_limits: Option<(f64, f64)>,
        continuous: bool,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lower_bound > 0.0) || !lower_bound.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "lower bound must be positive, got {lower_bound}"
            )));
        }
        if !(upper_bound >= lower_bound) || !upper_bound.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "upper bound {upper_bound} below lower bound {lower_bound}"
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if let Some((l, r)) = tail_limits {
            if !(l > 0.0 && r > 0.0) {
                return Err(Error::InvalidPotential("tail limits must be positive".into()));
            }
        }
        Ok(Self {
            profile: Arc::new(profile),
            lower_bound,
            upper_bound,
            breakpoints,
            tail_limits,
            continuous,
            label: label.into(),
        })
    }

    pub fn constant(v: f64) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidPotential(format!("constant potential must be positive, got {v}")));
        }
        Self::custom(format!("constant(v={v})"), move |_| v, v, v, Vec::new(), Some((v, v)), true)
    }

    pub fn example(params: ExamplePotentialParams) -> Result<Self> {
        let p = ExamplePotentialParams::new(params.a, params.b)?;
        let tail = p.b * p.b;
        Self::custom(
            format!("example(A={},B={})", p.a, p.b),
            move |x| p.evaluate(x),
            p.lower_bound(),
            p.upper_bound(),
            Vec::new(),
            Some((tail, tail)),
            true,
        )
    }

    /// Logistic profile `v0 + (v1 - v0) σ(x / width)`, nondecreasing.
    pub fn monotone_step(v0: f64, v1: f64, transition_width: f64) -> Result<Self> {
        if !(v0 > 0.0) || !(v1 >= v0) || !v1.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "monotone step needs 0 < v0 <= v1, got v0 = {v0}, v1 = {v1}"
            )));
        }
        if !(transition_width > 0.0) || !transition_width.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "transition width must be positive, got {transition_width}"
            )));
        }
        let jump = v1 - v0;
        Self::custom(
            format!("step(v0={v0},v1={v1},width={transition_width})"),
            move |x| v0 + jump * logistic(x / transition_width),
            v0,
            v1,
            Vec::new(),
            Some((v0, v1)),
            true,
        )
    }

    /// Right-continuous piecewise-constant potential: `values[i]` holds on
    /// `[breakpoints[i-1], breakpoints[i])`.
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidPotential("piecewise values must be positive".into()));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tails = (values[0], values[values.len() - 1]);
        let bps = breakpoints.clone();
        let vals = values.clone();
        Self::custom(
            format!("piecewise({} pieces)", values.len()),
            move |x| vals[bps.partition_point(|b| *b <= x)],
            lo,
            hi,
            breakpoints,
            Some(tails),
            false,
        )
    }

    /// Builds `V = ℓ″ + (ℓ′)²` from samples of a log-derivative and
    /// interpolates it with a natural cubic spline.
    pub fn from_log_derivative(xs: &[f64], ell_prime: &[f64], ell_double_prime: &[f64]) -> Result<Self> {
        if ell_prime.len() != xs.len() || ell_double_prime.len() != xs.len() {
            return Err(Error::InvalidPotential("log-derivative samples must share the grid".into()));
        }
        let vs: Vec<f64> = ell_prime
            .iter()
            .zip(ell_double_prime)
            .map(|(d1, d2)| d2 + d1 * d1)
            .collect();
        Self::tabulated("log-derivative table", xs, &vs)
    }

    /// Potential given directly by samples, spline-interpolated.
    pub fn from_samples(xs: &[f64], vs: &[f64]) -> Result<Self> {
        Self::tabulated("table", xs, vs)
    }

    fn tabulated(label: &str, xs: &[f64], vs: &[f64]) -> Result<Self> {
        let spline = CubicSpline::new(xs.to_vec(), vs.to_vec())
            .map_err(|e| Error::InvalidPotential(e.to_string()))?;
        let (lo, hi) = spline.domain();
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        let n = 4 * xs.len();
        for i in 0..=n {
            let v = spline.eval(lo + (hi - lo) * i as f64 / n as f64);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        for &v in vs {
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        if !(vmin > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "tabulated potential has infimum {vmin} <= 0"
            )));
        }
        let tails = (vs[0], vs[vs.len() - 1]);
        Self::custom(
            format!("{label}({} samples)", xs.len()),
            move |x| spline.eval(x),
            vmin * (1.0 - TABLE_BOUND_MARGIN),
            vmax * (1.0 + TABLE_BOUND_MARGIN),
            Vec::new(),
            Some(tails),
            true,
        )
    }

    /// `x ↦ V(x - shift)`.
    pub fn translated(&self, shift: f64) -> Self {
        let inner = self.profile.clone();
        Self {
            profile: Arc::new(move |x| inner(x - shift)),
            breakpoints: self.breakpoints.iter().map(|b| b + shift).collect(),
            label: format!("{} shifted by {shift}", self.label),
            ..self.clone()
        }
    }

    /// Replaces the declared bounds without re-deriving them. Used to load
    /// user-declared bounds; [`Potential::check_bounds`] exposes any mismatch.
    pub fn with_declared_bounds(mut self, lower_bound: f64, upper_bound: f64) -> Result<Self> {
        if !(lower_bound > 0.0) || !(upper_bound >= lower_bound) {
            return Err(Error::InvalidPotential(format!(
                "declared bounds [{lower_bound}, {upper_bound}] are not 0 < v0 <= v1"
            )));
        }
        self.lower_bound = lower_bound;
        self.upper_bound = upper_bound;
        Ok(self)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        (self.profile)(x)
    }

    /// Value of `V` as seen from inside the open interval `(lo, hi)`:
    /// at the ends this is the one-sided limit.
    pub fn evaluate_within(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let nudge = |p: f64| 64.0 * f64::EPSILON * p.abs().max(1.0);
        if x <= lo {
            self.evaluate(lo + nudge(lo))
        } else if x >= hi {
            self.evaluate(hi - nudge(hi))
        } else {
            self.evaluate(x)
        }
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn tail_limits(&self) -> Option<(f64, f64)> {
        self.tail_limits
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when both handles share the same profile (clones of one potential).
    pub fn same_profile(&self, other: &Potential) -> bool {
        Arc::ptr_eq(&self.profile, &other.profile)
    }

    pub fn check_bounds(&self, grid: &[f64]) -> BoundsReport {
        let mut sampled_min = f64::INFINITY;
        let mut sampled_max = f64::NEG_INFINITY;
        let mut violations = Vec::new();
        for &x in grid {
            let v = self.evaluate(x);
            sampled_min = sampled_min.min(v);
            sampled_max = sampled_max.max(v);
            if !(v >= self.lower_bound && v <= self.upper_bound) {
                violations.push((x, v));
            }
        }
        BoundsReport {
            sampled_min,
            sampled_max,
            lower_bound: self.lower_bound,
            upper_bound: self.upper_bound,
            violations,
        }
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// JSON description of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Constant {
        value: f64,
    },
    Example {
        #[serde(rename = "A", alias = "a")]
        a: f64,
        #[serde(rename = "B", alias = "b")]
        b: f64,
    },
    Step {
        v0: f64,
        v1: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Either direct samples `v`, or `ell_prime` + `ell_double_prime`.
    Table {
        x: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ell_prime: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ell_double_prime: Option<Vec<f64>>,
    },
}

fn default_width() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    /// Translate the profile by this amount.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Override the derived `[v0, v1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_bounds: Option<[f64; 2]>,
}

impl PotentialSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build(&self) -> Result<Potential> {
        let mut pot = match &self.kind {
            PotentialKind::Constant { value } => Potential::constant(*value)?,
            PotentialKind::Example { a, b } => Potential::example(ExamplePotentialParams::new(*a, *b)?)?,
            PotentialKind::Step { v0, v1, width } => Potential::monotone_step(*v0, *v1, *width)?,
            PotentialKind::Piecewise { breakpoints, values } => {
                Potential::piecewise_constant(breakpoints.clone(), values.clone())?
            }
            PotentialKind::Table {
                x,
                v,
                ell_prime,
                ell_double_prime,
            } => match (v, ell_prime, ell_double_prime) {
                (Some(v), None, None) => Potential::from_samples(x, v)?,
                (None, Some(d1), Some(d2)) => Potential::from_log_derivative(x, d1, d2)?,
                _ => {
                    return Err(Error::InvalidPotential(
                        "table needs either `v` or both `ell_prime` and `ell_double_prime`".into(),
                    ))
                }
            },
        };
        if let Some(s) = self.shift {
            pot = pot.translated(s);
        }
        if let Some([lo, hi]) = self.declared_bounds {
            pot = pot.with_declared_bounds(lo, hi)?;
        }
        Ok(pot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_potential() {
        let p = Potential::constant(1.0).unwrap();
        assert_eq!(p.lower_bound(), 1.0);
        assert_eq!(p.upper_bound(), 1.0);
        assert!(p.breakpoints().is_empty());
        assert_eq!(p.tail_limits(), Some((1.0, 1.0)));
        assert!(p.is_continuous());
        assert_eq!(Potential::constant(4.0).unwrap().evaluate(17.3), 4.0);
        assert!(Potential::constant(0.0).is_err());
        assert!(Potential::constant(-2.0).is_err());
    }

    #[test]
    fn example_potential_values_and_bounds() {
        let p = Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap()).unwrap();
        assert!((p.evaluate(0.0) - 3.0).abs() < 1e-15);
        assert!((p.lower_bound() - 1.0).abs() < 1e-15);
        assert!((p.upper_bound() - 8.0).abs() < 1e-15);
        assert_eq!(p.tail_limits(), Some((4.0, 4.0)));
        assert!(p.check_bounds(&grid(-50.0, 50.0, 10_000)).passed());
        assert!(ExamplePotentialParams::new(1.0, 0.5).is_err());
        assert!(ExamplePotentialParams::new(1.0, 1.6).is_err());
        assert!(ExamplePotentialParams::new(1.0, 1.62).is_ok());
    }

    #[test]
    fn example_matches_factored_closed_form() {
        // ((B(x²+A²)+x)² + x² − A²)/(x²+A²)²
        let (a, b) = (1.3, 1.7);
        let p = ExamplePotentialParams::new(a, b).unwrap();
        for x in grid(-20.0, 20.0, 997) {
            let q = x * x + a * a;
            let t = b * q + x;
            let v = (t * t + x * x - a * a) / (q * q);
            assert!((p.evaluate(x) - v).abs() < 1e-12 * v);
        }
    }

    #[test]
    fn example_tail_approach() {
        let (a, b) = (1.0, 2.0);
        let p = Potential::example(ExamplePotentialParams::new(a, b).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let x = 10.0 * a * 2f64.powi(k);
            for s in [-1.0, 1.0] {
                let dev = (p.evaluate(s * x) - b * b).abs();
                assert!(dev <= 2.0 * b / x + 2.0 / (x * x));
            }
            let dev = (p.evaluate(x) - b * b).abs();
            assert!(dev < prev);
            prev = dev;
        }
    }

    #[test]
    fn monotone_step_profile() {
        let flat = Potential::monotone_step(2.0, 2.0, 1.0).unwrap();
        for x in grid(-30.0, 30.0, 100) {
            assert_eq!(flat.evaluate(x), 2.0);
        }
        let p = Potential::monotone_step(1.0, 4.0, 1.0).unwrap();
        assert!((p.evaluate(-40.0) - 1.0).abs() < 1e-10);
        assert!((p.evaluate(40.0) - 4.0).abs() < 1e-10);
        let g = grid(-40.0, 40.0, 4000);
        for w in g.windows(2) {
            assert!(p.evaluate(w[1]) >= p.evaluate(w[0]));
        }
        assert!(p.check_bounds(&g).passed());
        assert!(Potential::monotone_step(4.0, 1.0, 1.0).is_err());
        assert!(Potential::monotone_step(1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn piecewise_constant_is_right_continuous() {
        let p = Potential::piecewise_constant(vec![-1.0, 2.0], vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.evaluate(-5.0), 3.0);
        assert_eq!(p.evaluate(-1.0), 1.0);
        assert_eq!(p.evaluate(1.999), 1.0);
        assert_eq!(p.evaluate(2.0), 2.0);
        assert_eq!(p.evaluate_within(-1.0, -3.0, -1.0), 3.0);
        assert_eq!(p.evaluate_within(-1.0, -1.0, 2.0), 1.0);
        assert_eq!((p.lower_bound(), p.upper_bound()), (1.0, 3.0));
        assert!(!p.is_continuous());
        assert!(Potential::piecewise_constant(vec![1.0], vec![1.0]).is_err());
        assert!(Potential::piecewise_constant(vec![1.0, 0.0], vec![1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn log_derivative_of_exponential_gives_constant() {
        let xs = grid(-10.0, 10.0, 50);
        let d1 = vec![-3f64.sqrt(); xs.len()];
        let d2 = vec![0.0; xs.len()];
        let p = Potential::from_log_derivative(&xs, &d1, &d2).unwrap();
        for x in grid(-12.0, 12.0, 77) {
            assert!((p.evaluate(x) - 3.0).abs() < 1e-13);
        }
        let zero = vec![0.0; xs.len()];
        assert!(Potential::from_log_derivative(&xs, &zero, &zero).is_err());
    }

    #[test]
    fn translation_shifts_profile_and_breakpoints() {
        let p = Potential::piecewise_constant(vec![0.0], vec![1.0, 2.0]).unwrap();
        let q = p.translated(1.5);
        assert_eq!(q.breakpoints(), &[1.5]);
        assert_eq!(q.evaluate(1.0), 1.0);
        assert_eq!(q.evaluate(1.6), 2.0);
    }

    #[test]
    fn declared_bounds_violation_is_detected() {
        let p = Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap())
            .unwrap()
            .with_declared_bounds(3.5, 8.0)
            .unwrap();
        let report = p.check_bounds(&grid(-5.0, 5.0, 100));
        assert!(!report.passed());
        assert!(report.violations.iter().all(|(_, v)| *v < 3.5));
    }

    #[test]
    fn json_specs() {
        let spec = PotentialSpec::from_json(r#"{"kind":"example","A":1,"B":2}"#).unwrap();
        assert_eq!(spec.build().unwrap().evaluate(0.0), 3.0);
        let spec = PotentialSpec::from_json(r#"{"kind":"constant","value":4,"shift":2.0}"#).unwrap();
        assert_eq!(spec.build().unwrap().evaluate(0.0), 4.0);
        let spec = PotentialSpec::from_json(r#"{"kind":"step","v0":1,"v1":4}"#).unwrap();
        assert_eq!(spec.kind, PotentialKind::Step { v0: 1.0, v1: 4.0, width: 1.0 });
        let spec = PotentialSpec::from_json(
            r#"{"kind":"table","x":[0,1,2,3],"v":[1,2,2,1],"declared_bounds":[0.5,3]}"#,
        )
        .unwrap();
        let p = spec.build().unwrap();
        assert_eq!((p.lower_bound(), p.upper_bound()), (0.5, 3.0));
        assert!(PotentialSpec::from_json(r#"{"kind":"table","x":[0,1,2],"v":[1,1,1],"ell_prime":[0,0,0]}"#)
            .unwrap()
            .build()
            .is_err());
        assert!(PotentialSpec::from_json(r#"{"kind":"bogus"}"#).is_err());
    }
}
