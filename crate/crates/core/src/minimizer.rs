//! Second minimization step: `m(V) = inf_a F(a)`, the best constant
//! `m(V)^{-1/2}` and whether the infimum is attained.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fcurve::{self, CriticalPoint, CriticalSearchOptions, FCurve, RejectedCandidate};
use crate::fundamental::{self, ExtremalFunction, LogSolution};
use crate::potential::Potential;
use crate::quadrature::CompositeRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// `None` selects `[-25/√v0, 25/√v0]`.
    pub window: Option<(f64, f64)>,
    /// Integrator tolerance.
    pub tol: f64,
    /// Spacing of the grid on which `F` is scanned.
    pub grid_spacing: f64,
    pub critical: CriticalSearchOptions,
    /// Width of the band in which tail and critical values count as tied.
    pub decision_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            window: None,
            tol: fundamental::DEFAULT_TOL,
            grid_spacing: fcurve::DEFAULT_SPACING,
            critical: CriticalSearchOptions::default(),
            decision_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn resolve_window(&self, potential: &Potential) -> (f64, f64) {
        self.window.unwrap_or_else(|| fundamental::default_window(potential))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Attainment {
    /// Minimum attained at a finite `a*`.
    Attained,
    /// Infimum only approached as `|a| → ∞`.
    Empty,
    /// `F` constant: every `a` is optimal.
    Flat,
    /// Tail and critical values tie within the decision tolerance.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailMethod {
    /// `2√min(V(-∞), V(+∞))` from declared tail limits.
    #[serde(rename = "declared-tail-limits")]
    DeclaredTailLimits,
    /// Smaller of the two edge values of the scanned curve.
    #[serde(rename = "edge-sampled")]
    EdgeSampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub value: f64,
    pub method: TailMethod,
    /// True for edge sampling, which can miss a smaller liminf outside the window.
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizationReport {
    pub potential: String,
    pub m: f64,
    pub best_constant: f64,
    pub attainment: Attainment,
    pub a_star: Option<f64>,
    pub critical_points: Vec<CriticalPoint>,
    pub rejected_candidates: Vec<RejectedCandidate>,
    pub derivative_sign_only: bool,
    pub tail_estimate: TailEstimate,
    /// `tail - min F over the critical points`; absent when there are none.
    pub margin: Option<f64>,
    /// `2v0/√v1` and `2v1/√v0`.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub window: (f64, f64),
    pub scan_window: (f64, f64),
    pub wronskian: f64,
    pub solver_config: SolverConfig,
}

/// Full pipeline output, keeping the intermediate objects for reuse.
#[derive(Debug, Clone)]
pub struct Minimization {
    pub report: MinimizationReport,
    pub plus: LogSolution,
    pub minus: LogSolution,
    pub curve: FCurve,
}

pub fn minimize(potential: &Potential, config: &SolverConfig) -> Result<MinimizationReport> {
    Ok(run(potential, config)?.report)
}

/// Solves both sides, scans `F`, finds its critical points and classifies
/// the infimum.
pub fn run(potential: &Potential, config: &SolverConfig) -> Result<Minimization> {
    if !(config.grid_spacing > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must be positive, got {}",
            config.grid_spacing
        )));
    }
    let (x_min, x_max) = config.resolve_window(potential);
    let (plus, minus) = fundamental::solve_pair(potential, x_min, x_max, config.tol)?;
    let grid = fcurve::default_grid(&plus, config.grid_spacing);
    let curve = FCurve::build(&plus, &minus, potential, &grid)?;
    let search = fcurve::find_critical_points(&curve, potential, &config.critical)?;

    let samples = curve.samples();
    let tail_estimate = match potential.tail_limits() {
        Some((l, r)) => TailEstimate {
            value: 2.0 * l.min(r).sqrt(),
            method: TailMethod::DeclaredTailLimits,
            heuristic: false,
        },
        None => TailEstimate {
            value: samples[0].f.min(samples[samples.len() - 1].f),
            method: TailMethod::EdgeSampled,
            heuristic: true,
        },
    };
    let tail = tail_estimate.value;

    let best_critical = search
        .points
        .iter()
        .min_by(|a, b| a.f_value.total_cmp(&b.f_value))
        .copied();
    let margin = best_critical.map(|c| tail - c.f_value);
    let tol = config.decision_tol;

    let (m, attainment, a_star) = if search.flat {
        let c = best_critical.expect("flat search carries a representative");
        (c.f_value.min(tail), Attainment::Flat, Some(c.a))
    } else {
        match best_critical {
            None => (tail, Attainment::Empty, None),
            Some(c) if c.f_value < tail - tol => (c.f_value, Attainment::Attained, Some(c.a)),
            Some(c) if tail < c.f_value - tol => (tail, Attainment::Empty, None),
            Some(c) => (c.f_value.min(tail), Attainment::Undetermined, None),
        }
    };

    let v0 = potential.lower_bound();
    let v1 = potential.upper_bound();
    let report = MinimizationReport {
        potential: potential.label().to_string(),
        m,
        best_constant: m.powf(-0.5),
        attainment,
        a_star,
        critical_points: search.points,
        rejected_candidates: search.rejected,
        derivative_sign_only: search.derivative_sign_only,
        tail_estimate,
        margin,
        lower_bound: 2.0 * v0 / v1.sqrt(),
        upper_bound: 2.0 * v1 / v0.sqrt(),
        window: (x_min, x_max),
        scan_window: (grid[0], grid[grid.len() - 1]),
        wronskian: curve.wronskian(),
        solver_config: *config,
    };
    Ok(Minimization {
        report,
        plus,
        minus,
        curve,
    })
}

/// The representative minimizer `u_{a*}` (normalized to `u(a*) = 1`), or
/// `None` when the infimum is not attained.
pub fn extremal(report: &MinimizationReport, plus: &LogSolution, minus: &LogSolution) -> Result<Option<ExtremalFunction>> {
    match (report.attainment, report.a_star) {
        (Attainment::Attained | Attainment::Flat, Some(a)) => Ok(Some(ExtremalFunction::new(plus, minus, a)?)),
        _ => Ok(None),
    }
}

/// `‖u_a‖²_V = ∫ u_a'² + V u_a²` by composite Gauss–Legendre over the
/// solution window, split at `a` and at the breakpoints of `V`.
pub fn extremal_energy(u: &ExtremalFunction) -> Result<f64> {
    let (lo, hi) = u.window();
    let potential = u.potential();
    let mut cuts = potential.breakpoints().to_vec();
    cuts.push(u.center());
    let rule = CompositeRule::new(12, 0.1 / potential.upper_bound().sqrt().max(1.0));
    let mut failure = None;
    let total = rule.integrate(lo, hi, &cuts, |x| {
        let value = u.value(x).and_then(|v| Ok((v, u.derivative(x)?)));
        match value {
            Ok((v, d)) => d * d + potential.evaluate(x) * v * v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// A function given by samples of its value and derivative, interpolated by
/// piecewise cubic Hermite polynomials. A position may appear twice in a row
/// to carry separate left and right derivatives at a kink.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    xs: Vec<f64>,
    us: Vec<f64>,
    dus: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, us: Vec<f64>, dus: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || us.len() != xs.len() || dus.len() != xs.len() {
            return Err(Error::InvalidArgument(
                "need at least two samples with matching value and derivative counts".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] >= w[0])) || xs.windows(3).any(|w| w[0] == w[2]) {
            return Err(Error::InvalidArgument(
                "sample positions must be increasing, with at most two copies of a position".into(),
            ));
        }
        if xs[0] == xs[1] || xs[xs.len() - 2] == xs[xs.len() - 1] {
            return Err(Error::InvalidArgument("a repeated position cannot be an end point".into()));
        }
        Ok(Self { xs, us, dus })
    }

    pub fn from_fn<F, D>(xs: Vec<f64>, f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        let us = xs.iter().map(|&x| f(x)).collect();
        let dus = xs.iter().map(|&x| df(x)).collect();
        Self::new(xs, us, dus)
    }

    /// Derivatives estimated by second-order differences (one-sided at the ends).
    pub fn from_values(xs: Vec<f64>, us: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || us.len() != n {
            return Err(Error::InvalidArgument("need at least three samples".into()));
        }
        let mut dus = vec![0.0; n];
        for i in 0..n {
            let (a, b, c) = if i == 0 {
                (0, 1, 2)
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1)
            } else {
                (i - 1, i, i + 1)
            };
            // derivative of the quadratic through three points, at xs[i]
            let (x0, x1, x2) = (xs[a], xs[b], xs[c]);
            let x = xs[i];
            let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
            let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
            let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
            dus[i] = l0 * us[a] + l1 * us[b] + l2 * us[c];
        }
        Self::new(xs, us, dus)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value and derivative at `x` (clamped to the sample range).
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let i = self.xs.partition_point(|p| *p <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.us[i], self.us[i + 1]);
        let (m0, m1) = (self.dus[i] * h, self.dus[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let d = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h;
        (v, d)
    }

    fn sup_norm(&self) -> f64 {
        let mut sup = 0.0f64;
        for w in self.xs.windows(2) {
            for k in 0..4 {
                let x = w[0] + (w[1] - w[0]) * k as f64 / 4.0;
                sup = sup.max(self.eval(x).0.abs());
            }
        }
        sup.max(self.us[self.us.len() - 1].abs())
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.xs
    }
}

/// `R(u; V) = ∫(u'² + V u²) / ‖u‖²_∞` over `window`. The function must have
/// decayed at the window edges (below `1e-6` relative to its maximum).
pub fn rayleigh_quotient(u: &SampledFunction, potential: &Potential, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let (dlo, dhi) = u.domain();
    if !(lo < hi) || lo < dlo || hi > dhi {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] is not inside the sample range [{dlo}, {dhi}]"
        )));
    }
    let sup = u.sup_norm();
    if !(sup > 0.0) {
        return Err(Error::InvalidArgument("Rayleigh quotient of the zero function".into()));
    }
    let edge = u.eval(lo).0.abs().max(u.eval(hi).0.abs());
    if edge > 1e-6 * sup {
        return Err(Error::InvalidArgument(format!(
            "function has not decayed at the window edges (|u| = {edge:e})"
        )));
    }
    let mut cuts: Vec<f64> = u.nodes().to_vec();
    cuts.extend_from_slice(potential.breakpoints());
    let rule = CompositeRule::new(6, f64::INFINITY);
    let energy = rule.integrate(lo, hi, &cuts, |x| {
        let (v, d) = u.eval(x);
        d * d + potential.evaluate(x) * v * v
    });
    Ok(energy / (sup * sup))
}
