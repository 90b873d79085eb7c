//! Green function of `-d²/dx² + V`: `G(x, y) = u_y(x) / F(y)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundamental::{LogSolution, Side};
use crate::quadrature::CompositeRule;

/// A smooth test function with its derivative.
pub trait TestFunction {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

/// `amplitude · exp(-((x - center)/width)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl TestFunction for GaussianBump {
    fn value(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        self.amplitude * (-t * t).exp()
    }

    fn derivative(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        -2.0 * t / self.width * self.amplitude * (-t * t).exp()
    }
}

/// Test function given by a pair of closures.
pub struct FnTest<F, D> {
    pub f: F,
    pub df: D,
}

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> TestFunction for FnTest<F, D> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

#[derive(Debug, Clone)]
pub struct GreenEvaluator {
    plus: LogSolution,
    minus: LogSolution,
    wronskian: f64,
    rule: CompositeRule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub y: f64,
    /// `(∫ G_y' v' + V G_y v) - v(y)` per test function.
    pub residuals: Vec<f64>,
}

impl ResidualReport {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

impl GreenEvaluator {
    pub fn new(plus: &LogSolution, minus: &LogSolution) -> Result<Self> {
        if plus.side() != Side::Plus || minus.side() != Side::Minus {
            return Err(Error::Incompatible("expected a (plus, minus) pair of solutions".into()));
        }
        if !plus.same_problem(minus) {
            return Err(Error::Incompatible(
                "solutions belong to different potentials or windows".into(),
            ));
        }
        let wronskian = minus.ell_prime(0.0)? - plus.ell_prime(0.0)?;
        let panel = 0.1 / plus.potential().upper_bound().sqrt().max(1.0);
        Ok(Self {
            plus: plus.clone(),
            minus: minus.clone(),
            wronskian,
            rule: CompositeRule::new(12, panel),
        })
    }

    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    pub fn window(&self) -> (f64, f64) {
        (self.plus.x_min(), self.plus.x_max())
    }

    /// `log G(x, y)` and `∂ₓ log G(x, y)`.
    fn log_parts(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let py = self.plus.state(y)?;
        let my = self.minus.state(y)?;
        let f = my.ell_prime - py.ell_prime;
        let (ell_x, r_x, ell_y) = if x < y {
            let s = self.minus.state(x)?;
            (s.ell, s.ell_prime, my.ell)
        } else {
            let s = self.plus.state(x)?;
            (s.ell, s.ell_prime, py.ell)
        };
        Ok((ell_x - ell_y - f.ln(), r_x))
    }

    /// `u_y(x) / F(y)`, assembled in log space.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.log_parts(x, y)?.0.exp())
    }

    /// `φ₋(min(x,y)) φ₊(max(x,y)) / W`.
    pub fn eval_via_wronskian(&self, x: f64, y: f64) -> Result<f64> {
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        Ok((self.minus.ell(lo)? + self.plus.ell(hi)? - self.wronskian.ln()).exp())
    }

    /// `∂ₓ G(x, y)`; at `x = y` the right derivative.
    pub fn derivative_x(&self, x: f64, y: f64) -> Result<f64> {
        let (lg, r) = self.log_parts(x, y)?;
        Ok(lg.exp() * r)
    }

    /// `|(-∂ₓ² + V) G(·, y)|` at `x ≠ y`, using the continuous extension.
    pub fn ode_residual(&self, x: f64, y: f64) -> Result<f64> {
        let side = if x < y { &self.minus } else { &self.plus };
        Ok(self.eval(x, y)? * side.riccati_residual(x)?)
    }

    /// Largest `|G(x,y) - G(y,x)|` over the pairs, relative to the largest value seen.
    pub fn symmetry_deviation(&self, pairs: &[(f64, f64)]) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for &(x, y) in pairs {
            let a = self.eval(x, y)?;
            let b = self.eval(y, x)?;
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs()).max(b.abs());
        }
        Ok(if scale > 0.0 { worst / scale } else { 0.0 })
    }

    fn cuts(&self, extra: &[f64]) -> Vec<f64> {
        let mut c = self.plus.potential().breakpoints().to_vec();
        c.extend_from_slice(extra);
        c
    }

    /// `∫ G_y' v' + V G_y v - v(y)` for each test function.
    pub fn residual_check<T: TestFunction>(&self, y: f64, tests: &[T]) -> Result<ResidualReport> {
        let (lo, hi) = self.window();
        let potential = self.plus.potential();
        let cuts = self.cuts(&[y]);
        let mut residuals = Vec::with_capacity(tests.len());
        for t in tests {
            let mut failure = None;
            let integral = self.rule.integrate(lo, hi, &cuts, |x| match self.log_parts(x, y) {
                Ok((lg, r)) => {
                    let g = lg.exp();
                    g * r * t.derivative(x) + potential.evaluate(x) * g * t.value(x)
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            residuals.push(integral - t.value(y));
        }
        Ok(ResidualReport { y, residuals })
    }

    /// `(g_y, g_z)_V`, which should reproduce `G(z, y)`.
    pub fn inner_product(&self, y: f64, z: f64) -> Result<f64> {
        let (lo, hi) = self.window();
        let potential = self.plus.potential();
        let cuts = self.cuts(&[y, z]);
        let mut failure = None;
        let total = self.rule.integrate(lo, hi, &cuts, |x| {
            match self.log_parts(x, y).and_then(|a| Ok((a, self.log_parts(x, z)?))) {
                Ok(((ly, ry), (lz, rz))) => {
                    let g = (ly + lz).exp();
                    g * (ry * rz + potential.evaluate(x))
                }
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
}

/// Convenience wrapper around [`GreenEvaluator::eval`].
pub fn green_eval(g: &GreenEvaluator, x: f64, y: f64) -> Result<f64> {
    g.eval(x, y)
}
