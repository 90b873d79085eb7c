//! Closed forms for the `(A, B)` example family and shared fixtures.
#![allow(dead_code, clippy::excessive_precision)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sobolev1d::{ExamplePotentialParams, Potential};

/// Reference values for `A = 1, B = 2`, evaluated in 30-digit arithmetic.
pub const M_EXAMPLE: f64 = 3.029_857_499_854_668_105_92;
pub const C_EXAMPLE: f64 = 0.574_498_499_040_925_211;
pub const A1_EXAMPLE: f64 = -0.780_776_406_404_415_137;
pub const A2_EXAMPLE: f64 = 1.280_776_406_404_415_137;
pub const PHI_PLUS_AT_1: f64 = 0.095_696_496_510_410_924_0;
pub const PHI_MINUS_AT_1: f64 = 7.547_007_973_731_315_19;
pub const G_AT_0_A1: f64 = 0.087_854_619_084_343_391_6;

#[derive(Debug, Clone, Copy)]
pub struct Example {
    pub a: f64,
    pub b: f64,
}

impl Example {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn potential(&self) -> Potential {
        Potential::example(ExamplePotentialParams::new(self.a, self.b).unwrap()).unwrap()
    }

    fn q(&self, x: f64) -> f64 {
        x * x + self.a * self.a
    }

    fn p(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        2.0 * b * b * x * x - 2.0 * b * x + 2.0 * a * a * b * b + 1.0
    }

    pub fn v(&self, x: f64) -> f64 {
        let q = self.q(x);
        self.b * self.b + 2.0 * self.b * x / q + (2.0 * x * x - self.a * self.a) / (q * q)
    }

    pub fn phi_plus(&self, x: f64) -> f64 {
        self.a * (-self.b * x).exp() / self.q(x).sqrt()
    }

    pub fn phi_minus(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        a * self.p(x) * (b * x).exp() / ((2.0 * a * a * b * b + 1.0) * self.q(x).sqrt())
    }

    pub fn r_plus(&self, x: f64) -> f64 {
        -self.b - x / self.q(x)
    }

    pub fn r_minus(&self, x: f64) -> f64 {
        let b = self.b;
        (4.0 * b * b * x - 2.0 * b) / self.p(x) - x / self.q(x) + b
    }

    pub fn f(&self, x: f64) -> f64 {
        self.r_minus(x) - self.r_plus(x)
    }

    pub fn m(&self) -> f64 {
        let s = (1.0 + 4.0 * self.a * self.a * self.b * self.b).sqrt();
        2.0 * self.b * (1.0 - 1.0 / s)
    }

    pub fn a1(&self) -> f64 {
        let s = (1.0 + 4.0 * self.a * self.a * self.b * self.b).sqrt();
        (1.0 - s) / (2.0 * self.b)
    }

    pub fn a2(&self) -> f64 {
        let s = (1.0 + 4.0 * self.a * self.a * self.b * self.b).sqrt();
        (1.0 + s) / (2.0 * self.b)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Piecewise-constant potential with 2 to 5 pieces, breakpoints in
/// `[-4, 4]` and values in `[0.5, 5]`.
pub fn random_piecewise(rng: &mut StdRng) -> Potential {
    let pieces = rng.gen_range(2..=5);
    let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(-4.0..4.0)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let values = (0..=breaks.len()).map(|_| rng.gen_range(0.5..5.0)).collect();
    Potential::piecewise_constant(breaks, values).unwrap()
}

pub fn random_piecewise_family(seed: u64, count: usize) -> Vec<Potential> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_piecewise(&mut rng)).collect()
}
