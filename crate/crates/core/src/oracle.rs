//! Brute-force check of the two-step construction on a finite-difference
//! mesh over `[-L, L]` with zero boundary values.
//!
//! The discrete energy is
//! `E(u) = Σ (u_{i+1} - u_i)²/h + h Σ V_i u_i²`, and the first step
//! minimizes it subject to `u_k = 1`. Nothing here touches the Riccati
//! solutions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::CompositeRule;
use crate::tridiagonal;

const MIN_NODES: usize = 51;

#[derive(Debug, Clone)]
pub struct DiscreteRayleighProblem {
    half_width: f64,
    h: f64,
    nodes: Vec<f64>,
    v: Vec<f64>,
    cell_averaged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstStep {
    pub node: usize,
    pub a: f64,
    pub energy: f64,
    pub values: Vec<f64>,
    /// `max|u| - 1`; positive values mean the sup-norm constraint is violated.
    pub constraint_excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteMinimum {
    pub m_estimate: f64,
    pub node: usize,
    pub a_star: f64,
    /// Nodes considered: `|a| ≤ L/2`.
    pub scan_range: (f64, f64),
}

impl DiscreteRayleighProblem {
    /// Mesh of spacing `h` on `[-L, L]`. Potentials with breakpoints are
    /// sampled by cell averages, continuous ones by node values.
    pub fn new(potential: &Potential, half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need L > 0 and h > 0, got L = {half_width}, h = {h}"
            )));
        }
        let ratio = half_width / h;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio {
            return Err(Error::InvalidArgument(format!("L/h = {ratio} is not an integer")));
        }
        let n = 2 * cells as usize;
        if n + 1 < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "mesh has {} nodes, at least {MIN_NODES} required",
                n + 1
            )));
        }
        let nodes: Vec<f64> = (0..=n).map(|i| -half_width + i as f64 * h).collect();
        let cell_averaged = !potential.breakpoints().is_empty();
        let v = if cell_averaged {
            let rule = CompositeRule::new(4, h);
            nodes
                .iter()
                .map(|&x| rule.integrate(x - 0.5 * h, x + 0.5 * h, potential.breakpoints(), |t| potential.evaluate(t)) / h)
                .collect()
        } else {
            nodes.iter().map(|&x| potential.evaluate(x)).collect()
        };
        Ok(Self {
            half_width,
            h,
            nodes,
            v,
            cell_averaged,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cell_averaged(&self) -> bool {
        self.cell_averaged
    }

    /// Node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.h).round();
        i.clamp(0.0, (self.nodes.len() - 1) as f64) as usize
    }

    /// Discrete energy of a vector of node values (boundary entries included).
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.nodes.len() {
            return Err(Error::InvalidArgument(format!(
                "vector has {} entries, mesh has {} nodes",
                u.len(),
                self.nodes.len()
            )));
        }
        let h = self.h;
        let grad: f64 = u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
        let mass: f64 = u.iter().zip(&self.v).map(|(ui, vi)| vi * ui * ui).sum::<f64>() * h;
        Ok(grad + mass)
    }

    /// `E(u) / max|u|²` with `u` forced to zero at `±L`.
    pub fn rayleigh(&self, u: &[f64]) -> Result<f64> {
        let mut w = u.to_vec();
        if let Some(first) = w.first_mut() {
            *first = 0.0;
        }
        if let Some(last) = w.last_mut() {
            *last = 0.0;
        }
        let sup = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if sup == 0.0 {
            return Err(Error::InvalidArgument("Rayleigh quotient of the zero vector".into()));
        }
        Ok(self.energy(&w)? / (sup * sup))
    }

    fn diag(&self, i: usize) -> f64 {
        2.0 + self.h * self.h * self.v[i]
    }

    /// Minimizes the energy subject to `u_k = 1` by solving the two
    /// tridiagonal stationarity systems left and right of `k`.
    pub fn discrete_first_step(&self, k: usize) -> Result<FirstStep> {
        let n = self.nodes.len() - 1;
        if k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!("node {k} is not interior")));
        }
        let mut u = vec![0.0; n + 1];
        u[k] = 1.0;
        // interior nodes 1..k-1, right neighbor of k-1 is the constrained node
        if k > 1 {
            let m = k - 1;
            let diag: Vec<f64> = (1..k).map(|i| self.diag(i)).collect();
            let off = vec![-1.0; m - 1];
            let mut rhs = vec![0.0; m];
            rhs[m - 1] = 1.0;
            let sol = tridiagonal::solve(&off, &diag, &off, &rhs)
                .ok_or_else(|| Error::InvalidArgument("singular stationarity system".into()))?;
            u[1..k].copy_from_slice(&sol);
        }
        if k + 1 < n {
            let m = n - k - 1;
            let diag: Vec<f64> = (k + 1..n).map(|i| self.diag(i)).collect();
            let off = vec![-1.0; m - 1];
            let mut rhs = vec![0.0; m];
            rhs[0] = 1.0;
            let sol = tridiagonal::solve(&off, &diag, &off, &rhs)
                .ok_or_else(|| Error::InvalidArgument("singular stationarity system".into()))?;
            u[k + 1..n].copy_from_slice(&sol);
        }
        let energy = self.energy(&u)?;
        let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(FirstStep {
            node: k,
            a: self.nodes[k],
            energy,
            values: u,
            constraint_excess: sup - 1.0,
        })
    }

    /// First-step energies at every interior node.
    ///
    /// Uses the elimination ratios of the same tridiagonal systems:
    /// `ρ_i = u_{i-1}/u_i` from the left and `σ_i = u_{i+1}/u_i` from the
    /// right, after which stationarity gives
    /// `E_k = (2 - ρ_k - σ_k)/h + h V_k`.
    pub fn first_step_energies(&self) -> Vec<f64> {
        let n = self.nodes.len() - 1;
        let mut rho = vec![0.0; n + 1];
        for i in 1..n {
            rho[i + 1] = 1.0 / (self.diag(i) - rho[i]);
        }
        let mut sigma = vec![0.0; n + 1];
        for i in (2..n).rev() {
            sigma[i - 1] = 1.0 / (self.diag(i) - sigma[i]);
        }
        let h = self.h;
        (0..=n)
            .map(|k| {
                if k == 0 || k == n {
                    f64::INFINITY
                } else {
                    (2.0 - rho[k] - sigma[k]) / h + h * self.v[k]
                }
            })
            .collect()
    }

    /// Smallest first-step energy over the nodes with `|a| ≤ L/2`.
    pub fn discrete_minimize(&self) -> DiscreteMinimum {
        let energies = self.first_step_energies();
        let limit = 0.5 * self.half_width + 1e-12 * self.half_width;
        let mut best = (f64::INFINITY, 0usize);
        let mut range = (f64::INFINITY, f64::NEG_INFINITY);
        for (k, (&x, &e)) in self.nodes.iter().zip(&energies).enumerate() {
            if x.abs() > limit || !e.is_finite() {
                continue;
            }
            range = (range.0.min(x), range.1.max(x));
            if e < best.0 {
                best = (e, k);
            }
        }
        DiscreteMinimum {
            m_estimate: best.0,
            node: best.1,
            a_star: self.nodes[best.1],
            scan_range: range,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ExamplePotentialParams;

    #[test]
    fn constant_first_step_and_minimum() {
        let v = Potential::constant(1.0).unwrap();
        let p = DiscreteRayleighProblem::new(&v, 30.0, 0.01).unwrap();
        let mid = p.nearest_node(0.0);
        let fs = p.discrete_first_step(mid).unwrap();
        assert!((fs.energy - 2.0).abs() < 5e-3);
        assert!(fs.constraint_excess <= 1e-12);
        for i in 1..100 {
            assert!((fs.values[mid + i] - fs.values[mid - i]).abs() < 1e-10);
        }
        let dm = p.discrete_minimize();
        assert!((dm.m_estimate - 2.0).abs() < 5e-3);
    }

    #[test]
    fn energies_match_direct_solves() {
        let v = Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap()).unwrap();
        let p = DiscreteRayleighProblem::new(&v, 10.0, 0.05).unwrap();
        let e = p.first_step_energies();
        for k in [1, 7, 150, 200, 398, 399] {
            let fs = p.discrete_first_step(k).unwrap();
            assert!((fs.energy - e[k]).abs() < 1e-10 * fs.energy, "k={k}");
        }
    }

    #[test]
    fn example_discrete_minimum() {
        let v = Potential::example(ExamplePotentialParams::new(1.0, 2.0).unwrap()).unwrap();
        let p = DiscreteRayleighProblem::new(&v, 30.0, 0.01).unwrap();
        let dm = p.discrete_minimize();
        assert!((dm.m_estimate - 3.0299).abs() < 1e-2);
        assert!((dm.a_star + 0.780776).abs() <= 2.0 * p.h());
        let k = p.nearest_node(-0.780776);
        assert!((p.discrete_first_step(k).unwrap().energy - 3.0299).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_meshes() {
        let v = Potential::constant(1.0).unwrap();
        assert!(DiscreteRayleighProblem::new(&v, 1.0, 0.03).is_err());
        assert!(DiscreteRayleighProblem::new(&v, 1.0, 0.1).is_err());
        assert!(DiscreteRayleighProblem::new(&v, 1.0, 0.0).is_err());
        let p = DiscreteRayleighProblem::new(&v, 3.0, 0.1).unwrap();
        assert!(p.discrete_first_step(0).is_err());
        assert!(p.discrete_first_step(60).is_err());
        assert!(p.rayleigh(&vec![0.0; 61]).is_err());
    }

    #[test]
    fn cell_averages_for_piecewise() {
        let v = Potential::piecewise_constant(vec![0.025], vec![1.0, 3.0]).unwrap();
        let p = DiscreteRayleighProblem::new(&v, 3.0, 0.1).unwrap();
        assert!(p.cell_averaged());
        let k = p.nearest_node(0.0);
        assert!((p.v[k] - (0.75 * 1.0 + 0.25 * 3.0)).abs() < 1e-14);
    }
}
