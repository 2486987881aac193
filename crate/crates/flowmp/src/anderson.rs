//! Windowed Anderson acceleration for fixed-point iterations.
//!
//! The mixing weights solve min |sum_i alpha_i f_i| subject to sum alpha = 1.
//! The constraint is eliminated by the difference parameterization: with
//! dF = [f_1 - f_0, ..., f_m - f_{m-1}], minimize |f_m - dF g| over g and map
//! back to alpha, so the sum constraint holds by construction. The normal
//! equations carry a Tikhonov term scaled by |dF|_F^2, which keeps
//! rank-deficient windows (stalled iterates) from blowing up the solve.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window size, damping and solve regularization for AA(m, beta).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AaSpec {
    /// History window m; m = 0 reduces to damped plain iteration.
    pub window: usize,
    /// Damping beta in (0, 1].
    pub damping: f64,
    /// Relative Tikhonov weight for the mixing solve.
    pub lambda_reg: f64,
}

impl Default for AaSpec {
    fn default() -> Self {
        Self {
            window: 1,
            damping: 1.0,
            lambda_reg: 1e-10,
        }
    }
}

impl AaSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::config(
                "aa.damping",
                format!("damping must lie in (0, 1], got {}", self.damping),
            ));
        }
        if self.lambda_reg.is_nan() || self.lambda_reg < 0.0 {
            return Err(Error::config(
                "aa.lambda_reg",
                format!("lambda_reg must be nonnegative, got {}", self.lambda_reg),
            ));
        }
        Ok(())
    }
}

/// Mixing weights alpha for the given residual window.
///
/// Identical residuals (rank-deficient dF) concentrate all weight on the most
/// recent iterate, which degrades to a plain step.
pub fn solve_weights(residuals: &[DVector<f64>], lambda_reg: f64) -> Result<Vec<f64>> {
    let m = residuals.len();
    if m == 0 {
        return Err(Error::EmptySamples);
    }
    let dim = residuals[0].len();
    for r in residuals {
        if r.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
    }
    if m == 1 {
        return Ok(vec![1.0]);
    }

    let cols = m - 1;
    let mut diff = DMatrix::zeros(dim, cols);
    for j in 0..cols {
        diff.set_column(j, &(&residuals[j + 1] - &residuals[j]));
    }
    let scale = diff.norm_squared(); // Frobenius
    let gamma = if scale > 0.0 {
        let mut normal = diff.transpose() * &diff;
        for j in 0..cols {
            normal[(j, j)] += lambda_reg * scale;
        }
        let rhs = diff.transpose() * residuals[m - 1].clone();
        match normal.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => DVector::zeros(cols),
        }
    } else {
        DVector::zeros(cols)
    };

    let mut alpha = vec![0.0; m];
    alpha[0] = gamma[0];
    for i in 1..cols {
        alpha[i] = gamma[i] - gamma[i - 1];
    }
    // last weight closes the sum exactly
    let partial: f64 = alpha[..m - 1].iter().sum();
    alpha[m - 1] = 1.0 - partial;
    Ok(alpha)
}

/// Rolling iterate/residual window for one accelerated fixed-point run.
///
/// `iterates` always holds one more entry than `residuals`: the latest iterate
/// has no residual until the next [`step`](AaState::step) evaluates the
/// operator there.
#[derive(Debug, Clone)]
pub struct AaState {
    iterates: VecDeque<DVector<f64>>,
    residuals: VecDeque<DVector<f64>>,
    steps: usize,
}

impl AaState {
    pub fn new(z0: DVector<f64>) -> Self {
        let mut iterates = VecDeque::new();
        iterates.push_back(z0);
        Self {
            iterates,
            residuals: VecDeque::new(),
            steps: 0,
        }
    }

    /// Seeds the window with the raw first application z1 = op(z0), recording
    /// f0 = z1 - z0. Returns z1.
    pub fn primed<F>(z0: DVector<f64>, op: &mut F) -> Result<(Self, DVector<f64>)>
    where
        F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let z1 = op(&z0)?;
        if z1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: 0 });
        }
        let f0 = &z1 - &z0;
        let mut state = Self::new(z0);
        state.residuals.push_back(f0);
        state.iterates.push_back(z1.clone());
        state.steps = 1;
        Ok((state, z1))
    }

    pub fn current(&self) -> &DVector<f64> {
        self.iterates.back().expect("window never empty")
    }

    pub fn history_len(&self) -> usize {
        self.residuals.len()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// One accelerated step: evaluate the operator at the current iterate,
    /// solve the mixing weights over the window, return the mixed update
    /// sum_i alpha_i (z_i + beta f_i).
    pub fn step<F>(&mut self, spec: &AaSpec, op: &mut F) -> Result<DVector<f64>>
    where
        F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let z = self.current().clone();
        let g = op(&z)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: self.steps });
        }
        self.residuals.push_back(&g - &z);
        while self.residuals.len() > spec.window + 1 {
            self.residuals.pop_front();
            self.iterates.pop_front();
        }
        let alpha = solve_weights(self.residuals.make_contiguous(), spec.lambda_reg)?;
        let mut next = DVector::zeros(z.len());
        for ((zi, fi), a) in self.iterates.iter().zip(self.residuals.iter()).zip(&alpha) {
            next += *a * (zi + spec.damping * fi);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: self.steps });
        }
        self.iterates.push_back(next.clone());
        self.steps += 1;
        Ok(next)
    }
}
