//! Manifold projection: incremental two-leg operators and the fixed-point
//! driver that approximates projection onto the zero-prediction-gap set.
//!
//! The G operator takes the unconditional half-leg first and the conditional
//! half-leg at the shifted point; H mirrors the order. G-lambda generalizes
//! the half weighting, and G-prime is the guidance-distilled form that reads
//! both legs through a single w-parameterized field.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::anderson::{AaSpec, AaState};
use crate::error::{Error, Result};
use crate::fields::{distilled_velocity, prediction_gap, FieldHandle};
use crate::world::TimePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorVariant {
    G,
    H,
    GPrime,
    GLambda,
}

/// Operator selection plus its scalar parameters. `dt` is the sampler's step
/// 1/N; `guidance` is only read by the G-prime variant.
#[derive(Debug, Clone, Copy)]
pub struct OperatorSpec {
    pub variant: OperatorVariant,
    pub lambda: f64,
    pub dt: f64,
    pub guidance: f64,
}

impl OperatorSpec {
    pub fn new(variant: OperatorVariant, dt: f64) -> Self {
        Self {
            variant,
            lambda: 0.5,
            dt,
            guidance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

/// One application of the selected operator at state x and time t.
pub fn apply_operator(
    spec: &OperatorSpec,
    cond: &FieldHandle,
    uncond: &FieldHandle,
    x: &DVector<f64>,
    t: TimePoint,
    label: &str,
) -> Result<DVector<f64>> {
    spec.validate()?;
    match spec.variant {
        OperatorVariant::G => two_leg(cond, uncond, x, t, label, 0.5 * spec.dt),
        OperatorVariant::GLambda => two_leg(cond, uncond, x, t, label, spec.lambda * spec.dt),
        OperatorVariant::H => {
            let half = 0.5 * spec.dt;
            let vy = cond.eval(t, x, Some(label))?;
            let shifted = x + half * vy;
            let vu = uncond.eval(t, &shifted, None)?;
            Ok(shifted - half * vu)
        }
        OperatorVariant::GPrime => {
            let half = 0.5 * spec.dt;
            let v0 = distilled_velocity(cond, uncond, t, x, Some(label), 0.0)?;
            let shifted = x - half * v0;
            let vw = distilled_velocity(cond, uncond, t, &shifted, Some(label), spec.guidance)?;
            Ok(shifted + half * vw)
        }
    }
}

fn two_leg(
    cond: &FieldHandle,
    uncond: &FieldHandle,
    x: &DVector<f64>,
    t: TimePoint,
    label: &str,
    step: f64,
) -> Result<DVector<f64>> {
    let vu = uncond.eval(t, x, None)?;
    let shifted = x - step * vu;
    let vy = cond.eval(t, &shifted, Some(label))?;
    Ok(shifted + step * vy)
}

/// Fixed-point driver configuration for one projection phase.
#[derive(Debug, Clone)]
pub struct ProjectionConfig {
    pub operator: OperatorSpec,
    pub iterations: usize,
    /// Plain fixed-point iteration when None; AA-mixed otherwise.
    pub accel: Option<AaSpec>,
    /// Record the prediction gap at every iterate (costs two field
    /// evaluations per iterate).
    pub record_gaps: bool,
    /// Fail the run on divergence instead of returning the last finite iterate.
    pub strict: bool,
}

/// Per-phase iteration trace.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProjectionTrace {
    /// |z_{k+1} - z_k| per iteration.
    pub residual_norms: Vec<f64>,
    /// Prediction gap at z_0 ... z_K when gap recording is on.
    pub gap_norms: Vec<f64>,
    /// Iteration index at which a non-finite iterate appeared.
    pub diverged_at: Option<usize>,
}

impl ProjectionTrace {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Runs K fixed-point iterations of the operator from z0 at time t.
///
/// Returns the final iterate and the trace. A non-finite iterate aborts the
/// phase: strict mode propagates the divergence as an error, otherwise the
/// last finite iterate is returned with the divergence flagged in the trace.
pub fn project(
    cfg: &ProjectionConfig,
    cond: &FieldHandle,
    uncond: &FieldHandle,
    z0: &DVector<f64>,
    t: TimePoint,
    label: &str,
) -> Result<(DVector<f64>, ProjectionTrace)> {
    let mut trace = ProjectionTrace::default();
    if cfg.iterations == 0 {
        return Ok((z0.clone(), trace));
    }
    cfg.operator.validate()?;
    if let Some(aa) = &cfg.accel {
        aa.validate()?;
    }
    if cfg.record_gaps {
        trace
            .gap_norms
            .push(prediction_gap(cond, uncond, t, z0, Some(label))?);
    }

    let spec = cfg.operator;
    let mut op = |z: &DVector<f64>| apply_operator(&spec, cond, uncond, z, t, label);

    let mut z = z0.clone();
    match &cfg.accel {
        None => {
            for k in 0..cfg.iterations {
                match step_guard(op(&z), k, cfg.strict)? {
                    Some(next) => {
                        trace.residual_norms.push((&next - &z).norm());
                        if cfg.record_gaps {
                            trace.gap_norms.push(prediction_gap(
                                cond,
                                uncond,
                                t,
                                &next,
                                Some(label),
                            )?);
                        }
                        z = next;
                    }
                    None => {
                        trace.diverged_at = Some(k);
                        break;
                    }
                }
            }
        }
        Some(aa) => {
            // the first iterate is the raw operator application; mixing
            // starts from the second
            let primed = AaState::primed(z.clone(), &mut op);
            let mut state = match divergence_guard(primed, 0, cfg.strict)? {
                Some((state, z1)) => {
                    trace.residual_norms.push((&z1 - &z).norm());
                    if cfg.record_gaps {
                        trace
                            .gap_norms
                            .push(prediction_gap(cond, uncond, t, &z1, Some(label))?);
                    }
                    z = z1;
                    state
                }
                None => {
                    trace.diverged_at = Some(0);
                    return Ok((z, trace));
                }
            };
            for k in 1..cfg.iterations {
                match divergence_guard(state.step(aa, &mut op), k, cfg.strict)? {
                    Some(next) => {
                        trace.residual_norms.push((&next - &z).norm());
                        if cfg.record_gaps {
                            trace.gap_norms.push(prediction_gap(
                                cond,
                                uncond,
                                t,
                                &next,
                                Some(label),
                            )?);
                        }
                        z = next;
                    }
                    None => {
                        trace.diverged_at = Some(k);
                        break;
                    }
                }
            }
        }
    }
    Ok((z, trace))
}

// The driver validates z0, so a non-finite value appearing inside an operator
// application is numeric blowup of the iteration, not bad input.
fn step_guard(
    result: Result<DVector<f64>>,
    step: usize,
    strict: bool,
) -> Result<Option<DVector<f64>>> {
    match result {
        Ok(v) if v.iter().all(|x| x.is_finite()) => Ok(Some(v)),
        Ok(_) | Err(Error::Diverged { .. }) | Err(Error::NonFinite(_)) => {
            if strict {
                Err(Error::Diverged { step })
            } else {
                Ok(None)
            }
        }
        Err(e) => Err(e),
    }
}

fn divergence_guard<T>(result: Result<T>, step: usize, strict: bool) -> Result<Option<T>> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(Error::Diverged { .. }) | Err(Error::NonFinite(_)) => {
            if strict {
                Err(Error::Diverged { step })
            } else {
                Ok(None)
            }
        }
        Err(e) => Err(e),
    }
}
