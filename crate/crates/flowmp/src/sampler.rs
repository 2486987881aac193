//! End-to-end sampling drivers: vanilla guided Euler, projection-corrected
//! sampling, and the AA-accelerated variant, with full trajectory
//! instrumentation and deterministic per-chain noise streams.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anderson::AaSpec;
use crate::error::{Error, Result};
use crate::fields::FieldHandle;
use crate::projection::{
    project, OperatorSpec, OperatorVariant, ProjectionConfig, ProjectionTrace,
};
use crate::rng::{chain_seed, SplitMix64};
use crate::world::TimePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cfg,
    CfgMp,
    CfgMpPlus,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Cfg => write!(f, "cfg"),
            Method::CfgMp => write!(f, "cfg-mp"),
            Method::CfgMpPlus => write!(f, "cfg-mp-plus"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordMode {
    FinalOnly,
    FullTrajectory,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub method: Method,
    /// Euler steps N; the time grid is t_i = i/N computed from integers.
    pub steps: usize,
    /// Guidance scale w.
    pub guidance: f64,
    /// Projection iterations K per sampling step.
    pub projection_iters: usize,
    pub operator: OperatorVariant,
    /// Leg weight for the g-lambda operator.
    pub lambda: f64,
    pub aa: AaSpec,
    pub t_min: f64,
    pub seed: u64,
    pub chains: usize,
    pub record: RecordMode,
    /// Record prediction gaps along projection iterates (needed for the
    /// relative-change diagnostics; two extra field evaluations per iterate).
    pub record_gaps: bool,
    /// Abort on projection divergence instead of flagging it.
    pub strict_divergence: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            method: Method::Cfg,
            steps: 32,
            guidance: 1.5,
            projection_iters: 0,
            operator: OperatorVariant::G,
            lambda: 0.5,
            aa: AaSpec::default(),
            t_min: TimePoint::DEFAULT_T_MIN,
            seed: 0,
            chains: 1,
            record: RecordMode::FinalOnly,
            record_gaps: true,
            strict_divergence: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::config("sampler.steps", "steps must be >= 1"));
        }
        if self.chains == 0 {
            return Err(Error::config("sampler.chains", "chains must be >= 1"));
        }
        if self.method == Method::Cfg && self.projection_iters > 0 {
            return Err(Error::config(
                "sampler.projection_iters",
                "method `cfg` has no projection phase; set projection_iters to 0 \
                 or pick cfg-mp / cfg-mp-plus",
            ));
        }
        if !(self.t_min > 0.0 && self.t_min < 0.5) {
            return Err(Error::config(
                "sampler.t_min",
                format!("t_min must lie in (0, 0.5), got {}", self.t_min),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::config(
                "sampler.lambda",
                format!("lambda must lie in (0, 1), got {}", self.lambda),
            ));
        }
        if !self.guidance.is_finite() {
            return Err(Error::config("sampler.guidance", "guidance must be finite"));
        }
        self.aa.validate()?;
        Ok(())
    }

    fn operator_spec(&self) -> OperatorSpec {
        OperatorSpec {
            variant: self.operator,
            lambda: self.lambda,
            dt: 1.0 / self.steps as f64,
            guidance: self.guidance,
        }
    }

    fn projection_config(&self) -> ProjectionConfig {
        ProjectionConfig {
            operator: self.operator_spec(),
            iterations: self.projection_iters,
            accel: match self.method {
                Method::CfgMpPlus => Some(self.aa),
                _ => None,
            },
            record_gaps: self.record_gaps,
            strict: self.strict_divergence,
        }
    }
}

/// One sampling step of one chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Grid time t_i (before clamping).
    pub t: f64,
    pub state: DVector<f64>,
    pub cfg_velocity: DVector<f64>,
    pub half_step: DVector<f64>,
    /// |cond - uncond| at the state, from the velocity evaluations already
    /// needed for the guided step.
    pub gap_at_state: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionTrace>,
    pub diverged: bool,
}

/// One chain's run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub chain: usize,
    pub initial: DVector<f64>,
    pub final_state: DVector<f64>,
    pub divergences: usize,
    /// Exactly N entries under full-trajectory recording, empty otherwise.
    pub steps: Vec<StepRecord>,
}

/// Batch-level aggregates computed in chain order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchSummary {
    pub chains: usize,
    pub divergences: usize,
    /// Mean prediction gap at the sampling states, per step.
    pub mean_gap_per_step: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub records: Vec<TrajectoryRecord>,
    pub summary: BatchSummary,
}

impl BatchResult {
    pub fn final_samples(&self) -> Vec<DVector<f64>> {
        self.records.iter().map(|r| r.final_state.clone()).collect()
    }
}

fn run_chain(
    config: &SamplerConfig,
    cond: &FieldHandle,
    uncond: &FieldHandle,
    label: &str,
    chain: usize,
    initial: DVector<f64>,
) -> Result<TrajectoryRecord> {
    let n = config.steps;
    let dt = 1.0 / n as f64;
    let keep_steps = config.record == RecordMode::FullTrajectory;
    let proj_cfg = config.projection_config();

    let mut x = initial.clone();
    let mut steps = Vec::with_capacity(if keep_steps { n } else { 0 });
    let mut gap_profile = Vec::with_capacity(n);
    let mut divergences = 0usize;

    for i in 0..n {
        let t_grid = i as f64 / n as f64;
        let t = TimePoint::clamped(t_grid, config.t_min);
        let vc = cond.eval(t, &x, Some(label))?;
        let vu = uncond.eval(t, &x, None)?;
        let gap = (&vc - &vu).norm();
        gap_profile.push(gap);
        let v = &vu + config.guidance * (vc - &vu);
        let half = &x + dt * &v;

        let (next, projection, diverged) = if config.method == Method::Cfg {
            (half.clone(), None, false)
        } else {
            let t_proj = TimePoint::clamped((i + 1) as f64 / n as f64, config.t_min);
            let (z, trace) = project(&proj_cfg, cond, uncond, &half, t_proj, label)?;
            let diverged = trace.diverged();
            (z, Some(trace), diverged)
        };
        if diverged {
            divergences += 1;
        }
        if keep_steps {
            steps.push(StepRecord {
                step: i,
                t: t_grid,
                state: x.clone(),
                cfg_velocity: v,
                half_step: half,
                gap_at_state: gap,
                projection,
                diverged,
            });
        }
        x = next;
    }

    Ok(TrajectoryRecord {
        chain,
        initial,
        final_state: x,
        divergences,
        steps,
    })
}

/// Runs one chain per provided noise vector. Chains execute in parallel;
/// records come back in chain order.
pub fn sample(
    config: &SamplerConfig,
    cond: &FieldHandle,
    uncond: &FieldHandle,
    label: &str,
    noise: &[DVector<f64>],
) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    noise
        .par_iter()
        .enumerate()
        .map(|(chain, x0)| run_chain(config, cond, uncond, label, chain, x0.clone()))
        .collect()
}

/// Draws per-chain standard-normal noise from hashed (seed, chain) streams,
/// runs `count` chains, and aggregates the summary in chain order.
pub fn generate_batch(
    config: &SamplerConfig,
    cond: &FieldHandle,
    uncond: &FieldHandle,
    label: &str,
    dimension: usize,
    count: usize,
) -> Result<BatchResult> {
    config.validate()?;
    let noise: Vec<DVector<f64>> = (0..count)
        .map(|chain| {
            let mut rng = SplitMix64::new(chain_seed(config.seed, chain as u64));
            rng.normal_vector(dimension)
        })
        .collect();
    let records = sample(config, cond, uncond, label, &noise)?;

    let divergences = records.iter().map(|r| r.divergences).sum();
    let mean_gap_per_step = if records.iter().all(|r| r.steps.len() == config.steps) {
        (0..config.steps)
            .map(|i| records.iter().map(|r| r.steps[i].gap_at_state).sum::<f64>() / count as f64)
            .collect()
    } else {
        Vec::new()
    };
    Ok(BatchResult {
        summary: BatchSummary {
            chains: count,
            divergences,
            mean_gap_per_step,
        },
        records,
    })
}
