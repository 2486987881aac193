//! Quantitative diagnostics: the optimal guidance scale, the guidance error
//! decomposition, relative gap change, sample-quality statistics, and
//! batch-level gap profiles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::TrajectoryRecord;
use crate::world::LabeledPointCloud;

/// Error decomposition of a guided velocity against the ideal one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuidanceDiagnostic {
    pub optimal_w: f64,
    /// Squared prediction gap |cond - uncond|^2, the sensitivity coefficient.
    pub gap_sq: f64,
    /// Irreducible part: |cfg(w*) - ideal|^2.
    pub model_error: f64,
    /// |cfg(w) - ideal|^2 at the probed w.
    pub total_error: f64,
    /// Signed relative mismatch between the direct and decomposed error.
    pub residual: f64,
}

/// w* = <cond - uncond, ideal - uncond> / |cond - uncond|^2.
pub fn optimal_w(
    v_cond: &DVector<f64>,
    v_uncond: &DVector<f64>,
    v_ideal: &DVector<f64>,
) -> Result<f64> {
    let gap = v_cond - v_uncond;
    let denom = gap.norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroGap);
    }
    Ok(gap.dot(&(v_ideal - v_uncond)) / denom)
}

/// Evaluates both sides of the error decomposition
/// |cfg(w) - ideal|^2 = |cfg(w*) - ideal|^2 + (w* - w)^2 |gap|^2
/// and reports their relative residual.
pub fn decomposition_check(
    v_cond: &DVector<f64>,
    v_uncond: &DVector<f64>,
    v_ideal: &DVector<f64>,
    w: f64,
) -> Result<GuidanceDiagnostic> {
    let w_star = optimal_w(v_cond, v_uncond, v_ideal)?;
    let gap = v_cond - v_uncond;
    let gap_sq = gap.norm_squared();
    let cfg_at = |w: f64| v_uncond + w * &gap;
    let total_error = (cfg_at(w) - v_ideal).norm_squared();
    let model_error = (cfg_at(w_star) - v_ideal).norm_squared();
    let rhs = model_error + (w_star - w) * (w_star - w) * gap_sq;
    let residual = (total_error - rhs) / total_error.max(rhs).max(1e-30);
    Ok(GuidanceDiagnostic {
        optimal_w: w_star,
        gap_sq,
        model_error,
        total_error,
        residual,
    })
}

/// Relative gap change r = (gap_end - gap_start) / gap_start; negative means
/// the projection phase improved the gap.
pub fn relative_change(gap_start: f64, gap_end: f64) -> Result<f64> {
    if gap_start == 0.0 {
        return Err(Error::ZeroBaselineGap);
    }
    Ok((gap_end - gap_start) / gap_start)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleQuality {
    /// Weighted energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'| between the
    /// samples and the condition's points; zero iff the distributions match.
    pub energy_distance: f64,
    /// Mean over samples of the distance to the nearest target point.
    pub mean_min_distance: f64,
}

/// Sample-vs-cloud quality statistics against a condition's point set.
pub fn sample_quality(
    samples: &[DVector<f64>],
    target: &LabeledPointCloud,
    label: Option<&str>,
) -> Result<SampleQuality> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let dim = target.dimension();
    for s in samples {
        if s.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
    }
    let (indices, weights) = target.condition_view(label)?;
    let n = samples.len();
    let ws = 1.0 / n as f64;

    let mut cross = 0.0;
    let mut within_target = 0.0;
    let mut within_samples = 0.0;
    let mut min_sum = 0.0;
    for s in samples {
        let mut best = f64::INFINITY;
        for (&i, &wy) in indices.iter().zip(weights) {
            let d = (s - target.point(i)).norm();
            cross += ws * wy * d;
            best = best.min(d);
        }
        min_sum += best;
    }
    for (&i, &wi) in indices.iter().zip(weights) {
        for (&j, &wj) in indices.iter().zip(weights) {
            within_target += wi * wj * (target.point(i) - target.point(j)).norm();
        }
    }
    for a in samples {
        for b in samples {
            within_samples += ws * ws * (a - b).norm();
        }
    }
    Ok(SampleQuality {
        energy_distance: 2.0 * cross - within_samples - within_target,
        mean_min_distance: min_sum / n as f64,
    })
}

/// Per-step gap statistics across chains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepGapStats {
    pub step: usize,
    pub t: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
    /// Mean relative change over chains whose projection trace carries gaps;
    /// absent when no trace had them (e.g. K = 0 or gap recording off).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_r: Option<f64>,
    pub divergences: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapProfile {
    pub per_step: Vec<StepGapStats>,
    pub divergences: usize,
    /// Relative changes pooled over all steps and chains.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_r: Option<f64>,
}

/// Aggregates gap norms and relative changes across chains per sampling step.
/// Requires full-trajectory records.
pub fn gap_profile(records: &[TrajectoryRecord]) -> Result<GapProfile> {
    if records.is_empty() || records.iter().any(|r| r.steps.is_empty()) {
        return Err(Error::MissingTrace);
    }
    let n = records[0].steps.len();
    if records.iter().any(|r| r.steps.len() != n) {
        return Err(Error::MissingTrace);
    }
    let mut per_step = Vec::with_capacity(n);
    let mut all_r = Vec::new();
    let mut total_div = 0usize;
    for i in 0..n {
        let mut mean = 0.0;
        let mut max = f64::NEG_INFINITY;
        let mut rs = Vec::new();
        let mut divs = 0usize;
        for rec in records {
            let step = &rec.steps[i];
            mean += step.gap_at_state;
            max = max.max(step.gap_at_state);
            if step.diverged {
                divs += 1;
            }
            if let Some(trace) = &step.projection {
                if trace.gap_norms.len() >= 2 {
                    let g0 = trace.gap_norms[0];
                    if g0 > 0.0 {
                        rs.push((trace.gap_norms[trace.gap_norms.len() - 1] - g0) / g0);
                    }
                }
            }
        }
        total_div += divs;
        let mean_r = if rs.is_empty() {
            None
        } else {
            Some(rs.iter().sum::<f64>() / rs.len() as f64)
        };
        all_r.extend(rs);
        per_step.push(StepGapStats {
            step: i,
            t: records[0].steps[i].t,
            mean_gap: mean / records.len() as f64,
            max_gap: max,
            mean_r,
            divergences: divs,
        });
    }
    Ok(GapProfile {
        per_step,
        divergences: total_div,
        mean_r: if all_r.is_empty() {
            None
        } else {
            Some(all_r.iter().sum::<f64>() / all_r.len() as f64)
        },
    })
}
