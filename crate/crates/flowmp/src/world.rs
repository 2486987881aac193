//! Analytic data worlds: weighted labeled point clouds with closed-form
//! posteriors, ideal velocity fields, and smoothed distance potentials.
//!
//! A cloud plays the role of the data distribution. Expectations over it are
//! exact finite sums, so the velocity-field identities that hold in the
//! continuum hold here to rounding error and are directly testable.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A sampling time in [0, 1), clamped away from the t = 1 singularity.
///
/// The guidance-era velocity fields scale like 1/(1-t); `TimePoint` guarantees
/// 1 - t >= t_min so every downstream formula stays finite. t = 0 is safe for
/// every implemented operation and is not clamped, which keeps the Euler grid
/// exact at the first step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    t: f64,
}

impl TimePoint {
    pub const DEFAULT_T_MIN: f64 = 1e-4;

    pub fn clamped(t: f64, t_min: f64) -> Self {
        Self {
            t: t.clamp(0.0, 1.0 - t_min),
        }
    }

    pub fn new(t: f64) -> Self {
        Self::clamped(t, Self::DEFAULT_T_MIN)
    }

    pub fn value(self) -> f64 {
        self.t
    }

    /// Smoothing scale sigma = 1 - t.
    pub fn sigma(self) -> f64 {
        1.0 - self.t
    }
}

#[derive(Debug, Clone)]
struct LabelSubset {
    indices: Vec<usize>,
    /// Renormalized to sum to 1 over the subset.
    weights: Vec<f64>,
}

/// Weighted finite point set with one condition tag per point.
///
/// Stored weights are normalized over the pooled set; per-label views
/// renormalize over the subset. Both therefore sum to 1.
#[derive(Debug, Clone)]
pub struct LabeledPointCloud {
    dimension: usize,
    points: Vec<DVector<f64>>,
    weights: Vec<f64>,
    labels: Vec<String>,
    subsets: BTreeMap<String, LabelSubset>,
    pooled_indices: Vec<usize>,
}

/// JSON document form of a cloud.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CloudSpec {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub labels: Vec<String>,
}

impl LabeledPointCloud {
    pub fn new(
        points: Vec<Vec<f64>>,
        weights: Option<Vec<f64>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let dimension = points[0].len();
        if dimension == 0 {
            return Err(Error::EmptyCloud);
        }
        for p in &points {
            if p.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("cloud point"));
            }
        }
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch {
                context: "labels",
                expected: points.len(),
                got: labels.len(),
            });
        }
        let raw = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::LengthMismatch {
                        context: "weights",
                        expected: points.len(),
                        got: w.len(),
                    });
                }
                for (i, &v) in w.iter().enumerate() {
                    if !v.is_finite() || v <= 0.0 {
                        return Err(Error::InvalidWeight { index: i, value: v });
                    }
                }
                w
            }
            None => vec![1.0; points.len()],
        };
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

        let mut subsets: BTreeMap<String, LabelSubset> = BTreeMap::new();
        for (i, label) in labels.iter().enumerate() {
            subsets
                .entry(label.clone())
                .or_insert_with(|| LabelSubset {
                    indices: Vec::new(),
                    weights: Vec::new(),
                })
                .indices
                .push(i);
        }
        for subset in subsets.values_mut() {
            let sum: f64 = subset.indices.iter().map(|&i| weights[i]).sum();
            subset.weights = subset.indices.iter().map(|&i| weights[i] / sum).collect();
        }

        Ok(Self {
            dimension,
            points: points.into_iter().map(DVector::from_vec).collect(),
            pooled_indices: (0..weights.len()).collect(),
            weights,
            labels,
            subsets,
        })
    }

    pub fn from_spec(spec: &CloudSpec) -> Result<Self> {
        if spec.points.iter().any(|p| p.len() != spec.dimension) {
            return Err(Error::config(
                "dataset.inline.points",
                format!("every point must have dimension {}", spec.dimension),
            ));
        }
        Self::new(
            spec.points.clone(),
            spec.weights.clone(),
            spec.labels.clone(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    /// Pooled weights, normalized to sum to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_names(&self) -> impl Iterator<Item = &str> {
        self.subsets.keys().map(|s| s.as_str())
    }

    /// Point indices and normalized weights for a condition.
    /// `None` selects the pooled (unconditional) set.
    pub fn condition_view(&self, label: Option<&str>) -> Result<(&[usize], &[f64])> {
        match label {
            None => Ok((&self.pooled_indices, &self.weights)),
            Some(name) => {
                let subset = self
                    .subsets
                    .get(name)
                    .ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
                if subset.indices.is_empty() {
                    return Err(Error::EmptyLabel(name.to_string()));
                }
                Ok((&subset.indices, &subset.weights))
            }
        }
    }

    /// Weighted centroid of a condition's points.
    pub fn centroid(&self, label: Option<&str>) -> Result<DVector<f64>> {
        let (indices, weights) = self.condition_view(label)?;
        let mut acc = DVector::zeros(self.dimension);
        for (&i, &w) in indices.iter().zip(weights) {
            acc.axpy(w, &self.points[i], 1.0);
        }
        Ok(acc)
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(())
    }

    /// Posterior probabilities over the condition's points given the noisy
    /// state x at time t: softmax over j of log w_j - |x - t x_j|^2 / (2 (1-t)^2).
    pub fn posterior_weights(
        &self,
        label: Option<&str>,
        x: &DVector<f64>,
        t: TimePoint,
    ) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let (indices, weights) = self.condition_view(label)?;
        let inv = 1.0 / (2.0 * t.sigma() * t.sigma());
        let tv = t.value();
        let mut logits = Vec::with_capacity(indices.len());
        for (&i, &w) in indices.iter().zip(weights) {
            let mut d2 = 0.0;
            let p = &self.points[i];
            for k in 0..self.dimension {
                let diff = x[k] - tv * p[k];
                d2 += diff * diff;
            }
            logits.push(w.ln() - d2 * inv);
        }
        // max-shift keeps every exponent <= 0
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - m).exp();
            sum += *l;
        }
        for l in logits.iter_mut() {
            *l /= sum;
        }
        Ok(logits)
    }

    /// Posterior mean E[x1 | x, t] over the condition's points.
    pub fn posterior_mean(
        &self,
        label: Option<&str>,
        x: &DVector<f64>,
        t: TimePoint,
    ) -> Result<DVector<f64>> {
        let alpha = self.posterior_weights(label, x, t)?;
        let (indices, _) = self.condition_view(label)?;
        let mut mean = DVector::zeros(self.dimension);
        for (&i, &a) in indices.iter().zip(&alpha) {
            mean.axpy(a, &self.points[i], 1.0);
        }
        Ok(mean)
    }

    /// Ideal velocity (posterior_mean - x) / (1 - t).
    pub fn ideal_velocity(
        &self,
        label: Option<&str>,
        x: &DVector<f64>,
        t: TimePoint,
    ) -> Result<DVector<f64>> {
        let mut v = self.posterior_mean(label, x, t)?;
        v -= x;
        v /= t.sigma();
        Ok(v)
    }

    /// LogSumExp-smoothed squared distance to the condition's points:
    /// -2 sigma^2 log sum_j w_j exp(-|x_j - x|^2 / (2 sigma^2)).
    ///
    /// Sandwiched between the min and max squared distance to the set.
    pub fn smoothed_sq_distance(
        &self,
        label: Option<&str>,
        x: &DVector<f64>,
        sigma: f64,
    ) -> Result<f64> {
        self.check_input(x)?;
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidSigma(sigma));
        }
        let (indices, weights) = self.condition_view(label)?;
        let inv = 1.0 / (2.0 * sigma * sigma);
        let mut logits = Vec::with_capacity(indices.len());
        for (&i, &w) in indices.iter().zip(weights) {
            let d2 = (x - &self.points[i]).norm_squared();
            logits.push(w.ln() - d2 * inv);
        }
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        Ok(-2.0 * sigma * sigma * lse)
    }

    /// Homotopy objective f_t(x) = dist^2 to the t-scaled cloud with
    /// sigma = 1 - t, minus (1 - t) |x|^2.
    pub fn potential(&self, label: Option<&str>, x: &DVector<f64>, t: TimePoint) -> Result<f64> {
        self.check_input(x)?;
        let (indices, weights) = self.condition_view(label)?;
        let sigma = t.sigma();
        let tv = t.value();
        let inv = 1.0 / (2.0 * sigma * sigma);
        let mut logits = Vec::with_capacity(indices.len());
        for (&i, &w) in indices.iter().zip(weights) {
            let p = &self.points[i];
            let mut d2 = 0.0;
            for k in 0..self.dimension {
                let diff = tv * p[k] - x[k];
                d2 += diff * diff;
            }
            logits.push(w.ln() - d2 * inv);
        }
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        Ok(-2.0 * sigma * sigma * lse - sigma * x.norm_squared())
    }

    /// Gradient of [`potential`]: -2 t (1 - t) * ideal_velocity. The identity
    /// is exact for finite clouds and is cross-checked against central
    /// differences in the verification suite.
    pub fn potential_gradient(
        &self,
        label: Option<&str>,
        x: &DVector<f64>,
        t: TimePoint,
    ) -> Result<DVector<f64>> {
        let mut v = self.ideal_velocity(label, x, t)?;
        v *= -2.0 * t.value() * t.sigma();
        Ok(v)
    }
}

/// Built-in world generators. Each is deterministic in its seed.
pub mod generators {
    use super::*;

    /// Two Gaussian blobs on the x-axis, labels "A" (left) and "B" (right).
    pub fn two_clusters(
        seed: u64,
        points_per_cluster: usize,
        separation: f64,
        spread: f64,
    ) -> LabeledPointCloud {
        let mut rng = SplitMix64::new(seed);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for (cx, label) in [(-separation, "A"), (separation, "B")] {
            for _ in 0..points_per_cluster {
                points.push(vec![
                    cx + spread * rng.next_normal(),
                    spread * rng.next_normal(),
                ]);
                labels.push(label.to_string());
            }
        }
        LabeledPointCloud::new(points, None, labels).expect("generator output is valid")
    }

    /// Two interleaved half-circles, labels "A" (upper) and "B" (lower).
    pub fn two_moons(seed: u64, points_per_moon: usize, noise: f64) -> LabeledPointCloud {
        let mut rng = SplitMix64::new(seed);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..points_per_moon {
            let theta = rng.uniform(0.0, std::f64::consts::PI);
            points.push(vec![
                theta.cos() + noise * rng.next_normal(),
                theta.sin() + noise * rng.next_normal(),
            ]);
            labels.push("A".to_string());
        }
        for _ in 0..points_per_moon {
            let theta = rng.uniform(0.0, std::f64::consts::PI);
            points.push(vec![
                1.0 - theta.cos() + noise * rng.next_normal(),
                0.5 - theta.sin() + noise * rng.next_normal(),
            ]);
            labels.push("B".to_string());
        }
        LabeledPointCloud::new(points, None, labels).expect("generator output is valid")
    }

    /// Points on a circle; labels "A" on the upper half, "B" on the lower.
    pub fn ring(seed: u64, count: usize, radius: f64, noise: f64) -> LabeledPointCloud {
        let mut rng = SplitMix64::new(seed);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..count {
            let theta = rng.uniform(0.0, std::f64::consts::TAU);
            points.push(vec![
                radius * theta.cos() + noise * rng.next_normal(),
                radius * theta.sin() + noise * rng.next_normal(),
            ]);
            labels.push(
                if theta < std::f64::consts::PI {
                    "A"
                } else {
                    "B"
                }
                .to_string(),
            );
        }
        LabeledPointCloud::new(points, None, labels).expect("generator output is valid")
    }
}
