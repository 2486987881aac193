//! Evaluable velocity fields.
//!
//! A [`FieldHandle`] is an immutable description of a velocity field that can
//! be evaluated at (t, x, condition). The analytic-ideal kind delegates to the
//! cloud's closed-form posterior velocity; the perturbed kind adds a seeded
//! sinusoidal bias emulating model error while keeping the true field known.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::world::{LabeledPointCloud, TimePoint};

/// Smooth seeded bias field: amplitude * sin(<k, x> + phase) * direction.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub amplitude: f64,
    pub seed: u64,
    frequency: DVector<f64>,
    phase: f64,
    direction: DVector<f64>,
}

impl Perturbation {
    /// Derives (frequency, phase, direction) from the seed; the amplitude is
    /// a free parameter so fields with equal seeds share geometry.
    pub fn from_seed(seed: u64, amplitude: f64, dimension: usize) -> Self {
        let mut rng = SplitMix64::new(seed);
        let frequency = DVector::from_fn(dimension, |_, _| rng.uniform(-2.0, 2.0));
        let phase = std::f64::consts::TAU * rng.next_f64();
        let mut direction = rng.normal_vector(dimension);
        let norm = direction.norm();
        if norm > 0.0 {
            direction /= norm;
        } else {
            direction = DVector::zeros(dimension);
            direction[0] = 1.0;
        }
        Self {
            amplitude,
            seed,
            frequency,
            phase,
            direction,
        }
    }

    pub fn delta(&self, x: &DVector<f64>) -> DVector<f64> {
        let s = self.amplitude * (self.frequency.dot(x) + self.phase).sin();
        &self.direction * s
    }
}

/// An evaluable velocity field. Evaluation is pure and deterministic.
#[derive(Debug, Clone)]
pub enum FieldHandle {
    /// Closed-form posterior velocity of a cloud; the condition argument
    /// selects the label subset (None = pooled).
    AnalyticIdeal { world: Arc<LabeledPointCloud> },
    /// Fixed vector, mostly useful for composing test fields.
    Constant { value: DVector<f64> },
    /// Base field plus a seeded sinusoidal bias.
    Perturbed {
        base: Box<FieldHandle>,
        perturbation: Perturbation,
    },
    /// Guidance extrapolation uncond + w (cond - uncond).
    CfgExtrapolated {
        cond: Box<FieldHandle>,
        uncond: Box<FieldHandle>,
        guidance: f64,
    },
    /// Single-handle emulation of a guidance-distilled model with a fixed w.
    Distilled {
        cond: Box<FieldHandle>,
        uncond: Box<FieldHandle>,
        guidance: f64,
    },
}

impl FieldHandle {
    pub fn analytic(world: Arc<LabeledPointCloud>) -> Self {
        FieldHandle::AnalyticIdeal { world }
    }

    pub fn perturbed(base: FieldHandle, perturbation: Perturbation) -> Self {
        FieldHandle::Perturbed {
            base: Box::new(base),
            perturbation,
        }
    }

    pub fn eval(
        &self,
        t: TimePoint,
        x: &DVector<f64>,
        label: Option<&str>,
    ) -> Result<DVector<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field input"));
        }
        match self {
            FieldHandle::AnalyticIdeal { world } => world.ideal_velocity(label, x, t),
            FieldHandle::Constant { value } => {
                if value.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: value.len(),
                        got: x.len(),
                    });
                }
                Ok(value.clone())
            }
            FieldHandle::Perturbed { base, perturbation } => {
                let mut v = base.eval(t, x, label)?;
                v += perturbation.delta(x);
                Ok(v)
            }
            FieldHandle::CfgExtrapolated {
                cond,
                uncond,
                guidance,
            } => cfg_velocity(cond, uncond, *guidance, t, x, label),
            FieldHandle::Distilled {
                cond,
                uncond,
                guidance,
            } => distilled_velocity(cond, uncond, t, x, label, *guidance),
        }
    }
}

/// uncond(t, x) + w (cond(t, x, label) - uncond(t, x)).
pub fn cfg_velocity(
    cond: &FieldHandle,
    uncond: &FieldHandle,
    guidance: f64,
    t: TimePoint,
    x: &DVector<f64>,
    label: Option<&str>,
) -> Result<DVector<f64>> {
    let vc = cond.eval(t, x, label)?;
    let vu = uncond.eval(t, x, None)?;
    Ok(&vu + guidance * (vc - &vu))
}

/// Guidance-distilled evaluation with w as an input; w = 0 returns the
/// unconditional field, w = 1 the conditional one.
pub fn distilled_velocity(
    cond: &FieldHandle,
    uncond: &FieldHandle,
    t: TimePoint,
    x: &DVector<f64>,
    label: Option<&str>,
    guidance: f64,
) -> Result<DVector<f64>> {
    cfg_velocity(cond, uncond, guidance, t, x, label)
}

/// |cond(t, x, label) - uncond(t, x)|.
pub fn prediction_gap(
    cond: &FieldHandle,
    uncond: &FieldHandle,
    t: TimePoint,
    x: &DVector<f64>,
    label: Option<&str>,
) -> Result<f64> {
    let vc = cond.eval(t, x, label)?;
    let vu = uncond.eval(t, x, None)?;
    Ok((vc - vu).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::generators;

    fn constant(values: &[f64]) -> FieldHandle {
        FieldHandle::Constant {
            value: DVector::from_row_slice(values),
        }
    }

    #[test]
    fn analytic_field_delegates_to_cloud() {
        let world =
            Arc::new(LabeledPointCloud::new(vec![vec![1.0, 0.0]], None, vec!["A".into()]).unwrap());
        let f = FieldHandle::analytic(world);
        let v = f
            .eval(TimePoint::new(0.5), &DVector::zeros(2), Some("A"))
            .unwrap();
        assert!((v[0] - 2.0).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude_perturbation_is_identity() {
        let base = constant(&[0.3, -0.4]);
        let f = FieldHandle::perturbed(base.clone(), Perturbation::from_seed(11, 0.0, 2));
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let t = TimePoint::new(0.5);
        assert_eq!(
            f.eval(t, &x, None).unwrap(),
            base.eval(t, &x, None).unwrap()
        );
    }

    // Perturbation geometry and a composed probe pinned by the pre-build
    // reference streams.
    #[test]
    fn perturbation_matches_reference() {
        let p = Perturbation::from_seed(11, 0.1, 2);
        assert!((p.frequency[0] - (-0.7350224283163671)).abs() < 1e-12);
        assert!((p.frequency[1] - (-0.9505393929051271)).abs() < 1e-12);
        assert!((p.phase - 4.00893826872814).abs() < 1e-12);
        assert!((p.direction[0] - 0.5073377125997605).abs() < 1e-12);
        assert!((p.direction[1] - 0.8617473210715788).abs() < 1e-12);

        let x = DVector::from_vec(vec![0.3, -0.7]);
        let d = p.delta(&x);
        assert!((d[0] - (-0.04904708099718029)).abs() < 1e-12);
        assert!((d[1] - (-0.08330977494086808)).abs() < 1e-12);

        let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.35));
        let f = FieldHandle::perturbed(FieldHandle::analytic(world), p);
        let v = f.eval(TimePoint::new(0.5), &x, None).unwrap();
        assert!((v[0] - 1.9336890543615506).abs() < 1e-10);
        assert!((v[1] - 0.7173300469734318).abs() < 1e-10);
    }

    #[test]
    fn cfg_velocity_arithmetic() {
        let uncond = constant(&[0.0, 0.0]);
        let cond = constant(&[1.0, 0.0]);
        let x = DVector::zeros(2);
        let t = TimePoint::new(0.5);
        let v = cfg_velocity(&cond, &uncond, 2.0, t, &x, None).unwrap();
        assert_eq!(v, DVector::from_vec(vec![2.0, 0.0]));

        // w = 1 recovers the conditional field
        let v1 = cfg_velocity(&cond, &uncond, 1.0, t, &x, None).unwrap();
        assert!((v1 - cond.eval(t, &x, None).unwrap()).norm() < 1e-14);

        // equal fields make w inert
        for w in [0.0, 1.0, 2.0, 10.0] {
            let v = cfg_velocity(&uncond, &uncond, w, t, &x, None).unwrap();
            assert!((v - uncond.eval(t, &x, None).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn distilled_identities() {
        let uncond = constant(&[0.0, 0.0]);
        let cond = constant(&[1.0, 0.0]);
        let x = DVector::zeros(2);
        let t = TimePoint::new(0.5);
        let v0 = distilled_velocity(&cond, &uncond, t, &x, None, 0.0).unwrap();
        assert_eq!(v0, DVector::zeros(2));
        let v1 = distilled_velocity(&cond, &uncond, t, &x, None, 1.0).unwrap();
        assert!((v1 - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);
        let v3 = distilled_velocity(&cond, &uncond, t, &x, None, 3.0).unwrap();
        assert!((v3 - DVector::from_vec(vec![3.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn gap_norm_arithmetic() {
        let uncond = constant(&[0.0, 0.0]);
        let cond = constant(&[3.0, 4.0]);
        let x = DVector::zeros(2);
        let t = TimePoint::new(0.5);
        assert!((prediction_gap(&cond, &uncond, t, &x, None).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(prediction_gap(&uncond, &uncond, t, &x, None).unwrap(), 0.0);
    }

    // Frozen composition oracle: analytic gap on the default two-cluster world.
    #[test]
    fn gap_on_two_cluster_world_matches_oracle() {
        let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.35));
        let cond = FieldHandle::analytic(world.clone());
        let uncond = FieldHandle::analytic(world);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let g = prediction_gap(&cond, &uncond, TimePoint::new(0.5), &x, Some("A")).unwrap();
        assert!((g - 5.646343944694681).abs() < 1e-10);
    }

    #[test]
    fn cfg_is_affine_in_guidance() {
        let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.35));
        let cond = FieldHandle::perturbed(
            FieldHandle::analytic(world.clone()),
            Perturbation::from_seed(11, 0.1, 2),
        );
        let uncond = FieldHandle::analytic(world);
        let t = TimePoint::new(0.37);
        let mut rng = SplitMix64::new(123);
        for _ in 0..32 {
            let x = DVector::from_vec(vec![rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)]);
            let w1 = rng.uniform(-2.0, 4.0);
            let w2 = rng.uniform(-2.0, 4.0);
            let a = cfg_velocity(&cond, &uncond, w1, t, &x, Some("A")).unwrap();
            let b = cfg_velocity(&cond, &uncond, w2, t, &x, Some("A")).unwrap();
            let mid = cfg_velocity(&cond, &uncond, 0.5 * (w1 + w2), t, &x, Some("A")).unwrap();
            assert!((a + b - 2.0 * mid).norm() < 1e-12);
        }
    }

    #[test]
    fn distilled_matches_cfg_extrapolation() {
        let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.35));
        let cond = FieldHandle::perturbed(
            FieldHandle::analytic(world.clone()),
            Perturbation::from_seed(11, 0.1, 2),
        );
        let uncond = FieldHandle::perturbed(
            FieldHandle::analytic(world),
            Perturbation::from_seed(13, 0.1, 2),
        );
        let t = TimePoint::new(0.61);
        let mut rng = SplitMix64::new(321);
        for _ in 0..16 {
            let x = DVector::from_vec(vec![rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)]);
            let w = rng.uniform(0.0, 4.0);
            let a = distilled_velocity(&cond, &uncond, t, &x, Some("A"), w).unwrap();
            let b = cfg_velocity(&cond, &uncond, w, t, &x, Some("A")).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn handle_kinds_compose() {
        let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.35));
        let cond = FieldHandle::perturbed(
            FieldHandle::analytic(world.clone()),
            Perturbation::from_seed(11, 0.1, 2),
        );
        let uncond = FieldHandle::analytic(world);
        let t = TimePoint::new(0.45);
        let x = DVector::from_vec(vec![0.2, -0.6]);

        // a w = 1 extrapolated handle evaluates identically to its conditional base
        let unit = FieldHandle::CfgExtrapolated {
            cond: Box::new(cond.clone()),
            uncond: Box::new(uncond.clone()),
            guidance: 1.0,
        };
        let direct = cond.eval(t, &x, Some("A")).unwrap();
        assert!((unit.eval(t, &x, Some("A")).unwrap() - &direct).norm() <= 1e-14);

        // a distilled handle with fixed w matches the free-function form
        let distilled = FieldHandle::Distilled {
            cond: Box::new(cond.clone()),
            uncond: Box::new(uncond.clone()),
            guidance: 2.5,
        };
        let expected = distilled_velocity(&cond, &uncond, t, &x, Some("A"), 2.5).unwrap();
        assert_eq!(distilled.eval(t, &x, Some("A")).unwrap(), expected);
    }

    #[test]
    fn nan_input_is_rejected() {
        let f = constant(&[1.0]);
        let x = DVector::from_vec(vec![f64::NAN]);
        assert!(matches!(
            f.eval(TimePoint::new(0.5), &x, None),
            Err(Error::NonFinite(_))
        ));
    }
}
