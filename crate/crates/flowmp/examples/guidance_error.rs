//! The guidance error decomposition in action: the optimal scale w*, the
//! irreducible model error, and the quadratic sensitivity governed by the
//! prediction gap.
//!
//! Run with: cargo run --example guidance_error

use std::sync::Arc;

use nalgebra::DVector;

use flowmp::diagnostics::{decomposition_check, optimal_w};
use flowmp::fields::{FieldHandle, Perturbation};
use flowmp::world::{generators, TimePoint};

fn main() {
    println!("=== Guidance error decomposition ===\n");

    // The analytic world plays the ideal field; perturbed copies play the
    // trained model. That makes w* exactly computable, which it never is
    // for a real network.
    let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.35));
    let cond_model = FieldHandle::perturbed(
        FieldHandle::analytic(world.clone()),
        Perturbation::from_seed(11, 0.2, 2),
    );
    let uncond_model = FieldHandle::perturbed(
        FieldHandle::analytic(world.clone()),
        Perturbation::from_seed(13, 0.2, 2),
    );

    let x = DVector::from_vec(vec![-0.4, 0.3]);
    let t = TimePoint::new(0.5);
    let v_cond = cond_model.eval(t, &x, Some("A")).unwrap();
    let v_uncond = uncond_model.eval(t, &x, None).unwrap();
    let v_ideal = world.ideal_velocity(Some("A"), &x, t).unwrap();

    let w_star = optimal_w(&v_cond, &v_uncond, &v_ideal).unwrap();
    println!("probe x = ({:+.2}, {:+.2}), t = 0.5", x[0], x[1]);
    println!("  optimal guidance scale w* = {w_star:.4}\n");

    println!(
        "  {:>6} {:>14} {:>14} {:>14} {:>12}",
        "w", "total error", "model error", "(w*-w)^2 gap^2", "residual"
    );
    for w in [0.0, 0.5, 1.0, 1.5, 2.0, w_star, 3.0, 5.0] {
        let d = decomposition_check(&v_cond, &v_uncond, &v_ideal, w).unwrap();
        let sensitivity = (d.optimal_w - w).powi(2) * d.gap_sq;
        println!(
            "  {:>6.3} {:>14.6} {:>14.6} {:>14.6} {:>12.2e}",
            w, d.total_error, d.model_error, sensitivity, d.residual
        );
    }
    println!();
    println!("the model-error column is flat: no choice of w can remove it.");
    println!("the sensitivity column vanishes exactly at w = w*.\n");

    // The gap controls how sharply the error grows away from w*: fields with
    // a small prediction gap are robust to the guidance scale.
    println!("sensitivity vs prediction gap (same probe, varying model error):");
    println!(
        "  {:>8} {:>12} {:>16}",
        "epsilon", "gap", "error(w*+1)-error(w*)"
    );
    for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
        let cond = FieldHandle::perturbed(
            FieldHandle::analytic(world.clone()),
            Perturbation::from_seed(11, eps, 2),
        );
        let uncond = FieldHandle::perturbed(
            FieldHandle::analytic(world.clone()),
            Perturbation::from_seed(13, eps, 2),
        );
        let vc = cond.eval(t, &x, Some("A")).unwrap();
        let vu = uncond.eval(t, &x, None).unwrap();
        let ws = optimal_w(&vc, &vu, &v_ideal).unwrap();
        let base = decomposition_check(&vc, &vu, &v_ideal, ws).unwrap();
        let off = decomposition_check(&vc, &vu, &v_ideal, ws + 1.0).unwrap();
        println!(
            "  {:>8.2} {:>12.6} {:>16.6}",
            eps,
            base.gap_sq.sqrt(),
            off.total_error - base.total_error
        );
    }
    println!();
    println!("eliminating the gap (projection onto the agreement manifold) removes");
    println!("the sensitivity term entirely; that is what the mp samplers do.");
}
