//! Tour of the analytic world: posterior weights and means, ideal velocity
//! fields, smoothed distance potentials, and the gradient identity that ties
//! them together.
//!
//! Run with: cargo run --example analytic_world

use nalgebra::DVector;

use flowmp::world::{generators, LabeledPointCloud, TimePoint};

fn main() {
    println!("=== Analytic worlds ===\n");

    // A tiny 1-D cloud makes every quantity easy to eyeball.
    let line = LabeledPointCloud::new(
        vec![vec![0.0], vec![2.0]],
        None,
        vec!["A".to_string(), "A".to_string()],
    )
    .unwrap();
    let x = DVector::from_vec(vec![0.0]);
    let t = TimePoint::new(0.5);

    println!("two-point line {{0, 2}}, probe x = 0, t = 0.5:");
    let w = line.posterior_weights(Some("A"), &x, t).unwrap();
    println!(
        "  posterior weights     : [{:.6}, {:.6}]  (ratio e^-2)",
        w[0], w[1]
    );
    let m = line.posterior_mean(Some("A"), &x, t).unwrap();
    println!("  posterior mean        : {:.6}", m[0]);
    let v = line.ideal_velocity(Some("A"), &x, t).unwrap();
    println!(
        "  ideal velocity        : {:.6}  ((mean - x)/(1 - t))",
        v[0]
    );
    let d = line.smoothed_sq_distance(Some("A"), &x, 1.0).unwrap();
    println!("  smoothed sq distance  : {:.6}  (sigma = 1)", d);
    println!();

    // The smoothed distance tightens onto the true squared set distance as
    // sigma shrinks.
    println!("sigma ladder at x = 0.7 (true min squared distance = 0.49):");
    let probe = DVector::from_vec(vec![0.7]);
    let mut sigma = 1.0;
    while sigma >= 1e-4 {
        let d = line.smoothed_sq_distance(Some("A"), &probe, sigma).unwrap();
        println!("  sigma = {sigma:<8.4} dist^2 = {d:.8}");
        sigma /= 8.0;
    }
    println!();

    // A richer 2-D world with two labeled clusters.
    let world = generators::two_clusters(7, 8, 2.0, 0.35);
    println!(
        "two-cluster world: {} points, labels {:?}",
        world.len(),
        world.label_names().collect::<Vec<_>>()
    );
    let ca = world.centroid(Some("A")).unwrap();
    let cb = world.centroid(Some("B")).unwrap();
    println!("  centroid A: ({:+.3}, {:+.3})", ca[0], ca[1]);
    println!("  centroid B: ({:+.3}, {:+.3})", cb[0], cb[1]);
    println!();

    // Conditional and pooled velocities disagree wherever the condition
    // carries information; their gap is the guidance sensitivity.
    println!("velocities at the origin as t advances:");
    println!(
        "  {:>5} {:>22} {:>22} {:>8}",
        "t", "v_cond(A)", "v_uncond", "gap"
    );
    let origin = DVector::from_vec(vec![0.0, 0.0]);
    for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let tp = TimePoint::new(t);
        let vy = world.ideal_velocity(Some("A"), &origin, tp).unwrap();
        let vu = world.ideal_velocity(None, &origin, tp).unwrap();
        println!(
            "  {:>5.2} ({:+9.4}, {:+9.4}) ({:+9.4}, {:+9.4}) {:>8.4}",
            t,
            vy[0],
            vy[1],
            vu[0],
            vu[1],
            (&vy - &vu).norm()
        );
    }
    println!();

    // The homotopy objective's gradient is -2 t (1 - t) times the ideal
    // velocity; central differences confirm it.
    println!("gradient identity spot checks (analytic vs central differences):");
    let h = 1e-5;
    for (x, y, t) in [(0.5, -0.25, 0.3), (-1.2, 0.8, 0.6), (2.0, 0.1, 0.85)] {
        let p = DVector::from_vec(vec![x, y]);
        let tp = TimePoint::new(t);
        let grad = world.potential_gradient(Some("A"), &p, tp).unwrap();
        let mut numeric = DVector::zeros(2);
        for k in 0..2 {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[k] += h;
            pm[k] -= h;
            numeric[k] = (world.potential(Some("A"), &pp, tp).unwrap()
                - world.potential(Some("A"), &pm, tp).unwrap())
                / (2.0 * h);
        }
        let rel = (&grad - &numeric).norm() / (1.0 + grad.norm());
        println!("  x = ({x:+.2}, {y:+.2}), t = {t}: relative error {rel:.2e}");
    }
}
