//! Anderson acceleration on bare fixed-point problems: the hand-traceable
//! scalar case, exactness on affine maps, and the speedup over Picard
//! iteration on a nonlinear contraction.
//!
//! Run with: cargo run --example anderson_acceleration

use flowmp::anderson::{solve_weights, AaSpec, AaState};
use flowmp::rng::SplitMix64;
use flowmp::Result;
use nalgebra::{DMatrix, DVector};

fn main() {
    println!("=== Anderson acceleration ===\n");

    // g(z) = 0.5 z + 1 has fixed point z* = 2. Plain iteration halves the
    // error each step; AA(1,1) solves it after one mixing step.
    println!("scalar map g(z) = 0.5 z + 1, z0 = 0:");
    let mut op =
        |z: &DVector<f64>| -> Result<DVector<f64>> { Ok(0.5 * z + DVector::from_vec(vec![1.0])) };
    let spec = AaSpec {
        window: 1,
        damping: 1.0,
        lambda_reg: 0.0,
    };
    let (mut state, z1) = AaState::primed(DVector::from_vec(vec![0.0]), &mut op).unwrap();
    println!("  z1 = {} (raw application)", z1[0]);
    let z2 = state.step(&spec, &mut op).unwrap();
    println!(
        "  z2 = {} (mixed: alpha = [-1, 2] zeroes the residual)\n",
        z2[0]
    );

    // the mixing weights are worth seeing once
    let alpha = solve_weights(
        &[DVector::from_vec(vec![1.0]), DVector::from_vec(vec![0.5])],
        0.0,
    )
    .unwrap();
    println!(
        "  weights for residuals [1.0, 0.5]: [{}, {}]\n",
        alpha[0], alpha[1]
    );

    // affine maps in d dimensions are solved exactly once the window has
    // gathered d+1 residuals
    println!("affine maps z -> A z + b (|A| = 0.5), AA(d, 1):");
    let mut rng = SplitMix64::new(2025);
    for d in 1..=3usize {
        let raw = DMatrix::from_fn(d, d, |_, _| rng.next_normal());
        let a = raw.qr().q() * 0.5;
        let b = DVector::from_fn(d, |_, _| rng.uniform(-2.0, 2.0));
        let fixed = (DMatrix::identity(d, d) - &a).lu().solve(&b).unwrap();
        let mut op = |z: &DVector<f64>| -> Result<DVector<f64>> { Ok(&a * z + &b) };
        let spec = AaSpec {
            window: d,
            damping: 1.0,
            lambda_reg: 0.0,
        };
        let (mut state, mut z) =
            AaState::primed(DVector::from_fn(d, |_, _| rng.next_normal()), &mut op).unwrap();
        for _ in 1..=d {
            z = state.step(&spec, &mut op).unwrap();
        }
        println!(
            "  d = {d}: |z_(d+1) - z*| = {:.2e} after {} accelerated steps",
            (&z - &fixed).norm(),
            d + 1
        );
    }
    println!();

    // a nonlinear contraction: AA(2,1) vs damped Picard
    println!("nonlinear map g(z) = cos(0.9 z) (scalar):");
    let mut op = |z: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(DVector::from_vec(vec![(0.9 * z[0]).cos()]))
    };
    let tol = 1e-12;
    let fixed = {
        let mut z = 0.5f64;
        for _ in 0..200 {
            z = (0.9 * z).cos();
        }
        z
    };
    for (name, window, damping) in [("Picard (AA(0,1))", 0usize, 1.0), ("AA(2,1)", 2, 1.0)] {
        let spec = AaSpec {
            window,
            damping,
            lambda_reg: 1e-10,
        };
        let mut state = AaState::new(DVector::from_vec(vec![0.0]));
        let mut iterations = 0;
        for k in 1..=100 {
            let z = state.step(&spec, &mut op).unwrap();
            iterations = k;
            if (z[0] - fixed).abs() < tol {
                break;
            }
        }
        println!("  {name:>18}: {iterations} iterations to |z - z*| < 1e-12");
    }
}
