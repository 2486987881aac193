//! The mechanism study: relative gap change r for plain fixed-point
//! projection vs its AA(1,1)-accelerated version across K in {2, 4, 6},
//! 64 chains, w = 1.5.
//!
//! Run with: cargo run --example compare_sweep

use std::sync::Arc;

use flowmp::anderson::AaSpec;
use flowmp::diagnostics::gap_profile;
use flowmp::fields::{FieldHandle, Perturbation};
use flowmp::sampler::{generate_batch, Method, RecordMode, SamplerConfig};
use flowmp::world::generators;

fn main() {
    println!("=== Projection sweep: relative gap change r ===");
    println!("two-cluster world, eps = 0.1 perturbed fields, w = 1.5, N = 5, 64 chains");
    println!("r < 0 means the projection phase shrank the prediction gap.\n");

    let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.05));
    let cond = FieldHandle::perturbed(
        FieldHandle::analytic(world.clone()),
        Perturbation::from_seed(11, 0.1, 2),
    );
    let uncond = FieldHandle::perturbed(
        FieldHandle::analytic(world.clone()),
        Perturbation::from_seed(13, 0.1, 2),
    );

    println!(
        "{:>3} {:>16} {:>16} {:>14}",
        "K", "plain G mean r", "AA(1,1) mean r", "AA advantage"
    );
    for k in [2usize, 4, 6] {
        let mut rows = [0.0f64; 2];
        for (slot, method) in [(0, Method::CfgMp), (1, Method::CfgMpPlus)] {
            let config = SamplerConfig {
                method,
                steps: 5,
                guidance: 1.5,
                projection_iters: k,
                aa: AaSpec {
                    window: 1,
                    damping: 1.0,
                    lambda_reg: 1e-10,
                },
                t_min: 0.1,
                seed: 17,
                record: RecordMode::FullTrajectory,
                ..SamplerConfig::default()
            };
            let batch = generate_batch(&config, &cond, &uncond, "A", 2, 64).unwrap();
            rows[slot] = gap_profile(&batch.records).unwrap().mean_r.unwrap();
        }
        println!(
            "{:>3} {:>16.4} {:>16.4} {:>14.4}",
            k,
            rows[0],
            rows[1],
            rows[0] - rows[1]
        );
    }

    println!();
    println!("per-step view at K = 4 (mean r across chains):");
    for (name, method) in [("plain", Method::CfgMp), ("AA(1,1)", Method::CfgMpPlus)] {
        let config = SamplerConfig {
            method,
            steps: 5,
            guidance: 1.5,
            projection_iters: 4,
            t_min: 0.1,
            seed: 17,
            record: RecordMode::FullTrajectory,
            ..SamplerConfig::default()
        };
        let batch = generate_batch(&config, &cond, &uncond, "A", 2, 64).unwrap();
        let profile = gap_profile(&batch.records).unwrap();
        let cells: Vec<String> = profile
            .per_step
            .iter()
            .map(|s| format!("{:+.3}", s.mean_r.unwrap()))
            .collect();
        println!("  {:>8}: [{}]", name, cells.join(", "));
    }
}
