//! End-to-end sampling on the two-cluster world: vanilla guided Euler vs the
//! projection-corrected samplers, with sample-quality metrics and an SVG of
//! the trajectories.
//!
//! Run with: cargo run --example sampling_methods

use std::sync::Arc;

use flowmp::anderson::AaSpec;
use flowmp::diagnostics::{gap_profile, sample_quality};
use flowmp::fields::{FieldHandle, Perturbation};
use flowmp::report::write_trajectory_svg;
use flowmp::sampler::{generate_batch, Method, RecordMode, SamplerConfig};
use flowmp::world::generators;

fn main() {
    println!("=== Sampling methods on the two-cluster world ===\n");

    let world = Arc::new(generators::two_clusters(7, 8, 2.0, 0.05));
    // perturbed fields play an imperfect model; the guidance scale is set
    // well above 1 so the sensitivity term matters
    let cond = FieldHandle::perturbed(
        FieldHandle::analytic(world.clone()),
        Perturbation::from_seed(11, 0.5, 2),
    );
    let uncond = FieldHandle::perturbed(
        FieldHandle::analytic(world.clone()),
        Perturbation::from_seed(13, 0.5, 2),
    );

    let base = SamplerConfig {
        steps: 5,
        guidance: 4.0,
        t_min: 0.1,
        seed: 21,
        record: RecordMode::FullTrajectory,
        aa: AaSpec {
            window: 1,
            damping: 1.0,
            lambda_reg: 1e-10,
        },
        ..SamplerConfig::default()
    };
    let runs = [
        ("cfg", Method::Cfg, 0usize),
        ("cfg-mp", Method::CfgMp, 2),
        ("cfg-mp-plus", Method::CfgMpPlus, 2),
    ];

    println!(
        "{:<12} {:>15} {:>15} {:>10} {:>6}",
        "method", "energy distance", "mean min dist", "mean r", "div"
    );
    for (name, method, iters) in runs {
        let config = SamplerConfig {
            method,
            projection_iters: iters,
            ..base
        };
        let batch = generate_batch(&config, &cond, &uncond, "A", 2, 256).unwrap();
        let quality = sample_quality(&batch.final_samples(), &world, Some("A")).unwrap();
        let profile = gap_profile(&batch.records).unwrap();
        println!(
            "{:<12} {:>15.6} {:>15.6} {:>10} {:>6}",
            name,
            quality.energy_distance,
            quality.mean_min_distance,
            profile
                .mean_r
                .map(|r| format!("{r:+.4}"))
                .unwrap_or_else(|| "-".into()),
            batch.summary.divergences
        );

        if method == Method::CfgMpPlus {
            let path = std::env::temp_dir().join("flowmp_trajectories.svg");
            write_trajectory_svg(&path, &batch.records[..24.min(batch.records.len())], &world)
                .unwrap();
            println!("\nwrote 24 cfg-mp-plus trajectories to {}", path.display());
        }
    }

    println!();
    println!("the projection phase absorbs the model error that the large guidance");
    println!("scale amplifies, so both mp variants land closer to the target set.");
}
