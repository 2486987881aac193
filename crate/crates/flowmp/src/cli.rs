//! Command implementations behind the `flowmp` binary.
//!
//! Exit codes: 0 success, 1 property/divergence failure, 2 usage or config
//! error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{CompareConfig, OutputFormat, RunConfig};
use crate::diagnostics::{gap_profile, sample_quality};
use crate::error::{Error, Result};
use crate::report;
use crate::sampler::{generate_batch, RecordMode};
use crate::verify::{run_suite, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "flowmp",
    about = "Guided flow-matching sampling lab on analytic point-cloud worlds",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sampling batch from a JSON config and write samples, summary,
    /// and optional trajectory files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv | json | both (overrides the config).
        #[arg(long)]
        format: Option<OutputFormat>,
        /// Exit nonzero when any chain diverges.
        #[arg(long)]
        strict: bool,
    },
    /// Run a named property suite with fixed seeds and print pass/fail lines.
    Verify {
        /// gradient-identity | decomposition | anderson | operators | all
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several sampler settings over one world and tabulate quality
    /// metrics per method.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print one chain's full trajectory record as JSON.
    Trajectory {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        chain: usize,
    },
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; --help/--version land here too
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate {
            config,
            out,
            format,
            strict,
        } => cmd_simulate(&config, out.as_deref(), format, strict),
        Command::Verify { suite, seed } => cmd_verify(&suite, seed.unwrap_or(42)),
        Command::Compare { config, out } => cmd_compare(&config, out.as_deref()),
        Command::Trajectory { config, chain } => cmd_trajectory(&config, chain),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::UnknownSuite(_) | Error::Json(_) | Error::Io(_) => {
                    if matches!(e, Error::UnknownSuite(_)) {
                        eprintln!("usage: flowmp verify <{}>", SUITES.join("|"));
                    }
                    EXIT_USAGE
                }
                _ => EXIT_FAILURE,
            }
        }
    }
}

pub fn cmd_simulate(
    config_path: &Path,
    out_override: Option<&Path>,
    format_override: Option<OutputFormat>,
    strict: bool,
) -> Result<i32> {
    let mut config = RunConfig::from_path(config_path)?;
    if let Some(dir) = out_override {
        config.output.dir = dir.to_path_buf();
    }
    if let Some(fmt) = format_override {
        config.output.format = fmt;
    }
    let world = config.build_world()?;
    let (cond, uncond) = config.build_fields(&world);

    let batch = generate_batch(
        &config.sampler,
        &cond,
        &uncond,
        &config.label,
        world.dimension(),
        config.sampler.chains,
    )?;

    let quality = if config.diagnostics.sample_quality {
        Some(sample_quality(
            &batch.final_samples(),
            &world,
            Some(&config.label),
        )?)
    } else {
        None
    };
    let profile =
        if config.diagnostics.gap_profile && config.sampler.record == RecordMode::FullTrajectory {
            Some(gap_profile(&batch.records)?)
        } else {
            None
        };

    let dir = &config.output.dir;
    std::fs::create_dir_all(dir)?;
    if config.output.format.csv() {
        report::write_samples_csv(&dir.join("samples.csv"), &batch.records, world.dimension())?;
    }
    if config.output.format.json() {
        report::write_json(
            &dir.join("summary.json"),
            &report::RunSummary {
                config: &config,
                summary: &batch.summary,
                sample_quality: quality.as_ref(),
                gap_profile: profile.as_ref(),
            },
        )?;
        if config.sampler.record == RecordMode::FullTrajectory {
            report::write_json(&dir.join("trajectory.json"), &batch.records)?;
        }
    }
    if config.output.svg {
        if world.dimension() != 2 {
            return Err(Error::config(
                "output.svg",
                "trajectory plots are only available for 2-D worlds",
            ));
        }
        if config.sampler.record != RecordMode::FullTrajectory {
            return Err(Error::config(
                "output.svg",
                "trajectory plots need sampler.record = \"full-trajectory\"",
            ));
        }
        report::write_trajectory_svg(&dir.join("trajectory.svg"), &batch.records, &world)?;
    }

    println!(
        "simulate: {} chains, {} steps, method {}, {} divergences -> {}",
        batch.summary.chains,
        config.sampler.steps,
        config.sampler.method,
        batch.summary.divergences,
        dir.display()
    );
    if strict && batch.summary.divergences > 0 {
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(suite: &str, seed: u64) -> Result<i32> {
    let checks = run_suite(suite, seed)?;
    let mut failures = 0;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} {name} measured={measured:.3e} tol={tol:.3e} ({detail})",
            name = check.name,
            measured = check.measured,
            tol = check.tolerance,
            detail = check.detail
        );
        if !check.passed {
            failures += 1;
        }
    }
    println!("{}: {} checks, {} failed", suite, checks.len(), failures);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_compare(config_path: &Path, out_override: Option<&Path>) -> Result<i32> {
    let mut config = CompareConfig::from_path(config_path)?;
    if let Some(dir) = out_override {
        config.output.dir = dir.to_path_buf();
    }
    let world = {
        let probe = RunConfig {
            dataset: config.dataset.clone(),
            label: config.label.clone(),
            fields: config.fields,
            sampler: config.runs[0],
            diagnostics: Default::default(),
            output: config.output.clone(),
        };
        probe.build_world()?
    };
    let (cond, uncond) = (
        config.fields.cond.build(&world),
        config.fields.uncond.build(&world),
    );

    let mut rows = Vec::new();
    for sampler in &config.runs {
        let mut sampler = *sampler;
        // r statistics need the traces
        sampler.record = RecordMode::FullTrajectory;
        sampler.record_gaps = true;
        let start = Instant::now();
        let batch = generate_batch(
            &sampler,
            &cond,
            &uncond,
            &config.label,
            world.dimension(),
            sampler.chains,
        )?;
        let wall = start.elapsed().as_secs_f64();
        let quality = sample_quality(&batch.final_samples(), &world, Some(&config.label))?;
        let profile = gap_profile(&batch.records)?;
        let mean_final_gap = *batch.summary.mean_gap_per_step.last().unwrap_or(&f64::NAN);
        rows.push(report::CompareRow {
            method: sampler.method.to_string(),
            guidance: sampler.guidance,
            steps: sampler.steps,
            projection_iters: sampler.projection_iters,
            window: sampler.aa.window,
            damping: sampler.aa.damping,
            energy_distance: quality.energy_distance,
            mean_min_distance: quality.mean_min_distance,
            mean_final_gap,
            mean_r: profile.mean_r,
            divergences: batch.summary.divergences,
            wall_time_s: wall,
        });
    }

    let dir = &config.output.dir;
    std::fs::create_dir_all(dir)?;
    if config.output.format.csv() {
        report::write_compare_csv(&dir.join("compare.csv"), &rows)?;
    }
    if config.output.format.json() {
        report::write_json(&dir.join("compare.json"), &rows)?;
    }
    println!(
        "{:<12} {:>5} {:>4} {:>3} {:>14} {:>14} {:>10} {:>6}",
        "method", "w", "N", "K", "energy_dist", "mean_min_dist", "mean_r", "div"
    );
    for r in &rows {
        println!(
            "{:<12} {:>5} {:>4} {:>3} {:>14.6} {:>14.6} {:>10} {:>6}",
            r.method,
            r.guidance,
            r.steps,
            r.projection_iters,
            r.energy_distance,
            r.mean_min_distance,
            r.mean_r.map(|v| format!("{v:+.4}")).unwrap_or_default(),
            r.divergences
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_trajectory(config_path: &Path, chain: usize) -> Result<i32> {
    let mut config = RunConfig::from_path(config_path)?;
    if chain >= config.sampler.chains {
        return Err(Error::config(
            "chain",
            format!(
                "chain index {chain} out of range ({} chains configured)",
                config.sampler.chains
            ),
        ));
    }
    config.sampler.record = RecordMode::FullTrajectory;
    let world = config.build_world()?;
    let (cond, uncond) = config.build_fields(&world);
    let batch = generate_batch(
        &config.sampler,
        &cond,
        &uncond,
        &config.label,
        world.dimension(),
        config.sampler.chains,
    )?;
    let record = &batch.records[chain];
    println!("{}", serde_json::to_string_pretty(record)?);
    Ok(EXIT_OK)
}
