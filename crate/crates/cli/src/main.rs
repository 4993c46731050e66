use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fractaug_cli::augment::check_suffix;
use fractaug_cli::bench::{sides_between, to_csv};
use fractaug_cli::{augment, render_plasma, run_bench, AugmentOptions, BenchImpl, BenchOptions};

#[derive(Parser)]
#[command(name = "fractaug", version, about = "Deterministic plasma-fractal image augmentation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Augment every PNG in a directory with a pipeline file.
    Augment {
        /// Pipeline (.aug) file.
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        input_dir: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
        /// Masks are `<stem><suffix>.png` next to the image.
        #[arg(long, default_value = "_mask")]
        mask_suffix: String,
        /// Keypoints are `<stem><suffix>.csv` next to the image.
        #[arg(long, default_value = "_points")]
        points_suffix: String,
        /// Also write `<stem>_validity.png`.
        #[arg(long)]
        emit_validity: bool,
        /// Print the applied parameters as JSON on stdout.
        #[arg(long)]
        manifest: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Render a normalized plasma as a 16-bit PNG.
    Plasma {
        #[arg(long)]
        steps: u32,
        #[arg(long, default_value_t = 0.5)]
        roughness: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time diamond-square implementations over grid sizes.
    Bench {
        /// Comma-separated sides; overrides --min-side/--max-side.
        #[arg(long, value_delimiter = ',')]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 65)]
        min_side: usize,
        #[arg(long, default_value_t = 1025)]
        max_side: usize,
        /// Any of conv, conv-parallel, recursive.
        #[arg(long, value_delimiter = ',', default_value = "conv,recursive")]
        impls: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the preview service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Augment {
            pipeline,
            seed,
            input_dir,
            output_dir,
            mask_suffix,
            points_suffix,
            emit_validity,
            manifest,
            threads,
        } => {
            check_suffix(&mask_suffix)?;
            check_suffix(&points_suffix)?;
            let opts = AugmentOptions {
                mask_suffix,
                points_suffix,
                emit_validity,
                threads,
                ..AugmentOptions::new(pipeline, seed, input_dir, output_dir)
            };
            let report = augment(&opts)?;
            if manifest {
                println!("{}", serde_json::to_string_pretty(&report.manifest)?);
            }
            for (file, err) in &report.errors {
                eprintln!("{file}: {err}");
            }
            eprintln!("{} augmented, {} failed", report.processed, report.errors.len());
            Ok(if report.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Cmd::Plasma {
            steps,
            roughness,
            seed,
            out,
        } => {
            render_plasma(steps, roughness, seed, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bench {
            sides,
            min_side,
            max_side,
            impls,
            repeats,
            csv,
        } => {
            let sides = if sides.is_empty() {
                sides_between(min_side, max_side)
            } else {
                sides
            };
            let impls = impls
                .iter()
                .map(|s| BenchImpl::parse(s))
                .collect::<Result<Vec<_>>>()?;
            let opts = BenchOptions {
                sides,
                impls,
                repeats,
                ..BenchOptions::default()
            };
            let text = to_csv(&run_bench(&opts)?);
            match csv {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve { port, host } => {
            let addr: SocketAddr = format!("{host}:{port}").parse().context("bad address")?;
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            rt.block_on(fractaug_service::serve(addr))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
