use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glap::config::Config;
use glap::pipeline::{self, ErrorClass, PipelineError, Stage};

#[derive(Parser)]
#[command(name = "glap", version, about = "Content-adaptive Pannini viewports from 360 degree images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines (a previous manifest works too).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Equirectangular input image.
    #[arg(long)]
    eri: Option<PathBuf>,
    /// Equirectangular class-label map (0 = background).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Any config key, e.g. `-s beta=0.2 -s projection=gpp(0.5)`.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Render one viewport.
    Render(RunArgs),
    /// Render several projections into a labeled sheet.
    Compare(RunArgs),
    /// Dump the stretching / bending cost surface of the global search.
    Measures(RunArgs),
    /// Analyze pairwise-comparison votes.
    Eval {
        votes: PathBuf,
        #[arg(short, long, default_value = "eval")]
        out: PathBuf,
    },
    /// Convert between equirectangular and cube-map images.
    Cubemap {
        #[command(subcommand)]
        direction: CubeCommand,
    },
}

#[derive(Subcommand)]
enum CubeCommand {
    /// Split an ERI into six `face_<name>.png` files.
    ToCube {
        eri: PathBuf,
        out_dir: PathBuf,
        #[arg(long)]
        face_px: Option<usize>,
    },
    /// Reassemble an ERI from a directory of faces.
    ToEri {
        dir: PathBuf,
        out: PathBuf,
        #[arg(long, default_value_t = 2048)]
        width: usize,
    },
}

fn load_config(args: &RunArgs) -> Result<Config, PipelineError> {
    let config_err = |e| PipelineError::new(Stage::Config, ErrorClass::Config, e);
    let mut config = match &args.config {
        Some(path) => Config::from_file(path).map_err(config_err)?,
        None => Config::default(),
    };
    let mut overrides = Vec::new();
    if let Some(p) = &args.eri {
        overrides.push(format!("eri={}", p.display()));
    }
    if let Some(p) = &args.labels {
        overrides.push(format!("labels={}", p.display()));
    }
    if let Some(p) = &args.out {
        overrides.push(format!("out_dir={}", p.display()));
    }
    overrides.extend(args.overrides.iter().cloned());
    config.apply_overrides(&overrides).map_err(config_err)?;
    Ok(config)
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, PipelineError> {
    let files = match cli.command {
        Command::Render(args) => {
            let (out, files) = pipeline::cmd_render(&load_config(&args)?)?;
            if let Some(p) = out.params_b() {
                eprintln!("d_b = {}, vc_b = {}", p.d, p.vc);
            }
            files
        }
        Command::Compare(args) => pipeline::cmd_compare(&load_config(&args)?)?.1,
        Command::Measures(args) => pipeline::cmd_measures(&load_config(&args)?)?.1,
        Command::Eval { votes, out } => pipeline::cmd_eval(&votes, &out)?.1,
        Command::Cubemap { direction } => match direction {
            CubeCommand::ToCube { eri, out_dir, face_px } => pipeline::cmd_eri_to_cube(&eri, &out_dir, face_px)?,
            CubeCommand::ToEri { dir, out, width } => pipeline::cmd_cube_to_eri(&dir, &out, width)?,
        },
    };
    Ok(files.files)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
