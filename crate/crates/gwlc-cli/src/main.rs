//! Command-line front end for the gwlc codec.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gwlc::container::{
    decode_base_layer, decode_volume, encode_volume, Container, EncodeConfig, McMode, RadiusMode,
};
use gwlc::metrics::rate_report;
use gwlc::report;
use gwlc::sampling::InterpMethod;
use gwlc::volume::{
    generate_phantom, load_volume, save_lowpass_volume, save_volume, PhantomMotion, Volume,
};

#[derive(Parser)]
#[command(name = "gwlc", version, about = "Scalable lossless volume codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a raw volume into a coded container.
    Encode(EncodeArgs),
    /// Decode a container back to a raw volume.
    Decode(DecodeArgs),
    /// Show header fields and per-stream sizes of a container.
    Info { container: PathBuf },
    /// Compare a container against the original volume.
    Metrics {
        original: PathBuf,
        container: PathBuf,
    },
    /// Sweep densities, interpolation methods and compensation modes.
    Bench(BenchArgs),
    /// Generate a synthetic test volume.
    GenPhantom(PhantomArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Nearest,
    Linear,
    Natural,
}

impl From<MethodArg> for InterpMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Nearest => InterpMethod::Nearest,
            MethodArg::Linear => InterpMethod::Linear,
            MethodArg::Natural => InterpMethod::Natural,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum McArg {
    Graph,
    Block,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusModeArg {
    Smooth,
    Fixed,
}

#[derive(Args)]
struct ConfigArgs {
    /// Maximum search radius.
    #[arg(long, default_value_t = 3)]
    r_max: u8,
    /// Per-pixel radius assignment.
    #[arg(long, value_enum, default_value_t = RadiusModeArg::Smooth)]
    radius_mode: RadiusModeArg,
    /// Lowpass quality target in dB driving the binary mask (50 suits
    /// 12-bit data).
    #[arg(long, default_value_t = 50.0)]
    psnr_target: f64,
    /// Transmit the full motion map instead of masking it.
    #[arg(long)]
    no_mask: bool,
    /// Sampling density index: k of 16 pixels per 4x4 tile.
    #[arg(long, default_value_t = 16)]
    k: u8,
    /// Reconstruction method for subsampled maps.
    #[arg(long, value_enum, default_value_t = MethodArg::Nearest)]
    method: MethodArg,
    /// Temporal compensation mode.
    #[arg(long, value_enum, default_value_t = McArg::Graph)]
    mc: McArg,
    /// Block size for the block-matching baseline.
    #[arg(long, default_value_t = 4)]
    block_size: u8,
}

impl ConfigArgs {
    fn to_config(&self) -> EncodeConfig {
        EncodeConfig {
            r_max: self.r_max,
            radius_mode: match self.radius_mode {
                RadiusModeArg::Smooth => RadiusMode::Smooth,
                RadiusModeArg::Fixed => RadiusMode::Fixed,
            },
            psnr_target: if self.no_mask {
                None
            } else {
                Some(self.psnr_target)
            },
            density_index: self.k,
            method: self.method.into(),
            mc: match self.mc {
                McArg::Graph => McMode::Graph,
                McArg::Block => McMode::Block {
                    block_size: self.block_size,
                },
                McArg::None => McMode::None,
            },
            ..EncodeConfig::default()
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    output: PathBuf,
    /// Decode only the lowpass base layer (half frame rate, signed
    /// samples).
    #[arg(long)]
    bl_only: bool,
}

#[derive(Args)]
struct BenchArgs {
    input: PathBuf,
    /// Also write all rows as comma-separated values.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PhantomArgs {
    output: PathBuf,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 8)]
    frames: usize,
    #[arg(long, default_value_t = 12)]
    bit_depth: u8,
    /// Horizontal translation per frame, pixels.
    #[arg(long, default_value_t = 1)]
    vx: i32,
    /// Vertical translation per frame, pixels.
    #[arg(long, default_value_t = 0)]
    vy: i32,
    /// Additive uniform noise amplitude.
    #[arg(long, default_value_t = 4)]
    noise: u16,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load_container(path: &PathBuf) -> Result<Container> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Container::from_bytes(&bytes)?)
}

fn print_info(container: &Container) {
    let h = &container.header;
    println!("dimensions     {}x{}x{}x{}", h.width, h.height, h.slices, h.frames);
    println!("bit depth      {}", h.bit_depth);
    println!("r_max          {}", h.r_max);
    println!("radius mode    {:?}", h.radius_mode);
    println!("masking        {}", h.masking);
    println!("density        {} / 16 ({:.2}%)", h.density_index, h.density_index as f64 * 6.25);
    println!("method         {}", h.method);
    println!("mc mode        {:?}", h.mc);
    println!("spatial levels {}", h.levels);
    let r = rate_report(container);
    println!("LP bytes       {}", r.lowpass);
    println!("HP bytes       {}", r.highpass);
    println!("m_tx bytes     {}", r.motion);
    println!("header bytes   {}", r.header);
    println!("total bytes    {}", r.file_total());
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Encode(args) => {
            let volume = load_volume(&args.input)?;
            let container = encode_volume(&volume, &args.config.to_config())?;
            fs::write(&args.output, container.to_bytes())
                .with_context(|| format!("writing {}", args.output.display()))?;
            let r = rate_report(&container);
            println!(
                "encoded {} -> {} ({} bytes, m_tx {})",
                args.input.display(),
                args.output.display(),
                r.file_total(),
                r.motion
            );
        }
        Command::Decode(args) => {
            let container = load_container(&args.input)?;
            if args.bl_only {
                let (header, planes) = decode_base_layer(&container)?;
                save_lowpass_volume(&args.output, &header, &planes)?;
                println!(
                    "decoded base layer: {} frames per slice -> {}",
                    header.frames,
                    args.output.display()
                );
            } else {
                let volume = decode_volume(&container)?;
                save_volume(&args.output, &volume)?;
                println!(
                    "decoded {} frames per slice -> {}",
                    volume.header().frames,
                    args.output.display()
                );
            }
        }
        Command::Info { container } => print_info(&load_container(&container)?),
        Command::Metrics {
            original,
            container,
        } => {
            let volume = load_volume(&original)?;
            let container = load_container(&container)?;
            let decoded = decode_volume(&container)?;
            let lossless = decoded == volume;
            let quality = report::mean_pair_quality(&volume, &container)?;
            let r = rate_report(&container);
            println!("lossless      {}", if lossless { "yes" } else { "NO" });
            println!("PSNR_LP_t     {:.2} dB (mean over pairs)", quality);
            println!(
                "bytes         LP {} | HP {} | m_tx {} | sum {}",
                r.lowpass,
                r.highpass,
                r.motion,
                r.payload_total()
            );
        }
        Command::Bench(args) => {
            let volume = load_volume(&args.input)?;
            let base = args.config.to_config();
            let mut all_rows = Vec::new();

            let rows = report::radius_table(&volume, &base)?;
            print!("{}", report::render_table("radius / smoothing / masking", &rows));
            all_rows.extend(rows);
            println!();

            for method in InterpMethod::ALL {
                let rows = report::density_sweep(&volume, &base, method)?;
                print!(
                    "{}",
                    report::render_table(&format!("density sweep, {method}"), &rows)
                );
                all_rows.extend(rows);
                println!();
            }

            let rows = report::method_comparison(&volume, &base)?;
            print!("{}", report::render_table("compensation comparison", &rows));
            all_rows.extend(rows);

            if let Some(csv) = args.csv {
                fs::write(&csv, report::render_csv(&all_rows))
                    .with_context(|| format!("writing {}", csv.display()))?;
                println!("\nwrote {} rows to {}", all_rows.len(), csv.display());
            }
            if all_rows.iter().any(|r| !r.lossless) {
                bail!("a configuration failed the lossless check");
            }
        }
        Command::GenPhantom(args) => {
            let motion = PhantomMotion {
                velocity: (args.vx, args.vy),
                noise_amplitude: args.noise,
            };
            let frames = generate_phantom(
                args.width,
                args.height,
                args.frames,
                args.bit_depth,
                &motion,
                args.seed,
            )?;
            let volume = Volume::from_sequence(frames, args.bit_depth)?;
            save_volume(&args.output, &volume)?;
            println!(
                "wrote {}x{}x1x{} phantom -> {}",
                args.width,
                args.height,
                args.frames,
                args.output.display()
            );
        }
    }
    Ok(())
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
