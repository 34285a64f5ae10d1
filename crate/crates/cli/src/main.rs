use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ppmx::container::ContextMode;
use ppmx::ppm_codec::{decompress, encode, ModelConfig, Pitch};
use ppmx_cli::bench::{self, BenchPlan};
use ppmx_cli::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "ppmx",
    version,
    about = "PPM compressor with classic and compressed context models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Classic,
    Ccm,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a file.
    Compress {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Context length: symbols (classic, 1-16) or bits (ccm, 1-64).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..))]
        order: u8,
        /// Bits dropped per escape (ccm only). Defaults to the rounded
        /// average Huffman code length.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..))]
        pitch: Option<u8>,
        input: PathBuf,
        output: PathBuf,
    },
    /// Decompress a file written by `compress`.
    Decompress { input: PathBuf, output: PathBuf },
    /// Sweep a corpus and write CSV tables and SVG plots.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "1..6", value_parser = bench::parse_order_list)]
        classic_orders: std::vec::Vec<u8>,
        #[arg(long, default_value = "1..24", value_parser = bench::parse_order_list)]
        ccm_bits: std::vec::Vec<u8>,
        /// `auto` or a bit count.
        #[arg(long, default_value = "auto", value_parser = parse_pitch)]
        pitch: Pitch,
    },
}

fn parse_pitch(s: &str) -> Result<Pitch, String> {
    if s == "auto" {
        return Ok(Pitch::Auto);
    }
    match s.parse::<u8>() {
        Ok(p) if p > 0 => Ok(Pitch::Fixed(p)),
        _ => Err(format!(
            "expected `auto` or a positive bit count, got {s:?}"
        )),
    }
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Compress {
            mode,
            order,
            pitch,
            input,
            output,
        } => {
            let pitch = pitch.map_or(Pitch::Auto, Pitch::Fixed);
            let cfg = match mode {
                Mode::Classic => ModelConfig::classic(order),
                Mode::Ccm => ModelConfig::ccm(order, pitch),
            };
            let data = read(&input)?;
            let encoded = encode(&data, &cfg)?;
            write(&output, &encoded.container.write())?;
            let s = &encoded.stats;
            println!(
                "{} -> {}: {} -> {} bytes, {:.3} bits/symbol",
                input.display(),
                output.display(),
                s.input_bytes,
                s.output_bits / 8,
                s.bits_per_symbol()
            );
        }
        Command::Decompress { input, output } => {
            let data = decompress(&read(&input)?)?;
            write(&output, &data)?;
        }
        Command::Bench {
            corpus,
            out,
            classic_orders,
            ccm_bits,
            pitch,
        } => {
            let plan = BenchPlan {
                corpus,
                out,
                classic_orders,
                ccm_bits,
                pitch,
            };
            let report = bench::run(&plan)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for t in &report.tradeoffs {
                println!(
                    "{}: order {} vs {} bits: memory {:+.2}%, compression {:+.2}%",
                    t.file, t.classic_order, t.ccm_order, t.memory_gain_pct, t.compression_gain_pct
                );
            }
            for path in &report.written {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Compress {
        mode: Mode::Classic,
        pitch: Some(_),
        ..
    } = cli.command
    {
        eprintln!("error: --pitch applies to {} mode only", ContextMode::Ccm);
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
