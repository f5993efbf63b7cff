mod bench;
mod codec_io;
mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use padic_coding::digitio::{read_container, FlushMode, ModelDescriptor};

use codec_io::{compress, decompress, parse_freq_file, EncodeConfig, ModelChoice};
use error::CliError;

/// p-adic arithmetic coder for files.
#[derive(Parser)]
#[command(name = "padc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        opts: CodingArgs,
    },
    /// Decompress a file.
    Decode { input: PathBuf, output: PathBuf },
    /// Print the header of a compressed file.
    Stats { input: PathBuf },
    /// Compress every file in a directory and print a CSV report.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: CodingArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FlushArg {
    Min,
    Left,
}

#[derive(Args, Clone)]
struct CodingArgs {
    #[arg(long, value_enum, default_value_t = ModelChoice::Adaptive)]
    model: ModelChoice,
    /// Prime base.
    #[arg(short = 'P', default_value_t = 2)]
    p: u32,
    /// Digits per grid index.
    #[arg(short = 'N', default_value_t = 31)]
    n: u32,
    /// Disable the stable-point rescaling.
    #[arg(long)]
    no_ar: bool,
    #[arg(long, value_enum, default_value = "min")]
    flush: FlushArg,
    /// 257 whitespace-separated counts for the static model.
    #[arg(long)]
    freq_file: Option<PathBuf>,
}

impl CodingArgs {
    fn config(&self) -> Result<EncodeConfig, CliError> {
        let freqs = match &self.freq_file {
            Some(path) => {
                if self.model != ModelChoice::Static {
                    return Err(CliError::Usage("--freq-file needs --model static".into()));
                }
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Some(parse_freq_file(&text)?)
            }
            None => None,
        };
        let cfg = EncodeConfig {
            model: self.model,
            p: self.p,
            n: self.n,
            ar: !self.no_ar,
            flush: match self.flush {
                FlushArg::Min => FlushMode::Min,
                FlushArg::Left => FlushMode::Left,
            },
            freqs,
        };
        cfg.params()?;
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn model_name(m: &ModelDescriptor) -> &'static str {
    match m {
        ModelDescriptor::Static { .. } => "static",
        ModelDescriptor::Adaptive { .. } => "adaptive",
        ModelDescriptor::Huffman { .. } => "huffman",
        ModelDescriptor::Unary => "unary",
    }
}

fn stats(bytes: &[u8]) -> Result<String, CliError> {
    let (header, reader) = read_container(bytes).map_err(|e| CliError::Format(e.to_string()))?;
    let count = reader.declared_count();
    let p = header.params.prime();
    let payload = if p == 2 { count.div_ceil(8) } else { count };
    let flush = match header.flush {
        FlushMode::Min => "min",
        FlushMode::Left => "left",
    };
    Ok(format!(
        "prime: {p}\nlevel: {}\nar: {}\nflush: {flush}\nmodel: {}\nalphabet: {}\n\
         digits: {count}\npayload_bytes: {payload}\nheader_bytes: {}\ntotal_bytes: {}\n",
        header.params.level(),
        header.ar,
        model_name(&header.model),
        header.model.alphabet_size(),
        bytes.len() as u64 - payload,
        bytes.len(),
    ))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode { input, output, opts } => {
            let cfg = opts.config()?;
            let data = read(&input)?;
            let packed = compress(&data, &cfg)?;
            write(&output, &packed)?;
            println!("original {} bytes, compressed {} bytes", data.len(), packed.len());
        }
        Command::Decode { input, output } => {
            let data = decompress(&read(&input)?)?;
            write(&output, &data)?;
        }
        Command::Stats { input } => print!("{}", stats(&read(&input)?)?),
        Command::Bench { dir, opts } => {
            let cfg = opts.config()?;
            let rows = bench::run(&dir, &cfg)?;
            print!("{}", bench::to_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("padc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
