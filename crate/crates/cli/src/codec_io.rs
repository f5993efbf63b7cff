//! Byte-file compression on top of the core codec.
//!
//! Files are coded over the byte alphabet: symbol `b` is byte value `b` and
//! EOM is symbol 256.

use std::fmt;

use padic_coding::codec::{self, CodecOptions};
use padic_coding::digitio::{read_container, write_container, FlushMode, Header};
use padic_coding::model::{huffman_code_lengths, Codebook, Model, ModelKind};
use padic_coding::padic::GridParams;

use crate::error::CliError;

pub const ALPHABET: usize = 256;
/// The one symbol of the unary model's alphabet.
pub const UNARY_BYTE: u8 = b'*';

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelChoice {
    Static,
    Adaptive,
    Unary,
    Huffman,
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Static => "static",
            Self::Adaptive => "adaptive",
            Self::Unary => "unary",
            Self::Huffman => "huffman",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone)]
pub struct EncodeConfig {
    pub model: ModelChoice,
    pub p: u32,
    pub n: u32,
    pub ar: bool,
    pub flush: FlushMode,
    /// Static model counts (256 bytes + EOM); derived from the input if absent.
    pub freqs: Option<Vec<u64>>,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self { model: ModelChoice::Adaptive, p: 2, n: 31, ar: true, flush: FlushMode::Min, freqs: None }
    }
}

impl EncodeConfig {
    pub fn params(&self) -> Result<GridParams, CliError> {
        let params = GridParams::new(self.p, self.n).map_err(|e| CliError::Usage(e.to_string()))?;
        if self.p == 2 && !(4..=31).contains(&self.n) {
            return Err(CliError::Usage(format!("-N {} out of range 4..=31 for P = 2", self.n)));
        }
        if self.n > 255 {
            return Err(CliError::Usage(format!("-N {} does not fit the header", self.n)));
        }
        Ok(params)
    }
}

/// Scales counts down until their total fits `cap`, keeping every count at
/// least 1.
fn fit_counts(counts: &[u64], cap: u64) -> Vec<u64> {
    let mut out = counts.to_vec();
    while out.iter().sum::<u64>() > cap {
        for c in &mut out {
            *c = (*c / 2).max(1);
        }
        if out.iter().all(|&c| c == 1) {
            break;
        }
    }
    out
}

fn byte_counts(data: &[u8]) -> Vec<u64> {
    let mut counts = vec![0u64; ALPHABET + 1];
    for &b in data {
        counts[b as usize] += 1;
    }
    counts[ALPHABET] = 1;
    counts
}

fn build_model(data: &[u8], cfg: &EncodeConfig, params: GridParams) -> Result<Model, CliError> {
    let model = match cfg.model {
        ModelChoice::Adaptive => Model::adaptive_model(ALPHABET, params),
        ModelChoice::Static => {
            let counts = match &cfg.freqs {
                Some(f) => f.clone(),
                None => {
                    let raw: Vec<u64> = byte_counts(data).into_iter().map(|c| c + 1).collect();
                    fit_counts(&raw, params.total_cap())
                }
            };
            Model::static_model(&counts, params)
        }
        ModelChoice::Huffman => {
            if params.prime() != 2 {
                return Err(CliError::Usage("the huffman model requires P = 2".into()));
            }
            let limit = params.level().min(255) as u8;
            let lengths = huffman_code_lengths(&byte_counts(data), limit);
            Codebook::canonical(&lengths).and_then(|cb| Model::huffman_model(&cb, params))
        }
        ModelChoice::Unary => {
            if data.iter().any(|&b| b != UNARY_BYTE) {
                return Err(CliError::Usage(format!(
                    "the unary model codes only files made of '{}' bytes",
                    UNARY_BYTE as char
                )));
            }
            Ok(Model::unary_model(params))
        }
    };
    model.map_err(|e| CliError::Usage(e.to_string()))
}

/// Encodes `data` into a container.
pub fn compress(data: &[u8], cfg: &EncodeConfig) -> Result<Vec<u8>, CliError> {
    let params = cfg.params()?;
    let model = build_model(data, cfg, params)?;
    let header = Header { params, ar: cfg.ar, flush: cfg.flush, model: model.descriptor() };
    let unary = model.kind() == ModelKind::Unary;
    let options = CodecOptions { ar: cfg.ar, flush: cfg.flush };
    let symbols = data.iter().map(|&b| if unary { 0 } else { b as usize });
    let digits = codec::encode(symbols, model, options).map_err(|e| CliError::Format(e.to_string()))?;
    Ok(write_container(&header, &digits))
}

/// Decodes a container back into the original bytes.
pub fn decompress(bytes: &[u8]) -> Result<Vec<u8>, CliError> {
    let (header, reader) = read_container(bytes).map_err(|e| CliError::Format(e.to_string()))?;
    let model = Model::from_descriptor(&header.model, header.params)
        .map_err(|e| CliError::Format(e.to_string()))?;
    let unary = model.kind() == ModelKind::Unary;
    if !unary && model.num_symbols() != ALPHABET + 1 {
        return Err(CliError::Format(format!(
            "alphabet of {} symbols is not the byte alphabet",
            model.num_symbols() - 1
        )));
    }
    let options = CodecOptions { ar: header.ar, flush: header.flush };
    let symbols = codec::decode(reader, model, options).map_err(|e| CliError::Format(e.to_string()))?;
    Ok(symbols
        .into_iter()
        .map(|s| if unary { UNARY_BYTE } else { s as u8 })
        .collect())
}

/// Parses a whitespace-separated list of 257 counts.
pub fn parse_freq_file(text: &str) -> Result<Vec<u64>, CliError> {
    let counts = text
        .split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| CliError::Usage(format!("bad count {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if counts.len() != ALPHABET + 1 {
        return Err(CliError::Usage(format!(
            "frequency file holds {} counts, expected {}",
            counts.len(),
            ALPHABET + 1
        )));
    }
    Ok(counts)
}
