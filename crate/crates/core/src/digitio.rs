//! Base-P digit streams and the `PADC` container.
//!
//! For `P = 2` eight digits are packed per byte, first digit in the most
//! significant bit, with the final byte zero-padded. For larger `P` each
//! digit takes one byte. Readers zero-extend past the declared digit count,
//! so trailing zeros never need to be written.

use thiserror::Error;

use crate::padic::{is_prime, GridParams};

pub const MAGIC: &[u8; 4] = b"PADC";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("digit {digit} out of range for P = {p}")]
    DigitOutOfRange { digit: u8, p: u32 },
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("P = {0} is not prime")]
    NotPrime(u8),
    #[error("level N = {0} out of range")]
    LevelOutOfRange(u8),
    #[error("unknown model id {0}")]
    UnknownModel(u8),
    #[error("invalid model descriptor: {0}")]
    BadDescriptor(&'static str),
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
}

fn packed_len(p: u32, digits: u64) -> u64 {
    if p == 2 {
        digits.div_ceil(8)
    } else {
        digits
    }
}

/// Output side of the coder: `O.pushB`.
#[derive(Debug, Clone)]
pub struct DigitWriter {
    p: u32,
    buffer: Vec<u8>,
    digit_count: u64,
}

impl DigitWriter {
    pub fn new(params: GridParams) -> Self {
        Self::with_prime(params.prime())
    }

    pub fn with_prime(p: u32) -> Self {
        Self { p, buffer: Vec::new(), digit_count: 0 }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn digit_count(&self) -> u64 {
        self.digit_count
    }

    /// Packed payload bytes.
    pub fn payload(&self) -> &[u8] {
        &self.buffer
    }

    pub fn into_payload(self) -> Vec<u8> {
        self.buffer
    }

    fn push_unchecked(&mut self, d: u8) {
        if self.p == 2 {
            let bit = (self.digit_count % 8) as u32;
            if bit == 0 {
                self.buffer.push(0);
            }
            if d != 0 {
                *self.buffer.last_mut().unwrap() |= 0x80 >> bit;
            }
        } else {
            self.buffer.push(d);
        }
        self.digit_count += 1;
    }

    pub fn push_digit(&mut self, d: u8) -> Result<(), StreamError> {
        if d as u32 >= self.p {
            return Err(StreamError::DigitOutOfRange { digit: d, p: self.p });
        }
        self.push_unchecked(d);
        Ok(())
    }

    pub fn push_digits(&mut self, seq: &[u8]) -> Result<(), StreamError> {
        if let Some(&digit) = seq.iter().find(|&&d| d as u32 >= self.p) {
            return Err(StreamError::DigitOutOfRange { digit, p: self.p });
        }
        for &d in seq {
            self.push_unchecked(d);
        }
        Ok(())
    }

    /// Pushes `d` `n` times.
    pub fn push_repeat(&mut self, d: u8, n: u64) -> Result<(), StreamError> {
        if d as u32 >= self.p {
            return Err(StreamError::DigitOutOfRange { digit: d, p: self.p });
        }
        for _ in 0..n {
            self.push_unchecked(d);
        }
        Ok(())
    }

    /// Digit at stream position `i`.
    pub fn digit(&self, i: u64) -> Option<u8> {
        (i < self.digit_count).then(|| unpack(self.p, &self.buffer, i))
    }

    /// Digits from position `start` to the end.
    pub fn digits_from(&self, start: u64) -> Vec<u8> {
        (start..self.digit_count)
            .map(|i| unpack(self.p, &self.buffer, i))
            .collect()
    }

    pub fn to_digits(&self) -> Vec<u8> {
        self.digits_from(0)
    }

    /// A reader over everything written so far.
    pub fn reader(&self) -> DigitReader {
        DigitReader::new(self.p, self.buffer.clone(), self.digit_count)
    }
}

fn unpack(p: u32, payload: &[u8], i: u64) -> u8 {
    if p == 2 {
        (payload[(i / 8) as usize] >> (7 - i % 8)) & 1
    } else {
        payload[i as usize]
    }
}

/// Input side of the decoder: `I.getB`.
#[derive(Debug, Clone)]
pub struct DigitReader {
    p: u32,
    payload: Vec<u8>,
    cursor: u64,
    declared_count: u64,
}

impl DigitReader {
    /// `payload` must hold at least `declared_count` packed digits.
    pub fn new(p: u32, payload: Vec<u8>, declared_count: u64) -> Self {
        debug_assert!(payload.len() as u64 >= packed_len(p, declared_count));
        Self { p, payload, cursor: 0, declared_count }
    }

    /// Reader over an unpacked digit sequence.
    pub fn from_digits(p: u32, digits: &[u8]) -> Result<Self, StreamError> {
        let mut w = DigitWriter::with_prime(p);
        w.push_digits(digits)?;
        Ok(w.reader())
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn declared_count(&self) -> u64 {
        self.declared_count
    }

    /// Digits requested so far, including zero-extension.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn get_digit(&mut self) -> u8 {
        let d = if self.cursor < self.declared_count {
            unpack(self.p, &self.payload, self.cursor)
        } else {
            0
        };
        self.cursor += 1;
        d
    }

    pub fn get_digits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.get_digit()).collect()
    }
}

/// Model descriptor carried in the container header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelDescriptor {
    /// Per-symbol counts, EOM last.
    Static { freqs: Vec<u32> },
    Adaptive { alphabet_size: u16 },
    /// Canonical code lengths, EOM last; 0 marks an unused symbol.
    Huffman { lengths: Vec<u8> },
    Unary,
}

impl ModelDescriptor {
    pub fn id(&self) -> u8 {
        match self {
            Self::Static { .. } => 0,
            Self::Adaptive { .. } => 1,
            Self::Huffman { .. } => 2,
            Self::Unary => 3,
        }
    }

    /// Alphabet size excluding EOM.
    pub fn alphabet_size(&self) -> u16 {
        match self {
            Self::Static { freqs } => freqs.len().saturating_sub(1) as u16,
            Self::Adaptive { alphabet_size } => *alphabet_size,
            Self::Huffman { lengths } => lengths.len().saturating_sub(1) as u16,
            Self::Unary => 1,
        }
    }
}

/// Final-interval flush rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlushMode {
    /// Shortest-path point, trailing zeros trimmed.
    #[default]
    Min,
    /// Full path of the left edge.
    Left,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub params: GridParams,
    pub ar: bool,
    pub flush: FlushMode,
    pub model: ModelDescriptor,
}

impl Header {
    fn flags(&self) -> u8 {
        let mut flags = 0;
        if self.ar {
            flags |= 1;
        }
        if self.flush == FlushMode::Left {
            flags |= 2;
        }
        flags
    }
}

/// Serializes a header and a finished digit stream.
pub fn write_container(header: &Header, digits: &DigitWriter) -> Vec<u8> {
    assert_eq!(header.params.prime(), digits.prime());
    let mut out = Vec::with_capacity(32 + digits.payload().len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(header.params.prime() as u8);
    out.push(header.params.level() as u8);
    out.push(header.flags());
    out.push(header.model.id());
    out.extend_from_slice(&header.model.alphabet_size().to_le_bytes());
    match &header.model {
        ModelDescriptor::Static { freqs } => {
            for f in freqs {
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
        ModelDescriptor::Huffman { lengths } => out.extend_from_slice(lengths),
        ModelDescriptor::Adaptive { .. } | ModelDescriptor::Unary => {}
    }
    out.extend_from_slice(&digits.digit_count().to_le_bytes());
    out.extend_from_slice(digits.payload());
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StreamError> {
        let end = self.pos.checked_add(n).ok_or(StreamError::TruncatedHeader)?;
        let s = self.bytes.get(self.pos..end).ok_or(StreamError::TruncatedHeader)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, StreamError> {
        Ok(self.take(1)?[0])
    }
}

/// Parses a container, returning its header and a reader over the payload.
pub fn read_container(bytes: &[u8]) -> Result<(Header, DigitReader), StreamError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4).map_err(|_| StreamError::BadMagic)? != MAGIC {
        return Err(StreamError::BadMagic);
    }
    let version = c.u8()?;
    if version != VERSION {
        return Err(StreamError::UnsupportedVersion(version));
    }
    let p = c.u8()?;
    if !is_prime(p as u32) {
        return Err(StreamError::NotPrime(p));
    }
    let n = c.u8()?;
    let params = GridParams::new(p as u32, n as u32).map_err(|_| StreamError::LevelOutOfRange(n))?;
    let flags = c.u8()?;
    let ar = flags & 1 != 0;
    let flush = if flags & 2 != 0 { FlushMode::Left } else { FlushMode::Min };
    let model_id = c.u8()?;
    let size = u16::from_le_bytes(c.take(2)?.try_into().unwrap());
    let model = match model_id {
        0 => {
            let raw = c.take((size as usize + 1) * 4)?;
            let freqs = raw
                .chunks_exact(4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            ModelDescriptor::Static { freqs }
        }
        1 => ModelDescriptor::Adaptive { alphabet_size: size },
        2 => {
            if p != 2 {
                return Err(StreamError::BadDescriptor("huffman requires P = 2"));
            }
            ModelDescriptor::Huffman { lengths: c.take(size as usize + 1)?.to_vec() }
        }
        3 => {
            if size != 1 {
                return Err(StreamError::BadDescriptor("unary alphabet must have one symbol"));
            }
            ModelDescriptor::Unary
        }
        id => return Err(StreamError::UnknownModel(id)),
    };
    let digit_count = u64::from_le_bytes(c.take(8)?.try_into().unwrap());
    let payload = &bytes[c.pos..];
    let expected = packed_len(p as u32, digit_count);
    if (payload.len() as u64) < expected {
        return Err(StreamError::TruncatedPayload { expected, found: payload.len() as u64 });
    }
    if payload.len() as u64 > expected {
        return Err(StreamError::TrailingBytes((payload.len() as u64 - expected) as usize));
    }
    let header = Header { params, ar, flush, model };
    Ok((header, DigitReader::new(p as u32, payload.to_vec(), digit_count)))
}
