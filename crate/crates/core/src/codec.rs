//! Encoder and decoder loops.
//!
//! Per symbol the encoder runs: model step, exit from a pending AR mapping
//! if the interval has left the stable point, PR rescaling (only when no AR
//! mapping is pending), then AR rescaling for as long as the interval sits
//! in the level-2 cell pair around a level-1 point. The decoder replays the
//! same steps on a window of `N` stream digits.
//!
//! With AR disabled, an interval that would trigger AR is instead collapsed
//! onto the larger side of the level-1 point it straddles, which gives PR
//! something to shift out. Collapsing costs up to one digit each time.

use std::collections::VecDeque;

use thiserror::Error;

use crate::digitio::{DigitReader, DigitWriter, FlushMode, StreamError};
use crate::model::{Model, ModelError, ModelKind, WeightTable};
use crate::padic::{DigitVec, GridParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("end-of-message is a reserved symbol")]
    ReservedSymbol,
    #[error("malformed stream: end-of-message not found within {0} digits")]
    MissingEom(u64),
    #[error("digit stream base {stream} differs from model base {model}")]
    BaseMismatch { stream: u32, model: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecOptions {
    pub ar: bool,
    pub flush: FlushMode,
}

impl Default for CodecOptions {
    fn default() -> Self {
        Self { ar: true, flush: FlushMode::Min }
    }
}

/// Current message interval plus the pending AR mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoderState {
    pub l: u64,
    pub r: u64,
    /// Stable point in `(0, P)`; 0 when no mapping is pending.
    pub sp: u32,
    /// Number of AR applications since the stable point was fixed.
    pub spn: u64,
    pub params: GridParams,
}

impl CoderState {
    pub fn new(params: GridParams) -> Self {
        Self { l: 0, r: 0, sp: 0, spn: 0, params }
    }

    pub fn width(&self) -> u64 {
        self.params.width(self.l, self.r)
    }

    fn path(&self, a: u64) -> DigitVec {
        self.params.to_path(a)
    }

    /// Rescales both edges by the first `n` path digits: the index form of
    /// `lift(res(x, n), n)`.
    fn shift_out(&mut self, n: u32) {
        let g = self.params;
        let n = n as usize;
        let rescale = |a: u64| {
            let path = g.to_path(a).res(n).and_then(|x| x.lift(n as isize));
            g.to_index(&path.expect("n <= N"))
        };
        self.l = rescale(self.l);
        self.r = rescale(self.r);
    }

    /// PR rescaling. Returns the shifted-out common path.
    pub fn pr_step(&mut self) -> Vec<u8> {
        debug_assert_eq!(self.spn, 0);
        let n = self.params.common_path_len(self.l, self.r);
        if n == 0 {
            return Vec::new();
        }
        let common = self.path(self.l).ext(n as usize).expect("n <= N").to_vec();
        self.shift_out(n);
        common
    }

    pub fn ar_check(&self) -> bool {
        self.params.ar_check(self.l, self.r)
    }

    /// One AR application: drop path digit 1 of both edges and append a zero.
    pub fn ar_apply(&mut self) {
        debug_assert!(self.ar_check());
        if self.sp == 0 {
            self.sp = self.path(self.r).digit(0) as u32;
        }
        self.spn += 1;
        let g = self.params;
        let squeeze = |a: u64| {
            let path = g.to_path(a).cut(1, 1).and_then(|x| x.lift(1));
            g.to_index(&path.expect("N >= 2"))
        };
        self.l = squeeze(self.l);
        self.r = squeeze(self.r);
    }

    /// Index of the stable point `sp * P^(N-1)`.
    fn stable_index(&self) -> u64 {
        self.sp as u64 * self.params.pow(self.params.level() - 1)
    }

    /// The interval lies at or right of the stable point.
    fn left_of_stable(&self) -> bool {
        self.path(self.l).digit(0) as u32 >= self.sp
    }

    /// The interval lies at or left of the stable point. `r = 0` stands for
    /// `P^N` and is never left of anything.
    fn right_of_stable(&self) -> bool {
        self.r != 0 && (self.path(self.r).digit(0) as u32) < self.sp
            || self.r == self.stable_index()
    }

    /// Resolves a pending AR mapping once the interval no longer straddles
    /// the stable point. Returns the digits that become known, or `None` if
    /// the mapping stays pending.
    pub fn ar_exit(&mut self) -> Option<Vec<u8>> {
        debug_assert!(self.spn > 0);
        let p = self.params.prime();
        let (head, fill) = if self.left_of_stable() {
            (self.sp, 0)
        } else if self.right_of_stable() {
            (self.sp - 1, p - 1)
        } else {
            return None;
        };
        let mut out = Vec::with_capacity(self.spn as usize + 1);
        out.push(head as u8);
        out.extend(std::iter::repeat_n(fill as u8, self.spn as usize));
        self.shift_out(1);
        self.sp = 0;
        self.spn = 0;
        Some(out)
    }

    /// Without AR: keep the larger side of the straddled level-1 point
    /// (left on ties).
    pub fn collapse(&mut self) {
        debug_assert!(self.ar_check());
        let top = self.params.pow(self.params.level() - 1);
        let c = (self.r / top) * top;
        if c - self.l >= self.r - c {
            self.r = c;
        } else {
            self.l = c;
        }
    }
}

/// Streaming encoder.
#[derive(Debug, Clone)]
pub struct Encoder {
    state: CoderState,
    model: Model,
    options: CodecOptions,
    out: DigitWriter,
}

impl Encoder {
    pub fn new(model: Model, options: CodecOptions) -> Self {
        let params = model.params();
        Self { state: CoderState::new(params), model, options, out: DigitWriter::new(params) }
    }

    pub fn state(&self) -> &CoderState {
        &self.state
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn output(&self) -> &DigitWriter {
        &self.out
    }

    /// Encodes one message symbol.
    pub fn encode_symbol(&mut self, symbol: usize) -> Result<(), CodecError> {
        if symbol == self.model.eom() {
            return Err(CodecError::ReservedSymbol);
        }
        self.step(symbol)
    }

    /// One full coding iteration for any model symbol, EOM included. Used
    /// directly only to trace per-symbol behaviour.
    pub fn step(&mut self, symbol: usize) -> Result<(), CodecError> {
        let (l, r) = self.model.code(symbol, self.state.l, self.state.r)?;
        self.state.l = l;
        self.state.r = r;
        self.rescale()
    }

    fn rescale(&mut self) -> Result<(), CodecError> {
        let s = &mut self.state;
        if s.spn != 0 {
            if let Some(digits) = s.ar_exit() {
                self.out.push_digits(&digits)?;
            }
        }
        if s.spn == 0 {
            self.out.push_digits(&s.pr_step())?;
        }
        while s.ar_check() {
            if self.options.ar {
                s.ar_apply();
            } else {
                s.collapse();
                self.out.push_digits(&s.pr_step())?;
            }
        }
        Ok(())
    }

    /// Encodes EOM and flushes the final interval.
    pub fn finish(mut self) -> Result<DigitWriter, CodecError> {
        let eom = self.model.eom();
        let (l, r) = self.model.code(eom, self.state.l, self.state.r)?;
        let s = &mut self.state;
        s.l = l;
        s.r = r;
        if s.spn != 0 {
            if let Some(digits) = s.ar_exit() {
                self.out.push_digits(&digits)?;
            }
        }
        if s.spn == 0 {
            let params = s.params;
            let q = match self.options.flush {
                FlushMode::Min => params.select_point(s.l, s.r).expect("non-empty interval"),
                FlushMode::Left => s.l,
            };
            let path = params.to_path(q);
            let keep = match self.options.flush {
                FlushMode::Min => path.lnz(),
                FlushMode::Left => path.len(),
            };
            self.out.push_digits(path.ext(keep).expect("keep <= N"))?;
        } else {
            // The stable point itself lies inside the interval.
            self.out.push_digit(s.sp as u8)?;
        }
        Ok(self.out)
    }
}

/// Encodes a whole message.
pub fn encode(
    symbols: impl IntoIterator<Item = usize>,
    model: Model,
    options: CodecOptions,
) -> Result<DigitWriter, CodecError> {
    let mut enc = Encoder::new(model, options);
    for s in symbols {
        enc.encode_symbol(s)?;
    }
    enc.finish()
}

/// `N` stream digits in path order; the code point is their index.
#[derive(Debug, Clone)]
struct DecoderWindow {
    digits: VecDeque<u8>,
    params: GridParams,
}

impl DecoderWindow {
    fn fill(reader: &mut DigitReader, params: GridParams) -> Self {
        let digits = reader.get_digits(params.level() as usize).into();
        Self { digits, params }
    }

    fn value(&self) -> u64 {
        let p = self.params.prime() as u64;
        self.digits.iter().fold(0u64, |acc, &d| acc * p + d as u64)
    }

    fn shift(&mut self, n: usize, reader: &mut DigitReader) {
        for _ in 0..n {
            self.digits.pop_front();
            self.digits.push_back(reader.get_digit());
        }
    }

    fn cut_second(&mut self, reader: &mut DigitReader) {
        self.digits.remove(1);
        self.digits.push_back(reader.get_digit());
    }
}

/// Everything that determines the decoder's future once only implicit zero
/// digits remain. `spn` itself never feeds back, only whether it is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Snapshot {
    l: u64,
    r: u64,
    sp: u32,
    pending: bool,
    window: VecDeque<u8>,
    table: Option<WeightTable>,
}

/// Brent's cycle detection. After the stream is exhausted decoding is a
/// deterministic walk, so a repeated state means EOM is never reached.
#[derive(Debug, Clone, Default)]
struct CycleGuard {
    saved: Option<Snapshot>,
    power: u64,
    steps: u64,
}

impl CycleGuard {
    /// Returns true once the walk has provably entered a cycle.
    fn step(&mut self, now: Snapshot) -> bool {
        if self.saved.as_ref() == Some(&now) {
            return true;
        }
        self.steps += 1;
        if self.steps >= self.power {
            self.saved = Some(now);
            self.power = (self.power * 2).max(1);
            self.steps = 0;
        }
        false
    }
}

/// Streaming decoder.
#[derive(Debug, Clone)]
pub struct Decoder {
    state: CoderState,
    model: Model,
    options: CodecOptions,
    reader: DigitReader,
    window: DecoderWindow,
    done: bool,
    guard: CycleGuard,
}

impl Decoder {
    pub fn new(
        mut reader: DigitReader,
        model: Model,
        options: CodecOptions,
    ) -> Result<Self, CodecError> {
        let params = model.params();
        if reader.prime() != params.prime() {
            return Err(CodecError::BaseMismatch { stream: reader.prime(), model: params.prime() });
        }
        let window = DecoderWindow::fill(&mut reader, params);
        Ok(Self { state: CoderState::new(params), model, options, reader, window, done: false, guard: CycleGuard::default() })
    }

    pub fn state(&self) -> &CoderState {
        &self.state
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Code point in the current coordinates.
    pub fn point(&self) -> u64 {
        self.window.value()
    }

    /// Stream digits the encoder must have written to reach this state.
    /// Each pending AR mapping pulls a digit into the window before the
    /// encoder emits it.
    fn committed(&self) -> u64 {
        self.reader.cursor() - self.state.params.level() as u64 - self.state.spn
    }

    fn snapshot(&self) -> Snapshot {
        let s = &self.state;
        let table = match self.model.kind() {
            ModelKind::Adaptive => self.model.table().cloned(),
            _ => None,
        };
        Snapshot { l: s.l, r: s.r, sp: s.sp, pending: s.spn > 0, window: self.window.digits.clone(), table }
    }

    /// Decodes the next symbol; `None` once EOM has been reached.
    pub fn decode_symbol(&mut self) -> Result<Option<usize>, CodecError> {
        if self.done {
            return Ok(None);
        }
        let d = self.model.decode(self.window.value(), self.state.l, self.state.r)?;
        if d.symbol == self.model.eom() {
            self.done = true;
            return Ok(None);
        }
        self.state.l = d.l;
        self.state.r = d.r;
        self.rescale();
        // A valid stream never shifts past its own end before EOM.
        if self.committed() > self.reader.declared_count() {
            return Err(CodecError::MissingEom(self.reader.declared_count()));
        }
        if self.reader.cursor() >= self.reader.declared_count() {
            let now = self.snapshot();
            if self.guard.step(now) {
                return Err(CodecError::MissingEom(self.reader.declared_count()));
            }
        }
        Ok(Some(d.symbol))
    }

    fn rescale(&mut self) {
        let s = &mut self.state;
        if s.spn != 0 && s.ar_exit().is_some() {
            self.window.shift(1, &mut self.reader);
        }
        if s.spn == 0 {
            let n = s.pr_step().len();
            self.window.shift(n, &mut self.reader);
        }
        while s.ar_check() {
            if self.options.ar {
                s.ar_apply();
                self.window.cut_second(&mut self.reader);
            } else {
                s.collapse();
                let n = s.pr_step().len();
                self.window.shift(n, &mut self.reader);
            }
        }
    }
}

/// Decodes a whole message.
pub fn decode(
    reader: DigitReader,
    model: Model,
    options: CodecOptions,
) -> Result<Vec<usize>, CodecError> {
    let mut dec = Decoder::new(reader, model, options)?;
    let mut out = Vec::new();
    while let Some(s) = dec.decode_symbol()? {
        out.push(s);
    }
    Ok(out)
}
