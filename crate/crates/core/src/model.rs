//! Probability models.
//!
//! A model maps a symbol and the current interval `[l, r)` to a
//! subinterval, and maps a point back to the symbol whose subinterval holds
//! it. Encoder and decoder must drive the same model through the same
//! sequence of calls so adaptive tables stay in sync.
//!
//! Symbols are `usize` indexes. The end-of-message symbol is always the last
//! index, [`Model::eom`].

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::digitio::ModelDescriptor;
use crate::padic::GridParams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("symbol {0} is not in the model's alphabet")]
    UnknownSymbol(usize),
    #[error("interval width {width} is smaller than the table total {total}")]
    WidthTooSmall { width: u64, total: u64 },
    #[error("point {g} lies outside [{l}, {r})")]
    OutsideInterval { g: u64, l: u64, r: u64 },
    #[error("symbol {0} has a zero count")]
    ZeroCount(usize),
    #[error("table total {total} exceeds the grid cap {cap}")]
    TotalTooLarge { total: u64, cap: u64 },
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,
    #[error("codebook is not a complete prefix code: {0}")]
    BadCodebook(&'static str),
    #[error("codeword length {len} exceeds grid level {level}")]
    CodewordTooLong { len: usize, level: u32 },
    #[error("model descriptor does not match the grid: {0}")]
    BadDescriptor(&'static str),
}

/// Cumulative counts `C[0] = 0 < C[1] < ... < C[K] = T` over slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    cum: Vec<u64>,
}

impl WeightTable {
    pub fn from_counts(counts: &[u64]) -> Result<Self, ModelError> {
        if counts.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        let mut cum = Vec::with_capacity(counts.len() + 1);
        cum.push(0);
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(ModelError::ZeroCount(i));
            }
            cum.push(cum[i] + c);
        }
        Ok(Self { cum })
    }

    pub fn cum(&self) -> &[u64] {
        &self.cum
    }

    pub fn total(&self) -> u64 {
        *self.cum.last().unwrap()
    }

    pub fn slots(&self) -> usize {
        self.cum.len() - 1
    }

    fn scaled(&self, width: u64, slot: usize) -> u64 {
        (width as u128 * self.cum[slot] as u128 / self.total() as u128) as u64
    }

    /// Offsets of slot `i`'s subinterval within an interval of `width`.
    pub fn span(&self, width: u64, slot: usize) -> (u64, u64) {
        (self.scaled(width, slot), self.scaled(width, slot + 1))
    }

    /// The slot whose span contains `offset`.
    pub fn locate(&self, width: u64, offset: u64) -> usize {
        let (mut lo, mut hi) = (0, self.slots());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.scaled(width, mid) <= offset {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Base-P codewords indexed by symbol; `None` marks a symbol with no code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub p: u32,
    pub words: Vec<Option<Vec<u8>>>,
}

impl Codebook {
    pub fn new(p: u32, words: Vec<Vec<u8>>) -> Self {
        Self { p, words: words.into_iter().map(Some).collect() }
    }

    /// Canonical binary code for the given lengths (0 = unused).
    pub fn canonical(lengths: &[u8]) -> Result<Self, ModelError> {
        let mut order: Vec<usize> = (0..lengths.len()).filter(|&s| lengths[s] > 0).collect();
        order.sort_by_key(|&s| (lengths[s], s));
        let mut words = vec![None; lengths.len()];
        let mut code = 0u128;
        let mut prev_len = 0u8;
        for &s in &order {
            let len = lengths[s];
            if len > 64 {
                return Err(ModelError::BadCodebook("code length above 64"));
            }
            code <<= len - prev_len;
            if code >> len != 0 {
                return Err(ModelError::BadCodebook("lengths violate the Kraft inequality"));
            }
            words[s] = Some((0..len).rev().map(|b| ((code >> b) & 1) as u8).collect());
            code += 1;
            prev_len = len;
        }
        // The single-symbol code is the empty word.
        if order.is_empty() && lengths.len() == 1 {
            words[0] = Some(Vec::new());
        }
        Ok(Self { p: 2, words })
    }

    pub fn lengths(&self) -> Vec<u8> {
        self.words
            .iter()
            .map(|w| w.as_ref().map_or(0, |w| w.len() as u8))
            .collect()
    }
}

/// Binary Huffman code lengths for `freqs`, no longer than `limit`.
/// Zero frequencies get length 0. If the optimal tree is too deep the
/// frequencies are flattened and the tree rebuilt.
pub fn huffman_code_lengths(freqs: &[u64], limit: u8) -> Vec<u8> {
    let mut weights: Vec<u64> = freqs.to_vec();
    loop {
        let lengths = huffman_lengths_unlimited(&weights);
        if lengths.iter().all(|&l| l <= limit) {
            return lengths;
        }
        for w in weights.iter_mut().filter(|w| **w > 0) {
            *w = (*w >> 1) | 1;
        }
    }
}

fn huffman_lengths_unlimited(freqs: &[u64]) -> Vec<u8> {
    let used: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    let mut lengths = vec![0u8; freqs.len()];
    match used.len() {
        0 => return lengths,
        1 => {
            lengths[used[0]] = 1;
            return lengths;
        }
        _ => {}
    }
    // Nodes 0..n are leaves; internal nodes are appended with a parent link.
    let mut parent = vec![usize::MAX; used.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        used.iter().enumerate().map(|(i, &s)| Reverse((freqs[s], i))).collect();
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        let node = parent.len();
        parent.push(usize::MAX);
        parent[a] = node;
        parent[b] = node;
        heap.push(Reverse((wa + wb, node)));
    }
    for (i, &s) in used.iter().enumerate() {
        let (mut depth, mut node) = (0u32, i);
        while parent[node] != usize::MAX {
            node = parent[node];
            depth += 1;
        }
        lengths[s] = depth.min(255) as u8;
    }
    lengths
}

#[derive(Debug, Clone)]
struct Adaptive {
    counts: Vec<u64>,
    table: WeightTable,
    cap: u64,
}

impl Adaptive {
    fn update(&mut self, symbol: usize) {
        if self.table.total() + 1 > self.cap {
            for c in &mut self.counts {
                *c = (*c / 2).max(1);
            }
            self.table = WeightTable::from_counts(&self.counts).expect("counts stay positive");
        }
        self.counts[symbol] += 1;
        for c in &mut self.table.cum[symbol + 1..] {
            *c += 1;
        }
    }
}

#[derive(Debug, Clone)]
struct Huffman {
    table: WeightTable,
    codebook: Codebook,
    slot_of: Vec<Option<usize>>,
    symbol_at: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Kind {
    Static(WeightTable),
    Adaptive(Adaptive),
    Huffman(Huffman),
    Unary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Static,
    Adaptive,
    Huffman,
    Unary,
}

/// Result of decoding one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub l: u64,
    pub r: u64,
    pub symbol: usize,
}

#[derive(Debug, Clone)]
pub struct Model {
    params: GridParams,
    kind: Kind,
}

impl Model {
    /// Static model over `freqs`, EOM last.
    pub fn static_model(freqs: &[u64], params: GridParams) -> Result<Self, ModelError> {
        let table = WeightTable::from_counts(freqs)?;
        let cap = params.total_cap();
        if table.total() > cap {
            return Err(ModelError::TotalTooLarge { total: table.total(), cap });
        }
        Ok(Self { params, kind: Kind::Static(table) })
    }

    /// Adaptive order-0 model over `alphabet_size` symbols plus EOM; every
    /// count starts at 1.
    pub fn adaptive_model(alphabet_size: usize, params: GridParams) -> Result<Self, ModelError> {
        if alphabet_size == 0 {
            return Err(ModelError::EmptyAlphabet);
        }
        let cap = params.total_cap();
        // One free unit is needed so the first update fits without halving.
        let total = alphabet_size as u64 + 1;
        if total + 1 > cap {
            return Err(ModelError::TotalTooLarge { total: total + 1, cap });
        }
        let counts = vec![1u64; alphabet_size + 1];
        let table = WeightTable::from_counts(&counts)?;
        Ok(Self { params, kind: Kind::Adaptive(Adaptive { counts, table, cap }) })
    }

    /// Model whose subintervals are exactly the codeword subtrees of a
    /// complete prefix code. The last codebook entry acts as EOM.
    pub fn huffman_model(codebook: &Codebook, params: GridParams) -> Result<Self, ModelError> {
        if codebook.p != params.prime() {
            return Err(ModelError::BadCodebook("codebook base differs from P"));
        }
        if codebook.words.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        let max_len = codebook.words.iter().flatten().map(Vec::len).max().unwrap_or(0);
        if max_len > params.level() as usize {
            return Err(ModelError::CodewordTooLong { len: max_len, level: params.level() });
        }
        let p = params.prime() as u64;
        let total = p.pow(max_len as u32);
        let mut spans: Vec<(u64, u64, usize)> = Vec::new();
        for (s, word) in codebook.words.iter().enumerate() {
            let Some(word) = word else { continue };
            if word.iter().any(|&d| d as u64 >= p) {
                return Err(ModelError::BadCodebook("digit out of range"));
            }
            let start = word.iter().fold(0u64, |acc, &d| acc * p + d as u64)
                * p.pow((max_len - word.len()) as u32);
            spans.push((start, p.pow((max_len - word.len()) as u32), s));
        }
        spans.sort_unstable();
        let mut next = 0u64;
        for &(start, width, _) in &spans {
            if start != next {
                return Err(ModelError::BadCodebook(if start < next {
                    "codewords overlap"
                } else {
                    "code is incomplete"
                }));
            }
            next = start + width;
        }
        if next != total {
            return Err(ModelError::BadCodebook("code is incomplete"));
        }
        let widths: Vec<u64> = spans.iter().map(|s| s.1).collect();
        let table = WeightTable::from_counts(&widths)?;
        let mut slot_of = vec![None; codebook.words.len()];
        let symbol_at: Vec<usize> = spans.iter().map(|s| s.2).collect();
        for (slot, &s) in symbol_at.iter().enumerate() {
            slot_of[s] = Some(slot);
        }
        Ok(Self {
            params,
            kind: Kind::Huffman(Huffman { table, codebook: codebook.clone(), slot_of, symbol_at }),
        })
    }

    /// One-symbol alphabet whose codes are the Golomb-Rice codes.
    pub fn unary_model(params: GridParams) -> Self {
        Self { params, kind: Kind::Unary }
    }

    /// Builds the model a container header describes.
    pub fn from_descriptor(desc: &ModelDescriptor, params: GridParams) -> Result<Self, ModelError> {
        match desc {
            ModelDescriptor::Static { freqs } => {
                let freqs: Vec<u64> = freqs.iter().map(|&f| f as u64).collect();
                Self::static_model(&freqs, params)
            }
            ModelDescriptor::Adaptive { alphabet_size } => {
                Self::adaptive_model(*alphabet_size as usize, params)
            }
            ModelDescriptor::Huffman { lengths } => {
                if params.prime() != 2 {
                    return Err(ModelError::BadDescriptor("huffman requires P = 2"));
                }
                Self::huffman_model(&Codebook::canonical(lengths)?, params)
            }
            ModelDescriptor::Unary => Ok(Self::unary_model(params)),
        }
    }

    pub fn params(&self) -> GridParams {
        self.params
    }

    pub fn kind(&self) -> ModelKind {
        match self.kind {
            Kind::Static(_) => ModelKind::Static,
            Kind::Adaptive(_) => ModelKind::Adaptive,
            Kind::Huffman(_) => ModelKind::Huffman,
            Kind::Unary => ModelKind::Unary,
        }
    }

    /// Number of symbols including EOM.
    pub fn num_symbols(&self) -> usize {
        match &self.kind {
            Kind::Static(t) => t.slots(),
            Kind::Adaptive(a) => a.counts.len(),
            Kind::Huffman(h) => h.slot_of.len(),
            Kind::Unary => 2,
        }
    }

    pub fn eom(&self) -> usize {
        self.num_symbols() - 1
    }

    /// The current table, absent for the unary model. Huffman tables are
    /// in slot (interval) order.
    pub fn table(&self) -> Option<&WeightTable> {
        match &self.kind {
            Kind::Static(t) => Some(t),
            Kind::Adaptive(a) => Some(&a.table),
            Kind::Huffman(h) => Some(&h.table),
            Kind::Unary => None,
        }
    }

    pub fn codebook(&self) -> Option<&Codebook> {
        match &self.kind {
            Kind::Huffman(h) => Some(&h.codebook),
            _ => None,
        }
    }

    /// Header descriptor for this model in its initial state.
    pub fn descriptor(&self) -> ModelDescriptor {
        match &self.kind {
            Kind::Static(t) => ModelDescriptor::Static {
                freqs: t.cum.windows(2).map(|w| (w[1] - w[0]) as u32).collect(),
            },
            Kind::Adaptive(a) => {
                ModelDescriptor::Adaptive { alphabet_size: (a.counts.len() - 1) as u16 }
            }
            Kind::Huffman(h) => ModelDescriptor::Huffman { lengths: h.codebook.lengths() },
            Kind::Unary => ModelDescriptor::Unary,
        }
    }

    fn slot(&self, symbol: usize) -> Result<usize, ModelError> {
        match &self.kind {
            Kind::Huffman(h) => h
                .slot_of
                .get(symbol)
                .copied()
                .flatten()
                .ok_or(ModelError::UnknownSymbol(symbol)),
            _ if symbol < self.num_symbols() => Ok(symbol),
            _ => Err(ModelError::UnknownSymbol(symbol)),
        }
    }

    fn after(&mut self, symbol: usize) {
        if let Kind::Adaptive(a) = &mut self.kind {
            a.update(symbol);
        }
    }

    /// Narrows `[l, r)` to `symbol`'s subinterval.
    pub fn code(&mut self, symbol: usize, l: u64, r: u64) -> Result<(u64, u64), ModelError> {
        let params = self.params;
        let m = params.modulus();
        let slot = self.slot(symbol)?;
        let Some(table) = self.table() else {
            // Unary: '*' drops the last point, EOM keeps only it.
            let last = params.pred(r);
            if params.width(l, r) < 2 && symbol == 0 {
                return Err(ModelError::WidthTooSmall { width: params.width(l, r), total: 2 });
            }
            return Ok(if symbol == 0 { (l, last) } else { (last, r) });
        };
        let width = params.width(l, r);
        if width < table.total() {
            return Err(ModelError::WidthTooSmall { width, total: table.total() });
        }
        let (lo, hi) = table.span(width, slot);
        let out = ((l + lo) % m, (l + hi) % m);
        self.after(symbol);
        Ok(out)
    }

    /// Finds the symbol whose subinterval of `[l, r)` contains `g`.
    pub fn decode(&mut self, g: u64, l: u64, r: u64) -> Result<Decoded, ModelError> {
        let params = self.params;
        let m = params.modulus();
        let width = params.width(l, r);
        let offset = (g + m - l) % m;
        if offset >= width {
            return Err(ModelError::OutsideInterval { g, l, r });
        }
        let Some(table) = self.table() else {
            let last = params.pred(r);
            return Ok(if g == last {
                Decoded { l, r, symbol: 1 }
            } else {
                Decoded { l, r: last, symbol: 0 }
            });
        };
        if width < table.total() {
            return Err(ModelError::WidthTooSmall { width, total: table.total() });
        }
        let slot = table.locate(width, offset);
        let (lo, hi) = table.span(width, slot);
        let symbol = match &self.kind {
            Kind::Huffman(h) => h.symbol_at[slot],
            _ => slot,
        };
        let out = Decoded { l: (l + lo) % m, r: (l + hi) % m, symbol };
        self.after(symbol);
        Ok(out)
    }
}
