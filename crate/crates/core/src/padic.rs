//! Finite-ring p-adic primitives.
//!
//! A point of the grid `G(P^N)` is named by its index `a` in `[0, P^N)`. The
//! path from the root of the coding tree to that point is the same digit
//! vector read in the opposite direction: index digit `N-1-j` is path digit
//! `j`. Reading the path as `sum m_j * P^j` gives a p-adic integer mod `P^N`,
//! and two paths share exactly `ord_P(x - y)` leading links.

use std::fmt;

use thiserror::Error;

/// Largest modulus accepted for a grid. Products of a width and a cumulative
/// count are formed in `u128`, so this only bounds the index type.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("P = {0} is not a prime in [2, 255]")]
    NotPrime(u32),
    #[error("level N must be at least 1")]
    ZeroLevel,
    #[error("P^N = {p}^{n} exceeds the supported modulus 2^62")]
    TooLarge { p: u32, n: u32 },
    #[error("digit {digit} out of range for P = {p}")]
    DigitOutOfRange { digit: u8, p: u32 },
    #[error("position {pos} (+{count}) out of range for a vector of {len} digits")]
    OutOfRange { pos: usize, count: usize, len: usize },
    #[error("cannot lower a path by {by} levels over nonzero digits")]
    NonzeroLift { by: usize },
    #[error("empty interval [{l}, {r})")]
    EmptyInterval { l: u64, r: u64 },
    #[error("ord_p is undefined for zero")]
    ZeroValuation,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The ring `Z mod P^N` together with its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridParams {
    p: u32,
    n: u32,
    modulus: u64,
}

impl GridParams {
    pub fn new(p: u32, n: u32) -> Result<Self, GridError> {
        if p > 255 || !is_prime(p) {
            return Err(GridError::NotPrime(p));
        }
        if n == 0 {
            return Err(GridError::ZeroLevel);
        }
        let mut modulus = 1u64;
        for _ in 0..n {
            modulus = modulus
                .checked_mul(p as u64)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or(GridError::TooLarge { p, n })?;
        }
        Ok(Self { p, n, modulus })
    }

    #[inline]
    pub fn prime(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.n
    }

    /// `P^N`, the number of grid points.
    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `P^k` for `k <= N`.
    pub fn pow(&self, k: u32) -> u64 {
        debug_assert!(k <= self.n);
        (self.p as u64).pow(k)
    }

    /// Largest total a frequency table may have on this grid: `P^(N-2)`,
    /// or zero when the grid has fewer than two levels.
    pub fn total_cap(&self) -> u64 {
        if self.n < 2 {
            0
        } else {
            self.pow(self.n - 2)
        }
    }

    /// Ring negation, `-k = P^N - k`.
    pub fn neg(&self, k: u64) -> u64 {
        (self.modulus - k % self.modulus) % self.modulus
    }

    /// `(r - 1) mod P^N`; with `r = 0` standing for `P^N` this is the last
    /// point of `[l, r)`.
    pub fn pred(&self, r: u64) -> u64 {
        (r + self.modulus - 1) % self.modulus
    }

    /// Width of `[l, r)` under ring semantics: `(r - l) mod P^N`, where 0
    /// means the full ring.
    pub fn width(&self, l: u64, r: u64) -> u64 {
        match (r + self.modulus - l) % self.modulus {
            0 => self.modulus,
            w => w,
        }
    }

    /// Path of grid point `a` (digits reversed).
    pub fn to_path(&self, a: u64) -> DigitVec {
        debug_assert!(a < self.modulus);
        let p = self.p as u64;
        let mut digits = vec![0u8; self.n as usize];
        let mut a = a;
        for slot in digits.iter_mut().rev() {
            *slot = (a % p) as u8;
            a /= p;
        }
        DigitVec { digits, p: self.p }
    }

    /// Grid index of a path. Paths shorter than `N` are read as if lifted
    /// to level `N`.
    pub fn to_index(&self, x: &DigitVec) -> u64 {
        debug_assert!(x.len() <= self.n as usize);
        let p = self.p as u64;
        let mut a = 0u64;
        for j in 0..self.n as usize {
            a = a * p + x.digits.get(j).copied().unwrap_or(0) as u64;
        }
        a
    }

    /// Length of the common path of two p-adic values in `[0, P^N)`.
    pub fn com(&self, x: u64, y: u64) -> u32 {
        if x == y {
            self.n
        } else {
            // |x - y| and P^N - |x - y| have the same valuation below N.
            let diff = x.abs_diff(y);
            ord_p(diff, self.p).expect("nonzero difference").min(self.n)
        }
    }

    /// Number of leading path digits shared by every point of `[l, r)`.
    pub fn common_path_len(&self, l: u64, r: u64) -> u32 {
        let last = self.pred(r);
        self.com(self.to_path(l).value(), self.to_path(last).value())
    }

    /// The point of `[l, r)` whose path is the smallest p-adic integer, i.e.
    /// the shortest path once trailing zeros are dropped.
    pub fn select_point(&self, l: u64, r: u64) -> Result<u64, GridError> {
        let hi = if r == 0 { self.modulus } else { r };
        if hi <= l {
            return Err(GridError::EmptyInterval { l, r });
        }
        // Fix index digits from the least significant upward (path digits
        // from position N-1 downward), always taking the smallest digit for
        // which some point of the interval still matches.
        let p = self.p as u64;
        let mut residue = 0u64;
        let mut step = 1u64;
        for _ in 0..self.n {
            let next = step * p;
            let mut chosen = None;
            for d in 0..p {
                let target = residue + d * step;
                let first = l + (target + next - l % next) % next;
                if first < hi {
                    chosen = Some(target);
                    break;
                }
            }
            residue = chosen.expect("interval is non-empty");
            step = next;
        }
        Ok(residue)
    }

    /// `AR?`: the path of `l` starts `(n-1, P-1, ..)` and the path of `r`
    /// starts `(n, 0, ..)` for some `n`.
    pub fn ar_check(&self, l: u64, r: u64) -> bool {
        if self.n < 2 {
            return false;
        }
        let top = self.pow(self.n - 1);
        let second = self.pow(self.n - 2);
        let (l0, l1) = (l / top, (l / second) % self.p as u64);
        let (r0, r1) = (r / top, (r / second) % self.p as u64);
        r0 == l0 + 1 && l1 == self.p as u64 - 1 && r1 == 0
    }
}

impl fmt::Display for GridParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G({}^{})", self.p, self.n)
    }
}

/// p-adic valuation: the largest `k` with `P^k | x`.
pub fn ord_p(x: u64, p: u32) -> Result<u32, GridError> {
    if x == 0 {
        return Err(GridError::ZeroValuation);
    }
    let p = p as u64;
    let (mut x, mut k) = (x, 0);
    while x % p == 0 {
        x /= p;
        k += 1;
    }
    Ok(k)
}

/// A tree path: base-P digits with the coefficient of `P^0` first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DigitVec {
    digits: Vec<u8>,
    p: u32,
}

impl fmt::Debug for DigitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.digits)
    }
}

impl DigitVec {
    pub fn new(digits: Vec<u8>, p: u32) -> Result<Self, GridError> {
        if let Some(&digit) = digits.iter().find(|&&d| d as u32 >= p) {
            return Err(GridError::DigitOutOfRange { digit, p });
        }
        Ok(Self { digits, p })
    }

    pub fn zero(len: usize, p: u32) -> Self {
        Self { digits: vec![0; len], p }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// `x[i] = m_i`.
    pub fn digit(&self, i: usize) -> u8 {
        self.digits[i]
    }

    /// The path read as a p-adic integer, `sum m_j * P^j`.
    pub fn value(&self) -> u64 {
        let p = self.p as u64;
        self.digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * p + d as u64)
    }

    /// The first `j` digits.
    pub fn ext(&self, j: usize) -> Result<&[u8], GridError> {
        self.digits.get(..j).ok_or(GridError::OutOfRange {
            pos: 0,
            count: j,
            len: self.len(),
        })
    }

    /// Drops the first `j` digits (divides out `P^j`).
    pub fn res(&self, j: usize) -> Result<DigitVec, GridError> {
        let rest = self.digits.get(j..).ok_or(GridError::OutOfRange {
            pos: 0,
            count: j,
            len: self.len(),
        })?;
        Ok(Self { digits: rest.to_vec(), p: self.p })
    }

    /// Appends `j` zeros for `j >= 0`; removes `|j|` trailing zeros for `j < 0`.
    pub fn lift(&self, j: isize) -> Result<DigitVec, GridError> {
        let mut digits = self.digits.clone();
        if j >= 0 {
            digits.resize(digits.len() + j as usize, 0);
        } else {
            let by = j.unsigned_abs();
            let keep = digits.len().checked_sub(by).ok_or(GridError::OutOfRange {
                pos: 0,
                count: by,
                len: self.len(),
            })?;
            if digits[keep..].iter().any(|&d| d != 0) {
                return Err(GridError::NonzeroLift { by });
            }
            digits.truncate(keep);
        }
        Ok(Self { digits, p: self.p })
    }

    /// Removes `m` digits starting at position `pos`.
    pub fn cut(&self, pos: usize, m: usize) -> Result<DigitVec, GridError> {
        if pos + m > self.len() {
            return Err(GridError::OutOfRange { pos, count: m, len: self.len() });
        }
        let mut digits = self.digits.clone();
        digits.drain(pos..pos + m);
        Ok(Self { digits, p: self.p })
    }

    /// Number of digits through the last nonzero one; 0 for the zero path.
    pub fn lnz(&self) -> usize {
        self.digits
            .iter()
            .rposition(|&d| d != 0)
            .map_or(0, |j| j + 1)
    }
}

/// Highest level at which both paths live without losing digits.
pub fn hpl(x: &DigitVec, y: &DigitVec) -> usize {
    x.lnz().max(y.lnz())
}
