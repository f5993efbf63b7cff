//! Brute-force references for tests.
//!
//! Nothing here calls into [`crate::padic`] or [`crate::codec`]; paths are
//! rebuilt from scratch by repeated division so that agreement between the
//! two is evidence rather than tautology.

use thiserror::Error;

use crate::model::Codebook;

/// Largest interval the enumerating oracles will scan.
pub const ENUMERATION_BUDGET: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("symbol {0} has no codeword")]
    UnknownSymbol(usize),
    #[error("interval of {0} points exceeds the enumeration budget")]
    TooLarge(u64),
    #[error("empty interval")]
    Empty,
}

/// Path digits of grid point `x` at level `n`, root first.
fn naive_path(x: u64, p: u32, n: u32) -> Vec<u8> {
    let mut index_digits = Vec::with_capacity(n as usize);
    let mut x = x;
    for _ in 0..n {
        index_digits.push((x % p as u64) as u8);
        x /= p as u64;
    }
    // Most significant index digit is the first step from the root.
    index_digits.reverse();
    index_digits
}

fn naive_padic_value(path: &[u8], p: u32) -> u128 {
    let mut value = 0u128;
    let mut weight = 1u128;
    for &d in path {
        value += d as u128 * weight;
        weight *= p as u128;
    }
    value
}

fn points(l: u64, r: u64, p: u32, n: u32) -> Result<std::ops::Range<u64>, OracleError> {
    let modulus = (p as u64).pow(n);
    let hi = if r == 0 { modulus } else { r };
    if hi <= l {
        return Err(OracleError::Empty);
    }
    if hi - l > ENUMERATION_BUDGET {
        return Err(OracleError::TooLarge(hi - l));
    }
    Ok(l..hi)
}

/// Longest prefix shared by the paths of every point in `[l, r)`.
pub fn brute_common_prefix(l: u64, r: u64, p: u32, n: u32) -> Result<Vec<u8>, OracleError> {
    let mut range = points(l, r, p, n)?;
    let mut prefix = naive_path(range.next().unwrap(), p, n);
    for x in range {
        let path = naive_path(x, p, n);
        let shared = prefix.iter().zip(&path).take_while(|(a, b)| a == b).count();
        prefix.truncate(shared);
    }
    Ok(prefix)
}

/// The point of `[l, r)` with the smallest path value.
pub fn brute_select_point(l: u64, r: u64, p: u32, n: u32) -> Result<u64, OracleError> {
    let range = points(l, r, p, n)?;
    Ok(range.min_by_key(|&x| naive_padic_value(&naive_path(x, p, n), p)).unwrap())
}

/// Concatenated codewords.
pub fn huffman_encode(cb: &Codebook, msg: &[usize]) -> Result<Vec<u8>, OracleError> {
    let mut out = Vec::new();
    for &s in msg {
        let word = cb.words.get(s).and_then(Option::as_ref).ok_or(OracleError::UnknownSymbol(s))?;
        out.extend_from_slice(word);
    }
    Ok(out)
}

/// Rice code with parameter `k`: `W >> k` ones, a zero, then the low `k`
/// bits of `W`, most significant first.
pub fn rice_encode(k: u32, w: u64) -> Vec<u8> {
    let quotient = w >> k;
    let mut out = vec![1u8; quotient as usize];
    out.push(0);
    out.extend((0..k).rev().map(|b| ((w >> b) & 1) as u8));
    out
}

/// Shannon entropy in bits per symbol.
pub fn entropy(freqs: &[u64]) -> f64 {
    let total: u64 = freqs.iter().sum();
    freqs
        .iter()
        .filter(|&&f| f > 0)
        .map(|&f| {
            let q = f as f64 / total as f64;
            -q * q.log2()
        })
        .sum()
}

/// Huffman code lengths by the two-queue method over sorted leaves.
pub fn two_queue_lengths(freqs: &[u64]) -> Vec<u8> {
    let n = freqs.len();
    if n == 1 {
        return vec![1];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (freqs[i], i));
    let mut weight: Vec<u64> = order.iter().map(|&i| freqs[i]).collect();
    let mut parent = vec![usize::MAX; n];
    let (mut leaf, mut internal) = (0usize, n);
    let pick = |weight: &Vec<u64>, leaf: &mut usize, internal: &mut usize| {
        if *leaf < n && (*internal >= weight.len() || weight[*leaf] <= weight[*internal]) {
            *leaf += 1;
            *leaf - 1
        } else {
            *internal += 1;
            *internal - 1
        }
    };
    for _ in 0..n - 1 {
        let a = pick(&weight, &mut leaf, &mut internal);
        let b = pick(&weight, &mut leaf, &mut internal);
        let node = weight.len();
        weight.push(weight[a] + weight[b]);
        parent.push(usize::MAX);
        parent[a] = node;
        parent[b] = node;
    }
    let mut lengths = vec![0u8; n];
    for (pos, &sym) in order.iter().enumerate() {
        let (mut node, mut depth) = (pos, 0u8);
        while parent[node] != usize::MAX {
            node = parent[node];
            depth += 1;
        }
        lengths[sym] = depth;
    }
    lengths
}
