//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its `PASS`/`FAIL` line; exits nonzero if any criterion fails.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use padic_coding::codec::{decode, encode, CodecOptions, Decoder, Encoder};
use padic_coding::digitio::FlushMode;
use padic_coding::model::{Codebook, Model, ModelKind};
use padic_coding::oracles::{
    brute_common_prefix, brute_select_point, entropy, huffman_encode, rice_encode, two_queue_lengths,
};
use padic_coding::padic::{DigitVec, GridParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TABLES_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_LIMIT: Duration = Duration::from_secs(30);
const HUFFMAN_LIMIT: Duration = Duration::from_secs(30);
const GOLOMB_LIMIT: Duration = Duration::from_secs(5);
const FUZZ_LIMIT: Duration = Duration::from_secs(300);
const EFFICIENCY_LIMIT: Duration = Duration::from_secs(10);
const MSB_LIMIT: Duration = Duration::from_secs(1);
const CLI_LIMIT: Duration = Duration::from_secs(10);

const FUZZ_TRIALS: usize = 10_000;
const EFFICIENCY_SYMBOLS: usize = 100_000;
/// Allowed excess over entropy, in bits per symbol.
const EFFICIENCY_SLACK: f64 = 0.05;
const EFFICIENCY_CONST: f64 = 64.0;

fn report(id: u32, name: &str, start: Instant, limit: Duration, outcome: Result<String, String>) -> bool {
    let elapsed = start.elapsed();
    let outcome = outcome.and_then(|detail| {
        if elapsed <= limit {
            Ok(detail)
        } else {
            Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
        }
    });
    match &outcome {
        Ok(detail) => println!("PASS {id} {name}: {detail} ({elapsed:.2?})"),
        Err(detail) => println!("FAIL {id} {name}: {detail} ({elapsed:.2?})"),
    }
    outcome.is_ok()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reference_tables() -> Result<String, String> {
    let g = GridParams::new(2, 3).unwrap();
    let level3 = [
        ([0, 0, 0], 0),
        ([0, 0, 1], 4),
        ([0, 1, 0], 2),
        ([0, 1, 1], 6),
        ([1, 0, 0], 1),
        ([1, 0, 1], 5),
        ([1, 1, 0], 3),
        ([1, 1, 1], 7),
    ];
    for (index, (path, value)) in level3.iter().enumerate() {
        let x = g.to_path(index as u64);
        ensure(x.digits() == path && x.value() == *value, || format!("level-3 row {index}"))?;
        let back = g.to_index(&DigitVec::new(path.to_vec(), 2).unwrap());
        ensure(back == index as u64, || format!("level-3 inverse row {index}"))?;
    }

    let g3 = GridParams::new(3, 2).unwrap();
    let p3_values = [0, 3, 6, 1, 4, 7, 2, 5, 8];
    for (index, value) in p3_values.iter().enumerate() {
        let x = g3.to_path(index as u64);
        let path = [index as u8 / 3, index as u8 % 3];
        ensure(x.digits() == path && x.value() == *value, || format!("P=3 row {index}"))?;
        ensure(g3.to_index(&x) == index as u64, || format!("P=3 inverse row {index}"))?;
    }

    let g2 = GridParams::new(2, 2).unwrap();
    let common: [(u64, u64, u32, &[u8]); 10] = [
        (0, 1, 2, &[0, 0]),
        (0, 2, 1, &[0]),
        (0, 3, 0, &[]),
        (0, 0, 0, &[]),
        (1, 2, 2, &[0, 1]),
        (1, 3, 0, &[]),
        (1, 0, 0, &[]),
        (2, 3, 2, &[1, 0]),
        (2, 0, 1, &[1]),
        (3, 0, 2, &[1, 1]),
    ];
    for (l, r, len, prefix) in common {
        let n = g2.common_path_len(l, r);
        let got = g2.to_path(l).ext(n as usize).unwrap().to_vec();
        ensure(n == len && got == prefix, || format!("common paths row [{l},{r}): {n} {got:?}"))?;
    }

    let points = [2u64, 6, 1];
    let ords = [[3, 2, 0], [2, 3, 0], [0, 0, 3]];
    let distances = [[0.0, 0.25, 1.0], [0.25, 0.0, 1.0], [1.0, 1.0, 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            let c = g.com(points[i], points[j]);
            let d = if c == g.level() { 0.0 } else { 2f64.powi(-(c as i32)) };
            ensure(c == ords[i][j] && d == distances[i][j], || {
                format!("distance between {} and {}", points[i], points[j])
            })?;
        }
    }
    Ok("8 + 9 index rows, 10 common-path rows, 3x3 distance table".into())
}

fn criterion_1_reference_tables() -> bool {
    let start = Instant::now();
    let outcome = reference_tables();
    report(1, "reference tables", start, TABLES_LIMIT, outcome)
}

fn oracle_equivalence() -> Result<String, String> {
    let mut checked = 0u64;
    for p in [2u32, 3] {
        for n in 1..=6 {
            let g = GridParams::new(p, n).unwrap();
            let m = g.modulus();
            for l in 0..m {
                for hi in l + 1..=m {
                    let r = hi % m;
                    let prefix = brute_common_prefix(l, r, p, n).map_err(|e| e.to_string())?;
                    let len = g.common_path_len(l, r);
                    ensure(len as usize == prefix.len(), || format!("{g} [{l},{r}) length"))?;
                    ensure(g.to_path(l).ext(len as usize).unwrap() == &prefix[..], || {
                        format!("{g} [{l},{r}) prefix")
                    })?;
                    let q = g.select_point(l, r).map_err(|e| e.to_string())?;
                    let brute = brute_select_point(l, r, p, n).map_err(|e| e.to_string())?;
                    ensure(q == brute, || format!("{g} [{l},{r}) select {q} vs {brute}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} intervals"))
}

fn criterion_2_exhaustive_oracles() -> bool {
    let start = Instant::now();
    let outcome = oracle_equivalence();
    report(2, "exhaustive oracle equivalence", start, ORACLE_LIMIT, outcome)
}

/// Encodes `msg` one symbol at a time, checking each emission is the
/// symbol's codeword and the interval resets.
fn huffman_emission(cb: &Codebook, n: u32, msg: &[usize]) -> Result<(), String> {
    let params = GridParams::new(cb.p, n).unwrap();
    let model = Model::huffman_model(cb, params).map_err(|e| e.to_string())?;
    let mut enc = Encoder::new(model, CodecOptions::default());
    for &s in msg {
        let before = enc.output().digit_count();
        enc.step(s).map_err(|e| e.to_string())?;
        let word = cb.words[s].as_ref().unwrap();
        ensure(&enc.output().digits_from(before) == word, || format!("symbol {s} emission"))?;
        let st = enc.state();
        ensure((st.l, st.r) == (0, 0), || format!("state after {s} is ({}, {})", st.l, st.r))?;
    }
    let oracle = huffman_encode(cb, msg).map_err(|e| e.to_string())?;
    ensure(enc.output().to_digits() == oracle, || "concatenation differs from oracle".into())
}

fn huffman_equivalence() -> Result<String, String> {
    let words: Vec<Vec<u8>> =
        vec![vec![0, 0, 0], vec![0, 0, 1], vec![1, 0], vec![0, 1], vec![1, 1]];
    let fixed = Codebook::new(2, words);
    let params = GridParams::new(2, 3).unwrap();
    let mut model = Model::huffman_model(&fixed, params).map_err(|e| e.to_string())?;
    let starts: Vec<u64> = (0..5).map(|s| model.code(s, 0, 0).unwrap().0).collect();
    ensure(starts == [0, 1, 4, 2, 6], || format!("starting indexes {starts:?}"))?;
    let msg: Vec<usize> = [2, 0, 1, 3, 4, 0, 0, 2].to_vec();
    huffman_emission(&fixed, 3, &msg)?;

    let mut rng = StdRng::seed_from_u64(0xC0DE);
    for tree in 0..200 {
        let size = rng.gen_range(2..=64);
        let freqs: Vec<u64> = (0..size).map(|_| rng.gen_range(1..=1000)).collect();
        let lengths = two_queue_lengths(&freqs);
        let cb = Codebook::canonical(&lengths).map_err(|e| format!("tree {tree}: {e}"))?;
        let n = (*lengths.iter().max().unwrap() as u32).max(2);
        let msg: Vec<usize> = (0..300).map(|_| rng.gen_range(0..size)).collect();
        huffman_emission(&cb, n, &msg).map_err(|e| format!("tree {tree}: {e}"))?;
    }
    Ok("fixed codebook and 200 random trees".into())
}

fn criterion_3_huffman_equivalence() -> bool {
    let start = Instant::now();
    let outcome = huffman_equivalence();
    report(3, "huffman equivalence", start, HUFFMAN_LIMIT, outcome)
}

fn golomb_equivalence() -> Result<String, String> {
    let rows = [
        "1111", "1110", "1101", "1100", "1011", "1010", "1001", "1000", "01111", "01110", "01101",
        "01100", "01011", "01010", "01001", "01000",
    ];
    let params = GridParams::new(2, 4).unwrap();
    let options = CodecOptions { ar: true, flush: FlushMode::Left };
    for w in 0..=1000u64 {
        let out = encode(vec![0; w as usize], Model::unary_model(params), options)
            .map_err(|e| e.to_string())?;
        let digits = out.to_digits();
        if let Some(row) = rows.get(w as usize) {
            let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
            ensure(text == *row, || format!("W={w}: {text} vs {row}"))?;
        }
        let not: Vec<u8> = digits.iter().map(|d| 1 - d).collect();
        ensure(not == rice_encode(3, w), || format!("W={w}: NOT differs from rice(3, W)"))?;
        let back = decode(out.reader(), Model::unary_model(params), options).map_err(|e| e.to_string())?;
        ensure(back.len() == w as usize, || format!("W={w}: decoded {} symbols", back.len()))?;
    }
    Ok("16 table rows, W in 0..=1000".into())
}

fn criterion_4_golomb_rice() -> bool {
    let start = Instant::now();
    let outcome = golomb_equivalence();
    report(4, "golomb-rice equivalence", start, GOLOMB_LIMIT, outcome)
}

fn random_code(rng: &mut StdRng, p: u32, size: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut leaves: Vec<Vec<u8>> = vec![Vec::new()];
    while leaves.len() == 1 || leaves.len() + p as usize - 1 <= size {
        let open: Vec<usize> = (0..leaves.len()).filter(|&i| leaves[i].len() < max_len).collect();
        if open.is_empty() {
            break;
        }
        let word = leaves.swap_remove(open[rng.gen_range(0..open.len())]);
        for d in 0..p as u8 {
            let mut child = word.clone();
            child.push(d);
            leaves.push(child);
        }
    }
    leaves
}

struct FuzzOutcome {
    roundtrip_failures: usize,
    first_failure: Option<String>,
    floor_violations: u64,
    worst: Option<(u64, u64)>,
}

impl FuzzOutcome {
    fn fail(&mut self, what: String) {
        self.roundtrip_failures += 1;
        self.first_failure.get_or_insert(what);
    }
}

fn fuzz_trial(rng: &mut StdRng, outcome: &mut FuzzOutcome) {
    let p = [2u32, 3, 5][rng.gen_range(0..3)];
    let n = if p == 2 { rng.gen_range(6..=31) } else { rng.gen_range(4..=12) };
    let params = GridParams::new(p, n).unwrap();
    let cap = params.total_cap();
    let options = CodecOptions {
        ar: rng.gen_bool(0.5),
        flush: if rng.gen_bool(0.5) { FlushMode::Min } else { FlushMode::Left },
    };
    let max_alphabet = cap.saturating_sub(2).min(64) as usize;
    let model = match rng.gen_range(0..4) {
        0 if max_alphabet >= 1 => {
            let s = rng.gen_range(1..=max_alphabet);
            let budget = cap / (s as u64 + 1);
            let freqs: Vec<u64> = (0..=s).map(|_| rng.gen_range(1..=budget)).collect();
            Model::static_model(&freqs, params).unwrap()
        }
        1 if max_alphabet >= 1 => Model::adaptive_model(rng.gen_range(1..=max_alphabet), params).unwrap(),
        2 => {
            let size = rng.gen_range(2..=65);
            Model::huffman_model(&Codebook::new(p, random_code(rng, p, size, n as usize)), params).unwrap()
        }
        _ => Model::unary_model(params),
    };
    let symbols = model.num_symbols() - 1;
    let len = rng.gen_range(0..=2000);
    let msg: Vec<usize> = (0..len).map(|_| rng.gen_range(0..symbols)).collect();

    // The stated floor, 2·P^(N−2) − 1.
    let floor = 2 * params.pow(n - 2) - 1;
    let mut enc = Encoder::new(model.clone(), options);
    for &s in &msg {
        if let Err(e) = enc.encode_symbol(s) {
            outcome.fail(format!("{params} {:?} {options:?}: encode error {e}", model.kind()));
            return;
        }
        let w = enc.state().width();
        if model.kind() != ModelKind::Unary && w < floor {
            outcome.floor_violations += 1;
            if outcome.worst.is_none_or(|(ww, wf)| w * wf < ww * floor) {
                outcome.worst = Some((w, floor));
            }
        }
    }
    let ok = enc
        .finish()
        .ok()
        .and_then(|out| Decoder::new(out.reader(), model.clone(), options).ok())
        .map(|mut dec| {
            msg.iter().all(|&s| dec.decode_symbol().ok() == Some(Some(s)))
                && dec.decode_symbol().ok() == Some(None)
        })
        .unwrap_or(false);
    if !ok {
        outcome.fail(format!("{params} {:?} {options:?} length {len}: decode mismatch", model.kind()));
    }
}

fn criterion_5_roundtrip_fuzz() -> bool {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xF0_22);
    let mut outcome = FuzzOutcome { roundtrip_failures: 0, first_failure: None, floor_violations: 0, worst: None };
    for _ in 0..FUZZ_TRIALS {
        fuzz_trial(&mut rng, &mut outcome);
    }
    let detail = format!(
        "{FUZZ_TRIALS} trials, {} roundtrip failures, {} width-floor violations",
        outcome.roundtrip_failures, outcome.floor_violations
    );
    let result = if outcome.roundtrip_failures == 0 && outcome.floor_violations == 0 {
        Ok(detail)
    } else {
        let worst = outcome.worst.map(|(w, f)| format!(" (smallest w = {w} against floor {f})"));
        let first = outcome.first_failure.map(|f| format!("; first roundtrip failure: {f}"));
        Err(detail + &worst.unwrap_or_default() + &first.unwrap_or_default())
    };
    report(5, "roundtrip fuzz with width floor", start, FUZZ_LIMIT, result)
}

fn efficiency() -> Result<String, String> {
    let freqs: [u64; 8] = [40_000, 20_000, 16_000, 9_000, 7_000, 4_000, 3_000, 1_000];
    let params = GridParams::new(2, 31).unwrap();
    let mut counts = freqs.to_vec();
    counts.push(1);
    let model = Model::static_model(&counts, params).map_err(|e| e.to_string())?;
    let total: u64 = freqs.iter().sum();
    let mut rng = StdRng::seed_from_u64(6);
    let msg: Vec<usize> = (0..EFFICIENCY_SYMBOLS)
        .map(|_| {
            let mut u = rng.gen_range(0..total);
            freqs.iter().position(|&f| {
                let hit = u < f;
                u = u.wrapping_sub(f);
                hit
            })
            .unwrap()
        })
        .collect();
    let options = CodecOptions { ar: true, flush: FlushMode::Min };
    let out = encode(msg.iter().copied(), model.clone(), options).map_err(|e| e.to_string())?;
    let back = decode(out.reader(), model, options).map_err(|e| e.to_string())?;
    ensure(back == msg, || "roundtrip mismatch".into())?;
    let h = entropy(&freqs);
    let l = EFFICIENCY_SYMBOLS as f64;
    let bound = h * l + EFFICIENCY_SLACK * l + EFFICIENCY_CONST;
    let bits = out.digit_count() as f64;
    ensure(bits <= bound, || format!("{bits} bits exceeds bound {bound:.0}"))?;
    Ok(format!("{bits} bits, entropy bound {:.0}, limit {bound:.0}", h * l))
}

fn criterion_6_efficiency() -> bool {
    let start = Instant::now();
    let outcome = efficiency();
    report(6, "compression efficiency", start, EFFICIENCY_LIMIT, outcome)
}

fn msb_rule() -> Result<String, String> {
    let g = GridParams::new(2, 31).unwrap();
    let m = g.modulus();
    let top = m >> 1;
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..1000 {
        let l = rng.gen_range(0..m);
        // Bias toward narrow intervals so both outcomes occur often.
        let w = if rng.gen_bool(0.5) { rng.gen_range(1..=m - l) } else { rng.gen_range(1..=(m - l).min(64)) };
        let r = (l + w) % m;
        let same = (l & top) == (g.pred(r) & top);
        ensure((g.common_path_len(l, r) > 0) == same, || format!("[{l},{r})"))?;
    }
    Ok("1000 random states".into())
}

fn criterion_7_msb_correspondence() -> bool {
    let start = Instant::now();
    let outcome = msb_rule();
    report(7, "P=2 MSB correspondence", start, MSB_LIMIT, outcome)
}

fn english_text(bytes: usize) -> Vec<u8> {
    let words = [
        "the", "of", "and", "a", "to", "in", "is", "you", "that", "it", "he", "was", "for", "on",
        "are", "as", "with", "his", "they", "at", "be", "this", "have", "from", "or", "one", "had",
        "by", "word", "but", "not", "what", "all", "were", "we", "when", "your", "can", "said",
        "there", "use", "an", "each", "which", "she", "do", "how", "their", "if", "will", "up",
    ];
    let mut rng = StdRng::seed_from_u64(8);
    let mut out = Vec::with_capacity(bytes + 16);
    while out.len() < bytes {
        let n = rng.gen_range(5..15);
        for i in 0..n {
            let w = words[rng.gen_range(0..words.len())];
            if i == 0 {
                out.extend(w[..1].to_uppercase().bytes());
                out.extend(w[1..].bytes());
            } else {
                out.push(b' ');
                out.extend(w.bytes());
            }
        }
        out.extend_from_slice(b".\n");
    }
    out
}

fn cli_end_to_end() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_padc");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("in.txt");
    let packed = dir.path().join("in.pad");
    let back = dir.path().join("back.txt");
    let text = english_text(100 * 1024);
    fs::write(&input, &text).map_err(|e| e.to_string())?;

    let run = |args: &[&std::ffi::OsStr]| {
        Command::new(bin).args(args).output().map_err(|e| e.to_string())
    };
    let enc = run(&["encode".as_ref(), "--model".as_ref(), "adaptive".as_ref(), input.as_os_str(), packed.as_os_str()])?;
    ensure(enc.status.success(), || format!("encode failed: {}", String::from_utf8_lossy(&enc.stderr)))?;
    let dec = run(&["decode".as_ref(), packed.as_os_str(), back.as_os_str()])?;
    ensure(dec.status.success(), || format!("decode failed: {}", String::from_utf8_lossy(&dec.stderr)))?;
    let restored = fs::read(&back).map_err(|e| e.to_string())?;
    ensure(restored == text, || "decoded file differs".into())?;
    let size = fs::metadata(&packed).map_err(|e| e.to_string())?.len();
    ensure(size < text.len() as u64, || format!("{size} bytes is not smaller than {}", text.len()))?;

    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).map_err(|e| e.to_string())?;
    fs::write(corpus.join("b.txt"), &text[..20_000]).map_err(|e| e.to_string())?;
    fs::write(corpus.join("a.bin"), (0..5000u32).map(|i| (i * 7 % 251) as u8).collect::<Vec<_>>())
        .map_err(|e| e.to_string())?;
    let bench = run(&["bench".as_ref(), corpus.as_os_str()])?;
    ensure(bench.status.success(), || "bench failed".into())?;
    let csv = String::from_utf8(bench.stdout).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = csv.lines().collect();
    ensure(lines.len() == 4, || format!("expected 4 CSV lines, got {}", lines.len()))?;
    ensure(
        lines[0] == "name,original_bytes,compressed_bytes,bits_per_byte,seconds,status",
        || format!("header {:?}", lines[0]),
    )?;
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    ensure(names == ["a.bin", "b.txt", "TOTAL"], || format!("rows {names:?}"))?;
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        ensure(f.len() == 6, || format!("row {line:?}"))?;
        ensure(f[1].parse::<u64>().is_ok() && f[2].parse::<u64>().is_ok(), || format!("row {line:?}"))?;
        ensure(f[3].parse::<f64>().is_ok() && f[4].parse::<f64>().is_ok(), || format!("row {line:?}"))?;
        ensure(f[5] == "ok", || format!("row {line:?}"))?;
    }
    Ok(format!("{} -> {size} bytes; bench CSV well-formed", text.len()))
}

fn criterion_8_cli_end_to_end() -> bool {
    let start = Instant::now();
    let outcome = cli_end_to_end();
    report(8, "CLI end-to-end", start, CLI_LIMIT, outcome)
}

fn main() {
    let criteria: [fn() -> bool; 8] = [
        criterion_1_reference_tables,
        criterion_2_exhaustive_oracles,
        criterion_3_huffman_equivalence,
        criterion_4_golomb_rice,
        criterion_5_roundtrip_fuzz,
        criterion_6_efficiency,
        criterion_7_msb_correspondence,
        criterion_8_cli_end_to_end,
    ];
    let passed = criteria.iter().filter(|c| c()).count();
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() {
        std::process::exit(1);
    }
}
