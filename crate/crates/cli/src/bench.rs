use std::fmt::Write;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::codec_io::{compress, decompress, EncodeConfig};
use crate::error::CliError;

pub const CSV_HEADER: &str = "name,original_bytes,compressed_bytes,bits_per_byte,seconds,status";

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub original: u64,
    pub compressed: u64,
    pub seconds: f64,
    pub ok: bool,
}

fn bench_file(path: &Path, cfg: &EncodeConfig) -> Row {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let failed = |original| Row { name: name.clone(), original, compressed: 0, seconds: 0.0, ok: false };
    let Ok(data) = fs::read(path) else {
        return failed(0);
    };
    let start = Instant::now();
    let Ok(packed) = compress(&data, cfg) else {
        return failed(data.len() as u64);
    };
    let seconds = start.elapsed().as_secs_f64();
    // A row only counts if the file comes back intact.
    let ok = decompress(&packed).is_ok_and(|back| back == data);
    Row { name, original: data.len() as u64, compressed: packed.len() as u64, seconds, ok }
}

/// Benchmarks every regular file directly inside `dir`, sorted by name.
pub fn run(dir: &Path, cfg: &EncodeConfig) -> Result<Vec<Row>, CliError> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| !p.is_dir())
        .collect();
    paths.sort();
    Ok(paths.par_iter().map(|p| bench_file(p, cfg)).collect())
}

fn bits_per_byte(original: u64, compressed: u64) -> f64 {
    if original == 0 {
        0.0
    } else {
        compressed as f64 * 8.0 / original as f64
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let (mut orig, mut comp, mut secs, mut all_ok) = (0, 0, 0.0, true);
    for r in rows {
        let status = if r.ok { "ok" } else { "failed" };
        let name = r.name.replace([',', '\n'], "_");
        let bpb = bits_per_byte(r.original, r.compressed);
        writeln!(out, "{name},{},{},{bpb:.4},{:.6},{status}", r.original, r.compressed, r.seconds).unwrap();
        if r.ok {
            orig += r.original;
            comp += r.compressed;
        }
        secs += r.seconds;
        all_ok &= r.ok;
    }
    let status = if all_ok { "ok" } else { "failed" };
    let bpb = bits_per_byte(orig, comp);
    writeln!(out, "TOTAL,{orig},{comp},{bpb:.4},{secs:.6},{status}").unwrap();
    out
}
