use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{BlockKind, BlockSpec, Entry, SdpData, SdpError};

/// Renders `sdp` in SDPA sparse format.
///
/// Free blocks of size `k` become diagonal blocks of size `2k` holding the
/// pair `x⁺, x⁻` (the second half carries negated coefficients); a
/// `* free <block> <k>` comment records the split so [`read_sdpa`] can undo
/// it. Row labels go in a `* rows:` comment.
pub fn write_sdpa(sdp: &SdpData) -> Result<String, SdpError> {
    sdp.validate()?;
    let mut out = String::new();
    for (k, b) in sdp.blocks.iter().enumerate() {
        if b.kind == BlockKind::Free {
            out.push_str(&format!("* free {} {}\n", k + 1, b.size));
        }
    }
    if !sdp.row_labels.is_empty() {
        out.push_str("* rows:");
        for l in &sdp.row_labels {
            out.push(' ');
            out.push_str(l);
        }
        out.push('\n');
    }
    out.push_str(&format!("{}\n{}\n", sdp.m, sdp.blocks.len()));
    let sizes: Vec<String> = sdp
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => format!("{}", b.size),
            BlockKind::Nonneg => format!("-{}", b.size),
            BlockKind::Free => format!("-{}", 2 * b.size),
        })
        .collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let rhs: Vec<String> = sdp.rhs.iter().map(|v| fmt_value(*v)).collect();
    out.push_str(&rhs.join(" "));
    out.push('\n');

    let mut lines: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let mut push = |mat: usize, e: &Entry| {
        let b = sdp.blocks[e.block];
        lines.push((mat, e.block + 1, e.i + 1, e.j + 1, e.value));
        if b.kind == BlockKind::Free {
            lines.push((mat, e.block + 1, e.i + 1 + b.size, e.j + 1 + b.size, -e.value));
        }
    };
    for e in &sdp.c {
        push(0, e);
    }
    for (r, e) in &sdp.rows {
        push(r + 1, e);
    }
    lines.sort_by_key(|l| (l.0, l.1, l.2, l.3));
    for (mat, blk, i, j, v) in lines {
        out.push_str(&format!("{mat} {blk} {i} {j} {}\n", fmt_value(v)));
    }
    Ok(out)
}

// 17 significant digits: every f64 survives the round trip bit for bit.
fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn export_sdpa(sdp: &SdpData, path: impl AsRef<Path>) -> Result<(), SdpError> {
    std::fs::write(path, write_sdpa(sdp)?)?;
    Ok(())
}

pub fn import_sdpa(path: impl AsRef<Path>) -> Result<SdpData, SdpError> {
    read_sdpa(&std::fs::read_to_string(path)?)
}

fn err(line: usize, msg: impl Into<String>) -> SdpError {
    SdpError::Format {
        line,
        msg: msg.into(),
    }
}

/// Parses SDPA sparse format; inverse of [`write_sdpa`].
pub fn read_sdpa(text: &str) -> Result<SdpData, SdpError> {
    let mut free: BTreeMap<usize, usize> = BTreeMap::new();
    let mut labels: Option<(usize, Vec<String>)> = None;
    let mut data: Vec<(usize, Vec<String>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if let Some(rest) = t.strip_prefix('*') {
            let rest = rest.trim();
            if let Some(l) = rest.strip_prefix("rows:") {
                labels = Some((line, l.split_whitespace().map(str::to_string).collect()));
            } else if let Some(f) = rest.strip_prefix("free") {
                let nums: Vec<usize> = f
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| err(line, "malformed free-block comment")))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 2 || nums[0] == 0 {
                    return Err(err(line, "malformed free-block comment"));
                }
                free.insert(nums[0], nums[1]);
            }
            continue;
        }
        if t.is_empty() || t.starts_with('"') {
            continue;
        }
        let cleaned: String = t
            .chars()
            .map(|c| if "{}(),".contains(c) { ' ' } else { c })
            .collect();
        let toks: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
        if !toks.is_empty() {
            data.push((line, toks));
        }
    }
    if data.len() < 4 {
        return Err(err(data.last().map_or(0, |d| d.0), "truncated header"));
    }
    let int = |line: usize, s: &str| -> Result<i64, SdpError> {
        s.parse::<i64>()
            .map_err(|_| err(line, format!("expected an integer, found `{s}`")))
    };
    let float = |line: usize, s: &str| -> Result<f64, SdpError> {
        s.parse::<f64>()
            .map_err(|_| err(line, format!("expected a number, found `{s}`")))
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(line, "non-finite value"))
                }
            })
    };

    let m = int(data[0].0, &data[0].1[0])?;
    if m < 0 {
        return Err(err(data[0].0, "negative m"));
    }
    let m = m as usize;
    let nb = int(data[1].0, &data[1].1[0])?;
    if nb < 1 {
        return Err(err(data[1].0, "need at least one block"));
    }
    let nb = nb as usize;
    let (sl, st) = &data[2];
    if st.len() < nb {
        return Err(err(*sl, format!("expected {nb} block sizes, found {}", st.len())));
    }
    let mut blocks = Vec::with_capacity(nb);
    let mut raw_size = Vec::with_capacity(nb);
    for (k, s) in st[..nb].iter().enumerate() {
        let v = int(*sl, s)?;
        if v == 0 {
            return Err(err(*sl, "zero block size"));
        }
        raw_size.push(v.unsigned_abs() as usize);
        let spec = if let Some(&fk) = free.get(&(k + 1)) {
            if v != -(2 * fk as i64) {
                return Err(err(*sl, format!("free block {} must have size -{}", k + 1, 2 * fk)));
            }
            BlockSpec {
                kind: BlockKind::Free,
                size: fk,
            }
        } else if v < 0 {
            BlockSpec {
                kind: BlockKind::Nonneg,
                size: (-v) as usize,
            }
        } else {
            BlockSpec {
                kind: BlockKind::Psd,
                size: v as usize,
            }
        };
        blocks.push(spec);
    }
    if let Some((&k, _)) = free.range(nb + 1..).next() {
        return Err(err(0, format!("free-block comment names missing block {k}")));
    }
    let (rl, rt) = &data[3];
    if rt.len() != m {
        return Err(err(*rl, format!("m = {m} but {} right-hand side values", rt.len())));
    }
    let rhs: Vec<f64> = rt.iter().map(|s| float(*rl, s)).collect::<Result<_, _>>()?;

    // (matno, block, i, j) -> line of first occurrence
    let mut seen: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
    let mut c = Vec::new();
    let mut rows = Vec::new();
    // negated free halves: (matno, block, i) -> (value, line)
    let mut neg_half: BTreeMap<(usize, usize, usize), (f64, usize)> = BTreeMap::new();
    for (line, toks) in &data[4..] {
        let line = *line;
        if toks.len() != 5 {
            return Err(err(line, format!("expected 5 fields, found {}", toks.len())));
        }
        let mat = int(line, &toks[0])?;
        let blk = int(line, &toks[1])?;
        let mut i = int(line, &toks[2])?;
        let mut j = int(line, &toks[3])?;
        let v = float(line, &toks[4])?;
        if mat < 0 || mat as usize > m {
            return Err(err(line, format!("matrix number {mat} exceeds m = {m}")));
        }
        if blk < 1 || blk as usize > nb {
            return Err(err(line, format!("block {blk} out of range")));
        }
        let b = blk as usize - 1;
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        if i < 1 || j as usize > raw_size[b] {
            return Err(err(line, format!("index ({i}, {j}) out of range")));
        }
        if blocks[b].kind != BlockKind::Psd && i != j {
            return Err(err(line, "off-diagonal entry in a diagonal block"));
        }
        let key = (mat as usize, b, i as usize - 1, j as usize - 1);
        if let Some(prev) = seen.insert(key, line) {
            return Err(err(line, format!("duplicate entry (first given on line {prev})")));
        }
        if blocks[b].kind == BlockKind::Free && key.2 >= blocks[b].size {
            neg_half.insert((key.0, b, key.2 - blocks[b].size), (v, line));
            continue;
        }
        let e = Entry {
            block: b,
            i: key.2,
            j: key.3,
            value: v,
        };
        if mat == 0 {
            c.push(e);
        } else {
            rows.push((mat as usize - 1, e));
        }
    }
    // every free entry must appear as an exactly negated pair
    let mut pos: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for e in &c {
        if blocks[e.block].kind == BlockKind::Free {
            pos.insert((0, e.block, e.i), e.value);
        }
    }
    for (r, e) in &rows {
        if blocks[e.block].kind == BlockKind::Free {
            pos.insert((r + 1, e.block, e.i), e.value);
        }
    }
    for (key, (v, line)) in &neg_half {
        match pos.get(key) {
            Some(p) if *p == -*v => {}
            _ => return Err(err(*line, "free-block split entry has no matching positive half")),
        }
    }
    if pos.len() != neg_half.len() {
        return Err(err(0, "free-block split has unmatched positive entries"));
    }

    let row_labels = match labels {
        Some((line, l)) => {
            if l.len() != m {
                return Err(err(line, format!("{} row labels for m = {m}", l.len())));
            }
            l
        }
        None => Vec::new(),
    };
    let mut sdp = SdpData {
        m,
        blocks,
        c,
        rows,
        rhs,
        row_labels,
    };
    sdp.canonicalize();
    sdp.validate()?;
    Ok(sdp)
}
