//! SDPA sparse format (`.dat-s`).
//!
//! The file describes `min cᵀx` subject to `Σ F_i x_i − F₀ ⪰ 0`. It maps onto
//! [`SdpProblem`] through `x = y`, `c = −b`, `F₀ = −A₀` and `F_k = −A_k`, so
//! the stored `F_k` are the written LMI coefficients.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BlockMatrix, FamilyMeta, SdpError, SdpProblem};
use crate::mpla::{decimal_digits, MpScalar};

#[derive(Clone, Debug, PartialEq)]
pub enum SdpaWarning {
    /// A literal carries fewer digits than the working precision needs and
    /// is not exactly representable.
    PrecisionLoss {
        line: usize,
        literal: String,
        digits: usize,
        required: usize,
    },
}

#[derive(Clone, Debug)]
pub struct ReadReport {
    pub problem: SdpProblem,
    pub warnings: Vec<SdpaWarning>,
}

/// Sidecar metadata stored next to a `.dat-s` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpaManifest {
    pub precision_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyMeta>,
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with('"') || t.starts_with('*')
}

fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || matches!(c, '{' | '}' | '(' | ')' | ','))
        .filter(|s| !s.is_empty())
        .collect()
}

fn significant_digits(lit: &str) -> usize {
    let mant = lit
        .trim_start_matches(['+', '-'])
        .split(['e', 'E'])
        .next()
        .unwrap_or("");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = digits.trim_start_matches('0');
    trimmed.len().max(1)
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn next_line(&mut self) -> Option<(usize, Vec<&'a str>)> {
        while self.pos < self.lines.len() {
            let (no, l) = self.lines[self.pos];
            self.pos += 1;
            let t = tokens(l);
            if !t.is_empty() {
                return Some((no, t));
            }
        }
        None
    }
}

fn perr(line: usize, msg: impl Into<String>) -> SdpError {
    SdpError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_int(line: usize, tok: &str) -> Result<i64, SdpError> {
    if let Ok(v) = tok.parse::<i64>() {
        return Ok(v);
    }
    let f: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("expected integer, found {tok:?}")))?;
    if f.fract() != 0.0 {
        return Err(perr(line, format!("expected integer, found {tok:?}")));
    }
    Ok(f as i64)
}

/// Parses SDPA sparse text at `prec` bits.
pub fn parse_sdpa(text: &str, prec: u32) -> Result<ReadReport, SdpError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !is_comment(l))
        .collect();
    let mut rd = Reader { lines, pos: 0 };
    let required = (prec as f64 * 0.302).ceil() as usize;
    let mut warnings = Vec::new();
    let mut number = |line: usize, tok: &str| -> Result<MpScalar, SdpError> {
        let (v, exact) = MpScalar::parse_exact(prec, tok)
            .map_err(|_| perr(line, format!("invalid number {tok:?}")))?;
        let digits = significant_digits(tok);
        if !exact && digits < required {
            warnings.push(SdpaWarning::PrecisionLoss {
                line,
                literal: tok.to_string(),
                digits,
                required,
            });
        }
        Ok(v)
    };

    let (l, t) = rd.next_line().ok_or_else(|| perr(0, "missing mDIM"))?;
    let m = parse_int(l, t[0])?;
    if m < 0 {
        return Err(perr(l, "negative mDIM"));
    }
    let m = m as usize;
    let (l, t) = rd.next_line().ok_or_else(|| perr(l, "missing nBLOCK"))?;
    let nblock = parse_int(l, t[0])?;
    if nblock <= 0 {
        return Err(perr(l, "nBLOCK must be positive"));
    }
    let nblock = nblock as usize;

    let mut raw_dims = Vec::new();
    let mut last = l;
    while raw_dims.len() < nblock {
        let (l, t) = rd
            .next_line()
            .ok_or_else(|| perr(last, "missing block structure"))?;
        last = l;
        for tok in t {
            if raw_dims.len() == nblock {
                break;
            }
            let d = parse_int(l, tok)?;
            if d == 0 {
                return Err(perr(l, "zero block size"));
            }
            raw_dims.push(d);
        }
    }
    let dims: Vec<usize> = raw_dims.iter().map(|d| d.unsigned_abs() as usize).collect();
    let diagonal: Vec<bool> = raw_dims.iter().map(|&d| d < 0).collect();

    let mut c = Vec::with_capacity(m);
    while c.len() < m {
        let (l, t) = rd
            .next_line()
            .ok_or_else(|| perr(last, "missing objective vector"))?;
        last = l;
        for tok in t {
            if c.len() == m {
                break;
            }
            c.push(number(l, tok)?);
        }
    }

    let mut f: Vec<BlockMatrix> = (0..=m).map(|_| BlockMatrix::zeros(prec, &dims)).collect();
    let mut seen = std::collections::HashSet::new();
    while let Some((l, t)) = rd.next_line() {
        if t.len() < 5 {
            return Err(perr(l, "entry needs five fields: k block i j value"));
        }
        let k = parse_int(l, t[0])?;
        let blk = parse_int(l, t[1])?;
        let i = parse_int(l, t[2])?;
        let j = parse_int(l, t[3])?;
        if k < 0 || k as usize > m {
            return Err(perr(l, format!("matrix index {k} out of range")));
        }
        if blk < 1 || blk as usize > nblock {
            return Err(perr(l, format!("block index {blk} out of range")));
        }
        let b = blk as usize - 1;
        let d = dims[b] as i64;
        if i < 1 || j < 1 || i > d || j > d {
            return Err(perr(
                l,
                format!("entry ({i},{j}) outside block of size {d}"),
            ));
        }
        if diagonal[b] && i != j {
            return Err(perr(l, "off-diagonal entry in a diagonal block"));
        }
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if !seen.insert((k, b, i, j)) {
            return Err(perr(l, format!("duplicate entry ({k},{blk},{i},{j})")));
        }
        let v = number(l, t[4])?;
        let (i, j) = (i as usize - 1, j as usize - 1);
        let blkm = &mut f[k as usize].blocks[b];
        blkm[(i, j)] = v.clone();
        blkm[(j, i)] = v;
    }

    let a: Vec<BlockMatrix> = f.iter().map(|x| x.neg()).collect();
    let b: Vec<MpScalar> = c.iter().map(|x| -x).collect();
    let mut problem = SdpProblem::new(dims, a, b)?;
    problem.diagonal_blocks = diagonal;
    problem.validate()?;
    Ok(ReadReport { problem, warnings })
}

/// SDPA sparse text with literals of `⌈p·0.302⌉+2` significant digits.
pub fn format_sdpa(prob: &SdpProblem) -> String {
    let digits = decimal_digits(prob.prec());
    let lit = |x: &MpScalar| x.to_decimal(digits);
    let mut out = String::new();
    out.push_str("* SDPA sparse format\n");
    out.push_str(&format!("{}\n{}\n", prob.m, prob.block_dims.len()));
    let dims: Vec<String> = prob
        .block_dims
        .iter()
        .zip(&prob.diagonal_blocks)
        .map(|(d, diag)| {
            if *diag {
                format!("-{d}")
            } else {
                d.to_string()
            }
        })
        .collect();
    out.push_str(&dims.join(" "));
    out.push('\n');
    let c: Vec<String> = prob.b.iter().map(|x| lit(&-x)).collect();
    out.push_str(&c.join(" "));
    out.push('\n');
    for (k, ak) in prob.a.iter().enumerate() {
        for (bi, blk) in ak.blocks.iter().enumerate() {
            for i in 0..blk.rows() {
                for j in i..blk.cols() {
                    let v = &blk[(i, j)];
                    if !v.is_zero() {
                        out.push_str(&format!(
                            "{} {} {} {} {}\n",
                            k,
                            bi + 1,
                            i + 1,
                            j + 1,
                            lit(&-v)
                        ));
                    }
                }
            }
        }
    }
    out
}

fn io_err(path: &Path, e: std::io::Error) -> SdpError {
    SdpError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

pub fn read_sdpa(path: impl AsRef<Path>, prec: u32) -> Result<ReadReport, SdpError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_sdpa(&text, prec)
}

pub fn write_sdpa(prob: &SdpProblem, path: impl AsRef<Path>) -> Result<(), SdpError> {
    let path = path.as_ref();
    std::fs::write(path, format_sdpa(prob)).map_err(|e| io_err(path, e))
}

/// `<file>.json` next to a problem file.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &SdpaManifest) -> Result<(), SdpError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(manifest).map_err(|e| SdpError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<SdpaManifest, SdpError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| SdpError::Parse {
        line: e.line(),
        msg: e.to_string(),
    })
}
