//! Checkpoint files.
//!
//! A text manifest (format version, optimizer step, one `tensor` line per
//! tensor with its shape, optional `meta` lines) terminated by `end`, then the
//! parameters as little-endian f64 in manifest order, then the Adam first and
//! second moments in the same order.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{param_count, AdamState, PolicyParams};

const MAGIC: &str = "groupnav-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: PolicyParams,
    pub adam: AdamState,
    /// Free-form `key value` pairs; values must not contain newlines.
    pub meta: Vec<(String, String)>,
}

impl Checkpoint {
    pub fn new(params: PolicyParams, adam: AdamState) -> Self {
        Self { params, adam, meta: Vec::new() }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn write_checkpoint<W: Write>(mut out: W, ckpt: &Checkpoint) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "version {VERSION}")?;
    writeln!(out, "optimizer_step {}", ckpt.adam.step)?;
    for (name, shape, _) in ckpt.params.tensors() {
        let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
        writeln!(out, "tensor {name} {}", dims.join(" "))?;
    }
    for (k, v) in &ckpt.meta {
        if k.contains(char::is_whitespace) || v.contains('\n') {
            return Err(Error::InvalidArgument(format!("checkpoint meta entry {k:?} is not single-line")));
        }
        writeln!(out, "meta {k} {v}")?;
    }
    writeln!(out, "end")?;
    for block in [&ckpt.params, &ckpt.adam.m, &ckpt.adam.v] {
        let mut bytes = Vec::with_capacity(8 * param_count());
        for v in block.as_slice() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&bytes)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(input: R) -> Result<Checkpoint> {
    let corrupt = |m: String| Error::CorruptCheckpoint(m);
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    let mut next_line = |reader: &mut BufReader<R>| -> Result<String> {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(corrupt("unexpected end of manifest".into()));
        }
        Ok(line.trim_end_matches('\n').to_string())
    };

    if next_line(&mut reader)? != MAGIC {
        return Err(corrupt("missing checkpoint magic".into()));
    }
    let version = next_line(&mut reader)?;
    if version != format!("version {VERSION}") {
        return Err(corrupt(format!("unsupported {version:?}")));
    }
    let step_line = next_line(&mut reader)?;
    let step = step_line
        .strip_prefix("optimizer_step ")
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| corrupt(format!("bad optimizer step line {step_line:?}")))?;

    let expected: Vec<String> = PolicyParams::zeros()
        .tensors()
        .into_iter()
        .map(|(name, shape, _)| {
            let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
            format!("tensor {name} {}", dims.join(" "))
        })
        .collect();
    let mut tensors = Vec::new();
    let mut meta = Vec::new();
    loop {
        let l = next_line(&mut reader)?;
        if l == "end" {
            break;
        } else if l.starts_with("tensor ") {
            tensors.push(l);
        } else if let Some(rest) = l.strip_prefix("meta ") {
            let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
            meta.push((k.to_string(), v.to_string()));
        } else {
            return Err(corrupt(format!("unexpected manifest line {l:?}")));
        }
    }
    if tensors != expected {
        let first_bad = tensors
            .iter()
            .zip(&expected)
            .find(|(a, b)| a != b)
            .map(|(a, b)| format!("found {a:?}, expected {b:?}"))
            .unwrap_or_else(|| format!("{} tensors, expected {}", tensors.len(), expected.len()));
        return Err(corrupt(format!("layer shapes do not match the network: {first_bad}")));
    }

    let n = param_count();
    let mut read_block = || -> Result<PolicyParams> {
        let mut bytes = vec![0u8; 8 * n];
        reader.read_exact(&mut bytes).map_err(|e| corrupt(format!("truncated tensor data: {e}")))?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(PolicyParams::from_flat(data).expect("length checked"))
    };
    let params = read_block()?;
    let m = read_block()?;
    let v = read_block()?;
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(corrupt("trailing bytes after tensor data".into()));
    }
    Ok(Checkpoint { params, adam: AdamState { m, v, step }, meta })
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_checkpoint(std::io::BufWriter::new(file), ckpt)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(std::fs::File::open(path)?)
}
