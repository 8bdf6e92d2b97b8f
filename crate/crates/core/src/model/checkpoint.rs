//! Weight checkpoints: a binary container of little-endian `f64` arrays and
//! a text manifest naming each array with its shape and byte offset.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

use super::config::TftConfig;
use super::weights::TftWeights;

const MAGIC: &[u8; 8] = b"SQFWGT\0\0";
pub const VERSION: u32 = 1;
const HEADER: usize = 16;

/// Serialized checkpoint: binary payload and its manifest.
pub fn encode(weights: &TftWeights) -> (Vec<u8>, String) {
    let mut bin = Vec::with_capacity(HEADER + 8 * weights.parameter_count());
    bin.extend_from_slice(MAGIC);
    bin.extend_from_slice(&VERSION.to_le_bytes());
    bin.extend_from_slice(&(weights.tensors().len() as u32).to_le_bytes());
    let mut manifest = format!("version {VERSION}\n");
    let c = weights.config();
    let list = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let _ = writeln!(manifest, "config hidden {}", c.hidden);
    let _ = writeln!(manifest, "config heads {}", c.heads);
    let _ = writeln!(manifest, "config dropout {}", c.dropout);
    let _ = writeln!(manifest, "config encoder_steps {}", c.encoder_steps);
    let _ = writeln!(manifest, "config decoder_steps {}", c.decoder_steps);
    let _ = writeln!(
        manifest,
        "config quantiles {}",
        c.quantiles.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    );
    let _ = writeln!(manifest, "config static_cardinalities {}", list(&c.static_cardinalities));
    let _ = writeln!(manifest, "config historical_inputs {}", c.historical_inputs);
    let _ = writeln!(manifest, "config known_continuous {}", c.known_continuous);
    let _ = writeln!(manifest, "config known_cardinalities {}", list(&c.known_cardinalities));
    let _ = writeln!(manifest, "config sort_quantiles {}", c.sort_quantiles);
    for (name, t) in weights.names().iter().zip(weights.tensors()) {
        let _ = writeln!(manifest, "tensor {name} {} {}", list(t.shape()), bin.len());
        for v in t.data() {
            bin.extend_from_slice(&v.to_le_bytes());
        }
    }
    (bin, manifest)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|v| v.parse().map_err(|_| bad(format!("bad list entry `{v}`")))).collect()
}

pub fn decode(bin: &[u8], manifest: &str) -> Result<TftWeights> {
    if bin.len() < HEADER || &bin[..8] != MAGIC {
        return Err(bad("not a weight container"));
    }
    let version = u32::from_le_bytes(bin[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let count = u32::from_le_bytes(bin[12..16].try_into().expect("4 bytes")) as usize;
    let mut config = TftConfig::new(1, 1, 1, 0);
    let mut names = Vec::new();
    let mut tensors = Vec::new();
    for line in manifest.lines().filter(|l| !l.trim().is_empty()) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["version", v] if *v == VERSION.to_string() => {}
            ["config", key] | ["config", key, ""] => {
                // empty lists
                match *key {
                    "known_cardinalities" => config.known_cardinalities = Vec::new(),
                    other => return Err(bad(format!("missing value for {other}"))),
                }
            }
            ["config", key, value] => {
                let value = *value;
                let num = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("bad value for {key}")));
                match *key {
                    "hidden" => config.hidden = num(value)?,
                    "heads" => config.heads = num(value)?,
                    "dropout" => config.dropout = value.parse().map_err(|_| bad("bad dropout"))?,
                    "encoder_steps" => config.encoder_steps = num(value)?,
                    "decoder_steps" => config.decoder_steps = num(value)?,
                    "quantiles" => config.quantiles = parse_list(value)?,
                    "static_cardinalities" => config.static_cardinalities = parse_list(value)?,
                    "historical_inputs" => config.historical_inputs = num(value)?,
                    "known_continuous" => config.known_continuous = num(value)?,
                    "known_cardinalities" => config.known_cardinalities = parse_list(value)?,
                    "sort_quantiles" => config.sort_quantiles = value.parse().map_err(|_| bad("bad flag"))?,
                    other => return Err(bad(format!("unknown config key {other}"))),
                }
            }
            ["tensor", name, shape, offset] => {
                let shape: Vec<usize> = parse_list(shape)?;
                let offset: usize = offset.parse().map_err(|_| bad("bad offset"))?;
                let n: usize = shape.iter().product();
                let end = offset + 8 * n;
                if offset < HEADER || end > bin.len() {
                    return Err(bad(format!("tensor {name} outside the container")));
                }
                let data = bin[offset..end].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
                names.push(name.to_string());
                tensors.push(Tensor::new(&shape, data)?);
            }
            _ => return Err(bad(format!("unreadable manifest line `{line}`"))),
        }
    }
    if names.len() != count {
        return Err(bad(format!("manifest lists {} tensors, container holds {count}", names.len())));
    }
    TftWeights::from_parts(config, names, tensors)
}

/// Paths of the binary and manifest files for checkpoint `stem`.
pub fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("manifest"))
}

pub fn save(stem: &Path, weights: &TftWeights) -> Result<()> {
    let (bin_path, manifest_path) = paths(stem);
    let (bin, manifest) = encode(weights);
    fs::write(&bin_path, bin).map_err(|e| Error::io(&bin_path, e))?;
    fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))
}

pub fn load(stem: &Path) -> Result<TftWeights> {
    let (bin_path, manifest_path) = paths(stem);
    let bin = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let manifest = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    decode(&bin, &manifest)
}
