//! `UCK1` model checkpoints: magic `55 43 4B 31`, `u32` LE header length,
//! UTF-8 JSON header `{"layer_sizes":[…],"param_count":n}`, then `n` `f64` LE.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use riskunlearn_core::model::MlpConfig;
use riskunlearn_core::ParamVector;

use crate::error::{HarnessError, Result};

const MAGIC: [u8; 4] = *b"UCK1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    layer_sizes: Vec<usize>,
    param_count: usize,
}

pub fn encode(params: &ParamVector) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        layer_sizes: params.config().layer_sizes.clone(),
        param_count: params.len(),
    })
    .expect("header serializes");
    let mut out = Vec::with_capacity(8 + header.len() + 8 * params.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for v in params.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<ParamVector> {
    let bad = |m: String| HarnessError::Runtime(format!("checkpoint: {m}"));
    if bytes.len() < 8 || bytes[..4] != MAGIC {
        return Err(bad("missing UCK1 magic".into()));
    }
    let hlen = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = 8usize
        .checked_add(hlen)
        .filter(|&b| b <= bytes.len())
        .ok_or_else(|| bad("truncated header".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[8..body]).map_err(|e| bad(format!("malformed header: {e}")))?;
    let config = MlpConfig::new(header.layer_sizes).map_err(|e| bad(e.to_string()))?;
    if config.param_count() != header.param_count {
        return Err(bad(format!(
            "param_count {} disagrees with layer sizes ({})",
            header.param_count,
            config.param_count()
        )));
    }
    let payload = &bytes[body..];
    if payload.len() != header.param_count * 8 {
        return Err(bad(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            header.param_count * 8
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ParamVector::from_values(config, values).map_err(|e| bad(e.to_string()))
}

pub fn save(params: &ParamVector, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, encode(params))
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<ParamVector> {
    let bytes = fs::read(path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use riskunlearn_core::model::init_params;

    #[test]
    fn bit_exact_round_trip() {
        let cfg = MlpConfig::new(vec![3, 5, 2]).unwrap();
        let mut p: ParamVector = init_params(&cfg, 4).unwrap();
        let mut vals = p.values().to_vec();
        vals[0] = -0.0;
        vals[1] = f64::MIN_POSITIVE / 3.0;
        p = p.with_values(vals).unwrap();
        let bytes = encode(&p);
        assert_eq!(&bytes[..4], &[0x55, 0x43, 0x4B, 0x31]);
        let back = decode(&bytes).unwrap();
        assert_eq!(
            back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            p.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(back.config(), p.config());
    }

    #[test]
    fn corrupt_inputs() {
        let p: ParamVector = init_params(&MlpConfig::new(vec![2, 2]).unwrap(), 0).unwrap();
        let bytes = encode(&p);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(&bytes[..6]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode(&wrong).is_err());
    }
}
