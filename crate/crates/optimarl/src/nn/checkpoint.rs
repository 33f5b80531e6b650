//! Flat binary serialization for MLP parameters.
//!
//! Layout (little-endian throughout):
//!   magic `MLP0` | u32 layer count L of `layer_sizes` | L x u32 sizes |
//!   per layer: rows*cols f64 weights (row-major) then rows f64 biases.
//!
//! `mlp_from_bytes(&mlp_to_bytes(&p))` reproduces `p` bit-exactly.

use super::{
    mlp::{Layer, Mlp},
    NnError,
};

const MAGIC: &[u8; 4] = b"MLP0";

pub fn mlp_to_bytes(mlp: &Mlp) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(mlp.layer_sizes.len() as u32).to_le_bytes());
    for s in &mlp.layer_sizes {
        out.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    for layer in &mlp.layers {
        for x in layer.w.iter().chain(layer.b.iter()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn mlp_from_bytes(bytes: &[u8]) -> Result<(Mlp, usize), NnError> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], NnError> {
        if *pos + n > bytes.len() {
            return Err(NnError::BadCheckpoint("truncated".into()));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 4)? != MAGIC {
        return Err(NnError::BadCheckpoint("wrong magic".into()));
    }
    let n_sizes = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    if n_sizes < 2 || n_sizes > 64 {
        return Err(NnError::BadCheckpoint(format!("bad size count {n_sizes}")));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        sizes.push(u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize);
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(NnError::BadCheckpoint("zero layer size".into()));
    }
    let mut layers = Vec::with_capacity(n_sizes - 1);
    for i in 0..n_sizes - 1 {
        let (cols, rows) = (sizes[i], sizes[i + 1]);
        let mut w = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            w.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        let mut b = Vec::with_capacity(rows);
        for _ in 0..rows {
            b.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        layers.push(Layer { w, b, rows, cols });
    }
    Ok((
        Mlp {
            layer_sizes: sizes,
            layers,
        },
        pos,
    ))
}
