use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EdgeList, VertexId, MAX_VERTEX_BITS};
use crate::error::{Error, Result};

/// Edges generated per RNG stream. Each chunk draws from its own ChaCha8
/// stream, so output is independent of how chunks are scheduled.
const EDGES_PER_STREAM: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmatParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub scale: u32,
    pub edgefactor: u64,
}

impl RmatParams {
    /// Graph 500 initiator (0.57, 0.19, 0.19, 0.05).
    pub fn graph500(scale: u32, edgefactor: u64) -> Self {
        RmatParams {
            a: 0.57,
            b: 0.19,
            c: 0.19,
            d: 0.05,
            scale,
            edgefactor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.a, self.b, self.c, self.d];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config(format!(
                "R-MAT probabilities must lie in [0, 1], got {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "R-MAT probabilities must sum to 1, got {sum}"
            )));
        }
        if self.edgefactor == 0 {
            return Err(Error::Config("edgefactor must be at least 1".into()));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> Result<u64> {
        if self.scale > MAX_VERTEX_BITS {
            return Err(Error::Size(format!(
                "scale {} exceeds the {MAX_VERTEX_BITS}-bit vertex id bound",
                self.scale
            )));
        }
        Ok(1u64 << self.scale)
    }

    pub fn edge_count(&self) -> Result<u64> {
        let n = self.vertex_count()?;
        let m = n.checked_mul(self.edgefactor).ok_or_else(|| {
            Error::Size(format!(
                "edge count {} * 2^{} overflows 64 bits",
                self.edgefactor, self.scale
            ))
        })?;
        usize::try_from(m)
            .map_err(|_| Error::Size(format!("edge count {m} exceeds addressable memory")))?;
        Ok(m)
    }
}

/// Draws `edgefactor * 2^scale` directed edges from the recursive R-MAT
/// model. Duplicates and self-loops are kept.
pub fn rmat_generate(params: &RmatParams, seed: u64) -> Result<EdgeList> {
    params.validate()?;
    let n = params.vertex_count()?;
    let m = params.edge_count()?;
    let streams = m.div_ceil(EDGES_PER_STREAM);
    let edges: Vec<(VertexId, VertexId)> = (0..streams)
        .into_par_iter()
        .flat_map_iter(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let len = EDGES_PER_STREAM.min(m - stream * EDGES_PER_STREAM);
            let p = *params;
            (0..len).map(move |_| draw_edge(&p, &mut rng))
        })
        .collect();
    debug_assert_eq!(edges.len() as u64, m);
    Ok(EdgeList {
        n,
        edges,
        directed: true,
        original_edge_count: None,
    })
}

// Most significant bit first: the first draw picks the top-level quadrant.
fn draw_edge(p: &RmatParams, rng: &mut ChaCha8Rng) -> (VertexId, VertexId) {
    let ab = p.a + p.b;
    let abc = ab + p.c;
    let (mut u, mut v) = (0u64, 0u64);
    for _ in 0..p.scale {
        let r: f64 = rng.gen();
        let (du, dv) = if r < p.a {
            (0, 0)
        } else if r < ab {
            (0, 1)
        } else if r < abc {
            (1, 0)
        } else {
            (1, 1)
        };
        u = (u << 1) | du;
        v = (v << 1) | dv;
    }
    (u, v)
}
