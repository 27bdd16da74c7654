//! Seeded sampling estimates for graphs beyond exact capacity.
//!
//! Samples are drawn in fixed-size blocks. Block `j` uses its own ChaCha
//! stream `j` under the user seed, and block tallies are integers, so the
//! estimate does not depend on how blocks are spread over threads.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BunkbedGraph, EdgeProbabilityVector, Network};
use crate::unionfind::UnionFind;

pub const BLOCK_SIZE: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// True when `value` lies within `k` standard errors of the estimate.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.stderr
    }
}

/// Open iff a uniform `u64` draw is below the threshold; `None` means always
/// open.
fn thresholds(p: &EdgeProbabilityVector) -> Vec<Option<u64>> {
    let scale = BigInt::one() << 64;
    p.values()
        .iter()
        .map(|pe| {
            if pe.is_one() {
                None
            } else {
                let t: BigInt = pe.numer() * &scale / pe.denom();
                Some(t.to_u64().unwrap_or(u64::MAX))
            }
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct Tally {
    sum: i64,
    squares: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally { sum: self.sum + o.sum, squares: self.squares + o.squares }
    }
}

fn sample<N, F>(net: &N, p: &EdgeProbabilityVector, samples: u64, seed: u64, score: F) -> Result<Tally>
where
    N: Network + Sync,
    F: Fn(&mut UnionFind) -> i64 + Sync,
{
    p.check_size(net)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let cut = thresholds(p);
    let edges = net.edges();
    let blocks = samples.div_ceil(BLOCK_SIZE);
    let tally = (0..blocks)
        .into_par_iter()
        .map_init(
            || UnionFind::new(net.vertex_count()),
            |uf, block| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(block);
                let count = BLOCK_SIZE.min(samples - block * BLOCK_SIZE);
                let mut t = Tally::default();
                for _ in 0..count {
                    uf.reset();
                    for (&(a, b), c) in edges.iter().zip(&cut) {
                        let open = match c {
                            None => true,
                            Some(c) => rng.next_u64() < *c,
                        };
                        if open {
                            uf.union(a, b);
                        }
                    }
                    let s = score(uf);
                    t.sum += s;
                    t.squares += (s * s) as u64;
                }
                t
            },
        )
        .reduce(Tally::default, Tally::merge);
    Ok(tally)
}

fn check_vertex(net: &impl Network, v: usize) -> Result<()> {
    if v >= net.vertex_count() {
        return Err(Error::InvalidVertex { index: v, count: net.vertex_count() });
    }
    Ok(())
}

/// Estimate of ℙ(a ↔ b) with standard error `sqrt(p̂(1-p̂)/N)`.
pub fn estimate_connection<N: Network + Sync>(
    net: &N,
    p: &EdgeProbabilityVector,
    a: usize,
    b: usize,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_vertex(net, a)?;
    check_vertex(net, b)?;
    let t = sample(net, p, samples, seed, |uf| uf.connected(a, b) as i64)?;
    let n = samples as f64;
    let estimate = t.sum as f64 / n;
    let stderr = (estimate * (1.0 - estimate) / n).max(0.0).sqrt();
    Ok(McEstimate { estimate, stderr, samples, seed })
}

/// Coupled estimate of ℙ(u ↔ v) - ℙ(u ↔ v'): both indicators are read off
/// the same configuration. The standard error uses the sample variance.
pub fn estimate_difference(
    g: &BunkbedGraph,
    p: &EdgeProbabilityVector,
    u: usize,
    v: usize,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_vertex(g, u)?;
    let vp = g.symmetric_vertex(v)?;
    let t = sample(g, p, samples, seed, |uf| uf.connected(u, v) as i64 - uf.connected(u, vp) as i64)?;
    let n = samples as f64;
    let estimate = t.sum as f64 / n;
    let stderr = if samples > 1 {
        let var = (t.squares as f64 - t.sum as f64 * t.sum as f64 / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { estimate, stderr, samples, seed })
}
