use std::collections::HashMap;

use log::warn;

use crate::error::{Error, Result};
use crate::map::{BranchMap, OrbitTrace};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub block_length: usize,
    /// Plug-in entropy of the length-`n` block distribution, in nats.
    pub block_entropy: f64,
    /// `block_entropy / n`.
    pub rate: f64,
    /// Number of (overlapping) blocks counted.
    pub sample_size: usize,
    /// Fewer than `100 · N^{n/2}` symbols were available.
    pub undersampled: bool,
}

/// Counts of overlapping length-`n` blocks.
#[derive(Clone, Debug)]
pub struct BlockCounts<'a> {
    pub n: usize,
    counts: HashMap<&'a [usize], u64>,
    total: u64,
}

impl<'a> BlockCounts<'a> {
    pub fn new(stream: &'a [usize], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("block length must be at least 1".into()));
        }
        if n > stream.len() {
            return Err(Error::BlockTooLong {
                n,
                len: stream.len(),
            });
        }
        Ok(Self::from_windows(stream.windows(n), n))
    }

    fn from_windows(windows: impl Iterator<Item = &'a [usize]>, n: usize) -> Self {
        let mut counts: HashMap<&[usize], u64> = HashMap::new();
        let mut total = 0;
        for w in windows {
            *counts.entry(w).or_insert(0) += 1;
            total += 1;
        }
        Self { n, counts, total }
    }

    /// Distribution of the first `n - 1` symbols of each counted block.
    pub fn prefix_marginal(&self) -> BlockCounts<'a> {
        let mut counts: HashMap<&[usize], u64> = HashMap::new();
        for (block, c) in &self.counts {
            *counts.entry(&block[..self.n - 1]).or_insert(0) += c;
        }
        BlockCounts {
            n: self.n - 1,
            counts,
            total: self.total,
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, block: &[usize]) -> u64 {
        self.counts.get(block).copied().unwrap_or(0)
    }

    /// `-Σ p log p`; empty blocks never appear, so `0 log 0` needs no care.
    pub fn entropy(&self) -> f64 {
        let total = self.total as f64;
        let mut blocks: Vec<(&&[usize], &u64)> = self.counts.iter().collect();
        // fixed summation order keeps results bit-stable across runs
        blocks.sort_unstable();
        -blocks
            .into_iter()
            .map(|(_, &c)| {
                let p = c as f64 / total;
                p * p.ln()
            })
            .sum::<f64>()
    }
}

fn undersampled(stream: &[usize], n: usize) -> bool {
    let alphabet = stream.iter().max().map_or(1, |m| m + 1) as f64;
    (stream.len() as f64) < 100.0 * alphabet.powf(n as f64 / 2.0)
}

pub fn block_entropy(stream: &[usize], n: usize) -> Result<EntropyEstimate> {
    let counts = BlockCounts::new(stream, n)?;
    let h = counts.entropy();
    let under = undersampled(stream, n);
    if under {
        warn!(
            "block length {n} is large for a stream of {} symbols",
            stream.len()
        );
    }
    Ok(EntropyEstimate {
        block_length: n,
        block_entropy: h,
        rate: h / n as f64,
        sample_size: counts.total() as usize,
        undersampled: under,
    })
}

/// Average of `-log(count(b_{i..i+n+1}) / count(b_{i..i+n}))` along the
/// stream, with prefix counts taken from the same `(n+1)`-blocks. This equals
/// `H_{n+1} - H_n` of that plug-in distribution.
pub fn conditional_information(stream: &[usize], n: usize) -> Result<f64> {
    let joint = BlockCounts::new(stream, n + 1)?;
    let prefix = joint.prefix_marginal();
    let total = joint.total() as f64;
    let sum: f64 = stream
        .windows(n + 1)
        .map(|w| {
            let c = joint.count(w) as f64;
            let cp = prefix.count(&w[..n]) as f64;
            -(c / cp).ln()
        })
        .sum();
    Ok((sum / total).max(0.0))
}

/// Birkhoff average of `log |slope|` along the trace itinerary.
pub fn lyapunov_entropy<M: BranchMap>(map: &M, trace: &OrbitTrace<M::Scalar>) -> Result<f64> {
    if trace.word.is_empty() {
        return Err(Error::InvalidArgument("trace has no steps".into()));
    }
    let logs: Vec<f64> = (0..map.branch_count())
        .map(|i| {
            map.affine(i)
                .map(|(s, _)| s.abs().to_f64().ln())
                .ok_or(Error::NonAffineMap)
        })
        .collect::<Result<_>>()?;
    // visits per distinct log-slope, so a constant slope gives its log exactly
    let mut visits: Vec<(f64, u64)> = Vec::new();
    for &i in &trace.word {
        match visits.iter_mut().find(|(l, _)| *l == logs[i]) {
            Some((_, c)) => *c += 1,
            None => visits.push((logs[i], 1)),
        }
    }
    let n = trace.word.len() as f64;
    Ok(visits.iter().map(|&(l, c)| l * (c as f64 / n)).sum())
}
