use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint pairs of sequence numbers, plus at most one unmatched leftover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub leftover: Option<usize>,
}

impl Matching {
    pub fn new(pairs: Vec<(usize, usize)>, leftover: Option<usize>) -> Result<Self> {
        let mut seen: Vec<usize> = pairs
            .iter()
            .flat_map(|&(m, n)| [m, n])
            .chain(leftover)
            .collect();
        let total = seen.len();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != total {
            return Err(Error::invariant("matching reuses a sequence number"));
        }
        Ok(Matching { pairs, leftover })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().flat_map(|&(m, n)| [m, n])
    }
}

/// Fisher–Yates shuffle, drawing `j ∈ [0, i]` for `i = n−1 … 1`.
pub fn fisher_yates<T>(items: &mut [T], rng: &mut impl Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Uniform random perfect matching: shuffle, then pair consecutive
/// elements. An odd element out is reported as the leftover.
pub fn random_matching(seqs: &[usize], rng: &mut impl Rng) -> Result<Matching> {
    if seqs.len() < 2 {
        return Err(Error::arg(format!(
            "need at least 2 particles to match, got {}",
            seqs.len()
        )));
    }
    let mut order = seqs.to_vec();
    fisher_yates(&mut order, rng);
    let leftover = if order.len() % 2 == 1 {
        order.pop()
    } else {
        None
    };
    let pairs = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Matching::new(pairs, leftover)
}

/// Grouping in consecutive blocks of four, `(s0, s1, s2, s3)`: one random
/// bit per block selects `(s0,s2),(s1,s3)` for 0 or `(s0,s3),(s1,s2)` for 1.
/// A trailing block of two is paired as is. A trailing block of three pairs
/// its first two and leaves the third over. Returns the choice bits.
pub fn grouped_matching(seqs: &[usize], rng: &mut impl Rng) -> Result<(Matching, Vec<u8>)> {
    if seqs.len() < 2 {
        return Err(Error::arg(format!(
            "need at least 2 particles to match, got {}",
            seqs.len()
        )));
    }
    let mut pairs = Vec::with_capacity(seqs.len() / 2);
    let mut bits = Vec::with_capacity(seqs.len() / 4);
    let mut leftover = None;
    for block in seqs.chunks(4) {
        match *block {
            [s0, s1, s2, s3] => {
                let bit: u8 = rng.random_range(0..=1);
                if bit == 0 {
                    pairs.extend([(s0, s2), (s1, s3)]);
                } else {
                    pairs.extend([(s0, s3), (s1, s2)]);
                }
                bits.push(bit);
            }
            [s0, s1, s2] => {
                pairs.push((s0, s1));
                leftover = Some(s2);
            }
            [s0, s1] => pairs.push((s0, s1)),
            [s0] => leftover = Some(s0),
            _ => unreachable!("chunks(4)"),
        }
    }
    Ok((Matching::new(pairs, leftover)?, bits))
}

/// Classical bits needed to name one perfect matching on `k` particles out
/// of `(k−1)!!` equally likely ones: `⌈log2 (k−1)!!⌉`.
pub fn uniform_matching_cbits(k: usize) -> u64 {
    if k < 4 {
        return 0;
    }
    let bits: f64 = (1..k).step_by(2).map(|o| (o as f64).log2()).sum();
    (bits - 1e-9).ceil() as u64
}
