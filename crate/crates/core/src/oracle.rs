//! Exhaustive minimization for tiny hypergraphs.
//!
//! Every combination of per-color set partitions is scored from scratch with
//! [`crate::mdl::quality`], so the result is independent of the incremental
//! bookkeeping the optimizer relies on.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::TripartiteHypergraph;
use crate::mdl::quality;
use crate::num::Real;
use crate::partition::Partition;

/// Largest set the enumerator accepts.
pub const MAX_ITEMS: usize = 8;

pub const DEFAULT_LIMIT: u128 = 10_000_000;

/// Bell numbers `B(0..=8)`.
const BELL: [u128; MAX_ITEMS + 1] = [1, 1, 2, 5, 15, 52, 203, 877, 4140];

pub fn bell(n: usize) -> Option<u128> {
    BELL.get(n).copied()
}

/// Restricted growth strings of length `n` in lexicographic order: each one is
/// the canonical labeling of a distinct set partition.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    current: Vec<u32>,
    /// `prefix_max[i]` is the largest label among positions `0..=i`.
    prefix_max: Vec<u32>,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_ITEMS).contains(&n) {
            return Err(Error::Domain(format!(
                "set partition enumeration supports 1..={MAX_ITEMS} items, got {n}"
            )));
        }
        Ok(SetPartitions {
            current: vec![0; n],
            prefix_max: vec![0; n],
            done: false,
        })
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let n = self.current.len();
        // bump the rightmost position that can still grow
        let mut i = n - 1;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            if self.current[i] <= self.prefix_max[i - 1] {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
            i -= 1;
        }
        Some(out)
    }
}

pub fn enumerate_set_partitions(n: usize) -> Result<Vec<Vec<u32>>> {
    Ok(SetPartitions::new(n)?.collect())
}

/// Global minimum of `Q` over all partitions; ties go to the first combination
/// in (red, green, blue) lexicographic enumeration order.
pub fn exact_min_q<F: Real>(graph: &TripartiteHypergraph, limit: u128) -> Result<(Partition, F)> {
    let counts = graph.node_counts();
    let mut product: u128 = 1;
    for &n in &counts {
        let b = bell(n).filter(|_| n >= 1).ok_or_else(|| {
            Error::Domain(format!(
                "exhaustive search supports 1..={MAX_ITEMS} nodes per color, got {counts:?}"
            ))
        })?;
        product *= b;
    }
    if product > limit {
        return Err(Error::SearchSpace { product, limit });
    }
    let [red, green, blue] = counts.map(|n| enumerate_set_partitions(n).expect("size checked"));

    let best = red
        .par_iter()
        .enumerate()
        .map(|(ri, r)| -> Result<Option<(F, usize, Partition)>> {
            let mut best: Option<(F, usize, Partition)> = None;
            for (gi, g) in green.iter().enumerate() {
                for (bi, b) in blue.iter().enumerate() {
                    let p = Partition::new(r.clone(), g.clone(), b.clone())?;
                    let q = quality::<F>(graph, &p)?.q;
                    let order = (ri * green.len() + gi) * blue.len() + bi;
                    if best.as_ref().is_none_or(|(bq, _, _)| q < *bq) {
                        best = Some((q, order, p));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .fold(None::<(F, usize, Partition)>, |acc, cand| match acc {
            Some(a) if a.0 < cand.0 || (a.0 == cand.0 && a.1 < cand.1) => Some(a),
            _ => Some(cand),
        })
        .expect("nonempty search space");
    Ok((best.2, best.0))
}
