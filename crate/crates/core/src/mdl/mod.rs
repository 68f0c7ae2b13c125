//! Two-part description length of a partitioned tripartite hypergraph.
//!
//! The index part pays for the membership vectors and for the community
//! connectivity tensor:
//!
//! ```text
//! L(Y) = n_r log c_r + n_g log c_g + n_b log c_b + c_r c_g c_b log(m + 1)
//! ```
//!
//! The recovery part pays for singling out the actual hyperedges among all
//! hypergraphs with the same community summary; each community triple with
//! `M` hyperedges among `n_a n_b n_g` node triples contributes
//! `log C(n_a n_b n_g, M)`. Logs are base 2, so everything is in bits.
//!
//! Node counts and community sizes are size-weighted and `M` is weight-summed,
//! which makes a coarsened hypergraph score the same as the original under
//! the induced partition.

mod state;

pub(crate) use state::CandidateScratch;
pub use state::{MdlState, Target};

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::hypergraph::{Color, TripartiteHypergraph};
use crate::num::Real;
use crate::partition::Partition;

/// The two codelength parts and their sum, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quality<F> {
    pub q: F,
    pub l_index: F,
    pub l_recover: F,
}

impl<F: Real> Quality<F> {
    pub fn new(l_index: F, l_recover: F) -> Self {
        Quality {
            q: l_index + l_recover,
            l_index,
            l_recover,
        }
    }
}

/// Below this many selected items the binomial is summed term by term.
const DIRECT_SUM_MAX: u64 = 32;

/// Remainder of Stirling's series, `ln x! - (x ln x - x + ln(2 pi x) / 2)`,
/// for `x >= DIRECT_SUM_MAX`.
#[inline]
fn stirling_remainder<F: Real>(x: F) -> F {
    let inv = x.recip();
    let inv2 = inv * inv;
    inv * (F::lit(1.0 / 12.0)
        - inv2
            * (F::lit(1.0 / 360.0) - inv2 * (F::lit(1.0 / 1260.0) - inv2 * F::lit(1.0 / 1680.0))))
}

/// `ln` of the product of `ratio(i)` over `range`, taking one logarithm per
/// run of factors instead of one per factor.
///
/// Every factor must lie within `[2^-64, 2^64]`.
#[inline]
fn ln_ratio_product<F: Real>(range: std::ops::RangeInclusive<u64>, ratio: impl Fn(u64) -> F) -> F {
    let high = F::max_value().sqrt() / F::lit(1.9e19);
    let low = high.recip();
    let mut acc = F::zero();
    let mut product = F::one();
    for i in range {
        product = product * ratio(i);
        if product > high || product < low {
            acc = acc + product.ln();
            product = F::one();
        }
    }
    acc + product.ln()
}

/// `ln C(n, k)` without the domain check.
///
/// Uses the direct product for small `k` and otherwise Stirling's expansion in
/// the form that never subtracts two `O(n log n)` quantities, so the result
/// keeps full relative precision even for `n` near `10^18`.
#[inline]
pub(crate) fn ln_binomial<F: Real>(n: u64, k: u64) -> F {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k == 0 {
        return F::zero();
    }
    if k <= DIRECT_SUM_MAX {
        let base = n - k;
        return ln_ratio_product(1..=k, |i| F::count(base + i) / F::count(i));
    }
    let nf = F::count(n);
    let kf = F::count(k);
    let rf = F::count(n - k);
    let two_pi = F::lit(std::f64::consts::TAU);
    let half = F::lit(0.5);
    let entropy = kf * (nf / kf).ln() - rf * (-(kf / nf)).ln_1p();
    let gaussian = half * (nf.ln() - kf.ln() - rf.ln() - two_pi.ln());
    entropy + gaussian + stirling_remainder(nf) - stirling_remainder(kf) - stirling_remainder(rf)
}

#[inline]
pub(crate) fn log2_binomial_unchecked<F: Real>(n: u64, k: u64) -> F {
    if k == 0 || k == n {
        return F::zero();
    }
    ln_binomial::<F>(n, k) / F::lit(std::f64::consts::LN_2)
}

/// `log2 C(n, k + w) - log2 C(n, k)`, summed term by term when `w` is small.
#[inline]
pub(crate) fn log2_binomial_step<F: Real>(n: u64, k: u64, w: u64) -> F {
    debug_assert!(k + w <= n);
    if w > DIRECT_SUM_MAX {
        return log2_binomial_unchecked::<F>(n, k + w) - log2_binomial_unchecked::<F>(n, k);
    }
    ln_ratio_product(1..=w, |i| F::count(n - k - i + 1) / F::count(k + i))
        / F::lit(std::f64::consts::LN_2)
}

/// `log2 C(n_new, k) - log2 C(n, k)`.
#[inline]
pub(crate) fn log2_binomial_resize<F: Real>(n: u64, n_new: u64, k: u64) -> F {
    debug_assert!(k <= n && k <= n_new);
    if k == 0 || n == n_new {
        return F::zero();
    }
    if k > DIRECT_SUM_MAX {
        return log2_binomial_unchecked::<F>(n_new, k) - log2_binomial_unchecked::<F>(n, k);
    }
    ln_ratio_product(1..=k, |i| F::count(n_new - k + i) / F::count(n - k + i))
        / F::lit(std::f64::consts::LN_2)
}

/// `log2 C(n, k + w) - log2 C(n, k) - log2 C(n, w)`: the bits saved by
/// placing `w` items among `n` slots that already hold `k` instead of
/// among empty ones.
#[inline]
pub(crate) fn log2_binomial_overlap<F: Real>(n: u64, k: u64, w: u64) -> F {
    debug_assert!(k + w <= n);
    if w == 1 {
        return (F::count(n - k) / (F::count(k + 1) * F::count(n))).log2();
    }
    log2_binomial_step::<F>(n, k, w) - log2_binomial_unchecked::<F>(n, w)
}

/// `log2 C(n, k)` in bits.
pub fn log2_binomial<F: Real>(n: u64, k: u64) -> Result<F> {
    if k > n {
        return Err(Error::Domain(format!(
            "binomial C({n}, {k}) requested with k > n"
        )));
    }
    Ok(log2_binomial_unchecked(n, k))
}

/// Index codelength `L(Y)` for node counts `n`, community counts `c` and total
/// edge weight `m`.
pub fn description_length_index<F: Real>(n: [u64; 3], c: [u64; 3], m: u64) -> Result<F> {
    if n.contains(&0) || c.contains(&0) {
        return Err(Error::Domain(format!(
            "node and community counts must be positive, got n={n:?} c={c:?}"
        )));
    }
    Ok(index_length(n, c, m))
}

#[inline]
pub(crate) fn index_length<F: Real>(n: [u64; 3], c: [u64; 3], m: u64) -> F {
    let mut bits = F::zero();
    for color in 0..3 {
        bits = bits + F::count(n[color]) * F::count(c[color]).log2();
    }
    let triples = F::count(c[0]) * F::count(c[1]) * F::count(c[2]);
    bits + triples * F::count(m).ln_1p() / F::lit(std::f64::consts::LN_2)
}

fn community_sizes(graph: &TripartiteHypergraph, partition: &Partition) -> [Vec<u64>; 3] {
    Color::ALL.map(|color| {
        let mut sizes = vec![0u64; partition.community_count(color)];
        for (node, &label) in partition.labels(color).iter().enumerate() {
            sizes[label as usize] += graph.node_size(color, node);
        }
        sizes
    })
}

/// Nonzero entries of the community connectivity tensor, sorted by triple.
pub fn connectivity(graph: &TripartiteHypergraph, partition: &Partition) -> Vec<([u32; 3], u64)> {
    let mut tensor: FxHashMap<[u32; 3], u64> = FxHashMap::default();
    let labels = partition.all_labels();
    for e in graph.edges() {
        let key = [0, 1, 2].map(|c| labels[c][e.ends[c] as usize]);
        *tensor.entry(key).or_insert(0) += e.weight;
    }
    let mut entries: Vec<_> = tensor.into_iter().collect();
    entries.sort_unstable();
    entries
}

/// Recovery codelength `L(X|Y)`, recomputed from scratch.
pub fn description_length_recover<F: Real>(
    graph: &TripartiteHypergraph,
    partition: &Partition,
) -> Result<F> {
    partition.check_against(graph)?;
    let sizes = community_sizes(graph, partition);
    let mut bits = F::zero();
    for (triple, mass) in connectivity(graph, partition) {
        let capacity = (0..3).fold(1u64, |acc, c| acc * sizes[c][triple[c] as usize]);
        if mass > capacity {
            return Err(Error::Inconsistent(format!(
                "community triple {triple:?} holds {mass} hyperedges but only {capacity} node triples"
            )));
        }
        bits = bits + log2_binomial_unchecked::<F>(capacity, mass);
    }
    Ok(bits)
}

/// Description length of a partition, computed from scratch.
pub fn quality<F: Real>(graph: &TripartiteHypergraph, partition: &Partition) -> Result<Quality<F>> {
    partition.check_against(graph)?;
    let counts = partition.community_counts().map(|c| c as u64);
    let l_index = description_length_index(graph.size_totals(), counts, graph.total_weight())?;
    let l_recover = description_length_recover(graph, partition)?;
    Ok(Quality::new(l_index, l_recover))
}
