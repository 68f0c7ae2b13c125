//! Partition comparison by normalized mutual information.

use crate::error::{Error, Result};
use crate::hypergraph::Color;
use crate::num::Real;
use crate::partition::Partition;

/// Contingency table of two labelings of the same nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    /// `counts[a][b]`: nodes labeled `a` by the first and `b` by the second.
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

pub fn confusion(x: &[u32], y: &[u32]) -> Result<ConfusionMatrix> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "label sequences".into(),
            expected: x.len(),
            actual: y.len(),
        });
    }
    let rows = x.iter().max().map_or(0, |&m| m as usize + 1);
    let cols = y.iter().max().map_or(0, |&m| m as usize + 1);
    let mut counts = vec![vec![0u64; cols]; rows];
    let mut row_sums = vec![0u64; rows];
    let mut col_sums = vec![0u64; cols];
    for (&a, &b) in x.iter().zip(y) {
        counts[a as usize][b as usize] += 1;
        row_sums[a as usize] += 1;
        col_sums[b as usize] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        row_sums,
        col_sums,
        total: x.len() as u64,
    })
}

impl ConfusionMatrix {
    /// NMI in the form `-2 sum N_ab ln(N_ab N / N_a N_b) / (sum N_a ln(N_a/N) + sum N_b ln(N_b/N))`.
    pub fn nmi<F: Real>(&self) -> F {
        let n = F::count(self.total);
        let mut numerator = F::zero();
        for (a, row) in self.counts.iter().enumerate() {
            for (b, &nab) in row.iter().enumerate() {
                if nab == 0 {
                    continue;
                }
                let nab = F::count(nab);
                let expected = F::count(self.row_sums[a]) * F::count(self.col_sums[b]);
                numerator = numerator + nab * (nab * n / expected).ln();
            }
        }
        let marginal = |sums: &[u64]| {
            sums.iter()
                .filter(|&&s| s > 0)
                .map(|&s| F::count(s) * (F::count(s) / n).ln())
                .fold(F::zero(), |acc, v| acc + v)
        };
        let denominator = marginal(&self.row_sums) + marginal(&self.col_sums);
        if denominator == F::zero() {
            // both labelings put everything in one group
            return F::one();
        }
        let value = F::lit(-2.0) * numerator / denominator;
        value.max(F::zero()).min(F::one())
    }
}

pub fn nmi<F: Real>(x: &[u32], y: &[u32]) -> Result<F> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Domain("nmi needs at least one node".into()));
    }
    Ok(confusion(x, y)?.nmi())
}

/// NMI of each color's labels: `[red, green, blue]`.
pub fn nmi_per_color<F: Real>(truth: &Partition, pred: &Partition) -> Result<[F; 3]> {
    let mut out = [F::zero(); 3];
    for color in Color::ALL {
        let (t, p) = (truth.labels(color), pred.labels(color));
        if t.len() != p.len() {
            return Err(Error::LengthMismatch {
                what: format!("{color} labels"),
                expected: t.len(),
                actual: p.len(),
            });
        }
        out[color.index()] = nmi(t, p)?;
    }
    Ok(out)
}

/// NMI over all nodes at once, with community ids kept disjoint across colors.
pub fn nmi_joint<F: Real>(truth: &Partition, pred: &Partition) -> Result<F> {
    let flatten = |p: &Partition| {
        let mut offset = 0u32;
        let mut out = Vec::new();
        for color in Color::ALL {
            out.extend(p.labels(color).iter().map(|&l| l + offset));
            offset += p.community_count(color) as u32;
        }
        out
    };
    if truth.node_counts() != pred.node_counts() {
        return Err(Error::Domain(format!(
            "node counts differ: {:?} vs {:?}",
            truth.node_counts(),
            pred.node_counts()
        )));
    }
    nmi(&flatten(truth), &flatten(pred))
}
