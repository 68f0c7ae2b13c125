use rand::seq::index;
use rand::Rng;

use crate::hypergraph::TripartiteHypergraph;

/// Simple hypergraph with `1..=max_n` nodes per color and up to `max_m`
/// distinct unit-weight hyperedges.
pub(crate) fn random_simple_graph<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_m: usize,
) -> TripartiteHypergraph {
    let n = [0; 3].map(|_| rng.random_range(1..=max_n));
    let volume = n[0] * n[1] * n[2];
    let m = rng.random_range(0..=max_m.min(volume));
    let edges = index::sample(rng, volume, m).into_iter().map(|i| {
        (
            [
                (i / (n[1] * n[2])) as u32,
                ((i / n[2]) % n[1]) as u32,
                (i % n[2]) as u32,
            ],
            1,
        )
    });
    TripartiteHypergraph::new(n, edges).unwrap()
}
