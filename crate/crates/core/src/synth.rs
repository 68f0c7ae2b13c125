//! Planted-partition benchmark hypergraphs.
//!
//! Each color is split into equally sized communities. A set of "dense"
//! community triples fixes the planted correspondence: node triples falling in
//! a dense community triple become hyperedges with probability `p_dense`, all
//! others with probability `p_sparse`. Community `a` of a color owns the node
//! ids `a * nodes_per_comm .. (a + 1) * nodes_per_comm`.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::hypergraph::TripartiteHypergraph;
use crate::partition::Partition;

pub const DEFAULT_EDGE_CAP: u64 = 10_000_000;

/// Stream offset separating the triple draw from the edge draw.
const TRIPLE_STREAM: u64 = 0x7472_6970_6c65_7321;

const MAX_COVERAGE_ATTEMPTS: usize = 100_000;

/// Sparse rate used when none is given.
pub fn default_p_sparse(p_dense: f64) -> f64 {
    0.001 * p_dense
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub communities: [usize; 3],
    pub nodes_per_comm: usize,
    /// Sorted, duplicate-free community triples with planted density.
    pub dense_triples: Vec<[u32; 3]>,
    pub p_dense: f64,
    pub p_sparse: f64,
    pub seed: u64,
    /// Refuse configurations whose expected edge count exceeds this.
    pub edge_cap: u64,
    /// Refuse outputs with fewer edges than this, when set.
    pub min_edges: Option<u64>,
}

impl GeneratorConfig {
    /// Diagonal correspondence: community `a` of every color pairs only with
    /// community `a` of the others.
    pub fn one_to_one(
        communities: usize,
        nodes_per_comm: usize,
        p_dense: f64,
        p_sparse: Option<f64>,
        seed: u64,
    ) -> Self {
        GeneratorConfig {
            communities: [communities; 3],
            nodes_per_comm,
            dense_triples: (0..communities as u32).map(|a| [a, a, a]).collect(),
            p_dense,
            p_sparse: p_sparse.unwrap_or_else(|| default_p_sparse(p_dense)),
            seed,
            edge_cap: DEFAULT_EDGE_CAP,
            min_edges: None,
        }
    }

    /// `triples` distinct dense community triples drawn at random, redrawn
    /// until every community of every color lies in at least one of them.
    pub fn many_to_many(
        communities: [usize; 3],
        triples: usize,
        nodes_per_comm: usize,
        p_dense: f64,
        p_sparse: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        if communities.contains(&0) {
            return Err(Error::Config("community counts must be positive".into()));
        }
        let total = communities.iter().product::<usize>();
        let widest = *communities.iter().max().unwrap();
        if triples > total {
            return Err(Error::Config(format!(
                "{triples} dense triples requested but only {total} community triples exist"
            )));
        }
        if triples < widest {
            return Err(Error::Config(format!(
                "{triples} dense triples cannot cover {widest} communities of one color"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TRIPLE_STREAM);
        let [_, cg, cb] = communities;
        for _ in 0..MAX_COVERAGE_ATTEMPTS {
            let mut drawn: Vec<[u32; 3]> = index::sample(&mut rng, total, triples)
                .into_iter()
                .map(|i| {
                    [
                        (i / (cg * cb)) as u32,
                        ((i / cb) % cg) as u32,
                        (i % cb) as u32,
                    ]
                })
                .collect();
            if covers(&drawn, communities) {
                drawn.sort_unstable();
                return Ok(GeneratorConfig {
                    communities,
                    nodes_per_comm,
                    dense_triples: drawn,
                    p_dense,
                    p_sparse: p_sparse.unwrap_or_else(|| default_p_sparse(p_dense)),
                    seed,
                    edge_cap: DEFAULT_EDGE_CAP,
                    min_edges: None,
                });
            }
        }
        Err(Error::Config(format!(
            "no covering set of {triples} triples found in {MAX_COVERAGE_ATTEMPTS} draws"
        )))
    }

    pub fn node_counts(&self) -> [usize; 3] {
        self.communities.map(|c| c * self.nodes_per_comm)
    }

    fn block_volume(&self) -> u64 {
        (self.nodes_per_comm as u64).pow(3)
    }

    /// Expected number of hyperedges.
    pub fn expected_edges(&self) -> f64 {
        let blocks = self.communities.iter().product::<usize>() as f64;
        let dense = self.dense_triples.len() as f64;
        let vol = self.block_volume() as f64;
        vol * (dense * self.p_dense + (blocks - dense) * self.p_sparse)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.communities.contains(&0) || self.nodes_per_comm == 0 {
            return bad("community counts and nodes per community must be positive".into());
        }
        if self.node_counts().iter().any(|&n| n > u32::MAX as usize) {
            return bad("node count exceeds u32 range".into());
        }
        for (name, p) in [("p_dense", self.p_dense), ("p_sparse", self.p_sparse)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.p_sparse > self.p_dense {
            return bad("p_sparse must not exceed p_dense".into());
        }
        if self.dense_triples.is_empty() {
            return bad("at least one dense triple is required".into());
        }
        for t in &self.dense_triples {
            if (0..3).any(|c| t[c] as usize >= self.communities[c]) {
                return bad(format!("dense triple {t:?} out of range"));
            }
        }
        if !covers(&self.dense_triples, self.communities) {
            return bad("every community must appear in a dense triple".into());
        }
        Ok(())
    }

    /// The planted partition.
    pub fn truth(&self) -> Partition {
        let labels = self.communities.map(|c| {
            (0..c * self.nodes_per_comm)
                .map(|v| (v / self.nodes_per_comm) as u32)
                .collect()
        });
        Partition::from_labels(labels).expect("planted labels are contiguous")
    }
}

fn covers(triples: &[[u32; 3]], communities: [usize; 3]) -> bool {
    (0..3).all(|c| {
        let mut seen = vec![false; communities[c]];
        for t in triples {
            seen[t[c] as usize] = true;
        }
        seen.iter().all(|&s| s)
    })
}

/// Samples a planted hypergraph and returns it with its planted partition.
///
/// Within each community-triple block the hyperedges are found by geometric
/// gap sampling, so the cost follows the number of hyperedges rather than the
/// number of node triples.
pub fn generate(config: &GeneratorConfig) -> Result<(TripartiteHypergraph, Partition)> {
    config.validate()?;
    let expected = config.expected_edges();
    if expected > config.edge_cap as f64 {
        return Err(Error::EdgeCap {
            expected,
            cap: config.edge_cap,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let npc = config.nodes_per_comm as u64;
    let volume = config.block_volume();
    let dense_geo = gap_sampler(config.p_dense)?;
    let sparse_geo = gap_sampler(config.p_sparse)?;
    let [cr, cg, cb] = config.communities.map(|c| c as u32);
    let mut edges = Vec::with_capacity(expected.ceil() as usize + 16);
    for a in 0..cr {
        for b in 0..cg {
            for g in 0..cb {
                let dense = config.dense_triples.binary_search(&[a, b, g]).is_ok();
                let sampler = if dense { &dense_geo } else { &sparse_geo };
                let base = [a, b, g].map(|l| l as u64 * npc);
                let mut emit = |pos: u64| {
                    let local = [pos / (npc * npc), (pos / npc) % npc, pos % npc];
                    edges.push(([0, 1, 2].map(|c| (base[c] + local[c]) as u32), 1u64));
                };
                match sampler {
                    Gap::Never => {}
                    Gap::Always => (0..volume).for_each(&mut emit),
                    Gap::Geometric(geo) => {
                        let mut pos = geo.sample(&mut rng);
                        while pos < volume {
                            emit(pos);
                            pos = pos.saturating_add(1).saturating_add(geo.sample(&mut rng));
                        }
                    }
                }
            }
        }
    }
    if let Some(min) = config.min_edges {
        if (edges.len() as u64) < min {
            return Err(Error::Config(format!(
                "generated {} hyperedges, fewer than the required {min}",
                edges.len()
            )));
        }
    }
    let graph = TripartiteHypergraph::new(config.node_counts(), edges)?;
    debug_assert!(graph.is_simple());
    Ok((graph, config.truth()))
}

enum Gap {
    Never,
    Always,
    Geometric(Geometric),
}

fn gap_sampler(p: f64) -> Result<Gap> {
    if p <= 0.0 {
        Ok(Gap::Never)
    } else if p >= 1.0 {
        Ok(Gap::Always)
    } else {
        Geometric::new(p)
            .map(Gap::Geometric)
            .map_err(|e| Error::Config(format!("probability {p}: {e}")))
    }
}

/// Community triple of a hyperedge under the planted layout.
pub fn planted_triple(config: &GeneratorConfig, ends: [u32; 3]) -> [u32; 3] {
    ends.map(|v| v / config.nodes_per_comm as u32)
}
