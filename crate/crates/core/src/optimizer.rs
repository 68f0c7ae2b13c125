//! Greedy minimization of the description length.
//!
//! A run starts from singleton communities and alternates two phases until an
//! outer round no longer lowers `Q`:
//!
//! 1. local moving: sweep all nodes in a seeded random order and move each one
//!    to the candidate community (or a fresh one) with the largest decrease;
//! 2. coarsening: contract every community into a single sized node, run
//!    local moving on the reduced hypergraph from singletons, project the
//!    result back and polish it with local moving at full resolution.
//!
//! Coarsening preserves `Q` exactly, so every accepted step is a decrease.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{Color, TripartiteHypergraph};
use crate::mdl::{CandidateScratch, MdlState, Target};
use crate::num::Real;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<F> {
    pub seed: u64,
    /// Independent runs; the lowest `Q` wins.
    pub restarts: usize,
    /// Minimum decrease of `Q` (bits) for a move or an outer round to count.
    pub epsilon: F,
    pub max_outer_iters: usize,
    /// Cap on sweeps within one local-moving phase.
    pub max_sweeps: usize,
}

impl<F: Real> Default for OptimizerConfig<F> {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            restarts: 1,
            epsilon: F::lit(1e-9),
            max_outer_iters: 100,
            max_sweeps: 1000,
        }
    }
}

impl<F: Real> OptimizerConfig<F> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_epsilon(mut self, epsilon: F) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon < F::zero() {
            return Err(Error::Config("epsilon must be nonnegative".into()));
        }
        if self.restarts == 0 || self.max_outer_iters == 0 || self.max_sweeps == 0 {
            return Err(Error::Config(
                "restarts, max_outer_iters and max_sweeps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult<F> {
    /// Canonically labeled communities.
    pub partition: Partition,
    pub q: F,
    pub l_index: F,
    pub l_recover: F,
    pub outer_iterations: usize,
    pub total_sweeps: usize,
    pub total_moves: usize,
    pub seed_used: u64,
}

/// Counters from one local-moving phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MovingStats {
    pub sweeps: usize,
    pub moves: usize,
}

impl std::ops::AddAssign for MovingStats {
    fn add_assign(&mut self, rhs: Self) {
        self.sweeps += rhs.sweeps;
        self.moves += rhs.moves;
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of restart `r`; restart 0 uses the configured seed itself.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    if restart == 0 {
        seed
    } else {
        seed ^ mix64(restart as u64)
    }
}

/// Colors with at most this many live communities consider all of them as
/// move targets, not only those sharing a community pair with the node.
/// Without it, communities in different connected components never merge.
pub const FULL_SCAN_COMMUNITIES: usize = 32;

/// One sweep over every node of every color in a fresh random order.
fn sweep<F: Real>(
    state: &mut MdlState<'_, F>,
    order: &mut [(Color, usize)],
    rng: &mut ChaCha8Rng,
    epsilon: F,
    work: &mut CandidateScratch<F>,
) -> usize {
    order.shuffle(rng);
    let threshold = -epsilon;
    let mut moves = 0;
    for &(color, node) in order.iter() {
        if state.graph().degree(color, node) == 0 {
            continue;
        }
        let ctx = state.move_context(color, node);
        let all_live = state.community_count(color) <= FULL_SCAN_COMMUNITIES;
        state.score_existing(&ctx, all_live, work);
        let mut best: Option<(F, Target)> = None;
        // scored labels ascend, so strict < keeps the smallest label on ties
        for &(label, d) in &work.scored {
            if d < threshold && best.is_none_or(|(b, _)| d < b) {
                best = Some((d, Target::Existing(label)));
            }
        }
        if state.community_size(color, ctx.source) > ctx.size {
            let d = state.evaluate(&ctx, Target::Fresh);
            if d < threshold && best.is_none_or(|(b, _)| d < b) {
                best = Some((d, Target::Fresh));
            }
        }
        if let Some((_, target)) = best {
            state.commit(&ctx, target);
            moves += 1;
        }
    }
    moves
}

/// Merges the communities of isolated nodes, color by color, into the
/// community of the lowest-indexed isolated node.
fn merge_isolated<F: Real>(state: &mut MdlState<'_, F>, epsilon: F) -> usize {
    let graph = state.graph();
    let mut moves = 0;
    for color in Color::ALL {
        let mut isolated = (0..graph.node_count(color)).filter(|&v| graph.degree(color, v) == 0);
        let Some(first) = isolated.next() else {
            continue;
        };
        let target = state.label(color, first);
        for v in isolated {
            if state.label(color, v) == target {
                continue;
            }
            let ctx = state.move_context(color, v);
            if state.evaluate(&ctx, Target::Existing(target)) < -epsilon {
                state.commit(&ctx, Target::Existing(target));
                moves += 1;
            }
        }
    }
    moves
}

/// Sweeps until no node moves (or the sweep cap is hit), so the result is a
/// local minimum under single-node moves to candidate communities.
pub fn local_moving<F: Real>(
    state: &mut MdlState<'_, F>,
    rng: &mut ChaCha8Rng,
    config: &OptimizerConfig<F>,
) -> MovingStats {
    let graph = state.graph();
    let mut order: Vec<(Color, usize)> = Color::ALL
        .iter()
        .flat_map(|&c| (0..graph.node_count(c)).map(move |v| (c, v)))
        .collect();
    let mut work = CandidateScratch::default();
    let mut stats = MovingStats::default();
    while stats.sweeps < config.max_sweeps {
        let start = state.q();
        let mut moved = sweep(state, &mut order, rng, config.epsilon, &mut work);
        stats.sweeps += 1;
        if moved == 0 {
            moved = merge_isolated(state, config.epsilon);
        }
        stats.moves += moved;
        debug_assert!(
            state.q() <= start + config.epsilon.max(F::lit(1e-9)) * start.abs().max(F::one())
        );
        if moved == 0 {
            break;
        }
    }
    stats
}

/// A hypergraph contracted along a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Coarsening {
    pub reduced: TripartiteHypergraph,
    /// For every original node, the reduced node standing for it.
    pub mapping: [Vec<u32>; 3],
}

/// Contracts each community into one node whose size is the summed member
/// size; reduced hyperedges carry the community connectivity as weight.
pub fn coarsen(graph: &TripartiteHypergraph, partition: &Partition) -> Result<Coarsening> {
    partition.check_against(graph)?;
    let sizes = Color::ALL.map(|color| {
        let mut s = vec![0u64; partition.community_count(color)];
        for (v, &l) in partition.labels(color).iter().enumerate() {
            s[l as usize] += graph.node_size(color, v);
        }
        s
    });
    let edges = crate::mdl::connectivity(graph, partition);
    let reduced = TripartiteHypergraph::with_node_sizes(sizes, edges)?;
    Ok(Coarsening {
        reduced,
        mapping: partition.all_labels().clone(),
    })
}

/// Labels original nodes with the labels of their reduced nodes.
pub fn project_labels(mapping: &[Vec<u32>; 3], reduced: &Partition) -> Result<Partition> {
    let mut labels: [Vec<u32>; 3] = Default::default();
    for color in Color::ALL {
        let coarse = reduced.labels(color);
        let map = &mapping[color.index()];
        let mut out = Vec::with_capacity(map.len());
        for &r in map {
            let l = coarse
                .get(r as usize)
                .ok_or_else(|| Error::LengthMismatch {
                    what: format!("reduced {color} labels"),
                    expected: r as usize + 1,
                    actual: coarse.len(),
                })?;
            out.push(*l);
        }
        labels[color.index()] = out;
    }
    Ok(Partition::from_raw([&labels[0], &labels[1], &labels[2]]))
}

fn run_once<F: Real>(
    graph: &TripartiteHypergraph,
    config: &OptimizerConfig<F>,
    seed: u64,
) -> Result<DetectionResult<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = MdlState::singletons(graph)?;
    let mut stats = local_moving(&mut state, &mut rng, config);
    state.compact();
    let mut q_prev = state.q();
    let mut outer = 0;
    while outer < config.max_outer_iters {
        outer += 1;
        let partition = state.partition();
        let Coarsening { reduced, mapping } = coarsen(graph, &partition)?;
        let mut coarse = MdlState::singletons(&reduced)?;
        stats += local_moving(&mut coarse, &mut rng, config);
        let projected = project_labels(&mapping, &coarse.partition())?;
        state = MdlState::new(graph, &projected)?;
        stats += local_moving(&mut state, &mut rng, config);
        state.compact();
        let q = state.q();
        debug_assert!(q <= q_prev + F::lit(1e-9) * q_prev.abs().max(F::one()));
        let gain = q_prev - q;
        q_prev = q;
        if gain < config.epsilon {
            break;
        }
    }
    let quality = state.quality();
    Ok(DetectionResult {
        partition: state.partition(),
        q: quality.q,
        l_index: quality.l_index,
        l_recover: quality.l_recover,
        outer_iterations: outer,
        total_sweeps: stats.sweeps,
        total_moves: stats.moves,
        seed_used: seed,
    })
}

/// Detects communities; restarts run in parallel and the lowest `Q` wins, ties
/// going to the earliest restart.
pub fn detect<F: Real>(
    graph: &TripartiteHypergraph,
    config: &OptimizerConfig<F>,
) -> Result<DetectionResult<F>> {
    config.validate()?;
    if graph.node_counts().contains(&0) {
        return Err(Error::Domain("every node set must be nonempty".into()));
    }
    let runs: Vec<Result<DetectionResult<F>>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_once(graph, config, restart_seed(config.seed, r)))
        .collect();
    let mut best: Option<DetectionResult<F>> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.q < b.q) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdl::quality;
    use crate::num::approx_eq;
    use rand::Rng;

    fn two_edge() -> TripartiteHypergraph {
        TripartiteHypergraph::new([2, 2, 2], [([0, 0, 0], 1), ([1, 1, 1], 1)]).unwrap()
    }

    #[test]
    fn local_moving_reaches_all_one_on_two_edges() {
        let g = two_edge();
        for seed in 0..20 {
            let mut s = MdlState::<f64>::singletons(&g).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            local_moving(&mut s, &mut rng, &OptimizerConfig::default());
            assert_eq!(s.partition(), Partition::all_one([2, 2, 2]));
            assert!((s.q() - 6.392317).abs() < 1e-6);
        }
    }

    #[test]
    fn all_one_is_a_single_move_local_minimum() {
        let g = two_edge();
        let s = MdlState::<f64>::new(&g, &Partition::all_one([2, 2, 2])).unwrap();
        for color in Color::ALL {
            for v in 0..2 {
                assert!(s.delta_q_move(color, v, Target::Fresh).unwrap() >= 0.0);
            }
        }
        let mut s = s;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stats = local_moving(&mut s, &mut rng, &OptimizerConfig::default());
        assert_eq!(stats.moves, 0);
        assert_eq!(stats.sweeps, 1);
    }

    #[test]
    fn edgeless_graph_collapses() {
        let g = TripartiteHypergraph::new([3, 4, 2], []).unwrap();
        let singles = Partition::singletons([3, 4, 2]);
        let mut merged = singles.all_labels().clone();
        merged[0][1] = 0;
        let merged = Partition::from_raw([&merged[0], &merged[1], &merged[2]]);
        let before: f64 = quality(&g, &singles).unwrap().q;
        let after: f64 = quality(&g, &merged).unwrap().q;
        assert!(after < before);

        let mut s = MdlState::<f64>::singletons(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        local_moving(&mut s, &mut rng, &OptimizerConfig::default());
        assert_eq!(s.partition(), Partition::all_one([3, 4, 2]));
        assert_eq!(s.q(), 0.0);
    }

    #[test]
    fn identity_coarsening() {
        let g =
            TripartiteHypergraph::new([3, 2, 2], [([0, 0, 0], 1), ([1, 1, 1], 1), ([2, 0, 1], 1)])
                .unwrap();
        let c = coarsen(&g, &Partition::singletons([3, 2, 2])).unwrap();
        assert_eq!(c.reduced, g);
    }

    #[test]
    fn red_merged_coarsening() {
        let g = two_edge();
        let p = Partition::new(vec![0, 0], vec![0, 1], vec![0, 1]).unwrap();
        let c = coarsen(&g, &p).unwrap();
        assert_eq!(c.reduced.node_counts(), [1, 2, 2]);
        assert_eq!(c.reduced.node_sizes(Color::Red), &[2]);
        let edges: Vec<_> = c
            .reduced
            .edges()
            .iter()
            .map(|e| (e.ends, e.weight))
            .collect();
        assert_eq!(edges, vec![([0, 0, 0], 1), ([0, 1, 1], 1)]);
        let q0: f64 = quality(&g, &p).unwrap().q;
        let q1: f64 = quality(&c.reduced, &Partition::singletons([1, 2, 2]))
            .unwrap()
            .q;
        assert!(approx_eq(q0, q1, q0, 1e-12));
    }

    #[test]
    fn total_aggregation() {
        let g = two_edge();
        let c = coarsen(&g, &Partition::all_one([2, 2, 2])).unwrap();
        assert_eq!(c.reduced.node_counts(), [1, 1, 1]);
        assert_eq!(c.reduced.edges().len(), 1);
        assert_eq!(c.reduced.edges()[0].weight, 2);
    }

    #[test]
    fn projection_round_trips_and_composes() {
        let g = TripartiteHypergraph::new(
            [4, 2, 2],
            [
                ([0, 0, 0], 1),
                ([1, 1, 1], 1),
                ([2, 0, 1], 1),
                ([3, 1, 0], 1),
            ],
        )
        .unwrap();
        let p = Partition::new(vec![0, 1, 2, 1], vec![0, 1], vec![0, 0]).unwrap();
        let c = coarsen(&g, &p).unwrap();
        let back =
            project_labels(&c.mapping, &Partition::singletons(c.reduced.node_counts())).unwrap();
        assert_eq!(back, p);

        let merge01 = Partition::new(vec![0, 0, 1], vec![0, 1], vec![0]).unwrap();
        let projected = project_labels(&c.mapping, &merge01).unwrap();
        assert_eq!(projected.labels(Color::Red), &[0, 0, 1, 0]);

        let short = Partition::singletons([2, 2, 1]);
        assert!(project_labels(&c.mapping, &short).is_err());
    }

    #[test]
    fn chained_projection_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = crate::testutil::random_simple_graph(&mut rng, 10, 60);
            let n = g.node_counts();
            let rand_part = |rng: &mut ChaCha8Rng, n: [usize; 3]| {
                let raw = n.map(|k| {
                    (0..k)
                        .map(|_| rng.random_range(0..3u32))
                        .collect::<Vec<_>>()
                });
                Partition::from_raw([&raw[0], &raw[1], &raw[2]])
            };
            let p1 = rand_part(&mut rng, n);
            let c1 = coarsen(&g, &p1).unwrap();
            let p2 = rand_part(&mut rng, c1.reduced.node_counts());
            let c2 = coarsen(&c1.reduced, &p2).unwrap();
            let p3 = rand_part(&mut rng, c2.reduced.node_counts());

            let two_step =
                project_labels(&c1.mapping, &project_labels(&c2.mapping, &p3).unwrap()).unwrap();
            let composed: [Vec<u32>; 3] = [0, 1, 2].map(|c| {
                c1.mapping[c]
                    .iter()
                    .map(|&r| c2.mapping[c][r as usize])
                    .collect()
            });
            let direct = project_labels(&composed, &p3).unwrap();
            assert_eq!(two_step, direct);

            let qa: f64 = quality(&g, &two_step).unwrap().q;
            let qb: f64 = quality(&c2.reduced, &p3).unwrap().q;
            assert!(approx_eq(qa, qb, qa, 1e-9));
        }
    }

    #[test]
    fn detect_two_edges_any_seed() {
        let g = two_edge();
        for seed in [0, 1, 42, u64::MAX] {
            let r = detect(&g, &OptimizerConfig::<f64>::default().with_seed(seed)).unwrap();
            assert_eq!(r.partition, Partition::all_one([2, 2, 2]));
            assert!((r.q - (3f64.log2() + 28f64.log2())).abs() < 1e-9);
            assert_eq!(r.seed_used, seed);
        }
    }

    #[test]
    fn detect_rejects_bad_input() {
        let g = TripartiteHypergraph::new([0, 2, 2], []).unwrap();
        assert!(matches!(
            detect(&g, &OptimizerConfig::<f64>::default()),
            Err(Error::Domain(_))
        ));
        let g = two_edge();
        let bad = OptimizerConfig::<f64>::default().with_restarts(0);
        assert!(matches!(detect(&g, &bad), Err(Error::Config(_))));
        let bad = OptimizerConfig::<f64>::default().with_epsilon(-1.0);
        assert!(matches!(detect(&g, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn restart_seeds() {
        assert_eq!(restart_seed(17, 0), 17);
        assert_ne!(restart_seed(17, 1), restart_seed(17, 2));
    }
}
