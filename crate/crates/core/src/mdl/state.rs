use std::cell::Cell;

use rustc_hash::{FxHashMap, FxHashSet};

use super::{
    index_length, log2_binomial_overlap, log2_binomial_resize, log2_binomial_step,
    log2_binomial_unchecked, Quality,
};
use crate::error::{Error, Result};
use crate::hypergraph::{Color, TripartiteHypergraph};
use crate::num::Real;
use crate::partition::Partition;

/// Labels of the two other colors of a community triple, in color order.
type PairKey = (u32, u32);
type PairMap = FxHashMap<PairKey, u64>;
/// Memo of [`MdlState::size_shift`]: the growth it was computed for and its value.
type ShiftSlot<F> = Cell<Option<(u64, F)>>;

/// Destination of a single-node move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// An existing, nonempty community of the node's color.
    Existing(u32),
    /// A new community holding only the moved node.
    Fresh,
}

#[inline]
fn pair_key(color: Color, triple: &[u32; 3]) -> PairKey {
    let [a, b] = color.others();
    (triple[a.index()], triple[b.index()])
}

#[inline]
fn profile_weight(profile: &[(PairKey, u64)], key: &PairKey) -> u64 {
    match profile.binary_search_by(|(k, _)| k.cmp(key)) {
        Ok(i) => profile[i].1,
        Err(_) => 0,
    }
}

#[inline]
fn triple_from(color: Color, label: u32, key: PairKey) -> [u32; 3] {
    let mut t = [0u32; 3];
    let [a, b] = color.others();
    t[color.index()] = label;
    t[a.index()] = key.0;
    t[b.index()] = key.1;
    t
}

/// Reusable buffers for [`MdlState::score_existing`].
#[derive(Debug, Clone, Default)]
pub(crate) struct CandidateScratch<F> {
    /// Per label: summed overlap terms, `None` when the label shares no pair.
    overlap: Vec<Option<F>>,
    labels: Vec<u32>,
    /// The node's pairs counted by (pair capacity, weight).
    groups: Vec<((u64, u64), u64)>,
    /// Disjoint-placement bits per resulting community size.
    disjoint: Vec<(u64, F)>,
    pub scored: Vec<(u32, F)>,
}

/// Everything about a node that does not depend on the move target.
#[derive(Debug, Clone)]
pub(crate) struct MoveContext<F> {
    pub color: Color,
    pub node: usize,
    pub source: u32,
    pub size: u64,
    /// Incident weight per other-color community pair, sorted by pair.
    pub profile: Vec<(PairKey, u64)>,
    /// Change of the recovery length from taking the node out of its community.
    pub source_recover: F,
    pub source_empties: bool,
}

/// A partition together with its cached connectivity tensor and codelengths.
///
/// The tensor `M` is held in three views, one per color: for color `c` and
/// community `a`, a map from the labels of the other two colors to the mass
/// of that community triple. Each view also keeps, for every pair of
/// other-color labels, the communities of its own color touching that pair;
/// the optimizer draws its move candidates from there.
///
/// Moves keep community ids stable. Emptied ids are recycled for fresh
/// communities and only renumbered by [`MdlState::compact`].
#[derive(Debug, Clone)]
pub struct MdlState<'g, F: Copy> {
    graph: &'g TripartiteHypergraph,
    labels: [Vec<u32>; 3],
    comm_size: [Vec<u64>; 3],
    free: [Vec<u32>; 3],
    active: [usize; 3],
    slices: [Vec<PairMap>; 3],
    fibers: [FxHashMap<PairKey, Vec<u32>>; 3],
    /// Per community: how many of its pairs hold mass exactly 1.
    unit_pairs: [Vec<u64>; 3],
    /// Per community: the pairs holding mass 2 or more.
    heavy_pairs: [Vec<FxHashSet<PairKey>>; 3],
    shift: [Vec<ShiftSlot<F>>; 3],
    l_index: F,
    l_recover: F,
}

impl<'g, F: Real> MdlState<'g, F> {
    /// Aggregates the connectivity tensor for a partition.
    pub fn new(graph: &'g TripartiteHypergraph, partition: &Partition) -> Result<Self> {
        partition.check_against(graph)?;
        if graph.size_totals().contains(&0) {
            return Err(Error::Domain("every node set must be nonempty".into()));
        }
        let counts = partition.community_counts();
        let mut comm_size = counts.map(|c| vec![0u64; c]);
        for color in Color::ALL {
            for (node, &l) in partition.labels(color).iter().enumerate() {
                comm_size[color.index()][l as usize] += graph.node_size(color, node);
            }
        }
        let mut state = MdlState {
            graph,
            labels: partition.all_labels().clone(),
            comm_size,
            free: Default::default(),
            active: counts,
            slices: counts.map(|c| vec![PairMap::default(); c]),
            fibers: Default::default(),
            unit_pairs: counts.map(|c| vec![0; c]),
            heavy_pairs: counts.map(|c| vec![FxHashSet::default(); c]),
            shift: counts.map(|c| vec![Default::default(); c]),
            l_index: F::zero(),
            l_recover: F::zero(),
        };
        for e in graph.edges() {
            let t = [0, 1, 2].map(|c| state.labels[c][e.ends[c] as usize]);
            state.add_mass(t, e.weight);
        }
        let mut bits = F::zero();
        for (triple, mass) in state.connectivity() {
            let capacity = state.capacity(&triple);
            if mass > capacity {
                return Err(Error::Inconsistent(format!(
                    "community triple {triple:?} holds {mass} hyperedges but only {capacity} node triples"
                )));
            }
            bits = bits + log2_binomial_unchecked::<F>(capacity, mass);
        }
        state.l_recover = bits;
        state.l_index = state.index_for(state.active);
        Ok(state)
    }

    /// State for the all-singleton partition.
    pub fn singletons(graph: &'g TripartiteHypergraph) -> Result<Self> {
        Self::new(graph, &Partition::singletons(graph.node_counts()))
    }

    pub fn graph(&self) -> &'g TripartiteHypergraph {
        self.graph
    }

    #[inline]
    pub fn q(&self) -> F {
        self.l_index + self.l_recover
    }

    pub fn quality(&self) -> Quality<F> {
        Quality::new(self.l_index, self.l_recover)
    }

    #[inline]
    pub fn label(&self, color: Color, node: usize) -> u32 {
        self.labels[color.index()][node]
    }

    /// Number of nonempty communities of a color.
    #[inline]
    pub fn community_count(&self, color: Color) -> usize {
        self.active[color.index()]
    }

    /// Size-weighted population of a community; 0 for a recycled id.
    pub fn community_size(&self, color: Color, label: u32) -> u64 {
        self.comm_size[color.index()]
            .get(label as usize)
            .copied()
            .unwrap_or(0)
    }

    /// Nonzero connectivity entries as `(triple, mass)`, in no particular order.
    pub fn connectivity(&self) -> impl Iterator<Item = ([u32; 3], u64)> + '_ {
        self.slices[0].iter().enumerate().flat_map(|(a, slice)| {
            slice
                .iter()
                .map(move |(&key, &m)| (triple_from(Color::Red, a as u32, key), m))
        })
    }

    pub fn connectivity_entry(&self, triple: [u32; 3]) -> u64 {
        self.slices[0]
            .get(triple[0] as usize)
            .and_then(|s| s.get(&pair_key(Color::Red, &triple)))
            .copied()
            .unwrap_or(0)
    }

    pub fn connectivity_len(&self) -> usize {
        self.slices[0].iter().map(|s| s.len()).sum()
    }

    /// The current grouping, relabeled by first appearance.
    pub fn partition(&self) -> Partition {
        Partition::from_raw([&self.labels[0], &self.labels[1], &self.labels[2]])
    }

    /// Renumbers communities contiguously and rebuilds the caches, which also
    /// discards accumulated rounding in the cached recovery length.
    pub fn compact(&mut self) {
        let p = self.partition();
        *self = Self::new(self.graph, &p).expect("state partition is valid for its graph");
    }

    /// Recovery length summed afresh over the cached tensor.
    pub fn recompute_recover(&self) -> F {
        self.connectivity()
            .map(|(t, m)| log2_binomial_unchecked::<F>(self.capacity(&t), m))
            .fold(F::zero(), |a, b| a + b)
    }

    /// Checks the internal views against each other and against `m`.
    pub fn check_consistency(&self) -> Result<()> {
        let mut totals = [0u64; 3];
        for color in Color::ALL {
            for (a, slice) in self.slices[color.index()].iter().enumerate() {
                for (key, &m) in slice {
                    let t = triple_from(color, a as u32, *key);
                    if m == 0 || m > self.capacity(&t) {
                        return Err(Error::Inconsistent(format!("bad mass {m} at {t:?}")));
                    }
                    let listed = self.fibers[color.index()]
                        .get(key)
                        .is_some_and(|f| f.contains(&(a as u32)));
                    if !listed {
                        return Err(Error::Inconsistent(format!("{t:?} missing from index")));
                    }
                    totals[color.index()] += m;
                }
            }
            for (a, slice) in self.slices[color.index()].iter().enumerate() {
                let units = slice.values().filter(|&&m| m == 1).count() as u64;
                let heavy = slice.iter().filter(|(_, &m)| m >= 2).count();
                let listed = &self.heavy_pairs[color.index()][a];
                if units != self.unit_pairs[color.index()][a]
                    || heavy != listed.len()
                    || listed.iter().any(|k| slice.get(k).is_none_or(|&m| m < 2))
                {
                    return Err(Error::Inconsistent(format!(
                        "{color} community {a}: pair classes drifted"
                    )));
                }
            }
            let nonempty = self.comm_size[color.index()]
                .iter()
                .filter(|&&s| s > 0)
                .count();
            if nonempty != self.active[color.index()] {
                return Err(Error::Inconsistent(format!(
                    "{color} community count drifted"
                )));
            }
        }
        if totals.iter().any(|&t| t != self.graph.total_weight()) {
            return Err(Error::Inconsistent(format!(
                "tensor mass {totals:?} differs from m = {}",
                self.graph.total_weight()
            )));
        }
        Ok(())
    }

    /// `Q(after) - Q(before)` for relabeling one node; the state is unchanged.
    pub fn delta_q_move(&self, color: Color, node: usize, target: Target) -> Result<F> {
        self.check_move(color, node, target)?;
        if target == Target::Existing(self.label(color, node)) {
            return Ok(F::zero());
        }
        let ctx = self.move_context(color, node);
        Ok(self.evaluate(&ctx, target))
    }

    /// Relabels one node and returns the change of `Q`.
    pub fn apply_move(&mut self, color: Color, node: usize, target: Target) -> Result<F> {
        self.check_move(color, node, target)?;
        if target == Target::Existing(self.label(color, node)) {
            return Ok(F::zero());
        }
        let ctx = self.move_context(color, node);
        Ok(self.commit(&ctx, target))
    }

    fn check_move(&self, color: Color, node: usize, target: Target) -> Result<()> {
        if node >= self.graph.node_count(color) {
            return Err(Error::Domain(format!(
                "{color} node {node} out of range ({} nodes)",
                self.graph.node_count(color)
            )));
        }
        if let Target::Existing(t) = target {
            if self.community_size(color, t) == 0 {
                return Err(Error::UnknownLabel {
                    color: color.name(),
                    label: t,
                });
            }
        }
        Ok(())
    }

    #[inline]
    fn capacity(&self, triple: &[u32; 3]) -> u64 {
        self.comm_size[0][triple[0] as usize]
            * self.comm_size[1][triple[1] as usize]
            * self.comm_size[2][triple[2] as usize]
    }

    #[inline]
    fn pair_capacity(&self, color: Color, key: &PairKey) -> u64 {
        let [a, b] = color.others();
        self.comm_size[a.index()][key.0 as usize] * self.comm_size[b.index()][key.1 as usize]
    }

    fn index_for(&self, counts: [usize; 3]) -> F {
        index_length(
            self.graph.size_totals(),
            counts.map(|c| c as u64),
            self.graph.total_weight(),
        )
    }

    /// Incident weight of a node per other-color community pair.
    pub(crate) fn profile(&self, color: Color, node: usize) -> Vec<(PairKey, u64)> {
        let [a, b] = color.others();
        let mut profile: Vec<(PairKey, u64)> = self
            .graph
            .incident(color, node)
            .iter()
            .map(|&idx| {
                let e = self.graph.edge(idx);
                (
                    (
                        self.labels[a.index()][e.end(a) as usize],
                        self.labels[b.index()][e.end(b) as usize],
                    ),
                    e.weight,
                )
            })
            .collect();
        profile.sort_unstable_by_key(|&(k, _)| k);
        profile.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        profile
    }

    pub(crate) fn move_context(&self, color: Color, node: usize) -> MoveContext<F> {
        let source = self.label(color, node);
        let size = self.graph.node_size(color, node);
        let profile = self.profile(color, node);
        let c = color.index();
        let old_size = self.comm_size[c][source as usize];
        let new_size = old_size - size;
        let slice = &self.slices[c][source as usize];
        let mut source_recover = F::zero();
        let mut untouched_units = self.unit_pairs[c][source as usize];
        for (key, w) in &profile {
            let pair_cap = self.pair_capacity(color, key);
            let mass = slice[key];
            if mass == 1 {
                untouched_units -= 1;
            }
            let old_cap = old_size * pair_cap;
            source_recover = source_recover
                + log2_binomial_resize::<F>(old_cap, new_size * pair_cap, mass - w)
                - log2_binomial_step::<F>(old_cap, mass - w, *w);
        }
        if new_size > 0 {
            source_recover = source_recover + self.unit_shift(untouched_units, old_size, new_size);
            for key in &self.heavy_pairs[c][source as usize] {
                if profile_weight(&profile, key) > 0 {
                    continue;
                }
                let pair_cap = self.pair_capacity(color, key);
                source_recover = source_recover
                    + log2_binomial_resize::<F>(
                        old_size * pair_cap,
                        new_size * pair_cap,
                        slice[key],
                    );
            }
        }
        MoveContext {
            color,
            node,
            source,
            size,
            profile,
            source_recover,
            source_empties: new_size == 0,
        }
    }

    /// Scores every existing community a node may move to, leaving
    /// `(label, delta Q)` pairs in `work.scored` by ascending label.
    ///
    /// Candidates are the communities sharing an other-color pair with the
    /// node or, with `all_live`, every nonempty community. Overlap terms are
    /// gathered by walking the node's pairs through the pair index, so the
    /// cost follows the overlap rather than candidates times pairs.
    pub(crate) fn score_existing(
        &self,
        ctx: &MoveContext<F>,
        all_live: bool,
        work: &mut CandidateScratch<F>,
    ) {
        let color = ctx.color;
        let c = color.index();
        let sizes = &self.comm_size[c];
        if work.overlap.len() < sizes.len() {
            work.overlap.resize(sizes.len(), None);
        }
        work.labels.clear();
        for &(key, w) in &ctx.profile {
            let Some(list) = self.fibers[c].get(&key) else {
                continue;
            };
            let pair_cap = self.pair_capacity(color, &key);
            for &t in list {
                if t == ctx.source {
                    continue;
                }
                let cap = (sizes[t as usize] + ctx.size) * pair_cap;
                let mass = self.slices[c][t as usize][&key];
                let term = log2_binomial_overlap::<F>(cap, mass, w);
                let slot = &mut work.overlap[t as usize];
                match slot {
                    Some(acc) => *acc = *acc + term,
                    None => {
                        *slot = Some(term);
                        work.labels.push(t);
                    }
                }
            }
        }
        if all_live {
            work.labels.clear();
            work.labels.extend(
                (0..sizes.len() as u32).filter(|&t| sizes[t as usize] > 0 && t != ctx.source),
            );
        } else {
            work.labels.sort_unstable();
        }
        work.groups.clear();
        work.groups.extend(
            ctx.profile
                .iter()
                .map(|(key, w)| ((self.pair_capacity(color, key), *w), 1u64)),
        );
        work.groups.sort_unstable();
        work.groups.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        work.disjoint.clear();
        work.scored.clear();
        for &t in &work.labels {
            let new_size = sizes[t as usize] + ctx.size;
            // recovery bits if none of the node's pairs were present in `t`
            let disjoint = match work.disjoint.iter().find(|(s, _)| *s == new_size) {
                Some(&(_, bits)) => bits,
                None => {
                    let bits = work
                        .groups
                        .iter()
                        .fold(F::zero(), |acc, &((pair_cap, w), n)| {
                            acc + F::count(n) * log2_binomial_unchecked::<F>(new_size * pair_cap, w)
                        });
                    work.disjoint.push((new_size, bits));
                    bits
                }
            };
            let overlap = work.overlap[t as usize].take().unwrap_or_else(F::zero);
            let target = Target::Existing(t);
            let delta = ctx.source_recover
                + self.size_shift(color, t, ctx.size)
                + disjoint
                + overlap
                + self.index_delta(ctx, target);
            work.scored.push((t, delta));
        }
    }

    fn target_recover(&self, ctx: &MoveContext<F>, target: Target) -> F {
        let color = ctx.color;
        let mut bits = F::zero();
        match target {
            Target::Fresh => {
                for (key, w) in &ctx.profile {
                    bits = bits
                        + log2_binomial_unchecked::<F>(
                            ctx.size * self.pair_capacity(color, key),
                            *w,
                        );
                }
            }
            Target::Existing(t) => {
                let new_size = self.comm_size[color.index()][t as usize] + ctx.size;
                let slice = &self.slices[color.index()][t as usize];
                bits = self.size_shift(color, t, ctx.size);
                for &(key, w) in &ctx.profile {
                    let cap = new_size * self.pair_capacity(color, &key);
                    bits = bits
                        + match slice.get(&key) {
                            Some(&mass) => log2_binomial_step::<F>(cap, mass, w),
                            None => log2_binomial_unchecked::<F>(cap, w),
                        };
                }
            }
        }
        bits
    }

    /// Change of the recovery length of community `t` when it grows by `grow`
    /// with its masses unchanged.
    fn size_shift(&self, color: Color, t: u32, grow: u64) -> F {
        let slot = &self.shift[color.index()][t as usize];
        if let Some((g, value)) = slot.get() {
            if g == grow {
                return value;
            }
        }
        let c = color.index();
        let old_size = self.comm_size[c][t as usize];
        let new_size = old_size + grow;
        let mut bits = self.unit_shift(self.unit_pairs[c][t as usize], old_size, new_size);
        let slice = &self.slices[c][t as usize];
        for key in &self.heavy_pairs[c][t as usize] {
            let pair_cap = self.pair_capacity(color, key);
            bits = bits
                + log2_binomial_resize::<F>(old_size * pair_cap, new_size * pair_cap, slice[key]);
        }
        slot.set(Some((grow, bits)));
        bits
    }

    /// Resizing a community from `old_size` to `new_size` changes the bits of
    /// each pair holding a single hyperedge by `log2(new_size / old_size)`.
    #[inline]
    fn unit_shift(&self, pairs: u64, old_size: u64, new_size: u64) -> F {
        if pairs == 0 {
            return F::zero();
        }
        F::count(pairs) * (F::count(new_size) / F::count(old_size)).log2()
    }

    /// Drops memoized shifts that a move of `ctx.node` from `ctx.source` to
    /// `t` made stale: both communities, and every other-color community
    /// sharing a triple with either.
    fn invalidate_shifts(&self, ctx: &MoveContext<F>, t: u32) {
        let c = ctx.color.index();
        let [a, b] = ctx.color.others();
        for label in [ctx.source, t] {
            self.shift[c][label as usize].set(None);
            for key in self.slices[c][label as usize].keys() {
                self.shift[a.index()][key.0 as usize].set(None);
                self.shift[b.index()][key.1 as usize].set(None);
            }
        }
    }

    fn index_delta(&self, ctx: &MoveContext<F>, target: Target) -> F {
        let mut counts = self.active;
        let c = ctx.color.index();
        if ctx.source_empties {
            counts[c] -= 1;
        }
        if target == Target::Fresh {
            counts[c] += 1;
        }
        if counts == self.active {
            F::zero()
        } else {
            self.index_for(counts) - self.l_index
        }
    }

    /// Change of `Q` for moving `ctx.node` to a target other than its own
    /// community.
    pub(crate) fn evaluate(&self, ctx: &MoveContext<F>, target: Target) -> F {
        ctx.source_recover + self.target_recover(ctx, target) + self.index_delta(ctx, target)
    }

    /// Moves a node to a target other than its own community.
    pub(crate) fn commit(&mut self, ctx: &MoveContext<F>, target: Target) -> F {
        let before = self.q();
        let recover = ctx.source_recover + self.target_recover(ctx, target);
        let color = ctx.color;
        let c = color.index();
        let t = match target {
            Target::Existing(t) => t,
            Target::Fresh => {
                self.active[c] += 1;
                match self.free[c].pop() {
                    Some(id) => id,
                    None => {
                        self.comm_size[c].push(0);
                        self.slices[c].push(PairMap::default());
                        self.unit_pairs[c].push(0);
                        self.heavy_pairs[c].push(FxHashSet::default());
                        self.shift[c].push(Default::default());
                        (self.comm_size[c].len() - 1) as u32
                    }
                }
            }
        };
        let s = ctx.source;
        for &(key, w) in &ctx.profile {
            self.remove_mass(triple_from(color, s, key), w);
            self.add_mass(triple_from(color, t, key), w);
        }
        self.comm_size[c][s as usize] -= ctx.size;
        self.comm_size[c][t as usize] += ctx.size;
        self.labels[c][ctx.node] = t;
        self.invalidate_shifts(ctx, t);
        if ctx.source_empties {
            self.active[c] -= 1;
            self.free[c].push(s);
        }
        self.l_recover = self.l_recover + recover;
        self.l_index = self.index_for(self.active);
        self.q() - before
    }

    fn add_mass(&mut self, triple: [u32; 3], w: u64) {
        for color in Color::ALL {
            let c = color.index();
            let key = pair_key(color, &triple);
            let own = triple[c];
            let entry = self.slices[c][own as usize].entry(key).or_insert(0);
            let old = *entry;
            if old == 0 {
                self.fibers[c].entry(key).or_default().push(own);
            }
            *entry += w;
            let new = *entry;
            self.reclassify(c, own, key, old, new);
        }
    }

    fn remove_mass(&mut self, triple: [u32; 3], w: u64) {
        for color in Color::ALL {
            let c = color.index();
            let key = pair_key(color, &triple);
            let own = triple[c];
            let slice = &mut self.slices[c][own as usize];
            let entry = slice.get_mut(&key).expect("mass present for moved node");
            let old = *entry;
            *entry -= w;
            let new = *entry;
            if new == 0 {
                slice.remove(&key);
                let list = self.fibers[c].get_mut(&key).expect("indexed pair");
                let pos = list
                    .iter()
                    .position(|&x| x == own)
                    .expect("indexed community");
                list.swap_remove(pos);
                if list.is_empty() {
                    self.fibers[c].remove(&key);
                }
            }
            self.reclassify(c, own, key, old, new);
        }
    }

    /// Keeps the unit and heavy pair bookkeeping in step with a mass change.
    fn reclassify(&mut self, c: usize, own: u32, key: PairKey, old: u64, new: u64) {
        let own = own as usize;
        match old {
            0 => {}
            1 => self.unit_pairs[c][own] -= 1,
            _ if new < 2 => {
                self.heavy_pairs[c][own].remove(&key);
            }
            _ => return,
        }
        match new {
            0 => {}
            1 => self.unit_pairs[c][own] += 1,
            _ => {
                self.heavy_pairs[c][own].insert(key);
            }
        }
    }
}
