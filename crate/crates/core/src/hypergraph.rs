//! Immutable tripartite hypergraph and its edge-list text format.
//!
//! The connectivity array is stored sparsely: only triples with nonzero
//! weight are kept, sorted lexicographically and free of duplicates. Node
//! sizes and edge weights are 1 for hypergraphs read from data; coarsening
//! produces hypergraphs whose nodes stand for whole communities, carrying the
//! summed member sizes and the aggregated edge mass.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One of the three node sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Color {
        Color::ALL[i]
    }

    /// The two other colors, in index order.
    #[inline]
    pub fn others(self) -> [Color; 2] {
        match self {
            Color::Red => [Color::Green, Color::Blue],
            Color::Green => [Color::Red, Color::Blue],
            Color::Blue => [Color::Red, Color::Green],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A weighted hyperedge `(red, green, blue)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperedge {
    pub ends: [u32; 3],
    pub weight: u64,
}

impl Hyperedge {
    #[inline]
    pub fn end(&self, color: Color) -> u32 {
        self.ends[color.index()]
    }
}

/// Per-color incidence lists in compressed form.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Incidence {
    offsets: Vec<usize>,
    edges: Vec<u32>,
}

impl Incidence {
    fn build(n: usize, edges: &[Hyperedge], color: Color) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for e in edges {
            offsets[e.end(color) as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut list = vec![0u32; edges.len()];
        for (idx, e) in edges.iter().enumerate() {
            let v = e.end(color) as usize;
            list[cursor[v]] = idx as u32;
            cursor[v] += 1;
        }
        Incidence {
            offsets,
            edges: list,
        }
    }

    #[inline]
    fn of(&self, node: usize) -> &[u32] {
        &self.edges[self.offsets[node]..self.offsets[node + 1]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripartiteHypergraph {
    counts: [usize; 3],
    node_sizes: [Vec<u64>; 3],
    size_totals: [u64; 3],
    edges: Vec<Hyperedge>,
    total_weight: u64,
    incidence: [Incidence; 3],
}

impl TripartiteHypergraph {
    /// Builds a hypergraph with unit node sizes. Duplicate triples are merged by
    /// summing their weights.
    pub fn new<I>(counts: [usize; 3], edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([u32; 3], u64)>,
    {
        let sizes = counts.map(|n| vec![1u64; n]);
        Self::with_node_sizes(sizes, edges)
    }

    /// Builds a hypergraph from explicit node sizes (one vector per color).
    pub fn with_node_sizes<I>(node_sizes: [Vec<u64>; 3], edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([u32; 3], u64)>,
    {
        let counts = [
            node_sizes[0].len(),
            node_sizes[1].len(),
            node_sizes[2].len(),
        ];
        for color in Color::ALL {
            if node_sizes[color.index()].contains(&0) {
                return Err(Error::Domain(format!("{color} node size must be positive")));
            }
        }
        if counts.iter().any(|&n| n > u32::MAX as usize) {
            return Err(Error::Domain("node count exceeds u32 range".into()));
        }
        let size_totals = [0, 1, 2].map(|c| node_sizes[c].iter().sum::<u64>());
        // capacities n_a * n_b * n_g must fit in u64 for every community triple
        size_totals
            .iter()
            .try_fold(1u64, |acc, &s| acc.checked_mul(s.max(1)))
            .ok_or_else(|| Error::Domain("product of node-set sizes overflows u64".into()))?;

        let mut list: Vec<Hyperedge> = Vec::new();
        for (ends, weight) in edges {
            if weight == 0 {
                return Err(Error::Domain("hyperedge weight must be positive".into()));
            }
            for color in Color::ALL {
                if ends[color.index()] as usize >= counts[color.index()] {
                    return Err(Error::Domain(format!("{color} index out of range")));
                }
            }
            list.push(Hyperedge { ends, weight });
        }
        list.sort_unstable();
        let mut merged: Vec<Hyperedge> = Vec::with_capacity(list.len());
        for e in list {
            match merged.last_mut() {
                Some(last) if last.ends == e.ends => last.weight += e.weight,
                _ => merged.push(e),
            }
        }
        let total_weight = merged.iter().map(|e| e.weight).sum();
        let incidence = Color::ALL.map(|c| Incidence::build(counts[c.index()], &merged, c));
        Ok(TripartiteHypergraph {
            counts,
            node_sizes,
            size_totals,
            edges: merged,
            total_weight,
            incidence,
        })
    }

    #[inline]
    pub fn node_count(&self, color: Color) -> usize {
        self.counts[color.index()]
    }

    pub fn node_counts(&self) -> [usize; 3] {
        self.counts
    }

    #[inline]
    pub fn node_size(&self, color: Color, node: usize) -> u64 {
        self.node_sizes[color.index()][node]
    }

    pub fn node_sizes(&self, color: Color) -> &[u64] {
        &self.node_sizes[color.index()]
    }

    /// Sum of node sizes of a color: the number of original nodes it stands for.
    #[inline]
    pub fn size_total(&self, color: Color) -> u64 {
        self.size_totals[color.index()]
    }

    pub fn size_totals(&self) -> [u64; 3] {
        self.size_totals
    }

    /// Hyperedges sorted by `(red, green, blue)`.
    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, idx: u32) -> &Hyperedge {
        &self.edges[idx as usize]
    }

    /// Total edge weight `m`.
    #[inline]
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// Indices of the hyperedges incident to a node.
    #[inline]
    pub fn incident(&self, color: Color, node: usize) -> &[u32] {
        self.incidence[color.index()].of(node)
    }

    #[inline]
    pub fn degree(&self, color: Color, node: usize) -> usize {
        self.incident(color, node).len()
    }

    /// True when every weight and every node size is 1, as for data read from a
    /// plain hyperedge list without duplicates.
    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1)
            && self.node_sizes.iter().flatten().all(|&s| s == 1)
    }

    /// Reads the hyperedge-list format.
    ///
    /// Lines starting with `#` and blank lines are skipped. The first data line
    /// holds the three node counts, every further line `i j k` or `i j k w`.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut counts: Option<[usize; 3]> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            match counts {
                None => {
                    if fields.len() != 3 {
                        return Err(parse_err(format!(
                            "header must hold 3 node counts, found {} fields",
                            fields.len()
                        )));
                    }
                    let mut c = [0usize; 3];
                    for (slot, f) in c.iter_mut().zip(&fields) {
                        *slot = f
                            .parse()
                            .map_err(|_| parse_err(format!("invalid node count {f:?}")))?;
                    }
                    counts = Some(c);
                }
                Some(c) => {
                    if fields.len() != 3 && fields.len() != 4 {
                        return Err(parse_err(format!(
                            "expected \"i j k\" or \"i j k w\", found {} fields",
                            fields.len()
                        )));
                    }
                    let mut ends = [0u32; 3];
                    for color in Color::ALL {
                        let f = fields[color.index()];
                        let v: u64 = f
                            .parse()
                            .map_err(|_| parse_err(format!("invalid {color} index {f:?}")))?;
                        if v >= c[color.index()] as u64 {
                            return Err(parse_err(format!("{color} index out of range")));
                        }
                        ends[color.index()] = v as u32;
                    }
                    let weight = match fields.get(3) {
                        Some(f) => {
                            let w: i128 = f
                                .parse()
                                .map_err(|_| parse_err(format!("invalid weight {f:?}")))?;
                            if w <= 0 || w > u64::MAX as i128 {
                                return Err(parse_err(format!("weight must be positive, got {w}")));
                            }
                            w as u64
                        }
                        None => 1,
                    };
                    edges.push((ends, weight));
                }
            }
        }
        let counts = counts.ok_or(Error::Parse {
            line: 0,
            message: "missing header line with node counts".into(),
        })?;
        Self::new(counts, edges)
    }

    /// Writes the hyperedge-list format. Node sizes are not representable and
    /// are dropped.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# red green blue")?;
        writeln!(
            out,
            "{} {} {}",
            self.counts[0], self.counts[1], self.counts[2]
        )?;
        for e in &self.edges {
            let [i, j, k] = e.ends;
            if e.weight == 1 {
                writeln!(out, "{i} {j} {k}")?;
            } else {
                writeln!(out, "{i} {j} {k} {}", e.weight)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}
