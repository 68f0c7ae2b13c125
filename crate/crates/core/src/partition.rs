//! Per-color community assignments and their JSON file format.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Color, TripartiteHypergraph};

/// Renumbers labels to `0..c` in order of first appearance.
pub fn canonicalize(labels: &[u32]) -> Vec<u32> {
    let mut map = rustc_hash::FxHashMap::default();
    labels
        .iter()
        .map(|&l| {
            let next = map.len() as u32;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn contiguous_count(labels: &[u32], color: Color) -> Result<usize> {
    let Some(&max) = labels.iter().max() else {
        return Ok(0);
    };
    let mut seen = vec![false; max as usize + 1];
    for &l in labels {
        seen[l as usize] = true;
    }
    match seen.iter().position(|&s| !s) {
        Some(missing) => Err(Error::NotContiguous {
            color: color.name(),
            missing: missing as u32,
        }),
        None => Ok(seen.len()),
    }
}

/// Community labels for the red, green and blue nodes.
///
/// Labels of each color are contiguous: every value in `0..count` is used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: [Vec<u32>; 3],
    counts: [usize; 3],
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    red: Vec<u32>,
    green: Vec<u32>,
    blue: Vec<u32>,
}

impl Partition {
    pub fn new(red: Vec<u32>, green: Vec<u32>, blue: Vec<u32>) -> Result<Self> {
        Self::from_labels([red, green, blue])
    }

    pub fn from_labels(labels: [Vec<u32>; 3]) -> Result<Self> {
        let mut counts = [0usize; 3];
        for color in Color::ALL {
            counts[color.index()] = contiguous_count(&labels[color.index()], color)?;
        }
        Ok(Partition { labels, counts })
    }

    /// Relabels arbitrary integer labels by first appearance.
    pub fn from_raw(labels: [&[u32]; 3]) -> Self {
        let labels = labels.map(canonicalize);
        let counts = [0, 1, 2].map(|c| labels[c].iter().max().map_or(0, |&m| m as usize + 1));
        Partition { labels, counts }
    }

    /// Every node in its own community.
    pub fn singletons(counts: [usize; 3]) -> Self {
        Partition {
            labels: counts.map(|n| (0..n as u32).collect()),
            counts,
        }
    }

    /// One community per (nonempty) color.
    pub fn all_one(counts: [usize; 3]) -> Self {
        Partition {
            labels: counts.map(|n| vec![0; n]),
            counts: counts.map(|n| n.min(1)),
        }
    }

    #[inline]
    pub fn labels(&self, color: Color) -> &[u32] {
        &self.labels[color.index()]
    }

    pub fn all_labels(&self) -> &[Vec<u32>; 3] {
        &self.labels
    }

    #[inline]
    pub fn community_count(&self, color: Color) -> usize {
        self.counts[color.index()]
    }

    pub fn community_counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn node_counts(&self) -> [usize; 3] {
        [0, 1, 2].map(|c| self.labels[c].len())
    }

    /// Same labels renumbered by first appearance per color.
    pub fn canonical(&self) -> Partition {
        Partition {
            labels: [0, 1, 2].map(|c| canonicalize(&self.labels[c])),
            counts: self.counts,
        }
    }

    /// Checks that the label vectors match the hypergraph's node counts.
    pub fn check_against(&self, graph: &TripartiteHypergraph) -> Result<()> {
        for color in Color::ALL {
            let expected = graph.node_count(color);
            let actual = self.labels(color).len();
            if expected != actual {
                return Err(Error::LengthMismatch {
                    what: format!("{color} labels"),
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let file: PartitionFile = serde_json::from_reader(reader)?;
        Self::new(file.red, file.green, file.blue)
    }

    /// Reads a partition and checks it against a hypergraph.
    pub fn read_for<R: Read>(reader: R, graph: &TripartiteHypergraph) -> Result<Self> {
        let p = Self::read(reader)?;
        p.check_against(graph)?;
        Ok(p)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let [red, green, blue] = self.labels.clone();
        serde_json::to_writer(&mut out, &PartitionFile { red, green, blue })?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(&[5, 5, 2, 7]), vec![0, 0, 1, 2]);
        assert_eq!(canonicalize(&[0, 1, 2]), vec![0, 1, 2]);
        assert_eq!(canonicalize(&[3, 3, 3]), vec![0, 0, 0]);
        assert!(canonicalize(&[]).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let p = Partition::new(vec![0, 0], vec![0, 1], vec![0, 1]).unwrap();
        let text = p.to_json();
        assert_eq!(text, "{\"red\":[0,0],\"green\":[0,1],\"blue\":[0,1]}\n");
        assert_eq!(Partition::read(text.as_bytes()).unwrap(), p);
    }

    #[test]
    fn gap_in_labels_rejected() {
        let err =
            Partition::read(r#"{"red":[0,2],"green":[0],"blue":[0]}"#.as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            Error::NotContiguous {
                color: "red",
                missing: 1
            }
        ));
        assert!(err.to_string().contains("labels not contiguous"));
    }

    #[test]
    fn singleton_layout() {
        let p = Partition::singletons([2, 2, 2]);
        assert_eq!(
            p.to_json(),
            "{\"red\":[0,1],\"green\":[0,1],\"blue\":[0,1]}\n"
        );
        assert_eq!(p.community_counts(), [2, 2, 2]);
        assert_eq!(Partition::all_one([2, 3, 1]).community_counts(), [1, 1, 1]);
    }

    #[test]
    fn length_checked_against_graph() {
        let g = TripartiteHypergraph::new([2, 2, 2], [([0, 0, 0], 1)]).unwrap();
        let text = r#"{"red":[0,0,0],"green":[0,1],"blue":[0,1]}"#;
        assert!(matches!(
            Partition::read_for(text.as_bytes(), &g),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 3,
                ..
            })
        ));
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent_and_grouping_preserving(raw in prop::collection::vec(0u32..6, 0..30)) {
            let once = canonicalize(&raw);
            prop_assert_eq!(canonicalize(&once), once.clone());
            for a in 0..raw.len() {
                for b in 0..raw.len() {
                    prop_assert_eq!(raw[a] == raw[b], once[a] == once[b]);
                }
            }
        }

        #[test]
        fn file_round_trip(r in prop::collection::vec(0u32..4, 1..12),
                           g in prop::collection::vec(0u32..4, 1..12),
                           b in prop::collection::vec(0u32..4, 1..12)) {
            let p = Partition::from_raw([&r, &g, &b]);
            prop_assert_eq!(Partition::read(p.to_json().as_bytes()).unwrap(), p);
        }
    }
}
