//! Retweet-mention network of a hashtag and its structural features.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

/// Directed user graph built from retweets (source author -> retweeter) and
/// mentions (author -> mentioned user). Parallel edges collapse and
/// self-loops are dropped; vertices are the users touched by some edge.
///
/// Storage is hashed; everything exposed is sorted or order-independent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "EdgeList", into = "EdgeList")]
pub struct RetweetMentionNetwork {
    /// Source -> targets.
    out: HashMap<String, HashSet<String>>,
    edge_count: usize,
    /// Total degree per vertex, kept in step with `out`.
    degree: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct EdgeList {
    edges: BTreeSet<(String, String)>,
}

impl From<EdgeList> for RetweetMentionNetwork {
    fn from(l: EdgeList) -> Self {
        let mut g = RetweetMentionNetwork::new();
        for (a, b) in &l.edges {
            g.add_edge(a, b);
        }
        g
    }
}

impl From<RetweetMentionNetwork> for EdgeList {
    fn from(g: RetweetMentionNetwork) -> Self {
        EdgeList {
            edges: g.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

impl RetweetMentionNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `src -> dst`. Returns false for self-loops and duplicates.
    pub fn add_edge(&mut self, src: &str, dst: &str) -> bool {
        if src == dst {
            return false;
        }
        match self.out.get_mut(src) {
            Some(targets) if targets.contains(dst) => return false,
            Some(targets) => {
                targets.insert(dst.to_string());
            }
            None => {
                self.out.insert(src.to_string(), HashSet::from([dst.to_string()]));
            }
        }
        self.edge_count += 1;
        for v in [src, dst] {
            match self.degree.get_mut(v) {
                Some(d) => *d += 1,
                None => {
                    self.degree.insert(v.to_string(), 1);
                }
            }
        }
        true
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> BTreeSet<&str> {
        self.degree.keys().map(String::as_str).collect()
    }

    pub fn order(&self) -> usize {
        self.degree.len()
    }

    /// Edges in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        let mut all: Vec<(&str, &str)> = self
            .out
            .iter()
            .flat_map(|(a, targets)| targets.iter().map(move |b| (a.as_str(), b.as_str())))
            .collect();
        all.sort_unstable();
        all.into_iter()
    }

    /// Total (in + out) degree per vertex.
    pub fn degrees(&self) -> BTreeMap<&str, usize> {
        self.degree.iter().map(|(v, &d)| (v.as_str(), d)).collect()
    }

    /// Vertex count per total degree.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut histogram = BTreeMap::new();
        for &d in self.degree.values() {
            *histogram.entry(d).or_insert(0) += 1;
        }
        histogram
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkFeatures {
    pub order: f64,
    pub density: f64,
    pub average_degree: f64,
    pub degree_entropy: f64,
}

impl NetworkFeatures {
    pub fn to_array(self) -> [f64; 4] {
        [self.order, self.density, self.average_degree, self.degree_entropy]
    }
}

/// Order, density `|E| / (|V|(|V|-1))`, average degree `2|E| / |V|` and the
/// natural-log entropy of the total-degree distribution. Graphs with at most
/// one vertex report zeros for the last three.
pub fn network_features(graph: &RetweetMentionNetwork) -> NetworkFeatures {
    network_features_from_degrees(graph.edge_count(), &graph.degree_histogram())
}

/// Same as [`network_features`] from the edge count and the degree
/// histogram (degree -> number of vertices).
pub fn network_features_from_degrees(edges: usize, histogram: &BTreeMap<usize, usize>) -> NetworkFeatures {
    let v: usize = histogram.values().sum();
    if v <= 1 {
        return NetworkFeatures {
            order: v as f64,
            density: 0.0,
            average_degree: 0.0,
            degree_entropy: 0.0,
        };
    }
    let n = v as f64;
    let entropy = histogram
        .values()
        .map(|&count| {
            let p = count as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>();
    NetworkFeatures {
        order: n,
        density: edges as f64 / (n * (n - 1.0)),
        average_degree: 2.0 * edges as f64 / n,
        degree_entropy: entropy.max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str)]) -> RetweetMentionNetwork {
        let mut g = RetweetMentionNetwork::new();
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    #[test]
    fn complete_digraph_has_unit_density() {
        let g = graph(&[("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"), ("b", "c"), ("c", "b")]);
        let f = network_features(&g);
        assert_eq!(f.order, 3.0);
        assert_eq!(f.density, 1.0);
        // every vertex has degree 4
        assert_eq!(f.degree_entropy, 0.0);
    }

    #[test]
    fn average_degree_of_a_cycle() {
        let g = graph(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        assert_eq!(network_features(&g).average_degree, 2.0);
    }

    #[test]
    fn star_entropy() {
        // hub degree 3, leaves degree 1 -> p = (1/4, 3/4)
        let g = graph(&[("h", "a"), ("h", "b"), ("h", "c")]);
        let expected = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((network_features(&g).degree_entropy - expected).abs() < 1e-15);
    }

    #[test]
    fn self_loops_and_duplicates_dropped() {
        let mut g = RetweetMentionNetwork::new();
        assert!(!g.add_edge("a", "a"));
        assert!(g.add_edge("a", "b"));
        assert!(!g.add_edge("a", "b"));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn degenerate_graphs() {
        let f = network_features(&RetweetMentionNetwork::new());
        assert_eq!(f.to_array(), [0.0; 4]);
    }
}
