//! Burst information networks.
//!
//! Nodes are burst elements, one per (word, burst period). Two elements are
//! linked when their words appear together in a document dated inside both
//! burst periods; the edge weight is the number of such documents.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::burst::BurstPeriod;
use crate::corpus::Stream;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BurstElement {
    pub word: String,
    pub period: BurstPeriod,
}

impl BurstElement {
    pub fn new(word: impl Into<String>, start: usize, end: usize) -> Self {
        BurstElement {
            word: word.into(),
            period: BurstPeriod::new(start, end),
        }
    }
}

impl fmt::Display for BurstElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.word, self.period)
    }
}

/// Dense node index into a [`BINet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Which endpoint's total edge weight normalizes an edge in the neighbor
/// clue.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NeighborNorm {
    /// `w(c,c') / sum_{c'' in N(c)} w(c,c'')`; a distribution over `N(c)`.
    #[default]
    Source,
    /// `w(c,c') / sum_{c'' in N(c')} w(c',c'')`.
    Neighbor,
}

impl FromStr for NeighborNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "source" => Ok(NeighborNorm::Source),
            "neighbor" => Ok(NeighborNorm::Neighbor),
            other => Err(Error::InvalidParameter(format!(
                "neighbor_norm must be source or neighbor, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for NeighborNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborNorm::Source => "source",
            NeighborNorm::Neighbor => "neighbor",
        })
    }
}

/// Weighted undirected graph over burst elements.
///
/// Node ids follow the (word, period start) order of the elements, so two
/// networks built from the same input have identical ids.
#[derive(Clone, Debug, PartialEq)]
pub struct BINet {
    nodes: Vec<BurstElement>,
    /// Sorted by descending weight, then neighbor word, then period start.
    adjacency: Vec<Vec<(NodeId, u32)>>,
    strength: Vec<u64>,
    num_edges: usize,
}

impl BINet {
    /// Build the network of `stream` for the given burst periods.
    ///
    /// Documents are processed per epoch in parallel and their counts are
    /// summed, so the result is the same for any thread count.
    pub fn build(
        stream: &Stream,
        periods: &BTreeMap<String, Vec<BurstPeriod>>,
        min_edge_weight: u32,
    ) -> BINet {
        let nodes: Vec<BurstElement> = periods
            .iter()
            .flat_map(|(w, ps)| {
                let mut ps = ps.clone();
                ps.sort();
                ps.dedup();
                ps.into_iter().map(move |p| BurstElement {
                    word: w.clone(),
                    period: p,
                })
            })
            .collect();

        // word -> (first node id, periods ascending)
        let mut by_word: HashMap<&str, (u32, Vec<BurstPeriod>)> = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            by_word
                .entry(n.word.as_str())
                .or_insert_with(|| (i as u32, Vec::new()))
                .1
                .push(n.period);
        }

        let active_node = |word: &str, epoch: usize| -> Option<u32> {
            let (first, ps) = by_word.get(word)?;
            let idx = ps.partition_point(|p| p.end < epoch);
            (idx < ps.len() && ps[idx].contains(epoch)).then(|| first + idx as u32)
        };

        let weights: HashMap<(u32, u32), u32> = (0..stream.num_epochs())
            .into_par_iter()
            .fold(HashMap::new, |mut acc: HashMap<(u32, u32), u32>, epoch| {
                let mut active = Vec::new();
                for doc in stream.docs_at(epoch) {
                    active.clear();
                    active.extend(doc.tokens.iter().filter_map(|t| active_node(t, epoch)));
                    active.sort_unstable();
                    active.dedup();
                    for (i, &a) in active.iter().enumerate() {
                        for &b in &active[i + 1..] {
                            *acc.entry((a, b)).or_insert(0) += 1;
                        }
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });

        let edges = weights
            .into_iter()
            .filter(|&(_, w)| w >= min_edge_weight.max(1))
            .map(|((a, b), w)| (a as usize, b as usize, w));
        Self::assemble(nodes, edges)
    }

    /// Build from explicit nodes and edges; edge endpoints index into
    /// `nodes`. Parallel edges are summed.
    pub fn from_edges(
        nodes: Vec<BurstElement>,
        edges: impl IntoIterator<Item = (usize, usize, u32)>,
    ) -> Result<BINet> {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].cmp(&nodes[b]));
        if order.windows(2).any(|w| nodes[w[0]] == nodes[w[1]]) {
            return Err(Error::InvalidParameter("duplicate burst element".into()));
        }
        let mut remap = vec![0usize; nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut summed: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a},{b}) references a missing node"
                )));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on node {a}")));
            }
            if w == 0 {
                return Err(Error::InvalidParameter("edge weight must be >= 1".into()));
            }
            let (x, y) = (remap[a].min(remap[b]), remap[a].max(remap[b]));
            *summed.entry((x, y)).or_insert(0) += w;
        }
        let mut sorted_nodes = Vec::with_capacity(nodes.len());
        let mut slots: Vec<Option<BurstElement>> = nodes.into_iter().map(Some).collect();
        for &old in &order {
            sorted_nodes.push(slots[old].take().expect("each node moved once"));
        }
        Ok(Self::assemble(
            sorted_nodes,
            summed.into_iter().map(|((a, b), w)| (a, b, w)),
        ))
    }

    /// `nodes` must already be sorted and unique; `edges` carry no self-loops
    /// and no duplicates.
    fn assemble(nodes: Vec<BurstElement>, edges: impl IntoIterator<Item = (usize, usize, u32)>) -> BINet {
        let mut adjacency: Vec<Vec<(NodeId, u32)>> = vec![Vec::new(); nodes.len()];
        let mut num_edges = 0;
        for (a, b, w) in edges {
            adjacency[a].push((NodeId(b as u32), w));
            adjacency[b].push((NodeId(a as u32), w));
            num_edges += 1;
        }
        // Node ids follow (word, start) order, so sorting by id breaks
        // weight ties by word then start.
        for list in &mut adjacency {
            list.sort_unstable_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        }
        let strength = adjacency
            .iter()
            .map(|l| l.iter().map(|&(_, w)| u64::from(w)).sum())
            .collect();
        BINet {
            nodes,
            adjacency,
            strength,
            num_edges,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn nodes(&self) -> &[BurstElement] {
        &self.nodes
    }

    pub fn node_ids(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn node(&self, id: NodeId) -> &BurstElement {
        &self.nodes[id.index()]
    }

    pub fn id_of(&self, element: &BurstElement) -> Option<NodeId> {
        self.nodes
            .binary_search(element)
            .ok()
            .map(|i| NodeId(i as u32))
    }

    fn require(&self, element: &BurstElement) -> Result<NodeId> {
        self.id_of(element)
            .ok_or_else(|| Error::UnknownNode(element.to_string()))
    }

    /// All nodes of `word`, by period start.
    pub fn nodes_of_word(&self, word: &str) -> impl Iterator<Item = NodeId> + '_ {
        let lo = self.nodes.partition_point(|n| n.word.as_str() < word);
        let hi = self.nodes.partition_point(|n| n.word.as_str() <= word);
        (lo..hi).map(|i| NodeId(i as u32))
    }

    /// Adjacency of `id`, by descending weight then word then period start.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, u32)] {
        &self.adjacency[id.index()]
    }

    pub fn neighbors_of(&self, element: &BurstElement) -> Result<Vec<(&BurstElement, u32)>> {
        let id = self.require(element)?;
        Ok(self
            .neighbors(id)
            .iter()
            .map(|&(n, w)| (self.node(n), w))
            .collect())
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<u32> {
        self.adjacency[a.index()]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, w)| w)
    }

    /// Sum of the weights of all edges at `id`.
    pub fn strength(&self, id: NodeId) -> u64 {
        self.strength[id.index()]
    }

    /// Neighbors of `c` with their normalized edge weights.
    pub fn normalized_neighbors(
        &self,
        c: NodeId,
        norm: NeighborNorm,
    ) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.neighbors(c).iter().map(move |&(n, w)| {
            let denom = match norm {
                NeighborNorm::Source => self.strength(c),
                NeighborNorm::Neighbor => self.strength(n),
            };
            (n, f64::from(w) / denom as f64)
        })
    }

    pub fn normalized_weight(
        &self,
        c: &BurstElement,
        c_prime: &BurstElement,
        norm: NeighborNorm,
    ) -> Result<f64> {
        let a = self.require(c)?;
        let b = self.require(c_prime)?;
        let w = self
            .weight(a, b)
            .ok_or_else(|| Error::MissingEdge(c.to_string(), c_prime.to_string()))?;
        let denom = match norm {
            NeighborNorm::Source => self.strength(a),
            NeighborNorm::Neighbor => self.strength(b),
        };
        Ok(f64::from(w) / denom as f64)
    }

    /// Edges as `(a, b, weight)` with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, u32)> {
        let mut out: Vec<_> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| {
                list.iter()
                    .filter(move |&&(b, _)| (a as u32) < b.0)
                    .map(move |&(b, w)| (NodeId(a as u32), b, w))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Node file: `word<TAB>start<TAB>end<TAB>node_id`, by id.
    pub fn write_nodes<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{}", n.word, n.period.start, n.period.end, i)?;
        }
        Ok(())
    }

    /// Edge file: `node_id<TAB>node_id<TAB>weight`, by id pair.
    pub fn write_edges<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b, w) in self.edges() {
            writeln!(out, "{}\t{}\t{}", a.0, b.0, w)?;
        }
        Ok(())
    }

    /// Load a graph written by [`write_nodes`](Self::write_nodes) and
    /// [`write_edges`](Self::write_edges).
    pub fn load(nodes_path: impl AsRef<Path>, edges_path: impl AsRef<Path>) -> Result<BINet> {
        let nodes_path = nodes_path.as_ref();
        let edges_path = edges_path.as_ref();
        let name = nodes_path.display().to_string();
        let mut nodes: Vec<(usize, BurstElement)> = Vec::new();
        for (i, line) in read_lines(nodes_path)?.into_iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(Error::parse(&name, i + 1, "expected word<TAB>start<TAB>end<TAB>id"));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| Error::parse(&name, i + 1, format!("{s:?}: {e}")))
            };
            let (start, end, id) = (num(f[1])?, num(f[2])?, num(f[3])?);
            if start > end {
                return Err(Error::parse(&name, i + 1, "period start after end"));
            }
            nodes.push((id, BurstElement::new(f[0], start, end)));
        }
        nodes.sort_by_key(|(id, _)| *id);
        if nodes.iter().enumerate().any(|(i, (id, _))| i != *id) {
            return Err(Error::parse(&name, 0, "node ids must be 0..n without gaps"));
        }
        let nodes: Vec<BurstElement> = nodes.into_iter().map(|(_, n)| n).collect();

        let name = edges_path.display().to_string();
        let mut edges = Vec::new();
        for (i, line) in read_lines(edges_path)?.into_iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(Error::parse(&name, i + 1, "expected id<TAB>id<TAB>weight"));
            }
            let parse = |s: &str| {
                s.parse::<u64>()
                    .map_err(|e| Error::parse(&name, i + 1, format!("{s:?}: {e}")))
            };
            let (a, b, w) = (parse(f[0])?, parse(f[1])?, parse(f[2])?);
            let w = u32::try_from(w).map_err(|_| Error::parse(&name, i + 1, "weight overflow"))?;
            edges.push((a as usize, b as usize, w));
        }
        BINet::from_edges(nodes, edges)
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .map(|l| {
            l.map(|s| s.trim_end_matches('\r').to_string())
                .map_err(|e| Error::io(path, e))
        })
        .collect()
}
