//! Directed configuration model: uniform stub pairing and structural
//! diagnostics (strong connectivity, loops and multi-edges, tree-like
//! out-neighbourhoods).

use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::degree::BiDegreeSequence;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// A directed multigraph stored as two CSR adjacency arrays plus the edge list
/// in pairing order. Self-loops and parallel edges are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_heads: Vec<usize>,
    in_offsets: Vec<usize>,
    in_tails: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

fn offsets_from_degrees(deg: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut offsets = vec![0];
    let mut acc = 0;
    for d in deg {
        acc += d;
        offsets.push(acc);
    }
    offsets
}

impl Digraph {
    /// Build from an edge list; the list order is kept as the pairing order.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(t, h)) = edges.iter().find(|&&(t, h)| t >= n || h >= n) {
            return Err(Error::Structural(format!(
                "edge ({t}, {h}) references a vertex outside 0..{n}"
            )));
        }
        let mut out_deg = vec![0usize; n];
        let mut in_deg = vec![0usize; n];
        for &(t, h) in &edges {
            out_deg[t] += 1;
            in_deg[h] += 1;
        }
        let out_offsets = offsets_from_degrees(out_deg.iter().copied());
        let in_offsets = offsets_from_degrees(in_deg.iter().copied());
        let mut out_fill = out_offsets[..n].to_vec();
        let mut in_fill = in_offsets[..n].to_vec();
        let mut out_heads = vec![0; edges.len()];
        let mut in_tails = vec![0; edges.len()];
        for &(t, h) in &edges {
            out_heads[out_fill[t]] = h;
            out_fill[t] += 1;
            in_tails[in_fill[h]] = t;
            in_fill[h] += 1;
        }
        Ok(Self {
            n,
            out_offsets,
            out_heads,
            in_offsets,
            in_tails,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Heads of the out-edges of `x`, one entry per edge (multiplicities kept).
    pub fn out_neighbors(&self, x: usize) -> &[usize] {
        &self.out_heads[self.out_offsets[x]..self.out_offsets[x + 1]]
    }

    /// Tails of the in-edges of `x`, one entry per edge.
    pub fn in_neighbors(&self, x: usize) -> &[usize] {
        &self.in_tails[self.in_offsets[x]..self.in_offsets[x + 1]]
    }

    pub fn out_degree(&self, x: usize) -> usize {
        self.out_offsets[x + 1] - self.out_offsets[x]
    }

    pub fn in_degree(&self, x: usize) -> usize {
        self.in_offsets[x + 1] - self.in_offsets[x]
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.n).map(|x| self.out_degree(x)).max().unwrap_or(0)
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn self_loops(&self) -> usize {
        self.edges.iter().filter(|(t, h)| t == h).count()
    }

    /// Number of ordered vertex pairs joined by two or more edges.
    pub fn multi_edge_pairs(&self) -> usize {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for &e in &self.edges {
            *counts.entry(e).or_default() += 1;
        }
        counts.values().filter(|&&c| c > 1).count()
    }

    /// True when the realized degrees equal `seq` exactly.
    pub fn matches_degrees(&self, seq: &BiDegreeSequence) -> bool {
        self.n == seq.n()
            && (0..self.n).all(|x| {
                self.out_degree(x) == seq.out_degree(x) && self.in_degree(x) == seq.in_degree(x)
            })
    }

    /// Write the `tail,head` edge list in pairing order.
    pub fn write_edges_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
        for &(tail, head) in &self.edges {
            wtr.serialize(EdgeRow { tail, head })?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Import an edge list and check it against a degree sequence.
    pub fn read_edges_csv(path: &Path, seq: &BiDegreeSequence) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(BufReader::new(file));
        let edges = rdr
            .deserialize::<EdgeRow>()
            .map(|r| r.map(|r| (r.tail, r.head)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let g = Self::from_edges(seq.n(), edges)?;
        if !g.matches_degrees(seq) {
            return Err(Error::Structural(
                "edge list degrees do not match the degree sequence".into(),
            ));
        }
        Ok(g)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    tail: usize,
    head: usize,
}

/// Tail stub `i` is matched with head stub `pairing[i]`.
///
/// Tail stubs are numbered vertex by vertex (vertex 0's `d+` tails first) and
/// likewise for heads. The permutation is a seeded Fisher-Yates shuffle, so
/// each of the `m!` matchings is equally likely.
pub fn sample_pairing(seq: &BiDegreeSequence, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..seq.m()).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    perm
}

/// Owner vertex of each stub when stubs are numbered vertex by vertex.
pub fn stub_owners(degrees: &[usize]) -> Vec<usize> {
    degrees
        .iter()
        .enumerate()
        .flat_map(|(x, &d)| std::iter::repeat_n(x, d))
        .collect()
}

/// Sample a DCM multigraph by uniform matching of tails to heads.
pub fn sample(seq: &BiDegreeSequence, seed: u64) -> Digraph {
    let tails = stub_owners(seq.out_deg());
    let heads = stub_owners(seq.in_deg());
    let pairing = sample_pairing(seq, seed);
    let edges = tails
        .iter()
        .zip(&pairing)
        .map(|(&t, &j)| (t, heads[j]))
        .collect();
    Digraph::from_edges(seq.n(), edges).expect("stub owners are in range")
}

/// Strongly connected components (iterative Tarjan). Returns the component
/// id of each vertex and the number of components.
pub fn strongly_connected_components(g: &Digraph) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = g.n();
    let mut index = vec![UNSEEN; n];
    let mut lowlink = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut n_comp = 0;
    // (vertex, next out-slot to scan)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, slot)) = call.last() {
            let nbrs = g.out_neighbors(v);
            if slot < nbrs.len() {
                let w = nbrs[slot];
                call.last_mut().unwrap().1 += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = n_comp;
                    if w == v {
                        break;
                    }
                }
                n_comp += 1;
            }
        }
    }
    (comp, n_comp)
}

pub fn is_strongly_connected(g: &Digraph) -> bool {
    g.n() > 0 && strongly_connected_components(g).1 == 1
}

/// Reusable breadth-first explorer for out-balls; avoids an O(n) reset per
/// query by stamping visited vertices with a query id.
pub struct BallExplorer {
    stamp: Vec<u32>,
    current: u32,
    queue: VecDeque<(usize, usize)>,
}

impl BallExplorer {
    pub fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            current: 0,
            queue: VecDeque::new(),
        }
    }

    /// Whether every path of length at most `h` from `x` reaches a distinct
    /// vertex, i.e. the depth-`h` out-ball of `x` is a tree.
    pub fn is_tree(&mut self, g: &Digraph, x: usize, h: usize) -> bool {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.current = 1;
        }
        self.queue.clear();
        self.stamp[x] = self.current;
        self.queue.push_back((x, 0));
        while let Some((v, depth)) = self.queue.pop_front() {
            if depth == h {
                continue;
            }
            for &w in g.out_neighbors(v) {
                if self.stamp[w] == self.current {
                    return false;
                }
                self.stamp[w] = self.current;
                self.queue.push_back((w, depth + 1));
            }
        }
        true
    }
}

pub fn out_ball_is_tree(g: &Digraph, x: usize, h: usize) -> bool {
    BallExplorer::new(g.n()).is_tree(g, x, h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub strongly_connected: bool,
    pub self_loops: usize,
    pub multi_edge_pairs: usize,
    pub tree_fraction_at_h: f64,
    pub h_used: usize,
}

/// Depth `floor(ln n / (5 ln d+_max))`, at least 1.
pub fn tree_depth(n: usize, max_out_degree: usize) -> usize {
    if n < 2 || max_out_degree < 2 {
        return 1;
    }
    let h = ((n as f64).ln() / (5.0 * (max_out_degree as f64).ln())).floor() as usize;
    h.max(1)
}

pub fn structure_report(g: &Digraph) -> StructureReport {
    let h = tree_depth(g.n(), g.max_out_degree());
    let mut explorer = BallExplorer::new(g.n());
    let trees = (0..g.n()).filter(|&x| explorer.is_tree(g, x, h)).count();
    StructureReport {
        strongly_connected: is_strongly_connected(g),
        self_loops: g.self_loops(),
        multi_edge_pairs: g.multi_edge_pairs(),
        tree_fraction_at_h: if g.n() == 0 { 0.0 } else { trees as f64 / g.n() as f64 },
        h_used: h,
    }
}
