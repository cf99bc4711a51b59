//! Exact automorphism groups of signed directed networks.
//!
//! [`count_automorphisms`] runs an individualization–refinement search:
//! equitable refinement on signed in/out neighbourhoods, a first path of
//! individualized vertices down to a discrete partition, and at each level
//! a search for automorphisms that move the individualized vertex. The
//! generators found are strong relative to the first-path base, so the
//! stabilizer chain is read off without a Schreier–Sims completion; its
//! fundamental orbit sizes multiply to the group order.
//! [`count_automorphisms_bruteforce`] enumerates all `M!` permutations and
//! serves as the oracle for small networks.

mod perm;
mod refine;
pub mod schreier_sims;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::SignedNetwork;

pub use perm::Permutation;
pub use refine::{LabeledDigraph, Partition};
use refine::refine;
use schreier_sims::StabilizerChain;

/// Largest network the brute-force counter accepts.
pub const BRUTE_FORCE_LIMIT: usize = 9;

#[derive(Debug, Clone, Serialize)]
pub struct AutomorphismReport {
    #[serde(serialize_with = "serialize_decimal")]
    pub group_order: BigUint,
    pub generators: Vec<Permutation>,
    pub orbit_partition: Vec<Vec<usize>>,
}

fn serialize_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

impl AutomorphismReport {
    /// log10 of the group order.
    pub fn log10_order(&self) -> f64 {
        log10_biguint(&self.group_order)
    }
}

pub fn log10_biguint(v: &BigUint) -> f64 {
    let digits = v.to_str_radix(10);
    let lead: f64 = digits[..digits.len().min(15)].parse().unwrap_or(0.0);
    lead.log10() + (digits.len() - digits.len().min(15)) as f64
}

/// Relabel nodes: entry `(i, j)` of the result is entry `(p(i), p(j))`.
pub fn apply_permutation(p: &Permutation, net: &SignedNetwork) -> Result<SignedNetwork> {
    let m = net.size();
    if p.degree() != m {
        return Err(Error::DimensionMismatch(format!("permutation of degree {} on {m} nodes", p.degree())));
    }
    let entries = (0..m * m).map(|k| net.get(p.image(k / m), p.image(k % m))).collect();
    SignedNetwork::from_entries(m, entries)
}

/// True when relabelling by `p` leaves every entry, sign included, unchanged.
pub fn is_automorphism(p: &Permutation, net: &SignedNetwork) -> bool {
    let m = net.size();
    p.degree() == m && (0..m).all(|i| (0..m).all(|j| net.get(p.image(i), p.image(j)) == net.get(i, j)))
}

fn is_automorphism_sparse(p: &Permutation, g: &LabeledDigraph, net: &SignedNetwork) -> bool {
    // a bijection mapping every non-default entry onto an equal entry also
    // maps default entries onto default entries
    g.out
        .iter()
        .enumerate()
        .all(|(i, nbrs)| nbrs.iter().all(|&(j, l)| net.get(p.image(i), p.image(j)) == l))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index is the root so results do not depend on order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    fn absorb(&mut self, g: &Permutation) {
        for x in 0..g.degree() {
            self.union(x, g.image(x));
        }
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            by_root[r].push(x);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

fn orbits_of(n: usize, generators: &[Permutation]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for g in generators {
        uf.absorb(g);
    }
    uf.classes()
}

/// Enumerate all `M!` relabellings. Limited to `M <= 9`.
pub fn count_automorphisms_bruteforce(net: &SignedNetwork) -> Result<AutomorphismReport> {
    let m = net.size();
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { size: m, limit: BRUTE_FORCE_LIMIT });
    }
    let mut count: u64 = 0;
    let mut generators: Vec<Permutation> = Vec::new();
    let mut chain = StabilizerChain::new(m, &[], &[]);

    // Heap's algorithm
    let mut images: Vec<usize> = (0..m).collect();
    let mut c = vec![0usize; m];
    let mut visit = |images: &[usize]| {
        let p = Permutation::from_images(images.to_vec()).expect("heap permutation");
        if is_automorphism(&p, net) {
            count += 1;
            if !p.is_identity() && !chain.contains(&p) {
                generators.push(p);
                chain = StabilizerChain::new(m, &generators, &[]);
            }
        }
    };
    visit(&images);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                images.swap(0, i);
            } else {
                images.swap(c[i], i);
            }
            visit(&images);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    Ok(AutomorphismReport {
        group_order: BigUint::from(count),
        orbit_partition: orbits_of(m, &generators),
        generators,
    })
}

struct Search<'a> {
    net: &'a SignedNetwork,
    graph: LabeledDigraph,
    /// Refined partition at each depth of the first path.
    path: Vec<Partition>,
    /// Refinement trace hash at each depth of the first path.
    traces: Vec<u64>,
    /// Vertex individualized at each depth.
    chosen: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(net: &'a SignedNetwork) -> Self {
        let graph = LabeledDigraph::from_network(net);
        let (root, trace) = refine(&graph, Partition::unit(net.size()));
        let mut s = Self { net, graph, path: vec![root], traces: vec![trace], chosen: Vec::new() };
        while let Some(t) = s.path.last().expect("root").target_cell() {
            let node = s.path.last().expect("root");
            let v = node.cells[t][0];
            let (child, trace) = refine(&s.graph, node.individualize(v));
            s.chosen.push(v);
            s.path.push(child);
            s.traces.push(trace);
        }
        s
    }

    fn leaf(&self) -> &Partition {
        self.path.last().expect("root")
    }

    fn matches_path(&self, depth: usize, p: &Partition, trace: u64) -> bool {
        let q = &self.path[depth];
        trace == self.traces[depth]
            && p.cells.len() == q.cells.len()
            && p.cells.iter().zip(&q.cells).all(|(a, b)| a.len() == b.len())
    }

    /// Depth-first search below `node` (at `depth`) for a leaf whose
    /// induced relabelling of the first-path leaf is an automorphism.
    fn find_leaf(&self, node: &Partition, depth: usize) -> Option<Permutation> {
        if node.is_discrete() {
            let first = self.leaf();
            let mut images = vec![0; node.cells.len()];
            for (a, b) in first.cells.iter().zip(&node.cells) {
                images[a[0]] = b[0];
            }
            let g = Permutation::from_images(images).expect("leaf bijection");
            return is_automorphism_sparse(&g, &self.graph, self.net).then_some(g);
        }
        let t = node.target_cell()?;
        for &x in &node.cells[t] {
            let (child, trace) = refine(&self.graph, node.individualize(x));
            if self.matches_path(depth + 1, &child, trace) {
                if let Some(g) = self.find_leaf(&child, depth + 1) {
                    return Some(g);
                }
            }
        }
        None
    }

    /// Generators of the automorphism group, working up from the deepest
    /// level of the first path.
    fn run(&self) -> Vec<Permutation> {
        let m = self.net.size();
        let mut generators: Vec<Permutation> = Vec::new();
        for level in (0..self.chosen.len()).rev() {
            let node = &self.path[level];
            let v = self.chosen[level];
            let cell = node.cells[node.cell_of[v]].clone();
            let mut uf = UnionFind::new(m);
            for g in &generators {
                uf.absorb(g);
            }
            let mut rejected: Vec<usize> = Vec::new();
            for &w in &cell {
                if w == v || uf.find(w) == uf.find(v) {
                    continue;
                }
                let rw = uf.find(w);
                if rejected.iter().any(|&r| uf.find(r) == rw) {
                    continue;
                }
                let (child, trace) = refine(&self.graph, node.individualize(w));
                let found = if self.matches_path(level + 1, &child, trace) {
                    self.find_leaf(&child, level + 1)
                } else {
                    None
                };
                match found {
                    Some(g) => {
                        uf.absorb(&g);
                        generators.push(g);
                    }
                    None => rejected.push(w),
                }
            }
        }
        generators
    }
}

/// Exact automorphism group of a signed network.
pub fn count_automorphisms(net: &SignedNetwork) -> AutomorphismReport {
    let m = net.size();
    let search = Search::new(net);
    let generators = search.run();
    let chain = StabilizerChain::from_strong_generators(m, &generators, &search.chosen);
    AutomorphismReport {
        group_order: chain.order(),
        orbit_partition: orbits_of(m, &generators),
        generators,
    }
}
