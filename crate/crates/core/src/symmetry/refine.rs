//! Ordered partitions of the node set and equitable refinement over a
//! signed digraph.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::network::SignedNetwork;

/// Sparse view of a signed network: only entries that differ from the
/// most common off-diagonal value are stored, each tagged with its value.
/// For the dense +1 bases this keeps only the handful of zero and -1
/// entries, and refinement on it is equivalent to refinement on the full
/// matrix because the count of default-valued neighbours in any cell is
/// implied by the others.
#[derive(Debug, Clone)]
pub struct LabeledDigraph {
    pub size: usize,
    pub default: i8,
    pub out: Vec<Vec<(usize, i8)>>,
    pub inn: Vec<Vec<(usize, i8)>>,
}

impl LabeledDigraph {
    pub fn from_network(net: &SignedNetwork) -> Self {
        let size = net.size();
        let n_off = size * size.saturating_sub(1);
        let counts = [net.n_negative(), n_off - net.n_nonzero(), net.n_positive()];
        // ties prefer 0 as the implicit value
        let default = if counts[1] >= counts[0] && counts[1] >= counts[2] {
            0
        } else if counts[2] >= counts[0] {
            1
        } else {
            -1
        };
        let mut out = vec![Vec::new(); size];
        let mut inn = vec![Vec::new(); size];
        for i in 0..size {
            for j in 0..size {
                let v = net.get(i, j);
                if i != j && v != default {
                    out[i].push((j, v));
                    inn[j].push((i, v));
                }
            }
        }
        Self { size, default, out, inn }
    }

    pub fn n_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

/// Ordered partition: cell order is part of the state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub cells: Vec<Vec<usize>>,
    pub cell_of: Vec<usize>,
}

impl Partition {
    pub fn unit(size: usize) -> Self {
        Self { cells: vec![(0..size).collect()], cell_of: vec![0; size] }
    }

    pub fn is_discrete(&self) -> bool {
        self.cells.len() == self.cell_of.len()
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// Split `v` out of its cell into a singleton placed just before the rest.
    pub fn individualize(&self, v: usize) -> Partition {
        let c = self.cell_of[v];
        let mut cells = Vec::with_capacity(self.cells.len() + 1);
        cells.extend_from_slice(&self.cells[..c]);
        cells.push(vec![v]);
        cells.push(self.cells[c].iter().copied().filter(|&x| x != v).collect());
        cells.extend_from_slice(&self.cells[c + 1..]);
        Partition::from_cells(cells)
    }

    fn from_cells(cells: Vec<Vec<usize>>) -> Self {
        let mut cell_of = vec![0; cells.iter().map(Vec::len).sum()];
        for (k, cell) in cells.iter().enumerate() {
            for &v in cell {
                cell_of[v] = k;
            }
        }
        Self { cells, cell_of }
    }

    /// Smallest non-singleton cell, lowest index on ties.
    pub fn target_cell(&self) -> Option<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() > 1)
            .min_by_key(|(k, c)| (c.len(), *k))
            .map(|(k, _)| k)
    }
}

type Signature = Vec<(u8, i8, usize)>;

fn signature(g: &LabeledDigraph, p: &Partition, v: usize) -> Signature {
    let mut sig: Signature = g.out[v]
        .iter()
        .map(|&(u, l)| (0u8, l, p.cell_of[u]))
        .chain(g.inn[v].iter().map(|&(u, l)| (1u8, l, p.cell_of[u])))
        .collect();
    sig.sort_unstable();
    sig
}

/// Refine to the coarsest equitable partition finer than `p`. Returns the
/// refined partition and a hash of the refinement trace; both are
/// invariant under relabelling of the network.
pub fn refine(g: &LabeledDigraph, p: Partition) -> (Partition, u64) {
    let mut hasher = DefaultHasher::new();
    let mut p = p;
    loop {
        let sigs: Vec<Signature> = (0..g.size).map(|v| signature(g, &p, v)).collect();
        let mut cells = Vec::with_capacity(p.cells.len());
        for cell in &p.cells {
            if cell.len() == 1 {
                cells.push(cell.clone());
                continue;
            }
            let mut members = cell.clone();
            members.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]).then(a.cmp(&b)));
            let mut start = 0;
            for k in 1..=members.len() {
                if k == members.len() || sigs[members[k]] != sigs[members[start]] {
                    let group = members[start..k].to_vec();
                    sigs[group[0]].hash(&mut hasher);
                    group.len().hash(&mut hasher);
                    cells.push(group);
                    start = k;
                }
            }
        }
        let changed = cells.len() != p.cells.len();
        p = Partition::from_cells(cells);
        if !changed {
            break;
        }
        p.cells.len().hash(&mut hasher);
    }
    (p, hasher.finish())
}
