//! Signed adjacency matrices, edge flipping, spectral normalization and
//! input coupling vectors.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{Error, Result};
use crate::rng;

/// Resampling budget when searching for a connected random network.
pub const CONNECT_ATTEMPTS: usize = 1000;

/// Default normalization target for the largest |Re(eigenvalue)|.
pub const DEFAULT_TARGET: f64 = 0.5;

/// Square matrix with entries in {-1, 0, +1} and a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedNetwork {
    size: usize,
    entries: Vec<i8>,
    n_positive: usize,
    n_negative: usize,
}

impl SignedNetwork {
    /// Build from row-major entries, validating values and the diagonal.
    pub fn from_entries(size: usize, entries: Vec<i8>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("network size must be positive".into()));
        }
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {size}x{size} network",
                entries.len()
            )));
        }
        let mut n_positive = 0;
        let mut n_negative = 0;
        for i in 0..size {
            for j in 0..size {
                let v = entries[i * size + j];
                if !(-1..=1).contains(&v) {
                    return Err(Error::InvalidParameter(format!("entry ({i},{j}) = {v} not in {{-1,0,1}}")));
                }
                if i == j && v != 0 {
                    return Err(Error::InvalidParameter(format!("diagonal entry ({i},{i}) is nonzero")));
                }
                match v {
                    1 => n_positive += 1,
                    -1 => n_negative += 1,
                    _ => {}
                }
            }
        }
        Ok(Self { size, entries, n_positive, n_negative })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::DimensionMismatch("rows are not square".into()));
        }
        Self::from_entries(size, rows.concat())
    }

    pub fn empty(size: usize) -> Result<Self> {
        Self::from_entries(size, vec![0; size * size])
    }

    /// Every off-diagonal entry set to +1.
    pub fn complete(size: usize) -> Result<Self> {
        let entries = (0..size * size).map(|k| i8::from(k / size != k % size)).collect();
        Self::from_entries(size, entries)
    }

    /// Directed cycle `i -> i+1 (mod size)` of +1 edges, stored as `A[i][i+1]`.
    pub fn directed_cycle(size: usize) -> Result<Self> {
        let mut entries = vec![0; size * size];
        if size > 1 {
            for i in 0..size {
                entries[i * size + (i + 1) % size] = 1;
            }
        }
        Self::from_entries(size, entries)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn n_positive(&self) -> usize {
        self.n_positive
    }

    pub fn n_negative(&self) -> usize {
        self.n_negative
    }

    pub fn n_nonzero(&self) -> usize {
        self.n_positive + self.n_negative
    }

    /// Off-diagonal zeros.
    pub fn n_zero(&self) -> usize {
        self.size * (self.size - 1) - self.n_nonzero()
    }

    /// Fraction of nonzero entries that are -1. For a network obtained by
    /// flipping `n_flip` edges of an all-(+1) base this is `n_flip / N1`.
    pub fn flip_fraction(&self) -> f64 {
        if self.n_nonzero() == 0 {
            0.0
        } else {
            self.n_negative as f64 / self.n_nonzero() as f64
        }
    }

    /// Nonzero pattern as a boolean mask.
    pub fn support(&self) -> Vec<bool> {
        self.entries.iter().map(|&v| v != 0).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| f64::from(self.get(i, j)))
    }

    /// Weak connectivity: BFS over the undirected support graph.
    pub fn is_weakly_connected(&self) -> bool {
        is_weakly_connected(self.size, |i, j| self.get(i, j) != 0)
    }

    /// Text format: header `M n_pos n_neg`, then `M` rows of `M`
    /// space-separated integers.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.size, self.n_positive, self.n_negative)?;
        let mut line = String::new();
        for i in 0..self.size {
            line.clear();
            for j in 0..self.size {
                if j > 0 {
                    line.push(' ');
                }
                write!(line, "{}", self.get(i, j)).expect("write to string");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let [size, n_pos, n_neg] = head[..] else {
            return Err(Error::Parse(format!("header must be `M n_pos n_neg`, got {header:?}")));
        };
        let mut entries = Vec::with_capacity(size * size);
        for row in 0..size {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {row}")))??;
            let before = entries.len();
            for t in line.split_whitespace() {
                entries.push(t.parse::<i8>().map_err(|_| Error::Parse(format!("bad entry {t:?} in row {row}")))?);
            }
            if entries.len() - before != size {
                return Err(Error::Parse(format!("row {row} has {} entries, expected {size}", entries.len() - before)));
            }
        }
        let net = Self::from_entries(size, entries)?;
        if net.n_positive != n_pos || net.n_negative != n_neg {
            return Err(Error::Parse(format!(
                "header counts ({n_pos}, {n_neg}) disagree with entries ({}, {})",
                net.n_positive, net.n_negative
            )));
        }
        Ok(net)
    }
}

fn is_weakly_connected(size: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    if size <= 1 {
        return true;
    }
    let mut seen = vec![false; size];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for v in 0..size {
            if !seen[v] && (edge(u, v) || edge(v, u)) {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == size
}

/// Off-diagonal positions in row-major order, skipping the diagonal.
fn off_diagonal_position(size: usize, k: usize) -> (usize, usize) {
    let i = k / (size - 1);
    let r = k % (size - 1);
    (i, if r >= i { r + 1 } else { r })
}

/// Exactly `n_edges` off-diagonal +1 entries placed uniformly at random,
/// resampled until the support graph is weakly connected.
pub fn make_base_network(size: usize, n_edges: usize, seed: u64) -> Result<SignedNetwork> {
    if size == 0 {
        return Err(Error::InvalidParameter("network size must be positive".into()));
    }
    let slots = size * (size - 1);
    if n_edges > slots {
        return Err(Error::Capacity { requested: n_edges, available: slots });
    }
    if size > 1 && n_edges < size - 1 {
        // a spanning tree needs size-1 edges
        return Err(Error::Construction { attempts: 0 });
    }
    let mut r = rng::rng(seed);
    for _ in 0..CONNECT_ATTEMPTS {
        let mut entries = vec![0i8; size * size];
        for k in index::sample(&mut r, slots, n_edges) {
            let (i, j) = off_diagonal_position(size, k);
            entries[i * size + j] = 1;
        }
        let net = SignedNetwork::from_entries(size, entries)?;
        if net.is_weakly_connected() {
            return Ok(net);
        }
    }
    Err(Error::Construction { attempts: CONNECT_ATTEMPTS })
}

/// Dense +1 network whose `size*(size-1) - n_edges` zero entries all lie
/// among ordered pairs of a random subset of `defect_nodes` nodes. Nodes
/// outside that subset are structurally interchangeable, which is how
/// highly symmetric dense bases are produced.
pub fn make_defect_network(size: usize, n_edges: usize, defect_nodes: usize, seed: u64) -> Result<SignedNetwork> {
    let slots = size * size.saturating_sub(1);
    if n_edges > slots {
        return Err(Error::Capacity { requested: n_edges, available: slots });
    }
    if defect_nodes > size {
        return Err(Error::InvalidParameter(format!("{defect_nodes} defect nodes exceed network size {size}")));
    }
    let n_zero = slots - n_edges;
    let defect_slots = defect_nodes * defect_nodes.saturating_sub(1);
    if n_zero > defect_slots {
        return Err(Error::Capacity { requested: n_zero, available: defect_slots });
    }
    let mut r = rng::rng(seed);
    for _ in 0..CONNECT_ATTEMPTS {
        let mut nodes = index::sample(&mut r, size, defect_nodes).into_vec();
        nodes.sort_unstable();
        let mut entries: Vec<i8> = (0..size * size).map(|k| i8::from(k / size != k % size)).collect();
        for k in index::sample(&mut r, defect_slots.max(1), n_zero) {
            let (a, b) = off_diagonal_position(defect_nodes, k);
            entries[nodes[a] * size + nodes[b]] = 0;
        }
        let net = SignedNetwork::from_entries(size, entries)?;
        if net.is_weakly_connected() {
            return Ok(net);
        }
    }
    Err(Error::Construction { attempts: CONNECT_ATTEMPTS })
}

/// Flip exactly `n_flip` of the +1 entries to -1, chosen uniformly without
/// replacement. The input network is left untouched.
pub fn flip_edges(net: &SignedNetwork, n_flip: usize, seed: u64) -> Result<SignedNetwork> {
    let positives: Vec<usize> = net
        .entries
        .iter()
        .enumerate()
        .filter_map(|(k, &v)| (v == 1).then_some(k))
        .collect();
    if n_flip > positives.len() {
        return Err(Error::Capacity { requested: n_flip, available: positives.len() });
    }
    let mut r = rng::rng(seed);
    let mut out = net.clone();
    for k in index::sample(&mut r, positives.len(), n_flip) {
        out.entries[positives[k]] = -1;
    }
    out.n_positive -= n_flip;
    out.n_negative += n_flip;
    Ok(out)
}

/// Fraction of the `M(M-1)` off-diagonal slots that are nonzero.
pub fn sparsity(net: &SignedNetwork) -> f64 {
    if net.size < 2 {
        return 0.0;
    }
    net.n_nonzero() as f64 / (net.size * (net.size - 1)) as f64
}

/// Real-valued network with zero diagonal, used for the fully random
/// comparison reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    entries: DMatrix<f64>,
}

impl WeightedNetwork {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n_nonzero(&self) -> usize {
        self.entries.iter().filter(|v| **v != 0.0).count()
    }

    pub fn sparsity(&self) -> f64 {
        let m = self.size();
        if m < 2 {
            0.0
        } else {
            self.n_nonzero() as f64 / (m * (m - 1)) as f64
        }
    }
}

/// Each off-diagonal entry is nonzero with probability `density`, with a
/// value uniform on `[-1, 1]`.
pub fn make_random_network(size: usize, density: f64, seed: u64) -> Result<WeightedNetwork> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!("density {density} not in (0, 1]")));
    }
    let mut r = rng::rng(seed);
    let mut m = DMatrix::zeros(size, size);
    // row-major draw order
    for i in 0..size {
        for j in 0..size {
            if i == j {
                continue;
            }
            let on = density >= 1.0 || r.random::<f64>() < density;
            let v: f64 = r.random_range(-1.0..=1.0);
            if on {
                m[(i, j)] = v;
            }
        }
    }
    Ok(WeightedNetwork { entries: m })
}

/// Which eigenvalue functional is pinned to the target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMode {
    /// Largest absolute real part.
    #[default]
    MaxRealPart,
    /// Largest modulus (the conventional spectral radius).
    MaxModulus,
}

/// Rescaled real adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    pub entries: DMatrix<f64>,
    pub scale: f64,
    pub target: f64,
}

impl NormalizedAdjacency {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Wrap an already-scaled matrix (scale 1).
    pub fn raw(entries: DMatrix<f64>) -> Self {
        Self { entries, scale: 1.0, target: f64::NAN }
    }

    pub fn zeros(size: usize) -> Self {
        Self::raw(DMatrix::zeros(size, size))
    }

    /// Real-valued CSV, one row per matrix row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.entries.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Largest |Re(lambda)| or largest |lambda| of a dense real matrix.
pub fn spectral_extent(m: &DMatrix<f64>, mode: SpectralMode) -> Result<f64> {
    let eig = eigen::eigenvalues(m)?;
    Ok(match mode {
        SpectralMode::MaxRealPart => eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max),
        SpectralMode::MaxModulus => eig.iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

/// Scale a real matrix so its spectral extent equals `target`.
pub fn normalize_matrix(m: &DMatrix<f64>, target: f64, mode: SpectralMode) -> Result<NormalizedAdjacency> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter(format!("normalization target {target} must be positive")));
    }
    let extent = spectral_extent(m, mode)?;
    if extent < 1e-12 {
        return Err(Error::NormalizationUndefined);
    }
    let scale = target / extent;
    Ok(NormalizedAdjacency { entries: m * scale, scale, target })
}

/// Rescale so the largest |Re(eigenvalue)| equals `target`.
pub fn normalize_spectral(net: &SignedNetwork, target: f64) -> Result<NormalizedAdjacency> {
    normalize_matrix(&net.to_matrix(), target, SpectralMode::MaxRealPart)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// +1 on odd (1-based) nodes, -1 on even ones.
    Alternating,
    AllOnes,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    pub entries: Vec<f64>,
    pub kind: InputKind,
}

impl InputVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn make_input_vector(size: usize, kind: InputKind, seed: u64) -> InputVector {
    let entries = match kind {
        InputKind::Alternating => (0..size).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
        InputKind::AllOnes => vec![1.0; size],
        InputKind::UniformRandom => {
            let mut r = rng::rng(seed);
            (0..size).map(|_| r.random_range(-1.0..=1.0)).collect()
        }
    };
    InputVector { entries, kind }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // independent BFS written against the raw entry slice
    fn bfs_connected(net: &SignedNetwork) -> bool {
        let m = net.size();
        let e = net.entries();
        let mut comp = vec![usize::MAX; m];
        let mut stack = vec![0];
        comp[0] = 0;
        while let Some(u) = stack.pop() {
            for v in 0..m {
                if comp[v] == usize::MAX && (e[u * m + v] != 0 || e[v * m + u] != 0) {
                    comp[v] = 0;
                    stack.push(v);
                }
            }
        }
        comp.iter().all(|&c| c == 0)
    }

    #[test]
    fn saturated_base_is_complete() {
        let net = make_base_network(4, 12, 1).unwrap();
        assert_eq!(net, SignedNetwork::complete(4).unwrap());
    }

    #[test]
    fn full_sized_base() {
        let net = make_base_network(100, 9800, 5).unwrap();
        assert_eq!(net.n_positive(), 9800);
        assert_eq!(net.n_zero(), 100);
        assert!((sparsity(&net) - 9800.0 / 9900.0).abs() < 1e-15);
        assert!((0..100).all(|i| net.get(i, i) == 0));
    }

    #[test]
    fn sparse_base_is_connected() {
        for seed in 0..20 {
            let net = make_base_network(6, 5, seed).unwrap();
            assert_eq!(net.n_positive(), 5);
            assert!(bfs_connected(&net));
        }
    }

    #[test]
    fn base_network_errors() {
        assert!(matches!(make_base_network(4, 13, 0), Err(Error::Capacity { .. })));
        assert!(matches!(make_base_network(6, 3, 0), Err(Error::Construction { .. })));
    }

    #[test]
    fn defect_network_counts() {
        let net = make_defect_network(100, 9800, 58, 2).unwrap();
        assert_eq!(net.n_positive(), 9800);
        let touched = (0..100)
            .filter(|&i| (0..100).any(|j| i != j && (net.get(i, j) == 0 || net.get(j, i) == 0)))
            .count();
        assert!(touched <= 58);
    }

    #[test]
    fn flip_identity_and_full() {
        let base = make_base_network(10, 60, 3).unwrap();
        let same = flip_edges(&base, 0, 9).unwrap();
        assert_eq!(same, base);
        assert_eq!(same.flip_fraction(), 0.0);
        let all = flip_edges(&base, 60, 9).unwrap();
        assert_eq!(all.n_negative(), 60);
        assert_eq!(all.flip_fraction(), 1.0);
        assert!(matches!(flip_edges(&base, 61, 9), Err(Error::Capacity { .. })));
    }

    #[test]
    fn half_flip_fraction() {
        let base = make_base_network(100, 9800, 5).unwrap();
        let f = flip_edges(&base, 4900, 1).unwrap();
        assert_eq!(f.flip_fraction(), 0.5);
        assert_eq!(base.n_negative(), 0);
    }

    #[test]
    fn normalize_two_cycle() {
        let net = SignedNetwork::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let n = normalize_spectral(&net, 0.5).unwrap();
        assert!((n.scale - 0.5).abs() < 1e-12);
        assert!((n.entries[(0, 1)] - 0.5).abs() < 1e-12);
        assert_eq!(n.entries[(0, 0)], 0.0);
    }

    #[test]
    fn normalize_four_cycle() {
        let net = SignedNetwork::directed_cycle(4).unwrap();
        let n = normalize_spectral(&net, 0.5).unwrap();
        assert!((n.scale - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalize_undefined_for_nilpotent() {
        // strictly upper triangular: every eigenvalue is zero
        let net = SignedNetwork::from_rows(&[vec![0, 1, 1], vec![0, 0, 1], vec![0, 0, 0]]).unwrap();
        assert!(matches!(normalize_spectral(&net, 0.5), Err(Error::NormalizationUndefined)));
    }

    #[test]
    fn max_modulus_mode() {
        // 3-cycle: eigenvalues are cube roots of unity, max Re = 1, max |z| = 1
        // 4-cycle with target via modulus also has scale 0.5
        let net = SignedNetwork::directed_cycle(3).unwrap();
        let a = normalize_matrix(&net.to_matrix(), 1.0, SpectralMode::MaxModulus).unwrap();
        assert!((a.scale - 1.0).abs() < 1e-10);
        let flipped = SignedNetwork::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![-1, 0, 0]]).unwrap();
        // eigenvalues: cube roots of -1 -> max |Re| = 1, modulus 1
        let b = normalize_matrix(&flipped.to_matrix(), 1.0, SpectralMode::MaxRealPart).unwrap();
        assert!((b.scale - 1.0).abs() < 1e-10);
    }

    #[test]
    fn input_vectors() {
        let alt = make_input_vector(4, InputKind::Alternating, 0);
        assert_eq!(alt.entries, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(make_input_vector(3, InputKind::AllOnes, 0).entries, vec![1.0; 3]);
        let u = make_input_vector(50, InputKind::UniformRandom, 4);
        assert!(u.entries.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(u, make_input_vector(50, InputKind::UniformRandom, 4));
    }

    #[test]
    fn random_network_saturated() {
        let w = make_random_network(3, 1.0, 8).unwrap();
        assert_eq!(w.n_nonzero(), 6);
        assert!(w.matrix().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!((0..3).all(|i| w.matrix()[(i, i)] == 0.0));
    }

    #[test]
    fn random_network_density_concentration() {
        let w = make_random_network(100, 0.2, 21).unwrap();
        let n = 9900.0;
        let sigma = (n * 0.2 * 0.8f64).sqrt();
        assert!((w.n_nonzero() as f64 - 1980.0).abs() < 4.0 * sigma);
        assert!((0..100).all(|i| w.matrix()[(i, i)] == 0.0));
        assert!(make_random_network(5, 0.0, 1).is_err());
    }

    #[test]
    fn sparsity_extremes() {
        assert_eq!(sparsity(&SignedNetwork::complete(7).unwrap()), 1.0);
        assert_eq!(sparsity(&SignedNetwork::empty(7).unwrap()), 0.0);
    }

    #[test]
    fn text_round_trip() {
        let base = make_base_network(12, 80, 4).unwrap();
        let net = flip_edges(&base, 30, 2).unwrap();
        let mut buf = Vec::new();
        net.write_text(&mut buf).unwrap();
        let back = SignedNetwork::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn text_rejects_inconsistent_header() {
        let text = "2 2 0\n0 1\n-1 0\n";
        assert!(matches!(SignedNetwork::read_text(text.as_bytes()), Err(Error::Parse(_))));
        let diag = "2 1 0\n1 0\n0 0\n";
        assert!(SignedNetwork::read_text(diag.as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn flips_preserve_support(seed in 0u64..1000, frac in 0.0f64..1.0) {
            let base = make_base_network(15, 120, seed).unwrap();
            let n_flip = (frac * 120.0) as usize;
            let a = flip_edges(&base, n_flip, seed ^ 1).unwrap();
            let b = flip_edges(&base, n_flip, seed ^ 2).unwrap();
            prop_assert_eq!(a.support(), base.support());
            prop_assert_eq!(a.flip_fraction(), b.flip_fraction());
            prop_assert_eq!(sparsity(&a), sparsity(&b));
            prop_assert!((0..15).all(|i| a.get(i, i) == 0));
        }

        #[test]
        fn normalization_is_scale_invariant(seed in 0u64..1000, c in 0.1f64..10.0) {
            let base = make_base_network(12, 70, seed).unwrap();
            let net = flip_edges(&base, 30, seed).unwrap();
            let m = net.to_matrix();
            let a = normalize_matrix(&m, 0.5, SpectralMode::MaxRealPart).unwrap();
            let b = normalize_matrix(&(&m * c), 0.5, SpectralMode::MaxRealPart).unwrap();
            prop_assert!((&a.entries - &b.entries).amax() < 1e-9);
        }
    }
}
