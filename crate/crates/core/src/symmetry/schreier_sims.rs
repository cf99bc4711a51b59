//! Base and strong generating set for a permutation group, built with the
//! deterministic Schreier–Sims algorithm.

use num_bigint::BigUint;

use super::perm::Permutation;

#[derive(Debug, Clone)]
struct Level {
    base_point: usize,
    /// Strong generators fixing every earlier base point.
    generators: Vec<Permutation>,
    /// `transversal[b]` maps `base_point` to `b` for every `b` in the orbit.
    transversal: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
}

impl Level {
    fn new(base_point: usize, degree: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[base_point] = Some(Permutation::identity(degree));
        Self { base_point, generators: Vec::new(), transversal, orbit: vec![base_point] }
    }

    fn rebuild_orbit(&mut self) {
        let degree = self.transversal.len();
        self.transversal.iter_mut().for_each(|t| *t = None);
        self.transversal[self.base_point] = Some(Permutation::identity(degree));
        self.orbit = vec![self.base_point];
        let mut k = 0;
        while k < self.orbit.len() {
            let b = self.orbit[k];
            for g in &self.generators {
                let c = g.image(b);
                if self.transversal[c].is_none() {
                    let u = self.transversal[b].as_ref().expect("orbit point has a representative").then(g);
                    self.transversal[c] = Some(u);
                    self.orbit.push(c);
                }
            }
            k += 1;
        }
    }
}

/// Stabilizer chain `G = G_0 >= G_1 >= ... >= G_k = 1`.
#[derive(Debug, Clone)]
pub struct StabilizerChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabilizerChain {
    /// Chain for the group generated by `generators`, trying the points of
    /// `base_hint` first when a new base point is needed.
    pub fn new(degree: usize, generators: &[Permutation], base_hint: &[usize]) -> Self {
        let mut chain = Self { degree, levels: Vec::new() };
        let gens: Vec<Permutation> = generators.iter().filter(|g| !g.is_identity()).cloned().collect();
        for g in &gens {
            if chain.levels.iter().all(|l| g.image(l.base_point) == l.base_point) {
                chain.push_base_point(g, base_hint);
            }
        }
        let fixes_prefix = |g: &Permutation, levels: &[Level], upto: usize| {
            levels[..upto].iter().all(|l| g.image(l.base_point) == l.base_point)
        };
        for i in 0..chain.levels.len() {
            let s: Vec<Permutation> =
                gens.iter().filter(|g| fixes_prefix(g, &chain.levels, i)).cloned().collect();
            chain.levels[i].generators = s;
            chain.levels[i].rebuild_orbit();
        }
        chain.complete(base_hint);
        chain
    }

    /// Chain for generators already known to be strong relative to `base`:
    /// those fixing the first `i` base points generate the `i`-th stabilizer.
    /// No completion step is run.
    pub fn from_strong_generators(degree: usize, generators: &[Permutation], base: &[usize]) -> Self {
        let gens: Vec<&Permutation> = generators.iter().filter(|g| !g.is_identity()).collect();
        let levels = base
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let mut level = Level::new(b, degree);
                level.generators = gens
                    .iter()
                    .filter(|g| base[..i].iter().all(|&p| g.image(p) == p))
                    .map(|g| (*g).clone())
                    .collect();
                level.rebuild_orbit();
                level
            })
            .collect();
        Self { degree, levels }
    }

    fn push_base_point(&mut self, moved_by: &Permutation, base_hint: &[usize]) {
        let used = |p: usize, levels: &[Level]| levels.iter().any(|l| l.base_point == p);
        let point = base_hint
            .iter()
            .copied()
            .find(|&p| moved_by.image(p) != p && !used(p, &self.levels))
            .or_else(|| moved_by.first_moved())
            .expect("non-identity permutation moves a point");
        self.levels.push(Level::new(point, self.degree));
    }

    /// Sift `g` down from `start`. Returns the residue and the level where
    /// sifting stopped (`levels.len()` when it passed every level).
    fn strip(&self, mut g: Permutation, start: usize) -> (Permutation, usize) {
        for (i, level) in self.levels.iter().enumerate().skip(start) {
            let b = g.image(level.base_point);
            match &level.transversal[b] {
                None => return (g, i),
                Some(u) => g = g.then(&u.inverse()),
            }
        }
        let n = self.levels.len();
        (g, n)
    }

    fn complete(&mut self, base_hint: &[usize]) {
        let mut i = self.levels.len();
        while i > 0 {
            let lvl = i - 1;
            match self.find_missing_generator(lvl) {
                None => i -= 1,
                Some((y, j)) => {
                    if j == self.levels.len() {
                        self.push_base_point(&y, base_hint);
                    }
                    for l in lvl + 1..=j {
                        self.levels[l].generators.push(y.clone());
                        self.levels[l].rebuild_orbit();
                    }
                    i = j + 1;
                }
            }
        }
    }

    /// First Schreier generator of level `lvl` that does not sift through
    /// the levels below it.
    fn find_missing_generator(&self, lvl: usize) -> Option<(Permutation, usize)> {
        let level = &self.levels[lvl];
        for &b in &level.orbit {
            let ub = level.transversal[b].as_ref().expect("orbit point has a representative");
            for x in &level.generators {
                let bx = x.image(b);
                let ubx = level.transversal[bx].as_ref().expect("orbit is closed");
                let h = ub.then(x).then(&ubx.inverse());
                if h.is_identity() {
                    continue;
                }
                let (y, j) = self.strip(h, lvl + 1);
                if j < self.levels.len() || !y.is_identity() {
                    return Some((y, j));
                }
            }
        }
        None
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base_point).collect()
    }

    /// Fundamental orbit sizes along the base.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Product of the fundamental orbit sizes.
    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        let (y, j) = self.strip(g.clone(), 0);
        j == self.levels.len() && y.is_identity()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Permutation {
        Permutation::from_images((0..n).map(|i| (i + 1) % n).collect()).unwrap()
    }

    #[test]
    fn symmetric_group_order() {
        for n in 2..=8 {
            let gens = [cycle(n), Permutation::transposition(n, 0, 1)];
            let chain = StabilizerChain::new(n, &gens, &[]);
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(chain.order(), BigUint::from(fact));
        }
    }

    #[test]
    fn cyclic_and_dihedral() {
        let n = 12;
        let c = StabilizerChain::new(n, &[cycle(n)], &[]);
        assert_eq!(c.order(), BigUint::from(12u32));
        let reflect = Permutation::from_images((0..n).map(|i| (n - i) % n).collect()).unwrap();
        let d = StabilizerChain::new(n, &[cycle(n), reflect], &[]);
        assert_eq!(d.order(), BigUint::from(24u32));
    }

    #[test]
    fn alternating_group() {
        // 3-cycles (0 1 2) and (0 1 2 3 4) generate A5
        let a = Permutation::from_images(vec![1, 2, 0, 3, 4]).unwrap();
        let b = cycle(5);
        let chain = StabilizerChain::new(5, &[a, b], &[]);
        assert_eq!(chain.order(), BigUint::from(60u32));
        assert!(!chain.contains(&Permutation::transposition(5, 0, 1)));
        assert!(chain.contains(&Permutation::from_images(vec![1, 0, 3, 2, 4]).unwrap()));
    }

    #[test]
    fn trivial_group() {
        let chain = StabilizerChain::new(4, &[Permutation::identity(4)], &[]);
        assert_eq!(chain.order(), BigUint::from(1u32));
        assert!(chain.base().is_empty());
    }

    #[test]
    fn large_symmetric_group_from_adjacent_transpositions() {
        let n = 40;
        let gens: Vec<_> = (0..n - 1).map(|i| Permutation::transposition(n, i, i + 1)).collect();
        let chain = StabilizerChain::new(n, &gens, &[]);
        let fact = (1..=n as u32).fold(BigUint::from(1u32), |a, k| a * BigUint::from(k));
        assert_eq!(chain.order(), fact);
    }

    #[test]
    fn strong_generators_skip_completion() {
        // transpositions (i j), i < j, are strong for the base 0, 1, ..., n-2
        let n = 60;
        let gens: Vec<_> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| Permutation::transposition(n, i, j))).collect();
        let base: Vec<usize> = (0..n - 1).collect();
        let chain = StabilizerChain::from_strong_generators(n, &gens, &base);
        let fact = (1..=n as u32).fold(BigUint::from(1u32), |a, k| a * BigUint::from(k));
        assert_eq!(chain.order(), fact);
        assert_eq!(chain.orbit_sizes(), (2..=n).rev().collect::<Vec<_>>());
        let cyclic = [Permutation::from_images((1..7).chain(0..1).collect()).unwrap()];
        let direct = StabilizerChain::from_strong_generators(7, &cyclic, &[0]);
        assert_eq!(direct.order(), StabilizerChain::new(7, &cyclic, &[]).order());
    }
}
