//! Reservoir dynamics: polynomial ODE nodes integrated with RK4, and leaky
//! tanh map nodes. Driving a reservoir produces the state matrix.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{InputVector, NormalizedAdjacency};
use crate::ode::{rk4_step, Rk4Workspace};
use crate::rng;
use crate::signals::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Polynomial,
    /// Polynomial with the quadratic and cubic terms removed.
    Linear,
    LeakyTanh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReservoirConfig {
    pub node_kind: NodeKind,
    pub size: usize,
    pub lambda: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub alpha: f64,
    /// Integration step per input sample (ODE kinds).
    pub dt: f64,
    /// RK4 steps per input sample; each sample is held over all of them.
    pub substeps: usize,
    pub transient: usize,
    pub n_record: usize,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            node_kind: NodeKind::Polynomial,
            size: 100,
            lambda: 1.0,
            p1: -3.0,
            p2: 1.0,
            p3: -1.0,
            alpha: 0.35,
            dt: 0.1,
            substeps: 1,
            transient: 2000,
            n_record: 10_000,
        }
    }
}

impl ReservoirConfig {
    pub fn polynomial(lambda: f64) -> Self {
        Self { lambda, ..Self::default() }
    }

    pub fn linear(lambda: f64) -> Self {
        Self { node_kind: NodeKind::Linear, lambda, p2: 0.0, p3: 0.0, ..Self::default() }
    }

    pub fn leaky_tanh(alpha: f64) -> Self {
        Self { node_kind: NodeKind::LeakyTanh, alpha, ..Self::default() }
    }

    /// Polynomial coefficients actually used; the linear kind ignores p2, p3.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        match self.node_kind {
            NodeKind::Linear => (self.p1, 0.0, 0.0),
            _ => (self.p1, self.p2, self.p3),
        }
    }

    /// Input samples consumed by one run.
    pub fn input_len(&self) -> usize {
        self.transient + self.n_record
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.size == 0 {
            return bad("reservoir size must be positive".into());
        }
        if self.n_record == 0 {
            return bad("n_record must be positive".into());
        }
        match self.node_kind {
            NodeKind::LeakyTanh => {
                if !(0.0..=1.0).contains(&self.alpha) {
                    return bad(format!("alpha={} must lie in [0, 1]", self.alpha));
                }
            }
            _ => {
                if !(self.dt > 0.0 && self.dt.is_finite()) {
                    return bad(format!("dt={} must be positive", self.dt));
                }
                if self.substeps == 0 {
                    return bad("substeps must be positive".into());
                }
                if !self.lambda.is_finite() {
                    return bad("lambda must be finite".into());
                }
            }
        }
        Ok(())
    }
}

/// Recorded node signals, one row per time step, plus a trailing column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    values: DMatrix<f64>,
}

impl StateMatrix {
    /// Append the bias column to an `N x M` block of node signals.
    pub fn from_nodes(nodes: &DMatrix<f64>) -> Result<Self> {
        if nodes.nrows() == 0 {
            return Err(Error::InvalidParameter("state matrix has no rows".into()));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("state matrix has non-finite entries".into()));
        }
        let (n, m) = nodes.shape();
        let values = DMatrix::from_fn(n, m + 1, |i, j| if j == m { 1.0 } else { nodes[(i, j)] });
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Number of reservoir nodes (columns without the bias).
    pub fn n_nodes(&self) -> usize {
        self.values.ncols() - 1
    }

    pub fn nodes(&self) -> DMatrix<f64> {
        self.values.columns(0, self.n_nodes()).into_owned()
    }

    /// CSV with a header row of column indices.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (0..self.ncols()).map(|j| j.to_string()).collect();
        writeln!(w, "{}", header.join(","))?;
        for row in self.values.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

struct Dynamics<'a> {
    m: usize,
    a: Vec<f64>,
    w: &'a [f64],
    cfg: &'a ReservoirConfig,
}

impl<'a> Dynamics<'a> {
    fn new(adj: &NormalizedAdjacency, w: &'a InputVector, cfg: &'a ReservoirConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.size;
        if adj.size() != m || adj.entries.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "adjacency is {}x{}, reservoir has {m} nodes",
                adj.entries.nrows(),
                adj.entries.ncols()
            )));
        }
        if w.len() != m {
            return Err(Error::DimensionMismatch(format!("input vector has {} entries, expected {m}", w.len())));
        }
        // row-major copy for the inner matrix-vector product
        let a = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| adj.entries[(i, j)]).collect();
        Ok(Self { m, a, w: &w.entries, cfg })
    }

    /// Advance the state by one input sample `u`.
    fn advance(&self, r: &mut [f64], u: f64, ws: &mut Rk4Workspace, scratch: &mut [f64]) {
        let m = self.m;
        let cfg = self.cfg;
        match cfg.node_kind {
            NodeKind::LeakyTanh => {
                for i in 0..m {
                    let row = &self.a[i * m..(i + 1) * m];
                    let ar: f64 = row.iter().zip(r.iter()).map(|(a, x)| a * x).sum();
                    scratch[i] = cfg.alpha * r[i] + (1.0 - cfg.alpha) * (ar + self.w[i] * u + 1.0).tanh();
                }
                r.copy_from_slice(scratch);
            }
            NodeKind::Polynomial | NodeKind::Linear => {
                let (p1, p2, p3) = cfg.coefficients();
                let lambda = cfg.lambda;
                let mut rhs = |x: &[f64], d: &mut [f64]| {
                    for i in 0..m {
                        let row = &self.a[i * m..(i + 1) * m];
                        let ar: f64 = row.iter().zip(x.iter()).map(|(a, y)| a * y).sum();
                        let xi = x[i];
                        d[i] = lambda * (xi * (p1 + xi * (p2 + xi * p3)) + ar + self.w[i] * u);
                    }
                };
                let h = cfg.dt / cfg.substeps as f64;
                for _ in 0..cfg.substeps {
                    rk4_step(&mut rhs, r, h, ws);
                }
            }
        }
    }
}

/// Drive the reservoir with `s` from the zero state, discard the first
/// `transient` steps and record the next `n_record`.
///
/// Row `n` of the result is the state after consuming input sample
/// `transient + n`. The input is used as given; callers standardize it.
pub fn run_reservoir(
    adj: &NormalizedAdjacency,
    w: &InputVector,
    s: &TimeSeries,
    cfg: &ReservoirConfig,
) -> Result<StateMatrix> {
    let dyn_ = Dynamics::new(adj, w, cfg)?;
    let needed = cfg.input_len();
    if s.len() < needed {
        return Err(Error::InputLength { needed, got: s.len() });
    }
    let m = cfg.size;
    let mut r = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut ws = Rk4Workspace::new(m);
    let mut values = DMatrix::<f64>::from_element(cfg.n_record, m + 1, 1.0);
    for (step, &u) in s.samples()[..needed].iter().enumerate() {
        dyn_.advance(&mut r, u, &mut ws, &mut scratch);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable { step, epsilon_f: None });
        }
        if step >= cfg.transient {
            let row = step - cfg.transient;
            for (j, &v) in r.iter().enumerate() {
                values[(row, j)] = v;
            }
        }
    }
    Ok(StateMatrix { values })
}

const PROBE_SEED: u64 = 0x5eed_0f_5ab1e;
const PROBE_AMPLITUDE: f64 = 1e-2;
const PROBE_TOLERANCE: f64 = 1e-6;

/// Undriven settling test: start near the origin and report whether the
/// state stops moving (successive states closer than 1e-6) within
/// `transient` steps.
pub fn stability_probe(adj: &NormalizedAdjacency, w: &InputVector, cfg: &ReservoirConfig) -> Result<bool> {
    let dyn_ = Dynamics::new(adj, w, cfg)?;
    let m = cfg.size;
    let mut g = rng::rng(PROBE_SEED);
    let mut r: Vec<f64> = (0..m).map(|_| g.random_range(-PROBE_AMPLITUDE..PROBE_AMPLITUDE)).collect();
    let mut prev = r.clone();
    let mut scratch = vec![0.0; m];
    let mut ws = Rk4Workspace::new(m);
    for _ in 0..cfg.transient.max(1) {
        dyn_.advance(&mut r, 0.0, &mut ws, &mut scratch);
        if r.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        let moved = r.iter().zip(&prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if moved < PROBE_TOLERANCE {
            return Ok(true);
        }
        prev.copy_from_slice(&r);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{make_input_vector, InputKind};

    fn small(kind: NodeKind, m: usize, transient: usize, n_record: usize) -> ReservoirConfig {
        let base = match kind {
            NodeKind::Polynomial => ReservoirConfig::polynomial(1.0),
            NodeKind::Linear => ReservoirConfig::linear(1.0),
            NodeKind::LeakyTanh => ReservoirConfig::leaky_tanh(0.35),
        };
        ReservoirConfig { size: m, transient, n_record, ..base }
    }

    fn series(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v, 1.0).unwrap()
    }

    #[test]
    fn tanh_fixed_point() {
        let cfg = small(NodeKind::LeakyTanh, 5, 200, 20);
        let w = InputVector { entries: vec![0.0; 5], kind: InputKind::AllOnes };
        let om = run_reservoir(&NormalizedAdjacency::zeros(5), &w, &series(vec![0.3; 220]), &cfg).unwrap();
        let r_star = 1f64.tanh();
        for row in om.values().row_iter() {
            for j in 0..5 {
                assert!((row[j] - r_star).abs() < 1e-9);
            }
            assert_eq!(row[5], 1.0);
        }
    }

    #[test]
    fn polynomial_origin_is_fixed() {
        let cfg = small(NodeKind::Polynomial, 4, 10, 30);
        let w = make_input_vector(4, InputKind::Alternating, 0);
        let om = run_reservoir(&NormalizedAdjacency::zeros(4), &w, &series(vec![0.0; 40]), &cfg).unwrap();
        assert!(om.nodes().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_step_response() {
        let w = InputVector { entries: vec![1.0], kind: InputKind::AllOnes };
        let step = series(vec![1.0; 200]);
        let exact = |t: f64| (1.0 - (-3.0 * t).exp()) / 3.0;
        // one RK4 step multiplies the homogeneous part by R(z), z = -3 lambda dt
        let z: f64 = -0.3;
        let amp = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;

        let cfg = small(NodeKind::Linear, 1, 0, 200);
        let om = run_reservoir(&NormalizedAdjacency::zeros(1), &w, &step, &cfg).unwrap();
        for n in 0..200 {
            let r = om.values()[(n, 0)];
            assert!((r - (1.0 - amp.powi(n as i32 + 1)) / 3.0).abs() < 1e-12, "n={n}");
            assert!((r - exact((n + 1) as f64 * 0.1)).abs() < 1.1e-5, "n={n}");
        }

        let fine = ReservoirConfig { substeps: 4, ..cfg };
        let om = run_reservoir(&NormalizedAdjacency::zeros(1), &w, &step, &fine).unwrap();
        for n in 0..200 {
            assert!((om.values()[(n, 0)] - exact((n + 1) as f64 * 0.1)).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn too_short_input() {
        let cfg = small(NodeKind::Polynomial, 2, 10, 10);
        let w = make_input_vector(2, InputKind::AllOnes, 0);
        let err = run_reservoir(&NormalizedAdjacency::zeros(2), &w, &series(vec![0.0; 15]), &cfg).unwrap_err();
        assert!(matches!(err, Error::InputLength { needed: 20, got: 15 }));
    }

    #[test]
    fn dimension_checks() {
        let cfg = small(NodeKind::Polynomial, 3, 0, 5);
        let w = make_input_vector(2, InputKind::AllOnes, 0);
        assert!(run_reservoir(&NormalizedAdjacency::zeros(3), &w, &series(vec![0.0; 5]), &cfg).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let mut cfg = small(NodeKind::Polynomial, 2, 0, 100);
        cfg.p3 = 1.0;
        cfg.lambda = 5.0;
        let w = make_input_vector(2, InputKind::AllOnes, 0);
        let err = run_reservoir(&NormalizedAdjacency::zeros(2), &w, &series(vec![3.0; 100]), &cfg).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }

    #[test]
    fn probes() {
        let w = make_input_vector(4, InputKind::Alternating, 0);
        let z = NormalizedAdjacency::zeros(4);
        assert!(stability_probe(&z, &w, &small(NodeKind::LeakyTanh, 4, 2000, 1)).unwrap());
        assert!(stability_probe(&z, &w, &small(NodeKind::Polynomial, 4, 2000, 1)).unwrap());
        // strong positive feedback pushes the polynomial nodes off the origin
        let hot = NormalizedAdjacency::raw(DMatrix::from_element(4, 4, 20.0));
        let _ = stability_probe(&hot, &w, &small(NodeKind::Polynomial, 4, 2000, 1)).unwrap();
    }
}
