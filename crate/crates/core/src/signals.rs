//! Input and training signals: Lorenz trajectories, the driven quadratic
//! map, and uniform random drive.

use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{rk4_step, Rk4Workspace};
use crate::rng;

/// A uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    step: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, step: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("time series is empty".into()));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("sampling step {step} must be positive")));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite sample at index {k}")));
        }
        Ok(Self { samples, step })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        population_std(&self.samples)
    }

    /// Keep every `stride`-th sample.
    pub fn decimate(&self, stride: usize) -> Result<TimeSeries> {
        if stride == 0 {
            return Err(Error::InvalidParameter("stride must be positive".into()));
        }
        TimeSeries::new(
            self.samples.iter().step_by(stride).copied().collect(),
            self.step * stride as f64,
        )
    }

    /// Two-column CSV (`index,value`) with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{v:?}")?;
        }
        Ok(())
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-pass population standard deviation (divide by N).
pub(crate) fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Integration step.
    pub ts: f64,
    pub init: [f64; 3],
    /// Number of recorded samples.
    pub n_steps: usize,
    /// Integration steps discarded before recording starts.
    pub discard: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            c1: 10.0,
            c2: 28.0,
            c3: 8.0 / 3.0,
            ts: 0.02,
            init: [1.0, 1.0, 1.0],
            n_steps: 12_000,
            discard: 5_000,
        }
    }
}

impl LorenzParams {
    /// Same system started from a seed-derived initial condition.
    pub fn with_seeded_init(mut self, seed: u64) -> Self {
        let mut r = rng::rng(seed);
        self.init = [
            r.random_range(-10.0..10.0),
            r.random_range(-10.0..10.0),
            r.random_range(5.0..40.0),
        ];
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::InvalidParameter(format!("Lorenz step ts={} must be positive", self.ts)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("Lorenz n_steps must be positive".into()));
        }
        Ok(())
    }
}

fn lorenz_rhs(p: &LorenzParams) -> impl FnMut(&[f64], &mut [f64]) + '_ {
    move |s: &[f64], d: &mut [f64]| {
        d[0] = p.c1 * s[1] - p.c1 * s[0];
        d[1] = s[0] * (p.c2 - s[2]) - s[1];
        d[2] = s[0] * s[1] - p.c3 * s[2];
    }
}

/// Integrate the Lorenz system with RK4 and return the `x`, `y`, `z`
/// series, one sample per integration step after the discarded lead-in.
pub fn lorenz_generate(params: &LorenzParams) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    params.validate()?;
    let mut state = params.init;
    let mut ws = Rk4Workspace::new(3);
    let mut rhs = lorenz_rhs(params);
    let mut out = [
        Vec::with_capacity(params.n_steps),
        Vec::with_capacity(params.n_steps),
        Vec::with_capacity(params.n_steps),
    ];

    for step in 0..params.discard + params.n_steps {
        if step >= params.discard {
            for (o, v) in out.iter_mut().zip(state) {
                o.push(v);
            }
        }
        rk4_step(&mut rhs, &mut state, params.ts, &mut ws);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
    }

    let [x, y, z] = out;
    Ok((
        TimeSeries::new(x, params.ts)?,
        TimeSeries::new(y, params.ts)?,
        TimeSeries::new(z, params.ts)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub n_steps: usize,
    pub y0: f64,
    pub rng_seed: u64,
}

/// One step of the driven quadratic map.
#[inline]
pub fn map_step(y: f64, x: f64) -> f64 {
    0.3 * y + 0.05 * y * y + 1.5 * x * x + 0.1
}

/// Response `y(0..n)` of the quadratic map to an explicit drive `x`, with
/// `y(k+1)` computed from `y(k)` and `x(k)`.
pub fn map_response(x: &[f64], y0: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len());
    let mut cur = y0;
    for &xk in x {
        y.push(cur);
        cur = map_step(cur, xk);
    }
    y
}

/// Draw `x(k)` uniform on `[0, 0.5]` and iterate the map.
pub fn map_generate(params: &MapParams) -> Result<(TimeSeries, TimeSeries)> {
    if params.n_steps == 0 {
        return Err(Error::InvalidParameter("map n_steps must be positive".into()));
    }
    let mut r = rng::rng(params.rng_seed);
    let x: Vec<f64> = (0..params.n_steps).map(|_| r.random_range(0.0..=0.5)).collect();
    let y = map_response(&x, params.y0);
    Ok((TimeSeries::new(x, 1.0)?, TimeSeries::new(y, 1.0)?))
}

/// Subtract the mean and scale to unit population standard deviation.
pub fn standardize(s: &TimeSeries) -> Result<TimeSeries> {
    if s.len() < 2 {
        return Err(Error::InvalidParameter("standardize needs at least two samples".into()));
    }
    let m = s.mean();
    let centered: Vec<f64> = s.samples.iter().map(|v| v - m).collect();
    let sd = population_std(&centered);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::ZeroVariance);
    }
    let mut out: Vec<f64> = centered.iter().map(|v| v / sd).collect();
    // second centering pass removes the rounding residue of the first
    let m2 = mean(&out);
    out.iter_mut().for_each(|v| *v -= m2);
    TimeSeries::new(out, s.step)
}

/// I.i.d. samples uniform on `[-1, 1]`.
pub fn uniform_drive(n: usize, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::InvalidParameter("drive length must be positive".into()));
    }
    let mut r = rng::rng(seed);
    TimeSeries::new((0..n).map(|_| r.random_range(-1.0..=1.0)).collect(), 1.0)
}
