//! Covariance rank of the reservoir signals and linear memory capacity,
//! plus the order statistics used by the sweeps.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{InputVector, NormalizedAdjacency};
use crate::readout::{SvdFactor, DEFAULT_RIDGE};
use crate::reservoir::{run_reservoir, ReservoirConfig, StateMatrix};
use crate::signals::{mean, uniform_drive};

pub const FIXED_RELATIVE_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_K_MAX: usize = 100;
pub const MC_FLOOR: f64 = 1e-4;
pub const MC_FLOOR_RUN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Count singular values above `D * ulp(sigma_max)`, `D` the larger
    /// dimension of the ranked matrix.
    UlpScaled,
    /// Count singular values above `threshold * sigma_max`.
    FixedRelative(f64),
}

impl RankPolicy {
    pub fn fixed_default() -> Self {
        RankPolicy::FixedRelative(FIXED_RELATIVE_THRESHOLD)
    }
}

/// Which matrix built from the state matrix is ranked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankForm {
    /// Sample covariance (centered, divided by N-1) of the node columns.
    #[default]
    NodeCovariance,
    /// Gram matrix of the full state matrix including the bias column.
    GramWithBias,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub gamma: usize,
    pub tolerance_used: f64,
    pub policy: RankPolicy,
    pub form: RankForm,
    /// Spectrum of the ranked matrix, largest first.
    pub singular_values: Vec<f64>,
    /// Spectrum of the state matrix itself, largest first.
    pub omega_singular_values: Vec<f64>,
}

impl RankReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Distance from `x` to the next larger double.
pub fn ulp(x: f64) -> f64 {
    let x = x.abs();
    x.next_up() - x
}

fn sorted_singular_values(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = m
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn ranked_matrix(omega: &DMatrix<f64>, form: RankForm) -> DMatrix<f64> {
    match form {
        RankForm::GramWithBias => omega.tr_mul(omega),
        RankForm::NodeCovariance => {
            let (n, p) = omega.shape();
            let mut x = omega.columns(0, p - 1).into_owned();
            for mut col in x.column_iter_mut() {
                let m = col.mean();
                col.add_scalar_mut(-m);
            }
            x.tr_mul(&x) / (n.max(2) - 1) as f64
        }
    }
}

/// Spectrum (largest first) of the matrix that `form` builds from a
/// state-like matrix whose last column is the bias, and that matrix's
/// larger dimension.
pub fn rank_spectrum(omega: &DMatrix<f64>, form: RankForm) -> Result<(Vec<f64>, usize)> {
    if omega.nrows() == 0 || omega.ncols() < 2 {
        return Err(Error::InvalidParameter("rank needs at least one row and one node column".into()));
    }
    if omega.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let theta = ranked_matrix(omega, form);
    let dim = theta.nrows().max(theta.ncols());
    Ok((sorted_singular_values(theta)?, dim))
}

/// Count the entries of a descending spectrum above the policy tolerance.
/// Returns `(gamma, tolerance)`.
pub fn count_rank(sv: &[f64], dim: usize, policy: RankPolicy) -> Result<(usize, f64)> {
    let smax = sv.first().copied().unwrap_or(0.0);
    let tol = match policy {
        RankPolicy::UlpScaled => dim as f64 * ulp(smax),
        RankPolicy::FixedRelative(t) => {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!("threshold {t} must be non-negative")));
            }
            t * smax
        }
    };
    Ok((sv.iter().filter(|&&s| s > tol).count(), tol))
}

/// Rank of a matrix derived from a state-like matrix (last column = bias).
pub fn rank_of(omega: &DMatrix<f64>, policy: RankPolicy, form: RankForm) -> Result<RankReport> {
    let (sv, dim) = rank_spectrum(omega, form)?;
    let (gamma, tolerance_used) = count_rank(&sv, dim, policy)?;
    let omega_sv = sorted_singular_values(omega.clone())?;
    Ok(RankReport { gamma, tolerance_used, policy, form, singular_values: sv, omega_singular_values: omega_sv })
}

/// Covariance rank of the node signals.
pub fn covariance_rank(omega: &StateMatrix, policy: RankPolicy) -> Result<RankReport> {
    rank_of(omega.values(), policy, RankForm::NodeCovariance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    KMaxReached,
    BelowFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryReport {
    /// `mc_k[i]` is the capacity at delay `i + 1`.
    pub mc_k: Vec<f64>,
    pub mc_total: f64,
    pub k_max: usize,
    pub truncation_reason: Truncation,
}

impl MemoryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Squared Pearson correlation; 0 when either side is constant.
pub fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab * sab / (saa * sbb)).min(1.0)
}

/// Memory capacity from recorded states: row `n` of `omega` was produced
/// after input sample `offset + n`, and the delay-`k` target is
/// `s[offset + n - k]`.
pub fn memory_from_states(
    omega: &DMatrix<f64>,
    s: &[f64],
    offset: usize,
    k_max: usize,
    ridge_k: f64,
) -> Result<MemoryReport> {
    let n = omega.nrows();
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if k_max > offset {
        return Err(Error::InvalidParameter(format!("k_max={k_max} exceeds the {offset} samples preceding the record")));
    }
    if s.len() < offset + n {
        return Err(Error::InputLength { needed: offset + n, got: s.len() });
    }
    let factor = SvdFactor::new(omega)?;
    let mut mc_k = Vec::with_capacity(k_max);
    let mut low_run = 0;
    let mut truncation_reason = Truncation::KMaxReached;
    for k in 1..=k_max {
        let target = &s[offset - k..offset - k + n];
        let c = factor.solve(target, ridge_k)?;
        let h = crate::readout::predict_matrix(omega, &c)?;
        let v = squared_correlation(&h, target);
        mc_k.push(v);
        low_run = if v < MC_FLOOR { low_run + 1 } else { 0 };
        if low_run >= MC_FLOOR_RUN && k < k_max {
            truncation_reason = Truncation::BelowFloor;
            break;
        }
    }
    let mc_total = mc_k.iter().sum();
    Ok(MemoryReport { mc_k, mc_total, k_max, truncation_reason })
}

/// Drive the reservoir with uniform noise on [-1, 1] and measure how
/// well linear readouts recall each past input.
pub fn memory_capacity(
    adj: &NormalizedAdjacency,
    w: &InputVector,
    cfg: &ReservoirConfig,
    k_max: usize,
    seed: u64,
) -> Result<MemoryReport> {
    if k_max > cfg.transient {
        return Err(Error::InvalidParameter(format!("k_max={k_max} exceeds transient={}", cfg.transient)));
    }
    let s = uniform_drive(cfg.input_len(), seed)?;
    let omega = run_reservoir(adj, w, &s, cfg)?;
    memory_from_states(omega.values(), s.samples(), cfg.transient, k_max, DEFAULT_RIDGE)
}

/// Median by full sort; NaN-free input expected. Empty input gives NaN.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Average ranks (1-based), ties share the mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson on average ranks). NaN when either
/// side is constant or lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}
