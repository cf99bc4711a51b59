//! Linear readout trained by ridge regression through a thin SVD.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::StateMatrix;
use crate::signals::population_std;

pub const DEFAULT_RIDGE: f64 = 1e-5;

const SVD_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub ridge_k: f64,
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    pub singular_values: Vec<f64>,
}

impl ReadoutModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: ReadoutModel = serde_json::from_str(s)?;
        if !(m.ridge_k > 0.0) || m.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parse("readout model has invalid ridge or coefficients".into()));
        }
        Ok(m)
    }
}

/// Thin SVD `omega = U S V^T` computed as a QR factorization followed by an
/// SVD of the small triangular factor. One factorization serves any number
/// of targets.
#[derive(Debug, Clone)]
pub struct SvdFactor {
    q: DMatrix<f64>,
    u_r: DMatrix<f64>,
    s: DVector<f64>,
    v: DMatrix<f64>,
}

impl SvdFactor {
    pub fn new(omega: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = omega.shape();
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter("cannot factor an empty matrix".into()));
        }
        if omega.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("matrix has non-finite entries".into()));
        }
        let (q, r) = if n > p {
            let qr = omega.clone().qr();
            (qr.q(), qr.r())
        } else {
            (DMatrix::identity(n, n), omega.clone())
        };
        let svd = r
            .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
            .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
        let u_r = svd.u.ok_or_else(|| Error::Numeric("SVD returned no U".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD returned no V".into()))?;
        Ok(Self { q, u_r, s: svd.singular_values, v: v_t.transpose() })
    }

    pub fn nrows(&self) -> usize {
        self.q.nrows()
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.s.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `C = V S' U^T g` with `S'_ii = S_ii / (S_ii^2 + k^2)`.
    pub fn solve(&self, g: &[f64], ridge_k: f64) -> Result<Vec<f64>> {
        if g.len() != self.nrows() {
            return Err(Error::DimensionMismatch(format!("target has {} samples, matrix has {} rows", g.len(), self.nrows())));
        }
        if !(ridge_k > 0.0 && ridge_k.is_finite()) {
            return Err(Error::InvalidParameter(format!("ridge k={ridge_k} must be positive")));
        }
        let g = DVector::from_column_slice(g);
        let mut t = self.u_r.tr_mul(&self.q.tr_mul(&g));
        for (ti, &si) in t.iter_mut().zip(self.s.iter()) {
            *ti *= si / (si * si + ridge_k * ridge_k);
        }
        let c = &self.v * t;
        Ok(c.iter().copied().collect())
    }
}

pub fn fit_matrix(omega: &DMatrix<f64>, g: &[f64], ridge_k: f64) -> Result<ReadoutModel> {
    if g.len() != omega.nrows() {
        return Err(Error::DimensionMismatch(format!("target has {} samples, matrix has {} rows", g.len(), omega.nrows())));
    }
    let f = SvdFactor::new(omega)?;
    let coeffs = f.solve(g, ridge_k)?;
    Ok(ReadoutModel { ridge_k, coeffs, singular_values: f.singular_values() })
}

/// Fit readout coefficients mapping the state matrix onto `g`.
pub fn fit(omega: &StateMatrix, g: &[f64], ridge_k: f64) -> Result<ReadoutModel> {
    fit_matrix(omega.values(), g, ridge_k)
}

pub fn predict_matrix(omega: &DMatrix<f64>, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != omega.ncols() {
        return Err(Error::DimensionMismatch(format!("{} coefficients for {} columns", coeffs.len(), omega.ncols())));
    }
    Ok((omega * DVector::from_column_slice(coeffs)).iter().copied().collect())
}

pub fn predict(omega: &StateMatrix, model: &ReadoutModel) -> Result<Vec<f64>> {
    predict_matrix(omega.values(), &model.coeffs)
}

/// `std(h - g) / std(g)`, population convention.
pub fn relative_error(h: &[f64], g: &[f64]) -> Result<f64> {
    if h.len() != g.len() {
        return Err(Error::DimensionMismatch(format!("{} fitted vs {} target samples", h.len(), g.len())));
    }
    let sg = population_std(g);
    if sg == 0.0 || !sg.is_finite() {
        return Err(Error::ZeroVariance);
    }
    let resid: Vec<f64> = h.iter().zip(g).map(|(a, b)| a - b).collect();
    Ok(population_std(&resid) / sg)
}

pub fn training_error(omega: &StateMatrix, model: &ReadoutModel, g: &[f64]) -> Result<f64> {
    relative_error(&predict(omega, model)?, g)
}

/// Error of frozen coefficients on a different realization.
pub fn testing_error(omega_test: &StateMatrix, model: &ReadoutModel, g_test: &[f64]) -> Result<f64> {
    relative_error(&predict(omega_test, model)?, g_test)
}
