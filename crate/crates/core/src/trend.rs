//! Haar wavelet decomposition of the belief-history signal and
//! sharp-variation-point counting.
//!
//! Orthonormal Haar: at every level
//! `approx[i] = (x[2i] + x[2i+1]) / √2` and `detail[i] = (x[2i] - x[2i+1]) / √2`,
//! repeated on the approximation until a single coefficient remains.
//! Inputs whose length is not a power of two are right-padded with their last
//! sample.

use serde::Serialize;
use thiserror::Error;

/// Detail coefficients smaller than this are treated as having no sign.
pub const ZERO_DETAIL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("need at least 2 samples for a wavelet decomposition, got {0}")]
    InsufficientHistory(usize),
    #[error("signal contains a non-finite sample at index {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DwtLevel {
    pub approx: Vec<f64>,
    pub detail: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DwtResult {
    /// Finest level first; the last level has a single coefficient.
    pub levels: Vec<DwtLevel>,
    pub original_len: usize,
    pub padded_len: usize,
}

impl DwtResult {
    /// Coefficient of the coarsest approximation.
    pub fn deepest_approx(&self) -> f64 {
        self.levels.last().expect("at least one level").approx[0]
    }

    /// Reconstructs the padded signal.
    pub fn inverse(&self) -> Vec<f64> {
        let mut current = vec![self.deepest_approx()];
        for level in self.levels.iter().rev() {
            current = current
                .iter()
                .zip(&level.detail)
                .flat_map(|(a, d)| [(a + d) / SQRT_2, (a - d) / SQRT_2])
                .collect();
        }
        current
    }

    /// Largest possible number of sign changes:
    /// `Σ_levels max(detail_len - 1, 0)`.
    pub fn max_crossings(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.detail.len().saturating_sub(1))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendResult {
    pub ncp: usize,
    pub ncp_ratio: f64,
    pub dwt: DwtResult,
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn haar_dwt(signal: &[f64]) -> Result<DwtResult, TrendError> {
    if signal.len() < 2 {
        return Err(TrendError::InsufficientHistory(signal.len()));
    }
    if let Some(i) = signal.iter().position(|x| !x.is_finite()) {
        return Err(TrendError::NonFinite(i));
    }
    let padded_len = signal.len().next_power_of_two();
    let mut current = signal.to_vec();
    current.resize(padded_len, *signal.last().expect("non-empty"));

    let mut levels = Vec::new();
    while current.len() > 1 {
        let (approx, detail): (Vec<f64>, Vec<f64>) = current
            .chunks_exact(2)
            .map(|p| ((p[0] + p[1]) / SQRT_2, (p[0] - p[1]) / SQRT_2))
            .unzip();
        current = approx.clone();
        levels.push(DwtLevel { approx, detail });
    }
    Ok(DwtResult {
        levels,
        original_len: signal.len(),
        padded_len,
    })
}

/// Strict sign changes between consecutive detail coefficients, summed over
/// all levels. Near-zero coefficients are skipped.
pub fn count_sharp_points(dwt: &DwtResult) -> usize {
    dwt.levels
        .iter()
        .map(|level| {
            let mut last_sign = 0.0;
            let mut count = 0;
            for d in &level.detail {
                if d.abs() < ZERO_DETAIL {
                    continue;
                }
                let sign = d.signum();
                if last_sign != 0.0 && sign != last_sign {
                    count += 1;
                }
                last_sign = sign;
            }
            count
        })
        .sum()
}

pub fn ncp_ratio(ncp: usize, dwt: &DwtResult) -> f64 {
    let max = dwt.max_crossings();
    if max == 0 {
        0.0
    } else {
        (ncp as f64 / max as f64).min(1.0)
    }
}

pub fn analyze(signal: &[f64]) -> Result<TrendResult, TrendError> {
    let dwt = haar_dwt(signal)?;
    let ncp = count_sharp_points(&dwt);
    Ok(TrendResult {
        ncp,
        ncp_ratio: ncp_ratio(ncp, &dwt),
        dwt,
    })
}
