//! Per-UAV SINR, minimum SINR, sum rate and unit conversions.

use thiserror::Error;

use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("cannot express non-positive value {0} in dB")]
pub struct NonPositiveError(pub f64);

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> Result<f64, NonPositiveError> {
    Ok(linear_to_db(watts)? + 30.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64, NonPositiveError> {
    if x > 0.0 {
        Ok(10.0 * x.log10())
    } else {
        Err(NonPositiveError(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    /// Linear SINR per UAV.
    pub per_uav_sinr: Vec<f64>,
    pub min_sinr: f64,
    /// `min_sinr` in dB; floored at the smallest positive double when the
    /// minimum is exactly zero.
    pub min_sinr_db: f64,
    /// Bits/s/Hz.
    pub sum_rate: f64,
}

impl SinrReport {
    pub fn per_uav_sinr_db(&self) -> Vec<f64> {
        self.per_uav_sinr.iter().map(|&g| floored_db(g)).collect()
    }
}

fn floored_db(x: f64) -> f64 {
    10.0 * x.max(f64::MIN_POSITIVE).log10()
}

/// SINR of every UAV given the effective channel `(HΦG)·F̂`, whose entry
/// `[u, i]` is the amplitude of stream `i` at UAV `u`.
pub fn sinr_report(effective: &CMatrix, noise_power: f64) -> SinrReport {
    assert_eq!(effective.rows(), effective.cols(), "effective channel must be N_U x N_U");
    assert!(noise_power > 0.0, "noise power must be positive");
    let per_uav_sinr: Vec<f64> = (0..effective.rows())
        .map(|u| {
            let row = effective.row(u);
            let signal = row[u].norm_sqr();
            let interference: f64 = row
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != u)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            signal / (interference + noise_power)
        })
        .collect();
    let min_sinr = per_uav_sinr.iter().cloned().fold(f64::INFINITY, f64::min);
    let sum_rate = per_uav_sinr.iter().map(|g| (1.0 + g).log2()).sum();
    SinrReport {
        min_sinr_db: floored_db(min_sinr),
        per_uav_sinr,
        min_sinr,
        sum_rate,
    }
}
