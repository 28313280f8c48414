//! Evaluation quantities: approximate entropy, the D_f chaos ratio of
//! coded versus raw bitplanes, the rate gain, and the effective
//! bits-per-pixel fraction.

use std::collections::HashMap;

use thiserror::Error;

use crate::bitplanes::BitSeq;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("series of length {len} too short for window size {m}")]
    SeriesTooShort { len: usize, m: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("planes used K={planes} must be in 1..=eta ({eta})")]
    PlanesOutOfRange { planes: usize, eta: usize },
}

/// Approximate-entropy parameters; the defaults are window size 2 and an
/// absolute tolerance of 0.2 (below the 0/1 gap, so binary windows match
/// only when equal).
#[derive(Debug, Clone, Copy)]
pub struct ApEnConfig {
    pub window: usize,
    pub tolerance: f64,
}

impl Default for ApEnConfig {
    fn default() -> Self {
        ApEnConfig {
            window: 2,
            tolerance: 0.2,
        }
    }
}

impl ApEnConfig {
    fn validate(&self) -> Result<(), MetricsError> {
        if self.window < 1 {
            return Err(MetricsError::InvalidConfig("window must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(MetricsError::InvalidConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Approximate entropy in the classic formulation: `phi_m - phi_{m+1}`,
/// where `phi_m` averages the log fraction of length-m windows within
/// Chebyshev distance `tolerance` of each window, self-matches included.
/// The tolerance is absolute, not scaled by the series deviation.
pub fn apen(series: &[f64], config: ApEnConfig) -> Result<f64, MetricsError> {
    config.validate()?;
    let m = config.window;
    if series.len() <= m + 1 {
        return Err(MetricsError::SeriesTooShort {
            len: series.len(),
            m,
        });
    }
    if equality_semantics(series, config.tolerance) {
        Ok(phi_exact(series, m) - phi_exact(series, m + 1))
    } else {
        Ok(phi_scan(series, m, config.tolerance) - phi_scan(series, m + 1, config.tolerance))
    }
}

/// True when no two distinct values are within the tolerance of each
/// other, so "within tolerance" degenerates to window equality. Binary
/// planes at the default 0.2 always qualify.
fn equality_semantics(series: &[f64], tolerance: f64) -> bool {
    let mut values = series.to_vec();
    if values.iter().any(|v| v.is_nan()) {
        return false;
    }
    values.sort_unstable_by(f64::total_cmp);
    values
        .windows(2)
        .all(|w| w[0] == w[1] || w[1] - w[0] > tolerance)
}

/// Exact-match counting: bucket identical windows, then
/// `phi = sum_g c_g ln(c_g / count) / count`.
fn phi_exact(series: &[f64], m: usize) -> f64 {
    let count = series.len() - m + 1;
    let mut buckets: HashMap<Vec<u64>, usize> = HashMap::new();
    for i in 0..count {
        // +0.0 folds -0.0 onto +0.0 so the bit pattern is canonical.
        let key: Vec<u64> = series[i..i + m].iter().map(|v| (v + 0.0).to_bits()).collect();
        *buckets.entry(key).or_insert(0) += 1;
    }
    buckets
        .values()
        .map(|&c| c as f64 * (c as f64 / count as f64).ln())
        .sum::<f64>()
        / count as f64
}

/// General Chebyshev scan, quadratic in the window count.
fn phi_scan(series: &[f64], m: usize, tolerance: f64) -> f64 {
    let count = series.len() - m + 1;
    let mut log_sum = 0.0;
    for i in 0..count {
        let mut matches = 0usize;
        'window: for j in 0..count {
            for k in 0..m {
                if (series[i + k] - series[j + k]).abs() > tolerance {
                    continue 'window;
                }
            }
            matches += 1;
        }
        log_sum += (matches as f64 / count as f64).ln();
    }
    log_sum / count as f64
}

/// ApEn of a bit sequence, bits lifted to 0.0/1.0.
pub fn apen_bits(bits: &BitSeq, config: ApEnConfig) -> Result<f64, MetricsError> {
    let series: Vec<f64> = (0..bits.len()).map(|i| bits.get(i) as u8 as f64).collect();
    apen(&series, config)
}

/// The D_f chaos ratio: summed ApEn of the coded planes over summed ApEn
/// of the raw planes. `None` when the raw planes are all perfectly regular
/// (zero denominator), which the caller must handle explicitly.
pub fn df_ratio(
    raw_planes: &[BitSeq],
    coded_planes: &[BitSeq],
    config: ApEnConfig,
) -> Result<Option<f64>, MetricsError> {
    let numerator: f64 = coded_planes
        .iter()
        .map(|p| apen_bits(p, config))
        .sum::<Result<f64, _>>()?;
    let denominator: f64 = raw_planes
        .iter()
        .map(|p| apen_bits(p, config))
        .sum::<Result<f64, _>>()?;
    if denominator == 0.0 {
        return Ok(None);
    }
    Ok(Some(numerator / denominator))
}

/// Rate gain `R / (K / eta)`: syndrome bits per transmitted plane bit when
/// only K of the eta available planes are kept.
pub fn rate_gain(rate: f64, planes_used: usize, eta: usize) -> Result<f64, MetricsError> {
    if planes_used == 0 || planes_used > eta {
        return Err(MetricsError::PlanesOutOfRange {
            planes: planes_used,
            eta,
        });
    }
    Ok(rate / (planes_used as f64 / eta as f64))
}

/// Fraction of the original pixel bits actually transmitted:
/// `R * (K / eta) * tau_fraction`. This is the bits-per-pixel axis of the
/// rate/accuracy trade-off, as a fraction of the uncoded depth.
pub fn effective_bpp_fraction(
    rate: f64,
    planes_used: usize,
    eta: usize,
    tau_fraction: f64,
) -> Result<f64, MetricsError> {
    if planes_used == 0 || planes_used > eta {
        return Err(MetricsError::PlanesOutOfRange {
            planes: planes_used,
            eta,
        });
    }
    Ok(rate * (planes_used as f64 / eta as f64) * tau_fraction)
}

/// Per-run rate bookkeeping.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RateSummary {
    pub rate: f64,
    pub planes_used: usize,
    pub eta: usize,
    pub tau_fraction: f64,
    pub gamma: f64,
    pub effective_bpp_fraction: f64,
}

impl RateSummary {
    pub fn new(
        rate: f64,
        planes_used: usize,
        eta: usize,
        tau_fraction: f64,
    ) -> Result<Self, MetricsError> {
        Ok(RateSummary {
            rate,
            planes_used,
            eta,
            tau_fraction,
            gamma: rate_gain(rate, planes_used, eta)?,
            effective_bpp_fraction: effective_bpp_fraction(rate, planes_used, eta, tau_fraction)?,
        })
    }
}

/// Classification accuracy of index predictions against labels.
pub fn accuracy(predictions: &[usize], labels: &[u8]) -> f64 {
    assert_eq!(predictions.len(), labels.len());
    if predictions.is_empty() {
        return 0.0;
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| p == l as usize)
        .count();
    hits as f64 / predictions.len() as f64
}
