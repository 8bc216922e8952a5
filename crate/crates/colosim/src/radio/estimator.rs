//! Least-squares SNR/SINR estimation over a known probe.

use num_complex::Complex64;

use super::probe::PnProbe;
use super::RadioError;

/// Estimates above this are reported as floor-limited rather than as a
/// meaningful number; residuals that small are numerical noise.
pub const SNR_REPORT_FLOOR_DB: f64 = 60.0;

/// Post-integration detection margin: the probe is declared present when
/// |g|^2 * P_probe * L exceeds this multiple of the residual power.
const DETECTION_MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrEstimate {
    pub snr_db: f64,
    /// Set when the residual was too small to resolve; `snr_db` is clamped
    /// to [`SNR_REPORT_FLOOR_DB`].
    pub floor_limited: bool,
}

fn project(probe: &PnProbe, received: &[Complex64]) -> Result<SnrEstimate, RadioError> {
    if received.len() != probe.len() || probe.is_empty() {
        return Err(RadioError::LengthMismatch {
            probe: probe.len(),
            received: received.len(),
        });
    }
    let l = probe.len() as f64;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut probe_energy = 0.0;
    for (r, p) in received.iter().zip(probe.chips()) {
        corr += r * p.conj();
        probe_energy += p.norm_sqr();
    }
    let gain = corr / probe_energy;
    let mut residual_energy = 0.0;
    for (r, p) in received.iter().zip(probe.chips()) {
        residual_energy += (r - gain * p).norm_sqr();
    }
    let signal_power = gain.norm_sqr() * probe_energy / l;
    let residual_power = residual_energy / l;

    if signal_power == 0.0 {
        return Err(RadioError::ProbeNotFound { metric: 0.0 });
    }
    if residual_power == 0.0 {
        return Ok(SnrEstimate {
            snr_db: SNR_REPORT_FLOOR_DB,
            floor_limited: true,
        });
    }
    let metric = signal_power * l / residual_power;
    if metric < DETECTION_MARGIN {
        return Err(RadioError::ProbeNotFound { metric });
    }
    let snr = signal_power / residual_power;
    if 10.0 * snr.log10() >= SNR_REPORT_FLOOR_DB {
        Ok(SnrEstimate {
            snr_db: SNR_REPORT_FLOOR_DB,
            floor_limited: true,
        })
    } else {
        Ok(SnrEstimate {
            snr_db: 10.0 * snr.log10(),
            floor_limited: false,
        })
    }
}

/// Least-squares SNR over a probe epoch: fit a single complex gain, then
/// compare fitted signal power against the residual.
pub fn estimate_snr(probe: &PnProbe, received: &[Complex64]) -> Result<SnrEstimate, RadioError> {
    project(probe, received)
}

/// Same machinery as [`estimate_snr`]; with interferers present the residual
/// after projecting out the desired probe is interference plus noise, so the
/// ratio reads as SINR.
pub fn estimate_sinr(probe: &PnProbe, received: &[Complex64]) -> Result<SnrEstimate, RadioError> {
    project(probe, received)
}

/// Delay-tolerant estimation: channels put the probe `k` samples late, so
/// scan lags `0..=max_lag`, pick the correlation peak, and estimate there.
/// `received` must hold `probe.len() + max_lag` samples. Returns the
/// estimate and the lag it was taken at.
pub fn estimate_snr_with_lag(
    probe: &PnProbe,
    received: &[Complex64],
    max_lag: usize,
) -> Result<(SnrEstimate, usize), RadioError> {
    if probe.is_empty() || received.len() < probe.len() + max_lag {
        return Err(RadioError::LengthMismatch {
            probe: probe.len() + max_lag,
            received: received.len(),
        });
    }
    let l = probe.len();
    let mut best_lag = 0usize;
    let mut best_power = -1.0f64;
    for lag in 0..=max_lag {
        let mut corr = Complex64::new(0.0, 0.0);
        for (r, p) in received[lag..lag + l].iter().zip(probe.chips()) {
            corr += r * p.conj();
        }
        let power = corr.norm_sqr();
        if power > best_power {
            best_power = power;
            best_lag = lag;
        }
    }
    let est = project(probe, &received[best_lag..best_lag + l])?;
    Ok((est, best_lag))
}

/// SINR variant of [`estimate_snr_with_lag`].
pub fn estimate_sinr_with_lag(
    probe: &PnProbe,
    received: &[Complex64],
    max_lag: usize,
) -> Result<(SnrEstimate, usize), RadioError> {
    estimate_snr_with_lag(probe, received, max_lag)
}
