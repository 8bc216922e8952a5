//! Propagation models: pathloss, delay quantization, SNR anchoring, fading.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::TAP_SLOTS;
use crate::rng::{domain, Key};
use crate::scenario::ScenarioError;
use crate::SPEED_OF_LIGHT_M_S;

#[derive(Debug, Error)]
pub enum CompilerError {
    #[error("invalid parameters: {field}: {message}")]
    InvalidParams {
        field: &'static str,
        message: String,
    },
    #[error("distance {d_m} m is below the reference distance {d0_m} m")]
    BelowReferenceDistance { d_m: f64, d0_m: f64 },
    #[error("delay budget exceeded: {distance_m:.1} m maps to tap {tap:.1}; the 512-slot window allows at most {max_m:.1} m at this sample rate")]
    DelayBudget {
        distance_m: f64,
        tap: f64,
        max_m: f64,
    },
    #[error("node {node} leaves the terrain at t = {t_ms} ms: ({x:.1}, {y:.1}, {z:.1})")]
    TerrainViolation {
        node: usize,
        t_ms: u64,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("trajectory set invalid: {0}")]
    NodeCount(String),
    #[error("scenario duration must be > 0")]
    ZeroDuration,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathlossModel {
    /// Free-space pathloss: |g| = c / (4 pi d f).
    Fspl,
    /// Log-distance: |g(d)|^2 = |g(d0)|^2 * (d0/d)^exponent, anchored to
    /// free-space at the reference distance.
    LogDistance { exponent: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FadingModel {
    None,
    Rayleigh,
    Rician { k_factor_db: f64 },
}

/// One excess multipath component relative to the line-of-sight tap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultipathTap {
    pub excess_delay_s: f64,
    pub relative_power_db: f64,
}

#[derive(Clone, Debug)]
pub struct ChannelModelParams {
    pub model: PathlossModel,
    pub reference_distance_m: f64,
    pub fading: FadingModel,
    pub multipath_profile: Vec<MultipathTap>,
    pub rng_seed: u64,
}

impl Default for ChannelModelParams {
    fn default() -> Self {
        ChannelModelParams {
            model: PathlossModel::Fspl,
            reference_distance_m: 1.0,
            fading: FadingModel::None,
            multipath_profile: Vec::new(),
            rng_seed: 0,
        }
    }
}

impl ChannelModelParams {
    pub fn validate(&self) -> Result<(), CompilerError> {
        let bad =
            |field: &'static str, message: String| CompilerError::InvalidParams { field, message };
        if let PathlossModel::LogDistance { exponent } = self.model {
            if !(1.6..=6.0).contains(&exponent) {
                return Err(bad(
                    "exponent",
                    format!("pathloss exponent must be in [1.6, 6], got {exponent}"),
                ));
            }
        }
        if !self.reference_distance_m.is_finite() || self.reference_distance_m <= 0.0 {
            return Err(bad(
                "reference_distance_m",
                "reference distance must be > 0".into(),
            ));
        }
        if let FadingModel::Rician { k_factor_db } = self.fading {
            if !k_factor_db.is_finite() || k_factor_db < 0.0 {
                return Err(bad(
                    "k_factor_db",
                    format!("Rician K must be >= 0 dB, got {k_factor_db}"),
                ));
            }
        }
        if self.multipath_profile.len() > 3 {
            return Err(bad(
                "multipath_profile",
                format!(
                    "{} excess taps exceed the 4-tap budget (LoS + 3)",
                    self.multipath_profile.len()
                ),
            ));
        }
        for (i, tap) in self.multipath_profile.iter().enumerate() {
            if !tap.excess_delay_s.is_finite() || tap.excess_delay_s < 0.0 {
                return Err(bad(
                    "multipath_profile",
                    format!("excess tap {i}: delay must be >= 0"),
                ));
            }
            if !tap.relative_power_db.is_finite() {
                return Err(bad(
                    "multipath_profile",
                    format!("excess tap {i}: relative power must be finite"),
                ));
            }
        }
        Ok(())
    }
}

/// Complex line-of-sight gain at distance `d_m` and frequency `f_hz`:
/// magnitude from the configured model, phase from the propagation delay.
pub fn pathloss_gain(
    d_m: f64,
    f_hz: f64,
    params: &ChannelModelParams,
) -> Result<Complex64, CompilerError> {
    if d_m < params.reference_distance_m {
        return Err(CompilerError::BelowReferenceDistance {
            d_m,
            d0_m: params.reference_distance_m,
        });
    }
    if !f_hz.is_finite() || f_hz <= 0.0 {
        return Err(CompilerError::InvalidParams {
            field: "f_hz",
            message: format!("frequency must be > 0, got {f_hz}"),
        });
    }
    let fspl = |d: f64| SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI * d * f_hz);
    let magnitude = match params.model {
        PathlossModel::Fspl => fspl(d_m),
        PathlossModel::LogDistance { exponent } => {
            let d0 = params.reference_distance_m;
            fspl(d0) * (d0 / d_m).powf(exponent / 2.0)
        }
    };
    let phase = -std::f64::consts::TAU * f_hz * d_m / SPEED_OF_LIGHT_M_S;
    Ok(Complex64::from_polar(magnitude, phase))
}

/// Quantize a propagation distance to a tap slot: k = round(d / c * fs).
pub fn delay_to_tap(d_m: f64, sample_rate_hz: f64) -> Result<u16, CompilerError> {
    let tap = d_m / SPEED_OF_LIGHT_M_S * sample_rate_hz;
    let max_tap = (TAP_SLOTS - 1) as f64;
    if tap > max_tap {
        return Err(CompilerError::DelayBudget {
            distance_m: d_m,
            tap,
            max_m: max_tap / sample_rate_hz * SPEED_OF_LIGHT_M_S,
        });
    }
    Ok(tap.round() as u16)
}

/// Gain magnitude that makes a unit-power transmitter arrive at exactly
/// `target_snr_db` over the configured receiver noise.
pub fn snr_to_gain(target_snr_db: f64, noise_power_dbfs: f64, tx_power_dbfs: f64) -> f64 {
    10f64.powf((target_snr_db + noise_power_dbfs - tx_power_dbfs) / 20.0)
}

/// A propagation component before delay quantization: seconds of delay
/// relative to the line of sight, plus its (possibly faded) complex gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationTap {
    pub excess_delay_s: f64,
    pub gain: Complex64,
}

/// Expand a line-of-sight gain into the per-link tap set: the LoS component
/// plus up to three profile echoes, each scaled by the fading model. Fading
/// draws are keyed on (seed, link, t), so compilation is replayable.
pub fn fading_taps(
    base_gain: Complex64,
    f_hz: f64,
    params: &ChannelModelParams,
    t_ms: u64,
    link_id: u64,
) -> Result<Vec<PropagationTap>, CompilerError> {
    params.validate()?;
    let mut taps = Vec::with_capacity(1 + params.multipath_profile.len());
    taps.push(PropagationTap {
        excess_delay_s: 0.0,
        gain: base_gain,
    });
    for echo in &params.multipath_profile {
        let rotation = Complex64::from_polar(
            10f64.powf(echo.relative_power_db / 20.0),
            -std::f64::consts::TAU * f_hz * echo.excess_delay_s,
        );
        taps.push(PropagationTap {
            excess_delay_s: echo.excess_delay_s,
            gain: base_gain * rotation,
        });
    }
    match params.fading {
        FadingModel::None => {}
        FadingModel::Rayleigh => {
            for (m, tap) in taps.iter_mut().enumerate() {
                tap.gain *= scatter_draw(params.rng_seed, link_id, t_ms, m);
            }
        }
        FadingModel::Rician { k_factor_db } => {
            let k = 10f64.powf(k_factor_db / 10.0);
            let los = (k / (k + 1.0)).sqrt();
            let diffuse = (1.0 / (k + 1.0)).sqrt();
            for (m, tap) in taps.iter_mut().enumerate() {
                tap.gain *= los + diffuse * scatter_draw(params.rng_seed, link_id, t_ms, m);
            }
        }
    }
    Ok(taps)
}

fn scatter_draw(seed: u64, link_id: u64, t_ms: u64, tap_index: usize) -> Complex64 {
    Key::new(seed)
        .word(domain::SCATTER)
        .word(link_id)
        .word(t_ms)
        .word(tap_index as u64)
        .complex_normal()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(g: f64) -> f64 {
        -20.0 * g.log10()
    }

    #[test]
    fn fspl_matches_friis_closed_form() {
        let params = ChannelModelParams::default();
        let g = pathloss_gain(100.0, 1e9, &params).unwrap();
        let loss_db = db(g.norm());
        assert!((loss_db - 72.4476).abs() < 0.01, "loss = {loss_db} dB");
        assert!((g.norm() - 2.39e-4).abs() < 2e-6);
    }

    #[test]
    fn log_distance_anchors_to_fspl_at_d0() {
        let mut params = ChannelModelParams {
            reference_distance_m: 10.0,
            ..Default::default()
        };
        let fspl = pathloss_gain(10.0, 1e9, &params).unwrap();
        params.model = PathlossModel::LogDistance { exponent: 3.5 };
        let logd = pathloss_gain(10.0, 1e9, &params).unwrap();
        assert!((fspl.norm() - logd.norm()).abs() < 1e-15);
    }

    #[test]
    fn fspl_doubling_distance_costs_6db() {
        let params = ChannelModelParams::default();
        let g1 = pathloss_gain(150.0, 2.4e9, &params).unwrap().norm();
        let g2 = pathloss_gain(300.0, 2.4e9, &params).unwrap().norm();
        let delta = db(g2) - db(g1);
        assert!((delta - 6.0206).abs() < 1e-3, "delta = {delta} dB");
    }

    #[test]
    fn below_reference_distance_is_an_error() {
        let params = ChannelModelParams::default();
        assert!(matches!(
            pathloss_gain(0.5, 1e9, &params),
            Err(CompilerError::BelowReferenceDistance { .. })
        ));
    }

    #[test]
    fn delay_quantization_examples() {
        assert_eq!(delay_to_tap(300.0, 100e6).unwrap(), 100);
        assert_eq!(delay_to_tap(0.0, 100e6).unwrap(), 0);
        assert_eq!(delay_to_tap(1000.0, 80e6).unwrap(), 267);
    }

    #[test]
    fn delay_budget_error_names_max_distance() {
        let err = delay_to_tap(2000.0, 100e6).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2000.0 m"), "{msg}");
        assert!(msg.contains("1532.0 m"), "{msg}");
    }

    #[test]
    fn snr_gain_examples() {
        assert!((snr_to_gain(20.0, -80.0, 0.0) - 1e-3).abs() < 1e-12);
        assert!((snr_to_gain(0.0, -50.0, -50.0) - 1.0).abs() < 1e-12);
        // A -5 dB SNR step scales gain by 10^(-0.25).
        let a = snr_to_gain(20.0, -80.0, 0.0);
        let b = snr_to_gain(15.0, -80.0, 0.0);
        assert!((b / a - 10f64.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn fading_none_is_deterministic() {
        let params = ChannelModelParams::default();
        let base = Complex64::new(1e-3, 0.0);
        let taps = fading_taps(base, 1e9, &params, 0, 0).unwrap();
        assert_eq!(
            taps,
            vec![PropagationTap {
                excess_delay_s: 0.0,
                gain: base
            }]
        );
    }

    #[test]
    fn rayleigh_preserves_mean_power() {
        let params = ChannelModelParams {
            fading: FadingModel::Rayleigh,
            ..Default::default()
        };
        let base = Complex64::new(2e-3, 1e-3);
        let n = 10_000u64;
        let mut acc = 0.0;
        for t in 0..n {
            let taps = fading_taps(base, 1e9, &params, t, 7).unwrap();
            acc += taps[0].gain.norm_sqr();
        }
        let mean = acc / n as f64;
        let expect = base.norm_sqr();
        assert!(
            (mean / expect - 1.0).abs() < 0.05,
            "mean power ratio {}",
            mean / expect
        );
    }

    #[test]
    fn rician_high_k_converges_to_deterministic() {
        let base = Complex64::new(1e-3, 0.0);
        let params = ChannelModelParams {
            fading: FadingModel::Rician { k_factor_db: 60.0 },
            ..Default::default()
        };
        for t in 0..100 {
            let taps = fading_taps(base, 1e9, &params, t, 3).unwrap();
            assert!((taps[0].gain - base).norm() < base.norm() * 0.01);
        }
    }

    #[test]
    fn profile_overflow_rejected() {
        let echo = MultipathTap {
            excess_delay_s: 1e-6,
            relative_power_db: -3.0,
        };
        let params = ChannelModelParams {
            multipath_profile: vec![echo; 4],
            ..Default::default()
        };
        assert!(fading_taps(Complex64::new(1.0, 0.0), 1e9, &params, 0, 0).is_err());
    }

    #[test]
    fn monotone_pathloss_without_fading() {
        let params = ChannelModelParams::default();
        let mut prev = f64::INFINITY;
        for d in [1.0, 2.0, 5.0, 17.0, 100.0, 450.0, 999.0] {
            let g = pathloss_gain(d, 1e9, &params).unwrap().norm();
            assert!(g <= prev, "gain increased at d = {d}");
            prev = g;
        }
    }
}
