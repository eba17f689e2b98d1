//! Link-quality model: switching threshold, average SNR budgets, and the
//! per-step probabilities that the FSO links (`a`) and the shared RF link
//! (`b`) are too poor to carry a frame.
//!
//! All SNRs are linear inside this module. Decibel conversion happens only
//! in [`db_to_linear`] / [`linear_to_db`] at the I/O boundary.

mod fso;
mod rf;

pub use fso::{fso_avg_snr, fso_outage_prob, scintillation, FadingParams, FsoParams, ScintillationParams};
pub use rf::{rf_avg_snr, rf_channel_gain_db, rf_outage_prob, RfParams};

use crate::error::{check_positive, check_probability, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `dBm` to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Minimum per-symbol SNR (linear) that keeps square `M`-QAM at or below
/// `ber0`: `(M - 1) * (-2/3) * ln(5 ber0)`.
pub fn switching_threshold(modulation_order: u32, ber0: f64) -> Result<f64> {
    if modulation_order < 4 {
        return Err(Error::invalid("modulation_order", "must be at least 4"));
    }
    let is_power_of_four = modulation_order.is_power_of_two() && modulation_order.trailing_zeros().is_multiple_of(2);
    if !is_power_of_four {
        return Err(Error::invalid(
            "modulation_order",
            format!("{modulation_order} is not a square QAM order (power of 4)"),
        ));
    }
    if !(ber0 > 0.0 && ber0 < 0.2) {
        return Err(Error::invalid("target_ber", format!("{ber0} is outside (0, 0.2)")));
    }
    Ok((modulation_order as f64 - 1.0) * (-(2.0 / 3.0) * (5.0 * ber0).ln()))
}

/// Outage probabilities shared by every remote node (all nodes sit at the
/// same distance from the central node).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    /// Probability a given FSO link is poor in a time step.
    pub a: f64,
    /// Probability the common RF link is poor in a time step.
    pub b: f64,
    /// Switching threshold, linear SNR. `None` when `a` and `b` were
    /// supplied directly and no threshold was given.
    pub gamma_t: Option<f64>,
    pub avg_snr_fso: Option<f64>,
    pub avg_snr_rf: Option<f64>,
}

impl LinkState {
    pub fn direct(a: f64, b: f64) -> Result<Self> {
        check_probability("a", a)?;
        check_probability("b", b)?;
        Ok(LinkState {
            a,
            b,
            gamma_t: None,
            avg_snr_fso: None,
            avg_snr_rf: None,
        })
    }
}

/// How the switching threshold is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Qam { modulation_order: u32, target_ber: f64 },
    Linear(f64),
}

impl Threshold {
    pub fn value(&self) -> Result<f64> {
        match *self {
            Threshold::Qam {
                modulation_order,
                target_ber,
            } => switching_threshold(modulation_order, target_ber),
            Threshold::Linear(g) => {
                check_positive("gamma_t", g)?;
                Ok(g)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FsoLink {
    /// Derive `a` from the link budget. `fading` replaces the
    /// turbulence/pointing parameters derived from `C_n^2` and geometry.
    Physical {
        params: FsoParams,
        fading: Option<FadingParams>,
    },
    Direct(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RfLink {
    Physical(RfParams),
    Direct(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub threshold: Option<Threshold>,
    pub fso: FsoLink,
    pub rf: RfLink,
}

/// Everything the channel model derives, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub link: LinkState,
    pub scintillation: Option<ScintillationParams>,
    pub fading: Option<FadingParams>,
}

impl ChannelModel {
    pub fn evaluate(&self) -> Result<ChannelReport> {
        let gamma_t = self.threshold.map(|t| t.value()).transpose()?;
        let need_threshold =
            || gamma_t.ok_or_else(|| Error::invalid("threshold", "required to derive a or b from a link budget"));

        let (a, avg_snr_fso, scint, fading) = match &self.fso {
            FsoLink::Direct(a) => {
                check_probability("a", *a)?;
                (*a, None, None, None)
            }
            FsoLink::Physical { params, fading } => {
                let g = need_threshold()?;
                params.validate()?;
                let scint = scintillation(params)?;
                let used = fading.unwrap_or(scint.fading);
                used.validate()?;
                let snr = fso_avg_snr(params);
                let a = fso_outage_prob(&used, snr, g)?;
                (a, Some(snr), Some(scint), Some(used))
            }
        };
        let (b, avg_snr_rf) = match &self.rf {
            RfLink::Direct(b) => {
                check_probability("b", *b)?;
                (*b, None)
            }
            RfLink::Physical(params) => {
                let g = need_threshold()?;
                params.validate()?;
                let snr = rf_avg_snr(params);
                (rf_outage_prob(params.nakagami_m, snr, g)?, Some(snr))
            }
        };
        Ok(ChannelReport {
            link: LinkState {
                a,
                b,
                gamma_t,
                avg_snr_fso,
                avg_snr_rf,
            },
            scintillation: scint,
            fading,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn threshold_16qam() {
        let g = switching_threshold(16, 1e-6).unwrap();
        // Independent evaluation: 15 * (2/3) * ln(2e5).
        assert_relative_eq!(g, 122.060_726_455_301_73, max_relative = 1e-12);
        let db = linear_to_db(g);
        assert!((20.8..=21.0).contains(&db), "{db}");
    }

    #[test]
    fn threshold_4qam() {
        assert_relative_eq!(
            switching_threshold(4, 1e-6).unwrap(),
            24.412_145_291_060_348,
            max_relative = 1e-12
        );
    }

    #[test]
    fn threshold_vanishes_at_ber_limit() {
        let g = switching_threshold(16, 0.2 - 1e-12).unwrap();
        assert!(g > 0.0 && g < 1e-9);
    }

    #[test]
    fn threshold_rejects_bad_inputs() {
        assert!(switching_threshold(2, 1e-6).is_err());
        assert!(switching_threshold(8, 1e-6).is_err());
        assert!(switching_threshold(16, 0.2).is_err());
        assert!(switching_threshold(16, 0.0).is_err());
    }

    #[test]
    fn threshold_monotone() {
        let orders = [4, 16, 64, 256, 1024];
        for w in orders.windows(2) {
            assert!(switching_threshold(w[0], 1e-5).unwrap() < switching_threshold(w[1], 1e-5).unwrap());
        }
        let bers = [1e-9, 1e-6, 1e-3, 0.1, 0.19];
        for w in bers.windows(2) {
            assert!(switching_threshold(16, w[0]).unwrap() > switching_threshold(16, w[1]).unwrap());
        }
    }

    #[test]
    fn direct_model_needs_no_threshold() {
        let model = ChannelModel {
            threshold: None,
            fso: FsoLink::Direct(0.9),
            rf: RfLink::Direct(0.22),
        };
        let r = model.evaluate().unwrap();
        assert_eq!((r.link.a, r.link.b), (0.9, 0.22));
        assert!(r.link.gamma_t.is_none());
    }

    #[test]
    fn physical_model_without_threshold_is_rejected() {
        let model = ChannelModel {
            threshold: None,
            fso: FsoLink::Direct(0.9),
            rf: RfLink::Physical(RfParams::clear_60ghz_1km()),
        };
        assert!(model.evaluate().unwrap_err().is_validation());
    }
}
