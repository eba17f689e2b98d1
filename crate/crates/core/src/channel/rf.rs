use std::f64::consts::PI;

use statrs::function::gamma::checked_gamma_lr;

use super::{db_to_linear, dbm_to_watts, SPEED_OF_LIGHT};
use crate::error::{check_positive, Error, Result};

/// Physical parameters of the shared millimetre-wave backup link.
#[derive(Debug, Clone, PartialEq)]
pub struct RfParams {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_psd_dbm_per_mhz: f64,
    pub noise_figure_db: f64,
    pub oxygen_atten_db_per_km: f64,
    pub rain_atten_db_per_km: f64,
    pub nakagami_m: f64,
    pub link_distance_m: f64,
    pub avg_symbol_energy: f64,
}

impl RfParams {
    /// 60 GHz, 250 MHz link over 1 km with no rain.
    pub fn clear_60ghz_1km() -> Self {
        RfParams {
            carrier_hz: 60e9,
            bandwidth_hz: 250e6,
            tx_power_w: dbm_to_watts(25.0),
            tx_gain_dbi: 43.0,
            rx_gain_dbi: 43.0,
            noise_psd_dbm_per_mhz: -114.0,
            noise_figure_db: 5.0,
            oxygen_atten_db_per_km: 15.1,
            rain_atten_db_per_km: 0.0,
            nakagami_m: 5.0,
            link_distance_m: 1000.0,
            avg_symbol_energy: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("carrier_hz", self.carrier_hz)?;
        check_positive("bandwidth_hz", self.bandwidth_hz)?;
        check_positive("tx_power", self.tx_power_w)?;
        check_positive("link_distance_m", self.link_distance_m)?;
        check_positive("avg_symbol_energy", self.avg_symbol_energy)?;
        if !(self.nakagami_m.is_finite() && self.nakagami_m >= 0.5) {
            return Err(Error::invalid(
                "nakagami_m",
                format!("{} must be >= 0.5", self.nakagami_m),
            ));
        }
        let finite = [
            ("tx_gain_dBi", self.tx_gain_dbi),
            ("rx_gain_dBi", self.rx_gain_dbi),
            ("noise_psd_dBm_per_MHz", self.noise_psd_dbm_per_mhz),
            ("noise_figure_dB", self.noise_figure_db),
            ("oxygen_atten_dB_per_km", self.oxygen_atten_db_per_km),
            ("rain_atten_dB_per_km", self.rain_atten_db_per_km),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Average channel power gain in dB: antenna gains, free-space path loss
/// and specific (oxygen + rain) attenuation.
pub fn rf_channel_gain_db(rf: &RfParams) -> f64 {
    let wavelength = SPEED_OF_LIGHT / rf.carrier_hz;
    let fspl_db = 20.0 * (4.0 * PI * rf.link_distance_m / wavelength).log10();
    let atmospheric_db = (rf.oxygen_atten_db_per_km + rf.rain_atten_db_per_km) * rf.link_distance_m / 1000.0;
    rf.tx_gain_dbi + rf.rx_gain_dbi - fspl_db - atmospheric_db
}

/// Average SNR per symbol, with noise variance `W * N0 * NF`.
pub fn rf_avg_snr(rf: &RfParams) -> f64 {
    let n0_w_per_hz = dbm_to_watts(rf.noise_psd_dbm_per_mhz) / 1e6;
    let noise = rf.bandwidth_hz * n0_w_per_hz * db_to_linear(rf.noise_figure_db);
    rf.avg_symbol_energy * rf.tx_power_w * db_to_linear(rf_channel_gain_db(rf)) / noise
}

/// Nakagami-m outage: `P(m, m gamma_t / avg_snr)` with `P` the regularized
/// lower incomplete gamma function.
pub fn rf_outage_prob(m: f64, avg_snr: f64, gamma_t: f64) -> Result<f64> {
    if !(m.is_finite() && m >= 0.5) {
        return Err(Error::invalid("nakagami_m", format!("{m} must be >= 0.5")));
    }
    check_positive("avg_snr_rf", avg_snr)?;
    if gamma_t.is_nan() || gamma_t < 0.0 {
        return Err(Error::invalid("gamma_t", format!("{gamma_t} must be >= 0")));
    }
    let x = m * gamma_t / avg_snr;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let p = checked_gamma_lr(m, x).map_err(|e| Error::invalid("nakagami_m", e.to_string()))?;
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_gain_budget() {
        let mut rf = RfParams::clear_60ghz_1km();
        rf.tx_gain_dbi = 0.0;
        rf.rx_gain_dbi = 0.0;
        rf.oxygen_atten_db_per_km = 0.0;
        rf.link_distance_m = SPEED_OF_LIGHT / rf.carrier_hz / (4.0 * PI);
        assert!(rf_channel_gain_db(&rf).abs() < 1e-10);
        let noise = 250e6 * dbm_to_watts(-114.0) / 1e6 * db_to_linear(5.0);
        assert_relative_eq!(rf_avg_snr(&rf), rf.tx_power_w / noise, max_relative = 1e-9);
    }

    #[test]
    fn reference_budget() {
        // Independent evaluation: 86 - 128.0108 - 15.1 dB gain; -85.02 dBm noise.
        let rf = RfParams::clear_60ghz_1km();
        assert_relative_eq!(rf_channel_gain_db(&rf), -57.110_808_229_556_234, max_relative = 1e-9);
        assert_relative_eq!(
            10.0 * rf_avg_snr(&rf).log10(),
            52.909_791_683_723_39,
            max_relative = 1e-9
        );
    }

    #[test]
    fn doubling_bandwidth_halves_snr() {
        let rf = RfParams::clear_60ghz_1km();
        let mut wide = rf.clone();
        wide.bandwidth_hz *= 2.0;
        assert_relative_eq!(rf_avg_snr(&wide), 0.5 * rf_avg_snr(&rf), max_relative = 1e-13);
    }

    #[test]
    fn rayleigh_reduction() {
        for (snr, g) in [(10.0, 1.0), (100.0, 122.06), (3.0, 0.01), (50.0, 500.0)] {
            let b = rf_outage_prob(1.0, snr, g).unwrap();
            assert!((b - (1.0 - (-g / snr).exp())).abs() < 1e-10, "{snr} {g}");
        }
    }

    #[test]
    fn limits() {
        assert_eq!(rf_outage_prob(5.0, 100.0, 0.0).unwrap(), 0.0);
        assert!(rf_outage_prob(5.0, 100.0, 1e6).unwrap() > 1.0 - 1e-12);
        assert_eq!(rf_outage_prob(5.0, 100.0, f64::INFINITY).unwrap(), 1.0);
        assert!(rf_outage_prob(0.4, 100.0, 1.0).is_err());
        assert!(rf_outage_prob(5.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn nakagami_reference_value() {
        // P(5, 5 * 122.06 / 190.5) from an independent incomplete-gamma evaluation.
        let g = crate::channel::switching_threshold(16, 1e-6).unwrap();
        let b = rf_outage_prob(5.0, 190.515_211_884_489_6, g).unwrap();
        assert!((b - 0.22).abs() < 1e-6, "{b}");
    }
}
