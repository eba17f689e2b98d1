use std::cell::Cell;
use std::f64::consts::PI;

use statrs::function::erf::erf;
use statrs::function::gamma::{checked_gamma_lr, ln_gamma};

use crate::error::{check_positive, Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Physical parameters of one central-node → remote-node FSO link.
#[derive(Debug, Clone, PartialEq)]
pub struct FsoParams {
    pub wavelength_m: f64,
    pub lo_power_w: f64,
    pub shot_noise_var: f64,
    pub responsivity_a_per_w: f64,
    pub detector_diameter_m: f64,
    pub tx_power_w: f64,
    /// Transmit divergence at 1/e^2.
    pub divergence_rad: f64,
    pub jitter_std_m: f64,
    pub link_distance_m: f64,
    /// Refractive-index structure parameter, m^(-2/3).
    pub cn2: f64,
    pub weather_atten_db_per_km: f64,
    pub avg_symbol_energy: f64,
}

impl FsoParams {
    /// 1550 nm heterodyne link over 1 km in moderate fog (42.2 dB/km) and
    /// moderate turbulence.
    pub fn moderate_fog_1km() -> Self {
        FsoParams {
            wavelength_m: 1550e-9,
            lo_power_w: 1e-2,
            shot_noise_var: 5e-12,
            responsivity_a_per_w: 0.5,
            detector_diameter_m: 0.2,
            tx_power_w: super::dbm_to_watts(15.0),
            divergence_rad: 2.5e-3,
            jitter_std_m: 0.3,
            link_distance_m: 1000.0,
            cn2: 5e-14,
            weather_atten_db_per_km: 42.2,
            avg_symbol_energy: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_m > 100e-9 && self.wavelength_m < 10e-6) {
            return Err(Error::invalid(
                "wavelength_m",
                format!("{} is outside (100 nm, 10 um)", self.wavelength_m),
            ));
        }
        check_positive("lo_power_W", self.lo_power_w)?;
        check_positive("shot_noise_var", self.shot_noise_var)?;
        check_positive("responsivity_A_per_W", self.responsivity_a_per_w)?;
        check_positive("detector_diameter_m", self.detector_diameter_m)?;
        check_positive("tx_power", self.tx_power_w)?;
        check_positive("divergence_rad", self.divergence_rad)?;
        check_positive("jitter_std_m", self.jitter_std_m)?;
        check_positive("link_distance_m", self.link_distance_m)?;
        check_positive("cn2", self.cn2)?;
        check_positive("avg_symbol_energy", self.avg_symbol_energy)?;
        if !(self.weather_atten_db_per_km.is_finite() && self.weather_atten_db_per_km >= 0.0) {
            return Err(Error::invalid("weather_atten_dB_per_km", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Gamma-Gamma shape parameters and the pointing-error ratio; these alone
/// determine the shape of the FSO SNR distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("xi", self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScintillationParams {
    pub fading: FadingParams,
    pub rytov_var: f64,
    pub d_param: f64,
    /// Equivalent beam radius at the receiver.
    pub w_eq_m: f64,
    /// Beam radius at distance z.
    pub w_z_m: f64,
}

/// Turbulence (spherical wave, aperture averaged) and pointing-error
/// parameters of a link.
pub fn scintillation(fso: &FsoParams) -> Result<ScintillationParams> {
    check_positive("cn2", fso.cn2)?;
    let z = fso.link_distance_m;
    let k = 2.0 * PI / fso.wavelength_m;
    let rytov = 0.5 * fso.cn2 * k.powf(7.0 / 6.0) * z.powf(11.0 / 6.0);
    let d2 = k * fso.detector_diameter_m.powi(2) / (4.0 * z);
    // chi^(12/5) with chi^2 = rytov
    let chi_12_5 = rytov.powf(6.0 / 5.0);

    let alpha_exp = 0.49 * rytov / (1.0 + 0.18 * d2 + 0.56 * chi_12_5).powf(7.0 / 6.0);
    let beta_exp = 0.51 * rytov * (1.0 + 0.69 * chi_12_5).powf(-5.0 / 6.0)
        / (1.0 + 0.9 * d2 + 0.62 * d2 * chi_12_5).powf(5.0 / 6.0);
    let alpha = 1.0 / alpha_exp.exp_m1();
    let beta = 1.0 / beta_exp.exp_m1();

    let w_z = fso.divergence_rad * z;
    let nu = PI.sqrt() * fso.detector_diameter_m / (2.0 * 2f64.sqrt() * w_z);
    let w_eq2 = w_z * w_z * PI.sqrt() * erf(nu) / (2.0 * nu * (-nu * nu).exp());
    let w_eq = w_eq2.sqrt();
    let xi = w_eq / (2.0 * fso.jitter_std_m);

    let fading = FadingParams { alpha, beta, xi };
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(Error::invalid(
            "cn2",
            format!("turbulence too weak for a Gamma-Gamma fit (rytov variance {rytov:e})"),
        ));
    }
    Ok(ScintillationParams {
        fading,
        rytov_var: rytov,
        d_param: d2.sqrt(),
        w_eq_m: w_eq,
        w_z_m: w_z,
    })
}

/// Average electrical SNR per symbol of the heterodyne receiver, with
/// Beers–Lambert weather loss over the link distance.
pub fn fso_avg_snr(fso: &FsoParams) -> f64 {
    let loss_db = fso.weather_atten_db_per_km * fso.link_distance_m / 1000.0;
    let gain = super::db_to_linear(-loss_db);
    2.0 * fso.avg_symbol_energy * fso.responsivity_a_per_w.powi(2) * fso.lo_power_w * fso.tx_power_w * gain
        / fso.shot_noise_var
}

/// Log-density of `ln X` for `X ~ Gamma(shape, rate = shape)` (unit mean).
fn unit_gamma_log_density_in_log(shape: f64, log_norm: f64, t: f64) -> f64 {
    shape * t - shape * t.exp() + log_norm
}

/// Range of `t = ln X` outside which the density of `ln X` is below
/// `exp(-60)` relative to its peak at `t = 0`.
fn log_support(shape: f64) -> (f64, f64) {
    let rel = |t: f64| shape * t - shape * t.exp() + shape;
    // The peak narrows like 1/sqrt(shape).
    let step = shape.sqrt().recip().min(1.0);
    let mut lo = -step;
    while rel(lo) > -60.0 {
        lo *= 2.0;
    }
    let mut hi = step;
    while rel(hi) > -60.0 {
        hi *= 2.0;
    }
    (lo, hi)
}

/// Probability that the FSO SNR falls below `gamma_t`.
///
/// With `X`, `Y` unit-mean Gamma variates (shapes `alpha`, `beta`) and the
/// pointing-error factor `V` satisfying `P[V < c] = min(1, c^(xi^2))`,
/// the outage is `P[X Y V < z0]` with `z0 = xi^2 gamma_t / ((xi^2 + 1) avg_snr)`.
/// Conditioning on `X` and `Y` gives `E[min(1, (z0 / XY)^(xi^2))]`, which is
/// integrated in log coordinates. The part of the inner expectation where
/// the min is 1 is the regularized lower incomplete gamma function.
pub fn fso_outage_prob(fading: &FadingParams, avg_snr: f64, gamma_t: f64) -> Result<f64> {
    fading.validate()?;
    check_positive("avg_snr_fso", avg_snr)?;
    if gamma_t.is_nan() || gamma_t < 0.0 {
        return Err(Error::invalid("gamma_t", format!("{gamma_t} must be >= 0")));
    }
    if gamma_t == 0.0 {
        return Ok(0.0);
    }
    if gamma_t.is_infinite() {
        return Ok(1.0);
    }
    let FadingParams { alpha, beta, xi } = *fading;
    let x2 = xi * xi;
    let log_z0 = (x2 / (x2 + 1.0)).ln() + gamma_t.ln() - avg_snr.ln();

    let norm_a = alpha * alpha.ln() - ln_gamma(alpha);
    let norm_b = beta * beta.ln() - ln_gamma(beta);
    let (ta, tb) = log_support(alpha);
    let (sa, sb) = log_support(beta);

    let failure: Cell<Option<Error>> = Cell::new(None);
    let inner_opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 500,
    };

    // E_Y[min(1, (c / Y)^(xi^2))] for c = exp(log_c).
    let inner = |log_c: f64| -> f64 {
        let below = if log_c > 700.0 {
            1.0
        } else if log_c < -700.0 {
            0.0
        } else {
            match checked_gamma_lr(beta, beta * log_c.exp()) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(Error::invalid("beta", e.to_string())));
                    return f64::NAN;
                }
            }
        };
        let start = log_c.max(sa);
        if start >= sb {
            return below;
        }
        let tail = integrate(
            |s| (unit_gamma_log_density_in_log(beta, norm_b, s) + x2 * (log_c - s)).exp(),
            start,
            sb,
            inner_opts,
        );
        match tail {
            Ok(q) => below + q.value,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };

    let outer = integrate(
        |t| {
            let w = unit_gamma_log_density_in_log(alpha, norm_a, t).exp();
            if w == 0.0 {
                return 0.0;
            }
            w * inner(log_z0 - t)
        },
        ta,
        tb,
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_intervals: 2000,
        },
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(outer?.value.clamp(0.0, 1.0))
}
