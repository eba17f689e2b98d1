//! TOML run configuration.
//!
//! ```toml
//! [channel]            # either a and b directly ...
//! a = 0.9
//! b = 0.22
//! modulation_order = 16  # ... or a threshold plus [channel.fso] and [channel.rf]
//! target_ber = 1e-6
//!
//! [network]
//! n_nodes = 4
//! buffer_size = 10
//! omega_ratio = 2
//! omega = 0.5
//! protocol = "p-persistence"   # or "equal-priority"
//! p = 0.5
//!
//! [sweep]              # optional
//! variable = "omega"   # omega | p | omega_ratio | a | b | n_nodes
//! start = 0.05
//! stop = 1.0
//! step = 0.05          # or: values = [...]
//!
//! [[series]]           # optional; each entry overrides network/channel values
//! label = "p=1"
//! p = 1.0
//!
//! [simulation]
//! steps = 1000000
//! warmup = 10000
//! seed = 1
//! arbitration = "forfeit"      # or "per-contender"
//!
//! [output]
//! path = "out.csv"
//! precision = 12
//! ```
//!
//! Fields holding decibel values end in `_dB`/`_dBm`/`_dBi`. Physical
//! channel fields that are left out take the 1 km moderate-fog /
//! clear-sky 60 GHz values.

use std::path::PathBuf;

use serde::Deserialize;

use crate::channel::{
    db_to_linear, dbm_to_watts, ChannelModel, FadingParams, FsoLink, FsoParams, RfLink, RfParams, Threshold,
};
use crate::protocol::Mode;
use crate::simulator::{Arbitration, SimConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// Malformed TOML or a field of the wrong type; the message carries
    /// the line and column.
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error in `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    channel: RawChannel,
    network: RawNetwork,
    sweep: Option<RawSweep>,
    #[serde(default)]
    series: Vec<RawSeries>,
    simulation: Option<RawSimulation>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    a: Option<f64>,
    b: Option<f64>,
    modulation_order: Option<f64>,
    target_ber: Option<f64>,
    gamma_t: Option<f64>,
    #[serde(rename = "gamma_t_dB")]
    gamma_t_db: Option<f64>,
    fso: Option<RawFso>,
    rf: Option<RawRf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFso {
    wavelength_m: Option<f64>,
    #[serde(rename = "lo_power_W")]
    lo_power_w: Option<f64>,
    shot_noise_var: Option<f64>,
    #[serde(rename = "responsivity_A_per_W")]
    responsivity: Option<f64>,
    detector_diameter_m: Option<f64>,
    #[serde(rename = "tx_power_dBm")]
    tx_power_dbm: Option<f64>,
    divergence_rad: Option<f64>,
    jitter_std_m: Option<f64>,
    link_distance_m: Option<f64>,
    cn2: Option<f64>,
    #[serde(rename = "weather_atten_dB_per_km")]
    weather_atten: Option<f64>,
    avg_symbol_energy: Option<f64>,
    /// Replaces the turbulence/pointing parameters derived from geometry.
    fading: Option<RawFading>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFading {
    alpha: f64,
    beta: f64,
    xi: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRf {
    #[serde(rename = "carrier_Hz")]
    carrier_hz: Option<f64>,
    #[serde(rename = "bandwidth_Hz")]
    bandwidth_hz: Option<f64>,
    #[serde(rename = "tx_power_dBm")]
    tx_power_dbm: Option<f64>,
    #[serde(rename = "tx_gain_dBi")]
    tx_gain: Option<f64>,
    #[serde(rename = "rx_gain_dBi")]
    rx_gain: Option<f64>,
    #[serde(rename = "noise_psd_dBm_per_MHz")]
    noise_psd: Option<f64>,
    #[serde(rename = "noise_figure_dB")]
    noise_figure: Option<f64>,
    #[serde(rename = "oxygen_atten_dB_per_km")]
    oxygen_atten: Option<f64>,
    #[serde(rename = "rain_atten_dB_per_km")]
    rain_atten: Option<f64>,
    nakagami_m: Option<f64>,
    link_distance_m: Option<f64>,
    avg_symbol_energy: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    n_nodes: f64,
    buffer_size: f64,
    omega_ratio: f64,
    omega: Option<f64>,
    protocol: Option<String>,
    p: Option<f64>,
    /// Physical traffic description; recorded, not interpreted.
    metadata: Option<toml::Table>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: String,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeries {
    label: Option<String>,
    protocol: Option<String>,
    p: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    omega: Option<f64>,
    omega_ratio: Option<f64>,
    buffer_size: Option<f64>,
    n_nodes: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    steps: Option<u64>,
    warmup: Option<u64>,
    seed: Option<u64>,
    arbitration: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    precision: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Omega,
    P,
    OmegaRatio,
    A,
    B,
    NNodes,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Omega => "omega",
            SweepVariable::P => "p",
            SweepVariable::OmegaRatio => "omega_ratio",
            SweepVariable::A => "a",
            SweepVariable::B => "b",
            SweepVariable::NNodes => "n_nodes",
        }
    }

    fn parse(s: &str) -> CResult<Self> {
        Ok(match s {
            "omega" => SweepVariable::Omega,
            "p" => SweepVariable::P,
            "omega_ratio" => SweepVariable::OmegaRatio,
            "a" => SweepVariable::A,
            "b" => SweepVariable::B,
            "n_nodes" => SweepVariable::NNodes,
            other => {
                return Err(invalid(
                    "sweep.variable",
                    format!("unknown variable `{other}` (expected omega, p, omega_ratio, a, b or n_nodes)"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Values a series may override; `None` keeps the base value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub protocol: Option<Mode>,
    pub p: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub omega: Option<f64>,
    pub omega_ratio: Option<usize>,
    pub buffer_size: Option<usize>,
    pub n_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub overrides: Overrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_nodes: usize,
    pub buffer_size: usize,
    pub omega_ratio: usize,
    pub omega: Option<f64>,
    pub protocol: Mode,
    pub p: f64,
    pub metadata: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub channel: ChannelModel,
    pub network: NetworkConfig,
    pub sweep: Option<Sweep>,
    /// Never empty; a config without `[[series]]` has one unnamed series.
    pub series: Vec<Series>,
    pub simulation: SimConfig,
    pub output: OutputConfig,
}

/// One fully resolved evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub series: String,
    pub sweep_value: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub protocol: Mode,
    pub p: f64,
    pub omega: f64,
    pub omega_ratio: usize,
    pub buffer_size: usize,
    pub n_nodes: usize,
}

impl RunConfig {
    /// Every (series, sweep value) combination in output order, with `a`
    /// and `b` defaulting to the evaluated channel.
    pub fn points(&self, a: f64, b: f64) -> CResult<Vec<Point>> {
        let sweep_values: Vec<Option<f64>> = match &self.sweep {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut points = Vec::with_capacity(self.series.len() * sweep_values.len());
        for series in &self.series {
            let o = &series.overrides;
            for &value in &sweep_values {
                let mut pt = Point {
                    series: series.label.clone(),
                    sweep_value: value,
                    a: o.a.unwrap_or(a),
                    b: o.b.unwrap_or(b),
                    protocol: o.protocol.unwrap_or(self.network.protocol),
                    p: o.p.unwrap_or(self.network.p),
                    omega: f64::NAN,
                    omega_ratio: o.omega_ratio.unwrap_or(self.network.omega_ratio),
                    buffer_size: o.buffer_size.unwrap_or(self.network.buffer_size),
                    n_nodes: o.n_nodes.unwrap_or(self.network.n_nodes),
                };
                let mut omega = o.omega.or(self.network.omega);
                if let (Some(sweep), Some(v)) = (&self.sweep, value) {
                    match sweep.variable {
                        SweepVariable::Omega => omega = Some(v),
                        SweepVariable::P => pt.p = v,
                        SweepVariable::OmegaRatio => pt.omega_ratio = v as usize,
                        SweepVariable::A => pt.a = v,
                        SweepVariable::B => pt.b = v,
                        SweepVariable::NNodes => pt.n_nodes = v as usize,
                    }
                }
                pt.omega = omega.ok_or_else(|| {
                    invalid(
                        "network.omega",
                        "no arrival probability given (set network.omega, a series omega, or sweep omega)",
                    )
                })?;
                points.push(pt);
            }
        }
        Ok(points)
    }
}

fn probability(field: &str, v: f64) -> CResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is not a probability in [0, 1]")))
    }
}

fn count(field: &str, v: f64) -> CResult<usize> {
    if !v.is_finite() || v.fract() != 0.0 {
        return Err(invalid(field, format!("restricted to integer values, got {v}")));
    }
    if v < 1.0 {
        return Err(invalid(field, format!("must be at least 1, got {v}")));
    }
    if v > 1e9 {
        return Err(invalid(field, format!("{v} is too large")));
    }
    Ok(v as usize)
}

fn protocol(field: &str, s: &str) -> CResult<Mode> {
    match s {
        "p-persistence" => Ok(Mode::PPersistence),
        "equal-priority" => Ok(Mode::EqualPriority),
        other => Err(invalid(
            field,
            format!("unknown protocol `{other}` (expected p-persistence or equal-priority)"),
        )),
    }
}

fn lift(field: &str, e: crate::Error) -> ConfigError {
    match e {
        crate::Error::InvalidInput { field: inner, reason } => invalid(format!("{field}.{inner}"), reason),
        other => invalid(field, other.to_string()),
    }
}

fn build_threshold(raw: &RawChannel) -> CResult<Option<Threshold>> {
    let qam = raw.modulation_order.is_some() || raw.target_ber.is_some();
    let given = [qam, raw.gamma_t.is_some(), raw.gamma_t_db.is_some()]
        .iter()
        .filter(|&&x| x)
        .count();
    if given > 1 {
        return Err(invalid(
            "channel.gamma_t",
            "give only one of modulation_order/target_ber, gamma_t, gamma_t_dB",
        ));
    }
    let threshold = if qam {
        let m = raw
            .modulation_order
            .ok_or_else(|| invalid("channel.modulation_order", "required together with target_ber"))?;
        let ber = raw
            .target_ber
            .ok_or_else(|| invalid("channel.target_ber", "required together with modulation_order"))?;
        if m.fract() != 0.0 || !(4.0..=4_294_967_295.0).contains(&m) {
            return Err(invalid(
                "channel.modulation_order",
                format!("{m} is not a valid QAM order"),
            ));
        }
        Some(Threshold::Qam {
            modulation_order: m as u32,
            target_ber: ber,
        })
    } else if let Some(g) = raw.gamma_t {
        Some(Threshold::Linear(g))
    } else {
        raw.gamma_t_db.map(|db| Threshold::Linear(db_to_linear(db)))
    };
    if let Some(t) = threshold {
        t.value().map_err(|e| lift("channel", e))?;
    }
    Ok(threshold)
}

fn build_fso(raw: &RawFso) -> CResult<FsoLink> {
    let d = FsoParams::moderate_fog_1km();
    let params = FsoParams {
        wavelength_m: raw.wavelength_m.unwrap_or(d.wavelength_m),
        lo_power_w: raw.lo_power_w.unwrap_or(d.lo_power_w),
        shot_noise_var: raw.shot_noise_var.unwrap_or(d.shot_noise_var),
        responsivity_a_per_w: raw.responsivity.unwrap_or(d.responsivity_a_per_w),
        detector_diameter_m: raw.detector_diameter_m.unwrap_or(d.detector_diameter_m),
        tx_power_w: raw.tx_power_dbm.map(dbm_to_watts).unwrap_or(d.tx_power_w),
        divergence_rad: raw.divergence_rad.unwrap_or(d.divergence_rad),
        jitter_std_m: raw.jitter_std_m.unwrap_or(d.jitter_std_m),
        link_distance_m: raw.link_distance_m.unwrap_or(d.link_distance_m),
        cn2: raw.cn2.unwrap_or(d.cn2),
        weather_atten_db_per_km: raw.weather_atten.unwrap_or(d.weather_atten_db_per_km),
        avg_symbol_energy: raw.avg_symbol_energy.unwrap_or(d.avg_symbol_energy),
    };
    params.validate().map_err(|e| lift("channel.fso", e))?;
    let fading = raw.fading.as_ref().map(|f| FadingParams {
        alpha: f.alpha,
        beta: f.beta,
        xi: f.xi,
    });
    if let Some(f) = &fading {
        f.validate().map_err(|e| lift("channel.fso.fading", e))?;
    }
    Ok(FsoLink::Physical { params, fading })
}

fn build_rf(raw: &RawRf) -> CResult<RfLink> {
    let d = RfParams::clear_60ghz_1km();
    let params = RfParams {
        carrier_hz: raw.carrier_hz.unwrap_or(d.carrier_hz),
        bandwidth_hz: raw.bandwidth_hz.unwrap_or(d.bandwidth_hz),
        tx_power_w: raw.tx_power_dbm.map(dbm_to_watts).unwrap_or(d.tx_power_w),
        tx_gain_dbi: raw.tx_gain.unwrap_or(d.tx_gain_dbi),
        rx_gain_dbi: raw.rx_gain.unwrap_or(d.rx_gain_dbi),
        noise_psd_dbm_per_mhz: raw.noise_psd.unwrap_or(d.noise_psd_dbm_per_mhz),
        noise_figure_db: raw.noise_figure.unwrap_or(d.noise_figure_db),
        oxygen_atten_db_per_km: raw.oxygen_atten.unwrap_or(d.oxygen_atten_db_per_km),
        rain_atten_db_per_km: raw.rain_atten.unwrap_or(d.rain_atten_db_per_km),
        nakagami_m: raw.nakagami_m.unwrap_or(d.nakagami_m),
        link_distance_m: raw.link_distance_m.unwrap_or(d.link_distance_m),
        avg_symbol_energy: raw.avg_symbol_energy.unwrap_or(d.avg_symbol_energy),
    };
    params.validate().map_err(|e| lift("channel.rf", e))?;
    Ok(RfLink::Physical(params))
}

fn build_channel(raw: &RawChannel) -> CResult<ChannelModel> {
    let threshold = build_threshold(raw)?;
    let direct = raw.a.is_some() || raw.b.is_some();
    let physical = raw.fso.is_some() || raw.rf.is_some();
    match (direct, physical) {
        (true, true) => Err(invalid(
            "channel",
            "give either a and b directly or [channel.fso] and [channel.rf], not both",
        )),
        (false, false) => Err(invalid(
            "channel",
            "missing channel: give a and b, or [channel.fso] and [channel.rf] with a threshold",
        )),
        (true, false) => {
            let a = raw.a.ok_or_else(|| invalid("channel.a", "required together with b"))?;
            let b = raw.b.ok_or_else(|| invalid("channel.b", "required together with a"))?;
            Ok(ChannelModel {
                threshold,
                fso: FsoLink::Direct(probability("channel.a", a)?),
                rf: RfLink::Direct(probability("channel.b", b)?),
            })
        }
        (false, true) => {
            let fso = raw
                .fso
                .as_ref()
                .ok_or_else(|| invalid("channel.fso", "required together with [channel.rf]"))?;
            let rf = raw
                .rf
                .as_ref()
                .ok_or_else(|| invalid("channel.rf", "required together with [channel.fso]"))?;
            if threshold.is_none() {
                return Err(invalid(
                    "channel.modulation_order",
                    "a physical channel needs modulation_order and target_ber (or gamma_t / gamma_t_dB)",
                ));
            }
            Ok(ChannelModel {
                threshold,
                fso: build_fso(fso)?,
                rf: build_rf(rf)?,
            })
        }
    }
}

fn build_sweep(raw: &RawSweep) -> CResult<Sweep> {
    let variable = SweepVariable::parse(&raw.variable)?;
    let values = match (&raw.values, raw.start, raw.stop, raw.step) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(start), Some(stop), Some(step)) => {
            if !(step.is_finite() && step > 0.0) {
                return Err(invalid("sweep.step", format!("{step} must be positive")));
            }
            if !(start.is_finite() && stop.is_finite()) || stop < start {
                return Err(invalid("sweep.stop", format!("range [{start}, {stop}] is empty")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if n > 1_000_000 {
                return Err(invalid("sweep.step", format!("{n} points is too many")));
            }
            (0..n).map(|k| start + k as f64 * step).collect()
        }
        _ => {
            return Err(invalid(
                "sweep",
                "give either `values` or all of `start`, `stop`, `step`",
            ))
        }
    };
    if values.is_empty() {
        return Err(invalid("sweep.values", "sweep is empty"));
    }
    let field = format!("sweep.values ({})", variable.name());
    for &v in &values {
        match variable {
            SweepVariable::Omega | SweepVariable::P | SweepVariable::A | SweepVariable::B => {
                probability(&field, v)?;
            }
            SweepVariable::OmegaRatio | SweepVariable::NNodes => {
                count(&field, v)?;
            }
        }
    }
    Ok(Sweep { variable, values })
}

fn build_series(k: usize, raw: &RawSeries) -> CResult<Series> {
    let f = |name: &str| format!("series[{k}].{name}");
    let opt_prob = |name: &str, v: Option<f64>| v.map(|v| probability(&f(name), v)).transpose();
    let opt_count = |name: &str, v: Option<f64>| v.map(|v| count(&f(name), v)).transpose();
    Ok(Series {
        label: raw.label.clone().unwrap_or_else(|| format!("series{}", k + 1)),
        overrides: Overrides {
            protocol: raw
                .protocol
                .as_deref()
                .map(|s| protocol(&f("protocol"), s))
                .transpose()?,
            p: opt_prob("p", raw.p)?,
            a: opt_prob("a", raw.a)?,
            b: opt_prob("b", raw.b)?,
            omega: opt_prob("omega", raw.omega)?,
            omega_ratio: opt_count("omega_ratio", raw.omega_ratio)?,
            buffer_size: opt_count("buffer_size", raw.buffer_size)?,
            n_nodes: opt_count("n_nodes", raw.n_nodes)?,
        },
    })
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> CResult<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_owned()))?;

    let channel = build_channel(&raw.channel)?;
    let n = &raw.network;
    let network = NetworkConfig {
        n_nodes: count("network.n_nodes", n.n_nodes)?,
        buffer_size: count("network.buffer_size", n.buffer_size)?,
        omega_ratio: count("network.omega_ratio", n.omega_ratio)?,
        omega: n.omega.map(|w| probability("network.omega", w)).transpose()?,
        protocol: match &n.protocol {
            Some(s) => protocol("network.protocol", s)?,
            None => Mode::PPersistence,
        },
        p: probability("network.p", n.p.unwrap_or(1.0))?,
        metadata: n.metadata.clone(),
    };
    let sweep = raw.sweep.as_ref().map(build_sweep).transpose()?;
    let mut series = raw
        .series
        .iter()
        .enumerate()
        .map(|(k, s)| build_series(k, s))
        .collect::<CResult<Vec<_>>>()?;
    if series.is_empty() {
        series.push(Series {
            label: "base".into(),
            overrides: Overrides::default(),
        });
    }

    let s = raw.simulation.as_ref();
    let simulation = SimConfig {
        seed: s.and_then(|s| s.seed).unwrap_or(1),
        steps: s.and_then(|s| s.steps).unwrap_or(1_000_000),
        warmup: s.and_then(|s| s.warmup).unwrap_or(10_000),
        arbitration: match s.and_then(|s| s.arbitration.as_deref()) {
            None | Some("forfeit") => Arbitration::Forfeit,
            Some("per-contender") => Arbitration::PerContender,
            Some(other) => {
                return Err(invalid(
                    "simulation.arbitration",
                    format!("unknown arbitration `{other}` (expected forfeit or per-contender)"),
                ))
            }
        },
    };
    if simulation.steps <= simulation.warmup {
        return Err(invalid(
            "simulation.steps",
            format!("{} must exceed warmup {}", simulation.steps, simulation.warmup),
        ));
    }

    let o = raw.output.as_ref();
    let output = OutputConfig {
        path: o.and_then(|o| o.path.clone()),
        precision: o.and_then(|o| o.precision).unwrap_or(12),
    };
    if !(1..=17).contains(&output.precision) {
        return Err(invalid(
            "output.precision",
            format!("{} is outside 1..=17", output.precision),
        ));
    }

    let config = RunConfig {
        channel,
        network,
        sweep,
        series,
        simulation,
        output,
    };
    // Resolve every point once so a missing omega is reported up front.
    config.points(0.5, 0.5)?;
    Ok(config)
}
