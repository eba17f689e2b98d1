//! C ABI over `fsorf`.
//!
//! Every function returns an [`FsorfStatus`]. On failure a message is kept
//! per thread and can be read with [`fsorf_last_error`]. Solved networks and
//! simulation runs are opaque handles released with their `_free` function.
//! Node indices are 1-based, matching priority rank.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fsorf::channel::{
    fso_avg_snr, fso_outage_prob, rf_avg_snr, rf_outage_prob, scintillation, switching_threshold, FadingParams,
    FsoParams, RfParams,
};
use fsorf::metrics::NetworkMetrics;
use fsorf::optimizer::{optimize_p, Scenario};
use fsorf::protocol::{cascade_solve, CascadeResult, ProtocolConfig};
use fsorf::simulator::{simulate_network, Arbitration, SimConfig, SimStats};
use fsorf::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsorfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    IndexOutOfRange = 3,
    QuadratureFailure = 4,
    SingularChain = 5,
    NotConverged = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsorfProtocol {
    PPersistence = 0,
    EqualPriority = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsorfArbitration {
    Forfeit = 0,
    PerContender = 1,
}

/// FSO link budget, all quantities linear (watts, metres).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsorfFsoParams {
    pub wavelength_m: f64,
    pub lo_power_w: f64,
    pub shot_noise_var: f64,
    pub responsivity_a_per_w: f64,
    pub detector_diameter_m: f64,
    pub tx_power_w: f64,
    pub divergence_rad: f64,
    pub jitter_std_m: f64,
    pub link_distance_m: f64,
    pub cn2: f64,
    pub weather_atten_db_per_km: f64,
    pub avg_symbol_energy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsorfFading {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsorfRfParams {
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

/// Network operating point. `p` is ignored under equal priority and by
/// [`fsorf_optimize_p`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsorfNetworkSpec {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub p: f64,
    pub n_nodes: usize,
    pub buffer_size: usize,
    pub omega_ratio: usize,
    pub protocol: FsorfProtocol,
}

/// Analytical metrics of one node. `queue_delay` is +inf when the node
/// holds frames but never delivers; `efficiency` is NaN when `omega` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsorfNodeMetrics {
    pub node: usize,
    pub p_rf: f64,
    pub rf_busy_prob: f64,
    pub throughput: f64,
    pub avg_buffer: f64,
    pub queue_delay: f64,
    pub loss_prob: f64,
    pub efficiency: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsorfNetworkSummary {
    pub n_nodes: usize,
    pub total_throughput: f64,
    pub rf_need_prob: f64,
    pub rf_utilization: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsorfOptimization {
    pub p_star: f64,
    pub total_throughput: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    pub multimodal: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsorfSimConfig {
    pub seed: u64,
    pub steps: u64,
    pub warmup: u64,
    pub arbitration: FsorfArbitration,
}

/// Counts cover the measured steps only. `mean_delay` is NaN when no
/// frame was delivered.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsorfNodeSimStats {
    pub node: usize,
    pub arrivals: u64,
    pub delivered: u64,
    pub lost: u64,
    pub buffer_start: u64,
    pub buffer_end: u64,
    pub rf_starts: u64,
    pub throughput: f64,
    pub loss_rate: f64,
    pub time_avg_buffer: f64,
    pub mean_delay: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsorfSimSummary {
    pub n_nodes: usize,
    pub measured_steps: u64,
    pub rf_busy_fraction: f64,
    pub rf_grants: u64,
}

/// Solved network; opaque to C.
pub struct FsorfNetwork {
    cascade: CascadeResult,
    metrics: NetworkMetrics,
}

/// Finished simulation run; opaque to C.
pub struct FsorfSimulation {
    stats: SimStats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FsorfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> FsorfStatus {
    match e {
        Error::InvalidInput { .. } => FsorfStatus::InvalidArgument,
        Error::QuadratureNonConvergence { .. } => FsorfStatus::QuadratureFailure,
        Error::SingularChain(_) => FsorfStatus::SingularChain,
        Error::PowerIterationNonConvergence { .. } => FsorfStatus::NotConverged,
        Error::Node { source, .. } => status_of(source),
    }
}

fn null(what: &str) -> Failure {
    Failure(FsorfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FsorfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsorfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            FsorfStatus::Panic
        }
    }
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, what: &str, value: T) -> Result<(), Failure> {
    let slot = p.as_mut().ok_or_else(|| null(what))?;
    *slot = value;
    Ok(())
}

fn node_slot(n_nodes: usize, node: usize) -> Result<usize, Failure> {
    if node == 0 || node > n_nodes {
        return Err(Failure(
            FsorfStatus::IndexOutOfRange,
            format!("node {node} is outside 1..={n_nodes}"),
        ));
    }
    Ok(node - 1)
}

impl From<&FsorfFsoParams> for FsoParams {
    fn from(p: &FsorfFsoParams) -> Self {
        FsoParams {
            wavelength_m: p.wavelength_m,
            lo_power_w: p.lo_power_w,
            shot_noise_var: p.shot_noise_var,
            responsivity_a_per_w: p.responsivity_a_per_w,
            detector_diameter_m: p.detector_diameter_m,
            tx_power_w: p.tx_power_w,
            divergence_rad: p.divergence_rad,
            jitter_std_m: p.jitter_std_m,
            link_distance_m: p.link_distance_m,
            cn2: p.cn2,
            weather_atten_db_per_km: p.weather_atten_db_per_km,
            avg_symbol_energy: p.avg_symbol_energy,
        }
    }
}

impl From<FsoParams> for FsorfFsoParams {
    fn from(p: FsoParams) -> Self {
        FsorfFsoParams {
            wavelength_m: p.wavelength_m,
            lo_power_w: p.lo_power_w,
            shot_noise_var: p.shot_noise_var,
            responsivity_a_per_w: p.responsivity_a_per_w,
            detector_diameter_m: p.detector_diameter_m,
            tx_power_w: p.tx_power_w,
            divergence_rad: p.divergence_rad,
            jitter_std_m: p.jitter_std_m,
            link_distance_m: p.link_distance_m,
            cn2: p.cn2,
            weather_atten_db_per_km: p.weather_atten_db_per_km,
            avg_symbol_energy: p.avg_symbol_energy,
        }
    }
}

impl From<&FsorfRfParams> for RfParams {
    fn from(p: &FsorfRfParams) -> Self {
        RfParams {
            carrier_hz: p.carrier_hz,
            bandwidth_hz: p.bandwidth_hz,
            tx_power_w: p.tx_power_w,
            tx_gain_dbi: p.tx_gain_dbi,
            rx_gain_dbi: p.rx_gain_dbi,
            noise_psd_dbm_per_mhz: p.noise_psd_dbm_per_mhz,
            noise_figure_db: p.noise_figure_db,
            oxygen_atten_db_per_km: p.oxygen_atten_db_per_km,
            rain_atten_db_per_km: p.rain_atten_db_per_km,
            nakagami_m: p.nakagami_m,
            link_distance_m: p.link_distance_m,
            avg_symbol_energy: p.avg_symbol_energy,
        }
    }
}

impl From<RfParams> for FsorfRfParams {
    fn from(p: RfParams) -> Self {
        FsorfRfParams {
            carrier_hz: p.carrier_hz,
            bandwidth_hz: p.bandwidth_hz,
            tx_power_w: p.tx_power_w,
            tx_gain_dbi: p.tx_gain_dbi,
            rx_gain_dbi: p.rx_gain_dbi,
            noise_psd_dbm_per_mhz: p.noise_psd_dbm_per_mhz,
            noise_figure_db: p.noise_figure_db,
            oxygen_atten_db_per_km: p.oxygen_atten_db_per_km,
            rain_atten_db_per_km: p.rain_atten_db_per_km,
            nakagami_m: p.nakagami_m,
            link_distance_m: p.link_distance_m,
            avg_symbol_energy: p.avg_symbol_energy,
        }
    }
}

impl FsorfNetworkSpec {
    fn protocol(&self) -> ProtocolConfig {
        match self.protocol {
            FsorfProtocol::PPersistence => ProtocolConfig::p_persistence(self.p, self.n_nodes),
            FsorfProtocol::EqualPriority => ProtocolConfig::equal_priority(self.n_nodes),
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsorf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fsorf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn fsorf_status_name(status: FsorfStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FsorfStatus::Ok => c"ok",
        FsorfStatus::InvalidArgument => c"invalid argument",
        FsorfStatus::NullPointer => c"null pointer",
        FsorfStatus::IndexOutOfRange => c"index out of range",
        FsorfStatus::QuadratureFailure => c"quadrature failure",
        FsorfStatus::SingularChain => c"singular chain",
        FsorfStatus::NotConverged => c"not converged",
        FsorfStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Fills `out` with the 1 km moderate-fog FSO reference link.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_fso_params_default(out: *mut FsorfFsoParams) -> FsorfStatus {
    guard(|| write(out, "out", FsoParams::moderate_fog_1km().into()))
}

/// Fills `out` with the 1 km, 60 GHz reference backup link.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_rf_params_default(out: *mut FsorfRfParams) -> FsorfStatus {
    guard(|| write(out, "out", RfParams::clear_60ghz_1km().into()))
}

/// Linear SNR threshold for `modulation_order`-QAM at bit error rate `ber`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_switching_threshold(modulation_order: u32, ber: f64, out: *mut f64) -> FsorfStatus {
    guard(|| write(out, "out", switching_threshold(modulation_order, ber)?))
}

/// Fading parameters implied by the turbulence and pointing geometry.
///
/// # Safety
/// `params` must be null or valid for reads, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_fso_fading(params: *const FsorfFsoParams, out: *mut FsorfFading) -> FsorfStatus {
    guard(|| {
        let p: FsoParams = read(params, "params")?.into();
        p.validate()?;
        let f = scintillation(&p)?.fading;
        write(
            out,
            "out",
            FsorfFading {
                alpha: f.alpha,
                beta: f.beta,
                xi: f.xi,
            },
        )
    })
}

/// FSO outage probability `a` at linear threshold `gamma_t`. A non-null
/// `fading` replaces the parameters derived from the link geometry.
///
/// # Safety
/// Pointers must be null (only `fading` may be) or valid.
#[no_mangle]
pub unsafe extern "C" fn fsorf_fso_outage(
    params: *const FsorfFsoParams,
    fading: *const FsorfFading,
    gamma_t: f64,
    out: *mut f64,
) -> FsorfStatus {
    guard(|| {
        let p: FsoParams = read(params, "params")?.into();
        p.validate()?;
        let f = match fading.as_ref() {
            Some(f) => FadingParams {
                alpha: f.alpha,
                beta: f.beta,
                xi: f.xi,
            },
            None => scintillation(&p)?.fading,
        };
        f.validate()?;
        write(out, "out", fso_outage_prob(&f, fso_avg_snr(&p), gamma_t)?)
    })
}

/// RF outage probability `b` at linear threshold `gamma_t`.
///
/// # Safety
/// `params` must be null or valid for reads, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_rf_outage(params: *const FsorfRfParams, gamma_t: f64, out: *mut f64) -> FsorfStatus {
    guard(|| {
        let p: RfParams = read(params, "params")?.into();
        p.validate()?;
        write(out, "out", rf_outage_prob(p.nakagami_m, rf_avg_snr(&p), gamma_t)?)
    })
}

/// Solves every node's chain and stores the result in `*out`, which must
/// later be released with [`fsorf_network_free`].
///
/// # Safety
/// `spec` must be null or valid for reads, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_network_solve(
    spec: *const FsorfNetworkSpec,
    out: *mut *mut FsorfNetwork,
) -> FsorfStatus {
    guard(|| {
        let s = read(spec, "spec")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cascade = cascade_solve(s.a, s.b, s.protocol(), s.omega, s.buffer_size, s.omega_ratio)?;
        let metrics = NetworkMetrics::from_cascade(&cascade)?;
        write(out, "out", Box::into_raw(Box::new(FsorfNetwork { cascade, metrics })))
    })
}

/// Releases a handle from [`fsorf_network_solve`]. Null is ignored.
///
/// # Safety
/// `network` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn fsorf_network_free(network: *mut FsorfNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// # Safety
/// `network` must be null or a live handle, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_network_summary(
    network: *const FsorfNetwork,
    out: *mut FsorfNetworkSummary,
) -> FsorfStatus {
    guard(|| {
        let n = read(network, "network")?;
        let m = &n.metrics;
        write(
            out,
            "out",
            FsorfNetworkSummary {
                n_nodes: m.per_node.len(),
                total_throughput: m.total_throughput,
                rf_need_prob: m.rf_need_prob,
                rf_utilization: m.rf_utilization,
            },
        )
    })
}

/// Metrics of node `node` (1 = highest priority).
///
/// # Safety
/// `network` must be null or a live handle, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_network_node(
    network: *const FsorfNetwork,
    node: usize,
    out: *mut FsorfNodeMetrics,
) -> FsorfStatus {
    guard(|| {
        let n = read(network, "network")?;
        let k = node_slot(n.metrics.per_node.len(), node)?;
        let m = &n.metrics.per_node[k];
        write(
            out,
            "out",
            FsorfNodeMetrics {
                node: m.node,
                p_rf: m.p_rf,
                rf_busy_prob: n.cascade.nodes[k].y,
                throughput: m.throughput,
                avg_buffer: m.avg_buffer,
                queue_delay: m.queue_delay.unwrap_or(f64::INFINITY),
                loss_prob: m.loss_prob,
                efficiency: m.efficiency.unwrap_or(f64::NAN),
            },
        )
    })
}

/// Copies node `node`'s steady-state distribution into `buf`. Index 0 is
/// the empty buffer; `i` frames at RF step `j` sit at
/// `(i - 1) * omega_ratio + j + 1`. `*len` holds the capacity on entry
/// and the number of states on return; a short buffer yields
/// `IndexOutOfRange` with `*len` set to the size needed.
///
/// # Safety
/// `network` must be null or a live handle, `len` null or valid, and `buf`
/// valid for `*len` writes (it may be null when `*len` is 0).
#[no_mangle]
pub unsafe extern "C" fn fsorf_network_steady_state(
    network: *const FsorfNetwork,
    node: usize,
    buf: *mut f64,
    len: *mut usize,
) -> FsorfStatus {
    guard(|| {
        let n = read(network, "network")?;
        let k = node_slot(n.cascade.nodes.len(), node)?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let probs = n.cascade.nodes[k].chain.steady.probs();
        let capacity = *len;
        *len = probs.len();
        if capacity < probs.len() {
            return Err(Failure(
                FsorfStatus::IndexOutOfRange,
                format!("buffer holds {capacity} values, {} needed", probs.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, probs.len()).copy_from_slice(probs);
        Ok(())
    })
}

/// Persistence probability maximizing total throughput, searched over
/// `[0.001, 1]` to tolerance `tol`.
///
/// # Safety
/// `spec` must be null or valid for reads, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_optimize_p(
    spec: *const FsorfNetworkSpec,
    tol: f64,
    out: *mut FsorfOptimization,
) -> FsorfStatus {
    guard(|| {
        let s = read(spec, "spec")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let scenario = Scenario {
            a: s.a,
            b: s.b,
            omega: s.omega,
            buffer_size: s.buffer_size,
            omega_ratio: s.omega_ratio,
            n_nodes: s.n_nodes,
        };
        let r = optimize_p(&scenario, tol)?;
        write(
            out,
            "out",
            FsorfOptimization {
                p_star: r.p_star,
                total_throughput: r.th_total_at_star,
                iterations: r.iterations,
                bracket_width: r.bracket_width,
                multimodal: r.multimodal,
            },
        )
    })
}

/// Runs the joint Monte-Carlo simulation and stores the result in `*out`,
/// which must later be released with [`fsorf_simulation_free`].
///
/// # Safety
/// `spec` and `sim` must be null or valid for reads, `out` null or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_simulate(
    spec: *const FsorfNetworkSpec,
    sim: *const FsorfSimConfig,
    out: *mut *mut FsorfSimulation,
) -> FsorfStatus {
    guard(|| {
        let s = read(spec, "spec")?;
        let c = read(sim, "sim")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = SimConfig {
            seed: c.seed,
            steps: c.steps,
            warmup: c.warmup,
            arbitration: match c.arbitration {
                FsorfArbitration::Forfeit => Arbitration::Forfeit,
                FsorfArbitration::PerContender => Arbitration::PerContender,
            },
        };
        let stats = simulate_network(s.a, s.b, s.protocol(), s.omega, s.buffer_size, s.omega_ratio, &config)?;
        write(out, "out", Box::into_raw(Box::new(FsorfSimulation { stats })))
    })
}

/// Releases a handle from [`fsorf_simulate`]. Null is ignored.
///
/// # Safety
/// `simulation` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn fsorf_simulation_free(simulation: *mut FsorfSimulation) {
    if !simulation.is_null() {
        drop(Box::from_raw(simulation));
    }
}

/// # Safety
/// `simulation` must be null or a live handle, `out` null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_simulation_summary(
    simulation: *const FsorfSimulation,
    out: *mut FsorfSimSummary,
) -> FsorfStatus {
    guard(|| {
        let s = &read(simulation, "simulation")?.stats;
        write(
            out,
            "out",
            FsorfSimSummary {
                n_nodes: s.nodes.len(),
                measured_steps: s.steps,
                rf_busy_fraction: s.rf_busy_fraction,
                rf_grants: s.rf_grant_events,
            },
        )
    })
}

/// # Safety
/// `simulation` must be null or a live handle, `out` null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fsorf_simulation_node(
    simulation: *const FsorfSimulation,
    node: usize,
    out: *mut FsorfNodeSimStats,
) -> FsorfStatus {
    guard(|| {
        let s = &read(simulation, "simulation")?.stats;
        let n = &s.nodes[node_slot(s.nodes.len(), node)?];
        write(
            out,
            "out",
            FsorfNodeSimStats {
                node: n.node,
                arrivals: n.arrivals,
                delivered: n.delivered,
                lost: n.lost,
                buffer_start: n.buffer_start,
                buffer_end: n.buffer_end,
                rf_starts: n.rf_starts,
                throughput: n.throughput(s.steps),
                loss_rate: n.loss_rate(s.steps),
                time_avg_buffer: n.time_avg_buffer,
                mean_delay: n.mean_delay.unwrap_or(f64::NAN),
            },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_names_are_distinct() {
        let all = [
            FsorfStatus::Ok,
            FsorfStatus::InvalidArgument,
            FsorfStatus::NullPointer,
            FsorfStatus::IndexOutOfRange,
            FsorfStatus::QuadratureFailure,
            FsorfStatus::SingularChain,
            FsorfStatus::NotConverged,
            FsorfStatus::Panic,
        ];
        let names: std::collections::HashSet<_> = all
            .iter()
            .map(|&s| unsafe { CStr::from_ptr(fsorf_status_name(s)) }.to_owned())
            .collect();
        assert_eq!(names.len(), all.len());
    }

    #[test]
    fn node_errors_map_to_their_cause() {
        let e = Error::Node {
            node: 3,
            source: Box::new(Error::SingularChain("x".into())),
        };
        assert_eq!(status_of(&e), FsorfStatus::SingularChain);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, FsorfStatus::Panic);
        let msg = unsafe { CStr::from_ptr(fsorf_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn params_round_trip() {
        let p = FsoParams::moderate_fog_1km();
        let c: FsorfFsoParams = p.clone().into();
        assert_eq!(FsoParams::from(&c), p);
        let r = RfParams::clear_60ghz_1km();
        let c: FsorfRfParams = r.clone().into();
        assert_eq!(RfParams::from(&c), r);
    }
}
