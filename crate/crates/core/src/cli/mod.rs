//! Command implementations behind the `fsorf` binary. Every command turns
//! a [`RunConfig`] into a CSV table; nothing is written until the whole
//! table has been computed.

pub mod config;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::channel::{linear_to_db, ChannelReport};
use crate::metrics::NetworkMetrics;
use crate::optimizer::{optimize_p, Scenario, DEFAULT_TOLERANCE};
use crate::protocol::{cascade_solve, Mode, ProtocolConfig};
use crate::simulator::simulate_network;
pub use config::{parse_config, ConfigError, Point, RunConfig, SweepVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Channel,
    Solve,
    Sweep,
    OptimizeP,
    Simulate,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 1 for bad input (config, validation, I/O), 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Replaces `simulation.seed`.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// `precision` significant digits, plain notation for moderate magnitudes
/// and exponent notation otherwise, trailing zeros removed. Independent of
/// locale.
pub fn format_number(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", precision.saturating_sub(1), v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..16).contains(&exp) {
        // Place the decimal point into the already rounded digits.
        let (sign, unsigned) = match mantissa.strip_prefix('-') {
            Some(m) => ("-", m),
            None => ("", mantissa),
        };
        let digits: String = unsigned.chars().filter(|c| *c != '.').collect();
        let fixed = if exp >= 0 {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                format!("{digits}{}", "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        };
        format!("{sign}{}", trim_zeros(&fixed))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s.to_owned()
    }
}

struct Fmt(usize);

impl Fmt {
    fn num(&self, v: f64) -> String {
        format_number(v, self.0)
    }

    fn opt(&self, v: Option<f64>) -> String {
        v.map_or_else(String::new, |v| self.num(v))
    }
}

fn protocol_name(mode: Mode) -> &'static str {
    match mode {
        Mode::PPersistence => "p-persistence",
        Mode::EqualPriority => "equal-priority",
    }
}

const POINT_COLUMNS: [&str; 10] = [
    "series",
    "variable",
    "value",
    "protocol",
    "p",
    "n_nodes",
    "buffer_size",
    "omega_ratio",
    "omega",
    "a",
];

const NODE_COLUMNS: [&str; 11] = [
    "b", "node", "p_rf", "Th", "Qa", "Tq", "PL", "phi", "Th_total", "N_e", "U",
];

const SIM_COLUMNS: [&str; 9] = [
    "sim_Th",
    "sim_Qa",
    "sim_Tq",
    "sim_PL",
    "Th_rel_err",
    "rf_busy_fraction",
    "rf_grants",
    "steps",
    "seed",
];

fn point_cells(f: &Fmt, cfg: &RunConfig, pt: &Point) -> Vec<String> {
    let (variable, value) = match (&cfg.sweep, pt.sweep_value) {
        (Some(s), Some(v)) => (s.variable.name().to_owned(), f.num(v)),
        _ => (String::new(), String::new()),
    };
    vec![
        pt.series.clone(),
        variable,
        value,
        protocol_name(pt.protocol).to_owned(),
        f.num(pt.p),
        pt.n_nodes.to_string(),
        pt.buffer_size.to_string(),
        pt.omega_ratio.to_string(),
        f.num(pt.omega),
        f.num(pt.a),
    ]
}

fn protocol_config(pt: &Point) -> ProtocolConfig {
    match pt.protocol {
        Mode::PPersistence => ProtocolConfig::p_persistence(pt.p, pt.n_nodes),
        Mode::EqualPriority => ProtocolConfig::equal_priority(pt.n_nodes),
    }
}

fn analyze(pt: &Point) -> crate::Result<NetworkMetrics> {
    let cascade = cascade_solve(
        pt.a,
        pt.b,
        protocol_config(pt),
        pt.omega,
        pt.buffer_size,
        pt.omega_ratio,
    )?;
    NetworkMetrics::from_cascade(&cascade)
}

fn node_cells(f: &Fmt, pt: &Point, net: &NetworkMetrics, k: usize) -> Vec<String> {
    let m = &net.per_node[k];
    vec![
        f.num(pt.b),
        m.node.to_string(),
        f.num(m.p_rf),
        f.num(m.throughput),
        f.num(m.avg_buffer),
        m.queue_delay.map_or_else(|| "inf".to_owned(), |t| f.num(t)),
        f.num(m.loss_prob),
        m.efficiency.map_or_else(|| "nan".to_owned(), |e| f.num(e)),
        f.num(net.total_throughput),
        f.num(net.rf_need_prob),
        f.num(net.rf_utilization),
    ]
}

/// Evaluates points in parallel and returns their outputs in input order,
/// reporting the first failure in that order.
fn evaluate<T: Send>(points: &[Point], f: impl Fn(&Point) -> crate::Result<T> + Sync + Send) -> crate::Result<Vec<T>> {
    let results: Vec<crate::Result<T>> = points.par_iter().map(f).collect();
    results.into_iter().collect()
}

fn channel_table(f: &Fmt, report: &ChannelReport) -> Table {
    let link = &report.link;
    let fading = report.fading;
    Table {
        header: vec![
            "a",
            "b",
            "gamma_t",
            "gamma_t_dB",
            "snr_fso_dB",
            "snr_rf_dB",
            "alpha",
            "beta",
            "xi",
            "rytov_var",
        ],
        rows: vec![vec![
            f.num(link.a),
            f.num(link.b),
            f.opt(link.gamma_t),
            f.opt(link.gamma_t.map(linear_to_db)),
            f.opt(link.avg_snr_fso.map(linear_to_db)),
            f.opt(link.avg_snr_rf.map(linear_to_db)),
            f.opt(fading.map(|x| x.alpha)),
            f.opt(fading.map(|x| x.beta)),
            f.opt(fading.map(|x| x.xi)),
            f.opt(report.scintillation.map(|s| s.rytov_var)),
        ]],
    }
}

fn metrics_table(f: &Fmt, cfg: &RunConfig, points: &[Point]) -> crate::Result<Table> {
    let results = evaluate(points, analyze)?;
    let mut rows = Vec::new();
    for (pt, net) in points.iter().zip(&results) {
        for k in 0..net.per_node.len() {
            let mut row = point_cells(f, cfg, pt);
            row.extend(node_cells(f, pt, net, k));
            rows.push(row);
        }
    }
    Ok(Table {
        header: POINT_COLUMNS.iter().chain(&NODE_COLUMNS).copied().collect(),
        rows,
    })
}

fn optimize_table(f: &Fmt, cfg: &RunConfig, points: &[Point]) -> Result<Table, CliError> {
    if cfg.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::P) {
        return Err(ConfigError::Invalid {
            field: "sweep.variable".into(),
            reason: "optimize-p cannot sweep p itself".into(),
        }
        .into());
    }
    if let Some(pt) = points.iter().find(|pt| pt.protocol != Mode::PPersistence) {
        return Err(ConfigError::Invalid {
            field: "network.protocol".into(),
            reason: format!("optimize-p needs p-persistence (series `{}`)", pt.series),
        }
        .into());
    }
    let results = evaluate(points, |pt| {
        let scenario = Scenario {
            a: pt.a,
            b: pt.b,
            omega: pt.omega,
            buffer_size: pt.buffer_size,
            omega_ratio: pt.omega_ratio,
            n_nodes: pt.n_nodes,
        };
        optimize_p(&scenario, DEFAULT_TOLERANCE)
    })?;
    let mut header: Vec<&'static str> = POINT_COLUMNS.to_vec();
    header.retain(|c| *c != "p" && *c != "protocol");
    header.extend(["b", "p_star", "Th_total", "iterations", "bracket_width", "multimodal"]);
    let rows = points
        .iter()
        .zip(&results)
        .map(|(pt, r)| {
            let mut row = point_cells(f, cfg, pt);
            row.remove(4);
            row.remove(3);
            row.extend([
                f.num(pt.b),
                f.num(r.p_star),
                f.num(r.th_total_at_star),
                r.iterations.to_string(),
                f.num(r.bracket_width),
                r.multimodal.to_string(),
            ]);
            row
        })
        .collect();
    Ok(Table { header, rows })
}

fn simulate_table(f: &Fmt, cfg: &RunConfig, points: &[Point], seed: u64) -> crate::Result<Table> {
    let sim = crate::simulator::SimConfig { seed, ..cfg.simulation };
    let results = evaluate(points, |pt| {
        let net = analyze(pt)?;
        let stats = simulate_network(
            pt.a,
            pt.b,
            protocol_config(pt),
            pt.omega,
            pt.buffer_size,
            pt.omega_ratio,
            &sim,
        )?;
        Ok((net, stats))
    })?;
    let mut rows = Vec::new();
    for (pt, (net, stats)) in points.iter().zip(&results) {
        for (k, node) in stats.nodes.iter().enumerate() {
            let th = node.throughput(stats.steps);
            let analytic = net.per_node[k].throughput;
            let mut row = point_cells(f, cfg, pt);
            row.extend(node_cells(f, pt, net, k));
            row.extend([
                f.num(th),
                f.num(node.time_avg_buffer),
                node.mean_delay.map_or_else(|| "inf".to_owned(), |d| f.num(d)),
                f.num(node.loss_rate(stats.steps)),
                if analytic > 0.0 {
                    f.num((th - analytic) / analytic)
                } else {
                    "nan".to_owned()
                },
                f.num(stats.rf_busy_fraction),
                stats.rf_grant_events.to_string(),
                stats.steps.to_string(),
                seed.to_string(),
            ]);
            rows.push(row);
        }
    }
    Ok(Table {
        header: POINT_COLUMNS
            .iter()
            .chain(&NODE_COLUMNS)
            .chain(&SIM_COLUMNS)
            .copied()
            .collect(),
        rows,
    })
}

/// Runs one command and returns its table.
pub fn run(command: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let f = Fmt(cfg.output.precision);
    let report = cfg.channel.evaluate()?;
    if command == Command::Channel {
        return Ok(channel_table(&f, &report));
    }
    let all = cfg.points(report.link.a, report.link.b)?;
    let points: Vec<Point> = match command {
        Command::Sweep if cfg.sweep.is_none() => {
            return Err(ConfigError::Invalid {
                field: "sweep".into(),
                reason: "the sweep command needs a [sweep] section".into(),
            }
            .into())
        }
        Command::Solve if cfg.sweep.is_some() => {
            let mut base = cfg.clone();
            base.sweep = None;
            base.points(report.link.a, report.link.b)?
        }
        _ => all,
    };
    let table = match command {
        Command::Channel => unreachable!(),
        Command::Solve | Command::Sweep => metrics_table(&f, cfg, &points)?,
        Command::OptimizeP => optimize_table(&f, cfg, &points)?,
        Command::Simulate => simulate_table(&f, cfg, &points, opts.seed.unwrap_or(cfg.simulation.seed))?,
    };
    Ok(table)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomically(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.0, 12), "0");
        assert_eq!(format_number(0.5, 12), "0.5");
        assert_eq!(format_number(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_number(0.1 + 0.2, 12), "0.3");
        assert_eq!(format_number(122.060_726_455_301_73, 12), "122.060726455");
        assert_eq!(format_number(-2.5e-9, 12), "-2.5e-9");
        assert_eq!(format_number(4.2e-20, 12), "4.2e-20");
        assert_eq!(format_number(12345.0, 3), "12300");
        assert_eq!(format_number(f64::INFINITY, 12), "inf");
        assert_eq!(format_number(f64::NAN, 12), "nan");
        assert_eq!(format_number(1e20, 12), "1e20");
    }

    #[test]
    fn exit_codes() {
        let validation = CliError::Model(crate::Error::InvalidInput {
            field: "a",
            reason: String::new(),
        });
        assert_eq!(validation.exit_code(), 1);
        assert_eq!(
            CliError::Model(crate::Error::SingularChain(String::new())).exit_code(),
            2
        );
        let node = CliError::Model(crate::Error::Node {
            node: 2,
            source: Box::new(crate::Error::SingularChain(String::new())),
        });
        assert_eq!(node.exit_code(), 2);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomically(&path, "x\n1\n").unwrap();
        write_atomically(&path, "x\n2\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x\n2\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomically(&dir.path().join("missing/out.csv"), "x").is_err());
    }
}
