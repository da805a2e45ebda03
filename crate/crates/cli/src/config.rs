//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use ambc::channel::SystemConfig;
use ambc::harness::{ExperimentSpec, Scenario, StopRule};
use ambc::linearize::PhaseMode;

/// Everything needed to run one or more scenarios over one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Prefix for output file names; empty for none.
    pub label: String,
    pub scenarios: Vec<Scenario>,
    pub snr_grid_db: Vec<f64>,
    pub system: SystemConfig,
    pub stop: StopRule,
    pub phase_mode: PhaseMode,
    pub csi_error_variance: Option<f64>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            label: String::new(),
            scenarios: vec![Scenario::MinDistance],
            snr_grid_db: vec![0.0, 10.0, 20.0, 30.0],
            system: SystemConfig::default(),
            stop: StopRule::default(),
            phase_mode: PhaseMode::Compensated,
            csi_error_variance: None,
            workers: 0,
        }
    }
}

/// A parsed config file: assignments in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    entries: Vec<(usize, String, String)>,
}

pub const KEYS: &[&str] = &[
    "label",
    "scenario",
    "snr_db",
    "relative_snr_db",
    "alpha_loss_db",
    "num_antennas",
    "repetition_length",
    "coherence_length",
    "noise_power",
    "seed",
    "max_bits",
    "target_errors",
    "phase_mode",
    "csi_error_variance",
    "workers",
];

impl Overrides {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {line_no}: expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(format!("line {line_no}: unknown key `{key}`"));
            }
            if let Some((prev, _, _)) = entries.iter().find(|(_, k, _)| k == key) {
                return Err(format!("line {line_no}: `{key}` already set on line {prev}"));
            }
            entries.push((line_no, key.to_string(), value.to_string()));
        }
        Ok(Self { entries })
    }

    /// Applies every assignment to `cfg`. Unless `coherence_length` is given
    /// it follows `repetition_length`.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), String> {
        let mut coherence_set = false;
        for (line, key, value) in &self.entries {
            set(cfg, key, value).map_err(|e| format!("line {line}: {key}: {e}"))?;
            coherence_set |= key == "coherence_length";
        }
        if !coherence_set && self.entries.iter().any(|(_, k, _)| k == "repetition_length") {
            cfg.system.coherence_length = cfg.system.repetition_length;
        }
        Ok(())
    }
}

fn num<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse `{value}`"))
}

/// `a,b,c` or the inclusive range `start:stop:step`.
pub fn parse_grid(value: &str) -> Result<Vec<f64>, String> {
    if value.contains(':') {
        let parts: Vec<f64> = value.split(':').map(|p| num(p.trim())).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err("range must be start:stop:step".into());
        };
        if !(step > 0.0) || stop < start {
            return Err("range needs step > 0 and stop >= start".into());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        value.split(',').map(|p| num(p.trim())).collect()
    }
}

pub fn parse_phase_mode(value: &str) -> Result<PhaseMode, String> {
    match value {
        "uncompensated" => Ok(PhaseMode::Uncompensated),
        "compensated" => Ok(PhaseMode::Compensated),
        "perfect" => Ok(PhaseMode::Perfect),
        _ => Err(format!("expected uncompensated, compensated or perfect, got `{value}`")),
    }
}

pub fn phase_mode_name(mode: PhaseMode) -> &'static str {
    match mode {
        PhaseMode::Uncompensated => "uncompensated",
        PhaseMode::Compensated => "compensated",
        PhaseMode::Perfect => "perfect",
    }
}

fn set(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    let sys = &mut cfg.system;
    match key {
        "label" => cfg.label = value.to_string(),
        "scenario" => {
            cfg.scenarios = value
                .split(',')
                .map(|s| s.trim().parse::<Scenario>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?
        }
        "snr_db" => cfg.snr_grid_db = parse_grid(value)?,
        "relative_snr_db" => sys.relative_snr_db = num(value)?,
        "alpha_loss_db" => sys.alpha_loss_db = num(value)?,
        "num_antennas" => sys.num_antennas = num(value)?,
        "repetition_length" => sys.repetition_length = num(value)?,
        "coherence_length" => sys.coherence_length = num(value)?,
        "noise_power" => sys.noise_power = num(value)?,
        "seed" => sys.seed = num(value)?,
        "max_bits" => cfg.stop.max_bits = num(value)?,
        "target_errors" => cfg.stop.target_errors = num(value)?,
        "phase_mode" => cfg.phase_mode = parse_phase_mode(value)?,
        "csi_error_variance" => {
            cfg.csi_error_variance = match value {
                "none" | "off" => None,
                v => Some(num(v)?),
            }
        }
        "workers" => cfg.workers = num(value)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

impl RunConfig {
    /// One experiment per scenario.
    pub fn specs(&self) -> Vec<ExperimentSpec> {
        self.scenarios
            .iter()
            .map(|&scenario| ExperimentSpec {
                scenario,
                snr_grid_db: self.snr_grid_db.clone(),
                system: self.system.clone(),
                stop: self.stop,
                phase_mode: self.phase_mode,
                csi_error_variance: self.csi_error_variance,
                workers: self.workers,
            })
            .collect()
    }

    /// The full configuration in the same `key = value` format it is read
    /// from, for a single scenario.
    pub fn render(&self, scenario: Scenario) -> String {
        let s = &self.system;
        let grid: Vec<String> = self.snr_grid_db.iter().map(|v| v.to_string()).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("label", self.label.clone());
        kv("scenario", scenario.to_string());
        kv("snr_db", grid.join(","));
        kv("relative_snr_db", s.relative_snr_db.to_string());
        kv("alpha_loss_db", s.alpha_loss_db.to_string());
        kv("num_antennas", s.num_antennas.to_string());
        kv("repetition_length", s.repetition_length.to_string());
        kv("coherence_length", s.coherence_length.to_string());
        kv("noise_power", s.noise_power.to_string());
        kv("seed", s.seed.to_string());
        kv("max_bits", self.stop.max_bits.to_string());
        kv("target_errors", self.stop.target_errors.to_string());
        kv("phase_mode", phase_mode_name(self.phase_mode).to_string());
        kv(
            "csi_error_variance",
            self.csi_error_variance.map_or("none".to_string(), |v| v.to_string()),
        );
        kv("workers", self.workers.to_string());
        out
    }
}
