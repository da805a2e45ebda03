//! CSV and metadata writers.

use std::io::{self, Write};

use ambc::harness::{BerCurve, Scenario};

use crate::config::RunConfig;

pub const CSV_HEADER: &str = "snr_db,bits,errors,ber,ci95";

pub fn write_csv<W: Write>(mut w: W, curve: &BerCurve) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in &curve.points {
        writeln!(w, "{},{},{},{},{}", p.snr_db, p.bits_tested, p.bit_errors, p.ber, p.half_width_95)?;
    }
    Ok(())
}

/// Sidecar with everything needed to regenerate the curve.
pub fn write_meta<W: Write>(mut w: W, cfg: &RunConfig, scenario: Scenario, preset: Option<&str>) -> io::Result<()> {
    // Provenance lines are comments so the file can be fed back as a config.
    writeln!(w, "# version = {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# preset = {}", preset.unwrap_or("none"))?;
    w.write_all(cfg.render(scenario).as_bytes())
}

/// `label_scenario`, or just the scenario without a label.
pub fn file_stem(cfg: &RunConfig, scenario: Scenario) -> String {
    if cfg.label.is_empty() {
        scenario.to_string()
    } else {
        format!("{}_{}", cfg.label, scenario)
    }
}
