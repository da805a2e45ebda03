//! Named experiment presets. A `_desk` suffix marks parameters scaled down
//! to run on one machine in minutes.

use ambc::channel::SystemConfig;
use ambc::harness::{Scenario, StopRule};
use ambc::linearize::PhaseMode;

use crate::config::{parse_grid, RunConfig};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> Vec<RunConfig>,
}

impl Preset {
    pub fn runs(&self) -> Vec<RunConfig> {
        (self.build)()
    }
}

fn run(label: &str, scenarios: &[Scenario], grid: &str, m: usize, q: usize, stop: StopRule) -> RunConfig {
    RunConfig {
        label: label.to_string(),
        scenarios: scenarios.to_vec(),
        snr_grid_db: parse_grid(grid).expect("preset grid"),
        system: SystemConfig {
            repetition_length: m,
            coherence_length: m,
            num_antennas: q,
            ..Default::default()
        },
        stop,
        ..Default::default()
    }
}

const STOP: StopRule = StopRule {
    max_bits: 200_000,
    target_errors: 500,
};

fn fig3() -> Vec<RunConfig> {
    use Scenario::*;
    vec![run("", &[MlRaw, MinDistance, MagnitudeRatio], "0:30:2", 1, 2, STOP)]
}

fn fig4_desk() -> Vec<RunConfig> {
    [50, 100, 200]
        .into_iter()
        .map(|m| run(&format!("m{m}"), &[Scenario::Averaging], "30:54:2", m, 2, STOP))
        .collect()
}

fn fig5_desk() -> Vec<RunConfig> {
    use Scenario::*;
    vec![run(
        "m100",
        &[Averaging, RepHard, RepSoft, RepHardInterleaved, RepSoftInterleaved],
        "5:30:5",
        100,
        2,
        STOP,
    )]
}

fn fig6_desk() -> Vec<RunConfig> {
    use Scenario::*;
    vec![run("m100", &[Energy, RepSoftInterleaved], "15:35:5", 100, 2, STOP)]
}

fn fig8_desk() -> Vec<RunConfig> {
    let s = [Scenario::RatioSelection];
    vec![
        run("q4_m50", &s, "5:25:5", 50, 4, STOP),
        run("q4_m100", &s, "5:25:5", 100, 4, STOP),
        run("q2_m100", &s, "5:25:5", 100, 2, STOP),
    ]
}

fn fig9_desk() -> Vec<RunConfig> {
    [PhaseMode::Uncompensated, PhaseMode::Compensated, PhaseMode::Perfect]
        .into_iter()
        .map(|mode| RunConfig {
            phase_mode: mode,
            ..run(
                crate::config::phase_mode_name(mode),
                &[Scenario::RepSoftInterleaved],
                "10:30:5",
                100,
                2,
                STOP,
            )
        })
        .collect()
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig3",
        description: "single-sample detectors (ML ratio, min-distance, magnitude ratio), 0-30 dB",
        build: fig3,
    },
    Preset {
        name: "fig4_desk",
        description: "symbol averaging at M = 50, 100, 200",
        build: fig4_desk,
    },
    Preset {
        name: "fig5_desk",
        description: "averaging, hard and soft decoding with and without interleaving, M = 100",
        build: fig5_desk,
    },
    Preset {
        name: "fig6_desk",
        description: "energy detector vs interleaved soft ratio detector, M = 100",
        build: fig6_desk,
    },
    Preset {
        name: "fig8_desk",
        description: "ratio selection with Q = 4 (M = 50, 100) vs Q = 2 (M = 100)",
        build: fig8_desk,
    },
    Preset {
        name: "fig9_desk",
        description: "no, estimated and perfect phase compensation, interleaved soft, M = 100",
        build: fig9_desk,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for p in PRESETS {
            for r in p.runs() {
                for spec in r.specs() {
                    spec.validate().unwrap_or_else(|e| panic!("{} {}: {e}", p.name, spec.scenario));
                }
            }
        }
    }

    #[test]
    fn fig3_has_three_scenarios() {
        let runs = find("fig3").unwrap().runs();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].scenarios.len(), 3);
        assert_eq!(runs[0].snr_grid_db.first(), Some(&0.0));
        assert_eq!(runs[0].snr_grid_db.last(), Some(&30.0));
    }

    #[test]
    fn labels_unique_within_preset() {
        for p in PRESETS {
            let mut labels: Vec<_> = p.runs().into_iter().map(|r| r.label).collect();
            let n = labels.len();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), n, "{}", p.name);
        }
    }
}
