//! Coverage report and its JSON/CSV serializations.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beamforming::BeamBuilder;
use crate::channel::Scenario;
use crate::codec::{CodeRate, Constellation, TransportFormat};
use crate::receivers::ReceiverConfig;

use super::metrics::{SnrDistribution, TrialRecord};
use super::sweep::SweepSpec;

pub const COVERAGE_CSV_HEADER: &str =
    "group,mcs,alpha,coverage_bc,coverage_mc,joint_coverage,n_users,n_frames";
pub const SNR_CSV_HEADER: &str = "bin_db,pdf,cdf";

/// Modelling substitutions every report carries.
pub const DEVIATIONS: [&str; 4] = [
    "codec: K=7 rate-1/3 convolutional code with puncturing and CRC-16 instead of the LTE turbo code",
    "channel: block-flat Kronecker-correlated Rayleigh fading per frame instead of ITU Pedestrian B",
    "link budget: 30 dB penetration/shadowing margin and a 30 dB receiver SNR ceiling",
    "mcs: indices refer to this simulator's own 8-entry table, not LTE CQI or MCS indices",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    /// One-based group (beam) index.
    pub group: usize,
    pub mcs: u8,
    pub alpha: f64,
    pub coverage_bc: f64,
    pub coverage_mc: f64,
    pub joint_coverage: f64,
    pub n_users: usize,
    pub n_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsRow {
    pub index: u8,
    pub constellation: Constellation,
    pub code_rate: CodeRate,
    pub payload_bits: usize,
    pub n_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: Scenario,
    pub receiver: ReceiverConfig,
    pub beamformer: BeamBuilder,
    pub seed: u64,
    pub frames_per_user: usize,
    pub symbols_per_block: usize,
    pub mcs_table: Vec<McsRow>,
    pub cells: Vec<CoverageCell>,
    pub records: Vec<TrialRecord>,
    pub deviations: Vec<String>,
    pub notes: Vec<String>,
}

impl CoverageReport {
    pub(crate) fn new(
        spec: &SweepSpec,
        cells: Vec<CoverageCell>,
        records: Vec<TrialRecord>,
    ) -> Self {
        let mcs_table = spec
            .mcs
            .iter()
            .filter_map(|&m| TransportFormat::for_symbol_budget(m, spec.symbols_per_block).ok())
            .map(|f| McsRow {
                index: f.mcs.index,
                constellation: f.mcs.constellation,
                code_rate: f.mcs.code_rate,
                payload_bits: f.payload_bits,
                n_symbols: f.n_symbols,
            })
            .collect();
        Self {
            scenario: spec.scenario.clone(),
            receiver: spec.receiver,
            beamformer: spec.beams.builder().clone(),
            seed: spec.seed,
            frames_per_user: spec.frames_per_user,
            symbols_per_block: spec.symbols_per_block,
            mcs_table,
            cells,
            records,
            deviations: DEVIATIONS.iter().map(|s| s.to_string()).collect(),
            notes: vec![spec.beams.broadcast_pattern_note()],
        }
    }

    pub fn cell(&self, group: usize, mcs: u8, alpha: f64) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.group == group && c.mcs == mcs && c.alpha == alpha)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn coverage_csv(&self) -> String {
        let mut s = String::from(COVERAGE_CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                c.group,
                c.mcs,
                c.alpha,
                c.coverage_bc,
                c.coverage_mc,
                c.joint_coverage,
                c.n_users,
                c.n_frames
            );
        }
        s
    }

    /// Writes `report.json` and `coverage.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("report.json"), self.to_json().as_bytes())?;
        write_atomic(&dir.join("coverage.csv"), self.coverage_csv().as_bytes())
    }
}

pub fn snr_csv(dist: &SnrDistribution) -> String {
    let mut s = String::from(SNR_CSV_HEADER);
    s.push('\n');
    for b in &dist.bins {
        let _ = writeln!(s, "{},{},{}", b.bin_db, b.pdf, b.cdf);
    }
    s
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
