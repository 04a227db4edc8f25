//! Fast self-check suite behind `noma-sim validate`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::BeamformingMatrix;
use crate::channel::complex_gaussian;
use crate::codec::{
    crc, decode, encode, CodeRate, Constellation, CrcStatus, Mcs, Payload, StreamRole,
    TransportFormat, MCS_TABLE,
};
use crate::linalg::{identity, min_eigenvalue, relative_frobenius, CMatrix};
use crate::mmse::{mmse_filter, PreEqualizer};
use crate::receivers::filters::{self, Observation};
use crate::receivers::Knowledge;
use crate::simulation::{coverage, joint_coverage, Stream, TrialRecord};
use crate::transmitter::{mean_radiated_power, superpose, transmit, StreamGains};

pub const FILTER_TOL: f64 = 1e-9;
pub const COLLAPSE_TOL: f64 = 1e-10;

/// One row of an MCS table file. Fields stay textual so unsupported entries
/// are reported by the roundtrip property instead of failing to load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsTableEntry {
    pub index: u8,
    pub constellation: String,
    pub code_rate: String,
}

impl From<&Mcs> for McsTableEntry {
    fn from(m: &Mcs) -> Self {
        Self {
            index: m.index,
            constellation: serde_json::to_value(m.constellation)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            code_rate: m.code_rate.to_string(),
        }
    }
}

impl McsTableEntry {
    pub fn resolve(&self) -> Result<Mcs, String> {
        let constellation: Constellation =
            serde_json::from_value(serde_json::Value::String(self.constellation.clone()))
                .map_err(|_| format!("unknown constellation {:?}", self.constellation))?;
        let (n, d) = self
            .code_rate
            .split_once('/')
            .and_then(|(n, d)| Some((n.trim().parse().ok()?, d.trim().parse().ok()?)))
            .ok_or_else(|| format!("malformed code rate {:?}", self.code_rate))?;
        let rate = CodeRate::from_fraction(n, d)
            .ok_or_else(|| format!("unsupported code rate {}/{}", n, d))?;
        Ok(Mcs::new(self.index, constellation, rate))
    }
}

pub fn default_mcs_table() -> Vec<McsTableEntry> {
    MCS_TABLE.iter().map(McsTableEntry::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Haar-distributed unitary matrix from the QR factorization of a complex
/// Gaussian matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = complex_gaussian(n, n, 1.0, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random filter test instance: channel, unitary beams, beam index, gains
/// and noise variance with `σ²` log-uniform in `[1e-3, 10]`.
pub struct Instance {
    pub h: CMatrix,
    pub beams: BeamformingMatrix,
    pub k: usize,
    pub alpha: f64,
    pub sigma2: f64,
    pub gains: StreamGains,
}

pub fn random_instance<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Instance {
    let h = complex_gaussian(n, n, 1.0, rng);
    let beams = BeamformingMatrix::from_matrix(random_unitary(n, rng)).expect("square");
    let k = rng.random_range(0..n);
    let alpha = rng.random_range(0.01..0.99);
    let sigma2 = 10f64.powf(rng.random_range(-3.0..1.0));
    let gains = StreamGains::new(alpha, n).expect("alpha in range");
    Instance {
        h,
        beams,
        k,
        alpha,
        sigma2,
        gains,
    }
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))?;
        if a[(pivot, col)].norm() == 0.0 {
            return None;
        }
        a.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[(i, col)];
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}

type Closed = fn(&Observation, &BeamformingMatrix, usize, StreamGains) -> CMatrix;

fn observations(inst: &Instance) -> Vec<(&'static str, Observation)> {
    let eq = PreEqualizer::new(&inst.h, inst.sigma2).expect("regular pre-equalizer");
    vec![
        ("direct", Observation::direct(&inst.h, inst.sigma2)),
        ("pre-eq", Observation::from_equalizer(&eq)),
    ]
}

fn worst_closed_form_error(instances: &[Instance]) -> (f64, String) {
    let variants: [(&str, Closed, Closed); 5] = [
        (
            "broadcast full-B",
            |o, b, _, g| filters::broadcast_filter_full(o, b, g).unwrap(),
            |o, b, k, g| {
                mmse_filter(&filters::broadcast_model(o, b, k, g, Knowledge::FullB).unwrap())
                    .unwrap()
            },
        ),
        (
            "multicast full-B",
            |o, b, k, g| filters::multicast_filter_full(o, b, k, g).unwrap(),
            |o, b, k, g| {
                mmse_filter(&filters::multicast_model(o, b, k, g, Knowledge::FullB).unwrap())
                    .unwrap()
            },
        ),
        (
            "broadcast beam-only",
            |o, b, k, g| filters::broadcast_filter_beam(o, b, k, g).unwrap(),
            |o, b, k, g| {
                mmse_filter(&filters::broadcast_model(o, b, k, g, Knowledge::BeamOnly).unwrap())
                    .unwrap()
            },
        ),
        (
            "multicast beam-only",
            |o, b, k, g| filters::multicast_filter_beam(o, b, k, g).unwrap(),
            |o, b, k, g| {
                mmse_filter(&filters::multicast_model(o, b, k, g, Knowledge::BeamOnly).unwrap())
                    .unwrap()
            },
        ),
        (
            "joint",
            |o, b, k, g| filters::joint_filter(o, b, k, g).unwrap(),
            |o, b, k, g| mmse_filter(&filters::joint_model(o, b, k, g).unwrap()).unwrap(),
        ),
    ];
    let mut worst = (0.0f64, String::new());
    for inst in instances {
        for (obs_name, obs) in observations(inst) {
            for (name, closed, oracle) in &variants {
                let e = relative_frobenius(
                    &closed(&obs, &inst.beams, inst.k, inst.gains),
                    &oracle(&obs, &inst.beams, inst.k, inst.gains),
                );
                if e.is_nan() || e > worst.0 {
                    worst = (e, format!("{name} ({obs_name})"));
                }
            }
        }
    }
    worst
}

fn check_closed_forms(instances: &[Instance]) -> PropertyResult {
    let (e, which) = worst_closed_form_error(instances);
    PropertyResult::new(
        "closed_form_filters_match_mmse",
        e <= FILTER_TOL,
        format!(
            "10 variants x {} instances, worst {e:.2e} at {which}",
            instances.len()
        ),
    )
}

fn check_gauss_jordan(instances: &[Instance]) -> PropertyResult {
    let mut worst = 0.0f64;
    for inst in instances {
        let obs = Observation::direct(&inst.h, inst.sigma2);
        let model = filters::joint_model(&obs, &inst.beams, inst.k, inst.gains).unwrap();
        let a = model.a();
        let cov = model.czz() + a * a.adjoint();
        let brute = match gauss_jordan_inverse(&cov) {
            Some(inv) => a.adjoint() * inv,
            None => {
                return PropertyResult::new("mmse_matches_gauss_jordan", false, "singular".into())
            }
        };
        let e = relative_frobenius(&mmse_filter(&model).unwrap(), &brute);
        worst = if e > worst || e.is_nan() { e } else { worst };
    }
    PropertyResult::new(
        "mmse_matches_gauss_jordan",
        worst <= FILTER_TOL,
        format!("worst relative error {worst:.2e}"),
    )
}

fn check_collapse(instances: &[Instance]) -> PropertyResult {
    let mut worst = 0.0f64;
    for inst in instances {
        for (_, obs) in observations(inst) {
            let (b, k, g) = (&inst.beams, inst.k, inst.gains);
            let e1 = relative_frobenius(
                &filters::multicast_filter_full(&obs, b, k, g).unwrap(),
                &filters::multicast_filter_full_expanded(&obs, b, k, g).unwrap(),
            );
            let e2 = relative_frobenius(
                &filters::broadcast_filter_beam(&obs, b, k, g).unwrap(),
                &filters::broadcast_filter_beam_expanded(&obs, b, k, g).unwrap(),
            );
            worst = worst.max(e1).max(e2);
        }
    }
    PropertyResult::new(
        "printed_forms_collapse",
        worst <= COLLAPSE_TOL,
        format!("worst relative error {worst:.2e}"),
    )
}

fn check_unitarity(rng: &mut ChaCha8Rng) -> PropertyResult {
    let mut worst = 0.0f64;
    for n in 1..=8 {
        worst = worst.max(BeamformingMatrix::dft(n).unwrap().unitarity_defect());
        let angles: Vec<f64> = (0..n)
            .map(|i| -60.0 + 120.0 * (i as f64 + rng.random_range(0.2..0.8)) / n as f64)
            .collect();
        worst = worst.max(
            BeamformingMatrix::steered(&angles)
                .unwrap()
                .unitarity_defect(),
        );
    }
    PropertyResult::new(
        "beams_are_unitary",
        worst <= 1e-12,
        format!("worst ||B^H B - I||_F {worst:.2e} for N_t = 1..8"),
    )
}

fn check_mcs_table(table: &[McsTableEntry], rng: &mut ChaCha8Rng) -> PropertyResult {
    const NAME: &str = "mcs_table_roundtrip";
    if table.is_empty() {
        return PropertyResult::new(NAME, false, "table is empty".into());
    }
    for (pos, entry) in table.iter().enumerate() {
        if entry.index as usize != pos {
            return PropertyResult::new(
                NAME,
                false,
                format!("entry {pos} has index {}", entry.index),
            );
        }
        let mcs = match entry.resolve() {
            Ok(m) => m,
            Err(e) => return PropertyResult::new(NAME, false, format!("MCS {}: {e}", entry.index)),
        };
        let format = match TransportFormat::for_symbol_budget(mcs, 256) {
            Ok(f) => f,
            Err(e) => return PropertyResult::new(NAME, false, e.to_string()),
        };
        let payload = Payload::random(format.payload_bits, rng);
        let ok = encode(&payload, &format)
            .and_then(|b| decode(&b.symbols, &format, 1e-3))
            .map(|p| p.crc == CrcStatus::Pass && p.bits == payload.bits)
            .unwrap_or(false);
        if !ok {
            return PropertyResult::new(
                NAME,
                false,
                format!("noiseless roundtrip failed for {mcs}"),
            );
        }
    }
    PropertyResult::new(
        NAME,
        true,
        format!("{} entries encode and decode exactly", table.len()),
    )
}

fn check_constellations() -> PropertyResult {
    let mut worst = 0.0f64;
    for c in [
        Constellation::Qpsk,
        Constellation::Qam16,
        Constellation::Qam64,
    ] {
        let pts = c.points();
        let e = pts.iter().map(|(_, p)| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
        worst = worst.max((e - 1.0).abs());
    }
    PropertyResult::new(
        "constellations_unit_energy",
        worst <= 1e-12,
        format!("worst |E|s|^2 - 1| {worst:.2e}"),
    )
}

fn check_noise_covariance(instances: &[Instance]) -> PropertyResult {
    let mut worst = f64::INFINITY;
    for inst in instances {
        let eq = PreEqualizer::new(&inst.h, inst.sigma2).unwrap();
        let rw = eq.noise_covariance();
        let scale = rw.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        worst = worst.min(min_eigenvalue(rw) / scale);
    }
    PropertyResult::new(
        "preeq_noise_covariance_psd",
        worst >= -1e-12,
        format!("smallest normalized eigenvalue {worst:.2e}"),
    )
}

fn check_power_balance(rng: &mut ChaCha8Rng) -> PropertyResult {
    let n_t = 4;
    let n = 4096;
    let beams = BeamformingMatrix::dft(n_t).unwrap();
    let qpsk = Mcs::from_index(0).unwrap();
    let block = |rng: &mut ChaCha8Rng, role| {
        let bits: Vec<u8> = (0..2 * n).map(|_| rng.random::<bool>() as u8).collect();
        crate::codec::CodedBlock {
            symbols: Constellation::Qpsk.map(&bits),
            mcs: qpsk,
            role,
        }
    };
    let mc: Vec<_> = (0..n_t)
        .map(|k| block(rng, StreamRole::Multicast(k)))
        .collect();
    let bc = block(rng, StreamRole::Broadcast);
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let tx = transmit(&superpose(&mc, &bc, alpha).unwrap(), &beams).unwrap();
        worst = worst.max((mean_radiated_power(&tx) - 1.0).abs());
    }
    PropertyResult::new(
        "transmit_power_balanced",
        worst <= 0.05,
        format!("worst |P - 1| {worst:.3} over alpha in {{0, .25, .5, .75, 1}}"),
    )
}

fn check_crc() -> PropertyResult {
    let bits: Vec<u8> = b"123456789"
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect();
    let v = crc::crc16(&bits);
    PropertyResult::new("crc_check_value", v == 0x29B1, format!("0x{v:04X}"))
}

fn check_metric_bound(rng: &mut ChaCha8Rng) -> PropertyResult {
    for _ in 0..200 {
        let n = rng.random_range(1..30);
        let recs: Vec<TrialRecord> = (0..n)
            .map(|user_id| TrialRecord {
                user_id,
                group_k: 1,
                mcs_index: 0,
                alpha: 0.5,
                frames: 100,
                bc_errors: rng.random_range(0..4),
                mc_errors: rng.random_range(0..4),
                snr_db: 0.0,
            })
            .collect();
        let bc = coverage(&recs, Stream::Broadcast, 0.01).unwrap();
        let mc = coverage(&recs, Stream::Multicast, 0.01).unwrap();
        let joint = joint_coverage(&recs, &recs, 0.01).unwrap();
        if joint > bc.min(mc) {
            return PropertyResult::new(
                "joint_coverage_bounded",
                false,
                format!("joint {joint} > min({bc}, {mc})"),
            );
        }
    }
    PropertyResult::new(
        "joint_coverage_bounded",
        true,
        "200 synthetic groups".into(),
    )
}

/// Runs every property with `instances` random filter instances.
pub fn run_validation(
    mcs_table: &[McsTableEntry],
    instances: usize,
    seed: u64,
) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst: Vec<Instance> = (0..instances)
        .map(|_| random_instance(4, &mut rng))
        .collect();
    vec![
        check_closed_forms(&inst),
        check_gauss_jordan(&inst),
        check_collapse(&inst),
        check_unitarity(&mut rng),
        check_mcs_table(mcs_table, &mut rng),
        check_constellations(),
        check_noise_covariance(&inst),
        check_power_balance(&mut rng),
        check_crc(),
        check_metric_bound(&mut rng),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_builtin_table() {
        let results = run_validation(&default_mcs_table(), 20, 3);
        assert!(results.len() >= 6);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn unsupported_rate_fails_roundtrip() {
        let mut table = default_mcs_table();
        table[2].code_rate = "5/6".into();
        let results = run_validation(&table, 2, 3);
        let r = results
            .iter()
            .find(|r| r.name == "mcs_table_roundtrip")
            .unwrap();
        assert!(!r.passed);
        assert!(r.detail.contains("5/6"));
    }

    #[test]
    fn gauss_jordan_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = complex_gaussian(5, 5, 1.0, &mut rng);
        let inv = gauss_jordan_inverse(&m).unwrap();
        assert!(relative_frobenius(&(&m * inv), &identity(5)) < 1e-12);
    }
}
