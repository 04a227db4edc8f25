//! Scenario geometry, link budget, correlated Rayleigh fading and AWGN.
//!
//! Users are dropped uniformly over the cell area (outside a 35 m exclusion
//! radius) and assigned to the beam nearest their azimuth. Each frame sees an
//! independent block-flat channel `H = R_rx^{1/2} G R_tx^{1/2}` with
//! exponential antenna correlation and unit average entry power. The transmit
//! frame has unit power, so the per-antenna SNR is applied by setting the
//! noise variance `σ² = 10^{−SNR/10}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::beamforming::BeamformingMatrix;
use crate::linalg::{c, CMatrix};

/// Path-loss model validity floor.
pub const MIN_PATH_LOSS_DISTANCE_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    #[default]
    Low,
    Medium,
    High,
}

impl Correlation {
    pub fn rho(self) -> f64 {
        match self {
            Self::Low => 0.1,
            Self::Medium => 0.5,
            Self::High => 0.9,
        }
    }
}

/// Radio parameters of the simulated cell. Defaults describe a 500 m urban
/// macro cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub n_t: usize,
    pub n_r: usize,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub bs_height_m: f64,
    pub tx_power_dbm: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// Building penetration and shadowing margin on top of the path loss.
    pub additional_loss_db: f64,
    /// Receiver SNR ceiling (EVM floor); `None` disables it.
    pub snr_ceiling_db: Option<f64>,
    pub n_users: usize,
    pub correlation: Correlation,
    pub outage_per_threshold: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n_t: 4,
            n_r: 4,
            cell_radius_m: 500.0,
            min_distance_m: 35.0,
            bs_height_m: 15.0,
            tx_power_dbm: 50.0,
            carrier_hz: 1.9e9,
            bandwidth_hz: 5e6,
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 7.0,
            additional_loss_db: 30.0,
            snr_ceiling_db: Some(30.0),
            n_users: 100,
            correlation: Correlation::Low,
            outage_per_threshold: 0.01,
            seed: 1,
        }
    }
}

impl Scenario {
    /// Checks the ranges the rest of the simulator relies on.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("cell_radius_m", self.cell_radius_m),
            ("bs_height_m", self.bs_height_m),
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.n_t == 0 || self.n_r == 0 {
            return Err("n_t and n_r must be at least 1".into());
        }
        if self.n_users == 0 {
            return Err("n_users must be at least 1".into());
        }
        if !(self.min_distance_m >= 0.0 && self.min_distance_m < self.cell_radius_m) {
            return Err(format!(
                "min_distance_m must lie in [0, cell_radius_m), got {}",
                self.min_distance_m
            ));
        }
        if !(self.outage_per_threshold > 0.0 && self.outage_per_threshold < 1.0) {
            return Err(format!(
                "outage_per_threshold must lie in (0, 1), got {}",
                self.outage_per_threshold
            ));
        }
        Ok(())
    }
}

/// Polar position relative to the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub distance_m: f64,
    pub azimuth_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub user_id: usize,
    pub position: Position,
    /// Zero-based beam index.
    pub group: usize,
    pub path_loss_db: f64,
    pub snr_db: f64,
}

impl UserDrop {
    /// Noise variance for a unit-power transmit frame.
    pub fn sigma2(&self) -> f64 {
        snr_to_sigma2(self.snr_db)
    }
}

pub fn snr_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Macro cell urban path loss, `128.1 + 37.6·log10(d_km)`, with the distance
/// clamped at 10 m.
pub fn path_loss_db(distance_m: f64) -> f64 {
    let d_km = distance_m.max(MIN_PATH_LOSS_DISTANCE_M) / 1000.0;
    128.1 + 37.6 * d_km.log10()
}

/// Thermal noise over the bandwidth plus noise figure, in dBm.
pub fn noise_power_dbm(scenario: &Scenario) -> f64 {
    scenario.noise_density_dbm_hz + 10.0 * scenario.bandwidth_hz.log10() + scenario.noise_figure_db
}

/// Per-antenna SNR at a given distance.
///
/// `tx − PL − extra − N`, then softly limited by the ceiling:
/// `−10·log10(10^{−s/10} + 10^{−c/10})`.
pub fn snr_db_at(scenario: &Scenario, distance_m: f64) -> f64 {
    let link = scenario.tx_power_dbm
        - path_loss_db(distance_m)
        - scenario.additional_loss_db
        - noise_power_dbm(scenario);
    match scenario.snr_ceiling_db {
        Some(ceiling) => -10.0 * (10f64.powf(-link / 10.0) + 10f64.powf(-ceiling / 10.0)).log10(),
        None => link,
    }
}

/// Places a user at a known position.
pub fn place_user(
    scenario: &Scenario,
    beams: &BeamformingMatrix,
    user_id: usize,
    position: Position,
) -> UserDrop {
    UserDrop {
        user_id,
        position,
        group: beams.nearest_beam(position.azimuth_deg),
        path_loss_db: path_loss_db(position.distance_m),
        snr_db: snr_db_at(scenario, position.distance_m),
    }
}

/// Uniform-in-area drop of `scenario.n_users` users.
pub fn drop_users<R: Rng + ?Sized>(
    scenario: &Scenario,
    beams: &BeamformingMatrix,
    rng: &mut R,
) -> Vec<UserDrop> {
    let r_min2 = scenario.min_distance_m.powi(2);
    let r_max2 = scenario.cell_radius_m.powi(2);
    (0..scenario.n_users)
        .map(|id| {
            let u: f64 = rng.random();
            let distance_m = (r_min2 + u * (r_max2 - r_min2)).sqrt();
            let azimuth_deg = rng.random_range(-180.0..180.0);
            place_user(
                scenario,
                beams,
                id,
                Position {
                    distance_m,
                    azimuth_deg,
                },
            )
        })
        .collect()
}

/// `R[i,j] = ρ^{|i−j|}`.
pub fn exponential_correlation(n: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

/// Symmetric square root of a real PSD matrix.
fn psd_sqrt(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.symmetric_eigen();
    let sqrt_vals = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose()
}

/// Kronecker correlated Rayleigh channel generator with fixed factors.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    rx_sqrt: CMatrix,
    tx_sqrt: CMatrix,
    identity: bool,
}

impl ChannelModel {
    pub fn new(n_r: usize, n_t: usize, rho: f64) -> Self {
        let to_c = |m: DMatrix<f64>| m.map(|v| c(v, 0.0));
        Self {
            rx_sqrt: to_c(psd_sqrt(exponential_correlation(n_r, rho))),
            tx_sqrt: to_c(psd_sqrt(exponential_correlation(n_t, rho))),
            identity: rho == 0.0,
        }
    }

    pub fn n_r(&self) -> usize {
        self.rx_sqrt.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.tx_sqrt.nrows()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        let g = complex_gaussian(self.n_r(), self.n_t(), 1.0, rng);
        if self.identity {
            g
        } else {
            &self.rx_sqrt * g * &self.tx_sqrt
        }
    }
}

pub fn draw_channel<R: Rng + ?Sized>(n_r: usize, n_t: usize, rho: f64, rng: &mut R) -> CMatrix {
    ChannelModel::new(n_r, n_t, rho).draw(rng)
}

/// Circularly symmetric complex Gaussian matrix with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut R,
) -> CMatrix {
    let s = (variance / 2.0).sqrt();
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// `Y = H·S + W` with explicitly supplied noise.
pub fn apply_channel_with_noise(h: &CMatrix, tx: &CMatrix, noise: &CMatrix) -> CMatrix {
    h * tx + noise
}

/// `Y = H·S + W`, `W` white with per-entry variance `sigma2`.
pub fn apply_channel<R: Rng + ?Sized>(
    h: &CMatrix,
    tx: &CMatrix,
    sigma2: f64,
    rng: &mut R,
) -> CMatrix {
    let noise = complex_gaussian(h.nrows(), tx.ncols(), sigma2, rng);
    apply_channel_with_noise(h, tx, &noise)
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub sigma2: f64,
}
