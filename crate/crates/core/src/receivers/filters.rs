//! Closed-form MMSE filters for every receiver variant.
//!
//! Each filter is written over an [`Observation`] `z = E·B·x + n` with
//! `Cov(n) = N`. A direct observation has `E = H`, `N = σ²I`; after MMSE
//! pre-equalization the channel is treated as suppressed, `E = I`, `N = R_w`.
//! Stream amplitudes come from [`StreamGains`] (`g_MC`, `g_BC`).
//!
//! The `*_model` functions return the observation model each closed form is
//! the MMSE solution of, for cross-checking against [`mmse_filter`].
//!
//! [`mmse_filter`]: crate::mmse::mmse_filter

use num_complex::Complex64;

use crate::beamforming::BeamformingMatrix;
use crate::linalg::{column, identity, CMatrix};
use crate::mmse::{right_divide_hermitian, LinearObservationModel, MmseError, PreEqualizer};
use crate::transmitter::StreamGains;

use super::Knowledge;

/// Effective channel and noise covariance seen by the filters.
#[derive(Debug, Clone)]
pub struct Observation {
    channel: CMatrix,
    noise: CMatrix,
    pre_equalized: bool,
}

impl Observation {
    /// `E = H`, `N = σ²I`.
    pub fn direct(h: &CMatrix, sigma2: f64) -> Self {
        Self {
            channel: h.clone(),
            noise: identity(h.nrows()).scale(sigma2),
            pre_equalized: false,
        }
    }

    /// `E = I`, `N = R_w`.
    pub fn pre_equalized(rw: &CMatrix) -> Self {
        Self {
            channel: identity(rw.nrows()),
            noise: rw.clone(),
            pre_equalized: true,
        }
    }

    pub fn from_equalizer(eq: &PreEqualizer) -> Self {
        Self::pre_equalized(eq.noise_covariance())
    }

    pub fn channel(&self) -> &CMatrix {
        &self.channel
    }

    pub fn noise(&self) -> &CMatrix {
        &self.noise
    }

    pub fn is_pre_equalized(&self) -> bool {
        self.pre_equalized
    }

    pub fn dim(&self) -> usize {
        self.channel.nrows()
    }
}

fn sq(v: f64) -> Complex64 {
    Complex64::new(v * v, 0.0)
}

fn check(obs: &Observation, beams: &BeamformingMatrix, k: usize) -> Result<(), MmseError> {
    if obs.channel.ncols() != beams.n_t() {
        return Err(MmseError::Dimension(format!(
            "channel has {} columns but there are {} beams",
            obs.channel.ncols(),
            beams.n_t()
        )));
    }
    if k >= beams.n_t() {
        return Err(MmseError::Dimension(format!(
            "beam index {k} out of range for {} beams",
            beams.n_t()
        )));
    }
    Ok(())
}

/// Full-B broadcast filter, multicast streams as interference:
/// `g_BC·1^H B^H E^H (N + g_MC²·E E^H + g_BC²·E B1 1^H B^H E^H)^{-1}`.
pub fn broadcast_filter_full(
    obs: &Observation,
    beams: &BeamformingMatrix,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, 0)?;
    let e = &obs.channel;
    let a = e * column(&beams.broadcast_beam());
    let inner =
        &obs.noise + e * e.adjoint() * sq(gains.multicast) + &a * a.adjoint() * sq(gains.broadcast);
    right_divide_hermitian(&a.adjoint().scale(gains.broadcast), &inner)
}

/// Full-B multicast filter after broadcast cancellation, expanded form:
/// `g_MC·b_k^H E^H (N + g_MC²·E B̆_k B̆_k^H E^H + g_MC²·E b_k b_k^H E^H)^{-1}`.
pub fn multicast_filter_full_expanded(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, k)?;
    let e = &obs.channel;
    let eb = e * beams.interfering_beams(k);
    let a = e * column(&beams.beam(k));
    let g2 = sq(gains.multicast);
    let inner = &obs.noise + &eb * eb.adjoint() * g2 + &a * a.adjoint() * g2;
    right_divide_hermitian(&a.adjoint().scale(gains.multicast), &inner)
}

/// Full-B multicast filter with `B̆_k B̆_k^H + b_k b_k^H = I` applied:
/// `g_MC·b_k^H E^H (N + g_MC²·E E^H)^{-1}`.
pub fn multicast_filter_full(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, k)?;
    let e = &obs.channel;
    let inner = &obs.noise + e * e.adjoint() * sq(gains.multicast);
    let lhs = (e * column(&beams.beam(k)))
        .adjoint()
        .scale(gains.multicast);
    right_divide_hermitian(&lhs, &inner)
}

/// Beam-only broadcast filter, channel assumed matched to `b_k`, expanded:
/// `g_BC·b_k^H E^H (N + g_MC²·E b_k b_k^H E^H + g_BC²·E b_k b_k^H E^H)^{-1}`.
pub fn broadcast_filter_beam_expanded(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, k)?;
    let a = &obs.channel * column(&beams.beam(k));
    let r = &a * a.adjoint();
    let inner = &obs.noise + &r * sq(gains.multicast) + &r * sq(gains.broadcast);
    right_divide_hermitian(&a.adjoint().scale(gains.broadcast), &inner)
}

/// Beam-only broadcast filter with the two beam terms merged:
/// `g_BC·b_k^H E^H (N + (g_MC² + g_BC²)·E b_k b_k^H E^H)^{-1}`.
pub fn broadcast_filter_beam(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, k)?;
    let a = &obs.channel * column(&beams.beam(k));
    let total = gains.multicast.powi(2) + gains.broadcast.powi(2);
    let inner = &obs.noise + (&a * a.adjoint()).scale(total);
    right_divide_hermitian(&a.adjoint().scale(gains.broadcast), &inner)
}

/// Beam-only multicast filter after cancellation:
/// `g_MC·b_k^H E^H (N + g_MC²·E b_k b_k^H E^H)^{-1}`.
pub fn multicast_filter_beam(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, k)?;
    let a = &obs.channel * column(&beams.beam(k));
    let inner = &obs.noise + &a * a.adjoint() * sq(gains.multicast);
    right_divide_hermitian(&a.adjoint().scale(gains.multicast), &inner)
}

/// `Δ = diag(g_MC, g_BC)`.
fn delta(gains: StreamGains) -> CMatrix {
    let mut d = CMatrix::zeros(2, 2);
    d[(0, 0)] = Complex64::new(gains.multicast, 0.0);
    d[(1, 1)] = Complex64::new(gains.broadcast, 0.0);
    d
}

/// Joint filter, row 0 estimates `t_k`, row 1 estimates `t_BC`:
/// `Δ B̈_k^H E^H (N + g_MC²·E B̆_k B̆_k^H E^H + E B̈_k Δ² B̈_k^H E^H)^{-1}`.
pub fn joint_filter(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<CMatrix, MmseError> {
    check(obs, beams, k)?;
    let e = &obs.channel;
    let eb = e * beams.interfering_beams(k);
    let signal = e * beams.joint_beams(k) * delta(gains);
    let inner = &obs.noise + &eb * eb.adjoint() * sq(gains.multicast) + &signal * signal.adjoint();
    right_divide_hermitian(&signal.adjoint(), &inner)
}

/// Broadcast filter for the selected knowledge regime.
pub fn broadcast_filter(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
    knowledge: Knowledge,
) -> Result<CMatrix, MmseError> {
    match knowledge {
        Knowledge::FullB => broadcast_filter_full(obs, beams, gains),
        Knowledge::BeamOnly => broadcast_filter_beam(obs, beams, k, gains),
    }
}

/// Multicast filter for the selected knowledge regime. Full-B uses the
/// expanded form so it stays exact for any beam matrix.
pub fn multicast_filter(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
    knowledge: Knowledge,
) -> Result<CMatrix, MmseError> {
    match knowledge {
        Knowledge::FullB => multicast_filter_full_expanded(obs, beams, k, gains),
        Knowledge::BeamOnly => multicast_filter_beam(obs, beams, k, gains),
    }
}

fn scalar_cov() -> CMatrix {
    identity(1)
}

/// `A = g_BC·E B1`, `Czz = g_MC²·E B B^H E^H + N` (full-B) or
/// `A = g_BC·E b_k`, `Czz = g_MC²·E b_k b_k^H E^H + N` (beam-only).
pub fn broadcast_model(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
    knowledge: Knowledge,
) -> Result<LinearObservationModel, MmseError> {
    check(obs, beams, k)?;
    let e = &obs.channel;
    let g2 = sq(gains.multicast);
    let (a, czz) = match knowledge {
        Knowledge::FullB => {
            let eb = e * beams.matrix();
            let a = e * column(&beams.broadcast_beam());
            (a, &obs.noise + &eb * eb.adjoint() * g2)
        }
        Knowledge::BeamOnly => {
            let a = e * column(&beams.beam(k));
            let r = &a * a.adjoint();
            (a, &obs.noise + r * g2)
        }
    };
    LinearObservationModel::new(a.scale(gains.broadcast), scalar_cov(), czz)
}

/// `A = g_MC·E b_k` with `Czz = g_MC²·E B̆_k B̆_k^H E^H + N` (full-B) or
/// `Czz = N` (beam-only).
pub fn multicast_model(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
    knowledge: Knowledge,
) -> Result<LinearObservationModel, MmseError> {
    check(obs, beams, k)?;
    let e = &obs.channel;
    let a = (e * column(&beams.beam(k))).scale(gains.multicast);
    let czz = match knowledge {
        Knowledge::FullB => {
            let eb = e * beams.interfering_beams(k);
            &obs.noise + &eb * eb.adjoint() * sq(gains.multicast)
        }
        Knowledge::BeamOnly => obs.noise.clone(),
    };
    LinearObservationModel::new(a, scalar_cov(), czz)
}

/// `A = E B̈_k Δ`, `Cxx = I`, `Czz = g_MC²·E B̆_k B̆_k^H E^H + N`.
pub fn joint_model(
    obs: &Observation,
    beams: &BeamformingMatrix,
    k: usize,
    gains: StreamGains,
) -> Result<LinearObservationModel, MmseError> {
    check(obs, beams, k)?;
    let e = &obs.channel;
    let eb = e * beams.interfering_beams(k);
    let a = e * beams.joint_beams(k) * delta(gains);
    let czz = &obs.noise + &eb * eb.adjoint() * sq(gains.multicast);
    LinearObservationModel::new(a, identity(2), czz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, relative_frobenius};
    use crate::mmse::mmse_filter;

    fn e1(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, 1);
        m[(0, 0)] = c(1.0, 0.0);
        m
    }

    #[test]
    fn scalar_full_b_broadcast_is_one() {
        let beams = BeamformingMatrix::identity(1);
        let obs = Observation::direct(&identity(1), 0.0);
        let w =
            broadcast_filter_full(&obs, &beams, StreamGains::from_amplitudes(0.0, 1.0)).unwrap();
        assert!((w[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn beam_only_broadcast_hand_value() {
        let beams = BeamformingMatrix::identity(3);
        let obs = Observation::direct(&identity(3), 1.0);
        let g = StreamGains::from_amplitudes(0.5f64.sqrt(), 0.5f64.sqrt());
        let w = broadcast_filter_beam(&obs, &beams, 0, g).unwrap();
        let expected = e1(3).adjoint().scale(0.5f64.sqrt() / 2.0);
        assert!(relative_frobenius(&w, &expected) < 1e-15);
    }

    #[test]
    fn single_stream_multicast_scalar() {
        let beams = BeamformingMatrix::identity(1);
        let h = CMatrix::from_element(1, 1, c(0.6, -0.8));
        let obs = Observation::direct(&h, 0.3);
        let w = multicast_filter_full(&obs, &beams, 0, StreamGains::new(1.0, 1).unwrap()).unwrap();
        let expected = h.adjoint() / c(0.3 + 1.0, 0.0);
        assert!(relative_frobenius(&w, &expected) < 1e-14);
    }

    #[test]
    fn joint_broadcast_row_vanishes_without_broadcast_power() {
        let beams = BeamformingMatrix::dft(4).unwrap();
        let h = CMatrix::from_fn(4, 4, |i, j| {
            c((i + 2 * j) as f64 * 0.1 + 1.0, (i as f64) * 0.2 - 0.3)
        });
        let obs = Observation::direct(&h, 0.5);
        let g = StreamGains::new(1.0, 4).unwrap();
        let w = joint_filter(&obs, &beams, 1, g).unwrap();
        assert!(w.row(1).iter().all(|z| z.norm() < 1e-15));
        let mc =
            mmse_filter(&multicast_model(&obs, &beams, 1, g, Knowledge::FullB).unwrap()).unwrap();
        assert!(relative_frobenius(&w.rows(0, 1).into_owned(), &mc) < 1e-12);
    }

    #[test]
    fn closed_forms_match_models() {
        let beams = BeamformingMatrix::dft(4).unwrap();
        let h = CMatrix::from_fn(4, 4, |i, j| {
            c(((3 * i + j) % 5) as f64 - 2.0, (i * j) as f64 * 0.3)
        });
        let g = StreamGains::new(0.4, 4).unwrap();
        let direct = Observation::direct(&h, 0.2);
        let eq = PreEqualizer::new(&h, 0.2).unwrap();
        for obs in [direct, Observation::from_equalizer(&eq)] {
            for know in [Knowledge::FullB, Knowledge::BeamOnly] {
                let w = broadcast_filter(&obs, &beams, 2, g, know).unwrap();
                let o = mmse_filter(&broadcast_model(&obs, &beams, 2, g, know).unwrap()).unwrap();
                assert!(relative_frobenius(&w, &o) < 1e-10);
                let w = multicast_filter(&obs, &beams, 2, g, know).unwrap();
                let o = mmse_filter(&multicast_model(&obs, &beams, 2, g, know).unwrap()).unwrap();
                assert!(relative_frobenius(&w, &o) < 1e-10);
            }
            let w = joint_filter(&obs, &beams, 2, g).unwrap();
            let o = mmse_filter(&joint_model(&obs, &beams, 2, g).unwrap()).unwrap();
            assert!(relative_frobenius(&w, &o) < 1e-10);
        }
    }
}
