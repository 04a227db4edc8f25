//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls the crate's estimation code: inverses use a local
//! Gauss-Jordan elimination and every observation model is assembled from
//! its textbook definition.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type M = DMatrix<Complex64>;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> M {
    M::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cx(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Unitary matrix by classical Gram-Schmidt on a Gaussian matrix.
pub fn unitary<R: Rng>(n: usize, rng: &mut R) -> M {
    let g = gaussian(n, n, rng);
    let mut q = M::zeros(n, n);
    for j in 0..n {
        let mut v = g.column(j).into_owned();
        for i in 0..j {
            let qi = q.column(i).into_owned();
            let proj: Complex64 = qi.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v -= qi * proj;
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        q.set_column(j, &(v / cx(norm, 0.0)));
    }
    q
}

pub fn inverse(m: &M) -> M {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = eye(n);
    for c in 0..n {
        let mut p = c;
        for r in c + 1..n {
            if a[(r, c)].norm() > a[(p, c)].norm() {
                p = r;
            }
        }
        assert!(a[(p, c)].norm() > 0.0, "singular matrix");
        a.swap_rows(c, p);
        inv.swap_rows(c, p);
        let d = a[(c, c)];
        for j in 0..n {
            a[(c, j)] /= d;
            inv[(c, j)] /= d;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[(r, c)];
            if f == cx(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let (x, y) = (a[(c, j)], inv[(c, j)]);
                a[(r, j)] -= f * x;
                inv[(r, j)] -= f * y;
            }
        }
    }
    inv
}

/// `W = Cxx A^H (A Cxx A^H + Czz)^{-1}`.
pub fn lmmse(a: &M, cxx: &M, czz: &M) -> M {
    cxx * a.adjoint() * inverse(&(a * cxx * a.adjoint() + czz))
}

pub fn rel_err(a: &M, b: &M) -> f64 {
    let d: f64 = (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    d / n.max(f64::MIN_POSITIVE)
}

pub fn col(m: &M, k: usize) -> M {
    m.columns(k, 1).into_owned()
}

pub fn without_col(m: &M, k: usize) -> M {
    m.clone().remove_column(k)
}

pub fn column_sum(m: &M) -> M {
    let mut s = M::zeros(m.nrows(), 1);
    for j in 0..m.ncols() {
        s += m.column(j);
    }
    s
}

pub fn real(v: f64) -> Complex64 {
    cx(v, 0.0)
}

/// Pre-equalizer `(σ²I + H^H H)^{-1} H^H` and its noise covariance
/// `σ² H^H H (σ²I + H^H H)^{-2}`.
pub fn pre_equalizer(h: &M, sigma2: f64) -> (M, M) {
    let g = h.adjoint() * h;
    let inv = inverse(&(&g + eye(g.nrows()) * real(sigma2)));
    let m = &inv * h.adjoint();
    let rw = &g * &inv * &inv * real(sigma2);
    (m, rw)
}

/// Effective channel and noise covariance of an observation.
pub struct Obs {
    pub e: M,
    pub n: M,
}

impl Obs {
    pub fn direct(h: &M, sigma2: f64) -> Self {
        Self {
            e: h.clone(),
            n: eye(h.nrows()) * real(sigma2),
        }
    }

    pub fn pre_eq(h: &M, sigma2: f64) -> Self {
        let (_, rw) = pre_equalizer(h, sigma2);
        Self {
            e: eye(h.ncols()),
            n: rw,
        }
    }
}

/// Broadcast symbol, multicast streams as interference.
pub fn oracle_broadcast_full(o: &Obs, b: &M, g_mc: f64, g_bc: f64) -> M {
    let eb = &o.e * b;
    let a = &o.e * column_sum(b) * real(g_bc);
    lmmse(
        &a,
        &eye(1),
        &(&eb * eb.adjoint() * real(g_mc * g_mc) + &o.n),
    )
}

/// Multicast symbol after perfect broadcast removal.
pub fn oracle_multicast_full(o: &Obs, b: &M, k: usize, g_mc: f64) -> M {
    let e_int = &o.e * without_col(b, k);
    let a = &o.e * col(b, k) * real(g_mc);
    lmmse(
        &a,
        &eye(1),
        &(&e_int * e_int.adjoint() * real(g_mc * g_mc) + &o.n),
    )
}

/// Broadcast symbol when the channel is assumed aligned with `b_k`.
pub fn oracle_broadcast_beam(o: &Obs, b: &M, k: usize, g_mc: f64, g_bc: f64) -> M {
    let hb = &o.e * col(b, k);
    let a = &hb * real(g_bc);
    lmmse(
        &a,
        &eye(1),
        &(&hb * hb.adjoint() * real(g_mc * g_mc) + &o.n),
    )
}

/// Multicast symbol when the channel is assumed aligned with `b_k`.
pub fn oracle_multicast_beam(o: &Obs, b: &M, k: usize, g_mc: f64) -> M {
    let a = &o.e * col(b, k) * real(g_mc);
    lmmse(&a, &eye(1), &o.n)
}

/// Joint estimate of `(t_k, t_BC)`.
pub fn oracle_joint(o: &Obs, b: &M, k: usize, g_mc: f64, g_bc: f64) -> M {
    let mut bb = M::zeros(b.nrows(), 2);
    bb.set_column(0, &b.column(k));
    bb.set_column(1, &column_sum(b).column(0));
    let mut d = M::zeros(2, 2);
    d[(0, 0)] = real(g_mc);
    d[(1, 1)] = real(g_bc);
    let a = &o.e * bb * d;
    let e_int = &o.e * without_col(b, k);
    lmmse(
        &a,
        &eye(2),
        &(&e_int * e_int.adjoint() * real(g_mc * g_mc) + &o.n),
    )
}

/// Random filter instance drawn with the local generators.
pub struct Case {
    pub h: M,
    pub b: M,
    pub k: usize,
    pub sigma2: f64,
    pub g_mc: f64,
    pub g_bc: f64,
}

/// `N_t = N_r = n`, unitary beams, α uniform in (0, 1) and `σ²`
/// log-uniform in `[1e-3, 10]`.
pub fn random_case<R: Rng>(n: usize, rng: &mut R) -> Case {
    let alpha: f64 = rng.random_range(0.001..0.999);
    let sigma2 = 10f64.powf(rng.random_range(-3.0..=1.0));
    Case {
        h: gaussian(n, n, rng),
        b: unitary(n, rng),
        k: rng.random_range(0..n),
        sigma2,
        g_mc: (alpha / n as f64).sqrt(),
        g_bc: ((1.0 - alpha) / n as f64).sqrt(),
    }
}

use noma_core::beamforming::BeamformingMatrix;
use noma_core::codec::{encode, Payload, StreamRole, TransportFormat};
use noma_core::receivers::{receive, FrameContext, ReceiverConfig};
use noma_core::transmitter::{superpose, transmit, StreamGains};

/// Sends one frame through `y = H·s + n` and reports whether the broadcast
/// and the group-`k` multicast payloads were delivered.
#[allow(clippy::too_many_arguments)]
pub fn send_frame<R: Rng>(
    h: &M,
    sigma2: f64,
    beams: &BeamformingMatrix,
    k: usize,
    alpha: f64,
    format: &TransportFormat,
    config: &ReceiverConfig,
    rng: &mut R,
) -> (bool, bool) {
    let n_t = beams.n_t();
    let bc = Payload::random(format.payload_bits, rng);
    let mc: Vec<Payload> = (0..n_t)
        .map(|_| Payload::random(format.payload_bits, rng))
        .collect();
    let mc_blocks: Vec<_> = mc
        .iter()
        .enumerate()
        .map(|(i, p)| {
            encode(p, format)
                .unwrap()
                .with_role(StreamRole::Multicast(i))
        })
        .collect();
    let frame = superpose(&mc_blocks, &encode(&bc, format).unwrap(), alpha).unwrap();
    let s = transmit(&frame, beams).unwrap();
    let noise = gaussian(h.nrows(), s.ncols(), rng) * real(sigma2.sqrt());
    let y = h * s + noise;
    let ctx = FrameContext {
        h,
        sigma2,
        beams,
        k,
        gains: StreamGains::new(alpha, n_t).unwrap(),
        broadcast_format: *format,
        multicast_format: *format,
    };
    let out = receive(&y, &ctx, config).unwrap();
    (
        out.broadcast.delivered(&bc),
        out.multicast.delivered(&mc[k]),
    )
}
