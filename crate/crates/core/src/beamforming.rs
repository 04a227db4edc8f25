//! Orthonormal beamforming matrices.
//!
//! Two builders share one type: a DFT codebook and half-wavelength ULA
//! steering vectors orthonormalized by modified Gram-Schmidt in the order the
//! angles are given. Column `k` is beam `b_k`; the broadcast stream is radiated
//! through the column sum `B·1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, frobenius, identity, ones, CMatrix, CVector};

/// Residual norm below which Gram-Schmidt is considered to have broken down.
pub const GRAM_SCHMIDT_FLOOR: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("steering vectors are nearly collinear at beam {index} (residual norm {residual:e})")]
    DegenerateBeams { index: usize, residual: f64 },
    #[error("invalid steering angles: {0}")]
    InvalidAngles(String),
    #[error("beamformer needs at least one antenna")]
    NoAntennas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "angles_deg")]
pub enum BeamBuilder {
    Dft,
    Steered(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingMatrix {
    matrix: CMatrix,
    builder: BeamBuilder,
}

/// Unit-norm half-wavelength ULA response `a_m = exp(jπ m sin θ)/√N`.
pub fn steering_vector(angle_deg: f64, n: usize) -> CVector {
    let u = angle_deg.to_radians().sin();
    let norm = 1.0 / (n as f64).sqrt();
    CVector::from_iterator(
        n,
        (0..n).map(|m| {
            let phase = PI * m as f64 * u;
            c(phase.cos() * norm, phase.sin() * norm)
        }),
    )
}

impl BeamformingMatrix {
    /// `B[m,k] = exp(−j2π mk/N)/√N`.
    pub fn dft(n_t: usize) -> Result<Self, BeamError> {
        if n_t == 0 {
            return Err(BeamError::NoAntennas);
        }
        let norm = 1.0 / (n_t as f64).sqrt();
        let matrix = CMatrix::from_fn(n_t, n_t, |m, k| {
            let phase = -2.0 * PI * ((m * k) % n_t) as f64 / n_t as f64;
            c(phase.cos() * norm, phase.sin() * norm)
        });
        Ok(Self {
            matrix,
            builder: BeamBuilder::Dft,
        })
    }

    /// Steering vectors at `angles_deg`, orthonormalized in the given order.
    pub fn steered(angles_deg: &[f64]) -> Result<Self, BeamError> {
        let n_t = angles_deg.len();
        if n_t == 0 {
            return Err(BeamError::NoAntennas);
        }
        for (i, &a) in angles_deg.iter().enumerate() {
            if !a.is_finite() || a.abs() >= 90.0 {
                return Err(BeamError::InvalidAngles(format!(
                    "angle {a} at position {i} is outside (-90, 90)"
                )));
            }
            if angles_deg[..i].contains(&a) {
                return Err(BeamError::InvalidAngles(format!("angle {a} appears twice")));
            }
        }
        let mut matrix = CMatrix::zeros(n_t, n_t);
        for (k, &angle) in angles_deg.iter().enumerate() {
            let mut v = steering_vector(angle, n_t);
            for j in 0..k {
                let q = matrix.column(j);
                let proj = q.dotc(&v);
                v -= q * proj;
            }
            let residual = v.norm();
            if residual < GRAM_SCHMIDT_FLOOR {
                return Err(BeamError::DegenerateBeams { index: k, residual });
            }
            matrix.set_column(k, &(v / c(residual, 0.0)));
        }
        Ok(Self {
            matrix,
            builder: BeamBuilder::Steered(angles_deg.to_vec()),
        })
    }

    /// Wraps an arbitrary square matrix; used for fixtures and random unitary
    /// instances.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self, BeamError> {
        if matrix.nrows() == 0 || !matrix.is_square() {
            return Err(BeamError::NoAntennas);
        }
        Ok(Self {
            builder: BeamBuilder::Steered(Vec::new()),
            matrix,
        })
    }

    pub fn identity(n_t: usize) -> Self {
        Self {
            matrix: identity(n_t),
            builder: BeamBuilder::Dft,
        }
    }

    pub fn n_t(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn builder(&self) -> &BeamBuilder {
        &self.builder
    }

    /// `b_k`.
    pub fn beam(&self, k: usize) -> CVector {
        self.matrix.column(k).into_owned()
    }

    /// `B̆_k`: `B` without column `k` (`N_t × (N_t−1)`).
    pub fn interfering_beams(&self, k: usize) -> CMatrix {
        self.matrix.clone().remove_column(k)
    }

    /// `B̈_k = (b_k, B·1)`.
    pub fn joint_beams(&self, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.n_t(), 2);
        m.set_column(0, &self.beam(k));
        m.set_column(1, &self.broadcast_beam());
        m
    }

    /// `B·1`.
    pub fn broadcast_beam(&self) -> CVector {
        broadcast_beam(self)
    }

    /// `‖B^H B − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        frobenius(&(self.matrix.adjoint() * &self.matrix - identity(self.n_t())))
    }

    /// Spatial frequency `u = sin θ` each beam points at, in `[−1, 1)`.
    ///
    /// DFT column `k` is the ULA response at `u = −2k/N` folded into
    /// `[−1, 1)`; steered beams report their configured angle.
    pub fn beam_spatial_frequencies(&self) -> Vec<f64> {
        match &self.builder {
            BeamBuilder::Dft => (0..self.n_t())
                .map(|k| {
                    let u = -2.0 * k as f64 / self.n_t() as f64;
                    (u + 1.0).rem_euclid(2.0) - 1.0
                })
                .collect(),
            BeamBuilder::Steered(angles) if angles.len() == self.n_t() => {
                angles.iter().map(|a| a.to_radians().sin()).collect()
            }
            BeamBuilder::Steered(_) => (0..self.n_t())
                .map(|k| -1.0 + 2.0 * (k as f64 + 0.5) / self.n_t() as f64)
                .collect(),
        }
    }

    /// Beam angles in degrees, from [`Self::beam_spatial_frequencies`].
    pub fn beam_angles_deg(&self) -> Vec<f64> {
        self.beam_spatial_frequencies()
            .iter()
            .map(|u| u.asin().to_degrees())
            .collect()
    }

    /// Index of the beam nearest to a user at `azimuth_deg`.
    ///
    /// The azimuth is mapped to the ULA spatial frequency `sin φ` and compared
    /// with wrap-around on `[−1, 1)`, matching the array's front/back and
    /// endfire ambiguity.
    pub fn nearest_beam(&self, azimuth_deg: f64) -> usize {
        let u = azimuth_deg.to_radians().sin();
        let dist = |b: f64| {
            let d = (u - b).abs();
            d.min(2.0 - d)
        };
        self.beam_spatial_frequencies()
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(best, bd), (k, &b)| {
                let d = dist(b);
                if d < bd {
                    (k, d)
                } else {
                    (best, bd)
                }
            })
            .0
    }

    /// Short description of the broadcast radiation through `B·1`.
    pub fn broadcast_pattern_note(&self) -> String {
        let b1 = self.broadcast_beam();
        let total: f64 = b1.iter().map(|z| z.norm_sqr()).sum();
        let peak = b1.iter().map(|z| z.norm_sqr()).fold(0.0f64, f64::max);
        match self.builder {
            BeamBuilder::Dft => format!(
                "DFT beams: B·1 concentrates {:.0}% of the broadcast power on one array element \
                 (omnidirectional broadcast)",
                100.0 * peak / total
            ),
            BeamBuilder::Steered(_) => format!(
                "steered beams: B·1 puts at most {:.0}% of the broadcast power on one element",
                100.0 * peak / total
            ),
        }
    }
}

/// `B·1`, the column sum of `B`.
pub fn broadcast_beam(beams: &BeamformingMatrix) -> CVector {
    &beams.matrix * ones(beams.n_t())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn dft_one_antenna_is_one() {
        let b = BeamformingMatrix::dft(1).unwrap();
        assert!(close(b.matrix(), &identity(1), 1e-15));
    }

    #[test]
    fn dft_two_point() {
        let b = BeamformingMatrix::dft(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        assert!(close(b.matrix(), &expected, 1e-15));
    }

    #[test]
    fn dft_is_unitary() {
        for n in 1..=8 {
            let b = BeamformingMatrix::dft(n).unwrap();
            let g = b.matrix().adjoint() * b.matrix();
            assert!(close(&g, &identity(n), 1e-12));
        }
    }

    #[test]
    fn dft_broadcast_beam_collapses_to_first_element() {
        let b1 = BeamformingMatrix::dft(2).unwrap().broadcast_beam();
        assert!((b1[0] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(b1[1].norm() < 1e-15);
    }

    #[test]
    fn identity_broadcast_beam_is_all_ones() {
        let b1 = BeamformingMatrix::identity(3).broadcast_beam();
        assert!(b1.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn steered_single_beam() {
        let b = BeamformingMatrix::steered(&[0.0]).unwrap();
        assert!(close(b.matrix(), &identity(1), 1e-15));
    }

    #[test]
    fn steered_pair_is_unitary() {
        let b = BeamformingMatrix::steered(&[-30.0, 30.0]).unwrap();
        assert!(b.unitarity_defect() < 1e-10);
    }

    #[test]
    fn steered_first_column_is_first_steering_vector() {
        let b = BeamformingMatrix::steered(&[-45.0, -15.0, 15.0, 45.0]).unwrap();
        let a = steering_vector(-45.0, 4);
        for m in 0..4 {
            assert!((b.matrix()[(m, 0)] - a[m]).norm() < 1e-15);
        }
        assert!(b.unitarity_defect() < 1e-10);
    }

    #[test]
    fn invalid_and_degenerate_angles() {
        assert!(matches!(
            BeamformingMatrix::steered(&[10.0, 10.0]),
            Err(BeamError::InvalidAngles(_))
        ));
        assert!(matches!(
            BeamformingMatrix::steered(&[95.0]),
            Err(BeamError::InvalidAngles(_))
        ));
        assert!(matches!(
            BeamformingMatrix::steered(&[10.0, 10.0 + 1e-9]),
            Err(BeamError::DegenerateBeams { index: 1, .. })
        ));
        assert!(matches!(
            BeamformingMatrix::dft(0),
            Err(BeamError::NoAntennas)
        ));
    }

    #[test]
    fn nearest_beam_for_dft() {
        let b = BeamformingMatrix::dft(4).unwrap();
        // beams point at u = 0, -0.5, -1 (endfire), 0.5
        assert_eq!(b.nearest_beam(0.0), 0);
        assert_eq!(b.nearest_beam(-30.0), 1);
        assert_eq!(b.nearest_beam(85.0), 2);
        assert_eq!(b.nearest_beam(-85.0), 2);
        assert_eq!(b.nearest_beam(30.0), 3);
        assert_eq!(b.nearest_beam(150.0), 3);
    }

    #[test]
    fn joint_and_interfering_views() {
        let b = BeamformingMatrix::dft(4).unwrap();
        let j = b.joint_beams(2);
        assert_eq!(j.ncols(), 2);
        assert_eq!(j.column(0), b.matrix().column(2));
        let r = b.interfering_beams(2);
        assert_eq!(r.ncols(), 3);
        let mut rebuilt = r.clone().insert_column(2, c(0.0, 0.0));
        rebuilt.set_column(2, &b.beam(2));
        assert_eq!(&rebuilt, b.matrix());
    }
}
