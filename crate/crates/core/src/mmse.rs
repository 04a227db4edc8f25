//! Generic linear MMSE estimation and MMSE pre-equalization.
//!
//! For an observation `y = A x + z` with zero-mean `x` and `z`, the linear
//! MMSE estimate is `x̂ = W y` with
//!
//! ```text
//! W = Cxx A^H (Czz + A Cxx A^H)^{-1}
//! ```
//!
//! Every receiver filter in this crate is a closed form of this expression
//! for a particular choice of `A`, `Cxx` and `Czz`. Inverses are never formed
//! explicitly: the right division by the Hermitian inner matrix is done with an
//! LU solve after a condition-number guard.

use thiserror::Error;

use crate::linalg::{
    condition_number, hermitian_defect, identity, symmetrize, CMatrix, CVector, HERMITIAN_TOL,
    MAX_CONDITION,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmseError {
    #[error(
        "singular model: inner matrix condition number {condition:e} exceeds {MAX_CONDITION:e}"
    )]
    SingularModel { condition: f64 },
    #[error("{what} is not Hermitian (max defect {defect:e})")]
    NotHermitian { what: &'static str, defect: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// `y = A x + z` with known second-order statistics.
#[derive(Debug, Clone)]
pub struct LinearObservationModel {
    a: CMatrix,
    cxx: CMatrix,
    czz: CMatrix,
}

impl LinearObservationModel {
    /// Validates dimensions and Hermitian symmetry, then stores symmetrized
    /// covariances.
    pub fn new(a: CMatrix, cxx: CMatrix, czz: CMatrix) -> Result<Self, MmseError> {
        if cxx.nrows() != a.ncols() || !cxx.is_square() {
            return Err(MmseError::Dimension(format!(
                "Cxx is {}x{} but A has {} columns",
                cxx.nrows(),
                cxx.ncols(),
                a.ncols()
            )));
        }
        if czz.nrows() != a.nrows() || !czz.is_square() {
            return Err(MmseError::Dimension(format!(
                "Czz is {}x{} but A has {} rows",
                czz.nrows(),
                czz.ncols(),
                a.nrows()
            )));
        }
        check_hermitian("Cxx", &cxx)?;
        check_hermitian("Czz", &czz)?;
        Ok(Self {
            a,
            cxx: symmetrize(&cxx),
            czz: symmetrize(&czz),
        })
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn cxx(&self) -> &CMatrix {
        &self.cxx
    }

    pub fn czz(&self) -> &CMatrix {
        &self.czz
    }

    /// Observation covariance `Czz + A Cxx A^H`.
    pub fn observation_covariance(&self) -> CMatrix {
        symmetrize(&(&self.czz + &self.a * &self.cxx * self.a.adjoint()))
    }
}

fn check_hermitian(what: &'static str, m: &CMatrix) -> Result<(), MmseError> {
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(MmseError::NotHermitian { what, defect });
    }
    Ok(())
}

/// Computes `lhs · inner^{-1}` for a Hermitian `inner`.
///
/// Solves `inner · X = lhs^H` and returns `X^H`, which equals
/// `lhs · inner^{-1}` because `inner^H = inner`.
pub fn right_divide_hermitian(lhs: &CMatrix, inner: &CMatrix) -> Result<CMatrix, MmseError> {
    if !inner.is_square() || lhs.ncols() != inner.nrows() {
        return Err(MmseError::Dimension(format!(
            "cannot divide {}x{} by {}x{}",
            lhs.nrows(),
            lhs.ncols(),
            inner.nrows(),
            inner.ncols()
        )));
    }
    let condition = condition_number(inner);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(MmseError::SingularModel { condition });
    }
    let rhs = lhs.adjoint();
    let solved = inner
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(MmseError::SingularModel { condition })?;
    Ok(solved.adjoint())
}

/// `W = Cxx A^H (Czz + A Cxx A^H)^{-1}`; `W` has `dim(x)` rows and `dim(y)`
/// columns.
pub fn mmse_filter(model: &LinearObservationModel) -> Result<CMatrix, MmseError> {
    let lhs = &model.cxx * model.a.adjoint();
    right_divide_hermitian(&lhs, &model.observation_covariance())
}

/// Output of MMSE pre-equalization of one received vector.
#[derive(Debug, Clone)]
pub struct PreEqualizedSignal {
    /// `(σ²I + H^H H)^{-1} H^H y`
    pub y_bar: CVector,
    /// Autocovariance of the filtered noise, `σ² H^H H (σ²I + H^H H)^{-2}`.
    pub rw: CMatrix,
}

/// Reusable MMSE pre-equalizer for one channel realization.
#[derive(Debug, Clone)]
pub struct PreEqualizer {
    filter: CMatrix,
    rw: CMatrix,
}

impl PreEqualizer {
    pub fn new(h: &CMatrix, sigma2: f64) -> Result<Self, MmseError> {
        if sigma2.is_nan() || sigma2 < 0.0 {
            return Err(MmseError::Dimension(format!(
                "noise variance must be non-negative, got {sigma2}"
            )));
        }
        let n_t = h.ncols();
        let gram = h.adjoint() * h;
        let inner = symmetrize(&(&gram + identity(n_t).scale(sigma2)));
        // M = (σ²I + H^H H)^{-1} H^H
        let filter = right_divide_hermitian(h, &inner)?.adjoint();
        // σ² M M^H equals σ² H^H H (σ²I + H^H H)^{-2}: both factors are
        // functions of the same Hermitian matrix and commute.
        let rw = symmetrize(&(&filter * filter.adjoint()).scale(sigma2));
        Ok(Self { filter, rw })
    }

    /// The `N_t × N_r` pre-equalization matrix.
    pub fn filter(&self) -> &CMatrix {
        &self.filter
    }

    pub fn noise_covariance(&self) -> &CMatrix {
        &self.rw
    }

    /// Applies the pre-equalizer to every column of `y`.
    pub fn apply(&self, y: &CMatrix) -> CMatrix {
        &self.filter * y
    }
}

pub fn pre_equalize(
    h: &CMatrix,
    sigma2: f64,
    y: &CVector,
) -> Result<PreEqualizedSignal, MmseError> {
    if h.nrows() != y.len() {
        return Err(MmseError::Dimension(format!(
            "H has {} rows but y has {} entries",
            h.nrows(),
            y.len()
        )));
    }
    let eq = PreEqualizer::new(h, sigma2)?;
    Ok(PreEqualizedSignal {
        y_bar: &eq.filter * y,
        rw: eq.rw,
    })
}
