//! Collective excitation energies around the mean-field equilibrium.
//!
//! The cavity and matter amplitudes are written as α = (x₁ + ip₁)/√2 and
//! β = (x₂ + ip₂)/√2, turning the scaled energy into a function of four real
//! quadratures:
//!
//! ```text
//! E_cl = f₁(x₁² + p₁²)/2 + f₂(x₂² + p₂²)/2 − 2λ x₁ x₂ √(1 − (x₂² + p₂²)/2)
//! ```
//!
//! The quadratic fluctuation Hamiltonian is ½ ξᵀMξ with M the Hessian of E_cl
//! at the equilibrium, so the excitation energies are the symplectic
//! eigenvalues of M.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::Serialize;

use crate::error::{IddmError, Result};
use crate::meanfield::equilibrium_closed_form;
use crate::model::{effective_frequencies, ImpurityPopulation, ModelParams};

/// Relative tolerance on negative Hessian eigenvalues before an equilibrium is
/// declared unstable.
pub const STABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub eps_minus: f64,
    pub eps_plus: f64,
    /// The Hessian is positive semidefinite (both branches real).
    pub stable: bool,
}

/// Quadrature ordering (x₁, p₁, x₂, p₂).
pub type Quadratures = [f64; 4];

/// Coefficients of the classical energy at fixed impurity population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalEnergy {
    pub f1: f64,
    pub f2: f64,
    pub lambda: f64,
}

impl ClassicalEnergy {
    pub fn new(params: &ModelParams, delta: ImpurityPopulation) -> Result<Self> {
        params.validate()?;
        if params.chi != 0.0 {
            return Err(IddmError::ChiUnsupported { chi: params.chi });
        }
        let f = effective_frequencies(params, delta)?;
        Ok(Self {
            f1: f.f1,
            f2: f.f2,
            lambda: params.lambda,
        })
    }

    /// Quadratures of the real equilibrium amplitudes (α, β).
    pub fn equilibrium_point(alpha: f64, beta: f64) -> Quadratures {
        let s = std::f64::consts::SQRT_2;
        [s * alpha, 0.0, s * beta, 0.0]
    }

    pub fn energy(&self, q: &Quadratures) -> f64 {
        let [x1, p1, x2, p2] = *q;
        let k = (1.0 - 0.5 * (x2 * x2 + p2 * p2)).sqrt();
        0.5 * self.f1 * (x1 * x1 + p1 * p1) + 0.5 * self.f2 * (x2 * x2 + p2 * p2)
            - 2.0 * self.lambda * x1 * x2 * k
    }

    /// Analytic Hessian of [`Self::energy`]; requires |β|² < 1 at `q`.
    pub fn hessian(&self, q: &Quadratures) -> Result<Matrix4<f64>> {
        let [x1, _, x2, p2] = *q;
        let r = 0.5 * (x2 * x2 + p2 * p2);
        if !(r < 1.0) {
            return Err(IddmError::DomainError { beta: r.sqrt() });
        }
        let k = (1.0 - r).sqrt();
        let k3 = k * k * k;

        // Second derivatives of the coupling term C = x₁ x₂ K.
        let c_x1x2 = k - x2 * x2 / (2.0 * k);
        let c_x1p2 = -x2 * p2 / (2.0 * k);
        let c_x2x2 = -x1 * (1.5 * x2 / k + x2 * x2 * x2 / (4.0 * k3));
        let c_x2p2 = -x1 * (p2 / (2.0 * k) + x2 * x2 * p2 / (4.0 * k3));
        let c_p2p2 = -x1 * x2 * (1.0 / (2.0 * k) + p2 * p2 / (4.0 * k3));

        let g = -2.0 * self.lambda;
        Ok(Matrix4::new(
            self.f1,
            0.0,
            g * c_x1x2,
            g * c_x1p2,
            0.0,
            self.f1,
            0.0,
            0.0,
            g * c_x1x2,
            0.0,
            self.f2 + g * c_x2x2,
            g * c_x2p2,
            g * c_x1p2,
            0.0,
            g * c_x2p2,
            self.f2 + g * c_p2p2,
        ))
    }
}

/// Canonical symplectic form for (x₁, p₁, x₂, p₂).
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0,
    )
}

/// Symplectic eigenvalues of a symmetric 4×4 matrix.
///
/// J·M is similar to the antisymmetric S·J·S with S = M^½, whose singular
/// values are the moduli of the eigenvalues ±iε of J·M. Negative eigenvalues of
/// M beyond the stability tolerance flag the result as unstable and are
/// clipped to zero for the square root.
pub fn symplectic_spectrum(hessian: &Matrix4<f64>) -> SpectrumResult {
    let eig = SymmetricEigen::new(*hessian);
    let scale = eig.eigenvalues.amax().max(1.0);
    let min_eig = eig.eigenvalues.min();
    let stable = min_eig >= -STABILITY_TOLERANCE * scale;

    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let sqrt_m = eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.transpose();
    let skew = sqrt_m * symplectic_form() * sqrt_m;
    let mut sv: Vec<f64> = skew.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    SpectrumResult {
        eps_minus: 0.5 * (sv[0] + sv[1]),
        eps_plus: 0.5 * (sv[2] + sv[3]),
        stable,
    }
}

/// Spectrum of the quadratic form at an arbitrary real point (α, β).
pub fn spectrum_at(
    params: &ModelParams,
    delta: ImpurityPopulation,
    alpha: f64,
    beta: f64,
) -> Result<SpectrumResult> {
    let energy = ClassicalEnergy::new(params, delta)?;
    let hessian = energy.hessian(&ClassicalEnergy::equilibrium_point(alpha, beta))?;
    Ok(symplectic_spectrum(&hessian))
}

/// Excitation energies (ε₋, ε₊) at the mean-field ground state.
pub fn excitation_spectrum(
    params: &ModelParams,
    delta: ImpurityPopulation,
) -> Result<SpectrumResult> {
    let solution = equilibrium_closed_form(params, delta)?;
    let energy = ClassicalEnergy::new(params, delta)?;
    let hessian = energy.hessian(&ClassicalEnergy::equilibrium_point(
        solution.alpha,
        solution.beta,
    ))?;
    let spectrum = symplectic_spectrum(&hessian);
    if !spectrum.stable {
        return Err(IddmError::UnstableEquilibrium {
            min_eigenvalue: SymmetricEigen::new(hessian).eigenvalues.min(),
        });
    }
    Ok(spectrum)
}
