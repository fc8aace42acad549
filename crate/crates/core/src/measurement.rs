//! Setting the impurity population by measuring a correlated auxiliary atom.
//!
//! The impurity A and auxiliary atom B start in the Werner state
//! ρ = (1 − z)/4 · I + z|Ψ⟩⟨Ψ| with |Ψ⟩ = (|00⟩ + |11⟩)/√2. Projecting B onto
//!
//! ```text
//! |ψ₊(θ)⟩ = sin θ |1⟩ + cos θ |0⟩
//! |ψ₋(θ)⟩ = cos θ |1⟩ − sin θ |0⟩
//! ```
//!
//! leaves A in (1 − z)/2 · I + z|ψ±⟩⟨ψ±| with population δ± = ±z cos 2θ.
//!
//! Conventions: |0⟩ is the impurity's upper state with σz|0⟩ = +|0⟩ and
//! σz|1⟩ = −|1⟩. Single-qubit vectors are ordered (|0⟩, |1⟩); two-qubit
//! indices are 2·a + b with A as the leading factor.

use nalgebra::{Complex, Matrix2, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{IddmError, Result};

pub type C64 = Complex<f64>;

/// Outcome probabilities below this cannot be renormalized.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-15;

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WernerState {
    z: f64,
}

impl WernerState {
    pub fn new(z: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&z) {
            return Err(IddmError::invalid("z", format!("{z} is outside [0, 1]")));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn density_matrix(&self) -> Matrix4<C64> {
        let bell = nalgebra::Vector4::new(c(1.0), c(0.0), c(0.0), c(1.0)) / c(2f64.sqrt());
        Matrix4::identity() * c((1.0 - self.z) / 4.0) + bell * bell.adjoint() * c(self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveMeasurement {
    /// Measurement angle in radians.
    pub theta: f64,
    pub outcome: Outcome,
}

impl ProjectiveMeasurement {
    pub fn new(theta: f64, outcome: Outcome) -> Self {
        Self { theta, outcome }
    }

    /// |ψ±(θ)⟩ in the (|0⟩, |1⟩) ordering.
    pub fn state(&self) -> Vector2<C64> {
        let (s, co) = self.theta.sin_cos();
        match self.outcome {
            Outcome::Plus => Vector2::new(c(co), c(s)),
            Outcome::Minus => Vector2::new(c(-s), c(co)),
        }
    }

    pub fn projector(&self) -> Matrix2<C64> {
        let v = self.state();
        v * v.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapsedImpurity {
    pub density_matrix: Matrix2<C64>,
    /// Tr[ρ_A σz].
    pub delta: f64,
    /// Probability of the selected outcome.
    pub probability: f64,
}

fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn trace_out_b(rho: &Matrix4<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|a, a2| rho[(2 * a, 2 * a2)] + rho[(2 * a + 1, 2 * a2 + 1)])
}

/// ⟨σz^A⟩ of the Werner state without any measurement.
pub fn unmeasured_population(state: &WernerState) -> f64 {
    let observable = kron(&sigma_z(), &Matrix2::identity());
    (state.density_matrix() * observable).trace().re
}

/// Projects B, traces it out, and renormalizes the impurity state.
pub fn measure(state: &WernerState, m: &ProjectiveMeasurement) -> Result<CollapsedImpurity> {
    let projector = kron(&Matrix2::identity(), &m.projector());
    let projected = projector * state.density_matrix() * projector;
    let probability = projected.trace().re;
    if !(probability >= MIN_OUTCOME_PROBABILITY) {
        return Err(IddmError::ZeroProbabilityOutcome { probability });
    }
    let rho_a = trace_out_b(&projected) / c(probability);
    let delta = (rho_a * sigma_z()).trace().re;
    Ok(CollapsedImpurity {
        density_matrix: rho_a,
        delta,
        probability,
    })
}

/// Angle and outcome that steer the impurity to population `target`:
/// θ = ½ arccos(|target|/z), Plus for target ≥ 0.
pub fn angle_for_target_delta(z: f64, target: f64) -> Result<ProjectiveMeasurement> {
    WernerState::new(z)?;
    if !target.is_finite() || target.abs() > z {
        return Err(IddmError::Unreachable { z, target });
    }
    let outcome = if target >= 0.0 {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let theta = if z == 0.0 {
        std::f64::consts::FRAC_PI_4
    } else {
        0.5 * (target.abs() / z).min(1.0).acos()
    };
    Ok(ProjectiveMeasurement::new(theta, outcome))
}
