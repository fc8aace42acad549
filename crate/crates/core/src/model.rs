//! Model parameters of the impurity-doped Dicke Hamiltonian
//!
//! ```text
//! H = (ω + ξ₁σz) a†a + [ω₀ + κ(σz + 1)] Jz + (χ/N) Jz² + (ω_Q'/2) σz
//!   + (λ/√N)(a + a†)(J₊ + J₋) + ξ₂ σz (a + a†)
//! ```
//!
//! All frequencies are measured in units of the atomic transition frequency ω₀,
//! which stays an explicit field (normally 1). Helpers map the microscopic
//! cavity-BEC and impurity parameters onto these coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{IddmError, Result};

/// Hamiltonian coefficients, in units of ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Effective cavity frequency ω.
    pub omega: f64,
    /// Effective atomic transition frequency ω₀.
    pub omega0: f64,
    /// Collective atom-field coupling λ.
    pub lambda: f64,
    /// Impurity-BEC coupling κ.
    pub kappa: f64,
    /// Atomic nonlinearity χ (the mean-field routines require 0).
    pub chi: f64,
    /// Dispersive impurity-cavity shift ξ₁.
    pub xi1: f64,
    /// Impurity-field displacement coupling ξ₂.
    pub xi2: f64,
    /// Shifted impurity splitting ω_Q' (a constant offset for fixed δ).
    pub omega_q_prime: f64,
    /// Number of condensed atoms N.
    pub n_atoms: usize,
}

impl Default for ModelParams {
    /// Cavity-BEC values used throughout the impurity-induced transition
    /// study: ω = 400, κ = -1/2, λ = 5.
    fn default() -> Self {
        Self {
            omega: 400.0,
            omega0: 1.0,
            lambda: 5.0,
            kappa: -0.5,
            chi: 0.0,
            xi1: 0.0,
            xi2: 0.0,
            omega_q_prime: 0.0,
            n_atoms: 16,
        }
    }
}

impl ModelParams {
    /// Standard Dicke model: all impurity couplings and χ switched off.
    pub fn dicke(omega: f64, omega0: f64, lambda: f64) -> Self {
        Self {
            omega,
            omega0,
            lambda,
            kappa: 0.0,
            ..Self::default()
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_n_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("chi", self.chi),
            ("xi1", self.xi1),
            ("xi2", self.xi2),
            ("omega_q_prime", self.omega_q_prime),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(IddmError::invalid(name, format!("{value} is not finite")));
            }
        }
        if self.omega <= 0.0 {
            return Err(IddmError::invalid("omega", "must be positive"));
        }
        if self.omega0 <= 0.0 {
            return Err(IddmError::invalid("omega0", "must be positive"));
        }
        if self.lambda < 0.0 {
            return Err(IddmError::invalid("lambda", "must be non-negative"));
        }
        if self.n_atoms == 0 {
            return Err(IddmError::invalid("n_atoms", "must be at least 1"));
        }
        Ok(())
    }
}

/// Impurity population δ = ⟨σz⟩, restricted to [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ImpurityPopulation(f64);

impl ImpurityPopulation {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || !(-1.0..=1.0).contains(&delta) {
            return Err(IddmError::invalid(
                "delta",
                format!("{delta} is outside [-1, 1]"),
            ));
        }
        Ok(Self(delta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ImpurityPopulation {
    type Error = IddmError;

    fn try_from(delta: f64) -> Result<Self> {
        Self::new(delta)
    }
}

impl From<ImpurityPopulation> for f64 {
    fn from(p: ImpurityPopulation) -> f64 {
        p.0
    }
}

/// Frequencies of the two coupled oscillators after averaging over the impurity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveFrequencies {
    pub f1: f64,
    pub f2: f64,
    /// ν = f₁f₂/(4λ²); `None` when λ = 0.
    pub nu: Option<f64>,
}

/// f₁ = ω + ξ₁δ, f₂ = ω₀ + κ(1 + δ), and their ratio ν to the coupling.
pub fn effective_frequencies(
    params: &ModelParams,
    delta: ImpurityPopulation,
) -> Result<EffectiveFrequencies> {
    let d = delta.value();
    let f1 = params.omega + params.xi1 * d;
    if f1 <= 0.0 {
        return Err(IddmError::NonPositiveF1 { f1 });
    }
    let f2 = params.omega0 + params.kappa * (1.0 + d);
    let nu = (params.lambda > 0.0).then(|| f1 * f2 / (4.0 * params.lambda * params.lambda));
    Ok(EffectiveFrequencies { f1, f2, nu })
}

/// Microscopic cavity-BEC parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityMicroParams {
    /// Pump-cavity detuning Δ_c.
    pub delta_c: f64,
    /// Per-atom light shift U₀ = g₀²/Δ_a.
    pub u0: f64,
    /// Recoil frequency ω_r.
    pub omega_r: f64,
    pub s0: f64,
    pub s1: f64,
    pub s01: f64,
    /// Single atom-cavity coupling g₀.
    pub g0: f64,
    /// Maximum pump Rabi frequency Ω_p.
    pub omega_p_rabi: f64,
    /// Atom-pump detuning Δ_a.
    pub delta_a: f64,
}

/// Dicke coefficients derived from the cavity-BEC microscopics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityCoefficients {
    pub omega: f64,
    pub omega0: f64,
    pub lambda: f64,
    pub chi: f64,
}

pub fn derive_cavity_params(
    micro: &CavityMicroParams,
    n_atoms: usize,
) -> Result<CavityCoefficients> {
    if micro.delta_a == 0.0 {
        return Err(IddmError::invalid(
            "delta_a",
            "atom-pump detuning must be nonzero",
        ));
    }
    if n_atoms == 0 {
        return Err(IddmError::invalid("n_atoms", "must be at least 1"));
    }
    let n = n_atoms as f64;
    Ok(CavityCoefficients {
        omega: -micro.delta_c + n * micro.u0 / 2.0,
        omega0: 2.0 * micro.omega_r + (n - 1.0) * (micro.s1 - micro.s0) / 2.0,
        lambda: n.sqrt() * micro.g0 * micro.omega_p_rabi / (2.0 * micro.delta_a),
        chi: n * ((micro.s0 + micro.s1) / 2.0 - micro.s01),
    })
}

/// Microscopic impurity-light parameters before the dispersive transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpurityMicroParams {
    /// Impurity-cavity coupling g_Q.
    pub g_q: f64,
    /// Impurity pump Rabi frequency Ω_Q.
    pub omega_q_rabi: f64,
    /// Detuning Δ_Q = ω_Q - ω_p.
    pub delta_q: f64,
}

/// Returns (ξ₁, ξ₂) = (g_Q²/Δ_Q, g_QΩ_Q/Δ_Q).
pub fn derive_impurity_couplings(micro: &ImpurityMicroParams) -> Result<(f64, f64)> {
    if micro.delta_q == 0.0 {
        return Err(IddmError::ZeroDetuning);
    }
    Ok((
        micro.g_q * micro.g_q / micro.delta_q,
        micro.g_q * micro.omega_q_rabi / micro.delta_q,
    ))
}
