//! Exact diagonalization of the finite-N Hamiltonian.
//!
//! The basis is |n⟩ ⊗ |j = N/2, m⟩ (⊗ |s⟩ for a quantum impurity), with a
//! truncated photon number n ≤ n_max. Only the symmetric Dicke manifold
//! j = N/2 is represented.
//!
//! With a fixed impurity population the impurity operator σz is replaced by
//! the number δ and the constant ω_Q'δ/2 is dropped. Ground-state energies
//! then compare against the mean-field value as E_gs/N → E₀ − f₂/2.

use serde::Serialize;

use crate::error::{IddmError, Result};
use crate::meanfield::equilibrium_closed_form;
use crate::model::{effective_frequencies, ImpurityPopulation, ModelParams};
use crate::sparse::{lowest_eigenpair, CsrMatrix, LanczosOptions};

/// E_gs/N shift under the cutoff re-run that still counts as converged.
pub const CUTOFF_CONVERGENCE: f64 = 1e-8;

pub const DEFAULT_MAX_DIMENSION: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpurityMode {
    /// σz replaced by its expectation value δ.
    FixedDelta(ImpurityPopulation),
    /// Impurity kept as a qubit; σz = +1 on the upper state.
    FullQubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdConfig {
    pub n_atoms: usize,
    pub photon_cutoff: usize,
    pub impurity_mode: ImpurityMode,
    pub include_chi: bool,
    /// Cutoff multiplier for the convergence re-run.
    pub convergence_factor: f64,
    /// Lanczos residual target, relative to max(1, |E_gs|).
    pub solver_tolerance: f64,
    pub max_dimension: usize,
}

impl EdConfig {
    pub fn new(n_atoms: usize, impurity_mode: ImpurityMode) -> Self {
        Self {
            n_atoms,
            photon_cutoff: 1,
            impurity_mode,
            include_chi: false,
            convergence_factor: 2.0,
            solver_tolerance: 1e-10,
            max_dimension: DEFAULT_MAX_DIMENSION,
        }
    }

    pub fn fixed_delta(n_atoms: usize, delta: ImpurityPopulation) -> Self {
        Self::new(n_atoms, ImpurityMode::FixedDelta(delta))
    }

    pub fn with_cutoff(mut self, photon_cutoff: usize) -> Self {
        self.photon_cutoff = photon_cutoff;
        self
    }

    fn impurity_states(&self) -> usize {
        match self.impurity_mode {
            ImpurityMode::FixedDelta(_) => 1,
            ImpurityMode::FullQubit => 2,
        }
    }

    pub fn dimension(&self) -> usize {
        (self.n_atoms + 1) * (self.photon_cutoff + 1) * self.impurity_states()
    }

    fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(IddmError::invalid("n_atoms", "must be at least 1"));
        }
        if self.photon_cutoff == 0 {
            return Err(IddmError::invalid("photon_cutoff", "must be at least 1"));
        }
        if !(self.convergence_factor > 1.0) {
            return Err(IddmError::invalid("convergence_factor", "must exceed 1"));
        }
        if !(self.solver_tolerance > 0.0) {
            return Err(IddmError::invalid("solver_tolerance", "must be positive"));
        }
        let dim = self.dimension();
        if dim > self.max_dimension {
            return Err(IddmError::DimensionTooLarge {
                dim,
                cap: self.max_dimension,
            });
        }
        Ok(())
    }

    /// Cutoff floor ceil(n̄ + 6√n̄) + 10 from the mean-field photon number
    /// n̄ = Nα² + (ξ₂δ/f₁)².
    pub fn minimum_cutoff(&self, params: &ModelParams) -> Result<usize> {
        let deltas: Vec<f64> = match self.impurity_mode {
            ImpurityMode::FixedDelta(d) => vec![d.value()],
            ImpurityMode::FullQubit => vec![-1.0, 1.0],
        };
        let mf_params = ModelParams {
            chi: 0.0,
            ..*params
        };
        let mut n_bar = 0.0f64;
        for d in deltas {
            let delta = ImpurityPopulation::new(d)?;
            let f = effective_frequencies(params, delta)?;
            let alpha2 = match equilibrium_closed_form(&mf_params, delta) {
                Ok(s) => s.alpha * s.alpha,
                Err(_) => (params.lambda / f.f1).powi(2),
            };
            let drive = params.xi2 * d / f.f1;
            n_bar = n_bar.max(self.n_atoms as f64 * alpha2 + drive * drive);
        }
        Ok((n_bar + 6.0 * n_bar.sqrt()).ceil() as usize + 10)
    }

    /// Copy with the photon cutoff raised to [`Self::minimum_cutoff`] if needed.
    pub fn resolved(&self, params: &ModelParams) -> Result<Self> {
        let floor = self.minimum_cutoff(params)?;
        Ok(Self {
            photon_cutoff: self.photon_cutoff.max(floor),
            ..*self
        })
    }
}

/// Index layout: ((n·(N+1)) + (m + N/2))·q + s.
#[derive(Debug, Clone, Copy)]
struct Basis {
    n_atoms: usize,
    impurity_states: usize,
}

impl Basis {
    fn of(config: &EdConfig) -> Self {
        Self {
            n_atoms: config.n_atoms,
            impurity_states: config.impurity_states(),
        }
    }

    fn index(&self, n: usize, mi: usize, s: usize) -> usize {
        (n * (self.n_atoms + 1) + mi) * self.impurity_states + s
    }

    fn decode(&self, idx: usize) -> (usize, usize, usize) {
        let s = idx % self.impurity_states;
        let rest = idx / self.impurity_states;
        (rest / (self.n_atoms + 1), rest % (self.n_atoms + 1), s)
    }

    /// Jz eigenvalue m for the spin index mi = m + N/2.
    fn m(&self, mi: usize) -> f64 {
        mi as f64 - 0.5 * self.n_atoms as f64
    }
}

fn sigma_z(s: usize) -> f64 {
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sparse matrix of the Hamiltonian in the truncated basis, at the cutoff given
/// in `config` (no automatic raise).
pub fn build_hamiltonian(params: &ModelParams, config: &EdConfig) -> Result<CsrMatrix> {
    params.validate()?;
    config.validate()?;
    let basis = Basis::of(config);
    let n_atoms = config.n_atoms as f64;
    let j = 0.5 * n_atoms;
    let coupling = params.lambda / n_atoms.sqrt();
    let chi = if config.include_chi {
        params.chi / n_atoms
    } else {
        0.0
    };
    let dim = config.dimension();

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); dim];
    for n in 0..=config.photon_cutoff {
        for mi in 0..=config.n_atoms {
            let m = basis.m(mi);
            for s in 0..basis.impurity_states {
                let (sz, offset) = match config.impurity_mode {
                    ImpurityMode::FixedDelta(d) => (d.value(), 0.0),
                    ImpurityMode::FullQubit => {
                        (sigma_z(s), 0.5 * params.omega_q_prime * sigma_z(s))
                    }
                };
                let cavity = params.omega + params.xi1 * sz;
                let atomic = params.omega0 + params.kappa * (sz + 1.0);
                let i = basis.index(n, mi, s);
                rows[i].push((i, cavity * n as f64 + atomic * m + chi * m * m + offset));

                if n == config.photon_cutoff {
                    continue;
                }
                let a_dag = ((n + 1) as f64).sqrt();
                if coupling != 0.0 {
                    // (a + a†)(J₊ + J₋): raise n together with either J₊ or J₋.
                    for (mi2, m_new) in [(mi + 1, m + 1.0), (mi.wrapping_sub(1), m - 1.0)] {
                        if mi2 > config.n_atoms {
                            continue;
                        }
                        let jm = (j * (j + 1.0) - m * m_new).sqrt();
                        let k = basis.index(n + 1, mi2, s);
                        let v = coupling * a_dag * jm;
                        rows[i].push((k, v));
                        rows[k].push((i, v));
                    }
                }
                let drive = params.xi2 * sz;
                if drive != 0.0 {
                    let k = basis.index(n + 1, mi, s);
                    rows[i].push((k, drive * a_dag));
                    rows[k].push((i, drive * a_dag));
                }
            }
        }
    }
    Ok(CsrMatrix::from_rows(rows))
}

/// Diagonal of Π = exp[iπ(a†a + Jz + N/2)] in the basis of `config`.
pub fn parity_diagonal(config: &EdConfig) -> Vec<f64> {
    let basis = Basis::of(config);
    (0..config.dimension())
        .map(|idx| {
            let (n, mi, _) = basis.decode(idx);
            if (n + mi) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// max |(HΠ − ΠH)_ij| for a diagonal Π.
pub fn parity_commutator_norm(hamiltonian: &CsrMatrix, parity: &[f64]) -> f64 {
    (0..hamiltonian.dim())
        .flat_map(|i| hamiltonian.row(i).map(move |(j, v)| (i, j, v)))
        .map(|(i, j, v)| (v * (parity[j] - parity[i])).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdResult {
    pub n_atoms: usize,
    pub photon_cutoff: usize,
    /// E_gs/N in units of ω₀.
    pub energy_per_atom: f64,
    pub jz_over_n: f64,
    /// ⟨a†a⟩/N.
    pub photons_over_n: f64,
    /// ⟨Π⟩, only for a fixed population without the linear drive.
    pub parity: Option<f64>,
    /// |ΔE_gs/N| between this cutoff and the enlarged re-run.
    pub cutoff_shift: f64,
    pub converged: bool,
    pub residual: f64,
}

struct RawGroundState {
    energy_per_atom: f64,
    jz_over_n: f64,
    photons_over_n: f64,
    parity: f64,
    residual: f64,
}

fn solve(params: &ModelParams, config: &EdConfig) -> Result<RawGroundState> {
    let h = build_hamiltonian(params, config)?;
    let dim = h.dim();
    let start = vec![1.0 / (dim as f64).sqrt(); dim];
    let options = LanczosOptions {
        tolerance: config.solver_tolerance,
        ..LanczosOptions::default()
    };
    let pair = lowest_eigenpair(&h, &start, &options)?;
    let basis = Basis::of(config);
    let n_atoms = config.n_atoms as f64;
    let (mut jz, mut photons, mut parity) = (0.0, 0.0, 0.0);
    for (idx, amp) in pair.vector.iter().enumerate() {
        let w = amp * amp;
        let (n, mi, _) = basis.decode(idx);
        jz += w * basis.m(mi);
        photons += w * n as f64;
        parity += if (n + mi) % 2 == 0 { w } else { -w };
    }
    Ok(RawGroundState {
        energy_per_atom: pair.value / n_atoms,
        jz_over_n: jz / n_atoms,
        photons_over_n: photons / n_atoms,
        parity,
        residual: pair.residual,
    })
}

/// Ground state at the resolved cutoff plus a re-run at the cutoff scaled by
/// `convergence_factor`.
pub fn ground_state(params: &ModelParams, config: &EdConfig) -> Result<EdResult> {
    config.validate()?;
    let config = config.resolved(params)?;
    let base = solve(params, &config)?;
    let larger = EdConfig {
        photon_cutoff: (config.photon_cutoff as f64 * config.convergence_factor).ceil() as usize,
        ..config
    };
    let check = solve(params, &larger)?;
    let cutoff_shift = (check.energy_per_atom - base.energy_per_atom).abs();
    let parity = match config.impurity_mode {
        ImpurityMode::FixedDelta(_) if params.xi2 == 0.0 => Some(base.parity),
        _ => None,
    };
    Ok(EdResult {
        n_atoms: config.n_atoms,
        photon_cutoff: config.photon_cutoff,
        energy_per_atom: base.energy_per_atom,
        jz_over_n: base.jz_over_n,
        photons_over_n: base.photons_over_n,
        parity,
        cutoff_shift,
        converged: cutoff_shift <= CUTOFF_CONVERGENCE * base.energy_per_atom.abs().max(1.0),
        residual: base.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteSizeEntry {
    pub result: EdResult,
    /// E₀ − f₂/2 from the mean-field ground state.
    pub mean_field_energy: f64,
    /// |E_gs/N − (E₀ − f₂/2)|.
    pub deviation: f64,
}

/// Ground states for each N in `n_list` at fixed δ, compared with mean field.
pub fn finite_size_scan(
    params: &ModelParams,
    delta: ImpurityPopulation,
    n_list: &[usize],
    template: &EdConfig,
) -> Result<Vec<FiniteSizeEntry>> {
    let mf = equilibrium_closed_form(params, delta)?;
    let f = effective_frequencies(params, delta)?;
    let mean_field_energy = mf.e0 - 0.5 * f.f2;
    n_list
        .iter()
        .map(|&n| {
            let config = EdConfig {
                n_atoms: n,
                impurity_mode: ImpurityMode::FixedDelta(delta),
                ..*template
            };
            let result = ground_state(params, &config).map_err(|e| IddmError::AtGridPoint {
                parameter: "n_atoms",
                value: n as f64,
                source: Box::new(e),
            })?;
            Ok(FiniteSizeEntry {
                result,
                mean_field_energy,
                deviation: (result.energy_per_atom - mean_field_energy).abs(),
            })
        })
        .collect()
}
