//! Mean-field ground state in the thermodynamic limit.
//!
//! With the cavity displaced by √N·α and the Holstein-Primakoff mode by √N·β,
//! the energy per atom is
//!
//! ```text
//! E₀(α, β) = f₁α² + f₂β² − 4λKαβ,   K = √(1 − β²)
//! ```
//!
//! Its minimum is the origin (normal phase) when ν = f₁f₂/(4λ²) ≥ 1 and
//!
//! ```text
//! α² = (λ²/f₁²)(1 − ν²),   β² = (1 − ν)/2,   E₀ = −(λ²/f₁)(1 − ν)²
//! ```
//!
//! (superradiant phase) for −1 < ν < 1. Solutions are reported in the
//! α ≥ 0, β ≥ 0 quadrant; the mirror point (−α, −β) is degenerate.
//!
//! The ξ₂δ(a + a†) drive carries no √N and drops out of E₀ entirely.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{IddmError, Result};
use crate::model::{effective_frequencies, EffectiveFrequencies, ImpurityPopulation, ModelParams};

/// |ν − 1| at or below this tags a point as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Gradient norm a numerically located minimum must reach.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;

const MAX_NEWTON_ITERATIONS: usize = 500;

/// Grid values closer than this to ±1 are treated as on the boundary.
const EDGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Superradiant,
    Critical,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superradiant => "superradiant",
            Phase::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldSolution {
    /// Photon displacement; I/N = α².
    pub alpha: f64,
    /// Matter displacement; ⟨Jz⟩/N = β² − 1/2.
    pub beta: f64,
    /// Scaled ground-state energy E₀.
    pub e0: f64,
    /// f₁f₂/(4λ²), absent when λ = 0.
    pub nu: Option<f64>,
    pub phase: Phase,
}

impl MeanFieldSolution {
    fn normal(nu: Option<f64>, phase: Phase) -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            e0: 0.0,
            nu,
            phase,
        }
    }
}

fn require_mean_field(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.chi != 0.0 {
        return Err(IddmError::ChiUnsupported { chi: params.chi });
    }
    Ok(())
}

fn frequencies(params: &ModelParams, delta: ImpurityPopulation) -> Result<EffectiveFrequencies> {
    require_mean_field(params)?;
    effective_frequencies(params, delta)
}

/// E₀(α, β) = f₁α² + f₂β² − 4λ√(1−β²)αβ.
pub fn scaled_energy(
    params: &ModelParams,
    delta: ImpurityPopulation,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let f = frequencies(params, delta)?;
    if !(beta.abs() <= 1.0) {
        return Err(IddmError::DomainError { beta });
    }
    let k = (1.0 - beta * beta).sqrt();
    Ok(f.f1 * alpha * alpha + f.f2 * beta * beta - 4.0 * params.lambda * k * alpha * beta)
}

/// (∂E₀/∂α, ∂E₀/∂β); zeros are the equilibrium conditions.
pub fn energy_gradient(
    params: &ModelParams,
    delta: ImpurityPopulation,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    let f = frequencies(params, delta)?;
    if !(beta.abs() < 1.0) {
        return Err(IddmError::DomainError { beta });
    }
    let lambda = params.lambda;
    let k = (1.0 - beta * beta).sqrt();
    Ok((
        2.0 * (f.f1 * alpha - 2.0 * lambda * k * beta),
        2.0 * (f.f2 * beta - 2.0 * lambda * alpha * (k - beta * beta / k)),
    ))
}

/// Rejects ν ≤ −1 (and λ = 0 with f₂ < 0), where β² would exceed 1.
fn admissible_nu(params: &ModelParams, f: &EffectiveFrequencies) -> Result<()> {
    match f.nu {
        Some(nu) if nu <= -1.0 => Err(IddmError::UnboundedPhase { nu }),
        None if f.f2 < 0.0 => Err(IddmError::UnboundedPhase {
            nu: f64::NEG_INFINITY,
        }),
        _ => {
            debug_assert!(params.lambda > 0.0 || f.f2 >= 0.0);
            Ok(())
        }
    }
}

/// Equilibrium from the closed-form solution of the stationarity conditions.
pub fn equilibrium_closed_form(
    params: &ModelParams,
    delta: ImpurityPopulation,
) -> Result<MeanFieldSolution> {
    let f = frequencies(params, delta)?;
    admissible_nu(params, &f)?;
    let Some(nu) = f.nu else {
        return Ok(MeanFieldSolution::normal(None, Phase::Normal));
    };
    if (nu - 1.0).abs() <= CRITICAL_TOLERANCE {
        return Ok(MeanFieldSolution::normal(Some(nu), Phase::Critical));
    }
    if nu > 1.0 {
        return Ok(MeanFieldSolution::normal(Some(nu), Phase::Normal));
    }
    let lambda = params.lambda;
    let alpha2 = lambda * lambda / (f.f1 * f.f1) * (1.0 - nu * nu);
    let beta2 = 0.5 * (1.0 - nu);
    Ok(MeanFieldSolution {
        alpha: alpha2.sqrt(),
        beta: beta2.sqrt(),
        e0: -(lambda * lambda / f.f1) * (1.0 - nu) * (1.0 - nu),
        nu: Some(nu),
        phase: Phase::Superradiant,
    })
}

/// Energy landscape in the angle parametrization β = sin φ, which removes
/// the |β| ≤ 1 boundary: E(α, φ) = f₁α² + f₂ sin²φ − 2λα sin 2φ.
struct Landscape {
    f1: f64,
    f2: f64,
    lambda: f64,
}

impl Landscape {
    fn energy(&self, alpha: f64, phi: f64) -> f64 {
        let s = phi.sin();
        self.f1 * alpha * alpha + self.f2 * s * s - 2.0 * self.lambda * alpha * (2.0 * phi).sin()
    }

    fn gradient(&self, alpha: f64, phi: f64) -> [f64; 2] {
        let (s2, c2) = (2.0 * phi).sin_cos();
        [
            2.0 * self.f1 * alpha - 2.0 * self.lambda * s2,
            self.f2 * s2 - 4.0 * self.lambda * alpha * c2,
        ]
    }

    fn hessian(&self, alpha: f64, phi: f64) -> [[f64; 2]; 2] {
        let (s2, c2) = (2.0 * phi).sin_cos();
        let off = -4.0 * self.lambda * c2;
        [
            [2.0 * self.f1, off],
            [off, 2.0 * self.f2 * c2 + 8.0 * self.lambda * alpha * s2],
        ]
    }

    /// Gradient with respect to (α, β) rather than (α, φ).
    fn physical_gradient_norm(&self, alpha: f64, phi: f64) -> f64 {
        let [ga, gphi] = self.gradient(alpha, phi);
        let c = phi.cos();
        if c.abs() < f64::EPSILON {
            return f64::INFINITY;
        }
        ga.hypot(gphi / c)
    }
}

struct LocalMinimum {
    alpha: f64,
    phi: f64,
    energy: f64,
    gradient_norm: f64,
}

/// Damped Newton descent; indefinite Hessians are shifted to positive definite.
fn descend(landscape: &Landscape, mut alpha: f64, mut phi: f64) -> LocalMinimum {
    let mut energy = landscape.energy(alpha, phi);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let g = landscape.gradient(alpha, phi);
        if g[0].hypot(g[1]) == 0.0 {
            break;
        }
        let [[a, b], [_, d]] = landscape.hessian(alpha, phi);
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        let min_eig = 0.5 * (tr - disc);
        let shift = if min_eig > 1e-12 * tr.abs().max(1.0) {
            0.0
        } else {
            -min_eig + 1e-6 * tr.abs().max(1.0)
        };
        let (a, d) = (a + shift, d + shift);
        let det = a * d - b * b;
        let step = [-(d * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det];
        let slope = g[0] * step[0] + g[1] * step[1];
        let grad_norm = landscape.physical_gradient_norm(alpha, phi);

        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-14 {
            let (na, np) = (alpha + t * step[0], phi + t * step[1]);
            let ne = landscape.energy(na, np);
            // Near the minimum, energy differences drown in rounding; a shrinking
            // gradient is then the better acceptance signal.
            if ne <= energy + 1e-4 * t * slope
                || (ne <= energy + 1e-15 * energy.abs().max(1.0)
                    && landscape.physical_gradient_norm(na, np) < grad_norm)
            {
                accepted = Some((na, np, ne));
                break;
            }
            t *= 0.5;
        }
        let Some((na, np, ne)) = accepted else {
            break;
        };
        let moved = (na - alpha).abs() + (np - phi).abs();
        alpha = na;
        phi = np;
        energy = ne;
        if moved <= 1e-17 {
            break;
        }
    }
    // E is π-periodic in φ; fold back into (−π/2, π/2].
    let phi = phi - std::f64::consts::PI * (phi / std::f64::consts::PI).round();
    LocalMinimum {
        alpha,
        phi,
        energy: landscape.energy(alpha, phi),
        gradient_norm: landscape.physical_gradient_norm(alpha, phi),
    }
}

/// Equilibrium by multi-start Newton descent on E₀, independent of the closed form.
///
/// Seeds sit at φ = (π/2)(k + ½)/n for k < n with α at its conditional
/// optimum λ sin 2φ / f₁; the lowest converged local minimum wins.
pub fn equilibrium_numeric(
    params: &ModelParams,
    delta: ImpurityPopulation,
    seed_count: usize,
) -> Result<MeanFieldSolution> {
    let f = frequencies(params, delta)?;
    admissible_nu(params, &f)?;
    if seed_count == 0 {
        return Err(IddmError::invalid("seed_count", "must be at least 1"));
    }
    let landscape = Landscape {
        f1: f.f1,
        f2: f.f2,
        lambda: params.lambda,
    };
    let mut best: Option<LocalMinimum> = None;
    let mut worst_gradient = 0.0f64;
    for k in 0..seed_count {
        let phi0 = std::f64::consts::FRAC_PI_2 * (k as f64 + 0.5) / seed_count as f64;
        let alpha0 = params.lambda * (2.0 * phi0).sin() / f.f1;
        let local = descend(&landscape, alpha0, phi0);
        if !(local.gradient_norm <= GRADIENT_TOLERANCE) {
            worst_gradient = worst_gradient.max(local.gradient_norm);
            continue;
        }
        if best.as_ref().is_none_or(|b| local.energy < b.energy) {
            best = Some(local);
        }
    }
    let Some(best) = best else {
        return Err(IddmError::ConvergenceFailure(format!(
            "no descent from {seed_count} seeds reached gradient norm {GRADIENT_TOLERANCE:e} \
             (best {worst_gradient:e})"
        )));
    };

    let alpha = best.alpha.abs();
    let beta = best.phi.sin().abs();
    let phase = match f.nu {
        Some(nu) if (nu - 1.0).abs() <= CRITICAL_TOLERANCE => Phase::Critical,
        _ if beta * beta > 1e-12 || alpha * alpha > 1e-12 => Phase::Superradiant,
        _ => Phase::Normal,
    };
    if phase != Phase::Superradiant {
        return Ok(MeanFieldSolution::normal(f.nu, phase));
    }
    let k = (1.0 - beta * beta).sqrt();
    Ok(MeanFieldSolution {
        alpha,
        beta,
        e0: f.f1 * alpha * alpha + f.f2 * beta * beta - 4.0 * params.lambda * k * alpha * beta,
        nu: f.nu,
        phase,
    })
}

fn snap_to_population(value: f64) -> Option<f64> {
    if value.abs() <= 1.0 {
        Some(value)
    } else if (value.abs() - 1.0) <= EDGE_TOLERANCE {
        Some(value.signum())
    } else {
        None
    }
}

/// Impurity population at which ν(δ) = 1 for the coupling in `params`.
///
/// Returns `Ok(None)` when the crossing lies outside [−1, 1]. For ξ₁ = 0 this is
/// δ_c = (4λ² − ωω₀)/(ωκ) − 1; otherwise the quadratic f₁(δ)f₂(δ) = 4λ² is solved
/// and the admissible root nearest the ξ₁ = 0 value is taken.
pub fn critical_delta(params: &ModelParams) -> Result<Option<f64>> {
    params.validate()?;
    let (omega, omega0, kappa, lambda) = (params.omega, params.omega0, params.kappa, params.lambda);
    if kappa == 0.0 {
        return Err(IddmError::ZeroKappa);
    }
    let linear = (4.0 * lambda * lambda - omega * omega0) / (omega * kappa) - 1.0;
    if params.xi1 == 0.0 {
        return Ok(snap_to_population(linear));
    }

    // ξ₁κ δ² + (ωκ + ξ₁(ω₀ + κ)) δ + ω(ω₀ + κ) − 4λ² = 0
    let xi1 = params.xi1;
    let a = xi1 * kappa;
    let b = omega * kappa + xi1 * (omega0 + kappa);
    let c = omega * (omega0 + kappa) - 4.0 * lambda * lambda;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Ok(None);
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    Ok(roots
        .into_iter()
        .filter_map(snap_to_population)
        .filter(|d| omega + xi1 * d > 0.0)
        .min_by(|x, y| (x - linear).abs().total_cmp(&(y - linear).abs())))
}

/// Coupling λ_c = ½√(f₁f₂) at which ν = 1; `Ok(None)` when f₁f₂ ≤ 0, i.e. the
/// system is superradiant for every λ > 0.
pub fn critical_lambda(params: &ModelParams, delta: ImpurityPopulation) -> Result<Option<f64>> {
    params.validate()?;
    let f = effective_frequencies(params, delta)?;
    let radicand = f.f1 * f.f2;
    Ok((radicand > 0.0).then(|| 0.5 * radicand.sqrt()))
}

/// Scaled observables (⟨Jz⟩/N, I/N) = (β² − 1/2, α²).
pub fn observables(solution: &MeanFieldSolution) -> (f64, f64) {
    (
        solution.beta * solution.beta - 0.5,
        solution.alpha * solution.alpha,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanParameter {
    Delta,
    Lambda,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::Delta => "delta",
            ScanParameter::Lambda => "lambda",
        }
    }
}

/// E₀ along a uniform grid with central finite differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeScan {
    pub parameter: ScanParameter,
    pub grid: Vec<f64>,
    pub step: f64,
    pub e0_values: Vec<f64>,
    /// First differences; one-sided second-order stencils at the two edges.
    pub d1_values: Vec<f64>,
    /// Second differences at the interior points `grid[1..n-1]`.
    pub d2_values: Vec<f64>,
}

impl DerivativeScan {
    /// Largest |Δd2| between neighbouring interior points, with the midpoint
    /// of the pair as its location.
    pub fn largest_d2_jump(&self) -> Option<(f64, f64)> {
        self.d2_values
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                (
                    (w[1] - w[0]).abs(),
                    0.5 * (self.grid[i + 1] + self.grid[i + 2]),
                )
            })
            .fold(None, |acc: Option<(f64, f64)>, (jump, at)| match acc {
                Some((best, _)) if best >= jump => acc,
                _ => Some((jump, at)),
            })
            .map(|(jump, at)| (at, jump))
    }

    pub fn max_d1_jump(&self) -> f64 {
        self.d1_values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }
}

/// Scans E₀ over `[from, to]` with spacing `step` in either δ (at the λ of
/// `params`) or λ (at `fixed_delta`).
pub fn derivative_scan(
    params: &ModelParams,
    fixed_delta: ImpurityPopulation,
    parameter: ScanParameter,
    from: f64,
    to: f64,
    step: f64,
) -> Result<DerivativeScan> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(IddmError::invalid("step", "must be positive"));
    }
    if !(from < to) {
        return Err(IddmError::invalid("range", "requires from < to"));
    }
    let intervals = ((to - from) / step * (1.0 + 1e-12)).floor() as usize;
    if intervals < 2 {
        return Err(IddmError::invalid(
            "step",
            "grid needs at least three points",
        ));
    }
    let grid: Vec<f64> = (0..=intervals).map(|i| from + i as f64 * step).collect();

    let e0_values = grid
        .par_iter()
        .map(|&x| {
            let at_point = |source| IddmError::AtGridPoint {
                parameter: parameter.name(),
                value: x,
                source: Box::new(source),
            };
            let solution = match parameter {
                ScanParameter::Delta => {
                    let delta = ImpurityPopulation::new(x).map_err(at_point)?;
                    equilibrium_closed_form(params, delta)
                }
                ScanParameter::Lambda => {
                    equilibrium_closed_form(&params.with_lambda(x), fixed_delta)
                }
            };
            solution.map(|s| s.e0).map_err(at_point)
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = e0_values.len();
    let e = &e0_values;
    let mut d1_values = Vec::with_capacity(n);
    d1_values.push((-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * step));
    d1_values.extend((1..n - 1).map(|i| (e[i + 1] - e[i - 1]) / (2.0 * step)));
    d1_values.push((3.0 * e[n - 1] - 4.0 * e[n - 2] + e[n - 3]) / (2.0 * step));
    let d2_values = (1..n - 1)
        .map(|i| (e[i + 1] - 2.0 * e[i] + e[i - 1]) / (step * step))
        .collect();

    Ok(DerivativeScan {
        parameter,
        grid,
        step,
        e0_values,
        d1_values,
        d2_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pop(d: f64) -> ImpurityPopulation {
        ImpurityPopulation::new(d).unwrap()
    }

    fn reference() -> ModelParams {
        ModelParams::default()
    }

    /// Brute-force minimum of E₀ over a dense (α, β) grid refined by
    /// repeated zooming. Independent of both solvers under test.
    fn grid_minimum(params: &ModelParams, delta: f64) -> (f64, f64, f64) {
        let d = pop(delta);
        let f = effective_frequencies(params, d).unwrap();
        let mut a_range = (0.0, 2.0 * params.lambda / f.f1 + 1e-3);
        let mut b_range = (0.0, 1.0);
        let mut best = (0.0, 0.0, 0.0);
        for _ in 0..40 {
            let steps = 60;
            best = (0.0, 0.0, f64::INFINITY);
            for i in 0..=steps {
                let a = a_range.0 + (a_range.1 - a_range.0) * i as f64 / steps as f64;
                for j in 0..=steps {
                    let b = b_range.0 + (b_range.1 - b_range.0) * j as f64 / steps as f64;
                    let e = scaled_energy(params, d, a, b).unwrap();
                    if e < best.2 {
                        best = (a, b, e);
                    }
                }
            }
            let wa = (a_range.1 - a_range.0) / 8.0;
            let wb = (b_range.1 - b_range.0) / 8.0;
            a_range = ((best.0 - wa).max(0.0), best.0 + wa);
            b_range = ((best.1 - wb).max(0.0), (best.1 + wb).min(1.0));
        }
        best
    }

    #[test]
    fn energy_examples() {
        let p = reference();
        assert_eq!(scaled_energy(&p, pop(0.3), 0.0, 0.0).unwrap(), 0.0);
        let e = scaled_energy(&p, pop(1.0), 0.0125, 0.5f64.sqrt()).unwrap();
        assert_relative_eq!(e, -0.0625, max_relative = 1e-12);
        let free = p.with_lambda(0.0);
        let e = scaled_energy(&free, pop(0.2), 0.3, 0.4).unwrap();
        assert_relative_eq!(e, 400.0 * 0.09 + 0.4 * 0.16, max_relative = 1e-15);
    }

    #[test]
    fn energy_domain_errors() {
        let p = reference();
        assert!(matches!(
            scaled_energy(&p, pop(0.0), 0.1, 1.1),
            Err(IddmError::DomainError { .. })
        ));
        assert!(matches!(
            energy_gradient(&p, pop(0.0), 0.1, 1.0),
            Err(IddmError::DomainError { .. })
        ));
        let chi = ModelParams { chi: 0.1, ..p };
        assert!(matches!(
            scaled_energy(&chi, pop(0.0), 0.0, 0.0),
            Err(IddmError::ChiUnsupported { .. })
        ));
    }

    #[test]
    fn gradient_vanishes_at_equilibria() {
        let p = reference();
        assert_eq!(energy_gradient(&p, pop(0.0), 0.0, 0.0).unwrap(), (0.0, 0.0));
        for d in [0.6, 0.75, 1.0] {
            let s = equilibrium_closed_form(&p, pop(d)).unwrap();
            let (ga, gb) = energy_gradient(&p, pop(d), s.alpha, s.beta).unwrap();
            assert!(ga.abs() <= 1e-10 && gb.abs() <= 1e-10, "{d}: {ga} {gb}");
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = reference();
        let s = equilibrium_closed_form(&p, pop(0.0)).unwrap();
        assert_eq!(s.phase, Phase::Normal);
        assert_eq!((s.alpha, s.beta, s.e0), (0.0, 0.0, 0.0));
        assert_eq!(s.nu, Some(2.0));

        let s = equilibrium_closed_form(&p, pop(1.0)).unwrap();
        assert_eq!(s.phase, Phase::Superradiant);
        assert_relative_eq!(s.alpha * s.alpha, 1.5625e-4, max_relative = 1e-12);
        assert_relative_eq!(s.beta * s.beta, 0.5, max_relative = 1e-12);
        assert_relative_eq!(s.e0, -0.0625, max_relative = 1e-12);

        let s = equilibrium_closed_form(&p, pop(0.75)).unwrap();
        assert_relative_eq!(s.alpha * s.alpha, 1.171875e-4, max_relative = 1e-12);
        assert_relative_eq!(s.beta * s.beta, 0.25, max_relative = 1e-12);
        assert_relative_eq!(observables(&s).0, -0.25, max_relative = 1e-12);

        let s = equilibrium_closed_form(&p, pop(0.5)).unwrap();
        assert_eq!(s.phase, Phase::Critical);
        assert_eq!((s.alpha, s.beta, s.e0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn closed_form_matches_brute_force_grid() {
        let p = reference();
        for d in [0.0, 0.75, 1.0] {
            let s = equilibrium_closed_form(&p, pop(d)).unwrap();
            let (a, b, e) = grid_minimum(&p, d);
            assert!((s.alpha * s.alpha - a * a).abs() < 1e-9, "{d}");
            assert!((s.beta * s.beta - b * b).abs() < 1e-6, "{d}");
            assert!((s.e0 - e).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn standard_dicke_below_threshold_is_normal() {
        let p = ModelParams::dicke(400.0, 1.0, 9.5);
        for i in 0..=20 {
            let d = -1.0 + 0.1 * i as f64;
            let s = equilibrium_closed_form(&p, pop(d.clamp(-1.0, 1.0))).unwrap();
            assert_eq!(s.phase, Phase::Normal);
        }
    }

    #[test]
    fn unbounded_phase_rejected() {
        // f₂ = 1 − 2·2 = −3, ν = 400·(−3)/4 < −1
        let p = ModelParams {
            kappa: -2.0,
            lambda: 1.0,
            ..reference()
        };
        assert!(matches!(
            equilibrium_closed_form(&p, pop(1.0)),
            Err(IddmError::UnboundedPhase { .. })
        ));
        assert!(matches!(
            equilibrium_closed_form(&p.with_lambda(0.0), pop(1.0)),
            Err(IddmError::UnboundedPhase { .. })
        ));
    }

    #[test]
    fn numeric_examples() {
        let p = reference();
        let s = equilibrium_numeric(&p, pop(0.0), 8).unwrap();
        assert!(s.alpha.abs() <= 1e-8 && s.beta.abs() <= 1e-8);
        let s = equilibrium_numeric(&p, pop(1.0), 8).unwrap();
        assert!((s.alpha * s.alpha - 1.5625e-4).abs() <= 1e-8);
        assert!((s.beta * s.beta - 0.5).abs() <= 1e-8);
        assert_eq!(s.phase, Phase::Superradiant);
    }

    #[test]
    fn numeric_handles_exact_critical_point() {
        let s = equilibrium_numeric(&reference(), pop(0.5), 8).unwrap();
        assert_eq!(s.phase, Phase::Critical);
        assert_eq!((s.alpha, s.beta), (0.0, 0.0));
    }

    #[test]
    fn critical_delta_examples() {
        let p = reference();
        assert_eq!(critical_delta(&p).unwrap(), Some(0.5));
        assert_eq!(critical_delta(&p.with_lambda(10.0)).unwrap(), Some(-1.0));
        assert_eq!(critical_delta(&p.with_lambda(20.0)).unwrap(), None);
        assert_eq!(
            critical_delta(&ModelParams::dicke(400.0, 1.0, 5.0)),
            Err(IddmError::ZeroKappa)
        );
    }

    #[test]
    fn critical_delta_with_dispersive_shift_solves_nu_equal_one() {
        let p = ModelParams { xi1: 3.0, ..reference() };
        let dc = critical_delta(&p).unwrap().unwrap();
        let f = effective_frequencies(&p, pop(dc)).unwrap();
        assert_relative_eq!(f.nu.unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn critical_lambda_examples() {
        let dicke = ModelParams::dicke(400.0, 1.0, 1.0);
        assert_eq!(critical_lambda(&dicke, pop(0.3)).unwrap(), Some(10.0));
        let lc = critical_lambda(&reference(), pop(0.0)).unwrap().unwrap();
        assert_relative_eq!(lc, 200f64.sqrt() / 2.0, max_relative = 1e-15);
        assert_eq!(critical_lambda(&reference(), pop(1.0)).unwrap(), None);
    }

    #[test]
    fn observables_examples() {
        let p = reference();
        let normal = equilibrium_closed_form(&p, pop(0.0)).unwrap();
        assert_eq!(observables(&normal), (-0.5, 0.0));
        let (jz, i) = observables(&equilibrium_closed_form(&p, pop(1.0)).unwrap());
        assert!(jz.abs() < 1e-15);
        assert_relative_eq!(i, 1.5625e-4, max_relative = 1e-12);
    }

    #[test]
    fn delta_scan_locates_second_order_jump() {
        let scan =
            derivative_scan(&reference(), pop(0.0), ScanParameter::Delta, 0.0, 1.0, 1e-3).unwrap();
        assert_eq!(scan.grid.len(), 1001);
        assert_eq!(scan.d2_values.len(), scan.grid.len() - 2);
        let (at, _) = scan.largest_d2_jump().unwrap();
        assert!((at - 0.5).abs() <= 1e-3, "jump at {at}");
        for (i, d2) in scan.d2_values.iter().enumerate() {
            let x = scan.grid[i + 1];
            if x < 0.499 {
                assert!(d2.abs() < 1e-12);
            } else if x > 0.501 {
                assert!((d2 + 0.5).abs() < 1e-6, "{x}: {d2}");
            }
        }
    }

    #[test]
    fn scan_without_impurity_coupling_is_flat() {
        let p = ModelParams::dicke(400.0, 1.0, 12.0);
        let scan = derivative_scan(&p, pop(0.0), ScanParameter::Delta, -1.0, 1.0, 0.01).unwrap();
        assert!(scan.d2_values.iter().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn lambda_scan_jumps_at_critical_coupling() {
        let p = reference();
        let lc = critical_lambda(&p, pop(0.0)).unwrap().unwrap();
        let scan = derivative_scan(&p, pop(0.0), ScanParameter::Lambda, 5.0, 9.0, 1e-3).unwrap();
        let (at, jump) = scan.largest_d2_jump().unwrap();
        assert!((at - lc).abs() <= 2e-3, "{at} vs {lc}");
        assert!(jump > 1e-3);
        assert!(scan.max_d1_jump() < 1e-2);
    }

    #[test]
    fn scan_reports_offending_point() {
        let p = ModelParams {
            kappa: -2.0,
            lambda: 1.0,
            ..reference()
        };
        let err = derivative_scan(&p, pop(0.0), ScanParameter::Delta, -1.0, 1.0, 0.1).unwrap_err();
        assert!(matches!(
            err,
            IddmError::AtGridPoint {
                parameter: "delta",
                ..
            }
        ));
    }

    #[test]
    fn branch_continuity_across_critical_point() {
        let p = reference();
        let e = |d: f64| equilibrium_closed_form(&p, pop(d)).unwrap();
        for eps in [1e-6, 1e-8, 1e-10] {
            let below = e(0.5 - eps);
            let above = e(0.5 + eps);
            // Order parameters grow linearly away from δ_c (β² ≈ ε here), the energy quadratically.
            assert!((below.e0 - above.e0).abs() <= 2.0 * eps);
            assert!((below.alpha.powi(2) - above.alpha.powi(2)).abs() <= 2.0 * eps);
            assert!((below.beta.powi(2) - above.beta.powi(2)).abs() <= 2.0 * eps);
        }
    }

    fn admissible() -> impl Strategy<Value = (ModelParams, f64)> {
        (1.0..500.0f64, -2.0..2.0f64, 0.0..30.0f64, -1.0..=1.0f64)
            .prop_map(|(omega, kappa, lambda, delta)| {
                (
                    ModelParams {
                        omega,
                        kappa,
                        lambda,
                        ..ModelParams::default()
                    },
                    delta,
                )
            })
            .prop_filter("nu > -1", |(p, d)| {
                let f = effective_frequencies(p, ImpurityPopulation::new(*d).unwrap()).unwrap();
                f.nu.map_or(f.f2 >= 0.0, |nu| nu > -1.0)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn gradient_matches_finite_differences(
            (p, d) in admissible(),
            alpha in -0.5..0.5f64,
            beta in -0.95..0.95f64,
        ) {
            let d = pop(d);
            let (ga, gb) = energy_gradient(&p, d, alpha, beta).unwrap();
            let h = 1e-6;
            let fa = (scaled_energy(&p, d, alpha + h, beta).unwrap()
                - scaled_energy(&p, d, alpha - h, beta).unwrap()) / (2.0 * h);
            let fb = (scaled_energy(&p, d, alpha, beta + h).unwrap()
                - scaled_energy(&p, d, alpha, beta - h).unwrap()) / (2.0 * h);
            let scale = ga.abs().max(gb.abs()).max(1.0);
            prop_assert!((ga - fa).abs() <= 1e-6 * scale);
            prop_assert!((gb - fb).abs() <= 1e-6 * scale);
        }

        #[test]
        fn superradiant_energy_formula((p, d) in admissible()) {
            let s = equilibrium_closed_form(&p, pop(d)).unwrap();
            if s.phase == Phase::Superradiant {
                let e = scaled_energy(&p, pop(d), s.alpha, s.beta).unwrap();
                prop_assert!((e - s.e0).abs() <= 1e-10 * s.e0.abs().max(1.0));
            }
        }

        #[test]
        fn attractive_impurity_never_restores_normal_phase(
            kappa in -2.0..-0.01f64,
            lambda in 0.1..20.0f64,
            d1 in -1.0..1.0f64,
            d2 in -1.0..1.0f64,
        ) {
            let p = ModelParams { kappa, lambda, ..ModelParams::default() };
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let a = equilibrium_closed_form(&p, pop(lo));
            let b = equilibrium_closed_form(&p, pop(hi));
            if let (Ok(a), Ok(b)) = (a, b) {
                if a.phase == Phase::Superradiant {
                    prop_assert_eq!(b.phase, Phase::Superradiant);
                }
            }
        }
    }
}
