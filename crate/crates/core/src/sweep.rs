//! Phase-diagram grids over (δ, λ), critical-curve traces, and their CSV form.
//!
//! Rows are emitted δ-major (λ varies fastest). Points where the mean-field
//! preconditions fail are kept as error rows so excluded regions stay visible.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{IddmError, Result};
use crate::meanfield::{critical_lambda, equilibrium_closed_form, observables, DerivativeScan};
use crate::model::{ImpurityPopulation, ModelParams};

pub const CSV_HEADER: &str = "delta,lambda,alpha2,beta2,e0,jz_over_n,i_over_n,phase,error";

/// Inclusive uniform axis: `count` points from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self { min, max, count };
        axis.validate()?;
        Ok(axis)
    }

    pub fn single(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            count: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(IddmError::invalid("range", "requires finite min <= max"));
        }
        match self.count {
            0 => Err(IddmError::invalid("count", "must be at least 1")),
            1 if self.min != self.max => Err(IddmError::invalid(
                "count",
                "a single point requires min == max",
            )),
            _ => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub delta_range: AxisRange,
    pub lambda_range: AxisRange,
    /// Fixed coefficients; `lambda` is overridden along the grid.
    pub params: ModelParams,
}

impl GridSpec {
    /// δ ∈ [−1, 1] × 201, λ ∈ [0, 12] × 121 at the given coefficients.
    pub fn phase_diagram(params: ModelParams) -> Self {
        Self {
            delta_range: AxisRange {
                min: -1.0,
                max: 1.0,
                count: 201,
            },
            lambda_range: AxisRange {
                min: 0.0,
                max: 12.0,
                count: 121,
            },
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagramRow {
    pub delta: f64,
    pub lambda: f64,
    pub alpha2: Option<f64>,
    pub beta2: Option<f64>,
    pub e0: Option<f64>,
    pub jz_over_n: Option<f64>,
    pub i_over_n: Option<f64>,
    /// normal, superradiant, critical, or error.
    pub phase: &'static str,
    pub error: Option<&'static str>,
}

/// Short machine-readable tag for an error row.
pub fn error_tag(err: &IddmError) -> &'static str {
    match err {
        IddmError::UnboundedPhase { .. } => "unbounded_phase",
        IddmError::NonPositiveF1 { .. } => "non_positive_f1",
        IddmError::ChiUnsupported { .. } => "chi_unsupported",
        IddmError::InvalidParameter { .. } => "invalid_parameter",
        IddmError::DomainError { .. } => "domain_error",
        IddmError::AtGridPoint { source, .. } => error_tag(source),
        _ => "error",
    }
}

fn evaluate(params: &ModelParams, delta: f64, lambda: f64) -> PhaseDiagramRow {
    let outcome = ImpurityPopulation::new(delta)
        .and_then(|d| equilibrium_closed_form(&params.with_lambda(lambda), d));
    match outcome {
        Ok(s) => {
            let (jz, i) = observables(&s);
            PhaseDiagramRow {
                delta,
                lambda,
                alpha2: Some(s.alpha * s.alpha),
                beta2: Some(s.beta * s.beta),
                e0: Some(s.e0),
                jz_over_n: Some(jz),
                i_over_n: Some(i),
                phase: s.phase.label(),
                error: None,
            }
        }
        Err(e) => PhaseDiagramRow {
            delta,
            lambda,
            alpha2: None,
            beta2: None,
            e0: None,
            jz_over_n: None,
            i_over_n: None,
            phase: "error",
            error: Some(error_tag(&e)),
        },
    }
}

/// Closed-form equilibria over the grid; a bad point becomes an error row.
pub fn run_grid(spec: &GridSpec) -> Result<Vec<PhaseDiagramRow>> {
    spec.delta_range.validate()?;
    spec.lambda_range.validate()?;
    let deltas = spec.delta_range.values();
    let lambdas = spec.lambda_range.values();
    let points: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| lambdas.iter().map(move |&l| (d, l)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(d, l)| evaluate(&spec.params, d, l))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCurvePoint {
    pub delta: f64,
    /// `None` where no transition exists (superradiant for every λ > 0).
    pub lambda_c: Option<f64>,
}

pub fn trace_critical_curve(
    params: &ModelParams,
    delta_range: &AxisRange,
) -> Result<Vec<CriticalCurvePoint>> {
    delta_range.validate()?;
    delta_range
        .values()
        .into_iter()
        .map(|delta| {
            let lambda_c = critical_lambda(params, ImpurityPopulation::new(delta)?)?;
            Ok(CriticalCurvePoint { delta, lambda_c })
        })
        .collect()
}

/// 17 significant digits, round-trip exact.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[PhaseDiagramRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_float(r.delta),
            format_float(r.lambda),
            opt(r.alpha2),
            opt(r.beta2),
            opt(r.e0),
            opt(r.jz_over_n),
            opt(r.i_over_n),
            r.phase,
            r.error.unwrap_or("")
        )?;
    }
    Ok(())
}

pub fn write_json_lines<W: Write, T: Serialize>(rows: &[T], mut out: W) -> io::Result<()> {
    for r in rows {
        serde_json_line(r, &mut out)?;
    }
    Ok(())
}

fn serde_json_line<W: Write, T: Serialize>(row: &T, out: &mut W) -> io::Result<()> {
    serde_json::to_writer(&mut *out, row).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

pub fn write_critical_curve_csv<W: Write>(
    points: &[CriticalCurvePoint],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "delta,lambda_c")?;
    for p in points {
        match p.lambda_c {
            Some(l) => writeln!(out, "{},{}", format_float(p.delta), format_float(l))?,
            None => writeln!(out, "{},no-transition", format_float(p.delta))?,
        }
    }
    Ok(())
}

/// `param,value,e0,d1,d2`; d2 is empty at the two edge points.
pub fn write_derivative_csv<W: Write>(scan: &DerivativeScan, mut out: W) -> io::Result<()> {
    writeln!(out, "param,value,e0,d1,d2")?;
    let n = scan.grid.len();
    for i in 0..n {
        let d2 = if i == 0 || i == n - 1 {
            String::new()
        } else {
            format_float(scan.d2_values[i - 1])
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            scan.parameter.name(),
            format_float(scan.grid[i]),
            format_float(scan.e0_values[i]),
            format_float(scan.d1_values[i]),
            d2
        )?;
    }
    Ok(())
}
