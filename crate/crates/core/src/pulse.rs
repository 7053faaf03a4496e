//! Single-qubit SU(2) rotations and the SK1 composite pulse.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Mat2 = [[Complex64; 2]; 2];

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("SK1 needs |theta| <= 4 pi, got {0}")]
    AngleOutOfRange(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("need at least two positive points for a slope fit")]
    TooFewPoints,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// Largest entry of `|U^dagger U - I|`.
pub fn unitarity_error(u: &Mat2) -> f64 {
    let p = mul(&adjoint(u), u);
    let id = identity();
    (0..2)
        .flat_map(|r| (0..2).map(move |c| (r, c)))
        .map(|(r, c)| (p[r][c] - id[r][c]).norm())
        .fold(0.0, f64::max)
}

/// Rotation by `angle` about the equatorial axis at phase `phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub angle: f64,
    pub phase: f64,
}

impl Rotation {
    pub fn new(angle: f64, phase: f64) -> Self {
        Rotation {
            angle,
            phase: phase.rem_euclid(TAU),
        }
    }

    /// `cos(a/2) I - i sin(a/2) (cos(phi) X + sin(phi) Y)` with `a = scale * angle`.
    pub fn matrix(&self, scale: f64) -> Mat2 {
        let half = 0.5 * scale * self.angle;
        let (s, c) = half.sin_cos();
        let (sp, cp) = self.phase.sin_cos();
        let off = Complex64::new(0.0, -s);
        [
            [Complex64::new(c, 0.0), off * Complex64::new(cp, -sp)],
            [off * Complex64::new(cp, sp), Complex64::new(c, 0.0)],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub pulses: Vec<Rotation>,
}

impl PulseSequence {
    pub fn plain(theta: f64, phi: f64) -> Self {
        PulseSequence {
            pulses: vec![Rotation::new(theta, phi)],
        }
    }

    /// `(theta, phi)` followed by `(2pi, phi + phi_c)` and `(2pi, phi - phi_c)`
    /// with `cos(phi_c) = -theta / 4pi`.
    pub fn sk1(theta: f64, phi: f64) -> Result<Self, PulseError> {
        if theta.is_nan() || theta.abs() > 2.0 * TAU {
            return Err(PulseError::AngleOutOfRange(theta));
        }
        let phi_c = (-theta / (2.0 * TAU)).acos();
        Ok(PulseSequence {
            pulses: vec![
                Rotation::new(theta, phi),
                Rotation::new(TAU, phi + phi_c),
                Rotation::new(TAU, phi - phi_c),
            ],
        })
    }

    /// Product of all pulses with every angle multiplied by `scale`; the
    /// first pulse acts first.
    pub fn evolve(&self, scale: f64) -> Mat2 {
        self.pulses
            .iter()
            .fold(identity(), |acc, p| mul(&p.matrix(scale), &acc))
    }
}

/// `1 - |tr(U^dagger V)|^2 / 4`, clamped to `[0, 1]`.
///
/// Evaluated as `|W01|^2 + |W00 - W11|^2 / 4` with `W = U^dagger V`, which
/// equals the trace form for unitary `W` and keeps precision near zero.
pub fn infidelity(u: &Mat2, v: &Mat2) -> Result<f64, PulseError> {
    for m in [u, v] {
        let e = unitarity_error(m);
        if e.is_nan() || e > UNITARY_TOL {
            return Err(PulseError::NotUnitary(e));
        }
    }
    let w = mul(&adjoint(u), v);
    let val = w[0][1].norm_sqr() + (w[0][0] - w[1][1]).norm_sqr() / 4.0;
    Ok(val.clamp(0.0, 1.0))
}

/// Net rotation angle of `u` in `[0, pi]`, ignoring global phase.
pub fn rotation_angle(u: &Mat2) -> f64 {
    let sin_half = (u[0][1].norm_sqr() + (u[0][0] - u[1][1]).norm_sqr() / 4.0).sqrt();
    2.0 * sin_half.min(1.0).asin()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64, PulseError> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(PulseError::TooFewPoints);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `count` points spaced evenly in log between `lo` and `hi`. Both ends are
/// exact.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    /// Spectator drive fraction, or relative amplitude error for the
    /// addressed-qubit report.
    pub error: f64,
    pub plain: f64,
    pub sk1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub theta: f64,
    pub phi: f64,
    pub rows: Vec<ErrorRow>,
    pub plain_slope: f64,
    pub sk1_slope: f64,
}

fn report(
    theta: f64,
    phi: f64,
    grid: &[f64],
    ideal: Mat2,
    scale: impl Fn(f64) -> f64,
) -> Result<ErrorReport, PulseError> {
    let plain = PulseSequence::plain(theta, phi);
    let sk1 = PulseSequence::sk1(theta, phi)?;
    let rows = grid
        .iter()
        .map(|&e| {
            Ok(ErrorRow {
                error: e,
                plain: infidelity(&ideal, &plain.evolve(scale(e)))?,
                sk1: infidelity(&ideal, &sk1.evolve(scale(e)))?,
            })
        })
        .collect::<Result<Vec<_>, PulseError>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let plain_slope = loglog_slope(&xs, &rows.iter().map(|r| r.plain).collect::<Vec<_>>())?;
    let sk1_slope = loglog_slope(&xs, &rows.iter().map(|r| r.sk1).collect::<Vec<_>>())?;
    Ok(ErrorReport {
        theta,
        phi,
        rows,
        plain_slope,
        sk1_slope,
    })
}

/// Infidelity against the identity of a spectator that sees a fraction
/// `eps` of the drive.
pub fn crosstalk_report(theta: f64, phi: f64, eps: &[f64]) -> Result<ErrorReport, PulseError> {
    report(theta, phi, eps, identity(), |e| e)
}

/// Infidelity against the ideal rotation of an addressed qubit whose drive
/// is off by a relative `delta`.
pub fn amplitude_report(theta: f64, phi: f64, delta: &[f64]) -> Result<ErrorReport, PulseError> {
    report(
        theta,
        phi,
        delta,
        Rotation::new(theta, phi).matrix(1.0),
        |d| 1.0 + d,
    )
}
