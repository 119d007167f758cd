//! Pair potentials, the Mayer f-function and the integrated absolute bond
//! C(beta) that controls the expansion's convergence radius.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance for the quadrature route of C(beta).
const C_BETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    HardRod,
    HardSphere,
    SquareWell {
        /// Well depth (energy, >= 0).
        epsilon: f64,
        /// Well width factor (> 1); the well spans sigma..lambda*sigma.
        lambda: f64,
    },
    /// Piecewise-linear V(r) between the given nodes; V = 0 beyond the last
    /// node, so C(beta) is finite by construction.
    Tabulated { points: Vec<(f64, f64)> },
}

/// A stable, radially symmetric pair potential together with the inverse
/// temperature and the stability constant it is assumed to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPotential {
    pub kind: PotentialKind,
    /// Spatial dimension, 1 or 3.
    pub dimension: usize,
    /// Core diameter (length scale).
    pub sigma: f64,
    /// Inverse temperature.
    pub beta: f64,
    /// Stability constant B in the lower bound sum V >= -B N; never derived,
    /// always supplied (0 for purely repulsive kinds).
    pub stability_b: f64,
}

/// On-disk potential description (config file schema).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: String,
    pub d: usize,
    pub sigma: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub lambda: f64,
    pub beta: f64,
    #[serde(default, rename = "stability_B")]
    pub stability_b: f64,
    #[serde(default)]
    pub table_path: Option<String>,
}

impl PairPotential {
    pub fn hard_rod(sigma: f64, beta: f64) -> Self {
        Self {
            kind: PotentialKind::HardRod,
            dimension: 1,
            sigma,
            beta,
            stability_b: 0.0,
        }
    }

    pub fn hard_sphere(sigma: f64, beta: f64) -> Self {
        Self {
            kind: PotentialKind::HardSphere,
            dimension: 3,
            sigma,
            beta,
            stability_b: 0.0,
        }
    }

    pub fn square_well(
        dimension: usize,
        sigma: f64,
        epsilon: f64,
        lambda: f64,
        beta: f64,
        stability_b: f64,
    ) -> Result<Self> {
        if lambda <= 1.0 {
            return Err(Error::Domain(format!(
                "square well width factor must exceed 1, got {lambda}"
            )));
        }
        if epsilon < 0.0 {
            return Err(Error::Domain("well depth must be non-negative".into()));
        }
        let p = Self {
            kind: PotentialKind::SquareWell { epsilon, lambda },
            dimension,
            sigma,
            beta,
            stability_b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn tabulated(
        dimension: usize,
        sigma: f64,
        beta: f64,
        stability_b: f64,
        points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("tabulated potential needs >= 2 nodes".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain(
                "tabulated nodes must be strictly increasing in r".into(),
            ));
        }
        let p = Self {
            kind: PotentialKind::Tabulated { points },
            dimension,
            sigma,
            beta,
            stability_b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_spec(spec: &PotentialSpec, table: Option<Vec<(f64, f64)>>) -> Result<Self> {
        match spec.kind.as_str() {
            "hard_rod" => Ok(Self::hard_rod(spec.sigma, spec.beta)),
            "hard_sphere" => Ok(Self::hard_sphere(spec.sigma, spec.beta)),
            "square_well" => Self::square_well(
                spec.d,
                spec.sigma,
                spec.epsilon,
                spec.lambda,
                spec.beta,
                spec.stability_b,
            ),
            "tabulated" => {
                let points = table.ok_or_else(|| {
                    Error::Config("tabulated potential requires table data".into())
                })?;
                Self::tabulated(spec.d, spec.sigma, spec.beta, spec.stability_b, points)
            }
            other => Err(Error::Config(format!("unknown potential kind '{other}'"))),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 3 {
            return Err(Error::Domain(format!(
                "only dimensions 1 and 3 are supported, got {}",
                self.dimension
            )));
        }
        if self.sigma <= 0.0 || self.beta <= 0.0 {
            return Err(Error::Domain("sigma and beta must be positive".into()));
        }
        if self.stability_b < 0.0 {
            return Err(Error::Domain("stability constant must be >= 0".into()));
        }
        match self.kind {
            PotentialKind::HardRod if self.dimension != 1 => {
                Err(Error::Domain("hard rods live in d = 1".into()))
            }
            PotentialKind::HardSphere if self.dimension != 3 => {
                Err(Error::Domain("hard spheres live in d = 3".into()))
            }
            _ => Ok(()),
        }
    }

    /// V(r) at radial separation r >= 0; infinity on the hard core.
    pub fn v(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.kind {
            PotentialKind::HardRod | PotentialKind::HardSphere => {
                if r < self.sigma {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PotentialKind::SquareWell { epsilon, lambda } => {
                if r < self.sigma {
                    f64::INFINITY
                } else if r < lambda * self.sigma {
                    -epsilon
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated { points } => {
                let last = points[points.len() - 1];
                if r >= last.0 {
                    return 0.0;
                }
                let first = points[0];
                if r <= first.0 {
                    return first.1;
                }
                let i = points.partition_point(|p| p.0 <= r) - 1;
                let (r0, v0) = points[i];
                let (r1, v1) = points[i + 1];
                v0 + (v1 - v0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Mayer's f-function: exp(-beta V(r)) - 1, in [-1, exp(beta*eps) - 1].
    #[inline]
    pub fn mayer_f(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::HardRod | PotentialKind::HardSphere => {
                if r.abs() < self.sigma {
                    -1.0
                } else {
                    0.0
                }
            }
            PotentialKind::SquareWell { epsilon, lambda } => {
                let r = r.abs();
                if r < self.sigma {
                    -1.0
                } else if r < lambda * self.sigma {
                    (self.beta * epsilon).exp() - 1.0
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated { .. } => {
                let v = self.v(r);
                if v.is_infinite() {
                    -1.0
                } else {
                    (-self.beta * v).exp_m1()
                }
            }
        }
    }

    /// Radius beyond which f vanishes identically.
    pub fn interaction_range(&self) -> f64 {
        match &self.kind {
            PotentialKind::HardRod | PotentialKind::HardSphere => self.sigma,
            PotentialKind::SquareWell { lambda, .. } => lambda * self.sigma,
            PotentialKind::Tabulated { points } => points[points.len() - 1].0,
        }
    }

    /// C(beta) = integral of |exp(-beta V) - 1| over R^d, analytic route for
    /// the closed-form kinds, adaptive quadrature for tabulated potentials.
    pub fn c_beta(&self) -> Result<f64> {
        match &self.kind {
            PotentialKind::HardRod => Ok(2.0 * self.sigma),
            PotentialKind::HardSphere => Ok(4.0 / 3.0 * PI * self.sigma.powi(3)),
            PotentialKind::SquareWell { epsilon, lambda } => {
                let amp = (self.beta * epsilon).exp() - 1.0;
                let s = self.sigma;
                Ok(match self.dimension {
                    1 => 2.0 * s + amp * 2.0 * (lambda * s - s),
                    _ => {
                        4.0 / 3.0 * PI * s.powi(3)
                            + amp * 4.0 / 3.0 * PI * ((lambda * s).powi(3) - s.powi(3))
                    }
                })
            }
            PotentialKind::Tabulated { .. } => self.c_beta_quadrature(),
        }
    }

    /// Quadrature route for C(beta): adaptive Simpson on |f(r)| with the
    /// radial measure, split at the potential's breakpoints.
    pub fn c_beta_quadrature(&self) -> Result<f64> {
        let weight = |r: f64| match self.dimension {
            1 => 2.0,
            _ => 4.0 * PI * r * r,
        };
        let integrand = |r: f64| self.mayer_f(r).abs() * weight(r);
        let mut breaks: Vec<f64> = vec![0.0];
        match &self.kind {
            PotentialKind::HardRod | PotentialKind::HardSphere => breaks.push(self.sigma),
            PotentialKind::SquareWell { lambda, .. } => {
                breaks.push(self.sigma);
                breaks.push(lambda * self.sigma);
            }
            PotentialKind::Tabulated { points } => {
                breaks.extend(points.iter().map(|p| p.0).filter(|&r| r > 0.0))
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut total = 0.0;
        for w in breaks.windows(2) {
            total += adaptive_simpson(&integrand, w[0], w[1], C_BETA_TOL)?;
        }
        Ok(total)
    }
}

/// Adaptive Simpson quadrature with the usual 1/15 error estimate. Endpoint
/// samples are nudged infinitesimally inward so panels bounded by jump
/// discontinuities of the integrand see the correct one-sided limits.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> std::result::Result<f64, f64> {
        let m = 0.5 * (a + b);
        let flm = f(0.5 * (a + m));
        let frm = f(0.5 * (m + b));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = (left + right - whole) / 15.0;
        if err.abs() <= tol {
            return Ok(left + right + err);
        }
        if depth == 0 {
            return Err(err.abs());
        }
        // Floor the halved tolerance at roundoff level so deep subdivisions
        // are not asked for more accuracy than f64 arithmetic can deliver.
        let half = (tol / 2.0).max(f64::EPSILON * whole.abs());
        Ok(step(f, a, m, fa, flm, fm, left, half, depth - 1)?
            + step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
    }
    if b <= a {
        return Ok(0.0);
    }
    let nudge = (b - a) * 5e-15;
    let fa = f(a + nudge);
    let fb = f(b - nudge);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = whole.abs().max(1e-300);
    step(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48).map_err(|achieved| Error::Numerical {
        context: "adaptive Simpson quadrature for C(beta)",
        achieved,
        wanted: rel_tol * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mayer_f_hard_sphere() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        assert_eq!(p.mayer_f(0.5), -1.0);
        assert_eq!(p.mayer_f(1.5), 0.0);
    }

    #[test]
    fn mayer_f_square_well() {
        let p = PairPotential::square_well(3, 1.0, 0.5, 1.5, 2.0, 1.0).unwrap();
        assert_eq!(p.mayer_f(0.9), -1.0);
        assert!((p.mayer_f(1.2) - (1.0f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(p.mayer_f(1.6), 0.0);
    }

    #[test]
    fn mayer_f_bounded_below() {
        let p = PairPotential::square_well(3, 1.0, 1.0, 1.8, 1.5, 1.0).unwrap();
        for i in 0..200 {
            let r = i as f64 * 0.02;
            assert!(p.mayer_f(r) >= -1.0);
        }
    }

    #[test]
    fn c_beta_hard_core() {
        let p = PairPotential::hard_sphere(2.0, 1.0);
        assert!((p.c_beta().unwrap() - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
        let p = PairPotential::hard_rod(1.5, 1.0);
        assert!((p.c_beta().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn c_beta_square_well_matches_quadrature() {
        let p = PairPotential::square_well(3, 1.0, 0.7, 1.5, 1.3, 1.0).unwrap();
        let analytic = p.c_beta().unwrap();
        let quad = p.c_beta_quadrature().unwrap();
        assert!(
            ((analytic - quad) / analytic).abs() < 1e-9,
            "{analytic} vs {quad}"
        );
    }

    #[test]
    fn c_beta_quadrature_agrees_on_hard_cores() {
        for p in [
            PairPotential::hard_sphere(1.0, 1.0),
            PairPotential::hard_rod(1.0, 1.0),
        ] {
            let a = p.c_beta().unwrap();
            let q = p.c_beta_quadrature().unwrap();
            assert!(((a - q) / a).abs() < 1e-9);
        }
    }

    #[test]
    fn tabulated_interpolation_and_cutoff() {
        let p =
            PairPotential::tabulated(3, 1.0, 1.0, 0.0, vec![(0.0, 2.0), (1.0, 0.5), (2.0, 0.0)])
                .unwrap();
        assert!((p.v(0.5) - 1.25).abs() < 1e-15);
        assert_eq!(p.v(3.0), 0.0);
        assert!(p.c_beta().unwrap() > 0.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(PairPotential::square_well(3, 1.0, 0.5, 0.9, 1.0, 0.0).is_err());
        assert!(PairPotential::square_well(2, 1.0, 0.5, 1.5, 1.0, 0.0).is_err());
        assert!(PairPotential::tabulated(1, 1.0, 1.0, 0.0, vec![(0.0, 1.0)]).is_err());
    }
}
