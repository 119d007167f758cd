//! Percus-Yevick closure solver on a radial grid, with the t-form
//! cross-check, the error-order fit against the truncated density series,
//! and the closure-defect diagnostic.

use crate::error::{Error, Result};
use crate::expansion::{h_coefficient, sub_seed, CoefficientTable, Normalization, Target};
use crate::mc::McConfig;
use crate::potential::PairPotential;
use crate::radial::{Convolver, RadialFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Guard against runaway Picard iterates before declaring divergence.
const BLOWUP: f64 = 1e8;

/// Damped Picard settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PyConfig {
    /// Picard damping fraction in (0, 1].
    pub mixing: f64,
    /// Sup-norm change per iteration at which the fixed point is accepted.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PyConfig {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Converged closure fields on a shared grid. Post-convergence algebra:
/// h = c + t, g = e^{-beta V} y and y = 1 + t + d at every node, with
/// d == 0 (hence m == 0) in the plain Percus-Yevick branch.
#[derive(Debug, Clone)]
pub struct ClosureFields {
    pub rho: f64,
    /// Indirect correlation t = c * h.
    pub t: RadialFunction,
    /// Cavity function y = 1 + t + d.
    pub y: RadialFunction,
    /// Closure defect; identically zero here, pluggable for improved schemes.
    pub d: RadialFunction,
    /// Defect in c-form, m = e^{-beta V} d.
    pub m: RadialFunction,
    /// Direct correlation c = f y + m.
    pub c: RadialFunction,
    pub h: RadialFunction,
    pub g: RadialFunction,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PyDiagnostics {
    pub iterations: usize,
    /// Sup-norm residual of the fixed-point equation at the returned y.
    pub residual: f64,
    /// Sup-norm gap between the y-form and t-form solutions of the same
    /// discrete equation; a free consistency check.
    pub t_form_gap: f64,
}

fn check_config(cfg: &PyConfig) -> Result<()> {
    if !(cfg.mixing > 0.0 && cfg.mixing <= 1.0) {
        return Err(Error::Config("mixing must lie in (0, 1]".into()));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Config("tol must be positive".into()));
    }
    Ok(())
}

fn sup_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Damped Picard iteration x <- x + mixing (phi(x) - x); returns the iterate
/// together with the last fixed-point residual and the iteration count.
fn picard(
    mut x: Vec<f64>,
    phi: impl Fn(&[f64]) -> Result<Vec<f64>>,
    cfg: &PyConfig,
    divergence_probe: impl Fn(&[f64]) -> f64,
) -> Result<(Vec<f64>, f64, usize)> {
    for it in 1..=cfg.max_iter {
        let next = phi(&x)?;
        let delta = sup_change(&next, &x);
        for (xv, nv) in x.iter_mut().zip(&next) {
            *xv += cfg.mixing * (*nv - *xv);
        }
        let sup = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !sup.is_finite() || sup > BLOWUP {
            return Err(Error::Divergence {
                min_denominator: divergence_probe(&next),
            });
        }
        if delta < cfg.tol {
            return Ok((x, delta, it));
        }
        if it == cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: delta,
            });
        }
    }
    unreachable!("max_iter is at least 1")
}

/// Solve the Percus-Yevick closure at density `rho` on a uniform grid of `n`
/// points spaced `dr`, by damped Picard iteration of the cavity form
///
///   y = 1 + (f y) * (e^{-beta V} y - 1),
///
/// where * is the density-weighted convolution rho Int a(r') b(r - r') dr'.
/// The algebraically equivalent t-form t = (f (1+t)) * (f (1+t) + t) is
/// solved independently and both iterates must land on the same fixed point.
///
/// Accuracy note: sampled hard-core discontinuities convolve most accurately
/// when the jump radii fall between grid nodes; pick `dr` so that sigma is
/// not a multiple of it.
pub fn py_solve(
    p: &PairPotential,
    rho: f64,
    dr: f64,
    n: usize,
    cfg: &PyConfig,
) -> Result<(ClosureFields, PyDiagnostics)> {
    check_config(cfg)?;
    if rho < 0.0 {
        return Err(Error::Domain("density must be non-negative".into()));
    }
    let f_grid = RadialFunction::from_fn(dr, p.dimension, n, |r| p.mayer_f(r))?;
    let e_grid = RadialFunction::from_fn(dr, p.dimension, n, |r| 1.0 + p.mayer_f(r))?;
    let convolver = Convolver::new(&f_grid);

    let wrap = |values: Vec<f64>| RadialFunction {
        dr,
        dimension: p.dimension,
        values,
    };
    // min |1 - rho c_hat| of the current direct-correlation estimate, for
    // the density-too-high report.
    let denominator_probe = |y: &[f64]| {
        let c = wrap(f_grid.values.iter().zip(y).map(|(f, yv)| f * yv).collect());
        convolver
            .forward(&c)
            .iter()
            .skip(usize::from(p.dimension == 3))
            .map(|ch| (1.0 - rho * ch).abs())
            .fold(f64::INFINITY, f64::min)
    };

    let y_step = |y: &[f64]| -> Result<Vec<f64>> {
        let a = wrap(f_grid.values.iter().zip(y).map(|(f, yv)| f * yv).collect());
        let b = wrap(
            e_grid
                .values
                .iter()
                .zip(y)
                .map(|(e, yv)| e * yv - 1.0)
                .collect(),
        );
        let conv = convolver.convolve(&a, &b, rho)?;
        Ok(conv.values.iter().map(|v| 1.0 + v).collect())
    };
    let (y, residual, iterations) = picard(vec![1.0; n], y_step, cfg, denominator_probe)?;

    let t_step = |t: &[f64]| -> Result<Vec<f64>> {
        let c = wrap(
            f_grid
                .values
                .iter()
                .zip(t)
                .map(|(f, tv)| f * (1.0 + tv))
                .collect(),
        );
        let ct = wrap(c.values.iter().zip(t).map(|(cv, tv)| cv + tv).collect());
        Ok(convolver.convolve(&c, &ct, rho)?.values)
    };
    let (t_cross, _, _) = picard(vec![0.0; n], t_step, cfg, denominator_probe)?;
    let t_form_gap = y
        .iter()
        .zip(&t_cross)
        .map(|(yv, tv)| (yv - 1.0 - tv).abs())
        .fold(0.0, f64::max);
    if t_form_gap > 10.0 * cfg.tol {
        return Err(Error::Numerical {
            context: "y-form / t-form cross-check",
            achieved: t_form_gap,
            wanted: 10.0 * cfg.tol,
        });
    }

    let t = wrap(y.iter().map(|yv| yv - 1.0).collect());
    let c = wrap(f_grid.values.iter().zip(&y).map(|(f, yv)| f * yv).collect());
    let h = wrap(c.values.iter().zip(&t.values).map(|(cv, tv)| cv + tv).collect());
    let g = wrap(e_grid.values.iter().zip(&y).map(|(e, yv)| e * yv).collect());
    let zeros = f_grid.zeros_like();
    Ok((
        ClosureFields {
            rho,
            t,
            y: wrap(y),
            d: zeros.clone(),
            m: zeros,
            c,
            h,
            g,
        },
        PyDiagnostics {
            iterations,
            residual,
            t_form_gap,
        },
    ))
}

/// One point of the error-order sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub rho: f64,
    /// Sup-norm over the anchors of h_PY - truncated h-series.
    pub error: f64,
    /// Propagated statistical error of the truncated series at this density.
    pub series_std_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorOrderFit {
    pub points: Vec<ErrorPoint>,
    /// Least-squares slope of log error vs log density.
    pub slope: f64,
    /// Standard error of the slope from the fit residuals.
    pub slope_std_error: f64,
}

/// Quantify the density order of the Percus-Yevick error: solve the closure
/// at each density, subtract the order-`k_series` truncated h-series at the
/// anchor separations, and fit the log-log slope of the sup-norm difference.
/// Anchors must be aligned with the grid.
pub fn py_error_order(
    p: &PairPotential,
    rho_list: &[f64],
    k_series: usize,
    anchors: &[f64],
    dr: f64,
    n: usize,
    mc: &McConfig,
    cfg: &PyConfig,
) -> Result<ErrorOrderFit> {
    if rho_list.len() < 3 {
        return Err(Error::Domain(
            "error-order fit needs at least 3 densities".into(),
        ));
    }
    if k_series < 2 {
        return Err(Error::Domain("series order must be at least 2".into()));
    }
    if rho_list.iter().any(|&r| r <= 0.0) {
        return Err(Error::Domain("densities must be positive".into()));
    }
    if anchors.is_empty() {
        return Err(Error::Domain("need at least one anchor".into()));
    }
    let nodes: Vec<usize> = anchors
        .iter()
        .map(|&r| {
            let j = (r / dr).round() as usize;
            if (j as f64 * dr - r).abs() > 1e-9 * dr.max(r) || j >= n {
                return Err(Error::Domain(format!(
                    "anchor {r} is not aligned with the grid"
                )));
            }
            Ok(j)
        })
        .collect::<Result<_>>()?;

    // Density-independent series coefficients h_k(r_i), computed once.
    let coeffs: Vec<Vec<(f64, f64)>> = (0..=k_series)
        .map(|k| {
            anchors
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let pts = [[0.0; 3], [r, 0.0, 0.0]];
                    let mut sub = mc.clone();
                    sub.seed = sub_seed(mc.seed, 0xB700_0000 ^ ((k as u64) << 32 | i as u64));
                    let est =
                        h_coefficient(2, k, &pts, p, &sub, Normalization::OzConsistent)?;
                    Ok((est.value, est.std_error))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let points: Vec<ErrorPoint> = rho_list
        .par_iter()
        .map(|&rho| {
            let (fields, _) = py_solve(p, rho, dr, n, cfg)?;
            let mut err = 0.0f64;
            let mut var = 0.0f64;
            for (i, &j) in nodes.iter().enumerate() {
                let mut series = 0.0;
                let mut sigma2 = 0.0;
                for (k, row) in coeffs.iter().enumerate() {
                    let w = rho.powi(k as i32);
                    series += w * row[i].0;
                    sigma2 += (w * row[i].1).powi(2);
                }
                let e = (fields.h.values[j] - series).abs();
                if e > err {
                    err = e;
                    var = sigma2;
                }
            }
            Ok(ErrorPoint {
                rho,
                error: err,
                series_std_error: var.sqrt(),
            })
        })
        .collect::<Result<_>>()?;

    let (slope, slope_std_error) = log_log_slope(&points)?;
    Ok(ErrorOrderFit {
        points,
        slope,
        slope_std_error,
    })
}

fn log_log_slope(points: &[ErrorPoint]) -> Result<(f64, f64)> {
    if points.iter().any(|p| p.error <= 0.0) {
        return Err(Error::Domain(
            "zero error point: log-log fit undefined".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.rho.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("densities must be distinct".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = (points.len().max(3) - 2) as f64;
    Ok((slope, (ss_res / dof / sxx).sqrt()))
}

/// One tabulated value of the closure defect m(r).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DefectPoint {
    pub r: f64,
    pub m: f64,
    /// Statistical error of the truncated series entering m.
    pub std_error: f64,
}

/// Closure defect m(r) = c_series(r) - f(r)(1 + t(r)) at the separations of
/// a direct-correlation coefficient table, with t taken from a converged
/// solve (linearly interpolated between grid nodes).
pub fn closure_defect(
    fields: &ClosureFields,
    table: &CoefficientTable,
    rho: f64,
    p: &PairPotential,
) -> Result<Vec<DefectPoint>> {
    if table.target != Target::C2 {
        return Err(Error::Domain(
            "closure defect needs a direct-correlation table".into(),
        ));
    }
    let t = &fields.t;
    let rmax = t.r(t.n_points() - 1);
    let radii: Vec<f64> = table
        .entries
        .first()
        .map(|e| e.values.iter().map(|&(r, _)| r).collect())
        .unwrap_or_default();
    let mut out = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        if r > rmax {
            return Err(Error::Domain(format!(
                "separation {r} lies outside the solved grid"
            )));
        }
        let mut c_series = 0.0;
        let mut var = 0.0;
        for entry in &table.entries {
            let (er, est) = &entry.values[i];
            if (er - r).abs() > 1e-9 * r.max(1.0) {
                return Err(Error::Domain(
                    "coefficient table entries disagree on separations".into(),
                ));
            }
            let w = rho.powi(entry.k as i32);
            c_series += w * est.value;
            var += (w * est.std_error).powi(2);
        }
        // Linear interpolation of t between the bracketing nodes.
        let x = r / t.dr;
        let j = (x.floor() as usize).min(t.n_points() - 2);
        let frac = x - j as f64;
        let t_r = t.values[j] * (1.0 - frac) + t.values[j + 1] * frac;
        out.push(DefectPoint {
            r,
            m: c_series - p.mayer_f(r) * (1.0 + t_r),
            std_error: var.sqrt(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::c2_table;
    use crate::reference::{py_hard_sphere_c, tonks_g};
    use std::f64::consts::PI;

    #[test]
    fn zero_density_is_trivial() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let dr = 1.0 / 64.5;
        let (fields, diag) = py_solve(&p, 0.0, dr, 256, &PyConfig::default()).unwrap();
        assert!(fields.t.sup_norm() == 0.0);
        for j in 0..256 {
            let r = j as f64 * dr;
            assert_eq!(fields.g.values[j], 1.0 + p.mayer_f(r));
        }
        assert!(diag.residual < 1e-10);
    }

    #[test]
    fn post_convergence_algebra() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let (fields, diag) = py_solve(&p, 0.2, 1.0 / 64.5, 512, &PyConfig::default()).unwrap();
        for j in 0..512 {
            let hv = fields.c.values[j] + fields.t.values[j];
            assert!((fields.h.values[j] - hv).abs() < 1e-14);
            let r = fields.g.r(j);
            if r < p.sigma {
                assert_eq!(fields.g.values[j], 0.0, "hard-core exactness at r = {r}");
            }
        }
        assert!(diag.t_form_gap <= 1e-9);
    }

    #[test]
    fn tonks_pair_correlation() {
        let p = PairPotential::hard_rod(1.0, 1.0);
        let rho = 0.3;
        let dr = 1.0 / 128.5;
        let n = 2048;
        let (fields, _) = py_solve(&p, rho, dr, n, &PyConfig::default()).unwrap();
        let mut worst = 0.0f64;
        for j in 0..n {
            let r = fields.g.r(j);
            if r <= p.sigma + dr || r > 10.0 {
                continue;
            }
            let exact = tonks_g(r, rho, p.sigma).unwrap();
            worst = worst.max((fields.g.values[j] - exact).abs());
        }
        assert!(worst < 5e-3, "sup gap {worst}");
    }

    #[test]
    fn wertheim_direct_correlation() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let eta = 0.1;
        let rho = 6.0 * eta / PI;
        let dr = 1.0 / 128.5;
        let n = 1024;
        let (fields, _) = py_solve(&p, rho, dr, n, &PyConfig::default()).unwrap();
        let mut worst = 0.0f64;
        for j in 0..n {
            let r = fields.c.r(j);
            let reference = py_hard_sphere_c(r, eta, p.sigma).unwrap();
            worst = worst.max((fields.c.values[j] - reference).abs());
        }
        assert!(worst < 2e-3, "sup gap {worst}");
    }

    #[test]
    fn defect_vanishes_at_zero_density() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let (fields, _) = py_solve(&p, 0.0, 1.0 / 32.5, 256, &PyConfig::default()).unwrap();
        let mc = McConfig {
            n_samples: 20_000,
            ..McConfig::default()
        };
        let table = c2_table(1, &[0.4, 1.4, 2.2], &p, &mc).unwrap();
        for pt in closure_defect(&fields, &table, 0.0, &p).unwrap() {
            assert_eq!(pt.m, 0.0, "r = {}", pt.r);
        }
    }

    #[test]
    fn config_and_domain_errors() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let bad = PyConfig {
            mixing: 0.0,
            ..PyConfig::default()
        };
        assert!(py_solve(&p, 0.1, 0.01, 256, &bad).is_err());
        assert!(py_solve(&p, -0.1, 0.01, 256, &PyConfig::default()).is_err());
        let mc = McConfig::default();
        let err = py_error_order(
            &p,
            &[0.1],
            2,
            &[1.5],
            1.0 / 64.0,
            256,
            &mc,
            &PyConfig::default(),
        );
        assert!(err.is_err(), "single density must be rejected");
    }

    #[test]
    fn nonconvergence_reported() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let cfg = PyConfig {
            max_iter: 2,
            ..PyConfig::default()
        };
        match py_solve(&p, 0.3, 1.0 / 64.5, 512, &cfg) {
            Err(Error::NonConvergence { iterations: 2, .. }) => {}
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
