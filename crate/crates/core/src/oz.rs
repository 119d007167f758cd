//! Ornstein-Zernike checks and solver: the order-by-order residual identity
//! between the correlation and direct-correlation series, its combinatorial
//! census shadow, and the grid solver h_hat = c_hat / (1 - rho c_hat).

use crate::error::{Error, Result};
use crate::expansion::{c2_coefficient, h_coefficient, sub_seed, Normalization, Target};
use crate::graph::{count, GraphClass, DEFAULT_ENUM_CAP};
use crate::integrate::MayerEstimate;
use crate::mc::McConfig;
use crate::potential::{PairPotential, PotentialKind};
use crate::radial::{Convolver, RadialFunction};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Minimum allowed |1 - rho c_hat| before the solver refuses.
const DENOMINATOR_FLOOR: f64 = 1e-6;
/// A-posteriori grid residual bound for oz_solve_h.
const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Both sides of the labeled-graph census identity behind the OZ split: an
/// articulation-free graph is either 2-connected or splits at its first nodal
/// vertex into a 2-connected piece and an articulation-free remainder, so
/// |B^AF_{2,2+k}| = |B_{2,2+k}| + k sum over l1 + l2 = k - 1 of
/// C(k-1, l1) |B_{2,2+l1}| |B^AF_{2,2+l2}|, the leading k counting the label
/// of the shared nodal vertex (absorbed by the 1/k! in the analytic series).
pub fn oz_census_identity(k: usize) -> Result<(usize, usize)> {
    let lhs = count(2, k, GraphClass::ArticulationFree, DEFAULT_ENUM_CAP)?;
    let mut rhs = count(2, k, GraphClass::TwoConnected, DEFAULT_ENUM_CAP)?;
    if k >= 1 {
        for l1 in 0..=(k - 1) {
            let l2 = k - 1 - l1;
            rhs += k * binomial(k - 1, l1)
                * count(2, l1, GraphClass::TwoConnected, DEFAULT_ENUM_CAP)?
                * count(2, l2, GraphClass::ArticulationFree, DEFAULT_ENUM_CAP)?;
        }
    }
    Ok((lhs, rhs))
}

/// Pair-coefficient estimate at one separation, routed through zeta_bullet.
fn coeff_at(
    target: Target,
    k: usize,
    r: f64,
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<MayerEstimate> {
    let anchors = [[0.0; 3], [r, 0.0, 0.0]];
    match target {
        Target::H2 => h_coefficient(2, k, &anchors, p, cfg, Normalization::OzConsistent),
        Target::C2 => c2_coefficient(k, &anchors, p, cfg),
        Target::Virial => Err(Error::Domain("virial target has no pair grid".into())),
    }
}

/// Radii at which the Mayer function jumps (grid nodes placed there get the
/// mean of the one-sided limits, removing O(dr) smearing of hard edges).
fn jump_radii(p: &PairPotential) -> Vec<f64> {
    match &p.kind {
        PotentialKind::HardRod | PotentialKind::HardSphere => vec![p.sigma],
        PotentialKind::SquareWell { lambda, .. } => vec![p.sigma, lambda * p.sigma],
        PotentialKind::Tabulated { .. } => vec![],
    }
}

/// Tabulate one pair-coefficient function on a uniform radial grid, with the
/// split-node (mean of limits) convention at the Mayer jumps.
pub fn pair_coefficient_grid(
    target: Target,
    k: usize,
    dr: f64,
    n: usize,
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<RadialFunction> {
    let jumps = jump_radii(p);
    let eps = dr * 1e-6;
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let r = j as f64 * dr;
        let mut sub_cfg = cfg.clone();
        sub_cfg.seed = sub_seed(cfg.seed, 0xA000_0000 + j as u64);
        let at_jump = jumps.iter().any(|&q| (r - q).abs() < dr / 2.0);
        let v = if at_jump {
            let lo = coeff_at(target, k, r - eps, p, &sub_cfg)?.value;
            let hi = coeff_at(target, k, r + eps, p, &sub_cfg)?.value;
            0.5 * (lo + hi)
        } else {
            coeff_at(target, k, r, p, &sub_cfg)?.value
        };
        values.push(v);
    }
    RadialFunction::new(dr, p.dimension, values)
}

/// Closed-form pair coefficient: value function, radii of its jumps/kinks,
/// and the support radius beyond which it vanishes.
struct AnalyticCoeff {
    f: Box<dyn Fn(f64) -> f64 + Sync>,
    breaks: Vec<f64>,
    support: f64,
}

/// Closed forms exist for order 0 (any potential: the Mayer function) and
/// order 1 of the hard-core kinds (path and triangle graphs reduce to core
/// overlap volumes).
fn analytic_coeff(target: Target, k: usize, p: &PairPotential) -> Option<AnalyticCoeff> {
    use crate::integrate::{rod_overlap, sphere_overlap};
    let sigma = p.sigma;
    match k {
        0 => {
            let q = p.clone();
            Some(AnalyticCoeff {
                f: Box::new(move |r| q.mayer_f(r)),
                breaks: jump_radii(p),
                support: p.interaction_range(),
            })
        }
        1 if matches!(p.kind, PotentialKind::HardRod | PotentialKind::HardSphere) => {
            let overlap: Box<dyn Fn(f64) -> f64 + Sync> = match p.kind {
                PotentialKind::HardRod => Box::new(move |r| rod_overlap(sigma, r)),
                _ => Box::new(move |r| sphere_overlap(sigma, r)),
            };
            let f = match target {
                // Triangle: f(r) times the overlap volume.
                Target::C2 => Box::new(move |r: f64| {
                    if r < sigma {
                        -overlap(r)
                    } else {
                        0.0
                    }
                }) as Box<dyn Fn(f64) -> f64 + Sync>,
                // Path plus triangle: overlap times (1 + f) = overlap outside
                // the core, zero inside.
                Target::H2 => Box::new(move |r: f64| {
                    if r < sigma {
                        0.0
                    } else {
                        overlap(r)
                    }
                }),
                Target::Virial => return None,
            };
            Some(AnalyticCoeff {
                f,
                breaks: vec![sigma, 2.0 * sigma],
                support: 2.0 * sigma,
            })
        }
        _ => None,
    }
}

/// Best-effort adaptive Simpson with absolute tolerance; integrands here are
/// piecewise polynomial between the supplied breakpoints, so convergence is
/// immediate once the pieces are isolated.
fn simpson_abs(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m));
    let frm = f(0.5 * (m + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = (left + right - whole) / 15.0;
    if err.abs() <= tol || depth == 0 {
        return left + right + err;
    }
    simpson_abs(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
        + simpson_abs(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
}

/// Integrate over [lo, hi] splitting at the given breakpoints, with endpoint
/// samples nudged inward so jumps on breakpoints see one-sided limits.
fn integrate_pieces(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut pts: Vec<f64> = vec![lo, hi];
    pts.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-14 {
            continue;
        }
        let nudge = (b - a) * 5e-15;
        let fa = f(a + nudge);
        let fb = f(b - nudge);
        let fm = f(0.5 * (a + b));
        total += simpson_abs(f, a, b, fa, fm, fb, tol * (b - a) / (hi - lo), 40);
    }
    total
}

/// (a * b)(r) over R^d for radially symmetric factors, by quadrature of the
/// reduced one-dimensional integrals.
fn conv_quad(a: &AnalyticCoeff, b: &AnalyticCoeff, r: f64, d: usize) -> f64 {
    let tol = 1e-11;
    let amax = a.support;
    // Outer breakpoints: kinks of a, plus pre-images of b's kinks under
    // s -> |r - s| and s -> r + s.
    let mut outer_breaks: Vec<f64> = a.breaks.clone();
    outer_breaks.push(r);
    for &tb in b.breaks.iter().chain(std::iter::once(&b.support)) {
        outer_breaks.push(r + tb);
        outer_breaks.push(r - tb);
        outer_breaks.push(tb - r);
    }
    match d {
        1 => {
            let g = |s: f64| (a.f)(s) * ((b.f)((r - s).abs()) + (b.f)(r + s));
            integrate_pieces(&g, 0.0, amax, &outer_breaks, tol)
        }
        _ => {
            if r < 1e-12 {
                let g = |s: f64| s * s * (a.f)(s) * (b.f)(s);
                let mut br = a.breaks.clone();
                br.extend_from_slice(&b.breaks);
                return 4.0 * PI * integrate_pieces(&g, 0.0, amax.min(b.support), &br, tol);
            }
            let bmax = b.support;
            let inner = |x: f64, y: f64| {
                let h = |t: f64| t * (b.f)(t);
                integrate_pieces(&h, x.max(0.0), y.min(bmax), &b.breaks, tol)
            };
            let g = |s: f64| s * (a.f)(s) * inner((r - s).abs(), r + s);
            2.0 * PI / r * integrate_pieces(&g, 0.0, amax, &outer_breaks, tol)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OzResidual {
    pub r: f64,
    pub residual: f64,
    /// Propagated statistical error of the h_k and c_k estimates.
    pub std_error: f64,
}

/// Order-k OZ residual h_k - c_k - sum_{l<k} (c_l * h_{k-1-l}) at the given
/// anchor separations; the convolution runs on a grid of `n` points spaced
/// `dr`, to which the anchors must be aligned.
pub fn oz_order_check(
    k: usize,
    anchors: &[f64],
    dr: f64,
    n: usize,
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<Vec<OzResidual>> {
    let anchor_nodes: Vec<usize> = anchors
        .iter()
        .map(|&r| {
            let j = (r / dr).round() as usize;
            if (r - j as f64 * dr).abs() > 1e-9 * dr.max(1.0) || j >= n {
                Err(Error::Domain(format!(
                    "anchor {r} is not a node of the convolution grid"
                )))
            } else {
                Ok(j)
            }
        })
        .collect::<Result<_>>()?;

    // Convolution term: quadrature over closed forms when every factor has
    // one (accurate to ~1e-10), else spectral convolution on the grid.
    let mut conv_at_anchor = vec![0.0f64; anchors.len()];
    if k >= 1 {
        let pairs: Option<Vec<(AnalyticCoeff, AnalyticCoeff)>> = (0..k)
            .map(|l| {
                Some((
                    analytic_coeff(Target::C2, l, p)?,
                    analytic_coeff(Target::H2, k - 1 - l, p)?,
                ))
            })
            .collect();
        match pairs {
            Some(pairs) => {
                for (ai, &r) in anchors.iter().enumerate() {
                    conv_at_anchor[ai] = pairs
                        .iter()
                        .map(|(a, b)| conv_quad(a, b, r, p.dimension))
                        .sum();
                }
            }
            None => {
                let template = RadialFunction::new(dr, p.dimension, vec![0.0; n])?;
                let convolver = Convolver::new(&template);
                for l in 0..k {
                    let mut c_cfg = cfg.clone();
                    c_cfg.seed = sub_seed(cfg.seed, 0xC000_0000 + l as u64);
                    let c_l = pair_coefficient_grid(Target::C2, l, dr, n, p, &c_cfg)?;
                    let mut h_cfg = cfg.clone();
                    h_cfg.seed = sub_seed(cfg.seed, 0xD000_0000 + (k - 1 - l) as u64);
                    let h_j = pair_coefficient_grid(Target::H2, k - 1 - l, dr, n, p, &h_cfg)?;
                    let term = convolver.convolve(&c_l, &h_j, 1.0)?;
                    for (ai, &j) in anchor_nodes.iter().enumerate() {
                        conv_at_anchor[ai] += term.values[j];
                    }
                }
            }
        }
    }

    let mut out = Vec::with_capacity(anchors.len());
    for (ai, (&r, &j)) in anchors.iter().zip(&anchor_nodes).enumerate() {
        let mut h_cfg = cfg.clone();
        h_cfg.seed = sub_seed(cfg.seed, 0xE000_0000 + j as u64);
        let h_k = coeff_at(Target::H2, k, r, p, &h_cfg)?;
        let mut c_cfg = cfg.clone();
        c_cfg.seed = sub_seed(cfg.seed, 0xF000_0000 + j as u64);
        let c_k = coeff_at(Target::C2, k, r, p, &c_cfg)?;
        out.push(OzResidual {
            r,
            residual: h_k.value - c_k.value - conv_at_anchor[ai],
            std_error: (h_k.std_error.powi(2) + c_k.std_error.powi(2)).sqrt(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OzSolveReport {
    pub residual_sup: f64,
    pub min_denominator: f64,
}

/// Solve h = c + rho c*h on the grid of `c` through the transform identity
/// h_hat = c_hat / (1 - rho c_hat), with an a-posteriori residual check.
pub fn oz_solve_h(c: &RadialFunction, rho: f64) -> Result<(RadialFunction, OzSolveReport)> {
    let convolver = Convolver::new(c);
    let c_hat = convolver.forward(c);
    let used: Box<dyn Iterator<Item = &f64>> = match c.dimension {
        1 => Box::new(c_hat.iter()),
        _ => Box::new(c_hat.iter().skip(1)),
    };
    let mut min_den = f64::INFINITY;
    for &ch in used {
        min_den = min_den.min((1.0 - rho * ch).abs());
    }
    if min_den < DENOMINATOR_FLOOR {
        return Err(Error::Divergence {
            min_denominator: min_den,
        });
    }
    let h_hat: Vec<f64> = c_hat.iter().map(|&ch| ch / (1.0 - rho * ch)).collect();
    let h = convolver.inverse(&h_hat);

    // Residual against the band-limited representation of c (identical to c
    // except for the spectral r = 0 value in d = 3).
    let c_rt = convolver.inverse(&c_hat);
    let conv = convolver.convolve(&c_rt, &h, rho)?;
    let residual_sup = h
        .values
        .iter()
        .zip(&c_rt.values)
        .zip(&conv.values)
        .map(|((hv, cv), tv)| (hv - cv - tv).abs())
        .fold(0.0, f64::max);
    if residual_sup > SOLVE_RESIDUAL_TOL {
        return Err(Error::Numerical {
            context: "OZ solve a-posteriori residual",
            achieved: residual_sup,
            wanted: SOLVE_RESIDUAL_TOL,
        });
    }
    let mut h = h;
    h.dimension = c.dimension;
    Ok((
        h,
        OzSolveReport {
            residual_sup,
            min_denominator: min_den,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_identity_low_orders() {
        // k = 1: 2 = 1 + 1.
        assert_eq!(oz_census_identity(1).unwrap(), (2, 2));
        for k in 0..=3 {
            let (lhs, rhs) = oz_census_identity(k).unwrap();
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }

    #[test]
    fn order_zero_residual_vanishes() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let dr = 1.0 / 40.0;
        let anchors = [0.0, 0.5, 1.0, 1.5];
        let res = oz_order_check(0, &anchors, dr, 256, &p, &McConfig::default()).unwrap();
        for r in res {
            assert_eq!(r.residual, 0.0);
            assert_eq!(r.std_error, 0.0);
        }
    }

    #[test]
    fn order_one_residual_small_hard_sphere() {
        // h_1, c_1 and the c_0 * h_0 convolution are all closed-form here, so
        // the residual is pure quadrature error.
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let dr = 1.0 / 120.0;
        let n = 1024;
        let anchors = [0.0, 0.5, 1.0, 1.5, 2.0];
        let res = oz_order_check(1, &anchors, dr, n, &p, &McConfig::default()).unwrap();
        for r in res {
            assert!(
                r.residual.abs() < 1e-7,
                "r = {}: residual {}",
                r.r,
                r.residual
            );
        }
    }

    #[test]
    fn order_one_residual_exact_1d() {
        let p = PairPotential::hard_rod(1.0, 1.0);
        let dr = 1.0 / 128.0;
        let anchors = [0.0, 0.25, 0.5, 1.0, 1.5];
        let res = oz_order_check(1, &anchors, dr, 1024, &p, &McConfig::default()).unwrap();
        for r in res {
            assert!(
                r.residual.abs() < 1e-7,
                "r = {}: residual {}",
                r.r,
                r.residual
            );
        }
    }

    #[test]
    fn solve_zero_and_zero_density() {
        let c = RadialFunction::from_fn(0.02, 3, 256, |_| 0.0).unwrap();
        let (h, _) = oz_solve_h(&c, 0.4).unwrap();
        assert_eq!(h.sup_norm(), 0.0);
        let c = RadialFunction::from_fn(0.02, 3, 512, |r| (-r * r).exp() * -0.5).unwrap();
        let (h, rep) = oz_solve_h(&c, 0.0).unwrap();
        assert!(h.sup_distance(&c) < 1e-10);
        assert!(rep.residual_sup <= 1e-8);
    }

    #[test]
    fn solve_reports_divergence() {
        // Large positive c_hat at kappa ~ 0 with rho sized to cross 1.
        let c = RadialFunction::from_fn(0.02, 3, 512, |r| (-r * r).exp()).unwrap();
        let hat = Convolver::new(&c).forward(&c);
        let peak = hat.iter().skip(1).cloned().fold(f64::MIN, f64::max);
        let rho = 1.0 / peak;
        match oz_solve_h(&c, rho) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn misaligned_anchor_rejected() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let res = oz_order_check(0, &[0.333], 0.25, 64, &p, &McConfig::default());
        assert!(res.is_err());
    }
}
