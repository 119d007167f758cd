//! Density-series assembly: correlation coefficients over articulation-free
//! graphs, direct-correlation coefficients over 2-connected graphs, virial
//! coefficients, the activity series and its formal-series identities.

use crate::error::{Error, Result};
use crate::exact1d::{hard_rod_zeta, Rat};
use crate::graph::{enumerate, iso_classes, GraphClass, DEFAULT_ENUM_CAP};
use crate::integrate::{zeta_bullet, MayerEstimate, Method};
use crate::mc::McConfig;
use crate::potential::PairPotential;
use crate::series::FormalSeries;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Which overall factor multiplies the graph-class sums.
///
/// `Literal` keeps the conventions the two series are usually written in
/// (1/(n! k!) for the h coefficients, 1/k! for the direct correlation), under
/// which their k = 0 terms disagree by 1/n!. `OzConsistent` drops the 1/n! so
/// both series start from f and satisfy the OZ identity order by order; it is
/// the default everywhere the two series meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    Literal,
    #[default]
    OzConsistent,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn factorial_rat(n: usize) -> Rat {
    let mut acc = Rat::one();
    for i in 1..=n {
        acc *= Ratio::from(BigInt::from(i as i64));
    }
    acc
}

/// Stable per-subtask seed derivation (splitmix64 over a combined index).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Sum zeta integrals over a graph class at fixed anchors, grouping by
/// black-permutation isomorphism and propagating MC errors in quadrature.
/// Independent sub-seeds per isomorphism class.
fn class_sum(
    n_white: usize,
    n_black: usize,
    class: GraphClass,
    anchors: &[[f64; 3]],
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<(MayerEstimate, usize)> {
    let graphs = enumerate(n_white, n_black, class, DEFAULT_ENUM_CAP)?;
    let count = graphs.len();
    let classes = iso_classes(&graphs)?;
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n_samples = 0;
    let mut exact = true;
    for (idx, (rep, mult)) in classes.iter().enumerate() {
        let mut sub_cfg = cfg.clone();
        sub_cfg.seed = sub_seed(cfg.seed, idx as u64);
        let est = zeta_bullet(rep, anchors, p, &sub_cfg)?;
        let m = *mult as f64;
        value += m * est.value;
        var += (m * est.std_error).powi(2);
        n_samples += est.n_samples;
        exact &= est.exact;
    }
    Ok((
        MayerEstimate {
            value,
            std_error: var.sqrt(),
            n_samples,
            method: if exact { Method::Analytic } else { Method::MonteCarlo },
            exact,
        },
        count,
    ))
}

fn scaled(est: MayerEstimate, factor: f64) -> MayerEstimate {
    MayerEstimate {
        value: est.value * factor,
        std_error: est.std_error * factor.abs(),
        ..est
    }
}

/// Order-k coefficient of the n-point correlation series at the given
/// anchors: normalized sum over articulation-free graphs with k blacks.
pub fn h_coefficient(
    n: usize,
    k: usize,
    anchors: &[[f64; 3]],
    p: &PairPotential,
    cfg: &McConfig,
    norm: Normalization,
) -> Result<MayerEstimate> {
    if n < 2 {
        return Err(Error::Domain("h coefficients need n >= 2 roots".into()));
    }
    let (est, _) = class_sum(n, k, GraphClass::ArticulationFree, anchors, p, cfg)?;
    let factor = match norm {
        Normalization::Literal => 1.0 / (factorial(n) * factorial(k)),
        Normalization::OzConsistent => 1.0 / factorial(k),
    };
    Ok(scaled(est, factor))
}

/// Order-k coefficient of the direct correlation series: (1/k!) times the
/// sum over 2-connected graphs on two whites and k blacks.
pub fn c2_coefficient(
    k: usize,
    anchors: &[[f64; 3]; 2],
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<MayerEstimate> {
    let (est, _) = class_sum(2, k, GraphClass::TwoConnected, anchors, p, cfg)?;
    Ok(scaled(est, 1.0 / factorial(k)))
}

/// Virial coefficient beta_m: (1/m!) times the sum over 2-connected graphs
/// on one white (fixed at the origin) and m blacks.
pub fn virial_beta(m: usize, p: &PairPotential, cfg: &McConfig) -> Result<MayerEstimate> {
    if m < 1 {
        return Err(Error::Domain("virial coefficients start at m = 1".into()));
    }
    let (est, _) = class_sum(1, m, GraphClass::TwoConnected, &[[0.0; 3]], p, cfg)?;
    Ok(scaled(est, 1.0 / factorial(m)))
}

/// Exact rational virial coefficient for unit hard rods (coefficient of
/// sigma^m), m <= 3.
pub fn virial_beta_exact_hard_rod(m: usize) -> Result<Rat> {
    if m < 1 {
        return Err(Error::Domain("virial coefficients start at m = 1".into()));
    }
    let graphs = enumerate(1, m, GraphClass::TwoConnected, DEFAULT_ENUM_CAP)?;
    let mut sum = Rat::zero();
    for g in &graphs {
        sum += hard_rod_zeta(g, &[Rat::zero()])?;
    }
    Ok(sum / factorial_rat(m))
}

/// The activity series rho(z)/z = sum_j a_j z^j with a_0 = 1 and
/// a_j = (1/j!) times the sum over connected graphs on one white root and j
/// blacks (the root marking absorbs a factor j + 1 against the 1/(j+1)!).
pub fn activity_series(
    order: usize,
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<(FormalSeries<f64>, Vec<MayerEstimate>)> {
    let mut coeffs = vec![1.0f64];
    let mut ests = vec![MayerEstimate::exact(1.0)];
    for j in 1..=order {
        let mut sub_cfg = cfg.clone();
        sub_cfg.seed = sub_seed(cfg.seed, 1000 + j as u64);
        let (est, _) = class_sum(1, j, GraphClass::Connected, &[[0.0; 3]], p, &sub_cfg)?;
        let est = scaled(est, 1.0 / factorial(j));
        coeffs.push(est.value);
        ests.push(est);
    }
    Ok((FormalSeries::new(coeffs)?, ests))
}

/// Exact rational activity series for unit hard rods, order <= 3.
pub fn activity_series_exact_hard_rod(order: usize) -> Result<FormalSeries<Rat>> {
    let mut coeffs = vec![Rat::one()];
    for j in 1..=order {
        let graphs = enumerate(1, j, GraphClass::Connected, DEFAULT_ENUM_CAP)?;
        let mut sum = Rat::zero();
        for g in &graphs {
            sum += hard_rod_zeta(g, &[Rat::zero()])?;
        }
        coeffs.push(sum / factorial_rat(j));
    }
    FormalSeries::new(coeffs)
}

fn dissymmetry_residuals<T: crate::series::Coeff>(
    a: &FormalSeries<T>,
    betas: &[T],
) -> Result<Vec<T>> {
    let order = a.order();
    let l = a.log()?;
    // rho(z) = z * a(z), truncated at the working order.
    let mut rho_coeffs = vec![T::zero()];
    rho_coeffs.extend(a.coeffs().iter().cloned());
    let rho = FormalSeries::new(rho_coeffs)?.truncate(order);
    let mut r = FormalSeries::<T>::zero(order);
    let mut rho_pow = FormalSeries::<T>::one(order);
    for b in betas.iter() {
        rho_pow = rho_pow.mul(&rho);
        r = r.add(&rho_pow.scale(b));
    }
    Ok(l.sub(&r).coeffs().to_vec())
}

/// Exact 1D dissymmetry identity: coefficients of log(rho(z)/z) minus
/// sum_m beta_m rho(z)^m through the given order; all must vanish.
pub fn dissymmetry_check_exact_hard_rod(order: usize) -> Result<Vec<Rat>> {
    let a = activity_series_exact_hard_rod(order)?;
    let betas: Result<Vec<Rat>> = (1..=order).map(virial_beta_exact_hard_rod).collect();
    dissymmetry_residuals(&a, &betas?)
}

/// Monte Carlo dissymmetry check: residual values plus errors propagated by
/// linearization (re-evaluating the identity with each input shifted by its
/// standard error).
pub fn dissymmetry_check(
    order: usize,
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<Vec<(f64, f64)>> {
    let (a, a_ests) = activity_series(order, p, cfg)?;
    let mut beta_ests = Vec::new();
    for m in 1..=order {
        let mut sub_cfg = cfg.clone();
        sub_cfg.seed = sub_seed(cfg.seed, 2000 + m as u64);
        beta_ests.push(virial_beta(m, p, &sub_cfg)?);
    }
    let betas: Vec<f64> = beta_ests.iter().map(|e| e.value).collect();
    let base = dissymmetry_residuals(&a, &betas)?;

    let mut var = vec![0.0f64; base.len()];
    let mut perturb = |a_p: &FormalSeries<f64>, b_p: &[f64]| -> Result<()> {
        let shifted = dissymmetry_residuals(a_p, b_p)?;
        for (v, (s, b)) in var.iter_mut().zip(shifted.iter().zip(base.iter())) {
            *v += (s - b).powi(2);
        }
        Ok(())
    };
    for (j, est) in a_ests.iter().enumerate() {
        if est.std_error > 0.0 {
            let mut c = a.coeffs().to_vec();
            c[j] += est.std_error;
            perturb(&FormalSeries::new(c)?, &betas)?;
        }
    }
    for (m, est) in beta_ests.iter().enumerate() {
        if est.std_error > 0.0 {
            let mut b = betas.clone();
            b[m] += est.std_error;
            perturb(&a, &b)?;
        }
    }
    Ok(base
        .into_iter()
        .zip(var.into_iter())
        .map(|(r, v)| (r, v.sqrt()))
        .collect())
}

/// Tail estimate from a fitted geometric envelope over the last orders.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    pub reliable: bool,
}

/// Evaluate a truncated density series sum_k coeff_k rho^k and estimate the
/// truncation tail by fitting C e^{-ck} to the last min(4, K) per-order
/// magnitudes; a non-positive fitted decay marks the tail unreliable.
pub fn series_eval(coeffs: &[f64], rho: f64) -> Result<(f64, TailEstimate)> {
    if coeffs.is_empty() {
        return Err(Error::Domain("empty coefficient table".into()));
    }
    let kmax = coeffs.len() - 1;
    let value: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * rho.powi(k as i32))
        .sum();

    let terms: Vec<(f64, f64)> = (1..=kmax)
        .map(|k| (k as f64, (coeffs[k].abs() * rho.powi(k as i32)).max(0.0)))
        .filter(|&(_, t)| t > 0.0)
        .map(|(k, t)| (k, t.ln()))
        .collect();
    let fit_window = terms.len().min(4);
    if fit_window < 2 {
        return Ok((
            value,
            TailEstimate {
                value: 0.0,
                reliable: false,
            },
        ));
    }
    let pts = &terms[terms.len() - fit_window..];
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (sxx, sxy): (f64, f64) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let c = -slope;
    if c <= 0.0 {
        return Ok((
            value,
            TailEstimate {
                value: f64::INFINITY,
                reliable: false,
            },
        ));
    }
    // Geometric tail sum from order kmax + 1.
    let ratio = (-c).exp();
    let first = intercept.exp() * ratio.powi(kmax as i32 + 1);
    Ok((
        value,
        TailEstimate {
            value: first / (1.0 - ratio),
            reliable: true,
        },
    ))
}

/// Which series a coefficient table represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    H2,
    C2,
    Virial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub k: usize,
    /// Labeled graphs in the class behind this order, for audit.
    pub graph_count: usize,
    /// (separation, estimate) samples; a single entry at r = 0 for scalars.
    pub values: Vec<(f64, MayerEstimate)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub target: Target,
    pub normalization: Normalization,
    pub sigma: f64,
    pub entries: Vec<CoefficientEntry>,
}

impl CoefficientTable {
    pub fn entry(&self, k: usize) -> Option<&CoefficientEntry> {
        self.entries.iter().find(|e| e.k == k)
    }

    /// Per-order sup-norm over the tabulated separations.
    pub fn sup_norm(&self, k: usize) -> Option<f64> {
        self.entry(k).map(|e| {
            e.values
                .iter()
                .map(|(_, est)| est.value.abs())
                .fold(0.0, f64::max)
        })
    }
}

/// Build the h^(2) table through order `kmax` on the given separations.
pub fn h2_table(
    kmax: usize,
    radii: &[f64],
    p: &PairPotential,
    cfg: &McConfig,
    norm: Normalization,
) -> Result<CoefficientTable> {
    build_pair_table(Target::H2, kmax, radii, p, cfg, norm)
}

/// Build the c^(2) table through order `kmax` on the given separations.
pub fn c2_table(
    kmax: usize,
    radii: &[f64],
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<CoefficientTable> {
    build_pair_table(Target::C2, kmax, radii, p, cfg, Normalization::OzConsistent)
}

fn build_pair_table(
    target: Target,
    kmax: usize,
    radii: &[f64],
    p: &PairPotential,
    cfg: &McConfig,
    norm: Normalization,
) -> Result<CoefficientTable> {
    let mut entries = Vec::new();
    for k in 0..=kmax {
        let class = match target {
            Target::H2 => GraphClass::ArticulationFree,
            Target::C2 => GraphClass::TwoConnected,
            Target::Virial => unreachable!(),
        };
        let graph_count = enumerate(2, k, class, DEFAULT_ENUM_CAP)?.len();
        let mut values = Vec::new();
        for (ri, &r) in radii.iter().enumerate() {
            let anchors = [[0.0; 3], [r, 0.0, 0.0]];
            let mut sub_cfg = cfg.clone();
            sub_cfg.seed = sub_seed(cfg.seed, (k as u64) << 32 | ri as u64);
            let est = match target {
                Target::H2 => h_coefficient(2, k, &anchors, p, &sub_cfg, norm)?,
                Target::C2 => c2_coefficient(k, &anchors, p, &sub_cfg)?,
                Target::Virial => unreachable!(),
            };
            values.push((r, est));
        }
        entries.push(CoefficientEntry {
            k,
            graph_count,
            values,
        });
    }
    Ok(CoefficientTable {
        target,
        normalization: norm,
        sigma: p.sigma,
        entries,
    })
}

/// Build the scalar virial table beta_1..beta_mmax.
pub fn virial_table(mmax: usize, p: &PairPotential, cfg: &McConfig) -> Result<CoefficientTable> {
    let mut entries = Vec::new();
    for m in 1..=mmax {
        let graph_count = enumerate(1, m, GraphClass::TwoConnected, DEFAULT_ENUM_CAP)?.len();
        let mut sub_cfg = cfg.clone();
        sub_cfg.seed = sub_seed(cfg.seed, 3000 + m as u64);
        let est = virial_beta(m, p, &sub_cfg)?;
        entries.push(CoefficientEntry {
            k: m,
            graph_count,
            values: vec![(0.0, est)],
        });
    }
    Ok(CoefficientTable {
        target: Target::Virial,
        normalization: Normalization::OzConsistent,
        sigma: p.sigma,
        entries,
    })
}
