//! Graph activity integrals: method dispatch between analytic evaluation,
//! the exact rational 1D engine, and Monte Carlo.

use crate::error::{Error, Result};
use crate::exact1d;
use crate::graph::ColoredGraph;
use crate::mc::{mc_zeta, McConfig};
use crate::potential::{PairPotential, PotentialKind};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Analytic,
    Quadrature,
    MonteCarlo,
}

/// Value of a graph integral with statistical metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MayerEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: Method,
    pub exact: bool,
}

impl MayerEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples: 0,
            method: Method::Analytic,
            exact: true,
        }
    }
}

/// Overlap volume of two balls of radius `sigma` with centers `s` apart.
pub fn sphere_overlap(sigma: f64, s: f64) -> f64 {
    let s = s.abs();
    if s >= 2.0 * sigma {
        return 0.0;
    }
    4.0 / 3.0 * PI * sigma.powi(3) * (1.0 - 0.75 * s / sigma + s.powi(3) / (16.0 * sigma.powi(3)))
}

/// Overlap length of two intervals of half-width `sigma` centered `s` apart.
pub fn rod_overlap(sigma: f64, s: f64) -> f64 {
    (2.0 * sigma - s.abs()).max(0.0)
}

fn to_rational(x: f64) -> Result<exact1d::Rat> {
    Ratio::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite anchor {x}")))
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Evaluate the graph activity integral with the white vertices pinned at
/// `anchors` and the black positions integrated over R^d. Method selection:
/// no blacks -> analytic product; 1D hard rods with <= 3 blacks -> exact
/// rational; the hard-sphere white-black-white path -> analytic ball overlap;
/// otherwise seeded Monte Carlo.
pub fn zeta_bullet(
    g: &ColoredGraph,
    anchors: &[[f64; 3]],
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<MayerEstimate> {
    if !g.is_connected() {
        return Err(Error::Domain("zeta integral requires a connected graph".into()));
    }
    if anchors.len() != g.n_white() {
        return Err(Error::Domain(format!(
            "expected {} anchors, got {}",
            g.n_white(),
            anchors.len()
        )));
    }
    let k = g.n_black();

    if k == 0 {
        let mut value = 1.0;
        for (i1, j1) in g.edge_list() {
            value *= p.mayer_f(dist(&anchors[i1 - 1], &anchors[j1 - 1]));
        }
        return Ok(MayerEstimate::exact(value));
    }

    if p.kind == PotentialKind::HardRod && k <= exact1d::EXACT_DIM_CAP {
        // Anchors scaled to unit rods; exact result carries sigma^k.
        let scaled: Result<Vec<exact1d::Rat>> = anchors
            .iter()
            .map(|a| to_rational(a[0] / p.sigma))
            .collect();
        let v = exact1d::hard_rod_zeta(g, &scaled?)?;
        let value = v.to_f64().ok_or_else(|| Error::Numerical {
            context: "rational to float conversion",
            achieved: f64::NAN,
            wanted: 0.0,
        })? * p.sigma.powi(k as i32);
        return Ok(MayerEstimate::exact(value));
    }

    if p.kind == PotentialKind::HardSphere && k == 1 {
        // One black vertex bonded to at most two whites: the integral is a
        // signed ball or ball-overlap volume, times the fixed white bonds.
        let b = g.n_white();
        let nbrs: Vec<usize> = (0..b).filter(|&w| g.has_edge0(w, b)).collect();
        if nbrs.len() <= 2 {
            let mut fixed = 1.0;
            for (i1, j1) in g.edge_list() {
                let (i, j) = (i1 - 1, j1 - 1);
                if j < b {
                    fixed *= p.mayer_f(dist(&anchors[i], &anchors[j]));
                }
            }
            let integral = if nbrs.len() == 1 {
                -4.0 / 3.0 * PI * p.sigma.powi(3)
            } else {
                sphere_overlap(p.sigma, dist(&anchors[nbrs[0]], &anchors[nbrs[1]]))
            };
            return Ok(MayerEstimate::exact(fixed * integral));
        }
    }

    let raw = mc_zeta(g, anchors, p, cfg)?;
    Ok(MayerEstimate {
        value: raw.value,
        std_error: raw.std_error,
        n_samples: raw.n_samples,
        method: Method::MonteCarlo,
        exact: false,
    })
}

/// Falling-factorial density approximation N(N-1)...(N-n+1)/|volume|^n,
/// zero once n exceeds N.
pub fn finite_volume_factor(n_particles: u64, volume: f64, n: u64) -> f64 {
    if n > n_particles {
        return 0.0;
    }
    let mut num = 1.0;
    for i in 0..n {
        num *= (n_particles - i) as f64;
    }
    num / volume.powi(n as i32)
}
