//! Seeded Monte Carlo estimation of graph integrals with importance sampling
//! along a spanning tree: each black vertex is placed relative to its tree
//! parent from a density proportional to |f|, which turns every tree bond into
//! a bounded +-C(beta) factor for piecewise-constant Mayer functions.

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::potential::{PairPotential, PotentialKind};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fixed stratum count: sub-seeds are derived per stratum, so results do not
/// depend on how strata are distributed over worker threads.
const N_STRATA: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Proposal {
    /// Piecewise-constant |f| sampling (exact for hard cores and square wells).
    CoreBall,
    /// Isotropic Gaussian displacement, for potentials without closed-form |f|.
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub n_samples: u64,
    pub proposal: Proposal,
    pub stratify_by_vertex: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 100_000,
            proposal: Proposal::CoreBall,
            stratify_by_vertex: false,
        }
    }
}

/// Raw MC output before packaging into an estimate.
pub struct McRaw {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

/// One radial shell of constant |f|: support [r0, r1), factor value.
struct Shell {
    r0: f64,
    r1: f64,
    f_value: f64,
    weight: f64,
}

fn shells(p: &PairPotential) -> Option<Vec<Shell>> {
    let measure = |r0: f64, r1: f64| match p.dimension {
        1 => 2.0 * (r1 - r0),
        _ => 4.0 / 3.0 * PI * (r1.powi(3) - r0.powi(3)),
    };
    match &p.kind {
        PotentialKind::HardRod | PotentialKind::HardSphere => Some(vec![Shell {
            r0: 0.0,
            r1: p.sigma,
            f_value: -1.0,
            weight: measure(0.0, p.sigma),
        }]),
        PotentialKind::SquareWell { epsilon, lambda } => {
            let amp = (p.beta * epsilon).exp() - 1.0;
            Some(vec![
                Shell {
                    r0: 0.0,
                    r1: p.sigma,
                    f_value: -1.0,
                    weight: measure(0.0, p.sigma),
                },
                Shell {
                    r0: p.sigma,
                    r1: lambda * p.sigma,
                    f_value: amp,
                    weight: amp.abs() * measure(p.sigma, lambda * p.sigma),
                },
            ])
        }
        PotentialKind::Tabulated { .. } => None,
    }
}

fn unit_direction(d: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    if d == 1 {
        let s: bool = rng.gen();
        return [if s { 1.0 } else { -1.0 }, 0.0, 0.0];
    }
    loop {
        let v = [
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        ];
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-12 && n2 <= 1.0 {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Uniform radius in the shell [r0, r1) under the d-dimensional radial
/// measure r^{d-1} dr.
fn shell_radius(d: usize, r0: f64, r1: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    match d {
        1 => r0 + u * (r1 - r0),
        _ => (r0.powi(3) + u * (r1.powi(3) - r0.powi(3))).cbrt(),
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// BFS spanning tree from vertex 0; parent[v] for v > 0, parent[0] = 0.
fn spanning_tree(g: &ColoredGraph) -> Vec<usize> {
    let n = g.n_vertices();
    let mut parent = vec![usize::MAX; n];
    parent[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for w in 0..n {
            if parent[w] == usize::MAX && g.has_edge0(v.min(w), v.max(w)) && v != w {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    parent
}

/// Monte Carlo estimate of the graph integral over black positions with the
/// white vertices pinned at `anchors`. Deterministic for a fixed config,
/// independent of the rayon worker count.
pub fn mc_zeta(
    g: &ColoredGraph,
    anchors: &[[f64; 3]],
    p: &PairPotential,
    cfg: &McConfig,
) -> Result<McRaw> {
    if !g.is_connected() {
        return Err(Error::Domain("MC integration requires a connected graph".into()));
    }
    if anchors.len() != g.n_white() {
        return Err(Error::Domain(format!(
            "expected {} anchors, got {}",
            g.n_white(),
            anchors.len()
        )));
    }
    if cfg.n_samples == 0 {
        return Err(Error::Config("n_samples must be >= 1".into()));
    }

    let n = g.n_white();
    let nv = g.n_vertices();
    let d = p.dimension;
    let parent = spanning_tree(g);

    // Black vertices in a parent-before-child order.
    let mut order: Vec<usize> = Vec::new();
    {
        let mut placed: Vec<bool> = (0..nv).map(|v| v < n).collect();
        while order.len() < nv - n {
            for v in n..nv {
                if !placed[v] && placed[parent[v]] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
    }

    // Factor edges: all edges except the black sampling bonds (v, parent[v]).
    let mut factor_edges: Vec<(usize, usize)> = Vec::new();
    for (i1, j1) in g.edge_list() {
        let (i, j) = (i1 - 1, j1 - 1);
        let is_tree_bond = (j >= n && parent[j] == i) || (i >= n && parent[i] == j);
        if !is_tree_bond {
            factor_edges.push((i, j));
        }
    }

    let sh = match cfg.proposal {
        Proposal::CoreBall => shells(p),
        Proposal::Gaussian => None,
    };
    if matches!(cfg.proposal, Proposal::CoreBall) && sh.is_none() {
        return Err(Error::Config(
            "CoreBall proposal requires a piecewise-constant Mayer function".into(),
        ));
    }
    let total_weight: f64 = sh
        .as_ref()
        .map(|s| s.iter().map(|x| x.weight).sum())
        .unwrap_or(0.0);
    let gauss_sigma = p.interaction_range();

    let n_strata = N_STRATA.min(cfg.n_samples);
    let per_stratum = cfg.n_samples / n_strata;
    let remainder = cfg.n_samples % n_strata;

    let stats: Vec<(f64, f64, u64)> = (0..n_strata)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s + 1);
            let count = per_stratum + if s < remainder { 1 } else { 0 };
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            let mut pos = vec![[0.0f64; 3]; nv];
            pos[..n].copy_from_slice(anchors);
            for _ in 0..count {
                let mut w = 1.0f64;
                for &v in &order {
                    let par = pos[parent[v]];
                    match &sh {
                        Some(shells) => {
                            let pick = rng.gen::<f64>() * total_weight;
                            let mut acc = 0.0;
                            let mut chosen = &shells[0];
                            for s in shells {
                                acc += s.weight;
                                if pick < acc {
                                    chosen = s;
                                    break;
                                }
                                chosen = s;
                            }
                            let r = shell_radius(d, chosen.r0, chosen.r1, &mut rng);
                            let dir = unit_direction(d, &mut rng);
                            pos[v] = [
                                par[0] + r * dir[0],
                                par[1] + r * dir[1],
                                par[2] + r * dir[2],
                            ];
                            // f / q for |f|-proportional sampling.
                            w *= total_weight * chosen.f_value.signum();
                        }
                        None => {
                            let mut delta = [0.0f64; 3];
                            let mut q = 1.0f64;
                            for dd in delta.iter_mut().take(d) {
                                let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
                                let z = (-2.0 * u1.max(1e-300).ln()).sqrt()
                                    * (2.0 * PI * u2).cos();
                                *dd = z * gauss_sigma;
                                q *= (-0.5 * z * z).exp()
                                    / (gauss_sigma * (2.0 * PI).sqrt());
                            }
                            pos[v] = [par[0] + delta[0], par[1] + delta[1], par[2] + delta[2]];
                            let r = dist(&pos[v], &par);
                            w *= p.mayer_f(r) / q;
                        }
                    }
                    if w == 0.0 {
                        break;
                    }
                }
                if w != 0.0 {
                    for &(i, j) in &factor_edges {
                        w *= p.mayer_f(dist(&pos[i], &pos[j]));
                        if w == 0.0 {
                            break;
                        }
                    }
                }
                sum += w;
                sum_sq += w * w;
            }
            (sum, sum_sq, count)
        })
        .collect();

    let (sum, sum_sq, count) = stats
        .iter()
        .fold((0.0, 0.0, 0u64), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let nf = count as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf - mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
    Ok(McRaw {
        value: mean,
        std_error: var.sqrt(),
        n_samples: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(nw: usize, nb: usize, edges: &[(usize, usize)]) -> ColoredGraph {
        ColoredGraph::new(nw, nb, edges).unwrap()
    }

    fn cfg(seed: u64, n: u64) -> McConfig {
        McConfig {
            seed,
            n_samples: n,
            ..Default::default()
        }
    }

    #[test]
    fn lens_volume_hard_sphere() {
        // Path 1-3-2 at coincident anchors: integral = ball volume.
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let path = g(2, 1, &[(1, 3), (2, 3)]);
        let anchors = [[0.0; 3], [0.0; 3]];
        let est = mc_zeta(&path, &anchors, &p, &cfg(42, 200_000)).unwrap();
        let exact = 4.0 / 3.0 * PI;
        assert!(
            (est.value - exact).abs() < 4.0 * est.std_error.max(1e-3),
            "{} vs {}",
            est.value,
            exact
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let tri = g(2, 1, &[(1, 2), (1, 3), (2, 3)]);
        let anchors = [[0.0; 3], [0.5, 0.0, 0.0]];
        let a = mc_zeta(&tri, &anchors, &p, &cfg(7, 50_000)).unwrap();
        let b = mc_zeta(&tri, &anchors, &p, &cfg(7, 50_000)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = mc_zeta(&tri, &anchors, &p, &cfg(8, 50_000)).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn matches_exact_1d() {
        // Triangle on {1(w), 2(b), 3(b)}: exact value -3 sigma^2.
        let p = PairPotential::hard_rod(1.0, 1.0);
        let tri = g(1, 2, &[(1, 2), (1, 3), (2, 3)]);
        let est = mc_zeta(&tri, &[[0.0; 3]], &p, &cfg(3, 400_000)).unwrap();
        assert!(
            (est.value - (-3.0)).abs() < 4.0 * est.std_error,
            "{} +- {}",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn disjoint_support_is_zero() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let path = g(2, 1, &[(1, 3), (2, 3)]);
        let anchors = [[0.0; 3], [2.5, 0.0, 0.0]];
        let est = mc_zeta(&path, &anchors, &p, &cfg(1, 10_000)).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn gaussian_proposal_agrees() {
        let p = PairPotential::tabulated(
            3,
            1.0,
            1.0,
            0.0,
            vec![(0.0, 50.0), (1.0, 0.0), (1.5, 0.0)],
        )
        .unwrap();
        let path = g(2, 1, &[(1, 3), (2, 3)]);
        let anchors = [[0.0; 3], [0.0; 3]];
        let mut c = cfg(11, 400_000);
        c.proposal = Proposal::Gaussian;
        let est = mc_zeta(&path, &anchors, &p, &c).unwrap();
        // Independent quadrature oracle: int f(r)^2 4 pi r^2 dr.
        let mut oracle = 0.0;
        let n = 20_000;
        let rmax = 1.5;
        for i in 0..n {
            let r = (i as f64 + 0.5) / n as f64 * rmax;
            oracle += p.mayer_f(r).powi(2) * 4.0 * PI * r * r * (rmax / n as f64);
        }
        assert!(
            (est.value - oracle).abs() < 5.0 * est.std_error,
            "{} +- {} vs {}",
            est.value,
            est.std_error,
            oracle
        );
    }

    #[test]
    fn invalid_inputs() {
        let p = PairPotential::hard_sphere(1.0, 1.0);
        let disc = g(2, 2, &[(1, 3), (2, 4)]);
        assert!(mc_zeta(&disc, &[[0.0; 3], [0.0; 3]], &p, &cfg(0, 10)).is_err());
        let e = g(2, 0, &[(1, 2)]);
        assert!(mc_zeta(&e, &[[0.0; 3]], &p, &cfg(0, 10)).is_err());
        let mut c = cfg(0, 10);
        c.n_samples = 0;
        assert!(mc_zeta(&e, &[[0.0; 3], [0.0; 3]], &p, &c).is_err());
    }
}
