//! Exact rational evaluation of 1D hard-rod graph integrals.
//!
//! With unit rods, every Mayer bond is -1 times the indicator of an open unit
//! window, so the integral over the black positions is a sign times the volume
//! of a convex polytope cut out by the window constraints. Volumes are computed
//! exactly in rational arithmetic by vertex enumeration (dimension <= 3).

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Rat = Ratio<BigInt>;

/// Maximum number of integrated (black) vertices the exact engine handles.
pub const EXACT_DIM_CAP: usize = 3;

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

/// Half-space a . x <= b over at most three coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub a: [Rat; 3],
    pub b: Rat,
}

impl HalfSpace {
    fn normalized(&self) -> Self {
        let lead = self.a.iter().find(|c| !c.is_zero());
        match lead {
            None => self.clone(),
            Some(l) => {
                let s = l.clone();
                HalfSpace {
                    a: [
                        &self.a[0] / &s,
                        &self.a[1] / &s,
                        &self.a[2] / &s,
                    ],
                    b: &self.b / &s,
                }
            }
        }
    }
}

/// Exact ζ̃• for a connected graph under unit hard rods: the white vertices sit
/// at the rational `anchors` (in units of sigma) and each black position is
/// integrated over the real line. Returns the coefficient of sigma^k.
pub fn hard_rod_zeta(g: &ColoredGraph, anchors: &[Rat]) -> Result<Rat> {
    let n = g.n_white();
    let k = g.n_black();
    if anchors.len() != n {
        return Err(Error::Domain(format!(
            "expected {n} anchors, got {}",
            anchors.len()
        )));
    }
    if k > EXACT_DIM_CAP {
        return Err(Error::SizeLimit {
            what: "black vertices in exact 1D mode",
            requested: k,
            cap: EXACT_DIM_CAP,
        });
    }
    if !g.is_connected() {
        return Err(Error::Domain("exact 1D mode requires a connected graph".into()));
    }

    let one = Rat::one();
    let sign = if g.n_edges() % 2 == 0 {
        Rat::one()
    } else {
        -Rat::one()
    };
    let mut constraints: Vec<HalfSpace> = Vec::new();
    for (i1, j1) in g.edge_list() {
        let (i, j) = (i1 - 1, j1 - 1);
        match (i < n, j < n) {
            (true, true) => {
                // Fixed bond between two anchors: factor is -1 or 0.
                if (&anchors[i] - &anchors[j]).abs() >= one {
                    return Ok(Rat::zero());
                }
            }
            (true, false) => {
                // |x_b - a| <= 1 as two half-spaces (open vs closed is
                // immaterial for the volume).
                let b = j - n;
                let mut hi = HalfSpace {
                    a: [Rat::zero(), Rat::zero(), Rat::zero()],
                    b: &anchors[i] + &one,
                };
                hi.a[b] = Rat::one();
                let mut lo = HalfSpace {
                    a: [Rat::zero(), Rat::zero(), Rat::zero()],
                    b: &one - &anchors[i],
                };
                lo.a[b] = -Rat::one();
                constraints.push(hi);
                constraints.push(lo);
            }
            (false, false) => {
                let (u, v) = (i - n, j - n);
                let mut hi = HalfSpace {
                    a: [Rat::zero(), Rat::zero(), Rat::zero()],
                    b: one.clone(),
                };
                hi.a[u] = Rat::one();
                hi.a[v] = -Rat::one();
                let mut lo = HalfSpace {
                    a: [Rat::zero(), Rat::zero(), Rat::zero()],
                    b: one.clone(),
                };
                lo.a[u] = -Rat::one();
                lo.a[v] = Rat::one();
                constraints.push(hi);
                constraints.push(lo);
            }
            (false, true) => unreachable!("edge_list is sorted with i < j"),
        }
    }
    if k == 0 {
        return Ok(sign);
    }
    Ok(sign * polytope_volume(k, &constraints)?)
}

/// Volume of the (assumed bounded) polytope { x in R^dim : a.x <= b for all
/// half-spaces }, by exact vertex enumeration; dim in 1..=3.
pub fn polytope_volume(dim: usize, halfspaces: &[HalfSpace]) -> Result<Rat> {
    match dim {
        1 => volume_1d(halfspaces),
        2 => volume_2d(halfspaces),
        3 => volume_3d(halfspaces),
        _ => Err(Error::Domain(format!(
            "polytope volume supports dimensions 1..=3, got {dim}"
        ))),
    }
}

fn volume_1d(hs: &[HalfSpace]) -> Result<Rat> {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for h in hs {
        let a = &h.a[0];
        if a.is_zero() {
            if h.b.is_negative() {
                return Ok(Rat::zero());
            }
            continue;
        }
        let bound = &h.b / a;
        if a.is_positive() {
            hi = Some(match hi {
                Some(v) if v <= bound => v,
                _ => bound,
            });
        } else {
            lo = Some(match lo {
                Some(v) if v >= bound => v,
                _ => bound,
            });
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) if h > l => Ok(h - l),
        (Some(_), Some(_)) => Ok(Rat::zero()),
        _ => Err(Error::Domain("unbounded 1D polytope".into())),
    }
}

fn satisfies_all(hs: &[HalfSpace], p: &[Rat; 3]) -> bool {
    hs.iter().all(|h| {
        let v = &h.a[0] * &p[0] + &h.a[1] * &p[1] + &h.a[2] * &p[2];
        v <= h.b
    })
}

fn dedup_halfspaces(hs: &[HalfSpace]) -> Vec<HalfSpace> {
    let mut out: Vec<HalfSpace> = Vec::new();
    for h in hs {
        let n = h.normalized();
        if !out.iter().any(|o| o.normalized() == n) {
            out.push(h.clone());
        }
    }
    out
}

fn volume_2d(hs: &[HalfSpace]) -> Result<Rat> {
    let hs = dedup_halfspaces(hs);
    let m = hs.len();
    let mut verts: Vec<[Rat; 3]> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let (a1, b1) = (&hs[i].a, &hs[i].b);
            let (a2, b2) = (&hs[j].a, &hs[j].b);
            let det = &a1[0] * &a2[1] - &a1[1] * &a2[0];
            if det.is_zero() {
                continue;
            }
            let x = (b1 * &a2[1] - &a1[1] * b2) / &det;
            let y = (&a1[0] * b2 - b1 * &a2[0]) / &det;
            let p = [x, y, Rat::zero()];
            if satisfies_all(&hs, &p) && !verts.contains(&p) {
                verts.push(p);
            }
        }
    }
    if verts.len() < 3 {
        return Ok(Rat::zero());
    }
    let c = centroid(&verts);
    // Angular order around the centroid, then the shoelace formula.
    let mut order: Vec<usize> = (0..verts.len()).collect();
    order.sort_by(|&i, &j| {
        angle_cmp_2d(
            &[&verts[i][0] - &c[0], &verts[i][1] - &c[1]],
            &[&verts[j][0] - &c[0], &verts[j][1] - &c[1]],
        )
    });
    let mut area2 = Rat::zero();
    for t in 0..order.len() {
        let p = &verts[order[t]];
        let q = &verts[order[(t + 1) % order.len()]];
        area2 += &p[0] * &q[1] - &q[0] * &p[1];
    }
    Ok(area2.abs() / rat(2, 1))
}

fn centroid(verts: &[[Rat; 3]]) -> [Rat; 3] {
    let n = Rat::from(BigInt::from(verts.len() as i64));
    let mut c = [Rat::zero(), Rat::zero(), Rat::zero()];
    for v in verts {
        for d in 0..3 {
            c[d] += &v[d];
        }
    }
    for d in c.iter_mut() {
        *d /= &n;
    }
    c
}

/// Exact counter-clockwise angle comparison of two nonzero 2D vectors.
fn angle_cmp_2d(p: &[Rat; 2], q: &[Rat; 2]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let half = |v: &[Rat; 2]| -> u8 {
        // 0: upper half-plane (y > 0, or y = 0 and x > 0); 1: lower.
        if v[1].is_positive() || (v[1].is_zero() && v[0].is_positive()) {
            0
        } else {
            1
        }
    };
    let (hp, hq) = (half(p), half(q));
    if hp != hq {
        return hp.cmp(&hq);
    }
    let cross = &p[0] * &q[1] - &p[1] * &q[0];
    if cross.is_positive() {
        Ordering::Less
    } else if cross.is_negative() {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

fn volume_3d(hs: &[HalfSpace]) -> Result<Rat> {
    let hs = dedup_halfspaces(hs);
    let m = hs.len();
    let mut verts: Vec<[Rat; 3]> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            for l in (j + 1)..m {
                if let Some(p) = solve3(&hs[i], &hs[j], &hs[l]) {
                    if satisfies_all(&hs, &p) && !verts.contains(&p) {
                        verts.push(p);
                    }
                }
            }
        }
    }
    if verts.len() < 4 {
        return Ok(Rat::zero());
    }
    let c = centroid(&verts);
    let mut vol6 = Rat::zero();
    for h in &hs {
        // Vertices lying on this supporting plane form one convex facet.
        let face: Vec<&[Rat; 3]> = verts
            .iter()
            .filter(|p| &h.a[0] * &p[0] + &h.a[1] * &p[1] + &h.a[2] * &p[2] == h.b)
            .collect();
        if face.len() < 3 {
            continue;
        }
        vol6 += facet_cone_volume6(&face, &h.a, &c);
    }
    Ok(vol6 / rat(6, 1))
}

/// Six times the volume of the cone from `apex` over the convex planar facet
/// with outward data `normal`, vertices in arbitrary order.
fn facet_cone_volume6(face: &[&[Rat; 3]], normal: &[Rat; 3], apex: &[Rat; 3]) -> Rat {
    // In-plane axes: u orthogonal to the normal, v = normal x u.
    let u: [Rat; 3] = if !normal[0].is_zero() || !normal[1].is_zero() {
        [-normal[1].clone(), normal[0].clone(), Rat::zero()]
    } else {
        [Rat::one(), Rat::zero(), Rat::zero()]
    };
    let v = [
        &normal[1] * &u[2] - &normal[2] * &u[1],
        &normal[2] * &u[0] - &normal[0] * &u[2],
        &normal[0] * &u[1] - &normal[1] * &u[0],
    ];
    let fc = centroid(&face.iter().map(|p| (*p).clone()).collect::<Vec<_>>());
    let mut order: Vec<usize> = (0..face.len()).collect();
    let proj = |p: &[Rat; 3]| -> [Rat; 2] {
        let d = [&p[0] - &fc[0], &p[1] - &fc[1], &p[2] - &fc[2]];
        [
            &u[0] * &d[0] + &u[1] * &d[1] + &u[2] * &d[2],
            &v[0] * &d[0] + &v[1] * &d[1] + &v[2] * &d[2],
        ]
    };
    order.sort_by(|&i, &j| angle_cmp_2d(&proj(face[i]), &proj(face[j])));
    let mut total = Rat::zero();
    let p0 = face[order[0]];
    for t in 1..(order.len() - 1) {
        let p1 = face[order[t]];
        let p2 = face[order[t + 1]];
        let e1 = [&p1[0] - &p0[0], &p1[1] - &p0[1], &p1[2] - &p0[2]];
        let e2 = [&p2[0] - &p0[0], &p2[1] - &p0[1], &p2[2] - &p0[2]];
        let e3 = [&apex[0] - &p0[0], &apex[1] - &p0[1], &apex[2] - &p0[2]];
        let det = &e1[0] * (&e2[1] * &e3[2] - &e2[2] * &e3[1])
            - &e1[1] * (&e2[0] * &e3[2] - &e2[2] * &e3[0])
            + &e1[2] * (&e2[0] * &e3[1] - &e2[1] * &e3[0]);
        total += det.abs();
    }
    total
}

fn solve3(h1: &HalfSpace, h2: &HalfSpace, h3: &HalfSpace) -> Option<[Rat; 3]> {
    let a = [&h1.a, &h2.a, &h3.a];
    let b = [&h1.b, &h2.b, &h3.b];
    let det = |c0: [&Rat; 3], c1: [&Rat; 3], c2: [&Rat; 3]| -> Rat {
        c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
            + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
    };
    let col = |j: usize| [&a[0][j], &a[1][j], &a[2][j]];
    let bc = [b[0], b[1], b[2]];
    let d = det(col(0), col(1), col(2));
    if d.is_zero() {
        return None;
    }
    let x = det(bc, col(1), col(2)) / &d;
    let y = det(col(0), bc, col(2)) / &d;
    let z = det(col(0), col(1), bc) / &d;
    Some([x, y, z])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(nw: usize, nb: usize, edges: &[(usize, usize)]) -> ColoredGraph {
        ColoredGraph::new(nw, nb, edges).unwrap()
    }

    #[test]
    fn unit_cube_volumes() {
        // [0,1]^d boxes in each dimension.
        let mut hs = Vec::new();
        for d in 0..3 {
            let mut hi = HalfSpace {
                a: [Rat::zero(), Rat::zero(), Rat::zero()],
                b: Rat::one(),
            };
            hi.a[d] = Rat::one();
            let mut lo = HalfSpace {
                a: [Rat::zero(), Rat::zero(), Rat::zero()],
                b: Rat::zero(),
            };
            lo.a[d] = -Rat::one();
            hs.push(hi);
            hs.push(lo);
            assert_eq!(polytope_volume(d + 1, &hs).unwrap(), Rat::one());
        }
    }

    #[test]
    fn simplex_volume() {
        // x,y,z >= 0, x+y+z <= 1 has volume 1/6.
        let mut hs: Vec<HalfSpace> = (0..3)
            .map(|d| {
                let mut h = HalfSpace {
                    a: [Rat::zero(), Rat::zero(), Rat::zero()],
                    b: Rat::zero(),
                };
                h.a[d] = -Rat::one();
                h
            })
            .collect();
        hs.push(HalfSpace {
            a: [Rat::one(), Rat::one(), Rat::one()],
            b: Rat::one(),
        });
        assert_eq!(polytope_volume(3, &hs).unwrap(), rat(1, 6));
    }

    #[test]
    fn single_edge_sign() {
        let e = g(2, 0, &[(1, 2)]);
        assert_eq!(
            hard_rod_zeta(&e, &[rat(0, 1), rat(1, 2)]).unwrap(),
            -Rat::one()
        );
        assert_eq!(
            hard_rod_zeta(&e, &[rat(0, 1), rat(3, 2)]).unwrap(),
            Rat::zero()
        );
    }

    #[test]
    fn path_through_one_black() {
        // 1(w)-3(b)-2(w): integral of f(x-a1) f(x-a2) dx = overlap of two unit
        // windows; at coincident anchors the value is (+1)^2 * 2 = 2.
        let p = g(2, 1, &[(1, 3), (2, 3)]);
        assert_eq!(hard_rod_zeta(&p, &[rat(0, 1), rat(0, 1)]).unwrap(), rat(2, 1));
        // Separation 1/2: overlap length 3/2.
        assert_eq!(
            hard_rod_zeta(&p, &[rat(0, 1), rat(1, 2)]).unwrap(),
            rat(3, 2)
        );
        // Separation >= 2: disjoint windows.
        assert_eq!(
            hard_rod_zeta(&p, &[rat(0, 1), rat(5, 2)]).unwrap(),
            Rat::zero()
        );
    }

    #[test]
    fn triangle_coincident_anchors() {
        // Triangle 1-2-3 with q1 = q2 = 0: (-1)^3 * 2 = -2.
        let t = g(2, 1, &[(1, 2), (1, 3), (2, 3)]);
        assert_eq!(
            hard_rod_zeta(&t, &[rat(0, 1), rat(0, 1)]).unwrap(),
            rat(-2, 1)
        );
    }

    #[test]
    fn two_black_path_matches_convolution() {
        // 1(w)-2(b)-3(b) with one white at 0: integral over (x,y) of
        // f(x) f(x-y) dx dy = (+1)^2 * 2 * 2 = 4.
        let p = g(1, 2, &[(1, 2), (2, 3)]);
        assert_eq!(hard_rod_zeta(&p, &[rat(0, 1)]).unwrap(), rat(4, 1));
    }

    #[test]
    fn three_black_chain() {
        // Chain of three blacks hanging off one white: each bond contributes
        // an independent unit-window integral of length 2; sign (-1)^3.
        let c = g(1, 3, &[(1, 2), (2, 3), (3, 4)]);
        assert_eq!(hard_rod_zeta(&c, &[rat(0, 1)]).unwrap(), rat(-8, 1));
    }

    #[test]
    fn tonks_triangle_integral() {
        // Fully connected triangle on {1(w),2(b),3(b)}: integral over (x,y)
        // of f(x)f(y)f(x-y); region |x|<1, |y|<1, |x-y|<1 has area 3, sign -1.
        let t = g(1, 2, &[(1, 2), (1, 3), (2, 3)]);
        assert_eq!(hard_rod_zeta(&t, &[rat(0, 1)]).unwrap(), rat(-3, 1));
    }

    #[test]
    fn guard_and_errors() {
        let big = g(1, 4, &[(1, 2), (2, 3), (3, 4), (4, 5)]);
        assert!(hard_rod_zeta(&big, &[rat(0, 1)]).is_err());
        let disc = g(2, 2, &[(1, 3), (2, 4)]);
        assert!(hard_rod_zeta(&disc, &[rat(0, 1), rat(0, 1)]).is_err());
        let e = g(2, 0, &[(1, 2)]);
        assert!(hard_rod_zeta(&e, &[rat(0, 1)]).is_err());
    }

    #[test]
    fn translation_invariance_exact() {
        let t = g(2, 2, &[(1, 3), (3, 4), (4, 2)]);
        let v0 = hard_rod_zeta(&t, &[rat(0, 1), rat(1, 2)]).unwrap();
        let v1 = hard_rod_zeta(&t, &[rat(7, 3), rat(7, 3) + rat(1, 2)]).unwrap();
        assert_eq!(v0, v1);
    }
}
