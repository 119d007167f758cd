//! Closed-form reference solutions used as oracles: the exact pair
//! correlation of the 1D hard-rod (Tonks) gas and the closed-form
//! Percus-Yevick direct correlation function for hard spheres.

use crate::error::{Error, Result};

/// Exact pair correlation g(r) of a 1D hard-rod fluid at number density
/// `rho` and rod length `sigma`:
///
///   g(r) = (1/rho) * sum_{k>=1} h^k x_k^{k-1} e^{-h x_k} / (k-1)!,
///
/// with x_k = r - k sigma (terms with x_k <= 0 vanish) and
/// h = rho / (1 - rho sigma). The sum terminates at k < r/sigma.
pub fn tonks_g(r: f64, rho: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 || rho < 0.0 || rho * sigma >= 1.0 {
        return Err(Error::Domain(
            "tonks_g needs sigma > 0 and 0 <= rho*sigma < 1".into(),
        ));
    }
    if rho == 0.0 {
        return Ok(if r < sigma { 0.0 } else { 1.0 });
    }
    let h = rho / (1.0 - rho * sigma);
    let mut sum = 0.0;
    let mut k = 1usize;
    loop {
        let x = r - k as f64 * sigma;
        if x <= 0.0 {
            break;
        }
        // h^k x^{k-1} e^{-h x} / (k-1)!, built in log space for stability.
        let mut term = h * (-h * x).exp();
        for j in 1..k {
            term *= h * x / j as f64;
        }
        sum += term;
        k += 1;
    }
    Ok(sum / rho)
}

/// Closed-form Percus-Yevick direct correlation function for 3D hard
/// spheres at packing fraction eta = pi rho sigma^3 / 6:
///
///   c(r) = -l1 + 6 eta l2 (r/sigma) - (eta l1 / 2)(r/sigma)^3  for r < sigma,
///   c(r) = 0 otherwise,
///
/// with l1 = (1+2eta)^2/(1-eta)^4 and l2 = (1+eta/2)^2/(1-eta)^4.
pub fn py_hard_sphere_c(r: f64, eta: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 || !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(
            "py_hard_sphere_c needs sigma > 0 and 0 <= eta < 1".into(),
        ));
    }
    if r >= sigma {
        return Ok(0.0);
    }
    let x = r / sigma;
    let om = 1.0 - eta;
    let l1 = (1.0 + 2.0 * eta).powi(2) / om.powi(4);
    let l2 = (1.0 + 0.5 * eta).powi(2) / om.powi(4);
    Ok(-l1 + 6.0 * eta * l2 * x - 0.5 * eta * l1 * x.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tonks_core_and_contact() {
        let (rho, sigma) = (0.3, 1.0);
        assert_eq!(tonks_g(0.5, rho, sigma).unwrap(), 0.0);
        // Contact value g(sigma+) = 1/(1 - rho sigma).
        let contact = tonks_g(sigma + 1e-12, rho, sigma).unwrap();
        assert!((contact - 1.0 / (1.0 - rho * sigma)).abs() < 1e-9);
    }

    #[test]
    fn tonks_decays_to_one() {
        let g = tonks_g(25.0, 0.3, 1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-6, "{g}");
    }

    #[test]
    fn tonks_low_density_is_step() {
        for &r in &[0.5, 1.2, 2.7] {
            let g = tonks_g(r, 1e-6, 1.0).unwrap();
            let step = if r < 1.0 { 0.0 } else { 1.0 };
            assert!((g - step).abs() < 1e-5, "r = {r}: {g}");
        }
    }

    #[test]
    fn wertheim_low_density_limit() {
        // eta -> 0: c(r) -> f(r) = -1 inside the core, 0 outside.
        assert!((py_hard_sphere_c(0.4, 1e-9, 1.0).unwrap() + 1.0).abs() < 1e-7);
        assert_eq!(py_hard_sphere_c(1.3, 1e-9, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn wertheim_matches_first_order_series() {
        // c(r) = f(r) + rho c_1(r) + O(rho^2) with c_1(r) = -overlap(r)
        // inside the core; check the O(rho) term against the lens volume.
        let sigma = 1.0f64;
        let eta = 1e-4;
        let rho = 6.0 * eta / (PI * sigma.powi(3));
        for &r in &[0.0, 0.3, 0.7, 0.95] {
            let c = py_hard_sphere_c(r, eta, sigma).unwrap();
            let c1 = -crate::integrate::sphere_overlap(sigma, r);
            assert!(
                (c - (-1.0 + rho * c1)).abs() < 50.0 * rho * rho,
                "r = {r}"
            );
        }
    }

    #[test]
    fn domain_errors() {
        assert!(tonks_g(1.0, 1.5, 1.0).is_err());
        assert!(tonks_g(1.0, -0.1, 1.0).is_err());
        assert!(py_hard_sphere_c(0.5, 1.0, 1.0).is_err());
        assert!(py_hard_sphere_c(0.5, 0.2, 0.0).is_err());
    }
}
