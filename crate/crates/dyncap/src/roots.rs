//! Simultaneous complex root finding (Aberth-Ehrlich) with residual-based
//! stopping, Newton polish for simple roots, and multiplicity detection by
//! clustering.

use crate::places::Complex64;
use crate::{Error, Result};

const MAX_ITER: usize = 400;

fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Backward-error scale sum |a_i| |z|^i for the residual stopping rule.
fn residual_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    let az = z.norm();
    let mut scale = 0.0;
    let mut pow = 1.0;
    for c in coeffs {
        scale += c.norm() * pow;
        pow *= az;
    }
    scale.max(f64::MIN_POSITIVE)
}

/// All complex roots of `a_0 + a_1 x + ... + a_n x^n` (ascending
/// coefficients, nonzero leading term), unsorted and unpolished beyond the
/// solver tolerance. Exact zero trailing coefficients become exact roots
/// at the origin.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return if coeffs.is_empty() {
            Err(Error::invalid("zero polynomial has every root"))
        } else {
            Ok(vec![])
        };
    }
    let mut roots = Vec::new();
    // strip exact roots at 0
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    for _ in 0..zeros {
        roots.push(Complex64::new(0.0, 0.0));
    }
    let coeffs = &coeffs[zeros..];
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-coeffs[0] / coeffs[1]);
        return Ok(roots);
    }
    // initial guesses on a circle sized by the root-magnitude estimate
    let lead = coeffs[n].norm();
    let radius = coeffs
        .iter()
        .enumerate()
        .take(n)
        .map(|(i, c)| (c.norm() / lead).powf(1.0 / (n - i) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 1.2;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.43;
            radius * Complex64::new(theta.cos(), theta.sin())
        })
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all_done = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, z[k]);
            if p.norm() <= 1e-15 * residual_scale(coeffs, z[k]) {
                converged[k] = true;
                continue;
            }
            all_done = false;
            let newton = if dp.norm() > 0.0 { p / dp } else { p };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.norm() > 1e-300 {
                        repulsion += Complex64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-12 {
                newton / denom
            } else {
                newton
            };
            z[k] -= step;
            if !(z[k].re.is_finite() && z[k].im.is_finite()) {
                return Err(Error::numerical("Aberth iterate diverged to non-finite"));
            }
        }
        if all_done {
            break;
        }
    }
    for (k, done) in converged.iter().enumerate() {
        if !done {
            let (p, _) = eval_with_derivative(coeffs, z[k]);
            if p.norm() > 1e-10 * residual_scale(coeffs, z[k]) {
                return Err(Error::numerical(format!(
                    "root finder did not converge: |p(z)| = {:.3e} at z = {:.6}+{:.6}i",
                    p.norm(),
                    z[k].re,
                    z[k].im
                )));
            }
        }
    }
    roots.extend(z);
    Ok(roots)
}

/// Newton-polish a simple root to full double precision.
pub fn newton_polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
    }
    z
}

/// Greedy clustering of near-coincident roots: returns (centroid, count)
/// pairs; `radius` is relative to max(1, |centroid|).
pub fn cluster_roots(roots: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        match clusters
            .iter_mut()
            .find(|(c, _)| (r - *c).norm() <= radius * c.norm().max(1.0))
        {
            Some((c, count)) => {
                // running centroid
                let n = *count as f64;
                *c = (*c * n + r) / (n + 1.0);
                *count += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_real(mut roots: Vec<Complex64>) -> Vec<f64> {
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        roots.iter().map(|r| r.re).collect()
    }

    #[test]
    fn quadratic_and_cubic() {
        // x^2 - 1
        let roots = polynomial_roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rs = sorted_real(roots);
        assert!((rs[0] + 1.0).abs() < 1e-12 && (rs[1] - 1.0).abs() < 1e-12);
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let roots =
            polynomial_roots(&[c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rs = sorted_real(roots);
        for (r, want) in rs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - want).abs() < 1e-10);
        }
    }

    #[test]
    fn double_root_clusters() {
        // (x-1)^2
        let roots = polynomial_roots(&[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let clusters = cluster_roots(&roots, 1e-6);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].1, 2);
        assert!((clusters[0].0 - c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn roots_at_origin_are_exact() {
        // x^2 (x - 5)
        let roots =
            polynomial_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(-5.0, 0.0), c(1.0, 0.0)]).unwrap();
        let clusters = cluster_roots(&roots, 1e-8);
        assert_eq!(clusters.len(), 2);
        let zero = clusters.iter().find(|(c, _)| c.norm() < 1e-12).unwrap();
        assert_eq!(zero.1, 2);
    }

    #[test]
    fn roots_of_unity_high_degree() {
        // x^16 - 1: all roots on the unit circle
        let mut coeffs = vec![c(0.0, 0.0); 17];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[16] = c(1.0, 0.0);
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 16);
        for r in roots {
            let polished = newton_polish(&coeffs, r);
            assert!((polished.norm() - 1.0).abs() < 1e-12);
        }
    }
}
