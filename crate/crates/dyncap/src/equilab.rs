//! End-to-end equidistribution experiments: the Bilu unit-circle picture
//! for roots of unity, pseudo-equidistribution tables for families of small
//! points, and moment/discrepancy comparisons against reference measures.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Zero;
use serde::Serialize;

use crate::dynamics::DiscreteMeasure;
use crate::forms::{squaring_pair, HomogeneousPair};
use crate::global_heights::{adelic_pair_energy, AlgebraicPoint};
use crate::greens::{pair_energy, EnergyReport};
use crate::places::{Complex64, Place};
use crate::poly::QPoly;
use crate::{Error, Result};

/// Moments `m_k = sum w_i z_i^k` of a discrete measure against a reference.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k_max: u32,
    #[serde(serialize_with = "ser_complex_vec")]
    pub moments: Vec<Complex64>,
    #[serde(serialize_with = "ser_complex_vec")]
    pub reference_moments: Vec<Complex64>,
}

fn ser_complex_vec<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

#[derive(Debug, Clone)]
pub struct BiluReport {
    pub n: usize,
    pub cyclotomic: bool,
    pub moments: MomentReport,
    pub energy: EnergyReport,
}

/// Roots of x^n - 1 (or of the n-th cyclotomic polynomial): moments for
/// k = 1..k_max and the archimedean pair energy under phi = z^2, whose
/// Green's function is the unit-circle Arakelov kernel.
pub fn bilu_experiment(n: usize, use_cyclotomic: bool, k_max: u32) -> Result<BiluReport> {
    if n < 2 {
        return Err(Error::invalid("need n >= 2"));
    }
    let indices: Vec<usize> = if use_cyclotomic {
        (0..n).filter(|j| gcd(*j, n) == 1).collect()
    } else {
        (0..n).collect()
    };
    let count = indices.len();
    let points: Vec<crate::dynamics::ProjPoint> = indices
        .iter()
        .map(|&j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            crate::dynamics::ProjPoint::affine(th.cos(), th.sin())
        })
        .collect();
    let mut moments = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for &j in &indices {
            let th = 2.0 * std::f64::consts::PI * (j as u64 * k as u64) as f64 / n as f64;
            acc += Complex64::new(th.cos(), th.sin());
        }
        moments.push(acc / count as f64);
    }
    let reference = vec![Complex64::new(0.0, 0.0); k_max as usize];
    let energy = pair_energy(&squaring_pair(), &points, 1e-12)?;
    Ok(BiluReport {
        n: count,
        cyclotomic: use_cyclotomic,
        moments: MomentReport {
            k_max,
            moments,
            reference_moments: reference,
        },
        energy,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Built-in families of Galois-stable sets with canonical height tending
/// to zero.
#[derive(Debug, Clone)]
pub enum Family {
    /// Roots of the cyclotomic polynomials Phi_{2^m}, m in the range.
    CyclotomicTwoPower { m_min: u32, m_max: u32 },
    /// Full sets of n-th roots of unity (x^n - 1).
    FullRoots { ns: Vec<usize> },
    /// Backward orbits phi^(-k)(z0): each point has height h(z0)/d^k.
    BackwardOrbit {
        z0: BigRational,
        depth_min: u32,
        depth_max: u32,
    },
}

impl Family {
    /// Generate the defining polynomials (labels carry the parameters).
    pub fn generate(&self, f: &HomogeneousPair) -> Result<Vec<(String, AlgebraicPoint)>> {
        match self {
            Family::CyclotomicTwoPower { m_min, m_max } => {
                if *m_min < 2 || m_min > m_max {
                    return Err(Error::invalid("need 2 <= m_min <= m_max"));
                }
                (*m_min..=*m_max)
                    .map(|m| {
                        // Phi_{2^m} = x^(2^(m-1)) + 1
                        let half = 1usize << (m - 1);
                        let mut coeffs = vec![BigRational::zero(); half + 1];
                        coeffs[0] = BigRational::from(BigInt::from(1));
                        coeffs[half] = BigRational::from(BigInt::from(1));
                        Ok((
                            format!("Phi_{}", 1u64 << m),
                            AlgebraicPoint::new(&QPoly::new(coeffs))?,
                        ))
                    })
                    .collect()
            }
            Family::FullRoots { ns } => ns
                .iter()
                .map(|&n| {
                    if n < 2 {
                        return Err(Error::invalid("full root sets need n >= 2"));
                    }
                    let mut coeffs = vec![BigRational::zero(); n + 1];
                    coeffs[0] = BigRational::from(BigInt::from(-1));
                    coeffs[n] = BigRational::from(BigInt::from(1));
                    Ok((format!("mu_{n}"), AlgebraicPoint::new(&QPoly::new(coeffs))?))
                })
                .collect(),
            Family::BackwardOrbit {
                z0,
                depth_min,
                depth_max,
            } => {
                if *depth_min < 1 || depth_min > depth_max {
                    return Err(Error::invalid("need 1 <= depth_min <= depth_max"));
                }
                let f1 = f.f1().affine_t();
                let f2 = f.f2().affine_t();
                // P_0 = den(z0) x - num(z0); pullback multiplies degree by d
                let mut poly = QPoly::new(vec![
                    -BigRational::from(z0.numer().clone()),
                    BigRational::from(z0.denom().clone()),
                ]);
                let mut out = Vec::new();
                for depth in 1..=*depth_max {
                    poly = pullback_poly(&poly, &f1, &f2)?.squarefree_part();
                    if poly.degree().unwrap_or(0) < 2 {
                        return Err(Error::invalid(
                            "backward orbit degenerated to fewer than 2 points",
                        ));
                    }
                    if depth >= *depth_min {
                        out.push((format!("preimages_{depth}"), AlgebraicPoint::new(&poly)?));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// The vanishing locus of P(phi(x)) cleared of denominators:
/// sum_i c_i f2(x)^i f1(x)^(deg P - i).
fn pullback_poly(p: &QPoly, f1: &QPoly, f2: &QPoly) -> Result<QPoly> {
    let n = p
        .degree()
        .ok_or_else(|| Error::invalid("zero polynomial"))?;
    let mut f1_pow = vec![QPoly::one()];
    let mut f2_pow = vec![QPoly::one()];
    for k in 1..=n {
        f1_pow.push(f1_pow[k - 1].mul(f1));
        f2_pow.push(f2_pow[k - 1].mul(f2));
    }
    let mut acc = QPoly::zero();
    for (i, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&f2_pow[i].mul(&f1_pow[n - i]).scale(c));
    }
    Ok(acc)
}

/// One row of a pseudo-equidistribution table.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoEquiRow {
    pub label: String,
    pub n: usize,
    pub per_place: Vec<(String, f64)>,
    /// Global sum over all contributing places (equals two_h within error).
    pub global_sum: f64,
    pub two_h: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PseudoEquiTable {
    pub rows: Vec<PseudoEquiRow>,
}

/// Normalized pair energies of a family at every contributing place, with
/// the global identity column g_n = 2 h_phi.
pub fn pseudo_equi_sequence(
    f: &HomogeneousPair,
    family: &Family,
    places: Option<&[Place]>,
    tol: f64,
) -> Result<PseudoEquiTable> {
    let sets = family.generate(f)?;
    let mut rows = Vec::with_capacity(sets.len());
    for (label, set) in sets {
        let e = adelic_pair_energy(f, &set, tol)?;
        let per_place = e
            .per_place
            .iter()
            .filter(|(p, _)| places.is_none_or(|sel| sel.contains(p)))
            .map(|(p, v)| (p.to_string(), *v))
            .collect();
        rows.push(PseudoEquiRow {
            label,
            n: e.n,
            per_place,
            global_sum: e.g_n,
            two_h: e.two_h,
            error_bound: e.error_bound,
        });
    }
    Ok(PseudoEquiTable { rows })
}

/// Reference measures for weak-convergence diagnostics.
pub enum Reference<'a> {
    UnitCircle,
    Sample(&'a DiscreteMeasure),
}

/// Moment differences and binned radial/angular discrepancies between an
/// empirical measure and a reference.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub moment_diffs: Vec<f64>,
    pub max_moment_diff: f64,
    pub radial_discrepancy: f64,
    pub angular_discrepancy: f64,
}

const ANGULAR_BINS: usize = 32;
const RADIAL_EDGES: [f64; 5] = [1e-3, 1e-2, 1e-1, 0.5, f64::INFINITY];

fn angular_histogram(mu: &DiscreteMeasure) -> [f64; ANGULAR_BINS] {
    let mut bins = [0.0; ANGULAR_BINS];
    for (p, w) in &mu.atoms {
        if let crate::dynamics::ProjPoint::Affine(z) = p {
            if z.norm() > 0.0 {
                let frac = (z.arg() + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
                let idx = ((frac * ANGULAR_BINS as f64) as usize).min(ANGULAR_BINS - 1);
                bins[idx] += w;
            }
        }
    }
    bins
}

/// Mass per |log|z|| band (band 0 is the unit circle itself).
fn radial_histogram(mu: &DiscreteMeasure) -> [f64; RADIAL_EDGES.len()] {
    let mut bins = [0.0; RADIAL_EDGES.len()];
    for (p, w) in &mu.atoms {
        let r = match p {
            crate::dynamics::ProjPoint::Affine(z) => z.norm(),
            crate::dynamics::ProjPoint::Infinity => f64::INFINITY,
        };
        let dist = if r == 0.0 || r.is_infinite() {
            f64::INFINITY
        } else {
            r.ln().abs()
        };
        let idx = RADIAL_EDGES.iter().position(|e| dist <= *e).unwrap();
        bins[idx] += w;
    }
    bins
}

pub fn measure_comparison(
    empirical: &DiscreteMeasure,
    reference: &Reference,
    k_max: u32,
) -> ComparisonReport {
    let mut moment_diffs = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let m = empirical.moment(k);
        let r = match reference {
            Reference::UnitCircle => Complex64::new(0.0, 0.0),
            Reference::Sample(s) => s.moment(k),
        };
        moment_diffs.push((m - r).norm());
    }
    let max_moment_diff = moment_diffs.iter().cloned().fold(0.0, f64::max);
    let ang_emp = angular_histogram(empirical);
    let rad_emp = radial_histogram(empirical);
    let (ang_ref, rad_ref) = match reference {
        Reference::UnitCircle => {
            let ang = [1.0 / ANGULAR_BINS as f64; ANGULAR_BINS];
            let mut rad = [0.0; RADIAL_EDGES.len()];
            rad[0] = 1.0;
            (ang, rad)
        }
        Reference::Sample(s) => (angular_histogram(s), radial_histogram(s)),
    };
    let angular_discrepancy = ang_emp
        .iter()
        .zip(&ang_ref)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let radial_discrepancy = rad_emp
        .iter()
        .zip(&rad_ref)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ComparisonReport {
        moment_diffs,
        max_moment_diff,
        radial_discrepancy,
        angular_discrepancy,
    }
}

/// Two-sample moment test: the k-th moments must agree within
/// `n_sigma * sqrt(var_1/N_1 + var_2/N_2)` (empirical variances of z^k).
/// Returns the worst normalized deviation.
pub fn moment_sigma_distance(a: &DiscreteMeasure, b: &DiscreteMeasure, k_max: u32) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 1..=k_max {
        let (ma, va, na) = moment_and_variance(a, k);
        let (mb, vb, nb) = moment_and_variance(b, k);
        let sigma = (va / na + vb / nb).sqrt().max(1e-300);
        worst = worst.max((ma - mb).norm() / sigma);
    }
    worst
}

fn moment_and_variance(mu: &DiscreteMeasure, k: u32) -> (Complex64, f64, f64) {
    let m = mu.moment(k);
    let mut var = 0.0f64;
    let mut count = 0.0f64;
    for (p, w) in &mu.atoms {
        if let crate::dynamics::ProjPoint::Affine(z) = p {
            var += w * (z.powu(k) - m).norm_sqr();
            count += 1.0;
        }
    }
    (m, var, count.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ProjPoint;

    #[test]
    fn bilu_full_roots_of_unity() {
        let rep = bilu_experiment(8, false, 8).unwrap();
        // k = 1..7: exact cancellation; k = 8: all atoms to the 8th power are 1
        for k in 0..7 {
            assert!(rep.moments.moments[k].norm() <= 1e-12, "moment {k}");
        }
        assert!((rep.moments.moments[7] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let expected = -(8.0f64.ln()) / 7.0;
        assert!((rep.energy.normalized - expected).abs() < 1e-12);
    }

    #[test]
    fn bilu_cyclotomic_counts_primitives() {
        let rep = bilu_experiment(8, true, 4).unwrap();
        assert_eq!(rep.n, 4); // phi(8) = 4
    }

    #[test]
    fn cyclotomic_family_pseudo_equidistributes() {
        let f = squaring_pair();
        let family = Family::CyclotomicTwoPower { m_min: 2, m_max: 5 };
        let table = pseudo_equi_sequence(&f, &family, None, 1e-9).unwrap();
        assert_eq!(table.rows.len(), 4);
        let mut prev_arch = f64::INFINITY;
        for row in &table.rows {
            assert!(
                row.global_sum.abs() <= 1e-6,
                "{}: {}",
                row.label,
                row.global_sum
            );
            assert!(row.two_h.abs() <= 1e-9);
            let arch = row
                .per_place
                .iter()
                .find(|(p, _)| p == "arch")
                .map(|(_, v)| v.abs())
                .unwrap();
            assert!(arch <= prev_arch + 1e-12, "archimedean column not decaying");
            prev_arch = arch;
        }
    }

    #[test]
    fn full_roots_archimedean_column() {
        let f = squaring_pair();
        let family = Family::FullRoots { ns: vec![8, 12] };
        let table = pseudo_equi_sequence(&f, &family, None, 1e-9).unwrap();
        let row = &table.rows[0];
        let arch = row
            .per_place
            .iter()
            .find(|(p, _)| p == "arch")
            .map(|(_, v)| *v)
            .unwrap();
        assert!((arch + (8.0f64.ln()) / 7.0).abs() < 1e-9);
        // roots of unity have height 0, so every global sum vanishes
        for row in &table.rows {
            assert!(row.global_sum.abs() <= 1e-8, "{}: {}", row.label, row.global_sum);
            assert!(row.two_h.abs() <= 1e-9);
        }
    }

    #[test]
    fn backward_orbit_family_under_squaring() {
        let f = squaring_pair();
        let family = Family::BackwardOrbit {
            z0: BigRational::from(BigInt::from(2)),
            depth_min: 1,
            depth_max: 4,
        };
        let table = pseudo_equi_sequence(&f, &family, None, 1e-9).unwrap();
        // heights h(2)/2^k, so 2h = log(2)/2^(k-1)
        for (k, row) in table.rows.iter().enumerate() {
            let expected = 2.0 * 2.0f64.ln() / 2.0f64.powi(k as i32 + 1);
            assert!(
                (row.two_h - expected).abs() <= row.error_bound + 1e-9,
                "{}: {} vs {}",
                row.label,
                row.two_h,
                expected
            );
            assert!((row.global_sum - row.two_h).abs() <= row.error_bound + 1e-7);
        }
    }

    #[test]
    fn degenerate_families_rejected() {
        let f = squaring_pair();
        let family = Family::FullRoots { ns: vec![1] };
        assert!(pseudo_equi_sequence(&f, &family, None, 1e-9).is_err());
        let family = Family::CyclotomicTwoPower { m_min: 1, m_max: 3 };
        assert!(pseudo_equi_sequence(&f, &family, None, 1e-9).is_err());
    }

    #[test]
    fn comparison_identities() {
        let mu = DiscreteMeasure::new(vec![
            (ProjPoint::affine(1.0, 0.0), 0.5),
            (ProjPoint::affine(-1.0, 0.0), 0.5),
        ])
        .unwrap();
        let rep = measure_comparison(&mu, &Reference::Sample(&mu), 6);
        assert_eq!(rep.max_moment_diff, 0.0);
        assert_eq!(rep.radial_discrepancy, 0.0);
        assert_eq!(rep.angular_discrepancy, 0.0);
        // point mass vs circle: |delta m_1| = |z0|
        let pm = DiscreteMeasure::point_mass(ProjPoint::affine(0.25, 0.0));
        let rep = measure_comparison(&pm, &Reference::UnitCircle, 3);
        assert!((rep.moment_diffs[0] - 0.25).abs() < 1e-15);
    }
}
