//! Global canonical heights `h_phi = sum_v H_{F,v}` for rational points,
//! the iterated-pushforward height for algebraic points, the global pairing
//! identity `sum_v g_v(z,w) = h_phi(z) + h_phi(w)`, and the adelic
//! decomposition of Galois-orbit pair energies.

use std::collections::HashSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::Integer;

use crate::arith::{factorize, rational_prime_support, valuation_rat};
use crate::dynamics::ProjPoint;
use crate::forms::HomogeneousPair;
use crate::greens::{green_rat, log_cv, pair_energy, RatPoint};
use crate::local_heights::local_height;
use crate::places::{ln_big, log_abs_value, Complex64, Place, Vec2};
use crate::poly::{pushforward_resultant, QPoly};
use crate::roots::{newton_polish, polynomial_roots};
use crate::{Error, Result};

/// An algebraic point (or Galois-stable point set) given by a squarefree
/// integer polynomial, with polished complex embeddings of its roots.
#[derive(Debug, Clone)]
pub struct AlgebraicPoint {
    minpoly: QPoly,
    degree: usize,
    roots: Vec<Complex64>,
}

impl AlgebraicPoint {
    /// Build from a defining polynomial (any rational coefficients; it is
    /// normalized to primitive integer form). Repeated roots are rejected.
    pub fn new(poly: &QPoly) -> Result<AlgebraicPoint> {
        let degree = poly
            .degree()
            .ok_or_else(|| Error::invalid("zero polynomial"))?;
        if degree == 0 {
            return Err(Error::invalid("constant polynomial defines no point"));
        }
        let (_, ints) = poly.primitive_integer();
        let minpoly = QPoly::new(ints.iter().map(|c| BigRational::from(c.clone())).collect());
        if minpoly.gcd(&minpoly.derivative()).degree() != Some(0) {
            return Err(Error::invalid(
                "defining polynomial has repeated roots; pass its squarefree part",
            ));
        }
        let coeffs = scaled_complex_coeffs(&minpoly);
        let mut roots = polynomial_roots(&coeffs)?;
        for r in roots.iter_mut() {
            *r = newton_polish(&coeffs, *r);
        }
        let point = AlgebraicPoint {
            minpoly,
            degree,
            roots,
        };
        point.check_vieta()?;
        Ok(point)
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<AlgebraicPoint> {
        AlgebraicPoint::new(&QPoly::from_i64(coeffs))
    }

    pub fn minpoly(&self) -> &QPoly {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn conjugates(&self) -> Vec<ProjPoint> {
        self.roots.iter().map(|r| ProjPoint::Affine(*r)).collect()
    }

    /// Roots must reproduce the coefficients through symmetric functions.
    ///
    /// The reconstruction multiplies the linear factors as a balanced tree
    /// and the tolerance scales with the largest intermediate coefficient
    /// (which bounds the conditioning of this direction).
    fn check_vieta(&self) -> Result<()> {
        let lead = self.minpoly.leading().unwrap();
        let lead_f = crate::places::rational_to_f64(lead);
        let scale: f64 = self
            .minpoly
            .coeffs()
            .iter()
            .map(|c| crate::places::rational_to_f64(&c.abs()))
            .fold(0.0, f64::max);
        if !scale.is_finite() {
            // coefficients beyond f64 range: the scaled root computation is
            // still fine, but the direct Vieta check is meaningless
            return Ok(());
        }
        let mut factors: Vec<Vec<Complex64>> = self
            .roots
            .iter()
            .map(|r| vec![-r, Complex64::new(1.0, 0.0)])
            .collect();
        let mut worst_intermediate = 1.0f64;
        while factors.len() > 1 {
            let mut next = Vec::with_capacity(factors.len().div_ceil(2));
            let mut it = factors.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    None => next.push(a),
                    Some(b) => {
                        let mut prod = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
                        for (i, x) in a.iter().enumerate() {
                            for (j, y) in b.iter().enumerate() {
                                prod[i + j] += x * y;
                            }
                        }
                        for c in &prod {
                            worst_intermediate = worst_intermediate.max(c.norm());
                        }
                        next.push(prod);
                    }
                }
            }
            factors = next;
        }
        let poly = factors
            .pop()
            .unwrap_or_else(|| vec![Complex64::new(1.0, 0.0)]);
        let tol = 1e-9 * scale.max(1.0).max(lead_f.abs() * worst_intermediate);
        for (i, c) in poly.iter().enumerate() {
            let got = *c * lead_f;
            let want = crate::places::rational_to_f64(&self.minpoly.coeff(i));
            if (got.re - want).abs().max(got.im.abs()) > tol {
                return Err(Error::numerical(format!(
                    "roots fail to reproduce coefficient {i}: {} vs {want}",
                    got.re
                )));
            }
        }
        Ok(())
    }
}

/// Complex coefficients scaled by the maximum coefficient magnitude, safe
/// for polynomials whose integer coefficients overflow f64.
fn scaled_complex_coeffs(p: &QPoly) -> Vec<Complex64> {
    let lns: Vec<f64> = p
        .coeffs()
        .iter()
        .map(|c| {
            if c.is_zero() {
                f64::NEG_INFINITY
            } else {
                log_abs_value(Place::Arch, c).unwrap()
            }
        })
        .collect();
    let max_ln = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    p.coeffs()
        .iter()
        .zip(&lns)
        .map(|(c, ln)| {
            if c.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                let mag = (ln - max_ln).exp();
                Complex64::new(if c.is_negative() { -mag } else { mag }, 0.0)
            }
        })
        .collect()
}

/// Logarithmic Weil height of a rational number (projective height of
/// [den : num] in lowest terms).
pub fn weil_height_rational(t: &BigRational) -> f64 {
    let num = t.numer().abs().to_biguint().unwrap();
    let den = t.denom().abs().to_biguint().unwrap();
    if num.is_zero() {
        return 0.0;
    }
    ln_big(&num).max(ln_big(&den)).max(0.0)
}

pub fn weil_height_point(z: &RatPoint) -> f64 {
    match z {
        RatPoint::Infinity => 0.0,
        RatPoint::Affine(t) => weil_height_rational(t),
    }
}

/// Weil height of an algebraic point in Mahler-measure form:
/// `(1/N)(log|lead| + sum_i log+ |r_i|)`, averaging over all conjugates.
pub fn weil_height_algebraic(z: &AlgebraicPoint) -> f64 {
    mahler_log(&z.minpoly, &z.roots) / z.degree as f64
}

fn mahler_log(p: &QPoly, roots: &[Complex64]) -> f64 {
    let lead = p.leading().unwrap();
    if p.degree() == Some(1) {
        // exact: root -c0/c1, measure max(|c0|, |c1|)
        let c0 = p.coeff(0).abs();
        let c1 = p.coeff(1).abs();
        let m = if c0 > c1 { c0 } else { c1 };
        return log_abs_value(Place::Arch, &m).unwrap();
    }
    let mut acc = log_abs_value(Place::Arch, &lead.abs()).unwrap();
    for r in roots {
        let n = r.norm();
        if n > 1.0 {
            acc += n.ln();
        }
    }
    acc
}

/// Global canonical height with certified error and per-place breakdown.
#[derive(Debug, Clone)]
pub struct GlobalHeightResult {
    pub value: f64,
    pub error_bound: f64,
    /// Per-place contributions (empty for the limit-based algebraic path,
    /// which has no local decomposition).
    pub place_breakdown: Vec<(Place, f64)>,
}

/// Primes where local contributions can fail to vanish on coprime lifts:
/// divisors of the resultant (numerator or denominator) and of any
/// coefficient denominator. Complete: elsewhere the cleared pair is
/// p-integral with unit resultant and zero clearing shift.
pub fn effective_primes(f: &HomogeneousPair) -> Result<Vec<u64>> {
    let mut primes: HashSet<u64> = HashSet::new();
    for p in rational_prime_support(f.resultant())? {
        primes.insert(p);
    }
    for c in f.f1().coeffs().iter().chain(f.f2().coeffs()) {
        if c.is_zero() {
            continue;
        }
        let den = c.denom().abs().to_biguint().unwrap();
        if !den.is_one() {
            for (p, _) in factorize(&den)? {
                primes.insert(p);
            }
        }
    }
    let mut out: Vec<u64> = primes.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Coprime integer lift of a rational projective point.
pub fn coprime_lift(z: &RatPoint) -> (BigInt, BigInt) {
    match z {
        RatPoint::Infinity => (BigInt::zero(), BigInt::one()),
        // t = a/b in lowest terms lifts to (b, a)
        RatPoint::Affine(t) => (t.denom().clone(), t.numer().clone()),
    }
}

/// Canonical height of a rational point: the sum of homogeneous local
/// heights of the coprime lift over the archimedean place and the
/// effective primes (all other contributions vanish exactly).
pub fn canonical_height_rational(
    f: &HomogeneousPair,
    z: &RatPoint,
    tol: f64,
) -> Result<GlobalHeightResult> {
    let (x, y) = coprime_lift(z);
    let lift = Vec2::Q(BigRational::from(x), BigRational::from(y));
    let mut places = vec![Place::Arch];
    places.extend(effective_primes(f)?.into_iter().map(Place::Finite));
    let per_tol = tol / places.len() as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut breakdown = Vec::with_capacity(places.len());
    for place in places {
        let h = local_height(f, place, &lift, per_tol)?;
        value += h.value;
        error += h.error_bound;
        breakdown.push((place, h.value));
    }
    Ok(GlobalHeightResult {
        value,
        error_bound: error,
        place_breakdown: breakdown,
    })
}

/// `sum_v C_v/(d-1)`: the global bound on |h - h_phi| from the per-place
/// telescoping constants.
pub fn height_difference_bound(f: &HomogeneousPair) -> Result<f64> {
    let d = f.degree() as f64;
    let mut total = f.place_bounds(Place::Arch)?.tail_constant;
    for p in effective_primes(f)? {
        total += f.place_bounds(Place::Finite(p))?.tail_constant;
    }
    Ok(total / (d - 1.0))
}

/// Canonical height of an algebraic point by the defining limit: push the
/// defining polynomial forward n times through exact resultants, take the
/// Weil height, divide by d^n. The error is B/d^n for the global height
/// difference bound B, plus the floating-point slack of the Mahler form.
pub fn canonical_height_algebraic(
    f: &HomogeneousPair,
    z: &AlgebraicPoint,
    n_max: u32,
    tol: f64,
) -> Result<GlobalHeightResult> {
    let d = f.degree() as f64;
    let bound = height_difference_bound(f)?;
    let mut n_target = 0u32;
    while bound / d.powi(n_target as i32) > tol && n_target < n_max {
        n_target += 1;
    }
    let f1 = f.f1().affine_t();
    let f2 = f.f2().affine_t();
    let mut poly = z.minpoly.clone();
    let mut degree = z.degree;
    for step in 0..n_target {
        let pushed = pushforward_resultant(&poly, &f1, &f2)?;
        if pushed.is_zero() {
            return Err(Error::numerical("pushforward collapsed to zero"));
        }
        let sf = pushed.squarefree_part();
        match sf.degree() {
            Some(0) | None => {
                // every conjugate mapped to infinity: the orbit is done
                return Ok(GlobalHeightResult {
                    value: 0.0,
                    error_bound: bound / d.powi(step as i32 + 1),
                    place_breakdown: vec![],
                });
            }
            Some(deg) => {
                degree = deg;
                poly = sf;
            }
        }
        if poly
            .coeffs()
            .iter()
            .map(|c| c.numer().bits())
            .max()
            .unwrap_or(0)
            > 1 << 22
        {
            return Err(Error::resource(
                "pushforward coefficients exceeded the size cap",
            ));
        }
    }
    let h_final = if n_target == 0 {
        weil_height_algebraic(z)
    } else if degree == 1 {
        let c0 = poly.coeff(0);
        let c1 = poly.coeff(1);
        weil_height_rational(&(-c0 / c1))
    } else {
        let coeffs = scaled_complex_coeffs(&poly);
        let mut roots = polynomial_roots(&coeffs)?;
        for r in roots.iter_mut() {
            *r = newton_polish(&coeffs, *r);
        }
        mahler_log(&poly, &roots) / degree as f64
    };
    let value = h_final / d.powi(n_target as i32);
    let float_slack = 1e-11 + 1e-14 * h_final.abs();
    Ok(GlobalHeightResult {
        value,
        error_bound: bound / d.powi(n_target as i32) + float_slack,
        place_breakdown: vec![],
    })
}

/// Apply phi to a rational projective point, exactly.
pub fn apply_rat(f: &HomogeneousPair, z: &RatPoint) -> RatPoint {
    let (x, y) = coprime_lift(z);
    let x = BigRational::from(x);
    let y = BigRational::from(y);
    let v1 = f.f1().eval_q(&x, &y);
    let v2 = f.f2().eval_q(&x, &y);
    if v1.is_zero() {
        RatPoint::Infinity
    } else {
        RatPoint::Affine(v2 / v1)
    }
}

/// Exact preperiodicity test for rational points: iterate coprime integer
/// representatives with cycle detection. Points whose Weil height ever
/// exceeds the global bound B (preperiodic orbits satisfy h <= B since
/// h_phi = 0 on them) are wandering.
pub fn is_preperiodic_rational(f: &HomogeneousPair, z: &RatPoint) -> Result<bool> {
    let bound = height_difference_bound(f)?;
    let mut seen: HashSet<(BigInt, BigInt)> = HashSet::new();
    let mut cur = z.clone();
    for _ in 0..10_000 {
        let key = canonical_pair(&cur);
        if !seen.insert(key) {
            return Ok(true);
        }
        cur = apply_rat(f, &cur);
        if weil_height_point(&cur) > bound + 1e-9 {
            return Ok(false);
        }
    }
    Err(Error::resource(
        "orbit neither cycled nor escaped within 10^4 steps",
    ))
}

fn canonical_pair(z: &RatPoint) -> (BigInt, BigInt) {
    let (x, y) = coprime_lift(z);
    let g = x.gcd(&y);
    let (mut x, mut y) = if g.is_zero() {
        (x, y)
    } else {
        (&x / &g, &y / &g)
    };
    let flip = if x.is_zero() {
        y.is_negative()
    } else {
        x.is_negative()
    };
    if flip {
        x = -x;
        y = -y;
    }
    (x, y)
}

/// |sum_v g_{phi,v}(z, w) - h_phi(z) - h_phi(w)|, the global pairing
/// identity for distinct rational points. The sum runs over the archimedean
/// place, the effective primes of the map, and the primes dividing the
/// wedge of the coprime lifts; everywhere else g vanishes exactly.
pub fn pairing_identity_residual(
    f: &HomogeneousPair,
    z: &RatPoint,
    w: &RatPoint,
    tol: f64,
) -> Result<f64> {
    if z == w {
        return Err(Error::domain("pairing identity needs distinct points"));
    }
    let mut primes: HashSet<u64> = effective_primes(f)?.into_iter().collect();
    let (z0, z1) = coprime_lift(z);
    let (w0, w1) = coprime_lift(w);
    let wedge = &z0 * &w1 - &z1 * &w0;
    debug_assert!(!wedge.is_zero());
    for (p, _) in factorize(&wedge.abs().to_biguint().unwrap())? {
        primes.insert(p);
    }
    let mut green_sum = green_rat(f, Place::Arch, z, w, tol)?.value;
    for p in primes {
        green_sum += green_rat(f, Place::Finite(p), z, w, tol)?.value;
    }
    let hz = canonical_height_rational(f, z, tol)?;
    let hw = canonical_height_rational(f, w, tol)?;
    Ok((green_sum - hz.value - hw.value).abs())
}

/// Adelic pair energy of a Galois-stable conjugate set, with the
/// archimedean part evaluated numerically over the complex embeddings and
/// every finite contribution computed exactly from valuations of the
/// symmetric root-difference product and the Gauss norm of the defining
/// polynomial.
#[derive(Debug, Clone)]
pub struct AdelicPairEnergy {
    pub n: usize,
    pub per_place: Vec<(Place, f64)>,
    /// The global normalized energy g_n = sum of the per-place column.
    pub g_n: f64,
    /// Twice the canonical height of the set, computed independently;
    /// the global identity says g_n = two_h.
    pub two_h: f64,
    pub error_bound: f64,
}

pub fn adelic_pair_energy(
    f: &HomogeneousPair,
    set: &AlgebraicPoint,
    tol: f64,
) -> Result<AdelicPairEnergy> {
    let n = set.degree;
    if n < 2 {
        return Err(Error::invalid("need at least two conjugates"));
    }
    let d = f.degree() as i64;
    let nn = (n * (n - 1)) as f64;
    // archimedean column over the complex embeddings
    let arch = pair_energy(f, &set.conjugates(), tol)?;
    let mut per_place = vec![(Place::Arch, arch.normalized)];
    let mut error = arch.error_bound;
    // finite columns: -log|W|_p + 2(n-1) S_p + n(n-1) log c_p, where
    // W = prod_{i != j}(r_i - r_j) and S_p = sum_i H_{F,p}(1, r_i)
    let w_product = set.minpoly.root_difference_product()?;
    let mut primes: HashSet<u64> = effective_primes(f)?.into_iter().collect();
    for p in rational_prime_support(&w_product)? {
        primes.insert(p);
    }
    let mut primes: Vec<u64> = primes.into_iter().collect();
    primes.sort_unstable();
    let lead = set.minpoly.leading().unwrap();
    for p in primes {
        let cd = f.clearing_data(p);
        if !cd.is_good() {
            return Err(Error::invalid(format!(
                "finite-place conjugate sums need good reduction after clearing; \
                 the map is genuinely bad at p = {p}"
            )));
        }
        let ln_p = (p as f64).ln();
        // Gauss: prod_i max(1, |r_i|_p) = 1/|lead|_p for a primitive
        // integer polynomial, so the height sum is exact
        let v_lead = valuation_rat(p, lead).unwrap();
        let shift_term = -(cd.shift as f64) * ln_p / (d as f64 - 1.0);
        let s_p = (v_lead as f64) * ln_p + n as f64 * shift_term;
        let v_w = valuation_rat(p, &w_product).unwrap();
        let neg_log_w = (v_w as f64) * ln_p;
        let total = neg_log_w + 2.0 * (n as f64 - 1.0) * s_p + nn * log_cv(f, Place::Finite(p));
        if total != 0.0 {
            per_place.push((Place::Finite(p), total / nn));
        }
    }
    let g_n = per_place.iter().map(|(_, v)| v).sum();
    let h = canonical_height_algebraic(f, set, 24, tol)?;
    error += 2.0 * h.error_bound;
    Ok(AdelicPairEnergy {
        n,
        per_place,
        g_n,
        two_h: 2.0 * h.value,
        error_bound: error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{lift_rational_map, squaring_pair};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn z2p1() -> HomogeneousPair {
        lift_rational_map(&QPoly::from_i64(&[1, 0, 1]), &QPoly::from_i64(&[1])).unwrap()
    }

    #[test]
    fn weil_heights() {
        assert!((weil_height_rational(&rat(2, 1)) - 2.0f64.ln()).abs() < 1e-15);
        assert!((weil_height_rational(&rat(-3, 7)) - 7.0f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height_rational(&rat(0, 1)), 0.0);
        // sqrt(2): (1/2) log 2
        let p = AlgebraicPoint::from_i64(&[-2, 0, 1]).unwrap();
        assert!((weil_height_algebraic(&p) - 0.5 * 2.0f64.ln()).abs() < 1e-12);
        // root of unity: 0
        let p = AlgebraicPoint::from_i64(&[1, 0, 0, 0, 1]).unwrap(); // Phi_8
        assert!(weil_height_algebraic(&p).abs() < 1e-13);
    }

    #[test]
    fn algebraic_point_validation() {
        assert!(AlgebraicPoint::from_i64(&[1, 2, 1]).is_err()); // (x+1)^2
        assert!(AlgebraicPoint::from_i64(&[5]).is_err());
        let p = AlgebraicPoint::from_i64(&[-2, 0, 1]).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.roots().len(), 2);
    }

    #[test]
    fn canonical_height_of_two_under_squaring() {
        let f = squaring_pair();
        let h = canonical_height_rational(&f, &RatPoint::from_i64(2), 1e-12).unwrap();
        assert!((h.value - 2.0f64.ln()).abs() < 1e-12);
        assert!(h.error_bound <= 1e-12);
        // breakdown sums to the value
        let sum: f64 = h.place_breakdown.iter().map(|(_, v)| v).sum();
        assert!((sum - h.value).abs() < 1e-15);
        // fixed point
        let h = canonical_height_rational(&f, &RatPoint::from_i64(1), 1e-12).unwrap();
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn functional_equation_rational() {
        use crate::forms::BinaryForm;
        use rand::{Rng, SeedableRng};
        let pair = |f1: &[i64], f2: &[i64]| {
            let d = f1.len() - 1;
            HomogeneousPair::new(
                BinaryForm::new(d, f1.iter().map(|&c| rat(c, 1)).collect()).unwrap(),
                BinaryForm::new(d, f2.iter().map(|&c| rat(c, 1)).collect()).unwrap(),
            )
            .unwrap()
        };
        let maps = [
            crate::forms::squaring_pair(),
            z2p1(),
            pair(&[0, 1, 0], &[-1, 0, 1]),      // (z^2-1)/z
            pair(&[2, 0, 0], &[1, 0, 3]),       // (3z^2+1)/2
            pair(&[1, 0, 0, 0], &[2, 0, 0, 1]), // z^3 + 2
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for k in 0..50 {
            let f = &maps[k % maps.len()];
            let d = f.degree() as f64;
            let z = RatPoint::Affine(rat(rng.gen_range(-30..=30), rng.gen_range(1..=30)));
            let hz = canonical_height_rational(f, &z, 1e-11).unwrap();
            // nonnegativity up to the certified error
            assert!(hz.value >= -hz.error_bound);
            let hfz = canonical_height_rational(f, &apply_rat(f, &z), 1e-11).unwrap();
            let residual = (hfz.value - d * hz.value).abs();
            assert!(
                residual <= 2.0 * (hfz.error_bound + d * hz.error_bound).max(1e-11),
                "functional equation residual {residual}"
            );
        }
    }

    #[test]
    fn algebraic_height_of_sqrt2() {
        let f = squaring_pair();
        let p = AlgebraicPoint::from_i64(&[-2, 0, 1]).unwrap();
        let h = canonical_height_algebraic(&f, &p, 12, 1e-12).unwrap();
        assert!((h.value - 0.5 * 2.0f64.ln()).abs() <= h.error_bound + 1e-12);
        // roots of unity are preperiodic: height within the error bound
        let p = AlgebraicPoint::from_i64(&[1, 0, 0, 0, 1]).unwrap();
        let h = canonical_height_algebraic(&f, &p, 12, 1e-12).unwrap();
        assert!(h.value.abs() <= h.error_bound);
    }

    #[test]
    fn n_max_zero_is_plain_weil_height() {
        let f = z2p1();
        let p = AlgebraicPoint::from_i64(&[-2, 0, 1]).unwrap();
        let h = canonical_height_algebraic(&f, &p, 0, 1e-12).unwrap();
        assert!((h.value - weil_height_algebraic(&p)).abs() < 1e-13);
        assert!(h.error_bound >= height_difference_bound(&f).unwrap());
    }

    #[test]
    fn preperiodic_detection() {
        let f = squaring_pair();
        assert!(is_preperiodic_rational(&f, &RatPoint::from_i64(1)).unwrap());
        assert!(is_preperiodic_rational(&f, &RatPoint::from_i64(0)).unwrap());
        assert!(is_preperiodic_rational(&f, &RatPoint::Infinity).unwrap());
        assert!(!is_preperiodic_rational(&f, &RatPoint::from_i64(2)).unwrap());
        assert!(!is_preperiodic_rational(&f, &RatPoint::Affine(rat(1, 2))).unwrap());
        let g = z2p1();
        assert!(!is_preperiodic_rational(&g, &RatPoint::from_i64(1)).unwrap());
        assert!(is_preperiodic_rational(&g, &RatPoint::Infinity).unwrap());
    }

    #[test]
    fn detected_preperiodic_points_have_zero_height() {
        use crate::forms::BinaryForm;
        let pair = |f1: &[i64], f2: &[i64]| {
            let d = f1.len() - 1;
            HomogeneousPair::new(
                BinaryForm::new(d, f1.iter().map(|&c| rat(c, 1)).collect()).unwrap(),
                BinaryForm::new(d, f2.iter().map(|&c| rat(c, 1)).collect()).unwrap(),
            )
            .unwrap()
        };
        let maps = [
            crate::forms::squaring_pair(),
            z2p1(),
            pair(&[0, 1, 0], &[-1, 0, 1]),
            pair(&[2, 0, 0], &[1, 0, 3]),
            pair(&[1, 0, 0, 0], &[2, 0, 0, 1]),
        ];
        let candidates: Vec<RatPoint> = (-3..=3)
            .map(RatPoint::from_i64)
            .chain([RatPoint::Infinity, RatPoint::Affine(rat(1, 2))])
            .collect();
        let mut found = 0;
        for f in &maps {
            for z in &candidates {
                if is_preperiodic_rational(f, z).unwrap() {
                    let h = canonical_height_rational(f, z, 1e-11).unwrap();
                    assert!(
                        h.value.abs() <= h.error_bound + 1e-12,
                        "preperiodic point {z:?} has height {}",
                        h.value
                    );
                    found += 1;
                }
            }
        }
        assert!(found >= 5, "expected several preperiodic points, found {found}");
    }

    #[test]
    fn pairing_identity_examples() {
        let f = squaring_pair();
        // z=0, w=inf: both sides 0
        let r = pairing_identity_residual(&f, &RatPoint::from_i64(0), &RatPoint::Infinity, 1e-10)
            .unwrap();
        assert!(r < 1e-12);
        // z=2, w=inf: both sides log 2
        let r = pairing_identity_residual(&f, &RatPoint::from_i64(2), &RatPoint::Infinity, 1e-10)
            .unwrap();
        assert!(r < 1e-12);
        let g = z2p1();
        let r = pairing_identity_residual(
            &g,
            &RatPoint::Affine(rat(3, 2)),
            &RatPoint::Affine(rat(-1, 5)),
            1e-10,
        )
        .unwrap();
        assert!(r <= 1e-8, "residual {r}");
    }

    #[test]
    fn pairing_identity_across_a_bad_prime() {
        // phi = 2 z^2 lifts to (x^2, 2 y^2) with Res = 4: the 2-adic local
        // heights go through the bad-reduction iteration, and the global
        // identity must still close
        use crate::forms::BinaryForm;
        let f = HomogeneousPair::new(
            BinaryForm::new(2, vec![rat(1, 1), rat(0, 1), rat(0, 1)]).unwrap(),
            BinaryForm::new(2, vec![rat(0, 1), rat(0, 1), rat(2, 1)]).unwrap(),
        )
        .unwrap();
        let pairs = [
            (RatPoint::from_i64(3), RatPoint::from_i64(5)),
            (RatPoint::Affine(rat(1, 2)), RatPoint::from_i64(-1)),
            (RatPoint::from_i64(2), RatPoint::Infinity),
        ];
        for (z, w) in pairs {
            let r = pairing_identity_residual(&f, &z, &w, 1e-10).unwrap();
            assert!(r <= 1e-8, "residual {r} for {z:?}, {w:?}");
        }
    }

    #[test]
    fn adelic_energy_cyclotomic() {
        // Phi_8 under z^2: archimedean part cancels the 2-adic part exactly
        let f = squaring_pair();
        let set = AlgebraicPoint::from_i64(&[1, 0, 0, 0, 1]).unwrap();
        let e = adelic_pair_energy(&f, &set, 1e-9).unwrap();
        assert!(e.g_n.abs() < 1e-6, "g_n = {}", e.g_n);
        assert!(e.two_h.abs() < 1e-9);
        // x^2 - 2: g_n = 2 h = log 2
        let set = AlgebraicPoint::from_i64(&[-2, 0, 1]).unwrap();
        let e = adelic_pair_energy(&f, &set, 1e-9).unwrap();
        assert!((e.g_n - 2.0f64.ln()).abs() < 1e-8, "g_n = {}", e.g_n);
        assert!((e.two_h - 2.0f64.ln()).abs() < 1e-8);
        // singleton rejected
        let single = AlgebraicPoint::from_i64(&[-2, 1]).unwrap();
        assert!(adelic_pair_energy(&f, &single, 1e-9).is_err());
    }
}
