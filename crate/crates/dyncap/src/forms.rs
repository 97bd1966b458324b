//! Homogeneous polynomial pairs `F = (F1, F2)` lifting rational maps on P^1:
//! exact resultants, scaling, composition, and the per-place growth bounds
//! `C_v ||z||^d <= ||F(z)||_v <= D_v ||z||^d`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use serde::Deserialize;
use std::str::FromStr;

use crate::arith::valuation_rat;
use crate::places::{rational_to_f64, Complex64, Place, Vec2};
use crate::poly::{bareiss_det, pow_rat, rational_det, QPoly};
use crate::{Error, Result};

/// A homogeneous form of degree d in (x, y); `coeffs[i]` multiplies
/// `x^(d-i) y^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryForm {
    degree: usize,
    coeffs: Vec<BigRational>,
}

impl BinaryForm {
    pub fn new(degree: usize, coeffs: Vec<BigRational>) -> Result<BinaryForm> {
        if coeffs.len() != degree + 1 {
            return Err(Error::invalid(format!(
                "degree-{degree} form needs {} coefficients, got {}",
                degree + 1,
                coeffs.len()
            )));
        }
        Ok(BinaryForm { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval_q(&self, x: &BigRational, y: &BigRational) -> BigRational {
        // Horner in y/x would divide; evaluate with running powers instead
        let mut xp = vec![BigRational::one()];
        let mut yp = vec![BigRational::one()];
        for _ in 0..self.degree {
            xp.push(xp.last().unwrap() * x);
            yp.push(yp.last().unwrap() * y);
        }
        let mut acc = BigRational::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += c * &xp[self.degree - i] * &yp[i];
            }
        }
        acc
    }

    pub fn eval_c(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut xp = vec![Complex64::new(1.0, 0.0)];
        let mut yp = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..self.degree {
            xp.push(xp.last().unwrap() * x);
            yp.push(yp.last().unwrap() * y);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += Complex64::new(rational_to_f64(c), 0.0) * xp[self.degree - i] * yp[i];
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> BinaryForm {
        BinaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    fn mul(&self, other: &BinaryForm) -> BinaryForm {
        let d = self.degree + other.degree;
        let mut out = vec![BigRational::zero(); d + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        BinaryForm {
            degree: d,
            coeffs: out,
        }
    }

    fn constant_one() -> BinaryForm {
        BinaryForm {
            degree: 0,
            coeffs: vec![BigRational::one()],
        }
    }

    /// Substitute (x, y) -> (g1, g2); the result has degree d * deg(g).
    fn compose(&self, g1: &BinaryForm, g2: &BinaryForm) -> BinaryForm {
        assert_eq!(g1.degree, g2.degree);
        let mut g1_pow = vec![BinaryForm::constant_one()];
        let mut g2_pow = vec![BinaryForm::constant_one()];
        for k in 1..=self.degree {
            g1_pow.push(g1_pow[k - 1].mul(g1));
            g2_pow.push(g2_pow[k - 1].mul(g2));
        }
        let out_deg = self.degree * g1.degree;
        let mut out = BinaryForm {
            degree: out_deg,
            coeffs: vec![BigRational::zero(); out_deg + 1],
        };
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = g1_pow[self.degree - i].mul(&g2_pow[i]).scale(c);
            for (k, t) in term.coeffs.iter().enumerate() {
                out.coeffs[k] += t;
            }
        }
        out
    }

    /// Dehomogenization F(1, t) as a polynomial in t.
    pub fn affine_t(&self) -> QPoly {
        QPoly::new(self.coeffs.clone())
    }

    /// Dehomogenization F(u, 1) as a polynomial in u.
    pub fn affine_u(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().rev().cloned().collect())
    }
}

/// Per-place constants of the two-sided growth bound, plus the derived
/// radii and the telescoping-tail constant `C = max(log D_v, -log C_v)`.
#[derive(Debug, Clone)]
pub struct PlaceBounds {
    pub place: Place,
    pub c_lower: f64,
    pub d_upper: f64,
    /// r_v = D_v^(-1/(d-1)): the ball B(r_v) maps into itself.
    pub r_small: f64,
    /// R_v = C_v^(-1/(d-1)): the complement of B(R_v) maps into itself.
    pub r_big: f64,
    /// Tail constant for the height iteration error bound C/(d^n (d-1)).
    pub tail_constant: f64,
}

/// Finite-place clearing data: `p^(-shift) * F` has p-integral coefficients
/// with unit content, and its resultant has valuation `cleared_res_val >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct ClearingData {
    pub prime: u64,
    /// min coefficient valuation of (F1, F2) jointly.
    pub shift: i64,
    /// v_p(Res(p^(-shift) F)) = v_p(Res(F)) - 2d * shift.
    pub cleared_res_val: i64,
}

impl ClearingData {
    /// Good reduction after clearing: the reduced map has full degree d.
    pub fn is_good(&self) -> bool {
        self.cleared_res_val == 0
    }
}

/// A lift of a degree-d rational map: two degree-d forms with nonzero
/// resultant, exact rational coefficients.
#[derive(Debug, Clone)]
pub struct HomogeneousPair {
    degree: usize,
    f1: BinaryForm,
    f2: BinaryForm,
    resultant: BigRational,
    // the archimedean grid search is not cheap; heights call it per point
    arch_bounds: std::sync::OnceLock<(f64, f64)>,
}

impl PartialEq for HomogeneousPair {
    fn eq(&self, other: &Self) -> bool {
        self.f1 == other.f1 && self.f2 == other.f2
    }
}

impl Eq for HomogeneousPair {}

impl HomogeneousPair {
    pub fn new(f1: BinaryForm, f2: BinaryForm) -> Result<HomogeneousPair> {
        if f1.degree != f2.degree {
            return Err(Error::invalid("F1 and F2 must have the same degree"));
        }
        let degree = f1.degree;
        if degree < 2 {
            return Err(Error::invalid(format!(
                "degree {degree} < 2 is unsupported"
            )));
        }
        let resultant = homogeneous_resultant(&f1, &f2);
        if resultant.is_zero() {
            return Err(Error::invalid(
                "F1 and F2 share a common factor (zero resultant)",
            ));
        }
        Ok(HomogeneousPair {
            degree,
            f1,
            f2,
            resultant,
            arch_bounds: std::sync::OnceLock::new(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn f1(&self) -> &BinaryForm {
        &self.f1
    }

    pub fn f2(&self) -> &BinaryForm {
        &self.f2
    }

    /// The exact homogeneous resultant Res(F1, F2).
    pub fn resultant(&self) -> &BigRational {
        &self.resultant
    }

    /// Apply F to a point of C_v^2.
    pub fn apply(&self, z: &Vec2) -> Vec2 {
        match z {
            Vec2::Q(x, y) => Vec2::Q(self.f1.eval_q(x, y), self.f2.eval_q(x, y)),
            Vec2::C(x, y) => Vec2::C(self.f1.eval_c(*x, *y), self.f2.eval_c(*x, *y)),
        }
    }

    /// Multiply both forms by a nonzero scalar (the lifted map is unchanged;
    /// the resultant scales by gamma^(2d)).
    pub fn scale(&self, gamma: &BigRational) -> Result<HomogeneousPair> {
        if gamma.is_zero() {
            return Err(Error::invalid("scale factor must be nonzero"));
        }
        let f1 = self.f1.scale(gamma);
        let f2 = self.f2.scale(gamma);
        let resultant = &self.resultant * pow_rat(gamma, 2 * self.degree as u32);
        Ok(HomogeneousPair {
            degree: self.degree,
            f1,
            f2,
            resultant,
            arch_bounds: std::sync::OnceLock::new(),
        })
    }

    /// Exact n-fold composition F^(n), degree d^n.
    pub fn iterate(&self, n: u32) -> Result<HomogeneousPair> {
        if n == 0 {
            return Err(Error::invalid("iterate needs n >= 1"));
        }
        let mut g1 = self.f1.clone();
        let mut g2 = self.f2.clone();
        for _ in 1..n {
            let next1 = self.f1.compose(&g1, &g2);
            let next2 = self.f2.compose(&g1, &g2);
            g1 = next1;
            g2 = next2;
        }
        let degree = g1.degree;
        if degree > 4096 {
            return Err(Error::resource(format!(
                "iterate degree {degree} exceeds the exact-arithmetic cap"
            )));
        }
        let resultant = homogeneous_resultant(&g1, &g2);
        Ok(HomogeneousPair {
            degree,
            f1: g1,
            f2: g2,
            resultant,
            arch_bounds: std::sync::OnceLock::new(),
        })
    }

    /// Finite-place clearing data; see [`ClearingData`].
    pub fn clearing_data(&self, p: u64) -> ClearingData {
        let shift = self
            .f1
            .coeffs
            .iter()
            .chain(self.f2.coeffs.iter())
            .filter_map(|c| valuation_rat(p, c))
            .min()
            .expect("a nonzero form has a nonzero coefficient");
        let v_res = valuation_rat(p, &self.resultant).expect("resultant nonzero");
        ClearingData {
            prime: p,
            shift,
            cleared_res_val: v_res - 2 * self.degree as i64 * shift,
        }
    }

    /// The two-sided growth constants of ||F(z)||_v against ||z||_v^d.
    ///
    /// Finite places are exact (Res-based). Archimedean bounds come from a
    /// certified grid search over the max-norm unit sphere, except for
    /// diagonal pairs (a x^d, b y^d) where the extrema are closed-form.
    pub fn place_bounds(&self, place: Place) -> Result<PlaceBounds> {
        let d = self.degree;
        let (c_lower, d_upper) = match place {
            Place::Finite(p) => {
                let cd = self.clearing_data(p);
                let lp = p as f64;
                // C_v = p^-(v_res' + m), D_v = p^-m for gamma = p^-m clearing
                (
                    lp.powi(-((cd.cleared_res_val + cd.shift) as i32)),
                    lp.powi(-(cd.shift as i32)),
                )
            }
            Place::Arch => self.arch_bounds()?,
        };
        if !(c_lower > 0.0 && c_lower <= d_upper) {
            return Err(Error::numerical(format!(
                "invalid growth bounds C={c_lower}, D={d_upper}"
            )));
        }
        let e = -1.0 / (d as f64 - 1.0);
        let tail = (d_upper.ln()).max(-c_lower.ln()).max(0.0);
        Ok(PlaceBounds {
            place,
            c_lower,
            d_upper,
            r_small: d_upper.powf(e),
            r_big: c_lower.powf(e),
            tail_constant: tail,
        })
    }

    fn diagonal_coeffs(&self) -> Option<(BigRational, BigRational)> {
        let d = self.degree;
        let diag1 = self.f1.coeffs[1..].iter().all(|c| c.is_zero());
        let diag2 = self.f2.coeffs[..d].iter().all(|c| c.is_zero());
        if diag1 && diag2 {
            Some((self.f1.coeffs[0].clone(), self.f2.coeffs[d].clone()))
        } else {
            None
        }
    }

    fn arch_bounds(&self) -> Result<(f64, f64)> {
        if let Some(cached) = self.arch_bounds.get() {
            return Ok(*cached);
        }
        let computed = self.arch_bounds_uncached()?;
        Ok(*self.arch_bounds.get_or_init(|| computed))
    }

    fn arch_bounds_uncached(&self) -> Result<(f64, f64)> {
        if let Some((a, b)) = self.diagonal_coeffs() {
            // ||F(z)|| = max(|a||x|^d, |b||y|^d): extrema over the sphere
            // are min(|a|,|b|) and max(|a|,|b|)
            let a = rational_to_f64(&a).abs();
            let b = rational_to_f64(&b).abs();
            return Ok((a.min(b), a.max(b)));
        }
        let sum_abs = |f: &BinaryForm| -> f64 {
            f.coeffs
                .iter()
                .map(|c| rational_to_f64(&c.abs()))
                .sum::<f64>()
        };
        let s1 = sum_abs(&self.f1);
        let s2 = sum_abs(&self.f2);
        let d_upper = s1.max(s2) * (1.0 + 1e-12);
        // Lipschitz constant for F_i(1, y) and F_i(x, 1) on |.| <= 1.1
        let lip = (self.degree as f64) * s1.max(s2) * 1.1f64.powi(self.degree as i32 - 1);
        let mut n_grid = 256usize;
        for _ in 0..4 {
            let min_eval = self.sphere_grid_min(n_grid);
            let delta = std::f64::consts::SQRT_2 / (n_grid as f64 - 1.0);
            let c_lower = min_eval - lip * delta;
            if c_lower > 0.0 {
                return Ok((c_lower, d_upper));
            }
            n_grid *= 2;
        }
        Err(Error::numerical(
            "archimedean lower growth bound did not certify; the map is too pinched",
        ))
    }

    /// Minimum of ||F|| over grid points covering the two faces
    /// {(1, y) : |y| <= 1} and {(x, 1) : |x| <= 1} of the unit sphere.
    fn sphere_grid_min(&self, n: usize) -> f64 {
        let cf1: Vec<Complex64> = self
            .f1
            .coeffs
            .iter()
            .map(|c| cc(rational_to_f64(c)))
            .collect();
        let cf2: Vec<Complex64> = self
            .f2
            .coeffs
            .iter()
            .map(|c| cc(rational_to_f64(c)))
            .collect();
        let d = self.degree;
        let eval = |x: Complex64, y: Complex64| -> f64 {
            let mut xp = Complex64::new(1.0, 0.0);
            let mut pow_x = vec![Complex64::new(1.0, 0.0); d + 1];
            for item in pow_x.iter_mut().skip(1) {
                xp *= x;
                *item = xp;
            }
            let mut yp = Complex64::new(1.0, 0.0);
            let mut pow_y = vec![Complex64::new(1.0, 0.0); d + 1];
            for item in pow_y.iter_mut().skip(1) {
                yp *= y;
                *item = yp;
            }
            let mut v1 = Complex64::new(0.0, 0.0);
            let mut v2 = Complex64::new(0.0, 0.0);
            for i in 0..=d {
                v1 += cf1[i] * pow_x[d - i] * pow_y[i];
                v2 += cf2[i] * pow_x[d - i] * pow_y[i];
            }
            v1.norm().max(v2.norm())
        };
        let one = Complex64::new(1.0, 0.0);
        let mut min = f64::INFINITY;
        let h = 2.0 / (n as f64 - 1.0);
        for iu in 0..n {
            let u = -1.0 + h * iu as f64;
            for iv in 0..n {
                let v = -1.0 + h * iv as f64;
                let w = Complex64::new(u, v);
                min = min.min(eval(one, w)).min(eval(w, one));
            }
        }
        min
    }

    /// The (t+1)d square matrix whose rows are the coefficient vectors of
    /// `x^i y^j F1^k F2^l` (i+j = d-1, k+l = t) in the monomial basis
    /// `x^m, x^(m-1) y, ..., y^m`, m = td + d - 1.
    pub fn det_matrix(&self, t: usize) -> Result<Vec<Vec<BigRational>>> {
        if t < 1 {
            return Err(Error::invalid("det_matrix needs t >= 1"));
        }
        let d = self.degree;
        let size = (t + 1) * d;
        if size > 64 {
            return Err(Error::resource(format!(
                "det_matrix size {size} exceeds the exact-arithmetic cap"
            )));
        }
        let mut f1_pow = vec![BinaryForm::constant_one()];
        let mut f2_pow = vec![BinaryForm::constant_one()];
        for k in 1..=t {
            f1_pow.push(f1_pow[k - 1].mul(&self.f1));
            f2_pow.push(f2_pow[k - 1].mul(&self.f2));
        }
        let mut rows = Vec::with_capacity(size);
        for k in (0..=t).rev() {
            let base = f1_pow[k].mul(&f2_pow[t - k]);
            for i in (0..d).rev() {
                // multiply by x^i y^(d-1-i): shift within the degree-m basis
                let j = d - 1 - i;
                let mut row = vec![BigRational::zero(); size];
                for (s, c) in base.coeffs.iter().enumerate() {
                    row[s + j] = c.clone();
                }
                rows.push(row);
            }
        }
        Ok(rows)
    }

    /// |Det| of [`det_matrix`], exact.
    pub fn det_matrix_abs_det(&self, t: usize) -> Result<BigRational> {
        Ok(rational_det(&self.det_matrix(t)?).abs())
    }
}

fn cc(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Homogeneous resultant of two degree-d forms: the 2d x 2d Sylvester-style
/// determinant on the coefficient vectors (zero leading coefficients kept),
/// normalized so that Res(x^d, y^d) = +1. With this sign convention the
/// composition law Res(F o G) = Res(F)^(deg G) Res(G)^(deg F)^2 holds on
/// the nose; the raw row layout alone is off by (-1)^d. The capacity
/// formulas only ever use |Res|.
pub fn homogeneous_resultant(f1: &BinaryForm, f2: &BinaryForm) -> BigRational {
    assert_eq!(f1.degree, f2.degree);
    let d = f1.degree;
    let size = 2 * d;
    // clear denominators: Res scales by (lcm)^d per form
    let mut scale = BigRational::one();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(size);
    for form in [f1, f2] {
        let mut lcm = BigInt::one();
        for c in &form.coeffs {
            lcm = num::Integer::lcm(&lcm, c.denom());
        }
        scale *= pow_rat(&BigRational::new(BigInt::one(), lcm.clone()), d as u32);
        let ints: Vec<BigInt> = form
            .coeffs
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        for shift in 0..d {
            let mut row = vec![BigInt::zero(); size];
            for (k, c) in ints.iter().rev().enumerate() {
                row[shift + k] = c.clone();
            }
            rows.push(row);
        }
    }
    let det = scale * BigRational::from(bareiss_det(rows));
    if d % 2 == 1 {
        -det
    } else {
        det
    }
}

/// Exponent in `Res(F^(n)) = Res(F)^e`: e = (d^(2n-1) - d^(n-1)) / (d - 1).
pub fn iterate_resultant_exponent(d: u32, n: u32) -> BigInt {
    let d = BigInt::from(d);
    let num = d.pow(2 * n - 1) - d.pow(n - 1);
    num / (d - BigInt::one())
}

/// Homogenize `phi(z) = num(z) / den(z)` to a degree-d pair, d = max degree.
///
/// The numerator and denominator are reduced first; a common factor or a
/// reduced degree below 2 is rejected.
pub fn lift_rational_map(num: &QPoly, den: &QPoly) -> Result<HomogeneousPair> {
    if num.is_zero() || den.is_zero() {
        return Err(Error::invalid("numerator and denominator must be nonzero"));
    }
    let g = num.gcd(den);
    let (num, den) = if g.degree() == Some(0) {
        (num.clone(), den.clone())
    } else {
        (num.div_rem(&g).0, den.div_rem(&g).0)
    };
    let d = num.degree().unwrap().max(den.degree().unwrap());
    if d < 2 {
        return Err(Error::invalid(format!(
            "map has degree {d} after reduction; need d >= 2"
        )));
    }
    // z = z1/z0: a polynomial f of degree <= d homogenizes to
    // sum_i f_i x^(d-i) y^i
    let homogenize = |f: &QPoly| -> BinaryForm {
        let mut coeffs = vec![BigRational::zero(); d + 1];
        for (i, c) in f.coeffs().iter().enumerate() {
            coeffs[i] = c.clone();
        }
        BinaryForm { degree: d, coeffs }
    };
    HomogeneousPair::new(homogenize(&den), homogenize(&num))
}

/// JSON map spec: either an affine `{"num": [...], "den": [...]}` with
/// coefficient strings in ascending degree, or a homogeneous
/// `{"F1": [...], "F2": [...], "d": n}` (d may be omitted; it is inferred
/// from the coefficient count).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Affine {
        num: Vec<String>,
        den: Vec<String>,
    },
    Homogeneous {
        #[serde(rename = "F1")]
        f1: Vec<String>,
        #[serde(rename = "F2")]
        f2: Vec<String>,
        #[serde(default)]
        d: Option<usize>,
    },
}

fn parse_rationals(strs: &[String]) -> Result<Vec<BigRational>> {
    strs.iter()
        .map(|s| {
            BigRational::from_str(s.trim())
                .map_err(|e| Error::invalid(format!("bad rational {s:?}: {e}")))
        })
        .collect()
}

impl MapSpec {
    pub fn parse(json: &str) -> Result<MapSpec> {
        serde_json::from_str(json).map_err(|e| Error::invalid(format!("bad map spec: {e}")))
    }

    pub fn to_pair(&self) -> Result<HomogeneousPair> {
        match self {
            MapSpec::Affine { num, den } => {
                let num = QPoly::new(parse_rationals(num)?);
                let den = QPoly::new(parse_rationals(den)?);
                lift_rational_map(&num, &den)
            }
            MapSpec::Homogeneous { f1, f2, d } => {
                let d = match d {
                    Some(d) => *d,
                    None if !f1.is_empty() => f1.len() - 1,
                    None => return Err(Error::invalid("empty coefficient list")),
                };
                let f1 = BinaryForm::new(d, parse_rationals(f1)?)?;
                let f2 = BinaryForm::new(d, parse_rationals(f2)?)?;
                HomogeneousPair::new(f1, f2)
            }
        }
    }
}

/// The lift of phi(z) = z^2: F = (x^2, y^2).
pub fn squaring_pair() -> HomogeneousPair {
    let f1 = BinaryForm::new(
        2,
        vec![BigRational::one(), BigRational::zero(), BigRational::zero()],
    )
    .unwrap();
    let f2 = BinaryForm::new(
        2,
        vec![BigRational::zero(), BigRational::zero(), BigRational::one()],
    )
    .unwrap();
    HomogeneousPair::new(f1, f2).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::traits::ToPrimitive;

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn pair_i64(f1: &[i64], f2: &[i64]) -> HomogeneousPair {
        let d = f1.len() - 1;
        let f1 = BinaryForm::new(d, f1.iter().map(|&c| rat(c)).collect()).unwrap();
        let f2 = BinaryForm::new(d, f2.iter().map(|&c| rat(c)).collect()).unwrap();
        HomogeneousPair::new(f1, f2).unwrap()
    }

    #[test]
    fn lift_examples() {
        // phi = z^2
        let f = lift_rational_map(&QPoly::from_i64(&[0, 0, 1]), &QPoly::from_i64(&[1])).unwrap();
        assert_eq!(f.f1().coeffs(), &[rat(1), rat(0), rat(0)]);
        assert_eq!(f.f2().coeffs(), &[rat(0), rat(0), rat(1)]);
        // phi = z^2 + 1 -> (x^2, x^2 + y^2)
        let f = lift_rational_map(&QPoly::from_i64(&[1, 0, 1]), &QPoly::from_i64(&[1])).unwrap();
        assert_eq!(f.f2().coeffs(), &[rat(1), rat(0), rat(1)]);
        // common factor z reduces z^2/z to degree 1: rejected
        let err = lift_rational_map(&QPoly::from_i64(&[0, 0, 1]), &QPoly::from_i64(&[0, 1]));
        assert!(err.is_err());
    }

    #[test]
    fn resultant_hand_checked() {
        // the 4x4 Sylvester determinants expanded by hand
        assert_eq!(*pair_i64(&[1, 0, 0], &[0, 0, 1]).resultant(), rat(1));
        assert_eq!(*pair_i64(&[2, 0, 0], &[0, 0, 1]).resultant(), rat(4));
        assert_eq!(pair_i64(&[1, 0, 0], &[1, 0, 1]).resultant().abs(), rat(1));
        // (z^2-1)/z -> (xy, y^2 - x^2)
        assert_eq!(pair_i64(&[0, 1, 0], &[-1, 0, 1]).resultant().abs(), rat(1));
    }

    #[test]
    fn scale_law_exact() {
        let f = pair_i64(&[1, 0, 0], &[0, 0, 1]);
        assert_eq!(*f.scale(&rat(3)).unwrap().resultant(), rat(81));
        let g = pair_i64(&[2, 0, 0], &[0, 0, 1]);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(
            *g.scale(&half).unwrap().resultant(),
            BigRational::new(BigInt::from(1), BigInt::from(4))
        );
        assert_eq!(f.scale(&rat(1)).unwrap(), f);
        assert!(f.scale(&rat(0)).is_err());
    }

    #[test]
    fn iterate_power_law() {
        let f = pair_i64(&[1, 0, 0], &[0, 0, 1]);
        let f2 = f.iterate(2).unwrap();
        assert_eq!(f2.degree(), 4);
        assert_eq!(*f2.resultant(), rat(1));
        let g = pair_i64(&[2, 0, 0], &[0, 0, 1]);
        let g2 = g.iterate(2).unwrap();
        // exponent (d^3 - d)/(d-1) = 6 at d = 2
        assert_eq!(*g2.resultant(), rat(4096));
        assert_eq!(iterate_resultant_exponent(2, 2).to_i64(), Some(6));
        assert_eq!(g.iterate(1).unwrap(), g);
    }

    #[test]
    fn place_bounds_examples() {
        let f = pair_i64(&[1, 0, 0], &[0, 0, 1]);
        for place in [Place::Finite(7), Place::Arch] {
            let b = f.place_bounds(place).unwrap();
            assert_eq!(b.c_lower, 1.0);
            assert_eq!(b.d_upper, 1.0);
            assert_eq!(b.r_small, 1.0);
            assert_eq!(b.r_big, 1.0);
            assert_eq!(b.tail_constant, 0.0);
        }
        let g = pair_i64(&[2, 0, 0], &[0, 0, 1]);
        let b = g.place_bounds(Place::Finite(2)).unwrap();
        assert_eq!(b.c_lower, 0.25);
        assert_eq!(b.d_upper, 1.0);
    }

    #[test]
    fn place_bounds_sandwich_on_random_points() {
        use rand::Rng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        use rand::SeedableRng;
        let maps = [
            pair_i64(&[1, 0, 0], &[1, 0, 1]),
            pair_i64(&[2, 1, 0], &[0, 3, 1]),
            pair_i64(&[1, 0, 0, 0], &[0, 1, 0, 1]),
        ];
        for f in &maps {
            let d = f.degree() as i32;
            for place in [Place::Arch, Place::Finite(2), Place::Finite(3)] {
                let b = f.place_bounds(place).unwrap();
                for _ in 0..300 {
                    let z = Vec2::rational(
                        BigRational::new(
                            BigInt::from(rng.gen_range(-8i64..=8)),
                            BigInt::from(rng.gen_range(1i64..=8)),
                        ),
                        BigRational::new(
                            BigInt::from(rng.gen_range(-8i64..=8)),
                            BigInt::from(rng.gen_range(1i64..=8)),
                        ),
                    );
                    if z.is_origin() {
                        continue;
                    }
                    let nz = crate::places::sup_norm(place, &z).unwrap();
                    if !(0.5..=2.0).contains(&nz) {
                        continue;
                    }
                    let nfz = crate::places::sup_norm(place, &f.apply(&z)).unwrap();
                    let lo = b.c_lower * nz.powi(d) * (1.0 - 1e-9);
                    let hi = b.d_upper * nz.powi(d) * (1.0 + 1e-9);
                    assert!(
                        lo <= nfz && nfz <= hi,
                        "bounds violated at {place}: {lo} <= {nfz} <= {hi}"
                    );
                }
            }
        }
    }

    #[test]
    fn det_matrix_hand_checked() {
        // (2x^2, y^2), t=1: rows {2x^3, 2x^2 y, x y^2, y^3} up to order; |det| = 4
        let g = pair_i64(&[2, 0, 0], &[0, 0, 1]);
        assert_eq!(g.det_matrix_abs_det(1).unwrap(), rat(4));
        let f = pair_i64(&[1, 0, 0], &[0, 0, 1]);
        assert_eq!(f.det_matrix_abs_det(1).unwrap(), rat(1));
        // t = 2: |det| = |Res|^3 = 1
        assert_eq!(f.det_matrix_abs_det(2).unwrap(), rat(1));
    }

    #[test]
    fn map_spec_round_trip() {
        let spec = MapSpec::parse(r#"{"num":["1","0","1"],"den":["1"]}"#).unwrap();
        let f = spec.to_pair().unwrap();
        assert_eq!(f.degree(), 2);
        let spec = MapSpec::parse(r#"{"F1":["2","0","0"],"F2":["0","0","1"],"d":2}"#).unwrap();
        let f = spec.to_pair().unwrap();
        assert_eq!(*f.resultant(), rat(4));
        assert!(MapSpec::parse(r#"{"nonsense":true}"#).is_err());
        // fractional coefficients parse exactly
        let spec = MapSpec::parse(r#"{"num":["-1/2","0","1"],"den":["1"]}"#).unwrap();
        assert!(spec.to_pair().is_ok());
    }
}
