//! Univariate polynomials over Q: exact arithmetic, gcd, resultants, and
//! the pushforward resultant used to iterate minimal polynomials.
//!
//! Coefficients are arbitrary-precision rationals stored in ascending
//! order with no trailing zeros. Determinants are computed fraction-free
//! (Bareiss) over the integers after clearing denominators.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::Integer;

use crate::places::{rational_to_f64, Complex64};
use crate::{Error, Result};

/// A polynomial in one variable with rational coefficients, ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> QPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> QPoly {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> QPoly {
        QPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> QPoly {
        QPoly::new(vec![c])
    }

    pub fn from_i64(coeffs: &[i64]) -> QPoly {
        QPoly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from(BigInt::from(c)))
                .collect(),
        )
    }

    /// x^k
    pub fn monomial(k: usize) -> QPoly {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = BigRational::one();
        QPoly::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Complex64::new(rational_to_f64(c), 0.0);
        }
        acc
    }

    pub fn complex_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| Complex64::new(rational_to_f64(c), 0.0))
            .collect()
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        QPoly::new(out)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) - other.coeff(k));
        }
        QPoly::new(out)
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from(BigInt::from(k)))
                .collect(),
        )
    }

    /// Euclidean division; panics only if `div` is zero.
    pub fn div_rem(&self, div: &QPoly) -> (QPoly, QPoly) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.degree().unwrap();
        let lead_inv = BigRational::one() / div.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let q = rem.last().unwrap() * &lead_inv;
            if !q.is_zero() {
                for (j, c) in div.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * c;
                }
                quo[k] = q;
            }
            rem.pop();
        }
        (QPoly::new(quo), QPoly::new(rem))
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading().unwrap().clone();
        a.scale(&(BigRational::one() / lead))
    }

    /// Largest squarefree divisor (same roots, multiplicity one).
    pub fn squarefree_part(&self) -> QPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Primitive integer form: returns (content, integer coefficients) with
    /// `self = content * primitive` and the primitive gcd-1 with positive
    /// leading coefficient.
    pub fn primitive_integer(&self) -> (BigRational, Vec<BigInt>) {
        if self.is_zero() {
            return (BigRational::zero(), vec![]);
        }
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den_lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        let prim: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
        (BigRational::new(g, den_lcm), prim)
    }

    /// Resultant Res(self, other), exact.
    pub fn resultant(&self, other: &QPoly) -> BigRational {
        let n = match self.degree() {
            Some(n) => n,
            None => return BigRational::zero(),
        };
        let m = match other.degree() {
            Some(m) => m,
            None => return BigRational::zero(),
        };
        if n == 0 {
            return pow_rat(&self.coeffs[0], m as u32);
        }
        if m == 0 {
            return pow_rat(&other.coeffs[0], n as u32);
        }
        let (cf, fi) = self.primitive_integer();
        let (cg, gi) = other.primitive_integer();
        let det = sylvester_det(&fi, &gi);
        pow_rat(&cf, m as u32) * pow_rat(&cg, n as u32) * BigRational::from(det)
    }

    /// `prod_{i != j} (r_i - r_j)` over the roots of a squarefree
    /// polynomial, as an exact rational: Res(P, P') / lc(P)^(2 deg - 1).
    pub fn root_difference_product(&self) -> Result<BigRational> {
        let n = self
            .degree()
            .ok_or_else(|| Error::invalid("zero polynomial"))?;
        if n < 2 {
            return Err(Error::invalid("need degree >= 2 for pair products"));
        }
        let res = self.resultant(&self.derivative());
        if res.is_zero() {
            return Err(Error::invalid("polynomial has repeated roots"));
        }
        let lead = self.leading().unwrap();
        Ok(res / pow_rat(lead, (2 * n - 1) as u32))
    }
}

pub fn pow_rat(x: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Sylvester resultant of two integer polynomials (ascending coefficients,
/// nonzero leading terms) by fraction-free elimination.
fn sylvester_det(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let n = f.len() - 1;
    let m = g.len() - 1;
    let size = n + m;
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    // m rows of f-shifts, then n rows of g-shifts, descending-coefficient layout
    for i in 0..m {
        for (k, c) in f.iter().rev().enumerate() {
            mat[i][i + k] = c.clone();
        }
    }
    for i in 0..n {
        for (k, c) in g.iter().rev().enumerate() {
            mat[m + i][i + k] = c.clone();
        }
    }
    bareiss_det(mat)
}

/// Fraction-free determinant of an integer matrix (Bareiss). All interior
/// divisions are exact.
pub fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact determinant of a rational matrix: clear denominators row by row,
/// run Bareiss over the integers, divide the scaling back out.
pub fn rational_det(a: &[Vec<BigRational>]) -> BigRational {
    let n = a.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut scale = BigRational::one();
    let mut int_rows = Vec::with_capacity(n);
    for row in a {
        let mut lcm = BigInt::one();
        for c in row {
            lcm = lcm.lcm(c.denom());
        }
        scale *= BigRational::new(BigInt::one(), lcm.clone());
        int_rows.push(
            row.iter()
                .map(|c| c.numer() * (&lcm / c.denom()))
                .collect::<Vec<BigInt>>(),
        );
    }
    scale * BigRational::from(bareiss_det(int_rows))
}

/// Resultant in z of `p(z)` and `w*f1(z) - f2(z)`, as a polynomial in w.
///
/// This is the defining polynomial of the image of the roots of `p` under
/// `phi = f2/f1` (with multiplicities). Computed by evaluating the
/// univariate resultant at deg(p)+1 integer values of w and interpolating;
/// the result has degree <= deg(p).
pub fn pushforward_resultant(p: &QPoly, f1: &QPoly, f2: &QPoly) -> Result<QPoly> {
    let n = p
        .degree()
        .ok_or_else(|| Error::invalid("zero polynomial"))?;
    if n == 0 {
        return Err(Error::invalid("constant polynomial has no roots"));
    }
    let mut nodes = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let w = BigRational::from(BigInt::from(j as i64));
        let g = f1.scale(&w).sub(f2);
        values.push(p.resultant(&g));
        nodes.push(w);
    }
    Ok(lagrange_interpolate(&nodes, &values))
}

/// Lagrange interpolation through distinct rational nodes.
pub fn lagrange_interpolate(nodes: &[BigRational], values: &[BigRational]) -> QPoly {
    assert_eq!(nodes.len(), values.len());
    let mut acc = QPoly::zero();
    for (i, (xi, yi)) in nodes.iter().zip(values).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = QPoly::one();
        let mut denom = BigRational::one();
        for (j, xj) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&QPoly::new(vec![-xj.clone(), BigRational::one()]));
            denom *= xi - xj;
        }
        acc = acc.add(&basis.scale(&(yi / denom)));
    }
    acc
}
