//! Normalized absolute values on Q.
//!
//! A place is either the archimedean absolute value or the p-adic one for a
//! prime p, normalized so that the product formula `prod_v |x|_v = 1` holds
//! for nonzero rational x. The base field is Q throughout, so every local
//! degree is 1 and `|x|_p = p^(-v_p(x))`.

use num::bigint::BigUint;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use num::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{self, is_prime};
use crate::{Error, Result};

pub type Complex64 = Complex<f64>;

/// A place of Q: the archimedean absolute value or a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Arch,
    Finite(u64),
}

impl Place {
    /// Construct the finite place attached to a prime, rejecting composites.
    pub fn finite(p: u64) -> Result<Place> {
        if !is_prime(&BigUint::from(p)) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        Ok(Place::Finite(p))
    }

    pub fn is_arch(&self) -> bool {
        matches!(self, Place::Arch)
    }

    /// Residue size q_v: e at the (real) archimedean place, p at p.
    pub fn residue_size(&self) -> f64 {
        match self {
            Place::Arch => std::f64::consts::E,
            Place::Finite(p) => *p as f64,
        }
    }

    /// Local degree [Q_v : Q_v], always 1 over Q. Kept for completeness.
    pub fn local_degree(&self) -> u32 {
        1
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Arch => write!(f, "arch"),
            Place::Finite(p) => write!(f, "p:{p}"),
        }
    }
}

// Wire format: "arch" or {"p": 5}.
impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Arch => s.serialize_str("arch"),
            Place::Finite(p) => {
                use serde::ser::SerializeMap;
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("p", p)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Prime { p: u64 },
        }
        match Raw::deserialize(d)? {
            Raw::Name(s) if s == "arch" => Ok(Place::Arch),
            Raw::Name(s) => Err(D::Error::custom(format!("unknown place {s:?}"))),
            Raw::Prime { p } => Place::finite(p).map_err(D::Error::custom),
        }
    }
}

/// `|x|_v` of a rational, as a double. Exact valuation arithmetic at finite
/// places; `|0|_v = 0` everywhere.
pub fn abs_value(place: Place, x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match place {
        Place::Arch => {
            let a = x.numer().abs().to_f64().unwrap_or(f64::INFINITY)
                / x.denom().abs().to_f64().unwrap_or(f64::INFINITY);
            a
        }
        Place::Finite(p) => {
            let v = arith::valuation_rat(p, x).expect("x nonzero");
            (p as f64).powi(-(v as i32))
        }
    }
}

/// `log |x|_v` of a nonzero rational. At finite places this is
/// `-v_p(x) log p`, computed from the exact valuation.
pub fn log_abs_value(place: Place, x: &BigRational) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::domain("log|0|_v is -infinity"));
    }
    Ok(match place {
        Place::Arch => {
            // ln(num) - ln(den) stays finite for huge integers where the
            // direct quotient would overflow
            ln_big(&x.numer().abs().to_biguint().unwrap())
                - ln_big(&x.denom().abs().to_biguint().unwrap())
        }
        Place::Finite(p) => {
            let v = arith::valuation_rat(p, x).unwrap();
            -(v as f64) * (p as f64).ln()
        }
    })
}

/// Natural log of a positive big integer without overflow.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 52 {
        return (n.to_f64().unwrap()).ln();
    }
    let shift = bits - 52;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Sum of `log |x|_v` over the archimedean place and every prime dividing
/// numerator or denominator. The product formula says this is 0; the return
/// value is the floating-point residual.
pub fn product_formula_check(x: &BigRational) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::invalid("product formula needs x != 0"));
    }
    let mut total = log_abs_value(Place::Arch, x)?;
    for p in arith::rational_prime_support(x)? {
        total += log_abs_value(Place::Finite(p), x)?;
    }
    Ok(total)
}

/// A point of C_v^2: exact rational coordinates (usable at every place) or
/// complex double coordinates (archimedean only).
#[derive(Debug, Clone)]
pub enum Vec2 {
    Q(BigRational, BigRational),
    C(Complex64, Complex64),
}

impl Vec2 {
    pub fn rational(x: BigRational, y: BigRational) -> Vec2 {
        Vec2::Q(x, y)
    }

    pub fn complex(x: Complex64, y: Complex64) -> Vec2 {
        Vec2::C(x, y)
    }

    pub fn is_origin(&self) -> bool {
        match self {
            Vec2::Q(x, y) => x.is_zero() && y.is_zero(),
            Vec2::C(x, y) => x.norm_sqr() == 0.0 && y.norm_sqr() == 0.0,
        }
    }

    /// Coordinates as complex doubles (always possible).
    pub fn to_complex(&self) -> (Complex64, Complex64) {
        match self {
            Vec2::Q(x, y) => (
                Complex64::new(rational_to_f64(x), 0.0),
                Complex64::new(rational_to_f64(y), 0.0),
            ),
            Vec2::C(x, y) => (*x, *y),
        }
    }

    /// Minimum of the two coordinate valuations at p (None if both zero);
    /// `||z||_p = p^(-min_valuation)`.
    pub fn min_valuation(&self, p: u64) -> Result<Option<i64>> {
        match self {
            Vec2::Q(x, y) => {
                let vx = arith::valuation_rat(p, x);
                let vy = arith::valuation_rat(p, y);
                Ok(match (vx, vy) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (Some(a), None) | (None, Some(a)) => Some(a),
                    (None, None) => None,
                })
            }
            Vec2::C(..) => Err(Error::domain(
                "complex coordinates have no finite-place valuation",
            )),
        }
    }
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    let num = x.numer();
    let den = x.denom();
    match (num.to_f64(), den.to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            // fall back through logs for out-of-range magnitudes
            let sign = if num.is_negative() { -1.0 } else { 1.0 };
            let ln =
                ln_big(&num.abs().to_biguint().unwrap()) - ln_big(&den.abs().to_biguint().unwrap());
            sign * ln.exp()
        }
    }
}

pub fn rational_to_f64_c(x: &BigRational) -> Complex64 {
    Complex64::new(rational_to_f64(x), 0.0)
}

/// Sup norm `max(|x|_v, |y|_v)` of a point of C_v^2.
///
/// The max norm is used uniformly at every place, including the archimedean
/// one (any two norms give the same heights and filled Julia sets, and the
/// max norm matches the capacity formulas exactly).
pub fn sup_norm(place: Place, z: &Vec2) -> Result<f64> {
    match (place, z) {
        (place, Vec2::Q(x, y)) => Ok(abs_value(place, x).max(abs_value(place, y))),
        (Place::Arch, Vec2::C(x, y)) => Ok(x.norm().max(y.norm())),
        (Place::Finite(_), Vec2::C(..)) => Err(Error::domain(
            "complex coordinates are only valued at the archimedean place",
        )),
    }
}

/// `log ||z||_v`, exact valuation arithmetic at finite places.
pub fn log_sup_norm(place: Place, z: &Vec2) -> Result<f64> {
    if z.is_origin() {
        return Err(Error::domain("log||.||_v of the origin is -infinity"));
    }
    match (place, z) {
        (Place::Finite(p), Vec2::Q(..)) => {
            let v = z.min_valuation(p)?.expect("not origin");
            Ok(-(v as f64) * (p as f64).ln())
        }
        (Place::Arch, Vec2::Q(x, y)) => {
            let lx = if x.is_zero() {
                f64::NEG_INFINITY
            } else {
                log_abs_value(Place::Arch, x)?
            };
            let ly = if y.is_zero() {
                f64::NEG_INFINITY
            } else {
                log_abs_value(Place::Arch, y)?
            };
            Ok(lx.max(ly))
        }
        (Place::Arch, Vec2::C(x, y)) => Ok(x.norm().max(y.norm()).ln()),
        (Place::Finite(_), Vec2::C(..)) => Err(Error::domain(
            "complex coordinates are only valued at the archimedean place",
        )),
    }
}
