//! The homogeneous local dynamical height `H_{F,v}(z) = lim d^-n log ||F^(n)(z)||_v`
//! with certified error bounds, its dehomogenized Call-Silverman variants,
//! and filled-Julia-set membership.
//!
//! Three evaluation paths:
//! - closed form when the telescoping tail constant vanishes (good reduction
//!   after clearing at finite places, diagonal pairs at the archimedean
//!   place): the height is `log ||z||_v` plus an exact scaling correction;
//! - archimedean iteration with sup-norm renormalization each step, so the
//!   accumulated value is a sum of log-corrections and never overflows;
//! - finite-place iteration on p-primitive vectors mod p^M, tracking the
//!   content valuations exactly (the height is a rational multiple of log p).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};
use num::Integer;

use crate::forms::HomogeneousPair;
use crate::places::{log_sup_norm, Complex64, Place, Vec2};
use crate::{Error, Result};

/// A computed local height value with its certified error.
#[derive(Debug, Clone)]
pub struct LocalHeightEstimate {
    pub value: f64,
    /// Certified bound |value - H_{F,v}(z)| <= error_bound, always at most
    /// C / (d^n (d-1)) for the tail constant C of the place.
    pub error_bound: f64,
    pub iterations: u32,
    /// True when a closed form applied (then error_bound = 0).
    pub closed_form: bool,
}

/// Membership verdict for the filled Julia set K_{F,v} = { H_{F,v} <= 0 }.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inside,
    Outside,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct JuliaMembership {
    pub verdict: Verdict,
    pub height: LocalHeightEstimate,
}

/// An affine coordinate value, exact rational or complex double.
#[derive(Debug, Clone)]
pub enum AffineCoord {
    Q(BigRational),
    C(Complex64),
}

impl AffineCoord {
    fn lift_infty(&self) -> Vec2 {
        match self {
            AffineCoord::Q(t) => Vec2::Q(BigRational::one(), t.clone()),
            AffineCoord::C(t) => Vec2::C(Complex64::new(1.0, 0.0), *t),
        }
    }

    fn lift_zero(&self) -> Vec2 {
        match self {
            AffineCoord::Q(u) => Vec2::Q(u.clone(), BigRational::one()),
            AffineCoord::C(u) => Vec2::C(*u, Complex64::new(1.0, 0.0)),
        }
    }
}

/// Number of iterations until the geometric tail C/(d^n (d-1)) drops
/// below tol.
fn steps_for_tol(tail_constant: f64, d: usize, tol: f64) -> u32 {
    if tail_constant <= 0.0 {
        return 0;
    }
    let d = d as f64;
    let mut n = 0u32;
    let mut tail = tail_constant / (d - 1.0);
    while tail > tol && n < 10_000 {
        tail /= d;
        n += 1;
    }
    n
}

/// The homogeneous local dynamical height of `z` at `place`, certified
/// within `tol`.
pub fn local_height(
    f: &HomogeneousPair,
    place: Place,
    z: &Vec2,
    tol: f64,
) -> Result<LocalHeightEstimate> {
    if z.is_origin() {
        return Err(Error::domain(
            "the origin is excluded (H_{F,v}(0,0) = -infinity)",
        ));
    }
    if tol <= 0.0 {
        return Err(Error::invalid("tol must be positive"));
    }
    match place {
        Place::Finite(p) => match z {
            Vec2::Q(..) => finite_local_height(f, p, z, tol),
            Vec2::C(..) => Err(Error::domain(
                "finite places value only rational coordinates",
            )),
        },
        Place::Arch => arch_local_height(f, z, tol),
    }
}

fn arch_local_height(f: &HomogeneousPair, z: &Vec2, tol: f64) -> Result<LocalHeightEstimate> {
    let d = f.degree();
    let bounds = f.place_bounds(Place::Arch)?;
    if bounds.tail_constant == 0.0 {
        // ||F(z)|| = ||z||^d exactly: the height is log ||z||
        return Ok(LocalHeightEstimate {
            value: log_sup_norm(Place::Arch, z)?,
            error_bound: 0.0,
            iterations: 0,
            closed_form: true,
        });
    }
    let steps = steps_for_tol(bounds.tail_constant, d, tol);
    let (mut x, mut y) = z.to_complex();
    let norm = x.norm().max(y.norm());
    if norm == 0.0 {
        return Err(Error::domain("origin"));
    }
    let mut acc = log_sup_norm(Place::Arch, z)?;
    x /= norm;
    y /= norm;
    let mut weight = 1.0 / d as f64;
    for _ in 0..steps {
        let fx = f.f1().eval_c(x, y);
        let fy = f.f2().eval_c(x, y);
        let s = fx.norm().max(fy.norm());
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::numerical("renormalized iterate degenerated"));
        }
        acc += weight * s.ln();
        x = fx / s;
        y = fy / s;
        weight /= d as f64;
    }
    let tail = bounds.tail_constant * weight / (d as f64 - 1.0);
    Ok(LocalHeightEstimate {
        value: acc,
        error_bound: tail,
        iterations: steps,
        closed_form: false,
    })
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "inverse of a non-unit mod p^M");
    e.x.mod_floor(m)
}

/// Reduce a rational with v_p >= 0 into Z/p^M.
fn rational_mod(x: &BigRational, p: u64, modulus: &BigInt) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let p_big = BigInt::from(p);
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    // strip the p-part of the denominator against the numerator (empty when
    // v_p(x) >= 0, which callers guarantee)
    while (&den % &p_big).is_zero() {
        den /= &p_big;
        debug_assert!((&num % &p_big).is_zero());
        num /= &p_big;
    }
    (num.mod_floor(modulus) * mod_inverse(&den.mod_floor(modulus), modulus)).mod_floor(modulus)
}

/// Valuation of an element known mod p^prec, capped at prec.
fn valuation_mod(v: &BigInt, p: u64, prec: u32) -> u32 {
    if v.is_zero() {
        return prec;
    }
    let p = BigInt::from(p);
    let mut cur = v.clone();
    let mut val = 0u32;
    while val < prec {
        let (q, r) = cur.div_rem(&p);
        if !r.is_zero() {
            break;
        }
        cur = q;
        val += 1;
    }
    val
}

fn finite_local_height(
    f: &HomogeneousPair,
    p: u64,
    z: &Vec2,
    tol: f64,
) -> Result<LocalHeightEstimate> {
    let d = f.degree();
    let cd = f.clearing_data(p);
    let ln_p = (p as f64).ln();
    let d_minus_1 = BigRational::from(BigInt::from(d as i64 - 1));
    // H_F = H_{F'} - shift * log(p) / (d-1) for the cleared pair F' = p^-shift F
    let shift_coeff = -BigRational::from(BigInt::from(cd.shift)) / &d_minus_1;
    let k0 = z.min_valuation(p)?.expect("not origin");
    let norm_coeff = -BigRational::from(BigInt::from(k0));
    if cd.is_good() {
        // unit polydisk: H_{F'}(z) = log ||z||_p exactly
        let coeff = norm_coeff + shift_coeff;
        return Ok(LocalHeightEstimate {
            value: coeff.to_f64().unwrap() * ln_p,
            error_bound: 0.0,
            iterations: 0,
            closed_form: true,
        });
    }
    // bad reduction: iterate p-primitive representatives mod p^M, recording
    // the content valuation k_j at each step; each k_j is at most
    // vmax = v_p(Res(F')) by the growth bound, so precision loss is bounded
    let vmax = cd.cleared_res_val as u32;
    let tail_constant = vmax as f64 * ln_p;
    let steps = steps_for_tol(tail_constant, d, tol).max(1);
    let mut prec = steps * vmax + vmax + 2;
    let mut modulus = BigInt::from(p).pow(prec);
    // cleared coefficients mod p^M
    let p_shift = BigRational::from(BigInt::from(p)).pow(-(cd.shift as i32));
    let reduce_form = |coeffs: &[BigRational], modulus: &BigInt| -> Vec<BigInt> {
        coeffs
            .iter()
            .map(|c| rational_mod(&(c * &p_shift), p, modulus))
            .collect()
    };
    let mut c1 = reduce_form(f.f1().coeffs(), &modulus);
    let mut c2 = reduce_form(f.f2().coeffs(), &modulus);
    // primitive starting vector w0 = z / p^k0 reduced mod p^M
    let (zx, zy) = match z {
        Vec2::Q(x, y) => (x.clone(), y.clone()),
        Vec2::C(..) => unreachable!("caller checked"),
    };
    let p_k0 = BigRational::from(BigInt::from(p)).pow(-(k0 as i32));
    let mut wx = rational_mod(&(zx * &p_k0), p, &modulus);
    let mut wy = rational_mod(&(zy * &p_k0), p, &modulus);

    let eval_form = |c: &[BigInt], x: &BigInt, y: &BigInt, modulus: &BigInt| -> BigInt {
        let mut xp = vec![BigInt::one()];
        let mut yp = vec![BigInt::one()];
        for k in 1..=d {
            xp.push((&xp[k - 1] * x).mod_floor(modulus));
            yp.push((&yp[k - 1] * y).mod_floor(modulus));
        }
        let mut acc = BigInt::zero();
        for (i, ci) in c.iter().enumerate() {
            acc += ci * &xp[d - i] * &yp[i];
        }
        acc.mod_floor(modulus)
    };

    let mut content_sum = BigRational::zero(); // sum d^-(j+1) k_j
    let mut weight = BigRational::new(BigInt::one(), BigInt::from(d as i64));
    let d_rat = BigRational::from(BigInt::from(d as i64));
    for _ in 0..steps {
        let v1 = eval_form(&c1, &wx, &wy, &modulus);
        let v2 = eval_form(&c2, &wx, &wy, &modulus);
        let k = valuation_mod(&v1, p, prec).min(valuation_mod(&v2, p, prec));
        debug_assert!(k <= vmax, "content exceeded the resultant valuation");
        content_sum += &weight * BigRational::from(BigInt::from(k));
        weight /= &d_rat;
        // divide out the content and drop precision accordingly
        prec -= k;
        let pk = BigInt::from(p).pow(k);
        modulus = BigInt::from(p).pow(prec);
        wx = (v1 / &pk).mod_floor(&modulus);
        wy = (v2 / &pk).mod_floor(&modulus);
        c1.iter_mut().for_each(|c| *c = c.mod_floor(&modulus));
        c2.iter_mut().for_each(|c| *c = c.mod_floor(&modulus));
    }
    let coeff = norm_coeff + shift_coeff - content_sum;
    let tail = tail_constant / ((d as f64).powi(steps as i32) * (d as f64 - 1.0));
    Ok(LocalHeightEstimate {
        value: coeff.to_f64().unwrap() * ln_p,
        error_bound: tail,
        iterations: steps,
        closed_form: false,
    })
}

/// Residuals of the three defining properties of the local height, each
/// paired with the bound it must satisfy.
#[derive(Debug, Clone)]
pub struct LhReport {
    /// |H(z) - log||z||| and its bound C/(d-1) (plus evaluation error).
    pub lh1_residual: f64,
    pub lh1_bound: f64,
    /// |H(F(z)) - d H(z)| and the combined evaluation error bound.
    pub lh2_residual: f64,
    pub lh2_bound: f64,
    /// |H(cz) - H(z) - log|c|_v| and the combined evaluation error bound.
    pub lh3_residual: f64,
    pub lh3_bound: f64,
}

pub fn check_lh_properties(
    f: &HomogeneousPair,
    place: Place,
    z: &Vec2,
    c: &BigRational,
    tol: f64,
) -> Result<LhReport> {
    if c.is_zero() {
        return Err(Error::invalid("scaling constant must be nonzero"));
    }
    let d = f.degree() as f64;
    let bounds = f.place_bounds(place)?;
    let h_z = local_height(f, place, z, tol)?;
    let log_norm = log_sup_norm(place, z)?;
    let lh1_residual = (h_z.value - log_norm).abs();
    let lh1_bound = bounds.tail_constant / (d - 1.0) + h_z.error_bound + 1e-14;

    let fz = f.apply(z);
    let h_fz = local_height(f, place, &fz, tol)?;
    let lh2_residual = (h_fz.value - d * h_z.value).abs();
    let lh2_bound = h_fz.error_bound + d * h_z.error_bound + 1e-12;

    let cz = match z {
        Vec2::Q(x, y) => Vec2::Q(x * c, y * c),
        Vec2::C(x, y) => {
            let cf = crate::places::rational_to_f64(c);
            Vec2::C(x * cf, y * cf)
        }
    };
    let h_cz = local_height(f, place, &cz, tol)?;
    let log_c = crate::places::log_abs_value(place, c)?;
    let lh3_residual = (h_cz.value - h_z.value - log_c).abs();
    let lh3_bound = h_cz.error_bound + h_z.error_bound + 1e-12;
    Ok(LhReport {
        lh1_residual,
        lh1_bound,
        lh2_residual,
        lh2_bound,
        lh3_residual,
        lh3_bound,
    })
}

/// Filled-Julia-set membership by comparing the certified height interval
/// against zero. Boundary points without a closed form legitimately come
/// back `Undetermined`.
pub fn julia_membership(
    f: &HomogeneousPair,
    place: Place,
    z: &Vec2,
    tol: f64,
) -> Result<JuliaMembership> {
    let height = local_height(f, place, z, tol)?;
    let verdict = if height.value + height.error_bound <= tol {
        Verdict::Inside
    } else if height.value - height.error_bound > 0.0 {
        Verdict::Outside
    } else {
        Verdict::Undetermined
    };
    Ok(JuliaMembership { verdict, height })
}

/// Partial sums H_j = (1/d^j) log ||F^(j)(z)||_v of the height iteration,
/// j = 0..=steps. Their successive differences obey the telescoping bound
/// |H_(j+1) - H_j| <= C / d^(j+1).
pub fn height_partial_sums(
    f: &HomogeneousPair,
    place: Place,
    z: &Vec2,
    steps: u32,
) -> Result<Vec<f64>> {
    if z.is_origin() {
        return Err(Error::domain("origin excluded"));
    }
    match place {
        Place::Arch => {
            let d = f.degree() as f64;
            let (mut x, mut y) = z.to_complex();
            let norm = x.norm().max(y.norm());
            let mut acc = log_sup_norm(Place::Arch, z)?;
            let mut out = vec![acc];
            x /= norm;
            y /= norm;
            let mut weight = 1.0 / d;
            for _ in 0..steps {
                let fx = f.f1().eval_c(x, y);
                let fy = f.f2().eval_c(x, y);
                let s = fx.norm().max(fy.norm());
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::numerical("renormalized iterate degenerated"));
                }
                acc += weight * s.ln();
                out.push(acc);
                x = fx / s;
                y = fy / s;
                weight /= d;
            }
            Ok(out)
        }
        Place::Finite(p) => {
            let cd = f.clearing_data(p);
            let ln_p = (p as f64).ln();
            let k0 = z.min_valuation(p)?.expect("not origin");
            let base = -(k0 as f64) * ln_p;
            if cd.is_good() && cd.shift == 0 {
                // every content valuation is zero: the sums are constant
                return Ok(vec![base; steps as usize + 1]);
            }
            // generic finite path: iterate exactly with content removal
            // (desk scale only; callers wanting tight tolerances use
            // local_height, which works mod p^M)
            if steps > 16 {
                return Err(Error::resource(
                    "exact finite-place partial sums are capped at 16 steps",
                ));
            }
            let d = f.degree() as f64;
            let mut v = z.clone();
            let mut out = vec![base];
            let mut correction = 0.0; // sum of d^(-1-i) k_i log p terms
            let mut weight = 1.0 / d;
            for _ in 0..steps {
                v = f.apply(&v);
                if let Vec2::Q(x, y) = &v {
                    // strip the full rational content to keep sizes bounded;
                    // only its p-part affects the p-adic norm
                    let num_gcd = x.numer().gcd(y.numer());
                    let den_lcm = x.denom().lcm(y.denom());
                    if !num_gcd.is_zero() {
                        let c = BigRational::new(num_gcd, den_lcm);
                        let vx = x / &c;
                        let vy = y / &c;
                        correction += weight * crate::places::log_abs_value(Place::Finite(p), &c)?;
                        v = Vec2::Q(vx, vy);
                    }
                }
                let ln_norm = log_sup_norm(Place::Finite(p), &v)?;
                out.push(weight * ln_norm + correction);
                weight /= d;
            }
            Ok(out)
        }
    }
}

/// Call-Silverman local height relative to the divisor (infinity):
/// `h_(inf)(z) = H_{F,v}(1, T(z))` for the affine coordinate T(z).
pub fn cs_height_infty(
    f: &HomogeneousPair,
    place: Place,
    t: &AffineCoord,
    tol: f64,
) -> Result<LocalHeightEstimate> {
    local_height(f, place, &t.lift_infty(), tol)
}

/// Call-Silverman local height relative to the divisor (0):
/// `h_(0)(z) = H_{F,v}(U(z), 1)` for U(z) = 1/T(z). The caller passes U(z).
pub fn cs_height_zero(
    f: &HomogeneousPair,
    place: Place,
    u: &AffineCoord,
    tol: f64,
) -> Result<LocalHeightEstimate> {
    local_height(f, place, &u.lift_zero(), tol)
}
