//! The dynamical Arakelov Green's function
//! `g_{phi,v}(z,w) = -log|z~ ^ w~|_v + H_{F,v}(z~) + H_{F,v}(w~) + log c_v(F)`
//! with `c_v(F) = |Res(F)|_v^(-1/d(d-1))`, its exact good-reduction form,
//! the pullback invariance identity, and normalized pair energies.
//!
//! The value is independent of the lifts (double scale invariance) and of
//! the choice of lift of phi (resultant scaling); lifts here are picked
//! with sup norm 1 purely for conditioning.

use num::rational::BigRational;
use num::traits::{One, Zero};

use crate::arith::valuation_rat;
use crate::dynamics::{preimages, ProjPoint};
use crate::forms::HomogeneousPair;
use crate::local_heights::local_height;
use crate::places::{log_abs_value, Complex64, Place, Vec2};
use crate::{Error, Result};

/// A Green's function value; +infinity exactly on the diagonal.
#[derive(Debug, Clone, Copy)]
pub struct GreenValue {
    pub value: f64,
    pub error_bound: f64,
}

impl GreenValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    fn diagonal() -> GreenValue {
        GreenValue {
            value: f64::INFINITY,
            error_bound: 0.0,
        }
    }
}

/// A projective point with exact rational coordinate, usable at every place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatPoint {
    Affine(BigRational),
    Infinity,
}

impl RatPoint {
    pub fn from_i64(n: i64) -> RatPoint {
        RatPoint::Affine(BigRational::from_integer(n.into()))
    }

    /// Lift with sup norm 1 at the given place.
    fn lift(&self, place: Place) -> Vec2 {
        match self {
            RatPoint::Infinity => Vec2::Q(BigRational::zero(), BigRational::one()),
            RatPoint::Affine(t) => {
                if crate::places::abs_value(place, t) <= 1.0 {
                    Vec2::Q(BigRational::one(), t.clone())
                } else {
                    Vec2::Q(BigRational::one() / t, BigRational::one())
                }
            }
        }
    }

    pub fn to_proj(&self) -> ProjPoint {
        match self {
            RatPoint::Infinity => ProjPoint::Infinity,
            RatPoint::Affine(t) => {
                ProjPoint::Affine(Complex64::new(crate::places::rational_to_f64(t), 0.0))
            }
        }
    }
}

/// log c_v(F) = -(1/(d(d-1))) log |Res(F)|_v.
pub fn log_cv(f: &HomogeneousPair, place: Place) -> f64 {
    let d = f.degree() as f64;
    let log_res = log_abs_value(place, f.resultant()).expect("resultant nonzero");
    -log_res / (d * (d - 1.0))
}

fn wedge_q(z: &Vec2, w: &Vec2) -> BigRational {
    match (z, w) {
        (Vec2::Q(z0, z1), Vec2::Q(w0, w1)) => z0 * w1 - z1 * w0,
        _ => unreachable!("rational wedge on rational inputs"),
    }
}

/// Green's function at a place for exact rational points.
pub fn green_rat(
    f: &HomogeneousPair,
    place: Place,
    z: &RatPoint,
    w: &RatPoint,
    tol: f64,
) -> Result<GreenValue> {
    if z == w {
        return Ok(GreenValue::diagonal());
    }
    let zl = z.lift(place);
    let wl = w.lift(place);
    let wedge = wedge_q(&zl, &wl);
    if wedge.is_zero() {
        return Ok(GreenValue::diagonal());
    }
    let hz = local_height(f, place, &zl, tol / 4.0)?;
    let hw = local_height(f, place, &wl, tol / 4.0)?;
    let value = -log_abs_value(place, &wedge)? + hz.value + hw.value + log_cv(f, place);
    Ok(GreenValue {
        value,
        error_bound: hz.error_bound + hw.error_bound,
    })
}

/// Green's function at the archimedean place for complex points.
pub fn green_arch(
    f: &HomogeneousPair,
    z: &ProjPoint,
    w: &ProjPoint,
    tol: f64,
) -> Result<GreenValue> {
    if z.dist(w) == 0.0 {
        return Ok(GreenValue::diagonal());
    }
    let (z0, z1) = z.lift();
    let (w0, w1) = w.lift();
    let wedge = (z0 * w1 - z1 * w0).norm();
    if wedge == 0.0 {
        return Ok(GreenValue::diagonal());
    }
    let hz = local_height(f, Place::Arch, &Vec2::C(z0, z1), tol / 4.0)?;
    let hw = local_height(f, Place::Arch, &Vec2::C(w0, w1), tol / 4.0)?;
    let value = -wedge.ln() + hz.value + hw.value + log_cv(f, Place::Arch);
    Ok(GreenValue {
        value,
        error_bound: hz.error_bound + hw.error_bound,
    })
}

/// Exact Green's function for a map of good reduction at p:
/// `-log|z-w|_p + log+|z|_p + log+|w|_p` (with the infinity conventions).
/// The caller certifies good reduction (cleared |Res|_p = 1).
pub fn green_good_reduction(p: u64, z: &RatPoint, w: &RatPoint) -> Result<GreenValue> {
    if z == w {
        return Ok(GreenValue::diagonal());
    }
    let ln_p = (p as f64).ln();
    let log_plus = |t: &BigRational| -> f64 {
        match valuation_rat(p, t) {
            Some(v) if v < 0 => -(v as f64) * ln_p,
            _ => 0.0,
        }
    };
    let value = match (z, w) {
        (RatPoint::Infinity, RatPoint::Infinity) => unreachable!("diagonal handled"),
        (RatPoint::Affine(t), RatPoint::Infinity) | (RatPoint::Infinity, RatPoint::Affine(t)) => {
            log_plus(t)
        }
        (RatPoint::Affine(a), RatPoint::Affine(b)) => {
            let diff = a - b;
            if diff.is_zero() {
                return Ok(GreenValue::diagonal());
            }
            let v = valuation_rat(p, &diff).unwrap();
            (v as f64) * ln_p + log_plus(a) + log_plus(b)
        }
    };
    Ok(GreenValue {
        value,
        error_bound: 0.0,
    })
}

/// Residual of the pullback identity
/// `g(phi(z), w) = sum_i m_i g(z, w_i)` over the preimages w_i of w.
pub fn invariance_residual(
    f: &HomogeneousPair,
    z: &ProjPoint,
    w: &ProjPoint,
    tol: f64,
) -> Result<f64> {
    let pre = preimages(f, w)?;
    let excluded = z.dist(w) < 1e-9 || pre.points.iter().any(|(p, _)| z.dist(p) < 1e-9);
    if excluded {
        return Err(Error::domain(
            "z lies on w or one of its preimages; the identity degenerates",
        ));
    }
    let phi_z = crate::dynamics::apply_map(f, z)?;
    let lhs = green_arch(f, &phi_z, w, tol)?;
    let mut rhs = 0.0;
    for (wi, m) in &pre.points {
        rhs += *m as f64 * green_arch(f, z, wi, tol)?.value;
    }
    Ok((lhs.value - rhs).abs())
}

/// Normalized discrete energy of a point configuration.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub n: usize,
    /// `sum_{i != j} g(z_i, z_j)` (both orders counted).
    pub pair_sum: f64,
    /// pair_sum / (n (n-1)).
    pub normalized: f64,
    pub error_bound: f64,
}

/// Kahan compensated accumulator; pair sums have ~n^2 terms and the Bilu
/// tolerances are tighter than naive summation error bounds.
#[derive(Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Pair energy `(1/n(n-1)) sum_{i != j} g_{phi,v}(z_i, z_j)` at the
/// archimedean place. Heights are evaluated once per point; the cross terms
/// only need wedges.
pub fn pair_energy(f: &HomogeneousPair, points: &[ProjPoint], tol: f64) -> Result<EnergyReport> {
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid("pair energy needs at least two points"));
    }
    let lifts: Vec<(Complex64, Complex64)> = points.iter().map(|p| p.lift()).collect();
    let mut heights = Vec::with_capacity(n);
    let mut err = 0.0;
    for (z0, z1) in &lifts {
        let h = local_height(f, Place::Arch, &Vec2::C(*z0, *z1), tol)?;
        err += 2.0 * (n as f64 - 1.0) * h.error_bound;
        heights.push(h.value);
    }
    let mut wedge_sum = Kahan::default();
    for i in 0..n {
        for j in i + 1..n {
            let (z0, z1) = lifts[i];
            let (w0, w1) = lifts[j];
            let wedge = (z0 * w1 - z1 * w0).norm();
            if wedge == 0.0 {
                return Err(Error::domain(format!(
                    "points {i} and {j} coincide; the diagonal is excluded"
                )));
            }
            wedge_sum.add(-2.0 * wedge.ln());
        }
    }
    let nn = (n * (n - 1)) as f64;
    let height_sum: f64 = heights.iter().sum();
    let pair_sum =
        wedge_sum.sum + 2.0 * (n as f64 - 1.0) * height_sum + nn * log_cv(f, Place::Arch);
    Ok(EnergyReport {
        n,
        pair_sum,
        normalized: pair_sum / nn,
        error_bound: err / nn,
    })
}

/// Best-found minimum of the normalized pair energy over n-point
/// configurations on P^1(C), by seeded random-restart descent. The true
/// infima D_n are non-decreasing in n; descent only certifies an upper
/// bound on each D_n, so traces are reported rather than asserted.
pub fn discrete_energy_minimize(
    f: &HomogeneousPair,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<EnergyReport> {
    use rand::Rng;
    if n < 2 {
        return Err(Error::invalid("need n >= 2 points"));
    }
    let log_c = log_cv(f, Place::Arch);
    let height = |p: &ProjPoint| -> Result<f64> {
        let (x, y) = p.lift();
        Ok(local_height(f, Place::Arch, &Vec2::C(x, y), tol)?.value)
    };
    let pair_term = |a: &ProjPoint, b: &ProjPoint| -> f64 {
        let (a0, a1) = a.lift();
        let (b0, b1) = b.lift();
        let w = (a0 * b1 - a1 * b0).norm();
        if w == 0.0 {
            f64::INFINITY
        } else {
            -w.ln()
        }
    };
    let restarts = 8;
    let sweeps = 120;
    let mut best: Option<(f64, Vec<ProjPoint>, Vec<f64>)> = None;
    for restart in 0..restarts {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        use rand::SeedableRng as _;
        rng.set_stream(restart + 1);
        let mut pts: Vec<ProjPoint> = (0..n)
            .map(|_| ProjPoint::affine(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect();
        let mut heights: Vec<f64> = pts.iter().map(&height).collect::<Result<_>>()?;
        let mut radius = 0.5f64;
        let decay = (1e-3f64 / 0.5).powf(1.0 / (sweeps as f64 - 1.0));
        for _ in 0..sweeps {
            for i in 0..n {
                let cur = pts[i];
                let z = match cur {
                    ProjPoint::Affine(z) => z,
                    ProjPoint::Infinity => Complex64::new(1e6, 0.0),
                };
                let scale = 1.0 + z.norm();
                let cand = ProjPoint::Affine(
                    z + Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                        * (radius * scale),
                );
                let cand_h = height(&cand)?;
                let mut delta = 2.0 * (n as f64 - 1.0) * (cand_h - heights[i]);
                for (j, q) in pts.iter().enumerate() {
                    if j != i {
                        delta += 2.0 * (pair_term(&cand, q) - pair_term(&cur, q));
                    }
                }
                if delta < 0.0 {
                    pts[i] = cand;
                    heights[i] = cand_h;
                }
            }
            radius *= decay;
        }
        let mut pair_sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                pair_sum += 2.0 * pair_term(&pts[i], &pts[j]);
            }
        }
        pair_sum +=
            2.0 * (n as f64 - 1.0) * heights.iter().sum::<f64>() + (n * (n - 1)) as f64 * log_c;
        if best.as_ref().is_none_or(|(b, _, _)| pair_sum < *b) {
            best = Some((pair_sum, pts, heights));
        }
    }
    let (pair_sum, _, _) = best.expect("at least one restart");
    let nn = (n * (n - 1)) as f64;
    Ok(EnergyReport {
        n,
        pair_sum,
        normalized: pair_sum / nn,
        error_bound: 2.0 * tol,
    })
}
