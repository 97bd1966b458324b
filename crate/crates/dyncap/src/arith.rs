//! Integer and rational number theory helpers: valuations, primality,
//! and factorization of the (moderately sized) integers that show up as
//! resultants, discriminants, and coefficient contents.

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Exact p-adic valuation of a nonzero integer.
pub fn valuation_int(p: u64, n: &BigInt) -> Option<i64> {
    if n.is_zero() {
        return None; // v_p(0) = +infinity
    }
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut cur = n.abs();
    loop {
        let (q, r) = cur.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        cur = q;
    }
}

/// Exact p-adic valuation of a nonzero rational.
pub fn valuation_rat(p: u64, x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let vn = valuation_int(p, x.numer()).unwrap();
    let vd = valuation_int(p, x.denom()).unwrap();
    Some(vn - vd)
}

/// Deterministic Miller-Rabin for u64 (the witness set below is exact
/// for all n < 3.3 * 10^24), probabilistic on larger BigUint inputs.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let sp = BigUint::from(small);
        if *n == sp {
            return true;
        }
        if (n % sp).is_zero() {
            return false;
        }
    }
    // n - 1 = 2^s * d with d odd
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let witnesses: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    'witness: for a in witnesses {
        let a = BigUint::from(a) % n;
        if a.is_zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho; returns a nontrivial factor of a
/// composite n. Deterministic given the attempt counter used as RNG seed.
fn pollard_brent(n: &BigUint) -> Option<BigUint> {
    if (n % 2u32).is_zero() {
        return Some(BigUint::from(2u32));
    }
    let gen_below = |rng: &mut ChaCha8Rng, n: &BigUint| -> BigUint {
        let words = n.bits() / 64 + 1;
        let mut v = BigUint::zero();
        for _ in 0..words {
            v = (v << 64) | BigUint::from(rng.gen::<u64>());
        }
        v % n
    };
    for attempt in 0..48u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15 ^ attempt);
        let mut y = gen_below(&mut rng, n);
        let c = gen_below(&mut rng, n) + 1u32;
        let m = 128u32;
        let (mut g, mut r, mut q) = (BigUint::one(), 1u64, BigUint::one());
        let (mut x, mut ys) = (y.clone(), y.clone());
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = (&y * &y + &c) % n;
            }
            let mut k = 0u64;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min((r - k) as u32) {
                    y = (&y * &y + &c) % n;
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (&q * &diff) % n;
                }
                g = q.gcd(n);
                k += u64::from(m);
            }
            r *= 2;
        }
        if g == *n {
            // backtrack one step at a time
            loop {
                ys = (&ys * &ys + &c) % n;
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && g != *n {
            return Some(g);
        }
    }
    None
}

/// Prime factorization of a positive integer as sorted (prime, exponent)
/// pairs. Primes must fit in u64; anything larger is reported as a
/// resource error (nothing at desk scale produces such factors).
pub fn factorize(n: &BigUint) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(Error::invalid("cannot factor zero"));
    }
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut rem = n.clone();
    // trial division knocks out everything small
    let mut p = 2u64;
    while p <= 100_000 && rem > BigUint::one() {
        let bp = BigUint::from(p);
        if &bp * &bp > rem {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = rem.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rem = q;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    // rho on whatever survives
    let mut stack = vec![rem];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            let p = m
                .to_u64()
                .ok_or_else(|| Error::resource(format!("prime factor {m} exceeds u64")))?;
            match factors.iter_mut().find(|(q, _)| *q == p) {
                Some((_, e)) => *e += 1,
                None => factors.push((p, 1)),
            }
            continue;
        }
        let f = pollard_brent(&m)
            .ok_or_else(|| Error::numerical(format!("rho failed to split {m}")))?;
        stack.push(&m / &f);
        stack.push(f);
    }
    factors.sort_unstable();
    Ok(factors)
}

/// The set of primes dividing numerator or denominator of a nonzero rational.
pub fn rational_prime_support(x: &BigRational) -> Result<Vec<u64>> {
    if x.is_zero() {
        return Err(Error::invalid("zero has no prime support"));
    }
    let mut primes: Vec<u64> = Vec::new();
    for part in [x.numer().abs(), x.denom().abs()] {
        let part = part.to_biguint().expect("abs is nonnegative");
        for (p, _) in factorize(&part)? {
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
    }
    primes.sort_unstable();
    Ok(primes)
}
