//! Forward and backward dynamics on P^1(C): preimages with multiplicities,
//! exceptional-point certification, and backward-iteration sampling of the
//! canonical measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::forms::HomogeneousPair;
use crate::places::Complex64;
use crate::roots::{newton_polish, polynomial_roots};
use crate::{Error, Result};

/// Default relative radius for merging numerically coincident roots into
/// one point with multiplicity.
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-8;

/// A point of P^1(C) in the affine chart T = z1/z0, with [0:1] as infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjPoint {
    Affine(Complex64),
    Infinity,
}

impl ProjPoint {
    pub fn affine(re: f64, im: f64) -> ProjPoint {
        ProjPoint::Affine(Complex64::new(re, im))
    }

    /// A lift to C^2 with sup norm 1.
    pub fn lift(&self) -> (Complex64, Complex64) {
        match self {
            ProjPoint::Infinity => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            ProjPoint::Affine(t) => {
                if t.norm() <= 1.0 {
                    (Complex64::new(1.0, 0.0), *t)
                } else {
                    (t.inv(), Complex64::new(1.0, 0.0))
                }
            }
        }
    }

    /// Chordal (Fubini-Study sine) distance, scale-free in both arguments.
    pub fn dist(&self, other: &ProjPoint) -> f64 {
        let (a0, a1) = self.lift();
        let (b0, b1) = other.lift();
        let na = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        let nb = (b0.norm_sqr() + b1.norm_sqr()).sqrt();
        (a0 * b1 - a1 * b0).norm() / (na * nb)
    }
}

impl std::fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjPoint::Infinity => write!(f, "inf"),
            ProjPoint::Affine(t) => write!(f, "{}+{}i", t.re, t.im),
        }
    }
}

/// Apply the rational map to a projective point.
pub fn apply_map(f: &HomogeneousPair, z: &ProjPoint) -> Result<ProjPoint> {
    let (x, y) = z.lift();
    let v1 = f.f1().eval_c(x, y);
    let v2 = f.f2().eval_c(x, y);
    let n1 = v1.norm();
    let n2 = v2.norm();
    if n1 == 0.0 && n2 == 0.0 {
        return Err(Error::numerical("map evaluation vanished identically"));
    }
    if n1 == 0.0 {
        return Ok(ProjPoint::Infinity);
    }
    Ok(ProjPoint::Affine(v2 / v1))
}

/// The full preimage phi^(-1)(w), with algebraic multiplicities summing
/// to d.
#[derive(Debug, Clone)]
pub struct PreimageSet {
    pub target: ProjPoint,
    pub points: Vec<(ProjPoint, usize)>,
}

impl PreimageSet {
    pub fn multiplicity_sum(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }
}

/// Solve `w1 F1(z) - w0 F2(z) = 0` for the preimages of w, by univariate
/// root finding in whichever affine chart is better conditioned, clustering
/// roots into multiplicities.
pub fn preimages(f: &HomogeneousPair, w: &ProjPoint) -> Result<PreimageSet> {
    preimages_with_radius(f, w, DEFAULT_CLUSTER_RADIUS)
}

pub fn preimages_with_radius(
    f: &HomogeneousPair,
    w: &ProjPoint,
    cluster_radius: f64,
) -> Result<PreimageSet> {
    let d = f.degree();
    let (w0, w1) = w.lift();
    let a: Vec<Complex64> = f
        .f1()
        .coeffs()
        .iter()
        .map(crate::places::rational_to_f64_c)
        .collect();
    let b: Vec<Complex64> = f
        .f2()
        .coeffs()
        .iter()
        .map(crate::places::rational_to_f64_c)
        .collect();
    // G(x, y) = w1 F1 - w0 F2 in the basis x^(d-i) y^i
    let g: Vec<Complex64> = (0..=d).map(|i| w1 * a[i] - w0 * b[i]).collect();
    let max_c = g.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_c == 0.0 {
        return Err(Error::numerical("degenerate preimage equation"));
    }
    let zero_tol = 1e-13 * max_c;
    // t-chart polynomial g(t) = sum g_i t^i; u-chart is the reverse
    let better_t_chart = g[d].norm() >= g[0].norm();
    let mut raw: Vec<ProjPoint> = Vec::with_capacity(d);
    let coeffs_t: Vec<Complex64> = g.clone();
    let coeffs_u: Vec<Complex64> = g.iter().rev().cloned().collect();
    if better_t_chart {
        let mut trimmed = coeffs_t.clone();
        let mut at_infinity = 0;
        while trimmed.len() > 1 && trimmed.last().unwrap().norm() <= zero_tol {
            trimmed.pop();
            at_infinity += 1;
        }
        for _ in 0..at_infinity {
            raw.push(ProjPoint::Infinity);
        }
        for t in polynomial_roots(&trimmed)? {
            raw.push(ProjPoint::Affine(t));
        }
    } else {
        let mut trimmed = coeffs_u.clone();
        let mut at_zero = 0;
        while trimmed.len() > 1 && trimmed.last().unwrap().norm() <= zero_tol {
            trimmed.pop();
            at_zero += 1;
        }
        for _ in 0..at_zero {
            raw.push(ProjPoint::Affine(Complex64::new(0.0, 0.0)));
        }
        for u in polynomial_roots(&trimmed)? {
            if u.norm() == 0.0 {
                raw.push(ProjPoint::Infinity);
            } else {
                raw.push(ProjPoint::Affine(u.inv()));
            }
        }
    }
    if raw.len() != d {
        return Err(Error::numerical(format!(
            "found {} preimages for degree {d}",
            raw.len()
        )));
    }
    // cluster projectively: map to a common chart pairwise via dist
    let mut clusters: Vec<(ProjPoint, usize)> = Vec::new();
    for p in raw {
        match clusters
            .iter_mut()
            .find(|(c, _)| c.dist(&p) <= cluster_radius)
        {
            Some((_, m)) => *m += 1,
            None => clusters.push((p, 1)),
        }
    }
    // polish simple finite roots in their better chart
    for (p, m) in clusters.iter_mut() {
        if *m != 1 {
            continue;
        }
        if let ProjPoint::Affine(t) = p {
            if t.norm() <= 1.0 {
                *p = ProjPoint::Affine(newton_polish(&coeffs_t, *t));
            } else {
                let u = newton_polish(&coeffs_u, t.inv());
                if u.norm() > 0.0 {
                    *p = ProjPoint::Affine(u.inv());
                }
            }
        }
    }
    let set = PreimageSet {
        target: *w,
        points: clusters,
    };
    debug_assert_eq!(set.multiplicity_sum(), d);
    // every preimage must map back onto the target (multiple roots land
    // quadratically closer than the cluster radius)
    for (p, _) in &set.points {
        let image = apply_map(f, p)?;
        if image.dist(w) > 1e-5 {
            return Err(Error::numerical(format!(
                "preimage {p} maps {:.2e} away from the target {w}",
                image.dist(w)
            )));
        }
    }
    Ok(set)
}

/// Certify exceptionality: a point is exceptional iff it belongs to a
/// totally invariant set of at most two points. The certificate checks
/// that `{z} ∪ phi^(-1)(z)` has at most two distinct points and is closed
/// under taking preimages one more level down.
pub fn is_exceptional(f: &HomogeneousPair, z: &ProjPoint, tol: f64) -> Result<bool> {
    let mut set: Vec<ProjPoint> = vec![*z];
    let add = |set: &mut Vec<ProjPoint>, p: ProjPoint| {
        if !set.iter().any(|q| q.dist(&p) <= tol) {
            set.push(p);
        }
    };
    for (p, _) in preimages(f, z)?.points {
        add(&mut set, p);
    }
    if set.len() > 2 {
        return Ok(false);
    }
    // closure at depth 2: preimages of every member must stay in the set
    for q in set.clone() {
        for (p, _) in preimages(f, &q)?.points {
            if !set.iter().any(|s| s.dist(&p) <= tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A weighted finite point set on P^1(C); weights sum to 1.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(ProjPoint, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(ProjPoint, f64)>) -> Result<DiscreteMeasure> {
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn point_mass(p: ProjPoint) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: vec![(p, 1.0)],
        }
    }

    /// k-th complex moment `sum w_i z_i^k` over the affine atoms.
    pub fn moment(&self, k: u32) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in &self.atoms {
            if let ProjPoint::Affine(z) = p {
                acc += *w * z.powu(k);
            }
        }
        acc
    }

    /// CSV rows `re,im,weight`, infinity encoded as `inf,0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,weight\n");
        for (p, w) in &self.atoms {
            match p {
                ProjPoint::Affine(z) => {
                    out.push_str(&format!("{:.15e},{:.15e},{:.15e}\n", z.re, z.im, w))
                }
                ProjPoint::Infinity => out.push_str(&format!("inf,0,{w:.15e}\n")),
            }
        }
        out
    }

    /// Parse the CSV emitted by [`to_csv`](Self::to_csv) (header optional).
    pub fn from_csv(text: &str) -> Result<DiscreteMeasure> {
        let mut atoms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("re,")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::invalid(format!("bad CSV row {line:?}")));
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|e| Error::invalid(format!("bad {what} {s:?}: {e}")))
            };
            let w = parse(cols[2], "weight")?;
            if cols[0].trim() == "inf" {
                atoms.push((ProjPoint::Infinity, w));
            } else {
                atoms.push((
                    ProjPoint::affine(parse(cols[0], "re")?, parse(cols[1], "im")?),
                    w,
                ));
            }
        }
        DiscreteMeasure::new(atoms)
    }
}

// JSON wire format: {"atoms": [{"re": .., "im": .., "weight": ..} |
// {"inf": true, "weight": ..}]}.
impl serde::Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::{SerializeMap, SerializeSeq};
        struct Atoms<'a>(&'a [(ProjPoint, f64)]);
        impl serde::Serialize for Atoms<'_> {
            fn serialize<S: serde::Serializer>(
                &self,
                s: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for (p, w) in self.0 {
                    seq.serialize_element(&AtomRecord::from_atom(p, *w))?;
                }
                seq.end()
            }
        }
        let mut m = s.serialize_map(Some(1))?;
        m.serialize_entry("atoms", &Atoms(&self.atoms))?;
        m.end()
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct AtomRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    inf: bool,
    weight: f64,
}

impl AtomRecord {
    fn from_atom(p: &ProjPoint, weight: f64) -> AtomRecord {
        match p {
            ProjPoint::Affine(z) => AtomRecord {
                re: Some(z.re),
                im: Some(z.im),
                inf: false,
                weight,
            },
            ProjPoint::Infinity => AtomRecord {
                re: None,
                im: None,
                inf: true,
                weight,
            },
        }
    }
}

impl<'de> serde::Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            atoms: Vec<AtomRecord>,
        }
        let raw = Raw::deserialize(d)?;
        let atoms = raw
            .atoms
            .into_iter()
            .map(|a| {
                let p = if a.inf {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::affine(a.re.unwrap_or(0.0), a.im.unwrap_or(0.0))
                };
                (p, a.weight)
            })
            .collect();
        DiscreteMeasure::new(atoms).map_err(serde::de::Error::custom)
    }
}

/// Push a measure forward through the map.
pub fn pushforward(f: &HomogeneousPair, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let atoms = mu
        .atoms
        .iter()
        .map(|(p, w)| Ok((apply_map(f, p)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteMeasure { atoms })
}

/// Empirical approximation of the canonical measure by random backward
/// orbits: `sample_count` independent walks of length `depth`, each step
/// choosing a preimage with probability multiplicity/d.
///
/// Deterministic for a fixed seed: walk i draws from stream i of a
/// ChaCha generator keyed by `seed`, so parallel and serial runs agree.
pub fn sample_canonical_measure(
    f: &HomogeneousPair,
    z0: &ProjPoint,
    depth: u32,
    sample_count: usize,
    seed: u64,
) -> Result<DiscreteMeasure> {
    if is_exceptional(f, z0, 1e-9)? {
        return Err(Error::domain(
            "backward orbits of an exceptional point do not equidistribute",
        ));
    }
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be positive"));
    }
    let d = f.degree();
    let weight = 1.0 / sample_count as f64;
    let atoms: Result<Vec<(ProjPoint, f64)>> = (0..sample_count)
        .into_par_iter()
        .map(|idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64 + 1);
            let mut cur = *z0;
            for _ in 0..depth {
                let pre = preimages(f, &cur)?;
                let mut pick = rng.gen_range(0..d);
                cur = pre
                    .points
                    .iter()
                    .find_map(|(p, m)| {
                        if pick < *m {
                            Some(*p)
                        } else {
                            pick -= m;
                            None
                        }
                    })
                    .expect("multiplicities sum to d");
            }
            Ok((cur, weight))
        })
        .collect();
    DiscreteMeasure::new(atoms?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{lift_rational_map, squaring_pair};
    use crate::poly::QPoly;

    fn z2p1() -> HomogeneousPair {
        lift_rational_map(&QPoly::from_i64(&[1, 0, 1]), &QPoly::from_i64(&[1])).unwrap()
    }

    #[test]
    fn preimages_of_squaring() {
        let f = squaring_pair();
        // w = 4: +-2
        let pre = preimages(&f, &ProjPoint::affine(4.0, 0.0)).unwrap();
        assert_eq!(pre.points.len(), 2);
        for (p, m) in &pre.points {
            assert_eq!(*m, 1);
            match p {
                ProjPoint::Affine(t) => assert!((t.norm() - 2.0).abs() < 1e-10),
                _ => panic!("unexpected infinity"),
            }
        }
        // w = 0: double root at 0
        let pre = preimages(&f, &ProjPoint::affine(0.0, 0.0)).unwrap();
        assert_eq!(pre.points.len(), 1);
        assert_eq!(pre.points[0].1, 2);
        // w = infinity: double at infinity
        let pre = preimages(&f, &ProjPoint::Infinity).unwrap();
        assert_eq!(pre.points.len(), 1);
        assert!(matches!(pre.points[0].0, ProjPoint::Infinity));
        assert_eq!(pre.points[0].1, 2);
    }

    #[test]
    fn preimages_with_ramification() {
        // phi = z^2 + 1, w = 1: z^2 = 0, total ramification at 0
        let f = z2p1();
        let pre = preimages(&f, &ProjPoint::affine(1.0, 0.0)).unwrap();
        assert_eq!(pre.points.len(), 1);
        assert_eq!(pre.points[0].1, 2);
        assert!(pre.points[0].0.dist(&ProjPoint::affine(0.0, 0.0)) < 1e-7);
    }

    #[test]
    fn exceptional_points_of_squaring() {
        let f = squaring_pair();
        assert!(is_exceptional(&f, &ProjPoint::affine(0.0, 0.0), 1e-9).unwrap());
        assert!(is_exceptional(&f, &ProjPoint::Infinity, 1e-9).unwrap());
        assert!(!is_exceptional(&f, &ProjPoint::affine(1.0, 0.0), 1e-9).unwrap());
        // z^2 + 1 has only infinity
        let g = z2p1();
        assert!(is_exceptional(&g, &ProjPoint::Infinity, 1e-9).unwrap());
        assert!(!is_exceptional(&g, &ProjPoint::affine(0.0, 0.0), 1e-9).unwrap());
    }

    #[test]
    fn sampling_is_deterministic_and_on_circle() {
        let f = squaring_pair();
        let z0 = ProjPoint::affine(2.0, 0.0);
        let mu1 = sample_canonical_measure(&f, &z0, 12, 64, 7).unwrap();
        let mu2 = sample_canonical_measure(&f, &z0, 12, 64, 7).unwrap();
        for ((p1, w1), (p2, w2)) in mu1.atoms.iter().zip(&mu2.atoms) {
            assert_eq!(p1, p2);
            assert_eq!(w1, w2);
        }
        // preimages of 2 under z^2 approach the unit circle
        for (p, _) in &mu1.atoms {
            if let ProjPoint::Affine(z) = p {
                assert!((z.norm().ln()).abs() < 1e-3);
            }
        }
        // depth 0 is the point mass
        let mu0 = sample_canonical_measure(&f, &z0, 0, 8, 1).unwrap();
        assert!(mu0.atoms.iter().all(|(p, _)| p.dist(&z0) == 0.0));
        // exceptional start rejected
        assert!(sample_canonical_measure(&f, &ProjPoint::affine(0.0, 0.0), 4, 8, 1).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let mu = DiscreteMeasure::new(vec![
            (ProjPoint::affine(0.5, -0.25), 0.5),
            (ProjPoint::Infinity, 0.5),
        ])
        .unwrap();
        let csv = mu.to_csv();
        assert!(csv.starts_with("re,im,weight\n"));
        assert!(csv.contains("inf,0,"));
        let back = DiscreteMeasure::from_csv(&csv).unwrap();
        assert_eq!(back.atoms.len(), 2);
        assert!(back.atoms[0].0.dist(&mu.atoms[0].0) < 1e-15);
        let json = serde_json::to_string(&mu).unwrap();
        let back: DiscreteMeasure = serde_json::from_str(&json).unwrap();
        assert!(matches!(back.atoms[1].0, ProjPoint::Infinity));
        assert_eq!(back.atoms[1].1, 0.5);
    }
}
