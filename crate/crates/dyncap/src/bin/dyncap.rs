//! Command-line front end: every library operation as a reproducible,
//! scriptable experiment. Exit codes: 0 success, 1 invalid input,
//! 2 numerical/resource failure.

use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num::rational::BigRational;

use dyncap::capacities::{self, Strategy};
use dyncap::dynamics::{self, DiscreteMeasure, ProjPoint};
use dyncap::equilab::{self, Family, Reference};
use dyncap::forms::{HomogeneousPair, MapSpec};
use dyncap::global_heights::{self, AlgebraicPoint};
use dyncap::greens::{self, RatPoint};
use dyncap::local_heights::{self};
use dyncap::places::{Complex64, Place, Vec2};
use dyncap::poly::QPoly;
use dyncap::Error;

#[derive(Parser)]
#[command(
    name = "dyncap",
    about = "Canonical heights, dynamical Green's functions, and capacities for rational maps over Q",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker thread cap (DYNCAP_THREADS as fallback; 0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MapArg {
    /// Map spec: inline JSON, a path to a JSON file, or an alias
    /// (z2, z2p1, lattes-demo).
    #[arg(long)]
    map: String,
}

impl MapArg {
    fn pair(&self) -> dyncap::Result<HomogeneousPair> {
        let inline = match self.map.as_str() {
            "z2" => r#"{"num":["0","0","1"],"den":["1"]}"#.to_string(),
            "z2p1" => r#"{"num":["1","0","1"],"den":["1"]}"#.to_string(),
            // doubling map on y^2 = x^3 - x: x([2]P) = (x^2+1)^2 / (4x^3-4x)
            "lattes-demo" => {
                r#"{"num":["1","0","2","0","1"],"den":["0","-4","0","4"]}"#.to_string()
            }
            s if s.trim_start().starts_with('{') => s.to_string(),
            path => std::fs::read_to_string(path)
                .map_err(|e| Error::invalid(format!("cannot read map spec {path:?}: {e}")))?,
        };
        MapSpec::parse(&inline)?.to_pair()
    }
}

#[derive(Args, Clone)]
struct OutputArg {
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// Output format for artifacts.
    #[arg(long, default_value = "json", value_parser = ["json", "csv", "text"])]
    format: String,
}

impl OutputArg {
    fn write(&self, content: &str) -> dyncap::Result<()> {
        match &self.out {
            None => {
                print!("{content}");
                if !content.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
            Some(path) => std::fs::write(path, content)
                .map_err(|e| Error::invalid(format!("cannot write {path}: {e}"))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact homogeneous resultant of the lifted map.
    Resultant {
        #[command(flatten)]
        map: MapArg,
    },
    /// Per-place growth constants C_v, D_v and radii r_v, R_v.
    Bounds {
        #[command(flatten)]
        map: MapArg,
        /// arch | p:<prime> | all (all = archimedean + effective primes)
        #[arg(long, default_value = "all")]
        place: String,
    },
    /// Global canonical height of a rational point (or of an algebraic
    /// point given by --minpoly).
    Height {
        #[command(flatten)]
        map: MapArg,
        /// Rational point: a fraction like 3/2, or inf.
        #[arg(long, conflicts_with = "minpoly")]
        point: Option<String>,
        /// Algebraic point: comma-separated minimal-polynomial
        /// coefficients, ascending (e.g. -2,0,1 for x^2 - 2).
        #[arg(long)]
        minpoly: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Iteration cap for the algebraic-point limit.
        #[arg(long, default_value_t = 16)]
        n_max: u32,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Homogeneous local height of a vector (x, y) at one place.
    LocalHeight {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        place: String,
        /// x coordinate (exact rational).
        #[arg(long)]
        x: String,
        /// y coordinate (exact rational).
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Arakelov Green's function g(z, w) at one place (rational points).
    Green {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        place: String,
        #[arg(long)]
        z: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Preimage set phi^(-1)(w) with multiplicities.
    Preimages {
        #[command(flatten)]
        map: MapArg,
        /// Complex point: re[,im] or inf.
        #[arg(long)]
        point: String,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Backward-iteration sample of the canonical measure.
    SampleMeasure {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Transfinite-diameter configuration search.
    Tdiam {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value = "arch")]
        place: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// roots-of-unity | residue-classes | random-restart-ascent
        #[arg(long, default_value = "roots-of-unity")]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Exact determinant identity |Det(m)| = |Res|^(t(t+1)/2).
    DetCheck {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Adelic capacity sum (exactly zero) and optional estimates.
    AdelicSum {
        #[command(flatten)]
        map: MapArg,
        /// Configuration size for per-place estimates (0 = targets only).
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Roots-of-unity moments and pair energy (Bilu's theorem at desk scale).
    Bilu {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Use only primitive n-th roots (the cyclotomic set).
        #[arg(long, default_value_t = false)]
        cyclotomic: bool,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Pseudo-equidistribution table for a built-in family of small points.
    PseudoEqui {
        #[command(flatten)]
        map: MapArg,
        /// cyclotomic2:M1..M2 | full-roots:N1,N2,... | backward:Z0:D1..D2
        #[arg(long)]
        family: String,
        /// arch | p:<prime> | all
        #[arg(long, default_value = "all")]
        place: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Compare an empirical measure against the unit-circle reference
    /// (moments and binned discrepancies).
    Compare {
        #[command(flatten)]
        map: MapArg,
        /// CSV measure file (re,im,weight); generated on the fly from
        /// --point/--depth/--samples when omitted.
        #[arg(long)]
        empirical: Option<String>,
        #[arg(long, default_value = "2")]
        point: String,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[command(flatten)]
        output: OutputArg,
    },
}

fn parse_place(s: &str) -> dyncap::Result<Place> {
    match s {
        "arch" => Ok(Place::Arch),
        other => {
            let p = other.strip_prefix("p:").ok_or_else(|| {
                Error::invalid(format!("bad place {other:?}: want arch or p:<prime>"))
            })?;
            let p: u64 = p
                .parse()
                .map_err(|e| Error::invalid(format!("bad prime {p:?}: {e}")))?;
            Place::finite(p)
        }
    }
}

fn parse_rational(s: &str) -> dyncap::Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|e| Error::invalid(format!("bad rational {s:?}: {e}")))
}

fn parse_rat_point(s: &str) -> dyncap::Result<RatPoint> {
    if s.trim() == "inf" {
        Ok(RatPoint::Infinity)
    } else {
        Ok(RatPoint::Affine(parse_rational(s)?))
    }
}

fn parse_proj_point(s: &str) -> dyncap::Result<ProjPoint> {
    let s = s.trim();
    if s == "inf" {
        return Ok(ProjPoint::Infinity);
    }
    let mut parts = s.splitn(2, ',');
    let re: f64 = parts
        .next()
        .unwrap()
        .trim()
        .parse()
        .map_err(|e| Error::invalid(format!("bad point {s:?}: {e}")))?;
    let im: f64 = match parts.next() {
        None => 0.0,
        Some(t) => t
            .trim()
            .parse()
            .map_err(|e| Error::invalid(format!("bad point {s:?}: {e}")))?,
    };
    Ok(ProjPoint::Affine(Complex64::new(re, im)))
}

fn parse_family(s: &str) -> dyncap::Result<Family> {
    let bad = || Error::invalid(format!("bad family spec {s:?}"));
    if let Some(range) = s.strip_prefix("cyclotomic2:") {
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        return Ok(Family::CyclotomicTwoPower {
            m_min: a.parse().map_err(|_| bad())?,
            m_max: b.parse().map_err(|_| bad())?,
        });
    }
    if let Some(ns) = s.strip_prefix("full-roots:") {
        let ns = ns
            .split(',')
            .map(|n| n.trim().parse().map_err(|_| bad()))
            .collect::<dyncap::Result<Vec<usize>>>()?;
        return Ok(Family::FullRoots { ns });
    }
    if let Some(rest) = s.strip_prefix("backward:") {
        let (z0, range) = rest.split_once(':').ok_or_else(bad)?;
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        return Ok(Family::BackwardOrbit {
            z0: parse_rational(z0)?,
            depth_min: a.parse().map_err(|_| bad())?,
            depth_max: b.parse().map_err(|_| bad())?,
        });
    }
    Err(bad())
}

fn fmt15(x: f64) -> String {
    format!("{x:.15}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

fn json_pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

fn run(cli: Cli) -> dyncap::Result<()> {
    let threads = if cli.threads > 0 {
        cli.threads
    } else {
        std::env::var("DYNCAP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    };
    if threads > 0 {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Resultant { map } => {
            let f = map.pair()?;
            println!("{}", f.resultant());
        }
        Command::Bounds { map, place } => {
            let f = map.pair()?;
            let places: Vec<Place> = if place == "all" {
                let mut v = vec![Place::Arch];
                v.extend(
                    global_heights::effective_primes(&f)?
                        .into_iter()
                        .map(Place::Finite),
                );
                v
            } else {
                vec![parse_place(&place)?]
            };
            let mut rows = Vec::new();
            for p in places {
                let b = f.place_bounds(p)?;
                rows.push(serde_json::json!({
                    "place": p,
                    "c_lower": b.c_lower,
                    "d_upper": b.d_upper,
                    "r_small": b.r_small,
                    "r_big": b.r_big,
                    "tail_constant": b.tail_constant,
                }));
            }
            println!("{}", json_pretty(&rows));
        }
        Command::Height {
            map,
            point,
            minpoly,
            tol,
            n_max,
            output,
        } => {
            let f = map.pair()?;
            let result = match (&point, &minpoly) {
                (Some(p), None) => {
                    let z = parse_rat_point(p)?;
                    global_heights::canonical_height_rational(&f, &z, tol)?
                }
                (None, Some(coeffs)) => {
                    let coeffs = coeffs
                        .split(',')
                        .map(parse_rational)
                        .collect::<dyncap::Result<Vec<_>>>()?;
                    let z = AlgebraicPoint::new(&QPoly::new(coeffs))?;
                    global_heights::canonical_height_algebraic(&f, &z, n_max, tol)?
                }
                _ => return Err(Error::invalid("pass exactly one of --point, --minpoly")),
            };
            match output.format.as_str() {
                "json" => {
                    let breakdown: Vec<serde_json::Value> = result
                        .place_breakdown
                        .iter()
                        .map(|(p, v)| serde_json::json!({"place": p, "value": v}))
                        .collect();
                    output.write(&json_pretty(&serde_json::json!({
                        "value": result.value,
                        "error_bound": result.error_bound,
                        "breakdown": breakdown,
                    })))?;
                }
                _ => output.write(&fmt15(result.value))?,
            }
        }
        Command::LocalHeight {
            map,
            place,
            x,
            y,
            tol,
            output,
        } => {
            let f = map.pair()?;
            let place = parse_place(&place)?;
            let z = Vec2::Q(parse_rational(&x)?, parse_rational(&y)?);
            let h = local_heights::local_height(&f, place, &z, tol)?;
            match output.format.as_str() {
                "json" => output.write(&json_pretty(&serde_json::json!({
                    "value": h.value,
                    "error_bound": h.error_bound,
                    "iterations": h.iterations,
                    "closed_form": h.closed_form,
                })))?,
                _ => output.write(&fmt15(h.value))?,
            }
        }
        Command::Green {
            map,
            place,
            z,
            w,
            tol,
            output,
        } => {
            let f = map.pair()?;
            let place = parse_place(&place)?;
            let g =
                greens::green_rat(&f, place, &parse_rat_point(&z)?, &parse_rat_point(&w)?, tol)?;
            match output.format.as_str() {
                "json" => output.write(&json_pretty(&serde_json::json!({
                    "value": g.value,
                    "error_bound": g.error_bound,
                })))?,
                _ => output.write(&fmt15(g.value))?,
            }
        }
        Command::Preimages { map, point, output } => {
            let f = map.pair()?;
            let w = parse_proj_point(&point)?;
            let pre = dynamics::preimages(&f, &w)?;
            let points: Vec<serde_json::Value> = pre
                .points
                .iter()
                .map(|(p, m)| match p {
                    ProjPoint::Affine(z) => {
                        serde_json::json!({"re": z.re, "im": z.im, "multiplicity": m})
                    }
                    ProjPoint::Infinity => serde_json::json!({"inf": true, "multiplicity": m}),
                })
                .collect();
            output.write(&json_pretty(&serde_json::json!({ "preimages": points })))?;
        }
        Command::SampleMeasure {
            map,
            point,
            depth,
            samples,
            seed,
            output,
        } => {
            let f = map.pair()?;
            let z0 = parse_proj_point(&point)?;
            let mu = dynamics::sample_canonical_measure(&f, &z0, depth, samples, seed)?;
            match output.format.as_str() {
                "csv" => output.write(&mu.to_csv())?,
                _ => output.write(&json_pretty(&mu))?,
            }
        }
        Command::Tdiam {
            map,
            place,
            n,
            strategy,
            seed,
            output,
        } => {
            let f = map.pair()?;
            let place = parse_place(&place)?;
            let strategy = Strategy::from_str(&strategy)?;
            let rep = capacities::tdiam_estimate(&f, place, n, strategy, seed)?;
            output.write(&json_pretty(&rep))?;
        }
        Command::DetCheck { map, t } => {
            let f = map.pair()?;
            let rep = capacities::det_identity_check(&f, t)?;
            println!(
                "|det|={} |Res|^{}={} {}",
                rep.det_abs,
                t * (t + 1) / 2,
                rep.res_power,
                if rep.equal { "OK" } else { "MISMATCH" }
            );
            if !rep.equal {
                return Err(Error::numerical("determinant identity failed"));
            }
        }
        Command::AdelicSum {
            map,
            n,
            seed,
            output,
        } => {
            let f = map.pair()?;
            let estimates = if n >= 2 { Some((n, seed)) } else { None };
            let rep = capacities::adelic_tdiam_sum(&f, estimates)?;
            let contributions: Vec<serde_json::Value> = rep
                .contributions
                .iter()
                .map(|(p, v)| serde_json::json!({"place": p, "log_target": v}))
                .collect();
            output.write(&json_pretty(&serde_json::json!({
                "target_sum": rep.target_sum,
                "product_verified": rep.product_verified,
                "contributions": contributions,
                "estimate_sum": rep.estimate_sum,
            })))?;
        }
        Command::Bilu {
            n,
            cyclotomic,
            k_max,
            output,
        } => {
            let rep = equilab::bilu_experiment(n, cyclotomic, k_max)?;
            output.write(&json_pretty(&serde_json::json!({
                "n": rep.n,
                "cyclotomic": rep.cyclotomic,
                "moments": rep.moments,
                "energy": {
                    "normalized": rep.energy.normalized,
                    "pair_sum": rep.energy.pair_sum,
                    "error_bound": rep.energy.error_bound,
                },
            })))?;
        }
        Command::PseudoEqui {
            map,
            family,
            place,
            tol,
            output,
        } => {
            let f = map.pair()?;
            let family = parse_family(&family)?;
            let places = match place.as_str() {
                "all" => None,
                other => Some(vec![parse_place(other)?]),
            };
            let table = equilab::pseudo_equi_sequence(&f, &family, places.as_deref(), tol)?;
            match output.format.as_str() {
                "csv" => {
                    let mut csv = String::from("label,n,column,value\n");
                    for row in &table.rows {
                        for (place, v) in &row.per_place {
                            csv.push_str(&format!("{},{},{},{:e}\n", row.label, row.n, place, v));
                        }
                        csv.push_str(&format!(
                            "{},{},global_sum,{:e}\n{},{},two_h,{:e}\n",
                            row.label, row.n, row.global_sum, row.label, row.n, row.two_h
                        ));
                    }
                    output.write(&csv)?;
                }
                _ => output.write(&json_pretty(&table))?,
            }
        }
        Command::Compare {
            map,
            empirical,
            point,
            depth,
            samples,
            seed,
            k_max,
            output,
        } => {
            let f = map.pair()?;
            let mu = match empirical {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::invalid(format!("cannot read {path}: {e}")))?;
                    DiscreteMeasure::from_csv(&text)?
                }
                None => {
                    let z0 = parse_proj_point(&point)?;
                    dynamics::sample_canonical_measure(&f, &z0, depth, samples, seed)?
                }
            };
            let rep = equilab::measure_comparison(&mu, &Reference::UnitCircle, k_max);
            output.write(&json_pretty(&rep))?;
        }
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage problems exit 1 (clap's default would be 2)
            let is_help = !e.use_stderr();
            let _ = write!(
                if is_help {
                    Box::new(std::io::stdout()) as Box<dyn Write>
                } else {
                    Box::new(std::io::stderr())
                },
                "{e}"
            );
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e @ (Error::InvalidInput(_) | Error::Domain(_))) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
