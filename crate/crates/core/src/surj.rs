//! The operad of piecewise-linear weakly monotone surjections of `[0, 1]`.
//!
//! Arithmetic is exact: breakpoints are rationals, composition produces
//! rationals, and the operad axioms are decidable equalities on canonical
//! breakpoint lists.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurjError {
    #[error("breakpoints do not describe a monotone surjection: {0}")]
    Invalid(String),
    #[error("argument {0} outside [0, 1]")]
    OutOfDomain(String),
    #[error("leaf index {index} out of range 1..={arity}")]
    Index { index: usize, arity: usize },
    #[error("simplex coordinates must be weakly increasing in [0, 1]")]
    NotMonotone,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A continuous weakly monotone surjection `[0,1] -> [0,1]` stored as the
/// canonical breakpoint list of its graph: strictly increasing `x`, weakly
/// increasing `y`, starting at `(0,0)` and ending at `(1,1)`, with no three
/// collinear consecutive points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneSurj {
    breakpoints: Vec<(BigRational, BigRational)>,
}

impl MonotoneSurj {
    pub fn new(breakpoints: Vec<(BigRational, BigRational)>) -> Result<Self, SurjError> {
        if breakpoints.len() < 2 {
            return Err(SurjError::Invalid("need at least two points".into()));
        }
        let zero = BigRational::zero();
        let one = BigRational::one();
        if breakpoints.first().unwrap() != &(zero.clone(), zero.clone())
            || breakpoints.last().unwrap() != &(one.clone(), one.clone())
        {
            return Err(SurjError::Invalid(
                "must start at (0,0) and end at (1,1)".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(SurjError::Invalid("coordinates must be weakly increasing".into()));
            }
            if w[1].0 == w[0].0 && w[1].1 != w[0].1 {
                return Err(SurjError::Invalid("vertical jump breaks continuity".into()));
            }
        }
        Ok(Self::canonical(breakpoints))
    }

    fn canonical(points: Vec<(BigRational, BigRational)>) -> Self {
        let mut pts: Vec<(BigRational, BigRational)> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last() == Some(&p) {
                continue;
            }
            pts.push(p);
        }
        // Drop collinear interior points.
        let mut out: Vec<(BigRational, BigRational)> = Vec::with_capacity(pts.len());
        for p in pts {
            while out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                // (b - a) x (p - a) == 0  <=>  collinear
                let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
                if cross.is_zero() {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        MonotoneSurj { breakpoints: out }
    }

    /// The identity map, the unit of `B(1)` (and the canonical point of any
    /// `B(n)` when used as a plain reparameterization).
    pub fn identity() -> Self {
        MonotoneSurj {
            breakpoints: vec![
                (BigRational::zero(), BigRational::zero()),
                (BigRational::one(), BigRational::one()),
            ],
        }
    }

    pub fn breakpoints(&self) -> &[(BigRational, BigRational)] {
        &self.breakpoints
    }

    pub fn eval(&self, t: &BigRational) -> Result<BigRational, SurjError> {
        if t < &BigRational::zero() || t > &BigRational::one() {
            return Err(SurjError::OutOfDomain(t.to_string()));
        }
        for w in self.breakpoints.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if t >= x0 && t <= x1 {
                if x0 == x1 {
                    return Ok(y0.clone());
                }
                return Ok(y0 + (y1 - y0) * (t - x0) / (x1 - x0));
            }
        }
        unreachable!("breakpoints cover [0,1]")
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let pts = &self.breakpoints;
        let xf = |r: &BigRational| -> f64 {
            let n: f64 = r.numer().to_string().parse().unwrap();
            let d: f64 = r.denom().to_string().parse().unwrap();
            n / d
        };
        let t = t.clamp(0.0, 1.0);
        for w in pts.windows(2) {
            let (x0, y0) = (xf(&w[0].0), xf(&w[0].1));
            let (x1, y1) = (xf(&w[1].0), xf(&w[1].1));
            if t <= x1 {
                if x1 == x0 {
                    return y0;
                }
                return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
            }
        }
        1.0
    }

    /// Preimage of a value `y`: the closed interval `[lo, hi]` of parameters
    /// mapping to `y` (a point when the function is strictly increasing
    /// there).
    pub fn preimage(&self, y: &BigRational) -> (BigRational, BigRational) {
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for w in self.breakpoints.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if y < y0 || y > y1 {
                continue;
            }
            let (a, b) = if y0 == y1 {
                (x0.clone(), x1.clone())
            } else {
                let x = x0 + (x1 - x0) * (y - y0) / (y1 - y0);
                (x.clone(), x)
            };
            lo = Some(match lo {
                Some(l) => if a < l { a } else { l },
                None => a,
            });
            hi = Some(match hi {
                Some(h) => if b > h { b } else { h },
                None => b,
            });
        }
        (lo.expect("y in range"), hi.expect("y in range"))
    }

    /// Operad composition: `self` viewed in `B(n)`, `other` in `B(m)`,
    /// grafted at slot `i`. Exact three-case reparameterization formula.
    pub fn compose(&self, n: usize, i: usize, other: &MonotoneSurj, m: usize) -> Result<MonotoneSurj, SurjError> {
        if i < 1 || i > n {
            return Err(SurjError::Index { index: i, arity: n });
        }
        let nq = BigRational::from(BigInt::from(n as i64));
        let mq = BigRational::from(BigInt::from(m as i64));
        let total = BigRational::from(BigInt::from((n + m - 1) as i64));
        let iq = BigRational::from(BigInt::from(i as i64));
        let lo_y = (&iq - BigRational::one()) / &nq; // (i-1)/n
        let hi_y = &iq / &nq; // i/n

        // Candidate x's: own breakpoints, preimage endpoints of the case
        // boundaries, and preimages of the inner function's breakpoints.
        let mut xs: Vec<BigRational> = self.breakpoints.iter().map(|(x, _)| x.clone()).collect();
        for y in [&lo_y, &hi_y] {
            let (a, b) = self.preimage(y);
            xs.push(a);
            xs.push(b);
        }
        for (gx, _) in other.breakpoints() {
            let target = (&iq - BigRational::one() + gx) / &nq;
            if target >= lo_y && target <= hi_y {
                let (a, b) = self.preimage(&target);
                xs.push(a);
                xs.push(b);
            }
        }
        xs.sort();
        xs.dedup();

        let mut pts = Vec::with_capacity(xs.len());
        for x in xs {
            let fx = self.eval(&x)?;
            let y = if fx < lo_y {
                &nq * &fx / &total
            } else if fx > hi_y {
                (&mq - BigRational::one() + &nq * &fx) / &total
            } else {
                let inner = &nq * &fx - &iq + BigRational::one();
                (&iq - BigRational::one() + &mq * other.eval(&inner)?) / &total
            };
            pts.push((x, y));
        }
        MonotoneSurj::new(pts)
    }

    /// Reference pointwise evaluation of the composition formula, used as an
    /// oracle against [`MonotoneSurj::compose`].
    pub fn compose_eval_at(
        &self,
        n: usize,
        i: usize,
        other: &MonotoneSurj,
        m: usize,
        t: &BigRational,
    ) -> Result<BigRational, SurjError> {
        let nq = BigRational::from(BigInt::from(n as i64));
        let mq = BigRational::from(BigInt::from(m as i64));
        let total = BigRational::from(BigInt::from((n + m - 1) as i64));
        let iq = BigRational::from(BigInt::from(i as i64));
        let fx = self.eval(t)?;
        let lo_y = (&iq - BigRational::one()) / &nq;
        let hi_y = &iq / &nq;
        Ok(if fx < lo_y {
            &nq * &fx / &total
        } else if fx > hi_y {
            (&mq - BigRational::one() + &nq * &fx) / &total
        } else {
            let inner = &nq * &fx - &iq + BigRational::one();
            (&iq - BigRational::one() + &mq * other.eval(&inner)?) / &total
        })
    }

    /// JSON list of `"p/q"`-string pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self
            .breakpoints
            .iter()
            .map(|(x, y)| vec![x.to_string(), y.to_string()])
            .collect::<Vec<_>>())
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, SurjError> {
        let arr = v
            .as_array()
            .ok_or_else(|| SurjError::Invalid("expected array".into()))?;
        let mut pts = Vec::new();
        for pair in arr {
            let pair = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| SurjError::Invalid("expected [x, y] pairs".into()))?;
            let parse = |s: &serde_json::Value| -> Result<BigRational, SurjError> {
                let s = s
                    .as_str()
                    .ok_or_else(|| SurjError::Invalid("expected rational string".into()))?;
                parse_rational(s)
            };
            pts.push((parse(&pair[0])?, parse(&pair[1])?));
        }
        MonotoneSurj::new(pts)
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, SurjError> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = n
        .parse()
        .map_err(|_| SurjError::Invalid(format!("bad numerator in {s:?}")))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| SurjError::Invalid(format!("bad denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(SurjError::Invalid("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

/// The inverse simplex-splitting map: distribute weakly increasing simplex
/// coordinates into `n` blocks according to which `n`-th of `[0,1]` their
/// image under `f` falls in, rescaling each into `[0,1]`. Ties go to the
/// lower block.
pub fn split_simplex(
    n: usize,
    coords: &[BigRational],
    f: &MonotoneSurj,
) -> Result<Vec<Vec<BigRational>>, SurjError> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    for w in coords.windows(2) {
        if w[1] < w[0] {
            return Err(SurjError::NotMonotone);
        }
    }
    if coords.iter().any(|t| t < &zero || t > &one) {
        return Err(SurjError::NotMonotone);
    }
    let nq = BigRational::from(BigInt::from(n as i64));
    let mut blocks = vec![Vec::new(); n];
    for t in coords {
        let y = f.eval(t)?;
        // Lowest block whose upper boundary reaches y.
        let mut i = 1usize;
        while BigRational::from(BigInt::from(i as i64)) / &nq < y {
            i += 1;
        }
        let iq = BigRational::from(BigInt::from(i as i64));
        blocks[i - 1].push(&nq * &y - iq + BigRational::one());
    }
    Ok(blocks)
}

/// Deterministic random element of `B(n)`-as-surjection with small rational
/// breakpoints; used by property suites.
pub fn random_surj<R: rand::Rng>(rng: &mut R, pieces: usize) -> MonotoneSurj {
    let denom = 24i64;
    let mut xs: Vec<i64> = vec![0, denom];
    let mut ys: Vec<i64> = vec![0, denom];
    for _ in 0..pieces {
        xs.push(rng.gen_range(1..denom));
        ys.push(rng.gen_range(0..=denom));
    }
    xs.sort_unstable();
    ys.sort_unstable();
    let pts: Vec<(BigRational, BigRational)> = xs
        .into_iter()
        .zip(ys)
        .map(|(x, y)| (q(x, denom), q(y, denom)))
        .collect();
    // Deduplicate x-collisions by keeping the later y (still monotone).
    let mut dedup: Vec<(BigRational, BigRational)> = Vec::new();
    for p in pts {
        if let Some(last) = dedup.last() {
            if last.0 == p.0 {
                dedup.pop();
            }
        }
        dedup.push(p);
    }
    MonotoneSurj::new(dedup).expect("construction is monotone by sorting")
}
