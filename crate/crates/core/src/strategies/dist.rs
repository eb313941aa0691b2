use num::{BigUint, Integer, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{format_rational, parse_rational, Rational};

/// A finitely supported probability distribution over state indices, with
/// a precomputed exact sampler.
#[derive(Debug, Clone)]
pub struct Distribution {
    entries: Vec<(usize, Rational)>,
    sampler: Sampler,
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Dirac(usize),
    /// Cumulative integer weights over the common denominator.
    Small { cum: Vec<u64>, total: u64 },
    Big { cum: Vec<BigUint>, total: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistributionError {
    #[error("empty distribution")]
    Empty,
    #[error("non-positive probability for state {0}")]
    NonPositive(usize),
    #[error("probabilities sum to {0}")]
    Sum(String),
    #[error("state {0} listed twice")]
    Duplicate(usize),
}

impl Distribution {
    pub fn dirac(t: usize) -> Distribution {
        Distribution { entries: vec![(t, Rational::one())], sampler: Sampler::Dirac(t) }
    }

    /// Uniform distribution over `targets` (deduplicated and sorted).
    pub fn uniform(targets: &[usize]) -> Distribution {
        let mut ts = targets.to_vec();
        ts.sort_unstable();
        ts.dedup();
        let p = Rational::new(1.into(), (ts.len() as u64).into());
        Distribution::new(ts.into_iter().map(|t| (t, p.clone())).collect()).expect("uniform distributions are valid")
    }

    pub fn new(mut entries: Vec<(usize, Rational)>) -> Result<Distribution, DistributionError> {
        if entries.is_empty() {
            return Err(DistributionError::Empty);
        }
        entries.sort_by_key(|(t, _)| *t);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(DistributionError::Duplicate(w[0].0));
            }
        }
        if let Some((t, _)) = entries.iter().find(|(_, p)| !p.is_positive()) {
            return Err(DistributionError::NonPositive(*t));
        }
        let sum: Rational = entries.iter().map(|(_, p)| p).sum();
        if !sum.is_one() {
            return Err(DistributionError::Sum(format_rational(&sum)));
        }
        let sampler = build_sampler(&entries);
        Ok(Distribution { entries, sampler })
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }

    pub fn prob(&self, t: usize) -> Rational {
        match self.entries.binary_search_by_key(&t, |(s, _)| *s) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn as_dirac(&self) -> Option<usize> {
        match self.sampler {
            Sampler::Dirac(t) => Some(t),
            _ => None,
        }
    }

    /// Draws a successor. Exact: each outcome has exactly its rational
    /// probability, up to the quality of the random source.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let pos = match &self.sampler {
            Sampler::Dirac(t) => return *t,
            Sampler::Small { cum, total } => {
                let x = rng.gen_range(0..*total);
                cum.partition_point(|&c| c <= x)
            }
            Sampler::Big { cum, total } => {
                let x = uniform_below(rng, total);
                cum.partition_point(|c| *c <= x)
            }
        };
        self.entries[pos].0
    }

    /// Maps every state index through `f`.
    pub fn map_states(&self, f: impl Fn(usize) -> usize) -> Distribution {
        Distribution::new(self.entries.iter().map(|(t, p)| (f(*t), p.clone())).collect())
            .expect("relabelling preserves validity")
    }
}

fn build_sampler(entries: &[(usize, Rational)]) -> Sampler {
    if entries.len() == 1 {
        return Sampler::Dirac(entries[0].0);
    }
    let lcm = entries
        .iter()
        .fold(num::BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    let weights: Vec<BigUint> = entries
        .iter()
        .map(|(_, p)| (p.numer() * (&lcm / p.denom())).to_biguint().expect("positive weight"))
        .collect();
    let total = lcm.to_biguint().expect("positive denominator");
    if let Some(total_small) = total.to_u64() {
        let mut acc = 0u64;
        let cum = weights
            .iter()
            .map(|w| {
                acc += w.to_u64().expect("weight bounded by total");
                acc
            })
            .collect();
        Sampler::Small { cum, total: total_small }
    } else {
        let mut acc = BigUint::zero();
        let cum = weights
            .iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect();
        Sampler::Big { cum, total }
    }
}

/// Uniform draw from `[0, bound)` by rejection over random bit strings.
fn uniform_below<R: Rng + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let excess = (words as u64) * 32 - bits;
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
        if let Some(top) = digits.last_mut() {
            *top >>= excess;
        }
        let x = BigUint::new(digits);
        if &x < bound {
            return x;
        }
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(usize, String)> = self.entries.iter().map(|(t, p)| (*t, format_rational(p))).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Distribution, D::Error> {
        let pairs: Vec<(usize, String)> = Vec::deserialize(d)?;
        let entries = pairs
            .into_iter()
            .map(|(t, p)| parse_rational(&p).map(|q| (t, q)).map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        Distribution::new(entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn validation() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![(0, r(1, 2)), (1, r(1, 3))]).is_err());
        assert!(Distribution::new(vec![(0, r(1, 2)), (0, r(1, 2))]).is_err());
        assert!(Distribution::new(vec![(0, r(0, 1)), (1, r(1, 1))]).is_err());
        let d = Distribution::new(vec![(3, r(1, 3)), (1, r(2, 3))]).unwrap();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(d.prob(3), r(1, 3));
        assert_eq!(d.prob(2), r(0, 1));
    }

    #[test]
    fn sampling_frequencies() {
        let d = Distribution::new(vec![(0, r(1, 3)), (1, r(2, 3))]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60_000;
        let ones = (0..n).filter(|_| d.sample(&mut rng) == 1).count() as f64;
        let sigma = (n as f64 * 2.0 / 9.0).sqrt();
        assert!((ones - n as f64 * 2.0 / 3.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn big_denominators_sample() {
        let big = Rational::new(1.into(), num::BigInt::from(2u8).pow(100));
        let d = Distribution::new(vec![(0, big.clone()), (1, Rational::one() - big)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| d.sample(&mut rng) == 1));
    }

    #[test]
    fn serde_round_trip() {
        let d = Distribution::new(vec![(0, r(1, 4)), (2, r(3, 4))]).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"[[0,"1/4"],[2,"3/4"]]"#);
        let back: Distribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
    }
}
