//! Seeded instance families.

use std::fmt;
use std::str::FromStr;

use fairq_core::{Instance, ValuationClass, ValuationSpec, Weights};
use fairq_protocols::ProtocolId;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Largest weight drawn for uniform additive goods.
pub const UNIFORM_MAX: u64 = 100;
/// Weight of the top-ranked good in the Zipf family.
pub const ZIPF_TOP: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    /// Independent weights uniform in `0..=100`.
    AdditiveUniform,
    /// Weight `ceil(2^20 / rank)` over a random ranking of the goods.
    AdditiveZipf,
    /// Agents `2i` and `2i + 1` value the same two goods at 1, the rest 0
    /// (every good when `m < 2`).
    BinarySparse,
    /// `base * |S|` plus a uniform tiebreak whose total is the base.
    SizeDominant,
    /// Uniform additive weights quantized to `k` levels.
    KValued(u32),
    /// One shared valuation with integer values in `0..=K`.
    IdenticalInt(u64),
}

impl Family {
    pub fn class(self) -> ValuationClass {
        match self {
            Family::AdditiveUniform | Family::AdditiveZipf => ValuationClass::Additive,
            Family::BinarySparse => ValuationClass::Binary,
            Family::SizeDominant => ValuationClass::SizeDominant,
            Family::KValued(_) | Family::IdenticalInt(_) => ValuationClass::KValued,
        }
    }

    pub fn is_additive(self) -> bool {
        matches!(self, Family::AdditiveUniform | Family::AdditiveZipf | Family::BinarySparse)
    }

    /// Number of distinct bundle values, when bounded.
    pub fn distinct_values(self) -> Option<u64> {
        match self {
            Family::KValued(k) => Some(k as u64),
            Family::IdenticalInt(k) => Some(k + 1),
            _ => None,
        }
    }

    pub fn max_value(self) -> Option<u64> {
        match self {
            Family::IdenticalInt(k) => Some(k),
            Family::KValued(k) => Some(k as u64 - 1),
            _ => None,
        }
    }

    /// Whether the protocol's valuation precondition holds for this family.
    /// `identical` asks for one valuation shared by all agents.
    pub fn admits(self, protocol: ProtocolId, identical: bool) -> bool {
        let identical = identical || matches!(self, Family::IdenticalInt(_));
        match protocol {
            ProtocolId::TwoAgentEf1 | ProtocolId::EnvyCycleElimination => true,
            ProtocolId::FullElicitation | ProtocolId::ThreeAdditiveEf1 => self.is_additive(),
            ProtocolId::ThreeIdenticalContiguousEf1 | ProtocolId::SeparateDesignatedGoods => {
                self.is_additive() && identical
            }
            ProtocolId::EnvyCycleBatched => matches!(self, Family::KValued(_) | Family::IdenticalInt(_)),
            ProtocolId::SizeDominantN2 => self == Family::SizeDominant,
            ProtocolId::ContiguousIdenticalMonotonic => matches!(self, Family::IdenticalInt(_)),
        }
    }

    /// The instance for `(m, n, seed)`; the same arguments give the same instance.
    pub fn generate(self, m: usize, n: usize, seed: u64, identical: bool) -> Result<Instance, BenchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let identical = identical || matches!(self, Family::IdenticalInt(_));
        let mut specs: Vec<ValuationSpec> = Vec::with_capacity(n);
        for i in 0..n {
            let spec = if identical && i > 0 {
                specs[0].clone()
            } else if self == Family::BinarySparse && i % 2 == 1 {
                specs[i - 1].clone()
            } else {
                self.draw(&mut rng, m)?
            };
            specs.push(spec);
        }
        Instance::from_specs(m, specs).map_err(|e| BenchError::Instance(e.to_string()))
    }

    fn draw(self, rng: &mut ChaCha8Rng, m: usize) -> Result<ValuationSpec, BenchError> {
        let uniform = |rng: &mut ChaCha8Rng| -> Vec<u64> { (0..m).map(|_| rng.random_range(0..=UNIFORM_MAX)).collect() };
        Ok(match self {
            Family::AdditiveUniform => ValuationSpec::Additive { weights: Weights::Integers(uniform(rng)) },
            Family::AdditiveZipf => {
                let mut rank: Vec<u64> = (1..=m as u64).collect();
                rank.shuffle(rng);
                ValuationSpec::Additive { weights: Weights::Integers(rank.iter().map(|r| ZIPF_TOP.div_ceil(*r)).collect()) }
            }
            Family::BinarySparse => {
                if m < 2 {
                    return Ok(ValuationSpec::Binary { ones: (0..m).collect() });
                }
                let a = rng.random_range(0..m);
                let b = (a + rng.random_range(1..m)) % m;
                let mut ones = vec![a, b];
                ones.sort_unstable();
                ValuationSpec::Binary { ones }
            }
            Family::SizeDominant => {
                let tiebreak = uniform(rng);
                let base = tiebreak.iter().sum::<u64>().max(1);
                ValuationSpec::SizeDominant { base, tiebreak: Weights::Integers(tiebreak) }
            }
            Family::KValued(k) => ValuationSpec::KValued {
                k,
                inner: Box::new(ValuationSpec::Additive { weights: Weights::Integers(uniform(rng)) }),
            },
            Family::IdenticalInt(k) => {
                let k = u32::try_from(k + 1).map_err(|_| BenchError::Config(format!("K = {k} is too large")))?;
                ValuationSpec::KValued { k, inner: Box::new(ValuationSpec::Additive { weights: Weights::Integers(uniform(rng)) }) }
            }
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::AdditiveUniform => f.write_str("additive-uniform"),
            Family::AdditiveZipf => f.write_str("additive-zipf"),
            Family::BinarySparse => f.write_str("binary-sparse"),
            Family::SizeDominant => f.write_str("size-dominant"),
            Family::KValued(k) => write!(f, "kvalued({k})"),
            Family::IdenticalInt(k) => write!(f, "identical-int({k})"),
        }
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::Config(format!("unknown family {s:?}"));
        let arg = |prefix: &str| -> Option<&str> { s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')') };
        Ok(match s {
            "additive-uniform" => Family::AdditiveUniform,
            "additive-zipf" => Family::AdditiveZipf,
            "binary-sparse" => Family::BinarySparse,
            "size-dominant" => Family::SizeDominant,
            _ => {
                if let Some(k) = arg("kvalued") {
                    let k: u32 = k.trim().parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(BenchError::Config("kvalued needs k >= 1".into()));
                    }
                    Family::KValued(k)
                } else if let Some(k) = arg("identical-int") {
                    Family::IdenticalInt(k.trim().parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl TryFrom<String> for Family {
    type Error = BenchError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}
