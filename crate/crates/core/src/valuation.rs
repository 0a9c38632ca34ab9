//! Valuation specifications and their evaluators.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bundle::Bundle;
use crate::error::{ModelError, QueryError};
use crate::value::Value;
use crate::GoodId;

/// Per-good weights. Integer weights are kept unboxed.
#[derive(Clone, PartialEq, Eq)]
pub enum Weights {
    Integers(Vec<u64>),
    Rationals(Vec<Value>),
}

impl Weights {
    pub fn len(&self) -> usize {
        match self {
            Weights::Integers(w) => w.len(),
            Weights::Rationals(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Value {
        match self {
            Weights::Integers(w) => Value::from_u64(w[i]),
            Weights::Rationals(w) => w[i].clone(),
        }
    }

    pub fn from_values(values: Vec<Value>) -> Self {
        if values.iter().all(|v| v.to_u64().is_some()) {
            Weights::Integers(values.iter().map(|v| v.to_u64().unwrap()).collect())
        } else {
            Weights::Rationals(values)
        }
    }

    pub fn total(&self) -> Value {
        match self {
            Weights::Integers(w) => Value::from_u128(w.iter().map(|&x| x as u128).sum()),
            Weights::Rationals(w) => w.iter().cloned().sum(),
        }
    }
}

impl fmt::Debug for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weights::Integers(w) => f.debug_list().entries(w.iter()).finish(),
            Weights::Rationals(w) => f.debug_list().entries(w.iter()).finish(),
        }
    }
}

impl Serialize for Weights {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Weights::Integers(w) => serializer.collect_seq(w.iter().map(|x| x.to_string())),
            Weights::Rationals(w) => serializer.collect_seq(w.iter()),
        }
    }
}

impl<'de> Deserialize<'de> for Weights {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Weights::from_values(Vec::<Value>::deserialize(deserializer)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub subset: Vec<usize>,
    pub value: Value,
}

/// How one agent values bundles, as written in instance files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ValuationSpec {
    Additive { weights: Weights },
    Binary { ones: Vec<usize> },
    /// Explicit monotonic table; the empty set is worth 0 when absent.
    Table { entries: Vec<TableEntry> },
    /// `base * |S| + tiebreak(S)`, with the tiebreak weights summing to at most `base`.
    SizeDominant { base: u64, tiebreak: Weights },
    /// `inner` quantized to `0..k` by thresholds at multiples of `inner(G) / k`.
    #[serde(rename = "kvalued")]
    KValued { k: u32, inner: Box<ValuationSpec> },
}

/// The valuation classes protocols state preconditions against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationClass {
    Additive,
    Binary,
    Monotonic,
    SizeDominant,
    KValued,
}

impl ValuationSpec {
    pub fn class(&self) -> ValuationClass {
        match self {
            ValuationSpec::Additive { .. } => ValuationClass::Additive,
            ValuationSpec::Binary { .. } => ValuationClass::Binary,
            ValuationSpec::Table { .. } => ValuationClass::Monotonic,
            ValuationSpec::SizeDominant { .. } => ValuationClass::SizeDominant,
            ValuationSpec::KValued { .. } => ValuationClass::KValued,
        }
    }

    /// Additive specs, binary included.
    pub fn is_additive(&self) -> bool {
        matches!(self, ValuationSpec::Additive { .. } | ValuationSpec::Binary { .. })
    }

    /// Upper bound on the number of distinct values over all bundles, when known.
    pub fn distinct_value_bound(&self) -> Option<u64> {
        match self {
            ValuationSpec::KValued { k, .. } => Some(*k as u64),
            _ => None,
        }
    }

    pub fn compile(&self, m: usize) -> Result<Valuation, ModelError> {
        let kind = match self {
            ValuationSpec::Additive { weights } => {
                if weights.len() != m {
                    return Err(invalid(format!("{} additive weights for {m} goods", weights.len())));
                }
                Kind::Additive(PrefixSums::new(weights))
            }
            ValuationSpec::Binary { ones } => {
                let b = Bundle::from_indices(ones)?;
                b.check_range(m)?;
                let mut w = vec![0u64; m];
                for g in b.goods() {
                    w[g.index()] = 1;
                }
                Kind::Additive(PrefixSums::new(&Weights::Integers(w)))
            }
            ValuationSpec::Table { entries } => {
                let mut table = HashMap::with_capacity(entries.len());
                for e in entries {
                    let b = Bundle::from_indices(&e.subset)?;
                    b.check_range(m)?;
                    if table.insert(b.clone(), e.value.clone()).is_some() {
                        return Err(invalid(format!("table lists {b:?} twice")));
                    }
                }
                match table.get(&Bundle::empty()) {
                    Some(v) if !v.is_zero() => return Err(invalid("table gives the empty bundle a nonzero value".into())),
                    _ => {}
                }
                check_table_monotone(&table)?;
                Kind::Table(table)
            }
            ValuationSpec::SizeDominant { base, tiebreak } => {
                if tiebreak.len() != m {
                    return Err(invalid(format!("{} tiebreak weights for {m} goods", tiebreak.len())));
                }
                if tiebreak.total() > Value::from_u64(*base) {
                    return Err(invalid("tiebreak weights sum above the per-good base".into()));
                }
                Kind::SizeDominant { base: *base, tiebreak: PrefixSums::new(tiebreak) }
            }
            ValuationSpec::KValued { k, inner } => {
                if *k == 0 {
                    return Err(invalid("k must be at least 1".into()));
                }
                let inner = inner.compile(m)?;
                let total = inner
                    .value(&Bundle::all(m))
                    .map_err(|e| invalid(format!("inner valuation must value all goods: {e}")))?;
                Kind::KValued { k: *k, inner: Box::new(inner), total }
            }
        };
        Ok(Valuation { m, class: self.class(), kind })
    }
}

fn invalid(msg: String) -> ModelError {
    ModelError::InvalidInstance(msg)
}

/// Every entry is compared with each of its one-smaller subsets present in the table.
fn check_table_monotone(table: &HashMap<Bundle, Value>) -> Result<(), ModelError> {
    for (set, v) in table {
        for g in set.goods() {
            let smaller = set.without(g);
            let sv = if smaller.is_empty() { Some(Value::zero()) } else { table.get(&smaller).cloned() };
            if let Some(sv) = sv {
                if sv > *v {
                    return Err(invalid(format!("table is not monotonic: {smaller:?} worth more than {set:?}")));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum PrefixSums {
    Int(Vec<u64>),
    Rational(Vec<BigRational>),
}

impl PrefixSums {
    fn new(w: &Weights) -> Self {
        match w {
            Weights::Integers(xs) => {
                let mut out = Vec::with_capacity(xs.len() + 1);
                let mut acc: u64 = 0;
                out.push(0);
                for &x in xs {
                    match acc.checked_add(x) {
                        Some(a) => acc = a,
                        None => return PrefixSums::new(&Weights::Rationals(xs.iter().map(|&x| Value::from_u64(x)).collect())),
                    }
                    out.push(acc);
                }
                PrefixSums::Int(out)
            }
            Weights::Rationals(xs) => {
                let mut out = Vec::with_capacity(xs.len() + 1);
                let mut acc = BigRational::zero();
                out.push(acc.clone());
                for x in xs {
                    acc += x.ratio();
                    out.push(acc.clone());
                }
                PrefixSums::Rational(out)
            }
        }
    }

    fn sum(&self, b: &Bundle) -> Value {
        match self {
            PrefixSums::Int(p) => {
                let s: u128 = b.runs().map(|r| (p[r.end] - p[r.start]) as u128).sum();
                Value::from_u128(s)
            }
            PrefixSums::Rational(p) => {
                let mut s = BigRational::zero();
                for r in b.runs() {
                    s += &p[r.end] - &p[r.start];
                }
                Value::from_ratio(s).expect("sum of nonnegative weights")
            }
        }
    }

    fn weight(&self, g: usize) -> Value {
        match self {
            PrefixSums::Int(p) => Value::from_u64(p[g + 1] - p[g]),
            PrefixSums::Rational(p) => Value::from_ratio(&p[g + 1] - &p[g]).expect("nonnegative weight"),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Additive(PrefixSums),
    Table(HashMap<Bundle, Value>),
    SizeDominant { base: u64, tiebreak: PrefixSums },
    KValued { k: u32, inner: Box<Valuation>, total: Value },
}

/// A compiled valuation. Additive kinds answer in O(runs of the bundle).
#[derive(Clone, Debug)]
pub struct Valuation {
    m: usize,
    class: ValuationClass,
    kind: Kind,
}

impl Valuation {
    pub fn goods(&self) -> usize {
        self.m
    }

    pub fn class(&self) -> ValuationClass {
        self.class
    }

    pub fn is_additive(&self) -> bool {
        matches!(self.kind, Kind::Additive(_))
    }

    pub fn value(&self, bundle: &Bundle) -> Result<Value, QueryError> {
        bundle.check_range(self.m)?;
        match &self.kind {
            Kind::Additive(p) => Ok(p.sum(bundle)),
            Kind::Table(t) => match t.get(bundle) {
                Some(v) => Ok(v.clone()),
                None if bundle.is_empty() => Ok(Value::zero()),
                None => Err(QueryError::IncompleteSpecification(bundle.clone())),
            },
            Kind::SizeDominant { base, tiebreak } => {
                Ok(Value::from_u128(*base as u128 * bundle.len() as u128) + tiebreak.sum(bundle))
            }
            Kind::KValued { k, inner, total } => {
                if total.is_zero() {
                    return Ok(Value::zero());
                }
                let v = inner.value(bundle)?;
                let level = (v.ratio() * BigRational::from_integer(BigInt::from(*k)) / total.ratio()).floor();
                let level = Value::from_ratio(level).expect("nonnegative level");
                Ok(level.min(Value::from_u64(*k as u64 - 1)))
            }
        }
    }

    /// Value of a single good under an additive valuation.
    pub fn weight(&self, g: GoodId) -> Option<Value> {
        match &self.kind {
            Kind::Additive(p) if g.index() < self.m => Some(p.weight(g.index())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(w: &[u64]) -> Weights {
        Weights::Integers(w.to_vec())
    }

    fn b(ix: &[usize]) -> Bundle {
        Bundle::from_indices(ix).unwrap()
    }

    #[test]
    fn additive_sums() {
        let v = ValuationSpec::Additive { weights: ints(&[3, 1, 1]) }.compile(3).unwrap();
        assert_eq!(v.value(&b(&[1, 2])).unwrap(), Value::from_u64(2));
        assert_eq!(v.value(&Bundle::empty()).unwrap(), Value::zero());
        assert!(v.value(&b(&[3])).is_err());
    }

    #[test]
    fn appendix_weights_total() {
        let mut w = vec![8, 10];
        w.extend(std::iter::repeat(1).take(12));
        let v = ValuationSpec::Additive { weights: ints(&w) }.compile(14).unwrap();
        assert_eq!(v.value(&Bundle::all(14)).unwrap(), Value::from_u64(30));
    }

    #[test]
    fn binary_counts_ones() {
        let v = ValuationSpec::Binary { ones: vec![1] }.compile(2).unwrap();
        assert_eq!(v.value(&b(&[0, 1])).unwrap(), Value::from_u64(1));
        assert_eq!(v.weight(GoodId::new(0)), Some(Value::zero()));
    }

    #[test]
    fn size_dominant_prefers_larger_sets() {
        let spec = ValuationSpec::SizeDominant { base: 100, tiebreak: ints(&[1, 2, 3]) };
        let v = spec.compile(3).unwrap();
        assert_eq!(v.value(&b(&[0])).unwrap(), Value::from_u64(101));
        assert_eq!(v.value(&b(&[1, 2])).unwrap(), Value::from_u64(205));
        let bad = ValuationSpec::SizeDominant { base: 5, tiebreak: ints(&[1, 2, 3]) };
        assert!(bad.compile(3).is_err());
    }

    #[test]
    fn table_lookup_and_incomplete() {
        let spec = ValuationSpec::Table {
            entries: vec![
                TableEntry { subset: vec![0], value: Value::from_u64(1) },
                TableEntry { subset: vec![0, 1], value: Value::from_u64(2) },
            ],
        };
        let v = spec.compile(2).unwrap();
        assert_eq!(v.value(&b(&[0, 1])).unwrap(), Value::from_u64(2));
        assert_eq!(v.value(&Bundle::empty()).unwrap(), Value::zero());
        assert_eq!(v.value(&b(&[1])), Err(QueryError::IncompleteSpecification(b(&[1]))));
    }

    #[test]
    fn table_must_be_monotone() {
        let spec = ValuationSpec::Table {
            entries: vec![
                TableEntry { subset: vec![0], value: Value::from_u64(3) },
                TableEntry { subset: vec![0, 1], value: Value::from_u64(2) },
            ],
        };
        assert!(spec.compile(2).is_err());
    }

    #[test]
    fn kvalued_quantizes() {
        let spec = ValuationSpec::KValued {
            k: 3,
            inner: Box::new(ValuationSpec::Additive { weights: ints(&[1, 1, 1, 1, 1, 1]) }),
        };
        let v = spec.compile(6).unwrap();
        let levels: Vec<u64> = (0..=6).map(|j| v.value(&Bundle::range(0..j)).unwrap().to_u64().unwrap()).collect();
        assert_eq!(levels, vec![0, 0, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn spec_json_shapes() {
        let s = r#"{"type":"kvalued","k":2,"inner":{"type":"additive","weights":["1/2", 3]}}"#;
        let spec: ValuationSpec = serde_json::from_str(s).unwrap();
        match &spec {
            ValuationSpec::KValued { k: 2, inner } => match inner.as_ref() {
                ValuationSpec::Additive { weights: Weights::Rationals(w) } => {
                    assert_eq!(w[0], Value::new(1, 2).unwrap());
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
        let back: ValuationSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
