use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::random::Coins;

/// Value produced by a public symmetric function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionValue {
    Integer(u64),
    Real(f64),
    List(Vec<u64>),
    /// e.g. the maximum of an empty multiset
    Undefined,
}

impl fmt::Display for FunctionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionValue::Integer(v) => write!(f, "{v}"),
            FunctionValue::Real(v) => write!(f, "{v}"),
            FunctionValue::List(vs) => {
                let parts: Vec<String> = vs.iter().map(u64::to_string).collect();
                write!(f, "[{}]", parts.join(","))
            }
            FunctionValue::Undefined => write!(f, "undefined"),
        }
    }
}

type Reducer = dyn Fn(&[usize]) -> FunctionValue + Send + Sync;

/// User-supplied reducer. It is the caller's job to make it permutation
/// invariant; [`check_permutation_invariance`] spot-checks that.
#[derive(Clone)]
pub struct CustomFunction {
    name: String,
    reducer: Arc<Reducer>,
}

impl CustomFunction {
    pub fn new(name: impl Into<String>, reducer: impl Fn(&[usize]) -> FunctionValue + Send + Sync + 'static) -> Self {
        Self { name: name.into(), reducer: Arc::new(reducer) }
    }
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction").field("name", &self.name).finish()
    }
}

/// The public function `f` the third party evaluates on the recovered data.
#[derive(Debug, Clone, Default)]
pub enum SymmetricFunction {
    #[default]
    Sum,
    Max,
    Min,
    /// Ascending list of all values.
    SortedList,
    /// `h[v]` = number of occurrences of `v`, for `v` in `0..=max`.
    Histogram,
    Mean,
    Custom(CustomFunction),
}

impl SymmetricFunction {
    pub const BUILT_IN: [SymmetricFunction; 6] = [
        SymmetricFunction::Sum,
        SymmetricFunction::Max,
        SymmetricFunction::Min,
        SymmetricFunction::SortedList,
        SymmetricFunction::Histogram,
        SymmetricFunction::Mean,
    ];

    pub fn name(&self) -> &str {
        match self {
            SymmetricFunction::Sum => "sum",
            SymmetricFunction::Max => "max",
            SymmetricFunction::Min => "min",
            SymmetricFunction::SortedList => "sorted",
            SymmetricFunction::Histogram => "histogram",
            SymmetricFunction::Mean => "mean",
            SymmetricFunction::Custom(c) => &c.name,
        }
    }

    pub fn evaluate(&self, values: &[usize]) -> FunctionValue {
        let as_u64 = |v: usize| v as u64;
        match self {
            SymmetricFunction::Sum => FunctionValue::Integer(values.iter().map(|&v| as_u64(v)).sum()),
            SymmetricFunction::Max => values.iter().max().map_or(FunctionValue::Undefined, |&v| FunctionValue::Integer(as_u64(v))),
            SymmetricFunction::Min => values.iter().min().map_or(FunctionValue::Undefined, |&v| FunctionValue::Integer(as_u64(v))),
            SymmetricFunction::SortedList => {
                let mut sorted: Vec<u64> = values.iter().map(|&v| as_u64(v)).collect();
                sorted.sort_unstable();
                FunctionValue::List(sorted)
            }
            SymmetricFunction::Histogram => {
                let len = values.iter().max().map_or(0, |&m| m + 1);
                let mut hist = vec![0u64; len];
                for &v in values {
                    hist[v] += 1;
                }
                FunctionValue::List(hist)
            }
            SymmetricFunction::Mean => {
                if values.is_empty() {
                    FunctionValue::Undefined
                } else {
                    let total: u64 = values.iter().map(|&v| as_u64(v)).sum();
                    FunctionValue::Real(total as f64 / values.len() as f64)
                }
            }
            SymmetricFunction::Custom(c) => (c.reducer)(values),
        }
    }
}

impl FromStr for SymmetricFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sum" => SymmetricFunction::Sum,
            "max" => SymmetricFunction::Max,
            "min" => SymmetricFunction::Min,
            "sorted" | "sorted-list" => SymmetricFunction::SortedList,
            "histogram" => SymmetricFunction::Histogram,
            "mean" => SymmetricFunction::Mean,
            other => {
                return Err(domain!(
                    "unknown function `{other}` (expected sum, max, min, sorted, histogram, mean)"
                ))
            }
        })
    }
}

/// Evaluate `f` on `trials` random shuffles of `sample` and report whether
/// the value never changed.
pub fn check_permutation_invariance(f: &SymmetricFunction, sample: &[usize], trials: usize, coins: &mut impl Coins) -> bool {
    let reference = f.evaluate(sample);
    let mut shuffled = sample.to_vec();
    (0..trials).all(|_| {
        for i in (1..shuffled.len()).rev() {
            let j = coins.uniform(i + 1);
            shuffled.swap(i, j);
        }
        f.evaluate(&shuffled) == reference
    })
}
