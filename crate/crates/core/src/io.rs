//! JSON exchange formats for vectors, step functions and traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fpq::haar::StepFunction;
use crate::fpq::{DyadicAxisIndex, FpqParams, FpqVector, Rectangle};
use crate::greedy::GreedyTrace;
use crate::lpq::{LpqIndex, LpqParams, LpqVector};
use crate::space::SpaceVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpqEntryJson {
    pub j: u32,
    pub k: u32,
    pub v: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisJson {
    Interval { j: u32, k: u64 },
    Named(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FpqEntryJson {
    pub rect: Vec<AxisJson>,
    pub v: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum VectorJson {
    Lpq { p: f64, q: f64, entries: Vec<LpqEntryJson> },
    Fpq { p: f64, q: f64, d: usize, entries: Vec<FpqEntryJson> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionJson {
    pub grid_level: u32,
    pub values: Vec<f64>,
}

/// A vector read from JSON, in whichever space it declares.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyVector {
    Lpq(LpqVector),
    Fpq(FpqVector),
}

fn axis_from_json(a: &AxisJson) -> Result<DyadicAxisIndex> {
    match a {
        AxisJson::Interval { j, k } => DyadicAxisIndex::interval(*j, *k),
        AxisJson::Named(s) if s == "zero" => Ok(DyadicAxisIndex::Zero),
        AxisJson::Named(s) => Err(Error::Parse(format!("unknown axis {s:?}"))),
    }
}

fn axis_to_json(a: &DyadicAxisIndex) -> Value {
    match a {
        DyadicAxisIndex::Zero => json!("zero"),
        DyadicAxisIndex::Interval { level, offset } => json!({"j": level, "k": offset}),
    }
}

impl TryFrom<VectorJson> for AnyVector {
    type Error = Error;

    fn try_from(v: VectorJson) -> Result<Self> {
        match v {
            VectorJson::Lpq { p, q, entries } => {
                let params = LpqParams::new(p, q)?;
                let x = LpqVector::from_entries(params, entries.iter().map(|e| ((e.j, e.k), e.v)))?;
                Ok(AnyVector::Lpq(x))
            }
            VectorJson::Fpq { p, q, d, entries } => {
                let params = FpqParams::new(p, q, d)?;
                let items = entries
                    .iter()
                    .map(|e| {
                        let axes = e.rect.iter().map(axis_from_json).collect::<Result<Vec<_>>>()?;
                        Ok((Rectangle::new(axes)?, e.v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyVector::Fpq(FpqVector::from_entries(params, items)?))
            }
        }
    }
}

pub fn parse_vector(text: &str) -> Result<AnyVector> {
    let raw: VectorJson = serde_json::from_str(text)?;
    raw.try_into()
}

pub fn lpq_to_json(x: &LpqVector) -> Value {
    let entries: Vec<Value> = x
        .entries()
        .iter()
        .map(|(i, v)| json!({"j": i.row, "k": i.col, "v": v}))
        .collect();
    json!({"space": "lpq", "p": x.params().p(), "q": x.params().q(), "entries": entries})
}

pub fn fpq_to_json(x: &FpqVector) -> Value {
    let entries: Vec<Value> = x
        .entries()
        .iter()
        .map(|(r, v)| json!({"rect": r.axes().iter().map(axis_to_json).collect::<Vec<_>>(), "v": v}))
        .collect();
    let p = x.params();
    json!({"space": "fpq", "p": p.p(), "q": p.q(), "d": p.d(), "entries": entries})
}

impl AnyVector {
    pub fn to_json(&self) -> Value {
        match self {
            AnyVector::Lpq(x) => lpq_to_json(x),
            AnyVector::Fpq(x) => fpq_to_json(x),
        }
    }
}

/// JSON form of a basis index.
pub trait IndexJson {
    fn to_json(&self) -> Value;
}

impl IndexJson for LpqIndex {
    fn to_json(&self) -> Value {
        json!({"j": self.row, "k": self.col})
    }
}

impl IndexJson for Rectangle {
    fn to_json(&self) -> Value {
        Value::Array(self.axes().iter().map(axis_to_json).collect())
    }
}

impl IndexJson for usize {
    fn to_json(&self) -> Value {
        json!(self)
    }
}

pub fn trace_to_json<I: IndexJson>(trace: &GreedyTrace<I>) -> Value {
    json!({
        "selected": trace.selected.iter().map(IndexJson::to_json).collect::<Vec<_>>(),
        "residual_norms": trace.residual_norms,
        "terminated": trace.terminated.as_str(),
    })
}

pub fn index_set_to_json<I: IndexJson>(set: &BTreeSet<I>) -> Value {
    Value::Array(set.iter().map(IndexJson::to_json).collect())
}

pub fn coeff_map_to_json<I: IndexJson>(map: &BTreeMap<I, f64>) -> Value {
    Value::Array(map.iter().map(|(i, v)| json!({"index": i.to_json(), "value": v})).collect())
}

/// Reads a step function; `d` is needed because the value count only fixes
/// the product `grid_level * d`.
pub fn parse_step_function(text: &str, d: usize) -> Result<StepFunction> {
    let raw: StepFunctionJson = serde_json::from_str(text)?;
    StepFunction::new(d, raw.grid_level, raw.values)
}

pub fn step_function_to_json(f: &StepFunction) -> Value {
    json!({"grid_level": f.level, "values": f.values})
}
