//! Operator-spec documents: `{"kind", "params", "children", "profile"}`.

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use crate::error::{OpError, Result};
use crate::matrix::{ComplexMatrix, C64};

use super::{IndexMap, OperatorKind, SeqRule, SpectralProfile, StructuredOperator};

pub fn to_json(op: &StructuredOperator) -> Value {
    let mut params = Map::new();
    let mut children: Vec<Value> = Vec::new();
    let kind = match op.kind() {
        OperatorKind::DiagonalWithLimit { entries, limit } => {
            params.insert("entries".into(), serde_json::to_value(entries).expect("rule serialises"));
            params.insert("limit".into(), json!(limit));
            "diagonal_with_limit"
        }
        OperatorKind::WeightedShift { weights } => {
            params.insert("weights".into(), serde_json::to_value(weights).expect("rule serialises"));
            "weighted_shift"
        }
        OperatorKind::ScaledIdentity { scalar } => {
            params.insert("scalar".into(), json!([scalar.re, scalar.im]));
            "scaled_identity"
        }
        OperatorKind::FiniteMatrix { matrix } => {
            params.insert("matrix".into(), serde_json::to_value(matrix).expect("matrix serialises"));
            "finite_matrix"
        }
        OperatorKind::DirectSum { parts } => {
            children.extend(parts.iter().map(to_json));
            "direct_sum"
        }
        OperatorKind::Block2x2 { first, second, blocks } => {
            params.insert("first".into(), json!(first));
            params.insert("second".into(), json!(second));
            children.extend(blocks.iter().map(|b| b.as_ref().map_or(Value::Null, to_json)));
            "block2x2"
        }
        OperatorKind::Adjoint(inner) => {
            children.push(to_json(inner));
            "adjoint"
        }
        OperatorKind::Compose(a, b) => {
            children.extend([to_json(a), to_json(b)]);
            "compose"
        }
        OperatorKind::Sum(a, b) => {
            children.extend([to_json(a), to_json(b)]);
            "sum"
        }
        OperatorKind::Scale(s, inner) => {
            params.insert("scalar".into(), json!([s.re, s.im]));
            children.push(to_json(inner));
            "scale"
        }
        OperatorKind::InterleavedEmbedding { inner, map } => {
            params.insert("map".into(), json!(map));
            children.push(to_json(inner));
            "interleaved_embedding"
        }
    };
    let mut doc = Map::new();
    doc.insert("kind".into(), json!(kind));
    doc.insert("params".into(), Value::Object(params));
    doc.insert("children".into(), Value::Array(children));
    if let Some(p) = op.profile() {
        doc.insert("profile".into(), serde_json::to_value(p).expect("profile serialises"));
    }
    Value::Object(doc)
}

pub fn to_json_string(op: &StructuredOperator) -> String {
    serde_json::to_string_pretty(&to_json(op)).expect("json value serialises")
}

/// Parse a spec document; syntax errors carry `line:column`, structural errors a JSON path.
pub fn from_json_str(text: &str) -> Result<StructuredOperator> {
    let value: Value = serde_json::from_str(text).map_err(|e| OpError::Parse {
        locus: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    from_json(&value)
}

pub fn from_json(value: &Value) -> Result<StructuredOperator> {
    parse(value, "$")
}

fn err(locus: &str, message: impl Into<String>) -> OpError {
    OpError::Parse { locus: locus.to_string(), message: message.into() }
}

fn field<T: DeserializeOwned>(params: &Map<String, Value>, name: &str, locus: &str) -> Result<T> {
    let at = format!("{locus}.params.{name}");
    let v = params.get(name).ok_or_else(|| err(&at, "missing field"))?;
    serde_json::from_value(v.clone()).map_err(|e| err(&at, e.to_string()))
}

fn scalar(params: &Map<String, Value>, locus: &str) -> Result<C64> {
    let at = format!("{locus}.params.scalar");
    match params.get("scalar") {
        Some(Value::Number(x)) => Ok(C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Some(v) => {
            let [re, im]: [f64; 2] = serde_json::from_value(v.clone()).map_err(|e| err(&at, e.to_string()))?;
            Ok(C64::new(re, im))
        }
        None => Err(err(&at, "missing field")),
    }
}

fn parse(value: &Value, locus: &str) -> Result<StructuredOperator> {
    let obj = value.as_object().ok_or_else(|| err(locus, "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "kind" | "params" | "children" | "profile") {
            return Err(err(&format!("{locus}.{key}"), "unknown field"));
        }
    }
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| err(&format!("{locus}.kind"), "missing or non-string kind"))?;
    let empty = Map::new();
    let params = match obj.get("params") {
        None | Some(Value::Null) => &empty,
        Some(Value::Object(m)) => m,
        Some(_) => return Err(err(&format!("{locus}.params"), "expected an object")),
    };
    let raw_children: &[Value] = match obj.get("children") {
        None | Some(Value::Null) => &[],
        Some(Value::Array(a)) => a,
        Some(_) => return Err(err(&format!("{locus}.children"), "expected an array")),
    };
    let child = |i: usize| -> Result<StructuredOperator> { parse(&raw_children[i], &format!("{locus}.children[{i}]")) };
    let arity = |k: usize| -> Result<()> {
        if raw_children.len() != k {
            return Err(err(&format!("{locus}.children"), format!("{kind} takes {k} children, got {}", raw_children.len())));
        }
        Ok(())
    };
    let wrap = |e: OpError| match e {
        OpError::Parse { .. } => e,
        other => err(locus, other.to_string()),
    };

    let op = match kind {
        "diagonal_with_limit" => {
            arity(0)?;
            let entries: SeqRule = field(params, "entries", locus)?;
            let limit: f64 = field(params, "limit", locus)?;
            StructuredOperator::diagonal(entries, limit)
        }
        "weighted_shift" => {
            arity(0)?;
            StructuredOperator::weighted_shift(field(params, "weights", locus)?)
        }
        "scaled_identity" => {
            arity(0)?;
            StructuredOperator::scaled_identity(scalar(params, locus)?)
        }
        "finite_matrix" => {
            arity(0)?;
            let m: ComplexMatrix = field(params, "matrix", locus)?;
            StructuredOperator::finite(m).map_err(wrap)?
        }
        "direct_sum" => {
            let parts = (0..raw_children.len()).map(child).collect::<Result<Vec<_>>>()?;
            StructuredOperator::direct_sum(parts).map_err(wrap)?
        }
        "block2x2" => {
            arity(4)?;
            let first: IndexMap = field(params, "first", locus)?;
            let second: IndexMap = field(params, "second", locus)?;
            let mut blocks: [Option<StructuredOperator>; 4] = Default::default();
            for (i, slot) in blocks.iter_mut().enumerate() {
                if !raw_children[i].is_null() {
                    *slot = Some(child(i)?);
                }
            }
            StructuredOperator::block2x2(first, second, blocks).map_err(wrap)?
        }
        "adjoint" => {
            arity(1)?;
            StructuredOperator::adjoint(child(0)?)
        }
        "compose" => {
            arity(2)?;
            StructuredOperator::compose(child(0)?, child(1)?).map_err(wrap)?
        }
        "sum" => {
            arity(2)?;
            StructuredOperator::sum(child(0)?, child(1)?).map_err(wrap)?
        }
        "scale" => {
            arity(1)?;
            StructuredOperator::scale(scalar(params, locus)?, child(0)?)
        }
        "interleaved_embedding" => {
            arity(1)?;
            let map: IndexMap = field(params, "map", locus)?;
            StructuredOperator::embed(child(0)?, map).map_err(wrap)?
        }
        other => return Err(err(&format!("{locus}.kind"), format!("unknown operator kind {other:?}"))),
    };
    match obj.get("profile") {
        None | Some(Value::Null) => Ok(op),
        Some(p) => {
            let at = format!("{locus}.profile");
            let profile: SpectralProfile = serde_json::from_value(p.clone()).map_err(|e| err(&at, e.to_string()))?;
            profile.validate().map_err(|e| err(&at, e.to_string()))?;
            Ok(op.with_profile(profile))
        }
    }
}
