//! Instance files: `{"A": [["p/q", ...], ...], "b": ["p/q", ...], "meta": {...}}`.
//!
//! Entries may also be plain JSON integers.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::Polyhedron;
use crate::numeric::{format_rational, parse_rational, Matrix, Rational, Vector};

#[derive(Clone, Debug)]
pub struct Instance {
    pub poly: Polyhedron,
    pub meta: Map<String, Value>,
}

impl Instance {
    pub fn new(poly: Polyhedron) -> Self {
        Instance {
            poly,
            meta: Map::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: Value) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> Value {
        let a: Vec<Vec<String>> = (0..self.poly.num_rows())
            .map(|i| self.poly.row(i).iter().map(format_rational).collect())
            .collect();
        json!({
            "A": a,
            "b": rationals_to_json(self.poly.rhs()),
            "meta": Value::Object(self.meta.clone()),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .get("A")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("missing array \"A\"".into()))?;
        let a = rows
            .iter()
            .map(parse_vector)
            .collect::<Result<Vec<Vector>>>()?;
        let b = parse_vector(v.get("b").ok_or_else(|| Error::Format("missing \"b\"".into()))?)?;
        if a.is_empty() {
            return Err(Error::Format("no constraints".into()));
        }
        let poly = Polyhedron::new(
            Matrix::from_rows(a).map_err(|_| Error::Format("rows of A have different lengths".into()))?,
            b,
        )?;
        let meta = match v.get("meta") {
            Some(Value::Object(m)) => m.clone(),
            None | Some(Value::Null) => Map::new(),
            Some(_) => return Err(Error::Format("\"meta\" must be an object".into())),
        };
        Ok(Instance { poly, meta })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json(&v)
    }
}

pub fn rationals_to_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(format_rational(r))).collect())
}

pub fn parse_scalar(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Ok(parse_rational(&n.to_string())?),
        },
        other => Err(Error::Format(format!("expected a rational, got {other}"))),
    }
}

pub fn parse_vector(v: &Value) -> Result<Vector> {
    v.as_array()
        .ok_or_else(|| Error::Format(format!("expected an array, got {v}")))?
        .iter()
        .map(parse_scalar)
        .collect()
}

/// Comma-separated rationals, e.g. `"1, -1/2, 3"`.
pub fn parse_vector_str(s: &str) -> Result<Vector> {
    s.split(',')
        .map(|t| parse_rational(t.trim()).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};

    #[test]
    fn round_trip() {
        let p = Polyhedron::new(
            Matrix::from_rows(vec![vec![int(1), ratio(-1, 2)], vec![int(0), int(3)]]).unwrap(),
            vec![ratio(7, 3), int(0)],
        )
        .unwrap();
        let inst = Instance::new(p.clone()).with_meta("kind", json!("test"));
        let text = inst.to_json().to_string();
        assert!(text.contains("\"-1/2\""));
        let back = Instance::parse(&text).unwrap();
        assert_eq!(back.poly, p);
        assert_eq!(back.meta["kind"], "test");
    }

    #[test]
    fn accepts_integers_and_rejects_garbage() {
        let inst = Instance::parse(r#"{"A": [[1, 0], [0, 1]], "b": [1, "2/3"]}"#).unwrap();
        assert_eq!(inst.poly.rhs()[1], ratio(2, 3));
        assert!(Instance::parse(r#"{"A": [[1, 0], [0]], "b": [1, 1]}"#).is_err());
        assert!(Instance::parse(r#"{"A": [["x", 0]], "b": [1]}"#).is_err());
        assert!(Instance::parse(r#"{"b": [1]}"#).is_err());
    }

    #[test]
    fn vector_strings() {
        assert_eq!(parse_vector_str("1, -1/2").unwrap(), vec![int(1), ratio(-1, 2)]);
    }
}
