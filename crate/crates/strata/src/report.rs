//! JSON report building for the command line tool. Reports use a versioned
//! envelope, sorted keys (the serializer's map is ordered), exact fractions
//! rendered as "a/b" strings, and certificates inline so every claim can be
//! re-checked offline.

use crate::edge::{CrMethod, Extraction};
use crate::field::Field;
use crate::linalg::{Mat, Subspace};
use crate::quiver::Slope;
use crate::real::Real;
use crate::tensor::{field_spec_to_json, json_to_field_spec, RestrictionTriple, TensorError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "v1";

/// Seed used when the command line does not pass one; fixed so that repeated
/// invocations reproduce byte-identical reports.
pub const DEFAULT_SEED: u64 = 7;

pub fn envelope(verb: &str, options: Value, result: Value) -> Value {
    json!({ "schema": SCHEMA_VERSION, "verb": verb, "options": options, "result": result })
}

pub fn error_envelope(verb: &str, message: &str) -> Value {
    json!({ "schema": SCHEMA_VERSION, "verb": verb, "error": message })
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

pub fn real_json(r: &Real) -> Value {
    json!(r.to_f64())
}

pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses "a/b" or a bare integer "a" as an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational, TensorError> {
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let bad = || TensorError(format!("{s:?} is not a fraction a/b"));
    let n: BigInt = num.trim().parse().map_err(|_| bad())?;
    let d: BigInt = den.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(TensorError(format!("{s:?} has a zero denominator")));
    }
    Ok(BigRational::new(n, d))
}

pub fn slope_string(s: &Slope) -> String {
    match s {
        Slope::Infinite => "inf".into(),
        Slope::Finite { num, den } => format!("{num}/{den}"),
    }
}

pub fn mat_json(field: &Field, m: &Mat) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|r| Value::Array((0..m.cols()).map(|c| json!(field.encode(m.get(r, c)))).collect()))
        .collect();
    Value::Array(rows)
}

/// Reads a rectangular array of encoded scalars back; at least one row and
/// one column, since certificate maps are never empty.
pub fn mat_from_json(field: &Field, v: &Value) -> Result<Mat, TensorError> {
    let rows = v
        .as_array()
        .ok_or_else(|| TensorError("matrix JSON must be an array of rows".into()))?;
    if rows.is_empty() {
        return Err(TensorError("matrix JSON has no rows".into()));
    }
    let mut parsed: Vec<Vec<crate::field::Scalar>> = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| TensorError("matrix row must be an array".into()))?;
        let mut out = Vec::with_capacity(row.len());
        for cell in row {
            let s = cell
                .as_str()
                .ok_or_else(|| TensorError("matrix entries must be strings".into()))?;
            out.push(field.parse(s).map_err(|e| TensorError(e.0))?);
        }
        parsed.push(out);
    }
    let cols = parsed[0].len();
    if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
        return Err(TensorError("matrix JSON is ragged or has empty rows".into()));
    }
    Ok(Mat::from_rows(field, cols, parsed))
}

pub fn subspace_json(s: &Subspace) -> Value {
    json!({
        "ambient": s.ambient_dim(),
        "dim": s.dim(),
        "field": field_spec_to_json(&s.field().spec()),
        "basis": mat_json(s.field(), s.basis()),
    })
}

pub fn cr_method_json(m: &CrMethod) -> Value {
    match m {
        CrMethod::ExactMinors => json!({ "kind": "exact" }),
        CrMethod::MonteCarlo { trials, field } => json!({
            "kind": "monte_carlo",
            "trials": trials,
            "field": field_spec_to_json(field),
        }),
    }
}

/// A power-to-matrix-multiplication restriction certificate, self-contained:
/// the field the maps live over, the power, the target dimensions, and the
/// three maps.
pub fn extraction_json(field: &Field, ext: &Extraction) -> Value {
    let maps: Vec<Value> = ext.triple.maps.iter().map(|m| mat_json(field, m)).collect();
    json!({
        "field": field_spec_to_json(&field.spec()),
        "power": ext.power,
        "e": ext.e,
        "h": ext.h,
        "l": ext.l,
        "maps": maps,
    })
}

pub fn extraction_from_json(v: &Value) -> Result<(Field, Extraction), TensorError> {
    let obj = v
        .as_object()
        .ok_or_else(|| TensorError("extraction JSON must be an object".into()))?;
    let spec = json_to_field_spec(
        obj.get("field").ok_or_else(|| TensorError("extraction needs a \"field\"".into()))?,
    )?;
    let field = Field::new(&spec).map_err(|e| TensorError(e.0))?;
    let dim = |key: &str| -> Result<usize, TensorError> {
        obj.get(key)
            .and_then(|x| x.as_u64())
            .filter(|&x| x >= 1)
            .map(|x| x as usize)
            .ok_or_else(|| TensorError(format!("extraction needs a positive integer {key:?}")))
    };
    let power = dim("power")?;
    let (e, h, l) = (dim("e")?, dim("h")?, dim("l")?);
    let maps_json = obj
        .get("maps")
        .and_then(|m| m.as_array())
        .ok_or_else(|| TensorError("extraction needs a \"maps\" array".into()))?;
    if maps_json.len() != 3 {
        return Err(TensorError(format!("extraction has {} maps, expected 3", maps_json.len())));
    }
    let maps = maps_json
        .iter()
        .map(|m| mat_from_json(&field, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((field, Extraction { power, e, h, l, triple: RestrictionTriple { maps } }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    #[test]
    fn ratio_strings_round_trip() {
        let r = parse_ratio("3/4").unwrap();
        assert_eq!(ratio_string(&r), "3/4");
        assert_eq!(parse_ratio("2/4").unwrap(), parse_ratio("1/2").unwrap());
        assert_eq!(parse_ratio("5").unwrap(), BigRational::from_integer(5.into()));
        let neg = parse_ratio("-1/3").unwrap();
        assert!(neg < BigRational::zero());
        assert!(parse_ratio("a/b").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn matrices_round_trip() {
        let f = Field::prime(7).unwrap();
        let m = Mat::from_fn(&f, 2, 3, |r, c| f.parse(&format!("{}", (r * 3 + c) % 7)).unwrap());
        let back = mat_from_json(&f, &mat_json(&f, &m)).unwrap();
        assert_eq!(back.rows(), 2);
        assert_eq!(back.cols(), 3);
        for r in 0..2 {
            for c in 0..3 {
                assert_eq!(back.get(r, c), m.get(r, c));
            }
        }
        assert!(mat_from_json(&f, &json!([[ "1" ], [ "2", "3" ]])).is_err());
        assert!(mat_from_json(&f, &json!([])).is_err());
    }

    #[test]
    fn extractions_round_trip() {
        let f = Field::prime(5).unwrap();
        let ext = Extraction {
            power: 2,
            e: 1,
            h: 2,
            l: 1,
            triple: RestrictionTriple {
                maps: vec![
                    Mat::identity(&f, 2),
                    Mat::identity(&f, 2),
                    Mat::from_fn(&f, 4, 1, |_, _| f.one()),
                ],
            },
        };
        let v = extraction_json(&f, &ext);
        let (field, back) = extraction_from_json(&v).unwrap();
        assert_eq!(field.spec(), FieldSpec::Prime { p: 5 });
        assert_eq!(back.power, 2);
        assert_eq!(back.triple, ext.triple);
    }

    #[test]
    fn envelopes_are_stable() {
        let v = envelope("zeta", json!({"seed": 7}), json!({"value": 1.0}));
        let s = render(&v);
        assert!(s.starts_with("{\n  \"options\""));
        assert!(s.ends_with("\n"));
        assert_eq!(slope_string(&Slope::Infinite), "inf");
        assert_eq!(slope_string(&Slope::finite(4, 6)), "2/3");
    }
}
