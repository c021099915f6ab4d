//! JSON encodings of cones, COMs, bilinear forms and duality structures.
//!
//! Exact scalars are written as `"p/q"` strings (`"p"` for integers), floats
//! as JSON numbers. Readers accept either form for either mode.

use serde_json::{json, Map, Value};

use crate::com::Com;
use crate::conditioning::Bipartite;
use crate::cone::psd::HermitianBasis;
use crate::cone::{Cone, PolyCone, PsdCone};
use crate::error::{check_dim, ComError, Result};
use crate::linalg::{Matrix, Vector};
use crate::models::{AnyCom, AnyStructure, ModelRegistry, StructureRegistry};
use crate::scalar::{from_json, Field};
use crate::selfdual::DualityStructure;

pub const BUILTIN_SCHEME: &str = "builtin:";

fn parse_err(msg: impl Into<String>) -> ComError {
    ComError::Parse(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(format!("missing field {key:?}")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(format!("{key:?} must be a non-negative integer")))
}

pub fn vector_to_json<F: Field>(v: &[F]) -> Value {
    Value::Array(v.iter().map(Field::as_json).collect())
}

pub fn vector_from_json<F: Field>(v: &Value) -> Result<Vector<F>> {
    v.as_array().ok_or_else(|| parse_err("expected an array of numbers"))?.iter().map(from_json).collect()
}

pub fn matrix_to_json<F: Field>(m: &Matrix<F>) -> Value {
    Value::Array((0..m.rows()).map(|r| vector_to_json(m.row(r))).collect())
}

pub fn matrix_from_json<F: Field>(v: &Value) -> Result<Matrix<F>> {
    let rows: Vec<Vector<F>> =
        v.as_array().ok_or_else(|| parse_err("expected an array of rows"))?.iter().map(vector_from_json).collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(parse_err("empty matrix"));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(parse_err("ragged matrix rows"));
    }
    Ok(Matrix::from_rows(&rows))
}

pub fn cone_to_json<F: Field>(c: &Cone<F>) -> Value {
    match c {
        Cone::Polyhedral(p) => json!({
            "kind": "polyhedral",
            "dim": p.dim(),
            "generators": p.generators().iter().map(|g| vector_to_json(g)).collect::<Vec<_>>(),
        }),
        Cone::Psd(p) => {
            let mut m = Map::new();
            m.insert("kind".into(), json!("psd"));
            m.insert("hilbert_dim".into(), json!(p.hilbert_dim()));
            if !p.basis().is_standard() {
                m.insert("factors".into(), json!(p.basis().factor_dims()));
            }
            Value::Object(m)
        }
    }
}

pub fn cone_from_json<F: Field>(v: &Value) -> Result<Cone<F>> {
    match field(v, "kind")?.as_str() {
        Some("polyhedral") => {
            let gens: Vec<Vector<F>> = field(v, "generators")?
                .as_array()
                .ok_or_else(|| parse_err("generators must be an array"))?
                .iter()
                .map(vector_from_json)
                .collect::<Result<_>>()?;
            if let Some(dim) = v.get("dim") {
                let dim = dim.as_u64().ok_or_else(|| parse_err("dim must be an integer"))? as usize;
                for g in &gens {
                    check_dim(dim, g.len())?;
                }
            }
            Ok(Cone::Polyhedral(PolyCone::from_generators(gens)?))
        }
        Some("psd") => {
            let d = as_usize(v, "hilbert_dim")?;
            if d == 0 {
                return Err(parse_err("hilbert_dim must be positive"));
            }
            match v.get("factors") {
                None => Ok(Cone::Psd(PsdCone::new(d))),
                Some(f) => {
                    let dims: Vec<usize> = serde_json::from_value(f.clone()).map_err(|e| parse_err(e.to_string()))?;
                    if dims.is_empty() || dims.iter().product::<usize>() != d {
                        return Err(parse_err("factor dimensions do not multiply to hilbert_dim"));
                    }
                    Ok(Cone::Psd(PsdCone::with_basis(HermitianBasis::from_factor_dims(&dims))))
                }
            }
        }
        _ => Err(parse_err("cone kind must be \"polyhedral\" or \"psd\"")),
    }
}

pub fn com_to_json<F: Field>(c: &Com<F>) -> Value {
    json!({
        "label": c.label(),
        "dim": c.dim(),
        "state_cone": cone_to_json(c.state_cone()),
        "effect_cone": cone_to_json(c.effect_cone()),
        "unit": vector_to_json(c.unit()),
    })
}

/// Builds the candidate without validating it; see [`crate::com::validate_com`].
pub fn com_candidate_from_json<F: Field>(v: &Value) -> Result<crate::com::ComCandidate<F>> {
    let label = v.get("label").and_then(Value::as_str).unwrap_or("unnamed").to_string();
    let state_cone = cone_from_json(field(v, "state_cone")?)?;
    let effect_cone = match v.get("effect_cone") {
        Some(e) => cone_from_json(e)?,
        None => state_cone.dual(),
    };
    let unit = vector_from_json(field(v, "unit")?)?;
    if let Some(dim) = v.get("dim") {
        check_dim(dim.as_u64().ok_or_else(|| parse_err("dim must be an integer"))? as usize, unit.len())?;
    }
    Ok(crate::com::ComCandidate { label, state_cone, effect_cone, unit })
}

pub fn mentions_psd(v: &Value) -> bool {
    ["state_cone", "effect_cone"].iter().any(|k| v.get(k).and_then(|c| c.get("kind")).and_then(Value::as_str) == Some("psd"))
}

/// Exact mode unless a cone is PSD.
pub fn any_com_from_json(v: &Value) -> Result<AnyCom> {
    if let Some(name) = v.as_str() {
        return resolve_builtin_model(name);
    }
    fn build<F: Field>(v: &Value) -> Result<Com<F>> {
        let c = com_candidate_from_json(v)?;
        Com::new(c.label, c.state_cone, c.effect_cone, c.unit)
    }
    if mentions_psd(v) {
        build(v).map(AnyCom::Float)
    } else {
        build(v).map(AnyCom::Exact)
    }
}

pub fn any_com_to_json(c: &AnyCom) -> Value {
    match c {
        AnyCom::Exact(c) => com_to_json(c),
        AnyCom::Float(c) => com_to_json(c),
    }
}

pub fn resolve_builtin_model(uri: &str) -> Result<AnyCom> {
    let name = uri.strip_prefix(BUILTIN_SCHEME).ok_or_else(|| parse_err(format!("expected {BUILTIN_SCHEME}<name>, got {uri:?}")))?;
    ModelRegistry::builtin().resolve(name)
}

pub fn resolve_builtin_structure(uri: &str) -> Result<(AnyCom, AnyStructure)> {
    let name = uri.strip_prefix(BUILTIN_SCHEME).ok_or_else(|| parse_err(format!("expected {BUILTIN_SCHEME}<name>, got {uri:?}")))?;
    StructureRegistry::builtin().resolve(name)
}

pub fn bipartite_to_json<F: Field>(b: &Bipartite<F>) -> Value {
    json!({ "left": b.left, "right": b.right, "coords": vector_to_json(&b.coords) })
}

/// Accepts `{"left", "right", "coords"}` or `{"matrix": [[...]]}`.
pub fn bipartite_from_json<F: Field>(v: &Value) -> Result<Bipartite<F>> {
    if let Some(m) = v.get("matrix") {
        return Ok(Bipartite::from_matrix(&matrix_from_json(m)?));
    }
    Bipartite::new(vector_from_json(field(v, "coords")?)?, as_usize(v, "left")?, as_usize(v, "right")?)
}

pub fn structure_to_json<F: Field>(d: &DualityStructure<F>) -> Value {
    json!({
        "label": d.label,
        "gamma": matrix_to_json(&d.g()),
        "f": matrix_to_json(&d.f_matrix()),
    })
}

pub fn structure_from_json<F: Field>(v: &Value) -> Result<DualityStructure<F>> {
    let label = v.get("label").and_then(Value::as_str).unwrap_or("structure");
    let g: Matrix<F> = matrix_from_json(field(v, "gamma")?)?;
    let f: Matrix<F> = matrix_from_json(field(v, "f")?)?;
    if !g.is_square() || g.rows() != f.rows() || !f.is_square() {
        return Err(parse_err("gamma and f must be square matrices of the same size"));
    }
    Ok(DualityStructure::from_matrices(label, &g, &f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gbit, quantum};
    use crate::scalar::Q;

    #[test]
    fn com_round_trip() {
        let g = gbit();
        let v = com_to_json(&g);
        assert_eq!(v["unit"], json!(["0", "0", "1"]));
        let AnyCom::Exact(back) = any_com_from_json(&v).unwrap() else { panic!("exact expected") };
        assert_eq!(com_to_json(&back), v);
        let qb = quantum(2).unwrap();
        let v = com_to_json(&qb);
        let AnyCom::Float(back) = any_com_from_json(&v).unwrap() else { panic!("float expected") };
        assert_eq!(com_to_json(&back), v);
    }

    #[test]
    fn builtin_uris() {
        assert_eq!(any_com_from_json(&json!("builtin:classical3")).unwrap().dim(), 3);
        assert!(resolve_builtin_model("classical3").is_err());
        assert_eq!(resolve_builtin_structure("builtin:gbit-rotation").unwrap().1.label(), "gbit-rotation");
    }

    #[test]
    fn structure_round_trip() {
        let d = crate::models::gbit_reflection_structure();
        let back: DualityStructure<Q> = structure_from_json(&structure_to_json(&d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn broken_com_reports_all_violations() {
        let v = json!({
            "label": "broken",
            "state_cone": {"kind": "polyhedral", "generators": [[1, 0], [0, 1]]},
            "effect_cone": {"kind": "polyhedral", "generators": [[1, 0], [0, 1]]},
            "unit": [1, 0],
        });
        let cand = com_candidate_from_json::<Q>(&v).unwrap();
        let errs = crate::com::validate_com(cand).unwrap_err();
        assert!(errs.iter().any(|e| e.code == "unit_not_strictly_positive" && e.message.contains("(0, 1)")));
    }
}
