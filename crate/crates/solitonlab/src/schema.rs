//! JSON schemas for the geometric objects.
//!
//! Numbers may be given as JSON integers, as floats (converted exactly:
//! every finite double is a dyadic rational), or as strings `"3/4"`,
//! `"1.5"` for exact rationals.

use crate::error::{Error, Result};
use crate::fanocone::FanoCone;
use crate::nastab::PLFiltration;
use crate::polykernel::{Facet, Polytope, Vector};
use crate::scalar::rat_from_f64;
use crate::weights::{parse_decimal, Expr, Weight, WeightFamily};
use crate::{QPolytope, Rat};
use num_traits::One;
use serde_json::Value;
use std::sync::Arc;

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(i.into()))
            } else if let Some(f) = n.as_f64() {
                Ok(rat_from_f64(f))
            } else {
                Err(Error::Invalid(format!("bad number {n}")))
            }
        }
        Value::String(s) => {
            if let Some((p, q)) = s.split_once('/') {
                let num = parse_decimal(p.trim())?;
                let den = parse_decimal(q.trim())?;
                if den == Rat::from_integer(0.into()) {
                    return Err(Error::Invalid("zero denominator".into()));
                }
                Ok(num / den)
            } else {
                parse_decimal(s.trim())
            }
        }
        other => Err(Error::Invalid(format!("expected a number, got {other}"))),
    }
}

pub fn rat_vec_from_json(v: &Value) -> Result<Vec<Rat>> {
    v.as_array()
        .ok_or_else(|| Error::Invalid("expected an array of numbers".into()))?
        .iter()
        .map(rat_from_json)
        .collect()
}

fn reject_unknown(obj: &serde_json::Map<String, Value>, allowed: &[&str]) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Invalid(format!("unknown key {key:?}")));
        }
    }
    Ok(())
}

/// Polytope schema: `{"facets": [{"normal": [...], "offset": ...}]}` with
/// the constraint `<x, normal> >= -offset`, or `{"vertices": [[...]]}`.
pub fn polytope_from_json(v: &Value) -> Result<QPolytope> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Invalid("polytope: expected an object".into()))?;
    reject_unknown(obj, &["facets", "vertices", "dim"])?;
    if let Some(facets) = obj.get("facets") {
        let arr = facets
            .as_array()
            .ok_or_else(|| Error::Invalid("facets: expected an array".into()))?;
        let mut fs = Vec::with_capacity(arr.len());
        let mut dim = None;
        for f in arr {
            let fo = f
                .as_object()
                .ok_or_else(|| Error::Invalid("facet: expected an object".into()))?;
            reject_unknown(fo, &["normal", "offset"])?;
            let normal = rat_vec_from_json(
                fo.get("normal").ok_or_else(|| Error::Invalid("facet needs a normal".into()))?,
            )?;
            let offset = rat_from_json(
                fo.get("offset").ok_or_else(|| Error::Invalid("facet needs an offset".into()))?,
            )?;
            dim.get_or_insert(normal.len());
            fs.push(Facet::new(normal, offset));
        }
        let dim = dim.ok_or_else(|| Error::Invalid("no facets given".into()))?;
        Polytope::from_hrep(dim, fs)
    } else if let Some(verts) = obj.get("vertices") {
        let arr = verts
            .as_array()
            .ok_or_else(|| Error::Invalid("vertices: expected an array".into()))?;
        let mut pts = Vec::with_capacity(arr.len());
        let mut dim = None;
        for p in arr {
            let coords = rat_vec_from_json(p)?;
            dim.get_or_insert(coords.len());
            pts.push(Vector::new(coords));
        }
        let dim = dim.ok_or_else(|| Error::Invalid("no vertices given".into()))?;
        Polytope::from_vertices(dim, pts)
    } else {
        Err(Error::Invalid("polytope needs either facets or vertices".into()))
    }
}

/// Weight schema:
/// `{"family": "kr"|"mabuchi"|"cone"|"constant"|"composite",
///   "xi": [...], "xbar": [...], "n": ..., "b": "expr", "value": ...}`.
pub fn weight_from_json(polytope: Arc<QPolytope>, v: &Value) -> Result<Weight> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Invalid("weight: expected an object".into()))?;
    reject_unknown(obj, &["family", "xi", "xbar", "n", "b", "value"])?;
    let family = obj
        .get("family")
        .and_then(|f| f.as_str())
        .ok_or_else(|| Error::Invalid("weight needs a family".into()))?;
    let dim = polytope.dim();
    let xi = match obj.get("xi") {
        Some(x) => rat_vec_from_json(x)?,
        None => vec![Rat::from_integer(0.into()); dim],
    };
    if xi.len() != dim {
        return Err(Error::Invalid("weight xi dimension mismatch".into()));
    }
    match family {
        "kr" => Weight::exponential(polytope, xi),
        "mabuchi" => {
            let xbar = match obj.get("xbar") {
                Some(x) => rat_vec_from_json(x)?,
                None => {
                    // Default pin: the unweighted barycenter.
                    let one = Weight::constant(polytope.clone(), Rat::one())?;
                    crate::polykernel::weighted::moments_exact(&polytope, &one)?.1
                }
            };
            Weight::new(
                WeightFamily::AffinePinned { xi: Vector::new(xi), xbar: Vector::new(xbar) },
                polytope,
            )
        }
        "cone" => {
            let n = obj
                .get("n")
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Invalid("cone weight needs integer n".into()))?;
            Weight::cone_power(polytope, xi, n as usize)
        }
        "constant" => {
            let c = match obj.get("value") {
                Some(x) => rat_from_json(x)?,
                None => Rat::one(),
            };
            Weight::constant(polytope, c)
        }
        "composite" => {
            let b = obj
                .get("b")
                .and_then(|x| x.as_str())
                .ok_or_else(|| Error::Invalid("composite weight needs b".into()))?;
            Weight::composite(polytope, Expr::parse(b)?, xi)
        }
        other => Err(Error::Invalid(format!("unknown weight family {other:?}"))),
    }
}

/// Cone schema: `{"n": ..., "moment_generators": [[...]]}` or
/// `{"n": ..., "reeb_rays": [[...]]}`.
pub fn cone_from_json(v: &Value) -> Result<FanoCone> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Invalid("cone: expected an object".into()))?;
    reject_unknown(obj, &["n", "moment_generators", "reeb_rays"])?;
    let n = obj
        .get("n")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| Error::Invalid("cone needs integer n".into()))? as usize;
    if let Some(gens) = obj.get("moment_generators") {
        let arr = gens
            .as_array()
            .ok_or_else(|| Error::Invalid("moment_generators: expected an array".into()))?;
        let rows: Vec<Vec<Rat>> = arr.iter().map(rat_vec_from_json).collect::<Result<_>>()?;
        FanoCone::from_moment_generators(n, rows)
    } else if let Some(rays) = obj.get("reeb_rays") {
        let arr = rays
            .as_array()
            .ok_or_else(|| Error::Invalid("reeb_rays: expected an array".into()))?;
        let rows: Vec<Vec<Rat>> = arr.iter().map(rat_vec_from_json).collect::<Result<_>>()?;
        FanoCone::from_reeb_rays(n, rows)
    } else {
        Err(Error::Invalid("cone needs moment_generators or reeb_rays".into()))
    }
}

/// PL function schema:
/// `{"affine_pieces": [{"a": [...], "b": ...}], "combine": "min"}`.
pub fn pl_from_json(polytope: Arc<QPolytope>, v: &Value) -> Result<PLFiltration> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Invalid("pl function: expected an object".into()))?;
    reject_unknown(obj, &["affine_pieces", "combine"])?;
    if let Some(c) = obj.get("combine") {
        if c.as_str() != Some("min") {
            return Err(Error::NotConcave(
                "only min-combined affine pieces are concave".into(),
            ));
        }
    }
    let arr = obj
        .get("affine_pieces")
        .and_then(|x| x.as_array())
        .ok_or_else(|| Error::Invalid("pl function needs affine_pieces".into()))?;
    let mut pieces = Vec::with_capacity(arr.len());
    for p in arr {
        let po = p
            .as_object()
            .ok_or_else(|| Error::Invalid("affine piece: expected an object".into()))?;
        reject_unknown(po, &["a", "b"])?;
        let a = rat_vec_from_json(
            po.get("a").ok_or_else(|| Error::Invalid("piece needs a".into()))?,
        )?;
        let b = rat_from_json(po.get("b").ok_or_else(|| Error::Invalid("piece needs b".into()))?)?;
        pieces.push((a, b));
    }
    PLFiltration::new(polytope, pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(rat_from_json(&json!(3)).unwrap(), Rat::from_integer(3.into()));
        assert_eq!(rat_from_json(&json!("3/4")).unwrap(), Rat::new(3.into(), 4.into()));
        assert_eq!(rat_from_json(&json!(1.5)).unwrap(), Rat::new(3.into(), 2.into()));
        assert_eq!(rat_from_json(&json!("1.25")).unwrap(), Rat::new(5.into(), 4.into()));
        assert!(rat_from_json(&json!("3/0")).is_err());
    }

    #[test]
    fn polytope_roundtrip() {
        let p = polytope_from_json(&json!({
            "facets": [
                {"normal": [1], "offset": 1},
                {"normal": [-1], "offset": 1}
            ]
        }))
        .unwrap();
        assert_eq!(p.vertices().len(), 2);
        let q = polytope_from_json(&json!({"vertices": [[-1], [1]]})).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(polytope_from_json(&json!({"vertices": [[0], [1]], "extra": 1})).is_err());
        let p = Arc::new(polytope_from_json(&json!({"vertices": [[-1], [1]]})).unwrap());
        assert!(weight_from_json(p, &json!({"family": "kr", "bogus": 2})).is_err());
    }

    #[test]
    fn weight_families_parse() {
        let p = Arc::new(polytope_from_json(&json!({"vertices": [[-1], [1]]})).unwrap());
        for w in [
            json!({"family": "kr", "xi": ["1/2"]}),
            json!({"family": "constant"}),
            json!({"family": "mabuchi", "xi": ["1/4"]}),
            json!({"family": "cone", "xi": [1], "n": 1}),
            json!({"family": "composite", "b": "exp(s) + 1", "xi": [1]}),
        ] {
            weight_from_json(p.clone(), &w).unwrap();
        }
    }

    #[test]
    fn cone_schema() {
        let c = cone_from_json(&json!({
            "n": 2,
            "moment_generators": [[0,0,1],[1,0,1],[0,1,1],[1,1,1]]
        }))
        .unwrap();
        assert_eq!(c.gamma().coords[2], Rat::from_integer(2.into()));
    }
}
