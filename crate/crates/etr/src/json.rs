//! JSON encoding of instances, witness maps, and reports.
//!
//! All rationals are serialized as canonical strings `"p"` / `"p/q"` in
//! lowest terms with a positive denominator; maps are emitted in sorted key
//! order, so output is deterministic byte-for-byte.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::formula::{
    zero6, AtomKind, Constraint, Fragment, FormulaNode, Instance, Interval, VarAnnotation,
};
use crate::poly::{Monomial, Polynomial};
use crate::range::CertificationReport;
use crate::rational::{format_rat, parse_rat, Dyadic, Rat};
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

fn err(msg: impl Into<String>) -> Error {
    Error::Json(msg.into())
}

pub fn rat_to_json(r: &Rat) -> Value {
    Value::String(format_rat(r))
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    let s = v.as_str().ok_or_else(|| err("expected rational string"))?;
    parse_rat(s)
}

fn dyadic_to_json(d: &Dyadic) -> Value {
    json!({
        "mantissa": format_rat(d.mantissa()),
        "exp2": d.exp().to_string(),
    })
}

fn dyadic_from_json(v: &Value) -> Result<Dyadic> {
    let m = parse_rat(
        v.get("mantissa")
            .and_then(Value::as_str)
            .ok_or_else(|| err("dyadic missing mantissa"))?,
    )?;
    let e: BigInt = v
        .get("exp2")
        .and_then(Value::as_str)
        .ok_or_else(|| err("dyadic missing exp2"))?
        .parse()
        .map_err(|_| err("bad dyadic exponent"))?;
    Ok(Dyadic::new(m, e))
}

fn poly_to_json(p: &Polynomial) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| {
            json!({
                "coeff": format_rat(c),
                "vars": m.0.iter().map(|&(v, e)| json!([v, e])).collect::<Vec<_>>(),
            })
        })
        .collect();
    Value::Array(terms)
}

fn poly_from_json(v: &Value) -> Result<Polynomial> {
    let arr = v.as_array().ok_or_else(|| err("expected term array"))?;
    let mut p = Polynomial::zero();
    for t in arr {
        let c = parse_rat(
            t.get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| err("term missing coeff"))?,
        )?;
        let mut vars = Vec::new();
        for pair in t
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| err("term missing vars"))?
        {
            let pair = pair.as_array().ok_or_else(|| err("bad var pair"))?;
            let v = pair
                .first()
                .and_then(Value::as_u64)
                .ok_or_else(|| err("bad var index"))? as u32;
            let e = pair
                .get(1)
                .and_then(Value::as_u64)
                .ok_or_else(|| err("bad exponent"))? as u32;
            vars.push((v, e));
        }
        vars.sort_unstable();
        p.add_term(Monomial(vars), c);
    }
    Ok(p)
}

fn formula_to_json(f: &FormulaNode) -> Value {
    match f {
        FormulaNode::Atom(kind, p) => json!({
            "atom": match kind {
                AtomKind::Eq => "eq",
                AtomKind::Geq => "geq",
                AtomKind::Gt => "gt",
            },
            "poly": poly_to_json(p),
        }),
        FormulaNode::Conj(parts) => json!({
            "conj": parts.iter().map(formula_to_json).collect::<Vec<_>>(),
        }),
        FormulaNode::Disj(parts) => json!({
            "disj": parts.iter().map(formula_to_json).collect::<Vec<_>>(),
        }),
        FormulaNode::Neg(inner) => json!({ "neg": formula_to_json(inner) }),
    }
}

fn formula_from_json(v: &Value) -> Result<FormulaNode> {
    let obj = v.as_object().ok_or_else(|| err("expected formula object"))?;
    if let Some(kind) = obj.get("atom") {
        let kind = match kind.as_str() {
            Some("eq") => AtomKind::Eq,
            Some("geq") => AtomKind::Geq,
            Some("gt") => AtomKind::Gt,
            _ => return Err(err("unknown atom kind")),
        };
        let p = poly_from_json(obj.get("poly").ok_or_else(|| err("atom missing poly"))?)?;
        return Ok(FormulaNode::Atom(kind, p));
    }
    if let Some(parts) = obj.get("conj") {
        let parts = parts.as_array().ok_or_else(|| err("conj not array"))?;
        return Ok(FormulaNode::Conj(
            parts.iter().map(formula_from_json).collect::<Result<_>>()?,
        ));
    }
    if let Some(parts) = obj.get("disj") {
        let parts = parts.as_array().ok_or_else(|| err("disj not array"))?;
        return Ok(FormulaNode::Disj(
            parts.iter().map(formula_from_json).collect::<Result<_>>()?,
        ));
    }
    if let Some(inner) = obj.get("neg") {
        return Ok(FormulaNode::Neg(Box::new(formula_from_json(inner)?)));
    }
    Err(err("unrecognized formula node"))
}

fn constraint_to_json(c: &Constraint) -> Value {
    match *c {
        Constraint::PolyEq(ref p) => json!({"tag": "poly_eq", "poly": poly_to_json(p)}),
        Constraint::GeqZero(x) => json!({"tag": "geq_zero", "x": x}),
        Constraint::PlusEq(x, y, z) => json!({"tag": "plus_eq", "x": x, "y": y, "z": z}),
        Constraint::TimesEq(x, y, z) => json!({"tag": "times_eq", "x": x, "y": y, "z": z}),
        Constraint::SquareEq(x, y) => json!({"tag": "square_eq", "x": x, "y": y}),
        Constraint::InvEq(x, y) => json!({"tag": "inv_eq", "x": x, "y": y}),
        Constraint::EqOne(x) => json!({"tag": "eq_one", "x": x}),
        Constraint::EqDelta(x) => json!({"tag": "eq_delta", "x": x}),
    }
}

fn get_idx(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| err(format!("constraint missing index {key}")))
}

fn constraint_from_json(v: &Value) -> Result<Constraint> {
    let obj = v.as_object().ok_or_else(|| err("expected constraint object"))?;
    let tag = obj
        .get("tag")
        .and_then(Value::as_str)
        .ok_or_else(|| err("constraint missing tag"))?;
    Ok(match tag {
        "poly_eq" => Constraint::PolyEq(poly_from_json(
            obj.get("poly").ok_or_else(|| err("poly_eq missing poly"))?,
        )?),
        "geq_zero" => Constraint::GeqZero(get_idx(obj, "x")?),
        "plus_eq" => Constraint::PlusEq(get_idx(obj, "x")?, get_idx(obj, "y")?, get_idx(obj, "z")?),
        "times_eq" => {
            Constraint::TimesEq(get_idx(obj, "x")?, get_idx(obj, "y")?, get_idx(obj, "z")?)
        }
        "square_eq" => Constraint::SquareEq(get_idx(obj, "x")?, get_idx(obj, "y")?),
        "inv_eq" => Constraint::InvEq(get_idx(obj, "x")?, get_idx(obj, "y")?),
        "eq_one" => Constraint::EqOne(get_idx(obj, "x")?),
        "eq_delta" => Constraint::EqDelta(get_idx(obj, "x")?),
        other => return Err(err(format!("unknown constraint tag {other:?}"))),
    })
}

fn interval_to_json(iv: &Interval) -> Value {
    json!([format_rat(&iv.lo), format_rat(&iv.hi)])
}

fn interval_from_json(v: &Value) -> Result<Interval> {
    let arr = v.as_array().ok_or_else(|| err("expected interval pair"))?;
    if arr.len() != 2 {
        return Err(err("interval must have two endpoints"));
    }
    Ok(Interval::new(rat_from_json(&arr[0])?, rat_from_json(&arr[1])?))
}

fn coeffs_to_json(c: &[Rat; 6]) -> Value {
    Value::Array(c.iter().map(rat_to_json).collect())
}

fn coeffs_from_json(v: &Value) -> Result<[Rat; 6]> {
    let arr = v.as_array().ok_or_else(|| err("expected coefficient array"))?;
    if arr.len() != 6 {
        return Err(err("coefficient vector must have six entries"));
    }
    let mut out = zero6();
    for (o, x) in out.iter_mut().zip(arr) {
        *o = rat_from_json(x)?;
    }
    Ok(out)
}

fn annotation_to_json(a: &VarAnnotation) -> Value {
    json!({
        "sources": a.sources,
        "num": coeffs_to_json(&a.num),
        "den": coeffs_to_json(&a.den),
        "nonneg_source": a.nonneg_source,
        "note": a.note,
    })
}

fn annotation_from_json(v: &Value) -> Result<VarAnnotation> {
    let sources = v
        .get("sources")
        .and_then(Value::as_array)
        .ok_or_else(|| err("annotation missing sources"))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| err("bad source name"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarAnnotation {
        sources,
        num: coeffs_from_json(v.get("num").ok_or_else(|| err("annotation missing num"))?)?,
        den: coeffs_from_json(v.get("den").ok_or_else(|| err("annotation missing den"))?)?,
        nonneg_source: v
            .get("nonneg_source")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        note: v
            .get("note")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string(),
    })
}

pub fn instance_to_json(inst: &Instance) -> Value {
    let mut obj = Map::new();
    obj.insert("fragment".into(), json!(inst.fragment.name()));
    obj.insert("vars".into(), json!(inst.vars.names()));
    if let Some(f) = &inst.formula {
        obj.insert("formula".into(), formula_to_json(f));
    }
    if !inst.constraints.is_empty() {
        obj.insert(
            "constraints".into(),
            Value::Array(inst.constraints.iter().map(constraint_to_json).collect()),
        );
    }
    if let Some(d) = &inst.delta {
        obj.insert("delta".into(), rat_to_json(d));
    }
    if inst.intervals.iter().any(Option::is_some) {
        let m: Map<String, Value> = inst
            .intervals
            .iter()
            .enumerate()
            .filter_map(|(i, iv)| {
                iv.as_ref()
                    .map(|iv| (inst.vars.name(i).to_string(), interval_to_json(iv)))
            })
            .collect();
        obj.insert("intervals".into(), Value::Object(m));
    }
    if inst.annotations.iter().any(Option::is_some) {
        let m: Map<String, Value> = inst
            .annotations
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                a.as_ref()
                    .map(|a| (inst.vars.name(i).to_string(), annotation_to_json(a)))
            })
            .collect();
        obj.insert("annotations".into(), Value::Object(m));
    }
    if let Some(d) = &inst.ann_source_delta {
        obj.insert("annotation_source_delta".into(), rat_to_json(d));
    }
    Value::Object(obj)
}

pub fn instance_from_json(v: &Value) -> Result<Instance> {
    let frag = v
        .get("fragment")
        .and_then(Value::as_str)
        .and_then(Fragment::parse)
        .ok_or_else(|| err("missing or unknown fragment"))?;
    let mut inst = Instance::new(frag);
    for name in v
        .get("vars")
        .and_then(Value::as_array)
        .ok_or_else(|| err("missing vars"))?
    {
        let name = name.as_str().ok_or_else(|| err("bad variable name"))?;
        inst.add_var(name);
    }
    if let Some(f) = v.get("formula") {
        inst.formula = Some(formula_from_json(f)?);
    }
    if let Some(cs) = v.get("constraints") {
        let cs = cs.as_array().ok_or_else(|| err("constraints not array"))?;
        inst.constraints = cs
            .iter()
            .map(constraint_from_json)
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(d) = v.get("delta") {
        inst.delta = Some(rat_from_json(d)?);
    }
    if let Some(m) = v.get("intervals").and_then(Value::as_object) {
        for (name, iv) in m {
            let idx = inst
                .vars
                .lookup(name)
                .ok_or_else(|| err(format!("interval for unknown variable {name:?}")))?;
            inst.intervals[idx] = Some(interval_from_json(iv)?);
        }
    }
    if let Some(m) = v.get("annotations").and_then(Value::as_object) {
        for (name, a) in m {
            let idx = inst
                .vars
                .lookup(name)
                .ok_or_else(|| err(format!("annotation for unknown variable {name:?}")))?;
            inst.annotations[idx] = Some(annotation_from_json(a)?);
        }
    }
    if let Some(d) = v.get("annotation_source_delta") {
        inst.ann_source_delta = Some(rat_from_json(d)?);
    }
    Ok(inst)
}

fn component_to_json(c: &ForwardComponent) -> Value {
    json!({
        "scale": dyadic_to_json(&c.scale),
        "num": poly_to_json(&c.num),
        "den": poly_to_json(&c.den),
        "shift": dyadic_to_json(&c.shift),
    })
}

fn component_from_json(v: &Value) -> Result<ForwardComponent> {
    Ok(ForwardComponent {
        scale: dyadic_from_json(v.get("scale").ok_or_else(|| err("component missing scale"))?)?,
        num: poly_from_json(v.get("num").ok_or_else(|| err("component missing num"))?)?,
        den: poly_from_json(v.get("den").ok_or_else(|| err("component missing den"))?)?,
        shift: dyadic_from_json(v.get("shift").ok_or_else(|| err("component missing shift"))?)?,
    })
}

pub fn witness_to_json(w: &WitnessMap) -> Value {
    json!({
        "stage": w.stage,
        "equisat_only": w.equisat_only,
        "forward": {
            "n_in": w.forward.n_in,
            "components": w.forward.components.iter().map(component_to_json).collect::<Vec<_>>(),
        },
        "backward": {
            "n_in": w.backward.n_in,
            "proj": w.backward.proj,
            "scale": w.backward.scale.iter().map(dyadic_to_json).collect::<Vec<_>>(),
            "offset": w.backward.offset.iter().map(dyadic_to_json).collect::<Vec<_>>(),
        },
    })
}

pub fn witness_from_json(v: &Value) -> Result<WitnessMap> {
    let fw = v.get("forward").ok_or_else(|| err("missing forward map"))?;
    let components = fw
        .get("components")
        .and_then(Value::as_array)
        .ok_or_else(|| err("forward missing components"))?
        .iter()
        .map(component_from_json)
        .collect::<Result<Vec<_>>>()?;
    let forward = RationalMap {
        n_in: fw
            .get("n_in")
            .and_then(Value::as_u64)
            .ok_or_else(|| err("forward missing n_in"))? as usize,
        components,
    };
    let bw = v.get("backward").ok_or_else(|| err("missing backward map"))?;
    let proj = bw
        .get("proj")
        .and_then(Value::as_array)
        .ok_or_else(|| err("backward missing proj"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| err("bad projection index"))
        })
        .collect::<Result<Vec<_>>>()?;
    let dyadic_vec = |key: &str| -> Result<Vec<Dyadic>> {
        bw.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| err(format!("backward missing {key}")))?
            .iter()
            .map(dyadic_from_json)
            .collect()
    };
    let scale = dyadic_vec("scale")?;
    let offset = dyadic_vec("offset")?;
    if scale.len() != proj.len() || offset.len() != proj.len() {
        return Err(err("backward map arrays disagree in length"));
    }
    let backward = AffineProjection {
        n_in: bw
            .get("n_in")
            .and_then(Value::as_u64)
            .ok_or_else(|| err("backward missing n_in"))? as usize,
        proj,
        scale,
        offset,
    };
    Ok(WitnessMap {
        stage: v
            .get("stage")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string(),
        equisat_only: v
            .get("equisat_only")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        forward,
        backward,
    })
}

pub fn certification_to_json(report: &CertificationReport) -> Value {
    json!({
        "fragment": report.fragment,
        "source_delta": format_rat(&report.delta_source),
        "ok": report.ok,
        "vars": report.vars.iter().map(|v| json!({
            "name": v.name,
            "certified": interval_to_json(&v.certified),
            "declared": interval_to_json(&v.declared),
            "ok": v.ok,
        })).collect::<Vec<_>>(),
    })
}

/// Serializes a point (vector of rationals).
pub fn point_to_json(p: &[Rat]) -> Value {
    Value::Array(p.iter().map(rat_to_json).collect())
}

pub fn point_from_json(v: &Value) -> Result<Vec<Rat>> {
    v.as_array()
        .ok_or_else(|| err("expected point array"))?
        .iter()
        .map(rat_from_json)
        .collect()
}
