//! Reading models, data vectors and matrices from the command line.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mlgeom::catalog::{self, Model};
use mlgeom::critsys::VarietySpec;
use mlgeom::horn::HornModel;
use mlgeom::linmatroid::LinearModel;
use mlgeom::poly::{parse_rational, rational_from_json};
use mlgeom::toric::ToricModel;
use mlgeom::BigRational;
use serde_json::Value;

pub fn read_json(path: &str) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))
}

/// `catalog:<name>`, a bare catalog name, or a JSON file. Files are told
/// apart by their keys: `B` (Horn), `A` (toric), `basis` (linear),
/// otherwise a variety spec.
pub fn load_model(arg: &str) -> Result<Model> {
    if arg.starts_with("catalog:") || !Path::new(arg).exists() {
        return Ok(catalog::lookup(arg)?);
    }
    let v = read_json(arg)?;
    Ok(if v.get("B").is_some() {
        Model::Horn(HornModel::from_json(&v)?)
    } else if let Some(a) = v.get("A") {
        let c = match v.get("c") {
            Some(c) => c.clone(),
            None => Value::Array(vec![Value::from(1); a.get(0).and_then(Value::as_array).map_or(0, Vec::len)]),
        };
        Model::Toric(ToricModel::from_json(a, &c)?)
    } else if v.get("basis").is_some() {
        Model::Linear(LinearModel::from_json(&v)?)
    } else {
        Model::Variety(VarietySpec::from_json(&v)?)
    })
}

pub fn load_variety(arg: &str) -> Result<VarietySpec> {
    match load_model(arg)? {
        Model::Variety(s) => Ok(s),
        Model::PlaneCurve(f) => Ok(VarietySpec::new(2, 1, vec![f])?),
        Model::Linear(l) => Ok(l.to_spec()?),
        _ => bail!("{arg} is not given by implicit equations"),
    }
}

pub fn load_horn(arg: &str) -> Result<HornModel> {
    if !Path::new(arg).exists() {
        return Ok(catalog::horn(arg.strip_prefix("catalog:").unwrap_or(arg))?);
    }
    Ok(HornModel::from_json(&read_json(arg)?)?)
}

pub fn load_toric(arg: &str) -> Result<ToricModel> {
    match load_model(arg)? {
        Model::Toric(t) => Ok(t),
        _ => bail!("{arg} is not a toric model"),
    }
}

pub fn load_linear(arg: &str) -> Result<LinearModel> {
    match load_model(arg)? {
        Model::Linear(l) => Ok(l),
        _ => bail!("{arg} is not a linear model"),
    }
}

/// A comma-separated list of rationals or a JSON file holding an array.
pub fn parse_vector(arg: &str) -> Result<Vec<BigRational>> {
    if Path::new(arg).exists() {
        let v = read_json(arg)?;
        let arr = v.as_array().context("expected a JSON array")?;
        return arr.iter().map(|x| Ok(rational_from_json(x)?)).collect();
    }
    arg.split(',').map(|s| Ok(parse_rational(s)?)).collect()
}

/// A rectangular JSON matrix of rationals (numbers or `"a/b"` strings).
pub fn load_matrix(path: &str) -> Result<Vec<Vec<BigRational>>> {
    let v = read_json(path)?;
    let rows = v.as_array().context("expected an array of rows")?;
    let m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .context("expected an array of rows")?
                .iter()
                .map(|x| Ok(rational_from_json(x)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n = m.first().map_or(0, Vec::len);
    if n == 0 || m.iter().any(|r| r.len() != n) {
        bail!("{path}: matrix must be nonempty and rectangular");
    }
    Ok(m)
}
