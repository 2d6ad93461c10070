//! Cartesian expansion of `[sweep]` tables.
//!
//! Each key of `[sweep]` is a dotted path into the scenario (`"params.horizon"`)
//! and each value is either a list of values or a range table
//! `{ start, stop, count }` / `{ start, stop, step }`, optionally with
//! `scale = "log"`. Keys expand in lexicographic order with the last key
//! varying fastest.

use anyhow::{bail, Context, Result};
use toml::{Table, Value};

use crate::output::format_float;

pub const MAX_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<(String, Value)>,
    pub scenario: Table,
}

fn number(v: Option<&Value>, key: &str, field: &str) -> Result<f64> {
    match v {
        Some(Value::Float(f)) => Ok(*f),
        Some(Value::Integer(i)) => Ok(*i as f64),
        Some(_) => bail!("sweep.\"{key}\".{field} must be a number"),
        None => bail!("sweep.\"{key}\".{field} is required"),
    }
}

fn range_len(key: &str, spec: &Table) -> Result<usize> {
    if let Some(c) = spec.get("count") {
        let c = c.as_integer().with_context(|| format!("sweep.\"{key}\".count must be an integer"))?;
        if c < 0 {
            bail!("sweep.\"{key}\".count must be nonnegative");
        }
        return Ok(c as usize);
    }
    let start = number(spec.get("start"), key, "start")?;
    let stop = number(spec.get("stop"), key, "stop")?;
    let step = number(spec.get("step"), key, "step")?;
    if !(step > 0.0) {
        bail!("sweep.\"{key}\".step must be positive");
    }
    if stop < start {
        return Ok(0);
    }
    let n = ((stop - start) / step * (1.0 + 1e-12)).floor() + 1.0;
    if n > MAX_POINTS as f64 {
        return Ok(MAX_POINTS + 1);
    }
    Ok(n as usize)
}

fn range_values(key: &str, spec: &Table, n: usize) -> Result<Vec<Value>> {
    for k in spec.keys() {
        if !matches!(k.as_str(), "start" | "stop" | "count" | "step" | "scale") {
            bail!("sweep.\"{key}\" has unknown field `{k}`");
        }
    }
    let start = number(spec.get("start"), key, "start")?;
    let stop = number(spec.get("stop"), key, "stop")?;
    let log = match spec.get("scale").map(|v| v.as_str()) {
        None | Some(Some("linear")) => false,
        Some(Some("log")) => true,
        _ => bail!("sweep.\"{key}\".scale must be \"linear\" or \"log\""),
    };
    if log && !(start > 0.0 && stop > 0.0) {
        bail!("sweep.\"{key}\": log ranges need positive endpoints");
    }
    let step = if spec.contains_key("count") {
        if n > 1 { (stop - start) / (n - 1) as f64 } else { 0.0 }
    } else {
        number(spec.get("step"), key, "step")?
    };
    let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
    Ok((0..n)
        .map(|i| {
            let v = if spec.contains_key("count") {
                if n > 1 { a + (b - a) * i as f64 / (n - 1) as f64 } else { a }
            } else {
                start + step * i as f64
            };
            // Endpoints are reproduced exactly.
            let v = if log { v.exp() } else { v };
            let v = if i == 0 { start } else if spec.contains_key("count") && i + 1 == n { stop } else { v };
            Value::Float(v)
        })
        .collect())
}

/// Axes described by the `[sweep]` table, checked against the point guard.
pub fn axes(sweep: &Table) -> Result<Vec<Axis>> {
    if sweep.is_empty() {
        bail!("sweep table is empty");
    }
    let mut lens = Vec::new();
    for (key, spec) in sweep {
        let n = match spec {
            Value::Array(v) => v.len(),
            Value::Table(t) => range_len(key, t)?,
            _ => bail!("sweep.\"{key}\" must be a list or a range table"),
        };
        if n == 0 {
            bail!("sweep.\"{key}\" is an empty range");
        }
        lens.push(n);
    }
    let total = lens.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n).filter(|&t| t <= MAX_POINTS));
    if total.is_none() {
        bail!("sweep expands to more than {MAX_POINTS} points");
    }
    sweep
        .iter()
        .zip(lens)
        .map(|((key, spec), n)| {
            let values = match spec {
                Value::Array(v) => v.clone(),
                Value::Table(t) => range_values(key, t, n)?,
                _ => unreachable!(),
            };
            Ok(Axis {
                key: key.clone(),
                values,
            })
        })
        .collect()
}

fn assign(table: &mut Table, path: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("sweep key `{path}` is not a valid dotted path");
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .with_context(|| format!("sweep key `{path}`: `{part}` is not a table"))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Expands `base` (without its `[sweep]` table) over every combination of the axes.
pub fn expand(base: &Table, axes: &[Axis]) -> Result<Vec<Point>> {
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let mut points = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut coords = vec![(String::new(), Value::Boolean(false)); axes.len()];
        for (j, axis) in axes.iter().enumerate().rev() {
            let n = axis.values.len();
            coords[j] = (axis.key.clone(), axis.values[idx % n].clone());
            idx /= n;
        }
        let mut scenario = base.clone();
        for (k, v) in &coords {
            assign(&mut scenario, k, v.clone())?;
        }
        points.push(Point { coords, scenario });
    }
    Ok(points)
}

/// CSV rendering of a swept value; arrays use spaces so no quoting is needed.
pub fn render(v: &Value) -> String {
    match v {
        Value::Float(f) => format_float(*f),
        Value::Integer(i) => i.to_string(),
        Value::String(s) => s.replace([',', '\n'], " "),
        Value::Boolean(b) => b.to_string(),
        Value::Array(a) => format!("[{}]", a.iter().map(render).collect::<Vec<_>>().join(" ")),
        other => other.to_string().replace([',', '\n'], " "),
    }
}

pub fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}
