use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;

use super::config::{run_config, Config};
use crate::error::{arg, Result};

/// One swept parameter: a dotted path into the config JSON and its values.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

impl std::str::FromStr for Axis {
    type Err = crate::Error;

    /// `trajectory.g0=0.5,0.75,1` ; values are parsed as JSON, falling back to strings.
    fn from_str(s: &str) -> Result<Self> {
        let Some((key, list)) = s.split_once('=') else {
            return arg(format!("axis {s:?} is not of the form key=v1,v2,..."));
        };
        let key = key.trim();
        if key.is_empty() || list.trim().is_empty() {
            return arg(format!("axis {s:?} has an empty key or value list"));
        }
        let values = list
            .split(',')
            .map(|v| {
                let v = v.trim();
                serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
            })
            .collect();
        Ok(Axis {
            key: key.to_string(),
            values,
        })
    }
}

fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let Value::Object(map) = cur else {
            return arg(format!("{key}: {part:?} is not inside an object"));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cur = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!()
}

/// Cartesian product of axis values, first axis slowest.
pub fn grid_points(axes: &[Axis]) -> Vec<Vec<Value>> {
    axes.iter().fold(vec![vec![]], |acc, axis| {
        acc.iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub point: usize,
    pub values: Vec<Value>,
    pub label: String,
    pub most_growing: String,
    pub endpoint_fastest: String,
    pub winners: [String; 3],
    pub last_switch: [Option<f64>; 3],
    pub chiral: Option<[bool; 3]>,
    /// Set when the point failed; the other columns are then empty.
    pub error: Option<String>,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn run_point(base: &Value, axes: &[Axis], point: usize, values: Vec<Value>) -> Result<Vec<SweepRow>> {
    let mut doc = base.clone();
    for (axis, v) in axes.iter().zip(&values) {
        set_dotted(&mut doc, &axis.key, v.clone())?;
    }
    let cfg = Config::from_value(doc)?;
    let failed = |e: crate::Error| SweepRow {
        point,
        values: values.clone(),
        label: String::new(),
        most_growing: String::new(),
        endpoint_fastest: String::new(),
        winners: Default::default(),
        last_switch: [None; 3],
        chiral: None,
        error: Some(e.to_string()),
    };
    let run = match run_config(&cfg) {
        Ok(r) => r,
        Err(e) if e.is_physics() => return Ok(vec![failed(e)]),
        Err(e) => return Err(e),
    };
    Ok(run
        .report
        .runs
        .iter()
        .map(|r| {
            let chiral = run
                .report
                .chirality_for(r.initial_state)
                .map(|v| [v.chiral.simulation, v.chiral.naive, v.chiral.advanced]);
            let last = r.last_switch();
            SweepRow {
                point,
                values: values.clone(),
                label: r.label.clone(),
                most_growing: opt(r.most_growing),
                endpoint_fastest: opt(r.endpoint_fastest),
                winners: [
                    r.winners.simulation.to_string(),
                    r.winners.naive.to_string(),
                    r.winners.advanced.to_string(),
                ],
                last_switch: [last.simulation, last.naive, last.advanced],
                chiral,
                error: None,
            }
        })
        .collect())
}

/// Runs every grid point in parallel. Physics failures become rows with an
/// `error` entry; configuration errors abort the sweep.
pub fn run_sweep(base: &Value, axes: &[Axis]) -> Result<Vec<SweepRow>> {
    if axes.is_empty() {
        return arg("sweep needs at least one axis");
    }
    let rows: Vec<Vec<SweepRow>> = grid_points(axes)
        .into_par_iter()
        .enumerate()
        .map(|(i, values)| run_point(base, axes, i, values))
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_sweep_csv(path: &Path, axes: &[Axis], rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(super::run::create(path)?);
    let mut header = vec!["point".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(
        [
            "label",
            "most_growing",
            "endpoint_fastest",
            "winner_simulation",
            "winner_naive",
            "winner_advanced",
            "switch_simulation",
            "switch_naive",
            "switch_advanced",
            "chiral_simulation",
            "chiral_naive",
            "chiral_advanced",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.point.to_string()];
        rec.extend(r.values.iter().map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }));
        rec.push(r.label.clone());
        rec.push(r.most_growing.clone());
        rec.push(r.endpoint_fastest.clone());
        rec.extend(r.winners.iter().cloned());
        rec.extend(r.last_switch.iter().map(|t| opt(*t)));
        match r.chiral {
            Some(c) => rec.extend(c.iter().map(|b| b.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), 3)),
        }
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn axis_parsing() {
        let a: Axis = "trajectory.g0=0.5, 1".parse().unwrap();
        assert_eq!(a.key, "trajectory.g0");
        assert_eq!(a.values, vec![json!(0.5), json!(1)]);
        let b: Axis = "integrator.initial_states=psi+".parse().unwrap();
        assert_eq!(b.values, vec![json!("psi+")]);
        assert!("g0".parse::<Axis>().is_err());
        assert!("=1".parse::<Axis>().is_err());
    }

    #[test]
    fn product_order() {
        let axes = vec![
            Axis { key: "a".into(), values: vec![json!(1), json!(2)] },
            Axis { key: "b".into(), values: vec![json!("x"), json!("y"), json!("z")] },
        ];
        let pts = grid_points(&axes);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![json!(1), json!("x")]);
        assert_eq!(pts[5], vec![json!(2), json!("z")]);
    }

    #[test]
    fn dotted_set_creates_sections() {
        let mut v = json!({"trajectory": {"g0": 1.0}});
        set_dotted(&mut v, "trajectory.g0", json!(0.5)).unwrap();
        set_dotted(&mut v, "frame.grid", json!(200)).unwrap();
        assert_eq!(v, json!({"trajectory": {"g0": 0.5}, "frame": {"grid": 200}}));
        assert!(set_dotted(&mut v, "trajectory.g0.x", json!(1)).is_err());
    }

    #[test]
    fn small_sweep_records_physics_errors() {
        let base = json!({
            "trajectory": {"kind": "landau_zener", "slope": 0.5, "coupling": 0.25, "window": 40.0},
            "integrator": {"steps": 2000, "outputs": 101},
            "frame": {"grid": 400}
        });
        let axes = vec!["trajectory.coupling=0.25,0.5".parse().unwrap()];
        let rows = run_sweep(&base, &axes).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.error.is_none()));

        // A loop through the EP at (0, 1) cannot be diagonalized.
        let ep = json!({
            "trajectory": {"kind": "circle", "delta0": 0.0, "g0": 0.7, "radius": 0.3,
                           "total_time": 50.0, "omega": 0.12566370614359174, "phi": 0.0},
            "integrator": {"steps": 2000, "outputs": 101},
            "frame": {"grid": 400}
        });
        let axes = vec!["trajectory.phi=0.0,3.141592653589793".parse().unwrap()];
        let rows = run_sweep(&ep, &axes).unwrap();
        assert!(rows.iter().any(|r| r.error.is_some()), "{rows:?}");

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sweep.csv");
        write_sweep_csv(&out, &axes, &rows).unwrap();
        let text = std::fs::read_to_string(out).unwrap();
        assert!(text.starts_with("point,trajectory.phi,label,"));

        let bad = vec!["trajectory.radiuss=1".parse().unwrap()];
        assert!(run_sweep(&ep, &bad).is_err());
    }
}
