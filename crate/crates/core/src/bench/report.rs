use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{arg, Error, Result};
use crate::models::TrajectorySpec;

/// Branch index, written as `psi+` / `psi-` for the first two branches and
/// `psi<n>` beyond that.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch(pub usize);

impl Branch {
    pub const PLUS: Branch = Branch(0);
    pub const MINUS: Branch = Branch(1);
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("psi+"),
            1 => f.write_str("psi-"),
            n => write!(f, "psi{n}"),
        }
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi+" | "plus" | "+" => Ok(Branch(0)),
            "psi-" | "minus" | "-" => Ok(Branch(1)),
            other => match other.strip_prefix("psi").map(str::parse::<usize>) {
                Some(Ok(n)) => Ok(Branch(n)),
                _ => arg(format!("unknown branch label {other:?}")),
            },
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Branch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Open,
    /// `ω < 0`
    Cw,
    /// `ω > 0`
    Ccw,
}

impl Direction {
    pub fn of(spec: &TrajectorySpec, closed: bool) -> Self {
        match (closed, spec.omega < 0.0) {
            (false, _) => Direction::Open,
            (true, true) => Direction::Cw,
            (true, false) => Direction::Ccw,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Open => "open",
            Direction::Cw => "cw",
            Direction::Ccw => "ccw",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerMethod<T> {
    pub simulation: T,
    pub naive: T,
    pub advanced: T,
}

impl<T> PerMethod<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> PerMethod<U> {
        PerMethod {
            simulation: f(&self.simulation),
            naive: f(&self.naive),
            advanced: f(&self.advanced),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub label: String,
    pub direction: Direction,
    pub initial_state: Branch,
    pub trajectory: Option<TrajectorySpec>,
    /// `None` when the leading `Im Λₙ(T)` are tied.
    pub most_growing: Option<Branch>,
    /// `None` when indeterminate.
    pub endpoint_fastest: Option<Branch>,
    pub endpoint_window: Option<f64>,
    pub winners: PerMethod<Branch>,
    pub final_populations: PerMethod<Vec<f64>>,
    /// Upward 0.5-crossings of each method's winner population.
    pub switch_times: PerMethod<Vec<f64>>,
    /// Times where the leader of `Im Λₙ(t)` changes.
    pub naive_crossings: Vec<f64>,
    /// `ε` used by the advanced predictor.
    pub advanced_epsilon: f64,
    pub slowness_diagnostic: f64,
    pub notes: Vec<String>,
}

impl ConversionReport {
    pub fn last_switch(&self) -> PerMethod<Option<f64>> {
        self.switch_times.map(|v| v.last().copied())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralityVerdict {
    pub cw: ConversionReport,
    pub ccw: ConversionReport,
    pub chiral: PerMethod<bool>,
}

/// Compares winners of the same loop traversed both ways.
pub fn chirality(cw: &ConversionReport, ccw: &ConversionReport) -> Result<ChiralityVerdict> {
    if let (Some(a), Some(b)) = (&cw.trajectory, &ccw.trajectory) {
        let same = a.delta0 == b.delta0
            && a.g0 == b.g0
            && a.radius == b.radius
            && a.total_time == b.total_time
            && a.phi == b.phi
            && a.omega == -b.omega;
        if !same {
            return arg("chirality needs the same loop traversed in opposite directions");
        }
        if a.omega >= 0.0 {
            return arg("first report must be the clockwise (omega < 0) run");
        }
    }
    Ok(ChiralityVerdict {
        cw: cw.clone(),
        ccw: ccw.clone(),
        chiral: PerMethod {
            simulation: cw.winners.simulation != ccw.winners.simulation,
            naive: cw.winners.naive != ccw.winners.naive,
            advanced: cw.winners.advanced != ccw.winners.advanced,
        },
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    pub(crate) fn sample(omega: f64, winners: [usize; 3]) -> ConversionReport {
        ConversionReport {
            label: "cw/psi-".into(),
            direction: if omega < 0.0 { Direction::Cw } else { Direction::Ccw },
            initial_state: Branch::MINUS,
            trajectory: Some(TrajectorySpec {
                delta0: 0.0,
                g0: 1.0,
                radius: 0.3,
                total_time: 500.0,
                omega,
                phi: -0.75 * PI,
            }),
            most_growing: Some(Branch::PLUS),
            endpoint_fastest: None,
            endpoint_window: Some(0.1),
            winners: PerMethod {
                simulation: Branch(winners[0]),
                naive: Branch(winners[1]),
                advanced: Branch(winners[2]),
            },
            final_populations: PerMethod {
                simulation: vec![0.25, 0.75],
                naive: vec![1.0, 0.0],
                advanced: vec![0.1, 0.9],
            },
            switch_times: PerMethod {
                simulation: vec![12.5, 400.125],
                naive: vec![],
                advanced: vec![399.9],
            },
            naive_crossings: vec![375.0],
            advanced_epsilon: 1e-4,
            slowness_diagnostic: 0.0123,
            notes: vec!["note".into()],
        }
    }

    #[test]
    fn branch_labels_round_trip() {
        for b in [Branch(0), Branch(1), Branch(5)] {
            assert_eq!(b.to_string().parse::<Branch>().unwrap(), b);
        }
        assert_eq!(Branch(0).to_string(), "psi+");
        assert_eq!(Branch(1).to_string(), "psi-");
        assert!("psi?".parse::<Branch>().is_err());
    }

    #[test]
    fn report_json_round_trip_and_key_order() {
        let r = sample(-0.01, [1, 0, 1]);
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: ConversionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let keys: Vec<String> = serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&text)
            .unwrap()
            .keys()
            .cloned()
            .collect();
        assert_eq!(keys[0], "label");
        assert_eq!(keys[keys.len() - 1], "notes");
    }

    #[test]
    fn chirality_rejects_mismatched_geometry() {
        let cw = sample(-0.01, [1, 0, 1]);
        let mut other = sample(0.01, [1, 1, 1]);
        assert!(chirality(&cw, &other).is_ok());
        other.trajectory.as_mut().unwrap().g0 = 0.5;
        assert!(chirality(&cw, &other).is_err());
        assert!(chirality(&sample(0.01, [0; 3]), &sample(-0.01, [0; 3])).is_err());
    }

    proptest! {
        #[test]
        fn chirality_is_winner_inequality(a in proptest::array::uniform3(0usize..2), b in proptest::array::uniform3(0usize..2)) {
            let v = chirality(&sample(-0.01, a), &sample(0.01, b)).unwrap();
            prop_assert_eq!(v.chiral.simulation, a[0] != b[0]);
            prop_assert_eq!(v.chiral.naive, a[1] != b[1]);
            prop_assert_eq!(v.chiral.advanced, a[2] != b[2]);
            let swapped = chirality(&sample(-0.01, b), &sample(0.01, a)).unwrap();
            prop_assert_eq!(swapped.chiral, v.chiral);
        }
    }
}
