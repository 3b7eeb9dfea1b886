use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::heuristics::DEFAULT_VOXEL_SIZE;
use crate::lattice::CostModel;

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(5);
pub const DEFAULT_WEIGHT: f64 = 1.5;
pub const DEFAULT_VMAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlannerId {
    WAstar,
    AraStar,
    MhaStar,
    Wpase,
    Xecbs,
}

impl PlannerId {
    pub const ALL: [PlannerId; 5] = [
        PlannerId::WAstar,
        PlannerId::AraStar,
        PlannerId::MhaStar,
        PlannerId::Wpase,
        PlannerId::Xecbs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerId::WAstar => "wAstar",
            PlannerId::AraStar => "ARAstar",
            PlannerId::MhaStar => "MHAstar",
            PlannerId::Wpase => "wPASE",
            PlannerId::Xecbs => "xECBS",
        }
    }

    pub fn is_multi_robot(self) -> bool {
        self == PlannerId::Xecbs
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPlannerId(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicChoice {
    JointEuclidean,
    WorkspaceBfs,
    Zero,
}

impl FromStr for HeuristicChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint_euclidean" => Ok(HeuristicChoice::JointEuclidean),
            "workspace_bfs" => Ok(HeuristicChoice::WorkspaceBfs),
            "zero" => Ok(HeuristicChoice::Zero),
            other => Err(Error::param("heuristic", format!("unknown heuristic `{other}`"))),
        }
    }
}

/// Planner configuration. Built from string pairs by [`PlannerParams::parse`].
///
/// `w` is the suboptimality weight of wA* and wPA*SE, the anchor weight of
/// MHA*, and the initial inflation of ARA*.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerParams {
    pub planner_id: PlannerId,
    pub time_limit: Duration,
    pub w: f64,
    pub w_final: f64,
    pub w_decrement: f64,
    pub w2: f64,
    pub w_low: f64,
    pub w_high: f64,
    pub num_workers: usize,
    pub reuse_experience: bool,
    /// Lattice resolution override, radians.
    pub resolution: Option<f64>,
    pub cost_model: CostModel,
    /// `None` picks by goal kind: joint-space Euclidean for joint goals,
    /// workspace BFS otherwise.
    pub heuristic: Option<HeuristicChoice>,
    pub voxel_size: f64,
    /// Per-joint velocity limit for time parameterization, rad/s.
    pub vmax: f64,
}

impl PlannerParams {
    pub fn new(planner_id: PlannerId) -> Self {
        Self {
            planner_id,
            time_limit: DEFAULT_TIME_LIMIT,
            w: if planner_id == PlannerId::AraStar { 10.0 } else { DEFAULT_WEIGHT },
            w_final: 1.0,
            w_decrement: 1.0,
            w2: DEFAULT_WEIGHT,
            w_low: DEFAULT_WEIGHT,
            w_high: DEFAULT_WEIGHT,
            num_workers: 1,
            reuse_experience: true,
            resolution: None,
            cost_model: CostModel::JointL2,
            heuristic: None,
            voxel_size: DEFAULT_VOXEL_SIZE,
            vmax: DEFAULT_VMAX,
        }
    }

    /// Parses `key -> value` string pairs. `planner_id` is required; other
    /// keys fall back to defaults. Unknown keys are rejected.
    pub fn parse<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let map: BTreeMap<String, String> = pairs
            .into_iter()
            .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().trim().to_string()))
            .collect();
        let id = map
            .get("planner_id")
            .ok_or_else(|| Error::param("planner_id", "missing"))?;
        let mut p = PlannerParams::new(id.parse()?);
        for (key, value) in &map {
            let v = value.as_str();
            match key.as_str() {
                "planner_id" => {}
                "time_limit" => {
                    let secs = number(key, v)?;
                    if !(secs > 0.0 && secs.is_finite()) {
                        return Err(Error::param(key, "must be a positive number of seconds"));
                    }
                    p.time_limit = Duration::from_secs_f64(secs);
                }
                "w" | "w1" => p.w = number(key, v)?,
                "w_final" => p.w_final = number(key, v)?,
                "w_decrement" | "w_delta" => p.w_decrement = number(key, v)?,
                "w2" => p.w2 = number(key, v)?,
                "w_low" => p.w_low = number(key, v)?,
                "w_high" => p.w_high = number(key, v)?,
                "num_workers" => {
                    p.num_workers = v
                        .parse()
                        .map_err(|_| Error::param(key, format!("`{v}` is not a count")))?
                }
                "reuse_experience" => {
                    p.reuse_experience = v
                        .parse()
                        .map_err(|_| Error::param(key, format!("`{v}` is not true/false")))?
                }
                "resolution" => p.resolution = Some(number(key, v)?),
                "cost_model" => p.cost_model = v.parse()?,
                "heuristic" => p.heuristic = Some(v.parse()?),
                "voxel_size" => p.voxel_size = number(key, v)?,
                "vmax" => p.vmax = number(key, v)?,
                _ => return Err(Error::param(key, "unknown parameter")),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_limit.is_zero() {
            return Err(Error::param("time_limit", "must be positive"));
        }
        for (name, w) in [
            ("w", self.w),
            ("w_final", self.w_final),
            ("w2", self.w2),
            ("w_low", self.w_low),
            ("w_high", self.w_high),
        ] {
            if !(w >= 1.0 && w.is_finite()) {
                return Err(Error::param(name, format!("weight {w} must be finite and >= 1")));
            }
        }
        if self.planner_id == PlannerId::AraStar && self.w < self.w_final {
            return Err(Error::param("w", "initial inflation must be >= w_final"));
        }
        if !(self.w_decrement > 0.0) {
            return Err(Error::param("w_decrement", "must be positive"));
        }
        if self.num_workers == 0 {
            return Err(Error::InvalidWorkerCount);
        }
        if let Some(r) = self.resolution {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::param("resolution", "must be positive"));
            }
        }
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::param("voxel_size", "must be positive"));
        }
        if !(self.vmax > 0.0 && self.vmax.is_finite()) {
            return Err(Error::InvalidVmax);
        }
        Ok(())
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::param(key, format!("`{v}` is not a number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_values_are_parsed() {
        let p = PlannerParams::parse([("planner_id", "ARAstar"), ("time_limit", "5")]).unwrap();
        assert_eq!(p.planner_id, PlannerId::AraStar);
        assert_eq!(p.time_limit, Duration::from_secs(5));
        assert_eq!(p.w, 10.0);

        let p = PlannerParams::parse([("planner_id", "wPASE"), ("num_workers", "4"), ("w", "2")]).unwrap();
        assert_eq!((p.num_workers, p.w), (4, 2.0));
    }

    #[test]
    fn rejects_bad_values() {
        let e = |pairs: &[(&str, &str)]| PlannerParams::parse(pairs.iter().copied()).unwrap_err();
        assert!(matches!(e(&[("planner_id", "RRTstar")]), Error::UnknownPlannerId(_)));
        assert!(matches!(e(&[("time_limit", "5")]), Error::InvalidParam { .. }));
        assert!(matches!(e(&[("planner_id", "wAstar"), ("time_limit", "0")]), Error::InvalidParam { .. }));
        assert!(matches!(e(&[("planner_id", "wAstar"), ("w", "0.5")]), Error::InvalidParam { .. }));
        assert!(matches!(e(&[("planner_id", "wAstar"), ("w", "abc")]), Error::InvalidParam { .. }));
        assert!(matches!(e(&[("planner_id", "wAstar"), ("colour", "red")]), Error::InvalidParam { .. }));
        assert!(matches!(e(&[("planner_id", "wPASE"), ("num_workers", "0")]), Error::InvalidWorkerCount));
        assert!(matches!(e(&[("planner_id", "wAstar"), ("vmax", "-1")]), Error::InvalidVmax));
    }

    #[test]
    fn ids_round_trip() {
        for id in PlannerId::ALL {
            assert_eq!(id.as_str().parse::<PlannerId>().unwrap(), id);
        }
    }
}
