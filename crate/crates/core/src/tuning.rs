//! Seeded random search over a declared parameter space.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::GbdtParams;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dimension {
    Uniform { low: f64, high: f64 },
    LogUniform { low: f64, high: f64 },
    Integer { low: i64, high: i64 },
    Choice { values: Vec<f64> },
}

impl Dimension {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Self::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Self::LogUniform { low, high } => *low > 0.0 && high.is_finite() && low <= high,
            Self::Integer { low, high } => low <= high,
            Self::Choice { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(alloc::format!("invalid search range for {name}")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform { low, high } => low + (high - low) * rng.gen::<f64>(),
            Self::LogUniform { low, high } => {
                let (a, b) = (libm::log(*low), libm::log(*high));
                libm::exp(a + (b - a) * rng.gen::<f64>())
            }
            Self::Integer { low, high } => rng.gen_range(*low..=*high) as f64,
            Self::Choice { values } => values[rng.gen_range(0..values.len())],
        }
    }
}

/// Parameter name to range; names are visited in sorted order.
pub type ParamSpace = BTreeMap<String, Dimension>;
pub type ParamPoint = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub point: ParamPoint,
    /// `None` when the scorer produced no finite score.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: usize,
    pub trials: Vec<Trial>,
}

impl SearchOutcome {
    pub fn best_trial(&self) -> &Trial {
        &self.trials[self.best]
    }
}

/// The points `random_search` would try, in order.
pub fn sample_points(space: &ParamSpace, n_trials: usize, seed_value: u64) -> Result<Vec<ParamPoint>> {
    if space.is_empty() {
        return Err(Error::Config("empty search space".into()));
    }
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    for (name, d) in space {
        d.validate(name)?;
    }
    let mut rng = seed::rng(seed::derive(seed_value, "tuning"));
    Ok((0..n_trials)
        .map(|_| space.iter().map(|(k, d)| (k.clone(), d.sample(&mut rng))).collect())
        .collect())
}

/// Scores each sampled point and keeps the highest; the earlier trial wins
/// ties and unscored trials never win over scored ones.
pub fn random_search<F>(space: &ParamSpace, n_trials: usize, seed_value: u64, mut scorer: F) -> Result<SearchOutcome>
where
    F: FnMut(&ParamPoint) -> Result<Option<f64>>,
{
    let mut trials = Vec::with_capacity(n_trials);
    let mut best: Option<(usize, f64)> = None;
    for (index, point) in sample_points(space, n_trials, seed_value)?.into_iter().enumerate() {
        let score = scorer(&point)?.filter(|s| s.is_finite());
        if let Some(s) = score {
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((index, s));
            }
        }
        trials.push(Trial { index, point, score });
    }
    Ok(SearchOutcome {
        best: best.map_or(0, |(i, _)| i),
        trials,
    })
}

/// Overrides GBDT fields named in `point`. Integer fields round to nearest.
pub fn apply_gbdt_point(base: &GbdtParams, point: &ParamPoint) -> Result<GbdtParams> {
    let mut p = base.clone();
    for (name, &v) in point {
        let whole = || -> Result<usize> {
            if v < 0.0 {
                Err(Error::Config(alloc::format!("{name} must be non-negative")))
            } else {
                Ok(libm::round(v) as usize)
            }
        };
        match name.as_str() {
            "num_trees" => p.num_trees = whole()?,
            "learning_rate" => p.learning_rate = v,
            "max_leaves" => p.max_leaves = whole()?,
            "min_data_in_leaf" => p.min_data_in_leaf = whole()?,
            "leaf_regularizer" => p.leaf_regularizer = v,
            "bins" => p.bins = whole()?,
            "goss_a" => p.goss_a = v,
            "goss_b" => p.goss_b = v,
            "goss_warmup_trees" => p.goss_warmup_trees = whole()?,
            "efb_enabled" => p.efb_enabled = v != 0.0,
            other => return Err(Error::Config(alloc::format!("unknown tunable parameter {other}"))),
        }
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn space() -> ParamSpace {
        let mut s = ParamSpace::new();
        s.insert("learning_rate".into(), Dimension::LogUniform { low: 0.01, high: 0.3 });
        s.insert("max_leaves".into(), Dimension::Integer { low: 4, high: 63 });
        s.insert("goss_a".into(), Dimension::Choice { values: vec![0.1, 0.2, 0.3] });
        s
    }

    #[test]
    fn single_trial_is_returned() {
        let out = random_search(&space(), 1, 3, |_| Ok(Some(0.1))).unwrap();
        assert_eq!(out.best, 0);
        assert_eq!(out.trials.len(), 1);
    }

    #[test]
    fn same_seed_same_sequence() {
        assert_eq!(sample_points(&space(), 20, 9).unwrap(), sample_points(&space(), 20, 9).unwrap());
        assert_ne!(sample_points(&space(), 20, 9).unwrap(), sample_points(&space(), 20, 10).unwrap());
    }

    #[test]
    fn finds_planted_point() {
        let mut s = ParamSpace::new();
        s.insert("x".into(), Dimension::Choice { values: vec![-3.0, -1.0, 2.0, 7.0, 11.0] });
        s.insert("y".into(), Dimension::Choice { values: vec![0.0, 1.0] });
        let out = random_search(&s, 60, 21, |p| {
            let hit = p["x"] == 7.0 && p["y"] == 1.0;
            Ok(Some(if hit { 1.0 } else { -libm::fabs(p["x"]) }))
        })
        .unwrap();
        let best = out.best_trial();
        assert_eq!((best.point["x"], best.point["y"]), (7.0, 1.0));
        let first_hit = out.trials.iter().position(|t| t.score == Some(1.0)).unwrap();
        assert_eq!(out.best, first_hit);
    }

    #[test]
    fn ranges_respected() {
        for p in sample_points(&space(), 200, 1).unwrap() {
            assert!((0.01..=0.3).contains(&p["learning_rate"]));
            assert!((4.0..=63.0).contains(&p["max_leaves"]));
            assert_eq!(p["max_leaves"].fract(), 0.0);
        }
    }

    #[test]
    fn rejects_empty_space_and_unknown_names() {
        assert!(random_search(&ParamSpace::new(), 3, 0, |_| Ok(Some(0.0))).is_err());
        let mut p = ParamPoint::new();
        p.insert("depth".into(), 3.0);
        assert!(apply_gbdt_point(&GbdtParams::default(), &p).is_err());
        p.clear();
        p.insert("max_leaves".into(), 7.4);
        assert_eq!(apply_gbdt_point(&GbdtParams::default(), &p).unwrap().max_leaves, 7);
    }
}
