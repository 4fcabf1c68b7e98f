//! JSON run configuration with `room`, `receiver` and `scenario` sections.
//! Every field is optional; `{}` is the tabulated reference setup. Angles are
//! in degrees, lengths in metres, powers in watts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{AllocatorMode, Preset, ScenarioSpec};
use crate::{ObjectiveWeights, ReceiverModel, RoomConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    /// Applied before the explicit fields below; `weights` overrides the
    /// preset's weights when present.
    pub preset: Preset,
    pub user_counts: Vec<usize>,
    pub trials_per_point: usize,
    pub seed: u64,
    pub allocator_mode: AllocatorMode,
    pub weights: Option<ObjectiveWeights>,
    pub target_ber: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let spec = ScenarioSpec::default();
        Self {
            preset: Preset::default(),
            user_counts: spec.user_counts,
            trials_per_point: spec.trials_per_point,
            seed: spec.seed,
            allocator_mode: spec.allocator_mode,
            weights: None,
            target_ber: spec.target_ber,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub room: RoomConfig,
    pub receiver: ReceiverModel,
    pub scenario: ScenarioSection,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolves the preset and validates the result.
    pub fn to_spec(&self) -> Result<ScenarioSpec> {
        let s = &self.scenario;
        let mut spec = ScenarioSpec {
            room: self.room.clone(),
            receiver: self.receiver.clone(),
            user_counts: s.user_counts.clone(),
            trials_per_point: s.trials_per_point,
            seed: s.seed,
            allocator_mode: s.allocator_mode,
            weights: ObjectiveWeights::default(),
            target_ber: s.target_ber,
        };
        spec.validate()?;
        match s.preset {
            Preset::Table1 => {}
            preset => spec.apply_preset(preset)?,
        }
        if let Some(w) = s.weights {
            spec.weights = w;
        }
        let w = spec.weights;
        if ![w.signal, w.noise, w.interference].iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::Config("objective weights must be finite and non-negative".into()));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CALIBRATED_INTERFERENCE_WEIGHT;

    #[test]
    fn empty_object_is_the_reference_setup() {
        let cfg = Config::from_json("{}").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.to_spec().unwrap(), ScenarioSpec::default());
        assert_eq!(cfg.room.luminaires.len(), 8);
        assert_eq!(cfg.receiver.bandwidth, 7e9);
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = Config::from_json(
            r#"{"room": {"width": 5.0}, "receiver": {"fov": 60.0},
                "scenario": {"seed": 9, "user_counts": [2, 4], "allocator_mode": "greedy"}}"#,
        )
        .unwrap();
        let spec = cfg.to_spec().unwrap();
        assert_eq!(spec.room.width, 5.0);
        assert_eq!(spec.room.length, 8.0);
        assert_eq!(spec.receiver.fov, 60.0);
        assert_eq!(spec.receiver.responsivity, 0.4);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.user_counts, vec![2, 4]);
        assert_eq!(spec.allocator_mode, AllocatorMode::Greedy);
    }

    #[test]
    fn calibrated_preset_and_weight_override() {
        let spec = Config::from_json(r#"{"scenario": {"preset": "calibrated"}}"#)
            .unwrap()
            .to_spec()
            .unwrap();
        assert!(spec.room.power_multiplier > 5.0);
        assert_eq!(spec.weights.interference, CALIBRATED_INTERFERENCE_WEIGHT);
        let spec = Config::from_json(
            r#"{"scenario": {"preset": "calibrated", "weights": {"interference": 2.0}}}"#,
        )
        .unwrap()
        .to_spec()
        .unwrap();
        assert_eq!(spec.weights.interference, 2.0);
        assert_eq!(spec.weights.signal, 1.0);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        for text in [
            "not json",
            r#"{"rooom": {}}"#,
            r#"{"room": {"width": -1.0}}"#,
            r#"{"scenario": {"trials_per_point": 0}}"#,
            r#"{"scenario": {"allocator_mode": "magic"}}"#,
            r#"{"scenario": {"weights": {"noise": -1.0}}}"#,
        ] {
            let err = Config::from_json(text).and_then(|c| c.to_spec());
            assert!(matches!(err, Err(Error::Config(_))), "{text}: {err:?}");
        }
    }

    #[test]
    fn config_round_trips() {
        let cfg = Config::from_json(r#"{"scenario": {"preset": "calibrated", "seed": 4}}"#).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), cfg);
    }
}
