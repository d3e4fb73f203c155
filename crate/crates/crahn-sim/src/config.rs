//! Scenario configuration: one JSON document describing a full simulation
//! run. Every field has a default, so `{}` is a valid scenario.

use crate::neural::TrainConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Full description of one simulation run. Defaults model a 1000 m x 1000 m
/// area with 5 primary users, 50 secondary users and 10 channels in the
/// 2.4 GHz band.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub num_pu: usize,
    pub num_su: usize,
    pub num_channels: usize,
    pub band_label: String,
    pub radio_range_m: f64,
    pub sim_duration_s: f64,
    pub master_seed: u64,
    pub scenarios: Scenarios,
    pub spectrum: SpectrumConfig,
    pub detection: DetectionConfig,
    pub net: NetConfig,
    pub response: ResponseConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            area_width_m: 1000.0,
            area_height_m: 1000.0,
            num_pu: 5,
            num_su: 50,
            num_channels: 10,
            band_label: "2.4GHz".to_string(),
            radio_range_m: 250.0,
            sim_duration_s: 600.0,
            master_seed: 1,
            scenarios: Scenarios::default(),
            spectrum: SpectrumConfig::default(),
            detection: DetectionConfig::default(),
            net: NetConfig::default(),
            response: ResponseConfig::default(),
        }
    }
}

/// Which subsystems a run exercises. Disabling one skips its workload and
/// its slots in the run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenarios {
    pub detection: bool,
    pub spectrum: bool,
    pub discovery: bool,
    pub response: bool,
}

impl Default for Scenarios {
    fn default() -> Self {
        Scenarios {
            detection: true,
            spectrum: true,
            discovery: true,
            response: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Primary users re-occupy their channel on this cycle.
    pub pu_period_s: f64,
    /// Fraction of each cycle the primary user is on the air.
    pub pu_on_fraction: f64,
    pub sensing_interval_s: f64,
    pub retune_delay_s: f64,
    /// Probability a busy channel is sensed idle.
    pub p_miss: f64,
    /// Probability an idle channel is sensed busy.
    pub p_false: f64,
    /// Occupancy log sliding-window length.
    pub window_s: f64,
    /// Channel selector: "ann" or "longest_idle" (heuristic baseline).
    pub selector: String,
    /// Hidden-layer width of the spectrum-manager network.
    pub manager_hidden: usize,
    pub manager_train: TrainConfig,
    /// Length of the offline warm-up trace used to train the manager.
    pub warmup_s: f64,
    /// Stride between training samples drawn from the warm-up trace.
    pub trainset_stride_s: f64,
    /// Horizon over which the training target (fraction idle) is measured.
    pub horizon_s: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            pu_period_s: 5.0,
            pu_on_fraction: 0.4,
            sensing_interval_s: 0.1,
            retune_delay_s: 0.05,
            p_miss: 0.0,
            p_false: 0.0,
            window_s: 60.0,
            selector: "ann".to_string(),
            manager_hidden: 5,
            manager_train: TrainConfig::default(),
            warmup_s: 150.0,
            trainset_stride_s: 1.0,
            horizon_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// Sensors installed at the monitored site.
    pub num_sensors: usize,
    /// Number of aggregate groups fed to the detector (its input width).
    pub input_groups: usize,
    /// Hidden-layer width of the detector network.
    pub hidden: usize,
    /// Context manager snapshot/classification cadence.
    pub snapshot_interval_s: f64,
    /// Gaussian noise applied to sensor readings, clipped to [0,1].
    pub noise_sigma: f64,
    /// Labeled samples per class in the synthetic training set.
    pub samples_per_class: usize,
    pub train: TrainConfig,
    /// Injected ground-truth disaster events.
    pub num_events: usize,
    pub event_duration_s: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            num_sensors: 20,
            input_groups: 5,
            hidden: 5,
            snapshot_interval_s: 1.0,
            noise_sigma: 0.05,
            samples_per_class: 100,
            train: TrainConfig::default(),
            num_events: 5,
            event_duration_s: 20.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    /// Random-waypoint speed range, m/s.
    pub v_min: f64,
    pub v_max: f64,
    pub pause_s: f64,
    pub advert_period_s: f64,
    pub cache_ttl_s: f64,
    pub route_ttl_s: f64,
    /// Fixed per-hop delay plus uniform jitter in [0, hop_jitter_max_s].
    pub hop_delay_s: f64,
    pub hop_jitter_max_s: f64,
    pub request_ttl_hops: u32,
    pub discovery_timeout_s: f64,
    pub discovery_retries: u32,
    /// Named services registered in the network (gateway service excluded).
    pub num_services: usize,
    /// Nodes hosting those services, assigned round-robin.
    pub num_providers: usize,
    /// Each rescue node issues one lookup per period.
    pub discovery_period_s: f64,
    /// Each rescue node gossips a situation record per period.
    pub situation_period_s: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            v_min: 1.0,
            v_max: 5.0,
            pause_s: 2.0,
            advert_period_s: 5.0,
            cache_ttl_s: 15.0,
            route_ttl_s: 30.0,
            hop_delay_s: 0.01,
            hop_jitter_max_s: 0.05,
            request_ttl_hops: 10,
            discovery_timeout_s: 10.0,
            discovery_retries: 1,
            num_services: 10,
            num_providers: 10,
            discovery_period_s: 30.0,
            situation_period_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseConfig {
    /// Call-tree depth; level 1 is contacted first.
    pub call_tree_levels: usize,
    /// Wait per level before escalating.
    pub level_wait_s: f64,
    /// Probability a contacted officer answers at all.
    pub respond_prob: f64,
    pub response_delay_min_s: f64,
    pub response_delay_max_s: f64,
    /// Retry interval while no gateway has been discovered.
    pub gateway_retry_s: f64,
    /// Nodes hosting the gateway service.
    pub num_gateways: usize,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        ResponseConfig {
            call_tree_levels: 3,
            level_wait_s: 10.0,
            respond_prob: 0.8,
            response_delay_min_s: 1.0,
            response_delay_max_s: 5.0,
            gateway_retry_s: 5.0,
            num_gateways: 2,
        }
    }
}

impl ScenarioConfig {
    /// Parses a JSON document; absent fields fall back to defaults and the
    /// result is validated.
    pub fn load(document: &str) -> Result<ScenarioConfig, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(document)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.area_width_m > 0.0) {
            return Err(invalid("area_width_m", "must be > 0"));
        }
        if !(self.area_height_m > 0.0) {
            return Err(invalid("area_height_m", "must be > 0"));
        }
        let any_protocol =
            self.scenarios.spectrum || self.scenarios.discovery || self.scenarios.response;
        if any_protocol && self.num_su < 1 {
            return Err(invalid("num_su", "must be >= 1 when a protocol scenario is enabled"));
        }
        if self.num_channels < 1 {
            return Err(invalid("num_channels", "must be >= 1"));
        }
        if !(self.radio_range_m > 0.0) {
            return Err(invalid("radio_range_m", "must be > 0"));
        }
        if !(self.sim_duration_s > 0.0) {
            return Err(invalid("sim_duration_s", "must be > 0"));
        }
        if !(self.spectrum.pu_period_s > 0.0) {
            return Err(invalid("spectrum.pu_period_s", "must be > 0"));
        }
        if !(self.spectrum.pu_on_fraction > 0.0 && self.spectrum.pu_on_fraction < 1.0) {
            return Err(invalid("spectrum.pu_on_fraction", "must be in (0,1)"));
        }
        if !(self.spectrum.sensing_interval_s > 0.0) {
            return Err(invalid("spectrum.sensing_interval_s", "must be > 0"));
        }
        for (field, p) in [
            ("spectrum.p_miss", self.spectrum.p_miss),
            ("spectrum.p_false", self.spectrum.p_false),
            ("response.respond_prob", self.response.respond_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(field, "must be in [0,1]"));
            }
        }
        if !(self.spectrum.window_s > 0.0) {
            return Err(invalid("spectrum.window_s", "must be > 0"));
        }
        if self.spectrum.selector != "ann" && self.spectrum.selector != "longest_idle" {
            return Err(invalid("spectrum.selector", "must be \"ann\" or \"longest_idle\""));
        }
        if self.detection.input_groups < 1 {
            return Err(invalid("detection.input_groups", "must be >= 1"));
        }
        if self.detection.num_sensors < self.detection.input_groups {
            return Err(invalid("detection.num_sensors", "must be >= detection.input_groups"));
        }
        if !(self.detection.snapshot_interval_s > 0.0) {
            return Err(invalid("detection.snapshot_interval_s", "must be > 0"));
        }
        if self.detection.noise_sigma < 0.0 {
            return Err(invalid("detection.noise_sigma", "must be >= 0"));
        }
        if self.scenarios.detection && self.detection.num_events > 0 {
            let need = self.detection.num_events as f64 * self.detection.event_duration_s;
            if need > self.sim_duration_s {
                return Err(invalid("detection.num_events", "events do not fit in sim_duration_s"));
            }
        }
        if self.net.v_min < 0.0 || self.net.v_max < self.net.v_min {
            return Err(invalid("net.v_min", "need 0 <= v_min <= v_max"));
        }
        if self.net.hop_delay_s < 0.0 || self.net.hop_jitter_max_s < 0.0 {
            return Err(invalid("net.hop_delay_s", "delays must be >= 0"));
        }
        if self.net.request_ttl_hops < 1 {
            return Err(invalid("net.request_ttl_hops", "must be >= 1"));
        }
        if self.response.call_tree_levels < 1 {
            return Err(invalid("response.call_tree_levels", "must be >= 1"));
        }
        if self.response.response_delay_max_s < self.response.response_delay_min_s {
            return Err(invalid("response.response_delay_max_s", "must be >= response_delay_min_s"));
        }
        // Role assignment must fit: coordinator + personnel + gateways + providers.
        if self.scenarios.discovery || self.scenarios.response {
            let reserved = 1
                + self.response.call_tree_levels
                + self.response.num_gateways
                + self.net.num_providers;
            if self.num_su < reserved {
                return Err(invalid(
                    "num_su",
                    format!("need at least {reserved} nodes for the configured roles"),
                ));
            }
        }
        Ok(())
    }

    /// Canonical JSON of the resolved config (used for digests and echoes).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_yields_defaults() {
        let cfg = ScenarioConfig::load("{}").unwrap();
        assert_eq!(cfg.area_width_m, 1000.0);
        assert_eq!(cfg.area_height_m, 1000.0);
        assert_eq!(cfg.num_pu, 5);
        assert_eq!(cfg.num_su, 50);
        assert_eq!(cfg.num_channels, 10);
        assert_eq!(cfg.band_label, "2.4GHz");
        assert_eq!(cfg.net.num_services, 10);
    }

    #[test]
    fn zero_secondary_users_with_discovery_enabled_is_invalid() {
        let err = ScenarioConfig::load(r#"{"num_su": 0}"#).unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "num_su"),
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn negative_area_is_invalid() {
        let err = ScenarioConfig::load(r#"{"area_width_m": -1}"#).unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "area_width_m"),
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(
            ScenarioConfig::load("{not json").unwrap_err(),
            ConfigError::Parse(_)
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(
            ScenarioConfig::load(r#"{"num_pus": 7}"#).unwrap_err(),
            ConfigError::Parse(_)
        ));
    }

    #[test]
    fn partial_overrides_keep_other_defaults() {
        let cfg = ScenarioConfig::load(r#"{"num_pu": 3, "spectrum": {"p_miss": 0.1}}"#).unwrap();
        assert_eq!(cfg.num_pu, 3);
        assert_eq!(cfg.spectrum.p_miss, 0.1);
        assert_eq!(cfg.spectrum.sensing_interval_s, 0.1);
        assert_eq!(cfg.num_su, 50);
    }

    #[test]
    fn bad_on_fraction_names_the_field() {
        let err =
            ScenarioConfig::load(r#"{"spectrum": {"pu_on_fraction": 1.5}}"#).unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "spectrum.pu_on_fraction"),
            other => panic!("expected Invalid, got {other:?}"),
        }
    }
}
