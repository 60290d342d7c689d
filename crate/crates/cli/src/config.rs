//! Run configuration documents.
//!
//! A document is one of
//! * `{"example": "ex1", "scale": "desk", "seed": 7}`,
//! * a single explicit experiment object,
//! * `{"configs": [ ... ]}`.

use serde::Deserialize;
use serde_json::Value;
use tnp_core::experiments::{example_configs, ExperimentConfig, Scale};

use crate::failure::Failure;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExampleRef {
    #[serde(alias = "experiment")]
    example: String,
    #[serde(default)]
    scale: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigList {
    configs: Vec<ExperimentConfig>,
}

pub fn parse_scale(s: &str) -> Result<Scale, Failure> {
    s.parse().map_err(Failure::from)
}

pub fn example(
    name: &str,
    scale: Scale,
    seed: Option<u64>,
) -> Result<Vec<ExperimentConfig>, Failure> {
    let mut configs = example_configs(name, scale)?;
    if let Some(seed) = seed {
        for c in &mut configs {
            c.seed = seed;
        }
    }
    Ok(configs)
}

pub fn parse_run_config(text: &str) -> Result<Vec<ExperimentConfig>, Failure> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Failure::input("config is not valid JSON", e))?;
    let Some(obj) = value.as_object() else {
        return Err(Failure::Input("config must be a JSON object".into()));
    };
    let configs = if obj.contains_key("example") || obj.contains_key("experiment") {
        let r: ExampleRef =
            serde_json::from_value(value).map_err(|e| Failure::input("invalid config", e))?;
        let scale = parse_scale(r.scale.as_deref().unwrap_or("full"))?;
        example(&r.example, scale, r.seed)?
    } else if obj.contains_key("configs") {
        let list: ConfigList =
            serde_json::from_value(value).map_err(|e| Failure::input("invalid config", e))?;
        list.configs
    } else {
        vec![serde_json::from_value(value).map_err(|e| Failure::input("invalid config", e))?]
    };
    if configs.is_empty() {
        return Err(Failure::Input("config lists no experiments".into()));
    }
    Ok(configs)
}

pub fn validate_all(configs: &[ExperimentConfig]) -> Result<(), Failure> {
    for c in configs {
        c.validate()
            .map_err(|e| Failure::Input(format!("config '{}': {e}", c.id)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPLICIT: &str = r#"{
        "id": "small", "shape": [5, 4, 3], "ranks": [2, 2, 1], "snr": 3.0,
        "n_train": 200, "eta": 1.0, "n_test": 400, "reps": 2,
        "alpha": 0.05, "delta": 0.1, "seed": 3,
        "methods": ["T-LDA", "T-LDA-NP"],
        "distribution": {"t": 5},
        "nn": {"hidden": 16, "epochs": 3, "batch": 16, "rate": 0.01}
    }"#;

    #[test]
    fn explicit_config() {
        let c = parse_run_config(EXPLICIT).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].shape, vec![5, 4, 3]);
        assert_eq!(c[0].nn.hidden, 16);
        validate_all(&c).unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let text = EXPLICIT.replace("\"snr\"", "\"sn_ratio\"");
        let msg = parse_run_config(&text).unwrap_err().to_string();
        assert!(msg.contains("sn_ratio"), "{msg}");
        let text = EXPLICIT.replace("\"batch\"", "\"batch_size\"");
        let msg = parse_run_config(&text).unwrap_err().to_string();
        assert!(msg.contains("batch_size"), "{msg}");
    }

    #[test]
    fn example_reference() {
        let c = parse_run_config(r#"{"example": "ex2", "scale": "desk", "seed": 9}"#).unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|c| c.seed == 9 && c.reps == 50));
        let err = parse_run_config(r#"{"example": "ex9"}"#).unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.to_string().contains("unknown example"));
    }

    #[test]
    fn list_of_configs() {
        let text = format!("{{\"configs\": [{EXPLICIT}, {EXPLICIT}]}}");
        assert_eq!(parse_run_config(&text).unwrap().len(), 2);
    }

    #[test]
    fn range_errors_name_the_key() {
        let text = EXPLICIT.replace("\"alpha\": 0.05", "\"alpha\": 1.5");
        let c = parse_run_config(&text).unwrap();
        let msg = validate_all(&c).unwrap_err().to_string();
        assert!(msg.contains("alpha"), "{msg}");
    }
}
