//! JSON settings files overlaid by explicit command-line flags.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{CscArgs, DenoiseArgs, DictInfoArgs, EvalArgs, TrainArgs};
use crate::CliError;

/// Keys accepted in a settings file besides the per-command flags.
const GLOBAL_KEYS: [&str; 2] = ["seed", "quiet"];

/// Settings read from a `--config` file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: Map<String, Value>,
}

fn keys_of<T: Serialize + Default>() -> Vec<String> {
    match serde_json::to_value(T::default()) {
        Ok(Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn known_keys() -> BTreeSet<String> {
    let mut keys: BTreeSet<String> = GLOBAL_KEYS.iter().map(|k| k.to_string()).collect();
    keys.extend(keys_of::<CscArgs>());
    keys.extend(keys_of::<DenoiseArgs>());
    keys.extend(keys_of::<TrainArgs>());
    keys.extend(keys_of::<EvalArgs>());
    keys.extend(keys_of::<DictInfoArgs>());
    keys
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(values) = value else {
            return Err(CliError::Usage(format!("config {} must hold a JSON object", path.display())));
        };
        let known = known_keys();
        if let Some(bad) = values.keys().find(|k| !known.contains(k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key \"{bad}\"")));
        }
        Ok(Self { values })
    }

    pub fn seed(&self) -> Result<Option<u64>, CliError> {
        self.global("seed")
    }

    pub fn quiet(&self) -> Result<bool, CliError> {
        Ok(self.global("quiet")?.unwrap_or(false))
    }

    fn global<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key \"{key}\": {e}"))),
        }
    }

    /// `flags` with every unset field filled from the file.
    pub fn overlay<T: Serialize + DeserializeOwned + Default>(&self, flags: &T) -> Result<T, CliError> {
        let own: BTreeSet<String> = keys_of::<T>().into_iter().collect();
        let mut merged: Map<String, Value> = self
            .values
            .iter()
            .filter(|(k, _)| own.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if let Ok(Value::Object(set)) = serde_json::to_value(flags) {
            for (k, v) in set {
                // unset options serialize as null, unset switches as false
                if !matches!(v, Value::Null | Value::Bool(false)) {
                    merged.insert(k, v);
                }
            }
        }
        serde_json::from_value(Value::Object(merged.clone())).map_err(|e| {
            let culprit = merged.iter().find(|(k, v)| {
                let single: Map<String, Value> = [((*k).clone(), (*v).clone())].into_iter().collect();
                serde_json::from_value::<T>(Value::Object(single)).is_err()
            });
            match culprit {
                Some((k, _)) => CliError::Usage(format!("config key \"{k}\": {e}")),
                None => CliError::Usage(format!("invalid config: {e}")),
            }
        })
    }
}
