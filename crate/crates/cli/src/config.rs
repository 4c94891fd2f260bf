//! Scenario loading: a named preset, a TOML file, or a preset overridden by a file.

use std::fs;
use std::path::Path;

use qdpath::models::{preset, preset_notes, Scenario, PRESET_NAMES};
use toml::{Table, Value};

use crate::CliError;

pub struct LoadedScenario {
    pub scenario: Scenario,
    pub preset: Option<String>,
    pub notes: Vec<String>,
}

/// Keys whose value selects a variant; a differing value replaces the whole table.
const TAG_KEYS: [&str; 2] = ["kind", "shape"];

fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => {
                let retagged = TAG_KEYS
                    .iter()
                    .any(|t| o.get(*t).is_some_and(|v| b.get(*t) != Some(v)));
                if retagged {
                    *b = o;
                } else {
                    merge(b, o);
                }
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

pub fn preset_table(name: &str) -> Result<Table, CliError> {
    let scenario = preset(name).ok_or_else(|| {
        CliError::input(format!(
            "unknown preset '{name}' (available: {})",
            PRESET_NAMES.join(", ")
        ))
    })?;
    Table::try_from(&scenario).map_err(|e| CliError::internal(format!("preset {name}: {e}")))
}

pub fn load(config: Option<&Path>, preset_name: Option<&str>) -> Result<LoadedScenario, CliError> {
    let mut table = match preset_name {
        Some(name) => preset_table(name)?,
        None => Table::new(),
    };
    if let Some(path) = config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let user: Table = toml::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        merge(&mut table, user);
    }
    if config.is_none() && preset_name.is_none() {
        return Err(CliError::input("either --config or --preset is required".into()));
    }
    let scenario: Scenario = Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        let origin = config.map_or_else(|| "preset".to_string(), |p| p.display().to_string());
        CliError::input(format!("{origin}: {}", e.message()))
    })?;
    Ok(LoadedScenario {
        scenario,
        preset: preset_name.map(str::to_string),
        notes: preset_name.map(preset_notes).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdpath::models::ModelSpec;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn preset_round_trips() {
        for name in PRESET_NAMES {
            let loaded = load(None, Some(name)).unwrap();
            assert_eq!(loaded.scenario, preset(name).unwrap());
        }
    }

    #[test]
    fn file_overrides_preset() {
        let f = write("[model]\ndetuning_mev = -1.0\n[numerics]\nduration_ps = 20.0\n");
        let loaded = load(Some(f.path()), Some("fig4-T1K")).unwrap();
        match loaded.scenario.model {
            ModelSpec::DotCavity(m) => {
                assert_eq!(m.detuning_mev, -1.0);
                assert_eq!(m.cavity_loss_per_ps, 0.1);
            }
            _ => panic!("wrong model"),
        }
        assert_eq!(loaded.scenario.numerics.duration_ps, 20.0);
        assert_eq!(loaded.notes.len(), 1);
    }

    #[test]
    fn switching_model_kind_replaces_table() {
        let f = write("[model]\nkind = \"dot_cavity\"\ncoupling_mev = 0.1\n");
        let loaded = load(Some(f.path()), Some("fig1a")).unwrap();
        assert!(matches!(loaded.scenario.model, ModelSpec::DotCavity(_)));
    }

    #[test]
    fn unknown_field_is_reported() {
        let f = write("[model]\ndetuning = 1.0\n");
        let err = load(Some(f.path()), Some("fig1a")).err().unwrap();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("detuning"), "{}", err.message);
    }

    #[test]
    fn standalone_file() {
        let f = write(
            "[model]\nkind = \"driven_dot\"\nfield_strength_per_ps = 1.0\nphonons = false\n\
             [model.envelope]\nshape = \"gaussian\"\ncenter_ps = 3.0\nfwhm_ps = 1.0\n\
             [model.gaas]\nelectron_radius_nm = 5.0\n\
             [numerics]\ndt_ps = 0.1\nmemory_depth = 1\nduration_ps = 5.0\n",
        );
        let s = load(Some(f.path()), None).unwrap().scenario;
        match s.model {
            ModelSpec::DrivenDot(m) => {
                assert_eq!(m.gaas.electron_radius_nm, 5.0);
                assert_eq!(m.gaas.sound_velocity_m_s, 5110.0);
            }
            _ => panic!("wrong model"),
        }
        assert!(load(None, None).is_err());
        assert!(load(None, Some("nope")).is_err());
    }
}
