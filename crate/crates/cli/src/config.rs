//! Run configuration: one TOML file plus `--set` overrides.

use std::path::Path;

use ptsol::presets::Preset;
use ptsol::{EigenConfig, Family, Knowns, PropagationConfig, SweepConfig, SweepParameter};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Model parameters; omitted quantities are resolved from the constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    /// Amplitude normalization; `1` is the usual choice for Class I.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
}

impl ModelSection {
    pub fn knowns(&self) -> Knowns<f64> {
        Knowns {
            a: self.a,
            b: self.b,
            kappa: self.kappa,
            v1: self.v1,
            g1: self.g1,
            g2: self.g2,
            phi0: self.phi0,
        }
    }

    pub fn from_preset(p: &Preset) -> Self {
        let k = p.knowns;
        Self {
            family: p.family,
            a: k.a,
            b: k.b,
            kappa: k.kappa,
            v1: k.v1,
            g1: k.g1,
            g2: k.g2,
            phi0: k.phi0,
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        Self::from_preset(&ptsol::presets::fig1())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: 512,
            half_width: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub tracking: SweepConfig,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::A,
            start: 0.02,
            end: 0.10,
            steps: 17,
            tracking: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateSection {
    /// Amplitude of the seeded uniform noise added to the stationary field.
    pub noise: f64,
    pub integrator: PropagationConfig,
}

impl Default for PropagateSection {
    fn default() -> Self {
        Self {
            noise: 1e-4,
            integrator: PropagationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "ptsol-out".into(),
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    pub seed: u64,
    pub model: ModelSection,
    pub grid: GridSection,
    pub eigen: EigenConfig,
    pub sweep: SweepSection,
    pub propagate: PropagateSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            seed: 1,
            model: ModelSection::default(),
            grid: GridSection::default(),
            eigen: EigenConfig::default(),
            sweep: SweepSection::default(),
            propagate: PropagateSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(describe(origin, text, &e)))?;
        config.check_version()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn check_version(&self) -> Result<(), CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Config(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        Ok(())
    }

    /// Applies `key.path=value`. The value is read as a TOML literal, or as a
    /// bare string when it does not parse as one; an empty value removes the
    /// key (an unknown model quantity).
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set {assignment}: expected key=value")))?;
        let key = key.trim();
        let value = (!raw.trim().is_empty()).then(|| parse_literal(raw.trim()));

        let mut root = toml::Value::try_from(&*self)
            .map_err(|e| CliError::Config(format!("--set {key}: {e}")))?;
        let mut node = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for (depth, part) in parts.iter().enumerate() {
            let table = node.as_table_mut().ok_or_else(|| {
                CliError::Config(format!(
                    "--set {key}: `{}` is not a table",
                    parts[..depth].join(".")
                ))
            })?;
            if depth + 1 == parts.len() {
                match &value {
                    Some(v) => table.insert((*part).to_string(), v.clone()),
                    None => table.remove(*part),
                };
                break;
            }
            node = table
                .entry((*part).to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
        let updated: RunConfig = root.try_into().map_err(|e: toml::de::Error| {
            CliError::Config(format!("--set {key}: {}", e.message()))
        })?;
        updated.check_version()?;
        *self = updated;
        Ok(())
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// `origin:line:column: message`, naming the offending key when known.
fn describe(origin: &str, text: &str, error: &toml::de::Error) -> String {
    let Some(span) = error.span() else {
        return format!("{origin}: {}", error.message());
    };
    let before = &text[..span.start.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    let key = text[span.clone()].trim();
    let snippet = if key.is_empty() || key.contains('\n') {
        String::new()
    } else {
        format!(" (at `{key}`)")
    };
    format!("{origin}:{line}:{column}: {}{snippet}", error.message())
}
