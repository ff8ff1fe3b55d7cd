//! Artifact directory: tables, reports, plots and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, FORMAT_VERSION};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub kind: &'static str,
    pub format_version: u32,
}

pub struct OutputDir {
    root: PathBuf,
    prefix: String,
    pub plots: bool,
    artifacts: Vec<Artifact>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl OutputDir {
    pub fn create(root: PathBuf, plots: bool) -> Result<Self, CliError> {
        fs::create_dir_all(&root).map_err(io(&root))?;
        Ok(Self {
            root,
            prefix: String::new(),
            plots,
            artifacts: Vec::new(),
        })
    }

    /// Runs `f` with names placed under `name/`; the artifacts stay listed in
    /// this directory's manifest.
    pub fn nested<R>(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Self) -> Result<R, CliError>,
    ) -> Result<R, CliError> {
        let dir = self.root.join(&self.prefix).join(name);
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let nested = format!("{}{name}/", self.prefix);
        let saved = std::mem::replace(&mut self.prefix, nested);
        let result = f(self);
        self.prefix = saved;
        result
    }

    fn claim(&mut self, name: &str, kind: &'static str) -> PathBuf {
        let relative = format!("{}{name}", self.prefix);
        let path = self.root.join(&relative);
        self.artifacts.push(Artifact {
            path: relative,
            kind,
            format_version: FORMAT_VERSION,
        });
        path
    }

    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        rows: impl IntoIterator<Item = R>,
    ) -> Result<(), CliError> {
        let path = self.claim(name, "table");
        let fail = |e: csv::Error| CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut writer = csv::Writer::from_path(&path).map_err(fail)?;
        for row in rows {
            writer.serialize(row).map_err(fail)?;
        }
        writer.flush().map_err(io(&path))
    }

    pub fn report<S: Serialize>(&mut self, name: &str, body: &S) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Versioned<'a, S> {
            format_version: u32,
            #[serde(flatten)]
            body: &'a S,
        }
        let text = toml::to_string_pretty(&Versioned {
            format_version: FORMAT_VERSION,
            body,
        })
        .map_err(|e| CliError::Output {
            path: name.into(),
            message: e.to_string(),
        })?;
        let path = self.claim(name, "report");
        fs::write(&path, text).map_err(io(&path))
    }

    /// Calls `draw` with the target path when plotting is enabled.
    pub fn plot(
        &mut self,
        name: &str,
        draw: impl FnOnce(&Path) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        if !self.plots {
            return Ok(());
        }
        let path = self.claim(name, "plot");
        draw(&path)
    }

    pub fn manifest(&mut self, command: &str, config: &RunConfig) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            format_version: u32,
            command: &'a str,
            tool: String,
            seed: u64,
            artifacts: &'a [Artifact],
            config: &'a RunConfig,
        }
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            command,
            tool: format!("ptsol {}", env!("CARGO_PKG_VERSION")),
            seed: config.seed,
            artifacts: &self.artifacts,
            config,
        };
        let text = toml::to_string_pretty(&manifest).map_err(|e| CliError::Output {
            path: "manifest.toml".into(),
            message: e.to_string(),
        })?;
        let path = self.root.join("manifest.toml");
        fs::write(&path, text).map_err(io(&path))?;
        Ok(path)
    }
}
