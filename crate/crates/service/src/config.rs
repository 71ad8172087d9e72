use std::path::{Path, PathBuf};

use phonoblocks::layout::{GridConfig, MdsConfig};
use phonoblocks::scaffold::ScaffoldConfig;
use phonoblocks::wordplay::InterpreterConfig;
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV: &str = "PHONOBLOCKS_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct Config {
    /// CMU-format dictionary used by `build-lexicon`.
    pub dictionary: PathBuf,
    /// Optional word frequency list (`WORD<TAB>log10freq`).
    pub frequencies: Option<PathBuf>,
    /// Directory of built lexicon artifacts.
    pub lexicon_dir: PathBuf,
    /// Where session logs are written.
    pub log_dir: PathBuf,
    pub port: u16,
    pub scaffold: ScaffoldConfig,
    pub interpreter: InterpreterConfig,
    pub grid: GridConfig,
    pub mds: MdsConfig,
    /// Keys per row on the alphabetic keyboards.
    pub keyboard_width: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            dictionary: PathBuf::from("data/cmudict.txt"),
            frequencies: Some(PathBuf::from("data/wordfreq_en.tsv")),
            lexicon_dir: PathBuf::from("artifacts/lexicon"),
            log_dir: PathBuf::from("artifacts/sessions"),
            port: 8080,
            scaffold: ScaffoldConfig::default(),
            interpreter: InterpreterConfig::default(),
            grid: GridConfig::default(),
            mds: MdsConfig::default(),
            keyboard_width: 7,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scaffold
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("scaffold: {e}")))?;
        self.interpreter
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("interpreter: {e}")))?;
        if self.grid.cols == 0 || self.grid.rows == 0 {
            return Err(ConfigError::Invalid("grid must have at least one row and column".into()));
        }
        if self.mds.max_iter == 0 || !(self.mds.tol >= 0.0) {
            return Err(ConfigError::Invalid("mds: maxIter must be positive and tol non-negative".into()));
        }
        if self.keyboard_width == 0 {
            return Err(ConfigError::Invalid("keyboardWidth must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Config, ConfigError> {
        let cfg: Config = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// `PHONOBLOCKS_CONFIG` wins over `path`; with neither, defaults apply.
    pub fn resolve(path: Option<&Path>) -> Result<Config, ConfigError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => match path {
                Some(p) => Self::load(p),
                None => {
                    let cfg = Config::default();
                    cfg.validate()?;
                    Ok(cfg)
                }
            },
        }
    }
}
