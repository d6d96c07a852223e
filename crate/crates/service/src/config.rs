use std::path::{Path, PathBuf};

use idiomatch_core::colloc::Model;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

/// Environment variables that override file settings.
pub const ENV_BIND: &str = "IDIOMATCH_BIND";
pub const ENV_VECTORS: &str = "IDIOMATCH_VECTORS";
pub const ENV_COLLS_TF: &str = "IDIOMATCH_COLLS_TF";
pub const ENV_COLLS_TFIDF: &str = "IDIOMATCH_COLLS_TFIDF";
pub const ENV_COLLS_PMI: &str = "IDIOMATCH_COLLS_PMI";
pub const ENV_MODEL: &str = "IDIOMATCH_MODEL";
pub const ENV_STATIC_DIR: &str = "IDIOMATCH_STATIC_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollocationPaths {
    pub tf: Option<PathBuf>,
    pub tfidf: Option<PathBuf>,
    pub pmi: Option<PathBuf>,
}

impl CollocationPaths {
    pub fn get(&self, model: Model) -> Option<&Path> {
        match model {
            Model::Tf => self.tf.as_deref(),
            Model::Tfidf => self.tfidf.as_deref(),
            Model::Pmi => self.pmi.as_deref(),
        }
    }

    fn slot(&mut self, model: Model) -> &mut Option<PathBuf> {
        match model {
            Model::Tf => &mut self.tf,
            Model::Tfidf => &mut self.tfidf,
            Model::Pmi => &mut self.pmi,
        }
    }
}

fn default_bind() -> String {
    DEFAULT_BIND.to_string()
}

fn default_model() -> Model {
    Model::Pmi
}

/// Service settings, usually read from a TOML file:
///
/// ```toml
/// bind = "127.0.0.1:8080"
/// vectors = "out/vectors.txt"
/// default_model = "pmi"
/// static_dir = "webui/dist"
///
/// [collocations]
/// pmi = "out/idiom2colls_pmi.tsv"
/// tfidf = "out/idiom2colls_tfidf.tsv"
/// ```
///
/// Relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub vectors: PathBuf,
    #[serde(default)]
    pub collocations: CollocationPaths,
    #[serde(default = "default_model")]
    pub default_model: Model,
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when unset.
    #[serde(default)]
    pub cors_origin: Option<String>,
    #[serde(default)]
    pub strip_stopwords: bool,
}

impl ApiConfig {
    pub fn new(vectors: impl Into<PathBuf>) -> Self {
        ApiConfig {
            bind: default_bind(),
            vectors: vectors.into(),
            collocations: CollocationPaths::default(),
            default_model: default_model(),
            static_dir: None,
            cors_origin: None,
            strip_stopwords: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = ApiConfig::from_toml(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_relative(base);
        }
        Ok(config)
    }

    fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.vectors);
        for model in Model::ALL {
            if let Some(p) = self.collocations.slot(model) {
                fix(p);
            }
        }
        if let Some(p) = &mut self.static_dir {
            fix(p);
        }
    }

    /// Applies `IDIOMATCH_*` overrides from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ServiceError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        for (key, value) in vars {
            let value: String = value.into();
            match key.as_ref() {
                ENV_BIND => self.bind = value,
                ENV_VECTORS => self.vectors = value.into(),
                ENV_COLLS_TF => self.collocations.tf = Some(value.into()),
                ENV_COLLS_TFIDF => self.collocations.tfidf = Some(value.into()),
                ENV_COLLS_PMI => self.collocations.pmi = Some(value.into()),
                ENV_STATIC_DIR => self.static_dir = Some(value.into()),
                ENV_MODEL => {
                    self.default_model = value
                        .parse()
                        .map_err(|_| ServiceError::Config(format!("{ENV_MODEL}: unknown model {value:?}")))?
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Checks that every referenced file exists and that the default model
    /// has a table.
    pub fn validate(&self) -> Result<(), ServiceError> {
        let missing = |what: &str, p: &Path| ServiceError::Config(format!("{what} not found: {}", p.display()));
        if !self.vectors.is_file() {
            return Err(missing("vector file", &self.vectors));
        }
        for model in Model::ALL {
            if let Some(p) = self.collocations.get(model) {
                if !p.is_file() {
                    return Err(missing(&format!("{model} collocation table"), p));
                }
            }
        }
        if self.collocations.get(self.default_model).is_none() {
            return Err(ServiceError::Config(format!(
                "default model {} has no collocation table configured",
                self.default_model
            )));
        }
        if let Some(dir) = &self.static_dir {
            if !dir.is_dir() {
                return Err(missing("static directory", dir));
            }
        }
        Ok(())
    }
}
