use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PipelineError;
use crate::engine::DerivationLimits;
use crate::formula::DegreeVector;

/// Output filters. All off by default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Filters {
    pub strong_relevance: bool,
    pub variable_sharing: bool,
    pub exclude_logical_instances: bool,
}

impl Filters {
    pub fn any(&self) -> bool {
        self.strong_relevance || self.variable_sharing || self.exclude_logical_instances
    }
}

/// One corpus generation job. Relative paths are taken from the manifest's
/// directory; `logic` may also be `preset:<name>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineManifest {
    pub logic: String,
    /// Caps text such as `"=>:2,&:1"`; unlisted connectives are capped at 0.
    #[serde(with = "caps_text")]
    pub fragment_caps: DegreeVector,
    #[serde(default)]
    pub fragment_limits: DerivationLimits,
    #[serde(default = "yes")]
    pub fragment_subsumption: bool,
    /// Loaded when present, written after generation otherwise.
    #[serde(default)]
    pub fragment_cache: Option<PathBuf>,
    pub premises: PathBuf,
    #[serde(with = "caps_text")]
    pub empirical_caps: DegreeVector,
    #[serde(default)]
    pub empirical_limits: DerivationLimits,
    /// Term depth for universal instantiation; `null` turns it off.
    #[serde(default = "default_ui")]
    pub universal_instantiation: Option<usize>,
    #[serde(default)]
    pub filters: Filters,
    /// JSONL corpus.
    pub output: PathBuf,
    /// Optional bare corpus, one formula per line.
    #[serde(default)]
    pub text_output: Option<PathBuf>,
    /// Defaults to the output path with `.stats.json` appended.
    #[serde(default)]
    pub stats: Option<PathBuf>,
    /// Reserved; runs are always deterministic.
    #[serde(default = "yes")]
    pub deterministic: bool,
}

fn yes() -> bool {
    true
}

fn default_ui() -> Option<usize> {
    Some(2)
}

mod caps_text {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DegreeVector, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DegreeVector, D::Error> {
        let text = String::deserialize(d)?;
        DegreeVector::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl PipelineManifest {
    pub fn parse(text: &str) -> Result<PipelineManifest, PipelineError> {
        let m: PipelineManifest =
            serde_json::from_str(text).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        if !m.deterministic {
            return Err(PipelineError::Manifest(
                "`deterministic` is reserved and must be true".into(),
            ));
        }
        Ok(m)
    }

    /// Reads a manifest and resolves its relative paths against the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<PipelineManifest, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(PipelineManifest::parse(&text)?.resolved(base))
    }

    pub fn resolved(mut self, base: &Path) -> PipelineManifest {
        let join = |p: &PathBuf| base.join(p);
        if !self.logic.starts_with("preset:") {
            self.logic = base.join(&self.logic).to_string_lossy().into_owned();
        }
        self.fragment_cache = self.fragment_cache.as_ref().map(join);
        self.premises = join(&self.premises);
        self.output = join(&self.output);
        self.text_output = self.text_output.as_ref().map(join);
        self.stats = self.stats.as_ref().map(join);
        self
    }

    pub fn stats_path(&self) -> PathBuf {
        self.stats.clone().unwrap_or_else(|| {
            let mut s = self.output.clone().into_os_string();
            s.push(".stats.json");
            PathBuf::from(s)
        })
    }
}
