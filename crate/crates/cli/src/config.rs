use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use spatembed::feature_space::{DEFAULT_EPS_EIG, DEFAULT_PAIR_BUDGET};
use spatembed::graph::Level;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Features,
    Embed,
    Null,
    Test,
    Synth,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Features => "features",
            Stage::Embed => "embed",
            Stage::Null => "null",
            Stage::Test => "test",
            Stage::Synth => "synth",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSelection {
    Country,
    Region,
    Both,
}

impl LevelSelection {
    pub fn levels(self) -> Vec<Level> {
        match self {
            LevelSelection::Country => vec![Level::Country],
            LevelSelection::Region => vec![Level::Region],
            LevelSelection::Both => vec![Level::Country, Level::Region],
        }
    }
}

impl FromStr for LevelSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "country" => Ok(LevelSelection::Country),
            "region" => Ok(LevelSelection::Region),
            "both" => Ok(LevelSelection::Both),
            _ => Err(format!("unknown level `{s}` (country|region|both)")),
        }
    }
}

impl fmt::Display for LevelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelSelection::Country => "country",
            LevelSelection::Region => "region",
            LevelSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthModel {
    Gravity,
    Er,
    PrefAttach,
}

impl FromStr for SynthModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gravity" => Ok(SynthModel::Gravity),
            "er" => Ok(SynthModel::Er),
            "pa" => Ok(SynthModel::PrefAttach),
            _ => Err(format!("unknown model `{s}` (gravity|er|pa)")),
        }
    }
}

impl fmt::Display for SynthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthModel::Gravity => "gravity",
            SynthModel::Er => "er",
            SynthModel::PrefAttach => "pa",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub model: SynthModel,
    pub nodes: usize,
    /// Gravity: one stub count per group; the group count is its length.
    pub stubs: Vec<usize>,
    pub beta: f64,
    /// ER edge probability.
    pub edge_prob: f64,
    /// Preferential attachment edges per arrival.
    pub attach: usize,
    /// ER / PA: sizes of disjoint randomly labeled groups.
    pub random_groups: Vec<usize>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            model: SynthModel::Gravity,
            nodes: 20_000,
            stubs: (0..20).map(|g| 1 + g % 5).collect(),
            beta: 4.0,
            edge_prob: 0.0003,
            attach: 3,
            random_groups: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub links: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub geo: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub sets: usize,
    pub sizes: Vec<usize>,
    pub pair_budget: u64,
    pub eig_tol: f64,
    pub fix_alpha: Option<f64>,
    pub min_group_size: usize,
    pub level: LevelSelection,
    pub strict: bool,
    /// Fit the embedding on geolocated nodes only.
    pub fit_labeled_only: bool,
    /// Draw null sets from geolocated nodes only.
    pub null_labeled_only: bool,
    /// Pooled pair-distance spread instead of the spread of set means.
    pub pooled_null: bool,
    pub synth: SynthParams,
}

impl PipelineConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            links: None,
            edges: None,
            geo: None,
            out: out.into(),
            seed: 1,
            sets: 100,
            sizes: vec![10, 20, 50, 100, 200, 500],
            pair_budget: DEFAULT_PAIR_BUDGET,
            eig_tol: DEFAULT_EPS_EIG,
            fix_alpha: None,
            min_group_size: 2,
            level: LevelSelection::Country,
            strict: false,
            fit_labeled_only: false,
            null_labeled_only: false,
            pooled_null: false,
            synth: SynthParams::default(),
        }
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Settings that influence artifacts, as `key=value` pairs for the manifest.
    pub fn describe(&self) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut parts = vec![
            format!("sets={}", self.sets),
            format!("sizes={}", list(&self.sizes)),
            format!("pair_budget={}", self.pair_budget),
            format!("eig_tol={:e}", self.eig_tol),
            format!(
                "fix_alpha={}",
                self.fix_alpha.map_or("none".to_string(), |a| a.to_string())
            ),
            format!("min_group_size={}", self.min_group_size),
            format!("level={}", self.level),
            format!("strict={}", self.strict),
            format!("fit_labeled_only={}", self.fit_labeled_only),
            format!("null_labeled_only={}", self.null_labeled_only),
            format!("pooled_null={}", self.pooled_null),
        ];
        let s = &self.synth;
        parts.push(format!(
            "synth=model:{};nodes:{};stubs:{};beta:{};edge_prob:{};attach:{};random_groups:{}",
            s.model,
            s.nodes,
            list(&s.stubs),
            s.beta,
            s.edge_prob,
            s.attach,
            list(&s.random_groups)
        ));
        parts.join(" ")
    }
}
