//! The resolved configuration: library defaults, then the --config file,
//! then the input's own "tolerances" block. Every value remembers where it
//! came from so a report can trace each threshold.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use waffle_core::Tolerances;

use crate::input::{schema_error, InputError, ToleranceOverrides};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Squares sampled per waffle by the automorphism oracle.
    #[serde(default)]
    pub oracle_squares: Option<usize>,
    /// Strips sampled by the quadrature oracle.
    #[serde(default)]
    pub oracle_samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    Config,
    Input,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub tolerances: Tolerances,
    pub sources: BTreeMap<&'static str, Source>,
    pub seed: u64,
    pub oracle_squares: usize,
    pub oracle_samples: usize,
    pub timing: bool,
}

pub const DEFAULT_SEED: u64 = 0x5eed;

macro_rules! overrides {
    ($($f:ident),* $(,)?) => {
        fn apply(t: &mut Tolerances, o: &ToleranceOverrides, src: Source, sources: &mut BTreeMap<&'static str, Source>) {
            $(if let Some(v) = o.$f {
                t.$f = v;
                sources.insert(stringify!($f), src);
            })*
        }

        fn names() -> &'static [&'static str] {
            &[$(stringify!($f)),*]
        }

        fn echo(t: &Tolerances) -> BTreeMap<&'static str, Value> {
            let mut m = BTreeMap::new();
            $(m.insert(stringify!($f), serde_json::json!(t.$f));)*
            m
        }
    };
}

overrides!(
    determinant,
    hyperbolic_trace,
    endpoint,
    pattern_dedupe,
    on_geodesic,
    tangency_angle,
    relator_defect,
    vertex_merge,
    filling_margin,
    chain_samples,
    visual_delta,
    shortening,
    max_shortening_iterations,
    strand_point,
    euclidean_strip,
    ratio_match,
    vertex_cap,
    automorphism_cap,
);

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tolerances: Tolerances::DEFAULT,
            sources: names().iter().map(|&n| (n, Source::Default)).collect(),
            seed: DEFAULT_SEED,
            oracle_squares: 8,
            oracle_samples: 100,
            timing: false,
        }
    }
}

impl Settings {
    pub fn with_config(mut self, c: &ConfigFile) -> Self {
        apply(&mut self.tolerances, &c.tolerances, Source::Config, &mut self.sources);
        if let Some(s) = c.seed {
            self.seed = s;
        }
        if let Some(n) = c.oracle_squares {
            self.oracle_squares = n;
        }
        if let Some(n) = c.oracle_samples {
            self.oracle_samples = n;
        }
        self
    }

    pub fn with_input(mut self, o: &ToleranceOverrides) -> Self {
        apply(&mut self.tolerances, o, Source::Input, &mut self.sources);
        self
    }

    /// Configuration echo for reports.
    pub fn echo(&self) -> Value {
        let values = echo(&self.tolerances);
        let tolerances: BTreeMap<&str, Value> = values
            .into_iter()
            .map(|(k, v)| (k, serde_json::json!({ "value": v, "source": self.sources[k] })))
            .collect();
        serde_json::json!({
            "tolerances": tolerances,
            "seed": self.seed,
            "oracle_squares": self.oracle_squares,
            "oracle_samples": self.oracle_samples,
        })
    }
}

pub fn load_config(path: &Path) -> Result<ConfigFile, Vec<InputError>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![InputError::Io { path: path.display().to_string(), message: e.to_string() }])?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| vec![schema_error(e)])
}
