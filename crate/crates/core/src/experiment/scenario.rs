//! Scenario files.
//!
//! ```text
//! # comment
//! [array]
//! m = 2
//! mprime = 2
//! [objects]
//! target  20 40 1      # kind azimuth_deg elevation_deg q
//! clutter 70 85 1
//! [sensors]
//! k = 4
//! alpha_max = 2
//! noise_var = 0.5
//! [fusion]
//! r = 10
//! noise_var = 0.5
//! [limits]
//! p_max = 100
//! [demands]
//! psi = 1, 1
//! [rng]
//! seed = 0
//! ```
//!
//! Every section except `[rng]` is required. Object rows may separate their
//! fields with whitespace or commas.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::scene::{
    validate_scene, ArrayGeometry, FusionCenter, Scene, SceneObject, SensorNetwork, Violation,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scene: Scene,
    /// Channel seed; 0 when the file has no `[rng]` section.
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("invalid scene: {}", join_violations(.0))]
    Validation(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Array,
    Objects,
    Sensors,
    Fusion,
    Limits,
    Demands,
    Rng,
}

impl Section {
    const ALL: [Section; 7] = [
        Section::Array,
        Section::Objects,
        Section::Sensors,
        Section::Fusion,
        Section::Limits,
        Section::Demands,
        Section::Rng,
    ];

    fn name(self) -> &'static str {
        match self {
            Section::Array => "array",
            Section::Objects => "objects",
            Section::Sensors => "sensors",
            Section::Fusion => "fusion",
            Section::Limits => "limits",
            Section::Demands => "demands",
            Section::Rng => "rng",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Array => &["m", "mprime"],
            Section::Objects => &[],
            Section::Sensors => &["k", "alpha_max", "noise_var"],
            Section::Fusion => &["r", "noise_var"],
            Section::Limits => &["p_max"],
            Section::Demands => &["psi"],
            Section::Rng => &["seed"],
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.name())
    }
}

/// A value with the position of its first character.
#[derive(Debug, Clone)]
struct Located {
    text: String,
    line: usize,
    column: usize,
}

impl Located {
    fn error(&self, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, what: &str) -> Result<T, ScenarioError> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected {what}, found `{}`", self.text)))
    }
}

#[derive(Default)]
struct Raw {
    seen: BTreeMap<Section, Located>,
    keys: BTreeMap<(Section, &'static str), Located>,
    objects: Vec<Vec<Located>>,
}

/// Splits `text` at `,` and whitespace, keeping 1-based columns.
fn fields(text: &str, line: usize, column_offset: usize) -> Vec<Located> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (pos, &(byte, ch)) in chars.iter().enumerate() {
        let sep = ch == ',' || ch.is_whitespace();
        match (sep, start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                out.push(Located {
                    text: text[chars[s].0..byte].to_string(),
                    line,
                    column: column_offset + s,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Located {
            text: text[chars[s].0..].to_string(),
            line,
            column: column_offset + s,
        });
    }
    out
}

fn leading_ws(s: &str) -> usize {
    s.chars().take_while(|c| c.is_whitespace()).count()
}

fn scan(source: &str) -> Result<Raw, ScenarioError> {
    let mut raw = Raw::default();
    let mut current: Option<Section> = None;
    for (idx, full) in source.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("");
        let indent = leading_ws(content);
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = indent + 1;
        let here = |message: String| ScenarioError::Parse {
            line,
            column,
            message,
        };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| here("unterminated section header".into()))?
                .trim();
            let section = Section::ALL
                .into_iter()
                .find(|s| s.name() == name)
                .ok_or_else(|| here(format!("unknown section [{name}]")))?;
            if let Some(first) = raw.seen.get(&section) {
                return Err(here(format!(
                    "duplicate section {section}, first declared on line {}",
                    first.line
                )));
            }
            raw.seen.insert(
                section,
                Located {
                    text: name.into(),
                    line,
                    column,
                },
            );
            current = Some(section);
            continue;
        }
        let section = current.ok_or_else(|| here("content before the first section".into()))?;
        if section == Section::Objects {
            raw.objects.push(fields(trimmed, line, column));
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| here("expected `key = value`".into()))?;
        let key = key.trim();
        let known = section
            .keys()
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| here(format!("unknown key `{key}` in {section}")))?;
        let value_offset = content.find('=').expect("split above") + 1;
        let value_col = value_offset + leading_ws(&content[value_offset..]) + 1;
        let located = Located {
            text: value.trim().to_string(),
            line,
            column: value_col,
        };
        if located.text.is_empty() {
            return Err(located.error(format!("empty value for `{key}`")));
        }
        if let Some(first) = raw.keys.get(&(section, *known)) {
            return Err(here(format!(
                "duplicate key `{key}` in {section}, first set on line {}",
                first.line
            )));
        }
        raw.keys.insert((section, known), located);
    }
    Ok(raw)
}

impl Raw {
    fn require(&self, section: Section) -> Result<&Located, ScenarioError> {
        self.seen
            .get(&section)
            .ok_or(ScenarioError::MissingSection(section.name()))
    }

    fn key(&self, section: Section, key: &'static str) -> Result<&Located, ScenarioError> {
        let header = self.require(section)?;
        self.keys
            .get(&(section, key))
            .ok_or_else(|| header.error(format!("{section} is missing key `{key}`")))
    }
}

fn parse_object(row: &[Located]) -> Result<SceneObject, ScenarioError> {
    let first = &row[0];
    if row.len() != 4 {
        return Err(first.error(format!(
            "object rows need 4 fields (kind azimuth elevation q), found {}",
            row.len()
        )));
    }
    let az: f64 = row[1].parse("an azimuth in degrees")?;
    let el: f64 = row[2].parse("an elevation in degrees")?;
    let q: f64 = row[3].parse("a response power")?;
    match first.text.to_ascii_lowercase().as_str() {
        "target" => Ok(SceneObject::target(az, el, q)),
        "clutter" => Ok(SceneObject::clutter(az, el, q)),
        other => Err(first.error(format!("unknown object kind `{other}`"))),
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario_str(source: &str) -> Result<Scenario, ScenarioError> {
    let raw = scan(source)?;
    for section in Section::ALL.into_iter().filter(|s| *s != Section::Rng) {
        raw.require(section)?;
    }
    let geometry = ArrayGeometry::new(
        raw.key(Section::Array, "m")?.parse("a positive integer")?,
        raw.key(Section::Array, "mprime")?
            .parse("a positive integer")?,
    );
    let objects = raw
        .objects
        .iter()
        .map(|row| parse_object(row))
        .collect::<Result<Vec<_>, _>>()?;
    let sensors = SensorNetwork {
        sensor_count: raw
            .key(Section::Sensors, "k")?
            .parse("a positive integer")?,
        alpha_max: raw.key(Section::Sensors, "alpha_max")?.parse("a number")?,
        sensor_noise_var: raw.key(Section::Sensors, "noise_var")?.parse("a number")?,
    };
    let fusion = FusionCenter {
        antenna_count: raw.key(Section::Fusion, "r")?.parse("a positive integer")?,
        fc_noise_var: raw.key(Section::Fusion, "noise_var")?.parse("a number")?,
    };
    let p_max = raw.key(Section::Limits, "p_max")?.parse("a number")?;
    let psi = raw.key(Section::Demands, "psi")?;
    let sinr_demands = fields(&psi.text, psi.line, psi.column)
        .iter()
        .map(|f| f.parse("a number"))
        .collect::<Result<Vec<f64>, _>>()?;
    let seed = match raw.keys.get(&(Section::Rng, "seed")) {
        Some(v) => v.parse("a nonnegative integer")?,
        None => 0,
    };
    let scene = Scene {
        geometry,
        objects,
        sensors,
        fusion,
        p_max,
        sinr_demands,
    };
    validate_scene(&scene).map_err(ScenarioError::Validation)?;
    Ok(Scenario { scene, seed })
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let source = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario_str(&source)
}

/// The bundled two-target, one-clutter scenario.
pub const BUNDLED_SCENARIO: &str = include_str!("../../scenarios/two_targets.scn");
