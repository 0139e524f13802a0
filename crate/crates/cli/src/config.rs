//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [grid]
//! n = 257
//! t_hi = auto
//! ```
//!
//! Every key has a default; `auto` marks values derived from the command
//! (the example being built, the field being analysed). Unknown sections or
//! keys are errors. [`RunConfig::to_text`] writes every key in a fixed
//! order, and parsing that text reproduces the same config.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown section [{0}] (expected grid, solver, analysis, example)")]
    UnknownSection(String),
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key} = {value}: {msg}")]
    BadValue { section: String, key: String, value: String, msg: String },
}

pub trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

fn parse_plain<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v: f64 = parse_plain(s)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err("must be finite".into())
        }
    }
    fn render(&self) -> String {
        // shortest text that parses back to the same value
        format!("{self:?}")
    }
}

impl ConfigValue for usize {
    fn parse_value(s: &str) -> Result<Self, String> {
        parse_plain(s)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for bool {
    fn parse_value(s: &str) -> Result<Self, String> {
        parse_plain(s)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for String {
    fn parse_value(s: &str) -> Result<Self, String> {
        if s.is_empty() || s.contains(char::is_whitespace) {
            return Err("expected a single word".into());
        }
        Ok(s.to_string())
    }
    fn render(&self) -> String {
        self.clone()
    }
}

impl<T: ConfigValue> ConfigValue for Option<T> {
    fn parse_value(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(None)
        } else {
            T::parse_value(s).map(Some)
        }
    }
    fn render(&self) -> String {
        match self {
            None => "auto".into(),
            Some(v) => v.render(),
        }
    }
}

macro_rules! section {
    ($name:ident, $title:literal { $($(#[$doc:meta])* $field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            $($(#[$doc])* pub $field: $ty),*
        }

        impl Default for $name {
            fn default() -> Self {
                $name { $($field: $default),* }
            }
        }

        impl $name {
            pub const TITLE: &'static str = $title;

            pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
                match key {
                    $(stringify!($field) => {
                        self.$field = <$ty as ConfigValue>::parse_value(value).map_err(|msg| ConfigError::BadValue {
                            section: $title.into(),
                            key: key.into(),
                            value: value.into(),
                            msg,
                        })?;
                    })*
                    _ => return Err(ConfigError::UnknownKey { section: $title.into(), key: key.into() }),
                }
                Ok(())
            }

            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($field), self.$field.render())),*]
            }
        }
    };
}

section!(GridSection, "grid" {
    dim: usize = 1,
    /// Nodes per axis.
    n: Option<usize> = None,
    lo: Option<f64> = None,
    hi: Option<f64> = None,
    nt: Option<usize> = None,
    t_lo: Option<f64> = None,
    t_hi: Option<f64> = None,
});

section!(SolverSection, "solver" {
    /// `neumann` or `dirichlet`.
    boundary: String = "neumann".into(),
    omega: f64 = 1.1,
    tol: f64 = 1e-8,
    max_iter: usize = 10_000,
    substeps: usize = 1,
    enforce_monotone: bool = true,
    /// Solve `w(r, t)` for radial data in this ambient dimension.
    radial_dim: Option<usize> = None,
});

section!(AnalysisSection, "analysis" {
    gamma: f64 = 4.0,
    per_octave: usize = 4,
    r_min: Option<f64> = None,
    r_max: Option<f64> = None,
    cutoff: bool = true,
    /// Subtracted profile for `frequency`: `planar` (`-t` about the center) or `zero`.
    profile: String = "planar".into(),
    /// Radius (in cells) of the neighbourhood used to detect extinction maxima.
    maxima_window: f64 = 2.0,
    rank_tol: f64 = 0.05,
    m_tol: f64 = 0.05,
    residual_tol: f64 = 0.1,
    stability_tol: f64 = 0.05,
    plateau_margin: f64 = 0.25,
    /// Jump detection ball radius as a fraction of the domain half-width.
    jump_threshold: f64 = 0.05,
    taylor_k: usize = 3,
    taylor_beta: f64 = 0.75,
    taylor_r0: Option<f64> = None,
    /// Time coefficient for `cleaning`; `auto` classifies the point first.
    cleaning_m: Option<f64> = None,
    box_r0: Option<f64> = None,
    box_scales: usize = 6,
});

section!(ExampleSection, "example" {
    t0: f64 = 0.25,
    eps: f64 = 1e-3,
    order: usize = 8,
    d: usize = 2,
    amp: f64 = 0.1,
    half_width: f64 = 0.6,
    dx: f64 = 0.01,
    dx_radial: f64 = 0.0025,
    levels_to_extinction: usize = 320,
    total_levels: usize = 401,
    spacing: f64 = 4.0,
    n_max: usize = 2,
    base_dx: f64 = 0.001953125,
    glued_dx: f64 = 0.00390625,
});

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub grid: GridSection,
    pub solver: SolverSection,
    pub analysis: AnalysisSection,
    pub example: ExampleSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line: idx + 1, msg: "unterminated section header".into() })?
                    .trim();
                if ![GridSection::TITLE, SolverSection::TITLE, AnalysisSection::TITLE, ExampleSection::TITLE]
                    .contains(&name)
                {
                    return Err(ConfigError::UnknownSection(name.into()));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let sec = section
                .as_deref()
                .ok_or_else(|| ConfigError::Syntax { line: idx + 1, msg: "key outside any section".into() })?;
            cfg.set(sec, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        match section {
            "grid" => self.grid.set(key, value),
            "solver" => self.solver.set(key, value),
            "analysis" => self.analysis.set(key, value),
            "example" => self.example.set(key, value),
            other => Err(ConfigError::UnknownSection(other.into())),
        }
    }

    /// Apply a `section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::Syntax { line: 0, msg: format!("override `{spec}` is not section.key=value") };
        let (path, value) = spec.split_once('=').ok_or_else(bad)?;
        let (section, key) = path.split_once('.').ok_or_else(bad)?;
        self.set(section.trim(), key.trim(), value.trim())
    }

    fn sections(&self) -> [(&'static str, Vec<(&'static str, String)>); 4] {
        [
            (GridSection::TITLE, self.grid.entries()),
            (SolverSection::TITLE, self.solver.entries()),
            (AnalysisSection::TITLE, self.analysis.entries()),
            (ExampleSection::TITLE, self.example.entries()),
        ]
    }

    /// Canonical text: every section and key, defaults included.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (title, entries)) in self.sections().into_iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("[{title}]\n"));
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    /// The same content as nested string maps, for JSON sidecars.
    pub fn to_map(&self) -> BTreeMap<&'static str, BTreeMap<&'static str, String>> {
        self.sections().into_iter().map(|(t, e)| (t, e.into_iter().collect())).collect()
    }
}
