use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::expr::{parse, parse_constant};

/// A numeric entry, kept with its source text so a dump re-parses identically.
///
/// The text may be any constant expression such as `exp(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub text: String,
    pub value: f64,
}

impl Constant {
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let value = parse_constant(text).map_err(|e| e.to_string())?;
        Ok(Self {
            text: text.to_string(),
            value,
        })
    }

    pub fn from_value(value: f64) -> Self {
        Self {
            text: value.to_string(),
            value,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelayConfig {
    pub tau_d: Constant,
    pub psi_lower: String,
    pub psi_upper: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub tau: Option<String>,
    pub zeta_lower: String,
    pub zeta_upper: String,
}

/// Optional overrides of the default thresholds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ToleranceConfig {
    pub tol_cons: Option<Constant>,
    pub tol_span: Option<Constant>,
    pub slope_tol: Option<Constant>,
    pub delta_floor: Option<Constant>,
    pub max_iter: Option<usize>,
}

impl ToleranceConfig {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// A parsed problem configuration file.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    /// Leading `#` comment lines, without the marker; echoed in reports.
    pub header: Vec<String>,
    pub a: Constant,
    pub b: Constant,
    /// Number of subintervals; each level has `nodes + 1` rows.
    pub nodes: usize,
    /// Number of r-levels on a uniform grid over [0, 1].
    pub levels: usize,
    pub output: Option<String>,
    pub l_lower: String,
    pub l_upper: String,
    pub q_a: [Constant; 3],
    pub q_b: [Constant; 3],
    pub delay: Option<DelayConfig>,
    pub generator: GeneratorConfig,
    pub tolerances: ToleranceConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// One-based; zero for problems not tied to a line.
    pub line: usize,
    pub message: String,
}

const SECTIONS: [&str; 6] = [
    "problem",
    "lagrangian",
    "boundary",
    "delay",
    "generator",
    "tolerances",
];

fn section_keys(section: &str) -> &'static [&'static str] {
    match section {
        "problem" => &["a", "b", "nodes", "levels", "output"],
        "lagrangian" => &["L_lower", "L_upper"],
        "boundary" => &["q_a", "q_b"],
        "delay" => &["tau_d", "psi_lower", "psi_upper"],
        "generator" => &["tau", "zeta_lower", "zeta_upper"],
        "tolerances" => &[
            "tol_cons",
            "tol_span",
            "slope_tol",
            "delta_floor",
            "max_iter",
        ],
        _ => &[],
    }
}

struct Entry {
    section: &'static str,
    key: String,
    value: String,
    line: usize,
}

impl ProblemConfig {
    /// Parses the line-oriented `[section]` / `key = value` format.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut seen_sections: Vec<(&'static str, usize)> = Vec::new();
        let mut current: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| ConfigError { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{content}`")))?
                    .trim();
                let Some(section) = SECTIONS.iter().find(|s| **s == name) else {
                    return Err(err(format!("unknown section [{name}]")));
                };
                if seen_sections.iter().any(|(s, _)| s == section) {
                    return Err(err(format!("section [{name}] appears twice")));
                }
                seen_sections.push((section, line));
                current = Some(section);
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(format!("expected `key = value`, got `{content}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(section) = current else {
                return Err(err(format!("`{key}` appears before any section header")));
            };
            if !section_keys(section).contains(&key) {
                return Err(err(format!("unknown key `{key}` in [{section}]")));
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(err(format!("duplicate key `{key}` in [{section}]")));
            }
            if value.is_empty() {
                return Err(err(format!("`{key}` has no value")));
            }
            entries.push(Entry {
                section,
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }

        for required in ["problem", "lagrangian", "boundary", "generator"] {
            if !seen_sections.iter().any(|(s, _)| *s == required) {
                return Err(ConfigError {
                    line: 0,
                    message: format!("missing section [{required}]"),
                });
            }
        }
        let find = |section: &str, key: &str| {
            entries
                .iter()
                .find(|e| e.section == section && e.key == key)
        };
        let section_line = |section: &str| {
            seen_sections
                .iter()
                .find(|(s, _)| *s == section)
                .map_or(0, |(_, l)| *l)
        };
        let require = |section: &str, key: &str| {
            find(section, key).ok_or_else(|| ConfigError {
                line: section_line(section),
                message: format!("missing key `{key}` in [{section}]"),
            })
        };
        let constant = |e: &Entry| {
            Constant::parse(&e.value).map_err(|m| ConfigError {
                line: e.line,
                message: format!("`{}`: {m}", e.key),
            })
        };
        let count = |e: &Entry, min: usize| -> Result<usize, ConfigError> {
            match e.value.parse::<usize>() {
                Ok(n) if n >= min => Ok(n),
                _ => Err(ConfigError {
                    line: e.line,
                    message: format!("`{}` must be an integer >= {min}, got `{}`", e.key, e.value),
                }),
            }
        };
        let expression = |e: &Entry| {
            parse(&e.value)
                .map(|_| e.value.clone())
                .map_err(|pe| ConfigError {
                    line: e.line,
                    message: format!("`{}`: {pe}", e.key),
                })
        };
        let triple = |e: &Entry| -> Result<[Constant; 3], ConfigError> {
            let parts: Vec<&str> = e.value.split(',').collect();
            let bad = |message: String| ConfigError {
                line: e.line,
                message,
            };
            if parts.len() != 3 {
                return Err(bad(format!(
                    "`{}` needs three comma-separated numbers",
                    e.key
                )));
            }
            let mut out = Vec::with_capacity(3);
            for p in parts {
                out.push(Constant::parse(p).map_err(|m| bad(format!("`{}`: {m}", e.key)))?);
            }
            let [x, y, z]: [Constant; 3] = out.try_into().expect("three parts");
            if !(x.value <= y.value && y.value <= z.value) {
                return Err(bad(format!(
                    "`{}` triangular needs x <= y <= z, got ({}, {}, {})",
                    e.key, x.value, y.value, z.value
                )));
            }
            Ok([x, y, z])
        };

        let a = constant(require("problem", "a")?)?;
        let b_entry = require("problem", "b")?;
        let b = constant(b_entry)?;
        if !(a.value < b.value) {
            return Err(ConfigError {
                line: b_entry.line,
                message: format!("need a < b, got a = {}, b = {}", a.value, b.value),
            });
        }
        let nodes = count(require("problem", "nodes")?, 2)?;
        let levels = match find("problem", "levels") {
            Some(e) => count(e, 2)?,
            None => crate::fuzzy::DEFAULT_LEVELS,
        };
        let output = find("problem", "output").map(|e| e.value.clone());

        let delay = if seen_sections.iter().any(|(s, _)| *s == "delay") {
            Some(DelayConfig {
                tau_d: constant(require("delay", "tau_d")?)?,
                psi_lower: expression(require("delay", "psi_lower")?)?,
                psi_upper: expression(require("delay", "psi_upper")?)?,
            })
        } else {
            None
        };
        let opt_const = |key: &str| find("tolerances", key).map(constant).transpose();
        let tolerances = ToleranceConfig {
            tol_cons: opt_const("tol_cons")?,
            tol_span: opt_const("tol_span")?,
            slope_tol: opt_const("slope_tol")?,
            delta_floor: opt_const("delta_floor")?,
            max_iter: find("tolerances", "max_iter")
                .map(|e| count(e, 1))
                .transpose()?,
        };

        let header = text
            .lines()
            .map(str::trim)
            .take_while(|l| l.is_empty() || l.starts_with('#'))
            .filter_map(|l| l.strip_prefix('#'))
            .map(|l| l.trim().to_string())
            .collect();

        Ok(Self {
            header,
            a,
            b,
            nodes,
            levels,
            output,
            l_lower: expression(require("lagrangian", "L_lower")?)?,
            l_upper: expression(require("lagrangian", "L_upper")?)?,
            q_a: triple(require("boundary", "q_a")?)?,
            q_b: triple(require("boundary", "q_b")?)?,
            delay,
            generator: GeneratorConfig {
                tau: find("generator", "tau").map(expression).transpose()?,
                zeta_lower: expression(require("generator", "zeta_lower")?)?,
                zeta_upper: expression(require("generator", "zeta_upper")?)?,
            },
            tolerances,
        })
    }

    /// Renders the configuration in the format [`ProblemConfig::parse`] reads.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let tri = |t: &[Constant; 3]| format!("{},{},{}", t[0], t[1], t[2]);
        // writing to a String cannot fail
        for line in &self.header {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "[problem]");
        let _ = writeln!(s, "a = {}", self.a);
        let _ = writeln!(s, "b = {}", self.b);
        let _ = writeln!(s, "nodes = {}", self.nodes);
        let _ = writeln!(s, "levels = {}", self.levels);
        if let Some(out) = &self.output {
            let _ = writeln!(s, "output = {out}");
        }
        let _ = writeln!(s, "\n[lagrangian]");
        let _ = writeln!(s, "L_lower = {}", self.l_lower);
        let _ = writeln!(s, "L_upper = {}", self.l_upper);
        let _ = writeln!(s, "\n[boundary]");
        let _ = writeln!(s, "q_a = {}", tri(&self.q_a));
        let _ = writeln!(s, "q_b = {}", tri(&self.q_b));
        if let Some(d) = &self.delay {
            let _ = writeln!(s, "\n[delay]");
            let _ = writeln!(s, "tau_d = {}", d.tau_d);
            let _ = writeln!(s, "psi_lower = {}", d.psi_lower);
            let _ = writeln!(s, "psi_upper = {}", d.psi_upper);
        }
        let _ = writeln!(s, "\n[generator]");
        if let Some(t) = &self.generator.tau {
            let _ = writeln!(s, "tau = {t}");
        }
        let _ = writeln!(s, "zeta_lower = {}", self.generator.zeta_lower);
        let _ = writeln!(s, "zeta_upper = {}", self.generator.zeta_upper);
        let t = &self.tolerances;
        if !t.is_empty() {
            let _ = writeln!(s, "\n[tolerances]");
            for (key, v) in [
                ("tol_cons", &t.tol_cons),
                ("tol_span", &t.tol_span),
                ("slope_tol", &t.slope_tol),
                ("delta_floor", &t.delta_floor),
            ] {
                if let Some(v) = v {
                    let _ = writeln!(s, "{key} = {v}");
                }
            }
            if let Some(m) = t.max_iter {
                let _ = writeln!(s, "max_iter = {m}");
            }
        }
        s
    }
}
