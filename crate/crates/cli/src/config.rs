//! Problem files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! n = 1
//! structure = F
//! a = 1
//! b = -1
//! lambda = 0
//! lagrangian = 0.5*(x0^2 + x1^2 + x2^2 + x3^2)
//! metric = default            # or a comma list of +1/-1
//! t_end = pi/2
//! h = 1e-3
//! output_every = 100
//! x0 = 1, 0, 0, 0
//! ```

use std::collections::BTreeMap;

use confel_core::structures::{default_metric, Metric, StructureKind};
use confel_core::symexpr::{parse_expr, parse_with_limit, ParseError};
use confel_core::{Chart, Expr, Lambda, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("unknown key '{key}' on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("key '{key}' given twice (line {line})")]
    Duplicate { key: String, line: usize },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("{key}: {source}")]
    Expression {
        key: &'static str,
        source: ParseError,
    },
    #[error("{key}: {message}")]
    Value { key: &'static str, message: String },
}

const KEYS: [&str; 11] = [
    "n",
    "a",
    "b",
    "lambda",
    "lagrangian",
    "structure",
    "metric",
    "t_end",
    "h",
    "output_every",
    "x0",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Integrator {
    pub t_end: Option<f64>,
    pub h: f64,
    pub output_every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub chart: Chart,
    pub a: Rational,
    pub b: Rational,
    pub lambda: Lambda,
    pub lagrangian: Option<Expr>,
    pub structure: StructureKind,
    pub metric: Metric,
    pub integrator: Integrator,
    pub x0: Option<Vec<f64>>,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = key_values(text)?;
        let get = |k: &str| raw.get(k).map(String::as_str);

        let n = match get("n") {
            None => 1,
            Some(v) => v.parse::<usize>().map_err(|_| ConfigError::Value {
                key: "n",
                message: format!("expected a positive integer, got '{v}'"),
            })?,
        };
        let chart = Chart::new(n).ok_or(ConfigError::Value {
            key: "n",
            message: "block size must be at least 1".into(),
        })?;

        let a = rational("a", get("a").unwrap_or("1"))?;
        let b = rational("b", get("b").unwrap_or("-1"))?;
        for (key, v) in [("a", &a), ("b", &b)] {
            if num::Zero::is_zero(v) {
                return Err(ConfigError::Value {
                    key,
                    message: "must be nonzero".into(),
                });
            }
        }

        let lambda_expr = parse_expr(get("lambda").unwrap_or("0"), &chart).map_err(|source| {
            ConfigError::Expression {
                key: "lambda",
                source,
            }
        })?;
        let lambda = Lambda::new(lambda_expr).map_err(|e| ConfigError::Value {
            key: "lambda",
            message: e.to_string(),
        })?;

        let lagrangian = get("lagrangian")
            .map(|s| {
                parse_expr(s, &chart).map_err(|source| ConfigError::Expression {
                    key: "lagrangian",
                    source,
                })
            })
            .transpose()?;

        let structure = match get("structure") {
            None => StructureKind::F,
            Some(s) => s.parse().map_err(|message| ConfigError::Value {
                key: "structure",
                message,
            })?,
        };

        let metric = match get("metric") {
            None | Some("default") => default_metric(chart),
            Some(list) => {
                let signs = list
                    .split(',')
                    .map(|s| s.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| ConfigError::Value {
                        key: "metric",
                        message: format!("expected 'default' or a list of +1/-1, got '{list}'"),
                    })?;
                Metric::new(chart, signs).map_err(|e| ConfigError::Value {
                    key: "metric",
                    message: e.to_string(),
                })?
            }
        };

        let t_end = get("t_end").map(|s| real("t_end", s)).transpose()?;
        let h = get("h").map(|s| real("h", s)).transpose()?.unwrap_or(1e-3);
        let output_every =
            match get("output_every") {
                None => 1,
                Some(v) => v.parse::<usize>().ok().filter(|&k| k > 0).ok_or_else(|| {
                    ConfigError::Value {
                        key: "output_every",
                        message: format!("expected a positive integer, got '{v}'"),
                    }
                })?,
            };

        let x0 = get("x0")
            .map(|list| {
                let values = list
                    .split(',')
                    .map(|s| real("x0", s))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.len() != chart.dim() {
                    return Err(ConfigError::Value {
                        key: "x0",
                        message: format!("expected {} values, got {}", chart.dim(), values.len()),
                    });
                }
                Ok(values)
            })
            .transpose()?;

        Ok(ProblemConfig {
            chart,
            a,
            b,
            lambda,
            lagrangian,
            structure,
            metric,
            integrator: Integrator {
                t_end,
                h,
                output_every,
            },
            x0,
        })
    }
}

fn key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Line {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                line,
            });
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                line,
            });
        }
    }
    Ok(out)
}

fn rational(key: &'static str, text: &str) -> Result<Rational, ConfigError> {
    let e = parse_with_limit(text, 0).map_err(|source| ConfigError::Expression { key, source })?;
    e.as_constant().ok_or_else(|| ConfigError::Value {
        key,
        message: format!("expected a rational constant, got '{text}'"),
    })
}

/// A real number, `pi`, or a product/quotient of those such as `pi/2`.
fn real(key: &'static str, text: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::Value {
        key,
        message: format!("expected a real number, got '{}'", text.trim()),
    };
    let text = text.trim();
    if text.is_empty() {
        return Err(bad());
    }
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = text;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let v = match token {
            "pi" => std::f64::consts::PI,
            "-pi" => -std::f64::consts::PI,
            t => t.parse::<f64>().map_err(|_| bad())?,
        };
        if divide {
            value /= v;
        } else {
            value *= v;
        }
        if end == rest.len() {
            break;
        }
        divide = rest[end..].starts_with('/');
        rest = &rest[end + 1..];
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}
