//! Typed access to a TOML document that records every violation instead of
//! stopping at the first.

use toml::{Table, Value};

use crate::units::{parse_quantity, Dim};

pub(crate) struct Reader<'a> {
    root: &'a Table,
    pub(crate) errors: Vec<String>,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(root: &'a Table) -> Self {
        Self {
            root,
            errors: Vec::new(),
        }
    }

    pub(crate) fn error(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    /// The table `name`, checked for unknown keys. Absent sections read as
    /// empty.
    pub(crate) fn section(&mut self, name: &'static str, allowed: &[&str]) -> Section<'a> {
        let table = match self.root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.error(name, "expected a table");
                None
            }
        };
        if let Some(t) = table {
            for k in t.keys().filter(|k| !allowed.contains(&k.as_str())) {
                self.errors.push(format!("{name}.{k}: unknown key"));
            }
        }
        Section { name, table }
    }

    pub(crate) fn root_value(&self, key: &str) -> Option<&'a Value> {
        self.root.get(key)
    }
}

#[derive(Clone, Copy)]
pub(crate) struct Section<'a> {
    pub(crate) name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    pub(crate) fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn parse_one(&self, r: &mut Reader, key: &str, v: &Value, dim: Dim) -> Option<f64> {
        match v {
            Value::String(s) => match parse_quantity(s, dim) {
                Ok(x) => Some(x),
                Err(e) => {
                    r.error(&self.path(key), e);
                    None
                }
            },
            Value::Integer(_) | Value::Float(_) => {
                r.error(
                    &self.path(key),
                    format!("missing unit; write e.g. \"{v} <unit>\" with a {dim}"),
                );
                None
            }
            _ => {
                r.error(
                    &self.path(key),
                    format!("expected a quoted quantity with a {dim}"),
                );
                None
            }
        }
    }

    /// Unit-carrying quantity in SI.
    pub(crate) fn quantity(&self, r: &mut Reader, key: &str, dim: Dim, default: f64) -> f64 {
        match self.get(key) {
            None => default,
            Some(v) => self.parse_one(r, key, v, dim).unwrap_or(default),
        }
    }

    pub(crate) fn opt_quantity(&self, r: &mut Reader, key: &str, dim: Dim) -> Option<f64> {
        self.get(key).and_then(|v| self.parse_one(r, key, v, dim))
    }

    pub(crate) fn quantities(
        &self,
        r: &mut Reader,
        key: &str,
        dim: Dim,
        default: &[f64],
    ) -> Vec<f64> {
        match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items
                .iter()
                .filter_map(|v| self.parse_one(r, key, v, dim))
                .collect(),
            Some(_) => {
                r.error(&self.path(key), "expected an array of quantities");
                default.to_vec()
            }
        }
    }

    /// Dimensionless number.
    pub(crate) fn number(&self, r: &mut Reader, key: &str, default: f64) -> f64 {
        match self.get(key) {
            None => default,
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(_) => {
                r.error(&self.path(key), "expected a number");
                default
            }
        }
    }

    pub(crate) fn opt_number(&self, r: &mut Reader, key: &str) -> Option<f64> {
        self.get(key).map(|_| self.number(r, key, f64::NAN))
    }

    pub(crate) fn numbers(&self, r: &mut Reader, key: &str, default: &[f64]) -> Vec<f64> {
        match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for v in items {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(i) => out.push(*i as f64),
                        _ => r.error(&self.path(key), "expected an array of numbers"),
                    }
                }
                out
            }
            Some(_) => {
                r.error(&self.path(key), "expected an array of numbers");
                default.to_vec()
            }
        }
    }

    pub(crate) fn integer(&self, r: &mut Reader, key: &str, default: u64) -> u64 {
        match self.get(key) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(Value::Float(x)) if *x >= 0.0 && x.fract() == 0.0 && *x < 9.0e15 => *x as u64,
            Some(_) => {
                r.error(&self.path(key), "expected a non-negative integer");
                default
            }
        }
    }

    pub(crate) fn integers(&self, r: &mut Reader, key: &str, default: &[u64]) -> Vec<u64> {
        match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items
                .iter()
                .filter_map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Some(*i as u64),
                    _ => {
                        r.error(
                            &self.path(key),
                            "expected an array of non-negative integers",
                        );
                        None
                    }
                })
                .collect(),
            Some(_) => {
                r.error(&self.path(key), "expected an array of integers");
                default.to_vec()
            }
        }
    }

    pub(crate) fn boolean(&self, r: &mut Reader, key: &str, default: bool) -> bool {
        match self.get(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                r.error(&self.path(key), "expected true or false");
                default
            }
        }
    }

    pub(crate) fn string(&self, r: &mut Reader, key: &str, default: &str) -> String {
        match self.get(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                r.error(&self.path(key), "expected a string");
                default.to_string()
            }
        }
    }
}
