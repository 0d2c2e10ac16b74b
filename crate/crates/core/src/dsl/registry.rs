//! KPI definitions and the line-oriented `.kpi` registry format:
//!
//! ```text
//! # comment
//! kpi ebitda_margin "EBITDA margin" unit=ratio dir=higher_better cat=financial := ebitda / revenue
//! ```
//!
//! Names in an expression resolve to engine measures first, then to KPIs
//! defined on earlier lines, which are inlined.

use std::collections::HashMap;

use serde::Serialize;

use super::expr::{parse, BinOp, Expr, ParseError};
use crate::domain::string_enum;

string_enum! {
    pub enum Unit: "unit" {
        Ratio => "ratio",
        Percent => "percent",
        Days => "days",
        Count => "count",
        Money => "money",
        Minutes => "minutes",
        Score => "score",
    }
}

string_enum! {
    pub enum Direction: "direction" {
        HigherBetter => "higher_better",
        LowerBetter => "lower_better",
    }
}

string_enum! {
    pub enum KpiCategory: "category" {
        Financial => "financial",
        Operational => "operational",
        Quality => "quality",
        RevenueCycle => "revenue_cycle",
        Provider => "provider",
        Transplant => "transplant",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KpiDefinition {
    pub kpi_id: String,
    pub display_name: String,
    pub unit: Unit,
    pub direction: Direction,
    pub category: KpiCategory,
    /// The expression as written in the registry.
    #[serde(serialize_with = "serialize_display")]
    pub expression: Expr,
    /// The expression with KPI references inlined; mentions measures only.
    #[serde(skip)]
    pub resolved: Expr,
}

fn serialize_display<S: serde::Serializer>(expr: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(expr)
}

impl KpiDefinition {
    /// Numerator and denominator of a top-level quotient, if the KPI is one.
    pub fn quotient(&self) -> Option<(&Expr, &Expr)> {
        match self.resolved.unparen() {
            Expr::Binary {
                op: BinOp::Div,
                left,
                right,
            } => Some((left, right)),
            _ => None,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "kpi {} \"{}\" unit={} dir={} cat={} := {}",
            self.kpi_id,
            self.display_name,
            self.unit,
            self.direction,
            self.category,
            self.expression
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expression error: {source}")]
    Expression { line: usize, source: ParseError },
    #[error("line {line}: duplicate kpi id '{kpi_id}'")]
    Duplicate { line: usize, kpi_id: String },
    #[error("line {line}: '{name}' is neither a measure nor a previously defined kpi")]
    UnknownName { line: usize, name: String },
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    defs: Vec<KpiDefinition>,
    index: HashMap<String, usize>,
}

impl Registry {
    /// Parses registry text. `is_measure` tells which names the engine provides.
    pub fn parse(text: &str, is_measure: &dyn Fn(&str) -> bool) -> Result<Self, RegistryError> {
        let mut registry = Registry::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let parsed = parse_line(content, line)?;
            if registry.index.contains_key(&parsed.kpi_id) {
                return Err(RegistryError::Duplicate {
                    line,
                    kpi_id: parsed.kpi_id,
                });
            }
            let resolved = registry.resolve(&parsed.expression, is_measure, line)?;
            let def = KpiDefinition { resolved, ..parsed };
            registry
                .index
                .insert(def.kpi_id.clone(), registry.defs.len());
            registry.defs.push(def);
        }
        Ok(registry)
    }

    fn resolve(
        &self,
        expr: &Expr,
        is_measure: &dyn Fn(&str) -> bool,
        line: usize,
    ) -> Result<Expr, RegistryError> {
        Ok(match expr {
            Expr::Literal(_) => expr.clone(),
            Expr::Measure(name) if is_measure(name) => expr.clone(),
            Expr::Measure(name) => match self.get(name) {
                Some(def) => Expr::paren(def.resolved.clone()),
                None => {
                    return Err(RegistryError::UnknownName {
                        line,
                        name: name.clone(),
                    })
                }
            },
            Expr::Paren(inner) => Expr::paren(self.resolve(inner, is_measure, line)?),
            Expr::Binary { op, left, right } => Expr::Binary {
                op: *op,
                left: Box::new(self.resolve(left, is_measure, line)?),
                right: Box::new(self.resolve(right, is_measure, line)?),
            },
        })
    }

    pub fn get(&self, kpi_id: &str) -> Option<&KpiDefinition> {
        self.index.get(kpi_id).map(|&i| &self.defs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &KpiDefinition> {
        self.defs.iter()
    }

    pub fn by_category(&self, category: KpiCategory) -> impl Iterator<Item = &KpiDefinition> {
        self.defs.iter().filter(move |d| d.category == category)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.defs.iter().map(|d| d.to_line() + "\n").collect()
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_line(content: &str, line: usize) -> Result<KpiDefinition, RegistryError> {
    let syntax = |message: String| RegistryError::Syntax { line, message };
    let rest = content
        .strip_prefix("kpi ")
        .ok_or_else(|| syntax("expected line to start with 'kpi'".into()))?
        .trim_start();
    let (kpi_id, rest) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| syntax("missing display name".into()))?;
    if !is_identifier(kpi_id) {
        return Err(syntax(format!("invalid kpi id '{kpi_id}'")));
    }
    let rest = rest.trim_start();
    let rest = rest
        .strip_prefix('"')
        .ok_or_else(|| syntax("display name must be quoted".into()))?;
    let (display_name, rest) = rest
        .split_once('"')
        .ok_or_else(|| syntax("unterminated display name".into()))?;
    let (attrs, expression_text) = rest
        .split_once(":=")
        .ok_or_else(|| syntax("missing ':=' before expression".into()))?;

    let mut unit = None;
    let mut direction = None;
    let mut category = None;
    for attr in attrs.split_whitespace() {
        let (key, value) = attr
            .split_once('=')
            .ok_or_else(|| syntax(format!("malformed attribute '{attr}'")))?;
        let bad = |e: crate::domain::UnknownVariant| syntax(e.to_string());
        match key {
            "unit" => unit = Some(value.parse::<Unit>().map_err(bad)?),
            "dir" => direction = Some(value.parse::<Direction>().map_err(bad)?),
            "cat" => category = Some(value.parse::<KpiCategory>().map_err(bad)?),
            other => return Err(syntax(format!("unknown attribute '{other}'"))),
        }
    }
    let expression =
        parse(expression_text).map_err(|source| RegistryError::Expression { line, source })?;
    Ok(KpiDefinition {
        kpi_id: kpi_id.to_string(),
        display_name: display_name.to_string(),
        unit: unit.ok_or_else(|| syntax("missing unit=".into()))?,
        direction: direction.ok_or_else(|| syntax("missing dir=".into()))?,
        category: category.ok_or_else(|| syntax("missing cat=".into()))?,
        resolved: expression.clone(),
        expression,
    })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measures(name: &str) -> bool {
        matches!(name, "revenue" | "opex" | "cash")
    }

    #[test]
    fn parses_definitions_and_inlines_references() {
        let text = r#"
# financial
kpi ebitda "EBITDA" unit=money dir=higher_better cat=financial := revenue - opex
kpi ebitda_margin "EBITDA margin # of revenue" unit=ratio dir=higher_better cat=financial := ebitda / revenue  # trailing
"#;
        let reg = Registry::parse(text, &measures).unwrap();
        assert_eq!(reg.len(), 2);
        let margin = reg.get("ebitda_margin").unwrap();
        assert_eq!(margin.display_name, "EBITDA margin # of revenue");
        assert_eq!(margin.expression.to_string(), "ebitda / revenue");
        assert_eq!(margin.resolved.to_string(), "(revenue - opex) / revenue");
        let (num, den) = margin.quotient().unwrap();
        assert_eq!(num.to_string(), "(revenue - opex)");
        assert_eq!(den.to_string(), "revenue");
    }

    #[test]
    fn printed_registry_reparses() {
        let text =
            "kpi a \"A\" unit=count dir=higher_better cat=operational := revenue + 2 * cash\n";
        let reg = Registry::parse(text, &measures).unwrap();
        assert_eq!(reg.to_text(), text);
    }

    #[test]
    fn rejects_unknown_names_duplicates_and_bad_attrs() {
        let unknown = "kpi a \"A\" unit=count dir=higher_better cat=operational := nope";
        assert_eq!(
            Registry::parse(unknown, &measures).unwrap_err(),
            RegistryError::UnknownName {
                line: 1,
                name: "nope".into()
            }
        );
        let dup = "kpi a \"A\" unit=count dir=higher_better cat=operational := cash\n\
                   kpi a \"A\" unit=count dir=higher_better cat=operational := cash";
        assert!(matches!(
            Registry::parse(dup, &measures).unwrap_err(),
            RegistryError::Duplicate { line: 2, .. }
        ));
        let bad_unit = "kpi a \"A\" unit=furlongs dir=higher_better cat=operational := cash";
        assert!(matches!(
            Registry::parse(bad_unit, &measures).unwrap_err(),
            RegistryError::Syntax { line: 1, .. }
        ));
        let missing_dir = "kpi a \"A\" unit=count cat=operational := cash";
        assert!(Registry::parse(missing_dir, &measures).is_err());
        let bad_expr = "kpi a \"A\" unit=count dir=higher_better cat=operational := cash +";
        assert!(matches!(
            Registry::parse(bad_expr, &measures).unwrap_err(),
            RegistryError::Expression { line: 1, .. }
        ));
    }

    #[test]
    fn self_reference_is_unknown() {
        let text = "kpi loop \"L\" unit=count dir=higher_better cat=operational := loop + cash";
        assert!(matches!(
            Registry::parse(text, &measures).unwrap_err(),
            RegistryError::UnknownName { .. }
        ));
    }
}
