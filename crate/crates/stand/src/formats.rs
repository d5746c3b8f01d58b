//! CSV and JSON dataset files.
//!
//! CSV: the first line names the features plus a `label` column; an optional
//! second line declares domains as `name:v1|v2|...`; every later line is one
//! example. Labels are `+`/`-` or `1`/`0`. Without a domain line, domains are
//! inferred from the values seen: `{0, 1}` when nothing else occurs,
//! otherwise the distinct values in sorted order.
//!
//! JSON: `{"schema": {"features": [{"name", "domain"}]}, "examples":
//! [{"values": [...], "label": 0 | 1 | null}]}`. Values may be given as
//! domain names or as indices into the domain.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use stand_core::{Dataset, Example, Feature, FeatureSchema, ValueIndex};

use crate::{Error, Result};

const LABEL: &str = "label";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            _ => Err(Error::Format(format!("cannot tell the format of {} from its extension", path.display()))),
        }
    }
}

/// Whether rows may omit their label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelPolicy {
    Required,
    /// Unlabeled pools: a missing `label` column or empty label cells are fine.
    Optional,
}

pub fn load_dataset(source: impl Read, format: Format, policy: LabelPolicy) -> Result<Dataset> {
    match format {
        Format::Csv => load_csv(source, policy, None),
        Format::Json => load_json(source, policy, None),
    }
}

/// Loads examples that must conform to an existing schema, such as a pool
/// to score with a fitted model. Domains are taken from `schema`, not
/// inferred.
pub fn load_conforming(source: impl Read, format: Format, policy: LabelPolicy, schema: &FeatureSchema) -> Result<Dataset> {
    match format {
        Format::Csv => load_csv(source, policy, Some(schema)),
        Format::Json => load_json(source, policy, Some(schema)),
    }
}

pub fn load_path(path: &Path, policy: LabelPolicy) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    load_dataset(std::io::BufReader::new(file), Format::from_path(path)?, policy)
}

pub fn load_path_conforming(path: &Path, policy: LabelPolicy, schema: &FeatureSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    load_conforming(std::io::BufReader::new(file), Format::from_path(path)?, policy, schema)
}

pub fn write_dataset(out: impl Write, data: &Dataset, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(out, data),
        Format::Json => {
            serde_json::to_writer_pretty(out, &DatasetDoc::from_dataset(data))?;
            Ok(())
        }
    }
}

fn parse_label(cell: &str) -> Option<Option<bool>> {
    match cell {
        "+" | "1" => Some(Some(true)),
        "-" | "0" => Some(Some(false)),
        "" => Some(None),
        _ => None,
    }
}

fn check_label(label: Option<bool>, policy: LabelPolicy, row: usize) -> Result<()> {
    if label.is_none() && policy == LabelPolicy::Required {
        return Err(Error::Cell { row, column: LABEL.into(), message: "missing label".into() });
    }
    Ok(())
}

fn parse_domain_line(names: &[String], cells: &[String], label_col: Option<usize>) -> Option<Vec<Vec<String>>> {
    let mut domains = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        if Some(i) == label_col {
            if !(cell.is_empty() || cell.starts_with("label:")) {
                return None;
            }
            continue;
        }
        let values = cell.strip_prefix(names[i].as_str())?.strip_prefix(':')?;
        domains.push(values.split('|').map(|v| v.trim().to_string()).collect());
    }
    Some(domains)
}

fn infer_domain(name: &str, seen: &BTreeSet<String>) -> Result<Vec<String>> {
    if seen.iter().all(|v| v == "0" || v == "1") {
        return Ok(vec!["0".into(), "1".into()]);
    }
    let numeric: Option<Vec<f64>> = seen.iter().map(|v| v.parse::<f64>().ok()).collect();
    if let Some(nums) = &numeric {
        if nums.iter().any(|x| x.fract() != 0.0) {
            return Err(Error::Format(format!(
                "feature `{name}` looks continuous; only categorical features are supported"
            )));
        }
    }
    if seen.len() < 2 {
        return Err(Error::Format(format!("feature `{name}` takes a single value; declare its domain")));
    }
    let mut domain: Vec<String> = seen.iter().cloned().collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(domain).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        domain = pairs.into_iter().map(|p| p.1).collect();
    }
    Ok(domain)
}

fn load_csv(source: impl Read, policy: LabelPolicy, fixed: Option<&FeatureSchema>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(source);
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        Some(r) => r?.iter().map(str::to_string).collect(),
        None => return Err(Error::Format("empty CSV: expected a header line".into())),
    };
    let label_col = header.iter().position(|h| h == LABEL);
    if label_col.is_none() && policy == LabelPolicy::Required {
        return Err(Error::Format("CSV has no `label` column".into()));
    }
    let names: Vec<String> = header.iter().enumerate().filter(|&(i, _)| Some(i) != label_col).map(|(_, h)| h.clone()).collect();

    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut declared = None;
    for (n, record) in records.enumerate() {
        let record = record?;
        let line = record.position().map_or(n + 2, |p| p.line() as usize);
        let cells: Vec<String> = record.iter().map(str::to_string).collect();
        if n == 0 {
            if let Some(d) = parse_domain_line(&header, &cells, label_col) {
                declared = Some(d);
                continue;
            }
        }
        rows.push((line, cells));
    }

    let feature_cells = |cells: &[String]| -> Vec<String> {
        cells.iter().enumerate().filter(|&(i, _)| Some(i) != label_col).map(|(_, c)| c.clone()).collect()
    };
    let schema = match fixed {
        Some(schema) => {
            let expected: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
            if names != expected {
                return Err(Error::Format(format!("columns {names:?} do not match the model's features {expected:?}")));
            }
            let domains: Vec<&Vec<String>> = schema.features().iter().map(|f| &f.domain).collect();
            if declared.as_ref().is_some_and(|d| d.iter().ne(domains.iter().copied())) {
                return Err(Error::Format("declared domains differ from the model's".into()));
            }
            schema.clone()
        }
        None => {
            let domains = match declared {
                Some(d) => d,
                None if rows.is_empty() => names.iter().map(|_| vec!["0".into(), "1".into()]).collect(),
                None => {
                    let mut seen = vec![BTreeSet::new(); names.len()];
                    for (line, cells) in &rows {
                        for (f, v) in feature_cells(cells).into_iter().enumerate() {
                            if v.is_empty() {
                                return Err(Error::Cell { row: *line, column: names[f].clone(), message: "missing value".into() });
                            }
                            seen[f].insert(v);
                        }
                    }
                    names.iter().zip(&seen).map(|(n, s)| infer_domain(n, s)).collect::<Result<_>>()?
                }
            };
            FeatureSchema::new(names.iter().cloned().zip(domains).map(|(n, d)| Feature::new(n, d)).collect())?
        }
    };

    let mut examples = Vec::with_capacity(rows.len());
    for (line, cells) in rows {
        let label = match label_col {
            Some(c) => parse_label(&cells[c]).ok_or_else(|| Error::Cell {
                row: line,
                column: LABEL.into(),
                message: format!("label `{}` is not one of +, -, 1, 0", cells[c]),
            })?,
            None => None,
        };
        check_label(label, policy, line)?;
        let values = feature_cells(&cells)
            .iter()
            .zip(schema.features())
            .map(|(v, f)| {
                f.value_index(v).ok_or_else(|| Error::Cell {
                    row: line,
                    column: f.name.clone(),
                    message: if v.is_empty() { "missing value".into() } else { format!("`{v}` is not in the domain") },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        examples.push(Example::new(values, label));
    }
    Ok(Dataset::new(schema, examples)?)
}

fn write_csv(out: impl Write, data: &Dataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let features = data.schema().features();
    for f in features {
        if f.domain.iter().any(|v| v.contains('|') || v.is_empty()) {
            return Err(Error::Format(format!("feature `{}` has a value that cannot be written to CSV", f.name)));
        }
    }
    w.write_record(features.iter().map(|f| f.name.as_str()).chain([LABEL]))?;
    w.write_record(features.iter().map(|f| format!("{}:{}", f.name, f.domain.join("|"))).chain([String::new()]))?;
    for e in data.examples() {
        let label = match e.label {
            Some(true) => "+",
            Some(false) => "-",
            None => "",
        };
        w.write_record(e.values.iter().zip(features).map(|(&v, f)| f.domain[v as usize].as_str()).chain([label]))?;
    }
    w.flush()?;
    Ok(())
}

fn load_json(source: impl Read, policy: LabelPolicy, fixed: Option<&FeatureSchema>) -> Result<Dataset> {
    let doc: DatasetDoc = serde_json::from_reader(source)?;
    if fixed.is_some_and(|s| *s != doc.schema) {
        return Err(Error::Format("dataset schema differs from the model's".into()));
    }
    doc.into_dataset(policy)
}

/// A feature value given either by name or by domain index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Index(ValueIndex),
    Name(String),
}

impl ValueDoc {
    fn resolve(&self, feature: &Feature) -> Option<ValueIndex> {
        match self {
            ValueDoc::Index(i) => ((*i as usize) < feature.domain.len()).then_some(*i),
            ValueDoc::Name(n) => feature.value_index(n),
        }
    }
}

/// Resolves a value list against `schema`; the error message names the
/// offending position.
pub fn resolve_values(schema: &FeatureSchema, values: &[ValueDoc]) -> std::result::Result<Vec<ValueIndex>, String> {
    if values.len() != schema.arity() {
        return Err(format!("expected {} values, got {}", schema.arity(), values.len()));
    }
    values
        .iter()
        .zip(schema.features())
        .map(|(v, f)| v.resolve(f).ok_or_else(|| format!("{v:?} is not in the domain of `{}`", f.name)))
        .collect()
}

/// Values rendered as domain names.
pub fn value_names(schema: &FeatureSchema, values: &[ValueIndex]) -> Vec<ValueDoc> {
    values.iter().zip(schema.features()).map(|(&v, f)| ValueDoc::Name(f.domain[v as usize].clone())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum LabelDoc {
    Bit(u8),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleDoc {
    pub values: Vec<ValueDoc>,
    #[serde(default)]
    label: Option<LabelDoc>,
}

impl ExampleDoc {
    pub fn label(&self) -> std::result::Result<Option<bool>, String> {
        match self.label {
            None => Ok(None),
            Some(LabelDoc::Bool(b)) => Ok(Some(b)),
            Some(LabelDoc::Bit(0)) => Ok(Some(false)),
            Some(LabelDoc::Bit(1)) => Ok(Some(true)),
            Some(LabelDoc::Bit(b)) => Err(format!("label {b} is not 0 or 1")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDoc {
    pub schema: FeatureSchema,
    #[serde(default)]
    pub examples: Vec<ExampleDoc>,
}

impl DatasetDoc {
    pub fn from_dataset(data: &Dataset) -> Self {
        let schema = data.schema().clone();
        let examples = data
            .examples()
            .iter()
            .map(|e| ExampleDoc {
                values: value_names(&schema, &e.values),
                label: e.label.map(|l| LabelDoc::Bit(u8::from(l))),
            })
            .collect();
        Self { schema, examples }
    }

    pub fn into_dataset(self, policy: LabelPolicy) -> Result<Dataset> {
        let mut examples = Vec::with_capacity(self.examples.len());
        for (i, e) in self.examples.iter().enumerate() {
            let cell = |message| Error::Cell { row: i + 1, column: "values".into(), message };
            let values = resolve_values(&self.schema, &e.values).map_err(cell)?;
            let label = e.label().map_err(|m| Error::Cell { row: i + 1, column: LABEL.into(), message: m })?;
            check_label(label, policy, i + 1)?;
            examples.push(Example::new(values, label));
        }
        Ok(Dataset::new(self.schema, examples)?)
    }
}
