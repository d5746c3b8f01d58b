//! Feature schemas, literals, examples and labeled datasets.
//!
//! Values are stored as indices into each feature's domain. Sample indices
//! are positions in [`Dataset::examples`]; tree node caching relies on them
//! never changing, so datasets only ever grow by appending.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Index of a value inside a feature's domain.
pub type ValueIndex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub domain: Vec<String>,
}

impl Feature {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Self {
        Self { name: name.into(), domain }
    }

    /// A two-valued feature with domain `["0", "1"]`.
    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, alloc::vec![String::from("0"), String::from("1")])
    }

    pub fn is_binary(&self) -> bool {
        self.domain.len() == 2
    }

    pub fn value_index(&self, value: &str) -> Option<ValueIndex> {
        self.domain.iter().position(|v| v == value).map(|i| i as ValueIndex)
    }
}

/// Ordered list of categorical features. Indices are stable identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSchema {
    features: Vec<Feature>,
}

impl<'de> Deserialize<'de> for FeatureSchema {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            features: Vec<Feature>,
        }
        let raw = Raw::deserialize(deserializer)?;
        FeatureSchema::new(raw.features).map_err(serde::de::Error::custom)
    }
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        for (i, f) in features.iter().enumerate() {
            if f.domain.len() < 2 {
                return Err(Error::Schema(format!(
                    "feature `{}` needs at least two domain values",
                    f.name
                )));
            }
            if features[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
            }
            for (j, v) in f.domain.iter().enumerate() {
                if f.domain[..j].contains(v) {
                    return Err(Error::Schema(format!(
                        "feature `{}` lists value `{v}` twice",
                        f.name
                    )));
                }
            }
        }
        Ok(Self { features })
    }

    /// `n` binary features named `X1..Xn`.
    pub fn binary(n: usize) -> Self {
        let features = (1..=n).map(|i| Feature::binary(format!("X{i}"))).collect();
        Self { features }
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn arity(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, index: usize) -> Option<&Feature> {
        self.features.get(index)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn check_values(&self, values: &[ValueIndex]) -> core::result::Result<(), String> {
        if values.len() != self.arity() {
            return Err(format!("expected {} values, got {}", self.arity(), values.len()));
        }
        for (f, &v) in self.features.iter().zip(values) {
            if v as usize >= f.domain.len() {
                return Err(format!("value index {v} outside the domain of `{}`", f.name));
            }
        }
        Ok(())
    }

    pub fn check_literal(&self, lit: &Literal) -> Result<()> {
        let feature = self.feature(lit.feature).ok_or(Error::FeatureOutOfRange {
            index: lit.feature,
            arity: self.arity(),
        })?;
        if lit.value as usize >= feature.domain.len() {
            return Err(Error::Schema(format!(
                "value index {} outside the domain of `{}`",
                lit.value, feature.name
            )));
        }
        Ok(())
    }

    /// The complementary literal. On binary features the negation is written
    /// as an equality on the other value, so `X4 != 1` and `X4 = 0` are the
    /// same literal.
    pub fn negate(&self, lit: &Literal) -> Literal {
        let binary = self.features[lit.feature].is_binary();
        match (lit.polarity, binary) {
            (Polarity::Eq, true) => Literal::eq(lit.feature, 1 - lit.value),
            (Polarity::Ne, true) => Literal::eq(lit.feature, lit.value),
            (Polarity::Eq, false) => Literal::ne(lit.feature, lit.value),
            (Polarity::Ne, false) => Literal::eq(lit.feature, lit.value),
        }
    }

    /// Normal form of a literal: binary inequalities become equalities.
    pub fn normalize(&self, lit: Literal) -> Literal {
        if lit.polarity == Polarity::Ne && self.features[lit.feature].is_binary() {
            Literal::eq(lit.feature, 1 - lit.value)
        } else {
            lit
        }
    }

    /// Every one-vs-rest split as `(literal, negation)`, in feature order then
    /// value order. Binary features contribute a single split on their second
    /// value.
    pub fn splits(&self) -> Vec<(Literal, Literal)> {
        let mut out = Vec::new();
        for (i, f) in self.features.iter().enumerate() {
            if f.is_binary() {
                out.push((Literal::eq(i, 1), Literal::eq(i, 0)));
            } else {
                for v in 0..f.domain.len() as ValueIndex {
                    out.push((Literal::eq(i, v), Literal::ne(i, v)));
                }
            }
        }
        out
    }

    pub fn display<'a>(&'a self, lit: &'a Literal) -> LiteralDisplay<'a> {
        LiteralDisplay { schema: self, lit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Eq,
    Ne,
}

/// A single feature test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub feature: usize,
    pub value: ValueIndex,
    pub polarity: Polarity,
}

impl Literal {
    pub const fn eq(feature: usize, value: ValueIndex) -> Self {
        Self { feature, value, polarity: Polarity::Eq }
    }

    pub const fn ne(feature: usize, value: ValueIndex) -> Self {
        Self { feature, value, polarity: Polarity::Ne }
    }

    /// Evaluates the test on a conforming value vector.
    #[inline]
    pub fn holds(&self, values: &[ValueIndex]) -> bool {
        (values[self.feature] == self.value) == (self.polarity == Polarity::Eq)
    }
}

pub struct LiteralDisplay<'a> {
    schema: &'a FeatureSchema,
    lit: &'a Literal,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let feature = &self.schema.features[self.lit.feature];
        let value = &feature.domain[self.lit.value as usize];
        match self.lit.polarity {
            Polarity::Eq => write!(f, "{}={}", feature.name, value),
            Polarity::Ne => write!(f, "{}!={}", feature.name, value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Example {
    pub values: Vec<ValueIndex>,
    pub label: Option<bool>,
}

impl Example {
    pub fn new(values: Vec<ValueIndex>, label: Option<bool>) -> Self {
        Self { values, label }
    }

    pub fn labeled(values: Vec<ValueIndex>, label: bool) -> Self {
        Self { values, label: Some(label) }
    }

    pub fn unlabeled(values: Vec<ValueIndex>) -> Self {
        Self { values, label: None }
    }
}

/// Checked literal evaluation.
pub fn satisfies(schema: &FeatureSchema, x: &Example, lit: &Literal) -> Result<bool> {
    schema.check_literal(lit)?;
    if x.values.len() != schema.arity() {
        return Err(Error::SchemaMismatch {
            row: 0,
            reason: format!("expected {} values, got {}", schema.arity(), x.values.len()),
        });
    }
    Ok(lit.holds(&x.values))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dataset {
    schema: FeatureSchema,
    examples: Vec<Example>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, examples: Vec<Example>) -> Result<Self> {
        for (row, x) in examples.iter().enumerate() {
            schema
                .check_values(&x.values)
                .map_err(|reason| Error::SchemaMismatch { row, reason })?;
        }
        Ok(Self { schema, examples })
    }

    pub fn empty(schema: FeatureSchema) -> Self {
        Self { schema, examples: Vec::new() }
    }

    /// Builds a binary dataset from `(bits, label)` rows; features are `X1..Xn`.
    pub fn from_bits(rows: &[(&[u8], bool)]) -> Result<Self> {
        let arity = rows.first().map_or(0, |r| r.0.len());
        let examples = rows
            .iter()
            .map(|(bits, label)| {
                Example::labeled(bits.iter().map(|&b| ValueIndex::from(b)).collect(), *label)
            })
            .collect();
        Self::new(FeatureSchema::binary(arity), examples)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn values(&self, index: u32) -> &[ValueIndex] {
        &self.examples[index as usize].values
    }

    pub fn label(&self, index: u32) -> Option<bool> {
        self.examples[index as usize].label
    }

    /// Appends examples, leaving existing sample indices untouched.
    pub fn extend(&mut self, new_examples: &[Example]) -> Result<()> {
        let base = self.examples.len();
        for (i, x) in new_examples.iter().enumerate() {
            self.schema
                .check_values(&x.values)
                .map_err(|reason| Error::SchemaMismatch { row: base + i, reason })?;
        }
        self.examples.extend_from_slice(new_examples);
        Ok(())
    }

    pub fn push(&mut self, x: Example) -> Result<()> {
        self.extend(core::slice::from_ref(&x))
    }

    pub fn require_labels(&self) -> Result<()> {
        match self.examples.iter().position(|x| x.label.is_none()) {
            Some(i) => Err(Error::Unlabeled(i)),
            None => Ok(()),
        }
    }
}

/// A disjunction of conjunctions of literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Dnf(pub Vec<Vec<Literal>>);

impl Dnf {
    pub fn conjunctions(&self) -> &[Vec<Literal>] {
        &self.0
    }

    pub fn eval(&self, values: &[ValueIndex]) -> bool {
        self.0.iter().any(|c| c.iter().all(|l| l.holds(values)))
    }

    /// Renders as `OR(AND(X4=1,X2=1), AND(X4=0))`.
    pub fn display<'a>(&'a self, schema: &'a FeatureSchema) -> DnfDisplay<'a> {
        DnfDisplay { schema, dnf: self }
    }
}

pub struct DnfDisplay<'a> {
    schema: &'a FeatureSchema,
    dnf: &'a Dnf,
}

impl fmt::Display for DnfDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OR(")?;
        for (i, conj) in self.dnf.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("AND(")?;
            for (j, lit) in conj.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", self.schema.display(lit))?;
            }
            f.write_str(")")?;
        }
        f.write_str(")")
    }
}
