//! Counterfactual treatment variants of a resume.
//!
//! Each resume yields one variant per attribute value (plus an optional
//! neutral one). The resume text is carried unmodified; the only difference
//! between variants is the `counterfactual_info` line ("Gender: Female",
//! "Home Distance: Close", ...) that the prompt template injects ahead of the
//! resume body. Keeping the body byte-identical across treatments is what
//! makes the design causal: any score difference is attributable to the
//! injected line alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Resume;

#[derive(Debug, Error)]
pub enum CounterfactualError {
    #[error("attribute name is empty")]
    EmptyAttributeName,
    #[error("attribute values must contain 1 or 2 entries, got {0}")]
    BadValueCount(usize),
    #[error("attribute value is empty")]
    EmptyValue,
    #[error("attribute values are not distinct: `{0}`")]
    DuplicateValue(String),
    #[error("attribute value `Neutral` collides with the neutral treatment label")]
    ReservedValue,
}

/// A binary (or unary) attribute to inject, e.g. Gender with values
/// [Female, Male]. Value order is meaningful: downstream gaps are reported as
/// rank(second value) minus rank(first value).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub attribute_name: String,
    pub values: Vec<String>,
    pub include_neutral: bool,
}

impl AttributeSpec {
    pub fn new(
        attribute_name: impl Into<String>,
        values: Vec<String>,
        include_neutral: bool,
    ) -> Result<Self, CounterfactualError> {
        let attribute_name = attribute_name.into();
        if attribute_name.trim().is_empty() {
            return Err(CounterfactualError::EmptyAttributeName);
        }
        if values.is_empty() || values.len() > 2 {
            return Err(CounterfactualError::BadValueCount(values.len()));
        }
        for v in &values {
            if v.trim().is_empty() {
                return Err(CounterfactualError::EmptyValue);
            }
            if v == Treatment::NEUTRAL_LABEL {
                return Err(CounterfactualError::ReservedValue);
            }
        }
        if values.len() == 2 && values[0] == values[1] {
            return Err(CounterfactualError::DuplicateValue(values[0].clone()));
        }
        Ok(AttributeSpec {
            attribute_name,
            values,
            include_neutral,
        })
    }

    /// The standard three-way gender design: Female, Male, and a neutral
    /// variant with no injected line.
    pub fn gender() -> Self {
        AttributeSpec::new(
            "Gender",
            vec!["Female".to_string(), "Male".to_string()],
            true,
        )
        .expect("gender spec is valid")
    }

    /// All treatments this spec produces, neutral last.
    pub fn treatments(&self) -> Vec<Treatment> {
        let mut out: Vec<Treatment> = self.values.iter().map(|v| Treatment::value(v)).collect();
        if self.include_neutral {
            out.push(Treatment::Neutral);
        }
        out
    }
}

/// One arm of the counterfactual design: a specific attribute value, or the
/// neutral arm with nothing injected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Treatment {
    Neutral,
    Value(String),
}

impl Treatment {
    pub const NEUTRAL_LABEL: &'static str = "Neutral";

    pub fn value(v: impl Into<String>) -> Self {
        Treatment::Value(v.into())
    }

    pub fn label(&self) -> &str {
        match self {
            Treatment::Neutral => Self::NEUTRAL_LABEL,
            Treatment::Value(v) => v,
        }
    }

    pub fn from_label(label: &str) -> Self {
        if label == Self::NEUTRAL_LABEL {
            Treatment::Neutral
        } else {
            Treatment::Value(label.to_string())
        }
    }

    pub fn is_neutral(&self) -> bool {
        matches!(self, Treatment::Neutral)
    }
}

impl std::fmt::Display for Treatment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Treatment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Treatment {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Ok(Treatment::from_label(&raw))
    }
}

/// A scoring unit: one resume body (possibly truncated) under one treatment
/// at one retention proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub resume_id: String,
    pub treatment: Treatment,
    /// "<attribute>: <value>" for treated arms, empty for neutral.
    pub counterfactual_info: String,
    pub proportion: f64,
    pub text: String,
}

impl Variant {
    fn build(spec: &AttributeSpec, resume_id: &str, proportion: f64, text: &str) -> Vec<Variant> {
        spec.treatments()
            .into_iter()
            .map(|treatment| {
                let counterfactual_info = match &treatment {
                    Treatment::Neutral => String::new(),
                    Treatment::Value(v) => format!("{}: {}", spec.attribute_name, v),
                };
                Variant {
                    resume_id: resume_id.to_string(),
                    treatment,
                    counterfactual_info,
                    proportion,
                    text: text.to_string(),
                }
            })
            .collect()
    }
}

/// Variants of the full resume text (proportion 1.0).
pub fn make_variants(resume: &Resume, spec: &AttributeSpec) -> Vec<Variant> {
    Variant::build(spec, &resume.id, 1.0, &resume.text)
}

/// Variants of an already-truncated body. All treatments share the same text;
/// callers must pass the same truncation output for every arm.
pub fn make_variants_from_text(
    resume_id: &str,
    text: &str,
    proportion: f64,
    spec: &AttributeSpec,
) -> Vec<Variant> {
    Variant::build(spec, resume_id, proportion, text)
}
