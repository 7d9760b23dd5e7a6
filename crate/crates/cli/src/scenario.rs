//! Scenario files: what to compute, on which domain, for which field.

use std::fmt;
use std::sync::Arc;

use eulerdeg::boundary::BoundedDomain;
use eulerdeg::connection::RotorFrameField;
use eulerdeg::domain::ClosedManifold;
use eulerdeg::field::{ComplexFactor, FnField, PolynomialField, VectorField};
use eulerdeg::gbc::CurvedManifold;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub domain: DomainSpec,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub resolutions: Resolutions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    IndexSum,
    BoundaryTheorem,
    GbcIntegral,
    FlatnessScan,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IndexSum => "index-sum",
            Self::BoundaryTheorem => "boundary-theorem",
            Self::GbcIntegral => "gbc-integral",
            Self::FlatnessScan => "flatness-scan",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolutions {
    /// Multiplies every default grid and quadrature size.
    #[serde(default = "one")]
    pub scale: f64,
}

impl Default for Resolutions {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Round sphere `S^dim`; ambient fields in `R^{dim+1}` (index sums on `S²` only).
    Sphere {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    FlatTorus,
    EmbeddedTorus { major: f64, minor: f64 },
    Ball {
        dim: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Square chart, used for frame fields.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub zero: [f64; 2],
    #[serde(default)]
    pub conjugate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Polynomial(PolynomialField),
    Linear { matrix: Vec<Vec<f64>> },
    Constant { value: Vec<f64> },
    Identity {
        dim: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    PairRotation { dim: usize },
    /// `Π (z − a_k)` or `(z̄ − ā_k)` factors on `R² = C`.
    Complex { factors: Vec<FactorSpec> },
    /// Named analytic field: `sphere-rotation`, `sphere-height`,
    /// `torus-gradient`, `quaternion-square`.
    Builtin { name: String },
    /// Planar hedgehog frame with the given winding (frame field, not a vector field).
    HedgehogFrame { winding: i32 },
}

pub const BUILTIN_FIELDS: [&str; 4] = ["sphere-rotation", "sphere-height", "torus-gradient", "quaternion-square"];

impl FieldSpec {
    pub fn dim(&self) -> Result<usize, CliError> {
        Ok(match self {
            Self::Polynomial(p) => p.vars,
            Self::Linear { matrix } => matrix.len(),
            Self::Constant { value } => value.len(),
            Self::Identity { dim, .. } | Self::PairRotation { dim } => *dim,
            Self::Complex { .. } | Self::HedgehogFrame { .. } => 2,
            Self::Builtin { name } => match name.as_str() {
                "sphere-rotation" | "sphere-height" => 3,
                "torus-gradient" => 2,
                "quaternion-square" => 4,
                other => return Err(CliError::Scenario(format!("unknown builtin field `{other}`"))),
            },
        })
    }

    pub fn vector_field(&self) -> Result<Arc<dyn VectorField>, CliError> {
        let f: Arc<dyn VectorField> = match self {
            Self::Polynomial(p) => {
                p.validate()?;
                Arc::new(p.clone())
            }
            Self::Linear { matrix } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|row| row.len() != n) {
                    return Err(CliError::Scenario("linear field needs a non-empty square matrix".into()));
                }
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                Arc::new(PolynomialField::linear(&DMatrix::from_row_slice(n, n, &flat)))
            }
            Self::Constant { value } => Arc::new(PolynomialField::constant(value)),
            Self::Identity { dim, scale } => {
                Arc::new(PolynomialField::linear(&(DMatrix::identity(*dim, *dim) * *scale)))
            }
            Self::PairRotation { dim } => Arc::new(PolynomialField::pair_rotation(*dim)?),
            Self::Complex { factors } => {
                let fs: Vec<ComplexFactor> = factors
                    .iter()
                    .map(|f| {
                        let z = (f.zero[0], f.zero[1]);
                        if f.conjugate {
                            ComplexFactor::Conjugate(z)
                        } else {
                            ComplexFactor::Holomorphic(z)
                        }
                    })
                    .collect();
                Arc::new(PolynomialField::complex_product(&fs))
            }
            Self::Builtin { name } => match name.as_str() {
                "sphere-rotation" => Arc::new(PolynomialField::linear(&DMatrix::from_row_slice(
                    3,
                    3,
                    &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                ))),
                // gradient of the height z after tangential projection
                "sphere-height" => Arc::new(PolynomialField::constant(&[0.0, 0.0, 1.0])),
                "torus-gradient" => Arc::new(FnField::torus_gradient()),
                "quaternion-square" => Arc::new(PolynomialField::quaternion_square()),
                other => return Err(CliError::Scenario(format!("unknown builtin field `{other}`"))),
            },
            Self::HedgehogFrame { .. } => {
                return Err(CliError::Scenario("hedgehog-frame is a frame field, not a vector field".into()))
            }
        };
        Ok(f)
    }
}

impl DomainSpec {
    pub fn closed_manifold(&self) -> Option<ClosedManifold> {
        match self {
            Self::Sphere { dim: 2, .. } => Some(ClosedManifold::Sphere2),
            Self::FlatTorus => Some(ClosedManifold::FlatTorus),
            Self::EmbeddedTorus { major, minor } => Some(ClosedManifold::EmbeddedTorus {
                major: *major,
                minor: *minor,
            }),
            _ => None,
        }
    }

    pub fn curved_manifold(&self) -> Option<CurvedManifold> {
        match self {
            Self::Sphere { dim, radius } => Some(CurvedManifold::Sphere {
                dim: *dim,
                radius: *radius,
            }),
            Self::FlatTorus => Some(CurvedManifold::FlatTorus),
            Self::EmbeddedTorus { major, minor } => Some(CurvedManifold::EmbeddedTorus {
                major: *major,
                minor: *minor,
            }),
            _ => None,
        }
    }

    pub fn ball(&self) -> Result<Option<BoundedDomain>, CliError> {
        match self {
            Self::Ball { dim, center, radius } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; *dim]);
                if c.len() != *dim {
                    return Err(CliError::Scenario(format!("ball centre has {} coordinates, dim is {dim}", c.len())));
                }
                Ok(Some(BoundedDomain::new(c, *radius)?))
            }
            _ => Ok(None),
        }
    }

    /// Dimension a vector field on this domain must have.
    pub fn field_dim(&self) -> usize {
        match self {
            Self::Sphere { dim, .. } => dim + 1,
            Self::FlatTorus | Self::EmbeddedTorus { .. } => 2,
            Self::Ball { dim, .. } => *dim,
            Self::Box { lo, .. } => lo.len(),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Self = serde_json::from_str(text).map_err(|e| CliError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Scenario(format!("{}: {msg}", self.name)));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return bad("name must be non-empty and use [A-Za-z0-9_-]".into());
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if !(self.resolutions.scale > 0.0 && self.resolutions.scale.is_finite()) {
            return bad("resolution scale must be positive".into());
        }
        let needs_field = self.methods.iter().any(|m| *m != Method::GbcIntegral);
        if needs_field && self.field.is_none() {
            return bad("a field is required for the requested methods".into());
        }
        if let Some(field) = &self.field {
            let dim = field.dim()?;
            if dim != self.domain.field_dim() {
                return bad(format!("field has dimension {dim}, domain needs {}", self.domain.field_dim()));
            }
        }
        let hedgehog = matches!(self.field, Some(FieldSpec::HedgehogFrame { .. }));
        for m in &self.methods {
            let ok = match m {
                Method::IndexSum => {
                    !hedgehog && (self.domain.closed_manifold().is_some() || matches!(self.domain, DomainSpec::Ball { .. }))
                }
                Method::BoundaryTheorem => !hedgehog && matches!(self.domain, DomainSpec::Ball { dim: 2 | 4, .. }),
                Method::GbcIntegral => self.domain.curved_manifold().is_some(),
                Method::FlatnessScan => hedgehog && self.square_box().is_some(),
            };
            if !ok {
                return bad(format!("method {m} is not available for this domain/field"));
            }
        }
        self.domain_checks()
    }

    fn domain_checks(&self) -> Result<(), CliError> {
        self.domain.ball()?;
        if let Some(m) = self.domain.curved_manifold() {
            m.validate()?;
        }
        if let DomainSpec::Box { lo, hi } = &self.domain {
            if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                return Err(CliError::Scenario(format!("{}: box needs lo < hi on every axis", self.name)));
            }
        }
        Ok(())
    }

    /// Centre and half-width of a square 2-D box domain.
    pub fn square_box(&self) -> Option<([f64; 2], f64)> {
        match &self.domain {
            DomainSpec::Box { lo, hi } if lo.len() == 2 && hi.len() == 2 => {
                let w0 = hi[0] - lo[0];
                let w1 = hi[1] - lo[1];
                ((w0 - w1).abs() <= 1e-12 * w0.abs().max(1.0)).then(|| {
                    ([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])], 0.5 * w0)
                })
            }
            _ => None,
        }
    }

    pub fn frame_field(&self) -> Option<RotorFrameField> {
        match (&self.field, self.square_box()) {
            (Some(FieldSpec::HedgehogFrame { winding }), Some((c, hw))) => Some(RotorFrameField::hedgehog(*winding, c, hw)),
            _ => None,
        }
    }

    /// Does the scenario match a `list --filter` term (name, tag, or method)?
    pub fn matches(&self, term: &str) -> bool {
        self.name.contains(term)
            || self.tags.iter().any(|t| t == term)
            || self.methods.iter().any(|m| m.to_string().contains(term))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"schema": 1, "name": "x", "domain": {"kind": "flat-torus"}, "methods": ["gbc-integral"], "extra": 1}"#;
        assert!(matches!(Scenario::from_json(text), Err(CliError::Json { .. })));
        let nested = r#"{"schema": 1, "name": "x", "domain": {"kind": "ball", "dim": 2, "radius": 1, "rim": 3}, "methods": ["gbc-integral"]}"#;
        assert!(matches!(Scenario::from_json(nested), Err(CliError::Json { .. })));
        let poly = r#"{"schema": 1, "name": "x", "domain": {"kind": "ball", "dim": 1},
            "field": {"kind": "polynomial", "vars": 1, "components": [[[[1], 1.0]]], "junk": 0},
            "methods": ["index-sum"]}"#;
        assert!(matches!(Scenario::from_json(poly), Err(CliError::Json { .. })));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Scenario::from_json("{\n  \"schema\": 1,\n  \"name\": }").unwrap_err();
        match err {
            CliError::Json { line, column, .. } => assert_eq!((line, column), (3, 11)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = r#"{"schema": 1, "name": "x", "domain": {"kind": "flat-torus"},
            "field": {"kind": "constant", "value": [1, 0, 0]}, "methods": ["index-sum"]}"#;
        assert!(matches!(Scenario::from_json(text), Err(CliError::Scenario(_))));
    }

    #[test]
    fn method_must_fit_domain() {
        let text = r#"{"schema": 1, "name": "x", "domain": {"kind": "flat-torus"},
            "field": {"kind": "constant", "value": [1, 0]}, "methods": ["boundary-theorem"]}"#;
        assert!(matches!(Scenario::from_json(text), Err(CliError::Scenario(_))));
    }

    #[test]
    fn polynomial_field_round_trip() {
        let text = r#"{"schema": 1, "name": "p", "domain": {"kind": "ball", "dim": 2},
            "field": {"kind": "polynomial", "vars": 2, "components": [[[[2, 0], 1.0], [[0, 2], -1.0]], [[[1, 1], 2.0]]]},
            "methods": ["index-sum"]}"#;
        let s = Scenario::from_json(text).unwrap();
        let f = s.field.as_ref().unwrap().vector_field().unwrap();
        assert_eq!(f.eval(&[1.0, 2.0]), vec![-3.0, 4.0]);
    }
}
