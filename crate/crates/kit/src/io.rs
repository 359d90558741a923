//! JSON instance format.
//!
//! ```json
//! {"kind": "BOXQP", "n": 2,
//!  "objective": {"Q": [[0, 1], [1, 0]], "c": [0, 0]},
//!  "constraints": [{"Q": [[...]], "c": [...], "b": 1.0, "sense": "LE"}],
//!  "lb": [0, 0], "ub": [1, 1],
//!  "equalities": [{"a": [...], "d": 1.0}]}
//! ```
//!
//! Optional keys `constant` (objective offset) and `aux` (trailing
//! auxiliary variables) carry reformulated models. Infinite bounds are
//! written as `null`; a QCQP_NOBOUNDS document may omit `lb`/`ub` entirely.

use std::path::Path;

use qnr_core::instance::LinearEquality;
use qnr_core::{Matrix, ProblemKind, QcqpInstance, QuadFunc, Sense};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Instance(#[from] qnr_core::Error),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveDoc {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    c: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    c: Vec<f64>,
    b: f64,
    sense: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EqualityDoc {
    a: Vec<f64>,
    d: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    kind: String,
    n: usize,
    objective: ObjectiveDoc,
    #[serde(default)]
    constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lb: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ub: Option<Vec<Option<f64>>>,
    #[serde(default)]
    equalities: Vec<EqualityDoc>,
    #[serde(default, skip_serializing_if = "is_zero")]
    constant: f64,
    #[serde(default, skip_serializing_if = "is_zero_usize")]
    aux: usize,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_zero_usize(v: &usize) -> bool {
    *v == 0
}

fn schema(path: &str, message: impl Into<String>) -> IoError {
    IoError::Schema { path: path.to_string(), message: message.into() }
}

fn matrix(rows: &[Vec<f64>], n: usize, path: &str) -> Result<Matrix, IoError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(schema(path, format!("expected a {n}x{n} matrix")));
    }
    Ok(Matrix::from_rows(rows))
}

fn vector(v: &[f64], n: usize, path: &str) -> Result<Vec<f64>, IoError> {
    if v.len() != n {
        return Err(schema(path, format!("expected {n} entries, found {}", v.len())));
    }
    Ok(v.to_vec())
}

fn bounds(v: &Option<Vec<Option<f64>>>, n: usize, fill: f64, path: &str) -> Result<Vec<f64>, IoError> {
    match v {
        None => Ok(vec![fill; n]),
        Some(v) if v.len() == n => Ok(v.iter().map(|b| b.unwrap_or(fill)).collect()),
        Some(v) => Err(schema(path, format!("expected {n} entries, found {}", v.len()))),
    }
}

impl InstanceDoc {
    fn into_instance(self) -> Result<QcqpInstance, IoError> {
        let kind: ProblemKind = self.kind.parse().map_err(|_| schema("kind", format!("unknown kind '{}'", self.kind)))?;
        let n = self.n;
        if (self.lb.is_none() || self.ub.is_none()) && kind != ProblemKind::QcqpNoBounds {
            return Err(IoError::Instance(qnr_core::Error::InvalidInstance("bounds required".into())));
        }
        let q0 = matrix(&self.objective.q, n, "objective.Q")?;
        let objective = QuadFunc::new_strict(q0, vector(&self.objective.c, n, "objective.c")?, 0.0, Sense::Obj)?;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let q = matrix(&c.q, n, &format!("constraints[{i}].Q"))?;
            let sense: Sense = c.sense.parse().map_err(|_| schema(&format!("constraints[{i}].sense"), format!("unknown sense '{}'", c.sense)))?;
            if sense == Sense::Obj {
                return Err(schema(&format!("constraints[{i}].sense"), "a constraint cannot have sense OBJ"));
            }
            constraints.push(QuadFunc::new_strict(q, vector(&c.c, n, &format!("constraints[{i}].c"))?, c.b, sense)?);
        }
        let equalities = self
            .equalities
            .iter()
            .enumerate()
            .map(|(k, e)| Ok(LinearEquality { a: vector(&e.a, n, &format!("equalities[{k}].a"))?, d: e.d }))
            .collect::<Result<Vec<_>, IoError>>()?;
        let lb = bounds(&self.lb, n, f64::NEG_INFINITY, "lb")?;
        let ub = bounds(&self.ub, n, f64::INFINITY, "ub")?;
        let inst = QcqpInstance::new(kind, objective, constraints, lb, ub, equalities)?;
        Ok(inst.with_aux(self.aux)?.with_constant(self.constant))
    }

    fn from_instance(inst: &QcqpInstance) -> Self {
        let finite = |v: &[f64]| v.iter().map(|&b| if b.is_finite() { Some(b) } else { None }).collect::<Vec<_>>();
        let all_infinite = inst.lb.iter().chain(&inst.ub).all(|b| !b.is_finite());
        let omit = inst.kind == ProblemKind::QcqpNoBounds && all_infinite;
        Self {
            kind: inst.kind.as_str().to_string(),
            n: inst.n,
            objective: ObjectiveDoc { q: inst.objective.q.to_rows(), c: inst.objective.c.clone() },
            constraints: inst
                .constraints
                .iter()
                .map(|f| ConstraintDoc { q: f.q.to_rows(), c: f.c.clone(), b: f.b, sense: f.sense.as_str().to_string() })
                .collect(),
            lb: if omit { None } else { Some(finite(&inst.lb)) },
            ub: if omit { None } else { Some(finite(&inst.ub)) },
            equalities: inst.equalities.iter().map(|e| EqualityDoc { a: e.a.clone(), d: e.d }).collect(),
            constant: inst.obj_constant,
            aux: inst.aux,
        }
    }
}

/// Parses a JSON instance document.
pub fn parse_instance(bytes: &[u8]) -> Result<QcqpInstance, IoError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
    })?;
    doc.into_instance()
}

/// Serializes an instance as pretty-printed JSON.
pub fn serialize_instance(inst: &QcqpInstance) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&InstanceDoc::from_instance(inst)).expect("instance documents always serialize");
    out.push(b'\n');
    out
}

pub fn read_instance(path: &Path) -> Result<QcqpInstance, IoError> {
    let bytes = std::fs::read(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    parse_instance(&bytes)
}

pub fn write_instance(inst: &QcqpInstance, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, serialize_instance(inst)).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qnr_core::generators::{generate, Family, GenConfig};

    #[test]
    fn boxqp_round_trip() {
        let q = Matrix::from_rows(&[[1.0, -2.5, 0.0], [-2.5, 0.0, 3.0], [0.0, 3.0, -1.0]]);
        let inst = QcqpInstance::box_qp(q, vec![0.1, -0.2, 1.0 / 3.0]).unwrap();
        let back = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn generated_families_round_trip() {
        for family in [Family::HardStqp, Family::LcqpInq, Family::QcqpRandom, Family::BoxqpDensity] {
            let cfg = GenConfig { family, n: 6, m: 3, density: 0.5, seed: 9 };
            let inst = generate(&cfg).unwrap();
            let back = parse_instance(&serialize_instance(&inst)).unwrap();
            assert_eq!(back, inst, "{}", family.as_str());
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let doc = br#"{"kind": "BOXQP", "n": 2, "objective": {"Q": [[0, 1], [2, 0]], "c": [0, 0]},
                      "lb": [0, 0], "ub": [1, 1]}"#;
        let err = parse_instance(doc).unwrap_err().to_string();
        assert_eq!(err, "matrix not symmetric at (0,1)");
    }

    #[test]
    fn missing_bounds_rejected() {
        let doc = br#"{"kind": "QCQP", "n": 1, "objective": {"Q": [[1]], "c": [0]}, "ub": [1]}"#;
        let err = parse_instance(doc).unwrap_err().to_string();
        assert!(err.contains("bounds required"), "{err}");
    }

    #[test]
    fn unbounded_kind_may_omit_bounds() {
        let doc = br#"{"kind": "QCQP_NOBOUNDS", "n": 1, "objective": {"Q": [[2]], "c": [0]},
                      "constraints": [{"Q": [[2]], "c": [0], "b": 4, "sense": "LE"}]}"#;
        let inst = parse_instance(doc).unwrap();
        assert_eq!(inst.lb, vec![f64::NEG_INFINITY]);
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_reals_round_trip(
            vals in proptest::collection::vec(-1e12f64..1e12, 6),
            lin in proptest::collection::vec(proptest::num::f64::NORMAL, 3),
        ) {
            let q = Matrix::from_rows(&[
                [vals[0], vals[1], vals[2]],
                [vals[1], vals[3], vals[4]],
                [vals[2], vals[4], vals[5]],
            ]);
            let inst = QcqpInstance::box_qp(q, lin).unwrap();
            proptest::prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn schema_errors_carry_the_path() {
        let doc = br#"{"kind": "BOXQP", "n": 1, "objective": {"Q": [[1]], "c": ["x"]}, "lb": [0], "ub": [1]}"#;
        let err = parse_instance(doc).unwrap_err().to_string();
        assert!(err.starts_with("objective.c[0]"), "{err}");
    }
}
