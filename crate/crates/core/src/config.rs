//! JSON file formats: networks, logical states and inequalities.
//!
//! Network files quote plate angles in degrees; everything inside the crate
//! works in radians.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::contextuality_oracle::{
    orthogonality_graph, CompatibilityGraph, InequalityExpression, RaySet,
};
use crate::error::{Error, Result};
use crate::mode_calculus::{ModeBasis, ModeLabel};
use crate::observable_extraction::LogicalState;
use crate::optical_elements::{ElementSpec, NetworkSpec};

/// Default tolerance for deciding that two rays are orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

pub const YU_OH_13_JSON: &str = include_str!("../data/yu_oh_13.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub paths: Vec<String>,
    pub logical_inputs: Vec<String>,
    #[serde(default)]
    pub elements: Vec<ElementFile>,
    #[serde(default)]
    pub detectors: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ElementFile {
    /// `angle` in degrees.
    Hwp {
        path: String,
        angle: f64,
    },
    Pbs {
        path_a: String,
        path_b: String,
    },
    Relabel {
        mapping: BTreeMap<String, String>,
    },
}

fn schema(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> Error {
    Error::Schema(format!("{field}: {msg}"))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Schema(format!(
            "{what} (line {}, column {}): {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn parse_network_file(path: &Path) -> Result<NetworkSpec> {
    parse_network_str(&read(path)?).map_err(|e| match e {
        Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_network_str(text: &str) -> Result<NetworkSpec> {
    let file: NetworkFile = from_json(text, "network")?;
    network_from_file(&file)
}

pub fn network_from_file(file: &NetworkFile) -> Result<NetworkSpec> {
    let basis = ModeBasis::from_paths(&file.paths).map_err(|e| schema("paths", e))?;
    let label = |field: String, text: &str| -> Result<ModeLabel> {
        let l: ModeLabel = text.parse().map_err(|e| schema(&field, e))?;
        if !basis.has_path(&l.path) {
            return Err(schema(field, format!("undeclared path {:?}", l.path)));
        }
        Ok(l)
    };
    let known_path = |field: String, p: &str| -> Result<String> {
        if basis.has_path(p) {
            Ok(p.to_string())
        } else {
            Err(schema(field, format!("undeclared path {p:?}")))
        }
    };

    if file.logical_inputs.len() != 3 {
        return Err(schema(
            "logical_inputs",
            format!(
                "expected exactly 3 modes, got {}",
                file.logical_inputs.len()
            ),
        ));
    }
    let logical = file
        .logical_inputs
        .iter()
        .enumerate()
        .map(|(k, s)| label(format!("logical_inputs[{k}]"), s))
        .collect::<Result<Vec<_>>>()?;
    let logical: [ModeLabel; 3] = logical.try_into().expect("length checked");

    let mut elements = Vec::with_capacity(file.elements.len());
    for (i, el) in file.elements.iter().enumerate() {
        let at = |f: &str| format!("elements[{i}].{f}");
        let spec = match el {
            ElementFile::Hwp { path, angle } => {
                if !angle.is_finite() {
                    return Err(schema(at("angle"), "angle must be finite"));
                }
                ElementSpec::hwp(known_path(at("path"), path)?, degrees_to_radians(*angle))
            }
            ElementFile::Pbs { path_a, path_b } => {
                if path_a == path_b {
                    return Err(schema(at("path_b"), "must differ from path_a"));
                }
                ElementSpec::pbs(
                    known_path(at("path_a"), path_a)?,
                    known_path(at("path_b"), path_b)?,
                )
            }
            ElementFile::Relabel { mapping } => {
                let mapping = mapping
                    .iter()
                    .map(|(from, to)| {
                        Ok((
                            label(at(&format!("mapping.{from}")), from)?,
                            label(at(&format!("mapping.{from}")), to)?,
                        ))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                let spec = ElementSpec::Relabel { mapping };
                spec.validate(&basis)
                    .map_err(|e| schema(at("mapping"), e))?;
                spec
            }
        };
        elements.push(spec);
    }

    let detectors = file
        .detectors
        .iter()
        .map(|(name, mode)| Ok((name.clone(), label(format!("detectors.{name}"), mode)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    NetworkSpec::new(basis, elements, detectors, logical)
}

pub fn network_to_file(net: &NetworkSpec) -> Result<NetworkFile> {
    let paths: Vec<String> = net.basis().paths().into_iter().map(String::from).collect();
    if ModeBasis::from_paths(&paths)? != *net.basis() {
        return Err(Error::Schema(
            "basis is not expressible as a list of paths with H and V modes".into(),
        ));
    }
    let elements = net
        .elements()
        .iter()
        .map(|el| match el {
            ElementSpec::Hwp { path, theta } => ElementFile::Hwp {
                path: path.clone(),
                angle: radians_to_degrees(*theta),
            },
            ElementSpec::Pbs { path_a, path_b } => ElementFile::Pbs {
                path_a: path_a.clone(),
                path_b: path_b.clone(),
            },
            ElementSpec::Relabel { mapping } => ElementFile::Relabel {
                mapping: mapping
                    .iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
            },
        })
        .collect();
    Ok(NetworkFile {
        paths,
        logical_inputs: net
            .logical_inputs()
            .iter()
            .map(ToString::to_string)
            .collect(),
        elements,
        detectors: net
            .detectors()
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect(),
    })
}

pub fn serialize_network(net: &NetworkSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(&network_to_file(net)?).expect("plain data serializes"))
}

pub fn degrees_to_radians(deg: f64) -> f64 {
    deg.to_radians()
}

/// Degrees value that converts back to exactly `rad`, when one exists within
/// a few ulps of the naive conversion.
pub fn radians_to_degrees(rad: f64) -> f64 {
    let naive = rad.to_degrees();
    let mut down = naive;
    let mut up = naive;
    for _ in 0..8 {
        if degrees_to_radians(down) == rad {
            return down;
        }
        if degrees_to_radians(up) == rad {
            return up;
        }
        down = down.next_down();
        up = up.next_up();
    }
    naive
}

/// A complex number in JSON: a bare real or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue::Pair([z.re, z.im])
    }
}

fn logical_vector(values: &[ComplexValue], field: &str) -> Result<LogicalState> {
    if values.len() != 3 {
        return Err(schema(
            field,
            format!("expected 3 components, got {}", values.len()),
        ));
    }
    Ok(LogicalState::from_iterator(
        values.iter().map(|&v| Complex64::from(v)),
    ))
}

/// Logical state file: `{"amplitudes": [a0, a1, a2]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub amplitudes: Vec<ComplexValue>,
}

pub fn parse_state_file(path: &Path) -> Result<LogicalState> {
    let file: StateFile = from_json(&read(path)?, "state")?;
    logical_vector(&file.amplitudes, "amplitudes")
}

/// An exact coefficient: an integer or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientValue {
    Integer(i64),
    Text(String),
}

impl CoefficientValue {
    fn parse(&self, field: &str) -> Result<Rational64> {
        match self {
            CoefficientValue::Integer(n) => Ok(Rational64::from_integer(*n)),
            CoefficientValue::Text(s) => parse_rational(s)
                .ok_or_else(|| schema(field, format!("{s:?} is not an integer or p/q fraction"))),
        }
    }
}

pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then(|| Rational64::new(p, q))
        }
        None => s.parse().ok().map(Rational64::from_integer),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayEntry {
    pub name: String,
    /// Need not be normalized.
    pub vector: Vec<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexCoeffs {
    Uniform(CoefficientValue),
    PerVertex(Vec<CoefficientValue>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub edge: [usize; 2],
    pub coeff: CoefficientValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeCoeffs {
    /// Applied to every edge of the orthogonality graph.
    Uniform(CoefficientValue),
    PerEdge(Vec<EdgeEntry>),
}

/// Inequality file. The compatibility graph is always recomputed from the
/// rays; edge coefficients may only sit on edges of that graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub rays: Vec<RayEntry>,
    pub vertex_coeffs: VertexCoeffs,
    pub edge_coeffs: EdgeCoeffs,
}

#[derive(Debug, Clone)]
pub struct LoadedInequality {
    pub name: String,
    pub rays: RaySet,
    pub graph: CompatibilityGraph,
    pub expr: InequalityExpression,
}

pub fn parse_inequality_file(path: &Path, orthogonality_tol: f64) -> Result<LoadedInequality> {
    parse_inequality_str(&read(path)?, orthogonality_tol)
}

pub fn parse_inequality_str(text: &str, orthogonality_tol: f64) -> Result<LoadedInequality> {
    let file: InequalityFile = from_json(text, "inequality")?;
    inequality_from_file(&file, orthogonality_tol)
}

pub fn inequality_from_file(
    file: &InequalityFile,
    orthogonality_tol: f64,
) -> Result<LoadedInequality> {
    let names = file.rays.iter().map(|r| r.name.clone()).collect();
    let vectors = file
        .rays
        .iter()
        .enumerate()
        .map(|(i, r)| logical_vector(&r.vector, &format!("rays[{i}].vector")))
        .collect::<Result<Vec<_>>>()?;
    let rays = RaySet::from_unnormalized(names, vectors)?;
    let graph = orthogonality_graph(&rays, orthogonality_tol);
    let n = rays.len();

    let vertex = match &file.vertex_coeffs {
        VertexCoeffs::Uniform(c) => vec![c.parse("vertex_coeffs")?; n],
        VertexCoeffs::PerVertex(cs) => {
            if cs.len() != n {
                return Err(schema(
                    "vertex_coeffs",
                    format!("{} coefficients for {n} rays", cs.len()),
                ));
            }
            cs.iter()
                .enumerate()
                .map(|(i, c)| c.parse(&format!("vertex_coeffs[{i}]")))
                .collect::<Result<_>>()?
        }
    };
    let edges = match &file.edge_coeffs {
        EdgeCoeffs::Uniform(c) => {
            let c = c.parse("edge_coeffs")?;
            graph.edges().iter().map(|&e| (e, c)).collect()
        }
        EdgeCoeffs::PerEdge(entries) => entries
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let [i, j] = e.edge;
                if !graph.contains(i, j) {
                    return Err(schema(
                        format!("edge_coeffs[{k}].edge"),
                        format!("rays {i} and {j} are not orthogonal"),
                    ));
                }
                Ok(((i, j), e.coeff.parse(&format!("edge_coeffs[{k}].coeff"))?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?,
    };
    let expr = InequalityExpression::new(graph.clone(), vertex, edges)?;
    Ok(LoadedInequality {
        name: file.name.clone(),
        rays,
        graph,
        expr,
    })
}

/// The bundled 13-ray state-independent inequality.
pub fn bundled_yu_oh_13() -> LoadedInequality {
    parse_inequality_str(YU_OH_13_JSON, ORTHOGONALITY_TOL).expect("bundled data is valid")
}
