//! Half-wave plates, polarizing beam splitters and relabelings, and the
//! networks built from them.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mode_calculus::{compose, permutation_map, ModeBasis, ModeLabel, UnitaryMap};

/// Amplitude picked up by the reflected (V) component at a beam splitter.
/// Any fixed phase here cancels in detector projectors.
pub const PBS_REFLECTION: Complex64 = Complex64::new(1.0, 0.0);

/// One optical element. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementSpec {
    Hwp {
        path: String,
        theta: f64,
    },
    Pbs {
        path_a: String,
        path_b: String,
    },
    Relabel {
        mapping: BTreeMap<ModeLabel, ModeLabel>,
    },
}

impl ElementSpec {
    pub fn hwp(path: impl Into<String>, theta: f64) -> Self {
        ElementSpec::Hwp {
            path: path.into(),
            theta,
        }
    }

    pub fn pbs(path_a: impl Into<String>, path_b: impl Into<String>) -> Self {
        ElementSpec::Pbs {
            path_a: path_a.into(),
            path_b: path_b.into(),
        }
    }

    /// Relabel exchanging two modes.
    pub fn swap(a: ModeLabel, b: ModeLabel) -> Self {
        ElementSpec::Relabel {
            mapping: [(a.clone(), b.clone()), (b, a)].into_iter().collect(),
        }
    }

    /// Checks the element against a basis without building its matrix.
    pub fn validate(&self, basis: &ModeBasis) -> Result<()> {
        match self {
            ElementSpec::Hwp { path, theta } => {
                if !theta.is_finite() {
                    return Err(Error::NonFiniteAngle(*theta));
                }
                require_path(basis, path)
            }
            ElementSpec::Pbs { path_a, path_b } => {
                if path_a == path_b {
                    return Err(Error::IdenticalPaths(path_a.clone()));
                }
                require_path(basis, path_a)?;
                require_path(basis, path_b)
            }
            ElementSpec::Relabel { .. } => element_to_unitary(self, basis).map(drop),
        }
    }
}

fn require_path(basis: &ModeBasis, path: &str) -> Result<()> {
    let full = basis.contains(&ModeLabel::h(path)) && basis.contains(&ModeLabel::v(path));
    if full {
        Ok(())
    } else {
        Err(Error::UnknownPath(path.to_string()))
    }
}

/// Half-wave plate at angle `theta` on `(H, V)`:
/// `H -> cos2θ H + sin2θ V`, `V -> -sin2θ H + cos2θ V`.
pub fn hwp_matrix(theta: f64) -> Result<Matrix2<Complex64>> {
    if !theta.is_finite() {
        return Err(Error::NonFiniteAngle(theta));
    }
    let (s, c) = (2.0 * theta).sin_cos();
    Ok(Matrix2::new(c, -s, s, c).map(|x| Complex64::new(x, 0.0)))
}

/// Beam splitter on `(A.H, A.V, B.H, B.V)`: H stays on its path, V crosses
/// to the other path.
pub fn pbs_matrix(path_a: &str, path_b: &str) -> Result<Matrix4<Complex64>> {
    if path_a == path_b {
        return Err(Error::IdenticalPaths(path_a.to_string()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let r = PBS_REFLECTION;
    #[rustfmt::skip]
    let m = Matrix4::new(
        one,  zero, zero, zero,
        zero, zero, zero, r,
        zero, zero, one,  zero,
        zero, r,    zero, zero,
    );
    Ok(m)
}

/// Embeds an element in `basis`, acting as identity on untouched modes.
pub fn element_to_unitary(element: &ElementSpec, basis: &ModeBasis) -> Result<UnitaryMap> {
    let n = basis.len();
    match element {
        ElementSpec::Hwp { path, theta } => {
            let block = hwp_matrix(*theta)?;
            require_path(basis, path)?;
            let idx = [
                basis.position(&ModeLabel::h(path))?,
                basis.position(&ModeLabel::v(path))?,
            ];
            UnitaryMap::new(basis.clone(), embed(n, &idx, |r, c| block[(r, c)]))
        }
        ElementSpec::Pbs { path_a, path_b } => {
            let block = pbs_matrix(path_a, path_b)?;
            require_path(basis, path_a)?;
            require_path(basis, path_b)?;
            let idx = [
                basis.position(&ModeLabel::h(path_a))?,
                basis.position(&ModeLabel::v(path_a))?,
                basis.position(&ModeLabel::h(path_b))?,
                basis.position(&ModeLabel::v(path_b))?,
            ];
            UnitaryMap::new(basis.clone(), embed(n, &idx, |r, c| block[(r, c)]))
        }
        ElementSpec::Relabel { mapping } => permutation_map(basis, mapping),
    }
}

fn embed(n: usize, idx: &[usize], block: impl Fn(usize, usize) -> Complex64) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(n, n);
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            m[(i, j)] = block(r, c);
        }
    }
    m
}

/// A mode transformer: the physical basis (ancilla modes included), the
/// elements in the order light meets them, detector placements on output
/// modes, and the three input modes that carry logical modes 0, 1, 2.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    basis: ModeBasis,
    elements: Vec<ElementSpec>,
    detectors: BTreeMap<String, ModeLabel>,
    logical_inputs: [ModeLabel; 3],
}

impl NetworkSpec {
    pub fn new(
        basis: ModeBasis,
        elements: Vec<ElementSpec>,
        detectors: BTreeMap<String, ModeLabel>,
        logical_inputs: [ModeLabel; 3],
    ) -> Result<Self> {
        for (i, element) in elements.iter().enumerate() {
            element
                .validate(&basis)
                .map_err(|e| Error::InvalidNetwork(format!("element {i}: {e}")))?;
        }
        let mut seen = BTreeSet::new();
        for (name, label) in &detectors {
            if !basis.contains(label) {
                return Err(Error::InvalidNetwork(format!(
                    "detector {name:?} sits on unknown mode {label}"
                )));
            }
            if !seen.insert(label) {
                return Err(Error::InvalidNetwork(format!(
                    "detector {name:?} shares output mode {label} with another detector"
                )));
            }
        }
        for (k, label) in logical_inputs.iter().enumerate() {
            if !basis.contains(label) {
                return Err(Error::InvalidNetwork(format!(
                    "logical input {k} is unknown mode {label}"
                )));
            }
            if logical_inputs[..k].contains(label) {
                return Err(Error::InvalidNetwork(format!(
                    "logical input {label} listed twice"
                )));
            }
        }
        Ok(Self {
            basis,
            elements,
            detectors,
            logical_inputs,
        })
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn elements(&self) -> &[ElementSpec] {
        &self.elements
    }

    pub fn detectors(&self) -> &BTreeMap<String, ModeLabel> {
        &self.detectors
    }

    pub fn detector_mode(&self, name: &str) -> Result<&ModeLabel> {
        self.detectors
            .get(name)
            .ok_or_else(|| Error::UnknownDetector(name.to_string()))
    }

    pub fn logical_inputs(&self) -> &[ModeLabel; 3] {
        &self.logical_inputs
    }

    /// Same network with different elements.
    pub fn with_elements(&self, elements: Vec<ElementSpec>) -> Result<Self> {
        Self::new(
            self.basis.clone(),
            elements,
            self.detectors.clone(),
            self.logical_inputs.clone(),
        )
    }

    /// Same network with different detector placements.
    pub fn with_detectors(&self, detectors: BTreeMap<String, ModeLabel>) -> Result<Self> {
        Self::new(
            self.basis.clone(),
            self.elements.clone(),
            detectors,
            self.logical_inputs.clone(),
        )
    }
}

/// Composes every element in list order: the first element acts first.
pub fn network_unitary(net: &NetworkSpec) -> Result<UnitaryMap> {
    net.elements
        .iter()
        .try_fold(UnitaryMap::identity(net.basis.clone()), |acc, element| {
            compose(&acc, &element_to_unitary(element, &net.basis)?)
        })
}
