//! Complex linear algebra over labeled optical modes.
//!
//! A mode is a spatial path paired with a polarization. Maps act on column
//! vectors of amplitudes: column `k` of a [`UnitaryMap`] is the image of basis
//! mode `k`, so an element rule written as `H -> a H + b V` reads directly as
//! the first column `(a, b)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities such as `U^dagger U = I`.
pub const UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
        }
    }
}

/// A spatial path together with a polarization, written `path.H` / `path.V`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub path: String,
    pub polarization: Polarization,
}

impl ModeLabel {
    pub fn new(path: impl Into<String>, polarization: Polarization) -> Self {
        Self {
            path: path.into(),
            polarization,
        }
    }

    pub fn h(path: impl Into<String>) -> Self {
        Self::new(path, Polarization::H)
    }

    pub fn v(path: impl Into<String>) -> Self {
        Self::new(path, Polarization::V)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.path, self.polarization.as_str())
    }
}

impl FromStr for ModeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (path, pol) = s
            .rsplit_once('.')
            .ok_or_else(|| Error::InvalidLabel(s.to_string()))?;
        if path.is_empty() {
            return Err(Error::InvalidLabel(s.to_string()));
        }
        let polarization = match pol {
            "H" => Polarization::H,
            "V" => Polarization::V,
            _ => return Err(Error::InvalidLabel(s.to_string())),
        };
        Ok(Self::new(path, polarization))
    }
}

impl Serialize for ModeLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModeLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug)]
struct BasisInner {
    labels: Vec<ModeLabel>,
    index: HashMap<ModeLabel, usize>,
}

/// Ordered, immutable set of mode labels. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct ModeBasis(Arc<BasisInner>);

impl ModeBasis {
    pub fn new(labels: Vec<ModeLabel>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
        }
        Ok(Self(Arc::new(BasisInner { labels, index })))
    }

    /// Basis with modes `p.H, p.V` for every path `p`, in the given order.
    pub fn from_paths<S: AsRef<str>>(paths: &[S]) -> Result<Self> {
        let labels = paths
            .iter()
            .flat_map(|p| [ModeLabel::h(p.as_ref()), ModeLabel::v(p.as_ref())])
            .collect();
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.labels.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.0.labels
    }

    pub fn position(&self, label: &ModeLabel) -> Result<usize> {
        self.0
            .index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &ModeLabel) -> bool {
        self.0.index.contains_key(label)
    }

    pub fn has_path(&self, path: &str) -> bool {
        self.0.labels.iter().any(|l| l.path == path)
    }

    /// Distinct paths in order of first appearance.
    pub fn paths(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for label in &self.0.labels {
            if !out.contains(&label.path.as_str()) {
                out.push(&label.path);
            }
        }
        out
    }

    fn ensure_same(&self, other: &ModeBasis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl PartialEq for ModeBasis {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.labels == other.0.labels
    }
}

impl Eq for ModeBasis {}

impl fmt::Display for ModeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, label) in self.0.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{label}")?;
        }
        Ok(())
    }
}

/// Field amplitudes over a basis. Intensity of a mode is `|amplitude|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    basis: ModeBasis,
    amplitudes: DVector<Complex64>,
}

impl AmplitudeVector {
    pub fn new(basis: ModeBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
            basis,
        })
    }

    pub fn zeros(basis: ModeBasis) -> Self {
        Self {
            amplitudes: DVector::from_element(basis.len(), ZERO),
            basis,
        }
    }

    /// Unit amplitude in a single mode.
    pub fn unit(basis: ModeBasis, label: &ModeLabel) -> Result<Self> {
        let k = basis.position(label)?;
        let mut v = Self::zeros(basis);
        v.amplitudes[k] = ONE;
        Ok(v)
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: &ModeLabel) -> Result<Complex64> {
        Ok(self.amplitudes[self.basis.position(label)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            basis: self.basis.clone(),
            amplitudes: self.amplitudes.map(|a| a * factor),
        }
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// A unitary matrix over a [`ModeBasis`], checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMap {
    basis: ModeBasis,
    matrix: DMatrix<Complex64>,
}

impl UnitaryMap {
    pub fn new(basis: ModeBasis, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = basis.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { basis, matrix })
    }

    pub fn identity(basis: ModeBasis) -> Self {
        let n = basis.len();
        Self {
            basis,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Matrix element `<row| U |col>`.
    pub fn entry(&self, row: &ModeLabel, col: &ModeLabel) -> Result<Complex64> {
        Ok(self.matrix[(self.basis.position(row)?, self.basis.position(col)?)])
    }
}

/// `max |M^dagger M - I|` over all entries.
pub fn unitarity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let n = matrix.ncols();
    max_norm(&(matrix.adjoint() * matrix - DMatrix::<Complex64>::identity(n, n)))
}

/// Largest entry modulus.
pub fn max_norm<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Sequential application: `first` acts, then `second`.
pub fn compose(first: &UnitaryMap, second: &UnitaryMap) -> Result<UnitaryMap> {
    first.basis.ensure_same(&second.basis)?;
    UnitaryMap::new(first.basis.clone(), &second.matrix * &first.matrix)
}

pub fn apply(map: &UnitaryMap, state: &AmplitudeVector) -> Result<AmplitudeVector> {
    map.basis.ensure_same(&state.basis)?;
    Ok(AmplitudeVector {
        basis: map.basis.clone(),
        amplitudes: &map.matrix * &state.amplitudes,
    })
}

/// Permutation sending mode `l` to `relabel[l]`. Labels absent from the map
/// are left in place; the completed map must be a bijection.
pub fn permutation_map(
    basis: &ModeBasis,
    relabel: &BTreeMap<ModeLabel, ModeLabel>,
) -> Result<UnitaryMap> {
    let n = basis.len();
    let mut image = (0..n).collect::<Vec<_>>();
    for (from, to) in relabel {
        let i = basis.position(from)?;
        let j = basis.position(to)?;
        image[i] = j;
    }
    let mut hit = vec![false; n];
    for (i, &j) in image.iter().enumerate() {
        if std::mem::replace(&mut hit[j], true) {
            return Err(Error::NotBijective(format!(
                "{} is the image of more than one mode (including {})",
                basis.labels()[j],
                basis.labels()[i]
            )));
        }
    }
    let mut matrix = DMatrix::from_element(n, n, ZERO);
    for (col, &row) in image.iter().enumerate() {
        matrix[(row, col)] = ONE;
    }
    UnitaryMap::new(basis.clone(), matrix)
}
