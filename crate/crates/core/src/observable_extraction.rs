//! Detector observables expressed on the logical input modes.
//!
//! A detector is a black box on one output mode that either clicks or does
//! not. Its click projector in the input picture is `U^dagger |d><d| U`; the
//! qutrit observable is the 3x3 block of that projector on the logical inputs.
//! Detectors carry no parameters of their own, so any two are interchangeable.
//!
//! Sign convention: a click is the `-1` outcome, so `A = I - 2P`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode_calculus::{max_norm, ModeLabel, UNITARY_TOL};
use crate::optical_elements::{network_unitary, NetworkSpec};

/// Idempotence tolerance that separates a genuine qutrit projector from a
/// detector mode mixing with ancilla inputs.
pub const LEAKAGE_TOL: f64 = 1e-9;

/// Tolerance for physical comparisons between projectors and observables.
pub const PHYSICAL_TOL: f64 = 1e-9;

pub type LogicalMatrix = Matrix3<Complex64>;
pub type LogicalState = Vector3<Complex64>;

/// Hermitian idempotent on logical modes 0, 1, 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: LogicalMatrix,
}

impl Projector {
    pub fn new(matrix: LogicalMatrix) -> Result<Self> {
        let herm = max_norm(&(matrix - matrix.adjoint()));
        if !(herm <= UNITARY_TOL) {
            return Err(Error::InvalidProjector(format!("not Hermitian ({herm:e})")));
        }
        let idem = max_norm(&(matrix * matrix - matrix));
        if !(idem <= PHYSICAL_TOL) {
            return Err(Error::InvalidProjector(format!(
                "not idempotent ({idem:e})"
            )));
        }
        let tr = matrix.trace().re;
        if (tr - tr.round()).abs() > PHYSICAL_TOL {
            return Err(Error::InvalidProjector(format!("non-integer trace {tr}")));
        }
        Ok(Self { matrix })
    }

    /// Rank-one projector `|r><r|` onto a normalized ray.
    pub fn onto(ray: &LogicalState) -> Result<Self> {
        Self::new(ray * ray.adjoint())
    }

    pub fn zero() -> Self {
        Self {
            matrix: LogicalMatrix::zeros(),
        }
    }

    pub fn identity() -> Self {
        Self {
            matrix: LogicalMatrix::identity(),
        }
    }

    pub fn matrix(&self) -> &LogicalMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round() as usize
    }

    /// Max-entry distance between two projectors.
    pub fn distance(&self, other: &Projector) -> f64 {
        max_norm(&(self.matrix - other.matrix))
    }
}

/// The +-1 observable `I - 2P` read off a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    projector: Projector,
    matrix: LogicalMatrix,
}

impl Observable {
    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn matrix(&self) -> &LogicalMatrix {
        &self.matrix
    }
}

pub fn to_observable(p: &Projector) -> Observable {
    Observable {
        matrix: LogicalMatrix::identity() - p.matrix * Complex64::new(2.0, 0.0),
        projector: p.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetectorModel {
    pub name: String,
    pub output_mode: ModeLabel,
}

impl DetectorModel {
    pub fn from_network(net: &NetworkSpec, name: &str) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            output_mode: net.detector_mode(name)?.clone(),
        })
    }
}

/// Raw pulled-back block for a detector, before any validity check.
#[derive(Debug, Clone)]
pub struct PulledBack {
    pub block: LogicalMatrix,
    /// `|B^2 - B|_max` of the block.
    pub idempotence_error: f64,
    /// Probability that a photon reaching the detector entered on an ancilla mode.
    pub ancilla_weight: f64,
}

/// Pulls the detector's click projector back through the network and slices
/// the logical block, reporting how far the block is from a projector.
pub fn pull_back(net: &NetworkSpec, detector: &str) -> Result<PulledBack> {
    let mode = net.detector_mode(detector)?;
    let u = network_unitary(net)?;
    let basis = net.basis();
    let d = basis.position(mode)?;
    // U^dagger |d><d| U has entries conj(U[d,i]) U[d,j]
    let row = u.matrix().row(d);
    let idx = net
        .logical_inputs()
        .iter()
        .map(|l| basis.position(l))
        .collect::<Result<Vec<_>>>()?;
    let amp = Vector3::from_iterator(idx.iter().map(|&i| row[i].conj()));
    let block = amp * amp.adjoint();
    let logical_weight: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
    let total_weight: f64 = row.iter().map(|z| z.norm_sqr()).sum();
    Ok(PulledBack {
        idempotence_error: max_norm(&(block * block - block)),
        ancilla_weight: (total_weight - logical_weight).max(0.0),
        block,
    })
}

/// Click projector of `detector` on logical modes 0, 1, 2.
pub fn extract_projector(net: &NetworkSpec, detector: &str) -> Result<Projector> {
    let pulled = pull_back(net, detector)?;
    if !(pulled.idempotence_error <= LEAKAGE_TOL) {
        return Err(Error::Leakage {
            detector: detector.to_string(),
            leakage: pulled.ancilla_weight,
        });
    }
    // symmetrize away rounding so the Hermitian check is exact
    let m = (pulled.block + pulled.block.adjoint()) * Complex64::new(0.5, 0.0);
    Projector::new(m)
}

/// Whether `[A, B]` vanishes to `tol`, with `|AB - BA|_max`.
pub fn commutes(a: &Observable, b: &Observable, tol: f64) -> (bool, f64) {
    let norm = max_norm(&(a.matrix * b.matrix - b.matrix * a.matrix));
    (norm <= tol, norm)
}

/// Click probability `<psi|P|psi>` for a normalized logical state.
pub fn detection_probability(state: &LogicalState, p: &Projector) -> Result<f64> {
    let norm_sqr = state.norm_squared();
    if (norm_sqr - 1.0).abs() > PHYSICAL_TOL {
        return Err(Error::Unnormalized(norm_sqr));
    }
    let value = (state.adjoint() * p.matrix * state)[(0, 0)].re;
    Ok(clamp_probability(value))
}

fn clamp_probability(value: f64) -> f64 {
    if (-UNITARY_TOL..0.0).contains(&value) {
        0.0
    } else if value > 1.0 && value <= 1.0 + UNITARY_TOL {
        1.0
    } else {
        value
    }
}
