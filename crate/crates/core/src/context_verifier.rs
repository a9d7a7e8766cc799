//! Numerical certificates that a shared detector keeps measuring the same
//! qutrit observable when its companions are retuned, that relabeling the
//! logical modes changes nothing physical, and that the mode map is linear.
//!
//! Observables are compared as projectors, so global phases picked up along
//! different element orderings never register as differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode_calculus::{apply, max_norm, AmplitudeVector};
use crate::observable_extraction::{extract_projector, LogicalMatrix, Projector, PHYSICAL_TOL};
use crate::optical_elements::{network_unitary, ElementSpec, NetworkSpec};
use num_complex::Complex64;

pub const DEFAULT_TOL: f64 = PHYSICAL_TOL;

/// Two configurations that share one detector.
#[derive(Debug, Clone)]
pub struct ContextPair {
    left: NetworkSpec,
    right: NetworkSpec,
    shared_detector: String,
}

impl ContextPair {
    pub fn new(
        left: NetworkSpec,
        right: NetworkSpec,
        shared_detector: impl Into<String>,
    ) -> Result<Self> {
        let shared_detector = shared_detector.into();
        if left.basis() != right.basis() {
            return Err(Error::BasisMismatch {
                left: left.basis().to_string(),
                right: right.basis().to_string(),
            });
        }
        if left.logical_inputs() != right.logical_inputs() {
            return Err(Error::InvalidNetwork(
                "left and right networks declare different logical inputs".into(),
            ));
        }
        left.detector_mode(&shared_detector)
            .map_err(|e| e.in_network("left"))?;
        right
            .detector_mode(&shared_detector)
            .map_err(|e| e.in_network("right"))?;
        Ok(Self {
            left,
            right,
            shared_detector,
        })
    }

    pub fn left(&self) -> &NetworkSpec {
        &self.left
    }

    pub fn right(&self) -> &NetworkSpec {
        &self.right
    }

    pub fn shared_detector(&self) -> &str {
        &self.shared_detector
    }

    pub fn swapped(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
            shared_detector: self.shared_detector.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailEntry {
    pub item: String,
    pub deviation: f64,
}

/// Outcome of a check. `passed` holds exactly when `deviation <= tolerance`;
/// `deviation` is the largest entry of `detail`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub passed: bool,
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: Vec<DetailEntry>,
}

impl VerificationReport {
    fn from_detail(check: &str, tolerance: f64, detail: Vec<DetailEntry>) -> Self {
        let deviation = detail.iter().map(|d| d.deviation).fold(0.0, f64::max);
        Self {
            check: check.to_string(),
            passed: deviation <= tolerance,
            deviation,
            tolerance,
            detail,
        }
    }
}

/// Extracts the shared detector's projector from both networks and compares.
pub fn verify_shared_observable(pair: &ContextPair, tol: f64) -> Result<VerificationReport> {
    let name = &pair.shared_detector;
    let left = extract_projector(&pair.left, name).map_err(|e| e.in_network("left"))?;
    let right = extract_projector(&pair.right, name).map_err(|e| e.in_network("right"))?;
    Ok(VerificationReport::from_detail(
        "shared_observable",
        tol,
        vec![DetailEntry {
            item: name.clone(),
            deviation: left.distance(&right),
        }],
    ))
}

/// A permutation `k -> image[k]` of logical modes 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicalPermutation([usize; 3]);

impl LogicalPermutation {
    pub fn new(image: [usize; 3]) -> Result<Self> {
        let mut sorted = image;
        sorted.sort_unstable();
        if sorted != [0, 1, 2] {
            return Err(Error::NotBijective(format!(
                "{image:?} is not a permutation of logical modes 0, 1, 2"
            )));
        }
        Ok(Self(image))
    }

    pub fn identity() -> Self {
        Self([0, 1, 2])
    }

    pub fn swap(i: usize, j: usize) -> Result<Self> {
        if i > 2 || j > 2 {
            return Err(Error::NotBijective(format!(
                "swap({i}, {j}) names a mode outside 0, 1, 2"
            )));
        }
        let mut image = [0, 1, 2];
        image.swap(i, j);
        Ok(Self(image))
    }

    pub fn image(&self) -> [usize; 3] {
        self.0
    }

    /// `S` with `S e_k = e_{image[k]}`.
    pub fn matrix(&self) -> LogicalMatrix {
        let mut s = LogicalMatrix::zeros();
        for (k, &j) in self.0.iter().enumerate() {
            s[(j, k)] = Complex64::new(1.0, 0.0);
        }
        s
    }
}

/// The network with the logical permutation applied to its input ports
/// before any other element. Logical labels stay on the same physical ports,
/// so light that entered port `k` now travels as if it had entered
/// `image[k]`.
pub fn relabeled_network(net: &NetworkSpec, perm: &LogicalPermutation) -> Result<NetworkSpec> {
    let inputs = net.logical_inputs();
    let mapping = perm
        .0
        .iter()
        .enumerate()
        .filter(|(k, j)| k != *j)
        .map(|(k, &j)| (inputs[k].clone(), inputs[j].clone()))
        .collect();
    let mut elements = Vec::with_capacity(net.elements().len() + 1);
    elements.push(ElementSpec::Relabel { mapping });
    elements.extend_from_slice(net.elements());
    net.with_elements(elements)
}

/// Undoes the relabeling on an extracted projector: `S P' S^dagger`.
pub fn conjugate_back(p_relabeled: &Projector, perm: &LogicalPermutation) -> Result<Projector> {
    let s = perm.matrix();
    Projector::new(s * p_relabeled.matrix() * s.adjoint())
}

/// For every detector, the projector of the relabeled network, conjugated
/// back, must equal the original projector.
pub fn verify_relabel_equivalence(
    net: &NetworkSpec,
    perm: &LogicalPermutation,
    tol: f64,
) -> Result<VerificationReport> {
    let relabeled = relabeled_network(net, perm)?;
    let mut detail = Vec::with_capacity(net.detectors().len());
    for name in net.detectors().keys() {
        let original = extract_projector(net, name).map_err(|e| e.in_network("original"))?;
        let moved = extract_projector(&relabeled, name).map_err(|e| e.in_network("relabeled"))?;
        detail.push(DetailEntry {
            item: name.clone(),
            deviation: conjugate_back(&moved, perm)?.distance(&original),
        });
    }
    Ok(VerificationReport::from_detail(
        "relabel_equivalence",
        tol,
        detail,
    ))
}

/// Checks `U(lambda v) = lambda U(v)` on random states and scalars, and that
/// the brightest detector does not change when the input is scaled by a
/// positive real.
///
/// The report has two entries: the largest amplitude discrepancy, and the
/// number of trials whose brightest detector moved (any nonzero count fails).
pub fn linearity_check(
    net: &NetworkSpec,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::InvalidNetwork(
            "linearity check needs at least one trial".into(),
        ));
    }
    let u = network_unitary(net)?;
    let basis = net.basis();
    let watched: Vec<usize> = if net.detectors().is_empty() {
        (0..basis.len()).collect()
    } else {
        net.detectors()
            .values()
            .map(|l| basis.position(l))
            .collect::<Result<_>>()?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut argmax_changes = 0usize;
    for _ in 0..trials {
        let v = random_amplitudes(&mut rng, basis.len());
        let v = AmplitudeVector::new(basis.clone(), v)?;
        let lambda = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let out = apply(&u, &v)?;
        let lhs = apply(&u, &v.scaled(lambda))?;
        let rhs = out.scaled(lambda);
        worst = worst.max(max_norm(&(lhs.amplitudes() - rhs.amplitudes())));

        let scale: f64 = rng.random_range(0.01..10.0);
        let scaled = apply(&u, &v.scaled(Complex64::new(scale, 0.0)))?;
        if brightest(&out, &watched) != brightest(&scaled, &watched) {
            argmax_changes += 1;
        }
    }
    Ok(VerificationReport::from_detail(
        "linearity",
        tol,
        vec![
            DetailEntry {
                item: "scaled_amplitudes".into(),
                deviation: worst,
            },
            DetailEntry {
                item: "intensity_argmax_changes".into(),
                deviation: argmax_changes as f64,
            },
        ],
    ))
}

fn brightest(v: &AmplitudeVector, watched: &[usize]) -> Option<usize> {
    let intensities = v.intensities();
    watched
        .iter()
        .copied()
        .max_by(|&a, &b| intensities[a].total_cmp(&intensities[b]).then(b.cmp(&a)))
}

fn random_amplitudes(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}
