//! Noncontextuality inequalities over qutrit rays.
//!
//! An expression `sum_i v_i <A_i> + sum_(i,j) e_ij <A_i A_j>` lives on a
//! compatibility graph whose edges join orthogonal rays. Its classical
//! (noncontextual) bound is the maximum over all deterministic `+-1`
//! assignments, found by exhaustive enumeration in exact integer arithmetic.
//! Its quantum value uses `A_i = I - 2 |r_i><r_i|`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Vector3;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode_calculus::max_norm;
use crate::observable_extraction::{
    commutes, to_observable, LogicalMatrix, LogicalState, Observable, Projector, PHYSICAL_TOL,
};

/// Largest vertex count accepted by the enumeration.
pub const MAX_ENUMERATION_VERTICES: usize = 30;

/// Default seed for state scans.
pub const DEFAULT_SEED: u64 = 7;

/// Normalization tolerance for rays.
pub const RAY_TOL: f64 = 1e-12;

/// Low bits of the assignment index swept sequentially (Gray code) inside
/// one parallel chunk.
const SWEEP_BITS: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct RaySet {
    names: Vec<String>,
    rays: Vec<LogicalState>,
}

impl RaySet {
    pub fn new(names: Vec<String>, rays: Vec<LogicalState>) -> Result<Self> {
        if names.len() != rays.len() {
            return Err(Error::InvalidRays(format!(
                "{} names for {} rays",
                names.len(),
                rays.len()
            )));
        }
        for (name, ray) in names.iter().zip(&rays) {
            let norm = ray.norm();
            if !((norm - 1.0).abs() <= RAY_TOL) {
                return Err(Error::InvalidRays(format!("ray {name:?} has norm {norm}")));
            }
        }
        Ok(Self { names, rays })
    }

    /// Normalizes each vector first; zero vectors are rejected.
    pub fn from_unnormalized(names: Vec<String>, vectors: Vec<LogicalState>) -> Result<Self> {
        let rays = names
            .iter()
            .zip(vectors)
            .map(|(name, v)| {
                let norm = v.norm();
                if norm == 0.0 || !norm.is_finite() {
                    Err(Error::InvalidRays(format!(
                        "ray {name:?} cannot be normalized"
                    )))
                } else {
                    Ok(v.unscale(norm))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, rays)
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rays(&self) -> &[LogicalState] {
        &self.rays
    }

    pub fn observables(&self) -> Result<Vec<Observable>> {
        self.rays
            .iter()
            .map(|r| Projector::onto(r).map(|p| to_observable(&p)))
            .collect()
    }
}

/// Undirected simple graph; edges are stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatibilityGraph {
    vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CompatibilityGraph {
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidInequality(format!("self-loop at vertex {i}")));
            }
            if i >= vertices || j >= vertices {
                return Err(Error::InvalidInequality(format!(
                    "edge ({i}, {j}) outside {vertices} vertices"
                )));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self {
            vertices,
            edges: set,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }
}

/// Edge `(i, j)` iff `|<r_i|r_j>| <= tol`.
pub fn orthogonality_graph(rays: &RaySet, tol: f64) -> CompatibilityGraph {
    let n = rays.len();
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| rays.rays[i].dotc(&rays.rays[j]).norm() <= tol);
    CompatibilityGraph::new(n, edges).expect("pairs are in range and distinct")
}

/// Linear form over `<A_i>` and `<A_i A_j>` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityExpression {
    graph: CompatibilityGraph,
    vertex_coeffs: Vec<Rational64>,
    edge_coeffs: BTreeMap<(usize, usize), Rational64>,
}

impl InequalityExpression {
    pub fn new(
        graph: CompatibilityGraph,
        vertex_coeffs: Vec<Rational64>,
        edge_coeffs: BTreeMap<(usize, usize), Rational64>,
    ) -> Result<Self> {
        if vertex_coeffs.len() != graph.vertex_count() {
            return Err(Error::InvalidInequality(format!(
                "{} vertex coefficients for {} vertices",
                vertex_coeffs.len(),
                graph.vertex_count()
            )));
        }
        let mut normalized = BTreeMap::new();
        for (&(i, j), &c) in &edge_coeffs {
            if !graph.contains(i, j) {
                return Err(Error::InvalidInequality(format!(
                    "coefficient on ({i}, {j}), which is not a graph edge"
                )));
            }
            if normalized.insert((i.min(j), i.max(j)), c).is_some() {
                return Err(Error::InvalidInequality(format!(
                    "edge ({i}, {j}) has two coefficients"
                )));
            }
        }
        Ok(Self {
            graph,
            vertex_coeffs,
            edge_coeffs: normalized,
        })
    }

    /// Same coefficient on every vertex and on every edge of the graph.
    pub fn uniform(graph: CompatibilityGraph, vertex: Rational64, edge: Rational64) -> Self {
        let vertex_coeffs = vec![vertex; graph.vertex_count()];
        let edge_coeffs = graph.edges.iter().map(|&e| (e, edge)).collect();
        Self {
            graph,
            vertex_coeffs,
            edge_coeffs,
        }
    }

    pub fn graph(&self) -> &CompatibilityGraph {
        &self.graph
    }

    pub fn vertex_coeffs(&self) -> &[Rational64] {
        &self.vertex_coeffs
    }

    pub fn edge_coeffs(&self) -> &BTreeMap<(usize, usize), Rational64> {
        &self.edge_coeffs
    }

    pub fn negated(&self) -> Self {
        Self {
            graph: self.graph.clone(),
            vertex_coeffs: self.vertex_coeffs.iter().map(|c| -c).collect(),
            edge_coeffs: self.edge_coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }

    /// Exact value at a `+-1` assignment.
    pub fn evaluate(&self, assignment: &[i8]) -> Rational64 {
        let a = |i: usize| Rational64::from_integer(assignment[i] as i64);
        let vertex: Rational64 = self
            .vertex_coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * a(i))
            .sum();
        let edge: Rational64 = self
            .edge_coeffs
            .iter()
            .map(|(&(i, j), c)| c * a(i) * a(j))
            .sum();
        vertex + edge
    }

    /// Common denominator and the coefficients multiplied by it.
    fn scaled(&self) -> Result<ScaledCoeffs> {
        let scale = self
            .vertex_coeffs
            .iter()
            .chain(self.edge_coeffs.values())
            .fold(1i64, |acc, c| acc.lcm(c.denom()));
        let to_int = |c: &Rational64| -> Result<i64> {
            c.numer()
                .checked_mul(scale / c.denom())
                .ok_or(Error::CoefficientOverflow)
        };
        let vertex = self
            .vertex_coeffs
            .iter()
            .map(to_int)
            .collect::<Result<_>>()?;
        let edges = self
            .edge_coeffs
            .iter()
            .map(|(&(i, j), c)| Ok((i, j, to_int(c)?)))
            .collect::<Result<_>>()?;
        Ok(ScaledCoeffs {
            scale,
            vertex,
            edges,
        })
    }
}

struct ScaledCoeffs {
    scale: i64,
    vertex: Vec<i64>,
    edges: Vec<(usize, usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalBound {
    pub bound: Rational64,
    /// Maximizing assignment; among ties, the one with the smallest index
    /// when `-1` at vertex `i` is read as bit `i`.
    pub assignment: Vec<i8>,
    /// Common denominator the coefficients were multiplied by.
    pub scale: i64,
    /// `bound * scale`, the integer maximum actually enumerated.
    pub scaled_bound: i128,
}

/// Maximum of the expression over all `2^n` deterministic assignments.
pub fn classical_bound_bruteforce(expr: &InequalityExpression) -> Result<ClassicalBound> {
    let n = expr.graph.vertex_count();
    if n > MAX_ENUMERATION_VERTICES {
        return Err(Error::TooManyVertices(n));
    }
    let ScaledCoeffs {
        scale,
        vertex,
        edges,
    } = expr.scaled()?;
    let mut adjacency: Vec<Vec<(usize, i128)>> = vec![Vec::new(); n];
    for &(i, j, c) in &edges {
        adjacency[i].push((j, c as i128));
        adjacency[j].push((i, c as i128));
    }
    let vertex: Vec<i128> = vertex.into_iter().map(i128::from).collect();
    let edges: Vec<(usize, usize, i128)> = edges
        .into_iter()
        .map(|(i, j, c)| (i, j, c as i128))
        .collect();

    let sweep = n.min(SWEEP_BITS);
    let chunks = 1u64 << (n - sweep);
    let (best_value, best_bits) = (0..chunks)
        .into_par_iter()
        .map(|chunk| best_in_chunk(chunk << sweep, sweep, n, &vertex, &edges, &adjacency))
        .reduce(|| (i128::MIN, u64::MAX), better);

    let assignment = (0..n)
        .map(|i| if best_bits >> i & 1 == 1 { -1 } else { 1 })
        .collect();
    Ok(ClassicalBound {
        bound: Rational64::new(
            i64::try_from(best_value).map_err(|_| Error::CoefficientOverflow)?,
            scale,
        ),
        assignment,
        scale,
        scaled_bound: best_value,
    })
}

/// Minimum over all assignments, as `-max(-expr)`.
pub fn classical_minimum_bruteforce(expr: &InequalityExpression) -> Result<ClassicalBound> {
    let mut b = classical_bound_bruteforce(&expr.negated())?;
    b.bound = -b.bound;
    b.scaled_bound = -b.scaled_bound;
    Ok(b)
}

fn better(a: (i128, u64), b: (i128, u64)) -> (i128, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn sign(bits: u64, i: usize) -> i128 {
    if bits >> i & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Sweeps the low `sweep` bits of `base` in Gray-code order, updating the
/// value incrementally on each single flip.
fn best_in_chunk(
    base: u64,
    sweep: usize,
    n: usize,
    vertex: &[i128],
    edges: &[(usize, usize, i128)],
    adjacency: &[Vec<(usize, i128)>],
) -> (i128, u64) {
    let mut bits = base;
    let mut value: i128 = (0..n).map(|i| vertex[i] * sign(bits, i)).sum::<i128>()
        + edges
            .iter()
            .map(|&(i, j, c)| c * sign(bits, i) * sign(bits, j))
            .sum::<i128>();
    let mut best = (value, bits);
    for step in 1u64..(1u64 << sweep) {
        let flip = step.trailing_zeros() as usize;
        let s = sign(bits, flip);
        let local = vertex[flip]
            + adjacency[flip]
                .iter()
                .map(|&(j, c)| c * sign(bits, j))
                .sum::<i128>();
        value -= 2 * s * local;
        bits ^= 1 << flip;
        best = better(best, (value, bits));
    }
    best
}

/// Hermitian, unit-trace, positive semidefinite 3x3 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(LogicalMatrix);

impl DensityMatrix {
    pub fn new(m: LogicalMatrix) -> Result<Self> {
        let herm = max_norm(&(m - m.adjoint()));
        if !(herm <= PHYSICAL_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian ({herm:e})"
            )));
        }
        let tr = m.trace();
        if !((tr - Complex64::new(1.0, 0.0)).norm() <= PHYSICAL_TOL) {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let hermitian = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigen = hermitian.symmetric_eigenvalues().min();
        if !(min_eigen >= -PHYSICAL_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "eigenvalue {min_eigen}"
            )));
        }
        Ok(Self(m))
    }

    pub fn pure(state: &LogicalState) -> Result<Self> {
        Self::new(state * state.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self(LogicalMatrix::identity() / Complex64::new(3.0, 0.0))
    }

    pub fn matrix(&self) -> &LogicalMatrix {
        &self.0
    }
}

fn as_f64(c: &Rational64) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

/// The operator `sum v_i A_i + sum e_ij A_i A_j`, after checking that every
/// edge joins commuting observables.
pub fn expression_operator(expr: &InequalityExpression, rays: &RaySet) -> Result<LogicalMatrix> {
    if rays.len() != expr.graph.vertex_count() {
        return Err(Error::InvalidInequality(format!(
            "{} rays for {} vertices",
            rays.len(),
            expr.graph.vertex_count()
        )));
    }
    let obs = rays.observables()?;
    let mut op = LogicalMatrix::zeros();
    for (a, c) in obs.iter().zip(&expr.vertex_coeffs) {
        op += a.matrix() * Complex64::new(as_f64(c), 0.0);
    }
    for (&(i, j), c) in &expr.edge_coeffs {
        let (ok, norm) = commutes(&obs[i], &obs[j], PHYSICAL_TOL);
        if !ok {
            return Err(Error::NonCommutingEdge(i, j, norm));
        }
        op += obs[i].matrix() * obs[j].matrix() * Complex64::new(as_f64(c), 0.0);
    }
    Ok(op)
}

/// `Tr(rho O)` for the expression operator `O`.
pub fn quantum_value(
    expr: &InequalityExpression,
    rays: &RaySet,
    state: &DensityMatrix,
) -> Result<f64> {
    let op = expression_operator(expr, rays)?;
    Ok((state.0 * op).trace().re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    /// Random pure states first, the maximally mixed state last.
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

/// Haar-random pure qutrit state (normalized complex Gaussian vector).
pub fn random_pure_state(rng: &mut impl Rng) -> LogicalState {
    let v = LogicalState::from_fn(|_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v.unscale(norm)
}

/// Quantum value over `n_states` seeded random pure states plus the
/// maximally mixed state.
pub fn state_independence_scan(
    expr: &InequalityExpression,
    rays: &RaySet,
    n_states: usize,
    seed: u64,
) -> Result<ScanResult> {
    if n_states == 0 {
        return Err(Error::InvalidInequality(
            "scan needs at least one state".into(),
        ));
    }
    let op = expression_operator(expr, rays)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_states + 1);
    for _ in 0..n_states {
        let psi = random_pure_state(&mut rng);
        values.push((psi.adjoint() * op * psi)[(0, 0)].re);
    }
    values.push((DensityMatrix::maximally_mixed().0 * op).trace().re);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScanResult {
        values,
        min,
        max,
        spread: max - min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    /// Exact bound as `p/q` (or `p`).
    pub classical_bound: String,
    pub classical_bound_value: f64,
    pub scale: i64,
    pub scaled_bound: i128,
    pub maximizing_assignment: Vec<i8>,
    pub quantum_value: f64,
    pub violation: f64,
}

pub fn inequality_report(
    expr: &InequalityExpression,
    rays: &RaySet,
    state: &DensityMatrix,
) -> Result<InequalityReport> {
    let bound = classical_bound_bruteforce(expr)?;
    let quantum = quantum_value(expr, rays, state)?;
    let bound_value = as_f64(&bound.bound);
    Ok(InequalityReport {
        classical_bound: bound.bound.to_string(),
        classical_bound_value: bound_value,
        scale: bound.scale,
        scaled_bound: bound.scaled_bound,
        maximizing_assignment: bound.assignment,
        quantum_value: quantum,
        violation: quantum - bound_value,
    })
}

/// Real vector as a logical state.
pub fn real_state(x: [f64; 3]) -> LogicalState {
    Vector3::new(x[0].into(), x[1].into(), x[2].into())
}
