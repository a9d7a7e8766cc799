//! Shared test helpers: random network generators and an independent
//! dense-matrix oracle that never touches the library's linear algebra.

#![allow(dead_code)]

use std::collections::BTreeMap;

use contextuality_optics::mode_calculus::{ModeBasis, ModeLabel};
use contextuality_optics::optical_elements::{ElementSpec, NetworkSpec};
use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// Half-wave plate straight from the transformation rule, column = image.
pub fn hwp_formula(theta: f64) -> [[f64; 2]; 2] {
    let c2 = (2.0 * theta).cos();
    let s2 = (2.0 * theta).sin();
    // H -> c2 H + s2 V ; V -> -s2 H + c2 V
    [[c2, -s2], [s2, c2]]
}

fn pos(labels: &[ModeLabel], l: &ModeLabel) -> usize {
    labels.iter().position(|x| x == l).expect("label in basis")
}

/// Element matrix written out by hand from each element's routing rule.
pub fn oracle_element(el: &ElementSpec, labels: &[ModeLabel]) -> Dense {
    let n = labels.len();
    let mut m = identity(n);
    match el {
        ElementSpec::Hwp { path, theta } => {
            let h = pos(labels, &ModeLabel::h(path.as_str()));
            let v = pos(labels, &ModeLabel::v(path.as_str()));
            let r = hwp_formula(*theta);
            m[h][h] = c(r[0][0]);
            m[h][v] = c(r[0][1]);
            m[v][h] = c(r[1][0]);
            m[v][v] = c(r[1][1]);
        }
        ElementSpec::Pbs { path_a, path_b } => {
            let ah = pos(labels, &ModeLabel::h(path_a.as_str()));
            let av = pos(labels, &ModeLabel::v(path_a.as_str()));
            let bh = pos(labels, &ModeLabel::h(path_b.as_str()));
            let bv = pos(labels, &ModeLabel::v(path_b.as_str()));
            for &i in &[ah, av, bh, bv] {
                for &j in &[ah, av, bh, bv] {
                    m[i][j] = c(0.0);
                }
            }
            // transmit H, reflect V across paths
            m[ah][ah] = c(1.0);
            m[bh][bh] = c(1.0);
            m[bv][av] = c(1.0);
            m[av][bv] = c(1.0);
        }
        ElementSpec::Relabel { mapping } => {
            m = vec![vec![c(0.0); n]; n];
            for (col, l) in labels.iter().enumerate() {
                let to = mapping.get(l).unwrap_or(l);
                m[pos(labels, to)][col] = c(1.0);
            }
        }
    }
    m
}

pub fn oracle_network(net: &NetworkSpec) -> Dense {
    let labels = net.basis().labels();
    net.elements().iter().fold(identity(labels.len()), |u, el| {
        matmul(&oracle_element(el, labels), &u)
    })
}

/// `U^dagger |d><d| U` as a full matrix, then sliced to the logical block.
/// Returns the block and its idempotence error.
pub fn oracle_projector(net: &NetworkSpec, detector: &str) -> (Dense, f64) {
    let labels = net.basis().labels();
    let n = labels.len();
    let u = oracle_network(net);
    let d = pos(labels, &net.detectors()[detector]);
    let mut dd = vec![vec![c(0.0); n]; n];
    dd[d][d] = c(1.0);
    let full = matmul(&matmul(&dagger(&u), &dd), &u);
    let idx: Vec<usize> = net
        .logical_inputs()
        .iter()
        .map(|l| pos(labels, l))
        .collect();
    let block: Dense = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| full[i][j]).collect())
        .collect();
    let sq = matmul(&block, &block);
    (block.clone(), max_diff(&sq, &block))
}

pub fn to_dense3(m: &nalgebra::Matrix3<Complex64>) -> Dense {
    (0..3)
        .map(|i| (0..3).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn qutrit_detectors() -> BTreeMap<String, ModeLabel> {
    [
        ("D0".to_string(), ModeLabel::h("a")),
        ("D1".to_string(), ModeLabel::v("a")),
        ("D2".to_string(), ModeLabel::h("b")),
    ]
    .into_iter()
    .collect()
}

pub fn qutrit_inputs() -> [ModeLabel; 3] {
    [ModeLabel::h("a"), ModeLabel::v("a"), ModeLabel::h("b")]
}

/// Random network on paths `a`, `b` whose detectors never see the ancilla
/// input `b.V`. Building blocks: a plate on `a`; a splitter sandwich
/// `PBS(a,b), HWP(b), PBS(a,b)` that rotates `a.V` into `b.H`; a swap of two
/// logical modes. At most `max_elements` elements.
pub fn random_qutrit_network(rng: &mut impl Rng, max_elements: usize) -> NetworkSpec {
    let mut elements = Vec::new();
    let target = rng.random_range(0..=max_elements);
    while elements.len() < target {
        let room = max_elements - elements.len();
        match rng.random_range(0..3) {
            0 => elements.push(ElementSpec::hwp(
                "a",
                rng.random_range(0.0..std::f64::consts::TAU),
            )),
            1 if room >= 3 => {
                elements.push(ElementSpec::pbs("a", "b"));
                elements.push(ElementSpec::hwp(
                    "b",
                    rng.random_range(0.0..std::f64::consts::TAU),
                ));
                elements.push(ElementSpec::pbs("a", "b"));
            }
            _ => {
                let mut logical = qutrit_inputs().to_vec();
                logical.shuffle(rng);
                elements.push(ElementSpec::swap(logical[0].clone(), logical[1].clone()));
            }
        }
    }
    NetworkSpec::new(
        ModeBasis::from_paths(&["a", "b"]).unwrap(),
        elements,
        qutrit_detectors(),
        qutrit_inputs(),
    )
    .unwrap()
}

/// Arbitrary random network on 2 or 3 paths: plates, splitters and swaps
/// anywhere, random logical inputs and three random detector modes.
pub fn random_network(rng: &mut impl Rng, max_elements: usize) -> NetworkSpec {
    let paths: Vec<&str> = if rng.random_bool(0.5) {
        vec!["a", "b"]
    } else {
        vec!["a", "b", "c"]
    };
    let basis = ModeBasis::from_paths(&paths).unwrap();
    let labels = basis.labels().to_vec();
    let count = rng.random_range(0..=max_elements);
    let elements = (0..count)
        .map(|_| match rng.random_range(0..3) {
            0 => ElementSpec::hwp(
                *paths.choose(rng).unwrap(),
                rng.random_range(0.0..std::f64::consts::TAU),
            ),
            1 => {
                let two: Vec<_> = paths.choose_multiple(rng, 2).collect();
                ElementSpec::pbs(*two[0], *two[1])
            }
            _ => {
                let two: Vec<_> = labels.choose_multiple(rng, 2).cloned().collect();
                ElementSpec::swap(two[0].clone(), two[1].clone())
            }
        })
        .collect();
    let mut shuffled = labels.clone();
    shuffled.shuffle(rng);
    let logical = [
        shuffled[0].clone(),
        shuffled[1].clone(),
        shuffled[2].clone(),
    ];
    shuffled.shuffle(rng);
    let detectors = (0..3)
        .map(|k| (format!("D{k}"), shuffled[k].clone()))
        .collect();
    NetworkSpec::new(basis, elements, detectors, logical).unwrap()
}
