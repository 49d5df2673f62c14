//! Collective spin operators on `n` qubits and the counting formulas built
//! on top of them.
//!
//! Conventions: `ħ = 1`, `|0⟩` is spin up (`m = +½`), and `J₊` raises `m`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{ComplexMatrix, HermitianObservable, ONE};

/// Largest register for which the dense collective operators are built.
pub const MAX_QUBITS: usize = 12;

/// A half-integer stored exactly as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub const fn from_int(value: i32) -> Self {
        Self(2 * value)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Nearest half-integer to `x`, or `None` if `x` is farther than `tol` from it.
    pub fn nearest(x: f64, tol: f64) -> Option<Self> {
        let twice = (2.0 * x).round();
        if (twice / 2.0 - x).abs() > tol || !twice.is_finite() || twice.abs() > f64::from(i32::MAX) {
            return None;
        }
        Some(Self(twice as i32))
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = String;

    fn try_from(x: f64) -> Result<Self, String> {
        HalfInt::nearest(x, 1e-9).ok_or_else(|| format!("{x} is not a half-integer"))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(invalid("n", format!("qubit count must be in 1..={MAX_QUBITS}, got {n}")));
    }
    Ok(())
}

#[inline]
fn site_bit(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

/// `Jz` eigenvalue of a computational-basis label, as twice its value.
pub fn twice_m_of_label(n: usize, label: usize) -> i32 {
    n as i32 - 2 * label.count_ones() as i32
}

fn swap_sites(n: usize, label: usize, a: usize, b: usize) -> usize {
    let (ba, bb) = (site_bit(n, a), site_bit(n, b));
    if ((label & ba) == 0) == ((label & bb) == 0) {
        label
    } else {
        label ^ ba ^ bb
    }
}

/// `J²` of the first `sites` qubits, tensored with the identity on the rest.
///
/// Built from `Sᵢ·Sₖ = (SWAPᵢₖ − ½)/2`, so every entry is exact.
pub fn total_spin_squared_on(n: usize, sites: usize) -> Result<ComplexMatrix> {
    check_qubits(n)?;
    if sites > n {
        return Err(invalid("sites", format!("{sites} sites requested on {n} qubits")));
    }
    let dim = 1usize << n;
    let k = sites as f64;
    let constant = 0.75 * k - 0.25 * k * (k - 1.0);
    let mut m = ComplexMatrix::from_diagonal_element(dim, dim, Complex64::new(constant, 0.0));
    for a in 0..sites {
        for b in a + 1..sites {
            for label in 0..dim {
                m[(swap_sites(n, label, a, b), label)] += ONE;
            }
        }
    }
    Ok(m)
}

/// `Jz` as a dense diagonal matrix.
pub fn jz_matrix(n: usize) -> Result<ComplexMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex64::new(f64::from(twice_m_of_label(n, r)) / 2.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Raising operator `J₊ = Σᵢ σ₊⁽ⁱ⁾` with `σ₊ = |0⟩⟨1|`.
pub fn jplus_matrix(n: usize) -> Result<ComplexMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for label in 0..dim {
        for site in 0..n {
            let bit = site_bit(n, site);
            if label & bit != 0 {
                m[(label ^ bit, label)] = ONE;
            }
        }
    }
    Ok(m)
}

/// The observable `J² + ε Jz` on `n` qubits.
pub fn collective_observable(n: usize, epsilon: f64) -> Result<HermitianObservable> {
    let mut m = total_spin_squared_on(n, n)?;
    for label in 0..m.nrows() {
        m[(label, label)] += Complex64::new(epsilon * f64::from(twice_m_of_label(n, label)) / 2.0, 0.0);
    }
    HermitianObservable::new(m)
}

/// Dense collective spin operators on the full `2^n` space.
#[derive(Debug, Clone)]
pub struct CollectiveSpinOps {
    pub n: usize,
    pub jz: HermitianObservable,
    pub jplus: ComplexMatrix,
    pub j2: HermitianObservable,
}

impl CollectiveSpinOps {
    pub fn jminus(&self) -> ComplexMatrix {
        self.jplus.adjoint()
    }

    pub fn jx(&self) -> ComplexMatrix {
        (&self.jplus + self.jminus()) * Complex64::new(0.5, 0.0)
    }

    pub fn jy(&self) -> ComplexMatrix {
        (&self.jplus - self.jminus()) * Complex64::new(0.0, -0.5)
    }
}

pub fn build_collective_ops(n: usize) -> Result<CollectiveSpinOps> {
    Ok(CollectiveSpinOps {
        n,
        jz: HermitianObservable::new(jz_matrix(n)?)?,
        jplus: jplus_matrix(n)?,
        j2: HermitianObservable::new(total_spin_squared_on(n, n)?)?,
    })
}

/// Tight upper bound on the number of distinct outcomes of a collective
/// measurement on `n` two-level particles.
///
/// Distinguishable particles: `(n+2)²/4` for even `n`, `(n+1)(n+3)/4` for odd `n`.
/// Identical particles live in the `n+1`-dimensional symmetric subspace.
pub fn outcome_bound(n: usize, identical: bool) -> u64 {
    let n = n as u64;
    if identical {
        n + 1
    } else if n.is_multiple_of(2) {
        (n + 2) * (n + 2) / 4
    } else {
        (n + 1) * (n + 3) / 4
    }
}

/// Allowed total spins for `n` spin-½ particles, largest first.
pub fn allowed_spins(n: usize) -> Vec<HalfInt> {
    let top = n as i32;
    (0..=top / 2).map(|k| HalfInt::from_twice(top - 2 * k)).collect()
}

/// All `(j, m)` labels of joint `J²`/`Jz` eigenspaces, `j` descending then `m` descending.
pub fn joint_labels(n: usize) -> Vec<(HalfInt, HalfInt)> {
    allowed_spins(n)
        .into_iter()
        .flat_map(|j| (0..=j.twice()).map(move |k| (j, HalfInt::from_twice(j.twice() - 2 * k))))
        .collect()
}

pub fn binomial(n: u64, k: i64) -> u128 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Dimension of every `V_{n,j,m}`: `C(n, n/2−j) − C(n, n/2−j−1)`.
pub fn multiplicity(n: usize, j: HalfInt) -> Result<u64> {
    let (n2, j2) = (n as i32, j.twice());
    if j2 < 0 || j2 > n2 || (n2 - j2) % 2 != 0 {
        return Err(Error::InvalidQuantumNumbers(format!("spin j = {j} is not reachable with {n} spin-1/2 particles")));
    }
    let k = i64::from((n2 - j2) / 2);
    let d = binomial(n as u64, k) - binomial(n as u64, k - 1);
    u64::try_from(d).map_err(|_| invalid("n", "multiplicity overflows u64"))
}

/// The register size `N = (2j+1)² − 1` at which `V_{N−1, j+½, m}` and
/// `V_{N−1, j−½, m}` have equal dimension.
pub fn dim_equality_threshold(j: HalfInt) -> Result<u64> {
    if j.twice() < 1 {
        return Err(Error::InvalidQuantumNumbers(format!("threshold needs j >= 1/2, got {j}")));
    }
    let s = u64::try_from(j.twice() + 1).expect("positive");
    Ok(s * s - 1)
}

/// Clebsch–Gordan coefficients coupling spin `j` with spin ½.
///
/// Rows are the total spins `j+½` and `j−½` at total projection `m`;
/// columns are the uncoupled states `|j, m−½⟩|↑⟩` and `|j, m+½⟩|↓⟩`.
/// Condon–Shortley phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CGPair {
    pub j: HalfInt,
    pub m: HalfInt,
    pub c_plus: (f64, f64),
    pub c_minus: (f64, f64),
}

impl CGPair {
    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.c_plus.0, self.c_plus.1], [self.c_minus.0, self.c_minus.1]]
    }
}

pub fn cg_coefficients(j: HalfInt, m: HalfInt) -> Result<CGPair> {
    let (j2, m2) = (j.twice(), m.twice());
    if j2 < 0 {
        return Err(Error::InvalidQuantumNumbers(format!("negative spin {j}")));
    }
    // m is a projection of j ± ½, so m − j must be a half-odd integer
    if (m2 - j2).rem_euclid(2) != 1 || m2.abs() > j2 + 1 {
        return Err(Error::InvalidQuantumNumbers(format!("m = {m} incompatible with j = {j} coupled to 1/2")));
    }
    let denom = f64::from(j2 + 1);
    let up = (f64::from(j2 + m2 + 1) / 2.0 / denom).sqrt();
    let down = (f64::from(j2 - m2 + 1) / 2.0 / denom).sqrt();
    Ok(CGPair {
        j,
        m,
        c_plus: (up, down),
        c_minus: (-down, up),
    })
}

/// Splitting `ε = 1/n` that makes every `j(j+1) + εm` distinct.
pub fn epsilon_for(n: usize) -> f64 {
    let eps = 1.0 / n.max(1) as f64;
    debug_assert!(labels_distinct(n, eps, 1e-9));
    eps
}

/// Values `j(j+1) + εm` over all joint labels, in label order.
pub fn label_values(n: usize, epsilon: f64) -> Vec<f64> {
    joint_labels(n)
        .into_iter()
        .map(|(j, m)| j.value() * (j.value() + 1.0) + epsilon * m.value())
        .collect()
}

/// Whether all label values are pairwise separated by more than `tol`.
pub fn labels_distinct(n: usize, epsilon: f64, tol: f64) -> bool {
    let mut v = label_values(n, epsilon);
    v.sort_by(f64::total_cmp);
    v.windows(2).all(|w| w[1] - w[0] > tol)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cg_matrix_is_orthogonal(j2 in 0i32..400, t in 0.0f64..1.0) {
            let steps = j2 + 1;
            let m2 = -(j2 + 1) + 2 * ((t * f64::from(steps + 1)) as i32).min(steps);
            let [[a, b], [c, d]] = cg_coefficients(HalfInt::from_twice(j2), HalfInt::from_twice(m2)).unwrap().as_matrix();
            prop_assert!((a * a + b * b - 1.0).abs() <= 1e-12);
            prop_assert!((c * c + d * d - 1.0).abs() <= 1e-12);
            prop_assert!((a * c + b * d).abs() <= 1e-12);
        }

        #[test]
        fn multiplicities_are_complete(n in 1usize..40) {
            let total: u128 = allowed_spins(n).iter().map(|&j| u128::from(multiplicity(n, j).unwrap()) * (j.twice() as u128 + 1)).sum();
            prop_assert_eq!(total, 1u128 << n);
        }
    }
}
