//! Dense complex linear algebra on small qubit registers.
//!
//! Everything is stored densely as [`nalgebra::DMatrix`] of [`Complex64`].
//! Qubit site 0 is the leftmost tensor factor, i.e. the most significant bit
//! of a computational-basis label.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// Largest number of entries a matrix produced by [`kron`] may have.
pub const MAX_ENTRIES: usize = 1 << 24;

/// Relative residual accepted from the eigensolver.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for (idx, z) in m.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            // nalgebra is column-major
            return Err(Error::NonFinite {
                row: idx % m.nrows(),
                col: idx / m.nrows(),
            });
        }
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    let entries = rows.saturating_mul(cols);
    if entries > MAX_ENTRIES {
        return Err(Error::SizeOverflow {
            rows,
            cols,
            entries,
            limit: MAX_ENTRIES,
        });
    }
    Ok(a.kronecker(b))
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::from_element(1, 1, ONE);
    for f in factors {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

/// Pauli matrices and friends used throughout the crate.
pub mod pauli {
    use super::{ComplexMatrix, ONE, ZERO};
    use num_complex::Complex64;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2, 2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> ComplexMatrix {
        let i = Complex64::new(0.0, 1.0);
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    /// `|0⟩⟨1|`, raising the spin projection.
    pub fn raising() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// A self-adjoint operator with a lazily computed spectral decomposition.
///
/// The cache is filled at most once; clones share nothing.
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl HermitianObservable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        check_finite(&matrix)?;
        let scale = max_abs(&matrix);
        let deviation = max_abs(&(&matrix - matrix.adjoint()));
        let allowed = HERMITIAN_TOL * scale;
        if deviation > allowed {
            return Err(Error::NotHermitian { deviation, allowed });
        }
        Ok(Self {
            matrix,
            spectrum: OnceLock::new(),
        })
    }

    /// Diagonal observable with the given real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self {
            matrix: ComplexMatrix::from_diagonal(&d),
            spectrum: OnceLock::new(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Default degeneracy tolerance `1e-8 · max(1, ‖H‖_max)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-8 * self.norm_max().max(1.0)
    }

    /// Spectral decomposition, computed on first use.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = eig_hermitian(self)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Installs a known decomposition instead of running the eigensolver.
    ///
    /// Returns `false` if a cached decomposition already existed.
    pub fn set_spectrum(&self, spectrum: Spectrum) -> bool {
        self.spectrum.set(spectrum).is_ok()
    }
}

fn eig_budget(dim: usize) -> usize {
    1000 + 100 * dim
}

/// Full eigendecomposition of a Hermitian observable.
///
/// Eigenvalues come back ascending. Each eigenvector is rotated so that its
/// largest-magnitude component is real and positive.
pub fn eig_hermitian(h: &HermitianObservable) -> Result<Spectrum> {
    let m = h.matrix();
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Spectrum {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let max_iterations = eig_budget(dim);
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iterations)
        .ok_or(Error::NoConvergence { max_iterations })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        // first component within rounding of the largest, so ties are stable
        let largest = col.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let pivot = col
            .iter()
            .copied()
            .find(|z| z.norm() >= largest * (1.0 - 1e-9))
            .unwrap_or(ONE);
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            ONE
        };
        vectors.set_column(dst, &(col * phase));
    }

    let scale = m.norm().max(f64::MIN_POSITIVE);
    let diag = DVector::from_iterator(dim, values.iter().map(|&v| Complex64::new(v, 0.0)));
    let residual = max_column_norm(&(m * &vectors - &vectors * ComplexMatrix::from_diagonal(&diag)));
    if residual > EIG_RESIDUAL_TOL * scale {
        return Err(Error::NoConvergence { max_iterations });
    }
    Ok(Spectrum { values, vectors })
}

fn max_column_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Groups `0..n` into connected components of an undirected graph.
///
/// Components come back sorted by their smallest member, members ascending.
pub fn connected_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Indices that are coupled through exactly nonzero off-diagonal entries.
pub fn sparsity_blocks(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let edges = (0..n).flat_map(move |c| (0..n).map(move |r| (r, c))).filter(|&(r, c)| r != c && m[(r, c)] != ZERO);
    connected_components(n, edges)
}

/// Restriction of `m` to the rows and columns listed in `idx`.
pub fn submatrix(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Eigenvalues of a Hermitian observable, ascending.
///
/// The matrix is first split into the blocks of its exact sparsity pattern;
/// each block is diagonalized on its own. This is what makes operators such
/// as `J² + εJz`, which never couple different `Jz` sectors, cheap at 12 qubits.
pub fn eigenvalues_blockwise(h: &HermitianObservable) -> Vec<f64> {
    let m = h.matrix();
    let mut values = Vec::with_capacity(m.nrows());
    for block in sparsity_blocks(m) {
        if block.len() == 1 {
            values.push(m[(block[0], block[0])].re);
        } else {
            values.extend(submatrix(m, &block).symmetric_eigenvalues().iter().copied());
        }
    }
    values.sort_by(f64::total_cmp);
    values
}

/// Result of grouping a sorted spectrum into numerically distinct values.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenClustering {
    /// Mean value of each cluster, ascending.
    pub cluster_values: Vec<f64>,
    /// Cluster id for each input position.
    pub cluster_index_of: Vec<usize>,
    /// Size of each cluster.
    pub cluster_sizes: Vec<usize>,
    pub tolerance_used: f64,
}

impl EigenClustering {
    pub fn count(&self) -> usize {
        self.cluster_values.len()
    }
}

/// Greedy gap clustering: a new cluster starts whenever the gap to the
/// previous value exceeds `tol`.
pub fn cluster_spectrum(values: &[f64], tol: f64) -> Result<EigenClustering> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("values", "must be sorted ascending"));
    }
    let mut cluster_values: Vec<f64> = Vec::new();
    let mut cluster_sizes: Vec<usize> = Vec::new();
    let mut cluster_index_of = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if i == 0 || v - values[i - 1] > tol {
            if let (Some(last), Some(&n)) = (cluster_values.last_mut(), cluster_sizes.last()) {
                *last = sum / n as f64;
            }
            cluster_values.push(v);
            cluster_sizes.push(0);
            sum = 0.0;
        }
        sum += v;
        *cluster_sizes.last_mut().unwrap() += 1;
        cluster_index_of.push(cluster_values.len() - 1);
    }
    if let (Some(last), Some(&n)) = (cluster_values.last_mut(), cluster_sizes.last()) {
        *last = sum / n as f64;
    }
    Ok(EigenClustering {
        cluster_values,
        cluster_index_of,
        cluster_sizes,
        tolerance_used: tol,
    })
}

/// Unitary discrete Fourier matrix `F[j,k] = e^{2πi jk/m} / √m`.
pub fn fourier_unitary(m: usize) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(invalid("m", "Fourier dimension must be at least 1"));
    }
    let norm = 1.0 / (m as f64).sqrt();
    Ok(ComplexMatrix::from_fn(m, m, |j, k| {
        // reduce jk mod m first so the angle stays small for large m
        let phase = std::f64::consts::TAU * ((j * k) % m) as f64 / m as f64;
        Complex64::from_polar(norm, phase)
    }))
}

/// `e^{iHφ} ψ`, evaluated through the spectral decomposition of `h`.
pub fn evolve(h: &HermitianObservable, phi: f64, psi: &StateVector) -> Result<StateVector> {
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.len(),
        });
    }
    let s = h.spectrum()?;
    let mut coeffs = s.vectors.ad_mul(psi);
    for (c, &lambda) in coeffs.iter_mut().zip(&s.values) {
        *c *= Complex64::from_polar(1.0, lambda * phi);
    }
    Ok(&s.vectors * coeffs)
}
