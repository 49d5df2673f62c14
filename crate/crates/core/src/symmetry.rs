//! The permutation action of `S_n` on `n` qubits, collectivity tests, and
//! finite-`n` certificates that the joint `J²`/`Jz` eigenspaces are
//! irreducible.

use itertools::Itertools;
use nalgebra::SVD;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{
    cluster_spectrum, connected_components, eig_hermitian, eigenvalues_blockwise, max_abs, ComplexMatrix,
    HermitianObservable, ONE, ZERO,
};
use crate::spin::{self, twice_m_of_label, HalfInt};

/// Largest register handled by [`joint_eigenspaces`].
pub const MAX_EIGENSPACE_QUBITS: usize = 10;
/// Largest register handled by [`random_invariant_observable`].
pub const MAX_AVERAGING_QUBITS: usize = 8;

/// Tolerance on eigen-equations and invariance of extracted subspaces.
pub const SUBSPACE_TOL: f64 = 1e-8;
/// Relative singular-value threshold deciding the commutant nullspace.
pub const NULLSPACE_REL_TOL: f64 = 1e-8;

/// A relabeling of computational-basis states, `label ↦ map[label]`.
pub type LabelMap = Vec<usize>;

/// Label map of the site permutation `perm`: the qubit at site `i` moves to
/// site `perm[i]` (0-based).
pub fn permutation_unitary(n: usize, perm: &[usize]) -> Result<LabelMap> {
    if perm.len() != n {
        return Err(invalid("perm", format!("expected {n} entries, got {}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(invalid("perm", format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    if n > spin::MAX_QUBITS {
        return Err(invalid("n", format!("at most {} qubits", spin::MAX_QUBITS)));
    }
    let dim = 1usize << n;
    Ok((0..dim)
        .map(|label| {
            (0..n).fold(0usize, |acc, site| {
                if label & (1 << (n - 1 - site)) != 0 {
                    acc | 1 << (n - 1 - perm[site])
                } else {
                    acc
                }
            })
        })
        .collect())
}

/// Dense 0/1 matrix of a label map: `U|b⟩ = |map[b]⟩`.
pub fn label_map_matrix(map: &[usize]) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(map.len(), map.len());
    for (b, &image) in map.iter().enumerate() {
        u[(image, b)] = ONE;
    }
    u
}

/// Adjacent-transposition generators of a permutation group on qubit sites.
#[derive(Debug, Clone)]
pub struct PermutationAction {
    pub n: usize,
    pub generators: Vec<LabelMap>,
}

impl PermutationAction {
    /// `S_n` acting on all `n` sites.
    pub fn symmetric_group(n: usize) -> Result<Self> {
        Self::on_first_sites(n, n)
    }

    /// `S_k` permuting the first `k` of `n` sites.
    pub fn on_first_sites(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(invalid("k", format!("{k} sites requested on {n} qubits")));
        }
        let generators = (0..k.saturating_sub(1))
            .map(|i| {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(i, i + 1);
                permutation_unitary(n, &perm)
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, generators })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }
}

/// Whether `o` commutes with every generator of `S_n` to within `tol`
/// (max-norm of the commutator).
pub fn is_collective(o: &HermitianObservable, n: usize, tol: f64) -> Result<bool> {
    let action = PermutationAction::symmetric_group(n)?;
    commutes_with(o.matrix(), &action, tol)
}

fn commutes_with(m: &ComplexMatrix, action: &PermutationAction, tol: f64) -> Result<bool> {
    if m.nrows() != action.dim() {
        return Err(Error::DimensionMismatch {
            expected: action.dim(),
            found: m.nrows(),
        });
    }
    // [O, U] = 0  ⇔  O[σa, σb] = O[a, b]
    for sigma in &action.generators {
        for b in 0..m.ncols() {
            for a in 0..m.nrows() {
                if (m[(sigma[a], sigma[b])] - m[(a, b)]).norm() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Joint eigenspace `V_{n,j,m}` of `J²` and `Jz`.
#[derive(Debug, Clone)]
pub struct SpinEigenspace {
    pub n: usize,
    pub j: HalfInt,
    pub m: HalfInt,
    /// Orthonormal columns spanning the space.
    pub basis: ComplexMatrix,
    pub dimension: usize,
}

/// `j` from a `J²` eigenvalue `j(j+1)`, rejected if farther than `1e-6` from a half-integer.
pub fn spin_from_casimir(lambda: f64) -> Result<HalfInt> {
    let j = (-1.0 + (1.0 + 4.0 * lambda).max(0.0).sqrt()) / 2.0;
    HalfInt::nearest(j, 1e-6)
        .filter(|h| h.twice() >= 0)
        .ok_or_else(|| Error::InvalidQuantumNumbers(format!("J² eigenvalue {lambda} is not of the form j(j+1)")))
}

/// Labels of the `Jz = m` sector, ascending.
fn sector_labels(n: usize, twice_m: i32) -> Vec<usize> {
    (0..1usize << n).filter(|&l| twice_m_of_label(n, l) == twice_m).collect()
}

/// Splits `span(basis)` into the eigenspaces of `op` restricted to it.
///
/// Returns `(eigenvalue, orthonormal columns)` pairs with eigenvalues ascending.
fn split_by_operator(op: &ComplexMatrix, basis: &ComplexMatrix) -> Result<Vec<(f64, ComplexMatrix)>> {
    let restricted = basis.ad_mul(&(op * basis));
    // symmetrize away rounding before the Hermitian check
    let restricted = (&restricted + restricted.adjoint()) * Complex64::new(0.5, 0.0);
    let h = HermitianObservable::new(restricted)?;
    let s = eig_hermitian(&h)?;
    let clusters = cluster_spectrum(&s.values, h.default_tolerance())?;
    let mut out = Vec::with_capacity(clusters.count());
    let mut start = 0;
    for (&value, &size) in clusters.cluster_values.iter().zip(&clusters.cluster_sizes) {
        let cols = s.vectors.columns(start, size);
        out.push((value, basis * cols));
        start += size;
    }
    Ok(out)
}

/// All joint eigenspaces `V_{n,j,m}`, ordered `j` descending then `m` descending.
///
/// `Jz` is diagonal in the computational basis, so each `Jz` sector is
/// extracted exactly and `J²` is diagonalized inside it.
pub fn joint_eigenspaces(n: usize) -> Result<Vec<SpinEigenspace>> {
    if n == 0 || n > MAX_EIGENSPACE_QUBITS {
        return Err(invalid("n", format!("qubit count must be in 1..={MAX_EIGENSPACE_QUBITS}, got {n}")));
    }
    let dim = 1usize << n;
    let j2 = spin::total_spin_squared_on(n, n)?;
    let mut spaces = Vec::new();
    for twice_m in (-(n as i32)..=n as i32).step_by(2) {
        let labels = sector_labels(n, twice_m);
        let embed = ComplexMatrix::from_fn(dim, labels.len(), |r, c| if labels[c] == r { ONE } else { ZERO });
        for (lambda, basis) in split_by_operator(&j2, &embed)? {
            let j = spin_from_casimir(lambda)?;
            let dimension = basis.ncols();
            spaces.push(SpinEigenspace {
                n,
                j,
                m: HalfInt::from_twice(twice_m),
                basis,
                dimension,
            });
        }
    }
    spaces.sort_by(|a, b| b.j.cmp(&a.j).then(b.m.cmp(&a.m)));
    Ok(spaces)
}

/// Max-norm residual of `J² v = j(j+1) v` and `Jz v = m v` over the basis.
pub fn eigenspace_residual(space: &SpinEigenspace) -> Result<f64> {
    let j2 = spin::total_spin_squared_on(space.n, space.n)?;
    let jz = spin::jz_matrix(space.n)?;
    let j = space.j.value();
    let r1 = max_abs(&(&j2 * &space.basis - &space.basis * Complex64::new(j * (j + 1.0), 0.0)));
    let r2 = max_abs(&(&jz * &space.basis - &space.basis * Complex64::new(space.m.value(), 0.0)));
    Ok(r1.max(r2))
}

/// Restriction `B† U B` of each generator, with the invariance residual `‖UB − B(B†UB)‖_max`.
fn restrict_generators(basis: &ComplexMatrix, action: &PermutationAction) -> Result<(Vec<ComplexMatrix>, f64)> {
    if basis.nrows() != action.dim() {
        return Err(Error::DimensionMismatch {
            expected: action.dim(),
            found: basis.nrows(),
        });
    }
    let mut residual = 0.0_f64;
    let mut restricted = Vec::with_capacity(action.generators.len());
    for sigma in &action.generators {
        let mut ub = ComplexMatrix::zeros(basis.nrows(), basis.ncols());
        for (b, &image) in sigma.iter().enumerate() {
            ub.set_row(image, &basis.row(b));
        }
        let r = basis.ad_mul(&ub);
        residual = residual.max(max_abs(&(&ub - basis * &r)));
        restricted.push(r);
    }
    Ok((restricted, residual))
}

/// Commutant dimension of the action restricted to `span(basis)`, with the invariance residual.
pub fn commutant_dimension_with_residual(basis: &ComplexMatrix, action: &PermutationAction) -> Result<(usize, f64)> {
    let d = basis.ncols();
    let (restricted, residual) = restrict_generators(basis, action)?;
    if residual > SUBSPACE_TOL {
        return Err(Error::NotInvariant { residual });
    }
    let dd = d * d;
    if restricted.is_empty() {
        return Ok((dd, residual));
    }

    // vec(RX − XR) = (I ⊗ R − Rᵀ ⊗ I) vec(X), column-major vec
    let id = ComplexMatrix::identity(d, d);
    let systems: Vec<ComplexMatrix> = restricted
        .iter()
        .map(|r| id.kronecker(r) - r.transpose().kronecker(&id))
        .collect();

    // The stacked system decouples into column groups that share no row.
    let mut edges = Vec::new();
    for k in &systems {
        for row in 0..dd {
            let mut prev = None;
            for col in 0..dd {
                if k[(row, col)] != ZERO {
                    if let Some(p) = prev {
                        edges.push((p, col));
                    }
                    prev = Some(col);
                }
            }
        }
    }
    let groups = connected_components(dd, edges);

    let mut per_group: Vec<(usize, Vec<f64>)> = Vec::with_capacity(groups.len());
    for cols in &groups {
        let mut rows: Vec<(usize, usize)> = Vec::new();
        for (g, k) in systems.iter().enumerate() {
            for row in 0..dd {
                if cols.iter().any(|&c| k[(row, c)] != ZERO) {
                    rows.push((g, row));
                }
            }
        }
        if rows.is_empty() {
            per_group.push((cols.len(), Vec::new()));
            continue;
        }
        let block = ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let (g, row) = rows[r];
            systems[g][(row, cols[c])]
        });
        let svd = SVD::try_new(block, false, false, f64::EPSILON, 0).ok_or(Error::NoConvergence { max_iterations: 0 })?;
        per_group.push((cols.len(), svd.singular_values.iter().copied().collect()));
    }

    let sigma_max = per_group.iter().flat_map(|(_, s)| s.iter().copied()).fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return Ok((dd, residual));
    }
    let threshold = NULLSPACE_REL_TOL * sigma_max;
    let nullity = per_group
        .iter()
        .map(|(width, sv)| width - sv.iter().filter(|&&s| s > threshold).count())
        .sum();
    Ok((nullity, residual))
}

/// Dimension of the algebra of operators on `span(basis)` commuting with
/// every generator of `action`.
pub fn commutant_dimension(basis: &ComplexMatrix, action: &PermutationAction) -> Result<usize> {
    commutant_dimension_with_residual(basis, action).map(|(d, _)| d)
}

/// Commutant dimension of `S_n` on the whole `2^n`-dimensional register.
pub fn full_space_commutant_dimension(n: usize) -> Result<usize> {
    let action = PermutationAction::symmetric_group(n)?;
    commutant_dimension(&ComplexMatrix::identity(action.dim(), action.dim()), &action)
}

#[derive(Debug, Clone, Serialize)]
pub struct IrreducibilityReport {
    pub n: usize,
    pub j: HalfInt,
    pub m: HalfInt,
    pub dimension: usize,
    pub commutant_dim: usize,
    pub irreducible: bool,
    /// Largest of the eigen-equation and invariance residuals.
    pub residual: f64,
}

/// Largest register accepted by [`verify_theorem1`] without the override.
pub const MAX_CERTIFIED_QUBITS: usize = 7;

/// Commutant certificate for every joint eigenspace at `n` qubits.
pub fn verify_theorem1(n: usize) -> Result<Vec<IrreducibilityReport>> {
    if !(2..=MAX_CERTIFIED_QUBITS).contains(&n) {
        return Err(invalid("n", format!("certificates are produced for 2..={MAX_CERTIFIED_QUBITS} qubits, got {n}")));
    }
    irreducibility_reports(n)
}

/// Same as [`verify_theorem1`] without the desk-scale cap (up to
/// [`MAX_EIGENSPACE_QUBITS`]).
pub fn irreducibility_reports(n: usize) -> Result<Vec<IrreducibilityReport>> {
    let action = PermutationAction::symmetric_group(n)?;
    joint_eigenspaces(n)?
        .into_iter()
        .map(|space| {
            let (commutant_dim, invariance) = commutant_dimension_with_residual(&space.basis, &action)?;
            let residual = invariance.max(eigenspace_residual(&space)?);
            Ok(IrreducibilityReport {
                n,
                j: space.j,
                m: space.m,
                dimension: space.dimension,
                commutant_dim,
                irreducible: commutant_dim == 1,
                residual,
            })
        })
        .collect()
}

/// Splits `V_{n,j,m}` into the eigenspaces `U_{j±½}` of `J²_{n−1} ⊗ 1`.
///
/// Returns `(j', basis)` for each first-`n−1`-qubit spin present.
pub fn split_by_leading_spin(space: &SpinEigenspace) -> Result<Vec<(HalfInt, ComplexMatrix)>> {
    if space.n < 2 {
        return Err(invalid("n", "need at least two qubits to split off the last one"));
    }
    let partial = spin::total_spin_squared_on(space.n, space.n - 1)?;
    split_by_operator(&partial, &space.basis)?
        .into_iter()
        .map(|(lambda, basis)| Ok((spin_from_casimir(lambda)?, basis)))
        .collect()
}

/// Draws a random Hermitian matrix and projects it onto the commutant of
/// `S_n` by averaging over all `n!` conjugations.
///
/// The group average of entry `(a, b)` is the mean of the matrix over the
/// orbit of `(a, b)` under simultaneous relabeling, which is what is
/// computed here.
pub fn random_invariant_observable(n: usize, seed: u64) -> Result<HermitianObservable> {
    if n == 0 || n > MAX_AVERAGING_QUBITS {
        return Err(invalid("n", format!("full group average supports 1..={MAX_AVERAGING_QUBITS} qubits, got {n}")));
    }
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    project_to_commutant(&h, n)
}

/// Group average `(1/n!) Σ_π U_π H U_π†`.
pub fn project_to_commutant(h: &ComplexMatrix, n: usize) -> Result<HermitianObservable> {
    let action = PermutationAction::symmetric_group(n)?;
    let dim = action.dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    let pair = |a: usize, b: usize| b * dim + a;
    let edges = action
        .generators
        .iter()
        .flat_map(|s| (0..dim).flat_map(move |b| (0..dim).map(move |a| (pair(a, b), pair(s[a], s[b])))));
    let orbits = connected_components(dim * dim, edges);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for orbit in orbits {
        let mean = orbit.iter().map(|&p| h[(p % dim, p / dim)]).sum::<Complex64>() / orbit.len() as f64;
        for &p in &orbit {
            out[(p % dim, p / dim)] = mean;
        }
    }
    HermitianObservable::new(out)
}

/// Explicit sum over all `n!` permutations; slow, kept as a cross-check.
pub fn project_to_commutant_by_enumeration(h: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let dim = 1usize << n;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    let mut count = 0usize;
    for perm in (0..n).permutations(n) {
        let u = label_map_matrix(&permutation_unitary(n, &perm)?);
        acc += &u * h * u.adjoint();
        count += 1;
    }
    Ok(acc / Complex64::new(count as f64, 0.0))
}

/// Number of distinct eigenvalues at resolution `tol`.
pub fn count_distinct_eigenvalues(o: &HermitianObservable, tol: f64) -> Result<usize> {
    let values = eigenvalues_blockwise(o);
    Ok(cluster_spectrum(&values, tol)?.count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{kron_all, pauli};
    use crate::spin::{collective_observable, epsilon_for, multiplicity, outcome_bound};

    fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
        // (a ∘ b)(x) = a[b[x]]
        b.iter().map(|&x| a[x]).collect()
    }

    #[test]
    fn swap_on_two_qubits() {
        let map = permutation_unitary(2, &[1, 0]).unwrap();
        assert_eq!(map, vec![0b00, 0b10, 0b01, 0b11]);
        let u = label_map_matrix(&map);
        assert_eq!(&u * &u, ComplexMatrix::identity(4, 4));
    }

    #[test]
    fn group_laws() {
        let n = 3;
        let id: Vec<usize> = (0..1 << n).collect();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(a, b);
            let t = permutation_unitary(n, &perm).unwrap();
            assert_eq!(compose(&t, &t), id);
        }
        let cycle = permutation_unitary(n, &[1, 2, 0]).unwrap();
        assert_eq!(compose(&cycle, &compose(&cycle, &cycle)), id);
    }

    #[test]
    fn generator_relations_hold_exactly() {
        for n in 2..=7 {
            let action = PermutationAction::symmetric_group(n).unwrap();
            let id: Vec<usize> = (0..1 << n).collect();
            for g in &action.generators {
                assert_eq!(compose(g, g), id);
            }
            for w in action.generators.windows(2) {
                let p = compose(&w[0], &w[1]);
                assert_eq!(compose(&p, &compose(&p, &p)), id, "braid relation at n = {n}");
            }
        }
    }

    #[test]
    fn rejects_invalid_permutations() {
        assert!(permutation_unitary(3, &[0, 0, 1]).is_err());
        assert!(permutation_unitary(3, &[0, 1]).is_err());
        assert!(permutation_unitary(2, &[0, 2]).is_err());
    }

    #[test]
    fn collectivity_examples() {
        let jz = HermitianObservable::new(spin::jz_matrix(3).unwrap()).unwrap();
        assert!(is_collective(&jz, 3, 1e-12).unwrap());

        let id = pauli::identity();
        let single = kron_all([&pauli::z(), &id, &id]).unwrap();
        assert!(!is_collective(&HermitianObservable::new(single).unwrap(), 3, 1e-12).unwrap());

        let obs = collective_observable(4, epsilon_for(4)).unwrap();
        assert!(is_collective(&obs, 4, 1e-12).unwrap());

        assert!(is_collective(&jz, 2, 1e-12).is_err());
    }

    #[test]
    fn joint_eigenspace_examples() {
        let spaces = joint_eigenspaces(1).unwrap();
        assert_eq!(spaces.iter().map(|s| s.dimension).collect::<Vec<_>>(), vec![1, 1]);

        let spaces = joint_eigenspaces(2).unwrap();
        assert_eq!(spaces.len(), 4);
        assert!(spaces.iter().all(|s| s.dimension == 1));

        let spaces = joint_eigenspaces(4).unwrap();
        assert_eq!(spaces.len(), 9);
        let dims: Vec<(f64, usize)> = spaces.iter().map(|s| (s.j.value(), s.dimension)).collect();
        assert_eq!(dims.iter().filter(|&&(j, d)| j == 2.0 && d == 1).count(), 5);
        assert_eq!(dims.iter().filter(|&&(j, d)| j == 1.0 && d == 3).count(), 3);
        assert_eq!(dims.iter().filter(|&&(j, d)| j == 0.0 && d == 2).count(), 1);
    }

    #[test]
    fn joint_eigenspaces_are_complete_and_orthogonal() {
        for n in 1..=7 {
            let spaces = joint_eigenspaces(n).unwrap();
            assert_eq!(spaces.len() as u64, outcome_bound(n, false));
            assert_eq!(spaces.iter().map(|s| s.dimension).sum::<usize>(), 1 << n);
            for s in &spaces {
                assert_eq!(s.dimension as u64, multiplicity(n, s.j).unwrap());
                assert!(eigenspace_residual(s).unwrap() <= SUBSPACE_TOL);
            }
            let all = ComplexMatrix::from_columns(&spaces.iter().flat_map(|s| s.basis.column_iter().map(|c| c.into_owned())).collect::<Vec<_>>());
            let gram = all.ad_mul(&all);
            assert!(max_abs(&(gram - ComplexMatrix::identity(1 << n, 1 << n))) < 1e-10);
        }
    }

    #[test]
    fn commutant_examples() {
        let action = PermutationAction::symmetric_group(2).unwrap();
        assert_eq!(commutant_dimension(&ComplexMatrix::identity(4, 4), &action).unwrap(), 10);

        // |00⟩ spans a 1-dimensional invariant space
        let mut ket = ComplexMatrix::zeros(4, 1);
        ket[(0, 0)] = ONE;
        assert_eq!(commutant_dimension(&ket, &action).unwrap(), 1);

        let v400 = joint_eigenspaces(4).unwrap().into_iter().find(|s| s.j.twice() == 0).unwrap();
        assert_eq!(v400.dimension, 2);
        let action4 = PermutationAction::symmetric_group(4).unwrap();
        assert_eq!(commutant_dimension(&v400.basis, &action4).unwrap(), 1);
    }

    #[test]
    fn commutant_rejects_non_invariant_subspace() {
        let action = PermutationAction::symmetric_group(2).unwrap();
        let mut ket = ComplexMatrix::zeros(4, 1);
        ket[(1, 0)] = ONE; // |01⟩ is mapped to |10⟩
        assert!(matches!(commutant_dimension(&ket, &action), Err(Error::NotInvariant { .. })));
    }

    /// Independent count: the commutant of a permutation representation has
    /// one dimension per orbit of the group on pairs of basis labels.
    fn pair_orbit_count(n: usize) -> usize {
        let dim = 1usize << n;
        let mut seen = vec![false; dim * dim];
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).map(|p| permutation_unitary(n, &p).unwrap()).collect();
        let mut orbits = 0;
        for a in 0..dim {
            for b in 0..dim {
                if seen[a * dim + b] {
                    continue;
                }
                orbits += 1;
                for p in &perms {
                    seen[p[a] * dim + p[b]] = true;
                }
            }
        }
        orbits
    }

    #[test]
    fn schur_weyl_commutant_dimensions() {
        // pair orbits are 2×2 contingency tables summing to n: C(n+3, 3)
        let expected = [(2, 10), (3, 20), (4, 35)];
        for (n, e) in expected {
            assert_eq!(pair_orbit_count(n), e);
            assert_eq!(full_space_commutant_dimension(n).unwrap(), e, "n = {n}");
        }
        for n in 1..=5 {
            let sum: u64 = spin::allowed_spins(n).iter().map(|j| (j.twice() as u64 + 1).pow(2)).sum();
            assert_eq!(full_space_commutant_dimension(n).unwrap() as u64, sum);
            assert_eq!(pair_orbit_count(n) as u64, sum);
            assert_eq!(spin::binomial(n as u64 + 3, 3), u128::from(sum));
        }
    }

    #[test]
    fn theorem1_small_registers() {
        let reports = verify_theorem1(2).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.irreducible && r.commutant_dim == 1));
        let reports = verify_theorem1(4).unwrap();
        assert_eq!(reports.len(), 9);
        assert!(reports.iter().all(|r| r.irreducible));
        assert!(verify_theorem1(1).is_err());
        assert!(verify_theorem1(8).is_err());
    }

    #[test]
    fn leading_spin_split_is_irreducible() {
        for n in 2..=6 {
            let sub = PermutationAction::on_first_sites(n, n - 1).unwrap();
            for space in joint_eigenspaces(n).unwrap() {
                let parts = split_by_leading_spin(&space).unwrap();
                let total: usize = parts.iter().map(|(_, b)| b.ncols()).sum();
                assert_eq!(total, space.dimension);
                for (jp, basis) in parts {
                    assert_eq!((jp.twice() - space.j.twice()).abs(), 1);
                    assert_eq!(basis.ncols() as u64, multiplicity(n - 1, jp).unwrap());
                    assert_eq!(commutant_dimension(&basis, &sub).unwrap(), 1, "n={n} j={} m={} j'={jp}", space.j, space.m);
                }
            }
        }
    }

    #[test]
    fn random_invariant_examples() {
        let o = random_invariant_observable(2, 11).unwrap();
        assert!(is_collective(&o, 2, 1e-10).unwrap());

        let o = random_invariant_observable(3, 7).unwrap();
        assert!(count_distinct_eigenvalues(&o, o.default_tolerance()).unwrap() <= 6);

        let j2 = spin::total_spin_squared_on(3, 3).unwrap();
        let back = project_to_commutant(&j2, 3).unwrap();
        assert!(max_abs(&(back.matrix() - &j2)) <= 1e-10);

        assert!(random_invariant_observable(9, 0).is_err());
        assert!(random_invariant_observable(0, 0).is_err());
    }

    #[test]
    fn orbit_average_equals_group_enumeration() {
        for (n, seed) in [(3, 1), (4, 2)] {
            let dim = 1 << n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = ComplexMatrix::from_fn(dim, dim, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
            let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
            let fast = project_to_commutant(&h, n).unwrap();
            let slow = project_to_commutant_by_enumeration(&h, n).unwrap();
            assert!(max_abs(&(fast.matrix() - slow)) < 1e-12);
        }
    }

    #[test]
    fn distinct_eigenvalue_examples() {
        for n in 1..=4 {
            let id = HermitianObservable::new(ComplexMatrix::identity(1 << n, 1 << n)).unwrap();
            assert_eq!(count_distinct_eigenvalues(&id, 1e-8).unwrap(), 1);
        }
        for (n, expected) in [(4, 9), (5, 12)] {
            let o = collective_observable(n, epsilon_for(n)).unwrap();
            assert_eq!(count_distinct_eigenvalues(&o, o.default_tolerance()).unwrap(), expected);
        }
    }

    #[test]
    fn spin_label_recovery() {
        assert_eq!(spin_from_casimir(0.75).unwrap(), HalfInt::from_twice(1));
        assert_eq!(spin_from_casimir(6.0).unwrap(), HalfInt::from_int(2));
        assert!(spin_from_casimir(1.0).is_err());
    }
}
