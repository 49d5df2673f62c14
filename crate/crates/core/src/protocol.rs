//! Canonical phase-estimation protocol built from the eigenbasis of an
//! arbitrary observable.
//!
//! The protocol lives on the span of `M` eigenvectors `|λ_1⟩ … |λ_M⟩`, one per
//! distinct eigenvalue. Its generator is `H = Σ_k k |λ̃_k⟩⟨λ̃_k|` with
//! `|λ̃_k⟩ = Σ_j F[j,k] |λ_j⟩` and `F` the unitary Fourier matrix. The probe
//! starts in `|λ_1⟩`, evolves under `e^{iHφ}` and is measured in the
//! eigenbasis.
//!
//! With this sign convention the amplitude on `|λ_j⟩` peaks at
//! `j ≡ −Mφ/2π (mod M)`, so outcome `j` is assigned the estimate
//! `2π r / M` with `r = (−j) mod M`. Probabilities in [`ProtocolRun`] are
//! indexed by the estimate index `r`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::hilbert::{
    cluster_spectrum, evolve, fourier_unitary, ComplexMatrix, HermitianObservable, Spectrum, StateVector,
};

/// Orthonormality tolerance on the protocol bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Canonical-protocol data for one observable.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    m: usize,
    eigenvalues: Vec<f64>,
    eigenbasis: ComplexMatrix,
    fourier_basis: ComplexMatrix,
    hamiltonian: HermitianObservable,
    initial_state: StateVector,
}

impl ProtocolSpec {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Representative eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `d × M` matrix whose columns are `|λ_j⟩`.
    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.eigenbasis
    }

    /// `d × M` matrix whose columns are `|λ̃_k⟩`.
    pub fn fourier_basis(&self) -> &ComplexMatrix {
        &self.fourier_basis
    }

    /// Generator on the protocol subspace, in eigenbasis coordinates.
    pub fn hamiltonian(&self) -> &HermitianObservable {
        &self.hamiltonian
    }

    /// Generator on the full space; zero on the complement of the protocol subspace.
    pub fn ambient_hamiltonian(&self) -> ComplexMatrix {
        &self.eigenbasis * self.hamiltonian.matrix() * self.eigenbasis.adjoint()
    }

    /// `|λ_1⟩` in the full space.
    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    /// Eigenvector index measured for estimate index `r`.
    pub fn eigen_index_of(&self, r: usize) -> usize {
        (self.m - r % self.m) % self.m
    }

    /// Largest deviation of `B†B` from the identity over both bases.
    pub fn orthonormality_deviation(&self) -> f64 {
        let id = ComplexMatrix::identity(self.m, self.m);
        let e = crate::hilbert::max_abs(&(self.eigenbasis.ad_mul(&self.eigenbasis) - &id));
        let f = crate::hilbert::max_abs(&(self.fourier_basis.ad_mul(&self.fourier_basis) - &id));
        e.max(f)
    }
}

/// Builds the protocol for `o`, using one eigenvector per eigenvalue cluster
/// at the observable's default tolerance.
pub fn build_canonical(o: &HermitianObservable) -> Result<ProtocolSpec> {
    let spectrum = o.spectrum()?;
    let clusters = cluster_spectrum(&spectrum.values, o.default_tolerance())?;
    let m = clusters.count();
    if m < 2 {
        return Err(invalid("o", format!("protocol needs at least 2 distinct eigenvalues, found {m}")));
    }
    let mut first_of_cluster = vec![usize::MAX; m];
    for (i, &c) in clusters.cluster_index_of.iter().enumerate() {
        if first_of_cluster[c] == usize::MAX {
            first_of_cluster[c] = i;
        }
    }
    let eigenbasis = spectrum.vectors.select_columns(&first_of_cluster);
    let f = fourier_unitary(m)?;
    let fourier_basis = &eigenbasis * &f;

    let k_values: Vec<f64> = (0..m).map(|k| k as f64).collect();
    let diag = ComplexMatrix::from_diagonal(&StateVector::from_iterator(
        m,
        k_values.iter().map(|&k| Complex64::new(k, 0.0)),
    ));
    let h = &f * diag * f.adjoint();
    // symmetrize away rounding before the Hermitian check
    let h = (&h + h.adjoint()).scale(0.5);
    let hamiltonian = HermitianObservable::new(h)?;
    hamiltonian.set_spectrum(Spectrum {
        values: k_values,
        vectors: f,
    });

    let initial_state = eigenbasis.column(0).into_owned();
    let spec = ProtocolSpec {
        m,
        eigenvalues: clusters.cluster_values,
        eigenbasis,
        fourier_basis,
        hamiltonian,
        initial_state,
    };
    let dev = spec.orthonormality_deviation();
    if dev > BASIS_TOL {
        return Err(crate::error::Error::NotNormalized {
            label: "protocol basis".into(),
            deviation: dev,
        });
    }
    Ok(spec)
}

/// One noiseless protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolRun {
    pub phi_true: f64,
    /// `outcome_probs[r]` is the probability of the estimate `2πr/M`.
    pub outcome_probs: Vec<f64>,
    pub map_estimate: f64,
    /// Wrapped `|φ̂ − φ|`.
    pub error: f64,
}

fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Evolves `|λ_1⟩` by `e^{iHφ}` and returns the outcome distribution.
pub fn run(spec: &ProtocolSpec, phi: f64) -> Result<ProtocolRun> {
    let m = spec.m;
    let mut start = StateVector::zeros(m);
    start[0] = Complex64::new(1.0, 0.0);
    let fin = evolve(&spec.hamiltonian, phi, &start)?;
    let outcome_probs: Vec<f64> = (0..m).map(|r| fin[spec.eigen_index_of(r)].norm_sqr()).collect();
    let r_star = outcome_probs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (r, &p)| if p > best.1 { (r, p) } else { best })
        .0;
    let map_estimate = TAU * r_star as f64 / m as f64;
    Ok(ProtocolRun {
        phi_true: phi,
        outcome_probs,
        map_estimate,
        error: wrapped_distance(map_estimate, phi),
    })
}

/// Seeded multinomial histogram over estimate indices.
pub fn sample(spec: &ProtocolSpec, phi: f64, seed: u64, shots: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(invalid("shots", "need at least one shot"));
    }
    let probs = run(spec, phi)?.outcome_probs;
    let dist = WeightedIndex::new(&probs).map_err(|e| invalid("outcome_probs", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0u64; spec.m];
    for _ in 0..shots {
        hist[dist.sample(&mut rng)] += 1;
    }
    Ok(hist)
}

/// `(2π/M, 1/M)`: absolute and relative precision of the estimate grid.
pub fn protocol_precision(spec: &ProtocolSpec) -> (f64, f64) {
    let m = spec.m as f64;
    (TAU / m, 1.0 / m)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::models::qpea_kernel;
    use crate::spin::{collective_observable, epsilon_for};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pipeline_is_unitary_and_matches_kernel(exp in 1u32..7, phi in 0.0f64..TAU) {
            let m = 1usize << exp;
            let values: Vec<f64> = (0..m).map(|k| k as f64).collect();
            let spec = build_canonical(&HermitianObservable::diagonal(&values)).unwrap();
            let run = run(&spec, phi).unwrap();
            prop_assert!((run.outcome_probs.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            for (r, p) in run.outcome_probs.iter().enumerate() {
                prop_assert!((p - qpea_kernel(m, r, phi)).abs() <= 1e-10);
            }
        }

        #[test]
        fn collective_protocol_is_unitary(n in 1usize..5, phi in 0.0f64..TAU) {
            let spec = build_canonical(&collective_observable(n, epsilon_for(n)).unwrap()).unwrap();
            let run = run(&spec, phi).unwrap();
            prop_assert!((run.outcome_probs.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }
}
