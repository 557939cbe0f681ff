//! Bell measurement, quantum teleportation over a shared singlet, and
//! superdense coding, simulated exactly on density operators. Every sampling
//! operation has a deterministic sibling returning the full branch list.
//!
//! Teleportation outcome convention: the Bell outcome on (source, helper) is
//! reported as the [`PauliIndex`] `x` for which
//! `(I ⊗ sigma_x)|Psi-⟩` equals the measured Bell state:
//!
//! | Bell outcome | x      | correction |
//! |--------------|--------|------------|
//! | Psi-         | (0,0)  | I          |
//! | Phi-         | (0,1)  | sigma_1    |
//! | Phi+         | (1,0)  | sigma_2    |
//! | Psi+         | (1,1)  | sigma_3    |
//!
//! With this labelling the teleported qubit carries the Pauli error
//! `sigma_x`, so the correction is `sigma_x` itself with no extra frame
//! change. The table is re-derived by brute force in the tests.

use crate::channels::{pauli, PauliIndex};
use crate::error::{QicError, Result};
use crate::linalg::{
    embed_operator, embed_two_site_operator, BellIndex, BlochVector, DensityOperator, PureState,
};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Outcome of a projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementOutcome {
    Bell(BellIndex),
    /// 0 = aligned with the basis vector, 1 = anti-aligned.
    Basis(u8),
}

/// Sampled measurement result with its Born probability and the collapsed
/// global state.
#[derive(Debug, Clone)]
pub struct MeasurementRecord<T> {
    pub outcome: MeasurementOutcome,
    pub probability: T,
    pub post_state: DensityOperator<T>,
}

/// Branches below this probability are dropped from deterministic branch
/// lists; their post-states are not defined.
fn branch_cutoff<T: Scalar>() -> T {
    T::from_f64(1e-12)
}

/// Born probabilities of the four Bell outcomes on a pair of qubit
/// subsystems; sums to 1.
pub fn bell_probabilities<T: Scalar>(
    rho: &DensityOperator<T>,
    pair: (usize, usize),
) -> Result<[T; 4]> {
    check_qubit(rho, pair.0)?;
    check_qubit(rho, pair.1)?;
    let marg = rho.partial_trace(&[pair.0, pair.1])?;
    let mut probs = [T::zero(); 4];
    for (i, b) in BellIndex::ALL.iter().enumerate() {
        probs[i] = marg.pure_fidelity(&PureState::bell(*b))?;
    }
    Ok(probs)
}

fn bell_collapse<T: Scalar>(
    rho: &DensityOperator<T>,
    pair: (usize, usize),
    which: BellIndex,
    prob: T,
) -> Result<DensityOperator<T>> {
    let proj = PureState::<T>::bell(which).to_density();
    let full = embed_two_site_operator(proj.matrix(), rho.dims(), pair)?;
    let collapsed = full.matmul(rho.matrix()).matmul(&full);
    Ok(DensityOperator::new_unchecked(
        collapsed.scaled_re(T::one() / prob),
        rho.dims().to_vec(),
    ))
}

/// Deterministic Bell-measurement branches: (outcome, probability, post
/// state), omitting branches of negligible probability.
pub fn bell_branches<T: Scalar>(
    rho: &DensityOperator<T>,
    pair: (usize, usize),
) -> Result<Vec<(BellIndex, T, DensityOperator<T>)>> {
    let probs = bell_probabilities(rho, pair)?;
    let mut out = Vec::new();
    for (i, b) in BellIndex::ALL.iter().enumerate() {
        if probs[i] <= branch_cutoff::<T>() {
            continue;
        }
        out.push((*b, probs[i], bell_collapse(rho, pair, *b, probs[i])?));
    }
    Ok(out)
}

/// Samples a Bell measurement on two qubit subsystems.
pub fn bell_measure<T: Scalar>(
    rho: &DensityOperator<T>,
    pair: (usize, usize),
    rng: &mut RngStream,
) -> Result<MeasurementRecord<T>> {
    let probs = bell_probabilities(rho, pair)?;
    let pick = rng.sample_index(&probs);
    let which = BellIndex::ALL[pick];
    Ok(MeasurementRecord {
        outcome: MeasurementOutcome::Bell(which),
        probability: probs[pick],
        post_state: bell_collapse(rho, pair, which, probs[pick])?,
    })
}

/// Born probabilities of measuring `target` in the basis
/// {|↑_r⟩, |↓_r⟩}.
pub fn basis_probabilities<T: Scalar>(
    rho: &DensityOperator<T>,
    target: usize,
    basis: &BlochVector<T>,
) -> Result<[T; 2]> {
    check_qubit(rho, target)?;
    let marg = rho.partial_trace(&[target])?;
    let up = crate::linalg::bloch_to_state(basis);
    let p_up = marg.pure_fidelity(&up)?;
    let down = crate::linalg::bloch_to_state(&basis.antipode());
    let p_down = marg.pure_fidelity(&down)?;
    Ok([p_up, p_down])
}

fn basis_collapse<T: Scalar>(
    rho: &DensityOperator<T>,
    target: usize,
    basis: &BlochVector<T>,
    outcome: u8,
    prob: T,
) -> Result<DensityOperator<T>> {
    let axis = if outcome == 0 {
        *basis
    } else {
        basis.antipode()
    };
    let proj = crate::linalg::bloch_to_state(&axis).to_density();
    let full = embed_operator(proj.matrix(), rho.dims(), target)?;
    let collapsed = full.matmul(rho.matrix()).matmul(&full);
    Ok(DensityOperator::new_unchecked(
        collapsed.scaled_re(T::one() / prob),
        rho.dims().to_vec(),
    ))
}

/// Deterministic branches of a basis measurement.
pub fn basis_branches<T: Scalar>(
    rho: &DensityOperator<T>,
    target: usize,
    basis: &BlochVector<T>,
) -> Result<Vec<(u8, T, DensityOperator<T>)>> {
    let probs = basis_probabilities(rho, target, basis)?;
    let mut out = Vec::new();
    for (i, p) in probs.iter().enumerate() {
        if *p <= branch_cutoff::<T>() {
            continue;
        }
        out.push((
            i as u8,
            *p,
            basis_collapse(rho, target, basis, i as u8, *p)?,
        ));
    }
    Ok(out)
}

/// Samples a projective measurement of one qubit along a Bloch axis.
pub fn basis_measure<T: Scalar>(
    rho: &DensityOperator<T>,
    target: usize,
    basis: &BlochVector<T>,
    rng: &mut RngStream,
) -> Result<MeasurementRecord<T>> {
    let probs = basis_probabilities(rho, target, basis)?;
    let pick = rng.sample_index(&probs) as u8;
    Ok(MeasurementRecord {
        outcome: MeasurementOutcome::Basis(pick),
        probability: probs[pick as usize],
        post_state: basis_collapse(rho, target, basis, pick, probs[pick as usize])?,
    })
}

/// Pauli label of a Bell outcome under the singlet teleportation
/// convention (see module docs).
pub fn bell_outcome_pauli(outcome: BellIndex) -> PauliIndex {
    match outcome {
        BellIndex::PsiMinus => PauliIndex::new(0, 0),
        BellIndex::PhiMinus => PauliIndex::new(0, 1),
        BellIndex::PhiPlus => PauliIndex::new(1, 0),
        BellIndex::PsiPlus => PauliIndex::new(1, 1),
    }
}

fn check_singlet_pair<T: Scalar>(
    rho: &DensityOperator<T>,
    pair: (usize, usize),
) -> Result<()> {
    let marg = rho.partial_trace(&[pair.0, pair.1])?;
    let fid = marg.pure_fidelity(&PureState::bell(BellIndex::PsiMinus))?;
    if (fid - T::one()).abs() > T::psd_tol() {
        return Err(QicError::WrongResourceState(fid.as_f64()));
    }
    Ok(())
}

/// Teleports the qubit at `source` through the singlet shared on
/// `pair = (helper, target)`: Bell-measures (source, helper) and returns the
/// two-bit outcome together with the post-measurement global state. The
/// target qubit then carries the source state up to the Pauli error
/// `sigma_outcome`; applying `sigma_outcome` recovers it exactly.
pub fn teleport<T: Scalar>(
    rho: &DensityOperator<T>,
    source: usize,
    pair: (usize, usize),
    rng: &mut RngStream,
) -> Result<(PauliIndex, DensityOperator<T>)> {
    check_singlet_pair(rho, pair)?;
    let record = bell_measure(rho, (source, pair.0), rng)?;
    let MeasurementOutcome::Bell(b) = record.outcome else {
        unreachable!("bell_measure returns Bell outcomes");
    };
    Ok((bell_outcome_pauli(b), record.post_state))
}

/// All four teleportation branches: (outcome, probability, post state).
pub fn teleport_branches<T: Scalar>(
    rho: &DensityOperator<T>,
    source: usize,
    pair: (usize, usize),
) -> Result<Vec<(PauliIndex, T, DensityOperator<T>)>> {
    check_singlet_pair(rho, pair)?;
    let branches = bell_branches(rho, (source, pair.0))?;
    Ok(branches
        .into_iter()
        .map(|(b, p, post)| (bell_outcome_pauli(b), p, post))
        .collect())
}

/// Superdense encoding: applies `sigma_bits` to the first qubit of a shared
/// |Phi+⟩ pair. The four outputs are the four (orthonormal) Bell states.
pub fn superdense_encode<T: Scalar>(
    bits: PauliIndex,
    shared_pair: &DensityOperator<T>,
) -> Result<DensityOperator<T>> {
    if shared_pair.dims() != [2, 2] {
        return Err(QicError::DimensionMismatch(
            "superdense coding needs a two-qubit shared pair".into(),
        ));
    }
    let fid = shared_pair.pure_fidelity(&PureState::bell(BellIndex::PhiPlus))?;
    if (fid - T::one()).abs() > T::psd_tol() {
        return Err(QicError::WrongResourceState(fid.as_f64()));
    }
    shared_pair.conjugate_embedded(&pauli(bits), 0)
}

/// Superdense decoding: a Bell measurement distinguishing the four encoded
/// states. Fails if the input is not within tolerance of a Bell state.
pub fn superdense_decode<T: Scalar>(rho: &DensityOperator<T>) -> Result<PauliIndex> {
    if rho.dims() != [2, 2] {
        return Err(QicError::DimensionMismatch(
            "superdense decoding needs a two-qubit state".into(),
        ));
    }
    let probs = bell_probabilities(rho, (0, 1))?;
    for (i, b) in BellIndex::ALL.iter().enumerate() {
        if (probs[i] - T::one()).abs() <= T::psd_tol() {
            // Inverse of the encoding map (sigma_bits ⊗ I)|Phi+⟩.
            return Ok(match b {
                BellIndex::PhiPlus => PauliIndex::new(0, 0),
                BellIndex::PsiPlus => PauliIndex::new(0, 1),
                BellIndex::PsiMinus => PauliIndex::new(1, 0),
                BellIndex::PhiMinus => PauliIndex::new(1, 1),
            });
        }
    }
    Err(QicError::DecodeFailure)
}

fn check_qubit<T: Scalar>(rho: &DensityOperator<T>, index: usize) -> Result<()> {
    if index >= rho.dims().len() {
        return Err(QicError::IndexOutOfRange {
            index,
            count: rho.dims().len(),
        });
    }
    if rho.dims()[index] != 2 {
        return Err(QicError::NonQubitSubsystem(index));
    }
    Ok(())
}
