//! Entropic quantities: von Neumann entropy, binary entropy, quantum mutual
//! information, and the closed-form entropy of Bell-diagonal states with a
//! given singlet weight. All logarithms are base 2; the unit is bits.

use serde::Serialize;

use crate::error::{QicError, Result};
use crate::linalg::DensityOperator;
use crate::scalar::Scalar;

/// A labelled entropy value together with the dims it was computed on.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport<T> {
    pub quantity: String,
    pub value: T,
    pub dims: Vec<usize>,
}

impl<T: Scalar> EntropyReport<T> {
    pub fn new(quantity: impl Into<String>, value: T, dims: &[usize]) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            dims: dims.to_vec(),
        }
    }
}

/// Von Neumann entropy in bits. Eigenvalues in `[-psd_tol, 0)` are clamped
/// to zero before the `-λ log2 λ` sum.
pub fn von_neumann_entropy<T: Scalar>(rho: &DensityOperator<T>) -> T {
    let eigs = rho
        .matrix()
        .hermitian_eigenvalues()
        .expect("density operator is Hermitian by construction");
    let ln2 = T::from_f64(std::f64::consts::LN_2);
    let mut acc = T::zero();
    for lam in eigs {
        let lam = lam.max(T::zero()).min(T::one());
        if lam > T::zero() {
            acc -= lam * (lam.ln() / ln2);
        }
    }
    acc
}

/// Binary entropy h(x) = -x log2 x - (1-x) log2 (1-x).
pub fn binary_entropy<T: Scalar>(x: T) -> Result<T> {
    if x < T::zero() || x > T::one() {
        return Err(QicError::InvalidParameter(format!(
            "binary entropy argument {x} outside [0, 1]"
        )));
    }
    let ln2 = T::from_f64(std::f64::consts::LN_2);
    let term = |p: T| {
        if p > T::zero() {
            -p * (p.ln() / ln2)
        } else {
            T::zero()
        }
    };
    Ok(term(x) + term(T::one() - x))
}

/// Quantum mutual information I(L:R) = S(L) + S(R) - S(LR) across the
/// bipartition that puts subsystems `0..split` on the left.
pub fn mutual_information<T: Scalar>(rho: &DensityOperator<T>, split: usize) -> Result<T> {
    let count = rho.dims().len();
    if split == 0 || split >= count {
        return Err(QicError::InvalidPartition { split, count });
    }
    let left_idx: Vec<usize> = (0..split).collect();
    let right_idx: Vec<usize> = (split..count).collect();
    let left = rho.partial_trace(&left_idx)?;
    let right = rho.partial_trace(&right_idx)?;
    Ok(von_neumann_entropy(&left) + von_neumann_entropy(&right) - von_neumann_entropy(rho))
}

/// Entropy of the Bell-diagonal two-qubit state with weight `p` on the
/// singlet and the remaining weight spread evenly:
/// h(p) + (1 - p) log2 3.
pub fn omega_entropy<T: Scalar>(p: T) -> Result<T> {
    let log2_3 = T::from_f64(3.0).ln() / T::from_f64(std::f64::consts::LN_2);
    Ok(binary_entropy(p)? + (T::one() - p) * log2_3)
}
