//! Qubit channels: Pauli operators, the depolarizing map, the Clifford
//! twirl that reduces an arbitrary qubit channel to a depolarizing one, and
//! random channel generation for tests and fuzzing.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{QicError, Result};
use crate::linalg::{haar_random_unitary, BellIndex, ComplexMatrix, DensityOperator, PureState};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Two-bit Pauli label: (0,0) = I, (0,1) = sigma_1, (1,0) = sigma_2,
/// (1,1) = sigma_3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PauliIndex {
    pub x0: u8,
    pub x1: u8,
}

impl PauliIndex {
    pub fn new(x0: u8, x1: u8) -> Self {
        assert!(x0 <= 1 && x1 <= 1, "Pauli bits must be 0 or 1");
        Self { x0, x1 }
    }

    pub const ALL: [PauliIndex; 4] = [
        PauliIndex { x0: 0, x1: 0 },
        PauliIndex { x0: 0, x1: 1 },
        PauliIndex { x0: 1, x1: 0 },
        PauliIndex { x0: 1, x1: 1 },
    ];

    /// Ordinal 0..4 in the (x0, x1) lexicographic order.
    pub fn ordinal(self) -> usize {
        (self.x0 as usize) * 2 + self.x1 as usize
    }

    pub fn from_ordinal(i: usize) -> Self {
        assert!(i < 4);
        Self {
            x0: (i >> 1) as u8,
            x1: (i & 1) as u8,
        }
    }

    /// Bitwise XOR; up to phase, sigma_a sigma_b = sigma_{a XOR b}.
    pub fn xor(self, other: Self) -> Self {
        Self {
            x0: self.x0 ^ other.x0,
            x1: self.x1 ^ other.x1,
        }
    }

    pub fn is_identity(self) -> bool {
        self.x0 == 0 && self.x1 == 0
    }
}

/// The 2x2 Pauli matrix selected by a [`PauliIndex`].
pub fn pauli<T: Scalar>(idx: PauliIndex) -> ComplexMatrix<T> {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let mut m = ComplexMatrix::zeros(2, 2);
    match (idx.x0, idx.x1) {
        (0, 0) => {
            m.set(0, 0, one);
            m.set(1, 1, one);
        }
        (0, 1) => {
            m.set(0, 1, one);
            m.set(1, 0, one);
        }
        (1, 0) => {
            m.set(0, 1, -i);
            m.set(1, 0, i);
        }
        (1, 1) => {
            m.set(0, 0, one);
            m.set(1, 1, -one);
        }
        _ => unreachable!(),
    }
    m
}

/// Completely positive trace-preserving map as a Kraus operator list.
#[derive(Debug, Clone)]
pub struct KrausChannel<T> {
    kraus: Vec<ComplexMatrix<T>>,
    input_dim: usize,
    output_dim: usize,
}

impl<T: Scalar> KrausChannel<T> {
    /// Validates the completeness relation sum K†K = I.
    pub fn new(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QicError::InvalidParameter("empty Kraus list".into()));
        }
        let input_dim = kraus[0].cols();
        let output_dim = kraus[0].rows();
        for k in &kraus {
            if k.cols() != input_dim || k.rows() != output_dim {
                return Err(QicError::DimensionMismatch(
                    "inconsistent Kraus operator shapes".into(),
                ));
            }
        }
        let mut sum = ComplexMatrix::zeros(input_dim, input_dim);
        for k in &kraus {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(input_dim));
        if residual > T::psd_tol() {
            return Err(QicError::NotCptp(residual.as_f64()));
        }
        Ok(Self {
            kraus,
            input_dim,
            output_dim,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
            input_dim: dim,
            output_dim: dim,
        }
    }

    pub fn from_unitary(u: ComplexMatrix<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn kraus_operators(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Applies the channel to one subsystem of a density operator.
    pub fn apply(&self, rho: &DensityOperator<T>, target: usize) -> Result<DensityOperator<T>> {
        if target >= rho.dims().len() {
            return Err(QicError::IndexOutOfRange {
                index: target,
                count: rho.dims().len(),
            });
        }
        if rho.dims()[target] != self.input_dim {
            return Err(QicError::DimensionMismatch(format!(
                "channel input dim {} vs subsystem dim {}",
                self.input_dim,
                rho.dims()[target]
            )));
        }
        rho.kraus_apply(&self.kraus, target)
    }
}

/// Depolarizing parameter, constrained to the interval [1/4, 1] where the
/// value equals the channel's singlet fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepolarizingParam<T>(T);

impl<T: Scalar> DepolarizingParam<T> {
    pub fn new(lambda: T) -> Result<Self> {
        let quarter = T::from_f64(0.25);
        // Absorb floating-point noise at the endpoints.
        let slack = T::validation_tol();
        if lambda < quarter - slack || lambda > T::one() + slack {
            return Err(QicError::InvalidParameter(format!(
                "depolarizing parameter {lambda} outside [1/4, 1]"
            )));
        }
        Ok(Self(lambda.max(quarter).min(T::one())))
    }

    pub fn lambda(self) -> T {
        self.0
    }
}

/// Depolarizing channel with singlet fidelity `lambda`:
/// Kraus set { sqrt(lambda) I, sqrt((1-lambda)/3) sigma_i }.
pub fn depolarizing<T: Scalar>(param: DepolarizingParam<T>) -> KrausChannel<T> {
    let lambda = param.lambda();
    let third = (T::one() - lambda) / T::from_f64(3.0);
    let mut kraus = vec![pauli::<T>(PauliIndex::new(0, 0)).scaled_re(lambda.sqrt())];
    for idx in [
        PauliIndex::new(0, 1),
        PauliIndex::new(1, 0),
        PauliIndex::new(1, 1),
    ] {
        kraus.push(pauli::<T>(idx).scaled_re(third.sqrt()));
    }
    KrausChannel::new(kraus).expect("depolarizing Kraus set is trace preserving")
}

/// Bell-diagonal two-qubit state with weight `p` on the singlet and the
/// remainder spread evenly over the other three Bell states. For
/// p in [1/4, 1] this is what the depolarizing channel produces on one half
/// of a singlet.
pub fn singlet_weight_state<T: Scalar>(p: T) -> Result<DensityOperator<T>> {
    if p < T::zero() || p > T::one() {
        return Err(QicError::InvalidParameter(format!(
            "singlet weight {p} outside [0, 1]"
        )));
    }
    let rest = (T::one() - p) / T::from_f64(3.0);
    let mut mat = PureState::<T>::bell(BellIndex::PsiMinus)
        .to_density()
        .matrix()
        .scaled_re(p);
    for b in [BellIndex::PsiPlus, BellIndex::PhiPlus, BellIndex::PhiMinus] {
        mat = mat.add(&PureState::<T>::bell(b).to_density().matrix().scaled_re(rest));
    }
    Ok(DensityOperator::new_unchecked(mat, vec![2, 2]))
}

/// Singlet fidelity of a qubit channel: ⟨Psi-| (I ⊗ ch)(Psi-) |Psi-⟩.
pub fn singlet_fidelity<T: Scalar>(ch: &KrausChannel<T>) -> Result<T> {
    if ch.input_dim() != 2 || ch.output_dim() != 2 {
        return Err(QicError::DimensionMismatch(
            "singlet fidelity requires a qubit-to-qubit channel".into(),
        ));
    }
    let singlet = PureState::<T>::bell(BellIndex::PsiMinus);
    let out = ch.apply(&singlet.to_density(), 1)?;
    out.pure_fidelity(&singlet)
}

/// The 24 single-qubit Clifford unitaries (up to global phase), generated by
/// closing {H, S} under multiplication. They form a unitary 2-design.
pub fn single_qubit_cliffords<T: Scalar>() -> Vec<ComplexMatrix<T>> {
    let h = {
        let s = T::from_f64(std::f64::consts::FRAC_1_SQRT_2);
        ComplexMatrix::from_fn(2, 2, |r, c| {
            let sign = if r == 1 && c == 1 { -s } else { s };
            Complex::new(sign, T::zero())
        })
    };
    let s_gate = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) => Complex::new(T::one(), T::zero()),
        (1, 1) => Complex::new(T::zero(), T::one()),
        _ => Complex::new(T::zero(), T::zero()),
    });

    let canon = |m: &ComplexMatrix<T>| -> Vec<(i64, i64)> {
        // Strip global phase: rotate so the first entry of largest modulus is
        // real positive, then quantize entries for dedup.
        let mut pivot = Complex::new(T::one(), T::zero());
        let mut best = T::from_f64(-1.0);
        for r in 0..2 {
            for c in 0..2 {
                let v = m.get(r, c);
                if v.norm() > best + T::from_f64(1e-9) {
                    best = v.norm();
                    pivot = v;
                }
            }
        }
        let phase = pivot.unscale(pivot.norm());
        let mut key = Vec::with_capacity(4);
        for r in 0..2 {
            for c in 0..2 {
                let v = m.get(r, c) * phase.conj();
                let scale = T::from_f64(1e6);
                key.push((
                    (v.re * scale).round().as_f64() as i64,
                    (v.im * scale).round().as_f64() as i64,
                ));
            }
        }
        key
    };

    let mut group: Vec<ComplexMatrix<T>> = vec![ComplexMatrix::identity(2)];
    let mut keys = vec![canon(&group[0])];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for g in &frontier {
            for gen in [&h, &s_gate] {
                let prod = gen.matmul(g);
                let key = canon(&prod);
                if !keys.contains(&key) {
                    keys.push(key);
                    group.push(prod.clone());
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    assert_eq!(group.len(), 24, "single-qubit Clifford group has order 24");
    group
}

/// Averages a qubit channel over conjugation by the 24 single-qubit
/// Cliffords. Because the Cliffords form a unitary 2-design, this equals the
/// Haar twirl exactly, and the result is a depolarizing channel.
pub fn clifford_twirled_channel<T: Scalar>(ch: &KrausChannel<T>) -> Result<KrausChannel<T>> {
    if ch.input_dim() != 2 || ch.output_dim() != 2 {
        return Err(QicError::DimensionMismatch(
            "twirl requires a qubit-to-qubit channel".into(),
        ));
    }
    let cliffords = single_qubit_cliffords::<T>();
    let weight = T::from_f64(1.0 / 24.0).sqrt();
    let mut kraus = Vec::with_capacity(cliffords.len() * ch.kraus_operators().len());
    for u in &cliffords {
        let u_dag = u.adjoint();
        for k in ch.kraus_operators() {
            kraus.push(u_dag.matmul(k).matmul(u).scaled_re(weight));
        }
    }
    KrausChannel::new(kraus)
}

/// Depolarizing parameter of the unique covariant channel obtained by
/// twirling `ch`; equals the singlet fidelity of `ch` clipped to [1/4, 1].
/// Both routes (exact 2-design average and the fidelity shortcut) are
/// computed and must agree; their agreement is asserted on every call.
pub fn twirl<T: Scalar>(ch: &KrausChannel<T>) -> Result<DepolarizingParam<T>> {
    let averaged = clifford_twirled_channel(ch)?;
    let lambda_design = singlet_fidelity(&averaged)?;
    let lambda_shortcut = singlet_fidelity(ch)?;
    let agreement = (lambda_design - lambda_shortcut).abs();
    assert!(
        agreement <= T::psd_tol(),
        "2-design average and singlet-fidelity shortcut disagree by {agreement}"
    );
    let clipped = lambda_design.max(T::from_f64(0.25)).min(T::one());
    DepolarizingParam::new(clipped)
}

/// Exact average of |Psi+_r⟩⟨Psi+_r| over the Bloch sphere, computed with the
/// 6-point octahedral spherical 2-design {±x, ±y, ±z}. Equals
/// (I - |Psi-⟩⟨Psi-|) / 3.
pub fn haar_average_psi_plus<T: Scalar>() -> DensityOperator<T> {
    let axes: [crate::linalg::BlochVector<T>; 6] = [
        crate::linalg::BlochVector::plus_x(),
        crate::linalg::BlochVector::plus_x().antipode(),
        crate::linalg::BlochVector::plus_y(),
        crate::linalg::BlochVector::plus_y().antipode(),
        crate::linalg::BlochVector::plus_z(),
        crate::linalg::BlochVector::plus_z().antipode(),
    ];
    let mut acc = ComplexMatrix::zeros(4, 4);
    for r in &axes {
        acc = acc.add(psi_plus_projector(r).matrix());
    }
    DensityOperator::new_unchecked(acc.scaled_re(T::from_f64(1.0 / 6.0)), vec![2, 2])
}

/// |Psi+_r⟩⟨Psi+_r| for the symmetric Bell state built on the basis aligned
/// with `r`: (|↑_r ↓_r⟩ + |↓_r ↑_r⟩)/√2.
pub fn psi_plus_projector<T: Scalar>(r: &crate::linalg::BlochVector<T>) -> DensityOperator<T> {
    let up = crate::linalg::bloch_to_state(r);
    let down = crate::linalg::bloch_to_state(&r.antipode());
    let ud = up.tensor(&down);
    let du = down.tensor(&up);
    let h = T::from_f64(std::f64::consts::FRAC_1_SQRT_2);
    let amps: Vec<Complex<T>> = ud
        .amplitudes()
        .iter()
        .zip(du.amplitudes())
        .map(|(a, b)| (a + b).scale(h))
        .collect();
    PureState::new_unchecked(amps, vec![2, 2]).to_density()
}

/// Random CPTP channel via a Haar-random isometry: embed the input in a
/// system-plus-environment space (environment of at least two qubits), apply
/// a Haar unitary, trace out the environment.
pub fn random_channel<T: Scalar>(
    input_dim: usize,
    output_dim: usize,
    rng: &mut RngStream,
) -> KrausChannel<T> {
    let mut env_dim = 4;
    while output_dim * env_dim < input_dim {
        env_dim *= 2;
    }
    let total = output_dim * env_dim;
    let u = haar_random_unitary::<T>(total, rng);
    // Isometry columns: V|c⟩ = U (|c⟩ ⊗ |0⟩_env); Kraus_e[r][c] = U[(r, e), c].
    let mut kraus = Vec::with_capacity(env_dim);
    for e in 0..env_dim {
        let mut k = ComplexMatrix::zeros(output_dim, input_dim);
        for r in 0..output_dim {
            for c in 0..input_dim {
                k.set(r, c, u.get(r * env_dim + e, c));
            }
        }
        kraus.push(k);
    }
    KrausChannel::new(kraus).expect("isometry compression yields a CPTP channel")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BlochVector;

    #[test]
    fn pauli_matrices_match_convention() {
        let i2 = pauli::<f64>(PauliIndex::new(0, 0));
        assert!(i2.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let x = pauli::<f64>(PauliIndex::new(0, 1));
        assert_eq!(x.get(0, 1).re, 1.0);
        assert_eq!(x.get(1, 0).re, 1.0);
        assert_eq!(x.get(0, 0).re, 0.0);

        let z = pauli::<f64>(PauliIndex::new(1, 1));
        assert_eq!(z.get(0, 0).re, 1.0);
        assert_eq!(z.get(1, 1).re, -1.0);
    }

    #[test]
    fn paulis_are_hermitian_and_unitary() {
        for idx in PauliIndex::ALL {
            let p = pauli::<f64>(idx);
            assert!(p.hermitian_defect() < 1e-15);
            let prod = p.adjoint().matmul(&p);
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn depolarizing_identity_limit() {
        let ch = depolarizing(DepolarizingParam::new(1.0f64).unwrap());
        let mut rng = RngStream::new(4);
        let rho = DensityOperator::<f64>::random_mixed(&[2], &mut rng);
        let out = ch.apply(&rho, 0).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn fully_depolarizing_on_singlet_half() {
        let ch = depolarizing(DepolarizingParam::new(0.25f64).unwrap());
        let singlet = PureState::<f64>::bell(BellIndex::PsiMinus);
        let out = ch.apply(&singlet.to_density(), 1).unwrap();
        let expect = DensityOperator::<f64>::maximally_mixed(&[2, 2]);
        assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-12);
        assert!((out.pure_fidelity(&singlet).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_lambda_point_seven_weights() {
        let ch = depolarizing(DepolarizingParam::new(0.7f64).unwrap());
        let singlet = PureState::<f64>::bell(BellIndex::PsiMinus);
        let out = ch.apply(&singlet.to_density(), 1).unwrap();
        assert!((out.pure_fidelity(&singlet).unwrap() - 0.7).abs() < 1e-12);
        // Bell-diagonal weights (0.7, 0.1, 0.1, 0.1).
        for (b, w) in BellIndex::ALL.iter().zip([0.7, 0.1, 0.1, 0.1]) {
            let f = out.pure_fidelity(&PureState::bell(*b)).unwrap();
            assert!((f - w).abs() < 1e-12, "{b:?}: {f}");
        }
        // Eigenvalues descending: (0.7, 0.1, 0.1, 0.1).
        let eigs = out.matrix().hermitian_eigenvalues().unwrap();
        assert!((eigs[0] - 0.7).abs() < 1e-12);
        for e in &eigs[1..] {
            assert!((e - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_param_rejects_out_of_range() {
        assert!(DepolarizingParam::new(0.2f64).is_err());
        assert!(DepolarizingParam::new(1.01f64).is_err());
    }

    #[test]
    fn apply_channel_quarter_sends_everything_to_mixed() {
        let ch = depolarizing(DepolarizingParam::new(0.25f64).unwrap());
        let mut rng = RngStream::new(6);
        let rho = DensityOperator::<f64>::random_mixed(&[2], &mut rng);
        let out = ch.apply(&rho, 0).unwrap();
        let expect = DensityOperator::<f64>::maximally_mixed(&[2]);
        assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-12);
    }

    #[test]
    fn sigma_x_conjugation_maps_singlet_to_phi_minus() {
        let ch = KrausChannel::from_unitary(pauli::<f64>(PauliIndex::new(0, 1))).unwrap();
        let singlet = PureState::<f64>::bell(BellIndex::PsiMinus).to_density();
        let out = ch.apply(&singlet, 1).unwrap();
        let target = PureState::<f64>::bell(BellIndex::PhiMinus);
        assert!((out.pure_fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_channel_preserves_trace() {
        let mut rng = RngStream::new(8);
        for _ in 0..20 {
            let ch = random_channel::<f64>(2, 2, &mut rng);
            let rho = DensityOperator::<f64>::random_mixed(&[2, 2], &mut rng);
            let out = ch.apply(&rho, rng.below(2)).unwrap();
            let tr = out.matrix().trace();
            assert!((tr.re - 1.0).abs() < 1e-10 && tr.im.abs() < 1e-10);
        }
    }

    #[test]
    fn clifford_group_closure_count() {
        let group = single_qubit_cliffords::<f64>();
        assert_eq!(group.len(), 24);
        for u in &group {
            let prod = u.adjoint().matmul(u);
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn twirl_of_identity_and_fully_depolarizing() {
        let id = KrausChannel::<f64>::identity(2);
        assert!((twirl(&id).unwrap().lambda() - 1.0).abs() < 1e-12);
        let dep = depolarizing(DepolarizingParam::new(0.25f64).unwrap());
        assert!((twirl(&dep).unwrap().lambda() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn twirl_fixes_depolarizing_channels() {
        for lambda in [0.25f64, 0.4, 0.7, 1.0] {
            let ch = depolarizing(DepolarizingParam::new(lambda).unwrap());
            let lam = twirl(&ch).unwrap().lambda();
            assert!((lam - lambda).abs() < 1e-9, "lambda {lambda} -> {lam}");
        }
    }

    #[test]
    fn haar_average_matches_closed_form() {
        let avg = haar_average_psi_plus::<f64>();
        assert!((avg.matrix().trace().re - 1.0).abs() < 1e-14);
        let singlet = PureState::<f64>::bell(BellIndex::PsiMinus).to_density();
        let expect = ComplexMatrix::identity(4)
            .sub(singlet.matrix())
            .scaled_re(1.0 / 3.0);
        assert!(avg.matrix().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn psi_plus_projector_at_plus_z_is_bell_psi_plus() {
        let proj = psi_plus_projector(&BlochVector::<f64>::plus_z());
        let target = PureState::<f64>::bell(BellIndex::PsiPlus);
        assert!((proj.pure_fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_channels_are_cptp_by_construction() {
        let mut rng = RngStream::new(12);
        for _ in 0..10 {
            let ch = random_channel::<f64>(4, 3, &mut rng);
            assert_eq!(ch.input_dim(), 4);
            assert_eq!(ch.output_dim(), 3);
        }
    }
}
