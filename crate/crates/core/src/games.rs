//! The QIC game (versions I and II), the IC-1/IC-2 games, the strategies
//! played in them, and exact plus Monte-Carlo evaluators.
//!
//! Exact evaluators iterate over the round index k (and over teleportation
//! outcomes and messages) instead of building the full 2n-qubit state; the
//! per-round systems never exceed a few qubits.

use serde::Serialize;

use crate::bounds::version_convert;
use crate::channels::{depolarizing, pauli, DepolarizingParam, PauliIndex};
use crate::error::{QicError, Result};
use crate::linalg::{BellIndex, BlochVector, ComplexMatrix, DensityOperator, PureState};
use crate::protocols::{
    basis_branches, basis_measure, basis_probabilities, bell_measure, bell_probabilities,
    superdense_decode, superdense_encode, teleport, teleport_branches, MeasurementOutcome,
};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Which version of the QIC game a configuration refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GameVersion {
    V1,
    V2,
}

/// Evaluation mode of a game run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    MonteCarlo,
}

/// Game parameters: n rounds, an m-qubit message, and sampling controls.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GameConfig {
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub version: GameVersion,
}

impl GameConfig {
    pub fn new(n: usize, m: usize, trials: u64, seed: u64, version: GameVersion) -> Result<Self> {
        if n < 1 {
            return Err(QicError::InvalidParameter("n must be at least 1".into()));
        }
        if m > n {
            return Err(QicError::InvalidParameter(format!(
                "message size m={m} exceeds n={n}"
            )));
        }
        if trials < 1 {
            return Err(QicError::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(Self {
            n,
            m,
            trials,
            seed,
            version,
        })
    }

    /// True when the message carries the whole input (m = n); such runs are
    /// reference runs and the game bound is trivially saturated.
    pub fn is_reference(&self) -> bool {
        self.m >= self.n
    }
}

/// Estimated or exact success probability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GameResult<T> {
    pub p_hat: T,
    pub std_err: T,
    pub trials: u64,
    pub mode: EvalMode,
}

impl<T: Scalar> GameResult<T> {
    fn exact(p: T) -> Self {
        Self {
            p_hat: p,
            std_err: T::zero(),
            trials: 1,
            mode: EvalMode::Exact,
        }
    }

    fn monte_carlo(successes: u64, trials: u64) -> Self {
        let p = T::from_f64(successes as f64 / trials as f64);
        let var = p * (T::one() - p) / T::from_f64(trials as f64);
        Self {
            p_hat: p,
            std_err: var.max(T::zero()).sqrt(),
            trials,
            mode: EvalMode::MonteCarlo,
        }
    }
}

/// An IC-1 protocol with exact evaluation: direct singlet random access
/// codes for n = 2 and 3, and the n = 4 concatenation of three of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ic1Protocol {
    Direct2,
    Direct3,
    Concat4,
}

impl Ic1Protocol {
    pub fn for_n(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Self::Direct2),
            3 => Ok(Self::Direct3),
            4 => Ok(Self::Concat4),
            other => Err(QicError::UnsupportedEarac(other)),
        }
    }

    pub fn n(self) -> usize {
        match self {
            Self::Direct2 => 2,
            Self::Direct3 => 3,
            Self::Concat4 => 4,
        }
    }
}

/// An IC-2 strategy: either two independent IC-1 protocols (one per output
/// bit) or a nonlocal measurement strategy.
#[derive(Debug, Clone)]
pub enum Ic2Strategy<T> {
    PairedIc1 { bit0: Ic1Protocol, bit1: Ic1Protocol },
    Nonlocal(NonlocalStrategy<T>),
}

impl<T: Scalar> Ic2Strategy<T> {
    /// The paired random access code strategy for a given n.
    pub fn paired_earac(n: usize) -> Result<Self> {
        let p = Ic1Protocol::for_n(n)?;
        Ok(Self::PairedIc1 { bit0: p, bit1: p })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::PairedIc1 { bit0, .. } => bit0.n(),
            Self::Nonlocal(s) => s.n(),
        }
    }
}

/// A QIC-game strategy.
#[derive(Debug, Clone)]
pub enum Strategy<T> {
    /// Alice forwards the first m qubits untouched; Bob answers |0⟩ for the
    /// rest.
    Naive,
    /// Covariant form: the round-k qubit passes through a depolarizing
    /// channel with parameter lambda_k.
    ChannelForm(Vec<DepolarizingParam<T>>),
    /// Teleport every input qubit, play IC-2 on the outcome bits, send the
    /// 2-bit message through superdense coding, correct with sigma_y.
    Teleportation(Ic2Strategy<T>),
}

impl<T: Scalar> Strategy<T> {
    pub fn naive() -> Self {
        Self::Naive
    }

    pub fn channel_form(lambdas: Vec<DepolarizingParam<T>>) -> Self {
        Self::ChannelForm(lambdas)
    }

    pub fn teleportation(ic2: Ic2Strategy<T>) -> Self {
        Self::Teleportation(ic2)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::ChannelForm(_) => "channel",
            Self::Teleportation(_) => "teleport",
        }
    }
}

// ---------------------------------------------------------------------------
// IC-1 exact machinery
// ---------------------------------------------------------------------------

/// Measurement triad used by the random access codes: e_0 = +x, e_1 = +y,
/// e_2 = +z. The success probability is frame-independent; this triad is the
/// fixed convention.
fn triad_axis<T: Scalar>(i: usize) -> BlochVector<T> {
    match i {
        0 => BlochVector::plus_x(),
        1 => BlochVector::plus_y(),
        2 => BlochVector::plus_z(),
        _ => panic!("triad axis index out of range"),
    }
}

/// Alice's measurement axis for input bits: normalize(sum_i (-1)^{b_i} e_i).
fn alice_axis<T: Scalar>(bits: &[u8]) -> BlochVector<T> {
    let mut x = T::zero();
    let mut y = T::zero();
    let mut z = T::zero();
    for (i, b) in bits.iter().enumerate() {
        let sign = if *b == 0 { T::one() } else { -T::one() };
        let e = triad_axis::<T>(i);
        x += sign * e.x;
        y += sign * e.y;
        z += sign * e.z;
    }
    BlochVector::normalized(x, y, z).expect("triad sums are never zero")
}

/// Exact joint outcome distribution of measuring the two halves of a singlet
/// along the given axes; index order [alice][bob], outcome 0 = aligned.
fn singlet_joint_probs<T: Scalar>(
    a_axis: &BlochVector<T>,
    b_axis: &BlochVector<T>,
) -> [[T; 2]; 2] {
    let singlet = PureState::<T>::bell(BellIndex::PsiMinus).to_density();
    let mut out = [[T::zero(); 2]; 2];
    for (a, pa, post) in basis_branches(&singlet, 0, a_axis).expect("qubit pair") {
        let pb = basis_probabilities(&post, 1, b_axis).expect("qubit pair");
        out[a as usize][0] = pa * pb[0];
        out[a as usize][1] = pa * pb[1];
    }
    out
}

/// Exact P(Bob answers bits[k] correctly | bits, k) for one IC-1 protocol.
fn ic1_success_probability<T: Scalar>(proto: Ic1Protocol, bits: &[u8], k: usize) -> T {
    debug_assert_eq!(bits.len(), proto.n());
    debug_assert!(k < proto.n());
    match proto {
        Ic1Protocol::Direct2 | Ic1Protocol::Direct3 => {
            let joint = singlet_joint_probs(&alice_axis::<T>(bits), &triad_axis::<T>(k));
            let mut p = T::zero();
            for a in 0..2u8 {
                for b in 0..2u8 {
                    if a ^ b ^ 1 == bits[k] {
                        p += joint[a as usize][b as usize];
                    }
                }
            }
            p
        }
        Ic1Protocol::Concat4 => {
            let g = k / 2;
            let i = k % 2;
            let grp = [bits[2 * g], bits[2 * g + 1]];
            let other = [bits[2 * (1 - g)], bits[2 * (1 - g) + 1]];
            // Queried group: full joint distribution of (a_g, inner b).
            let joint_g = singlet_joint_probs(&alice_axis::<T>(&grp), &triad_axis::<T>(i));
            // Untouched group: Alice's marginal on her singlet half.
            let singlet = PureState::<T>::bell(BellIndex::PsiMinus).to_density();
            let other_marginal =
                basis_probabilities(&singlet, 0, &alice_axis::<T>(&other)).expect("qubit");
            let mut p = T::zero();
            for a_g in 0..2u8 {
                for b_inner in 0..2u8 {
                    let p1 = joint_g[a_g as usize][b_inner as usize];
                    for a_other in 0..2u8 {
                        let p2 = other_marginal[a_other as usize];
                        let mut outer_inputs = [0u8; 2];
                        outer_inputs[g] = a_g;
                        outer_inputs[1 - g] = a_other;
                        let joint_outer = singlet_joint_probs(
                            &alice_axis::<T>(&outer_inputs),
                            &triad_axis::<T>(g),
                        );
                        for a_out in 0..2u8 {
                            for b_out in 0..2u8 {
                                let estimate = a_out ^ b_out ^ 1;
                                let y = estimate ^ b_inner ^ 1;
                                if y == bits[k] {
                                    p += p1 * p2 * joint_outer[a_out as usize][b_out as usize];
                                }
                            }
                        }
                    }
                }
            }
            p
        }
    }
}

/// Exact average correct-answer probability at a fixed query index k, over
/// uniformly random input bits.
fn ic1_average_success_at<T: Scalar>(proto: Ic1Protocol, k: usize) -> T {
    let n = proto.n();
    let mut acc = T::zero();
    for pattern in 0..(1usize << n) {
        let bits: Vec<u8> = (0..n).map(|i| ((pattern >> i) & 1) as u8).collect();
        acc += ic1_success_probability(proto, &bits, k);
    }
    acc / T::from_f64((1usize << n) as f64)
}

/// Exact per-bit success probability q of the entanglement-assisted random
/// access code for n inputs (n in {2, 3} direct, n = 4 by concatenation),
/// evaluated by enumerating every input and query.
pub fn ic1_earac_success<T: Scalar>(n: usize) -> Result<T> {
    let proto = Ic1Protocol::for_n(n)?;
    let mut acc = T::zero();
    for k in 0..n {
        acc += ic1_average_success_at(proto, k);
    }
    Ok(acc / T::from_f64(n as f64))
}

/// Monte-Carlo sibling of [`ic1_earac_success`].
pub fn ic1_earac_success_mc<T: Scalar>(n: usize, trials: u64, rng: &RngStream) -> Result<T> {
    let proto = Ic1Protocol::for_n(n)?;
    let mut successes = 0u64;
    for t in 0..trials {
        let mut stream = rng.substream(t);
        let bits: Vec<u8> = (0..n).map(|_| stream.bit()).collect();
        let k = stream.below(n);
        let run = ic1_sample::<T>(proto, &bits, k, &mut stream);
        let y = run.message_bit ^ run.bob_combine;
        if y == bits[k] {
            successes += 1;
        }
    }
    Ok(T::from_f64(successes as f64 / trials as f64))
}

/// One sampled IC-1 run. Bob's final answer is
/// `decoded_message XOR bob_combine`, where the message bit travels from
/// Alice to Bob (through superdense coding in the QIC wiring).
struct Ic1Run {
    message_bit: u8,
    bob_combine: u8,
}

fn sample_singlet_pair<T: Scalar>(
    a_axis: &BlochVector<T>,
    b_axis: &BlochVector<T>,
    rng: &mut RngStream,
) -> (u8, u8) {
    let singlet = PureState::<T>::bell(BellIndex::PsiMinus).to_density();
    let rec_a = basis_measure(&singlet, 0, a_axis, rng).expect("qubit pair");
    let MeasurementOutcome::Basis(a) = rec_a.outcome else {
        unreachable!()
    };
    let rec_b = basis_measure(&rec_a.post_state, 1, b_axis, rng).expect("qubit pair");
    let MeasurementOutcome::Basis(b) = rec_b.outcome else {
        unreachable!()
    };
    (a, b)
}

fn ic1_sample<T: Scalar>(
    proto: Ic1Protocol,
    bits: &[u8],
    k: usize,
    rng: &mut RngStream,
) -> Ic1Run {
    match proto {
        Ic1Protocol::Direct2 | Ic1Protocol::Direct3 => {
            let (a, b) = sample_singlet_pair(&alice_axis::<T>(bits), &triad_axis::<T>(k), rng);
            Ic1Run {
                message_bit: a,
                bob_combine: b ^ 1,
            }
        }
        Ic1Protocol::Concat4 => {
            let g = k / 2;
            let i = k % 2;
            let grp = [bits[2 * g], bits[2 * g + 1]];
            let other = [bits[2 * (1 - g)], bits[2 * (1 - g) + 1]];
            let (a_g, b_inner) =
                sample_singlet_pair(&alice_axis::<T>(&grp), &triad_axis::<T>(i), rng);
            // Alice measures her half of the untouched group's singlet too.
            let singlet = PureState::<T>::bell(BellIndex::PsiMinus).to_density();
            let rec = basis_measure(&singlet, 0, &alice_axis::<T>(&other), rng).expect("qubit");
            let MeasurementOutcome::Basis(a_other) = rec.outcome else {
                unreachable!()
            };
            let mut outer_inputs = [0u8; 2];
            outer_inputs[g] = a_g;
            outer_inputs[1 - g] = a_other;
            let (a_out, b_out) =
                sample_singlet_pair(&alice_axis::<T>(&outer_inputs), &triad_axis::<T>(g), rng);
            Ic1Run {
                message_bit: a_out,
                bob_combine: b_out ^ b_inner,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Nonlocal IC-2 strategies
// ---------------------------------------------------------------------------

/// A nonlocal IC-2 strategy: a shared bipartite pure state with a 4-outcome
/// projective measurement per Alice input x and per Bob index k. Bob's
/// answer is the bitwise XOR of the two outcome labels.
///
/// Alice's input x is encoded as an integer with two bits per round, round k
/// occupying bits (2k, 2k+1); `alice_map[x]` selects her basis from a pool
/// of distinct bases. Small n uses one independent basis per x; larger n
/// draws the map from a pool so that exact evaluation stays cheap.
#[derive(Debug, Clone)]
pub struct NonlocalStrategy<T> {
    n: usize,
    psi: PureState<T>,
    alice_bases: Vec<ComplexMatrix<T>>,
    alice_map: Vec<u32>,
    bob_bases: Vec<ComplexMatrix<T>>,
}

impl<T: Scalar> NonlocalStrategy<T> {
    pub fn new(
        n: usize,
        psi: PureState<T>,
        alice_bases: Vec<ComplexMatrix<T>>,
        alice_map: Vec<u32>,
        bob_bases: Vec<ComplexMatrix<T>>,
    ) -> Result<Self> {
        if !(1..=10).contains(&n) {
            return Err(QicError::InvalidParameter(format!(
                "nonlocal strategy supports 1 <= n <= 10, got {n}"
            )));
        }
        if psi.dims() != [4, 4] {
            return Err(QicError::DimensionMismatch(
                "shared state must have dims [4, 4]".into(),
            ));
        }
        if alice_map.len() != 1usize << (2 * n) {
            return Err(QicError::DimensionMismatch(format!(
                "alice_map has {} entries, expected 4^{n}",
                alice_map.len()
            )));
        }
        if bob_bases.len() != n {
            return Err(QicError::DimensionMismatch(format!(
                "{} Bob bases for n = {n}",
                bob_bases.len()
            )));
        }
        for m in alice_map.iter() {
            if *m as usize >= alice_bases.len() {
                return Err(QicError::IndexOutOfRange {
                    index: *m as usize,
                    count: alice_bases.len(),
                });
            }
        }
        for basis in alice_bases.iter().chain(bob_bases.iter()) {
            if basis.rows() != 4 || basis.cols() != 4 {
                return Err(QicError::DimensionMismatch(
                    "measurement bases must be 4x4".into(),
                ));
            }
            let defect = basis
                .adjoint()
                .matmul(basis)
                .max_abs_diff(&ComplexMatrix::identity(4));
            if defect > T::psd_tol() {
                return Err(QicError::NotCptp(defect.as_f64()));
            }
        }
        Ok(Self {
            n,
            psi,
            alice_bases,
            alice_map,
            bob_bases,
        })
    }

    /// Random instance: Haar state, Haar measurement bases. For n <= 4 every
    /// input gets an independent basis; beyond that `max_distinct` bases are
    /// shared through a random map.
    pub fn random(n: usize, max_distinct: usize, rng: &mut RngStream) -> Result<Self> {
        let inputs = 1usize << (2 * n);
        let distinct = max_distinct.max(1).min(inputs);
        let psi = PureState::haar_random(&[4, 4], rng);
        let alice_bases: Vec<_> = (0..distinct)
            .map(|_| crate::linalg::haar_random_unitary(4, rng))
            .collect();
        let alice_map: Vec<u32> = if distinct == inputs {
            (0..inputs as u32).collect()
        } else {
            (0..inputs).map(|_| rng.below(distinct) as u32).collect()
        };
        let bob_bases: Vec<_> = (0..n)
            .map(|_| crate::linalg::haar_random_unitary(4, rng))
            .collect();
        Self::new(n, psi, alice_bases, alice_map, bob_bases)
    }

    /// n = 1 strategy that wins with certainty: the product state |00⟩ with
    /// Alice's basis permuted by her input, so her outcome equals x and
    /// Bob's outcome is always (0,0).
    pub fn perfect_n1() -> Self {
        let psi = PureState::basis(&[4, 4], 0);
        let alice_bases: Vec<ComplexMatrix<T>> = (0..4)
            .map(|x| {
                ComplexMatrix::from_fn(4, 4, |r, c| {
                    if r == (c ^ x) {
                        num_complex::Complex::new(T::one(), T::zero())
                    } else {
                        num_complex::Complex::new(T::zero(), T::zero())
                    }
                })
            })
            .collect();
        let alice_map = (0..4u32).collect();
        let bob_bases = vec![ComplexMatrix::identity(4)];
        Self::new(1, psi, alice_bases, alice_map, bob_bases).expect("static construction")
    }

    /// Strategy that ignores everything: product state, fixed computational
    /// measurements; Bob always answers (0,0), succeeding with probability
    /// 1/4.
    pub fn blind_guess(n: usize) -> Result<Self> {
        let psi = PureState::basis(&[4, 4], 0);
        let alice_bases = vec![ComplexMatrix::identity(4)];
        let alice_map = vec![0u32; 1usize << (2 * n)];
        let bob_bases = vec![ComplexMatrix::identity(4); n];
        Self::new(n, psi, alice_bases, alice_map, bob_bases)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn basis_index(&self, x: usize) -> usize {
        self.alice_map[x] as usize
    }

    fn digit(x: usize, k: usize) -> usize {
        (x >> (2 * k)) & 3
    }

    /// Joint outcome distribution p[a][b] for Alice basis index `i` and Bob
    /// index `k` (outcomes are 2-bit labels).
    fn joint_probs_for_basis(&self, i: usize, k: usize) -> [[T; 4]; 4] {
        let a = &self.alice_bases[i];
        let b = &self.bob_bases[k];
        let mut probs = [[T::zero(); 4]; 4];
        for (ra, row) in probs.iter_mut().enumerate() {
            for (rb, slot) in row.iter_mut().enumerate() {
                // Amplitude <nu_ra w_rb | psi> = sum conj(A[s][ra]) conj(B[t][rb]) psi[s*4+t]
                let mut amp = num_complex::Complex::new(T::zero(), T::zero());
                for s in 0..4 {
                    for t in 0..4 {
                        amp += a.get(s, ra).conj()
                            * b.get(t, rb).conj()
                            * self.psi.amplitudes()[s * 4 + t];
                    }
                }
                *slot = amp.norm_sqr();
            }
        }
        probs
    }
}

/// Per-(basis, k) reduction of a joint outcome table: success probabilities
/// by answer deviation, and the three correlators.
#[derive(Debug, Clone, Copy)]
struct OutcomeTable<T> {
    /// prob_y[w]: probability that Bob's XOR answer equals label w.
    prob_y: [T; 4],
    e: T,
    e0: T,
    e1: T,
}

fn reduce_outcomes<T: Scalar>(probs: &[[T; 4]; 4]) -> OutcomeTable<T> {
    let mut prob_y = [T::zero(); 4];
    let mut e = T::zero();
    let mut e0 = T::zero();
    let mut e1 = T::zero();
    for a in 0..4usize {
        for b in 0..4usize {
            let p = probs[a][b];
            prob_y[a ^ b] += p;
            let (r, s) = (a >> 1, a & 1);
            let (t, u) = (b >> 1, b & 1);
            let sign = |bit: usize| if bit.is_multiple_of(2) { T::one() } else { -T::one() };
            e += sign(r + s + t + u) * p;
            e0 += sign(r + t) * p;
            e1 += sign(s + u) * p;
        }
    }
    OutcomeTable { prob_y, e, e0, e1 }
}

/// Exact evaluation of a nonlocal IC-2 strategy: success probability,
/// averaged correlators, and the left-hand sides of the three pairwise
/// inequality combinations (all bounded by (1 + n^{-1/2})/2).
#[derive(Debug, Clone)]
pub struct NonlocalEvaluation<T> {
    pub n: usize,
    pub q: T,
    pub e_avg: T,
    pub e0_avg: T,
    pub e1_avg: T,
    /// avg over (x, k) of P(y = x_k) + P(y = x_k with both bits flipped).
    pub lhs_both_or_neither: T,
    /// avg over (x, k) of P(y^0 = x_k^0).
    pub lhs_bit0: T,
    /// avg over (x, k) of P(y^1 = x_k^1).
    pub lhs_bit1: T,
    /// (1 + n^{-1/2}) / 2.
    pub pair_bound: T,
    /// avg over x of P(y = x_k XOR w), per k and deviation label w.
    deviation: Vec<[T; 4]>,
    tables: Vec<Vec<OutcomeTable<T>>>,
    map: Vec<u32>,
}

impl<T: Scalar> NonlocalEvaluation<T> {
    /// Exact correlators (E, E^0, E^1) for one input x and index k.
    pub fn correlator_at(&self, x: usize, k: usize) -> (T, T, T) {
        let t = &self.tables[self.map[x] as usize][k];
        let v = (x >> (2 * k)) & 3;
        let sign = |cond: bool| if cond { T::one() } else { -T::one() };
        let s_both = sign(v == 0 || v == 3);
        let s0 = sign(v < 2);
        let s1 = sign(v & 1 == 0);
        (s_both * t.e, s0 * t.e0, s1 * t.e1)
    }

    /// Exact success probability for one input x and index k.
    pub fn success_at(&self, x: usize, k: usize) -> T {
        let t = &self.tables[self.map[x] as usize][k];
        t.prob_y[(x >> (2 * k)) & 3]
    }

    /// avg over x of P(y = x_k XOR deviation), per k.
    pub fn deviation_table(&self) -> &[[T; 4]] {
        &self.deviation
    }
}

/// Computes the exact success probability and correlators of a nonlocal
/// IC-2 strategy by enumerating all inputs.
pub fn evaluate_nonlocal_ic2<T: Scalar>(s: &NonlocalStrategy<T>) -> NonlocalEvaluation<T> {
    let n = s.n();
    let inputs = 1usize << (2 * n);
    let tables: Vec<Vec<OutcomeTable<T>>> = (0..s.alice_bases.len())
        .map(|i| {
            (0..n)
                .map(|k| reduce_outcomes(&s.joint_probs_for_basis(i, k)))
                .collect()
        })
        .collect();

    let mut q_sum = T::zero();
    let mut parity_sum = T::zero();
    let mut bit0_sum = T::zero();
    let mut bit1_sum = T::zero();
    let mut e_sum = T::zero();
    let mut e0_sum = T::zero();
    let mut e1_sum = T::zero();
    let mut deviation = vec![[T::zero(); 4]; n];
    for x in 0..inputs {
        let row = &tables[s.basis_index(x)];
        for (k, table) in row.iter().enumerate() {
            let v = NonlocalStrategy::<T>::digit(x, k);
            let p = &table.prob_y;
            q_sum += p[v];
            parity_sum = parity_sum + p[v] + p[v ^ 3];
            bit0_sum = bit0_sum + p[v] + p[v ^ 1];
            bit1_sum = bit1_sum + p[v] + p[v ^ 2];
            for w in 0..4 {
                deviation[k][w] += p[v ^ w];
            }
            let sign = |cond: bool| if cond { T::one() } else { -T::one() };
            e_sum += sign(v == 0 || v == 3) * table.e;
            e0_sum += sign(v < 2) * table.e0;
            e1_sum += sign(v & 1 == 0) * table.e1;
        }
    }
    let norm = T::one() / T::from_f64((inputs * n) as f64);
    let x_norm = T::one() / T::from_f64(inputs as f64);
    for row in deviation.iter_mut() {
        for w in row.iter_mut() {
            *w *= x_norm;
        }
    }
    let half = T::from_f64(0.5);
    let eval = NonlocalEvaluation {
        n,
        q: q_sum * norm,
        e_avg: e_sum * norm,
        e0_avg: e0_sum * norm,
        e1_avg: e1_sum * norm,
        lhs_both_or_neither: parity_sum * norm,
        lhs_bit0: bit0_sum * norm,
        lhs_bit1: bit1_sum * norm,
        pair_bound: half * (T::one() + T::one() / T::from_f64(n as f64).sqrt()),
        deviation,
        tables,
        map: s.alice_map.clone(),
    };
    // Algebraic identity linking the parity combination to the correlator
    // average; failure would mean the reduction is miswired.
    let identity_gap =
        (eval.lhs_both_or_neither - half * (T::one() + eval.e_avg)).abs();
    assert!(
        identity_gap.as_f64() < 1e-9,
        "correlator identity violated by {identity_gap}"
    );
    eval
}

// ---------------------------------------------------------------------------
// IC-2 game
// ---------------------------------------------------------------------------

/// Runs the IC-2 game. Exact mode enumerates; Monte-Carlo mode samples the
/// full protocol.
pub fn run_ic2<T: Scalar>(
    strategy: &Ic2Strategy<T>,
    cfg: &GameConfig,
    mode: EvalMode,
) -> Result<GameResult<T>> {
    let n = cfg.n;
    if strategy.n() != n {
        return Err(QicError::InvalidParameter(format!(
            "strategy is built for n = {}, config has n = {n}",
            strategy.n()
        )));
    }
    match mode {
        EvalMode::Exact => {
            let q = match strategy {
                Ic2Strategy::PairedIc1 { bit0, bit1 } => {
                    let mut acc = T::zero();
                    for k in 0..n {
                        acc += ic1_average_success_at::<T>(*bit0, k)
                                * ic1_average_success_at::<T>(*bit1, k);
                    }
                    acc / T::from_f64(n as f64)
                }
                Ic2Strategy::Nonlocal(s) => evaluate_nonlocal_ic2(s).q,
            };
            Ok(GameResult::exact(q))
        }
        EvalMode::MonteCarlo => {
            let root = RngStream::new(cfg.seed);
            let mut successes = 0u64;
            for t in 0..cfg.trials {
                let mut rng = root.substream(t);
                let x: Vec<PauliIndex> = (0..n)
                    .map(|_| PauliIndex::new(rng.bit(), rng.bit()))
                    .collect();
                let k = rng.below(n);
                let y = sample_ic2_answer(strategy, &x, k, &mut rng)?;
                if y == x[k] {
                    successes += 1;
                }
            }
            Ok(GameResult::monte_carlo(successes, cfg.trials))
        }
    }
}

/// Samples Bob's two-bit answer in one IC-2 round, including the superdense
/// transfer of Alice's two message bits.
fn sample_ic2_answer<T: Scalar>(
    strategy: &Ic2Strategy<T>,
    x: &[PauliIndex],
    k: usize,
    rng: &mut RngStream,
) -> Result<PauliIndex> {
    let (message, combine) = match strategy {
        Ic2Strategy::PairedIc1 { bit0, bit1 } => {
            let bits0: Vec<u8> = x.iter().map(|p| p.x0).collect();
            let bits1: Vec<u8> = x.iter().map(|p| p.x1).collect();
            let run0 = ic1_sample::<T>(*bit0, &bits0, k, rng);
            let run1 = ic1_sample::<T>(*bit1, &bits1, k, rng);
            (
                PauliIndex::new(run0.message_bit, run1.message_bit),
                PauliIndex::new(run0.bob_combine, run1.bob_combine),
            )
        }
        Ic2Strategy::Nonlocal(s) => {
            let x_enc: usize = x
                .iter()
                .enumerate()
                .map(|(j, p)| p.ordinal() << (2 * j))
                .sum();
            let probs = s.joint_probs_for_basis(s.basis_index(x_enc), k);
            let flat: Vec<T> = probs.iter().flatten().copied().collect();
            let pick = rng.sample_index(&flat);
            let (a, b) = (pick / 4, pick % 4);
            (
                PauliIndex::from_ordinal(a),
                PauliIndex::from_ordinal(b),
            )
        }
    };
    // The 2-bit message rides on one qubit via superdense coding.
    let phi = PureState::<T>::bell(BellIndex::PhiPlus).to_density();
    let encoded = superdense_encode(message, &phi)?;
    let decoded = superdense_decode(&encoded)?;
    Ok(decoded.xor(combine))
}

// ---------------------------------------------------------------------------
// QIC game version I
// ---------------------------------------------------------------------------

fn singlet_density<T: Scalar>() -> DensityOperator<T> {
    PureState::bell(BellIndex::PsiMinus).to_density()
}

/// The round-k output state of the naive strategy.
fn naive_round_state<T: Scalar>(k: usize, m: usize) -> DensityOperator<T> {
    if k < m {
        // Bob holds the genuine partner qubit.
        singlet_density()
    } else {
        // Bob hands over |0⟩; Charlie's half is the singlet marginal.
        let charlie = singlet_density::<T>()
            .partial_trace(&[0])
            .expect("singlet marginal");
        charlie.tensor(&PureState::qubit0().to_density())
    }
}

/// Average fidelity table of the teleport-then-correct composition:
/// entry [x][y] is ⟨Psi-| omega |Psi-⟩ when the teleportation outcome was x
/// and Bob applied sigma_y. Derived by running the actual protocol branches.
fn teleport_correction_fidelities<T: Scalar>() -> [[T; 4]; 4] {
    let base = singlet_density::<T>().tensor(&singlet_density::<T>()); // C, A, A', B
    let singlet = PureState::<T>::bell(BellIndex::PsiMinus);
    let mut table = [[T::zero(); 4]; 4];
    for (x, p, post) in teleport_branches(&base, 1, (2, 3)).expect("valid resource") {
        debug_assert!((p - T::from_f64(0.25)).abs() < T::from_f64(1e-9));
        let cb = post.partial_trace(&[0, 3]).expect("keep C and B");
        for y in PauliIndex::ALL {
            let corrected = cb
                .conjugate_embedded(&pauli(y), 1)
                .expect("qubit correction");
            table[x.ordinal()][y.ordinal()] = corrected
                .pure_fidelity(&singlet)
                .expect("matching dimensions");
        }
    }
    table
}

/// avg over x of fidelity when Bob's answer deviates from x by `w`.
fn mean_fidelity_by_deviation<T: Scalar>(table: &[[T; 4]; 4]) -> [T; 4] {
    let quarter = T::from_f64(0.25);
    let mut out = [T::zero(); 4];
    for (w, slot) in out.iter_mut().enumerate() {
        let dev = PauliIndex::from_ordinal(w);
        for x in PauliIndex::ALL {
            let y = x.xor(dev);
            *slot += table[x.ordinal()][y.ordinal()] * quarter;
        }
    }
    out
}

/// Per-k distribution of Bob's IC-2 answer deviation for a strategy,
/// averaged over inputs: entry [k][w] = avg_x P(y = x_k XOR w).
fn ic2_deviation_table<T: Scalar>(strategy: &Ic2Strategy<T>, n: usize) -> Vec<[T; 4]> {
    match strategy {
        Ic2Strategy::PairedIc1 { bit0, bit1 } => (0..n)
            .map(|k| {
                let c0 = ic1_average_success_at::<T>(*bit0, k);
                let c1 = ic1_average_success_at::<T>(*bit1, k);
                let r0 = [c0, T::one() - c0];
                let r1 = [c1, T::one() - c1];
                let mut row = [T::zero(); 4];
                for (w, slot) in row.iter_mut().enumerate() {
                    *slot = r0[w >> 1] * r1[w & 1];
                }
                row
            })
            .collect(),
        Ic2Strategy::Nonlocal(s) => evaluate_nonlocal_ic2(s).deviation_table().to_vec(),
    }
}

fn exact_qic_v1<T: Scalar>(strategy: &Strategy<T>, cfg: &GameConfig) -> Result<T> {
    let n = cfg.n;
    let singlet = PureState::<T>::bell(BellIndex::PsiMinus);
    match strategy {
        Strategy::Naive => {
            let mut acc = T::zero();
            for k in 0..n {
                acc += naive_round_state::<T>(k, cfg.m).pure_fidelity(&singlet)?;
            }
            Ok(acc / T::from_f64(n as f64))
        }
        Strategy::ChannelForm(lambdas) => {
            if lambdas.len() != n {
                return Err(QicError::InvalidParameter(format!(
                    "{} channel parameters for n = {n}",
                    lambdas.len()
                )));
            }
            let mut acc = T::zero();
            for lam in lambdas {
                let omega = depolarizing(*lam).apply(&singlet.to_density(), 1)?;
                acc += omega.pure_fidelity(&singlet)?;
            }
            Ok(acc / T::from_f64(n as f64))
        }
        Strategy::Teleportation(ic2) => {
            if cfg.m != 1 {
                return Err(QicError::InvalidParameter(
                    "teleportation strategies use a one-qubit message (m = 1)".into(),
                ));
            }
            if ic2.n() != n {
                return Err(QicError::InvalidParameter(format!(
                    "IC-2 strategy is built for n = {}, config has n = {n}",
                    ic2.n()
                )));
            }
            // Check the superdense link is lossless for all four messages.
            let phi = PureState::<T>::bell(BellIndex::PhiPlus).to_density();
            for bits in PauliIndex::ALL {
                let decoded = superdense_decode(&superdense_encode(bits, &phi)?)?;
                if decoded != bits {
                    return Err(QicError::DecodeFailure);
                }
            }
            let fidelity = mean_fidelity_by_deviation(&teleport_correction_fidelities::<T>());
            let deviation = ic2_deviation_table(ic2, n);
            let mut acc = T::zero();
            for row in &deviation {
                for w in 0..4 {
                    acc += row[w] * fidelity[w];
                }
            }
            Ok(acc / T::from_f64(n as f64))
        }
    }
}

fn mc_qic_v1<T: Scalar>(strategy: &Strategy<T>, cfg: &GameConfig) -> Result<GameResult<T>> {
    let n = cfg.n;
    if let Strategy::ChannelForm(lambdas) = strategy {
        if lambdas.len() != n {
            return Err(QicError::InvalidParameter(format!(
                "{} channel parameters for n = {n}",
                lambdas.len()
            )));
        }
    }
    if let Strategy::Teleportation(ic2) = strategy {
        if cfg.m != 1 {
            return Err(QicError::InvalidParameter(
                "teleportation strategies use a one-qubit message (m = 1)".into(),
            ));
        }
        if ic2.n() != n {
            return Err(QicError::InvalidParameter(format!(
                "IC-2 strategy is built for n = {}, config has n = {n}",
                ic2.n()
            )));
        }
    }
    let root = RngStream::new(cfg.seed);
    let mut successes = 0u64;
    for t in 0..cfg.trials {
        let mut rng = root.substream(t);
        let k = rng.below(n);
        let omega = match strategy {
            Strategy::Naive => naive_round_state::<T>(k, cfg.m),
            Strategy::ChannelForm(lambdas) => {
                depolarizing(lambdas[k]).apply(&singlet_density::<T>(), 1)?
            }
            Strategy::Teleportation(ic2) => teleportation_round_v1(ic2, cfg.n, k, &mut rng)?,
        };
        let record = bell_measure(&omega, (0, 1), &mut rng)?;
        if record.outcome == MeasurementOutcome::Bell(BellIndex::PsiMinus) {
            successes += 1;
        }
    }
    Ok(GameResult::monte_carlo(successes, cfg.trials))
}

/// One sampled round of a teleportation strategy in version I: teleports all
/// n qubits, plays IC-2 on the outcome bits, transfers the message through
/// superdense coding, corrects, and returns Charlie's pair (C_k, B_k).
fn teleportation_round_v1<T: Scalar>(
    ic2: &Ic2Strategy<T>,
    n: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<DensityOperator<T>> {
    let mut x = Vec::with_capacity(n);
    let mut charlie_bob: Option<DensityOperator<T>> = None;
    for j in 0..n {
        // C_j A_j singlet from Charlie plus the A'_j B_j resource singlet.
        let state = singlet_density::<T>().tensor(&singlet_density::<T>());
        if j == k {
            let (xj, post) = teleport(&state, 1, (2, 3), rng)?;
            x.push(xj);
            charlie_bob = Some(post.partial_trace(&[0, 3])?);
        } else {
            // Only the outcome matters for rounds Bob will not answer.
            let probs = bell_probabilities(&state, (1, 2))?;
            let pick = rng.sample_index(&probs);
            x.push(crate::protocols::bell_outcome_pauli(BellIndex::ALL[pick]));
        }
    }
    let y = sample_ic2_answer(ic2, &x, k, rng)?;
    let cb = charlie_bob.expect("round k is always simulated");
    cb.conjugate_embedded(&pauli(y), 1)
}

/// Runs version I of the QIC game.
pub fn run_qic_v1<T: Scalar>(
    strategy: &Strategy<T>,
    cfg: &GameConfig,
    mode: EvalMode,
) -> Result<GameResult<T>> {
    if cfg.version != GameVersion::V1 {
        return Err(QicError::InvalidParameter(
            "configuration is not for version I".into(),
        ));
    }
    match mode {
        EvalMode::Exact => Ok(GameResult::exact(exact_qic_v1(strategy, cfg)?)),
        EvalMode::MonteCarlo => mc_qic_v1(strategy, cfg),
    }
}

// ---------------------------------------------------------------------------
// QIC game version II
// ---------------------------------------------------------------------------

/// Runs version II of the QIC game by Monte-Carlo sampling over Haar-random
/// input states and Charlie's basis measurement.
pub fn run_qic_v2<T: Scalar>(strategy: &Strategy<T>, cfg: &GameConfig) -> Result<GameResult<T>> {
    if cfg.version != GameVersion::V2 {
        return Err(QicError::InvalidParameter(
            "configuration is not for version II".into(),
        ));
    }
    let n = cfg.n;
    if let Strategy::ChannelForm(lambdas) = strategy {
        if lambdas.len() != n {
            return Err(QicError::InvalidParameter(format!(
                "{} channel parameters for n = {n}",
                lambdas.len()
            )));
        }
    }
    if let Strategy::Teleportation(ic2) = strategy {
        if cfg.m != 1 {
            return Err(QicError::InvalidParameter(
                "teleportation strategies use a one-qubit message (m = 1)".into(),
            ));
        }
        if ic2.n() != n {
            return Err(QicError::InvalidParameter(format!(
                "IC-2 strategy is built for n = {}, config has n = {n}",
                ic2.n()
            )));
        }
    }
    let root = RngStream::new(cfg.seed);
    let mut successes = 0u64;
    for t in 0..cfg.trials {
        let mut rng = root.substream(t);
        let k = rng.below(n);
        let success = match strategy {
            Strategy::Naive => {
                let r = BlochVector::<T>::random(&mut rng);
                let rho_k = if k < cfg.m {
                    crate::linalg::bloch_to_state(&r).to_density()
                } else {
                    PureState::qubit0().to_density()
                };
                charlie_accepts(&rho_k, &r, &mut rng)?
            }
            Strategy::ChannelForm(lambdas) => {
                let r = BlochVector::<T>::random(&mut rng);
                let psi = crate::linalg::bloch_to_state(&r).to_density();
                let rho_k = depolarizing(lambdas[k]).apply(&psi, 0)?;
                charlie_accepts(&rho_k, &r, &mut rng)?
            }
            Strategy::Teleportation(ic2) => {
                let mut x = Vec::with_capacity(n);
                let mut bob_qubit: Option<DensityOperator<T>> = None;
                let mut r_k: Option<BlochVector<T>> = None;
                for j in 0..n {
                    let r = BlochVector::<T>::random(&mut rng);
                    let psi = crate::linalg::bloch_to_state(&r);
                    let state = psi.to_density().tensor(&singlet_density());
                    if j == k {
                        let (xj, post) = teleport(&state, 0, (1, 2), &mut rng)?;
                        x.push(xj);
                        bob_qubit = Some(post.partial_trace(&[2])?);
                        r_k = Some(r);
                    } else {
                        let probs = bell_probabilities(&state, (0, 1))?;
                        let pick = rng.sample_index(&probs);
                        x.push(crate::protocols::bell_outcome_pauli(BellIndex::ALL[pick]));
                    }
                }
                let y = sample_ic2_answer(ic2, &x, k, &mut rng)?;
                let corrected = bob_qubit
                    .expect("round k simulated")
                    .conjugate_embedded(&pauli(y), 0)?;
                charlie_accepts(&corrected, &r_k.expect("round k simulated"), &mut rng)?
            }
        };
        if success {
            successes += 1;
        }
    }
    Ok(GameResult::monte_carlo(successes, cfg.trials))
}

fn charlie_accepts<T: Scalar>(
    rho: &DensityOperator<T>,
    r: &BlochVector<T>,
    rng: &mut RngStream,
) -> Result<bool> {
    let record = basis_measure(rho, 0, r, rng)?;
    Ok(record.outcome == MeasurementOutcome::Basis(0))
}

// ---------------------------------------------------------------------------
// Version relation
// ---------------------------------------------------------------------------

/// Result of checking p = (1 + 2P)/3 between the two game versions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VersionRelationReport<T> {
    pub p_exact_v1: T,
    pub predicted_v2: T,
    pub p_hat_v2: T,
    pub std_err: T,
    pub within_three_sigma: bool,
}

/// Runs version I exactly and version II by Monte Carlo, then checks the
/// estimate against (1 + 2P)/3 at three standard errors.
pub fn version_relation_check<T: Scalar>(
    strategy: &Strategy<T>,
    cfg: &GameConfig,
) -> Result<VersionRelationReport<T>> {
    let cfg_v1 = GameConfig {
        version: GameVersion::V1,
        ..*cfg
    };
    let cfg_v2 = GameConfig {
        version: GameVersion::V2,
        ..*cfg
    };
    let exact = run_qic_v1(strategy, &cfg_v1, EvalMode::Exact)?;
    let mc = run_qic_v2(strategy, &cfg_v2)?;
    let predicted = version_convert(exact.p_hat)?;
    let three = T::from_f64(3.0);
    let slack = T::from_f64(1e-9);
    let within = (mc.p_hat - predicted).abs() <= three * mc.std_err + slack;
    Ok(VersionRelationReport {
        p_exact_v1: exact.p_hat,
        predicted_v2: predicted,
        p_hat_v2: mc.p_hat,
        std_err: mc.std_err,
        within_three_sigma: within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{naive_p, teleport_p};

    fn cfg_v1(n: usize, m: usize) -> GameConfig {
        GameConfig::new(n, m, 1, 0, GameVersion::V1).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(GameConfig::new(0, 0, 1, 0, GameVersion::V1).is_err());
        assert!(GameConfig::new(2, 3, 1, 0, GameVersion::V1).is_err());
        assert!(GameConfig::new(2, 2, 1, 0, GameVersion::V1).is_ok());
        assert!(cfg_v1(2, 2).is_reference());
        assert!(!cfg_v1(2, 1).is_reference());
    }

    #[test]
    fn naive_exact_matches_closed_form() {
        let result = run_qic_v1(
            &Strategy::<f64>::naive(),
            &cfg_v1(4, 1),
            EvalMode::Exact,
        )
        .unwrap();
        assert!((result.p_hat - 0.4375).abs() < 1e-12);
        assert_eq!(result.std_err, 0.0);

        let full = run_qic_v1(&Strategy::<f64>::naive(), &cfg_v1(3, 3), EvalMode::Exact).unwrap();
        assert!((full.p_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_form_exact_averages_lambdas() {
        let lambdas = vec![
            DepolarizingParam::new(0.25f64).unwrap(),
            DepolarizingParam::new(0.25f64).unwrap(),
            DepolarizingParam::new(0.25f64).unwrap(),
        ];
        let result = run_qic_v1(
            &Strategy::channel_form(lambdas),
            &cfg_v1(3, 1),
            EvalMode::Exact,
        )
        .unwrap();
        assert!((result.p_hat - 0.25).abs() < 1e-12);

        let mixed = vec![
            DepolarizingParam::new(1.0f64).unwrap(),
            DepolarizingParam::new(0.4f64).unwrap(),
        ];
        let result = run_qic_v1(
            &Strategy::channel_form(mixed),
            &cfg_v1(2, 1),
            EvalMode::Exact,
        )
        .unwrap();
        assert!((result.p_hat - 0.7).abs() < 1e-12);
    }

    #[test]
    fn earac_success_values() {
        let q2 = ic1_earac_success::<f64>(2).unwrap();
        assert!((q2 - 0.8535533905932738).abs() < 1e-12, "q2 = {q2}");
        let q3 = ic1_earac_success::<f64>(3).unwrap();
        assert!((q3 - 0.7886751345948129).abs() < 1e-12, "q3 = {q3}");
        let q4 = ic1_earac_success::<f64>(4).unwrap();
        assert!((q4 - 0.75).abs() < 1e-9, "q4 = {q4}");
        assert!(matches!(
            ic1_earac_success::<f64>(5),
            Err(QicError::UnsupportedEarac(5))
        ));
    }

    #[test]
    fn earac_success_is_input_independent() {
        for n in [2usize, 3] {
            let proto = Ic1Protocol::for_n(n).unwrap();
            let q = ic1_earac_success::<f64>(n).unwrap();
            for pattern in 0..(1usize << n) {
                let bits: Vec<u8> = (0..n).map(|i| ((pattern >> i) & 1) as u8).collect();
                for k in 0..n {
                    let p = ic1_success_probability::<f64>(proto, &bits, k);
                    assert!((p - q).abs() < 1e-12, "n={n} bits={bits:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn earac_closed_form_success_expression() {
        // The decode rule y = a XOR b XOR 1 turns the singlet correlator
        // into P(y = bit) = (1 + (-1)^bit a_axis . b_axis)/2; brute-forced
        // over the four outcome combinations for random axis pairs.
        let mut rng = RngStream::new(21);
        for _ in 0..25 {
            let a = BlochVector::<f64>::random(&mut rng);
            let b = BlochVector::<f64>::random(&mut rng);
            let joint = singlet_joint_probs(&a, &b);
            for bit in 0..2u8 {
                let mut brute = 0.0;
                for oa in 0..2u8 {
                    for ob in 0..2u8 {
                        if oa ^ ob ^ 1 == bit {
                            brute += joint[oa as usize][ob as usize];
                        }
                    }
                }
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                let closed = 0.5 * (1.0 + sign * a.dot(b));
                assert!((brute - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn earac_mc_agrees_with_exact() {
        let rng = RngStream::new(718);
        for n in [2usize, 3] {
            let exact = ic1_earac_success::<f64>(n).unwrap();
            let trials = 20_000;
            let mc = ic1_earac_success_mc::<f64>(n, trials, &rng).unwrap();
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            assert!((mc - exact).abs() < 4.0 * sigma, "n={n}: {mc} vs {exact}");
        }
    }

    #[test]
    fn paired_earac_ic2_equals_q_squared() {
        for n in [2usize, 3, 4] {
            let strategy = Ic2Strategy::<f64>::paired_earac(n).unwrap();
            let cfg = GameConfig::new(n, 1, 1, 0, GameVersion::V1).unwrap();
            let q = ic1_earac_success::<f64>(n).unwrap();
            let result = run_ic2(&strategy, &cfg, EvalMode::Exact).unwrap();
            assert!((result.p_hat - q * q).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn blind_guess_ic2_scores_one_quarter() {
        let strategy = Ic2Strategy::Nonlocal(NonlocalStrategy::<f64>::blind_guess(2).unwrap());
        let cfg = GameConfig::new(2, 1, 1, 0, GameVersion::V1).unwrap();
        let result = run_ic2(&strategy, &cfg, EvalMode::Exact).unwrap();
        assert!((result.p_hat - 0.25).abs() < 1e-12);
    }

    #[test]
    fn perfect_n1_nonlocal_strategy_saturates() {
        let s = NonlocalStrategy::<f64>::perfect_n1();
        let eval = evaluate_nonlocal_ic2(&s);
        assert!((eval.q - 1.0).abs() < 1e-12);
        // Q'(1) = 1: the bound is saturated at n = 1.
        assert!((crate::bounds::q_prime::<f64>(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn teleportation_exact_matches_teleport_formula() {
        for n in [2usize, 3] {
            let strategy =
                Strategy::teleportation(Ic2Strategy::<f64>::paired_earac(n).unwrap());
            let result = run_qic_v1(&strategy, &cfg_v1(n, 1), EvalMode::Exact).unwrap();
            assert!(
                (result.p_hat - teleport_p::<f64>(n)).abs() < 1e-9,
                "n={n}: {}",
                result.p_hat
            );
        }
    }

    #[test]
    fn teleportation_p_equals_ic2_q() {
        for n in [2usize, 3, 4] {
            let ic2 = Ic2Strategy::<f64>::paired_earac(n).unwrap();
            let cfg = cfg_v1(n, 1);
            let p = run_qic_v1(&Strategy::teleportation(ic2.clone()), &cfg, EvalMode::Exact)
                .unwrap()
                .p_hat;
            let q = run_ic2(&ic2, &cfg, EvalMode::Exact).unwrap().p_hat;
            assert!((p - q).abs() < 1e-9, "n={n}: P={p} Q={q}");
        }
    }

    #[test]
    fn wrong_correction_lands_orthogonal_to_singlet() {
        // Per round the output is the singlet exactly when y = x; any other
        // correction leaves a Bell state orthogonal to it.
        let table = teleport_correction_fidelities::<f64>();
        for x in PauliIndex::ALL {
            for y in PauliIndex::ALL {
                let f = table[x.ordinal()][y.ordinal()];
                if x == y {
                    assert!((f - 1.0).abs() < 1e-10);
                } else {
                    assert!(f.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn teleportation_with_nonlocal_ic2_matches_its_q() {
        let mut rng = RngStream::new(5150);
        let s = NonlocalStrategy::<f64>::random(2, 16, &mut rng).unwrap();
        let q = evaluate_nonlocal_ic2(&s).q;
        let strategy = Strategy::teleportation(Ic2Strategy::Nonlocal(s));
        let p = run_qic_v1(&strategy, &cfg_v1(2, 1), EvalMode::Exact)
            .unwrap()
            .p_hat;
        assert!((p - q).abs() < 1e-9);
    }

    #[test]
    fn mc_agrees_with_exact_for_naive() {
        let cfg = GameConfig::new(4, 1, 20_000, 99, GameVersion::V1).unwrap();
        let exact = run_qic_v1(&Strategy::<f64>::naive(), &cfg, EvalMode::Exact).unwrap();
        let mc = run_qic_v1(&Strategy::<f64>::naive(), &cfg, EvalMode::MonteCarlo).unwrap();
        assert!((mc.p_hat - exact.p_hat).abs() < 4.0 * mc.std_err + 1e-9);
    }

    #[test]
    fn mc_is_reproducible() {
        let cfg = GameConfig::new(3, 1, 5_000, 1234, GameVersion::V1).unwrap();
        let a = run_qic_v1(&Strategy::<f64>::naive(), &cfg, EvalMode::MonteCarlo).unwrap();
        let b = run_qic_v1(&Strategy::<f64>::naive(), &cfg, EvalMode::MonteCarlo).unwrap();
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
    }

    #[test]
    fn v2_perfect_strategy_always_wins() {
        let cfg = GameConfig::new(3, 3, 2_000, 7, GameVersion::V2).unwrap();
        let result = run_qic_v2(&Strategy::<f64>::naive(), &cfg).unwrap();
        assert_eq!(result.p_hat, 1.0);
    }

    #[test]
    fn version_relation_for_naive() {
        let cfg = GameConfig::new(4, 1, 40_000, 31, GameVersion::V2).unwrap();
        let report = version_relation_check(&Strategy::<f64>::naive(), &cfg).unwrap();
        assert!((report.predicted_v2 - 0.625).abs() < 1e-12);
        assert!(report.within_three_sigma, "{report:?}");

        // n = 3, m = 1: P = 1/2, so version II should land near 2/3.
        let cfg = GameConfig::new(3, 1, 40_000, 32, GameVersion::V2).unwrap();
        let report = version_relation_check(&Strategy::<f64>::naive(), &cfg).unwrap();
        assert!((report.predicted_v2 - 2.0 / 3.0).abs() < 1e-12);
        assert!(report.within_three_sigma, "{report:?}");
    }

    #[test]
    fn version_relation_for_channel_forms() {
        for lambda in [0.25f64, 1.0] {
            let lambdas = vec![DepolarizingParam::new(lambda).unwrap(); 3];
            let cfg = GameConfig::new(3, 1, 40_000, 55, GameVersion::V2).unwrap();
            let report =
                version_relation_check(&Strategy::channel_form(lambdas), &cfg).unwrap();
            assert!(report.within_three_sigma, "lambda={lambda}: {report:?}");
        }
    }

    #[test]
    fn strategy_bound_consistency() {
        // Every built-in strategy stays at or below the entropic bound.
        let mut rng = RngStream::new(606);
        for n in 2..=6usize {
            let bound = crate::bounds::solve_p_prime::<f64>(1, n) + 1e-9;
            let p = run_qic_v1(&Strategy::<f64>::naive(), &cfg_v1(n, 1), EvalMode::Exact)
                .unwrap()
                .p_hat;
            assert!(p <= bound);
            assert!((p - naive_p::<f64>(1, n)).abs() < 1e-12);

            let lambdas = crate::propcheck::random_admissible_channel_form::<f64>(n, 1, &mut rng);
            let p = run_qic_v1(
                &Strategy::channel_form(lambdas),
                &cfg_v1(n, 1),
                EvalMode::Exact,
            )
            .unwrap()
            .p_hat;
            assert!(p <= bound, "channel form at n={n}: {p}");

            if let Ok(ic2) = Ic2Strategy::<f64>::paired_earac(n) {
                let p = run_qic_v1(&Strategy::teleportation(ic2), &cfg_v1(n, 1), EvalMode::Exact)
                    .unwrap()
                    .p_hat;
                assert!(p <= bound, "teleportation at n={n}: {p}");
            }
        }
    }

    #[test]
    fn wrong_version_config_is_rejected() {
        let cfg = GameConfig::new(2, 1, 1, 0, GameVersion::V2).unwrap();
        assert!(run_qic_v1(&Strategy::<f64>::naive(), &cfg, EvalMode::Exact).is_err());
        let cfg = GameConfig::new(2, 1, 1, 0, GameVersion::V1).unwrap();
        assert!(run_qic_v2(&Strategy::<f64>::naive(), &cfg).is_err());
    }
}
