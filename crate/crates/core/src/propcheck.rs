//! Property-based verification of the entropic inequality chain behind the
//! message bound, the classical-message variant, the per-round sum bound,
//! and the equality (achievability) conditions.
//!
//! Every trial is a pure function of `(seed, trial index)`, so any reported
//! violation can be replayed bitwise from its fingerprint.

use serde::Serialize;

use crate::channels::{depolarizing, random_channel, DepolarizingParam};
use crate::entropy::{von_neumann_entropy, EntropyReport};
use crate::error::{QicError, Result};
use crate::games::ic1_earac_success;
use crate::linalg::{ComplexMatrix, DensityOperator, PureState};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Fuzzing parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FuzzConfig<T> {
    pub trials: u64,
    pub seed: u64,
    /// Subsystem dimensions are drawn from 2..=max_subsystem_dim (at most 4).
    pub max_subsystem_dim: usize,
    pub tolerance: T,
}

impl<T: Scalar> FuzzConfig<T> {
    pub fn new(trials: u64, seed: u64, max_subsystem_dim: usize, tolerance: T) -> Result<Self> {
        if trials < 1 {
            return Err(QicError::InvalidParameter("trials must be at least 1".into()));
        }
        if !(2..=4).contains(&max_subsystem_dim) {
            return Err(QicError::InvalidParameter(format!(
                "max_subsystem_dim must be in 2..=4, got {max_subsystem_dim}"
            )));
        }
        if tolerance <= T::zero() {
            return Err(QicError::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(Self {
            trials,
            seed,
            max_subsystem_dim,
            tolerance,
        })
    }

    pub fn with_defaults(trials: u64, seed: u64) -> Self {
        Self::new(trials, seed, 4, T::from_f64(1e-8)).expect("default config is valid")
    }
}

/// The fuzz suites exposed by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzSuite {
    QicChain,
    ClassicalBound,
    SumBound,
    Achievability,
}

impl FuzzSuite {
    pub fn name(self) -> &'static str {
        match self {
            Self::QicChain => "qicchain",
            Self::ClassicalBound => "classical",
            Self::SumBound => "sumbound",
            Self::Achievability => "achievability",
        }
    }
}

/// One evaluated inequality: holds iff `left <= right + tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck<T> {
    pub label: &'static str,
    pub left: T,
    pub right: T,
}

/// A failed inequality, replayable from `(seed, trial)`.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport<T> {
    pub suite: &'static str,
    pub trial: u64,
    pub inequality: &'static str,
    pub left: T,
    pub right: T,
    pub seed: u64,
}

type EntropyFn<T> = fn(&DensityOperator<T>) -> T;

fn run_suite_with<T: Scalar>(
    suite: FuzzSuite,
    cfg: &FuzzConfig<T>,
    entropy: EntropyFn<T>,
) -> Vec<ViolationReport<T>> {
    let mut violations = Vec::new();
    for trial in 0..cfg.trials {
        for check in trial_checks(suite, cfg, trial, entropy) {
            if check.left > check.right + cfg.tolerance {
                violations.push(ViolationReport {
                    suite: suite.name(),
                    trial,
                    inequality: check.label,
                    left: check.left,
                    right: check.right,
                    seed: cfg.seed,
                });
            }
        }
    }
    violations
}

/// Runs a suite with the real entropy. An empty result means every
/// inequality held within tolerance.
pub fn run_suite<T: Scalar>(suite: FuzzSuite, cfg: &FuzzConfig<T>) -> Vec<ViolationReport<T>> {
    run_suite_with(suite, cfg, von_neumann_entropy)
}

/// Self-test hook: runs a suite with a sign-flipped entropy, which must
/// produce violations if the harness is wired correctly.
#[doc(hidden)]
pub fn run_suite_with_corrupted_entropy<T: Scalar>(
    suite: FuzzSuite,
    cfg: &FuzzConfig<T>,
) -> Vec<ViolationReport<T>> {
    run_suite_with(suite, cfg, |rho| -von_neumann_entropy(rho))
}

/// Recomputes every inequality of one trial; bitwise identical to what the
/// suite run evaluated for that `(seed, trial)`.
pub fn replay_trial<T: Scalar>(
    suite: FuzzSuite,
    cfg: &FuzzConfig<T>,
    trial: u64,
) -> Vec<InequalityCheck<T>> {
    trial_checks(suite, cfg, trial, von_neumann_entropy)
}

/// Random tripartite state plus a random processing channel; checks each
/// link of the chain that proves the 2-log2(dim T) message bound.
pub fn check_qic_chain<T: Scalar>(cfg: &FuzzConfig<T>) -> Vec<ViolationReport<T>> {
    run_suite(FuzzSuite::QicChain, cfg)
}

/// Random classical-register states; checks S(CB) <= S(CBT) and the
/// log2(dim T) message bound.
pub fn check_classical_bound<T: Scalar>(cfg: &FuzzConfig<T>) -> Vec<ViolationReport<T>> {
    run_suite(FuzzSuite::ClassicalBound, cfg)
}

/// Random admissible covariant strategies; checks the per-round information
/// sum against twice the message size.
pub fn check_sum_bound_suite<T: Scalar>(cfg: &FuzzConfig<T>) -> Vec<ViolationReport<T>> {
    run_suite(FuzzSuite::SumBound, cfg)
}

fn trial_checks<T: Scalar>(
    suite: FuzzSuite,
    cfg: &FuzzConfig<T>,
    trial: u64,
    entropy: EntropyFn<T>,
) -> Vec<InequalityCheck<T>> {
    let mut rng = RngStream::new(cfg.seed).substream(trial);
    match suite {
        FuzzSuite::QicChain => qic_chain_trial(cfg, &mut rng, entropy),
        FuzzSuite::ClassicalBound => classical_trial(cfg, &mut rng, entropy),
        FuzzSuite::SumBound => sum_bound_trial(&mut rng, entropy),
        FuzzSuite::Achievability => achievability_trial(cfg, trial, &mut rng, entropy),
    }
}

fn draw_dim<T: Scalar>(cfg: &FuzzConfig<T>, rng: &mut RngStream) -> usize {
    2 + rng.below(cfg.max_subsystem_dim - 1)
}

fn qic_chain_trial<T: Scalar>(
    cfg: &FuzzConfig<T>,
    rng: &mut RngStream,
    entropy: EntropyFn<T>,
) -> Vec<InequalityCheck<T>> {
    let (dc, db, dt) = (draw_dim(cfg, rng), draw_dim(cfg, rng), draw_dim(cfg, rng));
    let d_out = draw_dim(cfg, rng);
    let rho = DensityOperator::<T>::random_mixed(&[dc, db, dt], rng);

    let s = |keep: &[usize]| entropy(&rho.partial_trace(keep).expect("valid indices"));
    let s_b = s(&[1]);
    let s_t = s(&[2]);
    let s_c = s(&[0]);
    let s_bt = s(&[1, 2]);
    let s_cb = s(&[0, 1]);
    let s_cbt = entropy(&rho);

    // Bob processes his whole holding BT into B' through a random channel.
    let channel = random_channel::<T>(db * dt, d_out, rng);
    let grouped = rho.regroup(&[dc, db * dt]).expect("same total dimension");
    let rho_cbp = channel.apply(&grouped, 1).expect("dims match");
    let s_bp = entropy(&rho_cbp.partial_trace(&[1]).expect("keep B'"));
    let s_cbp = entropy(&rho_cbp);

    let i_cb = s_c + s_b - s_cb;
    let i_cbt = s_c + s_bt - s_cbt;
    let i_cbp = s_c + s_bp - s_cbp;
    let log2_dt = T::from_f64((dt as f64).log2());

    vec![
        InequalityCheck {
            label: "subadditivity: S(BT) <= S(B) + S(T)",
            left: s_bt,
            right: s_b + s_t,
        },
        InequalityCheck {
            label: "triangle: S(CB) - S(T) <= S(CBT)",
            left: s_cb - s_t,
            right: s_cbt,
        },
        InequalityCheck {
            label: "data processing: I(C:B') <= I(C:BT)",
            left: i_cbp,
            right: i_cbt,
        },
        InequalityCheck {
            label: "message bound: dI(C:B) <= 2 log2 dim T",
            left: i_cbp - i_cb,
            right: log2_dt + log2_dt,
        },
    ]
}

fn classical_trial<T: Scalar>(
    cfg: &FuzzConfig<T>,
    rng: &mut RngStream,
    entropy: EntropyFn<T>,
) -> Vec<InequalityCheck<T>> {
    let (dc, db) = (draw_dim(cfg, rng), draw_dim(cfg, rng));
    let m_bits = if cfg.max_subsystem_dim >= 4 {
        1 + rng.below(2)
    } else {
        1
    };
    let dt = 1usize << m_bits;
    let rho = random_classical_register_state::<T>(dc, db, dt, rng);

    let s = |keep: &[usize]| entropy(&rho.partial_trace(keep).expect("valid indices"));
    let s_c = s(&[0]);
    let s_b = s(&[1]);
    let s_bt = s(&[1, 2]);
    let s_cb = s(&[0, 1]);
    let s_cbt = entropy(&rho);

    let i_cb = s_c + s_b - s_cb;
    let i_cbt = s_c + s_bt - s_cbt;

    vec![
        InequalityCheck {
            label: "classical register: S(CB) <= S(CBT)",
            left: s_cb,
            right: s_cbt,
        },
        InequalityCheck {
            label: "classical message bound: dI(C:B) <= log2 dim T",
            left: i_cbt - i_cb,
            right: T::from_f64(m_bits as f64),
        },
    ]
}

/// Block-diagonal state sum_x p_x rho_CB^x ⊗ |x⟩⟨x|_T: a classical register
/// T correlated with CB.
pub fn random_classical_register_state<T: Scalar>(
    dc: usize,
    db: usize,
    dt: usize,
    rng: &mut RngStream,
) -> DensityOperator<T> {
    // Random point on the probability simplex via exponential draws.
    let mut weights: Vec<T> = (0..dt)
        .map(|_| {
            let u: T = rng.uniform();
            -(T::one() - u).max(T::from_f64(1e-16)).ln()
        })
        .collect();
    let total: T = weights.iter().copied().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }

    let d_cb = dc * db;
    let full = d_cb * dt;
    let mut mat = ComplexMatrix::zeros(full, full);
    for (x, w) in weights.iter().enumerate() {
        let block = DensityOperator::<T>::random_mixed(&[dc, db], rng);
        for r in 0..d_cb {
            for c in 0..d_cb {
                mat.set(
                    r * dt + x,
                    c * dt + x,
                    block.matrix().get(r, c).scale(*w),
                );
            }
        }
    }
    DensityOperator::new_unchecked(mat, vec![dc, db, dt])
}

fn sum_bound_trial<T: Scalar>(
    rng: &mut RngStream,
    entropy: EntropyFn<T>,
) -> Vec<InequalityCheck<T>> {
    let n = 2 + rng.below(7);
    let m = rng.below(n + 1);
    let lambdas = random_admissible_channel_form::<T>(n, m, rng);
    let report = check_sum_bound_with(&lambdas, m, entropy);
    vec![InequalityCheck {
        label: "sum bound: sum_k I(C_k:B_k) <= 2m",
        left: report.total,
        right: report.bound,
    }]
}

/// Random tripartite states (alternating pure and mixed): the equality gaps
/// are theorems and must never go negative.
fn achievability_trial<T: Scalar>(
    cfg: &FuzzConfig<T>,
    trial: u64,
    rng: &mut RngStream,
    entropy: EntropyFn<T>,
) -> Vec<InequalityCheck<T>> {
    let dims = [draw_dim(cfg, rng), draw_dim(cfg, rng), draw_dim(cfg, rng)];
    let rho = if trial.is_multiple_of(2) {
        PureState::<T>::haar_random(&dims, rng).to_density()
    } else {
        DensityOperator::<T>::random_mixed(&dims, rng)
    };
    let s = |keep: &[usize]| entropy(&rho.partial_trace(keep).expect("valid indices"));
    let s_b = s(&[1]);
    let s_t = s(&[2]);
    let s_bt = s(&[1, 2]);
    let s_cb = s(&[0, 1]);
    let s_cbt = entropy(&rho);
    let log2_dt = T::from_f64((dims[2] as f64).log2());
    vec![
        InequalityCheck {
            label: "gap nonnegative: S(BT) <= S(B) + S(T)",
            left: s_bt,
            right: s_b + s_t,
        },
        InequalityCheck {
            label: "gap nonnegative: S(CB) <= S(CBT) + S(T)",
            left: s_cb,
            right: s_cbt + s_t,
        },
        InequalityCheck {
            label: "gap nonnegative: S(T) <= log2 dim T",
            left: s_t,
            right: log2_dt,
        },
    ]
}

/// Covariant strategy admissible with an m-qubit message, drawn as a convex
/// mixture of known admissible strategies (per-round information is convex
/// in the mixing weights, so mixtures remain admissible):
/// forwarding subsets of at most m qubits, a paired random access code block
/// when m >= 1, and the do-nothing strategy.
pub fn random_admissible_channel_form<T: Scalar>(
    n: usize,
    m: usize,
    rng: &mut RngStream,
) -> Vec<DepolarizingParam<T>> {
    let quarter = T::from_f64(0.25);
    let components = 1 + rng.below(3);
    let mut weights: Vec<T> = (0..components)
        .map(|_| {
            let u: T = rng.uniform();
            -(T::one() - u).max(T::from_f64(1e-16)).ln()
        })
        .collect();
    let total: T = weights.iter().copied().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }

    let mut lambdas = vec![T::zero(); n];
    for weight in weights {
        let mut component = vec![quarter; n];
        match rng.below(3) {
            // Forward a random subset of at most m qubits untouched.
            0 => {
                let keep = rng.below(m + 1);
                let mut chosen = Vec::new();
                while chosen.len() < keep {
                    let j = rng.below(n);
                    if !chosen.contains(&j) {
                        chosen.push(j);
                    }
                }
                for j in chosen {
                    component[j] = T::one();
                }
            }
            // Paired random access code on a block, one message qubit.
            1 if m >= 1 => {
                let sizes: Vec<usize> = [2usize, 3, 4]
                    .into_iter()
                    .filter(|nb| *nb <= n)
                    .collect();
                let nb = sizes[rng.below(sizes.len())];
                let q = ic1_earac_success::<T>(nb).expect("supported block size");
                let mut chosen = Vec::new();
                while chosen.len() < nb {
                    let j = rng.below(n);
                    if !chosen.contains(&j) {
                        chosen.push(j);
                    }
                }
                for j in chosen {
                    component[j] = q * q;
                }
            }
            // Do nothing: every round fully depolarized.
            _ => {}
        }
        for (lam, comp) in lambdas.iter_mut().zip(component) {
            *lam += weight * comp;
        }
    }
    lambdas
        .into_iter()
        .map(|l| DepolarizingParam::new(l).expect("mixtures stay in [1/4, 1]"))
        .collect()
}

/// Outcome of checking one covariant strategy against the sum bound.
#[derive(Debug, Clone, Serialize)]
pub struct SumBoundReport<T> {
    /// I(C_k:B_k) = 2 - S(omega_k) per round.
    pub per_round_information: Vec<T>,
    pub total: T,
    pub bound: T,
    pub satisfied: bool,
}

/// Computes sum_k I(C_k:B_k) for a covariant strategy and compares it with
/// 2m. The round states are built by actually applying the depolarizing
/// channel to half a singlet.
pub fn check_sum_bound<T: Scalar>(
    lambdas: &[DepolarizingParam<T>],
    m: usize,
) -> SumBoundReport<T> {
    check_sum_bound_with(lambdas, m, von_neumann_entropy)
}

fn check_sum_bound_with<T: Scalar>(
    lambdas: &[DepolarizingParam<T>],
    m: usize,
    entropy: EntropyFn<T>,
) -> SumBoundReport<T> {
    let singlet = PureState::<T>::bell(crate::linalg::BellIndex::PsiMinus).to_density();
    let two = T::from_f64(2.0);
    let per_round: Vec<T> = lambdas
        .iter()
        .map(|lam| {
            let omega = depolarizing(*lam)
                .apply(&singlet, 1)
                .expect("qubit channel on qubit pair");
            two - entropy(&omega)
        })
        .collect();
    let total = per_round.iter().copied().sum();
    let bound = T::from_f64(2.0 * m as f64);
    SumBoundReport {
        satisfied: total <= bound + T::psd_tol(),
        per_round_information: per_round,
        total,
        bound,
    }
}

/// Residuals of the three equality conditions for saturating the message
/// bound, reported as non-negative gaps.
#[derive(Debug, Clone, Serialize)]
pub struct AchievabilityReport<T> {
    /// S(B) + S(T) - S(BT): zero iff T carries no correlations with B.
    pub subadditivity_gap: EntropyReport<T>,
    /// S(CBT) + S(T) - S(CB): zero iff T is entangled only with CB.
    pub triangle_gap: EntropyReport<T>,
    /// log2 dim(T) - S(T): zero iff the message is maximally mixed.
    pub mixedness_gap: EntropyReport<T>,
    pub equality_achievable: bool,
    pub tolerance: T,
}

/// Evaluates the equality conditions on a three-subsystem state ordered
/// (C, B, T).
pub fn check_achievability<T: Scalar>(
    rho: &DensityOperator<T>,
    tolerance: T,
) -> Result<AchievabilityReport<T>> {
    if rho.dims().len() != 3 {
        return Err(QicError::DimensionMismatch(format!(
            "achievability check needs exactly three subsystems, got {:?}",
            rho.dims()
        )));
    }
    let s = |keep: &[usize]| von_neumann_entropy(&rho.partial_trace(keep).expect("valid"));
    let s_b = s(&[1]);
    let s_t = s(&[2]);
    let s_bt = s(&[1, 2]);
    let s_cb = s(&[0, 1]);
    let s_cbt = von_neumann_entropy(rho);
    let dims = rho.dims();
    let log2_dt = T::from_f64((dims[2] as f64).log2());

    let sub_gap = s_b + s_t - s_bt;
    let tri_gap = s_cbt + s_t - s_cb;
    let mix_gap = log2_dt - s_t;
    let achievable =
        sub_gap.abs() <= tolerance && tri_gap.abs() <= tolerance && mix_gap.abs() <= tolerance;
    Ok(AchievabilityReport {
        subadditivity_gap: EntropyReport::new("S(B)+S(T)-S(BT)", sub_gap, dims),
        triangle_gap: EntropyReport::new("S(CBT)+S(T)-S(CB)", tri_gap, dims),
        mixedness_gap: EntropyReport::new("log2(dimT)-S(T)", mix_gap, dims),
        equality_achievable: achievable,
        tolerance,
    })
}

/// The (C, B, T) state produced by the naive strategy: T holds m qubits,
/// each maximally entangled with the matching qubit of C, and B is an
/// uncorrelated |0⟩. Saturates the message bound with dI = 2m.
pub fn naive_strategy_state<T: Scalar>(m: usize) -> DensityOperator<T> {
    assert!((1..=6).contains(&m), "supported message sizes: 1..=6");
    let dim = 1usize << m;
    let mut amps = vec![num_complex::Complex::new(T::zero(), T::zero()); dim * 2 * dim];
    let norm = T::one() / T::from_f64((dim as f64).sqrt());
    for b in 0..dim {
        let sign = if (b.count_ones() & 1) == 0 {
            norm
        } else {
            -norm
        };
        let complement = !b & (dim - 1);
        // Index layout (C, B, T) with B = |0⟩.
        let idx = (b * 2) * dim + complement;
        amps[idx] = num_complex::Complex::new(sign, T::zero());
    }
    PureState::new(amps, vec![dim, 2, dim])
        .expect("normalized by construction")
        .to_density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::omega_entropy;
    use crate::linalg::BellIndex;

    fn small_cfg(trials: u64, seed: u64) -> FuzzConfig<f64> {
        FuzzConfig::new(trials, seed, 4, 1e-8).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(FuzzConfig::<f64>::new(0, 1, 4, 1e-8).is_err());
        assert!(FuzzConfig::<f64>::new(1, 1, 5, 1e-8).is_err());
        assert!(FuzzConfig::<f64>::new(1, 1, 1, 1e-8).is_err());
        assert!(FuzzConfig::<f64>::new(1, 1, 2, -1.0).is_err());
    }

    #[test]
    fn qic_chain_clean_on_small_run() {
        let violations = check_qic_chain(&small_cfg(50, 2024));
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn classical_bound_clean_on_small_run() {
        let violations = check_classical_bound(&small_cfg(50, 2025));
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn sum_bound_clean_on_small_run() {
        let violations = check_sum_bound_suite(&small_cfg(50, 2026));
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn corrupted_entropy_triggers_violations() {
        let violations =
            run_suite_with_corrupted_entropy(FuzzSuite::QicChain, &small_cfg(20, 1));
        assert!(!violations.is_empty());
    }

    #[test]
    fn replay_reproduces_trial_values_bitwise() {
        let cfg = small_cfg(10, 77);
        for trial in [0u64, 3, 9] {
            let a = replay_trial(FuzzSuite::QicChain, &cfg, trial);
            let b = replay_trial(FuzzSuite::QicChain, &cfg, trial);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.left.to_bits(), y.left.to_bits());
                assert_eq!(x.right.to_bits(), y.right.to_bits());
            }
        }
    }

    #[test]
    fn equality_case_half_singlet_message() {
        // T is half a singlet with C, B is a trivial |0⟩ qubit: the
        // information gain is exactly 2 and every gap closes.
        let state = naive_strategy_state::<f64>(1);
        let report = check_achievability(&state, 1e-8).unwrap();
        assert!(report.equality_achievable, "{report:?}");

        // Same state built by hand from a singlet, as a cross-check.
        let by_hand = PureState::<f64>::bell(BellIndex::PsiMinus).to_density();
        let ct = state.partial_trace(&[0, 2]).unwrap();
        assert!(ct.matrix().max_abs_diff(by_hand.matrix()) < 1e-12);
    }

    #[test]
    fn naive_state_information_gain_is_two_m() {
        for m in 1..=3usize {
            let rho = naive_strategy_state::<f64>(m);
            // I(C:BT) - I(C:B) with B uncorrelated: the first mutual
            // information evaluates to 2m, the second to 0.
            let s = |keep: &[usize]| von_neumann_entropy(&rho.partial_trace(keep).unwrap());
            let i_cbt = s(&[0]) + s(&[1, 2]) - von_neumann_entropy(&rho);
            let i_cb = s(&[0]) + s(&[1]) - s(&[0, 1]);
            let delta = i_cbt - i_cb;
            assert!((delta - 2.0 * m as f64).abs() < 1e-9, "m={m}: {delta}");
        }
    }

    #[test]
    fn naive_state_achieves_equality_for_small_m() {
        for m in 1..=3usize {
            let report = check_achievability(&naive_strategy_state::<f64>(m), 1e-8).unwrap();
            assert!(report.equality_achievable, "m={m}: {report:?}");
        }
    }

    #[test]
    fn product_register_gains_nothing() {
        let mut rng = RngStream::new(4);
        let cb = DensityOperator::<f64>::random_mixed(&[2, 2], &mut rng);
        let t = DensityOperator::<f64>::maximally_mixed(&[2]);
        let rho = cb.tensor(&t);
        let s = |keep: &[usize]| von_neumann_entropy(&rho.partial_trace(keep).unwrap());
        let i_cbt = s(&[0]) + s(&[1, 2]) - von_neumann_entropy(&rho);
        let i_cb = s(&[0]) + s(&[1]) - s(&[0, 1]);
        assert!((i_cbt - i_cb).abs() < 1e-9);

        // Product T: the mixedness gap closes but the triangle gap stays
        // open, so equality is not achievable.
        let report = check_achievability(&rho, 1e-8).unwrap();
        assert!(report.mixedness_gap.value.abs() < 1e-9);
        assert!(report.triangle_gap.value > 0.5);
        assert!(!report.equality_achievable);
    }

    #[test]
    fn generic_states_have_positive_gaps() {
        let mut rng = RngStream::new(8);
        let mut open = 0;
        for _ in 0..25 {
            let rho = DensityOperator::<f64>::random_mixed(&[2, 2, 2], &mut rng);
            let report = check_achievability(&rho, 1e-8).unwrap();
            // The gaps are theorems: they can never go negative.
            assert!(report.subadditivity_gap.value > -1e-8);
            assert!(report.triangle_gap.value > -1e-8);
            assert!(report.mixedness_gap.value > -1e-8);
            if !report.equality_achievable {
                open += 1;
            }
        }
        assert!(open > 20, "random states almost never achieve equality");
    }

    #[test]
    fn classical_copy_saturates_classical_bound() {
        // T uniform bit, C a perfect copy, B trivial: dI = 1 = m.
        let mut mat = ComplexMatrix::<f64>::zeros(8, 8);
        // dims (C, B, T) = (2, 2, 2); entries (c b t) with b = 0.
        for x in 0..2usize {
            let idx = (x * 2) * 2 + x;
            mat.set(idx, idx, num_complex::Complex::new(0.5, 0.0));
        }
        let rho = DensityOperator::new(mat, vec![2, 2, 2]).unwrap();
        let s = |keep: &[usize]| von_neumann_entropy(&rho.partial_trace(keep).unwrap());
        let i_cbt = s(&[0]) + s(&[1, 2]) - von_neumann_entropy(&rho);
        let i_cb = s(&[0]) + s(&[1]) - s(&[0, 1]);
        assert!((i_cbt - i_cb - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sum_bound_saturated_by_naive_strategy() {
        for (n, m) in [(4usize, 1usize), (5, 2), (3, 3)] {
            let lambdas: Vec<DepolarizingParam<f64>> = (0..n)
                .map(|k| {
                    DepolarizingParam::new(if k < m { 1.0 } else { 0.25 }).unwrap()
                })
                .collect();
            let report = check_sum_bound(&lambdas, m);
            assert!(report.satisfied);
            assert!(
                (report.total - 2.0 * m as f64).abs() < 1e-9,
                "n={n} m={m}: {}",
                report.total
            );
        }
    }

    #[test]
    fn sum_bound_for_fully_depolarizing() {
        let lambdas = vec![DepolarizingParam::new(0.25f64).unwrap(); 4];
        let report = check_sum_bound(&lambdas, 0);
        assert!(report.satisfied);
        assert!(report.total.abs() < 1e-9);
    }

    #[test]
    fn sum_bound_for_paired_earac_block() {
        // lambda_k = q^2 on both rounds; the information sum stays below 2
        // and matches the closed-form entropy.
        let q = ic1_earac_success::<f64>(2).unwrap();
        let lam = DepolarizingParam::new(q * q).unwrap();
        let report = check_sum_bound(&[lam, lam], 1);
        assert!(report.satisfied);
        let expected = 2.0 * (2.0 - omega_entropy(q * q).unwrap());
        assert!((report.total - expected).abs() < 1e-9);
        assert!(report.total <= 2.0);
    }
}
