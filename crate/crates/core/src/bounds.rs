//! Closed-form and numerically solved bounds on the game success
//! probabilities: the naive and teleportation values, the entropic upper
//! bound P' obtained by root finding, the nonlocal-strategy bound Q', and
//! the version conversion map.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{QicError, Result};
use crate::scalar::Scalar;

/// An (m, n) query, m message qubits out of n game rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundQuery {
    pub m: usize,
    pub n: usize,
}

impl BoundQuery {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n < 1 || m > n {
            return Err(QicError::InvalidParameter(format!(
                "bound query requires 1 <= n and m <= n, got m={m}, n={n}"
            )));
        }
        Ok(Self { m, n })
    }
}

/// The four bound values for one (m, n) pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundResult<T> {
    pub p_naive: T,
    pub p_teleport: T,
    pub p_prime: T,
    pub q_prime: T,
}

/// Success probability of the naive strategy: (1 + 3m/n)/4.
pub fn naive_p<T: Scalar>(m: usize, n: usize) -> T {
    assert!(n >= 1 && m <= n, "naive_p requires 0 <= m <= n, n >= 1");
    let ratio = exact_ratio::<T>(m, n);
    (T::one() + T::from_f64(3.0) * ratio) / T::from_f64(4.0)
}

/// Success probability of the best known teleportation strategy for m = 1:
/// (1 + n^{-1/2})^2 / 4.
pub fn teleport_p<T: Scalar>(n: usize) -> T {
    assert!(n >= 1, "teleport_p requires n >= 1");
    let root = T::one() / T::from_f64(n as f64).sqrt();
    let base = T::one() + root;
    base * base / T::from_f64(4.0)
}

/// Nonlocal-strategy bound for m = 1: (1 + 3 n^{-1/2}) / 4.
pub fn q_prime<T: Scalar>(n: usize) -> T {
    assert!(n >= 1, "q_prime requires n >= 1");
    let root = T::one() / T::from_f64(n as f64).sqrt();
    (T::one() + T::from_f64(3.0) * root) / T::from_f64(4.0)
}

/// Version conversion map p = (1 + 2P)/3. Numerically computed inputs may
/// overshoot the unit interval by rounding noise; such values are clamped.
pub fn version_convert<T: Scalar>(p: T) -> Result<T> {
    let slack = T::validation_tol();
    if p < -slack || p > T::one() + slack {
        return Err(QicError::InvalidParameter(format!(
            "success probability {p} outside [0, 1]"
        )));
    }
    let p = p.max(T::zero()).min(T::one());
    Ok((T::one() + T::from_f64(2.0) * p) / T::from_f64(3.0))
}

/// Maximum solution of h(P) + (1 - P) log2 3 = 2(1 - m/n). The ratio m/n is
/// reduced exactly before entering the solver, so (1, 4) and (25, 100) give
/// bitwise identical results.
pub fn solve_p_prime<T: Scalar>(m: usize, n: usize) -> T {
    assert!(n >= 1 && m <= n, "solve_p_prime requires 0 <= m <= n, n >= 1");
    let rhs = T::from_f64(2.0) * (T::one() - exact_ratio::<T>(m, n));
    solve_p_prime_rhs(rhs)
}

/// Solves h(P) + (1 - P) log2 3 = rhs for the maximum root, which lies in
/// [1/4, 1] where the left side decreases strictly from 2 to 0.
pub fn solve_p_prime_rhs<T: Scalar>(rhs: T) -> T {
    let quarter = T::from_f64(0.25);
    let one = T::one();
    let g = |p: T| crate::entropy::omega_entropy(p).expect("p stays in [0, 1]");
    if rhs >= g(quarter) {
        return quarter;
    }
    if rhs <= T::zero() {
        return one;
    }
    bisect_decreasing(g, quarter, one, rhs, T::from_f64(1e-12), 200)
}

/// Bisection for a strictly decreasing `f` on [lo, hi]: returns x with
/// f(x) = target to within the interval tolerance.
fn bisect_decreasing<T: Scalar>(
    f: impl Fn(T) -> T,
    mut lo: T,
    mut hi: T,
    target: T,
    tol: T,
    max_iter: usize,
) -> T {
    let half = T::from_f64(0.5);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) * half;
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * half
}

/// All four bounds for one query. The teleportation column is the m = 1
/// strategy value regardless of m.
pub fn evaluate<T: Scalar>(query: BoundQuery) -> BoundResult<T> {
    BoundResult {
        p_naive: naive_p(query.m, query.n),
        p_teleport: teleport_p(query.n),
        p_prime: solve_p_prime(query.m, query.n),
        q_prime: q_prime(query.n),
    }
}

/// One row of the P' versus Q' comparison at m = 1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow<T> {
    pub n: usize,
    pub p_prime: T,
    pub q_prime: T,
    pub p_prime_below_q_prime: bool,
}

/// Compares P'(1, n) against Q'(n) over an ascending range of n.
pub fn pprime_vs_qprime_scan<T: Scalar>(n_range: impl IntoIterator<Item = usize>) -> Vec<ScanRow<T>> {
    n_range
        .into_iter()
        .map(|n| {
            let p = solve_p_prime::<T>(1, n);
            let q = q_prime::<T>(n);
            ScanRow {
                n,
                p_prime: p,
                q_prime: q,
                p_prime_below_q_prime: p < q,
            }
        })
        .collect()
}

fn exact_ratio<T: Scalar>(m: usize, n: usize) -> T {
    let r = Ratio::new(m as u64, n as u64);
    T::from_f64(r.to_f64().expect("ratio fits in f64"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::omega_entropy;

    const LOG2_3: f64 = 1.5849625007211562;

    #[test]
    fn naive_values() {
        assert!((naive_p::<f64>(1, 4) - 0.4375).abs() < 1e-15);
        assert!((naive_p::<f64>(0, 7) - 0.25).abs() < 1e-15);
        assert!((naive_p::<f64>(5, 5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn teleport_values() {
        assert!((teleport_p::<f64>(1) - 1.0).abs() < 1e-15);
        assert!((teleport_p::<f64>(4) - 0.5625).abs() < 1e-15);
        assert!((teleport_p::<f64>(2) - 0.7285533905932738).abs() < 1e-12);
    }

    #[test]
    fn q_prime_values() {
        assert!((q_prime::<f64>(9) - 0.5).abs() < 1e-15);
        assert!((q_prime::<f64>(1) - 1.0).abs() < 1e-15);
        assert!((q_prime::<f64>(36) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn version_convert_values() {
        assert!((version_convert(1.0f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((version_convert(0.25f64).unwrap() - 0.5).abs() < 1e-15);
        assert!((version_convert(0.4375f64).unwrap() - 0.625).abs() < 1e-15);
        assert!(version_convert(1.5f64).is_err());
    }

    #[test]
    fn solver_hits_endpoints_exactly() {
        assert!((solve_p_prime::<f64>(0, 5) - 0.25).abs() < 1e-9);
        assert!((solve_p_prime::<f64>(5, 5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solver_at_log2_3_right_hand_side() {
        // Independent high-precision value of the maximum root when the
        // right side equals log2 3.
        let p = solve_p_prime_rhs::<f64>(LOG2_3);
        assert!((p - 0.6090897679238187).abs() < 1e-9);
        assert!((p - 0.609).abs() < 5e-4);
    }

    #[test]
    fn solver_residual_vanishes_on_ratio_grid() {
        for k in 0..=200usize {
            let p = solve_p_prime::<f64>(k, 200);
            let rhs = 2.0 * (1.0 - k as f64 / 200.0);
            let residual = (omega_entropy(p).unwrap() - rhs).abs();
            assert!(residual < 1e-9, "k={k}: residual {residual}");
        }
    }

    #[test]
    fn solver_is_monotone_in_ratio() {
        let mut prev = 0.0f64;
        for k in 0..=200usize {
            let p = solve_p_prime::<f64>(k, 200);
            assert!(p >= prev - 1e-12, "not monotone at k={k}");
            prev = p;
        }
    }

    #[test]
    fn equal_reduced_ratios_give_identical_roots() {
        let a = solve_p_prime::<f64>(1, 4);
        let b = solve_p_prime::<f64>(25, 100);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn achievable_strategies_respect_the_bound() {
        for n in 1..=1000usize {
            let p_prime = solve_p_prime::<f64>(1.min(n), n);
            assert!(naive_p::<f64>(1.min(n), n) <= p_prime + 1e-9, "naive at n={n}");
            assert!(teleport_p::<f64>(n) <= p_prime + 1e-9, "teleport at n={n}");
        }
    }

    #[test]
    fn scan_matches_paper_claims() {
        let rows = pprime_vs_qprime_scan::<f64>([1, 50, 1000]);
        assert!(!rows[0].p_prime_below_q_prime); // both are 1 at n = 1
        assert!(rows[1].p_prime_below_q_prime);
        assert!(rows[2].p_prime_below_q_prime);
    }

    #[test]
    fn bound_query_validation() {
        assert!(BoundQuery::new(2, 1).is_err());
        assert!(BoundQuery::new(0, 0).is_err());
        assert!(BoundQuery::new(0, 1).is_ok());
    }
}
