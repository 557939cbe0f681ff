//! Monte-Carlo estimators against exact evaluators: every built-in strategy
//! must agree within four standard errors.

use qic_core::channels::DepolarizingParam;
use qic_core::games::{
    evaluate_nonlocal_ic2, run_ic2, run_qic_v1, version_relation_check, EvalMode, GameConfig,
    GameVersion, Ic2Strategy, NonlocalStrategy, Strategy,
};
use qic_core::RngStream;

const TRIALS: u64 = 100_000;

fn assert_four_sigma(p_hat: f64, std_err: f64, exact: f64, what: &str) {
    let gap = (p_hat - exact).abs();
    assert!(
        gap <= 4.0 * std_err + 1e-9,
        "{what}: |{p_hat} - {exact}| = {gap} > 4 sigma = {}",
        4.0 * std_err
    );
}

fn mc_vs_exact_v1(strategy: &Strategy<f64>, n: usize, m: usize, seed: u64, what: &str) {
    let cfg = GameConfig::new(n, m, TRIALS, seed, GameVersion::V1).unwrap();
    let exact = run_qic_v1(strategy, &cfg, EvalMode::Exact).unwrap();
    let mc = run_qic_v1(strategy, &cfg, EvalMode::MonteCarlo).unwrap();
    assert_four_sigma(mc.p_hat, mc.std_err, exact.p_hat, what);
}

#[test]
fn naive_v1_monte_carlo_agreement() {
    mc_vs_exact_v1(&Strategy::naive(), 4, 1, 21, "naive n=4 m=1");
    mc_vs_exact_v1(&Strategy::naive(), 6, 3, 22, "naive n=6 m=3");
}

#[test]
fn channel_form_v1_monte_carlo_agreement() {
    let lambdas: Vec<DepolarizingParam<f64>> = [0.25, 0.4, 0.55, 0.7, 0.85, 1.0]
        .into_iter()
        .map(|l| DepolarizingParam::new(l).unwrap())
        .collect();
    mc_vs_exact_v1(
        &Strategy::channel_form(lambdas),
        6,
        1,
        23,
        "channel form n=6",
    );
}

#[test]
fn teleportation_v1_monte_carlo_agreement_n2() {
    let strategy = Strategy::teleportation(Ic2Strategy::<f64>::paired_earac(2).unwrap());
    mc_vs_exact_v1(&strategy, 2, 1, 24, "teleport n=2");
}

#[test]
fn teleportation_v1_monte_carlo_agreement_n3() {
    let strategy = Strategy::teleportation(Ic2Strategy::<f64>::paired_earac(3).unwrap());
    mc_vs_exact_v1(&strategy, 3, 1, 25, "teleport n=3");
}

#[test]
fn teleportation_v1_monte_carlo_agreement_n4_concatenated() {
    let strategy = Strategy::teleportation(Ic2Strategy::<f64>::paired_earac(4).unwrap());
    mc_vs_exact_v1(&strategy, 4, 1, 26, "teleport n=4");
}

#[test]
fn paired_earac_ic2_monte_carlo_agreement() {
    let strategy = Ic2Strategy::<f64>::paired_earac(2).unwrap();
    let cfg = GameConfig::new(2, 1, TRIALS, 27, GameVersion::V1).unwrap();
    let exact = run_ic2(&strategy, &cfg, EvalMode::Exact).unwrap();
    let mc = run_ic2(&strategy, &cfg, EvalMode::MonteCarlo).unwrap();
    assert_four_sigma(mc.p_hat, mc.std_err, exact.p_hat, "IC-2 paired EARAC n=2");
}

#[test]
fn nonlocal_ic2_monte_carlo_agreement() {
    let mut rng = RngStream::new(4242);
    let s = NonlocalStrategy::<f64>::random(2, 16, &mut rng).unwrap();
    let exact = evaluate_nonlocal_ic2(&s).q;
    let cfg = GameConfig::new(2, 1, TRIALS, 28, GameVersion::V1).unwrap();
    let mc = run_ic2(&Ic2Strategy::Nonlocal(s), &cfg, EvalMode::MonteCarlo).unwrap();
    assert_four_sigma(mc.p_hat, mc.std_err, exact, "nonlocal IC-2 n=2");
}

#[test]
fn teleportation_version_relation() {
    let strategy = Strategy::teleportation(Ic2Strategy::<f64>::paired_earac(2).unwrap());
    let cfg = GameConfig::new(2, 1, 30_000, 29, GameVersion::V2).unwrap();
    let report = version_relation_check(&strategy, &cfg).unwrap();
    assert!(report.within_three_sigma, "{report:?}");
}
