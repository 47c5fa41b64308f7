use coopsched::harness::{run_monte_carlo, run_traces};
use coopsched_core::scenario::MeasurementWindow;
use coopsched_core::{Policy, ScenarioConfig};

fn five_robots(policy: Policy) -> ScenarioConfig {
    let mut cfg = ScenarioConfig { policy, ..ScenarioConfig::default() }.with_robots(5).with_q(1).with_duration(40.0);
    cfg.windows = vec![
        MeasurementWindow::new(0.0, 5.0, true, &[]),
        MeasurementWindow::new(5.0, 20.0, false, &[0, 2, 4]),
        MeasurementWindow::new(20.0, 40.0, false, &[0, 1, 2, 3, 4]),
    ];
    cfg
}

#[test]
fn alg1_beats_random_on_a_small_team() {
    let alg1 = run_monte_carlo(&five_robots(Policy::Alg1), 20, 3).unwrap();
    let random = run_monte_carlo(&five_robots(Policy::Random), 20, 3).unwrap();
    assert!(alg1.all_clean() && random.all_clean());
    assert!(
        alg1.final_log_mean_det() < random.final_log_mean_det(),
        "alg1 {} random {}",
        alg1.final_log_mean_det(),
        random.final_log_mean_det()
    );
}

#[test]
fn paired_runs_share_ground_truth() {
    let a = run_traces(&five_robots(Policy::Alg1), 3, 9).unwrap();
    let b = run_traces(&five_robots(Policy::TakeAll), 3, 9).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.seed, y.seed);
        // Nothing is measured before t = 5 s, so both filters agree up to there.
        assert_eq!(x.ticks[40].log_det, y.ticks[40].log_det);
        assert_eq!(x.ticks[40].sq_error, y.ticks[40].sq_error);
        assert_ne!(x.final_log_det(), y.final_log_det());
    }
}

#[test]
fn repeated_studies_are_identical() {
    let cfg = five_robots(Policy::Random);
    let a = run_monte_carlo(&cfg, 4, 17).unwrap();
    let b = run_monte_carlo(&cfg, 4, 17).unwrap();
    assert_eq!(a.log_mean_det, b.log_mean_det);
    assert_eq!(a.mean_sq_error, b.mean_sq_error);
    let c = run_monte_carlo(&cfg, 4, 18).unwrap();
    assert_ne!(a.log_mean_det, c.log_mean_det);
}
