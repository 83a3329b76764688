use rcm_core::rcm_sim::{
    exact_moment, poisson_gof, run_experiment, sample_rcm, EmpiricalStats, Kernel, MomentKind, SimConfig, SimError,
};
use rcm_core::EndpointGraph;

fn g(s: &str) -> EndpointGraph {
    s.parse().unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut cfg = SimConfig::new(2, 2.0, 15.0, Kernel::Indicator { r0: 0.6 }, 0.8);
    cfg.reps = 64;
    cfg.seed = 11;
    let c3 = g("r=3 m=0 edges=1-2,2-3,3-1");
    let one = in_pool(1, || run_experiment(&cfg, &c3).unwrap());
    let four = in_pool(4, || run_experiment(&cfg, &c3).unwrap());
    assert_eq!(one.counts, four.counts);
    assert_eq!(run_experiment(&cfg, &c3).unwrap(), one);
}

/// Mean of the squared counts and its standard error.
fn second_moment(st: &EmpiricalStats) -> (f64, f64) {
    let sq: Vec<f64> = st.counts.iter().map(|&c| (c as f64).powi(2)).collect();
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn exact_moments_match_simulation() {
    let templates = [
        g("r=2 m=0 edges=1-2"),
        g("r=3 m=0 edges=1-2,2-3"),
        g("r=3 m=0 edges=1-2,2-3,3-1"),
    ];
    let kernels = [(Kernel::Constant, 0.1), (Kernel::Indicator { r0: 0.3 }, 0.9)];
    for (kernel, c) in kernels {
        let mut cfg = SimConfig::new(2, 1.0, 50.0, kernel, c);
        cfg.reps = 3000;
        cfg.seed = 7;
        for t in &templates {
            let st = run_experiment(&cfg, t).unwrap();
            let m1 = exact_moment(t, 1, &cfg, 200_000, MomentKind::Moment, 12).unwrap();
            let m2 = exact_moment(t, 2, &cfg, 200_000, MomentKind::Moment, 12).unwrap();
            let se1 = (st.se_mean.unwrap().powi(2) + m1.se.powi(2)).sqrt();
            assert!(
                (st.mean - m1.value).abs() <= 3.0 * se1,
                "{t} {kernel:?}: {} vs {m1:?}",
                st.mean
            );
            let (emp2, se_emp2) = second_moment(&st);
            let se2 = (se_emp2.powi(2) + m2.se.powi(2)).sqrt();
            assert!((emp2 - m2.value).abs() <= 3.0 * se2, "{t} {kernel:?}: {emp2} vs {m2:?}");
        }
    }
}

#[test]
fn closed_form_edge_cumulants() {
    let k2 = g("r=2 m=0 edges=1-2");
    let cfg = SimConfig::new(2, 1.0, 50.0, Kernel::Constant, 0.1);
    let k1 = exact_moment(&k2, 1, &cfg, 0, MomentKind::Cumulant, 12).unwrap();
    let kk2 = exact_moment(&k2, 2, &cfg, 0, MomentKind::Cumulant, 12).unwrap();
    assert!((k1.value - 250.0).abs() < 1e-9 && k1.se == 0.0);
    assert!((kk2.value - 5500.0).abs() < 1e-6);
}

#[test]
fn endpoints_must_match_the_template() {
    let rooted = g("r=2 m=1 edges=1-2,1-3");
    let cfg = SimConfig::new(2, 1.0, 10.0, Kernel::Constant, 0.5);
    assert_eq!(
        run_experiment(&cfg, &rooted).unwrap_err(),
        SimError::EndpointMismatch { got: 0, want: 1 }
    );
    let mut bad = cfg.clone();
    bad.c = 1.5;
    assert!(matches!(sample_rcm(&bad, 0), Err(SimError::InvalidConfig(_))));
}

#[test]
fn rooted_counts_use_endpoint_links() {
    let rooted = g("r=2 m=1 edges=1-2,1-3");
    let mut cfg = SimConfig::new(2, 1.0, 40.0, Kernel::Constant, 0.2);
    cfg.endpoints = vec![vec![0.5, 0.5]];
    cfg.reps = 2000;
    cfg.seed = 3;
    let st = run_experiment(&cfg, &rooted).unwrap();
    // λ² c² ordered pairs with the first point linked to the endpoint
    let m1 = exact_moment(&rooted, 1, &cfg, 0, MomentKind::Moment, 12).unwrap();
    assert!((m1.value - 40.0f64.powi(2) * 0.04).abs() < 1e-9);
    assert!((st.mean - m1.value).abs() <= 3.0 * st.se_mean.unwrap());
    assert_eq!(st.rounding_flags, 0);
}

#[test]
fn poisson_fit_of_a_sparse_count() {
    let c3 = g("r=3 m=0 edges=1-2,2-3,3-1");
    let mut cfg = SimConfig::new(2, 1.6, 120.0, Kernel::Indicator { r0: 0.8 }, 1.0 / 120.0);
    cfg.reps = 3000;
    cfg.seed = 5;
    let st = run_experiment(&cfg, &c3).unwrap();
    let mu = exact_moment(&c3, 1, &cfg, 200_000, MomentKind::Cumulant, 12)
        .unwrap()
        .value
        / 6.0;
    assert!(poisson_gof(&st, mu) < 0.08);
    assert!(poisson_gof(&st, mu * 3.0) > 0.3);
    assert_eq!(st.histogram.iter().sum::<u64>(), 3000);
}

#[test]
fn jackknife_error_of_the_mean_is_the_usual_one() {
    let counts: Vec<u64> = (0..500u64).map(|i| (i * 7919) % 97).collect();
    let st = EmpiricalStats::from_counts(counts.clone(), 1);
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((st.se_mean.unwrap() - (var / n).sqrt()).abs() < 1e-9);
    assert!((st.variance.unwrap() - var).abs() < 1e-9);
}
