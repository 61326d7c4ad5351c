//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a `criterion N: PASS` line (visible with `--nocapture`).
//!
//! Statistical criteria state their retry policy inline; every tolerance is
//! pinned in the assertions.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use pilotseq::model::{
    Acceleration, Constraint, DesignProblem, InterferenceMatrix, OptimizerSettings, SequenceSet,
};
use pilotseq::{bounds, construct, metrics, mm, oracle, sim};

fn toeplitz(cells: usize, beta: f64) -> InterferenceMatrix {
    InterferenceMatrix::toeplitz(cells, beta).unwrap()
}

fn design_problem(
    tau: usize,
    cells: usize,
    users: usize,
    b: InterferenceMatrix,
    constraint: Constraint,
    max_iterations: usize,
    epsilon: f64,
    seed: u64,
    acceleration: Acceleration,
) -> DesignProblem {
    DesignProblem::new(
        tau,
        cells,
        users,
        b,
        constraint,
        OptimizerSettings {
            max_iterations,
            epsilon,
            seed,
            acceleration,
        },
    )
    .unwrap()
}

/// τ×(J·K) assembly that stacks the same per-cell block J times, without the
/// positive-definiteness gate (used to evaluate the β = 1 boundary).
fn stacked_assembly(tau: usize, cells: usize, users: usize) -> SequenceSet {
    let block = construct::wbe_truncated_dft(tau, users).unwrap();
    let mut data = DMatrix::from_element(tau, cells * users, Complex64::new(0.0, 0.0));
    for j in 0..cells {
        data.view_mut((0, j * users), (tau, users)).copy_from(&block);
    }
    SequenceSet::new(tau, cells, users, data, true).unwrap()
}

fn random_valid_b(cells: usize, rng: &mut ChaCha8Rng) -> InterferenceMatrix {
    let mut rows = vec![vec![0.0f64; cells]; cells];
    for i in 0..cells {
        rows[i][i] = 1.0;
        for j in 0..i {
            let beta: f64 = rng.random();
            rows[i][j] = beta;
            rows[j][i] = beta;
        }
    }
    InterferenceMatrix::from_rows(&rows).unwrap()
}

#[test]
fn criterion_01_theorem_two_equality() {
    let start = Instant::now();
    let (tau, users, cells) = (13usize, 16usize, 3usize);
    for beta in [0.1, 0.7, 0.3] {
        let b = toeplitz(cells, beta);
        let set = construct::optimal_multi_cell(tau, users, &b).unwrap();
        let etsc = metrics::etsc(&set, &b).unwrap();
        let expected = (users * users) as f64 / tau as f64 * b.entry_sum();
        let rel = (etsc - expected).abs() / expected;
        assert!(rel <= 1e-9, "beta = {beta}: relative gap {rel}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1: PASS - Theorem-2 equality at 1e-9 relative in {elapsed:?}");
}

#[test]
fn criterion_02_construction_vs_pooled_wbe() {
    let start = Instant::now();
    let (tau, cells) = (39usize, 3usize);
    for users in [42usize, 44, 46, 48] {
        let pooled = construct::pooled_wbe_baseline(tau, cells, users).unwrap();
        for step in 0..=10 {
            let beta = step as f64 / 10.0;
            let b = toeplitz(cells, beta);
            let pooled_etsc = metrics::etsc(&pooled, &b).unwrap();
            if beta < 1.0 {
                let set = construct::optimal_multi_cell(tau, users, &b).unwrap();
                let etsc = metrics::etsc(&set, &b).unwrap();
                assert!(
                    etsc <= pooled_etsc,
                    "K = {users}, beta = {beta}: constructed {etsc} above pooled {pooled_etsc}"
                );
            } else {
                let set = stacked_assembly(tau, cells, users);
                let etsc = metrics::etsc(&set, &b).unwrap();
                let rel = (etsc - pooled_etsc).abs() / pooled_etsc;
                assert!(
                    rel <= 1e-6,
                    "K = {users}: beta = 1 equality violated, relative gap {rel}"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 2: PASS - construction dominates pooled WBE, equal at beta = 1 ({elapsed:?})");
}

fn two_cell_run(beta: f64, constraint: Constraint) {
    let (tau, users) = (39usize, 32usize);
    let bound = bounds::extended_welch_bound_two_cell(tau, users, beta).unwrap();
    let p = design_problem(
        tau,
        2,
        users,
        toeplitz(2, beta),
        constraint,
        20_000,
        1e-10,
        1,
        Acceleration::Plain,
    );
    let start = Instant::now();
    let (_, trace) = mm::solve(&p).unwrap();
    let elapsed = start.elapsed();
    let final_etsc = trace.final_objective();
    let ratio = final_etsc / bound;
    assert!(
        ratio <= 1.02,
        "beta = {beta} {constraint:?}: final {final_etsc} is {ratio:.4}x the bound {bound}"
    );
    // the trace never dips below the applicable bound
    for &v in &trace.objectives {
        assert!(v >= bound - 1e-6, "trace value {v} below bound {bound}");
    }
    assert!(elapsed.as_secs_f64() < 300.0, "run took {elapsed:?}");
    println!(
        "criterion 3: PASS - beta = {beta}, {constraint:?}: {final_etsc:.4} vs bound {bound:.4} \
         ({:.2}% over, {} iterations, {elapsed:?})",
        (ratio - 1.0) * 100.0,
        trace.iterations()
    );
}

#[test]
fn criterion_03_two_cell_unit_norm_beta_00() {
    two_cell_run(0.0, Constraint::UnitNorm);
}

#[test]
fn criterion_03_two_cell_unit_norm_beta_05() {
    two_cell_run(0.5, Constraint::UnitNorm);
}

#[test]
fn criterion_03_two_cell_unit_norm_beta_10() {
    two_cell_run(1.0, Constraint::UnitNorm);
}

#[test]
fn criterion_03_two_cell_unimodular_beta_00() {
    two_cell_run(0.0, Constraint::Unimodular);
}

#[test]
fn criterion_03_two_cell_unimodular_beta_05() {
    two_cell_run(0.5, Constraint::Unimodular);
}

#[test]
fn criterion_03_two_cell_unimodular_beta_10() {
    two_cell_run(1.0, Constraint::Unimodular);
}

#[test]
fn criterion_04_monotone_descent() {
    let shapes = [(2usize, 8usize, 5usize), (3, 6, 8), (4, 4, 4)]; // (J, K, tau)
    let mut runs = 0usize;
    for seed in 0..20u64 {
        for &(cells, users, tau) in &shapes {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 101 + cells as u64);
            let b = random_valid_b(cells, &mut rng);
            for constraint in [Constraint::UnitNorm, Constraint::Unimodular] {
                for acceleration in [Acceleration::Plain, Acceleration::Squarem] {
                    let p = design_problem(
                        tau,
                        cells,
                        users,
                        b.clone(),
                        constraint,
                        400,
                        0.0,
                        seed,
                        acceleration,
                    );
                    let (_, trace) = mm::solve(&p).unwrap();
                    for w in trace.objectives.windows(2) {
                        assert!(
                            w[1] <= w[0] + 1e-12,
                            "seed {seed} (J={cells},K={users},tau={tau}) {constraint:?} \
                             {acceleration:?}: {} -> {}",
                            w[0],
                            w[1]
                        );
                    }
                    // ETSC is bounded below by zero throughout
                    assert!(trace.objectives.iter().all(|&v| v >= -1e-6));
                    runs += 1;
                }
            }
        }
    }
    println!("criterion 4: PASS - {runs} traces nonincreasing within 1e-12 slack");
}

#[test]
fn criterion_05_theorem_three_lambda1() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(tau, n) in &[(2usize, 2usize), (3, 4), (4, 6)] {
        for _ in 0..10 {
            let mut weights = DMatrix::zeros(n, n);
            for i in 0..n {
                weights[(i, i)] = 1.0;
                for j in 0..i {
                    let w: f64 = rng.random();
                    weights[(i, j)] = w;
                    weights[(j, i)] = w;
                }
            }
            let eigs = oracle::literal_lambda1_eigenvalues(tau, n, &weights);
            let max = eigs.last().copied().unwrap();
            assert!(
                (max - tau as f64).abs() <= 1e-9,
                "(tau, N) = ({tau}, {n}): lambda_max = {max}"
            );
        }
    }
    println!("criterion 5: PASS - lambda_max(Lambda1) = tau at all tested shapes");
}

#[test]
fn criterion_06_cross_inner_product_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..200 {
        let tau = 1 + (rng.random::<u32>() % 8) as usize;
        let cols = 1 + (rng.random::<u32>() % 8) as usize;
        let mut gen = |(_r, _c): (usize, usize)| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        };
        let a = DMatrix::from_fn(tau, cols, |r, c| gen((r, c)));
        let b = DMatrix::from_fn(tau, cols, |r, c| gen((r, c)));
        let (lhs, rhs) = oracle::cross_inner_product_identity(&a, &b);
        assert!(rhs.im.abs() <= 1e-10, "case {case}: imaginary part {}", rhs.im);
        assert!(
            (lhs - rhs.re).abs() <= 1e-9 * (1.0 + lhs.abs()),
            "case {case}: {lhs} vs {}",
            rhs.re
        );
    }

    // A = B reduces to the Inner Product Theorem
    let a = DMatrix::from_fn(5, 7, |r, c| {
        Complex64::new(
            StandardNormal.sample(&mut rng),
            (r as f64 - c as f64) / 10.0,
        )
    });
    let (lhs, rhs) = oracle::cross_inner_product_identity(&a, &a);
    let mut row_form = 0.0;
    for mu in 0..5 {
        for nu in 0..5 {
            let inner: Complex64 = (0..7)
                .map(|k| a[(mu, k)] * a[(nu, k)].conj())
                .sum();
            row_form += inner.norm_sqr();
        }
    }
    assert!((lhs - row_form).abs() <= 1e-9 * (1.0 + lhs.abs()));
    assert!((rhs.re - row_form).abs() <= 1e-9 * (1.0 + row_form.abs()));
    println!("criterion 6: PASS - 200 random pairs satisfy the identity at 1e-9 relative");
}

#[test]
fn criterion_07_fast_path_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shapes = [(1usize, 2usize), (2, 2), (2, 3), (3, 2), (1, 5), (3, 1), (2, 1), (1, 6)];
    for case in 0..100 {
        let tau = 1 + (rng.random::<u32>() % 4) as usize;
        let (cells, users) = shapes[(rng.random::<u32>() as usize) % shapes.len()];
        let n = cells * users;
        let set = construct::random_unit_norm(tau, cells, users, 700 + case).unwrap();
        let mut rows = vec![vec![0.0f64; cells]; cells];
        for i in 0..cells {
            rows[i][i] = 1.0;
            for j in 0..i {
                let beta: f64 = rng.random();
                rows[i][j] = beta;
                rows[j][i] = beta;
            }
        }
        let b = InterferenceMatrix::from_rows(&rows).unwrap();
        let weight = mm::weight_matrix(&b, users);
        let x = DVector::from_column_slice(set.data().as_slice());

        let (lambda2, surrogate) = mm::lambda2_of(&set, &b).unwrap();
        let literal = oracle::literal_lambda2_max_eigenvalue(tau, n, &weight, &x);
        assert!(
            (lambda2 - literal).abs() <= 1e-9 * (1.0 + literal.abs()),
            "case {case}: lambda2 {lambda2} vs literal {literal}"
        );

        let fast = mm::y_vector(set.data(), &surrogate, lambda2);
        let fast_stacked = DVector::from_column_slice(fast.as_slice());
        let unsimplified = oracle::y_vector_unsimplified(tau, n, &weight, &x);
        let gap = (&fast_stacked - &unsimplified).norm();
        assert!(
            gap <= 1e-9 * (1.0 + unsimplified.norm()),
            "case {case}: y gap {gap}"
        );
    }
    println!("criterion 7: PASS - lambda2 and y match the literal oracles on 100 instances");
}

#[test]
fn criterion_08_mse_identity_statistical() {
    let (tau, cells, users) = (13usize, 3usize, 14usize);
    let b = toeplitz(cells, 0.5);

    let random_set = construct::random_unit_norm(tau, cells, users, 88).unwrap();
    let constructed = construct::optimal_multi_cell(tau, users, &b).unwrap();
    let designed = {
        let p = design_problem(
            tau,
            cells,
            users,
            b.clone(),
            Constraint::Unimodular,
            500,
            1e-10,
            11,
            Acceleration::Plain,
        );
        mm::solve(&p).unwrap().0
    };

    let passes = |set: &SequenceSet, seed: u64| -> bool {
        let config = sim::SimulationConfig {
            set: set.clone(),
            b: b.clone(),
            sigma_sq_grid: vec![0.01, 0.1, 1.0],
            trials: 10_000,
            seed,
        };
        let report = sim::run_monte_carlo(&config).unwrap();
        report
            .points
            .iter()
            .all(|p| (p.empirical_mean - p.analytic).abs() <= 3.0 * p.standard_error)
    };

    for (label, set) in [
        ("random", &random_set),
        ("constructed", &constructed),
        ("mm-designed", &designed),
    ] {
        // statistical gate: one rerun with a fresh seed is allowed, two
        // consecutive failures fail the criterion
        let ok = passes(set, 1001) || passes(set, 2002);
        assert!(ok, "{label}: empirical mean outside 3 standard errors twice");
    }
    println!("criterion 8: PASS - empirical sum MSE within 3 stderr of the analytic identity");
}

#[test]
fn criterion_09_analytic_mse_ordering() {
    let (tau, cells, users) = (13usize, 3usize, 14usize);
    let b = toeplitz(cells, 0.7);
    let sigma_sq = 0.1;

    let constructed = construct::optimal_multi_cell(tau, users, &b).unwrap();
    let pooled = construct::pooled_wbe_baseline(tau, cells, users).unwrap();
    let mse_constructed = metrics::sum_mse_analytic(&constructed, &b, sigma_sq).unwrap();
    let mse_pooled = metrics::sum_mse_analytic(&pooled, &b, sigma_sq).unwrap();
    let mse_random = (0..20)
        .map(|seed| {
            let set = construct::random_unit_norm(tau, cells, users, seed).unwrap();
            metrics::sum_mse_analytic(&set, &b, sigma_sq).unwrap()
        })
        .sum::<f64>()
        / 20.0;

    assert!(
        mse_constructed < mse_pooled && mse_pooled < mse_random,
        "ordering violated: constructed {mse_constructed}, pooled {mse_pooled}, random {mse_random}"
    );
    println!(
        "criterion 9: PASS - sum MSE ordering {mse_constructed:.3} < {mse_pooled:.3} < {mse_random:.3}"
    );
}

#[test]
fn criterion_10_papr_reports() {
    let (tau, cells, users) = (13usize, 2usize, 11usize);
    let b = toeplitz(cells, 0.5);

    let unimodular = {
        let p = design_problem(
            tau,
            cells,
            users,
            b.clone(),
            Constraint::Unimodular,
            1000,
            1e-10,
            19,
            Acceleration::Plain,
        );
        mm::solve(&p).unwrap().0
    };
    let record = metrics::eval_record(&unimodular, &b).unwrap();
    for (user, papr) in record.papr_per_user_db.iter().enumerate() {
        assert_eq!(*papr, 0.0, "unimodular user {user} reported {papr} dB");
    }
    assert_eq!(record.max_papr_db, 0.0);

    let unit_norm = {
        let p = design_problem(
            tau,
            cells,
            users,
            b.clone(),
            Constraint::UnitNorm,
            1000,
            1e-10,
            19,
            Acceleration::Plain,
        );
        mm::solve(&p).unwrap().0
    };
    let record = metrics::eval_record(&unit_norm, &b).unwrap();
    assert!(record.papr_per_user_db.iter().all(|v| v.is_finite()));

    // CCDF data file, emitted through the CLI eval path
    let dir = std::env::temp_dir().join("pilotseq_acceptance_papr");
    std::fs::create_dir_all(&dir).unwrap();
    let set_path = dir.join("unit_norm.json");
    let beta_path = dir.join("beta.json");
    let ccdf_path = dir.join("papr_ccdf.csv");
    pilotseq::model::write_set_file(&unit_norm, &set_path).unwrap();
    pilotseq::model::write_beta_file(&b, &beta_path).unwrap();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_pilotseq"))
        .args([
            "eval",
            "--set",
            set_path.to_str().unwrap(),
            "--beta-matrix",
            beta_path.to_str().unwrap(),
            "--papr-csv",
            ccdf_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let ccdf = std::fs::read_to_string(&ccdf_path).unwrap();
    let mut lines = ccdf.lines();
    assert_eq!(lines.next(), Some("paprDb,ccdf"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), cells * users);

    // observation only (depends on initialization): share of users below 6 dB
    let below = record.papr_per_user_db.iter().filter(|v| **v < 6.0).count();
    println!(
        "criterion 10: PASS - unimodular PAPR exactly 0 dB; unit-norm PAPR finite, \
         {below}/{} users below 6 dB, CCDF file written",
        record.papr_per_user_db.len()
    );
}

#[test]
fn criterion_11_non_positive_definite_b() {
    let b2 = InterferenceMatrix::from_rows(&[
        vec![1.0, 1.0, 0.0],
        vec![1.0, 1.0, 0.6],
        vec![0.0, 0.6, 1.0],
    ])
    .unwrap();

    let report = bounds::bound_report(39, 3, 42, &b2);
    assert!(!report.b_is_positive_definite);
    assert!(report.new_extended.is_none());
    assert_eq!(report.applicability.new_extended, "B not positive definite");

    let p = design_problem(
        39,
        3,
        42,
        b2,
        Constraint::Unimodular,
        600,
        1e-10,
        23,
        Acceleration::Plain,
    );
    let (_, trace) = mm::solve(&p).unwrap();
    let initial = trace.objectives[0];
    let final_etsc = trace.final_objective();
    assert!(
        final_etsc <= 0.9 * initial,
        "only reduced {initial} to {final_etsc}"
    );
    println!(
        "criterion 11: PASS - non-PD B handled: bound absent, ETSC {initial:.2} -> {final_etsc:.2}"
    );
}

/// Wall-clock scaling property (the paper's absolute timing figure is
/// hardware-specific and not reproduced): doubling N at fixed τ multiplies
/// the median per-iteration time by [3, 10]; doubling τ at fixed N by
/// [1.5, 3]. Samples are interleaved so background load hits both sides.
#[test]
fn per_iteration_cost_scaling() {
    struct Runner {
        problem: DesignProblem,
        state: mm::MmState,
    }
    impl Runner {
        fn new(tau: usize, cells: usize, users: usize) -> Self {
            let p = design_problem(
                tau,
                cells,
                users,
                toeplitz(cells, 0.5),
                Constraint::UnitNorm,
                10,
                0.0,
                3,
                Acceleration::Plain,
            );
            let init = construct::random_unit_norm(tau, cells, users, 3).unwrap();
            let state = mm::MmState::new(&init, &p).unwrap();
            Runner { problem: p, state }
        }

        fn timed_step(&mut self) -> f64 {
            let t = Instant::now();
            self.state = mm::step(&self.state, &self.problem).unwrap();
            t.elapsed().as_secs_f64()
        }
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    let reps = 31;

    let mut small_n = Runner::new(16, 2, 32); // N = 64
    let mut large_n = Runner::new(16, 2, 64); // N = 128
    for _ in 0..3 {
        small_n.timed_step();
        large_n.timed_step();
    }
    let mut t_small = Vec::new();
    let mut t_large = Vec::new();
    for _ in 0..reps {
        t_small.push(small_n.timed_step());
        t_large.push(large_n.timed_step());
    }
    let n_ratio = median(t_large) / median(t_small);
    assert!(
        (3.0..=10.0).contains(&n_ratio),
        "doubling N changed per-iteration time by {n_ratio:.2}, outside [3, 10]"
    );

    let mut small_tau = Runner::new(256, 2, 8); // tau = 256, N = 16
    let mut large_tau = Runner::new(512, 2, 8); // tau = 512, N = 16
    for _ in 0..3 {
        small_tau.timed_step();
        large_tau.timed_step();
    }
    let mut t_small = Vec::new();
    let mut t_large = Vec::new();
    for _ in 0..reps {
        t_small.push(small_tau.timed_step());
        t_large.push(large_tau.timed_step());
    }
    let tau_ratio = median(t_large) / median(t_small);
    assert!(
        (1.5..=3.0).contains(&tau_ratio),
        "doubling tau changed per-iteration time by {tau_ratio:.2}, outside [1.5, 3]"
    );

    println!(
        "cost scaling: PASS - N-doubling ratio {n_ratio:.2} in [3, 10], \
         tau-doubling ratio {tau_ratio:.2} in [1.5, 3]"
    );
}
