//! Temporary feasibility probes (deleted before release).

use pilotseq::model::*;
use pilotseq::{bounds, construct, metrics, mm};
use std::time::Instant;

fn problem(
    tau: usize,
    cells: usize,
    users: usize,
    b: InterferenceMatrix,
    constraint: Constraint,
    max_iterations: usize,
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
            epsilon: 1e-10,
            seed,
            acceleration,
        },
    )
    .unwrap()
}

#[test]
#[ignore]
fn probe_two_cell_quality() {
    for beta in [0.0, 0.5, 1.0] {
        for constraint in [Constraint::UnitNorm, Constraint::Unimodular] {
            let b = InterferenceMatrix::toeplitz(2, beta).unwrap();
            let bound = bounds::extended_welch_bound_two_cell(39, 32, beta).unwrap();
            let start = Instant::now();
            let p = problem(39, 2, 32, b, constraint, 20_000, 1, Acceleration::Plain);
            let (_, trace) = mm::solve(&p).unwrap();
            println!(
                "beta={beta} {constraint:?}: final={:.6} bound={:.6} ratio={:.6} iters={} time={:.1}s",
                trace.final_objective(),
                bound,
                trace.final_objective() / bound,
                trace.iterations(),
                start.elapsed().as_secs_f64()
            );
        }
    }
}

#[test]
#[ignore]
fn probe_squarem_vs_plain() {
    let b = InterferenceMatrix::from_rows(&[
        vec![1.0, 0.8, 0.2],
        vec![0.8, 1.0, 0.6],
        vec![0.2, 0.6, 1.0],
    ])
    .unwrap();
    let start = Instant::now();
    let p_plain = problem(39, 3, 32, b.clone(), Constraint::UnitNorm, 20_000, 1, Acceleration::Plain);
    let (_, plain) = mm::solve(&p_plain).unwrap();
    println!(
        "plain: final={:.6} iters={} time={:.1}s",
        plain.final_objective(),
        plain.iterations(),
        start.elapsed().as_secs_f64()
    );
    let start = Instant::now();
    let p_sq = problem(39, 3, 32, b, Constraint::UnitNorm, 20_000, 1, Acceleration::Squarem);
    let (_, sq) = mm::solve(&p_sq).unwrap();
    let target = plain.final_objective();
    let reach = sq.objectives.iter().position(|&v| v <= target);
    println!(
        "squarem: final={:.6} iters={} reach_target_at={:?} time={:.1}s",
        sq.final_objective(),
        sq.iterations(),
        reach,
        start.elapsed().as_secs_f64()
    );
}

#[test]
#[ignore]
fn probe_ordering_margins() {
    let b = InterferenceMatrix::toeplitz(3, 0.7).unwrap();
    let constructed = construct::optimal_multi_cell(13, 14, &b).unwrap();
    let pooled = construct::pooled_wbe_baseline(13, 3, 14).unwrap();
    let mse_c = metrics::sum_mse_analytic(&constructed, &b, 0.1).unwrap();
    let mse_p = metrics::sum_mse_analytic(&pooled, &b, 0.1).unwrap();
    let mut random_sum = 0.0;
    for seed in 0..20 {
        let set = construct::random_unit_norm(13, 3, 14, seed).unwrap();
        random_sum += metrics::sum_mse_analytic(&set, &b, 0.1).unwrap();
    }
    println!(
        "constructed={mse_c:.4} pooled={mse_p:.4} random_mean={:.4}",
        random_sum / 20.0
    );
}

#[test]
#[ignore]
fn probe_timing_ratios() {
    fn median_step_seconds(tau: usize, cells: usize, users: usize, reps: usize) -> f64 {
        let b = InterferenceMatrix::toeplitz(cells, 0.5).unwrap();
        let p = problem(tau, cells, users, b, Constraint::UnitNorm, 10, 3, Acceleration::Plain);
        let init = construct::random_unit_norm(tau, cells, users, 3).unwrap();
        let mut state = mm::MmState::new(&init, &p).unwrap();
        // warmup
        for _ in 0..3 {
            state = mm::step(&state, &p).unwrap();
        }
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps {
            let t = Instant::now();
            state = mm::step(&state, &p).unwrap();
            times.push(t.elapsed().as_secs_f64());
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times[times.len() / 2]
    }

    let n64 = median_step_seconds(16, 2, 32, 31);
    let n128 = median_step_seconds(16, 2, 64, 31);
    println!("N doubling at tau=16: {:.6}s -> {:.6}s ratio={:.2}", n64, n128, n128 / n64);

    let t256 = median_step_seconds(256, 2, 8, 31);
    let t512 = median_step_seconds(512, 2, 8, 31);
    println!("tau doubling at N=16: {:.6}s -> {:.6}s ratio={:.2}", t256, t512, t512 / t256);
}
