//! Deterministic sequence set constructions: truncated-DFT WBE sets per cell,
//! the bound-achieving multi-cell assembly for K ≥ τ with positive definite
//! B, the pooled-WBE comparison baseline, and seeded random baselines (which
//! double as the optimizer's initialization).

use std::f64::consts::TAU as TWO_PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds;
use crate::model::{InterferenceMatrix, SequenceSet};
use crate::{Error, Result};

/// τ×K truncated DFT matrix with entry (μ, k) = ζ_K^{μk}/√τ, ζ_K = e^{2πi/K}.
///
/// Rows are mutually orthogonal with squared norm K/τ, so S Sᴴ = (K/τ)I_τ and
/// the columns form a unimodular WBE set: TSC = K²/τ. Requires K ≥ τ.
pub fn wbe_truncated_dft(tau: usize, users: usize) -> Result<DMatrix<Complex64>> {
    if tau == 0 || users == 0 {
        return Err(Error::InvalidArgument("tau and K must be positive".into()));
    }
    if users < tau {
        return Err(Error::InvalidArgument(format!(
            "truncated DFT construction needs K >= tau, got K={users}, tau={tau}"
        )));
    }
    let scale = 1.0 / (tau as f64).sqrt();
    Ok(DMatrix::from_fn(tau, users, |mu, k| {
        let phase = TWO_PI * ((mu * k) % users) as f64 / users as f64;
        Complex64::from_polar(scale, phase)
    }))
}

fn assemble_per_cell(tau: usize, users: usize, cells: usize, block: &DMatrix<Complex64>) -> SequenceSet {
    let mut data = DMatrix::from_element(tau, cells * users, Complex64::new(0.0, 0.0));
    for j in 0..cells {
        data.view_mut((0, j * users), (tau, users)).copy_from(block);
    }
    SequenceSet::new(tau, cells, users, data, true).expect("dimensions are consistent")
}

/// Multi-cell assembly that meets the K ≥ τ lower bound with equality: every
/// cell gets the same truncated-DFT WBE set, so all within-cell row inner
/// products vanish for μ ≠ ν and every cross term in the ETSC expansion is
/// zero. Refuses non-positive-definite B, the regime the bound covers.
pub fn optimal_multi_cell(tau: usize, users: usize, b: &InterferenceMatrix) -> Result<SequenceSet> {
    let (pd, class) = bounds::is_positive_definite(b);
    if !pd {
        return Err(Error::NotPositiveDefinite(format!(
            "construction requires positive definite B (classified {class:?})"
        )));
    }
    let block = wbe_truncated_dft(tau, users)?;
    Ok(assemble_per_cell(tau, users, b.order(), &block))
}

/// Same assembly with an independent seeded row permutation per cell. Row
/// permutations preserve all within-cell inner products, so ETSC (and bound
/// equality) is unchanged; this only diversifies the literal pilot values.
pub fn optimal_multi_cell_permuted(
    tau: usize,
    users: usize,
    b: &InterferenceMatrix,
    seed: u64,
) -> Result<SequenceSet> {
    let (pd, class) = bounds::is_positive_definite(b);
    if !pd {
        return Err(Error::NotPositiveDefinite(format!(
            "construction requires positive definite B (classified {class:?})"
        )));
    }
    let block = wbe_truncated_dft(tau, users)?;
    let cells = b.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = DMatrix::from_element(tau, cells * users, Complex64::new(0.0, 0.0));
    for j in 0..cells {
        let mut perm: Vec<usize> = (0..tau).collect();
        // Fisher-Yates
        for i in (1..tau).rev() {
            let r = rng.random_range(0..=i);
            perm.swap(i, r);
        }
        for (row, &src) in perm.iter().enumerate() {
            for k in 0..users {
                data[(row, j * users + k)] = block[(src, k)];
            }
        }
    }
    SequenceSet::new(tau, cells, users, data, true)
}

/// Baseline that ignores the cell structure: one τ×(J·K) truncated-DFT WBE
/// pool partitioned into J consecutive blocks of K. Requires J·K ≥ τ.
pub fn pooled_wbe_baseline(tau: usize, cells: usize, users: usize) -> Result<SequenceSet> {
    let pool = wbe_truncated_dft(tau, cells * users)?;
    SequenceSet::new(tau, cells, users, pool, true)
}

/// Random unit-norm columns: i.i.d. CN(0,1) entries, each column normalized.
pub fn random_unit_norm(tau: usize, cells: usize, users: usize, seed: u64) -> Result<SequenceSet> {
    if tau == 0 || cells == 0 || users == 0 {
        return Err(Error::InvalidArgument(
            "tau, cells and users per cell must all be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cells * users;
    let mut data = DMatrix::from_fn(tau, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    for mut col in data.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        } else {
            col[0] = Complex64::new(1.0, 0.0);
        }
    }
    SequenceSet::new(tau, cells, users, data, false)
}

/// Random unimodular columns: i.i.d. uniform phases at modulus 1/√τ.
pub fn random_unimodular(tau: usize, cells: usize, users: usize, seed: u64) -> Result<SequenceSet> {
    if tau == 0 || cells == 0 || users == 0 {
        return Err(Error::InvalidArgument(
            "tau, cells and users per cell must all be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (tau as f64).sqrt();
    let n = cells * users;
    let data = DMatrix::from_fn(tau, n, |_, _| {
        let phase: f64 = rng.random::<f64>() * TWO_PI;
        Complex64::from_polar(scale, phase)
    });
    SequenceSet::new(tau, cells, users, data, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, Constraint, DesignProblem, OptimizerSettings};
    use crate::{bounds, metrics};
    use approx::assert_relative_eq;

    #[test]
    fn square_case_is_scaled_unitary() {
        let m = wbe_truncated_dft(4, 4).unwrap();
        let gram = m.adjoint() * &m;
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert_relative_eq!(gram[(r, c)].re, expect, epsilon = 1e-12);
                assert_relative_eq!(gram[(r, c)].im, 0.0, epsilon = 1e-12);
            }
        }
        let set = SequenceSet::new(4, 1, 4, m, true).unwrap();
        assert_relative_eq!(metrics::tsc(&set), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn tsc_meets_welch_bound_for_overloaded_case() {
        // brute-force TSC of the explicit 2x4 matrix
        let m = wbe_truncated_dft(2, 4).unwrap();
        let mut tsc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let inner: Complex64 = (0..2).map(|t| m[(t, a)] * m[(t, b)].conj()).sum();
                tsc += inner.norm_sqr();
            }
        }
        assert_relative_eq!(tsc, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn rows_are_orthogonal_with_equal_norms() {
        let m = wbe_truncated_dft(13, 16).unwrap();
        let row_gram = &m * m.adjoint();
        for r in 0..13 {
            for c in 0..13 {
                let expect = if r == c { 16.0 / 13.0 } else { 0.0 };
                assert!(
                    (row_gram[(r, c)].re - expect).abs() < 1e-12
                        && row_gram[(r, c)].im.abs() < 1e-12,
                    "row gram deviates at ({r},{c}): {}",
                    row_gram[(r, c)]
                );
            }
        }
    }

    #[test]
    fn undersized_k_is_rejected() {
        assert!(wbe_truncated_dft(5, 4).is_err());
    }

    #[test]
    fn multi_cell_assembly_achieves_the_bound() {
        let b = InterferenceMatrix::toeplitz(3, 0.3).unwrap();
        let set = optimal_multi_cell(13, 16, &b).unwrap();
        let bound = bounds::new_extended_welch_bound(13, 16, &b).unwrap();
        let e = metrics::etsc(&set, &b).unwrap();
        assert_relative_eq!(e, bound, max_relative = 1e-9);
        assert_relative_eq!(e, 94.52307692307692, max_relative = 1e-9);
    }

    #[test]
    fn single_cell_reduces_to_truncated_dft() {
        let b = InterferenceMatrix::identity(1);
        let set = optimal_multi_cell(3, 5, &b).unwrap();
        let dft = wbe_truncated_dft(3, 5).unwrap();
        assert_eq!(set.data(), &dft);
    }

    #[test]
    fn non_positive_definite_b_is_refused() {
        let b = InterferenceMatrix::all_ones(3);
        assert!(matches!(
            optimal_multi_cell(3, 4, &b),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn assembly_validates_as_unimodular() {
        let b = InterferenceMatrix::toeplitz(2, 0.5).unwrap();
        let set = optimal_multi_cell(5, 7, &b).unwrap();
        let problem = DesignProblem::new(
            5,
            2,
            7,
            b,
            Constraint::Unimodular,
            OptimizerSettings::default(),
        )
        .unwrap();
        let report = validate(&set, &problem);
        assert!(report.is_valid(), "{report}");
        assert!(set.is_unimodular_flagged());
    }

    #[test]
    fn per_cell_blocks_are_wbe() {
        let b = InterferenceMatrix::toeplitz(3, 0.2).unwrap();
        let set = optimal_multi_cell(7, 9, &b).unwrap();
        for j in 0..3 {
            let block = set.cell_block(j).clone_owned();
            let single = SequenceSet::new(7, 1, 9, block, true).unwrap();
            assert_relative_eq!(metrics::tsc(&single), 81.0 / 7.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn row_permutations_leave_etsc_unchanged() {
        let b = InterferenceMatrix::toeplitz(3, 0.55).unwrap();
        let plain = optimal_multi_cell(6, 8, &b).unwrap();
        let permuted = optimal_multi_cell_permuted(6, 8, &b, 404).unwrap();
        assert_ne!(plain.data(), permuted.data());
        assert_relative_eq!(
            metrics::etsc(&plain, &b).unwrap(),
            metrics::etsc(&permuted, &b).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn random_sets_are_feasible_and_seeded() {
        let a = random_unit_norm(5, 2, 3, 8).unwrap();
        let b = random_unit_norm(5, 2, 3, 8).unwrap();
        let c = random_unit_norm(5, 2, 3, 9).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), c.data());
        for col in a.data().column_iter() {
            let norm_sq: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm_sq - 1.0).abs() < 1e-12);
        }

        let u = random_unimodular(5, 2, 3, 8).unwrap();
        for entry in u.data().iter() {
            assert!((entry.norm_sqr() - 0.2).abs() < 1e-12);
        }
    }
}
