//! Brute-force reference implementations used by the test suite: literal
//! Λ₁/Λ₂ construction from block selection matrices, the quadruple-loop ETSC,
//! and both sides of the cross-inner-product identity.
//!
//! Nothing here is tuned for speed. Size guards panic instead of attempting
//! large materializations, keeping these honest as oracles for small
//! randomized instances only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::model::{InterferenceMatrix, SequenceSet};

/// ⟨a, b⟩ = Σ_k a[k]·b*[k].
fn inner(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Evaluates both sides of the cross-inner-product identity for τ×K matrices:
/// lhs = Σ_{m,n} |⟨a_m, b_n⟩|² over columns, rhs = Σ_{μ,ν} ⟨a^μ,a^ν⟩·⟨b^μ,b^ν⟩*
/// over rows. The two agree (and rhs is real) for every complex pair.
pub fn cross_inner_product_identity(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> (f64, Complex64) {
    assert_eq!(a.nrows(), b.nrows(), "matrices must share shape");
    assert_eq!(a.ncols(), b.ncols(), "matrices must share shape");

    let mut lhs = 0.0;
    for m in 0..a.ncols() {
        let am = a.column(m).clone_owned();
        for n in 0..b.ncols() {
            let bn = b.column(n).clone_owned();
            lhs += inner(&am, &bn).norm_sqr();
        }
    }

    let mut rhs = Complex64::new(0.0, 0.0);
    for mu in 0..a.nrows() {
        let a_mu = a.row(mu).transpose();
        let b_mu = b.row(mu).transpose();
        for nu in 0..a.nrows() {
            let a_nu = a.row(nu).transpose();
            let b_nu = b.row(nu).transpose();
            rhs += inner(&a_mu, &a_nu) * inner(&b_mu, &b_nu).conj();
        }
    }

    (lhs, rhs)
}

/// Block selection matrix T_n (τ × τN) with I_τ in block n.
fn block_selector(tau: usize, n_total: usize, n: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(tau, tau * n_total);
    for r in 0..tau {
        t[(r, n * tau + r)] = 1.0;
    }
    t
}

/// vec(M): columns stacked into one long vector.
fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn vec_of_c(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

/// Literal Λ₁ = Σ_{i,j} w_{ij}·vec(U_ij)·vec(U_ij)ᵀ with U_ij = T_iᴴT_j.
///
/// The result is (τN)² × (τN)², so this panics unless τ·N ≤ 24.
pub fn literal_lambda1(tau: usize, n_total: usize, weights: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(
        tau * n_total <= 24,
        "literal Lambda1 materializes a ({d}x{d})^2 matrix; refusing tau*N = {} > 24",
        tau * n_total,
        d = tau * n_total
    );
    assert_eq!(weights.nrows(), n_total);
    assert_eq!(weights.ncols(), n_total);

    let dim = (tau * n_total) * (tau * n_total);
    let mut lambda1 = DMatrix::zeros(dim, dim);
    for i in 0..n_total {
        let ti = block_selector(tau, n_total, i);
        for j in 0..n_total {
            let tj = block_selector(tau, n_total, j);
            let u_ij = ti.transpose() * &tj;
            let v = vec_of(&u_ij);
            lambda1 += weights[(i, j)] * &v * v.transpose();
        }
    }
    lambda1
}

/// Eigenvalues of the literal Λ₁, ascending.
pub fn literal_lambda1_eigenvalues(
    tau: usize,
    n_total: usize,
    weights: &DMatrix<f64>,
) -> Vec<f64> {
    let lambda1 = literal_lambda1(tau, n_total, weights);
    let mut eigs: Vec<f64> = SymmetricEigen::new(lambda1).eigenvalues.iter().cloned().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Literal Λ₂ = Σ_{i,j} w_{ij}·(vec(U_ij)ᴴ vec(X))·U_ij with X = x·xᴴ.
///
/// Materializes τN × τN; panics unless τ·N ≤ 64.
pub fn literal_lambda2(
    tau: usize,
    n_total: usize,
    weights: &DMatrix<f64>,
    x: &DVector<Complex64>,
) -> DMatrix<Complex64> {
    assert!(
        tau * n_total <= 64,
        "literal Lambda2 materializes a {d}x{d} matrix sum over N^2 terms; refusing tau*N = {} > 64",
        tau * n_total,
        d = tau * n_total
    );
    assert_eq!(weights.nrows(), n_total);
    assert_eq!(weights.ncols(), n_total);
    assert_eq!(x.len(), tau * n_total, "x must have length tau*N");

    let big_x = x * x.adjoint();
    let vec_x = vec_of_c(&big_x);

    let dim = tau * n_total;
    let mut lambda2 = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for i in 0..n_total {
        let ti = block_selector(tau, n_total, i);
        for j in 0..n_total {
            let tj = block_selector(tau, n_total, j);
            let u_ij = (ti.transpose() * &tj).map(|v| Complex64::new(v, 0.0));
            let coeff = inner(&vec_of_c(&u_ij), &vec_x).conj() * weights[(i, j)];
            lambda2 += u_ij * coeff;
        }
    }
    lambda2
}

/// Largest eigenvalue of the literal Λ₂ (Hermitian for symmetric weights).
pub fn literal_lambda2_max_eigenvalue(
    tau: usize,
    n_total: usize,
    weights: &DMatrix<f64>,
    x: &DVector<Complex64>,
) -> f64 {
    let lambda2 = literal_lambda2(tau, n_total, weights, x);
    SymmetricEigen::new(lambda2)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// y from its defining equation y = −(Λ₂ − λ₁·x xᴴ − λ₂·I)·x, with λ₁ taken
/// from the literal Λ₁ eigensolve and λ₂ from the literal Λ₂ eigensolve.
pub fn y_vector_unsimplified(
    tau: usize,
    n_total: usize,
    weights: &DMatrix<f64>,
    x: &DVector<Complex64>,
) -> DVector<Complex64> {
    let lambda1 = *literal_lambda1_eigenvalues(tau, n_total, weights)
        .last()
        .expect("nonempty spectrum");
    let lambda2_mat = literal_lambda2(tau, n_total, weights, x);
    let lambda2 = SymmetricEigen::new(lambda2_mat.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);

    let dim = tau * n_total;
    let rank_one = x * x.adjoint() * Complex64::new(lambda1, 0.0);
    let mut m = lambda2_mat - rank_one;
    for d in 0..dim {
        m[(d, d)] -= Complex64::new(lambda2, 0.0);
    }
    -(m * x)
}

/// Literal quadruple loop over all weighted inner products:
/// ETSC = Σ_{i,j} β_{i,j} Σ_{m,n} |⟨s_{i,m}, s_{j,n}⟩|².
pub fn etsc_quad_loop(set: &SequenceSet, b: &InterferenceMatrix) -> f64 {
    assert_eq!(b.order(), set.cells(), "B order must match cell count");
    let k = set.users_per_cell();
    let mut total = 0.0;
    for i in 0..set.cells() {
        for j in 0..set.cells() {
            let beta = b.beta(i, j);
            for m in 0..k {
                let sim = set.sequence(i, m).clone_owned();
                for n in 0..k {
                    let sjn = set.sequence(j, n).clone_owned();
                    total += beta * inner(&sim, &sjn).norm_sqr();
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_complex_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        })
    }

    fn random_weights(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            w[(i, i)] = 1.0;
            for j in 0..i {
                let v: f64 = rand::Rng::random::<f64>(rng);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        w
    }

    #[test]
    fn identity_reduction_for_equal_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_complex_matrix(4, 6, &mut rng);
        let (lhs, rhs) = cross_inner_product_identity(&a, &a);
        // A = B: both sides are the Inner Product Theorem value
        let mut row_side = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                row_side += inner(&a.row(mu).transpose(), &a.row(nu).transpose()).norm_sqr();
            }
        }
        assert!(rhs.im.abs() <= 1e-10);
        assert!((lhs - rhs.re).abs() <= 1e-9 * (1.0 + lhs.abs()));
        assert!((lhs - row_side).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn single_basis_column_gives_unit_value() {
        let mut a = DMatrix::from_element(3, 2, Complex64::new(0.0, 0.0));
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        let (lhs, rhs) = cross_inner_product_identity(&a, &a);
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((rhs.re - 1.0).abs() < 1e-15 && rhs.im.abs() < 1e-15);
    }

    #[test]
    fn identity_holds_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let rows = 1 + (rand::Rng::random::<u32>(&mut rng) % 8) as usize;
            let cols = 1 + (rand::Rng::random::<u32>(&mut rng) % 8) as usize;
            let a = random_complex_matrix(rows, cols, &mut rng);
            let b = random_complex_matrix(rows, cols, &mut rng);
            let (lhs, rhs) = cross_inner_product_identity(&a, &b);
            assert!(rhs.im.abs() <= 1e-10, "imaginary part {}", rhs.im);
            assert!((lhs - rhs.re).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn trivial_lambda1_is_tau() {
        let w = DMatrix::from_element(1, 1, 1.0);
        let eigs = literal_lambda1_eigenvalues(1, 1, &w);
        assert_eq!(eigs.len(), 1);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda1_spectrum_is_tau_weights_and_zero() {
        // diagonal weights: eigenvalues must be within {tau, 0}
        let w = DMatrix::identity(3, 3);
        let eigs = literal_lambda1_eigenvalues(2, 3, &w);
        for e in eigs {
            assert!(
                e.abs() < 1e-9 || (e - 2.0).abs() < 1e-9,
                "unexpected eigenvalue {e}"
            );
        }
    }

    #[test]
    fn lambda1_max_eigenvalue_is_tau_for_random_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(tau, n) in &[(2usize, 2usize), (3, 4)] {
            let w = random_weights(n, &mut rng);
            let eigs = literal_lambda1_eigenvalues(tau, n, &w);
            let max = eigs.last().unwrap();
            assert!((max - tau as f64).abs() <= 1e-9, "lambda_max {max} != {tau}");
        }
    }

    #[test]
    fn lambda2_single_block_is_identity_for_unit_x() {
        let w = DMatrix::from_element(1, 1, 1.0);
        let x = DVector::from_column_slice(&[
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ]);
        let lambda2 = literal_lambda2(2, 1, &w, &x);
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((lambda2[(r, c)].re - expect).abs() < 1e-12);
                assert!(lambda2[(r, c)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda2_is_hermitian_for_symmetric_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_weights(3, &mut rng);
        let x = DVector::from_fn(6, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        let lambda2 = literal_lambda2(2, 3, &w, &x);
        let diff = (&lambda2 - lambda2.adjoint()).norm();
        assert!(diff < 1e-12, "Hermitian deviation {diff}");
    }

    #[test]
    #[should_panic(expected = "refusing")]
    fn lambda1_size_guard_fires() {
        let w = DMatrix::identity(13, 13);
        let _ = literal_lambda1(2, 13, &w);
    }
}
