use super::*;
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

fn bell(d: usize) -> PureState {
    let mut amps = vec![c(0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = c(1.0);
    }
    PureState::normalized(amps, vec![d, d]).unwrap()
}

fn random_hermitian(n: usize, seed: u64, complex: bool) -> HermitianOperator {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let im = if complex && i != j { rng.random::<f64>() - 0.5 } else { 0.0 };
            let z = C64::new(rng.random::<f64>() - 0.5, im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::from_matrix(m).unwrap()
}

#[test]
fn kron_identity_and_pauli_products() {
    let i2 = ComplexMatrix::identity(2);
    assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
    assert_eq!(
        kron(&pauli_z(), &pauli_z()).unwrap(),
        ComplexMatrix::diagonal(&[1.0, -1.0, -1.0, 1.0])
    );
    let xx = kron(&pauli_x(), &pauli_x()).unwrap();
    let ket00 = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
    assert_eq!(xx.matvec(&ket00).unwrap(), vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
}

#[test]
fn kron_respects_size_cap() {
    let a = ComplexMatrix::identity(64);
    assert!(matches!(kron_capped(&a, &a, 1000), Err(Error::Size { .. })));
}

#[test]
fn partial_trace_of_bell_is_maximally_mixed() {
    let rho = partial_trace(&bell(2).projector(), &[0]).unwrap();
    let half = ComplexMatrix::identity(2).scale(c(0.5));
    assert!(rho.matrix().max_diff(&half) < 1e-15);
    assert_eq!(rho.dims(), &[2]);
}

#[test]
fn partial_trace_of_product_scales_by_trace() {
    let a = random_hermitian(3, 1, true);
    let b = random_hermitian(2, 2, true);
    let ab = HermitianOperator::new(kron(a.matrix(), b.matrix()).unwrap(), vec![3, 2]).unwrap();
    let reduced = partial_trace(&ab, &[0]).unwrap();
    let expected = a.matrix().scale(c(b.trace()));
    assert!(reduced.matrix().max_diff(&expected) < 1e-14);
}

#[test]
fn partial_trace_of_basis_product_and_empty_keep() {
    let psi = PureState::basis(&[0, 0], vec![2, 2]).unwrap();
    let rho = partial_trace(&psi.projector(), &[1]).unwrap();
    assert_eq!(rho.matrix(), &ComplexMatrix::diagonal(&[1.0, 0.0]));

    let h = random_hermitian(6, 3, true);
    let h = HermitianOperator::new(h.into_matrix(), vec![2, 3]).unwrap();
    let scalar = partial_trace(&h, &[]).unwrap();
    assert_eq!(scalar.side(), 1);
    assert!((scalar.trace() - h.trace()).abs() < 1e-14);
    assert!(matches!(partial_trace(&h, &[2]), Err(Error::Argument(_))));
}

#[test]
fn partial_trace_composes_in_any_order() {
    let h = random_hermitian(24, 4, true);
    let h = HermitianOperator::new(h.into_matrix(), vec![2, 3, 4]).unwrap();
    let joint = partial_trace(&h, &[1]).unwrap();
    let first_then = partial_trace(&partial_trace(&h, &[0, 1]).unwrap(), &[1]).unwrap();
    let other_order = partial_trace(&partial_trace(&h, &[1, 2]).unwrap(), &[0]).unwrap();
    assert!(joint.matrix().max_diff(first_then.matrix()) < 1e-12);
    assert!(joint.matrix().max_diff(other_order.matrix()) < 1e-12);
    assert!((joint.trace() - h.trace()).abs() < 1e-12);
}

#[test]
fn eig_of_pauli_z_and_bell_projector() {
    let z = HermitianOperator::from_matrix(pauli_z()).unwrap();
    let spec = hermitian_eig(&z, DEFAULT_DEGENERACY_TOL).unwrap();
    assert_eq!(spec.eigenvalues, vec![-1.0, 1.0]);

    let spec = hermitian_eig(&bell(2).projector(), DEFAULT_DEGENERACY_TOL).unwrap();
    let expected = [0.0, 0.0, 0.0, 1.0];
    for (a, b) in spec.eigenvalues.iter().zip(expected) {
        assert!((a - b).abs() < 1e-14);
    }
    assert_eq!(spec.degeneracy(), 1);
    // Phase convention: largest entry real positive.
    let top = spec.max_space.column(0);
    assert!((top[0] - c(0.5f64.sqrt())).norm() < 1e-14);
}

#[test]
fn eig_groups_degenerate_top_space() {
    let m = ComplexMatrix::diagonal(&[0.2, 1.0, 1.0 - 1e-12, 0.7, 1.0]);
    let spec = hermitian_eig(&HermitianOperator::from_matrix(m).unwrap(), 1e-9).unwrap();
    assert_eq!(spec.degeneracy(), 3);
    assert_eq!(spec.max_value, 1.0);
}

#[test]
fn eig_rejects_oversized_input() {
    let h = random_hermitian(8, 5, false);
    assert!(matches!(hermitian_eig_with(&h, 1e-9, 4), Err(Error::Size { .. })));
}

#[test]
fn hermitian_validation_rejects_asymmetric() {
    let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
    assert!(matches!(HermitianOperator::from_matrix(m), Err(Error::Validation(_))));
    let m = ComplexMatrix::identity(4);
    assert!(HermitianOperator::new(m, vec![3]).is_err());
}

fn check_spectrum(h: &HermitianOperator) {
    let spec = hermitian_eig(h, DEFAULT_DEGENERACY_TOL).unwrap();
    let n = h.side();
    let scale = h.matrix().norm_fro().max(1.0);
    assert!(spec.max_residual(h) <= 1e-9 * scale, "residual too large");
    let v = &spec.eigenvectors;
    let gram = v.adjoint().matmul(v).unwrap();
    assert!(gram.max_diff(&ComplexMatrix::identity(n)) < 1e-10, "not orthonormal");
    assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn eig_random_real_and_complex() {
    for (n, seed) in [(1, 0), (2, 1), (7, 2), (33, 3), (90, 4)] {
        check_spectrum(&random_hermitian(n, seed, false));
        check_spectrum(&random_hermitian(n, seed + 100, true));
    }
}

#[test]
fn general_pair_on_reduced_cloning_matrix() {
    // roots of λ² − 2λ + 3·α₁α₂ with α = (0.8, 0.2)
    let m = ComplexMatrix::from_real(2, 2, &[1.6, 0.8, 0.2, 0.4]).unwrap();
    let (lambda, v) = general_max_real_eigenpair(&m).unwrap();
    let expected = 1.0 + (1.0 - 3.0 * 0.8 * 0.2f64).sqrt();
    assert!((lambda - expected).abs() < 1e-12);
    assert!((lambda - 1.7211103).abs() < 1e-7);
    let mv = m.matvec(&v).unwrap();
    for (a, b) in mv.iter().zip(&v) {
        assert!((a - b * lambda).norm() < 1e-12);
    }
    assert!(v[0].im == 0.0 && v[0].re > 0.0);
}

#[test]
fn general_pair_diagonal_and_uniform() {
    let (lambda, v) = general_max_real_eigenpair(&ComplexMatrix::diagonal(&[1.0, 3.0, 2.0])).unwrap();
    assert_eq!(lambda, 3.0);
    assert!((v[1] - c(1.0)).norm() < 1e-14 && v[0].norm() < 1e-14 && v[2].norm() < 1e-14);

    // α = (½, ½), d = 2: entries α_n(1 + δ_nm)
    let m = ComplexMatrix::from_real(2, 2, &[1.0, 0.5, 0.5, 1.0]).unwrap();
    let (lambda, v) = general_max_real_eigenpair(&m).unwrap();
    assert!((lambda - 1.5).abs() < 1e-14);
    assert!((v[0] - v[1]).norm() < 1e-14);
}

#[test]
fn general_pair_falls_back_to_power_iteration() {
    // Not sign-symmetric, but nonnegative with a simple Perron root.
    let m = ComplexMatrix::from_real(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 0.0, 1.0]).unwrap();
    let (lambda, v) = general_max_real_eigenpair(&m).unwrap();
    let mv = m.matvec(&v).unwrap();
    for (a, b) in mv.iter().zip(&v) {
        assert!((a - b * lambda).norm() < 1e-10);
    }
}

#[test]
fn general_pair_rejects_rotation() {
    // eigenvalues ±i: no real dominant eigenvalue
    let m = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
    assert!(matches!(general_max_real_eigenpair(&m), Err(Error::Numerical { .. })));
}

#[test]
fn schmidt_examples() {
    let coeffs = schmidt_coefficients(&bell(3), &[0]).unwrap();
    for s in &coeffs {
        assert!((s - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }
    let product = PureState::basis(&[0, 0], vec![2, 2]).unwrap();
    let coeffs = schmidt_coefficients(&product, &[0]).unwrap();
    assert!((coeffs[0] - 1.0).abs() < 1e-15 && coeffs[1].abs() < 1e-15);
    assert!(schmidt_coefficients(&product, &[]).is_err());
    assert!(schmidt_coefficients(&product, &[0, 1]).is_err());
}

#[test]
fn lanczos_matches_dense() {
    let h = random_hermitian(150, 9, true);
    let cols: Vec<Vec<(usize, C64)>> = (0..150)
        .map(|j| (0..150).map(|i| (i, h.matrix()[(i, j)])).collect())
        .collect();
    let sparse = SparseHermitian::from_columns(cols);
    assert!(sparse.to_dense().max_diff(h.matrix()) == 0.0);
    let (lambda, _, residual) = lanczos_max(&sparse, 1e-11, 7).unwrap();
    let spec = hermitian_eig(&h, DEFAULT_DEGENERACY_TOL).unwrap();
    assert!((lambda - spec.max_value).abs() < 1e-10);
    assert!(residual <= 1e-11 * sparse.norm_bound());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetrized_reduced_matrix_agrees(alpha in prop::collection::vec(0.01f64..1.0, 1..6), d in 2usize..6) {
        let total: f64 = alpha.iter().sum();
        let alpha: Vec<f64> = alpha.iter().map(|a| a / total).collect();
        let n = alpha.len();
        let delta = |i: usize, j: usize| if i == j { (d - 1) as f64 } else { 0.0 };
        let m = ComplexMatrix::from_fn(n, n, |i, j| c(alpha[i] * (1.0 + delta(i, j))));
        let s = ComplexMatrix::from_fn(n, n, |i, j| c((alpha[i] * alpha[j]).sqrt() * (1.0 + delta(i, j))));
        let (lambda, _) = general_max_real_eigenpair(&m).unwrap();
        let spec = hermitian_eig(&HermitianOperator::from_matrix(s).unwrap(), 1e-9).unwrap();
        prop_assert!((lambda - spec.max_value).abs() < 1e-10);
    }

    #[test]
    fn schmidt_squares_match_reduced_spectrum(re in prop::collection::vec(-1.0f64..1.0, 12), im in prop::collection::vec(-1.0f64..1.0, 12)) {
        let amps: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        prop_assume!(norm(&amps) > 1e-3);
        let psi = PureState::normalized(amps, vec![2, 3, 2]).unwrap();
        let coeffs = schmidt_coefficients(&psi, &[0, 2]).unwrap();
        let total: f64 = coeffs.iter().map(|s| s * s).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let rho = psi.reduced_density(&[0, 2]).unwrap();
        let mut evals = hermitian_eig(&rho, 1e-9).unwrap().eigenvalues;
        evals.reverse();
        for (s, p) in coeffs.iter().zip(&evals) {
            prop_assert!((s * s - p).abs() < 1e-10);
        }
        let via_projector = partial_trace(&psi.projector(), &[0, 2]).unwrap();
        prop_assert!(via_projector.matrix().max_diff(rho.matrix()) < 1e-12);
    }
}
