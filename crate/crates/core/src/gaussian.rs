//! Finite-dimensional Gaussian algebra: Cholesky factors, conditioning and the
//! Woodbury identity. These routines back both the production formulas and the
//! brute-force oracles used in tests.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{DblError, Result};

/// Relative tolerance used when checking symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative tolerance used when checking positive semi-definiteness.
pub const PSD_TOL: f64 = 1e-10;

/// Averages a square matrix with its transpose.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn ensure_square(m: &DMatrix<f64>, module: &'static str, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(DblError::ShapeMismatch {
            module,
            detail: format!("{what} must be square, got {}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, module: &'static str, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(DblError::InvalidInput { module, detail: format!("{what} contains non-finite entries") });
    }
    Ok(())
}

/// Checks symmetry to [`SYMMETRY_TOL`] relative to the largest entry.
pub fn ensure_symmetric(m: &DMatrix<f64>, module: &'static str, what: &str) -> Result<()> {
    ensure_square(m, module, what)?;
    ensure_finite(m, module, what)?;
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(DblError::NotSymmetric {
            module,
            detail: format!("{what}: max |m - m^T| = {asym:e}"),
        });
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

/// True when all eigenvalues are at least `-PSD_TOL * ||m||`.
pub fn is_psd(m: &DMatrix<f64>) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    min_eigenvalue(m) >= -PSD_TOL * m.norm().max(f64::MIN_POSITIVE)
}

/// Symmetric square root `R` with `R R^T = m` for a PSD matrix; negative
/// eigenvalues within round-off are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    &scaled * eig.eigenvectors.transpose()
}

/// Lower-triangular Cholesky factor `L` with `L L^T = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: DMatrix<f64>,
}

/// Cholesky factorisation reporting the failing pivot.
pub fn cholesky(cov: &DMatrix<f64>) -> Result<CholeskyFactor> {
    cholesky_in(cov, "gaussian_core")
}

/// Same as [`cholesky`] but attributes failures to `module`.
pub fn cholesky_in(cov: &DMatrix<f64>, module: &'static str) -> Result<CholeskyFactor> {
    ensure_symmetric(cov, module, "covariance")?;
    let a = symmetrize(cov);
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(DblError::NotPositiveDefinite { module, pivot: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(CholeskyFactor { lower: l })
}

impl CholeskyFactor {
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Reconstructs `L L^T`.
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.lower * self.lower.transpose()
    }

    /// Solves `L z = b` column by column.
    pub fn forward_solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut z = b.clone();
        for c in 0..z.ncols() {
            for i in 0..n {
                let mut s = z[(i, c)];
                for k in 0..i {
                    s -= self.lower[(i, k)] * z[(k, c)];
                }
                z[(i, c)] = s / self.lower[(i, i)];
            }
        }
        z
    }

    /// Solves `L^T z = b` column by column.
    pub fn backward_solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut z = b.clone();
        for c in 0..z.ncols() {
            for i in (0..n).rev() {
                let mut s = z[(i, c)];
                for k in (i + 1)..n {
                    s -= self.lower[(k, i)] * z[(k, c)];
                }
                z[(i, c)] = s / self.lower[(i, i)];
            }
        }
        z
    }

    /// Solves `Σ X = B`.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.backward_solve(&self.forward_solve(b))
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
        DVector::from_column_slice(self.solve(&m).as_slice())
    }

    /// Explicit `Σ^{-1}`, symmetrised.
    pub fn inverse(&self) -> DMatrix<f64> {
        symmetrize(&self.solve(&DMatrix::identity(self.dim(), self.dim())))
    }

    /// Explicit `L^{-1}`.
    pub fn lower_inverse(&self) -> DMatrix<f64> {
        self.forward_solve(&DMatrix::identity(self.dim(), self.dim()))
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}

/// `m^{-1}` for an SPD matrix, computed through its Cholesky factor.
pub fn spd_inverse(m: &DMatrix<f64>, module: &'static str) -> Result<DMatrix<f64>> {
    Ok(cholesky_in(m, module)?.inverse())
}

/// Solves `m X = b` for an SPD `m`.
pub fn spd_solve(m: &DMatrix<f64>, b: &DMatrix<f64>, module: &'static str) -> Result<DMatrix<f64>> {
    Ok(cholesky_in(m, module)?.solve(b))
}

/// A Gaussian vector `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVector {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianVector {
    /// Validates shape, symmetry and positive semi-definiteness.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        ensure_symmetric(&cov, "gaussian_core", "covariance")?;
        if cov.nrows() != mean.len() {
            return Err(DblError::ShapeMismatch {
                module: "gaussian_core",
                detail: format!("mean has length {}, covariance is {}x{}", mean.len(), cov.nrows(), cov.ncols()),
            });
        }
        if !is_psd(&cov) {
            return Err(DblError::NotPositiveDefinite { module: "gaussian_core", pivot: 0 });
        }
        Ok(Self { mean, cov: symmetrize(&cov) })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Marginal law of the components listed in `idx`.
    pub fn marginal(&self, idx: &[usize]) -> GaussianVector {
        GaussianVector {
            mean: DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i])),
            cov: DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]),
        }
    }
}

/// Precomputed conditioning of the free components of a joint Gaussian on a
/// fixed set of observed components. Reusable for many observation values.
#[derive(Debug, Clone)]
pub struct GaussianConditioner {
    free: Vec<usize>,
    observed: Vec<usize>,
    mean_free: DVector<f64>,
    mean_obs: DVector<f64>,
    gain: DMatrix<f64>,
    cov: DMatrix<f64>,
}

impl GaussianConditioner {
    pub fn new(joint: &GaussianVector, observed_indices: &[usize]) -> Result<Self> {
        let d = joint.dim();
        let mut seen = vec![false; d];
        for &i in observed_indices {
            if i >= d || seen[i] {
                return Err(DblError::ShapeMismatch {
                    module: "gaussian_core",
                    detail: format!("observed index {i} invalid for dimension {d}"),
                });
            }
            seen[i] = true;
        }
        let free: Vec<usize> = (0..d).filter(|i| !seen[*i]).collect();
        let observed = observed_indices.to_vec();
        let x = joint.marginal(&free);
        let y = joint.marginal(&observed);
        let cross = DMatrix::from_fn(free.len(), observed.len(), |r, c| joint.cov[(free[r], observed[c])]);

        let trace = y.cov.trace();
        if !observed.is_empty() && min_eigenvalue(&y.cov) <= 1e-12 * trace.abs().max(f64::MIN_POSITIVE) {
            return Err(DblError::SingularObservationCov);
        }
        let chol = cholesky_in(&y.cov, "gaussian_core").map_err(|_| DblError::SingularObservationCov)?;
        // gain = Σ_XY Σ_YY^{-1}
        let gain = chol.solve(&cross.transpose()).transpose();
        let cov = symmetrize(&(&x.cov - &gain * cross.transpose()));
        Ok(Self { free, observed, mean_free: x.mean, mean_obs: y.mean, gain, cov })
    }

    /// Indices (into the joint) of the returned components, ascending.
    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn observed_indices(&self) -> &[usize] {
        &self.observed
    }

    /// `Σ_XY Σ_YY^{-1}`.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// Conditional covariance (independent of the observation value).
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mean_given(&self, observation: &DVector<f64>) -> Result<DVector<f64>> {
        if observation.len() != self.observed.len() {
            return Err(DblError::ShapeMismatch {
                module: "gaussian_core",
                detail: format!("observation has length {}, expected {}", observation.len(), self.observed.len()),
            });
        }
        Ok(&self.mean_free + &self.gain * (observation - &self.mean_obs))
    }

    pub fn condition(&self, observation: &DVector<f64>) -> Result<GaussianVector> {
        Ok(GaussianVector { mean: self.mean_given(observation)?, cov: self.cov.clone() })
    }
}

/// Law of the unobserved components of `joint` given the observed ones.
/// The result lists the free components in ascending index order.
pub fn condition(joint: &GaussianVector, observed_indices: &[usize], observation: &DVector<f64>) -> Result<GaussianVector> {
    GaussianConditioner::new(joint, observed_indices)?.condition(observation)
}

/// `(A + U C V^T)^{-1}` from `A^{-1}` and `C^{-1}` via the Woodbury identity.
pub fn woodbury_inverse(
    a_inv: &DMatrix<f64>,
    u: &DMatrix<f64>,
    c_inv: &DMatrix<f64>,
    v: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a_inv.nrows();
    let k = c_inv.nrows();
    let shape_ok = a_inv.ncols() == n
        && c_inv.ncols() == k
        && u.nrows() == n
        && v.nrows() == n
        && u.ncols() == k
        && v.ncols() == k;
    if !shape_ok {
        return Err(DblError::ShapeMismatch {
            module: "gaussian_core",
            detail: format!(
                "woodbury: A^-1 {}x{}, U {}x{}, C^-1 {}x{}, V {}x{}",
                a_inv.nrows(),
                a_inv.ncols(),
                u.nrows(),
                u.ncols(),
                c_inv.nrows(),
                c_inv.ncols(),
                v.nrows(),
                v.ncols()
            ),
        });
    }
    let a_inv_u = a_inv * u;
    let vt_a_inv = v.transpose() * a_inv;
    let inner = c_inv + v.transpose() * &a_inv_u;
    let lu = inner.lu();
    let rhs = lu.solve(&vt_a_inv).ok_or(DblError::SingularInnerBlock)?;
    if rhs.iter().any(|x| !x.is_finite()) {
        return Err(DblError::SingularInnerBlock);
    }
    Ok(a_inv - a_inv_u * rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_spd, five_asset_sigma};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
        m.clone().try_inverse().unwrap()
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let l = cholesky(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(l.lower(), &DMatrix::<f64>::identity(4, 4));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0, 0.25]));
        let l = cholesky(&d).unwrap();
        assert_eq!(l.lower().diagonal(), DVector::from_vec(vec![2.0, 3.0, 0.5]));
    }

    #[test]
    fn cholesky_reconstructs_market_covariance() {
        let s = five_asset_sigma();
        let l = cholesky(&s).unwrap();
        assert!((l.matrix() - &s).norm() / s.norm() < 1e-12);
        for i in 0..5 {
            assert!(l.lower()[(i, i)] > 0.0);
            for j in (i + 1)..5 {
                assert_eq!(l.lower()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_reports_failing_pivot() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 2.0, 1.0]);
        assert_eq!(cholesky(&m), Err(DblError::NotPositiveDefinite { module: "gaussian_core", pivot: 2 }));
    }

    #[test]
    fn independent_observation_leaves_prior() {
        let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 5.0]);
        let joint = GaussianVector::new(DVector::from_vec(vec![1.0, -1.0, 3.0]), cov).unwrap();
        let post = condition(&joint, &[2], &DVector::from_vec(vec![100.0])).unwrap();
        assert_eq!(post, joint.marginal(&[0, 1]));
    }

    #[test]
    fn scalar_conjugate_update() {
        let (a, t, w2, y) = (0.3, 2.0, 0.5, 1.1);
        let joint = GaussianVector::new(
            DVector::from_vec(vec![a, a]),
            DMatrix::from_row_slice(2, 2, &[t, t, t, t + t * w2]),
        )
        .unwrap();
        let post = condition(&joint, &[1], &DVector::from_vec(vec![y])).unwrap();
        let expected = a + t / (t + t * w2) * (y - a);
        assert!((post.mean[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn singular_observation_block_rejected() {
        let joint = GaussianVector::new(
            DVector::zeros(3),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.5, 0.5, 1.0, 1.0, 0.5, 1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(
            condition(&joint, &[1, 2], &DVector::zeros(2)).unwrap_err(),
            DblError::SingularObservationCov
        );
    }

    #[test]
    fn sequential_conditioning_matches_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cov = random_spd(6, &mut rng);
        let mean = DVector::from_fn(6, |i, _| i as f64 * 0.1);
        let joint = GaussianVector::new(mean, cov).unwrap();
        let obs = DVector::from_vec(vec![0.4, -0.2]);
        let both = condition(&joint, &[4, 5], &obs).unwrap();
        let first = condition(&joint, &[4], &DVector::from_vec(vec![obs[0]])).unwrap();
        // index 5 of the joint is index 4 of `first`
        let second = condition(&first, &[4], &DVector::from_vec(vec![obs[1]])).unwrap();
        assert!((both.mean - second.mean).amax() < 1e-10);
        assert!((both.cov - second.cov).amax() < 1e-10);
    }

    #[test]
    fn woodbury_trivial_cases() {
        let s = five_asset_sigma();
        let a_inv = dense_inverse(&s);
        let zero = DMatrix::zeros(5, 2);
        let c_inv = DMatrix::identity(2, 2);
        assert_eq!(woodbury_inverse(&a_inv, &zero, &c_inv, &zero).unwrap(), a_inv);
        let one = woodbury_inverse(
            &DMatrix::from_element(1, 1, 1.0 / 0.04),
            &DMatrix::from_element(1, 1, 1.0),
            &DMatrix::from_element(1, 1, 1.0 / 0.09),
            &DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        assert!((one[(0, 0)] - 1.0 / 0.13).abs() < 1e-12);
    }

    #[test]
    fn woodbury_matches_dense_on_market() {
        let s = five_asset_sigma();
        let p = crate::testutil::five_asset_pick();
        let omega = &p * &s * p.transpose() * 0.4;
        let omega_inv = dense_inverse(&omega);
        let assembled = &s + p.transpose() * &omega_inv * &p;
        let w = woodbury_inverse(&dense_inverse(&s), &p.transpose(), &omega, &p.transpose()).unwrap();
        let d = dense_inverse(&assembled);
        assert!((&w - &d).norm() / d.norm() < 1e-10);
        let resid = (&assembled * &w - DMatrix::identity(5, 5)).norm() / 5f64.sqrt();
        assert!(resid < 1e-10);
    }

    #[test]
    fn woodbury_shape_mismatch() {
        let e = woodbury_inverse(&DMatrix::identity(3, 3), &DMatrix::zeros(2, 1), &DMatrix::identity(1, 1), &DMatrix::zeros(3, 1));
        assert!(matches!(e, Err(DblError::ShapeMismatch { .. })));
    }

    #[test]
    fn psd_sqrt_reconstructs_singular_matrix() {
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let m = &v * v.transpose();
        let r = psd_sqrt(&m);
        assert!((&r * r.transpose() - &m).amax() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn woodbury_agrees_with_dense(seed in any::<u64>(), n in 1usize..=20, k in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_spd(n, &mut rng);
            let c = random_spd(k, &mut rng);
            let u = crate::testutil::random_matrix(n, k, &mut rng);
            let w = woodbury_inverse(&dense_inverse(&a), &u, &dense_inverse(&c), &u).unwrap();
            let d = dense_inverse(&(&a + &u * &c * u.transpose()));
            prop_assert!((&w - &d).norm() / d.norm() < 1e-10);
        }

        #[test]
        fn conditioning_shrinks_variance(seed in any::<u64>(), n in 2usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let joint = GaussianVector::new(DVector::zeros(n), random_spd(n, &mut rng)).unwrap();
            let observed: Vec<usize> = (0..n).filter(|i| i % 2 == 1).collect();
            let obs = DVector::from_element(observed.len(), 0.7);
            let post = condition(&joint, &observed, &obs).unwrap();
            let free: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
            prop_assert!(post.cov.trace() <= joint.marginal(&free).cov.trace() + 1e-12);
            prop_assert!(is_psd(&post.cov));
            prop_assert!((&post.cov - post.cov.transpose()).amax() == 0.0);
        }

        #[test]
        fn cholesky_reconstruction(seed in any::<u64>(), n in 1usize..=12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_spd(n, &mut rng);
            let l = cholesky(&s).unwrap();
            prop_assert!((l.matrix() - &s).norm() / s.norm() < 1e-12);
            prop_assert!((l.inverse() * &s - DMatrix::identity(n, n)).amax() < 1e-9);
        }
    }
}
