//! Covariance-matrix representation of Gaussian states and the symplectic
//! maps acting on them.
//!
//! Conventions: `hbar = 1`, quadratures ordered `(x1, p1, x2, p2, ...)` with
//! `x = (a + a^dag)/sqrt(2)`, and the vacuum covariance is `I/2`. Modes are
//! indexed from zero.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{half, lit, to_f64, tol, Real};

/// Symmetric-part tolerance for stored covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack on the uncertainty relation `nu >= 1/2`.
pub const UNCERTAINTY_TOL: f64 = 1e-9;
/// Residual allowed in `S Omega S^T = Omega`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Direct sum of `[[0, 1], [-1, 0]]` over `n_modes` modes.
pub fn omega<T: Real>(n_modes: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = T::one();
        m[(2 * k + 1, 2 * k)] = -T::one();
    }
    m
}

/// Phase-space rotation `[[cos, sin], [-sin, cos]]`.
pub fn rotation2<T: Real>(theta: T) -> Matrix2<T> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Single-mode squeezer `diag(u, 1/u)`.
pub fn squeeze2<T: Real>(u: T) -> Matrix2<T> {
    Matrix2::new(u, T::zero(), T::zero(), T::one() / u)
}

fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * half::<T>()
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    mean: DVector<T>,
    cov: DMatrix<T>,
}

impl<T: Real> GaussianState<T> {
    /// Builds a state, checking symmetry, positivity and the uncertainty
    /// relation.
    pub fn new(mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "covariance must be a non-empty 2n x 2n matrix, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mean.len(),
            });
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > tol::<T>(SYMMETRY_TOL) {
            return Err(Error::NotSymmetric {
                asymmetry: to_f64(asym),
            });
        }
        let cov = symmetrize(&cov);
        let nus = symplectic_eigenvalues(&cov)?;
        let min = nus[0];
        if min < half::<T>() - tol::<T>(UNCERTAINTY_TOL) {
            return Err(Error::Uncertainty {
                min_eigenvalue: to_f64(min),
            });
        }
        Ok(Self { mean, cov })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(mean: DVector<T>, cov: DMatrix<T>) -> Self {
        Self {
            mean,
            cov: symmetrize(&cov),
        }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * half::<T>(),
        }
    }

    /// Single-mode thermal state with covariance `b * I`, `b >= 1/2`.
    pub fn thermal(b: T) -> Result<Self> {
        if b < half::<T>() {
            return Err(Error::Unphysical(format!(
                "thermal variance {b} below vacuum level 1/2"
            )));
        }
        Ok(Self {
            mean: DVector::zeros(2),
            cov: DMatrix::identity(2, 2) * b,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    /// The `2x2` block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<T> {
        Matrix2::new(
            self.cov[(2 * i, 2 * j)],
            self.cov[(2 * i, 2 * j + 1)],
            self.cov[(2 * i + 1, 2 * j)],
            self.cov[(2 * i + 1, 2 * j + 1)],
        )
    }

    /// Determinant of the first mode's reduced covariance block.
    pub fn det_a(&self) -> T {
        self.block(0, 0).determinant()
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<T>> {
        symplectic_eigenvalues(&self.cov)
    }

    /// Largest deviation of a symplectic eigenvalue from 1/2.
    pub fn purity_deviation(&self) -> Result<T> {
        Ok(self
            .symplectic_eigenvalues()?
            .into_iter()
            .map(|nu| (nu - half::<T>()).abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a }))
    }
}

/// Covariance of the two-mode squeezed vacuum
/// `sqrt(1-q^2) exp(q a1^dag a2^dag)|00>`.
pub fn tmss_state<T: Real>(q: T) -> Result<GaussianState<T>> {
    if q.abs() >= T::one() {
        return Err(Error::Domain(format!(
            "two-mode squeezed state needs |q| < 1, got {q}"
        )));
    }
    let q2 = q * q;
    let a = half::<T>() * (T::one() + q2) / (T::one() - q2);
    let c = q / (T::one() - q2);
    let mut cov = DMatrix::zeros(4, 4);
    for k in 0..4 {
        cov[(k, k)] = a;
    }
    cov[(0, 2)] = c;
    cov[(2, 0)] = c;
    cov[(1, 3)] = -c;
    cov[(3, 1)] = -c;
    Ok(GaussianState::from_parts_unchecked(DVector::zeros(4), cov))
}

/// Symplectic eigenvalues of a positive-definite covariance matrix, sorted
/// ascending, one per mode.
pub fn symplectic_eigenvalues<T: Real>(cov: &DMatrix<T>) -> Result<Vec<T>> {
    let dim = cov.nrows();
    if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
        return Err(Error::InvalidInput("covariance must be 2n x 2n".into()));
    }
    let sym = symmetrize(cov);
    if sym.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    if dim == 2 {
        return Ok(vec![sym.determinant().sqrt()]);
    }
    // The closed two-mode form through sqrt(Delta^2 - 4 det) loses half the
    // digits near pure states; the eigen route stays Lipschitz.
    let eig = SymmetricEigen::new(sym);
    let mut root = eig.eigenvectors.clone();
    for (k, mut col) in root.column_iter_mut().enumerate() {
        col *= eig.eigenvalues[k].sqrt();
    }
    let sqrt_cov = &root * eig.eigenvectors.transpose();
    let k = &sqrt_cov * omega::<T>(dim / 2) * &sqrt_cov;
    let gram = k.transpose() * &k;
    let mut ev: Vec<T> = SymmetricEigen::new(symmetrize(&gram))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(ev
        .chunks(2)
        .map(|p| ((p[0] + p[1]) * half::<T>()).max(T::zero()).sqrt())
        .collect())
}

/// Williamson decomposition `cov = S diag(nu1, nu1, nu2, nu2, ...) S^T` with
/// `S` symplectic. The `nu` are returned in the order of the blocks, which
/// is not necessarily sorted.
pub fn williamson<T: Real>(cov: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<T>)> {
    let dim = cov.nrows();
    if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
        return Err(Error::InvalidInput("covariance must be 2n x 2n".into()));
    }
    let sym = symmetrize(cov);
    if sym.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new(sym);
    let mut root = eig.eigenvectors.clone();
    for (k, mut col) in root.column_iter_mut().enumerate() {
        col *= eig.eigenvalues[k].sqrt();
    }
    let sqrt_cov = &root * eig.eigenvectors.transpose();
    // K = cov^1/2 Omega cov^1/2 is antisymmetric with eigenvalues +-i nu.
    let k = &sqrt_cov * omega::<T>(dim / 2) * &sqrt_cov;
    let gram = SymmetricEigen::new(symmetrize(&(k.transpose() * &k)));
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(dim);
    let mut nu = Vec::with_capacity(dim / 2);
    while basis.len() < dim {
        // Projecting an eigenvector of -K^2 off a K-invariant subspace
        // leaves an eigenvector, so the largest residual is a safe pick.
        let v = gram
            .eigenvectors
            .column_iter()
            .map(|e| {
                let mut r = e.into_owned();
                for b in &basis {
                    r -= b * b.dot(&r);
                }
                r
            })
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite"))
            .expect("nonempty")
            .normalize();
        let kv = &k * &v;
        let n = kv.norm();
        if !(n > T::zero()) {
            return Err(Error::NotPositiveDefinite);
        }
        basis.push(v);
        basis.push(-kv / n);
        nu.push(n);
    }
    let o = DMatrix::from_columns(&basis);
    let mut s = sqrt_cov * o;
    for (j, &n) in nu.iter().enumerate() {
        let scale = T::one() / n.sqrt();
        s.column_mut(2 * j).scale_mut(scale);
        s.column_mut(2 * j + 1).scale_mut(scale);
    }
    Ok((s, nu))
}

/// Generating parameters of a symplectic map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator<T> {
    Identity,
    /// `[[cos, sin], [-sin, cos]]` on one mode.
    Rotation {
        theta: T,
    },
    /// Squeezer `exp(r (a^dag^2 - a^2))`, phase-space `diag(e^{2r}, e^{-2r})`.
    SqueezeR {
        r: T,
    },
    /// Squeezer `(x, p) -> (u x, p / u)`.
    SqueezeU {
        u: T,
    },
    /// Two-mode mixer; both the x pair and the p pair of `(j, k)` go
    /// through `[[cos, -sin], [sin, cos]]`.
    Beamsplitter {
        theta: T,
    },
    Composite,
}

/// A linear symplectic phase-space map on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp<T: Real> {
    matrix: DMatrix<T>,
    kind: Generator<T>,
}

impl<T: Real> SymplecticOp<T> {
    /// Wraps an arbitrary matrix after checking `S Omega S^T = Omega`.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim % 2 != 0 || matrix.ncols() != dim {
            return Err(Error::InvalidInput(
                "symplectic matrix must be 2n x 2n".into(),
            ));
        }
        let residual = symplectic_residual(&matrix);
        if residual > tol::<T>(SYMPLECTIC_TOL) {
            return Err(Error::NotSymplectic {
                residual: to_f64(residual),
            });
        }
        Ok(Self {
            matrix,
            kind: Generator::Composite,
        })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            kind: Generator::Identity,
        }
    }

    /// Single-mode rotation.
    pub fn rotation(theta: T) -> Self {
        Self::single(rotation2(theta), Generator::Rotation { theta })
    }

    /// Single-mode squeezer in the `exp(r (a^dag^2 - a^2))` convention.
    pub fn squeeze_r(r: T) -> Self {
        let u = (lit::<T>(2.0) * r).exp();
        Self::single(squeeze2(u), Generator::SqueezeR { r })
    }

    /// Single-mode squeezer `(x, p) -> (u x, p / u)`.
    pub fn squeeze_u(u: T) -> Result<Self> {
        if !(u > T::zero()) {
            return Err(Error::Domain(format!(
                "squeezing factor must be positive, got {u}"
            )));
        }
        Ok(Self::single(squeeze2(u), Generator::SqueezeU { u }))
    }

    /// Two-mode beamsplitter on modes `(j, k)` of an `n_modes` system.
    pub fn beamsplitter(theta: T, j: usize, k: usize, n_modes: usize) -> Result<Self> {
        for &m in &[j, k] {
            if m >= n_modes {
                return Err(Error::ModeIndex { index: m, n_modes });
            }
        }
        if j == k {
            return Err(Error::InvalidInput(
                "beamsplitter needs two distinct modes".into(),
            ));
        }
        let (s, c) = theta.sin_cos();
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for quad in 0..2 {
            let (a, b) = (2 * j + quad, 2 * k + quad);
            m[(a, a)] = c;
            m[(a, b)] = -s;
            m[(b, a)] = s;
            m[(b, b)] = c;
        }
        Ok(Self {
            matrix: m,
            kind: Generator::Beamsplitter { theta },
        })
    }

    /// Single-mode `2x2` symplectic from a raw matrix (must have unit
    /// determinant).
    pub fn from_single_mode(m: Matrix2<T>) -> Result<Self> {
        let residual = (m.determinant() - T::one()).abs();
        if residual > tol::<T>(SYMPLECTIC_TOL) {
            return Err(Error::NotSymplectic {
                residual: to_f64(residual),
            });
        }
        Ok(Self::single(m, Generator::Composite))
    }

    /// `R(theta') * diag(e^{2r}, e^{-2r}) * R(theta)`.
    pub fn from_euler(angles: EulerAngles<T>) -> Self {
        let m = rotation2(angles.theta_out)
            * squeeze2((lit::<T>(2.0) * angles.r).exp())
            * rotation2(angles.theta_in);
        Self::single(m, Generator::Composite)
    }

    fn single(m: Matrix2<T>, kind: Generator<T>) -> Self {
        let mut d = DMatrix::zeros(2, 2);
        d.copy_from(&m);
        Self { matrix: d, kind }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn kind(&self) -> Generator<T> {
        self.kind
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// The `2x2` matrix of a single-mode op.
    pub fn single_mode_matrix(&self) -> Result<Matrix2<T>> {
        if self.n_modes() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.matrix.nrows(),
            });
        }
        Ok(Matrix2::new(
            self.matrix[(0, 0)],
            self.matrix[(0, 1)],
            self.matrix[(1, 0)],
            self.matrix[(1, 1)],
        ))
    }

    /// Embeds a single-mode op on `mode` of an `n_modes` system.
    pub fn embed(&self, mode: usize, n_modes: usize) -> Result<Self> {
        let s = self.single_mode_matrix()?;
        if mode >= n_modes {
            return Err(Error::ModeIndex {
                index: mode,
                n_modes,
            });
        }
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * mode + a, 2 * mode + b)] = s[(a, b)];
            }
        }
        Ok(Self {
            matrix: m,
            kind: self.kind,
        })
    }

    /// Direct sum `self (+) other`, acting on the modes of `self` first.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (d1, d2) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = DMatrix::zeros(d1 + d2, d1 + d2);
        m.view_mut((0, 0), (d1, d1)).copy_from(&self.matrix);
        m.view_mut((d1, d1), (d2, d2)).copy_from(&other.matrix);
        Self {
            matrix: m,
            kind: Generator::Composite,
        }
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.matrix.nrows() != first.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: first.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
            kind: Generator::Composite,
        })
    }

    /// `S^{-1} = -Omega S^T Omega`.
    pub fn inverse(&self) -> Self {
        let o = omega::<T>(self.n_modes());
        Self {
            matrix: -(&o * self.matrix.transpose() * &o),
            kind: Generator::Composite,
        }
    }
}

/// `max |S Omega S^T - Omega|`.
pub fn symplectic_residual<T: Real>(s: &DMatrix<T>) -> T {
    let o = omega::<T>(s.nrows() / 2);
    (s * &o * s.transpose() - &o).amax()
}

/// Builds a generator on the given target modes of an `n_modes` system.
pub fn symplectic_generator<T: Real>(
    generator: Generator<T>,
    modes: &[usize],
    n_modes: usize,
) -> Result<SymplecticOp<T>> {
    let single = |op: SymplecticOp<T>| -> Result<SymplecticOp<T>> {
        let &[mode] = modes else {
            return Err(Error::InvalidInput(format!(
                "single-mode generator needs exactly one target mode, got {}",
                modes.len()
            )));
        };
        op.embed(mode, n_modes)
    };
    match generator {
        Generator::Identity => Ok(SymplecticOp::identity(n_modes)),
        Generator::Rotation { theta } => single(SymplecticOp::rotation(theta)),
        Generator::SqueezeR { r } => single(SymplecticOp::squeeze_r(r)),
        Generator::SqueezeU { u } => single(SymplecticOp::squeeze_u(u)?),
        Generator::Beamsplitter { theta } => {
            let &[j, k] = modes else {
                return Err(Error::InvalidInput(
                    "beamsplitter needs two target modes".into(),
                ));
            };
            SymplecticOp::beamsplitter(theta, j, k, n_modes)
        }
        Generator::Composite => Err(Error::InvalidInput(
            "composite ops are built with SymplecticOp::new or compose".into(),
        )),
    }
}

/// `cov' = S cov S^T`, `mean' = S mean`.
pub fn apply_symplectic<T: Real>(
    state: &GaussianState<T>,
    op: &SymplecticOp<T>,
) -> Result<GaussianState<T>> {
    let dim = state.cov.nrows();
    if op.matrix.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.matrix.nrows(),
        });
    }
    let cov = &op.matrix * &state.cov * op.matrix.transpose();
    let mean = &op.matrix * &state.mean;
    Ok(GaussianState::from_parts_unchecked(mean, cov))
}

/// Euler parameters of a single-mode symplectic `R(theta_out) D(r) R(theta_in)`
/// with `D(r) = diag(e^{2r}, e^{-2r})`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EulerAngles<T> {
    pub theta_out: T,
    pub r: T,
    pub theta_in: T,
}

fn angle_of<T: Real>(rot: &Matrix2<T>) -> T {
    rot[(0, 1)].atan2(rot[(0, 0)])
}

/// Factorizes a single-mode symplectic into rotation, squeezer, rotation
/// with `r >= 0`. At `r = 0` the whole rotation goes into `theta_in`.
pub fn euler_decompose<T: Real>(s: &Matrix2<T>) -> Result<EulerAngles<T>> {
    let residual = (s.determinant() - T::one()).abs();
    if residual > tol::<T>(SYMPLECTIC_TOL) {
        return Err(Error::NotSymplectic {
            residual: to_f64(residual),
        });
    }
    // Polar route: S^T S = R(theta_in)^T D^2 R(theta_in).
    let sts = s.transpose() * s;
    let (a, b, c) = (sts[(0, 0)], sts[(1, 1)], sts[(0, 1)]);
    let two = lit::<T>(2.0);
    let tr = a + b;
    // Largest eigenvalue e^{4r}; tr = e^{4r} + e^{-4r} = 2 cosh(4r).
    let disc = ((a - b) * (a - b) + lit::<T>(4.0) * c * c).sqrt();
    let big = (tr + disc) / two;
    let r = big.ln() / lit::<T>(4.0);
    if r <= tol::<T>(1e-13) {
        return Ok(EulerAngles {
            theta_out: T::zero(),
            r: T::zero(),
            theta_in: angle_of(s),
        });
    }
    // Principal axis of S^T S: R(theta_in)^T e_x is its top eigenvector, so
    // (cos t, sin t) with tan(2t) = 2c / (a - b).
    let theta_in = (two * c).atan2(a - b) / two;
    let rin = rotation2(theta_in);
    let d = squeeze2((two * r).exp());
    let dinv = squeeze2((-two * r).exp());
    let rout = s * rin.transpose() * dinv;
    let theta_out = angle_of(&rout);
    // Guard against the branch where the axis picks the minor eigenvector.
    let recon = rotation2(theta_out) * d * rin;
    if (recon - s).amax() > tol::<T>(1e-8) {
        return Err(Error::NumericalConsistency(
            "Euler decomposition failed to reconstruct input".into(),
        ));
    }
    Ok(EulerAngles {
        theta_out,
        r,
        theta_in,
    })
}

/// Block-diagonal composition of two states.
pub fn tensor<T: Real>(a: &GaussianState<T>, b: &GaussianState<T>) -> GaussianState<T> {
    let (d1, d2) = (a.cov.nrows(), b.cov.nrows());
    let mut cov = DMatrix::zeros(d1 + d2, d1 + d2);
    cov.view_mut((0, 0), (d1, d1)).copy_from(&a.cov);
    cov.view_mut((d1, d1), (d2, d2)).copy_from(&b.cov);
    let mut mean = DVector::zeros(d1 + d2);
    mean.rows_mut(0, d1).copy_from(&a.mean);
    mean.rows_mut(d1, d2).copy_from(&b.mean);
    GaussianState::from_parts_unchecked(mean, cov)
}

/// Keeps the listed modes (in the given order) and discards the rest.
pub fn partial_trace<T: Real>(
    state: &GaussianState<T>,
    keep: &[usize],
) -> Result<GaussianState<T>> {
    if keep.is_empty() {
        return Err(Error::InvalidInput(
            "partial trace must keep at least one mode".into(),
        ));
    }
    let n = state.n_modes();
    for (i, &m) in keep.iter().enumerate() {
        if m >= n {
            return Err(Error::ModeIndex {
                index: m,
                n_modes: n,
            });
        }
        if keep[..i].contains(&m) {
            return Err(Error::InvalidInput(format!("mode {m} listed twice")));
        }
    }
    let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let cov = DMatrix::from_fn(idx.len(), idx.len(), |i, j| state.cov[(idx[i], idx[j])]);
    let mean = DVector::from_fn(idx.len(), |i, _| state.mean[idx[i]]);
    Ok(GaussianState::from_parts_unchecked(mean, cov))
}
