//! The number filter `q^{a^dag a}`, the squeezed-then-filtered pure-state
//! family it generates from a two-mode squeezed vacuum, and deterministic
//! one-mode Gaussian channels `(X, Y)`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_symplectic, euler_decompose, rotation2, tmss_state, GaussianState, SymplecticOp,
};
use crate::scalar::{half, lit, tol, Real};

/// CP slack for the channel condition.
pub const CP_TOL: f64 = 1e-10;

/// Coefficients of the unnormalized pure state
/// `exp(f1 a1^dag^2 + f2 a2^dag^2 + f3 a1^dag a2^dag)|00>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadExpState<T> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
}

impl<T: Real> QuadExpState<T> {
    pub fn new(f1: T, f2: T, f3: T) -> Result<Self> {
        let s = Self { f1, f2, f3 };
        let (d1, d2) = s.denominators();
        if !(d1 > T::zero() && d2 > T::zero()) {
            return Err(Error::Domain(format!(
                "coefficients ({f1}, {f2}, {f3}) give a non-normalizable state (denominators {d1}, {d2})"
            )));
        }
        Ok(s)
    }

    /// `(1 + 2f1 + 2f2 + 4f1f2 - f3^2, 1 - 2f1 - 2f2 + 4f1f2 - f3^2)`.
    pub fn denominators(&self) -> (T, T) {
        let two = lit::<T>(2.0);
        let common = lit::<T>(4.0) * self.f1 * self.f2 - self.f3 * self.f3;
        (
            T::one() + two * self.f1 + two * self.f2 + common,
            T::one() - two * self.f1 - two * self.f2 + common,
        )
    }
}

/// The non-unitary number filter `T(q) = q^{a^dag a}`, `0 < q <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOp<T> {
    q: T,
}

impl<T: Real> FilterOp<T> {
    pub fn new(q: T) -> Result<Self> {
        if !(q > T::zero() && q <= T::one()) {
            return Err(Error::Domain(format!(
                "filter parameter must lie in (0, 1], got {q}"
            )));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> T {
        self.q
    }
}

/// Coefficients of `(I (x) T(q1)) (I (x) S(r)) |chi(q0)>`.
pub fn filtered_coeffs<T: Real>(q0: T, r: T, q1: T) -> Result<QuadExpState<T>> {
    if q0.abs() >= T::one() {
        return Err(Error::Domain(format!("need |q0| < 1, got {q0}")));
    }
    FilterOp::new(q1)?;
    let two_r = lit::<T>(2.0) * r;
    let t = two_r.tanh();
    QuadExpState::new(
        -half::<T>() * q0 * q0 * t,
        half::<T>() * q1 * q1 * t,
        q0 * q1 / two_r.cosh(),
    )
}

/// Covariance of the normalized state `exp(...)|00>`.
///
/// The printed entries `b1, b2, c1, c2, d1, d2` are moments of the
/// characteristic-function matrix, whose per-mode axes are `(p, x)`; they
/// are mapped onto the `(x, p)` covariance here, so that `b2` is `Var x1`
/// and `b1` is `Var p1`. Determinants of all blocks are unaffected.
pub fn cm_from_quadexp<T: Real>(s: &QuadExpState<T>) -> Result<GaussianState<T>> {
    let s = QuadExpState::new(s.f1, s.f2, s.f3)?;
    let (den1, den2) = s.denominators();
    let two = lit::<T>(2.0);
    let h = half::<T>();
    let b1 = -h + (T::one() + two * s.f2) / den1;
    let b2 = -h + (T::one() - two * s.f2) / den2;
    let d1 = -h + (T::one() + two * s.f1) / den1;
    let d2 = -h + (T::one() - two * s.f1) / den2;
    let c1 = -s.f3 / den1;
    let c2 = s.f3 / den2;
    let mut cov = DMatrix::zeros(4, 4);
    cov[(0, 0)] = b2;
    cov[(1, 1)] = b1;
    cov[(2, 2)] = d2;
    cov[(3, 3)] = d1;
    cov[(0, 2)] = c2;
    cov[(2, 0)] = c2;
    cov[(1, 3)] = c1;
    cov[(3, 1)] = c1;
    GaussianState::new(DVector::zeros(4), cov)
}

/// Closed form of `det A` for the squeezed-then-filtered state.
pub fn det_a_closed_form<T: Real>(q0: T, q1: T, r: T) -> T {
    let q02 = q0 * q0;
    let q12 = q1 * q1;
    let q04 = q02 * q02;
    let q14 = q12 * q12;
    let one = T::one();
    let den = one - lit::<T>(4.0) * q02 * q12
        + q14
        + q04 * (one + q14)
        + (one - q04) * (one - q14) * (lit::<T>(4.0) * r).cosh();
    lit::<T>(0.25) + lit::<T>(2.0) * q02 * q12 / den
}

/// `T(qa)` on mode 0 of `|chi(q0)>`, which is `|chi(q0 qa)>`.
pub fn apply_filter_tmss<T: Real>(q0: T, qa: T) -> Result<GaussianState<T>> {
    FilterOp::new(qa)?;
    tmss_state(q0 * qa)
}

/// Single-mode Gaussian channel `cov -> X cov X^T + Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel<T: Real> {
    x: Matrix2<T>,
    y: Matrix2<T>,
}

impl<T: Real> GaussianChannel<T> {
    /// Checks `Y + (i/2)(Omega - X Omega X^T) >= 0`.
    pub fn new(x: Matrix2<T>, y: Matrix2<T>) -> Result<Self> {
        if (y - y.transpose()).amax() > tol::<T>(1e-12) {
            return Err(Error::Unphysical("noise matrix Y is not symmetric".into()));
        }
        let y = (y + y.transpose()) * half::<T>();
        let ch = Self { x, y };
        let min = ch.cp_min_eigenvalue();
        if min < -tol::<T>(CP_TOL) {
            return Err(Error::Unphysical(format!(
                "channel is not completely positive (min eigenvalue {min})"
            )));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        Self {
            x: Matrix2::identity(),
            y: Matrix2::zeros(),
        }
    }

    pub fn x(&self) -> &Matrix2<T> {
        &self.x
    }

    pub fn y(&self) -> &Matrix2<T> {
        &self.y
    }

    /// Smallest eigenvalue of the Hermitian CP matrix. For a single mode
    /// `X Omega X^T = det(X) Omega`, so the imaginary part is
    /// `(1 - det X)/2` off the diagonal.
    pub fn cp_min_eigenvalue(&self) -> T {
        let k = (T::one() - self.x.determinant()) * half::<T>();
        let (a, b, c) = (self.y[(0, 0)], self.y[(1, 1)], self.y[(0, 1)]);
        let mid = (a + b) * half::<T>();
        let rad = (((a - b) * half::<T>()).powi(2) + c * c + k * k).sqrt();
        mid - rad
    }
}

/// Mode mixed on a beamsplitter of angle `theta` with an ancilla in the
/// squeezed thermal state `S(u3) rho_th(b3) S(u3)^dag`, ancilla discarded.
pub fn beamsplitter_channel<T: Real>(theta: T, u3: T, b3: T) -> Result<GaussianChannel<T>> {
    if !(u3 > T::zero()) {
        return Err(Error::Domain(format!(
            "ancilla squeezing must be positive, got {u3}"
        )));
    }
    if b3 < half::<T>() {
        return Err(Error::Unphysical(format!(
            "ancilla thermal variance {b3} is below the vacuum level 1/2"
        )));
    }
    let (s, c) = theta.sin_cos();
    let x = Matrix2::identity() * c;
    let y = Matrix2::new(
        s * s * u3 * u3 * b3,
        T::zero(),
        T::zero(),
        s * s * b3 / (u3 * u3),
    );
    GaussianChannel::new(x, y)
}

fn check_mode<T: Real>(state: &GaussianState<T>, mode: usize) -> Result<()> {
    if mode >= state.n_modes() {
        return Err(Error::ModeIndex {
            index: mode,
            n_modes: state.n_modes(),
        });
    }
    Ok(())
}

/// Applies `ch` to one mode of a state, identity elsewhere.
pub fn apply_oneside_channel<T: Real>(
    state: &GaussianState<T>,
    ch: &GaussianChannel<T>,
    mode: usize,
) -> Result<GaussianState<T>> {
    check_mode(state, mode)?;
    let dim = state.cov().nrows();
    let mut m = DMatrix::identity(dim, dim);
    let mut n = DMatrix::zeros(dim, dim);
    for a in 0..2 {
        for b in 0..2 {
            m[(2 * mode + a, 2 * mode + b)] = ch.x[(a, b)];
            n[(2 * mode + a, 2 * mode + b)] = ch.y[(a, b)];
        }
    }
    let cov = &m * state.cov() * m.transpose() + n;
    let mean = &m * state.mean();
    Ok(GaussianState::from_parts_unchecked(mean, cov))
}

/// Applies a single-mode symplectic `v` to `mode`.
pub fn pre_process<T: Real>(
    state: &GaussianState<T>,
    v: &SymplecticOp<T>,
    mode: usize,
) -> Result<GaussianState<T>> {
    check_mode(state, mode)?;
    let embedded = v.embed(mode, state.n_modes())?;
    apply_symplectic(state, &embedded)
}

/// A one-side map on the second mode: either a deterministic Gaussian
/// channel or the number filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneSideMap<T: Real> {
    Gaussian(GaussianChannel<T>),
    Filter(FilterOp<T>),
}

impl<T: Real> OneSideMap<T> {
    /// Output covariance for the input `|chi(q)>` with `v` applied to mode 1
    /// before the map.
    ///
    /// For the filter the input is reduced to the squeezed-then-filtered
    /// closed form: with `v = R(a) S(r) R(b)`, the inner rotation moves to
    /// mode 0 (the squeezed vacuum is invariant under `R(t) (+) R(-t)`), the
    /// outer one commutes with the filter.
    pub fn transmit_tmss(&self, q: T, v: &SymplecticOp<T>) -> Result<GaussianState<T>> {
        match self {
            OneSideMap::Gaussian(ch) => {
                let input = pre_process(&tmss_state(q)?, v, 1)?;
                apply_oneside_channel(&input, ch, 1)
            }
            OneSideMap::Filter(f) => {
                let e = euler_decompose(&v.single_mode_matrix()?)?;
                let core = cm_from_quadexp(&filtered_coeffs(q, e.r, f.q())?)?;
                let local = SymplecticOp::from_single_mode(rotation2(e.theta_in))?
                    .direct_sum(&SymplecticOp::from_single_mode(rotation2(e.theta_out))?);
                apply_symplectic(&core, &local)
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            OneSideMap::Gaussian(ch) => ch.x == Matrix2::identity() && ch.y == Matrix2::zeros(),
            OneSideMap::Filter(f) => f.q() == T::one(),
        }
    }
}
