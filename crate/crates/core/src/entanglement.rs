//! Entanglement of two-mode Gaussian states.
//!
//! Three quantities are provided:
//! - the characteristic value `q^2` of a pure state, read off `det A`;
//! - the logarithmic negativity (natural log) of any two-mode state;
//! - the Gaussian entanglement of formation expressed as a characteristic
//!   value: the smallest `q0^2` such that some locally transformed squeezed
//!   vacuum `(L1 (+) L2) Gamma_tmss(q0) (L1 (+) L2)^T` fits under the state's
//!   covariance. It is found numerically, see [`geof_detailed`].

use nalgebra::{Matrix2, Matrix4, Matrix4x2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::OneSideMap;
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SymplecticOp};
use crate::nelder_mead::NelderMead;
use crate::scalar::{half, lit, to_f64, tol, Real};

/// Purity threshold on symplectic eigenvalues for pure-state formulas.
pub const PURITY_TOL: f64 = 1e-6;
/// Guard keeping squeezing parameters away from `|q| = 1`.
pub const Q_EPSILON: f64 = 1e-6;
/// Slack of the output-versus-input ratio check.
pub const RATIO_TOL: f64 = 1e-6;
/// Allowed violation of `Gamma - Gamma_p >= 0` in a reported decomposition.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Characteristic entanglement value `|q|^2` of a squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct CharacteristicEntanglement<T>(T);

impl<T: Real> CharacteristicEntanglement<T> {
    pub fn new(value: T) -> Result<Self> {
        if !(value >= T::zero() && value <= T::one()) {
            return Err(Error::Domain(format!(
                "characteristic entanglement must lie in [0, 1], got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn from_q(q: T) -> Result<Self> {
        Self::new(q * q)
    }

    pub fn value(&self) -> T {
        self.0
    }
}

fn require_two_modes<T: Real>(state: &GaussianState<T>) -> Result<()> {
    if state.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.cov().nrows(),
        });
    }
    Ok(())
}

/// `q^2` of a pure two-mode state, inverting `det A = ((1+q^2)/(1-q^2))^2 / 4`.
pub fn char_ent_pure<T: Real>(state: &GaussianState<T>) -> Result<T> {
    require_two_modes(state)?;
    let dev = state.purity_deviation()?;
    if dev > tol::<T>(PURITY_TOL) {
        return Err(Error::NotPure {
            deviation: to_f64(dev),
        });
    }
    let root = lit::<T>(2.0) * state.det_a().max(lit(0.25)).sqrt();
    Ok((root - T::one()) / (root + T::one()))
}

/// Logarithmic negativity `max(0, -ln(2 nu))`, `nu` the smallest symplectic
/// eigenvalue of the partial transpose (p2 -> -p2).
pub fn log_negativity<T: Real>(state: &GaussianState<T>) -> Result<T> {
    require_two_modes(state)?;
    let mut pt = state.cov().clone();
    for i in 0..4 {
        pt[(3, i)] = -pt[(3, i)];
        pt[(i, 3)] = -pt[(i, 3)];
    }
    let nu = crate::gaussian::symplectic_eigenvalues(&pt)?[0];
    Ok((-(lit::<T>(2.0) * nu).ln()).max(T::zero()))
}

#[derive(Debug, Clone, Copy)]
pub struct GeofOptions<T> {
    /// Multistarts run before checking agreement.
    pub starts: usize,
    /// Agreement required between the two best starts.
    pub tolerance: T,
    /// Hard cap on multistarts when agreement is slow to appear.
    pub max_starts: usize,
    pub seed: u64,
}

impl<T: Real> Default for GeofOptions<T> {
    fn default() -> Self {
        Self {
            starts: 2,
            tolerance: lit(1e-9),
            max_starts: 10,
            seed: 0x6e0f,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeofSolution<T: Real> {
    /// Minimized characteristic value `q0^2`.
    pub value: T,
    /// Covariance of the optimal pure state.
    pub pure_cov: Matrix4<T>,
    /// `lambda_min(Gamma - Gamma_p)`; non-negative up to [`FEASIBILITY_TOL`].
    pub feasibility: T,
    /// Gap between the best and second-best start.
    pub spread: T,
    pub starts_used: usize,
    pub evaluations: usize,
}

fn lambda_min<T: Real>(m: &Matrix4<T>) -> T {
    let sym = (m + m.transpose()) * half::<T>();
    sym.symmetric_eigenvalues().iter().copied().fold(
        T::max_value().unwrap_or_else(|| lit(1e300)),
        |a, b| if b < a { b } else { a },
    )
}

/// Pure states sitting under `Gamma` and touching it along a plane.
///
/// Write `Gamma = S D S^T` (Williamson) and `H = D + i Omega / 2`. A pure
/// state below `D` is `D - L L^T` with `L` real `4 x 2`, `L^T Re(H^-1) L = I`
/// and `L^T Im(H^-1) L = 0`. In this frame `H^-1` is explicit: with
/// `tau = diag(sqrt(2 nu^2 - 1/2))` the admissible `L` are
/// `tau V (V^T diag(2 nu) V)^-1/2` for `V` an orthonormal basis of a
/// Lagrangian plane, and those planes form a compact three-parameter family.
/// Optimal pure states touch `Gamma` in two directions, so minimizing over
/// this family is smooth and reaches the optimum. Pure modes (`nu = 1/2`)
/// need no special care.
struct ContactPlanes<T: Real> {
    gamma: Matrix4<T>,
    williamson: Matrix4<T>,
    nu: [T; 2],
}

impl<T: Real> ContactPlanes<T> {
    fn new(state: &GaussianState<T>) -> Result<Self> {
        let (s, nu) = crate::gaussian::williamson(state.cov())?;
        let mut gamma = Matrix4::zeros();
        gamma.copy_from(state.cov());
        let mut williamson = Matrix4::zeros();
        williamson.copy_from(&s);
        Ok(Self {
            gamma,
            williamson,
            nu: [nu[0], nu[1]],
        })
    }

    /// Lagrangian plane from `[alpha, beta1, beta2]`: the columns of
    /// `R(alpha) diag(e^{i beta1}, e^{i beta2})` read as real vectors.
    fn pure_cov(&self, p: &[T]) -> Matrix4<T> {
        let (sa, ca) = p[0].sin_cos();
        let (s1, c1) = p[1].sin_cos();
        let (s2, c2) = p[2].sin_cos();
        let v = Matrix4x2::new(
            ca * c1,
            -sa * c2, //
            ca * s1,
            -sa * s2, //
            sa * c1,
            ca * c2, //
            sa * s1,
            ca * s2,
        );
        let two: T = lit(2.0);
        let d = |j: usize| self.nu[j / 2];
        let tau = |j: usize| (two * d(j) * d(j) - half::<T>()).max(T::zero()).sqrt();
        let mut weighted = v;
        for i in 0..4 {
            for k in 0..2 {
                weighted[(i, k)] *= two * d(i);
            }
        }
        let g = v.transpose() * weighted;
        let g_inv = g.try_inverse().unwrap_or_else(Matrix2::zeros);
        let w = v * g_inv * v.transpose();
        let mut pi = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                pi[(i, j)] = -tau(i) * w[(i, j)] * tau(j);
            }
            pi[(i, i)] += d(i);
        }
        let gp = self.williamson * pi * self.williamson.transpose();
        (gp + gp.transpose()) * half::<T>()
    }

    fn value(&self, p: &[T]) -> T {
        let gp = self.pure_cov(p);
        let det = gp[(0, 0)] * gp[(1, 1)] - gp[(0, 1)] * gp[(1, 0)];
        let root = lit::<T>(2.0) * det.max(lit(0.25)).sqrt();
        (root - T::one()) / (root + T::one())
    }

    fn solve(&self, opts: &GeofOptions<T>) -> Result<GeofSolution<T>> {
        const GRID: usize = 6;
        let cell = std::f64::consts::PI / GRID as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let shift: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..cell));
        let mut evaluations = 0;
        let mut seeds: Vec<(T, [T; 3])> = Vec::with_capacity(GRID * GRID * GRID);
        for i in 0..GRID {
            for j in 0..GRID {
                for k in 0..GRID {
                    let p = [
                        lit(shift[0] + cell * i as f64),
                        lit(shift[1] + cell * j as f64),
                        lit(shift[2] + cell * k as f64),
                    ];
                    seeds.push((self.value(&p), p));
                    evaluations += 1;
                }
            }
        }
        seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

        let nm = NelderMead::<T> {
            initial_step: lit(0.5 * cell),
            xtol: lit(1e-11),
            ftol: lit(1e-17),
            max_evals: 3_000,
            restarts: 2,
        };
        let min_starts = opts.starts.max(2);
        let max_starts = opts.max_starts.max(min_starts).min(seeds.len());
        let mut outcomes: Vec<(T, Vec<T>)> = Vec::new();
        let mut used = 0;
        let mut spread = T::max_value().unwrap_or_else(|| lit(1e300));
        while used < max_starts {
            let m = nm.minimize(|p| self.value(p), &seeds[used].1);
            used += 1;
            evaluations += m.evals;
            outcomes.push((m.value, m.x));
            outcomes.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
            if outcomes.len() >= 2 {
                spread = outcomes[1].0 - outcomes[0].0;
                if used >= min_starts && spread <= opts.tolerance {
                    break;
                }
            }
        }
        if spread > opts.tolerance * lit(10.0) {
            return Err(Error::Convergence(format!(
                "best starts disagree: {} vs {} (spread {:e}, tolerance {:e}, {used} starts)",
                outcomes[0].0,
                outcomes[1].0,
                to_f64(spread),
                to_f64(opts.tolerance)
            )));
        }
        let (value, params) = &outcomes[0];
        let pure_cov = self.pure_cov(params);
        Ok(GeofSolution {
            value: *value,
            feasibility: lambda_min(&(self.gamma - pure_cov)),
            pure_cov,
            spread,
            starts_used: used,
            evaluations,
        })
    }
}

/// Gaussian entanglement of formation as a characteristic value.
///
/// Minimizes the characteristic value over pure states that fit under the
/// covariance and touch it along a plane, a smooth three-angle family
/// built in the Williamson frame. A `6 x 6 x 6` angle grid seeds Nelder-Mead runs, best grid
/// points first; runs continue until the two best agree within
/// `tolerance` or `max_starts` is reached, and a final spread above
/// `10 * tolerance` is a convergence error.
pub fn geof_detailed<T: Real>(
    state: &GaussianState<T>,
    opts: &GeofOptions<T>,
) -> Result<GeofSolution<T>> {
    require_two_modes(state)?;
    ContactPlanes::new(state)?.solve(opts)
}

/// Gaussian entanglement of formation (characteristic value `q0^2`).
pub fn geof<T: Real>(state: &GaussianState<T>, opts: &GeofOptions<T>) -> Result<T> {
    geof_detailed(state, opts).map(|s| s.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Gaussian entanglement of formation, as a characteristic value.
    Geof,
    /// Closed-form `q^2` when the state is pure, otherwise [`Measure::Geof`].
    CharIfPure,
    /// Logarithmic negativity; not a characteristic value.
    LogNeg,
}

impl Measure {
    pub fn evaluate<T: Real>(&self, state: &GaussianState<T>, opts: &GeofOptions<T>) -> Result<T> {
        match self {
            Measure::Geof => geof(state, opts),
            Measure::LogNeg => log_negativity(state),
            Measure::CharIfPure => {
                if state.purity_deviation()? <= tol::<T>(PURITY_TOL) {
                    char_ent_pure(state)
                } else {
                    geof(state, opts)
                }
            }
        }
    }

    /// Whether values scale like `q^2` and may enter ratio tests.
    pub fn is_characteristic(&self) -> bool {
        !matches!(self, Measure::LogNeg)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Geof => "geof",
            Measure::CharIfPure => "char-if-pure",
            Measure::LogNeg => "log_neg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMethod {
    PureClosedForm,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport<T> {
    pub char_value: Option<T>,
    pub log_neg: T,
    pub geof_value: Option<T>,
    pub method: ReportMethod,
}

impl<T: Real> EntanglementReport<T> {
    /// Computes every measure that applies; a geof convergence failure
    /// leaves `geof_value` empty instead of failing the report.
    pub fn of(state: &GaussianState<T>, opts: &GeofOptions<T>) -> Result<Self> {
        require_two_modes(state)?;
        let pure = state.purity_deviation()? <= tol::<T>(PURITY_TOL);
        let char_value = if pure {
            Some(char_ent_pure(state)?)
        } else {
            None
        };
        let geof_value = match geof(state, opts) {
            Ok(v) => Some(v),
            Err(Error::Convergence(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            char_value,
            log_neg: log_negativity(state)?,
            geof_value,
            method: if pure {
                ReportMethod::PureClosedForm
            } else {
                ReportMethod::Numerical
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Ratio<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Output/input entanglement ratios for the inputs `|chi(q)>` and
/// `|chi(qb)>`, both pre-processed by `v` on mode 1 and sent through `map`.
pub fn theorem2_ratio<T: Real>(
    map: &OneSideMap<T>,
    v: &SymplecticOp<T>,
    q: T,
    qb: T,
    measure: Measure,
    opts: &GeofOptions<T>,
) -> Result<Theorem2Ratio<T>> {
    if !measure.is_characteristic() {
        return Err(Error::InvalidInput(
            "ratio tests need a characteristic-value measure (geof or char-if-pure)".into(),
        ));
    }
    let cap = T::one() - lit::<T>(Q_EPSILON);
    if !(q.abs() > T::zero() && q.abs() <= qb.abs() && qb.abs() <= cap) {
        return Err(Error::Domain(format!(
            "need 0 < |q| <= |qb| <= 1 - {Q_EPSILON}, got q = {q}, qb = {qb}"
        )));
    }
    let e_q = measure.evaluate(&map.transmit_tmss(q, v)?, opts)?;
    let e_qb = measure.evaluate(&map.transmit_tmss(qb, v)?, opts)?;
    if e_qb <= tol::<T>(1e-12) {
        return Err(Error::DegenerateChannel(format!(
            "output entanglement at qb = {qb} vanishes"
        )));
    }
    let lhs = e_q / e_qb;
    let rhs = q * q / (qb * qb);
    Ok(Theorem2Ratio {
        lhs,
        rhs,
        holds: lhs <= rhs + tol::<T>(RATIO_TOL),
    })
}
