//! Truncated Fock-space simulator, used as an independent check of the
//! covariance-matrix pipeline.
//!
//! Amplitudes live on occupations `0..=cutoff` per mode, mode 0 varying
//! slowest. Generators are exponentiated in a padded space (twice the
//! cutoff) and the result is cut back to `0..=cutoff`; the weight lost in
//! that cut is the reported tail mass.

use nalgebra::{Complex, DMatrix, DVector};

use crate::channels::QuadExpState;
use crate::error::{Error, Result};
use crate::gaussian::{partial_trace, GaussianState};
use crate::scalar::{half, lit, to_f64, Real};

/// Default ceiling on the tail mass before a truncation error is raised.
pub const TAIL_BOUND: f64 = 1e-6;
/// Tail ceiling for the fidelity checks. They compare two vectors inside
/// the same window, so a larger tail only means the window holds less of
/// the state; the comparison itself stays exact.
pub const CHECK_TAIL_BOUND: f64 = 0.1;
/// Infidelities below this are rounding noise.
pub const INFIDELITY_FLOOR: f64 = 1e-28;
/// Largest imaginary residue tolerated in extracted moments.
pub const IMAG_TOL: f64 = 1e-10;

type C<T> = Complex<T>;

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T: Real> {
    cutoff: usize,
    modes: usize,
    amps: Vec<C<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport<T> {
    pub cutoff: usize,
    /// Weight that left `0..=cutoff`, relative to the input norm.
    pub tail_mass: T,
    pub converged: bool,
}

impl<T: Real> TruncationReport<T> {
    fn new(cutoff: usize, tail_mass: T, bound: T) -> Self {
        let tail_mass = tail_mass.max(T::zero());
        Self {
            cutoff,
            tail_mass,
            converged: tail_mass < bound,
        }
    }

    fn check(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Truncation {
                cutoff: self.cutoff,
                tail_mass: to_f64(self.tail_mass),
                bound: TAIL_BOUND,
            })
        }
    }
}

impl<T: Real> FockVector<T> {
    pub fn zeros(modes: usize, cutoff: usize) -> Self {
        assert!(modes >= 1, "need at least one mode");
        let d = cutoff + 1;
        Self {
            cutoff,
            modes,
            amps: vec![C::new(T::zero(), T::zero()); d.pow(modes as u32)],
        }
    }

    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        Self::number_state(&vec![0; modes], cutoff)
    }

    pub fn number_state(occupations: &[usize], cutoff: usize) -> Self {
        let mut v = Self::zeros(occupations.len(), cutoff);
        let i = v.index(occupations);
        v.amps[i] = C::new(T::one(), T::zero());
        v
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.modes - 1 - mode) as u32)
    }

    pub fn index(&self, occupations: &[usize]) -> usize {
        assert_eq!(occupations.len(), self.modes);
        occupations.iter().fold(0, |acc, &n| {
            assert!(
                n <= self.cutoff,
                "occupation {n} above cutoff {}",
                self.cutoff
            );
            acc * (self.cutoff + 1) + n
        })
    }

    fn occupation(&self, flat: usize, mode: usize) -> usize {
        (flat / self.stride(mode)) % (self.cutoff + 1)
    }

    pub fn amplitude(&self, occupations: &[usize]) -> C<T> {
        self.amps[self.index(occupations)]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > T::zero()) {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        for a in &mut self.amps {
            *a = a.unscale(n);
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Product state; both factors must share the cutoff.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::InvalidInput(format!(
                "cutoffs differ: {} vs {}",
                self.cutoff, other.cutoff
            )));
        }
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self {
            cutoff: self.cutoff,
            modes: self.modes + other.modes,
            amps,
        })
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ModeIndex {
                index: mode,
                n_modes: self.modes,
            });
        }
        Ok(())
    }

    /// `a_mode |psi>`, exact on the truncated space.
    fn annihilate(&self, mode: usize) -> Self {
        let s = self.stride(mode);
        let mut out = Self::zeros(self.modes, self.cutoff);
        for (i, a) in self.amps.iter().enumerate() {
            let n = self.occupation(i, mode);
            if n > 0 {
                out.amps[i - s] = a.scale(lit::<T>(n as f64).sqrt());
            }
        }
        out
    }

    fn inner(&self, other: &Self) -> C<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(C::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b)
    }
}

/// Squeezed vacuum `sqrt(1 - q^2) sum_n q^n |n, n>`, truncated and not
/// renormalized; the report carries the exact tail `q^{2(N+1)}`.
pub fn tmss_fock<T: Real>(q: T, cutoff: usize) -> Result<(FockVector<T>, TruncationReport<T>)> {
    if !(q.abs() < T::one()) {
        return Err(Error::Domain(format!("need |q| < 1, got {q}")));
    }
    let mut v = FockVector::zeros(2, cutoff);
    let mut amp = (T::one() - q * q).sqrt();
    for n in 0..=cutoff {
        let i = v.index(&[n, n]);
        v.amps[i] = C::new(amp, T::zero());
        amp *= q;
    }
    let tail = (q * q).powi(cutoff as i32 + 1);
    Ok((v, TruncationReport::new(cutoff, tail, lit(TAIL_BOUND))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FockOp<T> {
    /// `exp(r (a^dag^2 - a^2))`.
    SqueezeR { r: T, mode: usize },
    /// `exp(-i theta n)`.
    Rotation { theta: T, mode: usize },
    /// `exp(theta (a_j a_k^dag - a_j^dag a_k))`.
    Beamsplitter { theta: T, j: usize, k: usize },
    /// `exp(beta a^dag - beta* a)`.
    Displacement { re: T, im: T, mode: usize },
}

fn single_mode_generator<T: Real>(op: &FockOp<T>, dim: usize) -> DMatrix<C<T>> {
    let zero = C::new(T::zero(), T::zero());
    let mut g = DMatrix::from_element(dim, dim, zero);
    match *op {
        FockOp::SqueezeR { r, .. } => {
            for n in 0..dim.saturating_sub(2) {
                let s = lit::<T>(((n + 1) * (n + 2)) as f64).sqrt() * r;
                g[(n + 2, n)] = C::new(s, T::zero());
                g[(n, n + 2)] = C::new(-s, T::zero());
            }
        }
        FockOp::Displacement { re, im, .. } => {
            let beta = C::new(re, im);
            for n in 0..dim.saturating_sub(1) {
                let s = lit::<T>((n + 1) as f64).sqrt();
                g[(n + 1, n)] = beta.scale(s);
                g[(n, n + 1)] = -beta.conj().scale(s);
            }
        }
        _ => unreachable!("not a padded single-mode generator"),
    }
    g
}

fn matvec<T: Real>(m: &DMatrix<C<T>>, v: &[C<T>]) -> Vec<C<T>> {
    let x = DVector::from_column_slice(v);
    (m * x).iter().copied().collect()
}

fn apply_single_mode<T: Real>(
    state: &FockVector<T>,
    op: &FockOp<T>,
    mode: usize,
) -> (FockVector<T>, T) {
    let d = state.cutoff + 1;
    let s = state.stride(mode);
    let mut out = FockVector::zeros(state.modes, state.cutoff);
    if let FockOp::Rotation { theta, .. } = *op {
        for (i, a) in state.amps.iter().enumerate() {
            let phase = -theta * lit::<T>(state.occupation(i, mode) as f64);
            out.amps[i] = a * C::new(phase.cos(), phase.sin());
        }
        return (out, T::zero());
    }
    let padded = d + d.max(16);
    let u = single_mode_generator(op, padded).exp();
    let mut tail = T::zero();
    for base in 0..state.amps.len() {
        if state.occupation(base, mode) != 0 {
            continue;
        }
        let mut line: Vec<C<T>> = (0..d).map(|n| state.amps[base + n * s]).collect();
        line.resize(padded, C::new(T::zero(), T::zero()));
        let evolved = matvec(&u, &line);
        for (n, a) in evolved[..d].iter().enumerate() {
            out.amps[base + n * s] = *a;
        }
        tail += evolved[d..]
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr());
    }
    (out, tail)
}

/// Exponential of the beamsplitter generator restricted to total number
/// `n` (where it is exact), basis `|m, n - m>` for `m` in `lo..=hi`.
fn beamsplitter_block<T: Real>(theta: T, n: usize, lo: usize, hi: usize) -> DMatrix<T> {
    let dim = hi - lo + 1;
    let mut g = DMatrix::zeros(dim, dim);
    for m in lo..=hi {
        let col = m - lo;
        if m > lo {
            // a_j a_k^dag |m, n-m> = sqrt(m (n-m+1)) |m-1, n-m+1>
            g[(col - 1, col)] += theta * lit::<T>((m * (n - m + 1)) as f64).sqrt();
        }
        if m < hi {
            // a_j^dag a_k |m, n-m> = sqrt((m+1)(n-m)) |m+1, n-m-1>
            g[(col + 1, col)] -= theta * lit::<T>(((m + 1) * (n - m)) as f64).sqrt();
        }
    }
    g.exp()
}

fn apply_beamsplitter<T: Real>(
    state: &FockVector<T>,
    theta: T,
    j: usize,
    k: usize,
) -> (FockVector<T>, T) {
    let cut = state.cutoff;
    let (sj, sk) = (state.stride(j), state.stride(k));
    let mut out = FockVector::zeros(state.modes, cut);
    let mut tail = T::zero();
    let blocks: Vec<_> = (0..=2 * cut)
        .map(|n| {
            let lo = n.saturating_sub(cut);
            let hi = n.min(cut);
            (lo, hi, beamsplitter_block(theta, n, 0, n))
        })
        .collect();
    for base in 0..state.amps.len() {
        if state.occupation(base, j) != 0 || state.occupation(base, k) != 0 {
            continue;
        }
        for (n, (lo, hi, block)) in blocks.iter().enumerate() {
            let line: Vec<C<T>> = (*lo..=*hi)
                .map(|m| state.amps[base + m * sj + (n - m) * sk])
                .collect();
            for m in 0..=n {
                let mut acc = C::new(T::zero(), T::zero());
                for (col, a) in line.iter().enumerate() {
                    acc += a.scale(block[(m, lo + col)]);
                }
                if m < *lo || m > *hi {
                    tail += acc.norm_sqr();
                } else {
                    out.amps[base + m * sj + (n - m) * sk] = acc;
                }
            }
        }
    }
    (out, tail)
}

/// Applies `exp(G)` for an anti-Hermitian generator, cuts the result back
/// to the cutoff, renormalizes, and reports the weight lost in the cut.
pub fn apply_generator_exp<T: Real>(
    state: &FockVector<T>,
    op: FockOp<T>,
    tail_bound: T,
) -> Result<(FockVector<T>, TruncationReport<T>)> {
    let norm2 = state.norm_sqr();
    let (out, tail) = match op {
        FockOp::SqueezeR { mode, .. }
        | FockOp::Rotation { mode, .. }
        | FockOp::Displacement { mode, .. } => {
            state.check_mode(mode)?;
            apply_single_mode(state, &op, mode)
        }
        FockOp::Beamsplitter { theta, j, k } => {
            state.check_mode(j)?;
            state.check_mode(k)?;
            if j == k {
                return Err(Error::InvalidInput(
                    "beamsplitter needs two distinct modes".into(),
                ));
            }
            apply_beamsplitter(state, theta, j, k)
        }
    };
    let report = TruncationReport::new(state.cutoff, tail / norm2, tail_bound);
    if !report.converged {
        return Err(Error::Truncation {
            cutoff: state.cutoff,
            tail_mass: to_f64(report.tail_mass),
            bound: to_f64(tail_bound),
        });
    }
    Ok((out.normalized()?, report))
}

/// Multiplies the amplitude at occupation `n` of `mode` by `q^n` and
/// renormalizes.
pub fn filter_fock<T: Real>(state: &FockVector<T>, q: T, mode: usize) -> Result<FockVector<T>> {
    state.check_mode(mode)?;
    if !(q > T::zero() && q <= T::one()) {
        return Err(Error::Domain(format!("filter needs 0 < q <= 1, got {q}")));
    }
    let mut out = state.clone();
    for (i, a) in out.amps.iter_mut().enumerate() {
        *a = a.scale(q.powi(state.occupation(i, mode) as i32));
    }
    out.normalized()
}

/// Mean vector and covariance, from `<a_k>`, `<a_k a_l>` and
/// `<a_k^dag a_l>`; every moment uses annihilation operators only and is
/// exact for the truncated vector.
pub fn cm_from_fock<T: Real>(state: &FockVector<T>) -> Result<GaussianState<T>> {
    let psi = state.clone().normalized()?;
    let m = psi.modes;
    let a: Vec<FockVector<T>> = (0..m).map(|k| psi.annihilate(k)).collect();
    let alpha: Vec<C<T>> = a.iter().map(|ak| psi.inner(ak)).collect();
    let zero = C::new(T::zero(), T::zero());
    let mut aa = vec![vec![zero; m]; m];
    let mut ad_a = vec![vec![zero; m]; m];
    for k in 0..m {
        for l in 0..m {
            aa[k][l] = psi.inner(&a[l].annihilate(k));
            ad_a[k][l] = a[k].inner(&a[l]);
        }
    }
    let r2 = half::<T>().sqrt();
    // Q = u a + conj(u) a^dag with u = 1/sqrt2 (x) or -i/sqrt2 (p).
    let coef = |i: usize| {
        if i % 2 == 0 {
            C::new(r2, T::zero())
        } else {
            C::new(T::zero(), -r2)
        }
    };
    let second = |i: usize, j: usize| -> C<T> {
        let (k, l) = (i / 2, j / 2);
        let (u, v) = (coef(i), coef(j));
        let delta = if k == l { T::one() } else { T::zero() };
        u * v * aa[k][l]
            + u * v.conj() * (ad_a[l][k] + C::new(delta, T::zero()))
            + u.conj() * v * ad_a[k][l]
            + u.conj() * v.conj() * aa[l][k].conj()
    };
    let dim = 2 * m;
    let mut mean = DVector::zeros(dim);
    let mut worst = T::zero();
    for k in 0..m {
        mean[2 * k] = lit::<T>(2.0).sqrt() * alpha[k].re;
        mean[2 * k + 1] = lit::<T>(2.0).sqrt() * alpha[k].im;
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let sym = (second(i, j) + second(j, i)) * C::new(half::<T>(), T::zero());
            worst = worst.max(sym.im.abs());
            cov[(i, j)] = sym.re - mean[i] * mean[j];
        }
    }
    if worst > lit(IMAG_TOL) {
        return Err(Error::NumericalConsistency(format!(
            "imaginary residue {:e} in symmetrized moments",
            to_f64(worst)
        )));
    }
    GaussianState::new(mean, cov)
}

/// Applies `exp(P)` to `|0...0>` for a creation-only polynomial `P`, given
/// as a list of `(coefficient, mode, mode)` quadratic terms. Every term of
/// the power series raises the photon number, so the truncated result is
/// exact and the series ends after `cutoff + 1` terms.
fn exp_creation_quadratic<T: Real>(
    terms: &[(T, usize, usize)],
    modes: usize,
    cutoff: usize,
) -> FockVector<T> {
    let mut sum = FockVector::vacuum(modes, cutoff);
    let mut term = sum.clone();
    for k in 1..=cutoff + 1 {
        let mut next = FockVector::zeros(modes, cutoff);
        for &(c, m1, m2) in terms {
            let raised = create(&create(&term, m2), m1);
            for (n, r) in next.amps.iter_mut().zip(&raised.amps) {
                *n += r.scale(c);
            }
        }
        let inv_k = T::one() / lit::<T>(k as f64);
        for a in &mut next.amps {
            *a = a.scale(inv_k);
        }
        for (s, t) in sum.amps.iter_mut().zip(&next.amps) {
            *s += t;
        }
        if next.norm_sqr() == T::zero() {
            break;
        }
        term = next;
    }
    sum
}

/// `a^dag_mode |psi>` with components beyond the cutoff dropped.
fn create<T: Real>(state: &FockVector<T>, mode: usize) -> FockVector<T> {
    let s = state.stride(mode);
    let mut out = FockVector::zeros(state.modes, state.cutoff);
    for (i, a) in state.amps.iter().enumerate() {
        let n = state.occupation(i, mode);
        if n < state.cutoff {
            out.amps[i + s] = a.scale(lit::<T>((n + 1) as f64).sqrt());
        }
    }
    out
}

/// `exp(f1 a0^dag^2 + f2 a1^dag^2 + f3 a0^dag a1^dag)|00>`, unnormalized.
pub fn quadexp_fock<T: Real>(s: &QuadExpState<T>, cutoff: usize) -> FockVector<T> {
    exp_creation_quadratic(&[(s.f1, 0, 0), (s.f2, 1, 1), (s.f3, 0, 1)], 2, cutoff)
}

/// `(cosh 2r)^{-1/2} exp(tanh(2r) a^dag^2 / 2)|0>`, unnormalized.
pub fn normal_ordered_squeezed_vacuum<T: Real>(r: T, cutoff: usize) -> FockVector<T> {
    let two_r = lit::<T>(2.0) * r;
    let mut v = exp_creation_quadratic(&[(half::<T>() * two_r.tanh(), 0, 0)], 1, cutoff);
    let pre = two_r.cosh().sqrt().recip();
    for a in &mut v.amps {
        *a = a.scale(pre);
    }
    v
}

/// Whether infidelities measured at increasing cutoffs never get worse,
/// treating everything under [`INFIDELITY_FLOOR`] as converged.
pub fn improves_with_cutoff<T: Real>(checks: &[FidelityCheck<T>]) -> bool {
    checks
        .windows(2)
        .all(|w| w[1].infidelity <= w[0].infidelity.max(lit(INFIDELITY_FLOOR)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityCheck<T> {
    pub fidelity: T,
    /// `1 - fidelity`, computed from the distance between the phase-aligned
    /// vectors so that it stays resolvable far below machine epsilon.
    pub infidelity: T,
    pub tail_mass: T,
}

fn compare<T: Real>(
    a: &FockVector<T>,
    b: &FockVector<T>,
    tail_mass: T,
) -> Result<FidelityCheck<T>> {
    let a = a.clone().normalized()?;
    let b = b.clone().normalized()?;
    let ov = b.inner(&a);
    let phase = if ov.norm_sqr().sqrt() > T::zero() {
        ov.unscale(ov.norm_sqr().sqrt())
    } else {
        C::new(T::one(), T::zero())
    };
    let d2 = a
        .amps
        .iter()
        .zip(&b.amps)
        .fold(T::zero(), |s, (x, y)| s + (x - phase * y).norm_sqr());
    let overlap = T::one() - half::<T>() * d2;
    Ok(FidelityCheck {
        fidelity: overlap * overlap,
        infidelity: d2 - d2 * d2 * lit(0.25),
        tail_mass,
    })
}

/// Squeezing mode 1 of `|chi(q0)>` by generator exponential against the
/// normal-ordered exponential with coefficients `filtered_coeffs(q0, r, 1)`.
pub fn check_tt0<T: Real>(q0: T, r: T, cutoff: usize) -> Result<FidelityCheck<T>> {
    let (chi, _) = tmss_fock(q0, cutoff)?;
    let (direct, rep) = apply_generator_exp(
        &chi.normalized()?,
        FockOp::SqueezeR { r, mode: 1 },
        lit(CHECK_TAIL_BOUND),
    )?;
    let coeffs = crate::channels::filtered_coeffs(q0, r, T::one())?;
    compare(&direct, &quadexp_fock(&coeffs, cutoff), rep.tail_mass)
}

/// `S(r)|0>` by generator exponential against its normal-ordered form.
pub fn check_normal_ordered_squeeze<T: Real>(r: T, cutoff: usize) -> Result<FidelityCheck<T>> {
    let (direct, rep) = apply_generator_exp(
        &FockVector::vacuum(1, cutoff),
        FockOp::SqueezeR { r, mode: 0 },
        lit(CHECK_TAIL_BOUND),
    )?;
    compare(
        &direct,
        &normal_ordered_squeezed_vacuum(r, cutoff),
        rep.tail_mass,
    )
}

/// Brute-force output of the beamsplitter channel on mode 1 of `|chi(q)>`.
///
/// The environment is a thermal state of covariance `b3 I` (a mixture of
/// number states, cut once the discarded weight drops below `weight_tail`)
/// squeezed by `S~(u3)`, mixed in on a beamsplitter of angle `theta`, then
/// traced out.
pub fn beamsplitter_channel_oracle<T: Real>(
    q: T,
    theta: T,
    u3: T,
    b3: T,
    cutoff: usize,
    weight_tail: T,
) -> Result<GaussianState<T>> {
    if !(b3 >= half::<T>() && u3 > T::zero()) {
        return Err(Error::Domain(format!(
            "need b3 >= 1/2 and u3 > 0, got {b3}, {u3}"
        )));
    }
    if cutoff > 40 {
        return Err(Error::InvalidInput(
            "three-mode oracle is limited to cutoff 40".into(),
        ));
    }
    let nbar = b3 - half::<T>();
    let ratio = nbar / (nbar + T::one());
    let (chi, rep) = tmss_fock(q, cutoff)?;
    rep.check()?;
    let chi = chi.normalized()?;
    let r = u3.ln() * half::<T>();

    let dim = 6;
    let mut second = DMatrix::<T>::zeros(dim, dim);
    let mut mean = DVector::<T>::zeros(dim);
    let mut kept = T::zero();
    let mut lost = T::zero();
    let mut weight = T::one() - ratio;
    for n in 0..=cutoff {
        // Per-member tails are judged after weighting, below.
        let env = FockVector::number_state(&[n], cutoff);
        let (env, t1) =
            apply_generator_exp(&env, FockOp::SqueezeR { r, mode: 0 }, T::one() + T::one())?;
        let joint = chi.tensor(&env)?;
        let (out, t2) = apply_generator_exp(
            &joint,
            FockOp::Beamsplitter { theta, j: 1, k: 2 },
            T::one() + T::one(),
        )?;
        lost += weight * (t1.tail_mass + t2.tail_mass);
        let g = cm_from_fock(&out)?;
        second += (g.cov() + g.mean() * g.mean().transpose()) * weight;
        mean += g.mean() * weight;
        kept += weight;
        if T::one() - kept < weight_tail || ratio == T::zero() {
            break;
        }
        weight *= ratio;
    }
    if T::one() - kept >= weight_tail && ratio > T::zero() {
        return Err(Error::Truncation {
            cutoff,
            tail_mass: to_f64(T::one() - kept),
            bound: to_f64(weight_tail),
        });
    }
    if lost >= lit(TAIL_BOUND) {
        return Err(Error::Truncation {
            cutoff,
            tail_mass: to_f64(lost),
            bound: TAIL_BOUND,
        });
    }
    second /= kept;
    mean /= kept;
    let cov = second - &mean * mean.transpose();
    partial_trace(&GaussianState::new(mean, cov)?, &[0, 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{apply_symplectic, tmss_state, SymplecticOp};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn tmss_amplitudes_and_tail() {
        let (v, rep) = tmss_fock(0.5_f64, 20).unwrap();
        assert_abs_diff_eq!(rep.tail_mass, 0.25_f64.powi(21), epsilon = 1e-28);
        assert!(rep.converged);
        assert_abs_diff_eq!(v.norm(), (1.0 - 0.25_f64.powi(21)).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            v.amplitude(&[3, 3]).re,
            0.75_f64.sqrt() * 0.125,
            epsilon = 1e-16
        );
        assert_eq!(v.amplitude(&[3, 2]).norm(), 0.0);
        let (v0, _) = tmss_fock(0.0_f64, 5).unwrap();
        assert_eq!(v0, FockVector::vacuum(2, 5));
    }

    #[test]
    fn vacuum_moments() {
        let g = cm_from_fock(&FockVector::<f64>::vacuum(2, 4)).unwrap();
        assert!((g.cov() - DMatrix::identity(4, 4) * 0.5).amax() < 1e-15);
    }

    #[test]
    fn tmss_moments_match_covariance() {
        let (v, _) = tmss_fock(0.5_f64, 40).unwrap();
        let g = cm_from_fock(&v).unwrap();
        assert!((g.cov() - tmss_state(0.5).unwrap().cov()).amax() < 1e-8);
    }

    #[test]
    fn squeeze_generator_matches_phase_space() {
        let (v, rep) = apply_generator_exp(
            &FockVector::vacuum(1, 40),
            FockOp::SqueezeR {
                r: 0.3_f64,
                mode: 0,
            },
            1e-6,
        )
        .unwrap();
        assert!(rep.tail_mass < 1e-8);
        let g = cm_from_fock(&v).unwrap();
        let expect = apply_symplectic(
            &GaussianState::vacuum(1),
            &SymplecticOp::squeeze_u(0.6_f64.exp()).unwrap(),
        )
        .unwrap();
        assert!((g.cov() - expect.cov()).amax() < 1e-8, "{}", g.cov());
        let (same, _) = apply_generator_exp(
            &FockVector::vacuum(1, 10),
            FockOp::SqueezeR { r: 0.0, mode: 0 },
            1e-6,
        )
        .unwrap();
        assert_eq!(same, FockVector::vacuum(1, 10));
    }

    #[test]
    fn rotation_and_beamsplitter_match_phase_space() {
        let (sq, _) = apply_generator_exp(
            &FockVector::vacuum(2, 30),
            FockOp::SqueezeR {
                r: 0.2_f64,
                mode: 0,
            },
            1e-6,
        )
        .unwrap();
        let (disp, _) = apply_generator_exp(
            &sq,
            FockOp::Displacement {
                re: 0.3,
                im: -0.2,
                mode: 1,
            },
            1e-6,
        )
        .unwrap();
        let base = cm_from_fock(&disp).unwrap();
        let (rot, _) = apply_generator_exp(
            &disp,
            FockOp::Rotation {
                theta: 0.7,
                mode: 0,
            },
            1e-6,
        )
        .unwrap();
        let expect =
            apply_symplectic(&base, &SymplecticOp::rotation(0.7).embed(0, 2).unwrap()).unwrap();
        let got = cm_from_fock(&rot).unwrap();
        assert!((got.cov() - expect.cov()).amax() < 1e-10);
        assert!((got.mean() - expect.mean()).amax() < 1e-10);
        let (bs, _) = apply_generator_exp(
            &disp,
            FockOp::Beamsplitter {
                theta: 0.4,
                j: 0,
                k: 1,
            },
            1e-6,
        )
        .unwrap();
        let expect =
            apply_symplectic(&base, &SymplecticOp::beamsplitter(0.4, 0, 1, 2).unwrap()).unwrap();
        let got = cm_from_fock(&bs).unwrap();
        assert!(
            (got.cov() - expect.cov()).amax() < 1e-9,
            "{}\n{}",
            got.cov(),
            expect.cov()
        );
        assert!(
            (got.mean() - expect.mean()).amax() < 1e-9,
            "{}\n{}",
            got.mean(),
            expect.mean()
        );
    }

    #[test]
    fn full_swap() {
        let v = FockVector::<f64>::number_state(&[2, 0], 6);
        let (s, _) = apply_generator_exp(
            &v,
            FockOp::Beamsplitter {
                theta: PI / 2.0,
                j: 0,
                k: 1,
            },
            1e-6,
        )
        .unwrap();
        assert_abs_diff_eq!(s.amplitude(&[0, 2]).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn generator_preserves_norm_up_to_tail() {
        let (v, _) = tmss_fock(0.6_f64, 12).unwrap();
        let v = v.normalized().unwrap();
        let err = apply_generator_exp(&v, FockOp::SqueezeR { r: 0.5, mode: 1 }, 1e-12);
        assert!(matches!(err, Err(Error::Truncation { .. })));
        let (_, rep) = apply_generator_exp(&v, FockOp::SqueezeR { r: 0.5, mode: 1 }, 1.0).unwrap();
        assert!(rep.tail_mass > 1e-6 && rep.tail_mass < 1.0);
    }

    #[test]
    fn filter_realizes_product_rule() {
        let (v, _) = tmss_fock(0.5_f64, 30).unwrap();
        let f = filter_fock(&v, 0.5, 0).unwrap();
        let (t, _) = tmss_fock(0.25_f64, 30).unwrap();
        let t = t.normalized().unwrap();
        for (a, b) in f.amplitudes().iter().zip(t.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let vac = FockVector::<f64>::vacuum(2, 5);
        assert_eq!(filter_fock(&vac, 0.3, 1).unwrap(), vac);
        assert_eq!(
            filter_fock(&v, 1.0, 1).unwrap(),
            v.clone().normalized().unwrap()
        );
        assert!(filter_fock(&v, 0.0, 1).is_err());
    }

    #[test]
    fn normal_ordered_norm() {
        // |exp(t a^dag^2 / 2)|0>|^2 = (1 - t^2)^{-1/2}, cancelled by the prefactor.
        let v = normal_ordered_squeezed_vacuum(0.3_f64, 60);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn appendix_identities() {
        let f = check_tt0(0.5_f64, 0.0, 10).unwrap();
        assert!(f.infidelity < 1e-28, "{f:?}");
        let f = check_normal_ordered_squeeze(0.0_f64, 10).unwrap();
        assert!(f.infidelity < 1e-28);
        assert!(check_tt0(0.5_f64, 0.3, 30).unwrap().fidelity > 1.0 - 1e-8);
        assert!(check_normal_ordered_squeeze(0.3_f64, 30).unwrap().fidelity > 1.0 - 1e-8);
        let runs: Vec<_> = [20, 30, 40]
            .iter()
            .map(|&n| check_tt0(0.7_f64, 0.5, n).unwrap())
            .collect();
        assert!(runs[2].fidelity > 1.0 - 1e-6, "{runs:?}");
        assert!(improves_with_cutoff(&runs));
    }

    #[test]
    fn three_mode_oracle_small() {
        let g = beamsplitter_channel_oracle(0.3_f64, PI / 2.0, 1.0, 0.5, 8, 1e-12).unwrap();
        // Full swap with vacuum: output is vacuum on mode 1, thermal on 0.
        assert_abs_diff_eq!(g.cov()[(2, 2)], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(g.cov()[(0, 2)], 0.0, epsilon = 1e-10);
    }
}
