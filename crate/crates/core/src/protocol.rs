//! Channel probing, pre-processing search and entanglement sweeps.
//!
//! Every routine here sends `|chi(q)>` through `V` then a one-side map on
//! mode 1 and measures what comes out. Grid points are evaluated in
//! parallel and reassembled in grid order, so results do not depend on
//! scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::OneSideMap;
use crate::entanglement::{log_negativity, GeofOptions, Measure, Q_EPSILON};
use crate::error::{Error, Result};
use crate::gaussian::{euler_decompose, EulerAngles, SymplecticOp};
use crate::nelder_mead::NelderMead;
use crate::scalar::{lit, to_f64, tol, Real};

/// Default slack on the probe's ratio gap.
pub const PROBE_TOL: f64 = 1e-4;
/// Values closer than this count as ties in the optimizer.
pub const TIE_TOL: f64 = 1e-9;
/// Entanglement at or below this is treated as none.
pub const ZERO_ENTANGLEMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equality,
    StrictInequality,
    /// The output ratio exceeds the input ratio: an internal bug alarm.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport<T> {
    pub q: T,
    pub qb: T,
    pub lhs_ratio: T,
    pub rhs_ratio: T,
    /// `rhs_ratio - lhs_ratio`.
    pub gap: T,
    pub verdict: Verdict,
    pub tolerance: T,
    pub measure: Measure,
    pub e_q: T,
    pub e_qb: T,
    /// Log-negativities of both outputs, for diagnostics only.
    pub log_neg_q: T,
    pub log_neg_qb: T,
}

/// Two-state probe: compares `E(out(q)) / E(out(qb))` with `q^2 / qb^2`.
///
/// Equality means `V` already achieves the best distribution the channel
/// allows; a positive gap beyond `tolerance` means some other `V` does
/// better.
pub fn probe_channel<T: Real>(
    map: &OneSideMap<T>,
    v: &SymplecticOp<T>,
    q: T,
    qb: T,
    tolerance: T,
    measure: Measure,
    opts: &GeofOptions<T>,
) -> Result<ProbeReport<T>> {
    if !measure.is_characteristic() {
        return Err(Error::InvalidInput(
            "the probe compares characteristic values; use geof or char-if-pure".into(),
        ));
    }
    let cap = T::one() - lit::<T>(Q_EPSILON);
    if !(q > T::zero() && q < qb && qb <= cap) {
        return Err(Error::Domain(format!(
            "probe needs 0 < q < qb <= 1 - {Q_EPSILON}, got q = {q}, qb = {qb}"
        )));
    }
    if !(tolerance >= T::zero()) {
        return Err(Error::Domain(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    let out_q = map.transmit_tmss(q, v)?;
    let out_qb = map.transmit_tmss(qb, v)?;
    let e_q = measure.evaluate(&out_q, opts)?;
    let e_qb = measure.evaluate(&out_qb, opts)?;
    if e_qb <= lit(ZERO_ENTANGLEMENT) {
        return Err(Error::DegenerateChannel(format!(
            "no output entanglement at qb = {qb}"
        )));
    }
    let lhs_ratio = e_q / e_qb;
    let rhs_ratio = q * q / (qb * qb);
    let gap = rhs_ratio - lhs_ratio;
    let verdict = if gap.abs() <= tolerance {
        Verdict::Equality
    } else if gap > tolerance {
        Verdict::StrictInequality
    } else {
        Verdict::Violation
    };
    Ok(ProbeReport {
        q,
        qb,
        lhs_ratio,
        rhs_ratio,
        gap,
        verdict,
        tolerance,
        measure,
        e_q,
        e_qb,
        log_neg_q: log_negativity(&out_q)?,
        log_neg_qb: log_negativity(&out_qb)?,
    })
}

/// Grid of single-mode squeezers `S~(u)`, `u = u_min + i * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UGrid<T> {
    pub u_min: T,
    pub u_max: T,
    pub step: T,
}

impl<T: Real> UGrid<T> {
    pub fn new(u_min: T, u_max: T, step: T) -> Result<Self> {
        if !(u_min > T::zero() && u_max >= u_min && step > T::zero()) {
            return Err(Error::Domain(format!(
                "grid needs 0 < u_min <= u_max and step > 0, got [{u_min}, {u_max}] step {step}"
            )));
        }
        let g = Self { u_min, u_max, step };
        if g.len() > 1_000_000 {
            return Err(Error::Domain("grid has more than 10^6 points".into()));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        let span = to_f64((self.u_max - self.u_min) / self.step);
        (span + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points computed by multiplication, so that e.g. `1 + 40 * 0.05`
    /// lands on 3 rather than accumulating rounding.
    pub fn points(&self) -> Vec<T> {
        (0..self.len())
            .map(|i| self.u_min + lit::<T>(i as f64) * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeasureSet {
    pub log_neg: bool,
    pub geof: bool,
}

impl MeasureSet {
    pub const BOTH: Self = Self {
        log_neg: true,
        geof: true,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub u2: T,
    pub log_neg: Option<T>,
    /// Characteristic-value entanglement: closed form on pure outputs,
    /// numerical Gaussian EoF otherwise.
    pub geof: Option<T>,
    /// Why `geof` is missing although it was requested.
    pub geof_error: Option<String>,
}

/// What the sweep was run on, echoed into the result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MapEcho<T> {
    Gaussian { x: [[T; 2]; 2], y: [[T; 2]; 2] },
    Filter { q: T },
}

impl<T: Real> MapEcho<T> {
    pub fn of(map: &OneSideMap<T>) -> Self {
        match map {
            OneSideMap::Gaussian(ch) => {
                let (x, y) = (ch.x(), ch.y());
                MapEcho::Gaussian {
                    x: [[x[(0, 0)], x[(0, 1)]], [x[(1, 0)], x[(1, 1)]]],
                    y: [[y[(0, 0)], y[(0, 1)]], [y[(1, 0)], y[(1, 1)]]],
                }
            }
            OneSideMap::Filter(f) => MapEcho::Filter { q: f.q() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult<T> {
    pub map: MapEcho<T>,
    pub q_prime: T,
    pub grid: UGrid<T>,
    pub rows: Vec<SweepRow<T>>,
    pub argmax_log_neg: Option<T>,
    pub argmax_geof: Option<T>,
}

/// Argmax with ties inside [`TIE_TOL`] resolved towards `|ln u|` minimal.
fn argmax_least_squeezing<T: Real>(points: impl Iterator<Item = (T, T)> + Clone) -> Option<(T, T)> {
    let best = points
        .clone()
        .map(|(_, e)| e)
        .fold(None, |m: Option<T>, e| Some(m.map_or(e, |m| m.max(e))))?;
    points
        .filter(|(_, e)| *e >= best - lit(TIE_TOL))
        .fold(None, |acc: Option<(T, T)>, (u, e)| match acc {
            Some((bu, _)) if bu.ln().abs() <= u.ln().abs() => acc,
            _ => Some((u, e)),
        })
}

fn squeezer<T: Real>(u: T) -> Result<SymplecticOp<T>> {
    SymplecticOp::squeeze_u(u)
}

fn check_q_prime<T: Real>(q_prime: T) -> Result<()> {
    let cap = T::one() - lit::<T>(Q_EPSILON);
    if !(q_prime > T::zero() && q_prime < cap) {
        return Err(Error::Domain(format!(
            "need 0 < q' < 1 - {Q_EPSILON}, got {q_prime}"
        )));
    }
    Ok(())
}

/// Entanglement of the output for `V = S~(u)` on every grid point.
///
/// A geof convergence failure only blanks that cell.
pub fn sweep_entanglement<T: Real>(
    map: &OneSideMap<T>,
    q_prime: T,
    grid: &UGrid<T>,
    measures: MeasureSet,
    opts: &GeofOptions<T>,
) -> Result<SweepResult<T>> {
    check_q_prime(q_prime)?;
    let points = grid.points();
    let rows: Vec<SweepRow<T>> = points
        .par_iter()
        .map(|&u| -> Result<SweepRow<T>> {
            let out = map.transmit_tmss(q_prime, &squeezer(u)?)?;
            let log_neg = if measures.log_neg {
                Some(log_negativity(&out)?)
            } else {
                None
            };
            let (geof, geof_error) = if measures.geof {
                match Measure::CharIfPure.evaluate(&out, opts) {
                    Ok(v) => (Some(v), None),
                    Err(Error::Convergence(msg)) => (None, Some(msg)),
                    Err(e) => return Err(e),
                }
            } else {
                (None, None)
            };
            Ok(SweepRow {
                u2: u,
                log_neg,
                geof,
                geof_error,
            })
        })
        .collect::<Result<_>>()?;
    let argmax = |f: fn(&SweepRow<T>) -> Option<T>| {
        argmax_least_squeezing(rows.iter().filter_map(move |r| f(r).map(|e| (r.u2, e))))
            .map(|(u, _)| u)
    };
    let argmax_log_neg = argmax(|r| r.log_neg);
    let argmax_geof = argmax(|r| r.geof);
    Ok(SweepResult {
        map: MapEcho::of(map),
        q_prime,
        grid: *grid,
        rows,
        argmax_log_neg,
        argmax_geof,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchMode<T> {
    /// `V = S~(u)` over the grid only.
    UGrid(UGrid<T>),
    /// Grid first, then a local search over all three Euler angles of `V`
    /// started from the grid optimum.
    FullEuler { grid: UGrid<T>, max_evals: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum<T: Real> {
    /// Best grid point; also the answer unless the Euler pass improved it.
    pub u_star: T,
    pub e_star: T,
    /// Set when the Euler refinement beat the grid by more than the tie
    /// tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<EulerAngles<T>>,
    pub measure: Measure,
    pub trace: SweepResult<T>,
    #[serde(skip)]
    pub v_star: SymplecticOp<T>,
}

/// Pre-processing `V` maximizing output entanglement for input `|chi(q')>`.
pub fn optimize_preprocessing<T: Real>(
    map: &OneSideMap<T>,
    q_prime: T,
    search: SearchMode<T>,
    measure: Measure,
    opts: &GeofOptions<T>,
) -> Result<Optimum<T>> {
    let grid = match search {
        SearchMode::UGrid(g) => g,
        SearchMode::FullEuler { grid, .. } => grid,
    };
    let measures = match measure {
        Measure::LogNeg => MeasureSet {
            log_neg: true,
            geof: false,
        },
        _ => MeasureSet {
            log_neg: false,
            geof: true,
        },
    };
    let trace = sweep_entanglement(map, q_prime, &grid, measures, opts)?;
    let pick = |r: &SweepRow<T>| {
        if measure == Measure::LogNeg {
            r.log_neg
        } else {
            r.geof
        }
    };
    let (u_star, e_star) =
        argmax_least_squeezing(trace.rows.iter().filter_map(|r| pick(r).map(|e| (r.u2, e))))
            .ok_or_else(|| Error::Convergence("no grid point produced a value".into()))?;
    if e_star <= lit(ZERO_ENTANGLEMENT) {
        return Err(Error::DegenerateChannel(
            "output entanglement vanishes on the whole grid".into(),
        ));
    }
    let mut best = Optimum {
        u_star,
        e_star,
        refined: None,
        measure,
        trace,
        v_star: squeezer(u_star)?,
    };
    if let SearchMode::FullEuler { max_evals, .. } = search {
        let evaluate = |p: &[T]| -> T {
            let v = SymplecticOp::from_euler(EulerAngles {
                theta_out: p[0],
                r: p[1],
                theta_in: p[2],
            });
            map.transmit_tmss(q_prime, &v)
                .and_then(|out| measure.evaluate(&out, opts))
                .map(|e| -e)
                .unwrap_or_else(|_| T::max_value().unwrap_or_else(|| lit(1e300)))
        };
        let nm = NelderMead::<T> {
            initial_step: lit(0.1),
            xtol: lit(1e-8),
            ftol: lit(1e-12),
            max_evals,
            restarts: 1,
        };
        let start = [T::zero(), u_star.ln() * lit(0.5), T::zero()];
        let m = nm.minimize(evaluate, &start);
        if -m.value > e_star + tol::<T>(TIE_TOL) {
            let angles = EulerAngles {
                theta_out: m.x[0],
                r: m.x[1],
                theta_in: m.x[2],
            };
            best.e_star = -m.value;
            best.v_star = SymplecticOp::from_euler(angles);
            best.refined = Some(angles);
        }
    }
    Ok(best)
}

/// The single-mode operation `W` on mode 0 that mimics `U` on mode 0 and
/// `V` on mode 1 acting on a maximally squeezed vacuum.
///
/// With `V = R(a) S(r) R(b)`, `W = U R(b) S(-r) R(a)`.
pub fn fact1_equivalent_v<T: Real>(
    u: &SymplecticOp<T>,
    v: &SymplecticOp<T>,
) -> Result<SymplecticOp<T>> {
    let um = u.single_mode_matrix()?;
    let e = euler_decompose(&v.single_mode_matrix()?)?;
    let w = SymplecticOp::from_euler(EulerAngles {
        theta_out: e.theta_in,
        r: -e.r,
        theta_in: e.theta_out,
    });
    SymplecticOp::from_single_mode(um * w.single_mode_matrix()?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport<T> {
    pub qs: Vec<T>,
    pub differences: Vec<T>,
    pub non_increasing: bool,
    pub final_below_bound: bool,
    pub passes: bool,
}

/// Slack for "non-increasing" between consecutive differences; covers the
/// run-to-run reproducibility of geof.
pub const TREND_SLACK: f64 = 1e-8;
/// Largest allowed difference at the last `q` of a trend.
pub const TREND_BOUND: f64 = 1e-2;

/// Builds a trend report from differences measured along `qs`.
pub fn trend_report<T: Real>(qs: Vec<T>, differences: Vec<T>) -> TrendReport<T> {
    let non_increasing = differences
        .windows(2)
        .all(|w| w[1] <= w[0] + lit(TREND_SLACK));
    let final_below_bound = differences.last().map_or(true, |d| *d < lit(TREND_BOUND));
    TrendReport {
        qs,
        differences,
        non_increasing,
        final_below_bound,
        passes: non_increasing && final_below_bound,
    }
}

/// Local operations `U` (mode 0) and `V` (mode 1) on `|chi(q)>` become
/// irrelevant to the channel output as `q -> 1`: reports
/// `|E(out with U, V) - E(out plain)|` along the increasing `qs`.
pub fn lemma2_invariance_check<T: Real>(
    map: &OneSideMap<T>,
    qs: &[T],
    u: &SymplecticOp<T>,
    v: &SymplecticOp<T>,
    measure: Measure,
    opts: &GeofOptions<T>,
) -> Result<TrendReport<T>> {
    if qs.is_empty() || qs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "q sequence must be non-empty and increasing".into(),
        ));
    }
    for &q in qs {
        check_q_prime(q)?;
    }
    let ident = SymplecticOp::identity(1);
    let mut diffs = Vec::with_capacity(qs.len());
    for &q in qs {
        let plain = measure.evaluate(&map.transmit_tmss(q, &ident)?, opts)?;
        let dressed = transmit_dressed(map, q, u, v)?;
        diffs.push((measure.evaluate(&dressed, opts)? - plain).abs());
    }
    Ok(trend_report(qs.to_vec(), diffs))
}

/// Output for `|chi(q)>` with `U` on mode 0 and `V` on mode 1 before the map.
pub fn transmit_dressed<T: Real>(
    map: &OneSideMap<T>,
    q: T,
    u: &SymplecticOp<T>,
    v: &SymplecticOp<T>,
) -> Result<crate::gaussian::GaussianState<T>> {
    let out = map.transmit_tmss(q, v)?;
    // The map acts on mode 1 only, so U on mode 0 commutes with it.
    crate::channels::pre_process(&out, u, 0)
}
