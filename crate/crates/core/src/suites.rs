//! Verification suites run by `gaussent verify`.
//!
//! Each suite returns named checks carrying the measured residual and the
//! threshold it was held to.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{
    apply_filter_tmss, beamsplitter_channel, cm_from_quadexp, det_a_closed_form, filtered_coeffs,
    FilterOp, OneSideMap,
};
use crate::entanglement::{theorem2_ratio, GeofOptions, Measure, RATIO_TOL};
use crate::error::{Error, Result};
use crate::fock::{
    apply_generator_exp, beamsplitter_channel_oracle, check_normal_ordered_squeeze, check_tt0,
    cm_from_fock, filter_fock, improves_with_cutoff, tmss_fock, FockOp,
};
use crate::gaussian::{tmss_state, EulerAngles, SymplecticOp};
use crate::protocol::{
    fact1_equivalent_v, lemma2_invariance_check, transmit_dressed, trend_report,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured < threshold,
            measured,
            threshold,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theorem1,
    Theorem2,
    Eq10,
    Eq11,
    Fact1,
    Lemma2,
    Appendix,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Eq10,
        Suite::Eq11,
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Fact1,
        Suite::Lemma2,
        Suite::Appendix,
        Suite::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Eq10 => "eq10",
            Suite::Eq11 => "eq11",
            Suite::Fact1 => "fact1",
            Suite::Lemma2 => "lemma2",
            Suite::Appendix => "appendix",
            Suite::Oracle => "oracle",
        }
    }

    pub fn run(&self, seed: u64) -> Result<SuiteReport> {
        let checks = match self {
            Suite::Theorem1 => theorem1()?,
            Suite::Theorem2 => theorem2(seed)?,
            Suite::Eq10 => eq10()?,
            Suite::Eq11 => eq11()?,
            Suite::Fact1 => fact1(seed)?,
            Suite::Lemma2 => lemma2(seed)?,
            Suite::Appendix => appendix()?,
            Suite::Oracle => oracle()?,
        };
        Ok(SuiteReport {
            suite: *self,
            checks,
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a suite selector; `all` expands to every suite.
pub fn parse_selector(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|part| part.trim().parse()).collect()
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidInput(format!(
                    "unknown suite {s:?}; expected all or one of {}",
                    names.join(", ")
                ))
            })
    }
}

fn sci_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn fig1_map() -> Result<OneSideMap<f64>> {
    Ok(OneSideMap::Gaussian(beamsplitter_channel(
        PI / 6.0,
        3.0,
        1.0,
    )?))
}

fn geof_opts(seed: u64) -> GeofOptions<f64> {
    GeofOptions {
        seed,
        ..GeofOptions::default()
    }
}

fn eq10() -> Result<Vec<CheckResult>> {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for i in 0..5 {
        let q0 = 0.1 + 0.2 * i as f64;
        for j in 0..5 {
            let q1 = 0.2 + 0.2 * j as f64;
            for k in 0..7 {
                let r = 0.25 * k as f64;
                let cm = cm_from_quadexp(&filtered_coeffs(q0, r, q1)?)?;
                worst = worst.max((cm.det_a() - det_a_closed_form(q0, q1, r)).abs());
                points += 1;
            }
        }
    }
    let frozen: [((f64, f64, f64), f64); 2] = [
        ((0.5, 0.5, 0.0), 0.321_111_111_111_111_1),
        ((0.5, 0.5, 0.5), 0.279_864_842_070_330_74),
    ];
    let frozen_err = frozen
        .iter()
        .map(|((q0, q1, r), v)| (det_a_closed_form(*q0, *q1, *r) - v).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        CheckResult::below("closed form det A vs covariance pipeline", worst, 1e-10)
            .with_detail(format!("{points} grid points")),
        CheckResult::below("frozen det A values", frozen_err, 1e-12),
    ])
}

fn eq11() -> Result<Vec<CheckResult>> {
    let mut fock_err: f64 = 0.0;
    let mut cm_err: f64 = 0.0;
    for &(q0, qa) in &[(0.5, 0.5), (0.3, 0.9), (0.6, 0.2), (0.45, 1.0)] {
        let (chi, _) = tmss_fock(q0, 30)?;
        let filtered = filter_fock(&chi, qa, 0)?;
        let (direct, _) = tmss_fock(q0 * qa, 30)?;
        let direct = direct.normalized()?;
        for (a, b) in filtered.amplitudes().iter().zip(direct.amplitudes()) {
            let d: f64 = (a - b).norm_sqr();
            fock_err = fock_err.max(d.sqrt());
        }
        let via_coeffs = cm_from_quadexp(&filtered_coeffs(q0, 0.0, qa)?)?;
        let target = tmss_state(q0 * qa)?;
        cm_err = cm_err.max((via_coeffs.cov() - target.cov()).amax());
        cm_err = cm_err.max((apply_filter_tmss(q0, qa)?.cov() - target.cov()).amax());
    }
    Ok(vec![
        CheckResult::below(
            "filtered Fock amplitudes equal product-q amplitudes",
            fock_err,
            1e-12,
        ),
        CheckResult::below(
            "filtered covariance equals product-q covariance",
            cm_err,
            1e-10,
        ),
    ])
}

fn theorem1() -> Result<Vec<CheckResult>> {
    let mut violations = 0;
    let mut largest_step = f64::NEG_INFINITY;
    let mut table = Vec::new();
    for q0 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for q1 in [0.2, 0.4, 0.6, 0.8] {
            let mut row_max = f64::NEG_INFINITY;
            for k in 0..30 {
                let r = 0.05 * k as f64;
                let d = det_a_closed_form(q0, q1, r + 0.05) - det_a_closed_form(q0, q1, r);
                row_max = row_max.max(d);
                if d >= 0.0 {
                    violations += 1;
                }
                // Even in r, so the same holds on the negative side.
                let dn = det_a_closed_form(q0, q1, -r - 0.05) - det_a_closed_form(q0, q1, -r);
                if dn >= 0.0 {
                    violations += 1;
                }
            }
            largest_step = largest_step.max(row_max);
            table.push(format!("q0={q0} q1={q1} max_step={row_max:.3e}"));
        }
    }
    let mut flat: f64 = 0.0;
    for q0 in [0.1, 0.5, 0.9] {
        for k in 0..=30 {
            let r = 0.05 * k as f64;
            flat =
                flat.max((det_a_closed_form(q0, 1.0, r) - det_a_closed_form(q0, 1.0, 0.0)).abs());
        }
    }
    Ok(vec![
        CheckResult {
            name: "det A strictly decreasing in |r| for q1 < 1".into(),
            passed: violations == 0,
            measured: largest_step,
            threshold: 0.0,
            detail: format!("{violations} violations; {}", table.join("; ")),
        },
        CheckResult::below("det A independent of r without filter", flat, 1e-12),
    ])
}

/// Random single-mode symplectic with squeezing `|r| <= r_max`.
pub fn random_symplectic(rng: &mut ChaCha8Rng, r_max: f64) -> SymplecticOp<f64> {
    SymplecticOp::from_euler(EulerAngles {
        theta_out: rng.gen_range(-PI..PI),
        r: rng.gen_range(-r_max..=r_max),
        theta_in: rng.gen_range(-PI..PI),
    })
}

/// One Theorem-2 sample: beamsplitter channel drawn from `theta` in
/// (0, pi/2), `u3` log-uniform in [1/3, 3], `b3` in [1/2, 2], random `V`
/// and `0 < q <= qb < 1`.
pub fn theorem2_sample(
    rng: &mut ChaCha8Rng,
) -> Result<(OneSideMap<f64>, SymplecticOp<f64>, f64, f64)> {
    let theta = rng.gen_range(1e-3..PI / 2.0 - 1e-3);
    let u3 = rng.gen_range((1.0f64 / 3.0).ln()..=3.0f64.ln()).exp();
    let b3 = rng.gen_range(0.5..=2.0);
    let v = random_symplectic(rng, 0.6);
    let qb = rng.gen_range(0.05..0.95);
    let q = rng.gen_range(0.01..=1.0) * qb;
    Ok((
        OneSideMap::Gaussian(beamsplitter_channel(theta, u3, b3)?),
        v,
        q,
        qb,
    ))
}

fn theorem2(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = geof_opts(seed);
    let (mut worst, mut failures, mut resampled, mut taken) = (f64::NEG_INFINITY, 0, 0, 0);
    while taken < 100 {
        let (map, v, q, qb) = theorem2_sample(&mut rng)?;
        match theorem2_ratio(&map, &v, q, qb, Measure::Geof, &opts) {
            Ok(r) => {
                worst = worst.max(r.lhs - r.rhs);
                failures += usize::from(!r.holds);
                taken += 1;
            }
            Err(Error::DegenerateChannel(_)) => resampled += 1,
            Err(e) => return Err(e),
        }
    }
    let mut filter_worst = f64::NEG_INFINITY;
    let mut filter_failures = 0;
    for _ in 0..20 {
        let map = OneSideMap::Filter(FilterOp::new(rng.gen_range(0.05..=1.0))?);
        let v = random_symplectic(&mut rng, 0.8);
        let qb = rng.gen_range(0.05..0.95);
        let q = rng.gen_range(0.01..=1.0) * qb;
        let r = theorem2_ratio(&map, &v, q, qb, Measure::CharIfPure, &opts)?;
        filter_worst = filter_worst.max(r.lhs - r.rhs);
        filter_failures += usize::from(!r.holds);
    }
    Ok(vec![
        CheckResult {
            name: "ratio bound on 100 beamsplitter-channel samples".into(),
            passed: failures == 0,
            measured: worst,
            threshold: RATIO_TOL,
            detail: format!("{failures} failures, {resampled} degenerate samples redrawn"),
        },
        CheckResult {
            name: "ratio bound on 20 filter samples".into(),
            passed: filter_failures == 0,
            measured: filter_worst,
            threshold: RATIO_TOL,
            detail: format!("{filter_failures} failures"),
        },
    ])
}

/// Largest allowed disagreement at `q = 0.999` for the equivalent-operation
/// check.
pub const FACT1_BOUND: f64 = 2e-3;

fn fact1(seed: u64) -> Result<Vec<CheckResult>> {
    let map = fig1_map()?;
    let opts = geof_opts(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfac7);
    let qs = [0.9, 0.99, 0.999];
    let mut checks = Vec::new();
    let ident = SymplecticOp::identity(1);
    let w = fact1_equivalent_v(&ident, &SymplecticOp::squeeze_u(2.0)?)?;
    let inv_err = (w.matrix() - SymplecticOp::squeeze_u(0.5)?.matrix()).amax();
    checks.push(CheckResult::below("S~(u) maps to S~(1/u)", inv_err, 1e-12));
    for case in 0..3 {
        let u = random_symplectic(&mut rng, 0.25);
        let v = random_symplectic(&mut rng, 0.25);
        let w = fact1_equivalent_v(&u, &v)?;
        let mut diffs = Vec::new();
        for &q in &qs {
            let a = Measure::Geof.evaluate(&transmit_dressed(&map, q, &u, &v)?, &opts)?;
            let b = Measure::Geof.evaluate(&transmit_dressed(&map, q, &w, &ident)?, &opts)?;
            diffs.push((a - b).abs());
        }
        let trend = trend_report(qs.to_vec(), diffs.clone());
        let last = *diffs.last().expect("three points");
        checks.push(CheckResult {
            name: format!("random pair {case}: equivalent operation on the other mode"),
            passed: trend.non_increasing && last < FACT1_BOUND,
            measured: last,
            threshold: FACT1_BOUND,
            detail: format!(
                "differences along q = 0.9, 0.99, 0.999: {}",
                sci_list(&diffs)
            ),
        });
    }
    Ok(checks)
}

fn lemma2(seed: u64) -> Result<Vec<CheckResult>> {
    let map = fig1_map()?;
    let opts = geof_opts(seed);
    let qs = [0.9, 0.99, 0.999];
    let cases = [
        (
            "U = V = I",
            SymplecticOp::identity(1),
            SymplecticOp::identity(1),
        ),
        (
            "U = R(0.7), V = R(-0.3)",
            SymplecticOp::rotation(0.7),
            SymplecticOp::rotation(-0.3),
        ),
        (
            "U = S~(2), V = S~(0.5)",
            SymplecticOp::squeeze_u(2.0)?,
            SymplecticOp::squeeze_u(0.5)?,
        ),
    ];
    let mut checks = Vec::new();
    for (label, u, v) in cases {
        let t = lemma2_invariance_check(&map, &qs, &u, &v, Measure::Geof, &opts)?;
        checks.push(CheckResult {
            name: format!("{label}: output entanglement converges to the plain input's"),
            passed: t.passes,
            measured: *t.differences.last().expect("non-empty"),
            threshold: crate::protocol::TREND_BOUND,
            detail: format!("differences: {}", sci_list(&t.differences)),
        });
    }
    Ok(checks)
}

fn appendix() -> Result<Vec<CheckResult>> {
    let tt0: Vec<_> = [20, 30, 40]
        .iter()
        .map(|&n| check_tt0(0.5, 0.3, n))
        .collect::<Result<_>>()?;
    let nos: Vec<_> = [20, 30, 40]
        .iter()
        .map(|&n| check_normal_ordered_squeeze(0.3, n))
        .collect::<Result<_>>()?;
    let hard = check_tt0(0.7, 0.5, 40)?;
    let fmt_runs = |runs: &[crate::fock::FidelityCheck<f64>]| {
        runs.iter()
            .map(|c| format!("{:.3e}", c.infidelity))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Ok(vec![
        CheckResult::below(
            "squeezed-then-expanded state, q0=0.5 r=0.3 N=30",
            tt0[1].infidelity,
            1e-8,
        )
        .with_detail(format!("infidelity {:.3e}", tt0[1].infidelity)),
        CheckResult::below(
            "normal-ordered squeezer, r=0.3 N=30",
            nos[1].infidelity,
            1e-8,
        ),
        CheckResult::below(
            "squeezed-then-expanded state, q0=0.7 r=0.5 N=40",
            hard.infidelity,
            1e-6,
        ),
        CheckResult {
            name: "infidelities improve with cutoff 20, 30, 40".into(),
            passed: improves_with_cutoff(&tt0) && improves_with_cutoff(&nos),
            measured: tt0
                .windows(2)
                .chain(nos.windows(2))
                .map(|w| w[1].infidelity - w[0].infidelity)
                .fold(f64::NEG_INFINITY, f64::max),
            threshold: crate::fock::INFIDELITY_FLOOR,
            detail: format!(
                "largest step change; tt0: {}; squeezer: {}",
                fmt_runs(&tt0),
                fmt_runs(&nos)
            ),
        },
    ])
}

/// Covariance of `T(q1) S(r) |chi(q0)>` built in the Fock basis, with the
/// tail mass lost while squeezing.
pub fn filtered_state_oracle(
    q0: f64,
    r: f64,
    q1: f64,
    cutoff: usize,
) -> Result<(crate::gaussian::GaussianState<f64>, f64)> {
    let (chi, _) = tmss_fock(q0, cutoff)?;
    let (sq, rep) = apply_generator_exp(&chi.normalized()?, FockOp::SqueezeR { r, mode: 1 }, 1.0)?;
    Ok((cm_from_fock(&filter_fock(&sq, q1, 1)?)?, rep.tail_mass))
}

fn oracle() -> Result<Vec<CheckResult>> {
    let (chi, _) = tmss_fock(0.5, 40)?;
    let tmss_err = (cm_from_fock(&chi)?.cov() - tmss_state(0.5)?.cov()).amax();

    let (mut det_err, mut cm_err): (f64, f64) = (0.0, 0.0);
    for q0 in [0.2, 0.4, 0.6] {
        for q1 in [0.2, 0.4, 0.6] {
            for r in [-0.5, -0.25, 0.0, 0.25, 0.5] {
                let (g, _) = filtered_state_oracle(q0, r, q1, 40)?;
                det_err = det_err.max((g.det_a() - det_a_closed_form(q0, q1, r)).abs());
                let c = cm_from_quadexp(&filtered_coeffs(q0, r, q1)?)?;
                cm_err = cm_err.max((g.cov() - c.cov()).amax());
            }
        }
    }

    let mut channel_err: f64 = 0.0;
    for &(q, theta, u3, b3, n) in &[
        (0.4, PI / 6.0, 1.2, 0.75, 20),
        (0.3, PI / 4.0, 0.8, 1.0, 25),
    ] {
        let brute = beamsplitter_channel_oracle(q, theta, u3, b3, n, 1e-12)?;
        let ch = beamsplitter_channel(theta, u3, b3)?;
        let closed = crate::channels::apply_oneside_channel(&tmss_state(q)?, &ch, 1)?;
        channel_err = channel_err.max((brute.cov() - closed.cov()).amax());
    }
    Ok(vec![
        CheckResult::below("squeezed vacuum moments, N=40", tmss_err, 1e-8),
        CheckResult::below(
            "det A of filtered squeezed states vs closed form, N=40",
            det_err,
            1e-6,
        ),
        CheckResult::below(
            "covariance of filtered squeezed states vs pipeline, N=40",
            cm_err,
            1e-6,
        ),
        CheckResult::below(
            "beamsplitter channel vs three-mode ensemble",
            channel_err,
            1e-4,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_parsing() {
        assert_eq!(parse_selector("all").unwrap().len(), 8);
        assert_eq!(
            parse_selector("eq10,appendix").unwrap(),
            vec![Suite::Eq10, Suite::Appendix]
        );
        assert!(parse_selector("theorem3").is_err());
        assert!(parse_selector("").is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Eq10, Suite::Eq11, Suite::Theorem1, Suite::Appendix] {
            let r = s.run(7).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
