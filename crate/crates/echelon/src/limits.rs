//! Worth-limits and derivative-limits in the essential-and-substitutable-
//! manufacturer regime (eps, gamma) -> (1, 1): closed-form tables for equal
//! reputations plus numerical iterated-limit and finite-difference
//! estimators.
//!
//! Worths scale like `1/((1-eps)(1-gamma))` near the regime; the scaled map
//! `(1-gamma)(1-eps) nu` converges, gamma first and then eps, exactly in that
//! order here.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{enumerate_partitions, Coalition, MarketParams, Partition};
use crate::worths::{compute_worth_table, pessimal_worth, worth_for};

/// Relative tolerance for nonzero worth-limit comparisons.
pub const WORTH_LIMIT_REL_TOL: f64 = 0.01;
/// Relative tolerance for derivative-limit comparisons.
pub const DERIVATIVE_LIMIT_REL_TOL: f64 = 0.02;

/// One limit target: a worth under a partition, or a pessimal anticipated
/// worth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LimitEntry {
    Worth(Partition, Coalition),
    Pessimal(Coalition),
}

impl LimitEntry {
    /// CLI form: `V1:VC1` for a worth entry, `V1:pa` for a pessimal one.
    pub fn label(&self) -> String {
        match self {
            LimitEntry::Worth(p, c) => format!("{c}:{p}"),
            LimitEntry::Pessimal(c) => format!("{c}:pa"),
        }
    }

    pub fn parse(text: &str) -> Result<LimitEntry> {
        let (c, p) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidParams(format!("expected COALITION:PARTITION, got `{text}`")))?;
        let coalition = Coalition::parse(c)?;
        if p == "pa" {
            return Ok(LimitEntry::Pessimal(coalition));
        }
        let partition = Partition::parse(p)?;
        if !partition.contains(coalition) {
            return Err(Error::MissingWorth { partition, coalition });
        }
        Ok(LimitEntry::Worth(partition, coalition))
    }
}

/// All ten in-table worth entries in partition order.
pub fn worth_entries() -> Vec<LimitEntry> {
    let mut out = Vec::new();
    for p in enumerate_partitions() {
        for c in p.coalitions() {
            out.push(LimitEntry::Worth(p, c));
        }
    }
    out
}

/// The seven pessimal entries in coalition label order.
pub fn pessimal_entries() -> Vec<LimitEntry> {
    Coalition::ALL.iter().map(|c| LimitEntry::Pessimal(*c)).collect()
}

fn common_alpha_tilde(params: &MarketParams) -> f64 {
    // The limit tables assume equal reputations; use the first sensitivity.
    params.alpha_tilde1
}

/// Closed-form worth-limit `f_C^P` (or pessimal `f_C^pa`): the two nonzero
/// entries are `dbarM^2 / (8 alphaTilde)` for the vertical leader and the
/// all-alone supplier; every other in-table and pessimal entry is zero.
pub fn worth_limit_closed_form(entry: LimitEntry, params: &MarketParams) -> f64 {
    let peak = params.dbar_m().powi(2) / (8.0 * common_alpha_tilde(params));
    match entry {
        LimitEntry::Worth(Partition::Vertical1, Coalition::V1)
        | LimitEntry::Worth(Partition::Vertical2, Coalition::V2)
        | LimitEntry::Worth(Partition::AllAlone, Coalition::S)
        | LimitEntry::Pessimal(Coalition::V1)
        | LimitEntry::Pessimal(Coalition::V2) => peak,
        _ => 0.0,
    }
}

/// Closed-form derivative-limit `f^(1),P_C` for the five published families.
pub fn derivative_limit_closed_form(
    coalition: Coalition,
    partition: Partition,
    params: &MarketParams,
) -> Result<f64> {
    let at = common_alpha_tilde(params);
    let (d1, d2) = (params.dbar1, params.dbar2);
    let dm = params.dbar_m();
    let value = match (partition, coalition) {
        (Partition::Vertical1, Coalition::V1) => (2.0 * d1 * d2 + d2 * d2 - d1 * d1) / (16.0 * at),
        (Partition::Vertical2, Coalition::V2) => (2.0 * d2 * d1 + d1 * d1 - d2 * d2) / (16.0 * at),
        (Partition::Vertical1, Coalition::M2) => -(d2 * d2) / (16.0 * at),
        (Partition::Vertical2, Coalition::M1) => -(d1 * d1) / (16.0 * at),
        (Partition::AllAlone, Coalition::M1) => -(5.0 * d1 + d2).powi(2) / (144.0 * at),
        (Partition::AllAlone, Coalition::M2) => -(5.0 * d2 + d1).powi(2) / (144.0 * at),
        (Partition::AllAlone, Coalition::S) => dm * dm / (8.0 * at),
        (Partition::Horizontal, Coalition::M) => -(dm * dm) / (16.0 * at),
        _ => {
            return Err(Error::NoClosedForm(format!(
                "derivative limit of {coalition} under {partition}"
            )))
        }
    };
    Ok(value)
}

/// The complete closed-form limit tables for one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable {
    pub worth_limits: BTreeMap<(Partition, Coalition), f64>,
    pub pessimal_limits: BTreeMap<Coalition, f64>,
    pub derivative_limits: BTreeMap<(Partition, Coalition), f64>,
}

pub fn limit_table(params: &MarketParams) -> LimitTable {
    let mut worth_limits = BTreeMap::new();
    for entry in worth_entries() {
        if let LimitEntry::Worth(p, c) = entry {
            worth_limits.insert((p, c), worth_limit_closed_form(entry, params));
        }
    }
    let mut pessimal_limits = BTreeMap::new();
    for c in Coalition::ALL {
        pessimal_limits.insert(c, worth_limit_closed_form(LimitEntry::Pessimal(c), params));
    }
    let mut derivative_limits = BTreeMap::new();
    for p in enumerate_partitions() {
        for c in p.coalitions() {
            if let Ok(v) = derivative_limit_closed_form(c, p, params) {
                derivative_limits.insert((p, c), v);
            }
        }
    }
    LimitTable {
        worth_limits,
        pessimal_limits,
        derivative_limits,
    }
}

/// Iterated-limit schedule: gamma runs to 1 first at each eps, then eps.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSchedule {
    pub gammas: Vec<f64>,
    pub epss: Vec<f64>,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        LimitSchedule {
            gammas: (4..=8).map(|k| 1.0 - 10f64.powi(-k)).collect(),
            epss: (2..=5).map(|k| 1.0 - 10f64.powi(-k)).collect(),
        }
    }
}

/// A numerical limit with its convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    /// False when an inner or outer tail stopped shrinking.
    pub converged: bool,
    /// Inner (gamma) limits, one per eps in the schedule.
    pub per_eps: Vec<f64>,
    /// Successive differences of `per_eps`.
    pub outer_diffs: Vec<f64>,
}

fn scaled_at(entry: LimitEntry, base: &MarketParams, gamma: f64, eps: f64) -> Result<f64> {
    let mut p = *base;
    p.gamma = gamma;
    p.eps = eps;
    let nu = match entry {
        LimitEntry::Worth(partition, coalition) => worth_for(&p, coalition, partition)?,
        LimitEntry::Pessimal(coalition) => {
            let table = compute_worth_table(&p)?;
            pessimal_worth(coalition, &table)?
        }
    };
    Ok((1.0 - gamma) * (1.0 - eps) * nu)
}

fn tail_is_monotone(values: &[f64]) -> bool {
    if values.len() < 3 {
        return true;
    }
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-9 * scale;
    let d_prev = values[values.len() - 2] - values[values.len() - 3];
    let d_last = values[values.len() - 1] - values[values.len() - 2];
    d_last.abs() <= d_prev.abs().max(floor)
}

/// Iterated-limit estimate of a worth-limit: for each eps the gamma tail
/// value, then the eps tail value, each with a monotone-tail check. A growing
/// tail only clears the `converged` flag; the value is still returned.
pub fn worth_limit_estimate(
    entry: LimitEntry,
    base: &MarketParams,
    schedule: &LimitSchedule,
) -> Result<LimitEstimate> {
    let mut per_eps = Vec::with_capacity(schedule.epss.len());
    let mut converged = true;
    for &eps in &schedule.epss {
        let mut inner = Vec::with_capacity(schedule.gammas.len());
        for &gamma in &schedule.gammas {
            inner.push(scaled_at(entry, base, gamma, eps)?);
        }
        converged &= tail_is_monotone(&inner);
        per_eps.push(*inner.last().expect("schedule has gamma points"));
    }
    converged &= tail_is_monotone(&per_eps);
    let outer_diffs = per_eps.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(LimitEstimate {
        value: *per_eps.last().expect("schedule has eps points"),
        converged,
        per_eps,
        outer_diffs,
    })
}

/// Gamma point used to approximate the inner limit of the derivative
/// estimator.
pub const DERIVATIVE_GAMMA: f64 = 1.0 - 1e-8;
/// Center and half-width of the eps central difference.
pub const DERIVATIVE_EPS_CENTER: f64 = 1.0 - 1e-3;
pub const DERIVATIVE_EPS_HALF_STEP: f64 = 5e-4;

/// Finite-difference estimate of the derivative-limit: the eps-derivative of
/// `(1-eps) lim_gamma (1-gamma) nu` with the inner limit taken at
/// `gamma = 1 - 1e-8` and a central difference at `eps = 1 - 1e-3`.
pub fn derivative_limit_estimate(
    coalition: Coalition,
    partition: Partition,
    base: &MarketParams,
) -> Result<f64> {
    let scaled_nu = |eps: f64| -> Result<f64> {
        let mut p = *base;
        p.gamma = DERIVATIVE_GAMMA;
        p.eps = eps;
        let nu = worth_for(&p, coalition, partition)?;
        Ok((1.0 - eps) * (1.0 - DERIVATIVE_GAMMA) * nu)
    };
    let hi = scaled_nu(DERIVATIVE_EPS_CENTER + DERIVATIVE_EPS_HALF_STEP)?;
    let lo = scaled_nu(DERIVATIVE_EPS_CENTER - DERIVATIVE_EPS_HALF_STEP)?;
    Ok((hi - lo) / (2.0 * DERIVATIVE_EPS_HALF_STEP))
}

/// One row of the estimate-versus-closed-form comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitComparison {
    pub entry: LimitEntry,
    pub estimate: f64,
    pub closed_form: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub pass: bool,
    pub converged: bool,
}

/// Compares every worth-limit entry (in-table plus pessimal) against its
/// closed form: nonzero entries within 1% relative, zero entries within 1%
/// of the peak `dbarM^2 / (8 alphaTilde)`.
pub fn compare_worth_limits(
    base: &MarketParams,
    schedule: &LimitSchedule,
) -> Result<Vec<LimitComparison>> {
    let peak = params_peak(base);
    let mut rows = Vec::new();
    for entry in worth_entries().into_iter().chain(pessimal_entries()) {
        let est = worth_limit_estimate(entry, base, schedule)?;
        let closed = worth_limit_closed_form(entry, base);
        let abs_error = (est.value - closed).abs();
        let rel_error = abs_error / closed.abs().max(f64::MIN_POSITIVE);
        let pass = if closed == 0.0 {
            abs_error <= WORTH_LIMIT_REL_TOL * peak
        } else {
            rel_error <= WORTH_LIMIT_REL_TOL
        };
        rows.push(LimitComparison {
            entry,
            estimate: est.value,
            closed_form: closed,
            abs_error,
            rel_error,
            pass,
            converged: est.converged,
        });
    }
    Ok(rows)
}

/// Compares the five derivative-limit families against their closed forms at
/// 2% relative tolerance.
pub fn compare_derivative_limits(base: &MarketParams) -> Result<Vec<LimitComparison>> {
    let mut rows = Vec::new();
    for p in enumerate_partitions() {
        for c in p.coalitions() {
            let Ok(closed) = derivative_limit_closed_form(c, p, base) else {
                continue;
            };
            let estimate = derivative_limit_estimate(c, p, base)?;
            let abs_error = (estimate - closed).abs();
            let rel_error = abs_error / closed.abs().max(f64::MIN_POSITIVE);
            let pass = rel_error <= DERIVATIVE_LIMIT_REL_TOL;
            rows.push(LimitComparison {
                entry: LimitEntry::Worth(p, c),
                estimate,
                closed_form: closed,
                abs_error,
                rel_error,
                pass,
                converged: true,
            });
        }
    }
    Ok(rows)
}

fn params_peak(params: &MarketParams) -> f64 {
    params.dbar_m().powi(2) / (8.0 * common_alpha_tilde(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(d1: f64, d2: f64) -> MarketParams {
        MarketParams {
            dbar1: d1,
            dbar2: d2,
            alpha_tilde1: 1.0,
            alpha_tilde2: 1.0,
            eps: 0.5,
            gamma: 0.0,
            c_s: 1.0,
            c_m1: 1.0,
            c_m2: 1.0,
            o_s: 0.0,
            o_m1: 0.0,
            o_m2: 0.0,
        }
    }

    #[test]
    fn closed_form_table_values() {
        let p = base(10.0, 10.0);
        assert_eq!(
            worth_limit_closed_form(LimitEntry::Worth(Partition::Vertical1, Coalition::V1), &p),
            50.0
        );
        assert_eq!(
            worth_limit_closed_form(LimitEntry::Worth(Partition::Vertical1, Coalition::M2), &p),
            0.0
        );
        assert_eq!(
            worth_limit_closed_form(LimitEntry::Worth(Partition::AllAlone, Coalition::S), &p),
            50.0
        );
        assert_eq!(
            worth_limit_closed_form(LimitEntry::Worth(Partition::Grand, Coalition::G), &p),
            0.0
        );
        assert_eq!(worth_limit_closed_form(LimitEntry::Pessimal(Coalition::V1), &p), 50.0);
        assert_eq!(worth_limit_closed_form(LimitEntry::Pessimal(Coalition::S), &p), 0.0);
    }

    #[test]
    fn derivative_closed_forms() {
        let p = base(1.0, 1.0);
        let d = derivative_limit_closed_form(Coalition::V1, Partition::Vertical1, &p).unwrap();
        assert!((d - 2.0 / 16.0).abs() < 1e-12);
        let m = derivative_limit_closed_form(Coalition::M1, Partition::AllAlone, &p).unwrap();
        assert!((m + 36.0 / 144.0).abs() < 1e-12);
        assert!(derivative_limit_closed_form(Coalition::G, Partition::Grand, &p).is_err());
    }

    #[test]
    fn vertical_leader_estimate_converges_to_peak() {
        let p = base(10.0, 10.0);
        let est = worth_limit_estimate(
            LimitEntry::Worth(Partition::Vertical1, Coalition::V1),
            &p,
            &LimitSchedule::default(),
        )
        .unwrap();
        assert!(est.converged);
        assert!((est.value - 50.0).abs() / 50.0 < 0.01, "estimate {}", est.value);
    }

    #[test]
    fn zero_entries_estimate_small() {
        let p = base(10.0, 10.0);
        let schedule = LimitSchedule::default();
        for entry in [
            LimitEntry::Worth(Partition::Grand, Coalition::G),
            LimitEntry::Worth(Partition::AllAlone, Coalition::M1),
        ] {
            let est = worth_limit_estimate(entry, &p, &schedule).unwrap();
            assert!(est.value.abs() <= 0.01 * 50.0, "{entry:?} -> {}", est.value);
        }
    }

    #[test]
    fn derivative_estimate_matches_closed_form() {
        let p = base(5.0, 1.0);
        let closed = derivative_limit_closed_form(Coalition::M2, Partition::Vertical1, &p).unwrap();
        let est = derivative_limit_estimate(Coalition::M2, Partition::Vertical1, &p).unwrap();
        assert!((est - closed).abs() <= 0.02 * closed.abs(), "est {est}, closed {closed}");
    }

    #[test]
    fn limit_table_covers_all_entries() {
        let t = limit_table(&base(10.0, 10.0));
        assert_eq!(t.worth_limits.len(), 10);
        assert_eq!(t.pessimal_limits.len(), 7);
        assert_eq!(t.derivative_limits.len(), 8);
        assert_eq!(t.worth_limits[&(Partition::Vertical1, Coalition::V1)], 50.0);
        assert_eq!(t.derivative_limits[&(Partition::Horizontal, Coalition::M)], -25.0);
    }

    // The merger-comparison combination divided by (1 - eps) approaches
    // (d1^2 - d2^2 - 2 d1 d2) / (16 alphaTilde): the quantity deciding when
    // the vertical pair with the stronger manufacturer survives.
    #[test]
    fn taylor_consistency_of_the_merger_comparison() {
        for (d1, d2) in [(5.0, 1.0), (3.0, 1.0), (2.0, 2.0)] {
            let mut p = base(d1, d2);
            p.gamma = 1.0 - 1e-8;
            p.eps = 1.0 - 1e-3;
            let scaled = |c: Coalition, part: Partition| -> f64 {
                (1.0 - p.gamma) * (1.0 - p.eps) * worth_for(&p, c, part).unwrap()
            };
            let table = compute_worth_table(&p).unwrap();
            let m_pa = (1.0 - p.gamma) * (1.0 - p.eps) * pessimal_worth(Coalition::M, &table).unwrap();
            let combo = scaled(Coalition::V1, Partition::Vertical1)
                - scaled(Coalition::V2, Partition::Vertical2)
                + 2.0 * scaled(Coalition::M2, Partition::Vertical1)
                - m_pa;
            let limit = (d1 * d1 - d2 * d2 - 2.0 * d1 * d2) / (16.0 * p.alpha_tilde1);
            let got = combo / (1.0 - p.eps);
            assert!(
                (got - limit).abs() <= 0.05 * limit.abs().max(0.05),
                "({d1},{d2}): {got} vs {limit}"
            );
        }
    }

    #[test]
    fn entry_labels_round_trip() {
        for entry in worth_entries().into_iter().chain(pessimal_entries()) {
            assert_eq!(LimitEntry::parse(&entry.label()).unwrap(), entry);
        }
        assert!(LimitEntry::parse("S:VC1").is_err());
        assert!(LimitEntry::parse("bogus").is_err());
    }
}
