//! The quadratic pricing kernel and the utility evaluators every solver
//! composes.
//!
//! The kernel solves `max_a ((dbar - alpha p)^+ (p - c) - oc) 1[a != n_o]`:
//! with margin `delta = dbar - alpha c - 2 sqrt(alpha oc)` the optimum is the
//! interior price when `delta > 0` and not operating when `delta < 0`; at
//! `delta = 0` both are optimal and the operating choice is preferred.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    demand_profile, Action, ActionProfile, Coalition, MarketParams, Partition,
};

/// Relative width of the `delta = 0` window treated as the two-optimizer case.
pub const DEGENERATE_REL_TOL: f64 = 1e-12;

/// Solution of the single-price quadratic problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSolution {
    pub action: Action,
    pub value: f64,
    /// Operating margin `dbar - alpha c - 2 sqrt(alpha oc)`.
    pub delta: f64,
    /// True when `delta` is zero within tolerance; the operating optimizer
    /// is returned with value 0.
    pub degenerate: bool,
}

pub fn solve_quadratic_pricing(dbar: f64, alpha: f64, c: f64, oc: f64) -> Result<QuadraticSolution> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if dbar < 0.0 || c < 0.0 || oc < 0.0 || !(dbar.is_finite() && c.is_finite() && oc.is_finite()) {
        return Err(Error::InvalidParams(
            "dbar, c and oc must be finite and nonnegative".into(),
        ));
    }
    let delta = dbar - alpha * c - 2.0 * (alpha * oc).sqrt();
    let tol = DEGENERATE_REL_TOL * dbar.max(1.0);
    if delta < -tol {
        return Ok(QuadraticSolution {
            action: Action::NoOperate,
            value: 0.0,
            delta,
            degenerate: false,
        });
    }
    let price = (dbar + c * alpha) / (2.0 * alpha);
    let margin = dbar - alpha * c;
    let value = margin * margin / (4.0 * alpha) - oc;
    Ok(QuadraticSolution {
        action: Action::Price(price),
        value,
        delta,
        degenerate: delta.abs() <= tol,
    })
}

fn flag(operating: bool) -> f64 {
    if operating {
        1.0
    } else {
        0.0
    }
}

/// Per-coalition utilities for the given partition and actions, following
/// the operating-flag structure of the utility definitions: a manufacturer
/// earns nothing without the supplier, and a coalition that stays out gets
/// exactly zero.
pub fn evaluate_utilities(
    params: &MarketParams,
    partition: Partition,
    actions: &ActionProfile,
) -> Result<BTreeMap<Coalition, f64>> {
    let demands = demand_profile(params, partition, actions)?;
    let d = |c: Coalition| demands.get(&c).copied().unwrap_or(0.0);
    let mut out = BTreeMap::new();

    match partition {
        Partition::Grand => {
            let a = actions.action(Coalition::G);
            let u = if let Some(p) = a.retail_price() {
                d(Coalition::G) * (p - params.c_g()) - params.o_g()
            } else {
                0.0
            };
            out.insert(Coalition::G, u);
        }
        Partition::Horizontal => {
            let s = actions.action(Coalition::S);
            let m = actions.action(Coalition::M);
            let f_s = flag(s.operates());
            let f_m = flag(m.operates());
            let q = s.wholesale_quote().unwrap_or(0.0);
            let c_m = params.c_m1.min(params.c_m2);
            let o_m = params.o_m1.min(params.o_m2);
            let u_m = match m.retail_price() {
                Some(p) => d(Coalition::M) * (p - c_m - q) * f_s - o_m,
                None => 0.0,
            };
            let u_s = if s.operates() {
                d(Coalition::M) * f_m * (q - params.c_s) - params.o_s
            } else {
                0.0
            };
            out.insert(Coalition::M, u_m * f_m);
            out.insert(Coalition::S, u_s);
        }
        Partition::AllAlone => {
            let s = actions.action(Coalition::S);
            let f_s = flag(s.operates());
            let q = s.wholesale_quote().unwrap_or(0.0);
            let mut supply = 0.0;
            for (i, c) in [(1usize, Coalition::M1), (2usize, Coalition::M2)] {
                let a = actions.action(c);
                let u = match a.retail_price() {
                    Some(p) => d(c) * (p - params.c_m(i) - q) * f_s - params.o_m(i),
                    None => 0.0,
                };
                out.insert(c, u * flag(a.operates()));
                if a.operates() {
                    supply += d(c);
                }
            }
            let u_s = if s.operates() {
                supply * (q - params.c_s) - params.o_s
            } else {
                0.0
            };
            out.insert(Coalition::S, u_s);
        }
        Partition::Vertical1 | Partition::Vertical2 => {
            let (leader, i) = if partition == Partition::Vertical1 {
                (Coalition::V1, 1usize)
            } else {
                (Coalition::V2, 2usize)
            };
            let follower = if i == 1 { Coalition::M2 } else { Coalition::M1 };
            let j = 3 - i;
            let lead = actions.action(leader);
            let foll = actions.action(follower);
            let f_v = flag(lead.operates());
            let f_f = flag(foll.operates());
            let q = lead.wholesale_quote().unwrap_or(0.0);
            let u_v = match lead.retail_price() {
                Some(p_i) => {
                    d(leader) * (p_i - params.c_m(i) - params.c_s)
                        + f_f * d(follower) * (q - params.c_s)
                        - params.o_s
                        - params.o_m(i)
                }
                None => 0.0,
            };
            let u_f = match foll.retail_price() {
                Some(p_j) => d(follower) * (p_j - q - params.c_m(j)) * f_v - params.o_m(j),
                None => 0.0,
            };
            out.insert(leader, u_v * f_v);
            out.insert(follower, u_f * f_f);
        }
    }
    Ok(out)
}
