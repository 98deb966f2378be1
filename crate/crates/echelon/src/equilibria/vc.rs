//! The vertical-cooperation Stackelberg game: the supplier-manufacturer pair
//! leads with a retail price for its own market and a wholesale quote for the
//! outside manufacturer, who follows with its own retail price.
//!
//! Candidates are the interior optimum, the follower's participation
//! boundary, and the follower-priced-out monopoly. The leader's retail price
//! is confined to its own choke range: past it the pair sells nothing and
//! the linear cross term would inflate the follower's demand without bound,
//! where the demand model stops being meaningful.

use crate::error::{Error, Result};
use crate::model::{
    Action, ActionProfile, Coalition, CoalitionAction, MarketParams, Partition,
};
use crate::oracle::{grid_stackelberg_2d, GridSpec};
use crate::pricing::{evaluate_utilities, solve_quadratic_pricing, DEGENERATE_REL_TOL};

use super::alc::EPS_CAP;
use super::{assemble_outcome, Candidate, Diagnostics, EquilibriumOutcome, Regime};

/// Coefficients of the leader's reduced quadratic under equal sensitivities,
/// with the partner's costs in the manufacturing slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcCoefficients {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

fn leader_coalition(i: usize) -> Coalition {
    if i == 1 {
        Coalition::V1
    } else {
        Coalition::V2
    }
}

fn follower_coalition(i: usize) -> Coalition {
    if i == 1 {
        Coalition::M2
    } else {
        Coalition::M1
    }
}

fn partition_for(i: usize) -> Partition {
    if i == 1 {
        Partition::Vertical1
    } else {
        Partition::Vertical2
    }
}

fn check_index(i: usize) -> Result<()> {
    if i == 1 || i == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParams("leader-partner index must be 1 or 2".into()))
    }
}

pub fn vc_coefficients(i: usize, params: &MarketParams) -> Result<VcCoefficients> {
    check_index(i)?;
    let j = 3 - i;
    let eps = params.eps.min(EPS_CAP);
    let alpha = params.alpha(i);
    let (d_i, d_j) = (params.dbar(i), params.dbar(j));
    let (c_i, c_j) = (params.c_m(i), params.c_m(j));
    let c_s = params.c_s;
    let e1 = d_j / (2.0 * alpha) + c_j / 2.0;
    let e2 = alpha * (1.0 - eps * eps / 2.0) * (c_i + c_s) + d_i + eps * alpha * e1
        - c_s * eps * alpha / 2.0;
    let e3 = d_j / 2.0 - alpha * c_j / 2.0 - (c_i + c_s) * eps * alpha / 2.0 + c_s * alpha / 2.0;
    Ok(VcCoefficients { e1, e2, e3 })
}

/// Largest quote at which the follower still operates, given the leader's
/// retail price.
pub fn vc_theta(i: usize, p_leader: f64, params: &MarketParams) -> Result<f64> {
    check_index(i)?;
    let j = 3 - i;
    let a_j = params.alpha(j);
    Ok((params.dbar(j) + params.eps * params.alpha(i) * p_leader
        - a_j * params.c_m(j)
        - 2.0 * (a_j * params.o_m(j)).sqrt())
        / a_j)
}

/// Leader utility at `(p_i, q)` with the follower at its best response.
///
/// Retail prices beyond the pair's own choke point evaluate to negative
/// infinity: past that point the pair attracts no customers and the raw
/// cross term would feed the follower demand the repelled customers never
/// generated.
pub fn vc_leader_objective(i: usize, params: &MarketParams, p_i: f64, q: f64) -> Result<f64> {
    Ok(leader_value(i, params, p_i, q)?.0)
}

fn leader_value(i: usize, params: &MarketParams, p_i: f64, q: f64) -> Result<(f64, Action)> {
    check_index(i)?;
    if !p_i.is_finite() || p_i < 0.0 {
        return Err(Error::InvalidPrice(p_i));
    }
    if !q.is_finite() || q < 0.0 {
        return Err(Error::InvalidPrice(q));
    }
    let j = 3 - i;
    let dbar_eff = params.dbar(j) + params.eps * params.alpha(i) * p_i;
    let follower = solve_quadratic_pricing(dbar_eff, params.alpha(j), params.c_m(j) + q, params.o_m(j))?
        .action;
    let own_demand = params.dbar(i) - params.alpha(i) * p_i
        + params.eps * params.alpha(j) * follower.price().unwrap_or(0.0);
    if own_demand < -DEGENERATE_REL_TOL * params.dbar(i).max(1.0) {
        return Ok((f64::NEG_INFINITY, follower));
    }
    let actions = profile_for(i, Some((p_i, q)), follower);
    let u = evaluate_utilities(params, partition_for(i), &actions)?;
    Ok((u[&leader_coalition(i)], follower))
}

fn profile_for(i: usize, leader: Option<(f64, f64)>, follower: Action) -> ActionProfile {
    let mut actions = ActionProfile::new();
    if let Some((price, quote)) = leader {
        actions.set(leader_coalition(i), CoalitionAction::RetailAndWholesale { price, quote });
    }
    if let Action::Price(p) = follower {
        actions.set(follower_coalition(i), CoalitionAction::Retail { price: p });
    }
    actions
}

fn equal_alpha(params: &MarketParams) -> bool {
    let scale = params.alpha_tilde1.abs().max(params.alpha_tilde2.abs());
    (params.alpha_tilde1 - params.alpha_tilde2).abs() <= 1e-12 * scale
}

/// Vertex of the quadratic through three samples of `g` at `x0`, `x0 + h`,
/// `x0 + 2h`; `None` when the fit is not strictly concave.
fn quadratic_vertex(g: impl Fn(f64) -> f64, x0: f64, h: f64) -> Option<f64> {
    let (y0, y1, y2) = (g(x0), g(x0 + h), g(x0 + 2.0 * h));
    let second = y2 - 2.0 * y1 + y0;
    if second >= 0.0 {
        return None;
    }
    // Vertex of the Lagrange quadratic on an equispaced stencil.
    Some(x0 + h * (0.5 * (3.0 * y0 - 4.0 * y1 + y2) / second))
}

/// Stackelberg equilibrium of the vertical partition led by the pair
/// {S, M_i}. Closed form under equal sensitivities; a two-dimensional grid
/// fallback otherwise.
pub fn vc_sbe(i: usize, params: &MarketParams) -> Result<EquilibriumOutcome> {
    check_index(i)?;
    params.validate()?;
    if params.eps >= 1.0 {
        return Err(Error::EpsSingular);
    }
    let mut capped = *params;
    capped.eps = params.eps.min(EPS_CAP);
    let params = &capped;
    let j = 3 - i;
    let partition = partition_for(i);
    let mut diagnostics = Diagnostics::default();
    let tie_tol = DEGENERATE_REL_TOL * params.dbar_m().max(1.0);

    if !equal_alpha(params) {
        // No printed closed form for unequal sensitivities; search the
        // leader's (price, quote) plane directly.
        let spec = GridSpec::for_params(params);
        let objective = |p: f64, q: f64| leader_value(i, params, p, q).map_or(f64::NEG_INFINITY, |v| v.0);
        let ((p_b, q_b), value) = grid_stackelberg_2d(&objective, &spec);
        diagnostics.scalar("fallback_value", value);
        if value < -tie_tol {
            return assemble_outcome(
                params,
                partition,
                ActionProfile::new(),
                Regime::NoneOperating,
                diagnostics,
            );
        }
        let (_, follower) = leader_value(i, params, p_b, q_b)?;
        let actions = profile_for(i, Some((p_b, q_b)), follower);
        return assemble_outcome(params, partition, actions, Regime::OracleFallback, diagnostics);
    }

    let eps = params.eps;
    let alpha = params.alpha(i);
    let co = vc_coefficients(i, params)?;
    diagnostics.scalar("e1", co.e1);
    diagnostics.scalar("e2", co.e2);
    diagnostics.scalar("e3", co.e3);

    let p_star = (co.e2 + co.e3 * eps) / (alpha * (2.0 - 2.0 * eps * eps));
    let q_star = co.e3 / alpha + eps * p_star;
    let theta_star = vc_theta(i, p_star, params)?;
    diagnostics.scalar("p_star", p_star);
    diagnostics.scalar("q_star", q_star);
    diagnostics.scalar("theta_at_p_star", theta_star);

    let mut candidates: Vec<(String, f64, f64)> = Vec::new();
    let margin_tol = DEGENERATE_REL_TOL * params.dbar(j).max(1.0) / params.alpha(j);
    if p_star >= 0.0 && q_star >= 0.0 && q_star <= theta_star + margin_tol {
        candidates.push(("interior".into(), p_star, q_star));
    }
    // Follower kept exactly on its operating boundary: q = theta(p).
    {
        let g = |p: f64| {
            let q = vc_theta(i, p, params).unwrap_or(f64::NEG_INFINITY).max(0.0);
            leader_value(i, params, p, q).map_or(f64::NEG_INFINITY, |v| v.0)
        };
        // Start the stencil where theta becomes nonnegative.
        let base = if eps > 0.0 {
            ((params.alpha(j) * params.c_m(j)
                + 2.0 * (params.alpha(j) * params.o_m(j)).sqrt()
                - params.dbar(j))
                / (eps * params.alpha(i)))
            .max(0.0)
        } else {
            0.0
        };
        let h = (params.dbar(i) / alpha + params.c_g()).max(1.0) / 8.0;
        if let Some(p_v) = quadratic_vertex(g, base, h) {
            if p_v.is_finite() && p_v >= 0.0 {
                let q_v = vc_theta(i, p_v, params)?.max(0.0);
                candidates.push(("boundary".into(), p_v, q_v));
            }
        }
        let q_c = vc_theta(i, base, params)?.max(0.0);
        candidates.push(("boundary_corner".into(), base, q_c));
    }
    // Follower priced out: the pair runs its own market as a monopoly.
    let mono = solve_quadratic_pricing(
        params.dbar(i),
        alpha,
        params.c_m(i) + params.c_s,
        params.o_s + params.o_m(i),
    )?;
    if let Action::Price(p_m) = mono.action {
        let q_m = vc_theta(i, p_m, params)?.max(0.0) + 1.0;
        candidates.push(("monopoly".into(), p_m, q_m));
    }

    let mut evaluated = Vec::new();
    let mut best: Option<(f64, f64, f64, Action)> = None;
    for (label, p, q) in candidates {
        if !(p.is_finite() && q.is_finite()) || p < 0.0 || q < 0.0 {
            continue;
        }
        let (value, follower) = leader_value(i, params, p, q)?;
        evaluated.push(Candidate {
            label,
            quote: Some(q),
            price: Some(p),
            value,
        });
        let better = match &best {
            None => true,
            Some((bv, _, bq, bf)) => {
                value > bv + tie_tol
                    || (value >= bv - tie_tol
                        && (follower.operates() && !bf.operates()
                            || follower.operates() == bf.operates() && q < *bq))
            }
        };
        if better {
            best = Some((value, p, q, follower));
        }
    }
    diagnostics.candidates = evaluated;

    let Some((value, p, q, follower)) = best else {
        return assemble_outcome(params, partition, ActionProfile::new(), Regime::NoneOperating, diagnostics);
    };
    if value < -tie_tol {
        return assemble_outcome(params, partition, ActionProfile::new(), Regime::NoneOperating, diagnostics);
    }
    let regime = if follower.operates() {
        Regime::FullyOperating
    } else {
        Regime::PartialOperating(vec![leader_coalition(i)])
    };
    let actions = profile_for(i, Some((p, q)), follower);
    assemble_outcome(params, partition, actions, regime, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eps: f64) -> MarketParams {
        MarketParams {
            dbar1: 10.0,
            dbar2: 10.0,
            alpha_tilde1: 1.0,
            alpha_tilde2: 1.0,
            eps,
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
    fn eps_zero_decomposes() {
        let out = vc_sbe(1, &params(0.0)).unwrap();
        let lead = out.actions.action(Coalition::V1);
        assert!((lead.retail_price().unwrap() - 6.0).abs() < 1e-9);
        assert!((lead.wholesale_quote().unwrap() - 5.0).abs() < 1e-9);
        assert!((out.actions.action(Coalition::M2).retail_price().unwrap() - 8.0).abs() < 1e-9);
        assert!((out.utility(Coalition::V1) - 24.0).abs() < 1e-9);
        assert!((out.utility(Coalition::M2) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn eps_half_hand_instance() {
        let out = vc_sbe(1, &params(0.5)).unwrap();
        let d = &out.diagnostics.scalars;
        assert!((d["e1"] - 5.5).abs() < 1e-12);
        assert!((d["e2"] - 14.25).abs() < 1e-12);
        assert!((d["e3"] - 4.5).abs() < 1e-12);
        assert!((d["p_star"] - 11.0).abs() < 1e-9);
        assert!((d["q_star"] - 10.0).abs() < 1e-9);
        let p2 = out.actions.action(Coalition::M2).retail_price().unwrap();
        assert!((p2 - 13.25).abs() < 1e-9);
        assert!((out.utility(Coalition::V1) - 70.875).abs() < 1e-9);
        assert!((out.utility(Coalition::M2) - 5.0625).abs() < 1e-9);
        assert_eq!(out.regime, Regime::FullyOperating);
    }

    #[test]
    fn heavy_follower_cost_prices_it_out() {
        let mut p = params(0.5);
        p.o_m2 = 1e4;
        let out = vc_sbe(1, &p).unwrap();
        assert_eq!(out.regime, Regime::PartialOperating(vec![Coalition::V1]));
        assert_eq!(out.utility(Coalition::M2), 0.0);
        // Leader falls back to its own monopoly profit.
        let mono = solve_quadratic_pricing(10.0, 1.0, 2.0, 0.0).unwrap();
        assert!((out.utility(Coalition::V1) - mono.value).abs() < 1e-9);
    }

    #[test]
    fn eps_one_is_rejected() {
        let mut p = params(0.5);
        p.eps = 1.0;
        assert!(matches!(vc_sbe(1, &p), Err(Error::EpsSingular)));
    }

    #[test]
    fn symmetric_leaders_match() {
        let p = params(0.5);
        let a = vc_sbe(1, &p).unwrap();
        let b = vc_sbe(2, &p).unwrap();
        assert!((a.utility(Coalition::V1) - b.utility(Coalition::V2)).abs() < 1e-9);
        assert!((a.utility(Coalition::M2) - b.utility(Coalition::M1)).abs() < 1e-9);
    }

    #[test]
    fn closed_form_beats_a_plane_scan() {
        // Scan inside the sanctioned price domain: the default cap widened
        // to cover the closed-form candidates.
        let cases = [
            (12.0, 7.0, 0.6, 1.5, 0.2, 0.3, 0.1),
            (15.0, 2.0, 0.8, 0.0, 1.0, 0.0, 0.5),
            (6.0, 9.0, 0.4, 0.5, 0.5, 0.7, 0.2),
        ];
        for (d1, d2, eps, c_m1, c_m2, o_s, o_m2) in cases {
            let p = MarketParams {
                dbar1: d1,
                dbar2: d2,
                alpha_tilde1: 1.0,
                alpha_tilde2: 1.0,
                eps,
                gamma: 0.0,
                c_s: 1.0,
                c_m1,
                c_m2,
                o_s,
                o_m1: 0.1,
                o_m2,
            };
            let out = vc_sbe(1, &p).unwrap();
            let solver_value = out.utility(Coalition::V1);
            let candidate_reach = out
                .diagnostics
                .candidates
                .iter()
                .flat_map(|c| [c.price.unwrap_or(0.0), c.quote.unwrap_or(0.0)])
                .fold(0.0f64, f64::max);
            let reach = (p.dbar_m() / p.alpha_m() + p.c_g() + 1.0).max(1.2 * candidate_reach);
            let mut best = 0.0f64;
            for a in 0..160 {
                for b in 0..160 {
                    let pp = reach * a as f64 / 159.0;
                    let qq = reach * b as f64 / 159.0;
                    best = best.max(vc_leader_objective(1, &p, pp, qq).unwrap());
                }
            }
            assert!(
                solver_value >= best - 1e-9 * best.abs().max(1.0),
                "({d1},{d2},{eps}): solver {solver_value} vs scan {best}"
            );
        }
    }

    #[test]
    fn unequal_alpha_uses_fallback() {
        let mut p = params(0.4);
        p.alpha_tilde2 = 1.5;
        let out = vc_sbe(1, &p).unwrap();
        assert_eq!(out.regime, Regime::OracleFallback);
        assert!(out.utility(Coalition::V1) > 0.0);
    }

    #[test]
    fn fallback_agrees_with_closed_form_near_equal_alpha() {
        let mut p = params(0.5);
        p.dbar2 = 8.0;
        p.c_m2 = 0.5;
        p.gamma = 0.2;
        let closed = vc_sbe(2, &p).unwrap();
        p.alpha_tilde2 = 1.0 + 1e-5;
        let fallback = vc_sbe(2, &p).unwrap();
        assert_eq!(fallback.regime, Regime::OracleFallback);
        let a = closed.utility(Coalition::V2);
        let b = fallback.utility(Coalition::V2);
        assert!((a - b).abs() <= 1e-3 * a.abs(), "closed {a} vs fallback {b}");
    }
}
