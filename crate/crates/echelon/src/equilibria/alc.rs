//! The all-alone Stackelberg game: the supplier leads with a quote, the
//! manufacturers answer through the inner game.
//!
//! The supplier objective is composed from the inner-game equilibrium rather
//! than from the printed piecewise coefficients, which keeps it valid under
//! unequal sensitivities and under any relabeling of the operating regions.
//! The optimum is found by enumerating branch-interior optima plus the
//! sigma breakpoints where the operating pattern changes.

use crate::error::Result;
use crate::model::{
    Action, ActionProfile, Coalition, CoalitionAction, MarketParams, Partition,
};
use crate::pricing::{evaluate_utilities, DEGENERATE_REL_TOL};

use super::inner::{inner_game_ne, InnerCase, InnerNe};
use super::{assemble_outcome, Candidate, Diagnostics, EquilibriumOutcome, Regime};

/// Cap keeping the leader formulas away from the eps = 1 singularity.
pub(crate) const EPS_CAP: f64 = 1.0 - 1e-6;

/// Quote thresholds controlling which manufacturers operate.
///
/// `sigma_a[i]` is where manufacturer i+1 stops operating alone;
/// `sigma_b[i]` is where it stops operating inside the fully-operating
/// equilibrium. `sigma_b` is `None` when its defining denominator is not
/// positive (extreme sensitivity imbalance), in which case the printed
/// piecewise form does not apply and only the composed objective is used.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaThresholds {
    pub sigma_a: [f64; 2],
    pub sigma_b: [Option<f64>; 2],
}

pub fn sigma_thresholds(params: &MarketParams) -> SigmaThresholds {
    let mut sigma_a = [0.0; 2];
    let mut sigma_b = [None; 2];
    let eps = params.eps.min(EPS_CAP);
    for i in [1usize, 2] {
        let j = 3 - i;
        let (a_i, a_j) = (params.alpha(i), params.alpha(j));
        let (d_i, d_j) = (params.dbar(i), params.dbar(j));
        let (c_i, c_j) = (params.c_m(i), params.c_m(j));
        let root = (a_i * params.o_m(i)).sqrt();
        sigma_a[i - 1] = (d_i - a_i * c_i - 2.0 * root) / a_i;
        let den = 2.0 * ((2.0 - eps * eps) * a_i - eps * a_j);
        if den > 0.0 {
            let num = 4.0 * d_i + 2.0 * eps * d_j + 2.0 * eps * a_j * c_j
                + 2.0 * (eps * eps - 2.0) * a_i * c_i
                - 2.0 * (4.0 - eps * eps) * root;
            sigma_b[i - 1] = Some(num / den);
        }
    }
    SigmaThresholds { sigma_a, sigma_b }
}

/// Supplier utility at quote `q` with the manufacturers at the inner-game
/// equilibrium.
pub fn alc_supplier_objective(params: &MarketParams, q: f64) -> Result<f64> {
    Ok(supplier_value(params, q)?.0)
}

fn supplier_value(params: &MarketParams, q: f64) -> Result<(f64, InnerNe)> {
    let ne = inner_game_ne(q, params)?;
    let actions = profile_for(q, &ne);
    let u = evaluate_utilities(params, Partition::AllAlone, &actions)?;
    Ok((u[&Coalition::S], ne))
}

fn profile_for(q: f64, ne: &InnerNe) -> ActionProfile {
    let mut actions = ActionProfile::new().with(Coalition::S, CoalitionAction::Wholesale { quote: q });
    for (i, c) in [(1usize, Coalition::M1), (2usize, Coalition::M2)] {
        if let Action::Price(p) = ne.action(i) {
            actions.set(c, CoalitionAction::Retail { price: p });
        }
    }
    actions
}

/// Interior optimum of the fully-operating branch. Total equilibrium demand
/// is affine in the quote; its slope reduces to
/// `-(1-eps)(alpha1+alpha2)/(2-eps)`, which is computed directly so the
/// near-singular regime does not cancel.
fn both_operating_interior(params: &MarketParams) -> Option<f64> {
    let eps = params.eps.min(EPS_CAP);
    let demand_at_zero = {
        let mut total = 0.0;
        for i in [1usize, 2] {
            let j = 3 - i;
            let c_i = params.c_m(i);
            let c_j = params.c_m(j);
            let p_i = (eps * (params.dbar(j) + c_j * params.alpha(j))
                + 2.0 * (params.dbar(i) + c_i * params.alpha(i)))
                / ((4.0 - eps * eps) * params.alpha(i));
            let p_j = (eps * (params.dbar(i) + c_i * params.alpha(i))
                + 2.0 * (params.dbar(j) + c_j * params.alpha(j)))
                / ((4.0 - eps * eps) * params.alpha(j));
            total += params.dbar(i) - params.alpha(i) * p_i + eps * params.alpha(j) * p_j;
        }
        total
    };
    let b = (1.0 - eps) * (params.alpha(1) + params.alpha(2)) / (2.0 - eps);
    if b <= 0.0 {
        return None;
    }
    Some((demand_at_zero / b + params.c_s) / 2.0)
}

/// Interior optimum of the branch where only manufacturer `i` operates.
fn single_operating_interior(params: &MarketParams, i: usize) -> f64 {
    (params.dbar(i) - params.alpha(i) * params.c_m(i)) / (2.0 * params.alpha(i)) + params.c_s / 2.0
}

/// Stackelberg equilibrium of the all-alone partition.
pub fn alc_sbe(params: &MarketParams) -> Result<EquilibriumOutcome> {
    params.validate()?;
    let mut capped = *params;
    capped.eps = params.eps.min(EPS_CAP);
    let params = &capped;
    let sigma = sigma_thresholds(params);
    let mut diagnostics = Diagnostics::default();
    for i in [1usize, 2] {
        diagnostics.scalar(&format!("sigma{i}_a"), sigma.sigma_a[i - 1]);
        if let Some(sb) = sigma.sigma_b[i - 1] {
            diagnostics.scalar(&format!("sigma{i}_b"), sb);
        }
    }

    let mut candidates: Vec<(String, f64)> = vec![("origin".into(), 0.0)];
    if let Some(q) = both_operating_interior(params) {
        diagnostics.scalar("q_both_interior", q);
        candidates.push(("both_interior".into(), q));
    }
    for i in [1usize, 2] {
        let q = single_operating_interior(params, i);
        diagnostics.scalar(&format!("q_only{i}_interior"), q);
        candidates.push((format!("only{i}_interior"), q));
    }
    let mut breakpoints: Vec<(String, f64)> = Vec::new();
    for i in [1usize, 2] {
        breakpoints.push((format!("sigma{i}_a"), sigma.sigma_a[i - 1]));
        if let Some(sb) = sigma.sigma_b[i - 1] {
            breakpoints.push((format!("sigma{i}_b"), sb));
        }
    }
    for (label, q) in breakpoints {
        // The breakpoint itself (A.1 keeps the boundary agent operating)
        // plus a nudge into the open side of the adjacent branch.
        candidates.push((label.clone(), q));
        let nudge = q + 1e-9 * q.abs().max(1.0);
        candidates.push((format!("{label}+"), nudge));
    }

    let tie_tol = DEGENERATE_REL_TOL * params.dbar_m().max(1.0);
    let mut evaluated: Vec<Candidate> = Vec::new();
    let mut best: Option<(f64, f64, InnerNe)> = None;
    for (label, q) in candidates {
        if !q.is_finite() || q < 0.0 {
            continue;
        }
        let (value, ne) = supplier_value(params, q)?;
        evaluated.push(Candidate {
            label,
            quote: Some(q),
            price: None,
            value,
        });
        let better = match &best {
            None => true,
            Some((bv, bq, _)) => value > bv + tie_tol || (value >= bv - tie_tol && q < *bq),
        };
        if better {
            best = Some((value, q, ne));
        }
    }
    diagnostics.candidates = evaluated;

    let (value, q_star, ne) = best.expect("candidate list is nonempty");
    if value < -tie_tol {
        // The supplier prefers to stay out, and nothing operates without it.
        return assemble_outcome(
            params,
            Partition::AllAlone,
            ActionProfile::new(),
            Regime::NoneOperating,
            diagnostics,
        );
    }
    diagnostics.scalar("q_star", q_star);
    for i in [1usize, 2] {
        let j = 3 - i;
        let p_other = ne.action(j).price().unwrap_or(0.0);
        let delta = params.dbar(i) + params.eps * params.alpha(j) * p_other
            - params.alpha(i) * (params.c_m(i) + q_star)
            - 2.0 * (params.alpha(i) * params.o_m(i)).sqrt();
        diagnostics.scalar(&format!("delta{i}_at_q_star"), delta);
    }
    let regime = match ne.case {
        InnerCase::BothOperate => Regime::FullyOperating,
        InnerCase::OnlyOne(i) => Regime::PartialOperating(vec![
            Coalition::S,
            if i == 1 { Coalition::M1 } else { Coalition::M2 },
        ]),
        InnerCase::NoneOperate => Regime::PartialOperating(vec![Coalition::S]),
    };
    assemble_outcome(params, Partition::AllAlone, profile_for(q_star, &ne), regime, diagnostics)
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
    fn eps_zero_doubles_single_chain() {
        let out = alc_sbe(&params(0.0)).unwrap();
        let q = out.actions.action(Coalition::S).wholesale_quote().unwrap();
        assert!((q - 5.0).abs() < 1e-9);
        assert!((out.utility(Coalition::S) - 16.0).abs() < 1e-9);
        assert!((out.utility(Coalition::M1) - 4.0).abs() < 1e-9);
        assert!((out.utility(Coalition::M2) - 4.0).abs() < 1e-9);
        for c in [Coalition::M1, Coalition::M2] {
            assert!((out.actions.action(c).retail_price().unwrap() - 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eps_half_symmetric_instance() {
        let out = alc_sbe(&params(0.5)).unwrap();
        let q = out.actions.action(Coalition::S).wholesale_quote().unwrap();
        assert!((q - 10.0).abs() < 1e-9);
        assert!((out.utility(Coalition::S) - 54.0).abs() < 1e-9);
        assert!((out.utility(Coalition::M1) - 9.0).abs() < 1e-9);
        assert!((out.utility(Coalition::M2) - 9.0).abs() < 1e-9);
        assert!((out.demands[&Coalition::M1] - 3.0).abs() < 1e-9);
        // sigma_2^b = 19 on this instance.
        assert!((out.diagnostics.scalars["sigma2_b"] - 19.0).abs() < 1e-9);
        assert_eq!(out.regime, Regime::FullyOperating);
    }

    #[test]
    fn nonviable_second_market_leaves_one_operating() {
        let mut p = params(0.5);
        p.dbar2 = 1.0;
        p.o_m2 = 5.0;
        let out = alc_sbe(&p).unwrap();
        assert_eq!(
            out.regime,
            Regime::PartialOperating(vec![Coalition::S, Coalition::M1])
        );
        assert_eq!(out.utility(Coalition::M2), 0.0);
        assert!(out.utility(Coalition::S) > 0.0);
    }

    #[test]
    fn everything_out_when_costs_swamp_market() {
        let mut p = params(0.2);
        p.o_m1 = 1e6;
        p.o_m2 = 1e6;
        p.o_s = 1e6;
        let out = alc_sbe(&p).unwrap();
        assert_eq!(out.regime, Regime::NoneOperating);
        assert_eq!(out.utility(Coalition::S), 0.0);
    }

    #[test]
    fn candidate_enumeration_beats_a_fine_grid() {
        // Asymmetric instances spanning the operating regimes: the solver's
        // argmax value must dominate a 4000-point scan of its own objective.
        let cases = [
            (12.0, 7.0, 0.6, 0.5, 1.5, 0.2, 0.9, 0.1),
            (20.0, 3.0, 0.8, 1.0, 0.0, 2.0, 0.0, 3.0),
            (8.0, 8.0, 0.3, 0.0, 0.7, 0.7, 0.4, 0.4),
            (15.0, 1.0, 0.7, 2.0, 1.0, 0.3, 0.2, 4.0),
        ];
        for (d1, d2, eps, c_s, c_m1, c_m2, o_m1, o_m2) in cases {
            let p = MarketParams {
                dbar1: d1,
                dbar2: d2,
                alpha_tilde1: 1.0,
                alpha_tilde2: 1.0,
                eps,
                gamma: 0.0,
                c_s,
                c_m1,
                c_m2,
                o_s: 0.1,
                o_m1,
                o_m2,
            };
            let out = alc_sbe(&p).unwrap();
            let solver_value = out.utility(Coalition::S);
            let q_hi = 4.0 * (p.dbar_m() / p.alpha_m() + p.c_g() + 1.0);
            let mut grid_best = 0.0f64;
            for k in 0..4000 {
                let q = q_hi * k as f64 / 3999.0;
                grid_best = grid_best.max(alc_supplier_objective(&p, q).unwrap());
            }
            assert!(
                solver_value >= grid_best - 1e-9 * grid_best.abs().max(1.0),
                "({d1},{d2},{eps}): solver {solver_value} vs grid {grid_best}"
            );
        }
    }

    #[test]
    fn esm_regime_quote_formula_holds() {
        // Interior fully-operating optimum from the supplier's reduced
        // quadratic, valid when it lands below sigma_2^b.
        for (d1, d2) in [(10.0, 10.0), (12.0, 7.0)] {
            let mut p = params(0.5);
            p.dbar1 = d1;
            p.dbar2 = d2;
            let alpha = 1.0;
            let expected = (d1 + d2 + (p.eps - 1.0) * alpha * (p.c_m1 + p.c_m2))
                / (4.0 * alpha * (1.0 - p.eps))
                + p.c_s / 2.0;
            let sigma = sigma_thresholds(&p);
            assert!(expected < sigma.sigma_b[1].unwrap());
            let out = alc_sbe(&p).unwrap();
            let q = out.actions.action(Coalition::S).wholesale_quote().unwrap();
            assert!((q - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }
}
