//! Equilibrium solvers for every partition: the grand-coalition optimum, the
//! single-chain and horizontal-cooperation Stackelberg equilibria, the
//! manufacturers' inner game, and the all-alone / vertical-cooperation
//! Stackelberg games.

mod alc;
mod inner;
mod vc;

pub use alc::{alc_sbe, alc_supplier_objective, sigma_thresholds, SigmaThresholds};
pub use inner::{inner_game_ne, manufacturer_best_response, InnerCase, InnerNe};
pub use vc::{vc_coefficients, vc_leader_objective, vc_sbe, vc_theta, VcCoefficients};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    Action, ActionProfile, Coalition, CoalitionAction, MarketParams, Partition,
};
use crate::pricing::{evaluate_utilities, solve_quadratic_pricing, DEGENERATE_REL_TOL};

/// Which agents ended up operating, or whether a grid fallback produced the
/// answer.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    FullyOperating,
    PartialOperating(Vec<Coalition>),
    NoneOperating,
    OracleFallback,
}

impl Regime {
    pub fn label(&self) -> String {
        match self {
            Regime::FullyOperating => "fully_operating".into(),
            Regime::PartialOperating(who) => {
                let names: Vec<&str> = who.iter().map(|c| c.label()).collect();
                format!("partial_operating({})", names.join(","))
            }
            Regime::NoneOperating => "none_operating".into(),
            Regime::OracleFallback => "oracle_fallback".into(),
        }
    }
}

/// A candidate the solver considered, kept for auditability.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub quote: Option<f64>,
    pub price: Option<f64>,
    pub value: f64,
}

/// Named scalars (thresholds, margins, coefficients) plus the candidate list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub scalars: BTreeMap<String, f64>,
    pub candidates: Vec<Candidate>,
}

impl Diagnostics {
    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_string(), value);
    }
}

/// A solved partition: actions, demands, per-coalition utilities and the
/// operating regime.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumOutcome {
    pub partition: Partition,
    pub actions: ActionProfile,
    pub demands: BTreeMap<Coalition, f64>,
    pub utilities: BTreeMap<Coalition, f64>,
    pub regime: Regime,
    pub diagnostics: Diagnostics,
}

impl EquilibriumOutcome {
    pub fn utility(&self, coalition: Coalition) -> f64 {
        self.utilities.get(&coalition).copied().unwrap_or(0.0)
    }
}

pub(crate) fn assemble_outcome(
    params: &MarketParams,
    partition: Partition,
    actions: ActionProfile,
    regime: Regime,
    diagnostics: Diagnostics,
) -> Result<EquilibriumOutcome> {
    let demands = crate::model::demand_profile(params, partition, &actions)?;
    let utilities = evaluate_utilities(params, partition, &actions)?;
    Ok(EquilibriumOutcome {
        partition,
        actions,
        demands,
        utilities,
        regime,
        diagnostics,
    })
}

/// Optimal price and worth of the grand coalition: the single-price monopoly
/// on the merged market.
pub fn gc_optimum(params: &MarketParams) -> Result<EquilibriumOutcome> {
    params.validate()?;
    let sol = solve_quadratic_pricing(params.dbar_m(), params.alpha_m(), params.c_g(), params.o_g())?;
    let mut diagnostics = Diagnostics::default();
    diagnostics.scalar("delta", sol.delta);
    let (actions, regime) = match sol.action {
        Action::Price(p) => {
            diagnostics.scalar("p_star", p);
            (
                ActionProfile::new().with(Coalition::G, CoalitionAction::Retail { price: p }),
                Regime::FullyOperating,
            )
        }
        Action::NoOperate => (ActionProfile::new(), Regime::NoneOperating),
    };
    assemble_outcome(params, Partition::Grand, actions, regime, diagnostics)
}

/// Stackelberg equilibrium of one supplier facing one manufacturer (or one
/// merged block) on a single market.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleChainSbe {
    pub quote: Action,
    pub price: Action,
    pub supplier_utility: f64,
    pub manufacturer_utility: f64,
    /// The quarter-market profit unit: supplier earns `2 phi - oS`, the
    /// manufacturer `phi - oM`.
    pub phi: f64,
    pub regime: Regime,
    pub diagnostics: Diagnostics,
}

/// Operating-viability condition for the single chain.
pub fn chain_a2_holds(dbar: f64, alpha: f64, c_s: f64, c_m: f64, o_s: f64, o_m: f64) -> bool {
    let big_o = (2.0 * o_s).max(o_s + o_m).max(4.0 * o_m);
    dbar > alpha * (c_s + c_m) + 2.0 * (alpha * big_o).sqrt()
}

/// Closed-form single-chain SBE when the viability condition holds; a grid
/// fallback over the supplier quote otherwise.
pub fn single_chain_sbe(
    dbar: f64,
    alpha: f64,
    c_s: f64,
    c_m: f64,
    o_s: f64,
    o_m: f64,
) -> Result<SingleChainSbe> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if [dbar, c_s, c_m, o_s, o_m].iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParams(
            "chain parameters must be finite and nonnegative".into(),
        ));
    }
    let margin = dbar - alpha * (c_s + c_m);
    let phi = margin * margin / (16.0 * alpha);
    let mut diagnostics = Diagnostics::default();
    diagnostics.scalar("phi", phi);

    if chain_a2_holds(dbar, alpha, c_s, c_m, o_s, o_m) {
        let q = (dbar + alpha * (c_s - c_m)) / (2.0 * alpha);
        let p = (3.0 * dbar + alpha * (c_s + c_m)) / (4.0 * alpha);
        diagnostics.scalar("q_star", q);
        diagnostics.scalar("p_star", p);
        return Ok(SingleChainSbe {
            quote: Action::Price(q),
            price: Action::Price(p),
            supplier_utility: 2.0 * phi - o_s,
            manufacturer_utility: phi - o_m,
            phi,
            regime: Regime::FullyOperating,
            diagnostics,
        });
    }

    // Viability not guaranteed: search the supplier quote on a grid, with the
    // manufacturer responding through the pricing kernel.
    let p_max = dbar / alpha + c_s + c_m + 1.0;
    let step = p_max / 2000.0;
    let mut best: Option<(f64, f64, Action)> = None;
    let mut q = 0.0;
    while q <= p_max {
        let br = solve_quadratic_pricing(dbar, alpha, c_m + q, o_m)?;
        let value = match br.action {
            Action::Price(p) => (dbar - alpha * p).max(0.0) * (q - c_s) - o_s,
            Action::NoOperate => -o_s,
        };
        if best.as_ref().map_or(true, |(bv, _, _)| value > *bv) {
            best = Some((value, q, br.action));
        }
        q += step;
    }
    let (value, q, br) = best.expect("grid is nonempty");
    let tol = DEGENERATE_REL_TOL * dbar.max(1.0);
    diagnostics.scalar("fallback_q", q);
    diagnostics.scalar("fallback_value", value);
    if value < -tol {
        return Ok(SingleChainSbe {
            quote: Action::NoOperate,
            price: Action::NoOperate,
            supplier_utility: 0.0,
            manufacturer_utility: 0.0,
            phi,
            regime: Regime::NoneOperating,
            diagnostics,
        });
    }
    let manufacturer_utility = match br {
        Action::Price(p) => (dbar - alpha * p).max(0.0) * (p - c_m - q) - o_m,
        Action::NoOperate => 0.0,
    };
    Ok(SingleChainSbe {
        quote: Action::Price(q),
        price: br,
        supplier_utility: value,
        manufacturer_utility,
        phi,
        regime: Regime::OracleFallback,
        diagnostics,
    })
}

/// SBE of the horizontal-cooperation partition: the merged manufacturer block
/// plays the single-chain follower with the best costs of its members.
pub fn hc_sbe(params: &MarketParams) -> Result<EquilibriumOutcome> {
    params.validate()?;
    let chain = single_chain_sbe(
        params.dbar_m(),
        params.alpha_m(),
        params.c_s,
        params.c_m1.min(params.c_m2),
        params.o_s,
        params.o_m1.min(params.o_m2),
    )?;
    let mut actions = ActionProfile::new();
    if let Action::Price(q) = chain.quote {
        actions.set(Coalition::S, CoalitionAction::Wholesale { quote: q });
    }
    if let Action::Price(p) = chain.price {
        actions.set(Coalition::M, CoalitionAction::Retail { price: p });
    }
    assemble_outcome(
        params,
        Partition::Horizontal,
        actions,
        chain.regime.clone(),
        chain.diagnostics,
    )
}

/// Outcome of the simultaneous-move game in which everyone stays out, plus a
/// grid certificate that no unilateral deviation helps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousNe {
    pub actions: ActionProfile,
    pub certified: bool,
    pub max_deviation_gain: f64,
}

/// The simultaneous-move game between the supplier and the manufacturers has
/// the all-out profile as its Nash equilibrium; verified by scanning
/// unilateral price deviations on a grid.
pub fn simultaneous_ne(params: &MarketParams) -> Result<SimultaneousNe> {
    params.validate()?;
    let p_max = params.dbar_m() / params.alpha_m() + params.c_g() + 1.0;
    let step = p_max / 200.0;
    let tol = DEGENERATE_REL_TOL * params.dbar_m().max(1.0);
    let mut max_gain = f64::NEG_INFINITY;
    let mut v = 0.0;
    while v <= p_max {
        // Supplier quoting v while no manufacturer operates.
        let supplier_only = ActionProfile::new().with(Coalition::S, CoalitionAction::Wholesale { quote: v });
        let u = evaluate_utilities(params, Partition::AllAlone, &supplier_only)?;
        max_gain = max_gain.max(u[&Coalition::S]);
        // Each manufacturer pricing at v with no supplier.
        for c in [Coalition::M1, Coalition::M2] {
            let alone = ActionProfile::new().with(c, CoalitionAction::Retail { price: v });
            let u = evaluate_utilities(params, Partition::AllAlone, &alone)?;
            max_gain = max_gain.max(u[&c]);
        }
        v += step;
    }
    Ok(SimultaneousNe {
        actions: ActionProfile::new(),
        certified: max_gain <= tol,
        max_deviation_gain: max_gain,
    })
}
