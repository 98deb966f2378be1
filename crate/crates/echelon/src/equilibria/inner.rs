//! The inner price game the two manufacturers play once the supplier has
//! quoted `q`.

use crate::error::{Error, Result};
use crate::model::{Action, MarketParams};
use crate::pricing::DEGENERATE_REL_TOL;

/// Operating margin of manufacturer `i` facing opponent price `p_other`
/// (zero when the opponent stays out) under quote `q`.
fn margin(i: usize, p_other: f64, q: f64, params: &MarketParams) -> f64 {
    let j = 3 - i;
    let dbar_eff = params.dbar(i) + params.eps * params.alpha(j) * p_other;
    dbar_eff
        - params.alpha(i) * (params.c_m(i) + q)
        - 2.0 * (params.alpha(i) * params.o_m(i)).sqrt()
}

fn margin_tol(i: usize, params: &MarketParams) -> f64 {
    DEGENERATE_REL_TOL * params.dbar(i).max(1.0)
}

/// Monopoly-style best price of manufacturer `i` against opponent price zero.
fn base_price(i: usize, q: f64, params: &MarketParams) -> f64 {
    (params.dbar(i) + (params.c_m(i) + q) * params.alpha(i)) / (2.0 * params.alpha(i))
}

/// Best response of manufacturer `i` to the opponent action: the shifted
/// monopoly price when the margin is positive, staying out when it is
/// negative, and both (operating listed first) on the boundary.
pub fn manufacturer_best_response(
    i: usize,
    p_other: Action,
    q: f64,
    params: &MarketParams,
) -> Result<Vec<Action>> {
    if !(i == 1 || i == 2) {
        return Err(Error::InvalidParams("manufacturer index must be 1 or 2".into()));
    }
    params.validate()?;
    p_other.validate()?;
    if !q.is_finite() || q < 0.0 {
        return Err(Error::InvalidPrice(q));
    }
    let p_o = p_other.price().unwrap_or(0.0);
    let j = 3 - i;
    let delta = margin(i, p_o, q, params);
    let tol = margin_tol(i, params);
    let price = base_price(i, q, params) + params.eps * params.alpha(j) * p_o / (2.0 * params.alpha(i));
    Ok(if delta > tol {
        vec![Action::Price(price)]
    } else if delta < -tol {
        vec![Action::NoOperate]
    } else {
        vec![Action::Price(price), Action::NoOperate]
    })
}

/// Which manufacturers operate at the inner-game equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerCase {
    BothOperate,
    /// Only the named manufacturer (1 or 2) operates.
    OnlyOne(usize),
    NoneOperate,
}

/// The inner-game Nash equilibrium for a fixed quote.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerNe {
    /// Actions of M1 and M2, in that order.
    pub actions: [Action; 2],
    pub case: InnerCase,
}

impl InnerNe {
    pub fn action(&self, i: usize) -> Action {
        self.actions[i - 1]
    }
}

/// Candidate fully-operating equilibrium price of manufacturer `i`: the
/// simultaneous solution of the two best-response lines.
fn fully_operating_price(i: usize, q: f64, params: &MarketParams) -> f64 {
    let j = 3 - i;
    let eps = params.eps;
    let c_i = params.c_m(i) + q;
    let c_j = params.c_m(j) + q;
    (eps * (params.dbar(j) + c_j * params.alpha(j)) + 2.0 * (params.dbar(i) + c_i * params.alpha(i)))
        / ((4.0 - eps * eps) * params.alpha(i))
}

/// Nash equilibrium of the inner game under quote `q`: both manufacturers at
/// the fully-operating prices when the weaker margin is nonnegative, a lone
/// operator at its base price when only the stronger margin survives, and
/// all-out otherwise. Labels are ordered internally by the margins.
pub fn inner_game_ne(q: f64, params: &MarketParams) -> Result<InnerNe> {
    params.validate()?;
    if !q.is_finite() || q < 0.0 {
        return Err(Error::InvalidPrice(q));
    }
    let p_star = [fully_operating_price(1, q, params), fully_operating_price(2, q, params)];
    let at_candidate = [
        margin(1, p_star[1], q, params),
        margin(2, p_star[0], q, params),
    ];
    // Weaker agent: the one with the smaller margin at the candidate prices.
    let (weak, strong) = if at_candidate[1] <= at_candidate[0] { (2, 1) } else { (1, 2) };
    if at_candidate[weak - 1] >= -margin_tol(weak, params) {
        return Ok(InnerNe {
            actions: [Action::Price(p_star[0]), Action::Price(p_star[1])],
            case: InnerCase::BothOperate,
        });
    }
    if margin(strong, 0.0, q, params) >= -margin_tol(strong, params) {
        let mut actions = [Action::NoOperate, Action::NoOperate];
        actions[strong - 1] = Action::Price(base_price(strong, q, params));
        return Ok(InnerNe {
            actions,
            case: InnerCase::OnlyOne(strong),
        });
    }
    Ok(InnerNe {
        actions: [Action::NoOperate, Action::NoOperate],
        case: InnerCase::NoneOperate,
    })
}
