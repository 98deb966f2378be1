//! Brute-force grid verifiers: monopoly pricing, the inner game by iterated
//! best responses, and one- and two-dimensional leader searches. These are
//! deliberately independent of the closed-form solvers so that each side can
//! check the other.

use crate::error::{Error, Result};
use crate::model::{Action, MarketParams};

/// A deterministic price grid `0, step, 2 step, ..., <= p_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub p_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(p_max: f64, step: f64) -> GridSpec {
        GridSpec { p_max, step }
    }

    /// Default grid: cap above the largest closed-form price candidate,
    /// 2000 cells.
    pub fn for_params(params: &MarketParams) -> GridSpec {
        let p_max = params.dbar_m() / params.alpha_m() + params.c_g() + 1.0;
        GridSpec {
            p_max,
            step: p_max / 2000.0,
        }
    }

    pub fn points(&self) -> GridIter {
        GridIter {
            next: 0.0,
            spec: *self,
        }
    }
}

pub struct GridIter {
    next: f64,
    spec: GridSpec,
}

impl Iterator for GridIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.next > self.spec.p_max {
            return None;
        }
        let v = self.next;
        self.next += self.spec.step;
        Some(v)
    }
}

/// Slope bound of the unclipped quadratic `(dbar - alpha p)(p - c)` on
/// `[0, p_max]`; the grid optimum is within `bound * step` of the true one.
pub fn lipschitz_bound(dbar: f64, alpha: f64, c: f64, p_max: f64) -> f64 {
    dbar + alpha * (p_max + c)
}

fn monopoly_utility(dbar: f64, alpha: f64, c: f64, oc: f64, p: f64) -> f64 {
    (dbar - alpha * p).max(0.0) * (p - c) - oc
}

/// Grid argmax of the monopoly objective over not operating and every grid
/// price. Ties prefer operating, then the smaller price.
pub fn grid_monopoly(dbar: f64, alpha: f64, c: f64, oc: f64, spec: &GridSpec) -> (Action, f64) {
    let mut best = (Action::NoOperate, 0.0);
    for p in spec.points() {
        let u = monopoly_utility(dbar, alpha, c, oc, p);
        let better = u > best.1 || (u == best.1 && !best.0.operates());
        if better {
            best = (Action::Price(p), u);
        }
    }
    best
}

fn inner_utility(i: usize, p_i: f64, p_other: f64, q: f64, params: &MarketParams) -> f64 {
    let j = 3 - i;
    let d = (params.dbar(i) - params.alpha(i) * p_i + params.eps * params.alpha(j) * p_other).max(0.0);
    d * (p_i - params.c_m(i) - q) - params.o_m(i)
}

fn grid_best_response(i: usize, other: Action, q: f64, params: &MarketParams, spec: &GridSpec) -> Action {
    let p_other = other.price().unwrap_or(0.0);
    let mut best = (Action::NoOperate, 0.0f64);
    for p in spec.points() {
        let u = inner_utility(i, p, p_other, q, params);
        let better = u > best.1 || (u == best.1 && !best.0.operates());
        if better {
            best = (Action::Price(p), u);
        }
    }
    best.0
}

/// Iterated exact grid best responses for the inner game, starting from each
/// manufacturer's grid-optimal price against an absent opponent. Errors when
/// no fixed point is reached within 1000 rounds.
pub fn grid_inner_ne(q: f64, params: &MarketParams, spec: &GridSpec) -> Result<(Action, Action)> {
    let mut a1 = grid_best_response(1, Action::NoOperate, q, params, spec);
    let mut a2 = grid_best_response(2, a1, q, params, spec);
    for _ in 0..1000 {
        let b1 = grid_best_response(1, a2, q, params, spec);
        let b2 = grid_best_response(2, b1, q, params, spec);
        if b1 == a1 && b2 == a2 {
            return Ok((a1, a2));
        }
        a1 = b1;
        a2 = b2;
    }
    Err(Error::OracleNonConvergence(1000))
}

/// Grid argmax of a leader objective over the quote. Ties go to the smaller
/// quote.
pub fn grid_stackelberg(objective: &dyn Fn(f64) -> f64, spec: &GridSpec) -> (f64, f64) {
    let mut best: Option<(f64, f64)> = None;
    for q in spec.points() {
        let v = objective(q);
        if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
            best = Some((v, q));
        }
    }
    let (value, q) = best.expect("grid is nonempty");
    (q, value)
}

/// Two-dimensional leader search over (price, quote): a coarse 300 x 300 scan
/// followed by one local pass at ten times the resolution around the
/// incumbent.
pub fn grid_stackelberg_2d(objective: &dyn Fn(f64, f64) -> f64, spec: &GridSpec) -> ((f64, f64), f64) {
    let coarse = spec.p_max / 300.0;
    let scan = |p_lo: f64, p_hi: f64, q_lo: f64, q_hi: f64, step: f64| -> ((f64, f64), f64) {
        let mut best: Option<((f64, f64), f64)> = None;
        let mut p = p_lo;
        while p <= p_hi {
            let mut q = q_lo;
            while q <= q_hi {
                let v = objective(p, q);
                if best.as_ref().map_or(true, |(_, bv)| v > *bv) {
                    best = Some(((p, q), v));
                }
                q += step;
            }
            p += step;
        }
        best.expect("grid is nonempty")
    };
    let ((p0, q0), _) = scan(0.0, spec.p_max, 0.0, spec.p_max, coarse);
    let fine = coarse / 10.0;
    let window = 2.0 * coarse;
    scan(
        (p0 - window).max(0.0),
        p0 + window,
        (q0 - window).max(0.0),
        q0 + window,
        fine,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::solve_quadratic_pricing;

    fn params(eps: f64) -> MarketParams {
        MarketParams {
            dbar1: 10.0,
            dbar2: 10.0,
            alpha_tilde1: 1.0,
            alpha_tilde2: 1.0,
            eps,
            gamma: 0.0,
            c_s: 1.0,
            c_m1: 2.0,
            c_m2: 2.0,
            o_s: 0.0,
            o_m1: 0.0,
            o_m2: 0.0,
        }
    }

    #[test]
    fn monopoly_grid_matches_closed_form() {
        let spec = GridSpec::new(10.0, 10.0 / 2000.0);
        let (action, value) = grid_monopoly(10.0, 2.0, 1.0, 3.0, &spec);
        let exact = solve_quadratic_pricing(10.0, 2.0, 1.0, 3.0).unwrap();
        let lip = lipschitz_bound(10.0, 2.0, 1.0, spec.p_max);
        assert!((value - exact.value).abs() <= lip * spec.step);
        let p = action.price().unwrap();
        assert!((p - exact.action.price().unwrap()).abs() <= 2.0 * spec.step);
    }

    #[test]
    fn monopoly_grid_stays_out_under_heavy_cost() {
        let spec = GridSpec::new(10.0, 0.01);
        let (action, value) = grid_monopoly(10.0, 2.0, 1.0, 1e6, &spec);
        assert_eq!(action, Action::NoOperate);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn monopoly_grid_boundary_case_near_zero() {
        // delta = 0 instance: value within the Lipschitz sandwich of 0.
        let spec = GridSpec::new(8.0, 8.0 / 2000.0);
        let (_, value) = grid_monopoly(4.0, 1.0, 0.0, 4.0, &spec);
        let lip = lipschitz_bound(4.0, 1.0, 0.0, spec.p_max);
        assert!(value.abs() <= lip * spec.step);
    }

    #[test]
    fn inner_grid_finds_symmetric_fixed_point() {
        let p = params(0.5);
        let spec = GridSpec::for_params(&p);
        let (a1, a2) = grid_inner_ne(0.0, &p, &spec).unwrap();
        assert!((a1.price().unwrap() - 8.0).abs() <= 2.0 * spec.step);
        assert!((a2.price().unwrap() - 8.0).abs() <= 2.0 * spec.step);
    }

    #[test]
    fn inner_grid_eps_zero_converges_immediately() {
        let p = params(0.0);
        let spec = GridSpec::for_params(&p);
        let (a1, a2) = grid_inner_ne(0.0, &p, &spec).unwrap();
        assert!((a1.price().unwrap() - 6.0).abs() <= 2.0 * spec.step);
        assert!((a2.price().unwrap() - 6.0).abs() <= 2.0 * spec.step);
    }

    #[test]
    fn inner_grid_case_two() {
        let mut p = params(0.5);
        p.dbar2 = 1.0;
        p.o_m2 = 5.0;
        let spec = GridSpec::for_params(&p);
        let (a1, a2) = grid_inner_ne(0.0, &p, &spec).unwrap();
        assert!((a1.price().unwrap() - 6.0).abs() <= 2.0 * spec.step);
        assert_eq!(a2, Action::NoOperate);
    }

    #[test]
    fn stackelberg_grid_single_chain() {
        // Supplier leading one manufacturer: reduced objective over q.
        let spec = GridSpec::new(12.0, 12.0 / 2000.0);
        let objective = |q: f64| -> f64 {
            match solve_quadratic_pricing(10.0, 1.0, 1.0 + q, 0.0).unwrap().action {
                Action::Price(p) => (10.0 - p).max(0.0) * (q - 1.0),
                Action::NoOperate => 0.0,
            }
        };
        let (q, value) = grid_stackelberg(&objective, &spec);
        assert!((q - 5.0).abs() <= 2.0 * spec.step);
        let lip = lipschitz_bound(10.0, 1.0, 1.0, spec.p_max);
        assert!((value - 8.0).abs() <= lip * spec.step);
    }

    #[test]
    fn refining_halves_the_gap() {
        let coarse = GridSpec::new(10.0, 0.08);
        let fine = GridSpec::new(10.0, 0.04);
        let exact = solve_quadratic_pricing(10.0, 2.0, 1.0, 3.0).unwrap().value;
        let (_, v_coarse) = grid_monopoly(10.0, 2.0, 1.0, 3.0, &coarse);
        let (_, v_fine) = grid_monopoly(10.0, 2.0, 1.0, 3.0, &fine);
        assert!(exact - v_fine <= (exact - v_coarse).max(0.0) + 1e-12);
    }
}
