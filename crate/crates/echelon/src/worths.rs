//! Assembly of the partition-form worth table: each coalition's worth under
//! each partition containing it, and the pessimal anticipated worths used by
//! the blocking tests.

use std::collections::BTreeMap;

use crate::equilibria::{alc_sbe, gc_optimum, hc_sbe, vc_sbe};
use crate::error::{Error, Result};
use crate::model::{enumerate_partitions, Coalition, Configuration, MarketParams, Partition};

/// The map `(partition, coalition) -> worth`, defined exactly for the
/// coalitions belonging to each partition (ten entries in all).
#[derive(Debug, Clone, PartialEq)]
pub struct WorthTable {
    entries: BTreeMap<(Partition, Coalition), f64>,
    pub params: MarketParams,
}

impl WorthTable {
    pub fn worth(&self, partition: Partition, coalition: Coalition) -> Result<f64> {
        self.entries
            .get(&(partition, coalition))
            .copied()
            .ok_or(Error::MissingWorth {
                partition,
                coalition,
            })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Partition, Coalition), &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest absolute worth, the scale used for comparison tolerances.
    pub fn scale(&self) -> f64 {
        self.entries
            .values()
            .fold(1.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Rows `{coalition, partition, worth}` in partition order, ready for
    /// serialization.
    pub fn to_rows(&self) -> Vec<(Partition, Coalition, f64)> {
        let mut rows = Vec::with_capacity(10);
        for p in enumerate_partitions() {
            for c in p.coalitions() {
                if let Some(w) = self.entries.get(&(p, c)) {
                    rows.push((p, c, *w));
                }
            }
        }
        rows
    }
}

/// Solves every partition and collects the ten worths.
pub fn compute_worth_table(params: &MarketParams) -> Result<WorthTable> {
    params.validate()?;
    let mut entries = BTreeMap::new();
    let gc = gc_optimum(params)?;
    entries.insert((Partition::Grand, Coalition::G), gc.utility(Coalition::G));
    let hc = hc_sbe(params)?;
    entries.insert((Partition::Horizontal, Coalition::S), hc.utility(Coalition::S));
    entries.insert((Partition::Horizontal, Coalition::M), hc.utility(Coalition::M));
    let v1 = vc_sbe(1, params)?;
    entries.insert((Partition::Vertical1, Coalition::V1), v1.utility(Coalition::V1));
    entries.insert((Partition::Vertical1, Coalition::M2), v1.utility(Coalition::M2));
    let v2 = vc_sbe(2, params)?;
    entries.insert((Partition::Vertical2, Coalition::V2), v2.utility(Coalition::V2));
    entries.insert((Partition::Vertical2, Coalition::M1), v2.utility(Coalition::M1));
    let alc = alc_sbe(params)?;
    for c in [Coalition::S, Coalition::M1, Coalition::M2] {
        entries.insert((Partition::AllAlone, c), alc.utility(c));
    }
    Ok(WorthTable {
        entries,
        params: *params,
    })
}

/// Pessimal anticipated worth: the minimum worth of `coalition` over every
/// partition containing it.
pub fn pessimal_worth(coalition: Coalition, table: &WorthTable) -> Result<f64> {
    let mut min: Option<f64> = None;
    for p in enumerate_partitions() {
        if !p.contains(coalition) {
            continue;
        }
        let w = table.worth(p, coalition)?;
        min = Some(min.map_or(w, |m: f64| m.min(w)));
    }
    min.ok_or(Error::InvalidParams(format!(
        "coalition {coalition} belongs to no partition"
    )))
}

/// The worth damped by the essentialness scales: `(1-gamma)(1-eps) nu`.
pub fn scaled_worth(params: &MarketParams, coalition: Coalition, partition: Partition) -> Result<f64> {
    if params.eps >= 1.0 || params.gamma >= 1.0 {
        return Err(Error::InvalidParams("scaled worths need eps < 1 and gamma < 1".into()));
    }
    let nu = worth_for(params, coalition, partition)?;
    Ok((1.0 - params.gamma) * (1.0 - params.eps) * nu)
}

/// Worth of one `(coalition, partition)` pair without building the full table.
pub fn worth_for(params: &MarketParams, coalition: Coalition, partition: Partition) -> Result<f64> {
    if !partition.contains(coalition) {
        return Err(Error::MissingWorth { partition, coalition });
    }
    let outcome = match partition {
        Partition::Grand => gc_optimum(params)?,
        Partition::Horizontal => hc_sbe(params)?,
        Partition::Vertical1 => vc_sbe(1, params)?,
        Partition::Vertical2 => vc_sbe(2, params)?,
        Partition::AllAlone => alc_sbe(params)?,
    };
    Ok(outcome.utility(coalition))
}

/// True when every member coalition's payoff total matches its worth within
/// `tol * max(1, |worth|)`.
pub fn is_consistent(config: &Configuration, table: &WorthTable, tol: f64) -> Result<bool> {
    for c in config.partition.coalitions() {
        let worth = table.worth(config.partition, c)?;
        let total = config.payoff.coalition_sum(c);
        if (total - worth).abs() > tol * worth.abs().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PayoffVector;

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
    fn table_has_ten_entries_matching_hand_instance() {
        let t = compute_worth_table(&params(0.5)).unwrap();
        assert_eq!(t.len(), 10);
        let w = |p, c| t.worth(p, c).unwrap();
        assert!((w(Partition::Grand, Coalition::G) - 81.0).abs() < 1e-9);
        assert!((w(Partition::Horizontal, Coalition::S) - 40.5).abs() < 1e-9);
        assert!((w(Partition::Horizontal, Coalition::M) - 20.25).abs() < 1e-9);
        assert!((w(Partition::Vertical1, Coalition::V1) - 70.875).abs() < 1e-9);
        assert!((w(Partition::Vertical1, Coalition::M2) - 5.0625).abs() < 1e-9);
        assert!((w(Partition::Vertical2, Coalition::V2) - 70.875).abs() < 1e-9);
        assert!((w(Partition::Vertical2, Coalition::M1) - 5.0625).abs() < 1e-9);
        assert!((w(Partition::AllAlone, Coalition::S) - 54.0).abs() < 1e-9);
        assert!((w(Partition::AllAlone, Coalition::M1) - 9.0).abs() < 1e-9);
        assert!((w(Partition::AllAlone, Coalition::M2) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn eps_zero_alc_worths_sum_single_chains() {
        let t = compute_worth_table(&params(0.0)).unwrap();
        assert!((t.worth(Partition::AllAlone, Coalition::S).unwrap() - 16.0).abs() < 1e-9);
        assert!((t.worth(Partition::AllAlone, Coalition::M1).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn pessimal_worths_hand_instance() {
        let t = compute_worth_table(&params(0.5)).unwrap();
        assert!((pessimal_worth(Coalition::V1, &t).unwrap() - 70.875).abs() < 1e-9);
        assert!((pessimal_worth(Coalition::S, &t).unwrap() - 40.5).abs() < 1e-9);
        assert!((pessimal_worth(Coalition::M1, &t).unwrap() - 5.0625).abs() < 1e-9);
        assert!((pessimal_worth(Coalition::M, &t).unwrap() - 20.25).abs() < 1e-9);
        assert!((pessimal_worth(Coalition::G, &t).unwrap() - 81.0).abs() < 1e-9);
    }

    #[test]
    fn consistency_checks() {
        let t = compute_worth_table(&params(0.5)).unwrap();
        let alc = Configuration {
            partition: Partition::AllAlone,
            payoff: PayoffVector::new(54.0, 9.0, 9.0),
        };
        assert!(is_consistent(&alc, &t, 1e-9).unwrap());

        let gc_ok = Configuration {
            partition: Partition::Grand,
            payoff: PayoffVector::new(60.0, 11.0, 10.0),
        };
        assert!(is_consistent(&gc_ok, &t, 1e-9).unwrap());
        let gc_bad = Configuration {
            partition: Partition::Grand,
            payoff: PayoffVector::new(66.0, 11.0, 10.0),
        };
        assert!(!is_consistent(&gc_bad, &t, 1e-9).unwrap());

        let v1_bad = Configuration {
            partition: Partition::Vertical1,
            payoff: PayoffVector::new(60.0, 10.875, 6.0),
        };
        assert!(!is_consistent(&v1_bad, &t, 1e-9).unwrap());
    }

    #[test]
    fn scaled_worth_is_a_simple_rescale() {
        let mut p = params(0.0);
        p.gamma = 0.5;
        let nu = worth_for(&p, Coalition::G, Partition::Grand).unwrap();
        let s = scaled_worth(&p, Coalition::G, Partition::Grand).unwrap();
        assert!((s - 0.5 * nu).abs() < 1e-12);
    }
}
