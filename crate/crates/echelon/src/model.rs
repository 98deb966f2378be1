//! Domain types for the two-echelon chain: agents, coalitions, partitions,
//! market parameters, actions and the demand system.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three agents: one supplier at the upper echelon, two manufacturers
/// facing the customers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Agent {
    Supplier,
    Manufacturer1,
    Manufacturer2,
}

impl Agent {
    pub const ALL: [Agent; 3] = [Agent::Supplier, Agent::Manufacturer1, Agent::Manufacturer2];

    fn bit(self) -> u8 {
        match self {
            Agent::Supplier => 0b001,
            Agent::Manufacturer1 => 0b010,
            Agent::Manufacturer2 => 0b100,
        }
    }
}

/// A nonempty set of agents operating as one unit.
///
/// Stored as a 3-bit set; the seven possible values carry the usual names:
/// `S`, `M1`, `M2`, `M` = {M1,M2}, `V1` = {S,M1}, `V2` = {S,M2}, `G` = all.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u8);

impl Coalition {
    pub const S: Coalition = Coalition(0b001);
    pub const M1: Coalition = Coalition(0b010);
    pub const M2: Coalition = Coalition(0b100);
    pub const M: Coalition = Coalition(0b110);
    pub const V1: Coalition = Coalition(0b011);
    pub const V2: Coalition = Coalition(0b101);
    pub const G: Coalition = Coalition(0b111);

    /// All seven nonempty coalitions, in label order S, M1, M2, M, V1, V2, G.
    pub const ALL: [Coalition; 7] = [
        Coalition::S,
        Coalition::M1,
        Coalition::M2,
        Coalition::M,
        Coalition::V1,
        Coalition::V2,
        Coalition::G,
    ];

    pub fn from_members(members: &[Agent]) -> Result<Coalition> {
        let mut bits = 0u8;
        for a in members {
            bits |= a.bit();
        }
        if bits == 0 {
            return Err(Error::InvalidParams("coalition must be nonempty".into()));
        }
        Ok(Coalition(bits))
    }

    pub fn members(self) -> Vec<Agent> {
        Agent::ALL
            .iter()
            .copied()
            .filter(|a| self.contains(*a))
            .collect()
    }

    pub fn contains(self, agent: Agent) -> bool {
        self.0 & agent.bit() != 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Proper nonempty subsets, in label order.
    pub fn proper_subsets(self) -> Vec<Coalition> {
        Coalition::ALL
            .iter()
            .copied()
            .filter(|c| c.is_subset_of(self) && *c != self)
            .collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            Coalition::S => "S",
            Coalition::M1 => "M1",
            Coalition::M2 => "M2",
            Coalition::M => "M",
            Coalition::V1 => "V1",
            Coalition::V2 => "V2",
            Coalition::G => "G",
            _ => unreachable!("nonempty 3-bit coalition"),
        }
    }

    pub fn parse(label: &str) -> Result<Coalition> {
        Coalition::ALL
            .iter()
            .copied()
            .find(|c| c.label() == label)
            .ok_or_else(|| Error::InvalidParams(format!("unknown coalition `{label}`")))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The five operating arrangements of {S, M1, M2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partition {
    /// GC: everyone operates as one unit.
    Grand,
    /// ALC: all three agents operate alone.
    AllAlone,
    /// HC: the manufacturers merge and face the supplier.
    Horizontal,
    /// VC1: the supplier pairs with M1; M2 stays alone.
    Vertical1,
    /// VC2: the supplier pairs with M2; M1 stays alone.
    Vertical2,
}

impl Partition {
    /// Display/CLI labels: GC, ALC, HC, VC1, VC2.
    pub fn label(self) -> &'static str {
        match self {
            Partition::Grand => "GC",
            Partition::AllAlone => "ALC",
            Partition::Horizontal => "HC",
            Partition::Vertical1 => "VC1",
            Partition::Vertical2 => "VC2",
        }
    }

    pub fn parse(label: &str) -> Result<Partition> {
        enumerate_partitions()
            .into_iter()
            .find(|p| p.label() == label)
            .ok_or_else(|| Error::InvalidParams(format!("unknown partition `{label}`")))
    }

    /// Member coalitions, pairwise disjoint and covering all three agents.
    pub fn coalitions(self) -> Vec<Coalition> {
        match self {
            Partition::Grand => vec![Coalition::G],
            Partition::AllAlone => vec![Coalition::S, Coalition::M1, Coalition::M2],
            Partition::Horizontal => vec![Coalition::S, Coalition::M],
            Partition::Vertical1 => vec![Coalition::V1, Coalition::M2],
            Partition::Vertical2 => vec![Coalition::V2, Coalition::M1],
        }
    }

    pub fn contains(self, coalition: Coalition) -> bool {
        self.coalitions().contains(&coalition)
    }

    /// Coalitions that quote a retail price to the customers.
    pub fn customer_facing(self) -> Vec<Coalition> {
        match self {
            Partition::Grand => vec![Coalition::G],
            Partition::AllAlone => vec![Coalition::M1, Coalition::M2],
            Partition::Horizontal => vec![Coalition::M],
            Partition::Vertical1 => vec![Coalition::V1, Coalition::M2],
            Partition::Vertical2 => vec![Coalition::V2, Coalition::M1],
        }
    }

    /// The coalition holding the supplier when a wholesale market exists.
    /// `None` for GC, where no raw material is sold.
    pub fn supplier_side(self) -> Option<Coalition> {
        match self {
            Partition::Grand => None,
            Partition::AllAlone | Partition::Horizontal => Some(Coalition::S),
            Partition::Vertical1 => Some(Coalition::V1),
            Partition::Vertical2 => Some(Coalition::V2),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The five partitions of three agents, exhaustive and duplicate-free.
pub fn enumerate_partitions() -> [Partition; 5] {
    [
        Partition::Grand,
        Partition::AllAlone,
        Partition::Horizontal,
        Partition::Vertical1,
        Partition::Vertical2,
    ]
}

/// All exogenous market symbols.
///
/// `alpha_i = alphaTilde_i * (1 - gamma)` is the effective price sensitivity;
/// `eps` is the cross-linking factor (the fraction of price-repelled customers
/// who switch to the rival) and `gamma` the essentialness of the product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub dbar1: f64,
    pub dbar2: f64,
    #[serde(rename = "alphaTilde1")]
    pub alpha_tilde1: f64,
    #[serde(rename = "alphaTilde2")]
    pub alpha_tilde2: f64,
    pub eps: f64,
    pub gamma: f64,
    #[serde(rename = "cS")]
    pub c_s: f64,
    #[serde(rename = "cM1")]
    pub c_m1: f64,
    #[serde(rename = "cM2")]
    pub c_m2: f64,
    #[serde(rename = "oS")]
    pub o_s: f64,
    #[serde(rename = "oM1")]
    pub o_m1: f64,
    #[serde(rename = "oM2")]
    pub o_m2: f64,
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.dbar1,
            self.dbar2,
            self.alpha_tilde1,
            self.alpha_tilde2,
            self.eps,
            self.gamma,
            self.c_s,
            self.c_m1,
            self.c_m2,
            self.o_s,
            self.o_m1,
            self.o_m2,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.dbar1 < 0.0 || self.dbar2 < 0.0 {
            return Err(Error::InvalidParams("market sizes must be >= 0".into()));
        }
        if self.alpha_tilde1 <= 0.0 || self.alpha_tilde2 <= 0.0 {
            return Err(Error::InvalidParams("price sensitivities must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidParams("eps must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParams("gamma must lie in [0, 1)".into()));
        }
        if self.c_s < 0.0 || self.c_m1 < 0.0 || self.c_m2 < 0.0 {
            return Err(Error::InvalidParams("per-unit costs must be >= 0".into()));
        }
        if self.o_s < 0.0 || self.o_m1 < 0.0 || self.o_m2 < 0.0 {
            return Err(Error::InvalidParams("operating costs must be >= 0".into()));
        }
        Ok(())
    }

    /// Effective price sensitivity of market `i` (1-based).
    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha_tilde(i) * (1.0 - self.gamma)
    }

    pub fn alpha_tilde(&self, i: usize) -> f64 {
        match i {
            1 => self.alpha_tilde1,
            2 => self.alpha_tilde2,
            _ => panic!("manufacturer index must be 1 or 2"),
        }
    }

    pub fn dbar(&self, i: usize) -> f64 {
        match i {
            1 => self.dbar1,
            2 => self.dbar2,
            _ => panic!("manufacturer index must be 1 or 2"),
        }
    }

    pub fn c_m(&self, i: usize) -> f64 {
        match i {
            1 => self.c_m1,
            2 => self.c_m2,
            _ => panic!("manufacturer index must be 1 or 2"),
        }
    }

    pub fn o_m(&self, i: usize) -> f64 {
        match i {
            1 => self.o_m1,
            2 => self.o_m2,
            _ => panic!("manufacturer index must be 1 or 2"),
        }
    }

    /// Total market size of the merged manufacturer block.
    pub fn dbar_m(&self) -> f64 {
        self.dbar1 + self.dbar2
    }

    /// Merged-block sensitivity: the best (lowest) of the two.
    pub fn alpha_m(&self) -> f64 {
        self.alpha(1).min(self.alpha(2))
    }

    /// Combined per-unit cost of the grand coalition.
    pub fn c_g(&self) -> f64 {
        self.c_s + self.c_m1.min(self.c_m2)
    }

    /// Combined fixed cost of the grand coalition.
    pub fn o_g(&self) -> f64 {
        self.o_s + self.o_m1.min(self.o_m2)
    }

    /// Operating-viability assumption: the total market size exceeds
    /// `alphaM*cG + 2*sqrt(alphaM*O)` with `O = max(2 oS, oG, 4 min(oM1, oM2))`.
    pub fn satisfies_a2(&self) -> bool {
        let big_o = (2.0 * self.o_s)
            .max(self.o_g())
            .max(4.0 * self.o_m1.min(self.o_m2));
        self.dbar_m() > self.alpha_m() * self.c_g() + 2.0 * (self.alpha_m() * big_o).sqrt()
    }
}

/// A single decision: stay out, or quote a price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    NoOperate,
    Price(f64),
}

impl Action {
    pub fn operates(&self) -> bool {
        matches!(self, Action::Price(_))
    }

    pub fn price(&self) -> Option<f64> {
        match self {
            Action::Price(p) => Some(*p),
            Action::NoOperate => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Action::Price(p) = self {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidPrice(*p));
            }
        }
        Ok(())
    }
}

/// What one coalition does, in the variant its position allows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoalitionAction {
    NoOperate,
    /// Customer-facing coalition quoting a retail price.
    Retail { price: f64 },
    /// Supplier alone, quoting only the wholesale price.
    Wholesale { quote: f64 },
    /// Vertical coalition: a retail price for its own market plus a
    /// wholesale quote for the outside manufacturer.
    RetailAndWholesale { price: f64, quote: f64 },
}

impl CoalitionAction {
    pub fn operates(&self) -> bool {
        !matches!(self, CoalitionAction::NoOperate)
    }

    pub fn retail_price(&self) -> Option<f64> {
        match self {
            CoalitionAction::Retail { price } => Some(*price),
            CoalitionAction::RetailAndWholesale { price, .. } => Some(*price),
            _ => None,
        }
    }

    pub fn wholesale_quote(&self) -> Option<f64> {
        match self {
            CoalitionAction::Wholesale { quote } => Some(*quote),
            CoalitionAction::RetailAndWholesale { quote, .. } => Some(*quote),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        for v in [self.retail_price(), self.wholesale_quote()].into_iter().flatten() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidPrice(v));
            }
        }
        Ok(())
    }
}

/// The action bundle of every coalition in a partition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionProfile {
    actions: BTreeMap<Coalition, CoalitionAction>,
}

impl ActionProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, coalition: Coalition, action: CoalitionAction) -> Self {
        self.actions.insert(coalition, action);
        self
    }

    pub fn set(&mut self, coalition: Coalition, action: CoalitionAction) {
        self.actions.insert(coalition, action);
    }

    pub fn action(&self, coalition: Coalition) -> CoalitionAction {
        self.actions
            .get(&coalition)
            .copied()
            .unwrap_or(CoalitionAction::NoOperate)
    }

    pub fn operates(&self, coalition: Coalition) -> bool {
        self.action(coalition).operates()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coalition, &CoalitionAction)> {
        self.actions.iter()
    }

    /// Checks the profile against the partition's shape: the supplier-side
    /// coalition carries a quote when it operates, every operating
    /// customer-facing coalition carries a retail price, and prices are
    /// finite and nonnegative.
    pub fn validate_for(&self, partition: Partition) -> Result<()> {
        let mismatch = |reason: &str| Error::ProfileMismatch {
            partition,
            reason: reason.to_string(),
        };
        for (c, a) in &self.actions {
            a.validate()?;
            if !partition.contains(*c) {
                return Err(mismatch(&format!("{c} is not a member of the partition")));
            }
        }
        for c in partition.coalitions() {
            let a = self.action(c);
            if !a.operates() {
                continue;
            }
            let facing = partition.customer_facing().contains(&c);
            let supplier_side = partition.supplier_side() == Some(c);
            if facing && a.retail_price().is_none() {
                return Err(mismatch(&format!("{c} operates but quotes no retail price")));
            }
            if supplier_side && a.wholesale_quote().is_none() {
                return Err(mismatch(&format!("{c} operates but quotes no wholesale price")));
            }
            if !facing && a.retail_price().is_some() {
                return Err(mismatch(&format!("{c} is not customer-facing")));
            }
            if !supplier_side && a.wholesale_quote().is_some() {
                return Err(mismatch(&format!("{c} cannot quote a wholesale price")));
            }
        }
        Ok(())
    }
}

/// Demand attracted by each operating customer-facing coalition.
///
/// Separate manufacturers split the market by price and cross-linking:
/// `D_i = max(0, dbar_i - alpha_i p_i + eps alpha_{-i} p_{-i})` with a
/// non-operating opponent contributing `p_{-i} = 0`. A merged block (M or G)
/// faces `D = max(0, dbarM - alphaM p)` with no cross term.
pub fn demand_profile(
    params: &MarketParams,
    partition: Partition,
    actions: &ActionProfile,
) -> Result<BTreeMap<Coalition, f64>> {
    params.validate()?;
    actions.validate_for(partition)?;
    let mut out = BTreeMap::new();
    match partition {
        Partition::Grand | Partition::Horizontal => {
            let block = if partition == Partition::Grand {
                Coalition::G
            } else {
                Coalition::M
            };
            if let Some(p) = actions.action(block).retail_price() {
                let d = params.dbar_m() - params.alpha_m() * p;
                out.insert(block, d.max(0.0));
            }
        }
        Partition::AllAlone | Partition::Vertical1 | Partition::Vertical2 => {
            // Customer-facing sides own markets 1 and 2 respectively.
            let side = |i: usize| match (partition, i) {
                (Partition::Vertical1, 1) => Coalition::V1,
                (Partition::Vertical2, 2) => Coalition::V2,
                (_, 1) => Coalition::M1,
                (_, 2) => Coalition::M2,
                _ => unreachable!(),
            };
            for i in [1usize, 2] {
                let c = side(i);
                let Some(p_i) = actions.action(c).retail_price() else {
                    continue;
                };
                let other = side(3 - i);
                let p_other = actions.action(other).retail_price().unwrap_or(0.0);
                let d = params.dbar(i) - params.alpha(i) * p_i
                    + params.eps * params.alpha(3 - i) * p_other;
                out.insert(c, d.max(0.0));
            }
        }
    }
    Ok(out)
}

/// Per-agent payoff allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffVector {
    pub x_s: f64,
    pub x_m1: f64,
    pub x_m2: f64,
}

impl PayoffVector {
    pub fn new(x_s: f64, x_m1: f64, x_m2: f64) -> Self {
        Self { x_s, x_m1, x_m2 }
    }

    pub fn agent(&self, agent: Agent) -> f64 {
        match agent {
            Agent::Supplier => self.x_s,
            Agent::Manufacturer1 => self.x_m1,
            Agent::Manufacturer2 => self.x_m2,
        }
    }

    /// Total payoff of a coalition's members.
    pub fn coalition_sum(&self, coalition: Coalition) -> f64 {
        coalition.members().iter().map(|a| self.agent(*a)).sum()
    }
}

/// A partition together with a payoff vector intended to be consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub partition: Partition,
    pub payoff: PayoffVector,
}

/// Which coalitions may oppose a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockerPolicy {
    /// Every nonempty coalition outside the partition.
    #[default]
    Full,
    /// Mergers of whole members plus splits of single members.
    MergersSplits,
    /// `MergersSplits` plus the manufacturer pair {M1,M2}, which is neither
    /// a merger nor a split of a vertical partition but is admitted by the
    /// restricted analysis.
    Theorem3iii,
}

impl BlockerPolicy {
    pub fn parse(label: &str) -> Result<BlockerPolicy> {
        match label {
            "full" => Ok(BlockerPolicy::Full),
            "mergers-splits" => Ok(BlockerPolicy::MergersSplits),
            "theorem3iii" => Ok(BlockerPolicy::Theorem3iii),
            _ => Err(Error::InvalidParams(format!("unknown blocker policy `{label}`"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BlockerPolicy::Full => "full",
            BlockerPolicy::MergersSplits => "mergers-splits",
            BlockerPolicy::Theorem3iii => "theorem3iii",
        }
    }
}

/// Coalitions admitted as potential blockers of `partition` under `policy`,
/// in label order; members of the partition are never included.
pub fn admissible_blockers(partition: Partition, policy: BlockerPolicy) -> Vec<Coalition> {
    let members = partition.coalitions();
    let admitted: Vec<Coalition> = match policy {
        BlockerPolicy::Full => Coalition::ALL.to_vec(),
        BlockerPolicy::MergersSplits | BlockerPolicy::Theorem3iii => {
            let mut set: Vec<Coalition> = Vec::new();
            // Mergers: unions of two or more whole members.
            for mask in 1u8..(1 << members.len()) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let mut merged = Coalition(0);
                for (bit, member) in members.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        merged = merged.union(*member);
                    }
                }
                set.push(merged);
            }
            // Splits: proper nonempty subsets of a single member.
            for member in &members {
                set.extend(member.proper_subsets());
            }
            if policy == BlockerPolicy::Theorem3iii {
                set.push(Coalition::M);
            }
            set
        }
    };
    let mut out: Vec<Coalition> = Coalition::ALL
        .iter()
        .copied()
        .filter(|c| admitted.contains(c) && !members.contains(c))
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_params(eps: f64) -> MarketParams {
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
    fn enumeration_is_exhaustive_and_valid() {
        let parts = enumerate_partitions();
        assert_eq!(parts.len(), 5);
        for p in parts {
            let cs = p.coalitions();
            let mut union = 0u8;
            for c in &cs {
                assert_eq!(union & c.0, 0, "members of {p} overlap");
                union |= c.0;
            }
            assert_eq!(union, Coalition::G.0, "members of {p} must cover all agents");
        }
        assert_ne!(Partition::Vertical1, Partition::Vertical2);
    }

    #[test]
    fn demand_single_market_eps_zero() {
        let mut params = symmetric_params(0.0);
        params.dbar2 = 0.0;
        let actions = ActionProfile::new()
            .with(Coalition::S, CoalitionAction::Wholesale { quote: 0.0 })
            .with(Coalition::M1, CoalitionAction::Retail { price: 4.0 });
        let d = demand_profile(&params, Partition::AllAlone, &actions).unwrap();
        assert_eq!(d[&Coalition::M1], 6.0);
        assert!(!d.contains_key(&Coalition::M2));
    }

    #[test]
    fn demand_cross_term() {
        let params = symmetric_params(0.5);
        let actions = ActionProfile::new()
            .with(Coalition::S, CoalitionAction::Wholesale { quote: 10.0 })
            .with(Coalition::M1, CoalitionAction::Retail { price: 14.0 })
            .with(Coalition::M2, CoalitionAction::Retail { price: 14.0 });
        let d = demand_profile(&params, Partition::AllAlone, &actions).unwrap();
        assert_eq!(d[&Coalition::M1], 3.0);
        assert_eq!(d[&Coalition::M2], 3.0);
    }

    #[test]
    fn demand_merged_block() {
        let params = symmetric_params(0.5);
        let actions = ActionProfile::new().with(Coalition::G, CoalitionAction::Retail { price: 6.0 });
        let d = demand_profile(&params, Partition::Grand, &actions).unwrap();
        assert_eq!(d[&Coalition::G], 14.0);
    }

    #[test]
    fn demand_clamps_at_zero() {
        let mut params = symmetric_params(0.0);
        params.dbar1 = 1.0;
        let actions = ActionProfile::new()
            .with(Coalition::S, CoalitionAction::Wholesale { quote: 0.0 })
            .with(Coalition::M1, CoalitionAction::Retail { price: 5.0 });
        let d = demand_profile(&params, Partition::AllAlone, &actions).unwrap();
        assert_eq!(d[&Coalition::M1], 0.0);
    }

    #[test]
    fn negative_price_rejected() {
        let params = symmetric_params(0.0);
        let actions = ActionProfile::new()
            .with(Coalition::S, CoalitionAction::Wholesale { quote: 1.0 })
            .with(Coalition::M1, CoalitionAction::Retail { price: -1.0 });
        assert!(matches!(
            demand_profile(&params, Partition::AllAlone, &actions),
            Err(Error::InvalidPrice(_))
        ));
    }

    #[test]
    fn profile_shape_is_checked() {
        let params = symmetric_params(0.0);
        // Retail price on the supplier is not a valid ALC profile.
        let actions = ActionProfile::new().with(Coalition::S, CoalitionAction::Retail { price: 1.0 });
        assert!(matches!(
            demand_profile(&params, Partition::AllAlone, &actions),
            Err(Error::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn blockers_all_alone() {
        let full = admissible_blockers(Partition::AllAlone, BlockerPolicy::Full);
        assert_eq!(full, vec![Coalition::M, Coalition::V1, Coalition::V2, Coalition::G]);
        let ms = admissible_blockers(Partition::AllAlone, BlockerPolicy::MergersSplits);
        assert_eq!(ms, full);
    }

    #[test]
    fn blockers_vertical() {
        let ms = admissible_blockers(Partition::Vertical1, BlockerPolicy::MergersSplits);
        assert_eq!(ms, vec![Coalition::S, Coalition::M1, Coalition::G]);
        let t3 = admissible_blockers(Partition::Vertical1, BlockerPolicy::Theorem3iii);
        assert_eq!(t3, vec![Coalition::S, Coalition::M1, Coalition::M, Coalition::G]);
    }

    #[test]
    fn blockers_union_covers_everything() {
        for p in enumerate_partitions() {
            let mut all: Vec<Coalition> = admissible_blockers(p, BlockerPolicy::Full);
            all.extend(p.coalitions());
            all.sort();
            all.dedup();
            assert_eq!(all.len(), 7, "partition {p}");
        }
    }

    #[test]
    fn a2_matches_hand_instance() {
        let params = symmetric_params(0.5);
        // dbarM = 20 > 2 + 0 with zero fixed costs.
        assert!(params.satisfies_a2());
        let mut heavy = params;
        heavy.o_s = 1e6;
        assert!(!heavy.satisfies_a2());
    }

    #[test]
    fn params_json_round_trip_uses_spec_keys() {
        let json = r#"{
            "dbar1": 10.0, "dbar2": 10.0,
            "alphaTilde1": 1.0, "alphaTilde2": 1.0,
            "eps": 0.5, "gamma": 0.0,
            "cS": 1.0, "cM1": 1.0, "cM2": 1.0,
            "oS": 0.0, "oM1": 0.0, "oM2": 0.0
        }"#;
        let p: MarketParams = serde_json::from_str(json).unwrap();
        assert_eq!(p, symmetric_params(0.5));
        let back = serde_json::to_value(p).unwrap();
        for key in [
            "dbar1", "dbar2", "alphaTilde1", "alphaTilde2", "eps", "gamma", "cS", "cM1", "cM2",
            "oS", "oM1", "oM2",
        ] {
            assert!(back.get(key).is_some(), "missing key {key}");
        }
        // Unknown keys are rejected.
        assert!(serde_json::from_str::<MarketParams>(r#"{"dbar1": 1.0, "bogus": 2.0}"#).is_err());
    }
}
