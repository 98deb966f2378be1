//! Blocking tests and stable payoff regions.
//!
//! A coalition outside the partition blocks a configuration when its
//! pessimal anticipated worth strictly exceeds its members' current total.
//! The stable region of a partition is the set of consistent payoff vectors
//! no admissible blocker beats; with three agents the consistency equalities
//! reduce it to a zero-, one- or two-dimensional polytope solved exactly.

use crate::error::{Error, Result};
use crate::model::{
    admissible_blockers, enumerate_partitions, Agent, BlockerPolicy, Coalition, Configuration,
    Partition, PayoffVector,
};
use crate::worths::{pessimal_worth, WorthTable};

/// Absolute comparison tolerance relative to the worth scale.
pub fn blocking_tolerance(table: &WorthTable) -> f64 {
    1e-9 * table.scale().max(1.0)
}

/// Outcome of one blocking test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCheck {
    pub blocks: bool,
    /// `nu_C^pa - sum of the members' payoffs`; positive means the coalition
    /// anticipates more than the members currently get.
    pub deficit: f64,
}

/// Does `coalition` block the configuration? In the default (non-strict)
/// mode blocking needs a strictly better anticipation; in strict mode an
/// exactly matched anticipation already blocks, leaving only configurations
/// with real slack.
pub fn blocks(
    coalition: Coalition,
    config: &Configuration,
    table: &WorthTable,
    strict: bool,
) -> Result<BlockCheck> {
    if config.partition.contains(coalition) {
        return Err(Error::BlockerInPartition(coalition));
    }
    let tol = blocking_tolerance(table);
    let deficit = pessimal_worth(coalition, table)? - config.payoff.coalition_sum(coalition);
    let blocks = if strict { deficit > -tol } else { deficit > tol };
    Ok(BlockCheck { blocks, deficit })
}

/// Evidence that a coalition beats a specific payoff vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingCertificate {
    pub coalition: Coalition,
    pub deficit: f64,
    pub payoff: PayoffVector,
}

/// The stable payoff region of one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub partition: Partition,
    pub feasible: bool,
    pub witness: Option<PayoffVector>,
    /// Bounds of the free payoff coordinate for the one-dimensional
    /// partitions (`x_M1` for HC and VC1, `x_M2` for VC2).
    pub interval: Option<(f64, f64)>,
    /// For an empty region: the most-violated blocker at each candidate
    /// vertex.
    pub certificates: Vec<BlockingCertificate>,
}

/// Affine payoff parameterization `x(t) = constant + coefficient * t`.
#[derive(Clone, Copy)]
struct AffinePayoff {
    constant: [f64; 3],
    coefficient: [f64; 3],
}

impl AffinePayoff {
    fn at(&self, t: f64) -> PayoffVector {
        PayoffVector::new(
            self.constant[0] + self.coefficient[0] * t,
            self.constant[1] + self.coefficient[1] * t,
            self.constant[2] + self.coefficient[2] * t,
        )
    }

    fn sum_terms(&self, coalition: Coalition) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, agent) in Agent::ALL.iter().enumerate() {
            if coalition.contains(*agent) {
                a += self.constant[k];
                b += self.coefficient[k];
            }
        }
        (a, b)
    }
}

struct Constraints {
    blockers: Vec<(Coalition, f64)>,
    tol: f64,
    strict: bool,
}

impl Constraints {
    fn build(
        partition: Partition,
        table: &WorthTable,
        strict: bool,
        policy: BlockerPolicy,
    ) -> Result<Constraints> {
        let mut blockers = Vec::new();
        for c in admissible_blockers(partition, policy) {
            blockers.push((c, pessimal_worth(c, table)?));
        }
        Ok(Constraints {
            blockers,
            tol: blocking_tolerance(table),
            strict,
        })
    }

    /// No admissible blocker beats this payoff under the report's mode.
    fn survives(&self, payoff: PayoffVector) -> bool {
        let cutoff = if self.strict { -self.tol } else { self.tol };
        self.blockers
            .iter()
            .all(|(c, pa)| pa - payoff.coalition_sum(*c) <= cutoff)
    }

    fn certificate_at(&self, payoff: PayoffVector) -> Option<BlockingCertificate> {
        let mut best: Option<BlockingCertificate> = None;
        for (c, pa) in &self.blockers {
            let deficit = pa - payoff.coalition_sum(*c);
            if deficit > self.tol && best.as_ref().map_or(true, |b| deficit > b.deficit) {
                best = Some(BlockingCertificate {
                    coalition: *c,
                    deficit,
                    payoff,
                });
            }
        }
        best
    }

    fn collect_certificates(&self, points: impl IntoIterator<Item = PayoffVector>) -> Vec<BlockingCertificate> {
        let mut certificates: Vec<BlockingCertificate> = Vec::new();
        for payoff in points {
            if let Some(cert) = self.certificate_at(payoff) {
                if !certificates.iter().any(|c| c.coalition == cert.coalition) {
                    certificates.push(cert);
                }
            }
        }
        certificates
    }
}

fn point_region(partition: Partition, payoff: PayoffVector, cons: &Constraints) -> Region {
    let feasible = cons.survives(payoff);
    Region {
        partition,
        feasible,
        witness: feasible.then_some(payoff),
        interval: None,
        certificates: if feasible {
            vec![]
        } else {
            cons.collect_certificates([payoff])
        },
    }
}

/// Deterministic probe points inside `[lo, hi]`, outermost last.
fn probes(lo: f64, hi: f64, fallback: f64) -> Vec<f64> {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let w = hi - lo;
            vec![lo + 0.5 * w, lo + 0.25 * w, lo + 0.75 * w, lo, hi]
        }
        (true, false) => vec![lo + 1.0, lo],
        (false, true) => vec![hi - 1.0, hi],
        (false, false) => vec![fallback],
    }
}

fn line_region(partition: Partition, affine: AffinePayoff, cons: &Constraints) -> Region {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (c, pa) in &cons.blockers {
        let (a, b) = affine.sum_terms(*c);
        if b > 0.5 {
            lo = lo.max((pa - a) / b);
        } else if b < -0.5 {
            hi = hi.min((pa - a) / b);
        }
        // b = 0 constraints are pure gates; the survival check covers them.
    }
    let interval = Some((lo, hi));
    // Padded by the comparison tolerance so an exactly-binding point region
    // is still probed; each probe is verified, so this stays sound.
    if lo <= hi + cons.tol {
        for t in probes(lo, hi, 0.0) {
            let payoff = affine.at(t);
            if cons.survives(payoff) {
                return Region {
                    partition,
                    feasible: true,
                    witness: Some(payoff),
                    interval,
                    certificates: vec![],
                };
            }
        }
    }
    let mut vertices = Vec::new();
    for t in [lo, hi, 0.0] {
        if t.is_finite() {
            vertices.push(affine.at(t));
        }
    }
    Region {
        partition,
        feasible: false,
        witness: None,
        interval,
        certificates: cons.collect_certificates(vertices),
    }
}

fn grand_region(table: &WorthTable, cons: &Constraints) -> Result<Region> {
    let nu_g = table.worth(Partition::Grand, Coalition::G)?;
    // In (x_M1, x_M2) with x_S = nu_G - x_M1 - x_M2, the six possible
    // constraints are box bounds plus a band on the sum.
    let mut lo = [f64::NEG_INFINITY; 2];
    let mut hi = [f64::INFINITY; 2];
    let mut sum_lo = f64::NEG_INFINITY;
    let mut sum_hi = f64::INFINITY;
    for (c, pa) in &cons.blockers {
        match *c {
            Coalition::M1 => lo[0] = lo[0].max(*pa),
            Coalition::M2 => lo[1] = lo[1].max(*pa),
            Coalition::M => sum_lo = sum_lo.max(*pa),
            Coalition::S => sum_hi = sum_hi.min(nu_g - pa),
            Coalition::V1 => hi[1] = hi[1].min(nu_g - pa),
            Coalition::V2 => hi[0] = hi[0].min(nu_g - pa),
            _ => unreachable!("G is the partition member"),
        }
    }
    let s_lo = sum_lo.max(lo[0] + lo[1]);
    let s_hi = sum_hi.min(hi[0] + hi[1]);
    let tol = cons.tol;
    if lo[0] <= hi[0] + tol && lo[1] <= hi[1] + tol && s_lo <= s_hi + tol {
        for s in probes(s_lo, s_hi, nu_g) {
            let x1_lo = lo[0].max(s - hi[1]);
            let x1_hi = hi[0].min(s - lo[1]);
            if x1_lo > x1_hi + tol {
                continue;
            }
            for x1 in probes(x1_lo, x1_hi, s / 2.0) {
                let payoff = PayoffVector::new(nu_g - s, x1, s - x1);
                if cons.survives(payoff) {
                    return Ok(Region {
                        partition: Partition::Grand,
                        feasible: true,
                        witness: Some(payoff),
                        interval: None,
                        certificates: vec![],
                    });
                }
            }
        }
    }
    let fin = |v: f64, d: f64| if v.is_finite() { v } else { d };
    let corners = [
        (fin(lo[0], 0.0), fin(lo[1], 0.0)),
        (fin(lo[0], 0.0), fin(hi[1], nu_g)),
        (fin(hi[0], nu_g), fin(lo[1], 0.0)),
        (fin(hi[0], nu_g), fin(hi[1], nu_g)),
    ];
    let vertices = corners
        .iter()
        .map(|(x1, x2)| PayoffVector::new(nu_g - x1 - x2, *x1, *x2));
    Ok(Region {
        partition: Partition::Grand,
        feasible: false,
        witness: None,
        interval: None,
        certificates: cons.collect_certificates(vertices),
    })
}

/// Solves the linear feasibility system of one partition: consistency
/// equalities plus one inequality per admissible blocker.
pub fn stable_payoff_region(
    partition: Partition,
    table: &WorthTable,
    strict: bool,
    policy: BlockerPolicy,
) -> Result<Region> {
    let cons = Constraints::build(partition, table, strict, policy)?;
    match partition {
        Partition::AllAlone => {
            let payoff = PayoffVector::new(
                table.worth(partition, Coalition::S)?,
                table.worth(partition, Coalition::M1)?,
                table.worth(partition, Coalition::M2)?,
            );
            Ok(point_region(partition, payoff, &cons))
        }
        Partition::Horizontal => {
            let nu_s = table.worth(partition, Coalition::S)?;
            let nu_m = table.worth(partition, Coalition::M)?;
            // x_S fixed, x_M1 = t, x_M2 = nu_M - t.
            let affine = AffinePayoff {
                constant: [nu_s, 0.0, nu_m],
                coefficient: [0.0, 1.0, -1.0],
            };
            Ok(line_region(partition, affine, &cons))
        }
        Partition::Vertical1 => {
            let nu_v = table.worth(partition, Coalition::V1)?;
            let nu_f = table.worth(partition, Coalition::M2)?;
            // x_M2 fixed, x_M1 = t, x_S = nu_V1 - t.
            let affine = AffinePayoff {
                constant: [nu_v, 0.0, nu_f],
                coefficient: [-1.0, 1.0, 0.0],
            };
            Ok(line_region(partition, affine, &cons))
        }
        Partition::Vertical2 => {
            let nu_v = table.worth(partition, Coalition::V2)?;
            let nu_f = table.worth(partition, Coalition::M1)?;
            // x_M1 fixed, x_M2 = t, x_S = nu_V2 - t.
            let affine = AffinePayoff {
                constant: [nu_v, nu_f, 0.0],
                coefficient: [-1.0, 0.0, 1.0],
            };
            Ok(line_region(partition, affine, &cons))
        }
        Partition::Grand => grand_region(table, &cons),
    }
}

/// Region stable against mergers and splits (plus the manufacturer pair, the
/// policy the restricted classification admits), in the default non-strict mode.
pub fn restricted_stable_region(partition: Partition, table: &WorthTable) -> Result<Region> {
    stable_payoff_region(partition, table, false, BlockerPolicy::Theorem3iii)
}

/// Verdicts for all five partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub strict: bool,
    pub policy: BlockerPolicy,
    pub regions: Vec<Region>,
}

impl StabilityReport {
    pub fn region(&self, partition: Partition) -> &Region {
        self.regions
            .iter()
            .find(|r| r.partition == partition)
            .expect("report covers all partitions")
    }

    pub fn stable_partitions(&self) -> Vec<Partition> {
        self.regions
            .iter()
            .filter(|r| r.feasible)
            .map(|r| r.partition)
            .collect()
    }
}

/// Classifies every partition: stable iff its payoff region is nonempty.
pub fn partition_classification(
    table: &WorthTable,
    strict: bool,
    policy: BlockerPolicy,
) -> Result<StabilityReport> {
    let mut regions = Vec::with_capacity(5);
    for p in enumerate_partitions() {
        regions.push(stable_payoff_region(p, table, strict, policy)?);
    }
    Ok(StabilityReport {
        strict,
        policy,
        regions,
    })
}
