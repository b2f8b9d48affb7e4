//! Distinguisher catalog shared by both constructions.
//!
//! Each kind is a deterministic strategy over a per-trial random stream;
//! the same spec drives an EXor game or a sponge game. A trait hook exists
//! for plugging in other strategies, but the shipping set is the catalog
//! below.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistinguisherSpec {
    /// Query one message through the construction and check consistency
    /// against a locally recomputed subverted evaluation.
    ConsistencySingle,
    /// Same check over `count` messages; outputs 1 only if all agree.
    ConsistencyMulti { count: u32 },
    /// Query the construction/random oracle on `q_f` messages, look for an
    /// output collision, then compare the inner chaining values of the
    /// colliding pair.
    FCollision { q_f: u32 },
    /// `q` random primitive/construction queries; output is a parity of
    /// everything observed, so any bitwise change flips it.
    RandomProbe { q: u32 },
}

impl DistinguisherSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DistinguisherSpec::ConsistencySingle => "consistency-single",
            DistinguisherSpec::ConsistencyMulti { .. } => "consistency-multi",
            DistinguisherSpec::FCollision { .. } => "f-collision",
            DistinguisherSpec::RandomProbe { .. } => "random-probe",
        }
    }

    /// Nominal number of second-stage oracle interactions, used for budget
    /// validation before a game starts.
    pub fn planned_queries(&self) -> u32 {
        match self {
            DistinguisherSpec::ConsistencySingle => 3,
            DistinguisherSpec::ConsistencyMulti { count } => 3 * count,
            DistinguisherSpec::FCollision { q_f } => q_f + 6,
            DistinguisherSpec::RandomProbe { q } => *q,
        }
    }
}
