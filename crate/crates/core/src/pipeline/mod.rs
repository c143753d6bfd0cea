//! End-to-end searches and the tools around them.

mod decompositional;
mod fixture;
mod holistic;
mod landscape;
mod resources;
mod verify;

use serde::{Deserialize, Serialize};

pub use decompositional::{
    move_tensors_closer, run_decompositional, DecompositionConfig, PipelineRun, StepRecord,
    StepSolver,
};
pub use fixture::{strassen_fixture, strassen_reference, StrassenFixture};
pub use holistic::{run_holistic, HolisticConfig, HolisticOutcome};
pub use landscape::{
    assignment_to_integer, integer_to_assignment, midpoint_offset_percent, sample_landscape,
    sample_neighborhood, write_csv, LandscapeRow, CSV_HEADER,
};
pub use resources::{estimate_resources, ResourceEstimate};
pub use verify::{
    lift_to_real, multiply_with, verify_decomposition, Counterexample, VerificationReport,
    EXHAUSTIVE_BITS,
};

use crate::error::{Error, Result};
use crate::tensor::{Decomposition, RankOneTriple, Tensor3, TensorJson};

/// Starting tensor of the stepwise search and the seed triple split off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HighEnergyPointJson", into = "HighEnergyPointJson")]
pub struct HighEnergyPoint {
    pub t_high: Tensor3,
    pub seed: RankOneTriple,
}

#[derive(Serialize, Deserialize)]
struct HighEnergyPointJson {
    t_high: TensorJson,
    seed: RankOneTriple,
}

impl TryFrom<HighEnergyPointJson> for HighEnergyPoint {
    type Error = Error;

    fn try_from(raw: HighEnergyPointJson) -> Result<Self> {
        let hp = Self {
            t_high: raw.t_high.try_into()?,
            seed: raw.seed,
        };
        hp.validate()?;
        Ok(hp)
    }
}

impl From<HighEnergyPoint> for HighEnergyPointJson {
    fn from(hp: HighEnergyPoint) -> Self {
        Self {
            t_high: TensorJson::from(&hp.t_high),
            seed: hp.seed,
        }
    }
}

impl HighEnergyPoint {
    pub fn validate(&self) -> Result<()> {
        self.seed.check_shape(self.t_high.shape())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// What a stalled stepwise search had achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StallInfo {
    pub loop_index: usize,
    /// Accepted steps of both loops.
    pub steps: Vec<StepRecord>,
    pub reason: String,
    /// Seed triple plus every accepted factor; does not sum to the standard
    /// tensor.
    pub partial: Decomposition,
}
