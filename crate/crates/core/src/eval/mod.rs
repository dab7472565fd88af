//! Random-graph evaluation: generators, monitor placement and campaigns.

pub mod campaign;
pub mod generate;
pub mod placement;

pub use campaign::{
    instance_seed, random_metrics, run_campaign, run_instance, Campaign, CampaignConfig,
    CampaignSpec, EvaluationRecord, InstanceOutcome, CSV_HEADER,
};
pub use generate::{generate, Family, GenerationError, GeneratorSpec};
pub use placement::{
    place_monitors, place_monitors_greedy, place_monitors_random, Placement, PlacementPolicy,
};
