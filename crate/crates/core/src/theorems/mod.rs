pub mod bounds;
pub mod construction;
pub mod decomposable;

pub use bounds::{
    cs_classical, gonality_consequence, h0_chain, pencil_degree_range, theorem_a_threshold, theorem_b_bound, verdict,
    MorphismVerdict, ThresholdA, Verdict,
};
pub use construction::{execute_plan, plan_construction, ConstructionPlan, Execution, PlanOutcome, Route};
pub use decomposable::minimal_degree_characterization;
