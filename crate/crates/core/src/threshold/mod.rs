//! Near-linear selection through the semi-distance threshold problem:
//! degree estimation on the threshold graph `G_b`, search for prompting
//! hypotheses, the iterative pruning solver, and binary search over `b`.

mod graph;
mod prompting;
mod solve;

pub use graph::{draw_count, estimate_average_degree, estimate_out_degree, ThresholdGraph};
pub use prompting::{find_heavy_prompter, find_prompting, PromptingResult};
pub use solve::{
    fast_probes, fast_select, select_fast, solve_threshold, solve_threshold_traced, Probe,
    ThresholdAnswer, ThresholdTrace,
};
