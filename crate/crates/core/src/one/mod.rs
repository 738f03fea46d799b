//! The joint outlier-aware factorization.
//!
//! Minimizes
//!
//! ```text
//! L = Σᵢ ln(1/o1ᵢ)·‖Aᵢ − Gᵢ·H‖²
//!   + α Σᵢ ln(1/o2ᵢ)·‖Cᵢ − Uᵢ·V‖²
//!   + β Σᵢ ln(1/o3ᵢ)·‖Gᵢ − Uᵢ·Wᵀ‖²
//! ```
//!
//! over factors `G, H, U, V`, orthogonal `W`, and score vectors `o1, o2, o3`
//! each summing to `μ`. Every block update is an exact minimizer with the
//! rest fixed, so the loss never increases from one round to the next.

mod fit;
mod loss;
mod model;
mod params;
mod scores;
mod update;

pub use fit::{
    calibrate_from_losses, calibrate_weights, final_embedding, fit, initialize, run_round, Calibration, Diagnostics,
    FitOutput,
};
pub use loss::{disagreement_residuals, loss_attribute, loss_disagreement, loss_joint, loss_structure, LossBreakdown};
pub use model::{loss_multipliers, OneModel, OutlierScores};
pub use params::{CombineWeights, HyperParams, LossWeights};
pub use scores::{final_outlier_score, scores_from_residuals, update_o1, update_o2, update_o3};
pub use update::{
    procrustes, update_g, update_h, update_u, update_v, update_w, GUpdate, HUpdate, UUpdate, UpdateStats, VUpdate,
    DEGENERATE_DENOM,
};
