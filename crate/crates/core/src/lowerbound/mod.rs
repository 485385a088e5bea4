//! Lower-bound lab: the flat Gaussian hard family and Monte Carlo estimates
//! of the quantities that rule out list learning from d−1 samples.
//!
//! Q_k holds the Gaussians with variance 1/k² along a direction u (at least
//! 30° away from e_d) and unit variance elsewhere, with mean on the disk T of
//! radius 1/2 in the first d−1 coordinates. B = C^{d−1} for the cylinder C
//! above T. The impossibility argument needs P[X ∈ B] ≥ η > 0 uniformly in k
//! and r_k/s_k → 0.

mod estimate;
mod flat;
mod report;

pub use estimate::{
    alternative_mass, angle_threshold, ball_mass, designed_far_point, designed_reference,
    estimate_eta, estimate_rk, estimate_sk, separation_certified, Estimate, BALL_RADIUS,
    CERTIFIED_TV,
};
pub use flat::{
    band_fraction, c_value, cap_fraction, in_cylinder, log_c, log_u_k, rotation, sample_instance,
    u_k_value, CylinderSpec, FlatGaussianParams, BAND_LIMIT, DISK_RADIUS, MAX_DIM,
};
pub use report::{nfl_report, NflBudgets, NflReport, NflRow};
