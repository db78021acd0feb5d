//! Base-m continued fractions as a dynamical system: the interval map and
//! its digit algorithm, the invariant measure, the transfer operator with
//! its Gauss-Kuzmin functional iteration, ergodic constants (Khintchin-type,
//! growth, entropy), Monte-Carlo pushforward experiments and Mellin-type
//! zeta integrals in the critical strip.
//!
//! Everything numerical carries either a rigorous-style tail bound or an
//! explicit error estimate; digit extraction additionally offers an
//! exact-rational path and a validated directed-rounding path.

pub mod cf;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod measure;
pub mod params;
pub mod quad;
pub mod stats;
pub mod transfer;
pub mod zeta;

pub use cf::{
    branch_index, evaluate_cf, evaluate_cf_rational, expand, expand_rational,
    expand_with_precision, fixed_point_branch0, inverse_branch, tau_step, tau_step_rational,
    DigitMode, DigitSequence, UnitRational, DEFAULT_PRECISION_BITS,
};
pub use error::{Error, Result};
pub use grid::{GridFunction, GridKind};
pub use measure::{
    cdf_omega, density_rho, digit_probability, gamma_interval, sample_gamma,
    tau_preimage_measure, MeasureSpec,
};
pub use params::ChanParams;
pub use quad::{ComplexQuadratureResult, QuadratureResult};
pub use stats::{
    birkhoff_average, entropy, fibonacci_log_growth, khinchin_chi, ks_statistic, levy_growth,
    levy_growth_bound, random_fibonacci, simulate_pushforward, EntropyResult, ErrorReport,
    GrowthResult, Observable, SimulationConfig,
};
pub use transfer::{
    apply_g, apply_transfer_fn, estimate_rate, kuzmin_iterate, kuzmin_run, lemma24_identities,
    markov_kernel, q_bound, transition_prob, transition_prob_sum, KuzminReport, KuzminStart,
    RateReport,
};
pub use zeta::{chan_zeta, chan_zeta_quadrature, gauss_map_zeta, ComplexPoint};
