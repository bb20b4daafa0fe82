//! Pair-correlation statistics of multidimensional quasi-periodic spectra:
//! spectrum enumeration, windowed and smoothed two-point estimators, Jacobi
//! theta-sum evaluation on the metaplectic group, horocycle equidistribution
//! probes, Diophantine-type estimation, and degeneracy counting.

pub mod bessel;
pub mod degeneracy;
pub mod diophantine;
pub mod equidist;
pub mod error;
pub mod paircorr;
pub mod quad;
pub mod spectrum;
pub mod theta;
pub mod types;

pub use degeneracy::{
    count_equal_pairs, count_equal_pairs_between, count_equal_pairs_critical, degeneracy_curve,
    degeneracy_curve_critical, growth_fit, DegeneracyCurve,
};
pub use diophantine::{algebraic_vector, critical_vector, estimate_type, scan_trace, DiophReport};
pub use equidist::{
    block_sum, dominating_fn_eval, horocycle_average, l1_mean_dominating, mc_mean_dominating,
    DominatingFn, HorocycleProbe, Observable,
};
pub use error::{Error, Result};
pub use paircorr::{limit_smoothed, r2_smoothed_direct, r2_windowed, CorrEstimate, CorrKind};
pub use spectrum::{enumerate_spectrum, SpectrumSlice};
pub use theta::{
    mean_square_haar, r2_theta_integral, reduce_to_fundamental, theta_sum, u_phi_transform,
    Generator, GroupPoint, ReductionWord, ThetaValue,
};
pub use types::{unit_ball_volume, PsiTerm, TestPsi, TorusSpec, WeightH, WeightShape, Window};
