//! Steady-state EIT lineshapes of a Doppler-broadened Λ system: single-atom
//! coherences, Doppler averaging, linewidth laws, optically thick cells and
//! parameter fitting.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod doppler;
pub mod error;
pub mod fitting;
pub mod lineshape;
pub mod propagation;
pub mod quadrature;
pub mod units;

pub use atom::{
    bloch_linear_response, bloch_steady_state, coherence_response, extrapolated_coherence_response, linear_coherence,
    DensityMatrix3, LambdaSystem, Level,
};
pub use doppler::{
    average_susceptibility_closed, average_susceptibility_closed_narrow, average_susceptibility_numeric, doppler_width,
    BufferGas, DopplerProfile, MediumConfig, ProfileShape,
};
pub use error::{Error, Result};
pub use fitting::{
    compare_models, fit_linear, fit_linear_points, fit_lorentzian, fit_popexchange, FitResult, LinewidthSample,
    LinewidthSeries, ModelComparison, PumpConfiguration,
};
pub use lineshape::{
    absorption_coefficient, fwhm_dephasing, fwhm_numeric, fwhm_popexchange_asymptote, LineshapeParams, ResonanceScan,
    ScanKind,
};
pub use propagation::{rabi_from_power, rb_number_density, CellModel, PowerSweep, VaporPressureCorrelation};
pub use quadrature::QuadratureConfig;
