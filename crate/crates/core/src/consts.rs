//! Central numeric tolerances.
//!
//! Every validation threshold used by the library lives here so that tests
//! and implementations agree on one set of numbers.

/// Hermiticity check on density matrices.
pub const HERM_TOL: f64 = 1e-12;

/// Unit-trace check on freshly prepared states.
pub const TRACE_ONE_TOL: f64 = 1e-12;

/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_EIG_FLOOR: f64 = -1e-10;

/// Unitarity check (max deviation of U·U† from the identity).
pub const UNITARY_TOL: f64 = 1e-10;

/// Involution check V² = 1 for rotation generators.
pub const INVOLUTION_TOL: f64 = 1e-10;

/// Completeness of the summed Kraus operators of an instrument.
pub const KRAUS_TOTALITY_TOL: f64 = 1e-10;

/// Agreement between a dilation-built map and its closed form.
pub const SUPEROP_MATCH_TOL: f64 = 1e-12;

/// Largest coupling accepted by the weak-limit slope extraction.
pub const WEAK_LAMBDA_MAX: f64 = 0.3;

/// Default coupling pair for two-point Richardson extrapolation.
pub const RICHARDSON_LAMBDAS: [f64; 2] = [1e-2, 5e-3];

/// Below this denominator the inequality ratio is flagged indeterminate.
pub const INDETERMINATE_DENOM_TOL: f64 = 1e-14;

/// Default operator-norm threshold for classifying weak measurements.
pub const CLASSIFY_DEFAULT_TOL: f64 = 1e-8;

/// Rank-2 gate for the calibration matrix: third singular value relative
/// to the first.
pub const RANK_RATIO_TOL: f64 = 1e-8;

/// Degeneracy threshold for intermediate calibration vectors, relative to
/// the scale of their factors; triggers a redraw of the auxiliary vectors.
pub const AUX_REDRAW_TOL: f64 = 1e-10;

/// Hard cap on register size; the protocol needs three qubits.
pub const MAX_QUBITS: usize = 10;

/// Default half-width of the position grid used by the continuum module.
pub const GRID_HALF_WIDTH: f64 = 12.0;

/// Default number of grid points used by the continuum module.
pub const GRID_POINTS: usize = 4096;
