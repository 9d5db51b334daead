//! The tolerance ladder shared by every routine in the crate.
//!
//! Layers are separated by about two orders of magnitude: the integrator is
//! driven well below the distance tolerance, which in turn sits well below
//! the tolerance used when judging an inequality.

/// Relative tolerance of the adaptive Runge-Kutta integrator for production runs.
pub const INTEGRATOR_RTOL: f64 = 1e-12;

/// Absolute floor of the integrator error scale for positions and velocities.
pub const INTEGRATOR_ATOL: f64 = 1e-14;

/// Relative tolerance used when scanning shooting brackets, where only the
/// sign of the residual matters.
pub const SCAN_RTOL: f64 = 1e-7;

/// Endpoint and distance agreement.
pub const DISTANCE: f64 = 1e-8;

/// Slack allowed when judging an inequality `lhs >= rhs`.
pub const INEQUALITY: f64 = 1e-6;

/// Conservation of the Clairaut constant and of unit speed along a path.
pub const CONSERVATION: f64 = 1e-8;

/// Two connecting geodesics whose lengths differ by less than this are a tie.
pub const LENGTH_TIE: f64 = 1e-6;

/// Angle tolerance for root refinement of shooting problems.
pub const SHOOTING_ANGLE: f64 = 1e-12;

/// Number of uniform brackets scanned over the initial angle.
pub const SHOOTING_BRACKETS: usize = 720;

/// How far below `x = 0` a path may drift before it counts as having left
/// the half-plane.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// Agreement of footgaps that triggers the equality case of the comparison.
pub const EQUALITY_FOOTGAP: f64 = 1e-6;

/// Angle agreement required in the equality case.
pub const EQUALITY_ANGLE: f64 = 1e-5;

/// Hinge sums of a glued triangle may exceed `pi` by at most this much.
pub const HINGE: f64 = 1e-6;

/// Bisection target for first zeros of scalar Jacobi fields.
pub const FIRST_ZERO: f64 = 1e-10;

/// `|f|` below this with a flat derivative counts as a grazing zero.
pub const GRAZING_VALUE: f64 = 1e-9;

/// Default tail-minimum threshold for the `liminf m = 0` test.
pub const LIMINF_THRESHOLD: f64 = 1e-3;

/// Default truncation height of a warping function.
pub const DEFAULT_DOMAIN_MAX: f64 = 50.0;
