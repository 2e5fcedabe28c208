//! Design and verification toolkit for scale-invariant control of
//! harmonically trapped quantum gases.
//!
//! Under scale invariance the full dynamics of a cloud in an isotropic
//! harmonic trap reduces to a single dimensionless scaling factor `b(t)`
//! governed by the Ermakov equation b̈ + ω(t)²b = ω₀²/b³. This crate
//!
//! * solves that equation for piecewise frequency schedules, both in
//!   closed form (Pinney solutions per constant-frequency segment) and by
//!   adaptive numerical integration ([`ermakov`]);
//! * constructs delta-kick-cooling, bang-bang, and kick-assisted
//!   shortcut protocols in closed form ([`protocol`]);
//! * transports Gaussian Wigner states through the same schedules with
//!   symplectic maps ([`phasespace`]);
//! * cross-checks everything against independent numerical oracles,
//!   including a seeded classical Monte Carlo ensemble ([`verify`]).
//!
//! Natural units ħ = m = 1 are used throughout. The reference trap
//! frequency `omega0` is configurable (default 1) and all frequencies,
//! rates, and times are expressed relative to it. Trap inversion is
//! encoded by a negative signed squared frequency, never by complex
//! arithmetic.
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently.

// `!(x > 0.0)` guards reject NaN inputs; the suggested `x <= 0.0` form
// does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ermakov;
pub mod ode;
pub mod phasespace;
pub mod protocol;
pub mod verify;
