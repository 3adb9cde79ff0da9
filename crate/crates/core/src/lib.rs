//! Flight-control simulation lab for incremental nonlinear dynamic inversion
//! (INDI), time-delay control (TDC) and the incremental PI(D) controllers
//! whose gains follow from them.
//!
//! * [`dynamics`]: rigid-body rotational model, pitch-plane launcher model,
//!   first-order actuator.
//! * [`control`]: the control laws, the INDI → PI(D) gain map and the
//!   controller registry.
//! * [`sim`]: fixed-step closed-loop simulation, references, noise, logs and
//!   sweeps.
//! * [`cli`]: scenario schema, presets and the command implementations
//!   behind the `indilab` binary.

pub mod cli;
pub mod control;
pub mod dynamics;
pub mod sim;
