//! Construction of differential systems on R^{2N} that admit a prescribed
//! complete set of N first integrals, together with the numerical machinery
//! to verify that construction: an expression DSL with exact forward-mode
//! derivatives, determinant brackets over gradient rows, regularity
//! classification, conservation-enforcing vector fields, and adaptive
//! integration with drift monitoring.
//!
//! Phase-space convention: coordinates are ordered (x1, …, xN, y1, …, yN);
//! index of `x_k` is `k-1`, index of `y_k` is `N+k-1`.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature when building without `std` to supply float intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
// `!(v > tol)` style checks are deliberate: NaN must take the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("firstint-core needs either the `std` or the `libm` feature");

pub(crate) mod math;

mod linalg;

pub mod brackets;
pub mod constructor;
pub mod expr;
pub mod flow;
pub mod scenarios;

pub use brackets::{IntegralSet, InvolutionMatrix, Slot, SlotList};
pub use constructor::{Backend, Case, FieldModel, FieldSample, Thresholds};
pub use expr::{Bindings, Expression, PhaseSpace};
pub use flow::{ConservationReport, IntegratorConfig, Method, Termination, Trajectory};
