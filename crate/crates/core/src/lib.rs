//! Coherent states of a particle in the trigonometric Pöschl-Teller well.
//!
//! Three families are built in a truncated Fock basis: displacement
//! (Klauder-Perelomov) states, annihilation eigenstates (Gazeau-Klauder) and
//! states saturating the Robertson-Schrödinger relation. [`verify`] holds
//! independent oracles for every closed form used, and [`position`] maps
//! states onto the well.
//!
//! ```
//! use num_complex::Complex64;
//! use pt_cs::operators::variance_pair;
//! use pt_cs::states::{construct, gk_mean_g};
//! use pt_cs::{CsLabel, GkLabel, PotentialParams};
//!
//! let p = PotentialParams::new(2.0, 2.5, 1.0, 0.0)?;
//! let label = CsLabel::Gk(GkLabel { z: Complex64::new(1.5, 0.3), alpha: 0.0 });
//! let state = construct(&p, &label, 120)?;
//! assert!(!state.under_truncated());
//! let v = variance_pair(&state)?;
//! assert!((v.mean_g - gk_mean_g(&p, 1.5f64.hypot(0.3))?).abs() < 1e-8);
//! # Ok::<(), pt_cs::Error>(())
//! ```

// `!(x > y)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod operators;
pub mod position;
pub mod quadrature;
pub mod report;
pub mod specfun;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use operators::{PotentialParams, StateVector};
pub use report::VerifyReport;
pub use states::{CsLabel, GkLabel, IsLabel, KpLabel};
