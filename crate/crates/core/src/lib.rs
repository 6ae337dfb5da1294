//! Numerical verification of the integrable structure around Frobenius
//! manifolds: WDVV associativity, Landau–Ginzburg residue pairings,
//! Darboux–Egoroff rotation coefficients, the Euler top and its algebraic
//! Painlevé VI solution, tau functions and Schlesinger systems.
//!
//! Derivatives come from truncated Taylor jets ([`jet`]) rather than
//! finite differences; finite differences ([`fd`]) only serve as an
//! independent cross-check. The [`suites`] module strings everything into
//! the batch checks behind the `wdvv` binary.
//!
//! Each capability has a runnable example:
//!
//! ```bash
//! cargo run --example prepotential_wdvv
//! cargo run --example landau_ginzburg_chart
//! cargo run --example schlesinger_system
//! ```

pub mod config;
pub mod expr;
pub mod fd;
pub mod frobenius;
pub mod jet;
pub mod lg;
pub mod linalg;
pub mod n2;
pub mod n3;
pub mod ode;
pub mod report;
pub mod sampling;
pub mod schlesinger;
pub mod suites;
