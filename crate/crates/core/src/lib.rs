//! Closed-form Jacobi elliptic solution of a resonant three-wave triad,
//! cross-checked against an adaptive ODE integrator and a split-step
//! spectral simulator of the full fields.
//!
//! The guide in `book/` walks through each module with runnable examples.

pub mod cli;
pub mod elliptic;
pub mod oracle;
pub mod pde;
pub mod physics;
pub mod triad;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/elliptic.md")]
    mod elliptic {}
    #[doc = include_str!("../../../book/src/closed-form.md")]
    mod closed_form {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/acoustic-gravity.md")]
    mod acoustic_gravity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
