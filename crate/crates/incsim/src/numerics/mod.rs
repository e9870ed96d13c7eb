//! Shared numerical routines: adaptive quadrature, bracketed root finding,
//! the special functions needed by the seed laws, and a derivative-free
//! minimizer for likelihood refinement.

pub mod bessel;
pub mod optim;
pub mod quad;
pub mod roots;
