//! Pseudo-spectral Chern-Simons-Higgs simulation in Coulomb gauge on a periodic
//! square, with a Littlewood-Paley toolkit and empirical estimate checks.

pub mod spectral;
pub mod lp;
pub mod model;
pub mod integrator;
pub mod diagnostics;
pub mod estimates;
