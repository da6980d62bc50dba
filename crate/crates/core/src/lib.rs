pub mod error;
pub mod model;
pub mod quadrature;
pub mod spectral;
pub mod resonance;
pub mod eigen;
pub mod pathsum;
pub mod continuum;
pub mod scenarios;
pub mod cli;
