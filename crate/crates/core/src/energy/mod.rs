//! Discrete energy forms, grid functions and inequality checkers.

pub mod checks;
pub mod forms;
pub mod grid;

pub use checks::*;
pub use forms::{
    comparability_ratio, energy_axes, energy_general, random_test_function, ComparabilityReport,
    EnergyForm,
};
pub use grid::{ExteriorExtension, GridFunction, TimeGridFunction};
