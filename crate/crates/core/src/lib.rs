//! Simulation, scheduling and budgeting for switch-controlled ion trap arrays.

pub mod config;
pub mod gates;
pub mod params;
pub mod pulse;
pub mod routing;
pub mod topology;
pub mod wiring;
