//! Financial risk assessment of grid-ignited wildfires.
//!
//! The library implements a batch pipeline over five stages: load the input
//! datasets ([`ingest`]), place evenly spaced ignition points along every
//! transmission branch ([`ignition`]), grow one fire per ignition with a
//! minimum-travel-time engine ([`firesim`]), overlay the burned area against
//! environment, lines, and structures ([`impact`]), and convert the damage
//! quantities to dollars, per-line risk, and a percentile color heatmap
//! ([`risk`]).
//!
//! All stages are pure functions over immutable inputs; scenario-level
//! parallelism is owned by the caller (see the `gridfire` CLI).

pub mod ascii;
pub mod firesim;
pub mod fixture;
pub mod geo;
pub mod ignition;
pub mod impact;
pub mod ingest;
pub mod risk;

pub use ascii::AsciiGrid;
pub use firesim::{ArrivalTimeGrid, BurnMatrix, Connectivity, SpreadParams};
pub use geo::{CellIndex, GeoGrid, GeoPoint};
pub use ignition::IgnitionPoint;
pub use impact::{LineSegmentation, ScenarioImpact, StructureDensityGrid};
pub use ingest::{Branch, Bus, LandscapeStack, StructurePoints, Topology, WeatherRecord};
pub use risk::{AggregationPolicy, CostModel, LineRisk, RiskClass, ScenarioCost};
