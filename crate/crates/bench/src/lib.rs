//! Shared setup for the pipeline benchmarks: the synthetic study landscape
//! and derived overlay inputs, built once per process.

use gridfire::fixture::{self, FixtureSpec};
use gridfire::impact::{self, LineSegmentation, StructureDensityGrid};
use gridfire::ingest::{LandscapeStack, StructurePoints, Topology};

pub struct BenchInputs {
    pub landscape: LandscapeStack,
    pub topology: Topology,
    pub structures: StructurePoints,
    pub segmentation: LineSegmentation,
    pub density: StructureDensityGrid,
}

pub fn full_scale_inputs() -> BenchInputs {
    let spec = FixtureSpec::full_scale();
    let landscape = fixture::synth_landscape(&spec);
    let topology = fixture::ieee30_topology();
    let structures = StructurePoints {
        points: fixture::synth_structures(&spec),
    };
    let segmentation = impact::segment_lines(&topology, &landscape.grid).expect("fixture lines");
    let (density, _) = impact::rasterize_structures(&structures, &landscape.grid);
    BenchInputs {
        landscape,
        topology,
        structures,
        segmentation,
        density,
    }
}
