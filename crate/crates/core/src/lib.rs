//! Analytical energy estimation for formal (FNN) and spiking (SNN) neural
//! networks on a generic digital accelerator model.
//!
//! Counts of synaptic operations, memory accesses and address computations
//! are derived per layer, then priced with a technology profile.

pub mod activity;
pub mod addressing;
pub mod energy;
pub mod error;
pub mod memory;
pub mod network;
pub mod ops;
pub mod oracle;
pub mod presets;
pub mod report;

pub use activity::{
    input_presentations, load_trace, synthesize_uniform, synthesize_uniform_with_input,
    ActivityTrace, SpikeRate,
};
pub use addressing::{layer_addr, AddrCounts};
pub use energy::{
    compare, layer_energy, layer_memory_sizes, network_energy, sram_access_energy, EnergyBreakdown,
    EnergyReport, EstimateOptions, LayerCounts, LayerReport, LayerRole, MemorySizing, RangePolicy,
    TechProfile,
};
pub use error::{Error, Result};
pub use memory::{layer_mem, MemCounts};
pub use network::{
    parse_network, ConvLayer, EncodingScheme, FcLayer, Layer, Mode, NetworkSpec, NeuronModel, Shape,
};
pub use ops::{layer_ops, readout_ops, OpCounts};
pub use report::{compare_modes, estimate, Activity, Comparison};
