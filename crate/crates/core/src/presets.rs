//! The three bundled case studies with their reference spike rates.
//!
//! The architectures are reconstructions from published layer summaries.

use crate::error::Result;
use crate::network::{parse_network, NetworkSpec};

pub const CIFAR_VGG16: &str = include_str!("../configs/cifar_vgg16.json");
pub const GSC_CNN: &str = include_str!("../configs/gsc_cnn.json");
pub const NCARS_TINYVGG11: &str = include_str!("../configs/ncars_tinyvgg11.json");
pub const TECH_45NM: &str = include_str!("../configs/tech_45nm.json");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseStudy {
    pub key: &'static str,
    pub config: &'static str,
    /// Average spikes per neuron per inference.
    pub spike_rate: f64,
    /// Published FNN and SNN totals (nJ) and their ratio.
    pub reference_fnn_nj: f64,
    pub reference_snn_nj: f64,
    pub reference_ratio: f64,
}

impl CaseStudy {
    pub fn spec(&self) -> Result<NetworkSpec> {
        parse_network(self.config)
    }
}

pub const CASES: [CaseStudy; 3] = [
    CaseStudy {
        key: "cifar",
        config: CIFAR_VGG16,
        spike_rate: 0.10,
        reference_fnn_nj: 1.24e7,
        reference_snn_nj: 1.58e6,
        reference_ratio: 8.19,
    },
    CaseStudy {
        key: "gsc",
        config: GSC_CNN,
        spike_rate: 0.14,
        reference_fnn_nj: 3.32e4,
        reference_snn_nj: 5.32e3,
        reference_ratio: 6.22,
    },
    CaseStudy {
        key: "ncars",
        config: NCARS_TINYVGG11,
        spike_rate: 0.08,
        reference_fnn_nj: 2.86e6,
        reference_snn_nj: 3.57e5,
        reference_ratio: 8.17,
    },
];

pub fn case(key: &str) -> Option<&'static CaseStudy> {
    CASES.iter().find(|c| c.key == key)
}
