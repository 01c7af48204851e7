//! Network architectures: layer geometry, shape inference under "same"
//! padding, and the JSON network description.
//!
//! A network is an ordered chain of convolution and fully-connected layers.
//! Only the network input extents are declared; every interior extent is
//! inferred by walking the chain, with `h_out = ceil(h_in / stride)`.
//! One-dimensional convolutions use `w_in = w_kernel = w_out = 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Execution mode: dense frame-based (formal) or sparse event-based (spiking).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fnn,
    Snn,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fnn => "fnn",
            Mode::Snn => "snn",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fnn" => Ok(Mode::Fnn),
            "snn" => Ok(Mode::Snn),
            other => Err(Error::Malformed(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronModel {
    /// Formal rectified-linear unit.
    Relu,
    /// Integrate-and-fire, no leak.
    If,
    /// Leaky integrate-and-fire.
    Lif,
}

impl NeuronModel {
    pub fn is_spiking(self) -> bool {
        !matches!(self, NeuronModel::Relu)
    }

    pub fn leaks(self) -> bool {
        matches!(self, NeuronModel::Lif)
    }

    /// Checks the neuron tag against an execution mode.
    pub fn check_mode(self, mode: Mode) -> Result<()> {
        let ok = match mode {
            Mode::Fnn => !self.is_spiking(),
            Mode::Snn => self.is_spiking(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NeuronModeMismatch {
                neuron: self.to_string(),
                mode: mode.to_string(),
            })
        }
    }
}

impl fmt::Display for NeuronModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeuronModel::Relu => "relu",
            NeuronModel::If => "if",
            NeuronModel::Lif => "lif",
        })
    }
}

impl FromStr for NeuronModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(NeuronModel::Relu),
            "if" => Ok(NeuronModel::If),
            "lif" => Ok(NeuronModel::Lif),
            other => Err(Error::Malformed(format!("unknown neuron model `{other}`"))),
        }
    }
}

/// How input samples are presented to a spiking network over its timesteps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingScheme {
    /// The whole sample is presented again at every timestep.
    #[serde(rename = "static")]
    StaticRepeat,
    /// The sample is split into `T` chunks along its first spatial axis,
    /// one chunk per timestep.
    #[serde(rename = "dynamic")]
    DynamicChunk,
    /// Native events binned into a binary voxel grid.
    #[serde(rename = "event")]
    EventVoxel,
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingScheme::StaticRepeat => "static",
            EncodingScheme::DynamicChunk => "dynamic",
            EncodingScheme::EventVoxel => "event",
        })
    }
}

impl FromStr for EncodingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" | "static_repeat" => Ok(EncodingScheme::StaticRepeat),
            "dynamic" | "dynamic_chunk" => Ok(EncodingScheme::DynamicChunk),
            "event" | "event_voxel" => Ok(EncodingScheme::EventVoxel),
            other => Err(Error::Malformed(format!("unknown encoding `{other}`"))),
        }
    }
}

/// Channel-height-width extents of a feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn new(c: usize, h: usize, w: usize) -> Self {
        Shape { c, h, w }
    }

    pub fn size(&self) -> usize {
        self.c * self.h * self.w
    }
}

/// Convolution with "same" padding. Input extents of zero mean "not yet
/// inferred".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvLayer {
    pub c_in: usize,
    pub c_out: usize,
    pub h_kernel: usize,
    pub w_kernel: usize,
    pub stride: usize,
    pub h_in: usize,
    pub w_in: usize,
    pub h_out: usize,
    pub w_out: usize,
    pub has_bias: bool,
    /// Output is summed over space (and time, for spiking execution) to
    /// form the class scores.
    pub sum_readout: bool,
}

impl ConvLayer {
    /// A layer whose input extents are left for [`NetworkSpec::infer_shapes`].
    pub fn new(
        c_out: usize,
        h_kernel: usize,
        w_kernel: usize,
        stride: usize,
        has_bias: bool,
    ) -> Self {
        ConvLayer {
            c_in: 0,
            c_out,
            h_kernel,
            w_kernel,
            stride,
            h_in: 0,
            w_in: 0,
            h_out: 0,
            w_out: 0,
            has_bias,
            sum_readout: false,
        }
    }

    /// A fully shaped layer for the given input.
    pub fn with_input(
        input: Shape,
        c_out: usize,
        kernel: (usize, usize),
        stride: usize,
        has_bias: bool,
    ) -> Self {
        let mut layer = ConvLayer::new(c_out, kernel.0, kernel.1, stride, has_bias);
        layer.set_input(input);
        layer
    }

    fn set_input(&mut self, input: Shape) {
        self.c_in = input.c;
        self.h_in = input.h;
        self.w_in = input.w;
        self.h_out = ceil_div(input.h, self.stride.max(1));
        self.w_out = ceil_div(input.w, self.stride.max(1));
    }

    pub fn input_shape(&self) -> Shape {
        Shape::new(self.c_in, self.h_in, self.w_in)
    }

    pub fn output_shape(&self) -> Shape {
        Shape::new(self.c_out, self.h_out, self.w_out)
    }

    /// Kernel taps per filter hit by one input position under stride `S`.
    pub fn strided_taps(&self) -> usize {
        ceil_div(self.h_kernel, self.stride) * ceil_div(self.w_kernel, self.stride)
    }

    pub fn kernel_area(&self) -> usize {
        self.h_kernel * self.w_kernel
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub has_bias: bool,
}

impl FcLayer {
    pub fn new(n_in: usize, n_out: usize, has_bias: bool) -> Self {
        FcLayer {
            n_in,
            n_out,
            has_bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer {
    Conv(ConvLayer),
    Fc(FcLayer),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Fc(_) => "fc",
        }
    }

    /// Output neurons: `C_out * H_out * W_out` for conv, `N_out` for FC.
    pub fn neuron_count(&self) -> usize {
        match self {
            Layer::Conv(c) => c.c_out * c.h_out * c.w_out,
            Layer::Fc(f) => f.n_out,
        }
    }

    pub fn input_size(&self) -> usize {
        match self {
            Layer::Conv(c) => c.c_in * c.h_in * c.w_in,
            Layer::Fc(f) => f.n_in,
        }
    }

    pub fn weight_count(&self) -> usize {
        match self {
            Layer::Conv(c) => c.c_in * c.c_out * c.h_kernel * c.w_kernel,
            Layer::Fc(f) => f.n_in * f.n_out,
        }
    }

    pub fn bias_count(&self) -> usize {
        match self {
            Layer::Conv(c) if c.has_bias => c.c_out,
            Layer::Fc(f) if f.has_bias => f.n_out,
            _ => 0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.bias_count()
    }

    pub fn has_bias(&self) -> bool {
        match self {
            Layer::Conv(c) => c.has_bias,
            Layer::Fc(f) => f.has_bias,
        }
    }

    pub fn output_shape(&self) -> Shape {
        match self {
            Layer::Conv(c) => c.output_shape(),
            Layer::Fc(f) => Shape::new(f.n_out, 1, 1),
        }
    }

    /// Elements summed by a readout head, zero for ordinary layers.
    pub fn readout_elements(&self) -> usize {
        match self {
            Layer::Conv(c) if c.sum_readout => self.neuron_count(),
            _ => 0,
        }
    }
}

/// A validated, shape-inferred network plus its execution parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    pub mode: Mode,
    /// Timesteps `T`; ignored in FNN mode.
    pub timesteps: u32,
    pub neuron: NeuronModel,
    pub encoding: EncodingScheme,
    pub input: Shape,
    pub layers: Vec<Layer>,
}

pub(crate) fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

fn positive(what: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::NonPositiveDimension(what.to_string()))
    } else {
        Ok(())
    }
}

fn check_declared(layer: usize, what: &str, declared: usize, inferred: usize) -> Result<()> {
    if declared != 0 && declared != inferred {
        return Err(Error::ShapeMismatch {
            layer,
            detail: format!("declared {what} = {declared}, previous layer yields {inferred}"),
        });
    }
    Ok(())
}

impl NetworkSpec {
    /// Recomputes every layer's input extents from the chain and its output
    /// extents from the stride. Input extents already present must agree.
    pub fn infer_shapes(mut self) -> Result<Self> {
        positive("input.c", self.input.c)?;
        positive("input.h", self.input.h)?;
        positive("input.w", self.input.w)?;
        let mut current = self.input;
        for (i, layer) in self.layers.iter_mut().enumerate() {
            match layer {
                Layer::Conv(c) => {
                    positive(&format!("layer {i} c_out"), c.c_out)?;
                    positive(&format!("layer {i} kh"), c.h_kernel)?;
                    positive(&format!("layer {i} kw"), c.w_kernel)?;
                    positive(&format!("layer {i} stride"), c.stride)?;
                    check_declared(i, "c_in", c.c_in, current.c)?;
                    check_declared(i, "h_in", c.h_in, current.h)?;
                    check_declared(i, "w_in", c.w_in, current.w)?;
                    c.set_input(current);
                    current = c.output_shape();
                }
                Layer::Fc(f) => {
                    positive(&format!("layer {i} n_out"), f.n_out)?;
                    check_declared(i, "n_in", f.n_in, current.size())?;
                    f.n_in = current.size();
                    current = Shape::new(f.n_out, 1, 1);
                }
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Malformed("network has no layers".into()));
        }
        if self.timesteps == 0 {
            return Err(Error::NonPositiveDimension("timesteps".into()));
        }
        self.neuron.check_mode(self.mode)?;
        // re-running inference on a shaped network is the chain check
        self.clone().infer_shapes().map(|_| ())
    }

    /// Effective `T`: FNN execution has single-pass semantics.
    pub fn effective_timesteps(&self) -> u32 {
        match self.mode {
            Mode::Fnn => 1,
            Mode::Snn => self.timesteps,
        }
    }

    /// The formal twin of this network.
    pub fn to_fnn(&self) -> NetworkSpec {
        NetworkSpec {
            mode: Mode::Fnn,
            neuron: NeuronModel::Relu,
            ..self.clone()
        }
    }

    /// The spiking twin of this network with the given neuron model.
    pub fn to_snn(&self, neuron: NeuronModel) -> Result<NetworkSpec> {
        neuron.check_mode(Mode::Snn)?;
        Ok(NetworkSpec {
            mode: Mode::Snn,
            neuron,
            ..self.clone()
        })
    }

    /// Switches mode, keeping the declared spiking neuron when going to SNN.
    pub fn with_mode(&self, mode: Mode) -> Result<NetworkSpec> {
        match mode {
            Mode::Fnn => Ok(self.to_fnn()),
            Mode::Snn => self.to_snn(self.neuron),
        }
    }

    /// Input extents seen by the network at one timestep. Dynamic chunking
    /// splits the first spatial axis into `T` chunks.
    pub fn timestep_input(&self) -> Shape {
        match (self.mode, self.encoding) {
            (Mode::Snn, EncodingScheme::DynamicChunk) => {
                let t = self.timesteps.max(1) as usize;
                Shape::new(self.input.c, ceil_div(self.input.h, t), self.input.w)
            }
            _ => self.input,
        }
    }

    /// Layer geometry actually executed per timestep. Identical to `layers`
    /// except for dynamically chunked spiking networks.
    pub fn execution_layers(&self) -> Result<Vec<Layer>> {
        let shape = self.timestep_input();
        if shape == self.input {
            return Ok(self.layers.clone());
        }
        let mut unshaped = self.clone();
        unshaped.input = shape;
        for layer in &mut unshaped.layers {
            match layer {
                Layer::Conv(c) => {
                    c.c_in = 0;
                    c.h_in = 0;
                    c.w_in = 0;
                }
                Layer::Fc(f) => f.n_in = 0,
            }
        }
        Ok(unshaped.infer_shapes()?.layers)
    }

    pub fn total_params(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn total_neurons(&self) -> usize {
        self.layers.iter().map(Layer::neuron_count).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkDoc::from(self)).expect("network document serializes")
    }
}

/// Parses and shape-infers a JSON network description.
pub fn parse_network(document: &str) -> Result<NetworkSpec> {
    let doc: NetworkDoc = serde_json::from_str(document)?;
    doc.into_spec()
}

/// Wire form of a network description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub name: String,
    pub mode: String,
    #[serde(default = "one")]
    pub timesteps: i64,
    pub neuron: String,
    #[serde(default = "default_encoding")]
    pub encoding: String,
    pub input: InputDoc,
    pub layers: Vec<LayerDoc>,
    /// Free-form provenance text; not interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub c: i64,
    pub h: i64,
    #[serde(default = "one")]
    pub w: i64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_out: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kh: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kw: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_out: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<bool>,
    /// `"sum"` marks a summation readout head.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<String>,
}

fn one() -> i64 {
    1
}

fn default_encoding() -> String {
    "static".into()
}

fn dim(what: String, v: Option<i64>) -> Result<usize> {
    match v {
        None => Err(Error::Malformed(format!("missing field {what}"))),
        Some(v) if v <= 0 => Err(Error::NonPositiveDimension(format!("{what} = {v}"))),
        Some(v) => Ok(v as usize),
    }
}

impl NetworkDoc {
    pub fn into_spec(self) -> Result<NetworkSpec> {
        let mode: Mode = self.mode.parse()?;
        let neuron: NeuronModel = self.neuron.parse()?;
        let encoding: EncodingScheme = self.encoding.parse()?;
        if self.timesteps <= 0 {
            return Err(Error::NonPositiveDimension(format!(
                "timesteps = {}",
                self.timesteps
            )));
        }
        let input = Shape::new(
            dim("input.c".into(), Some(self.input.c))?,
            dim("input.h".into(), Some(self.input.h))?,
            dim("input.w".into(), Some(self.input.w))?,
        );
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.into_iter().enumerate() {
            let layer = match l.kind.as_str() {
                "conv" => {
                    let kh = dim(format!("layers[{i}].kh"), l.kh)?;
                    let kw = dim(format!("layers[{i}].kw"), l.kw.or(Some(kh as i64)))?;
                    let mut conv = ConvLayer::new(
                        dim(format!("layers[{i}].c_out"), l.c_out)?,
                        kh,
                        kw,
                        dim(format!("layers[{i}].stride"), l.stride.or(Some(1)))?,
                        l.bias.unwrap_or(true),
                    );
                    conv.sum_readout = match l.readout.as_deref() {
                        None => false,
                        Some("sum") => true,
                        Some(other) => {
                            return Err(Error::Malformed(format!(
                                "layers[{i}]: unknown readout `{other}`"
                            )))
                        }
                    };
                    Layer::Conv(conv)
                }
                "fc" => Layer::Fc(FcLayer::new(
                    0,
                    dim(format!("layers[{i}].n_out"), l.n_out)?,
                    l.bias.unwrap_or(true),
                )),
                other => return Err(Error::UnknownLayerKind(other.to_string())),
            };
            layers.push(layer);
        }
        let spec = NetworkSpec {
            name: self.name,
            mode,
            timesteps: self.timesteps as u32,
            neuron,
            encoding,
            input,
            layers,
        }
        .infer_shapes()?;
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&NetworkSpec> for NetworkDoc {
    fn from(spec: &NetworkSpec) -> Self {
        NetworkDoc {
            name: spec.name.clone(),
            mode: spec.mode.to_string(),
            timesteps: spec.timesteps as i64,
            neuron: spec.neuron.to_string(),
            encoding: spec.encoding.to_string(),
            input: InputDoc {
                c: spec.input.c as i64,
                h: spec.input.h as i64,
                w: spec.input.w as i64,
            },
            layers: spec
                .layers
                .iter()
                .map(|l| match l {
                    Layer::Conv(c) => LayerDoc {
                        kind: "conv".into(),
                        c_out: Some(c.c_out as i64),
                        kh: Some(c.h_kernel as i64),
                        kw: Some(c.w_kernel as i64),
                        stride: Some(c.stride as i64),
                        bias: Some(c.has_bias),
                        readout: c.sum_readout.then(|| "sum".to_string()),
                        ..Default::default()
                    },
                    Layer::Fc(f) => LayerDoc {
                        kind: "fc".into(),
                        n_out: Some(f.n_out as i64),
                        bias: Some(f.has_bias),
                        ..Default::default()
                    },
                })
                .collect(),
            note: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(input: &str, layers: &str) -> String {
        format!(
            r#"{{"name":"t","mode":"snn","timesteps":4,"neuron":"if","encoding":"static",
                "input":{input},"layers":[{layers}]}}"#
        )
    }

    fn conv(c_out: usize, k: usize, s: usize) -> Layer {
        Layer::Conv(ConvLayer::new(c_out, k, k, s, true))
    }

    #[test]
    fn same_padding_stride_one_preserves_extent() {
        let spec = parse_network(&doc(
            r#"{"c":3,"h":32,"w":32}"#,
            r#"{"kind":"conv","c_out":16,"kh":3,"kw":3,"stride":1,"bias":true}"#,
        ))
        .unwrap();
        let Layer::Conv(c) = &spec.layers[0] else {
            panic!()
        };
        assert_eq!((c.h_out, c.w_out), (32, 32));
        assert_eq!(c.c_in, 3);
    }

    #[test]
    fn stride_two_halves_extent() {
        let spec = parse_network(&doc(
            r#"{"c":64,"h":32,"w":32}"#,
            r#"{"kind":"conv","c_out":64,"kh":3,"kw":3,"stride":2}"#,
        ))
        .unwrap();
        let Layer::Conv(c) = &spec.layers[0] else {
            panic!()
        };
        assert_eq!(c.h_out, 16);
    }

    #[test]
    fn zero_channels_rejected() {
        let err = parse_network(&doc(
            r#"{"c":3,"h":8,"w":8}"#,
            r#"{"kind":"conv","c_out":0,"kh":3,"kw":3,"stride":1}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveDimension(_)), "{err}");
        assert!(err.to_string().contains("non-positive dimension"));
    }

    #[test]
    fn pooling_and_unknown_kinds_rejected() {
        let err =
            parse_network(&doc(r#"{"c":3,"h":8,"w":8}"#, r#"{"kind":"maxpool"}"#)).unwrap_err();
        assert!(matches!(err, Error::UnknownLayerKind(k) if k == "maxpool"));
    }

    #[test]
    fn malformed_document_rejected() {
        assert!(matches!(
            parse_network("{not json"),
            Err(Error::Malformed(_))
        ));
        let typo = doc(r#"{"c":3,"h":8,"w":8}"#, r#"{"kind":"fc","n_outt":3}"#);
        assert!(matches!(parse_network(&typo), Err(Error::Malformed(_))));
    }

    #[test]
    fn relu_in_snn_mode_rejected() {
        let d = doc(r#"{"c":3,"h":8,"w":8}"#, r#"{"kind":"fc","n_out":3}"#)
            .replace("\"if\"", "\"relu\"");
        assert!(matches!(
            parse_network(&d),
            Err(Error::NeuronModeMismatch { .. })
        ));
    }

    #[test]
    fn one_dimensional_same_padding() {
        let spec = NetworkSpec {
            name: "1d".into(),
            mode: Mode::Fnn,
            timesteps: 1,
            neuron: NeuronModel::Relu,
            encoding: EncodingScheme::StaticRepeat,
            input: Shape::new(10, 48, 1),
            layers: vec![Layer::Conv(ConvLayer::new(48, 3, 1, 1, true))],
        }
        .infer_shapes()
        .unwrap();
        let Layer::Conv(c) = &spec.layers[0] else {
            panic!()
        };
        assert_eq!((c.h_out, c.w_out), (48, 1));
    }

    #[test]
    fn odd_extent_with_stride_two_rounds_up() {
        let c = ConvLayer::with_input(Shape::new(1, 5, 5), 1, (3, 3), 2, false);
        assert_eq!((c.h_out, c.w_out), (3, 3));
    }

    #[test]
    fn five_stride_two_convs_reach_one_by_one() {
        let layers = (0..5).map(|_| conv(8, 3, 2)).collect();
        let spec = NetworkSpec {
            name: "v".into(),
            mode: Mode::Fnn,
            timesteps: 1,
            neuron: NeuronModel::Relu,
            encoding: EncodingScheme::StaticRepeat,
            input: Shape::new(3, 32, 32),
            layers,
        }
        .infer_shapes()
        .unwrap();
        // 32 -> 16 -> 8 -> 4 -> 2 -> 1
        let extents: Vec<_> = spec.layers.iter().map(|l| l.output_shape().h).collect();
        assert_eq!(extents, vec![16, 8, 4, 2, 1]);
    }

    #[test]
    fn declared_input_conflict_is_chain_inconsistency() {
        let mut second = ConvLayer::new(4, 3, 3, 1, true);
        second.c_in = 7;
        let spec = NetworkSpec {
            name: "bad".into(),
            mode: Mode::Fnn,
            timesteps: 1,
            neuron: NeuronModel::Relu,
            encoding: EncodingScheme::StaticRepeat,
            input: Shape::new(3, 8, 8),
            layers: vec![conv(4, 3, 1), Layer::Conv(second)],
        };
        assert!(matches!(
            spec.infer_shapes(),
            Err(Error::ShapeMismatch { layer: 1, .. })
        ));
    }

    #[test]
    fn neuron_counts() {
        let c = Layer::Conv(ConvLayer::with_input(
            Shape::new(1, 4, 4),
            2,
            (3, 3),
            1,
            true,
        ));
        assert_eq!(c.neuron_count(), 32);
        assert_eq!(Layer::Fc(FcLayer::new(10, 35, true)).neuron_count(), 35);
        let gsc = Layer::Conv(ConvLayer::with_input(
            Shape::new(10, 48, 1),
            48,
            (3, 1),
            1,
            true,
        ));
        assert_eq!(gsc.neuron_count(), 2304);
    }

    #[test]
    fn fc_after_conv_flattens() {
        let spec = parse_network(&doc(
            r#"{"c":2,"h":4,"w":4}"#,
            r#"{"kind":"conv","c_out":3,"kh":3,"kw":3,"stride":2},{"kind":"fc","n_out":5}"#,
        ))
        .unwrap();
        let Layer::Fc(f) = &spec.layers[1] else {
            panic!()
        };
        assert_eq!(f.n_in, 3 * 2 * 2);
    }

    #[test]
    fn dynamic_chunk_executes_chunk_sized_maps() {
        let spec = parse_network(
            r#"{"name":"g","mode":"snn","timesteps":2,"neuron":"lif","encoding":"dynamic",
                "input":{"c":10,"h":48,"w":1},
                "layers":[{"kind":"conv","c_out":48,"kh":3,"kw":1,"stride":1}]}"#,
        )
        .unwrap();
        let exec = spec.execution_layers().unwrap();
        assert_eq!(exec[0].neuron_count(), 48 * 24);
        assert_eq!(spec.layers[0].neuron_count(), 48 * 48);
        assert_eq!(
            spec.to_fnn().execution_layers().unwrap()[0].neuron_count(),
            48 * 48
        );
    }

    #[test]
    fn json_round_trip() {
        let text = doc(
            r#"{"c":2,"h":9,"w":7}"#,
            r#"{"kind":"conv","c_out":3,"kh":3,"kw":1,"stride":2,"bias":false},
               {"kind":"conv","c_out":2,"kh":1,"kw":1,"stride":1,"readout":"sum"}"#,
        );
        let spec = parse_network(&text).unwrap();
        assert_eq!(parse_network(&spec.to_json()).unwrap(), spec);
    }
}
