//! Network architectures: standard PReLU nets, ICNNs, CDiNN-1/2 and their
//! recurrent variants, plus the DC split consumed by the optimizers.

mod construct;
mod feedforward;
mod recurrent;
mod split;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use construct::{delay_construct, max_affine_construct};
pub use feedforward::{Branch, FeedForward};
pub use recurrent::Recurrent;
pub use split::{dc_split, ConvexPiece, DcSplit};

use crate::nn::{Activation, GradStore, Params};
use crate::{Error, Result};

/// Initial PC-ReLU slope, the usual PReLU starting point.
pub const INITIAL_SLOPE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Standard,
    Icnn,
    Cdinn1,
    Cdinn2,
    RecurrentIcnn,
    RecurrentCdinn,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Standard,
        Kind::Icnn,
        Kind::Cdinn1,
        Kind::Cdinn2,
        Kind::RecurrentIcnn,
        Kind::RecurrentCdinn,
    ];

    pub fn is_recurrent(self) -> bool {
        matches!(self, Kind::RecurrentIcnn | Kind::RecurrentCdinn)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Standard => "standard",
            Kind::Icnn => "icnn",
            Kind::Cdinn1 => "cdinn1",
            Kind::Cdinn2 => "cdinn2",
            Kind::RecurrentIcnn => "ricnn",
            Kind::RecurrentCdinn => "rcdinn",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::Standard => "Std. ReLU",
            Kind::Icnn => "ICNN",
            Kind::Cdinn1 => "CDiNN-1",
            Kind::Cdinn2 => "CDiNN-2",
            Kind::RecurrentIcnn => "Recurrent ICNN",
            Kind::RecurrentCdinn => "Recurrent CDiNN",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" | "std" => Ok(Kind::Standard),
            "icnn" => Ok(Kind::Icnn),
            "cdinn1" | "cdinn-1" => Ok(Kind::Cdinn1),
            "cdinn2" | "cdinn-2" => Ok(Kind::Cdinn2),
            "ricnn" | "recurrent_icnn" => Ok(Kind::RecurrentIcnn),
            "rcdinn" | "recurrent_cdinn" => Ok(Kind::RecurrentCdinn),
            other => Err(Error::config(format!("unknown architecture '{other}'"))),
        }
    }
}

/// Architecture descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub kind: Kind,
    pub input_dim: usize,
    /// Hidden widths; for CDiNN-2 these describe each of the two trunks and
    /// for recurrent kinds a single entry is the recurrent state size.
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    pub output_activation: Activation,
    pub passthrough: bool,
    pub bias: bool,
    /// Multiply the output by -1 (a concave ICNN).
    pub negate_output: bool,
    /// Recurrent kinds: feed `[u; -u]` instead of `u`.
    pub expand_input: bool,
    pub seed: u64,
}

impl NetworkSpec {
    /// Spec with the defaults of `kind`: ICNNs use ReLU with pass-through,
    /// CDiNNs and standard nets use PC-ReLU without pass-through.
    pub fn new(kind: Kind, input_dim: usize, hidden: Vec<usize>) -> Self {
        let icnn_like = matches!(kind, Kind::Icnn | Kind::RecurrentIcnn);
        NetworkSpec {
            kind,
            input_dim,
            hidden,
            output_dim: 1,
            activation: if icnn_like {
                Activation::Relu
            } else {
                Activation::PcRelu
            },
            output_activation: Activation::Linear,
            passthrough: icnn_like,
            bias: true,
            negate_output: false,
            expand_input: kind == Kind::RecurrentIcnn,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_passthrough(mut self, on: bool) -> Self {
        self.passthrough = on;
        self
    }

    pub fn with_bias(mut self, on: bool) -> Self {
        self.bias = on;
        self
    }

    pub fn with_activation(mut self, act: Activation) -> Self {
        self.activation = act;
        self
    }

    pub fn negated(mut self) -> Self {
        self.negate_output = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("input_dim must be at least 1"));
        }
        if self.output_dim != 1 {
            return Err(Error::config(format!(
                "only scalar outputs are supported, got output_dim {}",
                self.output_dim
            )));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::config(format!(
                "hidden widths must be non-empty and positive, got {:?}",
                self.hidden
            )));
        }
        if self.kind.is_recurrent() && self.hidden.len() != 1 {
            return Err(Error::config(
                "recurrent networks take exactly one hidden width",
            ));
        }
        if self.activation == Activation::Linear && self.kind != Kind::Standard {
            return Err(Error::config(
                "hidden activation must be relu or pc_relu for constrained kinds",
            ));
        }
        if self.output_activation == Activation::PcRelu {
            return Err(Error::config("output activation must be linear or relu"));
        }
        if self.output_activation == Activation::Relu && self.kind != Kind::RecurrentIcnn {
            return Err(Error::config(
                "a relu output activation is only defined for the recurrent ICNN",
            ));
        }
        Ok(())
    }
}

/// A built network of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Network {
    FeedForward(FeedForward),
    Recurrent(Recurrent),
}

/// Build and initialise the parameters for `spec`: Xavier-normal weights,
/// zero biases and PC-ReLU slopes at [`INITIAL_SLOPE`].
pub fn build(spec: &NetworkSpec) -> Result<Network> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    if spec.kind.is_recurrent() {
        Ok(Network::Recurrent(Recurrent::init(spec, &mut rng)?))
    } else {
        Ok(Network::FeedForward(FeedForward::init(spec, &mut rng)?))
    }
}

impl Network {
    pub fn spec(&self) -> &NetworkSpec {
        match self {
            Network::FeedForward(n) => &n.spec,
            Network::Recurrent(n) => &n.spec,
        }
    }

    pub fn kind(&self) -> Kind {
        self.spec().kind
    }

    pub fn as_feedforward(&self) -> Option<&FeedForward> {
        match self {
            Network::FeedForward(n) => Some(n),
            Network::Recurrent(_) => None,
        }
    }

    pub fn as_recurrent(&self) -> Option<&Recurrent> {
        match self {
            Network::Recurrent(n) => Some(n),
            Network::FeedForward(_) => None,
        }
    }

    /// Scalar output for a single input vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        match self {
            Network::FeedForward(n) => n.forward(x),
            Network::Recurrent(_) => Err(Error::Contract(
                "recurrent networks map sequences; use forward_sequence".into(),
            )),
        }
    }

    /// Per-step outputs over a sequence.
    pub fn forward_sequence(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            Network::Recurrent(n) => n.forward(inputs),
            Network::FeedForward(n) => inputs.iter().map(|x| n.forward(x)).collect(),
        }
    }

    /// Gradient of the scalar output with respect to raw parameters and input.
    pub fn backward(&self, x: &[f64]) -> Result<GradStore<Network>> {
        match self {
            Network::FeedForward(n) => {
                let g = n.backward(x)?;
                Ok(GradStore {
                    params: Network::FeedForward(g.params),
                    input: g.input,
                })
            }
            Network::Recurrent(_) => Err(Error::Contract(
                "recurrent output is a sequence, not a scalar; use Recurrent::backward".into(),
            )),
        }
    }
}

impl Params for Network {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        match self {
            Network::FeedForward(n) => n.visit(f),
            Network::Recurrent(n) => n.visit(f),
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        match self {
            Network::FeedForward(n) => n.visit_mut(f),
            Network::Recurrent(n) => n.visit_mut(f),
        }
    }

    fn project(&mut self) {
        match self {
            Network::FeedForward(n) => n.project(),
            Network::Recurrent(n) => n.project(),
        }
    }
}
