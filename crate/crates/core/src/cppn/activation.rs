use serde::{Deserialize, Serialize};

/// Node transfer functions available to a CPPN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Sigmoid,
    Sine,
    Cosine,
    Gaussian,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Linear,
        Activation::Sigmoid,
        Activation::Sine,
        Activation::Cosine,
        Activation::Gaussian,
    ];

    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Linear => v,
            // bipolar sigmoid, range (-1, 1)
            Activation::Sigmoid => 2.0 / (1.0 + (-4.9 * v).exp()) - 1.0,
            Activation::Sine => v.sin(),
            Activation::Cosine => v.cos(),
            Activation::Gaussian => (-(v * v)).exp(),
        }
    }
}
