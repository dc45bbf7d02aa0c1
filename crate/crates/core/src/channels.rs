//! Standard single-qubit noise channels and their text form.
//!
//! Text grammar (used in config files):
//!
//! ```text
//! identity
//! depolarizing:<p>        p in [0, 1], weight split equally over X, Y, Z
//! dephasing:<p>           p in [0, 1]
//! bit_flip:<p>            p in [0, 1]
//! amplitude_damping:<g>   g in [0, 1]
//! rotation:<axis>:<theta> axis = x | y | z | <nx>,<ny>,<nz>; theta in radians
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amplitude;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ONE, ZERO};
use crate::oper::GeneralizedOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Identity,
    Depolarizing,
    Dephasing,
    BitFlip,
    AmplitudeDamping,
    Rotation,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Identity => "identity",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::AmplitudeDamping => "amplitude_damping",
            ChannelKind::Rotation => "rotation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    kind: ChannelKind,
    param: f64,
    axis: [f64; 3],
}

const Z_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

impl ChannelSpec {
    pub fn new(kind: ChannelKind, param: f64, axis: [f64; 3]) -> Result<Self> {
        if !param.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite channel parameter {param}")));
        }
        match kind {
            ChannelKind::Identity => {}
            ChannelKind::Rotation => {
                let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "rotation axis must be a unit vector, norm is {norm}"
                    )));
                }
            }
            _ => {
                if !(0.0..=1.0).contains(&param) {
                    return Err(Error::InvalidArgument(format!(
                        "{} parameter {param} outside [0, 1]",
                        kind.name()
                    )));
                }
            }
        }
        let param = if kind == ChannelKind::Identity { 0.0 } else { param };
        let axis = if kind == ChannelKind::Rotation { axis } else { Z_AXIS };
        Ok(Self { kind, param, axis })
    }

    pub fn identity() -> Self {
        Self {
            kind: ChannelKind::Identity,
            param: 0.0,
            axis: Z_AXIS,
        }
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::new(ChannelKind::Depolarizing, p, Z_AXIS)
    }

    pub fn dephasing(p: f64) -> Result<Self> {
        Self::new(ChannelKind::Dephasing, p, Z_AXIS)
    }

    pub fn bit_flip(p: f64) -> Result<Self> {
        Self::new(ChannelKind::BitFlip, p, Z_AXIS)
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        Self::new(ChannelKind::AmplitudeDamping, gamma, Z_AXIS)
    }

    pub fn rotation(axis: [f64; 3], theta: f64) -> Result<Self> {
        Self::new(ChannelKind::Rotation, theta, axis)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn is_identity(&self) -> bool {
        self.kind == ChannelKind::Identity || self.param == 0.0
    }

    /// Canonical generalized-unitary operator for this channel.
    pub fn build(&self) -> GeneralizedOperator {
        let [i, x, y, z] = crate::oper::pauli_basis();
        let p = self.param;
        let s = |v: f64| c(v.sqrt(), 0.0);
        let terms = match self.kind {
            ChannelKind::Identity => vec![i],
            ChannelKind::Depolarizing => vec![
                i * s(1.0 - p),
                x * s(p / 3.0),
                y * s(p / 3.0),
                z * s(p / 3.0),
            ],
            ChannelKind::Dephasing => vec![i * s(1.0 - p), z * s(p)],
            ChannelKind::BitFlip => vec![i * s(1.0 - p), x * s(p)],
            ChannelKind::AmplitudeDamping => vec![
                CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, s(1.0 - p)]),
                CMat::from_row_slice(2, 2, &[ZERO, s(p), ZERO, ZERO]),
            ],
            ChannelKind::Rotation => {
                // exp(-i theta (n·sigma)/2) = cos(theta/2) I - i sin(theta/2) n·sigma
                let [nx, ny, nz] = self.axis;
                let n_sigma = x * c(nx, 0.0) + y * c(ny, 0.0) + z * c(nz, 0.0);
                vec![i * c((p / 2.0).cos(), 0.0) - n_sigma * c(0.0, (p / 2.0).sin())]
            }
        };
        GeneralizedOperator::from_kraus_with_dims(terms, 2, 2).expect("2x2 channel terms")
    }

    /// `E(build(spec), I)`: the memory/channel error amplitude of this channel.
    pub fn channel_error(&self) -> Result<f64> {
        amplitude::error_amplitude_value(&self.build(), &linalg::identity(2), None)
    }

    /// Pauli probabilities `(p_x, p_y, p_z)` for Pauli-diagonal channels.
    pub fn pauli_probabilities(&self) -> Option<[f64; 3]> {
        let p = self.param;
        match self.kind {
            ChannelKind::Identity => Some([0.0; 3]),
            ChannelKind::Depolarizing => Some([p / 3.0; 3]),
            ChannelKind::Dephasing => Some([0.0, 0.0, p]),
            ChannelKind::BitFlip => Some([p, 0.0, 0.0]),
            _ => None,
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ChannelKind::Identity => write!(f, "identity"),
            ChannelKind::Rotation => {
                let axis = match self.axis {
                    [1.0, 0.0, 0.0] => "x".to_string(),
                    [0.0, 1.0, 0.0] => "y".to_string(),
                    [0.0, 0.0, 1.0] => "z".to_string(),
                    [a, b, cc] => format!("{a},{b},{cc}"),
                };
                write!(f, "rotation:{axis}:{}", self.param)
            }
            kind => write!(f, "{}:{}", kind.name(), self.param),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("channel `{s}`: {msg}"));
        let number = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{v}` is not a number")))
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let spec = match parts.as_slice() {
            ["identity"] => Ok(Self::identity()),
            ["depolarizing", p] => Self::depolarizing(number(p)?),
            ["dephasing", p] => Self::dephasing(number(p)?),
            ["bit_flip", p] => Self::bit_flip(number(p)?),
            ["amplitude_damping", g] => Self::amplitude_damping(number(g)?),
            ["rotation", axis, theta] => {
                let axis = match *axis {
                    "x" => [1.0, 0.0, 0.0],
                    "y" => [0.0, 1.0, 0.0],
                    "z" => [0.0, 0.0, 1.0],
                    other => {
                        let comps: Vec<f64> = other
                            .split(',')
                            .map(number)
                            .collect::<Result<_>>()?;
                        <[f64; 3]>::try_from(comps)
                            .map_err(|_| bad("axis needs three components".into()))?
                    }
                };
                Self::rotation(axis, number(theta)?)
            }
            _ => return Err(bad("unknown channel form".into())),
        };
        spec.map_err(|e| match e {
            Error::InvalidArgument(m) => bad(m),
            other => other,
        })
    }
}
