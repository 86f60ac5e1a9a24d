//! Initial conditions `u⁰`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::grid::{Field, SpatialGrid};

pub const DEFAULT_SEED: u64 = 20_220_611;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Independent uniform samples in `[-amplitude, amplitude]` drawn from a
    /// ChaCha8 stream seeded with `seed`, assigned to the interior nodes in storage order.
    SeededRandom { seed: u64, amplitude: f64 },
    /// `amplitude · sin(mode π x)` in 1D, `amplitude · sin(mode π x) sin(mode π y)` in 2D.
    Sine { amplitude: f64, mode: u32 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::SeededRandom {
            seed: DEFAULT_SEED,
            amplitude: 0.1,
        }
    }
}

impl InitialCondition {
    /// The smooth preset `0.1 sin(πx)` (times `sin(πy)` in 2D).
    pub fn smooth_sine() -> Self {
        InitialCondition::Sine {
            amplitude: 0.1,
            mode: 1,
        }
    }

    pub fn build(&self, grid: SpatialGrid) -> Field {
        match *self {
            InitialCondition::SeededRandom { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let values = (0..grid.interior_count())
                    .map(|_| amplitude * rng.random_range(-1.0..=1.0))
                    .collect();
                Field::from_raw(grid, values)
            }
            InitialCondition::Sine { amplitude, mode } => {
                let k = mode as f64 * PI;
                let two_d = grid.dim() == 2;
                Field::from_fn(grid, |x, y| {
                    let s = amplitude * (k * x).sin();
                    if two_d {
                        s * (k * y).sin()
                    } else {
                        s
                    }
                })
            }
        }
    }
}

/// `random:<seed>:<amplitude>` or `sine:<amplitude>:<mode>`.
impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::SeededRandom { seed, amplitude } => write!(f, "random:{seed}:{amplitude}"),
            InitialCondition::Sine { amplitude, mode } => write!(f, "sine:{amplitude}:{mode}"),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "initial-condition",
            reason,
        };
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize, default: &str| -> Result<f64, Error> {
            let text = parts.get(i).copied().unwrap_or(default);
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("`{text}` is not a number in `{s}`")))
        };
        let int = |i: usize, default: &str| -> Result<u64, Error> {
            let text = parts.get(i).copied().unwrap_or(default);
            text.parse::<u64>()
                .map_err(|_| bad(format!("`{text}` is not a non-negative integer in `{s}`")))
        };
        match parts[0] {
            "random" if parts.len() <= 3 => Ok(InitialCondition::SeededRandom {
                seed: int(1, &DEFAULT_SEED.to_string())?,
                amplitude: num(2, "0.1")?,
            }),
            "sine" if parts.len() <= 3 => {
                let mode = int(2, "1")?;
                if mode == 0 || mode > u32::MAX as u64 {
                    return Err(bad(format!("sine mode must be a positive integer, got {mode}")));
                }
                Ok(InitialCondition::Sine {
                    amplitude: num(1, "0.1")?,
                    mode: mode as u32,
                })
            }
            _ => Err(bad(format!(
                "expected `random[:seed[:amplitude]]` or `sine[:amplitude[:mode]]`, got `{s}`"
            ))),
        }
    }
}
