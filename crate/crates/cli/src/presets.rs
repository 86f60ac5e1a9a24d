//! Named configurations of the published experiments.

use ch_parareal::{AlgorithmVariant, InitialCondition};

use crate::config::{FineKind, Overrides, RunConfig};
use crate::error::{CliError, Result};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const PRESETS: [Preset; 13] = [
    Preset {
        name: "pa1-fig1-small-eps",
        summary: "PA-I, T=1, h=1/64, N=20, J=200, eps=0.0725",
    },
    Preset {
        name: "pa1-fig1-small-eps-2d",
        summary: "PA-I in 2D, T=1, h=1/32, N=20, J=200/8, eps=0.0725",
    },
    Preset {
        name: "pa1-fig1-large-eps",
        summary: "PA-I, T=1, h=1/64, N=20, J=200, eps=0.725",
    },
    Preset {
        name: "pa1-mesh-independence",
        summary: "PA-I, T=1, h=1/128, N=20, J=200, eps=0.0725",
    },
    Preset {
        name: "pa2-baseline",
        summary: "PA-II, T=1, h=1/64, N=20, J=200, eps=0.0725",
    },
    Preset {
        name: "pa2-baseline-2d",
        summary: "PA-II in 2D, T=1, h=1/32, N=20, J=200, eps=0.0825",
    },
    Preset {
        name: "pa3-baseline",
        summary: "PA-III, T=1, h=1/64, N=20, J=200, eps=0.0725",
    },
    Preset {
        name: "pa3-baseline-2d",
        summary: "PA-III in 2D, T=1, h=1/32, N=20, J=200, eps=0.0625",
    },
    Preset {
        name: "npa1-baseline",
        summary: "NPA-I, T=20, h=1/64, N=20, J=200, eps=0.0725",
    },
    Preset {
        name: "npa1-baseline-2d",
        summary: "NPA-I in 2D, T=1, h=1/32, N=20, J=200/10, eps=0.0725",
    },
    Preset {
        name: "npa2-baseline",
        summary: "NPA-II, T=20, h=1/64, N=20, J=150, eps=0.0725",
    },
    Preset {
        name: "npa2-lte",
        summary: "NPA-II, T=20, h=1/64, N=20, J=200, eps=0.0725",
    },
    Preset {
        name: "pa1-nn",
        summary: "PA-I with a Neumann-Neumann fine solver, T=1, h=1/128, N=20, J=200, N0=8, theta=1/4",
    },
];

/// Initial condition shared by all presets: `sin(2πx)` (times `sin(2πy)` in 2D).
pub const PRESET_IC: InitialCondition = InitialCondition::Sine {
    amplitude: 1.0,
    mode: 2,
};

fn baseline(algorithm: AlgorithmVariant) -> Overrides {
    Overrides {
        algorithm: Some(algorithm),
        dim: Some(1),
        t_final: Some(1.0),
        slices: Some(20),
        fine_steps: Some(200),
        h_den: Some(64),
        eps: Some(0.0725),
        ic: Some(PRESET_IC),
        fine: Some(FineKind::Direct),
        ..Default::default()
    }
}

fn two_d(o: Overrides, j_downscale: usize) -> Overrides {
    Overrides {
        dim: Some(2),
        h_den: Some(32),
        fine_steps: o.fine_steps.map(|j| j / j_downscale),
        j_downscale: Some(j_downscale),
        ..o
    }
}

/// The preset as a configuration layer, so that flags given with it can
/// still change `N`, `J`, ... before defaults are resolved.
pub fn preset_overrides(name: &str) -> Result<Overrides> {
    use AlgorithmVariant::*;
    let o = match name {
        "pa1-fig1-small-eps" => baseline(Pa1),
        "pa1-fig1-small-eps-2d" => two_d(baseline(Pa1), 8),
        "pa1-fig1-large-eps" => Overrides {
            eps: Some(0.725),
            ..baseline(Pa1)
        },
        "pa1-mesh-independence" => Overrides {
            h_den: Some(128),
            ..baseline(Pa1)
        },
        "pa2-baseline" => baseline(Pa2),
        "pa2-baseline-2d" => Overrides {
            eps: Some(0.0825),
            ..two_d(baseline(Pa2), 1)
        },
        "pa3-baseline" => baseline(Pa3),
        "pa3-baseline-2d" => Overrides {
            eps: Some(0.0625),
            ..two_d(baseline(Pa3), 1)
        },
        "npa1-baseline" => Overrides {
            t_final: Some(20.0),
            ..baseline(Npa1)
        },
        "npa1-baseline-2d" => two_d(baseline(Npa1), 10),
        "npa2-baseline" => Overrides {
            t_final: Some(20.0),
            fine_steps: Some(150),
            ..baseline(Npa2)
        },
        "npa2-lte" => Overrides {
            t_final: Some(20.0),
            ..baseline(Npa2)
        },
        "pa1-nn" => Overrides {
            h_den: Some(128),
            fine: Some(FineKind::Nn),
            nn_sub: Some(8),
            theta: Some(0.25),
            nn_tol: Some(1e-10),
            ..baseline(Pa1)
        },
        _ => {
            let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
            return Err(CliError::Config(format!(
                "unknown preset `{name}`; available presets: {}",
                names.join(", ")
            )));
        }
    };
    Ok(o)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    preset_overrides(name)?.resolve()
}
