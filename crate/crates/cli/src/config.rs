//! TOML run configuration.
//!
//! ```toml
//! seed = 7                       # default 0
//!
//! [grid]
//! n = 32                         # required, even, >= 8
//! length = 6.283185307179586     # default 2*pi
//!
//! [flow]
//! nu = 0.02                      # required
//! chi = 0.0                      # default 0
//!
//! [filter]
//! delta = 0.2                    # required
//! N = 1                          # default 0
//!
//! [forcing]
//! kind = "taylor_green"          # or "low_mode_random"; default taylor_green
//! amplitude = 1.0                # rms force, default 1
//!
//! [time]
//! t_end = 10.0                   # required
//! dt = 0.01                      # fixed step; omit for adaptive stepping
//! cfl = 0.4                      # adaptive target, default 0.4
//! dt_max = 0.05                  # adaptive cap, default output.interval
//! burn_in = 0.2                  # averaging burn-in fraction, default 0.2
//!
//! [output]
//! interval = 0.1                 # required
//! dir = "out"                    # default "out"
//! checkpoint = false             # write final.ckpt at the end
//!
//! [initial]
//! kind = "random_band"           # "zero", "taylor_green" or "random_band"
//! amplitude = 1.0                # rms speed, default 1
//! band = 4                       # random_band only, default 4
//!
//! [sweep]
//! chi = [0.0, 1.0, 10.0]         # optional; used by `trm sweep`
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use trm_core::diagnostics::DEFAULT_BURN_IN;
use trm_core::filter::FilterSpec;
use trm_core::solver::{FlowConfig, ForcingKind, ForcingSpec, InitialCondition, TimeControl, DEFAULT_CFL};
use trm_core::spectral::GridSpec;
use trm_core::ConfigError;

pub const DEFAULT_BAND: i64 = 4;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Everything a run needs beyond the physics.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: FlowConfig<f64>,
    pub initial: InitialCondition<f64>,
    pub burn_in: f64,
    pub output_dir: PathBuf,
    pub checkpoint: bool,
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    grid: Option<RawGrid>,
    flow: Option<RawFlow>,
    filter: Option<RawFilter>,
    forcing: Option<RawForcing>,
    time: Option<RawTime>,
    output: Option<RawOutput>,
    initial: Option<RawInitial>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<i64>,
    length: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    nu: Option<f64>,
    chi: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    delta: Option<f64>,
    #[serde(rename = "N")]
    order: Option<i64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    kind: Option<String>,
    amplitude: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
    dt: Option<f64>,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    burn_in: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    interval: Option<f64>,
    dir: Option<String>,
    checkpoint: Option<bool>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    amplitude: Option<f64>,
    band: Option<i64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    chi: Option<Vec<f64>>,
}

fn required<T>(value: Option<T>, key: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| ConfigError::Missing(key.to_string()))
}

fn forcing_kind(name: &str) -> Result<ForcingKind, ConfigError> {
    match name {
        "taylor_green" => Ok(ForcingKind::TaylorGreen),
        "low_mode_random" => Ok(ForcingKind::LowModeRandom),
        other => Err(ConfigError::invalid(
            "forcing.kind",
            format!("must be \"taylor_green\" or \"low_mode_random\", got \"{other}\""),
        )),
    }
}

fn forcing_name(kind: ForcingKind) -> &'static str {
    match kind {
        ForcingKind::TaylorGreen => "taylor_green",
        ForcingKind::LowModeRandom => "low_mode_random",
    }
}

fn initial_condition(raw: RawInitial) -> Result<InitialCondition<f64>, ConfigError> {
    let amplitude = raw.amplitude.unwrap_or(1.0);
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(ConfigError::invalid("initial.amplitude", "must be non-negative"));
    }
    let kind = raw.kind.as_deref().unwrap_or("random_band");
    if raw.band.is_some() && kind != "random_band" {
        return Err(ConfigError::invalid("initial.band", "only applies to kind \"random_band\""));
    }
    match kind {
        "zero" => Ok(InitialCondition::Zero),
        "taylor_green" => Ok(InitialCondition::TaylorGreen { amplitude }),
        "random_band" => {
            let band = raw.band.unwrap_or(DEFAULT_BAND);
            if band < 1 {
                return Err(ConfigError::invalid("initial.band", "must be at least 1"));
            }
            Ok(InitialCondition::SeededRandomBand { amplitude, band })
        }
        other => Err(ConfigError::invalid(
            "initial.kind",
            format!("must be \"zero\", \"taylor_green\" or \"random_band\", got \"{other}\""),
        )),
    }
}

/// Checks a list of sweep coefficients: non-negative and strictly increasing.
pub fn validate_sweep(values: &[f64]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::invalid("sweep.chi", "must list at least one value"));
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(ConfigError::invalid("sweep.chi", "values must be non-negative"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::invalid("sweep.chi", "values must be strictly increasing"));
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunManifest, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::invalid("config", e.message().to_string()))?;

    let grid_raw = required(raw.grid, "grid")?;
    let n = required(grid_raw.n, "grid.n")?;
    if n < 0 {
        return Err(ConfigError::invalid("grid.n", "must be even and at least 8"));
    }
    let grid = GridSpec::new(n as usize, grid_raw.length.unwrap_or(std::f64::consts::TAU))?;

    let flow = required(raw.flow, "flow")?;
    let nu = required(flow.nu, "flow.nu")?;
    let chi = flow.chi.unwrap_or(0.0);

    let filter_raw = required(raw.filter, "filter")?;
    let delta = required(filter_raw.delta, "filter.delta")?;
    let order = filter_raw.order.unwrap_or(0);
    if order < 0 {
        return Err(ConfigError::invalid("filter.N", "must be non-negative"));
    }
    let filter = FilterSpec::new(delta, order as usize)?;

    let forcing_raw = raw.forcing.unwrap_or_default();
    let forcing = ForcingSpec {
        kind: forcing_kind(forcing_raw.kind.as_deref().unwrap_or("taylor_green"))?,
        amplitude: forcing_raw.amplitude.unwrap_or(1.0),
    };

    let output = required(raw.output, "output")?;
    let output_interval = required(output.interval, "output.interval")?;

    let time_raw = required(raw.time, "time")?;
    let t_end = required(time_raw.t_end, "time.t_end")?;
    let time = match time_raw.dt {
        Some(dt) => {
            if time_raw.cfl.is_some() || time_raw.dt_max.is_some() {
                return Err(ConfigError::invalid("time.dt", "cannot be combined with time.cfl or time.dt_max"));
            }
            TimeControl::Fixed { dt }
        }
        None => TimeControl::Cfl {
            target: time_raw.cfl.unwrap_or(DEFAULT_CFL),
            dt_max: time_raw.dt_max.unwrap_or(output_interval),
        },
    };
    let burn_in = time_raw.burn_in.unwrap_or(DEFAULT_BURN_IN);
    if !(0.0..1.0).contains(&burn_in) {
        return Err(ConfigError::invalid("time.burn_in", "must lie in [0, 1)"));
    }

    let config = FlowConfig {
        grid,
        filter,
        nu,
        chi,
        forcing,
        time,
        t_end,
        output_interval,
        seed: raw.seed.unwrap_or(0),
    };
    config.validate()?;

    let sweep = raw.sweep.and_then(|s| s.chi);
    if let Some(values) = &sweep {
        validate_sweep(values)?;
    }

    Ok(RunManifest {
        config,
        initial: initial_condition(raw.initial.unwrap_or_default())?,
        burn_in,
        output_dir: PathBuf::from(output.dir.unwrap_or_else(|| DEFAULT_OUTPUT_DIR.to_string())),
        checkpoint: output.checkpoint.unwrap_or(false),
        sweep,
    })
}

/// Canonical TOML with every key spelled out; [`parse_config`] reads it back
/// to an equal manifest.
pub fn to_toml(manifest: &RunManifest) -> String {
    let c = &manifest.config;
    let (dt, cfl, dt_max) = match c.time {
        TimeControl::Fixed { dt } => (Some(dt), None, None),
        TimeControl::Cfl { target, dt_max } => (None, Some(target), Some(dt_max)),
    };
    let initial = match manifest.initial {
        InitialCondition::Zero => RawInitial {
            kind: Some("zero".into()),
            amplitude: None,
            band: None,
        },
        InitialCondition::TaylorGreen { amplitude } => RawInitial {
            kind: Some("taylor_green".into()),
            amplitude: Some(amplitude),
            band: None,
        },
        InitialCondition::SeededRandomBand { amplitude, band } => RawInitial {
            kind: Some("random_band".into()),
            amplitude: Some(amplitude),
            band: Some(band),
        },
    };
    let raw = RawConfig {
        seed: Some(c.seed),
        grid: Some(RawGrid {
            n: Some(c.grid.n() as i64),
            length: Some(c.grid.box_length()),
        }),
        flow: Some(RawFlow {
            nu: Some(c.nu),
            chi: Some(c.chi),
        }),
        filter: Some(RawFilter {
            delta: Some(c.filter.delta()),
            order: Some(c.filter.order() as i64),
        }),
        forcing: Some(RawForcing {
            kind: Some(forcing_name(c.forcing.kind).into()),
            amplitude: Some(c.forcing.amplitude),
        }),
        time: Some(RawTime {
            t_end: Some(c.t_end),
            dt,
            cfl,
            dt_max,
            burn_in: Some(manifest.burn_in),
        }),
        output: Some(RawOutput {
            interval: Some(c.output_interval),
            dir: Some(manifest.output_dir.to_string_lossy().into_owned()),
            checkpoint: Some(manifest.checkpoint),
        }),
        initial: Some(initial),
        sweep: manifest.sweep.clone().map(|chi| RawSweep { chi: Some(chi) }),
    };
    toml::to_string(&raw).expect("plain data serializes")
}

/// SHA-256 of the canonical TOML, hex encoded. The output directory is left
/// out, so the same run written to two places carries the same hash.
pub fn config_hash(manifest: &RunManifest) -> String {
    let mut m = manifest.clone();
    m.output_dir = PathBuf::new();
    format!("{:x}", Sha256::digest(to_toml(&m).as_bytes()))
}
