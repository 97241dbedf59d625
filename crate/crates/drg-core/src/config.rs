//! Experiment configuration: one JSON document per experiment, with
//! defaults, machine-checked parameter bounds, and assembly of a runnable
//! simulation from a config plus protocol, density and seed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{solve_theta_min, CR_THRESHOLD_MAX};
use crate::metrics::RunMetrics;
use crate::mobility::{GridConfig, HighwayConfig};
use crate::protocol::{DrgParams, FloodParams, ProtocolKind};
use crate::radio::RadioParams;
use crate::sim::{MobilitySpec, OriginSpec, ProtocolSpec, SimSpec, Simulation, ZorRule, TICK_DT_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Highway,
    Grid,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Highway => "highway",
            ScenarioKind::Grid => "grid",
        }
    }
}

/// Channel settings; the range default depends on the scenario (300 m on
/// the highway, 200 m in the city grid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub r_tx_m: Option<f64>,
    pub bitrate_bps: f64,
    pub header_bytes: u64,
    pub p_loss: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig { r_tx_m: None, bitrate_bps: 6e6, header_bytes: 40, p_loss: 0.0 }
    }
}

/// Protocol settings; `max_bo_d_s` defaults to twice the largest frame
/// airtime and `long_bo_d_s` to its own upper bound r_tx / v_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DrgConfig {
    pub max_bo_d_s: Option<f64>,
    pub s_d: f64,
    pub max_retx: u32,
    pub long_bo_d_s: Option<f64>,
    pub cr_threshold: f64,
    pub epsilon: f64,
    pub cw_min_s: f64,
    pub cw_max_s: f64,
    pub jitter_cw_s: f64,
    pub ttl_s: f64,
}

impl Default for DrgConfig {
    fn default() -> Self {
        DrgConfig {
            max_bo_d_s: None,
            s_d: 1.0,
            max_retx: 3,
            long_bo_d_s: None,
            cr_threshold: 0.6,
            epsilon: 1.0,
            cw_min_s: 0.0,
            cw_max_s: 0.5,
            jitter_cw_s: 16.0 * 20e-6,
            ttl_s: 15.0,
        }
    }
}

/// ZOR extent: the highway uses a rect behind the crash, the grid a square
/// centered on the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZorSpec {
    pub width_m: f64,
    pub behind_m: f64,
    pub side_m: f64,
}

impl Default for ZorSpec {
    fn default() -> Self {
        ZorSpec { width_m: 300.0, behind_m: 1500.0, side_m: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub highway: HighwayConfig,
    pub grid: GridConfig,
    pub radio: RadioConfig,
    pub protocol: ProtocolKind,
    pub drg: DrgConfig,
    pub flood: FloodParams,
    pub zor: ZorSpec,
    pub payload_bytes: u64,
    pub originate_at_s: f64,
    pub sim_end_s: f64,
    pub seed: u64,
    pub replicas: u32,
    /// Sweep axis: vehicles/km/lane on the highway, total vehicles on the
    /// grid. Empty = the scenario block's own density.
    pub densities: Vec<f64>,
    /// Sweep axis; `run` uses the single `protocol` field instead.
    pub protocols: Vec<ProtocolKind>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: ScenarioKind::Highway,
            highway: HighwayConfig::default(),
            grid: GridConfig::default(),
            radio: RadioConfig::default(),
            protocol: ProtocolKind::Drg,
            drg: DrgConfig::default(),
            flood: FloodParams::default(),
            zor: ZorSpec::default(),
            payload_bytes: 200,
            originate_at_s: 3.0,
            sim_end_s: 30.0,
            seed: 1,
            replicas: 1,
            densities: Vec::new(),
            protocols: vec![ProtocolKind::Drg, ProtocolKind::Flood],
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The scenario block's own density (sweep axis unit).
    pub fn base_density(&self) -> f64 {
        match self.scenario {
            ScenarioKind::Highway => self.highway.density,
            ScenarioKind::Grid => self.grid.vehicle_count as f64,
        }
    }
}

/// One violated parameter bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Fully resolved run parameters (all defaults applied).
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub radio: RadioParams,
    pub drg: DrgParams,
    pub flood: FloodParams,
    pub v_max: f64,
}

/// Applies scenario-dependent defaults. Callers must have validated the
/// config; unresolvable values panic here.
pub fn resolve(cfg: &ScenarioConfig) -> Resolved {
    let v_max = match cfg.scenario {
        ScenarioKind::Highway => cfg.highway.v_max,
        ScenarioKind::Grid => cfg.grid.v_max,
    };
    let r_tx = cfg.radio.r_tx_m.unwrap_or(match cfg.scenario {
        ScenarioKind::Highway => 300.0,
        ScenarioKind::Grid => 200.0,
    });
    let radio = RadioParams {
        r_tx,
        bitrate: cfg.radio.bitrate_bps,
        header_bytes: cfg.radio.header_bytes,
        p_loss: cfg.radio.p_loss,
    };
    let max_frame_airtime = radio.airtime(radio.header_bytes + cfg.payload_bytes);
    let max_long_bo_d = r_tx / v_max;
    let drg = DrgParams {
        max_bo_d: cfg.drg.max_bo_d_s.unwrap_or(2.0 * max_frame_airtime),
        s_d: cfg.drg.s_d,
        max_retx: cfg.drg.max_retx,
        long_bo_d: cfg.drg.long_bo_d_s.unwrap_or(max_long_bo_d),
        max_long_bo_d,
        cr_threshold: cfg.drg.cr_threshold,
        theta_min: solve_theta_min(cfg.drg.cr_threshold)
            .expect("validated threshold solves"),
        epsilon: cfg.drg.epsilon,
        cw_min: cfg.drg.cw_min_s,
        cw_max: cfg.drg.cw_max_s,
        jitter_cw: cfg.drg.jitter_cw_s,
        ttl: cfg.drg.ttl_s,
    };
    Resolved { radio, drg, flood: cfg.flood, v_max }
}

/// Checks every parameter bound; empty result = valid. Each violation names
/// the offending field and the bound it breaks.
pub fn validate(cfg: &ScenarioConfig) -> Vec<Violation> {
    fn fail(v: &mut Vec<Violation>, field: &str, message: String) {
        v.push(Violation { field: field.to_string(), message });
    }
    let mut v = Vec::new();

    match cfg.scenario {
        ScenarioKind::Highway => {
            let h = &cfg.highway;
            if h.length_m <= 0.0 {
                fail(&mut v, "highway.length_m", "must be positive".into());
            }
            if h.lanes_per_direction < 1 {
                fail(&mut v, "highway.lanes_per_direction", "must be at least 1".into());
            }
            if h.lane_width_m <= 0.0 {
                fail(&mut v, "highway.lane_width_m", "must be positive".into());
            }
            if h.density <= 0.0 {
                fail(&mut v, "highway.density", "must be positive".into());
            }
            if h.v_max <= 0.0 {
                fail(&mut v, "highway.v_max", "must be positive".into());
            }
        }
        ScenarioKind::Grid => {
            let g = &cfg.grid;
            if g.side_m <= 0.0 || g.block_m <= 0.0 {
                fail(&mut v, "grid.side_m", "side and block must be positive".into());
            } else {
                let lines = g.side_m / g.block_m;
                if (lines - lines.round()).abs() > 1e-9 {
                    fail(&mut v, "grid.side_m", "must be a multiple of grid.block_m".into());
                }
            }
            if g.vehicle_count < 1 {
                fail(&mut v, "grid.vehicle_count", "must be at least 1".into());
            }
            if g.v_max <= 0.0 {
                fail(&mut v, "grid.v_max", "must be positive".into());
            }
        }
    }

    if let Some(r) = cfg.radio.r_tx_m {
        if r <= 0.0 {
            fail(&mut v, "radio.r_tx_m", "must be positive".into());
        }
    }
    if cfg.radio.bitrate_bps <= 0.0 {
        fail(&mut v, "radio.bitrate_bps", "must be positive".into());
    }
    if !(0.0..1.0).contains(&cfg.radio.p_loss) {
        fail(&mut v, "radio.p_loss", "must lie in [0, 1)".into());
    }
    if cfg.payload_bytes == 0 {
        fail(&mut v, "payload_bytes", "must be at least 1".into());
    }
    if cfg.originate_at_s < 0.0 {
        fail(&mut v, "originate_at_s", "must be nonnegative".into());
    }
    if cfg.sim_end_s <= cfg.originate_at_s {
        fail(&mut v, "sim_end_s", "must exceed originate_at_s".into());
    }
    if cfg.zor.width_m <= 0.0 || cfg.zor.behind_m <= 0.0 || cfg.zor.side_m <= 0.0 {
        fail(&mut v, "zor", "all extents must be positive".into());
    }

    let d = &cfg.drg;
    if d.s_d <= 0.0 {
        fail(&mut v, "drg.s_d", "must be positive".into());
    }
    if d.max_retx < 1 {
        fail(&mut v, "drg.max_retx", "must be at least 1".into());
    }
    if !(d.cr_threshold > 0.0 && d.cr_threshold <= CR_THRESHOLD_MAX) {
        fail(&mut v, 
            "drg.cr_threshold",
            format!(
                "must lie in (0, {CR_THRESHOLD_MAX}]: beyond that no residual coverage could remain"
            ),
        );
    }
    if d.epsilon <= 0.0 {
        fail(&mut v, "drg.epsilon", "must be positive".into());
    }
    if d.cw_min_s < 0.0 || d.cw_min_s > d.cw_max_s {
        fail(&mut v, "drg.cw_min_s", "window must satisfy 0 <= cw_min_s <= cw_max_s".into());
    }
    if d.jitter_cw_s < 0.0 {
        fail(&mut v, "drg.jitter_cw_s", "must be nonnegative".into());
    }
    if d.ttl_s <= 0.0 {
        fail(&mut v, "drg.ttl_s", "must be positive".into());
    }

    // cross-checks on resolved values (only when their inputs are sane)
    if v.is_empty() {
        let r = resolve(cfg);
        let max_frame_airtime = r.radio.airtime(r.radio.header_bytes + cfg.payload_bytes);
        if r.drg.max_bo_d < 2.0 * max_frame_airtime {
            fail(&mut v, 
                "drg.max_bo_d_s",
                format!(
                    "must cover a round trip to the farthest receiver: at least twice the \
                     largest frame airtime, {} s",
                    2.0 * max_frame_airtime
                ),
            );
        }
        if r.drg.long_bo_d > r.drg.max_long_bo_d {
            fail(&mut v, 
                "drg.long_bo_d_s",
                format!(
                    "must not exceed the time to traverse one transmission range at top \
                     speed, r_tx / v_max = {} s",
                    r.drg.max_long_bo_d
                ),
            );
        }
    }

    let f = &cfg.flood;
    if f.slot <= 0.0 {
        fail(&mut v, "flood.slot", "must be positive".into());
    }
    if f.cw_slots < 1 {
        fail(&mut v, "flood.cw_slots", "must be at least 1".into());
    }
    if f.ttl_hops < 1 {
        fail(&mut v, "flood.ttl_hops", "must be at least 1".into());
    }

    if cfg.replicas < 1 {
        fail(&mut v, "replicas", "must be at least 1".into());
    }
    for (i, dens) in cfg.densities.iter().enumerate() {
        if *dens <= 0.0 {
            fail(&mut v, &format!("densities[{i}]"), "must be positive".into());
        }
    }
    if cfg.protocols.is_empty() {
        fail(&mut v, "protocols", "sweep needs at least one protocol".into());
    }
    v
}

/// Builds a runnable simulation; panics on an invalid config (callers
/// validate first for a diagnostic list).
pub fn build_sim(
    cfg: &ScenarioConfig,
    protocol: ProtocolKind,
    density: f64,
    seed: u64,
) -> Simulation {
    let mut c = cfg.clone();
    match c.scenario {
        ScenarioKind::Highway => c.highway.density = density,
        ScenarioKind::Grid => c.grid.vehicle_count = density.round() as u32,
    }
    let violations = validate(&c);
    assert!(violations.is_empty(), "invalid configuration: {violations:?}");
    let r = resolve(&c);
    let spec = SimSpec {
        mobility: match c.scenario {
            ScenarioKind::Highway => MobilitySpec::Highway(c.highway),
            ScenarioKind::Grid => MobilitySpec::Grid(c.grid),
        },
        radio: r.radio,
        protocol: match protocol {
            ProtocolKind::Drg => ProtocolSpec::Drg(r.drg),
            ProtocolKind::Flood => ProtocolSpec::Flood(r.flood),
        },
        zor_rule: match c.scenario {
            ScenarioKind::Highway => {
                ZorRule::BehindOrigin { width: c.zor.width_m, behind: c.zor.behind_m }
            }
            ScenarioKind::Grid => ZorRule::SquareOnOrigin { side: c.zor.side_m },
        },
        origin: match c.scenario {
            ScenarioKind::Highway => OriginSpec::HighwayLead,
            ScenarioKind::Grid => OriginSpec::GridSource,
        },
        originate_at: c.originate_at_s,
        // the highway origination is the crash; the grid source is pinned
        stop_origin: c.scenario == ScenarioKind::Highway,
        payload_bytes: c.payload_bytes,
        message_ttl: r.drg.ttl,
        sim_end: c.sim_end_s,
        tick_dt: TICK_DT_S,
        scenario_name: c.scenario.name().to_string(),
        density,
    };
    spec.build(seed)
}

/// Runs one (protocol, density, seed) cell to completion.
pub fn run_single(
    cfg: &ScenarioConfig,
    protocol: ProtocolKind,
    density: f64,
    seed: u64,
) -> RunMetrics {
    build_sim(cfg, protocol, density, seed).run()
}

/// The sweep grid in output order: density-major, then protocol, then
/// replica; replica seeds are base seed + index.
pub fn sweep_plan(cfg: &ScenarioConfig) -> Vec<(ProtocolKind, f64, u64)> {
    let densities = if cfg.densities.is_empty() {
        vec![cfg.base_density()]
    } else {
        cfg.densities.clone()
    };
    let mut plan = Vec::new();
    for &density in &densities {
        for &protocol in &cfg.protocols {
            for replica in 0..cfg.replicas {
                plan.push((protocol, density, cfg.seed + replica as u64));
            }
        }
    }
    plan
}
