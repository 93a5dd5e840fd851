//! Configuration parsing and dispatch: one JSON config in, artifacts
//! (JSON reports, CSV series, PPM images) and a run manifest out.
//!
//! Artifacts are written atomically (temp file + rename); exit status 0
//! means pass/success, 2 inconclusive, 1 error.

use crate::extrange::TowerMagnitude;
use crate::growth::{
    self, GrowthError, GrowthRecord, PlanarMap, Scale2View,
};
use crate::linearizer::{omitted_values_check, Consistency, LinearizerError, LinearizerHandle};
use crate::maps::{
    exceptional_values, find_fixed_points, oracle_eval, periodic_points, Classification,
    OracleLinearizer, PolynomialMap, QRPowerMap,
};
use crate::growth::ContinuumVerdict;
use crate::websets::{
    self, render::palette_json, render::write_ppm, PitsVerdict, Viewport, WebVerdict,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing required key \"{key}\" for command \"{command}\"")]
    MissingKey { command: String, key: &'static str },
    #[error("invalid value for key \"{key}\": {reason}")]
    InvalidValue { key: &'static str, reason: String },
    #[error("selected fixed point is not repelling")]
    NotRepelling,
    #[error("command line subcommand \"{given}\" does not match config command \"{config}\"")]
    CommandMismatch { given: String, config: String },
    #[error("I/O failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty series: refusing to write an empty CSV")]
    EmptySeries,
    #[error(transparent)]
    Linearizer(#[from] LinearizerError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
    #[error(transparent)]
    Websets(#[from] websets::WebsetsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Fixpoints,
    Periodic,
    Linearize,
    Residuals,
    Growth,
    Order,
    Bracket,
    Holder,
    Radii,
    Continuum,
    Web,
    Render,
    Julia,
    Pits,
    OracleCheck,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixedPointSelector {
    Named(String),
    Index(usize),
    Point([f64; 2]),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleSelector {
    Named(String),
    Value([f64; 2]),
}

impl ScaleSelector {
    fn is_two(&self) -> bool {
        matches!(self, ScaleSelector::Named(s) if s == "two")
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QrSpec {
    pub stretch: f64,
    pub power: u32,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewportSpec {
    pub center: [f64; 2],
    pub half_width: f64,
    pub half_height: f64,
}

/// Raw config document. Unknown keys are rejected.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigInput {
    pub command: Command,
    /// Polynomial coefficients as [re, im] pairs, constant term first.
    pub map: Option<Vec<[f64; 2]>>,
    pub qr_map: Option<QrSpec>,
    pub fixed_point: Option<FixedPointSelector>,
    pub scale: Option<ScaleSelector>,
    #[serde(rename = "R")]
    pub base_radius: Option<f64>,
    pub mu: Option<f64>,
    pub depth: Option<u32>,
    #[serde(rename = "N")]
    pub n_levels: Option<u32>,
    #[serde(rename = "D")]
    pub annulus_ratio: Option<f64>,
    pub count: Option<u32>,
    pub log_r: Option<f64>,
    pub log_r_min: Option<f64>,
    pub log_r_max: Option<f64>,
    pub samples: Option<usize>,
    pub period: Option<u32>,
    pub iterates: Option<u32>,
    #[serde(rename = "K")]
    pub dilatation: Option<f64>,
    pub search_radius: Option<f64>,
    pub grid: Option<[usize; 2]>,
    pub resolution: Option<[usize; 2]>,
    pub viewport: Option<ViewportSpec>,
    #[serde(rename = "P_max")]
    pub p_max: Option<u8>,
    pub seed: Option<u64>,
}

/// Fully resolved configuration with defaults applied; echoed into the run
/// manifest for reproducibility. Serializing and re-parsing a resolved
/// config yields the same configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub map: Option<Vec<[f64; 2]>>,
    pub qr_map: Option<QrSpec>,
    pub fixed_point: FixedPointSelector,
    pub scale: ScaleSelector,
    #[serde(rename = "R")]
    pub base_radius: f64,
    pub mu: f64,
    pub depth: u32,
    #[serde(rename = "N")]
    pub n_levels: u32,
    #[serde(rename = "D")]
    pub annulus_ratio: f64,
    pub count: u32,
    pub log_r: f64,
    pub log_r_min: f64,
    pub log_r_max: f64,
    pub samples: usize,
    pub period: u32,
    pub iterates: u32,
    #[serde(rename = "K")]
    pub dilatation: f64,
    pub search_radius: f64,
    pub grid: [usize; 2],
    pub resolution: [usize; 2],
    pub viewport: ViewportSpec,
    #[serde(rename = "P_max")]
    pub p_max: u8,
    pub seed: u64,
}

/// Parse and validate a JSON config document: defaults applied, unknown keys
/// rejected, per-command required parameters enforced.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: ConfigInput = serde_json::from_str(text)?;
    if let Some(coeffs) = &raw.map {
        if coeffs.len() < 3 {
            return Err(CliError::InvalidValue {
                key: "map",
                reason: format!(
                    "need at least 3 coefficient pairs for degree >= 2, got {}",
                    coeffs.len()
                ),
            });
        }
    }
    let needs_map = !matches!(raw.command, Command::OracleCheck | Command::Holder);
    if needs_map && raw.map.is_none() {
        return Err(CliError::MissingKey {
            command: raw.command.to_string(),
            key: "map",
        });
    }
    if raw.command == Command::Holder && raw.map.is_none() && raw.qr_map.is_none() {
        return Err(CliError::MissingKey {
            command: raw.command.to_string(),
            key: "map (or qr_map)",
        });
    }
    if raw.command == Command::Periodic && raw.period.is_none() {
        return Err(CliError::MissingKey {
            command: raw.command.to_string(),
            key: "period",
        });
    }

    let fixed_point = match raw.fixed_point {
        None => FixedPointSelector::Named("auto-repelling".to_string()),
        Some(FixedPointSelector::Named(s)) => {
            if s != "auto-repelling" {
                return Err(CliError::InvalidValue {
                    key: "fixed_point",
                    reason: format!("unknown selector \"{s}\" (use \"auto-repelling\", an index, or [re, im])"),
                });
            }
            FixedPointSelector::Named(s)
        }
        Some(other) => other,
    };
    let scale = match raw.scale {
        None => ScaleSelector::Named("multiplier".to_string()),
        Some(ScaleSelector::Named(s)) => {
            if s != "multiplier" && s != "two" {
                return Err(CliError::InvalidValue {
                    key: "scale",
                    reason: format!("unknown selector \"{s}\" (use \"multiplier\", \"two\", or [re, im])"),
                });
            }
            ScaleSelector::Named(s)
        }
        Some(other) => other,
    };

    Ok(RunConfig {
        command: raw.command,
        map: raw.map,
        qr_map: raw.qr_map,
        fixed_point,
        scale,
        base_radius: raw.base_radius.unwrap_or(20.0),
        mu: raw.mu.unwrap_or(2.0),
        depth: raw.depth.unwrap_or(6),
        n_levels: raw.n_levels.unwrap_or(3),
        annulus_ratio: raw.annulus_ratio.unwrap_or(4.0),
        count: raw.count.unwrap_or(8),
        log_r: raw.log_r.unwrap_or(50.0f64.ln()),
        log_r_min: raw.log_r_min.unwrap_or(2.0),
        log_r_max: raw.log_r_max.unwrap_or(2000.0),
        samples: raw.samples.unwrap_or(48),
        period: raw.period.unwrap_or(1),
        iterates: raw.iterates.unwrap_or(4),
        dilatation: raw.dilatation.unwrap_or(1.0),
        search_radius: raw.search_radius.unwrap_or(20.0),
        grid: raw.grid.unwrap_or([256, 512]),
        resolution: raw.resolution.unwrap_or([512, 512]),
        viewport: raw.viewport.unwrap_or(ViewportSpec {
            center: [0.0, 0.0],
            half_width: 40.0,
            half_height: 40.0,
        }),
        p_max: raw.p_max.unwrap_or(8),
        seed: raw.seed.unwrap_or(0),
    })
}

fn polynomial_from(cfg: &RunConfig) -> Result<PolynomialMap, CliError> {
    let coeffs = cfg
        .map
        .as_ref()
        .ok_or(CliError::MissingKey {
            command: cfg.command.to_string(),
            key: "map",
        })?
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    Ok(PolynomialMap::new(coeffs)?)
}

/// Resolve the fixed-point selector against the computed fixed points.
/// Auto-repelling picks the repelling point of largest multiplier modulus,
/// ties broken lexicographically by (re, im).
fn select_fixed_point(
    map: &PolynomialMap,
    selector: &FixedPointSelector,
) -> Result<crate::maps::FixedPointData, CliError> {
    let mut fps = find_fixed_points(map)?;
    fps.sort_by(|a, b| {
        (a.point.re, a.point.im)
            .partial_cmp(&(b.point.re, b.point.im))
            .unwrap()
    });
    let chosen = match selector {
        FixedPointSelector::Named(_) => fps
            .iter()
            .filter(|f| f.classification == Classification::Repelling)
            .max_by(|a, b| {
                a.multiplier
                    .norm()
                    .partial_cmp(&b.multiplier.norm())
                    .unwrap()
                    .then(
                        (b.point.re, b.point.im)
                            .partial_cmp(&(a.point.re, a.point.im))
                            .unwrap(),
                    )
            })
            .copied(),
        FixedPointSelector::Index(i) => fps.get(*i).copied(),
        FixedPointSelector::Point(p) => {
            let target = Complex64::new(p[0], p[1]);
            fps.iter()
                .min_by(|a, b| {
                    (a.point - target)
                        .norm()
                        .partial_cmp(&(b.point - target).norm())
                        .unwrap()
                })
                .copied()
        }
    };
    let fp = chosen.ok_or(CliError::NotRepelling)?;
    if fp.classification != Classification::Repelling {
        return Err(CliError::NotRepelling);
    }
    Ok(fp)
}

fn handle_from(cfg: &RunConfig) -> Result<LinearizerHandle, CliError> {
    let map = polynomial_from(cfg)?;
    let fp = select_fixed_point(&map, &cfg.fixed_point)?;
    let base = LinearizerHandle::construct(map, fp, 1e-12)?;
    match &cfg.scale {
        ScaleSelector::Value(v) => {
            let want = Complex64::new(v[0], v[1]);
            let lambda = base.scale();
            let mut acc = Complex64::new(1.0, 0.0);
            for k in 1..=8u32 {
                acc *= lambda;
                if (acc - want).norm() <= 1e-9 * (1.0 + want.norm()) {
                    return Ok(base.scale_power(k)?);
                }
            }
            Err(CliError::InvalidValue {
                key: "scale",
                reason: format!(
                    "scale {want} is not an integer power (<= 8) of the multiplier {lambda}"
                ),
            })
        }
        _ => Ok(base),
    }
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// CSV emission for growth series: header then one row per record; log-scale
/// fields as decimal text with 12 significant digits, tower heights as a
/// separate integer column.
pub fn emit_csv(series: &[GrowthRecord], path: &Path) -> Result<(), CliError> {
    if series.is_empty() {
        return Err(CliError::EmptySeries);
    }
    let mut out = String::from("log_r,tower_height,log_M_residual,samples\n");
    for rec in series {
        out.push_str(&format!(
            "{:.11e},{},{:.11e},{}\n",
            rec.log_r,
            rec.log_max_modulus.height(),
            rec.log_max_modulus.residual(),
            rec.samples
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Outcome of a dispatch: maps to process exit codes 0 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Inconclusive => 2,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Command,
    version: &'static str,
    config: &'a RunConfig,
    thresholds: serde_json::Value,
    artifacts: Vec<String>,
    outcome: Outcome,
    timing_seconds: f64,
}

fn tower_json(t: &TowerMagnitude) -> serde_json::Value {
    serde_json::json!({"height": t.height(), "residual": t.residual()})
}

/// Run the configured command, writing artifacts under `out_dir`.
pub fn dispatch(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let started = Instant::now();
    let mut artifacts: Vec<String> = Vec::new();
    let mut thresholds = serde_json::json!({});

    let outcome = match cfg.command {
        Command::Fixpoints => {
            let map = polynomial_from(cfg)?;
            let fps = find_fixed_points(&map)?;
            let path = out_dir.join("fixpoints.json");
            write_json(&path, &fps)?;
            artifacts.push("fixpoints.json".into());
            thresholds = serde_json::json!({"residual": 1e-10, "classify_margin": 1e-9});
            Outcome::Pass
        }
        Command::Periodic => {
            let map = polynomial_from(cfg)?;
            let pts = periodic_points(&map, cfg.period)?;
            let path = out_dir.join("periodic.json");
            write_json(&path, &pts)?;
            artifacts.push("periodic.json".into());
            Outcome::Pass
        }
        Command::Linearize => {
            let h = handle_from(cfg)?;
            write_json(&out_dir.join("handle.json"), &h.to_spec())?;
            artifacts.push("handle.json".into());
            Outcome::Pass
        }
        Command::Residuals => {
            let h = handle_from(cfg)?;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            let rho = h.linearization_radius();
            let mut max_res = 0.0f64;
            let mut sum = 0.0f64;
            let n = 1000;
            for _ in 0..n {
                let r: f64 = rng.random_range(0.0..rho);
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let res = h.residual(Complex64::from_polar(r, t))?;
                max_res = max_res.max(res);
                sum += res;
            }
            let pass = max_res <= 1e-8;
            write_json(
                &out_dir.join("residuals.json"),
                &serde_json::json!({
                    "samples": n,
                    "max_residual": max_res,
                    "mean_residual": sum / n as f64,
                    "tolerance": 1e-8,
                    "pass": pass,
                }),
            )?;
            artifacts.push("residuals.json".into());
            thresholds = serde_json::json!({"residual": 1e-8});
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
        Command::Growth => {
            let h = handle_from(cfg)?;
            let series = if cfg.scale.is_two() {
                growth::growth_series(
                    &Scale2View { handle: &h },
                    cfg.log_r_min,
                    cfg.log_r_max,
                    cfg.samples,
                )?
            } else {
                growth::growth_series(&h, cfg.log_r_min, cfg.log_r_max, cfg.samples)?
            };
            emit_csv(&series, &out_dir.join("growth.csv"))?;
            artifacts.push("growth.csv".into());
            Outcome::Pass
        }
        Command::Order => {
            let h = handle_from(cfg)?;
            let est = if cfg.scale.is_two() {
                growth::order_estimate(
                    &Scale2View { handle: &h },
                    cfg.log_r_min,
                    cfg.log_r_max,
                    cfg.samples,
                )?
            } else {
                growth::order_estimate(&h, cfg.log_r_min, cfg.log_r_max, cfg.samples)?
            };
            write_json(&out_dir.join("order.json"), &est)?;
            artifacts.push("order.json".into());
            Outcome::Pass
        }
        Command::Bracket => {
            let h = handle_from(cfg)?;
            let rep = growth::growth_bracket_check(&h, h.map().degree() as u32, cfg.dilatation)?;
            let pass = rep.pass;
            write_json(&out_dir.join("bracket.json"), &rep)?;
            artifacts.push("bracket.json".into());
            thresholds = serde_json::json!({"order_tolerance": rep.tolerance});
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
        Command::Holder => {
            let planar = match (&cfg.qr_map, &cfg.map) {
                (Some(q), _) => PlanarMap::QrPower(QRPowerMap::new(q.stretch, q.power)),
                (None, Some(_)) => PlanarMap::Polynomial(polynomial_from(cfg)?),
                (None, None) => {
                    return Err(CliError::MissingKey {
                        command: cfg.command.to_string(),
                        key: "map (or qr_map)",
                    })
                }
            };
            let fit = growth::holder_bounds_fit(&planar, cfg.iterates.min(6))?;
            let pass = fit.pass;
            write_json(&out_dir.join("holder.json"), &fit)?;
            artifacts.push("holder.json".into());
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
        Command::Radii => {
            let h = handle_from(cfg)?;
            match growth::radii_sequence(&h, cfg.base_radius, cfg.n_levels, cfg.mu) {
                Ok(rep) => {
                    write_json(&out_dir.join("radii.json"), &rep)?;
                    artifacts.push("radii.json".into());
                    Outcome::Pass
                }
                Err(GrowthError::InequalityNeverHolds(n)) => {
                    write_json(
                        &out_dir.join("radii.json"),
                        &serde_json::json!({
                            "error": format!("inequality never holds up to n = {n}; R too small"),
                            "R": cfg.base_radius,
                            "mu": cfg.mu,
                        }),
                    )?;
                    artifacts.push("radii.json".into());
                    Outcome::Inconclusive
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Continuum => {
            let h = handle_from(cfg)?;
            let rep = growth::min_modulus_continuum(
                &h,
                &TowerMagnitude::from_value(cfg.log_r),
                cfg.mu,
                cfg.grid[0],
                cfg.grid[1],
            )?;
            let pass = rep.verdict == ContinuumVerdict::Pass;
            write_json(&out_dir.join("continuum.json"), &rep)?;
            artifacts.push("continuum.json".into());
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
        Command::Web => {
            let h = handle_from(cfg)?;
            let rep = websets::spiders_web_verify(
                &h,
                cfg.base_radius,
                cfg.mu,
                cfg.n_levels,
                cfg.grid[0],
                cfg.grid[1],
            )?;
            let pass = rep.verdict == WebVerdict::Pass;
            write_json(&out_dir.join("web.json"), &rep)?;
            artifacts.push("web.json".into());
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
        Command::Render | Command::Julia => {
            let h = handle_from(cfg)?;
            let vp = Viewport {
                center: Complex64::new(cfg.viewport.center[0], cfg.viewport.center[1]),
                half_width: cfg.viewport.half_width,
                half_height: cfg.viewport.half_height,
            };
            let grid = websets::render_fast_escaping(
                &h,
                vp,
                cfg.resolution[0],
                cfg.resolution[1],
                cfg.base_radius,
                cfg.depth,
                cfg.p_max,
            )?;
            let (grid, name) = if cfg.command == Command::Julia {
                (websets::julia_boundary_render(&grid), "julia.ppm")
            } else {
                (grid, "render.ppm")
            };
            let mut bytes = Vec::new();
            write_ppm(&grid, &mut bytes).expect("in-memory write");
            write_atomic(&out_dir.join(name), &bytes)?;
            artifacts.push(name.into());
            let palette = palette_json(cfg.p_max);
            write_json(&out_dir.join("palette.json"), &palette)?;
            artifacts.push("palette.json".into());
            Outcome::Pass
        }
        Command::Pits => {
            let h = handle_from(cfg)?;
            let rep =
                websets::pits_effect_witness(&h, cfg.annulus_ratio, cfg.count, cfg.seed)?;
            let pass = rep.verdict == PitsVerdict::Pass;
            write_json(&out_dir.join("pits.json"), &rep)?;
            artifacts.push("pits.json".into());
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
        Command::OracleCheck => {
            let mut worst = Vec::new();
            for oracle in [
                OracleLinearizer::exp_for_power_map(2),
                OracleLinearizer::cosh_for_chebyshev(),
            ] {
                let h = LinearizerHandle::construct(
                    oracle.base_map.clone(),
                    oracle.fixed_point,
                    1e-12,
                )?;
                let mut max_rel = 0.0f64;
                for i in 0..64 {
                    for k in 0..64 {
                        let z = Complex64::new(
                            -2.0 + 4.0 * (i as f64 + 0.5) / 64.0,
                            -2.0 + 4.0 * (k as f64 + 0.5) / 64.0,
                        );
                        if z.norm() > 2.0 {
                            continue;
                        }
                        let got = h.koenigs_eval(z)?;
                        let want = oracle_eval(&oracle, z);
                        max_rel = max_rel.max((got - want).norm() / want.norm());
                    }
                }
                worst.push(serde_json::json!({
                    "oracle": format!("{:?}", oracle.kind),
                    "max_relative_error": max_rel,
                }));
            }
            let pass = worst
                .iter()
                .all(|w| w["max_relative_error"].as_f64().unwrap() <= 1e-9);
            write_json(
                &out_dir.join("oracle_check.json"),
                &serde_json::json!({"results": worst, "tolerance": 1e-9, "pass": pass}),
            )?;
            artifacts.push("oracle_check.json".into());
            thresholds = serde_json::json!({"relative_error": 1e-9});
            if pass {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            }
        }
    };

    // Exceptional values ride along for map-bearing commands that need them
    // in downstream tooling.
    if cfg.command == Command::Fixpoints {
        if let Ok(map) = polynomial_from(cfg) {
            if let Ok(exc) = exceptional_values(&map) {
                write_json(&out_dir.join("exceptional.json"), &exc)?;
                artifacts.push("exceptional.json".into());
            }
        }
    }

    let manifest = Manifest {
        command: cfg.command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        thresholds,
        artifacts,
        outcome,
        timing_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(outcome)
}

/// Omitted-values report through the CLI surface (used by tests and the
/// `linearize` tooling).
pub fn omitted_report_json(
    h: &LinearizerHandle,
    search_radius: f64,
    grid: usize,
    seed: u64,
) -> Result<(serde_json::Value, Outcome), CliError> {
    let rep = omitted_values_check(h, search_radius, grid, seed)?;
    let outcome = if rep.verdict == Consistency::Consistent {
        Outcome::Pass
    } else {
        Outcome::Inconclusive
    };
    let mut v = serde_json::to_value(&rep).expect("report serialization");
    v["claimed_omitted_count"] = serde_json::json!(rep.claimed_omitted.len());
    Ok((v, outcome))
}

/// Human-oriented one-line summary of a tower magnitude, for log output.
pub fn tower_summary(t: &TowerMagnitude) -> String {
    serde_json::to_string(&tower_json(t)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_figure1_order_config() {
        let cfg = parse_config(
            r#"{"command":"order","map":[[-0.8,0.157],[0,0],[1,0]],"fixed_point":"auto-repelling"}"#,
        )
        .unwrap();
        assert_eq!(cfg.command, Command::Order);
        let map = polynomial_from(&cfg).unwrap();
        let fp = select_fixed_point(&map, &cfg.fixed_point).unwrap();
        assert!((fp.point.re - 1.528).abs() < 5e-4);
        assert!((fp.point.im + 0.076).abs() < 5e-4);
    }

    #[test]
    fn parse_square_fixpoints_config() {
        let cfg =
            parse_config(r#"{"command":"fixpoints","map":[[0,0],[0,0],[1,0]]}"#).unwrap();
        assert_eq!(cfg.command, Command::Fixpoints);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn attracting_selection_is_rejected() {
        // Fixed point 0 of z^2 is attracting; sorted by (re, im) it is
        // index 0.
        let cfg = parse_config(
            r#"{"command":"linearize","map":[[0,0],[0,0],[1,0]],"fixed_point":0}"#,
        )
        .unwrap();
        let err = handle_from(&cfg).unwrap_err();
        assert!(
            err.to_string().contains("not repelling"),
            "message: {err}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(r#"{"command":"fixpoints","map":[[0,0],[0,0],[1,0]],"bogus":1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "message: {err}");
    }

    #[test]
    fn missing_map_is_named() {
        let err = parse_config(r#"{"command":"order"}"#).unwrap_err();
        assert!(err.to_string().contains("\"map\""), "message: {err}");
    }

    #[test]
    fn malformed_complex_pair_is_an_error() {
        let err = parse_config(r#"{"command":"fixpoints","map":[[0],[0,0],[1,0]]}"#).unwrap_err();
        assert!(matches!(err, CliError::Json(_)));
    }

    #[test]
    fn config_round_trip_through_echo() {
        let text = r#"{"command":"radii","map":[[-0.8,0.157],[0,0],[1,0]],"R":20.0,"mu":2.0,"N":4}"#;
        let cfg = parse_config(text).unwrap();
        let echoed = serde_json::to_string(&cfg).unwrap();
        let reparsed = parse_config(&echoed).unwrap();
        assert_eq!(reparsed.command, cfg.command);
        assert_eq!(reparsed.base_radius, cfg.base_radius);
        assert_eq!(reparsed.mu, cfg.mu);
        assert_eq!(reparsed.n_levels, cfg.n_levels);
        assert_eq!(reparsed.map, cfg.map);
    }

    #[test]
    fn empty_series_is_rejected() {
        let err = emit_csv(&[], Path::new("/tmp/never-written.csv")).unwrap_err();
        assert!(matches!(err, CliError::EmptySeries));
        assert!(!Path::new("/tmp/never-written.csv").exists());
    }
}
