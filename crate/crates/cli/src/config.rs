//! Run configuration: strict INI-style TOML with typed sections.
//!
//! Unknown keys are rejected, numbers are locale-independent TOML floats,
//! and every artifact written by a run embeds the hash of the raw config
//! text together with the effective seed.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use ultracarl_core::domain::{DomainModel, Polynomial, SpatialShape};
use ultracarl_core::geometry::{Signature, SpaceTimePoint};
use ultracarl_core::quadrature::Resolution;
use ultracarl_core::weight::CarlemanParams;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub domain: Option<DomainSection>,
    pub carleman: Option<CarlemanSection>,
    pub field: Option<FieldSection>,
    pub grid: Option<GridSection>,
    pub run: Option<RunSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: String,
    pub m: usize,
    pub n: usize,
    pub t_half: f64,
    pub radius: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    /// Polynomial coefficients of the radius in `t1`, constant term first.
    pub radius_profile: Option<Vec<f64>>,
    /// Per-axis polynomial coefficients of the centre in `t1`.
    pub center_profile: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanSection {
    pub p_t: Vec<f64>,
    pub p_x: Vec<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    /// Override of the spatial reach bound `R`; defaults to the computed `R+`.
    pub r_bound: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// bump | planewave_bump | trig_sum | suite
    pub family: Option<String>,
    pub degree: Option<usize>,
    pub terms: Option<usize>,
    pub amplitude: Option<f64>,
    /// Constant potential amplitude for absorption/uniqueness runs.
    pub v_amplitude: Option<f64>,
    /// First-order coefficient amplitude (applied along the first time axis).
    pub x_amplitude: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub res_t: Option<usize>,
    pub res_x: Option<usize>,
    pub res_boundary: Option<usize>,
    pub cap: Option<usize>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub command: Option<String>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub holdout_seed: Option<u64>,
    pub suite_size: Option<usize>,
    pub calibration_safety: Option<f64>,
    pub c_override: Option<f64>,
    pub c_prime: Option<f64>,
    /// +1 or -1; sign of the temporal-angular left-side term.
    pub q_tmp_sign: Option<i64>,
    /// grad_t | grad_x | both (interior verification).
    pub variant: Option<String>,
    pub deltas: Option<Vec<f64>>,
    /// Factor realising each strict-separation choice of the parameter regime.
    pub a_factor: Option<f64>,
    /// gamma | trace: which region the figure highlights in red.
    pub highlight: Option<String>,
    pub slice_times: Option<Vec<f64>>,
    pub slice_count: Option<usize>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw_text: String,
    pub config_hash: String,
    pub dom: Option<DomainModel>,
    pub carleman: Option<CarlemanSection>,
    pub field: FieldSection,
    pub res: Resolution,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub holdout_seed: u64,
    pub suite_size: usize,
    pub calibration_safety: f64,
    pub c_override: Option<f64>,
    pub c_prime: f64,
    pub q_tmp_sign: f64,
    pub variant: String,
    pub deltas: Vec<f64>,
    pub a_factor: f64,
    pub highlight: String,
    pub slice_times: Vec<f64>,
    pub slice_count: usize,
    pub declared_command: Option<String>,
}

impl RunConfig {
    /// Parse and resolve a config file; `seed`/`out` may be overridden from
    /// the command line.
    pub fn load(
        text: &str,
        out_override: Option<PathBuf>,
        seed_override: Option<u64>,
    ) -> anyhow::Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| anyhow!("config parse error: {e}"))?;
        let run = raw.run.clone().unwrap_or(RunSection {
            command: None,
            out: None,
            seed: None,
            holdout_seed: None,
            suite_size: None,
            calibration_safety: None,
            c_override: None,
            c_prime: None,
            q_tmp_sign: None,
            variant: None,
            deltas: None,
            a_factor: None,
            highlight: None,
            slice_times: None,
            slice_count: None,
        });

        let dom = raw
            .domain
            .as_ref()
            .map(build_domain)
            .transpose()
            .context("[domain]")?;

        let grid = raw.grid.clone().unwrap_or(GridSection {
            res_t: None,
            res_x: None,
            res_boundary: None,
            cap: None,
            threads: None,
        });
        let mut res = Resolution::new(
            grid.res_t.unwrap_or(32),
            grid.res_x.unwrap_or(32),
            grid.res_boundary.unwrap_or(128),
        );
        if let Some(cap) = grid.cap {
            res.cap = cap;
        }

        let seed = seed_override.or(run.seed).unwrap_or(42);
        let holdout_seed = match run.holdout_seed {
            Some(0) | None => seed + 1,
            Some(s) => s,
        };
        let q_tmp_sign = match run.q_tmp_sign.unwrap_or(1) {
            1 => 1.0,
            -1 => -1.0,
            other => bail!("[run] q_tmp_sign must be 1 or -1, got {other}"),
        };
        let variant = run.variant.clone().unwrap_or_else(|| "both".into());
        if !["grad_t", "grad_x", "both"].contains(&variant.as_str()) {
            bail!("[run] variant must be grad_t, grad_x, or both, got {variant}");
        }
        let highlight = run.highlight.clone().unwrap_or_else(|| "gamma".into());
        if !["gamma", "trace"].contains(&highlight.as_str()) {
            bail!("[run] highlight must be gamma or trace, got {highlight}");
        }

        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let config_hash = hex16(&hasher.finalize());

        Ok(Self {
            raw_text: text.to_string(),
            config_hash,
            dom,
            carleman: raw.carleman,
            field: raw.field.unwrap_or(FieldSection {
                family: None,
                degree: None,
                terms: None,
                amplitude: None,
                v_amplitude: None,
                x_amplitude: None,
            }),
            res,
            threads: grid.threads.unwrap_or(0),
            out_dir: out_override
                .or_else(|| run.out.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            seed,
            holdout_seed,
            suite_size: run.suite_size.unwrap_or(20),
            calibration_safety: run.calibration_safety.unwrap_or(0.5),
            c_override: run.c_override,
            c_prime: run.c_prime.unwrap_or(1.0),
            q_tmp_sign,
            variant,
            deltas: run.deltas.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]),
            a_factor: run.a_factor.unwrap_or(10.0),
            highlight,
            slice_times: run.slice_times.unwrap_or_default(),
            slice_count: run.slice_count.unwrap_or(5),
            declared_command: run.command,
        })
    }

    pub fn require_domain(&self) -> anyhow::Result<&DomainModel> {
        self.dom
            .as_ref()
            .ok_or_else(|| anyhow!("missing [domain] section for this command"))
    }

    /// Resolve Carleman parameters against the domain; `interior` demands
    /// the stronger regime when `a` defaults.
    pub fn resolve_params(
        &self,
        dom: &DomainModel,
        interior: bool,
    ) -> anyhow::Result<CarlemanParams> {
        let section = self
            .carleman
            .as_ref()
            .ok_or_else(|| anyhow!("missing [carleman] section for this command"))?;
        let sig = dom.sig();
        if section.p_t.len() != sig.m() {
            bail!("[carleman] p_t must have length m = {}", sig.m());
        }
        if section.p_x.len() != sig.n() {
            bail!("[carleman] p_x must have length n = {}", sig.n());
        }
        let p = SpaceTimePoint::new(section.p_t.clone(), section.p_x.clone());
        let r_plus = dom.r_plus(&p)?;
        let r_bound = section.r_bound.unwrap_or(r_plus);

        let dim2 = (sig.dim() * sig.dim()) as f64;
        let a_default = if interior {
            dim2.max(10.0 * r_bound)
        } else {
            dim2
        };
        let a = section.a.unwrap_or(a_default);

        let mut params = match (section.delta, section.b, section.eps) {
            (Some(delta), None, None) => CarlemanParams::from_delta(p, a, delta, r_bound),
            (None, Some(b), Some(eps)) => CarlemanParams::new(p, a, b, eps, r_bound),
            (None, None, None) => {
                // Default to the delta parametrisation at delta = 0.1.
                CarlemanParams::from_delta(p, a, 0.1, r_bound)
            }
            _ => bail!("[carleman] give either delta or the explicit pair (b, eps)"),
        };
        if let Some(mu) = section.mu {
            params.mu = mu;
        }
        if let Some(sigma) = section.sigma {
            params.sigma = sigma;
        }
        if let Some(k1) = section.kappa1 {
            params.kappa1 = k1;
        }
        if let Some(k2) = section.kappa2 {
            params.kappa2 = k2;
        }
        Ok(params)
    }
}

fn build_domain(section: &DomainSection) -> anyhow::Result<DomainModel> {
    let sig =
        Signature::new(section.m, section.n).map_err(|e| anyhow!("invalid dimensions: {e}"))?;
    match section.kind.as_str() {
        "ball" => {
            let radius = section
                .radius
                .ok_or_else(|| anyhow!("ball domain needs `radius`"))?;
            let center = section
                .center
                .clone()
                .unwrap_or_else(|| vec![0.0; section.n]);
            Ok(DomainModel::new_static(
                sig,
                section.t_half,
                SpatialShape::Ball { center, radius },
            )?)
        }
        "box" => {
            let lo = section
                .lo
                .clone()
                .ok_or_else(|| anyhow!("box domain needs `lo`"))?;
            let hi = section
                .hi
                .clone()
                .ok_or_else(|| anyhow!("box domain needs `hi`"))?;
            Ok(DomainModel::new_static(
                sig,
                section.t_half,
                SpatialShape::Box { lo, hi },
            )?)
        }
        "moving_ball" => {
            let radius = Polynomial::new(
                section
                    .radius_profile
                    .clone()
                    .ok_or_else(|| anyhow!("moving_ball domain needs `radius_profile`"))?,
            );
            let center: Vec<Polynomial> = match &section.center_profile {
                Some(profiles) => {
                    if profiles.len() != section.n {
                        bail!("`center_profile` must have n = {} axis entries", section.n);
                    }
                    profiles
                        .iter()
                        .map(|c| Polynomial::new(c.clone()))
                        .collect()
                }
                None => (0..section.n).map(|_| Polynomial::constant(0.0)).collect(),
            };
            Ok(DomainModel::new_moving(
                sig,
                section.t_half,
                center,
                radius,
            )?)
        }
        other => bail!("unknown domain kind `{other}` (ball | box | moving_ball)"),
    }
}

fn hex16(digest: &[u8]) -> String {
    digest
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect::<String>()
}
