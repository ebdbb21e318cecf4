//! Run configuration, read from TOML.

use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A real number that may be written as a decimal or as an exact ratio
/// `"p/q"`. The source text is kept so the value re-serializes as written.
#[derive(Debug, Clone, PartialEq)]
pub struct Real {
    value: f64,
    text: Option<String>,
}

impl Real {
    pub fn new(value: f64) -> Self {
        Real { value, text: None }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn parse(src: &str) -> Result<Self> {
        let t = src.trim();
        let bad = || Error::validation("number", format!("cannot parse {src:?} as a number or p/q"));
        let value = match t.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                let q: f64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0.0 {
                    return Err(Error::validation("number", format!("zero denominator in {src:?}")));
                }
                p / q
            }
            None => t.parse().map_err(|_| bad())?,
        };
        Ok(Real {
            value,
            text: Some(t.to_string()),
        })
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real::new(v)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.text {
            Some(t) => f.write_str(t),
            None => write!(f, "{:?}", self.value),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => ser.serialize_str(t),
            None => ser.serialize_f64(self.value),
        }
    }
}

struct RealVisitor;

impl<'de> Visitor<'de> for RealVisitor {
    type Value = Real;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a string \"p/q\"")
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
        Ok(Real::new(v))
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
        Ok(Real::new(v as f64))
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
        Ok(Real::new(v as f64))
    }
    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
        Real::parse(v).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Real, D::Error> {
        de.deserialize_any(RealVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Blowup,
    BlockMap,
    Classify,
    Verify,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Blowup => "blowup",
            Mode::BlockMap => "block-map",
            Mode::Classify => "classify",
            Mode::Verify => "verify",
            Mode::Sweep => "sweep",
        }
    }
}

/// Exactly one of `L` and `beta` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(rename = "K")]
    pub curvature: Real,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Real>,
    pub gamma_c: Real,
}

impl SurfaceConfig {
    pub fn build(&self) -> Result<SurfaceSpec> {
        let k = self.curvature.value();
        let g = self.gamma_c.value();
        match (&self.amplitude, &self.beta) {
            (Some(l), None) => SurfaceSpec::new(k, l.value(), g),
            (None, Some(b)) => SurfaceSpec::from_beta(k, b.value(), g),
            _ => Err(Error::validation("surface", "give exactly one of L and beta")),
        }
    }

    /// Same curvature and coupling with a different β.
    pub fn with_beta(&self, beta: f64) -> Result<SurfaceSpec> {
        SurfaceSpec::from_beta(self.curvature.value(), beta, self.gamma_c.value())
    }
}

fn r(v: f64) -> Real {
    Real::new(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub tol: Real,
    pub t_end: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_margin: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<Real>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            tol: r(1e-10),
            t_end: r(100.0),
            collision_margin: None,
            sample_dt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub r: Real,
    pub theta: Real,
    pub p_r: Real,
    pub p_theta: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupConfig {
    /// Number of manifold arcs, started at evenly spaced θ just above S⁻.
    pub arcs: u32,
    /// Arcs run from χ = −π/2 + chi_offset to χ = π/2 − chi_offset.
    pub chi_offset: Real,
    pub tol: Real,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            arcs: 8,
            chi_offset: r(0.05),
            tol: r(1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockConfig {
    pub h: Real,
    /// Defaults to the largest convex block below `0.5 γ/|h|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Real>,
    /// Grid points on each side of `u = 0`.
    pub n_u: u32,
    pub theta: Real,
    pub tol: Real,
    pub tau_cap: Real,
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig {
            h: r(-0.5),
            delta: None,
            n_u: 10,
            theta: r(0.0),
            tol: r(1e-12),
            tau_cap: r(1e3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    /// Empty means the configured surface only.
    pub betas: Vec<Real>,
    pub m_max: u32,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            betas: Vec::new(),
            m_max: crate::geometry::DEFAULT_M_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub betas: Vec<Real>,
    pub energies: Vec<Real>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let two_over = |m: u32| Real::parse(&format!("2/{m}")).expect("static ratio");
        SweepConfig {
            betas: (1..=7).map(two_over).collect(),
            energies: vec![r(-1.0), r(0.0), r(1.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random states for the pointwise identities.
    pub states: u32,
    /// Random bounded orbits for conservation and orbit shape.
    pub orbits: u32,
    pub t_end: Real,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            states: 100,
            orbits: 5,
            t_end: r(20.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub blowup: BlowupConfig,
    #[serde(default)]
    pub block: BlockConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out: Option<String>,
    pub tol: Option<Real>,
    pub beta: Option<Real>,
    pub energy: Option<Real>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation("config", e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::validation("config", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.mode {
            self.mode = Some(m);
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if let Some(t) = &o.tol {
            self.integrator.tol = t.clone();
        }
        if let Some(b) = &o.beta {
            self.surface.beta = Some(b.clone());
            self.surface.amplitude = None;
        }
        if let Some(h) = &o.energy {
            self.block.h = h.clone();
        }
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode.ok_or_else(|| Error::validation("mode", "not given on the command line or in the config"))
    }

    /// Checks every numeric field the selected mode will use.
    pub fn validate(&self) -> Result<SurfaceSpec> {
        let s = self.surface.build()?;
        let mode = self.mode()?;
        let finite = |name: &str, x: &Real| -> Result<()> {
            if x.value().is_finite() {
                Ok(())
            } else {
                Err(Error::validation(name, format!("{x} is not finite")))
            }
        };
        let positive = |name: &str, x: &Real| -> Result<()> {
            if x.value().is_finite() && x.value() > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(name, format!("{x} must be positive")))
            }
        };
        let tol = self.integrator.tol.value();
        if !(1e-14..=1e-3).contains(&tol) {
            return Err(Error::validation("integrator.tol", format!("{tol} outside [1e-14, 1e-3]")));
        }
        if self.output.dir.is_empty() {
            return Err(Error::validation("output.dir", "must not be empty"));
        }
        match mode {
            Mode::Simulate => {
                positive("integrator.t_end", &self.integrator.t_end)?;
                if let Some(m) = &self.integrator.collision_margin {
                    positive("integrator.collision_margin", m)?;
                }
                if let Some(d) = &self.integrator.sample_dt {
                    positive("integrator.sample_dt", d)?;
                }
                let init = self
                    .initial
                    .as_ref()
                    .ok_or_else(|| Error::validation("initial", "simulate needs an initial state"))?;
                for (name, x) in [
                    ("initial.r", &init.r),
                    ("initial.theta", &init.theta),
                    ("initial.p_r", &init.p_r),
                    ("initial.p_theta", &init.p_theta),
                ] {
                    finite(name, x)?;
                }
                let r0 = init.r.value();
                if r0 <= s.r_north() || r0 >= s.r_south() {
                    return Err(Error::validation(
                        "initial.r",
                        format!("{r0} outside ({}, {})", s.r_north(), s.r_south()),
                    ));
                }
            }
            Mode::Blowup => {
                if self.blowup.arcs == 0 {
                    return Err(Error::validation("blowup.arcs", "must be at least 1"));
                }
                let off = self.blowup.chi_offset.value();
                if !(off > 0.0 && off < 0.5 * std::f64::consts::PI) {
                    return Err(Error::validation("blowup.chi_offset", format!("{off} outside (0, pi/2)")));
                }
                positive("blowup.tol", &self.blowup.tol)?;
            }
            Mode::BlockMap => {
                self.validate_block()?;
                if self.block.n_u == 0 {
                    return Err(Error::validation("block.n_u", "must be at least 1"));
                }
            }
            Mode::Classify => {
                if self.classify.m_max == 0 {
                    return Err(Error::validation("classify.m_max", "must be at least 1"));
                }
                for b in &self.classify.betas {
                    positive("classify.betas", b)?;
                }
            }
            Mode::Verify => {
                self.validate_block()?;
                positive("verify.t_end", &self.verify.t_end)?;
                if self.verify.states == 0 || self.verify.orbits == 0 {
                    return Err(Error::validation("verify", "states and orbits must be at least 1"));
                }
            }
            Mode::Sweep => {
                if self.sweep.betas.is_empty() || self.sweep.energies.is_empty() {
                    return Err(Error::validation("sweep", "grid is empty"));
                }
                for b in &self.sweep.betas {
                    positive("sweep.betas", b)?;
                }
                for h in &self.sweep.energies {
                    finite("sweep.energies", h)?;
                }
                positive("block.tol", &self.block.tol)?;
                positive("block.tau_cap", &self.block.tau_cap)?;
            }
        }
        Ok(s)
    }

    fn validate_block(&self) -> Result<()> {
        let b = &self.block;
        if !b.h.value().is_finite() {
            return Err(Error::validation("block.h", "must be finite"));
        }
        if !b.theta.value().is_finite() {
            return Err(Error::validation("block.theta", "must be finite"));
        }
        if let Some(d) = &b.delta {
            if !(d.value() > 0.0 && d.value().is_finite()) {
                return Err(Error::validation("block.delta", "must be positive"));
            }
        }
        if !(1e-14..=1e-3).contains(&b.tol.value()) {
            return Err(Error::validation("block.tol", "outside [1e-14, 1e-3]"));
        }
        if !(b.tau_cap.value() > 0.0 && b.tau_cap.value().is_finite()) {
            return Err(Error::validation("block.tau_cap", "must be positive"));
        }
        Ok(())
    }
}
