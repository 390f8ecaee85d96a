//! Experiment configuration: a versioned TOML document.

use serde::{Deserialize, Serialize};

use rydphon_core::dynamics::{initial_domain, VibrationalSpec};
use rydphon_core::phonon::PhononScheme;
use rydphon_core::position::{ModelKind, SpinSector};
use rydphon_core::propagate::{Method, PropagatorConfig};
use rydphon_core::{Error, ModelParams};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub seed: u64,
    pub model: ModelSection,
    pub phonons: PhononSection,
    pub initial: InitialSection,
    pub time: TimeSection,
    pub fit: FitSection,
    pub propagator: PropagatorSection,
    pub sweep: SweepSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Full,
    Constrained,
    /// Block `H_q'` in the relative coordinate.
    Momentum,
    /// Second-order effective block on a fixed phonon number.
    Effective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorChoice {
    All,
    SingleDomain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelChoice,
    pub sector: SectorChoice,
    pub n_sites: usize,
    pub rabi: f64,
    pub detuning: f64,
    pub trap_freq: f64,
    pub coupling: f64,
    pub q: usize,
    pub n_phonons: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    Site,
    Total,
    Deviation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhononSection {
    pub scheme: SchemeChoice,
    pub site_cutoff: usize,
    pub total_cutoff: usize,
    /// Deviation scheme: most sites allowed to differ from `reference`.
    pub max_deviating: usize,
    /// Deviation scheme: occupation every site is compared against.
    pub reference: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VibrationalChoice {
    Fock { n: usize },
    Phase { phi: f64 },
    Coherent { re: f64, im: f64 },
    Thermal { temperature: f64, samples: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub r0: usize,
    /// Domain centre in 1-based site units; defaults to the middle of the ring.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Starting quasiparticle index for the effective model (default `N - 1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub vibrational: VibrationalChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub windows: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Auto,
    Dense,
    Krylov,
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorSection {
    pub method: MethodChoice,
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    pub tol: f64,
}

/// Values swept over; each entry produces one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coupling: Vec<f64>,
    /// Phases of the `phase` vibrational state.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA,
            seed: 0,
            model: ModelSection::default(),
            phonons: PhononSection::default(),
            initial: InitialSection::default(),
            time: TimeSection::default(),
            fit: FitSection::default(),
            propagator: PropagatorSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelChoice::Constrained,
            sector: SectorChoice::SingleDomain,
            n_sites: 21,
            rabi: 1.0,
            detuning: 200.0,
            trap_freq: 8.0,
            coupling: 0.0,
            q: 1,
            n_phonons: 0,
        }
    }
}

impl Default for PhononSection {
    fn default() -> Self {
        Self { scheme: SchemeChoice::Site, site_cutoff: 0, total_cutoff: 0, max_deviating: 2, reference: 0 }
    }
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { r0: 3, center: None, k: None, vibrational: VibrationalChoice::Fock { n: 0 } }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_max: 3.0, steps: 60 }
    }
}

impl Default for FitSection {
    fn default() -> Self {
        Self { windows: vec![[0.5, 3.0]] }
    }
}

impl Default for PropagatorSection {
    fn default() -> Self {
        let d = PropagatorConfig::default();
        Self { method: MethodChoice::Auto, dense_threshold: d.dense_threshold, krylov_dim: d.krylov_dim, tol: d.tol }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn field(name: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {reason}"))
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn params(&self) -> ModelParams {
        let m = &self.model;
        ModelParams::new(m.n_sites, m.detuning, m.trap_freq, m.coupling)
            .with_rabi(m.rabi)
            .with_site_cutoff(self.phonons.site_cutoff)
            .with_total_cutoff(self.phonons.total_cutoff)
    }

    pub fn scheme(&self) -> PhononScheme {
        let p = &self.phonons;
        match p.scheme {
            SchemeChoice::Site => PhononScheme::Site { cutoff: p.site_cutoff },
            SchemeChoice::Total => PhononScheme::Total { cutoff: p.total_cutoff },
            SchemeChoice::Deviation => PhononScheme::Deviation {
                cutoff: p.site_cutoff,
                reference: vec![p.reference; self.model.n_sites],
                max_deviating: p.max_deviating,
            },
        }
    }

    pub fn kind_and_sector(&self) -> Option<(ModelKind, SpinSector)> {
        let sector = match self.model.sector {
            SectorChoice::All => SpinSector::All,
            SectorChoice::SingleDomain => SpinSector::SingleDomain,
        };
        match self.model.kind {
            ModelChoice::Full => Some((ModelKind::Full, sector)),
            ModelChoice::Constrained => Some((ModelKind::Constrained, sector)),
            ModelChoice::Momentum | ModelChoice::Effective => None,
        }
    }

    pub fn vibrational(&self) -> VibrationalSpec {
        match self.initial.vibrational {
            VibrationalChoice::Fock { n } => VibrationalSpec::Fock(n),
            VibrationalChoice::Phase { phi } => VibrationalSpec::Phase(phi),
            VibrationalChoice::Coherent { re, im } => VibrationalSpec::Coherent { re, im },
            VibrationalChoice::Thermal { temperature, samples } => {
                VibrationalSpec::Thermal { temperature, samples, seed: self.seed }
            }
        }
    }

    pub fn propagator(&self) -> PropagatorConfig {
        let p = &self.propagator;
        PropagatorConfig {
            method: match p.method {
                MethodChoice::Auto => Method::Auto,
                MethodChoice::Dense => Method::Dense,
                MethodChoice::Krylov => Method::Krylov,
                MethodChoice::Chebyshev => Method::Chebyshev,
            },
            dense_threshold: p.dense_threshold,
            krylov_dim: p.krylov_dim,
            tol: p.tol,
            ..PropagatorConfig::default()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        rydphon_core::dynamics::time_grid(self.time.t_max, self.time.steps)
    }

    pub fn center(&self) -> f64 {
        self.initial.center.unwrap_or_else(|| rydphon_core::dynamics::default_center(self.model.n_sites, self.initial.r0))
    }

    /// Checks every precondition that can be decided without building a model.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(field("schema", format!("unsupported version {} (expected {SCHEMA})", self.schema)));
        }
        let p = self.params().validate().map_err(CliError::from)?;
        let n = p.n_sites;
        let m = &self.model;
        if m.kind == ModelChoice::Constrained && m.sector == SectorChoice::All {
            return Err(field("model.sector", "the constrained model only lives on the single-domain sector"));
        }
        if matches!(m.kind, ModelChoice::Momentum | ModelChoice::Effective) {
            if !(1..=n).contains(&m.q) {
                return Err(field("model.q", format!("{} is outside 1..={n}", m.q)));
            }
            if self.initial.vibrational != (VibrationalChoice::Fock { n: 0 }) {
                return Err(field("initial.vibrational", "momentum blocks start from the phonon vacuum"));
            }
        }
        if m.kind == ModelChoice::Effective {
            let k = self.initial.k.unwrap_or(n - 1);
            if !(1..n).contains(&k) {
                return Err(field("initial.k", format!("{k} is outside 1..{n}")));
            }
        }
        let r0 = self.initial.r0;
        if !(1..n).contains(&r0) {
            return Err(field("initial.r0", format!("{r0} is outside 1..{n}")));
        }
        if self.kind_and_sector().is_some() {
            initial_domain(n, r0, self.center()).map_err(|e| field("initial.center", e))?;
            if self.phonons.scheme == SchemeChoice::Total && self.initial.vibrational != (VibrationalChoice::Fock { n: 0 }) {
                return Err(field("initial.vibrational", "the total scheme only supports the phonon vacuum"));
            }
            if let VibrationalChoice::Fock { n: f } = self.initial.vibrational {
                if self.phonons.scheme != SchemeChoice::Total && f > self.phonons.site_cutoff {
                    return Err(field("initial.vibrational.n", format!("{f} exceeds site_cutoff {}", self.phonons.site_cutoff)));
                }
            }
        }
        if let VibrationalChoice::Thermal { temperature, samples } = self.initial.vibrational {
            if samples == 0 {
                return Err(field("initial.vibrational.samples", "need at least one sample"));
            }
            if temperature.is_nan() || temperature < 0.0 {
                return Err(field("initial.vibrational.temperature", "must be non-negative"));
            }
        }
        if self.phonons.scheme == SchemeChoice::Deviation && self.phonons.reference as usize > self.phonons.site_cutoff {
            return Err(field("phonons.reference", "must not exceed site_cutoff"));
        }
        if !self.time.t_max.is_finite() || self.time.t_max <= 0.0 || self.time.steps == 0 {
            return Err(field("time", "t_max must be positive and steps at least 1"));
        }
        for [lo, hi] in &self.fit.windows {
            if lo >= hi || lo.is_nan() || hi.is_nan() || *lo < 0.0 {
                return Err(field("fit.windows", format!("[{lo}, {hi}] is not an increasing non-negative interval")));
            }
        }
        if self.propagator.krylov_dim < 2 || self.propagator.tol.is_nan() || self.propagator.tol <= 0.0 {
            return Err(field("propagator", "krylov_dim must be at least 2 and tol positive"));
        }
        if !self.sweep.phi.is_empty() && !matches!(self.initial.vibrational, VibrationalChoice::Phase { .. }) {
            return Err(field("sweep.phi", "needs a phase vibrational state"));
        }
        Ok(())
    }

    /// One configuration per sweep point, labelled for its output directory.
    pub fn expand(&self) -> Vec<(String, ExperimentConfig)> {
        let mut runs = vec![(String::new(), self.clone())];
        let axis = |runs: Vec<(String, ExperimentConfig)>, values: &[f64], name: &str, set: &dyn Fn(&mut ExperimentConfig, f64)| {
            if values.is_empty() {
                return runs;
            }
            runs.into_iter()
                .flat_map(|(label, cfg)| {
                    values.iter().map(move |&v| {
                        let mut c = cfg.clone();
                        set(&mut c, v);
                        let sep = if label.is_empty() { "" } else { "_" };
                        (format!("{label}{sep}{name}={v}"), c)
                    })
                })
                .collect()
        };
        runs = axis(runs, &self.sweep.coupling, "kappa", &|c, v| c.model.coupling = v);
        runs = axis(runs, &self.sweep.phi, "phi", &|c, v| c.initial.vibrational = VibrationalChoice::Phase { phi: v });
        let qs: Vec<f64> = self.sweep.q.iter().map(|&q| q as f64).collect();
        runs = axis(runs, &qs, "q", &|c, v| c.model.q = v as usize);
        for (_, c) in &mut runs {
            c.sweep = SweepSection::default();
        }
        runs
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => CliError::Capacity(format!("{e}; reduce the phonon cutoff or the number of sites")),
            Error::Resonance { .. } => CliError::Resonance(format!("{e}; move the trap frequency away from the resonance")),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.to_toml(), ExperimentConfig::default().to_toml());
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = parse_config("[model]\nn_sites = 5\ncoupling_strength = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("coupling_strength") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn type_mismatch_reports_field() {
        let msg = parse_config("[model]\nn_sites = \"many\"\n").unwrap_err().to_string();
        assert!(msg.contains("n_sites"), "{msg}");
    }

    #[test]
    fn invariant_violations() {
        for (text, needle) in [
            ("[model]\nn_sites = 8\n", "odd"),
            ("schema = 2\n", "schema"),
            ("[initial]\nr0 = 2\ncenter = 11.0\n", "initial.center"),
            ("[initial.vibrational]\nkind = \"fock\"\nn = 1\n", "site_cutoff"),
            ("[model]\nkind = \"constrained\"\nsector = \"all\"\n", "model.sector"),
            ("[fit]\nwindows = [[3.0, 1.0]]\n", "fit.windows"),
        ] {
            let msg = parse_config(text).unwrap_err().to_string();
            assert!(msg.contains(needle), "{text:?}: {msg}");
        }
    }

    #[test]
    fn sweeps_expand_as_a_product() {
        let text = "[initial.vibrational]\nkind = \"phase\"\nphi = 0.0\n[phonons]\nsite_cutoff = 1\n\
                    [sweep]\ncoupling = [0.0, 3.0]\nphi = [0.0, 1.0, 2.0]\n";
        let runs = parse_config(text).unwrap().expand();
        assert_eq!(runs.len(), 6);
        assert_eq!(runs[1].0, "kappa=0_phi=1");
        assert_eq!(runs[5].1.model.coupling, 3.0);
        assert!(runs.iter().all(|(_, c)| c.sweep == SweepSection::default()));
    }
}
