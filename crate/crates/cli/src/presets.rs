//! Desk-scale versions of the published figure setups.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::config::{
    ExperimentConfig, FitSection, InitialSection, ModelChoice, ModelSection, PhononSection, SchemeChoice, SectorChoice,
    SweepSection, TimeSection, VibrationalChoice,
};

/// A preset with the published values it stands in for.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub config: ExperimentConfig,
    pub paper_values: BTreeMap<&'static str, String>,
    pub overrides: BTreeMap<&'static str, String>,
}

pub const PRESETS: [&str; 2] = ["fig2-small", "fig3-small"];

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "fig2-small" => Some(fig2_small()),
        "fig3-small" => Some(fig3_small()),
        _ => None,
    }
}

fn fig2_small() -> Preset {
    let config = ExperimentConfig {
        model: ModelSection {
            kind: ModelChoice::Constrained,
            sector: SectorChoice::SingleDomain,
            n_sites: 21,
            detuning: 500.0,
            trap_freq: 8.0,
            coupling: 0.0,
            ..ModelSection::default()
        },
        phonons: PhononSection {
            scheme: SchemeChoice::Deviation,
            site_cutoff: 1,
            max_deviating: 3,
            reference: 0,
            ..PhononSection::default()
        },
        initial: InitialSection { r0: 3, vibrational: VibrationalChoice::Fock { n: 0 }, ..InitialSection::default() },
        time: TimeSection { t_max: 5.0, steps: 100 },
        fit: FitSection { windows: vec![[0.5, 3.0], [3.0, 5.0]] },
        sweep: SweepSection { coupling: vec![0.0, 3.0], ..SweepSection::default() },
        ..ExperimentConfig::default()
    };
    Preset {
        name: "fig2-small",
        config,
        paper_values: BTreeMap::from([
            ("trap_freq", "8".into()),
            ("detuning", "500".into()),
            ("coupling", "0, 3".into()),
            ("r0", "9".into()),
            ("n_sites", "not stated".into()),
        ]),
        overrides: BTreeMap::from([
            ("n_sites", "21".into()),
            ("r0", "3".into()),
            ("phonons", "site cutoff 1 with at most 3 excited sites".into()),
            ("t_max", "5".into()),
        ]),
    }
}

fn fig3_small() -> Preset {
    let config = ExperimentConfig {
        model: ModelSection {
            kind: ModelChoice::Full,
            sector: SectorChoice::SingleDomain,
            n_sites: 7,
            detuning: 200.0,
            trap_freq: 8.0,
            coupling: 4.0,
            ..ModelSection::default()
        },
        phonons: PhononSection { scheme: SchemeChoice::Site, site_cutoff: 3, ..PhononSection::default() },
        initial: InitialSection { r0: 2, vibrational: VibrationalChoice::Phase { phi: 0.0 }, ..InitialSection::default() },
        time: TimeSection { t_max: 2.0, steps: 8 },
        fit: FitSection { windows: vec![] },
        sweep: SweepSection { phi: vec![0.0, FRAC_PI_2, PI], ..SweepSection::default() },
        ..ExperimentConfig::default()
    };
    Preset {
        name: "fig3-small",
        config,
        paper_values: BTreeMap::from([
            ("trap_freq", "8".into()),
            ("detuning", "200".into()),
            ("coupling", "4".into()),
            ("r0", "2".into()),
            ("site_cutoff", "3".into()),
            ("phi", "0, pi/2, pi".into()),
            ("n_sites", "not stated".into()),
        ]),
        overrides: BTreeMap::from([
            ("n_sites", "7".into()),
            ("model", "full chain restricted to single-domain spin states".into()),
            ("t_max", "2".into()),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let p = preset(name).unwrap();
            p.config.validate().unwrap();
            assert_eq!(crate::config::parse_config(&p.config.to_toml()).unwrap(), p.config);
        }
        assert!(preset("fig4").is_none());
    }

    #[test]
    fn fig2_values() {
        let c = preset("fig2-small").unwrap().config;
        assert_eq!((c.model.n_sites, c.model.trap_freq, c.model.detuning, c.initial.r0), (21, 8.0, 500.0, 3));
        assert_eq!(c.sweep.coupling, vec![0.0, 3.0]);
        assert_eq!(c.phonons.site_cutoff, 1);
    }

    #[test]
    fn fig3_values() {
        let c = preset("fig3-small").unwrap().config;
        assert_eq!((c.model.trap_freq, c.model.detuning, c.model.coupling, c.initial.r0), (8.0, 200.0, 4.0, 2));
        assert_eq!(c.phonons.site_cutoff, 3);
        assert_eq!(c.expand().len(), 3);
    }
}
