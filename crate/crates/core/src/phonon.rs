//! Truncated bosonic Fock spaces for the trap phonons.
//!
//! Site-resolved schemes carry one mode per lattice site; the total scheme
//! carries one mode per lattice momentum `p = 1..=N` with
//! `a_j = N^{-1/2} Σ_p e^{i2πjp/N} A_p`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Largest number of phonon configurations any scheme will enumerate.
pub const MAX_CONFIGS: usize = 1 << 24;

pub const NO_RAISE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub enum PhononScheme {
    /// Every site holds at most `cutoff` phonons.
    Site { cutoff: usize },
    /// Momentum modes with at most `cutoff` phonons in total.
    Total { cutoff: usize },
    /// Site modes with at most `max_deviating` sites whose occupation differs
    /// from `reference`, each occupation capped at `cutoff`.
    Deviation { cutoff: usize, reference: Vec<u8>, max_deviating: usize },
}

impl PhononScheme {
    pub fn is_momentum(&self) -> bool {
        matches!(self, PhononScheme::Total { .. })
    }

    pub fn label(&self) -> String {
        match self {
            PhononScheme::Site { cutoff } => format!("site(cutoff={cutoff})"),
            PhononScheme::Total { cutoff } => format!("total(cutoff={cutoff})"),
            PhononScheme::Deviation { cutoff, max_deviating, .. } => {
                format!("deviation(cutoff={cutoff}, max_deviating={max_deviating})")
            }
        }
    }

    /// Number of configurations over `n` modes, saturating on overflow.
    pub fn count(&self, n: usize) -> u128 {
        match self {
            PhononScheme::Site { cutoff } => (*cutoff as u128 + 1).saturating_pow(n as u32),
            // stars and bars: Σ_{m ≤ M} C(m+n-1, n-1) = C(M+n, n)
            PhononScheme::Total { cutoff } => binomial(*cutoff as u128 + n as u128, n as u128),
            PhononScheme::Deviation { cutoff, max_deviating, .. } => (0..=*max_deviating.min(&n))
                .map(|d| binomial(n as u128, d as u128).saturating_mul((*cutoff as u128).saturating_pow(d as u32)))
                .fold(0u128, u128::saturating_add),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Enumerated phonon configurations with ladder-operator tables.
#[derive(Clone, Debug)]
pub struct PhononSpace {
    scheme: PhononScheme,
    n_modes: usize,
    occ: Vec<u8>,
    raise: Vec<u32>,
    n_tot: Vec<u32>,
    lookup: HashMap<Box<[u8]>, u32>,
}

impl PhononSpace {
    pub fn new(scheme: PhononScheme, n_modes: usize) -> Result<Self> {
        let needed = scheme.count(n_modes);
        if needed > MAX_CONFIGS as u128 {
            return Err(Error::Capacity { what: "phonon configurations", needed, limit: MAX_CONFIGS as u128 });
        }
        let configs = match &scheme {
            PhononScheme::Site { cutoff } => enumerate(n_modes, |_| true, *cutoff),
            PhononScheme::Total { cutoff } => {
                enumerate(n_modes, |occ| occ.iter().map(|&x| x as usize).sum::<usize>() <= *cutoff, *cutoff)
            }
            PhononScheme::Deviation { cutoff, reference, max_deviating } => {
                if reference.len() != n_modes || reference.iter().any(|&r| r as usize > *cutoff) {
                    return Err(Error::InvalidParameter {
                        name: "reference",
                        reason: format!("need {n_modes} occupations each at most {cutoff}"),
                    });
                }
                enumerate_deviations(reference, *cutoff, *max_deviating)
            }
        };
        debug_assert_eq!(configs.len() as u128, needed);
        let p = configs.len();
        let mut occ = Vec::with_capacity(p * n_modes);
        let mut lookup = HashMap::with_capacity(p);
        for (i, c) in configs.into_iter().enumerate() {
            occ.extend_from_slice(&c);
            lookup.insert(c.into_boxed_slice(), i as u32);
        }
        let n_tot = occ.chunks(n_modes.max(1)).map(|c| c.iter().map(|&x| x as u32).sum()).collect::<Vec<_>>();
        let mut raise = vec![NO_RAISE; n_modes * p];
        let mut buf = vec![0u8; n_modes];
        for c in 0..p {
            buf.copy_from_slice(&occ[c * n_modes..(c + 1) * n_modes]);
            for m in 0..n_modes {
                buf[m] += 1;
                if let Some(&j) = lookup.get(&buf[..]) {
                    raise[m * p + c] = j;
                }
                buf[m] -= 1;
            }
        }
        Ok(Self { scheme, n_modes, occ, raise, n_tot: if n_modes == 0 { vec![0; p] } else { n_tot }, lookup })
    }

    pub fn scheme(&self) -> &PhononScheme {
        &self.scheme
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.n_tot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_tot.is_empty()
    }

    pub fn config(&self, c: usize) -> &[u8] {
        &self.occ[c * self.n_modes..(c + 1) * self.n_modes]
    }

    pub fn occupation(&self, c: usize, mode: usize) -> u8 {
        self.occ[c * self.n_modes + mode]
    }

    pub fn total(&self, c: usize) -> u32 {
        self.n_tot[c]
    }

    pub fn index_of(&self, config: &[u8]) -> Option<usize> {
        self.lookup.get(config).map(|&i| i as usize)
    }

    /// Index of the configuration with one more phonon in `mode`, if kept.
    pub fn raised(&self, c: usize, mode: usize) -> Option<usize> {
        match self.raise[mode * self.len() + c] {
            NO_RAISE => None,
            j => Some(j as usize),
        }
    }

    pub(crate) fn raise_table(&self, mode: usize) -> &[u32] {
        &self.raise[mode * self.len()..(mode + 1) * self.len()]
    }

    /// Total lattice momentum `Σ_p p N_p` (momentum modes are 1-based).
    pub fn momentum(&self, c: usize) -> usize {
        self.config(c).iter().enumerate().map(|(i, &n)| (i + 1) * n as usize).sum()
    }
}

fn enumerate(n: usize, keep: impl Fn(&[u8]) -> bool, max_occ: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(i: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>, keep: &dyn Fn(&[u8]) -> bool, max_occ: usize) {
        if !keep(cur) {
            return;
        }
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max_occ {
            cur[i] = v as u8;
            rec(i + 1, cur, out, keep, max_occ);
        }
        cur[i] = 0;
    }
    rec(0, &mut cur, &mut out, &keep, max_occ);
    out
}

fn enumerate_deviations(reference: &[u8], cutoff: usize, max_deviating: usize) -> Vec<Vec<u8>> {
    let n = reference.len();
    let mut out = Vec::new();
    let mut cur = reference.to_vec();
    fn rec(
        i: usize,
        left: usize,
        cur: &mut Vec<u8>,
        reference: &[u8],
        cutoff: usize,
        out: &mut Vec<Vec<u8>>,
    ) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=cutoff as u8 {
            let deviates = v != reference[i];
            if deviates && left == 0 {
                continue;
            }
            cur[i] = v;
            rec(i + 1, left - deviates as usize, cur, reference, cutoff, out);
        }
        cur[i] = reference[i];
    }
    if n > 0 {
        rec(0, max_deviating.min(n), &mut cur, reference, cutoff, &mut out);
    } else {
        out.push(Vec::new());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_enumeration() {
        for (scheme, n) in [
            (PhononScheme::Site { cutoff: 2 }, 4),
            (PhononScheme::Site { cutoff: 0 }, 5),
            (PhononScheme::Total { cutoff: 1 }, 5),
            (PhononScheme::Total { cutoff: 3 }, 4),
            (PhononScheme::Deviation { cutoff: 2, reference: vec![1; 6], max_deviating: 2 }, 6),
        ] {
            let space = PhononSpace::new(scheme.clone(), n).unwrap();
            assert_eq!(space.len() as u128, scheme.count(n), "{scheme:?}");
        }
        assert_eq!(PhononScheme::Total { cutoff: 1 }.count(5), 6);
        assert_eq!(
            PhononScheme::Deviation { cutoff: 2, reference: vec![1; 21], max_deviating: 2 }.count(21),
            1 + 21 * 2 + 210 * 4
        );
    }

    #[test]
    fn raise_is_consistent() {
        let space = PhononSpace::new(PhononScheme::Total { cutoff: 2 }, 3).unwrap();
        for c in 0..space.len() {
            for m in 0..3 {
                match space.raised(c, m) {
                    Some(j) => {
                        assert_eq!(space.occupation(j, m), space.occupation(c, m) + 1);
                        assert_eq!(space.total(j), space.total(c) + 1);
                    }
                    None => assert_eq!(space.total(c), 2),
                }
            }
        }
    }

    #[test]
    fn deviation_space_is_closed_under_lookup() {
        let reference = vec![1u8; 5];
        let space =
            PhononSpace::new(PhononScheme::Deviation { cutoff: 2, reference: reference.clone(), max_deviating: 1 }, 5)
                .unwrap();
        assert_eq!(space.len(), 11);
        assert!(space.index_of(&reference).is_some());
        assert!(space.index_of(&[0, 0, 1, 1, 1]).is_none());
        assert!(space.index_of(&[1, 2, 1, 1, 1]).is_some());
    }

    #[test]
    fn oversized_space_rejected() {
        let err = PhononSpace::new(PhononScheme::Site { cutoff: 2 }, 21).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn momentum_of_config() {
        let space = PhononSpace::new(PhononScheme::Total { cutoff: 2 }, 5).unwrap();
        let c = space.index_of(&[0, 1, 0, 0, 1]).unwrap();
        assert_eq!(space.momentum(c), 7);
    }
}
