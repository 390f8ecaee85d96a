//! The single-domain sector in centre-of-mass / relative / parity coordinates.
//!
//! A domain of `m` consecutive excitations (`1 ≤ m ≤ N-1`) on a ring of odd
//! length `N` is labelled by `(c, r, ξ)`:
//!
//! * odd `m = 2r-1`: the centre of mass sits on site `c`, the domain covers
//!   sites `c-r+1 ..= c+r-1`;
//! * even `m = 2r`: the centre of mass sits at `c - 1/2`, the domain covers
//!   sites `c-r ..= c+r-1`.
//!
//! Sites and `c` are 1-based and wrap modulo `N`.

use std::fmt;

use super::spins::SpinString;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(count: usize) -> Self {
        if count % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Odd => "o",
            Parity::Even => "e",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DomainState {
    pub cm: usize,
    pub rel: usize,
    pub parity: Parity,
}

impl DomainState {
    pub fn new(cm: usize, rel: usize, parity: Parity, n: usize) -> Result<Self> {
        check_chain(n)?;
        if !(1..=n).contains(&cm) {
            return Err(Error::OutOfRange { what: "c", value: cm as i64, lo: 1, hi: n as i64 });
        }
        let r_max = (n - 1) / 2;
        if !(1..=r_max).contains(&rel) {
            return Err(Error::OutOfRange { what: "r", value: rel as i64, lo: 1, hi: r_max as i64 });
        }
        Ok(Self { cm, rel, parity })
    }

    /// Builds the state from its leftmost excited site (1-based, wrapped) and
    /// its number of excitations.
    pub fn from_extent(left: usize, count: usize, n: usize) -> Self {
        debug_assert!((1..n).contains(&count));
        let (rel, cm) = match Parity::of(count) {
            Parity::Odd => {
                let r = count.div_ceil(2);
                (r, left + r - 1)
            }
            Parity::Even => {
                let r = count / 2;
                (r, left + r)
            }
        };
        Self { cm: wrap(cm as i64, n), rel, parity: Parity::of(count) }
    }

    pub fn exc_count(&self) -> usize {
        match self.parity {
            Parity::Odd => 2 * self.rel - 1,
            Parity::Even => 2 * self.rel,
        }
    }

    /// Centre of mass in 1-based site units (half-integer for even domains).
    pub fn cm_position(&self) -> f64 {
        match self.parity {
            Parity::Odd => self.cm as f64,
            Parity::Even => self.cm as f64 - 0.5,
        }
    }

    pub fn leftmost_site(&self, n: usize) -> usize {
        let offset = match self.parity {
            Parity::Odd => self.rel as i64 - 1,
            Parity::Even => self.rel as i64,
        };
        wrap(self.cm as i64 - offset, n)
    }

    pub fn rightmost_site(&self, n: usize) -> usize {
        wrap(self.cm as i64 + self.rel as i64 - 1, n)
    }
}

impl fmt::Display for DomainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}⟩", self.cm, self.rel, self.parity.label())
    }
}

/// Wraps an integer site label into `1..=n`.
pub(crate) fn wrap(site: i64, n: usize) -> usize {
    (site - 1).rem_euclid(n as i64) as usize + 1
}

pub(crate) fn check_chain(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) || n > 63 {
        return Err(Error::InvalidParameter {
            name: "n_sites",
            reason: format!("N must be odd with 3 <= N <= 63, got {n}"),
        });
    }
    Ok(())
}

/// All `N(N-1)` admissible single-domain states, ordered lexicographically by
/// `(ξ, r, c)` with odd before even.
pub fn enumerate_domain_states(n: usize) -> Result<Vec<DomainState>> {
    check_chain(n)?;
    let r_max = (n - 1) / 2;
    let mut out = Vec::with_capacity(n * (n - 1));
    for parity in [Parity::Odd, Parity::Even] {
        for rel in 1..=r_max {
            for cm in 1..=n {
                out.push(DomainState { cm, rel, parity });
            }
        }
    }
    Ok(out)
}

pub fn domain_to_spins(s: &DomainState, n: usize) -> SpinString {
    let left = s.leftmost_site(n);
    let mut bits = 0u64;
    for i in 0..s.exc_count() {
        let site = wrap((left + i) as i64, n);
        bits |= 1 << (site - 1);
    }
    SpinString::from_bits(bits, n)
}

pub fn spins_to_domain(spins: &SpinString) -> Result<DomainState> {
    let n = spins.len();
    check_chain(n)?;
    let count = spins.excitations();
    let fail = |reason| Error::NotInSector { spins: spins.to_string(), reason };
    if count == 0 {
        return Err(fail("no excitations"));
    }
    if count == n {
        return Err(fail("all sites excited, no domain walls"));
    }
    if spins.domain_walls() != 2 {
        return Err(fail("more than one domain"));
    }
    let left = (1..=n)
        .find(|&j| spins.is_up(j) && !spins.is_up(j + n - 1))
        .expect("two domain walls imply a left edge");
    Ok(DomainState::from_extent(left, count, n))
}

/// States reachable by one resonant spin flip under the facilitation
/// constraint: growing or shrinking the domain by one site at either end.
///
/// The order matches the four resonant partners listed for `(c, r, ξ)`:
/// for odd states `(c,r,e), (c+1,r,e), (c+1,r-1,e), (c,r-1,e)`; for even
/// states `(c-1,r+1,o), (c,r+1,o), (c,r,o), (c-1,r,o)`. Moves that would
/// empty the domain or fill the ring are omitted.
pub fn facilitated_neighbors(s: &DomainState, n: usize) -> Vec<DomainState> {
    let left = s.leftmost_site(n);
    let m = s.exc_count();
    let mut out = Vec::with_capacity(4);
    if m < n - 1 {
        out.push(DomainState::from_extent(wrap(left as i64 - 1, n), m + 1, n));
        out.push(DomainState::from_extent(left, m + 1, n));
    }
    if m > 1 {
        out.push(DomainState::from_extent(wrap(left as i64 + 1, n), m - 1, n));
        out.push(DomainState::from_extent(left, m - 1, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Count ring configurations with exactly one block of excitations.
    fn brute_force_sector_size(n: usize) -> usize {
        (0u64..1 << n)
            .map(|b| SpinString::from_bits(b, n))
            .filter(|s| s.excitations() > 0 && s.excitations() < n && s.domain_walls() == 2)
            .count()
    }

    #[test]
    fn sector_sizes_match_brute_force() {
        assert_eq!(brute_force_sector_size(5), 20);
        assert_eq!(brute_force_sector_size(3), 6);
        for n in [3, 5, 7, 9, 11] {
            assert_eq!(enumerate_domain_states(n).unwrap().len(), brute_force_sector_size(n));
        }
    }

    #[test]
    fn even_or_short_chain_rejected() {
        assert!(enumerate_domain_states(2).is_err());
        assert!(enumerate_domain_states(4).is_err());
    }

    #[test]
    fn spin_strings_of_listed_states() {
        let s = DomainState::new(2, 2, Parity::Odd, 5).unwrap();
        assert_eq!(domain_to_spins(&s, 5).to_string(), "↑↑↑↓↓");
        let s = DomainState::new(3, 1, Parity::Even, 5).unwrap();
        assert_eq!(domain_to_spins(&s, 5).to_string(), "↓↑↑↓↓");
        let s = DomainState::new(1, 1, Parity::Odd, 5).unwrap();
        assert_eq!(domain_to_spins(&s, 5).to_string(), "↑↓↓↓↓");
    }

    #[test]
    fn spins_back_to_domain() {
        let s = spins_to_domain(&SpinString::parse("↑↑↑↓↓").unwrap()).unwrap();
        assert_eq!(s, DomainState { cm: 2, rel: 2, parity: Parity::Odd });
        // wrap-around domain covering sites 5 and 1
        let s = spins_to_domain(&SpinString::parse("↑↓↓↓↑").unwrap()).unwrap();
        assert_eq!(s.exc_count(), 2);
        assert_eq!(s.leftmost_site(5), 5);
    }

    #[test]
    fn out_of_sector_strings() {
        for bad in ["↓↓↓↓↓", "↑↓↑↓↓", "↑↑↑↑↑"] {
            let err = spins_to_domain(&SpinString::parse(bad).unwrap()).unwrap_err();
            assert!(matches!(err, Error::NotInSector { .. }), "{bad}: {err}");
        }
    }

    #[test]
    fn listed_neighbors_of_odd_state() {
        let s = DomainState::new(2, 2, Parity::Odd, 7).unwrap();
        let e = |c, r| DomainState { cm: c, rel: r, parity: Parity::Even };
        assert_eq!(facilitated_neighbors(&s, 7), vec![e(2, 2), e(3, 2), e(3, 1), e(2, 1)]);
    }

    #[test]
    fn listed_neighbors_of_even_state() {
        let s = DomainState::new(4, 2, Parity::Even, 9).unwrap();
        let o = |c, r| DomainState { cm: c, rel: r, parity: Parity::Odd };
        assert_eq!(facilitated_neighbors(&s, 9), vec![o(3, 3), o(4, 3), o(4, 2), o(3, 2)]);
    }

    #[test]
    fn edge_states_have_two_neighbors() {
        let n = 7;
        for s in enumerate_domain_states(n).unwrap() {
            let nb = facilitated_neighbors(&s, n);
            let expected = if s.exc_count() == 1 || s.exc_count() == n - 1 { 2 } else { 4 };
            assert_eq!(nb.len(), expected, "{s}");
            for t in nb {
                assert_eq!((t.exc_count() as i64 - s.exc_count() as i64).abs(), 1);
                let diff = domain_to_spins(&s, n).bits() ^ domain_to_spins(&t, n).bits();
                assert_eq!(diff.count_ones(), 1, "one spin flip between {s} and {t}");
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_connected() {
        for n in [5, 7, 9] {
            let states = enumerate_domain_states(n).unwrap();
            for s in &states {
                for t in facilitated_neighbors(s, n) {
                    assert!(facilitated_neighbors(&t, n).contains(s));
                }
            }
            let mut seen = HashSet::from([states[0]]);
            let mut stack = vec![states[0]];
            while let Some(s) = stack.pop() {
                for t in facilitated_neighbors(&s, n) {
                    if seen.insert(t) {
                        stack.push(t);
                    }
                }
            }
            assert_eq!(seen.len(), states.len());
        }
    }

    #[test]
    fn cm_position_parity() {
        for s in enumerate_domain_states(9).unwrap() {
            let frac = s.cm_position().fract();
            match s.parity {
                Parity::Odd => assert_eq!(frac, 0.0),
                Parity::Even => assert_eq!(frac, 0.5),
            }
            assert_eq!(Parity::of(s.exc_count()), s.parity);
        }
    }
}
