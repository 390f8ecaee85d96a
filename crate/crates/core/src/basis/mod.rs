//! Spin-sector bases: raw spin strings and the single-domain sector.

mod domain;
mod index;
mod spins;

pub use domain::{
    domain_to_spins, enumerate_domain_states, facilitated_neighbors, spins_to_domain, DomainState, Parity,
};
pub(crate) use domain::{check_chain, wrap};
pub use index::BasisIndex;
pub use spins::SpinString;

/// Single-domain sector of an `n`-site ring with its dense index.
pub fn domain_basis(n: usize) -> crate::Result<BasisIndex<DomainState>> {
    Ok(BasisIndex::new(enumerate_domain_states(n)?))
}
