use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice site label. Labels are 1-based to line up with σ₁, σ₂, … .
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(pub u32);

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for Site {
    fn from(label: u32) -> Self {
        Site(label)
    }
}

/// A spin value, ordered so that `Down < Up` matches the enumeration bit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn value(self) -> i64 {
        match self {
            Spin::Down => -1,
            Spin::Up => 1,
        }
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            -1 => Some(Spin::Down),
            1 => Some(Spin::Up),
            _ => None,
        }
    }

    pub(crate) fn from_bit(bit: bool) -> Self {
        if bit {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub(crate) fn bit(self) -> bool {
        self == Spin::Up
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Down => Spin::Up,
            Spin::Up => Spin::Down,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Down => "-1",
            Spin::Up => "+1",
        })
    }
}

/// An assignment of spins to a set of sites, kept in ascending site order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    spins: Vec<(Site, Spin)>,
}

impl Configuration {
    /// Builds a configuration from arbitrary-order pairs. Duplicate sites are rejected.
    pub fn new(pairs: impl IntoIterator<Item = (Site, Spin)>) -> Result<Self> {
        let mut spins: Vec<_> = pairs.into_iter().collect();
        spins.sort_by_key(|&(site, _)| site);
        if let Some(w) = spins.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateSite(w[0].0));
        }
        Ok(Configuration { spins })
    }

    /// Pairs `sites` with `values` (±1 integers) positionally.
    pub fn from_values(sites: &[Site], values: &[i64]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(sites.len());
        for (i, &site) in sites.iter().enumerate() {
            let spin = values
                .get(i)
                .copied()
                .and_then(Spin::from_value)
                .ok_or(Error::IncompleteConfiguration(site))?;
            pairs.push((site, spin));
        }
        Configuration::new(pairs)
    }

    pub(crate) fn from_sorted(spins: Vec<(Site, Spin)>) -> Self {
        debug_assert!(spins.windows(2).all(|w| w[0].0 < w[1].0));
        Configuration { spins }
    }

    pub fn get(&self, site: Site) -> Option<Spin> {
        self.spins
            .binary_search_by_key(&site, |&(s, _)| s)
            .ok()
            .map(|i| self.spins[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, Spin)> + '_ {
        self.spins.iter().copied()
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.spins.iter().map(|&(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Global spin flip σ → −σ.
    pub fn flipped(&self) -> Self {
        Configuration {
            spins: self.spins.iter().map(|&(s, v)| (s, v.flipped())).collect(),
        }
    }
}

/// Renders as a ±1 tuple in ascending site order, e.g. `(+1,-1)`.
impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (_, spin)) in self.spins.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{spin}")?;
        }
        f.write_str(")")
    }
}

/// Known spin values. Clamping a site twice to different values is an error.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Evidence {
    clamps: BTreeMap<Site, Spin>,
}

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn from_clamps(clamps: impl IntoIterator<Item = (Site, Spin)>) -> Result<Self> {
        clamps
            .into_iter()
            .try_fold(Evidence::new(), |ev, (site, spin)| ev.with(site, spin))
    }

    /// Returns this evidence extended by `site = spin`.
    pub fn with(mut self, site: Site, spin: Spin) -> Result<Self> {
        match self.clamps.get(&site) {
            Some(&existing) if existing != spin => Err(Error::InconsistentEvidence {
                site,
                existing,
                requested: spin,
            }),
            _ => {
                self.clamps.insert(site, spin);
                Ok(self)
            }
        }
    }

    pub fn merged(&self, other: &Evidence) -> Result<Self> {
        other
            .iter()
            .try_fold(self.clone(), |ev, (site, spin)| ev.with(site, spin))
    }

    pub fn get(&self, site: Site) -> Option<Spin> {
        self.clamps.get(&site).copied()
    }

    pub fn contains(&self, site: Site) -> bool {
        self.clamps.contains_key(&site)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, Spin)> + '_ {
        self.clamps.iter().map(|(&s, &v)| (s, v))
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.clamps.keys().copied()
    }

    /// Keeps only the clamps whose site satisfies `keep`.
    pub fn restricted(&self, keep: impl Fn(Site) -> bool) -> Evidence {
        Evidence {
            clamps: self
                .clamps
                .iter()
                .filter(|(&s, _)| keep(s))
                .map(|(&s, &v)| (s, v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.clamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clamps.is_empty()
    }

    /// True if every clamp here is also present in `other`.
    pub fn is_subset_of(&self, other: &Evidence) -> bool {
        self.iter().all(|(s, v)| other.get(s) == Some(v))
    }
}
