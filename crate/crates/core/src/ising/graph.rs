use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::spin::{Configuration, Evidence, Site};

/// Coordinate label attached to a site. Purely descriptive: no probability
/// computation reads it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisTag {
    Space(i64),
    Time(i64),
}

/// A finite set of ±1 sites with undirected nearest-neighbour adjacency.
///
/// Sites are stored in ascending label order and edges as `(low, high)` pairs,
/// sorted, so two graphs built from the same data compare equal regardless of
/// input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinGraph {
    sites: Vec<Site>,
    edges: Vec<(Site, Site)>,
    axis_tags: Option<BTreeMap<Site, AxisTag>>,
}

impl SpinGraph {
    pub fn new(
        sites: impl IntoIterator<Item = Site>,
        edges: impl IntoIterator<Item = (Site, Site)>,
    ) -> Result<Self> {
        let mut sites: Vec<Site> = sites.into_iter().collect();
        if sites.is_empty() {
            return Err(Error::EmptyGraph);
        }
        sites.sort_unstable();
        if let Some(w) = sites.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSite(w[0]));
        }

        let mut normalized = Vec::new();
        for (a, b) in edges {
            for s in [a, b] {
                if sites.binary_search(&s).is_err() {
                    return Err(Error::UnknownSite(s));
                }
            }
            if a == b {
                return Err(Error::SelfEdge(a));
            }
            normalized.push(if a < b { (a, b) } else { (b, a) });
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }

        Ok(SpinGraph {
            sites,
            edges: normalized,
            axis_tags: None,
        })
    }

    /// Convenience constructor from raw labels.
    pub fn from_labels(sites: &[u32], edges: &[(u32, u32)]) -> Result<Self> {
        SpinGraph::new(
            sites.iter().map(|&s| Site(s)),
            edges.iter().map(|&(a, b)| (Site(a), Site(b))),
        )
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn edges(&self) -> &[(Site, Site)] {
        &self.edges
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, site: Site) -> bool {
        self.index_of(site).is_some()
    }

    pub(crate) fn index_of(&self, site: Site) -> Option<usize> {
        self.sites.binary_search(&site).ok()
    }

    pub fn axis_tags(&self) -> Option<&BTreeMap<Site, AxisTag>> {
        self.axis_tags.as_ref()
    }

    pub fn axis_tag(&self, site: Site) -> Option<AxisTag> {
        self.axis_tags.as_ref()?.get(&site).copied()
    }

    /// Attaches coordinate labels. Every site must be tagged.
    pub fn with_axis_tags(&self, tags: BTreeMap<Site, AxisTag>) -> Result<Self> {
        if let Some(&extra) = tags.keys().find(|s| !self.contains(**s)) {
            return Err(Error::UnknownSite(extra));
        }
        if let Some(&missing) = self.sites.iter().find(|s| !tags.contains_key(s)) {
            return Err(Error::MissingTick(missing));
        }
        Ok(SpinGraph {
            axis_tags: Some(tags),
            ..self.clone()
        })
    }

    pub fn without_axis_tags(&self) -> Self {
        SpinGraph {
            axis_tags: None,
            ..self.clone()
        }
    }

    /// Checks that every clamped site exists in this graph.
    pub fn check_evidence(&self, evidence: &Evidence) -> Result<()> {
        match evidence.iter().find(|&(s, _)| !self.contains(s)) {
            Some((site, _)) => Err(Error::UnknownSite(site)),
            None => Ok(()),
        }
    }

    /// Sites not fixed by `evidence`, ascending.
    pub fn free_sites(&self, evidence: &Evidence) -> Vec<Site> {
        self.sites
            .iter()
            .copied()
            .filter(|&s| !evidence.contains(s))
            .collect()
    }

    /// H(σ) = −Σ⟨ij⟩ σᵢσⱼ.
    pub fn energy(&self, config: &Configuration) -> Result<i64> {
        if let Some(&missing) = self.sites.iter().find(|&&s| config.get(s).is_none()) {
            return Err(Error::IncompleteConfiguration(missing));
        }
        Ok(-self
            .edges
            .iter()
            .map(|&(a, b)| {
                // both lookups succeed after the totality check above
                config.get(a).unwrap().value() * config.get(b).unwrap().value()
            })
            .sum::<i64>())
    }
}
