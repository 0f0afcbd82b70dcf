//! Geometry-conditional probabilities and the updates an agent makes as it
//! learns lattice values or the geometry itself.
//!
//! Nothing in this module assigns a probability to a geometry label. Every
//! table is conditional on a label, P_G(subsystem), and learning the label
//! only discards the alternatives.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ising::{
    AxisTag, Configuration, Distribution, Enumerator, Evidence, InverseTemperature, Probability,
    Site, Spin, SpinGraph,
};

/// Threshold for calling a float-mode audit geometry dependent. Exact audits
/// use strict inequality against zero.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

/// A labelled family of graphs sharing a subsystem and some known values.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryEnsemble {
    geometries: BTreeMap<String, SpinGraph>,
    shared_subsystem: Vec<Site>,
    shared_evidence: Evidence,
}

impl GeometryEnsemble {
    pub fn new(
        geometries: BTreeMap<String, SpinGraph>,
        shared_subsystem: Vec<Site>,
        shared_evidence: Evidence,
    ) -> Result<Self> {
        if geometries.is_empty() {
            return Err(Error::InvalidEnsemble("no geometries".into()));
        }
        let mut subsystem = shared_subsystem;
        subsystem.sort_unstable();
        subsystem.dedup();
        if subsystem.is_empty() {
            return Err(Error::InvalidEnsemble("shared subsystem is empty".into()));
        }
        for (label, graph) in &geometries {
            let missing = subsystem
                .iter()
                .copied()
                .chain(shared_evidence.sites())
                .find(|&s| !graph.contains(s));
            if let Some(site) = missing {
                return Err(Error::InvalidEnsemble(format!(
                    "geometry `{label}` lacks shared site {site}"
                )));
            }
        }
        Ok(GeometryEnsemble {
            geometries,
            shared_subsystem: subsystem,
            shared_evidence,
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.geometries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.geometries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometries.is_empty()
    }

    pub fn graph(&self, label: &str) -> Result<&SpinGraph> {
        self.geometries
            .get(label)
            .ok_or_else(|| Error::UnknownGeometry(label.to_string()))
    }

    pub fn geometries(&self) -> &BTreeMap<String, SpinGraph> {
        &self.geometries
    }

    pub fn shared_subsystem(&self) -> &[Site] {
        &self.shared_subsystem
    }

    pub fn shared_evidence(&self) -> &Evidence {
        &self.shared_evidence
    }

    /// Applies `f` to every member graph, e.g. to attach time coordinates.
    pub fn map_graphs(
        &self,
        mut f: impl FnMut(&str, &SpinGraph) -> Result<SpinGraph>,
    ) -> Result<Self> {
        let geometries = self
            .geometries
            .iter()
            .map(|(label, g)| Ok((label.clone(), f(label, g)?)))
            .collect::<Result<_>>()?;
        GeometryEnsemble::new(
            geometries,
            self.shared_subsystem.clone(),
            self.shared_evidence.clone(),
        )
    }
}

/// What an agent knows: the candidate geometries, possibly which one is
/// actual, and the lattice values learned so far.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeState {
    ensemble: Arc<GeometryEnsemble>,
    revealed_geometry: Option<String>,
    evidence: Evidence,
    beta: InverseTemperature,
    enumerator: Enumerator,
}

impl KnowledgeState {
    pub fn new(ensemble: GeometryEnsemble, beta: InverseTemperature) -> Self {
        KnowledgeState {
            evidence: ensemble.shared_evidence.clone(),
            ensemble: Arc::new(ensemble),
            revealed_geometry: None,
            beta,
            enumerator: Enumerator::default(),
        }
    }

    pub fn with_enumerator(mut self, enumerator: Enumerator) -> Self {
        self.enumerator = enumerator;
        self
    }

    pub fn ensemble(&self) -> &GeometryEnsemble {
        &self.ensemble
    }

    pub fn revealed_geometry(&self) -> Option<&str> {
        self.revealed_geometry.as_deref()
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn beta(&self) -> InverseTemperature {
        self.beta
    }

    /// Labels still considered possible.
    pub fn live_geometries(&self) -> Vec<&str> {
        match &self.revealed_geometry {
            Some(label) => vec![label.as_str()],
            None => self.ensemble.labels().collect(),
        }
    }

    fn check_live(&self, label: &str) -> Result<&SpinGraph> {
        let graph = self.ensemble.graph(label)?;
        match &self.revealed_geometry {
            Some(revealed) if revealed != label => Err(Error::Counterfactual {
                requested: label.to_string(),
                revealed: revealed.clone(),
            }),
            _ => Ok(graph),
        }
    }

    /// P_G(subsystem) given everything learned so far. Clamped subsystem sites
    /// appear with point mass; entries are never dropped.
    pub fn conditional_distribution(&self, label: &str) -> Result<Distribution> {
        let graph = self.check_live(label)?;
        self.enumerator.distribution_over(
            graph,
            self.beta,
            &self.evidence,
            &self.ensemble.shared_subsystem,
        )
    }

    /// Conditional tables for every live geometry, keyed by label.
    pub fn conditional_distributions(&self) -> Result<BTreeMap<String, Distribution>> {
        self.live_geometries()
            .into_iter()
            .map(|label| Ok((label.to_string(), self.conditional_distribution(label)?)))
            .collect()
    }

    /// Learns which geometry is actual. The table for that label does not
    /// change; the others become counterfactual.
    pub fn reveal_geometry(&self, label: &str) -> Result<Self> {
        self.ensemble.graph(label)?;
        if let Some(revealed) = &self.revealed_geometry {
            return Err(Error::AlreadyRevealed(revealed.clone()));
        }
        Ok(KnowledgeState {
            revealed_geometry: Some(label.to_string()),
            ..self.clone()
        })
    }

    /// Learns one lattice value. The site must exist in every live geometry.
    pub fn reveal_site(&self, site: Site, spin: Spin) -> Result<Self> {
        self.reveal_evidence(&Evidence::new().with(site, spin)?)
    }

    /// Learns several lattice values at once.
    pub fn reveal_evidence(&self, learned: &Evidence) -> Result<Self> {
        for label in self.live_geometries() {
            self.ensemble.graph(label)?.check_evidence(learned)?;
        }
        Ok(KnowledgeState {
            evidence: self.evidence.merged(learned)?,
            ..self.clone()
        })
    }
}

/// Difference between the conditional tables of two geometries.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAudit {
    pub label_a: String,
    pub label_b: String,
    pub max_diff: Probability,
    pub tv_distance: Probability,
    /// First subsystem configuration attaining `max_diff`.
    pub entry: Configuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub pairs: Vec<PairAudit>,
    /// Index into `pairs` of the first pair attaining the overall maximum.
    pub worst_pair: usize,
    pub max_diff: Probability,
    /// True when the subsystem's table depends on the geometry, i.e. treating
    /// it as geometry independent would be a mistake.
    pub geometry_dependent: bool,
}

impl AuditReport {
    pub fn worst(&self) -> &PairAudit {
        &self.pairs[self.worst_pair]
    }
}

/// Compares P_G(subsystem) across every pair of labels.
pub fn independence_audit(
    ensemble: &GeometryEnsemble,
    beta: InverseTemperature,
) -> Result<AuditReport> {
    independence_audit_with_tolerance(ensemble, beta, AUDIT_TOLERANCE)
}

pub fn independence_audit_with_tolerance(
    ensemble: &GeometryEnsemble,
    beta: InverseTemperature,
    tolerance: f64,
) -> Result<AuditReport> {
    if ensemble.len() < 2 {
        return Err(Error::AuditUndefined(ensemble.len()));
    }
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::InvalidTolerance(tolerance));
    }
    let state = KnowledgeState::new(ensemble.clone(), beta);
    let tables = state.conditional_distributions()?;
    let labels: Vec<&String> = tables.keys().collect();

    let mut pairs = Vec::new();
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            let (da, db) = (&tables[*a], &tables[*b]);
            let cmp = da
                .compare(db)
                .expect("all tables share the subsystem scope");
            pairs.push(PairAudit {
                label_a: a.to_string(),
                label_b: b.to_string(),
                entry: da.configuration(cmp.index),
                max_diff: cmp.max_diff,
                tv_distance: cmp.tv_distance,
            });
        }
    }

    let worst_pair = (1..pairs.len()).fold(0, |best, i| {
        if pairs[i].max_diff.exceeds(&pairs[best].max_diff) {
            i
        } else {
            best
        }
    });
    let max_diff = pairs[worst_pair].max_diff.clone();
    let geometry_dependent = match &max_diff {
        Probability::Exact(d) => !d.is_zero(),
        Probability::Float(d) => *d > tolerance,
    };
    Ok(AuditReport {
        pairs,
        worst_pair,
        max_diff,
        geometry_dependent,
    })
}

/// Detector arrangement in the two-slit setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlitGeometry {
    /// A detector behind each slit: the photon goes through one (N = 1).
    WhichPath,
    /// A distant screen: the field passes both slits (N = 2).
    Interference,
}

impl SlitGeometry {
    pub fn label(self) -> &'static str {
        match self {
            SlitGeometry::WhichPath => "which-path",
            SlitGeometry::Interference => "interference",
        }
    }
}

/// P(N | G) for the number of slits N ∈ {1, 2} the field passes through.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitCountDistribution {
    pub geometry: SlitGeometry,
    pub one_slit: BigRational,
    pub two_slits: BigRational,
}

impl SlitCountDistribution {
    pub fn probability(&self, n: u32) -> Option<&BigRational> {
        match n {
            1 => Some(&self.one_slit),
            2 => Some(&self.two_slits),
            _ => None,
        }
    }
}

pub fn double_slit_demo(geometry: SlitGeometry) -> SlitCountDistribution {
    let (one, two) = match geometry {
        SlitGeometry::WhichPath => (BigRational::one(), BigRational::zero()),
        SlitGeometry::Interference => (BigRational::zero(), BigRational::one()),
    };
    SlitCountDistribution {
        geometry,
        one_slit: one,
        two_slits: two,
    }
}

/// Reads one graph axis as time. Probabilities are unaffected.
pub fn as_spacetime(graph: &SpinGraph, ticks: &BTreeMap<Site, i64>) -> Result<SpinGraph> {
    graph.with_axis_tags(ticks.iter().map(|(&s, &t)| (s, AxisTag::Time(t))).collect())
}

/// Sites whose time tag lies in `[from, to]`, ascending.
pub fn time_slice(graph: &SpinGraph, from: i64, to: i64) -> Vec<Site> {
    graph
        .sites()
        .iter()
        .copied()
        .filter(
            |&s| matches!(graph.axis_tag(s), Some(AxisTag::Time(t)) if (from..=to).contains(&t)),
        )
        .collect()
}

/// Labels appearing in at least one pair whose tables differ.
pub fn dependent_labels(report: &AuditReport) -> BTreeSet<&str> {
    report
        .pairs
        .iter()
        .filter(|p| !p.max_diff.is_zero())
        .flat_map(|p| [p.label_a.as_str(), p.label_b.as_str()])
        .collect()
}
