//! Exact Boltzmann enumeration over small spin graphs.
//!
//! Everything here is a pure function of `(graph, β, evidence)`. Free sites are
//! enumerated as bit patterns (lowest label = most significant bit, spin −1 =
//! bit 0), energies are integers, and normalization goes through the energy
//! histogram so that results do not depend on evaluation order.
//!
//! At β = 0 and β = ln √2 every relative weight is a power of two, and tables
//! are produced as exact fractions.

mod distribution;
mod graph;
mod spin;

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, SQRT_2};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use distribution::{Comparison, Distribution, Probability};
pub use graph::{AxisTag, SpinGraph};
pub use spin::{Configuration, Evidence, Site, Spin};

/// ln √2, the temperature at which two bonded spins agree twice as often as
/// they disagree.
pub const LN_SQRT_2: f64 = LN_2 / 2.0;

pub const DEFAULT_MAX_FREE_SITES: usize = 24;
/// Hard ceiling for an overridden cap; patterns are indexed by `u64`.
pub const MAX_FREE_SITES_LIMIT: usize = 40;

/// Below this many patterns enumeration stays on the calling thread.
const PARALLEL_THRESHOLD: u64 = 1 << 14;

/// Inverse temperature β (dimensionless; the energy scale is absorbed into it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseTemperature(f64);

impl InverseTemperature {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(InverseTemperature(beta))
        } else {
            Err(Error::InvalidBeta(beta))
        }
    }

    pub fn ln_sqrt2() -> Self {
        InverseTemperature(LN_SQRT_2)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_ln_sqrt2(self) -> bool {
        self.0 == LN_SQRT_2
    }

    /// Whether relative weights are powers of two, allowing exact tables.
    pub fn is_dyadic(self) -> bool {
        self.0 == 0.0 || self.is_ln_sqrt2()
    }
}

impl Default for InverseTemperature {
    fn default() -> Self {
        InverseTemperature::ln_sqrt2()
    }
}

/// H(σ) = −Σ⟨ij⟩ σᵢσⱼ.
pub fn energy(graph: &SpinGraph, config: &Configuration) -> Result<i64> {
    graph.energy(config)
}

/// exp(−βH). At β = ln √2 this is evaluated as 2^(−H/2) without going through `exp`.
pub fn boltzmann_weight(beta: InverseTemperature, energy: i64) -> f64 {
    if beta.value() == 0.0 {
        return 1.0;
    }
    if beta.is_ln_sqrt2() {
        let twice_exponent = -energy;
        let half = twice_exponent.div_euclid(2) as i32;
        let base = 2f64.powi(half);
        return if twice_exponent.rem_euclid(2) == 0 {
            base
        } else {
            base * SQRT_2
        };
    }
    (-beta.value() * energy as f64).exp()
}

/// Energy of a free-site pattern, split into the parts that depend on it.
///
/// With every clamped spin fixed, H = constant − Σₖ fieldₖ·sₖ − Σ⟨kl⟩ sₖsₗ
/// over free sites only.
#[derive(Debug, Clone)]
struct Layout {
    free: Vec<Site>,
    constant: i64,
    /// `(bit shift, summed neighbouring clamp values)` per free site with clamped neighbours.
    fields: Vec<(u32, i64)>,
    /// Free–free bonds as pairs of bit shifts.
    bonds: Vec<(u32, u32)>,
    edge_count: usize,
}

impl Layout {
    fn new(graph: &SpinGraph, evidence: &Evidence, cap: usize) -> Result<Self> {
        graph.check_evidence(evidence)?;
        let free = graph.free_sites(evidence);
        if free.len() > cap {
            return Err(Error::Capacity {
                free: free.len(),
                cap,
            });
        }
        let f = free.len();
        let shift_of = |s: Site| free.binary_search(&s).ok().map(|k| (f - 1 - k) as u32);

        let mut constant = 0;
        let mut field: BTreeMap<u32, i64> = BTreeMap::new();
        let mut bonds = Vec::new();
        for &(a, b) in graph.edges() {
            match (shift_of(a), shift_of(b)) {
                (Some(x), Some(y)) => bonds.push((x, y)),
                (Some(x), None) => *field.entry(x).or_default() += evidence.get(b).unwrap().value(),
                (None, Some(y)) => *field.entry(y).or_default() += evidence.get(a).unwrap().value(),
                (None, None) => {
                    constant -= evidence.get(a).unwrap().value() * evidence.get(b).unwrap().value()
                }
            }
        }
        Ok(Layout {
            free,
            constant,
            fields: field.into_iter().filter(|&(_, h)| h != 0).collect(),
            bonds,
            edge_count: graph.edge_count(),
        })
    }

    fn pattern_count(&self) -> u64 {
        1u64 << self.free.len()
    }

    fn energy(&self, pattern: u64) -> i64 {
        let spin = |shift: u32| if (pattern >> shift) & 1 == 1 { 1 } else { -1 };
        let field: i64 = self.fields.iter().map(|&(sh, h)| h * spin(sh)).sum();
        let disagreements = self
            .bonds
            .iter()
            .filter(|&&(x, y)| ((pattern >> x) ^ (pattern >> y)) & 1 == 1)
            .count() as i64;
        self.constant - field - (self.bonds.len() as i64 - 2 * disagreements)
    }

    fn energies(&self) -> Vec<i64> {
        let n = self.pattern_count();
        if n >= PARALLEL_THRESHOLD {
            (0..n).into_par_iter().map(|p| self.energy(p)).collect()
        } else {
            (0..n).map(|p| self.energy(p)).collect()
        }
    }

    /// Number of patterns at each energy, ascending.
    fn histogram(&self) -> BTreeMap<i64, u64> {
        let n = self.pattern_count();
        let count = |mut acc: BTreeMap<i64, u64>, p: u64| {
            *acc.entry(self.energy(p)).or_default() += 1;
            acc
        };
        if n >= PARALLEL_THRESHOLD {
            (0..n)
                .into_par_iter()
                .fold(BTreeMap::new, count)
                .reduce(BTreeMap::new, |mut a, b| {
                    for (h, c) in b {
                        *a.entry(h).or_default() += c;
                    }
                    a
                })
        } else {
            (0..n).fold(BTreeMap::new(), count)
        }
    }

    /// Relative weights 2^k per energy level, shifted so the smallest is 2^0.
    /// Only meaningful for a dyadic β.
    fn dyadic_weights(
        &self,
        beta: InverseTemperature,
        levels: &BTreeMap<i64, u64>,
    ) -> BTreeMap<i64, BigInt> {
        let parity = (self.edge_count % 2) as i64;
        let exponent = |h: i64| {
            if beta.value() == 0.0 {
                0
            } else {
                (parity - h) / 2
            }
        };
        let lowest = levels.keys().map(|&h| exponent(h)).min().unwrap_or(0);
        levels
            .keys()
            .map(|&h| (h, BigInt::one() << (exponent(h) - lowest) as usize))
            .collect()
    }

    /// Probability of one pattern at each energy level.
    fn level_probabilities(
        &self,
        beta: InverseTemperature,
        levels: &BTreeMap<i64, u64>,
    ) -> LevelTable {
        if beta.is_dyadic() {
            let weights = self.dyadic_weights(beta, levels);
            let z: BigInt = levels
                .iter()
                .map(|(h, &c)| &weights[h] * BigInt::from(c))
                .sum();
            LevelTable::Exact(
                weights
                    .into_iter()
                    .map(|(h, w)| (h, BigRational::new(w, z.clone())))
                    .collect(),
            )
        } else {
            let ground = *levels.keys().next().unwrap();
            let rel = |h: i64| (-beta.value() * (h - ground) as f64).exp();
            let z: f64 = levels.iter().map(|(&h, &c)| c as f64 * rel(h)).sum();
            LevelTable::Float(levels.keys().map(|&h| (h, rel(h) / z)).collect())
        }
    }

    fn configuration(&self, pattern: u64, evidence: &Evidence) -> Configuration {
        let f = self.free.len();
        let mut spins: Vec<(Site, Spin)> = self
            .free
            .iter()
            .enumerate()
            .map(|(k, &s)| (s, Spin::from_bit((pattern >> (f - 1 - k)) & 1 == 1)))
            .chain(evidence.iter())
            .collect();
        spins.sort_unstable_by_key(|&(s, _)| s);
        Configuration::from_sorted(spins)
    }
}

enum LevelTable {
    Exact(BTreeMap<i64, BigRational>),
    Float(BTreeMap<i64, f64>),
}

/// Iterator over every total configuration consistent with some evidence,
/// in ascending free-pattern order.
pub struct Configurations {
    layout: Layout,
    evidence: Evidence,
    next: u64,
}

impl Iterator for Configurations {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.next >= self.layout.pattern_count() {
            return None;
        }
        let c = self.layout.configuration(self.next, &self.evidence);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.layout.pattern_count() - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Configurations {}

/// Exact enumerator with an explicit bound on the number of free sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumerator {
    max_free_sites: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            max_free_sites: DEFAULT_MAX_FREE_SITES,
        }
    }
}

impl Enumerator {
    pub fn with_cap(max_free_sites: usize) -> Result<Self> {
        if max_free_sites > MAX_FREE_SITES_LIMIT {
            return Err(Error::CapTooLarge(max_free_sites));
        }
        Ok(Enumerator { max_free_sites })
    }

    pub fn cap(&self) -> usize {
        self.max_free_sites
    }

    pub fn configurations(&self, graph: &SpinGraph, evidence: &Evidence) -> Result<Configurations> {
        Ok(Configurations {
            layout: Layout::new(graph, evidence, self.max_free_sites)?,
            evidence: evidence.clone(),
            next: 0,
        })
    }

    /// Z = Σ exp(−βH) over evidence-consistent configurations.
    pub fn partition_function(
        &self,
        graph: &SpinGraph,
        beta: InverseTemperature,
        evidence: &Evidence,
    ) -> Result<f64> {
        let layout = Layout::new(graph, evidence, self.max_free_sites)?;
        Ok(layout
            .histogram()
            .into_iter()
            .map(|(h, c)| c as f64 * boltzmann_weight(beta, h))
            .sum())
    }

    /// Z as an exact fraction, when every weight exp(−βH) is rational
    /// (β = 0, or β = ln √2 with an even edge count).
    pub fn partition_function_exact(
        &self,
        graph: &SpinGraph,
        beta: InverseTemperature,
        evidence: &Evidence,
    ) -> Result<Option<BigRational>> {
        let layout = Layout::new(graph, evidence, self.max_free_sites)?;
        let levels = layout.histogram();
        if beta.value() == 0.0 {
            let total: u64 = levels.values().sum();
            return Ok(Some(BigRational::from_integer(total.into())));
        }
        if !beta.is_ln_sqrt2() || !graph.edge_count().is_multiple_of(2) {
            return Ok(None);
        }
        let mut z = BigRational::zero();
        for (h, c) in levels {
            let k = -h / 2;
            let pow = BigRational::from_integer(BigInt::one() << k.unsigned_abs() as usize);
            let w = if k >= 0 { pow } else { pow.recip() };
            z += w * BigRational::from_integer(c.into());
        }
        Ok(Some(z))
    }

    /// P(σ) = exp(−βH(σ))/Z over the free sites.
    pub fn joint_distribution(
        &self,
        graph: &SpinGraph,
        beta: InverseTemperature,
        evidence: &Evidence,
    ) -> Result<Distribution> {
        let layout = Layout::new(graph, evidence, self.max_free_sites)?;
        if layout.free.is_empty() {
            return Err(Error::NoFreeSites);
        }
        let energies = layout.energies();
        let mut levels = BTreeMap::new();
        for &h in &energies {
            *levels.entry(h).or_insert(0u64) += 1;
        }
        let scope = layout.free.clone();
        Ok(match layout.level_probabilities(beta, &levels) {
            LevelTable::Exact(table) => {
                Distribution::from_exact(scope, energies.iter().map(|h| table[h].clone()).collect())
            }
            LevelTable::Float(table) => {
                Distribution::from_float(scope, energies.iter().map(|h| table[h]).collect())
            }
        })
    }

    /// Marginal over `scope`, which may include clamped sites (they carry
    /// point mass on their clamped value).
    pub fn distribution_over(
        &self,
        graph: &SpinGraph,
        beta: InverseTemperature,
        evidence: &Evidence,
        scope: &[Site],
    ) -> Result<Distribution> {
        if scope.is_empty() {
            return Err(Error::EmptyScope);
        }
        if let Some(&s) = scope.iter().find(|&&s| !graph.contains(s)) {
            return Err(Error::UnknownSite(s));
        }
        graph.check_evidence(evidence)?;
        let clamped_in_scope = evidence.restricted(|s| scope.contains(&s));
        if graph.free_sites(evidence).is_empty() {
            let config = Configuration::new(clamped_in_scope.iter())?;
            return Distribution::point(&config)?.marginal(scope);
        }
        self.joint_distribution(graph, beta, evidence)?
            .with_clamps(&clamped_in_scope)?
            .marginal(scope)
    }
}

/// All configurations consistent with `evidence`, under the default cap.
pub fn enumerate_configurations(graph: &SpinGraph, evidence: &Evidence) -> Result<Configurations> {
    Enumerator::default().configurations(graph, evidence)
}

pub fn partition_function(
    graph: &SpinGraph,
    beta: InverseTemperature,
    evidence: &Evidence,
) -> Result<f64> {
    Enumerator::default().partition_function(graph, beta, evidence)
}

pub fn joint_distribution(
    graph: &SpinGraph,
    beta: InverseTemperature,
    evidence: &Evidence,
) -> Result<Distribution> {
    Enumerator::default().joint_distribution(graph, beta, evidence)
}

pub fn marginal(dist: &Distribution, subset: &[Site]) -> Result<Distribution> {
    dist.marginal(subset)
}

pub fn event_probability(
    dist: &Distribution,
    predicate: impl Fn(&Configuration) -> bool,
) -> Probability {
    dist.event_probability(predicate)
}
