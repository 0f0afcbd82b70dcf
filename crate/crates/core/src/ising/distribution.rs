use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::io::format_sig12;

use super::spin::{Configuration, Evidence, Site, Spin};

/// A probability held either as an exact fraction or as a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(BigRational),
    Float(f64),
}

impl Probability {
    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Probability::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Probability::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Probability::Exact(r) => Some(r),
            Probability::Float(_) => None,
        }
    }

    /// `|self − other|`, exact when both sides are.
    pub fn abs_diff(&self, other: &Probability) -> Probability {
        match (self, other) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact((a - b).abs()),
            _ => Probability::Float((self.to_f64() - other.to_f64()).abs()),
        }
    }

    pub fn add(&self, other: &Probability) -> Probability {
        match (self, other) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a + b),
            _ => Probability::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Probability::Exact(r) => r.is_zero(),
            Probability::Float(x) => *x == 0.0,
        }
    }

    /// Strict comparison, exact when both sides are.
    pub fn exceeds(&self, other: &Probability) -> bool {
        match (self, other) {
            (Probability::Exact(a), Probability::Exact(b)) => a > b,
            _ => self.to_f64() > other.to_f64(),
        }
    }
}

/// Fractions print as `p/q` in lowest terms, floats with 12 significant digits.
impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(r) => write!(f, "{r}"),
            Probability::Float(x) => f.write_str(&format_sig12(*x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// A normalized probability table over every configuration of `scope`.
///
/// Entries are indexed by bit pattern: the lowest-labelled scope site is the
/// most significant bit and spin −1 maps to bit 0, so index order runs
/// lexicographically from all −1 to all +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    scope: Vec<Site>,
    values: Values,
}

fn sorted_scope(sites: &[Site]) -> Result<Vec<Site>> {
    if sites.is_empty() {
        return Err(Error::EmptyScope);
    }
    let mut scope = sites.to_vec();
    scope.sort_unstable();
    if let Some(w) = scope.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateSite(w[0]));
    }
    Ok(scope)
}

impl Distribution {
    pub(crate) fn from_exact(scope: Vec<Site>, values: Vec<BigRational>) -> Self {
        debug_assert_eq!(values.len(), 1usize << scope.len());
        Distribution {
            scope,
            values: Values::Exact(values),
        }
    }

    pub(crate) fn from_float(scope: Vec<Site>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), 1usize << scope.len());
        Distribution {
            scope,
            values: Values::Float(values),
        }
    }

    /// Exact uniform distribution over `sites`.
    pub fn uniform(sites: &[Site]) -> Result<Self> {
        let scope = sorted_scope(sites)?;
        let n = 1usize << scope.len();
        let p = BigRational::new(1.into(), n.into());
        Ok(Distribution::from_exact(scope, vec![p; n]))
    }

    /// Exact point mass on `config`.
    pub fn point(config: &Configuration) -> Result<Self> {
        let scope = sorted_scope(&config.sites().collect::<Vec<_>>())?;
        let mut values = vec![BigRational::zero(); 1usize << scope.len()];
        let index = config
            .iter()
            .fold(0usize, |acc, (_, spin)| (acc << 1) | spin.bit() as usize);
        values[index] = BigRational::one();
        Ok(Distribution::from_exact(scope, values))
    }

    /// Normalizes nonnegative float weights into a distribution.
    pub fn from_weights(sites: &[Site], weights: Vec<f64>) -> Result<Self> {
        let scope = sorted_scope(sites)?;
        assert_eq!(
            weights.len(),
            1usize << scope.len(),
            "one weight per configuration"
        );
        let total: f64 = weights.iter().sum();
        Ok(Distribution::from_float(
            scope,
            weights.into_iter().map(|w| w / total).collect(),
        ))
    }

    pub fn scope(&self) -> &[Site] {
        &self.scope
    }

    pub fn len(&self) -> usize {
        match &self.values {
            Values::Exact(v) => v.len(),
            Values::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, Values::Exact(_))
    }

    pub fn probability(&self, index: usize) -> Probability {
        match &self.values {
            Values::Exact(v) => Probability::Exact(v[index].clone()),
            Values::Float(v) => Probability::Float(v[index]),
        }
    }

    pub fn configuration(&self, index: usize) -> Configuration {
        let n = self.scope.len();
        Configuration::from_sorted(
            self.scope
                .iter()
                .enumerate()
                .map(|(k, &s)| (s, Spin::from_bit((index >> (n - 1 - k)) & 1 == 1)))
                .collect(),
        )
    }

    /// Index of the entry matching `config` on every scope site.
    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.scope.iter().try_fold(0usize, |acc, &s| {
            config.get(s).map(|spin| (acc << 1) | spin.bit() as usize)
        })
    }

    pub fn get(&self, config: &Configuration) -> Option<Probability> {
        self.index_of(config).map(|i| self.probability(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Configuration, Probability)> + '_ {
        (0..self.len()).map(|i| (self.configuration(i), self.probability(i)))
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.values {
            Values::Exact(v) => v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            Values::Float(v) => v.clone(),
        }
    }

    pub fn exact_values(&self) -> Option<&[BigRational]> {
        match &self.values {
            Values::Exact(v) => Some(v),
            Values::Float(_) => None,
        }
    }

    pub fn total(&self) -> Probability {
        match &self.values {
            Values::Exact(v) => Probability::Exact(v.iter().sum()),
            Values::Float(v) => Probability::Float(v.iter().sum()),
        }
    }

    /// Sums an event over the table.
    pub fn event_probability(&self, predicate: impl Fn(&Configuration) -> bool) -> Probability {
        let hits = (0..self.len()).filter(|&i| predicate(&self.configuration(i)));
        match &self.values {
            Values::Exact(v) => Probability::Exact(hits.map(|i| &v[i]).sum()),
            Values::Float(v) => Probability::Float(hits.map(|i| v[i]).sum()),
        }
    }

    /// Sums out every scope site not in `subset`. The result is scoped to
    /// `subset` in ascending label order.
    pub fn marginal(&self, subset: &[Site]) -> Result<Distribution> {
        let target = sorted_scope(subset)?;
        let n = self.scope.len();
        let mut shifts = Vec::with_capacity(target.len());
        for &s in &target {
            let k = self.scope.binary_search(&s).map_err(|_| Error::Scope(s))?;
            shifts.push(n - 1 - k);
        }
        if target.len() == n {
            return Ok(self.clone());
        }
        let project = |index: usize| {
            shifts
                .iter()
                .fold(0usize, |acc, &sh| (acc << 1) | ((index >> sh) & 1))
        };
        let size = 1usize << target.len();
        let values = match &self.values {
            Values::Exact(v) => {
                let mut out = vec![BigRational::zero(); size];
                for (i, p) in v.iter().enumerate() {
                    out[project(i)] += p;
                }
                Values::Exact(out)
            }
            Values::Float(v) => {
                let mut out = vec![0.0; size];
                for (i, p) in v.iter().enumerate() {
                    out[project(i)] += p;
                }
                Values::Float(out)
            }
        };
        Ok(Distribution {
            scope: target,
            values,
        })
    }

    /// Conditions on `site = spin` and drops `site` from the scope.
    pub fn condition(&self, site: Site, spin: Spin) -> Result<Distribution> {
        let k = self
            .scope
            .binary_search(&site)
            .map_err(|_| Error::Scope(site))?;
        if self.scope.len() == 1 {
            return Err(Error::EmptyScope);
        }
        let n = self.scope.len();
        let shift = n - 1 - k;
        let keep: Vec<usize> = (0..self.len())
            .filter(|i| ((i >> shift) & 1 == 1) == spin.bit())
            .collect();
        let mut scope = self.scope.clone();
        scope.remove(k);
        let values = match &self.values {
            Values::Exact(v) => {
                let mass: BigRational = keep.iter().map(|&i| &v[i]).sum();
                Values::Exact(keep.iter().map(|&i| &v[i] / &mass).collect())
            }
            Values::Float(v) => {
                let mass: f64 = keep.iter().map(|&i| v[i]).sum();
                Values::Float(keep.iter().map(|&i| v[i] / mass).collect())
            }
        };
        Ok(Distribution { scope, values })
    }

    /// Extends the scope with clamped sites carrying point mass on their
    /// clamped values. Sites already in scope are rejected.
    pub fn with_clamps(&self, clamps: &Evidence) -> Result<Distribution> {
        if clamps.is_empty() {
            return Ok(self.clone());
        }
        if let Some((s, _)) = clamps.iter().find(|&(s, _)| self.scope.contains(&s)) {
            return Err(Error::DuplicateSite(s));
        }
        let mut scope: Vec<Site> = self.scope.iter().copied().chain(clamps.sites()).collect();
        scope.sort_unstable();
        let n = scope.len();
        let mut base = 0usize;
        let mut old_shifts = Vec::with_capacity(self.scope.len());
        for (k, &s) in scope.iter().enumerate() {
            match clamps.get(s) {
                Some(spin) => base |= (spin.bit() as usize) << (n - 1 - k),
                None => old_shifts.push(n - 1 - k),
            }
        }
        let old_n = self.scope.len();
        let lift = |index: usize| {
            old_shifts.iter().enumerate().fold(base, |acc, (j, &sh)| {
                acc | (((index >> (old_n - 1 - j)) & 1) << sh)
            })
        };
        let size = 1usize << n;
        let values = match &self.values {
            Values::Exact(v) => {
                let mut out = vec![BigRational::zero(); size];
                for (i, p) in v.iter().enumerate() {
                    out[lift(i)] = p.clone();
                }
                Values::Exact(out)
            }
            Values::Float(v) => {
                let mut out = vec![0.0; size];
                for (i, p) in v.iter().enumerate() {
                    out[lift(i)] = *p;
                }
                Values::Float(out)
            }
        };
        Ok(Distribution { scope, values })
    }

    /// Largest entrywise |p − q| and the first index attaining it, plus the
    /// total-variation distance. `None` if the scopes differ.
    pub fn compare(&self, other: &Distribution) -> Option<Comparison> {
        if self.scope != other.scope {
            return None;
        }
        match (&self.values, &other.values) {
            (Values::Exact(a), Values::Exact(b)) => {
                let diffs: Vec<BigRational> = a.iter().zip(b).map(|(p, q)| (p - q).abs()).collect();
                let (index, max) = diffs
                    .iter()
                    .enumerate()
                    .fold(
                        (0, &diffs[0]),
                        |best, (i, d)| if d > best.1 { (i, d) } else { best },
                    );
                let tv: BigRational =
                    diffs.iter().sum::<BigRational>() / BigRational::from_integer(2.into());
                Some(Comparison {
                    max_diff: Probability::Exact(max.clone()),
                    index,
                    tv_distance: Probability::Exact(tv),
                })
            }
            _ => {
                let a = self.to_f64_vec();
                let b = other.to_f64_vec();
                let diffs: Vec<f64> = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).collect();
                let (index, max) =
                    diffs
                        .iter()
                        .copied()
                        .enumerate()
                        .fold(
                            (0, diffs[0]),
                            |best, (i, d)| if d > best.1 { (i, d) } else { best },
                        );
                Some(Comparison {
                    max_diff: Probability::Float(max),
                    index,
                    tv_distance: Probability::Float(diffs.iter().sum::<f64>() / 2.0),
                })
            }
        }
    }
}

/// Entrywise comparison of two distributions over the same scope.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub max_diff: Probability,
    pub index: usize,
    pub tv_distance: Probability,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sites(labels: &[u32]) -> Vec<Site> {
        labels.iter().map(|&s| Site(s)).collect()
    }

    #[test]
    fn index_order_is_lexicographic_minus_first() {
        let d = Distribution::uniform(&sites(&[2, 3])).unwrap();
        let order: Vec<String> = (0..4).map(|i| d.configuration(i).to_string()).collect();
        assert_eq!(order, ["(-1,-1)", "(-1,+1)", "(+1,-1)", "(+1,+1)"]);
    }

    #[test]
    fn uniform_marginal_is_half_half() {
        let d = Distribution::uniform(&sites(&[1, 2])).unwrap();
        let m = d.marginal(&[Site(2)]).unwrap();
        assert_eq!(m.exact_values().unwrap(), &[r(1, 2), r(1, 2)]);
    }

    #[test]
    fn full_scope_marginal_is_identity() {
        let d = Distribution::from_weights(&sites(&[1, 2]), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.marginal(&[Site(2), Site(1)]).unwrap(), d);
    }

    #[test]
    fn marginal_rejects_unknown_and_empty() {
        let d = Distribution::uniform(&sites(&[1, 2])).unwrap();
        assert_eq!(d.marginal(&[Site(9)]), Err(Error::Scope(Site(9))));
        assert_eq!(d.marginal(&[]), Err(Error::EmptyScope));
    }

    #[test]
    fn always_true_event_is_one() {
        let d = Distribution::from_weights(&sites(&[1, 2]), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((d.event_probability(|_| true).to_f64() - 1.0).abs() < 1e-15);
        let e = Distribution::uniform(&sites(&[4])).unwrap();
        assert_eq!(
            e.event_probability(|_| true),
            Probability::Exact(BigRational::one())
        );
    }

    #[test]
    fn with_clamps_places_point_mass() {
        let d = Distribution::uniform(&sites(&[3])).unwrap();
        let ev = Evidence::new().with(Site(2), Spin::Up).unwrap();
        let lifted = d.with_clamps(&ev).unwrap();
        assert_eq!(lifted.scope(), &sites(&[2, 3]));
        assert_eq!(
            lifted.exact_values().unwrap(),
            &[r(0, 1), r(0, 1), r(1, 2), r(1, 2)]
        );
    }

    #[test]
    fn condition_renormalizes() {
        let d = Distribution::from_exact(sites(&[2, 3]), vec![r(1, 9), r(2, 9), r(2, 9), r(4, 9)]);
        let c = d.condition(Site(2), Spin::Up).unwrap();
        assert_eq!(c.scope(), &sites(&[3]));
        assert_eq!(c.exact_values().unwrap(), &[r(1, 3), r(2, 3)]);
    }

    #[test]
    fn point_mass_lands_on_its_index() {
        let c = Configuration::from_values(&sites(&[1, 2]), &[1, -1]).unwrap();
        let d = Distribution::point(&c).unwrap();
        assert_eq!(d.get(&c), Some(Probability::Exact(BigRational::one())));
        assert_eq!(d.index_of(&c), Some(2));
    }

    #[test]
    fn probability_display() {
        assert_eq!(Probability::Exact(r(8, 18)).to_string(), "4/9");
        assert_eq!(Probability::Exact(r(1, 1)).to_string(), "1");
        assert_eq!(Probability::Float(4.0 / 9.0).to_string(), "0.444444444444");
    }
}
