//! Graph and ensemble documents (TOML), and the CSV / structured-text
//! renderings of distributions, audits and scans.
//!
//! Graph document:
//!
//! ```toml
//! sites = [1, 2, 3]
//! edges = [[1, 2], [1, 3]]
//! clamps = { 1 = 1 }      # optional, site -> ±1
//! beta = "ln_sqrt2"       # optional, "ln_sqrt2" or a decimal
//! ticks = { 1 = 0, 2 = 1, 3 = 1 }   # optional time coordinates
//! ```
//!
//! Ensemble document:
//!
//! ```toml
//! shared_subsystem = [2, 3]
//! shared_evidence = { 1 = 1 }
//! beta = "ln_sqrt2"
//! [geometries.1a]
//! sites = [1, 2, 3]
//! edges = [[1, 2], [1, 3]]
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::ising::{AxisTag, Distribution, Evidence, InverseTemperature, Site, Spin, SpinGraph};
use crate::knowledge::{AuditReport, GeometryEnsemble};
use crate::retro_spin::BornDeviation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    /// Syntax or schema error; the message carries line and column.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {source}")]
    Invalid {
        field: String,
        #[source]
        source: Error,
    },
}

fn invalid(field: impl Into<String>) -> impl FnOnce(Error) -> DocumentError {
    let field = field.into();
    move |source| DocumentError::Invalid { field, source }
}

/// `beta` field: the literal `"ln_sqrt2"`, a decimal string, or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Number(f64),
    Text(String),
}

impl BetaSpec {
    pub fn resolve(&self) -> Result<InverseTemperature, Error> {
        match self {
            BetaSpec::Number(x) => InverseTemperature::new(*x),
            BetaSpec::Text(s) if s == "ln_sqrt2" => Ok(InverseTemperature::ln_sqrt2()),
            BetaSpec::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidBeta(f64::NAN))
                .and_then(InverseTemperature::new),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub sites: Vec<u32>,
    pub edges: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamps: Option<BTreeMap<String, i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ticks: Option<BTreeMap<String, i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    pub geometries: BTreeMap<String, GraphDocument>,
    pub shared_subsystem: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_evidence: Option<BTreeMap<String, i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSpec>,
}

/// A validated graph document.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub graph: SpinGraph,
    pub evidence: Evidence,
    pub beta: InverseTemperature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub ensemble: GeometryEnsemble,
    pub beta: InverseTemperature,
}

fn parse_site(key: &str, field: &str) -> Result<Site, DocumentError> {
    key.trim()
        .parse::<u32>()
        .map(Site)
        .map_err(|_| DocumentError::Parse(format!("`{field}`: `{key}` is not a site label")))
}

fn parse_clamps(map: &BTreeMap<String, i64>, field: &str) -> Result<Evidence, DocumentError> {
    let mut evidence = Evidence::new();
    for (key, &value) in map {
        let site = parse_site(key, field)?;
        let spin = Spin::from_value(value).ok_or_else(|| {
            DocumentError::Parse(format!(
                "`{field}`: site {site} clamped to {value}, expected 1 or -1"
            ))
        })?;
        evidence = evidence.with(site, spin).map_err(invalid(field))?;
    }
    Ok(evidence)
}

impl GraphDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        toml::from_str(text).map_err(|e| DocumentError::Parse(e.to_string()))
    }

    pub fn from_graph(graph: &SpinGraph, evidence: &Evidence, beta: Option<BetaSpec>) -> Self {
        let ticks = graph.axis_tags().map(|tags| {
            tags.iter()
                .filter_map(|(s, t)| match t {
                    AxisTag::Time(t) => Some((s.to_string(), *t)),
                    AxisTag::Space(_) => None,
                })
                .collect()
        });
        GraphDocument {
            sites: graph.sites().iter().map(|s| s.0).collect(),
            edges: graph.edges().iter().map(|&(a, b)| [a.0, b.0]).collect(),
            clamps: (!evidence.is_empty()).then(|| {
                evidence
                    .iter()
                    .map(|(s, v)| (s.to_string(), v.value()))
                    .collect()
            }),
            beta,
            ticks,
        }
    }

    /// Builds the graph, prefixing field names in diagnostics with `path`.
    fn build_graph(&self, path: &str) -> Result<SpinGraph, DocumentError> {
        let edges_field = format!("{path}edges");
        let graph = SpinGraph::new(
            self.sites.iter().map(|&s| Site(s)),
            self.edges.iter().map(|&[a, b]| (Site(a), Site(b))),
        )
        .map_err(|e| match e {
            Error::EmptyGraph | Error::DuplicateSite(_) => invalid(format!("{path}sites"))(e),
            other => invalid(edges_field)(other),
        })?;
        match &self.ticks {
            None => Ok(graph),
            Some(ticks) => {
                let field = format!("{path}ticks");
                let mut tags = BTreeMap::new();
                for (key, &t) in ticks {
                    tags.insert(parse_site(key, &field)?, AxisTag::Time(t));
                }
                graph.with_axis_tags(tags).map_err(invalid(field))
            }
        }
    }

    pub fn validate(&self) -> Result<GraphSpec, DocumentError> {
        let graph = self.build_graph("")?;
        let evidence = match &self.clamps {
            Some(map) => parse_clamps(map, "clamps")?,
            None => Evidence::new(),
        };
        graph.check_evidence(&evidence).map_err(invalid("clamps"))?;
        let beta = match &self.beta {
            Some(spec) => spec.resolve().map_err(invalid("beta"))?,
            None => InverseTemperature::default(),
        };
        Ok(GraphSpec {
            graph,
            evidence,
            beta,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("graph documents serialize")
    }
}

impl EnsembleDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        toml::from_str(text).map_err(|e| DocumentError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<EnsembleSpec, DocumentError> {
        let mut geometries = BTreeMap::new();
        for (label, doc) in &self.geometries {
            let path = format!("geometries.{label}.");
            if doc.clamps.is_some() || doc.beta.is_some() {
                return Err(DocumentError::Parse(format!(
                    "`{path}clamps`/`{path}beta`: member graphs take clamps and beta from the ensemble"
                )));
            }
            geometries.insert(label.clone(), doc.build_graph(&path)?);
        }
        let evidence = match &self.shared_evidence {
            Some(map) => parse_clamps(map, "shared_evidence")?,
            None => Evidence::new(),
        };
        let ensemble = GeometryEnsemble::new(
            geometries,
            self.shared_subsystem.iter().map(|&s| Site(s)).collect(),
            evidence,
        )
        .map_err(invalid("geometries"))?;
        let beta = match &self.beta {
            Some(spec) => spec.resolve().map_err(invalid("beta"))?,
            None => InverseTemperature::default(),
        };
        Ok(EnsembleSpec { ensemble, beta })
    }
}

/// Formats with 12 significant digits, plain decimal where reasonable.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-6..=15).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

/// `config,probability` rows in enumeration order.
pub fn distribution_csv(dist: &Distribution) -> String {
    let mut w = csv_writer();
    w.write_record(["config", "probability"]).unwrap();
    for (config, p) in dist.iter() {
        w.write_record([config.to_string(), format_sig12(p.to_f64())])
            .unwrap();
    }
    csv_finish(w)
}

#[derive(Serialize)]
struct DistributionText {
    scope: Vec<u32>,
    exact: bool,
    entries: Vec<EntryText>,
}

#[derive(Serialize)]
struct EntryText {
    config: String,
    probability: String,
}

/// TOML rendering; probabilities are `p/q` strings in exact mode.
pub fn distribution_text(dist: &Distribution) -> String {
    let doc = DistributionText {
        scope: dist.scope().iter().map(|s| s.0).collect(),
        exact: dist.is_exact(),
        entries: dist
            .iter()
            .map(|(c, p)| EntryText {
                config: c.to_string(),
                probability: p.to_string(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("distribution serializes")
}

/// `labelA,labelB,max_diff,tv_distance,entry`, one record per pair.
pub fn audit_csv(report: &AuditReport) -> String {
    let mut w = csv_writer();
    w.write_record(["labelA", "labelB", "max_diff", "tv_distance", "entry"])
        .unwrap();
    for pair in &report.pairs {
        w.write_record([
            pair.label_a.clone(),
            pair.label_b.clone(),
            format_sig12(pair.max_diff.to_f64()),
            format_sig12(pair.tv_distance.to_f64()),
            pair.entry.to_string(),
        ])
        .unwrap();
    }
    csv_finish(w)
}

#[derive(Serialize)]
struct AuditText {
    geometry_dependent: bool,
    max_diff: String,
    max_pair: [String; 2],
    max_entry: String,
    pairs: Vec<PairText>,
}

#[derive(Serialize)]
struct PairText {
    label_a: String,
    label_b: String,
    max_diff: String,
    tv_distance: String,
    entry: String,
}

pub fn audit_text(report: &AuditReport) -> String {
    let worst = report.worst();
    let doc = AuditText {
        geometry_dependent: report.geometry_dependent,
        max_diff: report.max_diff.to_string(),
        max_pair: [worst.label_a.clone(), worst.label_b.clone()],
        max_entry: worst.entry.to_string(),
        pairs: report
            .pairs
            .iter()
            .map(|p| PairText {
                label_a: p.label_a.clone(),
                label_b: p.label_b.clone(),
                max_diff: p.max_diff.to_string(),
                tv_distance: p.tv_distance.to_string(),
                entry: p.entry.to_string(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("audit serializes")
}

/// `theta,gamma,value` with the deviation as value.
pub fn born_scan_csv(rows: &[BornDeviation]) -> String {
    let mut w = csv_writer();
    w.write_record(["theta", "gamma", "value"]).unwrap();
    for r in rows {
        w.write_record([
            format_sig12(r.theta),
            format_sig12(r.gamma),
            format_sig12(r.deviation),
        ])
        .unwrap();
    }
    csv_finish(w)
}

/// One CHSH evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshRow {
    pub angles: crate::retro_spin::ChshAngles,
    pub gamma: f64,
    pub chsh: f64,
}

/// `a,a_prime,b,b_prime,gamma,chsh,bell_violating`.
pub fn chsh_csv(rows: &[ChshRow]) -> String {
    let mut w = csv_writer();
    w.write_record([
        "a",
        "a_prime",
        "b",
        "b_prime",
        "gamma",
        "chsh",
        "bell_violating",
    ])
    .unwrap();
    for r in rows {
        w.write_record([
            format_sig12(r.angles.a),
            format_sig12(r.angles.a_prime),
            format_sig12(r.angles.b),
            format_sig12(r.angles.b_prime),
            format_sig12(r.gamma),
            format_sig12(r.chsh),
            (r.chsh > 2.0).to_string(),
        ])
        .unwrap();
    }
    csv_finish(w)
}
