//! Independent brute-force references shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;

use allatonce_core::ising::{Evidence, InverseTemperature, Site, Spin, SpinGraph};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random graph on up to `max_sites` sites with random labels, edges and clamps.
pub struct RandomCase {
    pub graph: SpinGraph,
    pub evidence: Evidence,
    pub beta: InverseTemperature,
}

pub fn random_case(rng: &mut impl Rng, max_sites: usize) -> RandomCase {
    let n = rng.gen_range(1..=max_sites);
    let mut labels: Vec<u32> = (1..=(3 * max_sites as u32)).collect();
    labels.shuffle(rng);
    labels.truncate(n);
    let density = rng.gen_range(0.1..0.7);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((Site(labels[i]), Site(labels[j])));
            }
        }
    }
    let graph = SpinGraph::new(labels.iter().map(|&s| Site(s)), edges).unwrap();
    // keep at least one site free
    let clamp_count = rng.gen_range(0..n);
    let mut evidence = Evidence::new();
    for &s in labels.choose_multiple(rng, clamp_count) {
        let spin = if rng.gen_bool(0.5) {
            Spin::Up
        } else {
            Spin::Down
        };
        evidence = evidence.with(Site(s), spin).unwrap();
    }
    let beta = match rng.gen_range(0..4) {
        0 => InverseTemperature::ln_sqrt2(),
        1 => InverseTemperature::new(0.0).unwrap(),
        _ => InverseTemperature::new(rng.gen_range(0.01..1.5)).unwrap(),
    };
    RandomCase {
        graph,
        evidence,
        beta,
    }
}

/// P over free sites by direct enumeration of every total assignment.
/// Free sites ascend by label, the first one being the most significant bit.
pub fn brute_force_joint(graph: &SpinGraph, beta: f64, evidence: &Evidence) -> Vec<f64> {
    let labels: Vec<u32> = graph.sites().iter().map(|s| s.0).collect();
    let free: Vec<u32> = labels
        .iter()
        .copied()
        .filter(|&s| evidence.get(Site(s)).is_none())
        .collect();
    let mut weights = vec![0.0; 1 << free.len()];
    for code in 0u64..(1u64 << labels.len()) {
        let spins: HashMap<u32, i64> = labels
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, if (code >> i) & 1 == 1 { 1 } else { -1 }))
            .collect();
        let consistent = evidence.iter().all(|(s, v)| spins[&s.0] == v.value());
        if !consistent {
            continue;
        }
        let h: i64 = -graph
            .edges()
            .iter()
            .map(|(a, b)| spins[&a.0] * spins[&b.0])
            .sum::<i64>();
        let index = free
            .iter()
            .fold(0usize, |acc, s| (acc << 1) | (spins[s] == 1) as usize);
        weights[index] += (-beta * h as f64).exp();
    }
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Closed form S(θ, γ) = sinh γ / (2γ (cosh γ − cos θ)), with the
/// denominator written as 2 sinh²(γ/2) + 2 sin²(θ/2) to avoid cancellation.
/// Only trusted after `closed_form_matches_partial_sums` in the retro_spin suite.
pub fn wrapped_closed_form(theta: f64, gamma: f64) -> f64 {
    let gap = 2.0 * (gamma / 2.0).sinh().powi(2) + 2.0 * (theta / 2.0).sin().powi(2);
    gamma.sinh() / (2.0 * gamma * gap)
}

/// Two or three random geometries over shared sites 1..=3 or 1..=4, with site 1 clamped.
pub fn random_ensemble(rng: &mut impl Rng) -> allatonce_core::knowledge::GeometryEnsemble {
    use std::collections::BTreeMap;
    let core = rng.gen_range(3..=4u32);
    let shared: Vec<Site> = (1..=core).map(Site).collect();
    let evidence = Evidence::new()
        .with(
            Site(1),
            if rng.gen_bool(0.5) {
                Spin::Up
            } else {
                Spin::Down
            },
        )
        .unwrap();
    let count = rng.gen_range(2..=3);
    let mut geometries = BTreeMap::new();
    for g in 0..count {
        let extra = rng.gen_range(0..=3u32);
        let labels: Vec<u32> = (1..=core + extra).collect();
        let mut edges = Vec::new();
        for (i, &a) in labels.iter().enumerate() {
            for &b in &labels[i + 1..] {
                if rng.gen_bool(0.5) {
                    edges.push((Site(a), Site(b)));
                }
            }
        }
        let graph = SpinGraph::new(labels.iter().map(|&s| Site(s)), edges).unwrap();
        geometries.insert(format!("g{g}"), graph);
    }
    allatonce_core::knowledge::GeometryEnsemble::new(geometries, shared[1..].to_vec(), evidence)
        .unwrap()
}
