//! Built-in fixtures: the two three/four-site geometries sharing the
//! subsystem (σ₂, σ₃) with σ₁ = +1 known.

use std::collections::BTreeMap;

use crate::ising::{Evidence, Site, Spin, SpinGraph};
use crate::knowledge::GeometryEnsemble;

pub const FIG1A: &str = "1a";
pub const FIG1B: &str = "1b";

/// σ₁ bonded to σ₂ and σ₃.
pub fn fig1a() -> SpinGraph {
    SpinGraph::from_labels(&[1, 2, 3], &[(1, 2), (1, 3)]).expect("static graph")
}

/// The square σ₁–σ₂–σ₄–σ₃–σ₁.
pub fn fig1b() -> SpinGraph {
    SpinGraph::from_labels(&[1, 2, 3, 4], &[(1, 2), (1, 3), (2, 4), (3, 4)]).expect("static graph")
}

pub fn fig1_evidence() -> Evidence {
    Evidence::new()
        .with(Site(1), Spin::Up)
        .expect("single clamp")
}

pub fn fig1_subsystem() -> Vec<Site> {
    vec![Site(2), Site(3)]
}

pub fn fig1_ensemble() -> GeometryEnsemble {
    GeometryEnsemble::new(
        BTreeMap::from([(FIG1A.to_string(), fig1a()), (FIG1B.to_string(), fig1b())]),
        fig1_subsystem(),
        fig1_evidence(),
    )
    .expect("static ensemble")
}
