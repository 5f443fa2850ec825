//! Labelled displacement ensembles and the forward classification pipeline.

pub mod noise;
pub mod pipeline;

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analytics::standard_normal_rule;
use crate::{Error, Result};

pub use noise::{Generator, NoiseModel};
pub use pipeline::{
    classification_prob, error_probability, noisy_error_probability, output_state, Branch, Evaluation,
    Pipeline,
};

fn default_atoms() -> usize {
    32
}

fn default_nodes() -> usize {
    7
}

fn default_aspect() -> f64 {
    1.0
}

fn default_delta_phi() -> f64 {
    FRAC_PI_2
}

/// Parametric task families. Amplitudes are in displacement units, so a
/// data coordinate `x` displaces `⟨q̂⟩` by `√2 x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Class 0 at `−ε`, class 1 at `+ε` along `Re α`.
    BinaryPmEpsilon { epsilon: f64 },
    /// Isotropic Gaussians of variance `δ²` per axis centred at `(∓ε, 0)`.
    GaussianClusters {
        epsilon: f64,
        delta: f64,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    /// Class 0 at the origin, class 1 uniform on the circle `|α| = ε`.
    CircleVsVacuum {
        epsilon: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
    /// Two real quadratures `x₁ = A₁ cos φ`, `x₂ = A₂ cos(φ + Δφ)` on two
    /// modes with `A₁ = ε`, `A₂ = aspect · ε`; class 0 at the origin.
    RfCircle2d {
        epsilon: f64,
        #[serde(default = "default_aspect")]
        aspect: f64,
        #[serde(default = "default_delta_phi")]
        delta_phi: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
}

impl TaskSpec {
    pub fn epsilon(&self) -> f64 {
        match *self {
            TaskSpec::BinaryPmEpsilon { epsilon }
            | TaskSpec::GaussianClusters { epsilon, .. }
            | TaskSpec::CircleVsVacuum { epsilon, .. }
            | TaskSpec::RfCircle2d { epsilon, .. } => epsilon,
        }
    }

    pub fn with_epsilon(&self, eps: f64) -> TaskSpec {
        let mut t = self.clone();
        match &mut t {
            TaskSpec::BinaryPmEpsilon { epsilon }
            | TaskSpec::GaussianClusters { epsilon, .. }
            | TaskSpec::CircleVsVacuum { epsilon, .. }
            | TaskSpec::RfCircle2d { epsilon, .. } => *epsilon = eps,
        }
        t
    }

    /// Same family discretised with `k` atoms (circle families only).
    pub fn with_atoms(&self, k: usize) -> TaskSpec {
        let mut t = self.clone();
        match &mut t {
            TaskSpec::CircleVsVacuum { atoms, .. } | TaskSpec::RfCircle2d { atoms, .. } => *atoms = k,
            _ => {}
        }
        t
    }

    pub fn modes(&self) -> usize {
        match self {
            TaskSpec::RfCircle2d { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.epsilon();
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::Config(format!("epsilon must be finite and ≥ 0, got {eps}")));
        }
        match *self {
            TaskSpec::GaussianClusters { delta, nodes, .. } => {
                if !delta.is_finite() || delta < 0.0 {
                    return Err(Error::Config(format!("delta must be ≥ 0, got {delta}")));
                }
                if nodes == 0 {
                    return Err(Error::Config("gaussian-clusters needs at least one node".into()));
                }
            }
            TaskSpec::CircleVsVacuum { atoms, .. } | TaskSpec::RfCircle2d { atoms, .. } if atoms < 4 => {
                return Err(Error::Config(format!("circle tasks need at least 4 atoms, got {atoms}")));
            }
            TaskSpec::RfCircle2d { aspect, delta_phi, .. } if !aspect.is_finite() || !delta_phi.is_finite() => {
                return Err(Error::Config("rf-circle-2d parameters must be finite".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// Draws one labelled displacement from the continuous family.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let label = usize::from(rng.random::<bool>());
        let x = match *self {
            TaskSpec::BinaryPmEpsilon { epsilon } => vec![if label == 1 { epsilon } else { -epsilon }, 0.0],
            TaskSpec::GaussianClusters { epsilon, delta, .. } => {
                let mean = if label == 1 { epsilon } else { -epsilon };
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                vec![mean + delta * n.sample(rng), delta * n.sample(rng)]
            }
            TaskSpec::CircleVsVacuum { epsilon, .. } => {
                if label == 0 {
                    vec![0.0, 0.0]
                } else {
                    let phi = rng.random::<f64>() * TAU;
                    vec![epsilon * phi.cos(), epsilon * phi.sin()]
                }
            }
            TaskSpec::RfCircle2d {
                epsilon,
                aspect,
                delta_phi,
                ..
            } => {
                if label == 0 {
                    vec![0.0; 4]
                } else {
                    let phi = rng.random::<f64>() * TAU;
                    vec![epsilon * phi.cos(), 0.0, aspect * epsilon * (phi + delta_phi).cos(), 0.0]
                }
            }
        };
        (x, label)
    }
}

/// One weighted displacement vector `x ∈ ℝ^{2M}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub weight: f64,
}

/// Label-indexed discrete distribution over displacement vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDisplacementEnsemble {
    modes: usize,
    priors: Vec<f64>,
    classes: Vec<Vec<Atom>>,
}

impl LabeledDisplacementEnsemble {
    pub fn new(modes: usize, priors: Vec<f64>, classes: Vec<Vec<Atom>>) -> Result<Self> {
        if priors.len() != classes.len() || priors.len() < 2 {
            return Err(Error::Config("need one prior per class and at least two classes".into()));
        }
        if priors.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("priors {priors:?} do not form a distribution")));
        }
        for (y, atoms) in classes.iter().enumerate() {
            if atoms.is_empty() {
                return Err(Error::Config(format!("class {y} has no atoms")));
            }
            let total: f64 = atoms.iter().map(|a| a.weight).sum();
            if atoms.iter().any(|a| a.weight < 0.0) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("class {y} weights sum to {total}")));
            }
            if let Some(a) = atoms.iter().find(|a| a.x.len() != 2 * modes) {
                return Err(Error::Shape(format!(
                    "atom of length {} in a {modes}-mode ensemble",
                    a.x.len()
                )));
            }
            if atoms.iter().flat_map(|a| &a.x).any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("class {y} has a non-finite atom")));
            }
        }
        Ok(LabeledDisplacementEnsemble {
            modes,
            priors,
            classes,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn labels(&self) -> usize {
        self.classes.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn atoms(&self, label: usize) -> &[Atom] {
        &self.classes[label]
    }

    /// `(label, prior · weight, atom)` in fixed order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, &Atom)> {
        self.classes
            .iter()
            .enumerate()
            .flat_map(move |(y, atoms)| atoms.iter().map(move |a| (y, self.priors[y] * a.weight, a)))
    }

    /// Same atoms with every coordinate vector replaced by `f(x)`.
    pub fn map_atoms(&self, modes: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let classes = self
            .classes
            .iter()
            .map(|atoms| {
                atoms
                    .iter()
                    .map(|a| Atom {
                        x: f(&a.x),
                        weight: a.weight,
                    })
                    .collect()
            })
            .collect();
        LabeledDisplacementEnsemble::new(modes, self.priors.clone(), classes)
    }

    /// Draws from the discrete distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let mut u: f64 = rng.random();
        let mut chosen = (self.labels() - 1, self.classes[self.labels() - 1].len() - 1);
        'outer: for (y, atoms) in self.classes.iter().enumerate() {
            for (k, a) in atoms.iter().enumerate() {
                u -= self.priors[y] * a.weight;
                if u < 0.0 {
                    chosen = (y, k);
                    break 'outer;
                }
            }
        }
        (self.classes[chosen.0][chosen.1].x.clone(), chosen.0)
    }

    /// `label,weight,x0,x1,…` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let coords: Vec<String> = (0..2 * self.modes).map(|i| format!("x{i}")).collect();
        writeln!(out, "label,weight,{}", coords.join(","))?;
        for (y, atoms) in self.classes.iter().enumerate() {
            for a in atoms {
                let xs: Vec<String> = a.x.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{y},{},{}", a.weight, xs.join(","))?;
            }
        }
        Ok(())
    }
}

/// Deterministic discretisation of a task family with equal priors.
pub fn make_task(spec: &TaskSpec) -> Result<LabeledDisplacementEnsemble> {
    spec.validate()?;
    let point = |x: Vec<f64>| vec![Atom { x, weight: 1.0 }];
    let (modes, classes) = match *spec {
        TaskSpec::BinaryPmEpsilon { epsilon } => (1, vec![point(vec![-epsilon, 0.0]), point(vec![epsilon, 0.0])]),
        TaskSpec::GaussianClusters { epsilon, delta, nodes } => {
            let cluster = |mean: f64| -> Vec<Atom> {
                if delta == 0.0 {
                    return point(vec![mean, 0.0]);
                }
                let (z, w) = standard_normal_rule(nodes);
                let mut atoms = Vec::with_capacity(nodes * nodes);
                for i in 0..nodes {
                    for j in 0..nodes {
                        atoms.push(Atom {
                            x: vec![mean + delta * z[i], delta * z[j]],
                            weight: w[i] * w[j],
                        });
                    }
                }
                normalise(atoms)
            };
            (1, vec![cluster(-epsilon), cluster(epsilon)])
        }
        TaskSpec::CircleVsVacuum { epsilon, atoms } => {
            let ring = (0..atoms)
                .map(|k| {
                    let phi = TAU * k as f64 / atoms as f64;
                    Atom {
                        x: vec![epsilon * phi.cos(), epsilon * phi.sin()],
                        weight: 1.0 / atoms as f64,
                    }
                })
                .collect();
            (1, vec![point(vec![0.0, 0.0]), normalise(ring)])
        }
        TaskSpec::RfCircle2d {
            epsilon,
            aspect,
            delta_phi,
            atoms,
        } => {
            let ring = (0..atoms)
                .map(|k| {
                    let phi = TAU * k as f64 / atoms as f64;
                    Atom {
                        x: vec![epsilon * phi.cos(), 0.0, aspect * epsilon * (phi + delta_phi).cos(), 0.0],
                        weight: 1.0 / atoms as f64,
                    }
                })
                .collect();
            (2, vec![point(vec![0.0; 4]), normalise(ring)])
        }
    };
    LabeledDisplacementEnsemble::new(modes, vec![0.5, 0.5], classes)
}

/// Rescales weights to sum exactly to one.
fn normalise(mut atoms: Vec<Atom>) -> Vec<Atom> {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    for a in &mut atoms {
        a.weight /= total;
    }
    atoms
}
