//! Named experiments. Every experiment resolves its settings from
//! [`Params`] (defaults fill the gaps) and returns an [`Outcome`].

use std::fmt;

use anyhow::Result;

use crate::config::{ExperimentConfig, Params};
use crate::report::Outcome;

pub mod conditional;
pub mod convergence;
pub mod generator;
pub mod hoogenboom;
pub mod pitman;
pub mod spherical;
pub mod supq;
pub mod toda;
pub mod trees;

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    /// CSV files written and their columns (provenance columns omitted).
    pub csv: &'static str,
    pub run: fn(&Params) -> Result<Outcome>,
}

impl fmt::Debug for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Experiment").field("name", &self.name).finish()
    }
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "my-convergence",
        summary: "shared-noise convergence of d(o,S_t) - log q to log eta_t on hyperbolic space",
        csv: "errors.csv: replica, q, err",
        run: convergence::run,
    },
    Experiment {
        name: "my-generator",
        summary: "E[eta_T], generator test for log eta, Markov tests for mu = 1, 2, 3",
        csv: "generator.csv: test, z, estimate, se | markov.csv: mu, bin, ks",
        run: generator::run,
    },
    Experiment {
        name: "conditional-law",
        summary: "E[exp(lambda B_t) | eta] = K_lambda(1/eta)/K_0(1/eta) and the drifted generator",
        csv: "conditional.csv: lambda, test_fn, z, estimate, se",
        run: conditional::run,
    },
    Experiment {
        name: "pitman-discrete",
        summary: "exact law of 2M_n - S_n against the discrete Bessel(3) chain",
        csv: "laws.csv: n, value, probability, probability_f64",
        run: pitman::run,
    },
    Experiment {
        name: "tree-samelaw",
        summary: "graph-chain distance law vs ground-state radial chain on T_q; kernel convergence rate",
        csv: "samelaw.csv: q, n, value, probability | kernel_gap.csv: q, gap, ratio_to_4q",
        run: trees::run,
    },
    Experiment {
        name: "supq-limit",
        summary: "SU(p,q) and SO(p,q) solvable-model limits as q grows",
        csv: "matrix_errors.csv: replica, q, component, rel_err | theta.csv: field, theta | invariant.csv: replica, n_steps, defect",
        run: supq::run,
    },
    Experiment {
        name: "spherical-limit",
        summary: "decay of g_q and of its second lambda-derivative at 0 for SU(1,q)",
        csv: "gq.csv: q, lambda, r, g_q, d2_at_zero",
        run: spherical::run,
    },
    Experiment {
        name: "toda-identity",
        summary: "Gamma-weighted Toda series combination equals K_lambda(e^-r)",
        csv: "toda.csv: lambda, r, combination, macdonald, abs_err",
        run: toda::run,
    },
    Experiment {
        name: "hoogenboom-det",
        summary: "normalized det N_(p,q) against the K-tilde determinant",
        csv: "det.csv: q, ratio, target, abs_err",
        run: hoogenboom::run,
    },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownExperiment(pub String);

impl fmt::Display for UnknownExperiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown experiment '{}' (try list-experiments)", self.0)
    }
}

impl std::error::Error for UnknownExperiment {}

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    let e = find(&config.experiment).ok_or_else(|| UnknownExperiment(config.experiment.clone()))?;
    (e.run)(&config.params)
}

/// Strictly decreasing sequence.
pub(crate) fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}
