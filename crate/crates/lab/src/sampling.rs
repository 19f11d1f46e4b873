//! Replica generators shared by the Brownian-functional experiments.

use yorlab_core::paths::{log_exponential_functional, sample_bm, Noise, TimeGrid};
use yorlab_core::RngStream;

const PATH_TAG: u64 = 1;
const EXTENSION_TAG: u64 = 2;

/// One replica of `B` (with drift) and its exponential functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MyReplica {
    pub b_end: f64,
    /// `log η_T`.
    pub log_eta: f64,
    /// `log η_{T+h}`, continued on `substeps` finer steps.
    pub log_eta_h: f64,
    /// `∫_0^t e^{μB_s − B_t} ds` for `μ = 1, 2, 3` at `t = T/4, T/2, T`.
    pub markov: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MySampler {
    pub grid: TimeGrid,
    pub drift: f64,
    pub h: f64,
    pub substeps: usize,
    pub markov: bool,
}

impl MySampler {
    pub fn sample(&self, stream: RngStream) -> MyReplica {
        let b = sample_bm(self.grid, self.drift, Noise::Gaussian(stream.child(PATH_TAG, 0)));
        let le = log_exponential_functional(&b, 2.0);
        let n = self.grid.n_steps();
        let b_end = b.last();
        let log_eta = le[n];

        // η_{T+h} = e^{−B_{T+h}}(A_T + ∫_T^{T+h} e^{2B}), with A_T = e^{B_T}η_T
        let mut log_a = log_eta + b_end;
        let mut bb = b_end;
        let mut z = stream.child(EXTENSION_TAG, 0).normals();
        let dt = self.h / self.substeps as f64;
        let sd = dt.sqrt();
        for _ in 0..self.substeps {
            let nb = bb + self.drift * dt + sd * z.next();
            let inc = 0.5 * dt * ((2.0 * bb - log_a).exp() + (2.0 * nb - log_a).exp());
            log_a += inc.ln_1p();
            bb = nb;
        }

        let markov = self.markov.then(|| {
            let idx = [self.grid.index_of(0.25 * self.grid.horizon()), self.grid.index_of(0.5 * self.grid.horizon()), n];
            let mut out = [[0.0; 3]; 3];
            for (m, mu) in [1.0, 2.0, 3.0].into_iter().enumerate() {
                let l = if mu == 2.0 { le.clone() } else { log_exponential_functional(&b, mu) };
                for (j, &k) in idx.iter().enumerate() {
                    out[m][j] = l[k].exp();
                }
            }
            out
        });
        MyReplica { b_end, log_eta, log_eta_h: log_a - bb, markov }
    }
}
