//! (μ/μ_w, λ)-CMA-ES with cumulative step-size adaptation and combined
//! rank-one / rank-μ covariance updates, following the standard tutorial
//! parameter settings.
//!
//! Runs are deterministic for a given seed and stream: candidates are drawn
//! sequentially from one ChaCha stream, evaluated (optionally in parallel),
//! and paired with their results by index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaConfig {
    /// λ; `None` selects 4 + ⌊3 ln d⌋.
    pub population: Option<usize>,
    pub sigma0: f64,
    pub max_generations: usize,
    /// Stop once best values over the recent window, and the current
    /// population's values, span less than this.
    pub tol_fun: f64,
    /// Stop once the search distribution's largest coordinate spread falls
    /// below this.
    pub tol_x: f64,
    pub seed: u64,
    /// Independent random stream under the same seed (used for multi-start).
    pub stream: u64,
    /// Redraws allowed per candidate whose objective is not finite.
    pub max_resamples: usize,
    pub parallel: bool,
}

impl Default for CmaConfig {
    fn default() -> Self {
        Self {
            population: None,
            sigma0: 0.5,
            max_generations: 3000,
            tol_fun: 1e-9,
            tol_x: 1e-11,
            seed: 0,
            stream: 0,
            max_resamples: 100,
            parallel: true,
        }
    }
}

impl CmaConfig {
    pub fn population_for(&self, dim: usize) -> usize {
        self.population.unwrap_or(4 + (3.0 * (dim as f64).ln()).floor() as usize)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Usage("CMA-ES needs at least one dimension".into()));
        }
        if self.population_for(dim) < 2 {
            return Err(Error::Config("CMA-ES population must be at least 2".into()));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxGenerations,
    TolFun,
    TolX,
    ConditionNumber,
}

/// One generation of the optimizer trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub generation: usize,
    /// Best value among this generation's candidates.
    pub generation_best: f64,
    pub best_so_far: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub final_mean: Vec<f64>,
    pub final_sigma: f64,
    pub generations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

struct Strategy {
    n: usize,
    lambda: usize,
    weights: Vec<f64>,
    mueff: f64,
    cs: f64,
    ds: f64,
    cc: f64,
    c1: f64,
    cmu: f64,
    chi_n: f64,
}

impl Strategy {
    fn new(n: usize, lambda: usize) -> Self {
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let ds = 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self { n, lambda, weights, mueff, cs, ds, cc, c1, cmu, chi_n }
    }
}

/// Minimizes `objective` starting from mean `x0`. Non-finite objective values
/// are treated as +∞ and the candidate is redrawn.
pub fn cma_es<F>(objective: F, x0: &[f64], config: &CmaConfig) -> Result<CmaOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    config.validate(n)?;
    let st = Strategy::new(n, config.population_for(n));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);

    let mut mean = DVector::from_column_slice(x0);
    let mut sigma = config.sigma0;
    let mut cov = DMatrix::<f64>::identity(n, n);
    let mut basis = DMatrix::<f64>::identity(n, n);
    let mut scales = DVector::<f64>::from_element(n, 1.0);
    let mut ps = DVector::<f64>::zeros(n);
    let mut pc = DVector::<f64>::zeros(n);

    let eval = |x: &DVector<f64>| {
        let v = objective(x.as_slice());
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    // the starting mean itself competes for best
    let mut best = x0.to_vec();
    let mut best_value = eval(&mean);
    let mut trace = Vec::new();
    let mut evaluations = 1;
    let mut history: Vec<f64> = Vec::new();
    let window = 10 + (30.0 * n as f64 / st.lambda as f64).ceil() as usize;
    let mut termination = Termination::MaxGenerations;

    let mut generations = 0;
    for generation in 0..config.max_generations {
        generations = generation + 1;
        let draw = |rng: &mut ChaCha8Rng| {
            let z = DVector::<f64>::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
            let y = &basis * z.component_mul(&scales);
            let x = &mean + sigma * &y;
            (y, x)
        };
        let mut ys = Vec::with_capacity(st.lambda);
        let mut xs = Vec::with_capacity(st.lambda);
        for _ in 0..st.lambda {
            let (y, x) = draw(&mut rng);
            ys.push(y);
            xs.push(x);
        }
        let mut values: Vec<f64> = if config.parallel {
            xs.par_iter().map(&eval).collect()
        } else {
            xs.iter().map(&eval).collect()
        };
        evaluations += st.lambda;
        for k in 0..st.lambda {
            let mut retries = 0;
            while values[k].is_infinite() {
                if retries == config.max_resamples {
                    return Err(Error::Optimization(format!(
                        "objective not finite after {retries} redraws at generation {generation}"
                    )));
                }
                let (y, x) = draw(&mut rng);
                values[k] = eval(&x);
                ys[k] = y;
                xs[k] = x;
                evaluations += 1;
                retries += 1;
            }
        }

        let mut order: Vec<usize> = (0..st.lambda).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let gen_best = values[order[0]];
        if gen_best < best_value {
            best_value = gen_best;
            best = xs[order[0]].as_slice().to_vec();
        }

        let mut y_w = DVector::<f64>::zeros(n);
        for (w, &k) in st.weights.iter().zip(&order) {
            y_w.axpy(*w, &ys[k], 1.0);
        }
        mean.axpy(sigma, &y_w, 1.0);

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let inv_sqrt_y = &basis * (basis.transpose() * &y_w).component_div(&scales);
        ps = (1.0 - st.cs) * &ps + (st.cs * (2.0 - st.cs) * st.mueff).sqrt() * inv_sqrt_y;
        let ps_norm = ps.norm();
        let decay = 1.0 - (1.0 - st.cs).powi(2 * (generation as i32 + 1));
        let hsig = ps_norm / decay.sqrt() / st.chi_n < 1.4 + 2.0 / (st.n as f64 + 1.0);
        let hsig_f = if hsig { 1.0 } else { 0.0 };
        pc = (1.0 - st.cc) * &pc + hsig_f * (st.cc * (2.0 - st.cc) * st.mueff).sqrt() * &y_w;

        let mut rank_mu = DMatrix::<f64>::zeros(n, n);
        for (w, &k) in st.weights.iter().zip(&order) {
            rank_mu.ger(*w, &ys[k], &ys[k], 1.0);
        }
        let delta = (1.0 - hsig_f) * st.cc * (2.0 - st.cc);
        cov = (1.0 - st.c1 - st.cmu + st.c1 * delta) * &cov + st.c1 * (&pc * pc.transpose()) + st.cmu * rank_mu;
        cov = 0.5 * (&cov + cov.transpose());

        sigma *= ((st.cs / st.ds) * (ps_norm / st.chi_n - 1.0)).exp();

        let eig = SymmetricEigen::new(cov.clone());
        basis = eig.eigenvectors;
        scales = eig.eigenvalues.map(|e| e.max(1e-300).sqrt());

        trace.push(TraceEntry { generation, generation_best: gen_best, best_so_far: best_value, sigma });

        history.push(gen_best);
        if history.len() >= window {
            let recent = &history[history.len() - window..];
            let hi = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = recent.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = values[order[st.lambda - 1]] - values[order[0]];
            if hi - lo <= config.tol_fun && spread <= config.tol_fun {
                termination = Termination::TolFun;
                break;
            }
        }
        let max_sd = (0..n).map(|i| cov[(i, i)].sqrt()).fold(0.0, f64::max);
        if sigma * max_sd < config.tol_x {
            termination = Termination::TolX;
            break;
        }
        let max_s = scales.max();
        let min_s = scales.min();
        if (max_s / min_s).powi(2) > 1e14 {
            termination = Termination::ConditionNumber;
            break;
        }
    }

    Ok(CmaOutcome {
        best,
        best_value,
        final_mean: mean.as_slice().to_vec(),
        final_sigma: sigma,
        generations,
        evaluations,
        termination,
        trace,
    })
}
