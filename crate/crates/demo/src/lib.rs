//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exported: a single simulated training block with the
//! true and recovered angular supports of every user, a small SNR-loss sweep,
//! and a J-BIHT run that can be advanced one iteration at a time.

use onebit_csit::channel::ScenarioConfig;
use onebit_csit::evaluation::{
    run_experiment, snr_loss_db, Algorithm, Realization, Sweep, SweepParam, TrialOptions,
};
use onebit_csit::recovery::{Iteration, SupportRule};
use onebit_csit::{ComplexMatrix, Error};
use wasm_bindgen::prelude::*;

/// Scenario knobs shared by every operation. Starts at the reference
/// operating point; fields are set from JavaScript.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub s: u32,
    pub c: u32,
    pub snr_db: f64,
    pub mu: f64,
    pub max_iter: u32,
    pub trials: u32,
    /// Kept below 2^53 so JavaScript numbers carry it exactly.
    pub seed: f64,
}

#[wasm_bindgen]
impl Params {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Params {
        let cfg = ScenarioConfig::default();
        Params {
            m: cfg.m as u32,
            n: cfg.n as u32,
            k: cfg.k as u32,
            t: cfg.t as u32,
            s: cfg.s as u32,
            c: cfg.c as u32,
            snr_db: cfg.snr_db,
            mu: cfg.mu,
            max_iter: cfg.max_iter as u32,
            trials: 10,
            seed: cfg.seed as f64,
        }
    }
}

impl Default for Params {
    fn default() -> Self {
        Self::new()
    }
}

impl Params {
    fn config(&self) -> Result<ScenarioConfig, Error> {
        if !(self.seed >= 0.0 && self.seed.fract() == 0.0 && self.seed < 9.007_199_254_740_992e15) {
            return Err(Error::Config(format!(
                "seed must be a non-negative integer, got {}",
                self.seed
            )));
        }
        let cfg = ScenarioConfig {
            m: self.m as usize,
            n: self.n as usize,
            k: self.k as usize,
            t: self.t as usize,
            s: self.s as usize,
            c: self.c as usize,
            snr_db: self.snr_db,
            mu: self.mu,
            max_iter: self.max_iter as usize,
            trials: self.trials as usize,
            seed: self.seed as u64,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn js_error(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Column energies of an N×M angular matrix, scaled so the largest is 1.
fn column_energy(h_a: &ComplexMatrix) -> Vec<f64> {
    let energy: Vec<f64> = (0..h_a.cols())
        .map(|j| h_a.column(j).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let peak = energy.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        energy.into_iter().map(|e| e / peak).collect()
    } else {
        energy
    }
}

fn mask(m: usize, indices: &[usize]) -> Vec<u8> {
    let mut out = vec![0; m];
    for &j in indices {
        out[j] = 1;
    }
    out
}

/// One realization recovered by every scheme.
///
/// Per-user arrays are flattened user-major: entry `i·M + j` belongs to user
/// `i`, angle bin `j`.
#[wasm_bindgen]
pub struct TrialView {
    m: usize,
    k: usize,
    true_energy: Vec<f64>,
    true_support: Vec<u8>,
    true_common: Vec<u8>,
    estimates: Vec<Option<Recovered>>,
}

struct Recovered {
    energy: Vec<f64>,
    support: Vec<u8>,
    common: Vec<u8>,
    loss_db: Vec<f64>,
    iterations: usize,
}

impl TrialView {
    pub fn simulate(params: &Params) -> Result<TrialView, Error> {
        let cfg = params.config()?;
        let seed = cfg.seed;
        let real = Realization::draw(&cfg, seed, TrialOptions::default())?;
        let (m, k) = (cfg.m, cfg.k);
        let truth = &real.channels;
        let estimates = Algorithm::ALL
            .iter()
            .map(|&alg| {
                let r = real.recover(alg).ok()?;
                let loss_db = truth
                    .antenna
                    .iter()
                    .zip(&r.estimates)
                    .map(|(h, e)| snr_loss_db(h, e).unwrap_or(f64::NAN))
                    .collect();
                Some(Recovered {
                    energy: r.angular.iter().flat_map(column_energy).collect(),
                    support: r.supports.iter().flat_map(|s| mask(m, s)).collect(),
                    common: mask(m, &r.common_support),
                    loss_db,
                    iterations: r.iterations,
                })
            })
            .collect();
        Ok(TrialView {
            m,
            k,
            true_energy: truth.angular.iter().flat_map(column_energy).collect(),
            true_support: truth
                .supports
                .per_user
                .iter()
                .flat_map(|s| mask(m, s))
                .collect(),
            true_common: mask(m, &truth.supports.common),
            estimates,
        })
    }

    fn get(&self, algorithm: usize) -> Option<&Recovered> {
        self.estimates.get(algorithm).and_then(Option::as_ref)
    }
}

#[wasm_bindgen]
impl TrialView {
    #[wasm_bindgen(js_name = simulate)]
    pub fn simulate_js(params: &Params) -> Result<TrialView, JsError> {
        Self::simulate(params).map_err(js_error)
    }

    #[wasm_bindgen(getter)]
    pub fn m(&self) -> usize {
        self.m
    }

    #[wasm_bindgen(getter)]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Identifiers of the schemes, in the index order used below.
    pub fn algorithms() -> Vec<String> {
        Algorithm::ALL.iter().map(|a| a.id().to_string()).collect()
    }

    pub fn true_energy(&self) -> Vec<f64> {
        self.true_energy.clone()
    }

    pub fn true_support(&self) -> Vec<u8> {
        self.true_support.clone()
    }

    pub fn true_common(&self) -> Vec<u8> {
        self.true_common.clone()
    }

    /// Whether scheme `algorithm` produced an estimate.
    pub fn recovered(&self, algorithm: usize) -> bool {
        self.get(algorithm).is_some()
    }

    pub fn energy(&self, algorithm: usize) -> Vec<f64> {
        self.get(algorithm)
            .map(|r| r.energy.clone())
            .unwrap_or_default()
    }

    pub fn support(&self, algorithm: usize) -> Vec<u8> {
        self.get(algorithm)
            .map(|r| r.support.clone())
            .unwrap_or_default()
    }

    pub fn common(&self, algorithm: usize) -> Vec<u8> {
        self.get(algorithm)
            .map(|r| r.common.clone())
            .unwrap_or_default()
    }

    /// Per-user SNR loss in dB.
    pub fn loss_db(&self, algorithm: usize) -> Vec<f64> {
        self.get(algorithm)
            .map(|r| r.loss_db.clone())
            .unwrap_or_default()
    }

    pub fn iterations(&self, algorithm: usize) -> usize {
        self.get(algorithm).map_or(0, |r| r.iterations)
    }
}

/// Mean SNR loss over `params.trials` realizations at each value of `param`.
///
/// Returns `values.len() × 4` numbers, point-major, in the order of
/// [`TrialView::algorithms`]; NaN where a point is infeasible or had no
/// valid trial.
pub fn sweep(params: &Params, param: &str, values: &[f64]) -> Result<Vec<f64>, Error> {
    let cfg = params.config()?;
    let param: SweepParam = param.parse()?;
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "sweep values must be strictly increasing".into(),
        ));
    }
    let report = run_experiment(
        &cfg,
        &Sweep::new(param, values.to_vec()),
        &Algorithm::ALL,
        1,
    )?;
    Ok(report
        .points
        .iter()
        .flat_map(|p| {
            Algorithm::ALL
                .iter()
                .map(move |&a| p.get(a).map_or(f64::NAN, |s| s.mean_loss_db))
        })
        .collect())
}

#[wasm_bindgen(js_name = sweep)]
pub fn sweep_js(params: &Params, param: &str, values: Vec<f64>) -> Result<Vec<f64>, JsError> {
    sweep(params, param, &values).map_err(js_error)
}

/// J-BIHT on one realization, advanced on demand.
#[wasm_bindgen]
pub struct Stepper {
    real: Realization,
    iteration: Iteration,
}

impl Stepper {
    pub fn start(params: &Params) -> Result<Stepper, Error> {
        let cfg = params.config()?;
        let real = Realization::draw(&cfg, cfg.seed, TrialOptions::default())?;
        let iteration = Iteration::new(real.input.clone(), real.basis.clone(), SupportRule::Joint)?;
        Ok(Stepper { real, iteration })
    }

    fn user_loss(&self, i: usize) -> f64 {
        let h_a = self.iteration.estimate(i).adjoint();
        self.real
            .basis
            .to_antenna(&h_a)
            .and_then(|est| snr_loss_db(&self.real.channels.antenna[i], &est))
            .unwrap_or(f64::NAN)
    }
}

#[wasm_bindgen]
impl Stepper {
    #[wasm_bindgen(constructor)]
    pub fn new(params: &Params) -> Result<Stepper, JsError> {
        Self::start(params).map_err(js_error)
    }

    /// Runs one iteration unless already finished; returns the number of
    /// feedback entries the estimates still contradict.
    pub fn step(&mut self) -> usize {
        if !self.iteration.is_done() {
            self.iteration.step();
        }
        self.iteration.mismatches()
    }

    pub fn done(&self) -> bool {
        self.iteration.is_done()
    }

    pub fn iterations(&self) -> usize {
        self.iteration.iterations()
    }

    pub fn mismatches(&self) -> usize {
        self.iteration.mismatches()
    }

    pub fn mismatch_history(&self) -> Vec<u32> {
        self.iteration
            .mismatch_history()
            .iter()
            .map(|&v| v as u32)
            .collect()
    }

    #[wasm_bindgen(getter)]
    pub fn m(&self) -> usize {
        self.real.basis.m()
    }

    #[wasm_bindgen(getter)]
    pub fn k(&self) -> usize {
        self.real.channels.angular.len()
    }

    /// Current angular column energies, user-major.
    pub fn energy(&self) -> Vec<f64> {
        (0..self.k())
            .flat_map(|i| column_energy(&self.iteration.estimate(i).adjoint()))
            .collect()
    }

    pub fn support(&self) -> Vec<u8> {
        let m = self.m();
        (0..self.k())
            .flat_map(|i| mask(m, self.iteration.support(i)))
            .collect()
    }

    pub fn common(&self) -> Vec<u8> {
        mask(self.m(), self.iteration.common_support())
    }

    pub fn true_support(&self) -> Vec<u8> {
        let m = self.m();
        self.real
            .channels
            .supports
            .per_user
            .iter()
            .flat_map(|s| mask(m, s))
            .collect()
    }

    /// Per-user SNR loss in dB of the current estimates.
    pub fn loss_db(&self) -> Vec<f64> {
        (0..self.k()).map(|i| self.user_loss(i)).collect()
    }
}
