//! Beamforming-gain evaluation and the Monte Carlo experiment harness.
//!
//! The quality of an estimate `H̃` of a channel `H` is the loss in output SNR
//! when beamforming with the dominant right singular vector of `H̃` instead
//! of that of `H`:
//!
//! `loss = 10·log10( wᴴHᴴHw / w̃ᴴHᴴHw̃ )`.

use std::fmt;
use std::str::FromStr;

use crate::airlink::{design_pilots_with, downlink_receive, receiver_feedback_with, PilotMatrix};
use crate::channel::{draw_channels_with, draw_supports, AngularBasis, ChannelSet, ScenarioConfig};
use crate::error::{Error, Result};
use crate::numerics::{top_eigvec, ComplexMatrix, RandomSource, C64, EIG_MAX_ITER, EIG_TOL};
use crate::recovery::{
    biht_all, genie_ls_with, jbiht, jbiht_known_support, preprocess, RecoveryInput, RecoveryResult,
};

/// The four recovery schemes compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Per-user BIHT.
    Biht,
    /// Joint BIHT with estimated supports.
    Jbiht,
    /// Joint BIHT iteration thresholded to the true supports.
    JbihtOracle,
    /// Least squares on true supports from unquantized feedback.
    GenieLs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Biht,
        Algorithm::Jbiht,
        Algorithm::JbihtOracle,
        Algorithm::GenieLs,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Biht => "biht",
            Algorithm::Jbiht => "jbiht",
            Algorithm::JbihtOracle => "jbiht-oracle",
            Algorithm::GenieLs => "genie-ls",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

fn dominant_direction(h: &ComplexMatrix) -> Result<Vec<C64>> {
    if h.frobenius_norm() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    // Work with the N×N Gram matrix H·Hᴴ and lift back through Hᴴ.
    let gram = h.matmul(&h.adjoint())?;
    let u = top_eigvec(&gram, EIG_TOL, EIG_MAX_ITER)?.vector;
    let lifted = h.adjoint().matmul(&ComplexMatrix::column_vector(&u))?;
    let norm = lifted.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    Ok(lifted.as_slice().iter().map(|z| z / norm).collect())
}

/// Unit-norm eigen-beamformer: the dominant eigenvector of `HᴴH`.
pub fn optimal_precoder(h: &ComplexMatrix) -> Result<Vec<C64>> {
    dominant_direction(h)
}

/// `‖H·w‖² = wᴴHᴴHw`.
pub fn beam_gain(h: &ComplexMatrix, w: &[C64]) -> Result<f64> {
    let hw = h.matmul(&ComplexMatrix::column_vector(w))?;
    Ok(hw.frobenius_norm_sqr())
}

/// Output SNR loss in dB from beamforming with the estimate's precoder.
///
/// Returns `f64::INFINITY` when the estimated beam falls in the null space of
/// the true channel.
pub fn snr_loss_db(h_true: &ComplexMatrix, h_est: &ComplexMatrix) -> Result<f64> {
    if h_true.shape() != h_est.shape() {
        return Err(Error::InvalidDimension(format!(
            "true channel {:?} vs estimate {:?}",
            h_true.shape(),
            h_est.shape()
        )));
    }
    let w = optimal_precoder(h_true)?;
    let w_est = optimal_precoder(h_est)?;
    let best = beam_gain(h_true, &w)?;
    let got = beam_gain(h_true, &w_est)?;
    if got <= best * 1e-30 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (best / got).log10())
}

/// One algorithm's result on one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOutcome {
    pub algorithm: Algorithm,
    /// Per-user loss in dB; may contain `+∞`. Empty when `error` is set.
    pub user_loss_db: Vec<f64>,
    /// Mean of the finite per-user losses, `None` if there are none.
    pub mean_loss_db: Option<f64>,
    pub infinite_count: usize,
    pub error: Option<Error>,
    /// Per user: estimated support contains the true support.
    pub support_covered: Vec<bool>,
    /// `|C̃ ∩ C| / |C|` (1 when `C` is empty).
    pub common_overlap: f64,
    pub iterations: usize,
    pub consistent: bool,
}

impl AlgorithmOutcome {
    fn failed(algorithm: Algorithm, error: Error) -> Self {
        Self {
            algorithm,
            user_loss_db: Vec::new(),
            mean_loss_db: None,
            infinite_count: 0,
            error: Some(error),
            support_covered: Vec::new(),
            common_overlap: 0.0,
            iterations: 0,
            consistent: false,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.mean_loss_db.is_some()
    }
}

/// All algorithms' results on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub seed: u64,
    pub outcomes: Vec<AlgorithmOutcome>,
}

impl TrialOutcome {
    pub fn get(&self, algorithm: Algorithm) -> Option<&AlgorithmOutcome> {
        self.outcomes.iter().find(|o| o.algorithm == algorithm)
    }
}

fn covers(estimated: &[usize], truth: &[usize]) -> bool {
    truth.iter().all(|j| estimated.binary_search(j).is_ok())
}

fn score(
    algorithm: Algorithm,
    result: Result<RecoveryResult>,
    channels: &[ComplexMatrix],
    true_supports: &[Vec<usize>],
    true_common: &[usize],
) -> AlgorithmOutcome {
    let result = match result {
        Ok(r) => r,
        Err(e) => return AlgorithmOutcome::failed(algorithm, e),
    };
    let mut user_loss_db = Vec::with_capacity(channels.len());
    for (h, h_est) in channels.iter().zip(&result.estimates) {
        match snr_loss_db(h, h_est) {
            Ok(l) => user_loss_db.push(l),
            Err(e) => return AlgorithmOutcome::failed(algorithm, e),
        }
    }
    let finite: Vec<f64> = user_loss_db
        .iter()
        .copied()
        .filter(|l| l.is_finite())
        .collect();
    let mean_loss_db =
        (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
    let support_covered = result
        .supports
        .iter()
        .zip(true_supports)
        .map(|(est, truth)| covers(est, truth))
        .collect();
    let common_overlap = if true_common.is_empty() {
        1.0
    } else {
        true_common
            .iter()
            .filter(|j| result.common_support.contains(j))
            .count() as f64
            / true_common.len() as f64
    };
    AlgorithmOutcome {
        algorithm,
        infinite_count: user_loss_db.len() - finite.len(),
        user_loss_db,
        mean_loss_db,
        error: None,
        support_covered,
        common_overlap,
        iterations: result.iterations,
        consistent: result.consistent,
    }
}

/// Knobs for a single realization beyond the scenario itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOptions {
    /// Suppress receiver noise (test hook).
    pub noiseless: bool,
}

/// Simulates one channel realization end to end and scores every requested
/// algorithm on it. Trial seeds come from [`RandomSource::derive_seed`].
pub fn run_trial(
    cfg: &ScenarioConfig,
    point_index: usize,
    trial_index: usize,
    algorithms: &[Algorithm],
) -> Result<TrialOutcome> {
    let seed = RandomSource::derive_seed(cfg.seed, point_index as u64, trial_index as u64);
    run_trial_seeded(cfg, seed, algorithms, TrialOptions::default())
}

pub fn run_trial_seeded(
    cfg: &ScenarioConfig,
    seed: u64,
    algorithms: &[Algorithm],
    options: TrialOptions,
) -> Result<TrialOutcome> {
    let real = Realization::draw(cfg, seed, options)?;
    let supports = &real.channels.supports;
    let outcomes = algorithms
        .iter()
        .map(|&alg| {
            score(
                alg,
                real.recover(alg),
                &real.channels.antenna,
                &supports.per_user,
                &supports.common,
            )
        })
        .collect();
    Ok(TrialOutcome { seed, outcomes })
}

/// One simulated training block: channels, pilots, what each user received
/// and the recovery input assembled from their feedback.
#[derive(Debug, Clone)]
pub struct Realization {
    pub basis: AngularBasis,
    pub channels: ChannelSet,
    pub pilots: PilotMatrix,
    /// Unquantized `Y_i`, N×T.
    pub received: Vec<ComplexMatrix>,
    pub input: RecoveryInput,
}

impl Realization {
    /// Draws supports, channels, pilots and noise, in that order, from `seed`.
    pub fn draw(cfg: &ScenarioConfig, seed: u64, options: TrialOptions) -> Result<Self> {
        cfg.validate()?;
        let mut rng = if options.noiseless {
            RandomSource::zero_noise(seed)
        } else {
            RandomSource::new(seed)
        };
        let basis = AngularBasis::new(cfg.m, cfg.n)?;

        let supports = draw_supports(cfg, &mut rng)?;
        let channels = draw_channels_with(&supports, &basis, &mut rng)?;
        let pilots = design_pilots_with(&basis.a_t, cfg.t, cfg.power(), &mut rng)?;

        let mut received = Vec::with_capacity(cfg.k);
        let mut frames = Vec::with_capacity(cfg.k);
        for (i, h) in channels.antenna.iter().enumerate() {
            let y = downlink_receive(h, &pilots, &mut rng)?;
            frames.push(receiver_feedback_with(i, &y, &basis.a_r)?);
            received.push(y);
        }
        let input = preprocess(
            &pilots,
            &frames,
            &basis,
            &vec![cfg.s; cfg.k],
            cfg.c,
            cfg.mu,
            cfg.max_iter,
        )?;
        Ok(Self {
            basis,
            channels,
            pilots,
            received,
            input,
        })
    }

    /// Runs one recovery scheme on this realization.
    pub fn recover(&self, algorithm: Algorithm) -> Result<RecoveryResult> {
        let supports = &self.channels.supports;
        match algorithm {
            Algorithm::Biht => biht_all(&self.input, &self.basis),
            Algorithm::Jbiht => jbiht(&self.input, &self.basis),
            Algorithm::JbihtOracle => jbiht_known_support(
                &self.input,
                &self.basis,
                &supports.per_user,
                &supports.common,
            ),
            Algorithm::GenieLs => genie_all(
                &self.received,
                &self.input.sensing,
                &self.basis,
                &supports.per_user,
                &supports.common,
            ),
        }
    }
}

fn genie_all(
    received: &[ComplexMatrix],
    sensing: &ComplexMatrix,
    basis: &AngularBasis,
    supports: &[Vec<usize>],
    common: &[usize],
) -> Result<RecoveryResult> {
    let mut merged: Option<RecoveryResult> = None;
    for (y, s) in received.iter().zip(supports) {
        let r = genie_ls_with(y, sensing, basis, s)?;
        match &mut merged {
            None => merged = Some(r),
            Some(acc) => {
                acc.estimates.extend(r.estimates);
                acc.angular.extend(r.angular);
                acc.supports.extend(r.supports);
                acc.residual = Some(acc.residual.unwrap_or(0.0).hypot(r.residual.unwrap_or(0.0)));
            }
        }
    }
    let mut merged = merged.ok_or_else(|| Error::Config("no users".into()))?;
    merged.common_support = common.to_vec();
    Ok(merged)
}

/// A scenario parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    T,
    C,
    K,
    N,
    S,
    SnrDb,
    Trials,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T => "T",
            SweepParam::C => "c",
            SweepParam::K => "K",
            SweepParam::N => "N",
            SweepParam::S => "s",
            SweepParam::SnrDb => "snr_db",
            SweepParam::Trials => "trials",
        }
    }

    /// Returns `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut out = cfg.clone();
        if self == SweepParam::SnrDb {
            out.snr_db = value;
            return Ok(out);
        }
        if !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
            return Err(Error::Config(format!(
                "{} must be a non-negative integer, got {value}",
                self.name()
            )));
        }
        let v = value as usize;
        match self {
            SweepParam::T => out.t = v,
            SweepParam::C => out.c = v,
            SweepParam::K => out.k = v,
            SweepParam::N => out.n = v,
            SweepParam::S => out.s = v,
            SweepParam::Trials => out.trials = v,
            SweepParam::SnrDb => unreachable!(),
        }
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "T" => SweepParam::T,
            "c" => SweepParam::C,
            "K" => SweepParam::K,
            "N" => SweepParam::N,
            "s" => SweepParam::S,
            "snr_db" | "snr-db" => SweepParam::SnrDb,
            "trials" => SweepParam::Trials,
            other => return Err(Error::Config(format!("cannot sweep '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        Self { param, values }
    }

    /// A one-point sweep at the configuration's own `T`.
    pub fn single(cfg: &ScenarioConfig) -> Self {
        Self::new(SweepParam::T, vec![cfg.t as f64])
    }
}

/// Aggregate of one algorithm at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmStats {
    pub algorithm: Algorithm,
    /// Mean over valid trials of the per-trial mean loss; NaN if none valid.
    pub mean_loss_db: f64,
    pub valid_trials: usize,
    /// Trials whose entry for this algorithm failed or had no finite loss.
    pub invalid_count: usize,
    /// Per-user infinite losses excluded from the means.
    pub infinite_count: usize,
    /// Fraction of (trial, user) pairs whose estimated support covers the truth.
    pub support_recovery: f64,
    pub mean_common_overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Set when the point's configuration was infeasible.
    pub error: Option<Error>,
    pub stats: Vec<AlgorithmStats>,
}

impl SweepPoint {
    pub fn get(&self, algorithm: Algorithm) -> Option<&AlgorithmStats> {
        self.stats.iter().find(|s| s.algorithm == algorithm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ScenarioConfig,
    pub sweep_param: SweepParam,
    pub algorithms: Vec<Algorithm>,
    pub points: Vec<SweepPoint>,
}

impl ExperimentReport {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Mean loss per sweep point for `algorithm`.
    pub fn series(&self, algorithm: Algorithm) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.get(algorithm).map_or(f64::NAN, |s| s.mean_loss_db))
            .collect()
    }

    /// Whether `algorithm`'s mean loss never rises by more than `slack` dB
    /// between adjacent sweep points.
    pub fn is_non_increasing(&self, algorithm: Algorithm, slack: f64) -> bool {
        non_increasing(&self.series(algorithm), slack)
    }

    /// Every point produced a finite mean for every algorithm.
    pub fn is_complete(&self) -> bool {
        self.points.iter().all(|p| {
            p.error.is_none()
                && self
                    .algorithms
                    .iter()
                    .all(|&a| p.get(a).is_some_and(|s| s.mean_loss_db.is_finite()))
        })
    }
}

pub fn non_increasing(series: &[f64], slack: f64) -> bool {
    series.windows(2).all(|w| w[1] <= w[0] + slack)
}

fn aggregate(algorithm: Algorithm, trials: &[TrialOutcome]) -> AlgorithmStats {
    let mut sum = 0.0;
    let mut valid = 0;
    let mut infinite = 0;
    let mut covered = 0;
    let mut pairs = 0;
    let mut overlap = 0.0;
    for trial in trials {
        let Some(o) = trial.get(algorithm) else {
            continue;
        };
        infinite += o.infinite_count;
        if let Some(m) = o.mean_loss_db {
            sum += m;
            valid += 1;
            covered += o.support_covered.iter().filter(|&&c| c).count();
            pairs += o.support_covered.len();
            overlap += o.common_overlap;
        }
    }
    let div = |a: f64, b: usize| if b == 0 { f64::NAN } else { a / b as f64 };
    AlgorithmStats {
        algorithm,
        mean_loss_db: div(sum, valid),
        valid_trials: valid,
        invalid_count: trials.len() - valid,
        infinite_count: infinite,
        support_recovery: div(covered as f64, pairs),
        mean_common_overlap: div(overlap, valid),
    }
}

/// Runs `cfg.trials` realizations at every sweep value, on up to `jobs`
/// worker threads. The result does not depend on `jobs`.
pub fn run_experiment(
    cfg: &ScenarioConfig,
    sweep: &Sweep,
    algorithms: &[Algorithm],
    jobs: usize,
) -> Result<ExperimentReport> {
    run_experiment_with(cfg, sweep, algorithms, jobs, |_, _, _| {})
}

/// Like [`run_experiment`], calling `observe(point_index, trial_index, outcome)`
/// for each finished trial in deterministic order.
pub fn run_experiment_with(
    cfg: &ScenarioConfig,
    sweep: &Sweep,
    algorithms: &[Algorithm],
    jobs: usize,
    mut observe: impl FnMut(usize, usize, &TrialOutcome),
) -> Result<ExperimentReport> {
    if algorithms.is_empty() {
        return Err(Error::Config("no algorithms selected".into()));
    }
    if sweep.values.is_empty() {
        return Err(Error::Config("empty sweep".into()));
    }
    let mut points = Vec::with_capacity(sweep.values.len());
    for (p, &value) in sweep.values.iter().enumerate() {
        let point_cfg = sweep
            .param
            .apply(cfg, value)
            .and_then(|c| c.validate().map(|_| c));
        let point_cfg = match point_cfg {
            Ok(c) => c,
            Err(e) => {
                points.push(SweepPoint {
                    value,
                    error: Some(e),
                    stats: Vec::new(),
                });
                continue;
            }
        };
        let trials = run_point(&point_cfg, p, algorithms, jobs)?;
        for (i, t) in trials.iter().enumerate() {
            observe(p, i, t);
        }
        points.push(SweepPoint {
            value,
            error: None,
            stats: algorithms.iter().map(|&a| aggregate(a, &trials)).collect(),
        });
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        sweep_param: sweep.param,
        algorithms: algorithms.to_vec(),
        points,
    })
}

#[cfg(feature = "parallel")]
fn run_point(
    cfg: &ScenarioConfig,
    point: usize,
    algorithms: &[Algorithm],
    jobs: usize,
) -> Result<Vec<TrialOutcome>> {
    use rayon::prelude::*;
    if jobs <= 1 {
        return (0..cfg.trials)
            .map(|i| run_trial(cfg, point, i, algorithms))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, point, i, algorithms))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn run_point(
    cfg: &ScenarioConfig,
    point: usize,
    algorithms: &[Algorithm],
    _jobs: usize,
) -> Result<Vec<TrialOutcome>> {
    (0..cfg.trials)
        .map(|i| run_trial(cfg, point, i, algorithms))
        .collect()
}
