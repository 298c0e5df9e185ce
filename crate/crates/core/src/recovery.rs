//! Channel recovery from one-bit feedback.
//!
//! All iterative recoveries work on the transposed model
//! `Ŷ_i = Q(X̂·Ĥ_i + N̂_i)` with `X̂ = Xᴴ·A_T` (T×M) and `Ĥ_i = (H^a_i)ᴴ`
//! (M×N), where sparsity lives on the rows of `Ĥ_i`. Each iteration is
//!
//! 1. a gradient step `Ĥ_i ← Ĥ_i − μ·X̂ᴴ(Q(X̂·Ĥ_i) − Ŷ_i)` for every user,
//! 2. a support update (see [`SupportRule`]),
//! 3. hard thresholding of every row outside the support,
//!
//! and the loop stops once every user's estimate reproduces its feedback
//! signs exactly or `max_iter` is reached. The estimate is then mapped back
//! to the antenna domain and scaled to unit Frobenius norm; amplitude is not
//! identifiable from signs.

use crate::airlink::{FeedbackFrame, PilotMatrix};
use crate::channel::AngularBasis;
use crate::error::{Error, Result};
use crate::numerics::{frobenius_normalize, solve, ComplexMatrix, C64, ZERO};

/// Everything a sign-based recovery needs.
#[derive(Debug, Clone)]
pub struct RecoveryInput {
    /// `X̂ = Xᴴ·A_T`, T×M.
    pub sensing: ComplexMatrix,
    /// `Ŷ_i`, T×N over `{±1±j}`, one per user.
    pub measurements: Vec<ComplexMatrix>,
    /// Support-size bound `s_i` per user.
    pub sparsity: Vec<usize>,
    /// Common-support size bound `c`.
    pub common: usize,
    pub mu: f64,
    pub max_iter: usize,
}

impl RecoveryInput {
    pub fn users(&self) -> usize {
        self.measurements.len()
    }

    pub fn t(&self) -> usize {
        self.sensing.rows()
    }

    pub fn m(&self) -> usize {
        self.sensing.cols()
    }

    pub fn n(&self) -> usize {
        self.measurements.first().map_or(0, |y| y.cols())
    }

    /// The single-user input for user `i` with no common-support constraint.
    pub fn single_user(&self, i: usize) -> RecoveryInput {
        RecoveryInput {
            sensing: self.sensing.clone(),
            measurements: vec![self.measurements[i].clone()],
            sparsity: vec![self.sparsity[i]],
            common: 0,
            mu: self.mu,
            max_iter: self.max_iter,
        }
    }

    fn validate(&self) -> Result<()> {
        let (t, m) = self.sensing.shape();
        if self.measurements.is_empty() {
            return Err(Error::Config("no users to recover".into()));
        }
        if self.sparsity.len() != self.measurements.len() {
            return Err(Error::Config(format!(
                "{} sparsity bounds for {} users",
                self.sparsity.len(),
                self.measurements.len()
            )));
        }
        let n = self.n();
        for y in &self.measurements {
            if y.shape() != (t, n) {
                return Err(Error::InvalidDimension(format!(
                    "measurement is {}x{}, expected {t}x{n}",
                    y.rows(),
                    y.cols()
                )));
            }
        }
        if let Some(&s) = self.sparsity.iter().find(|&&s| s == 0 || s > m) {
            return Err(Error::Config(format!("sparsity bound {s} outside 1..={m}")));
        }
        let min_s = self.sparsity.iter().copied().min().unwrap_or(0);
        if self.common > min_s {
            return Err(Error::Config(format!(
                "common bound c = {} exceeds smallest sparsity bound {min_s}",
                self.common
            )));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("invalid step size {}", self.mu)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of any recovery algorithm.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// `H̃_i`, N×M antenna domain, unit Frobenius norm.
    pub estimates: Vec<ComplexMatrix>,
    /// `H̃^a_i`, N×M angular domain, unit Frobenius norm.
    pub angular: Vec<ComplexMatrix>,
    /// Estimated support per user, ascending.
    pub supports: Vec<Vec<usize>>,
    /// Estimated common support, ascending; empty when not estimated.
    pub common_support: Vec<usize>,
    pub iterations: usize,
    pub consistent: bool,
    /// Entries with any sign disagreement at termination, summed over users.
    pub mismatches: usize,
    /// Mismatch count after each iteration.
    pub mismatch_history: Vec<usize>,
    /// Least-squares residual `‖X̂_S·Ĥ_S − Yᴴ·A_R‖_F`, genie recovery only.
    pub residual: Option<f64>,
}

/// How supports are chosen inside the iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportRule {
    /// Per-user top rows, common-support vote, then re-selection around the
    /// voted set.
    Joint,
    /// Fixed supports supplied by an oracle.
    Known(Vec<Vec<usize>>),
}

/// Assembles the recovery input from pilots and received feedback frames.
pub fn preprocess(
    pilots: &PilotMatrix,
    frames: &[FeedbackFrame],
    basis: &AngularBasis,
    sparsity: &[usize],
    common: usize,
    mu: f64,
    max_iter: usize,
) -> Result<RecoveryInput> {
    if pilots.m() != basis.m() {
        return Err(Error::InvalidDimension(format!(
            "pilots for M = {} but basis for M = {}",
            pilots.m(),
            basis.m()
        )));
    }
    let sensing = pilots.sensing_matrix(&basis.a_t)?;
    let mut measurements = Vec::with_capacity(frames.len());
    for frame in frames {
        if frame.t != pilots.t() || frame.n != basis.n() {
            return Err(Error::InvalidDimension(format!(
                "frame from user {} is {}x{}, expected {}x{}",
                frame.user,
                frame.t,
                frame.n,
                pilots.t(),
                basis.n()
            )));
        }
        measurements.push(frame.symbols()?);
    }
    Ok(RecoveryInput {
        sensing,
        measurements,
        sparsity: sparsity.to_vec(),
        common,
        mu,
        max_iter,
    })
}

/// Indices of the `count` largest entries of `norms`; ties go to the lower
/// index. Returned ascending.
pub fn select_top_rows(norms: &[f64], count: usize, excluded: &[bool]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..norms.len())
        .filter(|&j| !excluded.get(j).copied().unwrap_or(false))
        .collect();
    let by_norm = |a: &usize, b: &usize| norms[*b].total_cmp(&norms[*a]).then(a.cmp(b));
    if count < idx.len() {
        idx.select_nth_unstable_by(count, by_norm);
        idx.truncate(count);
    }
    idx.sort_unstable();
    idx
}

/// The `count` indices appearing in the most supports. Ties are broken by
/// larger `energy`, then lower index. Returned ascending.
pub fn vote_common_support(supports: &[Vec<usize>], energy: &[f64], count: usize) -> Vec<usize> {
    let m = energy.len();
    let mut votes = vec![0usize; m];
    for s in supports {
        for &j in s {
            votes[j] += 1;
        }
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| {
        votes[b]
            .cmp(&votes[a])
            .then_with(|| energy[b].total_cmp(&energy[a]))
            .then(a.cmp(&b))
    });
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

/// Column-major view of the sensing matrix for row-sparse products, with a
/// real-valued copy when `X̂` has no imaginary part.
struct Sensing {
    x: ComplexMatrix,
    /// `X̂ᵀ`, M×T.
    xt: ComplexMatrix,
    real: Option<(Vec<f64>, Vec<f64>)>,
}

impl Sensing {
    fn new(x: ComplexMatrix) -> Self {
        let xt = x.transpose();
        // Xᴴ·A_T of the ±√(P/M) design is real up to round-off.
        let scale = x.as_slice().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let real = x
            .as_slice()
            .iter()
            .all(|z| z.im.abs() <= 1e-12 * scale)
            .then(|| {
                (
                    x.as_slice().iter().map(|z| z.re).collect(),
                    xt.as_slice().iter().map(|z| z.re).collect(),
                )
            });
        Self { x, xt, real }
    }

    /// `X̂·Ĥ` using only the rows of `Ĥ` listed in `active`.
    fn forward(&self, h: &ComplexMatrix, active: &[usize], out: &mut ComplexMatrix) {
        let n = h.cols();
        let t_len = self.x.rows();
        out.as_mut_slice().fill(ZERO);
        let o = out.as_mut_slice();
        match &self.real {
            Some((_, xt)) => {
                for &j in active {
                    let h_row = h.row(j);
                    let x_col = &xt[j * t_len..(j + 1) * t_len];
                    for (o_row, &a) in o.chunks_exact_mut(n).zip(x_col) {
                        for (ov, hv) in o_row.iter_mut().zip(h_row) {
                            *ov += hv * a;
                        }
                    }
                }
            }
            None => {
                for &j in active {
                    let h_row = h.row(j);
                    for (o_row, &a) in o.chunks_exact_mut(n).zip(self.xt.row(j)) {
                        for (ov, hv) in o_row.iter_mut().zip(h_row) {
                            *ov += a * hv;
                        }
                    }
                }
            }
        }
    }

    /// `h ← h − μ·X̂ᴴ·r`, visiting only nonzero rows of `r`.
    fn descend(&self, h: &mut ComplexMatrix, r: &ComplexMatrix, mu: f64, scratch: &mut Vec<f64>) {
        let n = h.cols();
        let m = self.x.cols();
        if let Some((x, _)) = &self.real {
            // Accumulate X̂ᵀ·r per column into split re/im buffers: contiguous
            // axpy over M.
            scratch.clear();
            scratch.resize(2 * n * m, 0.0);
            for t in 0..r.rows() {
                let x_row = &x[t * m..(t + 1) * m];
                for (k, rv) in r.row(t).iter().enumerate() {
                    if rv.re != 0.0 {
                        let g = &mut scratch[2 * k * m..(2 * k + 1) * m];
                        for (gv, &a) in g.iter_mut().zip(x_row) {
                            *gv += rv.re * a;
                        }
                    }
                    if rv.im != 0.0 {
                        let g = &mut scratch[(2 * k + 1) * m..(2 * k + 2) * m];
                        for (gv, &a) in g.iter_mut().zip(x_row) {
                            *gv += rv.im * a;
                        }
                    }
                }
            }
            for (j, h_row) in h.as_mut_slice().chunks_exact_mut(n).enumerate() {
                for (k, hv) in h_row.iter_mut().enumerate() {
                    hv.re -= mu * scratch[2 * k * m + j];
                    hv.im -= mu * scratch[(2 * k + 1) * m + j];
                }
            }
            return;
        }
        let hs = h.as_mut_slice();
        for t in 0..r.rows() {
            let r_row = r.row(t);
            if r_row.iter().all(|z| *z == ZERO) {
                continue;
            }
            for (h_row, &a) in hs.chunks_exact_mut(n).zip(self.x.row(t)) {
                let w = a.conj() * mu;
                for (hv, rv) in h_row.iter_mut().zip(r_row) {
                    *hv -= w * rv;
                }
            }
        }
    }
}

#[inline]
fn qsign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Writes `Q(pred) − y` into `residual` and returns the number of entries
/// with at least one sign disagreement.
fn sign_residual(pred: &ComplexMatrix, y: &ComplexMatrix, residual: &mut ComplexMatrix) -> usize {
    let mut mismatches = 0;
    for ((p, &yv), r) in pred
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .zip(residual.as_mut_slice())
    {
        *r = C64::new(qsign(p.re), qsign(p.im)) - yv;
        if *r != ZERO {
            mismatches += 1;
        }
    }
    mismatches
}

struct UserState {
    h: ComplexMatrix,
    support: Vec<usize>,
    pred: ComplexMatrix,
    residual: ComplexMatrix,
    mismatches: usize,
}

/// Step-by-step driver of the iterative recoveries.
///
/// [`jbiht`], [`biht_individual`] and [`jbiht_known_support`] run this to
/// completion; stepping by hand exposes the intermediate estimates.
pub struct Iteration {
    input: RecoveryInput,
    basis: AngularBasis,
    rule: SupportRule,
    sensing: Sensing,
    users: Vec<UserState>,
    common_support: Vec<usize>,
    history: Vec<usize>,
    norms: Vec<f64>,
    energy: Vec<f64>,
    scratch: Vec<f64>,
}

impl Iteration {
    /// Validates the input and sets every user to `Ĥ_i = X̂ᴴ·Ŷ_i` with all
    /// rows active.
    pub fn new(input: RecoveryInput, basis: AngularBasis, mut rule: SupportRule) -> Result<Self> {
        input.validate()?;
        let (t, m) = input.sensing.shape();
        let n = input.n();
        if basis.m() != m || basis.n() != n {
            return Err(Error::InvalidDimension(format!(
                "basis is for M = {}, N = {} but input has M = {m}, N = {n}",
                basis.m(),
                basis.n()
            )));
        }
        if let SupportRule::Known(known) = &mut rule {
            if known.len() != input.users() {
                return Err(Error::Config(format!(
                    "{} known supports for {} users",
                    known.len(),
                    input.users()
                )));
            }
            if let Some(&bad) = known.iter().flatten().find(|&&j| j >= m) {
                return Err(Error::Config(format!("support index {bad} out of range")));
            }
            for s in known.iter_mut() {
                s.sort_unstable();
                s.dedup();
            }
        }

        let sensing = Sensing::new(input.sensing.clone());
        let all_rows: Vec<usize> = (0..m).collect();
        let users = input
            .measurements
            .iter()
            .map(|y| {
                let h = input.sensing.adjoint_mul(y)?;
                let mut pred = ComplexMatrix::zeros(t, n);
                sensing.forward(&h, &all_rows, &mut pred);
                let mut residual = ComplexMatrix::zeros(t, n);
                let mismatches = sign_residual(&pred, y, &mut residual);
                Ok(UserState {
                    h,
                    support: all_rows.clone(),
                    pred,
                    residual,
                    mismatches,
                })
            })
            .collect::<Result<_>>()?;

        Ok(Self {
            input,
            basis,
            rule,
            sensing,
            users,
            common_support: Vec::new(),
            history: Vec::new(),
            norms: vec![0.0; m],
            energy: vec![0.0; m],
            scratch: Vec::new(),
        })
    }

    /// Completed steps so far.
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Total sign mismatches of the current estimates.
    pub fn mismatches(&self) -> usize {
        self.users.iter().map(|u| u.mismatches).sum()
    }

    /// True once the estimates reproduce every feedback sign.
    pub fn is_consistent(&self) -> bool {
        self.mismatches() == 0
    }

    /// True when the loop would stop: consistent after at least one step, or
    /// out of iterations.
    pub fn is_done(&self) -> bool {
        let n = self.iterations();
        n >= self.input.max_iter || (n > 0 && self.is_consistent())
    }

    /// Current unnormalized M×N estimate `Ĥ_i` of user `i`.
    pub fn estimate(&self, i: usize) -> &ComplexMatrix {
        &self.users[i].h
    }

    /// Current support of user `i`, ascending.
    pub fn support(&self, i: usize) -> &[usize] {
        &self.users[i].support
    }

    /// Current common support, ascending.
    pub fn common_support(&self) -> &[usize] {
        &self.common_support
    }

    pub fn mismatch_history(&self) -> &[usize] {
        &self.history
    }

    /// One gradient, support-update and thresholding pass. Returns the total
    /// mismatch count afterwards.
    pub fn step(&mut self) -> usize {
        let input = &self.input;
        let m = input.m();
        let sensing = &self.sensing;

        for u in &mut self.users {
            if u.mismatches > 0 && input.mu > 0.0 {
                sensing.descend(&mut u.h, &u.residual, input.mu, &mut self.scratch);
            }
        }

        match &self.rule {
            SupportRule::Known(known) => {
                for (u, s) in self.users.iter_mut().zip(known) {
                    u.support.clone_from(s);
                }
            }
            SupportRule::Joint => {
                let norms = &mut self.norms;
                let energy = &mut self.energy;
                energy.fill(0.0);
                for (u, &s_i) in self.users.iter_mut().zip(&input.sparsity) {
                    for (j, nrm) in norms.iter_mut().enumerate() {
                        *nrm = u.h.row_norm_sqr(j);
                        energy[j] += *nrm;
                    }
                    u.support = select_top_rows(norms, s_i, &[]);
                }
                if input.common > 0 {
                    let candidates: Vec<Vec<usize>> =
                        self.users.iter().map(|u| u.support.clone()).collect();
                    self.common_support = vote_common_support(&candidates, energy, input.common);
                    let mut in_common = vec![false; m];
                    for &j in &self.common_support {
                        in_common[j] = true;
                    }
                    for (u, &s_i) in self.users.iter_mut().zip(&input.sparsity) {
                        for (j, nrm) in norms.iter_mut().enumerate() {
                            *nrm = u.h.row_norm_sqr(j);
                        }
                        let mut s = select_top_rows(norms, s_i - input.common, &in_common);
                        s.extend_from_slice(&self.common_support);
                        s.sort_unstable();
                        u.support = s;
                    }
                }
            }
        }

        let mut total = 0;
        let mut keep = vec![false; m];
        for (u, y) in self.users.iter_mut().zip(&input.measurements) {
            keep.fill(false);
            for &j in &u.support {
                keep[j] = true;
            }
            u.h.zero_rows_except(&keep);
            sensing.forward(&u.h, &u.support, &mut u.pred);
            u.mismatches = sign_residual(&u.pred, y, &mut u.residual);
            total += u.mismatches;
        }
        self.history.push(total);
        total
    }

    /// Steps until [`Iteration::is_done`].
    pub fn run(mut self) -> Result<RecoveryResult> {
        while !self.is_done() {
            self.step();
        }
        self.finish()
    }

    /// Normalized estimates of the current state.
    pub fn finish(self) -> Result<RecoveryResult> {
        let mut estimates = Vec::with_capacity(self.users.len());
        let mut angular = Vec::with_capacity(self.users.len());
        for (i, u) in self.users.iter().enumerate() {
            let (est, ang) = finish(&u.h, &self.basis).map_err(|e| match e {
                Error::ZeroMatrix => Error::DegenerateResult { user: i },
                other => other,
            })?;
            estimates.push(est);
            angular.push(ang);
        }
        let mismatches = self.mismatches();
        Ok(RecoveryResult {
            estimates,
            angular,
            supports: self.users.into_iter().map(|u| u.support).collect(),
            common_support: self.common_support,
            iterations: self.history.len(),
            consistent: mismatches == 0,
            mismatches,
            mismatch_history: self.history,
            residual: None,
        })
    }
}

fn run(input: &RecoveryInput, basis: &AngularBasis, rule: SupportRule) -> Result<RecoveryResult> {
    Iteration::new(input.clone(), basis.clone(), rule)?.run()
}

/// Maps an internal M×N estimate to normalized antenna and angular N×M
/// matrices.
fn finish(h_hat: &ComplexMatrix, basis: &AngularBasis) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let angular = frobenius_normalize(&h_hat.adjoint())?;
    let antenna = frobenius_normalize(&basis.to_antenna(&angular)?)?;
    Ok((antenna, angular))
}

/// Joint binary iterative hard thresholding across all users.
pub fn jbiht(input: &RecoveryInput, basis: &AngularBasis) -> Result<RecoveryResult> {
    run(input, basis, SupportRule::Joint)
}

/// Plain BIHT for a single user: top-`s` row thresholding with no common
/// support.
pub fn biht_individual(input: &RecoveryInput, basis: &AngularBasis) -> Result<RecoveryResult> {
    if input.users() != 1 {
        return Err(Error::Config(format!(
            "biht_individual takes one user, got {}",
            input.users()
        )));
    }
    let single = RecoveryInput {
        common: 0,
        ..input.clone()
    };
    run(&single, basis, SupportRule::Joint)
}

/// Runs [`biht_individual`] independently for every user and gathers the
/// results. `iterations` is the largest per-user count.
pub fn biht_all(input: &RecoveryInput, basis: &AngularBasis) -> Result<RecoveryResult> {
    input.validate()?;
    let mut merged = RecoveryResult {
        estimates: Vec::new(),
        angular: Vec::new(),
        supports: Vec::new(),
        common_support: Vec::new(),
        iterations: 0,
        consistent: true,
        mismatches: 0,
        mismatch_history: Vec::new(),
        residual: None,
    };
    for i in 0..input.users() {
        let r = biht_individual(&input.single_user(i), basis).map_err(|e| match e {
            Error::DegenerateResult { .. } => Error::DegenerateResult { user: i },
            other => other,
        })?;
        merged.estimates.extend(r.estimates);
        merged.angular.extend(r.angular);
        merged.supports.extend(r.supports);
        merged.iterations = merged.iterations.max(r.iterations);
        merged.consistent &= r.consistent;
        merged.mismatches += r.mismatches;
        for (k, &v) in r.mismatch_history.iter().enumerate() {
            if k < merged.mismatch_history.len() {
                merged.mismatch_history[k] += v;
            } else {
                merged.mismatch_history.push(v);
            }
        }
    }
    Ok(merged)
}

/// The J-BIHT iteration with thresholding to known true supports.
pub fn jbiht_known_support(
    input: &RecoveryInput,
    basis: &AngularBasis,
    supports: &[Vec<usize>],
    common: &[usize],
) -> Result<RecoveryResult> {
    let mut result = run(input, basis, SupportRule::Known(supports.to_vec()))?;
    result.common_support = common.to_vec();
    Ok(result)
}

/// Number of entries where `Q(X̂·(H̃^a_i)ᴴ)` disagrees with `Ŷ_i`, summed
/// over users. `angular` holds N×M angular-domain estimates.
pub fn consistency_check(angular: &[ComplexMatrix], input: &RecoveryInput) -> Result<usize> {
    if angular.len() != input.users() {
        return Err(Error::InvalidDimension(format!(
            "{} estimates for {} users",
            angular.len(),
            input.users()
        )));
    }
    let mut total = 0;
    for (h_a, y) in angular.iter().zip(&input.measurements) {
        let pred = input.sensing.matmul(&h_a.adjoint())?;
        if pred.shape() != y.shape() {
            return Err(Error::InvalidDimension(
                "estimate does not match measurements".into(),
            ));
        }
        let mut residual = ComplexMatrix::zeros(y.rows(), y.cols());
        total += sign_residual(&pred, y, &mut residual);
    }
    Ok(total)
}

/// Least squares on a known support from the unquantized received block.
///
/// Minimizes `‖X̂_S·Ĥ_S − Yᴴ·A_R‖_F` over rows `S` of `Ĥ` through the normal
/// equations; every other row is zero.
pub fn genie_ls(
    y: &ComplexMatrix,
    pilots: &PilotMatrix,
    basis: &AngularBasis,
    support: &[usize],
) -> Result<RecoveryResult> {
    let sensing = pilots.sensing_matrix(&basis.a_t)?;
    genie_ls_with(y, &sensing, basis, support)
}

pub fn genie_ls_with(
    y: &ComplexMatrix,
    sensing: &ComplexMatrix,
    basis: &AngularBasis,
    support: &[usize],
) -> Result<RecoveryResult> {
    let (t, m) = sensing.shape();
    let n = basis.n();
    if y.shape() != (n, t) {
        return Err(Error::InvalidDimension(format!(
            "received block is {}x{}, expected {n}x{t}",
            y.rows(),
            y.cols()
        )));
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.is_empty() {
        return Err(Error::Config("empty support".into()));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= m) {
        return Err(Error::Config(format!("support index {bad} out of range")));
    }
    if t < support.len() {
        return Err(Error::Config(format!(
            "T = {t} pilots cannot determine a support of size {}",
            support.len()
        )));
    }

    let target = y.adjoint_mul(&basis.a_r)?;
    let sub = ComplexMatrix::from_fn(t, support.len(), |r, c| sensing[(r, support[c])]);
    let gram = sub.adjoint_mul(&sub)?;
    let rhs = sub.adjoint_mul(&target)?;
    let coef = solve(&gram, &rhs)?;

    let fit = sub.matmul(&coef)?;
    let residual = fit.sub(&target)?.frobenius_norm();

    let mut h_hat = ComplexMatrix::zeros(m, n);
    for (r, &j) in support.iter().enumerate() {
        h_hat.row_mut(j).copy_from_slice(coef.row(r));
    }
    let (est, ang) = finish(&h_hat, basis).map_err(|e| match e {
        Error::ZeroMatrix => Error::DegenerateResult { user: 0 },
        other => other,
    })?;
    Ok(RecoveryResult {
        estimates: vec![est],
        angular: vec![ang],
        supports: vec![support],
        common_support: Vec::new(),
        iterations: 1,
        consistent: true,
        mismatches: 0,
        mismatch_history: Vec::new(),
        residual: Some(residual),
    })
}
