//! Jointly sparse channel synthesis in the angular domain.
//!
//! Each user's angular channel `H^a_i` (N×M) has nonzero entries only in the
//! columns of its support `S_i`, shared by all N rows. All supports contain a
//! common set `C`. The antenna-domain channel is `H_i = A_R · H^a_i · A_Tᴴ`
//! with DFT bases on both sides.

use crate::error::{Error, Result};
use crate::numerics::{dft_unitary, ComplexMatrix, RandomSource, ZERO};

/// Every simulation parameter in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// BTS antennas.
    pub m: usize,
    /// Antennas per user.
    pub n: usize,
    /// Users.
    pub k: usize,
    /// Pilot symbols per training block.
    pub t: usize,
    /// Individual sparsity parameter; realized support sizes are in `{s-2, s-1, s}`.
    pub s: usize,
    /// Joint sparsity parameter; realized common support size is in `{c, c+1}`.
    pub c: usize,
    pub snr_db: f64,
    /// Gradient step size.
    pub mu: f64,
    pub max_iter: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            m: 128,
            n: 2,
            k: 10,
            t: 64,
            s: 10,
            c: 6,
            snr_db: 15.0,
            mu: 0.01,
            max_iter: 200,
            trials: 100,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Per-pilot transmit power `P = 10^(snr_db/10)`.
    pub fn power(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 || self.k == 0 || self.t == 0 {
            return fail("M, N, K and T must all be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return fail(format!("step size mu must be positive, got {}", self.mu));
        }
        if !self.snr_db.is_finite() {
            return fail("snr_db must be finite".into());
        }
        if self.s > self.m {
            return fail(format!("s = {} exceeds M = {}", self.s, self.m));
        }
        if self.s < 3 {
            return fail(format!(
                "s = {} too small: support sizes are drawn from {{s-2, s-1, s}}",
                self.s
            ));
        }
        if self.c > self.s {
            return fail(format!("c = {} exceeds s = {}", self.c, self.s));
        }
        if self.c > 0 && self.c + 1 > self.s - 2 {
            return fail(format!(
                "common support of size up to {} cannot fit in individual supports as small as {}",
                self.c + 1,
                self.s - 2
            ));
        }
        Ok(())
    }
}

/// Per-user supports and the common support, all sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pub per_user: Vec<Vec<usize>>,
    pub common: Vec<usize>,
}

impl SupportSet {
    /// Indices present in every user's support.
    pub fn intersection(&self) -> Vec<usize> {
        let Some(first) = self.per_user.first() else {
            return Vec::new();
        };
        first
            .iter()
            .copied()
            .filter(|j| self.per_user.iter().all(|s| s.binary_search(j).is_ok()))
            .collect()
    }
}

/// Ground-truth channels for one realization.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// `H^a_i`, N×M.
    pub angular: Vec<ComplexMatrix>,
    /// `H_i = A_R H^a_i A_Tᴴ`, N×M.
    pub antenna: Vec<ComplexMatrix>,
    pub supports: SupportSet,
}

/// Cached DFT bases for the user (`A_R`, N×N) and BTS (`A_T`, M×M) arrays.
#[derive(Debug, Clone)]
pub struct AngularBasis {
    pub a_r: ComplexMatrix,
    pub a_t: ComplexMatrix,
}

impl AngularBasis {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Ok(Self {
            a_r: dft_unitary(n)?,
            a_t: dft_unitary(m)?,
        })
    }

    pub fn m(&self) -> usize {
        self.a_t.rows()
    }

    pub fn n(&self) -> usize {
        self.a_r.rows()
    }

    /// `A_R · h_a · A_Tᴴ`.
    pub fn to_antenna(&self, h_a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(h_a)?;
        // (A_R h_a) A_Tᴴ = ((A_T (A_R h_a)ᴴ))ᴴ
        let left = self.a_r.matmul(h_a)?;
        Ok(self.a_t.matmul(&left.adjoint())?.adjoint())
    }

    /// `A_Rᴴ · h · A_T`, the inverse of [`AngularBasis::to_antenna`].
    pub fn to_angular(&self, h: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(h)?;
        self.a_r.adjoint_mul(h)?.matmul(&self.a_t)
    }

    fn check(&self, h: &ComplexMatrix) -> Result<()> {
        if h.shape() != (self.n(), self.m()) {
            return Err(Error::InvalidDimension(format!(
                "expected a {}x{} channel, got {}x{}",
                self.n(),
                self.m(),
                h.rows(),
                h.cols()
            )));
        }
        Ok(())
    }
}

/// Maps an N×M angular-domain channel to the antenna domain.
pub fn to_antenna_domain(h_a: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension("M and N must be at least 1".into()));
    }
    AngularBasis::new(m, n)?.to_antenna(h_a)
}

/// Draws the common support and then completes each user's support from its
/// complement.
pub fn draw_supports(cfg: &ScenarioConfig, rng: &mut RandomSource) -> Result<SupportSet> {
    cfg.validate()?;
    let m = cfg.m;
    let common_size = if cfg.c == 0 {
        0
    } else {
        cfg.c + usize::from(rng.coin())
    };
    let mut common = rng.sample_indices(m, common_size);
    common.sort_unstable();

    let mut in_common = vec![false; m];
    for &j in &common {
        in_common[j] = true;
    }
    let complement: Vec<usize> = (0..m).filter(|&j| !in_common[j]).collect();

    let mut per_user = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let size = cfg.s - 2 + rng.uniform_index(3);
        if size < common_size {
            return Err(Error::Config(format!(
                "support size {size} smaller than common support {common_size}"
            )));
        }
        let mut support = common.clone();
        support.extend(
            rng.sample_indices(complement.len(), size - common_size)
                .into_iter()
                .map(|i| complement[i]),
        );
        support.sort_unstable();
        per_user.push(support);
    }
    Ok(SupportSet { per_user, common })
}

/// Fills each user's support columns with i.i.d. CN(0,1) entries.
pub fn draw_channels(
    supports: &SupportSet,
    cfg: &ScenarioConfig,
    rng: &mut RandomSource,
) -> Result<ChannelSet> {
    let basis = AngularBasis::new(cfg.m, cfg.n)?;
    draw_channels_with(supports, &basis, rng)
}

pub fn draw_channels_with(
    supports: &SupportSet,
    basis: &AngularBasis,
    rng: &mut RandomSource,
) -> Result<ChannelSet> {
    let (m, n) = (basis.m(), basis.n());
    let mut angular = Vec::with_capacity(supports.per_user.len());
    let mut antenna = Vec::with_capacity(supports.per_user.len());
    for support in &supports.per_user {
        if let Some(&bad) = support.iter().find(|&&j| j >= m) {
            return Err(Error::InvalidDimension(format!(
                "support index {bad} out of range for M = {m}"
            )));
        }
        let mut h_a = ComplexMatrix::zeros(n, m);
        for r in 0..n {
            for &j in support {
                h_a[(r, j)] = rng.complex_normal();
            }
        }
        debug_assert!(h_a.as_slice().iter().filter(|z| **z != ZERO).count() <= n * support.len());
        antenna.push(basis.to_antenna(&h_a)?);
        angular.push(h_a);
    }
    Ok(ChannelSet {
        angular,
        antenna,
        supports: supports.clone(),
    })
}
