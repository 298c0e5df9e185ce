//! Downlink training and the one-bit feedback path.
//!
//! The BTS sends `X = A_T·Z` with `Z` drawn from `{±√(P/M)}`; user `i`
//! receives `Y_i = H_i·X + N_i`, forms `Q(Y_iᴴ·A_R)` and feeds back two bits
//! per complex entry.
//!
//! # Wire format
//!
//! A frame carries the T×N sign matrix in row-major `(t, n)` order. Entry
//! `e = t·N + n` occupies bit `2e` (sign of the real part) and bit `2e + 1`
//! (sign of the imaginary part) of the stream, where stream bit `b` lives in
//! byte `b / 8` at position `b % 8` counting from the least significant bit.
//! A set bit means `+1`. Unused high bits of the last byte are zero.

use crate::error::{Error, Result};
use crate::numerics::{dft_unitary, ComplexMatrix, RandomSource, C64};

/// The M×T pilot block together with the ±√(P/M) matrix it was built from.
#[derive(Debug, Clone)]
pub struct PilotMatrix {
    /// `X = A_T·Z`, M×T.
    pub x: ComplexMatrix,
    /// Real ±√(P/M) entries, M×T.
    pub z: ComplexMatrix,
    pub power: f64,
}

impl PilotMatrix {
    pub fn m(&self) -> usize {
        self.x.rows()
    }

    pub fn t(&self) -> usize {
        self.x.cols()
    }

    /// Average per-symbol transmit energy `(1/T) Σ_t x_tᴴ x_t`.
    pub fn average_power(&self) -> f64 {
        self.x.frobenius_norm_sqr() / self.t() as f64
    }

    /// Effective sensing matrix `X̂ = Xᴴ·A_T` (T×M).
    pub fn sensing_matrix(&self, a_t: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.x.adjoint_mul(a_t)
    }
}

pub fn design_pilots(
    m: usize,
    t: usize,
    power: f64,
    rng: &mut RandomSource,
) -> Result<PilotMatrix> {
    if m == 0 || t == 0 {
        return Err(Error::InvalidDimension("M and T must be at least 1".into()));
    }
    design_pilots_with(&dft_unitary(m)?, t, power, rng)
}

/// Like [`design_pilots`] with a precomputed `A_T`.
pub fn design_pilots_with(
    a_t: &ComplexMatrix,
    t: usize,
    power: f64,
    rng: &mut RandomSource,
) -> Result<PilotMatrix> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Config(format!(
            "pilot power must be positive, got {power}"
        )));
    }
    let m = a_t.rows();
    if t == 0 {
        return Err(Error::InvalidDimension("T must be at least 1".into()));
    }
    let amp = (power / m as f64).sqrt();
    let z = ComplexMatrix::from_fn(m, t, |_, _| {
        C64::new(if rng.coin() { amp } else { -amp }, 0.0)
    });
    let x = a_t.matmul(&z)?;
    Ok(PilotMatrix { x, z, power })
}

/// `Y = H·X + N` with CN(0,1) noise.
pub fn downlink_receive(
    h: &ComplexMatrix,
    pilots: &PilotMatrix,
    rng: &mut RandomSource,
) -> Result<ComplexMatrix> {
    let mut y = h.matmul(&pilots.x)?;
    for v in y.as_mut_slice() {
        *v += rng.noise();
    }
    Ok(y)
}

#[inline]
fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Componentwise one-bit quantizer `sign(Re) + j·sign(Im)`, with `sign(0) = +1`.
pub fn quantize(z: &ComplexMatrix) -> ComplexMatrix {
    let mut out = z.clone();
    for v in out.as_mut_slice() {
        *v = C64::new(sign(v.re), sign(v.im));
    }
    out
}

/// Quantized feedback from one user for one training block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackFrame {
    pub user: usize,
    pub t: usize,
    pub n: usize,
    pub bits: Vec<u8>,
}

impl FeedbackFrame {
    pub fn payload_bits(&self) -> usize {
        2 * self.t * self.n
    }

    /// The T×N sign matrix carried by this frame.
    pub fn symbols(&self) -> Result<ComplexMatrix> {
        unpack_bits(&self.bits, self.t, self.n)
    }
}

pub fn frame_len_bytes(t: usize, n: usize) -> usize {
    (2 * t * n).div_ceil(8)
}

/// Computes `Q(Yᴴ·A_R)` for the N×T received block and packs it.
pub fn receiver_feedback(user: usize, y: &ComplexMatrix, n: usize) -> Result<FeedbackFrame> {
    if n == 0 {
        return Err(Error::InvalidDimension("N must be at least 1".into()));
    }
    receiver_feedback_with(user, y, &dft_unitary(n)?)
}

/// Like [`receiver_feedback`] with a precomputed `A_R`.
pub fn receiver_feedback_with(
    user: usize,
    y: &ComplexMatrix,
    a_r: &ComplexMatrix,
) -> Result<FeedbackFrame> {
    if y.rows() != a_r.rows() {
        return Err(Error::InvalidDimension(format!(
            "received block has {} rows, expected N = {}",
            y.rows(),
            a_r.rows()
        )));
    }
    let q = quantize(&y.adjoint_mul(a_r)?);
    Ok(FeedbackFrame {
        user,
        t: q.rows(),
        n: q.cols(),
        bits: pack_bits(&q)?,
    })
}

fn sign_bit(v: f64, index: usize) -> Result<bool> {
    if v == 1.0 {
        Ok(true)
    } else if v == -1.0 {
        Ok(false)
    } else {
        Err(Error::InvalidSymbol { index })
    }
}

/// Packs a matrix over `{±1±j}` into the feedback wire format.
pub fn pack_bits(q: &ComplexMatrix) -> Result<Vec<u8>> {
    let entries = q.as_slice();
    let mut out = vec![0u8; (2 * entries.len()).div_ceil(8)];
    for (e, z) in entries.iter().enumerate() {
        let bits = [sign_bit(z.re, e)?, sign_bit(z.im, e)?];
        for (k, set) in bits.into_iter().enumerate() {
            if set {
                let b = 2 * e + k;
                out[b / 8] |= 1 << (b % 8);
            }
        }
    }
    Ok(out)
}

/// Inverse of [`pack_bits`] for a T×N matrix.
pub fn unpack_bits(bytes: &[u8], t: usize, n: usize) -> Result<ComplexMatrix> {
    let expected = frame_len_bytes(t, n);
    if bytes.len() != expected {
        return Err(Error::FrameLength {
            expected,
            got: bytes.len(),
        });
    }
    let bit = |b: usize| {
        if bytes[b / 8] >> (b % 8) & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    };
    let data = (0..t * n)
        .map(|e| C64::new(bit(2 * e), bit(2 * e + 1)))
        .collect();
    ComplexMatrix::from_vec(t, n, data)
}
