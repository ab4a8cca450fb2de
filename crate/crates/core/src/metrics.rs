//! Fidelity and payload-survival measurements.
//!
//! All accumulation is integer (u64/u128 moments), so results do not depend
//! on summation order and the parallel kernels agree with the sequential
//! ones bit for bit. Floating point enters only in the final division.

use thiserror::Error;

use crate::kernels::{self, CorrMoments};
use crate::pixmap::{ArgbImage, GrayImage};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("images are {0}x{1} and {2}x{3}, dimensions must match")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("byte sequences have lengths {0} and {1}, lengths must match")]
    LengthMismatch(usize, usize),
    #[error("input is empty")]
    Empty,
    #[error("a sequence has zero variance, correlation is undefined")]
    ZeroVariance,
}

fn check_dims<A: Dimensioned, B: Dimensioned>(a: &A, b: &B) -> Result<(), MetricsError> {
    if a.dims() != b.dims() {
        let ((aw, ah), (bw, bh)) = (a.dims(), b.dims());
        return Err(MetricsError::DimensionMismatch(aw, ah, bw, bh));
    }
    Ok(())
}

trait Dimensioned {
    fn dims(&self) -> (u32, u32);
}

impl Dimensioned for ArgbImage {
    fn dims(&self) -> (u32, u32) {
        (self.width(), self.height())
    }
}

impl Dimensioned for GrayImage {
    fn dims(&self) -> (u32, u32) {
        (self.width(), self.height())
    }
}

/// Mean squared error over all four channels of every pixel.
pub fn mse(a: &ArgbImage, b: &ArgbImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let sum = kernels::sq_diff_sum_argb(a.pixels(), b.pixels());
    Ok(sum as f64 / (4 * a.pixel_count()) as f64)
}

/// Mean squared error between two grayscale images.
pub fn mse_gray(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let sum = kernels::sq_diff_sum_gray(a.pixels(), b.pixels());
    Ok(sum as f64 / a.pixel_count() as f64)
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0_f64 * 255.0 / mse).log10()
    }
}

/// Peak signal-to-noise ratio in dB against peak 255; infinite for
/// identical images.
pub fn psnr(a: &ArgbImage, b: &ArgbImage) -> Result<f64, MetricsError> {
    mse(a, b).map(psnr_from_mse)
}

pub fn psnr_gray(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    mse_gray(a, b).map(psnr_from_mse)
}

/// Fraction of differing bits between two equal-length byte sequences.
pub fn ber(a: &[u8], b: &[u8]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    let differing = kernels::bit_diff_count(a, b);
    Ok(differing as f64 / (8 * a.len()) as f64)
}

/// Pearson correlation of two grayscale images, in [-1, 1].
///
/// Moments are exact integers: the numerator `n*sum(ab) - sum(a)*sum(b)`
/// and the variance terms are formed in i128/u128 and each rounds to f64
/// once. Squaring the ratio before the square root makes perfectly
/// correlated inputs (equal, negated, or affine-mapped) score exactly
/// plus or minus 1, since numerator and denominator are then the same
/// integer.
pub fn normalized_correlation(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let n = a.pixel_count() as u128;
    let CorrMoments { sum_a, sum_b, sum_aa, sum_bb, sum_ab } =
        kernels::corr_moments(a.pixels(), b.pixels());
    let var_a = n * sum_aa as u128 - (sum_a as u128 * sum_a as u128);
    let var_b = n * sum_bb as u128 - (sum_b as u128 * sum_b as u128);
    if var_a == 0 || var_b == 0 {
        return Err(MetricsError::ZeroVariance);
    }
    let num = n as i128 * sum_ab as i128 - sum_a as i128 * sum_b as i128;
    let num_f = num as f64;
    let ratio = (num_f * num_f) / (var_a as f64 * var_b as f64);
    let magnitude = ratio.sqrt().min(1.0);
    Ok(if num < 0 { -magnitude } else { magnitude })
}

/// One row of an evaluation: fidelity of the attacked image plus survival
/// of the mark it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr: f64,
    pub ber: f64,
    pub nc: f64,
}
