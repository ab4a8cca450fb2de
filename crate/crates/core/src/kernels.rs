//! Data-parallel inner loops and their sequential twins.
//!
//! Every kernel exists in a `_seq` and (with the `parallel` feature) a
//! `_par` form plus an undecorated dispatcher the rest of the crate calls.
//! Accumulating kernels work in integer moments, so the rayon reduction
//! order cannot perturb results: parallel and sequential runs are
//! bit-identical, which the tests here assert. The module is public only so
//! the bench suite can time both paths in one binary.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::pixmap::Argb;

// Below this many elements rayon tasks cost more than they save.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 4096;

/// Sum of squared channel differences, all four channels.
pub fn sq_diff_sum_argb(a: &[Argb], b: &[Argb]) -> u64 {
    #[cfg(feature = "parallel")]
    return sq_diff_sum_argb_par(a, b);
    #[cfg(not(feature = "parallel"))]
    sq_diff_sum_argb_seq(a, b)
}

pub fn sq_diff_sum_argb_seq(a: &[Argb], b: &[Argb]) -> u64 {
    a.iter().zip(b).map(|(x, y)| pixel_sq_diff(*x, *y)).sum()
}

#[cfg(feature = "parallel")]
pub fn sq_diff_sum_argb_par(a: &[Argb], b: &[Argb]) -> u64 {
    a.par_iter()
        .zip_eq(b)
        .with_min_len(MIN_CHUNK)
        .map(|(x, y)| pixel_sq_diff(*x, *y))
        .sum()
}

fn pixel_sq_diff(x: Argb, y: Argb) -> u64 {
    x.to_array()
        .iter()
        .zip(y.to_array())
        .map(|(&c, d)| {
            let delta = c as i64 - d as i64;
            (delta * delta) as u64
        })
        .sum()
}

/// Sum of squared sample differences for gray data.
pub fn sq_diff_sum_gray(a: &[u8], b: &[u8]) -> u64 {
    #[cfg(feature = "parallel")]
    return sq_diff_sum_gray_par(a, b);
    #[cfg(not(feature = "parallel"))]
    sq_diff_sum_gray_seq(a, b)
}

pub fn sq_diff_sum_gray_seq(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let delta = x as i64 - y as i64;
            (delta * delta) as u64
        })
        .sum()
}

#[cfg(feature = "parallel")]
pub fn sq_diff_sum_gray_par(a: &[u8], b: &[u8]) -> u64 {
    a.par_iter()
        .zip_eq(b)
        .with_min_len(MIN_CHUNK)
        .map(|(&x, &y)| {
            let delta = x as i64 - y as i64;
            (delta * delta) as u64
        })
        .sum()
}

/// Number of differing bits between two equal-length byte slices.
pub fn bit_diff_count(a: &[u8], b: &[u8]) -> u64 {
    #[cfg(feature = "parallel")]
    return bit_diff_count_par(a, b);
    #[cfg(not(feature = "parallel"))]
    bit_diff_count_seq(a, b)
}

pub fn bit_diff_count_seq(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x ^ y).count_ones() as u64)
        .sum()
}

#[cfg(feature = "parallel")]
pub fn bit_diff_count_par(a: &[u8], b: &[u8]) -> u64 {
    a.par_iter()
        .zip_eq(b)
        .with_min_len(MIN_CHUNK)
        .map(|(&x, &y)| (x ^ y).count_ones() as u64)
        .sum()
}

/// Raw integer moments of a sample pair, enough to form a Pearson
/// correlation exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CorrMoments {
    pub sum_a: u64,
    pub sum_b: u64,
    pub sum_aa: u64,
    pub sum_bb: u64,
    pub sum_ab: u64,
}

impl CorrMoments {
    fn push(mut self, a: u8, b: u8) -> Self {
        let (a, b) = (a as u64, b as u64);
        self.sum_a += a;
        self.sum_b += b;
        self.sum_aa += a * a;
        self.sum_bb += b * b;
        self.sum_ab += a * b;
        self
    }

    #[cfg(feature = "parallel")]
    fn merge(self, other: Self) -> Self {
        CorrMoments {
            sum_a: self.sum_a + other.sum_a,
            sum_b: self.sum_b + other.sum_b,
            sum_aa: self.sum_aa + other.sum_aa,
            sum_bb: self.sum_bb + other.sum_bb,
            sum_ab: self.sum_ab + other.sum_ab,
        }
    }
}

pub fn corr_moments(a: &[u8], b: &[u8]) -> CorrMoments {
    #[cfg(feature = "parallel")]
    return corr_moments_par(a, b);
    #[cfg(not(feature = "parallel"))]
    corr_moments_seq(a, b)
}

pub fn corr_moments_seq(a: &[u8], b: &[u8]) -> CorrMoments {
    a.iter()
        .zip(b)
        .fold(CorrMoments::default(), |m, (&x, &y)| m.push(x, y))
}

#[cfg(feature = "parallel")]
pub fn corr_moments_par(a: &[u8], b: &[u8]) -> CorrMoments {
    a.par_iter()
        .zip_eq(b)
        .with_min_len(MIN_CHUNK)
        .fold(CorrMoments::default, |m, (&x, &y)| m.push(x, y))
        .reduce(CorrMoments::default, CorrMoments::merge)
}

/// Index-aware per-pixel map; the attack transforms are built on this.
pub fn map_pixels<F>(pixels: &[Argb], f: F) -> Vec<Argb>
where
    F: Fn(usize, Argb) -> Argb + Sync,
{
    #[cfg(feature = "parallel")]
    return map_pixels_par(pixels, f);
    #[cfg(not(feature = "parallel"))]
    map_pixels_seq(pixels, f)
}

pub fn map_pixels_seq<F>(pixels: &[Argb], f: F) -> Vec<Argb>
where
    F: Fn(usize, Argb) -> Argb,
{
    pixels.iter().enumerate().map(|(i, &p)| f(i, p)).collect()
}

#[cfg(feature = "parallel")]
pub fn map_pixels_par<F>(pixels: &[Argb], f: F) -> Vec<Argb>
where
    F: Fn(usize, Argb) -> Argb + Sync,
{
    pixels
        .par_iter()
        .enumerate()
        .with_min_len(MIN_CHUNK)
        .map(|(i, &p)| f(i, p))
        .collect()
}

/// Gather pixels by plan slot and map each to a byte; payload reads use
/// this. Output order follows `slots`.
pub fn gather_bytes<F>(pixels: &[Argb], slots: &[usize], f: F) -> Vec<u8>
where
    F: Fn(Argb) -> u8 + Sync,
{
    #[cfg(feature = "parallel")]
    return gather_bytes_par(pixels, slots, f);
    #[cfg(not(feature = "parallel"))]
    gather_bytes_seq(pixels, slots, f)
}

pub fn gather_bytes_seq<F>(pixels: &[Argb], slots: &[usize], f: F) -> Vec<u8>
where
    F: Fn(Argb) -> u8,
{
    slots.iter().map(|&s| f(pixels[s])).collect()
}

#[cfg(feature = "parallel")]
pub fn gather_bytes_par<F>(pixels: &[Argb], slots: &[usize], f: F) -> Vec<u8>
where
    F: Fn(Argb) -> u8 + Sync,
{
    slots
        .par_iter()
        .with_min_len(MIN_CHUNK)
        .map(|&s| f(pixels[s]))
        .collect()
}
