//! Blind spatial-domain image watermarking.
//!
//! A grayscale mark is hidden in the low bits of an ARGB host image at pixel
//! positions chosen by a secret key. Two embedding schemes are provided:
//!
//! * **Modified**: one whole mark byte per selected pixel, two bits in the
//!   low pair of each of the four channels (8 bits per 32-bit pixel).
//! * **Classic**: the payload bitstream spread three bits per selected pixel
//!   over the red, green and blue LSBs (alpha untouched).
//!
//! Every embedding starts with a 64-bit header (magic, mark dimensions,
//! checksum), so extraction needs nothing but the key. The [`attacks`]
//! module damages marked images in controlled ways and [`metrics`] scores
//! the result; together they drive the evaluation harness in the companion
//! CLI crate.
//!
//! The crate is data-parallel by default via the `parallel` feature. With
//! the feature off every operation runs on a single thread; results are
//! bit-identical either way, which the test suite asserts.

pub mod attacks;
pub mod codec;
#[doc(hidden)]
pub mod kernels;
pub mod keystream;
pub mod metrics;
pub mod pixmap;

pub use codec::{detect, embed, extract, Detection, ExtractionResult, Method};
pub use keystream::SecretKey;
pub use pixmap::{Argb, ArgbImage, GrayImage};
