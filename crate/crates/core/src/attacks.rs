//! Image degradations for robustness testing.
//!
//! Three families: clearing low bit planes, cropping to a kept rectangle
//! (the remainder filled with a constant), and keyed uniform noise. Each is
//! deterministic, so evaluation runs reproduce byte for byte. [`AttackSpec`]
//! gives them a parseable text form (`zero-lsb:k=2`, `crop:x=8,y=8,w=48,
//! h=48,fill=0`, `noise:amp=4,seed=7`) used by the command line.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::kernels;
use crate::keystream::Keystream;
use crate::pixmap::{Argb, ArgbImage};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AttackError {
    #[error("bit count {0} out of range, expected 0..=8")]
    BitsOutOfRange(u8),
    #[error("rectangle {rect} does not fit a {width}x{height} image")]
    RectOutOfBounds { rect: Rect, width: u32, height: u32 },
    #[error("cannot parse attack spec: {0}")]
    Parse(String),
}

/// Axis-aligned pixel rectangle, origin top-left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    /// Centered rectangle keeping roughly `fraction` of the area: each side
    /// is scaled by sqrt(fraction), rounded, floored at one pixel.
    pub fn centered_keep(width: u32, height: u32, fraction: f64) -> Rect {
        let scale = fraction.clamp(0.0, 1.0).sqrt();
        let side = |full: u32| (((full as f64) * scale).round() as u32).clamp(1, full);
        let (w, h) = (side(width), side(height));
        Rect { x: (width - w) / 2, y: (height - h) / 2, width: w, height: h }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}+{}+{}", self.width, self.height, self.x, self.y)
    }
}

fn mapped<F>(image: &ArgbImage, f: F) -> ArgbImage
where
    F: Fn(usize, Argb) -> Argb + Sync,
{
    let mut out = image.clone();
    out.replace_pixels(kernels::map_pixels(image.pixels(), f));
    out
}

/// Clear the `bits` lowest bits of every channel of every pixel. 0 is the
/// identity, 8 blanks the image.
pub fn zero_lsb(image: &ArgbImage, bits: u8) -> Result<ArgbImage, AttackError> {
    if bits > 8 {
        return Err(AttackError::BitsOutOfRange(bits));
    }
    let mask = (0xFF_u16 << bits) as u8;
    Ok(mapped(image, |_, p| p.map(|c| c & mask)))
}

/// Keep `keep` unchanged and overwrite everything outside it with `fill`.
/// The image size does not change, so keyed positions stay aligned.
pub fn crop(image: &ArgbImage, keep: Rect, fill: Argb) -> Result<ArgbImage, AttackError> {
    let (w, h) = (image.width(), image.height());
    let fits = keep.width >= 1
        && keep.height >= 1
        && keep.x.checked_add(keep.width).is_some_and(|r| r <= w)
        && keep.y.checked_add(keep.height).is_some_and(|b| b <= h);
    if !fits {
        return Err(AttackError::RectOutOfBounds { rect: keep, width: w, height: h });
    }
    Ok(mapped(image, |idx, p| {
        let (x, y) = ((idx % w as usize) as u32, (idx / w as usize) as u32);
        if keep.contains(x, y) {
            p
        } else {
            fill
        }
    }))
}

/// Add uniform noise in `-amplitude..=amplitude` to every channel,
/// clamped to 0..=255. Sample `4 * pixel_index + channel` (channel order
/// alpha, red, green, blue) of the keystream seeded with `seed` drives each
/// channel, so the result is one fixed image per (seed, amplitude).
pub fn add_noise(image: &ArgbImage, amplitude: u8, seed: u64) -> ArgbImage {
    if amplitude == 0 {
        return image.clone();
    }
    let span = 2 * amplitude as u64 + 1;
    mapped(image, |idx, p| {
        let base = 4 * idx as u64;
        let mut chan = 0u64;
        p.map(|c| {
            let raw = Keystream::value_at(seed, base + chan);
            chan += 1;
            let delta = (raw % span) as i16 - amplitude as i16;
            (c as i16 + delta).clamp(0, 255) as u8
        })
    })
}

/// A parsed, replayable attack description.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackSpec {
    ZeroLsb { bits: u8 },
    Crop { rect: Rect, fill: u8 },
    Noise { amplitude: u8, seed: u64 },
}

impl AttackSpec {
    pub fn apply(&self, image: &ArgbImage) -> Result<ArgbImage, AttackError> {
        match *self {
            AttackSpec::ZeroLsb { bits } => zero_lsb(image, bits),
            AttackSpec::Crop { rect, fill } => crop(image, rect, Argb::splat(fill)),
            AttackSpec::Noise { amplitude, seed } => Ok(add_noise(image, amplitude, seed)),
        }
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AttackSpec::ZeroLsb { bits } => write!(f, "zero-lsb:k={bits}"),
            AttackSpec::Crop { rect, fill } => write!(
                f,
                "crop:x={},y={},w={},h={},fill={}",
                rect.x, rect.y, rect.width, rect.height, fill
            ),
            AttackSpec::Noise { amplitude, seed } => write!(f, "noise:amp={amplitude},seed={seed}"),
        }
    }
}

impl FromStr for AttackSpec {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        if !["zero-lsb", "crop", "noise"].contains(&name) {
            return Err(AttackError::Parse(format!("unknown attack '{name}'")));
        }
        let mut params = Params::parse(rest)?;
        let spec = match name {
            "zero-lsb" => {
                let bits = take_u8(&mut params, "k")?;
                if bits > 8 {
                    return Err(AttackError::BitsOutOfRange(bits));
                }
                AttackSpec::ZeroLsb { bits }
            }
            "crop" => AttackSpec::Crop {
                rect: Rect {
                    x: params.take("x")? as u32,
                    y: params.take("y")? as u32,
                    width: params.take("w")? as u32,
                    height: params.take("h")? as u32,
                },
                fill: take_u8(&mut params, "fill")?,
            },
            _ => AttackSpec::Noise {
                amplitude: take_u8(&mut params, "amp")?,
                seed: params.take("seed")?,
            },
        };
        params.finish()?;
        Ok(spec)
    }
}

fn take_u8(params: &mut Params, name: &str) -> Result<u8, AttackError> {
    let v = params.take(name)?;
    u8::try_from(v).map_err(|_| AttackError::Parse(format!("parameter '{name}'={v} exceeds 255")))
}

struct Params(Vec<(String, u64)>);

impl Params {
    fn parse(rest: &str) -> Result<Params, AttackError> {
        let mut pairs = Vec::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| AttackError::Parse(format!("expected name=value, got '{part}'")))?;
            let value: u64 = v
                .parse()
                .map_err(|_| AttackError::Parse(format!("parameter '{k}' has non-numeric value '{v}'")))?;
            if pairs.iter().any(|(name, _)| name == k) {
                return Err(AttackError::Parse(format!("duplicate parameter '{k}'")));
            }
            pairs.push((k.to_string(), value));
        }
        Ok(Params(pairs))
    }

    fn take(&mut self, name: &str) -> Result<u64, AttackError> {
        let pos = self
            .0
            .iter()
            .position(|(k, _)| k == name)
            .ok_or_else(|| AttackError::Parse(format!("missing parameter '{name}'")))?;
        Ok(self.0.remove(pos).1)
    }

    fn finish(self) -> Result<(), AttackError> {
        match self.0.first() {
            None => Ok(()),
            Some((k, _)) => Err(AttackError::Parse(format!("unexpected parameter '{k}'"))),
        }
    }
}
