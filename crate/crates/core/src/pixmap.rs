//! Pixel-exact image values and lossless file I/O.
//!
//! [`ArgbImage`] holds 8-bit ARGB pixels, [`GrayImage`] 8-bit gray samples,
//! both row-major with the origin at the top left (`index = y * width + x`).
//! Hosts load from PNG (RGBA, or RGB which gains an opaque alpha). Marks
//! load from binary PGM (P5, maxval 255) or 8-bit grayscale PNG. Lossy or
//! otherwise unsupported containers are refused rather than converted: a
//! save followed by a load must reproduce every sample bit for bit.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PixmapError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("unsupported format for {path}: {reason}")]
    Unsupported { path: PathBuf, reason: String },
    #[error("corrupt image data in {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid dimensions {width}x{height} for a buffer of {len} pixels")]
    Dimensions { width: u32, height: u32, len: usize },
}

/// One channel of an ARGB pixel, in embedding order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Alpha,
    Red,
    Green,
    Blue,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Alpha, Channel::Red, Channel::Green, Channel::Blue];
}

/// A 32-bit pixel, one byte per channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Argb {
    pub a: u8,
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Argb {
    pub const fn new(a: u8, r: u8, g: u8, b: u8) -> Self {
        Argb { a, r, g, b }
    }

    /// All four channels set to `v`.
    pub const fn splat(v: u8) -> Self {
        Argb { a: v, r: v, g: v, b: v }
    }

    pub fn channel(self, c: Channel) -> u8 {
        match c {
            Channel::Alpha => self.a,
            Channel::Red => self.r,
            Channel::Green => self.g,
            Channel::Blue => self.b,
        }
    }

    pub fn with_channel(self, c: Channel, v: u8) -> Self {
        let mut p = self;
        match c {
            Channel::Alpha => p.a = v,
            Channel::Red => p.r = v,
            Channel::Green => p.g = v,
            Channel::Blue => p.b = v,
        }
        p
    }

    /// Channels in embedding order `[a, r, g, b]`.
    pub const fn to_array(self) -> [u8; 4] {
        [self.a, self.r, self.g, self.b]
    }

    pub const fn from_array(c: [u8; 4]) -> Self {
        Argb { a: c[0], r: c[1], g: c[2], b: c[3] }
    }

    /// Apply `f` to every channel.
    pub fn map(self, mut f: impl FnMut(u8) -> u8) -> Self {
        Argb { a: f(self.a), r: f(self.r), g: f(self.g), b: f(self.b) }
    }
}

macro_rules! image_common {
    ($name:ident, $pixel:ty) => {
        impl $name {
            /// Fails unless both dimensions are at least 1 and the buffer
            /// holds exactly `width * height` pixels.
            pub fn new(width: u32, height: u32, pixels: Vec<$pixel>) -> Result<Self, PixmapError> {
                let expect = (width as u64).checked_mul(height as u64);
                if width == 0 || height == 0 || expect != Some(pixels.len() as u64) {
                    return Err(PixmapError::Dimensions { width, height, len: pixels.len() });
                }
                Ok(Self { width, height, pixels })
            }

            /// Uniform image of the given fill value.
            pub fn filled(width: u32, height: u32, fill: $pixel) -> Result<Self, PixmapError> {
                let len = (width as u64).checked_mul(height as u64).unwrap_or(0) as usize;
                Self::new(width, height, vec![fill; len])
            }

            pub fn width(&self) -> u32 {
                self.width
            }

            pub fn height(&self) -> u32 {
                self.height
            }

            pub fn pixel_count(&self) -> usize {
                self.pixels.len()
            }

            pub fn pixels(&self) -> &[$pixel] {
                &self.pixels
            }

            /// Row-major index of `(x, y)`; origin top left.
            pub fn index(&self, x: u32, y: u32) -> usize {
                debug_assert!(x < self.width && y < self.height);
                y as usize * self.width as usize + x as usize
            }

            pub fn pixel(&self, x: u32, y: u32) -> $pixel {
                self.pixels[self.index(x, y)]
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, concat!(stringify!($name), "({}x{})"), self.width, self.height)
            }
        }
    };
}

/// 8-bit ARGB raster.
#[derive(Clone, PartialEq, Eq)]
pub struct ArgbImage {
    width: u32,
    height: u32,
    pixels: Vec<Argb>,
}

/// 8-bit grayscale raster.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

image_common!(ArgbImage, Argb);
image_common!(GrayImage, u8);

impl ArgbImage {
    pub(crate) fn pixels_mut(&mut self) -> &mut [Argb] {
        &mut self.pixels
    }

    pub(crate) fn replace_pixels(&mut self, pixels: Vec<Argb>) {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        self.pixels = pixels;
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, PixmapError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => PixmapError::NotFound(path.to_path_buf()),
        _ => PixmapError::Io { path: path.to_path_buf(), source: e },
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PixmapError> {
    fs::write(path, bytes).map_err(|e| PixmapError::Io { path: path.to_path_buf(), source: e })
}

/// Load a host image: PNG, 8-bit RGBA or RGB. RGB is promoted to ARGB with
/// an opaque alpha. Anything else (lossy containers included) is refused.
pub fn load_argb(path: impl AsRef<Path>) -> Result<ArgbImage, PixmapError> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    require_png(path, &bytes)?;
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| PixmapError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })?;
    let (width, height) = (decoded.width(), decoded.height());
    let pixels: Vec<Argb> = match decoded {
        image::DynamicImage::ImageRgba8(img) => img
            .pixels()
            .map(|p| Argb::new(p.0[3], p.0[0], p.0[1], p.0[2]))
            .collect(),
        image::DynamicImage::ImageRgb8(img) => img
            .pixels()
            .map(|p| Argb::new(255, p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => {
            return Err(PixmapError::Unsupported {
                path: path.to_path_buf(),
                reason: format!("{:?} color, need 8-bit RGB or RGBA", other.color()),
            })
        }
    };
    ArgbImage::new(width, height, pixels)
}

/// Save as RGBA PNG. Alpha is always written so a reload is bit-identical.
pub fn save_argb(image: &ArgbImage, path: impl AsRef<Path>) -> Result<(), PixmapError> {
    let path = path.as_ref();
    let mut raw = Vec::with_capacity(image.pixel_count() * 4);
    for p in image.pixels() {
        raw.extend_from_slice(&[p.r, p.g, p.b, p.a]);
    }
    image::save_buffer_with_format(
        path,
        &raw,
        image.width(),
        image.height(),
        image::ExtendedColorType::Rgba8,
        image::ImageFormat::Png,
    )
    .map_err(|e| image_error_to_io(path, e))
}

/// Load a mark image: binary PGM (P5, maxval 255) or 8-bit grayscale PNG.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage, PixmapError> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    if bytes.starts_with(b"P5") {
        return parse_pgm(path, &bytes);
    }
    if let [b'P', kind @ b'1'..=b'7', ..] = bytes.as_slice() {
        return Err(PixmapError::Unsupported {
            path: path.to_path_buf(),
            reason: format!("netpbm P{} variant, need binary PGM (P5)", *kind as char),
        });
    }
    require_png(path, &bytes)?;
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| PixmapError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })?;
    let (width, height) = (decoded.width(), decoded.height());
    match decoded {
        image::DynamicImage::ImageLuma8(img) => GrayImage::new(width, height, img.into_raw()),
        other => Err(PixmapError::Unsupported {
            path: path.to_path_buf(),
            reason: format!("{:?} color, need 8-bit grayscale", other.color()),
        }),
    }
}

/// Save a mark image. A `.png` extension selects 8-bit grayscale PNG, any
/// other path gets binary PGM (P5, maxval 255).
pub fn save_gray(image: &GrayImage, path: impl AsRef<Path>) -> Result<(), PixmapError> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false);
    if is_png {
        image::save_buffer_with_format(
            path,
            image.pixels(),
            image.width(),
            image.height(),
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )
        .map_err(|e| image_error_to_io(path, e))
    } else {
        let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
        out.extend_from_slice(image.pixels());
        write_file(path, &out)
    }
}

fn require_png(path: &Path, bytes: &[u8]) -> Result<(), PixmapError> {
    match image::guess_format(bytes) {
        Ok(image::ImageFormat::Png) => Ok(()),
        Ok(other) => Err(PixmapError::Unsupported {
            path: path.to_path_buf(),
            reason: format!("{:?} container, need PNG", other),
        }),
        Err(_) => Err(PixmapError::Unsupported {
            path: path.to_path_buf(),
            reason: "unrecognized container".into(),
        }),
    }
}

fn image_error_to_io(path: &Path, e: image::ImageError) -> PixmapError {
    let source = match e {
        image::ImageError::IoError(io) => io,
        other => io::Error::other(other.to_string()),
    };
    PixmapError::Io { path: path.to_path_buf(), source }
}

/// Binary PGM: "P5", whitespace-separated width, height, maxval (comments
/// starting with '#' allowed), one whitespace byte, then exactly
/// `width * height` raw samples.
fn parse_pgm(path: &Path, bytes: &[u8]) -> Result<GrayImage, PixmapError> {
    let corrupt = |reason: &str| PixmapError::Corrupt {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    let mut pos = 2; // past "P5"
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while !matches!(bytes.get(pos), None | Some(b'\n')) {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_digit() => break,
                Some(_) => return Err(corrupt("non-numeric header field")),
                None => return Err(corrupt("truncated header")),
            }
        }
        let start = pos;
        while matches!(bytes.get(pos), Some(b) if b.is_ascii_digit()) {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are ascii");
        *field = text.parse().map_err(|_| corrupt("header field out of range"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(PixmapError::Unsupported {
            path: path.to_path_buf(),
            reason: format!("PGM maxval {maxval}, need 255"),
        });
    }
    if width == 0 || height == 0 || width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(corrupt("zero or oversized dimensions"));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(corrupt("missing sample separator")),
    }
    let need = (width * height) as usize;
    let data = &bytes[pos..];
    if data.len() < need {
        return Err(corrupt("truncated sample data"));
    }
    if data.len() > need {
        return Err(corrupt("trailing data after samples"));
    }
    GrayImage::new(width as u32, height as u32, data.to_vec())
}
