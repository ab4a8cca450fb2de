//! Key-driven deterministic randomness: seed derivation, the stream
//! generator, and keyed pixel-selection plans.
//!
//! All three layers are wire format. A key is hashed to a 64-bit seed with
//! FNV-1a; the seed drives a splitmix64 stream; a partial Fisher-Yates pass
//! over the pixel index range turns the stream into a selection plan. Equal
//! keys must yield identical plans on every platform, so the constants and
//! the exact mixing steps are pinned by golden-value tests. `j` is chosen as
//! `i + next % (n - i)`; the modulo bias is accepted (image index ranges are
//! vanishingly small against 2^64).
//!
//! Plans are prefix-consistent: for one key and domain, a shorter plan is a
//! prefix of a longer one. Extraction reads a header-sized plan first and
//! grows it once the payload size is known, selecting the same pixels.

use thiserror::Error;

const FNV_OFFSET_BASIS: u64 = 14695981039346656037;
const FNV_PRIME: u64 = 1099511628211;

const STREAM_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeyError {
    #[error("key must not be empty")]
    Empty,
    #[error("invalid hex key: {0}")]
    Hex(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("selection count {count} exceeds domain size {domain}")]
    CountExceedsDomain { count: usize, domain: usize },
}

/// Secret key bytes. Never empty.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    bytes: Vec<u8>,
}

impl SecretKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, KeyError> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(KeyError::Empty);
        }
        Ok(SecretKey { bytes })
    }

    /// Parse user input: a `hex:` prefix decodes the rest as hex bytes,
    /// anything else is taken as UTF-8.
    pub fn parse(s: &str) -> Result<Self, KeyError> {
        match s.strip_prefix("hex:") {
            Some(hexpart) => {
                let bytes = hex::decode(hexpart).map_err(|e| KeyError::Hex(e.to_string()))?;
                SecretKey::new(bytes)
            }
            None => SecretKey::new(s.as_bytes()),
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// FNV-1a hash of the key bytes; the seed for every derived stream.
    pub fn seed(&self) -> u64 {
        fnv1a_64(&self.bytes)
    }

    /// First 8 hex digits of the seed. Safe to log and report.
    pub fn fingerprint(&self) -> String {
        format!("{:016x}", self.seed())[..8].to_string()
    }
}

// Key bytes stay out of debug output.
impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SecretKey({})", self.fingerprint())
    }
}

pub fn fnv1a_64(data: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET_BASIS;
    for &byte in data {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// splitmix64 stream.
#[derive(Clone, Debug)]
pub struct Keystream {
    state: u64,
}

impl Keystream {
    pub fn from_seed(seed: u64) -> Self {
        Keystream { state: seed }
    }

    pub fn from_key(key: &SecretKey) -> Self {
        Keystream::from_seed(key.seed())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(STREAM_INCREMENT);
        mix(self.state)
    }

    /// `index`-th output of the stream seeded with `seed`, computed without
    /// stepping: the state after `i + 1` steps is `seed + (i + 1) * INC`.
    /// Lets per-sample consumers run in parallel yet match the sequential
    /// stream bit for bit.
    pub fn value_at(seed: u64, index: u64) -> u64 {
        mix(seed.wrapping_add(STREAM_INCREMENT.wrapping_mul(index.wrapping_add(1))))
    }
}

/// The first `count` entries of a keyed permutation of `0..domain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionPlan {
    domain: usize,
    indices: Vec<usize>,
}

impl SelectionPlan {
    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Keyed partial Fisher-Yates: distinct indices, uniform-ish (modulo bias
/// accepted), prefix-consistent in `count` for a fixed key and domain.
pub fn derive_permutation(
    key: &SecretKey,
    domain: usize,
    count: usize,
) -> Result<SelectionPlan, PlanError> {
    if count > domain {
        return Err(PlanError::CountExceedsDomain { count, domain });
    }
    let mut stream = Keystream::from_key(key);
    let mut arr: Vec<usize> = (0..domain).collect();
    for i in 0..count {
        let remaining = (domain - i) as u64;
        let j = i + (stream.next_u64() % remaining) as usize;
        arr.swap(i, j);
    }
    arr.truncate(count);
    Ok(SelectionPlan { domain, indices: arr })
}
