//! JSON schema of `lsbmark evaluate`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub meta: Meta,
    pub cases: Vec<CaseRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Meta {
    pub key_fingerprint: String,
    pub host: Dims,
    pub watermark: Dims,
    pub detect_threshold: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Dims {
    pub width: u32,
    pub height: u32,
}

/// One grid cell: a method under one attack (`"none"` for the clean pass).
#[derive(Debug, Serialize, Deserialize)]
pub struct CaseRecord {
    pub method: String,
    pub attack: String,
    pub psnr_db: PsnrDb,
    pub ber: f64,
    pub nc: f64,
    pub detected: bool,
    pub header_valid: bool,
}

/// PSNR that serializes an unattacked identical image as the string
/// `"inf"`, since JSON has no infinity literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsnrDb(pub f64);

impl Serialize for PsnrDb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PsnrDb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(PsnrDb(v)),
            Raw::Text(s) if s == "inf" => Ok(PsnrDb(f64::INFINITY)),
            Raw::Text(s) => Err(D::Error::custom(format!("invalid psnr value '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_serializes_infinity_as_a_string() {
        assert_eq!(serde_json::to_string(&PsnrDb(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&PsnrDb(44.25)).unwrap(), "44.25");
        let back: PsnrDb = serde_json::from_str("\"inf\"").unwrap();
        assert!(back.0.is_infinite());
        let back: PsnrDb = serde_json::from_str("38.5").unwrap();
        assert_eq!(back, PsnrDb(38.5));
        assert!(serde_json::from_str::<PsnrDb>("\"huge\"").is_err());
    }
}
