//! Field-level encryption for GPS coordinates: AES-256-CBC with PKCS#7
//! padding over the `lat,lon` decimal string, a fresh random IV per record,
//! and a key id so deployments can rotate keys.

use aes::cipher::block_padding::Pkcs7;
use aes::cipher::{BlockModeDecrypt, BlockModeEncrypt, KeyIvInit};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde_json::{json, Value};

use crate::AgentError;

type Aes256CbcEnc = cbc::Encryptor<aes::Aes256>;
type Aes256CbcDec = cbc::Decryptor<aes::Aes256>;

#[derive(Debug, Clone)]
pub struct GpsKey {
    pub key: [u8; 32],
    pub key_id: String,
}

impl GpsKey {
    pub fn new(key: [u8; 32], key_id: &str) -> Self {
        Self {
            key,
            key_id: key_id.to_string(),
        }
    }
}

/// Encrypts a coordinate pair into the GPS payload document
/// `{iv, ciphertext, key_id}` (base64 fields).
pub fn encrypt_gps(key: &GpsKey, lat: f64, lon: f64, iv: [u8; 16]) -> Value {
    let plaintext = format!("{lat},{lon}");
    let ciphertext = Aes256CbcEnc::new(&key.key.into(), &iv.into())
        .encrypt_padded_vec::<Pkcs7>(plaintext.as_bytes());
    json!({
        "iv": BASE64.encode(iv),
        "ciphertext": BASE64.encode(ciphertext),
        "key_id": key.key_id,
    })
}

/// Decrypts a GPS payload back to the coordinate pair. Fails on wrong key,
/// damaged ciphertext, bad padding, or a malformed plaintext.
pub fn decrypt_gps(key: &GpsKey, payload: &Value) -> Result<(f64, f64), AgentError> {
    let field = |name: &str| -> Result<Vec<u8>, AgentError> {
        let raw = payload
            .get(name)
            .and_then(Value::as_str)
            .ok_or_else(|| AgentError::Crypto(format!("payload lacks `{name}`")))?;
        BASE64
            .decode(raw)
            .map_err(|_| AgentError::Crypto(format!("`{name}` is not base64")))
    };
    let iv: [u8; 16] = field("iv")?
        .try_into()
        .map_err(|_| AgentError::Crypto("iv must be 16 bytes".into()))?;
    let ciphertext = field("ciphertext")?;
    if ciphertext.is_empty() || ciphertext.len() % 16 != 0 {
        return Err(AgentError::Crypto("ciphertext must be whole AES blocks".into()));
    }
    let plaintext = Aes256CbcDec::new(&key.key.into(), &iv.into())
        .decrypt_padded_vec::<Pkcs7>(&ciphertext)
        .map_err(|_| AgentError::Crypto("decryption failed (key or padding)".into()))?;
    let text = String::from_utf8(plaintext)
        .map_err(|_| AgentError::Crypto("plaintext is not UTF-8".into()))?;
    let (lat, lon) = text
        .split_once(',')
        .ok_or_else(|| AgentError::Crypto("plaintext is not `lat,lon`".into()))?;
    let lat: f64 = lat
        .parse()
        .map_err(|_| AgentError::Crypto("latitude does not parse".into()))?;
    let lon: f64 = lon
        .parse()
        .map_err(|_| AgentError::Crypto("longitude does not parse".into()))?;
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(AgentError::Crypto(format!(
            "coordinates ({lat}, {lon}) out of range"
        )));
    }
    Ok((lat, lon))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> GpsKey {
        GpsKey::new([7u8; 32], "k1")
    }

    #[test]
    fn round_trips_exactly() {
        let payload = encrypt_gps(&key(), 40.76, -111.89, [3u8; 16]);
        let (lat, lon) = decrypt_gps(&key(), &payload).unwrap();
        assert_eq!(lat, 40.76);
        assert_eq!(lon, -111.89);
    }

    #[test]
    fn distinct_ivs_give_distinct_ciphertexts() {
        let a = encrypt_gps(&key(), 40.76, -111.89, [1u8; 16]);
        let b = encrypt_gps(&key(), 40.76, -111.89, [2u8; 16]);
        assert_ne!(a["ciphertext"], b["ciphertext"]);
        assert_ne!(a["iv"], b["iv"]);
    }

    #[test]
    fn payload_contains_no_plaintext_coordinates() {
        let payload = encrypt_gps(&key(), 40.76, -111.89, [9u8; 16]);
        let serialized = serde_json::to_string(&payload).unwrap();
        assert!(!serialized.contains("40.76"));
        assert!(!serialized.contains("111.89"));
    }

    #[test]
    fn wrong_key_and_corruption_fail() {
        let payload = encrypt_gps(&key(), 40.76, -111.89, [3u8; 16]);
        let other = GpsKey::new([8u8; 32], "k2");
        assert!(decrypt_gps(&other, &payload).is_err());

        let mut corrupted = payload.clone();
        let mut ct = BASE64
            .decode(corrupted["ciphertext"].as_str().unwrap())
            .unwrap();
        ct[0] ^= 0xFF;
        corrupted["ciphertext"] = Value::String(BASE64.encode(ct));
        assert!(decrypt_gps(&key(), &corrupted).is_err());
    }

    #[test]
    fn extreme_coordinates_round_trip() {
        for (lat, lon) in [(90.0, 180.0), (-90.0, -180.0), (0.0, 0.0), (40.760123456789, -111.891234567891)] {
            let payload = encrypt_gps(&key(), lat, lon, [5u8; 16]);
            assert_eq!(decrypt_gps(&key(), &payload).unwrap(), (lat, lon));
        }
    }
}
