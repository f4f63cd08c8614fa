//! Minimal HMAC-SHA256 signed bearer tokens in the standard three-part
//! `base64url(header).base64url(claims).base64url(signature)` form, with a
//! device id claim, issue time, and expiry.

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use hmac::{Hmac, KeyInit, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenClaims {
    pub device_id: String,
    /// Issue time, UNIX seconds.
    pub iat: i64,
    /// Expiry, UNIX seconds.
    pub exp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AuthFailure {
    #[error("token is structurally malformed")]
    Malformed,
    #[error("token signature does not verify")]
    BadSignature,
    #[error("token is expired")]
    Expired,
}

fn sign(secret: &[u8], signing_input: &str) -> Vec<u8> {
    let mut mac = <HmacSha256 as KeyInit>::new_from_slice(secret)
        .expect("HMAC accepts any key length");
    mac.update(signing_input.as_bytes());
    mac.finalize().into_bytes().to_vec()
}

/// Issues a signed token binding `device_id` until `now + ttl_seconds`.
pub fn issue_token(secret: &[u8], device_id: &str, now: f64, ttl_seconds: f64) -> String {
    let header = URL_SAFE_NO_PAD.encode(br#"{"alg":"HS256","typ":"JWT"}"#);
    let claims = TokenClaims {
        device_id: device_id.to_string(),
        iat: now.floor() as i64,
        exp: (now + ttl_seconds).floor() as i64,
    };
    let payload =
        URL_SAFE_NO_PAD.encode(serde_json::to_vec(&claims).expect("claims serialize"));
    let signing_input = format!("{header}.{payload}");
    let signature = URL_SAFE_NO_PAD.encode(sign(secret, &signing_input));
    format!("{signing_input}.{signature}")
}

/// Verifies structure, signature, and expiry; returns the claims.
pub fn validate_token(secret: &[u8], token: &str, now: f64) -> Result<TokenClaims, AuthFailure> {
    let mut parts = token.split('.');
    let (header, payload, signature) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(h), Some(p), Some(s), None) if !h.is_empty() && !p.is_empty() => (h, p, s),
        _ => return Err(AuthFailure::Malformed),
    };
    let signing_input = format!("{header}.{payload}");
    let presented = URL_SAFE_NO_PAD
        .decode(signature)
        .map_err(|_| AuthFailure::Malformed)?;
    let expected = sign(secret, &signing_input);
    // Length check first; comparison below is not secret-dependent in a way
    // that matters for a simulator.
    if presented.len() != expected.len()
        || presented
            .iter()
            .zip(expected.iter())
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            != 0
    {
        return Err(AuthFailure::BadSignature);
    }
    let claims_bytes = URL_SAFE_NO_PAD
        .decode(payload)
        .map_err(|_| AuthFailure::Malformed)?;
    let claims: TokenClaims =
        serde_json::from_slice(&claims_bytes).map_err(|_| AuthFailure::Malformed)?;
    if claims.device_id.is_empty() {
        return Err(AuthFailure::Malformed);
    }
    if (now.floor() as i64) >= claims.exp {
        return Err(AuthFailure::Expired);
    }
    Ok(claims)
}
