//! Mock trusted-hardware device: sealed timed commitments opened only
//! against a proof of publication.
//!
//! The device never consults a clock; block depth on its designated
//! chain is its only notion of time. A sealed nonce leaves the device
//! exclusively through [`TeeState::unseal_after`] after a header chain
//! from the device's checkpoint shows the commitment buried under at
//! least `n_commit` further blocks.

use hmac::{Hmac, KeyInit, Mac};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::Sha256;
use thiserror::Error;

use crate::chain::{verify_header_chain, verify_inclusion, BlockHeader, Transaction, TxKind};
use crate::digest::{digest_parts, Digest32};

/// One sealed commitment held inside a device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedRecord {
    pub message_m: Vec<u8>,
    pub nonce_r: [u8; 32],
    pub n_commit: u64,
    pub handle_gamma: Digest32,
}

/// Commitment handle: `digest(m ‖ r ‖ n_commit)`.
pub fn commitment_handle(m: &[u8], r: &[u8; 32], n_commit: u64) -> Digest32 {
    digest_parts(&[m, r, &n_commit.to_le_bytes()])
}

/// Proof of publication: a header chain extending the device's
/// checkpoint plus an inclusion proof for the commit transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoPProof {
    pub headers: Vec<BlockHeader>,
    pub commit_tx: Transaction,
    pub inclusion: crate::chain::InclusionProof,
    /// 0-based position of the inclusion block within `headers`.
    pub inclusion_height_index: usize,
}

/// Device-signed statement binding an opened commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attestation {
    pub gamma: Digest32,
    pub n_commit: u64,
    pub message_m: Vec<u8>,
    pub nonce_r: [u8; 32],
    pub signature: Vec<u8>,
}

impl Attestation {
    /// Canonical byte encoding of the signed payload.
    pub fn payload_bytes(&self) -> Vec<u8> {
        encode_payload(&self.gamma, self.n_commit, &self.message_m, &self.nonce_r)
    }

    /// Serializes to `payload_len ‖ payload ‖ sig_len ‖ sig`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload_bytes();
        let mut out = Vec::with_capacity(16 + payload.len() + self.signature.len());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&(self.signature.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.signature);
        out
    }

    /// Parses [`Attestation::to_bytes`] output; `None` on any
    /// malformation.
    pub fn from_bytes(bytes: &[u8]) -> Option<(Attestation, usize)> {
        let (payload, used_p) = read_chunk(bytes)?;
        let (gamma, n_commit, message_m, nonce_r) = decode_payload(payload)?;
        let (signature, used_s) = read_chunk(&bytes[used_p..])?;
        Some((
            Attestation {
                gamma,
                n_commit,
                message_m,
                nonce_r,
                signature: signature.to_vec(),
            },
            used_p + used_s,
        ))
    }
}

fn read_chunk(bytes: &[u8]) -> Option<(&[u8], usize)> {
    if bytes.len() < 8 {
        return None;
    }
    let len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    let end = 8usize.checked_add(len)?;
    if bytes.len() < end {
        return None;
    }
    Some((&bytes[8..end], end))
}

fn encode_payload(gamma: &Digest32, n_commit: u64, m: &[u8], r: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 + 8 + m.len() + 32);
    out.extend_from_slice(gamma.as_bytes());
    out.extend_from_slice(&n_commit.to_le_bytes());
    out.extend_from_slice(&(m.len() as u64).to_le_bytes());
    out.extend_from_slice(m);
    out.extend_from_slice(r);
    out
}

fn decode_payload(bytes: &[u8]) -> Option<(Digest32, u64, Vec<u8>, [u8; 32])> {
    if bytes.len() < 48 {
        return None;
    }
    let gamma = Digest32(bytes[..32].try_into().unwrap());
    let n_commit = u64::from_le_bytes(bytes[32..40].try_into().unwrap());
    let m_len = u64::from_le_bytes(bytes[40..48].try_into().unwrap()) as usize;
    let rest = &bytes[48..];
    if rest.len() != m_len.checked_add(32)? {
        return None;
    }
    let message_m = rest[..m_len].to_vec();
    let nonce_r: [u8; 32] = rest[m_len..].try_into().unwrap();
    Some((gamma, n_commit, message_m, nonce_r))
}

/// Signature scheme used for attestations. The default build keys a
/// MAC shared with the contract's registry; a real deployment would
/// drop in an asymmetric signature here.
pub trait AttestationScheme {
    fn sign(&self, payload: &[u8]) -> Vec<u8>;
    fn verify(&self, payload: &[u8], signature: &[u8]) -> bool;
}

/// HMAC-SHA256 under a per-device key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacScheme {
    key: [u8; 32],
}

impl MacScheme {
    pub fn new(key: [u8; 32]) -> Self {
        MacScheme { key }
    }
}

impl AttestationScheme for MacScheme {
    fn sign(&self, payload: &[u8]) -> Vec<u8> {
        let mut mac = Hmac::<Sha256>::new_from_slice(&self.key).expect("any key length works");
        mac.update(payload);
        mac.finalize().into_bytes().to_vec()
    }

    fn verify(&self, payload: &[u8], signature: &[u8]) -> bool {
        let mut mac = Hmac::<Sha256>::new_from_slice(&self.key).expect("any key length works");
        mac.update(payload);
        mac.verify_slice(signature).is_ok()
    }
}

/// True iff the signature is genuine under `scheme` and the opened
/// values re-hash to the claimed handle (the binding check).
pub fn verify_attestation(scheme: &impl AttestationScheme, attestation: &Attestation) -> bool {
    scheme.verify(&attestation.payload_bytes(), &attestation.signature)
        && commitment_handle(
            &attestation.message_m,
            &attestation.nonce_r,
            attestation.n_commit,
        ) == attestation.gamma
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TeeError {
    #[error("no sealed record under this handle")]
    UnknownHandle,
    #[error("headers do not extend the device checkpoint")]
    BadHeaderChain,
    #[error("commit transaction not proven inside the presented headers")]
    NotIncluded,
    #[error("only {actual} of the required {required} blocks follow the inclusion block")]
    InsufficientDepth { required: u64, actual: u64 },
}

/// The device: sealed records, a monotone chain checkpoint, and the
/// attestation key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeeState {
    checkpoint: BlockHeader,
    sealed: std::collections::BTreeMap<Digest32, SealedRecord>,
    scheme: MacScheme,
    nonce_rng: ChaCha20Rng,
    leaky: bool,
}

impl TeeState {
    /// A device trusting `checkpoint`, drawing nonces from `rng_seed`,
    /// attesting under `device_key`.
    pub fn new(checkpoint: BlockHeader, rng_seed: u64, device_key: [u8; 32]) -> Self {
        TeeState {
            checkpoint,
            sealed: std::collections::BTreeMap::new(),
            scheme: MacScheme::new(device_key),
            nonce_rng: ChaCha20Rng::seed_from_u64(rng_seed),
            leaky: false,
        }
    }

    /// A deliberately broken device that hands out nonces on demand;
    /// exists only to demonstrate the early-reveal bribery attack.
    pub fn new_leaky(checkpoint: BlockHeader, rng_seed: u64, device_key: [u8; 32]) -> Self {
        TeeState { leaky: true, ..Self::new(checkpoint, rng_seed, device_key) }
    }

    pub fn checkpoint(&self) -> &BlockHeader {
        &self.checkpoint
    }

    pub fn sealed_count(&self) -> usize {
        self.sealed.len()
    }

    /// The contract-registered verifier for this device's attestations.
    pub fn verifier(&self) -> MacScheme {
        self.scheme.clone()
    }

    /// Seals `m` under a fresh nonce; returns the public handle.
    pub fn seal(&mut self, m: &[u8], n_commit: u64) -> Digest32 {
        let mut nonce = [0u8; 32];
        self.nonce_rng.fill_bytes(&mut nonce);
        let handle = commitment_handle(m, &nonce, n_commit);
        self.sealed.insert(
            handle,
            SealedRecord {
                message_m: m.to_vec(),
                nonce_r: nonce,
                n_commit,
                handle_gamma: handle,
            },
        );
        handle
    }

    /// Opens a sealed record if the proof shows its commit transaction
    /// buried under at least `n_commit` blocks past the checkpoint; on
    /// success the checkpoint advances to the last presented header.
    /// On any failure the device state is unchanged.
    pub fn unseal_after(
        &mut self,
        gamma: &Digest32,
        pop: &PoPProof,
    ) -> Result<(Vec<u8>, [u8; 32], Attestation), TeeError> {
        let record = self.sealed.get(gamma).ok_or(TeeError::UnknownHandle)?;

        if pop.headers.is_empty() || !verify_header_chain(&self.checkpoint, &pop.headers) {
            return Err(TeeError::BadHeaderChain);
        }
        let Some(inclusion_header) = pop.headers.get(pop.inclusion_height_index) else {
            return Err(TeeError::NotIncluded);
        };
        let carries_handle = pop.commit_tx.kind == TxKind::Commit
            && pop.commit_tx.payload == gamma.as_bytes().to_vec();
        if !carries_handle || !verify_inclusion(&pop.commit_tx, &pop.inclusion, inclusion_header) {
            return Err(TeeError::NotIncluded);
        }
        let blocks_after = (pop.headers.len() - 1 - pop.inclusion_height_index) as u64;
        if blocks_after < record.n_commit {
            return Err(TeeError::InsufficientDepth {
                required: record.n_commit,
                actual: blocks_after,
            });
        }

        let attestation = Attestation {
            gamma: *gamma,
            n_commit: record.n_commit,
            message_m: record.message_m.clone(),
            nonce_r: record.nonce_r,
            signature: self.scheme.sign(&encode_payload(
                gamma,
                record.n_commit,
                &record.message_m,
                &record.nonce_r,
            )),
        };
        let result = (record.message_m.clone(), record.nonce_r, attestation);
        self.checkpoint = pop.headers.last().unwrap().clone();
        Ok(result)
    }

    /// Leaky-variant backdoor: the nonce on demand, no proof needed.
    /// Always `None` on a standard device.
    pub fn expose_nonce(&self, gamma: &Digest32) -> Option<[u8; 32]> {
        if !self.leaky {
            return None;
        }
        self.sealed.get(gamma).map(|r| r.nonce_r)
    }
}
