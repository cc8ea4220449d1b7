//! Deterministic simulated blockchain.
//!
//! Blocks are produced unconditionally every `delta_block` steps (depth
//! counting must keep working through empty blocks). Submitted
//! transactions join the pending queue with an inclusion time fixed by
//! the timing model at submission, and enter the first block at or
//! after that time, ordered by (submission step, sender, submission
//! sequence).

use thiserror::Error;

use crate::digest::{digest_bytes, digest_parts, Digest32};
use crate::merkle::{merkle_path, merkle_root, merkle_verify, MerklePath};
use crate::NodeId;

/// What a transaction does; the payload wire format depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxKind {
    Stake,
    Commit,
    Reveal,
    AlertTx,
}

impl TxKind {
    fn tag(&self) -> u8 {
        match self {
            TxKind::Stake => 0,
            TxKind::Commit => 1,
            TxKind::Reveal => 2,
            TxKind::AlertTx => 3,
        }
    }
}

/// A submitted transaction. `submitted_at` is stamped by the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub sender: NodeId,
    pub kind: TxKind,
    pub payload: Vec<u8>,
    pub submitted_at: u64,
}

impl Transaction {
    pub fn digest(&self) -> Digest32 {
        digest_parts(&[
            &self.sender.0.to_le_bytes(),
            &[self.kind.tag()],
            &self.payload,
            &self.submitted_at.to_le_bytes(),
        ])
    }
}

/// Block header; `digest()` is what the next header's `prev_hash` must
/// equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHeader {
    pub height: u64,
    pub prev_hash: Digest32,
    pub tx_root: Digest32,
    pub produced_at: u64,
}

impl BlockHeader {
    pub fn digest(&self) -> Digest32 {
        digest_parts(&[
            &self.height.to_le_bytes(),
            self.prev_hash.as_bytes(),
            self.tx_root.as_bytes(),
            &self.produced_at.to_le_bytes(),
        ])
    }
}

/// A produced block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub header: BlockHeader,
    pub txs: Vec<Transaction>,
}

/// When a submitted transaction becomes includable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimingModel {
    /// Inclusion exactly `delta_write` steps after submission.
    Lockstep { delta_write: u64 },
    /// Inclusion delay drawn once at submission, uniform in
    /// [1, delta_write], from a seeded sampler.
    BoundedDelay { delta_write: u64, delay_sampler_seed: u64 },
}

impl TimingModel {
    pub fn delta_write(&self) -> u64 {
        match self {
            TimingModel::Lockstep { delta_write }
            | TimingModel::BoundedDelay { delta_write, .. } => *delta_write,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("transaction is not included in any produced block")]
    NotIncluded,
    #[error("injected delay {delay} outside [1, {delta_write}]")]
    DelayOutOfRange { delay: u64, delta_write: u64 },
    #[error("operation requires the bounded-delay timing model")]
    WrongTimingModel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Pending {
    earliest_step: u64,
    seq: u64,
    tx: Transaction,
}

/// Merkle membership proof for one transaction in one block.
///
/// `leaf_count` (the block's transaction count) is part of the proof so
/// a verifier holding only the header can re-derive the tree shape,
/// including which levels were padded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionProof {
    pub height: u64,
    pub tx_index: usize,
    pub leaf_count: usize,
    pub authentication_path: Vec<Digest32>,
}

/// The simulated chain: hash-linked headers plus per-height transaction
/// lists, advanced by a single deterministic driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    delta_block: u64,
    timing_model: TimingModel,
    clock: u64,
    next_seq: u64,
    headers: Vec<BlockHeader>,
    blocks: Vec<Vec<Transaction>>,
    pending: Vec<Pending>,
}

impl ChainState {
    /// Fresh chain at step 0 with the genesis block already produced.
    ///
    /// # Panics
    /// If `delta_block` is zero.
    pub fn new(delta_block: u64, timing_model: TimingModel) -> Self {
        assert!(delta_block > 0, "delta_block must be positive");
        let genesis = BlockHeader {
            height: 0,
            prev_hash: Digest32::ZERO,
            tx_root: merkle_root(&[]),
            produced_at: 0,
        };
        ChainState {
            delta_block,
            timing_model,
            clock: 0,
            next_seq: 0,
            headers: vec![genesis],
            blocks: vec![Vec::new()],
            pending: Vec::new(),
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn delta_block(&self) -> u64 {
        self.delta_block
    }

    pub fn timing_model(&self) -> &TimingModel {
        &self.timing_model
    }

    /// Height of the most recently produced block.
    pub fn tip_height(&self) -> u64 {
        self.headers.last().unwrap().height
    }

    pub fn headers(&self) -> &[BlockHeader] {
        &self.headers
    }

    pub fn header_at(&self, height: u64) -> Option<&BlockHeader> {
        self.headers.get(height as usize)
    }

    pub fn block_txs(&self, height: u64) -> Option<&[Transaction]> {
        self.blocks.get(height as usize).map(|v| v.as_slice())
    }

    /// Header suffix strictly after `height`, as a verifier would
    /// receive it.
    pub fn headers_after(&self, height: u64) -> Vec<BlockHeader> {
        self.headers
            .iter()
            .filter(|h| h.height > height)
            .cloned()
            .collect()
    }

    /// Queues `tx` with its inclusion time fixed now; returns the tx
    /// stamped with the current step.
    pub fn submit(&mut self, mut tx: Transaction) -> Transaction {
        tx.submitted_at = self.clock;
        let delay = match &self.timing_model {
            TimingModel::Lockstep { delta_write } => *delta_write,
            TimingModel::BoundedDelay { delta_write, delay_sampler_seed } => {
                sample_delay(*delay_sampler_seed, self.next_seq, *delta_write)
            }
        };
        self.queue(tx.clone(), self.clock + delay);
        tx
    }

    /// Queues `tx` with an explicitly chosen delay, for adversarial
    /// delay schedules. Only meaningful under bounded delay, and the
    /// delay must respect the model's bound.
    pub fn submit_with_delay(
        &mut self,
        mut tx: Transaction,
        delay: u64,
    ) -> Result<Transaction, ChainError> {
        let delta_write = match &self.timing_model {
            TimingModel::BoundedDelay { delta_write, .. } => *delta_write,
            TimingModel::Lockstep { .. } => return Err(ChainError::WrongTimingModel),
        };
        if delay == 0 || delay > delta_write {
            return Err(ChainError::DelayOutOfRange { delay, delta_write });
        }
        tx.submitted_at = self.clock;
        self.queue(tx.clone(), self.clock + delay);
        Ok(tx)
    }

    fn queue(&mut self, tx: Transaction, earliest_step: u64) {
        self.pending.push(Pending { earliest_step, seq: self.next_seq, tx });
        self.next_seq += 1;
    }

    /// Advances the clock, producing one block per `delta_block`
    /// elapsed and draining ripe pending transactions into each.
    pub fn advance(&mut self, steps: u64) {
        for _ in 0..steps {
            self.clock += 1;
            if self.clock % self.delta_block == 0 {
                self.produce_block();
            }
        }
    }

    /// Advances until the clock reaches `step` (no-op if already past).
    pub fn advance_to(&mut self, step: u64) {
        if step > self.clock {
            self.advance(step - self.clock);
        }
    }

    fn produce_block(&mut self) {
        let now = self.clock;
        let mut ripe: Vec<Pending> = Vec::new();
        let mut waiting: Vec<Pending> = Vec::new();
        for p in self.pending.drain(..) {
            if p.earliest_step <= now {
                ripe.push(p);
            } else {
                waiting.push(p);
            }
        }
        self.pending = waiting;
        ripe.sort_by_key(|p| (p.tx.submitted_at, p.tx.sender, p.seq));
        let txs: Vec<Transaction> = ripe.into_iter().map(|p| p.tx).collect();

        let prev = self.headers.last().unwrap();
        let header = BlockHeader {
            height: prev.height + 1,
            prev_hash: prev.digest(),
            tx_root: merkle_root(&tx_digests(&txs)),
            produced_at: now,
        };
        self.headers.push(header);
        self.blocks.push(txs);
    }

    /// Membership proof for an included transaction.
    pub fn prove_inclusion(&self, tx: &Transaction) -> Result<InclusionProof, ChainError> {
        for (height, txs) in self.blocks.iter().enumerate() {
            if let Some(tx_index) = txs.iter().position(|t| t == tx) {
                let path = merkle_path(&tx_digests(txs), tx_index);
                return Ok(InclusionProof {
                    height: height as u64,
                    tx_index,
                    leaf_count: path.leaf_count,
                    authentication_path: path.siblings,
                });
            }
        }
        Err(ChainError::NotIncluded)
    }

    /// One line per produced block: `height,produced_at,tx_count,header_digest_hex`.
    pub fn trace_lines(&self) -> Vec<String> {
        self.headers
            .iter()
            .map(|h| {
                let tx_count = self.blocks[h.height as usize].len();
                format!("{},{},{},{}", h.height, h.produced_at, tx_count, h.digest().to_hex())
            })
            .collect()
    }

    /// Trace restricted to blocks produced at or before `step`.
    pub fn trace_lines_until(&self, step: u64) -> Vec<String> {
        self.headers
            .iter()
            .filter(|h| h.produced_at <= step)
            .map(|h| {
                let tx_count = self.blocks[h.height as usize].len();
                format!("{},{},{},{}", h.height, h.produced_at, tx_count, h.digest().to_hex())
            })
            .collect()
    }
}

fn tx_digests(txs: &[Transaction]) -> Vec<Digest32> {
    txs.iter().map(Transaction::digest).collect()
}

/// Per-transaction delay for the bounded-delay model: uniform over
/// [1, delta_write], derived from (seed, submission sequence) so replays
/// are bit-identical.
fn sample_delay(seed: u64, seq: u64, delta_write: u64) -> u64 {
    let d = digest_parts(&[b"delay", &seed.to_le_bytes(), &seq.to_le_bytes()]);
    let word = u64::from_le_bytes(d.as_bytes()[..8].try_into().unwrap());
    1 + word % delta_write
}

/// Checks that a transaction proof is consistent with a header.
pub fn verify_inclusion(tx: &Transaction, proof: &InclusionProof, header: &BlockHeader) -> bool {
    if proof.height != header.height {
        return false;
    }
    let path = MerklePath {
        index: proof.tx_index,
        leaf_count: proof.leaf_count,
        siblings: proof.authentication_path.clone(),
    };
    merkle_verify(&tx.digest(), &path, &header.tx_root)
}

/// True iff `headers` is a hash-linked extension of `checkpoint` with
/// strictly increasing heights. An empty list extends vacuously.
pub fn verify_header_chain(checkpoint: &BlockHeader, headers: &[BlockHeader]) -> bool {
    let Some(first) = headers.first() else {
        return true;
    };
    if first.prev_hash != checkpoint.digest() || first.height <= checkpoint.height {
        return false;
    }
    headers
        .windows(2)
        .all(|w| w[1].prev_hash == w[0].digest() && w[1].height > w[0].height)
}

/// Convenience sender-digest used by protocol payloads; kept here so
/// chain consumers share one definition.
pub fn node_tag(node: NodeId) -> Digest32 {
    digest_bytes(&node.0.to_le_bytes())
}
