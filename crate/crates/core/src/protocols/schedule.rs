//! Slot schedules for the sequential protocol: who may alert in which
//! slot, rotated per round either lexicographically or by a hash-based
//! verifiable shuffle.

use crate::digest::{digest_parts, Digest32};
use crate::NodeId;

/// Assignment of slots `1..=n` to nodes for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSchedule {
    pi: Vec<NodeId>,
    round_index: u64,
}

impl SlotSchedule {
    /// Node `i` in slot `i+1`.
    pub fn identity(n: usize) -> Self {
        SlotSchedule { pi: NodeId::committee(n), round_index: 0 }
    }

    /// Builds from an explicit permutation of the committee.
    ///
    /// # Panics
    /// If `pi` is not a bijection on the `pi.len()` default node ids.
    pub fn from_permutation(pi: Vec<NodeId>, round_index: u64) -> Self {
        let mut seen = vec![false; pi.len()];
        for id in &pi {
            let idx = id.0 as usize;
            assert!(
                idx < pi.len() && !seen[idx],
                "schedule must be a bijection on the committee"
            );
            seen[idx] = true;
        }
        SlotSchedule { pi, round_index }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// Node assigned to 1-indexed slot `s`.
    ///
    /// # Panics
    /// If `s` is outside `1..=len()`.
    pub fn node_at(&self, s: usize) -> NodeId {
        assert!((1..=self.pi.len()).contains(&s), "slot {s} out of range");
        self.pi[s - 1]
    }

    /// 1-indexed slot of `node`, if scheduled.
    pub fn slot_of(&self, node: NodeId) -> Option<usize> {
        self.pi.iter().position(|n| *n == node).map(|i| i + 1)
    }

    pub fn round_index(&self) -> u64 {
        self.round_index
    }

    pub fn permutation(&self) -> &[NodeId] {
        &self.pi
    }
}

/// Lexicographic successor of the schedule's permutation (rightmost
/// ascent rule); the maximal permutation wraps back to the identity.
/// The round index always increments.
pub fn next_permutation(schedule: &SlotSchedule) -> SlotSchedule {
    let mut pi = schedule.pi.clone();
    let round_index = schedule.round_index + 1;

    // Rightmost k with pi[k] < pi[k+1]; none means pi is the maximum.
    let Some(k) = pi.windows(2).rposition(|w| w[0] < w[1]) else {
        pi.sort();
        return SlotSchedule { pi, round_index };
    };
    let l = pi.iter().rposition(|v| *v > pi[k]).unwrap();
    pi.swap(k, l);
    pi[k + 1..].reverse();
    SlotSchedule { pi, round_index }
}

/// Proof that a shuffled schedule was derived from the committed seed:
/// the seed commitment plus the exact random words that drove the
/// shuffle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrfProof {
    pub commitment: Digest32,
    pub transcript: Vec<u64>,
}

/// Public commitment registered for a schedule seed.
pub fn vrf_commitment(sk: &[u8]) -> Digest32 {
    digest_parts(&[b"vrf-commit", sk])
}

fn vrf_word(sk: &[u8], round: u64, i: usize) -> u64 {
    let d = digest_parts(&[b"vrf-word", sk, &round.to_le_bytes(), &(i as u64).to_le_bytes()]);
    u64::from_le_bytes(d.as_bytes()[..8].try_into().unwrap())
}

fn shuffle_with(transcript: &[u64], n: usize) -> Option<Vec<NodeId>> {
    if transcript.len() != n.saturating_sub(1) {
        return None;
    }
    let mut pi = NodeId::committee(n);
    for (word_idx, i) in (1..n).rev().enumerate() {
        let j = (transcript[word_idx] % (i as u64 + 1)) as usize;
        pi.swap(i, j);
    }
    Some(pi)
}

/// Deterministic per-round shuffle driven by `digest(sk ‖ round)` words
/// (a Fisher–Yates pass), with a replayable proof.
pub fn vrf_schedule(sk: &[u8], round: u64, n: usize) -> (SlotSchedule, VrfProof) {
    let transcript: Vec<u64> =
        (0..n.saturating_sub(1)).map(|i| vrf_word(sk, round, i)).collect();
    let pi = shuffle_with(&transcript, n).expect("transcript length matches by construction");
    (
        SlotSchedule { pi, round_index: round },
        VrfProof { commitment: vrf_commitment(sk), transcript },
    )
}

/// Checks a shuffled schedule against the registered commitment: the
/// seed must match the commitment, the transcript must be the seed's
/// genuine word stream for this round, and replaying it must reproduce
/// the schedule.
pub fn vrf_verify(
    registered: &Digest32,
    sk: &[u8],
    round: u64,
    schedule: &SlotSchedule,
    proof: &VrfProof,
) -> bool {
    if vrf_commitment(sk) != *registered || proof.commitment != *registered {
        return false;
    }
    if schedule.round_index != round {
        return false;
    }
    let n = schedule.len();
    if proof.transcript.len() != n.saturating_sub(1) {
        return false;
    }
    for (i, word) in proof.transcript.iter().enumerate() {
        if vrf_word(sk, round, i) != *word {
            return false;
        }
    }
    shuffle_with(&proof.transcript, n).as_deref() == Some(schedule.permutation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|i| NodeId(*i)).collect()
    }

    #[test]
    fn successor_examples() {
        let s = SlotSchedule::from_permutation(ids(&[0, 1, 2]), 0);
        let s1 = next_permutation(&s);
        assert_eq!(s1.permutation(), ids(&[0, 2, 1]));
        assert_eq!(s1.round_index(), 1);
        let s2 = next_permutation(&s1);
        assert_eq!(s2.permutation(), ids(&[1, 0, 2]));
    }

    #[test]
    fn maximum_wraps_to_identity() {
        let s = SlotSchedule::from_permutation(ids(&[2, 1, 0]), 5);
        let wrapped = next_permutation(&s);
        assert_eq!(wrapped.permutation(), ids(&[0, 1, 2]));
        assert_eq!(wrapped.round_index(), 6);
    }

    #[test]
    fn visits_all_permutations_before_repeating() {
        for n in 1..=6usize {
            let mut seen = std::collections::BTreeSet::new();
            let mut s = SlotSchedule::identity(n);
            let factorial: usize = (1..=n).product();
            for _ in 0..factorial {
                assert!(seen.insert(s.permutation().to_vec()), "repeat before n! steps");
                s = next_permutation(&s);
            }
            assert_eq!(seen.len(), factorial);
            assert_eq!(s.permutation(), NodeId::committee(n), "wraps after n! steps");
        }
    }

    #[test]
    fn shuffle_is_deterministic_bijection() {
        for n in [1usize, 2, 5, 17, 64] {
            for round in 0..4u64 {
                let (a, proof_a) = vrf_schedule(b"seed", round, n);
                let (b, _) = vrf_schedule(b"seed", round, n);
                assert_eq!(a, b);
                let mut sorted = a.permutation().to_vec();
                sorted.sort();
                assert_eq!(sorted, NodeId::committee(n));
                assert!(vrf_verify(&vrf_commitment(b"seed"), b"seed", round, &a, &proof_a));
            }
        }
    }

    #[test]
    fn tampered_schedules_and_proofs_rejected() {
        let (schedule, proof) = vrf_schedule(b"seed", 3, 6);
        let registered = vrf_commitment(b"seed");

        let mut pi = schedule.permutation().to_vec();
        pi.swap(0, 1);
        let swapped = SlotSchedule::from_permutation(pi, 3);
        assert!(!vrf_verify(&registered, b"seed", 3, &swapped, &proof));

        let mut forged = proof.clone();
        forged.transcript[0] ^= 1;
        assert!(!vrf_verify(&registered, b"seed", 3, &schedule, &forged));

        assert!(!vrf_verify(&registered, b"other", 3, &schedule, &proof));
        assert!(!vrf_verify(&registered, b"seed", 4, &schedule, &proof));
    }

    #[test]
    fn slot_lookup_roundtrips() {
        let s = SlotSchedule::from_permutation(ids(&[2, 0, 1]), 0);
        assert_eq!(s.node_at(1), NodeId(2));
        assert_eq!(s.slot_of(NodeId(1)), Some(3));
        assert_eq!(s.slot_of(NodeId(9)), None);
    }
}
