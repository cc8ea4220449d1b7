//! Binary Merkle tree over transaction digests.
//!
//! Odd levels are padded by duplicating the last node, so a proof must
//! carry the original leaf count: the verifier re-derives each level's
//! width from it and knows when a sibling is the duplicated node.

use crate::digest::{digest_parts, Digest32};

/// Domain separators so a leaf can never be reinterpreted as an
/// interior node.
const LEAF_TAG: &[u8] = b"leaf";
const NODE_TAG: &[u8] = b"node";

fn hash_leaf(d: &Digest32) -> Digest32 {
    digest_parts(&[LEAF_TAG, d.as_bytes()])
}

fn hash_node(l: &Digest32, r: &Digest32) -> Digest32 {
    digest_parts(&[NODE_TAG, l.as_bytes(), r.as_bytes()])
}

/// Root of the tree over `leaves`; the empty tree has root zero.
pub fn merkle_root(leaves: &[Digest32]) -> Digest32 {
    if leaves.is_empty() {
        return Digest32::ZERO;
    }
    let mut level: Vec<Digest32> = leaves.iter().map(hash_leaf).collect();
    while level.len() > 1 {
        if level.len() % 2 == 1 {
            level.push(*level.last().unwrap());
        }
        level = level.chunks(2).map(|p| hash_node(&p[0], &p[1])).collect();
    }
    level[0]
}

/// Authentication path for one leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerklePath {
    /// Index of the proven leaf.
    pub index: usize,
    /// Number of leaves in the tree the path was built from.
    pub leaf_count: usize,
    /// Sibling hashes from the leaf level upward.
    pub siblings: Vec<Digest32>,
}

/// Builds the authentication path for `leaves[index]`.
///
/// # Panics
/// If `index >= leaves.len()`.
pub fn merkle_path(leaves: &[Digest32], index: usize) -> MerklePath {
    assert!(index < leaves.len(), "leaf index out of range");
    let mut level: Vec<Digest32> = leaves.iter().map(hash_leaf).collect();
    let mut idx = index;
    let mut siblings = Vec::new();
    while level.len() > 1 {
        if level.len() % 2 == 1 {
            level.push(*level.last().unwrap());
        }
        siblings.push(level[idx ^ 1]);
        level = level.chunks(2).map(|p| hash_node(&p[0], &p[1])).collect();
        idx /= 2;
    }
    MerklePath { index, leaf_count: leaves.len(), siblings }
}

/// Checks that `leaf` sits at `path.index` under `root`.
pub fn merkle_verify(leaf: &Digest32, path: &MerklePath, root: &Digest32) -> bool {
    if path.leaf_count == 0 || path.index >= path.leaf_count {
        return false;
    }
    // The path length must match the tree height implied by leaf_count.
    let mut width = path.leaf_count;
    let mut height = 0usize;
    while width > 1 {
        width = width.div_ceil(2);
        height += 1;
    }
    if path.siblings.len() != height {
        return false;
    }

    let mut acc = hash_leaf(leaf);
    let mut idx = path.index;
    let mut level_width = path.leaf_count;
    for sib in &path.siblings {
        // A right-edge node on an odd level pairs with its own copy.
        let padded = level_width + level_width % 2;
        let expected_self_sibling = idx == padded - 1 && level_width % 2 == 1;
        if expected_self_sibling && *sib != acc {
            return false;
        }
        acc = if idx % 2 == 0 { hash_node(&acc, sib) } else { hash_node(sib, &acc) };
        idx /= 2;
        level_width = padded / 2;
    }
    acc == *root
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digest::digest_bytes;

    fn leaves(n: usize) -> Vec<Digest32> {
        (0..n).map(|i| digest_bytes(&(i as u64).to_le_bytes())).collect()
    }

    #[test]
    fn empty_tree_has_zero_root() {
        assert_eq!(merkle_root(&[]), Digest32::ZERO);
    }

    #[test]
    fn single_leaf_root_is_leaf_hash() {
        let l = leaves(1);
        assert_eq!(merkle_root(&l), hash_leaf(&l[0]));
    }

    #[test]
    fn all_paths_verify_for_many_sizes() {
        for n in 1..=17 {
            let l = leaves(n);
            let root = merkle_root(&l);
            for i in 0..n {
                let path = merkle_path(&l, i);
                assert!(merkle_verify(&l[i], &path, &root), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn wrong_leaf_or_index_rejected() {
        let l = leaves(5);
        let root = merkle_root(&l);
        let path = merkle_path(&l, 2);
        assert!(!merkle_verify(&l[3], &path, &root));
        let mut bad = path.clone();
        bad.index = 3;
        assert!(!merkle_verify(&l[2], &bad, &root));
    }

    #[test]
    fn padding_never_proves_a_forged_leaf() {
        // With 3 leaves, leaf 2 is duplicated into slot 3. A proof for
        // the phantom slot is rejected under the true leaf count, and
        // even lying about the count only ever re-proves the genuine
        // duplicated digest — a forged digest still fails.
        let l = leaves(3);
        let root = merkle_root(&l);
        let mut path = merkle_path(&l, 2);
        path.index = 3;
        assert!(!merkle_verify(&l[2], &path, &root));
        path.leaf_count = 4;
        assert!(merkle_verify(&l[2], &path, &root));
        let forged = digest_bytes(b"not a transaction");
        assert!(!merkle_verify(&forged, &path, &root));
    }

    #[test]
    fn truncated_path_rejected() {
        let l = leaves(8);
        let root = merkle_root(&l);
        let mut path = merkle_path(&l, 0);
        path.siblings.pop();
        assert!(!merkle_verify(&l[0], &path, &root));
    }
}
