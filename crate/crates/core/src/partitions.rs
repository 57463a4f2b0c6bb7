//! Pair partitions, their type-B colorings, and set partitions of index tuples.
//!
//! Positions are 1-based throughout, matching the usual `[2n] = {1, ..., 2n}`
//! convention. A pairing is stored as the list of blocks `(w_i, z_i)` with
//! `w_i < z_i` and `w_1 < w_2 < ... < w_n`, so block indices are stable.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A pair partition of `[2n]` in canonical ordered-list form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    blocks: Vec<(usize, usize)>,
}

impl Pairing {
    /// The single pairing of the empty set.
    pub fn empty() -> Self {
        Self { blocks: Vec::new() }
    }

    /// Builds a pairing from blocks given in any order; the blocks are
    /// normalized to canonical form and checked to cover `[2n]` exactly once.
    pub fn new(blocks: &[(usize, usize)]) -> Result<Self> {
        let n = blocks.len();
        let mut seen = vec![false; 2 * n + 1];
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(n);
        for &(a, b) in blocks {
            let (w, z) = if a < b { (a, b) } else { (b, a) };
            if w == z || w == 0 || z > 2 * n {
                return Err(Error::Invalid("pairing block outside [2n] or degenerate"));
            }
            for p in [w, z] {
                if seen[p] {
                    return Err(Error::Invalid("pairing position used twice"));
                }
                seen[p] = true;
            }
            canon.push((w, z));
        }
        canon.sort_unstable();
        Ok(Self { blocks: canon })
    }

    /// Number of blocks `n`.
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// `#{i, j : w_i < w_j < z_i < z_j}`.
    pub fn crossings(&self) -> usize {
        self.count_pairs(|(wi, zi), (wj, zj)| wi < wj && wj < zi && zi < zj)
    }

    /// `#{i, j : w_i < w_j < z_j < z_i}`.
    pub fn nestings(&self) -> usize {
        self.count_pairs(|(wi, zi), (wj, zj)| wi < wj && zj < zi)
    }

    /// Block pairs that neither cross nor nest (`z_i < w_j`).
    pub fn alignments(&self) -> usize {
        self.count_pairs(|(_, zi), (wj, _)| zi < wj)
    }

    /// For every block, the number of blocks that strictly enclose it.
    pub fn enclosing_counts(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.blocks.len()];
        for (j, &(wj, zj)) in self.blocks.iter().enumerate() {
            out[j] = self.blocks[..j]
                .iter()
                .filter(|&&(wi, zi)| wi < wj && zj < zi)
                .count() as u32;
        }
        out
    }

    /// View as a set partition of `[2n]`.
    pub fn to_set_partition(&self) -> SetPartition {
        SetPartition {
            k: 2 * self.n(),
            blocks: self.blocks.iter().map(|&(w, z)| vec![w, z]).collect(),
        }
    }

    // O(n^2) scan over ordered block pairs i < j (canonical order, so w_i < w_j).
    fn count_pairs(&self, pred: impl Fn((usize, usize), (usize, usize)) -> bool) -> usize {
        let b = &self.blocks;
        let mut count = 0;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                if pred(b[i], b[j]) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// `(2n - 1)!!`, the number of pairings of `[2n]`.
pub fn count_pairings(n: usize) -> u128 {
    (1..=n as u128).map(|i| 2 * i - 1).product()
}

/// Streams all pairings of `[2n]`: position 1 is paired with each later
/// position in increasing order, then the rest is handled recursively.
pub fn pairings(n: usize) -> Pairings {
    Pairings {
        n,
        digits: vec![0; n],
        done: false,
    }
}

/// Iterator returned by [`pairings`]. Internally a mixed-radix counter whose
/// digit `t` picks the partner of the smallest unpaired position at depth `t`.
#[derive(Clone, Debug)]
pub struct Pairings {
    n: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Pairings {
    fn decode(&self) -> Pairing {
        let mut free: Vec<usize> = (1..=2 * self.n).collect();
        let mut blocks = Vec::with_capacity(self.n);
        for &d in &self.digits {
            let w = free.remove(0);
            let z = free.remove(d);
            blocks.push((w, z));
        }
        Pairing { blocks }
    }
}

impl Iterator for Pairings {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.done {
            return None;
        }
        let out = self.decode();
        let mut t = self.n;
        loop {
            if t == 0 {
                self.done = true;
                break;
            }
            t -= 1;
            let radix = 2 * (self.n - t) - 1;
            self.digits[t] += 1;
            if self.digits[t] < radix {
                break;
            }
            self.digits[t] = 0;
        }
        Some(out)
    }
}

/// A pairing together with a `+1/-1` coloring of its blocks. Bit `i` of the
/// mask is set when block `i` (canonical order) is negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeBPairing {
    pairing: Pairing,
    negative: u64,
}

impl TypeBPairing {
    pub fn new(pairing: Pairing, negative_mask: u64) -> Result<Self> {
        if pairing.n() > 64 || (pairing.n() < 64 && negative_mask >> pairing.n() != 0) {
            return Err(Error::Invalid("coloring mask has bits beyond the block count"));
        }
        Ok(Self {
            pairing,
            negative: negative_mask,
        })
    }

    /// Coloring given block by block (canonical order), each entry `+1` or `-1`.
    pub fn from_signs(pairing: Pairing, signs: &[i8]) -> Result<Self> {
        if signs.len() != pairing.n() {
            return Err(Error::DimensionMismatch {
                expected: pairing.n(),
                found: signs.len(),
            });
        }
        let mut mask = 0u64;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => mask |= 1 << i,
                _ => return Err(Error::Invalid("block colors must be +1 or -1")),
            }
        }
        Self::new(pairing, mask)
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    pub fn negative_mask(&self) -> u64 {
        self.negative
    }

    pub fn sign(&self, block: usize) -> i8 {
        if self.is_negative(block) {
            -1
        } else {
            1
        }
    }

    pub fn is_negative(&self, block: usize) -> bool {
        self.negative >> block & 1 == 1
    }

    pub fn negative_blocks(&self) -> usize {
        self.negative.count_ones() as usize
    }

    /// Nesting pairs whose inner block is negative.
    pub fn cnb(&self) -> usize {
        let b = self.pairing.blocks();
        let mut count = 0;
        for i in 0..b.len() {
            for j in 0..b.len() {
                let ((wi, zi), (wj, zj)) = (b[i], b[j]);
                if wi < wj && zj < zi && self.is_negative(j) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// All `2^n` colorings of a pairing, in increasing mask order.
pub fn colorings(pairing: &Pairing) -> impl Iterator<Item = TypeBPairing> + '_ {
    (0..1u64 << pairing.n()).map(move |mask| TypeBPairing {
        pairing: pairing.clone(),
        negative: mask,
    })
}

/// A set partition of `[k]`. Blocks are sorted internally and ordered by
/// their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(k: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; k + 1];
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
        for block in blocks {
            if block.is_empty() {
                return Err(Error::Invalid("empty block in set partition"));
            }
            let mut b = block.clone();
            b.sort_unstable();
            for &p in &b {
                if p == 0 || p > k || seen[p] {
                    return Err(Error::Invalid("set partition blocks overlap or leave [k]"));
                }
                seen[p] = true;
            }
            canon.push(b);
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::Invalid("set partition does not cover [k]"));
        }
        canon.sort_unstable();
        Ok(Self { k, blocks: canon })
    }

    /// Builds the partition from a restricted growth string: `labels[p]` is
    /// the 0-based block of position `p + 1`, with blocks numbered by first use.
    fn from_labels(labels: &[usize]) -> Self {
        let count = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); count];
        for (p, &l) in labels.iter().enumerate() {
            blocks[l].push(p + 1);
        }
        Self {
            k: labels.len(),
            blocks,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// 0-based block label of each position (restricted growth string).
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for (b, block) in self.blocks.iter().enumerate() {
            for &p in block {
                out[p - 1] = b;
            }
        }
        out
    }

    pub fn min_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    pub fn to_pairing(&self) -> Option<Pairing> {
        if !self.is_pairing() {
            return None;
        }
        Some(Pairing {
            blocks: self.blocks.iter().map(|b| (b[0], b[1])).collect(),
        })
    }
}

/// The set partition of positions induced by equal values: positions `p`
/// and `p'` share a block iff `tuple[p] == tuple[p']`.
pub fn partition_class<T: PartialEq>(tuple: &[T]) -> SetPartition {
    let mut reps: Vec<&T> = Vec::new();
    let mut labels = Vec::with_capacity(tuple.len());
    for v in tuple {
        match reps.iter().position(|r| *r == v) {
            Some(l) => labels.push(l),
            None => {
                labels.push(reps.len());
                reps.push(v);
            }
        }
    }
    SetPartition::from_labels(&labels)
}

/// All set partitions of `[k]` (Bell-number many), in restricted-growth order.
pub fn set_partitions(k: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut labels = Vec::with_capacity(k);
    let mut sizes = Vec::new();
    grow(k, 1, &mut labels, &mut sizes, &mut out);
    out
}

/// All set partitions of `[k]` whose blocks have at least two elements,
/// in restricted-growth order.
pub fn set_partitions_min2(k: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut labels = Vec::with_capacity(k);
    let mut sizes = Vec::new();
    grow(k, 2, &mut labels, &mut sizes, &mut out);
    out
}

fn grow(
    k: usize,
    min_size: usize,
    labels: &mut Vec<usize>,
    sizes: &mut Vec<usize>,
    out: &mut Vec<SetPartition>,
) {
    let remaining = k - labels.len();
    let deficit: usize = sizes.iter().map(|&s| min_size.saturating_sub(s)).sum();
    if deficit > remaining {
        return;
    }
    if remaining == 0 {
        out.push(SetPartition::from_labels(labels));
        return;
    }
    for l in 0..=sizes.len() {
        if l == sizes.len() {
            sizes.push(0);
        }
        sizes[l] += 1;
        labels.push(l);
        grow(k, min_size, labels, sizes, out);
        labels.pop();
        sizes[l] -= 1;
        if sizes[l] == 0 {
            sizes.pop();
        }
    }
}
