//! The hyperoctahedral group `Sigma(n)` (Coxeter type B) and its action on
//! tensor powers.
//!
//! Elements are signed permutations of `{+-1, ..., +-n}` commuting with
//! `k -> -k`, stored by their images of `1..n`. The generators are
//! `pi_0 = (-1, 1)` and `pi_i = (i, i+1)(-i, -i-1)` for `1 <= i < n`.
//! Products compose right to left as functions, so the word
//! `pi_{i1} ... pi_{ik}` is `pi_{i1} o ... o pi_{ik}`.
//!
//! The length statistics `(l0, l)` are read off minimal words found by a
//! breadth-first search of the Cayley graph; the search also checks that
//! every geodesic predecessor of an element yields the same statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{check_involution, symmetric_eigenvalues, symmetry_defect, tensor_dim, Matrix};
use crate::poly::powu;

/// Largest degree for which the whole group is enumerated (`2^7 7! = 645120`).
pub const MAX_GROUP_DEGREE: usize = 7;

/// Work limit `|Sigma(n)| * d^n` for assembling a symmetrizer.
pub const MAX_SYMMETRIZER_WORK: u128 = 200_000_000;

/// Tolerance on the smallest eigenvalue for positive semi-definiteness.
pub const PSD_TOL: f64 = 1e-10;
/// Margin the smallest eigenvalue must clear for strict positivity.
pub const STRICT_PD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    images: Vec<i32>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (1..=n as i32).collect(),
        }
    }

    /// `images[k-1] = sigma(k)`; the absolute values must permute `1..n`.
    pub fn new(images: Vec<i32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            let a = v.unsigned_abs() as usize;
            if a == 0 || a > n || seen[a] {
                return Err(Error::Invalid("images are not a signed permutation"));
            }
            seen[a] = true;
        }
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[i32] {
        &self.images
    }

    /// `sigma(k)` for `k` in `{+-1, ..., +-n}`, using `sigma(-k) = -sigma(k)`.
    pub fn apply(&self, k: i32) -> i32 {
        let v = self.images[k.unsigned_abs() as usize - 1];
        if k < 0 {
            -v
        } else {
            v
        }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Self {
            images: other.images.iter().map(|&k| self.apply(k)).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.degree()];
        for (k, &v) in self.images.iter().enumerate() {
            let k = k as i32 + 1;
            images[v.unsigned_abs() as usize - 1] = if v < 0 { -k } else { k };
        }
        Self { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &v)| v == k as i32 + 1)
    }

    /// Dense index in `0..2^n n!`: sign mask times `n!` plus the Lehmer rank.
    fn rank(&self) -> usize {
        rank_images(&self.images)
    }
}

fn rank_images(images: &[i32]) -> usize {
    let n = images.len();
    let mut signs = 0usize;
    let mut lehmer = 0usize;
    for (k, &v) in images.iter().enumerate() {
        if v < 0 {
            signs |= 1 << k;
        }
        let a = v.unsigned_abs();
        let smaller_later = images[k + 1..].iter().filter(|w| w.unsigned_abs() < a).count();
        lehmer = lehmer * (n - k) + smaller_later;
    }
    signs * factorial(n) + lehmer
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Generator `pi_i` of `Sigma(n)`.
pub fn generator(n: usize, i: usize) -> Result<SignedPermutation> {
    if i >= n {
        return Err(Error::GeneratorOutOfRange { index: i, degree: n });
    }
    let mut images: Vec<i32> = (1..=n as i32).collect();
    if i == 0 {
        images[0] = -1;
    } else {
        images.swap(i - 1, i);
    }
    Ok(SignedPermutation { images })
}

/// Product `pi_{w1} o pi_{w2} o ...` of a generator word.
pub fn word_product(n: usize, word: &[usize]) -> Result<SignedPermutation> {
    let mut acc = SignedPermutation::identity(n);
    for &g in word {
        acc = acc.compose(&generator(n, g)?);
    }
    Ok(acc)
}

/// The all-positive signed permutation with underlying permutation `lambda`
/// (given as the images of `1..n`).
pub fn embed_symmetric(lambda: &[usize]) -> Result<SignedPermutation> {
    SignedPermutation::new(lambda.iter().map(|&v| v as i32).collect())
}

/// `(l0, l)`: generator counts of type `pi_0` and of the other types in a
/// minimal word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct LengthStats {
    pub l0: u32,
    pub l: u32,
}

impl LengthStats {
    pub fn length(&self) -> u32 {
        self.l0 + self.l
    }

    fn after(self, generator: usize) -> Self {
        if generator == 0 {
            Self { l0: self.l0 + 1, ..self }
        } else {
            Self { l: self.l + 1, ..self }
        }
    }
}

/// The whole group `Sigma(n)` in BFS order, with a geodesic certificate
/// (parent element and last generator) for every element.
#[derive(Clone, Debug)]
pub struct HyperoctahedralGroup {
    n: usize,
    images: Vec<i8>,
    stats: Vec<LengthStats>,
    parent: Vec<(u32, u8)>,
    geodesic_edges: usize,
}

const NO_PARENT: u32 = u32::MAX;

impl HyperoctahedralGroup {
    /// Breadth-first enumeration of `Sigma(n)` from the identity.
    pub fn enumerate(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_GROUP_DEGREE {
            return Err(Error::OutOfRange {
                name: "group degree",
                value: n as f64,
                range: "1..=7",
            });
        }
        let order = (1usize << n) * factorial(n);
        let gens: Vec<SignedPermutation> = (0..n).map(|i| generator(n, i)).collect::<Result<_>>()?;
        let mut slot = vec![u32::MAX; order];
        let mut images: Vec<i8> = Vec::with_capacity(order * n);
        let mut stats = Vec::with_capacity(order);
        let mut parent = Vec::with_capacity(order);
        let mut geodesic_edges = 0usize;

        let id = SignedPermutation::identity(n);
        slot[id.rank()] = 0;
        images.extend(id.images.iter().map(|&v| v as i8));
        stats.push(LengthStats::default());
        parent.push((NO_PARENT, 0u8));

        let mut head = 0usize;
        let mut current = SignedPermutation::identity(n);
        while head < stats.len() {
            for (k, v) in current.images.iter_mut().enumerate() {
                *v = i32::from(images[head * n + k]);
            }
            let here = stats[head];
            for (g, gen) in gens.iter().enumerate() {
                let next = current.compose(gen);
                let r = next.rank();
                let via = here.after(g);
                if slot[r] == u32::MAX {
                    slot[r] = stats.len() as u32;
                    images.extend(next.images.iter().map(|&v| v as i8));
                    stats.push(via);
                    parent.push((head as u32, g as u8));
                } else {
                    let seen = stats[slot[r] as usize];
                    if seen.length() == via.length() {
                        geodesic_edges += 1;
                        if seen != via {
                            return Err(Error::InconsistentLengths { degree: n });
                        }
                    }
                }
            }
            head += 1;
        }
        debug_assert_eq!(stats.len(), order);
        Ok(Self {
            n,
            images,
            stats,
            parent,
            geodesic_edges,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    /// Number of additional geodesic edges on which the statistics were
    /// re-derived and found consistent.
    pub fn geodesic_edges_checked(&self) -> usize {
        self.geodesic_edges
    }

    pub fn element(&self, idx: usize) -> SignedPermutation {
        SignedPermutation {
            images: self.images[idx * self.n..(idx + 1) * self.n]
                .iter()
                .map(|&v| i32::from(v))
                .collect(),
        }
    }

    pub fn stats(&self, idx: usize) -> LengthStats {
        self.stats[idx]
    }

    /// Elements with their statistics, in BFS order.
    pub fn iter(&self) -> impl Iterator<Item = (SignedPermutation, LengthStats)> + '_ {
        (0..self.len()).map(move |i| (self.element(i), self.stats[i]))
    }

    /// Position of `sigma` in BFS order.
    pub fn index_of(&self, sigma: &SignedPermutation) -> Option<usize> {
        if sigma.degree() != self.n {
            return None;
        }
        // Linear scan keeps the table small; only used for single lookups.
        let target: Vec<i8> = sigma.images.iter().map(|&v| v as i8).collect();
        self.images.chunks_exact(self.n).position(|c| c == target.as_slice())
    }

    /// The minimal word recorded by the search, as generator indices.
    pub fn minimal_word(&self, idx: usize) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cur = idx;
        while self.parent[cur].0 != NO_PARENT {
            let (p, g) = self.parent[cur];
            word.push(g as usize);
            cur = p as usize;
        }
        word.reverse();
        word
    }

    /// Compact tensor actions `U_sigma` for all elements, in BFS order, built
    /// by extending each parent's action by one generator.
    pub fn factor_actions(&self) -> Vec<FactorAction> {
        let gens: Vec<FactorAction> = (0..self.n).map(|g| FactorAction::generator(self.n, g)).collect();
        let mut out: Vec<FactorAction> = Vec::with_capacity(self.len());
        out.push(FactorAction::identity(self.n));
        for idx in 1..self.len() {
            let (p, g) = self.parent[idx];
            let next = out[p as usize].then(&gens[g as usize]);
            out.push(next);
        }
        out
    }
}

/// `U_sigma` in compact form: permute tensor factors, then apply `Pi0` on a
/// subset of output factors. Output factor `k` receives input factor
/// `perm[k]`; bit `k` of `flips` marks `Pi0` on output factor `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorAction {
    perm: Vec<usize>,
    flips: u32,
}

impl FactorAction {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            flips: 0,
        }
    }

    /// `U_{pi_0} = Pi0 (x) I (x) ...`, `U_{pi_i}` swaps factors `i` and `i+1`.
    pub fn generator(n: usize, g: usize) -> Self {
        let mut a = Self::identity(n);
        if g == 0 {
            a.flips = 1;
        } else {
            a.perm.swap(g - 1, g);
        }
        a
    }

    /// The operator `self o other`.
    pub fn then(&self, other: &Self) -> Self {
        let perm: Vec<usize> = self.perm.iter().map(|&pk| other.perm[pk]).collect();
        let mut moved = 0u32;
        for (k, &pk) in self.perm.iter().enumerate() {
            if other.flips >> pk & 1 == 1 {
                moved |= 1 << k;
            }
        }
        Self {
            perm,
            flips: self.flips ^ moved,
        }
    }

    /// Adds `weight * U` into `acc` (a `d^n x d^n` matrix).
    fn accumulate(&self, weight: f64, d: usize, pi0: &Matrix, acc: &mut Matrix) {
        let n = self.perm.len();
        let dim = acc.nrows();
        let mut digits = vec![0usize; n];
        let mut out_digits = vec![0usize; n];
        for col in 0..dim {
            let mut c = col;
            for k in (0..n).rev() {
                digits[k] = c % d;
                c /= d;
            }
            for k in 0..n {
                out_digits[k] = digits[self.perm[k]];
            }
            self.expand(0, 0, weight, d, pi0, &out_digits, col, acc);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn expand(
        &self,
        k: usize,
        row: usize,
        value: f64,
        d: usize,
        pi0: &Matrix,
        out_digits: &[usize],
        col: usize,
        acc: &mut Matrix,
    ) {
        if k == out_digits.len() {
            acc[(row, col)] += value;
            return;
        }
        let j = out_digits[k];
        if self.flips >> k & 1 == 1 {
            for i in 0..d {
                let v = pi0[(i, j)];
                if v != 0.0 {
                    self.expand(k + 1, row * d + i, value * v, d, pi0, out_digits, col, acc);
                }
            }
        } else {
            self.expand(k + 1, row * d + j, value, d, pi0, out_digits, col, acc);
        }
    }

    pub fn to_matrix(&self, d: usize, pi0: &Matrix) -> Result<Matrix> {
        let dim = tensor_dim(d, self.perm.len())?;
        let mut m = Matrix::zeros(dim, dim);
        self.accumulate(1.0, d, pi0, &mut m);
        Ok(m)
    }
}

/// Dense matrix of a single generator on `(R^d)^{(x) n}`.
fn generator_matrix(n: usize, g: usize, d: usize, pi0: &Matrix) -> Result<Matrix> {
    let dim = tensor_dim(d, n)?;
    let mut m = Matrix::zeros(dim, dim);
    let block = dim / d;
    for col in 0..dim {
        if g == 0 {
            // Pi0 on the first (most significant) factor.
            let (j, rest) = (col / block, col % block);
            for i in 0..d {
                m[(i * block + rest, col)] = pi0[(i, j)];
            }
        } else {
            // Swap tensor factors g and g+1 (1-based): digits at places g-1, g.
            let hi = tensor_dim(d, n - g)?;
            let lo = hi / d;
            let a = (col / hi) % d;
            let b = (col / lo) % d;
            let row = col - a * hi - b * lo + b * hi + a * lo;
            m[(row, col)] = 1.0;
        }
    }
    Ok(m)
}

/// `U_{pi_{w1}} ... U_{pi_{wk}}` from dense generator matrices.
pub fn action_matrix_for_word(n: usize, word: &[usize], d: usize, pi0: &Matrix) -> Result<Matrix> {
    check_involution(pi0, d)?;
    let dim = tensor_dim(d, n)?;
    let mut acc = Matrix::identity(dim, dim);
    for &g in word {
        if g >= n {
            return Err(Error::GeneratorOutOfRange { index: g, degree: n });
        }
        acc *= generator_matrix(n, g, d, pi0)?;
    }
    Ok(acc)
}

/// `U_sigma` on `(R^d)^{(x) n}`, composed along a minimal word of `sigma`.
pub fn action_matrix(sigma: &SignedPermutation, d: usize, pi0: &Matrix) -> Result<Matrix> {
    check_involution(pi0, d)?;
    let n = sigma.degree();
    if n == 0 {
        return Ok(Matrix::identity(1, 1));
    }
    let group = HyperoctahedralGroup::enumerate(n)?;
    let idx = group
        .index_of(sigma)
        .ok_or(Error::Invalid("element not found in group table"))?;
    action_matrix_for_word(n, &group.minimal_word(idx), d, pi0)
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            name,
            value: v,
            range: "[-1, 1]",
        });
    }
    Ok(())
}

/// `P^(n) = sum_sigma alpha^{l0(sigma)} q^{l(sigma)} U_sigma` on `(R^d)^{(x) n}`.
pub fn symmetrizer(n: usize, d: usize, pi0: &Matrix, alpha: f64, q: f64) -> Result<Matrix> {
    if n == 0 {
        check_involution(pi0, d)?;
        check_unit_interval("alpha", alpha)?;
        check_unit_interval("q", q)?;
        return Ok(Matrix::identity(1, 1));
    }
    let group = HyperoctahedralGroup::enumerate(n)?;
    symmetrizer_with_group(&group, d, pi0, alpha, q)
}

/// As [`symmetrizer`], reusing an enumerated group table.
pub fn symmetrizer_with_group(
    group: &HyperoctahedralGroup,
    d: usize,
    pi0: &Matrix,
    alpha: f64,
    q: f64,
) -> Result<Matrix> {
    check_involution(pi0, d)?;
    check_unit_interval("alpha", alpha)?;
    check_unit_interval("q", q)?;
    let n = group.degree();
    let dim = tensor_dim(d, n)?;
    let work = group.len() as u128 * dim as u128;
    if work > MAX_SYMMETRIZER_WORK {
        return Err(Error::Capacity {
            what: "|Sigma(n)| * d^n",
            requested: work,
            limit: MAX_SYMMETRIZER_WORK,
        });
    }
    let mut acc = Matrix::zeros(dim, dim);
    for (idx, action) in group.factor_actions().iter().enumerate() {
        let s = group.stats(idx);
        let w = powu(alpha, s.l0) * powu(q, s.l);
        if w != 0.0 {
            action.accumulate(w, d, pi0, &mut acc);
        }
    }
    Ok(acc)
}

/// Outcome of a positivity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub strict: bool,
    pub pass: bool,
}

/// Smallest eigenvalue of a symmetric matrix and whether it clears the
/// semi-definite (`>= -1e-10`) or strict (`> 1e-12`) threshold.
pub fn psd_check(p: &Matrix, strict: bool) -> Result<PsdReport> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            found: p.ncols(),
        });
    }
    if symmetry_defect(p) > PSD_TOL {
        return Err(Error::Invalid("matrix is not symmetric"));
    }
    let min = symmetric_eigenvalues(p).first().copied().unwrap_or(0.0);
    let pass = if strict { min > STRICT_PD_TOL } else { min >= -PSD_TOL };
    Ok(PsdReport {
        min_eigenvalue: min,
        strict,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{involutions, max_abs_diff};

    #[test]
    fn generators_match_their_definitions() {
        assert_eq!(generator(2, 0).unwrap().images(), &[-1, 2]);
        assert_eq!(generator(3, 1).unwrap().images(), &[2, 1, 3]);
        assert!(matches!(generator(3, 3), Err(Error::GeneratorOutOfRange { .. })));
        for n in 1..=4 {
            for i in 0..n {
                let g = generator(n, i).unwrap();
                assert!(g.compose(&g).is_identity());
            }
        }
    }

    #[test]
    fn inverse_and_apply() {
        let s = SignedPermutation::new(vec![-3, 1, 2]).unwrap();
        assert!(s.compose(&s.inverse()).is_identity());
        assert_eq!(s.apply(-1), 3);
        assert!(SignedPermutation::new(vec![1, 1]).is_err());
        assert!(SignedPermutation::new(vec![0, 1]).is_err());
    }

    #[test]
    fn small_groups() {
        let g1 = HyperoctahedralGroup::enumerate(1).unwrap();
        let all: Vec<_> = g1.iter().collect();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].1, LengthStats { l0: 0, l: 0 });
        assert_eq!(all[1].0.images(), &[-1]);
        assert_eq!(all[1].1, LengthStats { l0: 1, l: 0 });
        assert_eq!(HyperoctahedralGroup::enumerate(2).unwrap().len(), 8);
        assert!(HyperoctahedralGroup::enumerate(0).is_err());
        assert!(HyperoctahedralGroup::enumerate(MAX_GROUP_DEGREE + 1).is_err());
    }

    #[test]
    fn braid_relation_of_type_b() {
        let lhs = word_product(2, &[0, 1, 0, 1]).unwrap();
        let rhs = word_product(2, &[1, 0, 1, 0]).unwrap();
        assert_eq!(lhs, rhs);
        let group = HyperoctahedralGroup::enumerate(2).unwrap();
        let idx = group.index_of(&lhs).unwrap();
        assert_eq!(group.stats(idx).length(), 4);
        assert_eq!(group.stats(idx), LengthStats { l0: 2, l: 2 });
    }

    #[test]
    fn embedded_symmetric_group() {
        assert!(embed_symmetric(&[1, 2, 3]).unwrap().is_identity());
        assert_eq!(embed_symmetric(&[2, 1]).unwrap(), generator(2, 1).unwrap());
        let cycle = embed_symmetric(&[2, 3, 1]).unwrap();
        assert_eq!(cycle.images(), &[2, 3, 1]);
        let group = HyperoctahedralGroup::enumerate(3).unwrap();
        assert_eq!(group.stats(group.index_of(&cycle).unwrap()).l0, 0);
    }

    #[test]
    fn flip_matrix_for_pi1() {
        let pi0 = involutions::flip(2);
        let u = action_matrix(&generator(2, 1).unwrap(), 2, &pi0).unwrap();
        let mut swap = Matrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, c)] = 1.0;
        }
        assert_eq!(u, swap);
        let id = action_matrix(&SignedPermutation::identity(3), 2, &pi0).unwrap();
        assert_eq!(id, Matrix::identity(8, 8));
    }

    #[test]
    fn geodesic_words_give_equal_matrices() {
        let pi0 = involutions::swap12(2);
        let a = action_matrix_for_word(2, &[0, 1, 0, 1], 2, &pi0).unwrap();
        let b = action_matrix_for_word(2, &[1, 0, 1, 0], 2, &pi0).unwrap();
        assert!(max_abs_diff(&a, &b) == 0.0);
    }

    #[test]
    fn degree_one_symmetrizer() {
        let pi0 = involutions::flip(2);
        let p = symmetrizer(1, 2, &pi0, 0.3, 0.8).unwrap();
        let expect = Matrix::identity(2, 2) + &pi0 * 0.3;
        assert!(max_abs_diff(&p, &expect) < 1e-15);
        let ev = crate::linalg::symmetric_eigenvalues(&p);
        assert!((ev[0] - 0.7).abs() < 1e-14 && (ev[1] - 1.3).abs() < 1e-14);
    }

    #[test]
    fn free_parameters_give_identity() {
        for n in 0..=3 {
            let p = symmetrizer(n, 2, &involutions::swap12(2), 0.0, 0.0).unwrap();
            let dim = p.nrows();
            assert_eq!(p, Matrix::identity(dim, dim));
        }
    }

    #[test]
    fn scalar_symmetrizer_sums_group_weights() {
        let (a, q) = (0.4, -0.6);
        let p = symmetrizer(2, 1, &involutions::identity(1), a, q).unwrap();
        let expect: f64 = HyperoctahedralGroup::enumerate(2)
            .unwrap()
            .iter()
            .map(|(_, s)| powu(a, s.l0) * powu(q, s.l))
            .sum();
        assert!((p[(0, 0)] - expect).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        let pi0 = involutions::identity(2);
        assert!(matches!(symmetrizer(2, 2, &pi0, 1.5, 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(symmetrizer(2, 2, &pi0, 0.0, -1.01), Err(Error::OutOfRange { .. })));
        let bad = Matrix::from_row_slice(2, 2, &[0.0, 2.0, 0.5, 0.0]);
        assert!(matches!(symmetrizer(1, 2, &bad, 0.1, 0.1), Err(Error::NotInvolution { .. })));
    }

    #[test]
    fn psd_thresholds() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let weak = psd_check(&m, false).unwrap();
        assert!(weak.pass);
        assert!(!psd_check(&m, true).unwrap().pass);
        let neg = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!psd_check(&neg, false).unwrap().pass);
        assert!(psd_check(&Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]), false).is_err());
    }
}
