//! The truncated `(alpha, q)`-Fock space over `R^d`.
//!
//! Level `n` holds a dense vector of length `d^n` in standard tensor
//! coordinates (first factor most significant). The deformed inner product
//! on level `n` is `<u, v> = u^T P^(n) v` with `P^(n)` the type-B symmetrizer.
//!
//! Creation is right tensoring, `xi_n -> xi_n (x) x`. Annihilation is its
//! adjoint for the deformed inner product, computed literally as
//! `(P^(n))^{-1} C(x)^T P^(n+1)` on level `n + 1`, where `C(x)` is creation
//! in standard coordinates.
//!
//! Truncation at level `M` is exact for words of at most `M` Gaussians: each
//! Gaussian moves the level by exactly one, so a `k`-letter word applied to
//! the vacuum never leaves levels `0..=k`. Longer words are refused.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DVector, Dyn};

use crate::coxeter_b::{symmetrizer_with_group, HyperoctahedralGroup, MAX_GROUP_DEGREE};
use crate::error::{Error, Result};
use crate::linalg::{check_involution, symmetric_eigenvalues, tensor_dim, Matrix};
use crate::poly::powu;

/// Largest supported truncation level (bounded by the group enumeration).
pub const MAX_LEVEL: usize = MAX_GROUP_DEGREE;
/// Largest supported one-particle dimension.
pub const MAX_DIM: usize = 3;
/// Gram matrices with a larger condition number are reported through `log`.
pub const CONDITION_WARN: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct FockSpaceConfig {
    pub d: usize,
    /// Truncation level `M`.
    pub max_level: usize,
    pub alpha: f64,
    pub q: f64,
    pub pi0: Matrix,
}

impl FockSpaceConfig {
    pub fn new(d: usize, max_level: usize, alpha: f64, q: f64, pi0: Matrix) -> Result<Self> {
        let cfg = Self {
            d,
            max_level,
            alpha,
            q,
            pi0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("q", self.q)] {
            if !(v > -1.0 && v < 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(-1, 1)",
                });
            }
        }
        if self.max_level == 0 || self.max_level > MAX_LEVEL {
            return Err(Error::OutOfRange {
                name: "truncation level M",
                value: self.max_level as f64,
                range: "1..=7",
            });
        }
        if self.d == 0 || self.d > MAX_DIM {
            return Err(Error::OutOfRange {
                name: "dimension d",
                value: self.d as f64,
                range: "1..=3",
            });
        }
        check_involution(&self.pi0, self.d)
    }
}

#[derive(Clone, Debug)]
struct GramLevel {
    gram: Matrix,
    inverse: Matrix,
    factor: Cholesky<f64, Dyn>,
    condition: f64,
}

/// `P^(0), ..., P^(M)` with their inverses.
#[derive(Clone, Debug)]
pub struct GramLadder {
    levels: Vec<GramLevel>,
}

impl GramLadder {
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn gram(&self, n: usize) -> &Matrix {
        &self.levels[n].gram
    }

    pub fn inverse(&self, n: usize) -> &Matrix {
        &self.levels[n].inverse
    }

    /// Ratio of extreme eigenvalues of `P^(n)`.
    pub fn condition(&self, n: usize) -> f64 {
        self.levels[n].condition
    }

    fn solve(&self, n: usize, rhs: &DVector<f64>) -> DVector<f64> {
        self.levels[n].factor.solve(rhs)
    }
}

/// Builds `P^(n)` for `n <= M` and factors each one; a Gram matrix that is
/// not positive definite is an error.
pub fn build_gram_ladder(cfg: &FockSpaceConfig) -> Result<GramLadder> {
    cfg.validate()?;
    let mut levels = Vec::with_capacity(cfg.max_level + 1);
    for n in 0..=cfg.max_level {
        let gram = if n == 0 {
            Matrix::identity(1, 1)
        } else {
            let group = HyperoctahedralGroup::enumerate(n)?;
            symmetrizer_with_group(&group, cfg.d, &cfg.pi0, cfg.alpha, cfg.q)?
        };
        let ev = symmetric_eigenvalues(&gram);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        let factor = Cholesky::new(gram.clone()).ok_or(Error::NotInvertible { level: n })?;
        if lo.is_nan() || lo <= 0.0 {
            return Err(Error::NotInvertible { level: n });
        }
        let condition = hi / lo;
        if condition > CONDITION_WARN {
            log::warn!("Gram matrix at level {n} has condition number {condition:e}");
        } else {
            log::debug!("Gram matrix at level {n}: condition number {condition:e}");
        }
        let inverse = factor.inverse();
        levels.push(GramLevel {
            gram,
            inverse,
            factor,
            condition,
        });
    }
    Ok(GramLadder { levels })
}

/// A vector of the truncated Fock space: levels `0..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    d: usize,
    levels: Vec<DVector<f64>>,
}

impl FockState {
    pub fn zero(d: usize, max_level: usize) -> Self {
        let levels = (0..=max_level)
            .map(|n| DVector::zeros(tensor_dim(d, n).unwrap_or(0)))
            .collect();
        Self { d, levels }
    }

    pub fn vacuum(d: usize, max_level: usize) -> Self {
        let mut s = Self::zero(d, max_level);
        s.levels[0][0] = 1.0;
        s
    }

    /// `e_{i1} (x) ... (x) e_{in}` at level `n = indices.len()` (0-based indices).
    pub fn basis(d: usize, max_level: usize, indices: &[usize]) -> Result<Self> {
        if indices.len() > max_level {
            return Err(Error::Capacity {
                what: "tensor level",
                requested: indices.len() as u128,
                limit: max_level as u128,
            });
        }
        let mut s = Self::zero(d, max_level);
        let mut pos = 0;
        for &i in indices {
            if i >= d {
                return Err(Error::DimensionMismatch { expected: d, found: i + 1 });
            }
            pos = pos * d + i;
        }
        s.levels[indices.len()][pos] = 1.0;
        Ok(s)
    }

    /// A state supported on one level.
    pub fn from_level(d: usize, max_level: usize, n: usize, v: DVector<f64>) -> Result<Self> {
        let mut s = Self::zero(d, max_level);
        if n > max_level || v.len() != s.levels[n].len() {
            return Err(Error::DimensionMismatch {
                expected: s.levels.get(n).map_or(0, |l| l.len()),
                found: v.len(),
            });
        }
        s.levels[n] = v;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &DVector<f64> {
        &self.levels[n]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut DVector<f64> {
        &mut self.levels[n]
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|l| l.iter().all(|&v| v == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.levels.iter().flat_map(|l| l.iter()).fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Levels carrying a nonzero entry.
    pub fn support(&self) -> Vec<usize> {
        (0..self.levels.len())
            .filter(|&n| self.levels[n].iter().any(|&v| v != 0.0))
            .collect()
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (l, o) in self.levels.iter_mut().zip(&other.levels) {
            l.axpy(a, o, 1.0);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            d: self.d,
            levels: self.levels.iter().map(|l| l * a).collect(),
        }
    }
}

fn check_vector(x: &DVector<f64>, d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    Ok(())
}

/// Right creation `xi_n -> xi_n (x) x`; the top level is dropped.
pub fn creation(x: &DVector<f64>, s: &FockState) -> Result<FockState> {
    let d = s.d;
    check_vector(x, d)?;
    let mut out = FockState::zero(d, s.max_level());
    for n in 0..s.max_level() {
        let src = &s.levels[n];
        let dst = &mut out.levels[n + 1];
        for (i, &v) in src.iter().enumerate() {
            if v != 0.0 {
                for (j, &xj) in x.iter().enumerate() {
                    dst[i * d + j] = v * xj;
                }
            }
        }
    }
    Ok(out)
}

/// Multiplies level `n` by `q^{2n}`.
pub fn q2n(s: &FockState, q: f64) -> FockState {
    FockState {
        d: s.d,
        levels: s
            .levels
            .iter()
            .enumerate()
            .map(|(n, l)| l * powu(q, 2 * n as u32))
            .collect(),
    }
}

/// A configured space with its Gram ladder; read-only after construction.
#[derive(Clone, Debug)]
pub struct FockSpace {
    cfg: FockSpaceConfig,
    ladder: GramLadder,
}

impl FockSpace {
    pub fn new(cfg: FockSpaceConfig) -> Result<Self> {
        let ladder = build_gram_ladder(&cfg)?;
        Ok(Self { cfg, ladder })
    }

    pub fn config(&self) -> &FockSpaceConfig {
        &self.cfg
    }

    pub fn ladder(&self) -> &GramLadder {
        &self.ladder
    }

    pub fn vacuum(&self) -> FockState {
        FockState::vacuum(self.cfg.d, self.cfg.max_level)
    }

    fn check_state(&self, s: &FockState) -> Result<()> {
        if s.d != self.cfg.d || s.max_level() != self.cfg.max_level {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.max_level,
                found: s.max_level(),
            });
        }
        Ok(())
    }

    /// Deformed inner product `sum_n u_n^T P^(n) v_n`.
    pub fn inner(&self, u: &FockState, v: &FockState) -> Result<f64> {
        self.check_state(u)?;
        self.check_state(v)?;
        Ok((0..=self.cfg.max_level)
            .map(|n| u.levels[n].dot(&(self.ladder.gram(n) * &v.levels[n])))
            .sum())
    }

    pub fn creation(&self, x: &DVector<f64>, s: &FockState) -> Result<FockState> {
        self.check_state(s)?;
        creation(x, s)
    }

    /// Adjoint of creation for the deformed inner product.
    pub fn annihilation(&self, x: &DVector<f64>, s: &FockState) -> Result<FockState> {
        self.check_state(s)?;
        let d = self.cfg.d;
        check_vector(x, d)?;
        let mut out = FockState::zero(d, self.cfg.max_level);
        for n in 0..self.cfg.max_level {
            let src = &s.levels[n + 1];
            if src.iter().all(|&v| v == 0.0) {
                continue;
            }
            let weighted = self.ladder.gram(n + 1) * src;
            // C(x)^T contracts the last tensor factor against x.
            let contracted = DVector::from_fn(src.len() / d, |i, _| {
                (0..d).map(|j| x[j] * weighted[i * d + j]).sum()
            });
            out.levels[n] = self.ladder.solve(n, &contracted);
        }
        Ok(out)
    }

    /// `G(x) = b(x) + b*(x)`.
    pub fn gaussian(&self, x: &DVector<f64>, s: &FockState) -> Result<FockState> {
        let mut out = self.annihilation(x, s)?;
        out.axpy(1.0, &self.creation(x, s)?);
        Ok(out)
    }

    /// `<Omega, G(x_k) ... G(x_1) Omega>` with `G(x_1)` applied first.
    pub fn gaussian_moment(&self, vectors: &[DVector<f64>]) -> Result<f64> {
        if vectors.len() > self.cfg.max_level {
            return Err(Error::Capacity {
                what: "word length (truncation level M)",
                requested: vectors.len() as u128,
                limit: self.cfg.max_level as u128,
            });
        }
        let mut s = self.vacuum();
        for x in vectors {
            s = self.gaussian(x, &s)?;
        }
        Ok(s.levels[0][0])
    }

    /// Largest entry of `b(x)b*(y) - q b*(y)b(x) - <x,y> I - alpha <x,Pi0 y> q^{2N}`
    /// over all basis states of levels `0..=M-2`.
    pub fn commutation_residual(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let d = self.cfg.d;
        check_vector(x, d)?;
        check_vector(y, d)?;
        let m = self.cfg.max_level;
        if m < 2 {
            return Err(Error::OutOfRange {
                name: "truncation level M",
                value: m as f64,
                range: ">= 2",
            });
        }
        let xy = x.dot(y);
        let x_pi_y = x.dot(&(&self.cfg.pi0 * y));
        let mut worst: f64 = 0.0;
        for n in 0..=m - 2 {
            for pos in 0..tensor_dim(d, n)? {
                let mut e = FockState::zero(d, m);
                e.levels[n][pos] = 1.0;
                let mut r = self.annihilation(x, &self.creation(y, &e)?)?;
                r.axpy(-self.cfg.q, &self.creation(y, &self.annihilation(x, &e)?)?);
                r.axpy(-xy, &e);
                r.axpy(-self.cfg.alpha * x_pi_y, &q2n(&e, self.cfg.q));
                worst = worst.max(r.max_abs());
            }
        }
        Ok(worst)
    }

    /// Standard-coordinate matrix of annihilation from level `n + 1` to `n`.
    pub fn annihilation_matrix(&self, x: &DVector<f64>, n: usize) -> Result<Matrix> {
        check_vector(x, self.cfg.d)?;
        if n >= self.cfg.max_level {
            return Err(Error::OutOfRange {
                name: "level",
                value: n as f64,
                range: "0..M",
            });
        }
        let c = creation_matrix(x, n)?;
        Ok(self.ladder.inverse(n) * c.transpose() * self.ladder.gram(n + 1))
    }
}

/// Standard-coordinate matrix of right creation from level `n` to `n + 1`.
pub fn creation_matrix(x: &DVector<f64>, n: usize) -> Result<Matrix> {
    let d = x.len();
    let dim = tensor_dim(d, n)?;
    let mut c = Matrix::zeros(dim * d, dim);
    for i in 0..dim {
        for j in 0..d {
            c[(i * d + j, i)] = x[j];
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::involutions;
    use alloc::vec;

    fn space(d: usize, m: usize, alpha: f64, q: f64, pi0: Matrix) -> FockSpace {
        FockSpace::new(FockSpaceConfig::new(d, m, alpha, q, pi0).unwrap()).unwrap()
    }

    fn e(d: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn creation_is_right_tensoring() {
        let s = creation(&e(2, 0), &FockState::vacuum(2, 3)).unwrap();
        assert_eq!(s, FockState::basis(2, 3, &[0]).unwrap());
        let t = creation(&e(2, 1), &s).unwrap();
        assert_eq!(t, FockState::basis(2, 3, &[0, 1]).unwrap());
        assert!(creation(&DVector::zeros(2), &t).unwrap().is_zero());
        // the top level is dropped
        let top = FockState::basis(2, 2, &[1, 1]).unwrap();
        assert!(creation(&e(2, 0), &top).unwrap().is_zero());
    }

    #[test]
    fn annihilation_basics() {
        let f = space(1, 2, 0.4, 0.3, involutions::identity(1));
        assert!(f.annihilation(&e(1, 0), &f.vacuum()).unwrap().is_zero());
        let one = FockState::basis(1, 2, &[0]).unwrap();
        let back = f.annihilation(&e(1, 0), &one).unwrap();
        assert!((back.level(0)[0] - 1.4).abs() < 1e-14);
        assert_eq!(back.support(), vec![0]);
    }

    #[test]
    fn gram_ladder_small_cases() {
        let f = space(1, 1, -0.25, 0.5, involutions::identity(1));
        assert_eq!(f.ladder().gram(0)[(0, 0)], 1.0);
        assert!((f.ladder().gram(1)[(0, 0)] - 0.75).abs() < 1e-15);
        let free = space(2, 3, 0.0, 0.0, involutions::swap12(2));
        for n in 0..=3 {
            let dim = free.ladder().gram(n).nrows();
            assert_eq!(free.ladder().gram(n), &Matrix::identity(dim, dim));
        }
        let g = space(2, 3, 0.5, 0.5, involutions::flip(2));
        for n in 0..=3 {
            assert!(symmetric_eigenvalues(g.ladder().gram(n))[0] > 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let pi0 = involutions::identity(2);
        assert!(FockSpaceConfig::new(2, 3, 1.0, 0.0, pi0.clone()).is_err());
        assert!(FockSpaceConfig::new(2, 3, 0.0, -1.0, pi0.clone()).is_err());
        assert!(FockSpaceConfig::new(2, 0, 0.0, 0.0, pi0.clone()).is_err());
        assert!(FockSpaceConfig::new(2, MAX_LEVEL + 1, 0.0, 0.0, pi0.clone()).is_err());
        assert!(FockSpaceConfig::new(3, 3, 0.0, 0.0, pi0).is_err());
    }

    #[test]
    fn long_words_are_refused() {
        let f = space(1, 2, 0.1, 0.1, involutions::identity(1));
        let w = vec![e(1, 0); 3];
        assert!(matches!(f.gaussian_moment(&w), Err(Error::Capacity { .. })));
    }

    #[test]
    fn q2n_scaling() {
        let s = FockState::basis(2, 3, &[1, 0]).unwrap();
        assert!((q2n(&s, 0.5).level(2)[2] - 0.0625).abs() < 1e-16);
        let v = FockState::vacuum(2, 3);
        assert_eq!(q2n(&v, 0.0), v);
        assert_eq!(q2n(&s, 1.0), s);
    }

    #[test]
    fn named_moments() {
        let f = space(2, 4, 0.45, 0.3, involutions::swap12(2));
        let m = f.gaussian_moment(&[e(2, 0), e(2, 1)]).unwrap();
        assert!((m - 0.45).abs() < 1e-12);
        assert!(f.gaussian_moment(&[e(2, 0), e(2, 1), e(2, 1)]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn free_commutation_relation() {
        let f = space(2, 4, 0.0, 0.0, involutions::flip(2));
        let x = DVector::from_vec(vec![0.3, -1.2]);
        let y = DVector::from_vec(vec![0.7, 0.4]);
        assert!(f.commutation_residual(&x, &y).unwrap() <= 1e-12);
    }

    #[test]
    fn deformed_commutation_relation() {
        let f = space(2, 5, 0.6, 0.3, involutions::flip(2));
        let x = DVector::from_vec(vec![0.8, -0.5]);
        let y = DVector::from_vec(vec![0.2, 1.1]);
        assert!(f.commutation_residual(&x, &y).unwrap() <= 1e-10);
    }

    #[test]
    fn agrees_with_wick_formula() {
        use crate::wick::{typeb_moment_vector, CovarianceData};
        let pi0 = involutions::swap12(2);
        let (alpha, q) = (0.35, -0.4);
        let f = space(2, 6, alpha, q, pi0.clone());
        let cov = CovarianceData::basis(pi0, alpha, q).unwrap();
        for word in [[0usize, 1, 1, 0, 0, 1], [0, 0, 0, 0, 1, 1], [1, 0, 1, 0, 1, 0]] {
            let vs: alloc::vec::Vec<_> = word.iter().map(|&i| e(2, i)).collect();
            let fock = f.gaussian_moment(&vs).unwrap();
            let wick = typeb_moment_vector(&word, &cov).unwrap();
            assert!((fock - wick).abs() < 1e-10, "{word:?}: {fock} vs {wick}");
        }
    }
}
