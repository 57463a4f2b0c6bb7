//! Closed-form moments as sums over (type-B) pairings.
//!
//! Positions follow the order of application: position 1 labels the first
//! operator applied to the vacuum. Crossings and nestings are invariant under
//! reversing positions, so this only matters when reading off which vector
//! sits at which position.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{check_involution, symmetric_eigenvalues, Matrix};
use crate::partitions::pairings;
use crate::poly::{powu, IntPoly};

/// Largest moment order evaluated by enumeration unless configured otherwise.
pub const DEFAULT_ORDER_CAP: usize = 16;

pub const VARS_Q_RHO: [&str; 2] = ["q", "rho"];
pub const VARS_Q_T: [&str; 2] = ["q", "t"];
pub const VARS_Q: [&str; 2] = ["q", ""];

fn check_order(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        return Err(Error::Capacity {
            what: "moment order",
            requested: order as u128,
            limit: cap as u128,
        });
    }
    Ok(())
}

/// `sum_{(pi,f)} rho^{NB} q^{Cr + 2 CNB}` over type-B pairings of `[order]`;
/// the zero polynomial for odd orders.
pub fn typeb_moment_scalar(order: usize) -> Result<IntPoly> {
    typeb_moment_scalar_capped(order, DEFAULT_ORDER_CAP)
}

pub fn typeb_moment_scalar_capped(order: usize, cap: usize) -> Result<IntPoly> {
    check_order(order, cap)?;
    if order % 2 == 1 {
        return Ok(IntPoly::zero(VARS_Q_RHO));
    }
    // Summing the 2^n colorings of a pairing factorizes block by block: a
    // negative block picks up rho and q^2 for each block enclosing it. Pairings
    // sharing (Cr, sorted enclosing counts) contribute identical products.
    let mut classes: BTreeMap<(u32, Vec<u32>), i64> = BTreeMap::new();
    for p in pairings(order / 2) {
        let mut enclosing = p.enclosing_counts();
        enclosing.sort_unstable();
        *classes.entry((p.crossings() as u32, enclosing)).or_insert(0) += 1;
    }
    let mut total = IntPoly::zero(VARS_Q_RHO);
    for ((cr, enclosing), count) in classes {
        let mut term = IntPoly::monomial(VARS_Q_RHO, cr, 0, count);
        for c in enclosing {
            let block = IntPoly::constant(VARS_Q_RHO, 1) + IntPoly::monomial(VARS_Q_RHO, 2 * c, 1, 1);
            term = &term * &block;
        }
        total += term;
    }
    Ok(total)
}

/// `sum_pi q^{Cr(pi)}`, the q-Gaussian moment.
pub fn q_moment(order: usize) -> Result<IntPoly> {
    check_order(order, DEFAULT_ORDER_CAP)?;
    let mut out = IntPoly::zero(VARS_Q);
    if order % 2 == 0 {
        for p in pairings(order / 2) {
            out.add_term(p.crossings() as u32, 0, 1);
        }
    }
    Ok(out)
}

/// `sum_pi q^{Cr(pi)} t^{Nest(pi)}`.
pub fn qt_moment(order: usize) -> Result<IntPoly> {
    check_order(order, DEFAULT_ORDER_CAP)?;
    let mut out = IntPoly::zero(VARS_Q_T);
    if order % 2 == 0 {
        for p in pairings(order / 2) {
            out.add_term(p.crossings() as u32, p.nestings() as u32, 1);
        }
    }
    Ok(out)
}

/// Test vectors, the involution `Pi0`, and the deformation parameters.
///
/// Only the two Gram matrices `<x_a, x_b>` and `<x_a, Pi0 x_b>` enter the
/// moment formula; they are computed once at construction.
#[derive(Clone, Debug)]
pub struct CovarianceData {
    d: usize,
    pi0: Matrix,
    alpha: f64,
    q: f64,
    gram: Matrix,
    twisted: Matrix,
}

impl CovarianceData {
    /// From an explicit list of real vectors in `R^d`.
    pub fn from_vectors(vectors: &[Vec<f64>], pi0: Matrix, alpha: f64, q: f64) -> Result<Self> {
        let d = pi0.nrows();
        check_involution(&pi0, d)?;
        let cols: Vec<DVector<f64>> = vectors
            .iter()
            .map(|v| {
                if v.len() != d {
                    Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    })
                } else {
                    Ok(DVector::from_column_slice(v))
                }
            })
            .collect::<Result<_>>()?;
        let m = cols.len();
        let mut gram = Matrix::zeros(m, m);
        let mut twisted = Matrix::zeros(m, m);
        for a in 0..m {
            let pa = &pi0 * &cols[a];
            for b in 0..m {
                gram[(a, b)] = cols[a].dot(&cols[b]);
                twisted[(b, a)] = cols[b].dot(&pa);
            }
        }
        Self::checked(d, pi0, alpha, q, gram, twisted)
    }

    /// The standard basis `e_1, ..., e_d` as test vectors.
    pub fn basis(pi0: Matrix, alpha: f64, q: f64) -> Result<Self> {
        let d = pi0.nrows();
        let vectors: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_vectors(&vectors, pi0, alpha, q)
    }

    /// From precomputed Gram matrices `<x_a, x_b>` and `<x_a, Pi0 x_b>`.
    pub fn from_gram(gram: Matrix, twisted: Matrix, pi0: Matrix, alpha: f64, q: f64) -> Result<Self> {
        let d = pi0.nrows();
        check_involution(&pi0, d)?;
        if gram.shape() != twisted.shape() || gram.nrows() != gram.ncols() {
            return Err(Error::DimensionMismatch {
                expected: gram.nrows(),
                found: twisted.nrows(),
            });
        }
        if symmetric_eigenvalues(&gram).first().is_some_and(|&m| m < -1e-10) {
            return Err(Error::Invalid("Gram matrix is not positive semi-definite"));
        }
        Self::checked(d, pi0, alpha, q, gram, twisted)
    }

    fn checked(d: usize, pi0: Matrix, alpha: f64, q: f64, gram: Matrix, twisted: Matrix) -> Result<Self> {
        if !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "[-1, 1]",
            });
        }
        if !(-1.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange {
                name: "q",
                value: q,
                range: "[-1, 1]",
            });
        }
        Ok(Self {
            d,
            pi0,
            alpha,
            q,
            gram,
            twisted,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_vectors(&self) -> usize {
        self.gram.nrows()
    }

    pub fn pi0(&self) -> &Matrix {
        &self.pi0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// `sum_{(pi,f)} alpha^{NB} q^{Cr + 2 CNB} prod_{f=+1} <x_i, x_j> prod_{f=-1} <x_i, Pi0 x_j>`
/// where `positions[p]` is the vector at position `p + 1`.
pub fn typeb_moment_vector(positions: &[usize], cov: &CovarianceData) -> Result<f64> {
    check_order(positions.len(), DEFAULT_ORDER_CAP)?;
    if let Some(&bad) = positions.iter().find(|&&v| v >= cov.num_vectors()) {
        return Err(Error::DimensionMismatch {
            expected: cov.num_vectors(),
            found: bad + 1,
        });
    }
    if positions.len() % 2 == 1 {
        return Ok(0.0);
    }
    let (alpha, q) = (cov.alpha, cov.q);
    let mut total = 0.0;
    for p in pairings(positions.len() / 2) {
        let enclosing = p.enclosing_counts();
        let mut term = powu(q, p.crossings() as u32);
        for (b, &(w, z)) in p.blocks().iter().enumerate() {
            let (x, y) = (positions[w - 1], positions[z - 1]);
            term *= cov.gram[(x, y)] + alpha * powu(q, 2 * enclosing[b]) * cov.twisted[(x, y)];
            if term == 0.0 {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

/// The two degenerate endpoints of the covariance parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `rho -> 1`: `(a_i + b_i)/sqrt 2 = sqrt 2 a_i`, a q-Gaussian of variance 2.
    PlusOne,
    /// `rho -> -1`: `a_i + b_i = 0`, the zero element.
    MinusOne,
}

/// Limit moments of the two boundary cases `|rho| = 1`. These are not
/// substitutions into [`typeb_moment_scalar`], which does not describe them.
pub fn boundary_moment(order: usize, q: f64, which: Boundary) -> Result<f64> {
    check_order(order, DEFAULT_ORDER_CAP)?;
    if order == 0 {
        return Ok(1.0);
    }
    if order % 2 == 1 {
        return Ok(0.0);
    }
    Ok(match which {
        Boundary::MinusOne => 0.0,
        Boundary::PlusOne => powu(2.0, (order / 2) as u32) * q_moment(order)?.eval(q, 0.0),
    })
}
