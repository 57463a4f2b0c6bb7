//! Mixed-spin elements `a_i, b_i` with random commutation signs.
//!
//! Two realizations live here and are checked against each other:
//!
//! * [`eval_abstract`] evaluates a word directly from the axioms. It moves
//!   letters into increasing index order by adjacent transpositions, picking
//!   up `s(i, j)` for every swap of two letters of the same kind and
//!   `r(p, q)` for a swap of `a_p` with `b_q`. The sorted word factorizes over
//!   indices, and each single-index subword of length `m` contributes `0` for
//!   odd `m` and `rho^(#a mod 2)` for even `m`.
//! * [`jw_element`] and [`eval_jw`] build the explicit Jordan-Wigner tensor
//!   model: three legs of 2x2 blocks per site, evaluated in the product state
//!   of `(1, 0)` vectors.
//!
//! The single-algebra rule `rho^(#a mod 2)` is not forced by the axioms. It is
//! what the tensor model produces (`a_i` carries `tau` with `tau^2 = I`), and
//! finite-`N` moments depend on it. The large-`N` limit only sees pairings and
//! does not.
//!
//! # Sign conventions
//!
//! In the tensor model `b_i b_j = s(i,j) r(i,j) r(j,i) b_j b_i`, so the model
//! satisfies `b_i b_j = s(i,j) b_j b_i` exactly when `r(i,j) = r(j,i)`.
//! [`RMode::Symmetric`] (the default) draws one `r` per unordered pair and is
//! the convention under which both realizations agree. [`RMode::Ordered`]
//! draws `r(i,j)` and `r(j,i)` independently; [`check_hypotheses`] then
//! reports the failing `b b` relation with a witness.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::powu;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    A,
    B,
}

/// One letter `a_i` or `b_i`; indices start at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub kind: Kind,
    pub index: usize,
}

impl Letter {
    pub const fn a(index: usize) -> Self {
        Self { kind: Kind::A, index }
    }

    pub const fn b(index: usize) -> Self {
        Self { kind: Kind::B, index }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::A => 'a',
            Kind::B => 'b',
        };
        write!(f, "{k}{}", self.index)
    }
}

pub type AbstractWord = Vec<Letter>;

/// Formats a word as `a1 b2 a1`.
pub fn format_word(word: &[Letter]) -> String {
    let mut out = String::new();
    for (n, l) in word.iter().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{l}"));
    }
    out
}

/// Source of the `+-1` commutation coefficients.
///
/// `s` is symmetric. `r(a, b)` is the coefficient in `a_a b_b = r b_b a_a`.
/// Both are only queried for distinct indices.
pub trait CommutationSigns {
    fn s(&self, i: usize, j: usize) -> i8;
    fn r(&self, a: usize, b: usize) -> i8;
}

impl<T: CommutationSigns + ?Sized> CommutationSigns for &T {
    fn s(&self, i: usize, j: usize) -> i8 {
        (**self).s(i, j)
    }
    fn r(&self, a: usize, b: usize) -> i8 {
        (**self).r(a, b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RMode {
    /// One `r` per unordered pair, independent of `s`.
    #[default]
    Symmetric,
    /// Independent `r(i, j)` and `r(j, i)`.
    Ordered,
}

/// Hash-defined random signs with `P(+1) = (1 + q) / 2`.
///
/// Each sign is `+1` iff `u < (1 + q) / 2`, where `u` is the top 53 bits of
/// a 64-bit hash scaled to `[0, 1)`. The hash chains the SplitMix64
/// finalizer
///
/// ```text
/// mix(z) = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
///          z ^= z >> 27; z *= 0x94d049bb133111eb; z ^ (z >> 31)
/// ```
///
/// as `mix(mix(mix(seed + GOLDEN * tag) ^ i) + GOLDEN ^ j)` with
/// `GOLDEN = 0x9e3779b97f4a7c15`. Tags are `1` for `s`, `2` for symmetric `r`
/// and `3` for ordered `r`. Indices are normalized to `(min, max)` for `s`
/// and symmetric `r`. Lookups are pure, so any evaluation order or thread
/// schedule sees the same table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTable {
    seed: u64,
    q: f64,
    mode: RMode,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SignTable {
    pub fn new(seed: u64, q: f64) -> Result<Self> {
        Self::with_mode(seed, q, RMode::Symmetric)
    }

    pub fn with_mode(seed: u64, q: f64, mode: RMode) -> Result<Self> {
        if !(q > -1.0 && q < 1.0) {
            return Err(Error::OutOfRange {
                name: "q",
                value: q,
                range: "(-1, 1)",
            });
        }
        Ok(Self { seed, q, mode })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mode(&self) -> RMode {
        self.mode
    }

    fn draw(&self, tag: u64, i: usize, j: usize) -> i8 {
        let h0 = mix64(self.seed.wrapping_add(GOLDEN.wrapping_mul(tag)));
        let h1 = mix64(h0 ^ i as u64);
        let h = mix64(h1.wrapping_add(GOLDEN) ^ j as u64);
        let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < 0.5 * (1.0 + self.q) {
            1
        } else {
            -1
        }
    }
}

impl CommutationSigns for SignTable {
    fn s(&self, i: usize, j: usize) -> i8 {
        if i == j {
            return 1;
        }
        self.draw(1, i.min(j), i.max(j))
    }

    fn r(&self, a: usize, b: usize) -> i8 {
        if a == b {
            return 1;
        }
        match self.mode {
            RMode::Symmetric => self.draw(2, a.min(b), a.max(b)),
            RMode::Ordered => self.draw(3, a, b),
        }
    }
}

/// Dense sign tables on indices `1..=n`, for oracles and exhaustive sweeps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitSigns {
    n: usize,
    s: Vec<i8>,
    r: Vec<i8>,
}

impl ExplicitSigns {
    /// All coefficients `+1`.
    pub fn ones(n: usize) -> Self {
        Self {
            n,
            s: vec![1; n * n],
            r: vec![1; n * n],
        }
    }

    /// Fills the tables from closures; `s` is read only for `i < j` and
    /// mirrored.
    pub fn from_fn(
        n: usize,
        mut s: impl FnMut(usize, usize) -> i8,
        mut r: impl FnMut(usize, usize) -> i8,
    ) -> Self {
        let mut out = Self::ones(n);
        for i in 1..=n {
            for j in 1..=n {
                if i < j {
                    let v = s(i, j);
                    out.set_s(i, j, v);
                }
                if i != j {
                    let v = r(i, j);
                    out.r[(i - 1) * n + (j - 1)] = v;
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set_s(&mut self, i: usize, j: usize, v: i8) {
        let n = self.n;
        self.s[(i - 1) * n + (j - 1)] = v;
        self.s[(j - 1) * n + (i - 1)] = v;
    }

    pub fn set_r(&mut self, a: usize, b: usize, v: i8) {
        self.r[(a - 1) * self.n + (b - 1)] = v;
    }
}

impl CommutationSigns for ExplicitSigns {
    fn s(&self, i: usize, j: usize) -> i8 {
        self.s[(i - 1) * self.n + (j - 1)]
    }

    fn r(&self, a: usize, b: usize) -> i8 {
        self.r[(a - 1) * self.n + (b - 1)]
    }
}

/// Forces `r = s`, the sign structure compatible with `b_i = a_i`.
#[derive(Clone, Debug)]
pub struct Coupled<S>(pub S);

impl<S: CommutationSigns> CommutationSigns for Coupled<S> {
    fn s(&self, i: usize, j: usize) -> i8 {
        self.0.s(i, j)
    }
    fn r(&self, a: usize, b: usize) -> i8 {
        self.0.s(a, b)
    }
}

/// A commutation coefficient picked up while sorting a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignVar {
    /// `s(i, j)` with `i < j`.
    S(usize, usize),
    /// `r(a, b)` from swapping `a_a` and `b_b`.
    R(usize, usize),
}

/// Sorts `word` into increasing index order by adjacent transpositions
/// (a stable bubble sort) and reports the coefficient of every swap.
/// Returns the sorted word.
pub fn sort_word(word: &[Letter], mut visit: impl FnMut(SignVar)) -> AbstractWord {
    let mut w: AbstractWord = word.to_vec();
    let len = w.len();
    for pass in 0..len {
        let mut swapped = false;
        for x in 0..len.saturating_sub(1 + pass) {
            let (l, r) = (w[x], w[x + 1]);
            if l.index > r.index {
                visit(swap_var(l, r));
                w.swap(x, x + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    w
}

#[inline]
fn swap_var(l: Letter, r: Letter) -> SignVar {
    match (l.kind, r.kind) {
        (Kind::A, Kind::B) => SignVar::R(l.index, r.index),
        (Kind::B, Kind::A) => SignVar::R(r.index, l.index),
        _ => SignVar::S(l.index.min(r.index), l.index.max(r.index)),
    }
}

/// Power of `rho` contributed by a word already sorted by index, or `None`
/// when some single-index subword has odd length.
pub fn sorted_rho_power(sorted: &[Letter]) -> Option<u32> {
    let mut power = 0;
    let mut x = 0;
    while x < sorted.len() {
        let idx = sorted[x].index;
        let (mut len, mut n_a) = (0usize, 0usize);
        while x < sorted.len() && sorted[x].index == idx {
            len += 1;
            n_a += usize::from(sorted[x].kind == Kind::A);
            x += 1;
        }
        if len % 2 == 1 {
            return None;
        }
        power += (n_a % 2) as u32;
    }
    Some(power)
}

/// `rho^(#a mod 2)` or `None` for every index, without sorting.
pub fn word_rho_power(word: &[Letter]) -> Option<u32> {
    let mut w = word.to_vec();
    w.sort_by_key(|l| l.index);
    sorted_rho_power(&w)
}

/// Exact value of a word as `sign * rho^power`, or `None` when it vanishes.
pub fn eval_abstract_exact<S: CommutationSigns>(word: &[Letter], signs: &S) -> Option<(i8, u32)> {
    // zero test first: it does not depend on the ordering
    word_rho_power(word)?;
    let mut sign: i8 = 1;
    let sorted = sort_word(word, |v| {
        sign *= match v {
            SignVar::S(i, j) => signs.s(i, j),
            SignVar::R(a, b) => signs.r(a, b),
        }
    });
    Some((sign, sorted_rho_power(&sorted).unwrap_or(0)))
}

/// `phi(word)` from the axioms; the empty word gives 1.
pub fn eval_abstract<S: CommutationSigns>(word: &[Letter], signs: &S, rho: f64) -> f64 {
    match eval_abstract_exact(word, signs) {
        Some((sign, p)) => f64::from(sign) * powu(rho, p),
        None => 0.0,
    }
}

pub type Mat2 = Matrix2<f64>;

/// `sigma_x = diag(1, x)`.
pub fn sigma(x: i8) -> Mat2 {
    Mat2::new(1.0, 0.0, 0.0, f64::from(x))
}

/// The swap `[[0, 1], [1, 0]]`.
pub fn gamma() -> Mat2 {
    Mat2::new(0.0, 1.0, 1.0, 0.0)
}

/// `[[rho, sqrt(1 - rho^2)], [sqrt(1 - rho^2), -rho]]`.
pub fn tau(rho: f64) -> Mat2 {
    let c = libm::sqrt(1.0 - rho * rho);
    Mat2::new(rho, c, c, -rho)
}

/// Parameters of the tensor model. `tau` can be replaced for negative controls.
#[derive(Clone, Debug, PartialEq)]
pub struct JwModel {
    rho: f64,
    tau: Mat2,
}

impl JwModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::OutOfRange {
                name: "rho",
                value: rho,
                range: "(-1, 1)",
            });
        }
        Ok(Self { rho, tau: tau(rho) })
    }

    /// Same model with the third-leg block of `a_i` replaced.
    pub fn with_tau(mut self, tau: Mat2) -> Self {
        self.tau = tau;
        self
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tau(&self) -> &Mat2 {
        &self.tau
    }
}

/// What a leg holds beyond the explicit slots. Both variants are diagonal
/// with `+-1` entries, so they commute with each other and have vacuum
/// expectation 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Identity,
    SignDiagonal,
}

/// A product operator: three legs, each a tensor product of 2x2 blocks on
/// slots `1..=m` followed by a diagonal sign tail.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotOperator {
    horizon: usize,
    legs: [Vec<Mat2>; 3],
    tails: [Tail; 3],
}

impl SlotOperator {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Block at `slot` (1-based) of `leg` (0, 1 or 2).
    pub fn block(&self, leg: usize, slot: usize) -> &Mat2 {
        &self.legs[leg][slot - 1]
    }

    pub fn tail(&self, leg: usize) -> Tail {
        self.tails[leg]
    }
}

/// Builds `a_i = zeta_i (x) alpha_i (x) eta_i` or `b_i = zeta_i (x) beta_i (x) theta_i`
/// with explicit slots `1..=m`.
///
/// * `zeta_i`: `sigma_{s(k,i)}` on slots `k < i`, `gamma` on slot `i`, then `I`.
/// * `alpha_i`: `gamma` on slot `i`, `I` elsewhere.
/// * `beta_i`: `sigma_{s(k,i) r(k,i)}` on every slot `k != i`, `gamma` on slot `i`.
/// * `eta_i`: `tau` on slot `i`; `theta_i = I`.
pub fn jw_element<S: CommutationSigns>(
    kind: Kind,
    i: usize,
    signs: &S,
    model: &JwModel,
    m: usize,
) -> Result<SlotOperator> {
    if i == 0 || i > m {
        return Err(Error::BeyondHorizon { index: i, horizon: m });
    }
    let id = Mat2::identity();
    let zeta: Vec<Mat2> = (1..=m)
        .map(|k| match k.cmp(&i) {
            core::cmp::Ordering::Less => sigma(signs.s(k, i)),
            core::cmp::Ordering::Equal => gamma(),
            core::cmp::Ordering::Greater => id,
        })
        .collect();
    let (middle, third, tails) = match kind {
        Kind::A => (
            (1..=m).map(|k| if k == i { gamma() } else { id }).collect(),
            (1..=m).map(|k| if k == i { model.tau } else { id }).collect(),
            [Tail::Identity, Tail::Identity, Tail::Identity],
        ),
        Kind::B => (
            (1..=m)
                .map(|k| if k == i { gamma() } else { sigma(signs.s(k, i) * signs.r(k, i)) })
                .collect(),
            vec![id; m],
            [Tail::Identity, Tail::SignDiagonal, Tail::Identity],
        ),
    };
    Ok(SlotOperator {
        horizon: m,
        legs: [zeta, middle, third],
        tails,
    })
}

/// Builds the operators of a word on a common horizon.
pub fn jw_word<S: CommutationSigns>(
    word: &[Letter],
    signs: &S,
    model: &JwModel,
    m: usize,
) -> Result<Vec<SlotOperator>> {
    word.iter()
        .map(|l| jw_element(l.kind, l.index, signs, model, m))
        .collect()
}

/// Vacuum expectation of the product `ops[0] ops[1] ...` (leftmost first).
pub fn eval_jw(ops: &[SlotOperator]) -> Result<f64> {
    let Some(first) = ops.first() else {
        return Ok(1.0);
    };
    let m = first.horizon;
    if let Some(bad) = ops.iter().find(|o| o.horizon != m) {
        return Err(Error::HorizonMismatch(m, bad.horizon));
    }
    let mut value = 1.0;
    for leg in 0..3 {
        for slot in 0..m {
            let mut prod = Mat2::identity();
            for o in ops {
                prod *= o.legs[leg][slot];
            }
            value *= prod[(0, 0)];
            if value == 0.0 {
                return Ok(0.0);
            }
        }
    }
    Ok(value)
}

/// Convenience: `eval_jw` of a word with horizon equal to its largest index.
pub fn eval_jw_word<S: CommutationSigns>(word: &[Letter], signs: &S, model: &JwModel) -> Result<f64> {
    let m = word.iter().map(|l| l.index).max().unwrap_or(1);
    eval_jw(&jw_word(word, signs, model, m)?)
}

/// `X Y = c Y X` for 2x2 blocks, returning `c` when it is `+1` or `-1`.
fn block_commutation(x: &Mat2, y: &Mat2) -> Option<i8> {
    let xy = x * y;
    let yx = y * x;
    if (xy - yx).abs().max() <= 1e-14 {
        Some(1)
    } else if (xy + yx).abs().max() <= 1e-14 {
        Some(-1)
    } else {
        None
    }
}

/// Coefficient `c` with `X Y = c Y X`, checked slot by slot. Tails are
/// diagonal and commute.
pub fn commutation_coefficient(x: &SlotOperator, y: &SlotOperator) -> Result<Option<i8>> {
    if x.horizon != y.horizon {
        return Err(Error::HorizonMismatch(x.horizon, y.horizon));
    }
    let mut c = 1;
    for leg in 0..3 {
        for slot in 0..x.horizon {
            match block_commutation(&x.legs[leg][slot], &y.legs[leg][slot]) {
                Some(v) => c *= v,
                None => return Ok(None),
            }
        }
    }
    Ok(Some(c))
}

/// Outcome of one hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisResult {
    pub name: &'static str,
    pub description: &'static str,
    pub pass: bool,
    /// Number of individual identities checked.
    pub checked: usize,
    /// First failing word and what went wrong.
    pub witness: Option<(AbstractWord, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub results: Vec<HypothesisResult>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// Largest number of sites the checker accepts.
pub const MAX_CHECK_SITES: usize = 4;
const CHECK_TOL: f64 = 1e-12;
/// Longest word used for the boundedness sweep.
const H3_WORD_LEN: usize = 4;

struct Tracker {
    res: HypothesisResult,
}

impl Tracker {
    fn new(name: &'static str, description: &'static str) -> Self {
        Self {
            res: HypothesisResult {
                name,
                description,
                pass: true,
                checked: 0,
                witness: None,
            },
        }
    }

    fn record(&mut self, ok: bool, word: impl FnOnce() -> AbstractWord, why: impl FnOnce() -> String) {
        self.res.checked += 1;
        if !ok && self.res.pass {
            self.res.pass = false;
            self.res.witness = Some((word(), why()));
        }
    }
}

/// All words over `letters` of exactly `len` letters.
pub fn words_of_length(letters: &[Letter], len: usize) -> Vec<AbstractWord> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |&l| {
                    let mut w2 = w.clone();
                    w2.push(l);
                    w2
                })
            })
            .collect();
    }
    out
}

/// Checks the five structural hypotheses on the tensor model with sites
/// `1..=n_max`.
///
/// H4 uses random elements `g_i`, linear combinations of all words of length
/// at most 3 in `a_i, b_i` with coefficients drawn from `rng_seed`, and
/// compares `phi(g_{i1} ... g_{ik})` with `prod phi(g_ij)` for every
/// increasing index sequence.
pub fn check_hypotheses<S: CommutationSigns>(
    signs: &S,
    model: &JwModel,
    n_max: usize,
    rng_seed: u64,
) -> Result<HypothesisReport> {
    if n_max == 0 || n_max > MAX_CHECK_SITES {
        return Err(Error::OutOfRange {
            name: "nMax",
            value: n_max as f64,
            range: "1..=4",
        });
    }
    let m = n_max;
    let rho = model.rho;
    let op = |l: Letter| jw_element(l.kind, l.index, signs, model, m);
    let eval = |w: &[Letter]| -> Result<f64> { eval_jw(&jw_word(w, signs, model, m)?) };

    let mut h1 = Tracker::new("H1", "vanishing means");
    let mut h2 = Tracker::new("H2", "unit variances and covariance rho");
    let mut h3 = Tracker::new("H3", "moments bounded by 1");
    let mut h4 = Tracker::new("H4", "factorization over increasing products");
    let mut h5 = Tracker::new("H5", "commutation relations");

    for i in 1..=n_max {
        for l in [Letter::a(i), Letter::b(i)] {
            let v = eval(&[l])?;
            h1.record(v.abs() <= CHECK_TOL, || vec![l], || format!("phi = {v}"));
        }
        for (w, want) in [
            (vec![Letter::a(i), Letter::a(i)], 1.0),
            (vec![Letter::b(i), Letter::b(i)], 1.0),
            (vec![Letter::a(i), Letter::b(i)], rho),
            (vec![Letter::b(i), Letter::a(i)], rho),
        ] {
            let v = eval(&w)?;
            h2.record((v - want).abs() <= CHECK_TOL, || w.clone(), || format!("phi = {v}, expected {want}"));
        }
    }

    let letters: Vec<Letter> = (1..=n_max).flat_map(|i| [Letter::a(i), Letter::b(i)]).collect();
    for len in 1..=H3_WORD_LEN {
        for w in words_of_length(&letters, len) {
            let v = eval(&w)?;
            h3.record(v.abs() <= 1.0 + CHECK_TOL, || w.clone(), || format!("|phi| = {}", v.abs()));
        }
    }

    // H4 with random g_i = sum_w c_w w over words in {a_i, b_i} of length <= 3.
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let local: Vec<Vec<(f64, AbstractWord)>> = (1..=n_max)
        .map(|i| {
            (0..=3)
                .flat_map(|len| words_of_length(&[Letter::a(i), Letter::b(i)], len))
                .map(|w| (rng.random_range(-1.0..1.0), w))
                .collect()
        })
        .collect();
    let phi_g = |terms: &[&[(f64, AbstractWord)]]| -> Result<f64> {
        // multilinear expansion of phi(g_1 ... g_k)
        let mut total = 0.0;
        let mut idx = vec![0usize; terms.len()];
        loop {
            let mut c = 1.0;
            let mut w = Vec::new();
            for (t, &n) in terms.iter().zip(&idx) {
                c *= t[n].0;
                w.extend_from_slice(&t[n].1);
            }
            total += c * eval(&w)?;
            let mut pos = terms.len();
            loop {
                if pos == 0 {
                    return Ok(total);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < terms[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    };
    let singles: Vec<f64> = local.iter().map(|g| phi_g(&[g.as_slice()])).collect::<Result<_>>()?;
    for subset in 1u32..(1 << n_max) {
        if subset.count_ones() < 2 {
            continue;
        }
        let chosen: Vec<usize> = (0..n_max).filter(|&i| subset & (1 << i) != 0).collect();
        let parts: Vec<&[(f64, AbstractWord)]> = chosen.iter().map(|&i| local[i].as_slice()).collect();
        let joint = phi_g(&parts)?;
        let product: f64 = chosen.iter().map(|&i| singles[i]).product();
        let tol = 1e-10 * (1.0 + product.abs());
        h4.record(
            (joint - product).abs() <= tol,
            || chosen.iter().map(|&i| Letter::a(i + 1)).collect(),
            || format!("phi(g...) = {joint}, product = {product}"),
        );
    }

    for i in 1..=n_max {
        for j in 1..=n_max {
            if i == j {
                continue;
            }
            let pairs = [
                (Letter::a(i), Letter::a(j), signs.s(i, j)),
                (Letter::b(i), Letter::b(j), signs.s(i, j)),
                (Letter::a(i), Letter::b(j), signs.r(i, j)),
            ];
            for (x, y, want) in pairs {
                let got = commutation_coefficient(&op(x)?, &op(y)?)?;
                h5.record(
                    got == Some(want),
                    || vec![x, y],
                    || match got {
                        Some(c) => format!("{x} {y} = {c} {y} {x}, expected coefficient {want}"),
                        None => format!("{x} and {y} neither commute nor anticommute"),
                    },
                );
            }
        }
    }
    // the 2x2 lemma behind H5
    for x in [-1i8, 1] {
        let lhs = gamma() * sigma(x);
        let rhs = sigma(x) * gamma() * f64::from(x);
        h5.record(
            (lhs - rhs).abs().max() <= CHECK_TOL,
            Vec::new,
            || format!("gamma sigma_x != x sigma_x gamma for x = {x}"),
        );
    }

    Ok(HypothesisReport {
        results: vec![h1.res, h2.res, h3.res, h4.res, h5.res],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: usize) -> Letter {
        Letter::a(i)
    }
    fn b(i: usize) -> Letter {
        Letter::b(i)
    }

    #[test]
    fn crossing_table_entry() {
        let signs = ExplicitSigns::from_fn(2, |_, _| -1, |a, b| if (a, b) == (1, 2) { -1 } else { 1 });
        let rho = 0.3;
        let v = eval_abstract(&[a(1), a(2), b(1), b(2)], &signs, rho);
        // r(a-index 2, b-index 1) is the swap used here
        assert!((v - rho * rho).abs() < 1e-15);
        let signs2 = ExplicitSigns::from_fn(2, |_, _| 1, |_, _| -1);
        let v2 = eval_abstract(&[a(1), a(2), b(1), b(2)], &signs2, rho);
        assert!((v2 + rho * rho).abs() < 1e-15);
    }

    #[test]
    fn nesting_table_entry() {
        let signs = ExplicitSigns::from_fn(2, |_, _| -1, |_, _| -1);
        assert!((eval_abstract(&[a(1), b(2), b(2), b(1)], &signs, 0.4) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn means_vanish_and_empty_word_is_one() {
        let t = SignTable::new(3, 0.2).unwrap();
        assert_eq!(eval_abstract(&[a(5)], &t, 0.5), 0.0);
        assert_eq!(eval_abstract(&[], &t, 0.5), 1.0);
        assert_eq!(eval_abstract_exact(&[a(1), a(2), a(1)], &t), None);
    }

    #[test]
    fn jw_blocks() {
        let t = SignTable::new(1, 0.0).unwrap();
        let model = JwModel::new(0.4).unwrap();
        let a1 = jw_element(Kind::A, 1, &t, &model, 3).unwrap();
        assert_eq!(*a1.block(1, 1), gamma());
        assert_eq!(*a1.block(1, 2), Mat2::identity());
        assert_eq!(*a1.block(1, 3), Mat2::identity());
        let tau = *a1.block(2, 1);
        assert!((tau * tau - Mat2::identity()).abs().max() < 1e-15);
        let b2 = jw_element(Kind::B, 2, &t, &model, 3).unwrap();
        for slot in 1..=3 {
            assert_eq!(*b2.block(2, slot), Mat2::identity());
        }
        assert_eq!(b2.tail(1), Tail::SignDiagonal);
        assert!(jw_element(Kind::B, 4, &t, &model, 3).is_err());
    }

    #[test]
    fn jw_second_moments() {
        let t = SignTable::new(9, -0.3).unwrap();
        let model = JwModel::new(-0.7).unwrap();
        let v = eval_jw_word(&[a(2), a(2)], &t, &model).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = eval_jw_word(&[a(2), b(2)], &t, &model).unwrap();
        assert!((v + 0.7).abs() < 1e-15);
        let ops = [
            jw_element(Kind::A, 1, &t, &model, 1).unwrap(),
            jw_element(Kind::A, 1, &t, &model, 2).unwrap(),
        ];
        assert!(matches!(eval_jw(&ops), Err(Error::HorizonMismatch(1, 2))));
    }

    #[test]
    fn gamma_sigma_lemma() {
        for x in [-1i8, 1] {
            assert_eq!(gamma() * sigma(x), sigma(x) * gamma() * f64::from(x));
        }
    }

    #[test]
    fn hypotheses_hold_for_symmetric_signs() {
        let t = SignTable::new(7, 0.1).unwrap();
        let report = check_hypotheses(&t, &JwModel::new(0.4).unwrap(), 3, 7).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn tampered_tau_is_caught() {
        let t = SignTable::new(7, 0.1).unwrap();
        let model = JwModel::new(0.4).unwrap().with_tau(Mat2::new(0.4, 1.0, 1.0, -0.4));
        let report = check_hypotheses(&t, &model, 2, 7).unwrap();
        assert!(!report.get("H2").unwrap().pass || !report.get("H3").unwrap().pass);
    }

    #[test]
    fn sign_table_is_pure_and_symmetric() {
        let t = SignTable::new(42, 0.5).unwrap();
        for i in 1..20 {
            for j in 1..20 {
                if i != j {
                    assert_eq!(t.s(i, j), t.s(j, i));
                    assert_eq!(t.r(i, j), t.r(j, i));
                }
            }
        }
        let again = SignTable::new(42, 0.5).unwrap();
        assert_eq!(t.s(3, 8), again.s(3, 8));
        assert!(SignTable::new(0, 1.0).is_err());
    }

    #[test]
    fn sign_table_mean() {
        for q in [-0.6, 0.0, 0.5] {
            let t = SignTable::with_mode(11, q, RMode::Ordered).unwrap();
            let mut sum = 0i64;
            let mut count = 0i64;
            for i in 1..=150 {
                for j in 1..=150 {
                    if i != j {
                        sum += i64::from(t.r(i, j));
                        count += 1;
                    }
                }
            }
            let mean = sum as f64 / count as f64;
            assert!((mean - q).abs() < 0.02, "q = {q}: mean {mean}");
        }
    }

    #[test]
    fn abstract_matches_tensor_model_on_short_words() {
        let letters: Vec<Letter> = (1..=3).flat_map(|i| [a(i), b(i)]).collect();
        let model = JwModel::new(0.4).unwrap();
        for seed in 0..3 {
            let t = SignTable::new(seed, 0.2).unwrap();
            for len in 0..=5 {
                for w in words_of_length(&letters, len) {
                    let x = eval_abstract(&w, &t, 0.4);
                    let y = eval_jw(&jw_word(&w, &t, &model, 3).unwrap()).unwrap();
                    assert!((x - y).abs() <= 1e-12, "{}: {x} vs {y}", format_word(&w));
                }
            }
        }
    }

    #[test]
    fn ordered_r_breaks_the_bb_relation() {
        // r(1,2) = -r(2,1) makes b1 b2 = -s b2 b1 in the tensor model
        let signs = ExplicitSigns::from_fn(2, |_, _| 1, |a, _| if a == 1 { 1 } else { -1 });
        let report = check_hypotheses(&signs, &JwModel::new(0.2).unwrap(), 2, 0).unwrap();
        let h5 = report.get("H5").unwrap();
        assert!(!h5.pass);
        assert_eq!(h5.witness.as_ref().unwrap().0, vec![b(1), b(2)]);
        for name in ["H1", "H2", "H3", "H4"] {
            assert!(report.get(name).unwrap().pass, "{name}");
        }
    }
}
