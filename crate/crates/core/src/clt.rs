//! Finite-`N` moments of `S_N = N^{-1/2} sum_{i<=N} (a_i + b_i) / sqrt 2`.
//!
//! Expanding `S_N^k` gives `(2N)^{-k/2}` times a sum over letter tuples.
//! Every tuple evaluates to `+-rho^p` or `0`, so a fixed-sign moment is stored
//! exactly as integer counts per power of `rho` ([`MomentCounts`]) and only
//! turned into a float at the end. Two independent enumerations produce those
//! counts and are required to agree exactly:
//!
//! * [`Method::Full`] walks all `(2N)^k` tuples.
//! * [`Method::Class`] groups tuples by the set partition of their index
//!   pattern. Within a class a term depends only on the relative order of the
//!   distinct indices and on the signs between them, so each distinct
//!   (order, signs) key is evaluated once and weighted by its multiplicity.
//!
//! [`expected_moment_exact`] averages over the sign distribution in exact
//! rational arithmetic. Sign variables are independent with mean `q` and
//! square 1, so a sign word has expectation `q^(number of variables with odd
//! exponent)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::involutions;
use crate::partitions::{set_partitions_min2, SetPartition};
use crate::poly::{powu, RatPoly, Rational};
use crate::spins::{
    eval_abstract_exact, sort_word, word_rho_power, CommutationSigns, Coupled, ExplicitSigns, Kind, Letter,
    RMode, SignTable, SignVar,
};
use crate::wick::{typeb_moment_scalar, typeb_moment_vector, CovarianceData, VARS_Q, VARS_Q_RHO};

/// Work limit of the full enumeration, in tuples.
pub const FULL_CAPACITY: u128 = 100_000_000;
/// Work limit of the class enumeration, `N^{k/2} * classes * 4^{k/2}`.
pub const CLASS_CAPACITY: u128 = 10_000_000_000;
/// Largest order for exact expectations with symmetric or coupled signs.
pub const EXACT_MAX_ORDER: usize = 10;
/// Largest order for exact expectations with ordered `r`, which also sums
/// over the relative order of the distinct indices.
pub const ORDERED_EXACT_MAX_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Method {
    Full,
    Class,
    /// The cheaper of the two that fits its capacity.
    #[default]
    Auto,
}

/// Joint law of the commutation signs for exact expectations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignLaw {
    Symmetric,
    Ordered,
    /// `r = s`, the law behind `b_i = a_i`.
    Coupled,
}

impl From<RMode> for SignLaw {
    fn from(m: RMode) -> Self {
        match m {
            RMode::Symmetric => SignLaw::Symmetric,
            RMode::Ordered => SignLaw::Ordered,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltConfig {
    pub n: usize,
    pub k: usize,
    pub q: f64,
    pub rho: f64,
    pub seed: u64,
    pub method: Method,
    pub r_mode: RMode,
}

impl CltConfig {
    pub fn new(n: usize, k: usize, q: f64, rho: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            k,
            q,
            rho,
            seed,
            method: Method::Auto,
            r_mode: RMode::Symmetric,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_r_mode(mut self, mode: RMode) -> Self {
        self.r_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("N must be at least 1"));
        }
        for (name, v) in [("q", self.q), ("rho", self.rho)] {
            if !(v > -1.0 && v < 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(-1, 1)",
                });
            }
        }
        Ok(())
    }

    pub fn signs(&self) -> Result<SignTable> {
        SignTable::with_mode(self.seed, self.q, self.r_mode)
    }
}

fn saturating_pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// `(2N)^k`.
pub fn full_work(n: usize, k: usize) -> u128 {
    saturating_pow(2 * n as u128, k)
}

/// `N^{floor(k/2)} * (number of classes) * 4^{floor(k/2)}`.
pub fn class_work(n: usize, k: usize) -> u128 {
    let classes = count_min2_partitions(k);
    saturating_pow(n as u128, k / 2)
        .saturating_mul(classes)
        .saturating_mul(saturating_pow(4, k / 2))
}

/// Set partitions of `[k]` with no singleton, by the recurrence
/// `a(k+1) = sum_j C(k, j) a(k - j)` over the block containing `k + 1`.
fn count_min2_partitions(k: usize) -> u128 {
    let mut a = vec![1u128];
    for m in 1..=k {
        // the block of element m has size j + 1 >= 2, choosing j of m - 1 others
        let mut total = 0u128;
        let mut binom = 1u128;
        for j in 0..m {
            if j >= 1 {
                total = total.saturating_add(binom.saturating_mul(a[m - 1 - j]));
            }
            binom = binom.saturating_mul((m - 1 - j) as u128) / (j as u128 + 1);
        }
        a.push(total);
    }
    a[k]
}

/// Picks a concrete method, or refuses naming the binding limit.
pub fn resolve_method(n: usize, k: usize, method: Method) -> Result<Method> {
    let full = full_work(n, k);
    let class = class_work(n, k);
    let refuse_full = Error::Capacity {
        what: "full enumeration (2N)^k",
        requested: full,
        limit: FULL_CAPACITY,
    };
    let refuse_class = Error::Capacity {
        what: "class enumeration N^(k/2)*classes*4^(k/2)",
        requested: class,
        limit: CLASS_CAPACITY,
    };
    match method {
        Method::Full if full <= FULL_CAPACITY => Ok(Method::Full),
        Method::Full => Err(refuse_full),
        Method::Class if class <= CLASS_CAPACITY => Ok(Method::Class),
        Method::Class => Err(refuse_class),
        Method::Auto => {
            let full_ok = full <= FULL_CAPACITY;
            let class_ok = class <= CLASS_CAPACITY;
            match (full_ok, class_ok) {
                (true, true) if full <= class => Ok(Method::Full),
                (_, true) => Ok(Method::Class),
                (true, false) => Ok(Method::Full),
                (false, false) => Err(refuse_class),
            }
        }
    }
}

/// `phi(S_N^k)` as `(2N)^{-k/2} sum_p counts[p] rho^p` with integer counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentCounts {
    pub n: usize,
    pub k: usize,
    /// `counts[p]` is the signed number of tuples evaluating to `+-rho^p`.
    pub counts: Vec<i128>,
}

impl MomentCounts {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            counts: vec![0; k / 2 + 1],
        }
    }

    fn add(&mut self, p: u32, v: i128) {
        self.counts[p as usize] += v;
    }

    pub fn value(&self, rho: f64) -> f64 {
        if self.k % 2 == 1 {
            return 0.0;
        }
        let sum: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(p, &c)| c as f64 * powu(rho, p as u32))
            .sum();
        sum / powu(2.0 * self.n as f64, (self.k / 2) as u32)
    }
}

/// Letter word for a tuple: `pattern` bit `t` set means `b` at position `t`.
fn letters(indices: &[usize], pattern: u32) -> Vec<Letter> {
    indices
        .iter()
        .enumerate()
        .map(|(t, &i)| Letter {
            kind: if pattern >> t & 1 == 1 { Kind::B } else { Kind::A },
            index: i,
        })
        .collect()
}

fn full_counts<S: CommutationSigns>(n: usize, k: usize, signs: &S) -> MomentCounts {
    let mut out = MomentCounts::new(n, k);
    if k % 2 == 1 {
        return out;
    }
    let mut idx = vec![1usize; k];
    loop {
        if word_rho_power(&letters(&idx, 0)).is_some() {
            for pattern in 0..1u32 << k {
                if let Some((sign, p)) = eval_abstract_exact(&letters(&idx, pattern), signs) {
                    out.add(p, i128::from(sign));
                }
            }
        }
        // odometer over index tuples; letter patterns are summed inside
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] <= n {
                break;
            }
            idx[pos] = 1;
        }
    }
}

/// Index tuple of a class with block `t` carrying `values[t]`.
fn class_indices(class: &SetPartition, values: &[usize]) -> Vec<usize> {
    class.labels().iter().map(|&l| values[l]).collect()
}

fn has_odd_block(class: &SetPartition) -> bool {
    class.blocks().iter().any(|b| b.len() % 2 == 1)
}

/// Ranks of `values` packed three bits per entry.
fn rank_code(values: &[usize]) -> u64 {
    let mut code = 0u64;
    for (t, &v) in values.iter().enumerate() {
        let rank = values.iter().filter(|&&w| w < v).count() as u64;
        code |= rank << (3 * t);
    }
    code
}

fn class_counts<S: CommutationSigns>(n: usize, k: usize, signs: &S) -> MomentCounts {
    let mut out = MomentCounts::new(n, k);
    if k % 2 == 1 {
        return out;
    }
    for class in set_partitions_min2(k) {
        if has_odd_block(&class) {
            continue;
        }
        let b = class.num_blocks();
        if b > n {
            continue;
        }
        let pairs: Vec<(usize, usize)> = (0..b).flat_map(|u| (u + 1..b).map(move |v| (u, v))).collect();
        // multiplicity of each (relative order, sign bits) key
        let mut keys: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        let mut values = vec![0usize; b];
        for_each_injection(n, &mut values, 0, &mut |vals| {
            let mut bits = 0u64;
            for (p, &(u, v)) in pairs.iter().enumerate() {
                let (x, y) = (vals[u], vals[v]);
                let triple = u64::from(signs.s(x, y) < 0)
                    | u64::from(signs.r(x, y) < 0) << 1
                    | u64::from(signs.r(y, x) < 0) << 2;
                bits |= triple << (3 * p);
            }
            *keys.entry((rank_code(vals), bits)).or_insert(0) += 1;
        });
        for ((code, bits), mult) in keys {
            let ranks: Vec<usize> = (0..b).map(|t| (code >> (3 * t) & 7) as usize + 1).collect();
            let mut local = ExplicitSigns::ones(b);
            for (p, &(u, v)) in pairs.iter().enumerate() {
                let triple = bits >> (3 * p);
                let sign = |bit: u64| if triple >> bit & 1 == 1 { -1 } else { 1 };
                local.set_s(ranks[u], ranks[v], sign(0));
                local.set_r(ranks[u], ranks[v], sign(1));
                local.set_r(ranks[v], ranks[u], sign(2));
            }
            let idx = class_indices(&class, &ranks);
            for pattern in 0..1u32 << k {
                if let Some((sign, p)) = eval_abstract_exact(&letters(&idx, pattern), &local) {
                    out.add(p, i128::from(sign) * mult as i128);
                }
            }
        }
    }
    out
}

/// Calls `f` on every tuple of distinct values in `1..=n` filling `values[depth..]`.
fn for_each_injection(n: usize, values: &mut [usize], depth: usize, f: &mut impl FnMut(&[usize])) {
    if depth == values.len() {
        f(values);
        return;
    }
    for v in 1..=n {
        if values[..depth].contains(&v) {
            continue;
        }
        values[depth] = v;
        for_each_injection(n, values, depth + 1, f);
    }
}

/// Exact integer form of `phi(S_N^k)` for the given signs.
pub fn moment_counts<S: CommutationSigns>(n: usize, k: usize, signs: &S, method: Method) -> Result<MomentCounts> {
    if n == 0 {
        return Err(Error::Invalid("N must be at least 1"));
    }
    Ok(match resolve_method(n, k, method)? {
        Method::Full => full_counts(n, k, signs),
        _ => class_counts(n, k, signs),
    })
}

/// `phi(S_N^k)` for the sign table of `cfg`.
pub fn moment_fixed_signs(cfg: &CltConfig) -> Result<f64> {
    cfg.validate()?;
    let counts = moment_counts(cfg.n, cfg.k, &cfg.signs()?, cfg.method)?;
    Ok(counts.value(cfg.rho))
}

/// Same moment with `b_i = a_i` and `r = s` (so `rho = 1`).
pub fn moment_fixed_signs_coupled(cfg: &CltConfig) -> Result<f64> {
    cfg.validate()?;
    let signs = Coupled(cfg.signs()?);
    Ok(moment_counts(cfg.n, cfg.k, &signs, cfg.method)?.value(1.0))
}

/// Slot in a parity table for one sign variable over indices `1..=b`.
fn var_slot(v: SignVar, law: SignLaw, b: usize) -> usize {
    let pair = |i: usize, j: usize| (i - 1) * b + (j - 1);
    match (v, law) {
        (SignVar::S(i, j), _) | (SignVar::R(i, j), SignLaw::Coupled) => pair(i.min(j), i.max(j)),
        (SignVar::R(a, c), SignLaw::Symmetric) => b * b + pair(a.min(c), a.max(c)),
        (SignVar::R(a, c), SignLaw::Ordered) => b * b + pair(a, c),
    }
}

/// Number of sign variables with odd exponent in the sorting of `word`.
fn odd_sign_variables(word: &[Letter], law: SignLaw, b: usize, parity: &mut [bool]) -> u32 {
    parity.iter_mut().for_each(|p| *p = false);
    sort_word(word, |v| {
        let s = var_slot(v, law, b);
        parity[s] = !parity[s];
    });
    parity.iter().filter(|&&p| p).count() as u32
}

/// All permutations of `1..=b`.
fn permutations(b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=b).collect();
    heap_permute(b, &mut current, &mut out);
    out
}

fn heap_permute(m: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if m <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..m - 1 {
        heap_permute(m - 1, a, out);
        if m % 2 == 0 {
            a.swap(i, m - 1);
        } else {
            a.swap(0, m - 1);
        }
    }
    heap_permute(m - 1, a, out);
}

/// Sum over letter patterns of `E[sign word] * rho^p` for one class, as an
/// integer polynomial in `(q, rho)` summed over the index orders in `orders`.
fn class_expectation(class: &SetPartition, law: SignLaw, orders: &[Vec<usize>]) -> RatPoly {
    let k = class.k();
    let b = class.num_blocks();
    let mut parity = vec![false; 2 * b * b];
    let mut poly = RatPoly::zero(VARS_Q_RHO);
    for order in orders {
        let idx = class_indices(class, order);
        for pattern in 0..1u32 << k {
            let w = letters(&idx, pattern);
            let Some(p) = word_rho_power(&w) else { continue };
            let odd = odd_sign_variables(&w, law, b, &mut parity);
            poly.add_term(odd, p, Rational::one());
        }
    }
    poly
}

fn falling(n: usize, b: usize) -> i128 {
    (0..b).map(|t| n as i128 - t as i128).product()
}

fn factorial(b: usize) -> i128 {
    (1..=b as i128).product()
}

fn check_exact_order(k: usize, law: SignLaw) -> Result<()> {
    let limit = match law {
        SignLaw::Ordered => ORDERED_EXACT_MAX_ORDER,
        _ => EXACT_MAX_ORDER,
    };
    if k > limit {
        return Err(Error::Capacity {
            what: "exact expectation order",
            requested: k as u128,
            limit: limit as u128,
        });
    }
    Ok(())
}

/// Class sums grouped by block count: entry `b` is the sum, over classes
/// with `b` blocks kept by `keep`, of the pattern sums divided by `2^{k/2}`
/// (and by `b!` when index orders are summed). Then
/// `E[phi(S_N^k)] = sum_b N(N-1)...(N-b+1) / N^{k/2} * entry_b`.
fn class_sums_by_blocks(k: usize, law: SignLaw, keep: impl Fn(&SetPartition) -> bool) -> Result<Vec<RatPoly>> {
    let mut sums = vec![RatPoly::zero(VARS_Q_RHO); k / 2 + 1];
    if k % 2 == 1 {
        return Ok(sums);
    }
    check_exact_order(k, law)?;
    let half = powu_i128(2, k / 2);
    for class in set_partitions_min2(k) {
        if has_odd_block(&class) || !keep(&class) {
            continue;
        }
        let b = class.num_blocks();
        let (orders, weight) = match law {
            // exchangeable under any relabeling: first-occurrence labels suffice
            SignLaw::Symmetric | SignLaw::Coupled => (vec![(1..=b).collect()], Rational::new(1, half)),
            SignLaw::Ordered => (permutations(b), Rational::new(1, half * factorial(b))),
        };
        sums[b] += class_expectation(&class, law, &orders).scale(&weight);
    }
    Ok(sums)
}

fn expected_over_classes(n: usize, k: usize, law: SignLaw, keep: impl Fn(&SetPartition) -> bool) -> Result<RatPoly> {
    if n == 0 {
        return Err(Error::Invalid("N must be at least 1"));
    }
    let mut total = RatPoly::zero(VARS_Q_RHO);
    let norm = powu_i128(n as i128, k / 2);
    for (b, sum) in class_sums_by_blocks(k, law, keep)?.into_iter().enumerate() {
        let count = falling(n, b);
        if count != 0 && !sum.is_zero() {
            total += sum.scale(&Rational::new(count, norm));
        }
    }
    Ok(total)
}

/// Coefficients `c_j` with `E[phi(S_N^k)] = sum_{j >= 0} c_j N^{-j}` for
/// every `N >= 1`. The falling factorial `N(N-1)...(N-b+1)` is expanded with
/// signed Stirling numbers of the first kind.
pub fn expectation_expansion(k: usize, law: SignLaw) -> Result<Vec<RatPoly>> {
    let half = k / 2;
    let mut coeffs = vec![RatPoly::zero(VARS_Q_RHO); half + 1];
    for (b, sum) in class_sums_by_blocks(k, law, |_| true)?.into_iter().enumerate() {
        if sum.is_zero() {
            continue;
        }
        for (m, &st) in stirling_first_signed(b).iter().enumerate() {
            if st != 0 {
                // N^m / N^{k/2} = N^{-(k/2 - m)}
                coeffs[half - m] += sum.scale(&Rational::from_integer(st));
            }
        }
    }
    Ok(coeffs)
}

/// Coefficients of `x(x-1)...(x-b+1)` in powers of `x`.
fn stirling_first_signed(b: usize) -> Vec<i128> {
    let mut c = vec![1i128];
    for t in 0..b {
        let mut next = vec![0i128; c.len() + 1];
        for (m, &v) in c.iter().enumerate() {
            next[m + 1] += v;
            next[m] -= v * t as i128;
        }
        c = next;
    }
    c
}

/// A constant `C` with `|E[phi(S_N^k)] - limit| <= C / N` for all `N >= n0`,
/// read off the exact expansion: the `N^0` term equals the limit, and
/// `C = sum_{j >= 1} |c_j| n0^{1-j}`.
pub fn expectation_gap_constant(k: usize, q: f64, rho: f64, n0: usize) -> Result<f64> {
    let coeffs = expectation_expansion(k, SignLaw::Symmetric)?;
    Ok(coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.eval(q, rho).abs() / powu(n0 as f64, j as u32 - 1))
        .sum())
}

fn powu_i128(base: i128, exp: usize) -> i128 {
    (0..exp).fold(1, |acc, _| acc * base)
}

/// `E[phi(S_N^k)]` over the sign law, as an exact polynomial in `(q, rho)`.
pub fn expected_moment_exact(n: usize, k: usize, law: SignLaw) -> Result<RatPoly> {
    expected_over_classes(n, k, law, |_| true)
}

/// Coupled expectation `E[phi(S_N^k)]` with `b_i = a_i`, `r = s`; a
/// polynomial in `q` alone.
pub fn coupled_expected_moment(n: usize, k: usize) -> Result<RatPoly> {
    Ok(expected_moment_exact(n, k, SignLaw::Coupled)?
        .substitute_second(&Rational::one())
        .with_vars(VARS_Q))
}

/// `E[phi(T_N^k)]` for a single sequence `T_N = N^{-1/2} sum a_i` with
/// `a_i a_j = s(i,j) a_j a_i`, computed by a separate one-letter enumeration.
pub fn type_a_expected_moment(n: usize, k: usize) -> Result<RatPoly> {
    if n == 0 {
        return Err(Error::Invalid("N must be at least 1"));
    }
    let mut total = RatPoly::zero(VARS_Q);
    if k % 2 == 1 {
        return Ok(total);
    }
    check_exact_order(k, SignLaw::Symmetric)?;
    let norm = powu_i128(n as i128, k / 2);
    for class in set_partitions_min2(k) {
        if has_odd_block(&class) {
            continue;
        }
        let b = class.num_blocks();
        let idx = class_indices(&class, &(1..=b).collect::<Vec<_>>());
        // inversions between distinct indices, each an s-variable
        let mut parity = vec![false; b * b];
        for x in 0..k {
            for y in x + 1..k {
                if idx[x] > idx[y] {
                    let slot = (idx[y] - 1) * b + idx[x] - 1;
                    parity[slot] = !parity[slot];
                }
            }
        }
        let odd = parity.iter().filter(|&&p| p).count() as u32;
        total.add_term(odd, 0, Rational::new(falling(n, b), norm));
    }
    Ok(total)
}

/// Both sides of the finite-`N` pairing identity.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingIdentity {
    /// Pairing-class part of the exact expectation.
    pub lhs: RatPoly,
    /// `N(N-1)...(N-n+1) / N^n` times the limit polynomial.
    pub rhs: RatPoly,
    pub matches: bool,
}

/// Compares the pairing classes of the exact expectation of order `2n` with
/// the falling-factorial-weighted limit polynomial.
pub fn pairing_class_identity(n_sites: usize, n: usize, law: SignLaw) -> Result<PairingIdentity> {
    if 2 * n > EXACT_MAX_ORDER {
        return Err(Error::Capacity {
            what: "pairing identity order 2n",
            requested: 2 * n as u128,
            limit: EXACT_MAX_ORDER as u128,
        });
    }
    if n_sites < n {
        let zero = RatPoly::zero(VARS_Q_RHO);
        return Ok(PairingIdentity {
            lhs: zero.clone(),
            rhs: zero,
            matches: true,
        });
    }
    let lhs = expected_over_classes(n_sites, 2 * n, law, SetPartition::is_pairing)?;
    let weight = Rational::new(falling(n_sites, n), powu_i128(n_sites as i128, n));
    let rhs = typeb_moment_scalar(2 * n)?.to_rational().scale(&weight);
    let matches = lhs == rhs;
    Ok(PairingIdentity { lhs, rhs, matches })
}

/// Evaluates an exact polynomial in `(q, rho)` at floats.
pub fn eval_rat(poly: &RatPoly, q: f64, rho: f64) -> f64 {
    poly.eval(q, rho)
}

/// One line of a convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub seed: u64,
    pub n: usize,
    /// `None` when the row was refused; see `skipped`.
    pub moment: Option<f64>,
    pub limit: f64,
    pub abs_error: Option<f64>,
    pub expected_moment: Option<f64>,
    /// Reason for a refusal, naming the binding limit.
    pub skipped: Option<String>,
}

/// Limit value `sum rho^NB q^(Cr + 2 CNB)` at floats.
pub fn limit_value(k: usize, q: f64, rho: f64) -> Result<f64> {
    Ok(typeb_moment_scalar(k)?.eval(q, rho))
}

/// A single row; capacity refusals become skipped rows, other errors propagate.
pub fn convergence_row(cfg: &CltConfig, limit: f64, expected: Option<f64>) -> Result<ConvergenceRow> {
    let mut row = ConvergenceRow {
        seed: cfg.seed,
        n: cfg.n,
        moment: None,
        limit,
        abs_error: None,
        expected_moment: expected,
        skipped: None,
    };
    match moment_fixed_signs(cfg) {
        Ok(m) => {
            row.moment = Some(m);
            row.abs_error = Some((m - limit).abs());
        }
        Err(Error::Capacity { limit: cap, .. }) => {
            row.skipped = Some(alloc::format!("{cap}"));
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Rows in seed-major, `N`-minor order, computed serially.
#[allow(clippy::too_many_arguments)]
pub fn convergence_report(
    k: usize,
    q: f64,
    rho: f64,
    ns: &[usize],
    seeds: &[u64],
    method: Method,
    exact_expectation: bool,
) -> Result<Vec<ConvergenceRow>> {
    let limit = limit_value(k, q, rho)?;
    let expected = expected_column(k, q, rho, ns, exact_expectation)?;
    let mut rows = Vec::with_capacity(ns.len() * seeds.len());
    for &seed in seeds {
        for (t, &n) in ns.iter().enumerate() {
            let cfg = CltConfig::new(n, k, q, rho, seed)?.with_method(method);
            rows.push(convergence_row(&cfg, limit, expected[t])?);
        }
    }
    Ok(rows)
}

/// Exact expectation per `N`, or `None` when not requested or beyond the
/// exact order limit.
pub fn expected_column(k: usize, q: f64, rho: f64, ns: &[usize], enabled: bool) -> Result<Vec<Option<f64>>> {
    ns.iter()
        .map(|&n| {
            if !enabled {
                return Ok(None);
            }
            match expected_moment_exact(n, k, SignLaw::Symmetric) {
                Ok(p) => Ok(Some(p.eval(q, rho))),
                Err(Error::Capacity { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Limit of mixed moments of the component processes: the vacuum moment of
/// `G(e_{i1}) ... G(e_{ik})` for orthonormal `e_i` and a diagonal `Pi0`.
/// Labels are 1-based.
pub fn process_limit_moment(labels: &[usize], alpha: f64, q: f64, pi0_diagonal: &[f64]) -> Result<f64> {
    if let Some(&bad) = pi0_diagonal.iter().find(|&&c| c != 1.0 && c != -1.0) {
        return Err(Error::OutOfRange {
            name: "Pi0 diagonal entry",
            value: bad,
            range: "{-1, 1}",
        });
    }
    let d = pi0_diagonal.len();
    let positions: Vec<usize> = labels
        .iter()
        .map(|&l| {
            if l == 0 || l > d {
                Err(Error::DimensionMismatch { expected: d, found: l })
            } else {
                Ok(l - 1)
            }
        })
        .collect::<Result<_>>()?;
    let cov = CovarianceData::basis(involutions::diagonal(pi0_diagonal), alpha, q)?;
    typeb_moment_vector(&positions, &cov)
}

/// Zero polynomial check helper for odd orders.
pub fn is_zero_poly(p: &RatPoly) -> bool {
    p.all_coeffs(|c| c.is_zero())
}
