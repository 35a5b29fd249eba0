//! Alphabets, Cantor iterates `C_k ⊂ Z_N` and their additive combinatorics.
//!
//! An [`Alphabet`] is a base `M` together with a set of admissible digits.
//! The Cantor iterate of depth `k` is the set of residues in `Z_N`, `N = M^k`,
//! whose base-`M` expansion uses admissible digits only. Everything here is
//! exact integer arithmetic; floating point enters only in [`Alphabet::dimension`]
//! and the regression in [`gamma_fit`].

use std::fmt;

use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = 1 << 62;

/// Cardinality cap for materialized index sets.
const MAX_ELEMENTS: u64 = 1 << 32;

/// Pair count above which the sum histogram is split across worker threads.
const PARALLEL_PAIRS: u64 = 1 << 24;

/// Pair count above which histograms switch to FFT convolution.
const FFT_PAIRS: u64 = 1 << 22;

/// Largest modulus for the FFT histogram path.
const FFT_MAX_MODULUS: u64 = 1 << 26;

/// A base `M ≥ 2` and a nonempty, strictly increasing list of digits in `0..M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlphabetRepr", into = "AlphabetRepr")]
pub struct Alphabet {
    base: u64,
    letters: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct AlphabetRepr {
    #[serde(rename = "M")]
    base: u64,
    #[serde(rename = "A")]
    letters: Vec<u64>,
}

impl TryFrom<AlphabetRepr> for Alphabet {
    type Error = Error;
    fn try_from(r: AlphabetRepr) -> Result<Self> {
        Alphabet::new(r.base, r.letters)
    }
}

impl From<Alphabet> for AlphabetRepr {
    fn from(a: Alphabet) -> Self {
        AlphabetRepr {
            base: a.base,
            letters: a.letters,
        }
    }
}

impl Alphabet {
    /// Letters are sorted; duplicates and out-of-range digits are rejected.
    pub fn new(base: u64, letters: impl Into<Vec<u64>>) -> Result<Self> {
        let mut letters = letters.into();
        if base < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "base must be >= 2, got {base}"
            )));
        }
        if letters.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".to_string()));
        }
        letters.sort_unstable();
        if let Some(w) = letters.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet(format!("duplicate letter {}", w[0])));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l >= base) {
            return Err(Error::InvalidAlphabet(format!(
                "letter {bad} out of range for base {base}"
            )));
        }
        Ok(Alphabet { base, letters })
    }

    /// The full alphabet `{0, …, M−1}`.
    pub fn full(base: u64) -> Result<Self> {
        Alphabet::new(base, (0..base).collect::<Vec<_>>())
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn letters(&self) -> &[u64] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, digit: u64) -> bool {
        self.letters.binary_search(&digit).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.letters.len() as u64 == self.base
    }

    /// `log|A| / log M`, the dimension of the limiting Cantor set.
    pub fn dimension(&self) -> f64 {
        (self.letters.len() as f64).ln() / (self.base as f64).ln()
    }

    /// True when `1 < |A| < M`, i.e. the dimension lies strictly inside `(0, 1)`.
    pub fn is_proper(&self) -> bool {
        self.letters.len() > 1 && !self.is_full()
    }

    /// Rejects alphabets whose dimension is 0 or 1.
    pub fn require_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "dimension {} is not in (0,1) for alphabet {self}",
                self.dimension()
            )))
        }
    }

    /// `M^k`, rejecting moduli above [`MAX_MODULUS`].
    pub fn modulus(&self, depth: u32) -> Result<u64> {
        checked_modulus(self.base, depth)
    }

    /// All proper alphabets of a base, in lexicographic order of their letter lists.
    pub fn all_proper(base: u64) -> Vec<Alphabet> {
        let mut out = Vec::new();
        for mask in 1u64..(1 << base) - 1 {
            if mask.count_ones() < 2 {
                continue;
            }
            let letters: Vec<u64> = (0..base).filter(|d| mask >> d & 1 == 1).collect();
            out.push(Alphabet { base, letters });
        }
        out.sort_by(|a, b| a.letters.cmp(&b.letters));
        out
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={} A={{", self.base)?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn checked_modulus(base: u64, depth: u32) -> Result<u64> {
    base.checked_pow(depth)
        .filter(|&n| n <= MAX_MODULUS)
        .ok_or(Error::ModulusOverflow { base, depth })
}

/// `log|A|/log M`.
pub fn dimension(alphabet: &Alphabet) -> f64 {
    alphabet.dimension()
}

/// Where an [`IndexSet`] came from, when it was derived from a Cantor iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorOrigin {
    #[serde(rename = "M")]
    pub base: u64,
    #[serde(rename = "A")]
    pub letters: Vec<u64>,
    pub k: u32,
}

/// A sorted set of distinct residues in `Z_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    #[serde(flatten, skip_serializing_if = "Option::is_none", default)]
    origin: Option<CantorOrigin>,
    #[serde(rename = "N")]
    modulus: u64,
    #[serde(rename = "elements")]
    members: Vec<u64>,
}

impl IndexSet {
    /// Sorts and deduplicates; every member must be below `modulus`.
    pub fn new(modulus: u64, members: impl Into<Vec<u64>>) -> Result<Self> {
        if modulus == 0 || modulus > MAX_MODULUS {
            return Err(Error::InvalidArgument(format!(
                "modulus {modulus} out of range"
            )));
        }
        let mut members = members.into();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.last().filter(|&&m| m >= modulus) {
            return Err(Error::InvalidArgument(format!(
                "residue {bad} not in Z_{modulus}"
            )));
        }
        Ok(IndexSet {
            origin: None,
            modulus,
            members,
        })
    }

    /// All of `Z_N`.
    pub fn full(modulus: u64) -> Result<Self> {
        IndexSet::new(modulus, (0..modulus).collect::<Vec<_>>())
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn origin(&self) -> Option<&CantorOrigin> {
        self.origin.as_ref()
    }

    /// Indicator vector of length `N`.
    pub fn indicator(&self) -> Vec<bool> {
        let mut mask = vec![false; self.modulus as usize];
        for &m in &self.members {
            mask[m as usize] = true;
        }
        mask
    }

    /// `S + t mod N`.
    pub fn translate(&self, t: u64) -> IndexSet {
        let n = self.modulus;
        let t = t % n;
        let mut members: Vec<u64> = self.members.iter().map(|&x| (x + t) % n).collect();
        members.sort_unstable();
        IndexSet {
            origin: None,
            modulus: n,
            members,
        }
    }

    /// `−S mod N`.
    pub fn reflect(&self) -> IndexSet {
        let n = self.modulus;
        let mut members: Vec<u64> = self.members.iter().map(|&x| (n - x) % n).collect();
        members.sort_unstable();
        IndexSet {
            origin: None,
            modulus: n,
            members,
        }
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.modulus == other.modulus && self.members.iter().all(|&x| other.contains(x))
    }
}

/// The Cantor iterate `C_k(M, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSet {
    #[serde(flatten)]
    alphabet: Alphabet,
    #[serde(rename = "k")]
    depth: u32,
    #[serde(rename = "N")]
    modulus: u64,
    elements: Vec<u64>,
}

impl CantorSet {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dimension(&self) -> f64 {
        self.alphabet.dimension()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn to_index_set(&self) -> IndexSet {
        IndexSet {
            origin: Some(CantorOrigin {
                base: self.alphabet.base,
                letters: self.alphabet.letters.clone(),
                k: self.depth,
            }),
            modulus: self.modulus,
            members: self.elements.clone(),
        }
    }
}

/// Enumerates `C_k = { Σ_j a_j M^j : a_j ∈ A }`, sorted ascending.
pub fn build_cantor(alphabet: &Alphabet, depth: u32) -> Result<CantorSet> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be >= 1".to_string()));
    }
    let modulus = alphabet.modulus(depth)?;
    let size = (alphabet.len() as u64)
        .checked_pow(depth)
        .filter(|&s| s <= MAX_ELEMENTS)
        .ok_or_else(|| Error::ScaleExceeded {
            method: "build_cantor",
            detail: format!("|A|^k too large for {alphabet}, k={depth}"),
        })?;
    // C_{j+1} = M·C_j + A keeps the list sorted because every letter is < M.
    let mut elements = Vec::with_capacity(size as usize);
    elements.extend_from_slice(&alphabet.letters);
    for _ in 1..depth {
        let mut next = Vec::with_capacity(elements.len() * alphabet.len());
        for &c in &elements {
            for &a in &alphabet.letters {
                next.push(c * alphabet.base + a);
            }
        }
        elements = next;
    }
    Ok(CantorSet {
        alphabet: alphabet.clone(),
        depth,
        modulus,
        elements,
    })
}

/// `X_ρ = ∪_{|m| ≤ ⌊2N^{1−ρ}⌋} (C_k + m) mod N`.
pub fn neighborhood(set: &CantorSet, rho: f64) -> Result<IndexSet> {
    let radius = neighborhood_radius(set.modulus, rho)?;
    Ok(neighborhood_with_radius(set, radius))
}

/// `∪_{|m| ≤ radius} (C_k + m) mod N` for an explicit integer radius.
pub fn neighborhood_with_radius(set: &CantorSet, radius: u64) -> IndexSet {
    let n = set.modulus;
    let origin = set.to_index_set().origin;
    if radius >= n || 2 * radius + 1 >= n {
        return IndexSet {
            origin,
            modulus: n,
            members: (0..n).collect(),
        };
    }
    // Difference array over the circle; each element covers [c−R, c+R].
    let len = n as usize;
    let mut cover = vec![0i64; len + 1];
    for &c in &set.elements {
        let lo = (c + n - radius) % n;
        let hi = lo + 2 * radius + 1;
        cover[lo as usize] += 1;
        if hi <= n {
            cover[hi as usize] -= 1;
        } else {
            cover[len] -= 1;
            cover[0] += 1;
            cover[(hi - n) as usize] -= 1;
        }
    }
    let mut members = Vec::new();
    let mut running = 0i64;
    for (i, d) in cover.iter().take(len).enumerate() {
        running += d;
        if running > 0 {
            members.push(i as u64);
        }
    }
    IndexSet {
        origin,
        modulus: n,
        members,
    }
}

/// `⌊2N^{1−ρ}⌋` for `ρ ∈ (0, 1)`.
pub fn neighborhood_radius(modulus: u64, rho: f64) -> Result<u64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must lie in (0,1), got {rho}"
        )));
    }
    let r = (2.0 * (modulus as f64).powf(1.0 - rho)).floor();
    Ok(if r >= modulus as f64 {
        modulus
    } else {
        r as u64
    })
}

/// An exact additive energy count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdditiveEnergy(BigUint);

impl AdditiveEnergy {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u128(&self) -> Option<u128> {
        u128::try_from(&self.0).ok()
    }

    pub fn to_f64(&self) -> f64 {
        match self.to_u128() {
            Some(v) => v as f64,
            None => self.0.to_string().parse().unwrap_or(f64::INFINITY),
        }
    }
}

impl From<u128> for AdditiveEnergy {
    fn from(v: u128) -> Self {
        AdditiveEnergy(BigUint::from(v))
    }
}

impl fmt::Display for AdditiveEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `|{(a,b,c,d) ∈ S⁴ : a+b ≡ c+d mod N}|` as the sum of squared sum-histogram counts.
pub fn additive_energy(set: &IndexSet) -> AdditiveEnergy {
    let hist = sum_histogram(set);
    let mut acc: u128 = 0;
    let mut big: Option<BigUint> = None;
    for &h in &hist {
        let sq = u128::from(h) * u128::from(h);
        match acc.checked_add(sq) {
            Some(v) => acc = v,
            None => {
                *big.get_or_insert_with(BigUint::default) += BigUint::from(acc) + BigUint::from(sq);
                acc = 0;
            }
        }
    }
    match big {
        Some(b) => AdditiveEnergy(b + BigUint::from(acc)),
        None => AdditiveEnergy(BigUint::from(acc)),
    }
}

/// `h(s) = #{(a, b) ∈ S² : a + b ≡ s mod N}`.
///
/// Large sets go through an exact FFT convolution; small ones, or any FFT
/// result that fails the integrality check, are counted directly.
pub fn sum_histogram(set: &IndexSet) -> Vec<u64> {
    fft_counts(set, Pairing::Sum).unwrap_or_else(|| sum_histogram_direct(set))
}

/// `D(d) = #{(a, b) ∈ S² : b − a ≡ d mod N}`, exact.
pub fn difference_histogram(set: &IndexSet) -> Vec<u64> {
    fft_counts(set, Pairing::Difference).unwrap_or_else(|| difference_histogram_direct(set))
}

/// Direct `O(|S|²)` difference count.
pub fn difference_histogram_direct(set: &IndexSet) -> Vec<u64> {
    let n = set.modulus as usize;
    let mut hist = vec![0u64; n];
    for &a in &set.members {
        let a = a as usize;
        for &b in &set.members {
            let b = b as usize;
            hist[if b >= a { b - a } else { b + n - a }] += 1;
        }
    }
    hist
}

#[derive(Clone, Copy)]
enum Pairing {
    Sum,
    Difference,
}

/// Exact pair counts by FFT, or `None` when the set is small enough to count
/// directly, too large for the transform, or rounding is not clean.
fn fft_counts(set: &IndexSet, pairing: Pairing) -> Option<Vec<u64>> {
    let n = set.modulus as usize;
    let size = set.members.len() as u64;
    let pairs = size.saturating_mul(size);
    if pairs <= FFT_PAIRS || set.modulus > FFT_MAX_MODULUS {
        return None;
    }
    let mut buf = vec![Complex64::default(); n];
    for &a in &set.members {
        buf[a as usize] = Complex64::new(1.0, 0.0);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    match pairing {
        Pairing::Sum => buf.iter_mut().for_each(|z| *z = *z * *z),
        Pairing::Difference => buf
            .iter_mut()
            .for_each(|z| *z = Complex64::new(z.norm_sqr(), 0.0)),
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut total: u64 = 0;
    for z in &buf {
        let v = z.re * scale;
        let r = v.round();
        if (v - r).abs() > 0.25 || (z.im * scale).abs() > 0.25 || r < 0.0 {
            return None;
        }
        out.push(r as u64);
        total += r as u64;
    }
    (total == pairs).then_some(out)
}

/// Direct count over unordered pairs, parallel for large sets.
pub fn sum_histogram_direct(set: &IndexSet) -> Vec<u64> {
    let n = set.modulus as usize;
    let s = &set.members;
    let pairs = (s.len() as u64).saturating_mul(s.len() as u64);
    let fill = |hist: &mut Vec<u64>, rows: &[u64]| {
        for &a in rows {
            // Unordered pairs a <= b; off-diagonal ones count twice.
            let start = s.partition_point(|&b| b < a);
            let a = a as usize;
            hist[(2 * a) % n] += 1;
            for &b in &s[start + 1..] {
                let mut t = a + b as usize;
                if t >= n {
                    t -= n;
                }
                hist[t] += 2;
            }
        }
    };
    if pairs <= PARALLEL_PAIRS || rayon::current_num_threads() == 1 {
        let mut hist = vec![0u64; n];
        fill(&mut hist, s);
        return hist;
    }
    let chunk = (s.len() / (4 * rayon::current_num_threads())).max(1);
    s.par_chunks(chunk)
        .fold(
            || vec![0u64; n],
            |mut hist, rows| {
                fill(&mut hist, rows);
                hist
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Diagnostics of the empirical additive-energy exponent fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaFit {
    /// `3δ − slope`.
    pub gamma: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the regression residuals.
    pub residual_norm: f64,
    pub k_used: Vec<u32>,
}

/// Regresses `log E(C_k)` on `k log M` and returns `γ̂ = 3δ − slope`.
///
/// Points with `k < min_k` are dropped before fitting; three or more must remain.
pub fn gamma_fit(
    alphabet: &Alphabet,
    energies: &[(u32, AdditiveEnergy)],
    min_k: u32,
) -> Result<GammaFit> {
    if energies.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument(
            "k values must be strictly increasing".to_string(),
        ));
    }
    let used: Vec<&(u32, AdditiveEnergy)> = energies.iter().filter(|(k, _)| *k >= min_k).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "gamma fit needs 3 points with k >= {min_k}, got {}",
            used.len()
        )));
    }
    let log_m = (alphabet.base() as f64).ln();
    let mut xs = Vec::with_capacity(used.len());
    let mut ys = Vec::with_capacity(used.len());
    for (k, e) in &used {
        let v = e.to_f64();
        if v <= 0.0 {
            return Err(Error::Domain(format!("zero additive energy at k={k}")));
        }
        xs.push(f64::from(*k) * log_m);
        ys.push(v.ln());
    }
    let line = least_squares(&xs, &ys)?;
    Ok(GammaFit {
        gamma: 3.0 * alphabet.dimension() - line.slope,
        slope: line.slope,
        intercept: line.intercept,
        residual_norm: line.rss.sqrt(),
        k_used: used.iter().map(|(k, _)| *k).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cantor(m: u64, letters: &[u64], k: u32) -> CantorSet {
        build_cantor(&Alphabet::new(m, letters.to_vec()).unwrap(), k).unwrap()
    }

    #[test]
    fn fft_histograms_match_direct_counts() {
        let c = cantor(4, &[0, 1, 3], 8).to_index_set();
        assert!(fft_counts(&c, Pairing::Sum).is_some());
        assert_eq!(sum_histogram(&c), sum_histogram_direct(&c));
        assert_eq!(difference_histogram(&c), difference_histogram_direct(&c));
        let small = cantor(3, &[0, 2], 2).to_index_set();
        assert!(fft_counts(&small, Pairing::Difference).is_none());
        let d = difference_histogram(&small);
        assert_eq!(d[0], 4);
        assert_eq!(d.iter().sum::<u64>(), 16);
    }

    fn brute_energy(s: &IndexSet) -> u128 {
        let n = s.modulus();
        let m = s.members();
        let mut count = 0u128;
        for &a in m {
            for &b in m {
                for &c in m {
                    for &d in m {
                        if (a + b) % n == (c + d) % n {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn middle_thirds() {
        assert_eq!(cantor(3, &[0, 2], 1).elements(), &[0, 2]);
        assert_eq!(cantor(3, &[0, 2], 2).elements(), &[0, 2, 6, 8]);
        assert_eq!(
            cantor(2, &[0, 1], 3).elements(),
            &(0..8).collect::<Vec<_>>()[..]
        );
    }

    #[test]
    fn digits_stay_in_alphabet() {
        let c = cantor(5, &[1, 3, 4], 4);
        assert_eq!(c.len(), 81);
        for &x in c.elements() {
            let mut y = x;
            for _ in 0..4 {
                assert!(c.alphabet().contains(y % 5));
                y /= 5;
            }
            assert_eq!(y, 0);
        }
    }

    #[test]
    fn alphabet_validation() {
        assert!(Alphabet::new(1, vec![0]).is_err());
        assert!(Alphabet::new(3, Vec::<u64>::new()).is_err());
        assert!(Alphabet::new(3, vec![0, 3]).is_err());
        assert!(Alphabet::new(3, vec![2, 2]).is_err());
        assert_eq!(Alphabet::new(3, vec![2, 0]).unwrap().letters(), &[0, 2]);
    }

    #[test]
    fn overflow_rejected() {
        let a = Alphabet::new(2, vec![0]).unwrap();
        assert!(build_cantor(&a, 62).is_ok());
        assert!(matches!(
            build_cantor(&a, 63),
            Err(Error::ModulusOverflow { .. })
        ));
        let a = Alphabet::new(10, vec![1]).unwrap();
        assert!(matches!(
            build_cantor(&a, 19),
            Err(Error::ModulusOverflow { .. })
        ));
        assert!(build_cantor(&a, 0).is_err());
    }

    #[test]
    fn dimensions() {
        let d = Alphabet::new(3, vec![0, 2]).unwrap().dimension();
        assert!((d - 0.630_929_753_6).abs() < 1e-10);
        assert_eq!(Alphabet::new(4, vec![0, 2]).unwrap().dimension(), 0.5);
        assert_eq!(Alphabet::new(5, vec![1]).unwrap().dimension(), 0.0);
    }

    #[test]
    fn proper_alphabets_enumerated() {
        assert_eq!(Alphabet::all_proper(3).len(), 3);
        assert_eq!(Alphabet::all_proper(4).len(), 10);
        assert_eq!(Alphabet::all_proper(5).len(), 25);
        assert!(Alphabet::all_proper(2).is_empty());
    }

    #[test]
    fn neighborhood_examples() {
        let c = cantor(3, &[0, 2], 2);
        let x = neighborhood_with_radius(&c, 1);
        assert_eq!(x.members(), &[0, 1, 2, 3, 5, 6, 7, 8]);
        assert_eq!(neighborhood_with_radius(&c, 0).members(), c.elements());

        // The floored radius 2N^{1−ρ} never drops below 2.
        assert_eq!(neighborhood_radius(9, 0.999_999).unwrap(), 2);
        assert_eq!(neighborhood_radius(729, 0.6).unwrap(), 27);
        let x = neighborhood(&c, 0.99).unwrap();
        assert_eq!(x, neighborhood_with_radius(&c, 2));
        assert_eq!(x.origin().unwrap().k, 2);

        let full = cantor(3, &[0, 1, 2], 3);
        assert_eq!(neighborhood(&full, 0.5).unwrap().len(), 27);
        assert_eq!(neighborhood_with_radius(&full, 0).len(), 27);
        assert!(neighborhood(&full, 1.0).is_err());
        assert!(neighborhood(&full, 0.0).is_err());
        assert!(neighborhood(&full, f64::NAN).is_err());
    }

    #[test]
    fn neighborhood_wraps_around() {
        let c = cantor(5, &[0, 4], 2);
        let x = neighborhood_with_radius(&c, 1);
        let mut expected: Vec<u64> = c
            .elements()
            .iter()
            .flat_map(|&e| [e + 24, e, e + 1].map(|y| y % 25))
            .collect();
        expected.sort_unstable();
        expected.dedup();
        assert_eq!(x.members(), &expected[..]);
    }

    #[test]
    fn energy_anchors() {
        let c1 = cantor(3, &[0, 2], 1).to_index_set();
        assert_eq!(additive_energy(&c1).to_u128(), Some(6));
        assert_eq!(brute_energy(&c1), 6);
        let single = IndexSet::new(7, vec![0]).unwrap();
        assert_eq!(additive_energy(&single).to_u128(), Some(1));
        for n in [1u64, 2, 5, 16, 27] {
            let full = IndexSet::full(n).unwrap();
            assert_eq!(additive_energy(&full).to_u128(), Some(u128::from(n).pow(3)));
        }
    }

    #[test]
    fn histogram_matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for _ in 0..200 {
            let n = rng.gen_range(1..=64u64);
            let size = rng.gen_range(1..=30usize.min(n as usize));
            let members: Vec<u64> = (0..size).map(|_| rng.gen_range(0..n)).collect();
            let s = IndexSet::new(n, members).unwrap();
            assert_eq!(
                additive_energy(&s).to_u128(),
                Some(brute_energy(&s)),
                "{s:?}"
            );
        }
    }

    #[test]
    fn gamma_fit_exact_power_laws() {
        let full = Alphabet::full(3).unwrap();
        let pts: Vec<(u32, AdditiveEnergy)> = (1..=6)
            .map(|k| (k, AdditiveEnergy::from(3u128.pow(3 * k))))
            .collect();
        let g = gamma_fit(&full, &pts, 3).unwrap();
        assert!((g.slope - 3.0).abs() < 1e-12);
        assert!(g.gamma.abs() < 1e-12);
        assert_eq!(g.k_used, vec![3, 4, 5, 6]);

        let single = Alphabet::new(3, vec![1]).unwrap();
        let pts: Vec<(u32, AdditiveEnergy)> =
            (1..=6).map(|k| (k, AdditiveEnergy::from(1))).collect();
        let g = gamma_fit(&single, &pts, 3).unwrap();
        assert!(g.slope.abs() < 1e-12);
        assert!(g.gamma.abs() < 1e-12);

        assert!(gamma_fit(&single, &pts[..4], 3).is_err());
        let unordered = vec![
            pts[3].clone(),
            pts[2].clone(),
            pts[4].clone(),
            pts[5].clone(),
        ];
        assert!(gamma_fit(&single, &unordered, 0).is_err());
    }

    #[test]
    fn gamma_positive_for_middle_thirds() {
        let a = Alphabet::new(3, vec![0, 2]).unwrap();
        let pts: Vec<(u32, AdditiveEnergy)> = (2..=8)
            .map(|k| {
                (
                    k,
                    additive_energy(&build_cantor(&a, k).unwrap().to_index_set()),
                )
            })
            .collect();
        let g = gamma_fit(&a, &pts, 3).unwrap();
        assert!(g.gamma > 0.0, "{g:?}");
    }

    #[test]
    fn json_schema() {
        let c = cantor(3, &[0, 2], 2);
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"M":3,"A":[0,2],"k":2,"N":9,"elements":[0,2,6,8]})
        );
        let back: CantorSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
        let x = serde_json::to_value(c.to_index_set()).unwrap();
        assert_eq!(
            x,
            serde_json::json!({"M":3,"A":[0,2],"k":2,"N":9,"elements":[0,2,6,8]})
        );
        let bare = serde_json::to_value(IndexSet::new(5, vec![4, 1]).unwrap()).unwrap();
        assert_eq!(bare, serde_json::json!({"N":5,"elements":[1,4]}));
    }

    fn small_set() -> impl Strategy<Value = IndexSet> {
        (1u64..48).prop_flat_map(|n| {
            proptest::collection::vec(0..n, 1..20).prop_map(move |m| IndexSet::new(n, m).unwrap())
        })
    }

    proptest! {
        #[test]
        fn energy_bounds_and_symmetries(s in small_set(), t in 0u64..100) {
            let e = additive_energy(&s).to_u128().unwrap();
            let size = s.len() as u128;
            prop_assert!(e >= size * size);
            prop_assert!(e <= size * size * size);
            prop_assert_eq!(additive_energy(&s.translate(t)).to_u128().unwrap(), e);
            prop_assert_eq!(additive_energy(&s.reflect()).to_u128().unwrap(), e);
        }

        #[test]
        fn digit_splitting(m in 2u64..6, mask in 1u64..32, k1 in 1u32..4, k2 in 1u32..4) {
            let letters: Vec<u64> = (0..m).filter(|d| mask >> d & 1 == 1).collect();
            prop_assume!(!letters.is_empty());
            let a = Alphabet::new(m, letters).unwrap();
            let c1 = build_cantor(&a, k1).unwrap();
            let c2 = build_cantor(&a, k2).unwrap();
            let c = build_cantor(&a, k1 + k2).unwrap();
            prop_assert_eq!(c.len(), c1.len() * c2.len());
            let n2 = m.pow(k2);
            let mut split: Vec<u64> = c1.elements().iter()
                .flat_map(|&x| c2.elements().iter().map(move |&e| n2 * x + e))
                .collect();
            split.sort_unstable();
            prop_assert_eq!(c.elements(), &split[..]);
        }

        #[test]
        fn neighborhood_monotone(mask in 1u64..31, k in 1u32..5, r1 in 0.05f64..0.95, r2 in 0.05f64..0.95) {
            let letters: Vec<u64> = (0..5).filter(|d| mask >> d & 1 == 1).collect();
            let a = Alphabet::new(5, letters).unwrap();
            let c = build_cantor(&a, k).unwrap();
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let wide = neighborhood(&c, lo).unwrap();
            let narrow = neighborhood(&c, hi).unwrap();
            prop_assert!(c.to_index_set().is_subset_of(&narrow));
            prop_assert!(narrow.is_subset_of(&wide));
            // brute-force membership
            let n = c.modulus() as i64;
            let r = neighborhood_radius(c.modulus(), hi).unwrap() as i64;
            for x in 0..n {
                let inside = c.elements().iter().any(|&e| {
                    (-r..=r).any(|m| (e as i64 + m).rem_euclid(n) == x)
                });
                prop_assert_eq!(inside, narrow.contains(x as u64));
            }
        }
    }
}
