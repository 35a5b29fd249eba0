//! Fractal uncertainty quantities for Cantor iterates: the fourth-power sum
//! `t_k`, the trace `tr((T*T)²)` on a neighborhood, the inequality checkers
//! built on them, and Fekete lower bounds for the gap exponent.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cantor::{
    additive_energy, build_cantor, difference_histogram, neighborhood, Alphabet, CantorSet,
    IndexSet,
};
use crate::error::{Error, Result};
use crate::qbaker::{restricted_dft, unit_root, DenseOperator, Dft};
use crate::spectral::singular_values;

/// Largest `|C_k|⁴` accepted by the quadruple-sum oracle.
pub const QUADRUPLE_MAX_TERMS: u128 = 100_000_000;

/// Largest `N` accepted by the singular-value oracle.
pub const SINGULAR_MAX_N: u64 = 1024;

/// Largest `N` accepted by the dense trace oracle.
pub const MATRIX_TRACE_MAX_N: u64 = 729;

/// Relative slack for the inequality checks.
pub const CHECK_SLACK: f64 = 1e-9;

/// Relative margin required for a strict inequality.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Bound on the imaginary part of the quadruple sum.
const QUADRUPLE_IMAG_TOL: f64 = 1e-9;

/// Tolerance for the `ℓ⁴` energy identity.
const L4_IDENTITY_TOL: f64 = 1e-8;

/// Largest modulus for which the quadruple oracle precomputes a twiddle table.
const TWIDDLE_MAX_N: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TkMethod {
    FftPairsum,
    QuadrupleOracle,
    SingularValueOracle,
}

impl TkMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TkMethod::FftPairsum => "fft-pairsum",
            TkMethod::QuadrupleOracle => "quadruple-oracle",
            TkMethod::SingularValueOracle => "singular-value-oracle",
        }
    }
}

/// One evaluation of `t_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TkRecord {
    #[serde(rename = "M")]
    pub base: u64,
    #[serde(rename = "A")]
    pub letters: Vec<u64>,
    pub k: u32,
    #[serde(rename = "N")]
    pub n: u64,
    pub t_k: f64,
    pub method: TkMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMethod {
    Pairsum,
    MatrixOracle,
}

impl TraceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceMethod::Pairsum => "pairsum",
            TraceMethod::MatrixOracle => "matrix-oracle",
        }
    }
}

/// One evaluation of `tr((T*T)²)` for `T = 1_X F_N 1_X` on a neighborhood `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(rename = "M")]
    pub base: u64,
    #[serde(rename = "A")]
    pub letters: Vec<u64>,
    pub k: u32,
    pub rho: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub value: f64,
    pub method: TraceMethod,
}

/// Neumaier-compensated accumulator; order of additions is the caller's.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn modulus_usize(set: &IndexSet) -> Result<usize> {
    usize::try_from(set.modulus())
        .map_err(|_| Error::InvalidArgument("modulus exceeds usize".to_string()))
}

/// `F_N(1_S)` by FFT.
pub fn indicator_transform(set: &IndexSet) -> Result<Vec<Complex64>> {
    let n = modulus_usize(set)?;
    let mut buf = vec![Complex64::default(); n];
    for &a in set.members() {
        buf[a as usize] = Complex64::new(1.0, 0.0);
    }
    Dft::new(n)?.forward_in_place(&mut buf);
    Ok(buf)
}

/// `(1/N) Σ_{j,l ∈ S} |F_N(1_S)(l − j)|²`.
///
/// The pairs are grouped by `l − j mod N` with an exact difference count, so
/// the cost is one FFT plus the histogram. Summation runs in index order.
pub fn pair_sum_trace(set: &IndexSet) -> Result<f64> {
    let f = indicator_transform(set)?;
    let counts = difference_histogram(set);
    let mut acc = CompensatedSum::default();
    for (c, z) in counts.iter().zip(&f) {
        if *c != 0 {
            acc.add(*c as f64 * z.norm_sqr());
        }
    }
    Ok(acc.value() / set.modulus() as f64)
}

fn record(set: &CantorSet, t_k: f64, method: TkMethod) -> TkRecord {
    TkRecord {
        base: set.alphabet().base(),
        letters: set.alphabet().letters().to_vec(),
        k: set.depth(),
        n: set.modulus(),
        t_k,
        method,
    }
}

/// `t_k` from one FFT of `1_{C_k}` and the pair sum.
pub fn t_k_fft(alphabet: &Alphabet, k: u32) -> Result<TkRecord> {
    let set = build_cantor(alphabet, k)?;
    t_k_fft_of(&set)
}

pub fn t_k_fft_of(set: &CantorSet) -> Result<TkRecord> {
    let t = pair_sum_trace(&set.to_index_set())?;
    Ok(record(set, t, TkMethod::FftPairsum))
}

/// `t_k = (1/N²) Σ_{j,l,m,n ∈ C_k} exp(2πi (l − j)(m − n)/N)`, evaluated term by term.
pub fn t_k_quadruple(alphabet: &Alphabet, k: u32) -> Result<TkRecord> {
    let set = build_cantor(alphabet, k)?;
    let c = set.len() as u128;
    let terms = c * c * c * c;
    if terms > QUADRUPLE_MAX_TERMS {
        return Err(Error::ScaleExceeded {
            method: "quadruple-sum oracle",
            detail: format!("|C_k|⁴ = {terms} > {QUADRUPLE_MAX_TERMS}"),
        });
    }
    let n = set.modulus();
    let elems = set.elements();
    let diffs: Vec<u64> = elems
        .iter()
        .flat_map(|&j| elems.iter().map(move |&l| (l + n - j) % n))
        .collect();
    let table: Option<Vec<Complex64>> =
        (n <= TWIDDLE_MAX_N).then(|| (0..n).map(|r| unit_root(r, n, 1.0)).collect());
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &a in &diffs {
        for &b in &diffs {
            let r = ((u128::from(a) * u128::from(b)) % u128::from(n)) as u64;
            let z = match &table {
                Some(t) => t[r as usize],
                None => unit_root(r, n, 1.0),
            };
            re.add(z.re);
            im.add(z.im);
        }
    }
    let nn = (n as f64) * (n as f64);
    let (re, im) = (re.value() / nn, im.value() / nn);
    if im.abs() > QUADRUPLE_IMAG_TOL {
        return Err(Error::Domain(format!(
            "quadruple sum has imaginary part {im:e}; index arithmetic is inconsistent"
        )));
    }
    Ok(record(&set, re, TkMethod::QuadrupleOracle))
}

/// `t_k = Σ s_j⁴` over the singular values of `1_{C_k} F_N 1_{C_k}`.
pub fn t_k_singular(alphabet: &Alphabet, k: u32) -> Result<TkRecord> {
    let set = build_cantor(alphabet, k)?;
    if set.modulus() > SINGULAR_MAX_N {
        return Err(Error::ScaleExceeded {
            method: "singular-value oracle",
            detail: format!("N = {} > {SINGULAR_MAX_N}", set.modulus()),
        });
    }
    let s = singular_values(&restricted_dft(&set.to_index_set()))?;
    let mut acc = CompensatedSum::default();
    for v in s {
        acc.add(v.powi(4));
    }
    Ok(record(&set, acc.value(), TkMethod::SingularValueOracle))
}

/// `tr((T*T)²)` for `T = 1_X F_N 1_X`, `X` the `ρ`-neighborhood of `C_k`.
pub fn trace_tt(alphabet: &Alphabet, k: u32, rho: f64, method: TraceMethod) -> Result<TraceRecord> {
    let set = build_cantor(alphabet, k)?;
    let x = neighborhood(&set, rho)?;
    let value = match method {
        TraceMethod::Pairsum => pair_sum_trace(&x)?,
        TraceMethod::MatrixOracle => matrix_trace(&x)?,
    };
    Ok(TraceRecord {
        base: alphabet.base(),
        letters: alphabet.letters().to_vec(),
        k,
        rho,
        n: set.modulus(),
        value,
        method,
    })
}

/// Materializes `T = 1_X F_N 1_X` as an `N × N` matrix and returns
/// `‖T*T‖_F² = tr((T*T)²)`.
pub fn matrix_trace(x: &IndexSet) -> Result<f64> {
    if x.modulus() > MATRIX_TRACE_MAX_N {
        return Err(Error::ScaleExceeded {
            method: "dense trace oracle",
            detail: format!("N = {} > {MATRIX_TRACE_MAX_N}", x.modulus()),
        });
    }
    let n = modulus_usize(x)?;
    let mask = x.indicator();
    let nn = n as u64;
    let scale = 1.0 / (n as f64).sqrt();
    let t = DenseOperator::from_fn(n, |i, j| {
        if mask[i] && mask[j] {
            unit_root((i as u64 * j as u64) % nn, nn, -1.0) * scale
        } else {
            Complex64::default()
        }
    });
    let g = t.adjoint().matmul(&t)?;
    Ok(g.frobenius_norm_sqr())
}

/// `t_k` by the FFT pair sum for every requested depth.
#[derive(Debug, Clone, Default)]
pub struct TkTable {
    records: BTreeMap<u32, TkRecord>,
}

impl TkTable {
    pub fn compute(alphabet: &Alphabet, ks: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut records = BTreeMap::new();
        for k in ks {
            records.insert(k, t_k_fft(alphabet, k)?);
        }
        Ok(TkTable { records })
    }

    pub fn get(&self, k: u32) -> Option<&TkRecord> {
        self.records.get(&k)
    }

    pub fn records(&self) -> impl Iterator<Item = &TkRecord> {
        self.records.values()
    }
}

/// One inequality check, serialized as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    #[serde(rename = "M")]
    pub base: u64,
    #[serde(rename = "A")]
    pub letters: Vec<u64>,
    pub k: u32,
    pub params: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub method: String,
}

impl CheckReport {
    fn new(check: &str, alphabet: &Alphabet, k: u32) -> Self {
        CheckReport {
            check: check.to_string(),
            base: alphabet.base(),
            letters: alphabet.letters().to_vec(),
            k,
            params: json!({}),
            lhs: 0.0,
            rhs: 0.0,
            holds: false,
            method: String::new(),
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn alphabet_of(r: &TkRecord) -> Result<Alphabet> {
    Alphabet::new(r.base, r.letters.clone())
}

fn same_alphabet(a: &TkRecord, b: &TkRecord) -> Result<()> {
    if a.base != b.base || a.letters != b.letters {
        return Err(Error::InvalidArgument(format!(
            "records belong to different alphabets: M={} A={:?} and M={} A={:?}",
            a.base, a.letters, b.base, b.letters
        )));
    }
    Ok(())
}

/// `16 N^{4(1−ρ)}`.
pub fn trace_domination_factor(n: u64, rho: f64) -> f64 {
    16.0 * (n as f64).powf(4.0 * (1.0 - rho))
}

/// `tr((T*T)²) ≤ 16 N^{4(1−ρ)} t_k`.
pub fn check_trace_domination(trace: &TraceRecord, tk: &TkRecord) -> Result<CheckReport> {
    if trace.base != tk.base || trace.letters != tk.letters || trace.k != tk.k {
        return Err(Error::InvalidArgument(
            "trace and t_k records describe different Cantor iterates".to_string(),
        ));
    }
    let alphabet = alphabet_of(tk)?;
    let rhs = trace_domination_factor(tk.n, trace.rho) * tk.t_k;
    let mut r = CheckReport::new("trace-domination", &alphabet, tk.k);
    r.params = json!({ "rho": trace.rho, "N": tk.n });
    r.lhs = trace.value;
    r.rhs = rhs;
    r.holds = trace.value <= rhs * (1.0 + CHECK_SLACK);
    r.method = format!("{}/{}", trace.method.as_str(), tk.method.as_str());
    Ok(r)
}

/// `t_{k₁+k₂} ≤ t_{k₁} t_{k₂}`.
pub fn check_submultiplicativity(
    t1: &TkRecord,
    t2: &TkRecord,
    t12: &TkRecord,
) -> Result<CheckReport> {
    same_alphabet(t1, t2)?;
    same_alphabet(t1, t12)?;
    if t1.k + t2.k != t12.k {
        return Err(Error::InvalidArgument(format!(
            "depths {} + {} do not add up to {}",
            t1.k, t2.k, t12.k
        )));
    }
    let alphabet = alphabet_of(t1)?;
    let rhs = t1.t_k * t2.t_k;
    let mut r = CheckReport::new("submultiplicativity", &alphabet, t12.k);
    r.params = json!({ "k1": t1.k, "k2": t2.k });
    r.lhs = t12.t_k;
    r.rhs = rhs;
    r.holds = t12.t_k <= rhs * (1.0 + CHECK_SLACK);
    r.method = t12.method.as_str().to_string();
    Ok(r)
}

/// `t_k ≤ |C_k|⁴/N² = N^{4δ−2}`, required to be strict for `k ≥ 2`.
///
/// Rejects alphabets with `δ ∉ (0, 1)`.
pub fn check_trivial_bound(tk: &TkRecord) -> Result<CheckReport> {
    let alphabet = alphabet_of(tk)?;
    alphabet.require_proper()?;
    let c = (alphabet.len() as f64).powi(tk.k as i32);
    let ratio = c * c / tk.n as f64;
    let bound = ratio * ratio;
    let strict = tk.t_k < bound * (1.0 - STRICT_MARGIN);
    let claimed = tk.k >= 2;
    let mut r = CheckReport::new("trivial-bound", &alphabet, tk.k);
    r.params =
        json!({ "strict": strict, "strictness_claimed": claimed, "delta": alphabet.dimension() });
    r.lhs = tk.t_k;
    r.rhs = bound;
    r.holds = if claimed {
        strict
    } else {
        tk.t_k <= bound * (1.0 + STRICT_MARGIN)
    };
    r.method = tk.method.as_str().to_string();
    Ok(r)
}

/// `t_k ≤ N^{−3/2} |C_k|^{3/2} E(C_k)^{1/2}`, together with the identity
/// `‖F_N(1_{C_k})‖⁴_{ℓ⁴} = E(C_k)/N` used to derive it.
pub fn check_energy_bound(tk: &TkRecord) -> Result<CheckReport> {
    let alphabet = alphabet_of(tk)?;
    let set = build_cantor(&alphabet, tk.k)?;
    let idx = set.to_index_set();
    let energy = additive_energy(&idx);
    let e = energy.to_f64();
    let n = tk.n as f64;
    let c = set.len() as f64;
    let rhs = n.powf(-1.5) * c.powf(1.5) * e.sqrt();
    let f = indicator_transform(&idx)?;
    let mut l4 = CompensatedSum::default();
    for z in &f {
        let s = z.norm_sqr();
        l4.add(s * s);
    }
    let l4 = l4.value();
    let identity_rel = (l4 - e / n).abs() / (e / n);
    let identity_ok = identity_rel <= L4_IDENTITY_TOL;
    let mut r = CheckReport::new("energy-bound", &alphabet, tk.k);
    r.params = json!({
        "energy": energy.to_string(),
        "l4_fourth_power": l4,
        "energy_over_n": e / n,
        "identity_rel_err": identity_rel,
        "identity_holds": identity_ok,
    });
    r.lhs = tk.t_k;
    r.rhs = rhs;
    r.holds = tk.t_k <= rhs * (1.0 + CHECK_SLACK) && identity_ok;
    r.method = tk.method.as_str().to_string();
    Ok(r)
}

/// Per-depth lower bounds `b_k = −log t_k / (4k log M)` for the gap exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeketeBounds {
    #[serde(rename = "M")]
    pub base: u64,
    #[serde(rename = "A")]
    pub letters: Vec<u64>,
    /// `(k, b_k)` in increasing `k`.
    pub bounds: Vec<(u32, f64)>,
    /// `max_j b_j` over the depths seen so far, aligned with `bounds`.
    pub running: Vec<f64>,
    pub running_best: f64,
}

pub fn fekete_bounds(records: &[TkRecord]) -> Result<FeketeBounds> {
    let first = records
        .first()
        .ok_or_else(|| Error::InsufficientData("no t_k records".to_string()))?;
    let mut sorted: Vec<&TkRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.k);
    let log_m = (first.base as f64).ln();
    let mut bounds = Vec::with_capacity(sorted.len());
    let mut running = Vec::with_capacity(sorted.len());
    let mut best = f64::NEG_INFINITY;
    for r in sorted {
        same_alphabet(first, r)?;
        if r.t_k.is_nan() || r.t_k <= 0.0 || r.k == 0 {
            return Err(Error::Domain(format!("t_k = {} at k = {}", r.t_k, r.k)));
        }
        let b = -r.t_k.ln() / (4.0 * r.k as f64 * log_m);
        best = best.max(b);
        bounds.push((r.k, b));
        running.push(best);
    }
    Ok(FeketeBounds {
        base: first.base,
        letters: first.letters.clone(),
        bounds,
        running,
        running_best: best,
    })
}

/// `β_E = (3/4)(1/2 − δ) + γ/8`.
pub fn beta_e(delta: f64, gamma: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("δ = {delta} is outside (0, 1)")));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain(format!("γ = {gamma} must be finite and ≥ 0")));
    }
    Ok(0.75 * (0.5 - delta) + gamma / 8.0)
}

/// Membership in the annulus `M^{−ν₀} < |λ| < 3` used to label eigenvalues.
pub fn in_annulus(lambda: Complex64, nu0: f64, base: u64) -> bool {
    let r = lambda.norm();
    r > (base as f64).powf(-nu0) && r < 3.0
}
