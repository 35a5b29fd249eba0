//! The quantum open baker's map and the linear operators around it.
//!
//! For `N = M^k` the operator is
//!
//! ```text
//! B_N = F_N^* · blockdiag(χ F_{N/M} χ, …, χ F_{N/M} χ) · I_{A,M}
//! ```
//!
//! where `F_N` is the unitary DFT, `χ` is the cutoff sampled at `Mj/N`, and
//! `I_{A,M}` keeps the position blocks `[bN/M, (b+1)N/M)` with `b ∈ A`.
//! Everything is available matrix-free (FFT based, `O(N log N)` per apply) and
//! as a dense matrix built straight from the kernel, so one can check the other.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cantor::{checked_modulus, Alphabet, IndexSet};
use crate::error::{Error, Result};

/// Largest `N` for which dense matrices are materialized unless overridden.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// A linear map on `ℓ²(Z_N)`, applied matrix-free.
pub trait ComplexOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `y ← A x`. Both slices have length [`dim`](Self::dim).
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]);

    /// `y ← A^* x`.
    fn apply_adjoint_into(&self, x: &[Complex64], y: &mut [Complex64]);

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![Complex64::default(); self.dim()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    fn apply_adjoint(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![Complex64::default(); self.dim()];
        self.apply_adjoint_into(x, &mut y);
        Ok(y)
    }

    /// Materializes the operator column by column.
    fn to_dense(&self) -> DenseOperator {
        let n = self.dim();
        let mut mat = Mat::<Complex64>::zeros(n, n);
        let mut e = vec![Complex64::default(); n];
        let mut col = vec![Complex64::default(); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply_into(&e, &mut col);
            for (i, v) in col.iter().enumerate() {
                mat[(i, j)] = *v;
            }
            e[j] = Complex64::default();
        }
        DenseOperator { mat }
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// A finite complex vector in `ℓ²_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    /// Rejects NaN and infinite entries.
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(ComplexVector(data))
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector(vec![Complex64::default(); n])
    }

    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[j] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }
}

pub(crate) fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A dense `N × N` complex matrix.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    mat: Mat<Complex64>,
}

impl DenseOperator {
    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        DenseOperator {
            mat: Mat::from_fn(n, n, f),
        }
    }

    pub fn from_mat(mat: Mat<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                actual: mat.ncols(),
            });
        }
        Ok(DenseOperator { mat })
    }

    pub fn identity(n: usize) -> Self {
        DenseOperator {
            mat: Mat::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        DenseOperator {
            mat: Mat::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn as_mat(&self) -> &Mat<Complex64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<Complex64> {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += self.mat[(i, j)].norm_sqr();
            }
        }
        s
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn matmul(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        check_len(self.n(), rhs.n())?;
        Ok(DenseOperator {
            mat: &self.mat * &rhs.mat,
        })
    }

    /// `max_{ij} |A_ij − B_ij|`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.n(), other.n());
        let n = self.n();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        m
    }

    pub fn has_non_finite(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for j in 0..n {
            for i in 0..n {
                let z = self.mat[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl ComplexOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n();
        y.fill(Complex64::default());
        for (j, &xj) in x.iter().enumerate().take(n) {
            if xj == Complex64::default() {
                continue;
            }
            let col = self.mat.col(j);
            for (yi, a) in y.iter_mut().zip(col.iter()) {
                *yi += a * xj;
            }
        }
    }

    fn apply_adjoint_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            let col = self.mat.col(j);
            *yj = col.iter().zip(x).map(|(a, xi)| a.conj() * xi).sum();
        }
    }

    fn to_dense(&self) -> DenseOperator {
        self.clone()
    }
}

/// `exp(sign · 2πi r / n)` with `r` already reduced modulo `n`.
pub(crate) fn unit_root(r: u64, n: u64, sign: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * r as f64 / n as f64).sin_cos();
    Complex64::new(c, sign * s)
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(n)) as u64
}

/// The unitary DFT `(F_N u)(j) = N^{-1/2} Σ_l e^{−2πi jl/N} u(l)`, applied by FFT.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Dft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("DFT size must be >= 1".to_string()));
        }
        let mut planner = FftPlanner::new();
        Ok(Dft {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `F_N` in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }

    /// `F_N^*` in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }
}

impl ComplexOperator for Dft {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.copy_from_slice(x);
        self.forward_in_place(y);
    }

    fn apply_adjoint_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.copy_from_slice(x);
        self.inverse_in_place(y);
    }
}

/// Matrix-free unitary DFT of size `n`.
pub fn dft(n: usize) -> Result<Dft> {
    Dft::new(n)
}

/// Dense unitary DFT, each entry evaluated from the kernel with `jl mod N` reduced exactly.
pub fn dft_dense(n: usize) -> DenseOperator {
    let scale = 1.0 / (n as f64).sqrt();
    let nn = n as u64;
    DenseOperator::from_fn(n, |j, l| {
        unit_root(mul_mod(j as u64, l as u64, nn), nn, -1.0) * scale
    })
}

/// The cutoff `χ` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Cutoff {
    /// `χ ≡ 1`, including at the endpoint 0.
    IndicatorOne,
    /// Smooth plateau bump: 1 on `[a, 1−a]`, 0 outside `[eps, 1−eps]`.
    SmoothBump { a: f64, eps: f64 },
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::SmoothBump { a: 0.3, eps: 0.1 }
    }
}

impl Cutoff {
    pub fn smooth_bump(a: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < a && a < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "smooth bump needs 0 < eps < a < 1/2, got a={a}, eps={eps}"
            )));
        }
        Ok(Cutoff::SmoothBump { a, eps })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Cutoff::IndicatorOne => Ok(()),
            Cutoff::SmoothBump { a, eps } => Cutoff::smooth_bump(a, eps).map(|_| ()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Cutoff::IndicatorOne => 1.0,
            Cutoff::SmoothBump { a, eps } => {
                if !(0.0..=1.0).contains(&x) {
                    return 0.0;
                }
                half_bump(x.min(1.0 - x), a, eps)
            }
        }
    }

    /// `χ(j/n)`; symmetric grid points `j` and `n − j` get bit-identical values.
    pub fn sample(&self, j: usize, n: usize) -> f64 {
        match *self {
            Cutoff::IndicatorOne => 1.0,
            Cutoff::SmoothBump { a, eps } => {
                let d = j.min(n - j);
                half_bump(d as f64 / n as f64, a, eps)
            }
        }
    }

    /// Short label used in fingerprints and file headers.
    pub fn label(&self) -> String {
        match *self {
            Cutoff::IndicatorOne => "indicator-one".to_string(),
            Cutoff::SmoothBump { a, eps } => format!("smooth-bump(a={a},eps={eps})"),
        }
    }
}

fn ramp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

// Rising half of the bump on [0, 1/2].
fn half_bump(x: f64, a: f64, eps: f64) -> f64 {
    if x <= eps {
        0.0
    } else if x >= a {
        1.0
    } else {
        let t = (x - eps) / (a - eps);
        let (p, q) = (ramp(t), ramp(1.0 - t));
        p / (p + q)
    }
}

/// `χ_{N/M}(j) = χ(Mj/N)` for `j ∈ 0..N/M`.
pub fn discretize_cutoff(cutoff: &Cutoff, n: usize, base: usize) -> Result<Vec<f64>> {
    if base == 0 || n % base != 0 {
        return Err(Error::InvalidArgument(format!(
            "{base} does not divide {n}"
        )));
    }
    let block = n / base;
    Ok((0..block).map(|j| cutoff.sample(j, block)).collect())
}

/// `(M, A, χ)`: everything about a baker's map except the depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BakerFamily {
    pub alphabet: Alphabet,
    pub cutoff: Cutoff,
}

impl BakerFamily {
    pub fn new(alphabet: Alphabet, cutoff: Cutoff) -> Result<Self> {
        cutoff.validate()?;
        Ok(BakerFamily { alphabet, cutoff })
    }

    pub fn at_depth(&self, depth: u32) -> Result<BakerSpec> {
        BakerSpec::new(self.alphabet.clone(), self.cutoff, depth)
    }

    /// Stable 16-hex-digit hash of `(M, A, χ)`.
    pub fn fingerprint(&self) -> String {
        let text = format!("{};chi={}", self.alphabet, self.cutoff.label());
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `(M, A, χ)` together with the depth `k ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BakerSpec {
    family: BakerFamily,
    depth: u32,
    n: usize,
}

impl BakerSpec {
    pub fn new(alphabet: Alphabet, cutoff: Cutoff, depth: u32) -> Result<Self> {
        if depth < 2 {
            return Err(Error::InvalidArgument(format!(
                "baker depth must be >= 2, got {depth}"
            )));
        }
        let n = checked_modulus(alphabet.base(), depth)?;
        let n = usize::try_from(n).map_err(|_| Error::ModulusOverflow {
            base: alphabet.base(),
            depth,
        })?;
        Ok(BakerSpec {
            family: BakerFamily::new(alphabet, cutoff)?,
            depth,
            n,
        })
    }

    pub fn family(&self) -> &BakerFamily {
        &self.family
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.family.alphabet
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.family.cutoff
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> usize {
        self.family.alphabet.base() as usize
    }

    pub fn block(&self) -> usize {
        self.n / self.base()
    }

    pub fn cutoff_samples(&self) -> Vec<f64> {
        discretize_cutoff(&self.family.cutoff, self.n, self.base()).expect("M divides M^k")
    }
}

/// Matrix-free `B_N`.
#[derive(Debug, Clone)]
pub struct BakerOperator {
    n: usize,
    block: usize,
    chi: Vec<f64>,
    letters: Vec<usize>,
    outer: Dft,
    inner: Dft,
}

impl BakerOperator {
    pub fn new(spec: &BakerSpec) -> Result<Self> {
        Self::from_samples(spec, spec.cutoff_samples())
    }

    /// Builds from explicit grid values of `χ`.
    pub fn from_samples(spec: &BakerSpec, chi: Vec<f64>) -> Result<Self> {
        check_len(spec.block(), chi.len())?;
        Ok(BakerOperator {
            n: spec.n(),
            block: spec.block(),
            chi,
            letters: spec
                .alphabet()
                .letters()
                .iter()
                .map(|&l| l as usize)
                .collect(),
            outer: Dft::new(spec.n())?,
            inner: Dft::new(spec.block())?,
        })
    }
}

impl ComplexOperator for BakerOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.fill(Complex64::default());
        for &b in &self.letters {
            let range = b * self.block..(b + 1) * self.block;
            let out = &mut y[range.clone()];
            for ((o, xi), c) in out.iter_mut().zip(&x[range]).zip(&self.chi) {
                *o = xi * c;
            }
            self.inner.forward_in_place(out);
            out.iter_mut().zip(&self.chi).for_each(|(o, c)| *o *= c);
        }
        self.outer.inverse_in_place(y);
    }

    fn apply_adjoint_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mut w = x.to_vec();
        self.outer.forward_in_place(&mut w);
        y.fill(Complex64::default());
        for &b in &self.letters {
            let range = b * self.block..(b + 1) * self.block;
            let out = &mut y[range.clone()];
            for ((o, wi), c) in out.iter_mut().zip(&w[range]).zip(&self.chi) {
                *o = wi * c;
            }
            self.inner.inverse_in_place(out);
            out.iter_mut().zip(&self.chi).for_each(|(o, c)| *o *= c);
        }
    }
}

/// Dense `B_N`, assembled from the DFT kernels without any FFT.
pub fn build_baker(spec: &BakerSpec, dense_cap: usize) -> Result<DenseOperator> {
    build_baker_from_samples(spec, &spec.cutoff_samples(), dense_cap)
}

/// Dense `B_N` from explicit grid values of `χ`.
pub fn build_baker_from_samples(
    spec: &BakerSpec,
    chi: &[f64],
    dense_cap: usize,
) -> Result<DenseOperator> {
    let n = spec.n();
    if n > dense_cap {
        return Err(Error::DenseCapExceeded { n, cap: dense_cap });
    }
    let block = spec.block();
    check_len(block, chi.len())?;
    let small = dft_dense(block);
    let kernel =
        Mat::<Complex64>::from_fn(block, block, |i, j| small.get(i, j) * (chi[i] * chi[j]));
    let scale = 1.0 / (n as f64).sqrt();
    let nn = n as u64;
    let mut out = Mat::<Complex64>::zeros(n, n);
    for &b in spec.alphabet().letters() {
        let b = b as usize;
        // Columns bN/M.. of F_N^*.
        let inv_cols = Mat::<Complex64>::from_fn(n, block, |r, c| {
            unit_root(mul_mod(r as u64, (b * block + c) as u64, nn), nn, 1.0) * scale
        });
        let prod = &inv_cols * &kernel;
        out.submatrix_mut(0, b * block, n, block).copy_from(&prod);
    }
    Ok(DenseOperator { mat: out })
}

/// `B_N u`, matrix-free.
pub fn apply_baker(spec: &BakerSpec, u: &ComplexVector) -> Result<ComplexVector> {
    let op = BakerOperator::new(spec)?;
    ComplexVector::new(op.apply(u.as_slice())?)
}

/// The compression `1_S F_N 1_S`, matrix-free.
#[derive(Debug, Clone)]
pub struct Compression {
    mask: Vec<bool>,
    dft: Dft,
}

impl Compression {
    pub fn new(set: &IndexSet) -> Result<Self> {
        let n = usize::try_from(set.modulus())
            .map_err(|_| Error::InvalidArgument("modulus exceeds usize".to_string()))?;
        Ok(Compression {
            mask: set.indicator(),
            dft: Dft::new(n)?,
        })
    }
}

impl ComplexOperator for Compression {
    fn dim(&self) -> usize {
        self.mask.len()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for ((o, xi), &m) in y.iter_mut().zip(x).zip(&self.mask) {
            *o = if m { *xi } else { Complex64::default() };
        }
        self.dft.forward_in_place(y);
        y.iter_mut()
            .zip(&self.mask)
            .filter(|(_, &m)| !m)
            .for_each(|(o, _)| *o = Complex64::default());
    }

    fn apply_adjoint_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for ((o, xi), &m) in y.iter_mut().zip(x).zip(&self.mask) {
            *o = if m { *xi } else { Complex64::default() };
        }
        self.dft.inverse_in_place(y);
        y.iter_mut()
            .zip(&self.mask)
            .filter(|(_, &m)| !m)
            .for_each(|(o, _)| *o = Complex64::default());
    }
}

/// The `|S| × |S|` block of `F_N` on rows and columns `S`; the only nonzero
/// block of `1_S F_N 1_S`.
pub fn restricted_dft(set: &IndexSet) -> DenseOperator {
    let n = set.modulus();
    let m = set.members();
    let scale = 1.0 / (n as f64).sqrt();
    DenseOperator::from_fn(m.len(), |i, j| {
        unit_root(mul_mod(m[i], m[j], n), n, -1.0) * scale
    })
}

const OPERATOR_MAGIC: &[u8; 4] = b"BKW1";
const LAYOUT_ROW_MAJOR: u8 = 0;

/// Writes `"BKW1"`, `u64 N`, layout byte (0 = row-major), then `N²` little-endian `(re, im)` pairs.
pub fn write_operator<W: Write>(mut w: W, op: &DenseOperator) -> Result<()> {
    let n = op.n();
    w.write_all(OPERATOR_MAGIC)?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&[LAYOUT_ROW_MAJOR])?;
    let mut row = Vec::with_capacity(16 * n);
    for i in 0..n {
        row.clear();
        for j in 0..n {
            let z = op.get(i, j);
            row.extend_from_slice(&z.re.to_le_bytes());
            row.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator<R: Read>(mut r: R) -> Result<DenseOperator> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != OPERATOR_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let n = read_u64(&mut r)? as usize;
    let mut layout = [0u8; 1];
    r.read_exact(&mut layout)?;
    if layout[0] != LAYOUT_ROW_MAJOR {
        return Err(Error::Format(format!(
            "unsupported layout byte {}",
            layout[0]
        )));
    }
    let mut mat = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = read_c64(&mut r)?;
        }
    }
    Ok(DenseOperator { mat })
}

/// Writes `u64 len` then `len` little-endian `(re, im)` pairs.
pub fn write_vector<W: Write>(mut w: W, v: &ComplexVector) -> Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for z in v.as_slice() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vector<R: Read>(mut r: R) -> Result<ComplexVector> {
    let n = read_u64(&mut r)? as usize;
    let data = (0..n)
        .map(|_| read_c64(&mut r))
        .collect::<Result<Vec<_>>>()?;
    ComplexVector::new(data)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_c64<R: Read>(r: &mut R) -> Result<Complex64> {
    let re = f64::from_le_bytes({
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        b
    });
    let im = f64::from_le_bytes({
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        b
    });
    Ok(Complex64::new(re, im))
}
