//! Spectra, resonance counting and norm estimates.

use std::io::Write;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cantor::CantorSet;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::qbaker::{
    build_baker, norm2, restricted_dft, BakerFamily, ComplexOperator, Compression, DenseOperator,
};

/// Slack added below the counting threshold `M^{−ν}`.
pub const COUNT_TOLERANCE: f64 = 1e-12;

/// Norm estimate defaults: relative stagnation tolerance on the top Ritz
/// value of `A^*A` per restart cycle, and the cap on `A^*A` products.
pub const NORM_TOL: f64 = 1e-12;
pub const NORM_MAX_ITER: usize = 100_000;

const LANCZOS_BASIS: usize = 80;
const LANCZOS_MEMORY: usize = 1 << 22;

const SOLVER: &str = "faer complex Schur (Hessenberg reduction + shifted QR)";

/// The eigenvalues of a dense operator, repeated by algebraic multiplicity.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    /// `max_i ‖A v_i − λ_i v_i‖ / (‖A‖_F ‖v_i‖)` when residuals were requested.
    pub backward_error: Option<f64>,
    pub solver: String,
}

impl SpectrumResult {
    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn sum_abs_sqr(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// CSV rows `k,N,re,im,abs` preceded by a `#` header comment.
    pub fn write_csv<W: Write>(&self, mut w: W, k: u32, fingerprint: &str) -> Result<()> {
        writeln!(w, "# spec={fingerprint} version={}", crate::VERSION)?;
        writeln!(w, "k,N,re,im,abs")?;
        for z in &self.eigenvalues {
            writeln!(w, "{k},{},{},{},{}", self.n, z.re, z.im, z.norm())?;
        }
        Ok(())
    }
}

/// Options for [`eigenvalues`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EigenOptions {
    /// Also compute eigenvectors to report a residual-based backward error.
    pub residuals: bool,
}

/// All eigenvalues of a dense matrix.
pub fn eigenvalues(op: &DenseOperator, opts: EigenOptions) -> Result<SpectrumResult> {
    if let Some((i, j)) = op.has_non_finite() {
        return Err(Error::NonFinite(i * op.n() + j));
    }
    let n = op.n();
    let mat = op.as_mat();
    let (eigenvalues, backward_error) = if opts.residuals {
        let evd = mat
            .eigen()
            .map_err(|e| Error::EigenNoConvergence(format!("{e:?}")))?;
        let vals: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
        let vecs = evd.U();
        let scale = op.frobenius_norm_sqr().sqrt().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (i, &lambda) in vals.iter().enumerate() {
            let v: Vec<Complex64> = vecs.col(i).iter().copied().collect();
            let av = op.apply(&v)?;
            let r: Vec<Complex64> = av.iter().zip(&v).map(|(a, x)| a - lambda * x).collect();
            let vn = norm2(&v);
            if vn > 0.0 {
                worst = worst.max(norm2(&r) / (scale * vn));
            }
        }
        (vals, Some(worst))
    } else {
        let vals = mat
            .eigenvalues()
            .map_err(|e| Error::EigenNoConvergence(format!("{e:?}")))?;
        (vals, None)
    };
    if eigenvalues.len() != n {
        return Err(Error::EigenNoConvergence(format!(
            "expected {n} eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    if let Some(i) = eigenvalues
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::EigenNoConvergence(format!(
            "eigenvalue {i} is not finite"
        )));
    }
    Ok(SpectrumResult {
        n,
        eigenvalues,
        backward_error,
        solver: SOLVER.to_string(),
    })
}

/// `#{λ : |λ| ≥ M^{−ν} − 1e−12}`, with multiplicity. `ν = ∞` counts everything.
pub fn count_resonances(spectrum: &SpectrumResult, nu: f64, base: u64) -> Result<usize> {
    if nu.is_nan() || nu < 0.0 {
        return Err(Error::InvalidArgument(format!("nu must be >= 0, got {nu}")));
    }
    let threshold = (base as f64).powf(-nu) - COUNT_TOLERANCE;
    Ok(spectrum
        .eigenvalues
        .iter()
        .filter(|z| z.norm() >= threshold)
        .count())
}

/// One point of a counting curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRecord {
    pub k: u32,
    pub n: usize,
    pub nu: f64,
    pub count: usize,
}

/// `N_k(ν)` over a grid of depths and `ν` values for one `(M, A, χ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingCurve {
    pub fingerprint: String,
    pub base: u64,
    pub records: Vec<CountRecord>,
}

impl CountingCurve {
    /// Builds the curve from precomputed spectra; records are ordered by `k` then by the `ν` grid.
    pub fn from_spectra(
        family: &BakerFamily,
        spectra: &[(u32, SpectrumResult)],
        nus: &[f64],
    ) -> Result<Self> {
        let base = family.alphabet.base();
        let mut records = Vec::with_capacity(spectra.len() * nus.len());
        for (k, s) in spectra {
            for &nu in nus {
                records.push(CountRecord {
                    k: *k,
                    n: s.n,
                    nu,
                    count: count_resonances(s, nu, base)?,
                });
            }
        }
        Ok(CountingCurve {
            fingerprint: family.fingerprint(),
            base,
            records,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# spec={} version={}", self.fingerprint, crate::VERSION)?;
        writeln!(w, "k,N,nu,count")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{}", r.k, r.n, r.nu, r.count)?;
        }
        Ok(())
    }
}

/// Dense spectra of `B_N` for every depth in `ks`, computed in parallel and returned in `ks` order.
pub fn baker_spectra(
    family: &BakerFamily,
    ks: &[u32],
    dense_cap: usize,
) -> Result<Vec<(u32, SpectrumResult)>> {
    ks.par_iter()
        .map(|&k| {
            let spec = family.at_depth(k)?;
            let b = build_baker(&spec, dense_cap)?;
            Ok((k, eigenvalues(&b, EigenOptions::default())?))
        })
        .collect()
}

/// `N_k(ν)` for every `k ∈ ks` and `ν ∈ nus`; each spectrum is computed once.
pub fn counting_curve(
    family: &BakerFamily,
    ks: &[u32],
    nus: &[f64],
    dense_cap: usize,
) -> Result<CountingCurve> {
    let spectra = baker_spectra(family, ks, dense_cap)?;
    CountingCurve::from_spectra(family, &spectra, nus)
}

/// Least-squares slope of `log N_k(ν)` against `log N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub nu: f64,
    pub slope: f64,
    pub intercept: f64,
    pub rss: f64,
    pub k_used: Vec<u32>,
    /// Theoretical exponent for comparison, when supplied.
    pub theory: Option<f64>,
}

pub fn fit_exponent(
    curve: &CountingCurve,
    nu: f64,
    k_range: Option<RangeInclusive<u32>>,
    theory: Option<f64>,
) -> Result<ExponentFit> {
    let log_m = (curve.base as f64).ln();
    let (mut xs, mut ys, mut ks) = (Vec::new(), Vec::new(), Vec::new());
    for r in &curve.records {
        if r.nu != nu || r.count == 0 {
            continue;
        }
        if let Some(range) = &k_range {
            if !range.contains(&r.k) {
                continue;
            }
        }
        xs.push(f64::from(r.k) * log_m);
        ys.push((r.count as f64).ln());
        ks.push(r.k);
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponent fit at nu={nu} needs 3 depths with nonzero counts, got {}",
            xs.len()
        )));
    }
    let line = least_squares(&xs, &ys)?;
    Ok(ExponentFit {
        nu,
        slope: line.slope,
        intercept: line.intercept,
        rss: line.rss,
        k_used: ks,
        theory,
    })
}

/// Outcome of an iterative norm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Number of `A^*A` products used.
    pub iterations: usize,
}

/// Largest singular value of `op` by restarted Lanczos on `A^*A`.
///
/// The start vector is a fixed quasi-random unimodular-like vector, so runs are
/// reproducible but the start is not confined to a symmetry class of the
/// operator. Each cycle extends a fully reorthogonalized Krylov basis and
/// restarts from the top half of its Ritz vectors. Stops when one cycle raises the top
/// Ritz value of `A^*A` by at most `tol` relative, when the Krylov space
/// becomes invariant, or when it spans the whole space. If the start lies in
/// the kernel, retries once from `e_0 + e_1`.
pub fn lanczos_norm(op: &dyn ComplexOperator, tol: f64, max_iter: usize) -> Result<NormEstimate> {
    let n = op.dim();
    if n == 0 {
        return Ok(NormEstimate {
            value: 0.0,
            iterations: 0,
        });
    }
    let mut starts = vec![quasi_random_start(n)];
    if n >= 2 {
        let mut e = vec![Complex64::default(); n];
        e[0] = Complex64::new(1.0, 0.0);
        e[1] = Complex64::new(1.0, 0.0);
        starts.push(e);
    }
    let mut total = 0;
    for start in starts {
        let (theta, used) = lanczos_from(op, start, tol, max_iter.saturating_sub(total))?;
        total += used;
        if theta > 0.0 {
            return Ok(NormEstimate {
                value: theta.sqrt(),
                iterations: total,
            });
        }
    }
    Ok(NormEstimate {
        value: 0.0,
        iterations: total,
    })
}

/// `x_j = (1 + {j√2}) · exp(2πi {jφ})` with `φ` the golden ratio conjugate.
fn quasi_random_start(n: usize) -> Vec<Complex64> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let sqrt2 = std::f64::consts::SQRT_2;
    (0..n)
        .map(|j| {
            let j = j as f64;
            Complex64::from_polar(
                1.0 + (j * sqrt2).fract(),
                std::f64::consts::TAU * (j * phi).fract(),
            )
        })
        .collect()
}

/// Basis length per cycle: up to `LANCZOS_BASIS`, shrunk so the basis stays
/// near `LANCZOS_MEMORY` complex entries.
fn basis_len(n: usize) -> usize {
    (LANCZOS_MEMORY / n).clamp(8, LANCZOS_BASIS).min(n)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Returns the top Ritz value of `A^*A` (zero if the start is in the kernel)
/// and the number of products used.
///
/// Thick restart: each cycle keeps the top half of the Ritz vectors, so the
/// projected matrix is an arrowhead block followed by a tridiagonal one.
fn lanczos_from(
    op: &dyn ComplexOperator,
    mut v0: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let n = op.dim();
    let m = basis_len(n);
    let keep = (m / 2).max(1);
    let s = norm2(&v0);
    if s == 0.0 {
        return Ok((0.0, 0));
    }
    v0.iter_mut().for_each(|z| *z /= s);
    let mut basis = vec![v0];
    let mut h = faer::Mat::<f64>::zeros(m, m);
    let mut y = vec![Complex64::default(); n];
    let mut used = 0;
    let mut theta_prev = f64::NEG_INFINITY;
    loop {
        let j = basis.len() - 1;
        let mut w = vec![Complex64::default(); n];
        op.apply_into(&basis[j], &mut y);
        op.apply_adjoint_into(&y, &mut w);
        used += 1;
        h[(j, j)] = dot(&basis[j], &w).re;
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, bb)| *x -= c * bb);
            }
        }
        let bn = norm2(&w);
        let scale = (0..=j).fold(0.0f64, |a, i| a.max(h[(i, i)].abs()));
        let invariant = bn <= 1e-14 * scale || scale == 0.0;
        if basis.len() < m && !invariant {
            w.iter_mut().for_each(|z| *z /= bn);
            h[(j, j + 1)] = bn;
            h[(j + 1, j)] = bn;
            basis.push(w);
            continue;
        }
        let (theta, vecs) = ritz_pairs(h.as_ref().submatrix(0, 0, j + 1, j + 1))?;
        let top = theta[j];
        if invariant || basis.len() == n || top - theta_prev <= tol * top {
            return Ok((top.max(0.0), used));
        }
        if used >= max_iter {
            return Err(Error::IterationCap {
                iterations: used,
                previous: theta_prev.max(0.0).sqrt(),
                last: top.sqrt(),
            });
        }
        theta_prev = top;
        let p = keep.min(j);
        let mut kept = Vec::with_capacity(p + 1);
        h.fill(0.0);
        for (slot, col) in (j + 1 - p..=j).rev().enumerate() {
            let mut x = vec![Complex64::default(); n];
            for (r, b) in basis.iter().enumerate() {
                let c = vecs[(r, col)];
                x.iter_mut().zip(b).for_each(|(z, bb)| *z += c * bb);
            }
            kept.push(x);
            h[(slot, slot)] = theta[col];
            // The residual direction couples to each kept Ritz vector.
            let coupling = bn * vecs[(j, col)];
            h[(slot, p)] = coupling;
            h[(p, slot)] = coupling;
        }
        w.iter_mut().for_each(|z| *z /= bn);
        kept.push(w);
        basis = kept;
    }
}

/// Eigenvalues (nondecreasing) and eigenvectors of a real symmetric matrix.
fn ritz_pairs(h: faer::MatRef<'_, f64>) -> Result<(Vec<f64>, faer::Mat<f64>)> {
    let e = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::EigenNoConvergence(format!("projected matrix: {e:?}")))?;
    let theta = e.S().column_vector().iter().copied().collect();
    Ok((theta, e.U().to_owned()))
}

/// `‖A‖_{ℓ²→ℓ²}` with the default tolerance and cap.
pub fn operator_norm(op: &dyn ComplexOperator) -> Result<f64> {
    Ok(lanczos_norm(op, NORM_TOL, NORM_MAX_ITER)?.value)
}

/// Singular values of a dense matrix, nonincreasing.
pub fn singular_values(op: &DenseOperator) -> Result<Vec<f64>> {
    op.as_mat()
        .singular_values()
        .map_err(|e| Error::EigenNoConvergence(format!("svd: {e:?}")))
}

/// `r_k = ‖1_{C_k} F_N 1_{C_k}‖`, matrix-free.
pub fn r_k(set: &CantorSet) -> Result<NormEstimate> {
    let t0 = Compression::new(&set.to_index_set())?;
    lanczos_norm(&t0, NORM_TOL, NORM_MAX_ITER)
}

/// `r_k` from a dense SVD of the restricted DFT block; limited to `N ≤ 1024`.
pub fn r_k_dense(set: &CantorSet) -> Result<f64> {
    if set.modulus() > 1024 {
        return Err(Error::ScaleExceeded {
            method: "r_k dense oracle",
            detail: format!("N = {} > 1024", set.modulus()),
        });
    }
    let s = singular_values(&restricted_dft(&set.to_index_set()))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{build_cantor, Alphabet};
    use crate::qbaker::{dft_dense, BakerOperator, Cutoff, DEFAULT_DENSE_CAP};

    fn family(m: u64, letters: &[u64], cutoff: Cutoff) -> BakerFamily {
        BakerFamily::new(Alphabet::new(m, letters.to_vec()).unwrap(), cutoff).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let s = eigenvalues(
            &DenseOperator::identity(5),
            EigenOptions { residuals: true },
        )
        .unwrap();
        assert_eq!(s.eigenvalues.len(), 5);
        for z in &s.eigenvalues {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(s.backward_error.unwrap() < 1e-14);
    }

    #[test]
    fn nan_rejected() {
        let mut m = DenseOperator::identity(3).into_mat();
        m[(1, 2)] = Complex64::new(f64::NAN, 0.0);
        let op = DenseOperator::from_mat(m).unwrap();
        assert!(matches!(
            eigenvalues(&op, EigenOptions::default()),
            Err(Error::NonFinite(5))
        ));
    }

    #[test]
    fn unitary_spectrum_on_circle() {
        let f = family(3, &[0, 1, 2], Cutoff::IndicatorOne);
        let spec = f.at_depth(4).unwrap();
        let b = build_baker(&spec, DEFAULT_DENSE_CAP).unwrap();
        let s = eigenvalues(&b, EigenOptions::default()).unwrap();
        for z in &s.eigenvalues {
            assert!((z.norm() - 1.0).abs() < 1e-8);
        }
        assert_eq!(count_resonances(&s, 0.0, 3).unwrap(), 81);
        assert_eq!(count_resonances(&s, 2.5, 3).unwrap(), 81);
    }

    #[test]
    fn trace_and_schur_for_middle_thirds() {
        let f = family(3, &[0, 2], Cutoff::default());
        let b = build_baker(&f.at_depth(4).unwrap(), DEFAULT_DENSE_CAP).unwrap();
        let s = eigenvalues(&b, EigenOptions { residuals: true }).unwrap();
        let tr = b.trace();
        assert!((s.sum() - tr).norm() <= 1e-8 * tr.norm().max(1.0));
        assert!(s.sum_abs_sqr() <= b.frobenius_norm_sqr() + 1e-6);
        assert!(s.max_modulus() <= 1.0 + 1e-8);
        assert!(s.backward_error.unwrap() <= 1e-10 * 81.0);
    }

    #[test]
    fn counting_edges() {
        let f = family(3, &[0, 2], Cutoff::default());
        let b = build_baker(&f.at_depth(3).unwrap(), DEFAULT_DENSE_CAP).unwrap();
        let s = eigenvalues(&b, EigenOptions::default()).unwrap();
        assert!(count_resonances(&s, 0.0, 3).unwrap() < 27);
        assert_eq!(count_resonances(&s, f64::INFINITY, 3).unwrap(), 27);
        assert!(count_resonances(&s, -0.5, 3).is_err());
        let mut last = 0;
        for i in 0..40 {
            let c = count_resonances(&s, i as f64 * 0.25, 3).unwrap();
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn single_letter_curve_against_direct_spectrum() {
        // B_9 for A = {1} has a single nonzero 3×3 column block; its nonzero
        // eigenvalues are those of the 3×3 diagonal block of B.
        let f = family(3, &[1], Cutoff::IndicatorOne);
        let b = build_baker(&f.at_depth(2).unwrap(), 64).unwrap();
        let block = DenseOperator::from_fn(3, |i, j| b.get(3 + i, 3 + j));
        let direct = eigenvalues(&block, EigenOptions::default()).unwrap();
        let curve = counting_curve(&f, &[2], &[0.0, 0.5, 1.0, 3.0], 64).unwrap();
        for r in &curve.records {
            let expect = direct
                .eigenvalues
                .iter()
                .filter(|z| z.norm() >= 3f64.powf(-r.nu) - COUNT_TOLERANCE)
                .count();
            assert_eq!(r.count, expect, "nu={}", r.nu);
            assert!(r.count <= 3);
        }
    }

    #[test]
    fn fits() {
        let f = family(2, &[0, 1], Cutoff::IndicatorOne);
        let curve = counting_curve(&f, &[2, 3, 4, 5], &[0.0, 1.0], 64).unwrap();
        let fit = fit_exponent(&curve, 1.0, None, Some(1.0)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert_eq!(fit.theory, Some(1.0));
        assert!(fit_exponent(&curve, 1.0, Some(4..=5), None).is_err());

        let flat = CountingCurve {
            fingerprint: String::new(),
            base: 3,
            records: (2..6)
                .map(|k| CountRecord {
                    k,
                    n: 3usize.pow(k),
                    nu: 0.5,
                    count: 7,
                })
                .collect(),
        };
        assert!(fit_exponent(&flat, 0.5, None, None).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn norms_of_simple_operators() {
        assert!((operator_norm(&DenseOperator::identity(6)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(operator_norm(&DenseOperator::zeros(6)).unwrap(), 0.0);
        let f = family(3, &[0, 2], Cutoff::default());
        for k in 2..=6 {
            let op = BakerOperator::new(&f.at_depth(k).unwrap()).unwrap();
            assert!(operator_norm(&op).unwrap() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn start_in_kernel_falls_through() {
        // A = [[1, -1], [1, -1]] / 2 kills e0 + e1; its norm is 1.
        let m = DenseOperator::from_fn(2, |_, j| {
            Complex64::new(if j == 0 { 0.5 } else { -0.5 }, 0.0)
        });
        let ones = vec![Complex64::new(1.0, 0.0); 2];
        assert_eq!(lanczos_from(&m, ones, NORM_TOL, 100).unwrap().0, 0.0);
        assert!((operator_norm(&m).unwrap() - 1.0).abs() < 1e-14);
        // Row [1, 1, -2] has norm √6.
        let m = DenseOperator::from_fn(3, |i, j| {
            Complex64::new(if i == 0 { [1.0, 1.0, -2.0][j] } else { 0.0 }, 0.0)
        });
        assert!((operator_norm(&m).unwrap() - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn top_vector_orthogonal_to_ones() {
        // I + u u^* with u = (1, -1, 1, -1)/2 has norm 2 and u ⊥ 1.
        let u = [0.5, -0.5, 0.5, -0.5];
        let m = DenseOperator::from_fn(4, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 } + u[i] * u[j], 0.0)
        });
        assert!((operator_norm(&m).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn norm_matches_dense_svd() {
        let f = family(3, &[0, 2], Cutoff::default());
        for k in [4, 5] {
            let op = BakerOperator::new(&f.at_depth(k).unwrap()).unwrap();
            let sv = singular_values(&op.to_dense()).unwrap()[0];
            let est = operator_norm(&op).unwrap();
            assert!((sv - est).abs() <= 1e-8 * sv, "k={k}: {sv} vs {est}");
        }
        let f = dft_dense(32);
        assert!((operator_norm(&f).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r_k_examples() {
        let full = build_cantor(&Alphabet::full(3).unwrap(), 4).unwrap();
        assert!((r_k(&full).unwrap().value - 1.0).abs() < 1e-9);
        let single = build_cantor(&Alphabet::new(3, vec![0]).unwrap(), 5).unwrap();
        assert!((r_k(&single).unwrap().value - 243f64.powf(-0.5)).abs() < 1e-14);

        // k = 1, C = {0, 2} ⊂ Z_3: the 2×2 block is [[1, 1], [1, ω]]/√3, ω = e^{−4πi/3}.
        // Its singular values satisfy σ² = (2 ± |1 + ω|)/3 = (2 ± 1)/3.
        let c1 = build_cantor(&Alphabet::new(3, vec![0, 2]).unwrap(), 1).unwrap();
        assert!((r_k(&c1).unwrap().value - 1.0).abs() < 1e-12);
        assert!((r_k_dense(&c1).unwrap() - 1.0).abs() < 1e-12);

        for k in 2..=6 {
            let c = build_cantor(&Alphabet::new(3, vec![0, 2]).unwrap(), k).unwrap();
            let a = r_k(&c).unwrap().value;
            let b = r_k_dense(&c).unwrap();
            assert!((a - b).abs() <= 1e-8 * b, "k={k}: {a} vs {b}");
            assert!(a < 1.0);
        }
    }

    #[test]
    fn csv_layout() {
        let s = eigenvalues(&DenseOperator::identity(2), EigenOptions::default()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, 1, "abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# spec=abc version="));
        assert_eq!(lines[1], "k,N,re,im,abs");
        assert_eq!(lines.len(), 4);
    }
}
