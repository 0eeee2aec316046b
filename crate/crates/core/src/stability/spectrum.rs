use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stability::linearization::LinearizationMatrices;

/// Eigenvalues below this count as negative.
pub const NEGATIVE_THRESHOLD: f64 = -1e-10;
/// Relative threshold on `σ_max / (1 + E)` above which a state is called
/// linearly unstable.
pub const UNSTABLE_THRESHOLD: f64 = 1e-5;
/// Absolute tolerance of the `λ → −λ`, `λ → λ̄` symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
/// Purely real eigenvalues below this magnitude are candidates for
/// spurious modes.
pub const SPURIOUS_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpmSpectrum {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    pub n_minus: usize,
    pub n_plus: usize,
    /// Smallest `|μ|` of `L₊` relative to its largest.
    pub plus_kernel_gap: f64,
}

fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let mut e = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("symmetric eigensolver failed: {e:?}")))?;
    e.sort_by(f64::total_cmp);
    Ok(e)
}

fn count_negative(e: &[f64]) -> usize {
    e.iter().filter(|&&x| x < NEGATIVE_THRESHOLD).count()
}

/// Generalized eigenvalues of `L₋`, `L₊` against `M_dir`.
pub fn spectra_lpm(lin: &LinearizationMatrices) -> Result<LpmSpectrum> {
    let chol = lin.mass_factor()?;
    let minus = sym_eigenvalues(&chol.congruence(&lin.l_minus.to_dense()))?;
    let plus = sym_eigenvalues(&chol.congruence(&lin.l_plus))?;
    let smallest = plus.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let largest = plus.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(LpmSpectrum {
        n_minus: count_negative(&minus),
        n_plus: count_negative(&plus),
        plus_kernel_gap: if largest > 0.0 { smallest / largest } else { 0.0 },
        minus,
        plus,
    })
}

/// Negative counts only, by Sylvester inertia of `L₋` (tridiagonal) and a
/// dense symmetric eigensolve of `L₊`.
pub fn negative_counts(lin: &LinearizationMatrices) -> Result<(usize, usize)> {
    let n_minus = lin.l_minus.count_below(&lin.m_dir, NEGATIVE_THRESHOLD);
    let chol = lin.mass_factor()?;
    let plus = sym_eigenvalues(&chol.congruence(&lin.l_plus))?;
    Ok((n_minus, count_negative(&plus)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JlSpectrum {
    /// Eigenvalues with the phase-symmetry pair removed.
    pub eigenvalues: Vec<Complex64>,
    /// The two eigenvalues of smallest modulus for a nontrivial state: the
    /// numerically split Jordan block of the phase symmetry at zero.
    pub kernel_pair: Vec<Complex64>,
    pub sigma_max: f64,
    pub quartets: Vec<[Complex64; 4]>,
    /// Real pairs `±λ` of magnitude below [`SPURIOUS_LIMIT`].
    pub small_real: Vec<f64>,
    /// Worst mismatch of the `λ → −λ` and `λ → λ̄` symmetries.
    pub symmetry_defect: f64,
}

impl JlSpectrum {
    pub fn unstable_modes(&self, threshold: f64) -> Vec<Complex64> {
        self.eigenvalues.iter().copied().filter(|l| l.re > threshold).collect()
    }

    pub fn has_quartet(&self) -> bool {
        !self.quartets.is_empty()
    }
}

/// Eigenvalues of `[[0, L₋], [−L₊, 0]] v = λ diag(M, M) v`, reduced to a
/// standard problem through the Cholesky factor of `M`.
pub fn spectrum_jl(lin: &LinearizationMatrices, trivial_state: bool) -> Result<JlSpectrum> {
    let n = lin.dim();
    let chol = lin.mass_factor()?;
    let am = chol.congruence(&lin.l_minus.to_dense());
    let ap = chol.congruence(&lin.l_plus);
    let mut big = Mat::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            big[(i, n + j)] = am[(i, j)];
            big[(n + i, j)] = -ap[(i, j)];
        }
    }
    let norm = (0..2 * n)
        .map(|i| (0..2 * n).map(|j| big[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut eig = big.eigenvalues().map_err(|e| {
        Error::LinearAlgebra(format!(
            "nonsymmetric eigensolver failed ({e:?}); dimension {}, ‖A‖∞ = {norm:.3e}",
            2 * n
        ))
    })?;
    if eig.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
        return Err(Error::LinearAlgebra(format!(
            "non-finite JL eigenvalue; ‖A‖∞ = {norm:.3e}"
        )));
    }
    Ok(analyze_jl(&mut eig, trivial_state))
}

pub(crate) fn analyze_jl(eig: &mut Vec<Complex64>, trivial_state: bool) -> JlSpectrum {
    eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let kernel_pair: Vec<Complex64> = if trivial_state || eig.len() < 2 {
        Vec::new()
    } else {
        eig.drain(..2).collect()
    };
    let symmetry_defect = symmetry_defect(eig);
    let sigma_max = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let quartets = find_quartets(eig);
    let mut small_real: Vec<f64> = eig
        .iter()
        .filter(|l| l.re > 0.0 && l.im.abs() <= SYMMETRY_TOLERANCE * (1.0 + l.re) && l.re < SPURIOUS_LIMIT)
        .map(|l| l.re)
        .collect();
    small_real.sort_by(f64::total_cmp);
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    JlSpectrum {
        eigenvalues: eig.clone(),
        kernel_pair,
        sigma_max: if sigma_max.is_finite() { sigma_max } else { 0.0 },
        quartets,
        small_real,
        symmetry_defect,
    }
}

fn nearest(eig: &[Complex64], target: Complex64) -> f64 {
    eig.iter().map(|l| (l - target).norm()).fold(f64::INFINITY, f64::min)
}

fn symmetry_defect(eig: &[Complex64]) -> f64 {
    eig.iter()
        .map(|&l| nearest(eig, -l).max(nearest(eig, l.conj())))
        .fold(0.0, f64::max)
}

/// Groups `{λ, −λ, λ̄, −λ̄}` with `Re λ, Im λ` both clearly nonzero.
fn find_quartets(eig: &[Complex64]) -> Vec<[Complex64; 4]> {
    let find = |t: Complex64| -> Option<Complex64> {
        eig.iter()
            .copied()
            .min_by(|a, b| (a - t).norm().total_cmp(&(b - t).norm()))
            .filter(|a| (a - t).norm() <= 1e-6 * (1.0 + t.norm()))
    };
    let floor = |l: &Complex64| 1e-7 * (1.0 + l.norm());
    eig.iter()
        .filter(|l| l.re > floor(l) && l.im > floor(l))
        .filter_map(|&l| Some([l, find(-l)?, find(l.conj())?, find(-l.conj())?]))
        .collect()
}

/// Outcome of the Grillakis–Shatah–Strauss count with the linear fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    OrbitallyStable,
    OrbitallyUnstable,
    LinearlyUnstable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::OrbitallyStable => "orbitally-stable",
            Verdict::OrbitallyUnstable => "orbitally-unstable",
            Verdict::LinearlyUnstable => "linearly-unstable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// `n(L) = p` is stable, odd `n(L) − p` unstable; otherwise the JL
/// spectrum decides (`σ_max > 10⁻⁵ (1 + E)`), else inconclusive.
pub fn classify(n_minus: usize, n_plus: usize, p: Option<u8>, sigma_max: Option<f64>, energy: f64) -> Result<Verdict> {
    let p = p.ok_or_else(|| Error::Classification("p(d'') not available".into()))? as i64;
    let n = (n_minus + n_plus) as i64;
    if n == p {
        return Ok(Verdict::OrbitallyStable);
    }
    if (n - p).rem_euclid(2) == 1 {
        return Ok(Verdict::OrbitallyUnstable);
    }
    let sigma = sigma_max.ok_or_else(|| Error::Classification("JL spectrum not available".into()))?;
    if sigma > UNSTABLE_THRESHOLD * (1.0 + energy) {
        Ok(Verdict::LinearlyUnstable)
    } else {
        Ok(Verdict::Inconclusive)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub branch: usize,
    pub energy: f64,
    pub lpm: LpmSpectrum,
    pub jl: JlSpectrum,
    pub p: u8,
    pub verdict: Verdict,
    pub kernel_residual: f64,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    pub fn n_total(&self) -> usize {
        self.lpm.n_minus + self.lpm.n_plus
    }
}
