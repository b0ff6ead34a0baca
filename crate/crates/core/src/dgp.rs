//! Data-generating processes.
//!
//! Innovations come from one of three elliptical scenarios (normal,
//! multivariate t, scale mixture of normals) with a chosen covariance. They
//! drive i.i.d., VAR(1), VMA(1) or VARMA(1,1) recursions with a block
//! coefficient matrix, or the lag-one elliptical alternative
//! `ε_t = A₀ r_t u_t + A₁ r_{t−1} u_{t−1}`.
//!
//! All generators take the random source explicitly; identical seeds give
//! bitwise-identical output.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, Uniform};

use crate::error::{invalid, Error, Result};
use crate::matrix::{Matrix, SeriesMatrix};
use crate::power::{chi_c1, chi_square_root_c1};

/// Distribution of the i.i.d. innovations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Scenario {
    Normal,
    /// `L z / sqrt(w/df)` with `w ~ χ²_df`.
    StudentT { df: f64 },
    /// `N(0, Σ)` with probability `gamma`, otherwise `N(0, scale_factor · Σ)`.
    MixtureNormal { gamma: f64, scale_factor: f64 },
}

impl Scenario {
    pub const DEFAULT_DF: f64 = 3.0;
    pub const DEFAULT_GAMMA: f64 = 0.8;
    pub const DEFAULT_SCALE_FACTOR: f64 = 9.0;

    pub fn student_t() -> Self {
        Scenario::StudentT { df: Self::DEFAULT_DF }
    }

    pub fn mixture() -> Self {
        Scenario::MixtureNormal {
            gamma: Self::DEFAULT_GAMMA,
            scale_factor: Self::DEFAULT_SCALE_FACTOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scenario::Normal => Ok(()),
            Scenario::StudentT { df } if df > 2.0 && df.is_finite() => Ok(()),
            Scenario::StudentT { df } => Err(Error::InvalidSpec(alloc::format!(
                "t innovations need df > 2 for a finite covariance, got {df}"
            ))),
            Scenario::MixtureNormal { gamma, scale_factor } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::InvalidSpec(alloc::format!("mixture gamma must lie in (0, 1), got {gamma}")));
                }
                if !(scale_factor > 0.0 && scale_factor.is_finite()) {
                    return Err(Error::InvalidSpec(alloc::format!(
                        "mixture scale factor must be positive, got {scale_factor}"
                    )));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CovarianceKind {
    Identity,
    /// Unit diagonal, `σ_ij = ½ |i − j|⁻²` off the diagonal.
    PolyDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CovarianceSpec {
    pub kind: CovarianceKind,
    pub p: usize,
}

pub fn build_covariance(spec: CovarianceSpec) -> Result<Matrix> {
    if spec.p == 0 {
        return Err(invalid("covariance dimension must be at least 1"));
    }
    Ok(match spec.kind {
        CovarianceKind::Identity => Matrix::identity(spec.p),
        CovarianceKind::PolyDecay => Matrix::from_fn(spec.p, spec.p, |i, j| {
            if i == j {
                1.0
            } else {
                let d = i.abs_diff(j) as f64;
                0.5 / (d * d)
            }
        }),
    })
}

/// Draws i.i.d. innovation rows for a scenario and covariance.
#[derive(Debug, Clone)]
pub struct InnovationSampler {
    scenario: Scenario,
    p: usize,
    /// Cholesky factor; `None` for the identity.
    chol: Option<Matrix>,
}

impl InnovationSampler {
    pub fn new(scenario: Scenario, cov: &Matrix) -> Result<Self> {
        scenario.validate()?;
        let p = cov.rows();
        if p == 0 || cov.cols() != p {
            return Err(invalid("covariance must be a non-empty square matrix"));
        }
        let chol = if *cov == Matrix::identity(p) { None } else { Some(cov.cholesky()?) };
        Ok(Self { scenario, p, chol })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Writes one innovation into `out`, using `scratch` (length `p`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], scratch: &mut [f64]) {
        for z in scratch.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        match &self.chol {
            None => out.copy_from_slice(scratch),
            Some(l) => l.mul_vec_into(scratch, out),
        }
        let factor = match self.scenario {
            Scenario::Normal => 1.0,
            Scenario::StudentT { df } => {
                let w: f64 = ChiSquared::new(df).expect("validated df").sample(rng);
                1.0 / libm::sqrt(w / df)
            }
            Scenario::MixtureNormal { gamma, scale_factor } => {
                if rng.random::<f64>() < gamma {
                    1.0
                } else {
                    libm::sqrt(scale_factor)
                }
            }
        };
        if factor != 1.0 {
            out.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// `rows` innovations, row-major.
    pub fn sample_rows<R: Rng + ?Sized>(&self, rows: usize, rng: &mut R) -> Vec<f64> {
        let p = self.p;
        let mut data = vec![0.0; rows * p];
        let mut scratch = vec![0.0; p];
        for row in data.chunks_exact_mut(p) {
            self.sample_into(rng, row, &mut scratch);
        }
        data
    }
}

/// `n` i.i.d. innovations from `scenario` with covariance `cov`.
pub fn gen_innovations<R: Rng + ?Sized>(
    scenario: Scenario,
    cov: &Matrix,
    n: usize,
    rng: &mut R,
) -> Result<SeriesMatrix> {
    let sampler = InnovationSampler::new(scenario, cov)?;
    SeriesMatrix::new(n, sampler.p(), sampler.sample_rows(n, rng))
}

/// Sparsity regime of the coefficient matrix `A`: entries are i.i.d. uniform
/// on the leading `m × m` block and zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "regime", rename_all = "snake_case"))]
pub enum CoeffRegime {
    /// `m = ⌊0.8 p⌋`, entries `U(−1/(4√m), 1/(4√m))`.
    Dense,
    /// `m = ⌊0.05 p⌋`, entries `U(−3/(4√m), 3/(4√m))`.
    Sparse,
    Explicit { m: usize, low: f64, high: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffSpec {
    pub regime: CoeffRegime,
    pub p: usize,
}

impl CoeffSpec {
    /// Block size and entry range `(m, low, high)`.
    pub fn block(&self) -> Result<(usize, f64, f64)> {
        let p = self.p;
        let (m, low, high) = match self.regime {
            CoeffRegime::Dense => {
                let m = 4 * p / 5;
                let b = 1.0 / (4.0 * libm::sqrt(m as f64));
                (m, -b, b)
            }
            CoeffRegime::Sparse => {
                let m = p / 20;
                let b = 3.0 / (4.0 * libm::sqrt(m as f64));
                (m, -b, b)
            }
            CoeffRegime::Explicit { m, low, high } => (m, low, high),
        };
        if m == 0 {
            return Err(Error::InvalidSpec(alloc::format!("coefficient block is empty for p = {p}")));
        }
        if m > p {
            return Err(Error::InvalidSpec(alloc::format!("block size m = {m} exceeds p = {p}")));
        }
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(Error::InvalidSpec(alloc::format!("invalid entry range [{low}, {high})")));
        }
        Ok((m, low, high))
    }
}

pub fn gen_coeff<R: Rng + ?Sized>(spec: CoeffSpec, rng: &mut R) -> Result<Matrix> {
    let (m, low, high) = spec.block()?;
    let dist = Uniform::new(low, high).map_err(|e| Error::InvalidSpec(alloc::format!("{e}")))?;
    let mut a = Matrix::zeros(spec.p, spec.p);
    for i in 0..m {
        for j in 0..m {
            a.set(i, j, dist.sample(rng));
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    IidNull,
    /// `ε_t = A ε_{t−1} + z_t`.
    Var1,
    /// `ε_t = z_t + A z_{t−1}`.
    Vma1,
    /// `ε_t = 0.5 A ε_{t−1} + z_t + 0.5 A z_{t−1}`.
    Varma1,
}

impl ModelKind {
    /// Autoregressive and moving-average multipliers of `A`.
    fn weights(self) -> (f64, f64) {
        match self {
            ModelKind::IidNull => (0.0, 0.0),
            ModelKind::Var1 => (1.0, 0.0),
            ModelKind::Vma1 => (0.0, 1.0),
            ModelKind::Varma1 => (0.5, 0.5),
        }
    }

    pub fn default_burn_in(self) -> usize {
        match self {
            ModelKind::IidNull => 0,
            ModelKind::Vma1 => 1,
            ModelKind::Var1 | ModelKind::Varma1 => 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Steps discarded before the first recorded row; `None` uses the default.
    pub burn_in: Option<usize>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, burn_in: None }
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or_else(|| self.kind.default_burn_in())
    }
}

/// A linear model with fixed coefficients and innovation law.
#[derive(Debug, Clone)]
pub struct LinearProcess {
    model: ModelSpec,
    a: Matrix,
    sampler: InnovationSampler,
}

/// Squarings used by the stationarity check (`k = 2^10`).
const SPECTRAL_SQUARINGS: u32 = 10;

impl LinearProcess {
    pub fn new(model: ModelSpec, a: Matrix, sampler: InnovationSampler) -> Result<Self> {
        if a.rows() != sampler.p() || a.cols() != sampler.p() {
            return Err(invalid("coefficient matrix does not match the innovation dimension"));
        }
        let (ar, _) = model.kind.weights();
        if ar != 0.0 {
            let radius = ar * a.spectral_radius_estimate(SPECTRAL_SQUARINGS);
            if !(radius < 1.0) {
                return Err(Error::Explosive(radius));
            }
        }
        Ok(Self { model, a, sampler })
    }

    pub fn coefficients(&self) -> &Matrix {
        &self.a
    }

    /// Generates `n` rows after the burn-in. The VAR state starts at zero and
    /// the first lagged innovation is a fresh draw.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SeriesMatrix> {
        let p = self.sampler.p();
        if self.model.kind == ModelKind::IidNull {
            return SeriesMatrix::new(n, p, self.sampler.sample_rows(n, rng));
        }
        let burn = self.model.burn_in();
        let total = burn + n;
        let z = self.sampler.sample_rows(total + 1, rng);
        let (ar, ma) = self.model.kind.weights();
        let mut prev = vec![0.0; p];
        let mut cur = vec![0.0; p];
        let mut ar_term = vec![0.0; p];
        let mut ma_term = vec![0.0; p];
        let mut out = Vec::with_capacity(n * p);
        for t in 1..=total {
            let z_t = &z[t * p..(t + 1) * p];
            let z_prev = &z[(t - 1) * p..t * p];
            if ar != 0.0 {
                self.a.mul_vec_into(&prev, &mut ar_term);
            }
            if ma != 0.0 {
                self.a.mul_vec_into(z_prev, &mut ma_term);
            }
            for i in 0..p {
                cur[i] = z_t[i] + ar * ar_term[i] + ma * ma_term[i];
            }
            if t > burn {
                out.extend_from_slice(&cur);
            }
            core::mem::swap(&mut prev, &mut cur);
        }
        SeriesMatrix::new(n, p, out)
    }
}

/// One-shot convenience around [`LinearProcess`].
pub fn gen_series<R: Rng + ?Sized>(
    model: ModelSpec,
    a: &Matrix,
    scenario: Scenario,
    cov: &Matrix,
    n: usize,
    rng: &mut R,
) -> Result<SeriesMatrix> {
    let sampler = InnovationSampler::new(scenario, cov)?;
    LinearProcess::new(model, a.clone(), sampler)?.generate(n, rng)
}

/// Uniform direction on the unit sphere of `R^p` (normalised Gaussian).
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut ss = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            ss += *v * *v;
        }
        if ss > 0.0 {
            let inv = 1.0 / libm::sqrt(ss);
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Law of the radial variable `r_t` in the lag-one alternative.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "law", rename_all = "snake_case"))]
pub enum Radial {
    /// `χ_p`, the radial part of a standard normal vector.
    ChiP,
    Constant { value: f64 },
    /// `χ_p · sqrt(df / w)`, `w ~ χ²_df`: the radial part of a multivariate t.
    StudentT { df: f64 },
}

/// Shape of `A₁`; both satisfy `A₁ᵀA₁ = τ² I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum A1Shape {
    /// `τ J` with `J` the cyclic shift `e_i ↦ e_{i+1}`; `tr(A₀ᵀA₁) = 0` for
    /// diagonal-dominant `A₀`, so lag-one products only enter through
    /// `tr(Σ₀Σ₁)`.
    CyclicShift,
    /// `τ I`. Adjacent-time products then carry an extra `O(τ²)` mean.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Spec {
    /// `Σ₀ = A₀ᵀA₀`.
    pub sigma0: CovarianceKind,
    /// `τ`; `None` means `1/√n`, which gives `tr(Σ₁) = p/n`.
    pub sigma1_scale: Option<f64>,
    pub a1_shape: A1Shape,
    pub radial: Radial,
}

impl Default for H1Spec {
    fn default() -> Self {
        Self {
            sigma0: CovarianceKind::Identity,
            sigma1_scale: None,
            a1_shape: A1Shape::CyclicShift,
            radial: Radial::ChiP,
        }
    }
}

/// The lag-one alternative `ε_t = A₀ r_t u_t + A₁ r_{t−1} u_{t−1}` with its
/// population constants.
#[derive(Debug, Clone)]
pub struct H1Model {
    p: usize,
    /// `A₀ = Lᵀ` for `Σ₀ = L Lᵀ`; `None` for the identity.
    a0: Option<Matrix>,
    tau: f64,
    shape: A1Shape,
    radial: Radial,
    /// `c₁ = E(r) E(r⁻¹)`.
    pub c1: f64,
    /// `ω = p^{−1/2} tr^{1/2}(Σ₀)`.
    pub omega: f64,
    pub tr_s0s1: f64,
    pub tr_s0sq: f64,
}

impl H1Model {
    pub fn new(spec: H1Spec, n: usize, p: usize) -> Result<Self> {
        if n < 2 || p < 2 {
            return Err(Error::InvalidSpec(alloc::format!("lag-one alternative needs n, p >= 2 (got {n}, {p})")));
        }
        let tau = spec.sigma1_scale.unwrap_or(1.0 / libm::sqrt(n as f64));
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidSpec(alloc::format!("A1 scale must be positive, got {tau}")));
        }
        let pf = p as f64;
        let c1 = match spec.radial {
            Radial::ChiP => chi_c1(pf),
            Radial::Constant { value } if value > 0.0 && value.is_finite() => 1.0,
            Radial::Constant { value } => {
                return Err(Error::InvalidSpec(alloc::format!("constant radial must be positive, got {value}")))
            }
            Radial::StudentT { df } if df > 1.0 && df.is_finite() => chi_c1(pf) * chi_square_root_c1(df),
            Radial::StudentT { df } => {
                return Err(Error::InvalidSpec(alloc::format!("t radial needs df > 1 for finite c1, got {df}")))
            }
        };
        let sigma0 = build_covariance(CovarianceSpec { kind: spec.sigma0, p })?;
        let a0 = match spec.sigma0 {
            CovarianceKind::Identity => None,
            CovarianceKind::PolyDecay => Some(sigma0.cholesky()?.transpose()),
        };
        let tr_s0 = sigma0.trace();
        let tr_s0sq = sigma0.as_slice().iter().map(|v| v * v).sum();
        Ok(Self {
            p,
            a0,
            tau,
            shape: spec.a1_shape,
            radial: spec.radial,
            c1,
            omega: libm::sqrt(tr_s0 / pf),
            // Σ₁ = τ² I for both shapes.
            tr_s0s1: tau * tau * tr_s0,
            tr_s0sq,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn draw_radial<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.radial {
            Radial::Constant { value } => value,
            Radial::ChiP => libm::sqrt(ChiSquared::new(self.p as f64).expect("p >= 2").sample(rng)),
            Radial::StudentT { df } => {
                let chi = libm::sqrt(ChiSquared::new(self.p as f64).expect("p >= 2").sample(rng));
                let w: f64 = ChiSquared::new(df).expect("validated df").sample(rng);
                chi * libm::sqrt(df / w)
            }
        }
    }

    /// `n` rows of the alternative; draws `n + 1` directions and radii.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SeriesMatrix> {
        let p = self.p;
        let mut u = vec![0.0; (n + 1) * p];
        let mut r = vec![0.0; n + 1];
        for (row, radius) in u.chunks_exact_mut(p).zip(r.iter_mut()) {
            sample_sphere(rng, row);
            *radius = self.draw_radial(rng);
        }
        let mut a0u = vec![0.0; p];
        let mut out = Vec::with_capacity(n * p);
        for t in 1..=n {
            let cur = &u[t * p..(t + 1) * p];
            let prev = &u[(t - 1) * p..t * p];
            match &self.a0 {
                None => a0u.copy_from_slice(cur),
                Some(a0) => a0.mul_vec_into(cur, &mut a0u),
            }
            let lag_scale = self.tau * r[t - 1];
            for i in 0..p {
                let a1u = match self.shape {
                    A1Shape::Identity => prev[i],
                    A1Shape::CyclicShift => prev[(i + p - 1) % p],
                };
                out.push(r[t] * a0u[i] + lag_scale * a1u);
            }
        }
        SeriesMatrix::new(n, p, out)
    }
}

/// A draw from the lag-one alternative with its constants.
#[derive(Debug, Clone)]
pub struct H1Sample {
    pub series: SeriesMatrix,
    pub c1: f64,
    pub omega: f64,
}

pub fn gen_h1_model<R: Rng + ?Sized>(spec: H1Spec, n: usize, p: usize, rng: &mut R) -> Result<H1Sample> {
    let model = H1Model::new(spec, n, p)?;
    Ok(H1Sample {
        series: model.generate(n, rng)?,
        c1: model.c1,
        omega: model.omega,
    })
}
