//! Linear-chain model parameters and the closed-form coefficients of the
//! reduced dynamics.
//!
//! Sites carry 1-based labels `1..=N`; label `0` is the global ground state
//! `|gg…g⟩`. Frequencies and rates are dimensionless in units of the
//! vibrational frequency unless a physical unit bridge populated them.

use crate::error::{Error, Result};
use crate::num::Real;

/// Unvalidated chain parameters, as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams<T> {
    pub n_sites: usize,
    /// Site frequencies `ω_j`.
    pub omega: Vec<T>,
    /// Site–resonator couplings `g_j`.
    pub g: Vec<T>,
    /// Nearest-neighbour hopping.
    pub lambda: T,
    /// Decay rate into the sink attached to site `N`.
    pub kappa: T,
    pub nu: T,
    /// Zero-point length of the resonator.
    pub q0: T,
    /// Steady-state drive amplitude `β₀ = 2ε/γ`.
    pub beta0: T,
    /// Resonator damping rate.
    pub gamma: T,
    /// Thermal occupation of the resonator bath.
    pub nbar: T,
}

impl<T: Real> ChainParams<T> {
    /// Parameters with `ν = 1`, `q₀ = 1/√2`, `β₀ = 0` and the given site data.
    pub fn new(omega: Vec<T>, g: Vec<T>, lambda: T, kappa: T, gamma: T, nbar: T) -> Self {
        Self {
            n_sites: omega.len(),
            omega,
            g,
            lambda,
            kappa,
            nu: T::one(),
            q0: T::FRAC_1_SQRT_2(),
            beta0: T::zero(),
            gamma,
            nbar,
        }
    }

    pub fn validate(self) -> Result<ChainConfig<T>> {
        validate_config(self)
    }
}

/// Validated chain parameters with the dephasing rate `Γ` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig<T> {
    params: ChainParams<T>,
    dephasing: T,
}

fn finite<T: Real>(field: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { field })
    }
}

fn positive<T: Real>(field: &'static str, v: T) -> Result<()> {
    finite(field, v)?;
    if v > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            field,
            value: v.to_f64_lossy(),
        })
    }
}

fn non_negative<T: Real>(field: &'static str, v: T) -> Result<()> {
    finite(field, v)?;
    if v >= T::zero() {
        Ok(())
    } else {
        Err(Error::Negative {
            field,
            value: v.to_f64_lossy(),
        })
    }
}

/// Checks every parameter invariant and caches `Γ = q₀²(2n̄+1)/γ`.
pub fn validate_config<T: Real>(raw: ChainParams<T>) -> Result<ChainConfig<T>> {
    let n = raw.n_sites;
    if n < 2 {
        return Err(Error::TooFewSites(n));
    }
    for (field, v) in [("omega", &raw.omega), ("g", &raw.g)] {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                field,
                expected: n,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { field });
        }
    }
    positive("lambda", raw.lambda)?;
    positive("nu", raw.nu)?;
    positive("q0", raw.q0)?;
    positive("gamma", raw.gamma)?;
    non_negative("kappa", raw.kappa)?;
    non_negative("nbar", raw.nbar)?;
    non_negative("beta0", raw.beta0)?;

    let two = T::lit(2.0);
    let dephasing = raw.q0 * raw.q0 * (two * raw.nbar + T::one()) / raw.gamma;
    finite("Gamma", dephasing)?;
    Ok(ChainConfig {
        params: raw,
        dephasing,
    })
}

impl<T: Real> ChainConfig<T> {
    pub fn params(&self) -> &ChainParams<T> {
        &self.params
    }

    pub fn into_params(self) -> ChainParams<T> {
        self.params
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    /// Dimension of the single-excitation space including `|0⟩`.
    pub fn dim(&self) -> usize {
        self.params.n_sites + 1
    }

    pub fn omega(&self) -> &[T] {
        &self.params.omega
    }

    pub fn g(&self) -> &[T] {
        &self.params.g
    }

    pub fn lambda(&self) -> T {
        self.params.lambda
    }

    pub fn kappa(&self) -> T {
        self.params.kappa
    }

    pub fn nu(&self) -> T {
        self.params.nu
    }

    pub fn q0(&self) -> T {
        self.params.q0
    }

    pub fn beta0(&self) -> T {
        self.params.beta0
    }

    pub fn gamma(&self) -> T {
        self.params.gamma
    }

    pub fn nbar(&self) -> T {
        self.params.nbar
    }

    /// Cached collective dephasing rate `Γ`.
    pub fn dephasing(&self) -> T {
        self.dephasing
    }

    /// Coupling of basis state `i`, with `g_0 = 0`.
    #[inline]
    pub fn g_ext(&self, i: usize) -> T {
        if i == 0 {
            T::zero()
        } else {
            self.params.g[i - 1]
        }
    }

    /// Copy with a different drive amplitude.
    pub fn with_beta0(&self, beta0: T) -> Result<Self> {
        let mut p = self.params.clone();
        p.beta0 = beta0;
        validate_config(p)
    }

    pub fn with_g(&self, g: Vec<T>) -> Result<Self> {
        let mut p = self.params.clone();
        p.g = g;
        validate_config(p)
    }

    pub fn with_omega(&self, omega: Vec<T>) -> Result<Self> {
        let mut p = self.params.clone();
        p.omega = omega;
        validate_config(p)
    }

    pub fn with_kappa(&self, kappa: T) -> Result<Self> {
        let mut p = self.params.clone();
        p.kappa = kappa;
        validate_config(p)
    }

    /// Same chain with the resonator decoupled (`g ≡ 0`).
    pub fn decoupled(&self) -> Self {
        self.with_g(vec![T::zero(); self.n_sites()])
            .expect("zero couplings keep a valid config valid")
    }

    /// Amplitude of the drive-induced modulation `2β₀q₀`, shared by all sites.
    #[inline]
    pub(crate) fn modulation_amplitude(&self) -> T {
        T::lit(2.0) * self.params.beta0 * self.params.q0
    }

    /// `χ_j(t)` for every site at once, written into `out[1..=N]`; `out[0] = 0`.
    pub(crate) fn chi_all(&self, t: T, out: &mut [T]) {
        let s = (self.params.nu * t).sin();
        let amp = self.modulation_amplitude() * s;
        let half = T::lit(0.5);
        out[0] = T::zero();
        for j in 0..self.params.n_sites {
            out[j + 1] = half * self.params.omega[j] - amp * self.params.g[j];
        }
    }
}

/// Time-dependent on-site coefficient `χ_j(t) = ω_j/2 − 2 g_j β₀ q₀ sin νt`.
pub fn chi<T: Real>(j: usize, t: T, cfg: &ChainConfig<T>) -> Result<T> {
    let n = cfg.n_sites();
    if j == 0 || j > n {
        return Err(Error::SiteOutOfRange {
            index: j,
            n_sites: n,
        });
    }
    let s = (cfg.nu() * t).sin();
    Ok(T::lit(0.5) * cfg.omega()[j - 1] - cfg.modulation_amplitude() * cfg.g()[j - 1] * s)
}

/// `Γ = q₀²(2n̄+1)/γ`.
pub fn gamma_dephasing<T: Real>(cfg: &ChainConfig<T>) -> T {
    cfg.dephasing()
}

/// Dephasing weights `G_ij = −2(g_i − g_j)²` over the basis `|0⟩..|N⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTables<T> {
    dim: usize,
    gmat: Vec<T>,
}

impl<T: Real> CoefficientTables<T> {
    #[inline]
    pub fn g(&self, i: usize, j: usize) -> T {
        self.gmat[i * self.dim + j]
    }

    /// Hopping selector `F_ij = 1 − δ_ij`.
    #[inline]
    pub fn f(i: usize, j: usize) -> T {
        if i == j {
            T::zero()
        } else {
            T::one()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub fn coefficient_tables<T: Real>(cfg: &ChainConfig<T>) -> CoefficientTables<T> {
    let dim = cfg.dim();
    let mut gmat = vec![T::zero(); dim * dim];
    let m2 = T::lit(-2.0);
    for i in 0..dim {
        for j in 0..dim {
            let d = cfg.g_ext(i) - cfg.g_ext(j);
            gmat[i * dim + j] = m2 * d * d;
        }
    }
    CoefficientTables { dim, gmat }
}
