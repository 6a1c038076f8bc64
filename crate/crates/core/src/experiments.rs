//! Drive-strength sweeps, disorder ensembles, coherence comparison and the
//! conversion from device parameters to model units.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::chain::ChainConfig;
use crate::density::InitialState;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::ode::Tolerances;
use crate::reduced::{coherence_series, efficiency, integrate, IntegrationOptions};

/// Uniform grid of `steps` drive strengths on `[min, max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaGrid<T> {
    pub min: T,
    pub max: T,
    pub steps: usize,
}

impl<T: Real> BetaGrid<T> {
    pub fn new(min: T, max: T, steps: usize) -> Result<Self> {
        let grid = Self { min, max, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidSetting(format!(
                "beta0 grid needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::NonFinite { field: "beta0" });
        }
        if self.min < T::zero() {
            return Err(Error::Negative {
                field: "beta0",
                value: self.min.to_f64_lossy(),
            });
        }
        if self.max <= self.min {
            return Err(Error::InvalidSetting(format!(
                "beta0 grid max {} must exceed min {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<T> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|k| {
                if k == last {
                    self.max
                } else {
                    self.min
                        + (self.max - self.min) * T::from_usize_lossy(k) / T::from_usize_lossy(last)
                }
            })
            .collect()
    }
}

/// Provenance carried alongside every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMeta<T> {
    /// SHA-256 (hex) of the base configuration.
    pub config_hash: String,
    pub horizon: T,
    pub tol: Tolerances<T>,
    pub seed: Option<u64>,
    pub n_realizations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub beta0: Vec<T>,
    pub efficiency: Vec<T>,
    /// Standard error of the ensemble mean at each point.
    pub stderr: Option<Vec<T>>,
    /// Efficiency with the resonator decoupled (`g ≡ 0`).
    pub baseline: T,
    pub meta: SweepMeta<T>,
}

impl<T: Real> SweepResult<T> {
    /// Interior grid points lower than both neighbours.
    pub fn local_minima(&self) -> Vec<T> {
        let e = &self.efficiency;
        (1..e.len().saturating_sub(1))
            .filter(|&k| e[k] < e[k - 1] && e[k] < e[k + 1])
            .map(|k| self.beta0[k])
            .collect()
    }

    /// `(β₀, efficiency)` at the largest efficiency.
    pub fn peak(&self) -> (T, T) {
        let mut best = 0;
        for k in 1..self.efficiency.len() {
            if self.efficiency[k] > self.efficiency[best] {
                best = k;
            }
        }
        (self.beta0[best], self.efficiency[best])
    }
}

/// Hex SHA-256 of the configuration's parameters.
pub fn config_hash<T: Real>(cfg: &ChainConfig<T>) -> String {
    let digest = Sha256::digest(format!("{:?}", cfg.params()).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn efficiencies_over<T: Real>(
    cfg: &ChainConfig<T>,
    points: &[T],
    init: &InitialState<T>,
    opts: &IntegrationOptions<T>,
) -> Result<Vec<T>> {
    points
        .par_iter()
        .map(|&b| {
            let run = || -> Result<T> {
                let c = cfg.with_beta0(b)?;
                Ok(efficiency(&integrate(init, &c, opts)?))
            };
            run().map_err(|e| Error::AtBeta0 {
                beta0: b.to_f64_lossy(),
                source: Box::new(e),
            })
        })
        .collect()
}

fn decoupled_efficiency<T: Real>(
    cfg: &ChainConfig<T>,
    init: &InitialState<T>,
    opts: &IntegrationOptions<T>,
) -> Result<T> {
    Ok(efficiency(&integrate(init, &cfg.decoupled(), opts)?))
}

/// Final efficiency at each grid point, plus the decoupled baseline.
///
/// Points are evaluated on the current rayon pool; results do not depend on
/// how many threads it has.
pub fn sweep_beta0<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &BetaGrid<T>,
    init: &InitialState<T>,
    opts: &IntegrationOptions<T>,
) -> Result<SweepResult<T>> {
    grid.validate()?;
    opts.validate()?;
    let beta0 = grid.points();
    let eff = efficiencies_over(cfg, &beta0, init, opts)?;
    Ok(SweepResult {
        beta0,
        efficiency: eff,
        stderr: None,
        baseline: decoupled_efficiency(cfg, init, opts)?,
        meta: SweepMeta {
            config_hash: config_hash(cfg),
            horizon: opts.horizon,
            tol: opts.tol,
            seed: None,
            n_realizations: None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisorderTarget {
    Frequencies,
    Couplings,
}

/// Independent Gaussian disorder on one per-site parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSpec<T> {
    pub target: DisorderTarget,
    pub means: Vec<T>,
    /// Shared by every site.
    pub std: T,
    pub n_realizations: usize,
    pub master_seed: u64,
}

impl<T: Real> DisorderSpec<T> {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.means.len() != n_sites {
            return Err(Error::LengthMismatch {
                field: "means",
                expected: n_sites,
                found: self.means.len(),
            });
        }
        if self.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite { field: "means" });
        }
        if !self.std.is_finite() {
            return Err(Error::NonFinite { field: "std" });
        }
        if self.std < T::zero() {
            return Err(Error::Negative {
                field: "std",
                value: self.std.to_f64_lossy(),
            });
        }
        if self.n_realizations == 0 {
            return Err(Error::InvalidSetting("n_realizations must be at least 1".into()));
        }
        Ok(())
    }

    /// Generator for realization `r`: the ChaCha8 key comes from the master
    /// seed and the stream number is `r`, so each realization owns an
    /// independent sequence regardless of scheduling.
    pub fn rng(&self, r: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(r as u64);
        rng
    }

    /// Parameter vector of realization `r`, drawn in site order.
    pub fn draw(&self, r: usize) -> Vec<T> {
        let mut rng = self.rng(r);
        self.means
            .iter()
            .map(|&m| {
                let z: f64 = StandardNormal.sample(&mut rng);
                m + self.std * T::lit(z)
            })
            .collect()
    }
}

/// Configuration of realization `r`.
pub fn realization<T: Real>(
    cfg: &ChainConfig<T>,
    spec: &DisorderSpec<T>,
    r: usize,
) -> Result<ChainConfig<T>> {
    let values = spec.draw(r);
    match spec.target {
        DisorderTarget::Frequencies => cfg.with_omega(values),
        DisorderTarget::Couplings => cfg.with_g(values),
    }
}

/// Ensemble-averaged sweep.
///
/// Realizations run on a dedicated pool of `workers` threads (0 means the
/// rayon default). Means and standard errors are accumulated in realization
/// order, so output is bit-identical for any worker count. The first failing
/// realization by index aborts the run.
pub fn disorder_ensemble<T: Real>(
    cfg: &ChainConfig<T>,
    spec: &DisorderSpec<T>,
    grid: &BetaGrid<T>,
    init: &InitialState<T>,
    opts: &IntegrationOptions<T>,
    workers: usize,
) -> Result<SweepResult<T>> {
    spec.validate(cfg.n_sites())?;
    grid.validate()?;
    opts.validate()?;
    let beta0 = grid.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSetting(format!("thread pool: {e}")))?;

    let runs: Vec<Result<Vec<T>>> = pool.install(|| {
        (0..spec.n_realizations)
            .into_par_iter()
            .map(|r| {
                realization(cfg, spec, r)
                    .and_then(|c| efficiencies_over(&c, &beta0, init, opts))
                    .map_err(|e| Error::AtRealization {
                        index: r,
                        source: Box::new(e),
                    })
            })
            .collect()
    });

    // Welford accumulation in realization order; identical inputs leave the
    // mean exactly unchanged.
    let n_pts = beta0.len();
    let mut mean = vec![T::zero(); n_pts];
    let mut m2 = vec![T::zero(); n_pts];
    for (k, run) in runs.into_iter().enumerate() {
        let eff = run?;
        let count = T::from_usize_lossy(k + 1);
        for p in 0..n_pts {
            let delta = eff[p] - mean[p];
            mean[p] = mean[p] + delta / count;
            m2[p] = m2[p] + delta * (eff[p] - mean[p]);
        }
    }
    let r = spec.n_realizations;
    let stderr = m2
        .iter()
        .map(|&s| {
            if r < 2 {
                T::zero()
            } else {
                (s / T::from_usize_lossy(r - 1) / T::from_usize_lossy(r)).sqrt()
            }
        })
        .collect();

    Ok(SweepResult {
        beta0,
        efficiency: mean,
        stderr: Some(stderr),
        baseline: decoupled_efficiency(cfg, init, opts)?,
        meta: SweepMeta {
            config_hash: config_hash(cfg),
            horizon: opts.horizon,
            tol: opts.tol,
            seed: Some(spec.master_seed),
            n_realizations: Some(r),
        },
    })
}

/// `|σ_0N(t)|` with and without the resonator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceComparison<T> {
    pub times: Vec<T>,
    pub with_vibration: Vec<T>,
    pub without_vibration: Vec<T>,
}

impl<T: Real> CoherenceComparison<T> {
    /// Largest value of each series over samples with `t ≤ t_max`.
    pub fn max_until(&self, t_max: T) -> (T, T) {
        let mut out = (T::zero(), T::zero());
        for (k, &t) in self.times.iter().enumerate() {
            if t <= t_max {
                out.0 = out.0.max(self.with_vibration[k]);
                out.1 = out.1.max(self.without_vibration[k]);
            }
        }
        out
    }
}

/// Evolves the donor superposition under both configurations.
pub fn coherence_experiment<T: Real>(
    vibration: &ChainConfig<T>,
    no_vibration: &ChainConfig<T>,
    opts: &IntegrationOptions<T>,
) -> Result<CoherenceComparison<T>> {
    let same = vibration.n_sites() == no_vibration.n_sites()
        && vibration.omega() == no_vibration.omega()
        && vibration.lambda() == no_vibration.lambda()
        && vibration.kappa() == no_vibration.kappa();
    if !same {
        return Err(Error::InvalidSetting(
            "coherence pair must share n_sites, omega, lambda and kappa".into(),
        ));
    }
    let init = InitialState::DonorSuperposition;
    let a = integrate(&init, vibration, opts)?;
    let b = integrate(&init, no_vibration, opts)?;
    Ok(CoherenceComparison {
        with_vibration: coherence_series(&a),
        without_vibration: coherence_series(&b),
        times: a.times,
    })
}

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Device parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Dimensionless strain coupling `η`.
    pub eta: f64,
    /// Resonator mass, kg.
    pub mass: f64,
    /// Beam length, width and depth, m.
    pub length: f64,
    pub width: f64,
    pub depth: f64,
    /// Mode frequency, s⁻¹.
    pub nu: f64,
    pub quality: f64,
    /// Site energy `ħω`, eV.
    pub site_energy_ev: f64,
    /// `λ/ω`.
    pub lambda_over_omega: f64,
}

impl PhysicalParams {
    /// GaAs beam with embedded quantum dots.
    pub fn gaas_beam() -> Self {
        Self {
            eta: 0.06,
            mass: 1.4e-17,
            length: 1e-6,
            width: 85e-9,
            depth: 30e-9,
            nu: 1.2e9,
            quality: 100.0,
            site_energy_ev: 1e-3,
            lambda_over_omega: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eta", self.eta),
            ("mass", self.mass),
            ("length", self.length),
            ("width", self.width),
            ("depth", self.depth),
            ("nu", self.nu),
            ("quality", self.quality),
            ("site_energy_ev", self.site_energy_ev),
            ("lambda_over_omega", self.lambda_over_omega),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(Error::NonFinite { field });
            }
            if value <= 0.0 {
                return Err(Error::NonPositive { field, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    /// `g q₀/γ ≤ 0.1`: the resonator is eliminated safely.
    Adiabatic,
    /// `0.1 < g q₀/γ < 10`: heavily damped but marginal.
    WeakCoupling,
    StrongCoupling,
}

/// Device parameters translated to the dimensionless model (`ν = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitBridge {
    /// Zero-point length `√(ħ/2mν)`, m.
    pub q0_si: f64,
    /// `νη/(2q₀)`, s⁻¹·m⁻¹.
    pub g_si: f64,
    /// `g q₀ = νη/2`, s⁻¹.
    pub g_rate_si: f64,
    /// `ν/Q`, s⁻¹.
    pub gamma_si: f64,
    pub nu_si: f64,
    /// `η/2`.
    pub g_model: f64,
    /// `1/Q`.
    pub gamma_model: f64,
    pub omega_model: f64,
    pub lambda_model: f64,
    /// `g q₀/γ`.
    pub adiabaticity: f64,
    pub regime: CouplingRegime,
}

pub fn unit_bridge(phys: &PhysicalParams) -> Result<UnitBridge> {
    phys.validate()?;
    let q0_si = (HBAR / (2.0 * phys.mass * phys.nu)).sqrt();
    let g_si = phys.nu * phys.eta / (2.0 * q0_si);
    let g_rate_si = g_si * q0_si;
    let gamma_si = phys.nu / phys.quality;
    let adiabaticity = g_rate_si / gamma_si;
    let omega_model = phys.site_energy_ev * ELEMENTARY_CHARGE / HBAR / phys.nu;
    let regime = if adiabaticity <= 0.1 {
        CouplingRegime::Adiabatic
    } else if adiabaticity < 10.0 {
        CouplingRegime::WeakCoupling
    } else {
        CouplingRegime::StrongCoupling
    };
    Ok(UnitBridge {
        q0_si,
        g_si,
        g_rate_si,
        gamma_si,
        nu_si: phys.nu,
        g_model: g_rate_si / phys.nu,
        gamma_model: gamma_si / phys.nu,
        omega_model,
        lambda_model: phys.lambda_over_omega * omega_model,
        adiabaticity,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainParams;

    fn short() -> IntegrationOptions<f64> {
        IntegrationOptions {
            horizon: 40.0,
            samples: 2,
            ..Default::default()
        }
    }

    fn small_chain() -> ChainConfig<f64> {
        ChainParams::new(vec![0.0, 1.0, 0.0], vec![0.5, 1.5, 0.5], 0.1, 0.2, 1.1e3, 5.0)
            .validate()
            .unwrap()
    }

    #[test]
    fn grid_points() {
        let g = BetaGrid::<f64>::new(0.0, 3.0, 121).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 121);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[120], 3.0);
        assert!((p[40] - 1.0).abs() < 1e-15);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(BetaGrid::new(0.0, 3.0, 1).is_err());
        assert!(BetaGrid::new(2.0, 1.0, 5).is_err());
        assert!(BetaGrid::new(-1.0, 1.0, 5).is_err());
    }

    #[test]
    fn uncoupled_sweep_is_flat() {
        let cfg = small_chain().decoupled();
        let grid = BetaGrid::new(0.0, 3.0, 4).unwrap();
        let res = sweep_beta0(&cfg, &grid, &InitialState::SingleExcitation(1), &short()).unwrap();
        for e in &res.efficiency {
            assert_eq!(*e, res.baseline);
        }
        assert!(res.stderr.is_none());
        assert_eq!(res.meta.config_hash.len(), 64);
    }

    #[test]
    fn baseline_ignores_drive_and_bath() {
        let cfg = small_chain();
        let init = InitialState::SingleExcitation(1);
        let grid = BetaGrid::new(0.0, 1.0, 2).unwrap();
        let a = sweep_beta0(&cfg, &grid, &init, &short()).unwrap().baseline;
        let mut p = cfg.params().clone();
        p.gamma = 50.0;
        p.nbar = 0.0;
        p.beta0 = 2.0;
        let other = p.validate().unwrap();
        let b = sweep_beta0(&other, &grid, &init, &short()).unwrap().baseline;
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_annotates_failures() {
        let cfg = small_chain();
        let grid = BetaGrid::new(0.0, 1.0, 3).unwrap();
        let mut opts = short();
        opts.tol = Tolerances { rel: 1e-8, abs: 1e-10 };
        let init = InitialState::SingleExcitation(9);
        match sweep_beta0(&cfg, &grid, &init, &opts) {
            Err(Error::AtBeta0 { beta0, .. }) => assert_eq!(beta0, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn spec(std: f64, n: usize) -> DisorderSpec<f64> {
        DisorderSpec {
            target: DisorderTarget::Frequencies,
            means: vec![0.0, 1.0, 0.0],
            std,
            n_realizations: n,
            master_seed: 42,
        }
    }

    #[test]
    fn draws_are_reproducible_and_distinct() {
        let s = spec(0.1, 4);
        assert_eq!(s.draw(3), s.draw(3));
        assert_ne!(s.draw(0), s.draw(1));
        let other = DisorderSpec { master_seed: 43, ..s.clone() };
        assert_ne!(s.draw(0), other.draw(0));
    }

    #[test]
    fn draw_statistics() {
        let s = DisorderSpec {
            means: vec![2.0],
            ..spec(0.3, 1)
        };
        let xs: Vec<f64> = (0..4000).map(|r| s.draw(r)[0]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m - 2.0).abs() < 0.02);
        assert!((v.sqrt() - 0.3).abs() < 0.02);
    }

    #[test]
    fn zero_spread_reproduces_clean_curve() {
        let cfg = small_chain();
        let grid = BetaGrid::new(0.0, 2.0, 3).unwrap();
        let init = InitialState::SingleExcitation(1);
        let clean = sweep_beta0(&cfg, &grid, &init, &short()).unwrap();
        let ens = disorder_ensemble(&cfg, &spec(0.0, 3), &grid, &init, &short(), 1).unwrap();
        assert_eq!(ens.efficiency, clean.efficiency);
        assert!(ens.stderr.unwrap().iter().all(|s| *s == 0.0));
        assert_eq!(ens.meta.seed, Some(42));
    }

    #[test]
    fn small_spread_is_continuous() {
        let cfg = small_chain();
        let grid = BetaGrid::new(0.0, 2.0, 3).unwrap();
        let init = InitialState::SingleExcitation(1);
        let clean = sweep_beta0(&cfg, &grid, &init, &short()).unwrap();
        let ens = disorder_ensemble(&cfg, &spec(1e-8, 3), &grid, &init, &short(), 1).unwrap();
        for (a, b) in ens.efficiency.iter().zip(&clean.efficiency) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn single_realization_matches_direct_run() {
        let cfg = small_chain();
        let s = DisorderSpec {
            target: DisorderTarget::Couplings,
            means: vec![0.5, 1.5, 0.5],
            ..spec(0.3, 1)
        };
        let grid = BetaGrid::new(0.0, 1.0, 2).unwrap();
        let init = InitialState::SingleExcitation(1);
        let ens = disorder_ensemble(&cfg, &s, &grid, &init, &short(), 1).unwrap();
        let direct = sweep_beta0(&realization(&cfg, &s, 0).unwrap(), &grid, &init, &short()).unwrap();
        assert_eq!(ens.efficiency, direct.efficiency);
    }

    #[test]
    fn worker_count_is_invisible() {
        let cfg = small_chain();
        let grid = BetaGrid::new(0.0, 2.0, 3).unwrap();
        let init = InitialState::SingleExcitation(1);
        let s = spec(0.1, 6);
        let a = disorder_ensemble(&cfg, &s, &grid, &init, &short(), 1).unwrap();
        let b = disorder_ensemble(&cfg, &s, &grid, &init, &short(), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(0.1, 1).validate(3).is_ok());
        assert!(spec(-0.1, 1).validate(3).is_err());
        assert!(spec(0.1, 0).validate(3).is_err());
        assert!(matches!(
            spec(0.1, 1).validate(4),
            Err(Error::LengthMismatch { field: "means", .. })
        ));
    }

    #[test]
    fn identical_coherence_configs_agree() {
        let cfg = small_chain();
        let c = coherence_experiment(&cfg, &cfg, &IntegrationOptions { samples: 50, ..short() }).unwrap();
        assert_eq!(c.with_vibration, c.without_vibration);
        assert_eq!(c.times.len(), 50);
        let other = cfg.with_kappa(0.0).unwrap();
        assert!(coherence_experiment(&cfg, &other, &short()).is_err());
    }

    #[test]
    fn coherence_larger_without_sink() {
        let cfg = small_chain();
        let opts = IntegrationOptions { samples: 41, ..short() };
        let sink = coherence_experiment(&cfg, &cfg.decoupled(), &opts).unwrap();
        let free_cfg = cfg.with_kappa(0.0).unwrap();
        let free = coherence_experiment(&free_cfg, &free_cfg.decoupled(), &opts).unwrap();
        for k in 1..opts.samples {
            assert!(free.with_vibration[k] > sink.with_vibration[k]);
        }
    }

    #[test]
    fn bridge_gaas_beam() {
        let b = unit_bridge(&PhysicalParams::gaas_beam()).unwrap();
        assert!((b.g_model - 0.03).abs() < 1e-15);
        assert!((b.g_rate_si - 3.6e7).abs() < 1e-3);
        assert!((b.q0_si - 5.602e-14).abs() < 1e-17);
        assert!((b.gamma_si - 1.2e7).abs() < 1e-6);
        assert!((b.adiabaticity - 3.0).abs() < 1e-12);
        assert_eq!(b.regime, CouplingRegime::WeakCoupling);
        assert!((b.lambda_model / b.omega_model - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bridge_round_trip() {
        let p = PhysicalParams::gaas_beam();
        let b = unit_bridge(&p).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(2.0 * b.g_model, p.eta) < 1e-12);
        assert!(rel(1.0 / b.gamma_model, p.quality) < 1e-12);
        assert!(rel(HBAR / (2.0 * p.nu * b.q0_si * b.q0_si), p.mass) < 1e-12);
        assert!(rel(b.g_si * 2.0 * b.q0_si / b.nu_si, p.eta) < 1e-12);
        assert!(rel(b.omega_model * p.nu * HBAR / ELEMENTARY_CHARGE, p.site_energy_ev) < 1e-12);
    }

    #[test]
    fn bridge_rejects_nonpositive() {
        let p = PhysicalParams {
            mass: 0.0,
            ..PhysicalParams::gaas_beam()
        };
        assert!(matches!(unit_bridge(&p), Err(Error::NonPositive { field: "mass", .. })));
    }
}
