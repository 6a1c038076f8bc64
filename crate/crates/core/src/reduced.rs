//! Reduced master-equation dynamics of the chain after the resonator has
//! been adiabatically eliminated, with a conditional (non-absorbing) sink
//! on the last site.
//!
//! Matrix elements obey, for `i, j ≥ 1`,
//!
//! ```text
//! dσ_ij/dt = {−2i(χ_i − χ_j) + 4Γ G_ij − κ(δ_jN + δ_iN)} σ_ij
//!            − iλ [F_i1 σ_{i−1,j} + F_iN σ_{i+1,j} − F_j1 σ_{i,j−1} − F_jN σ_{i,j+1}]
//! ```
//!
//! and for the row of the ground state
//!
//! ```text
//! dσ_0j/dt = [2iχ_j + 4Γ G_0j − κ δ_jN] σ_0j + iλ F_j1 σ_{0,j−1} + iλ F_jN σ_{0,j+1}
//! ```
//!
//! The emitted weight `∫ 2κ σ_NN dt` is integrated alongside the state, so
//! `efficiency + trace σ` is conserved by construction.

use crate::chain::{coefficient_tables, ChainConfig, CoefficientTables};
use crate::density::{DensityMatrix, HermitianLayout, InitialState};
use crate::error::{Error, Result};
use crate::num::{c, mul_i, Real, C};
use crate::ode::{Dopri5, OdeSystem, StepStats, Tolerances};

/// Derivative `dσ/dt` at time `t`, element by element; the accumulator slot
/// of the result holds `2κ σ_NN`.
pub fn rhs<T: Real>(
    sigma: &DensityMatrix<T>,
    t: T,
    cfg: &ChainConfig<T>,
) -> Result<DensityMatrix<T>> {
    let dim = cfg.dim();
    if sigma.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: sigma.dim(),
        });
    }
    let n = cfg.n_sites();
    let tab = coefficient_tables(cfg);
    let f = CoefficientTables::<T>::f;
    let mut chi = vec![T::zero(); dim];
    cfg.chi_all(t, &mut chi);
    let two = T::lit(2.0);
    let four_gamma = T::lit(4.0) * cfg.dephasing();
    let kappa = cfg.kappa();
    let lambda = cfg.lambda();
    let delta = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
    let zero = c(T::zero(), T::zero());
    // σ with out-of-range indices read as zero; they are always multiplied by a vanishing F.
    let s = |i: isize, j: isize| {
        if i < 0 || j < 0 || i as usize >= dim || j as usize >= dim {
            zero
        } else {
            sigma.get(i as usize, j as usize)
        }
    };

    let mut out = DensityMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let (ii, jj) = (i as isize, j as isize);
            let d = if i == 0 && j == 0 {
                zero
            } else if i == 0 {
                let diag = c(
                    four_gamma * tab.g(0, j) - kappa * delta(j, n),
                    two * chi[j],
                );
                diag * s(0, jj)
                    + mul_i(
                        (s(0, jj - 1) * f(j, 1) + s(0, jj + 1) * f(j, n)) * lambda,
                    )
            } else if j == 0 {
                let diag = c(
                    four_gamma * tab.g(i, 0) - kappa * delta(i, n),
                    -two * chi[i],
                );
                diag * s(ii, 0)
                    - mul_i((s(ii - 1, 0) * f(i, 1) + s(ii + 1, 0) * f(i, n)) * lambda)
            } else {
                let diag = c(
                    four_gamma * tab.g(i, j) - kappa * (delta(j, n) + delta(i, n)),
                    -two * (chi[i] - chi[j]),
                );
                let hop = s(ii - 1, jj) * f(i, 1) + s(ii + 1, jj) * f(i, n)
                    - s(ii, jj - 1) * f(j, 1)
                    - s(ii, jj + 1) * f(j, n);
                diag * s(ii, jj) - mul_i(hop * lambda)
            };
            out.set(i, j, d);
        }
    }
    out.efficiency_accum = two * kappa * sigma.population(n);
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Pair<T> {
    pos: usize,
    d_omega: T,
    d_g: T,
    damping: T,
    terms: (usize, usize),
}

/// One packed neighbour entry `sign·(y[re] + i·im_sign·y[im])` of a hopping sum.
#[derive(Debug, Clone, Copy)]
struct Term<T> {
    re: usize,
    im: usize,
    im_sign: T,
    sign: T,
}

/// Packed Hermitian form of the reduced equations used by the integrator.
pub(crate) struct ReducedSystem<T> {
    layout: HermitianLayout,
    n: usize,
    pairs: Vec<Pair<T>>,
    diag_terms: Vec<(usize, usize)>,
    terms: Vec<Term<T>>,
    skipped: Vec<usize>,
    lambda: T,
    kappa: T,
    nu: T,
    drive: T,
}

impl<T: Real> ReducedSystem<T> {
    /// With `excited_block_only`, coherences with `|0⟩` are assumed to vanish
    /// and are neither read nor written; they stay zero under the dynamics.
    pub fn new(cfg: &ChainConfig<T>, excited_block_only: bool) -> Self {
        let dim = cfg.dim();
        let n = cfg.n_sites();
        let layout = HermitianLayout::new(dim);
        let tab = coefficient_tables(cfg);
        let four_gamma = T::lit(4.0) * cfg.dephasing();
        let omega = |i: usize| if i == 0 { T::zero() } else { cfg.omega()[i - 1] };
        let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);
        // Row 0 of a single-excitation state is identically zero.
        let first = usize::from(excited_block_only);
        let skipped = if excited_block_only {
            (1..dim).map(|j| layout.upper(0, j)).collect()
        } else {
            Vec::new()
        };
        let mut terms = Vec::new();
        let diag_terms = (0..dim)
            .map(|i| push_hopping_terms(&layout, n, i, i, &mut terms))
            .collect();
        for i in first..dim {
            for j in (i + 1)..dim {
                let sink = if j == n { cfg.kappa() } else { T::zero() };
                pairs.push(Pair {
                    pos: layout.upper(i, j),
                    d_omega: omega(i) - omega(j),
                    d_g: cfg.g_ext(i) - cfg.g_ext(j),
                    damping: four_gamma * tab.g(i, j) - sink,
                    terms: push_hopping_terms(&layout, n, i, j, &mut terms),
                });
            }
        }
        Self {
            layout,
            n,
            pairs,
            diag_terms,
            terms,
            skipped,
            lambda: cfg.lambda(),
            kappa: cfg.kappa(),
            nu: cfg.nu(),
            drive: T::lit(4.0) * cfg.beta0() * cfg.q0(),
        }
    }

    pub fn layout(&self) -> &HermitianLayout {
        &self.layout
    }

    /// `−iλ Σ ±σ` over the precomputed neighbour entries in `range`.
    #[inline]
    fn hopping(&self, y: &[T], range: (usize, usize)) -> C<T> {
        let mut re = T::zero();
        let mut im = T::zero();
        for t in &self.terms[range.0..range.1] {
            re = re + t.sign * y[t.re];
            im = im + t.sign * t.im_sign * y[t.im];
        }
        c(im * self.lambda, -re * self.lambda)
    }
}

/// Hopping neighbours of a basis state: `(lower, upper)` site labels.
fn neighbours(n: usize, i: usize) -> (Option<usize>, Option<usize>) {
    if i == 0 {
        (None, None)
    } else {
        (
            if i >= 2 { Some(i - 1) } else { None },
            if i < n { Some(i + 1) } else { None },
        )
    }
}

/// Appends the entries of `σ_{i±1,j} − σ_{i,j±1}` and returns their range.
fn push_hopping_terms<T: Real>(
    layout: &HermitianLayout,
    n: usize,
    i: usize,
    j: usize,
    terms: &mut Vec<Term<T>>,
) -> (usize, usize) {
    let start = terms.len();
    let mut push = |a: usize, b: usize, sign: T| {
        use std::cmp::Ordering::*;
        let (re, im, im_sign) = match a.cmp(&b) {
            Equal => (a, a, T::zero()),
            Less => {
                let p = layout.upper(a, b);
                (p, p + 1, T::one())
            }
            Greater => {
                let p = layout.upper(b, a);
                (p, p + 1, -T::one())
            }
        };
        terms.push(Term {
            re,
            im,
            im_sign,
            sign,
        });
    };
    let (il, iu) = neighbours(n, i);
    let (jl, ju) = neighbours(n, j);
    for k in [il, iu].into_iter().flatten() {
        push(k, j, T::one());
    }
    for k in [jl, ju].into_iter().flatten() {
        push(i, k, -T::one());
    }
    (start, terms.len())
}

impl<T: Real> OdeSystem<T> for ReducedSystem<T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn rhs(&self, t: T, y: &[T], dy: &mut [T]) {
        let dim = self.layout.dim;
        let modulation = self.drive * (self.nu * t).sin();

        for i in 0..dim {
            let h = self.hopping(y, self.diag_terms[i]);
            let sink = if i == self.n { self.kappa + self.kappa } else { T::zero() };
            dy[i] = h.re - sink * y[i];
        }
        for p in &self.pairs {
            let s = c(y[p.pos], y[p.pos + 1]);
            // Phase rate 2(χ_i − χ_j).
            let theta = p.d_omega - modulation * p.d_g;
            let d = s * p.damping + c(s.im * theta, -s.re * theta) + self.hopping(y, p.terms);
            dy[p.pos] = d.re;
            dy[p.pos + 1] = d.im;
        }
        for &p in &self.skipped {
            dy[p] = T::zero();
            dy[p + 1] = T::zero();
        }
        dy[self.layout.accum_index()] = (self.kappa + self.kappa) * y[self.n];
    }
}

/// Horizon, sampling and tolerance of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions<T> {
    pub horizon: T,
    /// Number of uniformly spaced snapshots, both endpoints included.
    pub samples: usize,
    pub tol: Tolerances<T>,
}

impl<T: Real> Default for IntegrationOptions<T> {
    fn default() -> Self {
        Self {
            horizon: T::lit(300.0),
            samples: 2000,
            tol: Tolerances::default(),
        }
    }
}

impl<T: Real> IntegrationOptions<T> {
    pub fn with_horizon(horizon: T) -> Self {
        Self {
            horizon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero() && self.horizon.is_finite()) {
            return Err(Error::InvalidSetting(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidSetting("need at least 2 samples".into()));
        }
        Tolerances::new(self.tol.rel, self.tol.abs).map(|_| ())
    }

    pub fn sample_time(&self, k: usize) -> T {
        if k + 1 == self.samples {
            self.horizon
        } else {
            self.horizon * T::from_usize_lossy(k) / T::from_usize_lossy(self.samples - 1)
        }
    }
}

/// A sample at which the state left the positive cone by more than the
/// checking tolerance. Reported, not fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdWarning<T> {
    pub t: T,
    pub sample: usize,
}

/// Time-sampled record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    /// `populations[k][j] = σ_jj(t_k)`, `j = 0..=N`.
    pub populations: Vec<Vec<T>>,
    /// `σ_0N(t_k)`.
    pub coherence_0n: Vec<C<T>>,
    pub trace: Vec<T>,
    pub efficiency: Vec<T>,
    pub final_state: DensityMatrix<T>,
    pub psd_warnings: Vec<PsdWarning<T>>,
    pub stats: StepStats,
}

impl<T: Real> Trajectory<T> {
    pub fn n_sites(&self) -> usize {
        self.final_state.dim() - 1
    }

    pub fn initial_trace(&self) -> T {
        self.trace[0]
    }

    /// Largest `|efficiency(t) + trace σ(t) − trace σ(0)|` over the samples.
    pub fn conservation_defect(&self) -> T {
        let t0 = self.initial_trace();
        self.trace
            .iter()
            .zip(&self.efficiency)
            .map(|(tr, e)| (*tr + *e - t0).abs())
            .fold(T::zero(), T::max)
    }
}

/// Integrates the reduced dynamics from `init` over `[0, horizon]`.
pub fn integrate<T: Real>(
    init: &InitialState<T>,
    cfg: &ChainConfig<T>,
    opts: &IntegrationOptions<T>,
) -> Result<Trajectory<T>> {
    opts.validate()?;
    let sigma0 = init.density(cfg.n_sites())?;
    let n = cfg.n_sites();
    let ground_coherent = (1..=n).any(|j| sigma0.get(0, j) != C::new(T::zero(), T::zero()));
    let sys = ReducedSystem::new(cfg, !ground_coherent);
    let layout = sys.layout().clone();
    let dim = layout.dim;
    let mut y = vec![T::zero(); layout.len()];
    layout.pack(&sigma0, &mut y);

    let cap = opts.samples;
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        populations: Vec::with_capacity(cap),
        coherence_0n: Vec::with_capacity(cap),
        trace: Vec::with_capacity(cap),
        efficiency: Vec::with_capacity(cap),
        final_state: sigma0,
        psd_warnings: Vec::new(),
        stats: StepStats::default(),
    };
    let psd_tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    let record = |traj: &mut Trajectory<T>, t: T, k: usize, y: &[T]| {
        let pops: Vec<T> = y[..dim].to_vec();
        traj.trace.push(pops.iter().copied().sum());
        traj.populations.push(pops);
        traj.times.push(t);
        traj.coherence_0n.push(layout.get(y, 0, n));
        traj.efficiency.push(y[layout.accum_index()]);
        if !layout.unpack(y).is_psd_within(psd_tol) {
            traj.psd_warnings.push(PsdWarning { t, sample: k });
        }
    };

    let mut stepper = Dopri5::new(layout.len(), opts.tol);
    let mut t = T::zero();
    record(&mut traj, t, 0, &y);
    for k in 1..opts.samples {
        let target = opts.sample_time(k);
        stepper.advance(&sys, &mut t, &mut y, target)?;
        record(&mut traj, t, k, &y);
    }
    traj.final_state = layout.unpack(&y);
    traj.stats = stepper.stats();
    Ok(traj)
}

/// Total weight emitted into the sink by the end of the run.
pub fn efficiency<T: Real>(traj: &Trajectory<T>) -> T {
    traj.efficiency.last().copied().unwrap_or_else(T::zero)
}

/// `|σ_0N(t)|` at every sample.
pub fn coherence_series<T: Real>(traj: &Trajectory<T>) -> Vec<T> {
    traj.coherence_0n.iter().map(|z| z.norm()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainParams;
    use rand::{Rng, SeedableRng};

    fn detuned_chain() -> ChainConfig<f64> {
        ChainParams::new(
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.5, 1.5, 0.5, 0.5, 0.5],
            0.1,
            0.2,
            1.1e5,
            5.0,
        )
        .validate()
        .unwrap()
    }

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> DensityMatrix<f64> {
        let mut m = DensityMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C::new(rng.random_range(-1.0..1.0), 0.0));
            for j in (i + 1)..dim {
                let z = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        m
    }

    #[test]
    fn rhs_from_first_site() {
        let cfg = detuned_chain();
        let sigma = DensityMatrix::basis_projector(7, 1);
        let d = rhs(&sigma, 0.0, &cfg).unwrap();
        assert_eq!(d.get(1, 1), C::new(0.0, 0.0));
        assert!((d.get(2, 1) - C::new(0.0, -0.1)).norm() < 1e-15);
        assert!((d.get(1, 2) - C::new(0.0, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn rhs_sink_on_last_site() {
        let cfg = detuned_chain();
        for t in [0.0, 1.3, 7.7] {
            let sigma = DensityMatrix::basis_projector(7, 6);
            let d = rhs(&sigma, t, &cfg).unwrap();
            assert!((d.get(6, 6).re + 0.4).abs() < 1e-15);
            assert!((d.efficiency_accum - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_trace_loss_is_sink_only() {
        let cfg = detuned_chain().with_beta0(0.9).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let sigma = random_hermitian(7, &mut rng);
            let t = rng.random_range(0.0..10.0);
            let d = rhs(&sigma, t, &cfg).unwrap();
            let expected = -2.0 * 0.2 * sigma.population(6);
            assert!((d.trace() - expected).abs() < 1e-14);
            assert_eq!(d.get(0, 0), C::new(0.0, 0.0));
        }
    }

    #[test]
    fn rhs_preserves_hermiticity() {
        let cfg = detuned_chain().with_beta0(1.7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let sigma = random_hermitian(7, &mut rng);
            let d = rhs(&sigma, rng.random_range(0.0..20.0), &cfg).unwrap();
            assert!(d.hermiticity_defect() <= 1e-14);
        }
    }

    #[test]
    fn rhs_dimension_mismatch() {
        let sigma = DensityMatrix::<f64>::zeros(4);
        assert!(matches!(
            rhs(&sigma, 0.0, &detuned_chain()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn packed_kernel_matches_elementwise_rhs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for beta0 in [0.0, 0.65, 2.4] {
            let cfg = detuned_chain().with_beta0(beta0).unwrap().with_kappa(0.35).unwrap();
            let sys = ReducedSystem::new(&cfg, false);
            let layout = sys.layout().clone();
            for _ in 0..10 {
                let sigma = random_hermitian(7, &mut rng);
                let t = rng.random_range(0.0..30.0);
                let mut y = vec![0.0; layout.len()];
                layout.pack(&sigma, &mut y);
                let mut dy = vec![0.0; layout.len()];
                sys.rhs(t, &y, &mut dy);
                let packed = layout.unpack(&dy);
                let direct = rhs(&sigma, t, &cfg).unwrap();
                assert!(packed.max_abs_diff(&direct) < 1e-13);
                assert!((packed.efficiency_accum - direct.efficiency_accum).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn excited_block_kernel_is_bit_identical() {
        let cfg = detuned_chain().with_beta0(1.2).unwrap();
        let full = ReducedSystem::new(&cfg, false);
        let block = ReducedSystem::new(&cfg, true);
        let layout = full.layout().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut sigma = random_hermitian(7, &mut rng);
        for j in 0..7 {
            sigma.set(0, j, C::new(0.0, 0.0));
            sigma.set(j, 0, C::new(0.0, 0.0));
        }
        let mut y = vec![0.0; layout.len()];
        layout.pack(&sigma, &mut y);
        let (mut a, mut b) = (vec![1.0; layout.len()], vec![0.0; layout.len()]);
        full.rhs(0.4, &y, &mut a);
        block.rhs(0.4, &y, &mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn no_sink_conserves_trace() {
        let cfg = detuned_chain().with_kappa(0.0).unwrap().with_beta0(0.65).unwrap();
        let opts = IntegrationOptions {
            horizon: 50.0,
            samples: 200,
            ..Default::default()
        };
        let traj = integrate(&InitialState::SingleExcitation(1), &cfg, &opts).unwrap();
        for tr in &traj.trace {
            assert!((tr - 1.0).abs() < 1e-10);
        }
        assert_eq!(efficiency(&traj), 0.0);
    }

    #[test]
    fn ground_state_is_inert_and_block_closed() {
        let cfg = detuned_chain().with_beta0(1.1).unwrap();
        let opts = IntegrationOptions {
            horizon: 40.0,
            samples: 100,
            ..Default::default()
        };
        let traj = integrate(&InitialState::DonorSuperposition, &cfg, &opts).unwrap();
        let p00 = traj.populations[0][0];
        assert!((p00 - 0.5).abs() < 1e-15);
        for p in &traj.populations {
            assert_eq!(p[0], p00);
        }
        let traj = integrate(&InitialState::SingleExcitation(1), &cfg, &opts).unwrap();
        assert!(coherence_series(&traj).iter().all(|&x| x == 0.0));
        for j in 0..7 {
            assert_eq!(traj.final_state.get(0, j), C::new(0.0, 0.0));
        }
    }

    #[test]
    fn times_and_efficiency_monotone() {
        let cfg = detuned_chain().with_beta0(0.65).unwrap();
        let opts = IntegrationOptions {
            horizon: 30.0,
            samples: 301,
            ..Default::default()
        };
        let traj = integrate(&InitialState::SingleExcitation(1), &cfg, &opts).unwrap();
        assert_eq!(traj.times.len(), 301);
        assert_eq!(*traj.times.last().unwrap(), 30.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!(traj.efficiency.windows(2).all(|w| w[1] >= w[0]));
        assert!(traj.conservation_defect() < 1e-8);
        assert!(traj.psd_warnings.is_empty());
    }

    #[test]
    fn rejects_bad_options() {
        let cfg = detuned_chain();
        let init = InitialState::SingleExcitation(1);
        let mut opts = IntegrationOptions::<f64>::default();
        opts.horizon = 0.0;
        assert!(integrate(&init, &cfg, &opts).is_err());
        opts.horizon = 1.0;
        opts.samples = 1;
        assert!(integrate(&init, &cfg, &opts).is_err());
        opts.samples = 10;
        opts.tol.rel = 0.0;
        assert!(integrate(&init, &cfg, &opts).is_err());
    }

    #[test]
    fn single_precision_run() {
        let cfg = ChainParams::<f32>::new(
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.5, 0.5, 1.5, 0.5],
            0.1,
            0.2,
            1100.0,
            5.0,
        )
        .validate()
        .unwrap()
        .with_beta0(0.65)
        .unwrap();
        let opts = IntegrationOptions {
            horizon: 20.0f32,
            samples: 50,
            tol: Tolerances::new(1e-5, 1e-7).unwrap(),
        };
        let traj = integrate(&InitialState::SingleExcitation(1), &cfg, &opts).unwrap();
        assert!(traj.conservation_defect() < 1e-4);
        assert!(efficiency(&traj) >= 0.0);
    }
}
