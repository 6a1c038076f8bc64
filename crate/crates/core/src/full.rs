//! Validation oracles for the reduced dynamics.
//!
//! Two independent routes are provided:
//!
//! * [`superoperator_oracle_rhs`] rebuilds the reduced generator from qubit
//!   operators and matrix products, with no hand-derived index formulas.
//! * The displaced-frame master equation of chain plus resonator on a
//!   truncated Fock space ([`displaced_rhs`], [`integrate_full`]), before the
//!   resonator is eliminated. [`adiabatic_check`] and [`pure_dephasing_fit`]
//!   compare it with the reduced model.

use std::cell::RefCell;

use crate::chain::{chi, ChainConfig};
use crate::density::{DensityMatrix, HermitianLayout, InitialState};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::num::{c, mul_i, Real, C};
use crate::ode::{Dopri5, OdeSystem, StepStats};
use crate::reduced::{integrate, IntegrationOptions};

/// Mass of the thermal distribution with occupation `nbar` at or above level `n_fock`.
pub fn thermal_tail<T: Real>(nbar: T, n_fock: usize) -> T {
    if nbar <= T::zero() {
        return T::zero();
    }
    (nbar / (nbar + T::one())).powi(n_fock as i32)
}

/// Smallest truncation leaving a thermal tail below `1e-6`.
pub fn min_fock_for<T: Real>(nbar: T) -> usize {
    let limit = T::lit(1e-6);
    (1..).find(|&n| thermal_tail(nbar, n) < limit).unwrap()
}

/// Chain plus driven resonator, truncated to `n_fock` Fock levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FullModelConfig<T> {
    chain: ChainConfig<T>,
    epsilon: T,
    n_fock: usize,
}

impl<T: Real> FullModelConfig<T> {
    /// Drive amplitude chosen so that `2ε/γ` equals the chain's `β₀`.
    pub fn new(chain: ChainConfig<T>, n_fock: usize) -> Result<Self> {
        let epsilon = chain.beta0() * chain.gamma() / T::lit(2.0);
        Self::with_epsilon(chain, epsilon, n_fock)
    }

    pub fn with_epsilon(chain: ChainConfig<T>, epsilon: T, n_fock: usize) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon.is_finite()) {
            return Err(Error::Negative {
                field: "epsilon",
                value: epsilon.to_f64_lossy(),
            });
        }
        let implied = T::lit(2.0) * epsilon / chain.gamma();
        let scale = T::one().max(chain.beta0().abs());
        if (implied - chain.beta0()).abs() > T::lit(1e-12) * scale {
            return Err(Error::DriveMismatch {
                beta0: chain.beta0().to_f64_lossy(),
                implied: implied.to_f64_lossy(),
            });
        }
        if n_fock < 1 {
            return Err(Error::InvalidSetting("n_fock must be at least 1".into()));
        }
        let tail = thermal_tail(chain.nbar(), n_fock);
        if tail >= T::lit(1e-6) {
            return Err(Error::TruncationTail {
                n_fock,
                tail: tail.to_f64_lossy(),
            });
        }
        Ok(Self {
            chain,
            epsilon,
            n_fock,
        })
    }

    pub fn chain(&self) -> &ChainConfig<T> {
        &self.chain
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    /// Joint Hilbert-space dimension `(N+1)·n_fock`.
    pub fn joint_dim(&self) -> usize {
        self.chain.dim() * self.n_fock
    }

    /// `γ ≥ 10·max(λ, max_j |g_j| q₀)`.
    pub fn in_adiabatic_regime(&self) -> bool {
        let cfg = &self.chain;
        let gq = cfg
            .g()
            .iter()
            .fold(T::zero(), |m, g| m.max(g.abs() * cfg.q0()));
        cfg.gamma() >= T::lit(10.0) * cfg.lambda().max(gq)
    }
}

// ---------------------------------------------------------------------------
// Qubit-operator construction on the single-excitation space.

/// Single-excitation basis `|0⟩..|N⟩` as bitstrings over the sites.
struct ExcitationBasis {
    n_sites: usize,
    masks: Vec<u64>,
}

impl ExcitationBasis {
    fn new(n_sites: usize) -> Self {
        assert!(n_sites < 64, "bitmask basis supports at most 63 sites");
        let mut masks = vec![0u64];
        masks.extend((0..n_sites).map(|j| 1u64 << j));
        Self { n_sites, masks }
    }

    fn dim(&self) -> usize {
        self.masks.len()
    }

    fn index_of(&self, mask: u64) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }

    /// `σ_z` of site `j` (1-based).
    fn sigma_z<T: Real>(&self, j: usize) -> CMatrix<T> {
        let bit = 1u64 << (j - 1);
        let diag: Vec<C<T>> = self
            .masks
            .iter()
            .map(|m| {
                let z = if m & bit != 0 { T::one() } else { -T::one() };
                c(z, T::zero())
            })
            .collect();
        CMatrix::from_diag(&diag)
    }

    /// `σ_+^j σ_-^k` restricted to the basis.
    fn raise_lower<T: Real>(&self, j: usize, k: usize) -> CMatrix<T> {
        let (bj, bk) = (1u64 << (j - 1), 1u64 << (k - 1));
        let mut out = CMatrix::zeros(self.dim());
        for (col, &m) in self.masks.iter().enumerate() {
            if m & bk == 0 {
                continue;
            }
            let lowered = m & !bk;
            if lowered & bj != 0 {
                continue;
            }
            if let Some(row) = self.index_of(lowered | bj) {
                out[(row, col)] = c(T::one(), T::zero());
            }
        }
        out
    }

    /// Nearest-neighbour exchange `Σ_j (σ_+^j σ_-^{j+1} + σ_+^{j+1} σ_-^j)`.
    fn hopping<T: Real>(&self) -> CMatrix<T> {
        let mut h = CMatrix::zeros(self.dim());
        for j in 1..self.n_sites {
            h = &h + &self.raise_lower(j, j + 1);
            h = &h + &self.raise_lower(j + 1, j);
        }
        h
    }

    /// Projector on the excited state of site `j`.
    fn excited<T: Real>(&self, j: usize) -> CMatrix<T> {
        let half = c(T::lit(0.5), T::zero());
        (&CMatrix::identity(self.dim()) + &self.sigma_z(j)).scale(half)
    }
}

fn to_cmatrix<T: Real>(m: &DensityMatrix<T>) -> CMatrix<T> {
    CMatrix::from_fn(m.dim(), |i, j| m.get(i, j))
}

/// Reduced generator assembled as `−i(H_e σ − σ H_e†) + 4Γ D[Σ_z]σ` from
/// qubit operators, with the sink as the anti-Hermitian term `−iκ|e⟩_N⟨e|`.
pub fn superoperator_oracle_rhs<T: Real>(
    sigma: &DensityMatrix<T>,
    t: T,
    cfg: &ChainConfig<T>,
) -> Result<DensityMatrix<T>> {
    let n = cfg.n_sites();
    if sigma.dim() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: sigma.dim(),
        });
    }
    let basis = ExcitationBasis::new(n);
    let dim = basis.dim();
    let re = |x: T| c(x, T::zero());

    let mut h = basis.hopping::<T>().scale(re(cfg.lambda()));
    let mut sz_coll = CMatrix::zeros(dim);
    for j in 1..=n {
        let sz = basis.sigma_z::<T>(j);
        h = &h + &sz.scale(re(chi(j, t, cfg)?));
        sz_coll = &sz_coll + &sz.scale(re(cfg.g()[j - 1]));
    }
    let sink = basis.excited::<T>(n).scale(c(T::zero(), -cfg.kappa()));
    let h = &h + &sink;

    let s = to_cmatrix(sigma);
    let minus_i = c(T::zero(), -T::one());
    let coherent = (&(&h * &s) - &(&s * &h.adjoint())).scale(minus_i);
    let sz2 = &sz_coll * &sz_coll;
    let half = re(T::lit(0.5));
    let dissipator = &(&(&sz_coll * &s) * &sz_coll) - &(&(&sz2 * &s) + &(&s * &sz2)).scale(half);
    let total = &coherent + &dissipator.scale(re(T::lit(4.0) * cfg.dephasing()));

    let mut out = DensityMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out.set(i, j, total[(i, j)]);
        }
    }
    let emitted = (&basis.excited::<T>(n) * &s).trace().re;
    out.efficiency_accum = T::lit(2.0) * cfg.kappa() * emitted;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Displaced-frame joint dynamics.

/// Generator of the joint chain–resonator state in the frame rotating at the
/// resonator frequency and displaced by the coherent steady state.
pub(crate) struct FullSystem<T> {
    e_dim: usize,
    b_dim: usize,
    n: usize,
    layout: HermitianLayout,
    omega_half: Vec<T>,
    g: Vec<T>,
    /// `Σ_z` eigenvalue of each electronic basis state.
    sz: Vec<T>,
    /// `σ_z^j` eigenvalue of basis state `e`, row-major `[e][j]`.
    z: Vec<T>,
    lambda: T,
    kappa: T,
    nu: T,
    q0: T,
    beta0: T,
    down: T,
    up: T,
    sqrt_n: Vec<T>,
    /// Diagonal of the truncated `a a†`.
    aad: Vec<T>,
    scratch: RefCell<[Vec<C<T>>; 3]>,
}

impl<T: Real> FullSystem<T> {
    pub fn new(cfg: &FullModelConfig<T>) -> Self {
        let chain = &cfg.chain;
        let n = chain.n_sites();
        let e_dim = n + 1;
        let b_dim = cfg.n_fock;
        let basis = ExcitationBasis::new(n);
        let mut z = vec![T::zero(); e_dim * n];
        for (e, m) in basis.masks.iter().enumerate() {
            for j in 0..n {
                z[e * n + j] = if m & (1 << j) != 0 { T::one() } else { -T::one() };
            }
        }
        let sz = (0..e_dim)
            .map(|e| (0..n).map(|j| chain.g()[j] * z[e * n + j]).sum())
            .collect();
        let d = e_dim * b_dim;
        let zero = c(T::zero(), T::zero());
        Self {
            e_dim,
            b_dim,
            n,
            layout: HermitianLayout::new(d),
            omega_half: chain.omega().iter().map(|w| *w * T::lit(0.5)).collect(),
            g: chain.g().to_vec(),
            sz,
            z,
            lambda: chain.lambda(),
            kappa: chain.kappa(),
            nu: chain.nu(),
            q0: chain.q0(),
            beta0: chain.beta0(),
            down: chain.gamma() * (chain.nbar() + T::one()),
            up: chain.gamma() * chain.nbar(),
            sqrt_n: (0..=b_dim).map(|m| T::from_usize_lossy(m).sqrt()).collect(),
            aad: (0..b_dim)
                .map(|m| {
                    if m + 1 < b_dim {
                        T::from_usize_lossy(m + 1)
                    } else {
                        T::zero()
                    }
                })
                .collect(),
            scratch: RefCell::new([vec![zero; d * d], vec![zero; d * d], vec![zero; d * d]]),
        }
    }

    /// Turns off hopping and sink, leaving pure collective dephasing.
    pub fn pure_dephasing(mut self) -> Self {
        self.lambda = T::zero();
        self.kappa = T::zero();
        self
    }

    pub fn joint_dim(&self) -> usize {
        self.e_dim * self.b_dim
    }

    fn electronic_energies(&self, t: T) -> Vec<T> {
        let shift = T::lit(2.0) * self.q0 * self.beta0 * (self.nu * t).sin();
        (0..self.e_dim)
            .map(|e| {
                (0..self.n)
                    .map(|j| (self.omega_half[j] - shift * self.g[j]) * self.z[e * self.n + j])
                    .sum()
            })
            .collect()
    }

    /// `M = Kρ` with `K = H(t) + q₀ X(t) Σ_z − iκ P_N`, written into `m`.
    fn apply_k(&self, t: T, rho: &[C<T>], m: &mut [C<T>]) {
        let (ed, bd) = (self.e_dim, self.b_dim);
        let d = ed * bd;
        let energies = self.electronic_energies(t);
        let (sn, cs) = (self.nu * t).sin_cos();
        let phase = c(cs, sn);
        for e in 0..ed {
            let lower = if e >= 2 { Some(e - 1) } else { None };
            let upper = if e >= 1 && e < self.n { Some(e + 1) } else { None };
            let sink = if e == self.n { self.kappa } else { T::zero() };
            let diag = c(energies[e], -sink);
            let coup = self.q0 * self.sz[e];
            for mb in 0..bd {
                let r = e * bd + mb;
                let row = &mut m[r * d..(r + 1) * d];
                let src = &rho[r * d..(r + 1) * d];
                for (o, s) in row.iter_mut().zip(src) {
                    *o = *s * diag;
                }
                for nb in [lower, upper].into_iter().flatten() {
                    let src = &rho[(nb * bd + mb) * d..(nb * bd + mb + 1) * d];
                    for (o, s) in row.iter_mut().zip(src) {
                        *o = *o + *s * self.lambda;
                    }
                }
                if coup != T::zero() {
                    if mb >= 1 {
                        let f = phase * (coup * self.sqrt_n[mb]);
                        let src = &rho[(r - 1) * d..r * d];
                        for (o, s) in row.iter_mut().zip(src) {
                            *o = *o + *s * f;
                        }
                    }
                    if mb + 1 < bd {
                        let f = phase.conj() * (coup * self.sqrt_n[mb + 1]);
                        let src = &rho[(r + 1) * d..(r + 2) * d];
                        for (o, s) in row.iter_mut().zip(src) {
                            *o = *o + *s * f;
                        }
                    }
                }
            }
        }
    }

    /// Full derivative of a joint density matrix stored densely.
    fn derivative(&self, t: T, rho: &[C<T>], m: &mut [C<T>], out: &mut [C<T>]) {
        let bd = self.b_dim;
        let d = self.joint_dim();
        self.apply_k(t, rho, m);
        let half = T::lit(0.5);
        for r in 0..d {
            let mr = r % bd;
            for s in r..d {
                let ms = s % bd;
                // −i(M − M†)
                let mut v = mul_i(m[s * d + r].conj() - m[r * d + s]);
                let decay = self.down * half * T::from_usize_lossy(mr + ms)
                    + self.up * half * (self.aad[mr] + self.aad[ms]);
                v = v - rho[r * d + s] * decay;
                if mr + 1 < bd && ms + 1 < bd {
                    let w = self.down * self.sqrt_n[mr + 1] * self.sqrt_n[ms + 1];
                    v = v + rho[(r + 1) * d + s + 1] * w;
                }
                if mr >= 1 && ms >= 1 {
                    let w = self.up * self.sqrt_n[mr] * self.sqrt_n[ms];
                    v = v + rho[(r - 1) * d + s - 1] * w;
                }
                out[r * d + s] = v;
                out[s * d + r] = v.conj();
            }
        }
    }

    fn emission(&self, rho: &[C<T>]) -> T {
        let d = self.joint_dim();
        let base = self.n * self.b_dim;
        let pop: T = (0..self.b_dim)
            .map(|mb| rho[(base + mb) * d + base + mb].re)
            .sum();
        T::lit(2.0) * self.kappa * pop
    }
}

impl<T: Real> OdeSystem<T> for FullSystem<T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn rhs(&self, t: T, y: &[T], dy: &mut [T]) {
        let d = self.joint_dim();
        let mut scratch = self.scratch.borrow_mut();
        let [rho, m, out] = &mut *scratch;
        for r in 0..d {
            for s in 0..d {
                rho[r * d + s] = self.layout.get(y, r, s);
            }
        }
        self.derivative(t, rho, m, out);
        for r in 0..d {
            dy[r] = out[r * d + r].re;
            for s in (r + 1)..d {
                let p = self.layout.upper(r, s);
                dy[p] = out[r * d + s].re;
                dy[p + 1] = out[r * d + s].im;
            }
        }
        dy[self.layout.accum_index()] = self.emission(rho);
    }
}

/// Derivative of the joint displaced-frame state (dimension `(N+1)·n_fock`,
/// electronic index major). The accumulator slot holds the sink emission rate.
pub fn displaced_rhs<T: Real>(
    rho: &DensityMatrix<T>,
    t: T,
    cfg: &FullModelConfig<T>,
) -> Result<DensityMatrix<T>> {
    let sys = FullSystem::new(cfg);
    let d = sys.joint_dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.dim(),
        });
    }
    let mut m = vec![c(T::zero(), T::zero()); d * d];
    let mut out = vec![c(T::zero(), T::zero()); d * d];
    sys.derivative(t, rho.elems(), &mut m, &mut out);
    let mut res = DensityMatrix::from_elems(d, out);
    res.efficiency_accum = sys.emission(rho.elems());
    Ok(res)
}

/// Thermal resonator state truncated to `n_fock` levels and renormalized.
pub fn thermal_boson<T: Real>(nbar: T, n_fock: usize) -> Vec<T> {
    let mut p: Vec<T> = if nbar <= T::zero() {
        let mut v = vec![T::zero(); n_fock];
        v[0] = T::one();
        v
    } else {
        let r = nbar / (nbar + T::one());
        (0..n_fock)
            .map(|m| r.powi(m as i32) / (nbar + T::one()))
            .collect()
    };
    let total: T = p.iter().copied().sum();
    for x in &mut p {
        *x = *x / total;
    }
    p
}

/// `σ ⊗ ρ_b` for a resonator state given as a dense matrix.
pub fn product_state<T: Real>(sigma: &DensityMatrix<T>, boson: &CMatrix<T>) -> DensityMatrix<T> {
    let el = to_cmatrix(sigma);
    let joint = el.kron(boson);
    let d = joint.dim();
    DensityMatrix::from_elems(d, (0..d * d).map(|k| joint[(k / d, k % d)]).collect())
}

/// Partial trace over the resonator.
pub fn electronic_state<T: Real>(rho: &DensityMatrix<T>, e_dim: usize) -> DensityMatrix<T> {
    let bd = rho.dim() / e_dim;
    let mut out = DensityMatrix::zeros(e_dim);
    for e in 0..e_dim {
        for f in 0..e_dim {
            let mut acc = c(T::zero(), T::zero());
            for m in 0..bd {
                acc = acc + rho.get(e * bd + m, f * bd + m);
            }
            out.set(e, f, acc);
        }
    }
    out.efficiency_accum = rho.efficiency_accum;
    out
}

/// `(⟨a†a⟩, ⟨a⟩)` of a joint state in the displaced frame.
pub fn boson_moments<T: Real>(rho: &DensityMatrix<T>, e_dim: usize) -> (T, C<T>) {
    let bd = rho.dim() / e_dim;
    let mut number = T::zero();
    let mut amp = c(T::zero(), T::zero());
    for e in 0..e_dim {
        for m in 0..bd {
            let r = e * bd + m;
            number = number + T::from_usize_lossy(m) * rho.get(r, r).re;
            if m + 1 < bd {
                amp = amp + rho.get(r + 1, r) * T::from_usize_lossy(m + 1).sqrt();
            }
        }
    }
    (number, amp)
}

/// Samples of a joint integration, reduced to the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTrajectory<T> {
    pub times: Vec<T>,
    pub electronic: Vec<DensityMatrix<T>>,
    pub boson_number: Vec<T>,
    pub boson_amplitude: Vec<C<T>>,
    pub trace: Vec<T>,
    pub final_state: DensityMatrix<T>,
    pub stats: StepStats,
}

fn run_full<T: Real>(
    sys: &FullSystem<T>,
    init: &DensityMatrix<T>,
    opts: &IntegrationOptions<T>,
) -> Result<FullTrajectory<T>> {
    opts.validate()?;
    let d = sys.joint_dim();
    if init.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: init.dim(),
        });
    }
    let layout = sys.layout.clone();
    let mut y = vec![T::zero(); layout.len()];
    layout.pack(init, &mut y);
    let mut traj = FullTrajectory {
        times: Vec::with_capacity(opts.samples),
        electronic: Vec::with_capacity(opts.samples),
        boson_number: Vec::with_capacity(opts.samples),
        boson_amplitude: Vec::with_capacity(opts.samples),
        trace: Vec::with_capacity(opts.samples),
        final_state: init.clone(),
        stats: StepStats::default(),
    };
    let e_dim = sys.e_dim;
    let record = |traj: &mut FullTrajectory<T>, t: T, y: &[T]| {
        let rho = layout.unpack(y);
        let (nb, amp) = boson_moments(&rho, e_dim);
        traj.times.push(t);
        traj.trace.push(rho.trace());
        traj.electronic.push(electronic_state(&rho, e_dim));
        traj.boson_number.push(nb);
        traj.boson_amplitude.push(amp);
    };
    let mut stepper = Dopri5::new(layout.len(), opts.tol);
    let mut t = T::zero();
    record(&mut traj, t, &y);
    for k in 1..opts.samples {
        stepper.advance(sys, &mut t, &mut y, opts.sample_time(k))?;
        record(&mut traj, t, &y);
    }
    traj.final_state = layout.unpack(&y);
    traj.stats = stepper.stats();
    Ok(traj)
}

/// Integrates the displaced-frame master equation from a joint initial state.
pub fn integrate_full<T: Real>(
    init: &DensityMatrix<T>,
    cfg: &FullModelConfig<T>,
    opts: &IntegrationOptions<T>,
) -> Result<FullTrajectory<T>> {
    run_full(&FullSystem::new(cfg), init, opts)
}

fn thermal_product<T: Real>(
    sigma: &DensityMatrix<T>,
    cfg: &FullModelConfig<T>,
) -> DensityMatrix<T> {
    let probs = thermal_boson(cfg.chain.nbar(), cfg.n_fock);
    let diag: Vec<C<T>> = probs.into_iter().map(|p| c(p, T::zero())).collect();
    product_state(sigma, &CMatrix::from_diag(&diag))
}

/// Agreement between the joint model traced over the resonator and the
/// reduced dynamics on a common sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticReport<T> {
    /// RMS over samples and sites `1..=N` of the population difference.
    pub rms_population_deviation: T,
    /// Largest difference of `|σ_0N|`.
    pub max_coherence_deviation: T,
    pub in_regime: bool,
    pub warning: Option<String>,
    pub full_stats: StepStats,
}

/// Compares full and reduced dynamics; the resonator starts thermal.
pub fn adiabatic_check<T: Real>(
    cfg: &FullModelConfig<T>,
    init: &InitialState<T>,
    opts: &IntegrationOptions<T>,
) -> Result<AdiabaticReport<T>> {
    let in_regime = cfg.in_adiabatic_regime();
    let warning = (!in_regime).then(|| {
        format!(
            "gamma = {} below 10*max(lambda, g*q0); elimination may be inaccurate",
            cfg.chain.gamma()
        )
    });
    let sigma0 = init.density(cfg.chain.n_sites())?;
    let full = integrate_full(&thermal_product(&sigma0, cfg), cfg, opts)?;
    let reduced = integrate(init, &cfg.chain, opts)?;
    let n = cfg.chain.n_sites();

    let mut sq = T::zero();
    let mut count = 0usize;
    let mut coh = T::zero();
    for (k, el) in full.electronic.iter().enumerate() {
        for j in 1..=n {
            let d = el.population(j) - reduced.populations[k][j];
            sq = sq + d * d;
            count += 1;
        }
        coh = coh.max((el.get(0, n).norm() - reduced.coherence_0n[k].norm()).abs());
    }
    Ok(AdiabaticReport {
        rms_population_deviation: (sq / T::from_usize_lossy(count)).sqrt(),
        max_coherence_deviation: coh,
        in_regime,
        warning,
        full_stats: full.stats,
    })
}

/// Decay rate of a two-site coherence under pure dephasing in the joint
/// model, against the reduced prediction `8Γ(g_i − g_j)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingFit<T> {
    pub measured: T,
    pub predicted: T,
}

impl<T: Real> DephasingFit<T> {
    pub fn relative_error(&self) -> T {
        ((self.measured - self.predicted) / self.predicted).abs()
    }
}

/// Prepares `(|i⟩ + |j⟩)/√2` with the resonator thermal, switches hopping and
/// sink off, and fits `ln|σ_ij|` against time over the last three quarters of
/// the run.
pub fn pure_dephasing_fit<T: Real>(
    cfg: &FullModelConfig<T>,
    sites: (usize, usize),
    opts: &IntegrationOptions<T>,
) -> Result<DephasingFit<T>> {
    let n = cfg.chain.n_sites();
    let (i, j) = sites;
    for s in [i, j] {
        if s == 0 || s > n {
            return Err(Error::SiteOutOfRange {
                index: s,
                n_sites: n,
            });
        }
    }
    if i == j {
        return Err(Error::InvalidSetting("need two distinct sites".into()));
    }
    let mut psi = vec![c(T::zero(), T::zero()); n + 1];
    psi[i] = c(T::FRAC_1_SQRT_2(), T::zero());
    psi[j] = psi[i];
    let sigma0 = DensityMatrix::pure(&psi);
    let sys = FullSystem::new(cfg).pure_dephasing();
    let traj = run_full(&sys, &thermal_product(&sigma0, cfg), opts)?;

    let start = traj.times.len() / 4;
    let pts: Vec<(T, T)> = traj.times[start..]
        .iter()
        .zip(&traj.electronic[start..])
        .map(|(t, el)| (*t, el.get(i, j).norm().ln()))
        .collect();
    let np = T::from_usize_lossy(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / np;
    let ml = pts.iter().map(|p| p.1).sum::<T>() / np;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (t, l) in &pts {
        sxy = sxy + (*t - mt) * (*l - ml);
        sxx = sxx + (*t - mt) * (*t - mt);
    }
    let dg = cfg.chain.g()[i - 1] - cfg.chain.g()[j - 1];
    Ok(DephasingFit {
        measured: -sxy / sxx,
        predicted: T::lit(8.0) * cfg.chain.dephasing() * dg * dg,
    })
}
