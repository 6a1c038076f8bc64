//! Density matrices over the single-excitation basis `{|0⟩, |1⟩, …, |N⟩}`.

use crate::error::{Error, Result};
use crate::num::{c, Real, C};

/// Conditional (sub-normalized) density matrix plus the sink efficiency
/// accumulated so far.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    dim: usize,
    elems: Vec<C<T>>,
    pub efficiency_accum: T,
}

impl<T: Real> DensityMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            elems: vec![C::new(T::zero(), T::zero()); dim * dim],
            efficiency_accum: T::zero(),
        }
    }

    /// Row-major elements; panics if `elems.len() != dim²`.
    pub fn from_elems(dim: usize, elems: Vec<C<T>>) -> Self {
        assert_eq!(elems.len(), dim * dim, "element count must be dim^2");
        Self {
            dim,
            elems,
            efficiency_accum: T::zero(),
        }
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &[C<T>]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.elems[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    /// `|j⟩⟨j|` in a space of dimension `dim`.
    pub fn basis_projector(dim: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.elems[j * dim + j] = c(T::one(), T::zero());
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elems(&self) -> &[C<T>] {
        &self.elems
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.elems[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.elems[i * self.dim + j] = v;
    }

    pub fn population(&self, j: usize) -> T {
        self.get(j, j).re
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.elems[i * self.dim + i].re).sum()
    }

    /// Largest `|σ_ij − conj(σ_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Replaces `σ` by `(σ + σ†)/2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.dim {
            let d = self.get(i, i);
            self.set(i, i, c(d.re, T::zero()));
            for j in (i + 1)..self.dim {
                let avg = (self.get(i, j) + self.get(j, i).conj()) * half;
                self.set(i, j, avg);
                self.set(j, i, avg.conj());
            }
        }
    }

    /// Whether the smallest eigenvalue is at least `-tol`: Cholesky of `σ + tol·I`
    /// succeeds exactly when `σ + tol·I` is positive definite.
    pub fn is_psd_within(&self, tol: T) -> bool {
        let n = self.dim;
        let mut l = vec![c(T::zero(), T::zero()); n * n];
        for k in 0..n {
            let mut d = self.get(k, k).re + tol;
            for p in 0..k {
                d = d - l[k * n + p].norm_sqr();
            }
            if !(d > T::zero()) {
                return false;
            }
            let lkk = d.sqrt();
            l[k * n + k] = c(lkk, T::zero());
            for i in (k + 1)..n {
                let mut s = self.get(i, k);
                for p in 0..k {
                    s = s - l[i * n + p] * l[k * n + p].conj();
                }
                l[i * n + k] = s / lkk;
            }
        }
        true
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Starting configurations for a transport run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState<T> {
    /// Excitation localized on site `j` (1-based).
    SingleExcitation(usize),
    /// `(|0⟩ + |1⟩)/√2`: the donor in an equal superposition of ground and excited.
    DonorSuperposition,
    Custom(DensityMatrix<T>),
}

impl<T: Real> InitialState<T> {
    /// Builds the density matrix for a chain of `n_sites` sites, validating it.
    pub fn density(&self, n_sites: usize) -> Result<DensityMatrix<T>> {
        let dim = n_sites + 1;
        match self {
            InitialState::SingleExcitation(j) => {
                if *j == 0 || *j > n_sites {
                    return Err(Error::SiteOutOfRange {
                        index: *j,
                        n_sites,
                    });
                }
                Ok(DensityMatrix::basis_projector(dim, *j))
            }
            InitialState::DonorSuperposition => {
                let a = c(T::FRAC_1_SQRT_2(), T::zero());
                let mut psi = vec![c(T::zero(), T::zero()); dim];
                psi[0] = a;
                psi[1] = a;
                Ok(DensityMatrix::pure(&psi))
            }
            InitialState::Custom(m) => {
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: m.dim(),
                    });
                }
                let tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0));
                if m.hermiticity_defect() > tol {
                    return Err(Error::InvalidState("not Hermitian".into()));
                }
                if !m.is_psd_within(tol) {
                    return Err(Error::InvalidState("not positive semidefinite".into()));
                }
                if m.trace() > T::one() + tol {
                    return Err(Error::InvalidState(format!("trace {} exceeds 1", m.trace())));
                }
                let mut out = m.clone();
                out.efficiency_accum = T::zero();
                Ok(out)
            }
        }
    }
}

/// Packing of the Hermitian part of a density matrix into a real vector:
/// `dim` diagonal reals, then `(re, im)` of each strictly-upper element in
/// row-major order, then the efficiency accumulator.
#[derive(Debug, Clone)]
pub(crate) struct HermitianLayout {
    pub dim: usize,
    upper: Vec<usize>,
}

impl HermitianLayout {
    pub fn new(dim: usize) -> Self {
        let mut upper = vec![usize::MAX; dim * dim];
        let mut pos = dim;
        for i in 0..dim {
            for j in (i + 1)..dim {
                upper[i * dim + j] = pos;
                pos += 2;
            }
        }
        Self { dim, upper }
    }

    /// Number of reals in the packed state, accumulator included.
    pub fn len(&self) -> usize {
        self.dim * self.dim + 1
    }

    pub fn accum_index(&self) -> usize {
        self.dim * self.dim
    }

    /// Position of `(re, im)` for `i < j`.
    #[inline]
    pub fn upper(&self, i: usize, j: usize) -> usize {
        self.upper[i * self.dim + j]
    }

    #[inline]
    pub fn get<T: Real>(&self, y: &[T], i: usize, j: usize) -> C<T> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => c(y[i], T::zero()),
            Less => {
                let p = self.upper(i, j);
                c(y[p], y[p + 1])
            }
            Greater => {
                let p = self.upper(j, i);
                c(y[p], -y[p + 1])
            }
        }
    }

    pub fn pack<T: Real>(&self, m: &DensityMatrix<T>, y: &mut [T]) {
        let half = T::lit(0.5);
        for i in 0..self.dim {
            y[i] = m.get(i, i).re;
            for j in (i + 1)..self.dim {
                let v = (m.get(i, j) + m.get(j, i).conj()) * half;
                let p = self.upper(i, j);
                y[p] = v.re;
                y[p + 1] = v.im;
            }
        }
        y[self.accum_index()] = m.efficiency_accum;
    }

    pub fn unpack<T: Real>(&self, y: &[T]) -> DensityMatrix<T> {
        let mut m = DensityMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.get(y, i, j));
            }
        }
        m.efficiency_accum = y[self.accum_index()];
        m
    }
}
