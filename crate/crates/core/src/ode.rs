//! Adaptive Dormand–Prince 5(4) stepper for real state vectors.
//!
//! The stepper is stateful: the accepted step size and the first-same-as-last
//! stage carry over between successive [`Dopri5::advance`] calls, so a caller
//! can integrate through a sampling grid without restarting the controller.

use crate::error::{Error, Result};
use crate::num::Real;

/// Right-hand side `dy/dt = f(t, y)` of a first-order system.
pub trait OdeSystem<T> {
    fn dim(&self) -> usize;
    fn rhs(&self, t: T, y: &[T], dy: &mut [T]);
}

/// Mixed error tolerance `abs + rel·|y|` per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub rel: T,
    pub abs: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            rel: T::lit(1e-8),
            abs: T::lit(1e-10),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn new(rel: T, abs: T) -> Result<Self> {
        if !(rel > T::zero() && abs > T::zero() && rel.is_finite() && abs.is_finite()) {
            return Err(Error::InvalidSetting(format!(
                "tolerances must be positive and finite (rel = {rel}, abs = {abs})"
            )));
        }
        Ok(Self { rel, abs })
    }

    /// Both tolerances scaled by `factor`.
    pub fn scaled(self, factor: T) -> Self {
        Self {
            rel: self.rel * factor,
            abs: self.abs * factor,
        }
    }
}

/// Counters reported after an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand & Prince (1980) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Tableau<T> {
    c: [T; 4],
    a2: T,
    a3: [T; 2],
    a4: [T; 3],
    a5: [T; 4],
    a6: [T; 5],
    a7: [T; 5],
    e: [T; 6],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let l = T::lit;
        Self {
            c: [l(C2), l(C3), l(C4), l(C5)],
            a2: l(A21),
            a3: [l(A31), l(A32)],
            a4: [l(A41), l(A42), l(A43)],
            a5: [l(A51), l(A52), l(A53), l(A54)],
            a6: [l(A61), l(A62), l(A63), l(A64), l(A65)],
            a7: [l(A71), l(A73), l(A74), l(A75), l(A76)],
            e: [l(E1), l(E3), l(E4), l(E5), l(E6), l(E7)],
        }
    }
}

/// Dormand–Prince 5(4) with a PI step-size controller.
pub struct Dopri5<T> {
    tol: Tolerances<T>,
    pub max_steps: usize,
    h: Option<T>,
    k: [Vec<T>; 7],
    y_stage: Vec<T>,
    y_new: Vec<T>,
    fsal_valid: bool,
    err_old: T,
    stats: StepStats,
    tab: Tableau<T>,
}

impl<T: Real> Dopri5<T> {
    pub fn new(dim: usize, tol: Tolerances<T>) -> Self {
        let z = || vec![T::zero(); dim];
        Self {
            tol,
            max_steps: 50_000_000,
            h: None,
            k: [z(), z(), z(), z(), z(), z(), z()],
            y_stage: z(),
            y_new: z(),
            fsal_valid: false,
            err_old: T::lit(1e-4),
            stats: StepStats::default(),
            tab: Tableau::new(),
        }
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Drops the cached derivative; call after modifying the state between
    /// [`advance`](Self::advance) calls.
    pub fn invalidate(&mut self) {
        self.fsal_valid = false;
    }

    fn eval<S: OdeSystem<T>>(&mut self, sys: &S, t: T, idx: usize) {
        let (k, y) = (&mut self.k[idx], &self.y_stage);
        sys.rhs(t, y, k);
        self.stats.evaluations += 1;
    }

    fn initial_step<S: OdeSystem<T>>(&mut self, sys: &S, t: T, y: &[T], span: T) -> T {
        // Hairer, Nørsett & Wanner, II.4 starting step heuristic.
        let n = T::from_usize_lossy(y.len().max(1));
        let tol = self.tol;
        let sc = move |yi: T| tol.abs + tol.rel * yi.abs();
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for (yi, fi) in y.iter().zip(&self.k[0]) {
            let s = sc(*yi);
            d0 = d0 + (*yi / s) * (*yi / s);
            d1 = d1 + (*fi / s) * (*fi / s);
        }
        d0 = (d0 / n).sqrt();
        d1 = (d1 / n).sqrt();
        let small = T::lit(1e-5);
        let mut h0 = if d0 < small || d1 < small {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        h0 = h0.min(span);
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + h0 * self.k[0][i];
        }
        self.eval(sys, t + h0, 1);
        let mut d2 = T::zero();
        for i in 0..y.len() {
            let s = sc(y[i]);
            let d = (self.k[1][i] - self.k[0][i]) / s;
            d2 = d2 + d * d;
        }
        d2 = (d2 / n).sqrt() / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= T::lit(1e-15) {
            (T::lit(1e-6)).max(h0 * T::lit(1e-3))
        } else {
            (T::lit(0.01) / dmax).powf(T::lit(0.2))
        };
        (T::lit(100.0) * h0).min(h1).min(span)
    }

    /// Integrates `y` from `*t` to exactly `t_end`.
    pub fn advance<S: OdeSystem<T>>(
        &mut self,
        sys: &S,
        t: &mut T,
        y: &mut [T],
        t_end: T,
    ) -> Result<()> {
        let n = y.len();
        if n != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                found: n,
            });
        }
        if t_end <= *t {
            return Ok(());
        }
        if !self.fsal_valid {
            self.y_stage.copy_from_slice(y);
            self.eval(sys, *t, 0);
            self.fsal_valid = true;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => {
                let span = t_end - *t;
                self.initial_step(sys, *t, y, span)
            }
        };
        let safety = T::lit(0.9);
        let fac_min = T::lit(0.2);
        let fac_max = T::lit(10.0);
        let alpha = T::lit(0.17);
        let beta = T::lit(0.04);
        let nf = T::from_usize_lossy(n);
        let eps = T::epsilon();
        let mut steps = 0usize;
        let mut last_rejected = false;

        while *t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::TooManySteps { t: t.to_f64_lossy() });
            }
            if h.abs() <= T::lit(16.0) * eps * t.abs().max(T::one()) {
                return Err(Error::StepUnderflow { t: t.to_f64_lossy() });
            }
            let remaining = t_end - *t;
            // Land exactly on t_end; stretch by up to 1% instead of leaving a sliver.
            let hit_end = h >= remaining * T::lit(0.99);
            let h_step = if hit_end { remaining } else { h };
            self.stage_all(sys, *t, y, h_step);

            let mut err = T::zero();
            for i in 0..n {
                let e = h_step
                    * (self.tab.e[0] * self.k[0][i]
                        + self.tab.e[1] * self.k[2][i]
                        + self.tab.e[2] * self.k[3][i]
                        + self.tab.e[3] * self.k[4][i]
                        + self.tab.e[4] * self.k[5][i]
                        + self.tab.e[5] * self.k[6][i]);
                let s = self.tol.abs + self.tol.rel * y[i].abs().max(self.y_new[i].abs());
                let r = e / s;
                err = err + r * r;
            }
            err = (err / nf).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                h = h * fac_min;
                last_rejected = true;
                continue;
            }

            if err <= T::one() {
                let err_c = err.max(T::lit(1e-10));
                let mut fac = safety * err_c.powf(-alpha) * self.err_old.powf(beta);
                fac = fac.max(fac_min).min(fac_max);
                if last_rejected {
                    fac = fac.min(T::one());
                }
                self.err_old = err_c;
                *t = if hit_end { t_end } else { *t + h_step };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                last_rejected = false;
                // A step shortened to land on t_end says little about the next one.
                if !(hit_end && h_step < h) {
                    h = h_step * fac;
                }
            } else {
                self.stats.rejected += 1;
                let fac = (safety * err.powf(-T::lit(0.2))).max(fac_min);
                h = h_step * fac;
                last_rejected = true;
            }
        }
        self.h = Some(h);
        Ok(())
    }

    fn stage_all<S: OdeSystem<T>>(&mut self, sys: &S, t: T, y: &[T], h: T) {
        let n = y.len();
        let tab = &self.tab;
        let (a2, a3, a4, a5, a6, a7, c) = (tab.a2, tab.a3, tab.a4, tab.a5, tab.a6, tab.a7, tab.c);

        for i in 0..n {
            self.y_stage[i] = y[i] + h * a2 * self.k[0][i];
        }
        self.eval(sys, t + c[0] * h, 1);
        for i in 0..n {
            self.y_stage[i] = y[i] + h * (a3[0] * self.k[0][i] + a3[1] * self.k[1][i]);
        }
        self.eval(sys, t + c[1] * h, 2);
        for i in 0..n {
            self.y_stage[i] =
                y[i] + h * (a4[0] * self.k[0][i] + a4[1] * self.k[1][i] + a4[2] * self.k[2][i]);
        }
        self.eval(sys, t + c[2] * h, 3);
        for i in 0..n {
            self.y_stage[i] = y[i]
                + h * (a5[0] * self.k[0][i]
                    + a5[1] * self.k[1][i]
                    + a5[2] * self.k[2][i]
                    + a5[3] * self.k[3][i]);
        }
        self.eval(sys, t + c[3] * h, 4);
        for i in 0..n {
            self.y_stage[i] = y[i]
                + h * (a6[0] * self.k[0][i]
                    + a6[1] * self.k[1][i]
                    + a6[2] * self.k[2][i]
                    + a6[3] * self.k[3][i]
                    + a6[4] * self.k[4][i]);
        }
        self.eval(sys, t + h, 5);
        for i in 0..n {
            self.y_new[i] = y[i]
                + h * (a7[0] * self.k[0][i]
                    + a7[1] * self.k[2][i]
                    + a7[2] * self.k[3][i]
                    + a7[3] * self.k[4][i]
                    + a7[4] * self.k[5][i]);
        }
        self.y_stage.copy_from_slice(&self.y_new);
        self.eval(sys, t + h, 6);
    }
}
