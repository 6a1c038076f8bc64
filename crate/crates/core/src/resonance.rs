//! Sideband resonances of the driven chain.
//!
//! Modulating site `j` by `−4 g_j q₀ β₀ sin νt` dresses each bond with
//! sidebands weighted by `J_n(4 Δg_j β₀ q₀ / ν)`. A bond whose detuning
//! `Δω_j = ω_j − ω_{j+1}` sits on a multiple `nν` of the drive frequency
//! hops resonantly through the `n`-th sideband, and that channel closes at
//! drive strengths mapping onto zeros of `J_n`.

use crate::bessel::{bessel_j, bessel_zero};
use crate::chain::ChainConfig;
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceOptions<T> {
    /// Largest `|n|` tested against the detuning.
    pub max_order: u32,
    /// Number of Bessel zeros turned into suppression points.
    pub n_zeros: usize,
    /// Detuning tolerance; `None` means `1e-6·ν`.
    pub tol: Option<T>,
    /// `|J_n|` floor delimiting the heuristic enhancement windows.
    pub enhancement_floor: T,
}

impl<T: Real> Default for ResonanceOptions<T> {
    fn default() -> Self {
        Self {
            max_order: 3,
            n_zeros: 2,
            tol: None,
            enhancement_floor: T::lit(0.1),
        }
    }
}

/// Analysis of one bond `(j, j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondResonance<T> {
    /// Left site label `j`.
    pub bond: usize,
    pub delta_omega: T,
    pub delta_g: T,
    /// Integer `n` with `|Δω_j − nν| ≤ tol`.
    pub order: Option<i64>,
    /// Drive strengths `β₀` at which the resonant weight vanishes, increasing.
    pub suppression_beta0: Vec<T>,
    /// Heuristic: `β₀` intervals between suppression points where the
    /// resonant weight exceeds the floor.
    pub enhancement_windows: Vec<(T, T)>,
}

impl<T: Real> BondResonance<T> {
    /// A resonant bond with coupling contrast, i.e. one whose sideband
    /// weight actually depends on `β₀`.
    pub fn is_modulated_resonance(&self) -> bool {
        self.order.is_some() && self.delta_g != T::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport<T> {
    pub bonds: Vec<BondResonance<T>>,
    pub nu: T,
    pub q0: T,
}

impl<T: Real> ResonanceReport<T> {
    /// Bonds with a modulated sideband resonance.
    pub fn resonances(&self) -> impl Iterator<Item = &BondResonance<T>> {
        self.bonds.iter().filter(|b| b.is_modulated_resonance())
    }

    pub fn is_empty(&self) -> bool {
        self.resonances().next().is_none()
    }

    /// `x_j(β₀) = 4 Δg_j β₀ q₀ / ν` for bond `j`.
    pub fn bessel_argument(&self, bond: usize, beta0: T) -> T {
        let b = &self.bonds[bond - 1];
        T::lit(4.0) * b.delta_g * beta0 * self.q0 / self.nu
    }

    /// Resonant sideband weight `|J_n(x_j(β₀))|`, or `None` off resonance.
    pub fn weight(&self, bond: usize, beta0: T) -> Option<T> {
        let n = self.bonds[bond - 1].order?;
        Some(bessel_j(n, self.bessel_argument(bond, beta0)).abs())
    }

    /// All suppression points, sorted and deduplicated within `1e-9` relative.
    pub fn all_suppression_points(&self) -> Vec<T> {
        let mut pts: Vec<T> = self
            .resonances()
            .flat_map(|b| b.suppression_beta0.iter().copied())
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9) * b.abs().max(T::one()));
        pts
    }
}

/// Detunings, resonance orders and suppression drive strengths of every bond.
pub fn analyze<T: Real>(cfg: &ChainConfig<T>, opts: &ResonanceOptions<T>) -> ResonanceReport<T> {
    let nu = cfg.nu();
    let q0 = cfg.q0();
    let tol = opts.tol.unwrap_or_else(|| T::lit(1e-6) * nu);
    let bonds = (1..cfg.n_sites())
        .map(|j| {
            let delta_omega = cfg.omega()[j - 1] - cfg.omega()[j];
            let delta_g = cfg.g()[j - 1] - cfg.g()[j];
            let nearest = (delta_omega / nu).round();
            let order = (nearest.abs() <= T::from_u32(opts.max_order).unwrap()
                && (delta_omega - nearest * nu).abs() <= tol)
                .then(|| nearest.to_i64().unwrap());

            let (suppression_beta0, enhancement_windows) = match order {
                Some(n) if delta_g != T::zero() => {
                    let scale = nu / (T::lit(4.0) * delta_g.abs() * q0);
                    let abs_n = n.unsigned_abs() as u32;
                    let zeros: Vec<T> = (1..=opts.n_zeros).map(|k| bessel_zero(abs_n, k)).collect();
                    let windows = enhancement_windows(n, &zeros, opts.enhancement_floor)
                        .into_iter()
                        .map(|(a, b)| (a * scale, b * scale))
                        .collect();
                    (zeros.into_iter().map(|z| z * scale).collect(), windows)
                }
                _ => (Vec::new(), Vec::new()),
            };
            BondResonance {
                bond: j,
                delta_omega,
                delta_g,
                order,
                suppression_beta0,
                enhancement_windows,
            }
        })
        .collect();
    ResonanceReport { bonds, nu, q0 }
}

/// Sub-intervals of each lobe `[0, z_1], [z_1, z_2], …` (in Bessel-argument
/// units) where `|J_n| ≥ floor`.
fn enhancement_windows<T: Real>(n: i64, zeros: &[T], floor: T) -> Vec<(T, T)> {
    let f = |x: T| bessel_j(n, x).abs() - floor;
    let mut out = Vec::new();
    let mut left = T::zero();
    for &right in zeros {
        let samples = 200;
        let width = right - left;
        let (mut best_x, mut best) = (left, f(left));
        for s in 1..samples {
            let x = left + width * T::from_usize_lossy(s) / T::from_usize_lossy(samples);
            let v = f(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        if best >= T::zero() {
            let lo = if f(left) >= T::zero() { left } else { crossing(&f, left, best_x) };
            let hi = crossing(&f, best_x, right);
            out.push((lo, hi));
        }
        left = right;
    }
    out
}

/// Root of `f` in `[a, b]` given opposite signs at the ends.
fn crossing<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let fa_pos = f(a) >= T::zero();
    for _ in 0..100 {
        let m = (a + b) * T::lit(0.5);
        if (f(m) >= T::zero()) == fa_pos {
            a = m;
        } else {
            b = m;
        }
    }
    (a + b) * T::lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainParams;

    fn chain(g: Vec<f64>) -> ChainConfig<f64> {
        ChainParams::new(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0], g, 0.1, 0.2, 1.1e5, 5.0)
            .validate()
            .unwrap()
    }

    #[test]
    fn detuned_chain_suppression_points() {
        let rep = analyze(&chain(vec![0.5, 0.5, 1.5, 0.5, 0.5, 0.5]), &Default::default());
        let res: Vec<_> = rep.resonances().collect();
        assert_eq!(res.len(), 2);
        assert_eq!(res[0].bond, 2);
        assert_eq!(res[0].order, Some(-1));
        assert_eq!(res[1].order, Some(1));
        assert_eq!(res[0].delta_omega, -1.0);
        for b in res {
            assert!((b.suppression_beta0[0] - 1.354_712_637_523_355_6).abs() < 1e-9);
            assert!((b.suppression_beta0[1] - 2.480_384_454_114_286).abs() < 1e-9);
        }
        let pts = rep.all_suppression_points();
        assert_eq!(pts.len(), 2);
        assert_eq!(rep.bonds[0].order, Some(0));
        assert!(rep.bonds[0].suppression_beta0.is_empty());
    }

    #[test]
    fn weak_site_suppression_points() {
        let rep = analyze(&chain(vec![0.0, 0.0, 0.03, 0.0, 0.0, 0.0]), &Default::default());
        let pts = rep.all_suppression_points();
        assert!((pts[0] - 45.157_087_917_445_19).abs() < 1e-7);
        assert!((pts[1] - 82.679_481_803_809_54).abs() < 1e-7);
    }

    #[test]
    fn homogeneous_chain_has_no_resonances() {
        let cfg = ChainParams::new(vec![0.0; 5], vec![0.5; 5], 0.1, 0.2, 1e3, 0.0)
            .validate()
            .unwrap();
        let rep = analyze(&cfg, &Default::default());
        assert!(rep.is_empty());
        assert!(rep.all_suppression_points().is_empty());
    }

    #[test]
    fn off_resonant_detuning() {
        let cfg = ChainParams::new(vec![0.0, 0.5], vec![0.0, 1.0], 0.1, 0.2, 1e3, 0.0)
            .validate()
            .unwrap();
        let rep = analyze(&cfg, &Default::default());
        assert_eq!(rep.bonds[0].order, None);
        assert!(rep.is_empty());
        assert_eq!(rep.weight(1, 1.0), None);
        let loose = ResonanceOptions {
            tol: Some(0.6),
            ..Default::default()
        };
        assert!(!analyze(&cfg, &loose).is_empty());
    }

    #[test]
    fn weights_vanish_at_suppression() {
        let rep = analyze(&chain(vec![0.5, 0.5, 1.5, 0.5, 0.5, 0.5]), &Default::default());
        for &b in &rep.bonds[2].suppression_beta0 {
            assert!(rep.weight(3, b).unwrap() < 1e-12);
        }
        assert!((rep.bessel_argument(3, 1.0) - 4.0 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn enhancement_windows_sit_between_zeros() {
        let rep = analyze(&chain(vec![0.5, 0.5, 1.5, 0.5, 0.5, 0.5]), &Default::default());
        let bond = &rep.bonds[2];
        assert_eq!(bond.enhancement_windows.len(), 2);
        let (a, b) = bond.enhancement_windows[0];
        assert!(a > 0.0 && b < bond.suppression_beta0[0] && a < b);
        assert!((rep.weight(3, a).unwrap() - 0.1).abs() < 1e-9);
        assert!((rep.weight(3, b).unwrap() - 0.1).abs() < 1e-9);
        let (c, d) = bond.enhancement_windows[1];
        assert!(c > bond.suppression_beta0[0] && d < bond.suppression_beta0[1]);
    }

    #[test]
    fn suppression_scales_inversely_with_contrast() {
        for scale in [0.1, 0.5, 2.0, 7.0] {
            let base = analyze(&chain(vec![0.5, 0.5, 1.5, 0.5, 0.5, 0.5]), &Default::default());
            let g = vec![0.5, 0.5, 0.5 + scale, 0.5, 0.5, 0.5];
            let scaled = analyze(&chain(g), &Default::default());
            for (a, b) in base.bonds[2]
                .suppression_beta0
                .iter()
                .zip(&scaled.bonds[2].suppression_beta0)
            {
                assert!((a / b - scale).abs() < 1e-12 * scale);
            }
        }
    }
}
