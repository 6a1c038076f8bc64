//! Ready-made parameter sets used by the examples and the acceptance checks.

use crate::chain::{ChainConfig, ChainParams};
use crate::experiments::{BetaGrid, DisorderSpec, DisorderTarget};
use crate::num::Real;

fn v<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::lit(x)).collect()
}

const OMEGA: [f64; 6] = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
const G: [f64; 6] = [0.5, 0.5, 1.5, 0.5, 0.5, 0.5];

/// Six-site chain with the third site detuned by one vibrational quantum.
pub fn detuned_chain<T: Real>(gamma: T) -> ChainConfig<T> {
    ChainParams::new(v(&OMEGA), v(&G), T::lit(0.1), T::lit(0.2), gamma, T::lit(5.0))
        .validate()
        .expect("preset is valid")
}

pub fn detuned_chain_default<T: Real>() -> ChainConfig<T> {
    detuned_chain(T::lit(1.1e5))
}

pub fn detuned_grid<T: Real>() -> BetaGrid<T> {
    BetaGrid {
        min: T::zero(),
        max: T::lit(3.0),
        steps: 121,
    }
}

/// Frequency disorder around the detuned chain values, std 0.1.
pub fn frequency_disorder<T: Real>(n_realizations: usize, master_seed: u64) -> DisorderSpec<T> {
    DisorderSpec {
        target: DisorderTarget::Frequencies,
        means: v(&OMEGA),
        std: T::lit(0.1),
        n_realizations,
        master_seed,
    }
}

/// Coupling disorder around the detuned chain values, std 0.3.
pub fn coupling_disorder<T: Real>(n_realizations: usize, master_seed: u64) -> DisorderSpec<T> {
    DisorderSpec {
        target: DisorderTarget::Couplings,
        means: v(&G),
        std: T::lit(0.3),
        n_realizations,
        master_seed,
    }
}

/// `(with vibration, without vibration)` at γ = 1100, β₀ = 0.65.
pub fn coherence_pair<T: Real>() -> (ChainConfig<T>, ChainConfig<T>) {
    let vib = detuned_chain(T::lit(1100.0))
        .with_beta0(T::lit(0.65))
        .expect("preset is valid");
    let bare = vib.decoupled();
    (vib, bare)
}

/// Weak coupling `g₃ = 0.03` on an otherwise uncoupled chain.
pub fn weak_site<T: Real>() -> ChainConfig<T> {
    ChainParams::new(
        v(&OMEGA),
        v(&[0.0, 0.0, 0.03, 0.0, 0.0, 0.0]),
        T::lit(0.1),
        T::lit(0.2),
        T::lit(1.1e5),
        T::lit(5.0),
    )
    .validate()
    .expect("preset is valid")
}

pub fn weak_site_grid<T: Real>() -> BetaGrid<T> {
    BetaGrid {
        min: T::zero(),
        max: T::lit(100.0),
        steps: 201,
    }
}

/// Two sites, strongly damped zero-temperature resonator.
pub fn n2_adiabatic<T: Real>() -> ChainConfig<T> {
    let mut p = ChainParams::new(
        v(&[0.0, 1.0]),
        v(&[0.0, 0.5]),
        T::lit(0.1),
        T::lit(0.2),
        T::lit(200.0),
        T::zero(),
    );
    p.beta0 = T::lit(0.5);
    p.validate().expect("preset is valid")
}
