//! The one-parameter family of real cubics used by the mapping solver.
//!
//! Roots are parametrized as `x₁ = γ − 1/2`, `x₂ = −2γ`, `x₃ = γ + 1/2` for
//! `γ ∈ (−1/6, 1/6)`, which fixes the normalizations `x₁ + x₂ + x₃ = 0` and
//! `x₃ − x₁ = 1`. At `γ = −1/6` the two upper roots glue (`x₂ = x₃ = 1/3`)
//! and the discriminant vanishes.

use crate::error::{Error, Result};
use crate::sigma::Invariants;

pub const GAMMA_MIN: f64 = -1.0 / 6.0;
pub const GAMMA_MAX: f64 = 1.0 / 6.0;

/// Ordered real roots of `4x³ − g₂x − g₃` with zero sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTriple {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// Set when the two upper roots coincide (γ = −1/6).
    pub degenerate: bool,
}

impl RootTriple {
    pub fn spread(&self) -> f64 {
        self.x3 - self.x1
    }
}

/// Family parametrization; γ = −1/6 is allowed and flags the glued roots.
pub fn roots_from_gamma(gamma: f64) -> Result<RootTriple> {
    if !(GAMMA_MIN..GAMMA_MAX).contains(&gamma) {
        return Err(Error::Range {
            what: "gamma",
            value: gamma,
            range: "[-1/6, 1/6)",
        });
    }
    Ok(RootTriple {
        x1: gamma - 0.5,
        x2: -2.0 * gamma,
        x3: gamma + 0.5,
        degenerate: gamma == GAMMA_MIN,
    })
}

/// Expand `4(x−x₁)(x−x₂)(x−x₃)` into `4x³ − g₂x − g₃`; requires zero root sum.
pub fn invariants_from_roots(r: &RootTriple) -> Result<Invariants> {
    let sum = r.x1 + r.x2 + r.x3;
    if sum.abs() > 1e-14 * (1.0 + r.spread().abs()) {
        return Err(Error::Normalization { sum });
    }
    let g2 = -4.0 * (r.x1 * r.x2 + r.x2 * r.x3 + r.x3 * r.x1);
    let g3 = 4.0 * r.x1 * r.x2 * r.x3;
    Ok(Invariants::new(g2, g3))
}

pub fn invariants_from_gamma(gamma: f64) -> Result<Invariants> {
    invariants_from_roots(&roots_from_gamma(gamma)?)
}

/// `(dg₂/dγ, dg₃/dγ)` along the family: `g₂ = 1 + 12γ²`, `g₃ = 2γ − 8γ³`.
pub fn d_invariants_dgamma(gamma: f64) -> Result<(f64, f64)> {
    if !(GAMMA_MIN..GAMMA_MAX).contains(&gamma) {
        return Err(Error::Range {
            what: "gamma",
            value: gamma,
            range: "[-1/6, 1/6)",
        });
    }
    Ok((24.0 * gamma, 2.0 - 24.0 * gamma * gamma))
}

/// Sorted real roots of `4x³ − g₂x − g₃` (requires Δ > 0), by the
/// trigonometric method for three real roots.
pub fn real_roots(inv: Invariants) -> Result<[f64; 3]> {
    let delta = inv.discriminant();
    if delta <= 0.0 {
        return Err(Error::DegenerateLattice { delta });
    }
    // 4x³ − g₂x − g₃ = 0  =>  x³ + px + q = 0 with p = −g₂/4, q = −g₃/4
    let p = -inv.g2 / 4.0;
    let q = -inv.g3 / 4.0;
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [
        m * theta.cos(),
        m * (theta - 2.0 * std::f64::consts::PI / 3.0).cos(),
        m * (theta + 2.0 * std::f64::consts::PI / 3.0).cos(),
    ];
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // one Newton polish apiece; the closed form can lose digits near gluing
    for x in &mut roots {
        for _ in 0..2 {
            let f = 4.0 * *x * *x * *x - inv.g2 * *x - inv.g3;
            let df = 12.0 * *x * *x - inv.g2;
            if df != 0.0 {
                *x -= f / df;
            }
        }
    }
    Ok(roots)
}
