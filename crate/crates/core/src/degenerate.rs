//! The δ = 0 limit: the dam shrinks to a vertical slit and every elliptic
//! quantity collapses to an elementary function (`σ = e^{−z²/6} sinh z`,
//! `℘ = 1/sinh²z + 1/3`, `ω′ = iπ/2`).
//!
//! The half-strip map `Q̃` and the half-plane map `W̃` share the parameters
//! `(D, z⁻, z⁺)` determined by
//!
//! ```text
//! h⁻z⁻ − h⁺z⁺ = −ihπ/2            (finite limit as Re z → −∞)
//! h⁻ sinh 2z⁻ = h⁺ sinh 2z⁺       (non-vanishing derivative)
//! D = (2h⁺z⁺ − 2h⁻z⁻)/(3π)        (no linear term; equals ih/3)
//! ```
//!
//! with `z± = iv±`, `v± ∈ (0, π/2)`, those reduce to the real pair
//! `h⁻v⁻ − h⁺v⁺ = −hπ/2` and `h⁻ sin 2v⁻ = h⁺ sin 2v⁺`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::region::RegionSpec;
use crate::sigma::POLE_FLOOR;

/// Parameters of the degenerate maps. `x± = ℘_deg(z±) = 1/3 − 1/sin²v±`.
#[derive(Debug, Clone, Copy)]
pub struct DegenerateParams {
    pub d: Complex64,
    pub z_minus: Complex64,
    pub z_plus: Complex64,
    pub x_minus: f64,
    pub x_plus: f64,
}

impl DegenerateParams {
    pub fn im_d(&self) -> f64 {
        self.d.im
    }

    pub fn im_z_minus(&self) -> f64 {
        self.z_minus.im
    }

    pub fn im_z_plus(&self) -> f64 {
        self.z_plus.im
    }
}

fn params_from_v(r: &RegionSpec, v_minus: f64, v_plus: f64) -> DegenerateParams {
    let z_minus = Complex64::new(0.0, v_minus);
    let z_plus = Complex64::new(0.0, v_plus);
    let d = (2.0 * r.h_plus * z_plus - 2.0 * r.h_minus * z_minus) / (3.0 * PI);
    DegenerateParams {
        d,
        z_minus,
        z_plus,
        x_minus: 1.0 / 3.0 - 1.0 / v_minus.sin().powi(2),
        x_plus: 1.0 / 3.0 - 1.0 / v_plus.sin().powi(2),
    }
}

fn system(r: &RegionSpec, v_minus: f64, v_plus: f64) -> [f64; 2] {
    [
        r.h_minus * v_minus - r.h_plus * v_plus + r.h * FRAC_PI_2,
        r.h_minus * (2.0 * v_minus).sin() - r.h_plus * (2.0 * v_plus).sin(),
    ]
}

/// Solve the two real conditions for `(v⁻, v⁺) ∈ (0, π/2)²`.
///
/// Newton from `(π/6, π/3)` with box clamping; if it stalls, fall back to
/// bisection of the one-variable reduction (eliminating `v⁻` through the
/// linear equation), which brackets a sign change for every valid region.
pub fn solve_degenerate(r: &RegionSpec) -> Result<DegenerateParams> {
    r.validate()?;
    if r.delta != 0.0 {
        return Err(Error::Domain {
            reason: format!("degenerate solver requires delta = 0, got {}", r.delta),
        });
    }
    solve_degenerate_heights(r)
}

/// Same as [`solve_degenerate`] but ignores `r.delta`; used by the elliptic
/// solver to build its initial guess from the heights alone.
pub fn solve_degenerate_heights(r: &RegionSpec) -> Result<DegenerateParams> {
    let eps = 1e-12;
    let mut v = [PI / 6.0, PI / 3.0];
    let mut res = system(r, v[0], v[1]);
    let mut norm = res[0].hypot(res[1]);
    let mut converged = false;
    for _ in 0..60 {
        if norm < 1e-14 * (1.0 + r.h_minus) {
            converged = true;
            break;
        }
        let jac = [
            [r.h_minus, -r.h_plus],
            [
                2.0 * r.h_minus * (2.0 * v[0]).cos(),
                -2.0 * r.h_plus * (2.0 * v[1]).cos(),
            ],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            break;
        }
        let step = [
            (res[0] * jac[1][1] - res[1] * jac[0][1]) / det,
            (jac[0][0] * res[1] - jac[1][0] * res[0]) / det,
        ];
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = [
                (v[0] - lambda * step[0]).clamp(eps, FRAC_PI_2 - eps),
                (v[1] - lambda * step[1]).clamp(eps, FRAC_PI_2 - eps),
            ];
            let cres = system(r, cand[0], cand[1]);
            let cnorm = cres[0].hypot(cres[1]);
            if cnorm < norm {
                v = cand;
                res = cres;
                norm = cnorm;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if !converged && norm >= 1e-13 * (1.0 + r.h_minus) {
        v = bisect_reduced(r)?;
        let res = system(r, v[0], v[1]);
        norm = res[0].hypot(res[1]);
    }
    if norm > 1e-13 * (1.0 + r.h_minus) {
        return Err(Error::Convergence {
            context: "degenerate parameter system",
            iterations: 60,
            best: norm,
        });
    }
    Ok(params_from_v(r, v[0], v[1]))
}

/// One-variable reduction: `v⁻(v⁺) = (h⁺v⁺ − hπ/2)/h⁻`, bisect the second
/// equation over `v⁺ ∈ (hπ/(2h⁺), π/2)`. The bracket endpoints have opposite
/// signs exactly because `h < h⁺` and `h⁺ − h < h⁻`.
fn bisect_reduced(r: &RegionSpec) -> Result<[f64; 2]> {
    let v_minus_of = |vp: f64| (r.h_plus * vp - r.h * FRAC_PI_2) / r.h_minus;
    let g = |vp: f64| system(r, v_minus_of(vp), vp)[1];
    let mut lo = r.h * FRAC_PI_2 / r.h_plus + 1e-15;
    let mut hi = FRAC_PI_2 - 1e-15;
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::Convergence {
            context: "degenerate reduced bracket",
            iterations: 0,
            best: glo.abs().min(ghi.abs()),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let vp = 0.5 * (lo + hi);
    Ok([v_minus_of(vp), vp])
}

/// Solve the same parameters in the half-plane coordinate, as the pair
/// `(X⁻, X⁺)` with `X = 1/3 − x = 1/sin²v ∈ (1, ∞)`:
///
/// ```text
/// h⁻ √(X⁻−1)/X⁻ = h⁺ √(X⁺−1)/X⁺          (the algebraic condition)
/// h⁻ arctan(1/√(X⁻−1)) − h⁺ arctan(1/√(X⁺−1)) = −hπ/2
/// ```
///
/// Returns `(x⁻, x⁺)`. An independent route used to cross-check
/// [`solve_degenerate`]; it bisects in `X⁺` after eliminating `X⁻` through
/// the arctan equation.
pub fn solve_degenerate_x(r: &RegionSpec) -> Result<(f64, f64)> {
    r.validate()?;
    // v⁻ as a function of X⁺ through the arctan equation
    let v_minus_of = |xp: f64| {
        let v_plus = (1.0 / xp.sqrt()).asin();
        (r.h_plus * v_plus - r.h * FRAC_PI_2) / r.h_minus
    };
    // the algebraic condition, rewritten through X
    let cond = |x: f64, hh: f64| hh * (x - 1.0).sqrt() / x;
    let g = |xp: f64| {
        let vm = v_minus_of(xp);
        let xm = 1.0 / vm.sin().powi(2);
        cond(xm, r.h_minus) - cond(xp, r.h_plus)
    };
    // X⁺ ∈ (1, 1/sin²(hπ/(2h⁺))): the same bracket as the v-problem, mapped
    let mut lo = 1.0 + 1e-13;
    let mut hi = 1.0 / (r.h * FRAC_PI_2 / r.h_plus).sin().powi(2) - 1e-13;
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        // measure-zero touch; fall through with a token interval
        hi = lo;
    } else if glo.signum() == ghi.signum() {
        return Err(Error::Convergence {
            context: "x-form bracket",
            iterations: 0,
            best: glo.abs().min(ghi.abs()),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi.abs() {
            break;
        }
    }
    let xp = 0.5 * (lo + hi);
    let vm = v_minus_of(xp);
    let xm = 1.0 / vm.sin().powi(2);
    Ok((1.0 / 3.0 - xm, 1.0 / 3.0 - xp))
}

fn ln_cut(w: Complex64) -> Result<Complex64> {
    crate::mapping::ln_cut(w)
}

fn sinh_ratio(z: Complex64, pole: Complex64) -> Result<Complex64> {
    let num = (z - pole).sinh();
    let den = (z + pole).sinh();
    let floor = POLE_FLOOR * (1.0 + z.norm());
    if num.norm() < floor || den.norm() < floor {
        return Err(Error::Pole {
            z,
            mag: num.norm().min(den.norm()),
        });
    }
    Ok(num / den)
}

/// The half-strip map: `Q̃(z) = Lz + (h⁻/π) ln(sinh(z−z⁻)/sinh(z+z⁻))
/// − (h⁺/π) ln(sinh(z−z⁺)/sinh(z+z⁺)) − i(h⁻−h⁺)`, where the linear
/// coefficient `L = D + 2h⁻z⁻/(3π) − 2h⁺z⁺/(3π)` vanishes at solved
/// parameters.
pub fn q_tilde(z: Complex64, p: &DegenerateParams, r: &RegionSpec) -> Result<Complex64> {
    let linear = p.d + 2.0 * r.h_minus * p.z_minus / (3.0 * PI)
        - 2.0 * r.h_plus * p.z_plus / (3.0 * PI);
    let l_minus = ln_cut(sinh_ratio(z, p.z_minus)?)?;
    let l_plus = ln_cut(sinh_ratio(z, p.z_plus)?)?;
    Ok(linear * z + r.h_minus / PI * l_minus - r.h_plus / PI * l_plus
        - Complex64::new(0.0, r.h_minus - r.h_plus))
}

/// Square root branch shared by `W̃` and its differential: principal
/// `√(x + 2/3)`, under which `√(x± + 2/3) = i·cot v±`.
fn sqrt_shifted(x: Complex64) -> Complex64 {
    (x + 2.0 / 3.0).sqrt()
}

/// The half-plane map `W̃`: two logarithms of Möbius ratios of `√(x + 2/3)`.
/// Agrees with `Q̃` under `x = ℘_deg(z) = 1/sinh²z + 1/3`.
pub fn w_tilde(x: Complex64, p: &DegenerateParams, r: &RegionSpec) -> Result<Complex64> {
    let s = sqrt_shifted(x);
    let k_minus = sqrt_shifted(Complex64::new(p.x_minus, 0.0));
    let k_plus = sqrt_shifted(Complex64::new(p.x_plus, 0.0));
    let guard = |k: Complex64| -> Result<Complex64> {
        let num = k - s;
        let den = k + s;
        if num.norm() < 1e-140 || den.norm() < 1e-140 {
            return Err(Error::Pole { z: x, mag: num.norm().min(den.norm()) });
        }
        Ok(num / den)
    };
    let l_minus = ln_cut(guard(k_minus)?)?;
    let l_plus = ln_cut(guard(k_plus)?)?;
    Ok(r.h_minus / PI * l_minus - r.h_plus / PI * l_plus
        - Complex64::new(0.0, r.h_minus - r.h_plus))
}

/// The real scalar κ of the Schwarz–Christoffel differential
/// `dW̃ = iκ (x − 1/3) dx / (√(x+2/3)(x−x⁻)(x−x⁺))`,
/// `κ = (h⁻ cot v⁻ − h⁺ cot v⁺)/π`.
pub fn sc_constant(p: &DegenerateParams, r: &RegionSpec) -> f64 {
    let cot = |v: f64| v.cos() / v.sin();
    (r.h_minus * cot(p.im_z_minus()) - r.h_plus * cot(p.im_z_plus())) / PI
}

/// Closed-form `dW̃/dx` at solved parameters.
pub fn w_tilde_derivative(x: Complex64, p: &DegenerateParams, r: &RegionSpec) -> Complex64 {
    let kappa = sc_constant(p, r);
    Complex64::new(0.0, kappa) * (x - 1.0 / 3.0)
        / (sqrt_shifted(x) * (x - p.x_minus) * (x - p.x_plus))
}
