//! Half-periods, quasiperiodic reduction and the shifted zeta functions.
//!
//! For invariants with `Δ > 0` the period lattice is rectangular: `ω` real,
//! `ω′` purely imaginary. `2ω` is located as the first positive real zero of
//! σ (bisection from the lower bound `2ω ≥ π/√(x₃−x₁)`, then Newton on the
//! jet), and `2ω′` as the first zero on the imaginary axis — which by the
//! parity of the series is the real-axis problem for `(g₂, −g₃)`. `η = ζ(ω)`
//! and `η′ = ζ(ω′)` follow from the jet. An independent route via the period
//! integrals over the root gaps (tanh-sinh quadrature) serves as the oracle.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::curve::{invariants_from_roots, real_roots, roots_from_gamma};
use crate::error::{Error, Result};
use crate::quad::tanh_sinh;
use crate::sigma::{zeta_jet, Invariants, SeriesTable};

/// Half-periods `ω, ω′` and the zeta values `η = ζ(ω)`, `η′ = ζ(ω′)`.
///
/// Conventions: `ω > 0`, `Im ω′ > 0`, `η` real, `η′` purely imaginary, and
/// `ηω′ − η′ω = iπ/2` (sign fixed by these conventions).
#[derive(Debug, Clone, Copy)]
pub struct HalfPeriods {
    pub omega: f64,
    pub omega_prime: Complex64,
    pub eta: f64,
    pub eta_prime: Complex64,
}

impl HalfPeriods {
    pub fn im_omega_prime(&self) -> f64 {
        self.omega_prime.im
    }

    pub fn im_eta_prime(&self) -> f64 {
        self.eta_prime.im
    }

    /// `ηω′ − η′ω`, which must equal `iπ/2`.
    pub fn legendre(&self) -> Complex64 {
        self.eta * self.omega_prime - self.eta_prime * self.omega
    }
}

/// First zero of σ on the positive real axis (= `2ω`), by doubling bracket
/// search from the scale-aware lower bound and bisection, polished by Newton.
fn first_real_sigma_zero(inv: Invariants, table: &SeriesTable) -> Result<f64> {
    let roots = real_roots(inv)?;
    let spread = roots[2] - roots[0];
    let sig = |x: f64| table.jet_unchecked(Complex64::new(x, 0.0), inv).value.re;

    // 2ω >= π/√(x₃−x₁); on the normalized family this is the π of the text
    let mut a = (PI / spread.sqrt()) * (1.0 - 1e-9);
    let mut fa = sig(a);
    if fa <= 0.0 {
        // the bound should put us strictly left of the zero
        return Err(Error::Convergence {
            context: "sigma zero bracket",
            iterations: 0,
            best: fa.abs(),
        });
    }
    let mut b = a;
    let mut fb = fa;
    let mut bracketed = false;
    for _ in 0..60 {
        b *= 2.0;
        fb = sig(b);
        if fb <= 0.0 {
            bracketed = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if !bracketed {
        return Err(Error::Convergence {
            context: "sigma zero bracket",
            iterations: 60,
            best: fb.abs(),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) < 1e-9 * mid {
            break;
        }
        let fm = sig(mid);
        if fm > 0.0 {
            a = mid;
        } else {
            b = mid;
            fb = fm;
        }
        let _ = (fa, fb);
    }
    // Newton on the jet from the bisection midpoint
    let mut x = 0.5 * (a + b);
    for _ in 0..50 {
        let jet = table.jet_unchecked(Complex64::new(x, 0.0), inv);
        let step = jet.value.re / jet.d_z.re;
        x -= step;
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    Ok(x)
}

/// Half-periods from the sigma zero set.
pub fn half_periods(inv: Invariants, table: &SeriesTable) -> Result<HalfPeriods> {
    let delta = inv.discriminant();
    if delta <= 0.0 {
        return Err(Error::DegenerateLattice { delta });
    }
    let omega = 0.5 * first_real_sigma_zero(inv, table)?;
    // σ(iy; g₂, g₃) = i σ(y; g₂, −g₃): the imaginary-axis zero search is the
    // real-axis search on the reflected invariants
    let rotated = Invariants::new(inv.g2, -inv.g3);
    let im_omega_prime = 0.5 * first_real_sigma_zero(rotated, table)?;

    let eta_c = zeta_jet(Complex64::new(omega, 0.0), inv, table)?.value;
    let eta_prime = zeta_jet(Complex64::new(0.0, im_omega_prime), inv, table)?.value;
    debug_assert!(eta_c.im.abs() < 1e-9, "eta should be real");
    debug_assert!(eta_prime.re.abs() < 1e-9, "eta' should be imaginary");

    Ok(HalfPeriods {
        omega,
        omega_prime: Complex64::new(0.0, im_omega_prime),
        eta: eta_c.re,
        eta_prime: Complex64::new(0.0, eta_prime.im),
    })
}

/// Half-periods from the period integrals over the root gaps:
///
/// ```text
/// ω  =  ½ ∫_{x₁}^{x₂} dx/√((x−x₁)(x₂−x)(x₃−x)),   η  = −½ ∫_{x₁}^{x₂} x dx/√(…),
/// ω′ = i/2 ∫_{x₂}^{x₃} dx/√((x−x₁)(x−x₂)(x₃−x)),  η′ = −i/2 ∫_{x₂}^{x₃} x dx/√(…).
/// ```
///
/// Independent of the series table; valid arbitrarily close to γ = −1/6.
pub fn half_periods_by_integrals(gamma: f64) -> Result<HalfPeriods> {
    let r = roots_from_gamma(gamma)?;
    if r.degenerate {
        return Err(Error::DegenerateLattice { delta: 0.0 });
    }
    let (x1, x2, x3) = (r.x1, r.x2, r.x3);
    let tol = 1e-13;

    // on (x₁, x₂): x₃ − x = (x₃ − x₂) + (x₂ − x), kept stable near gluing
    let gap23 = x3 - x2;
    let omega = 0.5
        * tanh_sinh(
            |_x, da, db| 1.0 / (da * db * (gap23 + db)).sqrt(),
            x1,
            x2,
            tol,
        )?;
    let eta = -0.5
        * tanh_sinh(
            |x, da, db| x / (da * db * (gap23 + db)).sqrt(),
            x1,
            x2,
            tol,
        )?;

    // on (x₂, x₃): x − x₁ = (x₂ − x₁) + (x − x₂)
    let gap12 = x2 - x1;
    let im_omega_prime = 0.5
        * tanh_sinh(
            |_x, da, db| 1.0 / ((gap12 + da) * da * db).sqrt(),
            x2,
            x3,
            tol,
        )?;
    let im_eta_prime = -0.5
        * tanh_sinh(
            |x, da, db| x / ((gap12 + da) * da * db).sqrt(),
            x2,
            x3,
            tol,
        )?;

    Ok(HalfPeriods {
        omega,
        omega_prime: Complex64::new(0.0, im_omega_prime),
        eta,
        eta_prime: Complex64::new(0.0, im_eta_prime),
    })
}

/// Locate the single simple zero of an analytic function inside a circle by
/// the argument principle, then polish by Newton.
///
/// `f` returns `(value, derivative)`. Fails with [`Error::Contour`] when the
/// winding number along the circle is not 1.
pub fn zero_locate<F>(center: Complex64, radius: f64, f: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    const NODES: usize = 256;
    let mut winding = Complex64::new(0.0, 0.0);
    let mut moment = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for j in 0..NODES {
        let theta = std::f64::consts::TAU * j as f64 / NODES as f64;
        let offset = Complex64::from_polar(radius, theta);
        let z = center + offset;
        let (value, derivative) = f(z);
        scale = scale.max(value.norm());
        // dz = i·offset·dθ; the trapezoid rule on a circle is geometric-order
        let dz = Complex64::new(0.0, 1.0) * offset * (std::f64::consts::TAU / NODES as f64);
        let ratio = derivative / value;
        winding += ratio * dz;
        moment += z * ratio * dz;
    }
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    let winding = winding / two_pi_i;
    let estimate = moment / two_pi_i;
    let rounded = winding.re.round();
    if (winding - rounded).norm() > 0.1 || rounded as i64 != 1 {
        return Err(Error::Contour {
            winding: rounded as i64,
        });
    }

    let mut z = estimate;
    for _ in 0..60 {
        let (value, derivative) = f(z);
        if value.norm() <= 1e-13 * scale {
            break;
        }
        z -= value / derivative;
    }
    let (value, _) = f(z);
    if value.norm() > 1e-12 * scale {
        return Err(Error::Convergence {
            context: "contour zero polish",
            iterations: 60,
            best: value.norm(),
        });
    }
    Ok(z)
}

/// Derivatives of `(ω, Im ω′)` and `(η, Im η′)` with respect to `(g₂, g₃)`.
///
/// `2ω` is a simple zero of σ, so `∂(2ω)/∂g_k = −(∂σ/∂g_k)/(∂σ/∂z)` there;
/// the η rows differentiate `ζ(ω)` through both the argument and the
/// invariants.
#[derive(Debug, Clone, Copy)]
pub struct PeriodDerivatives {
    /// `[∂ω/∂g₂, ∂ω/∂g₃]`
    pub d_omega: [f64; 2],
    /// `[∂(Im ω′)/∂g₂, ∂(Im ω′)/∂g₃]`
    pub d_im_omega_prime: [f64; 2],
    /// `[∂η/∂g₂, ∂η/∂g₃]`
    pub d_eta: [f64; 2],
    /// `[∂(Im η′)/∂g₂, ∂(Im η′)/∂g₃]`
    pub d_im_eta_prime: [f64; 2],
}

pub fn d_periods(
    inv: Invariants,
    hp: &HalfPeriods,
    table: &SeriesTable,
) -> Result<PeriodDerivatives> {
    let two_omega = Complex64::new(2.0 * hp.omega, 0.0);
    let jr = table.jet_unchecked(two_omega, inv);
    let d_omega = [
        (-0.5 * jr.d_g2 / jr.d_z).re,
        (-0.5 * jr.d_g3 / jr.d_z).re,
    ];

    let two_omega_prime = 2.0 * hp.omega_prime;
    let ji = table.jet_unchecked(two_omega_prime, inv);
    let d_im_omega_prime = [
        (-0.5 * ji.d_g2 / ji.d_z).im,
        (-0.5 * ji.d_g3 / ji.d_z).im,
    ];

    // η = ζ(ω(g), g): dη/dg_k = −℘(ω) ∂ω/∂g_k + ∂ζ/∂g_k|_ω
    let zw = zeta_jet(Complex64::new(hp.omega, 0.0), inv, table)?;
    let d_eta = [
        (zw.d_z * d_omega[0] + zw.d_g2).re,
        (zw.d_z * d_omega[1] + zw.d_g3).re,
    ];

    let zwp = zeta_jet(hp.omega_prime, inv, table)?;
    let i = Complex64::new(0.0, 1.0);
    let d_im_eta_prime = [
        (zwp.d_z * i * d_im_omega_prime[0] + zwp.d_g2).im,
        (zwp.d_z * i * d_im_omega_prime[1] + zwp.d_g3).im,
    ];

    Ok(PeriodDerivatives {
        d_omega,
        d_im_omega_prime,
        d_eta,
        d_im_eta_prime,
    })
}

/// σ at `z` expressed through its value at the reduced point of the
/// fundamental cell `Re ∈ [−ω, ω), Im ∈ [−Im ω′, Im ω′)`:
/// `σ(z) = sigma · exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
pub struct SigmaReduced {
    /// `±σ(z₀)` with the sign of the lattice translation already applied.
    pub sigma: Complex64,
    /// Exact logarithmic multiplier `(2mη + 2nη′)(z − mω − nω′)`.
    pub log_scale: Complex64,
    /// The in-cell representative.
    pub z0: Complex64,
    pub m: i32,
    pub n: i32,
}

pub fn sigma_reduced(
    z: Complex64,
    inv: Invariants,
    hp: &HalfPeriods,
    table: &SeriesTable,
) -> SigmaReduced {
    let (m, n, z0) = reduce_to_cell(z, hp);
    let eta_sum = 2.0 * m as f64 * hp.eta + 2.0 * n as f64 * hp.eta_prime;
    let log_scale =
        eta_sum * (z - m as f64 * Complex64::new(hp.omega, 0.0) - n as f64 * hp.omega_prime);
    let parity = (m + n + m * n).rem_euclid(2);
    let sign = if parity == 0 { 1.0 } else { -1.0 };
    let sigma0 = table.jet_unchecked(z0, inv).value;
    SigmaReduced {
        sigma: sign * sigma0,
        log_scale,
        z0,
        m,
        n,
    }
}

fn reduce_to_cell(z: Complex64, hp: &HalfPeriods) -> (i32, i32, Complex64) {
    let w = hp.omega;
    let wp = hp.im_omega_prime();
    let m = ((z.re + w) / (2.0 * w)).floor() as i32;
    let n = ((z.im + wp) / (2.0 * wp)).floor() as i32;
    let z0 = z - Complex64::new(2.0 * m as f64 * w, 2.0 * n as f64 * wp);
    (m, n, z0)
}

/// ζ at arbitrary `z` through the reduction `ζ(z₀ + 2mω + 2nω′) = ζ(z₀) + 2mη + 2nη′`.
pub fn zeta_at(
    z: Complex64,
    inv: Invariants,
    hp: &HalfPeriods,
    table: &SeriesTable,
) -> Result<Complex64> {
    let (m, n, z0) = reduce_to_cell(z, hp);
    let base = crate::sigma::zeta(z0, inv, table)?;
    Ok(base + 2.0 * m as f64 * hp.eta + 2.0 * n as f64 * hp.eta_prime)
}

/// ℘ at arbitrary `z` (periodic, so just the reduced point).
pub fn wp_at(
    z: Complex64,
    inv: Invariants,
    hp: &HalfPeriods,
    table: &SeriesTable,
) -> Result<Complex64> {
    let (_, _, z0) = reduce_to_cell(z, hp);
    crate::sigma::wp(z0, inv, table)
}

/// ℘′ at arbitrary `z`.
pub fn wp_prime_at(
    z: Complex64,
    inv: Invariants,
    hp: &HalfPeriods,
    table: &SeriesTable,
) -> Result<Complex64> {
    let (_, _, z0) = reduce_to_cell(z, hp);
    crate::sigma::wp_prime(z0, inv, table)
}

/// The shifted zeta functions `ζ₂(z) = ζ(z + ω) − η` and
/// `ζ₃(z) = ζ(z + ω + ω′) − η − η′`, both vanishing at `z = 0`.
///
/// They are the logarithmic derivatives of `σ√(℘ − x₃)` and `σ√(℘ − x₂)`
/// respectively, and their difference is
/// `ζ₂ − ζ₃ = ℘′(x₃ − x₂) / (2(℘ − x₂)(℘ − x₃))`.
pub fn zeta_k(
    z: Complex64,
    k: u8,
    inv: Invariants,
    hp: &HalfPeriods,
    table: &SeriesTable,
) -> Result<Complex64> {
    match k {
        2 => Ok(zeta_at(z + hp.omega, inv, hp, table)? - hp.eta),
        3 => Ok(zeta_at(z + hp.omega + hp.omega_prime, inv, hp, table)?
            - hp.eta
            - hp.eta_prime),
        _ => Err(Error::Range {
            what: "k",
            value: k as f64,
            range: "{2, 3}",
        }),
    }
}
