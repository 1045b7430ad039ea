//! The four-parameter system for the conformal map of the period rectangle
//! onto the region, the map `Q` itself, and the Abel-coordinate inversion.
//!
//! Unknowns are real: `(γ, Im D, Im z⁻, Im z⁺)` with `D, z± ∈ iℝ`. The four
//! residuals are the imaginary parts of equations 1, 3, 4 and the real part
//! of equation 2 of the vertex/period system
//!
//! ```text
//! −Dω  − (2h⁺/π) η z⁺  + (2h⁻/π) η z⁻  = −ih
//! −Dω′ − (2h⁺/π) η′z⁺  + (2h⁻/π) η′z⁻ = −δ
//! D + (h⁻/π)(ζ(ω−z⁻)−ζ(ω+z⁻)) − (h⁺/π)(ζ(ω−z⁺)−ζ(ω+z⁺)) = 0
//! D + (h⁻/π)(ζ(ω′+ω−z⁻)−ζ(ω′+ω+z⁻)) − (h⁺/π)(ζ(ω′+ω−z⁺)−ζ(ω′+ω+z⁺)) = 0
//! ```
//!
//! (the last equation is evaluated with its second ζ pulled back by `2ω′`,
//! which keeps every sigma argument inside the fundamental cell). The Newton
//! Jacobian is fully analytic: period derivatives through the simple-zero
//! formula, ζ derivatives through the extended sigma jet.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::curve::{d_invariants_dgamma, invariants_from_gamma, roots_from_gamma, RootTriple};
use crate::degenerate::solve_degenerate_heights;
use crate::error::{Error, Result};
use crate::lattice::{
    d_periods, half_periods, sigma_reduced, wp_at, wp_prime_at, zeta_at, HalfPeriods,
};
use crate::region::RegionSpec;
use crate::sigma::{zeta_jet, Invariants, SeriesTable};

/// Solved mapping parameters: `γ` selects the curve, `D, z⁻, z⁺` are purely
/// imaginary with `0 < Im z⁻ < Im z⁺ < Im ω′(γ)`.
#[derive(Debug, Clone, Copy)]
pub struct MappingParams {
    pub gamma: f64,
    pub d: Complex64,
    pub z_minus: Complex64,
    pub z_plus: Complex64,
}

impl MappingParams {
    pub fn from_imag(gamma: f64, d: f64, v_minus: f64, v_plus: f64) -> Self {
        Self {
            gamma,
            d: Complex64::new(0.0, d),
            z_minus: Complex64::new(0.0, v_minus),
            z_plus: Complex64::new(0.0, v_plus),
        }
    }

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

/// Everything the evaluation of one γ-slice needs.
#[derive(Debug, Clone)]
pub struct LatticeData {
    pub gamma: f64,
    pub inv: Invariants,
    pub roots: RootTriple,
    pub hp: HalfPeriods,
}

pub fn lattice_for_gamma(gamma: f64, table: &SeriesTable) -> Result<LatticeData> {
    let roots = roots_from_gamma(gamma)?;
    let inv = invariants_from_gamma(gamma)?;
    let hp = half_periods(inv, table)?;
    Ok(LatticeData {
        gamma,
        inv,
        roots,
        hp,
    })
}

/// The elliptic function `g(z) = (h⁻/π)(ζ(z−z⁻) − ζ(z+z⁻)) − (h⁺/π)(ζ(z−z⁺)
/// − ζ(z+z⁺))`; `dQ/dz = g(z) + D`.
pub fn g_func(
    z: Complex64,
    p: &MappingParams,
    r: &RegionSpec,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<Complex64> {
    let z_at = |u: Complex64| zeta_at(u, lat.inv, &lat.hp, table);
    Ok(r.h_minus / PI * (z_at(z - p.z_minus)? - z_at(z + p.z_minus)?)
        - r.h_plus / PI * (z_at(z - p.z_plus)? - z_at(z + p.z_plus)?))
}

/// `dQ/dz = g(z) + D`.
pub fn q_prime(
    z: Complex64,
    p: &MappingParams,
    r: &RegionSpec,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<Complex64> {
    Ok(g_func(z, p, r, lat, table)? + p.d)
}

/// The four complex left-hand sides, with the reduction of equation 4 noted
/// in the module docs already applied.
fn complex_lhs(
    p: &MappingParams,
    r: &RegionSpec,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<[Complex64; 4]> {
    let hp = &lat.hp;
    let inv = lat.inv;
    let omega = Complex64::new(hp.omega, 0.0);
    let zt = |u: Complex64| crate::sigma::zeta(u, inv, table);

    let l1 = -p.d * hp.omega - 2.0 * r.h_plus / PI * hp.eta * p.z_plus
        + 2.0 * r.h_minus / PI * hp.eta * p.z_minus;
    let l2 = -p.d * hp.omega_prime - 2.0 * r.h_plus / PI * hp.eta_prime * p.z_plus
        + 2.0 * r.h_minus / PI * hp.eta_prime * p.z_minus;
    let pair = |zpm: Complex64| -> Result<Complex64> {
        Ok(zt(omega - zpm)? - zt(omega + zpm)?)
    };
    let l3 = p.d + r.h_minus / PI * pair(p.z_minus)? - r.h_plus / PI * pair(p.z_plus)?;
    // ζ(ω′+ω+z) = ζ(ω−ω′+z) + 2η′ keeps the argument inside the cell
    let pair4 = |zpm: Complex64| -> Result<Complex64> {
        Ok(zt(omega + hp.omega_prime - zpm)?
            - zt(omega - hp.omega_prime + zpm)?
            - 2.0 * hp.eta_prime)
    };
    let l4 = p.d + r.h_minus / PI * pair4(p.z_minus)? - r.h_plus / PI * pair4(p.z_plus)?;
    Ok([l1, l2, l3, l4])
}

/// Residual vector `(Im L₁ + h, Re L₂ + δ, Im L₃, Im L₄)`; all four vanish at
/// a solution.
pub fn residual(
    p: &MappingParams,
    r: &RegionSpec,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<[f64; 4]> {
    let [l1, l2, l3, l4] = complex_lhs(p, r, lat, table)?;
    Ok([l1.im + r.h, l2.re + r.delta, l3.im, l4.im])
}

/// Analytic Jacobian of [`residual`] with respect to `(γ, Im D, Im z⁻, Im z⁺)`.
pub fn jacobian(
    p: &MappingParams,
    r: &RegionSpec,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<[[f64; 4]; 4]> {
    let hp = &lat.hp;
    let inv = lat.inv;
    let i = Complex64::new(0.0, 1.0);
    let omega = Complex64::new(hp.omega, 0.0);

    let (dg2, dg3) = d_invariants_dgamma(p.gamma)?;
    let der = d_periods(inv, hp, table)?;
    let along = |d: [f64; 2]| d[0] * dg2 + d[1] * dg3;
    let w_g = along(der.d_omega);
    let wp_g = along(der.d_im_omega_prime);
    let eta_g = along(der.d_eta);
    let etap_g = along(der.d_im_eta_prime);

    // per-point data: ζ jet plus the γ-derivative of the argument
    let zj = |u: Complex64| zeta_jet(u, inv, table);
    let dgamma_of = |jet: crate::sigma::ZetaJet, darg: Complex64| {
        jet.d_z * darg + jet.d_g2 * dg2 + jet.d_g3 * dg3
    };

    // row 1: Im of  −Dω − (2h⁺/π)ηz⁺ + (2h⁻/π)ηz⁻
    let c_minus = 2.0 * r.h_minus / PI;
    let c_plus = 2.0 * r.h_plus / PI;
    let row1 = {
        let dgamma = -p.d * w_g - c_plus * eta_g * p.z_plus + c_minus * eta_g * p.z_minus;
        [
            dgamma.im,
            (-i * hp.omega).im,
            (c_minus * hp.eta * i).im,
            (-c_plus * hp.eta * i).im,
        ]
    };

    // row 2: Re of  −Dω′ − (2h⁺/π)η′z⁺ + (2h⁻/π)η′z⁻
    let row2 = {
        let dgamma = -p.d * (i * wp_g) - c_plus * (i * etap_g) * p.z_plus
            + c_minus * (i * etap_g) * p.z_minus;
        [
            dgamma.re,
            (-i * hp.omega_prime).re,
            (c_minus * hp.eta_prime * i).re,
            (-c_plus * hp.eta_prime * i).re,
        ]
    };

    // row 3: Im of  D + (h⁻/π)(ζ(ω−z⁻)−ζ(ω+z⁻)) − (h⁺/π)(ζ(ω−z⁺)−ζ(ω+z⁺))
    let (a1, a2) = (zj(omega - p.z_minus)?, zj(omega + p.z_minus)?);
    let (a3, a4) = (zj(omega - p.z_plus)?, zj(omega + p.z_plus)?);
    let hm = r.h_minus / PI;
    let hp_ = r.h_plus / PI;
    let row3 = {
        let dgamma = hm * (dgamma_of(a1, w_g.into()) - dgamma_of(a2, w_g.into()))
            - hp_ * (dgamma_of(a3, w_g.into()) - dgamma_of(a4, w_g.into()));
        let dv_minus = hm * (-i * a1.d_z - i * a2.d_z);
        let dv_plus = -hp_ * (-i * a3.d_z - i * a4.d_z);
        [dgamma.im, 1.0, dv_minus.im, dv_plus.im]
    };

    // row 4: Im of  D + (h⁻/π)(ζ(b⁻)−ζ(c⁻)−2η′) − (h⁺/π)(ζ(b⁺)−ζ(c⁺)−2η′)
    // with b = ω+ω′−z, c = ω−ω′+z
    let (b1, c1) = (
        zj(omega + hp.omega_prime - p.z_minus)?,
        zj(omega - hp.omega_prime + p.z_minus)?,
    );
    let (b2, c2) = (
        zj(omega + hp.omega_prime - p.z_plus)?,
        zj(omega - hp.omega_prime + p.z_plus)?,
    );
    let row4 = {
        let darg_b = Complex64::new(w_g, wp_g);
        let darg_c = Complex64::new(w_g, -wp_g);
        let detap = 2.0 * i * etap_g;
        let dgamma = hm * (dgamma_of(b1, darg_b) - dgamma_of(c1, darg_c) - detap)
            - hp_ * (dgamma_of(b2, darg_b) - dgamma_of(c2, darg_c) - detap);
        let dv_minus = hm * (-i * b1.d_z - i * c1.d_z);
        let dv_plus = -hp_ * (-i * b2.d_z - i * c2.d_z);
        [dgamma.im, 1.0, dv_minus.im, dv_plus.im]
    };

    Ok([row1, row2, row3, row4])
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Residual norm target.
    pub tol: f64,
    pub max_iter: usize,
    /// Multistart grid for γ₀.
    pub gamma_grid: Vec<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            gamma_grid: (0..11).map(|k| -0.15 + 0.03 * k as f64).collect(),
        }
    }
}

/// Outcome of the multistart solve: the primary solution plus any genuinely
/// distinct quadruples found from other starts.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub params: MappingParams,
    pub lattice: LatticeData,
    pub residual_norm: f64,
    pub iterations: usize,
    pub distinct: Vec<MappingParams>,
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn solve_linear4(a: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 4]> {
    let mut m = *a;
    let mut rhs = *b;
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..4 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

struct Iterate {
    u: [f64; 4],
    lat: LatticeData,
    res: [f64; 4],
    norm: f64,
}

/// Clamp a raw unknown vector into the open domain (γ range, ordering of the
/// imaginary parts, pole margins against `Im ω′`).
fn project(u: [f64; 4], im_omega_prime: f64) -> [f64; 4] {
    let margin = 1e-7;
    let gamma = u[0].clamp(-1.0 / 6.0 + 1e-9, 1.0 / 6.0 - 1e-9);
    let top = im_omega_prime - margin;
    let mut v_minus = u[2].clamp(margin, top);
    let mut v_plus = u[3].clamp(margin, top);
    if v_minus >= v_plus {
        let mid = 0.5 * (v_minus + v_plus);
        v_minus = (mid - margin).max(margin);
        v_plus = (mid + margin).min(top);
    }
    [gamma, u[1], v_minus, v_plus]
}

fn evaluate(u: [f64; 4], r: &RegionSpec, table: &SeriesTable) -> Result<Iterate> {
    let lat = lattice_for_gamma(u[0], table)?;
    let u = project(u, lat.hp.im_omega_prime());
    let p = MappingParams::from_imag(u[0], u[1], u[2], u[3]);
    let res = residual(&p, r, &lat, table)?;
    let norm = norm4(&res);
    Ok(Iterate { u, lat, res, norm })
}

fn newton_from(
    u0: [f64; 4],
    r: &RegionSpec,
    table: &SeriesTable,
    opts: &SolveOptions,
) -> Result<(Iterate, usize)> {
    let mut cur = evaluate(project(u0, f64::INFINITY), r, table)?;
    for iter in 0..opts.max_iter {
        if cur.norm < opts.tol {
            return Ok((cur, iter));
        }
        let p = MappingParams::from_imag(cur.u[0], cur.u[1], cur.u[2], cur.u[3]);
        let jac = jacobian(&p, r, &cur.lat, table)?;
        let step = solve_linear4(&jac, &cur.res).ok_or(Error::Convergence {
            context: "mapping solve: singular Jacobian",
            iterations: iter,
            best: cur.norm,
        })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = [
                cur.u[0] - lambda * step[0],
                cur.u[1] - lambda * step[1],
                cur.u[2] - lambda * step[2],
                cur.u[3] - lambda * step[3],
            ];
            match evaluate(cand, r, table) {
                Ok(next) if next.norm < cur.norm => {
                    cur = next;
                    accepted = true;
                    break;
                }
                _ => lambda *= 0.5,
            }
        }
        if !accepted {
            return Err(Error::Convergence {
                context: "mapping solve: no descent",
                iterations: iter,
                best: cur.norm,
            });
        }
    }
    if cur.norm < opts.tol {
        Ok((cur, opts.max_iter))
    } else {
        Err(Error::Convergence {
            context: "mapping solve",
            iterations: opts.max_iter,
            best: cur.norm,
        })
    }
}

/// Multistart damped Newton for the four-parameter system.
///
/// Initialization: solve the δ = 0 system for the heights, stretch `z±` by
/// `Im ω′(γ₀)/(π/2)` for every γ₀ on the grid, and read `D` off the first
/// equation. Distinct converged quadruples are reported, the best residual
/// wins as the primary.
pub fn solve_report(
    r: &RegionSpec,
    opts: &SolveOptions,
    table: &SeriesTable,
) -> Result<SolveReport> {
    r.validate()?;
    if r.delta == 0.0 {
        return Err(Error::Domain {
            reason: "delta = 0: use the degenerate solver".into(),
        });
    }
    let deg = solve_degenerate_heights(r)?;
    let (vm0, vp0) = (deg.im_z_minus(), deg.im_z_plus());

    let mut best: Option<(Iterate, usize)> = None;
    let mut distinct: Vec<MappingParams> = Vec::new();
    let mut last_err: Option<Error> = None;

    for &gamma0 in &opts.gamma_grid {
        let lat0 = match lattice_for_gamma(gamma0, table) {
            Ok(l) => l,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let stretch = lat0.hp.im_omega_prime() / std::f64::consts::FRAC_PI_2;
        let (vm, vp) = (vm0 * stretch, vp0 * stretch);
        let d0 = (r.h
            - 2.0 * r.h_plus / PI * lat0.hp.eta * vp
            + 2.0 * r.h_minus / PI * lat0.hp.eta * vm)
            / lat0.hp.omega;
        match newton_from([gamma0, d0, vm, vp], r, table, opts) {
            Ok((it, iters)) => {
                let p = MappingParams::from_imag(it.u[0], it.u[1], it.u[2], it.u[3]);
                let is_new = distinct.iter().all(|q| {
                    (q.gamma - p.gamma).abs()
                        + (q.im_d() - p.im_d()).abs()
                        + (q.im_z_minus() - p.im_z_minus()).abs()
                        + (q.im_z_plus() - p.im_z_plus()).abs()
                        > 1e-6
                });
                if is_new {
                    distinct.push(p);
                }
                if best.as_ref().map_or(true, |(b, _)| it.norm < b.norm) {
                    best = Some((it, iters));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }

    match best {
        Some((it, iterations)) => Ok(SolveReport {
            params: MappingParams::from_imag(it.u[0], it.u[1], it.u[2], it.u[3]),
            lattice: it.lat,
            residual_norm: it.norm,
            iterations,
            distinct,
        }),
        None => Err(last_err.unwrap_or(Error::Convergence {
            context: "mapping solve: no start converged",
            iterations: 0,
            best: f64::INFINITY,
        })),
    }
}

/// Convenience wrapper returning just the parameters.
pub fn solve(r: &RegionSpec, opts: &SolveOptions, table: &SeriesTable) -> Result<MappingParams> {
    Ok(solve_report(r, opts, table)?.params)
}

/// Logarithm with the cut along the negative imaginary half-line:
/// argument in `(−π/2, 3π/2]`, `ln 1 = 0`.
pub(crate) fn ln_cut(w: Complex64) -> Result<Complex64> {
    if w.re == 0.0 && w.im < 0.0 {
        return Err(Error::Branch { value: w });
    }
    let mut arg = w.im.atan2(w.re);
    if arg < -std::f64::consts::FRAC_PI_2 {
        arg += std::f64::consts::TAU;
    } else if arg == -std::f64::consts::FRAC_PI_2 {
        return Err(Error::Branch { value: w });
    }
    Ok(Complex64::new(w.norm().ln(), arg))
}

/// The conformal map of the rectangle `(0, ω′, ω′−ω, −ω)` onto the region:
/// `Q(z) = Dz + (h⁻/π) ln(σ(z−z⁻)/σ(z+z⁻)) − (h⁺/π) ln(σ(z−z⁺)/σ(z+z⁺))
/// − i(h⁻−h⁺)`, sigma ratios taken through the quasiperiodic reduction.
pub fn q_map(
    z: Complex64,
    p: &MappingParams,
    r: &RegionSpec,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<Complex64> {
    let ratio = |pole: Complex64| -> Result<Complex64> {
        let num = sigma_reduced(z - pole, lat.inv, &lat.hp, table);
        let den = sigma_reduced(z + pole, lat.inv, &lat.hp, table);
        let floor = crate::sigma::POLE_FLOOR * (1.0 + z.norm());
        if num.sigma.norm() < floor || den.sigma.norm() < floor {
            return Err(Error::Pole {
                z,
                mag: num.sigma.norm().min(den.sigma.norm()),
            });
        }
        Ok(num.sigma / den.sigma * (num.log_scale - den.log_scale).exp())
    };
    let l_minus = ln_cut(ratio(p.z_minus)?)?;
    let l_plus = ln_cut(ratio(p.z_plus)?)?;
    Ok(p.d * z + r.h_minus / PI * l_minus - r.h_plus / PI * l_plus
        - Complex64::new(0.0, r.h_minus - r.h_plus))
}

/// Invert the Abel coordinate: the unique `z` in the closed rectangle
/// `[−ω, 0] × [0, Im ω′]` with `℘(z) = x`, for `x` in the closed upper
/// half-plane.
pub fn abel_inverse(x: Complex64, lat: &LatticeData, table: &SeriesTable) -> Result<Complex64> {
    abel_inverse_seeded(x, None, lat, table)
}

/// [`abel_inverse`] with an optional warm start (used for continuation along
/// streamlines, where consecutive targets are close).
pub fn abel_inverse_seeded(
    x: Complex64,
    seed: Option<Complex64>,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<Complex64> {
    let scale = 1.0 + x.norm();
    if x.im < -1e-9 * scale {
        return Err(Error::Range {
            what: "Im x",
            value: x.im,
            range: "closed upper half-plane",
        });
    }
    let hp = &lat.hp;
    let (w, wp_im) = (hp.omega, hp.im_omega_prime());
    let roots = [lat.roots.x1, lat.roots.x2, lat.roots.x3];
    let vertices = [
        hp.omega_prime,
        hp.omega_prime - Complex64::new(w, 0.0),
        Complex64::new(-w, 0.0),
    ];
    // exact branch points land exactly on the corners
    for (rk, vk) in roots.iter().zip(vertices) {
        if (x - rk).norm() < 1e-13 * scale {
            return Ok(vk);
        }
    }

    let mut seeds: Vec<Complex64> = Vec::new();
    if let Some(s) = seed {
        seeds.push(s);
    }
    if x.norm() > 8.0 {
        // ℘(z) ~ 1/z² near the origin corner
        seeds.push(-1.0 / x.sqrt());
    }
    // quadratic expansion around each corner: ℘(v+u) ≈ x_k + ℘''(v) u²/2
    for (rk, vk) in roots.iter().zip(vertices) {
        if (x - rk).norm() < 0.15 {
            let ddp = 6.0 * rk * rk - lat.inv.g2 / 2.0;
            let u = (2.0 * (x - rk) / ddp).sqrt();
            seeds.push(vk + u);
            seeds.push(vk - u);
        }
    }
    // coarse grid over the open rectangle
    let grid = 10;
    let mut best = Complex64::new(-0.5 * w, 0.5 * wp_im);
    let mut best_err = f64::INFINITY;
    for i in 1..grid {
        for j in 1..grid {
            let z = Complex64::new(-w * i as f64 / grid as f64, wp_im * j as f64 / grid as f64);
            if let Ok(p) = crate::sigma::wp(z, lat.inv, table) {
                let err = (p - x).norm();
                if err < best_err {
                    best_err = err;
                    best = z;
                }
            }
        }
    }
    seeds.push(best);

    for seed in seeds {
        if let Some(z) = newton_wp(x, seed, lat, table) {
            return Ok(z);
        }
    }
    Err(Error::Convergence {
        context: "abel inverse",
        iterations: 100,
        best: best_err,
    })
}

fn newton_wp(
    x: Complex64,
    seed: Complex64,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Option<Complex64> {
    let mut z = seed;
    let scale = 1.0 + x.norm();
    let mut converged = false;
    for _ in 0..100 {
        let p = wp_at(z, lat.inv, &lat.hp, table).ok()?;
        let dp = wp_prime_at(z, lat.inv, &lat.hp, table).ok()?;
        if dp.norm() < 1e-14 * scale {
            break;
        }
        let mut step = (p - x) / dp;
        // near a branch point ℘ − x has a double zero; take the doubled step
        if step.norm() * dp.norm() < 0.02 * (p - x).norm().sqrt() * scale.sqrt() {
            step *= 1.0;
        }
        if step.norm() > 0.5 {
            step *= 0.5 / step.norm();
        }
        z -= step;
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            converged = true;
            break;
        }
    }
    if !converged {
        // multiplicity-2 fallback for targets at/near branch points
        for _ in 0..100 {
            let p = wp_at(z, lat.inv, &lat.hp, table).ok()?;
            let dp = wp_prime_at(z, lat.inv, &lat.hp, table).ok()?;
            if dp.norm() < 1e-300 {
                break;
            }
            let step = 2.0 * (p - x) / dp;
            z -= step;
            if step.norm() < 1e-11 * (1.0 + z.norm()) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return None;
    }
    let z = canonical_rectangle_point(z, &lat.hp)?;
    let p = wp_at(z, lat.inv, &lat.hp, table).ok()?;
    let err_scale = (1.0 + x.norm()).powf(1.5);
    if (p - x).norm() <= 1e-7 * err_scale {
        Some(z)
    } else {
        None
    }
}

/// Map a lattice point to its representative in the closed rectangle
/// `[−ω, 0] × [0, Im ω′]`, using the evenness of ℘ when needed.
fn canonical_rectangle_point(z: Complex64, hp: &HalfPeriods) -> Option<Complex64> {
    let (w, wp_im) = (hp.omega, hp.im_omega_prime());
    let snap = 1e-10 * (1.0 + w + wp_im);
    for cand in [z, -z] {
        // reduce into [−ω, ω) × [−Im ω′, Im ω′)
        let m = ((cand.re + w) / (2.0 * w)).floor();
        let n = ((cand.im + wp_im) / (2.0 * wp_im)).floor();
        let mut p = Complex64::new(cand.re - 2.0 * m * w, cand.im - 2.0 * n * wp_im);
        // the cell's right/bottom edges are the rectangle's left/top lattice
        // lines; lift them across before snapping fuzz onto the closure
        if p.re > w - snap {
            p.re = -w;
        }
        if p.im < -wp_im + snap {
            p.im += 2.0 * wp_im;
        }
        if p.re.abs() < snap {
            p.re = 0.0;
        }
        if (p.re + w).abs() < snap {
            p.re = -w;
        }
        if p.im.abs() < snap {
            p.im = 0.0;
        }
        if (p.im - wp_im).abs() < snap {
            p.im = wp_im;
        }
        if (-w..=0.0).contains(&p.re) && (0.0..=wp_im).contains(&p.im) {
            return Some(p);
        }
    }
    None
}
