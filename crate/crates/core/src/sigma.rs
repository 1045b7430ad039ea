//! Entire Weierstrass sigma function `σ(z, g₂, g₃)` evaluated from its Taylor
//! series
//!
//! ```text
//! σ(z, g₂, g₃) = Σ_{m,n ≥ 0} a_{mn} g₂^m g₃^n z^{4m+6n+1},
//! ```
//!
//! where the coefficients satisfy the recursion
//!
//! ```text
//! a_{mn} = [12(m+1) a_{m+1,n-1} + (2/3)(n+1) a_{m-2,n+1} - (1/12) a_{m-1,n}]
//!          / ((4m+6n+1)(4m+6n)),      a_{00} = 1,
//! ```
//!
//! with `a_{mn} = 0` for negative indices. All exponents are odd, so σ is odd
//! in `z`; the weight of `a_{mn}` is `2m+3n` and the z-degree is `2(2m+3n)+1`.
//!
//! The table is generated once in exact rational arithmetic and converted to
//! floats, so the deep recursion carries no rounding. Evaluation returns a jet
//! (value plus the z- and parameter-derivatives) which is what the lattice and
//! mapping layers consume.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Growth-bound base: coefficients obey `|a_{mn}| <= C q^{2m+3n}/(2m+3n)!`
/// for every q above the critical value `(28 + sqrt(811))/36 ≈ 1.569`.
pub const GROWTH_Q: f64 = 1.6;

/// Default table depth: weights `2m+3n <= 60`, z-degree up to 121.
pub const DEFAULT_MAX_WEIGHT: u32 = 60;

/// Default tolerance the guarded evaluation path checks the tail bound against.
pub const DEFAULT_EVAL_TOL: f64 = 1e-9;

/// Relative floor below which |σ| is treated as a lattice point.
pub const POLE_FLOOR: f64 = 1e-12;

/// Invariants (g₂, g₃) of the cubic `F(x) = 4x³ − g₂x − g₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub g2: f64,
    pub g3: f64,
}

impl Invariants {
    pub const fn new(g2: f64, g3: f64) -> Self {
        Self { g2, g3 }
    }

    /// Invariants of the curve with the double root, `(4/3, −8/27)`.
    pub const DEGENERATE: Invariants = Invariants {
        g2: 4.0 / 3.0,
        g3: -8.0 / 27.0,
    };

    /// Discriminant `Δ = g₂³ − 27 g₃²`; positive iff the cubic has three
    /// distinct real roots.
    pub fn discriminant(&self) -> f64 {
        self.g2.powi(3) - 27.0 * self.g3 * self.g3
    }
}

/// One Taylor coefficient `a_{mn}`.
#[derive(Debug, Clone)]
pub struct TableEntry {
    pub m: u32,
    pub n: u32,
    /// Weight `2m + 3n`.
    pub weight: u32,
    /// `a_{mn}` rounded to f64.
    pub coeff: f64,
    /// Exact value of `a_{mn}`.
    pub exact: BigRational,
}

/// Value of σ and its derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct SigmaJet {
    pub value: Complex64,
    pub d_z: Complex64,
    pub d_zz: Complex64,
    pub d_zzz: Complex64,
    pub d_g2: Complex64,
    pub d_g3: Complex64,
}

/// [`SigmaJet`] extended with the mixed partials `∂²σ/∂z∂g₂` and `∂²σ/∂z∂g₃`,
/// needed to differentiate ζ with respect to the invariants.
#[derive(Debug, Clone, Copy)]
pub struct SigmaJetExt {
    pub jet: SigmaJet,
    pub d_zg2: Complex64,
    pub d_zg3: Complex64,
}

/// Triangular table of sigma Taylor coefficients up to a fixed weight.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    max_weight: u32,
    /// Entries in the generation well-order: ascending `m+n`, then `n`.
    entries: Vec<TableEntry>,
    /// Empirical constant of the growth bound with q = [`GROWTH_Q`].
    c_estimate: f64,
}

impl SeriesTable {
    /// Generate the table for all `2m + 3n <= max_weight`.
    ///
    /// The recursion is evaluated in the well-order "ascending m+n, then n";
    /// every right-hand side index is strictly smaller in that order and has
    /// weight at most `2m+3n-1`, so the table is self-contained.
    pub fn build(max_weight: u32) -> Self {
        let mut exact: HashMap<(i64, i64), BigRational> = HashMap::new();
        let mut entries = Vec::new();

        let get = |map: &HashMap<(i64, i64), BigRational>, m: i64, n: i64| -> BigRational {
            if m < 0 || n < 0 {
                return BigRational::zero();
            }
            map.get(&(m, n)).cloned().unwrap_or_else(BigRational::zero)
        };

        let s_max = max_weight / 2;
        for s in 0..=s_max {
            for n in 0..=s {
                let m = s - n;
                let weight = 2 * m + 3 * n;
                if weight > max_weight {
                    continue;
                }
                let value = if m == 0 && n == 0 {
                    BigRational::one()
                } else {
                    let (mi, ni) = (m as i64, n as i64);
                    let term1 = BigRational::from_integer(BigInt::from(12 * (mi + 1)))
                        * get(&exact, mi + 1, ni - 1);
                    let term2 = BigRational::new(BigInt::from(2 * (ni + 1)), BigInt::from(3))
                        * get(&exact, mi - 2, ni + 1);
                    let term3 = BigRational::new(BigInt::from(1), BigInt::from(12))
                        * get(&exact, mi - 1, ni);
                    let k = 4 * mi + 6 * ni;
                    (term1 + term2 - term3)
                        / BigRational::from_integer(BigInt::from((k + 1) * k))
                };
                exact.insert((m as i64, n as i64), value.clone());
                entries.push(TableEntry {
                    m,
                    n,
                    weight,
                    coeff: ratio_to_f64(&value),
                    exact: value,
                });
            }
        }

        let c_estimate = growth_constant(&entries);
        Self {
            max_weight,
            entries,
            c_estimate,
        }
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    /// Empirical constant `C = max |a_{mn}| (2m+3n)! / q^{2m+3n}`.
    pub fn c_estimate(&self) -> f64 {
        self.c_estimate
    }

    pub fn coefficient(&self, m: u32, n: u32) -> Option<&TableEntry> {
        self.entries.iter().find(|e| e.m == m && e.n == n)
    }

    /// Re-evaluate the recursion for every stored entry from its neighbours;
    /// returns the first `(m, n)` whose stored value disagrees. Exact rational
    /// comparison, so any corruption is detected.
    pub fn check_recursion(&self) -> std::result::Result<(), (u32, u32)> {
        let map: HashMap<(i64, i64), &BigRational> = self
            .entries
            .iter()
            .map(|e| ((e.m as i64, e.n as i64), &e.exact))
            .collect();
        let get = |m: i64, n: i64| -> BigRational {
            if m < 0 || n < 0 {
                return BigRational::zero();
            }
            map.get(&(m, n)).cloned().cloned().unwrap_or_else(BigRational::zero)
        };
        for e in &self.entries {
            let (m, n) = (e.m as i64, e.n as i64);
            let expected = if m == 0 && n == 0 {
                BigRational::one()
            } else {
                let k = 4 * m + 6 * n;
                (BigRational::from_integer(BigInt::from(12 * (m + 1))) * get(m + 1, n - 1)
                    + BigRational::new(BigInt::from(2 * (n + 1)), BigInt::from(3))
                        * get(m - 2, n + 1)
                    - BigRational::new(BigInt::from(1), BigInt::from(12)) * get(m - 1, n))
                    / BigRational::from_integer(BigInt::from((k + 1) * k))
            };
            if expected != e.exact {
                return Err((e.m, e.n));
            }
        }
        Ok(())
    }

    /// Envelope of the truncation error for `|z| = abs_z`:
    /// `Σ_{k > W} C q^k/k! · max(1,|g₂|,|g₃|)^k · abs_z^{2k+1}`.
    ///
    /// A coarse upper estimate (the parameter powers are enveloped by
    /// `max(1,|g₂|,|g₃|)^k`), monotone increasing in `abs_z`.
    pub fn tail_bound(&self, abs_z: f64, inv: Invariants) -> f64 {
        let mag = 1f64.max(inv.g2.abs()).max(inv.g3.abs());
        let z2 = abs_z * abs_z;
        // term_k = C q^k M^k z^{2k+1} / k!
        let mut k = self.max_weight as f64 + 1.0;
        let mut term = self.c_estimate * abs_z;
        // build term at k = W+1 in log space to dodge overflow of the pieces
        let logt = (self.max_weight as f64 + 1.0) * (GROWTH_Q * mag * z2).ln()
            - ln_factorial(self.max_weight + 1);
        if logt > 700.0 {
            return f64::INFINITY;
        }
        term *= logt.exp();
        let mut sum = 0.0;
        for _ in 0..2000 {
            sum += term;
            k += 1.0;
            let ratio = GROWTH_Q * mag * z2 / k;
            term *= ratio;
            if ratio < 1.0 && term < sum.abs() * 1e-18 + 1e-308 {
                // close with the geometric tail
                sum += term / (1.0 - ratio);
                break;
            }
            if !sum.is_finite() {
                return f64::INFINITY;
            }
        }
        sum
    }

    /// Guarded evaluation with the default tolerance ([`DEFAULT_EVAL_TOL`]).
    pub fn jet(&self, z: Complex64, inv: Invariants) -> Result<SigmaJet> {
        self.jet_with_tol(z, inv, DEFAULT_EVAL_TOL)
    }

    /// Evaluation that first checks `tail_bound(|z|) <= tol`.
    pub fn jet_with_tol(&self, z: Complex64, inv: Invariants, tol: f64) -> Result<SigmaJet> {
        let bound = self.tail_bound(z.norm(), inv);
        if bound > tol {
            return Err(Error::Truncation {
                bound,
                tol,
                abs_z: z.norm(),
            });
        }
        Ok(self.jet_ext_unchecked(z, inv).jet)
    }

    /// Unguarded evaluation. Used by the lattice and solver layers whose
    /// argument ranges are kept inside the fundamental cell by construction
    /// and whose accuracy is cross-checked against independent oracles; the
    /// q = 1.6 envelope is orders of magnitude too pessimistic there.
    pub fn jet_unchecked(&self, z: Complex64, inv: Invariants) -> SigmaJet {
        self.jet_ext_unchecked(z, inv).jet
    }

    /// Full jet including the mixed partials.
    pub fn jet_ext_unchecked(&self, z: Complex64, inv: Invariants) -> SigmaJetExt {
        let w = self.max_weight as usize;
        let m_max = w / 2;
        let n_max = w / 3;

        let mut g2p = vec![1.0f64; m_max + 1];
        for i in 1..=m_max {
            g2p[i] = g2p[i - 1] * inv.g2;
        }
        let mut g3p = vec![1.0f64; n_max + 1];
        for i in 1..=n_max {
            g3p[i] = g3p[i - 1] * inv.g3;
        }
        let z2 = z * z;
        let mut zp = vec![Complex64::new(1.0, 0.0); w + 1];
        for i in 1..=w {
            zp[i] = zp[i - 1] * z2;
        }

        let zero = Complex64::new(0.0, 0.0);
        let (mut s_val, mut s_dz, mut s_dzz, mut s_dzzz) = (zero, zero, zero, zero);
        let (mut s_g2, mut s_g3, mut s_zg2, mut s_zg3) = (zero, zero, zero, zero);

        // highest weights first: small terms accumulate before the large ones
        for e in self.entries.iter().rev() {
            let (m, n, k) = (e.m as usize, e.n as usize, e.weight as usize);
            let a = e.coeff;
            let gg = g2p[m] * g3p[n];
            let base = a * gg;
            let kk = k as f64;
            s_val += base * zp[k];
            s_dz += base * (2.0 * kk + 1.0) * zp[k];
            if k >= 1 {
                s_dzz += base * (2.0 * kk + 1.0) * (2.0 * kk) * zp[k - 1];
                s_dzzz += base * (2.0 * kk + 1.0) * (2.0 * kk) * (2.0 * kk - 1.0) * zp[k - 1];
            }
            if m >= 1 {
                let b = a * (m as f64) * g2p[m - 1] * g3p[n];
                s_g2 += b * zp[k];
                s_zg2 += b * (2.0 * kk + 1.0) * zp[k];
            }
            if n >= 1 {
                let b = a * (n as f64) * g2p[m] * g3p[n - 1];
                s_g3 += b * zp[k];
                s_zg3 += b * (2.0 * kk + 1.0) * zp[k];
            }
        }

        SigmaJetExt {
            jet: SigmaJet {
                value: z * s_val,
                d_z: s_dz,
                d_zz: z * s_dzz,
                d_zzz: s_dzzz,
                d_g2: z * s_g2,
                d_g3: z * s_g3,
            },
            d_zg2: s_zg2,
            d_zg3: s_zg3,
        }
    }

    /// Dump as CSV rows `m,n,numerator,denominator`.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("m,n,numerator,denominator\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e.m,
                e.n,
                e.exact.numer(),
                e.exact.denom()
            );
        }
        out
    }

    /// Parse a CSV dump produced by [`SeriesTable::dump_csv`]. The loaded
    /// table is *not* revalidated here; run [`SeriesTable::check_recursion`]
    /// (the self-check does) to detect corrupted rows.
    pub fn load_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut max_weight = 0u32;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('m')) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Domain {
                    reason: format!("table CSV line {}: expected 4 fields", i + 1),
                });
            }
            let parse_err = |what: &str| Error::Domain {
                reason: format!("table CSV line {}: bad {what}", i + 1),
            };
            let m: u32 = parts[0].parse().map_err(|_| parse_err("m"))?;
            let n: u32 = parts[1].parse().map_err(|_| parse_err("n"))?;
            let numer: BigInt = parts[2].parse().map_err(|_| parse_err("numerator"))?;
            let denom: BigInt = parts[3].parse().map_err(|_| parse_err("denominator"))?;
            if denom.is_zero() {
                return Err(parse_err("denominator"));
            }
            let exact = BigRational::new(numer, denom);
            let weight = 2 * m + 3 * n;
            max_weight = max_weight.max(weight);
            entries.push(TableEntry {
                m,
                n,
                weight,
                coeff: ratio_to_f64(&exact),
                exact,
            });
        }
        if entries.is_empty() {
            return Err(Error::Domain {
                reason: "table CSV contains no rows".into(),
            });
        }
        let c_estimate = growth_constant(&entries);
        Ok(Self {
            max_weight,
            entries,
            c_estimate,
        })
    }
}

/// `σ, σ', σ'', σ''', ∂σ/∂g₂, ∂σ/∂g₃` at `z` (guarded path).
pub fn sigma_series(z: Complex64, inv: Invariants, table: &SeriesTable) -> Result<SigmaJet> {
    table.jet(z, inv)
}

fn pole_guard(z: Complex64, value: Complex64) -> Result<()> {
    let floor = POLE_FLOOR * (1.0 + z.norm());
    if value.norm() < floor {
        return Err(Error::Pole {
            z,
            mag: value.norm(),
        });
    }
    Ok(())
}

/// ζ = σ'/σ.
pub fn zeta(z: Complex64, inv: Invariants, table: &SeriesTable) -> Result<Complex64> {
    let jet = table.jet_unchecked(z, inv);
    pole_guard(z, jet.value)?;
    Ok(jet.d_z / jet.value)
}

/// ℘ = (σ'² − σσ'')/σ².
pub fn wp(z: Complex64, inv: Invariants, table: &SeriesTable) -> Result<Complex64> {
    let jet = table.jet_unchecked(z, inv);
    pole_guard(z, jet.value)?;
    Ok((jet.d_z * jet.d_z - jet.value * jet.d_zz) / (jet.value * jet.value))
}

/// ℘' by differentiating the ℘ quotient; uses σ'''.
pub fn wp_prime(z: Complex64, inv: Invariants, table: &SeriesTable) -> Result<Complex64> {
    let jet = table.jet_unchecked(z, inv);
    pole_guard(z, jet.value)?;
    let s = jet.value;
    let n = jet.d_z * jet.d_z - s * jet.d_zz;
    let n_prime = jet.d_z * jet.d_zz - s * jet.d_zzz;
    Ok((n_prime * s - 2.0 * jet.d_z * n) / (s * s * s))
}

/// ζ together with its z- and parameter-derivatives at fixed z.
#[derive(Debug, Clone, Copy)]
pub struct ZetaJet {
    pub value: Complex64,
    /// `ζ' = −℘`.
    pub d_z: Complex64,
    pub d_g2: Complex64,
    pub d_g3: Complex64,
}

impl ZetaJet {
    /// `℘ = −ζ'`.
    pub fn wp(&self) -> Complex64 {
        -self.d_z
    }
}

/// ζ and its derivatives, for the solver's analytic Jacobian.
pub fn zeta_jet(z: Complex64, inv: Invariants, table: &SeriesTable) -> Result<ZetaJet> {
    let ext = table.jet_ext_unchecked(z, inv);
    let jet = ext.jet;
    pole_guard(z, jet.value)?;
    let s = jet.value;
    let value = jet.d_z / s;
    Ok(ZetaJet {
        value,
        d_z: (jet.d_zz * s - jet.d_z * jet.d_z) / (s * s),
        d_g2: (ext.d_zg2 - value * jet.d_g2) / s,
        d_g3: (ext.d_zg3 - value * jet.d_g3) / s,
    })
}

/// Closed form at the degenerate invariants: `σ = e^{−z²/6} sinh z`.
pub fn sigma_degenerate(z: Complex64) -> Complex64 {
    (-z * z / 6.0).exp() * z.sinh()
}

/// `ζ = coth z − z/3` at the degenerate invariants.
pub fn zeta_degenerate(z: Complex64) -> Result<Complex64> {
    let s = z.sinh();
    pole_guard(z, s)?;
    Ok(z.cosh() / s - z / 3.0)
}

/// `℘ = 1/sinh²z + 1/3` at the degenerate invariants.
pub fn wp_degenerate(z: Complex64) -> Result<Complex64> {
    let s = z.sinh();
    pole_guard(z, s)?;
    Ok(1.0 / (s * s) + Complex64::new(1.0 / 3.0, 0.0))
}

/// `℘' = −2 cosh z / sinh³ z` at the degenerate invariants.
pub fn wp_prime_degenerate(z: Complex64) -> Result<Complex64> {
    let s = z.sinh();
    pole_guard(z, s)?;
    Ok(-2.0 * z.cosh() / (s * s * s))
}

fn growth_constant(entries: &[TableEntry]) -> f64 {
    let mut c = 0.0f64;
    for e in entries {
        let ratio = e.coeff.abs() * (ln_factorial(e.weight) - e.weight as f64 * GROWTH_Q.ln()).exp();
        c = c.max(ratio);
    }
    c
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k as u64).map(|i| (i as f64).ln()).sum()
}

/// Convert an exact rational to f64 through a 80-bit scaled integer quotient,
/// immune to numerator/denominator individually overflowing f64.
fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    let shift = den.bits() as i64 - num.bits() as i64 + 80;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let qf = q.to_f64().unwrap_or(f64::NAN);
    qf * 2f64.powi(-shift as i32)
}

#[cfg(test)]
pub(crate) fn test_table() -> &'static SeriesTable {
    use std::sync::OnceLock;
    static TABLE: OnceLock<SeriesTable> = OnceLock::new();
    TABLE.get_or_init(|| SeriesTable::build(DEFAULT_MAX_WEIGHT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_weight_zero_is_just_a00() {
        let t = SeriesTable::build(0);
        assert_eq!(t.entries().len(), 1);
        assert_eq!(t.entries()[0].exact, BigRational::one());
        assert_eq!((t.entries()[0].m, t.entries()[0].n), (0, 0));
    }

    #[test]
    fn low_order_coefficients_match_hand_evaluation() {
        // (1,0): numerator -(1/12)a00, denominator 5*4 = 20
        // (0,1): numerator 12*a10, denominator 7*6 = 42
        // (2,0): numerator (2/3)a01 - (1/12)a10, denominator 9*8 = 72
        // (1,1): numerator 24*a20 - (1/12)a01, denominator 11*10 = 110
        let t = test_table();
        assert_eq!(t.coefficient(1, 0).unwrap().exact, rat(-1, 240));
        assert_eq!(t.coefficient(0, 1).unwrap().exact, rat(-1, 840));
        assert_eq!(t.coefficient(2, 0).unwrap().exact, rat(-1, 161_280));
        assert_eq!(t.coefficient(1, 1).unwrap().exact, rat(-1, 2_217_600));
    }

    #[test]
    fn recursion_consistency_exact() {
        assert_eq!(test_table().check_recursion(), Ok(()));
    }

    #[test]
    fn growth_bound_holds_with_single_constant() {
        let t = test_table();
        let c_est = t.c_estimate();
        assert!(c_est.is_finite() && c_est > 0.0);
        for e in t.entries() {
            let envelope =
                c_est * (e.weight as f64 * GROWTH_Q.ln() - ln_factorial(e.weight)).exp();
            assert!(
                e.coeff.abs() <= envelope * (1.0 + 1e-12),
                "bound violated at ({}, {})",
                e.m,
                e.n
            );
        }
        // and the constant is attained at a00
        assert!((c_est - 1.0).abs() < 1e-12, "c_estimate = {c_est}");
    }

    #[test]
    fn sigma_at_zero() {
        let t = test_table();
        let jet = t.jet(c(0.0, 0.0), Invariants::new(1.0, 0.0)).unwrap();
        assert_eq!(jet.value, c(0.0, 0.0));
        assert_eq!(jet.d_z, c(1.0, 0.0));
    }

    #[test]
    fn degenerate_closed_form_agreement() {
        let t = test_table();
        let inv = Invariants::DEGENERATE;
        let mut worst = 0.0f64;
        for i in 0..20 {
            for j in 0..20 {
                let z = c(
                    -2.0 + 4.0 * (i as f64 + 0.5) / 20.0,
                    -2.0 + 4.0 * (j as f64 + 0.5) / 20.0,
                );
                if z.norm() > 2.0 {
                    continue;
                }
                let series = t.jet(z, inv).unwrap().value;
                let closed = sigma_degenerate(z);
                worst = worst.max((series - closed).norm());
            }
        }
        assert!(worst < 1e-12, "max |series - closed form| = {worst:.3e}");
    }

    #[test]
    fn degenerate_zeta_and_wp_values() {
        let t = test_table();
        let inv = Invariants::DEGENERATE;
        let z = c(1.0, 0.0);
        // coth(1) - 1/3 and 1/sinh²(1) + 1/3
        let zeta_expect = 1.0f64.cosh() / 1.0f64.sinh() - 1.0 / 3.0;
        let wp_expect = 1.0 / (1.0f64.sinh().powi(2)) + 1.0 / 3.0;
        assert!((zeta(z, inv, t).unwrap().re - zeta_expect).abs() < 1e-12);
        assert!((wp(z, inv, t).unwrap().re - wp_expect).abs() < 1e-12);
        let sigma_expect = (-1.0f64 / 6.0).exp() * 1.0f64.sinh();
        assert!((t.jet(z, inv).unwrap().value.re - sigma_expect).abs() < 1e-13);
    }

    #[test]
    fn wp_satisfies_its_differential_equation() {
        let t = test_table();
        for &(g2, g3) in &[(1.0, 0.0), (1.1327, 0.1917), (4.0 / 3.0, -8.0 / 27.0)] {
            let inv = Invariants::new(g2, g3);
            for &z in &[c(0.31, 0.42), c(-0.8, 0.33), c(1.1, -0.6), c(0.2, 1.3)] {
                let p = wp(z, inv, t).unwrap();
                let dp = wp_prime(z, inv, t).unwrap();
                let lhs = dp * dp;
                let rhs = 4.0 * p * p * p - g2 * p - g3;
                let scale = lhs.norm().max(rhs.norm()).max(1.0);
                assert!(
                    (lhs - rhs).norm() / scale < 1e-9,
                    "ODE residual {:.3e} at z = {z}, g2 = {g2}",
                    (lhs - rhs).norm() / scale
                );
            }
        }
    }

    #[test]
    fn homogeneity_and_halphen_pdes() {
        let t = test_table();
        for &(g2, g3) in &[(1.0, 0.0), (0.9, 0.21), (4.0 / 3.0, -8.0 / 27.0)] {
            let inv = Invariants::new(g2, g3);
            for &z in &[c(0.7, 0.2), c(-0.4, 1.1), c(1.6, -0.9)] {
                let jet = t.jet(z, inv).unwrap();
                let scale = jet.value.norm().max(1.0);
                let homog = z * jet.d_z - 4.0 * g2 * jet.d_g2 - 6.0 * g3 * jet.d_g3 - jet.value;
                assert!(homog.norm() / scale < 1e-10, "homogeneity {:.3e}", homog.norm());
                let halphen = jet.d_zz - 12.0 * g3 * jet.d_g2 - (2.0 / 3.0) * g2 * g2 * jet.d_g3
                    + g2 / 12.0 * z * z * jet.value;
                assert!(halphen.norm() / scale < 1e-10, "halphen {:.3e}", halphen.norm());
            }
        }
    }

    #[test]
    fn scaling_law() {
        let t = test_table();
        let inv = Invariants::new(1.05, 0.13);
        for &lambda in &[2.0f64, 0.5] {
            for &z in &[c(0.9, 0.4), c(-0.3, 0.8)] {
                let scaled = Invariants::new(lambda.powi(4) * inv.g2, lambda.powi(6) * inv.g3);
                let lhs = t.jet(z / lambda, scaled).unwrap().value;
                let rhs = t.jet(z, inv).unwrap().value / lambda;
                assert!(
                    (lhs - rhs).norm() / rhs.norm().max(1e-30) < 1e-10,
                    "scaling law failed at lambda = {lambda}"
                );
            }
        }
    }

    #[test]
    fn parameter_derivatives_match_finite_differences() {
        let t = test_table();
        let inv = Invariants::new(1.1, -0.2);
        let h = 1e-6;
        for &z in &[c(0.8, 0.3), c(-1.2, 0.7)] {
            let jet = t.jet(z, inv).unwrap();
            let pg2 = t.jet(z, Invariants::new(inv.g2 + h, inv.g3)).unwrap().value;
            let mg2 = t.jet(z, Invariants::new(inv.g2 - h, inv.g3)).unwrap().value;
            let fd2 = (pg2 - mg2) / (2.0 * h);
            assert!((jet.d_g2 - fd2).norm() / fd2.norm().max(1e-12) < 1e-6);
            let pg3 = t.jet(z, Invariants::new(inv.g2, inv.g3 + h)).unwrap().value;
            let mg3 = t.jet(z, Invariants::new(inv.g2, inv.g3 - h)).unwrap().value;
            let fd3 = (pg3 - mg3) / (2.0 * h);
            assert!((jet.d_g3 - fd3).norm() / fd3.norm().max(1e-12) < 1e-6);
        }
    }

    #[test]
    fn mixed_partials_match_finite_differences() {
        let t = test_table();
        let inv = Invariants::new(1.1, -0.2);
        let h = 1e-6;
        let z = c(0.8, 0.45);
        let ext = t.jet_ext_unchecked(z, inv);
        let p2 = t.jet_unchecked(z, Invariants::new(inv.g2 + h, inv.g3)).d_z;
        let m2 = t.jet_unchecked(z, Invariants::new(inv.g2 - h, inv.g3)).d_z;
        assert!((ext.d_zg2 - (p2 - m2) / (2.0 * h)).norm() < 1e-6);
        let p3 = t.jet_unchecked(z, Invariants::new(inv.g2, inv.g3 + h)).d_z;
        let m3 = t.jet_unchecked(z, Invariants::new(inv.g2, inv.g3 - h)).d_z;
        assert!((ext.d_zg3 - (p3 - m3) / (2.0 * h)).norm() < 1e-6);
    }

    #[test]
    fn tail_bound_basics() {
        let t = test_table();
        let inv = Invariants::new(1.0, 0.5);
        assert_eq!(t.tail_bound(0.0, inv), 0.0);
        // monotone in |z|
        assert!(t.tail_bound(1.0, inv) < t.tail_bound(2.0, inv));
        // decreases as the table deepens
        let shallow = SeriesTable::build(20);
        assert!(t.tail_bound(1.5, inv) < shallow.tail_bound(1.5, inv));
    }

    #[test]
    fn truncation_guard_fires_on_shallow_table() {
        let shallow = SeriesTable::build(10);
        let err = shallow
            .jet(c(2.0, 0.0), Invariants::new(1.0, 0.0))
            .unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn default_depth_is_converged_where_the_solver_evaluates() {
        // true truncation error of the W = 60 table, measured against W = 90
        let deep = SeriesTable::build(90);
        let t = test_table();
        let mut worst = 0.0f64;
        for &(g2, g3) in &[(4.0 / 3.0, -8.0 / 27.0), (1.13, 0.19), (1.27, -0.29)] {
            let inv = Invariants::new(g2, g3);
            for i in 0..40 {
                let th = std::f64::consts::TAU * i as f64 / 40.0;
                let z = 3.0 * c(th.cos(), th.sin());
                let a = t.jet_unchecked(z, inv).value;
                let b = deep.jet_unchecked(z, inv).value;
                worst = worst.max((a - b).norm());
            }
        }
        assert!(worst < 1e-13, "true truncation at |z| = 3: {worst:.3e}");
    }

    #[test]
    fn pole_error_near_origin() {
        let t = test_table();
        let err = zeta(c(1e-14, 0.0), Invariants::new(1.0, 0.0), t).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
        assert!(matches!(
            zeta_degenerate(c(0.0, std::f64::consts::PI)).unwrap_err(),
            Error::Pole { .. }
        ));
    }

    #[test]
    fn wp_degenerate_is_even() {
        for &z in &[c(0.7, 0.3), c(-1.1, 0.8)] {
            let a = wp_degenerate(z).unwrap();
            let b = wp_degenerate(-z).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(sigma_degenerate(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn csv_round_trip() {
        let t = SeriesTable::build(14);
        let dump = t.dump_csv();
        let loaded = SeriesTable::load_csv(&dump).unwrap();
        assert_eq!(loaded.max_weight(), t.max_weight());
        assert_eq!(loaded.entries().len(), t.entries().len());
        for (a, b) in t.entries().iter().zip(loaded.entries()) {
            assert_eq!(a.exact, b.exact);
        }
        assert_eq!(loaded.check_recursion(), Ok(()));
    }

    #[test]
    fn csv_corruption_is_detectable() {
        let t = SeriesTable::build(14);
        let dump = t.dump_csv();
        let corrupted = dump.replace("1,0,-1,240", "1,0,-1,239");
        assert!(dump != corrupted, "fixture should actually change a row");
        let loaded = SeriesTable::load_csv(&corrupted).unwrap();
        assert!(loaded.check_recursion().is_err());
    }
}
