//! Streamlines of the seepage flow under the dam.
//!
//! The complex potential maps the region onto a rectangle whose horizontal
//! lines are the streamlines. Its prevertices on the real axis are
//! `x⁻, x⁺, x₁, ∞`, so the potential rectangle is the Abel rectangle of the
//! *second* curve `y² = 4(x−x⁻)(x−x⁺)(x−x₁)` (shifted to zero root sum).
//! A streamline is produced by sampling a horizontal line `Im u = c` in that
//! rectangle, mapping `u ↦ x = ℘₂(u) + s` to the upper half-plane, pulling
//! `x` back to the first curve's rectangle by the Abel inverse, and applying
//! `Q`. In the δ = 0 limit the pullback is unnecessary: `W̃` maps the
//! half-plane straight onto the slit region.

use num_complex::Complex64;
use std::io::{self, Write};

use crate::curve::RootTriple;
use crate::degenerate::{w_tilde, DegenerateParams};
use crate::error::{Error, Result};
use crate::lattice::{half_periods, wp_at, HalfPeriods};
use crate::mapping::{abel_inverse_seeded, q_map, LatticeData, MappingParams};
use crate::region::RegionSpec;
use crate::sigma::{Invariants, SeriesTable};

/// Fraction of the conjugate-coordinate range excluded at both ends.
pub const LEVEL_MARGIN: f64 = 0.02;
/// Allowed excursion outside the closed region, relative to its diameter.
pub const CONTAINMENT_TOL: f64 = 1e-6;

/// One streamline: ordered sample points in the physical region.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub id: usize,
    pub points: Vec<Complex64>,
}

/// The second elliptic parametrization carrying the complex potential.
#[derive(Debug, Clone)]
pub struct PotentialData {
    /// Shift `s = (x⁻ + x⁺ + x₁)/3` restoring the zero root sum.
    pub shift: f64,
    pub inv: Invariants,
    pub hp: HalfPeriods,
    /// Shifted roots, ascending.
    pub roots: [f64; 3],
}

/// Build the second-curve data from solved mapping parameters:
/// `x⁻ = ℘(z⁻)`, `x⁺ = ℘(z⁺)` and the first curve's smallest root `x₁`.
pub fn potential_setup(
    p: &MappingParams,
    lat: &LatticeData,
    table: &SeriesTable,
) -> Result<PotentialData> {
    let x_minus = wp_at(p.z_minus, lat.inv, &lat.hp, table)?;
    let x_plus = wp_at(p.z_plus, lat.inv, &lat.hp, table)?;
    let x1 = lat.roots.x1;
    if x_minus.im.abs() > 1e-9 || x_plus.im.abs() > 1e-9 {
        return Err(Error::Domain {
            reason: format!("prevertices not real: {x_minus}, {x_plus}"),
        });
    }
    second_curve(x_minus.re, x_plus.re, x1, table)
}

fn second_curve(
    x_minus: f64,
    x_plus: f64,
    x_top: f64,
    table: &SeriesTable,
) -> Result<PotentialData> {
    if !(x_minus < x_plus && x_plus < x_top) {
        return Err(Error::Domain {
            reason: format!("prevertices out of order: {x_minus}, {x_plus}, {x_top}"),
        });
    }
    let shift = (x_minus + x_plus + x_top) / 3.0;
    let roots = [x_minus - shift, x_plus - shift, x_top - shift];
    let triple = RootTriple {
        x1: roots[0],
        x2: roots[1],
        x3: roots[2],
        degenerate: false,
    };
    let inv = crate::curve::invariants_from_roots(&triple)?;
    let hp = half_periods(inv, table)?;
    Ok(PotentialData {
        shift,
        inv,
        hp,
        roots,
    })
}

fn levels(height: f64, n_lines: usize) -> Vec<f64> {
    if n_lines == 1 {
        return vec![0.5 * height];
    }
    let lo = LEVEL_MARGIN * height;
    let hi = (1.0 - LEVEL_MARGIN) * height;
    (0..n_lines)
        .map(|j| lo + (hi - lo) * j as f64 / (n_lines - 1) as f64)
        .collect()
}

/// The sampled rectangle maps into the *closed* upper half-plane; clip the
/// rounding fuzz so edge samples cannot land at `Im x = −0` and slip onto
/// the lower branch of the square roots downstream.
fn sanitize_half_plane(x: Complex64, on_edge: bool) -> Complex64 {
    if on_edge {
        return Complex64::new(x.re, 0.0);
    }
    if x.im < 0.0 && x.im > -1e-9 * (1.0 + x.norm()) {
        return Complex64::new(x.re, 0.0);
    }
    x
}

fn check_contained(r: &RegionSpec, w: Complex64) -> Result<()> {
    let excursion = r.excursion(w);
    if excursion > CONTAINMENT_TOL * r.diameter() {
        return Err(Error::Sampling {
            point: w,
            excursion,
        });
    }
    Ok(())
}

/// Streamlines for a solved elliptic mapping: `n_lines` levels spread over
/// the potential-rectangle height (2% margins), `n_samples` points each.
pub fn streamlines(
    r: &RegionSpec,
    p: &MappingParams,
    lat: &LatticeData,
    table: &SeriesTable,
    n_lines: usize,
    n_samples: usize,
) -> Result<Vec<Polyline>> {
    validate_counts(n_lines, n_samples)?;
    let pot = potential_setup(p, lat, table)?;
    let mut out = Vec::with_capacity(n_lines);
    for (id, &c) in levels(pot.hp.im_omega_prime(), n_lines).iter().enumerate() {
        out.push(Polyline {
            id,
            points: trace_line(r, p, lat, table, &pot, c, n_samples)?,
        });
    }
    Ok(out)
}

/// A single level line, `c` in `(0, Im ω₂′)`; `c = 0` traces the dam
/// boundary itself.
pub fn trace_line(
    r: &RegionSpec,
    p: &MappingParams,
    lat: &LatticeData,
    table: &SeriesTable,
    pot: &PotentialData,
    c: f64,
    n_samples: usize,
) -> Result<Vec<Complex64>> {
    let w2 = pot.hp.omega;
    let mut points = Vec::with_capacity(n_samples);
    let mut seed = None;
    for i in 0..n_samples {
        let re_u = -w2 + w2 * i as f64 / (n_samples - 1) as f64;
        let u = Complex64::new(re_u, c);
        let x = sanitize_half_plane(wp_at(u, pot.inv, &pot.hp, table)? + pot.shift, c == 0.0);
        let z = abel_inverse_seeded(x, seed, lat, table)?;
        seed = Some(z);
        let w = q_map(z, p, r, lat, table)?;
        check_contained(r, w)?;
        points.push(w);
    }
    Ok(points)
}

/// Streamlines of the δ = 0 limit, through `W̃` directly.
pub fn streamlines_degenerate(
    r: &RegionSpec,
    p: &DegenerateParams,
    table: &SeriesTable,
    n_lines: usize,
    n_samples: usize,
) -> Result<Vec<Polyline>> {
    validate_counts(n_lines, n_samples)?;
    if !r.is_degenerate() {
        return Err(Error::Domain {
            reason: format!("delta = {} but the degenerate flow needs 0", r.delta),
        });
    }
    let pot = degenerate_potential(p, table)?;
    let mut out = Vec::with_capacity(n_lines);
    for (id, &c) in levels(pot.hp.im_omega_prime(), n_lines).iter().enumerate() {
        out.push(Polyline {
            id,
            points: trace_line_degenerate(r, p, table, &pot, c, n_samples)?,
        });
    }
    Ok(out)
}

/// Second curve of the degenerate problem: prevertices `x⁻, x⁺` and the
/// preimage `−2/3` of `w₁` under `℘_deg`.
pub fn degenerate_potential(
    p: &DegenerateParams,
    table: &SeriesTable,
) -> Result<PotentialData> {
    second_curve(p.x_minus, p.x_plus, -2.0 / 3.0, table)
}

pub fn trace_line_degenerate(
    r: &RegionSpec,
    p: &DegenerateParams,
    table: &SeriesTable,
    pot: &PotentialData,
    c: f64,
    n_samples: usize,
) -> Result<Vec<Complex64>> {
    let w2 = pot.hp.omega;
    let mut points = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let re_u = -w2 + w2 * i as f64 / (n_samples - 1) as f64;
        let u = Complex64::new(re_u, c);
        let x = wp_at(u, pot.inv, &pot.hp, table)? + pot.shift;
        let x = if c == 0.0 {
            Complex64::new(x.re, 0.0)
        } else {
            x
        };
        let w = w_tilde(x, p, r)?;
        check_contained(r, w)?;
        points.push(w);
    }
    Ok(points)
}

fn validate_counts(n_lines: usize, n_samples: usize) -> Result<()> {
    if n_lines < 1 {
        return Err(Error::Range {
            what: "n_lines",
            value: n_lines as f64,
            range: "at least 1",
        });
    }
    if n_samples < 2 {
        return Err(Error::Range {
            what: "n_samples",
            value: n_samples as f64,
            range: "at least 2",
        });
    }
    Ok(())
}

/// Locale-independent decimal with 12 significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".into();
    }
    format!("{:.11e}", x)
}

/// CSV emission: `line_id,sample_index,re_w,im_w`.
pub fn write_csv<W: Write>(out: &mut W, lines: &[Polyline]) -> io::Result<()> {
    writeln!(out, "line_id,sample_index,re_w,im_w")?;
    for line in lines {
        for (i, w) in line.points.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                line.id,
                i,
                format_sig(w.re),
                format_sig(w.im)
            )?;
        }
    }
    Ok(())
}

/// SVG emission: region boundary plus one path per streamline. Geometry is
/// in region units with the y-axis flipped for display.
pub fn write_svg<W: Write>(out: &mut W, r: &RegionSpec, lines: &[Polyline]) -> io::Result<()> {
    let mut re_min = -1.0f64;
    let mut re_max = r.delta + 1.0;
    for line in lines {
        for w in &line.points {
            re_min = re_min.min(w.re);
            re_max = re_max.max(w.re);
        }
    }
    let pad = 0.05 * (re_max - re_min);
    re_min -= pad;
    re_max += pad;
    let top = 0.3;
    let bottom = -r.h_minus - 0.3;
    let (width, height) = (re_max - re_min, top - bottom);

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        fmt_svg(re_min),
        fmt_svg(-top),
        fmt_svg(width),
        fmt_svg(height)
    )?;
    let sw = 0.004 * width.max(height);

    // upper boundary: left half-line, dam notch, right half-line
    let boundary = [
        Complex64::new(re_min, 0.0),
        r.w4(),
        r.w3(),
        r.w2(),
        r.w1(),
        Complex64::new(re_max, r.w1().im),
    ];
    write_path(out, &boundary, "#000000", sw * 1.5)?;
    // channel bottom
    let bottom_line = [
        Complex64::new(re_min, -r.h_minus),
        Complex64::new(re_max, -r.h_minus),
    ];
    write_path(out, &bottom_line, "#000000", sw * 1.5)?;

    for line in lines {
        write_path(out, &line.points, "#1f77b4", sw)?;
    }
    writeln!(out, "</svg>")
}

fn write_path<W: Write>(
    out: &mut W,
    points: &[Complex64],
    color: &str,
    stroke_width: f64,
) -> io::Result<()> {
    let mut d = String::new();
    for (i, w) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        d.push_str(&format!(
            "{}{} {} ",
            cmd,
            fmt_svg(w.re),
            fmt_svg(-w.im)
        ));
    }
    writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
        d.trim_end(),
        color,
        fmt_svg(stroke_width)
    )
}

fn fmt_svg(x: f64) -> String {
    format!("{:.6}", x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degenerate::solve_degenerate;
    use crate::mapping::{solve_report, SolveOptions, SolveReport};
    use crate::sigma::test_table;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn paper_region() -> RegionSpec {
        RegionSpec::new(PI + 0.5, PI, 0.5, 0.2).unwrap()
    }

    fn solved() -> &'static SolveReport {
        static SOLVED: OnceLock<SolveReport> = OnceLock::new();
        SOLVED.get_or_init(|| {
            solve_report(&paper_region(), &SolveOptions::default(), test_table()).unwrap()
        })
    }

    #[test]
    fn potential_setup_properties() {
        let t = test_table();
        let report = solved();
        let pot = potential_setup(&report.params, &report.lattice, t).unwrap();
        let sum: f64 = pot.roots.iter().sum();
        assert!(sum.abs() < 1e-13, "shifted roots sum to {sum}");
        assert!(pot.inv.discriminant() > 0.0);
        // ℘₂(ω₂) + s = x₁: the largest second-curve root maps back to the
        // first curve's smallest root (the w₁ prevertex)
        let corner = wp_at(
            Complex64::new(pot.hp.omega, 0.0),
            pot.inv,
            &pot.hp,
            t,
        )
        .unwrap();
        assert!(
            (corner.re + pot.shift - report.lattice.roots.x1).abs() < 1e-9,
            "corner value {} vs x1 {}",
            corner.re + pot.shift,
            report.lattice.roots.x1
        );
    }

    #[test]
    fn streamline_counts_containment_and_separation() {
        let t = test_table();
        let r = paper_region();
        let report = solved();
        let lines = streamlines(&r, &report.params, &report.lattice, t, 6, 40).unwrap();
        assert_eq!(lines.len(), 6);
        for line in &lines {
            assert_eq!(line.points.len(), 40);
            for w in &line.points {
                assert!(r.excursion(*w) <= CONTAINMENT_TOL * r.diameter());
            }
            // consecutive points distinct
            for pair in line.points.windows(2) {
                assert!((pair[1] - pair[0]).norm() > 0.0);
            }
        }
        // distinct levels never touch on the sample grid
        let mut min_gap = f64::INFINITY;
        for a in 0..lines.len() {
            for b in (a + 1)..lines.len() {
                for wa in &lines[a].points {
                    for wb in &lines[b].points {
                        min_gap = min_gap.min((wa - wb).norm());
                    }
                }
            }
        }
        assert!(min_gap > 1e-6, "closest distinct-level pair: {min_gap:.3e}");
    }

    #[test]
    fn streamline_endpoints_reach_the_water_boundaries() {
        let t = test_table();
        let r = paper_region();
        let report = solved();
        let lines = streamlines(&r, &report.params, &report.lattice, t, 5, 60).unwrap();
        for line in &lines {
            let start = line.points.first().unwrap();
            let end = line.points.last().unwrap();
            // Re u = −ω₂ is the downstream half-line from w₁
            assert!(
                (start.im - r.w1().im).abs() < 1e-7 && start.re >= r.w1().re - 1e-7,
                "start {start}"
            );
            // Re u = 0 is the upstream half-line from w₄
            assert!(end.im.abs() < 1e-7 && end.re <= 1e-7, "end {end}");
        }
    }

    #[test]
    fn low_level_line_hugs_the_dam_boundary() {
        let t = test_table();
        let r = paper_region();
        let report = solved();
        let pot = potential_setup(&report.params, &report.lattice, t).unwrap();
        let height = pot.hp.im_omega_prime();
        let line = trace_line(
            &r,
            &report.params,
            &report.lattice,
            t,
            &pot,
            1e-3 * height,
            200,
        )
        .unwrap();
        // one-sided Hausdorff distance to the dam path w₁→w₂→w₃→w₄
        let mut worst = 0.0f64;
        for w in &line {
            let d = dist_to_dam_path(&r, *w);
            worst = worst.max(d);
        }
        assert!(worst < 5e-3, "max distance to the dam path: {worst:.3e}");
    }

    #[test]
    fn boundary_level_line_traces_the_dam_path_exactly() {
        let t = test_table();
        let r = paper_region();
        let report = solved();
        let pot = potential_setup(&report.params, &report.lattice, t).unwrap();
        let line = trace_line(&r, &report.params, &report.lattice, t, &pot, 0.0, 400).unwrap();
        let mut worst = 0.0f64;
        for w in &line {
            worst = worst.max(dist_to_dam_path(&r, *w));
        }
        assert!(worst < 1e-4, "boundary line Hausdorff: {worst:.3e}");
    }

    fn dist_to_dam_path(r: &RegionSpec, w: Complex64) -> f64 {
        let seg = |a: Complex64, b: Complex64| -> f64 {
            let ab = b - a;
            let t = (((w - a).re * ab.re + (w - a).im * ab.im) / ab.norm_sqr()).clamp(0.0, 1.0);
            (w - (a + ab * t)).norm()
        };
        seg(r.w1(), r.w2()).min(seg(r.w2(), r.w3())).min(seg(r.w3(), r.w4()))
    }

    #[test]
    fn degenerate_streamlines_levels_and_containment() {
        let t = test_table();
        let r = RegionSpec::new(PI + 0.5, PI, 0.5, 0.0).unwrap();
        let p = solve_degenerate(&r).unwrap();
        let lines = streamlines_degenerate(&r, &p, t, 5, 50).unwrap();
        assert_eq!(lines.len(), 5);
        for line in &lines {
            assert_eq!(line.points.len(), 50);
            for w in &line.points {
                assert!(
                    r.excursion(*w) <= CONTAINMENT_TOL * r.diameter(),
                    "w = {w}, excursion {:.3e}",
                    r.excursion(*w)
                );
            }
        }
    }

    #[test]
    fn degenerate_boundary_line_matches_the_slit_path() {
        let t = test_table();
        let r = RegionSpec::new(PI + 0.5, PI, 0.5, 0.0).unwrap();
        let p = solve_degenerate(&r).unwrap();
        let pot = degenerate_potential(&p, t).unwrap();
        let line = trace_line_degenerate(&r, &p, t, &pot, 0.0, 400).unwrap();
        let mut worst = 0.0f64;
        for w in &line {
            worst = worst.max(dist_to_dam_path(&r, *w));
        }
        assert!(worst < 1e-4, "slit boundary Hausdorff: {worst:.3e}");
    }

    #[test]
    fn count_validation() {
        let t = test_table();
        let r = paper_region();
        let report = solved();
        assert!(matches!(
            streamlines(&r, &report.params, &report.lattice, t, 0, 10),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            streamlines(&r, &report.params, &report.lattice, t, 3, 1),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn csv_format_is_stable() {
        let lines = vec![Polyline {
            id: 0,
            points: vec![Complex64::new(1.0, -2.5), Complex64::new(0.125, 0.0)],
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &lines).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "line_id,sample_index,re_w,im_w\n0,0,1.00000000000e0,-2.50000000000e0\n0,1,1.25000000000e-1,0.00000000000e0\n"
        );
    }

    #[test]
    fn svg_has_boundary_and_per_line_paths() {
        let t = test_table();
        let r = paper_region();
        let report = solved();
        let lines = streamlines(&r, &report.params, &report.lattice, t, 4, 20).unwrap();
        let mut buf = Vec::new();
        write_svg(&mut buf, &r, &lines).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<path").count(), 2 + 4);
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
    }
}
