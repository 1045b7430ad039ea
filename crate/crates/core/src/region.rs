//! The physical region: a horizontal channel strip with a rectangular dam
//! notch in its upper boundary.
//!
//! With the convention `w₄ = 0`, the upper boundary runs: half-line at
//! `Im w = 0` for `Re w ≤ 0`, down the segment to `w₃ = −i(h⁻+h−h⁺)`, across
//! the dam base to `w₂ = w₃ + δ`, up to `w₁ = w₂ + ih`, then the half-line at
//! `Im w = h⁺ − h⁻` for `Re w ≥ δ`. The channel bottom is the full line
//! `Im w = −h⁻`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Region parameters `(h⁻, h⁺, h, δ)`; all heights positive, `δ ≥ 0`,
/// `h⁻ − h⁺ + h > 0` (the segment `[w₃,w₄]` has positive length), `h < h⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub h_minus: f64,
    pub h_plus: f64,
    pub h: f64,
    pub delta: f64,
}

impl RegionSpec {
    pub fn new(h_minus: f64, h_plus: f64, h: f64, delta: f64) -> Result<Self> {
        let r = Self {
            h_minus,
            h_plus,
            h,
            delta,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::Domain { reason });
        if !(self.h_minus > 0.0 && self.h_plus > 0.0 && self.h > 0.0) {
            return fail(format!(
                "heights must be positive: h- = {}, h+ = {}, h = {}",
                self.h_minus, self.h_plus, self.h
            ));
        }
        if self.delta < 0.0 {
            return fail(format!("delta = {} must be nonnegative", self.delta));
        }
        if self.h_minus - self.h_plus + self.h <= 0.0 {
            return fail(format!(
                "h- - h+ + h = {} must be positive",
                self.h_minus - self.h_plus + self.h
            ));
        }
        if self.h >= self.h_plus {
            return fail(format!(
                "h = {} must be smaller than h+ = {}",
                self.h, self.h_plus
            ));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.delta == 0.0
    }

    /// `w₄ = 0`.
    pub fn w4(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    /// `w₃ = −i(h⁻ + h − h⁺)`.
    pub fn w3(&self) -> Complex64 {
        Complex64::new(0.0, -(self.h_minus + self.h - self.h_plus))
    }

    /// `w₂ = w₃ + δ`.
    pub fn w2(&self) -> Complex64 {
        self.w3() + self.delta
    }

    /// `w₁ = w₂ + ih = δ − i(h⁻ − h⁺)`.
    pub fn w1(&self) -> Complex64 {
        Complex64::new(self.delta, -(self.h_minus - self.h_plus))
    }

    /// Whether `w` lies in the closed region. Points on the two vertical
    /// boundary segments count as contained.
    pub fn contains(&self, w: Complex64) -> bool {
        if w.im < -self.h_minus {
            return false;
        }
        let level = if w.re <= 0.0 {
            0.0
        } else if w.re < self.delta {
            self.w3().im
        } else if w.re == self.delta {
            self.w1().im.max(self.w3().im)
        } else {
            self.w1().im
        };
        w.im <= level
    }

    /// Distance from `w` to the region boundary.
    pub fn boundary_distance(&self, w: Complex64) -> f64 {
        let mut d = (w.im + self.h_minus).abs(); // bottom line
        d = d.min(dist_to_half_line_left(w, self.w4()));
        d = d.min(dist_to_half_line_right(w, self.w1()));
        d = d.min(dist_to_segment(w, self.w4(), self.w3()));
        if self.delta > 0.0 {
            d = d.min(dist_to_segment(w, self.w3(), self.w2()));
        }
        d = d.min(dist_to_segment(w, self.w2(), self.w1()));
        d
    }

    /// How far `w` sticks out of the closed region (0 inside).
    pub fn excursion(&self, w: Complex64) -> f64 {
        if self.contains(w) {
            0.0
        } else {
            self.boundary_distance(w)
        }
    }

    /// A length scale of the finite part of the region.
    pub fn diameter(&self) -> f64 {
        (self.delta.powi(2) + (self.h_minus + self.h).powi(2)).sqrt() + self.h_minus
    }
}

fn dist_to_segment(w: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (w - a).norm();
    }
    let t = ((w - a).re * ab.re + (w - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (w - (a + ab * t)).norm()
}

/// Distance to the horizontal half-line running left from `p`.
fn dist_to_half_line_left(w: Complex64, p: Complex64) -> f64 {
    if w.re <= p.re {
        (w.im - p.im).abs()
    } else {
        (w - p).norm()
    }
}

/// Distance to the horizontal half-line running right from `p`.
fn dist_to_half_line_right(w: Complex64, p: Complex64) -> f64 {
    if w.re >= p.re {
        (w.im - p.im).abs()
    } else {
        (w - p).norm()
    }
}
