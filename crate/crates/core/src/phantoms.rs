//! Analytic phantoms: ellipses, smooth bumps and rectangles with closed-form
//! line integrals.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{CtError, Result};
use crate::geometry::{ParallelGeometry, Sinogram, REL_SLACK};
use crate::image::{pixel_coordinate, Image};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    Ellipse,
    /// `(1 - x'²/a² - y'²/b²)^ν` on the ellipse, 0 outside.
    SmoothBump { nu: f64 },
    /// Half-widths `a` (along the rotated x axis) and `b`.
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub kind: ShapeKind,
    pub center: (f64, f64),
    /// Semi-axes for ellipse/bump, half-widths for rectangles.
    pub axes: (f64, f64),
    /// Counter-clockwise rotation of the first axis from the x axis, radians.
    pub rotation: f64,
    pub intensity: f64,
}

impl Shape {
    pub fn ellipse(center: (f64, f64), axes: (f64, f64), rotation: f64, intensity: f64) -> Self {
        Self {
            kind: ShapeKind::Ellipse,
            center,
            axes,
            rotation,
            intensity,
        }
    }

    pub fn smooth_bump(
        center: (f64, f64),
        axes: (f64, f64),
        rotation: f64,
        intensity: f64,
        nu: f64,
    ) -> Self {
        Self {
            kind: ShapeKind::SmoothBump { nu },
            center,
            axes,
            rotation,
            intensity,
        }
    }

    pub fn rectangle(
        center: (f64, f64),
        half_widths: (f64, f64),
        rotation: f64,
        intensity: f64,
    ) -> Self {
        Self {
            kind: ShapeKind::Rectangle,
            center,
            axes: half_widths,
            rotation,
            intensity,
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.axes;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(CtError::Parameter(format!(
                "shape axes must be positive, got ({a}, {b})"
            )));
        }
        if let ShapeKind::SmoothBump { nu } = self.kind {
            if !(nu >= 0.0 && nu.is_finite()) {
                return Err(CtError::Parameter(format!(
                    "smoothness must be ≥ 0, got {nu}"
                )));
            }
        }
        let finite = [self.center.0, self.center.1, self.rotation, self.intensity]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(CtError::Parameter("non-finite shape parameter".into()));
        }
        Ok(())
    }

    /// Coordinates of `(x, y)` in the shape's own frame.
    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        let (sin_t, cos_t) = self.rotation.sin_cos();
        let dx = x - self.center.0;
        let dy = y - self.center.1;
        (dx * cos_t + dy * sin_t, -dx * sin_t + dy * cos_t)
    }

    /// Pointwise value.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.local(x, y);
        let (a, b) = self.axes;
        match self.kind {
            ShapeKind::Ellipse => {
                if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                    self.intensity
                } else {
                    0.0
                }
            }
            ShapeKind::SmoothBump { nu } => {
                let q = 1.0 - (u / a).powi(2) - (v / b).powi(2);
                if q >= 0.0 {
                    self.intensity * q.powf(nu)
                } else {
                    0.0
                }
            }
            ShapeKind::Rectangle => {
                if u.abs() <= a && v.abs() <= b {
                    self.intensity
                } else {
                    0.0
                }
            }
        }
    }

    /// Line integral over `{x cos φ + y sin φ = s}`.
    pub fn radon(&self, s: f64, phi: f64) -> f64 {
        let (sin_p, cos_p) = phi.sin_cos();
        let tau = s - (self.center.0 * cos_p + self.center.1 * sin_p);
        let psi = phi - self.rotation;
        let (sin_q, cos_q) = psi.sin_cos();
        let (a, b) = self.axes;
        match self.kind {
            ShapeKind::Ellipse => {
                let l2 = chord_l2(a, b, sin_q);
                let d = l2 - tau * tau;
                if d <= 0.0 {
                    0.0
                } else {
                    2.0 * self.intensity * a * b * d.sqrt() / l2
                }
            }
            ShapeKind::SmoothBump { nu } => {
                let l2 = chord_l2(a, b, sin_q);
                let q = 1.0 - tau * tau / l2;
                if q <= 0.0 {
                    0.0
                } else {
                    self.intensity * a * b / l2.sqrt() * bump_chord_factor(nu) * q.powf(nu + 0.5)
                }
            }
            ShapeKind::Rectangle => {
                // Line in local frame: τ·n + t·d with n = (cos ψ, sin ψ), d = (-sin ψ, cos ψ).
                let (px, py) = (tau * cos_q, tau * sin_q);
                let (dx, dy) = (-sin_q, cos_q);
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for (p, d, half) in [(px, dx, a), (py, dy, b)] {
                    if d.abs() < 1e-300 {
                        if p.abs() > half {
                            return 0.0;
                        }
                    } else {
                        let t1 = (-half - p) / d;
                        let t2 = (half - p) / d;
                        lo = lo.max(t1.min(t2));
                        hi = hi.min(t1.max(t2));
                    }
                }
                self.intensity * (hi - lo).max(0.0)
            }
        }
    }

    /// Largest distance from the origin reached by the shape's support.
    pub fn support_reach(&self) -> f64 {
        let (a, b) = self.axes;
        let (sin_t, cos_t) = self.rotation.sin_cos();
        let to_world = |u: f64, v: f64| {
            (
                self.center.0 + u * cos_t - v * sin_t,
                self.center.1 + u * sin_t + v * cos_t,
            )
        };
        match self.kind {
            ShapeKind::Rectangle => [(a, b), (a, -b), (-a, b), (-a, -b)]
                .iter()
                .map(|&(u, v)| {
                    let (x, y) = to_world(u, v);
                    x.hypot(y)
                })
                .fold(0.0, f64::max),
            ShapeKind::Ellipse | ShapeKind::SmoothBump { .. } => {
                // Dense boundary sampling, then a local refinement.
                let n = 4096;
                let dist = |t: f64| {
                    let (x, y) = to_world(a * t.cos(), b * t.sin());
                    x.hypot(y)
                };
                let (mut best_t, mut best) = (0.0, 0.0);
                for k in 0..n {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    let d = dist(t);
                    if d > best {
                        best = d;
                        best_t = t;
                    }
                }
                let mut step = 2.0 * PI / n as f64;
                for _ in 0..60 {
                    for cand in [best_t - step, best_t + step] {
                        let d = dist(cand);
                        if d > best {
                            best = d;
                            best_t = cand;
                        }
                    }
                    step *= 0.5;
                }
                best
            }
        }
    }
}

/// `a² cos²ψ + b² sin²ψ`, written so that it is exactly `a²` for circles
/// (tangent lines would otherwise pick up a `√ulp` chord).
fn chord_l2(a: f64, b: f64, sin_q: f64) -> f64 {
    a * a + (b * b - a * a) * sin_q * sin_q
}

/// `∫_{-1}^{1} (1-t²)^ν dt = √π Γ(ν+1) / Γ(ν+3/2)`.
pub fn bump_chord_factor(nu: f64) -> f64 {
    (PI.sqrt().ln() + ln_gamma(nu + 1.0) - ln_gamma(nu + 1.5)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    shapes: Vec<Shape>,
    radius: f64,
}

impl Phantom {
    pub fn new(shapes: Vec<Shape>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CtError::Parameter(format!(
                "support radius must be positive, got {radius}"
            )));
        }
        for (idx, s) in shapes.iter().enumerate() {
            s.validate()?;
            let reach = s.support_reach();
            if reach > radius * (1.0 + REL_SLACK) {
                return Err(CtError::SupportViolation {
                    radius,
                    detail: format!("shape {idx} reaches distance {reach}"),
                });
            }
        }
        Ok(Self { shapes, radius })
    }

    pub fn empty(radius: f64) -> Self {
        Self {
            shapes: Vec::new(),
            radius,
        }
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        self.shapes.iter().map(|s| s.value_at(x, y)).sum()
    }

    /// Multiplies every intensity by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shapes: self
                .shapes
                .iter()
                .map(|s| Shape {
                    intensity: s.intensity * factor,
                    ..*s
                })
                .collect(),
            radius: self.radius,
        }
    }

    /// Rotates the whole phantom counter-clockwise by `alpha` about the origin.
    pub fn rotated(&self, alpha: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        Self {
            shapes: self
                .shapes
                .iter()
                .map(|s| Shape {
                    center: (
                        ca * s.center.0 - sa * s.center.1,
                        sa * s.center.0 + ca * s.center.1,
                    ),
                    rotation: s.rotation + alpha,
                    ..*s
                })
                .collect(),
            radius: self.radius,
        }
    }
}

/// Exact Radon transform `R f(s, φ)`.
pub fn radon_analytic(phantom: &Phantom, s: f64, phi: f64) -> f64 {
    if s.abs() > phantom.radius() {
        return 0.0;
    }
    phantom.shapes().iter().map(|shape| shape.radon(s, phi)).sum()
}

/// Samples `R f(s_i, φ_j)` on the geometry's lattice.
pub fn radon_sample(phantom: &Phantom, geometry: &ParallelGeometry) -> Result<Sinogram> {
    if geometry.radius() < phantom.radius() * (1.0 - REL_SLACK) {
        return Err(CtError::SupportViolation {
            radius: geometry.radius(),
            detail: format!(
                "phantom support radius {} exceeds the geometry's R",
                phantom.radius()
            ),
        });
    }
    Ok(Sinogram::from_fn(*geometry, |i, j| {
        radon_analytic(phantom, geometry.offset(i), geometry.angle(j))
    }))
}

/// Pointwise rasterization at pixel centers over `[-R, R]²`.
pub fn rasterize(phantom: &Phantom, n_pixels: usize) -> Result<Image> {
    if n_pixels < 2 {
        return Err(CtError::Parameter(format!(
            "need at least 2 pixels per side, got {n_pixels}"
        )));
    }
    let r = phantom.radius();
    let mut img = Image::zeros(n_pixels, r);
    img.values_mut()
        .par_chunks_mut(n_pixels)
        .enumerate()
        .for_each(|(p, row)| {
            let y = pixel_coordinate(r, n_pixels, p);
            for (q, v) in row.iter_mut().enumerate() {
                *v = phantom.value_at(pixel_coordinate(r, n_pixels, q), y);
            }
        });
    Ok(img)
}

/// Shepp–Logan ellipse table: `(x0, y0, a, b, θ in degrees, intensity)`,
/// original 1974 contrast.
pub const SHEPP_LOGAN_TABLE: [(f64, f64, f64, f64, f64, f64); 10] = [
    (0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    (0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
];

pub fn shepp_logan() -> Phantom {
    let shapes = SHEPP_LOGAN_TABLE
        .iter()
        .map(|&(x0, y0, a, b, deg, i)| Shape::ellipse((x0, y0), (a, b), deg.to_radians(), i))
        .collect();
    Phantom::new(shapes, 1.0).expect("Shepp-Logan table lies inside the unit disk")
}

/// Rectangles added to the smoothed Shepp–Logan phantom by default: one
/// 0.3×0.1 and one 0.12×0.05 (half-widths), both in the lower half.
pub fn default_rectangles() -> Vec<Shape> {
    vec![
        Shape::rectangle((0.0, -0.35), (0.3, 0.1), 0.0, 0.1),
        Shape::rectangle((0.3, -0.55), (0.12, 0.05), 0.3, 0.2),
    ]
}

/// Shepp–Logan with every ellipse profile replaced by `(1-r²)^ν`, plus the
/// given rectangles, rescaled so that its mean absolute Radon value on
/// `geometry` equals that of the classical phantom.
pub fn modified_shepp_logan(
    rectangles: &[Shape],
    nu: f64,
    geometry: &ParallelGeometry,
) -> Result<Phantom> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(CtError::Parameter(format!(
            "smoothness ν must be positive, got {nu}"
        )));
    }
    let classical = shepp_logan();
    let mut shapes: Vec<Shape> = classical
        .shapes()
        .iter()
        .map(|s| Shape::smooth_bump(s.center, s.axes, s.rotation, s.intensity, nu))
        .collect();
    for r in rectangles {
        if r.kind != ShapeKind::Rectangle {
            return Err(CtError::Parameter(
                "only rectangles may be added to the modified phantom".into(),
            ));
        }
        shapes.push(*r);
    }
    let raw = Phantom::new(shapes, classical.radius())?;
    let target = sinogram_mean(&radon_sample(&classical, geometry)?);
    let current = sinogram_mean(&radon_sample(&raw, geometry)?);
    if current == 0.0 {
        return Err(CtError::Parameter(
            "modified phantom has a zero Radon transform on this lattice".into(),
        ));
    }
    Ok(raw.scaled(target / current))
}

/// `(1/((2M+1)N_φ)) Σ |g(i,j)|`.
pub fn sinogram_mean(sinogram: &Sinogram) -> f64 {
    sinogram.mean_abs()
}

/// Parses the line-oriented phantom description:
///
/// ```text
/// # kind x0 y0 a b theta intensity [nu]
/// radius 1.0
/// ellipse 0 0 0.69 0.92 0 2.0
/// bump 0.1 0 0.2 0.3 0.5 1.0 1.5
/// rectangle 0 -0.3 0.2 0.05 0 0.5
/// ```
///
/// `theta` is in radians. The optional `radius` line sets `R` (default 1).
pub fn parse_phantom(text: &str, origin: &str) -> Result<Phantom> {
    let mut shapes = Vec::new();
    let mut radius = 1.0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CtError::Parse {
            path: origin.to_string(),
            line: lineno + 1,
            msg,
        };
        let mut fields = line.split_whitespace();
        let kind = fields.next().unwrap();
        let nums: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(format!("cannot parse number {f:?}")))
            })
            .collect::<Result<_>>()?;
        if kind == "radius" {
            if nums.len() != 1 || !(nums[0] > 0.0) {
                return Err(err("expected `radius <positive value>`".into()));
            }
            radius = nums[0];
            continue;
        }
        let shape = match (kind, nums.as_slice()) {
            ("ellipse", &[x0, y0, a, b, t, i]) => Shape::ellipse((x0, y0), (a, b), t, i),
            ("rectangle", &[x0, y0, a, b, t, i]) => Shape::rectangle((x0, y0), (a, b), t, i),
            ("bump" | "smooth_bump", &[x0, y0, a, b, t, i, nu]) => {
                Shape::smooth_bump((x0, y0), (a, b), t, i, nu)
            }
            ("ellipse" | "rectangle", _) => {
                return Err(err(format!("{kind} needs 6 numbers, got {}", nums.len())))
            }
            ("bump" | "smooth_bump", _) => {
                return Err(err(format!("bump needs 7 numbers, got {}", nums.len())))
            }
            _ => return Err(err(format!("unknown shape kind {kind:?}"))),
        };
        shape.validate().map_err(|e| err(e.to_string()))?;
        shapes.push(shape);
    }
    Phantom::new(shapes, radius)
}

pub fn read_phantom(path: &Path) -> Result<Phantom> {
    let text = std::fs::read_to_string(path).map_err(|e| CtError::io(path, e))?;
    parse_phantom(&text, &path.display().to_string())
}
