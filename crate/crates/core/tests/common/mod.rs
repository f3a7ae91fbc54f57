//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use ctfbp::phantoms::Shape;
use ctfbp::rng::CounterRng;

/// Deterministic uniform draws for test fixtures.
pub struct Draws {
    rng: CounterRng,
    stream: u64,
    next: u64,
}

impl Draws {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: CounterRng::new(seed),
            stream,
            next: 0,
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.rng.uniform(self.stream, self.next);
        self.next += 1;
        lo + (hi - lo) * u
    }

    pub fn normal(&mut self) -> f64 {
        let z = self.rng.normal(self.stream, self.next);
        self.next += 1;
        z
    }
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre on `[a, b]` with `panels` equal panels.
pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let w = (b - a) / panels as f64;
    let mut acc = KahanSum::default();
    for p in 0..panels {
        let lo = a + p as f64 * w;
        let mid = lo + 0.5 * w;
        for &(x, wt) in rule {
            acc.add(0.5 * w * wt * f(mid + 0.5 * w * x));
        }
    }
    acc.value()
}

/// Adaptive Simpson with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Line integral of `value(x, y)` over `{x cos φ + y sin φ = s}` restricted to
/// `|t| ≤ reach`, computed only from point evaluations.
///
/// The support boundary is located by dense scanning plus bisection; each
/// piece is integrated with a cosine substitution (which flattens power-law
/// edge behaviour) and adaptive Simpson.
pub fn line_integral(value: impl Fn(f64, f64) -> f64, s: f64, phi: f64, reach: f64) -> f64 {
    let (sn, cs) = phi.sin_cos();
    let on_line = |t: f64| value(s * cs - t * sn, s * sn + t * cs);
    let inside = |t: f64| on_line(t) != 0.0;

    let scan = 40_000;
    let mut cuts = vec![-reach];
    let mut prev = inside(-reach);
    for k in 1..=scan {
        let t = -reach + 2.0 * reach * k as f64 / scan as f64;
        let now = inside(t);
        if now != prev {
            let (mut lo, mut hi) = (t - 2.0 * reach / scan as f64, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
            prev = now;
        }
    }
    cuts.push(reach);

    let mut total = KahanSum::default();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a || !inside(0.5 * (a + b)) {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        // t = mid - half·cos θ, dt = half·sin θ dθ
        let g = |theta: f64| on_line(mid - half * theta.cos()) * half * theta.sin();
        total.add(adaptive_simpson(&g, 0.0, PI, 1e-13));
    }
    total.value()
}

/// Random shape fully inside the unit disk.
pub fn random_shape(d: &mut Draws, kind: usize) -> Shape {
    loop {
        let center = (d.uniform(-0.5, 0.5), d.uniform(-0.5, 0.5));
        let axes = (d.uniform(0.05, 0.45), d.uniform(0.05, 0.45));
        let rot = d.uniform(0.0, PI);
        let intensity = d.uniform(-1.0, 2.0);
        let shape = match kind % 3 {
            0 => Shape::ellipse(center, axes, rot, intensity),
            1 => Shape::smooth_bump(center, axes, rot, intensity, d.uniform(0.5, 3.0)),
            _ => Shape::rectangle(center, axes, rot, intensity),
        };
        if shape.support_reach() < 0.99 {
            return shape;
        }
    }
}

/// `∫∫_{[-R,R]²} k(s-ŝ) cos((s-ŝ)σ) ds dŝ` for an even kernel `k`, by
/// composite Gauss–Legendre in `s` and adaptive Simpson in `ŝ ≤ s`
/// (the kink at `s = ŝ` sits on the boundary of the inner range).
///
/// `edge` is the support edge of a compactly supported kernel; the inner
/// integral has a kink at `s = edge - R`, where the outer range is split.
pub fn double_integral_even_kernel(
    k: impl Fn(f64) -> f64,
    sigma: f64,
    r: f64,
    scale: f64,
    edge: Option<f64>,
) -> f64 {
    let rule = gauss_legendre(20);
    let inner = |s: f64| {
        let f = |sh: f64| {
            let u = s - sh;
            k(u) * (u * sigma).cos()
        };
        match edge {
            Some(c) if s - c > -r => {
                adaptive_simpson(&f, -r, s - c, 1e-13 * scale) + adaptive_simpson(&f, s - c, s, 1e-13 * scale)
            }
            _ => adaptive_simpson(&f, -r, s, 1e-13 * scale),
        }
    };
    match edge {
        Some(c) if c < 2.0 * r => {
            let kink = c - r;
            2.0 * (gl_integrate(&inner, -r, kink, 24, &rule) + gl_integrate(&inner, kink, r, 24, &rule))
        }
        _ => 2.0 * gl_integrate(inner, -r, r, 24, &rule),
    }
}
