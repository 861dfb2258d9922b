//! Convex polygons and the exact two-dimensional center-of-gravity method.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Orientation slack for the convexity check.
pub const CONVEX_TOL: f64 = 1e-10;
/// Consecutive clipped vertices closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// `cog_run` stops once the region is smaller than this.
pub const MIN_AREA: f64 = 1e-14;

pub type Point2<T> = [T; 2];

fn cross<T: Real>(o: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex polygon with counter-clockwise vertices; no vertices means empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D<T> {
    vertices: Vec<Point2<T>>,
}

impl<T: Real> Polygon2D<T> {
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self> {
        if vertices.is_empty() {
            return Ok(Self::empty());
        }
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!(
                "{} vertices do not bound an area",
                vertices.len()
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("non-finite vertex".into()));
        }
        let n = vertices.len();
        let tol = T::c(CONVEX_TOL);
        if (0..n).any(|i| cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < -tol) {
            return Err(Error::Geometry("vertices are not convex and counter-clockwise".into()));
        }
        let p = Self { vertices };
        // Convex turns with positive area and total turning 2π rule out self-overlap.
        let turning: f64 = (0..n)
            .map(|i| {
                let (a, b, c) = (p.vertices[i], p.vertices[(i + 1) % n], p.vertices[(i + 2) % n]);
                let u = [(b[0] - a[0]).to_f64_lossy(), (b[1] - a[1]).to_f64_lossy()];
                let v = [(c[0] - b[0]).to_f64_lossy(), (c[1] - b[1]).to_f64_lossy()];
                (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1])
            })
            .sum();
        if !(p.area() > T::zero()) || (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(Error::Geometry("polygon is degenerate or self-overlapping".into()));
        }
        Ok(p)
    }

    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Axis-aligned rectangle `[lo_0, hi_0] × [lo_1, hi_1]`.
    pub fn rectangle(lo: Point2<T>, hi: Point2<T>) -> Result<Self> {
        Self::new(vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    }

    pub fn unit_square() -> Self {
        Self::rectangle([T::zero(); 2], [T::one(); 2]).expect("unit square is valid")
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area, measured from the first vertex.
    pub fn area(&self) -> T {
        let v = &self.vertices;
        if v.len() < 3 {
            return T::zero();
        }
        (1..v.len() - 1).map(|i| cross(v[0], v[i], v[i + 1])).sum::<T>() * T::c(0.5)
    }

    /// Inside or within `tol` of every edge line.
    pub fn contains(&self, p: Point2<T>, tol: T) -> bool {
        let v = &self.vertices;
        let n = v.len();
        n >= 3
            && (0..n).all(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                cross(a, b, p) >= -tol * len
            })
    }
}

/// Keeps the half-plane `gᵀ(x − x0) ≤ 0`.
pub fn clip_halfplane<T: Real>(poly: &Polygon2D<T>, g: Point2<T>, x0: Point2<T>) -> Polygon2D<T> {
    let v = &poly.vertices;
    let n = v.len();
    let side = |p: Point2<T>| g[0] * (p[0] - x0[0]) + g[1] * (p[1] - x0[1]);
    let mut out: Vec<Point2<T>> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if sp <= T::zero() {
            out.push(p);
        }
        if (sp < T::zero() && sq > T::zero()) || (sp > T::zero() && sq < T::zero()) {
            let s = sp / (sp - sq);
            out.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
        }
    }
    let tol = T::c(DEDUP_TOL);
    let close = |a: Point2<T>, b: Point2<T>| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;
    out.dedup_by(|b, a| close(*a, *b));
    while out.len() > 1 && close(out[0], out[out.len() - 1]) {
        out.pop();
    }
    let p = Polygon2D { vertices: out };
    if p.vertices.len() < 3 || !(p.area() > T::zero()) {
        return Polygon2D::empty();
    }
    p
}

/// Exact centroid from the first moments of the shoelace triangles.
pub fn centroid<T: Real>(poly: &Polygon2D<T>) -> Result<Point2<T>> {
    let v = &poly.vertices;
    let area = poly.area();
    if !(area > T::zero()) {
        return Err(Error::Geometry("centroid of an empty or degenerate polygon".into()));
    }
    let o = v[0];
    let mut m = [T::zero(); 2];
    for i in 1..v.len() - 1 {
        let w = cross(o, v[i], v[i + 1]);
        for k in 0..2 {
            m[k] += w * (v[i][k] + v[i + 1][k] - o[k] - o[k]);
        }
    }
    let s = T::one() / (T::c(6.0) * area);
    Ok([o[0] + m[0] * s, o[1] + m[1] * s])
}

/// One iteration: the decision, its value and subgradient, and the region
/// after the cut.
#[derive(Debug, Clone, PartialEq)]
pub struct CogStep<T> {
    pub x: Point2<T>,
    pub value: T,
    pub gradient: Point2<T>,
    pub region: Polygon2D<T>,
}

/// Center of gravity: play the centroid of the current region, then cut it
/// with the returned subgradient. Stops after `rounds` steps, when the
/// subgradient vanishes, or when the region area drops below [`MIN_AREA`].
pub fn cog_run<T: Real>(
    mut oracle: impl FnMut(Point2<T>) -> Result<(T, Point2<T>)>,
    poly0: &Polygon2D<T>,
    rounds: usize,
) -> Result<Vec<CogStep<T>>> {
    if !(poly0.area() > T::zero()) {
        return Err(Error::Geometry("initial region has no area".into()));
    }
    let mut region = poly0.clone();
    let mut steps = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        if region.area() < T::c(MIN_AREA) {
            break;
        }
        let x = centroid(&region)?;
        let (value, gradient) = oracle(x)?;
        let stop = gradient.iter().all(|&c| c == T::zero());
        if !stop {
            region = clip_halfplane(&region, gradient, x);
        }
        steps.push(CogStep {
            x,
            value,
            gradient,
            region: region.clone(),
        });
        if stop {
            break;
        }
    }
    Ok(steps)
}
