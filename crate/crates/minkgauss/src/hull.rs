//! Convex hulls in the Klein ball model. Geodesics of the model are straight
//! Euclidean chords, so the hyperbolic convex hull of an ideal-boundary set
//! is the Euclidean hull of its sphere points intersected with the ball.

use crate::error::{Error, Result};
use crate::sphere::{sphere_lattice, CapUnion};

/// Point of the open Klein ball.
#[derive(Debug, Clone, PartialEq)]
pub struct KleinPoint {
    coords: Vec<f64>,
}

impl KleinPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm2: f64 = coords.iter().map(|c| c * c).sum();
        if norm2 >= 1.0 {
            return Err(Error::NotSpacelike(format!(
                "Klein point has norm {} >= 1",
                norm2.sqrt()
            )));
        }
        Ok(KleinPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Convex body in the closed unit ball, stored by its vertex samples.
/// For n = 2 the vertices are pruned to the hull polygon (counterclockwise);
/// for n = 3 the sample cloud is kept and containment queries run a
/// Frank-Wolfe projection with distance certificates.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl ConvexBody {
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("convex body needs sample points".into()));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput("point of wrong dimension".into()));
        }
        let vertices = if dim == 2 {
            convex_polygon(points)
        } else {
            points
        };
        Ok(ConvexBody { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        let m = self.vertices.len() as f64;
        c.iter_mut().for_each(|x| *x /= m);
        c
    }

    /// Euclidean distance from `p` to the body (zero inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self.dim {
            1 => {
                let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = self
                    .vertices
                    .iter()
                    .map(|v| v[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo - p[0]).max(p[0] - hi).max(0.0)
            }
            2 => polygon_distance(&self.vertices, p),
            _ => frank_wolfe_distance(&self.vertices, p, 1e-9),
        }
    }

    /// Containment with slack: true iff distance(p) <= slack.
    pub fn contains(&self, p: &[f64], slack: f64) -> bool {
        match self.dim {
            3 => frank_wolfe_contains(&self.vertices, p, slack),
            _ => self.distance(p) <= slack,
        }
    }

    /// CSV vertex list: one vertex per row, coordinates only.
    pub fn vertices_csv(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let row: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Hull of the ideal-boundary set F in the Klein model. `resolution` is the
/// number of boundary samples per cap and must be at least 8.
pub fn klein_hull(f: &CapUnion, resolution: usize) -> Result<ConvexBody> {
    if resolution < 8 {
        return Err(Error::InvalidInput(format!(
            "hull resolution {resolution} below the minimum of 8 samples per cap"
        )));
    }
    let n = f.dim();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for cap in f.caps() {
        pts.push(cap.center.coords().to_vec());
        if n == 2 {
            for k in 0..resolution {
                let base = cap.center.coords()[1].atan2(cap.center.coords()[0]);
                let ang =
                    base - cap.radius + 2.0 * cap.radius * (k as f64) / (resolution as f64 - 1.0);
                pts.push(vec![ang.cos(), ang.sin()]);
            }
        } else {
            // boundary ring plus interior rings so caps wider than a
            // hemisphere contribute their full dome to the hull
            let rings = 4usize;
            for r in 1..=rings {
                let rad = cap.radius * (r as f64) / (rings as f64);
                for k in 0..resolution {
                    let t = sphere_lattice(n, 3 * k + 5);
                    if let Ok(p) = cap.center.walk_towards(&t, rad) {
                        pts.push(p.coords().to_vec());
                    }
                }
            }
        }
    }
    ConvexBody::from_points(n, pts)
}

/// Gauss map image points of a spacelike graph, i.e. its gradient values.
pub fn klein_points_from_gradients(grads: &[Vec<f64>]) -> Result<Vec<KleinPoint>> {
    grads
        .iter()
        .map(|g| KleinPoint::new(g.clone()))
        .collect()
}

fn convex_polygon(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| (a[0], a[1]).partial_cmp(&(b[0], b[1])).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64], a: &[f64], b: &[f64]| -> f64 {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn seg_distance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = p[0] - (a[0] + t * ab[0]);
    let dy = p[1] - (a[1] + t * ab[1]);
    dx.hypot(dy)
}

fn polygon_distance(poly: &[Vec<f64>], p: &[f64]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => (p[0] - poly[0][0]).hypot(p[1] - poly[0][1]),
        2 => seg_distance(&poly[0], &poly[1], p),
        m => {
            let mut inside = true;
            let mut dmin = f64::INFINITY;
            for i in 0..m {
                let a = &poly[i];
                let b = &poly[(i + 1) % m];
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross < 0.0 {
                    inside = false;
                }
                dmin = dmin.min(seg_distance(a, b, p));
            }
            if inside {
                0.0
            } else {
                dmin
            }
        }
    }
}

/// Frank-Wolfe iteration on min |q - p| over q in conv(S), returning the
/// distance once upper and lower certificates agree to `tol`.
fn frank_wolfe_distance(s: &[Vec<f64>], p: &[f64], tol: f64) -> f64 {
    let (upper, lower) = frank_wolfe_bounds(s, p, tol, 0.0, 20_000);
    0.5 * (upper + lower)
}

fn frank_wolfe_contains(s: &[Vec<f64>], p: &[f64], slack: f64) -> bool {
    let (upper, lower) = frank_wolfe_bounds(s, p, 1e-10, slack, 20_000);
    if upper <= slack {
        return true;
    }
    if lower > slack {
        return false;
    }
    0.5 * (upper + lower) <= slack
}

fn frank_wolfe_bounds(
    s: &[Vec<f64>],
    p: &[f64],
    tol: f64,
    decision: f64,
    max_iter: usize,
) -> (f64, f64) {
    let dim = p.len();
    let diff = |v: &[f64]| -> Vec<f64> { v.iter().zip(p).map(|(a, b)| a - b).collect() };
    // start at the closest sample
    let mut x = diff(
        s.iter()
            .min_by(|a, b| {
                let da: f64 = a.iter().zip(p).map(|(u, v)| (u - v).powi(2)).sum();
                let db: f64 = b.iter().zip(p).map(|(u, v)| (u - v).powi(2)).sum();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap(),
    );
    let mut lower: f64 = 0.0;
    for _ in 0..max_iter {
        let xn: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xn < 1e-15 {
            return (0.0, 0.0);
        }
        // support point minimizing <x, q> over q = s - p
        let mut best = f64::INFINITY;
        let mut bi = 0;
        for (i, v) in s.iter().enumerate() {
            let d: f64 = (0..dim).map(|k| x[k] * (v[k] - p[k])).sum();
            if d < best {
                best = d;
                bi = i;
            }
        }
        lower = lower.max(best / xn);
        let decided = decision > 0.0 && (xn <= decision || lower > decision);
        if xn - lower.max(0.0) < tol || decided {
            return (xn, lower.max(0.0).min(xn));
        }
        let q = diff(&s[bi]);
        let d: Vec<f64> = (0..dim).map(|k| q[k] - x[k]).collect();
        let dd: f64 = d.iter().map(|v| v * v).sum();
        if dd < 1e-30 {
            return (xn, lower.max(0.0).min(xn));
        }
        let xd: f64 = x.iter().zip(&d).map(|(a, b)| a * b).sum();
        let t = (-xd / dd).clamp(0.0, 1.0);
        if t == 0.0 {
            return (xn, lower.max(0.0).min(xn));
        }
        for k in 0..dim {
            x[k] += t * d[k];
        }
    }
    let xn: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (xn, lower.max(0.0).min(xn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{SphereCap, UnitVector};
    use std::f64::consts::PI;

    fn half_circle() -> CapUnion {
        CapUnion::new(vec![
            SphereCap::new(UnitVector::axis(2, 0), PI / 2.0).unwrap()
        ])
        .unwrap()
    }

    #[test]
    fn half_disk_hull() {
        let hull = klein_hull(&half_circle(), 64).unwrap();
        // interior points of the half disk x1 >= 0
        assert!(hull.contains(&[0.5, 0.0], 1e-3));
        assert!(hull.contains(&[0.999, 0.0], 1e-3));
        assert!(hull.contains(&[0.0, 0.0], 1e-3));
        assert!(hull.contains(&[0.3, -0.6], 1e-2));
        // outside the chord
        assert!(!hull.contains(&[-0.1, 0.0], 1e-2));
        assert!(!hull.contains(&[0.5, 0.9], 1e-2));
    }

    #[test]
    fn antipodal_lens_contains_origin() {
        let f = CapUnion::new(vec![
            SphereCap::new(UnitVector::axis(2, 0), 0.05).unwrap(),
            SphereCap::new(UnitVector::axis(2, 0).antipode(), 0.05).unwrap(),
        ])
        .unwrap();
        let hull = klein_hull(&f, 16).unwrap();
        assert!(hull.contains(&[0.0, 0.0], 1e-6));
        assert!(hull.contains(&[0.5, 0.0], 1e-2));
        assert!(!hull.contains(&[0.0, 0.3], 1e-2));
    }

    #[test]
    fn contains_monotone_toward_centroid() {
        let hull = klein_hull(&half_circle(), 32).unwrap();
        let c = hull.centroid();
        let p = [0.9, 0.43];
        let mut last = hull.distance(&p);
        for k in 1..=10 {
            let t = k as f64 / 10.0;
            let q = [p[0] + t * (c[0] - p[0]), p[1] + t * (c[1] - p[1])];
            let d = hull.distance(&q);
            assert!(d <= last + 1e-12);
            last = d;
        }
    }

    #[test]
    fn sphere_cap_hull_3d() {
        let f = CapUnion::new(vec![
            SphereCap::new(UnitVector::axis(3, 0), PI / 2.0).unwrap()
        ])
        .unwrap();
        let hull = klein_hull(&f, 32).unwrap();
        assert!(hull.contains(&[0.5, 0.0, 0.0], 1e-2));
        assert!(hull.contains(&[0.05, 0.1, -0.1], 5e-2));
        assert!(!hull.contains(&[-0.3, 0.0, 0.0], 1e-2));
    }
}
