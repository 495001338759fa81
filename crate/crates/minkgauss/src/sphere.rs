//! Geometry of the ideal boundary S^{n-1}: intrinsic distances, spherical
//! caps and cap unions with a rolling-ball radius, support functions, and
//! the inner/outer ball families used by the barrier construction.
//!
//! A `CapUnion` is the closed set F prescribing the asymptotic cone data
//! V_F(x) = sup over directions in F of x.dir. Its rolling-ball radius
//! `delta0` bounds the admissible radii of inscribed and circumscribed caps
//! from below, which keeps the boost rapidity of every derived semitrough
//! in a fixed compact interval.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const UNIT_TOL: f64 = 1e-12;

/// A point of S^{n-1}, kept normalized to 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes a nonzero vector onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("empty direction vector".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite direction vector".into()));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidInput("direction vector too short".into()));
        }
        let coords = coords.into_iter().map(|c| c / norm).collect();
        Ok(UnitVector { coords })
    }

    /// The k-th coordinate axis in n dimensions.
    pub fn axis(n: usize, k: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[k] = 1.0;
        UnitVector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn antipode(&self) -> UnitVector {
        UnitVector {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    fn renormalized(mut coords: Vec<f64>) -> UnitVector {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in coords.iter_mut() {
            *c /= norm;
        }
        UnitVector { coords }
    }

    /// Walks the great circle from `self` towards `toward` by `angle` radians.
    /// `toward` must not be parallel to `self`.
    pub fn walk_towards(&self, toward: &UnitVector, angle: f64) -> Result<UnitVector> {
        let c = self.dot(toward);
        let mut tang: Vec<f64> = toward
            .coords
            .iter()
            .zip(&self.coords)
            .map(|(t, s)| t - c * s)
            .collect();
        let tnorm = tang.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tnorm < 1e-12 {
            return Err(Error::InvalidInput(
                "walk direction parallel to base point".into(),
            ));
        }
        for t in tang.iter_mut() {
            *t /= tnorm;
        }
        let coords = self
            .coords
            .iter()
            .zip(&tang)
            .map(|(s, t)| angle.cos() * s + angle.sin() * t)
            .collect();
        Ok(UnitVector::renormalized(coords))
    }
}

/// Intrinsic distance d_S(x, y) = arccos(x . y), in [0, pi].
pub fn sphere_distance(x: &UnitVector, y: &UnitVector) -> f64 {
    x.dot(y).clamp(-1.0, 1.0).acos()
}

/// Closed geodesic ball on S^{n-1} with radius in (0, pi).
#[derive(Debug, Clone)]
pub struct SphereCap {
    pub center: UnitVector,
    pub radius: f64,
}

impl SphereCap {
    pub fn new(center: UnitVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < PI) {
            return Err(Error::InvalidInput(format!(
                "cap radius {radius} outside (0, pi)"
            )));
        }
        Ok(SphereCap { center, radius })
    }

    pub fn contains(&self, x: &UnitVector) -> bool {
        sphere_distance(x, &self.center) <= self.radius + UNIT_TOL
    }

    pub fn distance(&self, x: &UnitVector) -> f64 {
        (sphere_distance(x, &self.center) - self.radius).max(0.0)
    }

    /// Support function of the cap at an arbitrary (not necessarily unit) x.
    pub fn support(&self, x: &[f64]) -> f64 {
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let dot: f64 = x
            .iter()
            .zip(self.center.coords())
            .map(|(a, b)| a * b)
            .sum();
        let theta = (dot / norm).clamp(-1.0, 1.0).acos();
        norm * (theta - self.radius).max(0.0).cos()
    }
}

/// Closed subset of S^{n-1} given as a finite union of caps, together with
/// its rolling-ball radius.
#[derive(Debug, Clone)]
pub struct CapUnion {
    caps: Vec<SphereCap>,
    delta0: f64,
}

impl CapUnion {
    /// Validates and normalizes the union. For n = 2 overlapping arcs are
    /// merged; for n >= 3 overlapping caps are rejected since the union would
    /// have corners and no positive rolling-ball radius. The whole sphere is
    /// rejected (its complement admits no interior cap).
    pub fn new(caps: Vec<SphereCap>) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::InvalidInput("cap union needs at least one cap".into()));
        }
        let n = caps[0].center.dim();
        if n < 2 {
            return Err(Error::DimensionUnsupported(format!(
                "cap union needs ambient dimension >= 2, got {n}"
            )));
        }
        if caps.iter().any(|c| c.center.dim() != n) {
            return Err(Error::InvalidInput("caps of mixed dimension".into()));
        }
        let caps = if n == 2 {
            merge_arcs(&caps)?
        } else {
            normalize_disjoint(&caps)?
        };

        let mut delta0 = analytic_delta0(&caps, n)?;
        let mut attempts = 0;
        while !rolling_ball_check(&caps, delta0) {
            delta0 *= 0.9;
            attempts += 1;
            if attempts > 20 || delta0 < 1e-9 {
                return Err(Error::InvalidInput(
                    "no positive rolling-ball radius passes the sampled check".into(),
                ));
            }
        }
        Ok(CapUnion { caps, delta0 })
    }

    pub fn dim(&self) -> usize {
        self.caps[0].center.dim()
    }

    pub fn caps(&self) -> &[SphereCap] {
        &self.caps
    }

    /// Rolling-ball radius of Lemma-4.5 type: caps of this radius fit inside
    /// both F and the closure of its complement.
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn contains(&self, x: &UnitVector) -> bool {
        self.caps.iter().any(|c| c.contains(x))
    }
}

/// V_F(x) = sup over directions in F of x . dir, for arbitrary x.
/// Positively homogeneous of degree one; V_F(0) = 0.
pub fn support_function(f: &CapUnion, x: &[f64]) -> f64 {
    f.caps
        .iter()
        .map(|c| c.support(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Intrinsic distance from a sphere point to F.
pub fn dist_to_set(x: &UnitVector, f: &CapUnion) -> f64 {
    f.caps
        .iter()
        .map(|c| c.distance(x))
        .fold(f64::INFINITY, f64::min)
}

fn merge_arcs(caps: &[SphereCap]) -> Result<Vec<SphereCap>> {
    // Each cap is the angular interval [start, start + len] mod 2pi.
    let ivals: Vec<(f64, f64)> = caps
        .iter()
        .map(|c| {
            let ang = c.center.coords()[1].atan2(c.center.coords()[0]);
            let start = (ang - c.radius).rem_euclid(2.0 * PI);
            (start, 2.0 * c.radius)
        })
        .collect();
    // Find an uncovered cut point among the interval end points. If every
    // end point lies strictly inside another interval, the circle is covered.
    let covered_strictly = |alpha: f64| -> bool {
        ivals
            .iter()
            .any(|&(s, len)| (alpha - s).rem_euclid(2.0 * PI) < len - 1e-13)
    };
    let cut = ivals
        .iter()
        .map(|&(s, len)| (s + len).rem_euclid(2.0 * PI))
        .find(|&e| !covered_strictly(e))
        .ok_or_else(|| {
            Error::InvalidInput("cap union covers the whole circle; complement is empty".into())
        })?;
    // Rotate so the cut sits at angle 0; then no interval wraps and a linear
    // sweep merges everything.
    let mut rotated: Vec<(f64, f64)> = ivals
        .iter()
        .map(|&(s, len)| ((s - cut).rem_euclid(2.0 * PI), len))
        .collect();
    rotated.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new(); // (start, end)
    for (s, len) in rotated {
        match merged.last_mut() {
            Some((_, end)) if s <= *end + 1e-14 => *end = end.max(s + len),
            _ => merged.push((s, s + len)),
        }
    }
    merged
        .into_iter()
        .map(|(s, end)| {
            let len = end - s;
            if len >= 2.0 * PI - 1e-12 {
                return Err(Error::InvalidInput(
                    "merged arc leaves no complement on the circle".into(),
                ));
            }
            let mid = cut + s + 0.5 * len;
            let center = UnitVector::new(vec![mid.cos(), mid.sin()])?;
            SphereCap::new(center, 0.5 * len)
        })
        .collect()
}

fn normalize_disjoint(caps: &[SphereCap]) -> Result<Vec<SphereCap>> {
    // drop caps nested inside another, then require pairwise positive gaps
    let mut kept: Vec<SphereCap> = Vec::new();
    'outer: for c in caps {
        for k in kept.iter_mut() {
            let d = sphere_distance(&c.center, &k.center);
            if d + c.radius <= k.radius + 1e-14 {
                continue 'outer; // c inside k
            }
            if d + k.radius <= c.radius + 1e-14 {
                *k = c.clone(); // k inside c
                continue 'outer;
            }
        }
        kept.push(c.clone());
    }
    for i in 0..kept.len() {
        for j in i + 1..kept.len() {
            let d = sphere_distance(&kept[i].center, &kept[j].center);
            if d < kept[i].radius + kept[j].radius + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "caps {i} and {j} overlap; for n >= 3 the union boundary \
                     would have corners and no rolling-ball radius"
                )));
            }
        }
    }
    Ok(kept)
}

fn analytic_delta0(caps: &[SphereCap], n: usize) -> Result<f64> {
    let mut delta0 = caps.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min);
    if n == 2 {
        // exact complement gaps from sorted arc endpoints
        let mut ends: Vec<(f64, f64)> = caps
            .iter()
            .map(|c| {
                let ang = c.center.coords()[1].atan2(c.center.coords()[0]);
                ((ang - c.radius).rem_euclid(2.0 * PI), 2.0 * c.radius)
            })
            .collect();
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..ends.len() {
            let (s, len) = ends[i];
            let next_start = if i + 1 < ends.len() {
                ends[i + 1].0
            } else {
                ends[0].0 + 2.0 * PI
            };
            let gap = next_start - (s + len);
            delta0 = delta0.min(0.5 * gap);
        }
    } else {
        for i in 0..caps.len() {
            for j in i + 1..caps.len() {
                let d = sphere_distance(&caps[i].center, &caps[j].center);
                let gap = d - caps[i].radius - caps[j].radius;
                delta0 = delta0.min(0.5 * gap);
            }
        }
        // sampled inradius of the complement
        let mut inradius: f64 = 0.0;
        for k in 0..2048 {
            let x = sphere_lattice(n, k);
            let d = caps
                .iter()
                .map(|c| c.distance(&x))
                .fold(f64::INFINITY, f64::min);
            inradius = inradius.max(d);
        }
        delta0 = delta0.min(inradius);
    }
    if !(delta0 > 0.0) {
        return Err(Error::InvalidInput(
            "cap union admits no positive rolling-ball radius".into(),
        ));
    }
    Ok(delta0)
}

/// Sampled check that every point of the closed complement lies in some cap
/// of radius `delta0` interior to the complement.
fn rolling_ball_check(caps: &[SphereCap], delta0: f64) -> bool {
    let n = caps[0].center.dim();
    let union_dist = |x: &UnitVector| -> f64 {
        caps.iter()
            .map(|c| c.distance(x))
            .fold(f64::INFINITY, f64::min)
    };
    let exterior_ball_ok = |q: &UnitVector| -> bool {
        caps.iter()
            .all(|c| sphere_distance(q, &c.center) >= c.radius + delta0 - 1e-9)
    };
    let mut test_points: Vec<UnitVector> = Vec::new();
    // ring samples on every cap boundary
    let ring = if n == 2 { 2 } else { 64 };
    for c in caps {
        for k in 0..ring {
            let probe = if n == 2 {
                let ang = c.center.coords()[1].atan2(c.center.coords()[0])
                    + if k == 0 { c.radius } else { -c.radius };
                UnitVector::new(vec![ang.cos(), ang.sin()]).unwrap()
            } else {
                let t = sphere_lattice(n, k + 7);
                match c.center.walk_towards(&t, c.radius) {
                    Ok(p) => p,
                    Err(_) => continue,
                }
            };
            test_points.push(probe);
        }
    }
    for k in 0..1024 {
        let x = sphere_lattice(n, k);
        if union_dist(&x) > 0.0 {
            test_points.push(x);
        }
    }
    for x in &test_points {
        let d = union_dist(x);
        if d >= delta0 {
            continue; // the ball around x itself stays in the complement
        }
        // tangent ball: walk away from the nearest cap center through x
        let nearest = caps
            .iter()
            .min_by(|a, b| a.distance(x).partial_cmp(&b.distance(x)).unwrap())
            .unwrap();
        let q = match nearest.center.walk_towards(x, nearest.radius + delta0) {
            Ok(q) => q,
            Err(_) => return false,
        };
        if !exterior_ball_ok(&q) {
            return false;
        }
    }
    true
}

/// Deterministic quasi-uniform sequence of sphere points; prefixes of the
/// sequence are themselves reasonably uniform, so growing families stay
/// nested. n = 2 uses golden-angle increments, n = 3 a van der Corput /
/// golden-angle spiral.
pub fn sphere_lattice(n: usize, j: usize) -> UnitVector {
    const GOLD: f64 = 0.618_033_988_749_894_9;
    match n {
        2 => {
            let theta = 2.0 * PI * ((j as f64) * GOLD).fract();
            UnitVector {
                coords: vec![theta.cos(), theta.sin()],
            }
        }
        3 => {
            let z = 1.0 - 2.0 * van_der_corput(j as u64 + 1);
            let theta = 2.0 * PI * ((j as f64) * GOLD).fract();
            let r = (1.0 - z * z).max(0.0).sqrt();
            UnitVector::renormalized(vec![r * theta.cos(), r * theta.sin(), z])
        }
        _ => {
            // n = 1 fallback used nowhere in production paths
            UnitVector {
                coords: vec![if j % 2 == 0 { 1.0 } else { -1.0 }],
            }
        }
    }
}

fn van_der_corput(mut k: u64) -> f64 {
    let mut r = 0.0;
    let mut base = 0.5;
    while k > 0 {
        r += (k & 1) as f64 * base;
        k >>= 1;
        base *= 0.5;
    }
    r
}

fn depth_in_union(f: &CapUnion, c: &UnitVector) -> f64 {
    f.caps
        .iter()
        .map(|cap| cap.radius - sphere_distance(c, &cap.center))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Caps of radius >= delta0 contained in F. The family is nested in `count`
/// and always contains the original caps, so for a single cap it contains F
/// itself. Containment is exact: every emitted cap lies inside one original
/// cap by the triangle inequality.
pub fn enumerate_subballs(f: &CapUnion, count: usize) -> Result<Vec<SphereCap>> {
    if count == 0 {
        return Err(Error::EmptyFamily("requested zero sub-balls".into()));
    }
    let n = f.dim();
    let mut family: Vec<SphereCap> = Vec::new();
    let push = |cap: SphereCap, family: &mut Vec<SphereCap>| {
        let dup = family.iter().any(|c| {
            sphere_distance(&c.center, &cap.center) < 1e-12 && (c.radius - cap.radius).abs() < 1e-12
        });
        if !dup {
            family.push(cap);
        }
    };
    for cap in f.caps() {
        if family.len() >= count {
            break;
        }
        push(cap.clone(), &mut family);
    }
    let budget = 256 * count + 4096;
    let mut j = 0;
    while family.len() < count && j < budget {
        let c = sphere_lattice(n, j);
        j += 1;
        let depth = depth_in_union(f, &c);
        if depth >= f.delta0() - 1e-12 {
            let radius = depth.min(PI - 1e-9);
            if radius > 0.0 {
                push(SphereCap { center: c, radius }, &mut family);
            }
        }
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily(
            "no cap of radius delta0 fits inside F".into(),
        ));
    }
    Ok(family)
}

/// Midpoints of the complement gaps: centers of the balls doubly tangent to
/// F. These realize the rolling-ball property exactly where the complement
/// pinches to width 2 delta0, which lattice sampling alone would miss.
fn complement_gap_midpoints(f: &CapUnion) -> Vec<UnitVector> {
    let caps = f.caps();
    let mut mids = Vec::new();
    if f.dim() == 2 {
        let mut ends: Vec<(f64, f64)> = caps
            .iter()
            .map(|c| {
                let ang = c.center.coords()[1].atan2(c.center.coords()[0]);
                ((ang - c.radius).rem_euclid(2.0 * PI), 2.0 * c.radius)
            })
            .collect();
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..ends.len() {
            let (s, len) = ends[i];
            let next_start = if i + 1 < ends.len() {
                ends[i + 1].0
            } else {
                ends[0].0 + 2.0 * PI
            };
            let mid = 0.5 * (s + len + next_start);
            if let Ok(u) = UnitVector::new(vec![mid.cos(), mid.sin()]) {
                mids.push(u);
            }
        }
    } else {
        for i in 0..caps.len() {
            for j in 0..caps.len() {
                if i == j {
                    continue;
                }
                let d = sphere_distance(&caps[i].center, &caps[j].center);
                let gap = d - caps[i].radius - caps[j].radius;
                if gap > 0.0 {
                    if let Ok(m) = caps[i]
                        .center
                        .walk_towards(&caps[j].center, caps[i].radius + 0.5 * gap)
                    {
                        mids.push(m);
                    }
                }
            }
        }
    }
    mids
}

/// Caps of radius <= pi - delta0 containing F, built as complements of
/// rolling balls of the closed complement. Nested in `count`; for a single
/// cap the family contains F itself (via the antipodal candidate).
pub fn enumerate_superballs(f: &CapUnion, count: usize) -> Result<Vec<SphereCap>> {
    if count == 0 {
        return Err(Error::EmptyFamily("requested zero super-balls".into()));
    }
    let n = f.dim();
    let mut family: Vec<SphereCap> = Vec::new();
    let consider = |c: &UnitVector, family: &mut Vec<SphereCap>| {
        let d = f
            .caps()
            .iter()
            .map(|cap| cap.distance(c))
            .fold(f64::INFINITY, f64::min);
        if d >= f.delta0() - 1e-12 && d < PI {
            let cap = SphereCap {
                center: c.antipode(),
                radius: PI - d,
            };
            let dup = family.iter().any(|k| {
                sphere_distance(&k.center, &cap.center) < 1e-12
                    && (k.radius - cap.radius).abs() < 1e-12
            });
            if !dup {
                family.push(cap);
            }
        }
    };
    for cap in f.caps() {
        if family.len() >= count {
            break;
        }
        consider(&cap.center.antipode(), &mut family);
    }
    for mid in complement_gap_midpoints(f) {
        if family.len() >= count {
            break;
        }
        consider(&mid, &mut family);
    }
    let budget = 256 * count + 4096;
    let mut j = 0;
    while family.len() < count && j < budget {
        let c = sphere_lattice(n, j);
        j += 1;
        consider(&c, &mut family);
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily(
            "no complement cap of radius delta0 exists".into(),
        ));
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn e(n: usize, k: usize) -> UnitVector {
        UnitVector::axis(n, k)
    }

    fn half_circle() -> CapUnion {
        CapUnion::new(vec![SphereCap::new(e(2, 0), PI / 2.0).unwrap()]).unwrap()
    }

    fn random_unit(rng: &mut StdRng, n: usize) -> UnitVector {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if let Ok(u) = UnitVector::new(v) {
                return u;
            }
        }
    }

    #[test]
    fn distance_basics() {
        let x = e(3, 0);
        assert_eq!(sphere_distance(&x, &x), 0.0);
        assert!((sphere_distance(&x, &x.antipode()) - PI).abs() < 1e-15);
        assert!((sphere_distance(&x, &e(3, 1)) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_triangle_inequality_sampled() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let a = random_unit(&mut rng, 3);
            let b = random_unit(&mut rng, 3);
            let c = random_unit(&mut rng, 3);
            let ab = sphere_distance(&a, &b);
            let bc = sphere_distance(&b, &c);
            let ac = sphere_distance(&a, &c);
            assert!(ac <= ab + bc + 1e-12);
            assert!((ab - sphere_distance(&b, &a)).abs() < 1e-15);
        }
    }

    #[test]
    fn support_function_examples() {
        let f = half_circle();
        assert!((support_function(&f, &[1.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!(support_function(&f, &[-1.0, 0.0]).abs() < 1e-14);
        // e2 lies on the cap boundary; oracle: dense sampling of directions in F
        let dense: f64 = (0..20000)
            .map(|k| {
                let ang = -PI / 2.0 + PI * (k as f64) / 19999.0;
                2.0 * ang.sin()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let v = support_function(&f, &[0.0, 2.0]);
        assert!((v - 2.0).abs() < 1e-12);
        assert!((v - dense).abs() < 1e-6);
    }

    #[test]
    fn support_function_homogeneous_and_monotone() {
        let mut rng = StdRng::seed_from_u64(11);
        let small = CapUnion::new(vec![SphereCap::new(e(3, 0), 0.4).unwrap()]).unwrap();
        let big = CapUnion::new(vec![SphereCap::new(e(3, 0), 0.9).unwrap()]).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let c = rng.gen_range(0.01..10.0);
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            let vx = support_function(&small, &x);
            assert!(
                (support_function(&small, &cx) - c * vx).abs() <= 1e-12 * (1.0 + c * vx.abs())
            );
            assert!(support_function(&small, &x) <= support_function(&big, &x) + 1e-13);
        }
        assert_eq!(support_function(&small, &[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn dist_to_set_examples_and_identity() {
        let quarter = CapUnion::new(vec![SphereCap::new(e(2, 0), PI / 4.0).unwrap()]).unwrap();
        let inside = e(2, 0);
        assert_eq!(dist_to_set(&inside, &quarter), 0.0);
        // antipode: brute-force oracle over sampled points of F
        let brute: f64 = (0..40000)
            .map(|k| {
                let ang = -PI / 4.0 + PI / 2.0 * (k as f64) / 39999.0;
                let p = UnitVector::new(vec![ang.cos(), ang.sin()]).unwrap();
                sphere_distance(&e(2, 0).antipode(), &p)
            })
            .fold(f64::INFINITY, f64::min);
        let d = dist_to_set(&e(2, 0).antipode(), &quarter);
        assert!((d - 3.0 * PI / 4.0).abs() < 1e-12);
        assert!((d - brute).abs() < 1e-4);

        // cos(dist) = V_F on the sphere (Lemma-4.6-type identity)
        let mut rng = StdRng::seed_from_u64(3);
        let f3 = CapUnion::new(vec![
            SphereCap::new(e(3, 0), 0.7).unwrap(),
            SphereCap::new(e(3, 2).antipode(), 0.5).unwrap(),
        ])
        .unwrap();
        for _ in 0..1000 {
            let x = random_unit(&mut rng, 3);
            let lhs = dist_to_set(&x, &f3).cos();
            let rhs = support_function(&f3, x.coords());
            assert!((lhs - rhs).abs() < 1e-10, "identity failed: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn arc_merging_and_delta0() {
        // two overlapping arcs merge into one
        let a = SphereCap::new(e(2, 0), 0.8).unwrap();
        let b = SphereCap::new(UnitVector::new(vec![0.9f64.cos(), 0.9f64.sin()]).unwrap(), 0.5)
            .unwrap();
        let f = CapUnion::new(vec![a, b]).unwrap();
        assert_eq!(f.caps().len(), 1);
        // whole circle rejected
        let whole = CapUnion::new(vec![
            SphereCap::new(e(2, 0), 1.8).unwrap(),
            SphereCap::new(e(2, 0).antipode(), 1.8).unwrap(),
        ]);
        assert!(whole.is_err());
        // half circle: delta0 = pi/2 limited by the complement gap
        let h = half_circle();
        assert!((h.delta0() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_caps_rejected_in_3d() {
        let a = SphereCap::new(e(3, 0), 0.6).unwrap();
        let b = SphereCap::new(e(3, 1), 1.2).unwrap();
        assert!(CapUnion::new(vec![a, b]).is_err());
    }

    #[test]
    fn subballs_contain_and_superballs_cover() {
        let f = CapUnion::new(vec![
            SphereCap::new(e(3, 0), 0.9).unwrap(),
            SphereCap::new(e(3, 0).antipode(), 0.5).unwrap(),
        ])
        .unwrap();
        let subs = enumerate_subballs(&f, 40).unwrap();
        assert!(subs.len() >= 2);
        for cap in &subs {
            assert!(cap.radius >= f.delta0() - 1e-9);
            // sampled containment
            for k in 0..100 {
                let t = sphere_lattice(3, k + 13);
                if let Ok(p) = cap.center.walk_towards(&t, cap.radius * 0.999) {
                    assert!(f.contains(&p), "sub-ball leaks outside F");
                }
            }
        }
        let sups = enumerate_superballs(&f, 40).unwrap();
        assert!(!sups.is_empty());
        for cap in &sups {
            assert!(cap.radius <= PI - f.delta0() + 1e-9);
            for k in 0..200 {
                let x = sphere_lattice(3, k);
                if f.contains(&x) {
                    assert!(cap.contains(&x), "super-ball misses a point of F");
                }
            }
        }
    }

    #[test]
    fn single_cap_families_include_f_itself() {
        let f = half_circle();
        let subs = enumerate_subballs(&f, 8).unwrap();
        assert!(subs.iter().any(|c| {
            sphere_distance(&c.center, &e(2, 0)) < 1e-12 && (c.radius - PI / 2.0).abs() < 1e-12
        }));
        let sups = enumerate_superballs(&f, 8).unwrap();
        assert!(sups.iter().any(|c| {
            sphere_distance(&c.center, &e(2, 0)) < 1e-12 && (c.radius - PI / 2.0).abs() < 1e-12
        }));
        // inf of V over super-balls at -e1 equals V_F(-e1) = 0
        let v = sups
            .iter()
            .map(|c| c.support(&[-1.0, 0.0]))
            .fold(f64::INFINITY, f64::min);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn family_sandwich_tightens_with_count() {
        // two separated arcs so that delta0 is well below the cap radii and
        // the families are genuinely richer than the original caps
        let c2 = UnitVector::new(vec![(2.2f64).cos(), (2.2f64).sin()]).unwrap();
        let f = CapUnion::new(vec![
            SphereCap::new(e(2, 0), 0.7).unwrap(),
            SphereCap::new(c2, 0.6).unwrap(),
        ])
        .unwrap();
        let mut rng = StdRng::seed_from_u64(19);
        let xs: Vec<UnitVector> = (0..200).map(|_| random_unit(&mut rng, 2)).collect();
        let mut prev_gap = f64::INFINITY;
        for count in [8usize, 32, 128] {
            let subs = enumerate_subballs(&f, count).unwrap();
            let sups = enumerate_superballs(&f, count).unwrap();
            let mut gap: f64 = 0.0;
            for x in &xs {
                let vf = support_function(&f, x.coords());
                let lo = subs
                    .iter()
                    .map(|c| c.support(x.coords()))
                    .fold(f64::NEG_INFINITY, f64::max);
                let hi = sups
                    .iter()
                    .map(|c| c.support(x.coords()))
                    .fold(f64::INFINITY, f64::min);
                assert!(lo <= vf + 1e-12, "sub-ball sup exceeds V_F");
                assert!(vf <= hi + 1e-12, "super-ball inf undercuts V_F");
                gap = gap.max((vf - lo).max(hi - vf));
            }
            assert!(gap <= prev_gap + 1e-12, "gap grew with richer family");
            prev_gap = gap;
        }
        assert!(prev_gap < 0.05, "families did not tighten: gap {prev_gap}");
    }
}
