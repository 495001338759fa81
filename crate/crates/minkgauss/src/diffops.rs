//! Second-order finite-difference calculus on box grids: gradients,
//! Hessians, the Gauss curvature operator for spacelike graphs, principal
//! curvatures, blow-downs, and the Gauss map image.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::hull::KleinPoint;
use crate::linalg::SymMat;
use crate::sphere::UnitVector;
use crate::surface::Surface;

/// Stencil for a one-dimensional derivative: (offset, weight) pairs.
type Stencil = ([(isize, f64); 4], usize);

fn first_deriv_stencil(m: usize, i: usize, h: f64) -> Stencil {
    if i == 0 {
        (
            [(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h), (0, 0.0)],
            3,
        )
    } else if i == m - 1 {
        (
            [(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h), (0, 0.0)],
            3,
        )
    } else {
        (
            [(-1, -0.5 / h), (1, 0.5 / h), (0, 0.0), (0, 0.0)],
            2,
        )
    }
}

fn second_deriv_stencil(m: usize, i: usize, h: f64) -> Stencil {
    let h2 = h * h;
    if i == 0 {
        (
            [(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)],
            4,
        )
    } else if i == m - 1 {
        (
            [
                (0, 2.0 / h2),
                (-1, -5.0 / h2),
                (-2, 4.0 / h2),
                (-3, -1.0 / h2),
            ],
            4,
        )
    } else {
        (
            [(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2), (0, 0.0)],
            3,
        )
    }
}

fn apply_axis(u: &GridFunction, flat: usize, axis: usize, st: &Stencil) -> f64 {
    let stride = u.grid().stride(axis) as isize;
    let mut s = 0.0;
    for &(off, w) in &st.0[..st.1] {
        s += w * u.value((flat as isize + off * stride) as usize);
    }
    s
}

/// Second-order gradient at every node; central inside, one-sided on the
/// boundary. Exact on affine functions.
pub fn gradient(u: &GridFunction) -> Vec<[f64; 3]> {
    let g = u.grid();
    let (n, m, h) = (g.dim(), g.nodes_per_axis(), g.spacing());
    let mut out = vec![[0.0; 3]; g.node_count()];
    for flat in 0..g.node_count() {
        let idx = g.unflat(flat);
        for k in 0..n {
            let st = first_deriv_stencil(m, idx[k], h);
            out[flat][k] = apply_axis(u, flat, k, &st);
        }
    }
    out
}

/// Second-order Hessian at every node; symmetric by construction and exact
/// on quadratics.
pub fn hessian(u: &GridFunction) -> Vec<SymMat> {
    let g = u.grid();
    let (n, m, h) = (g.dim(), g.nodes_per_axis(), g.spacing());
    let mut out = vec![SymMat::zero(n); g.node_count()];
    for flat in 0..g.node_count() {
        let idx = g.unflat(flat);
        for k in 0..n {
            let st = second_deriv_stencil(m, idx[k], h);
            out[flat].set(k, k, apply_axis(u, flat, k, &st));
        }
        for k in 0..n {
            for l in k + 1..n {
                let sk = first_deriv_stencil(m, idx[k], h);
                let sl = first_deriv_stencil(m, idx[l], h);
                let stride_k = g.stride(k) as isize;
                let stride_l = g.stride(l) as isize;
                let mut s = 0.0;
                for &(ok, wk) in &sk.0[..sk.1] {
                    for &(ol, wl) in &sl.0[..sl.1] {
                        let j = flat as isize + ok * stride_k + ol * stride_l;
                        s += wk * wl * u.value(j as usize);
                    }
                }
                out[flat].set(k, l, s);
            }
        }
    }
    out
}

/// Safeguards and strictness switches for the curvature operator.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureOptions {
    /// |Du|^2 is clipped to at most 1 - eps_space when safeguarding.
    pub eps_space: f64,
    /// Hessian eigenvalues are floored at eps_convex inside the determinant
    /// when safeguarding.
    pub eps_convex: f64,
    pub safeguard: bool,
    pub strict_spacelike: bool,
    pub strict_convex: bool,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        CurvatureOptions {
            eps_space: 1e-6,
            eps_convex: 1e-10,
            safeguard: true,
            strict_spacelike: false,
            strict_convex: false,
        }
    }
}

impl CurvatureOptions {
    pub fn strict() -> Self {
        CurvatureOptions {
            safeguard: false,
            strict_spacelike: true,
            strict_convex: true,
            ..Default::default()
        }
    }
}

/// Nodal curvature data over the interior. The epsilons actually used and
/// the number of clipped nodes are recorded, so no clipping is silent.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub interior: Vec<usize>,
    pub k: Vec<f64>,
    pub principal: Vec<[f64; 3]>,
    pub mean: Vec<f64>,
    pub tilt: Vec<f64>,
    pub gradient_norm_max: f64,
    pub min_hessian_eigenvalue: f64,
    pub clipped_nodes: usize,
    pub eps_space: f64,
    pub eps_convex: f64,
}

impl CurvatureReport {
    /// sup over interior nodes of |log K - log f|.
    pub fn sup_log_residual(&self, f: f64) -> f64 {
        self.k
            .iter()
            .map(|&k| {
                if k > 0.0 {
                    (k.ln() - f.ln()).abs()
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// K[u] = det(D^2 u) / (1 - |Du|^2)^((n+2)/2) at the interior nodes, plus
/// the second-fundamental-form eigenvalues with respect to the induced
/// metric, the mean curvature, and the tilt 1/sqrt(1 - |Du|^2).
pub fn gauss_curvature(u: &GridFunction, opts: &CurvatureOptions) -> Result<CurvatureReport> {
    let g = u.grid();
    let n = g.dim();
    let grads = gradient(u);
    let hessians = hessian(u);
    let interior = g.interior_nodes();

    let mut k = Vec::with_capacity(interior.len());
    let mut principal = Vec::with_capacity(interior.len());
    let mut mean = Vec::with_capacity(interior.len());
    let mut tilt = Vec::with_capacity(interior.len());
    let mut gradient_norm_max: f64 = 0.0;
    let mut min_hessian_eigenvalue = f64::INFINITY;
    let mut clipped_nodes = 0usize;

    for &flat in &interior {
        let gr = &grads[flat];
        let gn2: f64 = gr[..n].iter().map(|c| c * c).sum();
        gradient_norm_max = gradient_norm_max.max(gn2.sqrt());
        if opts.strict_spacelike && gn2 >= 1.0 {
            return Err(Error::NotSpacelike(format!(
                "|Du| = {} at node {:?}",
                gn2.sqrt(),
                g.coords(flat)
            )));
        }
        let hess = hessians[flat];
        let min_eig = hess.min_eigenvalue();
        min_hessian_eigenvalue = min_hessian_eigenvalue.min(min_eig);
        if opts.strict_convex && min_eig <= 0.0 {
            return Err(Error::NotConvex(format!(
                "min Hessian eigenvalue {} at node {:?}",
                min_eig,
                g.coords(flat)
            )));
        }

        let mut clipped = false;
        let gn2_eff = if opts.safeguard && gn2 > 1.0 - opts.eps_space {
            clipped = true;
            1.0 - opts.eps_space
        } else {
            gn2
        };
        let hess_eff = if opts.safeguard {
            let (m, c) = hess.floor_eigenvalues(opts.eps_convex);
            clipped |= c;
            m
        } else {
            hess
        };
        if clipped {
            clipped_nodes += 1;
        }

        let root = (1.0 - gn2_eff).sqrt();
        let kv = hess_eff.det() / (1.0 - gn2_eff).powf((n as f64 + 2.0) / 2.0);
        k.push(kv);
        tilt.push(1.0 / root);

        // second fundamental form and induced metric
        let mut h2 = hess_eff;
        for i in 0..h2.a.len() {
            h2.a[i] /= root;
        }
        let mut metric = SymMat::zero(n);
        for i in 0..n {
            for j in i..n {
                let d = if i == j { 1.0 } else { 0.0 };
                metric.set(i, j, d - gr[i] * gr[j]);
            }
        }
        let lam = h2.generalized_eigenvalues(&metric)?;
        let mut pc = [0.0f64; 3];
        pc[..n].copy_from_slice(&lam[..n]);
        mean.push(pc[..n].iter().sum());
        principal.push(pc);
    }

    Ok(CurvatureReport {
        interior,
        k,
        principal,
        mean,
        tilt,
        gradient_norm_max,
        min_hessian_eigenvalue,
        clipped_nodes,
        eps_space: opts.eps_space,
        eps_convex: opts.eps_convex,
    })
}

/// Blow-down samples u(r d)/r with a convergence diagnostic and a simple
/// geometric extrapolation of the limit.
#[derive(Debug, Clone)]
pub struct BlowDown {
    pub values: Vec<f64>,
    pub estimate: f64,
    pub last_delta: f64,
}

pub fn blow_down(u: &impl Surface, direction: &UnitVector, radii: &[f64]) -> Result<BlowDown> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "blow-down needs at least three increasing radii".into(),
        ));
    }
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let x: Vec<f64> = direction.coords().iter().map(|c| c * r).collect();
            u.value(&x) / r
        })
        .collect();
    let m = values.len();
    let d1 = values[m - 1] - values[m - 2];
    let d0 = values[m - 2] - values[m - 3];
    if d1.abs() > d0.abs() + 1e-12 && d1.abs() > 1e-10 {
        return Err(Error::NoConvergence(format!(
            "blow-down deltas grew: {:e} then {:e}",
            d0.abs(),
            d1.abs()
        )));
    }
    let estimate = if d0.abs() > 1e-300 {
        let q = d1 / d0;
        if q.abs() < 0.95 {
            values[m - 1] + d1 * q / (1.0 - q)
        } else {
            values[m - 1]
        }
    } else {
        values[m - 1]
    };
    Ok(BlowDown {
        values,
        estimate,
        last_delta: d1,
    })
}

/// Gradient values at interior nodes as Klein-model points. Fails when the
/// discrete gradient leaves the unit ball.
pub fn gauss_map_image(u: &GridFunction) -> Result<Vec<KleinPoint>> {
    let g = u.grid();
    let n = g.dim();
    let grads = gradient(u);
    g.interior_nodes()
        .into_iter()
        .map(|flat| {
            KleinPoint::new(grads[flat][..n].to_vec()).map_err(|_| {
                Error::NotSpacelike(format!(
                    "gradient leaves the unit ball at {:?}",
                    g.coords(flat)
                ))
            })
        })
        .collect()
}

/// Convenience: the unit-hyperboloid-like graph sqrt(k^(-2/n) + |x|^2)
/// sampled on a grid.
pub fn sample_lightcone_bound(grid: Grid, k: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| crate::semitrough::lightcone_bound(k, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperboloid(grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| {
            (1.0 + x.iter().map(|c| c * c).sum::<f64>()).sqrt()
        })
    }

    #[test]
    fn gradient_exact_on_affine() {
        let g = Grid::new(2, 2.0, 0.25).unwrap();
        let u = GridFunction::from_fn(g.clone(), |x| 0.3 * x[0] - 0.5 * x[1] + 2.0);
        let gr = gradient(&u);
        for flat in 0..g.node_count() {
            assert!((gr[flat][0] - 0.3).abs() < 1e-13);
            assert!((gr[flat][1] + 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_of_hyperboloid() {
        let g = Grid::new(2, 2.0, 0.05).unwrap();
        let u = hyperboloid(g.clone());
        let gr = gradient(&u);
        let center = g.node_at(&[0.0, 0.0]).unwrap();
        assert!(gr[center][0].abs() < 1e-12 && gr[center][1].abs() < 1e-12);
        let p = g.node_at(&[1.0, 0.0]).unwrap();
        let exact = 1.0 / 2.0f64.sqrt();
        assert!((gr[p][0] - exact).abs() < 3.0 * 0.05 * 0.05);
        assert!(gr[p][1].abs() < 1e-12);
    }

    #[test]
    fn hessian_exact_on_quadratics() {
        let g = Grid::new(2, 2.0, 0.25).unwrap();
        let (a11, a22, a12) = (1.3, 0.4, -0.6);
        let u = GridFunction::from_fn(g.clone(), |x| {
            0.5 * (a11 * x[0] * x[0] + a22 * x[1] * x[1]) + a12 * x[0] * x[1]
        });
        let hs = hessian(&u);
        for flat in 0..g.node_count() {
            assert!((hs[flat].get(0, 0) - a11).abs() < 1e-11);
            assert!((hs[flat].get(1, 1) - a22).abs() < 1e-11);
            assert!((hs[flat].get(0, 1) - a12).abs() < 1e-11);
        }
        let aff = GridFunction::from_fn(g.clone(), |x| 0.2 * x[0] + 1.0);
        for h in hessian(&aff) {
            assert!(h.a.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn curvature_of_unit_hyperboloid_second_order() {
        let mut errs = Vec::new();
        for &h in &[0.1, 0.05] {
            let g = Grid::new(2, 2.0, h).unwrap();
            let u = hyperboloid(g);
            let rep = gauss_curvature(&u, &CurvatureOptions::default()).unwrap();
            let worst = rep
                .k
                .iter()
                .map(|k| (k - 1.0).abs())
                .fold(0.0f64, f64::max);
            assert!(worst <= 0.5 * h * h, "h = {h}: error {worst:e}");
            errs.push(worst);
        }
        assert!(errs[0] / errs[1] >= 3.5, "order below 2: {errs:?}");
    }

    #[test]
    fn curvature_of_scaled_hyperboloid_is_k() {
        let g = Grid::new(2, 2.0, 0.05).unwrap();
        let u = sample_lightcone_bound(g, 4.0);
        let rep = gauss_curvature(&u, &CurvatureOptions::default()).unwrap();
        let worst = rep.k.iter().map(|k| (k - 4.0).abs()).fold(0.0f64, f64::max);
        assert!(worst < 4.0 * 0.5 * 0.05 * 0.05 * 4.0, "error {worst:e}");
        assert_eq!(rep.clipped_nodes, 0);
    }

    #[test]
    fn affine_is_flat_and_not_strictly_convex() {
        let g = Grid::new(2, 2.0, 0.25).unwrap();
        let u = GridFunction::from_fn(g, |x| 0.4 * x[0] + 0.1 * x[1]);
        let strict = gauss_curvature(&u, &CurvatureOptions::strict());
        assert!(matches!(strict, Err(Error::NotConvex(_))));
        let mut opts = CurvatureOptions::default();
        opts.safeguard = false;
        let rep = gauss_curvature(&u, &opts).unwrap();
        assert!(rep.k.iter().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn safeguard_neutral_on_comfortable_inputs() {
        let g = Grid::new(2, 1.0, 0.125).unwrap();
        let u = hyperboloid(g);
        let on = gauss_curvature(&u, &CurvatureOptions::default()).unwrap();
        let mut o = CurvatureOptions::default();
        o.safeguard = false;
        let off = gauss_curvature(&u, &o).unwrap();
        assert_eq!(on.clipped_nodes, 0);
        for (a, b) in on.k.iter().zip(&off.k) {
            assert_eq!(a, b, "safeguarded and raw K differ bitwise");
        }
    }

    #[test]
    fn principal_curvature_product_matches_k() {
        let g = Grid::new(3, 1.0, 0.125).unwrap();
        let u = hyperboloid(g.clone());
        let rep = gauss_curvature(&u, &CurvatureOptions::default()).unwrap();
        for (i, k) in rep.k.iter().enumerate() {
            let prod: f64 = rep.principal[i][..3].iter().product();
            assert!(
                (prod - k).abs() <= 1e-9 * k.abs().max(1.0),
                "product {prod} vs K {k}"
            );
            assert!(rep.tilt[i] >= 1.0);
            let sum: f64 = rep.principal[i][..3].iter().sum();
            assert!((sum - rep.mean[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn blow_down_examples() {
        use crate::surface::FnSurface;
        let hyp = FnSurface {
            n: 2,
            f: |x: &[f64]| (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt(),
        };
        let dir = UnitVector::new(vec![0.6, 0.8]).unwrap();
        let bd = blow_down(&hyp, &dir, &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert!((bd.estimate - 1.0).abs() < 1e-4);

        let p = crate::profile::solve_profile(2, 40.0, 1e-9).unwrap();
        let st = FnSurface {
            n: 2,
            f: move |x: &[f64]| crate::profile::eval_standard(&p, x),
        };
        let e1 = UnitVector::axis(2, 0);
        let plus = blow_down(&st, &e1, &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert!((plus.estimate - 1.0).abs() < 1e-3);
        let minus = blow_down(&st, &e1.antipode(), &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert!(minus.estimate.abs() < 1e-6);
    }

    #[test]
    fn gauss_map_image_fills_klein_disk() {
        let g = Grid::new(2, 2.0, 0.05).unwrap();
        let u = hyperboloid(g);
        let pts = gauss_map_image(&u).unwrap();
        let rmax = pts.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
        // the image of |x| <= R has Klein radius R/sqrt(1+R^2)
        let interior_r: f64 = 2.0 - 0.05;
        let expect = interior_r / (1.0 + interior_r * interior_r).sqrt();
        assert!(rmax < 1.0);
        assert!((rmax - expect).abs() < 0.05);

        let aff = GridFunction::from_fn(Grid::new(2, 1.0, 0.25).unwrap(), |x| 0.3 * x[0]);
        let pts = gauss_map_image(&aff).unwrap();
        for p in pts {
            assert!((p.coords()[0] - 0.3).abs() < 1e-12);
            assert!(p.coords()[1].abs() < 1e-12);
        }
    }
}
