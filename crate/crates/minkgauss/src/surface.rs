//! Graph hypersurfaces as functions on R^n, plus the graph-level action of a
//! boost mixing the first spatial axis with time.

use crate::error::{Error, Result};

/// A function R^n -> R whose graph is a (weakly) spacelike hypersurface:
/// Lipschitz constant at most one. Everything the solvers exchange —
/// semitroughs, barriers, support functions, closures in tests — implements
/// this.
pub trait Surface {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

impl<S: Surface + ?Sized> Surface for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

/// Closure adapter.
pub struct FnSurface<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> Surface for FnSurface<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Graph of a surface after the boost of rapidity `phi` acting on the
/// (x^1, time) plane. Evaluation solves the strictly monotone scalar
/// equation cosh(phi) y + sinh(phi) f(y, x') = x^1 by bracketed bisection;
/// monotonicity follows from the Lipschitz bound on f.
pub struct BoostedGraph<S> {
    inner: S,
    phi: f64,
}

impl<S: Surface> BoostedGraph<S> {
    pub fn new(inner: S, phi: f64) -> Self {
        BoostedGraph { inner, phi }
    }

    pub fn try_value(&self, x: &[f64]) -> Result<f64> {
        let (ch, sh) = (self.phi.cosh(), self.phi.sinh());
        if sh == 0.0 {
            return Ok(self.inner.value(x));
        }
        let xi = x[0];
        let mut probe = x.to_vec();
        let g = |y: f64, probe: &mut [f64]| -> f64 {
            probe[0] = y;
            ch * y + sh * self.inner.value(probe) - xi
        };
        // expanding bracket around the unboosted abscissa
        let mut lo = xi / ch - 1.0;
        let mut hi = xi / ch + 1.0;
        let mut step = 1.0 + xi.abs();
        let mut k = 0;
        while g(lo, &mut probe) > 0.0 {
            lo -= step;
            step *= 2.0;
            k += 1;
            if k > 64 {
                return Err(Error::BracketFailure(
                    "no lower bracket for the boost equation".into(),
                ));
            }
        }
        step = 1.0 + xi.abs();
        k = 0;
        while g(hi, &mut probe) < 0.0 {
            hi += step;
            step *= 2.0;
            k += 1;
            if k > 64 {
                return Err(Error::BracketFailure(
                    "no upper bracket for the boost equation".into(),
                ));
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid, &mut probe) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * (1.0 + mid.abs()) {
                break;
            }
        }
        let y = 0.5 * (lo + hi);
        probe[0] = y;
        Ok(sh * y + ch * self.inner.value(&probe))
    }
}

impl<S: Surface> Surface for BoostedGraph<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.try_value(x).expect("boost bracket failure")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rapidity_is_identity() {
        let s = FnSurface {
            n: 2,
            f: |x: &[f64]| 0.3 * x[0] - 0.2 * x[1] + 1.0,
        };
        let b = BoostedGraph::new(&s, 0.0);
        assert_eq!(b.value(&[0.7, -0.4]), s.value(&[0.7, -0.4]));
    }

    #[test]
    fn boosted_hyperboloid_is_itself() {
        let h = FnSurface {
            n: 2,
            f: |x: &[f64]| (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt(),
        };
        for &phi in &[-1.2, -0.3, 0.5, 1.0] {
            let b = BoostedGraph::new(&h, phi);
            for &p in &[[0.0, 0.0], [1.5, -2.0], [4.0, 4.0]] {
                let v = b.try_value(&p).unwrap();
                let exact = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
                assert!((v - exact).abs() < 1e-9, "phi={phi}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn boosted_affine_graph() {
        // boosting the graph of f(x) = s x^1 tilts the slope like a velocity
        // addition: s' = (s cosh + sinh) / (cosh + s sinh)
        let s0 = 0.4;
        let f = FnSurface {
            n: 1,
            f: move |x: &[f64]| s0 * x[0],
        };
        let phi = 0.7f64;
        let b = BoostedGraph::new(&f, phi);
        let expect = (s0 * phi.cosh() + phi.sinh()) / (phi.cosh() + s0 * phi.sinh());
        let v = b.try_value(&[2.0]).unwrap();
        assert!((v - 2.0 * expect).abs() < 1e-10);
    }
}
