//! Semitroughs: entire convex spacelike graphs of constant Gauss curvature
//! asymptotic to the support function of a single spherical cap. They are
//! produced from the standard profile by a Householder alignment of the cap
//! axis, a boost whose rapidity encodes the cap radius, and a homothety
//! setting the curvature.

use crate::error::{Error, Result};
use crate::profile::ProfileFunction;
use crate::sphere::SphereCap;
use crate::surface::Surface;
use std::sync::Arc;

/// Boosted, rotated, rescaled semitrough, evaluable anywhere on R^n.
#[derive(Debug, Clone)]
pub struct Semitrough {
    cap: SphereCap,
    curvature: f64,
    /// Householder vector aligning e1 with the cap center; `None` when the
    /// center already is e1. The reflection is its own inverse.
    householder: Option<Vec<f64>>,
    rapidity: f64,
    scale: f64,
    profile: Arc<ProfileFunction>,
}

/// Graph of sqrt(k^(-2/n) + |x|^2): the hypersurface of constant Gauss
/// curvature k staying at bounded distance from the lightcone. It bounds
/// every curvature-k semitrough from above.
pub fn lightcone_bound(k: f64, x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let r2: f64 = x.iter().map(|c| c * c).sum();
    (k.powf(-2.0 / n) + r2).sqrt()
}

/// Assembles the semitrough with curvature `k` asymptotic to the support
/// function of `cap`. The rapidity comes from the radius through
/// radius = arccos(tanh(phi)).
pub fn make_semitrough(
    cap: SphereCap,
    k: f64,
    profile: Arc<ProfileFunction>,
) -> Result<Semitrough> {
    if k <= 0.0 {
        return Err(Error::InvalidInput(format!("curvature {k} must be positive")));
    }
    let n = cap.center.dim();
    if n < 2 {
        return Err(Error::DimensionUnsupported(
            "semitroughs need ambient dimension >= 2".into(),
        ));
    }
    if profile.dimension() != n {
        return Err(Error::InvalidInput(format!(
            "profile dimension {} does not match cap dimension {n}",
            profile.dimension()
        )));
    }
    let rapidity = cap.radius.cos().atanh();
    let scale = k.powf(-1.0 / n as f64);
    let mut v: Vec<f64> = cap.center.coords().to_vec();
    v[0] -= 1.0;
    let vnorm2: f64 = v.iter().map(|c| c * c).sum();
    let householder = if vnorm2 < 1e-28 { None } else { Some(v) };
    Ok(Semitrough {
        cap,
        curvature: k,
        householder,
        rapidity,
        scale,
        profile,
    })
}

impl Semitrough {
    pub fn cap(&self) -> &SphereCap {
        &self.cap
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn rapidity(&self) -> f64 {
        self.rapidity
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Reflects into the cap-aligned frame (involutive).
    fn to_cap_frame(&self, x: &[f64]) -> Vec<f64> {
        match &self.householder {
            None => x.to_vec(),
            Some(v) => {
                let vnorm2: f64 = v.iter().map(|c| c * c).sum();
                let d: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
                x.iter()
                    .zip(v)
                    .map(|(xi, vi)| xi - 2.0 * d / vnorm2 * vi)
                    .collect()
            }
        }
    }

    /// Standard-profile graph value at cap-frame coordinates (w, rho).
    fn standard(&self, w: f64, rho2: f64) -> f64 {
        let f = self.profile.value(w);
        (f * f + rho2).sqrt()
    }

    fn standard_slope(&self, w: f64, rho2: f64) -> f64 {
        let f = self.profile.value(w);
        let u = (f * f + rho2).sqrt();
        if u == 0.0 {
            0.0
        } else {
            f * self.profile.slope(w) / u
        }
    }

    pub fn try_value(&self, x: &[f64]) -> Result<f64> {
        let y = self.to_cap_frame(x);
        let mu = self.scale;
        let xi = y[0] / mu;
        let rho2: f64 = y[1..].iter().map(|c| (c / mu) * (c / mu)).sum();
        let phi = self.rapidity;
        let (ch, sh) = (phi.cosh(), phi.sinh());

        if sh == 0.0 {
            return Ok(mu * self.standard(xi, rho2));
        }

        // Solve ch * w + sh * u(w, rho) = xi. The lightcone bounds
        // rho <= u <= sqrt(1 + w^2 + rho^2) seed the bracket.
        let g = |w: f64| ch * w + sh * self.standard(w, rho2) - xi;
        let rho = rho2.sqrt();
        let (mut lo, mut hi);
        if sh > 0.0 {
            hi = (xi - sh * rho) / ch;
            lo = hi;
            let mut step = 1.0 + xi.abs();
            let mut k = 0;
            while g(lo) > 0.0 {
                lo -= step;
                step *= 2.0;
                k += 1;
                if k > 64 {
                    return Err(Error::BracketFailure(
                        "lower lightcone bracket violated".into(),
                    ));
                }
            }
        } else {
            lo = (xi - sh * rho) / ch;
            hi = lo;
            let mut step = 1.0 + xi.abs();
            let mut k = 0;
            while g(hi) < 0.0 {
                hi += step;
                step *= 2.0;
                k += 1;
                if k > 64 {
                    return Err(Error::BracketFailure(
                        "upper lightcone bracket violated".into(),
                    ));
                }
            }
        }
        if g(hi) < -1e-12 || g(lo) > 1e-12 {
            return Err(Error::BracketFailure(format!(
                "bracket [{lo}, {hi}] does not straddle the root"
            )));
        }

        // bisection to a coarse interval, then safeguarded Newton
        let mut w = 0.5 * (lo + hi);
        for _ in 0..40 {
            w = 0.5 * (lo + hi);
            if g(w) < 0.0 {
                lo = w;
            } else {
                hi = w;
            }
            if hi - lo < 1e-6 {
                break;
            }
        }
        for _ in 0..30 {
            let gw = g(w);
            if gw < 0.0 {
                lo = lo.max(w);
            } else {
                hi = hi.min(w);
            }
            let dg = ch + sh * self.standard_slope(w, rho2);
            let mut w_new = w - gw / dg;
            if !(w_new > lo && w_new < hi) {
                w_new = 0.5 * (lo + hi);
            }
            if (w_new - w).abs() < 1e-11 * (1.0 + w.abs()) {
                w = w_new;
                break;
            }
            w = w_new;
        }
        Ok(mu * (sh * w + ch * self.standard(w, rho2)))
    }
}

impl Surface for Semitrough {
    fn dim(&self) -> usize {
        self.cap.center.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.try_value(x).expect("semitrough bracket failure")
    }
}
