//! The one-dimensional profile underlying every semitrough.
//!
//! The profile satisfies the autonomous first-order equation
//! `f' = sqrt(1 - (1 + f^n)^(-2/n))`, which is the constant-one first
//! integral of the curvature equation for the rotationally reduced graph.
//! Working with the first-order form keeps the integral exactly checkable at
//! every sample. The solution grows like the lightcone on the right
//! (`f ~ sqrt(1 + t^2)` after a shift) and decays to zero on the left.

use crate::error::{Error, Result};

/// Behavior of the profile left of the tabulated range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftTail {
    /// Extend by f = 0; matches the decay of the semitrough profile.
    Flat,
    /// Extend by f = sqrt(1 + t^2); used for hyperboloid-type profiles.
    Lightcone,
}

/// Tabulated profile with slopes, cubic Hermite interpolation between
/// samples, and the asymptotic shift that anchors the right tail on the
/// lightcone at the end of the table.
#[derive(Debug, Clone)]
pub struct ProfileFunction {
    n: usize,
    ts: Vec<f64>,
    fs: Vec<f64>,
    dfs: Vec<f64>,
    shift: f64,
    lambda_limit: f64,
    left_tail: LeftTail,
}

/// Slope of the profile from the value of f, i.e. the first integral solved
/// for f'. Written through ln_1p/exp_m1 so the slope stays accurate deep in
/// the flat left tail where f^n underflows against 1.
pub fn profile_slope(n: usize, f: f64) -> f64 {
    let z = -(2.0 / n as f64) * f.powi(n as i32).ln_1p();
    (-z.exp_m1()).max(0.0).sqrt()
}

/// Starting value a determined by the starting slope b through
/// (1 - b^2)^(-n/2) - a^n = 1.
pub fn initial_value(n: usize, b: f64) -> Result<f64> {
    if !(0.0 < b && b < 1.0) {
        return Err(Error::InvalidInput(format!("slope b = {b} outside (0, 1)")));
    }
    let c = (1.0 - b * b).powf(-(n as f64) / 2.0) - 1.0;
    if c <= 0.0 {
        return Err(Error::InvalidInput("slope too small for a positive start".into()));
    }
    Ok(c.powf(1.0 / n as f64))
}

const DEFAULT_B: f64 = 0.6;

/// Residual of the first integral, (1 - f'^2)^(-n/2) - f^n - 1. The factor
/// 1 - f'^2 is evaluated as (1 - f')(1 + f') so the check keeps its accuracy
/// where the slope approaches one.
pub fn first_integral_residual(n: usize, f: f64, df: f64) -> f64 {
    let omega = (1.0 - df) * (1.0 + df);
    omega.powf(-(n as f64) / 2.0) - f.powi(n as i32) - 1.0
}

/// Integrates the profile equation, extracts the asymptotic shift, and
/// re-bases the parameter so the profile meets the lightcone at the right
/// end of the table.
///
/// The limit of `sqrt(1 + t^2) - f(t)` is estimated by Richardson
/// extrapolation over the last decade of an extended integration; the
/// applied shift then anchors the identity exactly at `t_span`, which is
/// where the tabulated range ends.
pub fn solve_profile(n: usize, t_span: f64, tol: f64) -> Result<ProfileFunction> {
    if n == 0 {
        return Err(Error::InvalidInput("profile dimension must be >= 1".into()));
    }
    if t_span < 20.0 {
        return Err(Error::InvalidInput(format!("t_span = {t_span} below 20")));
    }
    if tol > 1e-8 {
        return Err(Error::InvalidInput(format!("tol = {tol:e} above 1e-8")));
    }
    let a = initial_value(n, DEFAULT_B)?;
    let t_far = 10.0 * t_span;

    // forward sweep to t_far; dense sampling only matters inside the table
    let dense_until = t_span + 2.0;
    let mut fwd_t = vec![0.0];
    let mut fwd_f = vec![a];
    {
        let mut t = 0.0;
        let mut f = a;
        let mut h: f64 = 1e-3;
        while t < t_far {
            let h_cap = if t < dense_until { 0.02 } else { 2.0 };
            h = h.min(h_cap).min(t_far - t);
            let (f_new, err) = rk4_double_step(n, f, h);
            let atol = 1e-13 * (1.0 + f.abs()) * h.max(1e-6);
            if err > atol && h > 1e-10 {
                h *= 0.5;
                continue;
            }
            t += h;
            f = f_new;
            fwd_t.push(t);
            fwd_f.push(f);
            if err < 0.03 * atol {
                h *= 2.0;
            }
        }
    }

    // backward sweep until the profile is flat to working accuracy
    let f_stop = 1e-8f64.min((1.25e-13 * n as f64).powf(1.0 / n as f64));
    let mut bwd_t = Vec::new();
    let mut bwd_f = Vec::new();
    {
        let mut t = 0.0;
        let mut f = a;
        let mut h: f64 = 1e-3;
        // For n >= 3 the left tail decays only algebraically, so the sweep
        // may have to run very far; steps are allowed to grow out there.
        let t_floor = -1e7;
        while f > f_stop && t > t_floor {
            let h_cap = if t > -(t_span + 2.0) { 0.02 } else { 50.0 };
            h = h.min(h_cap);
            let (f_new, err) = rk4_double_step(n, f, -h);
            let atol = 1e-13 * (1.0 + f.abs()) * h.max(1e-6);
            if (err > atol || f_new <= 0.0) && h > 1e-12 {
                h *= 0.5;
                continue;
            }
            t -= h;
            f = f_new.max(0.0);
            bwd_t.push(t);
            bwd_f.push(f);
            if err < 0.03 * atol {
                h *= 2.0;
            }
            if f <= 0.0 {
                break;
            }
        }
    }

    // raw table in increasing t
    let mut ts: Vec<f64> = bwd_t.iter().rev().cloned().collect();
    let mut fs: Vec<f64> = bwd_f.iter().rev().cloned().collect();
    ts.extend_from_slice(&fwd_t);
    fs.extend_from_slice(&fwd_f);

    let raw = ProfileFunction {
        n,
        dfs: fs.iter().map(|&f| profile_slope(n, f)).collect(),
        ts,
        fs,
        shift: 0.0,
        lambda_limit: 0.0,
        left_tail: LeftTail::Flat,
    };

    // shift estimates over the last decade, at t_far / 2^k
    let lam = |t: f64| (1.0 + t * t).sqrt() - raw.interp_f(t);
    let nodes: Vec<f64> = (0..4).map(|k| t_far / 2f64.powi(k)).collect(); // descending
    let lams: Vec<f64> = nodes.iter().map(|&t| lam(t)).collect();
    // monotone approach: estimates at growing t may not overshoot
    for k in 0..lams.len() - 1 {
        if lams[k] > lams[k + 1] + 1e-10 {
            return Err(Error::NonMonotoneTail(format!(
                "shift estimate grew from {} to {} between t = {} and t = {}",
                lams[k + 1],
                lams[k],
                nodes[k + 1],
                nodes[k]
            )));
        }
    }
    // Richardson in 1/t^2, then in 1/t^3
    let r1: Vec<f64> = (0..3)
        .map(|k| (4.0 * lams[k] - lams[k + 1]) / 3.0)
        .collect();
    let r2: Vec<f64> = (0..2).map(|k| (8.0 * r1[k] - r1[k + 1]) / 7.0).collect();
    if (r2[0] - r2[1]).abs() > 1e-8 {
        return Err(Error::NonMonotoneTail(format!(
            "successive shift extrapolations differ by {:e}",
            (r2[0] - r2[1]).abs()
        )));
    }
    let lambda_limit = r2[0];

    // anchor: pick the applied shift so f(t_span + shift) meets the lightcone
    let target = (1.0 + t_span * t_span).sqrt();
    let shift = {
        let mut lo = t_span + lambda_limit - 0.5;
        let mut hi = t_span + lambda_limit + 0.5;
        while raw.interp_f(lo) > target {
            lo -= 0.5;
        }
        while raw.interp_f(hi) < target {
            hi += 0.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if raw.interp_f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi) - t_span
    };

    // re-base and trim to t <= t_span, ending on the exact anchor sample
    let mut ts = Vec::new();
    let mut fs = Vec::new();
    for (&t, &f) in raw.ts.iter().zip(&raw.fs) {
        let tb = t - shift;
        if tb < t_span - 1e-12 {
            ts.push(tb);
            fs.push(f);
        }
    }
    ts.push(t_span);
    fs.push(target);
    let dfs: Vec<f64> = fs.iter().map(|&f| profile_slope(n, f)).collect();

    let profile = ProfileFunction {
        n,
        ts,
        fs,
        dfs,
        shift,
        lambda_limit,
        left_tail: LeftTail::Flat,
    };
    profile.validate(tol)?;
    Ok(profile)
}

/// One RK4 step together with a step-doubling error estimate.
fn rk4_double_step(n: usize, f: f64, h: f64) -> (f64, f64) {
    let big = rk4_step(n, f, h);
    let half = rk4_step(n, f, 0.5 * h);
    let small = rk4_step(n, half, 0.5 * h);
    let err = (big - small).abs() / 15.0;
    // local extrapolation
    (small + (small - big) / 15.0, err)
}

fn rk4_step(n: usize, f: f64, h: f64) -> f64 {
    let k1 = profile_slope(n, f);
    let k2 = profile_slope(n, (f + 0.5 * h * k1).max(0.0));
    let k3 = profile_slope(n, (f + 0.5 * h * k2).max(0.0));
    let k4 = profile_slope(n, (f + h * k3).max(0.0));
    f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

impl ProfileFunction {
    /// Builds a profile from explicit samples. Intended for alternative
    /// graphs run through the same boost machinery (e.g. the lightcone
    /// profile sqrt(1 + t^2) whose rotated graph is the unit hyperboloid).
    pub fn from_samples(
        n: usize,
        ts: Vec<f64>,
        fs: Vec<f64>,
        dfs: Vec<f64>,
        left_tail: LeftTail,
    ) -> Result<Self> {
        if ts.len() < 2 || ts.len() != fs.len() || ts.len() != dfs.len() {
            return Err(Error::InvalidInput("inconsistent sample arrays".into()));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("sample times not increasing".into()));
        }
        if fs.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidInput("profile values must be finite and >= 0".into()));
        }
        if dfs.iter().any(|d| d.abs() >= 1.0) {
            return Err(Error::NotSpacelike("profile slope reaches 1".into()));
        }
        Ok(ProfileFunction {
            n,
            ts,
            fs,
            dfs,
            shift: 0.0,
            lambda_limit: 0.0,
            left_tail,
        })
    }

    /// The lightcone profile on [-span, span]; its rotated graph is the unit
    /// hyperboloid.
    pub fn lightcone(n: usize, span: f64, step: f64) -> Result<Self> {
        let m = (2.0 * span / step).round() as usize;
        let ts: Vec<f64> = (0..=m).map(|i| -span + step * i as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|t| (1.0 + t * t).sqrt()).collect();
        let dfs: Vec<f64> = ts.iter().map(|t| t / (1.0 + t * t).sqrt()).collect();
        Self::from_samples(n, ts, fs, dfs, LeftTail::Lightcone)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let mut worst = 0.0f64;
        for (&f, &df) in self.fs.iter().zip(&self.dfs) {
            worst = worst.max(first_integral_residual(self.n, f, df).abs());
        }
        if worst > tol {
            return Err(Error::ToleranceNotMet(format!(
                "first-integral residual {worst:e} exceeds {tol:e}"
            )));
        }
        let t0 = self.ts[0];
        if self.fs[0] >= 1e-6 || self.dfs[0] >= 1e-6 {
            return Err(Error::ToleranceNotMet(format!(
                "left tail not flat: f({t0}) = {:e}, f'({t0}) = {:e}",
                self.fs[0], self.dfs[0]
            )));
        }
        let tm = *self.ts.last().unwrap();
        let gap = ((1.0 + tm * tm).sqrt() - self.fs.last().unwrap()).abs();
        if gap >= 1e-6 {
            return Err(Error::ToleranceNotMet(format!(
                "right tail off the lightcone by {gap:e} at t = {tm}"
            )));
        }
        // strict monotonicity of f and f' encodes positivity of f''
        for w in self.fs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::ToleranceNotMet("profile not strictly increasing".into()));
            }
        }
        for w in self.dfs.windows(2) {
            if w[1] < w[0] - 1e-14 {
                return Err(Error::ToleranceNotMet("profile slope decreasing".into()));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Applied re-basing shift (negative: the raw profile sat above the
    /// lightcone at the anchoring point).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Richardson-extrapolated limit of sqrt(1 + t^2) - f(t) before
    /// re-basing; differs from the applied shift by the anchoring residual.
    pub fn lambda_limit(&self) -> f64 {
        self.lambda_limit
    }

    pub fn t_min(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ts
            .iter()
            .zip(&self.fs)
            .zip(&self.dfs)
            .map(|((&t, &f), &d)| (t, f, d))
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < self.ts[0] {
            match self.left_tail {
                LeftTail::Flat => 0.0,
                LeftTail::Lightcone => (1.0 + t * t).sqrt(),
            }
        } else if t > *self.ts.last().unwrap() {
            (1.0 + t * t).sqrt()
        } else {
            self.interp_f(t)
        }
    }

    pub fn slope(&self, t: f64) -> f64 {
        if t < self.ts[0] {
            match self.left_tail {
                LeftTail::Flat => 0.0,
                LeftTail::Lightcone => t / (1.0 + t * t).sqrt(),
            }
        } else if t > *self.ts.last().unwrap() {
            t / (1.0 + t * t).sqrt()
        } else {
            self.interp_df(t)
        }
    }

    fn bracket(&self, t: f64) -> usize {
        let idx = self.ts.partition_point(|&x| x <= t);
        idx.clamp(1, self.ts.len() - 1) - 1
    }

    fn interp_f(&self, t: f64) -> f64 {
        if t <= self.ts[0] {
            return self.fs[0];
        }
        if t >= *self.ts.last().unwrap() {
            return *self.fs.last().unwrap();
        }
        let i = self.bracket(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (f0, f1, d0, d1) = (self.fs[i], self.fs[i + 1], self.dfs[i], self.dfs[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
    }

    fn interp_df(&self, t: f64) -> f64 {
        if t <= self.ts[0] {
            return self.dfs[0];
        }
        if t >= *self.ts.last().unwrap() {
            return *self.dfs.last().unwrap();
        }
        let i = self.bracket(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (f0, f1, d0, d1) = (self.fs[i], self.fs[i + 1], self.dfs[i], self.dfs[i + 1]);
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh01 = -dh00;
        let dh11 = s * (3.0 * s - 2.0);
        dh00 * f0 / h + dh10 * d0 + dh01 * f1 / h + dh11 * d1
    }

    /// CSV export: t, f, f', first-integral residual.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,f,df,first_integral_residual\n");
        for (t, f, d) in self.samples() {
            let res = first_integral_residual(self.n, f, d);
            out.push_str(&format!("{t:.16e},{f:.16e},{d:.16e},{res:.16e}\n"));
        }
        out
    }
}

/// Value of the standard semitrough (curvature one, asymptotic to the
/// support function of the half sphere around the first axis).
pub fn eval_standard(profile: &ProfileFunction, x: &[f64]) -> f64 {
    let f = profile.value(x[0]);
    let rho2: f64 = x[1..].iter().map(|c| c * c).sum();
    (f * f + rho2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form for n = 2: t(f) = s - artanh(1/s) + C with s = sqrt(1+f^2)
    /// and C fixed by f(0) = a. Inverted numerically to machine accuracy.
    struct ClosedForm2 {
        c0: f64,
    }

    impl ClosedForm2 {
        fn new(a: f64) -> Self {
            let s = (1.0 + a * a).sqrt();
            ClosedForm2 {
                c0: -(s - (1.0 / s).atanh()),
            }
        }
        fn t_of_f(&self, f: f64) -> f64 {
            let s = (1.0 + f * f).sqrt();
            s - (1.0 / s).atanh() + self.c0
        }
        fn f_of_t(&self, t: f64) -> f64 {
            let (mut lo, mut hi) = (1e-12, 1.0);
            while self.t_of_f(hi) < t {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.t_of_f(mid) < t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }

    #[test]
    fn initial_value_closed_form() {
        // (1 - 0.36)^{-1} - a^2 = 1  =>  a = 0.75
        let a = initial_value(2, 0.6).unwrap();
        assert!((a - 0.75).abs() < 1e-15);
    }

    #[test]
    fn slope_from_first_integral() {
        // at f = 0.75, n = 2 the first integral forces f' = 0.6
        let d = profile_slope(2, 0.75);
        assert!((d - 0.6).abs() < 1e-15);
    }

    #[test]
    fn profile_matches_closed_form_n2() {
        let p = solve_profile(2, 40.0, 1e-9).unwrap();
        // the raw closed form is shifted by the applied re-basing
        let cf = ClosedForm2::new(0.75);
        let mut worst = 0.0f64;
        for &t in &[-10.0, -3.0, 0.0, 1.0, 5.0, 17.0, 33.0, 39.5] {
            let exact = cf.f_of_t(t + p.shift());
            worst = worst.max((p.value(t) - exact).abs());
        }
        assert!(worst < 1e-8, "profile off closed form by {worst:e}");
    }

    #[test]
    fn profile_tails_and_shift() {
        let p = solve_profile(2, 40.0, 1e-9).unwrap();
        assert!(p.value(-40.0) < 1e-6);
        assert!(p.slope(-40.0) < 1e-6);
        let t = 40.0f64;
        assert!(((1.0 + t * t).sqrt() - p.value(t)).abs() < 1e-6);
        // limit shift for a = 0.75: artanh(0.8) - 1.25
        let expected = (0.8f64).atanh() - 1.25;
        assert!(
            (p.lambda_limit() - expected).abs() < 1e-7,
            "lambda_limit = {}, expected {}",
            p.lambda_limit(),
            expected
        );
        assert!(p.shift() < 0.0);
        assert!((p.shift() - p.lambda_limit()).abs() < 1e-4);
    }

    #[test]
    fn first_integral_residual_tiny() {
        let p = solve_profile(2, 40.0, 1e-9).unwrap();
        let mut worst = 0.0f64;
        for (_, f, d) in p.samples() {
            let res = first_integral_residual(2, f, d);
            worst = worst.max(res.abs());
        }
        assert!(worst <= 1e-9, "residual {worst:e}");
    }

    #[test]
    fn standard_semitrough_values() {
        let p = solve_profile(2, 40.0, 1e-9).unwrap();
        // the starting value a sits at the re-based origin -shift
        assert!((eval_standard(&p, &[-p.shift(), 0.0]) - 0.75).abs() < 5e-9);
        // far left the graph hugs the support function V = 0
        assert!(eval_standard(&p, &[-50.0, 0.0]) < 1e-6);
        // far right it hugs the lightcone
        let t = 60.0;
        assert!((eval_standard(&p, &[t, 0.0]) - (1.0 + t * t).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn profile_n3_solves() {
        let p = solve_profile(3, 25.0, 1e-8).unwrap();
        assert!(p.value(-25.0) < 1e-6);
        let t = 25.0f64;
        assert!(((1.0 + t * t).sqrt() - p.value(t)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_profile(2, 10.0, 1e-9).is_err());
        assert!(solve_profile(2, 40.0, 1e-6).is_err());
        assert!(solve_profile(0, 40.0, 1e-9).is_err());
    }
}
