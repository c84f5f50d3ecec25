//! Adaptive ODE integration shared by every flow in the crate.
//!
//! States are flat `DVector<f64>`s; clients own the encoding. The scheme is
//! the Dormand-Prince 5(4) pair with PI step-size control and the usual
//! quartic continuous extension for dense output.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Stop with `Blowup` once the Euclidean norm of the state exceeds this.
    pub blowup_norm: f64,
    /// Stop with `FixedPoint` once the field norm stays below this for
    /// `fixedpoint_patience` consecutive accepted steps (or already at `t = 0`);
    /// 0 disables the check.
    pub fixedpoint_norm: f64,
    pub fixedpoint_patience: usize,
    /// Final time.
    pub horizon: f64,
    /// `None` records every accepted step; otherwise only these times plus the
    /// endpoints are kept.
    pub sample_times: Option<Vec<f64>>,
    /// Forces a constant step and disables error control.
    pub fixed_step: Option<f64>,
    pub max_step: f64,
    /// Rescale to this Euclidean norm after every accepted step.
    pub renormalize: Option<f64>,
    /// Growth exponent `p` in `‖x‖ ~ (T − t)^{−p}` used for the blow-up time fit.
    pub blowup_exponent: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            blowup_norm: 1e8,
            fixedpoint_norm: 1e-12,
            fixedpoint_patience: 10,
            horizon: 1e3,
            sample_times: None,
            fixed_step: None,
            max_step: f64::INFINITY,
            renormalize: None,
            blowup_exponent: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    FixedPoint,
    Blowup,
    Horizon,
    StepUnderflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub events: Vec<Event>,
    pub stats: Stats,
    /// Extrapolated singular time, present only for `Blowup`.
    pub blowup_time: Option<f64>,
}

impl Trajectory {
    pub fn terminal(&self) -> Event {
        *self.events.last().expect("a trajectory always ends with an event")
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectories are never empty")
    }
}

// Dormand-Prince coefficients
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step.
struct Dense {
    t: f64,
    h: f64,
    r: [DVector<f64>; 5],
}

impl Dense {
    fn eval(&self, t: f64) -> DVector<f64> {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.r;
        r1 + (r2 + (r3 + (r4 + r5 * s1) * s) * s1) * s
    }
}

struct Step {
    x: DVector<f64>,
    k7: DVector<f64>,
    err: f64,
    dense: Dense,
}

fn dopri_step<F>(f: &mut F, t: f64, x: &DVector<f64>, k1: &DVector<f64>, h: f64, cfg: &IntegratorConfig) -> Step
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let k2 = f(&(x + k1 * (h * A21)));
    let k3 = f(&(x + (k1 * A31 + &k2 * A32) * h));
    let k4 = f(&(x + (k1 * A41 + &k2 * A42 + &k3 * A43) * h));
    let k5 = f(&(x + (k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h));
    let k6 = f(&(x + (k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h));
    let x_new = x + (k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
    let k7 = f(&x_new);
    let err_vec = (k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
    let n = x.len().max(1) as f64;
    let err = (err_vec
        .iter()
        .zip(x.iter().zip(x_new.iter()))
        .map(|(e, (a, b))| {
            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let diff = &x_new - x;
    let bspl = k1 * h - &diff;
    let r4 = &diff - &k7 * h - &bspl;
    let r5 = (k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h;
    let dense = Dense { t, h, r: [x.clone(), diff, bspl, r4, r5] };
    Step { x: x_new, k7, err, dense }
}

fn initial_step<F>(f: &mut F, x: &DVector<f64>, fx: &DVector<f64>, cfg: &IntegratorConfig) -> f64
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len().max(1) as f64;
    let rms = |v: &DVector<f64>| {
        (v.iter()
            .zip(x.iter())
            .map(|(a, b)| (a / (cfg.abs_tol + cfg.rel_tol * b.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = rms(x);
    let d1 = rms(fx);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let f1 = f(&(x + fx * h0));
    let d2 = rms(&(f1 - fx)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrate the autonomous system `x' = field(x)` from `t = 0`.
pub fn integrate<F>(mut field: F, x0: &DVector<f64>, cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    if !(cfg.rel_tol > 0.0 && cfg.abs_tol > 0.0) {
        return Err(Error::InvalidData("integrator tolerances must be positive".into()));
    }
    if cfg.horizon.is_nan() || cfg.horizon <= 0.0 {
        return Err(Error::InvalidData("horizon must be positive".into()));
    }
    let mut samples: Vec<f64> = cfg
        .sample_times
        .iter()
        .flatten()
        .copied()
        .filter(|&s| s > 0.0 && s < cfg.horizon)
        .collect();
    samples.sort_by(f64::total_cmp);
    samples.dedup();
    let record_all = cfg.sample_times.is_none();
    let mut next_sample = 0;

    let mut stats = Stats::default();
    let mut x = x0.clone();
    if let Some(r) = cfg.renormalize {
        let nx = x.norm();
        if nx == 0.0 {
            return Err(Error::InvalidData("cannot renormalise the zero state".into()));
        }
        x *= r / nx;
    }
    let mut t = 0.0;
    let mut times = vec![t];
    let mut states = vec![x.clone()];
    let mut k1 = field(&x);
    stats.evaluations += 1;

    let finish = |times: Vec<f64>, states: Vec<DVector<f64>>, kind: EventKind, t: f64, stats: Stats, bt: Option<f64>| {
        Ok(Trajectory { times, states, events: vec![Event { t, kind }], stats, blowup_time: bt })
    };

    if cfg.fixedpoint_norm > 0.0 && k1.norm() < cfg.fixedpoint_norm {
        return finish(times, states, EventKind::FixedPoint, t, stats, None);
    }

    let mut h = match cfg.fixed_step {
        Some(h) => h,
        None => {
            stats.evaluations += 1;
            initial_step(&mut field, &x, &k1, cfg)
        }
    };
    let mut facold = 1e-4_f64;
    let mut quiet_steps = 0usize;
    let mut last_rejected = false;
    // (t, ‖x‖) along accepted steps, for the blow-up time fit
    let mut growth: Vec<(f64, f64)> = vec![(t, x.norm())];

    loop {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps, t));
        }
        h = h.min(cfg.max_step);
        let mut last = false;
        if t + h >= cfg.horizon || (t + 1.01 * h >= cfg.horizon && cfg.fixed_step.is_none()) {
            h = cfg.horizon - t;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            times.push(t);
            states.push(x.clone());
            dedup_tail(&mut times, &mut states);
            return finish(times, states, EventKind::StepUnderflow, t, stats, None);
        }

        let step = dopri_step(&mut field, t, &x, &k1, h, cfg);
        stats.evaluations += 6;

        let err = step.err;
        let accept = cfg.fixed_step.is_some() || (err <= 1.0 && err.is_finite());
        if !accept {
            stats.rejected += 1;
            let fac11 = if err.is_finite() { err.powf(0.17) } else { 10.0 };
            h /= (fac11 / 0.9).min(10.0);
            last_rejected = true;
            continue;
        }
        stats.accepted += 1;
        let t_new = if last { cfg.horizon } else { t + h };

        // samples strictly inside (t, t_new]
        let mut x_new = step.x.clone();
        if let Some(r) = cfg.renormalize {
            x_new *= r / x_new.norm();
        }
        let nx_new = x_new.norm();
        let blew_up = !nx_new.is_finite() || nx_new > cfg.blowup_norm;
        let t_stop = if blew_up { crossing_time(&step.dense, t, t_new, cfg.blowup_norm) } else { t_new };

        while next_sample < samples.len() && samples[next_sample] <= t_stop {
            let s = samples[next_sample];
            let mut xs = step.dense.eval(s);
            if let Some(r) = cfg.renormalize {
                xs *= r / xs.norm();
            }
            times.push(s);
            states.push(xs);
            next_sample += 1;
        }

        if blew_up {
            let xb = step.dense.eval(t_stop);
            growth.push((t_stop, xb.norm()));
            times.push(t_stop);
            states.push(xb);
            dedup_tail(&mut times, &mut states);
            let est = estimate_blowup_time(&growth, cfg.blowup_exponent);
            return finish(times, states, EventKind::Blowup, t_stop, stats, est);
        }

        t = t_new;
        x = x_new;
        k1 = if cfg.renormalize.is_some() {
            stats.evaluations += 1;
            field(&x)
        } else {
            step.k7
        };
        growth.push((t, nx_new));
        if record_all && !last {
            times.push(t);
            states.push(x.clone());
        }

        if cfg.fixedpoint_norm > 0.0 && k1.norm() < cfg.fixedpoint_norm {
            quiet_steps += 1;
        } else {
            quiet_steps = 0;
        }
        if quiet_steps >= cfg.fixedpoint_patience.max(1) {
            times.push(t);
            states.push(x);
            dedup_tail(&mut times, &mut states);
            return finish(times, states, EventKind::FixedPoint, t, stats, None);
        }
        if last {
            times.push(t);
            states.push(x);
            dedup_tail(&mut times, &mut states);
            return finish(times, states, EventKind::Horizon, t, stats, None);
        }

        if cfg.fixed_step.is_none() {
            // PI controller
            let beta = 0.04;
            let fac11 = err.max(1e-300).powf(0.2 - beta * 0.75);
            let fac = (fac11 / facold.powf(beta) / 0.9).clamp(0.1, 5.0);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(1e-4);
            h = h_new;
        }
        last_rejected = false;
    }
}

fn dedup_tail(times: &mut Vec<f64>, states: &mut Vec<DVector<f64>>) {
    let n = times.len();
    if n >= 2 && times[n - 1] <= times[n - 2] {
        times.remove(n - 2);
        states.remove(n - 2);
    }
}

/// Bisection on the dense output for `‖x(t)‖ = level`.
fn crossing_time(dense: &Dense, t0: f64, t1: f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let n = dense.eval(mid).norm();
        if n.is_finite() && n <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Least-squares fit of `‖x‖^{−1/p} ≈ β(T − t)` over the last decade of growth.
pub fn estimate_blowup_time(growth: &[(f64, f64)], p: f64) -> Option<f64> {
    let &(_, top) = growth.last()?;
    let mut pts: Vec<(f64, f64)> = growth
        .iter()
        .filter(|(_, n)| *n >= top / 10.0 && *n > 0.0)
        .map(|&(t, n)| (t, n.powf(-1.0 / p)))
        .collect();
    if pts.len() < 3 {
        pts = growth.iter().rev().take(3).map(|&(t, n)| (t, n.powf(-1.0 / p))).collect();
    }
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 || sxy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    Some(-intercept / slope)
}

/// Remove the radial component: `f − (⟨f, x⟩/⟨x, x⟩) x`.
pub fn normalize_projection(f: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    let nn = x.norm_squared();
    if nn == 0.0 {
        return Err(Error::InvalidData("cannot project at the zero state".into()));
    }
    Ok(f - x * (f.dot(x) / nn))
}
