//! Derivative-free maximization of the CHSH value over state and analyzer angles.

use super::{chsh_value, single_pair_chsh, SourceModel};
use crate::error::Result;
use std::f64::consts::{FRAC_PI_2, PI};

const STARTS: usize = 32;
const TOL: f64 = 1e-9;
const MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Poisson mixture with `mu` mean pairs in rounds of `tau` seconds.
    Poisson { mu: f64, tau: f64 },
    /// Rounds containing exactly one pair, no background.
    SinglePair,
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    /// Best model found, in canonical form.
    pub model: SourceModel,
    pub s: f64,
    pub converged: bool,
    /// True when every start returned the same value: the objective carries no
    /// information about the angles.
    pub flat: bool,
    pub evaluations: usize,
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton points spread over theta in (0, pi/4] and angles in (-pi/2, pi/2].
fn start_points() -> Vec<[f64; 5]> {
    let bases = [2, 3, 5, 7, 11];
    (1..=STARTS)
        .map(|i| {
            let u: Vec<f64> = bases.iter().map(|&b| radical_inverse(i, b)).collect();
            [
                (0.05 + 0.95 * u[0]) * PI / 4.0,
                -FRAC_PI_2 + PI * u[1],
                -FRAC_PI_2 + PI * u[2],
                -FRAC_PI_2 + PI * u[3],
                -FRAC_PI_2 + PI * u[4],
            ]
        })
        .collect()
}

struct Simplex {
    best: [f64; 5],
    value: f64,
    evals: usize,
    converged: bool,
}

/// Nelder-Mead minimization of `f` (standard coefficients 1, 2, 0.5, 0.5).
fn nelder_mead(f: &dyn Fn(&[f64; 5]) -> f64, x0: [f64; 5], step: f64) -> Simplex {
    let n = 5;
    let mut pts: Vec<[f64; 5]> = vec![x0];
    for i in 0..n {
        let mut p = x0;
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(f).collect();
    let mut evals = n + 1;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i]).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        let size = pts
            .iter()
            .skip(1)
            .map(|p| (0..n).map(|k| (p[k] - pts[0][k]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= TOL * 1e-3 && size <= 1e-7 {
            converged = true;
            break;
        }
        let mut c = [0.0; 5];
        for p in &pts[..n] {
            for k in 0..n {
                c[k] += p[k] / n as f64;
            }
        }
        let lerp = |t: f64| {
            let mut q = [0.0; 5];
            for k in 0..n {
                q[k] = c[k] + t * (pts[n][k] - c[k]);
            }
            q
        };
        let xr = lerp(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = lerp(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let q = lerp(-0.5);
                let v = f(&q);
                (q, v)
            } else {
                let q = lerp(0.5);
                let v = f(&q);
                (q, v)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                let best = pts[0];
                for i in 1..=n {
                    for (p, b) in pts[i].iter_mut().zip(best.iter()).take(n) {
                        *p = b + 0.5 * (*p - b);
                    }
                    vals[i] = f(&pts[i]);
                    evals += 1;
                }
            }
        }
    }
    let (bi, _) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    Simplex { best: pts[bi], value: vals[bi], evals, converged }
}

/// Maximize `S` over `(theta, alpha0, alpha1, beta0, beta1)` with phi fixed at 0,
/// keeping the efficiencies, background rates and pair rate of `base`.
pub fn optimize_parameters(base: &SourceModel, objective: Objective) -> Result<OptimizeReport> {
    base.validate()?;
    let mut base = *base;
    base.phi = 0.0;
    if let Objective::Poisson { mu, tau } = objective {
        // surface domain errors before the search
        chsh_value(&base, mu, tau)?;
    }
    let eval = |p: &[f64; 5]| -> f64 {
        let m = base.with_angles(*p);
        match objective {
            Objective::Poisson { mu, tau } => chsh_value(&m, mu, tau).unwrap_or(f64::NEG_INFINITY),
            Objective::SinglePair => single_pair_chsh(&m),
        }
    };
    let neg = |p: &[f64; 5]| -eval(p);
    let results: Vec<Simplex> = start_points().into_iter().map(|x0| nelder_mead(&neg, x0, 0.3)).collect();
    let evaluations: usize = results.iter().map(|r| r.evals).sum();
    let lo = results.iter().map(|r| -r.value).fold(f64::INFINITY, f64::min);
    let best = results.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    let s = -best.value;
    let flat = (s - lo).abs() <= TOL;
    // polish from the best point with a small simplex
    let polished = nelder_mead(&neg, best.best, 1e-3);
    let (angles, s, converged) = if -polished.value >= s {
        (polished.best, -polished.value, polished.converged)
    } else {
        (best.best, s, best.converged)
    };
    Ok(OptimizeReport {
        model: base.with_angles(angles).canonical(),
        s,
        converged,
        flat,
        evaluations: evaluations + polished.evals,
    })
}
