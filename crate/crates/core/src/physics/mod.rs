//! Polarization-entangled pair source with threshold detectors.
//!
//! A single pair is described by
//! `|psi> = cos(theta)|HV> - e^{i phi} sin(theta)|VH>` (Alice first). Each party
//! measures a linear polarizer at angle `alpha_x` (Alice) or `beta_y` (Bob); the
//! detector sits behind the port that transmits the polarization
//! `(cos a, sin a)`. A click is the outcome `-1`, no click is `+1`.
//!
//! Within one time bin the number of pairs is Poisson with mean `mu`, each side
//! has an independent background process (dark counts plus fluorescence) and
//! any number of clicks on one side counts as a single `-1`.

mod optimize;

pub use optimize::{optimize_parameters, Objective, OptimizeReport};

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Poisson mixtures are truncated once the remaining tail mass drops below this.
pub const POISSON_TAIL: f64 = 1e-12;
/// Hard cap on the number of pairs per round considered by the mixture.
pub const V_MAX: usize = 200;

/// Outcome labels: index 0 is `+1` (no click), index 1 is `-1` (click).
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub theta: f64,
    pub phi: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub eta_a: f64,
    pub eta_b: f64,
    /// Background click rates per side, events per second.
    pub dark_rate_a: f64,
    pub dark_rate_b: f64,
    /// Pairs per second.
    pub pair_rate: f64,
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Reduce an angle modulo `pi` into `(-pi/2, pi/2]`.
pub fn reduce_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}

impl SourceModel {
    /// Angles as quoted in the lab frame of the reference experiment, where the
    /// detector watches the port orthogonal to the analyzer direction and the
    /// pair state carries a relative `+` sign. Converted to this crate's frame:
    /// `alpha -> -alpha - pi/2`, `beta -> beta + pi/2`, theta unchanged.
    pub fn from_lab_angles(theta: f64, alpha: [f64; 2], beta: [f64; 2]) -> [f64; 5] {
        [
            theta,
            reduce_angle(-alpha[0] - FRAC_PI_2),
            reduce_angle(-alpha[1] - FRAC_PI_2),
            reduce_angle(beta[0] + FRAC_PI_2),
            reduce_angle(beta[1] + FRAC_PI_2),
        ]
    }

    /// The reference experiment: TES detectors, 2.4e4 pairs/s, lab angles
    /// theta=25.9, alpha=(-7.2, 28.7), beta=(82.7, -61.5) degrees.
    pub fn reference_setup() -> Self {
        let p = Self::from_lab_angles(deg(25.9), [deg(-7.2), deg(28.7)], [deg(82.7), deg(-61.5)]);
        SourceModel {
            theta: p[0],
            phi: 0.0,
            alpha: [p[1], p[2]],
            beta: [p[3], p[4]],
            eta_a: 0.824,
            eta_b: 0.822,
            dark_rate_a: 45.7,
            dark_rate_b: 41.5,
            pair_rate: 2.4e4,
        }
    }

    pub fn with_angles(mut self, p: [f64; 5]) -> Self {
        self.theta = p[0];
        self.alpha = [p[1], p[2]];
        self.beta = [p[3], p[4]];
        self
    }

    pub fn angles(&self) -> [f64; 5] {
        [self.theta, self.alpha[0], self.alpha[1], self.beta[0], self.beta[1]]
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.theta, self.phi, self.alpha[0], self.alpha[1], self.beta[0], self.beta[1]];
        if finite.iter().any(|v| !v.is_finite()) {
            return invalid("angles must be finite");
        }
        for (name, e) in [("eta_a", self.eta_a), ("eta_b", self.eta_b)] {
            if !(0.0..=1.0).contains(&e) {
                return invalid(format!("{name}={e} outside [0,1]"));
            }
        }
        for (name, r) in
            [("dark_rate_a", self.dark_rate_a), ("dark_rate_b", self.dark_rate_b), ("pair_rate", self.pair_rate)]
        {
            if !(r >= 0.0 && r.is_finite()) {
                return invalid(format!("{name}={r} must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Representative of the symmetry class with theta in `[0, pi/4]` and every
    /// analyzer angle in `(-pi/2, pi/2]`.
    ///
    /// Used symmetries (phi = 0): theta and all angles are pi-periodic;
    /// `(theta, a, b) ~ (-theta, -a, b)`; `(theta, a, b) ~ (pi/2 - theta, pi/2 - a, pi/2 - b)`.
    pub fn canonical(&self) -> Self {
        let mut t = reduce_angle(self.theta);
        let mut a = self.alpha;
        let mut b = self.beta;
        if t < 0.0 {
            t = -t;
            a = [-a[0], -a[1]];
        }
        if t > PI / 4.0 {
            t = FRAC_PI_2 - t;
            a = [FRAC_PI_2 - a[0], FRAC_PI_2 - a[1]];
            b = [FRAC_PI_2 - b[0], FRAC_PI_2 - b[1]];
        }
        let mut out = *self;
        out.theta = t;
        out.alpha = [reduce_angle(a[0]), reduce_angle(a[1])];
        out.beta = [reduce_angle(b[0]), reduce_angle(b[1])];
        out
    }
}

/// Single-pair joint probabilities `p[alpha][beta]` for one setting pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumProbTable {
    pub p: [[f64; 2]; 2],
}

impl QuantumProbTable {
    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }
}

type Mat4 = [[Complex64; 4]; 4];

fn kron2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn projector(angle: f64, outcome: usize) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    let click = [[c * c, c * s], [c * s, s * s]];
    if outcome == MINUS {
        click
    } else {
        [[1.0 - click[0][0], -click[0][1]], [-click[1][0], 1.0 - click[1][1]]]
    }
}

fn density_matrix(theta: f64, phi: f64) -> Mat4 {
    // basis |HH>, |HV>, |VH>, |VV>
    let mut psi = [Complex64::new(0.0, 0.0); 4];
    psi[1] = Complex64::new(theta.cos(), 0.0);
    psi[2] = -Complex64::from_polar(theta.sin(), phi);
    let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rho[i][j] = psi[i] * psi[j].conj();
        }
    }
    rho
}

/// `Tr(rho Pi_alpha ⊗ Pi_beta)` for the analyzers selected by `(x, y)`.
pub fn quantum_probabilities(model: &SourceModel, x: usize, y: usize) -> QuantumProbTable {
    probabilities_at(model.theta, model.phi, model.alpha[x], model.beta[y])
}

pub(crate) fn probabilities_at(theta: f64, phi: f64, a: f64, b: f64) -> QuantumProbTable {
    let rho = density_matrix(theta, phi);
    let mut p = [[0.0; 2]; 2];
    for (oa, row) in p.iter_mut().enumerate() {
        for (ob, cell) in row.iter_mut().enumerate() {
            let proj = kron2(&projector(a, oa), &projector(b, ob));
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                for k in 0..4 {
                    tr += rho[i][k] * proj[k][i];
                }
            }
            *cell = tr.re.clamp(0.0, 1.0);
        }
    }
    QuantumProbTable { p }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Per-pair weights `(D(+), D(-))` for one side: the probability that the pair
/// gives outcome `+`/`-` on `side` while the other side's detector stays silent.
pub fn single_pair_noclick_weight(table: &QuantumProbTable, side: Side, eta_other: f64) -> (f64, f64) {
    let p = &table.p;
    let miss = 1.0 - eta_other;
    match side {
        Side::A => (p[PLUS][PLUS] + miss * p[PLUS][MINUS], p[MINUS][PLUS] + miss * p[MINUS][MINUS]),
        Side::B => (p[PLUS][PLUS] + miss * p[MINUS][PLUS], p[PLUS][MINUS] + miss * p[MINUS][MINUS]),
    }
}

fn ln_binomial(v: usize, k: usize) -> f64 {
    statrs::function::factorial::ln_binomial(v as u64, k as u64)
}

/// `D_v = sum_{k=1}^{v} C(v,k) [1 - (1-eta)^k] d_minus^k d_plus^(v-k)`:
/// with `v` pairs, the side clicks at least once and the other side never does.
pub fn multi_pair_exclusive_click(v: usize, eta: f64, d_plus: f64, d_minus: f64) -> f64 {
    if v == 0 || d_minus <= 0.0 || eta <= 0.0 {
        return 0.0;
    }
    let ln_m = d_minus.ln();
    let ln_p = if d_plus > 0.0 { d_plus.ln() } else { f64::NEG_INFINITY };
    let miss = 1.0 - eta;
    let mut sum = 0.0;
    for k in 1..=v {
        let rest = v - k;
        let ln_t = ln_binomial(v, k) + k as f64 * ln_m + if rest == 0 { 0.0 } else { rest as f64 * ln_p };
        if ln_t == f64::NEG_INFINITY {
            continue;
        }
        sum += (1.0 - miss.powi(k as i32)) * ln_t.exp();
    }
    sum
}

/// Outcome probabilities `p[a][b]` of one round for a setting pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    pub p: [[f64; 2]; 2],
    pub mu: f64,
    pub tau: f64,
}

impl OutcomeDistribution {
    /// `E = Pr(a=b) - Pr(a!=b) = 1 - 2[P(-,+) + P(+,-)]`.
    pub fn correlator(&self) -> f64 {
        1.0 - 2.0 * (self.p[MINUS][PLUS] + self.p[PLUS][MINUS])
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }
}

/// Poisson weights `P_mu(v)` for `v = 0..` until the tail mass drops below
/// [`POISSON_TAIL`].
pub fn poisson_weights(mu: f64, v_max: usize) -> Result<Vec<f64>> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return invalid(format!("mu={mu} must be finite and >= 0"));
    }
    if mu == 0.0 {
        return Ok(vec![1.0]);
    }
    let mut w = Vec::new();
    let mut cum = 0.0;
    let ln_mu = mu.ln();
    for v in 0..=v_max {
        let lp = -mu + v as f64 * ln_mu - statrs::function::factorial::ln_factorial(v as u64);
        let p = lp.exp();
        w.push(p);
        cum += p;
        // tail mass is 1 - cum; stop once it is negligible and we are past the mode
        if v as f64 >= mu && 1.0 - cum < POISSON_TAIL {
            return Ok(w);
        }
    }
    Err(Error::Domain(format!("mu={mu} needs more than v_max={v_max} pairs per round for tail < {POISSON_TAIL:e}")))
}

fn mixture(weights: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    weights.iter().enumerate().map(|(v, w)| w * f(v)).sum()
}

/// Outcome distribution for setting `(x, y)` with `mu` mean pairs per round of
/// duration `tau` seconds; backgrounds enter as independent Poisson processes.
pub fn outcome_distribution(model: &SourceModel, x: usize, y: usize, mu: f64, tau: f64) -> Result<OutcomeDistribution> {
    outcome_distribution_vmax(model, x, y, mu, tau, V_MAX)
}

pub fn outcome_distribution_vmax(
    model: &SourceModel,
    x: usize,
    y: usize,
    mu: f64,
    tau: f64,
    v_max: usize,
) -> Result<OutcomeDistribution> {
    model.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return invalid(format!("tau={tau} must be > 0"));
    }
    let weights = poisson_weights(mu, v_max)?;
    let table = quantum_probabilities(model, x, y);
    let (ap, am) = single_pair_noclick_weight(&table, Side::A, model.eta_b);
    let (bp, bm) = single_pair_noclick_weight(&table, Side::B, model.eta_a);
    let silent = ap + (1.0 - model.eta_a) * am;

    let pair_mp = mixture(&weights, |v| multi_pair_exclusive_click(v, model.eta_a, ap, am));
    let pair_pm = mixture(&weights, |v| multi_pair_exclusive_click(v, model.eta_b, bp, bm));
    let pair_pp = mixture(&weights, |v| silent.powi(v as i32));

    let qa = (-model.dark_rate_a * tau).exp();
    let qb = (-model.dark_rate_b * tau).exp();
    let pp = pair_pp * qa * qb;
    let mp = (pair_mp + pair_pp * (1.0 - qa)) * qb;
    let pm = (pair_pm + pair_pp * (1.0 - qb)) * qa;
    let mm = (1.0 - pp - mp - pm).max(0.0);
    let mut p = [[0.0; 2]; 2];
    p[PLUS][PLUS] = pp;
    p[MINUS][PLUS] = mp;
    p[PLUS][MINUS] = pm;
    p[MINUS][MINUS] = mm;
    Ok(OutcomeDistribution { p, mu, tau })
}

/// All four outcome distributions, indexed `[x][y]`.
pub fn outcome_distributions(model: &SourceModel, mu: f64, tau: f64) -> Result<[[OutcomeDistribution; 2]; 2]> {
    let d = |x, y| outcome_distribution(model, x, y, mu, tau);
    Ok([[d(0, 0)?, d(0, 1)?], [d(1, 0)?, d(1, 1)?]])
}

/// `S = E00 + E01 + E10 - E11`.
pub fn chsh_value(model: &SourceModel, mu: f64, tau: f64) -> Result<f64> {
    let d = outcome_distributions(model, mu, tau)?;
    Ok(chsh_from_correlators(&[
        [d[0][0].correlator(), d[0][1].correlator()],
        [d[1][0].correlator(), d[1][1].correlator()],
    ]))
}

pub fn chsh_from_correlators(e: &[[f64; 2]; 2]) -> f64 {
    e[0][0] + e[0][1] + e[1][0] - e[1][1]
}

/// `S` for rounds of duration `tau` with `mu = pair_rate * tau`.
pub fn chsh_at_tau(model: &SourceModel, tau: f64) -> Result<f64> {
    chsh_value(model, model.pair_rate * tau, tau)
}

/// CHSH value of a round that contains exactly one pair and no background.
pub fn single_pair_chsh(model: &SourceModel) -> f64 {
    let mut e = [[0.0; 2]; 2];
    for (x, row) in e.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            let t = quantum_probabilities(model, x, y);
            let (ap, am) = single_pair_noclick_weight(&t, Side::A, model.eta_b);
            let (bp, bm) = single_pair_noclick_weight(&t, Side::B, model.eta_a);
            let mp = multi_pair_exclusive_click(1, model.eta_a, ap, am);
            let pm = multi_pair_exclusive_click(1, model.eta_b, bp, bm);
            *cell = 1.0 - 2.0 * (mp + pm);
        }
    }
    chsh_from_correlators(&e)
}
