//! Randomness-rate mathematics: entropy bounds, the finite-size rate
//! `eta_opt`, output and seed lengths, the security budget and net rates.
//!
//! Every logarithm is base 2 except inside `exp`/`ln` of the Hoeffding-type
//! tails, which are natural.

use crate::error::{domain, invalid, Error, Result};
use std::f64::consts::{E, SQRT_2};

/// Upper end of the CHSH winning probability, `(2 + sqrt 2)/4`.
pub const W_MAX: f64 = (2.0 + SQRT_2) / 4.0;
/// Tsirelson's bound.
pub const S_MAX: f64 = 2.0 * SQRT_2;

const ETA_GRID: usize = 10_000;
const GOLDEN_TOL: f64 = 1e-10;

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("binary entropy of p={p}"));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

fn h(p: f64) -> f64 {
    binary_entropy(p.clamp(0.0, 1.0)).unwrap_or(0.0)
}

fn check_s(s: f64) -> Result<()> {
    if !(2.0..=S_MAX + 1e-12).contains(&s) {
        return domain(format!("S={s} outside [2, 2 sqrt 2]"));
    }
    Ok(())
}

/// Bits per round from the CHSH value alone: `1 - log2(1 + sqrt(2 - S^2/4))`.
pub fn pironio_bound(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(1.0 - (1.0 + (2.0 - s * s / 4.0).max(0.0).sqrt()).log2())
}

/// `1 - h(1/2 + 1/2 sqrt(S^2/4 - 1))` bits per round.
pub fn asymptotic_rate_per_round(s: f64) -> Result<f64> {
    check_s(s)?;
    let r = (s * s / 4.0 - 1.0).clamp(0.0, 1.0).sqrt();
    Ok(1.0 - h(0.5 + 0.5 * r))
}

/// Asymptotic rate in bits per second for rounds of `tau` seconds.
pub fn asymptotic_rate(s: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return invalid(format!("tau={tau} must be > 0"));
    }
    Ok(asymptotic_rate_per_round(s)? / tau)
}

/// CHSH winning probability `w = 1/2 + S/8`.
pub fn winning_probability(s: f64) -> f64 {
    0.5 + s / 8.0
}

fn check_q(p1: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return domain(format!("gamma={gamma} outside (0,1]"));
    }
    let q = p1 / gamma;
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("p1/gamma={q} outside [0,1]"));
    }
    Ok(q)
}

fn g_inner(q: f64) -> f64 {
    if q >= W_MAX {
        return 1.0;
    }
    if q <= 0.75 {
        return 0.0;
    }
    let x = (16.0 * q * (q - 1.0) + 3.0).max(0.0);
    1.0 - h(0.5 + 0.5 * x.sqrt())
}

fn g_inner_derivative(q: f64) -> f64 {
    if q >= W_MAX || q <= 0.75 {
        return 0.0;
    }
    let x = 16.0 * q * (q - 1.0) + 3.0;
    let r = x.sqrt();
    let u = 0.5 + 0.5 * r;
    // dg/dq = log2(u/(1-u)) * du/dq,  du/dq = 4(2q-1)/sqrt(x)
    (u / (1.0 - u)).log2() * 4.0 * (2.0 * q - 1.0) / r
}

/// Single-round entropy bound as a function of the test-round score `p1`
/// (probability of a won test round) at test probability `gamma`.
///
/// For `p1/gamma` at or below the classical value 3/4 the bound is 0.
pub fn g_function(p1: f64, gamma: f64) -> Result<f64> {
    Ok(g_inner(check_q(p1, gamma)?))
}

/// `dg/dp1`; 0 on the saturated branch and below 3/4.
pub fn g_derivative(p1: f64, gamma: f64) -> Result<f64> {
    Ok(g_inner_derivative(check_q(p1, gamma)?) / gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub gamma: f64,
    pub omega_exp: f64,
    pub delta_est: f64,
    pub n: u64,
    pub tau: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return invalid(format!("gamma={} outside (0,1]", self.gamma));
        }
        if !(self.omega_exp > 0.75 && self.omega_exp <= W_MAX + 1e-15) {
            return invalid(format!("omega_exp={} outside (3/4, (2+sqrt2)/4]", self.omega_exp));
        }
        if !(self.delta_est > 0.0) {
            return invalid(format!("delta_est={} must be > 0", self.delta_est));
        }
        if self.n < 1 {
            return invalid("n must be >= 1");
        }
        if !(self.tau > 0.0) {
            return invalid(format!("tau={} must be > 0", self.tau));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityBudget {
    pub eps_c: f64,
    pub eps_s: f64,
    pub eps_sa: f64,
    pub eps_est: f64,
    pub eps_ea: f64,
    pub eps_prime: f64,
    pub eps_ex: f64,
    pub eps_1: f64,
    /// Hoeffding width `sqrt(ln(1/eps_est)/(2n))` matching `eps_est`.
    pub delta_est: f64,
}

impl SecurityBudget {
    pub fn check(&self) -> Result<()> {
        let tol = 1e-12 * self.eps_c.max(self.eps_s);
        if self.eps_sa + self.eps_est > self.eps_c + tol {
            return Err(Error::Infeasible("completeness budget exceeded".into()));
        }
        if self.eps_sa + self.eps_ea + self.eps_prime / 2.0 + self.eps_ex > self.eps_s + tol {
            return Err(Error::Infeasible("soundness budget exceeded".into()));
        }
        let open = [self.eps_est, self.eps_ea, self.eps_prime, self.eps_ex, self.eps_1];
        if open.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || !(0.0..1.0).contains(&self.eps_sa) {
            return Err(Error::Infeasible("component tolerance outside (0,1)".into()));
        }
        Ok(())
    }
}

/// `max{log2(1/gamma), log2(1/(1-gamma))}`.
pub fn l_max(gamma: f64) -> f64 {
    (1.0 / gamma).log2().max((1.0 / (1.0 - gamma)).log2())
}

/// Split the completeness and soundness targets into component tolerances for
/// a block of `n` rounds with test probability `gamma`.
///
/// The soundness weight left after sampling, `eps_s - eps_sa`, is shared as
/// `eps_ea : eps' : eps_ex = 1 : 2 : 1`; `eps_1 = eps_ex/(2n)`.
pub fn epsilon_budget(n: u64, gamma: f64, eps_c: f64, eps_s: f64) -> Result<SecurityBudget> {
    for (name, e) in [("eps_c", eps_c), ("eps_s", eps_s)] {
        if !(e > 0.0 && e < 1.0) {
            return invalid(format!("{name}={e} outside (0,1)"));
        }
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return invalid(format!("gamma={gamma} outside (0,1]"));
    }
    if n < 1 {
        return invalid("n must be >= 1");
    }
    let nf = n as f64;
    let eps_sa = if gamma == 1.0 { 0.0 } else { (-18.0 * h(gamma).powi(3) * nf / l_max(gamma)).exp() };
    if eps_sa >= eps_c || eps_sa >= eps_s {
        return Err(Error::Infeasible(format!("eps_SA={eps_sa:e} exhausts the budget; increase n or gamma")));
    }
    let eps_est = eps_c - eps_sa;
    let rest = eps_s - eps_sa;
    let eps_ea = rest / 4.0;
    let eps_prime = rest / 2.0;
    let eps_ex = rest / 4.0;
    let eps_1 = eps_ex / (2.0 * nf);
    let delta_est = ((1.0 / eps_est).ln() / (2.0 * nf)).sqrt();
    let b = SecurityBudget { eps_c, eps_s, eps_sa, eps_est, eps_ea, eps_prime, eps_ex, eps_1, delta_est };
    b.check()?;
    Ok(b)
}

/// Result of the `eta_opt` maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOpt {
    /// `max(0, max_{p_t} eta)` in bits per round.
    pub value: f64,
    /// Unclamped maximum.
    pub raw: f64,
    /// Maximizing `p_t(1)/gamma`.
    pub p_t_star: f64,
}

/// `eta(p, p_t)` with `f_min` extended linearly above `p_t`.
pub fn eta_at(p1: f64, pt_q: f64, gamma: f64, n: u64, eps_prime: f64, eps_ea: f64) -> f64 {
    let q = (p1 / gamma).clamp(0.0, 1.0);
    let gd = g_inner_derivative(pt_q);
    let f_min = if q <= pt_q { g_inner(q) } else { g_inner(pt_q) + gd * (q - pt_q) };
    let dg_dp = gd / gamma;
    let penalty = 2.0 * (13f64.log2() + dg_dp) * (1.0 - 2.0 * (eps_prime * eps_ea).log2()).sqrt() / (n as f64).sqrt();
    f_min - penalty
}

/// Maximize `eta` over the tangent point `p_t(1)/gamma` in `(3/4, (2+sqrt2)/4)`
/// at the expected score `p = omega_exp * gamma - delta_est`: a 1e4-point grid
/// followed by golden-section refinement around the best grid cell.
pub fn eta_opt(params: &ProtocolParams, eps_prime: f64, eps_ea: f64) -> Result<EtaOpt> {
    params.validate()?;
    let gamma = params.gamma;
    let p1 = params.omega_exp * gamma - params.delta_est;
    let f = |t: f64| eta_at(p1, t, gamma, params.n, eps_prime, eps_ea);
    let (lo, hi) = (0.75, W_MAX);
    let step = (hi - lo) / (ETA_GRID + 1) as f64;
    let mut best_i = 1;
    let mut best_v = f64::NEG_INFINITY;
    for i in 1..=ETA_GRID {
        let v = f(lo + i as f64 * step);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + (best_i as f64 - 1.0) * step;
    let mut b = lo + (best_i as f64 + 1.0) * step;
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    let (t, raw) = if f(t) > best_v { (t, f(t)) } else { (lo + best_i as f64 * step, best_v) };
    Ok(EtaOpt { value: raw.max(0.0), raw, p_t_star: t })
}

/// `m = floor(n eta - 4 log2 n + 4 log2 eps_ex - 10)`, clamped at 0.
pub fn output_length(n: u64, eta: f64, eps_ex: f64) -> u64 {
    let nf = n as f64;
    let m = (nf * eta - 4.0 * nf.log2() + 4.0 * eps_ex.log2() - 10.0).floor();
    if m.is_finite() && m > 0.0 {
        (m as u64).min(2 * n)
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedLength {
    pub ell: u32,
    pub a: u64,
    pub d: u64,
}

/// One-bit-extractor field degree `ell = ceil(log2(2n) + 2 log2(2/eps_1))`.
pub fn field_degree(n: u64, eps_1: f64) -> Result<u32> {
    if !(eps_1 > 0.0 && eps_1 < 1.0) {
        return domain(format!("eps_1={eps_1} outside (0,1)"));
    }
    if n < 1 {
        return domain("n must be >= 1");
    }
    let ell = ((2.0 * n as f64).log2() + 2.0 * (2.0 / eps_1).log2()).ceil();
    Ok(ell as u32)
}

/// Number of blocks `a` of the block weak design for `m` outputs, 2*ell bits per
/// subseed; at least one block.
pub fn block_count(m: u64, ell: u32) -> Result<u64> {
    let two_e = 2.0 * E;
    let t = 2.0 * ell as f64;
    if (m as f64) <= two_e || t <= two_e {
        return domain(format!("block count needs m > 2e and 2 ell > 2e (m={m}, ell={ell})"));
    }
    let a = (((m as f64 - two_e).log2() - (t - two_e).log2()) / (two_e.log2() - (two_e - 1.0).log2())).ceil();
    Ok((a as i64).max(1) as u64)
}

/// `(ell, a, d)` with `d = a (2 ell)^2`.
pub fn seed_length(n: u64, m: u64, eps_1: f64) -> Result<SeedLength> {
    if m < 2 {
        return domain(format!("m={m} must be >= 2"));
    }
    let ell = field_degree(n, eps_1)?;
    let a = block_count(m, ell)?;
    let t = 2 * ell as u64;
    Ok(SeedLength { ell, a, d: a * t * t })
}

/// `r_n` in bits per second.
pub fn finite_rate(params: &ProtocolParams, budget: &SecurityBudget) -> Result<f64> {
    let eta = eta_opt(params, budget.eps_prime, budget.eps_ea)?;
    Ok(finite_rate_from_eta(eta.value, params.n, params.tau, budget.eps_ex))
}

pub fn finite_rate_from_eta(eta: f64, n: u64, tau: f64, eps_ex: f64) -> f64 {
    let nf = n as f64;
    (eta - 4.0 * nf.log2() / nf + 4.0 * eps_ex.log2() / nf - 10.0 / nf) / tau
}

/// Uniform input bits per round: `6 h(gamma) + 4 gamma + d/n`.
pub fn input_cost_per_round(gamma: f64, n: u64, d: u64) -> f64 {
    6.0 * h(gamma) + 4.0 * gamma + d as f64 / n as f64
}

/// `r_net = r_n - (6 h(gamma) + 4 gamma + d/n)/tau`.
pub fn net_rate(params: &ProtocolParams, budget: &SecurityBudget, d: u64) -> Result<f64> {
    Ok(finite_rate(params, budget)? - input_cost_per_round(params.gamma, params.n, d) / params.tau)
}

/// `r_inf_net = r_inf - (h(gamma) + 2 gamma)/tau`.
pub fn asymptotic_net_rate(s: f64, gamma: f64, tau: f64) -> Result<f64> {
    Ok(asymptotic_rate(s, tau)? - (h(gamma) + 2.0 * gamma) / tau)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub eta_opt_value: f64,
    pub p_t_star: f64,
    pub m: u64,
    pub d: u64,
    pub r_n: f64,
    pub r_net: f64,
    pub r_inf: f64,
    pub r_inf_net: f64,
}

/// All rates for a block of `n` rounds of `tau` seconds whose test rounds are
/// expected to be won with probability `w(S)`.
///
/// The seed length is taken from [`seed_length`] when the output admits a
/// block design (`m > 2e`), and is 0 otherwise.
pub fn rate_summary(s: f64, tau: f64, n: u64, gamma: f64, eps_c: f64, eps_s: f64) -> Result<RateResult> {
    check_s(s)?;
    let budget = epsilon_budget(n, gamma, eps_c, eps_s)?;
    let r_inf = asymptotic_rate(s, tau)?;
    let r_inf_net = asymptotic_net_rate(s, gamma, tau)?;
    let omega = winning_probability(s);
    let (eta, p_t) = if omega > 0.75 {
        let params = ProtocolParams { gamma, omega_exp: omega, delta_est: budget.delta_est, n, tau };
        let e = eta_opt(&params, budget.eps_prime, budget.eps_ea)?;
        (e.value, e.p_t_star)
    } else {
        (0.0, f64::NAN)
    };
    let m = output_length(n, eta, budget.eps_ex);
    let d = seed_length(n, m, budget.eps_1).map(|s| s.d).unwrap_or(0);
    let r_n = finite_rate_from_eta(eta, n, tau, budget.eps_ex);
    let r_net = r_n - input_cost_per_round(gamma, n, d) / tau;
    Ok(RateResult { eta_opt_value: eta, p_t_star: p_t, m, d, r_n, r_net, r_inf, r_inf_net })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn g_branch_points() {
        assert!((g_function(W_MAX, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(g_function(0.75, 1.0).unwrap(), 0.0);
        assert!(g_function(0.5, 0.4).is_err());
    }

    #[test]
    fn block_count_boundary() {
        assert!(block_count(5, 10).is_err());
        assert_eq!(block_count(6, 10).unwrap(), 1);
    }
}
