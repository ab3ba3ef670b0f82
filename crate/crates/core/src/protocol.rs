//! Spot-checking randomness expansion and the calibrate-then-extract pipeline.
//!
//! Each round is a test round (`T_i = 1`) with probability `gamma`, drawn with
//! the sequential interval sampler from the seed source. Test rounds use two
//! fresh seed bits as settings and are scored with the CHSH game; generation
//! rounds use settings `(0, 0)`. The block aborts when the number of won test
//! rounds is below `(omega_exp gamma - delta_est) n`; otherwise the `2n`-bit
//! outcome string `A_1 B_1 ... A_n B_n` (bit 1 for outcome -1) goes through the
//! Trevisan extractor with an output length fixed before any round is played.

use crate::binning::{bin_counts, bin_events, estimate_from_counts, quantize_tau, RoundRecord};
use crate::error::{invalid, Error, Result};
use crate::extractor::{trevisan_extract, BitSource, BitString, ExtractorSpec, IntervalSampler};
use crate::physics::{outcome_distributions, SourceModel, MINUS};
use crate::rates::{self, binary_entropy, epsilon_budget, eta_opt, output_length, ProtocolParams, SecurityBudget};
use crate::sim::{simulate, EventStream, SettingsSchedule, SimulationConfig};
use crate::stattests::{battery, TestReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// CHSH game predicate on bits: 1 iff `a xor b = x y`.
pub fn w_chsh(a: u8, b: u8, x: u8, y: u8) -> u8 {
    ((a ^ b) == (x & y)) as u8
}

pub use crate::rates::winning_probability;

/// Outcome bit of a +-1 outcome: 1 for -1 (a click).
pub fn outcome_bit(o: i8) -> u8 {
    (o < 0) as u8
}

fn score(r: &RoundRecord) -> u8 {
    w_chsh(outcome_bit(r.a), outcome_bit(r.b), r.x, r.y)
}

/// Black box answering one round at a time.
pub trait Device {
    fn play(&mut self, x: u8, y: u8) -> (i8, i8);
}

/// Independent rounds drawn from the analytic outcome distribution at
/// `mu = pair_rate * tau`.
#[derive(Debug, Clone)]
pub struct ModelDevice {
    cumulative: [[[f64; 3]; 2]; 2],
    rng: ChaCha20Rng,
}

impl ModelDevice {
    pub fn new(model: &SourceModel, tau: f64, seed: u64) -> Result<Self> {
        let dists = outcome_distributions(model, model.pair_rate * tau, tau)?;
        let mut cumulative = [[[0.0; 3]; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                let p = &dists[x][y].p;
                let cells = [p[0][0], p[0][1], p[1][0]];
                let mut acc = 0.0;
                for (k, c) in cells.iter().enumerate() {
                    acc += c;
                    cumulative[x][y][k] = acc;
                }
            }
        }
        Ok(ModelDevice { cumulative, rng: ChaCha20Rng::seed_from_u64(seed) })
    }
}

impl Device for ModelDevice {
    fn play(&mut self, x: u8, y: u8) -> (i8, i8) {
        let u: f64 = self.rng.gen();
        let c = &self.cumulative[x as usize][y as usize];
        let k = c.iter().position(|&v| u < v).unwrap_or(3);
        let sign = |i: usize| if i == MINUS { -1 } else { 1 };
        (sign(k / 2), sign(k % 2))
    }
}

/// Always outputs (+1, +1): the optimal local strategy, winning 3/4 of test rounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalDevice;

impl Device for ClassicalDevice {
    fn play(&mut self, _x: u8, _y: u8) -> (i8, i8) {
        (1, 1)
    }
}

/// Uniformly random outcomes, uncorrelated with the settings.
#[derive(Debug, Clone)]
pub struct RandomDevice {
    rng: ChaCha20Rng,
}

impl RandomDevice {
    pub fn new(seed: u64) -> Self {
        RandomDevice { rng: ChaCha20Rng::seed_from_u64(seed) }
    }
}

impl Device for RandomDevice {
    fn play(&mut self, _x: u8, _y: u8) -> (i8, i8) {
        let s = |b: bool| if b { -1 } else { 1 };
        (s(self.rng.gen()), s(self.rng.gen()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolRound {
    pub test: bool,
    pub record: RoundRecord,
    /// Game outcome, present exactly on test rounds.
    pub c: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbortReason {
    /// Won test rounds below the threshold.
    LowScore { score: u64, threshold: f64 },
    /// The test-round sampler needed more than its `6 h(gamma) n` bit budget.
    SamplingBudget { consumed: u64, budget: u64 },
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbortReason::LowScore { score, threshold } => write!(f, "low_score score={score} threshold={threshold}"),
            AbortReason::SamplingBudget { consumed, budget } => {
                write!(f, "sampling_budget consumed={consumed} budget={budget}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Running,
    Aborted(AbortReason),
    Passed,
}

/// Uniform seed bits read, by purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InputAccount {
    pub sampling: u64,
    pub settings: u64,
    pub extractor_seed: u64,
}

impl InputAccount {
    pub fn total(&self) -> u64 {
        self.sampling + self.settings + self.extractor_seed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub params: ProtocolParams,
    pub budget: SecurityBudget,
    pub rounds: Vec<ProtocolRound>,
    pub status: RunStatus,
    pub score: u64,
    pub threshold: f64,
    /// Output length fixed before the rounds were played.
    pub m: u64,
    pub spec: Option<ExtractorSpec>,
    pub inputs: InputAccount,
    pub output: Option<BitString>,
}

impl ProtocolRun {
    fn new(params: ProtocolParams, budget: SecurityBudget, m: u64) -> Self {
        ProtocolRun {
            params,
            budget,
            rounds: Vec::with_capacity(params.n as usize),
            status: RunStatus::Running,
            score: 0,
            threshold: abort_threshold(&params),
            m,
            spec: None,
            inputs: InputAccount::default(),
            output: None,
        }
    }

    pub fn aborted(&self) -> bool {
        matches!(self.status, RunStatus::Aborted(_))
    }

    /// The `2n`-bit string `A_1 B_1 ... A_n B_n`.
    pub fn raw_bits(&self) -> BitString {
        BitString::from_bits(
            self.rounds.iter().flat_map(|r| [outcome_bit(r.record.a) == 1, outcome_bit(r.record.b) == 1]),
        )
    }

    /// Score, threshold, abort, then extraction of `m` bits on a pass.
    fn conclude(&mut self, seed_source: &mut dyn BitSource) -> Result<()> {
        self.score = self.rounds.par_iter().map(|r| r.c.unwrap_or(0) as u64).sum();
        if (self.score as f64) < self.threshold {
            self.status = RunStatus::Aborted(AbortReason::LowScore { score: self.score, threshold: self.threshold });
            return Ok(());
        }
        self.status = RunStatus::Passed;
        if self.m == 0 {
            return Ok(());
        }
        let spec = ExtractorSpec::new(self.params.n, self.m, self.budget.eps_1)?;
        let seed = seed_source.take(spec.d() as usize)?;
        self.inputs.extractor_seed = spec.d();
        self.output = Some(trevisan_extract(&self.raw_bits(), &seed, &spec)?);
        self.spec = Some(spec);
        Ok(())
    }
}

/// `(omega_exp gamma - delta_est) n`.
pub fn abort_threshold(params: &ProtocolParams) -> f64 {
    (params.omega_exp * params.gamma - params.delta_est) * params.n as f64
}

/// Output length from the block parameters alone.
pub fn preregistered_m(params: &ProtocolParams, budget: &SecurityBudget) -> Result<u64> {
    let eta = eta_opt(params, budget.eps_prime, budget.eps_ea)?;
    Ok(output_length(params.n, eta.value, budget.eps_ex))
}

/// Bit budget of the test-round sampler, `ceil(6 h(gamma) n)`.
pub fn sampling_budget(gamma: f64, n: u64) -> Result<u64> {
    Ok((6.0 * binary_entropy(gamma)? * n as f64).ceil() as u64)
}

/// Play `params.n` rounds against `device`, taking the test-round choices,
/// test settings and extractor seed from `seed_source`.
pub fn run_protocol(
    device: &mut dyn Device,
    params: ProtocolParams,
    budget: SecurityBudget,
    seed_source: &mut dyn BitSource,
) -> Result<ProtocolRun> {
    params.validate()?;
    budget.check()?;
    let m = preregistered_m(&params, &budget)?;
    let mut run = ProtocolRun::new(params, budget, m);
    let mut sampler = if params.gamma < 1.0 {
        Some(IntervalSampler::new(params.gamma, sampling_budget(params.gamma, params.n)?)?)
    } else {
        None
    };
    for _ in 0..params.n {
        let test = match sampler.as_mut() {
            None => true,
            Some(s) => match s.next(seed_source) {
                Ok((t, _)) => t,
                Err(Error::SourceExhausted(_)) if s.consumed() >= s.budget() => {
                    run.inputs.sampling = s.consumed();
                    run.status =
                        RunStatus::Aborted(AbortReason::SamplingBudget { consumed: s.consumed(), budget: s.budget() });
                    return Ok(run);
                }
                Err(e) => return Err(e),
            },
        };
        let (x, y) = if test {
            run.inputs.settings += 2;
            (seed_source.next_bit()? as u8, seed_source.next_bit()? as u8)
        } else {
            (0, 0)
        };
        let (a, b) = device.play(x, y);
        let record = RoundRecord { a, b, x, y };
        let c = test.then(|| score(&record));
        run.rounds.push(ProtocolRound { test, record, c });
    }
    run.inputs.sampling = sampler.map_or(0, |s| s.consumed());
    run.conclude(seed_source)?;
    Ok(run)
}

/// Every round a test round (`gamma = 1`) with settings taken from the records,
/// as for data binned from a fixed settings schedule. Only the extractor seed
/// is read from `seed_source`.
pub fn run_recorded(
    records: &[RoundRecord],
    params: ProtocolParams,
    budget: SecurityBudget,
    seed_source: &mut dyn BitSource,
) -> Result<ProtocolRun> {
    params.validate()?;
    budget.check()?;
    if params.gamma != 1.0 {
        return invalid(format!("recorded rounds are all test rounds; gamma={} must be 1", params.gamma));
    }
    if records.len() as u64 != params.n {
        return invalid(format!("{} records for a block of n={}", records.len(), params.n));
    }
    let m = preregistered_m(&params, &budget)?;
    let mut run = ProtocolRun::new(params, budget, m);
    run.rounds = records.par_iter().map(|r| ProtocolRound { test: true, record: *r, c: Some(score(r)) }).collect();
    run.conclude(seed_source)?;
    Ok(run)
}

/// `sqrt(ln(1/eps_calib) / (2 n_calib))`.
pub fn delta_calib(n_calib: u64, eps_calib: f64) -> f64 {
    ((1.0 / eps_calib).ln() / (2.0 * n_calib as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub tau_ns: u64,
    pub s: f64,
    pub sigma_s: f64,
    pub n_calib: u64,
    pub w_exp: f64,
    /// Rounds available after the calibration prefix.
    pub n_rest: u64,
    /// Predicted output length on those rounds.
    pub m: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub gamma_calib: f64,
    pub tau_star: f64,
    pub w_calib: f64,
    pub delta_calib: f64,
    pub w_exp: f64,
    pub eps_calib: f64,
    pub s_calib: f64,
    /// End of the calibration prefix, ns.
    pub split_ns: u64,
    pub best: CalibrationPoint,
    pub table: Vec<CalibrationPoint>,
}

fn rounds_in(schedule: &SettingsSchedule, tau_ns: u64) -> u64 {
    schedule.segments.iter().map(|s| (s.t_end - s.t_start) / tau_ns).sum()
}

/// Choose the bin width on the first `gamma_calib` of the run.
///
/// For each candidate width the calibration prefix gives `S` and the winning
/// probability `w_calib`; `w_exp = w_calib - delta_calib` then predicts the
/// certified output length on the rest of the run (all rounds tested). The
/// width with the largest prediction wins; ties go to the earlier grid entry.
pub fn calibrate(
    stream: &EventStream,
    schedule: &SettingsSchedule,
    gamma_calib: f64,
    eps_calib: f64,
    tau_grid: &[f64],
    eps_c: f64,
    eps_s: f64,
) -> Result<CalibrationResult> {
    if !(gamma_calib > 0.0 && gamma_calib < 1.0) {
        return invalid(format!("gamma_calib={gamma_calib} outside (0,1)"));
    }
    if !(eps_calib > 0.0 && eps_calib < 1.0) {
        return invalid(format!("eps_calib={eps_calib} outside (0,1)"));
    }
    if tau_grid.is_empty() {
        return invalid("empty tau grid");
    }
    let split_ns = (gamma_calib * stream.duration_ns as f64).round() as u64;
    let calib = schedule.window(0, split_ns);
    let rest = schedule.window(split_ns, stream.duration_ns);
    let table: Vec<CalibrationPoint> = tau_grid
        .par_iter()
        .map(|&tau| {
            let tau_ns = quantize_tau(tau, stream.quantization_ns)?;
            let est = estimate_from_counts(&bin_counts(stream, &calib, tau)?)?;
            let n_calib = est.rounds();
            let w_exp = winning_probability(est.s) - delta_calib(n_calib, eps_calib);
            let n_rest = rounds_in(&rest, tau_ns);
            let m = predicted_m(w_exp, n_rest, tau_ns as f64 * 1e-9, eps_c, eps_s)?;
            Ok(CalibrationPoint { tau_ns, s: est.s, sigma_s: est.sigma_s, n_calib, w_exp, n_rest, m })
        })
        .collect::<Result<_>>()?;
    let best = table.iter().fold(&table[0], |b, p| if p.m > b.m { p } else { b }).clone();
    if best.m == 0 {
        let s_max = table.iter().map(|p| p.s).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NoViolation(format!(
            "no bin width certifies any output (largest calibration S = {s_max:.6})"
        )));
    }
    let w_calib = winning_probability(best.s);
    Ok(CalibrationResult {
        gamma_calib,
        tau_star: best.tau_ns as f64 * 1e-9,
        w_calib,
        delta_calib: w_calib - best.w_exp,
        w_exp: best.w_exp,
        eps_calib,
        s_calib: best.s,
        split_ns,
        best,
        table,
    })
}

/// Output length for `n` all-test rounds expected to win with `w_exp`.
pub fn predicted_m(w_exp: f64, n: u64, tau: f64, eps_c: f64, eps_s: f64) -> Result<u64> {
    if n == 0 || w_exp <= 0.75 {
        return Ok(0);
    }
    let budget = epsilon_budget(n, 1.0, eps_c, eps_s)?;
    let params = ProtocolParams { gamma: 1.0, omega_exp: w_exp.min(rates::W_MAX), delta_est: budget.delta_est, n, tau };
    preregistered_m(&params, &budget)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndConfig {
    pub sim: SimulationConfig,
    pub gamma_calib: f64,
    pub eps_calib: f64,
    pub tau_grid: Vec<f64>,
    pub eps_c: f64,
    pub eps_s: f64,
    pub nist_sequences: usize,
    pub nist_block_len: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub events: usize,
    pub calibration: CalibrationResult,
    pub run: ProtocolRun,
    /// Empty when nothing was extracted or the output is too short to test.
    pub tests: Vec<TestReport>,
}

/// Simulate, calibrate on the prefix, bin the rest at the chosen width, run the
/// all-test protocol and extract, then test the output.
pub fn end_to_end(cfg: &EndToEndConfig, seed_source: &mut dyn BitSource) -> Result<EndToEndReport> {
    let stream = simulate(&cfg.sim)?;
    let schedule = &cfg.sim.schedule;
    let cal = calibrate(&stream, schedule, cfg.gamma_calib, cfg.eps_calib, &cfg.tau_grid, cfg.eps_c, cfg.eps_s)?;
    let rest = schedule.window(cal.split_ns, stream.duration_ns);
    let records = bin_events(&stream, &rest, cal.tau_star)?;
    let n = records.len() as u64;
    let budget = epsilon_budget(n, 1.0, cfg.eps_c, cfg.eps_s)?;
    let params = ProtocolParams {
        gamma: 1.0,
        omega_exp: cal.w_exp.min(rates::W_MAX),
        delta_est: budget.delta_est,
        n,
        tau: cal.tau_star,
    };
    let run = run_recorded(&records, params, budget, seed_source)?;
    let tests = match &run.output {
        Some(bits) if bits.len() / cfg.nist_sequences.max(1) >= 100 => {
            battery(bits, cfg.nist_sequences, cfg.nist_block_len, cfg.alpha)?
        }
        _ => Vec::new(),
    };
    Ok(EndToEndReport { events: stream.events.len(), calibration: cal, run, tests })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game_table() {
        assert_eq!(w_chsh(0, 0, 0, 0), 1);
        assert_eq!(w_chsh(1, 1, 1, 1), 0);
        assert_eq!(w_chsh(0, 1, 1, 1), 1);
    }

    #[test]
    fn classical_device_wins_three_quarters() {
        let mut d = ClassicalDevice;
        let won: u8 = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(x, y)| {
                let (a, b) = d.play(x, y);
                score(&RoundRecord { a, b, x, y })
            })
            .sum();
        assert_eq!(won, 3);
    }
}
