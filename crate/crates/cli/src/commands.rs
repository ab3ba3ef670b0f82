use crate::params::{params, Config};
use crate::{Common, Failure};
use anyhow::Context;
use bellrand_core::binning::scan_tau;
use bellrand_core::extractor::{trevisan_extract, BitReader, BitSource, BitString, ExtractorSpec, RngBitSource};
use bellrand_core::io::{self, fmt_f64, Manifest};
use bellrand_core::physics::{chsh_at_tau, optimize_parameters, Objective, SourceModel};
use bellrand_core::protocol::{
    end_to_end, run_protocol, ClassicalDevice, Device, EndToEndConfig, ModelDevice, ProtocolRun, RandomDevice,
    RunStatus,
};
use bellrand_core::rates::{self, epsilon_budget, rate_summary, ProtocolParams};
use bellrand_core::sim::{simulate, SettingsSchedule, SimulationConfig};
use bellrand_core::stattests::{battery, TestReport};
use bellrand_core::Error;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::fmt::Write as _;
use std::path::PathBuf;

const MANIFEST_FORMAT: &str = "bellrand-manifest v1";
const BITS_FORMAT: &str = "raw msb-first v1";

fn reference() -> SourceModel {
    SourceModel::reference_setup()
}

params!(ModelArgs => Model {
    /// State angle theta (rad)
    theta: f64 = reference().theta,
    /// State phase (rad)
    phi: f64 = reference().phi,
    /// Alice's analyzer angle for x=0 (rad)
    alpha0: f64 = reference().alpha[0],
    /// Alice's analyzer angle for x=1 (rad)
    alpha1: f64 = reference().alpha[1],
    /// Bob's analyzer angle for y=0 (rad)
    beta0: f64 = reference().beta[0],
    /// Bob's analyzer angle for y=1 (rad)
    beta1: f64 = reference().beta[1],
    /// Alice's detection efficiency
    eta_a: f64 = reference().eta_a,
    /// Bob's detection efficiency
    eta_b: f64 = reference().eta_b,
    /// Alice's dark count rate (1/s)
    dark_a: f64 = reference().dark_rate_a,
    /// Bob's dark count rate (1/s)
    dark_b: f64 = reference().dark_rate_b,
    /// Pair emission rate (1/s)
    pair_rate: f64 = reference().pair_rate,
});

impl Model {
    fn source(&self) -> Result<SourceModel, Failure> {
        let m = SourceModel {
            theta: self.theta,
            phi: self.phi,
            alpha: [self.alpha0, self.alpha1],
            beta: [self.beta0, self.beta1],
            eta_a: self.eta_a,
            eta_b: self.eta_b,
            dark_rate_a: self.dark_a,
            dark_rate_b: self.dark_b,
            pair_rate: self.pair_rate,
        };
        m.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(m)
    }
}

/// Manifest under construction plus where it goes.
struct Run {
    manifest: Manifest,
    path: Option<PathBuf>,
}

impl Run {
    fn new(command: &str, common: &Common, out: &str) -> Self {
        let mut manifest = Manifest::new();
        manifest.set("format", MANIFEST_FORMAT).set("command", command).set("version", env!("CARGO_PKG_VERSION"));
        let path =
            common.manifest.clone().or_else(|| (!out.is_empty()).then(|| PathBuf::from(format!("{out}.manifest"))));
        Run { manifest, path }
    }

    fn read(&mut self, role: &str, path: &str) -> Result<Vec<u8>, Failure> {
        if path.is_empty() {
            return Err(Failure::Usage(format!("--{} is required", role.replace('_', "-"))));
        }
        let data = std::fs::read(path).with_context(|| format!("reading {role} file {path}"))?;
        self.manifest.set(&format!("input.{role}.sha256"), io::sha256_hex(&data));
        Ok(data)
    }

    fn write(&mut self, role: &str, path: &str, data: &[u8]) -> Result<(), Failure> {
        std::fs::write(path, data).with_context(|| format!("writing {role} file {path}"))?;
        self.manifest.set(&format!("output.{role}.sha256"), io::sha256_hex(data));
        Ok(())
    }

    fn write_bits(&mut self, role: &str, path: &str, bits: &BitString) -> Result<(), Failure> {
        self.manifest.set(&format!("format.{role}"), BITS_FORMAT);
        self.manifest.set(&format!("output.{role}.bits"), bits.len());
        self.write(role, path, bits.as_bytes())
    }

    /// Text report to `out`, or stdout when `out` is empty.
    fn report(&mut self, out: &str, text: &str) -> Result<(), Failure> {
        if out.is_empty() {
            print!("{text}");
            Ok(())
        } else {
            self.write("report", out, text.as_bytes())
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.manifest.set(&format!("result.{key}"), value);
    }

    fn set_f64(&mut self, key: &str, value: f64) {
        self.manifest.set_f64(&format!("result.{key}"), value);
    }

    fn finish(self) -> Result<(), Failure> {
        if let Some(p) = &self.path {
            let text = format!("# bellrand run manifest\n{}", self.manifest.render());
            std::fs::write(p, text).with_context(|| format!("writing manifest {}", p.display()))?;
        }
        Ok(())
    }
}

fn required(name: &str, value: &str) -> Result<(), Failure> {
    if value.is_empty() {
        return Err(Failure::Usage(format!("--{} is required", name.replace('_', "-"))));
    }
    Ok(())
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn seconds_to_ns(name: &str, s: f64) -> Result<u64, Failure> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Failure::Usage(format!("--{name}={s} must be a positive time in seconds")));
    }
    Ok((s * 1e9).round() as u64)
}

/// `min, min+step, ..., <= max` with a little slack for rounding.
fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(min > 0.0 && max >= min && step > 0.0) {
        return Err(Failure::Usage(format!("bad grid tau_min={min} tau_max={max} tau_step={step}")));
    }
    let k = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=k).map(|i| min + i as f64 * step).collect())
}

/// Seed bits from a file when given, else from a ChaCha20 stream.
fn seed_source(run: &mut Run, file: &str, rng_seed: u64) -> Result<Box<dyn BitSource>, Failure> {
    if file.is_empty() {
        Ok(Box::new(RngBitSource::new(ChaCha20Rng::seed_from_u64(rng_seed))))
    } else {
        let data = run.read("seed_file", file)?;
        Ok(Box::new(BitReader::new(io::bits_from_bytes(data, None)?)))
    }
}

fn bits_arg(data: Vec<u8>, len: u64) -> Result<BitString, Failure> {
    io::bits_from_bytes(data, (len > 0).then_some(len as usize)).map_err(usage)
}

fn outcome(run: &mut Run, p: &ProtocolRun) {
    run.set(
        "status",
        match p.status {
            RunStatus::Passed => "passed".to_string(),
            RunStatus::Aborted(r) => format!("aborted {r}"),
            RunStatus::Running => "running".to_string(),
        },
    );
    run.set("n", p.params.n);
    run.set("score", p.score);
    run.set_f64("threshold", p.threshold);
    run.set_f64("omega_exp", p.params.omega_exp);
    run.set_f64("delta_est", p.params.delta_est);
    run.set("m", p.m);
    if let Some(spec) = &p.spec {
        run.set("ell", spec.ell);
        run.set("d", spec.d());
    }
    run.set("inputs.sampling", p.inputs.sampling);
    run.set("inputs.settings", p.inputs.settings);
    run.set("inputs.extractor_seed", p.inputs.extractor_seed);
}

fn nist_table(tests: &[TestReport]) -> String {
    let mut t = String::from("test\tpassed\tproportion\tuniformity\tverdict\n");
    for r in tests {
        // the usual acceptance rule: at least 94 of 97 at alpha=0.01, scaled
        let n = r.p_values.len() as f64;
        let p = 1.0 - r.alpha;
        let min = p - 3.0 * (p * (1.0 - p) / n).sqrt();
        let ok = r.proportion >= min && r.uniformity >= 1e-4;
        let _ = writeln!(
            t,
            "{}\t{}\t{}\t{}\t{}",
            r.name,
            r.proportion_label(),
            fmt_f64(r.proportion),
            fmt_f64(r.uniformity),
            if ok { "PASS" } else { "FAIL" }
        );
    }
    t
}

params!(SimulateArgs => Simulate {
    /// Run length (s)
    duration: f64 = 60.0,
    /// Gaussian timing jitter, standard deviation (s)
    jitter_sigma: f64 = bellrand_core::sim::DEFAULT_JITTER_SIGMA,
    /// Time-tag resolution (s)
    quantization: f64 = bellrand_core::sim::DEFAULT_QUANTIZATION,
    /// Simulation seed
    seed: u64 = 1,
    /// Settings segment length for a generated schedule (s)
    segment: f64 = 1.0,
    /// Seed of the generated schedule
    schedule_seed: u64 = 2,
    /// Existing schedule file to use instead of generating one
    schedule_in: String = String::new(),
    /// Event file to write
    out: String = String::new(),
    /// Schedule file to write (default: `<out>.schedule`)
    schedule_out: String = String::new(),
});

#[derive(clap::Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: SimulateArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl SimulateCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "simulate", &[SimulateArgs::KEYS, ModelArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let m = self.model.resolve(&cfg)?;
        required("out", &p.out)?;
        let mut run = Run::new("simulate", &self.common, &p.out);
        p.echo(&mut run.manifest);
        m.echo(&mut run.manifest);
        let duration_ns = seconds_to_ns("duration", p.duration)?;
        let schedule = if p.schedule_in.is_empty() {
            let seg = seconds_to_ns("segment", p.segment)?;
            SettingsSchedule::randomized_cycles(duration_ns, seg, p.schedule_seed).map_err(usage)?
        } else {
            let data = run.read("schedule_in", &p.schedule_in)?;
            io::read_schedule(&data[..])?
        };
        let sim = SimulationConfig {
            model: m.source()?,
            duration: p.duration,
            jitter_sigma: p.jitter_sigma,
            quantization: p.quantization,
            rng_seed: p.seed,
            schedule: schedule.clone(),
        };
        let stream = simulate(&sim).map_err(usage)?;
        let mut buf = Vec::new();
        io::write_events(&mut buf, &stream)?;
        run.manifest.set("format.events", io::EVENTS_MAGIC.trim_start_matches("# "));
        run.write("events", &p.out, &buf)?;
        let schedule_out =
            if p.schedule_out.is_empty() { format!("{}.schedule", p.out) } else { p.schedule_out.clone() };
        let mut buf = Vec::new();
        io::write_schedule(&mut buf, &schedule)?;
        run.manifest.set("format.schedule", io::SCHEDULE_MAGIC.trim_start_matches("# "));
        run.write("schedule", &schedule_out, &buf)?;
        let a = stream.count(bellrand_core::sim::Channel::A);
        let b = stream.count(bellrand_core::sim::Channel::B);
        run.set("events", stream.events.len());
        run.set("events_a", a);
        run.set("events_b", b);
        run.set("segments", schedule.segments.len());
        println!(
            "events\t{}\nevents_a\t{a}\nevents_b\t{b}\nsegments\t{}",
            stream.events.len(),
            schedule.segments.len()
        );
        run.finish()
    }
}

params!(ScanArgs => Scan {
    /// Event file
    events: String = String::new(),
    /// Schedule file
    schedule: String = String::new(),
    /// Smallest bin width (s)
    tau_min: f64 = 1e-6,
    /// Largest bin width (s)
    tau_max: f64 = 40e-6,
    /// Bin width step (s)
    tau_step: f64 = 1e-6,
    /// Add mean pairs per bin and the model CHSH value
    model_column: bool = false,
    /// Table file (default: stdout)
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct ScanCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: ScanArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl ScanCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "scan-tau", &[ScanArgs::KEYS, ModelArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let m = self.model.resolve(&cfg)?;
        let mut run = Run::new("scan-tau", &self.common, &p.out);
        p.echo(&mut run.manifest);
        m.echo(&mut run.manifest);
        let stream = io::read_events(&run.read("events", &p.events)?[..])?;
        let schedule = io::read_schedule(&run.read("schedule", &p.schedule)?[..])?;
        let taus = grid(p.tau_min, p.tau_max, p.tau_step)?;
        let points = scan_tau(&stream, &schedule, &taus).map_err(usage)?;
        let model = if p.model_column { Some(m.source()?) } else { None };
        let mut t = String::from("tau_ns\trounds\tS\tsigma_S");
        if model.is_some() {
            t.push_str("\tmu\tS_model");
        }
        t.push('\n');
        let mut best: Option<(u64, f64)> = None;
        for pt in &points {
            let e = &pt.estimate;
            let _ = write!(t, "{}\t{}\t{}\t{}", pt.tau_ns, e.rounds(), fmt_f64(e.s), fmt_f64(e.sigma_s));
            if let Some(model) = &model {
                let tau = pt.tau_ns as f64 * 1e-9;
                let _ = write!(t, "\t{}\t{}", fmt_f64(model.pair_rate * tau), fmt_f64(chsh_at_tau(model, tau)?));
            }
            t.push('\n');
            if best.is_none_or(|(_, s)| e.s > s) {
                best = Some((pt.tau_ns, e.s));
            }
        }
        if let Some((tau_ns, s)) = best {
            run.set("best_tau_ns", tau_ns);
            run.set_f64("best_s", s);
        }
        run.set("points", points.len());
        run.report(&p.out, &t)?;
        run.finish()
    }
}

params!(OptimizeArgs => Optimize {
    /// `poisson` (multi-pair bins with background) or `single-pair`
    objective: String = "poisson".to_string(),
    /// Mean pairs per bin for the poisson objective
    mu: f64 = 0.31,
    /// Bin width (s); `auto` means mu / pair_rate
    tau: Option<f64> = None,
    /// Report file (default: stdout)
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct OptimizeCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: OptimizeArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl OptimizeCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "optimize", &[OptimizeArgs::KEYS, ModelArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let m = self.model.resolve(&cfg)?;
        let mut run = Run::new("optimize", &self.common, &p.out);
        p.echo(&mut run.manifest);
        m.echo(&mut run.manifest);
        let base = m.source()?;
        let objective = match p.objective.as_str() {
            "poisson" => Objective::Poisson { mu: p.mu, tau: p.tau.unwrap_or(p.mu / base.pair_rate) },
            "single-pair" => Objective::SinglePair,
            o => return Err(Failure::Usage(format!("--objective {o}: expected poisson or single-pair"))),
        };
        let rep = optimize_parameters(&base, objective).map_err(usage)?;
        let a = rep.model;
        let rows = [
            ("s", fmt_f64(rep.s)),
            ("theta", fmt_f64(a.theta)),
            ("alpha0", fmt_f64(a.alpha[0])),
            ("alpha1", fmt_f64(a.alpha[1])),
            ("beta0", fmt_f64(a.beta[0])),
            ("beta1", fmt_f64(a.beta[1])),
            ("converged", rep.converged.to_string()),
            ("flat", rep.flat.to_string()),
            ("evaluations", rep.evaluations.to_string()),
        ];
        let mut t = String::new();
        for (k, v) in &rows {
            let _ = writeln!(t, "{k}\t{v}");
            run.set(k, v);
        }
        run.report(&p.out, &t)?;
        run.finish()
    }
}

params!(RatesArgs => Rates {
    /// CHSH value; `auto` means the model at tau
    s: Option<f64> = None,
    /// Bin width (s)
    tau: f64 = 8.9e-6,
    /// Comma-separated block lengths
    n: String = "1e7,1e8,1e9".to_string(),
    /// Test-round probability
    gamma: f64 = 1.0,
    /// Completeness error
    eps_c: f64 = 1e-10,
    /// Soundness error
    eps_s: f64 = 1e-10,
    /// Also tabulate the model asymptotic rate over a tau grid
    scan: bool = false,
    /// Smallest scanned bin width (s)
    tau_min: f64 = 1e-6,
    /// Largest scanned bin width (s)
    tau_max: f64 = 60e-6,
    /// Scan step (s)
    tau_step: f64 = 0.5e-6,
    /// Table file (default: stdout)
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct RatesCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: RatesArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl RatesCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "rates", &[RatesArgs::KEYS, ModelArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let m = self.model.resolve(&cfg)?;
        let mut run = Run::new("rates", &self.common, &p.out);
        p.echo(&mut run.manifest);
        m.echo(&mut run.manifest);
        let ns =
            p.n.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| <u64 as crate::params::Param>::parse(s.trim()))
                .collect::<Result<Vec<u64>, _>>()
                .map_err(|e| Failure::Usage(format!("--n: {e}")))?;
        let s = match p.s {
            Some(s) => s,
            None => chsh_at_tau(&m.source()?, p.tau).map_err(usage)?,
        };
        let r_inf = rates::asymptotic_rate(s, p.tau).map_err(usage)?;
        let r_inf_net = rates::asymptotic_net_rate(s, p.gamma, p.tau).map_err(usage)?;
        run.set_f64("s", s);
        run.set_f64("r_inf", r_inf);
        run.set_f64("r_inf_net", r_inf_net);
        let mut t = format!(
            "S\t{}\ntau\t{}\nr_inf\t{}\nr_inf_net\t{}\n",
            fmt_f64(s),
            fmt_f64(p.tau),
            fmt_f64(r_inf),
            fmt_f64(r_inf_net)
        );
        if !ns.is_empty() {
            t.push_str("n\teta_opt\tm\td\tr_n\tr_net\n");
        }
        for &n in &ns {
            let r = rate_summary(s, p.tau, n, p.gamma, p.eps_c, p.eps_s).map_err(usage)?;
            let _ = writeln!(
                t,
                "{n}\t{}\t{}\t{}\t{}\t{}",
                fmt_f64(r.eta_opt_value),
                r.m,
                r.d,
                fmt_f64(r.r_n),
                fmt_f64(r.r_net)
            );
            run.set(&format!("n{n}.m"), r.m);
            run.set_f64(&format!("n{n}.r_n"), r.r_n);
        }
        if p.scan {
            let model = m.source()?;
            t.push_str("tau_ns\tmu\tS\tr_inf\n");
            let mut best = (0.0, f64::NEG_INFINITY);
            for tau in grid(p.tau_min, p.tau_max, p.tau_step)? {
                let s = chsh_at_tau(&model, tau)?;
                // no violation, nothing certified
                let r = if s <= 2.0 { 0.0 } else { rates::asymptotic_rate(s, tau)? };
                let _ = writeln!(
                    t,
                    "{}\t{}\t{}\t{}",
                    fmt_f64(tau * 1e9),
                    fmt_f64(model.pair_rate * tau),
                    fmt_f64(s),
                    fmt_f64(r)
                );
                if r > best.1 {
                    best = (tau, r);
                }
            }
            let _ = writeln!(t, "best\t{}\t{}", fmt_f64(best.0 * 1e9), fmt_f64(best.1));
            run.set_f64("scan.best_tau", best.0);
            run.set_f64("scan.best_r_inf", best.1);
        }
        run.report(&p.out, &t)?;
        run.finish()
    }
}

params!(DeviceArgs => DeviceRun {
    /// `model` (quantum source), `classical` (deterministic local) or `random`
    device: String = "model".to_string(),
    /// Rounds in the block
    n: u64 = 1_000_000,
    /// Test-round probability
    gamma: f64 = 1.0,
    /// Bin width of the model device (s)
    tau: f64 = 13e-6,
    /// Expected winning probability; `auto` means the model at tau
    omega_exp: Option<f64> = None,
    /// Score tolerance; `auto` means the value from the error budget
    delta_est: Option<f64> = None,
    /// Completeness error
    eps_c: f64 = 1e-10,
    /// Soundness error
    eps_s: f64 = 1e-10,
    /// Device randomness seed
    device_seed: u64 = 1,
    /// ChaCha20 seed for the uniform seed bits
    seed_rng: u64 = 7,
    /// Bit file to read uniform seed bits from instead
    seed_file: String = String::new(),
    /// Output bit file
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct DeviceCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: DeviceArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl DeviceCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "protocol-device", &[DeviceArgs::KEYS, ModelArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let m = self.model.resolve(&cfg)?;
        required("out", &p.out)?;
        let mut run = Run::new("protocol-device", &self.common, &p.out);
        p.echo(&mut run.manifest);
        m.echo(&mut run.manifest);
        let model = m.source()?;
        let mut device: Box<dyn Device> = match p.device.as_str() {
            "model" => Box::new(ModelDevice::new(&model, p.tau, p.device_seed).map_err(usage)?),
            "classical" => Box::new(ClassicalDevice),
            "random" => Box::new(RandomDevice::new(p.device_seed)),
            d => return Err(Failure::Usage(format!("--device {d}: expected model, classical or random"))),
        };
        let budget = epsilon_budget(p.n, p.gamma, p.eps_c, p.eps_s).map_err(usage)?;
        let omega = match p.omega_exp {
            Some(w) => w,
            None => rates::winning_probability(chsh_at_tau(&model, p.tau).map_err(usage)?).min(rates::W_MAX),
        };
        let params = ProtocolParams {
            gamma: p.gamma,
            omega_exp: omega,
            delta_est: p.delta_est.unwrap_or(budget.delta_est),
            n: p.n,
            tau: p.tau,
        };
        let mut src = seed_source(&mut run, &p.seed_file, p.seed_rng)?;
        let result = run_protocol(device.as_mut(), params, budget, src.as_mut()).map_err(usage)?;
        outcome(&mut run, &result);
        let bits = result.output.clone().unwrap_or_else(|| BitString::zeros(0));
        if !result.aborted() {
            run.write_bits("bits", &p.out, &bits)?;
        }
        println!(
            "status\t{}\nscore\t{}\nthreshold\t{}\nm\t{}",
            if result.aborted() { "aborted" } else { "passed" },
            result.score,
            fmt_f64(result.threshold),
            bits.len()
        );
        run.finish()?;
        match result.status {
            RunStatus::Aborted(r) => Err(Failure::Abort(r.to_string())),
            _ => Ok(()),
        }
    }
}

params!(PipelineArgs => Pipeline {
    /// Run length (s)
    duration: f64 = 60.0,
    /// Gaussian timing jitter, standard deviation (s)
    jitter_sigma: f64 = bellrand_core::sim::DEFAULT_JITTER_SIGMA,
    /// Time-tag resolution (s)
    quantization: f64 = bellrand_core::sim::DEFAULT_QUANTIZATION,
    /// Simulation seed
    seed: u64 = 1,
    /// Settings segment length (s)
    segment: f64 = 1.0,
    /// Schedule seed
    schedule_seed: u64 = 7,
    /// Fraction of the run spent choosing the bin width
    gamma_calib: f64 = 0.22,
    /// Error of the calibration estimate
    eps_calib: f64 = 1e-10,
    /// Smallest candidate bin width (s)
    tau_min: f64 = 5e-6,
    /// Largest candidate bin width (s)
    tau_max: f64 = 30e-6,
    /// Candidate step (s)
    tau_step: f64 = 0.5e-6,
    /// Completeness error
    eps_c: f64 = 1e-10,
    /// Soundness error
    eps_s: f64 = 1e-10,
    /// Subsequences for the test battery
    nist_sequences: usize = 97,
    /// Block length of the block-frequency test
    nist_block_len: usize = 20,
    /// Significance level of the test battery
    alpha: f64 = 0.01,
    /// ChaCha20 seed for the extractor seed
    seed_rng: u64 = 9,
    /// Bit file to read the extractor seed from instead
    seed_file: String = String::new(),
    /// Output bit file
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct PipelineCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: PipelineArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl PipelineCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg =
            Config::load(self.common.config.as_deref(), "protocol-pipeline", &[PipelineArgs::KEYS, ModelArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let m = self.model.resolve(&cfg)?;
        required("out", &p.out)?;
        let mut run = Run::new("protocol-pipeline", &self.common, &p.out);
        p.echo(&mut run.manifest);
        m.echo(&mut run.manifest);
        let duration_ns = seconds_to_ns("duration", p.duration)?;
        let schedule =
            SettingsSchedule::randomized_cycles(duration_ns, seconds_to_ns("segment", p.segment)?, p.schedule_seed)
                .map_err(usage)?;
        let e2e = EndToEndConfig {
            sim: SimulationConfig {
                model: m.source()?,
                duration: p.duration,
                jitter_sigma: p.jitter_sigma,
                quantization: p.quantization,
                rng_seed: p.seed,
                schedule,
            },
            gamma_calib: p.gamma_calib,
            eps_calib: p.eps_calib,
            tau_grid: grid(p.tau_min, p.tau_max, p.tau_step)?,
            eps_c: p.eps_c,
            eps_s: p.eps_s,
            nist_sequences: p.nist_sequences,
            nist_block_len: p.nist_block_len,
            alpha: p.alpha,
        };
        let mut src = seed_source(&mut run, &p.seed_file, p.seed_rng)?;
        let rep = match end_to_end(&e2e, src.as_mut()) {
            Ok(r) => r,
            Err(Error::NoViolation(msg)) => {
                run.set("status", format!("no_violation {msg}"));
                run.finish()?;
                return Err(Failure::Abort(format!("no bin width certifies randomness: {msg}")));
            }
            Err(e) => return Err(usage(e)),
        };
        let cal = &rep.calibration;
        let mut t = String::from("tau_ns\tS_calib\tsigma_S\tn_calib\tw_exp\tn_rest\tm_predicted\n");
        for c in &cal.table {
            let _ = writeln!(
                t,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.tau_ns,
                fmt_f64(c.s),
                fmt_f64(c.sigma_s),
                c.n_calib,
                fmt_f64(c.w_exp),
                c.n_rest,
                c.m
            );
        }
        let _ = writeln!(
            t,
            "events\t{}\ntau_star_ns\t{}\nw_exp\t{}\nscore\t{}\nthreshold\t{}\nm\t{}",
            rep.events,
            cal.best.tau_ns,
            fmt_f64(cal.w_exp),
            rep.run.score,
            fmt_f64(rep.run.threshold),
            rep.run.m
        );
        t.push_str(&nist_table(&rep.tests));
        run.set("events", rep.events);
        run.set("tau_star_ns", cal.best.tau_ns);
        run.set_f64("s_calib", cal.s_calib);
        run.set_f64("w_exp", cal.w_exp);
        outcome(&mut run, &rep.run);
        for r in &rep.tests {
            run.set(&format!("test.{}", r.name), r.proportion_label());
        }
        print!("{t}");
        if !rep.run.aborted() {
            let bits = rep.run.output.clone().unwrap_or_else(|| BitString::zeros(0));
            run.write_bits("bits", &p.out, &bits)?;
        }
        run.finish()?;
        match rep.run.status {
            RunStatus::Aborted(r) => Err(Failure::Abort(r.to_string())),
            _ => Ok(()),
        }
    }
}

params!(ExtractArgs => Extract {
    /// Source bit file
    source: String = String::new(),
    /// Source length in bits (0: the whole file)
    source_len: u64 = 0,
    /// Seed bit file
    seed: String = String::new(),
    /// Seed length in bits (0: the whole file)
    seed_len: u64 = 0,
    /// Output bits
    m: u64 = 0,
    /// Field degree (0: derive from eps_1 and the source length)
    ell: usize = 0,
    /// Per-bit extractor error, used when ell is 0
    eps_1: f64 = 1e-10,
    /// Output bit file
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct ExtractCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: ExtractArgs,
}

impl ExtractCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "extract", &[ExtractArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        required("out", &p.out)?;
        if p.m == 0 {
            return Err(Failure::Usage("--m must be at least 1".into()));
        }
        let mut run = Run::new("extract", &self.common, &p.out);
        p.echo(&mut run.manifest);
        let source = bits_arg(run.read("source", &p.source)?, p.source_len)?;
        let seed = bits_arg(run.read("seed", &p.seed)?, p.seed_len)?;
        let spec = if p.ell > 0 {
            ExtractorSpec::with_degree(source.len() as u64, p.m, p.ell)
        } else if source.len() % 2 == 0 {
            ExtractorSpec::new(source.len() as u64 / 2, p.m, p.eps_1)
        } else {
            return Err(Failure::Usage("deriving ell needs an even source length (2n bits); pass --ell".into()));
        }
        .map_err(usage)?;
        let out = trevisan_extract(&source, &seed, &spec).map_err(usage)?;
        run.set("ell", spec.ell);
        run.set("t", spec.design.t);
        run.set("q", spec.design.q);
        run.set("d", spec.d());
        run.set_f64("eps_1", spec.eps_1);
        run.write_bits("bits", &p.out, &out)?;
        println!("m\t{}\nell\t{}\nd\t{}", out.len(), spec.ell, spec.d());
        run.finish()
    }
}

params!(StattestsArgs => Stattests {
    /// Bit file
    bits: String = String::new(),
    /// Length in bits (0: the whole file)
    len: u64 = 0,
    /// Number of subsequences
    sequences: usize = 97,
    /// Block length of the block-frequency test
    block_len: usize = 20,
    /// Significance level
    alpha: f64 = bellrand_core::stattests::DEFAULT_ALPHA,
    /// Table file (default: stdout)
    out: String = String::new(),
});

#[derive(clap::Args)]
pub struct StattestsCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: StattestsArgs,
}

impl StattestsCmd {
    pub fn run(self) -> Result<(), Failure> {
        let cfg = Config::load(self.common.config.as_deref(), "stattests", &[StattestsArgs::KEYS])?;
        let p = self.args.resolve(&cfg)?;
        let mut run = Run::new("stattests", &self.common, &p.out);
        p.echo(&mut run.manifest);
        let bits = bits_arg(run.read("bits", &p.bits)?, p.len)?;
        let reports = battery(&bits, p.sequences, p.block_len, p.alpha).map_err(usage)?;
        for r in &reports {
            run.set(&format!("{}.passed", r.name), r.proportion_label());
            run.set_f64(&format!("{}.uniformity", r.name), r.uniformity);
        }
        run.report(&p.out, &nist_table(&reports))?;
        run.finish()
    }
}
