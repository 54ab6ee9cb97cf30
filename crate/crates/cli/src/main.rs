//! `cosetlab`: runs the property suites and games and writes JSON lines.
//!
//! Every line is one trial (or checked instance); the last line is the
//! summary, tagged `"type":"summary"`. Results depend only on the flags and
//! the seed.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cosetlab::ace::{ace_setup, gen_dk, gen_ek, steg_dec, steg_enc, PuncturingPredicate, StegOutcome, StegSource};
use cosetlab::games::{
    example_scheme_prf_eval, moe_adversary, pirate_by_name, run_builtin_moe, run_copy_protection_game,
    run_strong_antipiracy_game, GameRun, MalleablePuncturableScheme, MOE_ADVERSARIES, PIRATE_NAMES,
};
use cosetlab::prf::{PrfKey, MAX_TABLE_BITS};
use cosetlab::resample::{resample_infinite_law, resample_truncated_law, truncated_limit, FiniteDistribution};
use cosetlab::stats::wilson;
use cosetlab::threshold::random_suite_instance;
use cosetlab::{stream_rng, Error};
use rand::Rng;
use serde_json::{json, Map, Value};

/// Widest support `resample-check` builds exact laws for.
const MAX_CHECK_SUPPORT: usize = 4096;
/// Slack for exact-TI instantiations in `ti-check`.
const TI_SLACK: f64 = 1e-7;
const INFINITE_TV_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "cosetlab", version, about = "Coset-state copy-protection laboratory")]
struct Cli {
    /// RNG seed.
    #[arg(long, global = true, env = "COSETLAB_SEED", default_value_t = 0)]
    seed: u64,

    /// Write the JSON lines here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monogamy-of-entanglement game with a built-in product adversary.
    Moe {
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value = "split-basis")]
        adversary: String,
        #[arg(long, default_value_t = 4096)]
        trials: u64,
    },
    /// Copy-protection game against a built-in pirate.
    CpGame {
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value = "forward")]
        adversary: String,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Strong anti-piracy game with threshold p_triv + gamma.
    StrongAp {
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value = "forward")]
        adversary: String,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Steganographic embed and extract of one message.
    AceDemo {
        #[arg(long, default_value_t = 8)]
        n: u32,
        /// `uniform:<bits>` or `file:<path>` with `value_hex probability` lines.
        #[arg(long, default_value = "uniform:48")]
        dist: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Message in hex.
        #[arg(long, default_value = "0")]
        msg: String,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Exact resampled laws on random (D, f) pairs.
    ResampleCheck {
        #[arg(long, default_value_t = 64)]
        support: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
    /// TI/ATI/SimATI inequality suite on random instances.
    TiCheck {
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
    /// Punctured-key agreement over the whole PRF domain.
    PrfCheck {
        #[arg(long, default_value_t = 12)]
        m: u32,
        #[arg(long, default_value_t = 8)]
        max_set: usize,
        #[arg(long, default_value_t = 20)]
        trials: u64,
    },
}

#[derive(clap::Args)]
struct SchemeArgs {
    #[arg(long, default_value = "prf-eval")]
    scheme: String,
    #[arg(long, default_value_t = 6)]
    n_in: u32,
    #[arg(long, default_value_t = 8)]
    n_out: u32,
}

enum Failure {
    Usage(String),
    Lab(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lab(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

/// Buffers lines and tracks property failures.
struct Sink {
    out: Box<dyn Write>,
    failures: Vec<String>,
}

impl Sink {
    fn line(&mut self, v: Value) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, &v)?;
        self.out.write_all(b"\n")
    }

    fn trial(&mut self, game: &str, trial: u64, outcome: bool, params: &Value, extra: Value) -> io::Result<()> {
        let mut m = Map::new();
        m.insert("type".into(), json!("trial"));
        m.insert("game".into(), json!(game));
        m.insert("trial".into(), json!(trial));
        m.insert("outcome".into(), json!(outcome));
        if let Value::Object(extra) = extra {
            m.extend(extra);
        }
        m.insert("params".into(), params.clone());
        self.line(Value::Object(m))
    }

    fn summary(&mut self, game: &str, wins: u64, trials: u64, params: &Value, extra: Value) -> io::Result<()> {
        let s = wilson(wins, trials);
        let mut m = Map::new();
        m.insert("type".into(), json!("summary"));
        m.insert("game".into(), json!(game));
        m.insert("successes".into(), json!(s.successes));
        m.insert("trials".into(), json!(s.trials));
        m.insert("rate".into(), json!(s.rate));
        m.insert("ci_low".into(), json!(s.ci_low));
        m.insert("ci_high".into(), json!(s.ci_high));
        if let Value::Object(extra) = extra {
            m.extend(extra);
        }
        m.insert("params".into(), params.clone());
        self.line(Value::Object(m))
    }

    fn fail(&mut self, what: String) {
        self.failures.push(what);
    }
}

fn scheme_by_name(args: &SchemeArgs) -> Result<Box<dyn MalleablePuncturableScheme>, Failure> {
    match args.scheme.as_str() {
        "prf-eval" => Ok(Box::new(example_scheme_prf_eval(args.n_in, args.n_out)?)),
        other => Err(Failure::Usage(format!("unknown scheme `{other}` (known: prf-eval)"))),
    }
}

fn emit_run(sink: &mut Sink, run: &GameRun, params: &Value, extra: Value) -> io::Result<()> {
    for t in &run.trials {
        let mut rec = serde_json::to_value(t).expect("trial records serialize");
        if let Value::Object(m) = &mut rec {
            m.remove("trial");
            m.remove("outcome");
            m.insert("adversary".into(), json!(run.adversary));
        }
        sink.trial(&run.game, t.trial, t.outcome, params, rec)?;
    }
    let mut m = Map::new();
    m.insert("adversary".into(), json!(run.adversary));
    if let Some(e) = run.expected {
        m.insert("expected".into(), json!(e));
    }
    if let Value::Object(extra) = extra {
        m.extend(extra);
    }
    sink.summary(&run.game, run.summary.successes, run.summary.trials, params, Value::Object(m))
}

fn moe(sink: &mut Sink, seed: u64, d: usize, adversary: &str, trials: u64) -> Outcome {
    let adv = moe_adversary(adversary).ok_or_else(|| {
        let known: Vec<_> = MOE_ADVERSARIES.iter().map(|a| a.name).collect();
        Failure::Usage(format!("unknown adversary `{adversary}` (known: {})", known.join(", ")))
    })?;
    let run = run_builtin_moe(d, &adv, trials, seed)?;
    let params = json!({"d": d, "adversary": adversary, "trials": trials, "seed": seed});
    emit_run(sink, &run, &params, json!({}))?;
    Ok(())
}

fn pirate(name: &str) -> Result<Box<dyn cosetlab::games::Pirate>, Failure> {
    pirate_by_name(name)
        .ok_or_else(|| Failure::Usage(format!("unknown adversary `{name}` (known: {})", PIRATE_NAMES.join(", "))))
}

fn cp_game(sink: &mut Sink, seed: u64, d: usize, adversary: &str, scheme: &SchemeArgs, trials: u64) -> Outcome {
    let s = scheme_by_name(scheme)?;
    let p = pirate(adversary)?;
    let run = run_copy_protection_game(s.as_ref(), p.as_ref(), d, trials, seed)?;
    let params = json!({
        "d": d, "adversary": adversary, "scheme": scheme.scheme, "n_in": scheme.n_in,
        "n_out": scheme.n_out, "trials": trials, "seed": seed,
    });
    emit_run(sink, &run, &params, json!({"p_triv": s.p_triv()}))?;
    Ok(())
}

fn strong_ap(sink: &mut Sink, seed: u64, d: usize, gamma: f64, adversary: &str, scheme: &SchemeArgs, trials: u64) -> Outcome {
    let s = scheme_by_name(scheme)?;
    let p = pirate(adversary)?;
    let report = run_strong_antipiracy_game(s.as_ref(), p.as_ref(), d, gamma, trials, seed)?;
    let params = json!({
        "d": d, "gamma": gamma, "adversary": adversary, "scheme": scheme.scheme, "n_in": scheme.n_in,
        "n_out": scheme.n_out, "trials": trials, "seed": seed,
    });
    let extra = json!({
        "p_triv": s.p_triv(),
        "threshold": report.threshold,
        "degenerate": report.degenerate,
        "mean_side_probabilities": [report.mean_side_probabilities.0, report.mean_side_probabilities.1],
    });
    emit_run(sink, &report.run, &params, extra)?;
    Ok(())
}

fn parse_source(dist: &str) -> Result<StegSource, Failure> {
    if let Some(bits) = dist.strip_prefix("uniform:") {
        let bits: u32 = bits
            .parse()
            .map_err(|_| Failure::Usage(format!("bad uniform width in `{dist}`")))?;
        if !(1..=64).contains(&bits) {
            return Err(Failure::Usage(format!("uniform width {bits} outside 1..=64")));
        }
        Ok(StegSource::UniformBits(bits))
    } else if let Some(path) = dist.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        let d = FiniteDistribution::from_text(&text)?;
        let bits = d.sample_bits().max(1);
        Ok(StegSource::explicit(d, bits)?)
    } else {
        Err(Failure::Usage(format!("distribution `{dist}` is neither uniform:<bits> nor file:<path>")))
    }
}

fn ace_demo(sink: &mut Sink, seed: u64, n: u32, dist: &str, epsilon: f64, msg: &str, trials: u64) -> Outcome {
    let source = parse_source(dist)?;
    let m = u64::from_str_radix(msg.trim_start_matches("0x"), 16)
        .map_err(|_| Failure::Usage(format!("message `{msg}` is not hex")))?;
    if n < 64 && m >> n != 0 {
        return Err(Failure::Usage(format!("message {msg} wider than {n} bits")));
    }
    let mut rng = stream_rng(seed, 0);
    let sk = ace_setup(n, 128, &mut rng)?;
    let never = PuncturingPredicate::never();
    let (ek, dk) = (gen_ek(&sk, &never, &mut rng), gen_dk(&sk, &never, &mut rng));
    let params = json!({"n": n, "dist": dist, "epsilon": epsilon, "msg": msg, "trials": trials, "seed": seed});
    let bits = source.sample_bits();
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial + 1);
        let outcome = steg_enc(&ek, m, &source, epsilon, &mut rng)?;
        let (ok, extra) = match outcome {
            StegOutcome::Embedded(s) => {
                let back = steg_dec(&dk, s, bits)?;
                if back != Some(m) {
                    sink.fail(format!("trial {trial}: embedded sample decoded to {back:?}"));
                }
                (back == Some(m), json!({"status": "embedded", "sample": format!("{s:x}"), "decoded": back.map(|b| format!("{b:x}"))}))
            }
            StegOutcome::Exhausted { tries } => (false, json!({"status": "exhausted", "tries": tries})),
            StegOutcome::Punctured => (false, json!({"status": "punctured"})),
        };
        wins += ok as u64;
        sink.trial("ace-demo", trial, ok, &params, extra)?;
    }
    sink.summary("ace-demo", wins, trials, &params, json!({"floor": 1.0 - 2.0 * epsilon}))?;
    Ok(())
}

fn random_pair(support: usize, rng: &mut impl Rng) -> Result<(FiniteDistribution, Vec<u64>), Error> {
    let size = rng.random_range(1..=support);
    let weights: Vec<f64> = (0..size).map(|_| rng.random_range(0.01..1.0)).collect();
    let d = FiniteDistribution::from_weights((0..size as u64).collect(), weights)?;
    let range = rng.random_range(1..=size as u64);
    let f = (0..size).map(|_| rng.random_range(0..range)).collect();
    Ok((d, f))
}

fn resample_check(sink: &mut Sink, seed: u64, support: usize, epsilon: f64, trials: u64) -> Outcome {
    if support > MAX_CHECK_SUPPORT {
        return Err(Error::Capacity {
            module: "reverse-resampler",
            what: "checked support size",
            requested: support as u128,
            limit: MAX_CHECK_SUPPORT as u128,
        }
        .into());
    }
    if support == 0 {
        return Err(Failure::Usage("support must be positive".into()));
    }
    let params = json!({"support": support, "epsilon": epsilon, "trials": trials, "seed": seed});
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let (d, table) = random_pair(support, &mut rng)?;
        let f = |x: u64| table[x as usize];
        let infinite = resample_infinite_law(&d, f).tv_from(&d);
        let t = truncated_limit(epsilon, d.len())?;
        let law = resample_truncated_law(&d, f, t);
        let tv = law.tv_from(&d);
        let ok = infinite < INFINITE_TV_TOL && tv <= epsilon && law.bottom <= epsilon;
        if !ok {
            sink.fail(format!("pair {trial}: infinite TV {infinite:e}, truncated TV {tv}, bottom {}", law.bottom));
        }
        wins += ok as u64;
        let extra = json!({"support_size": d.len(), "t_limit": t, "infinite_tv": infinite, "truncated_tv": tv, "bottom": law.bottom});
        sink.trial("resample-check", trial, ok, &params, extra)?;
    }
    sink.summary("resample-check", wins, trials, &params, json!({}))?;
    Ok(())
}

fn ti_check(sink: &mut Sink, seed: u64, dim: usize, trials: u64) -> Outcome {
    let params = json!({"dim": dim, "trials": trials, "seed": seed, "slack": TI_SLACK});
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let checks = random_suite_instance(dim, &mut rng)?;
        let violated: Vec<&str> = checks.iter().filter(|c| !c.holds(TI_SLACK)).map(|c| c.clause.as_str()).collect();
        let worst = checks.iter().map(|c| c.rhs - c.lhs).fold(f64::NEG_INFINITY, f64::max);
        let ok = violated.is_empty();
        if !ok {
            sink.fail(format!("instance {trial}: {}", violated.join("; ")));
        }
        wins += ok as u64;
        sink.trial("ti-check", trial, ok, &params, json!({"clauses": checks.len(), "violated": violated, "worst_gap": worst}))?;
    }
    sink.summary("ti-check", wins, trials, &params, json!({}))?;
    Ok(())
}

fn prf_check(sink: &mut Sink, seed: u64, m: u32, max_set: usize, trials: u64) -> Outcome {
    if m == 0 {
        return Err(Failure::Usage("input width must be positive".into()));
    }
    if m > MAX_TABLE_BITS {
        return Err(Error::Capacity {
            module: "puncturable-prf",
            what: "enumerated input bits",
            requested: m as u128,
            limit: MAX_TABLE_BITS as u128,
        }
        .into());
    }
    let params = json!({"m": m, "max_set": max_set, "trials": trials, "seed": seed});
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let key = PrfKey::setup(128, m, 16, &mut rng)?;
        let size = rng.random_range(0..=max_set.min(1 << m));
        let mut set = BTreeSet::new();
        while set.len() < size {
            set.insert(rng.random_range(0..1u64 << m));
        }
        let punctured = key.puncture(&set)?;
        let table = key.table()?;
        let mut mismatches = 0u64;
        for (x, &y) in table.iter().enumerate() {
            let x = x as u64;
            let got = punctured.eval_word(x)?;
            let good = if set.contains(&x) { got.is_err() } else { got == Ok(y) };
            mismatches += !good as u64;
        }
        let ok = mismatches == 0;
        if !ok {
            sink.fail(format!("set {trial}: {mismatches} mismatches"));
        }
        wins += ok as u64;
        let extra = json!({"set": set.iter().map(|x| format!("{x:x}")).collect::<Vec<_>>(), "mismatches": mismatches});
        sink.trial("prf-check", trial, ok, &params, extra)?;
    }
    sink.summary("prf-check", wins, trials, &params, json!({}))?;
    Ok(())
}

fn run(cli: Cli) -> Result<Vec<String>, Failure> {
    let out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut sink = Sink { out, failures: Vec::new() };
    let seed = cli.seed;
    match &cli.command {
        Command::Moe { d, adversary, trials } => moe(&mut sink, seed, *d, adversary, *trials),
        Command::CpGame { d, adversary, scheme, trials } => cp_game(&mut sink, seed, *d, adversary, scheme, *trials),
        Command::StrongAp { d, gamma, adversary, scheme, trials } => {
            strong_ap(&mut sink, seed, *d, *gamma, adversary, scheme, *trials)
        }
        Command::AceDemo { n, dist, epsilon, msg, trials } => ace_demo(&mut sink, seed, *n, dist, *epsilon, msg, *trials),
        Command::ResampleCheck { support, epsilon, trials } => resample_check(&mut sink, seed, *support, *epsilon, *trials),
        Command::TiCheck { dim, trials } => ti_check(&mut sink, seed, *dim, *trials),
        Command::PrfCheck { m, max_set, trials } => prf_check(&mut sink, seed, *m, *max_set, *trials),
    }?;
    sink.out.flush()?;
    Ok(sink.failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("property failure: {f}");
            }
            ExitCode::from(4)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lab(e @ Error::Capacity { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Lab(e @ (Error::Parameter(_) | Error::Parse(_)))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Lab(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
