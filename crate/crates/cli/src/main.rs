use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use mixsing::acceptance;
use mixsing::invariants::{self as inv, Config, GenericSampler};
use mixsing::normform;
use mixsing::pderiv::PDerivation;
use mixsing::{expr, Bounds, Dvr, DvrSpec, Error, PrecisionEvent, Series, VarSet};

/// Singularity invariants of hypersurfaces over a complete DVR.
#[derive(Parser, Debug)]
#[command(name = "mixsing", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone)]
enum Cmd {
    /// Print the tilde lift f̃ in V[[x, y]].
    Tilde { expr: Option<String> },
    /// Full invariant report.
    Invariants { expr: Option<String> },
    /// Splitting lemma normal form of f̃ up to a finite jet.
    Split {
        expr: Option<String>,
        /// Target jet (defaults to the degree bound).
        #[arg(long)]
        jet: Option<u32>,
    },
    /// Determinacy witness of f̃ with respect to ⟨x, y⟩.
    Determinacy { expr: Option<String> },
    /// Isolated-singularity test.
    Isolated { expr: Option<String> },
    /// Run the built-in acceptance suite.
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Residue characteristic.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Eisenstein polynomial in t defining a ramified extension, e.g. "t^2-3".
    #[arg(long, global = true)]
    eisenstein: Option<String>,
    /// Number of x variables (inferred from the expression when absent).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value_t = 12)]
    degree: u32,
    #[arg(long, global = true, default_value_t = 8)]
    precision: u32,
    #[arg(long, global = true, default_value_t = 5)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap for uniformizer power membership.
    #[arg(long, global = true, default_value_t = 16)]
    nmax: u32,
    /// Cap for determinacy and ideal-order searches.
    #[arg(long, global = true, default_value_t = 8)]
    kmax: u32,
    #[arg(long, global = true)]
    json: bool,
    /// File with one expression per line; `#` starts a comment.
    #[arg(long, global = true)]
    batch: Option<String>,
    /// Values δ(x1),…,δ(xn), comma separated; a single value is used for
    /// every variable. Repeatable.
    #[arg(long = "tau-delta", global = true)]
    tau_delta: Vec<String>,
}

/// Error that aborts a job.
struct Fatal {
    error: String,
    module: &'static str,
    bounds: Option<Bounds>,
}

impl Fatal {
    fn usage(msg: impl Into<String>) -> Self {
        Fatal {
            error: msg.into(),
            module: "cli",
            bounds: None,
        }
    }

    fn json(&self) -> Value {
        json!({ "error": self.error, "module": self.module, "bounds": self.bounds })
    }
}

impl From<Error> for Fatal {
    fn from(e: Error) -> Self {
        Fatal {
            error: e.to_string(),
            module: e.module(),
            bounds: e.bounds(),
        }
    }
}

fn flag_name(e: &Error) -> Option<&'static str> {
    Some(match e {
        Error::NotFiniteUpToBounds(_) => "NotFiniteUpToBounds",
        Error::NotFoundUpTo(_) => "NotFoundUpTo",
        Error::Precondition(_) => "Precondition",
        Error::OrderMismatch { .. } => "OrderMismatch",
        Error::CombinatorialBlowup { .. } => "CombinatorialBlowup",
        Error::RamifiedUnsupported => "RamifiedUnsupported",
        Error::UnramifiedUnsupported => "UnramifiedUnsupported",
        Error::PrecisionExhausted(_) => "PrecisionExhausted",
        _ => return None,
    })
}

/// A result or a bounds-flag; anything else aborts the job.
fn entry<T>(r: mixsing::Result<T>, ok: impl FnOnce(T) -> Value) -> Result<Value, Fatal> {
    match r {
        Ok(v) => Ok(ok(v)),
        Err(e) => match flag_name(&e) {
            Some(flag) => {
                Ok(json!({ "flag": flag, "message": e.to_string(), "module": e.module(), "bounds": e.bounds() }))
            }
            None => Err(e.into()),
        },
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

struct Job {
    spec: DvrSpec,
    n: usize,
    cfg: Config,
}

impl Job {
    fn new(opts: &Opts, src: &str) -> Result<Job, Fatal> {
        let p = opts.p.ok_or_else(|| Fatal::usage("--p is required"))?;
        let spec = match &opts.eisenstein {
            Some(e) => DvrSpec::eisenstein(p, expr::parse_int_poly(e, "t")?),
            None => DvrSpec::unramified(p),
        };
        let n = opts.n.unwrap_or_else(|| infer_n(src));
        let cfg = Config {
            degree: opts.degree,
            precision: opts.precision,
            samples: opts.samples,
            seed: opts.seed,
            n_max: opts.nmax,
            k_max: opts.kmax,
        };
        Ok(Job { spec, n, cfg })
    }

    fn ring(&self, cfg: &Config) -> mixsing::Result<Dvr> {
        Dvr::new(&self.spec, cfg.precision)
    }

    fn parse(&self, src: &str, cfg: &Config) -> mixsing::Result<(Series, Vec<PrecisionEvent>)> {
        expr::parse(src, self.ring(cfg)?, VarSet::x(self.n), cfg.degree)
    }

    fn config_json(&self, opts: &Opts) -> Value {
        json!({
            "p": self.spec.p,
            "ramification": opts.eisenstein.as_deref().map_or("unramified".to_string(), |e| format!("eisenstein {e}")),
            "n": self.n,
            "degree": self.cfg.degree,
            "precision": self.cfg.precision,
            "samples": self.cfg.samples,
            "seed": self.cfg.seed,
            "nmax": self.cfg.n_max,
            "kmax": self.cfg.k_max,
        })
    }
}

/// Largest index i with `xi` in the source, at least 1.
fn infer_n(src: &str) -> usize {
    let b = src.as_bytes();
    let mut n = 1;
    for i in 0..b.len() {
        let starts = b[i] == b'x' && (i == 0 || !b[i - 1].is_ascii_alphanumeric());
        if starts {
            let digits: String = src[i + 1..].chars().take_while(|c| c.is_ascii_digit()).collect();
            if let Ok(k) = digits.parse::<usize>() {
                n = n.max(k);
            }
        }
    }
    n
}

fn terms_json(s: &Series) -> Value {
    let vars = s.vars();
    Value::Array(
        s.terms()
            .map(|(m, c)| json!({ "monomial": m.format(&vars), "coeff": s.ring().format(*c) }))
            .collect(),
    )
}

fn tilde_json(f: &Series, events: &mut Vec<PrecisionEvent>) -> Result<Value, Fatal> {
    let (lift, ev) = inv::lift(f)?;
    events.extend(ev);
    Ok(json!({ "series": lift.to_string(), "terms": terms_json(&lift) }))
}

fn report(cmd: &Cmd, opts: &Opts, src: &str) -> Result<Value, Fatal> {
    let job = Job::new(opts, src)?;
    let (f, mut events) = job.parse(src, &job.cfg)?;
    let mut out = Map::new();
    out.insert("input".into(), json!(src));
    out.insert("config".into(), job.config_json(opts));
    match cmd {
        Cmd::Tilde { .. } => {
            out.insert("tilde".into(), tilde_json(&f, &mut events)?);
        }
        Cmd::Invariants { .. } => invariants(&job, opts, src, &f, &mut out, &mut events)?,
        Cmd::Split { jet, .. } => {
            let target = jet.unwrap_or(job.cfg.degree);
            let res = entry(normform::split(&f, target), |s| {
                let ring = *s.residual.ring();
                events.extend(s.events.iter().cloned());
                json!({
                    "k": s.k,
                    "r": s.r,
                    "y_reassigned": s.y_reassigned,
                    "units": s.units.iter().map(|u| ring.format(*u)).collect::<Vec<_>>(),
                    "normal_form": s.normal_form.to_string(),
                    "residual": s.residual.to_string(),
                    "valid_to": s.valid_to,
                    "transform": s.transform.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "obstructions": to_json(&s.obstructions),
                })
            })?;
            out.insert("split".into(), res);
        }
        Cmd::Determinacy { .. } => {
            let res = inv::with_retry(&job.cfg, &mut events, |c| {
                let (f, _) = job.parse(src, c)?;
                let (lift, _) = inv::lift(&f)?;
                inv::determinacy_bound(&lift, &inv::variables_ideal(&lift)?, c.k_max)
            });
            out.insert("ideal".into(), json!("<x, y>"));
            out.insert("determinacy".into(), entry(res, |d| to_json(&d))?);
        }
        Cmd::Isolated { .. } => {
            out.insert(
                "isolated".into(),
                entry(inv::isolated_singularity_check(&f, &job.cfg), |v| to_json(&v))?,
            );
        }
        Cmd::Selftest => unreachable!("selftest takes no expression"),
    }
    out.insert("precision_events".into(), to_json(&events));
    Ok(Value::Object(out))
}

fn invariants(
    job: &Job,
    opts: &Opts,
    src: &str,
    f: &Series,
    out: &mut Map<String, Value>,
    events: &mut Vec<PrecisionEvent>,
) -> Result<(), Fatal> {
    let mut certs = Map::new();
    out.insert("ord".into(), json!(f.order()));
    out.insert("tilde".into(), tilde_json(f, events)?);

    let reparse = |c: &Config| job.parse(src, c).map(|(f, _)| f);
    let sampled = |c: &Config, milnor: bool| {
        let f = reparse(c)?;
        let smp = GenericSampler::from_config(c);
        if milnor {
            inv::mu_v(&f, &smp)
        } else {
            inv::tau_v(&f, &smp)
        }
    };
    for (key, milnor) in [("tau_V", false), ("mu_V", true)] {
        let r = inv::with_retry(&job.cfg, events, |c| sampled(c, milnor));
        let v = entry(r, |t| {
            certs.insert(key.into(), to_json(&t.certificate));
            json!({ "value": t.value, "certified": t.certified, "agreement": t.agreement, "samples": t.samples })
        })?;
        out.insert(key.into(), v);
    }

    let mut deltas = Vec::new();
    for (i, spec) in opts.tau_delta.iter().enumerate() {
        let mut values: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).collect();
        if values.len() == 1 {
            values = vec![values[0].clone(); job.n];
        }
        let r = inv::with_retry(&job.cfg, events, |c| {
            let f = reparse(c)?;
            let vals = values
                .iter()
                .map(|v| expr::parse(v, *f.ring(), f.vars(), c.degree).map(|(s, _)| s))
                .collect::<mixsing::Result<Vec<_>>>()?;
            inv::tau_delta(&f, &PDerivation::new(vals)?)
        });
        let v = entry(r, |t| {
            certs.insert(format!("tau_delta[{i}]"), to_json(&t.certificate));
            json!(inv::format_rational(&t.value))
        })?;
        deltas.push(json!({ "delta_values": values, "value": v }));
    }
    out.insert("tau_delta".into(), Value::Array(deltas));

    let r = inv::with_retry(&job.cfg, events, |c| inv::tau_big_delta(&reparse(c)?, c.seed));
    let v = entry(r, |t| {
        certs.insert("tau_Delta".into(), to_json(&t.certificate));
        json!(inv::format_rational(&t.value))
    })?;
    out.insert("tau_Delta".into(), v);

    let r = inv::with_retry(&job.cfg, events, |c| inv::tau_pi(&reparse(c)?));
    out.insert("tau_pi".into(), entry(r, |t| json!(t))?);

    out.insert(
        "ord_uniformizer".into(),
        entry(inv::ord_uniformizer(f, job.cfg.n_max), |u| to_json(&u))?,
    );

    let r = inv::with_retry(&job.cfg, events, |c| {
        let (lift, _) = inv::lift(&reparse(c)?)?;
        inv::determinacy_bound(&lift, &inv::variables_ideal(&lift)?, c.k_max)
    });
    out.insert(
        "determinacy".into(),
        entry(r, |d| json!({ "k": d.k, "order": d.order, "j_bound": d.j_bound }))?,
    );

    let r = inv::with_retry(&job.cfg, events, |c| {
        normform::classify(&reparse(c)?, &GenericSampler::from_config(c), c.degree)
    });
    out.insert("classify".into(), entry(r, |k| to_json(&k))?);
    out.insert("certificates".into(), Value::Object(certs));
    Ok(())
}

fn render(v: &Value, json_mode: bool) -> String {
    if json_mode {
        return serde_json::to_string(v).expect("json");
    }
    let Value::Object(m) = v else { return v.to_string() };
    let mut s = String::new();
    for (k, v) in m {
        match v {
            Value::String(x) => s.push_str(&format!("{k}: {x}\n")),
            other => s.push_str(&format!("{k}: {other}\n")),
        }
    }
    s.pop();
    s
}

fn expr_of(cmd: &Cmd) -> Option<&str> {
    match cmd {
        Cmd::Tilde { expr }
        | Cmd::Invariants { expr }
        | Cmd::Split { expr, .. }
        | Cmd::Determinacy { expr }
        | Cmd::Isolated { expr } => expr.as_deref(),
        Cmd::Selftest => None,
    }
}

fn selftest(json_mode: bool) -> ExitCode {
    let results: Vec<acceptance::Criterion> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=7).map(|id| s.spawn(move || acceptance::run(id))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread"))
            .collect()
    });
    let all = results.iter().all(|c| c.pass());
    if json_mode {
        let v: Vec<Value> = results
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "title": c.title,
                    "tolerance": c.tolerance,
                    "pass": c.pass(),
                    "checks": c.checks.iter().map(|k| json!({
                        "name": k.name, "expected": k.expected, "got": k.got, "pass": k.pass
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        say(&serde_json::to_string(&v).expect("json"));
    } else {
        say(&format!("{:<3} {:<5} {:>7}  {}", "id", "", "checks", "criterion"));
        for c in &results {
            let ok = c.checks.iter().filter(|k| k.pass).count();
            say(&format!(
                "{:<3} {:<5} {:>7}  {} [tolerance {}]",
                c.id,
                if c.pass() { "PASS" } else { "FAIL" },
                format!("{ok}/{}", c.checks.len()),
                c.title,
                c.tolerance
            ));
            for k in c.failures() {
                say(&format!("          {}: expected {}, got {}", k.name, k.expected, k.got));
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

/// Prints a line, exiting quietly when stdout has been closed.
fn say(s: &str) {
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{s}").is_err() {
        std::process::exit(0);
    }
}

fn emit_error(e: &Fatal, json_mode: bool) {
    if json_mode {
        say(&e.json().to_string());
    } else {
        let b = e.bounds.map(|b| format!(" ({b})")).unwrap_or_default();
        eprintln!("error [{}]: {}{b}", e.module, e.error);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = &cli.opts;
    if matches!(cli.cmd, Cmd::Selftest) {
        return selftest(opts.json);
    }
    let inputs: Vec<String> = match (&opts.batch, expr_of(&cli.cmd)) {
        (Some(path), None) => match fs::read_to_string(path) {
            Ok(text) => text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
            Err(e) => {
                emit_error(&Fatal::usage(format!("cannot read {path}: {e}")), opts.json);
                return ExitCode::from(2);
            }
        },
        (None, Some(src)) => vec![src.to_string()],
        (Some(_), Some(_)) => {
            emit_error(
                &Fatal::usage("give either an expression or --batch, not both"),
                opts.json,
            );
            return ExitCode::from(2);
        }
        (None, None) => {
            emit_error(&Fatal::usage("missing expression"), opts.json);
            return ExitCode::from(2);
        }
    };
    let mut failed = false;
    for (i, src) in inputs.iter().enumerate() {
        if i > 0 && !opts.json {
            say("");
        }
        match report(&cli.cmd, opts, src) {
            Ok(v) => say(&render(&v, opts.json)),
            Err(e) => {
                failed = true;
                emit_error(&e, opts.json);
            }
        }
    }
    if failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
