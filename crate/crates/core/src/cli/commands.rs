use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::Config;
use super::{usage, Cli, CliError, Command, Outcome, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use crate::automaton::{analyze_with_width, joint_product_chain, reduce_kernel};
use crate::protocol::{builtin, parse_draft, validate, Point, ProtocolError, ScoutProtocol};
use crate::renewal::{
    divergence_flag, explorer_cover_time, extract_renewal, homogeneity_test, meeting_tail, trap_detect, RenewalError, DEFAULT_MIN_DWELL,
};
use crate::sim::{monte_carlo_hitting_many, run};
use crate::stats::{MeanEstimate, Verdict};
use crate::stream::SeedSpec;
use crate::walks::{
    check_lemma17, check_lemma50, check_lemma6, check_lemma7, check_prop22, estimate_event, exact_dp_oracle, scan_lemma7, CheckResult,
    Event, LookAroundWalk, StepLaw, Target,
};

const DEFAULT_LAW: &str = "1@1/2;-1@1/2";
/// Pragmatic step cap for stopping times; outputs say when it was not chosen by the user.
const DEFAULT_CAP: u64 = 1 << 20;

fn cap_source(given: Option<u64>) -> &'static str {
    if given.is_some() {
        "given"
    } else {
        "default"
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// `builtin:NAME[,key=value...]` or a protocol file path.
pub fn load_protocol(src: &str) -> Result<ScoutProtocol, CliError> {
    if let Some(spec) = src.strip_prefix("builtin:") {
        let mut parts = spec.split(',');
        let name = parts.next().unwrap_or("").trim();
        let mut params = BTreeMap::new();
        for kv in parts {
            let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("builtin parameter `{kv}` is not key=value")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        return builtin(name, &params).map_err(usage);
    }
    let path = PathBuf::from(src);
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    crate::protocol::parse_protocol(&text).map_err(|e| usage(format!("{src}: {e}")))
}

fn parse_point(s: &str, dim: usize) -> Result<Point, CliError> {
    let parts: Vec<&str> = s.trim().trim_start_matches('(').trim_end_matches(')').split(',').map(str::trim).collect();
    if parts.len() != dim {
        return Err(usage(format!("target `{s}` needs {dim} coordinate(s)")));
    }
    let mut p = [0i64; 2];
    for (i, c) in parts.iter().enumerate() {
        p[i] = c.parse().map_err(|_| usage(format!("target `{s}`: `{c}` is not an integer")))?;
    }
    Ok(p)
}

fn parse_law(s: &str) -> Result<StepLaw, CliError> {
    s.parse().map_err(|e| usage(format!("law `{s}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split([',', ' ']).filter(|t| !t.is_empty()).map(|t| t.trim().parse().map_err(|_| usage(format!("{what}: bad entry `{t}`")))).collect()
}

struct Globals {
    seed: u64,
    cap: Option<u64>,
    replicas: Option<u64>,
}

pub(super) fn dispatch(cli: &Cli, cfg: &Config) -> Result<Outcome, CliError> {
    let g = Globals {
        seed: cfg.pick(cli.seed, "seed")?.unwrap_or(0),
        cap: cfg.pick(cli.cap, "cap")?,
        replicas: cfg.pick(cli.replicas, "replicas")?,
    };
    let mut outcome = run_command(cli, cfg, &g)?;
    if !matches!(cli.command, Command::Validate { .. }) {
        outcome.seed = Some(g.seed);
    }
    Ok(outcome)
}

fn run_command(cli: &Cli, cfg: &Config, g: &Globals) -> Result<Outcome, CliError> {
    let protocol = |p: &Option<String>| -> Result<ScoutProtocol, CliError> {
        let src = cfg.pick(p.clone(), "protocol")?.ok_or_else(|| usage("--protocol is required"))?;
        load_protocol(&src)
    };
    match &cli.command {
        Command::Validate { file } => {
            let file: PathBuf = cfg.pick(file.clone(), "file")?.ok_or_else(|| usage("validate needs a file"))?;
            cmd_validate(&file)
        }
        Command::Simulate { protocol: p, horizon } => {
            let horizon = cfg.pick(*horizon, "horizon")?.unwrap_or(100);
            cmd_simulate(&protocol(p)?, horizon, g.seed)
        }
        Command::Hitting { protocol: p, targets } => {
            let p = protocol(p)?;
            let targets = cfg.pick_list(targets, "target");
            if targets.is_empty() {
                return Err(usage("hitting needs at least one --target"));
            }
            let pts = targets.iter().map(|t| parse_point(t, p.dim())).collect::<Result<Vec<_>, _>>()?;
            cmd_hitting(&p, &pts, g.replicas.unwrap_or(1000), g.cap, g.seed)
        }
        Command::Analyze { protocol: p, scout, product, width } => {
            let p = protocol(p)?;
            let product = *product || cfg.pick::<bool>(None, "product")?.unwrap_or(false);
            let scout = cfg.pick(*scout, "scout")?.unwrap_or(1);
            let width = cfg.pick(*width, "width")?;
            cmd_analyze(&p, scout, product, width, g.seed)
        }
        Command::Renewal { protocol: p, horizon, kmin, kmax, targets } => {
            let p = protocol(p)?;
            let pts = cfg.pick_list(targets, "target").iter().map(|t| parse_point(t, p.dim())).collect::<Result<Vec<_>, _>>()?;
            let opts = RenewalOpts {
                horizon: cfg.pick(*horizon, "horizon")?.unwrap_or(1000),
                kmin: cfg.pick(*kmin, "kmin")?.unwrap_or(1),
                kmax: cfg.pick(*kmax, "kmax")?.unwrap_or(20),
                traces: g.replicas.unwrap_or(200),
                cap: g.cap,
                seed: g.seed,
                targets: pts,
            };
            cmd_renewal(&p, &opts)
        }
        Command::Lemma { name, law, law2, s0, x, rho, mu, n, y, horizon, s1, s2, interval, grid, scan } => {
            let name =
                cfg.pick(name.clone(), "name")?.ok_or_else(|| usage("lemma needs a name: lemma6, lemma7, lemma17, lemma50 or prop22"))?;
            let law = parse_law(&cfg.pick(law.clone(), "law")?.unwrap_or_else(|| DEFAULT_LAW.into()))?;
            let law2 = match cfg.pick(law2.clone(), "law2")? {
                Some(l) => parse_law(&l)?,
                None => law.clone(),
            };
            let a = LemmaArgs {
                law,
                law2,
                s0: cfg.pick(*s0, "s0")?.unwrap_or(0.0),
                x: cfg.pick(*x, "x")?,
                rho: cfg.pick(*rho, "rho")?.unwrap_or(5.0),
                mu: cfg.pick(*mu, "mu")?.unwrap_or(0.2),
                n: cfg.pick(*n, "n")?.unwrap_or(100),
                y: cfg.pick(*y, "y")?.unwrap_or(20.0),
                horizon: cfg.pick(*horizon, "horizon")?.unwrap_or(1000),
                s1: cfg.pick(*s1, "s1")?.unwrap_or(-20.0),
                s2: cfg.pick(*s2, "s2")?.unwrap_or(20.0),
                interval: match cfg.pick(interval.clone(), "interval")? {
                    Some(s) => match parse_list::<f64>(&s, "interval")?.as_slice() {
                        [a, b] => (*a, *b),
                        _ => return Err(usage("--interval takes x,y")),
                    },
                    None => (-5.0, 5.0),
                },
                grid: cfg.pick(grid.clone(), "grid")?.map(|s| parse_list::<u64>(&s, "grid")).transpose()?,
                scan: cfg.pick(scan.clone(), "scan")?.map(|s| parse_list::<f64>(&s, "scan")).transpose()?,
                trials: g.replicas,
                cap: g.cap,
                seed: g.seed,
            };
            cmd_lemma(&name, &a)
        }
        Command::Oracle { law, law2, s0, event } => {
            let law = parse_law(&cfg.pick(law.clone(), "law")?.unwrap_or_else(|| DEFAULT_LAW.into()))?;
            let law2 = match cfg.pick(law2.clone(), "law2")? {
                Some(l) => parse_law(&l)?,
                None => law.clone(),
            };
            let s0 = cfg.pick(*s0, "s0")?.unwrap_or(0.0);
            let event = cfg.pick(event.clone(), "event")?.ok_or_else(|| usage("oracle needs --event"))?;
            cmd_oracle(law, law2, s0, &event, g.replicas.unwrap_or(100_000), g.seed)
        }
    }
}

fn cmd_validate(file: &std::path::Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| io_err(file, e))?;
    let (valid, messages) = match parse_draft(&text) {
        Ok(d) => {
            let r = validate(&d);
            (r.is_valid(), r.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>())
        }
        Err(ProtocolError::Invalid(r)) => (false, r.violations.iter().map(|v| v.to_string()).collect()),
        Err(e) => (false, vec![e.to_string()]),
    };
    let mut csv = String::from("violation\n");
    for m in &messages {
        csv.push_str(&format!("\"{}\"\n", m.replace('"', "\"\"")));
    }
    let json = to_json(&json!({ "file": file.display().to_string(), "valid": valid, "violations": messages }));
    Ok(Outcome {
        seed: None,
        files: vec![("validate.json".into(), json.clone())],
        json: Some(json),
        csv: Some(csv),
        code: if valid { EXIT_OK } else { EXIT_USAGE },
    })
}

fn cmd_simulate(p: &ScoutProtocol, horizon: u64, seed: u64) -> Result<Outcome, CliError> {
    let t = run(p, horizon, SeedSpec::new(seed, 0)).map_err(usage)?;
    let rows: Vec<Value> = (0..t.len())
        .map(|n| {
            let pos: Vec<Vec<i64>> = t.positions_at(n).iter().map(|x| x[..p.dim()].to_vec()).collect();
            let st: Vec<&str> = t.states_at(n).iter().map(|&q| p.state_name(q)).collect();
            json!({ "n": n, "positions": pos, "states": st })
        })
        .collect();
    let json = to_json(&json!({
        "protocol_hash": format!("{:016x}", t.protocol_hash),
        "seed": seed,
        "horizon": horizon,
        "trace": rows,
    }));
    let csv = t.to_csv(p);
    Ok(Outcome {
        seed: None,
        files: vec![("trace.csv".into(), csv.clone()), ("trace.json".into(), json.clone())],
        json: Some(json),
        csv: Some(csv),
        code: EXIT_OK,
    })
}

fn cmd_hitting(p: &ScoutProtocol, targets: &[Point], replicas: u64, given_cap: Option<u64>, seed: u64) -> Result<Outcome, CliError> {
    let cap = given_cap.unwrap_or(DEFAULT_CAP);
    if replicas == 0 {
        return Err(usage("--replicas must be positive"));
    }
    let sums = monte_carlo_hitting_many(p, targets, replicas, cap, seed);
    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut csv = String::from("target,u,survivors,total\n");
    for (i, s) in sums.iter().enumerate() {
        let div = divergence_flag(&s.curve).map_err(usage)?;
        let name = format!("hitting_{}.csv", i + 1);
        files.push((name.clone(), s.curve.to_csv()));
        let label = p.format_point(targets[i]);
        for (u, k) in s.curve.thresholds.iter().zip(&s.curve.survivors) {
            csv.push_str(&format!("\"{label}\",{u},{k},{}\n", s.curve.total));
        }
        entries.push(json!({ "summary": s, "divergence": div, "curve_file": name }));
    }
    let json = to_json(&json!({
        "seed": seed,
        "protocol_hash": format!("{:016x}", p.content_hash()),
        "replicas": replicas,
        "cap": cap,
        "cap_source": cap_source(given_cap),
        "targets": entries,
    }));
    files.push(("hitting.json".into(), json.clone()));
    Ok(Outcome { seed: None, json: Some(json), csv: Some(csv), files, code: EXIT_OK })
}

fn cmd_analyze(p: &ScoutProtocol, scout: usize, product: bool, width: Option<f64>, seed: u64) -> Result<Outcome, CliError> {
    let k = if product {
        joint_product_chain(p).map_err(usage)?
    } else {
        if scout == 0 {
            return Err(usage("--scout is 1-based"));
        }
        reduce_kernel(p, scout - 1).map_err(usage)?
    };
    let report = analyze_with_width(&k, width, SeedSpec::new(seed, 0)).map_err(usage)?;
    let mut csv = String::from("class,recurrent,states,drift,degenerate\n");
    for (i, c) in report.classes.iter().enumerate() {
        let (drift, deg) = match &c.analysis {
            Some(a) => (a.drift.join(" "), a.degeneracy.degenerate.to_string()),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!("{i},{},{},{drift},{deg}\n", c.recurrent, c.states.join(" ")));
    }
    let json = to_json(&json!({
        "seed": seed,
        "protocol_hash": format!("{:016x}", p.content_hash()),
        "kernel": if product { "product".to_string() } else { format!("scout {scout}") },
        "report": report,
    }));
    Ok(Outcome {
        seed: None,
        files: vec![("analyze.json".into(), json.clone()), ("analyze.csv".into(), csv.clone())],
        json: Some(json),
        csv: Some(csv),
        code: EXIT_OK,
    })
}

struct RenewalOpts {
    horizon: u64,
    kmin: usize,
    kmax: usize,
    traces: u64,
    cap: Option<u64>,
    seed: u64,
    targets: Vec<Point>,
}

fn cmd_renewal(p: &ScoutProtocol, o: &RenewalOpts) -> Result<Outcome, CliError> {
    if p.scouts() != 2 {
        return Err(usage(RenewalError::NotTwoScouts(p.scouts())));
    }
    if o.traces == 0 {
        return Err(usage("--replicas must be positive"));
    }
    let renewals: Vec<_> = (0..o.traces)
        .into_par_iter()
        .map(|r| {
            let t = run(p, o.horizon, SeedSpec::new(o.seed, r)).map_err(|e| e.to_string())?;
            extract_renewal(&t).map_err(|e| e.to_string())
        })
        .collect();
    let mut ok = Vec::new();
    let mut violations = Vec::new();
    for r in renewals {
        match r {
            Ok(m) => ok.push(m),
            Err(e) => violations.push(e),
        }
    }
    let meetings: usize = ok.iter().map(|m| m.len() - 1).sum();
    let homogeneity = homogeneity_test(&ok, None, 0.01);
    let trap = ok.first().map(|m| trap_detect(&m.entries.iter().map(|e| e.y).collect::<Vec<_>>(), None, DEFAULT_MIN_DWELL));
    let covers: Vec<Value> = o
        .targets
        .iter()
        .map(|&x| {
            let ks: Vec<_> = ok.iter().map(|m| explorer_cover_time(m, x)).collect();
            let hit: Vec<f64> = ks.iter().filter_map(|k| k.time()).map(|k| k as f64).collect();
            json!({ "target": x[..p.dim()].to_vec(), "censored": ks.len() - hit.len(), "mean_index": MeanEstimate::from_samples(&hit) })
        })
        .collect();
    let tail = meeting_tail(p, o.kmin..=o.kmax, o.traces, o.cap.unwrap_or(DEFAULT_CAP), o.seed);
    let (tail_json, tail_verdict, tail_csv) = match &tail {
        Ok(t) => (serde_json::to_value(t).expect("json"), t.verdict, Some(t.curve.to_csv())),
        Err(RenewalError::NoMeetings(c)) => (json!({ "no_meetings": true, "cap": c }), Verdict::Fail, None),
        Err(e) => return Err(usage(e)),
    };
    let json = to_json(&json!({
        "seed": o.seed,
        "protocol_hash": format!("{:016x}", p.content_hash()),
        "horizon": o.horizon,
        "traces": o.traces,
        "meetings": meetings,
        "gap_bound_violations": violations,
        "meeting_tail": tail_json,
        "cap_source": cap_source(o.cap),
        "homogeneity": homogeneity,
        "trap": trap,
        "explorer_cover": covers,
    }));
    let csv = ok.first().map(|m| m.to_csv(p)).unwrap_or_default();
    let mut files = vec![("renewal.json".into(), json.clone()), ("renewal.csv".into(), csv.clone())];
    if let Some(c) = tail_csv {
        files.push(("meeting_tail.csv".into(), c));
    }
    let pass = violations.is_empty() && tail_verdict.is_pass();
    Ok(Outcome { seed: None, json: Some(json), csv: Some(csv), files, code: if pass { EXIT_OK } else { EXIT_FAIL } })
}

struct LemmaArgs {
    law: StepLaw,
    law2: StepLaw,
    s0: f64,
    x: Option<f64>,
    rho: f64,
    mu: f64,
    n: u64,
    y: f64,
    horizon: u64,
    s1: f64,
    s2: f64,
    interval: (f64, f64),
    grid: Option<Vec<u64>>,
    scan: Option<Vec<f64>>,
    trials: Option<u64>,
    cap: Option<u64>,
    seed: u64,
}

fn cmd_lemma(name: &str, a: &LemmaArgs) -> Result<Outcome, CliError> {
    let w = LookAroundWalk::new(a.law.clone(), a.s0);
    let trials = |d: u64| a.trials.unwrap_or(d);
    let result: CheckResult = match name {
        "lemma6" => check_lemma6(&w, a.x.unwrap_or(a.s0 - 20.0), trials(10_000), a.horizon, a.seed),
        "lemma7" => {
            if let Some(xs) = &a.scan {
                let (first, results) = scan_lemma7(&w, xs, trials(10_000), a.seed).map_err(usage)?;
                let json = to_json(&json!({ "lemma": "lemma7", "seed": a.seed, "smallest_passing_x": first, "results": results }));
                return Ok(Outcome {
                    seed: None,
                    files: vec![("lemma_lemma7_scan.json".into(), json.clone())],
                    json: Some(json),
                    csv: None,
                    code: if first.is_some() { EXIT_OK } else { EXIT_FAIL },
                });
            }
            check_lemma7(&w, a.x.unwrap_or(a.s0 + 10.0), a.grid.clone(), trials(10_000), a.seed)
        }
        "lemma17" => check_lemma17(&w, a.rho, trials(10_000), a.cap.unwrap_or(DEFAULT_CAP), a.seed),
        "lemma50" => check_lemma50(&w, a.mu, a.n, a.y, trials(100_000), a.seed),
        "prop22" => check_prop22([&a.law, &a.law2], [a.s1, a.s2], a.interval, trials(20_000), a.cap.unwrap_or(1 << 16), a.seed),
        other => return Err(usage(format!("unknown check `{other}` (expected lemma6, lemma7, lemma17, lemma50 or prop22)"))),
    }
    .map_err(usage)?;
    let mut result = result;
    if matches!(name, "lemma17" | "prop22") {
        result.parameters.insert("cap_source".into(), cap_source(a.cap).into());
    }
    let json = to_json(&result);
    let csv = result.survival_csv();
    Ok(Outcome {
        seed: None,
        files: vec![(format!("lemma_{name}.json"), json.clone()), (format!("lemma_{name}.csv"), csv.clone())],
        json: Some(json),
        csv: Some(csv),
        code: if result.verdict.is_pass() { EXIT_OK } else { EXIT_FAIL },
    })
}

/// `hit:KIND:VALUE:N`, `pos:N:Y` or `meet:START2:N`.
fn parse_event(s: &str, law2: StepLaw) -> Result<Event, CliError> {
    let bad = || usage(format!("event `{s}`: expected hit:KIND:VALUE:N, pos:N:Y or meet:START2:N"));
    let f: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let int = |t: &str| t.parse::<u64>().map_err(|_| bad());
    match f.as_slice() {
        ["hit", kind, v, n] => {
            let v = num(v)?;
            let target = match *kind {
                "visit" => Target::Visit(v),
                "look" => Target::LookAround(v),
                "reach" => Target::Reach(v),
                "band" => Target::ExitBand(v),
                "above" => Target::Above(v),
                "below" => Target::Below(v),
                _ => return Err(bad()),
            };
            Ok(Event::NotHitBy { target, n: int(n)? })
        }
        ["pos", n, y] => Ok(Event::PositionAt { n: int(n)?, y: num(y)? }),
        ["meet", s2, n] => Ok(Event::NoMeetingBy { other: law2, other_start: num(s2)?, n: int(n)? }),
        _ => Err(bad()),
    }
}

fn cmd_oracle(law: StepLaw, law2: StepLaw, s0: f64, event: &str, trials: u64, seed: u64) -> Result<Outcome, CliError> {
    let ev = parse_event(event, law2)?;
    let w = LookAroundWalk::new(law, s0);
    let exact = exact_dp_oracle(&w, &ev).map_err(usage)?;
    let value = crate::scalar::rational_to_f64(&exact);
    let mut out = json!({
        "law": w.law.to_string(),
        "s0": s0,
        "event": event,
        "seed": seed,
        "probability": crate::scalar::format_rational(&exact),
        "value": value,
    });
    let mut code = EXIT_OK;
    if trials > 0 {
        let est = estimate_event(&w, &ev, trials, seed);
        let sigma = crate::stats::binomial_sigma(value, trials);
        let dist = if sigma > 0.0 {
            (est.frequency - value).abs() / sigma
        } else if est.frequency == value {
            0.0
        } else {
            f64::INFINITY
        };
        let agrees = dist <= 4.0;
        out["monte_carlo"] =
            json!({ "estimate": est, "sigma_distance": if dist.is_finite() { json!(dist) } else { json!(null) }, "agrees": agrees });
        if !agrees {
            code = EXIT_FAIL;
        }
    }
    let json = to_json(&out);
    Ok(Outcome { seed: None, files: vec![("oracle.json".into(), json.clone())], json: Some(json), csv: None, code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_and_points() {
        assert_eq!(parse_point("-2,1", 2).unwrap(), [-2, 1]);
        assert_eq!(parse_point("(3)", 1).unwrap(), [3, 0]);
        assert!(parse_point("1", 2).is_err());
        assert!(matches!(parse_event("hit:visit:1:3", StepLaw::srw()).unwrap(), Event::NotHitBy { n: 3, .. }));
        assert!(parse_event("hit:nope:1:3", StepLaw::srw()).is_err());
        assert!(load_protocol("builtin:srw,d=2").is_ok());
        assert!(matches!(load_protocol("/nonexistent/file.scout"), Err(CliError::Io(_))));
    }
}
