use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use qsic_core::reachability::{
    count_off_semicircles, read_distribution_csv, record, write_distribution_csv,
};
use qsic_core::simulator::{
    fair_coin_trace, max_context_occurrences, read_trace_csv, uniform_inputs, write_trace_csv,
};
use qsic_core::transducer::{export_dot, transducer_to_json};
use qsic_core::{
    build_transducer, compare_statistics, entropy_of, load_set, noncontextual_baseline,
    past_sufficiency, run_classical, sample_quantum, sets, stationary_distribution,
    verify_distinguishability, verify_unifilar, BigRational, Engine, Error, ExactDistribution,
    FloatDistribution, Limits, QsicSet, Result, Scalar, Transducer,
};
use serde_json::json;

use crate::output::{self, create, create_at, file_name, header, probability, sig6};
use crate::{Global, SampleSource, SetArgs};

const DISTRIBUTION_CAP: u64 = 50_000_000;
const TRANSDUCER_CAP: u64 = 1_000_000;
const YU_OH_FINGERPRINT: [(usize, usize); 4] = [(1, 25), (3, 265), (5, 3649), (7, 50293)];

fn load(args: &SetArgs) -> Result<(QsicSet, ExactDistribution)> {
    let set = match sets::builtin(&args.set) {
        Some(s) => s,
        None => load_set(&args.set)?,
    };
    let init = if args.init == "canonical" {
        ExactDistribution::uniform(set.canonical_ensemble()?)?
    } else {
        let (_, d) = read_distribution_csv(BufReader::new(File::open(&args.init)?))?;
        if d.dim() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                found: d.dim(),
            });
        }
        d
    };
    Ok((set, init))
}

fn limits(args: &SetArgs, default: u64) -> Limits {
    let cap = args.cap.unwrap_or(default);
    Limits {
        max_support: usize::try_from(cap).unwrap_or(usize::MAX),
        ..Limits::default()
    }
}

fn to_float(d: &ExactDistribution) -> FloatDistribution {
    d.map_probabilities(Scalar::to_f64)
}

fn run_meta(
    args: &SetArgs,
    set: &QsicSet,
    steps: usize,
    float: bool,
) -> Vec<(&'static str, String)> {
    vec![
        ("set", set.name().to_owned()),
        ("init", args.init.clone()),
        ("steps", steps.to_string()),
        ("arithmetic", if float { "f64" } else { "exact" }.to_owned()),
    ]
}

pub fn counts(g: &Global, args: &SetArgs, steps: usize, float: bool) -> Result<bool> {
    let (set, init) = load(args)?;
    let engine = Engine::new(&set).with_limits(limits(args, DISTRIBUTION_CAP));
    let counts = if float {
        engine.reachable_counts(&to_float(&init), steps)?
    } else {
        engine.reachable_counts(&init, steps)?
    };
    let (path, mut out) = create(g, &format!("counts_{}.csv", file_name(set.name())))?;
    header(
        &mut out,
        g,
        output::COUNTS_SCHEMA,
        &run_meta(args, &set, steps, float),
    )?;
    writeln!(out, "step,reachable_count")?;
    for (step, c) in counts.iter().enumerate() {
        writeln!(out, "{step},{c}")?;
        println!("step {step:>3}  {c}");
    }
    out.flush()?;
    if set.equivalent(&sets::yu_oh()) && steps >= 7 {
        let seen: Vec<String> = YU_OH_FINGERPRINT
            .iter()
            .map(|&(s, _)| counts[s].to_string())
            .collect();
        let expected = YU_OH_FINGERPRINT.iter().all(|&(s, c)| counts[s] == c);
        println!(
            "fingerprint (steps 1, 3, 5, 7): {}{}",
            seen.join(", "),
            if expected {
                ""
            } else {
                "  (differs from 25, 265, 3649, 50293)"
            }
        );
    }
    println!("wrote {}", path.display());
    Ok(true)
}

pub fn entropy(
    g: &Global,
    args: &SetArgs,
    steps: usize,
    float: bool,
    export_dist: bool,
) -> Result<bool> {
    if float && export_dist {
        return Err(Error::Validation(
            "--export-dist needs exact arithmetic".into(),
        ));
    }
    let (set, init) = load(args)?;
    let engine = Engine::new(&set).with_limits(limits(args, DISTRIBUTION_CAP));
    let mut rows = Vec::new();
    let mut observe = |step: usize, rec: qsic_core::CurveRecord, max_p: String| {
        eprintln!(
            "step {step:>3}  {:>10} states  {} bits",
            rec.reachable_count,
            sig6(rec.entropy_bits)
        );
        rows.push((rec, max_p));
    };
    let last = if float {
        engine.run(&to_float(&init), steps, |s, d| {
            let max_p = d.max_probability().map_or(String::new(), |p| sig6(*p));
            observe(s, record(s, d), max_p)
        })?;
        None
    } else {
        Some(engine.run(&init, steps, |s, d| {
            let max_p = d
                .max_probability()
                .map_or(String::new(), |p| probability(p, g.exact));
            observe(s, record(s, d), max_p)
        })?)
    };
    let baseline = noncontextual_baseline(&set);
    let (path, mut out) = create(g, &format!("entropy_{}.csv", file_name(set.name())))?;
    header(
        &mut out,
        g,
        output::ENTROPY_SCHEMA,
        &run_meta(args, &set, steps, float),
    )?;
    writeln!(
        out,
        "step,reachable_count,entropy_bits,max_probability,digest"
    )?;
    for (rec, max_p) in &rows {
        writeln!(
            out,
            "{},{},{},{max_p},{}",
            rec.step,
            rec.reachable_count,
            sig6(rec.entropy_bits),
            rec.digest
        )?;
    }
    writeln!(out, "# noncontextual_baseline_bits: {}", sig6(baseline))?;
    out.flush()?;
    for (rec, _) in &rows {
        println!(
            "step {:>3}  {:>10} states  {} bits",
            rec.step,
            rec.reachable_count,
            sig6(rec.entropy_bits)
        );
    }
    if let Some((rec, _)) = rows.last() {
        println!(
            "final entropy: {} bits (unrounded {:.9})",
            sig6(rec.entropy_bits),
            rec.entropy_bits
        );
    }
    println!("noncontextual baseline log2 d = {} bits", sig6(baseline));
    println!("wrote {}", path.display());
    if let Some(d) = last.filter(|_| export_dist) {
        let (path, out) = create(
            g,
            &format!("distribution_{}_step{steps}.csv", file_name(set.name())),
        )?;
        write_distribution_csv(out, steps, &d)?;
        println!("wrote {}", path.display());
    }
    Ok(true)
}

struct Check {
    name: &'static str,
    /// `None` when the check does not apply.
    pass: Option<bool>,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            pass: Some(pass),
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        Check {
            name,
            pass: None,
            detail: detail.into(),
        }
    }
}

fn print_table(checks: &[Check]) -> bool {
    for c in checks {
        let status = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        println!("{:<22} {status}  {}", c.name, c.detail);
    }
    checks.iter().all(|c| c.pass != Some(false))
}

fn structural_checks(t: &Transducer, pair_cap: u64) -> Result<Vec<Check>> {
    let unifilar = verify_unifilar(t);
    let stochastic = t.is_stochastic();
    let report = verify_distinguishability(t.states(), t.set(), pair_cap)?;
    let failures = report.failures.len();
    let mut detail = format!("{} pairs, {failures} failures", report.pairs_checked);
    if let Some((a, b)) = report.failures.first() {
        detail.push_str(&format!("; first: [{a}] ~ [{b}]"));
    }
    Ok(vec![
        Check::new(
            "unifilarity",
            unifilar,
            format!("{} states, {} edges", t.len(), t.edge_count()),
        ),
        Check::new(
            "stochastic rows",
            stochastic,
            "every (state, input) row sums to 1",
        ),
        Check::new("distinguishability", report.passed(), detail),
    ])
}

fn stationary_check(t: &Transducer, exact: bool) -> (Check, Option<f64>) {
    if t.is_truncated() {
        return (Check::skipped("stationary", "machine is truncated"), None);
    }
    match stationary_distribution(t) {
        Ok(pi) => {
            let weights: Vec<(usize, BigRational)> = t
                .states()
                .iter()
                .enumerate()
                .filter_map(|(k, s)| pi.probability(s).map(|p| (k, p.clone())))
                .collect();
            let fixed = t.step_weights(&weights) == weights;
            let h = entropy_of(&pi);
            let max = pi
                .max_probability()
                .map_or(String::new(), |p| probability(p, exact));
            (
                Check::new(
                    "stationary",
                    fixed,
                    format!(
                        "{} states, max probability {max}, entropy {} bits",
                        pi.len(),
                        sig6(h)
                    ),
                ),
                Some(h),
            )
        }
        Err(Error::NonUniqueStationary { classes }) => (
            Check::skipped(
                "stationary",
                format!("not unique: {} closed classes", classes.len()),
            ),
            None,
        ),
        Err(e) => (Check::new("stationary", false, e.to_string()), None),
    }
}

pub fn transducer(
    g: &Global,
    args: &SetArgs,
    depth: Option<usize>,
    pair_cap: u64,
    dot_states: Option<usize>,
) -> Result<bool> {
    let (set, init) = load(args)?;
    let t = build_transducer(&set, &init, depth, limits(args, TRANSDUCER_CAP))?;
    let mut checks = structural_checks(&t, pair_cap)?;
    let (stationary, _) = stationary_check(&t, g.exact);
    checks.push(stationary);
    let name = file_name(set.name());
    let (path, mut out) = create(g, &format!("transducer_{name}.json"))?;
    writeln!(out, "{}", transducer_to_json(&t))?;
    out.flush()?;
    println!(
        "{}: {} causal states, {} edges, {}",
        set.name(),
        t.len(),
        t.edge_count(),
        match depth {
            Some(d) if t.is_truncated() => format!("truncated at depth {d}"),
            _ => "closed".to_owned(),
        }
    );
    let pass = print_table(&checks);
    println!("wrote {}", path.display());
    if let Some(n) = dot_states {
        let (path, mut out) = create(g, &format!("transducer_{name}.dot"))?;
        out.write_all(export_dot(&t, n).as_bytes())?;
        out.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(pass)
}

pub fn sample(
    g: &Global,
    args: &SetArgs,
    len: usize,
    seed: u64,
    source: SampleSource,
    depth: Option<usize>,
    out: Option<PathBuf>,
) -> Result<bool> {
    let (set, init) = load(args)?;
    let (trace, tag) = match source {
        SampleSource::Quantum => (sample_quantum(&set, &init, len, seed)?, "quantum"),
        SampleSource::Classical => {
            let t = build_transducer(&set, &init, depth, limits(args, TRANSDUCER_CAP))?;
            let inputs = uniform_inputs(&set, len, seed);
            (
                run_classical(&t, &inputs, seed.wrapping_add(1))?,
                "classical",
            )
        }
        SampleSource::Coin => {
            let inputs = uniform_inputs(&set, len, seed);
            (
                fair_coin_trace(&set, &inputs, seed.wrapping_add(1))?,
                "coin",
            )
        }
    };
    let path = out.unwrap_or_else(|| {
        g.out_dir
            .join(format!("trace_{}_{tag}_{seed}.csv", file_name(set.name())))
    });
    let mut file = create_at(&path)?;
    write_trace_csv(&mut file, &trace)?;
    file.flush()?;
    println!("{} steps from the {tag} model, seed {seed}", trace.len());
    println!("wrote {}", path.display());
    Ok(true)
}

fn read_trace(path: &Path) -> Result<qsic_core::Trace> {
    read_trace_csv(BufReader::new(File::open(path)?)).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn compare(
    a: &Path,
    b: &Path,
    window: usize,
    n_min: u64,
    threshold: f64,
    out: Option<PathBuf>,
) -> Result<bool> {
    let (ta, tb) = (read_trace(a)?, read_trace(b)?);
    let report = match compare_statistics(&ta, &tb, window, n_min, threshold) {
        Ok(r) => r,
        Err(e @ Error::InsufficientData { .. }) => {
            eprintln!(
                "qsic: most frequent window-{window} context occurs {} and {} times",
                max_context_occurrences(&ta, window),
                max_context_occurrences(&tb, window)
            );
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    let side = |t: &qsic_core::Trace, p: &Path| json!({ "path": p.display().to_string(), "source": t.source.to_string(), "seed": t.seed, "steps": t.len() });
    let doc = json!({
        "format": "qsic-equivalence-report",
        "version": 1,
        "set": ta.set,
        "a": side(&ta, a),
        "b": side(&tb, b),
        "window_length": report.window_length,
        "n_min": report.n_min,
        "contexts_compared": report.contexts_compared,
        "max_total_variation": report.max_total_variation,
        "worst_context": report.worst_context,
        "threshold": report.threshold,
        "pass": report.pass,
    });
    let text = serde_json::to_string_pretty(&doc).expect("report serializes");
    println!("{text}");
    if let Some(path) = out {
        let mut f = create_at(&path)?;
        writeln!(f, "{text}")?;
        f.flush()?;
    }
    Ok(report.pass)
}

pub fn verify(
    g: &Global,
    args: &SetArgs,
    depth: Option<usize>,
    past_length: usize,
    pair_cap: u64,
    node_cap: usize,
) -> Result<bool> {
    let (set, init) = load(args)?;
    let t = build_transducer(&set, &init, depth, limits(args, TRANSDUCER_CAP))?;
    let horizon = depth.unwrap_or_else(|| t.shells().iter().copied().max().unwrap_or(0));

    let mut union: Vec<_> = Vec::new();
    let mut off_semicircle = Vec::new();
    Engine::new(&set)
        .with_limits(limits(args, DISTRIBUTION_CAP))
        .run(&init, horizon, |step, d| {
            union.extend(d.support().cloned());
            if step >= 1 {
                off_semicircle.push((step, d.len(), count_off_semicircles(d, &set)));
            }
        })?;
    union.sort();
    union.dedup();
    let mut states = t.states().to_vec();
    states.sort();
    let closure_detail = match depth {
        Some(d) if t.is_truncated() => {
            format!("{} states reachable within {d} steps", states.len())
        }
        _ => format!("closed on {} states", states.len()),
    };

    let mut checks = vec![Check::new("closure", states == union, closure_detail)];
    if set.is_rank_one() {
        let shown = off_semicircle.len().min(7);
        let bad: usize = off_semicircle[..shown].iter().map(|(_, _, off)| off).sum();
        let total: usize = off_semicircle[..shown].iter().map(|(_, n, _)| n).sum();
        checks.push(Check::new(
            "semicircle",
            bad == 0,
            format!("steps 1..{shown}: {bad} of {total} states off every great circle"),
        ));
    } else {
        checks.push(Check::skipped("semicircle", "set has no projector rays"));
    }
    checks.extend(structural_checks(&t, pair_cap)?);

    let ins = past_sufficiency(&set, &init, past_length, node_cap)?;
    let monotone = ins.windows(2).all(|w| w[1] <= w[0]);
    let values: Vec<String> = ins.iter().map(|p| probability(p, g.exact)).collect();
    checks.push(Check::new(
        "past sufficiency",
        monotone,
        format!("lengths 0..{past_length}: {}", values.join(", ")),
    ));
    checks.push(stationary_check(&t, g.exact).0);
    println!(
        "{}: verifying {}",
        set.name(),
        depth.map_or("to closure".to_owned(), |d| format!("to depth {d}"))
    );
    Ok(print_table(&checks))
}
