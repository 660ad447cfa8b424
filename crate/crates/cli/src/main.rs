//! Batch command-line interface over the evprob engines: load knowledge
//! files, evaluate probabilities and acceptance, diff updates, enumerate
//! default-logic extensions, print operator-rule traces, and run the
//! built-in scenarios with manifest checking.
//!
//! Exit codes: 0 ok, 2 parse error, 4 manifest failure, 3 any other
//! evaluation error. Probability endpoints are rendered to 6 decimal
//! places in both output formats so documents are byte-stable across runs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use evprob::acceptance::{
    accepted_set, corpus_report, update_diff, AcceptanceLevel, Universe,
};
use evprob::ep::evidential_probability;
use evprob::evidence::{EvidenceBase, EvidenceItem};
use evprob::logic::parser::{parse_formula, parse_program};
use evprob::logic::solver::DEFAULT_ATOM_BUDGET;
use evprob::logic::{Formula, Signature};
use evprob::rivals::{compute_extensions, mh_derive, DefaultTheory, MhStep};
use evprob::scenarios::{
    build_scenario_with, check_manifest, expected_utility_comparison, ScenarioName,
    ScenarioTuning,
};
use evprob::Error;

#[derive(Parser)]
#[command(name = "evprob", version, about = "Evidential probability and rival non-monotonic engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the evidential probability and acceptance of one sentence.
    Query {
        /// Knowledge file in the shared text grammar.
        file: PathBuf,
        /// Ground sentence to evaluate.
        query: String,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        atom_budget: Option<usize>,
    },
    /// Compute the accepted corpus over a universe file and report its
    /// structure.
    Corpus {
        file: PathBuf,
        /// Universe file: one ground sentence per line.
        #[arg(long)]
        universe: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        atom_budget: Option<usize>,
    },
    /// Diff the corpus before and after asserting a sentence.
    Diff {
        file: PathBuf,
        /// Ground sentence to assert.
        #[arg(long = "assert")]
        assertion: String,
        #[arg(long)]
        universe: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        atom_budget: Option<usize>,
    },
    /// Enumerate the extensions of the default theory in a knowledge file.
    Extensions {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        atom_budget: Option<usize>,
    },
    /// Derive the lottery-paradox goals with the operator rules and print
    /// the trace.
    MhTrace {
        /// Number of lottery tickets (at most 6).
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Enable rule 6 and pursue the plain contradiction instead.
        #[arg(long)]
        rule6: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build a named scenario, run every engine its manifest refers to,
    /// and check each expected outcome.
    Scenario {
        /// One of: tweety, nixon, cohabitation, lottery, measurement.
        name: String,
        /// Ticket or measurement count.
        #[arg(long)]
        n: Option<usize>,
        /// Measurement tolerance in units.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Per-measurement error probability.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the acceptance-based and probabilistic decision policies.
    EuCompare {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        gain: f64,
        #[arg(long)]
        loss: f64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn num(x: f64) -> Value {
    Value::String(format!("{x:.6}"))
}

fn interval_value(iv: &evprob::ProbabilityInterval) -> Value {
    json!({ "lower": num(iv.lower), "upper": num(iv.upper) })
}

fn document(command: &str, payload: Value) -> Value {
    json!({ "command": command, "version": VERSION, "payload": payload, "status": "ok" })
}

fn emit(doc: &Value, command: &str, format: Format, text: String) {
    match format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(doc).unwrap()),
        Format::Text => {
            println!("command: {command}");
            println!("version: {VERSION}");
            print!("{text}");
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. }
        | Error::UndeclaredConstant(_)
        | Error::UndeclaredPredicate(_)
        | Error::ArityMismatch { .. }
        | Error::BadInterval { .. }
        | Error::BadEpsilon(_)
        | Error::InvalidScenario(_)
        | Error::UnknownName(_) => 2,
        _ => 3,
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code_for(&e), message: e.to_string() }
    }
}

fn io_failure(path: &PathBuf, e: std::io::Error) -> Failure {
    Failure { code: 2, message: format!("cannot read {}: {e}", path.display()) }
}

fn load_base(file: &PathBuf, atom_budget: Option<usize>) -> Result<EvidenceBase, Failure> {
    let text = fs::read_to_string(file).map_err(|e| io_failure(file, e))?;
    let prog = parse_program(&text)?;
    Ok(EvidenceBase::from_program(
        &prog,
        atom_budget.unwrap_or(DEFAULT_ATOM_BUDGET),
    )?)
}

fn parse_query(base: &EvidenceBase, text: &str) -> Result<Formula, Failure> {
    let mut sig = (**base.signature()).clone();
    Ok(parse_formula(text, &mut sig)?)
}

fn load_universe(base: &EvidenceBase, path: &PathBuf) -> Result<Universe, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut sentences = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        sentences.push(parse_query(base, line)?);
    }
    Ok(Universe::new(path.display().to_string(), sentences))
}

fn render_mh_step(sig: &Signature, i: usize, step: &MhStep) -> String {
    let premises = if step.premises.is_empty() {
        String::new()
    } else {
        format!(
            " <- {}",
            step.premises
                .iter()
                .map(|p| format!("[{p}]"))
                .collect::<Vec<_>>()
                .join(", ")
        )
    };
    let rule = if step.rule == 0 { "given".to_string() } else { format!("rule {}", step.rule) };
    format!("[{i}] {rule}: {}{premises}", step.sentence.display(sig))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Query { file, query, epsilon, format, atom_budget } => {
            let level = AcceptanceLevel::new(epsilon)?;
            let base = load_base(&file, atom_budget)?;
            let phi = parse_query(&base, &query)?;
            let (iv, trace) = evidential_probability(&base, &phi)?;
            let accepted = iv.lower >= level.threshold();
            let trace_lines: Vec<String> =
                trace.to_string().lines().map(str::to_string).collect();
            let doc = document(
                "query",
                json!({
                    "query": phi.display(base.signature()),
                    "epsilon": num(epsilon),
                    "interval": interval_value(&iv),
                    "accepted": accepted,
                    "trace": trace_lines,
                }),
            );
            let mut text = String::new();
            text += &format!("query: {}\n", phi.display(base.signature()));
            text += &format!("epsilon: {epsilon:.6}\n");
            text += &format!("interval: {iv}\n");
            text += &format!("accepted: {accepted}\n");
            text += "trace:\n";
            for l in &trace_lines {
                text += &format!("  {l}\n");
            }
            emit(&doc, "query", format, text);
            Ok(0)
        }
        Command::Corpus { file, universe, epsilon, format, atom_budget } => {
            let level = AcceptanceLevel::new(epsilon)?;
            let base = load_base(&file, atom_budget)?;
            let universe = load_universe(&base, &universe)?;
            let corpus = accepted_set(&base, level, &universe)?;
            let report = corpus_report(&base, level, &universe)?;
            let sig = base.signature();
            let entries: Vec<Value> = corpus
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "sentence": e.sentence.display(sig),
                        "interval": interval_value(&e.interval),
                    })
                })
                .collect();
            let core_sizes: Vec<usize> = report.cores.iter().map(|c| c.len()).collect();
            let doc = document(
                "corpus",
                json!({
                    "epsilon": num(epsilon),
                    "universe_size": universe.len(),
                    "count": corpus.entries.len(),
                    "entries": entries,
                    "jointly_consistent": report.jointly_consistent,
                    "core_sizes": core_sizes,
                    "single_premise_violations": report.single_premise_violations.len(),
                    "conjunction_closure_violations": report.conjunction_closure_violations.len(),
                }),
            );
            let mut text = String::new();
            text += &format!("epsilon: {epsilon:.6}\n");
            text += &format!("universe: {} sentences\n", universe.len());
            text += &format!("accepted: {} sentences\n", corpus.entries.len());
            for e in &corpus.entries {
                text += &format!("  {} {}\n", e.interval, e.sentence.display(sig));
            }
            text += &format!("jointly consistent: {}\n", report.jointly_consistent);
            if !core_sizes.is_empty() {
                let sizes: Vec<String> = core_sizes.iter().map(usize::to_string).collect();
                text += &format!("minimal core sizes: {}\n", sizes.join(", "));
            }
            text += &format!(
                "single-premise closure violations: {}\n",
                report.single_premise_violations.len()
            );
            text += &format!(
                "conjunction closure violations: {}\n",
                report.conjunction_closure_violations.len()
            );
            emit(&doc, "corpus", format, text);
            Ok(0)
        }
        Command::Diff { file, assertion, universe, epsilon, format, atom_budget } => {
            let level = AcceptanceLevel::new(epsilon)?;
            let base = load_base(&file, atom_budget)?;
            let universe = load_universe(&base, &universe)?;
            let phi = parse_query(&base, &assertion)?;
            let diff = update_diff(&base, EvidenceItem::Sentence(phi.clone()), level, &universe)?;
            let sig = base.signature();
            let render = |fs: &[Formula]| -> Vec<String> {
                fs.iter().map(|f| f.display(sig)).collect()
            };
            let added = render(&diff.added);
            let retracted = render(&diff.retracted);
            let changed = render(&diff.interval_changed);
            let doc = document(
                "diff",
                json!({
                    "assert": phi.display(sig),
                    "epsilon": num(epsilon),
                    "added": added,
                    "retracted": retracted,
                    "unchanged": diff.unchanged,
                    "interval_changed": changed,
                }),
            );
            let mut text = String::new();
            text += &format!("assert: {}\n", phi.display(sig));
            text += &format!("epsilon: {epsilon:.6}\n");
            text += &format!("added: {}\n", if added.is_empty() { "(none)".into() } else { added.join(", ") });
            text += &format!(
                "retracted: {}\n",
                if retracted.is_empty() { "(none)".into() } else { retracted.join(", ") }
            );
            text += &format!("unchanged: {}\n", diff.unchanged);
            text += &format!(
                "interval changed: {}\n",
                if changed.is_empty() { "(none)".into() } else { changed.join(", ") }
            );
            emit(&doc, "diff", format, text);
            Ok(0)
        }
        Command::Extensions { file, format, atom_budget } => {
            let text_src = fs::read_to_string(&file).map_err(|e| io_failure(&file, e))?;
            let prog = parse_program(&text_src)?;
            let theory = DefaultTheory {
                background: prog.theory.clone(),
                defaults: prog.defaults.clone(),
            };
            let budget = atom_budget.unwrap_or(DEFAULT_ATOM_BUDGET);
            let extensions = compute_extensions(&theory, budget)?;
            let sig = &prog.signature;
            let rendered: Vec<Vec<String>> = extensions
                .iter()
                .map(|e| e.consequents.iter().map(|c| c.display(sig)).collect())
                .collect();
            let doc = document(
                "extensions",
                json!({ "count": extensions.len(), "extensions": rendered }),
            );
            let mut text = String::new();
            text += &format!("defaults: {}\n", theory.defaults.len());
            text += &format!("count: {}\n", extensions.len());
            for (i, e) in rendered.iter().enumerate() {
                let body = if e.is_empty() { "(background only)".into() } else { e.join(", ") };
                text += &format!("extension {i}: {body}\n");
            }
            emit(&doc, "extensions", format, text);
            Ok(0)
        }
        Command::MhTrace { n, rule6, format } => {
            let scenario = build_scenario_with(
                ScenarioName::Lottery { n },
                ScenarioTuning::default(),
            )?;
            let setup = scenario.mh.as_ref().ok_or(Error::InvalidScenario(format!(
                "no operator-rule setup for lottery({n}); use n of at most 6"
            )))?;
            let mut rules = setup.rules.clone();
            let goals = if rule6 {
                rules.insert(6);
                vec![setup.contradiction_goal.clone().unwrap()]
            } else {
                setup.goals.clone()
            };
            let budget = scenario.stages[0].base.atom_budget();
            let trace = mh_derive(&setup.sigma0, &rules, &goals, setup.step_bound, budget)?;
            let sig = scenario.signature();
            let steps: Vec<String> = trace
                .steps
                .iter()
                .enumerate()
                .map(|(i, s)| render_mh_step(sig, i, s))
                .collect();
            let goal_values: Vec<Value> = trace
                .goals
                .iter()
                .map(|(g, at)| json!({ "goal": g.display(sig), "derived_at": at }))
                .collect();
            let doc = document(
                "mh-trace",
                json!({
                    "n": n,
                    "rules": rules.iter().map(|r| *r as u64).collect::<Vec<_>>(),
                    "steps": steps,
                    "goals": goal_values,
                    "inconsistency_detected": trace.inconsistency_detected,
                    "bound_exhausted": trace.bound_exhausted,
                }),
            );
            let mut text = String::new();
            let rule_list: Vec<String> = rules.iter().map(u8::to_string).collect();
            text += &format!("lottery tickets: {n}\n");
            text += &format!("rules enabled: {}\n", rule_list.join(", "));
            for s in &steps {
                text += &format!("  {s}\n");
            }
            for (g, at) in &trace.goals {
                match at {
                    Some(i) => text += &format!("goal {}: derived at [{i}]\n", g.display(sig)),
                    None => text += &format!("goal {}: not derived\n", g.display(sig)),
                }
            }
            text += &format!("inconsistency detected: {}\n", trace.inconsistency_detected);
            emit(&doc, "mh-trace", format, text);
            Ok(0)
        }
        Command::Scenario { name, n, tolerance, p, epsilon, format } => {
            let scenario_name = match name.as_str() {
                "tweety" => ScenarioName::Tweety,
                "nixon" => ScenarioName::Nixon,
                "cohabitation" => ScenarioName::Cohabitation,
                "lottery" => ScenarioName::Lottery { n: n.unwrap_or(4) },
                "measurement" => ScenarioName::Measurement {
                    n: n.unwrap_or(10_000),
                    tolerance: tolerance.unwrap_or(0.05),
                    error_prob: p.unwrap_or(0.001),
                },
                other => {
                    return Err(Error::InvalidScenario(format!("unknown scenario `{other}`"))
                        .into())
                }
            };
            let tuning = ScenarioTuning { epsilon, ..Default::default() };
            let scenario = build_scenario_with(scenario_name, tuning)?;
            let outcomes = check_manifest(&scenario)?;
            let failed: Vec<&str> = outcomes
                .iter()
                .filter(|o| !o.pass)
                .map(|o| o.description.as_str())
                .collect();
            let stage_labels: Vec<&str> =
                scenario.stages.iter().map(|s| s.label.as_str()).collect();
            let manifest: Vec<Value> = outcomes
                .iter()
                .map(|o| json!({ "assertion": o.description, "pass": o.pass }))
                .collect();
            let doc = json!({
                "command": "scenario",
                "version": VERSION,
                "payload": {
                    "name": scenario.name,
                    "epsilon": num(scenario.epsilon),
                    "stages": stage_labels,
                    "universe_size": scenario.universe.len(),
                    "manifest": manifest,
                },
                "status": if failed.is_empty() { "ok" } else { "manifest-failure" },
            });
            let mut text = String::new();
            text += &format!("name: {}\n", scenario.name);
            text += &format!("epsilon: {:.6}\n", scenario.epsilon);
            text += &format!("stages: {}\n", stage_labels.join(", "));
            text += &format!("universe: {} sentences\n", scenario.universe.len());
            text += "manifest:\n";
            for o in &outcomes {
                let mark = if o.pass { "pass" } else { "FAIL" };
                text += &format!("  [{mark}] {}\n", o.description);
            }
            text += &format!(
                "result: {} ({}/{} passed)\n",
                if failed.is_empty() { "pass" } else { "fail" },
                outcomes.len() - failed.len(),
                outcomes.len()
            );
            emit(&doc, "scenario", format, text);
            Ok(if failed.is_empty() { 0 } else { 4 })
        }
        Command::EuCompare { n, p, gain, loss, epsilon, format } => {
            let level = AcceptanceLevel::new(epsilon)?;
            let c = expected_utility_comparison(n, p, gain, loss, level)?;
            let doc = document(
                "eu-compare",
                json!({
                    "n": c.n,
                    "p": num(c.error_prob),
                    "gain": num(c.gain),
                    "loss": num(c.loss),
                    "epsilon": num(c.epsilon),
                    "acceptance_decision": c.acceptance_decision.to_string(),
                    "probabilistic_decision": c.probabilistic_decision.to_string(),
                    "eu_acceptance": num(c.eu_acceptance),
                    "eu_probabilistic": num(c.eu_probabilistic),
                }),
            );
            let mut text = String::new();
            text += &format!("n: {n}\n");
            text += &format!("p: {p:.6}\n");
            text += &format!("gain: {gain:.6}\n");
            text += &format!("loss: {loss:.6}\n");
            text += &format!("epsilon: {epsilon:.6}\n");
            text += &format!(
                "acceptance policy: {} (eu {:.6})\n",
                c.acceptance_decision, c.eu_acceptance
            );
            text += &format!(
                "probabilistic policy: {} (eu {:.6})\n",
                c.probabilistic_decision, c.eu_probabilistic
            );
            emit(&doc, "eu-compare", format, text);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
