use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use smpds_core::gen::{atom_names, gen_random, random_formula, GenParams};
use smpds_core::headgraph::{model_check_ba, Answer, CheckOutcome, Verdict};
use smpds_core::io::{failure_artifact, parse_model, print_model, ModelBundle};
use smpds_core::ltl::{ltl_to_buchi, parse_buchi, parse_ltl_checked, to_nnf, BuchiAutomaton, Formula};
use smpds_core::oracle::{bounded_lasso, cross_check};
use smpds_core::presets::preset;

#[derive(Parser)]
#[command(name = "smpds", version, about = "LTL model checking for self-modifying pushdown systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether some run of the model satisfies a property.
    Check {
        model: PathBuf,
        #[command(flatten)]
        property: Property,
    },
    /// Write the head reachability graph of the product as DOT.
    Graph {
        model: PathBuf,
        #[command(flatten)]
        property: Property,
        #[arg(long)]
        dot: PathBuf,
    },
    /// Generate a random model.
    Gen {
        #[arg(long)]
        s1: usize,
        #[arg(long)]
        s2: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        controls: Option<usize>,
        #[arg(long)]
        symbols: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a campaign comparing the direct and phase-encoded pipelines.
    Bench {
        #[arg(long)]
        campaign: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Directory for models whose verdicts disagree.
        #[arg(long)]
        failures: Option<PathBuf>,
    },
    /// Compare the verdict with the phase-encoded pipeline and a bounded
    /// lasso search.
    Oracle {
        model: PathBuf,
        #[command(flatten)]
        property: Property,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        stack: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Property {
    /// LTL formula.
    #[arg(long)]
    ltl: Option<String>,
    /// Büchi automaton file.
    #[arg(long)]
    ba: Option<PathBuf>,
    /// Named formula: registry-key, data-steal or spy-worm.
    #[arg(long)]
    preset: Option<String>,
}

enum Spec {
    Formula(Formula),
    Automaton(BuchiAutomaton),
}

impl Property {
    fn resolve(&self, bundle: &ModelBundle) -> Result<Spec> {
        if let Some(text) = &self.ltl {
            let (f, warnings) = parse_ltl_checked(text, bundle.model.atoms())
                .map_err(|e| anyhow::anyhow!("formula {e}"))?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            return Ok(Spec::Formula(f));
        }
        if let Some(path) = &self.ba {
            let text = read(path)?;
            let ba = parse_buchi(&text).map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))?;
            return Ok(Spec::Automaton(ba));
        }
        let name = self.preset.as_deref().unwrap_or_default();
        match preset(name) {
            Some(f) => Ok(Spec::Formula(f)),
            None => bail!("unknown preset `{name}`"),
        }
    }
}

impl Spec {
    fn automaton(&self) -> BuchiAutomaton {
        match self {
            Spec::Formula(f) => ltl_to_buchi(&to_nnf(f)),
            Spec::Automaton(ba) => ba.clone(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<ModelBundle> {
    let text = read(path)?;
    parse_model(&text).map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

fn check(bundle: &ModelBundle, spec: &Spec) -> Result<CheckOutcome> {
    Ok(model_check_ba(&bundle.model, &bundle.theta0, &bundle.c0, &spec.automaton())?)
}

fn report(outcome: &CheckOutcome) {
    let verdict: &Verdict = outcome.verdict();
    println!("verdict: {}", verdict.answer);
    if let Some(w) = &verdict.witness {
        let sys = &outcome.product.system;
        println!("repeating head: {}", outcome.emptiness.graph.format_head(&w.head, sys));
        if let Some(prefix) = &w.prefix {
            let rules: Vec<&str> = prefix.iter().map(|&r| sys.rule_name(r)).collect();
            println!("prefix: {}", rules.join(" "));
        }
        let cycle: Vec<&str> = w
            .cycle
            .iter()
            .map(|&e| sys.rule_name(outcome.emptiness.graph.edges()[e].cause.rule()))
            .collect();
        println!("cycle: {}", cycle.join(" "));
    }
    println!("stats: {}", outcome.stats().to_kv());
}

/// Campaign description, read from a TOML file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Campaign {
    s1: Vec<usize>,
    s2: Vec<usize>,
    #[serde(default = "one")]
    instances: usize,
    #[serde(default)]
    seed: u64,
    controls: Option<usize>,
    symbols: Option<usize>,
    /// Fixed formulas; when absent each instance draws a random one.
    formulas: Option<Vec<String>>,
    #[serde(default = "three")]
    formula_size: usize,
    #[serde(default = "three")]
    max_temporal: usize,
}

fn one() -> usize {
    1
}

fn three() -> usize {
    3
}

fn gen_params(s1: usize, s2: usize, seed: u64, controls: Option<usize>, symbols: Option<usize>) -> GenParams {
    let mut p = GenParams::scaled(s1, s2, seed);
    if let Some(c) = controls {
        p.n_controls = c;
    }
    if let Some(s) = symbols {
        p.n_symbols = s;
    }
    p
}

fn bench(path: &Path, output: Option<&Path>, failures: Option<&Path>) -> Result<bool> {
    let campaign: Campaign = toml::from_str(&read(path)?)
        .with_context(|| format!("invalid campaign file {}", path.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(campaign.seed);
    let mut csv = String::from("s1,s2,ltl_size,direct_ms,translate_ms,check_ms,agree\n");
    let mut all_agree = true;
    let mut k = 0u64;
    for &s1 in &campaign.s1 {
        for &s2 in &campaign.s2 {
            for i in 0..campaign.instances {
                let seed = campaign.seed.wrapping_add(k);
                k += 1;
                let params = gen_params(s1, s2, seed, campaign.controls, campaign.symbols);
                let bundle = gen_random(&params);
                let phi = match &campaign.formulas {
                    Some(list) if !list.is_empty() => {
                        let text = &list[i % list.len()];
                        parse_ltl_checked(text, bundle.model.atoms())
                            .map_err(|e| anyhow::anyhow!("formula `{text}`: {e}"))?
                            .0
                    }
                    _ => random_formula(
                        &mut rng,
                        &atom_names(params.n_atoms),
                        campaign.formula_size,
                        campaign.max_temporal,
                    ),
                };
                let r = cross_check(&bundle.model, &bundle.theta0, &bundle.c0, &phi)?;
                if !r.agree() {
                    all_agree = false;
                    if let Some(dir) = failures {
                        fs::create_dir_all(dir)?;
                        let file = dir.join(format!("disagree-{seed}.smpds"));
                        fs::write(&file, failure_artifact(&bundle, seed, &phi.to_string()))?;
                    }
                }
                csv.push_str(&format!(
                    "{},{},{},{:.3},{:.3},{:.3},{}\n",
                    s1,
                    s2,
                    phi.size(),
                    r.direct_ms,
                    r.translate_ms,
                    r.check_ms,
                    r.agree()
                ));
            }
        }
    }
    match output {
        Some(p) => fs::write(p, csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(all_agree)
}

fn oracle(bundle: &ModelBundle, spec: &Spec, depth: usize, stack: usize) -> Result<bool> {
    let outcome = check(bundle, spec)?;
    let direct = outcome.verdict().answer;
    println!("direct: {direct}");
    let mut ok = true;
    if let Spec::Formula(phi) = spec {
        let r = cross_check(&bundle.model, &bundle.theta0, &bundle.c0, phi)?;
        println!("translated: {}", r.translated);
        ok &= r.agree();
    }
    let lasso = bounded_lasso(&outcome.product.system, &outcome.initial, depth, stack);
    match &lasso.found {
        Some(h) => {
            let name = outcome.emptiness.graph.format_head(h, &outcome.product.system);
            println!("bounded lasso: found at {name}");
            ok &= direct == Answer::AcceptingRun;
        }
        None if lasso.truncated => println!("bounded lasso: none within bounds (inconclusive)"),
        None => {
            println!("bounded lasso: none (state space exhausted)");
            ok &= direct == Answer::NoAcceptingRun;
        }
    }
    println!("oracle: {}", if ok { "agree" } else { "DISAGREE" });
    Ok(ok)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { model, property } => {
            let bundle = load(&model)?;
            let spec = property.resolve(&bundle)?;
            let outcome = check(&bundle, &spec)?;
            report(&outcome);
            Ok(exit_for(outcome.verdict()))
        }
        Command::Graph { model, property, dot } => {
            let bundle = load(&model)?;
            let spec = property.resolve(&bundle)?;
            let outcome = check(&bundle, &spec)?;
            let text = outcome
                .emptiness
                .graph
                .to_dot(&outcome.product.system, &outcome.emptiness.phases);
            fs::write(&dot, text).with_context(|| format!("cannot write {}", dot.display()))?;
            report(&outcome);
            Ok(exit_for(outcome.verdict()))
        }
        Command::Gen { s1, s2, seed, controls, symbols, output } => {
            if s1 == 0 {
                bail!("--s1 must be at least 1");
            }
            let bundle = gen_random(&gen_params(s1, s2, seed, controls, symbols));
            fs::write(&output, format!("# seed: {seed}\n{}", print_model(&bundle)))
                .with_context(|| format!("cannot write {}", output.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { campaign, output, failures } => {
            let agree = bench(&campaign, output.as_deref(), failures.as_deref())?;
            if !agree {
                eprintln!("error: pipelines disagree on some instances");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { model, property, depth, stack } => {
            let bundle = load(&model)?;
            let spec = property.resolve(&bundle)?;
            let ok = oracle(&bundle, &spec, depth, stack)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn exit_for(v: &Verdict) -> ExitCode {
    if v.accepting() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
