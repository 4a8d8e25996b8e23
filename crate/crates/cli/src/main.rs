use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use matchadapt::adapt_sm::adapt_sm;
use matchadapt::format::{
    emit_instance_with_header, emit_matching, emit_query, parse_graph, parse_instance,
    parse_matching,
};
use matchadapt::gen::{
    figure3_base, independent_set_gadget, local_search_forbidden_gadget,
    local_search_forced_gadget, random_instance,
};
use matchadapt::{
    adapt_report, blocking_pairs, build_rotation_poset, oracle_adapt, AdaptOptions, AdaptQuery,
    Error, Instance, Kind, Matching, OracleLimits, Pair, PosetLimits, StabilityNotion,
};

// stdout write errors (a closed pipe) are ignored rather than panicking
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

/// Stable roommates and stable marriage: stability checks, rotation posets
/// and adaptation of stable matchings to forced and forbidden pairs.
///
/// Exit codes: 0 success or feasible, 1 unstable or infeasible, 2 input
/// error, 3 resource cap exceeded. MATCHADAPT_ORACLE_CAP overrides the agent
/// cap of the exhaustive oracle, MATCHADAPT_TABLE_CAP the stable-table
/// exploration guard.
#[derive(Parser)]
#[command(name = "matchadapt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a matching for stability.
    Check {
        instance: PathBuf,
        matching: PathBuf,
        #[arg(long, value_enum)]
        notion: Option<Notion>,
    },
    /// Print the rotation poset of a strict instance.
    Rotations {
        instance: PathBuf,
        /// Also write the rotation digraph in Graphviz format.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Adapt a stable matching to forced and forbidden pairs.
    Adapt(AdaptArgs),
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct AdaptArgs {
    instance: PathBuf,
    /// The starting stable matching.
    m1: PathBuf,
    /// A pair that must appear, as "a b"; repeatable.
    #[arg(long, value_name = "PAIR")]
    forced: Vec<String>,
    /// A pair that must not appear, as "a b"; repeatable.
    #[arg(long, value_name = "PAIR")]
    forbidden: Vec<String>,
    /// Bound on the symmetric difference to m1 [default: unbounded].
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    notion: Option<Notion>,
    /// Solve by exhaustive enumeration.
    #[arg(long)]
    oracle: bool,
    /// Cross-check the marriage algorithm against the roommates algorithm.
    #[arg(long)]
    verify: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// A random instance.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "sr")]
        kind: KindArg,
        /// Probability of merging neighbouring list entries into a tie.
        #[arg(long, default_value_t = 0.0)]
        ties: f64,
        /// Probability that a pair is mutually acceptable.
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The independent-set gadget of a graph.
    IsGadget {
        /// Graph file: `vertices <n>` then one `u v` edge per line.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        ell: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The forced-pair local-search gadget.
    LsForcedGadget(LsArgs),
    /// The forbidden-pair local-search gadget.
    LsForbiddenGadget(LsArgs),
}

#[derive(Args)]
struct LsArgs {
    /// Base marriage instance [default: the built-in example base].
    #[arg(long, requires = "base_matching")]
    base: Option<PathBuf>,
    /// Weakly stable matching of the base with one single per side.
    #[arg(long, requires = "base")]
    base_matching: Option<PathBuf>,
    #[arg(long)]
    ell: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct OutArgs {
    /// Instance output path; the query goes next to it with extension
    /// `.query`. Without it everything is printed.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Notion {
    Strict,
    Weak,
    Strong,
}

impl From<Notion> for StabilityNotion {
    fn from(n: Notion) -> Self {
        match n {
            Notion::Strict => StabilityNotion::Strict,
            Notion::Weak => StabilityNotion::Weak,
            Notion::Strong => StabilityNotion::Strong,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sr,
    Sm,
}

/// Strict for instances without ties, weak otherwise.
fn notion_for(instance: &Instance, notion: Option<Notion>) -> StabilityNotion {
    match notion {
        Some(n) => n.into(),
        None if instance.is_strict() => StabilityNotion::Strict,
        None => StabilityNotion::Weak,
    }
}

fn env_cap(var: &str) -> anyhow::Result<Option<usize>> {
    match std::env::var(var) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("{var} must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn oracle_limits() -> anyhow::Result<OracleLimits> {
    let mut limits = OracleLimits::default();
    if let Some(cap) = env_cap("MATCHADAPT_ORACLE_CAP")? {
        limits.max_agents = cap;
    }
    Ok(limits)
}

fn poset_limits() -> anyhow::Result<PosetLimits> {
    let mut limits = PosetLimits::default();
    if let Some(cap) = env_cap("MATCHADAPT_TABLE_CAP")? {
        limits.max_tables = cap;
    }
    Ok(limits)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_matching(instance: &Instance, path: &Path) -> anyhow::Result<Matching> {
    parse_matching(instance, &read(path)?).with_context(|| format!("in {}", path.display()))
}

fn parse_pair(instance: &Instance, text: &str) -> anyhow::Result<Pair> {
    let names: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .collect();
    match names.as_slice() {
        [a, b] => Ok(instance.pair_by_names(a, b)?),
        _ => bail!("expected a pair \"a b\", got {text:?}"),
    }
}

fn pair_line(instance: &Instance, p: Pair) -> String {
    format!("{} {}", instance.name(p.lo()), instance.name(p.hi()))
}

fn cmd_check(instance: &Path, matching: &Path, notion: Option<Notion>) -> anyhow::Result<ExitCode> {
    let inst = load_instance(instance)?;
    let m = load_matching(&inst, matching)?;
    let notion = notion_for(&inst, notion);
    matchadapt::stability::check_notion(&inst, notion)?;
    m.check_acceptable(&inst)?;
    let blocking = blocking_pairs(&inst, &m, notion);
    if blocking.is_empty() {
        outln!("STABLE");
        return Ok(ExitCode::SUCCESS);
    }
    outln!("UNSTABLE ({notion}): {} blocking pairs", blocking.len());
    for p in blocking {
        outln!("{}", pair_line(&inst, p));
    }
    Ok(ExitCode::from(1))
}

fn cmd_rotations(instance: &Path, dot: Option<&Path>) -> anyhow::Result<ExitCode> {
    let inst = load_instance(instance)?;
    let poset = match build_rotation_poset(&inst, poset_limits()?) {
        Err(Error::NoStableMatching) => {
            outln!("no stable matching");
            return Ok(ExitCode::from(1));
        }
        other => other?,
    };
    let mut out = String::new();
    let _ = writeln!(out, "rotations: {}", poset.len());
    let _ = writeln!(out, "singular: {}", poset.singular().len());
    let _ = writeln!(out, "tables explored: {}", poset.tables_explored());
    for r in poset.rotations() {
        let tag = if r.is_singular() { " singular" } else { "" };
        let _ = writeln!(out, "{} {}{}", r.id, r.cycle.display(&inst), tag);
    }
    let duals = poset.dual_pairs();
    let _ = writeln!(out, "dual pairs: {}", duals.len());
    for (a, b) in duals {
        let _ = writeln!(out, "{a} ~ {b}");
    }
    let precedence = poset.precedence_pairs();
    let _ = writeln!(out, "precedence edges: {}", precedence.len());
    for (a, b) in precedence {
        let _ = writeln!(out, "{a} > {b}");
    }
    out!("{out}");
    if let Some(path) = dot {
        fs::write(path, poset.to_dot(&inst))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

struct Found {
    matching: Matching,
    delta: usize,
    guess: String,
}

fn cmd_adapt(args: &AdaptArgs) -> anyhow::Result<ExitCode> {
    let inst = load_instance(&args.instance)?;
    let m1 = load_matching(&inst, &args.m1)?;
    let forced = args
        .forced
        .iter()
        .map(|s| parse_pair(&inst, s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let forbidden = args
        .forbidden
        .iter()
        .map(|s| parse_pair(&inst, s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let k = args.k.unwrap_or(usize::MAX);
    let query = AdaptQuery::new(m1, forced, forbidden, k);
    let notion = notion_for(&inst, args.notion);
    query.validate(&inst, notion).context("m1")?;

    let use_oracle = args.oracle || !inst.is_strict();
    let (solver, found) = if use_oracle {
        let m = oracle_adapt(&inst, &query, notion, oracle_limits()?)?;
        let found = m.map(|m| Found {
            delta: m.difference_size(&query.m1),
            matching: m,
            guess: "-".into(),
        });
        ("oracle", found)
    } else if inst.kind() == Kind::Marriage {
        let found = adapt_sm(&inst, &query)?;
        if args.verify {
            let sr = run_sr(&inst, &query)?;
            if sr.as_ref().map(|f| f.delta) != found.as_ref().map(|a| a.delta) {
                bail!(
                    "cross-check failed: marriage algorithm {:?}, roommates algorithm {:?}",
                    found.as_ref().map(|a| a.delta),
                    sr.as_ref().map(|f| f.delta)
                );
            }
        }
        let found = found.map(|a| Found {
            matching: a.matching,
            delta: a.delta,
            guess: format!("weight {} <= {}", a.weight, a.threshold),
        });
        ("sm", found)
    } else {
        ("sr", run_sr(&inst, &query)?)
    };

    outln!("# solver: {solver}, notion: {notion}");
    match found {
        None => {
            outln!("INFEASIBLE");
            Ok(ExitCode::from(1))
        }
        Some(f) => {
            out!("{}", emit_matching(&inst, &f.matching));
            outln!("delta={}", f.delta);
            outln!("guess={}", f.guess);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_sr(inst: &Instance, query: &AdaptQuery) -> anyhow::Result<Option<Found>> {
    let options = AdaptOptions {
        poset: poset_limits()?,
        ..AdaptOptions::default()
    };
    let report = adapt_report(inst, query, options)?;
    Ok(report.within_budget().map(|a| Found {
        guess: if a.guess.is_empty() {
            "-".into()
        } else {
            a.guess.display(inst)
        },
        matching: a.matching,
        delta: a.delta,
    }))
}

fn write_outputs(
    out: &OutArgs,
    instance_text: &str,
    query_text: Option<&str>,
) -> anyhow::Result<()> {
    match &out.out {
        None => {
            out!("{instance_text}");
            if let Some(q) = query_text {
                outln!();
                out!("{q}");
            }
        }
        Some(path) => {
            fs::write(path, instance_text)
                .with_context(|| format!("cannot write {}", path.display()))?;
            outln!("wrote {}", path.display());
            if let Some(q) = query_text {
                let qpath = path.with_extension("query");
                fs::write(&qpath, q)
                    .with_context(|| format!("cannot write {}", qpath.display()))?;
                outln!("wrote {}", qpath.display());
            }
        }
    }
    Ok(())
}

fn emit_gadget(
    header: Vec<String>,
    instance: &Instance,
    query: &AdaptQuery,
    out: &OutArgs,
) -> anyhow::Result<()> {
    let instance_text = emit_instance_with_header(instance, &header);
    let query_text = format!("# {}\n{}", header.join("\n# "), emit_query(instance, query));
    write_outputs(out, &instance_text, Some(&query_text))
}

fn ls_base(args: &LsArgs) -> anyhow::Result<(Instance, Matching, String)> {
    match (&args.base, &args.base_matching) {
        (Some(b), Some(m)) => {
            let inst = load_instance(b)?;
            let matching = load_matching(&inst, m)?;
            Ok((inst, matching, format!("base: {}", b.display())))
        }
        _ => {
            let (inst, matching) = figure3_base();
            Ok((inst, matching, "base: built-in".into()))
        }
    }
}

fn cmd_gen(cmd: &GenCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        GenCommand::Random {
            n,
            kind,
            ties,
            density,
            seed,
            out,
        } => {
            let kind_name = match kind {
                KindArg::Sr => "sr",
                KindArg::Sm => "sm",
            };
            let kind = match kind {
                KindArg::Sr => Kind::Roommates,
                KindArg::Sm => Kind::Marriage,
            };
            let inst = random_instance(*n, kind, *ties, *density, *seed)?;
            let header = vec![format!(
                "random {kind_name} n={n} ties={ties} density={density} seed={seed}"
            )];
            write_outputs(out, &emit_instance_with_header(&inst, &header), None)?;
        }
        GenCommand::IsGadget { graph, ell, out } => {
            let g =
                parse_graph(&read(graph)?).with_context(|| format!("in {}", graph.display()))?;
            let (inst, query) = independent_set_gadget(&g, *ell)?;
            let header = vec![format!(
                "independent-set gadget: {} vertices, {} edges, ell={ell}, k={} (no randomness)",
                g.num_vertices(),
                g.edges().len(),
                query.k
            )];
            emit_gadget(header, &inst, &query, out)?;
        }
        GenCommand::LsForcedGadget(args) | GenCommand::LsForbiddenGadget(args) => {
            let (base, n_matching, base_desc) = ls_base(args)?;
            let (name, (inst, query)) = match cmd {
                GenCommand::LsForcedGadget(_) => (
                    "forced",
                    local_search_forced_gadget(&base, &n_matching, args.ell)?,
                ),
                _ => (
                    "forbidden",
                    local_search_forbidden_gadget(&base, &n_matching, args.ell)?,
                ),
            };
            let header = vec![format!(
                "local-search {name} gadget, {base_desc}, ell={}, k={} (no randomness)",
                args.ell, query.k
            )];
            emit_gadget(header, &inst, &query, &args.out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InstanceTooLarge { .. } | Error::ResourceExhausted { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check {
            instance,
            matching,
            notion,
        } => cmd_check(instance, matching, *notion),
        Command::Rotations { instance, dot } => cmd_rotations(instance, dot.as_deref()),
        Command::Adapt(args) => cmd_adapt(args),
        Command::Gen(cmd) => cmd_gen(cmd),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
