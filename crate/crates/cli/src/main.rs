use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ugc_core::analysis::{compare, k_words_per_category, unlink_features, wordplus_grammar};
use ugc_core::assets;
use ugc_core::check::{check_equivalence, CheckError, CheckReport, WITNESSES};
use ugc_core::compiler::{
    compile, eliminate_left_recursion, CompileError, CompileOptions, Compiled, FeatureSpec,
    DEFAULT_TUPLE_CAP,
};
use ugc_core::lang::Dawg;
use ugc_core::oracle::{
    oracle_enumerate, oracle_parse, OracleError, ParseOptions, DEFAULT_STRING_CAP,
};
use ugc_core::pfsg::{
    build_pfsg, measure, perplexity, CfgParser, MetricsReport, PfsgError, PfsgSet,
};
use ugc_core::strings::{tokenize, Sentence};
use ugc_core::{parse_grammar, ContextFreeGrammar, Grammar};

#[derive(Parser)]
#[command(
    name = "ugc",
    version,
    about = "Compile unification grammars into CFG and PFSG language models",
    after_help = "Inputs are file paths or bundled assets such as @shuttle-rels. \
                  Files ending in .cfg are read as context-free grammars.\n\
                  Exit codes: 0 success, 1 input error, 2 check failure, 3 resource cap."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct VariantArgs {
    /// Features kept in the language model: syn, all, none or f1,f2,...
    #[arg(long, value_name = "SPEC")]
    features: Option<String>,
    /// Drop features from one rule, breaking their links (repeatable)
    #[arg(long, value_name = "RULE:F1,F2")]
    unlink: Vec<String>,
    /// Replace the grammar by one accepting any sequence of its words
    #[arg(long, conflicts_with = "kwords")]
    wordplus: bool,
    /// Keep the first K lexical entries of every lexical category
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    kwords: Option<u64>,
    /// Cap on rule instantiation tuples
    #[arg(long, value_name = "N", default_value_t = DEFAULT_TUPLE_CAP)]
    cap_tuples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write the CFG, PFSG dump, metrics and expansion stats
    Compile {
        input: String,
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Compare grammar and compiled CFG on all strings up to a length
    Check {
        input: String,
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, value_name = "L", default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        max_len: u64,
        /// Cap on automaton nodes built per side
        #[arg(long, value_name = "N", default_value_t = DEFAULT_STRING_CAP)]
        cap_strings: usize,
        /// Check against this CFG instead of compiling one
        #[arg(long, value_name = "CFG")]
        against: Option<String>,
    },
    /// Print PFSG size metrics
    Stats {
        input: String,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Compare the metrics of two inputs (grammars, CFGs or .metrics files)
    Diff {
        left: String,
        right: String,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Recognize one sentence
    Parse {
        input: String,
        sentence: String,
        /// Use the unification grammar directly instead of the compiled CFG
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// List every sentence up to a length
    Enumerate {
        input: String,
        #[arg(long, value_name = "L", default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        max_len: u64,
        #[arg(long, value_name = "N", default_value_t = DEFAULT_STRING_CAP)]
        cap_strings: usize,
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Per-word perplexity of a corpus, one sentence per line
    Perplexity {
        input: String,
        corpus: String,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Print a grammar variant in the grammar language
    Variant {
        input: String,
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Check(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Check(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Check(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::TupleLimit { .. } => Failure::Cap(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::ResourceLimit { .. } => Failure::Cap(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<PfsgError> for Failure {
    fn from(e: PfsgError) -> Self {
        match e {
            PfsgError::ResourceLimit { .. } => Failure::Cap(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Oracle(e) => e.into(),
            CheckError::Compiled(e) => e.into(),
        }
    }
}

type Out = Result<String, Failure>;

fn read(input: &str) -> Result<(String, String), Failure> {
    if let Some(name) = input.strip_prefix('@') {
        let text = assets::bundled(name).ok_or_else(|| {
            let known: Vec<&str> = assets::BUNDLED.iter().map(|(n, _)| *n).collect();
            Failure::Input(format!(
                "no bundled asset `{name}`; known: {}",
                known.join(", ")
            ))
        })?;
        return Ok((name.trim_end_matches(".cfg").to_string(), text.to_string()));
    }
    let text = fs::read_to_string(input).map_err(|e| Failure::Input(format!("{input}: {e}")))?;
    let stem = Path::new(input)
        .file_stem()
        .map_or("grammar".into(), |s| s.to_string_lossy().into_owned());
    Ok((stem, text))
}

fn is_cfg(input: &str) -> bool {
    input.ends_with(".cfg")
}

enum Source {
    Grammar(Grammar),
    Cfg(ContextFreeGrammar),
}

struct Loaded {
    name: String,
    source: Source,
}

fn load(input: &str) -> Result<Loaded, Failure> {
    let (name, text) = read(input)?;
    let source = if is_cfg(input) {
        Source::Cfg(
            ContextFreeGrammar::parse(&text).map_err(|e| Failure::Input(format!("{input}:{e}")))?,
        )
    } else {
        Source::Grammar(parse_grammar(&text).map_err(|e| {
            let lines: Vec<String> = e.report().lines().map(|l| format!("{input}:{l}")).collect();
            Failure::Input(lines.join("\n"))
        })?)
    };
    Ok(Loaded { name, source })
}

impl VariantArgs {
    fn is_plain(&self) -> bool {
        self.features.is_none() && self.unlink.is_empty() && !self.wordplus && self.kwords.is_none()
    }

    fn feature_spec(&self) -> FeatureSpec {
        self.features
            .as_deref()
            .map_or(FeatureSpec::default(), |s| s.parse().unwrap_or_default())
    }

    fn options(&self) -> CompileOptions {
        CompileOptions {
            features: self.feature_spec(),
            tuple_cap: self.cap_tuples,
        }
    }

    /// Applies the variant selector and then the unlink directives.
    fn apply(&self, g: Grammar) -> Result<Grammar, Failure> {
        let mut g = if self.wordplus {
            let vocab: BTreeSet<String> = g.vocabulary().into_iter().collect();
            wordplus_grammar(&vocab).map_err(|e| Failure::Input(e.to_string()))?
        } else if let Some(k) = self.kwords {
            k_words_per_category(&g, k as usize)
        } else {
            g
        };
        for directive in &self.unlink {
            let (rule, features) = directive.split_once(':').ok_or_else(|| {
                Failure::Input(format!("--unlink expects RULE:F1,F2, got `{directive}`"))
            })?;
            let features: Vec<String> = features
                .split(',')
                .map(|f| f.trim().to_string())
                .filter(|f| !f.is_empty())
                .collect();
            g = unlink_features(&g, rule.trim(), &features)
                .map_err(|e| Failure::Input(e.to_string()))?;
        }
        Ok(g)
    }
}

fn grammar_of(
    loaded: Loaded,
    variant: &VariantArgs,
    what: &str,
) -> Result<(String, Grammar), Failure> {
    match loaded.source {
        Source::Grammar(g) => Ok((loaded.name, variant.apply(g)?)),
        Source::Cfg(_) => Err(Failure::Input(format!(
            "{what} needs a unification grammar, not a CFG"
        ))),
    }
}

fn compile_grammar(g: &Grammar, variant: &VariantArgs) -> Result<Compiled, Failure> {
    Ok(compile(g, &variant.options())?)
}

/// The graph-ready CFG of an input, with expansion stats for grammars.
fn compiled_cfg(
    loaded: Loaded,
    variant: &VariantArgs,
) -> Result<(String, ContextFreeGrammar, Option<Compiled>), Failure> {
    match loaded.source {
        Source::Grammar(g) => {
            let c = compile_grammar(&variant.apply(g)?, variant)?;
            Ok((loaded.name, c.cfg.clone(), Some(c)))
        }
        Source::Cfg(cfg) => {
            if !variant.is_plain() {
                return Err(Failure::Input(
                    "variant flags need a unification grammar".into(),
                ));
            }
            let cfg = eliminate_left_recursion(&cfg).map_err(|e| Failure::Input(e.to_string()))?;
            Ok((loaded.name, cfg, None))
        }
    }
}

fn metrics_of(name: &str, set: &PfsgSet, compiled: Option<&Compiled>) -> MetricsReport {
    let mut m = measure(set);
    m.name = name.to_string();
    if let Some(c) = compiled {
        m.extra
            .insert("naive_count".into(), c.stats.naive_count.to_string());
        m.extra
            .insert("emitted_rules".into(), c.stats.emitted_rules.to_string());
        m.extra
            .insert("reduction_factor".into(), c.stats.reduction_factor.clone());
    }
    m
}

fn stats_text(c: &Compiled) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "naive_count={}", c.stats.naive_count);
    let _ = writeln!(s, "emitted_rules={}", c.stats.emitted_rules);
    let _ = writeln!(s, "reduction_factor={}", c.stats.reduction_factor);
    let _ = writeln!(s, "rules={}", c.stripped.rules.len());
    let _ = writeln!(s, "lexical_entries={}", c.stripped.lexicon.len());
    let _ = writeln!(s, "nonterminals={}", c.cfg.productions.len());
    s
}

fn cmd_compile(input: &str, variant: &VariantArgs, out: &Path) -> Out {
    let (name, g) = grammar_of(load(input)?, variant, "compile")?;
    let c = compile_grammar(&g, variant)?;
    let set = build_pfsg(&c.cfg)?;
    let metrics = metrics_of(&name, &set, Some(&c));
    fs::create_dir_all(out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    let mut report = stats_text(&c);
    for (ext, body) in [
        ("cfg", c.cfg.to_string()),
        ("pfsg", set.to_string()),
        ("metrics", metrics.to_kv()),
        ("stats", stats_text(&c)),
    ] {
        let path = out.join(format!("{name}.{ext}"));
        fs::write(&path, body).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let _ = writeln!(report, "wrote {}", path.display());
    }
    Ok(report)
}

fn witness_lines(out: &mut String, label: &str, items: &[Sentence]) {
    for s in items.iter().take(WITNESSES) {
        let _ = writeln!(out, "{label}: {}", s.join(" "));
    }
}

fn check_report(r: &CheckReport, left: &str, right: &str) -> Out {
    let mut s = String::new();
    let _ = writeln!(s, "max_len={}", r.max_len);
    let _ = writeln!(s, "{left}={}", r.oracle_count);
    let _ = writeln!(s, "{right}={}", r.compiled_count);
    if r.equivalent() {
        s.push_str("equivalent\n");
        return Ok(s);
    }
    witness_lines(&mut s, &format!("only in {left}"), &r.missing);
    witness_lines(&mut s, &format!("only in {right}"), &r.extra);
    s.push_str("NOT equivalent");
    Err(Failure::Check(s))
}

/// A CFG is checked against its own left-recursion-free form.
fn check_cfg(cfg: &ContextFreeGrammar, max_len: usize, cap: usize) -> Out {
    let fixed = eliminate_left_recursion(cfg).map_err(|e| Failure::Input(e.to_string()))?;
    if fixed.has_left_recursion() {
        return Err(Failure::Check(
            "left recursion remains after elimination".into(),
        ));
    }
    let mut dawg = Dawg::default();
    let want = CfgParser::new(cfg).language(max_len, &mut dawg, cap)?;
    let base = dawg.len();
    let got = CfgParser::new(&fixed).language(max_len, &mut dawg, base.saturating_add(cap))?;
    let (missing, extra) = (dawg.difference(want, got), dawg.difference(got, want));
    let r = CheckReport {
        max_len,
        oracle_count: dawg.count(want),
        compiled_count: dawg.count(got),
        missing: dawg.sample(missing, WITNESSES),
        extra: dawg.sample(extra, WITNESSES),
    };
    check_report(&r, "input", "eliminated")
}

fn cmd_check(
    input: &str,
    variant: &VariantArgs,
    max_len: usize,
    cap: usize,
    against: Option<&str>,
) -> Out {
    let loaded = load(input)?;
    if let Source::Cfg(cfg) = &loaded.source {
        if against.is_some() || !variant.is_plain() {
            return Err(Failure::Input(
                "a CFG input takes no --against or variant flags".into(),
            ));
        }
        return check_cfg(cfg, max_len, cap);
    }
    let (_, g) = grammar_of(loaded, variant, "check")?;
    let c = compile_grammar(&g, variant)?;
    let cfg = match against {
        Some(path) => match load(path)?.source {
            Source::Cfg(cfg) => cfg,
            Source::Grammar(_) => {
                return Err(Failure::Input("--against expects a .cfg file".into()))
            }
        },
        None => c.cfg.clone(),
    };
    let r = check_equivalence(&c.stripped, None, &cfg, max_len, cap)?;
    check_report(&r, "grammar", "cfg")
}

fn metrics_for(input: &str, variant: &VariantArgs) -> Result<MetricsReport, Failure> {
    if input.ends_with(".metrics") {
        let (_, text) = read(input)?;
        return MetricsReport::parse(&text).map_err(|e| Failure::Input(format!("{input}: {e}")));
    }
    let (name, cfg, compiled) = compiled_cfg(load(input)?, variant)?;
    let set = build_pfsg(&cfg)?;
    Ok(metrics_of(&name, &set, compiled.as_ref()))
}

fn cmd_stats(input: &str, variant: &VariantArgs) -> Out {
    let m = metrics_for(input, variant)?;
    Ok(format!("{}\n{}", m.table(), m.to_kv()))
}

fn cmd_diff(left: &str, right: &str, variant: &VariantArgs) -> Out {
    let d = compare(&metrics_for(left, variant)?, &metrics_for(right, variant)?);
    Ok(format!("{}\n{}", d.table(), d.to_kv()))
}

fn cmd_parse(input: &str, sentence: &str, oracle: bool, variant: &VariantArgs) -> Out {
    let tokens = tokenize(sentence);
    let loaded = load(input)?;
    if oracle {
        let (_, g) = grammar_of(loaded, variant, "--oracle")?;
        let kept = variant.feature_spec().kept(&g)?;
        let opts = ParseOptions {
            feature_filter: Some(kept),
            max_trees: 1,
            ..ParseOptions::default()
        };
        let r = oracle_parse(&g, &tokens, &opts)?;
        if !r.accepted {
            return Ok("REJECT\n".into());
        }
        let mut s = format!("ACCEPT derivations={}\n", r.derivation_count);
        for t in r.derivations.unwrap_or_default() {
            let _ = writeln!(s, "{t}");
        }
        return Ok(s);
    }
    let (_, cfg, _) = compiled_cfg(loaded, variant)?;
    let r = CfgParser::new(&cfg).parse(&tokens);
    Ok(if r.accepted {
        format!(
            "ACCEPT derivations={} log_prob={:.9}\n",
            r.derivation_count, r.log_prob
        )
    } else {
        "REJECT\n".into()
    })
}

fn cmd_enumerate(
    input: &str,
    max_len: usize,
    cap: usize,
    oracle: bool,
    variant: &VariantArgs,
) -> Out {
    let loaded = load(input)?;
    let strings = if oracle {
        let (_, g) = grammar_of(loaded, variant, "--oracle")?;
        let kept = variant.feature_spec().kept(&g)?;
        oracle_enumerate(&g, max_len, Some(&kept), cap)?
    } else {
        let (_, cfg, _) = compiled_cfg(loaded, variant)?;
        CfgParser::new(&cfg).enumerate(max_len, cap)?
    };
    let mut s = String::new();
    for line in strings {
        let _ = writeln!(s, "{}", line.join(" "));
    }
    Ok(s)
}

fn cmd_perplexity(input: &str, corpus: &str, variant: &VariantArgs) -> Out {
    let (_, text) = read(corpus)?;
    let sentences: Vec<Sentence> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(tokenize)
        .collect();
    let (_, cfg, _) = compiled_cfg(load(input)?, variant)?;
    let p = perplexity(&cfg, &sentences)?;
    let mut s = format!(
        "perplexity={:.9}\nsentences={}\nwords={}\nexcluded={}\n",
        p.value,
        p.sentences,
        p.words,
        p.excluded.len()
    );
    for i in &p.excluded {
        let _ = writeln!(s, "out of language: {}", sentences[*i].join(" "));
    }
    Ok(s)
}

fn cmd_variant(input: &str, variant: &VariantArgs, out: Option<&Path>) -> Out {
    let (_, g) = grammar_of(load(input)?, variant, "variant")?;
    let g = match &variant.features {
        Some(_) => ugc_core::compiler::strip_features(&g, &variant.feature_spec())?,
        None => g,
    };
    let text = g.to_string();
    match out {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

fn run(cli: Cli) -> Out {
    match cli.command {
        Command::Compile {
            input,
            variant,
            out,
        } => cmd_compile(&input, &variant, &out),
        Command::Check {
            input,
            variant,
            max_len,
            cap_strings,
            against,
        } => cmd_check(
            &input,
            &variant,
            max_len as usize,
            cap_strings,
            against.as_deref(),
        ),
        Command::Stats { input, variant } => cmd_stats(&input, &variant),
        Command::Diff {
            left,
            right,
            variant,
        } => cmd_diff(&left, &right, &variant),
        Command::Parse {
            input,
            sentence,
            oracle,
            variant,
        } => cmd_parse(&input, &sentence, oracle, &variant),
        Command::Enumerate {
            input,
            max_len,
            cap_strings,
            oracle,
            variant,
        } => cmd_enumerate(&input, max_len as usize, cap_strings, oracle, &variant),
        Command::Perplexity {
            input,
            corpus,
            variant,
        } => cmd_perplexity(&input, &corpus, &variant),
        Command::Variant {
            input,
            variant,
            out,
        } => cmd_variant(&input, &variant, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            // A closed pipe (`ugc stats ... | head`) is not an error.
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Failure::Check(report) = &f {
                let _ = writeln!(std::io::stdout(), "{report}");
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
