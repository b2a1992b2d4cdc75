use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use syllogic_core::config::RunConfig;
use syllogic_core::dataset::{load_dataset, write_dataset};
use syllogic_core::extraction::{validate_structure, ExtractionChain, RawStructure};
use syllogic_core::harness::{self, generate_synthetic, plan_folds, report, CvReport, Lexicon};
use syllogic_core::logic::{decide_validity, emit_smtlib, Form, SemanticsMode, SmtCheck, SyllogismStructure};
use syllogic_core::parser::parse_syllogism;

#[derive(Parser)]
#[command(name = "syllogic", version, about = "Validity of categorical syllogisms: solver, parser, ensembles and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide validity of a syllogism under one or all semantics modes
    Solve {
        #[command(flatten)]
        input: StructureInput,
        /// Semantics mode; all three when omitted
        #[arg(long)]
        mode: Option<SemanticsMode>,
        #[arg(long)]
        json: bool,
    },
    /// Parse text into a structure, or report the typed failure
    Parse {
        /// Syllogism text; read from stdin when omitted
        text: Option<String>,
    },
    /// Write an SMT-LIB v2 script for a structure
    EmitSmt {
        #[command(flatten)]
        input: StructureInput,
        #[arg(long, default_value_t = SemanticsMode::SubjectImport)]
        mode: SemanticsMode,
        #[arg(long, value_enum, default_value_t = Check::Entailment)]
        check: Check,
        /// Output file; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate the synthetic corpus as JSON lines
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of believable/unbelievable pairs; every determinate form when omitted
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, default_value_t = SemanticsMode::SubjectImport)]
        mode: SemanticsMode,
        /// Lexicon JSON; the bundled lexicon when omitted
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report Darapti (AAI-3) and Felapton (EAO-3) instances and the modes their labels fit
    ScanImport {
        /// JSON-lines dataset
        dataset: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run selection and the pipeline on a single outer fold
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
    /// Nested cross-validation over all outer folds
    Cv {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-render tables from a run directory's report.json
    Report {
        run_dir: PathBuf,
    },
}

#[derive(Args)]
struct StructureInput {
    /// Syllogism text
    text: Option<String>,
    /// JSON file holding a structure (either the solver's shape or the extraction record shape)
    #[arg(long, conflicts_with_all = ["text", "form"])]
    structure: Option<PathBuf>,
    /// Mood and figure, e.g. EAO-3
    #[arg(long, conflicts_with = "text")]
    form: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides output_dir in the config
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Entailment,
    PremiseConsistency,
}

fn read_stdin() -> Result<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).context("reading stdin")?;
    Ok(s)
}

fn load_structure(input: &StructureInput) -> Result<SyllogismStructure> {
    if let Some(path) = &input.structure {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if let Ok(s) = serde_json::from_str::<SyllogismStructure>(&text) {
            s.validate().with_context(|| format!("{}", path.display()))?;
            return Ok(s);
        }
        let raw: RawStructure = serde_json::from_str(&text).with_context(|| format!("{}: not a structure record", path.display()))?;
        return validate_structure(&raw).with_context(|| format!("{}", path.display()));
    }
    if let Some(code) = &input.form {
        let form = Form::parse(code).with_context(|| format!("bad form `{code}` (expected e.g. AAA-1)"))?;
        return Ok(form.instantiate(&"s".into(), &"m".into(), &"p".into(), false));
    }
    let text = match &input.text {
        Some(t) => t.clone(),
        None => read_stdin()?,
    };
    parse_syllogism(&text).map_err(|e| anyhow::anyhow!("parse failure: {}", e.code()))
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(content.as_bytes()).context("writing stdout"),
    }
}

fn prepare_run(args: &RunArgs) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(&args.config).with_context(|| format!("config {}", args.config.display()))?;
    if let Some(o) = &args.out {
        cfg.output_dir = Some(o.clone());
    }
    let out = cfg.output_dir.clone().context("no output directory: pass --out or set output_dir")?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.resolved.toml"), cfg.to_toml()).context("writing resolved config")?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { input, mode, json } => {
            let s = load_structure(&input)?;
            let modes: Vec<SemanticsMode> = mode.map(|m| vec![m]).unwrap_or_else(|| SemanticsMode::ALL.to_vec());
            let mut verdicts = serde_json::Map::new();
            for m in modes {
                let v = decide_validity(&s, m)?;
                if json {
                    verdicts.insert(m.name().into(), serde_json::to_value(v)?);
                } else {
                    println!("{m}: {v}");
                }
            }
            if json {
                let form = Form::of(&s).map(Form::code);
                println!("{}", serde_json::json!({"structure": s, "form": form, "verdicts": verdicts}));
            }
        }
        Command::Parse { text } => {
            let text = match text {
                Some(t) => t,
                None => read_stdin()?,
            };
            match parse_syllogism(&text) {
                Ok(s) => println!("{}", serde_json::to_string_pretty(&s)?),
                Err(e) => {
                    eprintln!("parse failure: {}", e.code());
                    println!("{}", serde_json::json!({"failure": e.code()}));
                    return Ok(ExitCode::from(3));
                }
            }
        }
        Command::EmitSmt { input, mode, check, output } => {
            let s = load_structure(&input)?;
            let check = match check {
                Check::Entailment => SmtCheck::Entailment,
                Check::PremiseConsistency => SmtCheck::PremiseConsistency,
            };
            write_out(output.as_deref(), &emit_smtlib(&s, mode, check)?)?;
        }
        Command::Gen { seed, pairs, mode, lexicon, output } => {
            let lex = match lexicon {
                None => Lexicon::builtin(),
                Some(p) => serde_json::from_str(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)
                    .with_context(|| format!("lexicon {}", p.display()))?,
            };
            let items = generate_synthetic(&lex, mode, seed, pairs)?;
            let instances: Vec<_> = items.into_iter().map(|i| i.instance).collect();
            let mut buf = Vec::new();
            write_dataset(&mut buf, &instances)?;
            write_out(output.as_deref(), std::str::from_utf8(&buf)?)?;
            eprintln!("{} instances", instances.len());
        }
        Command::ScanImport { dataset, json } => {
            let data = load_dataset(&dataset)?;
            let r = harness::scan_import_forms(&data, &ExtractionChain::rule_based());
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("scanned {}  darapti {}  felapton {}  unextractable {}", r.scanned, r.darapti, r.felapton, r.unextractable.len());
                for m in &r.matches {
                    let modes: Vec<&str> = m.modes_agreeing.iter().map(|x| x.name()).collect();
                    println!("{}\t{}\t{}\tgold={}\tagrees: {}", m.id, m.name, m.form, m.gold_valid, modes.join(","));
                }
                match r.suggested_mode() {
                    Some(m) => println!("suggested mode: {m}"),
                    None if r.matches.is_empty() => println!("no import-sensitive forms found"),
                    None => println!("no single mode fits every label"),
                }
            }
        }
        Command::Eval { run, fold } => {
            let (cfg, out) = prepare_run(&run)?;
            let data = cfg.load_data()?;
            let (candidates, chain) = cfg.build()?;
            let settings = cfg.settings();
            let plan = plan_folds(&data, settings.folds, settings.inner, settings.seed, settings.stratified)?;
            let Some(f) = plan.folds.get(fold) else { bail!("fold {fold} out of range (0..{})", plan.folds.len()) };
            let fr = harness::run_fold(&data, f, &candidates, &chain, &settings)?;
            let single = harness::FoldPlan { folds: vec![f.clone()], ..plan };
            let r = harness::summarize(&settings, data.len(), vec![fr])?;
            report::write_artifacts(&out, &data, &single, &r)?;
            print!("{}", report::render_markdown(&r));
        }
        Command::Cv { run } => {
            let (cfg, out) = prepare_run(&run)?;
            let data = cfg.load_data()?;
            let (candidates, chain) = cfg.build()?;
            let (plan, r) = harness::run_cv(&data, &candidates, &chain, &cfg.settings())?;
            report::write_artifacts(&out, &data, &plan, &r)?;
            print!("{}", report::render_markdown(&r));
        }
        Command::Report { run_dir } => {
            let path = run_dir.join("report.json");
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let r: CvReport = serde_json::from_str(&text).with_context(|| format!("{}: not a run report", path.display()))?;
            report::write_tables(&run_dir, &r)?;
            print!("{}", report::render_markdown(&r));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
