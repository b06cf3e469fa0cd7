use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use peca_core::analysis::ether::DEFAULT_MAX_PERIOD;
use peca_core::analysis::{
    box_counting_dimension, detect_ether, extract_glider_events, filter_ether, power_of_two_sizes,
};
use peca_core::compiler::DEFAULT_GRID_STEPS;
use peca_core::experiment::{run_experiment, Analysis, ExperimentSpec};
use peca_core::fixtures::{fixture_dir, list_fixtures, load_fixture, FIXTURE_DIR_ENV};
use peca_core::io::{diagram_to_string, import_diagram, Format};
use peca_core::{compile_rule, extinction_ratio, feasibility_census, Boundary, Error, Result};

#[derive(Parser)]
#[command(name = "peca", version, about = "Elementary cellular automata on a photonic loop model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a spec file and/or flags.
    Run(RunArgs),
    /// Compile one rule into weights and a threshold.
    Compile {
        rule: i64,
        #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
        grid_steps: usize,
    },
    /// Feasibility of all 256 rules, as CSV.
    Census {
        #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
        grid_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a stored diagram and print a JSON report.
    Analyze(AnalyzeArgs),
    /// Convert a diagram between formats.
    Convert {
        input: PathBuf,
        /// Input format; guessed from the extension when omitted.
        #[arg(long)]
        from: Option<Format>,
        #[arg(long)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Boundary for inputs that do not record one.
        #[arg(long, default_value = "dead")]
        boundary: Boundary,
    },
    /// List bundled fixtures.
    Fixtures,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` spec file; flags override its values.
    spec: Option<PathBuf>,
    #[arg(long)]
    rule: Option<u8>,
    #[arg(long)]
    mode: Option<String>,
    /// Random initial row from this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    boundary: Option<Boundary>,
    /// single, random:SEED, bits:0101.. or fixture:NAME
    #[arg(long)]
    initial: Option<String>,
    /// Comma-separated analyses.
    #[arg(long)]
    analyses: Option<String>,
    /// Output formats (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    format: Vec<Format>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Any other spec key, as KEY=VALUE (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long, default_value = "dead")]
    boundary: Boundary,
    /// Comma-separated: fractal, ether, gliders, extinction.
    #[arg(long, default_value = "fractal")]
    analyses: String,
    /// Fixture whose run defines the background for ether/gliders.
    #[arg(long)]
    ether: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn guess_format(path: &Path, given: Option<Format>) -> Result<Format> {
    given
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| Error::InvalidArgument(format!("cannot tell the format of {}; pass --format", path.display())))
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => ExperimentSpec::from_path(p)?,
        None => ExperimentSpec::default(),
    };
    let mut set = |k: &str, v: String| spec.set(k, &v);
    if let Some(r) = args.rule {
        set("rule", r.to_string())?;
    }
    if let Some(m) = args.mode {
        set("mode", m)?;
    }
    if let Some(i) = args.initial {
        set("initial", i)?;
    }
    if let Some(s) = args.seed {
        set("seed", s.to_string())?;
    }
    if let Some(w) = args.width {
        set("width", w.to_string())?;
    }
    if let Some(s) = args.steps {
        set("steps", s.to_string())?;
    }
    if let Some(b) = args.boundary {
        set("boundary", b.to_string())?;
    }
    if let Some(a) = args.analyses {
        set("analyses", a)?;
    }
    for kv in args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        set(k.trim(), v.trim().to_string())?;
    }
    if !args.format.is_empty() {
        spec.formats = args.format;
    }
    let bundle = run_experiment(&spec, &args.out)?;
    for f in &bundle.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let format = guess_format(&args.input, args.format)?;
    let d = import_diagram(&args.input, format, args.boundary)?;
    let analyses: Vec<Analysis> = args
        .analyses
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    let mut report = serde_json::Map::new();
    let mut ether = None;
    for a in analyses {
        match a {
            Analysis::Fractal => {
                let sizes = power_of_two_sizes(d.width().min(d.steps() + 1) / 2);
                report.insert("fractal".into(), serde_json::to_value(box_counting_dimension(&d, &sizes)?)?);
            }
            Analysis::Ether | Analysis::Gliders => {
                if ether.is_none() {
                    let reference = match &args.ether {
                        Some(name) => load_fixture(name)?.run(),
                        None => d.clone(),
                    };
                    let e = detect_ether(&reference, DEFAULT_MAX_PERIOD)?;
                    report.insert("ether".into(), serde_json::to_value(&e)?);
                    ether = Some(e);
                }
                if a == Analysis::Gliders {
                    let events = extract_glider_events(&filter_ether(&d, ether.as_ref().expect("set above")));
                    report.insert("gliders".into(), serde_json::to_value(events)?);
                }
            }
            Analysis::Extinction => {
                report.insert("extinction_ratio".into(), serde_json::to_value(extinction_ratio(&d)?)?);
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "`{other}` needs the rule and initial row; use `peca run` instead"
                )))
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_or_print(&text, args.out.as_deref())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Compile { rule, grid_steps } => {
            let r = compile_rule(rule, grid_steps)?;
            let mut text = serde_json::to_string_pretty(&r)?;
            text.push('\n');
            print!("{text}");
            Ok(())
        }
        Command::Census { grid_steps, out } => {
            let census = feasibility_census(grid_steps)?;
            write_or_print(&census.to_csv(), out.as_deref())?;
            eprintln!("{} of 256 rules feasible at grid resolution {grid_steps}", census.feasible_count());
            Ok(())
        }
        Command::Analyze(args) => analyze(args),
        Command::Convert {
            input,
            from,
            format,
            out,
            boundary,
        } => {
            let d = import_diagram(&input, guess_format(&input, from)?, boundary)?;
            write_or_print(&diagram_to_string(&d, format), out.as_deref())
        }
        Command::Fixtures => {
            eprintln!("fixture directory: {} (override with {FIXTURE_DIR_ENV})", fixture_dir().display());
            for name in list_fixtures()? {
                let f = load_fixture(&name)?;
                println!("{name}\trule {} width {} {} steps {}", f.rule, f.width(), f.boundary(), f.steps);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
