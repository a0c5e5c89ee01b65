mod config;
mod failure;
mod plot;
mod report;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RawConfig, Resolved, RUN};
use failure::{Failure, Outcome};
use plot::PlotKind;
use report::{file_name, Report, VERSION};

#[derive(Parser)]
#[command(name = "memolab", version = VERSION, about = "Memorization experiments for autoencoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List scenarios.
    List,
    /// Print the default config of a scenario.
    Config { scenario: String },
    /// Render a CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        kind: PlotKind,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
}

fn scenario(name: &str) -> Outcome<&'static scenarios::Scenario> {
    scenarios::find(name).ok_or_else(|| {
        let known: Vec<&str> = scenarios::SCENARIOS.iter().map(|s| s.name).collect();
        Failure::Usage(format!("unknown scenario {name:?}; known: {}", known.join(", ")))
    })
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::config(None, "config", format!("cannot read {}: {e}", path.display())))
}

fn run(config: &Path, seed: Option<u64>, out_dir: Option<PathBuf>) -> Outcome<()> {
    let raw = RawConfig::parse(&read(config)?)?;
    let name = raw
        .get(RUN, "scenario")
        .ok_or_else(|| Failure::config(None, "run.scenario", "config names no scenario"))?;
    let sc = scenarios::find(&name.value).ok_or_else(|| {
        Failure::config(Some(name.line), "run.scenario", format!("unknown scenario {:?}", name.value))
    })?;
    let mut cfg = Resolved::new(sc.name, sc.params, &raw)?;
    if let Some(s) = seed {
        cfg.set(RUN, "seed", s.to_string());
    }
    let dir = match out_dir {
        Some(d) => d,
        None => match cfg.raw(RUN, "out_dir").0 {
            "" => PathBuf::from("out").join(sc.name),
            d => PathBuf::from(d),
        },
    };
    cfg.set(RUN, "out_dir", dir.display().to_string());
    let mut report = Report::new(dir, sc.name, cfg.seed()?)?;
    report.write_file("config_echo.cfg", &cfg.echo())?;
    (sc.run)(&cfg, &mut report)?;
    let written = report.finish()?;
    for p in &written {
        println!("{}", p.display());
    }
    eprintln!("{}: wrote {} files", sc.name, written.len());
    Ok(())
}

fn execute(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Run { config, seed, out_dir } => run(&config, seed, out_dir),
        Command::List => {
            for s in &scenarios::SCENARIOS {
                println!("{}\t{}", s.name, s.description);
            }
            Ok(())
        }
        Command::Config { scenario: name } => {
            let sc = scenario(&name)?;
            let cfg = Resolved::new(sc.name, sc.params, &RawConfig::default())?;
            print!("{}", cfg.echo());
            Ok(())
        }
        Command::Plot { csv, kind, output } => {
            let text = std::fs::read_to_string(&csv)?;
            std::fs::write(&output, plot::render(kind, &text)?)?;
            println!("{}", file_name(&output));
            Ok(())
        }
    }
}

fn init_threads() -> Outcome<()> {
    if let Ok(v) = std::env::var("MEMOLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Usage(format!("MEMOLAB_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", Failure::Usage(e.to_string().trim_end().to_string()));
            return ExitCode::from(2);
        }
    };
    match init_threads().and_then(|()| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
