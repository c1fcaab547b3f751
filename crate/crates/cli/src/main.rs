use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use floquet_cli::render::{render_svg, ChartKind};
use floquet_cli::{exit_code, output, recipes, Source, EXIT_CONFIG, EXIT_IO};

#[derive(Parser)]
#[command(name = "floquet", version, about = "Frequency-modulated quantum emitter simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config (a TOML path, or `recipe:NAME`).
    Run {
        config: String,
        /// Overrides FLOQUET_OUT_DIR and the config's `output_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate {
        config: String,
        /// Print the normalised config.
        #[arg(long)]
        print: bool,
    },
    /// Render an exported CSV as SVG.
    Render {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Defaults to the CSV path with an `.svg` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Built-in figure recipes.
    Recipes {
        #[command(subcommand)]
        action: RecipeAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Line,
    Heatmap,
}

#[derive(Subcommand)]
enum RecipeAction {
    List,
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out_dir } => match Source::resolve(&config).and_then(|s| floquet_cli::run(&s, out_dir.as_deref())) {
            Ok(r) => {
                for f in &r.files {
                    println!("{}", f.display());
                }
                eprintln!("done in {:.2} s", r.wall_time_s);
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        Command::Validate { config, print } => match Source::resolve(&config).and_then(|s| s.load()) {
            Ok(c) => {
                if print {
                    print!("{}", c.to_toml());
                } else {
                    println!("ok: task `{}`", c.task.name());
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        Command::Render { csv, kind, output } => {
            let kind = match kind {
                Kind::Line => ChartKind::Line,
                Kind::Heatmap => ChartKind::Heatmap,
            };
            let out = output.unwrap_or_else(|| csv.with_extension("svg"));
            match std::fs::read_to_string(&csv) {
                Err(e) => {
                    eprintln!("error: {}: {e}", csv.display());
                    EXIT_IO
                }
                Ok(text) => match render_svg(&text, kind) {
                    Err(e) => {
                        eprintln!("error: {}: {e}", csv.display());
                        EXIT_CONFIG
                    }
                    Ok(svg) => match output::write_atomic(&out, svg.as_bytes()) {
                        Ok(()) => {
                            println!("{}", out.display());
                            0
                        }
                        Err(e) => {
                            eprintln!("error: {}: {e}", out.display());
                            EXIT_IO
                        }
                    },
                },
            }
        }
        Command::Recipes { action } => match action {
            RecipeAction::List => {
                for (name, src) in recipes::RECIPES {
                    println!("{name:8} {}", recipes::describe(src));
                }
                0
            }
            RecipeAction::Show { name } => match recipes::get(&name) {
                Some(src) => {
                    print!("{src}");
                    0
                }
                None => {
                    eprintln!("error: unknown recipe `{name}`");
                    EXIT_CONFIG
                }
            },
        },
    };
    ExitCode::from(code as u8)
}
