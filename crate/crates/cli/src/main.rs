//! Command-line driver: validate input files, run the page engine on a
//! filtered complex, or run the full fibration pipeline on a builtin model
//! or a `dga.v1` file. Reports are byte-deterministic for a fixed
//! invocation. Exit codes: 0 all checks pass, 1 validation or fibration
//! failure, 2 parse or usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use leray::complexes::FilteredComplex;
use leray::exactlin::{format_scalar, int, parse_scalar};
use leray::fibration::{FibrationData, FibrationError, LerayAnalysis};
use leray::formats::{self, LoadedInput};
use leray::models;
use leray::report::{build_leray_report_from, PagesReport};
use leray::specseq;

#[derive(Parser)]
#[command(
    name = "leray",
    about = "Exact spectral sequences of filtered complexes and differential fibrations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a complex.v1 or dga.v1 file.
    Validate {
        /// input file
        path: PathBuf,
    },
    /// Compute the spectral sequence pages of a filtered complex file.
    Pages {
        /// complex.v1 file with a filtration block
        path: PathBuf,
        /// highest page to print
        #[arg(long, default_value_t = 4)]
        rmax: usize,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        /// write the report here instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = false)]
        verbose: bool,
    },
    /// Run the fibration pipeline on a builtin model or a dga.v1 file.
    Leray {
        /// `heisenberg`, `identity`, or a path to a dga.v1 file with
        /// morphism and module blocks
        input: String,
        /// sector window for builtin models
        #[arg(long, default_value_t = 3)]
        window: i64,
        /// twist coefficient `p/q` for the heisenberg model
        #[arg(long, default_value = "0")]
        lambda: String,
        #[arg(long, default_value_t = 4)]
        rmax: usize,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        /// also write the induced filtered complex as complex.v1
        #[arg(long)]
        emit: Option<PathBuf>,
        /// also write the fibration data (total algebra, morphism, module)
        /// as dga.v1
        #[arg(long)]
        emit_model: Option<PathBuf>,
        /// write the report here instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
        /// include base-connection matrices in the report
        #[arg(long, default_value_t = false)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Pages {
            path,
            rmax,
            format,
            output,
            verbose,
        } => cmd_pages(&path, rmax, format, output.as_deref(), verbose),
        Command::Leray {
            input,
            window,
            lambda,
            rmax,
            format,
            emit,
            emit_model,
            output,
            verbose,
        } => cmd_leray(
            &input,
            window,
            &lambda,
            rmax,
            format,
            emit.as_deref(),
            emit_model.as_deref(),
            output.as_deref(),
            verbose,
        ),
    }
}

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_PARSE: u8 = 2;

fn read_input(path: &std::path::Path) -> Result<LoadedInput, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    formats::load_input(&text).map_err(|e| format!("parse error: {e}"))
}

fn cmd_validate(path: &std::path::Path) -> ExitCode {
    let input = match read_input(path) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    match input {
        LoadedInput::Complex {
            complex,
            filtration,
        } => {
            if let Err(defect) = complex.validate() {
                println!("complex invalid: {defect}");
                return ExitCode::from(EXIT_INVALID);
            }
            println!("complex: d∘d = 0 in every degree");
            if let Some(f) = filtration {
                let fc = FilteredComplex::new(complex, f);
                if let Err(defect) = fc.validate() {
                    println!("filtration invalid: {defect}");
                    return ExitCode::from(EXIT_INVALID);
                }
                println!("filtration: d-stable, decreasing, bounded");
            }
            println!("PASS");
            ExitCode::from(EXIT_OK)
        }
        LoadedInput::Dga {
            dga,
            morphism,
            module,
        } => {
            let report = dga.check_axioms();
            if !report.ok() {
                for f in &report.failures {
                    println!("axiom failure: {}: {}", f.check, f.witness);
                }
                return ExitCode::from(EXIT_INVALID);
            }
            println!("dga axioms: {} checks pass", report.checks_run);
            if let Some(m) = morphism {
                let failures = m.validate();
                if !failures.is_empty() {
                    for f in &failures {
                        println!("morphism failure: {}: {}", f.check, f.witness);
                    }
                    return ExitCode::from(EXIT_INVALID);
                }
                println!("morphism: intertwines d and ∧");
            }
            if let Some(m) = module {
                match m.curvature() {
                    Ok(c) if c.is_flat && c.prop34_ok => {
                        println!("module: flat, composition law holds");
                    }
                    Ok(c) => {
                        println!(
                            "module invalid: flat = {}, composition law = {}",
                            c.is_flat, c.prop34_ok
                        );
                        return ExitCode::from(EXIT_INVALID);
                    }
                    Err(e) => {
                        println!("module invalid: {e}");
                        return ExitCode::from(EXIT_INVALID);
                    }
                }
            }
            println!("PASS");
            ExitCode::from(EXIT_OK)
        }
    }
}

fn write_report(text: &str, output: Option<&std::path::Path>) -> ExitCode {
    match output {
        None => {
            print!("{text}");
            ExitCode::from(EXIT_OK)
        }
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => ExitCode::from(EXIT_OK),
            Err(e) => {
                eprintln!("cannot write {}: {e}", path.display());
                ExitCode::from(EXIT_PARSE)
            }
        },
    }
}

fn cmd_pages(
    path: &std::path::Path,
    rmax: usize,
    format: Format,
    output: Option<&std::path::Path>,
    _verbose: bool,
) -> ExitCode {
    if rmax < 1 {
        eprintln!("--rmax must be at least 1");
        return ExitCode::from(EXIT_PARSE);
    }
    let input = match read_input(path) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let LoadedInput::Complex {
        complex,
        filtration: Some(filtration),
    } = input
    else {
        eprintln!("pages needs a complex.v1 file with a filtration block");
        return ExitCode::from(EXIT_PARSE);
    };
    let fc = FilteredComplex::new(complex, filtration);
    if let Err(defect) = fc.validate() {
        println!("invalid input: {defect}");
        return ExitCode::from(EXIT_INVALID);
    }
    let run = match specseq::run(&fc) {
        Ok(r) => r,
        Err(e) => {
            println!("engine error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let report = match PagesReport::from_run(&fc, &run, rmax) {
        Ok(r) => r,
        Err(e) => {
            println!("engine error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let text = match format {
        Format::Md => report.markdown(),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report.json()).expect("serialise")
        ),
    };
    let code = write_report(&text, output);
    if !report.convergence_ok {
        return ExitCode::from(EXIT_INVALID);
    }
    code
}

#[allow(clippy::too_many_arguments)]
fn cmd_leray(
    input: &str,
    window: i64,
    lambda_text: &str,
    rmax: usize,
    format: Format,
    emit: Option<&std::path::Path>,
    emit_model: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
    verbose: bool,
) -> ExitCode {
    if rmax < 1 || window < 1 {
        eprintln!("--rmax and --window must be at least 1");
        return ExitCode::from(EXIT_PARSE);
    }
    let lambda = match parse_scalar(lambda_text) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("bad --lambda: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let (fd, lambda_note) = match input {
        "heisenberg" => match models::heisenberg_fibration(window, lambda.clone()) {
            Ok(fd) => (fd, Some(format_scalar(&lambda))),
            Err(e) => {
                eprintln!("model construction failed: {e}");
                return ExitCode::from(EXIT_PARSE);
            }
        },
        "identity" => {
            if lambda != int(0) {
                eprintln!("--lambda applies to the heisenberg model only");
                return ExitCode::from(EXIT_PARSE);
            }
            match models::identity_fibration(window) {
                Ok(fd) => (fd, None),
                Err(e) => {
                    eprintln!("model construction failed: {e}");
                    return ExitCode::from(EXIT_PARSE);
                }
            }
        }
        path => {
            let loaded = match read_input(std::path::Path::new(path)) {
                Ok(i) => i,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_PARSE);
                }
            };
            let LoadedInput::Dga {
                dga: _dga,
                morphism: Some(morphism),
                module: Some(module),
            } = loaded
            else {
                eprintln!(
                    "leray needs a builtin model name or a dga.v1 file with morphism and module blocks"
                );
                return ExitCode::from(EXIT_PARSE);
            };
            match FibrationData::new(morphism, module) {
                Ok(fd) => (fd, None),
                Err(e) => {
                    println!("invalid fibration data: {e}");
                    return ExitCode::from(EXIT_INVALID);
                }
            }
        }
    };

    let analysis = match LerayAnalysis::new(&fd) {
        Ok(a) => a,
        Err(e) => {
            println!("analysis failed: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(path) = emit {
        let global = analysis.assemble_global();
        let text = formats::filtered_to_json(&global);
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_PARSE);
        }
    }
    if let Some(path) = emit_model {
        let v = formats::DgaV1::from_dga(fd.total())
            .with_morphism(fd.iota())
            .with_module(fd.module());
        if let Err(e) = std::fs::write(path, formats::dga_to_json(&v)) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_PARSE);
        }
    }
    let report = match build_leray_report_from(&analysis, rmax, lambda_note, verbose) {
        Ok(r) => r,
        Err(FibrationError::NotAFibration {
            p,
            q,
            sector,
            source_dim,
            rank,
            target_dim,
        }) => {
            println!(
                "not a differential fibration: the wedge map fails at (p,q) = ({p},{q}), \
                 sector {sector}: source dim {source_dim}, image rank {rank}, target dim {target_dim}"
            );
            return ExitCode::from(EXIT_INVALID);
        }
        Err(e) => {
            println!("pipeline error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let text = match format {
        Format::Md => report.markdown(),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report.json()).expect("serialise")
        ),
    };
    let code = write_report(&text, output);
    if !(report.cross_ok
        && report.convergence_ok
        && report.axioms_total_ok
        && report.axioms_base_ok)
    {
        return ExitCode::from(EXIT_INVALID);
    }
    code
}
