//! Command line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed or unusable
//! input, 3 certification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use etr::error::Error;
use etr::formula::{Fragment, Instance};
use etr::json;
use etr::oracle;
use etr::parser::parse_etr;
use etr::passes::pipeline::{lower, PipelineOutput};
use etr::passes::{PassReport, TowerMode};
use etr::range::certify_instance;
use etr::rational::{parse_rat, rat};
use etr::witness::{round_trip_check, RoundTrip};

#[derive(Parser)]
#[command(name = "etr", version, about = "Lowers existential real-arithmetic formulas through restricted fragments, with witness maps and interval certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stage {
    Conj,
    Compact,
    Ami,
    Small,
    Shift,
    Square,
    Inv,
}

impl Stage {
    fn fragment(self) -> Fragment {
        match self {
            Stage::Conj => Fragment::Conj,
            Stage::Compact => Fragment::Compact,
            Stage::Ami => Fragment::Ami,
            Stage::Small => Fragment::Small,
            Stage::Shift => Fragment::Shift,
            Stage::Square => Fragment::Square,
            Stage::Inv => Fragment::Inv,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula file and print the instance as JSON.
    Parse {
        /// Path to a text file holding a formula, e.g. "x * y - 1 = 0 /\ x >= 0".
        input: PathBuf,
    },
    /// Lower a formula or instance to a target stage.
    Reduce {
        /// Formula text file, or an instance JSON file.
        input: PathBuf,
        #[arg(long, value_enum)]
        target: Stage,
        /// Slack width of the target instance; required for small and the
        /// interval stages.
        #[arg(long)]
        delta: Option<String>,
        /// Tower sizing: "paper" for size-derived heights, "test:<h>" for a
        /// fixed height h.
        #[arg(long, default_value = "test:6")]
        tower: String,
        /// Directory for instance.json, witness.json and reports.jsonl;
        /// stdout gets the instance alone when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a witness map: forward image solves the instance, backward
    /// returns the point.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        /// JSON array of rationals, a claimed solution of the original.
        #[arg(long)]
        point: PathBuf,
    },
    /// Re-derive interval certificates for an interval-stage instance.
    Certify {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Reference generators and brute-force search.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Generate an instance with a planted solution.
    Planted {
        /// One of: etr, ami, small, shift, square, inv.
        #[arg(long)]
        fragment: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Exhaustive grid search for solutions of an instance.
    Grid {
        #[arg(long)]
        instance: PathBuf,
        /// Half-width of the symmetric search cube.
        #[arg(long, default_value = "1")]
        bound: String,
        #[arg(long, default_value_t = 4)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if budget_root(&e) {
                eprintln!(
                    "note: size-derived tower constants cannot be written out as plain \
                     rationals; rerun with --tower test:<height> to apply the maps"
                );
            }
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn budget_root(e: &Error) -> bool {
    match e {
        Error::BudgetExceeded { .. } => true,
        Error::Stage { source, .. } => budget_root(source),
        _ => false,
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::GadgetCertification(_) => 3,
        Error::Stage { source, .. } => exit_code_for(source),
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(Error::from)
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Json(e.to_string()))?;
        json::instance_from_json(&v)
    } else {
        let (f, vars) = parse_etr(&text)?;
        Ok(Instance::from_formula(f, vars))
    }
}

fn parse_tower(text: &str) -> Result<TowerMode, Error> {
    if text == "paper" {
        return Ok(TowerMode::PaperExact);
    }
    if let Some(h) = text.strip_prefix("test:") {
        let h: u32 = h
            .parse()
            .map_err(|_| Error::Param(format!("bad tower height {h:?}")))?;
        return Ok(TowerMode::Test(h));
    }
    Err(Error::Param(format!(
        "tower must be \"paper\" or \"test:<height>\", got {text:?}"
    )))
}

fn report_json(r: &PassReport) -> serde_json::Value {
    serde_json::json!({
        "stage": r.stage,
        "input_length": r.input_length,
        "output_length": r.output_length,
        "new_vars": r.new_vars,
        "constraint_count": r.constraint_count,
        "tower_height": r.tower_height,
        "elapsed_us": r.elapsed.as_micros() as u64,
    })
}

fn write_pipeline(out: &PipelineOutput, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("instance.json"),
        serde_json::to_string_pretty(&json::instance_to_json(&out.instance))
            .map_err(|e| Error::Json(e.to_string()))?,
    )?;
    fs::write(
        dir.join("witness.json"),
        serde_json::to_string_pretty(&json::witness_to_json(&out.witness))
            .map_err(|e| Error::Json(e.to_string()))?,
    )?;
    let mut lines = String::new();
    for r in &out.reports {
        lines.push_str(&report_json(r).to_string());
        lines.push('\n');
    }
    fs::write(dir.join("reports.jsonl"), lines)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Parse { input } => {
            let text = read(&input)?;
            let (f, vars) = parse_etr(&text)?;
            let inst = Instance::from_formula(f, vars);
            println!(
                "{}",
                serde_json::to_string_pretty(&json::instance_to_json(&inst))
                    .map_err(|e| Error::Json(e.to_string()))?
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Reduce {
            input,
            target,
            delta,
            tower,
            out_dir,
        } => {
            let inst = load_instance(&input)?;
            let delta = delta.as_deref().map(parse_rat).transpose()?;
            let tower = parse_tower(&tower)?;
            let out = lower(&inst, target.fragment(), delta.as_ref(), tower)?;
            for r in &out.reports {
                eprintln!(
                    "{}: length {} -> {}, {} new vars, {} constraints",
                    r.stage, r.input_length, r.output_length, r.new_vars, r.constraint_count
                );
            }
            match out_dir {
                Some(dir) => write_pipeline(&out, &dir)?,
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&json::instance_to_json(&out.instance))
                        .map_err(|e| Error::Json(e.to_string()))?
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            instance,
            witness,
            point,
        } => {
            let inst = load_instance(&instance)?;
            let wtext = read(&witness)?;
            let wv: serde_json::Value =
                serde_json::from_str(&wtext).map_err(|e| Error::Json(e.to_string()))?;
            let w = json::witness_from_json(&wv)?;
            let ptext = read(&point)?;
            let pv: serde_json::Value =
                serde_json::from_str(&ptext).map_err(|e| Error::Json(e.to_string()))?;
            let p = json::point_from_json(&pv)?;
            match round_trip_check(&w, &inst, &p) {
                RoundTrip::Ok => {
                    println!("ok");
                    Ok(ExitCode::SUCCESS)
                }
                RoundTrip::Undefined(msg) => {
                    println!("undefined: {msg}");
                    Ok(ExitCode::from(1))
                }
                RoundTrip::Failed(msg) => {
                    println!("failed: {msg}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Certify { instance } => {
            let inst = load_instance(&instance)?;
            let report = certify_instance(&inst)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json::certification_to_json(&report))
                    .map_err(|e| Error::Json(e.to_string()))?
            );
            if report.ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Cmd::Oracle { cmd } => run_oracle(cmd),
    }
}

fn run_oracle(cmd: OracleCmd) -> Result<ExitCode, Error> {
    match cmd {
        OracleCmd::Planted {
            fragment,
            seed,
            out_dir,
        } => {
            let planted = match fragment.as_str() {
                "etr" => oracle::planted_etr(3, 4, seed),
                "ami" => oracle::planted_ami(3, 5, seed),
                "small" => oracle::planted_small(&rat(1, 64), 3, 5, seed),
                "shift" => oracle::planted_interval(Fragment::Shift, seed)?,
                "square" => oracle::planted_interval(Fragment::Square, seed)?,
                "inv" => oracle::planted_interval(Fragment::Inv, seed)?,
                other => {
                    return Err(Error::Param(format!(
                        "no planted generator for {other:?}; use etr, ami, small, shift, square or inv"
                    )))
                }
            };
            let inst_json = json::instance_to_json(&planted.instance);
            let point_json = json::point_to_json(&planted.point);
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(
                        dir.join("instance.json"),
                        serde_json::to_string_pretty(&inst_json)
                            .map_err(|e| Error::Json(e.to_string()))?,
                    )?;
                    fs::write(
                        dir.join("point.json"),
                        serde_json::to_string_pretty(&point_json)
                            .map_err(|e| Error::Json(e.to_string()))?,
                    )?;
                }
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "instance": inst_json,
                        "point": point_json,
                    }))
                    .map_err(|e| Error::Json(e.to_string()))?
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        OracleCmd::Grid {
            instance,
            bound,
            steps,
        } => {
            let inst = load_instance(&instance)?;
            let bound = parse_rat(&bound)?;
            let grid = oracle::GridSpec::symmetric(bound, steps);
            let sols = oracle::sample_solutions(&inst, &grid)?;
            let arr: Vec<serde_json::Value> =
                sols.iter().map(|p| json::point_to_json(p)).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Array(arr))
                    .map_err(|e| Error::Json(e.to_string()))?
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
