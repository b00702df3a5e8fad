//! Batch analyses over source files of the probabilistic language.
//!
//! Exit codes: 0 success, 1 analysis verdict "not equivalent",
//! 2 input error, 3 resource cap exceeded.

use clap::{Args, Parser, Subcommand};
use pcfl::cli::{self, Config};
use pcfl::equivalence::Verdict;
use pcfl::rational::format_rational;

#[derive(Parser)]
#[command(name = "pcfl", version, about = "probabilistic PCF analyses", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Bounds {
    /// Evaluator fuel (derivation depth / path length)
    #[arg(long, default_value_t = 32)]
    fuel: u64,
    /// Size bound for enumerated argument values
    #[arg(long, default_value_t = 2)]
    arg_size: usize,
    /// Exploration depth of chain fragments
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Maximum prefix depth of searched tests
    #[arg(long, default_value_t = 4)]
    test_depth: usize,
    /// Hard cap on fragment states
    #[arg(long, default_value_t = 100_000)]
    state_cap: usize,
}

impl Bounds {
    fn config(&self) -> Config {
        Config {
            fuel: self.fuel,
            arg_size: self.arg_size,
            depth: self.depth,
            test_depth: self.test_depth,
            state_cap: self.state_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a file and report its type
    Check {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a closed program to a value distribution
    Eval {
        file: String,
        #[arg(long, default_value_t = 32)]
        fuel: u64,
        #[arg(long)]
        json: bool,
    },
    /// Bounded behavioural-equivalence verdict for two programs
    Equiv {
        left: String,
        right: String,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
    },
    /// Per-direction simulation report for two programs
    Sim {
        left: String,
        right: String,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
    },
    /// Search for a test telling two programs apart
    Distinguish {
        left: String,
        right: String,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
    },
    /// Compile a test into its program and value contexts
    CompileTest {
        test: String,
        r#type: String,
        #[arg(long)]
        json: bool,
    },
    /// Translate a program into the untyped calculus
    Embed {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Solve a probability-assignment instance (JSON file or `-`)
    Disentangle {
        input: String,
        #[arg(long)]
        json: bool,
    },
}

fn run() -> Result<i32, cli::CliError> {
    let args = Cli::parse();
    match args.command {
        Command::Check { file, json } => {
            let report = cli::cmd_check(&file)?;
            if json {
                println!("{}", report);
            } else {
                println!("{} : {}", report["term"].as_str().unwrap(), report["type"].as_str().unwrap());
            }
            Ok(0)
        }
        Command::Eval { file, fuel, json } => {
            let dist = cli::cmd_eval(&file, fuel)?;
            if json {
                println!("{}", dist);
            } else {
                println!("mass {}", dist["mass"].as_str().unwrap());
                for entry in dist["support"].as_array().unwrap() {
                    println!("  {}  {}", entry["prob"].as_str().unwrap(), entry["value"].as_str().unwrap());
                }
            }
            Ok(0)
        }
        Command::Equiv { left, right, bounds, json } => {
            let verdict = cli::cmd_equiv(&left, &right, &bounds.config())?;
            if json {
                println!("{}", verdict.to_json());
            } else {
                match &verdict {
                    Verdict::EquivalentUpToBound { .. } => println!("equivalent up to bound"),
                    Verdict::NotEquivalent { witness, p_left, p_right } => println!(
                        "not equivalent: test {} succeeds with {} vs {}",
                        witness,
                        format_rational(p_left),
                        format_rational(p_right)
                    ),
                }
            }
            Ok(match verdict {
                Verdict::NotEquivalent { .. } => 1,
                _ => 0,
            })
        }
        Command::Sim { left, right, bounds, json } => {
            let report = cli::cmd_sim(&left, &right, &bounds.config())?;
            if json {
                println!("{}", report);
            } else {
                println!(
                    "left <= right: {}\nright <= left: {}",
                    report["left_below_right"].as_str().unwrap(),
                    report["right_below_left"].as_str().unwrap()
                );
            }
            let refuted = report["left_below_right"] == "refuted" || report["right_below_left"] == "refuted";
            Ok(if refuted { 1 } else { 0 })
        }
        Command::Distinguish { left, right, bounds, json } => {
            match cli::cmd_distinguish(&left, &right, &bounds.config())? {
                Some((test, p_left, p_right)) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "witness_test": test.to_string(),
                                "p_left": format_rational(&p_left),
                                "p_right": format_rational(&p_right),
                            })
                        );
                    } else {
                        println!(
                            "{}  ({} vs {})",
                            test,
                            format_rational(&p_left),
                            format_rational(&p_right)
                        );
                    }
                    Ok(1)
                }
                None => {
                    if json {
                        println!("{}", serde_json::json!({ "witness_test": null }));
                    } else {
                        println!("none");
                    }
                    Ok(0)
                }
            }
        }
        Command::CompileTest { test, r#type, json } => {
            let report = cli::cmd_compile_test(&test, &r#type)?;
            if json {
                println!("{}", report);
            } else {
                println!("program context: {}", report["program_context"].as_str().unwrap());
                println!("value context:   {}", report["value_context"].as_str().unwrap());
            }
            Ok(0)
        }
        Command::Embed { file, json } => {
            let out = cli::cmd_embed(&file)?;
            if json {
                println!("{}", serde_json::json!({ "untyped": out }));
            } else {
                println!("{}", out);
            }
            Ok(0)
        }
        Command::Disentangle { input, json } => {
            let raw = if input == "-" {
                use std::io::Read;
                let mut buf = String::new();
                std::io::stdin()
                    .read_to_string(&mut buf)
                    .map_err(|e| cli::CliError::Input { path: "<stdin>".into(), message: e.to_string() })?;
                buf
            } else {
                std::fs::read_to_string(&input)
                    .map_err(|e| cli::CliError::Input { path: input.clone(), message: e.to_string() })?
            };
            let out = cli::cmd_disentangle(&raw)?;
            let _ = json; // output is always JSON for this command
            println!("{}", out);
            Ok(0)
        }
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("pcfl: {}", e);
            std::process::exit(e.exit_code());
        }
    }
}
