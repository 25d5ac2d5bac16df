use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use deduce::engine::{check_proof, proof_from_json, proof_to_json, render_proof};
use deduce::oracle::{nd_prove, OracleBudget, Verdict};
use deduce::{decide, normalize, parse_problem, Decision, Problem, Sequent, TermBank};

/// Decides whether a goal term is deducible from a set of assumptions
/// modulo the declared equational theories, and emits a checkable proof
/// when it is.
#[derive(Parser)]
#[command(name = "deduce", version, arg_required_else_help = true)]
struct Cli {
    /// Problem file, or a directory of problem files
    path: PathBuf,

    /// Print the proof when the goal is derivable
    #[arg(long, value_enum, value_name = "FORMAT")]
    emit_proof: Option<ProofFormat>,

    /// Re-verify the emitted proof from scratch (with `json`, through a
    /// serialization round trip)
    #[arg(long)]
    check: bool,

    /// Cross-check the outcome against a bounded forward search of the
    /// deducible set
    #[arg(
        long,
        num_args = 0..=1,
        default_missing_value = "8",
        value_name = "DEPTH"
    )]
    oracle_check: Option<u32>,

    /// Print search statistics on stderr
    #[arg(long)]
    stats: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
enum ProofFormat {
    Text,
    Json,
}

/// Exit status: 0 derivable, 1 not derivable, 2 usage or parse error,
/// 3 internal invariant violation.
const EXIT_NOT_DERIVABLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

struct Analysis {
    bank: TermBank,
    problem: Problem,
    decision: Decision,
}

enum RunError {
    /// Unreadable or unparsable input; the caller's fault.
    Input(String),
    /// A broken invariant; our fault.
    Internal(String),
}

fn analyze(path: &Path) -> Result<Analysis, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    let mut bank = TermBank::new();
    let problem = parse_problem(&mut bank, &text)
        .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    let decision = decide(
        &mut bank,
        &problem.catalog,
        &problem.assumptions,
        problem.goal,
    )
    .map_err(|e| RunError::Internal(format!("{}: {e}", path.display())))?;
    Ok(Analysis {
        bank,
        problem,
        decision,
    })
}

/// Returns the oracle verdict, or an error if the oracle found a
/// derivation the engine rejected.
fn oracle_check(a: &mut Analysis, depth: u32) -> Result<Verdict, String> {
    let budget = OracleBudget {
        max_depth: depth as usize,
        ..OracleBudget::default()
    };
    let verdict = nd_prove(
        &mut a.bank,
        &a.problem.catalog,
        &a.problem.assumptions,
        a.problem.goal,
        &budget,
    );
    if verdict == Verdict::Provable && !a.decision.provable {
        return Err(
            "oracle found a derivation for a goal the engine rejected".into(),
        );
    }
    Ok(verdict)
}

fn recheck(a: &mut Analysis, format: ProofFormat) -> Result<(), String> {
    let Some(proof) = a.decision.proof.clone() else {
        return Ok(());
    };
    let cat = a.problem.catalog.clone();
    let gamma: Vec<_> = a
        .problem
        .assumptions
        .iter()
        .map(|&t| normalize(&mut a.bank, &cat, t))
        .collect();
    let goal = normalize(&mut a.bank, &cat, a.problem.goal);
    let expected = Sequent::new(gamma, goal);
    let proof = if format == ProofFormat::Json {
        let json = proof_to_json(&a.bank, &cat, &proof);
        proof_from_json(&mut a.bank, &cat, &json)
            .map_err(|e| format!("proof round trip failed: {e}"))?
    } else {
        proof
    };
    check_proof(&mut a.bank, &cat, &proof, &expected)
        .map_err(|e| format!("proof check failed: {e}"))
}

fn print_stats(a: &Analysis) {
    let s = &a.decision.stats;
    eprintln!("provable={}", a.decision.provable);
    eprintln!("st_size={}", s.st_size);
    eprintln!("sweeps={}", s.sweeps);
    eprintln!("l_steps={}", s.l_steps);
    eprintln!("elem_calls={}", s.elem_calls);
    eprintln!("max_recipe_size={}", s.max_recipe_size);
    if let Some(p) = &a.decision.proof {
        eprintln!("proof_nodes={}", p.node_count());
    }
    eprintln!("wall_ms={:.3}", s.wall.as_secs_f64() * 1e3);
}

fn run_single(cli: &Cli) -> u8 {
    let mut a = match analyze(&cli.path) {
        Ok(a) => a,
        Err(RunError::Input(msg)) => {
            eprintln!("{msg}");
            return EXIT_USAGE;
        }
        Err(RunError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            return EXIT_INTERNAL;
        }
    };

    println!(
        "{}",
        if a.decision.provable {
            "derivable"
        } else {
            "not derivable"
        }
    );

    if let Some(format) = cli.emit_proof {
        if let Some(proof) = &a.decision.proof {
            let rendered = match format {
                ProofFormat::Text => {
                    render_proof(&a.bank, &a.problem.catalog, proof)
                }
                ProofFormat::Json => {
                    proof_to_json(&a.bank, &a.problem.catalog, proof)
                }
            };
            println!("{rendered}");
        }
    }

    if cli.check {
        let format = cli.emit_proof.unwrap_or(ProofFormat::Text);
        if let Err(msg) = recheck(&mut a, format) {
            eprintln!("internal error: {msg}");
            return EXIT_INTERNAL;
        }
        if a.decision.proof.is_some() {
            eprintln!("proof check: ok");
        }
    }

    if let Some(depth) = cli.oracle_check {
        match oracle_check(&mut a, depth) {
            Ok(Verdict::Provable) => eprintln!("oracle: provable"),
            Ok(Verdict::Unknown) => eprintln!("oracle: unknown"),
            Err(msg) => {
                eprintln!("internal error: {msg}");
                return EXIT_INTERNAL;
            }
        }
    }

    if cli.stats {
        print_stats(&a);
    }

    if a.decision.provable {
        0
    } else {
        EXIT_NOT_DERIVABLE
    }
}

fn run_batch(cli: &Cli) -> u8 {
    let entries = match std::fs::read_dir(&cli.path) {
        Ok(it) => it,
        Err(e) => {
            eprintln!("{}: {e}", cli.path.display());
            return EXIT_USAGE;
        }
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        eprintln!("{}: no problem files", cli.path.display());
        return EXIT_USAGE;
    }

    let (mut derivable, mut underivable, mut bad, mut internal) = (0, 0, 0, 0);
    for path in &files {
        let display = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        match analyze(path) {
            Ok(mut a) => {
                let mut status = if a.decision.provable {
                    derivable += 1;
                    "derivable"
                } else {
                    underivable += 1;
                    "not derivable"
                };
                if let Some(depth) = cli.oracle_check {
                    if let Err(msg) = oracle_check(&mut a, depth) {
                        eprintln!("internal error: {}: {msg}", path.display());
                        internal += 1;
                        status = "INTERNAL ERROR";
                    }
                }
                println!("{display}: {status}");
            }
            Err(RunError::Input(msg)) => {
                bad += 1;
                eprintln!("{msg}");
                println!("{display}: parse error");
            }
            Err(RunError::Internal(msg)) => {
                internal += 1;
                eprintln!("internal error: {msg}");
                println!("{display}: INTERNAL ERROR");
            }
        }
    }
    println!(
        "{} checked: {derivable} derivable, {underivable} not derivable, \
         {bad} unreadable, {internal} internal errors",
        files.len()
    );
    if internal > 0 {
        EXIT_INTERNAL
    } else if bad > 0 {
        EXIT_USAGE
    } else {
        0
    }
}

fn main() -> ExitCode {
    // Restore the default SIGPIPE disposition so `deduce f.p | head` dies
    // quietly like any other filter instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    let code = if cli.path.is_dir() {
        run_batch(&cli)
    } else {
        run_single(&cli)
    };
    ExitCode::from(code)
}
