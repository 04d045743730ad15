use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use blowdown::config::search::{bisection_incidences, search_programs, SearchOptions};
use blowdown::config::{run_program, ChainEmbedding, Configuration, PointSpec};
use blowdown::cover::lift_program;
use blowdown::fundgroup::minus_one_sphere_witness;
use blowdown::hjcf::{hj_expand, hj_eval, wahl_chain, wahl_recognize, Chain, Fraction, WahlParams};
use blowdown::lattice::{det_exact, gram, is_negative_definite};
use blowdown::scenario::parse_scenario;
use blowdown::verify::{to_json, to_text, verify, Options, Status};

#[derive(Parser)]
#[command(name = "blowdown", version, about = "Verify rational blow-down constructions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify scenario files; reports are printed in argument order.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Continued-fraction expansion of n/m.
    Expand { n: BigUint, m: BigUint },
    /// Wahl parameters of a chain such as 2,2,9,2,2,2,2,4.
    Recognize { chain: String },
    /// Every Wahl chain up to a length, optionally bounded in p.
    Chains {
        #[arg(long, default_value_t = 6)]
        max_length: usize,
        #[arg(long)]
        max_p: Option<u64>,
    },
    /// Gram matrix of curves of a scenario's blown-up surface.
    Gram {
        file: PathBuf,
        /// Comma-separated curve ids.
        ids: String,
        /// Use the lifted configuration of the `[cover]` section.
        #[arg(long)]
        cover: bool,
    },
    /// Search for blow-ups that continue a scenario's program until its
    /// chains appear; found steps are printed as `[[blowups]]` entries.
    Search {
        file: PathBuf,
        /// Extra blow-ups beyond the scenario's own.
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long, default_value_t = 10)]
        limit: usize,
        /// Also try general points of single curves.
        #[arg(long)]
        free: bool,
        /// Require a (-1)-curve meeting one end of each of the first two chains once.
        #[arg(long)]
        witness: bool,
        /// Replace the bisection incidences by every fibration-consistent
        /// choice with `S1.S2` up to this value.
        #[arg(long)]
        fibration: Option<i64>,
    },
}

enum Outcome {
    Report(String, Status),
    Malformed(String),
}

fn verify_one(path: &PathBuf, format: Format, strict: bool) -> Outcome {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Outcome::Malformed(format!("{}: {e}", path.display())),
    };
    let s = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => return Outcome::Malformed(format!("{}: {e}", path.display())),
    };
    let r = verify(&s, Options { strict });
    let body = match format {
        Format::Json => to_json(&r),
        Format::Text => to_text(&r),
    };
    Outcome::Report(body, r.status)
}

fn cmd_verify(files: &[PathBuf], format: Format, strict: bool) -> ExitCode {
    let outcomes: Vec<Outcome> = std::thread::scope(|sc| {
        let handles: Vec<_> = files
            .iter()
            .map(|f| sc.spawn(move || verify_one(f, format, strict)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("verification thread")).collect()
    });
    let mut code = 0u8;
    for o in outcomes {
        match o {
            Outcome::Report(body, status) => {
                print!("{body}");
                if status != Status::Pass {
                    code = code.max(1);
                }
            }
            Outcome::Malformed(msg) => {
                eprintln!("error: {msg}");
                code = 2;
            }
        }
    }
    ExitCode::from(code)
}

fn cmd_gram(file: &PathBuf, ids: &str, cover: bool) -> Result<(), String> {
    let text = std::fs::read_to_string(file).map_err(|e| e.to_string())?;
    let s = parse_scenario(&text).map_err(|e| e.to_string())?;
    let c = if cover {
        let decl = s.cover.as_ref().ok_or("scenario has no [cover] section")?;
        let lp = lift_program(&s.initial, &s.steps, &decl.decl).map_err(|e| e.to_string())?;
        lp.cover_states.last().cloned().unwrap()
    } else {
        run_program(&s.initial, &s.steps).map_err(|e| e.to_string())?
    };
    let ids: Vec<&str> = ids.split(',').map(str::trim).collect();
    let m = gram(&c, &ids).map_err(|e| e.to_string())?;
    for row in &m.rows {
        println!("{}", row.iter().map(|x| format!("{x:>4}")).collect::<String>());
    }
    println!("det = {}", det_exact(&m));
    println!("negative definite = {}", is_negative_definite(&m));
    Ok(())
}

fn witness_of(c: &Configuration, chains: &[ChainEmbedding]) -> Option<String> {
    let [a, b, ..] = chains else { return None };
    c.curves()
        .map(|cv| cv.id.clone())
        .find(|id| minus_one_sphere_witness(c, a, b, id) == Ok(true))
}

fn step_toml(p: &PointSpec) -> String {
    let mut s = String::from("[[blowups]]\n");
    let at: Vec<String> = p.incidences.iter().map(|(id, _)| format!("{id:?}")).collect();
    if !at.is_empty() {
        s += &format!("at = [{}]\n", at.join(", "));
    }
    if let Some(n) = &p.node_of {
        s += &format!("node_of = {n:?}\n");
    }
    s
}

struct SearchArgs {
    steps: usize,
    limit: usize,
    free: bool,
    witness: bool,
    fibration: Option<i64>,
}

fn cmd_search(file: &PathBuf, a: SearchArgs) -> Result<(), String> {
    let text = std::fs::read_to_string(file).map_err(|e| e.to_string())?;
    let s = parse_scenario(&text).map_err(|e| e.to_string())?;
    let targets: Vec<Chain> = s.chains.iter().map(|c| c.chain.clone()).collect();
    let starts = match a.fibration {
        Some(n) => bisection_incidences(&s.initial, 0..=n),
        None => vec![s.initial.clone()],
    };
    let opts = SearchOptions { max_steps: a.steps, free_points: a.free, limit: a.limit, prune_commuting: true };
    let mut total = 0;
    for start in starts {
        let Ok(c) = run_program(&start, &s.steps) else { continue };
        let mut accept = |c: &Configuration, ch: &[ChainEmbedding]| !a.witness || witness_of(c, ch).is_some();
        for f in search_programs(&c, &targets, &SearchOptions { limit: opts.limit - total, ..opts.clone() }, &mut accept) {
            total += 1;
            println!("# program {total}");
            if a.fibration.is_some() {
                for x in ["S1", "S2"] {
                    let inc: Vec<String> = start.neighbors(x).map(|(y, n)| format!("{x}.{y} = {n}")).collect();
                    println!("# {}", inc.join(", "));
                }
            }
            for e in &f.chains {
                println!("# chain {} on {}", e.target, e.curves.join(","));
            }
            if let Some(w) = witness_of(&f.config, &f.chains) {
                println!("# witness {w}");
            }
            for p in &f.steps {
                println!("{}", step_toml(p));
            }
        }
        if total >= opts.limit {
            break;
        }
    }
    if total == 0 {
        println!("# no program within {} extra steps", a.steps);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res: Result<(), String> = match cli.cmd {
        Cmd::Verify { files, format, strict } => return cmd_verify(&files, format, strict),
        Cmd::Expand { n, m } => Fraction::new(n, m)
            .and_then(|f| hj_expand(&f))
            .map(|c| println!("{c}"))
            .map_err(|e| e.to_string()),
        Cmd::Recognize { chain } => chain.parse::<Chain>().map_err(|e| e.to_string()).map(|c| {
            let f = hj_eval(&c);
            match wahl_recognize(&c) {
                Some(w) => println!("{c} = {f} = {w}"),
                None => println!("{c} = {f}, not a Wahl chain"),
            }
        }),
        Cmd::Chains { max_length, max_p } => {
            let mut rows: Vec<(WahlParams, Chain)> = blowdown::hjcf::wahl_closure(max_length)
                .into_iter()
                .filter_map(|c| wahl_recognize(&c).map(|w| (w, c)))
                .filter(|(w, _)| max_p.map_or(true, |p| w.p <= p))
                .collect();
            rows.sort();
            for (w, c) in rows {
                debug_assert_eq!(wahl_chain(w).as_ref(), Ok(&c));
                println!("{w}\t{}\t{c}", c.len());
            }
            Ok(())
        }
        Cmd::Gram { file, ids, cover } => cmd_gram(&file, &ids, cover),
        Cmd::Search { file, steps, limit, free, witness, fibration } => {
            cmd_search(&file, SearchArgs { steps, limit, free, witness, fibration })
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
