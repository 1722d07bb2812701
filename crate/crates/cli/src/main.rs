//! `crn`: analysis of mass-action networks from the command line.
//!
//! Network arguments are JSON files or `@name` for a bundled fixture. Reports
//! go to stdout as one JSON document. Exit status is 0 when the checked
//! property holds, 2 when it fails or is undecided, 1 on error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use crn_core::balance::{self, BALANCE_TOL};
use crn_core::dynamics::{self, IntegrateOptions, LimitCycleOptions, Trajectory};
use crn_core::equivalence::{self, LocusSpec, MembershipOptions, MembershipResult, Verdict, DE_TOL};
use crn_core::network::{parse_network, serialize_network, MassActionSystem};
use crn_core::transforms::{self, AffineMap, ProjectiveMap};
use crn_core::{fixtures, geometry, linalg, CrnError};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "crn", version, about = "Analyze mass-action reaction networks embedded in Euclidean space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural, balance and geometric summary of a network.
    Analyze { network: String },
    /// Are two systems dynamically equivalent?
    CheckDe {
        a: String,
        b: String,
        #[arg(long, default_value_t = DE_TOL)]
        tol: f64,
    },
    /// Is the system complex balanced?
    CheckCb { network: String },
    /// Is the system detailed balanced?
    CheckDb { network: String },
    /// Is the system disguised toric (or disguised detailed balanced)?
    CheckDisguised {
        network: String,
        /// Realize with reversible pairs instead of weakly reversible components.
        #[arg(long)]
        detailed: bool,
        /// Known positive steady state, comma separated.
        #[arg(long, value_name = "X")]
        steady_state: Option<String>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Apply an affine or projective map to a network.
    Transform {
        network: String,
        #[arg(long, value_name = "MAP", conflicts_with = "projective", required_unless_present = "projective")]
        affine: Option<String>,
        #[arg(long, value_name = "MAP")]
        projective: Option<String>,
        /// Apply the inverse of the given map.
        #[arg(long)]
        inverse: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership verdicts over random rate vectors, as CSV.
    SampleLocus {
        network: String,
        /// `lo:hi` for every edge, or one comma-separated `lo:hi` per edge.
        #[arg(long, default_value = "0.01:100")]
        ranges: String,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vector-field grid and trajectories, as CSV or SVG (by extension).
    Portrait {
        network: String,
        /// `lo:hi` per species, comma separated.
        #[arg(long, default_value = "0.05:3,0.05:3")]
        window: String,
        #[arg(long, default_value_t = 15)]
        grid: usize,
        /// Initial states separated by `;`, each comma separated.
        #[arg(long)]
        trajectories: Option<String>,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the mass-action ODE from an initial state.
    Integrate {
        network: String,
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
        /// Also run the limit-cycle heuristic from `x0`.
        #[arg(long)]
        detect_cycle: bool,
        /// Trajectory CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SeedArg {
    /// Defaults to `$CRN_SEED`, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> Result<u64, String> {
        match self.seed {
            Some(s) => Ok(s),
            None => match std::env::var("CRN_SEED") {
                Ok(v) => v.trim().parse().map_err(|_| format!("CRN_SEED is not an integer: {v:?}")),
                Err(_) => Ok(0),
            },
        }
    }
}

enum Outcome {
    Holds,
    Fails,
    Done,
}

struct Input {
    name: String,
    text: String,
}

impl Input {
    fn read(name: &str) -> Result<Self, String> {
        let text = match name.strip_prefix('@') {
            Some(fixture) => fixtures::text(fixture)
                .ok_or_else(|| format!("unknown fixture `{fixture}`; known: {}", fixtures::NAMES.join(", ")))?
                .to_string(),
            None => fs::read_to_string(name).map_err(|e| format!("{name}: {e}"))?,
        };
        Ok(Self { name: name.to_string(), text })
    }

    fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }

    fn system(&self) -> Result<MassActionSystem, String> {
        parse_network(&self.text).map_err(|e| format!("{}: {e}", self.name))
    }
}

fn core(e: CrnError) -> String {
    e.to_string()
}

fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect()
}

fn parse_ranges(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|part| {
            let (lo, hi) = part.split_once(':').ok_or_else(|| format!("expected lo:hi, got {part:?}"))?;
            let lo = lo.trim().parse::<f64>().map_err(|_| format!("bad bound {lo:?}"))?;
            let hi = hi.trim().parse::<f64>().map_err(|_| format!("bad bound {hi:?}"))?;
            if lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
                return Err(format!("empty range {part:?}"));
            }
            Ok((lo, hi))
        })
        .collect()
}

fn network_json(sys: &MassActionSystem) -> Value {
    serde_json::from_str(&serialize_network(sys)).expect("serialized network is valid JSON")
}

fn membership_json(r: &MembershipResult) -> Value {
    json!({
        "verdict": r.verdict,
        "steady_state": r.steady_state,
        "certificate": r.realization.as_ref().map(network_json),
        "diagnostics": r.diagnostics,
    })
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn analyze(input: &Input, report: &mut Map<String, Value>) -> Result<Outcome, String> {
    let sys = input.system()?;
    let g = sys.network();
    let endotactic = geometry::is_endotactic(g).ok();
    let strongly = geometry::is_strongly_endotactic(g).ok();
    let cb = balance::is_complex_balanced(&sys, BALANCE_TOL).map_err(core)?;
    let db = balance::is_detailed_balanced(&sys, BALANCE_TOL).map_err(core)?;
    report.insert(
        "network".into(),
        json!({
            "dimension": g.dimension(),
            "vertices": g.num_vertices(),
            "edges": g.num_edges(),
            "sources": g.source_vertices(),
            "linkage_classes": g.linkage_classes(),
            "weakly_reversible": g.is_weakly_reversible(),
            "reversible": g.is_reversible(),
            "stoichiometric_dimension": g.stoichiometric_subspace().dim(),
            "conservation_laws": g.conservation_laws().vectors,
        }),
    );
    report.insert(
        "verdicts".into(),
        json!({
            "endotactic": endotactic,
            "strongly_endotactic": strongly,
            "complex_balanced": cb.balanced,
            "detailed_balanced": db.balanced,
        }),
    );
    report.insert(
        "witnesses".into(),
        json!({ "complex_balanced": cb.witness, "detailed_balanced": db.witness }),
    );
    report.insert(
        "residuals".into(),
        json!({ "complex_balanced": cb.residual, "detailed_balanced": db.residual }),
    );
    Ok(Outcome::Done)
}

fn check_balance(input: &Input, detailed: bool, report: &mut Map<String, Value>) -> Result<Outcome, String> {
    let sys = input.system()?;
    let r = if detailed {
        balance::is_detailed_balanced(&sys, BALANCE_TOL)
    } else {
        balance::is_complex_balanced(&sys, BALANCE_TOL)
    }
    .map_err(core)?;
    let key = if detailed { "detailed_balanced" } else { "complex_balanced" };
    report.insert("verdicts".into(), json!({ key: r.balanced }));
    report.insert("witness".into(), json!(r.witness));
    report.insert("residual".into(), json!(r.residual));
    Ok(if r.balanced { Outcome::Holds } else { Outcome::Fails })
}

fn transform(
    input: &Input,
    affine: Option<&str>,
    projective: Option<&str>,
    inverse: bool,
    out: Option<&Path>,
    report: &mut Map<String, Value>,
) -> Result<Outcome, String> {
    let sys = input.system()?;
    let image = match (affine, projective) {
        (Some(name), _) => {
            let mut a = match name {
                "@doubletargets" => transforms::doubletargets_map(),
                "@multistationarity" => transforms::multistationarity_map(),
                _ => AffineMap::from_json(&Input::read(name)?.text).map_err(core)?,
            };
            if inverse {
                a = a.inverse().map_err(core)?;
            }
            report.insert("map".into(), a.to_json());
            transforms::apply_affine(&a, &sys).map_err(core)?
        }
        (None, Some(name)) => {
            let mut p = match name {
                "@fig7" => transforms::fig7_projective_map(),
                _ => ProjectiveMap::from_json(&Input::read(name)?.text).map_err(core)?,
            };
            if inverse {
                let inv = linalg::inverse(p.coefficients()).ok_or("projective map is singular")?;
                p = ProjectiveMap::new(inv).map_err(core)?;
            }
            report.insert("map".into(), p.to_json());
            transforms::apply_projective(&p, &sys).map_err(core)?
        }
        (None, None) => return Err("one of --affine or --projective is required".into()),
    };
    if let Some(path) = out {
        write_file(path, &serialize_network(&image))?;
        report.insert("out".into(), json!(path.display().to_string()));
    }
    report.insert("network".into(), network_json(&image));
    Ok(Outcome::Done)
}

fn sample_locus(
    input: &Input,
    ranges: &str,
    count: usize,
    seed: u64,
    out: Option<&Path>,
    report: &mut Map<String, Value>,
) -> Result<Outcome, String> {
    let sys = input.system()?;
    let g = sys.network();
    let mut ranges = parse_ranges(ranges)?;
    if ranges.len() == 1 {
        ranges = vec![ranges[0]; g.num_edges()];
    }
    let rows = equivalence::sample_disguised_locus(g, &LocusSpec::Random { ranges, count, seed }).map_err(core)?;
    let mut csv: Vec<String> = (1..=g.num_edges()).map(|k| format!("k{k}")).collect();
    csv.push("verdict".into());
    let mut text = csv.join(",") + "\n";
    let mut tally = Map::new();
    for row in &rows {
        let verdict = format!("{:?}", row.verdict);
        let entry = tally.entry(verdict.clone()).or_insert(json!(0));
        *entry = json!(entry.as_u64().unwrap_or(0) + 1);
        let fields: Vec<String> = row.rates.iter().map(|r| format!("{r:e}")).collect();
        text += &format!("{},{verdict}\n", fields.join(","));
    }
    report.insert("seed".into(), json!(seed));
    report.insert("count".into(), json!(rows.len()));
    report.insert("verdicts".into(), Value::Object(tally));
    match out {
        Some(path) => {
            write_file(path, &text)?;
            report.insert("out".into(), json!(path.display().to_string()));
        }
        None => {
            emit(&text);
            report.clear();
        }
    }
    Ok(Outcome::Done)
}

fn portrait(
    input: &Input,
    window: &str,
    grid: usize,
    trajectories: Option<&str>,
    t_end: f64,
    out: Option<&Path>,
    report: &mut Map<String, Value>,
) -> Result<Outcome, String> {
    let sys = input.system()?;
    let window = parse_ranges(window)?;
    let starts: Vec<Vec<f64>> = match trajectories {
        Some(t) => t.split(';').filter(|s| !s.trim().is_empty()).map(parse_vector).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let trajs: Vec<Trajectory> = starts
        .iter()
        .map(|x0| dynamics::integrate(&sys, x0, t_end, &IntegrateOptions::default()))
        .collect::<Result<_, _>>()
        .map_err(core)?;
    let samples = dynamics::vector_field_grid(&sys, &window, grid).map_err(core)?;
    report.insert("grid_points".into(), json!(samples.len()));
    report.insert(
        "trajectories".into(),
        json!(trajs.iter().map(|t| json!({ "status": t.status, "final": t.last() })).collect::<Vec<_>>()),
    );
    let Some(path) = out else {
        emit(&dynamics::vector_field_csv(&samples));
        report.clear();
        return Ok(Outcome::Done);
    };
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) {
        write_file(path, &dynamics::portrait_svg(&sys, &window, grid, &trajs).map_err(core)?)?;
    } else {
        write_file(path, &dynamics::vector_field_csv(&samples))?;
        let mut extra = Vec::new();
        for (k, t) in trajs.iter().enumerate() {
            let p = path.with_extension(format!("traj{k}.csv"));
            write_file(&p, &dynamics::trajectory_csv(t))?;
            extra.push(p.display().to_string());
        }
        report.insert("trajectory_files".into(), json!(extra));
    }
    report.insert("out".into(), json!(path.display().to_string()));
    Ok(Outcome::Done)
}

#[allow(clippy::too_many_arguments)]
fn integrate(
    input: &Input,
    x0: &str,
    t_end: f64,
    rtol: Option<f64>,
    atol: Option<f64>,
    detect_cycle: bool,
    out: Option<&Path>,
    report: &mut Map<String, Value>,
) -> Result<Outcome, String> {
    let sys = input.system()?;
    let x0 = parse_vector(x0)?;
    let mut opts = IntegrateOptions::default();
    opts.rtol = rtol.unwrap_or(opts.rtol);
    opts.atol = atol.unwrap_or(opts.atol);
    let traj = dynamics::integrate(&sys, &x0, t_end, &opts).map_err(core)?;
    report.insert("status".into(), json!(traj.status));
    report.insert("steps".into(), json!(traj.times.len().saturating_sub(1)));
    report.insert("final_time".into(), json!(traj.times.last()));
    report.insert("final_state".into(), json!(traj.last()));
    if let Some(path) = out {
        write_file(path, &dynamics::trajectory_csv(&traj))?;
        report.insert("out".into(), json!(path.display().to_string()));
    }
    if detect_cycle {
        let c = dynamics::detect_limit_cycle(&sys, &x0, &LimitCycleOptions::default()).map_err(core)?;
        report.insert(
            "limit_cycle".into(),
            json!({
                "verdict": c.verdict,
                "returns": c.returns.len(),
                "return_distances": c.return_distances,
                "diameter": c.diameter,
                "final_residual": c.final_residual,
            }),
        );
    }
    Ok(Outcome::Done)
}

fn run(cli: &Cli, argv: &[String], report: &mut Map<String, Value>) -> Result<Outcome, String> {
    report.insert("command".into(), json!(argv));
    let mut digests = Map::new();
    let mut load = |name: &str| -> Result<Input, String> {
        let input = Input::read(name)?;
        digests.insert(name.to_string(), json!(input.digest()));
        Ok(input)
    };
    let outcome = match &cli.command {
        Command::Analyze { network } => analyze(&load(network)?, report),
        Command::CheckDe { a, b, tol } => {
            let (a, b) = (load(a)?.system()?, load(b)?.system()?);
            let holds = equivalence::dynamically_equivalent(&a, &b, *tol).map_err(core)?;
            report.insert("verdicts".into(), json!({ "dynamically_equivalent": holds }));
            Ok(if holds { Outcome::Holds } else { Outcome::Fails })
        }
        Command::CheckCb { network } => check_balance(&load(network)?, false, report),
        Command::CheckDb { network } => check_balance(&load(network)?, true, report),
        Command::CheckDisguised {
            network,
            detailed,
            steady_state,
            seed,
        } => {
            let sys = load(network)?.system()?;
            let opts = MembershipOptions {
                steady_state: steady_state.as_deref().map(parse_vector).transpose()?,
                seed: seed.resolve()?,
            };
            let r = if *detailed {
                equivalence::is_disguised_detailed_balanced(&sys, &opts)
            } else {
                equivalence::is_disguised_toric(&sys, &opts)
            }
            .map_err(core)?;
            report.insert("seed".into(), json!(opts.seed));
            report.insert("verdicts".into(), membership_json(&r));
            Ok(if r.verdict == Verdict::Member { Outcome::Holds } else { Outcome::Fails })
        }
        Command::Transform {
            network,
            affine,
            projective,
            inverse,
            out,
        } => transform(
            &load(network)?,
            affine.as_deref(),
            projective.as_deref(),
            *inverse,
            out.as_deref(),
            report,
        ),
        Command::SampleLocus {
            network,
            ranges,
            count,
            seed,
            out,
        } => sample_locus(&load(network)?, ranges, *count, seed.resolve()?, out.as_deref(), report),
        Command::Portrait {
            network,
            window,
            grid,
            trajectories,
            t_end,
            out,
        } => portrait(
            &load(network)?,
            window,
            *grid,
            trajectories.as_deref(),
            *t_end,
            out.as_deref(),
            report,
        ),
        Command::Integrate {
            network,
            x0,
            t_end,
            rtol,
            atol,
            detect_cycle,
            out,
        } => integrate(
            &load(network)?,
            x0,
            *t_end,
            *rtol,
            *atol,
            *detect_cycle,
            out.as_deref(),
            report,
        ),
    }?;
    if !report.is_empty() {
        report.insert("input_sha256".into(), Value::Object(digests));
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = Map::new();
    let result = run(&cli, &argv[1..], &mut report);
    match result {
        Ok(outcome) => {
            if !report.is_empty() {
                report.insert("elapsed_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
                emit(&(serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes") + "\n"));
            }
            match outcome {
                Outcome::Holds | Outcome::Done => ExitCode::SUCCESS,
                Outcome::Fails => ExitCode::from(2),
            }
        }
        Err(message) => {
            eprintln!("crn: {message}");
            ExitCode::from(1)
        }
    }
}
