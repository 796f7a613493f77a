//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::SolveError;
use crate::fubini_study::{fs_lambda_report, fs_ma_nakano_check, FSPoint};
use crate::io::{self, InstanceJson, IoError};
use crate::mav::{continuity_solve, mav_residual, VortexConfig, VortexProblem};
use crate::positivity::{chern_gap, griffiths_check, ma_check, nakano_check, wedge_square};
use crate::vortex::{cp1_sample_points, ma_slopes, verify_solution, VortexSolution};

pub const MANIFEST_SCHEMA: &str = "vbma-1";
pub const REPORT_FILE: &str = "report.json";
pub const VERIFICATION_FILE: &str = "verification.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vbma", version, about = "Vector-bundle Monge-Ampere toolkit")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the vortex equation by continuation and write a solution directory.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover f2 and verify the vortex-bundle solution.
    Verify {
        #[arg(long)]
        solution: PathBuf,
        /// Random CP^1 chart points in addition to the origin.
        #[arg(long, default_value_t = 4)]
        cp1_points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Pointwise positivity checks of an instance file.
    Positivity {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Fubini-Study curvature power and positivity checks.
    FsCheck {
        #[arg(long)]
        n: usize,
        /// Random chart points in addition to the origin.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
    },
    /// Exact slope arithmetic for the vortex bundle.
    Slopes {
        #[arg(long)]
        r1: u32,
        #[arg(long)]
        r2: u32,
    },
    /// Write psi, |phi|^2 and the residual of a solution as CSV.
    Dump {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Verify { .. } => "verify",
            Command::Positivity { .. } => "positivity",
            Command::FsCheck { .. } => "fs-check",
            Command::Slopes { .. } => "slopes",
            Command::Dump { .. } => "dump",
        }
    }
}

/// Record of one invocation, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Value,
    pub outputs: Vec<String>,
}

struct Outcome {
    code: i32,
    body: Value,
    summary: String,
}

fn input_error(msg: impl ToString) -> Outcome {
    Outcome {
        code: EXIT_INPUT,
        body: json!({"error": {"kind": "ConfigParseError", "message": msg.to_string()}}),
        summary: format!("input error: {}", msg.to_string()),
    }
}

fn io_error(e: IoError) -> Outcome {
    let kind = match e {
        IoError::SchemaMismatch(_) => "SchemaMismatch",
        IoError::Io { .. } => "IoError",
        _ => "ConfigParseError",
    };
    Outcome {
        code: EXIT_INPUT,
        body: json!({"error": {"kind": kind, "message": e.to_string()}}),
        summary: format!("input error: {e}"),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> i32 {
    let mut outputs = Vec::new();
    let (inputs, outcome) = match &cli.command {
        Command::Solve { config, out: dir } => (
            json!({"config": path_str(config), "out": path_str(dir)}),
            solve(config, dir, &mut outputs),
        ),
        Command::Verify {
            solution,
            cp1_points,
            seed,
        } => (
            json!({"solution": path_str(solution), "cp1_points": cp1_points, "seed": seed}),
            verify(solution, *cp1_points, *seed, &mut outputs),
        ),
        Command::Positivity { input, samples } => (
            json!({"input": path_str(input), "samples": samples}),
            positivity(input, *samples),
        ),
        Command::FsCheck { n, samples, seed } => (
            json!({"n": n, "samples": samples, "seed": seed}),
            fs_check(*n, *samples, *seed),
        ),
        Command::Slopes { r1, r2 } => (json!({"r1": r1, "r2": r2}), slopes(*r1, *r2)),
        Command::Dump { solution, out: dir } => (
            json!({"solution": path_str(solution), "out": path_str(dir)}),
            dump(solution, dir, &mut outputs),
        ),
    };
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        command: cli.command.name(),
        inputs,
        outputs,
    };
    let mut doc = json!({"manifest": manifest, "exit_code": outcome.code});
    if let (Value::Object(dst), Value::Object(src)) = (&mut doc, outcome.body) {
        dst.extend(src);
    }
    let text = if cli.json {
        serde_json::to_string_pretty(&doc).expect("serializable")
    } else {
        outcome.summary
    };
    let _ = writeln!(out, "{text}");
    outcome.code
}

fn solve(config: &Path, dir: &Path, outputs: &mut Vec<String>) -> Outcome {
    let cfg: VortexConfig = match io::read_json(config) {
        Ok(c) => c,
        Err(e) => return io_error(e),
    };
    if let Err(e) = cfg.validate() {
        return input_error(e);
    }
    if let Err(e) = std::fs::create_dir_all(dir) {
        return input_error(format!("{}: {e}", dir.display()));
    }
    let result = continuity_solve(&cfg);
    let report = match &result {
        Ok(r) => Some(r),
        Err(e) => e.report(),
    };
    let mut body = json!({
        "config": cfg,
        "juncture_target": cfg.juncture_target(),
    });
    if let Some(r) = report {
        if let Err(e) = io::write_solution(dir, &cfg, r) {
            return io_error(e);
        }
        outputs.push(path_str(&dir.join(io::SOLUTION_HEADER)));
        outputs.push(path_str(&dir.join(io::PSI_FILE)));
        body["converged"] = json!(r.converged);
        body["monitors"] = json!(r.monitors);
        body["t_final"] = json!(r.t_final);
        body["final_residual"] = json!(r.final_residual);
        body["t_history"] = json!(r.t_history);
    } else {
        body["converged"] = json!(false);
    }
    let (code, summary) = match &result {
        Ok(r) => (
            EXIT_OK,
            format!(
                "converged: t = 1 in {} steps, residual {:.3e}, max |phi|^2 {:.6}, juncture {}",
                r.t_history.len() - 1,
                r.final_residual,
                r.monitors.max_phi2,
                r.monitors
                    .juncture_value
                    .map_or("undefined".to_string(), |v| format!("{v:.10}"))
            ),
        ),
        Err(e) => {
            body["error"] = json!({"kind": e.kind(), "message": e.to_string()});
            let code = match e {
                SolveError::Config(_) | SolveError::Geometry(_) => EXIT_INPUT,
                _ => EXIT_NOT_CONVERGED,
            };
            (code, format!("not converged: {} ({})", e.kind(), e))
        }
    };
    let report_path = dir.join(REPORT_FILE);
    outputs.push(path_str(&report_path));
    let mut file_doc = body.clone();
    file_doc["schema_version"] = json!(MANIFEST_SCHEMA);
    file_doc["command"] = json!("solve");
    file_doc["exit_code"] = json!(code);
    if let Err(e) = io::write_json(&report_path, &file_doc) {
        return io_error(e);
    }
    Outcome {
        code,
        body,
        summary,
    }
}

fn verify(dir: &Path, cp1_points: usize, seed: u64, outputs: &mut Vec<String>) -> Outcome {
    let (header, psi) = match io::read_solution(dir) {
        Ok(x) => x,
        Err(e) => return io_error(e),
    };
    let problem = match VortexProblem::new(&header.config) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let points = cp1_sample_points(cp1_points, seed);
    let (code, body, summary) = match VortexSolution::from_psi(problem, psi) {
        Ok(sol) => {
            let rep = verify_solution(&sol, &points);
            let code = if rep.passed {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            };
            let summary = format!(
                "{}: reduced residuals [{:.3e}, {:.3e}], min Griffiths margin {:.3e}, max Chern gap {:.3e}",
                if rep.passed { "verified" } else { "verification failed" },
                rep.reduced_res[0],
                rep.reduced_res[1],
                rep.griffiths_min_margin,
                rep.chern_gap_max
            );
            (code, json!({"verification": rep}), summary)
        }
        Err(e) => (
            EXIT_VERIFICATION,
            json!({"error": {"kind": e.kind(), "message": e.to_string()}}),
            format!("verification failed: {e}"),
        ),
    };
    let path = dir.join(VERIFICATION_FILE);
    let mut file_doc = body.clone();
    file_doc["schema_version"] = json!(MANIFEST_SCHEMA);
    file_doc["exit_code"] = json!(code);
    if let Err(e) = io::write_json(&path, &file_doc) {
        return io_error(e);
    }
    outputs.push(path_str(&path));
    Outcome {
        code,
        body,
        summary,
    }
}

fn positivity(input: &Path, samples: usize) -> Outcome {
    let inst: InstanceJson = match io::read_json(input) {
        Ok(i) => i,
        Err(e) => return input_error(e),
    };
    let f = match inst.to_form() {
        Ok(f) => f,
        Err(e) => return input_error(e),
    };
    let nakano = nakano_check(&f);
    let ma = ma_check(&f);
    let griffiths = griffiths_check(&f, samples);
    let m = wedge_square(&f).m;
    let wedge: Vec<[f64; 2]> = m.transpose().iter().map(|z| [z.re, z.im]).collect();
    let gap = chern_gap(&f).ok();
    let summary = format!(
        "nakano {} (margin {:.6e})\nma {} (margin {:.6e})\ngriffiths {} (margin {:.6e}{})",
        nakano.positive,
        nakano.margin,
        ma.positive,
        ma.margin,
        griffiths.positive,
        griffiths.margin,
        if griffiths.inconclusive {
            ", inconclusive"
        } else {
            ""
        }
    );
    Outcome {
        code: EXIT_OK,
        body: json!({
            "nakano": nakano,
            "ma": ma,
            "griffiths": griffiths,
            "wedge_square": wedge,
            "chern_gap": gap,
        }),
        summary,
    }
}

fn fs_check(n: usize, samples: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect();
        match FSPoint::new(z) {
            Ok(p) => points.push(p),
            Err(e) => return input_error(e),
        }
    }
    let rep = match fs_lambda_report(n, &points) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    let mut summary = format!(
        "n = {n}: lambda = {:.15} (spread {:.2e}, off-identity residual {:.2e}); literature value {}, (n+1)/n = {:.15}{}",
        rep.lambda_measured,
        rep.lambda_spread,
        rep.max_off_identity_residual,
        rep.literature_value,
        rep.derived_value,
        if rep.discrepancy { "; DISCREPANCY with the literature value" } else { "" }
    );
    let mut body = json!({"power": rep});
    if n == 2 {
        let pos = fs_ma_nakano_check(512);
        summary.push_str(&format!(
            "\nCP^2 at origin: ma {} (margin {:.6e}), nakano {} (margin {:.6e}), griffiths {}",
            pos.ma.positive,
            pos.ma.margin,
            pos.nakano.positive,
            pos.nakano.margin,
            pos.griffiths.positive
        ));
        body["positivity"] = json!(pos);
    }
    Outcome {
        code: EXIT_OK,
        body,
        summary,
    }
}

fn slopes(r1: u32, r2: u32) -> Outcome {
    if r1 < 1 || r2 < 1 {
        return input_error(format!("r1 and r2 must be positive (got {r1}, {r2})"));
    }
    let s = ma_slopes(r1, r2);
    Outcome {
        code: EXIT_OK,
        body: serde_json::to_value(s).expect("serializable"),
        summary: format!(
            "mu_MA(S) = {}, mu_MA(V) = {}, MA-stable: {}, Mumford gap: {}",
            s.mu_ma_sub, s.mu_ma_total, s.ma_stable, s.mumford_gap
        ),
    }
}

fn dump(solution: &Path, dir: &Path, outputs: &mut Vec<String>) -> Outcome {
    let (header, psi) = match io::read_solution(solution) {
        Ok(x) => x,
        Err(e) => return io_error(e),
    };
    let problem = match VortexProblem::new(&header.config) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    if let Err(e) = std::fs::create_dir_all(dir) {
        return input_error(format!("{}: {e}", dir.display()));
    }
    let state = problem.state(header.t_final, psi);
    let residual = mav_residual(&state);
    let grid = problem.grid();
    for (name, values) in [
        ("psi.csv", state.psi.values()),
        ("phi2.csv", state.phi2.values()),
        ("residual.csv", residual.values()),
    ] {
        let path = dir.join(name);
        if let Err(e) = io::write_field_csv(&path, grid, values) {
            return io_error(e);
        }
        outputs.push(path_str(&path));
    }
    Outcome {
        code: EXIT_OK,
        body: json!({"max_phi2": state.phi2.max(), "residual_sup": residual.sup_norm()}),
        summary: format!("wrote psi.csv, phi2.csv, residual.csv to {}", dir.display()),
    }
}
