//! `xirho` command line: rank correlation measures, region geometry,
//! attainment recipes, sampling, estimators, the gap table, the discrete
//! oracle, and figure-data export.
//!
//! JSON results go to stdout, CSV artifacts to files. Exit codes:
//! 0 success, 2 input error, 3 numeric failure, 4 IO error, 5 domain
//! error (point outside the region, infeasible budget).

use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::io::Read;
use std::process::ExitCode;
use xirho::copula::{parse_spec, BoundaryCopula, Copula};
use xirho::error::{MeasureError, OracleError, ParseError, RegionError};
use xirho::measures::{
    closed_cb, estimate, quadrature_measures, sample, table1_search, Sample, Table1Row,
};
use xirho::oracle::{cross_check_projected_gradient, diagnostics, diagnostics_csv, solve,
    DiscreteProblem};
use xirho::region::{attain, b_of_x, boundary_table_csv, m_of_x};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_DOMAIN: u8 = 5;

#[derive(Parser)]
#[command(name = "xirho", version, about = "Chatterjee's xi and Spearman's rho for copulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Quad,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Region,
    Density,
    Hcurves,
}

#[derive(Subcommand)]
enum Command {
    /// Compute (xi, rho) for a copula spec such as `cb:b=1` or `gauss:r=0.7`.
    Measures {
        spec: String,
        #[arg(long, value_enum, default_value = "quad")]
        method: MethodArg,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Tabulate the region boundary x, M_x, b_x at k points.
    Boundary {
        #[arg(long, default_value_t = 201)]
        k: usize,
        #[arg(long)]
        out: String,
    },
    /// Find a shuffled boundary copula attaining a given (xi, rho) pair.
    Attain {
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Reproduce the six-row gap-maximization table.
    Table1 {
        #[arg(long, default_value_t = 64)]
        nodes: usize,
    },
    /// Draw n pairs from a copula and write them as CSV `x,y`.
    Sample {
        spec: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: String,
    },
    /// Rank estimators xi_n and rho_n from a two-column CSV.
    Estimate {
        #[arg(long)]
        input: String,
    },
    /// Solve the discrete boundary problem at budget c and verify it.
    Oracle {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<String>,
        /// Also run the projected-gradient cross-check (slower).
        #[arg(long, default_value_t = 0)]
        pgd_iters: usize,
    },
    /// Export CSV data for the standard figures.
    Plotdata {
        #[arg(value_enum)]
        figure: FigureArg,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: String,
    },
}

fn env_usize(name: &str, fallback: usize) -> usize {
    std::env::var(name)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(fallback)
}

fn env_u64(name: &str, fallback: u64) -> u64 {
    std::env::var(name)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(fallback)
}

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn parse_fail(err: ParseError) -> ExitCode {
    fail(EXIT_INPUT, err)
}

fn measure_fail(err: MeasureError) -> ExitCode {
    match err {
        MeasureError::TooFewPoints { .. } => fail(EXIT_INPUT, err),
        _ => fail(EXIT_NUMERIC, err),
    }
}

fn region_fail(err: RegionError) -> ExitCode {
    match err {
        RegionError::NotInRegion { .. } | RegionError::DomainError(_) => fail(EXIT_DOMAIN, err),
        RegionError::BisectionFailed => fail(EXIT_NUMERIC, err),
    }
}

fn oracle_fail(err: OracleError) -> ExitCode {
    match err {
        OracleError::InfeasibleBudget { .. } => fail(EXIT_DOMAIN, err),
        _ => fail(EXIT_NUMERIC, err),
    }
}

fn write_file(path: &str, contents: &str) -> Result<(), ExitCode> {
    fs::write(path, contents).map_err(|e| fail(EXIT_IO, format!("writing {path}: {e}")))
}

fn cmd_measures(spec_text: &str, method: MethodArg, nodes: usize, tol: f64) -> ExitCode {
    let spec = match parse_spec(spec_text) {
        Ok(s) => s,
        Err(e) => return parse_fail(e),
    };
    let result = match method {
        MethodArg::Closed => {
            if spec.family != xirho::copula::Family::Cb {
                return fail(EXIT_INPUT, "closed-form method is only available for cb");
            }
            match spec.param("b") {
                Ok(b) => closed_cb(b),
                Err(e) => return parse_fail(e),
            }
        }
        MethodArg::Quad => {
            let model = match spec.build() {
                Ok(m) => m,
                Err(e) => return measure_fail(e),
            };
            match quadrature_measures(model.as_ref(), nodes, tol) {
                Ok(r) => r,
                Err(e) => return measure_fail(e),
            }
        }
    };
    println!("{}", serde_json::to_string(&result).unwrap());
    ExitCode::SUCCESS
}

fn cmd_boundary(k: usize, out: &str) -> ExitCode {
    if k < 2 {
        return fail(EXIT_INPUT, "boundary table needs k >= 2");
    }
    match write_file(out, &boundary_table_csv(k)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn cmd_attain(xi: f64, rho: f64, tol: f64) -> ExitCode {
    match attain(xi, rho, tol) {
        Ok(recipe) => {
            println!("{}", serde_json::to_string(&recipe).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => region_fail(e),
    }
}

/// Reference values with the search windows that bracket them.
const TABLE1_TARGETS: [(xirho::copula::Family, f64, f64, f64, f64, f64, f64); 6] = [
    (xirho::copula::Family::Cb, 0.05, 5.0, 1.0, 0.7, 0.3, 0.4),
    (xirho::copula::Family::Clayton, 0.5, 4.0, 1.998, 0.682, 0.335, 0.347),
    (xirho::copula::Family::Frank, 2.0, 10.0, 5.529, 0.682, 0.299, 0.383),
    (xirho::copula::Family::Gaussian, 0.3, 0.95, 0.707, 0.690, 0.310, 0.380),
    (xirho::copula::Family::Gumbel, 1.2, 4.0, 1.991, 0.681, 0.313, 0.367),
    (xirho::copula::Family::Joe, 1.5, 5.0, 2.938, 0.691, 0.348, 0.343),
];

/// (xi, rho) at a single parameter of a one-parameter family.
fn family_measures(
    family: xirho::copula::Family,
    p: f64,
    nodes: usize,
) -> Result<(f64, f64), MeasureError> {
    if family == xirho::copula::Family::Cb {
        let r = closed_cb(p);
        return Ok((r.xi, r.rho));
    }
    let name = if family == xirho::copula::Family::Gaussian { "r" } else { "theta" };
    let spec = xirho::copula::CopulaSpec::new(family, &[(name, p)])
        .map_err(|_| MeasureError::OutOfRange { value: p })?;
    let model = spec.build()?;
    let r = quadrature_measures(model.as_ref(), nodes, 1e-5)?;
    Ok((r.xi, r.rho))
}

fn cmd_table1(nodes: usize) -> ExitCode {
    // The reference parameters come from a coarse grid search over a gap
    // curve that is extremely flat near its maximum, so the table is
    // reproduced at the reference parameters and the independent search
    // maximum is reported alongside.
    println!(
        "{:<10} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9}  status",
        "family", "param", "rho", "xi", "gap", "argmax", "max_gap"
    );
    let mut any_fail = false;
    for &(family, lo, hi, p_ref, rho_ref, xi_ref, gap_ref) in &TABLE1_TARGETS {
        let (xi, rho) = match family_measures(family, p_ref, nodes) {
            Ok(x) => x,
            Err(e) => return measure_fail(e),
        };
        let found: Table1Row = match table1_search(family, lo, hi, 40, nodes) {
            Ok(r) => r,
            Err(e) => return measure_fail(e),
        };
        let ok = (rho - rho_ref).abs() <= 0.005
            && (xi - xi_ref).abs() <= 0.005
            && (rho - xi - gap_ref).abs() <= 0.005
            && (found.gap - gap_ref).abs() <= 0.005;
        any_fail |= !ok;
        println!(
            "{:<10} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>9.3} {:>9.4}  {}",
            found.family,
            p_ref,
            rho,
            xi,
            rho - xi,
            found.param,
            found.gap,
            if ok { "ok" } else { "FAIL" }
        );
    }
    if any_fail {
        println!("warning: at least one cell deviates by more than 0.005");
    }
    ExitCode::SUCCESS
}

fn cmd_sample(spec_text: &str, n: usize, seed: u64, out: &str) -> ExitCode {
    let spec = match parse_spec(spec_text) {
        Ok(s) => s,
        Err(e) => return parse_fail(e),
    };
    let model = match spec.build() {
        Ok(m) => m,
        Err(e) => return measure_fail(e),
    };
    let draws = match sample(model.as_ref(), n, seed) {
        Ok(s) => s,
        Err(e) => return measure_fail(e),
    };
    let mut csv = String::from("x,y\n");
    for (x, y) in &draws.pairs {
        csv.push_str(&format!("{x},{y}\n"));
    }
    match write_file(out, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn read_sample_csv(path: &str) -> Result<Sample, ExitCode> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| fail(EXIT_IO, format!("reading {path}: {e}")))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("x,")) {
            continue;
        }
        let mut cells = line.split(',');
        let (Some(a), Some(b)) = (cells.next(), cells.next()) else {
            return Err(fail(EXIT_INPUT, format!("line {}: expected x,y", lineno + 1)));
        };
        match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(x), Ok(y)) => pairs.push((x, y)),
            _ => {
                return Err(fail(
                    EXIT_INPUT,
                    format!("line {}: non-numeric cell", lineno + 1),
                ))
            }
        }
    }
    Ok(Sample { pairs })
}

fn cmd_estimate(input: &str) -> ExitCode {
    let data = match read_sample_csv(input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match estimate(&data) {
        Ok(result) => {
            let json = serde_json::json!({
                "xi_n": result.xi,
                "rho_n": result.rho,
                "n": data.n(),
            });
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(e) => measure_fail(e),
    }
}

fn cmd_oracle(c: f64, grid: usize, out: Option<&str>, pgd_iters: usize) -> ExitCode {
    if !(c > 0.0 && c < 1.0) {
        return fail(EXIT_DOMAIN, format!("budget c={c} must lie in (0,1)"));
    }
    let problem = DiscreteProblem::new(grid, grid, c);
    let solution = match solve(&problem) {
        Ok(s) => s,
        Err(e) => return oracle_fail(e),
    };
    let m = m_of_x(c).unwrap();
    let b = b_of_x(c).unwrap();
    let rows = diagnostics(&solution);
    let slopes: Vec<f64> = rows
        .iter()
        .map(|d| d.slope)
        .filter(|s| s.is_finite() && *s < -1e-6)
        .collect();
    let mean_slope = slopes.iter().sum::<f64>() / slopes.len().max(1) as f64;
    let pgd = if pgd_iters > 0 {
        match cross_check_projected_gradient(&problem, pgd_iters) {
            Ok(x) => Some(x),
            Err(e) => return oracle_fail(e),
        }
    } else {
        None
    };
    let json = serde_json::json!({
        "c": c,
        "grid": grid,
        "objective": solution.objective,
        "m_x": m,
        "gap": solution.objective - m,
        "mean_slope": mean_slope,
        "minus_b_x": -b,
        "pgd_objective": pgd,
    });
    println!("{json}");
    if let Some(path) = out {
        if let Err(code) = write_file(path, &diagnostics_csv(&solution)) {
            return code;
        }
    }
    ExitCode::SUCCESS
}

fn plot_region(grid: usize) -> String {
    let mut csv = String::from("xi,rho_si,rho_sd\n");
    for i in 0..=grid {
        let x = i as f64 / grid as f64;
        let m = m_of_x(x).unwrap();
        // +0.0 avoids a cosmetic "-0" at the endpoints.
        csv.push_str(&format!("{x},{m},{}\n", -m + 0.0));
    }
    csv
}

fn plot_density(b: f64, grid: usize) -> String {
    let model = BoundaryCopula::new(b);
    let dv = 0.5 / grid as f64 * 1e-3;
    let mut csv = String::from("t,v,density\n");
    for j in 0..grid {
        let v = (j as f64 + 0.5) / grid as f64;
        for i in 0..grid {
            let t = (i as f64 + 0.5) / grid as f64;
            let dens = (model.d1(t, v + dv) - model.d1(t, v - dv)) / (2.0 * dv);
            csv.push_str(&format!("{t},{v},{dens}\n"));
        }
    }
    csv
}

fn plot_hcurves(b: f64, grid: usize) -> String {
    let model = BoundaryCopula::new(b);
    let levels: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let mut csv = String::from("t");
    for v in &levels {
        csv.push_str(&format!(",h_{v}"));
    }
    csv.push('\n');
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        csv.push_str(&format!("{t}"));
        for v in &levels {
            csv.push_str(&format!(",{}", model.d1(t, *v)));
        }
        csv.push('\n');
    }
    csv
}

fn cmd_plotdata(figure: FigureArg, b: f64, grid: usize, out: &str) -> ExitCode {
    if b == 0.0 {
        return fail(EXIT_INPUT, "b must be nonzero");
    }
    let csv = match figure {
        FigureArg::Region => plot_region(grid),
        FigureArg::Density => plot_density(b, grid),
        FigureArg::Hcurves => plot_hcurves(b, grid),
    };
    match write_file(out, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Measures {
            spec,
            method,
            nodes,
            tol,
        } => cmd_measures(&spec, method, env_usize("XIRHO_NODES", nodes), tol),
        Command::Boundary { k, out } => cmd_boundary(k, &out),
        Command::Attain { xi, rho, tol } => cmd_attain(xi, rho, tol),
        Command::Table1 { nodes } => cmd_table1(env_usize("XIRHO_NODES", nodes)),
        Command::Sample { spec, n, seed, out } => {
            cmd_sample(&spec, n, env_u64("XIRHO_SEED", seed), &out)
        }
        Command::Estimate { input } => cmd_estimate(&input),
        Command::Oracle {
            c,
            grid,
            out,
            pgd_iters,
        } => cmd_oracle(c, grid, out.as_deref(), pgd_iters),
        Command::Plotdata {
            figure,
            b,
            grid,
            out,
        } => cmd_plotdata(figure, b, grid, &out),
    }
}
