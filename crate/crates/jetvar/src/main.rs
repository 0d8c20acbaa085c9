use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use jetvar::jetops::{operator_e, IotaMode};
use jetvar::numcheck::{self, CheckReport, Grid};
use jetvar::problem::{parse_problem_file, ProblemFile};
use jetvar::render;
use jetvar::varcalc::{decompose, euler_lagrange, green_identity_residual, Strategy};
use jetvar::vforms::VForm;

#[derive(Parser)]
#[command(
    name = "jetvar",
    about = "Euler-Lagrange forms, integration by parts, and Green-formula verification for higher-order Lagrangians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum IotaArg {
    Literal,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    MinAxis,
    MaxAxis,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::MinAxis => Strategy::MinAxis,
            StrategyArg::MaxAxis => Strategy::MaxAxis,
        }
    }
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Problem file
    file: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Compute via the operator E with the chosen iota convention instead
    /// of the direct Euler-Lagrange formula
    #[arg(long, value_enum)]
    iota: Option<IotaArg>,
    #[arg(long, value_enum, default_value_t = StrategyArg::MinAxis)]
    strategy: StrategyArg,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the Euler-Lagrange form
    El(CommonArgs),
    /// Split the fibre differential of the Lagrangian into its
    /// Euler-Lagrange and boundary parts
    Decompose(CommonArgs),
    /// Run the first-variation, Green-formula, and symbolic-residual checks
    Verify(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::El(args) => cmd_el(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &CommonArgs) -> Result<ProblemFile, String> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| format!("cannot read `{}`: {e}", args.file))?;
    parse_problem_file(&text).map_err(|e| e.to_string())
}

fn epsilon_of(args: &CommonArgs, problem: &ProblemFile) -> Result<VForm, String> {
    match args.iota {
        None => euler_lagrange(&problem.lagrangian).map_err(|e| e.to_string()),
        Some(IotaArg::Weighted) => {
            operator_e(&problem.lagrangian, IotaMode::Weighted).map_err(|e| e.to_string())
        }
        Some(IotaArg::Literal) => {
            operator_e(&problem.lagrangian, IotaMode::Literal).map_err(|e| e.to_string())
        }
    }
}

/// Per-field `epsilon[u] = ...` lines; covectors of order zero carry the
/// whole content, so only the coefficient is shown.
fn epsilon_text(eps: &VForm) -> String {
    let space = eps.space();
    let mut lines = Vec::new();
    for a in 0..space.num_fields() {
        let coeff = eps
            .terms()
            .iter()
            .find(|(k, _)| k.dpsi.len() == 1 && k.dpsi[0].0 == a && k.dpsi[0].1.is_zero())
            .map(|(_, c)| render::expr_text(c, space))
            .unwrap_or_else(|| "0".to_string());
        lines.push(format!("epsilon[{}] = {}", space.field_name(a), coeff));
    }
    // Anything off the order-zero covectors (the literal-iota convention
    // can produce it) is appended verbatim.
    let stray: Vec<String> = eps
        .terms()
        .iter()
        .filter(|(k, _)| !(k.dpsi.len() == 1 && k.dpsi[0].1.is_zero()))
        .map(|(k, c)| {
            let mut single = VForm::zero(
                eps.space().clone(),
                eps.horiz_degree(),
                eps.contact_degree(),
                eps.coeff_order(),
                eps.contact_order(),
            );
            single.add_term(&k.dx, &k.dpsi, c.clone());
            render::vform_text(&single)
        })
        .collect();
    if !stray.is_empty() {
        lines.push(format!("residue = {}", stray.join(" + ")));
    }
    lines.join("\n")
}

fn cmd_el(args: &CommonArgs) -> Result<ExitCode, String> {
    let problem = load(args)?;
    let eps = epsilon_of(args, &problem)?;
    match args.format {
        Format::Text => println!("{}", epsilon_text(&eps)),
        Format::Latex => println!("{}", render::vform_latex(&eps)),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "epsilon": render::vform_json(&eps) }))
                .unwrap()
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_decompose(args: &CommonArgs) -> Result<ExitCode, String> {
    let problem = load(args)?;
    let result = decompose(&problem.lagrangian, args.strategy.into()).map_err(|e| e.to_string())?;
    match args.format {
        Format::Text => {
            println!("{}", epsilon_text(&result.epsilon));
            println!("kappa = {}", render::vform_text(&result.kappa));
        }
        Format::Latex => {
            println!("{}", render::vform_latex(&result.epsilon));
            println!("{}", render::vform_latex(&result.kappa));
        }
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "epsilon": render::vform_json(&result.epsilon),
                "kappa": render::vform_json(&result.kappa),
                "strategy": result.strategy.name(),
            }))
            .unwrap()
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn check_line(report: &CheckReport) -> String {
    format!(
        "[{}] {:<24} lhs={:+.12e} rhs={:+.12e} abs_err={:.3e} rel_err={:.3e} tol={:.1e}",
        if report.pass { "PASS" } else { "FAIL" },
        report.name,
        report.lhs,
        report.rhs,
        report.abs_err,
        report.rel_err,
        report.tol
    )
}

fn cmd_verify(args: &CommonArgs) -> Result<ExitCode, String> {
    let problem = load(args)?;
    let upsilon = problem.section();
    let y = problem.variation();
    let grid = Grid::new(problem.space.dim(), problem.grid_points).map_err(|e| e.to_string())?;
    let tol = numcheck::DEFAULT_TOLERANCE;

    let mut reports = Vec::new();
    reports.push(
        numcheck::verify_first_variation(
            &problem.lagrangian,
            &upsilon,
            &y,
            &grid,
            problem.fd_step,
            tol,
        )
        .map_err(|e| e.to_string())?,
    );
    reports.push(
        numcheck::verify_green(&problem.lagrangian, &upsilon, &y, &grid, problem.fd_step, tol)
            .map_err(|e| e.to_string())?,
    );

    // Symbolic residual with fully opaque section and variation: the Green
    // identity must cancel exactly, independent of any numeric data.
    let started = Instant::now();
    let space = problem.space.clone();
    let names_u: Vec<String> = (0..space.num_fields())
        .map(|a| format!("U{}", a + 1))
        .collect();
    let names_y: Vec<String> = (0..space.num_fields())
        .map(|a| format!("Y{}", a + 1))
        .collect();
    let opaque_u = jetvar::SectionSym::opaque(
        space.clone(),
        &names_u.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    let opaque_y = jetvar::SectionSym::opaque(
        space.clone(),
        &names_y.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    let residual = green_identity_residual(&problem.lagrangian, &opaque_u, &opaque_y)
        .map_err(|e| e.to_string())?;
    let surviving = residual.terms().len() as f64;
    reports.push(CheckReport::compare(
        "green_residual_symbolic",
        surviving,
        0.0,
        0.0,
        started,
    ));

    let all_pass = reports.iter().all(|r| r.pass);
    match args.format {
        Format::Text | Format::Latex => {
            for r in &reports {
                println!("{}", check_line(r));
            }
            println!(
                "{}",
                if all_pass {
                    "all checks passed"
                } else {
                    "some checks FAILED"
                }
            );
        }
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "checks": reports,
                "pass": all_pass,
            }))
            .unwrap()
        ),
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
