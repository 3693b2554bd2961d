use std::fmt::Write as _;
use std::sync::Arc;

use hdg_core::analysis::{ConvergenceReport, LevelErrors, Variable};
use hdg_core::assembly::{solve, SolveOutput};
use hdg_core::hdg::{HdgSpace, StabilizationConfig};
use hdg_core::mesh::Mesh;
use hdg_core::problems::ProblemData;

use crate::config::StudyConfig;
use crate::CliError;

pub const CSV_HEADER: &str = "level,h,err_q,err_p,err_y,err_z,err_u,rate_q,rate_p,rate_y,rate_z,rate_u";

/// Builds and solves one level, checking the stabilization first.
pub fn solve_level(problem: &ProblemData, n: usize, k: usize, tau2: f64) -> Result<SolveOutput, CliError> {
    let wrap = |source| CliError::Level { n, k, source };
    let mesh = Arc::new(Mesh::build_uniform(n).map_err(wrap)?);
    let space = HdgSpace::new(mesh, k, problem, StabilizationConfig::constant(tau2)).map_err(wrap)?;
    space.validate_stabilization().map_err(wrap)?;
    solve(space, problem).map_err(wrap)
}

/// Solves every level in turn and measures all five errors.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport, CliError> {
    config.validate()?;
    let problem = config.problem.build(config.gamma);
    let mut report = ConvergenceReport {
        problem: config.problem.to_string(),
        k: config.k,
        gamma: config.gamma,
        tau2: config.tau2,
        levels: Vec::with_capacity(config.levels.len()),
        h_values: Vec::with_capacity(config.levels.len()),
        errors: Vec::with_capacity(config.levels.len()),
    };
    for &n in &config.levels {
        let out = solve_level(&problem, n, config.k, config.tau2)?;
        let errors = LevelErrors::measure(&out.solution, &problem)
            .map_err(|source| CliError::Level { n, k: config.k, source })?;
        report.levels.push(n);
        report.h_values.push(out.space.h);
        report.errors.push(errors);
    }
    Ok(report)
}

fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

pub fn format_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, (&n, &h)) in report.levels.iter().zip(&report.h_values).enumerate() {
        let mut row = vec![n.to_string(), sci(h)];
        row.extend(Variable::ALL.iter().map(|&v| sci(report.errors[i].get(v))));
        row.extend(
            Variable::ALL
                .iter()
                .map(|&v| report.rate(i, v).map(sci).unwrap_or_default()),
        );
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One column per level, an error row and an order row per variable.
pub fn format_markdown(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}, k = {}, gamma = {}, tau2 = {}\n",
        report.problem, report.k, report.gamma, report.tau2
    );
    let _ = write!(out, "| h/√2 |");
    for n in &report.levels {
        let _ = write!(out, " 1/{n} |");
    }
    let _ = write!(out, "\n|---|");
    for _ in &report.levels {
        out.push_str("---|");
    }
    out.push('\n');
    for v in Variable::ALL {
        let _ = write!(out, "| ‖{v} - {v}_h‖ |");
        for e in &report.errors {
            let _ = write!(out, " {:.4e} |", e.get(v));
        }
        out.push_str("\n| order |");
        for i in 0..report.levels.len() {
            match report.rate(i, v) {
                Some(r) => {
                    let _ = write!(out, " {r:.2} |");
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemKind;

    fn report() -> ConvergenceReport {
        let e = |s: f64| LevelErrors { q: s, p: 2.0 * s, y: s * s, z: 0.0, u: 0.0 };
        ConvergenceReport {
            problem: "example1".into(),
            k: 1,
            gamma: 1.0,
            tau2: 1.0,
            levels: vec![8, 16],
            h_values: vec![2f64.sqrt() / 8.0, 2f64.sqrt() / 16.0],
            errors: vec![e(0.1), e(0.05)],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = format_csv(&report());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "8,1.76777e-1,1.00000e-1,2.00000e-1,1.00000e-2,0.00000e0,0.00000e0,,,,,"
        );
        assert_eq!(
            lines[2],
            "16,8.83883e-2,5.00000e-2,1.00000e-1,2.50000e-3,0.00000e0,0.00000e0,1.00000e0,1.00000e0,2.00000e0,,"
        );
    }

    #[test]
    fn markdown_has_order_rows() {
        let md = format_markdown(&report());
        assert!(md.contains("| h/√2 | 1/8 | 1/16 |"));
        assert!(md.contains("| ‖y - y_h‖ | 1.0000e-2 | 2.5000e-3 |"));
        assert!(md.contains("| order | - | 2.00 |"));
        assert!(md.contains("| order | - | - |"));
    }

    #[test]
    fn polynomial_study_is_exact() {
        let config = StudyConfig {
            problem: ProblemKind::PolyDebug,
            levels: vec![2, 4],
            ..StudyConfig::default()
        };
        let report = run_study(&config).unwrap();
        for e in &report.errors {
            for v in Variable::ALL {
                assert!(e.get(v) <= 1e-9);
            }
        }
        assert!(Variable::ALL.iter().all(|&v| report.rate(1, v).is_none()));
    }

    #[test]
    fn negative_tau_is_rejected_before_solving() {
        let config = StudyConfig { tau2: -1.0, levels: vec![2], ..StudyConfig::default() };
        let err = run_study(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
