mod settings;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use diffsbm_core::benchmarks::{
    run_case, run_extension_circle, write_case_outputs, write_extension_outputs, CaseName, CaseReport,
};

use settings::{Args, Settings};

fn print_table(report: &CaseReport) {
    println!("{:>6} {:>8} {:>12} {:>6}", "1/h", "1/dt", "L2 error", "EOC");
    for row in &report.rows {
        let inv_dt = row.inv_dt.map(|v| format!("{v}")).unwrap_or_else(|| "-".into());
        let eoc = row.eoc.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        println!("{:>6} {:>8} {:>12.3e} {:>6}", row.inv_h, inv_dt, row.l2_error, eoc);
    }
}

fn run(s: &Settings) -> Result<()> {
    s.run.validate()?;
    let written = if s.case == CaseName::ExtensionCircle {
        let reports = s
            .run
            .levels
            .iter()
            .map(|&nx| run_extension_circle(nx, &s.run))
            .collect::<Result<Vec<_>, _>>()?;
        println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "1/h", "Linf", "L2", "Linf normal", "L2 normal");
        for r in &reports {
            println!(
                "{:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
                r.nx, r.linf_error, r.l2_error, r.linf_normal, r.l2_normal
            );
        }
        write_extension_outputs(&reports, &s.run, &s.out)
    } else {
        let report = run_case(s.case, &s.run)?;
        print_table(&report);
        write_case_outputs(&report, &s.out)
    }
    .with_context(|| format!("writing results to {}", s.out.display()))?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = Settings::from_args(&args).and_then(|s| {
        eprintln!(
            "case {} | {} ghost, {} band | eps {}h | {} level set",
            s.case,
            s.run.ghost,
            s.run.band_label(),
            s.run.eps_factor,
            s.run.level_set
        );
        run(&s)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
