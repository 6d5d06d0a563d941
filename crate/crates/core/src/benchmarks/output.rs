use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::benchmarks::{CaseName, CaseReport, ConvergenceRow, ExtensionReport, RunConfig};
use crate::mesh_fe::vtk::write_structured_points;

/// `<case>_<ghost>_<band>.csv`.
pub fn csv_file_name(case: CaseName, cfg: &RunConfig) -> String {
    format!("{case}_{}_{}.csv", cfg.ghost, cfg.band_label())
}

pub fn write_csv<W: Write>(out: &mut W, rows: &[ConvergenceRow]) -> io::Result<()> {
    writeln!(out, "inv_h,inv_dt,l2_error,eoc")?;
    for r in rows {
        let inv_dt = r.inv_dt.map(|v| v.to_string()).unwrap_or_default();
        let eoc = r.eoc.map(|v| format!("{v:.4}")).unwrap_or_default();
        writeln!(out, "{},{inv_dt},{:.6e},{eoc}", r.inv_h, r.l2_error)?;
    }
    Ok(())
}

pub fn write_extension_csv<W: Write>(out: &mut W, reports: &[ExtensionReport]) -> io::Result<()> {
    writeln!(out, "inv_h,band_nodes,linf_error,l2_error,linf_normal,l2_normal,symmetry")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.3e}",
            r.nx, r.band_nodes, r.linf_error, r.l2_error, r.linf_normal, r.l2_normal, r.symmetry
        )?;
    }
    Ok(())
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes the table and, if requested, one VTK file per level. Returns the written paths.
pub fn write_case_outputs(report: &CaseReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let cfg = &report.config;
    let csv = dir.join(csv_file_name(report.case, cfg));
    let mut out = create(&csv)?;
    write_csv(&mut out, &report.rows)?;
    out.flush()?;
    let mut written = vec![csv];
    if cfg.vtk {
        for level in &report.levels {
            let error = level
                .u
                .values
                .iter()
                .zip(&level.exact.values)
                .map(|(a, b)| a - b)
                .collect();
            let error = crate::mesh_fe::FEField::from_values(level.u.mesh, error);
            let path = dir.join(format!(
                "{}_{}_{}_nx{}.vtk",
                report.case,
                cfg.ghost,
                cfg.band_label(),
                level.nx
            ));
            let mut out = create(&path)?;
            let title = format!("{} nx={}", report.case, level.nx);
            let fields = [("u_h", &level.u), ("u_exact", &level.exact), ("error", &error), ("phi", &level.phi)];
            write_structured_points(&mut out, &title, &level.u.mesh, &fields)?;
            out.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn write_extension_outputs(reports: &[ExtensionReport], cfg: &RunConfig, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", CaseName::ExtensionCircle));
    let mut out = create(&csv)?;
    write_extension_csv(&mut out, reports)?;
    out.flush()?;
    let mut written = vec![csv];
    if cfg.vtk {
        for r in reports {
            let path = dir.join(format!("{}_nx{}.vtk", CaseName::ExtensionCircle, r.nx));
            let mut out = create(&path)?;
            let fields = [("extension", &r.extension), ("error", &r.error), ("phi", &r.phi)];
            write_structured_points(&mut out, &format!("extension-circle nx={}", r.nx), &r.phi.mesh, &fields)?;
            out.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}
