use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::{ConvergenceTable, Format};
use crate::error::{Error, Result};
use crate::mesh::SpaceTimeMesh;
use crate::norms::DiscreteField;

fn order_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// CSV with one row per level and empty order cells on the first row.
pub fn render_csv(table: &ConvergenceTable) -> String {
    let hnorm = table.has_hnorm();
    let mut out = String::from("N,h,err_l2T,order_l2T,err_l2Q,order_l2Q,err_h1Q,order_h1Q");
    if hnorm {
        out.push_str(",err_hnorm,order_hnorm");
    }
    out.push('\n');
    for row in &table.rows {
        let r = &row.report;
        let o = row.orders;
        write!(
            out,
            "{},{:e},{:e},{},{:e},{},{:e},{}",
            r.n,
            r.h,
            r.err_l2_terminal,
            order_cell(o.map(|o| o.l2_terminal)),
            r.err_l2_cylinder,
            order_cell(o.map(|o| o.l2_cylinder)),
            r.err_h1_cylinder,
            order_cell(o.map(|o| o.h1_cylinder)),
        )
        .unwrap();
        if hnorm {
            write!(out, ",{:e},{}", r.err_hnorm.unwrap_or(f64::NAN), order_cell(o.and_then(|o| o.hnorm))).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Pipe table with `h = 2^-k` rows and three-significant-digit errors.
pub fn render_markdown(table: &ConvergenceTable) -> String {
    let hnorm = table.has_hnorm();
    let mut out = String::new();
    out.push_str("| h | L²(Ω) error at T | Order | L²(Ω_T) error | Order | H¹(Ω_T) error | Order |");
    if hnorm {
        out.push_str(" ‖·‖_h error | Order |");
    }
    out.push('\n');
    out.push_str("|---|---|---|---|---|---|---|");
    if hnorm {
        out.push_str("---|---|");
    }
    out.push('\n');
    let order = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    for row in &table.rows {
        let r = &row.report;
        let o = row.orders;
        write!(
            out,
            "| 2^-{} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {} |",
            r.n.trailing_zeros(),
            r.err_l2_terminal,
            order(o.map(|o| o.l2_terminal)),
            r.err_l2_cylinder,
            order(o.map(|o| o.l2_cylinder)),
            r.err_h1_cylinder,
            order(o.map(|o| o.h1_cylinder)),
        )
        .unwrap();
        if hnorm {
            write!(out, " {:.3e} | {} |", r.err_hnorm.unwrap_or(f64::NAN), order(o.and_then(|o| o.hnorm))).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Plot data for each norm: file stem, `(log10 h, log10 err)` pairs and the
/// reference slope. Each text has a data block and, after two blank lines, a
/// reference line through the coarsest point.
pub fn render_plotdata(table: &ConvergenceTable) -> Vec<(&'static str, String)> {
    let mut series: Vec<(&'static str, f64, Vec<f64>)> = vec![
        ("l2T", 2.0, table.rows.iter().map(|r| r.report.err_l2_terminal).collect()),
        ("l2Q", 2.0, table.rows.iter().map(|r| r.report.err_l2_cylinder).collect()),
        ("h1Q", 1.0, table.rows.iter().map(|r| r.report.err_h1_cylinder).collect()),
    ];
    if table.has_hnorm() {
        series.push(("hnorm", 1.0, table.rows.iter().map(|r| r.report.err_hnorm.unwrap_or(f64::NAN)).collect()));
    }
    let hs: Vec<f64> = table.rows.iter().map(|r| r.report.h.log10()).collect();
    series
        .into_iter()
        .map(|(name, slope, errs)| {
            let mut out = format!("# log10(h) log10(err_{name})\n");
            for (h, e) in hs.iter().zip(&errs) {
                writeln!(out, "{:e} {:e}", h, e.log10()).unwrap();
            }
            writeln!(out, "\n\n# reference slope {slope}").unwrap();
            if let (Some(&h0), Some(&e0)) = (hs.first(), errs.first()) {
                for h in [hs[0], hs[hs.len() - 1]] {
                    writeln!(out, "{:e} {:e}", h, e0.log10() + slope * (h - h0)).unwrap();
                }
            }
            (name, out)
        })
        .collect()
}

/// Writes the table in `format` into `dir` and returns the written paths.
pub fn emit_table(table: &ConvergenceTable, format: Format, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("cannot emit an empty table".into()));
    }
    let stem = format!("example{}", table.example);
    let files: Vec<(String, String)> = match format {
        Format::Csv => vec![(format!("{stem}.csv"), render_csv(table))],
        Format::Markdown => vec![(format!("{stem}.md"), render_markdown(table))],
        Format::PlotData => render_plotdata(table)
            .into_iter()
            .map(|(name, text)| (format!("{stem}_{name}.dat"), text))
            .collect(),
        Format::Vtk => return Err(Error::InvalidArgument("VTK output is written per solution, not per table".into())),
    };
    let mut paths = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Legacy ASCII VTK unstructured grid with the point scalar `u_h`. Two
/// dimensional points get a zero third coordinate.
pub fn emit_solution_vtk(mesh: &SpaceTimeMesh, field: &DiscreteField, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let m = mesh.simplex_dim();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "space-time P1 solution")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        let z = if m == 3 { p[2] } else { 0.0 };
        writeln!(out, "{:e} {:e} {:e}", p[0], p[1], z)?;
    }
    writeln!(out, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (m + 2))?;
    for cell in mesh.cells() {
        write!(out, "{}", cell.len())?;
        for v in cell {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_cells())?;
    let cell_type = if m == 2 { 5 } else { 10 };
    for _ in 0..mesh.n_cells() {
        writeln!(out, "{cell_type}")?;
    }
    writeln!(out, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(out, "SCALARS u_h double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in field.values() {
        writeln!(out, "{v:e}")?;
    }
    out.flush()?;
    Ok(())
}
