//! Legacy ASCII VTK writer for nodal fields on the uniform mesh.

use std::io::{self, Write};

use crate::mesh_fe::field::FEField;
use crate::mesh_fe::mesh::UniformQuadMesh;

/// Writes `fields` as point data of a `STRUCTURED_POINTS` dataset.
///
/// Dimensions are `(nx + 1) x (ny + 1) x 1` with spacing `h`; node ordering of
/// [`FEField`] already matches the x-fastest VTK ordering.
pub fn write_structured_points<W: Write>(
    out: &mut W,
    title: &str,
    mesh: &UniformQuadMesh,
    fields: &[(&str, &FEField)],
) -> io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    // the title line must not contain newlines
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} 1", mesh.nx + 1, mesh.ny + 1)?;
    writeln!(out, "ORIGIN {:e} {:e} 0", mesh.origin.x, mesh.origin.y)?;
    writeln!(out, "SPACING {:e} {:e} 1", mesh.h, mesh.h)?;
    writeln!(out, "POINT_DATA {}", mesh.num_nodes())?;
    for (name, field) in fields {
        assert_eq!(field.values.len(), mesh.num_nodes(), "field {name} has wrong length");
        writeln!(out, "SCALARS {} double 1", name.replace(char::is_whitespace, "_"))?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in &field.values {
            writeln!(out, "{v:.12e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_payload() {
        let m = UniformQuadMesh::unit_square(2).unwrap();
        let f = FEField::interpolate(m, |p| p.x);
        let mut buf = Vec::new();
        write_structured_points(&mut buf, "test", &m, &[("u h", &f)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[3], "DATASET STRUCTURED_POINTS");
        assert_eq!(lines[4], "DIMENSIONS 3 3 1");
        assert_eq!(lines[6], "SPACING 5e-1 5e-1 1");
        assert_eq!(lines[7], "POINT_DATA 9");
        assert_eq!(lines[8], "SCALARS u_h double 1");
        assert_eq!(lines.len(), 10 + 9);
        assert_eq!(lines[11].parse::<f64>().unwrap(), 0.5);
    }
}
