//! Result writers: probe CSVs, legacy-VTK snapshots and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::oracles::OracleCurve;

/// Numbers in CSV and VTK files: shortest round-trip exponent form.
pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

/// Column-named time series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ProbeTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        ProbeTable {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv_string())
    }
}

impl From<&OracleCurve> for ProbeTable {
    fn from(c: &OracleCurve) -> Self {
        let mut header = vec![c.abscissa.0.clone()];
        header.extend(c.ordinates.iter().map(|(n, _)| n.clone()));
        let rows = (0..c.abscissa.1.len())
            .map(|i| {
                let mut r = vec![c.abscissa.1[i]];
                r.extend(c.ordinates.iter().map(|(_, ys)| ys[i]));
                r
            })
            .collect();
        ProbeTable { header, rows }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// VTK cell type of the 9-node biquadratic quadrilateral; its node order
/// (corners, mid-edges, centre) is the element's own.
pub const VTK_BIQUADRATIC_QUAD: u32 = 28;

/// Legacy ASCII unstructured grid of the mid-surface with displacement and
/// thickness per node, and pressure band and peak Green–Lagrange strain per
/// element.
pub fn vtk_string(model: &Model, title: &str) -> String {
    let nodes = &model.mesh.nodes;
    let elements = &model.mesh.elements;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", nodes.len());
    for n in nodes {
        let p = n.position;
        let _ = writeln!(s, "{} {} {}", format_value(p.x), format_value(p.y), format_value(p.z));
    }
    let _ = writeln!(s, "CELLS {} {}", elements.len(), elements.len() * 10);
    for el in elements {
        let ids: Vec<String> = el.nodes.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "9 {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", elements.len());
    for _ in elements {
        let _ = writeln!(s, "{VTK_BIQUADRATIC_QUAD}");
    }
    let _ = writeln!(s, "CELL_DATA {}", elements.len());
    let _ = writeln!(s, "SCALARS pressure_band_Pa double 1\nLOOKUP_TABLE default");
    for p in model.pressure_bands() {
        let _ = writeln!(s, "{}", format_value(p));
    }
    let _ = writeln!(s, "SCALARS max_green_lagrange double 1\nLOOKUP_TABLE default");
    for states in &model.gauss {
        let m = states.iter().map(|g| g.strain.max_abs_component()).fold(0.0, f64::max);
        let _ = writeln!(s, "{}", format_value(m));
    }
    let _ = writeln!(s, "POINT_DATA {}", nodes.len());
    let _ = writeln!(s, "VECTORS displacement_m double");
    for n in nodes {
        let u = n.displacement();
        let _ = writeln!(s, "{} {} {}", format_value(u.x), format_value(u.y), format_value(u.z));
    }
    let _ = writeln!(s, "SCALARS thickness_m double 1\nLOOKUP_TABLE default");
    for n in nodes {
        let _ = writeln!(s, "{}", format_value(n.thickness));
    }
    s
}

pub fn write_vtk(path: &Path, model: &Model, title: &str) -> Result<()> {
    write_text(path, &vtk_string(model, title))
}

/// Per Gauss point pressure band of the current state.
pub fn pressure_band_table(model: &Model) -> ProbeTable {
    let mut t = ProbeTable::new(&["element", "gauss_point", "pressure_band_Pa"]);
    for (e, states) in model.gauss.iter().enumerate() {
        for (p, g) in states.iter().enumerate() {
            t.push(vec![e as f64, p as f64, crate::oracles::pressure_band(&g.sigma)]);
        }
    }
    t
}

/// Record of one run, written once whether or not the run succeeded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: u32,
    pub name: String,
    pub config_hash: String,
    pub technique: u8,
    pub dt_mode: String,
    pub initial_dt_s: f64,
    pub safety_factor: f64,
    pub end_time_s: f64,
    pub damping_per_s: f64,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub steps: usize,
    pub final_time_s: f64,
    pub status: String,
}

impl RunManifest {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest is always serializable")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_toml_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_only() {
        let t = ProbeTable::new(&["time_s", "x_m"]);
        assert_eq!(t.to_csv_string(), "time_s,x_m\n");
    }

    #[test]
    fn csv_values_round_trip() {
        let mut t = ProbeTable::new(&["a"]);
        t.push(vec![0.1 + 0.2]);
        let text = t.to_csv_string();
        let v: f64 = text.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.1 + 0.2);
    }

    #[test]
    fn oracle_curve_table() {
        let c = OracleCurve {
            name: "c".into(),
            abscissa: ("x".into(), vec![0.0, 1.0]),
            ordinates: vec![("y".into(), vec![2.0, 3.0])],
        };
        let t = ProbeTable::from(&c);
        assert_eq!(t.header, vec!["x", "y"]);
        assert_eq!(t.rows[1], vec![1.0, 3.0]);
    }
}
