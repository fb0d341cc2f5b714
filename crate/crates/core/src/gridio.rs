//! Symbol-grid data model and its versioned CSV serialization.
//!
//! A grid is organized by reconstruction task: one plane family per sphere node
//! (electric recovery) and, in dimension three, one family per field component
//! pair. Each family samples `n_theta` in-plane line directions, `n_phi` tangent
//! directions on the great circle through the family center, the common radius
//! ladder, and both orientations of every line direction. Entry order is fixed,
//! so parallel fills and reloads are reproducible byte for byte.

use crate::error::{Error, Result};
use crate::geom::{dot, norm, Direction};
use crate::radon2d::PlaneFrame;
use crate::symbol::SymbolPoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, Write};

pub const GRID_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridLayout {
    pub dimension: usize,
    pub lambda: f64,
    pub n_transport: usize,
    pub m_alpha: usize,
    pub line_nodes: usize,
    pub radii: Vec<f64>,
    /// unit reconstruction directions for the electric families
    pub recon_dirs: Vec<Vec<f64>>,
    pub n_theta: usize,
    pub n_phi: usize,
    /// (i, j, axis) of the magnetic component families
    pub magnetic_axes: Vec<(usize, usize, usize)>,
}

/// One plane family of the layout with its geometry.
#[derive(Debug, Clone)]
pub enum FamilySpec {
    Electric { index: usize, frame: PlaneFrame },
    Magnetic { i: usize, j: usize, frame: PlaneFrame },
}

impl FamilySpec {
    pub fn frame(&self) -> &PlaneFrame {
        match self {
            FamilySpec::Electric { frame, .. } => frame,
            FamilySpec::Magnetic { frame, .. } => frame,
        }
    }
}

impl GridLayout {
    pub fn log_radii(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| r_min * (r_max / r_min).powf(k as f64 / (n as f64 - 1.0).max(1.0)))
            .collect()
    }

    pub fn families(&self) -> Result<Vec<FamilySpec>> {
        let mut out = Vec::new();
        for (q, dir) in self.recon_dirs.iter().enumerate() {
            out.push(FamilySpec::Electric { index: q, frame: PlaneFrame::orthogonal_to(dir)? });
        }
        for &(i, j, axis) in &self.magnetic_axes {
            let mut center = vec![0.0; self.dimension];
            center[axis] = 1.0;
            out.push(FamilySpec::Magnetic {
                i,
                j,
                frame: PlaneFrame::coordinate_plane(self.dimension, i, j, &center)?,
            });
        }
        Ok(out)
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|m| std::f64::consts::PI * m as f64 / self.n_theta as f64)
            .collect()
    }

    /// Tangent-circle parameters, inclusive of the +/- pi/2 endpoints.
    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi)
            .map(|p| -FRAC_PI_2 + std::f64::consts::PI * p as f64 / (self.n_phi as f64 - 1.0))
            .collect()
    }

    pub fn n_families(&self) -> usize {
        self.recon_dirs.len() + self.magnetic_axes.len()
    }

    pub fn n_entries(&self) -> usize {
        self.n_families() * self.n_theta * self.n_phi * self.radii.len() * 2
    }

    /// Flat index of (family, theta, phi, radius, orientation).
    pub fn index(&self, f: usize, m: usize, p: usize, k: usize, reversed: bool) -> usize {
        (((f * self.n_theta + m) * self.n_phi + p) * self.radii.len() + k) * 2 + reversed as usize
    }

    /// All symbol points in index order.
    pub fn points(&self) -> Result<Vec<SymbolPoint>> {
        let families = self.families()?;
        let thetas = self.thetas();
        let phis = self.phis();
        let mut out = Vec::with_capacity(self.n_entries());
        for family in &families {
            let frame = family.frame();
            let center = Direction::from_vector(&frame.center)?;
            for &theta in &thetas {
                let omega = Direction::new(frame.omega(theta))?;
                let nu = frame.nu(theta);
                for &phi in &phis {
                    let u: Vec<f64> = center
                        .components()
                        .iter()
                        .zip(&nu)
                        .map(|(c, n)| phi.cos() * c + phi.sin() * n)
                        .collect();
                    for &r in &self.radii {
                        for reversed in [false, true] {
                            let w = if reversed { omega.opposite() } else { omega.clone() };
                            out.push(SymbolPoint { omega: w, yhat: u.clone(), r });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::ConfigInvalid("dimension must be at least 2".into()));
        }
        if self.lambda <= 0.0 {
            return Err(Error::ConfigInvalid("energy must be positive".into()));
        }
        if self.radii.len() < 2 {
            return Err(Error::ConfigInvalid("need at least two radii".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ConfigInvalid("radii must increase".into()));
        }
        if self.n_phi < 5 || self.n_phi % 2 == 0 {
            return Err(Error::ConfigInvalid("n_phi must be odd and at least 5".into()));
        }
        if self.n_theta < 4 {
            return Err(Error::ConfigInvalid("need at least 4 angles".into()));
        }
        for dir in &self.recon_dirs {
            if (norm(dir) - 1.0).abs() > 1e-9 {
                return Err(Error::ConfigInvalid("reconstruction directions must be unit".into()));
            }
        }
        if !self.magnetic_axes.is_empty() && self.dimension != 3 {
            return Err(Error::ConfigInvalid(
                "magnetic component families are defined for dimension 3".into(),
            ));
        }
        Ok(())
    }
}

/// Sampled right symbol a(y, omega; lambda) over a layout.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    pub layout: GridLayout,
    pub values: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn new(layout: GridLayout, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != layout.n_entries() {
            return Err(Error::MalformedInput(format!(
                "value count {} does not match layout ({} entries)",
                values.len(),
                layout.n_entries()
            )));
        }
        Ok(SymbolGrid { layout, values })
    }

    pub fn value(&self, f: usize, m: usize, p: usize, k: usize, reversed: bool) -> Complex64 {
        self.values[self.layout.index(f, m, p, k, reversed)]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.layout.dimension;
        writeln!(out, "# scatsym-grid v{GRID_FORMAT_VERSION}")?;
        writeln!(out, "# dimension: {d}")?;
        writeln!(out, "# energy: {:.17e}", self.layout.lambda)?;
        writeln!(out, "# transport_order: {}", self.layout.n_transport)?;
        writeln!(out, "# chart_order: {}", self.layout.m_alpha)?;
        let layout_json = serde_json::to_string(&self.layout)
            .map_err(|e| Error::MalformedInput(e.to_string()))?;
        writeln!(out, "# layout: {layout_json}")?;
        let mut header: Vec<String> = Vec::new();
        for i in 1..=d {
            header.push(format!("omega_{i}"));
        }
        for i in 1..=d {
            header.push(format!("yhat_{i}"));
        }
        header.push("r".into());
        header.push("re_a".into());
        header.push("im_a".into());
        writeln!(out, "{}", header.join(","))?;
        let points = self.layout.points()?;
        for (pt, v) in points.iter().zip(&self.values) {
            let mut row: Vec<String> = Vec::with_capacity(2 * d + 3);
            for c in pt.omega.components() {
                row.push(format!("{c:.17e}"));
            }
            for c in &pt.yhat {
                row.push(format!("{c:.17e}"));
            }
            row.push(format!("{:.17e}", pt.r));
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut layout: Option<GridLayout> = None;
        let mut version_seen = false;
        let mut values: Vec<Complex64> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("scatsym-grid v") {
                    let v: u32 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::MalformedInput("bad format version".into()))?;
                    if v != GRID_FORMAT_VERSION {
                        return Err(Error::MalformedInput(format!(
                            "unsupported grid format version {v}"
                        )));
                    }
                    version_seen = true;
                } else if let Some(json) = rest.strip_prefix("layout:") {
                    layout = Some(
                        serde_json::from_str(json.trim())
                            .map_err(|e| Error::MalformedInput(format!("layout header: {e}")))?,
                    );
                }
                continue;
            }
            if trimmed.starts_with("omega_1") {
                continue;
            }
            let fields: Result<Vec<f64>> = trimmed
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        Error::MalformedInput(format!("line {}: bad number '{f}'", lineno + 1))
                    })
                })
                .collect();
            rows.push(fields?);
        }
        if !version_seen {
            return Err(Error::MalformedInput("missing format version header".into()));
        }
        let layout = layout.ok_or_else(|| Error::MalformedInput("missing layout header".into()))?;
        layout.validate()?;
        let d = layout.dimension;
        let points = layout.points()?;
        if rows.len() != points.len() {
            // a file missing the reversed-orientation rows halves the count
            if rows.len() * 2 == points.len() {
                return Err(Error::MissingOrientation);
            }
            return Err(Error::MalformedInput(format!(
                "row count {} does not match layout ({} expected)",
                rows.len(),
                points.len()
            )));
        }
        for (row, pt) in rows.iter().zip(&points) {
            if row.len() != 2 * d + 3 {
                return Err(Error::MalformedInput("wrong column count".into()));
            }
            for (a, b) in row[..d].iter().zip(pt.omega.components()) {
                if (a - b).abs() > 1e-9 {
                    return Err(Error::MalformedInput(
                        "row geometry does not match the layout".into(),
                    ));
                }
            }
            if (row[2 * d] - pt.r).abs() > 1e-9 * pt.r {
                return Err(Error::MalformedInput("row radius does not match layout".into()));
            }
            if !row[2 * d + 1].is_finite() || !row[2 * d + 2].is_finite() {
                return Err(Error::MalformedInput("non-finite symbol value".into()));
            }
            values.push(Complex64::new(row[2 * d + 1], row[2 * d + 2]));
        }
        let grid = SymbolGrid::new(layout, values)?;
        // tangency invariant of the stored pairs
        for pt in points.iter().take(64) {
            if dot(&pt.yhat, pt.omega.components()).abs() > 1e-12 {
                return Err(Error::MalformedInput("stored pair is not tangent".into()));
            }
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_layout() -> GridLayout {
        GridLayout {
            dimension: 3,
            lambda: 1.0,
            n_transport: 1,
            m_alpha: 1,
            line_nodes: 128,
            radii: GridLayout::log_radii(8.0, 64.0, 4),
            recon_dirs: vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
            n_theta: 4,
            n_phi: 5,
            magnetic_axes: vec![(0, 1, 2)],
        }
    }

    #[test]
    fn layout_enumeration_is_consistent() {
        let layout = small_layout();
        layout.validate().unwrap();
        let points = layout.points().unwrap();
        assert_eq!(points.len(), layout.n_entries());
        // indexing matches enumeration order
        let idx = layout.index(1, 2, 3, 1, true);
        let pt = &points[idx];
        assert_eq!(pt.r, layout.radii[1]);
        // tangency and unit norms hold everywhere
        for pt in &points {
            assert!(dot(&pt.yhat, pt.omega.components()).abs() < 1e-12);
            assert!((norm(&pt.yhat) - 1.0).abs() < 1e-12);
        }
        // orientation pairs share the tangent point
        let a = &points[layout.index(0, 1, 2, 0, false)];
        let b = &points[layout.index(0, 1, 2, 0, true)];
        assert_eq!(a.yhat, b.yhat);
        assert_eq!(
            a.omega.components().to_vec(),
            b.omega.components().iter().map(|c| -c).collect::<Vec<_>>()
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let layout = small_layout();
        let n = layout.n_entries();
        let values: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + i as f64 * 1e-3, (i as f64).sin() * 1e-4))
            .collect();
        let grid = SymbolGrid::new(layout, values).unwrap();
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let back = SymbolGrid::read_csv(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.layout, grid.layout);
        assert_eq!(back.values, grid.values);
        // byte determinism of the writer
        let mut buf2 = Vec::new();
        grid.write_csv(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn missing_orientation_detected() {
        let layout = small_layout();
        let n = layout.n_entries();
        let grid = SymbolGrid::new(layout, vec![Complex64::new(1.0, 0.0); n]).unwrap();
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // drop every second data row (the reversed orientations)
        let mut kept = Vec::new();
        let mut data_row = 0usize;
        for line in text.lines() {
            if line.starts_with('#') || line.starts_with("omega_1") {
                kept.push(line.to_string());
            } else {
                if data_row % 2 == 0 {
                    kept.push(line.to_string());
                }
                data_row += 1;
            }
        }
        let joined = kept.join("\n");
        match SymbolGrid::read_csv(std::io::BufReader::new(joined.as_bytes())) {
            Err(Error::MissingOrientation) => {}
            other => panic!("expected MissingOrientation, got {other:?}"),
        }
    }

    #[test]
    fn malformed_input_detected() {
        let bad = "# scatsym-grid v1\n# layout: {\"nope\": 1}\n";
        assert!(matches!(
            SymbolGrid::read_csv(std::io::BufReader::new(bad.as_bytes())),
            Err(Error::MalformedInput(_))
        ));
    }
}
