//! Uniform Cartesian grids on boxes [-R, R]^n and scalar fields on them,
//! with CSV and little-endian binary round trips.

use crate::error::{Error, Result};
use crate::surface::Surface;
use std::io::{Read, Write};
use std::path::Path;

/// Uniform grid over [-R, R]^n, n in {1, 2, 3}. The spacing must divide the
/// box to machine precision and every axis carries at least 9 nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
    r: f64,
    m: usize,
}

impl Grid {
    pub fn new(n: usize, r: f64, h: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::DimensionUnsupported(format!(
                "grid dimension {n} outside {{1, 2, 3}}"
            )));
        }
        if !(h > 0.0 && r > 0.0) {
            return Err(Error::InvalidInput("grid needs positive R and h".into()));
        }
        let cells = 2.0 * r / h;
        let m_cells = cells.round();
        if (cells - m_cells).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "spacing {h} does not divide the box [-{r}, {r}]"
            )));
        }
        let m = m_cells as usize + 1;
        if m < 9 {
            return Err(Error::InvalidInput(format!(
                "only {m} nodes per axis; need at least 9"
            )));
        }
        Ok(Grid { n, h, r, m })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.m
    }

    pub fn node_count(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for k in 0..self.n {
            f = f * self.m + idx[k];
        }
        f
    }

    pub fn unflat(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for k in (0..self.n).rev() {
            idx[k] = flat % self.m;
            flat /= self.m;
        }
        idx
    }

    pub fn coord_1d(&self, i: usize) -> f64 {
        -self.r + self.h * i as f64
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflat(flat);
        (0..self.n).map(|k| self.coord_1d(idx[k])).collect()
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let idx = self.unflat(flat);
        (0..self.n).any(|k| idx[k] == 0 || idx[k] == self.m - 1)
    }

    /// Flat index of the node at coordinates `x`, if `x` sits on the grid.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let mut idx = [0usize; 3];
        for k in 0..self.n {
            let t = (x[k] + self.r) / self.h;
            let i = t.round();
            if (t - i).abs() > 1e-8 || i < 0.0 || i as usize >= self.m {
                return None;
            }
            idx[k] = i as usize;
        }
        Some(self.flat(&idx[..self.n]))
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&f| !self.is_boundary(f))
            .collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&f| self.is_boundary(f))
            .collect()
    }

    /// Flat offset of a unit step along axis `k`.
    pub fn stride(&self, k: usize) -> usize {
        self.m.pow((self.n - 1 - k) as u32)
    }
}

/// Scalar field on a grid. The boundary slice holds Dirichlet data: solvers
/// update interior values only.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.node_count()];
        GridFunction { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match grid ({} nodes)",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite grid value".into()));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| f(&grid.coords(k)))
            .collect();
        GridFunction { grid, values }
    }

    pub fn sample(grid: Grid, s: &impl Surface) -> Self {
        Self::from_fn(grid, |x| s.value(x))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn set(&mut self, flat: usize, v: f64) {
        self.values[flat] = v;
    }

    /// Largest |self - other| over nodes shared with `other` inside the
    /// Euclidean ball of the given radius. The grids must have equal spacing.
    pub fn sup_diff_on_ball(&self, other: &GridFunction, radius: f64) -> Result<f64> {
        if (self.grid.spacing() - other.grid.spacing()).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "sup_diff_on_ball needs equal spacings".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        let mut any = false;
        for k in 0..self.grid.node_count() {
            let x = self.grid.coords(k);
            let r2: f64 = x.iter().map(|c| c * c).sum();
            if r2 > radius * radius + 1e-12 {
                continue;
            }
            if let Some(j) = other.grid.node_at(&x) {
                any = true;
                worst = worst.max((self.values[k] - other.values[j]).abs());
            }
        }
        if !any {
            return Err(Error::InvalidInput("grids share no nodes in the ball".into()));
        }
        Ok(worst)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let names = ["x1", "x2", "x3"];
        let header: Vec<&str> = names[..self.grid.dim()].to_vec();
        out.push_str(&header.join(","));
        out.push_str(",value\n");
        for k in 0..self.grid.node_count() {
            for c in self.grid.coords(k) {
                out.push_str(&format!("{c:.16e},"));
            }
            out.push_str(&format!("{:.16e}\n", self.values[k]));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Compact binary layout: magic, u32 n, f64 h, f64 R, u64 nodes per
    /// axis, then row-major values. All little-endian, 64-bit floats.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(b"MGKGRID1")?;
        f.write_all(&(self.grid.dim() as u32).to_le_bytes())?;
        f.write_all(&self.grid.spacing().to_le_bytes())?;
        f.write_all(&self.grid.radius().to_le_bytes())?;
        f.write_all(&(self.grid.nodes_per_axis() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut f = std::fs::File::open(path)?;
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != b"MGKGRID1" {
            return Err(Error::InvalidInput("bad grid file magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        f.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        f.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        f.read_exact(&mut b8)?;
        let r = f64::from_le_bytes(b8);
        f.read_exact(&mut b8)?;
        let m = u64::from_le_bytes(b8) as usize;
        let grid = Grid::new(n, r, h)?;
        if grid.nodes_per_axis() != m {
            return Err(Error::InvalidInput("grid header inconsistent".into()));
        }
        let mut buf = Vec::new();
        f.read_to_end(&mut buf)?;
        if buf.len() != 8 * grid.node_count() {
            return Err(Error::InvalidInput("grid payload truncated".into()));
        }
        let values: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        GridFunction::from_values(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction_rules() {
        assert!(Grid::new(2, 2.0, 0.1).is_ok());
        assert!(Grid::new(2, 2.0, 0.3).is_err()); // 0.3 does not divide 4
        assert!(Grid::new(2, 1.0, 0.5).is_err()); // only 5 nodes per axis
        assert!(Grid::new(4, 2.0, 0.1).is_err());
    }

    #[test]
    fn index_round_trip_and_boundary() {
        let g = Grid::new(3, 1.0, 0.25).unwrap();
        assert_eq!(g.nodes_per_axis(), 9);
        for flat in [0, 5, 123, g.node_count() - 1] {
            let idx = g.unflat(flat);
            assert_eq!(g.flat(&idx[..3]), flat);
        }
        assert!(g.is_boundary(0));
        let center = g.flat(&[4, 4, 4]);
        assert!(!g.is_boundary(center));
        let x = g.coords(center);
        assert!(x.iter().all(|&c| c.abs() < 1e-15));
        assert_eq!(g.node_at(&x), Some(center));
        assert_eq!(g.node_at(&[0.1, 0.0, 0.0]), None);
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(2, 1.0, 0.125).unwrap();
        let f = GridFunction::from_fn(g, |x| (x[0] * 1.7 - x[1] * 0.3).sin());
        let dir = std::env::temp_dir().join("minkgauss_grid_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trip.grid");
        f.write_binary(&path).unwrap();
        let f2 = GridFunction::read_binary(&path).unwrap();
        assert_eq!(f, f2);
    }

    #[test]
    fn sup_diff_on_shared_nodes() {
        let small = GridFunction::from_fn(Grid::new(2, 1.0, 0.125).unwrap(), |x| x[0] + x[1]);
        let big = GridFunction::from_fn(Grid::new(2, 2.0, 0.125).unwrap(), |x| x[0] + x[1] + 0.5);
        let d = small.sup_diff_on_ball(&big, 0.5).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }
}
