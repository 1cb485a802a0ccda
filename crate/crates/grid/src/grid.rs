use maip_sim::geometry::{Rect, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};

/// Raster layout over the square world: row 0 at the top (+y), column 0 at −x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cells: usize,
    pub resolution: f64,
    pub half_extent: f64,
}

impl GridSpec {
    pub fn new(half_extent: f64, resolution: f64) -> Result<Self> {
        let extent = 2.0 * half_extent;
        let n = extent / resolution;
        if !(resolution > 0.0) || (n - n.round()).abs() > 1e-9 || n.round() < 1.0 {
            return Err(GridError::Resolution { resolution, extent });
        }
        Ok(Self {
            cells: n.round() as usize,
            resolution,
            half_extent,
        })
    }

    pub fn len(&self) -> usize {
        self.cells * self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    pub fn cell_rect(&self, r: usize, c: usize) -> Rect {
        let x0 = -self.half_extent + c as f64 * self.resolution;
        let y1 = self.half_extent - r as f64 * self.resolution;
        Rect::new(x0, y1 - self.resolution, x0 + self.resolution, y1)
    }

    pub fn cell_center(&self, r: usize, c: usize) -> Vec2 {
        self.cell_rect(r, c).center()
    }

    /// Cell containing `p`; points on the outer boundary map to the edge cell.
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let h = self.half_extent;
        if p.x < -h || p.x > h || p.y < -h || p.y > h {
            return None;
        }
        let c = (((p.x + h) / self.resolution).floor() as usize).min(self.cells - 1);
        let r = (((h - p.y) / self.resolution).floor() as usize).min(self.cells - 1);
        Some((r, c))
    }

    /// Inclusive row/column ranges of cells touching the axis-aligned box.
    pub fn cell_range(&self, lo: Vec2, hi: Vec2) -> Option<((usize, usize), (usize, usize))> {
        let h = self.half_extent;
        if hi.x < -h || lo.x > h || hi.y < -h || lo.y > h {
            return None;
        }
        let clamp = |v: f64| v.clamp(-h, h);
        let (r0, c0) = self.cell_of(Vec2::new(clamp(lo.x), clamp(hi.y)))?;
        let (r1, c1) = self.cell_of(Vec2::new(clamp(hi.x), clamp(lo.y)))?;
        Some(((r0, r1), (c0, c1)))
    }
}

/// Integer-coded square raster (static map, dynamic map, or binary mask).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

pub type StaticGrid = Grid;
pub type DynamicGrid = Grid;
pub type Mask = Grid;

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: u8) -> Self {
        Self {
            rows,
            cols,
            cells: vec![value; rows * cols],
        }
    }

    pub fn for_spec(grid_spec: &GridSpec) -> Self {
        Self::zeros(grid_spec.cells, grid_spec.cells)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.cells[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.cells[r * self.cols + c] = v;
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn count(&self, code: u8) -> usize {
        self.cells.iter().filter(|&&v| v == code).count()
    }

    pub fn count_nonzero(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    /// `(flat index, code)` of every nonzero cell.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i, v))
    }

    pub fn is_binary(&self) -> bool {
        self.cells.iter().all(|&v| v <= 1)
    }

    /// Codes as reals in [0, 1], divided by `max_code`.
    pub fn scaled(&self, max_code: u8) -> Vec<f64> {
        let k = 1.0 / f64::from(max_code);
        self.cells.iter().map(|&v| f64::from(v) * k).collect()
    }
}

impl Grid {
    /// Cellwise maximum, in place.
    pub fn union_with(&mut self, other: &Grid) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(GridError::Shape {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a = (*a).max(b);
        }
        Ok(())
    }
}

/// Elementwise product of a binary mask with a grid.
pub fn apply_mask(mask: &Mask, grid: &Grid) -> Result<Grid> {
    if mask.shape() != grid.shape() {
        return Err(GridError::Shape {
            expected: grid.shape(),
            got: mask.shape(),
        });
    }
    if let Some(&bad) = mask.cells.iter().find(|&&v| v > 1) {
        return Err(GridError::NotBinary(bad));
    }
    Ok(Grid {
        rows: grid.rows,
        cols: grid.cols,
        cells: mask
            .cells
            .iter()
            .zip(&grid.cells)
            .map(|(m, g)| m * g)
            .collect(),
    })
}
