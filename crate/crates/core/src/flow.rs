//! Dense optical flow fields and their cell-averaged grids.
//!
//! Flow files are little-endian binary: the magic `SMFL`, `u32` width,
//! `u32` height, then `height × width` pairs of `f32` `(du, dv)` in row-major
//! order. A pair containing NaN marks an invalid pixel.

use std::io::{Read, Write};
use std::path::Path;

use crate::camera::PixelPoint;
use crate::error::{Error, Result};

pub const FLOW_MAGIC: &[u8; 4] = b"SMFL";
pub const DEFAULT_CELL_SIZE: usize = 5;

/// Per-pixel displacement field. Invalid pixels hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFlow {
    width: usize,
    height: usize,
    data: Vec<[f64; 2]>,
}

impl DenseFlow {
    /// A field with every pixel invalid.
    pub fn invalid(width: usize, height: usize) -> Self {
        DenseFlow {
            width,
            height,
            data: vec![[f64::NAN, f64::NAN]; width * height],
        }
    }

    pub fn uniform(width: usize, height: usize, du: f64, dv: f64) -> Self {
        DenseFlow {
            width,
            height,
            data: vec![[du, dv]; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<[f64; 2]>) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).unwrap_or([f64::NAN, f64::NAN]));
            }
        }
        DenseFlow { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<[f64; 2]> {
        let v = self.data[y * self.width + x];
        (v[0].is_finite() && v[1].is_finite()).then_some(v)
    }

    pub fn set(&mut self, x: usize, y: usize, value: Option<[f64; 2]>) {
        self.data[y * self.width + x] = value.unwrap_or([f64::NAN, f64::NAN]);
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(FLOW_MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&(v[0] as f32).to_le_bytes());
            buf.extend_from_slice(&(v[1] as f32).to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_from(mut r: impl Read) -> std::result::Result<Self, String> {
        let mut header = [0u8; 12];
        r.read_exact(&mut header).map_err(|e| format!("truncated header: {e}"))?;
        if &header[..4] != FLOW_MAGIC {
            return Err("bad magic, expected SMFL".into());
        }
        let width = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut body = vec![0u8; width * height * 8];
        r.read_exact(&mut body).map_err(|e| format!("truncated body: {e}"))?;
        let data = body
            .chunks_exact(8)
            .map(|c| {
                let du = f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64;
                let dv = f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64;
                if du.is_nan() || dv.is_nan() {
                    [f64::NAN, f64::NAN]
                } else {
                    [du, dv]
                }
            })
            .collect();
        Ok(DenseFlow { width, height, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file)).map_err(|m| Error::format(path, m))
    }
}

/// Cell-averaged flow: one mean displacement (or nothing) per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGrid {
    cell_size: usize,
    cols: usize,
    rows: usize,
    image_width: usize,
    image_height: usize,
    cells: Vec<Option<[f64; 2]>>,
}

impl FlowGrid {
    /// Grid of the given image size with all cells invalid.
    pub fn empty(image_width: usize, image_height: usize, cell_size: usize) -> Self {
        let cols = image_width.div_ceil(cell_size);
        let rows = image_height.div_ceil(cell_size);
        FlowGrid {
            cell_size,
            cols,
            rows,
            image_width,
            image_height,
            cells: vec![None; cols * rows],
        }
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn image_size(&self) -> (usize, usize) {
        (self.image_width, self.image_height)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, col: usize, row: usize) -> Option<[f64; 2]> {
        self.cells[row * self.cols + col]
    }

    pub fn cell(&self, index: usize) -> Option<[f64; 2]> {
        self.cells[index]
    }

    pub fn set(&mut self, col: usize, row: usize, value: Option<[f64; 2]>) {
        self.cells[row * self.cols + col] = value;
    }

    pub fn valid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Pixel span `[x0, x1) × [y0, y1)` covered by a cell, clipped to the image.
    pub fn cell_bounds(&self, col: usize, row: usize) -> (usize, usize, usize, usize) {
        let x0 = col * self.cell_size;
        let y0 = row * self.cell_size;
        (
            x0,
            (x0 + self.cell_size).min(self.image_width),
            y0,
            (y0 + self.cell_size).min(self.image_height),
        )
    }

    /// Centre of the pixels a cell covers; this is the representative point
    /// the cell's flow is attached to.
    pub fn cell_center(&self, col: usize, row: usize) -> PixelPoint {
        let (x0, x1, y0, y1) = self.cell_bounds(col, row);
        PixelPoint::new((x0 + x1 - 1) as f64 / 2.0, (y0 + y1 - 1) as f64 / 2.0)
    }

    pub fn index_of(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    pub fn col_row(&self, index: usize) -> (usize, usize) {
        (index % self.cols, index / self.cols)
    }
}

/// Averages a dense field onto a `cell_size` grid. A cell with fewer than half
/// of its pixels valid is marked invalid.
pub fn average_flow(flow: &DenseFlow, cell_size: usize, image_size: (usize, usize)) -> Result<FlowGrid> {
    if cell_size == 0 {
        return Err(Error::InvalidParameter("cell_size must be positive".into()));
    }
    if (flow.width, flow.height) != image_size {
        return Err(Error::DimensionMismatch {
            expected: image_size,
            actual: (flow.width, flow.height),
        });
    }
    let mut grid = FlowGrid::empty(flow.width, flow.height, cell_size);
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let (x0, x1, y0, y1) = grid.cell_bounds(col, row);
            let total = (x1 - x0) * (y1 - y0);
            let mut sum = [0.0, 0.0];
            let mut valid = 0usize;
            for y in y0..y1 {
                for x in x0..x1 {
                    if let Some(v) = flow.get(x, y) {
                        sum[0] += v[0];
                        sum[1] += v[1];
                        valid += 1;
                    }
                }
            }
            if 2 * valid >= total {
                let n = valid as f64;
                grid.set(col, row, Some([sum[0] / n, sum[1] / n]));
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_flow_averages_to_itself() {
        let flow = DenseFlow::uniform(20, 15, 3.0, -2.0);
        let grid = average_flow(&flow, 5, (20, 15)).unwrap();
        assert_eq!((grid.cols(), grid.rows()), (4, 3));
        for i in 0..grid.len() {
            assert_eq!(grid.cell(i), Some([3.0, -2.0]));
        }
    }

    #[test]
    fn all_invalid_field_gives_invalid_cells() {
        let flow = DenseFlow::invalid(10, 10);
        let grid = average_flow(&flow, 5, (10, 10)).unwrap();
        assert_eq!(grid.valid_count(), 0);
    }

    #[test]
    fn checkerboard_averages_to_midpoint() {
        // even cell size so both colours appear equally often
        let flow = DenseFlow::from_fn(8, 8, |x, y| Some(if (x + y) % 2 == 0 { [0.0, 0.0] } else { [2.0, 2.0] }));
        let grid = average_flow(&flow, 4, (8, 8)).unwrap();
        for i in 0..grid.len() {
            assert_eq!(grid.cell(i), Some([1.0, 1.0]));
        }
    }

    #[test]
    fn half_valid_cell_is_kept_and_less_is_dropped() {
        // 2×2 cells: 2 of 4 valid keeps it, 1 of 4 drops it
        let flow = DenseFlow::from_fn(4, 2, |x, y| match (x, y) {
            (0, 0) | (1, 0) => Some([1.0, 0.0]),
            (2, 0) => Some([4.0, 4.0]),
            _ => None,
        });
        let grid = average_flow(&flow, 2, (4, 2)).unwrap();
        assert_eq!(grid.get(0, 0), Some([1.0, 0.0]));
        assert_eq!(grid.get(1, 0), None);
    }

    #[test]
    fn grid_dims_round_up_and_partial_cells_use_their_pixels() {
        let flow = DenseFlow::uniform(12, 7, 1.0, 1.0);
        let grid = average_flow(&flow, 5, (12, 7)).unwrap();
        assert_eq!((grid.cols(), grid.rows()), (3, 2));
        assert_eq!(grid.cell_bounds(2, 1), (10, 12, 5, 7));
        assert_eq!(grid.cell_center(0, 0), PixelPoint::new(2.0, 2.0));
        assert_eq!(grid.cell_center(2, 1), PixelPoint::new(10.5, 5.5));
        assert_eq!(grid.get(2, 1), Some([1.0, 1.0]));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let flow = DenseFlow::uniform(10, 10, 0.0, 0.0);
        assert!(matches!(
            average_flow(&flow, 5, (640, 480)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn file_round_trip_preserves_f32_values_and_invalid_pixels() {
        let flow = DenseFlow::from_fn(3, 2, |x, y| (x != 1).then_some([x as f64 * 0.25, -(y as f64)]));
        let mut bytes = Vec::new();
        flow.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"SMFL");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 12 + 3 * 2 * 8);
        let back = DenseFlow::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back.get(0, 1), Some([0.0, -1.0]));
        assert_eq!(back.get(1, 0), None);
        assert_eq!(back.get(2, 0), Some([0.5, 0.0]));
    }

    #[test]
    fn bad_magic_is_rejected() {
        let bytes = b"XXXX\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00";
        assert!(DenseFlow::read_from(&bytes[..]).is_err());
    }
}
