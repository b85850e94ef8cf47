//! State-visitation coverage: counts over the free-cell discretization plus
//! CSV/PNG heatmap export.
//!
//! Coverage fraction = visited free cells / total free cells. Wall cells are
//! excluded from the denominator; emitted reports state this convention.

use std::path::Path;

use super::{EnvError, MazeSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    rows: usize,
    cols: usize,
    cell_size: f64,
    counts: Vec<u64>,
    /// false where the cell is a wall (excluded from coverage).
    free: Vec<bool>,
    visited: usize,
    free_total: usize,
}

impl CoverageGrid {
    /// Discretization matching a maze's wall grid.
    pub fn from_maze(spec: &MazeSpec) -> Self {
        let rows = spec.rows();
        let cols = spec.cols();
        let mut free = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                free.push(!spec.is_wall(r, c));
            }
        }
        let free_total = free.iter().filter(|&&f| f).count();
        Self {
            rows,
            cols,
            cell_size: spec.cell_size,
            counts: vec![0; rows * cols],
            free,
            visited: 0,
            free_total,
        }
    }

    /// Wall-free grid for open arenas.
    pub fn open_arena(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cell_size: 1.0,
            counts: vec![0; rows * cols],
            free: vec![true; rows * cols],
            visited: 0,
            free_total: rows * cols,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_at(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn visited_cells(&self) -> usize {
        self.visited
    }

    pub fn free_cells(&self) -> usize {
        self.free_total
    }

    pub fn coverage_fraction(&self) -> f64 {
        self.visited as f64 / self.free_total as f64
    }

    /// Increments the cell containing `position` (y up, row 0 on top).
    /// A position outside the grid or inside a wall indicates a dynamics bug
    /// and is an error.
    pub fn update(&mut self, position: [f64; 2]) -> Result<(), EnvError> {
        let [x, y] = position;
        let col = (x / self.cell_size).floor();
        let row = self.rows as f64 - 1.0 - (y / self.cell_size).floor();
        if col < 0.0 || row < 0.0 || col >= self.cols as f64 || row >= self.rows as f64 {
            return Err(EnvError::OutsideGrid { x, y });
        }
        let (row, col) = (row as usize, col as usize);
        let idx = row * self.cols + col;
        if !self.free[idx] {
            return Err(EnvError::InsideWall { x, y, row, col });
        }
        if self.counts[idx] == 0 {
            self.visited += 1;
        }
        self.counts[idx] += 1;
        Ok(())
    }
}

/// Writes the count matrix as CSV (`rows,cols` header then row-major counts)
/// and a grayscale PNG where the max-count cell is darkest and walls are
/// mid-gray.
pub fn heatmap_export(
    grid: &CoverageGrid,
    csv_path: &Path,
    png_path: &Path,
) -> Result<(), EnvError> {
    let io_err = |path: &Path, e: std::io::Error| EnvError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };

    let mut csv = format!("{},{}\n", grid.rows, grid.cols);
    for r in 0..grid.rows {
        let row: Vec<String> = (0..grid.cols)
            .map(|c| grid.count_at(r, c).to_string())
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(csv_path, csv).map_err(|e| io_err(csv_path, e))?;

    const CELL_PX: u32 = 24;
    const WALL_GRAY: u8 = 128;
    let max = grid.counts.iter().copied().max().unwrap_or(0);
    let mut img = image::GrayImage::new(
        grid.cols as u32 * CELL_PX,
        grid.rows as u32 * CELL_PX,
    );
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let idx = r * grid.cols + c;
            let shade = if !grid.free[idx] {
                WALL_GRAY
            } else if max == 0 {
                255
            } else {
                255 - ((255.0 * grid.counts[idx] as f64 / max as f64).round() as u8)
            };
            for py in 0..CELL_PX {
                for px in 0..CELL_PX {
                    img.put_pixel(
                        c as u32 * CELL_PX + px,
                        r as u32 * CELL_PX + py,
                        image::Luma([shade]),
                    );
                }
            }
        }
    }
    img.save(png_path).map_err(|e| EnvError::Io {
        path: png_path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(())
}

/// Reads back a heatmap CSV: `(rows, cols, row-major counts)`.
pub fn parse_heatmap_csv(path: &Path) -> Result<(usize, usize, Vec<u64>), EnvError> {
    let text = std::fs::read_to_string(path).map_err(|e| EnvError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let bad = |msg: &str| EnvError::Io {
        path: path.display().to_string(),
        message: msg.to_string(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("bad header"))?;
    if dims.len() != 2 {
        return Err(bad("header must be rows,cols"));
    }
    let mut counts = Vec::with_capacity(dims[0] * dims[1]);
    for line in lines {
        for v in line.split(',') {
            counts.push(v.trim().parse().map_err(|_| bad("bad count"))?);
        }
    }
    if counts.len() != dims[0] * dims[1] {
        return Err(bad("count matrix does not match header dims"));
    }
    Ok((dims[0], dims[1], counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_counts_and_fraction() {
        let spec = MazeSpec::default_medium();
        let mut grid = CoverageGrid::from_maze(&spec);
        let free = grid.free_cells();
        assert!(free > 0);
        assert_eq!(grid.coverage_fraction(), 0.0);

        // One visit at the start cell center.
        let start = spec.start_cell();
        let pos = spec.cell_center(start.0, start.1);
        grid.update(pos).unwrap();
        assert_eq!(grid.visited_cells(), 1);
        assert!((grid.coverage_fraction() - 1.0 / free as f64).abs() < 1e-15);

        // Revisits do not raise the visited count.
        grid.update(pos).unwrap();
        assert_eq!(grid.visited_cells(), 1);
        assert_eq!(grid.count_at(start.0, start.1), 2);

        // Visiting every free cell once gives coverage 1.
        let mut grid = CoverageGrid::from_maze(&spec);
        for r in 0..spec.rows() {
            for c in 0..spec.cols() {
                if !spec.is_wall(r, c) {
                    grid.update(spec.cell_center(r, c)).unwrap();
                }
            }
        }
        assert_eq!(grid.coverage_fraction(), 1.0);
    }

    #[test]
    fn update_rejects_walls_and_outside_positions() {
        let spec = MazeSpec::default_medium();
        let mut grid = CoverageGrid::from_maze(&spec);
        assert!(matches!(
            grid.update([0.5, 0.5]), // border wall cell
            Err(EnvError::InsideWall { .. })
        ));
        assert!(matches!(
            grid.update([-3.0, 4.0]),
            Err(EnvError::OutsideGrid { .. })
        ));
    }

    #[test]
    fn heatmap_roundtrip_and_darkest_pixel() {
        let spec = MazeSpec::default_medium();
        let mut grid = CoverageGrid::from_maze(&spec);
        let start = spec.start_cell();
        for _ in 0..9 {
            grid.update(spec.cell_center(start.0, start.1)).unwrap();
        }
        grid.update(spec.cell_center(3, 4)).unwrap();

        let dir = std::env::temp_dir().join("wbsac-heatmap-test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("h.csv");
        let png = dir.join("h.png");
        heatmap_export(&grid, &csv, &png).unwrap();

        let (rows, cols, counts) = parse_heatmap_csv(&csv).unwrap();
        assert_eq!((rows, cols), (grid.rows(), grid.cols()));
        assert_eq!(counts, grid.counts());

        // The max-count cell maps to the darkest pixel in the image.
        let img = image::open(&png).unwrap().to_luma8();
        let min_pixel = img.pixels().map(|p| p.0[0]).min().unwrap();
        let center_pixel = img.get_pixel(
            start.1 as u32 * 24 + 12,
            start.0 as u32 * 24 + 12,
        );
        assert_eq!(center_pixel.0[0], min_pixel);
        assert_eq!(min_pixel, 0);
        std::fs::remove_file(&csv).ok();
        std::fs::remove_file(&png).ok();
    }

    #[test]
    fn empty_grid_exports_all_zero_csv() {
        let grid = CoverageGrid::open_arena(4, 5);
        let dir = std::env::temp_dir().join("wbsac-heatmap-empty");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("e.csv");
        let png = dir.join("e.png");
        heatmap_export(&grid, &csv, &png).unwrap();
        let (rows, cols, counts) = parse_heatmap_csv(&csv).unwrap();
        assert_eq!((rows, cols), (4, 5));
        assert!(counts.iter().all(|&c| c == 0));
        std::fs::remove_file(&csv).ok();
        std::fs::remove_file(&png).ok();
    }
}
