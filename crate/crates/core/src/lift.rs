//! Lifting cell-averaged flow onto the unit sphere.

use rayon::prelude::*;

use crate::camera::{FisheyeCalibration, PixelPoint};
use crate::flow::FlowGrid;
use crate::motion::FramePairGeometry;
use crate::sphere::UnitVector3;

/// One flow cell seen on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCorrespondence {
    /// Previous-view ray rotated into the current camera frame.
    pub p: UnitVector3,
    /// Previous-view ray in the previous camera frame.
    pub p_raw: UnitVector3,
    /// Current-view ray.
    pub p_cur: UnitVector3,
    /// Index of the grid cell (row-major).
    pub cell: usize,
}

#[derive(Debug, Clone, Default)]
pub struct LiftResult {
    pub correspondences: Vec<SphericalCorrespondence>,
    /// Valid cells whose start or end point fell outside the field of view.
    pub dropped: usize,
}

/// Lifts every valid cell: the cell centre `u` and its displaced end point
/// `u + (du, dv)` are unprojected, and the previous ray is rotated into the
/// current frame.
pub fn lift_correspondences(
    grid: &FlowGrid,
    calib: &FisheyeCalibration,
    geom: &FramePairGeometry,
) -> LiftResult {
    let lifted: Vec<Option<SphericalCorrespondence>> = (0..grid.len())
        .into_par_iter()
        .filter_map(|index| {
            let [du, dv] = grid.cell(index)?;
            let (col, row) = grid.col_row(index);
            let u = grid.cell_center(col, row);
            let lift = || {
                let p_raw = calib.unproject(u).ok()?;
                let p_cur = calib.unproject(PixelPoint::new(u.u + du, u.v + dv)).ok()?;
                let p = UnitVector3::from_vector(geom.rotation * p_raw.into_vector()).ok()?;
                Some(SphericalCorrespondence {
                    p,
                    p_raw,
                    p_cur,
                    cell: index,
                })
            };
            Some(lift())
        })
        .collect();
    let dropped = lifted.iter().filter(|c| c.is_none()).count();
    LiftResult {
        correspondences: lifted.into_iter().flatten().collect(),
        dropped,
    }
}
