//! Pixel-space polygons: convex hulls and even-odd rasterization.

use serde::{Deserialize, Serialize};

use crate::camera::PixelPoint;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<PixelPoint>,
}

/// A run of pixels `x_start..x_end` on row `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub y: usize,
    pub x_start: usize,
    pub x_end: usize,
}

impl Polygon {
    pub fn new(vertices: Vec<PixelPoint>) -> Self {
        Polygon { vertices }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn translated(&self, du: f64, dv: f64) -> Polygon {
        Polygon::new(self.vertices.iter().map(|p| PixelPoint::new(p.u + du, p.v + dv)).collect())
    }

    fn edges(&self) -> impl Iterator<Item = (PixelPoint, PixelPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd test with a half-open rule: a point is inside when a ray
    /// towards +u crosses the boundary an odd number of times.
    pub fn contains(&self, point: PixelPoint) -> bool {
        if self.is_empty() {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.v > point.v) != (b.v > point.v) && point.u < crossing(a, b, point.v) {
                inside = !inside;
            }
        }
        inside
    }

    /// Pixel-centre scanline fill clipped to a `width × height` image.
    pub fn spans(&self, width: usize, height: usize) -> Vec<Span> {
        let mut out = Vec::new();
        if self.is_empty() {
            return out;
        }
        let mut xs = Vec::new();
        for y in 0..height {
            let yf = y as f64;
            xs.clear();
            xs.extend(
                self.edges()
                    .filter(|(a, b)| (a.v > yf) != (b.v > yf))
                    .map(|(a, b)| crossing(a, b, yf)),
            );
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                // centres x with pair[0] <= x < pair[1]
                let start = pair[0].ceil().max(0.0);
                let end = pair[1].ceil().min(width as f64);
                if end > start {
                    out.push(Span {
                        y,
                        x_start: start as usize,
                        x_end: end as usize,
                    });
                }
            }
        }
        out
    }

    /// Number of pixel centres inside the polygon.
    pub fn area_pixels(&self, width: usize, height: usize) -> usize {
        self.spans(width, height).iter().map(|s| s.x_end - s.x_start).sum()
    }
}

fn crossing(a: PixelPoint, b: PixelPoint, v: f64) -> f64 {
    a.u + (v - a.v) * (b.u - a.u) / (b.v - a.v)
}

/// Counter-clockwise convex hull (in image axes) by Andrew's monotone chain.
/// Collinear points are dropped.
pub fn convex_hull(points: &[PixelPoint]) -> Polygon {
    let mut pts: Vec<PixelPoint> = points.iter().copied().filter(|p| p.is_finite()).collect();
    pts.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
    pts.dedup();
    if pts.len() < 3 {
        return Polygon::new(pts);
    }
    let cross = |o: PixelPoint, a: PixelPoint, b: PixelPoint| (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
    let mut hull: Vec<PixelPoint> = Vec::with_capacity(2 * pts.len());
    for pass in [pts.clone(), pts.iter().rev().copied().collect()] {
        let floor = hull.len();
        for p in pass {
            while hull.len() >= floor + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    Polygon::new(hull)
}
