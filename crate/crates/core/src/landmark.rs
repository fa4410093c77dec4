//! Boundary extraction and landmark resampling.
//!
//! A mask is reduced to a fixed-length landmark vector in three steps:
//! Moore-neighbor tracing of the outer boundary ([`trace_boundary`]),
//! then equal arc-length resampling of the closed polygon
//! ([`resample_landmarks`]). [`sobel_magnitude`] provides the edge field the
//! traced boundary is checked against.
//!
//! Correspondence between shapes comes from a fixed convention: every contour
//! starts at the topmost, then leftmost, boundary pixel and runs clockwise in
//! image coordinates (`y` pointing down).

use crate::error::{mismatch, Result, ShapeError};
use crate::raster::BinaryMask;

/// Landmark count used throughout the toolkit unless overridden.
pub const DEFAULT_LANDMARKS: usize = 238;

/// A real-valued raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Magnitude of the 3×3 Sobel gradient of the 0/1 mask, with edge replication
/// at the border.
pub fn sobel_magnitude(mask: &BinaryMask) -> Result<ScalarField> {
    if mask.is_empty() {
        return Err(ShapeError::EmptyRegion);
    }
    let (w, h) = (mask.width(), mask.height());
    let at = |x: isize, y: isize| -> f64 {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        if mask.get(cx, cy) {
            1.0
        } else {
            0.0
        }
    };
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            values.push(gx.hypot(gy));
        }
    }
    Ok(ScalarField {
        width: w,
        height: h,
        values,
    })
}

/// A closed polygon in pixel coordinates.
///
/// Holds at least three vertices, with no two cyclically consecutive vertices
/// equal. Orientation is clockwise in image coordinates, which is a
/// non-negative [`Contour::signed_area`].
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<(f64, f64)>,
}

impl Contour {
    /// Validates the vertex list. A counter-clockwise input is reversed while
    /// keeping its first vertex in place.
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(ShapeError::DegenerateContour(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(ShapeError::InvalidArgument("contour has non-finite coordinates".into()));
        }
        let n = points.len();
        if (0..n).any(|i| points[i] == points[(i + 1) % n]) {
            return Err(ShapeError::DegenerateContour(
                "contour has repeated consecutive points".into(),
            ));
        }
        if shoelace(&points) < 0.0 {
            points[1..].reverse();
        }
        Ok(Contour { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area; positive for clockwise loops when `y` points down.
    pub fn signed_area(&self) -> f64 {
        shoelace(&self.points)
    }

    /// Length of the closed polygon including the closing edge.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| dist(self.points[i], self.points[(i + 1) % n]))
            .sum()
    }
}

fn shoelace(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    0.5 * twice
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

// Clockwise on screen, starting east.
const MOORE: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn moore_index(dx: isize, dy: isize) -> usize {
    MOORE
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("backtrack pixel is always an 8-neighbor")
}

/// Traces the outer boundary of the foreground region containing the
/// topmost-leftmost foreground pixel, following 8-connected Moore neighbors.
///
/// The loop closes when the tracer is back at the start pixel about to repeat
/// its first move, so one-pixel-wide necks are walked in both directions.
pub fn trace_boundary(mask: &BinaryMask) -> Result<Contour> {
    let start = (0..mask.height())
        .flat_map(|y| (0..mask.width()).map(move |x| (x, y)))
        .find(|&(x, y)| mask.get(x, y))
        .ok_or(ShapeError::EmptyRegion)?;
    let start = (start.0 as isize, start.1 as isize);

    let next_from = |p: (isize, isize), back: (isize, isize)| -> Option<((isize, isize), (isize, isize))> {
        let first = moore_index(back.0 - p.0, back.1 - p.1);
        let mut prev = back;
        for k in 1..=8 {
            let (dx, dy) = MOORE[(first + k) % 8];
            let q = (p.0 + dx, p.1 + dy);
            if mask.get_signed(q.0, q.1) {
                return Some((q, prev));
            }
            prev = q;
        }
        None
    };

    // The west neighbor of the topmost-leftmost pixel is background.
    let Some((second, mut back)) = next_from(start, (start.0 - 1, start.1)) else {
        return Err(ShapeError::DegenerateContour(
            "single isolated pixel has no boundary loop".into(),
        ));
    };

    let mut pixels = vec![start];
    let mut current = second;
    // Each boundary pixel is entered at most 4 times in an 8-connected trace.
    let limit = 4 * mask.width() * mask.height() + 8;
    loop {
        let (next, next_back) = next_from(current, back).expect("current pixel has a neighbor");
        if current == start && next == second {
            break;
        }
        pixels.push(current);
        if pixels.len() > limit {
            return Err(ShapeError::DegenerateContour("boundary trace did not close".into()));
        }
        back = next_back;
        current = next;
    }

    if pixels.len() < 3 {
        return Err(ShapeError::DegenerateContour(format!(
            "region boundary has only {} pixels",
            pixels.len()
        )));
    }
    Contour::new(
        pixels
            .into_iter()
            .map(|(x, y)| (x as f64, y as f64))
            .collect(),
    )
}

/// A flat landmark vector `[x1, y1, ..., xn, yn]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkShape {
    coords: Vec<f64>,
}

impl LandmarkShape {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(ShapeError::InvalidArgument(format!(
                "landmark vector length must be a positive even number, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(ShapeError::InvalidArgument("landmark coordinates must be finite".into()));
        }
        Ok(LandmarkShape { coords })
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().flat_map(|&(x, y)| [x, y]).collect())
    }

    /// Number of landmarks `n`.
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn point(&self, i: usize) -> (f64, f64) {
        (self.coords[2 * i], self.coords[2 * i + 1])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coords.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let (sx, sy) = self.points().fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y));
        (sx / n, sy / n)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> LandmarkShape {
        LandmarkShape {
            coords: self
                .coords
                .chunks_exact(2)
                .flat_map(|c| [c[0] + dx, c[1] + dy])
                .collect(),
        }
    }

    /// The shape with its centroid moved to the origin.
    pub fn centered(&self) -> LandmarkShape {
        let (cx, cy) = self.centroid();
        self.translated(-cx, -cy)
    }

    /// Euclidean norm of the flat coordinate vector.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Norm after centroid removal.
    pub fn centroid_norm(&self) -> f64 {
        self.centered().norm()
    }

    pub fn scaled(&self, factor: f64) -> LandmarkShape {
        LandmarkShape {
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    /// Sum of squared coordinate differences.
    pub fn squared_distance(&self, other: &LandmarkShape) -> Result<f64> {
        self.check_same_n(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    pub(crate) fn check_same_n(&self, other: &LandmarkShape) -> Result<()> {
        if self.n() != other.n() {
            return Err(mismatch(
                format!("{} landmarks", other.n()),
                format!("{} landmarks", self.n()),
            ));
        }
        Ok(())
    }
}

/// Places `n` landmarks at equal arc-length spacing around the closed
/// contour, interpolating linearly along its edges. Landmark 0 is the
/// contour's first vertex.
pub fn resample_landmarks(contour: &Contour, n: usize) -> Result<LandmarkShape> {
    if n < 3 {
        return Err(ShapeError::InvalidArgument(format!(
            "landmark count must be at least 3, got {n}"
        )));
    }
    let pts = contour.points();
    let m = pts.len();
    let perimeter = contour.perimeter();
    if perimeter.is_nan() || perimeter <= 0.0 {
        return Err(ShapeError::DegenerateContour("contour perimeter is zero".into()));
    }
    let step = perimeter / n as f64;

    let mut coords = Vec::with_capacity(2 * n);
    let mut edge = 0usize;
    let mut edge_start = 0.0;
    let mut edge_len = dist(pts[0], pts[1 % m]);
    for i in 0..n {
        let target = i as f64 * step;
        while edge + 1 < m && edge_start + edge_len < target {
            edge_start += edge_len;
            edge += 1;
            edge_len = dist(pts[edge], pts[(edge + 1) % m]);
        }
        let (x0, y0) = pts[edge];
        let (x1, y1) = pts[(edge + 1) % m];
        let t = if edge_len > 0.0 {
            ((target - edge_start) / edge_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        coords.push(x0 + t * (x1 - x0));
        coords.push(y0 + t * (y1 - y0));
    }
    LandmarkShape::new(coords)
}

/// Full landmarking of a single-region mask.
pub fn mask_landmarks(mask: &BinaryMask, n: usize) -> Result<LandmarkShape> {
    resample_landmarks(&trace_boundary(mask)?, n)
}
