//! Binary masks, probability maps, and connected-component extraction.
//!
//! All rasters are row-major with `x` as the column index and `y` as the row
//! index, so pixel `(x, y)` lives at `y * width + x`.

use crate::error::{mismatch, Result, ShapeError};

/// Minimum component area (exclusive) used before shape analysis.
pub const DEFAULT_MIN_AREA: usize = 50;

/// Default probability threshold for turning a prediction into a mask.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Pixel adjacency used for component labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Edge neighbors only.
    Four,
    /// Edge and corner neighbors.
    #[default]
    Eight,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(ShapeError::InvalidArgument(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

/// A `width × height` boolean raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(mismatch(
                format!("{} pixels", width * height),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(BinaryMask {
            width,
            height,
            pixels,
        })
    }

    /// An all-background mask.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Builds a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(BinaryMask {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn area(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    pub fn same_dims(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Shifts the foreground by `(dx, dy)` on a canvas of the same size.
    /// Pixels shifted off the canvas are dropped.
    pub fn translated(&self, dx: isize, dy: isize) -> BinaryMask {
        let mut out = vec![false; self.pixels.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                    out[ny as usize * self.width + nx as usize] = true;
                }
            }
        }
        BinaryMask {
            width: self.width,
            height: self.height,
            pixels: out,
        }
    }
}

/// A `width × height` raster of probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(mismatch(
                format!("{} values", width * height),
                format!("{} values", values.len()),
            ));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ShapeError::InvalidArgument(format!(
                "probability at index {i} is {v}, outside [0, 1]"
            )));
        }
        Ok(ProbabilityMap {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// The 0/1 map of a binary mask.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        ProbabilityMap {
            width: mask.width,
            height: mask.height,
            values: mask.pixels.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(ShapeError::InvalidArgument(format!(
            "raster dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Pixel `true` iff its probability is `>= theta`.
pub fn threshold_probability(pmap: &ProbabilityMap, theta: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(ShapeError::InvalidArgument(format!(
            "threshold {theta} outside [0, 1]"
        )));
    }
    Ok(BinaryMask {
        width: pmap.width,
        height: pmap.height,
        pixels: pmap.values.iter().map(|&v| v >= theta).collect(),
    })
}

/// Labeled connected components of a mask.
///
/// Label `0` is background; foreground labels are `1..=K`, numbered in the
/// order their first pixel is met in a row-major scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSet {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    areas: Vec<usize>,
}

impl ComponentSet {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Number of components `K`.
    pub fn count(&self) -> usize {
        self.areas.len()
    }

    /// Areas indexed by `label - 1`.
    pub fn areas(&self) -> &[usize] {
        &self.areas
    }

    pub fn area(&self, label: u32) -> usize {
        if label == 0 {
            self.labels.iter().filter(|&&l| l == 0).count()
        } else {
            self.areas[label as usize - 1]
        }
    }

    /// Mask of the pixels carrying `label`.
    pub fn component_mask(&self, label: u32) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            pixels: self.labels.iter().map(|&l| l == label && label != 0).collect(),
        }
    }

    /// The label with the largest area; ties go to the lowest label.
    pub fn largest(&self) -> Option<(u32, usize)> {
        let mut best: Option<(u32, usize)> = None;
        for (i, &a) in self.areas.iter().enumerate() {
            if best.is_none_or(|(_, ba)| a > ba) {
                best = Some((i as u32 + 1, a));
            }
        }
        best
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentSet {
    let (w, h) = (mask.width, mask.height);
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet { parent: vec![0] };

    // Already-visited neighbors in a row-major scan.
    let back: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let mut current = 0u32;
            for &(dx, dy) in back {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if !mask.get_signed(nx, ny) {
                    continue;
                }
                let l = provisional[ny as usize * w + nx as usize];
                if current == 0 {
                    current = l;
                } else if l != current {
                    sets.union(current, l);
                }
            }
            if current == 0 {
                current = sets.parent.len() as u32;
                sets.parent.push(current);
            }
            provisional[y * w + x] = current;
        }
    }

    let mut remap = vec![0u32; sets.parent.len()];
    let mut areas = Vec::new();
    let mut labels = vec![0u32; w * h];
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = sets.find(p) as usize;
        if remap[root] == 0 {
            areas.push(0);
            remap[root] = areas.len() as u32;
        }
        let l = remap[root];
        labels[i] = l;
        areas[l as usize - 1] += 1;
    }

    ComponentSet {
        width: w,
        height: h,
        labels,
        areas,
    }
}

/// Keeps only the largest component, provided its area is strictly greater
/// than `min_area`. Returns `None` otherwise.
pub fn largest_component_above(
    mask: &BinaryMask,
    min_area: usize,
    connectivity: Connectivity,
) -> Option<BinaryMask> {
    let components = connected_components(mask, connectivity);
    let (label, area) = components.largest()?;
    (area > min_area).then(|| components.component_mask(label))
}
