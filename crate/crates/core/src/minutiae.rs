//! Minutiae detection on skeletal perfusion images.
//!
//! Skeletons are first normalized to a common frame (320x224 in the
//! standard pipeline) so block features are comparable across faces. Two
//! extractors are provided: plain 3x3 neighbor counting and the crossing
//! number. They are distinct detectors and disagree by design on short
//! runs, e.g. a pixel with two ring-adjacent neighbors is a normal point
//! to the first and a termination to the second.

use crate::error::{Error, Result};
use crate::imaging::BinaryImage;
use crate::skeleton::{medial_axis, SkeletonImage};

/// Standard normalized frame width.
pub const NORMALIZED_WIDTH: u32 = 320;
/// Standard normalized frame height.
pub const NORMALIZED_HEIGHT: u32 = 224;

/// Ridge feature classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MinutiaKind {
    /// Ridge ends.
    Termination,
    /// Ridge splits in two.
    Bifurcation,
    /// Ridge continues; detected but excluded from feature counts by
    /// default.
    Normal,
}

impl MinutiaKind {
    pub fn as_char(self) -> char {
        match self {
            MinutiaKind::Termination => 'T',
            MinutiaKind::Bifurcation => 'B',
            MinutiaKind::Normal => 'N',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'T' => Some(MinutiaKind::Termination),
            'B' => Some(MinutiaKind::Bifurcation),
            'N' => Some(MinutiaKind::Normal),
            _ => None,
        }
    }
}

/// A located ridge feature: `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Minutia {
    pub x: u32,
    pub y: u32,
    pub kind: MinutiaKind,
}

/// Minutiae of one image together with the frame they live in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinutiaeSet {
    pub width: u32,
    pub height: u32,
    pub points: Vec<Minutia>,
}

impl MinutiaeSet {
    /// Points of the given kind.
    pub fn count_of(&self, kind: MinutiaKind) -> usize {
        self.points.iter().filter(|m| m.kind == kind).count()
    }

    /// Line-oriented text form: header `w h`, then one `x y kind` line per
    /// point with kind in {T, B, N}.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for m in &self.points {
            out.push_str(&format!("{} {} {}\n", m.x, m.y, m.kind.as_char()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::malformed("minutiae text", "missing header"))?;
        let mut it = header.split_whitespace();
        let (w, h) = match (it.next(), it.next(), it.next()) {
            (Some(w), Some(h), None) => (
                w.parse::<u32>()
                    .map_err(|e| Error::malformed("minutiae text", format!("width: {e}")))?,
                h.parse::<u32>()
                    .map_err(|e| Error::malformed("minutiae text", format!("height: {e}")))?,
            ),
            _ => return Err(Error::malformed("minutiae text", "header must be `w h`")),
        };
        let mut points = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::malformed(
                    "minutiae text",
                    format!("expected `x y kind`, got {line:?}"),
                ));
            }
            let x: u32 = fields[0]
                .parse()
                .map_err(|e| Error::malformed("minutiae text", format!("x: {e}")))?;
            let y: u32 = fields[1]
                .parse()
                .map_err(|e| Error::malformed("minutiae text", format!("y: {e}")))?;
            let kind = fields[2]
                .chars()
                .next()
                .and_then(MinutiaKind::from_char)
                .filter(|_| fields[2].len() == 1)
                .ok_or_else(|| {
                    Error::malformed("minutiae text", format!("kind must be T, B or N: {line:?}"))
                })?;
            if x >= w || y >= h {
                return Err(Error::malformed(
                    "minutiae text",
                    format!("point ({x},{y}) outside {w}x{h}"),
                ));
            }
            if !seen.insert((x, y, kind)) {
                return Err(Error::malformed(
                    "minutiae text",
                    format!("duplicate point ({x},{y},{})", kind.as_char()),
                ));
            }
            points.push(Minutia { x, y, kind });
        }
        Ok(MinutiaeSet {
            width: w,
            height: h,
            points,
        })
    }
}

/// Nearest-neighbor resampling to the target size followed by one
/// re-thinning pass to restore one-pixel width (upscaling duplicates rows
/// and columns). Resampling a thinning fixed point to its own size is the
/// identity.
pub fn normalize_size(
    img: &SkeletonImage,
    target_w: u32,
    target_h: u32,
) -> Result<SkeletonImage> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::InvalidTarget(target_w, target_h));
    }
    let resampled = resample_nearest(img.as_binary(), target_w, target_h);
    Ok(medial_axis(&resampled))
}

fn resample_nearest(img: &BinaryImage, target_w: u32, target_h: u32) -> BinaryImage {
    let (sw, sh) = (img.width() as u64, img.height() as u64);
    let mut pixels = Vec::with_capacity(target_w as usize * target_h as usize);
    for y in 0..target_h as u64 {
        let sy = (y * sh / target_h as u64) as u32;
        for x in 0..target_w as u64 {
            let sx = (x * sw / target_w as u64) as u32;
            pixels.push(img.get(sx, sy));
        }
    }
    BinaryImage::new(target_w, target_h, pixels).expect("nonzero target")
}

/// Neighbor-count extractor: a foreground pixel with exactly one
/// foreground neighbor is a termination, with three a bifurcation, with
/// two a normal point. Anything else is not recorded. Pixels outside the
/// frame count as background.
pub fn extract_neighbor_count(img: &SkeletonImage) -> MinutiaeSet {
    let mut points = Vec::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) == 0 {
                continue;
            }
            let mut count = 0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx != 0 || dy != 0) && img.is_set(x as i64 + dx, y as i64 + dy) {
                        count += 1;
                    }
                }
            }
            let kind = match count {
                1 => MinutiaKind::Termination,
                2 => MinutiaKind::Normal,
                3 => MinutiaKind::Bifurcation,
                _ => continue,
            };
            points.push(Minutia { x, y, kind });
        }
    }
    MinutiaeSet {
        width: img.width(),
        height: img.height(),
        points,
    }
}

/// The cyclic neighbor ring used by the crossing number: west first, then
/// clockwise through north round to south-west.
const CN_RING: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Crossing number of a ring of neighbor states: half the sum of absolute
/// differences between cyclically adjacent neighbors.
pub fn crossing_number(ring: &[bool; 8]) -> u32 {
    let mut sum = 0;
    for i in 0..8 {
        sum += (ring[i] != ring[(i + 1) % 8]) as u32;
    }
    sum / 2
}

/// Crossing-number extractor: CN 1 marks a termination, CN >= 3 a
/// bifurcation; nothing else is recorded.
pub fn extract_crossing_number(img: &SkeletonImage) -> MinutiaeSet {
    let mut points = Vec::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) == 0 {
                continue;
            }
            let mut ring = [false; 8];
            for (i, (dx, dy)) in CN_RING.iter().enumerate() {
                ring[i] = img.is_set(x as i64 + dx, y as i64 + dy);
            }
            let kind = match crossing_number(&ring) {
                1 => MinutiaKind::Termination,
                cn if cn >= 3 => MinutiaKind::Bifurcation,
                _ => continue,
            };
            points.push(Minutia { x, y, kind });
        }
    }
    MinutiaeSet {
        width: img.width(),
        height: img.height(),
        points,
    }
}

/// Spurious-minutiae removal thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Same-kind points at most this far apart (Euclidean) are all
    /// removed.
    pub min_distance: f64,
    /// Terminations and bifurcations closer than this to the frame edge
    /// are removed.
    pub border_margin: u32,
}

impl Default for FilterParams {
    fn default() -> Self {
        // Scaled to the smallest feature block (8x8).
        Self {
            min_distance: 5.0,
            border_margin: 8,
        }
    }
}

/// Removes spurious points: terminations and bifurcations hugging the
/// frame border, and every member of a same-kind pair within
/// `min_distance` of each other. Normal points pass through unfiltered.
/// The removal set is decided against the input, so surviving points are
/// pairwise far apart and the filter is idempotent.
pub fn filter_spurious(set: &MinutiaeSet, params: &FilterParams) -> MinutiaeSet {
    let margin = i64::from(params.border_margin);
    let d2_max = params.min_distance * params.min_distance;
    let n = set.points.len();
    let mut keep = vec![true; n];

    for (i, m) in set.points.iter().enumerate() {
        if m.kind == MinutiaKind::Normal {
            continue;
        }
        let (x, y) = (i64::from(m.x), i64::from(m.y));
        if x < margin
            || y < margin
            || x >= i64::from(set.width) - margin
            || y >= i64::from(set.height) - margin
        {
            keep[i] = false;
        }
    }

    for i in 0..n {
        let a = &set.points[i];
        if a.kind == MinutiaKind::Normal {
            continue;
        }
        for j in (i + 1)..n {
            let b = &set.points[j];
            if b.kind != a.kind {
                continue;
            }
            let dx = f64::from(a.x) - f64::from(b.x);
            let dy = f64::from(a.y) - f64::from(b.y);
            if dx * dx + dy * dy <= d2_max {
                keep[i] = false;
                keep[j] = false;
            }
        }
    }

    MinutiaeSet {
        width: set.width,
        height: set.height,
        points: set
            .points
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(m, _)| *m)
            .collect(),
    }
}
