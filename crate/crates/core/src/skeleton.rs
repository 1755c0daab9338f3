//! Thinning of binary regions to one-pixel-wide curve networks.
//!
//! The curves play the role of fingerprint ridges: isothermal-like lines
//! extracted from perfusion regions. The transform deletes boundary pixels
//! in two directional subiterations per round. Candidates are gathered
//! from a frozen snapshot and then deleted one at a time in scan order,
//! re-checking the deletion conditions against the current image, so every
//! single deletion is topology-safe: the eight-connected foreground
//! component count never changes.

use crate::imaging::BinaryImage;

/// A thinned binary image: no 2x2 block is entirely foreground, and the
/// foreground is a subset of the image it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonImage(BinaryImage);

impl SkeletonImage {
    pub fn width(&self) -> u32 {
        self.0.width()
    }

    pub fn height(&self) -> u32 {
        self.0.height()
    }

    pub fn pixels(&self) -> &[u8] {
        self.0.pixels()
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.0.get(x, y)
    }

    pub fn is_set(&self, x: i64, y: i64) -> bool {
        self.0.is_set(x, y)
    }

    pub fn count_foreground(&self) -> usize {
        self.0.count_foreground()
    }

    pub fn as_binary(&self) -> &BinaryImage {
        &self.0
    }

    pub fn into_binary(self) -> BinaryImage {
        self.0
    }

    /// True when no 2x2 block is entirely foreground.
    pub fn is_thin(&self) -> bool {
        is_thin(&self.0)
    }
}

/// True when no 2x2 block of `img` is entirely foreground.
pub fn is_thin(img: &BinaryImage) -> bool {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let px = img.pixels();
    for y in 0..h.saturating_sub(1) {
        for x in 0..w.saturating_sub(1) {
            if px[y * w + x] != 0
                && px[y * w + x + 1] != 0
                && px[(y + 1) * w + x] != 0
                && px[(y + 1) * w + x + 1] != 0
            {
                return false;
            }
        }
    }
    true
}

/// The eight neighbors in ring order N, NE, E, SE, S, SW, W, NW.
/// Pixels outside the frame read as background.
#[inline]
fn ring(px: &[u8], w: i64, h: i64, x: i64, y: i64) -> [bool; 8] {
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && x < w && y < h && px[(y * w + x) as usize] != 0
    };
    [
        at(x, y - 1),
        at(x + 1, y - 1),
        at(x + 1, y),
        at(x + 1, y + 1),
        at(x, y + 1),
        at(x - 1, y + 1),
        at(x - 1, y),
        at(x - 1, y - 1),
    ]
}

/// Number of foreground neighbors.
#[inline]
fn neighbor_count(r: &[bool; 8]) -> u32 {
    r.iter().map(|&b| b as u32).sum()
}

/// Number of background-to-foreground transitions around the ring.
#[inline]
fn transitions(r: &[bool; 8]) -> u32 {
    let mut t = 0;
    for i in 0..8 {
        if !r[i] && r[(i + 1) % 8] {
            t += 1;
        }
    }
    t
}

#[derive(Clone, Copy)]
enum Subpass {
    One,
    Two,
}

/// Deletion test for one subiteration. A single foreground run in the ring
/// (one transition) with 2..=6 neighbors is safe to remove; the side
/// conditions alternate the peeling direction between subiterations.
#[inline]
fn deletable(px: &[u8], w: i64, h: i64, x: i64, y: i64, pass: Subpass) -> bool {
    let r = ring(px, w, h, x, y);
    let b = neighbor_count(&r);
    if !(2..=6).contains(&b) || transitions(&r) != 1 {
        return false;
    }
    let (n, e, s, west) = (r[0], r[2], r[4], r[6]);
    match pass {
        Subpass::One => !(n && e && s) && !(e && s && west),
        Subpass::Two => !(n && e && west) && !(n && s && west),
    }
}

/// True when `(x, y)` belongs to some fully-foreground 2x2 block.
#[inline]
fn in_full_block(px: &[u8], w: i64, h: i64, x: i64, y: i64) -> bool {
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && x < w && y < h && px[(y * w + x) as usize] != 0
    };
    for (bx, by) in [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)] {
        if at(bx, by) && at(bx + 1, by) && at(bx, by + 1) && at(bx + 1, by + 1) {
            return true;
        }
    }
    false
}

/// Number of eight-connected components the foreground ring cells form
/// among themselves. Consecutive ring cells touch, and so do the four
/// edge-cell pairs across a diagonal (N-E, E-S, S-W, W-N). Deleting the
/// center is split-free exactly when this is 1.
#[inline]
fn ring_component_count(r: &[bool; 8]) -> u32 {
    let mut parent: [u8; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
    fn find(parent: &mut [u8; 8], mut i: u8) -> u8 {
        while parent[i as usize] != i {
            i = parent[i as usize];
        }
        i
    }
    let mut join = |parent: &mut [u8; 8], a: u8, b: u8| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra as usize] = rb;
        }
    };
    for i in 0..8u8 {
        let j = (i + 1) % 8;
        if r[i as usize] && r[j as usize] {
            join(&mut parent, i, j);
        }
    }
    // Edge neighbors two apart in the ring touch diagonally.
    for i in [0u8, 2, 4, 6] {
        let j = (i + 2) % 8;
        if r[i as usize] && r[j as usize] {
            join(&mut parent, i, j);
        }
    }
    (0..8u8)
        .filter(|&i| r[i as usize] && find(&mut parent, i) == i)
        .count() as u32
}

/// Last-resort test for 2x2 blocks the directional passes cannot break:
/// any pixel of such a block whose removal provably keeps its neighbors
/// connected may go.
#[inline]
fn cleanup_deletable(px: &[u8], w: i64, h: i64, x: i64, y: i64) -> bool {
    if !in_full_block(px, w, h, x, y) {
        return false;
    }
    let r = ring(px, w, h, x, y);
    neighbor_count(&r) >= 2 && ring_component_count(&r) == 1
}

/// Runs one subpass: gathers candidates from the current image, then
/// deletes them in scan order, re-checking each against the image as it
/// stands. Returns whether anything was deleted.
fn run_subpass<F>(px: &mut [u8], w: i64, h: i64, candidates: &mut Vec<usize>, test: F) -> bool
where
    F: Fn(&[u8], i64, i64, i64, i64) -> bool,
{
    candidates.clear();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if px[idx] != 0 && test(px, w, h, x, y) {
                candidates.push(idx);
            }
        }
    }
    let mut changed = false;
    for &idx in candidates.iter() {
        let (x, y) = (idx as i64 % w, idx as i64 / w);
        if px[idx] != 0 && test(px, w, h, x, y) {
            px[idx] = 0;
            changed = true;
        }
    }
    changed
}

/// Thins a binary image to its skeletal curve network.
///
/// The output is a subset of the input foreground, contains no fully
/// foreground 2x2 block (apart from pathological junction geometries no
/// deletion could split safely), preserves the eight-connected component
/// count exactly, and is a fixed point: thinning again returns it
/// unchanged.
pub fn medial_axis(img: &BinaryImage) -> SkeletonImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut px = img.pixels().to_vec();
    let mut candidates = Vec::new();
    loop {
        let mut changed = run_subpass(&mut px, w, h, &mut candidates, |p, w, h, x, y| {
            deletable(p, w, h, x, y, Subpass::One)
        });
        changed |= run_subpass(&mut px, w, h, &mut candidates, |p, w, h, x, y| {
            deletable(p, w, h, x, y, Subpass::Two)
        });
        if !changed && !run_subpass(&mut px, w, h, &mut candidates, cleanup_deletable) {
            break;
        }
    }
    SkeletonImage(BinaryImage::new(img.width(), img.height(), px).expect("same dimensions"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::{label_components, Connectivity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin(width: u32, rows: &[&str]) -> BinaryImage {
        let mut pixels = Vec::new();
        for row in rows {
            assert_eq!(row.len() as u32, width);
            pixels.extend(row.bytes().map(|b| (b == b'1') as u8));
        }
        BinaryImage::new(width, rows.len() as u32, pixels).unwrap()
    }

    /// Random blobs: a few filled ellipses plus pixel speckle.
    fn random_blob_image(seed: u64, w: u32, h: u32) -> BinaryImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut px = vec![0u8; (w * h) as usize];
        for _ in 0..rng.random_range(1..=4usize) {
            let cx = rng.random_range(0..w as i64);
            let cy = rng.random_range(0..h as i64);
            let rx = rng.random_range(1..=(w as i64 / 4));
            let ry = rng.random_range(1..=(h as i64 / 4));
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let dx = (x - cx) as f64 / rx as f64;
                    let dy = (y - cy) as f64 / ry as f64;
                    if dx * dx + dy * dy <= 1.0 {
                        px[(y * w as i64 + x) as usize] = 1;
                    }
                }
            }
        }
        for _ in 0..rng.random_range(0..20usize) {
            let i = rng.random_range(0..px.len());
            px[i] = rng.random_range(0..=1);
        }
        BinaryImage::new(w, h, px).unwrap()
    }

    fn components(img: &BinaryImage) -> usize {
        label_components(img, Connectivity::Eight).count()
    }

    #[test]
    fn thin_line_is_unchanged() {
        let img = bin(7, &["0000000", "0111110", "0000000"]);
        let out = medial_axis(&img);
        assert_eq!(out.as_binary(), &img);
    }

    #[test]
    fn empty_image_stays_empty() {
        let img = BinaryImage::zeros(5, 5).unwrap();
        let out = medial_axis(&img);
        assert_eq!(out.count_foreground(), 0);
    }

    #[test]
    fn bar_thins_to_centerline() {
        // 3-wide bar of length 20 inside a 22x5 frame.
        let mut px = vec![0u8; 22 * 5];
        for y in 1..=3usize {
            for x in 1..=20usize {
                px[y * 22 + x] = 1;
            }
        }
        let img = BinaryImage::new(22, 5, px).unwrap();
        let out = medial_axis(&img);
        assert!(out.is_thin());
        assert_eq!(components(out.as_binary()), 1);
        let middle_row_count = (0..22).filter(|&x| out.get(x, 2) != 0).count();
        assert!(
            middle_row_count >= 18,
            "centerline has only {middle_row_count} pixels"
        );
        // Everything lies inside the bar.
        for y in 0..5u32 {
            for x in 0..22u32 {
                if out.get(x, y) != 0 {
                    assert_eq!(img.get(x, y), 1);
                }
            }
        }
    }

    #[test]
    fn isolated_square_becomes_degenerate_but_survives() {
        let img = bin(4, &["0000", "0110", "0110", "0000"]);
        let out = medial_axis(&img);
        assert!(out.is_thin());
        assert_eq!(components(out.as_binary()), 1);
        assert!(out.count_foreground() >= 1);
    }

    #[test]
    fn blob_properties_hold_on_random_images() {
        for seed in 0..60u64 {
            let img = random_blob_image(seed, 40, 32);
            let out = medial_axis(&img);

            // Subset of the input foreground.
            for (o, i) in out.pixels().iter().zip(img.pixels()) {
                assert!(*o <= *i, "seed {seed}: skeleton outside input");
            }
            // Thin.
            assert!(out.is_thin(), "seed {seed}: 2x2 block survived");
            // Component count preserved.
            assert_eq!(
                components(out.as_binary()),
                components(&img),
                "seed {seed}: component count changed"
            );
            // Idempotent.
            let again = medial_axis(out.as_binary());
            assert_eq!(again.pixels(), out.pixels(), "seed {seed}: not a fixed point");
        }
    }
}
