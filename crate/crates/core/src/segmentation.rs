//! Face isolation: connected component labeling, largest-component
//! selection, cropping and mask application.

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, GrayImage};

/// Pixel adjacency used when grouping foreground into components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Edge neighbors only.
    Four,
    /// Edge and corner neighbors. Default: thin diagonal structures stay
    /// one blob, which is how a face region behaves.
    #[default]
    Eight,
}

/// Result of component labeling: label 0 is background, foreground labels
/// are contiguous from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    width: u32,
    height: u32,
    labels: Vec<u32>,
    /// Pixel count per label; entry `k` holds the size of label `k + 1`.
    sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of components.
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Pixel count of a label in `1..=count()`.
    pub fn size_of(&self, label: u32) -> usize {
        self.sizes[label as usize - 1]
    }
}

/// Inclusive rectangle of pixel indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub left: u32,
    pub top: u32,
    pub right: u32,
    pub bottom: u32,
}

impl CropRect {
    pub fn width(&self) -> u32 {
        self.right - self.left + 1
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top + 1
    }
}

/// Union-find over provisional labels, path-halving + union by size.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        Self {
            parent: Vec::new(),
            size: Vec::new(),
        }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        id
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grand = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grand;
            i = grand;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Two-pass connected component labeling. The first pass assigns
/// provisional labels and records equivalences through union-find; the
/// second pass compacts roots to 1..=K in scan order of first appearance,
/// so labels are deterministic.
pub fn label_components(img: &BinaryImage, connectivity: Connectivity) -> ComponentLabeling {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut provisional = vec![0u32; w * h]; // provisional label + 1, 0 = background
    let mut uf = UnionFind::new();

    // Previously-visited neighbors in scan order.
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if img.get(x as u32, y as u32) == 0 {
                continue;
            }
            let mut current: Option<u32> = None;
            for &(dx, dy) in offsets {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 {
                    continue;
                }
                let neighbor = provisional[ny as usize * w + nx as usize];
                if neighbor == 0 {
                    continue;
                }
                match current {
                    None => current = Some(neighbor - 1),
                    Some(c) => uf.union(c, neighbor - 1),
                }
            }
            let label = current.unwrap_or_else(|| uf.make());
            provisional[y * w + x] = label + 1;
        }
    }

    // Compact roots to contiguous labels ordered by first appearance.
    let mut compact = vec![0u32; uf.parent.len()];
    let mut sizes = Vec::new();
    let mut labels = vec![0u32; w * h];
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = uf.find(p - 1) as usize;
        if compact[root] == 0 {
            sizes.push(0);
            compact[root] = sizes.len() as u32;
        }
        let label = compact[root];
        labels[i] = label;
        sizes[label as usize - 1] += 1;
    }

    ComponentLabeling {
        width: img.width(),
        height: img.height(),
        labels,
        sizes,
    }
}

/// Keeps only the largest component; equal sizes break toward the lowest
/// label (first encountered in scan order).
pub fn largest_component(labeling: &ComponentLabeling) -> Result<BinaryImage> {
    if labeling.sizes.is_empty() {
        return Err(Error::NoComponents);
    }
    let mut best = 1u32;
    for label in 2..=labeling.sizes.len() as u32 {
        if labeling.size_of(label) > labeling.size_of(best) {
            best = label;
        }
    }
    let pixels = labeling.labels.iter().map(|&l| (l == best) as u8).collect();
    BinaryImage::new(labeling.width, labeling.height, pixels)
}

/// Tightest rectangle containing all foreground pixels.
pub fn crop_to_foreground(img: &BinaryImage) -> Result<CropRect> {
    let (mut left, mut top) = (u32::MAX, u32::MAX);
    let (mut right, mut bottom) = (0u32, 0u32);
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) != 0 {
                left = left.min(x);
                right = right.max(x);
                top = top.min(y);
                bottom = bottom.max(y);
            }
        }
    }
    if left == u32::MAX {
        return Err(Error::NoComponents);
    }
    Ok(CropRect {
        left,
        top,
        right,
        bottom,
    })
}

/// Masks the grayscale image and crops to `rect`: output pixels copy the
/// gray value where the mask is set and are 0 elsewhere.
pub fn apply_mask(gray: &GrayImage, mask: &BinaryImage, rect: CropRect) -> Result<GrayImage> {
    if gray.width() != mask.width() || gray.height() != mask.height() {
        return Err(Error::ShapeMismatch(format!(
            "gray {}x{} vs mask {}x{}",
            gray.width(),
            gray.height(),
            mask.width(),
            mask.height()
        )));
    }
    if rect.left > rect.right
        || rect.top > rect.bottom
        || rect.right >= gray.width()
        || rect.bottom >= gray.height()
    {
        return Err(Error::ShapeMismatch(format!(
            "crop rect ({},{})..({},{}) outside {}x{}",
            rect.left,
            rect.top,
            rect.right,
            rect.bottom,
            gray.width(),
            gray.height()
        )));
    }
    let mut pixels = Vec::with_capacity(rect.width() as usize * rect.height() as usize);
    for y in rect.top..=rect.bottom {
        for x in rect.left..=rect.right {
            pixels.push(if mask.get(x, y) != 0 { gray.get(x, y) } else { 0 });
        }
    }
    GrayImage::new(rect.width(), rect.height(), pixels)
}
