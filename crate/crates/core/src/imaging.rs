//! Raster types and pixel-level transforms.
//!
//! Images are immutable row-major buffers with explicit dimensions. All
//! operations are pure functions; neighborhood operations replicate edge
//! pixels at the frame border.

use crate::error::{Error, Result};

/// 24-bit color image, one `[r, g, b]` triple per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

/// 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

/// Two-level image; 1 is foreground (face/skin), 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

/// Per-pixel gradient magnitude and orientation.
///
/// Orientation is the two-argument arctangent of (vertical, horizontal)
/// response in `(-pi, pi]`, defined as 0 where both components vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: u32,
    height: u32,
    magnitude: Vec<f64>,
    orientation: Vec<f64>,
}

fn check_dims(width: u32, height: u32, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let expect = width as usize * height as usize;
    if len != expect {
        return Err(Error::ShapeMismatch(format!(
            "buffer holds {len} pixels, {width}x{height} needs {expect}"
        )));
    }
    Ok(())
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        Ok(Self {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Pixel lookup with edge replication: out-of-range coordinates clamp
    /// to the nearest border pixel.
    fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.pixels[cy * self.width as usize + cx]
    }
}

impl BinaryImage {
    /// Builds from a 0/1 buffer. Any nonzero value counts as foreground.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        let pixels = pixels.into_iter().map(|p| (p != 0) as u8).collect();
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        Ok(Self {
            width,
            height,
            pixels: vec![0; width as usize * height as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// True at foreground pixels; coordinates outside the frame are
    /// background.
    pub fn is_set(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.pixels[y as usize * self.width as usize + x as usize] != 0
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }
}

impl GradientField {
    pub fn new(width: u32, height: u32, magnitude: Vec<f64>, orientation: Vec<f64>) -> Result<Self> {
        check_dims(width, height, magnitude.len())?;
        check_dims(width, height, orientation.len())?;
        if let Some(m) = magnitude.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::ShapeMismatch(format!(
                "gradient magnitude must be finite and non-negative, got {m}"
            )));
        }
        Ok(Self {
            width,
            height,
            magnitude,
            orientation,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn orientation(&self) -> &[f64] {
        &self.orientation
    }
}

/// Selects how the two Sobel responses combine into a magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagnitudeRule {
    /// `sqrt(px^2 + py^2)`.
    #[default]
    Euclidean,
    /// `|px| + |py|`.
    L1,
}

/// Converts 24-bit color to 8-bit grayscale with the usual luma weights,
/// rounding half up.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let pixels = img
        .pixels
        .iter()
        .map(|&[r, g, b]| {
            let v = 0.2989 * f64::from(r) + 0.5870 * f64::from(g) + 0.1140 * f64::from(b);
            (v + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Thresholds at the global mean gray value: foreground where the pixel is
/// at or above the mean.
///
/// The comparison `g >= sum/n` is evaluated as `g * n >= sum` in integer
/// arithmetic, which is exact (no truncation of the mean).
pub fn mean_threshold(img: &GrayImage) -> BinaryImage {
    let n = img.pixels.len() as u64;
    let sum: u64 = img.pixels.iter().map(|&p| u64::from(p)).sum();
    let pixels = img
        .pixels
        .iter()
        .map(|&p| (u64::from(p) * n >= sum) as u8)
        .collect();
    BinaryImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Extracts one bit plane: output pixel `k` is bit `plane` of input pixel
/// `k`. Plane 0 is the least significant bit, plane 7 the most.
pub fn bit_plane(img: &GrayImage, plane: u8) -> Result<BinaryImage> {
    if plane > 7 {
        return Err(Error::InvalidPlane(plane));
    }
    let pixels = img.pixels.iter().map(|&p| (p >> plane) & 1).collect();
    Ok(BinaryImage {
        width: img.width,
        height: img.height,
        pixels,
    })
}

/// Grayscale erosion with a flat 3x3 structuring element: each output
/// pixel is the minimum over its 3x3 neighborhood, edges replicated.
pub fn gray_erode(img: &GrayImage) -> GrayImage {
    let mut pixels = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height as i64 {
        for x in 0..img.width as i64 {
            let mut min = u8::MAX;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    min = min.min(img.get_clamped(x + dx, y + dy));
                }
            }
            pixels.push(min);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Horizontal Sobel mask, responds to vertical discontinuities.
const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
/// Vertical Sobel mask, the horizontal mask rotated by 90 degrees.
const SOBEL_Y: [[i32; 3]; 3] = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]];

/// Sobel gradient with the Euclidean magnitude.
pub fn sobel(img: &GrayImage) -> Result<GradientField> {
    sobel_with_magnitude(img, MagnitudeRule::Euclidean)
}

/// Sobel gradient with a selectable magnitude rule. Borders replicate edge
/// pixels. Orientation is `atan2(py, px)`, 0 where both responses are 0.
pub fn sobel_with_magnitude(img: &GrayImage, rule: MagnitudeRule) -> Result<GradientField> {
    if img.width < 3 || img.height < 3 {
        return Err(Error::ImageTooSmall {
            width: img.width,
            height: img.height,
            min: 3,
        });
    }
    let n = img.pixels.len();
    let mut magnitude = Vec::with_capacity(n);
    let mut orientation = Vec::with_capacity(n);
    for y in 0..img.height as i64 {
        for x in 0..img.width as i64 {
            let mut px = 0i32;
            let mut py = 0i32;
            for (j, (rx, ry)) in SOBEL_X.iter().zip(SOBEL_Y.iter()).enumerate() {
                for i in 0..3 {
                    let v = i32::from(img.get_clamped(x + i as i64 - 1, y + j as i64 - 1));
                    px += rx[i] * v;
                    py += ry[i] * v;
                }
            }
            let (px, py) = (f64::from(px), f64::from(py));
            let mag = match rule {
                MagnitudeRule::Euclidean => px.hypot(py),
                MagnitudeRule::L1 => px.abs() + py.abs(),
            };
            magnitude.push(mag);
            orientation.push(if px == 0.0 && py == 0.0 {
                0.0
            } else {
                py.atan2(px)
            });
        }
    }
    Ok(GradientField {
        width: img.width,
        height: img.height,
        magnitude,
        orientation,
    })
}

/// Thresholds a gradient field at its mean magnitude, the same rule used
/// for grayscale binarization. On an all-zero field every pixel compares
/// `>=` the zero mean, so the output is all foreground; callers treat that
/// as the degenerate "no edges" case.
pub fn edge_binarize(field: &GradientField) -> BinaryImage {
    let mean = field.magnitude.iter().sum::<f64>() / field.magnitude.len() as f64;
    let pixels = field.magnitude.iter().map(|&m| (m >= mean) as u8).collect();
    BinaryImage {
        width: field.width,
        height: field.height,
        pixels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(width: u32, height: u32, pixels: &[u8]) -> GrayImage {
        GrayImage::new(width, height, pixels.to_vec()).unwrap()
    }

    #[test]
    fn grayscale_reference_pixels() {
        let img = RgbImage::new(3, 1, vec![[0, 0, 0], [255, 0, 0], [255, 255, 255]]).unwrap();
        let g = to_grayscale(&img);
        // 0.2989 * 255 = 76.22 rounds to 76; 0.9999 * 255 = 254.97 rounds up.
        assert_eq!(g.pixels(), &[0, 76, 255]);
    }

    #[test]
    fn grayscale_keeps_dimensions() {
        let img = RgbImage::new(2, 3, vec![[9, 9, 9]; 6]).unwrap();
        let g = to_grayscale(&img);
        assert_eq!((g.width(), g.height()), (2, 3));
    }

    proptest! {
        #[test]
        fn grayscale_monotone_per_channel(r in 0u8..255, g in 0u8..255, b in 0u8..255, ch in 0usize..3) {
            let mut hi = [r, g, b];
            hi[ch] += 1;
            let img = RgbImage::new(2, 1, vec![[r, g, b], hi]).unwrap();
            let out = to_grayscale(&img);
            prop_assert!(out.pixels()[1] >= out.pixels()[0]);
        }
    }

    #[test]
    fn mean_threshold_uniform_is_all_foreground() {
        let b = mean_threshold(&gray(4, 2, &[100; 8]));
        assert!(b.pixels().iter().all(|&p| p == 1));
    }

    #[test]
    fn mean_threshold_two_pixels() {
        // mean 15.0: 10 below, 20 at-or-above
        let b = mean_threshold(&gray(2, 1, &[10, 20]));
        assert_eq!(b.pixels(), &[0, 1]);
    }

    #[test]
    fn mean_threshold_single_pixel_equals_own_mean() {
        let b = mean_threshold(&gray(1, 1, &[7]));
        assert_eq!(b.pixels(), &[1]);
    }

    #[test]
    fn empty_image_rejected_at_construction() {
        assert!(matches!(
            GrayImage::new(0, 5, vec![]),
            Err(Error::EmptyImage)
        ));
        assert!(matches!(
            GrayImage::new(2, 2, vec![1, 2, 3]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    proptest! {
        /// The threshold is relative: shifting every pixel by the same
        /// amount (without clamping) does not change the output.
        #[test]
        fn mean_threshold_shift_invariant(
            pixels in proptest::collection::vec(0u8..=200, 1..64),
            w in 1u32..8,
            c in 0u8..=55,
        ) {
            prop_assume!(pixels.len() % w as usize == 0);
            let h = pixels.len() as u32 / w;
            let base = gray(w, h, &pixels);
            let shifted = gray(w, h, &pixels.iter().map(|&p| p + c).collect::<Vec<_>>());
            prop_assert_eq!(mean_threshold(&base), mean_threshold(&shifted));
        }
    }

    #[test]
    fn bit_plane_reference_pixels() {
        let img = gray(3, 1, &[0, 255, 170]);
        assert_eq!(bit_plane(&img, 0).unwrap().pixels()[0], 0);
        assert_eq!(bit_plane(&img, 7).unwrap().pixels()[1], 1);
        // 170 = 0b10101010
        assert_eq!(bit_plane(&img, 4).unwrap().pixels()[2], 0);
        assert_eq!(bit_plane(&img, 1).unwrap().pixels()[2], 1);
    }

    #[test]
    fn bit_plane_rejects_out_of_range() {
        let img = gray(1, 1, &[0]);
        assert!(matches!(bit_plane(&img, 8), Err(Error::InvalidPlane(8))));
    }

    proptest! {
        /// The eight planes reconstruct the image exactly.
        #[test]
        fn bit_planes_reconstruct(pixels in proptest::collection::vec(any::<u8>(), 1..64)) {
            let img = gray(pixels.len() as u32, 1, &pixels);
            let mut recon = vec![0u16; pixels.len()];
            for plane in 0..8u8 {
                let p = bit_plane(&img, plane).unwrap();
                for (r, &bit) in recon.iter_mut().zip(p.pixels()) {
                    *r += u16::from(bit) << plane;
                }
            }
            let recon: Vec<u8> = recon.into_iter().map(|v| v as u8).collect();
            prop_assert_eq!(recon, pixels);
        }
    }

    #[test]
    fn erode_constant_unchanged() {
        let img = gray(5, 4, &[42; 20]);
        assert_eq!(gray_erode(&img), img);
    }

    #[test]
    fn erode_takes_neighborhood_minimum() {
        let img = gray(3, 3, &[5, 5, 5, 5, 9, 5, 5, 5, 5]);
        assert_eq!(gray_erode(&img).get(1, 1), 5);
    }

    #[test]
    fn erode_spreads_dark_pixel() {
        let mut pixels = vec![200u8; 25];
        pixels[12] = 0; // center of 5x5
        let out = gray_erode(&gray(5, 5, &pixels));
        for y in 0..5 {
            for x in 0..5 {
                let near = (x as i32 - 2).abs() <= 1 && (y as i32 - 2).abs() <= 1;
                assert_eq!(out.get(x, y), if near { 0 } else { 200 });
            }
        }
    }

    proptest! {
        #[test]
        fn erode_is_pointwise_leq(pixels in proptest::collection::vec(any::<u8>(), 36)) {
            let img = gray(6, 6, &pixels);
            let out = gray_erode(&img);
            for (o, i) in out.pixels().iter().zip(img.pixels()) {
                prop_assert!(o <= i);
            }
        }

        /// Erosion commutes with translation away from the border.
        #[test]
        fn erode_translation_equivariant(pixels in proptest::collection::vec(any::<u8>(), 64)) {
            let img = gray(8, 8, &pixels);
            let mut shifted = vec![0u8; 64];
            for y in 0..7usize {
                for x in 0..7usize {
                    shifted[(y + 1) * 8 + x + 1] = pixels[y * 8 + x];
                }
            }
            let out = gray_erode(&img);
            let out_shifted = gray_erode(&gray(8, 8, &shifted));
            // Compare the interior where neither window touches a border.
            for y in 2..6u32 {
                for x in 2..6u32 {
                    prop_assert_eq!(out_shifted.get(x + 1, y + 1), out.get(x, y));
                }
            }
        }
    }

    #[test]
    fn sobel_constant_is_zero() {
        let f = sobel(&gray(4, 4, &[77; 16])).unwrap();
        assert!(f.magnitude().iter().all(|&m| m == 0.0));
        assert!(f.orientation().iter().all(|&o| o == 0.0));
    }

    #[test]
    fn sobel_vertical_step_edge() {
        // columns 0,0,255,255 on every row
        let mut pixels = Vec::new();
        for _ in 0..4 {
            pixels.extend_from_slice(&[0, 0, 255, 255]);
        }
        let f = sobel(&gray(4, 4, &pixels)).unwrap();
        let at = |x: u32, y: u32| f.magnitude()[(y * 4 + x) as usize];
        assert_eq!(at(1, 1), 1020.0);
        assert_eq!(at(2, 1), 1020.0);
        assert_eq!(at(0, 1), 0.0);
        assert_eq!(at(3, 1), 0.0);
        assert_eq!(f.orientation()[5], 0.0);
    }

    #[test]
    fn sobel_horizontal_step_edge() {
        let mut pixels = vec![0u8; 8];
        pixels.extend_from_slice(&[255; 8]);
        let f = sobel(&gray(4, 4, &pixels)).unwrap();
        let idx = (1 * 4 + 1) as usize;
        assert_eq!(f.magnitude()[idx], 1020.0);
        assert!((f.orientation()[idx].abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn sobel_rejects_small_images() {
        assert!(matches!(
            sobel(&gray(2, 5, &[0; 10])),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    proptest! {
        /// Euclidean magnitude never exceeds the L1 magnitude.
        #[test]
        fn sobel_l2_leq_l1(pixels in proptest::collection::vec(any::<u8>(), 25)) {
            let img = gray(5, 5, &pixels);
            let l2 = sobel_with_magnitude(&img, MagnitudeRule::Euclidean).unwrap();
            let l1 = sobel_with_magnitude(&img, MagnitudeRule::L1).unwrap();
            for (a, b) in l2.magnitude().iter().zip(l1.magnitude()) {
                prop_assert!(a <= &(b + 1e-9));
            }
        }
    }

    #[test]
    fn edge_binarize_zero_field_is_all_foreground() {
        let f = GradientField::new(2, 2, vec![0.0; 4], vec![0.0; 4]).unwrap();
        assert_eq!(edge_binarize(&f).pixels(), &[1, 1, 1, 1]);
    }

    #[test]
    fn edge_binarize_splits_at_mean() {
        let f = GradientField::new(2, 1, vec![0.0, 1020.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(edge_binarize(&f).pixels(), &[0, 1]);
    }

    #[test]
    fn edge_binarize_uniform_positive_is_all_foreground() {
        let f = GradientField::new(3, 1, vec![5.5; 3], vec![0.0; 3]).unwrap();
        assert_eq!(edge_binarize(&f).pixels(), &[1, 1, 1]);
    }
}
