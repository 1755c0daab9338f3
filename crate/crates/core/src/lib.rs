pub mod error;
pub mod imaging;
pub mod segmentation;
pub mod skeleton;

pub use error::{Error, Result};
pub use imaging::{BinaryImage, GradientField, GrayImage, RgbImage};
pub use segmentation::{ComponentLabeling, Connectivity, CropRect};
pub use skeleton::SkeletonImage;
