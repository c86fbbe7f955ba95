use serde::{Deserialize, Serialize};

/// Row-major 8-bit grayscale image; 0 is black, 255 is white.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Raster {
    /// Returns `None` unless `pixels.len() == width * height` and both sides are positive.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Option<Raster> {
        if width == 0 || height == 0 || pixels.len() as u64 != u64::from(width) * u64::from(height) {
            return None;
        }
        Some(Raster { width, height, pixels })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Raster {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        Raster { width, height, pixels }
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

    pub fn get(&self, col: u32, row: u32) -> u8 {
        self.pixels[(row * self.width + col) as usize]
    }
}
