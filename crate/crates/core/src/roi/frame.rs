use alloc::vec::Vec;

use crate::{Error, Result};

/// An 8-bit RGB image stored as three row-major planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    r: Vec<u8>,
    g: Vec<u8>,
    b: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, r: Vec<u8>, g: Vec<u8>, b: Vec<u8>) -> Result<Self> {
        let n = width * height;
        if n == 0 {
            return Err(Error::InvalidInput("frame must have non-zero area"));
        }
        if r.len() != n || g.len() != n || b.len() != n {
            return Err(Error::InvalidInput("channel planes must hold width*height pixels"));
        }
        Ok(Self { width, height, r, g, b })
    }

    /// Frame filled with one color.
    pub fn uniform(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let n = width * height;
        Self::new(width, height, alloc::vec![rgb[0]; n], alloc::vec![rgb[1]; n], alloc::vec![rgb[2]; n])
    }

    /// Decodes interleaved `RGBRGB...` bytes.
    pub fn from_interleaved(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::InvalidInput("interleaved buffer must hold width*height*3 bytes"));
        }
        let mut r = Vec::with_capacity(width * height);
        let mut g = Vec::with_capacity(width * height);
        let mut b = Vec::with_capacity(width * height);
        for px in rgb.chunks_exact(3) {
            r.push(px[0]);
            g.push(px[1]);
            b.push(px[2]);
        }
        Self::new(width, height, r, g, b)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> f64 {
        (self.width * self.height) as f64
    }

    pub fn red(&self) -> &[u8] {
        &self.r
    }

    pub fn green(&self) -> &[u8] {
        &self.g
    }

    pub fn blue(&self) -> &[u8] {
        &self.b
    }

    pub fn planes(&self) -> [&[u8]; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub(crate) fn planes_mut(&mut self) -> [&mut Vec<u8>; 3] {
        [&mut self.r, &mut self.g, &mut self.b]
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = y * self.width + x;
        [self.r[i], self.g[i], self.b[i]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = y * self.width + x;
        self.r[i] = rgb[0];
        self.g[i] = rgb[1];
        self.b[i] = rgb[2];
    }
}

/// Axis-aligned face box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Result<Self> {
        let b = Self { x, y, width, height };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x, self.y, self.width, self.height].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("bounding box must be finite"));
        }
        if self.width <= 0.0 || self.height <= 0.0 {
            return Err(Error::InvalidInput("bounding box must have positive size"));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    /// Euclidean distance between the two box centers.
    pub fn displacement_to(&self, other: &BoundingBox) -> f64 {
        let (ax, ay) = self.center();
        let (bx, by) = other.center();
        libm::hypot(ax - bx, ay - by)
    }

    /// Pixel index ranges `(x0..x1, y0..y1)` covered after clamping to a
    /// `width x height` frame; `None` when the box misses the frame.
    pub fn pixel_span(&self, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
        let clamp = |v: f64, max: usize| libm::round(v).clamp(0.0, max as f64) as usize;
        let x0 = clamp(self.x, width);
        let x1 = clamp(self.x + self.width, width);
        let y0 = clamp(self.y, height);
        let y1 = clamp(self.y + self.height, height);
        (x1 > x0 && y1 > y0).then_some((x0, x1, y0, y1))
    }
}

/// 2-D point in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Facial landmark outlines used to carve non-skin areas out of the face box.
///
/// Each entry is a closed polygon; an empty list means the feature was not
/// detected.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Landmarks {
    #[cfg_attr(feature = "serde", serde(default))]
    pub left_eye: Vec<Point>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub right_eye: Vec<Point>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub mouth: Vec<Point>,
}

impl Landmarks {
    pub fn exclusion_polygons(&self) -> impl Iterator<Item = &[Point]> {
        [&self.left_eye, &self.right_eye, &self.mouth].into_iter().filter(|p| p.len() >= 3).map(|p| p.as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.exclusion_polygons().next().is_none()
    }
}

/// Even-odd point-in-polygon test.
pub(crate) fn polygon_contains(poly: &[Point], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > y) != (pj.y > y) {
            let cross = (pj.x - pi.x) * (y - pi.y) / (pj.y - pi.y) + pi.x;
            if x < cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Per-frame face annotation produced by the capture client.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameAnnotation {
    pub frame_index: u64,
    pub timestamp: f64,
    pub bounding_box: BoundingBox,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub landmarks: Option<Landmarks>,
}

impl FrameAnnotation {
    pub fn new(frame_index: u64, timestamp: f64, bounding_box: BoundingBox) -> Self {
        Self { frame_index, timestamp, bounding_box, landmarks: None }
    }
}

/// A decoded frame paired with its annotation, if the client produced one.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedFrame {
    pub frame: Frame,
    pub annotation: Option<FrameAnnotation>,
}
