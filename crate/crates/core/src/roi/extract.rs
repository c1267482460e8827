use super::frame::polygon_contains;
use super::{Frame, FrameAnnotation};
use crate::{Error, Result};

/// Which pixels of the face box contribute to the channel means.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RoiMode {
    FullBox,
    /// Face box minus eye and mouth polygons; same as `FullBox` without landmarks.
    #[default]
    SkinMask,
}

/// Mean color of the region of interest, 0-255 scale.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelMeans {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    /// Mean of `(R + G + B) / 3`.
    pub brightness: f64,
}

pub fn extract_channel_means(frame: &Frame, annotation: &FrameAnnotation, mode: RoiMode) -> Result<ChannelMeans> {
    annotation.bounding_box.validate()?;
    let (x0, x1, y0, y1) = annotation.bounding_box.pixel_span(frame.width(), frame.height()).ok_or(Error::NoFace)?;
    let mask = match (mode, &annotation.landmarks) {
        (RoiMode::SkinMask, Some(lm)) if !lm.is_empty() => Some(lm),
        _ => None,
    };

    let [r, g, b] = frame.planes();
    let w = frame.width();
    let (mut sr, mut sg, mut sb, mut count) = (0u64, 0u64, 0u64, 0u64);
    for y in y0..y1 {
        let row = y * w;
        for x in x0..x1 {
            if let Some(lm) = mask {
                let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
                if lm.exclusion_polygons().any(|p| polygon_contains(p, cx, cy)) {
                    continue;
                }
            }
            let i = row + x;
            sr += r[i] as u64;
            sg += g[i] as u64;
            sb += b[i] as u64;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NoFace);
    }
    let n = count as f64;
    let (mr, mg, mb) = (sr as f64 / n, sg as f64 / n, sb as f64 / n);
    Ok(ChannelMeans { r: mr, g: mg, b: mb, brightness: (mr + mg + mb) / 3.0 })
}
