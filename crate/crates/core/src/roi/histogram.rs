use super::Frame;

/// Per-channel histogram equalization.
///
/// Each level `v` maps to `round(255 * cdf(v) / total)`, so the brightest
/// occupied level always lands on 255. A channel holding a single level is
/// left unchanged.
pub fn equalize_histogram(frame: &Frame) -> Frame {
    let mut out = frame.clone();
    let total = (frame.width() * frame.height()) as f64;
    for plane in out.planes_mut() {
        let mut hist = [0usize; 256];
        for &v in plane.iter() {
            hist[v as usize] += 1;
        }
        if hist.iter().filter(|&&c| c > 0).count() <= 1 {
            continue;
        }
        let mut lut = [0u8; 256];
        let mut cum = 0usize;
        for (level, &count) in hist.iter().enumerate() {
            cum += count;
            lut[level] = libm::round(255.0 * cum as f64 / total) as u8;
        }
        for v in plane.iter_mut() {
            *v = lut[*v as usize];
        }
    }
    out
}
