//! Video decoding and pairing of decoded frames with client annotations.
//!
//! Container formats are handed to `ffmpeg`/`ffprobe` on the `PATH`. Files
//! starting with [`RAW_MAGIC`] hold uncompressed RGB frames and are read
//! directly; the simulator and the tests use them so that no external tool is
//! needed.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdout, Command, Stdio};

use vitalcam_core::roi::{AnnotatedFrame, Frame, FrameAnnotation};

use crate::{Error, Result};

/// First bytes of a raw RGB video: `VCRAW1 <width> <height>\n`, then frames of
/// `width * height * 3` interleaved bytes.
pub const RAW_MAGIC: &[u8] = b"VCRAW1";

pub type FrameStream = Box<dyn Iterator<Item = Result<Frame>> + Send>;

/// Turns a stored recording into decoded frames, in presentation order.
pub trait VideoDecoder: Send + Sync {
    fn decode(&self, path: &Path) -> Result<FrameStream>;
}

/// Reads raw RGB files itself and delegates everything else to `ffmpeg`.
#[derive(Debug, Clone, Default)]
pub struct DefaultDecoder;

impl VideoDecoder for DefaultDecoder {
    fn decode(&self, path: &Path) -> Result<FrameStream> {
        let mut magic = [0u8; 6];
        let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
        let is_raw = file.read_exact(&mut magic).is_ok() && magic == RAW_MAGIC;
        if is_raw {
            RawDecoder.decode(path)
        } else {
            FfmpegDecoder.decode(path)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RawDecoder;

struct RawFrames<R> {
    reader: R,
    width: usize,
    height: usize,
    done: bool,
}

impl<R: Read> Iterator for RawFrames<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Result<Frame>> {
        if self.done {
            return None;
        }
        let mut buf = vec![0u8; self.width * self.height * 3];
        match read_full(&mut self.reader, &mut buf) {
            Ok(0) => {
                self.done = true;
                None
            }
            Ok(n) if n == buf.len() => {
                Some(Frame::from_interleaved(self.width, self.height, &buf).map_err(Error::from))
            }
            Ok(_) => {
                self.done = true;
                Some(Err(Error::Decode("truncated final frame".into())))
            }
            Err(e) => {
                self.done = true;
                Some(Err(Error::Decode(e.to_string())))
            }
        }
    }
}

/// Like `read_exact`, but reports how much was read before end of input.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

impl VideoDecoder for RawDecoder {
    fn decode(&self, path: &Path) -> Result<FrameStream> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut header = String::new();
        reader.read_line(&mut header).map_err(|e| Error::Decode(format!("raw header: {e}")))?;
        let mut parts = header.split_ascii_whitespace();
        let bad = || Error::Decode("raw header must be `VCRAW1 <width> <height>`".into());
        if parts.next().map(str::as_bytes) != Some(RAW_MAGIC) {
            return Err(bad());
        }
        let mut dim = || parts.next().and_then(|s| s.parse::<usize>().ok()).filter(|&v| v > 0).ok_or_else(bad);
        let (width, height) = (dim()?, dim()?);
        Ok(Box::new(RawFrames { reader, width, height, done: false }))
    }
}

/// Writes frames in the raw RGB layout read by [`RawDecoder`].
pub fn write_raw_video<'a, W: Write>(mut out: W, frames: impl IntoIterator<Item = &'a Frame>) -> Result<()> {
    let io = |e: std::io::Error| Error::Decode(format!("writing raw video: {e}"));
    let mut size = None;
    let mut buf = Vec::new();
    for frame in frames {
        let dims = (frame.width(), frame.height());
        match size {
            None => {
                writeln!(out, "VCRAW1 {} {}", dims.0, dims.1).map_err(io)?;
                size = Some(dims);
            }
            Some(s) if s != dims => return Err(Error::Format("all frames must share one size".into())),
            Some(_) => {}
        }
        buf.clear();
        let [r, g, b] = frame.planes();
        for i in 0..r.len() {
            buf.extend_from_slice(&[r[i], g[i], b[i]]);
        }
        out.write_all(&buf).map_err(io)?;
    }
    if size.is_none() {
        return Err(Error::Format("no frames to write".into()));
    }
    out.flush().map_err(io)
}

/// Decodes through `ffmpeg` to raw RGB24 on a pipe.
#[derive(Debug, Clone, Default)]
pub struct FfmpegDecoder;

struct FfmpegFrames {
    inner: RawFrames<ChildStdout>,
    child: Child,
}

impl Iterator for FfmpegFrames {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Result<Frame>> {
        let item = self.inner.next();
        if item.is_none() {
            match self.child.wait() {
                Ok(status) if !status.success() => {
                    return Some(Err(Error::Decode(format!("ffmpeg exited with {status}"))));
                }
                Err(e) => return Some(Err(Error::Decode(e.to_string()))),
                Ok(_) => {}
            }
        }
        item
    }
}

impl Drop for FfmpegFrames {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl VideoDecoder for FfmpegDecoder {
    fn decode(&self, path: &Path) -> Result<FrameStream> {
        let probe = Command::new("ffprobe")
            .args(["-v", "error", "-select_streams", "v:0", "-show_entries", "stream=width,height", "-of", "csv=p=0"])
            .arg(path)
            .output()
            .map_err(|e| Error::Decode(format!("cannot run ffprobe: {e}")))?;
        if !probe.status.success() {
            return Err(Error::Format(format!(
                "not a decodable video: {}",
                String::from_utf8_lossy(&probe.stderr).trim()
            )));
        }
        let text = String::from_utf8_lossy(&probe.stdout);
        let (w, h) = text
            .trim()
            .split_once(',')
            .and_then(|(w, h)| Some((w.trim().parse::<usize>().ok()?, h.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Error::Decode(format!("unexpected ffprobe output `{}`", text.trim())))?;
        let mut child = Command::new("ffmpeg")
            .args(["-v", "error", "-i"])
            .arg(path)
            .args(["-f", "rawvideo", "-pix_fmt", "rgb24", "-"])
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Decode(format!("cannot run ffmpeg: {e}")))?;
        let stdout = child.stdout.take().expect("stdout is piped");
        Ok(Box::new(FfmpegFrames { inner: RawFrames { reader: stdout, width: w, height: h, done: false }, child }))
    }
}

/// Pairs decoded frames with annotations by `frame_index`. Frames without an
/// annotation are passed on unannotated. The first decode error ends the
/// stream and is left in `error`.
pub struct Paired<'a> {
    frames: FrameStream,
    by_index: HashMap<u64, FrameAnnotation>,
    index: u64,
    error: &'a mut Option<Error>,
}

impl<'a> Paired<'a> {
    pub fn new(frames: FrameStream, annotations: Vec<FrameAnnotation>, error: &'a mut Option<Error>) -> Self {
        let by_index = annotations.into_iter().map(|a| (a.frame_index, a)).collect();
        Self { frames, by_index, index: 0, error }
    }
}

impl Iterator for Paired<'_> {
    type Item = AnnotatedFrame;

    fn next(&mut self) -> Option<AnnotatedFrame> {
        if self.error.is_some() {
            return None;
        }
        match self.frames.next()? {
            Ok(frame) => {
                let annotation = self.by_index.remove(&self.index);
                self.index += 1;
                Some(AnnotatedFrame { frame, annotation })
            }
            Err(e) => {
                *self.error = Some(e);
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_video_round_trips() {
        let frames: Vec<Frame> = (0..3).map(|i| Frame::uniform(4, 2, [i, 2 * i, 3 * i]).unwrap()).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.raw");
        write_raw_video(File::create(&path).unwrap(), &frames).unwrap();
        let back: Vec<Frame> = DefaultDecoder.decode(&path).unwrap().map(Result::unwrap).collect();
        assert_eq!(back, frames);
    }

    #[test]
    fn truncated_raw_video_reports_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.raw");
        std::fs::write(&path, b"VCRAW1 2 2\n0123456789ab0123").unwrap();
        let items: Vec<_> = RawDecoder.decode(&path).unwrap().collect();
        assert_eq!(items.len(), 2);
        assert!(items[0].is_ok());
        assert!(matches!(items[1], Err(Error::Decode(_))));
    }

    #[test]
    fn pairing_uses_frame_index() {
        let frames: Vec<Result<Frame>> = (0..3).map(|_| Frame::uniform(2, 2, [1, 1, 1]).map_err(Error::from)).collect();
        let bbox = vitalcam_core::roi::BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let anns = vec![FrameAnnotation::new(2, 0.2, bbox), FrameAnnotation::new(0, 0.0, bbox)];
        let mut err = None;
        let paired: Vec<_> = Paired::new(Box::new(frames.into_iter()), anns, &mut err).collect();
        assert_eq!(paired.len(), 3);
        assert!(paired[0].annotation.is_some() && paired[1].annotation.is_none());
        assert_eq!(paired[2].annotation.as_ref().unwrap().timestamp, 0.2);
        assert!(err.is_none());
    }
}
