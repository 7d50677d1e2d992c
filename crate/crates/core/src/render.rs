//! Image output: binary PPM/PGM writers and range-image visualization.
//!
//! Grayscale channels are min-max normalized over the valid pixels; invalid
//! pixels are rendered as gray value 128.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::range_image::RangeImage;
use crate::scene::{ClassGrid, RgbImage, NO_CLASS};

/// Gray value used for invalid (outlier) pixels.
pub const INVALID_GRAY: u8 = 128;

const PALETTE: [[u8; 3]; 8] = [
    [0, 0, 0],       // background
    [230, 25, 75],   // red
    [60, 180, 75],   // green
    [0, 130, 200],   // blue
    [255, 225, 25],  // yellow
    [145, 30, 180],  // purple
    [70, 240, 240],  // cyan
    [240, 50, 230],  // magenta
];

/// Fixed flat color per class id; [`NO_CLASS`] renders white.
pub fn class_color(class: u32) -> [u8; 3] {
    if class == NO_CLASS {
        return [255, 255, 255];
    }
    PALETTE[(class as usize) % PALETTE.len()]
}

/// Which channel of a range image to render.
#[derive(Clone, Copy, Debug)]
pub enum RenderChannel<'a> {
    Range,
    Intensity,
    Validity,
    ClassOverlay(&'a ClassGrid),
}

/// Write a binary PGM (P5): `P5\n<w> <h>\n255\n` followed by one byte per pixel.
pub fn write_pgm(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    if bytes.len() != width * height {
        return Err(Error::ShapeMismatch {
            left: format!("{width}x{height}"),
            right: format!("{} bytes", bytes.len()),
        });
    }
    write_atomic(path, format!("P5\n{width} {height}\n255\n").as_bytes(), bytes)
}

/// Write a binary PPM (P6): `P6\n<w> <h>\n255\n` followed by three bytes per pixel.
pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    if rgb.len() != width * height * 3 {
        return Err(Error::ShapeMismatch {
            left: format!("{width}x{height}x3"),
            right: format!("{} bytes", rgb.len()),
        });
    }
    write_atomic(path, format!("P6\n{width} {height}\n255\n").as_bytes(), rgb)
}

// Write-temp-then-rename so readers never observe a half-written file.
fn write_atomic(path: &Path, header: &[u8], payload: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(header)?;
        f.write_all(payload)?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Render one channel of a range image to `path`.
///
/// `Range`, `Intensity` and `Validity` produce a PGM; `ClassOverlay` produces
/// a PPM using the fixed class palette (white for [`NO_CLASS`], gray for
/// invalid pixels).
pub fn render_range_image(img: &RangeImage, channel: RenderChannel, path: &Path) -> Result<()> {
    let (w, h) = img.size();
    match channel {
        RenderChannel::ClassOverlay(classes) => {
            if classes.size() != (w, h) {
                return Err(Error::ShapeMismatch {
                    left: format!("range image {w}x{h}"),
                    right: format!("class grid {}x{}", classes.width(), classes.height()),
                });
            }
            let mut rgb = Vec::with_capacity(w * h * 3);
            for row in 0..h {
                for col in 0..w {
                    if img.is_valid(row, col) {
                        rgb.extend_from_slice(&class_color(classes.get(col, row)));
                    } else {
                        rgb.extend_from_slice(&[INVALID_GRAY; 3]);
                    }
                }
            }
            write_ppm(path, w, h, &rgb)
        }
        _ => {
            let value = |row: usize, col: usize| -> f64 {
                match channel {
                    RenderChannel::Range => img.pixel(row, col).map_or(0.0, |p| p.range),
                    RenderChannel::Intensity => img.pixel(row, col).map_or(0.0, |p| p.intensity),
                    RenderChannel::Validity => 1.0,
                    RenderChannel::ClassOverlay(_) => unreachable!(),
                }
            };
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (row, col, _) in img.valid_pixels() {
                let v = value(row, col);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let span = hi - lo;
            let mut bytes = Vec::with_capacity(w * h);
            for row in 0..h {
                for col in 0..w {
                    if !img.is_valid(row, col) {
                        bytes.push(INVALID_GRAY);
                    } else if span <= 0.0 {
                        bytes.push(255);
                    } else {
                        let t = (value(row, col) - lo) / span;
                        bytes.push((t * 255.0).round() as u8);
                    }
                }
            }
            write_pgm(path, w, h, &bytes)
        }
    }
}

/// Read a binary PPM (P6) with maxval 255 into an [`RgbImage`] in [0, 1].
pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path)?;
    let (width, height, payload) = parse_netpbm(path, &bytes, b"P6")?;
    if payload.len() != width * height * 3 {
        return Err(Error::Format {
            path: path.display().to_string(),
            detail: format!("payload has {} bytes, expected {}", payload.len(), width * height * 3),
        });
    }
    let data = payload.iter().map(|&b| f32::from(b) / 255.0).collect();
    RgbImage::from_data(width, height, data)
}

fn parse_netpbm<'a>(path: &Path, bytes: &'a [u8], magic: &[u8]) -> Result<(usize, usize, &'a [u8])> {
    let err = |detail: &str| Error::Format {
        path: path.display().to_string(),
        detail: detail.to_string(),
    };
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(err("bad magic"));
    }
    // Header: magic, width, height, maxval as whitespace-separated tokens.
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(err("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("malformed header"))?;
    }
    if fields[2] != 255 {
        return Err(err("only maxval 255 is supported"));
    }
    // Single whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(err("missing header terminator"));
    }
    pos += 1;
    Ok((fields[0], fields[1], &bytes[pos..]))
}
