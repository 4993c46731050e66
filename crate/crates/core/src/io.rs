//! PNG and CSV exchange formats.
//!
//! Images decode to `[0, 1]` floats; grayscale sources stay single-channel,
//! everything else becomes RGB (alpha is dropped). Encoding rounds to the
//! nearest code, so an 8-bit image that passes through unchanged re-encodes
//! to the same pixel values.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};
use crate::field::{ImageF, Keypoint, MaskF, PointSet};
use crate::grid::Grid2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

#[derive(Debug, Clone)]
pub struct LoadedImage {
    pub image: ImageF,
    pub depth: BitDepth,
}

pub fn decode_png(bytes: &[u8]) -> Result<LoadedImage> {
    let dynimg = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
    Ok(from_dynamic(dynimg))
}

pub fn read_png(path: &Path) -> Result<LoadedImage> {
    decode_png(&std::fs::read(path)?)
}

fn from_dynamic(img: DynamicImage) -> LoadedImage {
    let sixteen = img.color().bytes_per_pixel() / img.color().channel_count() >= 2;
    let gray = !img.color().has_color();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let depth = if sixteen { BitDepth::Sixteen } else { BitDepth::Eight };
    let image = match (gray, sixteen) {
        (true, false) => {
            let buf = img.to_luma8();
            planar(w, h, 1, |i, _| buf.as_raw()[i] as f64 / 255.0)
        }
        (true, true) => {
            let buf = img.to_luma16();
            planar(w, h, 1, |i, _| buf.as_raw()[i] as f64 / 65535.0)
        }
        (false, false) => {
            let buf = img.to_rgb8();
            planar(w, h, 3, |i, c| buf.as_raw()[i * 3 + c] as f64 / 255.0)
        }
        (false, true) => {
            let buf = img.to_rgb16();
            planar(w, h, 3, |i, c| buf.as_raw()[i * 3 + c] as f64 / 65535.0)
        }
    };
    LoadedImage { image, depth }
}

fn planar(w: usize, h: usize, channels: usize, f: impl Fn(usize, usize) -> f64) -> ImageF {
    ImageF::from_fn(w, h, channels, |x, y, c| f(y * w + x, c)).expect("decoded dimensions are valid")
}

fn quantize(v: f64, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max).round()
}

fn interleaved(img: &ImageF) -> impl Iterator<Item = f64> + '_ {
    let (w, h, c) = img.dims();
    (0..w * h).flat_map(move |i| (0..c).map(move |ch| img.get(i % w, i / w, ch)))
}

pub fn encode_png(img: &ImageF, depth: BitDepth) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynimg = match (img.channels(), depth) {
        (1, BitDepth::Eight) => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(
                w,
                h,
                interleaved(img).map(|v| quantize(v, 255.0) as u8).collect(),
            )
            .expect("buffer size"),
        ),
        (1, BitDepth::Sixteen) => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(
                w,
                h,
                interleaved(img).map(|v| quantize(v, 65535.0) as u16).collect(),
            )
            .expect("buffer size"),
        ),
        (_, BitDepth::Eight) => DynamicImage::ImageRgb8(
            ImageBuffer::<Rgb<u8>, _>::from_raw(
                w,
                h,
                interleaved(img).map(|v| quantize(v, 255.0) as u8).collect(),
            )
            .expect("buffer size"),
        ),
        (_, BitDepth::Sixteen) => DynamicImage::ImageRgb16(
            ImageBuffer::<Rgb<u16>, _>::from_raw(
                w,
                h,
                interleaved(img).map(|v| quantize(v, 65535.0) as u16).collect(),
            )
            .expect("buffer size"),
        ),
    };
    let mut out = Cursor::new(Vec::new());
    dynimg.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn write_png(path: &Path, img: &ImageF, depth: BitDepth) -> Result<()> {
    std::fs::write(path, encode_png(img, depth)?)?;
    Ok(())
}

/// Masks are read as luminance.
pub fn read_mask(path: &Path) -> Result<(MaskF, BitDepth)> {
    let loaded = read_png(path)?;
    Ok((to_mask(&loaded.image), loaded.depth))
}

pub fn decode_mask(bytes: &[u8]) -> Result<(MaskF, BitDepth)> {
    let loaded = decode_png(bytes)?;
    Ok((to_mask(&loaded.image), loaded.depth))
}

fn to_mask(img: &ImageF) -> MaskF {
    if img.channels() == 1 {
        return MaskF::from_image(img).expect("single channel");
    }
    let (w, h, _) = img.dims();
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            0.299 * img.get(x, y, 0) + 0.587 * img.get(x, y, 1) + 0.114 * img.get(x, y, 2)
        })
        .collect();
    MaskF::new(w, h, data).expect("dimensions match")
}

pub fn encode_mask(mask: &MaskF, depth: BitDepth) -> Result<Vec<u8>> {
    encode_png(&mask.as_image(), depth)
}

/// 16-bit grayscale with code `floor(v * 65535 + 0.5)`; values outside
/// `[0, 1]` are clamped first.
pub fn encode_grid_png16(grid: &Grid2D) -> Result<Vec<u8>> {
    let (w, h) = (grid.width() as u32, grid.height() as u32);
    let data: Vec<u16> = grid
        .data()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0 + 0.5).floor() as u16)
        .collect();
    let buf = ImageBuffer::<Luma<u16>, _>::from_raw(w, h, data).expect("buffer size");
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageLuma16(buf).write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

/// One row per line, 17 significant digits per value.
pub fn grid_to_csv(grid: &Grid2D) -> String {
    let mut out = String::new();
    for y in 0..grid.height() {
        let row: Vec<String> = (0..grid.width())
            .map(|x| format!("{:.16e}", grid.get(x, y)))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn grid_from_csv(text: &str) -> Result<Grid2D> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(format!("grid csv row {}: {e}", i + 1)))?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::invalid(format!("grid csv row {} has {} values", i + 1, rec.len())));
        }
        for f in rec.iter() {
            data.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("grid csv row {}: {e}", i + 1)))?,
            );
        }
        height += 1;
    }
    Grid2D::new(width.unwrap_or(0), height, data)
}

/// Reads `x,y` rows (a third column is ignored). A non-numeric first row is
/// treated as a header.
pub fn read_points_csv(text: &str) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(format!("points csv row {}: {e}", i + 1)))?;
        if rec.len() < 2 {
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            return Err(Error::invalid(format!("points csv row {} needs x,y", i + 1)));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => points.push(Keypoint::new(x, y)),
            _ if i == 0 => continue,
            _ => return Err(Error::invalid(format!("points csv row {} is not numeric", i + 1))),
        }
    }
    Ok(PointSet::new(points))
}

/// Writes `x,y,in_frame` with a header row.
pub fn points_to_csv(points: &PointSet) -> String {
    let mut out = String::from("x,y,in_frame\n");
    for p in &points.points {
        out.push_str(&format!("{},{},{}\n", p.x, p.y, u8::from(p.in_frame)));
    }
    out
}
