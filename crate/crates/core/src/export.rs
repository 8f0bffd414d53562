//! File output for bone maps: PFM float images and 8-bit PNG previews.
//!
//! PFM files are little-endian (scale `-1.0`) with rows stored bottom to
//! top, as the format requires. Depth is written as a one-channel `Pf`
//! image in meters; normals as a three-channel `PF` image of raw
//! camera-space components. Background pixels are zero in both.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::renderer::BoneMap;

/// Writes `bytes` to `path` via a temporary file in the same directory and
/// a rename, so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn encode_pfm(width: usize, height: usize, channels: usize, data: &[f32]) -> Vec<u8> {
    assert!(
        channels == 1 || channels == 3,
        "PFM supports 1 or 3 channels"
    );
    assert_eq!(data.len(), width * height * channels);
    let tag = if channels == 1 { "Pf" } else { "PF" };
    let mut out = format!("{tag}\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(data.len() * 4);
    let row = width * channels;
    for y in (0..height).rev() {
        for v in &data[y * row..(y + 1) * row] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decoded PFM image with rows top to bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

pub fn decode_pfm(bytes: &[u8]) -> Result<PfmImage> {
    let bad = |m: &str| Error::Parse(format!("PFM: {m}"));
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields
            .push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let channels = match fields[0] {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(bad(&format!("unknown tag {other:?}"))),
    };
    let width: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    let scale: f32 = fields[3].parse().map_err(|_| bad("bad scale"))?;
    let little = scale < 0.0;
    let row = width * channels;
    let need = row * height * 4;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| bad("truncated raster"))?;
    let mut data = vec![0.0f32; row * height];
    for (k, chunk) in raster.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (file_row, col) = (k / row, k % row);
        data[(height - 1 - file_row) * row + col] = v;
    }
    Ok(PfmImage {
        width,
        height,
        channels,
        data,
    })
}

pub fn depth_pfm(map: &BoneMap) -> Vec<u8> {
    encode_pfm(map.width(), map.height(), 1, map.depth())
}

pub fn normal_pfm(map: &BoneMap) -> Vec<u8> {
    let flat: Vec<f32> = map.normal().iter().flatten().copied().collect();
    encode_pfm(map.width(), map.height(), 3, &flat)
}

fn encode_png(width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("PNG header to memory");
        writer.write_image_data(data).expect("PNG data to memory");
    }
    out
}

fn to_u8(x: f32) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Grayscale preview: covered depth divided by the maximum covered depth;
/// background black.
pub fn depth_preview_png(map: &BoneMap) -> Vec<u8> {
    let max = map.max_depth();
    let pixels: Vec<u8> = map
        .depth()
        .iter()
        .zip(map.coverage())
        .map(|(d, c)| if *c && max > 0.0 { to_u8(d / max) } else { 0 })
        .collect();
    encode_png(
        map.width(),
        map.height(),
        png::ColorType::Grayscale,
        &pixels,
    )
}

/// RGB preview of `n·0.5 + 0.5`; background black.
pub fn normal_preview_png(map: &BoneMap) -> Vec<u8> {
    let pixels: Vec<u8> = map
        .normal()
        .iter()
        .zip(map.coverage())
        .flat_map(|(n, c)| {
            if *c {
                n.map(|v| to_u8(v * 0.5 + 0.5))
            } else {
                [0; 3]
            }
        })
        .collect();
    encode_png(map.width(), map.height(), png::ColorType::Rgb, &pixels)
}

/// Writes `depth_*.pfm`, `normal_*.pfm` and, optionally, the PNG previews
/// for one map into `dir`, using `stem` as the shared suffix.
pub fn write_bone_map(dir: &Path, stem: &str, map: &BoneMap, previews: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_atomic(dir.join(format!("depth_{stem}.pfm")), &depth_pfm(map))?;
    write_atomic(dir.join(format!("normal_{stem}.pfm")), &normal_pfm(map))?;
    if previews {
        write_atomic(
            dir.join(format!("depth_{stem}.png")),
            &depth_preview_png(map),
        )?;
        write_atomic(
            dir.join(format!("normal_{stem}.png")),
            &normal_preview_png(map),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pfm_layout() {
        // 2x2, top row (1, 2), bottom row (3, 4).
        let bytes = encode_pfm(2, 2, 1, &[1.0, 2.0, 3.0, 4.0]);
        let header = b"Pf\n2 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        let first = f32::from_le_bytes(bytes[header.len()..header.len() + 4].try_into().unwrap());
        assert_eq!(first, 3.0, "PFM stores the bottom row first");
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(decode_pfm(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(decode_pfm(b"Pf\n4 4\n-1.0\n\0\0").is_err());
    }

    #[test]
    fn previews_are_valid_png() {
        let mut map = BoneMap::background(3, 2);
        map.set(1, 2.0, [0.0, 0.0, -1.0]);
        for bytes in [depth_preview_png(&map), normal_preview_png(&map)] {
            let dec = png::Decoder::new(std::io::Cursor::new(bytes));
            let mut reader = dec.read_info().unwrap();
            let mut buf = vec![0; reader.output_buffer_size().unwrap()];
            let info = reader.next_frame(&mut buf).unwrap();
            assert_eq!((info.width, info.height), (3, 2));
            assert_eq!(buf[0], 0);
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn pfm_round_trip(
            (w, h, c, data) in (1usize..6, 1usize..6, prop::sample::select(vec![1usize, 3]))
                .prop_flat_map(|(w, h, c)| {
                    (Just(w), Just(h), Just(c), prop::collection::vec(-1e3f32..1e3, w * h * c))
                })
        ) {
            let img = decode_pfm(&encode_pfm(w, h, c, &data)).unwrap();
            prop_assert_eq!((img.width, img.height, img.channels), (w, h, c));
            prop_assert_eq!(img.data, data);
        }
    }
}
