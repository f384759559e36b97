//! Binary portable-map image I/O: P5 (grayscale) and P6 (color), 8-bit,
//! maxval 255, bit-exact round trip. Comment lines in headers are skipped.

use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage { width, height, data: vec![0; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut img = GrayImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }
}

#[derive(Clone, Debug)]
pub enum Pnm {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Pnm {
    pub fn into_gray(self) -> Result<GrayImage> {
        match self {
            Pnm::Gray(g) => Ok(g),
            Pnm::Rgb(_) => Err(Error::Pnm("expected a grayscale (P5) image".into())),
        }
    }

    pub fn into_rgb(self) -> Result<RgbImage> {
        match self {
            Pnm::Rgb(c) => Ok(c),
            Pnm::Gray(_) => Err(Error::Pnm("expected a color (P6) image".into())),
        }
    }
}

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn read_token(r: &mut impl BufRead) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::Pnm("unexpected end of header".into()));
            }
            return Ok(tok);
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut line = String::new();
            r.read_line(&mut line)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            return Ok(tok);
        }
        tok.push(c as char);
    }
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<Pnm> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let magic = read_token(&mut r)?;
    let width: usize = read_token(&mut r)?
        .parse()
        .map_err(|_| Error::Pnm("bad width".into()))?;
    let height: usize = read_token(&mut r)?
        .parse()
        .map_err(|_| Error::Pnm("bad height".into()))?;
    let maxval: usize = read_token(&mut r)?
        .parse()
        .map_err(|_| Error::Pnm("bad maxval".into()))?;
    if maxval != 255 {
        return Err(Error::Pnm(format!("unsupported maxval {maxval}, want 255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Pnm("zero image dimension".into()));
    }
    match magic.as_str() {
        "P5" => {
            let mut data = vec![0u8; width * height];
            r.read_exact(&mut data)
                .map_err(|_| Error::Pnm("truncated P5 pixel data".into()))?;
            Ok(Pnm::Gray(GrayImage { width, height, data }))
        }
        "P6" => {
            let mut raw = vec![0u8; width * height * 3];
            r.read_exact(&mut raw)
                .map_err(|_| Error::Pnm("truncated P6 pixel data".into()))?;
            let data = raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            Ok(Pnm::Rgb(RgbImage { width, height, data }))
        }
        other => Err(Error::Pnm(format!("unsupported magic {other:?}"))),
    }
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.data)?;
    w.flush()?;
    Ok(())
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
    for px in &img.data {
        w.write_all(px)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-pixel seed labels for interactive segmentation. Supplied as a P5 mask
/// with values 0 (none), 1 (background), 2 (foreground).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Seed {
    None,
    Background,
    Foreground,
}

#[derive(Clone, Debug)]
pub struct SeedMask {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Seed>,
}

impl SeedMask {
    pub fn from_image(img: &GrayImage) -> Result<Self> {
        let labels = img
            .data
            .iter()
            .map(|&v| match v {
                0 => Ok(Seed::None),
                1 => Ok(Seed::Background),
                2 => Ok(Seed::Foreground),
                other => Err(Error::Seeds(format!("invalid seed value {other}, want 0/1/2"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeedMask { width: img.width, height: img.height, labels })
    }

    pub fn get(&self, x: usize, y: usize) -> Seed {
        self.labels[y * self.width + x]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let img = GrayImage::from_fn(7, 5, |x, y| (x * 37 + y * 101) as u8);
        write_pgm(&img, &path).unwrap();
        let back = read_pnm(&path).unwrap().into_gray().unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn ppm_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let data: Vec<[u8; 3]> = (0..12u8).map(|i| [i, i.wrapping_mul(7), 255 - i]).collect();
        let img = RgbImage { width: 4, height: 3, data };
        write_ppm(&img, &path).unwrap();
        let back = read_pnm(&path).unwrap().into_rgb().unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn header_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        std::fs::write(&path, b"P5\n# a comment\n2 2\n# another\n255\nabcd").unwrap();
        let img = read_pnm(&path).unwrap().into_gray().unwrap();
        assert_eq!(img.data, b"abcd");
    }

    #[test]
    fn wrong_maxval_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        std::fs::write(&path, b"P5\n1 1\n65535\n\0\0").unwrap();
        assert!(read_pnm(&path).is_err());
    }

    #[test]
    fn seed_mask_parses_and_rejects() {
        let img = GrayImage { width: 3, height: 1, data: vec![0, 1, 2] };
        let mask = SeedMask::from_image(&img).unwrap();
        assert_eq!(mask.get(0, 0), Seed::None);
        assert_eq!(mask.get(1, 0), Seed::Background);
        assert_eq!(mask.get(2, 0), Seed::Foreground);
        let bad = GrayImage { width: 1, height: 1, data: vec![9] };
        assert!(SeedMask::from_image(&bad).is_err());
    }
}
