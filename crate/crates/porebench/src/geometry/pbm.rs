//! Netpbm import and export for binary pore geometry.
//!
//! Bitmaps (P1/P4) map 1 = black = solid, 0 = white = void. Graymaps
//! (P2/P5) are thresholded at mid-gray: a pixel is void iff its value
//! exceeds half the declared maximum, so white reads as pore space.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{GeometryError, PoreImage};

/// Reads a PBM or PGM file, plain or binary, into a pore image.
///
/// The result uses unit pixels and is marked periodic on both axes;
/// callers that know otherwise can override the flags.
pub fn read_raster<P: AsRef<Path>>(path: P) -> Result<PoreImage, GeometryError> {
    parse_raster(&fs::read(path)?)
}

/// Parses in-memory netpbm bytes. See [`read_raster`].
pub fn parse_raster(bytes: &[u8]) -> Result<PoreImage, GeometryError> {
    let magic = bytes.get(..2).ok_or_else(|| {
        GeometryError::MalformedHeader("file shorter than a magic number".into())
    })?;
    let mut scan = Scanner::new(bytes, 2);
    match magic {
        b"P1" => parse_plain_bitmap(&mut scan),
        b"P2" => parse_plain_graymap(&mut scan),
        b"P4" => parse_binary_bitmap(&mut scan),
        b"P5" => parse_binary_graymap(&mut scan),
        other => Err(GeometryError::UnsupportedMagic(
            String::from_utf8_lossy(other).into_owned(),
        )),
    }
}

/// Writes binary PBM (P4).
pub fn write_raster<P: AsRef<Path>>(image: &PoreImage, path: P) -> Result<(), GeometryError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(format!("P4\n{} {}\n", image.width(), image.height()).as_bytes())?;
    let row_bytes = image.width().div_ceil(8);
    let mut row = vec![0u8; row_bytes];
    for y in 0..image.height() {
        row.fill(0);
        for x in 0..image.width() {
            if !image.is_void(x, y) {
                row[x / 8] |= 0x80 >> (x % 8);
            }
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes plain-text PBM (P1).
pub fn write_raster_plain<P: AsRef<Path>>(
    image: &PoreImage,
    path: P,
) -> Result<(), GeometryError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(format!("P1\n{} {}\n", image.width(), image.height()).as_bytes())?;
    for y in 0..image.height() {
        let mut line = String::with_capacity(image.width() + 1);
        for x in 0..image.width() {
            line.push(if image.is_void(x, y) { '0' } else { '1' });
            // Keep plain lines below the traditional 70-column limit.
            if (x + 1) % 64 == 0 && x + 1 < image.width() {
                line.push('\n');
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an 8-bit binary PGM (P5, maxval 255). Used for debug rasters.
pub fn write_pgm<P: AsRef<Path>>(
    path: P,
    width: usize,
    height: usize,
    pixels: &[u8],
) -> Result<(), GeometryError> {
    if pixels.len() != width * height {
        return Err(GeometryError::CellCountMismatch {
            got: pixels.len(),
            expected: width * height,
        });
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(format!("P5\n{width} {height}\n255\n").as_bytes())?;
    w.write_all(pixels)?;
    w.flush()?;
    Ok(())
}

/// Byte cursor with netpbm token rules: whitespace separates tokens and
/// `#` starts a comment running to end of line.
struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(bytes: &'a [u8], pos: usize) -> Self {
        Self { bytes, pos }
    }

    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&'a [u8], GeometryError> {
        self.skip_separators();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(GeometryError::MalformedHeader(format!("missing {what}")));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, GeometryError> {
        let tok = self.token(what)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| {
                GeometryError::MalformedHeader(format!(
                    "{what} is not a decimal number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }

    fn dimensions(&mut self) -> Result<(usize, usize), GeometryError> {
        let width = self.number("width")?;
        let height = self.number("height")?;
        if width == 0 || height == 0 {
            return Err(GeometryError::MalformedHeader(format!(
                "zero image dimension {width}x{height}"
            )));
        }
        if width
            .checked_mul(height)
            .is_none_or(|n| n > 1 << 30)
        {
            return Err(GeometryError::MalformedHeader(format!(
                "implausible image dimension {width}x{height}"
            )));
        }
        Ok((width, height))
    }

    /// Consumes the single whitespace byte that separates a binary-format
    /// header from its payload.
    fn raster_start(&mut self) -> Result<usize, GeometryError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(self.pos + 1),
            _ => Err(GeometryError::MalformedHeader(
                "binary raster must follow a single whitespace byte".into(),
            )),
        }
    }
}

fn parse_plain_bitmap(scan: &mut Scanner) -> Result<PoreImage, GeometryError> {
    let (width, height) = scan.dimensions()?;
    let mut cells = Vec::with_capacity(width * height);
    // Plain bitmap digits may be packed without separators.
    while cells.len() < width * height {
        scan.skip_separators();
        match scan.bytes.get(scan.pos) {
            Some(b'0') => cells.push(true),
            Some(b'1') => cells.push(false),
            Some(&b) => {
                return Err(GeometryError::MalformedHeader(format!(
                    "invalid bitmap digit {:?}",
                    b as char
                )))
            }
            None => {
                return Err(GeometryError::TruncatedPayload(format!(
                    "bitmap holds {} of {} pixels",
                    cells.len(),
                    width * height
                )))
            }
        }
        scan.pos += 1;
    }
    PoreImage::new(width, height, cells)
}

fn parse_plain_graymap(scan: &mut Scanner) -> Result<PoreImage, GeometryError> {
    let (width, height) = scan.dimensions()?;
    let maxval = graymap_maxval(scan)?;
    let mut cells = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        scan.skip_separators();
        if scan.pos >= scan.bytes.len() {
            return Err(GeometryError::TruncatedPayload(format!(
                "graymap holds {} of {} samples",
                cells.len(),
                width * height
            )));
        }
        let v = scan.number("gray sample")?;
        if v > maxval {
            return Err(GeometryError::MalformedHeader(format!(
                "gray sample {v} exceeds maxval {maxval}"
            )));
        }
        cells.push(2 * v > maxval);
    }
    PoreImage::new(width, height, cells)
}

fn parse_binary_bitmap(scan: &mut Scanner) -> Result<PoreImage, GeometryError> {
    let (width, height) = scan.dimensions()?;
    let start = scan.raster_start()?;
    let row_bytes = width.div_ceil(8);
    let need = row_bytes * height;
    let payload = &scan.bytes[start..];
    if payload.len() < need {
        return Err(GeometryError::TruncatedPayload(format!(
            "bitmap payload holds {} of {} bytes",
            payload.len(),
            need
        )));
    }
    let mut cells = Vec::with_capacity(width * height);
    for y in 0..height {
        let row = &payload[y * row_bytes..(y + 1) * row_bytes];
        for x in 0..width {
            let bit = row[x / 8] & (0x80 >> (x % 8));
            cells.push(bit == 0);
        }
    }
    PoreImage::new(width, height, cells)
}

fn parse_binary_graymap(scan: &mut Scanner) -> Result<PoreImage, GeometryError> {
    let (width, height) = scan.dimensions()?;
    let maxval = graymap_maxval(scan)?;
    let start = scan.raster_start()?;
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    let payload = &scan.bytes[start..];
    if payload.len() < need {
        return Err(GeometryError::TruncatedPayload(format!(
            "graymap payload holds {} of {} bytes",
            payload.len(),
            need
        )));
    }
    let mut cells = Vec::with_capacity(width * height);
    for i in 0..width * height {
        let v = if wide {
            // Two-byte samples are big-endian.
            u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]]) as usize
        } else {
            payload[i] as usize
        };
        if v > maxval {
            return Err(GeometryError::MalformedHeader(format!(
                "gray sample {v} exceeds maxval {maxval}"
            )));
        }
        cells.push(2 * v > maxval);
    }
    PoreImage::new(width, height, cells)
}

fn graymap_maxval(scan: &mut Scanner) -> Result<usize, GeometryError> {
    let maxval = scan.number("maxval")?;
    if maxval == 0 || maxval > 65_535 {
        return Err(GeometryError::MalformedHeader(format!(
            "maxval {maxval} outside 1..=65535"
        )));
    }
    Ok(maxval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_the_plain_bitmap_example() {
        let img = parse_raster(b"P1\n2 2\n0 1\n1 0\n").unwrap();
        assert!(img.is_void(0, 0));
        assert!(!img.is_void(1, 0));
        assert!(!img.is_void(0, 1));
        assert!(img.is_void(1, 1));
    }

    #[test]
    fn plain_bitmap_accepts_packed_digits_and_comments() {
        let img = parse_raster(b"P1 # tiny\n# another comment\n3 2\n010101\n").unwrap();
        assert_eq!(img.void_count(), 3);
        assert!(!img.is_void(1, 0));
    }

    #[test]
    fn binary_bitmap_round_trips_unaligned_widths() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dir = tempfile::tempdir().unwrap();
        for (w, h) in [(10, 7), (13, 4), (8, 8), (1, 5)] {
            let cells: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.5)).collect();
            let img = PoreImage::new(w, h, cells).unwrap();
            let path = dir.path().join(format!("rt_{w}x{h}.pbm"));
            write_raster(&img, &path).unwrap();
            let back = read_raster(&path).unwrap();
            assert_eq!(back, img);
        }
    }

    #[test]
    fn plain_bitmap_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dir = tempfile::tempdir().unwrap();
        let cells: Vec<bool> = (0..130 * 3).map(|_| rng.gen_bool(0.4)).collect();
        let img = PoreImage::new(130, 3, cells).unwrap();
        let path = dir.path().join("rt.p1.pbm");
        write_raster_plain(&img, &path).unwrap();
        assert_eq!(read_raster(&path).unwrap(), img);
    }

    #[test]
    fn graymaps_threshold_at_mid_gray() {
        let img = parse_raster(b"P5\n2 2\n255\n\x00\x7f\x80\xff").unwrap();
        assert!(!img.is_void(0, 0)); // 0: black, solid
        assert!(!img.is_void(1, 0)); // 127: below mid-gray
        assert!(img.is_void(0, 1)); // 128: above mid-gray
        assert!(img.is_void(1, 1)); // 255: white, void

        let img = parse_raster(b"P2\n2 1\n10\n5 6\n").unwrap();
        assert!(!img.is_void(0, 0)); // exactly half stays solid
        assert!(img.is_void(1, 0));
    }

    #[test]
    fn all_white_binary_graymap_is_all_void() {
        let img = parse_raster(b"P5\n3 2\n255\n\xff\xff\xff\xff\xff\xff").unwrap();
        assert_eq!(img.porosity(), 1.0);
    }

    #[test]
    fn sixteen_bit_graymaps_use_big_endian_samples() {
        // maxval 1000; sample 600 > 500 is void, 400 is solid.
        let mut bytes = b"P5\n2 1\n1000\n".to_vec();
        bytes.extend_from_slice(&600u16.to_be_bytes());
        bytes.extend_from_slice(&400u16.to_be_bytes());
        let img = parse_raster(&bytes).unwrap();
        assert!(img.is_void(0, 0));
        assert!(!img.is_void(1, 0));
    }

    #[test]
    fn rejects_unsupported_magic() {
        for bad in [&b"P3\n1 1\n255\n0 0 0\n"[..], b"P7\n", b"BM"] {
            assert!(matches!(
                parse_raster(bad),
                Err(GeometryError::UnsupportedMagic(_))
            ));
        }
    }

    #[test]
    fn rejects_malformed_headers() {
        for bad in [
            &b"P1\n# never says how big\n"[..],
            b"P1\nfoo bar\n01\n",
            b"P1\n0 4\n",
            b"P2\n2 2\n0\n0 0 0 0\n",
            b"P1\n2 2\n0 1 2 0\n",
        ] {
            assert!(matches!(
                parse_raster(bad),
                Err(GeometryError::MalformedHeader(_))
            ));
        }
    }

    #[test]
    fn rejects_truncated_payloads() {
        for bad in [
            &b"P1\n3 3\n0 1 0 1\n"[..],
            b"P4\n16 2\n\x00\x00\x00",
            b"P5\n2 2\n255\n\x01\x02",
            b"P2\n2 2\n255\n1 2 3\n",
        ] {
            assert!(matches!(
                parse_raster(bad),
                Err(GeometryError::TruncatedPayload(_))
            ));
        }
    }
}
