//! File formats: JSON documents for every serializable type and PGM images
//! for grid functions.
//!
//! PGM rows are stored top to bottom, so the first image row becomes the
//! grid row with the largest y. Writers record the grid geometry in
//! `# spacing h`, `# origin x y` and `# scale s` comment lines; readers honour them unless
//! the caller overrides.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::grid::GridFunction;
use crate::scalar::Real;

pub fn read_json<D: DeserializeOwned>(path: impl AsRef<Path>) -> Result<D> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PgmGeometry {
    pub spacing: Option<f64>,
    pub origin: Option<(f64, f64)>,
    /// Multiplies the `[0, 1]`-normalized intensities.
    pub scale: Option<f64>,
}

/// A decoded image: intensities in `[0, 1]` (before scaling) plus any
/// geometry found in its comments.
#[derive(Clone, Debug, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Row-major, first row at the top.
    pub pixels: Vec<u32>,
    pub geometry: PgmGeometry,
}

struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
    geometry: PgmGeometry,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    let end = self.data[self.pos..].iter().position(|&b| b == b'\n').map_or(self.data.len(), |e| self.pos + e);
                    let line = String::from_utf8_lossy(&self.data[self.pos + 1..end]).to_string();
                    self.comment(&line);
                    self.pos = end;
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn comment(&mut self, line: &str) {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["spacing", h] => self.geometry.spacing = h.parse().ok(),
            ["scale", v] => self.geometry.scale = v.parse().ok(),
            ["origin", x, y] => {
                if let (Ok(x), Ok(y)) = (x.parse(), y.parse()) {
                    self.geometry.origin = Some((x, y));
                }
            }
            _ => {}
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("read_pgm: expected {what} at byte {start}")))
    }
}

pub fn parse_pgm(data: &[u8]) -> Result<Pgm> {
    if data.len() < 2 || data[0] != b'P' || !(data[1] == b'2' || data[1] == b'5') {
        return Err(Error::Parse("read_pgm: missing P2/P5 magic number".into()));
    }
    let binary = data[1] == b'5';
    let mut tok = Tokens { data, pos: 2, geometry: PgmGeometry::default() };
    let width = tok.number("width")? as usize;
    let height = tok.number("height")? as usize;
    let maxval = tok.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("read_pgm: maxval {maxval} outside 1..=65535")));
    }
    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let start = tok.pos + 1;
        let bytes = if maxval < 256 { 1 } else { 2 };
        let raster = data.get(start..start + n * bytes).ok_or_else(|| Error::Parse(format!("read_pgm: raster truncated, expected {} bytes", n * bytes)))?;
        pixels.extend(raster.chunks(bytes).map(|c| if bytes == 1 { c[0] as u32 } else { u32::from(c[0]) << 8 | u32::from(c[1]) }));
    } else {
        for i in 0..n {
            pixels.push(tok.number(&format!("pixel {i}"))?);
        }
    }
    if let Some(i) = pixels.iter().position(|&v| v > maxval) {
        return Err(Error::Parse(format!("read_pgm: pixel {i} = {} exceeds maxval {maxval}", pixels[i])));
    }
    Ok(Pgm { width, height, maxval, pixels, geometry: tok.geometry })
}

impl Pgm {
    /// Grid with node spacing and origin from `overrides`, then the file's
    /// comments, then `1` and `(0, 0)`.
    pub fn to_grid<T: Real>(&self, overrides: PgmGeometry) -> Result<GridFunction<T>> {
        let h = overrides.spacing.or(self.geometry.spacing).unwrap_or(1.0);
        let (ox, oy) = overrides.origin.or(self.geometry.origin).unwrap_or((0.0, 0.0));
        let scale = overrides.scale.or(self.geometry.scale).unwrap_or(1.0);
        let (w, hgt, m) = (self.width, self.height, self.maxval as f64);
        let values = (0..hgt)
            .flat_map(|r| {
                let row = hgt - 1 - r;
                (0..w).map(move |c| T::lit(scale * self.pixels[row * w + c] as f64 / m))
            })
            .collect();
        GridFunction::new(hgt, w, T::lit(h), Point2::new(T::lit(ox), T::lit(oy)), values)
    }
}

pub fn read_pgm<T: Real>(path: impl AsRef<Path>, overrides: PgmGeometry) -> Result<GridFunction<T>> {
    parse_pgm(&fs::read(path)?)?.to_grid(overrides)
}

/// Encodes `u` as a 16-bit binary PGM. Values are mapped linearly from
/// `[0, max(1, max u)]`; negative values are an error.
pub fn encode_pgm<T: Real>(u: &GridFunction<T>) -> Result<Vec<u8>> {
    if u.min() < T::zero() {
        return Err(Error::invalid("write_pgm", format!("negative value {} cannot be stored", u.min())));
    }
    let top = u.max().max(T::one()).as_f64();
    let (rows, cols) = (u.rows(), u.cols());
    let mut out = format!(
        "P5\n# spacing {}\n# origin {} {}\n# scale {}\n{cols} {rows}\n65535\n",
        u.spacing(),
        u.origin().x,
        u.origin().y,
        top
    )
    .into_bytes();
    for r in (0..rows).rev() {
        for c in 0..cols {
            let v = (u.at(r, c).as_f64() / top * 65535.0).round() as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn write_pgm<T: Real>(path: impl AsRef<Path>, u: &GridFunction<T>) -> Result<()> {
    fs::write(path, encode_pgm(u)?)?;
    Ok(())
}
