//! Binary PGM (`P5`, maxval 255).

use std::io::{BufRead, Write};

use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

pub fn write_pgm<W: Write>(img: &GrayImage, mut out: W) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    let bytes: Vec<u8> = img
        .pixels()
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect();
    out.write_all(&bytes)?;
    Ok(())
}

/// Writes a binary image with 1 mapped to 255.
pub fn write_pgm_binary<W: Write>(img: &BinaryImage, mut out: W) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    let bytes: Vec<u8> = img.bits().iter().map(|&b| b * 255).collect();
    out.write_all(&bytes)?;
    Ok(())
}

pub fn read_pgm<R: BufRead>(mut input: R) -> Result<GrayImage> {
    let (w, h, raw) = read_raw(&mut input)?;
    GrayImage::new(w, h, raw.iter().map(|&b| f64::from(b) / 255.0).collect())
}

/// Reads a PGM and binarizes at mid-gray (values >= 128 become 1).
pub fn read_pgm_binary<R: BufRead>(mut input: R) -> Result<BinaryImage> {
    let (w, h, raw) = read_raw(&mut input)?;
    BinaryImage::new(w, h, raw.iter().map(|&b| u8::from(b >= 128)).collect())
}

fn read_raw<R: BufRead>(input: &mut R) -> Result<(usize, usize, Vec<u8>)> {
    let magic = header_token(input)?;
    if magic != "P5" {
        return Err(Error::Pgm(format!("expected magic P5, found {magic:?}")));
    }
    let mut field = |name: &str| -> Result<usize> {
        let tok = header_token(input)?;
        tok.parse()
            .map_err(|_| Error::Pgm(format!("bad {name}: {tok:?}")))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if maxval != 255 {
        return Err(Error::Pgm(format!(
            "only maxval 255 is supported, got {maxval}"
        )));
    }
    let mut raw = vec![0u8; width * height];
    input
        .read_exact(&mut raw)
        .map_err(|e| Error::Pgm(format!("truncated pixel data: {e}")))?;
    Ok((width, height, raw))
}

/// Next whitespace-delimited header token, skipping `#` comments. Consumes
/// exactly one whitespace byte after the token.
fn header_token<R: BufRead>(input: &mut R) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if input.read(&mut byte)? == 0 {
            return Err(Error::Pgm("unexpected end of header".into()));
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut skipped = Vec::new();
            input.read_until(b'\n', &mut skipped)?;
        } else if c.is_ascii_whitespace() {
            if !tok.is_empty() {
                return Ok(tok);
            }
        } else {
            tok.push(c as char);
        }
    }
}
