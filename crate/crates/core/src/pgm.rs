//! Minimal Netpbm graymap codec (P2 plain and P5 raw, maxval <= 255).

use std::io::Write;

/// A decoded graymap with samples in `[0, maxval]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u8>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("expected {what}"));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("{what} out of range"))
    }
}

/// Decode a P2 or P5 graymap. Returns a human-readable reason on failure.
pub fn decode(data: &[u8]) -> Result<Graymap, String> {
    if data.len() < 2 || data[0] != b'P' {
        return Err("missing Netpbm magic".into());
    }
    let plain = match data[1] {
        b'2' => true,
        b'5' => false,
        m => return Err(format!("unsupported Netpbm variant P{}", m as char)),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("maxval {maxval} not in 1..=255"));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| "image dimensions overflow".to_string())?;

    let mut samples = Vec::with_capacity(n);
    if plain {
        for _ in 0..n {
            let v = cur.number("sample")?;
            if v > maxval {
                return Err(format!("sample {v} exceeds maxval {maxval}"));
            }
            samples.push(v as u8);
        }
    } else {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
            return Err("missing raster separator".into());
        }
        let start = cur.pos + 1;
        let raster = data
            .get(start..start + n)
            .ok_or_else(|| format!("truncated raster: need {n} bytes"))?;
        if let Some(&v) = raster.iter().find(|&&v| v as usize > maxval) {
            return Err(format!("sample {v} exceeds maxval {maxval}"));
        }
        samples.extend_from_slice(raster);
    }
    Ok(Graymap {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

/// Encode as raw P5.
pub fn encode_p5(map: &Graymap, out: &mut impl Write) -> std::io::Result<()> {
    encode_p5_with_comments(map, &[], out)
}

/// Raw P5 with `# ` comment lines after the magic number.
pub fn encode_p5_with_comments(
    map: &Graymap,
    comments: &[String],
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(out, "P5")?;
    for c in comments {
        writeln!(out, "# {}", c.replace(['\n', '\r'], " "))?;
    }
    write!(out, "{} {}\n{}\n", map.width, map.height, map.maxval)?;
    out.write_all(&map.samples)
}

/// Encode as plain P2, at most 16 samples per line.
pub fn encode_p2(map: &Graymap, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "P2\n{} {}\n{}\n", map.width, map.height, map.maxval)?;
    for row in map.samples.chunks(map.width) {
        for line in row.chunks(16) {
            let text: Vec<String> = line.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", text.join(" "))?;
        }
    }
    Ok(())
}
