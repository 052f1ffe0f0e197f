//! 8-bit grayscale images (binary PGM) and f32 scalar grids (SMLG).

use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const GRID_MAGIC: &[u8; 4] = b"SMLG";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn write_pgm(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }

    pub fn read_pgm(r: impl Read) -> std::result::Result<Self, String> {
        let mut r = std::io::BufReader::new(r);
        let mut fields = Vec::with_capacity(4);
        // header tokens may be separated by arbitrary whitespace and comments
        while fields.len() < 4 {
            let mut line = String::new();
            if r.read_line(&mut line).map_err(|e| e.to_string())? == 0 {
                return Err("truncated PGM header".into());
            }
            let content = line.split('#').next().unwrap_or("");
            fields.extend(content.split_whitespace().map(str::to_owned));
        }
        if fields[0] != "P5" {
            return Err(format!("unsupported PGM magic {:?}", fields[0]));
        }
        if fields.len() > 4 {
            return Err("unexpected data on the PGM header line".into());
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|e| format!("bad PGM header field {s:?}: {e}"));
        let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(format!("unsupported PGM maxval {maxval}"));
        }
        let mut data = vec![0u8; width * height];
        r.read_exact(&mut data).map_err(|e| format!("truncated PGM body: {e}"))?;
        Ok(GrayImage { width, height, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, |w| self.write_pgm(w))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_pgm(file).map_err(|m| Error::format(path, m))
    }
}

/// Row-major grid of reals; NaN marks an empty entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarGrid {
    pub fn empty(width: usize, height: usize) -> Self {
        ScalarGrid {
            width,
            height,
            data: vec![f64::NAN; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let data: Vec<f64> = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        assert_eq!(data.len(), width * height, "grid value count");
        ScalarGrid { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let v = self.data[y * self.width + x];
        (!v.is_nan()).then_some(v)
    }

    pub fn set(&mut self, x: usize, y: usize, value: Option<f64>) {
        self.data[y * self.width + x] = value.unwrap_or(f64::NAN);
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(GRID_MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        let buf: Vec<u8> = self.data.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        w.write_all(&buf)
    }

    pub fn read_from(mut r: impl Read) -> std::result::Result<Self, String> {
        let mut header = [0u8; 12];
        r.read_exact(&mut header).map_err(|e| format!("truncated header: {e}"))?;
        if &header[..4] != GRID_MAGIC {
            return Err("bad magic, expected SMLG".into());
        }
        let width = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut body = vec![0u8; width * height * 4];
        r.read_exact(&mut body).map_err(|e| format!("truncated body: {e}"))?;
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Ok(ScalarGrid { width, height, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, |w| self.write_to(w))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file)).map_err(|m| Error::format(path, m))
    }
}

pub(crate) fn write_file(
    path: &Path,
    body: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
