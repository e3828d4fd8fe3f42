//! Least-squares fit of a null-field combination to a binary image on a slice.
//!
//! One stress component (σ11 by default) of every null-basis field is sampled
//! on the plane `x3 = const`, and the minimum-norm coefficients matching a ±1
//! target follow from the pseudo-inverse. Any combination of null fields is
//! itself a null field, so the fit is a valid residual stress by construction.

use std::io::{BufRead, Read, Write};

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cosine::{coeffs_from_generator, NullBasis, NullGenerator};
use crate::error::{Error, Result};
use crate::field::ElasticConstants;
use crate::trig::Axis;

/// Default slice resolution per side.
pub const DEFAULT_SLICE_RESOLUTION: usize = 64;

/// Sampling plane `x3 = x3`, `width` nodes along `x1` and `height` along `x2`,
/// both spanning the closed interval `[0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub width: usize,
    pub height: usize,
    pub x3: f64,
    /// Storage slot `(11, 22, 33, 23, 13, 12)` of the fitted component.
    pub component: usize,
}

impl Default for SliceSpec {
    fn default() -> Self {
        SliceSpec {
            width: DEFAULT_SLICE_RESOLUTION,
            height: DEFAULT_SLICE_RESOLUTION,
            x3: std::f64::consts::FRAC_PI_2,
            component: 0,
        }
    }
}

impl SliceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::InvalidInput(format!("slice must be at least 2x2, got {}x{}", self.width, self.height)));
        }
        if !self.x3.is_finite() {
            return Err(Error::InvalidInput("slice position must be finite".into()));
        }
        if self.component > 5 {
            return Err(Error::InvalidInput(format!("component slot {} out of range", self.component)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x1_axis(&self) -> Vec<f64> {
        closed_axis(self.width)
    }

    pub fn x2_axis(&self) -> Vec<f64> {
        closed_axis(self.height)
    }
}

fn closed_axis(n: usize) -> Vec<f64> {
    let h = std::f64::consts::TAU / (n - 1) as f64;
    (0..n).map(|t| t as f64 * h).collect()
}

/// Image of ±1 values, row-major with row `r` at `x2` index `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryTarget {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl BinaryTarget {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("target image is empty".into()));
        }
        if values.len() != width * height {
            return Err(Error::Shape(format!("{} pixels for a {width}x{height} image", values.len())));
        }
        if let Some(v) = values.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::InvalidInput(format!("target pixel {v} is not ±1")));
        }
        Ok(BinaryTarget { width, height, values })
    }

    /// Thresholds grayscale at `mid`: values `>= mid` become +1.
    pub fn threshold(width: usize, height: usize, gray: &[f64], mid: f64) -> Result<Self> {
        Self::new(width, height, gray.iter().map(|&g| if g >= mid { 1.0 } else { -1.0 }).collect())
    }

    /// Squares of `cell` pixels, +1 at the origin.
    pub fn checkerboard(width: usize, height: usize, cell: usize) -> Result<Self> {
        if cell == 0 {
            return Err(Error::InvalidInput("checkerboard cell size must be positive".into()));
        }
        let values = (0..height)
            .flat_map(|r| (0..width).map(move |c| if (r / cell + c / cell).is_multiple_of(2) { 1.0 } else { -1.0 }))
            .collect();
        Self::new(width, height, values)
    }

    /// +1 inside the centred disk of radius `radius · min(width, height) / 2`, -1 outside.
    pub fn disk(width: usize, height: usize, radius: f64) -> Result<Self> {
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        let rad = radius * width.min(height) as f64 / 2.0;
        let values = (0..height)
            .flat_map(|r| {
                (0..width).map(move |c| {
                    let (dx, dy) = (c as f64 + 0.5 - cx, r as f64 + 0.5 - cy);
                    if dx.hypot(dy) <= rad {
                        1.0
                    } else {
                        -1.0
                    }
                })
            })
            .collect();
        Self::new(width, height, values)
    }

    /// Sign pattern of a sampled field (zero counts as +1).
    pub fn from_signs(width: usize, height: usize, field: &[f64]) -> Result<Self> {
        Self::threshold(width, height, field, 0.0)
    }

    /// Nearest-pixel value at each slice node, the image stretched over `[0, 2π]²`.
    pub fn resample(&self, slice: &SliceSpec) -> Vec<f64> {
        let pick = |t: usize, nodes: usize, pixels: usize| {
            ((t as f64 / (nodes - 1) as f64 * pixels as f64) as usize).min(pixels - 1)
        };
        (0..slice.height)
            .flat_map(|r| {
                let pr = pick(r, slice.height, self.height);
                (0..slice.width).map(move |c| self.values[pr * self.width + pick(c, slice.width, self.width)])
            })
            .collect()
    }

    /// PGM (P2 or P5), thresholded at the midpoint of `[0, maxval]`.
    pub fn read_pgm<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let (header, pos) = pgm_header(&bytes)?;
        let [magic, width, height, maxval] = header;
        if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
            return Err(Error::Parse(format!("bad PGM header {width}x{height} maxval {maxval}")));
        }
        let n = width * height;
        let gray: Vec<f64> = if magic == 2 {
            let text = std::str::from_utf8(&bytes[pos..]).map_err(|e| Error::Parse(e.to_string()))?;
            let vals = strip_comments(text)
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("PGM pixel {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != n {
                return Err(Error::Parse(format!("PGM has {} pixels, header says {n}", vals.len())));
            }
            vals
        } else {
            // one whitespace byte separates the header from the raster
            let data = &bytes[pos + 1..];
            let wide = maxval > 255;
            let need = if wide { 2 * n } else { n };
            if data.len() < need {
                return Err(Error::Parse(format!("PGM raster has {} bytes, need {need}", data.len())));
            }
            if wide {
                data[..need].chunks(2).map(|b| u16::from_be_bytes([b[0], b[1]]) as f64).collect()
            } else {
                data[..n].iter().map(|&b| b as f64).collect()
            }
        };
        Self::threshold(width, height, &gray, maxval as f64 / 2.0)
    }

    /// One image row per line, comma separated. Values must be ±1 or are
    /// thresholded at the midpoint of their range.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("CSV pixel {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Parse("CSV rows have different lengths".into()));
        }
        let gray: Vec<f64> = rows.into_iter().flatten().collect();
        if gray.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite CSV pixel".into()));
        }
        if gray.iter().all(|&v| v == 1.0 || v == -1.0) {
            return Self::new(width, height, gray);
        }
        let lo = gray.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = gray.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::threshold(width, height, &gray, 0.5 * (lo + hi))
    }
}

fn strip_comments(text: &str) -> String {
    text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n")
}

/// Parses `P2`/`P5`, width, height and maxval; returns them with the offset
/// of the last header byte consumed.
fn pgm_header(bytes: &[u8]) -> Result<([usize; 4], usize)> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|e| Error::Parse(e.to_string()))?;
        let v = if fields.is_empty() {
            match tok {
                "P2" => 2,
                "P5" => 5,
                _ => return Err(Error::Parse(format!("unsupported image magic {tok:?}"))),
            }
        } else {
            tok.parse().map_err(|e| Error::Parse(format!("PGM header {tok:?}: {e}")))?
        };
        fields.push(v);
    }
    if pos >= bytes.len() && fields[0] == 5 {
        return Err(Error::Parse("PGM raster missing".into()));
    }
    Ok(([fields[0], fields[1], fields[2], fields[3]], pos))
}

/// Sampled component of every basis field on the slice.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub slice: SliceSpec,
    /// One column per basis field, each row-major over the slice.
    pub columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.slice.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// `Σ_q w_q column_q`.
    pub fn combine(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        for (wq, col) in w.iter().zip(&self.columns) {
            out.iter_mut().zip(col).for_each(|(o, v)| *o += wq * v);
        }
        out
    }
}

/// Evaluates the chosen stress component of each null-basis field analytically
/// on the slice nodes.
pub fn slice_design_matrix(
    basis: &NullBasis,
    n: usize,
    c: &ElasticConstants,
    slice: &SliceSpec,
) -> Result<DesignMatrix> {
    if basis.n != n {
        return Err(Error::Shape(format!("basis was built for N = {}, requested N = {n}", basis.n)));
    }
    slice.validate()?;
    let x3 = [slice.x3];
    let axes = [Axis::Closed(slice.width), Axis::Closed(slice.height), Axis::Points(&x3)];
    let columns = basis
        .columns
        .par_iter()
        .map(|col| {
            let pot = coeffs_from_generator(&NullGenerator::new(n, col.clone())?, c)?;
            Ok(pot.stress_series().comps[slice.component].eval_on(axes))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignMatrix { slice: *slice, columns })
}

/// Fitted component on the slice, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceLattice {
    pub width: usize,
    pub height: usize,
    pub x3: f64,
    pub component: usize,
    pub values: Vec<f64>,
}

impl SliceLattice {
    /// One slice row per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.values.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Binary PGM of the sign pattern: white where the value is `>= 0`.
    pub fn write_sign_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let raster: Vec<u8> = self.values.iter().map(|&v| if v >= 0.0 { 255 } else { 0 }).collect();
        w.write_all(&raster)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
    pub slice: SliceLattice,
}

/// Minimum-norm least-squares coefficients via the Moore-Penrose pseudo-inverse
/// (singular values below `max(rows, cols) · ε · σ_max` are dropped).
pub fn fit(target: &BinaryTarget, design: &DesignMatrix) -> Result<FitResult> {
    let slice = design.slice;
    let b = target.resample(&slice);
    let (rows, cols) = (design.nrows(), design.ncols());
    let coefficients = if cols == 0 {
        Vec::new()
    } else {
        let a = Mat::from_fn(rows, cols, |r, c| design.columns[c][r]);
        let pinv = a.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?.pseudoinverse();
        (0..cols).map(|c| (0..rows).map(|r| pinv[(c, r)] * b[r]).sum()).collect()
    };
    let values = design.combine(&coefficients);
    let rms_residual = (values.iter().zip(&b).map(|(v, t)| (v - t) * (v - t)).sum::<f64>() / rows as f64).sqrt();
    Ok(FitResult {
        coefficients,
        rms_residual,
        slice: SliceLattice {
            width: slice.width,
            height: slice.height,
            x3: slice.x3,
            component: slice.component,
            values,
        },
    })
}
