//! Weight rows rendered as image tiles, and tiles composed into grids.
//!
//! Each tile is min-max normalized on its own, so tiles are comparable in
//! shape but not in absolute magnitude. A grid has a 1-pixel separator
//! around every tile; annotated tiles get that separator ring colored
//! (where two annotated tiles touch, the higher neuron index wins the
//! shared edge).

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::datasets::ImageShape;
use crate::error::{HebbError, Result};
use crate::network::Network;

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Image {
    fn rgb(width: usize, height: usize, fill: [u8; 3]) -> Self {
        Image {
            width,
            height,
            channels: 3,
            data: fill.repeat(width * height),
        }
    }

    /// Pixel at `(x, y)` as RGB; gray values are replicated.
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * self.channels;
        match self.channels {
            1 => [self.data[i]; 3],
            _ => [self.data[i], self.data[i + 1], self.data[i + 2]],
        }
    }

    fn put(&mut self, x: usize, y: usize, c: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&c);
    }

    /// Converts to RGB (a no-op for RGB images).
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        Image {
            width: self.width,
            height: self.height,
            channels: 3,
            data: self.data.iter().flat_map(|v| [*v; 3]).collect(),
        }
    }

    /// Binary PPM: `P6\n<w> <h>\n255\n` followed by RGB bytes.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        let rgb = self.to_rgb();
        write!(w, "P6\n{} {}\n255\n", rgb.width, rgb.height)?;
        w.write_all(&rgb.data)?;
        Ok(())
    }

    pub fn save_ppm<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_ppm(f)
    }

    pub fn save_png<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer_with_format(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            color,
            image::ImageFormat::Png,
        )
        .map_err(|e| HebbError::Image(e.to_string()))
    }
}

/// Which tiles get a colored border.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annotate {
    None,
    /// Frozen rows get a red border.
    Frozen,
    /// Class-tagged rows get a border colored by class.
    Class,
}

impl std::str::FromStr for Annotate {
    type Err = HebbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "frozen" => Ok(Self::Frozen),
            "class" => Ok(Self::Class),
            other => Err(HebbError::config(
                "annotate",
                format!("unknown mode `{other}` (none | frozen | class)"),
            )),
        }
    }
}

pub const SEPARATOR: [u8; 3] = [32, 32, 32];
pub const FROZEN_COLOR: [u8; 3] = [230, 25, 25];

/// Fixed, well-separated colors; classes beyond the table cycle through it.
const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

pub fn class_color(class: u32) -> [u8; 3] {
    PALETTE[class as usize % PALETTE.len()]
}

/// Renders one weight row. Channel planes are stored one after another
/// (`C x H x W`); 1 channel gives gray, 3 give RGB. Values are min-max
/// scaled to 0..=255 over the whole row; a constant row becomes 128.
pub fn weight_to_image(row: &[f32], shape: ImageShape) -> Result<Image> {
    if row.len() != shape.len() {
        return Err(HebbError::invalid(format!(
            "row has {} values, shape {}x{}x{} needs {}",
            row.len(),
            shape.channels,
            shape.height,
            shape.width,
            shape.len()
        )));
    }
    if shape.channels != 1 && shape.channels != 3 {
        return Err(HebbError::invalid(format!(
            "only 1 or 3 channels can be rendered, got {}",
            shape.channels
        )));
    }
    let (lo, hi) = row
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let range = hi - lo;
    let scale = |v: f32| -> u8 {
        if !(range > 0.0) || !range.is_finite() {
            128
        } else {
            (((v - lo) / range) * 255.0).round().clamp(0.0, 255.0) as u8
        }
    };
    let plane = shape.height * shape.width;
    let mut data = Vec::with_capacity(row.len());
    for p in 0..plane {
        for c in 0..shape.channels {
            data.push(scale(row[c * plane + p]));
        }
    }
    Ok(Image {
        width: shape.width,
        height: shape.height,
        channels: shape.channels,
        data,
    })
}

/// Pixel size of a grid of `n` tiles: `cols*(w+1)+1` by `rows*(h+1)+1`.
pub fn grid_dimensions(n: usize, shape: ImageShape, cols: usize) -> (usize, usize) {
    let cols = cols.max(1).min(n.max(1));
    let rows = n.div_ceil(cols).max(1);
    (cols * (shape.width + 1) + 1, rows * (shape.height + 1) + 1)
}

/// All rows of `net` as tiles, row-major in neuron order. `cols` is capped
/// at the number of neurons; 0 is treated as 1.
pub fn render_grid(net: &Network, shape: ImageShape, cols: usize, annotate: Annotate) -> Result<Image> {
    render_rows(net, &(0..net.n_neurons()).collect::<Vec<_>>(), shape, cols, annotate)
}

/// Like [`render_grid`] for a chosen subset of rows, in the given order.
pub fn render_rows(
    net: &Network,
    rows: &[usize],
    shape: ImageShape,
    cols: usize,
    annotate: Annotate,
) -> Result<Image> {
    if let Some(j) = rows.iter().find(|j| **j >= net.n_neurons()) {
        return Err(HebbError::invalid(format!("row {j} out of range")));
    }
    let tiles: Vec<Image> = rows
        .par_iter()
        .map(|j| weight_to_image(net.row(*j), shape).map(|t| t.to_rgb()))
        .collect::<Result<_>>()?;
    let cols = cols.max(1).min(rows.len().max(1));
    let (w, h) = grid_dimensions(rows.len(), shape, cols);
    let mut img = Image::rgb(w, h, SEPARATOR);
    for (t, (tile, j)) in tiles.iter().zip(rows).enumerate() {
        let x0 = (t % cols) * (shape.width + 1) + 1;
        let y0 = (t / cols) * (shape.height + 1) + 1;
        for y in 0..shape.height {
            for x in 0..shape.width {
                img.put(x0 + x, y0 + y, tile.pixel(x, y));
            }
        }
        let border = match annotate {
            Annotate::None => None,
            Annotate::Frozen => net.is_frozen(*j).then_some(FROZEN_COLOR),
            Annotate::Class => net.class_group(*j).map(class_color),
        };
        if let Some(c) = border {
            for x in x0 - 1..=x0 + shape.width {
                img.put(x, y0 - 1, c);
                img.put(x, y0 + shape.height, c);
            }
            for y in y0 - 1..=y0 + shape.height {
                img.put(x0 - 1, y, c);
                img.put(x0 + shape.width, y, c);
            }
        }
    }
    Ok(img)
}
