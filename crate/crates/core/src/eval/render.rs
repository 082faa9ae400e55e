//! PNG figures for trajectories, Q-maps and curvature histograms.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::eval::{CurvatureHistogram, QMap};
use crate::trajectory::{Point, Trajectory};

const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const INK: Rgb<u8> = Rgb([20, 20, 20]);
const START: Rgb<u8> = Rgb([220, 30, 30]);
const OVERLAY: Rgb<u8> = Rgb([255, 255, 255]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Side length of a trajectory canvas.
    pub size: u32,
    /// Pixels per Q-map cell or histogram cell.
    pub cell: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { size: 256, cell: 4 }
    }
}

pub enum Artifact<'a> {
    Trajectory(&'a Trajectory),
    QMap(&'a QMap),
    Histogram(&'a CurvatureHistogram),
}

pub fn render(artifact: Artifact<'_>, dest: &Path, options: &RenderOptions) -> Result<()> {
    if options.size < 8 || options.cell == 0 {
        return Err(Error::invalid("canvas too small to draw on"));
    }
    let img = match artifact {
        Artifact::Trajectory(t) => trajectory_image(t, options),
        Artifact::QMap(m) => qmap_image(m, options),
        Artifact::Histogram(h) => histogram_image(h, options),
    };
    img.save_with_format(dest, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(dest, io),
            other => Error::io(dest, std::io::Error::other(other.to_string())),
        })
}

pub fn trajectory_image(traj: &Trajectory, options: &RenderOptions) -> RgbImage {
    let mut img = RgbImage::from_pixel(options.size, options.size, BACKGROUND);
    draw_polyline(&mut img, &traj.points, INK);
    if let Some(&first) = traj.points.first() {
        let (x, y) = to_pixel(&img, first);
        disc(&mut img, x, y, 3, START);
    }
    img
}

/// Heat image, low values dark blue and high values yellow; row `i` of the
/// map is drawn at height `y = (i + 0.5) / grid` with y increasing upward.
pub fn qmap_image(map: &QMap, options: &RenderOptions) -> RgbImage {
    let side = map.grid as u32 * options.cell;
    let mut img = RgbImage::from_pixel(side, side, BACKGROUND);
    let (lo, hi) = map.min_max();
    let span = hi - lo;
    for i in 0..map.grid {
        for j in 0..map.grid {
            let v = if span > 0.0 { (map.get(i, j) - lo) / span } else { 0.5 };
            let colour = heat(v);
            let row = (map.grid - 1 - i) as u32 * options.cell;
            fill(&mut img, j as u32 * options.cell, row, options.cell, options.cell, colour);
        }
    }
    let points = map.state.points();
    draw_polyline(&mut img, &points, OVERLAY);
    if let Some(&last) = points.last() {
        let (x, y) = to_pixel(&img, last);
        disc(&mut img, x, y, 2, START);
    }
    img
}

/// Intensity grid: one row per scale (delta 1 at the top), one column per
/// curvature bin, darker for more mass.
pub fn histogram_image(hist: &CurvatureHistogram, options: &RenderOptions) -> RgbImage {
    let c = options.cell;
    let mut img = RgbImage::from_pixel(hist.bins as u32 * c, hist.delta_max as u32 * c, BACKGROUND);
    for (d, row) in hist.rows.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if v > 0.0 {
                let shade = 255 - (v.clamp(0.0, 1.0) * 255.0).round() as u8;
                fill(&mut img, b as u32 * c, d as u32 * c, c, c, Rgb([shade, shade, shade]));
            }
        }
    }
    img
}

fn heat(v: f64) -> Rgb<u8> {
    let v = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * v).round() as u8;
    Rgb([lerp(30.0, 250.0), lerp(20.0, 230.0), lerp(120.0, 40.0)])
}

fn to_pixel(img: &RgbImage, p: Point) -> (i64, i64) {
    let w = (img.width() - 1) as f64;
    let h = (img.height() - 1) as f64;
    ((p.x.clamp(0.0, 1.0) * w).round() as i64, ((1.0 - p.y.clamp(0.0, 1.0)) * h).round() as i64)
}

fn put(img: &mut RgbImage, x: i64, y: i64, colour: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, colour);
    }
}

fn fill(img: &mut RgbImage, x0: u32, y0: u32, w: u32, h: u32, colour: Rgb<u8>) {
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            img.put_pixel(x, y, colour);
        }
    }
}

fn disc(img: &mut RgbImage, cx: i64, cy: i64, r: i64, colour: Rgb<u8>) {
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                put(img, cx + dx, cy + dy, colour);
            }
        }
    }
}

fn draw_polyline(img: &mut RgbImage, points: &[Point], colour: Rgb<u8>) {
    if let [only] = points {
        let (x, y) = to_pixel(img, *only);
        put(img, x, y, colour);
    }
    for pair in points.windows(2) {
        let (x0, y0) = to_pixel(img, pair[0]);
        let (x1, y1) = to_pixel(img, pair[1]);
        line(img, x0, y0, x1, y1, colour);
    }
}

// Bresenham.
fn line(img: &mut RgbImage, mut x0: i64, mut y0: i64, x1: i64, y1: i64, colour: Rgb<u8>) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        put(img, x0, y0, colour);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}
