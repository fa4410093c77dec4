//! Overlay rendering for `reconstruct`.
//!
//! Colors: mask in dark gray, traced boundary in white, image-space landmarks
//! in green, reconstructed outline in red.

use image::{Rgb, RgbImage};

use shapeprior::landmark::{Contour, LandmarkShape};
use shapeprior::raster::BinaryMask;

const FILL: Rgb<u8> = Rgb([60, 60, 60]);
const BOUNDARY: Rgb<u8> = Rgb([255, 255, 255]);
const LANDMARK: Rgb<u8> = Rgb([0, 220, 0]);
const RECON: Rgb<u8> = Rgb([230, 30, 30]);

fn put(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    let (xi, yi) = (x.round(), y.round());
    if xi >= 0.0 && yi >= 0.0 && (xi as u32) < img.width() && (yi as u32) < img.height() {
        img.put_pixel(xi as u32, yi as u32, c);
    }
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        put(img, a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1), c);
    }
}

pub fn render(
    mask: &BinaryMask,
    boundary: &Contour,
    landmarks: &LandmarkShape,
    reconstruction: &LandmarkShape,
) -> RgbImage {
    let mut img = RgbImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        if mask.get(x as usize, y as usize) {
            FILL
        } else {
            Rgb([0, 0, 0])
        }
    });
    for &(x, y) in boundary.points() {
        put(&mut img, x, y, BOUNDARY);
    }
    let rec: Vec<(f64, f64)> = reconstruction.points().collect();
    for i in 0..rec.len() {
        line(&mut img, rec[i], rec[(i + 1) % rec.len()], RECON);
    }
    for (x, y) in landmarks.points() {
        put(&mut img, x, y, LANDMARK);
    }
    img
}
