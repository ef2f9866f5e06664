use super::{Image, Rect};
use crate::geometry::{Landmarks68, INNER_FACE};
use crate::{Error, Result};

/// Bounding box of landmarks 17–67 (brows down to the chin), clamped to the image.
///
/// The box spans `floor(min)..=ceil(max)` on each axis, so points covering
/// `x ∈ [100, 300]` give a 201 px wide box starting at 100.
pub fn inner_rect(lm: &Landmarks68, width: u32, height: u32) -> Result<Rect> {
    let pts = &lm.points()[INNER_FACE];
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::landmarks("inner-face box has zero area"));
    }
    let lo = |v: f64, max: u32| v.floor().clamp(0.0, max as f64 - 1.0) as u32;
    let (cx0, cy0) = (lo(x0, width), lo(y0, height));
    let (cx1, cy1) = (lo(x1.ceil(), width), lo(y1.ceil(), height));
    if x1 < 0.0 || y1 < 0.0 || x0 >= width as f64 || y0 >= height as f64 {
        return Err(Error::landmarks("inner-face box lies outside the image"));
    }
    Ok(Rect::new(cx0, cy0, cx1 - cx0 + 1, cy1 - cy0 + 1))
}

/// Crops the brows-to-chin area used for "inner" quality scores.
pub fn crop_inner(img: &Image, lm: &Landmarks68) -> Result<Image> {
    img.crop(inner_rect(lm, img.width(), img.height())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::synthetic;

    /// Rescales the inner points of the synthetic face onto a given box.
    fn spanning(x: (f64, f64), y: (f64, f64)) -> Landmarks68 {
        let lm = synthetic::frontal_landmarks(256, 256);
        let inner = &lm.points()[INNER_FACE];
        let min_x = inner.iter().map(|p| p.x).fold(f64::MAX, f64::min);
        let max_x = inner.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        let min_y = inner.iter().map(|p| p.y).fold(f64::MAX, f64::min);
        let max_y = inner.iter().map(|p| p.y).fold(f64::MIN, f64::max);
        lm.map_points(|p| {
            Point::new(
                x.0 + (p.x - min_x) / (max_x - min_x) * (x.1 - x.0),
                y.0 + (p.y - min_y) / (max_y - min_y) * (y.1 - y.0),
            )
        })
        .unwrap()
    }

    #[test]
    fn box_arithmetic() {
        let lm = spanning((100.0, 300.0), (120.0, 380.0));
        let img = Image::filled(400, 400, &[9, 9, 9]).unwrap();
        let crop = crop_inner(&img, &lm).unwrap();
        assert_eq!((crop.width(), crop.height()), (201, 261));
        assert_eq!(inner_rect(&lm, 400, 400).unwrap(), Rect::new(100, 120, 201, 261));
    }

    #[test]
    fn clamps_to_image() {
        let lm = spanning((-20.0, 150.0), (30.0, 500.0));
        let r = inner_rect(&lm, 200, 400).unwrap();
        assert_eq!(r, Rect::new(0, 30, 151, 370));
        assert!(r.fits_in(200, 400));
    }

    #[test]
    fn degenerate_box_is_rejected() {
        let pts = vec![Point::new(50.0, 50.0); 68];
        let mut pts = pts;
        // keep the jaw-order check satisfied; inner points all coincide
        pts[0] = Point::new(10.0, 50.0);
        pts[16] = Point::new(90.0, 50.0);
        pts[8] = Point::new(50.0, 90.0);
        pts[27] = Point::new(50.0, 20.0);
        let mut inner = pts.clone();
        for p in inner.iter_mut().skip(17) {
            *p = Point::new(50.0, 50.0);
        }
        let lm = Landmarks68::new(&inner, 100, 100).unwrap();
        assert!(matches!(inner_rect(&lm, 100, 100), Err(Error::InvalidLandmarks(_))));
    }
}
