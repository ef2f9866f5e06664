use super::TattooTemplate;
use crate::imaging::{Mask, Rect};
use crate::{Error, Result};

/// Smallest accepted side of a placed tattoo, in pixels.
pub const MIN_SIDE: u32 = 8;

/// Largest axis-aligned rectangle inside `region ∧ ¬occupancy`.
///
/// Histogram-stack sweep, O(W·H). Every maximal empty rectangle is visited,
/// so ties resolve to the smallest top row, then the smallest left column.
pub fn largest_empty_rect(region: &Mask, occupancy: &Mask) -> Result<Rect> {
    if !region.same_dims(occupancy) {
        return Err(Error::param("region and occupancy masks differ in size"));
    }
    let (w, h) = (region.width() as usize, region.height() as usize);
    let mut heights = vec![0u32; w];
    let mut stack: Vec<usize> = Vec::with_capacity(w + 1);
    let mut best: Option<(u64, Rect)> = None;
    let mut consider = |r: Rect| {
        let better = match &best {
            None => true,
            Some((a, b)) => r.area() > *a || (r.area() == *a && (r.y, r.x) < (b.y, b.x)),
        };
        if better {
            best = Some((r.area(), r));
        }
    };
    for y in 0..h {
        for (x, hx) in heights.iter_mut().enumerate() {
            let free = region.get(x as u32, y as u32) && !occupancy.get(x as u32, y as u32);
            *hx = if free { *hx + 1 } else { 0 };
        }
        stack.clear();
        for x in 0..=w {
            let cur = if x < w { heights[x] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < cur {
                    break;
                }
                stack.pop();
                let bar = heights[top];
                // equal bars are merged into the earlier one; skip the popped duplicate
                if bar == cur && x < w {
                    continue;
                }
                if bar == 0 {
                    continue;
                }
                let left = stack.last().map_or(0, |&l| l + 1);
                consider(Rect::new(
                    left as u32,
                    (y + 1) as u32 - bar,
                    (x - left) as u32,
                    bar,
                ));
            }
            stack.push(x);
        }
    }
    best.map(|(_, r)| r).ok_or(Error::NoSpace)
}

/// The outcome of fitting a template into a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub rect: Rect,
    pub scale: f64,
}

/// Scales a template to the largest aspect-preserving size inside `r`, centred.
///
/// Sizes are integral; when rounding would distort the aspect ratio by more
/// than 1%, the size shrinks until it does not.
pub fn fit_tattoo(t: &TattooTemplate, r: Rect) -> Result<Fit> {
    fit_size(t.width(), t.height(), r)
}

pub(crate) fn fit_size(tw: u32, th: u32, r: Rect) -> Result<Fit> {
    if r.w == 0 || r.h == 0 {
        return Err(Error::param("target rectangle is empty"));
    }
    let (tw_f, th_f) = (tw as f64, th as f64);
    let scale = (r.w as f64 / tw_f).min(r.h as f64 / th_f);
    let too_small = || Error::TooSmall {
        width: tw_f * scale,
        height: th_f * scale,
        min: MIN_SIDE,
    };
    let aspect = tw_f / th_f;
    let err = |w: u32, h: u32| ((w as f64 / h as f64) - aspect).abs() / aspect;
    let mut w = ((tw_f * scale + 1e-9).floor() as u32).min(r.w);
    let mut h = ((th_f * scale + 1e-9).floor() as u32).min(r.h);
    loop {
        if w < MIN_SIDE || h < MIN_SIDE {
            return Err(too_small());
        }
        if err(w, h) <= 0.01 {
            break;
        }
        // shrink the longer side one pixel and recompute the other
        if aspect >= 1.0 {
            w -= 1;
            h = ((w as f64 / aspect).round() as u32).min(r.h);
        } else {
            h -= 1;
            w = ((h as f64 * aspect).round() as u32).min(r.w);
        }
    }
    Ok(Fit {
        rect: Rect::new(r.x + (r.w - w) / 2, r.y + (r.h - h) / 2, w, h),
        scale: w as f64 / tw_f,
    })
}
