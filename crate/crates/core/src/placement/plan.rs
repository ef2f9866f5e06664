use super::rect::{fit_size, largest_empty_rect};
use super::TattooTemplate;
use crate::geometry::{combine_regions, RegionId, RegionSet};
use crate::imaging::{Mask, Rect};
use crate::rng::{stream, StreamRng, PURPOSE_PLAN};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Coverage-mode acceptance band half-width (fraction of placeable area).
pub const COVERAGE_TOLERANCE: f64 = 0.01;
/// Consecutive failed attempts after which coverage mode gives up.
pub const MAX_FAILURES: u32 = 50;
/// Probability of merging the drawn region with one neighbour in coverage mode.
pub const NEIGHBOR_PROBABILITY: f64 = 0.25;

/// How tattoos are chosen and placed on one face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GenerationStrategy {
    /// Place tattoos until coverage reaches a target drawn from `[lo, hi]`.
    Coverage { lo: f64, hi: f64 },
    /// One tattoo inside the union of the given regions.
    Region(Vec<RegionId>),
    /// One tattoo spanning all six regions.
    FullFace,
    /// One portrait-tagged tattoo in a random region.
    Portrait,
}

impl GenerationStrategy {
    pub fn coverage(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::param(format!("coverage range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1")));
        }
        Ok(GenerationStrategy::Coverage { lo, hi })
    }
}

impl fmt::Display for GenerationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerationStrategy::Coverage { lo, hi } if lo == hi => write!(f, "coverage:{lo}"),
            GenerationStrategy::Coverage { lo, hi } => write!(f, "coverage:{lo}-{hi}"),
            GenerationStrategy::Region(ids) => {
                let names: Vec<&str> = ids.iter().map(|r| r.as_str()).collect();
                write!(f, "region:{}", names.join(","))
            }
            GenerationStrategy::FullFace => f.write_str("full-face"),
            GenerationStrategy::Portrait => f.write_str("portrait"),
        }
    }
}

impl FromStr for GenerationStrategy {
    type Err = Error;

    /// `coverage:0.05-0.25`, `coverage:0.15`, `region:forehead,chin`, `full-face`, `portrait`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "coverage" => {
                let num = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::param(format!("bad coverage value {v:?} in {s:?}")))
                };
                let (lo, hi) = match arg.split_once('-') {
                    Some((a, b)) => (num(a)?, num(b)?),
                    None => (num(arg)?, num(arg)?),
                };
                GenerationStrategy::coverage(lo, hi)
            }
            "region" => {
                let ids = arg
                    .split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(RegionId::from_str)
                    .collect::<Result<Vec<_>>>()?;
                if ids.is_empty() {
                    return Err(Error::param("region strategy needs at least one region id"));
                }
                Ok(GenerationStrategy::Region(ids))
            }
            "full-face" if arg.is_empty() => Ok(GenerationStrategy::FullFace),
            "portrait" if arg.is_empty() => Ok(GenerationStrategy::Portrait),
            _ => Err(Error::param(format!("unknown strategy {s:?}"))),
        }
    }
}

impl TryFrom<String> for GenerationStrategy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GenerationStrategy> for String {
    fn from(s: GenerationStrategy) -> String {
        s.to_string()
    }
}

/// One placed tattoo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub template: String,
    pub rect: Rect,
    pub scale: f64,
    pub regions: Vec<RegionId>,
    /// Non-transparent pixels of the scaled template.
    pub ink_pixels: u64,
}

/// Placements for one face plus the occupancy they reserve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub strategy: GenerationStrategy,
    pub seed: u64,
    pub placements: Vec<Placement>,
    pub achieved_coverage: f64,
    /// Drawn coverage target (coverage mode only).
    pub target: Option<f64>,
    /// Coverage mode stopped on the failure budget before reaching the target.
    pub best_effort: bool,
    #[serde(skip)]
    pub occupancy: Option<Mask>,
}

/// Fraction of the placeable area covered by `occupancy`.
pub fn coverage(occupancy: &Mask, rs: &RegionSet) -> f64 {
    if rs.total_placeable_area() == 0 {
        return 0.0;
    }
    occupancy.intersect(rs.placeable()).area() as f64 / rs.total_placeable_area() as f64
}

struct Planner<'a> {
    rs: &'a RegionSet,
    catalog: &'a [TattooTemplate],
    rng: StreamRng,
    occupancy: Mask,
    placements: Vec<Placement>,
    pool: Vec<usize>,
}

impl<'a> Planner<'a> {
    fn covered(&self) -> u64 {
        self.occupancy.intersect(self.rs.placeable()).area()
    }

    /// Uniform draw without replacement; the pool refills once exhausted.
    fn draw_template(&mut self, eligible: &[usize]) -> usize {
        if self.pool.is_empty() {
            self.pool = eligible.to_vec();
        }
        let k = self.rng.gen_range(0..self.pool.len());
        self.pool.swap_remove(k)
    }

    fn shuffled<T: Copy>(&mut self, items: &[T]) -> Vec<T> {
        let mut v = items.to_vec();
        for i in (1..v.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            v.swap(i, j);
        }
        v
    }

    fn accept(&mut self, t: usize, rect: Rect, scale: f64, regions: Vec<RegionId>, ink: Mask) {
        self.placements.push(Placement {
            template: self.catalog[t].id().to_string(),
            rect,
            scale,
            regions,
            ink_pixels: ink.area(),
        });
        self.occupancy.union_in_place(&ink);
    }

    /// Fits template `t` into the largest free rectangle of `area`.
    fn try_place(&mut self, t: usize, area: &Mask, regions: &[RegionId]) -> Result<()> {
        let free = largest_empty_rect(area, &self.occupancy)?;
        let tpl = &self.catalog[t];
        let fit = fit_size(tpl.width(), tpl.height(), free)?;
        let ink = tpl.ink_mask(fit.rect, self.rs.width(), self.rs.height());
        self.accept(t, fit.rect, fit.scale, regions.to_vec(), ink);
        Ok(())
    }

    fn finish(self, strategy: &GenerationStrategy, seed: u64, target: Option<f64>, best_effort: bool) -> PlacementPlan {
        let achieved_coverage = coverage(&self.occupancy, self.rs);
        PlacementPlan {
            strategy: strategy.clone(),
            seed,
            placements: self.placements,
            achieved_coverage,
            target,
            best_effort,
            occupancy: Some(self.occupancy),
        }
    }
}

/// Plans tattoo placements on one face. Deterministic in `(strategy, rs, catalog, seed)`.
pub fn plan_placements(
    strategy: &GenerationStrategy,
    rs: &RegionSet,
    catalog: &[TattooTemplate],
    seed: u64,
) -> Result<PlacementPlan> {
    if catalog.is_empty() {
        return Err(Error::param("template catalog is empty"));
    }
    let regions = rs.non_empty_regions();
    if regions.is_empty() {
        return Err(Error::NoSpace);
    }
    let mut p = Planner {
        rs,
        catalog,
        rng: stream(seed, &[PURPOSE_PLAN]),
        occupancy: Mask::new(rs.width(), rs.height()),
        placements: Vec::new(),
        pool: Vec::new(),
    };
    let all: Vec<usize> = (0..catalog.len()).collect();
    match strategy {
        GenerationStrategy::Coverage { lo, hi } => {
            let target = if lo < hi { p.rng.gen_range(*lo..=*hi) } else { *lo };
            let total = rs.total_placeable_area() as f64;
            let mut failures = 0;
            while (p.covered() as f64) < (target - COVERAGE_TOLERANCE) * total && failures < MAX_FAILURES {
                let region = regions[p.rng.gen_range(0..regions.len())];
                let mut ids = vec![region];
                if p.rng.gen_bool(NEIGHBOR_PROBABILITY) {
                    let n = region.neighbors();
                    ids.push(n[p.rng.gen_range(0..n.len())]);
                }
                let t = p.draw_template(&all);
                let area = combine_regions(rs, &ids)?;
                let budget = ((target + COVERAGE_TOLERANCE) * total).floor() as i64 - p.covered() as i64;
                match place_within_budget(&mut p, t, &area, &ids, budget) {
                    Ok(()) => failures = 0,
                    Err(Error::NoSpace | Error::TooSmall { .. }) => failures += 1,
                    Err(e) => return Err(e),
                }
            }
            let best_effort = (p.covered() as f64) < (target - COVERAGE_TOLERANCE) * total;
            Ok(p.finish(strategy, seed, Some(target), best_effort))
        }
        GenerationStrategy::Region(ids) => {
            let area = combine_regions(rs, ids)?;
            for t in p.shuffled(&all) {
                match p.try_place(t, &area, ids) {
                    Ok(()) => return Ok(p.finish(strategy, seed, None, false)),
                    Err(Error::NoSpace | Error::TooSmall { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::NoSpace)
        }
        GenerationStrategy::FullFace => {
            let area = combine_regions(rs, &RegionId::ALL)?;
            let bbox = area.bbox().ok_or(Error::NoSpace)?;
            for t in p.shuffled(&all) {
                let tpl = &catalog[t];
                match fit_size(tpl.width(), tpl.height(), bbox) {
                    Ok(fit) => {
                        let ink = tpl.ink_mask(fit.rect, rs.width(), rs.height());
                        p.accept(t, fit.rect, fit.scale, RegionId::ALL.to_vec(), ink);
                        return Ok(p.finish(strategy, seed, None, false));
                    }
                    Err(Error::TooSmall { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::NoSpace)
        }
        GenerationStrategy::Portrait => {
            let portraits: Vec<usize> = all.iter().copied().filter(|&i| catalog[i].has_tag("portrait")).collect();
            if portraits.is_empty() {
                return Err(Error::param("no template is tagged \"portrait\""));
            }
            for region in p.shuffled(&regions) {
                let area = rs.region(region).clone();
                for t in p.shuffled(&portraits) {
                    match p.try_place(t, &area, &[region]) {
                        Ok(()) => return Ok(p.finish(strategy, seed, None, false)),
                        Err(Error::NoSpace | Error::TooSmall { .. }) => continue,
                        Err(e) => return Err(e),
                    }
                }
            }
            Err(Error::NoSpace)
        }
    }
}

/// Places `t` in the largest free rectangle, shrinking it until its ink fits `budget`.
fn place_within_budget(p: &mut Planner<'_>, t: usize, area: &Mask, ids: &[RegionId], budget: i64) -> Result<()> {
    if budget <= 0 {
        return Err(Error::NoSpace);
    }
    let free = largest_empty_rect(area, &p.occupancy)?;
    let tpl = &p.catalog[t];
    let mut fit = fit_size(tpl.width(), tpl.height(), free)?;
    loop {
        let ink = tpl.ink_mask(fit.rect, p.rs.width(), p.rs.height());
        let count = ink.area() as i64;
        if count <= budget {
            p.accept(t, fit.rect, fit.scale, ids.to_vec(), ink);
            return Ok(());
        }
        // ink grows with area; aim just under the budget, then step down
        let ratio = ((budget as f64 / count as f64).sqrt() * 0.98).min(0.95);
        let shrunk = Rect::new(
            fit.rect.x,
            fit.rect.y,
            ((fit.rect.w as f64 * ratio).floor() as u32).max(1),
            ((fit.rect.h as f64 * ratio).floor() as u32).max(1),
        );
        let next = fit_size(tpl.width(), tpl.height(), shrunk)?;
        // re-centre inside the free rectangle
        fit = super::rect::Fit {
            rect: Rect::new(
                free.x + (free.w - next.rect.w) / 2,
                free.y + (free.h - next.rect.h) / 2,
                next.rect.w,
                next.rect.h,
            ),
            scale: next.scale,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_regions, extend_forehead};
    use crate::synthetic;

    fn face() -> RegionSet {
        let lm = synthetic::frontal_landmarks(256, 256);
        build_regions(&extend_forehead(&lm).unwrap(), 256, 256).unwrap()
    }

    #[test]
    fn strategy_shorthand_roundtrips() {
        for s in ["coverage:0.05-0.25", "coverage:0.15", "region:left-upper-cheek,chin", "full-face", "portrait"] {
            let parsed: GenerationStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
            let json = serde_json::to_string(&parsed).unwrap();
            assert_eq!(serde_json::from_str::<GenerationStrategy>(&json).unwrap(), parsed);
        }
        for bad in ["coverage:0.3-0.1", "coverage:0", "region:", "region:scalp", "tribal", "coverage:x"] {
            assert!(bad.parse::<GenerationStrategy>().is_err(), "{bad}");
        }
    }

    #[test]
    fn fixed_region_places_exactly_one_inside() {
        let rs = face();
        let pack = synthetic::template_pack();
        for seed in 0..5 {
            let s = GenerationStrategy::Region(vec![RegionId::LeftUpperCheek]);
            let plan = plan_placements(&s, &rs, &pack, seed).unwrap();
            assert_eq!(plan.placements.len(), 1);
            let region = rs.region(RegionId::LeftUpperCheek);
            assert!(region.covers_rect(&plan.placements[0].rect));
            assert!(region.bbox().unwrap().contains_rect(&plan.placements[0].rect));
        }
    }

    #[test]
    fn empty_catalog_is_rejected() {
        let rs = face();
        assert!(matches!(
            plan_placements(&GenerationStrategy::FullFace, &rs, &[], 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn coverage_plan_is_deterministic_and_disjoint() {
        let rs = face();
        let pack = synthetic::template_pack();
        let s = GenerationStrategy::coverage(0.05, 0.25).unwrap();
        let a = plan_placements(&s, &rs, &pack, 11).unwrap();
        let b = plan_placements(&s, &rs, &pack, 11).unwrap();
        assert_eq!(a, b);
        // per-pixel oracle: replay placements, no two inks overlap, sum matches
        let mut seen = Mask::new(256, 256);
        let mut sum = 0;
        let mut last = 0.0;
        for pl in &a.placements {
            let t = pack.iter().find(|t| t.id() == pl.template).unwrap();
            let ink = t.ink_mask(pl.rect, 256, 256);
            assert!(ink.is_disjoint(&seen));
            assert!(ink.is_subset_of(rs.placeable()));
            seen.union_in_place(&ink);
            sum += ink.area();
            let c = coverage(&seen, &rs);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(&seen, a.occupancy.as_ref().unwrap());
        let oracle = sum as f64 / rs.total_placeable_area() as f64;
        assert_eq!(a.achieved_coverage, oracle);
        let t = a.target.unwrap();
        assert!(a.best_effort || (a.achieved_coverage - t).abs() <= COVERAGE_TOLERANCE + 1e-12);
    }

    #[test]
    fn coverage_ratio_examples() {
        let rs = face();
        let empty = Mask::new(256, 256);
        assert_eq!(coverage(&empty, &rs), 0.0);
        assert_eq!(coverage(&rs.placeable().clone(), &rs), 1.0);
    }

    #[test]
    fn portrait_needs_a_tagged_template() {
        let rs = face();
        let pack: Vec<_> = synthetic::template_pack()
            .into_iter()
            .filter(|t| !t.has_tag("portrait"))
            .collect();
        assert!(matches!(
            plan_placements(&GenerationStrategy::Portrait, &rs, &pack, 3),
            Err(Error::InvalidParameter(_))
        ));
        let full = synthetic::template_pack();
        let plan = plan_placements(&GenerationStrategy::Portrait, &rs, &full, 3).unwrap();
        assert_eq!(plan.placements.len(), 1);
        let t = full.iter().find(|t| t.id() == plan.placements[0].template).unwrap();
        assert!(t.has_tag("portrait"));
    }

    #[test]
    fn full_face_spans_the_regions_bbox() {
        let rs = face();
        let pack = synthetic::template_pack();
        let plan = plan_placements(&GenerationStrategy::FullFace, &rs, &pack, 5).unwrap();
        let bbox = rs.placeable().bbox().unwrap();
        let r = plan.placements[0].rect;
        assert!(bbox.contains_rect(&r));
        assert!(r.w == bbox.w || r.h == bbox.h || r.w + 2 >= bbox.w || r.h + 2 >= bbox.h);
    }

    #[test]
    fn plan_serializes() {
        let rs = face();
        let plan = plan_placements(&GenerationStrategy::FullFace, &rs, &synthetic::template_pack(), 2).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        assert!(json.contains("\"strategy\":\"full-face\""));
        let back: PlacementPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back.placements, plan.placements);
    }
}
