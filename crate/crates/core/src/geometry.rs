//! Axis-aligned boxes in page points with a top-left origin.

use serde::{Deserialize, Serialize};

/// Rectangle `(x0, y0, x1, y1)` in points, `y` growing downwards.
///
/// Serialized as a four-element array to match the sidecar and wire formats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl BBox {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Area, zero for degenerate or inverted boxes.
    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn is_well_formed(&self) -> bool {
        self.x0.is_finite()
            && self.y0.is_finite()
            && self.x1.is_finite()
            && self.y1.is_finite()
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new(
            self.x0.min(other.x0),
            self.y0.min(other.y0),
            self.x1.max(other.x1),
            self.y1.max(other.y1),
        )
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        );
        (b.x0 < b.x1 && b.y0 < b.y1).then_some(b)
    }

    /// True when the box lies inside `[0, width] x [0, height]` grown by `tolerance`.
    pub fn within_page(&self, width: f64, height: f64, tolerance: f64) -> bool {
        self.x0 >= -tolerance
            && self.y0 >= -tolerance
            && self.x1 <= width + tolerance
            && self.y1 <= height + tolerance
    }

    /// Bounding union of a sequence of boxes; `None` when empty.
    pub fn union_all<'a, I: IntoIterator<Item = &'a BBox>>(boxes: I) -> Option<BBox> {
        boxes.into_iter().fold(None, |acc: Option<BBox>, b| {
            Some(match acc {
                Some(a) => a.union(b),
                None => *b,
            })
        })
    }
}

/// Area of `(∪ a) ∩ (∪ b)` computed exactly by coordinate compression.
///
/// Both inputs are treated as regions; overlapping boxes within one side are not
/// double counted.
pub fn region_intersection_area(a: &[BBox], b: &[BBox]) -> f64 {
    let a: Vec<&BBox> = a.iter().filter(|r| r.area() > 0.0).collect();
    let b: Vec<&BBox> = b.iter().filter(|r| r.area() > 0.0).collect();
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = a.iter().chain(&b).flat_map(|r| [r.x0, r.x1]).collect();
    let mut ys: Vec<f64> = a.iter().chain(&b).flat_map(|r| [r.y0, r.y1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();

    let covers = |set: &[&BBox], cx: f64, cy: f64| {
        set.iter()
            .any(|r| r.x0 <= cx && cx <= r.x1 && r.y0 <= cy && cy <= r.y1)
    };
    let mut total = 0.0;
    for xw in xs.windows(2) {
        let cx = (xw[0] + xw[1]) / 2.0;
        for yw in ys.windows(2) {
            let cy = (yw[0] + yw[1]) / 2.0;
            if covers(&a, cx, cy) && covers(&b, cx, cy) {
                total += (xw[1] - xw[0]) * (yw[1] - yw[0]);
            }
        }
    }
    total
}

/// Area of `∪ a`.
pub fn region_area(a: &[BBox]) -> f64 {
    region_intersection_area(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_and_intersection() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox::new(5.0, 5.0, 15.0, 20.0);
        assert_eq!(a.union(&b), BBox::new(0.0, 0.0, 15.0, 20.0));
        assert_eq!(a.intersection(&b), Some(BBox::new(5.0, 5.0, 10.0, 10.0)));
        assert_eq!(a.intersection(&BBox::new(10.0, 0.0, 20.0, 10.0)), None);
    }

    #[test]
    fn region_area_does_not_double_count() {
        let boxes = [BBox::new(0.0, 0.0, 10.0, 10.0), BBox::new(5.0, 0.0, 15.0, 10.0)];
        assert_eq!(region_area(&boxes), 150.0);
        let probe = [BBox::new(8.0, 2.0, 20.0, 4.0)];
        assert_eq!(region_intersection_area(&boxes, &probe), 14.0);
        assert_eq!(region_intersection_area(&boxes, &[]), 0.0);
    }

    #[test]
    fn serializes_as_array() {
        let b = BBox::new(1.0, 2.0, 3.0, 4.5);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1.0,2.0,3.0,4.5]");
        let back: BBox = serde_json::from_str("[1,2,3,4.5]").unwrap();
        assert_eq!(back, b);
    }
}
