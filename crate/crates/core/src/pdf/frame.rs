//! Mapping between PDF user space and the stored viewing frame (top-left
//! origin, page rotation applied).

use lopdf::{Dictionary, Document as PdfFile, ObjectId};

use super::obj::{dict_get, num, nums};
use crate::geometry::BBox;

const LETTER: [f64; 4] = [0.0, 0.0, 612.0, 792.0];

/// Visible page rectangle plus `/Rotate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageFrame {
    pub llx: f64,
    pub lly: f64,
    pub urx: f64,
    pub ury: f64,
    /// Clockwise display rotation, one of 0, 90, 180, 270.
    pub rotation: u16,
}

fn normalize_rotation(raw: f64) -> u16 {
    let r = ((raw / 90.0).round() as i64).rem_euclid(4);
    (r * 90) as u16
}

fn inherited<'a>(file: &'a PdfFile, page: &'a Dictionary, key: &[u8]) -> Option<&'a lopdf::Object> {
    let mut node = page;
    for _ in 0..64 {
        if let Some(v) = dict_get(file, node, key) {
            return Some(v);
        }
        node = dict_get(file, node, b"Parent")?.as_dict().ok()?;
    }
    None
}

impl PageFrame {
    pub fn new(rect: [f64; 4], rotation: u16) -> Self {
        PageFrame {
            llx: rect[0].min(rect[2]),
            lly: rect[1].min(rect[3]),
            urx: rect[0].max(rect[2]),
            ury: rect[1].max(rect[3]),
            rotation,
        }
    }

    pub fn for_page(file: &PdfFile, page_id: ObjectId) -> Self {
        let Ok(page) = file.get_dictionary(page_id) else {
            return PageFrame::new(LETTER, 0);
        };
        let rect_of = |key: &[u8]| {
            inherited(file, page, key)
                .and_then(|o| nums(file, o))
                .filter(|v| v.len() == 4 && (v[2] - v[0]).abs() > 0.0 && (v[3] - v[1]).abs() > 0.0)
                .map(|v| [v[0], v[1], v[2], v[3]])
        };
        let media = rect_of(b"MediaBox").unwrap_or(LETTER);
        let visible = match rect_of(b"CropBox") {
            Some(c) => {
                let m = PageFrame::new(media, 0);
                let c = PageFrame::new(c, 0);
                let r = [m.llx.max(c.llx), m.lly.max(c.lly), m.urx.min(c.urx), m.ury.min(c.ury)];
                if r[0] < r[2] && r[1] < r[3] {
                    r
                } else {
                    media
                }
            }
            None => media,
        };
        let rotation = inherited(file, page, b"Rotate").and_then(num).unwrap_or(0.0);
        PageFrame::new(visible, normalize_rotation(rotation))
    }

    fn raw_width(&self) -> f64 {
        self.urx - self.llx
    }

    fn raw_height(&self) -> f64 {
        self.ury - self.lly
    }

    /// Width in the viewing orientation.
    pub fn width(&self) -> f64 {
        if self.rotation % 180 == 0 {
            self.raw_width()
        } else {
            self.raw_height()
        }
    }

    pub fn height(&self) -> f64 {
        if self.rotation % 180 == 0 {
            self.raw_height()
        } else {
            self.raw_width()
        }
    }

    /// User-space point to viewing coordinates.
    pub fn to_view(&self, x: f64, y: f64) -> (f64, f64) {
        let (w, h) = (self.raw_width(), self.raw_height());
        let (xt, yt) = (x - self.llx, self.ury - y);
        match self.rotation {
            90 => (h - yt, xt),
            180 => (w - xt, h - yt),
            270 => (yt, w - xt),
            _ => (xt, yt),
        }
    }

    /// Viewing coordinates back to user space.
    pub fn to_user(&self, xv: f64, yv: f64) -> (f64, f64) {
        let (w, h) = (self.raw_width(), self.raw_height());
        let (xt, yt) = match self.rotation {
            90 => (yv, h - xv),
            180 => (w - xv, h - yv),
            270 => (w - yv, xv),
            _ => (xv, yv),
        };
        (xt + self.llx, self.ury - yt)
    }

    /// Axis-aligned user-space rectangle `[llx, lly, urx, ury]` of a viewing box.
    pub fn box_to_user(&self, b: &BBox) -> [f64; 4] {
        let corners = [
            self.to_user(b.x0, b.y0),
            self.to_user(b.x1, b.y0),
            self.to_user(b.x0, b.y1),
            self.to_user(b.x1, b.y1),
        ];
        let xs = corners.iter().map(|c| c.0);
        let ys = corners.iter().map(|c| c.1);
        [
            xs.clone().fold(f64::INFINITY, f64::min),
            ys.clone().fold(f64::INFINITY, f64::min),
            xs.fold(f64::NEG_INFINITY, f64::max),
            ys.fold(f64::NEG_INFINITY, f64::max),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrotated_flips_y() {
        let f = PageFrame::new([0.0, 0.0, 612.0, 792.0], 0);
        assert_eq!(f.to_view(72.0, 720.0), (72.0, 72.0));
        assert_eq!(f.box_to_user(&BBox::new(72.0, 62.0, 130.0, 74.0)), [72.0, 718.0, 130.0, 730.0]);
    }

    #[test]
    fn rotations_round_trip_and_swap_dimensions() {
        for rot in [0u16, 90, 180, 270] {
            let f = PageFrame::new([10.0, 20.0, 622.0, 812.0], rot);
            let (x, y) = (100.0, 300.0);
            let (xv, yv) = f.to_view(x, y);
            let (xb, yb) = f.to_user(xv, yv);
            assert!((xb - x).abs() < 1e-9 && (yb - y).abs() < 1e-9, "rot {rot}");
            assert!(xv >= 0.0 && xv <= f.width() && yv >= 0.0 && yv <= f.height());
        }
        let f = PageFrame::new([0.0, 0.0, 612.0, 792.0], 90);
        assert_eq!((f.width(), f.height()), (792.0, 612.0));
        // Bottom-left of the unrotated page shows at the top-left.
        assert_eq!(f.to_view(0.0, 0.0), (0.0, 0.0));
        assert_eq!(f.to_view(0.0, 792.0), (792.0, 0.0));
    }

    #[test]
    fn rotation_normalizes() {
        assert_eq!(normalize_rotation(-90.0), 270);
        assert_eq!(normalize_rotation(450.0), 90);
        assert_eq!(normalize_rotation(0.0), 0);
    }
}
