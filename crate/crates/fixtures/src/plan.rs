//! Word plans: what text goes where, independent of how it is encoded.

use crate::metrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    Helvetica,
    HelveticaBold,
    TimesRoman,
    Courier,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Helvetica, Face::HelveticaBold, Face::TimesRoman, Face::Courier];

    pub fn base_font(self) -> &'static str {
        match self {
            Face::Helvetica => "Helvetica",
            Face::HelveticaBold => "Helvetica-Bold",
            Face::TimesRoman => "Times-Roman",
            Face::Courier => "Courier",
        }
    }

    /// Advance width of a printable ASCII byte in 1/1000 em.
    pub fn width(self, byte: u8) -> f64 {
        let table = match self {
            Face::Helvetica => &metrics::HELVETICA,
            Face::HelveticaBold => &metrics::HELVETICA_BOLD,
            Face::TimesRoman => &metrics::TIMES_ROMAN,
            Face::Courier => &metrics::COURIER,
        };
        assert!((32..127).contains(&byte), "generator only writes printable ASCII");
        table[(byte - 32) as usize] as f64
    }

    /// AFM ascender/descender in 1/1000 em.
    pub fn vmetrics(self) -> (f64, f64) {
        let (a, d) = match self {
            Face::Helvetica => metrics::HELVETICA_VMETRICS,
            Face::HelveticaBold => metrics::HELVETICA_BOLD_VMETRICS,
            Face::TimesRoman => metrics::TIMES_ROMAN_VMETRICS,
            Face::Courier => metrics::COURIER_VMETRICS,
        };
        (a as f64, d as f64)
    }

    /// Width of a string at `size` points, without spacing adjustments.
    pub fn text_width(self, text: &str, size: f64) -> f64 {
        text.bytes().map(|b| self.width(b)).sum::<f64>() * size / 1000.0
    }
}

/// One line of words. Coordinates are top-left origin, in points.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlan {
    pub words: Vec<String>,
    pub x: f64,
    /// Baseline distance from the top edge.
    pub baseline: f64,
    pub size: f64,
    pub face: Face,
    pub char_spacing: f64,
    pub word_spacing: f64,
    /// Horizontal scaling, 1.0 = 100%.
    pub h_scale: f64,
}

impl LinePlan {
    pub fn new(words: &[&str], x: f64, baseline: f64, size: f64, face: Face) -> Self {
        LinePlan {
            words: words.iter().map(|w| w.to_string()).collect(),
            x,
            baseline,
            size,
            face,
            char_spacing: 0.0,
            word_spacing: 0.0,
            h_scale: 1.0,
        }
    }

    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PagePlan {
    pub width: f64,
    pub height: f64,
    pub lines: Vec<LinePlan>,
}

impl PagePlan {
    pub fn letter(lines: Vec<LinePlan>) -> Self {
        PagePlan {
            width: 612.0,
            height: 792.0,
            lines,
        }
    }
}

/// How glyphs are encoded in font resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FontMode {
    /// Core-14 fonts without a widths array.
    Standard,
    /// Non-standard font name with `/Widths` and a descriptor carrying its own ascent/descent.
    ExplicitWidths,
    /// Lowercase letters re-encoded through `/Differences` into the upper code range.
    Differences,
    /// `Type0` font, `Identity-H`, two-byte glyph ids and a `ToUnicode` map.
    Composite,
}

/// How lines are drawn with text operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextStyle {
    /// One `Tj` per line, spaces inside the string, `Td` between lines.
    LineTj,
    /// One `TJ` per line, words as separate strings separated by negative adjustments.
    Kerned,
    /// `Tm` + `Tj` per word.
    WordMatrix,
    /// `TL` with `'` and `"` to advance lines.
    Leading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub font_mode: FontMode,
    pub style: TextStyle,
    pub compress: bool,
    pub xref_stream: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            font_mode: FontMode::Standard,
            style: TextStyle::LineTj,
            compress: true,
            xref_stream: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocPlan {
    pub pages: Vec<PagePlan>,
    pub options: RenderOptions,
}

/// Greedy line wrapping with the generator's own metrics.
pub fn wrap(text: &str, face: Face, size: f64, x: f64, top_baseline: f64, max_width: f64, leading: f64) -> Vec<LinePlan> {
    let mut lines = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let space = face.width(b' ') * size / 1000.0;
    let mut used = 0.0;
    for word in text.split_whitespace() {
        let w = face.text_width(word, size);
        let extra = if current.is_empty() { w } else { space + w };
        if !current.is_empty() && used + extra > max_width {
            lines.push(LinePlan::new(&current, x, top_baseline + leading * lines.len() as f64, size, face));
            current.clear();
            used = 0.0;
        }
        used += if current.is_empty() { w } else { space + w };
        current.push(word);
    }
    if !current.is_empty() {
        lines.push(LinePlan::new(&current, x, top_baseline + leading * lines.len() as f64, size, face));
    }
    lines
}
