//! Content-stream interpreter: tracks graphics and text state and emits one
//! positioned glyph per shown character code.

use std::collections::HashMap;
use std::sync::Arc;

use lopdf::content::Content;
use lopdf::{Dictionary, Document as PdfFile, Object, ObjectId};

use super::font::Font;
use super::frame::PageFrame;
use super::obj::{deref, dict_get, dict_of, name_of, num, nums};
use super::ExtractError;
use crate::geometry::BBox;

const MAX_FORM_DEPTH: usize = 12;

/// 2-D affine matrix `[a b c d e f]` in PDF row-vector convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix([f64; 6]);

impl Matrix {
    pub const IDENTITY: Matrix = Matrix([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);

    pub fn new(v: [f64; 6]) -> Self {
        Matrix(v)
    }

    fn translate(tx: f64, ty: f64) -> Self {
        Matrix([1.0, 0.0, 0.0, 1.0, tx, ty])
    }

    /// `self × other`: apply `self` first, then `other`.
    pub fn then(&self, other: &Matrix) -> Matrix {
        let [a, b, c, d, e, f] = self.0;
        let [a2, b2, c2, d2, e2, f2] = other.0;
        Matrix([
            a * a2 + b * c2,
            a * b2 + b * d2,
            c * a2 + d * c2,
            c * b2 + d * d2,
            e * a2 + f * c2 + e2,
            e * b2 + f * d2 + f2,
        ])
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.0;
        (a * x + c * y + e, b * x + d * y + f)
    }
}

/// A shown glyph in viewing coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedGlyph {
    pub text: String,
    pub bbox: BBox,
    /// Baseline origin in viewing coordinates.
    pub origin: (f64, f64),
    /// Effective font size after all transforms.
    pub size: f64,
}

#[derive(Debug, Clone)]
struct TextState {
    char_spacing: f64,
    word_spacing: f64,
    h_scale: f64,
    leading: f64,
    rise: f64,
    font: Option<Arc<Font>>,
    size: f64,
}

impl Default for TextState {
    fn default() -> Self {
        TextState {
            char_spacing: 0.0,
            word_spacing: 0.0,
            h_scale: 1.0,
            leading: 0.0,
            rise: 0.0,
            font: None,
            size: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
struct GraphicsState {
    ctm: Matrix,
    text: TextState,
}

pub struct Interpreter<'a> {
    file: &'a PdfFile,
    frame: PageFrame,
    fonts: HashMap<FontKey, Arc<Font>>,
    glyphs: Vec<PlacedGlyph>,
    form_stack: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum FontKey {
    Indirect(ObjectId),
    /// Direct font dictionaries are keyed by their resource dictionary and name.
    Direct(usize, String),
}

fn operand_num(ops: &[Object], i: usize) -> f64 {
    ops.get(i).and_then(num).unwrap_or(0.0)
}

fn string_bytes(obj: &Object) -> Option<&[u8]> {
    match obj {
        Object::String(s, _) => Some(s),
        _ => None,
    }
}

impl<'a> Interpreter<'a> {
    pub fn new(file: &'a PdfFile, frame: PageFrame) -> Self {
        Interpreter {
            file,
            frame,
            fonts: HashMap::new(),
            glyphs: Vec::new(),
            form_stack: Vec::new(),
        }
    }

    pub fn into_glyphs(self) -> Vec<PlacedGlyph> {
        self.glyphs
    }

    pub fn run(&mut self, content: &[u8], resources: Option<&'a Dictionary>) -> Result<(), ExtractError> {
        let state = GraphicsState {
            ctm: Matrix::IDENTITY,
            text: TextState::default(),
        };
        self.run_with(content, resources, state)
    }

    fn run_with(
        &mut self,
        content: &[u8],
        resources: Option<&'a Dictionary>,
        initial: GraphicsState,
    ) -> Result<(), ExtractError> {
        let ops = Content::decode(content)
            .map_err(|e| ExtractError::Malformed(format!("content stream: {e}")))?
            .operations;

        let mut gs = initial;
        let mut stack: Vec<GraphicsState> = Vec::new();
        let mut tm = Matrix::IDENTITY;
        let mut tlm = Matrix::IDENTITY;

        for op in &ops {
            let o = &op.operands;
            match op.operator.as_str() {
                "q" => stack.push(gs.clone()),
                "Q" => {
                    if let Some(s) = stack.pop() {
                        gs = s;
                    }
                }
                "cm" => {
                    if o.len() == 6 {
                        let m = Matrix::new(std::array::from_fn(|i| operand_num(o, i)));
                        gs.ctm = m.then(&gs.ctm);
                    }
                }
                "BT" => {
                    tm = Matrix::IDENTITY;
                    tlm = Matrix::IDENTITY;
                }
                "ET" => {}
                "Tc" => gs.text.char_spacing = operand_num(o, 0),
                "Tw" => gs.text.word_spacing = operand_num(o, 0),
                "Tz" => gs.text.h_scale = operand_num(o, 0) / 100.0,
                "TL" => gs.text.leading = operand_num(o, 0),
                "Ts" => gs.text.rise = operand_num(o, 0),
                "Tf" => {
                    gs.text.size = operand_num(o, 1);
                    let name = o.first().and_then(name_of).unwrap_or_default();
                    gs.text.font = match self.font(resources, &name) {
                        Ok(f) => Some(f),
                        Err(ExtractError::Malformed(msg)) => {
                            log::warn!("{msg}; skipping text until the next Tf");
                            None
                        }
                        Err(e) => return Err(e),
                    };
                }
                "Td" => {
                    tlm = Matrix::translate(operand_num(o, 0), operand_num(o, 1)).then(&tlm);
                    tm = tlm;
                }
                "TD" => {
                    gs.text.leading = -operand_num(o, 1);
                    tlm = Matrix::translate(operand_num(o, 0), operand_num(o, 1)).then(&tlm);
                    tm = tlm;
                }
                "Tm" => {
                    if o.len() == 6 {
                        tlm = Matrix::new(std::array::from_fn(|i| operand_num(o, i)));
                        tm = tlm;
                    }
                }
                "T*" => {
                    tlm = Matrix::translate(0.0, -gs.text.leading).then(&tlm);
                    tm = tlm;
                }
                "Tj" => {
                    if let Some(s) = o.first().and_then(string_bytes) {
                        self.show(&gs, &mut tm, s);
                    }
                }
                "'" => {
                    tlm = Matrix::translate(0.0, -gs.text.leading).then(&tlm);
                    tm = tlm;
                    if let Some(s) = o.first().and_then(string_bytes) {
                        self.show(&gs, &mut tm, s);
                    }
                }
                "\"" => {
                    gs.text.word_spacing = operand_num(o, 0);
                    gs.text.char_spacing = operand_num(o, 1);
                    tlm = Matrix::translate(0.0, -gs.text.leading).then(&tlm);
                    tm = tlm;
                    if let Some(s) = o.get(2).and_then(string_bytes) {
                        self.show(&gs, &mut tm, s);
                    }
                }
                "TJ" => {
                    if let Some(Object::Array(items)) = o.first() {
                        for item in items {
                            match item {
                                Object::String(s, _) => self.show(&gs, &mut tm, s),
                                other => {
                                    if let Some(adj) = num(other) {
                                        let tx = -adj / 1000.0 * gs.text.size * gs.text.h_scale;
                                        tm = Matrix::translate(tx, 0.0).then(&tm);
                                    }
                                }
                            }
                        }
                    }
                }
                "Do" => {
                    let name = o.first().and_then(name_of).unwrap_or_default();
                    self.form(resources, &name, &gs)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn resource(&self, resources: Option<&'a Dictionary>, category: &[u8], name: &str) -> Option<&'a Object> {
        let file: &'a PdfFile = self.file;
        let category = dict_get(file, resources?, category)?.as_dict().ok()?;
        category.get(name.as_bytes()).ok()
    }

    fn font(&mut self, resources: Option<&'a Dictionary>, name: &str) -> Result<Arc<Font>, ExtractError> {
        let Some(entry) = self.resource(resources, b"Font", name) else {
            return Err(ExtractError::Malformed(format!("font resource /{name} not found")));
        };
        let key = match entry {
            Object::Reference(id) => FontKey::Indirect(*id),
            _ => FontKey::Direct(resources.map_or(0, |r| r as *const Dictionary as usize), name.to_owned()),
        };
        if let Some(f) = self.fonts.get(&key) {
            return Ok(f.clone());
        }
        let dict = dict_of(self.file, entry)
            .ok_or_else(|| ExtractError::Malformed(format!("font resource /{name} is not a dictionary")))?;
        let font = Arc::new(Font::load(self.file, dict, name)?);
        self.fonts.insert(key, font.clone());
        Ok(font)
    }

    fn form(&mut self, resources: Option<&'a Dictionary>, name: &str, gs: &GraphicsState) -> Result<(), ExtractError> {
        let Some(entry) = self.resource(resources, b"XObject", name) else {
            return Ok(());
        };
        let id = entry.as_reference().ok();
        let Some(Object::Stream(stream)) = deref(self.file, entry) else {
            return Ok(());
        };
        if stream.dict.get(b"Subtype").ok().and_then(name_of).as_deref() != Some("Form") {
            return Ok(());
        }
        if self.form_stack.len() >= MAX_FORM_DEPTH || id.is_some_and(|id| self.form_stack.contains(&id)) {
            return Ok(());
        }
        let content = stream
            .get_plain_content()
            .map_err(|e| ExtractError::Malformed(format!("form /{name}: {e}")))?;
        let matrix = stream
            .dict
            .get(b"Matrix")
            .ok()
            .and_then(|m| nums(self.file, m))
            .filter(|v| v.len() == 6)
            .map(|v| Matrix::new([v[0], v[1], v[2], v[3], v[4], v[5]]))
            .unwrap_or(Matrix::IDENTITY);
        let form_resources = dict_get(self.file, &stream.dict, b"Resources")
            .and_then(|r| r.as_dict().ok())
            .or(resources);
        let state = GraphicsState {
            ctm: matrix.then(&gs.ctm),
            text: gs.text.clone(),
        };
        if let Some(id) = id {
            self.form_stack.push(id);
        }
        let result = self.run_with(&content, form_resources, state);
        if id.is_some() {
            self.form_stack.pop();
        }
        result
    }

    fn show(&mut self, gs: &GraphicsState, tm: &mut Matrix, bytes: &[u8]) {
        let Some(font) = gs.text.font.clone() else {
            return;
        };
        let ts = &gs.text;
        let (ascent, descent) = (font.ascent / 1000.0, font.descent / 1000.0);
        for glyph in font.decode(bytes) {
            let w0 = glyph.width / 1000.0;
            let trm = Matrix::new([ts.size * ts.h_scale, 0.0, 0.0, ts.size, 0.0, ts.rise])
                .then(tm)
                .then(&gs.ctm);
            let corners = [
                trm.apply(0.0, descent),
                trm.apply(w0, descent),
                trm.apply(0.0, ascent),
                trm.apply(w0, ascent),
            ]
            .map(|(x, y)| self.frame.to_view(x, y));
            let (ox, oy) = trm.apply(0.0, 0.0);
            let origin = self.frame.to_view(ox, oy);
            let (ux, uy) = trm.apply(0.0, 1.0);
            let size = (ux - ox).hypot(uy - oy);
            let bbox = BBox::new(
                corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min),
                corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min),
                corners.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max),
                corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max),
            );
            self.glyphs.push(PlacedGlyph {
                text: glyph.text,
                bbox,
                origin,
                size,
            });
            let spacing = ts.char_spacing + if glyph.is_space_code { ts.word_spacing } else { 0.0 };
            let tx = (w0 * ts.size + spacing) * ts.h_scale;
            *tm = Matrix::translate(tx, 0.0).then(tm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_composition_order() {
        let scale = Matrix::new([2.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let shift = Matrix::translate(10.0, 0.0);
        // Scale first, then shift.
        assert_eq!(scale.then(&shift).apply(1.0, 1.0), (12.0, 2.0));
        assert_eq!(shift.then(&scale).apply(1.0, 1.0), (22.0, 2.0));
    }
}
