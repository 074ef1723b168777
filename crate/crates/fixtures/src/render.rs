//! Renders plans to PDF bytes with `pdf-writer` and predicts the word boxes
//! a correct extractor must report.

use std::io::Write as _;

use flate2::write::ZlibEncoder;
use flate2::Compression;
use pdf_writer::types::{CidFontType, FontFlags, SystemInfo, UnicodeCmap};
use pdf_writer::{Content, Filter, Finish, Name, Pdf, Rect, Ref, Str};

use crate::plan::{DocPlan, Face, FontMode, LinePlan, PagePlan, RenderOptions, TextStyle};

/// Ascent/descent written into descriptors of non-standard fonts.
pub const CUSTOM_VMETRICS: (f64, f64) = (750.0, -250.0);
/// TJ adjustment used between words in [`TextStyle::Kerned`].
pub const KERN_GAP: f64 = -500.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedWord {
    pub text: String,
    /// `[x0, y0, x1, y1]`, top-left origin.
    pub bbox: [f64; 4],
}

fn resource_name(face: Face) -> String {
    format!("F{}", Face::ALL.iter().position(|f| *f == face).unwrap() + 1)
}

fn composite_gid(c: u8) -> u16 {
    c as u16 * 3 + 7
}

fn encode(text: &str, mode: FontMode) -> Vec<u8> {
    match mode {
        FontMode::Standard | FontMode::ExplicitWidths => text.as_bytes().to_vec(),
        FontMode::Differences => text
            .bytes()
            .map(|b| if b.is_ascii_lowercase() { 128 + (b - b'a') } else { b })
            .collect(),
        FontMode::Composite => text.bytes().flat_map(|b| composite_gid(b).to_be_bytes()).collect(),
    }
}

fn vmetrics(face: Face, mode: FontMode) -> (f64, f64) {
    match mode {
        FontMode::Standard | FontMode::Differences => face.vmetrics(),
        FontMode::ExplicitWidths | FontMode::Composite => CUSTOM_VMETRICS,
    }
}

/// Horizontal placement of each word on a line: `(pen start, glyph-box end)`.
///
/// Styles that draw words without a space glyph separate them with a
/// [`KERN_GAP`] adjustment instead, since a space advance can be narrower
/// than the extractor's word-gap threshold.
pub fn layout(line: &LinePlan, mode: FontMode, style: TextStyle) -> Vec<(f64, f64)> {
    // word spacing only applies to the single-byte space code
    let tw = if mode == FontMode::Composite { 0.0 } else { line.word_spacing };
    let spaced = matches!(style, TextStyle::LineTj | TextStyle::Leading);
    let mut x = line.x;
    let mut out = Vec::new();
    for (i, word) in line.words.iter().enumerate() {
        if i > 0 {
            x += if spaced {
                (line.face.width(b' ') * line.size / 1000.0 + line.char_spacing + tw) * line.h_scale
            } else {
                -KERN_GAP / 1000.0 * line.size * line.h_scale
            };
        }
        let start = x;
        let mut last_start = x;
        for b in word.bytes() {
            last_start = x;
            x += (line.face.width(b) * line.size / 1000.0 + line.char_spacing) * line.h_scale;
        }
        let last = *word.as_bytes().last().expect("plans have no empty words");
        out.push((start, last_start + line.face.width(last) * line.size / 1000.0 * line.h_scale));
    }
    out
}

/// Predicted words of one page in reading order.
pub fn expected_words(page: &PagePlan, opts: RenderOptions) -> Vec<ExpectedWord> {
    let mut lines: Vec<&LinePlan> = page.lines.iter().collect();
    lines.sort_by(|a, b| a.baseline.total_cmp(&b.baseline).then(a.x.total_cmp(&b.x)));
    let mut out = Vec::new();
    for line in lines {
        let (asc, desc) = vmetrics(line.face, opts.font_mode);
        let top = line.baseline - asc * line.size / 1000.0;
        let bottom = line.baseline - desc * line.size / 1000.0;
        for (word, (x0, x1)) in line.words.iter().zip(layout(line, opts.font_mode, opts.style)) {
            out.push(ExpectedWord {
                text: word.clone(),
                bbox: clip([x0, top, x1, bottom], page.width, page.height),
            });
        }
    }
    out.retain(|w| w.bbox[0] < w.bbox[2] && w.bbox[1] < w.bbox[3]);
    out
}

fn clip(b: [f64; 4], w: f64, h: f64) -> [f64; 4] {
    [b[0].max(0.0), b[1].max(0.0), b[2].min(w), b[3].min(h)]
}

fn page_content(page: &PagePlan, opts: RenderOptions) -> Vec<u8> {
    let mut c = Content::new();
    let h = page.height as f32;
    c.begin_text();
    let mut cur_face: Option<(Face, f64)> = None;
    let mut line_origin = (0.0f32, 0.0f32);
    let mut prev: Option<&LinePlan> = None;
    let mut leading: Option<f64> = None;
    for (li, line) in page.lines.iter().enumerate() {
        if cur_face != Some((line.face, line.size)) {
            c.set_font(Name(resource_name(line.face).as_bytes()), line.size as f32);
            cur_face = Some((line.face, line.size));
        }
        c.set_horizontal_scaling((line.h_scale * 100.0) as f32);
        let y = h - line.baseline as f32;
        let x = line.x as f32;
        match opts.style {
            TextStyle::LineTj => {
                c.set_char_spacing(line.char_spacing as f32);
                c.set_word_spacing(line.word_spacing as f32);
                c.next_line(x - line_origin.0, y - line_origin.1);
                line_origin = (x, y);
                c.show(Str(&encode(&line.text(), opts.font_mode)));
            }
            TextStyle::Kerned => {
                c.set_char_spacing(line.char_spacing as f32);
                c.set_word_spacing(0.0);
                c.next_line(x - line_origin.0, y - line_origin.1);
                line_origin = (x, y);
                let mut shown = c.show_positioned();
                let mut items = shown.items();
                for (i, word) in line.words.iter().enumerate() {
                    if i > 0 {
                        items.adjust(KERN_GAP as f32);
                    }
                    items.show(Str(&encode(word, opts.font_mode)));
                }
                items.finish();
            }
            TextStyle::WordMatrix => {
                c.set_char_spacing(line.char_spacing as f32);
                c.set_word_spacing(line.word_spacing as f32);
                for (word, (start, _)) in line.words.iter().zip(layout(line, opts.font_mode, opts.style)) {
                    c.set_text_matrix([1.0, 0.0, 0.0, 1.0, start as f32, y]);
                    c.show(Str(&encode(word, opts.font_mode)));
                }
            }
            TextStyle::Leading => {
                let step = prev.map(|p| line.baseline - p.baseline);
                let reuse = prev.is_some_and(|p| p.x == line.x) && step.is_some() && step == leading;
                if reuse && li % 2 == 1 {
                    c.next_line_show_and_set_word_and_char_spacing(
                        line.word_spacing as f32,
                        line.char_spacing as f32,
                        Str(&encode(&line.text(), opts.font_mode)),
                    );
                } else {
                    c.set_char_spacing(line.char_spacing as f32);
                    c.set_word_spacing(line.word_spacing as f32);
                    if reuse {
                        c.next_line_show(Str(&encode(&line.text(), opts.font_mode)));
                    } else {
                        if let (Some(p), Some(s)) = (prev, step) {
                            if p.x == line.x && s > 0.0 {
                                c.set_leading(s as f32);
                                leading = Some(s);
                            }
                        }
                        c.next_line(x - line_origin.0, y - line_origin.1);
                        c.show(Str(&encode(&line.text(), opts.font_mode)));
                    }
                }
                line_origin = (x, y);
            }
        }
        prev = Some(line);
    }
    c.end_text();
    c.finish().to_vec()
}

fn deflate(data: &[u8]) -> Vec<u8> {
    let mut e = ZlibEncoder::new(Vec::new(), Compression::default());
    e.write_all(data).expect("in-memory write");
    e.finish().expect("in-memory write")
}

struct Alloc(i32);

impl Alloc {
    fn next(&mut self) -> Ref {
        self.0 += 1;
        Ref::new(self.0)
    }
}

fn write_fonts(pdf: &mut Pdf, alloc: &mut Alloc, mode: FontMode) -> Vec<(Face, Ref)> {
    let mut out = Vec::new();
    for face in Face::ALL {
        let id = alloc.next();
        match mode {
            FontMode::Standard => {
                pdf.type1_font(id)
                    .base_font(Name(face.base_font().as_bytes()))
                    .encoding_predefined(Name(b"WinAnsiEncoding"));
            }
            FontMode::Differences => {
                let names: Vec<[u8; 1]> = (b'a'..=b'z').map(|c| [c]).collect();
                let mut f = pdf.type1_font(id);
                f.base_font(Name(face.base_font().as_bytes()));
                let mut enc = f.encoding_custom();
                enc.base_encoding(Name(b"WinAnsiEncoding"));
                enc.differences().consecutive(128, names.iter().map(|n| Name(n.as_slice())));
            }
            FontMode::ExplicitWidths => {
                let desc = alloc.next();
                let name = format!("PlanFace{}", resource_name(face));
                pdf.type1_font(id)
                    .base_font(Name(name.as_bytes()))
                    .first_char(32)
                    .last_char(126)
                    .widths((32u8..127).map(|b| face.width(b) as f32))
                    .font_descriptor(desc)
                    .encoding_predefined(Name(b"WinAnsiEncoding"));
                descriptor(pdf, desc, &name);
            }
            FontMode::Composite => {
                let cid = alloc.next();
                let desc = alloc.next();
                let cmap = alloc.next();
                let name = format!("PlanCid{}", resource_name(face));
                let info = SystemInfo {
                    registry: Str(b"Adobe"),
                    ordering: Str(b"Identity"),
                    supplement: 0,
                };
                pdf.type0_font(id)
                    .base_font(Name(name.as_bytes()))
                    .encoding_predefined(Name(b"Identity-H"))
                    .descendant_font(cid)
                    .to_unicode(cmap);
                let mut f = pdf.cid_font(cid);
                f.subtype(CidFontType::Type2)
                    .base_font(Name(name.as_bytes()))
                    .system_info(info)
                    .font_descriptor(desc)
                    .default_width(0.0);
                let mut w = f.widths();
                for b in 32u8..127 {
                    w.consecutive(composite_gid(b), [face.width(b) as f32]);
                }
                w.finish();
                f.finish();
                descriptor(pdf, desc, &name);
                let mut map = UnicodeCmap::<u16>::new(Name(b"Plan-UCS"), info);
                for b in 32u8..127 {
                    map.pair(composite_gid(b), b as char);
                }
                let data = map.finish();
                pdf.stream(cmap, data.as_slice());
            }
        }
        out.push((face, id));
    }
    out
}

fn descriptor(pdf: &mut Pdf, id: Ref, name: &str) {
    pdf.font_descriptor(id)
        .name(Name(name.as_bytes()))
        .flags(FontFlags::NON_SYMBOLIC)
        .bbox(Rect::new(-200.0, -250.0, 1200.0, 950.0))
        .italic_angle(0.0)
        .ascent(CUSTOM_VMETRICS.0 as f32)
        .descent(CUSTOM_VMETRICS.1 as f32)
        .cap_height(700.0)
        .stem_v(80.0);
}

/// Page-space matrix that lets content be written in the viewed
/// (post-rotation) frame.
fn rotation_matrix(rotation: u16, view_w: f64, view_h: f64) -> Option<[f32; 6]> {
    match rotation {
        0 => None,
        90 => Some([0.0, 1.0, -1.0, 0.0, view_h as f32, 0.0]),
        180 => Some([-1.0, 0.0, 0.0, -1.0, view_w as f32, view_h as f32]),
        270 => Some([0.0, -1.0, 1.0, 0.0, 0.0, view_w as f32]),
        r => panic!("unsupported rotation {r}"),
    }
}

/// Renders a plan to PDF bytes.
pub fn render(plan: &DocPlan) -> Vec<u8> {
    render_rotated(plan, &vec![0; plan.pages.len()])
}

/// Like [`render`], with a `/Rotate` value per page. Plans are always in
/// the viewed frame.
pub fn render_rotated(plan: &DocPlan, rotations: &[u16]) -> Vec<u8> {
    let opts = plan.options;
    let mut pdf = Pdf::new();
    let mut alloc = Alloc(0);
    let catalog = alloc.next();
    let tree = alloc.next();
    let fonts = write_fonts(&mut pdf, &mut alloc, opts.font_mode);

    let mut page_ids = Vec::new();
    for (page, &rot) in plan.pages.iter().zip(rotations) {
        let page_id = alloc.next();
        let content_id = alloc.next();
        page_ids.push(page_id);
        let (mw, mh) = if rot % 180 == 90 { (page.height, page.width) } else { (page.width, page.height) };

        let mut body = Vec::new();
        if let Some(m) = rotation_matrix(rot, page.width, page.height) {
            let mut c = Content::new();
            c.transform(m);
            body.extend_from_slice(&c.finish());
            body.push(b'\n');
        }
        body.extend(page_content(page, opts));
        let data = if opts.compress { deflate(&body) } else { body };
        let mut s = pdf.stream(content_id, &data);
        if opts.compress {
            s.filter(Filter::FlateDecode);
        }
        s.finish();

        let mut p = pdf.page(page_id);
        p.parent(tree)
            .media_box(Rect::new(0.0, 0.0, mw as f32, mh as f32))
            .contents(content_id);
        if rot != 0 {
            p.rotate(rot as i32);
        }
        let mut res = p.resources();
        let mut fd = res.fonts();
        for (face, id) in &fonts {
            fd.pair(Name(resource_name(*face).as_bytes()), *id);
        }
        fd.finish();
        res.finish();
        p.finish();
    }
    pdf.pages(tree).kids(page_ids.iter().copied()).count(page_ids.len() as i32);
    pdf.catalog(catalog).pages(tree);
    if opts.xref_stream {
        let xref = alloc.next();
        pdf.finish_with_xref_stream(xref)
    } else {
        pdf.finish()
    }
}

/// Predicted words for every page.
pub fn expected_document(plan: &DocPlan) -> Vec<Vec<ExpectedWord>> {
    plan.pages.iter().map(|p| expected_words(p, plan.options)).collect()
}
