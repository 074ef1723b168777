//! Font loading: code splitting, code → Unicode, advance widths and
//! vertical metrics for simple and composite fonts.

use std::collections::HashMap;

use lopdf::{Dictionary, Document as PdfFile, Object};

use super::cmap::ToUnicode;
use super::encoding::{glyph_to_unicode, BaseEncoding, SimpleEncoding};
use super::obj::{deref, dict_get, name_of, num, stream_bytes};
use super::std_fonts::{StandardFont, STANDARD_FONTS};
use super::ExtractError;

const DEFAULT_ASCENT: f64 = 800.0;
const DEFAULT_DESCENT: f64 = -200.0;

#[derive(Debug, Clone)]
enum Kind {
    Simple {
        encoding: SimpleEncoding,
        first_char: i64,
        widths: Vec<f64>,
        missing_width: f64,
        standard: Option<&'static StandardFont>,
    },
    Composite {
        widths: HashMap<u32, f64>,
        default_width: f64,
        /// Identity encodings map the 2-byte code straight to a CID.
        code_len: usize,
    },
}

/// One decoded character code.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedGlyph {
    pub text: String,
    /// Advance width in text space units (1/1000 em).
    pub width: f64,
    /// Single-byte code 32, which receives word spacing.
    pub is_space_code: bool,
}

#[derive(Debug, Clone)]
pub struct Font {
    kind: Kind,
    to_unicode: Option<ToUnicode>,
    /// Ascent/descent in 1/1000 em.
    pub ascent: f64,
    pub descent: f64,
}

fn strip_subset_prefix(name: &str) -> &str {
    match name.split_once('+') {
        Some((tag, rest)) if tag.len() == 6 && tag.bytes().all(|b| b.is_ascii_uppercase()) => rest,
        _ => name,
    }
}

/// Resolves a base font name, including common aliases, to a core-14 font.
fn standard_font(base: &str) -> Option<&'static StandardFont> {
    let base = strip_subset_prefix(base);
    let (family, style) = match base.split_once([',', '-']) {
        Some((f, s)) => (f, s),
        None => (base, ""),
    };
    let style = style.to_ascii_lowercase();
    let bold = style.contains("bold");
    let italic = style.contains("italic") || style.contains("oblique");
    let family = match family.to_ascii_lowercase().replace(' ', "").as_str() {
        "helvetica" | "arial" | "arialmt" => "Helvetica",
        "times" | "timesnewroman" | "timesnewromanps" | "timesnewromanpsmt" => "Times",
        "courier" | "couriernew" | "couriernewpsmt" => "Courier",
        "symbol" => return STANDARD_FONTS.iter().find(|f| f.name == "Symbol"),
        "zapfdingbats" => return STANDARD_FONTS.iter().find(|f| f.name == "ZapfDingbats"),
        _ => return None,
    };
    let name = match (family, bold, italic) {
        ("Times", false, false) => "Times-Roman".to_string(),
        ("Times", true, false) => "Times-Bold".to_string(),
        ("Times", false, true) => "Times-Italic".to_string(),
        ("Times", true, true) => "Times-BoldItalic".to_string(),
        (f, false, false) => f.to_string(),
        (f, true, false) => format!("{f}-Bold"),
        (f, false, true) => format!("{f}-Oblique"),
        (f, true, true) => format!("{f}-BoldOblique"),
    };
    STANDARD_FONTS.iter().find(|f| f.name == name)
}

fn standard_width(font: &StandardFont, glyph: &str) -> Option<f64> {
    font.widths
        .binary_search_by(|(n, _)| (*n).cmp(glyph))
        .ok()
        .map(|i| font.widths[i].1 as f64)
}

fn descriptor_metrics(file: &PdfFile, descriptor: Option<&Dictionary>) -> (Option<f64>, Option<f64>, f64) {
    let Some(d) = descriptor else {
        return (None, None, 0.0);
    };
    let get = |k: &[u8]| dict_get(file, d, k).and_then(num);
    let ascent = get(b"Ascent").filter(|v| *v != 0.0);
    let descent = get(b"Descent").filter(|v| *v != 0.0);
    (ascent, descent, get(b"MissingWidth").unwrap_or(0.0))
}

impl Font {
    pub fn load(file: &PdfFile, dict: &Dictionary, resource_name: &str) -> Result<Font, ExtractError> {
        let subtype = dict_get(file, dict, b"Subtype").and_then(name_of).unwrap_or_default();
        let base_font = dict_get(file, dict, b"BaseFont")
            .and_then(name_of)
            .unwrap_or_default();
        let to_unicode = dict_get(file, dict, b"ToUnicode")
            .and_then(|o| stream_bytes(file, o))
            .map(|b| ToUnicode::parse(&b));

        match subtype.as_str() {
            "Type3" => Err(ExtractError::UnsupportedFeature(format!(
                "Type3 font /{resource_name}"
            ))),
            "Type0" => Self::load_composite(file, dict, to_unicode),
            _ => Ok(Self::load_simple(file, dict, &subtype, &base_font, to_unicode)),
        }
    }

    fn load_simple(
        file: &PdfFile,
        dict: &Dictionary,
        subtype: &str,
        base_font: &str,
        to_unicode: Option<ToUnicode>,
    ) -> Font {
        let standard = standard_font(base_font);
        let builtin = match standard.map(|f| f.name) {
            Some("Symbol") => BaseEncoding::Symbol,
            Some("ZapfDingbats") => BaseEncoding::ZapfDingbats,
            _ if subtype == "TrueType" => BaseEncoding::WinAnsi,
            _ => BaseEncoding::Standard,
        };
        let encoding = match dict_get(file, dict, b"Encoding") {
            Some(Object::Name(n)) => SimpleEncoding::new(BaseEncoding::from_name(n).unwrap_or(builtin)),
            Some(Object::Dictionary(enc)) => {
                let base = dict_get(file, enc, b"BaseEncoding")
                    .and_then(|o| o.as_name().ok())
                    .and_then(BaseEncoding::from_name)
                    .unwrap_or(builtin);
                let mut e = SimpleEncoding::new(base);
                if let Some(Object::Array(diffs)) = dict_get(file, enc, b"Differences") {
                    let mut code: i64 = 0;
                    for item in diffs {
                        match deref(file, item) {
                            Some(Object::Integer(n)) => code = *n,
                            Some(Object::Name(g)) => {
                                if (0..256).contains(&code) {
                                    e.set(code as u8, &String::from_utf8_lossy(g));
                                }
                                code += 1;
                            }
                            _ => {}
                        }
                    }
                }
                e
            }
            _ => SimpleEncoding::new(builtin),
        };

        let first_char = dict_get(file, dict, b"FirstChar").and_then(num).unwrap_or(0.0) as i64;
        let widths: Vec<f64> = match dict_get(file, dict, b"Widths") {
            Some(Object::Array(a)) => a.iter().map(|o| deref(file, o).and_then(num).unwrap_or(0.0)).collect(),
            _ => Vec::new(),
        };
        let descriptor = dict_get(file, dict, b"FontDescriptor").and_then(|o| o.as_dict().ok());
        let (ascent, descent, missing_width) = descriptor_metrics(file, descriptor);
        let (std_ascent, std_descent) = standard
            .filter(|f| f.ascent != 0 || f.descent != 0)
            .map(|f| (f.ascent as f64, f.descent as f64))
            .unwrap_or((DEFAULT_ASCENT, DEFAULT_DESCENT));

        Font {
            kind: Kind::Simple {
                encoding,
                first_char,
                widths,
                missing_width,
                standard,
            },
            to_unicode,
            ascent: ascent.unwrap_or(std_ascent),
            descent: descent.unwrap_or(std_descent),
        }
    }

    fn load_composite(file: &PdfFile, dict: &Dictionary, to_unicode: Option<ToUnicode>) -> Result<Font, ExtractError> {
        let descendant = match dict_get(file, dict, b"DescendantFonts") {
            Some(Object::Array(a)) => a.first().and_then(|o| deref(file, o)).and_then(|o| o.as_dict().ok()),
            _ => None,
        };
        let Some(cid_font) = descendant else {
            return Err(ExtractError::UnsupportedFeature("Type0 font without descendant".into()));
        };
        let default_width = dict_get(file, cid_font, b"DW").and_then(num).unwrap_or(1000.0);
        let mut widths = HashMap::new();
        if let Some(Object::Array(w)) = dict_get(file, cid_font, b"W") {
            let items: Vec<&Object> = w.iter().filter_map(|o| deref(file, o)).collect();
            let mut i = 0;
            while i < items.len() {
                let Some(first) = num(items[i]) else { break };
                match items.get(i + 1) {
                    Some(Object::Array(list)) => {
                        for (k, o) in list.iter().enumerate() {
                            if let Some(v) = deref(file, o).and_then(num) {
                                widths.insert(first as u32 + k as u32, v);
                            }
                        }
                        i += 2;
                    }
                    Some(o) => {
                        let (Some(last), Some(v)) = (num(o), items.get(i + 2).and_then(|x| num(x))) else {
                            break;
                        };
                        for cid in first as u32..=last as u32 {
                            widths.insert(cid, v);
                        }
                        i += 3;
                    }
                    None => break,
                }
            }
        }
        let descriptor = dict_get(file, cid_font, b"FontDescriptor").and_then(|o| o.as_dict().ok());
        let (ascent, descent, _) = descriptor_metrics(file, descriptor);
        Ok(Font {
            kind: Kind::Composite {
                widths,
                default_width,
                code_len: 2,
            },
            to_unicode,
            ascent: ascent.unwrap_or(DEFAULT_ASCENT),
            descent: descent.unwrap_or(DEFAULT_DESCENT),
        })
    }

    /// Splits a shown string into glyphs.
    pub fn decode(&self, bytes: &[u8]) -> Vec<DecodedGlyph> {
        match &self.kind {
            Kind::Simple {
                encoding,
                first_char,
                widths,
                missing_width,
                standard,
            } => bytes
                .iter()
                .map(|&b| {
                    let glyph = encoding.glyph_name(b);
                    let text = self
                        .to_unicode
                        .as_ref()
                        .and_then(|t| t.lookup(b as u32, 1))
                        .map(str::to_owned)
                        .or_else(|| glyph.and_then(glyph_to_unicode))
                        .unwrap_or_else(|| '\u{FFFD}'.to_string());
                    let idx = b as i64 - first_char;
                    let width = if !widths.is_empty() {
                        usize::try_from(idx)
                            .ok()
                            .and_then(|i| widths.get(i).copied())
                            .unwrap_or(*missing_width)
                    } else {
                        standard
                            .and_then(|f| glyph.and_then(|g| standard_width(f, g)))
                            .unwrap_or(if *missing_width > 0.0 { *missing_width } else { 500.0 })
                    };
                    DecodedGlyph {
                        text,
                        width,
                        is_space_code: b == 32,
                    }
                })
                .collect(),
            Kind::Composite {
                widths,
                default_width,
                code_len,
            } => {
                let codes = match &self.to_unicode {
                    Some(t) if t.has_code_space() => t.split_codes(bytes, *code_len),
                    _ => ToUnicode::default().split_codes(bytes, *code_len),
                };
                codes
                    .into_iter()
                    .map(|(code, len)| DecodedGlyph {
                        text: self
                            .to_unicode
                            .as_ref()
                            .and_then(|t| t.lookup(code, len))
                            .map(str::to_owned)
                            .unwrap_or_else(|| '\u{FFFD}'.to_string()),
                        width: widths.get(&code).copied().unwrap_or(*default_width),
                        is_space_code: len == 1 && code == 32,
                    })
                    .collect()
            }
        }
    }
}
