//! Simple-font encodings: base code tables, `/Differences`, glyph names.

use super::std_fonts::{GLYPH_UNICODE, MAC_ROMAN, STANDARD, SYMBOL, WIN_ANSI, ZAPF_DINGBATS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseEncoding {
    WinAnsi,
    MacRoman,
    Standard,
    Symbol,
    ZapfDingbats,
}

impl BaseEncoding {
    pub fn from_name(name: &[u8]) -> Option<Self> {
        match name {
            b"WinAnsiEncoding" => Some(BaseEncoding::WinAnsi),
            b"MacRomanEncoding" => Some(BaseEncoding::MacRoman),
            b"StandardEncoding" => Some(BaseEncoding::Standard),
            _ => None,
        }
    }

    fn table(self) -> &'static [&'static str; 256] {
        match self {
            BaseEncoding::WinAnsi => &WIN_ANSI,
            BaseEncoding::MacRoman => &MAC_ROMAN,
            BaseEncoding::Standard => &STANDARD,
            BaseEncoding::Symbol => &SYMBOL,
            BaseEncoding::ZapfDingbats => &ZAPF_DINGBATS,
        }
    }
}

/// Code → glyph name table for one simple font.
#[derive(Debug, Clone)]
pub struct SimpleEncoding {
    names: Vec<Option<String>>,
}

impl SimpleEncoding {
    pub fn new(base: BaseEncoding) -> Self {
        let names = base
            .table()
            .iter()
            .map(|n| (!n.is_empty()).then(|| n.to_string()))
            .collect();
        SimpleEncoding { names }
    }

    pub fn set(&mut self, code: u8, glyph: &str) {
        self.names[code as usize] = Some(glyph.to_owned());
    }

    pub fn glyph_name(&self, code: u8) -> Option<&str> {
        self.names[code as usize].as_deref()
    }
}

/// Unicode text for a glyph name: the core glyph list, `uniXXXX` and `uXXXX[XX]`
/// forms, and `name.suffix` / `a_b` ligature composition.
pub fn glyph_to_unicode(name: &str) -> Option<String> {
    if let Ok(i) = GLYPH_UNICODE.binary_search_by(|(n, _)| (*n).cmp(name)) {
        return char::from_u32(GLYPH_UNICODE[i].1).map(String::from);
    }
    let base = name.split('.').next().unwrap_or(name);
    if base.is_empty() {
        return None;
    }
    if base != name {
        return glyph_to_unicode(base);
    }
    if base.contains('_') {
        let parts: Option<String> = base.split('_').map(glyph_to_unicode).collect();
        return parts;
    }
    if let Some(hex) = base.strip_prefix("uni") {
        if hex.len() >= 4 && hex.len() % 4 == 0 && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            let units: Vec<u16> = hex
                .as_bytes()
                .chunks(4)
                .filter_map(|c| u16::from_str_radix(std::str::from_utf8(c).ok()?, 16).ok())
                .collect();
            return String::from_utf16(&units).ok();
        }
    }
    if let Some(hex) = base.strip_prefix('u') {
        if (4..=6).contains(&hex.len()) && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .map(String::from);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_tables() {
        let win = SimpleEncoding::new(BaseEncoding::WinAnsi);
        assert_eq!(win.glyph_name(b'A'), Some("A"));
        assert_eq!(win.glyph_name(0x80), Some("Euro"));
        let std = SimpleEncoding::new(BaseEncoding::Standard);
        assert_eq!(std.glyph_name(0x27), Some("quoteright"));
        let mac = SimpleEncoding::new(BaseEncoding::MacRoman);
        assert_eq!(mac.glyph_name(0x8E), Some("eacute"));
    }

    #[test]
    fn glyph_names() {
        assert_eq!(glyph_to_unicode("A").as_deref(), Some("A"));
        assert_eq!(glyph_to_unicode("eacute").as_deref(), Some("é"));
        assert_eq!(glyph_to_unicode("uni0041").as_deref(), Some("A"));
        assert_eq!(glyph_to_unicode("u1F600").as_deref(), Some("😀"));
        assert_eq!(glyph_to_unicode("f_i").as_deref(), Some("fi"));
        assert_eq!(glyph_to_unicode("a.sc").as_deref(), Some("a"));
        assert_eq!(glyph_to_unicode("g123"), None);
    }

    #[test]
    fn differences_override() {
        let mut enc = SimpleEncoding::new(BaseEncoding::WinAnsi);
        enc.set(b'A', "Omega");
        assert_eq!(enc.glyph_name(b'A'), Some("Omega"));
    }
}
