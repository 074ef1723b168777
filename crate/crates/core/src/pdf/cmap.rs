//! `ToUnicode` CMap parsing: code space ranges, `bfchar` and `bfrange`.

use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Hex(Vec<u8>),
    Name,
    Keyword(String),
    Int(i64),
    ArrayStart,
    ArrayEnd,
    Other,
}

fn tokenize(data: &[u8]) -> Vec<Token> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < data.len() {
        let c = data[i];
        match c {
            b'%' => {
                while i < data.len() && data[i] != b'\n' && data[i] != b'\r' {
                    i += 1;
                }
            }
            b'<' if data.get(i + 1) == Some(&b'<') => {
                out.push(Token::Other);
                i += 2;
            }
            b'>' if data.get(i + 1) == Some(&b'>') => {
                out.push(Token::Other);
                i += 2;
            }
            b'<' => {
                i += 1;
                let mut digits = Vec::new();
                while i < data.len() && data[i] != b'>' {
                    if data[i].is_ascii_hexdigit() {
                        digits.push(data[i]);
                    }
                    i += 1;
                }
                i += 1;
                if digits.len() % 2 == 1 {
                    digits.push(b'0');
                }
                let bytes = digits
                    .chunks(2)
                    .map(|p| {
                        let s = std::str::from_utf8(p).unwrap_or("00");
                        u8::from_str_radix(s, 16).unwrap_or(0)
                    })
                    .collect();
                out.push(Token::Hex(bytes));
            }
            b'[' => {
                out.push(Token::ArrayStart);
                i += 1;
            }
            b']' => {
                out.push(Token::ArrayEnd);
                i += 1;
            }
            b'(' => {
                // Literal strings only occur in header entries we ignore.
                let mut depth = 0;
                while i < data.len() {
                    match data[i] {
                        b'\\' => i += 1,
                        b'(' => depth += 1,
                        b')' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                i += 1;
                out.push(Token::Other);
            }
            b'/' => {
                i += 1;
                while i < data.len() && !is_delim(data[i]) {
                    i += 1;
                }
                out.push(Token::Name);
            }
            _ if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < data.len() && !is_delim(data[i]) {
                    i += 1;
                }
                if start == i {
                    i += 1;
                    out.push(Token::Other);
                    continue;
                }
                let word = String::from_utf8_lossy(&data[start..i]).into_owned();
                match word.parse::<i64>() {
                    Ok(n) => out.push(Token::Int(n)),
                    Err(_) => out.push(Token::Keyword(word)),
                }
            }
        }
    }
    out
}

fn is_delim(b: u8) -> bool {
    b.is_ascii_whitespace() || b"()<>[]{}/%".contains(&b)
}

fn code_of(bytes: &[u8]) -> u32 {
    bytes.iter().fold(0u32, |acc, b| (acc << 8) | *b as u32)
}

fn utf16_text(bytes: &[u8]) -> String {
    let units: Vec<u16> = bytes
        .chunks(2)
        .map(|c| if c.len() == 2 { u16::from_be_bytes([c[0], c[1]]) } else { c[0] as u16 })
        .collect();
    String::from_utf16_lossy(&units)
}

/// Parsed `ToUnicode` map.
#[derive(Debug, Clone, Default)]
pub struct ToUnicode {
    /// `(low, high, byte length)` code space ranges.
    ranges: Vec<(u32, u32, usize)>,
    map: HashMap<(usize, u32), String>,
}

impl ToUnicode {
    pub fn parse(data: &[u8]) -> Self {
        let tokens = tokenize(data);
        let mut cmap = ToUnicode::default();
        let mut i = 0;
        while i < tokens.len() {
            match &tokens[i] {
                Token::Keyword(k) if k == "begincodespacerange" => {
                    i += 1;
                    while let (Some(Token::Hex(lo)), Some(Token::Hex(hi))) = (tokens.get(i), tokens.get(i + 1)) {
                        cmap.ranges.push((code_of(lo), code_of(hi), lo.len().max(1)));
                        i += 2;
                    }
                }
                Token::Keyword(k) if k == "beginbfchar" => {
                    i += 1;
                    while let (Some(Token::Hex(src)), Some(dst)) = (tokens.get(i), tokens.get(i + 1)) {
                        let text = match dst {
                            Token::Hex(d) => utf16_text(d),
                            _ => String::new(),
                        };
                        if !text.is_empty() {
                            cmap.map.insert((src.len(), code_of(src)), text);
                        }
                        i += 2;
                    }
                }
                Token::Keyword(k) if k == "beginbfrange" => {
                    i += 1;
                    while let (Some(Token::Hex(lo)), Some(Token::Hex(hi))) = (tokens.get(i), tokens.get(i + 1)) {
                        let len = lo.len();
                        let (lo, hi) = (code_of(lo), code_of(hi));
                        i += 2;
                        match tokens.get(i) {
                            Some(Token::Hex(dst)) => {
                                // Increment the last UTF-16 unit across the range.
                                let mut units: Vec<u16> = dst
                                    .chunks(2)
                                    .map(|c| if c.len() == 2 { u16::from_be_bytes([c[0], c[1]]) } else { c[0] as u16 })
                                    .collect();
                                if units.is_empty() {
                                    units.push(0);
                                }
                                let last = units.len() - 1;
                                let first = units[last];
                                for (n, code) in (lo..=hi.min(lo.saturating_add(0xFFFF))).enumerate() {
                                    units[last] = first.wrapping_add(n as u16);
                                    cmap.map.insert((len, code), String::from_utf16_lossy(&units));
                                }
                                i += 1;
                            }
                            Some(Token::ArrayStart) => {
                                i += 1;
                                let mut code = lo;
                                while let Some(Token::Hex(dst)) = tokens.get(i) {
                                    if code <= hi {
                                        cmap.map.insert((len, code), utf16_text(dst));
                                    }
                                    code = code.saturating_add(1);
                                    i += 1;
                                }
                                if tokens.get(i) == Some(&Token::ArrayEnd) {
                                    i += 1;
                                }
                            }
                            _ => {}
                        }
                    }
                }
                _ => i += 1,
            }
        }
        cmap
    }

    pub fn has_code_space(&self) -> bool {
        !self.ranges.is_empty()
    }

    /// Splits a string into codes using the code space ranges.
    ///
    /// Falls back to `default_len`-byte codes for bytes no range claims.
    pub fn split_codes(&self, bytes: &[u8], default_len: usize) -> Vec<(u32, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let matched = (1..=4).find(|&len| {
                i + len <= bytes.len() && {
                    let code = code_of(&bytes[i..i + len]);
                    self.ranges
                        .iter()
                        .any(|&(lo, hi, l)| l == len && lo <= code && code <= hi)
                }
            });
            let len = matched.unwrap_or(default_len).min(bytes.len() - i).max(1);
            out.push((code_of(&bytes[i..i + len]), len));
            i += len;
        }
        out
    }

    pub fn lookup(&self, code: u32, len: usize) -> Option<&str> {
        self.map.get(&(len, code)).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &[u8] = br"/CIDInit /ProcSet findresource begin
12 dict begin
begincmap
/CIDSystemInfo << /Registry (Adobe) /Ordering (UCS) /Supplement 0 >> def
/CMapName /Adobe-Identity-UCS def
1 begincodespacerange
<0000> <FFFF>
endcodespacerange
2 beginbfchar
<0003> <0020>
<0011> <00660069>
endbfchar
2 beginbfrange
<0024> <0026> <0041>
<0030> <0031> [<0078> <0079>]
endbfrange
endcmap";

    #[test]
    fn parses_chars_and_ranges() {
        let cmap = ToUnicode::parse(SAMPLE);
        assert_eq!(cmap.lookup(0x0003, 2), Some(" "));
        assert_eq!(cmap.lookup(0x0011, 2), Some("fi"));
        assert_eq!(cmap.lookup(0x0024, 2), Some("A"));
        assert_eq!(cmap.lookup(0x0026, 2), Some("C"));
        assert_eq!(cmap.lookup(0x0031, 2), Some("y"));
        assert_eq!(cmap.lookup(0x0027, 2), None);
    }

    #[test]
    fn splits_by_code_space() {
        let cmap = ToUnicode::parse(SAMPLE);
        assert_eq!(cmap.split_codes(&[0x00, 0x24, 0x00, 0x25], 1), vec![(0x24, 2), (0x25, 2)]);
        let empty = ToUnicode::default();
        assert_eq!(empty.split_codes(b"ab", 1), vec![(0x61, 1), (0x62, 1)]);
    }

    #[test]
    fn surrogate_pairs_decode() {
        let cmap = ToUnicode::parse(b"1 beginbfchar <01> <D83DDE00> endbfchar");
        assert_eq!(cmap.lookup(1, 1), Some("😀"));
    }
}
