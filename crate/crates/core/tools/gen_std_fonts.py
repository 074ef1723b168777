#!/usr/bin/env python3
"""Regenerates src/pdf/std_fonts.rs from reportlab's copy of the Adobe core-14 AFM data."""
import os
from reportlab.pdfbase import _fontdata as fd
from reportlab.pdfbase._glyphlist import _glyphname2unicode

ENCODINGS = [
    ("WIN_ANSI", "WinAnsiEncoding"),
    ("MAC_ROMAN", "MacRomanEncoding"),
    ("STANDARD", "StandardEncoding"),
    ("SYMBOL", "SymbolEncoding"),
    ("ZAPF_DINGBATS", "ZapfDingbatsEncoding"),
]
FONTS = [
    "Courier", "Courier-Bold", "Courier-Oblique", "Courier-BoldOblique",
    "Helvetica", "Helvetica-Bold", "Helvetica-Oblique", "Helvetica-BoldOblique",
    "Times-Roman", "Times-Bold", "Times-Italic", "Times-BoldItalic",
    "Symbol", "ZapfDingbats",
]


def ident(name):
    return name.upper().replace("-", "_")


def main():
    out = []
    out.append("// @generated by tools/gen_std_fonts.py from the Adobe core-14 AFM metrics.")
    out.append("// Do not edit by hand.")
    out.append("")
    names = set()
    for const, enc in ENCODINGS:
        table = fd.encodings[enc]
        out.append(f"pub(crate) static {const}: [&str; 256] = [")
        row = []
        for g in table:
            g = g or ""
            if g:
                names.add(g)
            row.append(f'"{g}"')
        for i in range(0, 256, 8):
            out.append("    " + ", ".join(row[i:i + 8]) + ",")
        out.append("];")
        out.append("")
    for f in FONTS:
        for g in fd.widthsByFontGlyph[f]:
            names.add(g)
    pairs = []
    for g in sorted(names):
        u = _glyphname2unicode.get(g)
        if u is None:
            continue
        pairs.append((g, u))
    out.append("/// Glyph name to Unicode scalar, sorted by name.")
    out.append("pub(crate) static GLYPH_UNICODE: &[(&str, u32)] = &[")
    for g, u in pairs:
        out.append(f'    ("{g}", 0x{u:04X}),')
    out.append("];")
    out.append("")
    for f in FONTS:
        ascent, descent = fd.ascent_descent[f]
        widths = sorted(fd.widthsByFontGlyph[f].items())
        out.append(f"static {ident(f)}_WIDTHS: &[(&str, u16)] = &[")
        for g, w in widths:
            out.append(f'    ("{g}", {w}),')
        out.append("];")
        out.append("")
    out.append("pub(crate) static STANDARD_FONTS: &[StandardFont] = &[")
    for f in FONTS:
        ascent, descent = fd.ascent_descent[f]
        out.append(
            f'    StandardFont {{ name: "{f}", ascent: {ascent}, descent: {descent}, widths: {ident(f)}_WIDTHS }},'
        )
    out.append("];")
    out.append("")
    out.append("#[derive(Debug)]")
    out.append("pub(crate) struct StandardFont {")
    out.append("    pub name: &'static str,")
    out.append("    pub ascent: i16,")
    out.append("    pub descent: i16,")
    out.append("    /// Advance widths in glyph space (1/1000 em), sorted by glyph name.")
    out.append("    pub widths: &'static [(&'static str, u16)],")
    out.append("}")
    path = os.path.join(os.path.dirname(__file__), "..", "src", "pdf", "std_fonts.rs")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
