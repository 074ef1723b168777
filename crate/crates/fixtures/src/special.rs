//! One-off documents: the small named examples and inputs the extractor
//! must reject.

use pdf_writer::{Content, Finish, Name, Pdf, Rect, Ref, Str};

use crate::plan::{DocPlan, Face, LinePlan, PagePlan, RenderOptions};

/// A single sentence about a software company, laid out on a single line.
pub const SOFTWARE_SENTENCE: &str =
    "Microsoft Corporation is a worldwide leader in software, services and hardware that deliver new";

fn single(lines: Vec<LinePlan>) -> DocPlan {
    DocPlan {
        pages: vec![PagePlan::letter(lines)],
        options: RenderOptions::default(),
    }
}

/// "Hello World" at (72, 720) bottom-left, Helvetica 12, on a Letter page.
pub fn hello_world() -> DocPlan {
    single(vec![LinePlan::new(&["Hello", "World"], 72.0, 72.0, 12.0, Face::Helvetica)])
}

pub fn software_sentence() -> DocPlan {
    let words: Vec<&str> = SOFTWARE_SENTENCE.split(' ').collect();
    single(vec![LinePlan::new(&words, 36.0, 100.0, 10.0, Face::Helvetica)])
}

/// Two literal occurrences of "cost 5" on one line.
pub fn cost_twice() -> DocPlan {
    single(vec![LinePlan::new(&["cost", "5", "and", "cost", "5"], 72.0, 100.0, 12.0, Face::Helvetica)])
}

/// One page with no content at all.
pub fn empty_page() -> Vec<u8> {
    let mut pdf = Pdf::new();
    let (catalog, tree, page) = (Ref::new(1), Ref::new(2), Ref::new(3));
    pdf.catalog(catalog).pages(tree);
    pdf.pages(tree).kids([page]).count(1);
    pdf.page(page).parent(tree).media_box(Rect::new(0.0, 0.0, 612.0, 792.0));
    pdf.finish()
}

/// A document whose trailer declares standard security.
pub fn encrypted() -> Vec<u8> {
    let mut pdf = Pdf::new();
    let (catalog, tree, page, enc) = (Ref::new(1), Ref::new(2), Ref::new(3), Ref::new(4));
    pdf.catalog(catalog).pages(tree);
    pdf.pages(tree).kids([page]).count(1);
    pdf.page(page).parent(tree).media_box(Rect::new(0.0, 0.0, 612.0, 792.0));
    let mut d = pdf.indirect(enc).dict();
    d.pair(Name(b"Filter"), Name(b"Standard"));
    d.pair(Name(b"V"), 2);
    d.pair(Name(b"R"), 3);
    d.pair(Name(b"Length"), 128);
    d.pair(Name(b"P"), -3904);
    d.pair(Name(b"O"), Str(&[0x4f; 32]));
    d.pair(Name(b"U"), Str(&[0x55; 32]));
    d.finish();
    let bytes = pdf.finish();
    let marker = b"trailer\n<<";
    let at = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .expect("classic trailer")
        + marker.len();
    let mut out = bytes[..at].to_vec();
    out.extend_from_slice(b"\n  /Encrypt 4 0 R\n  /ID [<00112233445566778899aabbccddeeff> <00112233445566778899aabbccddeeff>]");
    out.extend_from_slice(&bytes[at..]);
    out
}

/// Text drawn with a Type3 font.
pub fn type3() -> Vec<u8> {
    let mut pdf = Pdf::new();
    let (catalog, tree, page, content, font, glyph) =
        (Ref::new(1), Ref::new(2), Ref::new(3), Ref::new(4), Ref::new(5), Ref::new(6));
    pdf.catalog(catalog).pages(tree);
    pdf.pages(tree).kids([page]).count(1);
    let mut p = pdf.page(page);
    p.parent(tree).media_box(Rect::new(0.0, 0.0, 612.0, 792.0)).contents(content);
    p.resources().fonts().pair(Name(b"T3"), font);
    p.finish();

    let mut g = Content::new();
    g.start_shape_glyph(1000.0, 0.0, 0.0, 1000.0, 1000.0);
    g.rect(0.0, 0.0, 1000.0, 1000.0).fill_nonzero();
    pdf.stream(glyph, &g.finish());

    let mut f = pdf.type3_font(font);
    f.bbox(Rect::new(0.0, 0.0, 1000.0, 1000.0))
        .matrix([0.001, 0.0, 0.0, 0.001, 0.0, 0.0])
        .first_char(65)
        .last_char(65)
        .widths([1000.0]);
    f.char_procs().pair(Name(b"box"), glyph);
    f.encoding_custom().differences().consecutive(65, [Name(b"box")]);
    f.finish();

    let mut c = Content::new();
    c.begin_text().set_font(Name(b"T3"), 12.0).next_line(72.0, 720.0).show(Str(b"AAA")).end_text();
    pdf.stream(content, &c.finish());
    pdf.finish()
}
