"""Regenerates the reportlab-written fixtures and their expected word boxes.

Boxes come from reportlab's own font metrics (stringWidth, ascent/descent),
in top-left coordinates. Run from this directory: python3 make_reportlab.py
"""
import json
from reportlab.pdfgen import canvas
from reportlab.pdfbase.pdfmetrics import stringWidth, getFont

W, H = 612, 792
SENTENCE = ("Microsoft Corporation is a worldwide leader in software, "
        "services and hardware that deliver new")


def boxes(text, x, y, font, size):
    f = getFont(font).face
    asc, desc = f.ascent / 1000 * size, f.descent / 1000 * size
    out, cur = [], x
    space = stringWidth(" ", font, size)
    for word in text.split(" "):
        w = stringWidth(word, font, size)
        out.append({"text": word, "bbox": [cur, H - y - asc, cur + w, H - y - desc]})
        cur += w + space
    return out


def make(name, lines):
    c = canvas.Canvas(name + ".pdf", pagesize=(W, H), invariant=1, pageCompression=1)
    expected = []
    for text, x, y, font, size in lines:
        c.setFont(font, size)
        c.drawString(x, y, text)
        expected += boxes(text, x, y, font, size)
    c.showPage()
    c.save()
    with open(name + ".json", "w") as fh:
        json.dump({"pages": [{"index": 0, "width": W, "height": H, "words": expected}]}, fh, indent=1)


make("hello_reportlab", [("Hello World", 72, 720, "Helvetica", 12)])
make("software_sentence_reportlab", [(SENTENCE, 36, 700, "Times-Roman", 11),
                           ("Title: Software Engineer", 36, 680, "Courier", 10)])
