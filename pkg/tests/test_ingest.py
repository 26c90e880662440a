from __future__ import annotations

from pathlib import Path

import pytest
import requests
from hypothesis import given, settings
from hypothesis import strategies as st

from tdm_miner.errors import (
    ConverterFailedError,
    ConverterNotFoundError,
    EndpointUnreachableError,
    HttpError,
    MalformedOutputError,
    MalformedXmlError,
    MissingBodyError,
)
from tdm_miner.ingest import (
    ConverterConfig,
    PdfParserClient,
    Section,
    StructuredDoc,
    Table,
    convert_latex,
    doc_to_tei,
    paper_id_from_path,
    parse_tei,
)

from tests.conftest import FAKE_CONVERTER, FIXTURES


MINIMAL_TEI = """<TEI xmlns="http://www.tei-c.org/ns/1.0">
<teiHeader><fileDesc><titleStmt><title>A</title></titleStmt></fileDesc>
<profileDesc><abstract><p>B</p></abstract></profileDesc></teiHeader>
<text><body><div><head>Intro</head><p>p1</p></div></body></text></TEI>"""


class TestParseTei:
    def test_field_identity(self):
        doc = parse_tei(MINIMAL_TEI, "p")
        assert doc.title == "A"
        assert doc.abstract == "B"
        assert doc.sections == [Section("Intro", ["p1"])]
        assert doc.tables == []

    def test_table_caption_and_cells(self):
        tei = MINIMAL_TEI.replace(
            "</body>",
            '<figure type="table"><figDesc>Results</figDesc>'
            "<table><row><cell>F1</cell><cell>94.8</cell></row></table></figure></body>",
        )
        doc = parse_tei(tei, "p")
        assert doc.tables == [Table("Results", ["F1", "94.8"])]

    def test_pandoc_dialect(self, tei_dir):
        doc = parse_tei((tei_dir / "qa-squad.tei.xml").read_bytes(), "qa-squad")
        assert doc.title == "Neural Question Answering on SQuAD"
        assert doc.abstract.startswith("We study extractive question answering")
        assert [s.heading for s in doc.sections] == ["Introduction", "Experimental Setup"]
        assert doc.tables[0].caption == "Results on the SQuAD development set."
        assert "F1" in doc.tables[0].cells

    def test_grobid_dialect_table_in_figure(self):
        tei = """<TEI xmlns="http://www.tei-c.org/ns/1.0"><teiHeader>
        <fileDesc><titleStmt><title level="a">T</title></titleStmt></fileDesc>
        <profileDesc><abstract><div><p>Abs text.</p></div></abstract></profileDesc>
        </teiHeader><text><body>
        <div><head n="1.">Introduction</head><p>Intro <ref type="bibr">[1]</ref> text.</p></div>
        <figure type="table" xml:id="tab_0"><head>Table 1</head><label>1</label>
        <figDesc>Main results.</figDesc><table><row><cell>a</cell></row></table></figure>
        </body></text></TEI>"""
        doc = parse_tei(tei, "g")
        assert doc.abstract == "Abs text."
        # reference markup is flattened to plain text
        assert doc.sections[0].paragraphs == ["Intro [1] text."]
        assert doc.tables == [Table("Main results.", ["a"])]

    def test_whitespace_normalized(self):
        tei = MINIMAL_TEI.replace("<p>p1</p>", "<p>  p1\n\t p2   p3 </p>")
        doc = parse_tei(tei, "p")
        assert doc.sections[0].paragraphs == ["p1 p2 p3"]

    def test_malformed_xml(self):
        with pytest.raises(MalformedXmlError):
            parse_tei("<TEI><unclosed>", "p")

    def test_non_utf8_rejected(self):
        with pytest.raises(MalformedXmlError):
            parse_tei("café".encode("latin-1"), "p")

    def test_missing_body(self):
        tei = '<TEI xmlns="x"><teiHeader><fileDesc><titleStmt><title>T</title></titleStmt></fileDesc></teiHeader></TEI>'
        with pytest.raises(MissingBodyError):
            parse_tei(tei, "p")

    def test_deterministic(self):
        data = MINIMAL_TEI.encode("utf-8")
        assert parse_tei(data, "p") == parse_tei(data, "p")

    def test_no_text_loss_for_declared_fields(self, tei_dir):
        for path in tei_dir.glob("*.tei.xml"):
            raw = path.read_text(encoding="utf-8")
            doc = parse_tei(raw, path.stem)
            for declared in [doc.title, doc.abstract] + [s.heading for s in doc.sections] + [
                t.caption for t in doc.tables
            ]:
                assert declared == " ".join(declared.split())
                if declared:
                    assert declared in " ".join(raw.split())


_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=0, max_size=40
)
_fragments = st.lists(_text, min_size=0, max_size=3)


@st.composite
def structured_docs(draw):
    sections = [
        Section(" ".join(draw(_text).split()), [" ".join(p.split()) for p in draw(_fragments)])
        for _ in range(draw(st.integers(0, 3)))
    ]
    tables = [
        Table(" ".join(draw(_text).split()), [" ".join(c.split()) for c in draw(_fragments)])
        for _ in range(draw(st.integers(0, 2)))
    ]
    return StructuredDoc(
        paper_id="h",
        title=" ".join(draw(_text).split()),
        abstract=" ".join(draw(_text).split()),
        sections=sections,
        tables=tables,
    )


@settings(max_examples=100)
@given(structured_docs())
def test_roundtrip_stability(doc):
    first = parse_tei(doc_to_tei(doc), "h")
    second = parse_tei(doc_to_tei(first), "h")
    assert first == second


def test_serialization_roundtrip_dict():
    doc = parse_tei(MINIMAL_TEI, "p")
    assert StructuredDoc.from_dict(doc.to_dict()) == doc


class TestConvertLatex:
    def test_recorded_fixture_conversion(self, tei_dir):
        tei = convert_latex(
            FIXTURES / "latex" / "qa-squad.tex", ConverterConfig(command=FAKE_CONVERTER)
        )
        assert tei == (tei_dir / "qa-squad.tei.xml").read_text(encoding="utf-8")
        doc = parse_tei(tei, "qa-squad")
        assert doc.title == "Neural Question Answering on SQuAD"
        assert len(doc.tables) == 1 and doc.tables[0].caption

    def test_empty_file_fails(self, tmp_path):
        empty = tmp_path / "empty.tex"
        empty.write_text("")
        with pytest.raises(ConverterFailedError) as err:
            convert_latex(empty, ConverterConfig(command=FAKE_CONVERTER))
        assert "empty" in err.value.stderr

    def test_converter_not_found(self, tmp_path):
        tex = tmp_path / "a.tex"
        tex.write_text("x")
        with pytest.raises(ConverterNotFoundError):
            convert_latex(tex, ConverterConfig(command="definitely-not-a-converter {input} {output}"))

    def test_malformed_output(self, tmp_path):
        tex = tmp_path / "a.tex"
        tex.write_text("x")
        bad = ConverterConfig(
            command="python3 -c \"import sys; open(sys.argv[2],'w').write('not xml <')\" {input} {output}"
        )
        with pytest.raises(MalformedOutputError):
            convert_latex(tex, bad)

    def test_missing_input(self):
        with pytest.raises(FileNotFoundError):
            convert_latex("/nonexistent/main.tex", ConverterConfig(command=FAKE_CONVERTER))


class _FakeResponse:
    def __init__(self, status_code: int, text: str):
        self.status_code = status_code
        self.text = text
        self.content = text.encode("utf-8")


class _FakeSession:
    def __init__(self, response=None, error=None):
        self.response = response
        self.error = error
        self.calls = 0

    def post(self, *args, **kwargs):
        self.calls += 1
        if self.error is not None:
            raise self.error
        return self.response


class TestConvertPdf:
    def test_replayed_fixture(self):
        client = PdfParserClient(
            "http://grobid.invalid/api/processFulltextDocument",
            replay_dir=FIXTURES / "pdf_replay",
        )
        tei = client.convert(FIXTURES / "pdf_replay" / "two-page.pdf")
        doc = parse_tei(tei, "two-page")
        assert doc.title and doc.abstract

    def test_unreachable_endpoint(self, tmp_path):
        pdf = tmp_path / "x.pdf"
        pdf.write_bytes(b"%PDF-1.4")
        client = PdfParserClient(
            "http://localhost:1/api/processFulltextDocument",
            session=_FakeSession(error=requests.ConnectionError("refused")),
        )
        with pytest.raises(EndpointUnreachableError):
            client.convert(pdf)

    def test_http_error_carries_status(self, tmp_path):
        pdf = tmp_path / "x.pdf"
        pdf.write_bytes(b"%PDF-1.4")
        client = PdfParserClient(
            "http://x/api", session=_FakeSession(response=_FakeResponse(500, "boom"))
        )
        with pytest.raises(HttpError) as err:
            client.convert(pdf)
        assert err.value.status == 500

    def test_malformed_response(self, tmp_path):
        pdf = tmp_path / "x.pdf"
        pdf.write_bytes(b"%PDF-1.4")
        client = PdfParserClient(
            "http://x/api", session=_FakeSession(response=_FakeResponse(200, "not xml"))
        )
        with pytest.raises(MalformedOutputError):
            client.convert(pdf)

    def test_record_then_replay(self, tmp_path):
        pdf = tmp_path / "x.pdf"
        pdf.write_bytes(b"%PDF-1.4 recorded")
        session = _FakeSession(response=_FakeResponse(200, MINIMAL_TEI))
        client = PdfParserClient(
            "http://x/api", replay_dir=tmp_path / "replay", record=True, session=session
        )
        assert client.convert(pdf) == MINIMAL_TEI
        assert session.calls == 1
        # second call served from the replay directory
        assert client.convert(pdf) == MINIMAL_TEI
        assert session.calls == 1


def test_paper_id_from_path():
    assert paper_id_from_path("dir/x1.tei.xml") == "x1"
    assert paper_id_from_path("x1.pdf") == "x1"
    assert paper_id_from_path(Path("a/b/paper.tex")) == "paper"
