"""Turn a paper (LaTeX source, PDF, or TEI XML) into a StructuredDoc.

Both publishing workflows meet at the TEI XML intermediate format: LaTeX
sources go through an external converter (pandoc by default), PDFs through
a remote GROBID-compatible parser. ``parse_tei`` accepts either tool's TEI
dialect by matching on local element names only.
"""

from __future__ import annotations

import enum
import os
import re
import shlex
import subprocess
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import requests

from tdm_miner.errors import (
    ConverterFailedError,
    ConverterNotFoundError,
    EndpointUnreachableError,
    HttpError,
    MalformedOutputError,
    MalformedXmlError,
    MissingBodyError,
)
from tdm_miner.replay import ReplayCache


class SourceKind(enum.Enum):
    LATEX_SOURCE = "latex"
    PDF_FILE = "pdf"
    TEI_XML = "tei"


@dataclass
class Section:
    heading: str
    paragraphs: list[str] = field(default_factory=list)


@dataclass
class Table:
    caption: str
    cells: list[str] = field(default_factory=list)  # row-major


@dataclass
class StructuredDoc:
    paper_id: str
    title: str
    abstract: str
    sections: list[Section] = field(default_factory=list)
    tables: list[Table] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "title": self.title,
            "abstract": self.abstract,
            "sections": [
                {"heading": s.heading, "paragraphs": s.paragraphs} for s in self.sections
            ],
            "tables": [{"caption": t.caption, "cells": t.cells} for t in self.tables],
        }

    @classmethod
    def from_dict(cls, record: dict) -> "StructuredDoc":
        return cls(
            paper_id=record["paper_id"],
            title=record["title"],
            abstract=record["abstract"],
            sections=[Section(s["heading"], list(s["paragraphs"])) for s in record["sections"]],
            tables=[Table(t["caption"], list(t["cells"])) for t in record["tables"]],
        )


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _text_of(element: ET.Element | None) -> str:
    if element is None:
        return ""
    return normalize_ws("".join(element.itertext()))


def _find_local(element: ET.Element, name: str) -> ET.Element | None:
    for child in element.iter():
        if _local(child.tag) == name:
            return child
    return None


def parse_tei(tei: str | bytes, paper_id: str = "") -> StructuredDoc:
    """Parse a TEI document (pandoc or GROBID dialect) into a StructuredDoc.

    Matching is on local element names so both dialects share one code
    path: title inside titleStmt, an abstract element (or failing that a
    body division headed "Abstract"), body div/head/p sections, and table
    elements with their figDesc/head captions. Footnotes, references and
    formula markup are flattened to their plain text.
    """
    if isinstance(tei, str):
        data = tei.encode("utf-8")
    else:
        data = tei
        try:
            data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedXmlError(f"input is not UTF-8: {exc}") from exc
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXmlError(str(exc)) from exc

    title = ""
    title_stmt = _find_local(root, "titleStmt")
    if title_stmt is not None:
        title = _text_of(_find_local(title_stmt, "title"))
    if not title:
        header = _find_local(root, "teiHeader")
        if header is not None:
            title = _text_of(_find_local(header, "title"))

    abstract = _text_of(_find_local(root, "abstract"))

    body = _find_local(root, "body")
    if body is None:
        raise MissingBodyError("TEI document has no body division")

    # Track which elements live inside tables/figures so section harvesting
    # does not pick their paragraphs up twice.
    in_figure: set[int] = set()
    for element in body.iter():
        if _local(element.tag) in ("figure", "table"):
            for sub in element.iter():
                in_figure.add(id(sub))

    sections: list[Section] = []
    for div in body.iter():
        if _local(div.tag) != "div" or id(div) in in_figure:
            continue
        heading = ""
        paragraphs: list[str] = []
        for child in div:
            local = _local(child.tag)
            if local == "head" and not heading:
                heading = _text_of(child)
            elif local == "p" and id(child) not in in_figure:
                text = _text_of(child)
                if text:
                    paragraphs.append(text)
        if heading or paragraphs:
            sections.append(Section(heading=heading, paragraphs=paragraphs))

    # pandoc keeps the LaTeX abstract as an ordinary division
    if not abstract:
        for i, section in enumerate(sections):
            if section.heading.lower() == "abstract":
                abstract = " ".join(section.paragraphs)
                del sections[i]
                break

    tables: list[Table] = []
    for element in body.iter():
        if _local(element.tag) != "table":
            continue
        caption = _text_of(_find_local(element, "head"))
        parent = _parent_figure(body, element)
        if parent is not None:
            fig_desc = _direct_child(parent, "figDesc")
            if fig_desc is None:
                fig_desc = _direct_child(parent, "caption")
            if fig_desc is not None:
                caption = _text_of(fig_desc)
            elif not caption:
                caption = _text_of(_direct_child(parent, "head"))
        cells = [
            _text_of(cell) for cell in element.iter() if _local(cell.tag) == "cell"
        ]
        tables.append(Table(caption=caption, cells=cells))

    return StructuredDoc(
        paper_id=paper_id, title=title, abstract=abstract, sections=sections, tables=tables
    )


def _direct_child(element: ET.Element, name: str) -> ET.Element | None:
    for child in element:
        if _local(child.tag) == name:
            return child
    return None


def _parent_figure(body: ET.Element, table: ET.Element) -> ET.Element | None:
    for element in body.iter():
        if _local(element.tag) == "figure" and any(child is table for child in element):
            return element
    return None


def doc_to_tei(doc: StructuredDoc) -> str:
    """Serialize a StructuredDoc back to GROBID-flavored TEI (fixtures, tests)."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<TEI xmlns="http://www.tei-c.org/ns/1.0">',
        "<teiHeader><fileDesc><titleStmt>",
        f"<title>{escape(doc.title)}</title>",
        "</titleStmt></fileDesc>",
        "<profileDesc><abstract><p>%s</p></abstract></profileDesc>" % escape(doc.abstract),
        "</teiHeader>",
        "<text><body>",
    ]
    for section in doc.sections:
        lines.append("<div>")
        lines.append(f"<head>{escape(section.heading)}</head>")
        for paragraph in section.paragraphs:
            lines.append(f"<p>{escape(paragraph)}</p>")
        lines.append("</div>")
    for table in doc.tables:
        lines.append('<figure type="table">')
        lines.append(f"<figDesc>{escape(table.caption)}</figDesc>")
        lines.append("<table><row>")
        for cell in table.cells:
            lines.append(f"<cell>{escape(cell)}</cell>")
        lines.append("</row></table>")
        lines.append("</figure>")
    lines.append("</body></text>")
    lines.append("</TEI>")
    return "\n".join(lines)


DEFAULT_CONVERTER_COMMAND = "pandoc {input} -s -t tei -o {output}"


@dataclass
class ConverterConfig:
    command: str = DEFAULT_CONVERTER_COMMAND
    timeout: float = 120.0


def convert_latex(tex_root: str | Path, converter: ConverterConfig | None = None) -> str:
    """Run the configured external converter on a main .tex file, return TEI.

    The command template must contain {input} and {output} placeholders.
    """
    converter = converter or ConverterConfig()
    tex_root = Path(tex_root)
    if not tex_root.is_file():
        raise FileNotFoundError(f"main .tex file not found: {tex_root}")
    with tempfile.TemporaryDirectory(prefix="tdm-convert-") as tmp:
        out_path = Path(tmp) / (tex_root.stem + ".tei.xml")
        argv = [
            part.format(input=str(tex_root), output=str(out_path))
            for part in shlex.split(converter.command)
        ]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=converter.timeout
            )
        except FileNotFoundError as exc:
            raise ConverterNotFoundError(f"converter not found: {argv[0]}") from exc
        if proc.returncode != 0:
            raise ConverterFailedError(proc.returncode, proc.stderr)
        if not out_path.is_file():
            raise MalformedOutputError("converter produced no output file")
        tei = out_path.read_text(encoding="utf-8")
    try:
        ET.fromstring(tei.encode("utf-8"))
    except ET.ParseError as exc:
        raise MalformedOutputError(f"converter output is not well-formed XML: {exc}") from exc
    return tei


class PdfParserClient:
    """Client for a GROBID-compatible remote PDF parsing service.

    Posts the PDF as a multipart upload (field name "input") to the
    configured endpoint and returns the TEI response body. A replay
    directory short-circuits the network: responses are looked up by the
    sha256 of the PDF bytes, and recorded there when ``record`` is set.
    The client is shareable across concurrent callers.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 120.0,
        replay_dir: str | Path | None = None,
        record: bool = False,
        auth_token: str | None = None,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.cache = ReplayCache(replay_dir, suffix="tei.xml") if replay_dir else None
        self.record = record
        self.auth_token = auth_token or os.environ.get("TDM_ENDPOINT_TOKEN")
        self.session = session or requests.Session()

    def convert(self, pdf: str | Path) -> str:
        pdf = Path(pdf)
        if not pdf.is_file():
            raise FileNotFoundError(f"PDF not found: {pdf}")
        payload = pdf.read_bytes()
        if self.cache is not None:
            cached = self.cache.get(payload)
            if cached is not None:
                return cached.decode("utf-8")
        headers = {}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        try:
            response = self.session.post(
                self.endpoint,
                files={"input": (pdf.name, payload, "application/pdf")},
                headers=headers,
                timeout=self.timeout,
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise EndpointUnreachableError(f"{self.endpoint}: {exc}") from exc
        if response.status_code != 200:
            raise HttpError(response.status_code, response.text)
        tei = response.text
        try:
            ET.fromstring(tei.encode("utf-8"))
        except ET.ParseError as exc:
            raise MalformedOutputError(f"parser response is not well-formed XML: {exc}") from exc
        if self.cache is not None and self.record:
            self.cache.put(payload, tei.encode("utf-8"))
        return tei


def convert_pdf(
    pdf: str | Path,
    parser_endpoint: str,
    replay_dir: str | Path | None = None,
    record: bool = False,
) -> str:
    """One-shot wrapper around PdfParserClient for single documents."""
    client = PdfParserClient(parser_endpoint, replay_dir=replay_dir, record=record)
    return client.convert(pdf)


_TEI_SUFFIX = re.compile(r"\.(tei\.xml|tei|xml)$", re.IGNORECASE)


def paper_id_from_path(path: str | Path) -> str:
    """Derive a paper id from an input filename, shedding .tei.xml style suffixes."""
    name = Path(path).name
    stripped = _TEI_SUFFIX.sub("", name)
    return Path(stripped).stem if "." in stripped else stripped
