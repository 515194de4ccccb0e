"""Wikidata link table: class IRI -> Wikidata entity id, loaded from TSV."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .terms import IRI, WD
from .vocab import DEFAULT_VOCABULARY, Vocabulary

QID_RE = re.compile(r"Q[0-9]+")


class WikidataLinks(dict):
    """Mapping of component/function class IRIs to ``Q...`` ids."""

    def entity(self, cls: IRI) -> IRI | None:
        qid = self.get(cls)
        return IRI(WD, qid) if qid else None


def parse_links(text: str, vocab: Vocabulary = DEFAULT_VOCABULARY, source: str = "<links>") -> WikidataLinks:
    table = WikidataLinks()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ValidationError(f"{source}:{lineno}: expected two tab-separated columns")
        cls_text, qid = cols[0].strip(), cols[1].strip()
        try:
            cls = IRI(cls_text)
        except ValueError as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from None
        if not (vocab.is_node_class(cls) or vocab.is_function_class(cls)):
            raise ValidationError(f"{source}:{lineno}: {cls} is not a component or function class")
        if not QID_RE.fullmatch(qid):
            raise ValidationError(f"{source}:{lineno}: {qid!r} is not a Wikidata entity id")
        if cls in table:
            raise ValidationError(f"{source}:{lineno}: duplicate entry for {cls}")
        table[cls] = qid
    return table


def load_links(path: str | Path | None = None, vocab: Vocabulary = DEFAULT_VOCABULARY) -> WikidataLinks:
    """Load a link table; without *path* the bundled table is used."""
    if path is None:
        text = resources.files("circuit_annotator").joinpath("data/wikidata_links.tsv").read_text("utf-8")
        return parse_links(text, vocab, "wikidata_links.tsv")
    return parse_links(Path(path).read_text("utf-8"), vocab, str(path))
