"""Corpus ingestion and splitting.

Reads TEI-XML files whose verse lines carry a metrical annotation in the
``met`` attribute, normalizes every annotation to exactly 11 positions,
removes punctuation and duplicate verses, and cuts deterministic
train/eval/test splits at the poem level so near-identical lines of one
sonnet never leak across sets.

Canonical on-disk form is a UTF-8 TSV: poem_id, line_no, text, pattern
(plus a trailing ``manual`` flag when serializing full corpora).
"""

from __future__ import annotations

import json
import logging
import random
import re
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import InsufficientData, MalformedXml, UnnormalizableMet
from .scansion import check_pattern

log = logging.getLogger(__name__)

# Reverse-engineered from the published line counts 6558/2187/1401 of a
# 10146-line corpus.
DEFAULT_RATIOS = (6558 / 10146, 2187 / 10146, 1401 / 10146)

_WORD_CHARS = "a-záéíóúüïñ"
_DROP_RE = re.compile(rf"[^{_WORD_CHARS}'\- ]")
_TRANSLIT = str.maketrans("çàèìòù", "zaeiou")


@dataclass(frozen=True)
class CorpusLine:
    poem_id: str
    line_no: int
    text: str
    gold: str
    manual: bool = False

    def __post_init__(self):
        check_pattern(self.gold)
        if self.line_no < 1:
            raise ValueError("line_no starts at 1")


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[CorpusLine, ...]
    eval: tuple[CorpusLine, ...]
    test: tuple[CorpusLine, ...]
    seed: int
    ratios: tuple[float, float, float]

    def __post_init__(self):
        keys = [{(ln.poem_id, ln.line_no) for ln in part} for part in self.parts()]
        for i in range(3):
            for j in range(i + 1, 3):
                if keys[i] & keys[j]:
                    raise ValueError("splits share lines")
        texts = [ln.text for part in self.parts() for ln in part]
        if len(texts) != len(set(texts)):
            raise ValueError("duplicate texts across splits")

    def parts(self) -> tuple[tuple[CorpusLine, ...], ...]:
        return (self.train, self.eval, self.test)

    def sizes(self) -> tuple[int, int, int]:
        return tuple(len(p) for p in self.parts())


def normalize_met(raw: str) -> str:
    """Coerce a raw met annotation to the canonical 11 positions.

    Accepts +/- or 1/0 alphabets. Length 11 passes through; a 10-symbol
    pattern ending in stress (oxytone line) pads a trailing '-'; a
    12-symbol pattern ending in two weak positions (proparoxytone line)
    collapses them into one. Anything else is malformed.
    """
    met = raw.strip().replace("1", "+").replace("0", "-")
    if set(met) - {"+", "-"}:
        raise UnnormalizableMet(f"met {raw!r} not over +/- or 1/0")
    if len(met) == 11:
        pass
    elif len(met) == 10 and met.endswith("+"):
        met += "-"
    elif len(met) == 12 and met.endswith("--"):
        met = met[:-1]
    else:
        raise UnnormalizableMet(f"met {raw!r} has unhandled shape")
    return check_pattern(met)


def clean_text(text: str) -> str:
    """Lowercase and strip punctuation/digits, keeping Spanish letters."""
    text = unicodedata.normalize("NFC", text).lower().translate(_TRANSLIT)
    text = _DROP_RE.sub(" ", text)
    return " ".join(text.split())


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _looks_manual(attrs: dict) -> bool:
    return any(k in ("ana", "type", "cert", "resp") and "manual" in v.lower()
               for k, v in attrs.items())


def parse_tei(path) -> list[CorpusLine]:
    """Extract one CorpusLine per annotated verse element, in document order.

    Lines without a met attribute are skipped and counted in a warning.
    The poem identifier comes from the nearest ancestor div/lg xml:id when
    present, otherwise from the file stem plus a running poem counter.
    """
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise MalformedXml(f"{path}: {exc}") from exc

    lines: list[CorpusLine] = []
    skipped = 0
    poem_counter = 0

    def walk(node, poem_id: str | None, manual: bool, counter: list[int]):
        nonlocal skipped, poem_counter
        for child in node:
            tag = _local(child.tag)
            attrs = {_local(k): v for k, v in child.attrib.items()}
            child_manual = manual or _looks_manual(attrs)
            if tag in ("div", "lg") and poem_id is None:
                poem_counter += 1
                new_id = attrs.get("id") or f"{path.stem}-{poem_counter:04d}"
                walk(child, new_id, child_manual, [0])
            elif tag == "l":
                met = attrs.get("met")
                text = " ".join("".join(child.itertext()).split())
                if not met or not text:
                    skipped += 1
                    continue
                counter[0] += 1
                try:
                    number = int(attrs.get("n", ""))
                except ValueError:
                    number = counter[0]
                lines.append(CorpusLine(
                    poem_id=poem_id or path.stem,
                    line_no=number,
                    text=text,
                    gold=normalize_met(met),
                    manual=child_manual,
                ))
            else:
                walk(child, poem_id, child_manual, counter)

    walk(root, None, _looks_manual(
        {_local(k): v for k, v in root.attrib.items()}), [0])
    if skipped:
        log.warning("%s: skipped %d line(s) without met annotation", path, skipped)
    return lines


def parse_tei_dir(directory) -> list[CorpusLine]:
    directory = Path(directory)
    files = sorted(directory.glob("**/*.xml"))
    lines: list[CorpusLine] = []
    for f in files:
        lines.extend(parse_tei(f))
    return lines


def dedupe_and_clean(lines: list[CorpusLine]) -> list[CorpusLine]:
    """Strip punctuation from texts and drop exact duplicates (first wins)."""
    seen = set()
    out = []
    for ln in lines:
        text = clean_text(ln.text)
        if not text or text in seen:
            continue
        seen.add(text)
        out.append(CorpusLine(ln.poem_id, ln.line_no, text, ln.gold, ln.manual))
    return out


def split(lines: list[CorpusLine], ratios=DEFAULT_RATIOS, seed: int = 13) -> CorpusSplit:
    """Poem-level shuffle + greedy assignment toward the requested ratios."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios {ratios!r} must sum to 1")
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ValueError("need three non-negative ratios")

    poems: dict[str, list[CorpusLine]] = {}
    for ln in lines:
        poems.setdefault(ln.poem_id, []).append(ln)
    poem_ids = sorted(poems)
    wanted_sets = sum(1 for r in ratios if r > 0)
    if len(poem_ids) < wanted_sets:
        raise InsufficientData(
            f"{len(poem_ids)} poem(s) cannot fill {wanted_sets} split(s)")

    rng = random.Random(seed)
    rng.shuffle(poem_ids)
    total = len(lines)
    targets = [r * total for r in ratios]
    filled = [0, 0, 0]
    buckets: tuple[list[CorpusLine], ...] = ([], [], [])
    for pid in poem_ids:
        deficits = [targets[i] - filled[i] for i in range(3)]
        dest = max(range(3), key=lambda i: (deficits[i], -i))
        buckets[dest].extend(poems[pid])
        filled[dest] += len(poems[pid])
    return CorpusSplit(
        train=tuple(buckets[0]), eval=tuple(buckets[1]), test=tuple(buckets[2]),
        seed=seed, ratios=tuple(ratios))


# --- serialization ----------------------------------------------------------

def write_tsv(lines, path, include_manual: bool = False) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for ln in lines:
            row = [ln.poem_id, str(ln.line_no), ln.text, ln.gold]
            if include_manual:
                row.append("1" if ln.manual else "0")
            fh.write("\t".join(row) + "\n")


def read_tsv(path) -> list[CorpusLine]:
    lines = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.rstrip("\r\n")
            if not raw:
                continue
            cols = raw.split("\t")
            if len(cols) < 4:
                raise ValueError(f"{path}: expected at least 4 columns, got {cols!r}")
            manual = len(cols) > 4 and cols[4] == "1"
            lines.append(CorpusLine(cols[0], int(cols[1]), cols[2],
                                    normalize_met(cols[3]), manual))
    return lines


def bundled_mini_gold() -> list[CorpusLine]:
    """The hand-verified Golden Age hendecasyllables shipped with the package."""
    ref = resources.files("escansion.data") / "mini_gold.tsv"
    with resources.as_file(ref) as path:
        return read_tsv(path)


def write_split(corpus_split: CorpusSplit, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = ("train", "eval", "test")
    for name, part in zip(names, corpus_split.parts()):
        write_tsv(part, out_dir / f"{name}.tsv")
    meta = {
        "seed": corpus_split.seed,
        "ratios": list(corpus_split.ratios),
        "counts": dict(zip(names, corpus_split.sizes())),
    }
    with open(out_dir / "split.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
