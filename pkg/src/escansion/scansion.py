"""Metrical analysis of a verse line.

A parsed line is a flat sequence of phonological syllables, each stressed
or not. Three figures can reshape it:

* synalepha  - merges the last syllable of a word with the vowel-initial
               first syllable of the next word (-1 per merged boundary);
* syneresis  - merges a word-internal hiatus into one syllable (-1);
* dieresis   - splits a word-internal diphthong in two (+1).

Fitting a line means choosing the subset of applicable figures whose
resulting metrical length (syllable count plus the ending adjustment:
+1 after a final stressed syllable, 0 after one trailing weak syllable,
-1 after two, -2 after three) equals the target, 11 for hendecasyllables.
Among the subsets that fit, a deterministic preference picks the winner:

1. candidates with stress on position 10 (the obligatory hendecasyllable
   ictus) beat those without;
2. candidates matching a classical rhythmic template (stress on 6, or on
   4 and 8) beat those that do not, when any exists;
3. fewest dieresis, then fewest syneresis, then most synalephas;
4. when synalephas must be left unapplied, boundaries that touch a
   stressed vowel or a silent h are released first, left to right;
5. remaining ties resolve left to right on site positions.

The last word of the line always counts as stressed (the final-accent
convention of Spanish metrics), which also guarantees every pattern
contains at least one '+'.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import EmptyLine, EmptyAfterNormalization, LengthMismatch, Unfittable
from .phonology import (
    VOWEL_CHARS,
    StressLexicon,
    SyllabifiedWord,
    _HIATUS_CORE,
    analyze_word,
    default_lexicon,
    nucleus_of,
    stressed_syllable_indices,
)

_FIGURES = ("synalepha", "syneresis", "dieresis")
_DELTAS = {"synalepha": -1, "syneresis": -1, "dieresis": +1}


@dataclass(frozen=True)
class ScanConfig:
    """Knobs for the fitting search; defaults reproduce hendecasyllables."""

    target_length: int = 11
    h_blocks_synalepha: bool = False
    figure_preference: tuple[str, ...] = ("synalepha", "syneresis", "dieresis")
    emit_diagnostics: bool = False
    prefer_rhythmic_template: bool = True  # only consulted for target 11
    max_exhaustive_sites: int = 16
    beam_width: int = 256

    def __post_init__(self):
        if self.target_length < 2:
            raise ValueError("target_length must be at least 2")
        if sorted(self.figure_preference) != sorted(_FIGURES):
            raise ValueError("figure_preference must order " + ", ".join(_FIGURES))


@dataclass(frozen=True)
class FigureSite:
    """One place where a figure could apply.

    ``position`` indexes the flat phonological syllable sequence: for the
    merging figures it names the left syllable of the merged pair, for
    dieresis the syllable being split.
    """

    kind: str
    position: int
    span: int
    delta: int
    involves_stress: bool = False
    through_h: bool = False

    def __post_init__(self):
        if self.kind not in _FIGURES:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.delta != _DELTAS[self.kind]:
            raise ValueError(f"{self.kind} must have delta {_DELTAS[self.kind]}")

    def __str__(self):
        return f"{self.kind}@{self.position}"


@dataclass(frozen=True)
class MetricalSyllable:
    parts: tuple[str, ...]
    stressed: bool

    def display(self) -> str:
        return "".join(self.parts)


@dataclass(frozen=True)
class ScanCandidate:
    applied: tuple[FigureSite, ...]
    metrical_syllables: tuple[MetricalSyllable, ...]
    metrical_length: int

    @property
    def ending_adjust(self) -> int:
        return self.metrical_length - len(self.metrical_syllables)


@dataclass(frozen=True)
class ScansionResult:
    pattern: str
    candidate: ScanCandidate
    ambiguous: bool
    syllabification: tuple[tuple[str, ...], ...]
    diagnostics: tuple[str, ...] = ()

    def hyphenated(self) -> str:
        return " ".join("-".join(word) for word in self.syllabification)


def check_pattern(symbols: str, length: int = 11) -> str:
    """Validate a metrical pattern string and hand it back."""
    if len(symbols) != length:
        raise LengthMismatch(f"pattern {symbols!r} has {len(symbols)} positions, "
                             f"wanted {length}")
    if set(symbols) - {"+", "-"}:
        raise ValueError(f"pattern {symbols!r} not over +/-")
    if "+" not in symbols:
        raise ValueError("pattern needs at least one stressed position")
    return symbols


# --- parsing ----------------------------------------------------------------

def phonological_parse(line: str, lexicon: StressLexicon) -> list[SyllabifiedWord]:
    """Tokenize, syllabify and stress every word of a raw verse line."""
    words = []
    for token in line.split():
        try:
            words.append(analyze_word(token, lexicon))
        except EmptyAfterNormalization:
            continue
    if not words:
        raise EmptyLine(f"nothing scannable in line {line!r}")
    return words


class _Flat(NamedTuple):
    text: str
    stressed: bool
    word_idx: int
    nucleus: str
    # ((left text, stressed), (right text, stressed)) after a dieresis
    # split, or None for single-vowel nuclei
    split: tuple[tuple[str, bool], tuple[str, bool]] | None


def _split_syllable(text: str, nucleus: str, stressed: bool):
    """Cut a diphthong syllable after its first vowel letter."""
    at = text.find(nucleus)
    first, rest = nucleus[0], nucleus[1:]
    left_text = text[:at] + first
    right_text = rest + text[at + len(nucleus):]
    vowels = [c for c in nucleus if c != "h"]
    strong = [c for c in vowels if c in _HIATUS_CORE]
    peak_left = bool(strong) and strong[0] == vowels[0]
    return ((left_text, stressed and peak_left),
            (right_text, stressed and not peak_left))


def _build_flat(words: list[SyllabifiedWord]) -> list[_Flat]:
    flat = []
    last = len(words) - 1
    for wi, sw in enumerate(words):
        hits = set(stressed_syllable_indices(sw, force=(wi == last)))
        for si, syl in enumerate(sw.syllables):
            nucleus = nucleus_of(syl)
            stressed = si in hits
            n_vowels = sum(1 for c in nucleus if c != "h")
            split = _split_syllable(syl, nucleus, stressed) if n_vowels >= 2 else None
            flat.append(_Flat(syl, stressed, wi, nucleus, split))
    return flat


def _ends_in_vowel_sound(normalized: str) -> bool:
    c = normalized[-1]
    if c in VOWEL_CHARS or c == "y":
        return True
    return c == "h" and len(normalized) > 1 and normalized[-2] in VOWEL_CHARS


def _begins_with_vowel_sound(normalized: str, h_blocks: bool) -> bool:
    c = normalized[0]
    if c in VOWEL_CHARS:
        return True
    if c == "y":
        # standalone conjunction, or archaic y-for-i before a consonant
        rest = normalized[1:]
        return not rest or rest[0] not in VOWEL_CHARS
    if c == "h":
        if h_blocks or len(normalized) < 2:
            return False
        if normalized[1:3] in ("ue", "ie"):  # consonantal glide: hueso, hielo
            return False
        return normalized[1] in VOWEL_CHARS
    return False


def find_figure_sites(words: list[SyllabifiedWord],
                      config: ScanConfig | None = None) -> list[FigureSite]:
    """Enumerate every applicable figure, left to right."""
    config = config or ScanConfig()
    flat = _build_flat(words)
    word_start = {}
    for i, syl in enumerate(flat):
        word_start.setdefault(syl.word_idx, i)

    sites = []
    for wi in range(len(words) - 1):
        left, right = words[wi], words[wi + 1]
        if not _ends_in_vowel_sound(left.word.normalized):
            continue
        if not _begins_with_vowel_sound(right.word.normalized,
                                        config.h_blocks_synalepha):
            continue
        li = word_start[wi + 1] - 1
        sites.append(FigureSite(
            kind="synalepha", position=li, span=2, delta=-1,
            involves_stress=flat[li].stressed or flat[li + 1].stressed,
            through_h=(right.word.normalized[0] == "h"
                       or left.word.normalized[-1] == "h")))

    for i in range(len(flat) - 1):
        a, b = flat[i], flat[i + 1]
        if a.word_idx != b.word_idx:
            continue
        onset_ok = b.text.startswith(b.nucleus) or (
            b.text.startswith("h") and b.text[1:].startswith(b.nucleus))
        if a.text.endswith(a.nucleus) and onset_ok:
            sites.append(FigureSite(
                kind="syneresis", position=i, span=2, delta=-1,
                involves_stress=a.stressed or b.stressed))

    for i, syl in enumerate(flat):
        if syl.split is not None:
            sites.append(FigureSite(
                kind="dieresis", position=i, span=1, delta=+1,
                involves_stress=syl.stressed))

    order = {k: r for r, k in enumerate(_FIGURES)}
    sites.sort(key=lambda s: (s.position, order[s.kind]))
    return sites


# --- candidate evaluation ---------------------------------------------------

def _stress_groups(flat: list[_Flat], split_at: frozenset[int],
                   merged: frozenset[int]) -> list[bool]:
    """Stress flags of the metrical syllables for one figure subset."""
    groups: list[bool] = []
    for i, syl in enumerate(flat):
        join = i > 0 and (i - 1) in merged
        if i in split_at:
            (_, s1), (_, s2) = syl.split
            if join:
                groups[-1] = groups[-1] or s1
            else:
                groups.append(s1)
            groups.append(s2)
        elif join:
            groups[-1] = groups[-1] or syl.stressed
        else:
            groups.append(syl.stressed)
    return groups


def _length_and_pattern(groups: list[bool]) -> tuple[int, str]:
    last = max(i for i, s in enumerate(groups) if s)
    length = last + 2
    return length, "".join("+" if s else "-" for s in groups[:last + 1]) + "-"


def _classify_mask(sites: list[FigureSite], mask: int):
    split_at, merged = [], []
    counts = {"synalepha": 0, "syneresis": 0, "dieresis": 0}
    for i, site in enumerate(sites):
        if not mask >> i & 1:
            continue
        counts[site.kind] += 1
        if site.kind == "dieresis":
            split_at.append(site.position)
        else:
            merged.append(site.position)
    return frozenset(split_at), frozenset(merged), counts


def _build_candidate(flat: list[_Flat], sites: list[FigureSite],
                     mask: int) -> ScanCandidate:
    split_at, merged, _ = _classify_mask(sites, mask)
    groups: list[list[tuple[str, bool]]] = []
    for i, syl in enumerate(flat):
        units = list(syl.split) if i in split_at else [(syl.text, syl.stressed)]
        for j, unit in enumerate(units):
            if j == 0 and i > 0 and (i - 1) in merged and groups:
                groups[-1].append(unit)
            else:
                groups.append([unit])
    mets = tuple(
        MetricalSyllable(tuple(t for t, _ in g), any(s for _, s in g))
        for g in groups)
    last = max(i for i, m in enumerate(mets) if m.stressed)
    applied = tuple(s for i, s in enumerate(sites) if mask >> i & 1)
    return ScanCandidate(applied=applied, metrical_syllables=mets,
                         metrical_length=last + 2)


def pattern_of(candidate: ScanCandidate, config: ScanConfig | None = None) -> str:
    """Render a fitted candidate as its +/- pattern.

    A final stressed syllable pads one trailing '-' position; everything
    after the last stress collapses into that single final position, so the
    pattern always has exactly ``metrical_length`` symbols.
    """
    config = config or ScanConfig()
    if candidate.metrical_length != config.target_length:
        raise LengthMismatch(
            f"candidate has metrical length {candidate.metrical_length}, "
            f"target is {config.target_length}")
    flags = [m.stressed for m in candidate.metrical_syllables]
    _, pattern = _length_and_pattern(flags)
    return check_pattern(pattern, config.target_length)


def _enumerate_masks(flat, sites, config) -> Iterable[int]:
    k = len(sites)
    if k <= config.max_exhaustive_sites:
        return range(1 << k)
    # Beam fallback for pathological lines: grow subsets site by site,
    # keeping the states closest to the target at each depth. Every mask
    # ever placed on the beam is returned, not just the last frontier.
    target = config.target_length

    def distance(mask: int) -> int:
        split_at, merged, _ = _classify_mask(sites, mask)
        length, _pat = _length_and_pattern(_stress_groups(flat, split_at, merged))
        return abs(length - target)

    explored = {0}
    frontier = [0]
    for i in range(k):
        extend = []
        for mask in frontier:
            new = mask | (1 << i)
            if new not in explored:
                explored.add(new)
                extend.append(new)
        frontier = sorted(frontier + extend, key=lambda m: (distance(m), m))
        frontier = frontier[:config.beam_width]
    return sorted(explored)


def _drop_priority(sites: list[FigureSite]) -> dict[int, int]:
    """Rank synalepha sites by how readily they are left unapplied."""
    syna = [i for i, s in enumerate(sites) if s.kind == "synalepha"]
    first = [i for i in syna if sites[i].involves_stress or sites[i].through_h]
    rest = [i for i in syna if i not in first]
    return {site_idx: rank for rank, site_idx in enumerate(first + rest)}


def fit_to_target(words: list[SyllabifiedWord], sites: list[FigureSite],
                  config: ScanConfig | None = None) -> ScansionResult:
    """Choose the figure subset that lands the line on the target length."""
    config = config or ScanConfig()
    target = config.target_length
    flat = _build_flat(words)
    drop_rank = _drop_priority(sites)
    count_tiers = tuple(reversed(config.figure_preference))

    feasible = []  # (selection key, mask, pattern)
    achievable = set()
    nearest: list[tuple[int, int]] = []
    for mask in _enumerate_masks(flat, sites, config):
        split_at, merged, counts = _classify_mask(sites, mask)
        length, pattern = _length_and_pattern(_stress_groups(flat, split_at, merged))
        achievable.add(length)
        if length != target:
            nearest.append((abs(length - target), mask))
            continue
        tiers = tuple(-counts[f] if f == "synalepha" else counts[f]
                      for f in count_tiers)
        dropped = tuple(sorted(
            drop_rank[i] for i in drop_rank if not mask >> i & 1))
        applied_merges = tuple(s.position for i, s in enumerate(sites)
                               if mask >> i & 1 and s.kind == "syneresis")
        applied_splits = tuple(s.position for i, s in enumerate(sites)
                               if mask >> i & 1 and s.kind == "dieresis")
        key = tiers + (dropped, applied_merges, applied_splits, mask)
        feasible.append((key, mask, pattern))

    if not feasible:
        nearest.sort()
        previews = []
        for _, mask in nearest[:3]:
            cand = _build_candidate(flat, sites, mask)
            figures = ";".join(str(s) for s in cand.applied) or "none"
            previews.append((cand.metrical_length, figures))
        raise Unfittable(
            f"no figure subset reaches length {target} "
            f"(achievable: {sorted(achievable)})",
            achievable=achievable, nearest=previews)

    pool = feasible
    on_ictus = [f for f in pool if f[2][target - 2] == "+"]
    if on_ictus:
        pool = on_ictus
    if target == 11 and config.prefer_rhythmic_template:
        rhythmic = [f for f in pool
                    if f[2][5] == "+" or (f[2][3] == "+" and f[2][7] == "+")]
        if rhythmic:
            pool = rhythmic
    key, mask, pattern = min(pool)

    candidate = _build_candidate(flat, sites, mask)
    diagnostics = ()
    if config.emit_diagnostics:
        diagnostics = tuple(sorted({p for _, _, p in feasible}))
    return ScansionResult(
        pattern=check_pattern(pattern, target),
        candidate=candidate,
        ambiguous=len(feasible) > 1,
        syllabification=tuple(sw.syllables for sw in words),
        diagnostics=diagnostics,
    )


def scan_line(line: str, lexicon: StressLexicon | None = None,
              config: ScanConfig | None = None) -> ScansionResult:
    """Raw text in, 11-position stress pattern out."""
    lexicon = lexicon if lexicon is not None else default_lexicon()
    config = config or ScanConfig()
    words = phonological_parse(line, lexicon)
    sites = find_figure_sites(words, config)
    return fit_to_target(words, sites, config)
