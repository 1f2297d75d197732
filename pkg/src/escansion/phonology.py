"""Orthographic syllabification and stress assignment for Spanish words.

Implements normative RAE syllabification (onset maximization with the
inseparable obstruent+liquid clusters, digraphs ch/ll/rr/qu/gu as units,
diphthong vs hiatus by vowel strength and written accent, transparent 'h')
plus the two stress layers needed for scansion:

* lexical stress: which syllable of the word is strong, counted from the end
  (1 = aguda, 2 = llana, 3 = esdrujula, 4 = sobresdrujula);
* prosodic stress: whether the word keeps that stress in connected speech.
  Closed-class function words (articles, clitics, prepositions, atonic
  conjunctions/relatives, prenominal possessives) do not, and are listed in a
  plain-text lexicon shipped with the package. Homographs such as el/él,
  mas/más, se/sé are told apart purely by the written accent.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import EmptyAfterNormalization, NoVowel

# Vowel letters. 'ï' is kept because Golden Age editions mark forced
# dieresis with it (vïola, rüido); it always breaks a diphthong, as does
# 'ü' anywhere except in the güe/güi digraph context.
VOWEL_CHARS = set("aeiouáéíóúüï")
ACCENTED = set("áéíóú")
# A vowel pair is a hiatus iff both members are in this set (open vowels
# plus accent-carrying closed vowels). Everything else is a diphthong.
_HIATUS_CORE = set("aeoáéóíú")
# Onset clusters that can never be split.
_CLUSTERS = {"pr", "br", "tr", "dr", "cr", "gr", "fr",
             "pl", "bl", "cl", "gl", "fl"}

_MARKS = "'-"
# Old orthography: ç for modern z, grave accents on atonic particles.
_TRANSLIT = str.maketrans("çàèìòù", "zaeiou")
_KEEP = VOWEL_CHARS | set("bcdfghjklmnñpqrstvwxyz") | set(_MARKS)

# Words ending in "mente" that are not adverbs (nouns, adjectives and
# -mentar verb forms); adverbs in -mente carry two prosodic stresses.
_NOT_MENTE_ADVERB = {
    "mente", "demente", "clemente", "inclemente", "vehemente",
    "alimente", "atormente", "cimente", "complemente", "documente",
    "experimente", "fermente", "fundamente", "implemente", "incremente",
    "instrumente", "ornamente", "pavimente", "pigmente", "reglamente",
    "sedimente",
}


@dataclass(frozen=True)
class Word:
    """A verse token: the raw surface form and its normalized shape."""

    surface: str
    normalized: str

    def __post_init__(self):
        if not self.normalized:
            raise EmptyAfterNormalization(f"empty word from {self.surface!r}")
        bad = set(self.normalized) - _KEEP
        if bad:
            raise ValueError(f"disallowed characters {bad!r} in {self.normalized!r}")
        if not any(c in VOWEL_CHARS or c == "y" for c in self.normalized):
            raise EmptyAfterNormalization(f"no vowel in {self.normalized!r}")


@dataclass(frozen=True)
class SyllabifiedWord:
    """A word cut into syllables, with both stress layers resolved."""

    word: Word
    syllables: tuple[str, ...]
    stress_from_end: int  # 1 aguda, 2 llana, 3 esdrujula, 4 sobresdrujula
    prosodic: bool

    def __post_init__(self):
        if not 1 <= self.stress_from_end <= len(self.syllables):
            raise ValueError(
                f"stress_from_end {self.stress_from_end} out of range for "
                f"{self.syllables!r}")

    @property
    def stressed_index(self) -> int:
        return len(self.syllables) - self.stress_from_end

    def hyphenated(self) -> str:
        return "-".join(self.syllables)


def normalize_token(raw: str) -> Word:
    """Lowercase a token and strip everything that is not a Spanish letter.

    Diacritics are preserved; word-internal apostrophes and hyphens survive
    (archaic contractions like d'amor). Raises EmptyAfterNormalization when
    nothing pronounceable remains.
    """
    text = unicodedata.normalize("NFC", raw).lower().translate(_TRANSLIT)
    text = "".join(c for c in text if c in _KEEP)
    text = text.strip(_MARKS)
    text = re.sub(r"['-]{2,}", lambda m: m.group(0)[0], text)
    if not text:
        raise EmptyAfterNormalization(f"nothing left of token {raw!r}")
    return Word(surface=raw, normalized=text)


# --- syllabification -------------------------------------------------------

def _is_vowel_char(c: str, nxt: str) -> bool:
    if c in VOWEL_CHARS:
        return True
    # y: vowel word-finally / before a consonant / standalone; consonant
    # when it opens a syllable before a vowel (ya, cuyo).
    return c == "y" and not (nxt and nxt in VOWEL_CHARS)


def _tokenize(word: str) -> list[tuple[str, str]]:
    """Split a mark-free word into (kind, text) units.

    Kinds: V vowel, C consonant (digraphs are single units), H silent h.
    The silent u of que/qui/gue/gui is folded into the consonant unit.
    """
    units = []
    i, n = 0, len(word)
    while i < n:
        c = word[i]
        nxt = word[i + 1] if i + 1 < n else ""
        third = word[i + 2] if i + 2 < n else ""
        if c in ("c", "l", "r") and c + nxt in ("ch", "ll", "rr"):
            units.append(("C", c + nxt))
            i += 2
        elif c in ("q", "g") and nxt == "u" and third in ("e", "é", "i", "í"):
            units.append(("C", c + "u"))
            i += 2
        elif c == "h":
            units.append(("H", c))
            i += 1
        elif _is_vowel_char(c, nxt):
            units.append(("V", c))
            i += 1
        else:
            units.append(("C", c))
            i += 1
    return units


def _as_weak_or_strong(c: str) -> str:
    return "i" if c == "y" else c


def _forces_hiatus(c: str, prev_unit_text: str) -> bool:
    # Dieresis spelling: ï always, ü unless it is the güe/güi vowel.
    if c == "ï":
        return True
    if c == "ü":
        return prev_unit_text != "g"
    return False


def _group_nuclei(units: list[tuple[str, str]]) -> list[tuple[str, str]]:
    """Merge adjacent vowels (optionally through silent h) into nuclei."""
    out: list[tuple[str, str]] = []
    i = 0
    while i < len(units):
        kind, text = units[i]
        if kind != "V":
            out.append(units[i])
            i += 1
            continue
        nucleus = text
        last = _as_weak_or_strong(text)
        prev_text = out[-1][1] if out else ""
        forced = _forces_hiatus(text, prev_text)
        i += 1
        while i < len(units):
            j = i
            h = ""
            if units[j][0] == "H" and j + 1 < len(units):
                h = units[j][1]
                j += 1
            if units[j][0] != "V":
                break
            nxt = units[j][1]
            n_ws = _as_weak_or_strong(nxt)
            if forced or _forces_hiatus(nxt, "") or (
                    last in _HIATUS_CORE and n_ws in _HIATUS_CORE):
                break
            nucleus += h + nxt
            last = n_ws
            i = j + 1
        out.append(("V", nucleus))
    return out


def _coda_count(cons: list[tuple[str, str]]) -> int:
    """How many of the consonant units between two nuclei stay as coda."""
    m = len(cons)
    if m <= 1:
        return 0
    a, b = cons[-2][1], cons[-1][1]
    if len(a) == 1 and len(b) == 1 and a + b in _CLUSTERS:
        return m - 2
    return m - 1


def _syllabify_plain(word: str) -> list[str]:
    units = _group_nuclei(_tokenize(word))
    nuclei = [i for i, (k, _) in enumerate(units) if k == "V"]
    if not nuclei:
        raise NoVowel(f"no syllable nucleus in {word!r}")
    syllables = []
    start = 0
    for j, ni in enumerate(nuclei):
        if j + 1 == len(nuclei):
            syllables.append("".join(t for _, t in units[start:]))
            break
        cons = units[ni + 1:nuclei[j + 1]]
        keep = _coda_count(cons)
        end = ni + 1 + keep
        syllables.append("".join(t for _, t in units[start:end]))
        start = end
    return syllables


def syllabify(word: Word | str) -> list[str]:
    """Split a word into syllables; their concatenation is the input."""
    normalized = word.normalized if isinstance(word, Word) else word
    plain = normalized.replace("'", "").replace("-", "")
    syllables = _syllabify_plain(plain)
    if plain == normalized:
        return syllables
    # Re-insert contraction marks at their original offsets.
    out, buf, consumed, k = [], "", 0, 0
    for c in normalized:
        buf += c
        if c not in _MARKS:
            consumed += 1
            if consumed == len(syllables[k]):
                out.append(buf)
                buf, consumed, k = "", 0, k + 1
    if buf:
        out[-1] += buf
    return out


def nucleus_of(syllable: str) -> str:
    """The vowel nucleus of a single syllable (includes transparent h)."""
    for kind, text in _group_nuclei(_tokenize(syllable.strip(_MARKS))):
        if kind == "V":
            return text
    return ""


def lexical_stress(syllables: list[str] | tuple[str, ...], word: Word | str) -> int:
    """Position of the strong syllable, counted from the end (1-based).

    A written accent wins; otherwise words ending in a vowel, n or s are
    llanas and the rest agudas. Monosyllables are agudas.
    """
    if not syllables:
        raise NoVowel("empty syllable list")
    for idx, syl in enumerate(syllables):
        if any(c in ACCENTED for c in syl):
            return len(syllables) - idx
    if len(syllables) == 1:
        return 1
    normalized = word.normalized if isinstance(word, Word) else word
    last = normalized.rstrip(_MARKS)[-1]
    return 2 if (last in VOWEL_CHARS or last in "ns") else 1


@dataclass(frozen=True)
class StressLexicon:
    """Closed-class words treated as prosodically unstressed, plus overrides."""

    unstressed_words: frozenset[str] = frozenset()
    overrides: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        clash = self.unstressed_words & set(self.overrides)
        if clash:
            raise ValueError(f"words in both lists: {sorted(clash)!r}")

    @classmethod
    def load(cls, path) -> "StressLexicon":
        unstressed, overrides = set(), {}
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "\t" in line:
                word, value = line.split("\t", 1)
                value = value.strip()
                if value not in ("stressed", "unstressed"):
                    raise ValueError(
                        f"override for {word!r} must be stressed|unstressed, "
                        f"got {value!r}")
                word = normalize_token(word).normalized
                overrides[word] = value == "stressed"
                unstressed.discard(word)
            else:
                word = normalize_token(line).normalized
                if word not in overrides:
                    unstressed.add(word)
        return cls(frozenset(unstressed), overrides)


@lru_cache(maxsize=1)
def default_lexicon() -> StressLexicon:
    ref = resources.files("escansion.data") / "function_words.txt"
    with resources.as_file(ref) as path:
        return StressLexicon.load(path)


def is_prosodically_stressed(word: Word | str, lexicon: StressLexicon) -> bool:
    normalized = word.normalized if isinstance(word, Word) else word
    if normalized in lexicon.overrides:
        return lexicon.overrides[normalized]
    return normalized not in lexicon.unstressed_words


def analyze_word(raw: str, lexicon: StressLexicon) -> SyllabifiedWord:
    """normalize + syllabify + stress in one step."""
    word = normalize_token(raw)
    syllables = tuple(syllabify(word))
    return SyllabifiedWord(
        word=word,
        syllables=syllables,
        stress_from_end=lexical_stress(syllables, word),
        prosodic=is_prosodically_stressed(word, lexicon),
    )


def _is_mente_adverb(normalized: str, n_syllables: int) -> bool:
    return (normalized.endswith("mente")
            and len(normalized) >= 8  # stem of 3+ letters
            and n_syllables >= 3
            and normalized not in _NOT_MENTE_ADVERB)


def stressed_syllable_indices(sw: SyllabifiedWord, *, force: bool = False) -> tuple[int, ...]:
    """Indices of syllables that carry prosodic stress.

    Usually a single index (or none for atonic words); adverbs in -mente
    keep the stress of their stem as well as the one on -men-. ``force``
    marks the word stressed regardless of the lexicon, which is how the
    last word of a verse line behaves.
    """
    if not (sw.prosodic or force):
        return ()
    normalized = sw.word.normalized
    if _is_mente_adverb(normalized, len(sw.syllables)):
        mente_idx = len(sw.syllables) - 2
        stem = sw.syllables[:-2]
        root_idx = None
        for idx, syl in enumerate(stem):
            if any(c in ACCENTED for c in syl):
                root_idx = idx
                break
        if root_idx is None:
            stem_last = normalized[:-5].rstrip(_MARKS)[-1]
            if len(stem) >= 2 and (stem_last in VOWEL_CHARS or stem_last in "ns"):
                root_idx = len(stem) - 2
            else:
                root_idx = len(stem) - 1
        if root_idx != mente_idx:
            return (root_idx, mente_idx)
        return (mente_idx,)
    return (sw.stressed_index,)
