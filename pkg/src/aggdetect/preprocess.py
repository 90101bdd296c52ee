"""Comment normalization: cleaning, minor stemming, script handling,
and dictionary-based spell correction.

``clean_text`` applies, in order: lowercasing, URL/email/number removal,
whole-token expansion rewrites, minor per-token stemming, and whitespace
collapsing.  The whole function is idempotent, which downstream code
relies on (a cleaned corpus can safely be cleaned again).
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ResourceError
from .translit import TABLE_VERSION, is_devanagari, transliterate, transliterate_with_count

transliterate_devanagari = transliterate

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_EMAIL_RE = re.compile(r"[\w.+-]+@[\w-]+\.[\w.-]+")
# Standalone digit runs only; digits embedded in alphanumeric tokens
# (slang like "b4") survive.
_NUMBER_RE = re.compile(r"(?<!\S)\d+(?!\S)")
_WS_RE = re.compile(r"\s+")

# Tokens the plural-s rule must never touch.
NO_STRIP = frozenset(
    {"this", "his", "was", "is", "as", "us", "thus", "yes", "its", "has", "news", "does", "goes"}
)

DEFAULT_EXPANSIONS: dict[str, str] = {
    "u": "you",
    "r": "are",
    "ur": "your",
    "y": "why",
    "plz": "please",
    "pls": "please",
    "thx": "thanks",
    "gr8": "great",
    "dont": "do not",
    "don't": "do not",
    "cant": "can not",
    "can't": "can not",
    "wont": "will not",
    "won't": "will not",
    "im": "i am",
    "i'm": "i am",
}


@dataclass(frozen=True)
class CleanConfig:
    lowercase: bool = True
    strip_urls: bool = True
    strip_emails: bool = True
    strip_numbers: bool = True
    minor_stemming: bool = True
    expansions: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_EXPANSIONS))

    @staticmethod
    def for_language(language: str) -> "CleanConfig":
        # Stemming and contraction expansion are English-specific; romanized
        # Hindi keeps URL/email/number removal and lowercasing only.
        if language == "hindi":
            return CleanConfig(minor_stemming=False, expansions={})
        return CleanConfig()


def _stem_once(token: str) -> str:
    if token.endswith("'s"):
        stem = token[:-2]
        if not stem.isdigit():
            token = stem
    if token.endswith("s") and token not in NO_STRIP:
        stem = token[:-1]
        if len(stem) >= 3 and not stem.isdigit():
            token = stem
    if token.endswith("ing"):
        stem = token[:-3]
        if len(stem) >= 4 and not stem.isdigit():
            token = stem
    return token


def _stem_token(token: str) -> str:
    # Iterate to a fixed point so that cleaning is idempotent even when one
    # strip exposes another suffix (e.g. "passings" -> "pass" -> "pas").
    while True:
        stemmed = _stem_once(token)
        if stemmed == token:
            return token
        token = stemmed


_MAX_REWRITE_DEPTH = 8


def _rewrite_token(token: str, config: CleanConfig, depth: int = 0) -> list[str]:
    # Expansion, then stemming; a stem result that is itself an expansion
    # key re-enters ("u's" -> "u" -> "you"), so one pass reaches the same
    # fixed point a second pass would. The depth cap guards against
    # pathological user-defined rewrite cycles.
    if depth < _MAX_REWRITE_DEPTH:
        replacement = config.expansions.get(token)
        if replacement is not None and replacement.split() != [token]:
            parts: list[str] = []
            for part in replacement.split():
                parts.extend(_rewrite_token(part, config, depth + 1))
            return parts
    if not config.minor_stemming:
        return [token]
    stemmed = _stem_token(token)
    if stemmed != token and depth < _MAX_REWRITE_DEPTH and stemmed in config.expansions:
        return _rewrite_token(stemmed, config, depth + 1)
    return [stemmed]


def clean_text(text: str, config: CleanConfig | None = None) -> str:
    """Normalize one comment. Total and idempotent."""
    config = config or CleanConfig()
    if config.lowercase:
        text = text.lower()
    if config.strip_urls:
        text = _URL_RE.sub(" ", text)
    if config.strip_emails:
        text = _EMAIL_RE.sub(" ", text)
    if config.strip_numbers:
        text = _NUMBER_RE.sub(" ", text)

    tokens: list[str] = []
    if config.expansions or config.minor_stemming:
        for token in text.split():
            tokens.extend(_rewrite_token(token, config))
    else:
        tokens = text.split()

    return _WS_RE.sub(" ", " ".join(tokens)).strip()


@dataclass(frozen=True)
class ScriptProfile:
    """Per-script character fractions over the script-bearing (letter)
    characters of a text. All zero when the text has no letters."""

    devanagari_fraction: float
    latin_fraction: float
    other_fraction: float


def script_profile(text: str) -> ScriptProfile:
    devanagari = latin = other = 0
    for ch in text:
        if is_devanagari(ch):
            if unicodedata.category(ch).startswith(("L", "M")):
                devanagari += 1
        elif ("a" <= ch <= "z") or ("A" <= ch <= "Z"):
            latin += 1
        elif unicodedata.category(ch).startswith("L"):
            other += 1
    total = devanagari + latin + other
    if total == 0:
        return ScriptProfile(0.0, 0.0, 0.0)
    return ScriptProfile(devanagari / total, latin / total, other / total)


@dataclass
class SpellDictionary:
    """Token -> frequency map used for distance-1 spell correction."""

    entries: dict[str, int]

    def __post_init__(self) -> None:
        self._alphabet = sorted({ch for token in self.entries for ch in token})

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries


def load_spell_dictionary(path: str | Path) -> SpellDictionary:
    """Read a ``token<TAB>count`` dictionary file."""
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"spell dictionary not found: {path}")
    entries: dict[str, int] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ResourceError(f"{path}: malformed dictionary row at line {lineno}")
        token, count_str = parts
        try:
            count = int(count_str)
        except ValueError:
            raise ResourceError(f"{path}: bad count at line {lineno}: {count_str!r}") from None
        if count < 1:
            raise ResourceError(f"{path}: count must be >= 1 at line {lineno}")
        entries[token.lower()] = entries.get(token.lower(), 0) + count
    return SpellDictionary(entries)


def save_spell_dictionary(dictionary: SpellDictionary, path: str | Path) -> None:
    lines = [f"{token}\t{count}\n" for token, count in sorted(dictionary.entries.items())]
    Path(path).write_text("".join(lines), encoding="utf-8")


def _edits1(token: str, alphabet: list[str]) -> set[str]:
    # Damerau-style single edits: deletes, adjacent transposes, replaces,
    # inserts. Transpositions count as one edit, matching how misspellings
    # like "dgo" are expected to resolve to "dog".
    splits = [(token[:i], token[i:]) for i in range(len(token) + 1)]
    edits = {left + right[1:] for left, right in splits if right}
    edits.update(
        left + right[1] + right[0] + right[2:] for left, right in splits if len(right) > 1
    )
    for left, right in splits:
        for ch in alphabet:
            edits.add(left + ch + right)
            if right:
                edits.add(left + ch + right[1:])
    edits.discard(token)
    return edits


def spell_correct(tokens: list[str], dictionary: SpellDictionary) -> list[str]:
    """Correct out-of-dictionary tokens to their best distance-1 neighbor.

    In-dictionary tokens are never changed.  Candidates are ranked by
    dictionary frequency, ties broken lexicographically; tokens with no
    candidate stay as they are.
    """
    entries = dictionary.entries
    alphabet = dictionary._alphabet
    corrected: list[str] = []
    cache: dict[str, str] = {}
    for token in tokens:
        if token in entries:
            corrected.append(token)
            continue
        if token in cache:
            corrected.append(cache[token])
            continue
        candidates = [edit for edit in _edits1(token, alphabet) if edit in entries]
        if candidates:
            best = min(candidates, key=lambda c: (-entries[c], c))
        else:
            best = token
        cache[token] = best
        corrected.append(best)
    return corrected


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class PreprocessSettings:
    """Everything needed to replay preprocessing at prediction time."""

    clean: CleanConfig
    transliterate: bool = False
    spell_dictionary: SpellDictionary | None = None
    translit_table_version: int = TABLE_VERSION

    def apply(self, text: str) -> str:
        if self.transliterate and any(is_devanagari(ch) for ch in text):
            text = transliterate(text)
        text = clean_text(text, self.clean)
        if self.spell_dictionary is not None and text:
            text = " ".join(spell_correct(text.split(" "), self.spell_dictionary))
        return text

    def apply_with_stats(self, text: str) -> tuple[str, int]:
        """Like :meth:`apply` but also reports unknown-Devanagari count."""
        unknown = 0
        if self.transliterate and any(is_devanagari(ch) for ch in text):
            text, unknown = transliterate_with_count(text)
        text = clean_text(text, self.clean)
        if self.spell_dictionary is not None and text:
            text = " ".join(spell_correct(text.split(" "), self.spell_dictionary))
        return text, unknown
