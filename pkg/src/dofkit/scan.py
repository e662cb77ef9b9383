"""Scan a directory of flat key/value config files for facts encoded in several places.

A key that appears in two or more files is treated as one fact; every file
holding it is an encoding location. Values are compared as strings after
trimming whitespace and surrounding quotes, so ``0.5`` and ``0.50`` differ.

An optional ``derivation.manifest`` in the root declares file-level
derivations, one ``derived <path> from <path>`` per line. For every key both
files hold, the derived file's entry counts as derived rather than
independent.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import side_info_requirement
from .dof import compute_dof
from .errors import ConfigParseError, ScanIoError
from .model import DerivationGraph, Edge, Fact, Location, SystemState

MANIFEST_NAME = "derivation.manifest"
DEFAULT_EXTENSIONS = (".yaml", ".yml", ".json", ".toml", ".ini", ".cfg", ".conf", ".env", ".properties")
KEY_IDENTITY_ASSUMPTION = "facts are identified by key-name equality across files"

_STRUCTURAL = {"{", "}", "[", "]", "},", "],", "---", "..."}


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def parse_config(text: str, path: str = "<string>", suffix: str = "") -> list[tuple[str, str, int]]:
    """Parse flat ``key = value`` / ``key: value`` lines into ``(key, value, line)`` triples.

    ``[section]`` headers prefix following keys with ``section.``. Blank lines,
    ``#``/``;``/``//`` comments and lines holding only a brace or bracket are
    skipped. Any other line without a separator is an error, as is a value
    that opens a nested structure.
    """
    out: list[tuple[str, str, int]] = []
    seen: dict[str, int] = {}
    section = ""
    json_like = suffix == ".json"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";", "//")) or line in _STRUCTURAL:
            continue
        if line.startswith("[") and line.endswith("]") and not json_like:
            section = line[1:-1].strip()
            continue
        if json_like and line.endswith(","):
            line = line[:-1].rstrip()
        cuts = [i for i in (line.find("="), line.find(":")) if i > 0]
        if line.startswith(("'", '"')):
            close = line.find(line[0], 1)
            cuts = [i for i in cuts if i > close] if close > 0 else []
        if not cuts:
            raise ConfigParseError(path, lineno, f"expected 'key = value' or 'key: value', got {raw.strip()!r}")
        cut = min(cuts)
        key = _unquote(line[:cut])
        value = _unquote(line[cut + 1 :])
        if value in ("{", "["):
            raise ConfigParseError(path, lineno, f"nested value for key {key!r} is not supported")
        if section:
            key = f"{section}.{key}"
        if not key:
            raise ConfigParseError(path, lineno, "empty key")
        if key in seen:
            raise ConfigParseError(path, lineno, f"key {key!r} already set on line {seen[key]}")
        seen[key] = lineno
        out.append((key, value, lineno))
    return out


def parse_manifest(text: str, path: str = MANIFEST_NAME) -> list[tuple[str, str]]:
    """Return ``(source, derived)`` path pairs."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if len(toks) != 4 or toks[0] != "derived" or toks[2] != "from":
            raise ConfigParseError(path, lineno, "expected 'derived <path> from <path>'")
        out.append((toks[3], toks[1]))
    return out


@dataclass(frozen=True)
class ScanLocation:
    path: str
    line: int
    value: str
    derived_from: str | None = None


@dataclass(frozen=True)
class ScanResult:
    key: str
    locations: tuple[ScanLocation, ...]
    k: int
    dof: int
    coherent: bool
    side_info_bits: float

    @property
    def stale(self) -> tuple[str, ...]:
        """Derived entries whose value no longer matches their source."""
        by_path = {loc.path: loc.value for loc in self.locations}
        return tuple(
            loc.path for loc in self.locations if loc.derived_from and by_path[loc.derived_from] != loc.value
        )

    @property
    def domain_size(self) -> int:
        return max(2, self.k)

    def value_tokens(self) -> dict[str, int]:
        """Raw value -> token index, in sorted string order."""
        return {v: i for i, v in enumerate(sorted({loc.value for loc in self.locations}))}

    def graph(self) -> DerivationGraph:
        locs = frozenset(Location(loc.path, self.key) for loc in self.locations)
        edges = frozenset((loc.derived_from, loc.path) for loc in self.locations if loc.derived_from)
        return DerivationGraph(locs, edges)

    def state(self) -> SystemState:
        """Encoding model of this key; fails if a derived entry is stale."""
        tokens = self.value_tokens()
        return SystemState(
            self.graph(),
            {self.key: Fact(self.key, self.domain_size)},
            {loc.path: tokens[loc.value] for loc in self.locations},
        )

    def record(self) -> dict:
        return {
            "key": self.key,
            "k": self.k,
            "dof": self.dof,
            "coherent": self.coherent,
            "side_info_bits": self.side_info_bits,
            "locations": [
                {"path": loc.path, "line": loc.line, "value": loc.value, "derived_from": loc.derived_from}
                for loc in self.locations
            ],
        }


@dataclass(frozen=True)
class ScanReport:
    root: str
    results: tuple[ScanResult, ...]
    files: tuple[str, ...]
    unparsed: tuple[tuple[str, str], ...] = ()
    assumption: str = field(default=KEY_IDENTITY_ASSUMPTION)

    @property
    def incoherent(self) -> tuple[ScanResult, ...]:
        return tuple(r for r in self.results if not r.coherent)


def _walk(root: Path, extensions: Sequence[str]) -> list[str]:
    exts = {e.lower() if e.startswith(".") else "." + e.lower() for e in extensions}
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        for name in filenames:
            if name == MANIFEST_NAME:
                continue
            p = Path(dirpath, name)
            if p.suffix.lower() in exts:
                found.append(p.relative_to(root).as_posix())
    return sorted(found)


def _read(root: Path, rel: str) -> tuple[str, list[tuple[str, str, int]] | ConfigParseError]:
    p = root / rel
    try:
        text = p.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScanIoError(f"{p}: {exc}") from exc
    try:
        return rel, parse_config(text, rel, p.suffix.lower())
    except ConfigParseError as exc:
        return rel, exc


def scan_directory(
    path: str | os.PathLike,
    extensions: Iterable[str] = DEFAULT_EXTENSIONS,
    lenient: bool = False,
    max_workers: int = 4,
) -> ScanReport:
    root = Path(path)
    if not root.is_dir():
        raise ScanIoError(f"{root}: not a readable directory")
    try:
        files = _walk(root, tuple(extensions))
    except OSError as exc:  # pragma: no cover - permission races
        raise ScanIoError(f"{root}: {exc}") from exc

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        parsed = list(pool.map(lambda rel: _read(root, rel), files))

    entries: dict[str, dict[str, tuple[str, int]]] = {}
    unparsed = []
    for rel, result in parsed:  # files are sorted, so the merge is deterministic
        if isinstance(result, ConfigParseError):
            if not lenient:
                raise result
            unparsed.append((rel, str(result)))
            continue
        for key, value, line in result:
            entries.setdefault(key, {})[rel] = (value, line)

    derivations: list[Edge] = []
    manifest = root / MANIFEST_NAME
    if manifest.is_file():
        derivations = parse_manifest(manifest.read_text(encoding="utf-8"))
    derived_from = {}
    for src, dst in derivations:
        derived_from.setdefault(dst, src)

    results = []
    for key in sorted(entries):
        holders = entries[key]
        if len(holders) < 2:
            continue
        locs = tuple(
            ScanLocation(
                rel,
                holders[rel][1],
                holders[rel][0],
                derived_from[rel] if derived_from.get(rel) in holders else None,
            )
            for rel in sorted(holders)
        )
        k = len({loc.value for loc in locs})
        partial = ScanResult(key, locs, k, 0, k == 1, 0.0)
        dof = compute_dof(partial.graph()).dof
        results.append(ScanResult(key, locs, k, dof, k == 1, side_info_requirement(k)))
    return ScanReport(str(root), tuple(results), tuple(files), tuple(unparsed))
