"""TOML model definitions.

Three shorthand stanzas and one general form are accepted::

    [ising]              [iid]                  [zero]
    J = 0.5              p = [0.8, 0.2]         size = 2
    h = 0.0              symbols = ["a", "b"]

    alphabet = ["a", "b", "c"]
    range = 2
    [[term]]
    offsets = [0, 2]
    pattern = ["a", "c"]
    value = -0.4

An optional top-level ``id`` names the model; it defaults to the file stem.
Terms with the same offsets and pattern accumulate.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .potential import Alphabet, Interaction, iid_weights, ising, zero_interaction

_SHORTHANDS = ("ising", "iid", "zero")


class ModelFileError(ValueError):
    """Raised for malformed model files; the message carries ``path:line``."""


def load_model(path) -> Interaction:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"model file not found: {path}") from None
    return parse_model(text, source=str(path), default_id=path.stem)


def parse_model(text: str, source: str = "<model>", default_id: str = "model") -> Interaction:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ModelFileError(f"{source}: invalid TOML: {exc}") from None
    return model_from_dict(data, source=source, default_id=default_id, text=text)


def _term_lines(text: str | None) -> list[int]:
    if not text:
        return []
    return [
        lineno
        for lineno, line in enumerate(text.splitlines(), start=1)
        if re.match(r"^\s*\[\[\s*term\s*\]\]", line)
    ]


def model_from_dict(data: dict, source: str = "<model>", default_id: str = "model",
                    text: str | None = None) -> Interaction:
    name = str(data.get("id", default_id))
    present = [k for k in _SHORTHANDS if k in data]
    general = "alphabet" in data or "term" in data
    if len(present) + general != 1:
        raise ModelFileError(
            f"{source}: expected exactly one of [ising], [iid], [zero] or an "
            f"alphabet with [[term]] tables"
        )
    try:
        if "ising" in data:
            st = data["ising"]
            return ising(float(st.get("J", 0.0)), float(st.get("h", 0.0)), name=name)
        if "iid" in data:
            st = data["iid"]
            return iid_weights(st["p"], symbols=st.get("symbols"), name=name)
        if "zero" in data:
            st = data["zero"]
            symbols = st.get("symbols")
            return zero_interaction(symbols if symbols is not None else int(st.get("size", 2)), name=name)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{source}: {exc}") from None
    return _general(data, source, name, _term_lines(text))


def _general(data: dict, source: str, name: str, term_lines: list[int]) -> Interaction:
    if "alphabet" not in data:
        raise ModelFileError(f"{source}: missing 'alphabet'")
    try:
        alphabet = Alphabet(data["alphabet"])
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"{source}: alphabet: {exc}") from None
    R = data.get("range", 0)
    if not isinstance(R, int) or R < 0:
        raise ModelFileError(f"{source}: 'range' must be a non-negative integer")
    m = alphabet.size
    tables: dict[tuple, np.ndarray] = {}
    for t, term in enumerate(data.get("term", [])):
        where = f"{source}:{term_lines[t]}" if t < len(term_lines) else f"{source}: term {t + 1}"
        try:
            offsets = [int(o) for o in term["offsets"]]
            pattern = list(term["pattern"])
            value = float(term["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFileError(f"{where}: term needs offsets, pattern and value ({exc})") from None
        if not offsets or min(offsets) != 0:
            raise ModelFileError(f"{where}: offsets {offsets} must contain 0 as the smallest offset")
        if sorted(set(offsets)) != offsets:
            raise ModelFileError(f"{where}: offsets {offsets} must be strictly increasing")
        if offsets[-1] > R:
            raise ModelFileError(f"{where}: offsets {offsets} exceed range {R}")
        if len(pattern) != len(offsets):
            raise ModelFileError(f"{where}: pattern length {len(pattern)} != offsets length {len(offsets)}")
        if not math.isfinite(value):
            raise ModelFileError(f"{where}: value must be finite")
        try:
            idx = tuple(alphabet.index(s) for s in pattern)
        except ValueError as exc:
            raise ModelFileError(f"{where}: {exc}") from None
        key = tuple(offsets)
        table = tables.setdefault(key, np.zeros((m,) * len(key)))
        table[idx] += value
    return Interaction(alphabet, R, tables, name=name)


def dump_model(U: Interaction) -> str:
    """Render an interaction in the general ``[[term]]`` form."""
    lines = [f'id = "{U.name}"', f"alphabet = {_toml_list(U.alphabet.symbols)}", f"range = {U.range}"]
    for S, table in U.nonzero_terms().items():
        for idx in np.ndindex(table.shape):
            v = float(table[idx])
            if v == 0.0:
                continue
            pattern = [U.alphabet.symbols[i] for i in idx]
            lines += ["", "[[term]]", f"offsets = {list(S)}",
                      f"pattern = {_toml_list(pattern)}", f"value = {v!r}"]
    return "\n".join(lines) + "\n"


def _toml_list(items) -> str:
    parts = [f'"{s}"' if isinstance(s, str) else repr(s) for s in items]
    return "[" + ", ".join(parts) + "]"
