"""
Flat ``key = value`` configuration files.

Keys may carry dotted sections (``grid.T = 1.0``). Blank lines and lines
starting with ``#`` are ignored. Values stay as the raw strings they were
written as, so a parsed config renders back to an equivalent file; typed
access goes through the ``get_*`` helpers, which name the offending key and
line on failure.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


@dataclass
class Config:
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)
    used: set = field(default_factory=set)

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def _raw(self, key: str):
        self.used.add(key)
        return self.values.get(key)

    def _fail(self, key: str, msg: str):
        raise ConfigError(f"{key}: {msg}", line=self.lines.get(key), field=key)

    def get_str(self, key: str, default: str | None = None, choices=None) -> str | None:
        v = self._raw(key)
        if v is None:
            return default
        if choices is not None and v not in choices:
            self._fail(key, f"expected one of {list(choices)}, got {v!r}")
        return v

    def get_float(self, key: str, default: float | None = None, positive: bool = False,
                  nonneg: bool = False) -> float | None:
        v = self._raw(key)
        if v is None:
            return default
        try:
            x = float(v)
        except ValueError:
            self._fail(key, f"not a number: {v!r}")
        if x != x or x in (float("inf"), float("-inf")):
            self._fail(key, "must be finite")
        if positive and not x > 0:
            self._fail(key, f"must be positive, got {v}")
        if nonneg and x < 0:
            self._fail(key, f"must be non-negative, got {v}")
        return x

    def get_int(self, key: str, default: int | None = None, minimum: int | None = None) -> int | None:
        v = self._raw(key)
        if v is None:
            return default
        try:
            x = int(v)
        except ValueError:
            self._fail(key, f"not an integer: {v!r}")
        if minimum is not None and x < minimum:
            self._fail(key, f"must be >= {minimum}, got {x}")
        return x

    def get_list(self, key: str, kind=float, default=None, increasing: bool = False):
        v = self._raw(key)
        if v is None:
            return default
        try:
            out = [kind(s) for s in v.split(",") if s.strip()]
        except ValueError:
            self._fail(key, f"not a comma-separated list of {kind.__name__}: {v!r}")
        if not out:
            self._fail(key, "empty list")
        if increasing and any(b <= a for a, b in zip(out, out[1:])):
            self._fail(key, "values must be strictly increasing")
        return out

    def section(self, prefix: str) -> dict[str, str]:
        """Raw values under ``prefix.``, keyed by the remainder of the key."""
        p = prefix + "."
        out = {}
        for k, v in self.values.items():
            if k.startswith(p):
                self.used.add(k)
                out[k[len(p):]] = v
        return out

    def render(self) -> str:
        return "".join(f"{k} = {self.values[k]}\n" for k in sorted(self.values))


def parse_config(text: str) -> Config:
    cfg = Config()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not _KEY.match(key):
            raise ConfigError(f"line {lineno}: invalid key {key!r}", line=lineno, field=key)
        if key in cfg.values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno, field=key)
        if value == "":
            raise ConfigError(f"line {lineno}: empty value for {key!r}", line=lineno, field=key)
        cfg.values[key] = value
        cfg.lines[key] = lineno
    return cfg


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
