"""Line-oriented spec files for manifolds, maps and forms.

Grammar::

    file    := { line }
    line    := blank | comment | section | pair
    comment := "#" any*
    section := "[" name "]"
    pair    := key "=" value
    value   := '"' item { "," item } '"' | bare
    item    := expression (coordinate expression or constant)

Sections: ``[manifold]`` (keys dim, p, q, name, coords, periodic), ``[metric]``
and ``[endomorphism]`` (one ``row`` per matrix row), ``[points]`` (lo, hi,
count, seed and repeated ``point``), ``[map]`` (repeated ``comp``) and
``[form]`` (degree and repeated ``term = "i j : re [: im]"`` with 1-based
indices). ``[form]`` may repeat; every other section appears at most once.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from .chart import Chart, EndoField, MetricField, sample_box
from .metallic import MetallicParams

SECTIONS = {
    "manifold": {"dim", "p", "q", "name", "coords", "periodic"},
    "metric": {"row"},
    "endomorphism": {"row"},
    "points": {"lo", "hi", "count", "seed", "point"},
    "map": {"comp", "name"},
    "form": {"degree", "term"},
}
REPEATABLE_KEYS = {"row", "point", "comp", "term"}


class SpecError(ValueError):
    def __init__(self, message: str, line: int, column: int, path: str = ""):
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.reason, self.line, self.column, self.path = message, line, column, path


@dataclass
class Value:
    text: str
    line: int
    col: int          # 1-based column of the first character of ``text``


@dataclass
class Section:
    name: str
    line: int
    pairs: list = field(default_factory=list)   # (key, Value)

    def get(self, key, default=None):
        vals = [v for k, v in self.pairs if k == key]
        return vals[-1] if vals else default

    def all(self, key):
        return [v for k, v in self.pairs if k == key]


def tokenize(text: str, path: str = "") -> list:
    sections: list = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lead = len(raw) - len(raw.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise SpecError("unterminated section header", lineno, lead + 1, path)
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                raise SpecError(f"unknown section [{name}]", lineno, lead + 2, path)
            if name != "form" and name in seen:
                raise SpecError(f"duplicate section [{name}]", lineno, lead + 1, path)
            seen.add(name)
            sections.append(Section(name, lineno))
            continue
        if "=" not in raw:
            raise SpecError("expected key = value", lineno, lead + 1, path)
        if not sections:
            raise SpecError("key outside any section", lineno, lead + 1, path)
        eq = raw.index("=")
        key = raw[:eq].strip()
        sec = sections[-1]
        if key not in SECTIONS[sec.name]:
            raise SpecError(f"unknown key {key!r} in [{sec.name}]", lineno, lead + 1, path)
        if key not in REPEATABLE_KEYS and sec.get(key) is not None:
            raise SpecError(f"duplicate key {key!r}", lineno, lead + 1, path)
        rest = raw[eq + 1:]
        vstart = eq + 1 + (len(rest) - len(rest.lstrip()))
        val = rest.strip()
        if val.startswith('"'):
            if len(val) < 2 or not val.endswith('"'):
                raise SpecError("unterminated quoted value", lineno, vstart + 1, path)
            sec.pairs.append((key, Value(val[1:-1], lineno, vstart + 2)))
        else:
            if "#" in val:
                val = val[: val.index("#")].rstrip()
            sec.pairs.append((key, Value(val, lineno, vstart + 1)))
    return sections


def _split(v: Value, sep: str = ","):
    """Items of a list value with their 1-based columns."""
    out, start = [], 0
    text = v.text
    while True:
        k = text.find(sep, start)
        piece = text[start:] if k < 0 else text[start:k]
        lead = len(piece) - len(piece.lstrip())
        out.append((piece.strip(), v.col + start + lead))
        if k < 0:
            return out
        start = k + 1


def _expr(item: str, col: int, line: int, n: int, names, path: str) -> E.Expr:
    try:
        return E.parse(item, n, names)
    except E.ParseError as exc:
        raise SpecError(exc.reason, line, col + exc.position, path) from None


def _number(v: Value, path: str, kind=float):
    try:
        if kind is int:
            return int(v.text)
        e = E.parse(v.text, 0)
        return float(e(()))
    except E.ParseError as exc:
        raise SpecError(exc.reason, v.line, v.col + exc.position, path) from None
    except ValueError:
        raise SpecError(f"expected an integer, got {v.text!r}", v.line, v.col, path) from None


def _numbers(v: Value, n: int, path: str) -> list:
    items = _split(v)
    if len(items) != n:
        raise SpecError(f"expected {n} numbers, got {len(items)}", v.line, v.col, path)
    return [_number(Value(t, v.line, c), path) for t, c in items]


def _matrix(sec: Section, n: int, names, path: str) -> list:
    rows = sec.all("row")
    if len(rows) != n:
        raise SpecError(f"[{sec.name}] needs {n} rows, got {len(rows)}", sec.line, 1, path)
    out = []
    for v in rows:
        items = _split(v)
        if len(items) != n:
            raise SpecError(f"row needs {n} entries, got {len(items)}", v.line, v.col, path)
        out.append([_expr(t, c, v.line, n, names, path) for t, c in items])
    return out


def _bool(v: Value, path: str) -> bool:
    t = v.text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise SpecError(f"expected true/false, got {v.text!r}", v.line, v.col, path)


@dataclass
class ManifoldSpec:
    name: str
    chart: Chart
    g: MetricField
    J: EndoField
    params: MetallicParams
    lo: tuple
    hi: tuple
    count: int | None
    seed: int | None
    points: list
    digest: str
    forms: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.chart.n

    def samples(self, count: int | None = None, seed: int | None = None) -> np.ndarray:
        """Explicit points first, then Halton samples in the box."""
        count = count if count is not None else (self.count if self.count is not None else 50)
        seed = seed if seed is not None else (self.seed if self.seed is not None else 0)
        pts = [np.asarray(p, dtype=float) for p in self.points]
        if count > 0:
            pts.extend(sample_box(self.lo, self.hi, count, seed))
        return np.array(pts, dtype=float).reshape(-1, self.n)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _one(sections, name):
    for s in sections:
        if s.name == name:
            return s
    return None


def _require(sec: Section, key: str, path: str) -> Value:
    v = sec.get(key)
    if v is None:
        raise SpecError(f"[{sec.name}] is missing {key!r}", sec.line, 1, path)
    return v


def parse_forms(sections, chart: Chart, path: str = "") -> list:
    from .forms import FormField

    forms = []
    for sec in (s for s in sections if s.name == "form"):
        deg_v = _require(sec, "degree", path)
        r = _number(deg_v, path, int)
        if not 0 <= r <= chart.n:
            raise SpecError(f"degree {r} outside 0..{chart.n}", deg_v.line, deg_v.col, path)
        acc = FormField(chart.n, r)
        for v in sec.all("term"):
            parts = _split(v, ":")
            if len(parts) not in (2, 3):
                raise SpecError("term needs 'indices : re [: im]'", v.line, v.col, path)
            idx_text, idx_col = parts[0]
            try:
                idx = [int(t) - 1 for t in idx_text.split()] if idx_text else []
            except ValueError:
                raise SpecError(f"bad multi-index {idx_text!r}", v.line, idx_col, path) from None
            if len(idx) != r or any(not 0 <= i < chart.n for i in idx):
                raise SpecError(f"multi-index must have {r} entries in 1..{chart.n}", v.line, idx_col, path)
            re = _expr(parts[1][0], parts[1][1], v.line, chart.n, chart.names, path)
            im = _expr(parts[2][0], parts[2][1], v.line, chart.n, chart.names, path) if len(parts) == 3 else E.ZERO
            acc = acc + FormField.dx(chart.n, *idx).scale((re, im))
        forms.append(acc)
    return forms


def parse_manifold(text: str, path: str = "") -> ManifoldSpec:
    sections = tokenize(text, path)
    man = _one(sections, "manifold")
    if man is None:
        raise SpecError("missing [manifold] section", 1, 1, path)
    dim_v = _require(man, "dim", path)
    n = _number(dim_v, path, int)
    if n < 1:
        raise SpecError("dim must be positive", dim_v.line, dim_v.col, path)
    names = tuple(t for t, _ in _split(man.get("coords"))) if man.get("coords") else ()
    if names and len(names) != n:
        v = man.get("coords")
        raise SpecError(f"expected {n} coordinate names", v.line, v.col, path)
    per_v = man.get("periodic")
    periodic = tuple(_bool(Value(t, per_v.line, c), path) for t, c in _split(per_v)) if per_v else ()
    if periodic and len(periodic) != n:
        raise SpecError(f"expected {n} periodicity flags", per_v.line, per_v.col, path)
    chart = Chart(n, names, periodic)
    params = MetallicParams(_number(_require(man, "p", path), path), _number(_require(man, "q", path), path))
    met, endo = _one(sections, "metric"), _one(sections, "endomorphism")
    if met is None or endo is None:
        raise SpecError("both [metric] and [endomorphism] are required", man.line, 1, path)
    g = MetricField(_matrix(met, n, chart.names, path))
    J = EndoField(_matrix(endo, n, chart.names, path))
    pts = _one(sections, "points")
    lo, hi = (-1.0,) * n, (1.0,) * n
    count = seed = None
    points = []
    if pts is not None:
        if pts.get("lo") is not None:
            lo = tuple(_numbers(pts.get("lo"), n, path))
        if pts.get("hi") is not None:
            hi = tuple(_numbers(pts.get("hi"), n, path))
        if any(a >= b for a, b in zip(lo, hi)):
            v = pts.get("hi") or pts.get("lo")
            raise SpecError("box needs lo < hi in every coordinate", v.line, v.col, path)
        if pts.get("count") is not None:
            count = _number(pts.get("count"), path, int)
        if pts.get("seed") is not None:
            seed = _number(pts.get("seed"), path, int)
        points = [tuple(_numbers(v, n, path)) for v in pts.all("point")]
    name_v = man.get("name")
    return ManifoldSpec(
        name=name_v.text if name_v else "",
        chart=chart, g=g, J=J, params=params, lo=lo, hi=hi, count=count, seed=seed, points=points,
        digest=digest(text), forms=parse_forms(sections, chart, path),
    )


@dataclass
class MapFile:
    comps: list          # expression texts
    digest: str


def parse_map(text: str, source: Chart, target_n: int, path: str = ""):
    from .foliation import MapSpec

    sections = tokenize(text, path)
    sec = _one(sections, "map")
    if sec is None:
        raise SpecError("missing [map] section", 1, 1, path)
    comps = sec.all("comp")
    if len(comps) != target_n:
        raise SpecError(f"map needs {target_n} components, got {len(comps)}", sec.line, 1, path)
    exprs = [_expr(v.text.strip(), v.col + len(v.text) - len(v.text.lstrip()), v.line, source.n, source.names, path)
             for v in comps]
    return MapSpec(source, Chart(target_n), tuple(exprs)), digest(text)


def load_manifold(path: str) -> ManifoldSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_manifold(fh.read(), path)


def load_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()
