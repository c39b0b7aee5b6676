"""System files, JSON result documents and CSV tables.

A system file is UTF-8 text with a ``key: value`` header followed by
``H = <expression>`` (the expression may continue over several lines)::

    dimension: 4
    variables: x, u, y, v
    order: 4
    mode: exact
    involution: R0hat
    symplectic: standard
    coordinates: original
    center: 0, 0, 0, 0
    constants: q = 1, a = 1, b = 0
    H = -q/sqrt((x-a)^2+(y-b)^2) + q/sqrt((x+a)^2+(y+b)^2)

``involution`` and ``symplectic`` accept a template name or a JSON matrix whose
entries are integers, ``"p/q"`` strings or decimals. ``symplectic`` is the
Poisson structure ``J`` in ``X_H = J grad H``.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io as _io
import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import templates
from .exprs import Expr, expand, parse_hamiltonian, polynomial_degree, taylor
from .linalg import exact_matrix, frac_str, is_exact, matrix_from_json, rank
from .poly import Poly, PolyVector, default_names

__all__ = [
    "SCHEMA_VERSION", "SystemFile", "SystemFileError", "parse_system", "load_system",
    "dump_system", "dump_results", "load_results", "to_jsonable", "write_text_atomic",
    "write_csv", "sha256_text", "config_hash",
]

SCHEMA_VERSION = "1.0"
_KEYS = ("dimension", "variables", "order", "mode", "involution", "symplectic",
         "coordinates", "center", "constants")


class SystemFileError(ValueError):
    """Validation failure; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class SystemFile:
    """Validated contents of a system file.

    Attributes
    ----------
    dimension : int
    hamiltonian : str
        Expression source text.
    involution : ndarray
        ``R`` (exact object array or float array).
    symplectic : ndarray
        Poisson structure ``J`` (``X_H = J grad H``).
    order : int
        Truncation order of the normal forms.
    mode : str
        ``"exact"`` or ``"float"``.
    center : list
        Expansion center (equilibrium).
    constants : dict
        Named constants bound in the expression.
    variables : tuple of str
    coordinates : str
        ``"original"`` or ``"canonical"``.
    involution_name, symplectic_name : str or None
        Template names when given by name.
    """

    dimension: int
    hamiltonian: str
    involution: np.ndarray
    symplectic: np.ndarray
    order: int = 4
    mode: str = "exact"
    center: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    variables: tuple = ()
    coordinates: str = "original"
    involution_name: str | None = None
    symplectic_name: str | None = None

    def __post_init__(self):
        n = self.dimension
        if not self.variables:
            self.variables = default_names(n)
        if not self.center:
            self.center = [Fraction(0)] * n
        self.validate()

    def validate(self) -> None:
        n = self.dimension
        if n not in (4, 6):
            raise SystemFileError("dimension", f"must be 4 or 6, got {n}")
        if len(self.variables) != n or len(set(self.variables)) != n:
            raise SystemFileError("variables", f"need {n} distinct names")
        if self.order < 2:
            raise SystemFileError("order", "truncation order must be >= 2")
        if self.mode not in ("exact", "float"):
            raise SystemFileError("mode", f"unknown mode {self.mode!r}")
        if self.coordinates not in ("original", "canonical"):
            raise SystemFileError("coordinates", "must be 'original' or 'canonical'")
        if len(self.center) != n:
            raise SystemFileError("center", f"need {n} entries")
        R = np.asarray(self.involution)
        if R.shape != (n, n):
            raise SystemFileError("involution", f"matrix must be {n}x{n}")
        sq = R @ R - np.eye(n, dtype=int)
        if is_exact(R):
            if any(v != 0 for v in sq.ravel()):
                raise SystemFileError("involution", "R^2 != Id")
        elif np.max(np.abs(sq.astype(float))) > 1e-12:
            raise SystemFileError("involution", "R^2 != Id (to 1e-12)")
        J = np.asarray(self.symplectic)
        if J.shape != (n, n):
            raise SystemFileError("symplectic", f"matrix must be {n}x{n}")
        anti = J + J.T
        if (is_exact(J) and any(v != 0 for v in anti.ravel())) or (
                not is_exact(J) and np.max(np.abs(anti.astype(float))) > 1e-12):
            raise SystemFileError("symplectic", "matrix must be antisymmetric")
        if rank(J) != n:
            raise SystemFileError("symplectic", "matrix must be invertible")
        for k in self.constants:
            if k in self.variables:
                raise SystemFileError("constants", f"{k!r} shadows a variable")
        try:
            self.expression()
        except ValueError as exc:
            raise SystemFileError("H", str(exc)) from exc

    def expression(self) -> Expr:
        return parse_hamiltonian(self.hamiltonian, self.variables, self.constants)

    def jet(self, order: int | None = None) -> Poly:
        """Taylor jet of ``H`` at the center (shifted coordinates)."""
        order = self.order if order is None else order
        return taylor(self.expression(), self.center, order, self.dimension, self.mode)

    def dynamics_polynomial(self) -> Poly:
        """Polynomial used for integration: the exact polynomial when ``H`` is
        one, else its Taylor jet at the truncation order."""
        e = self.expression()
        d = polynomial_degree(e)
        if d is not None and all(c == 0 for c in self.center):
            return expand(e, self.dimension, self.mode)
        return self.jet(max(self.order, d or 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemFile):
            return NotImplemented
        return (self.dimension == other.dimension and self.hamiltonian == other.hamiltonian
                and _mat_eq(self.involution, other.involution)
                and _mat_eq(self.symplectic, other.symplectic)
                and self.order == other.order and self.mode == other.mode
                and list(self.center) == list(other.center)
                and dict(self.constants) == dict(other.constants)
                and tuple(self.variables) == tuple(other.variables)
                and self.coordinates == other.coordinates)


def _mat_eq(A, B) -> bool:
    A, B = np.asarray(A), np.asarray(B)
    return A.shape == B.shape and all(a == b for a, b in zip(A.ravel(), B.ravel()))


def _scalar(s: str, exact: bool, fieldname: str):
    try:
        v = Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SystemFileError(fieldname, f"bad number {s!r}") from exc
    return v if exact else float(v)


def _matrix(value: str, n: int, fieldname: str, resolver):
    value = value.strip()
    if value.startswith("["):
        try:
            rows = json.loads(value)
        except json.JSONDecodeError as exc:
            raise SystemFileError(fieldname, f"bad matrix: {exc}") from exc
        if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
            raise SystemFileError(fieldname, "matrix must be a list of rows")
        try:
            return matrix_from_json(rows), None
        except (ValueError, ZeroDivisionError) as exc:
            raise SystemFileError(fieldname, str(exc)) from exc
    try:
        return resolver(value, n), value
    except (KeyError, ValueError) as exc:
        raise SystemFileError(fieldname, f"unknown template {value!r}") from exc


def parse_system(text: str) -> SystemFile:
    """Parse system-file text; see the module docstring for the format."""
    header: dict[str, str] = {}
    hbody = None
    lines = text.splitlines()
    for k, raw in enumerate(lines):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("H") and line[1:].lstrip().startswith("="):
            rest = line[1:].lstrip()[1:]
            more = [ln.split("#", 1)[0] for ln in lines[k + 1:]]
            hbody = " ".join([rest] + more).strip()
            break
        if ":" not in line:
            raise SystemFileError(f"line {k + 1}", "expected 'key: value' or 'H = ...'")
        key, val = (s.strip() for s in line.split(":", 1))
        if key not in _KEYS:
            raise SystemFileError(key, "unknown header key")
        header[key] = val
    if hbody is None or not hbody:
        raise SystemFileError("H", "missing Hamiltonian line 'H = ...'")
    if "dimension" not in header:
        raise SystemFileError("dimension", "missing")
    try:
        n = int(header["dimension"])
    except ValueError as exc:
        raise SystemFileError("dimension", "must be an integer") from exc
    mode = header.get("mode", "exact")
    exact = mode == "exact"
    variables = tuple(v.strip() for v in header["variables"].split(",")) if "variables" in header \
        else default_names(n)
    try:
        order = int(header.get("order", 4))
    except ValueError as exc:
        raise SystemFileError("order", "must be an integer") from exc
    center = [_scalar(c, exact, "center") for c in header["center"].split(",")] \
        if "center" in header else [Fraction(0)] * n
    constants = {}
    if header.get("constants"):
        for item in header["constants"].split(","):
            if "=" not in item:
                raise SystemFileError("constants", f"expected name = value, got {item!r}")
            name, val = (s.strip() for s in item.split("=", 1))
            constants[name] = _scalar(val, exact, "constants")
    if "involution" not in header:
        raise SystemFileError("involution", "missing")
    R, rname = _matrix(header["involution"], n, "involution", templates.named_involution)
    if "symplectic" in header:
        J, jname = _matrix(header["symplectic"], n, "symplectic", templates.named_structure)
    else:
        J, jname = templates.standard_structure(n), "standard"
    return SystemFile(dimension=n, hamiltonian=hbody, involution=R, symplectic=J,
                      order=order, mode=mode, center=center, constants=constants,
                      variables=variables, coordinates=header.get("coordinates", "original"),
                      involution_name=rname, symplectic_name=jname)


def load_system(path) -> SystemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read system file {path}: {exc}") from exc
    return parse_system(text)


def _scalar_text(v) -> str:
    return frac_str(v)


def _matrix_text(M) -> str:
    M = np.asarray(M)
    return json.dumps([[frac_str(v) if is_exact(M) else float(v) for v in row] for row in M])


def dump_system(S: SystemFile) -> str:
    """Text form of ``S``; ``parse_system(dump_system(S)) == S``."""
    out = [f"dimension: {S.dimension}",
           f"variables: {', '.join(S.variables)}",
           f"order: {S.order}",
           f"mode: {S.mode}",
           f"coordinates: {S.coordinates}",
           "involution: " + (S.involution_name or _matrix_text(S.involution)),
           "symplectic: " + (S.symplectic_name or _matrix_text(S.symplectic)),
           "center: " + ", ".join(_scalar_text(c) for c in S.center)]
    if S.constants:
        out.append("constants: " + ", ".join(f"{k} = {_scalar_text(v)}" for k, v in S.constants.items()))
    out.append(f"H = {S.hamiltonian}")
    return "\n".join(out) + "\n"


def to_jsonable(obj: Any) -> Any:
    """Convert results (Fractions, arrays, Polys, dataclasses) to JSON types."""
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return repr(v)
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Poly):
        return obj.to_text()
    if isinstance(obj, PolyVector):
        return obj.to_text()
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.dtype != object else \
            [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def sha256_text(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def config_hash(config: Mapping) -> str:
    return sha256_text(json.dumps(to_jsonable(config), sort_keys=True, separators=(",", ":")))[:16]


def write_text_atomic(path, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dump_results(results: Mapping, path, *, kind: str, provenance: Mapping | None = None) -> Path:
    """Write a JSON result document with schema version and provenance.

    Parameters
    ----------
    results : mapping
        Payload (converted with :func:`to_jsonable`).
    path : path-like
    kind : str
        Document kind, e.g. ``"canonical_model"`` or ``"branches"``.
    provenance : mapping, optional
        Input hash, order, mode, config hash, case tag and seed.
    """
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind,
           "provenance": to_jsonable(dict(provenance or {})),
           "payload": to_jsonable(results)}
    return write_text_atomic(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_results(path, kind: str | None = None) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SystemFileError("schema_version", f"unsupported {doc.get('schema_version')!r}")
    if kind is not None and doc.get("kind") != kind:
        raise SystemFileError("kind", f"expected {kind!r}, found {doc.get('kind')!r}")
    return doc


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return write_text_atomic(path, buf.getvalue())
