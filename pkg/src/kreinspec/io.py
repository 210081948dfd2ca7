"""Text input formats and JSON/CSV report writers.

Matrix files start with a header line ``n_plus n_minus`` followed by
row-major complex entries written ``re,im`` (a bare real number is also
accepted), separated by whitespace.  Block files hold ``S+``, ``S-`` and
``M`` in that order; perturbation files hold ``A0`` and then ``V``, both
``n x n`` with ``n = n_plus + n_minus`` and ``J = diag(I, -I)``.  ``#``
starts a comment.

Problem files are ``key = value`` lines with keys ``L``, ``n``,
``potential`` and, for ``potential = samples``, ``q`` plus optional
``m_minus`` and ``m_plus``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math

import numpy as np

from .blocks import assemble
from .perturbation import make_pair
from .sturm import Potential, SturmLiouvilleProblem

__all__ = [
    "ParseError",
    "parse_block",
    "parse_pair",
    "parse_problem",
    "format_matrix_file",
    "to_jsonable",
    "dumps_json",
    "spectrum_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("re_lambda", "im_lambda", "type", "j_norm")


class ParseError(ValueError):
    pass


def _strip_comments(text):
    return [line.split("#", 1)[0] for line in text.splitlines()]


def _complex_token(tok):
    parts = tok.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ParseError(f"bad complex entry {tok!r}; expected re,im")


def _read_matrices(text, shapes_from_header):
    lines = [ln for ln in _strip_comments(text) if ln.strip()]
    if not lines:
        raise ParseError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError("header must be 'n_plus n_minus'")
    try:
        n_plus, n_minus = (int(h) for h in head)
    except ValueError:
        raise ParseError("header must hold two integers") from None
    if n_plus < 0 or n_minus < 0 or n_plus + n_minus == 0:
        raise ParseError("dimensions must be non-negative and not both zero")
    tokens = [tok for ln in lines[1:] for tok in ln.split()]
    values = [_complex_token(t) for t in tokens]
    shapes = shapes_from_header(n_plus, n_minus)
    need = sum(r * c for r, c in shapes)
    if len(values) != need:
        raise ParseError(f"expected {need} entries for header {n_plus} {n_minus}, found {len(values)}")
    out, k = [], 0
    for r, c in shapes:
        out.append(np.array(values[k:k + r * c], dtype=complex).reshape(r, c))
        k += r * c
    return n_plus, n_minus, out


def parse_block(text):
    """Parse a block-operator file into a :class:`BlockOperator`."""
    _, _, (sp, sm, m) = _read_matrices(text, lambda p, q: [(p, p), (q, q), (p, q)])
    if sp.size == 0 or sm.size == 0:
        raise ParseError("both diagonal blocks must be non-empty")
    try:
        return assemble(sp, sm, m)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_pair(text):
    """Parse a perturbation file into a :class:`NonNegativePair`."""
    n_plus, n_minus, (a0, v) = _read_matrices(text, lambda p, q: [(p + q, p + q)] * 2)
    signs = [1] * n_plus + [-1] * n_minus
    try:
        return make_pair(a0, v, signs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_matrix_file(n_plus, n_minus, matrices):
    """Inverse of the matrix reader, with ``repr`` precision."""
    rows = [f"{n_plus} {n_minus}"]
    for M in matrices:
        for row in np.atleast_2d(M):
            rows.append(" ".join(f"{complex(z).real!r},{complex(z).imag!r}" for z in row))
    return "\n".join(rows) + "\n"


def parse_problem(text):
    """Parse a ``key = value`` problem file into a :class:`SturmLiouvilleProblem`."""
    fields = {}
    for ln in _strip_comments(text):
        if not ln.strip():
            continue
        key, sep, value = ln.partition("=")
        if not sep:
            raise ParseError(f"expected 'key = value', got {ln.strip()!r}")
        key = key.strip()
        if key in fields:
            raise ParseError(f"duplicate key {key!r}")
        fields[key] = value.strip()
    unknown = set(fields) - {"L", "n", "potential", "q", "m_minus", "m_plus"}
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}")
    for key in ("L", "n", "potential"):
        if key not in fields:
            raise ParseError(f"missing key {key!r}")
    try:
        L = float(fields["L"])
        n = int(fields["n"])
        if fields["potential"] == "samples":
            if "q" not in fields:
                raise ParseError("potential = samples needs q")
            q = [float(t) for t in fields["q"].replace(",", " ").split()]
            tails = None
            if "m_minus" in fields or "m_plus" in fields:
                tails = (float(fields["m_minus"]), float(fields["m_plus"]))
            pot = Potential.from_samples(q, tails)
        else:
            if "q" in fields:
                raise ParseError("q is only allowed with potential = samples")
            pot = Potential.parse(fields["potential"])
        return SturmLiouvilleProblem(L, n, pot)
    except ParseError:
        raise
    except (ValueError, KeyError) as exc:
        raise ParseError(str(exc)) from None


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers for JSON output."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(obj):
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def spectrum_csv(points):
    """CSV text with columns ``re_lambda, im_lambda, type, j_norm``."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow([repr(float(p.lam.real)), repr(float(p.lam.imag)), p.kind.value, repr(float(p.j_norm))])
    return buf.getvalue()
