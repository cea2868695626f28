"""JSON formats for groups, cusp specs and certification reports."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import ConditionVerdict, summarize
from .cusps import GenCuspSpec
from .domains import PHI_FUNCTIONS, domain_from_json, domain_to_json  # noqa: F401  (re-export)
from .gallery import GALLERY
from .groups import DivergenceReport, MatrixGroup
from .numeric import FLOAT, SCALAR_KINDS, format_scalar, parse_scalar


class FormatError(ValueError):
    """Input file does not match the expected JSON layout."""


# ---------------------------------------------------------------- files


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: malformed JSON ({e})") from e


# ---------------------------------------------------------------- groups


def matrix_to_json(M, kind: str) -> list:
    return [[format_scalar(x, kind) for x in row] for row in np.asarray(M)]


def matrix_from_json(rows, kind: str, dim: int) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim or any(not isinstance(r, list) or len(r) != dim for r in rows):
        raise FormatError(f"matrix must be a {dim}x{dim} nested list")
    if kind == FLOAT:
        return np.array([[parse_scalar(x, kind) for x in r] for r in rows], dtype=float)
    return np.array([[parse_scalar(x, kind) for x in r] for r in rows], dtype=object)


def group_to_json(G: MatrixGroup) -> dict:
    out = {"dim": G.dim, "scalar": G.scalar_kind,
           "generators": [{"name": n, "matrix": matrix_to_json(g, G.scalar_kind)} for n, g in G.generators]}
    if G.closed_form is not None:
        out["closed_form"] = {"gallery": G.closed_form.gallery, "params": dict(G.closed_form.params)}
    return out


def group_from_json(d: dict) -> MatrixGroup:
    """Decode a group; a known ``closed_form`` entry re-attaches the gallery evaluator."""
    if not isinstance(d, dict):
        raise FormatError("group JSON must be an object")
    dim, kind, gens = d.get("dim"), d.get("scalar"), d.get("generators")
    if not isinstance(dim, int) or dim < 1:
        raise FormatError("'dim' must be a positive integer")
    if kind not in SCALAR_KINDS:
        raise FormatError(f"'scalar' must be one of {SCALAR_KINDS}")
    if not isinstance(gens, list) or not gens:
        raise FormatError("'generators' must be a non-empty list")
    parsed = []
    for i, g in enumerate(gens):
        if not isinstance(g, dict) or "matrix" not in g:
            raise FormatError(f"generator {i} needs a 'matrix'")
        try:
            parsed.append((str(g.get("name", f"g{i + 1}")), matrix_from_json(g["matrix"], kind, dim)))
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise FormatError(f"generator {i}: {e}") from e
    cf = d.get("closed_form")
    if cf:
        name = cf.get("gallery")
        if name not in GALLERY:
            raise FormatError(f"unknown closed_form gallery {name!r}")
        try:
            ref = GALLERY[name].build(**cf.get("params", {}))
        except (TypeError, ValueError) as e:
            raise FormatError(f"closed_form parameters: {e}") from e
        if ref.dim != dim or len(ref.generators) != len(parsed) or not all(
                np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), atol=1e-12)
                for (_, a), (_, b) in zip(ref.generators, parsed)):
            raise FormatError("generators do not match the closed_form family")
        return MatrixGroup(dim, parsed, kind, ref.closed_form)
    try:
        return MatrixGroup(dim, parsed, kind)
    except ValueError as e:
        raise FormatError(str(e)) from e


# ---------------------------------------------------------------- cusp specs


def cusp_spec_to_json(spec: GenCuspSpec, rho_file: str) -> dict:
    return {"s": spec.s, "psi": [float(x) for x in spec.psi], "rho": rho_file, "phi": spec.phi.name}


def cusp_spec_from_json(d: dict, base_dir=".") -> GenCuspSpec:
    try:
        s, psi, rho, phi = int(d["s"]), [float(x) for x in d["psi"]], d["rho"], d.get("phi", "quadratic")
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"cusp spec: {e}") from e
    if phi not in PHI_FUNCTIONS:
        raise FormatError(f"unknown phi {phi!r}")
    G = group_from_json(read_json(Path(base_dir) / rho))
    return GenCuspSpec(s, psi, G, PHI_FUNCTIONS[phi]())


# ---------------------------------------------------------------- reports


@dataclass
class CertificationReport:
    group: dict
    verdicts: dict[str, ConditionVerdict]
    summary: str
    divergence: DivergenceReport
    limit_flags: dict
    timings: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.summary != summarize(self.verdicts):
            raise ValueError(f"summary {self.summary!r} inconsistent with condition statuses")

    def to_json(self) -> dict:
        return {"group": self.group, "seed": self.seed, "summary": self.summary,
                "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
                "divergence": _clean(self.divergence.to_json()), "limit_flags": _clean(self.limit_flags),
                "timings": self.timings}

    @classmethod
    def from_json(cls, d: dict) -> "CertificationReport":
        return cls(d["group"], {k: ConditionVerdict.from_json(v) for k, v in d["verdicts"].items()},
                   d["summary"], DivergenceReport.from_json(_unclean(d["divergence"])),
                   _unclean(d["limit_flags"]), d.get("timings", {}), d.get("seed", 0))


def _clean(obj):
    """Strict JSON: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _unclean(obj):
    if isinstance(obj, dict):
        return {k: _unclean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unclean(v) for v in obj]
    if obj in ("nan", "inf", "-inf"):
        return float(obj)
    return obj
