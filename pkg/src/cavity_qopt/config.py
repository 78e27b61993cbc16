"""JSON problem descriptions: parsing, validation, and hashing.

A configuration file is a UTF-8 JSON object with the keys

* ``interval``: ``{"a1": number, "a2": number}`` — the cavity.
* ``nu1``, ``nu2``: boundary impedance parameters; ``nu2`` may be the
  string ``"inf"`` for the hard-wall (Dirichlet) right end.
* ``b1``, ``b2``: step functions ``{"breakpoints": [...], "values": [...]}``
  bounding the admissible family from below and above.  ``breakpoints``
  must start exactly at ``a1`` and end exactly at ``a2``.
* ``B`` (optional): a concrete structure in the same step-function form.
* ``scan`` (optional): default scan-grid settings and per-rectangle
  override patches, see :class:`ScanSettings`.
* ``tol`` (optional): default numerical tolerance for this problem.

``b1``/``b2`` may be omitted together for runs that only need boundary
data and a concrete profile (``spectrum``, ``homog``, ``turning``).
All validation failures raise :class:`~cavity_qopt.errors.ConfigError`.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from typing import Optional, Union

from .errors import CavityError, ConfigError
from .model import (
    AdmissibleFamily,
    BoundaryParams,
    Interval,
    PiecewiseConstant,
    ResonatorConfig,
    StepFunction,
)

__all__ = [
    "PatchSettings",
    "ScanSettings",
    "LoadedConfig",
    "parse_config",
    "load_config",
]


@dataclasses.dataclass(frozen=True)
class PatchSettings:
    """Grid override for one rectangle of a scan.

    Fields left as None inherit from the base scan settings (or from the
    command line / built-in defaults).
    """

    rect: tuple[float, float, float, float]
    h_re: Optional[float] = None
    h_im: Optional[float] = None
    n_xi: Optional[int] = None
    eps: Optional[float] = None


@dataclasses.dataclass(frozen=True)
class ScanSettings:
    """Scan defaults carried by a configuration file.

    ``patches`` lists rectangles that are scanned in addition to the
    base rectangle, each with its own (usually finer) step sizes.
    """

    rect: Optional[tuple[float, float, float, float]] = None
    h_re: Optional[float] = None
    h_im: Optional[float] = None
    n_xi: Optional[int] = None
    eps: Optional[float] = None
    statistic: Optional[str] = None
    patches: tuple[PatchSettings, ...] = ()


@dataclasses.dataclass(frozen=True)
class LoadedConfig:
    """A parsed configuration plus the hash of its raw bytes."""

    resonator: ResonatorConfig
    family: Optional[AdmissibleFamily]
    profile: Optional[PiecewiseConstant]
    scan: Optional[ScanSettings]
    tol: Optional[float]
    sha256: str
    path: Optional[str] = None


def _want(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    out = float(value)
    if math.isnan(out):
        raise ConfigError(f"{where}: NaN is not allowed")
    return out


def _finite(value, where: str) -> float:
    out = _number(value, where)
    if math.isinf(out):
        raise ConfigError(f"{where}: must be finite")
    return out


def _step_function(obj, iv: Interval, where: str) -> StepFunction:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object with "
                          f"'breakpoints' and 'values'")
    bps = _want(obj, "breakpoints", where)
    vals = _want(obj, "values", where)
    extra = set(obj) - {"breakpoints", "values"}
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    if not isinstance(bps, list) or not isinstance(vals, list):
        raise ConfigError(f"{where}: 'breakpoints' and 'values' must be arrays")
    if len(bps) < 2:
        raise ConfigError(f"{where}: need at least two breakpoints")
    if len(vals) != len(bps) - 1:
        raise ConfigError(f"{where}: {len(bps)} breakpoints require "
                          f"{len(bps) - 1} values, got {len(vals)}")
    xs = [_finite(b, f"{where}.breakpoints[{i}]") for i, b in enumerate(bps)]
    ys = [_finite(v, f"{where}.values[{i}]") for i, v in enumerate(vals)]
    if xs[0] != iv.a1 or xs[-1] != iv.a2:
        raise ConfigError(f"{where}: breakpoints must start at a1={iv.a1!r} "
                          f"and end at a2={iv.a2!r} exactly "
                          f"(got {xs[0]!r} .. {xs[-1]!r})")
    for i in range(len(xs) - 1):
        if not xs[i] < xs[i + 1]:
            raise ConfigError(f"{where}: breakpoints must be strictly "
                              f"increasing (violated at index {i})")
    try:
        return StepFunction(tuple(xs), tuple(ys))
    except (CavityError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _rect4(value, where: str) -> tuple[float, float, float, float]:
    if not isinstance(value, list) or len(value) != 4:
        raise ConfigError(f"{where}: expected [re_min, re_max, im_min, im_max]")
    r = tuple(_finite(v, f"{where}[{i}]") for i, v in enumerate(value))
    if not (r[0] < r[1] and r[2] < r[3]):
        raise ConfigError(f"{where}: rectangle must satisfy "
                          f"re_min < re_max and im_min < im_max")
    return r


def _positive(value, where: str) -> float:
    out = _finite(value, where)
    if out <= 0.0:
        raise ConfigError(f"{where}: must be positive")
    return out


def _pos_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ConfigError(f"{where}: expected a positive integer")
    return value


def _scan_fields(obj: dict, where: str) -> dict:
    out = {}
    if "rect" in obj:
        out["rect"] = _rect4(obj["rect"], f"{where}.rect")
    if "h_re" in obj:
        out["h_re"] = _positive(obj["h_re"], f"{where}.h_re")
    if "h_im" in obj:
        out["h_im"] = _positive(obj["h_im"], f"{where}.h_im")
    if "n_xi" in obj:
        out["n_xi"] = _pos_int(obj["n_xi"], f"{where}.n_xi")
    if "eps" in obj:
        out["eps"] = _positive(obj["eps"], f"{where}.eps")
    return out


def _scan_settings(obj, where: str) -> ScanSettings:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {"rect", "h_re", "h_im", "n_xi", "eps", "statistic", "patches"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    fields = _scan_fields(obj, where)
    stat = obj.get("statistic")
    if stat is not None and stat not in ("min", "max"):
        raise ConfigError(f"{where}.statistic: expected 'min' or 'max'")
    patches = []
    for i, p in enumerate(obj.get("patches", [])):
        pw = f"{where}.patches[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(f"{pw}: expected an object")
        pextra = set(p) - {"rect", "h_re", "h_im", "n_xi", "eps"}
        if pextra:
            raise ConfigError(f"{pw}: unknown keys {sorted(pextra)}")
        pf = _scan_fields(p, pw)
        if "rect" not in pf:
            raise ConfigError(f"{pw}: patches require a 'rect'")
        patches.append(PatchSettings(**pf))
    return ScanSettings(statistic=stat, patches=tuple(patches), **fields)


def parse_config(data: Union[bytes, str], path: Optional[str] = None) -> LoadedConfig:
    """Parse configuration bytes (or text) into validated objects.

    The SHA-256 recorded in the result is computed over the exact bytes
    given (text is hashed as UTF-8), so byte-identical files hash equal.
    """
    if isinstance(data, str):
        raw_bytes = data.encode("utf-8")
    else:
        raw_bytes = bytes(data)
    digest = hashlib.sha256(raw_bytes).hexdigest()
    try:
        doc = json.loads(raw_bytes.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigError(f"configuration is not valid UTF-8: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top-level configuration must be a JSON object")

    known = {"interval", "nu1", "nu2", "b1", "b2", "B", "scan", "tol"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown top-level keys {sorted(extra)}")

    iv_obj = _want(doc, "interval", "config")
    if not isinstance(iv_obj, dict):
        raise ConfigError("interval: expected {'a1': ..., 'a2': ...}")
    if set(iv_obj) - {"a1", "a2"}:
        raise ConfigError(f"interval: unknown keys "
                          f"{sorted(set(iv_obj) - {'a1', 'a2'})}")
    a1 = _finite(_want(iv_obj, "a1", "interval"), "interval.a1")
    a2 = _finite(_want(iv_obj, "a2", "interval"), "interval.a2")
    try:
        iv = Interval(a1, a2)
    except (CavityError, ValueError) as exc:
        raise ConfigError(f"interval: {exc}") from exc

    nu1 = _finite(_want(doc, "nu1", "config"), "nu1")
    nu2_raw = _want(doc, "nu2", "config")
    if nu2_raw == "inf":
        nu2 = math.inf
    else:
        nu2 = _number(nu2_raw, "nu2")
    try:
        bc = BoundaryParams(nu1, nu2)
        resonator = ResonatorConfig(iv, bc)
    except (CavityError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    if ("b1" in doc) != ("b2" in doc):
        raise ConfigError("b1 and b2 must be given together")
    family = None
    if "b1" in doc:
        lo = _step_function(doc["b1"], iv, "b1")
        hi = _step_function(doc["b2"], iv, "b2")
        try:
            family = AdmissibleFamily(lo, hi)
        except (CavityError, ValueError) as exc:
            raise ConfigError(f"b1/b2: {exc}") from exc

    profile = None
    if "B" in doc:
        profile = _step_function(doc["B"], iv, "B")

    scan = _scan_settings(doc["scan"], "scan") if "scan" in doc else None

    tol = None
    if "tol" in doc:
        tol = _positive(doc["tol"], "tol")

    return LoadedConfig(resonator=resonator, family=family, profile=profile,
                        scan=scan, tol=tol, sha256=digest, path=path)


def load_config(path: str) -> LoadedConfig:
    """Read and parse a configuration file from disk."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration '{path}': {exc}") from exc
    return parse_config(data, path=path)
