"""JSON encodings of machines, advice and reports.

Matrices are row-major nested lists; complex entries are ``[re, im]``
pairs. Track symbols are written as ``"σ|τ"`` strings. Words are written
as plain strings when every symbol is a single character and as lists of
symbols otherwise.
"""

from __future__ import annotations

import json
import math
from itertools import product as iproduct
from typing import Any, Iterable

import numpy as np

from .advice import (BUILTINS, DeterministicAdvice, QuantumAdvice, RandomizedAdvice, _Advice)
from .machines import Dfa, MachineError, Pfa, Qfa, as_word, split_track, track_symbol
from .rewritable import FINAL_ONLY, PER_STEP, RewritableQfa, TensorRqfa

SIG_DIGITS = 12
MACHINE_KINDS = ("dfa", "rfa", "pfa", "qfa", "rqfa", "rqfa_tensor")
ADVICE_KINDS = ("deterministic", "randomized", "quantum")


class SchemaError(ValueError):
    pass


# --------------------------------------------------------------------------
# scalar and report encoding


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0 or not math.isfinite(x):
        return float(x)
    return float(f"{x:.{digits}g}")


def to_jsonable(obj: Any, rounded: bool = True) -> Any:
    """Plain JSON data; floats are rounded to 12 significant digits if ``rounded``."""
    if isinstance(obj, dict):
        return {k if isinstance(k, str) else str(k): to_jsonable(v, rounded) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, rounded) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v, rounded) for v in obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist(), rounded)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    r = round_sig if rounded else float
    if isinstance(obj, (float, np.floating)):
        return r(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [r(obj.real), r(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any, rounded: bool = True) -> str:
    """Stable JSON text (sorted keys); reports are rounded, data files are not."""
    return json.dumps(to_jsonable(obj, rounded), sort_keys=True, indent=2, ensure_ascii=False)


# --------------------------------------------------------------------------
# small decoders


def _need(data: dict, key: str, kind=None):
    if not isinstance(data, dict):
        raise SchemaError("expected a JSON object")
    if key not in data:
        raise SchemaError(f"missing field {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"field {key!r} must be {getattr(kind, '__name__', kind)}")
    return value


def _names(value, key) -> list:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(f"field {key!r} must be a list of strings")
    return value


def encode_complex_matrix(u) -> list:
    u = np.asarray(u, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in u]


def decode_complex_matrix(rows, what="matrix") -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what}: entries must be numbers or [re, im] pairs") from exc
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(np.complex128)
    raise SchemaError(f"{what}: expected a 2-d array of [re, im] pairs")


def decode_real_matrix(rows, what="matrix") -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what}: entries must be numbers") from exc
    if arr.ndim != 2:
        raise SchemaError(f"{what}: expected a 2-d array")
    return arr


def encode_word(w) -> Any:
    w = as_word(w)
    return "".join(w) if all(len(s) == 1 for s in w) else list(w)


def decode_word(w) -> tuple:
    if isinstance(w, str):
        return tuple(w)
    if isinstance(w, list) and all(isinstance(s, str) for s in w):
        return tuple(w)
    raise SchemaError(f"word must be a string or a list of symbols, got {w!r}")


# --------------------------------------------------------------------------
# machines


def _split_alphabet(symbols: Iterable[str]) -> tuple[list, list | None]:
    symbols = list(symbols)
    if symbols and all("|" in s for s in symbols):
        parts = [split_track(s) for s in symbols]
        return (list(dict.fromkeys(p[0] for p in parts)), list(dict.fromkeys(p[1] for p in parts)))
    return symbols, None


def _header(kind, m, alphabet) -> dict:
    inp, adv = _split_alphabet(alphabet)
    out = {"kind": kind, "states": list(m.states), "initial": m.initial,
           "accepting": sorted(m.accepting), "rejecting": sorted(m.rejecting),
           "input_alphabet": inp, "alphabet": list(alphabet)}
    if adv is not None:
        out["advice_alphabet"] = adv
    return out


def machine_to_json(m) -> dict:
    if isinstance(m, Qfa):
        out = _header("qfa", m, m.alphabet)
        out["endmarkers"] = {"left": m.left, "right": m.right}
        out["unitaries"] = {s: encode_complex_matrix(u) for s, u in m.unitaries.items()}
        if m.initial_vector is not None:
            out["initial_vector"] = [[float(z.real), float(z.imag)] for z in m.initial_vector]
            out["offsets"] = list(m.offsets)
        return out
    if isinstance(m, Pfa):
        out = _header("pfa", m, m.alphabet)
        out["endmarkers"] = {"left": m.left, "right": m.right}
        out["matrices"] = {s: np.asarray(a).tolist() for s, a in m.matrices.items()}
        return out
    if isinstance(m, Dfa):
        out = _header("dfa", m, m.alphabet)
        out["endmarkers"] = {"left": m.left, "right": m.right}
        delta: dict = {}
        for (q, s), t in m.delta.items():
            delta.setdefault(q, {})[s] = t
        out["delta"] = delta
        return out
    if isinstance(m, RewritableQfa):
        out = _header("rqfa", m, m.alphabet)
        out["advice_alphabet"] = list(m.cells)
        out["cells"] = list(m.cells)
        out["mode"] = m.mode
        out["local_unitaries"] = {s: encode_complex_matrix(v) for s, v in m.local.items()}
        if m.overrides:
            out["position_overrides"] = [
                {"position": i, "symbol": s, "matrix": encode_complex_matrix(v)}
                for (i, s), v in sorted(m.overrides.items())]
        return out
    if isinstance(m, TensorRqfa):
        return {"kind": "rqfa_tensor",
                "components": [machine_to_json(c) for c in m.components],
                "accepting": [list(map(int, t)) for t in np.argwhere(m.accept_mask)],
                "rejecting": [list(map(int, t)) for t in np.argwhere(m.reject_mask)]}
    raise SchemaError(f"cannot encode machine of type {type(m).__name__}")


def _alphabet(data) -> list:
    if "alphabet" in data:
        return _names(data["alphabet"], "alphabet")
    inp = _names(_need(data, "input_alphabet"), "input_alphabet")
    if "advice_alphabet" in data:
        adv = _names(data["advice_alphabet"], "advice_alphabet")
        return [track_symbol(s, t) for s, t in iproduct(inp, adv)]
    return inp


def _endmarkers(data, default) -> tuple[bool, bool]:
    ends = data.get("endmarkers", {"left": default, "right": default})
    if not isinstance(ends, dict):
        raise SchemaError("field 'endmarkers' must be an object")
    return bool(ends.get("left", default)), bool(ends.get("right", default))


def machine_from_json(data: dict):
    """Decode a machine; structural problems of the decoded object raise
    :class:`MachineError` (or are reported by validation for quantum machines)."""
    kind = _need(data, "kind", str)
    if kind not in MACHINE_KINDS:
        raise SchemaError(f"unknown machine kind {kind!r}; expected one of {MACHINE_KINDS}")
    if kind == "rqfa_tensor":
        comps = [machine_from_json(c) for c in _need(data, "components", list)]
        shape = tuple(len(c.states) for c in comps)
        acc, rej = np.zeros(shape, bool), np.zeros(shape, bool)
        try:
            for t in _need(data, "accepting", list):
                acc[tuple(t)] = True
            for t in _need(data, "rejecting", list):
                rej[tuple(t)] = True
        except (IndexError, TypeError) as exc:
            raise SchemaError("tensor masks must list valid state-index tuples") from exc
        return TensorRqfa(comps, acc, rej)

    states = _names(_need(data, "states"), "states")
    initial = _need(data, "initial", str)
    acc = _names(data.get("accepting", []), "accepting")
    rej = _names(data.get("rejecting", []), "rejecting")
    if kind == "qfa":
        left, right = _endmarkers(data, True)
        unitaries = {s: decode_complex_matrix(u, f"unitary {s!r}")
                     for s, u in _need(data, "unitaries", dict).items()}
        vec = None
        if "initial_vector" in data:
            vec = decode_complex_matrix([data["initial_vector"]], "initial_vector")[0]
        return Qfa(states, _alphabet(data), unitaries, initial, acc, rej, left, right,
                   initial_vector=vec, offsets=tuple(data.get("offsets", (0.0, 0.0))))
    if kind == "pfa":
        left, right = _endmarkers(data, False)
        mats = {s: decode_real_matrix(a, f"matrix {s!r}")
                for s, a in _need(data, "matrices", dict).items()}
        return Pfa(states, _alphabet(data), mats, initial, acc, rej, left, right)
    if kind in ("dfa", "rfa"):
        left, right = _endmarkers(data, False)
        delta = {}
        for q, row in _need(data, "delta", dict).items():
            if not isinstance(row, dict):
                raise SchemaError("delta must map state -> {symbol: target}")
            for s, t in row.items():
                delta[(q, s)] = t
        try:
            m = Dfa(states, _alphabet(data), delta, initial, acc, rej, left, right)
        except KeyError as exc:
            raise MachineError(f"transition missing for {exc}") from exc
        return m
    # rqfa
    cells = _names(data.get("cells", data.get("advice_alphabet")), "cells")
    local = {s: decode_complex_matrix(v, f"local unitary {s!r}")
             for s, v in _need(data, "local_unitaries", dict).items()}
    overrides = {}
    for entry in data.get("position_overrides", []):
        overrides[(int(_need(entry, "position")), _need(entry, "symbol", str))] = \
            decode_complex_matrix(_need(entry, "matrix"), "override")
    mode = data.get("mode", PER_STEP)
    if mode not in (PER_STEP, FINAL_ONLY):
        raise SchemaError(f"mode must be {PER_STEP!r} or {FINAL_ONLY!r}")
    inp = _names(data.get("alphabet", _need(data, "input_alphabet")), "input_alphabet")
    return RewritableQfa(states, inp, cells, local, initial, acc, rej, mode, overrides)


# --------------------------------------------------------------------------
# advice


def _advice_kind(a: _Advice) -> str:
    if isinstance(a, DeterministicAdvice):
        return "deterministic"
    if isinstance(a, RandomizedAdvice):
        return "randomized"
    if isinstance(a, QuantumAdvice):
        return "quantum"
    raise SchemaError(f"cannot encode advice of type {type(a).__name__}")


def advice_to_json(a: _Advice, lengths: Iterable[int] | None = None) -> dict:
    """Builtin advice is written by name; other advice as a per-length table.

    Generator-only advice needs ``lengths`` to be materialized.
    """
    kind = _advice_kind(a)
    out = {"kind": kind, "alphabet": list(a.alphabet)}
    if a.builtin is not None and a.table is None:
        name, params = a.builtin
        out["rule"] = {"builtin": name, "params": params} if params else {"builtin": name}
        return out
    if lengths is None:
        lengths = a.lengths()
        if lengths is None:
            raise SchemaError("advice has no table; pass the lengths to materialize")
    table = {}
    for n in lengths:
        entry = a.at(n)
        if kind == "deterministic":
            table[str(n)] = encode_word(entry)
        elif kind == "randomized":
            table[str(n)] = [{"y": encode_word(y), "p": p} for y, p in entry]
        else:
            table[str(n)] = [{"y": encode_word(y), "re": z.real, "im": z.imag} for y, z in entry]
    out["rule"] = {"table": table}
    return out


def advice_from_json(data: dict) -> _Advice:
    kind = _need(data, "kind", str)
    if kind not in ADVICE_KINDS:
        raise SchemaError(f"unknown advice kind {kind!r}; expected one of {ADVICE_KINDS}")
    rule = _need(data, "rule", dict)
    if "builtin" in rule:
        name = rule["builtin"]
        if name not in BUILTINS:
            raise SchemaError(f"unknown builtin advice {name!r}; known: {sorted(BUILTINS)}")
        a = BUILTINS[name](rule.get("params", {}))
        if _advice_kind(a) != kind:
            raise SchemaError(f"builtin {name!r} is {_advice_kind(a)}, not {kind}")
        return a
    alphabet = tuple(_names(_need(data, "alphabet"), "alphabet"))
    raw = _need(rule, "table", dict)
    table = {}
    try:
        for n, entry in raw.items():
            n = int(n)
            if kind == "deterministic":
                table[n] = decode_word(entry)
            elif kind == "randomized":
                table[n] = [(decode_word(e["y"]), float(e["p"])) for e in entry]
            else:
                table[n] = [(decode_word(e["y"]), complex(float(e.get("re", 0.0)),
                                                         float(e.get("im", 0.0))))
                            for e in entry]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed advice table entry: {exc}") from exc
    cls = {"deterministic": DeterministicAdvice, "randomized": RandomizedAdvice,
           "quantum": QuantumAdvice}[kind]
    return cls(alphabet, table=table)


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from exc


def write_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, rounded=False) + "\n")


__all__ = ["SchemaError", "round_sig", "to_jsonable", "dumps", "machine_to_json",
           "machine_from_json", "advice_to_json", "advice_from_json", "encode_word",
           "decode_word", "load_json", "write_json"]
