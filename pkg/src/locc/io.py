"""JSON encodings for states, matrices and protocols.

Complex numbers are ``[re, im]`` pairs.  Floats are written with Python's
shortest round-trip repr, so parsing a serialized value gives back the
identical double.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from .errors import LOCCError
from .states import BipartiteState, from_amplitudes
from .synthesis import InstrumentElement, ProbabilisticTail, Protocol

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "locc-protocol/1"


class FormatError(LOCCError):
    pass


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(pair) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise FormatError(f"complex number must be a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def encode_matrix(m: np.ndarray) -> list:
    return [[encode_complex(z) for z in row] for row in np.asarray(m)]


def decode_matrix(rows) -> np.ndarray:
    try:
        m = np.array([[decode_complex(z) for z in row] for row in rows], dtype=complex)
    except TypeError as exc:
        raise FormatError(f"malformed matrix: {exc}") from exc
    if m.ndim != 2:
        raise FormatError("matrix rows have unequal lengths")
    return m


def state_to_dict(s: BipartiteState) -> dict:
    return {
        "dims": [s.dim_a, s.dim_b],
        "amplitudes": [encode_complex(z) for z in s.amplitudes()],
    }


def state_from_dict(d: dict) -> BipartiteState:
    try:
        n, m = (int(v) for v in d["dims"])
        amps = [decode_complex(z) for z in d["amplitudes"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed state file: {exc}") from exc
    state, norm = from_amplitudes(amps, n, m)
    if abs(norm - 1.0) > 1e-6:
        log.warning("state amplitudes had norm %.9g; normalized on load", norm)
    return state


def state_digest(s: BipartiteState) -> str:
    payload = json.dumps(state_to_dict(s), separators=(",", ":"))
    return "sha256:" + hashlib.sha256(payload.encode()).hexdigest()


def protocol_to_dict(p: Protocol, source: BipartiteState | None = None,
                     target: BipartiteState | None = None) -> dict:
    out = {
        "version": PROTOCOL_VERSION,
        "source_digest": state_digest(source) if source is not None else None,
        "target_digest": state_digest(target) if target is not None else None,
        "probability": p.probability,
        "intermediate": state_to_dict(p.intermediate),
        "stage1": [
            {"m": encode_matrix(el.m), "u": encode_matrix(el.u), "q": el.q}
            for el in p.stage1
        ],
        "m0": encode_matrix(p.m0),
        "stage2": None,
    }
    if p.stage2 is not None:
        out["stage2"] = {
            "n": encode_matrix(p.stage2.n),
            "v": encode_matrix(p.stage2.v),
            "n_fail": encode_matrix(p.stage2.n_fail),
            "p": p.stage2.p,
        }
    return out


def protocol_from_dict(d: dict) -> Protocol:
    if d.get("version") != PROTOCOL_VERSION:
        raise FormatError(f"unsupported protocol version {d.get('version')!r}")
    try:
        stage1 = tuple(
            InstrumentElement(decode_matrix(e["m"]), decode_matrix(e["u"]), float(e["q"]))
            for e in d["stage1"]
        )
        tail = None
        if d.get("stage2") is not None:
            s2 = d["stage2"]
            tail = ProbabilisticTail(decode_matrix(s2["n"]), decode_matrix(s2["v"]),
                                     decode_matrix(s2["n_fail"]), float(s2["p"]))
        return Protocol(stage1, decode_matrix(d["m0"]), state_from_dict(d["intermediate"]),
                        float(d["probability"]), tail)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LOCCError):
            raise
        raise FormatError(f"malformed protocol file: {exc}") from exc


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def load_state(path) -> BipartiteState:
    return state_from_dict(_read_json(path))


def save_state(path, s: BipartiteState) -> None:
    _write_json(path, state_to_dict(s))


def load_protocol(path) -> tuple[Protocol, dict]:
    raw = _read_json(path)
    return protocol_from_dict(raw), raw


def save_protocol(path, p: Protocol, source=None, target=None) -> None:
    _write_json(path, protocol_to_dict(p, source, target))


def load_matrix(path) -> np.ndarray:
    raw = _read_json(path)
    if isinstance(raw, dict):
        raw = raw.get("matrix")
    if raw is None:
        raise FormatError(f"{path}: expected a 'matrix' entry")
    return decode_matrix(raw)


def save_matrices(path, **mats) -> None:
    _write_json(path, {k: encode_matrix(v) for k, v in mats.items()})
