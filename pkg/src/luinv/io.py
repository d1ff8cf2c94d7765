"""State file format.

A state file is JSON with keys, in this order::

    {"schema_version": 1, "kind": "pure" | "mixed", "dim": N,
     "matrix": [[[re, im], ...], ...]}

``matrix`` is N x N (pure coefficients a_ij) or N^2 x N^2 (density matrix).
"""
import json
import os
import tempfile

import numpy as np

from .errors import LUInvError
from .linalg import DEFAULT_TOL
from .states import PureState, validate

SCHEMA_VERSION = 1


class StateFileError(LUInvError, ValueError):
    """Malformed or unsupported state file."""


def state_to_dict(state):
    M = state.A if isinstance(state, PureState) else state.rho
    kind = "pure" if isinstance(state, PureState) else "mixed"
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "dim": state.N,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in M],
    }


def state_from_dict(data, cfg=DEFAULT_TOL):
    if not isinstance(data, dict):
        raise StateFileError("state file must hold a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise StateFileError(f"unsupported schema_version {version!r}")
    kind = data.get("kind")
    if kind not in ("pure", "mixed"):
        raise StateFileError(f"kind must be 'pure' or 'mixed', got {kind!r}")
    N = data.get("dim")
    if not isinstance(N, int) or N < 1:
        raise StateFileError(f"dim must be a positive integer, got {N!r}")
    try:
        arr = np.array(data["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"bad matrix field: {exc}") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise StateFileError("matrix must be a 2-D array of [re, im] pairs")
    return validate(arr[..., 0] + 1j * arr[..., 1], N, kind, cfg)


def dumps_state(state):
    return json.dumps(state_to_dict(state)) + "\n"


def read_state(path, cfg=DEFAULT_TOL):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_dict(data, cfg)


def atomic_write(path, text):
    """Write ``text`` to a temporary sibling file, then rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_state(state, path):
    atomic_write(path, dumps_state(state))
