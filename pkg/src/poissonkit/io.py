"""JSON encodings for algebra elements, weights, word lists and linear maps.

Element::

    {"blocks": [{"dim": d, "re": [[...]], "im": [[...]]}, ...]}

Weight: ``{"density": <element>}``.  Word list: ``{"words": [[<element>, ...], ...]}``.
Linear map: ``{"src": [dims], "dst": [dims], "matrix": {"re": ..., "im": ...}}``
acting on row-major block coordinates, or ``{"src": .., "dst": .., "kraus": [{"re", "im"}, ...]}``
for maps ``x -> sum_k K_k^* x K_k`` with ``K_k`` of shape ``(src size, dst size)``; an optional
``"dual"`` matrix declares the predual map.  Readers live in :mod:`poissonkit.channels`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import Algebra, AlgebraElement, Weight


def element_to_json(x: AlgebraElement) -> dict:
    return {
        "blocks": [
            {"dim": int(b.shape[0]), "re": b.real.tolist(), "im": b.imag.tolist()}
            for b in x.blocks
        ]
    }


def element_from_json(data: dict, algebra: Algebra | None = None) -> AlgebraElement:
    try:
        entries = data["blocks"]
    except (KeyError, TypeError):
        raise ValueError("element JSON must be an object with a 'blocks' list") from None
    blocks = []
    for entry in entries:
        re = np.asarray(entry["re"], dtype=float)
        im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
        d = int(entry.get("dim", re.shape[0]))
        if re.shape != (d, d) or im.shape != (d, d):
            raise ValueError(f"block declared dim {d} but has shape {re.shape}")
        blocks.append(re + 1j * im)
    alg = Algebra(tuple(b.shape[0] for b in blocks))
    if algebra is not None and algebra != alg:
        raise ValueError(f"element has blocks {alg.blocks}, expected {algebra.blocks}")
    return AlgebraElement(alg, tuple(blocks))


def weight_to_json(w: Weight) -> dict:
    return {"density": element_to_json(w.density)}


def weight_from_json(data: dict) -> Weight:
    if "density" not in data:
        raise ValueError("weight JSON must contain 'density'")
    return Weight(element_from_json(data["density"]))


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(data: dict) -> np.ndarray:
    re = np.asarray(data["re"], dtype=float)
    return re + 1j * np.asarray(data.get("im", np.zeros_like(re)), dtype=float)


def words_to_json(words) -> dict:
    return {"words": [[element_to_json(x) for x in word] for word in words]}


def words_from_json(data: dict) -> list[list[AlgebraElement]]:
    return [[element_from_json(x) for x in word] for word in data["words"]]


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def dump_json(data, path=None, stable: bool = False) -> str:
    text = json.dumps(data, indent=2, sort_keys=stable, default=_default)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")
    return text


def _default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
