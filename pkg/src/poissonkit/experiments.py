"""Seeded instance generators, check batteries and the suite runner behind the CLI.

Each ``check_*`` function returns a list of :class:`CheckRecord`; a suite is a fixed
combination of checks.  Reports are JSON (schema version in ``SCHEMA_VERSION``) with
optional CSV tables and figures.
"""

from __future__ import annotations

import csv
import math
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy
import scipy.stats

from . import __version__
from .algebra import (
    Algebra,
    AlgebraElement,
    Weight,
    diagonal_weight,
    expi,
    modular_flow,
    tracial_weight,
    weight_eval,
    weight_from_density,
)
from .channels import (
    LinearMapOnAlgebra,
    check_weight_preserving,
    corner_projection_oracle,
    independence_check,
    lift_on_words,
    split_gram_check,
    ucp_lift_check,
)
from .entropy import (
    check_domination,
    cocycle_lift_check,
    entropy_report,
    lindblad_entropy,
    poisson_kl,
    poisson_relative_entropy,
    poisson_relative_entropy_explicit,
)
from .fock import (
    PoissonWord,
    WordKind,
    fock_action_residual,
    fock_isometry_check,
    gram_empty,
    gram_fock,
    gram_matrix,
    oracle_gram,
    transform_round_trip,
)
from .gns import TruncatedGnsSpace, TruncatedGnsVector, apply_gamma, choose_level_cap
from .io import dump_json, element_to_json, weight_to_json
from .modular import (
    TypeTag,
    arveson_spectrum,
    classify_spectrum,
    classify_type,
    kms_residual,
    lift_modular_flow,
    principal_series_lambda,
    principal_series_weight,
)
from .moments import MomentQuery, _partition_terms, bernoulli_moment, characteristic, classical_pmf, growth_bound_check, poisson_moment
from .partitions import permanent

SCHEMA_VERSION = 1
SUITES = (
    "moments",
    "gram",
    "fock",
    "kms",
    "classify",
    "channels",
    "independence",
    "entropy",
    "bernoulli",
    "classical",
)
INSTANCE_KINDS = ("faithful-weight", "hermitian-contraction", "corner-pair", "dominated-weight-pair")
MAX_CONDITION = 100.0


# --- records and reports ----------------------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    computed: object
    reference: object
    residual: float
    tolerance: float
    passed: bool

    @classmethod
    def compare(cls, name: str, computed, reference, tol: float) -> "CheckRecord":
        res = float(abs(complex(computed) - complex(reference)))
        return cls(name, _plain(computed), _plain(reference), res, tol, res <= tol)

    @classmethod
    def bound(cls, name: str, residual: float, tol: float, computed=None, reference=None) -> "CheckRecord":
        residual = float(residual)
        return cls(name, _plain(computed if computed is not None else residual), _plain(reference), residual, tol, residual <= tol)


def _plain(v):
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class Table:
    header: list[str]
    rows: list[list]


@dataclass
class Report:
    suite: str
    seed: int
    records: list[CheckRecord]
    tables: dict[str, Table] = field(default_factory=dict)
    wall_time: float = 0.0
    environment: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self, stable: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "n_checks": len(self.records),
            "n_failed": len(self.failures()),
            "records": [asdict(r) for r in self.records],
            "tables": {k: {"header": t.header, "rows": t.rows} for k, t in self.tables.items()},
            "environment": self.environment,
        }
        if not stable:
            out["wall_time"] = self.wall_time
        return out

    def write_csv(self, directory) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, table in self.tables.items():
            path = directory / f"{self.suite}_{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(table.header)
                w.writerows(table.rows)
            paths.append(path)
        return paths


def environment_stamp() -> dict:
    return {
        "poissonkit": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


# --- instance generators ----------------------------------------------------------------------


def random_unitary(rng, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_weight(rng, dims: Sequence[int], mass: float = 1.0, condition: float = 10.0) -> Weight:
    """Faithful weight with eigenvalues spread log-uniformly over ``[1, condition]``, then scaled."""
    condition = min(condition, MAX_CONDITION)
    blocks = []
    for d in dims:
        ev = np.exp(rng.uniform(0, math.log(condition), size=d))
        u = random_unitary(rng, d)
        blocks.append((u * ev) @ u.conj().T)
    total = sum(np.trace(b).real for b in blocks)
    return weight_from_density([b * (mass / total) for b in blocks])


def random_element(rng, alg: Algebra, norm: float = 1.0) -> AlgebraElement:
    x = alg.element([rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for d in alg.blocks])
    return x * (norm / x.norm())


def random_hermitian(rng, alg: Algebra, norm: float = 1.0) -> AlgebraElement:
    x = random_element(rng, alg)
    h = x + x.H
    return h * (norm / h.norm())


def centralizer_projection(rng, w: Weight) -> tuple[AlgebraElement, AlgebraElement]:
    """A spectral projection ``e`` of the density (so ``e`` commutes with it) and ``1 - e``, both nonzero."""
    alg = w.algebra
    n = alg.size
    while True:
        keep = rng.random(n) < 0.5
        if 0 < keep.sum() < n:
            break
    blocks, pos = [], 0
    for (evals, vecs), d in zip(w.eigensystems, alg.blocks):
        sel = vecs[:, keep[pos:pos + d]]
        blocks.append(sel @ sel.conj().T)
        pos += d
    e = alg.element(blocks)
    return e, alg.identity() - e


def corner_pair(rng, dims: Sequence[int], mass: float = 1.0):
    """Weight, orthogonal centralizer projections ``e, f`` and Hermitian contractions in ``eNe, fNf``."""
    w = random_weight(rng, dims, mass)
    e, f = centralizer_projection(rng, w)
    hx = e @ random_hermitian(rng, w.algebra) @ e
    hy = f @ random_hermitian(rng, w.algebra) @ f
    return w, e, f, hx * (1 / max(hx.norm(), 1.0)), hy * (1 / max(hy.norm(), 1.0))


def dominated_pair(rng, dims: Sequence[int], mass: float = 1.0) -> tuple[Weight, Weight]:
    """``(rho, psi)`` with ``rho = psi^{1/2} K psi^{1/2}`` and ``0.1 <= K <= 0.95``."""
    psi = random_weight(rng, dims, mass)
    s = psi.sqrt_density()
    blocks = []
    for d, sb in zip(dims, s.blocks):
        u = random_unitary(rng, d)
        k = (u * rng.uniform(0.1, 0.95, size=d)) @ u.conj().T
        blocks.append(sb @ k @ sb)
    rho = weight_from_density(blocks)
    return rho, psi


def generate_instance(kind: str, seed: int, dims: Sequence[int], out_dir=None, mass: float = 1.0) -> dict:
    """Deterministic fixture for ``kind``; written as JSON files when ``out_dir`` is given."""
    if kind not in INSTANCE_KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {INSTANCE_KINDS}")
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in dims)
    if kind == "faithful-weight":
        w = random_weight(rng, dims, mass)
        data = {"weight": weight_to_json(w)}
    elif kind == "hermitian-contraction":
        data = {"element": element_to_json(random_hermitian(rng, Algebra(dims), rng.uniform(0.2, 1.0)))}
    elif kind == "corner-pair":
        w, e, f, x, y = corner_pair(rng, dims, mass)
        if (e @ f).norm() > 1e-12:
            raise AssertionError("generated projections are not orthogonal")
        data = {
            "weight": weight_to_json(w),
            "e": element_to_json(e),
            "f": element_to_json(f),
            "x": element_to_json(x),
            "y": element_to_json(y),
        }
    else:
        rho, psi = dominated_pair(rng, dims, mass)
        if not check_domination(rho, psi):
            raise AssertionError("generated pair is not dominated")
        data = {"rho": weight_to_json(rho), "psi": weight_to_json(psi)}
    data = {"kind": kind, "seed": seed, "dims": list(dims), **data}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for key, value in data.items():
            if isinstance(value, dict):
                dump_json(value, out / f"{key}.json", stable=True)
        dump_json(data, out / "instance.json", stable=True)
    return data


# --- check batteries ----------------------------------------------------------------------------


def check_classical(lambdas=(0.5, 1.7, 4.0), kmax: int = 20, tol: float = 1e-12, tables=None) -> list[CheckRecord]:
    """``classical_pmf`` against scipy and against the scalar GNS vacuum level weights."""
    records = []
    rows = []
    for lam in lambdas:
        pmf = np.array([classical_pmf(lam, k) for k in range(kmax + 1)])
        ref = scipy.stats.poisson.pmf(np.arange(kmax + 1), lam)
        levels = TruncatedGnsSpace(diagonal_weight([lam]), kmax).vacuum().level_norms() ** 2
        records.append(CheckRecord.bound(f"pmf lambda={lam}", np.abs(pmf - ref).max(), tol))
        records.append(CheckRecord.bound(f"gns levels lambda={lam}", np.abs(levels - pmf).max(), tol))
        rows += [[lam, k, pmf[k], ref[k], levels[k]] for k in range(kmax + 1)]
    if tables is not None:
        tables["pmf"] = Table(["lambda", "k", "pmf", "scipy", "gns_level"], rows)
    return records


def _moment_instance(rng, d: int, n: int):
    mass = rng.uniform(0.1, 1.0) if d == 2 else rng.uniform(0.1, 0.5)
    w = random_weight(rng, (d,), mass)
    letters = [random_element(rng, w.algebra, rng.uniform(0.3, 1.0)) for _ in range(n)]
    return w, letters


def check_moments(rng, n_words: int = 200, tol: float = 1e-8, max_length: int = 4) -> list[CheckRecord]:
    """Partition-sum moments against the truncated GNS inner product ``<xi, lambda(x_1)...lambda(x_n) xi>``.

    ``d = 3`` instances use masses ``<= 0.5`` to keep the symmetric levels small.
    """
    records = []
    empty = PoissonWord(WordKind.LAMBDA, ())
    for k in range(n_words):
        d = 2 if k % 2 == 0 else 3
        n = int(rng.integers(1, max_length + 1))
        w, letters = _moment_instance(rng, d, n)
        G, M = oracle_gram(w, [empty], [PoissonWord(WordKind.LAMBDA, tuple(letters))], tol=tol)
        records.append(CheckRecord.compare(f"moment d={d} n={n} M={M} #{k}", poisson_moment(w, letters), G[0, 0], tol))
    # golden: zero letters
    w = random_weight(rng, (2,), 0.7)
    for n in range(1, 5):
        records.append(CheckRecord.compare(f"zero letters n={n}", poisson_moment(w, [w.algebra.zeros()] * n), 0.0, 0.0))
    return records


def _strip_leg(v: TruncatedGnsVector) -> TruncatedGnsVector:
    return TruncatedGnsVector(v.space, v.levels)


def check_characteristic(rng, n_samples: int = 50, tol: float = 1e-8, dims_choices=((2,), (1, 1), (2, 1))) -> list[CheckRecord]:
    """``characteristic(w, x)`` against ``<xi, Gamma(e^{ix}) xi>`` via the general Gamma route."""
    records = []
    for k in range(n_samples):
        dims = dims_choices[k % len(dims_choices)]
        w = random_weight(rng, dims, rng.uniform(0.1, 1.5))
        x = random_hermitian(rng, w.algebra, rng.uniform(0.1, 1.0))
        M = choose_level_cap(w.mass, 0, 1.0, tol)
        space = TruncatedGnsSpace(w, M)
        xi = space.vacuum()
        value = xi.inner(apply_gamma(expi(x), _strip_leg(xi)))
        records.append(CheckRecord.compare(f"characteristic {dims} #{k}", characteristic(w, x), value, tol))
    return records


def check_corner_multiplicativity(rng, n_pairs: int = 20, tol: float = 1e-12) -> list[CheckRecord]:
    records = []
    for k in range(n_pairs):
        w, e, f, x, y = corner_pair(rng, ((2,), (3,), (2, 1))[k % 3], rng.uniform(0.2, 1.5))
        joint = np.exp(weight_eval(w, expi(x) @ expi(y)) - w.mass)
        records.append(CheckRecord.compare(f"corner multiplicativity #{k}", joint, characteristic(w, x) * characteristic(w, y), tol))
    return records


def check_bernoulli(rng, n_queries: int = 20, ladder=(64, 128, 256), ratio_window=(0.4, 0.6), tables=None) -> list[CheckRecord]:
    """Error of the Bernoulli approximant: ``n * err`` bounded and ``err(2n)/err(n)`` in the window."""
    records = []
    rows = []
    for q in range(n_queries):
        dims = ((2,), (1, 1), (3,))[q % 3]
        w = random_weight(rng, dims, rng.uniform(0.2, 1.5))
        n = int(rng.integers(2, 5))
        letters = [random_element(rng, w.algebra, rng.uniform(0.3, 1.0)) for _ in range(n)]
        exact = poisson_moment(w, letters)
        errs = [abs(bernoulli_moment(w, letters, n_copies=N) - exact) for N in ladder]
        scaled = [N * e for N, e in zip(ladder, errs)]
        for N, e, s in zip(ladder, errs, scaled):
            rows.append([q, n, N, e, s])
        # 1 - prod_{j<k}(1 - j/n) <= k(k-1)/(2n), so n*err <= sum_sigma C(|sigma|, 2) |term(sigma)|
        bound = sum(math.comb(kb, 2) * abs(term) for kb, term in _partition_terms(MomentQuery(w, tuple(letters))))
        records.append(CheckRecord(f"query {q} n*err bounded", max(scaled), bound, max(0.0, max(scaled) - bound), 0.0, max(scaled) <= bound * (1 + 1e-9)))
        for (N0, e0), (N1, e1) in zip(zip(ladder, errs), list(zip(ladder, errs))[1:]):
            ratio = e1 / e0 if e0 > 0 else float("nan")
            lo, hi = ratio_window
            ok = lo <= ratio <= hi
            records.append(CheckRecord(f"query {q} ratio {N1}/{N0}", ratio, 0.5, abs(ratio - 0.5), hi - 0.5, bool(ok)))
    if tables is not None:
        tables["ladder"] = Table(["query", "length", "n_copies", "error", "n_times_error"], rows)
    return records


def _empty_pair_instance(rng, k: int, max_len: int = 3):
    dims = ((2,), (1, 1), (2, 1), (3,))[k % 4]
    mass = rng.uniform(0.1, 0.5) if dims == (3,) else rng.uniform(0.1, 1.0)
    w = random_weight(rng, dims, mass)
    n, m = int(rng.integers(0, max_len + 1)), int(rng.integers(0, max_len + 1))
    norm = 0.5 if dims == (3,) else 1.0
    xs = [random_element(rng, w.algebra, rng.uniform(0.2, norm)) for _ in range(n)]
    ys = [random_element(rng, w.algebra, rng.uniform(0.2, norm)) for _ in range(m)]
    return w, xs, ys


def _mean_zero(w: Weight, x: AlgebraElement) -> AlgebraElement:
    return x - w.algebra.identity() * (weight_eval(w, x) / w.mass)


def check_gram(rng, n_pairs: int = 50, tol: float = 1e-8, perm_tol: float = 1e-10) -> list[CheckRecord]:
    """Empty-basis Gram (matching sum) against the oracle; mean-zero words against the permanent."""
    records = []
    for k in range(n_pairs):
        w, xs, ys = _empty_pair_instance(rng, k)
        G, M = oracle_gram(w, [PoissonWord(WordKind.EMPTY, tuple(xs))], [PoissonWord(WordKind.EMPTY, tuple(ys))], tol=tol)
        records.append(CheckRecord.compare(f"gram_empty {w.algebra.blocks} {len(xs)}x{len(ys)} M={M} #{k}", gram_empty(xs, ys, w), G[0, 0], tol))
        xs0 = [_mean_zero(w, x) for x in xs]
        ys0 = [_mean_zero(w, y) for y in ys]
        if len(xs0) == len(ys0):
            P = np.array([[weight_eval(w, x.H @ y) for y in ys0] for x in xs0], complex).reshape(len(xs0), len(ys0))
            ref = permanent(P)
        else:
            ref = 0.0
        records.append(CheckRecord.compare(f"mean-zero permanent #{k}", gram_empty(xs0, ys0, w), ref, perm_tol))
    return records


def check_fock(rng, n_pairs: int = 30, n_action: int = 30, tol: float = 1e-8, round_trip_tol: float = 1e-12, iso_tol: float = 1e-10) -> list[CheckRecord]:
    records = []
    for k in range(n_pairs):
        w, xs, ys = _empty_pair_instance(rng, k)
        G, M = oracle_gram(w, [PoissonWord(WordKind.FOCK, tuple(xs))], [PoissonWord(WordKind.FOCK, tuple(ys))], tol=tol)
        records.append(CheckRecord.compare(f"gram_fock {len(xs)}x{len(ys)} M={M} #{k}", gram_fock(xs, ys, w), G[0, 0], tol))
    for k in range(n_pairs):
        w, xs, _ = _empty_pair_instance(rng, k, max_len=4)
        records.append(CheckRecord.bound(f"round trip n={len(xs)} #{k}", transform_round_trip(xs, w), round_trip_tol))
    for k in range(n_action):
        w, ys, _ = _empty_pair_instance(rng, k, max_len=2)
        x = random_element(rng, w.algebra, 0.5 if w.algebra.blocks == (3,) else 1.0)
        records.append(CheckRecord.bound(f"action residual n={len(ys)} #{k}", fock_action_residual(x, ys, w, tol=tol), tol))
    for k in range(10):
        w = random_weight(rng, ((2,), (1, 1), (2, 1))[k % 3], rng.uniform(0.2, 1.5))
        words = [[random_element(rng, w.algebra) for _ in range(int(rng.integers(0, 4)))] for _ in range(5)]
        rep = fock_isometry_check(words, w, iso_tol)
        records.append(CheckRecord.bound(f"isometry #{k}", rep.max_deviation, iso_tol))
    return records


def check_kms(rng, n_samples: int = 50, tol: float = 1e-8, gram_tol: float = 1e-9, group_tol: float = 1e-12) -> list[CheckRecord]:
    records = []
    for k in range(n_samples):
        dims = ((2,), (3,), (2, 1), (1, 1))[k % 4]
        w = random_weight(rng, dims, rng.uniform(0.2, 2.0))
        x = random_element(rng, w.algebra, rng.uniform(0.1, 1.0))
        y = random_element(rng, w.algebra, rng.uniform(0.1, 1.0))
        t = float(rng.uniform(-3, 3))
        records.append(CheckRecord.bound(f"kms {dims} #{k}", kms_residual(w, x, y, t), tol))
    for k in range(20):
        w = random_weight(rng, ((2,), (2, 1))[k % 2], rng.uniform(0.2, 1.5))
        words = [PoissonWord(WordKind.EMPTY, tuple(random_element(rng, w.algebra) for _ in range(int(rng.integers(0, 4))))) for _ in range(4)]
        t = float(rng.uniform(-3, 3))
        G = gram_matrix(words, w)
        Gt = gram_matrix([lift_modular_flow(wd, w, t) for wd in words], w)
        records.append(CheckRecord.bound(f"lifted flow gram #{k}", np.abs(G - Gt).max(), gram_tol))
    for k in range(20):
        w = random_weight(rng, ((2,), (3,))[k % 2], rng.uniform(0.2, 1.5))
        x = random_element(rng, w.algebra)
        s, t = rng.uniform(-3, 3, size=2)
        lhs = modular_flow(w, modular_flow(w, x, s), t)
        rhs = modular_flow(w, x, s + t)
        records.append(CheckRecord.bound(f"group law #{k}", (lhs - rhs).norm(), group_tol))
    return records


def check_classify(rng, n_principal: int = 20, tol: float = 1e-12) -> list[CheckRecord]:
    records = []
    tag = classify_type(tracial_weight(Algebra((3,)), 1.0)).tag
    records.append(CheckRecord("tracial", tag.value, TypeTag.II1.value, 0.0 if tag is TypeTag.II1 else 1.0, 0.0, tag is TypeTag.II1))
    c = classify_type(diagonal_weight([1.0, 0.5]))
    ok = c.tag is TypeTag.III_LAMBDA and abs(c.lam - 0.5) <= tol
    records.append(CheckRecord("eigenvalues {1, 1/2}", c.tag.value, TypeTag.III_LAMBDA.value, abs((c.lam or 0) - 0.5), tol, ok))
    c = classify_type(diagonal_weight([1.0, math.e, math.exp(math.sqrt(2))]))
    records.append(CheckRecord("eigenvalues {1, e, e^sqrt2}", c.tag.value, TypeTag.III1.value, 0.0 if c.tag is TypeTag.III1 else 1.0, 0.0, c.tag is TypeTag.III1))
    for k in range(n_principal):
        t_nu, t_mu = rng.uniform(-1, 1, size=2)
        w = principal_series_weight([t_nu, t_mu])
        c = classify_type(w)
        ref = principal_series_lambda(t_nu, t_mu)
        computed = c.lam if c.tag is TypeTag.III_LAMBDA else float("nan")
        res = abs(computed - ref) if c.tag is TypeTag.III_LAMBDA else float("inf")
        records.append(CheckRecord(f"principal series ({t_nu:.4f}, {t_mu:.4f})", computed, ref, res, tol, res <= tol))
    return records


def centralizer_unitary(rng, w: Weight) -> AlgebraElement:
    blocks = []
    for evals, vecs in w.eigensystems:
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=len(evals)))
        blocks.append((vecs * phases) @ vecs.conj().T)
    return w.algebra.element(blocks)


def _random_words(rng, alg: Algebra, count: int, max_len: int = 3) -> list[PoissonWord]:
    return [
        PoissonWord(WordKind.EMPTY, tuple(random_element(rng, alg) for _ in range(int(rng.integers(0, max_len + 1)))))
        for _ in range(count)
    ]


def check_channels(rng, n_instances: int = 10, tol: float = 1e-9, corner_tol: float = 1e-8) -> list[CheckRecord]:
    records = []
    for k in range(n_instances):
        # weight-preserving automorphisms: centralizer unitaries and block swaps of equal blocks
        w = random_weight(rng, ((2,), (3,), (2, 1))[k % 3], rng.uniform(0.2, 1.5))
        T = LinearMapOnAlgebra.unitary_conjugation(centralizer_unitary(rng, w))
        words = _random_words(rng, w.algebra, 5)
        wp = check_weight_preserving(T, w, w)
        G = gram_matrix(words, w)
        GT = gram_matrix([lift_on_words(T, wd, weights=(w, w)) for wd in words], w)
        records.append(CheckRecord.bound(f"unitary lift gram #{k}", max(np.abs(G - GT).max(), wp), tol))
        base = random_weight(rng, (2,), rng.uniform(0.1, 0.7))
        b = base.density.blocks[0]
        w2 = weight_from_density([b, b])
        S = LinearMapOnAlgebra.block_embedding(w2.algebra, w2.algebra, [1, 0])
        words = _random_words(rng, w2.algebra, 5)
        G = gram_matrix(words, w2)
        GS = gram_matrix([lift_on_words(S, wd, weights=(w2, w2)) for wd in words], w2)
        records.append(CheckRecord.bound(f"block swap lift gram #{k}", np.abs(G - GS).max(), tol))
        # conditional expectation onto the commutant of a centralizer projection
        e, f = centralizer_projection(rng, w)
        E = LinearMapOnAlgebra.compression(w.algebra, [e, f])
        words = _random_words(rng, w.algebra, 4)
        once = [lift_on_words(E, wd, weights=(w, w)) for wd in words]
        twice = [lift_on_words(E, wd) for wd in once]
        diff = max((max((a - b_).norm() for a, b_ in zip(u.letters, v.letters)) if len(u) else 0.0) for u, v in zip(once, twice))
        records.append(CheckRecord.bound(f"expectation idempotent #{k}", diff, tol))
        cross = gram_matrix(words, w, once) - gram_matrix(once, w)
        records.append(CheckRecord.bound(f"expectation gram-orthogonal #{k}", np.abs(cross).max(), tol))
        # corner projection against the least-squares oracle
        wc = random_weight(rng, ((2,), (2, 1))[k % 2], rng.uniform(0.2, 1.0))
        ec, _ = centralizer_projection(rng, wc)
        word = _random_words(rng, wc.algebra, 1, max_len=2)[0]
        rep = corner_projection_oracle(ec, word, wc, tol=corner_tol)
        records.append(CheckRecord.bound(f"corner projection n={len(word)} M={rep.level_cap} #{k}", rep.residual, corner_tol))
        # a weight-preserving UCP map: mixture of a centralizer conjugation and the expectation
        p = float(rng.uniform(0.1, 0.9))
        U = LinearMapOnAlgebra.unitary_conjugation(centralizer_unitary(rng, w))
        mix = LinearMapOnAlgebra(w.algebra, w.algebra, p * U.matrix + (1 - p) * E.matrix)
        rep = ucp_lift_check(mix, w, w, [list(wd.letters) for wd in words], tol=tol)
        records.append(CheckRecord(f"ucp lift #{k}", rep.contraction_defect, 0.0, max(rep.state_residual, rep.contraction_defect, rep.gram_defect), tol, rep.passed))
    return records


def check_independence(rng, n_pairs: int = 20, fact_tol: float = 1e-12, comm_tol: float = 1e-10) -> list[CheckRecord]:
    records = []
    for k in range(n_pairs):
        dims = ((2,), (2, 1), (1, 1, 1))[k % 3]
        w, e, f, x, y = corner_pair(rng, dims, rng.uniform(0.2, 1.0))
        rep = independence_check(e, f, x, y, w, M=3, n_vectors=2, seed=k)
        records.append(CheckRecord.bound(f"commutator {dims} #{k}", rep.commutator, comm_tol))
        records.append(CheckRecord.bound(f"state factorization {dims} #{k}", rep.factorization, fact_tol))
        records.append(CheckRecord.bound(f"moment factorization {dims} #{k}", rep.moments, fact_tol))
        we = [[], [e @ random_element(rng, w.algebra) @ e], [e @ random_element(rng, w.algebra) @ e] * 2]
        wf = [[], [f @ random_element(rng, w.algebra) @ f]]
        records.append(CheckRecord.bound(f"split gram {dims} #{k}", split_gram_check(e, f, we, wf, w), fact_tol))
    return records


def check_entropy(rng, n_pairs: int = 20, M: int = 30, tol: float = 1e-6, kl_tol: float = 1e-8, levels=None, tables=None) -> list[CheckRecord]:
    records = []
    levels = list(levels) if levels is not None else list(range(2, M + 1, 2))
    if M not in levels:
        levels.append(M)
    rows = []
    for k in range(n_pairs):
        dims = ((2,), (3,))[k % 2]
        rho, psi = dominated_pair(rng, dims, rng.uniform(0.2, 1.5))
        rep = entropy_report(rho, psi, levels)
        value = rep.values[rep.levels.index(M)]
        records.append(CheckRecord.compare(f"entropy {dims} M={M} #{k}", value, rep.lindblad, tol))
        burn = math.ceil(5 * max(rho.mass, psi.mass))
        mono = rep.monotone_after(burn)
        records.append(CheckRecord(f"gap decay after M={burn} #{k}", mono, True, 0.0 if mono else 1.0, 0.0, mono))
        for Mi, v, g, (zr, zp) in zip(rep.levels, rep.values, rep.gaps, rep.renormalization):
            rows.append([k, Mi, v, rep.lindblad, g, zr, zp])
    for a, b in [(0.3, 0.9), (0.7, 1.3), (1.0, 1.0), (1.2, 1.5)]:
        value = poisson_relative_entropy(diagonal_weight([a]), diagonal_weight([b]), 80)
        records.append(CheckRecord.compare(f"scalar KL a={a} b={b}", value, poisson_kl(a, b), kl_tol))
    for k in range(3):
        rho, psi = dominated_pair(rng, (2,), rng.uniform(0.3, 1.0))
        records.append(CheckRecord.compare(f"explicit truncation M=4 #{k}", poisson_relative_entropy(rho, psi, 4), poisson_relative_entropy_explicit(rho, psi, 4), 1e-12))
    for k in range(4):
        rho, psi = dominated_pair(rng, (2,), rng.uniform(0.3, 1.0))
        letters = [random_element(rng, psi.algebra, 0.5) for _ in range(2)]
        records.append(CheckRecord.bound(f"cocycle lift t=0.5 #{k}", cocycle_lift_check(rho, psi, 0.5, letters), 1e-8))
    if tables is not None:
        tables["convergence"] = Table(["pair", "M", "araki", "lindblad", "gap", "rho_trace", "psi_trace"], rows)
    return records


def check_growth(rng, n_samples: int = 1000, max_length: int = 5) -> list[CheckRecord]:
    violations = 0
    worst = 0.0
    for k in range(n_samples):
        dims = ((2,), (1, 1), (3,), (2, 1))[k % 4]
        w = random_weight(rng, dims, rng.uniform(0.05, 3.0))
        n = int(rng.integers(1, max_length + 1))
        letters = [random_element(rng, w.algebra, rng.uniform(0.1, 2.0)) for _ in range(n)]
        rep = growth_bound_check(w, letters)
        violations += not rep.passed
        worst = max(worst, rep.moment_abs / rep.bound if rep.bound > 0 else 0.0)
    return [CheckRecord(f"growth bound over {n_samples} samples", violations, 0, float(violations), 0.0, violations == 0)]


# --- suites ------------------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    suite: str
    seed: int = 0
    dims: tuple[int, ...] | None = None
    mass: float | None = None
    n_instances: int | None = None
    levels: tuple[int, ...] | None = None
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    csv_dir: str | None = None
    figures: str | None = None
    stable_output: bool = False

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {SUITES}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.dims is not None:
            self.dims = tuple(int(d) for d in self.dims)
        if self.levels is not None:
            self.levels = tuple(int(m) for m in self.levels)

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "suite" not in data:
            raise ValueError("config needs a 'suite'")
        return cls(**data)


def parse_levels(spec: str) -> tuple[int, ...]:
    """``"a:b:step"`` (inclusive) or a comma list."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        if len(parts) == 2:
            parts.append(1)
        a, b, step = parts
        if step <= 0 or b < a:
            raise ValueError(f"bad level range {spec!r}")
        return tuple(range(a, b + 1, step))
    return tuple(int(p) for p in spec.split(",") if p)


def _tol(config: ExperimentConfig, key: str, default: float) -> float:
    return float(config.tolerances.get(key, default))


def _n(config: ExperimentConfig, default: int) -> int:
    return int(config.n_instances) if config.n_instances is not None else default


def run_suite(config: ExperimentConfig) -> Report:
    """Run one suite; cap violations become failed records rather than exceptions."""
    rng = np.random.default_rng(config.seed)
    tables: dict[str, Table] = {}
    start = time.perf_counter()
    suite = config.suite
    try:
        if suite == "classical":
            lambdas = (config.mass,) if config.mass is not None else (0.5, 1.7, 4.0)
            records = check_classical(lambdas, tol=_tol(config, "pmf", 1e-12), tables=tables)
        elif suite == "moments":
            records = check_moments(rng, _n(config, 40), _tol(config, "moment", 1e-8))
            records += check_characteristic(rng, 10, _tol(config, "characteristic", 1e-8))
            records += check_growth(rng, 200)
        elif suite == "gram":
            records = check_gram(rng, _n(config, 30), _tol(config, "gram", 1e-8))
        elif suite == "fock":
            n = _n(config, 10)
            records = check_fock(rng, n, n, _tol(config, "gram", 1e-8))
        elif suite == "kms":
            records = check_kms(rng, _n(config, 50), _tol(config, "kms", 1e-8))
        elif suite == "classify":
            records = check_classify(rng, _n(config, 20))
        elif suite == "channels":
            records = check_channels(rng, _n(config, 5), _tol(config, "gram", 1e-9))
        elif suite == "independence":
            records = check_independence(rng, _n(config, 20))
            records += check_corner_multiplicativity(rng, _n(config, 20))
        elif suite == "entropy":
            levels = config.levels or tuple(range(2, 31, 2))
            records = check_entropy(rng, _n(config, 10), max(levels), _tol(config, "entropy", 1e-6), levels=levels, tables=tables)
        else:
            records = check_bernoulli(rng, _n(config, 20), tables=tables)
    except MemoryError as exc:
        records = [CheckRecord(f"{suite} aborted", type(exc).__name__, None, float("inf"), 0.0, False)]
        records[0].computed = str(exc)
    report = Report(suite, int(config.seed), records, tables, time.perf_counter() - start, environment_stamp())
    if config.out:
        dump_json(report.to_json(config.stable_output), config.out, stable=config.stable_output)
    if config.csv_dir:
        report.write_csv(config.csv_dir)
    if config.figures:
        from .plotting import render_report

        render_report(report, config.figures)
    return report
