"""Lifted modular flow, KMS residuals, Arveson spectrum and factor-type classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import Algebra, AlgebraElement, Weight, modular_flow, modular_flow_complex, weight_eval
from .fock import PoissonWord

# tolerance on normalized log-ratios and denominator thresholds for the lattice search
LATTICE_TOL = 1e-9
LOOSE_FACTOR = 100.0
COMMENSURATE_MAX_DENOMINATOR = 1000
SEARCH_MAX_DENOMINATOR = 10 ** 6


def lift_modular_flow(word: PoissonWord, weight: Weight, t: float) -> PoissonWord:
    """``Delta^{it}`` on a word: the modular flow applied letterwise."""
    return word.map_letters(lambda x: modular_flow(weight, x, t))


def kms_residual(w: Weight, x: AlgebraElement, y: AlgebraElement, t: float) -> float:
    """``|phi(Gamma(sigma_{t+i}(x)) Gamma(y)) - phi(Gamma(y) Gamma(sigma_t(x)))|`` for contractions.

    Uses ``Gamma(a) Gamma(b) = Gamma(ab)`` and ``phi(Gamma(a)) = exp(w(a) - w(1))``.
    """
    for z in (x, y):
        if z.norm() > 1 + 1e-12:
            raise ValueError(f"argument has norm {z.norm():.6g} > 1")
    shifted = modular_flow_complex(w, x, complex(t, 1.0))
    lhs = np.exp(weight_eval(w, shifted @ y) - w.mass)
    rhs = np.exp(weight_eval(w, y @ modular_flow(w, x, t)) - w.mass)
    return float(abs(lhs - rhs))


def arveson_spectrum(w: Weight) -> np.ndarray:
    """Sorted eigenvalue ratios of the modular operator (deduplicated at relative 1e-10)."""
    return w.modular.spectrum.copy()


class TypeTag(enum.Enum):
    II1 = "II_1"
    III_LAMBDA = "III_lambda"
    III1 = "III_1"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class TypeClass:
    tag: TypeTag
    lam: float | None = None
    log_spectrum: tuple[float, ...] = ()
    step: float | None = None
    denominators: tuple[int, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "type": self.tag.value,
            "lambda": self.lam,
            "step": self.step,
            "log_spectrum": list(self.log_spectrum),
            "denominators": list(self.denominators),
        }


def _min_denominator(r: float, tol: float, qmax: int) -> Fraction | None:
    """Smallest-denominator continued-fraction convergent within ``tol`` of ``r``."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    x = r
    for _ in range(64):
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > qmax:
            return None
        if abs(r - h1 / k1) <= tol * max(1.0, abs(r)):
            return Fraction(h1, k1)
        frac = x - a
        if frac < 1e-300:
            return Fraction(h1, k1)
        x = 1.0 / frac
    return None


def _dedupe_logs(spectrum, rtol: float = 1e-10) -> list[float]:
    out: list[float] = []
    for l in sorted(abs(math.log(s)) for s in spectrum):
        if l <= 1e-12:
            continue
        if out and l - out[-1] <= rtol * l:
            continue
        out.append(l)
    return out


def classify_spectrum(spectrum: Sequence[float], tol: float = LATTICE_TOL) -> TypeClass:
    """Classify from a finite, inversion-closed ratio set.

    Each positive log is divided by the smallest one and approximated by the
    smallest-denominator convergent within ``tol``.  All denominators ``<= 1000``:
    the logs lie on a lattice with step ``h`` and the type is ``III_lambda`` with
    ``lambda = e^{-h}``.  Otherwise, if some ratio needs a strictly larger denominator at
    ``tol`` than at ``100 tol`` (or none up to ``10^6``), it behaves as irrational and the type
    is ``III_1``.  The remaining case (a stable but large denominator) is ``Indeterminate``.
    """
    logs = _dedupe_logs(spectrum)
    if not logs:
        return TypeClass(TypeTag.II1, None, ())
    l0 = logs[0]
    fracs = []
    irrational = False
    for l in logs:
        f = _min_denominator(l / l0, tol, SEARCH_MAX_DENOMINATOR)
        if f is None:
            irrational = True
            break
        fracs.append(f)
        if f.denominator > COMMENSURATE_MAX_DENOMINATOR:
            loose = _min_denominator(l / l0, tol * LOOSE_FACTOR, SEARCH_MAX_DENOMINATOR)
            if loose is None or loose.denominator < f.denominator:
                irrational = True
                break
    qs = tuple(f.denominator for f in fracs)
    if irrational:
        return TypeClass(TypeTag.III1, None, tuple(logs), None, qs)
    if max(qs) > COMMENSURATE_MAX_DENOMINATOR:
        return TypeClass(TypeTag.INDETERMINATE, None, tuple(logs), None, qs)
    L = math.lcm(*qs)
    g = math.gcd(*(f.numerator * (L // f.denominator) for f in fracs))
    h = l0 * g / L
    return TypeClass(TypeTag.III_LAMBDA, math.exp(-h), tuple(logs), h, qs)


def classify_type(w: Weight, tol: float = LATTICE_TOL) -> TypeClass:
    """Type of the (stabilized) Poisson algebra read off from the modular spectrum of ``w``."""
    return classify_spectrum(arveson_spectrum(w), tol)


def principal_series_weight(t_values: Sequence[float], theta: float = 2 * math.pi, dims: Sequence[int] | None = None) -> Weight:
    """Unit-mass weight on ``M_{sum dims}`` with density ``e^{theta |t_k|}`` on the k-th diagonal block.

    A single matrix block is used so that every pair ``(t_nu, t_mu)`` contributes the ratio
    ``e^{theta (|t_nu| - |t_mu|)}`` to the modular spectrum.
    """
    t_values = [float(t) for t in t_values]
    if not t_values:
        raise ValueError("need at least one t value")
    dims = [1] * len(t_values) if dims is None else [int(d) for d in dims]
    if len(dims) != len(t_values) or min(dims) < 1:
        raise ValueError("dims must be positive and match t_values")
    # shift exponents before exponentiating; normalization removes the shift
    exps = np.array([theta * abs(t) for t in t_values])
    exps -= exps.max()
    diag = np.concatenate([np.full(d, math.exp(e)) for d, e in zip(dims, exps)])
    diag /= diag.sum()
    alg = Algebra((len(diag),))
    return Weight(alg.element([np.diag(diag).astype(complex)]))


def principal_series_lambda(t_nu: float, t_mu: float, theta: float = 2 * math.pi) -> float:
    """``min{e^{theta(|t_nu| - |t_mu|)}, e^{theta(|t_mu| - |t_nu|)}}``."""
    a = theta * (abs(t_nu) - abs(t_mu))
    return min(math.exp(a), math.exp(-a))
