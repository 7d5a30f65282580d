"""Closed-form block probability and flow of the deterministic traffic rule.

Starting from an uncorrelated random configuration of density ``rho``, the
probability of ``m + 1`` consecutive empty sites at time ``t`` is

    P_t = sum_{j=1}^{t+1} j/(t+1) * C((m+1)(t+1), t+1-j) * rho^(t+1-j) * (1-rho)^(m(t+1)+j)

and the flow is ``1 - rho - P_t``. The same quantity is available as a
terminating Gauss hypergeometric series, as a large-``t`` normal
approximation, and in the ``t -> infinity`` limit.

Floats use log-space terms with exactly rounded summation (``math.fsum``);
passing a :class:`~fractions.Fraction` density gives exact rationals.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

LOG_SPACE_THRESHOLD = 60


class SteadyState:
    """The ``t = infinity`` horizon; use the module constant :data:`STEADY`."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "STEADY"

    def __str__(self) -> str:
        return "inf"


STEADY = SteadyState()
Horizon = Union[int, SteadyState]

Real = Union[float, Fraction]


def _check(m: int, t: int, rho) -> None:
    if m < 1:
        raise ValueError("m must be >= 1")
    if t < 0:
        raise ValueError("t must be >= 0")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must be in [0, 1], got {rho}")


def _use_exact(rho, exact: bool | None) -> bool:
    return isinstance(rho, Fraction) if exact is None else exact


def _logsumexp(logs: Sequence[float]) -> float:
    top = max(logs)
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def exact_block_prob(m: int, t: int, rho, exact: bool | None = None) -> Real:
    """Probability of ``0^(m+1)`` at time ``t`` (finite-``t`` closed form)."""
    _check(m, t, rho)
    T = t + 1
    n = (m + 1) * T
    if _use_exact(rho, exact):
        r = Fraction(rho)
        return sum(
            (Fraction(j, T) * math.comb(n, T - j) * r ** (T - j) * (1 - r) ** (m * T + j)
             for j in range(1, T + 1)),
            Fraction(0),
        )
    rho = float(rho)
    if rho == 0.0:
        return 1.0
    if rho == 1.0:
        return 0.0
    if n <= LOG_SPACE_THRESHOLD:
        return math.fsum(
            j / T * math.comb(n, T - j) * rho ** (T - j) * (1 - rho) ** (m * T + j)
            for j in range(1, T + 1)
        )
    lr, lq = math.log(rho), math.log1p(-rho)
    lgn = math.lgamma(n + 1)
    logs = [
        math.log(j / T) + lgn - math.lgamma(T - j + 1) - math.lgamma(m * T + j + 1)
        + (T - j) * lr + (m * T + j) * lq
        for j in range(1, T + 1)
    ]
    return math.exp(_logsumexp(logs))


def fixed_count_block_prob(m: int, t: int, L: int, N: int) -> float:
    """Expected frequency of ``0^(m+1)`` at time ``t`` on a ring of ``L`` sites holding exactly ``N`` cars.

    The initial cars sit on a uniform random ``N``-subset. A window of
    ``p = (m+1)(t+1)`` sites with ``n1`` given ones then occurs with probability
    ``C(L-p, N-n1) / C(L, N)`` instead of the Bernoulli weight, which shifts the
    result by ``O(p/L)``. Needs ``p <= L`` so the light cone does not wrap.
    """
    from .preimages import count_admissible

    p = (m + 1) * (t + 1)
    if not 0 <= N <= L:
        raise ValueError("need 0 <= N <= L")
    if p > L:
        raise ValueError(f"light cone of {p} sites does not fit on a ring of {L}")

    def log_comb(a: int, b: int) -> float:
        return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)

    total = log_comb(L, N)
    logs = [math.log(c) + log_comb(L - p, N - n1) - total
            for n1, c in count_admissible(m, t).by_ones.items() if 0 <= N - n1 <= L - p]
    return math.exp(_logsumexp(logs)) if logs else 0.0


def exact_flow(m: int, t: int, rho, exact: bool | None = None) -> Real:
    p = exact_block_prob(m, t, rho, exact)
    if isinstance(p, Fraction):
        return 1 - Fraction(rho) - p
    return 1.0 - float(rho) - p


def _hyp2f1_log_terms(a, n: int, c, z: float) -> tuple[list[float], list[float]]:
    """Signs and log-magnitudes of the terms of ``2F1(a, -n; c; z)``."""
    logs, signs = [0.0], [1.0]
    if z == 0:
        return signs, logs
    lz = math.log(abs(z))
    for k in range(n):
        ratio = (a + k) * (k - n) / ((c + k) * (k + 1))
        if ratio == 0:
            break
        logs.append(logs[-1] + math.log(abs(ratio)) + lz)
        signs.append(signs[-1] * math.copysign(1.0, ratio) * math.copysign(1.0, z))
    return signs, logs


def hyp2f1_terminating(a, n: int, c, z):
    """``2F1(a, -n; c; z)``, the polynomial of degree ``n``, by term recurrence.

    Exact for Fraction arguments. For floats the terms are carried as
    (sign, log-magnitude) and summed with ``math.fsum``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(z, Fraction):
        term, total = Fraction(1), Fraction(1)
        for k in range(n):
            term *= Fraction((a + k) * (k - n), (c + k) * (k + 1)) * z
            total += term
        return total
    signs, logs = _hyp2f1_log_terms(a, n, c, float(z))
    top = max(logs)
    return math.exp(top) * math.fsum(s * math.exp(x - top) for s, x in zip(signs, logs))


def flow_hypergeometric(m: int, t: int, rho: float) -> float:
    """Flow through the hypergeometric form; undefined at ``rho = 0`` (use :func:`exact_flow`)."""
    _check(m, t, rho)
    if rho == 0:
        raise ValueError("hypergeometric form is singular at rho = 0; use exact_flow")
    rho = float(rho)
    if rho == 1.0:
        return 0.0
    n = (m + 1) * (t + 1)
    c = 2 + m + m * t
    log_pref = (
        (1 + m + m * t) * math.log1p(-rho) + t * math.log(rho)
        + math.lgamma(n + 1) - math.log(1 + m + m * t)
        - math.lgamma(t + 2) - math.lgamma(m + m * t + 1)
    )
    # z = 1 - 1/rho <= 0 makes every term non-negative, so the sum stays in log space
    signs, logs = _hyp2f1_log_terms(2, t, c, 1.0 - 1.0 / rho)
    assert min(signs) > 0
    return 1.0 - rho - math.exp(log_pref + _logsumexp(logs))


def steady_state_block_prob(m: int, rho) -> Real:
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    return max(1 - (m + 1) * rho, 0 * rho)


def steady_state_flow(m: int, rho) -> Real:
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    if isinstance(rho, Fraction):
        critical = Fraction(1, m + 1)
    else:
        critical = 1 / (m + 1)
    return m * rho if rho < critical else 1 - rho


def approx_block_prob_large_t(m: int, t: int, rho: float) -> float:
    """Normal approximation to the binomial terms, sum replaced by an integral.

    Accurate to ``O(t**-1/2)``; useful where ``t`` is too large for the exact sum.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if not 0 < rho < 1:
        raise ValueError("normal approximation needs 0 < rho < 1")
    T, M = t + 1, m + 1
    var = M * T * rho * (1 - rho)
    scale = math.sqrt(2 * var)
    lo = 1 - T + M * rho * T
    hi = M * rho * T
    gauss = math.sqrt(M * rho * (1 - rho) / (2 * math.pi * T)) * (
        math.exp(-lo * lo / (2 * var)) - math.exp(-M * rho * T / (2 * (1 - rho)))
    )
    return gauss + 0.5 * (1 - M * rho) * (math.erf(hi / scale) - math.erf(lo / scale))


@dataclass(frozen=True)
class AnalyticPoint:
    m: int
    t: Horizon
    rho: Real
    p_block: Real
    flow: Real

    @property
    def T(self) -> Horizon:
        return self.t if self.t is STEADY else self.t + 1

    @property
    def M(self) -> int:
        return self.m + 1


@dataclass
class AnalyticSeries:
    m: int
    mode: str
    points: list[AnalyticPoint] = field(default_factory=list)
    key: str = "rho"  # varying column: "rho" or "t"

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, header: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        buf.write(f"# m={self.m} mode={self.mode}")
        if self.key == "rho":
            ts = {str(p.t) for p in self.points}
            buf.write(f" t={','.join(sorted(ts)) if ts else '-'}")
        buf.write("\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "rho", "p_block", "flow"])
        for p in self.points:
            w.writerow([str(p.t), _fmt(p.rho), _fmt(p.p_block), _fmt(p.flow)])
        return buf.getvalue()


def _fmt(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def analytic_point(m: int, t: Horizon, rho, exact: bool = False) -> AnalyticPoint:
    if exact:
        rho = Fraction(rho)
    if t is STEADY:
        return AnalyticPoint(m, t, rho, steady_state_block_prob(m, rho), steady_state_flow(m, rho))
    p = exact_block_prob(m, t, rho, exact)
    return AnalyticPoint(m, t, rho, p, (1 - rho - p) if exact else 1.0 - float(rho) - p)


def fundamental_diagram(m: int, t: Horizon, rho_grid: Iterable, exact: bool = False) -> AnalyticSeries:
    """Flow against density at a fixed horizon (finite ``t`` or :data:`STEADY`)."""
    mode = "exact" if exact else "float"
    return AnalyticSeries(m, mode, [analytic_point(m, t, r, exact) for r in rho_grid], key="rho")


def flow_in_time(m: int, rho, t_values: Iterable[int], exact: bool = False) -> AnalyticSeries:
    """Flow against time at a fixed density."""
    mode = "exact" if exact else "float"
    return AnalyticSeries(m, mode, [analytic_point(m, t, rho, exact) for t in t_values], key="t")
