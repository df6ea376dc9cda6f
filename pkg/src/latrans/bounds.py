"""The entropy upper bound on transversal counts, made checkable.

Everything here uses the exact finite-n inequalities; no o(1) terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .counting import count_exact, enumerate_transversals
from .errors import BoundViolation, DomainError, NotATransversal
from .hypercube import (
    Element,
    HypercubeTransversal,
    LatinHypercube01,
    from_square,
    transversal_from_square,
)
from .latin import LatinSquare


@dataclass(frozen=True)
class BoundValue:
    d: int
    n: int
    log_upper: float
    log_lower_target: float


def _integrand(alpha, d, n):
    return math.log(d * d * n ** (d - 2) + (1 - d * d / n) * n ** (d - 1) * alpha**d)


def bound_integral_closed_d2(n: int) -> float:
    """Integral over [0, 1] of log(4 + (n-4) a^2), closed form (needs n > 4).

    With c = n - 4 the antiderivative is a log(4 + c a^2) - 2a + (4/sqrt c) atan(a sqrt(c) / 2).
    """
    c = n - 4
    if c <= 0:
        raise DomainError(f"closed form needs n > 4, got {n}")
    rc = math.sqrt(c)
    return math.log(n) - 2 + 4 / rc * math.atan(rc / 2)


def bound_integral_quad(d: int, n: int) -> float:
    # The integrand bends sharply near alpha ~ (d^2/n)^(1/d); hint quad there.
    knee = min(0.5, (d * d / n) ** (1 / d))
    val, _ = integrate.quad(
        _integrand, 0.0, 1.0, args=(d, n), points=[knee], epsabs=1e-13, epsrel=1e-13, limit=200
    )
    return val


def upper_bound_log(d: int, n: int, *, method: str = "auto") -> BoundValue:
    """n times the integral over [0,1] of log(d^2 n^(d-2) + (1 - d^2/n) n^(d-1) a^d).

    An upper bound on the log of the number of transversals of any
    order-n, d-dimensional Latin hypercube. `method` is "auto" (closed
    form for d = 2, quadrature otherwise), "closed" or "quad".
    """
    if d < 2:
        # with d = 1 the first term d^2 n^(d-2) drops below 1 and the inequality fails
        raise DomainError(f"d must be >= 2, got {d}")
    if n <= d * d:
        raise DomainError(f"bound needs n > d^2 = {d * d}, got n = {n}")
    if method == "closed" or (method == "auto" and d == 2):
        if d != 2:
            raise DomainError("closed form is only available for d = 2")
        integral = bound_integral_closed_d2(n)
    elif method in ("quad", "auto"):
        integral = bound_integral_quad(d, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BoundValue(d, n, n * integral, n * ((d - 1) * math.log(n) - d))


@dataclass(frozen=True)
class AlphaProcessTrace:
    alphas: tuple[float, ...]
    expose_order: tuple[int, ...]
    legal_counts: tuple[int, ...]  # indexed by hyperplane
    transversal: HypercubeTransversal


def _require(h: LatinHypercube01, x: HypercubeTransversal) -> None:
    if h.dim < 2:
        raise DomainError("claims are stated for d >= 2")
    if not x.is_valid_for(h):
        raise NotATransversal("not a transversal of the given hypercube")


def legal_counts(h: LatinHypercube01, x: HypercubeTransversal, alphas) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Expose order (decreasing alpha, ties by index) and N_i for each hyperplane i."""
    n, d = h.order, h.dim
    alphas = list(alphas)
    order = sorted(range(n), key=lambda i: (-alphas[i], i))
    planes = [h.hyperplane(i) for i in range(n)]
    # used[m] = set of values seen on axis m among exposed elements
    used = [set() for _ in range(d + 1)]
    counts = [0] * n
    for i in order:
        counts[i] = sum(
            1 for e in planes[i] if not any(e[m] in used[m] for m in range(d + 1))
        )
        xi = x.element_in(i)
        for m in range(d + 1):
            used[m].add(xi[m])
    return tuple(order), tuple(counts)


def sample_alpha_process(h: LatinHypercube01, x: HypercubeTransversal, seed: int) -> AlphaProcessTrace:
    """Draw uniform alphas and record how many 1-elements of each hyperplane stay legal."""
    if not x.is_valid_for(h):
        raise NotATransversal("not a transversal of the given hypercube")
    alphas = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1)])).random(h.order)
    order, counts = legal_counts(h, x, alphas)
    return AlphaProcessTrace(tuple(float(a) for a in alphas), order, counts, x)


@dataclass(frozen=True)
class ClaimReport:
    hyperplane: int
    U_size: int
    claim1_bound: int
    claim1_ok: bool
    claim2_ok: bool | None = None
    counterexample: Element | None = None


def _u_set(h, x, i):
    plane = h.hyperplane(i)
    U = {v for v in plane if any(sum(p == q for p, q in zip(v, e)) >= 2 for e in x.elements)}
    return plane, U


def verify_claim1(h: LatinHypercube01, x: HypercubeTransversal, i: int) -> ClaimReport:
    """|U| <= d^2 n^(d-2), where U holds the 1-elements of hyperplane i
    sharing at least two indices with some element of x."""
    _require(h, x)
    d, n = h.dim, h.order
    _, U = _u_set(h, x, i)
    bound = d * d * n ** (d - 2)
    return ClaimReport(i, len(U), bound, len(U) <= bound)


def verify_claim2(h: LatinHypercube01, x: HypercubeTransversal, i: int) -> ClaimReport:
    """Every 1-element v of hyperplane i outside U has d distinct rule-out
    hyperplanes, none equal to i.

    The rule-out hyperplane for axis k >= 1 is the j whose X_j agrees with v
    on axis k; x being a transversal makes it unique.
    """
    _require(h, x)
    d, n = h.dim, h.order
    plane, U = _u_set(h, x, i)
    bound = d * d * n ** (d - 2)
    owner = [{e[k]: e[0] for e in x.elements} for k in range(d + 1)]
    bad = None
    for v in plane:
        if v in U:
            continue
        rulers = {owner[k][v[k]] for k in range(1, d + 1)}
        if len(rulers) != d or i in rulers:
            bad = v
            break
    return ClaimReport(i, len(U), bound, len(U) <= bound, bad is None, bad)


def verify_claims_all(h: LatinHypercube01, x: HypercubeTransversal) -> list[ClaimReport]:
    return [verify_claim2(h, x, i) for i in range(h.order)]


@dataclass(frozen=True)
class EntropyGap:
    log_count: float
    log_upper: float


def entropy_gap_report(square: LatinSquare, *, max_order: int | None = None) -> EntropyGap:
    """log of the exact transversal count next to the entropy bound for its order."""
    n = square.order
    if n <= 4:
        raise DomainError(f"bound needs n > 4, got {n}")
    count = count_exact(square, max_order=max_order).count
    log_count = math.log(count) if count else -math.inf
    log_upper = upper_bound_log(2, n).log_upper
    if log_count > log_upper:
        raise BoundViolation(f"log T = {log_count} exceeds the bound {log_upper}")
    return EntropyGap(log_count, log_upper)


@dataclass(frozen=True)
class ChainEstimate:
    mean: float
    stderr: float
    samples: int
    log_count: float


def entropy_chain_estimate(square: LatinSquare, samples: int, seed: int) -> ChainEstimate:
    """Monte Carlo mean of sum_i log N_i with X uniform over all transversals.

    Its expectation upper-bounds log T(square) (chain rule plus Jensen);
    the square must be small enough to enumerate.
    """
    ts = enumerate_transversals(square)
    if not ts:
        raise ValueError("square has no transversals")
    h = from_square(square)
    xs = [transversal_from_square(square, t) for t in ts]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1)]))
    vals = np.empty(samples)
    for s in range(samples):
        x = xs[int(rng.integers(len(xs)))]
        _, counts = legal_counts(h, x, rng.random(square.order))
        vals[s] = sum(math.log(c) for c in counts)
    return ChainEstimate(
        float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), samples, math.log(len(ts))
    )
