"""Moment certification: explicit, slack-controlled bounds on power sums.

The certified quantity is C_r, an upper estimate of the series
sum_k p_k**(1 - r) for a moment order r in (0, 1). Certificates record
the truncation index actually summed and the slack added on top, and
they serialise to a stable JSON shape so a certification can be reused
by later bound computations.

Tail handling differs by certificate shape. For a power-law mass cap the
truncation index comes from a closed form driven by the integral bound
on the remainder; for a ratio cap the remainder is dominated by a
geometric series anchored at the first unsummed mass.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .distributions import GeometricRatioTail, PmfModel, PowerLawTail, NORMALIZATION_TOL
from .errors import AdmissibilityError, ModelError, ResourceCapError
from .summation import indexed_chunk_sum

__all__ = [
    "DEFAULT_SLACK",
    "TRUNCATION_CAP",
    "MomentCertificate",
    "EntropyInterval",
    "admissible_r_interval",
    "default_r",
    "certify_moment",
    "certify_moment_powerlaw",
    "certify_moment_ratio",
    "power_sum_partial",
    "tail_power_sum_bound",
    "entropy_interval",
    "entropy_upper_coarse",
]

DEFAULT_SLACK = 1e-6

# Partial sums refuse to run past this index; tolerances that need more
# terms surface as clean errors instead of multi-hour loops.
TRUNCATION_CAP = 10**9

_PROVENANCES = ("powerlaw", "ratio")


@dataclass(frozen=True)
class MomentCertificate:
    """A certified upper estimate C_r of sum_k p_k**(1 - r).

    ``truncation_index`` is the last index included in the exact partial
    sum; ``slack`` is the amount added to cover the remaining tail. The
    remainder the construction actually controls is at most ``slack``,
    so C_r overshoots the true series by at most ``slack`` as well.
    """

    r: float
    C_r: float
    slack: float
    truncation_index: int
    provenance: str

    def __post_init__(self) -> None:
        if not (0.0 < self.r < 1.0):
            raise AdmissibilityError(f"moment order r must lie in (0, 1), got {self.r!r}")
        if not (self.C_r > 0 and math.isfinite(self.C_r)):
            raise ValueError(f"C_r must be positive and finite, got {self.C_r!r}")
        if not (self.slack >= 0 and math.isfinite(self.slack)):
            raise ValueError(f"slack must be nonnegative, got {self.slack!r}")
        if not (isinstance(self.truncation_index, int) and self.truncation_index >= 0):
            raise ValueError(f"truncation_index must be an integer >= 0, got {self.truncation_index!r}")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"provenance must be one of {_PROVENANCES}, got {self.provenance!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "MomentCertificate":
        return cls(
            r=float(payload["r"]),
            C_r=float(payload["C_r"]),
            slack=float(payload["slack"]),
            truncation_index=int(payload["truncation_index"]),
            provenance=str(payload["provenance"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MomentCertificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class EntropyInterval:
    """Two-sided enclosure of a model's entropy, in nats."""

    lower: float
    upper: float
    tolerance: float

    def __post_init__(self) -> None:
        if not (self.lower <= self.upper):
            raise ValueError(f"empty entropy interval [{self.lower}, {self.upper}]")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def admissible_r_interval(tail: PowerLawTail | GeometricRatioTail) -> tuple[float, float]:
    """Open interval of moment orders the tail certificate admits."""
    if isinstance(tail, PowerLawTail):
        return (0.0, (tail.alpha - 1.0) / tail.alpha)
    if isinstance(tail, GeometricRatioTail):
        return (0.0, 1.0)
    raise TypeError(f"not a tail certificate: {tail!r}")


def default_r(tail: PowerLawTail | GeometricRatioTail) -> float:
    """Default moment order: midpoint of the admissible interval for
    power-law tails, one half for ratio tails."""
    if isinstance(tail, PowerLawTail):
        return (tail.alpha - 1.0) / (2.0 * tail.alpha)
    return 0.5


def _require_admissible(r: float, tail: PowerLawTail | GeometricRatioTail) -> None:
    lo, hi = admissible_r_interval(tail)
    if not (lo < r < hi):
        raise AdmissibilityError(
            f"inadmissible r: {r!r} lies outside the admissible interval ({lo:g}, {hi:g})"
        )


def power_sum_partial(model: PmfModel, r: float, k_max: int) -> float:
    """Exact partial sum of p_k**(1 - r) for k = 1..k_max.

    Always a lower bound on the full series. Terms are evaluated in
    log space and accumulated in increasing k with compensation.
    """
    if not (0.0 < r < 1.0):
        raise AdmissibilityError(f"moment order r must lie in (0, 1), got {r!r}")
    if k_max < 1:
        return 0.0
    s = 1.0 - r
    return indexed_chunk_sum(lambda ks: np.exp(s * model.log_pmf_array(ks)), 1, k_max)


def _log_mass_upper(model: PmfModel, tail: GeometricRatioTail, k: int) -> float:
    """log of an upper bound on p_k, exact whenever the mass is listed."""
    n = model.max_index()
    if n is None or k <= n:
        return model.log_pmf(k)
    if n < tail.k0:
        raise ModelError(
            f"ratio tail certificate starts at k0={tail.k0}, beyond the {n} listed "
            "masses; no anchor exists for the unlisted tail"
        )
    # Beyond the table, chain the ratio cap from the last listed mass.
    return model.log_pmf(n) + (k - n) * math.log(tail.q)


def tail_power_sum_bound(
    model: PmfModel,
    tail: PowerLawTail | GeometricRatioTail,
    k_from: int,
    s: float,
) -> float:
    """Certified upper bound on sum_{k > k_from} p_k**s for s in (0, 1].

    Power-law tails use the integral bound on c0**s * k**(-alpha*s), which
    requires alpha*s > 1; ratio tails dominate the sum by a geometric
    series starting at the first excluded mass.
    """
    if not (0.0 < s <= 1.0):
        raise ValueError(f"power must lie in (0, 1], got {s!r}")
    if k_from < tail.k0:
        raise ValueError(f"tail bound needs a start index >= k0={tail.k0}, got {k_from}")
    if isinstance(tail, PowerLawTail):
        decay = tail.alpha * s - 1.0
        if decay <= 0.0:
            raise AdmissibilityError(
                f"power sum at exponent {s:g} is not certified by a power-law tail "
                f"with alpha={tail.alpha:g}; need alpha * exponent > 1"
            )
        return tail.c0**s * float(k_from) ** (-decay) / decay
    head = math.exp(s * _log_mass_upper(model, tail, k_from + 1))
    return head / (1.0 - tail.q**s)


def certify_moment_powerlaw(
    model: PmfModel,
    r: float,
    eps: float = DEFAULT_SLACK,
    tail: PowerLawTail | None = None,
) -> MomentCertificate:
    """Certify C_r for a model whose tail carries a power-law mass cap.

    The truncation index is the closed form
    k1 = max(k0, ceil((eps * (alpha*(1-r) - 1) / c0) ** (-1 / (alpha*(1-r) - 1))))
    and C_r is the exact partial sum through k1 plus eps.
    """
    if tail is None:
        tail = model.tail_certificate()
    if not isinstance(tail, PowerLawTail):
        raise ModelError(f"power-law certification needs a power-law tail, got {tail!r}")
    _require_admissible(r, tail)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"slack must be positive and finite, got {eps!r}")
    decay = tail.alpha * (1.0 - r) - 1.0
    try:
        raw = (eps * decay / tail.c0) ** (-1.0 / decay)
    except OverflowError:
        raw = math.inf
    if not math.isfinite(raw):
        raise ResourceCapError(
            f"slack {eps:g} at r={r:g} needs a truncation index beyond float range"
        )
    k1 = max(tail.k0, math.ceil(raw), 1)
    if k1 > TRUNCATION_CAP:
        raise ResourceCapError(
            f"slack {eps:g} at r={r:g} needs partial sums through index {float(k1):.4g}, "
            f"beyond the cap of {TRUNCATION_CAP}"
        )
    partial = power_sum_partial(model, r, k1)
    return MomentCertificate(
        r=r, C_r=partial + eps, slack=eps, truncation_index=k1, provenance="powerlaw"
    )


def certify_moment_ratio(
    model: PmfModel,
    r: float,
    eps: float = DEFAULT_SLACK,
    tail: GeometricRatioTail | None = None,
) -> MomentCertificate:
    """Certify C_r for a model whose tail carries a ratio cap.

    Finds the smallest m >= k0 whose geometric remainder bound
    p_{m+1}**(1-r) / (1 - q**(1-r)) is at most eps, then returns the exact
    partial sum through m plus eps. Because the remainder bound genuinely
    dominates the discarded tail, C_r here never undershoots the series.
    """
    if tail is None:
        tail = model.tail_certificate()
    if not isinstance(tail, GeometricRatioTail):
        raise ModelError(f"ratio certification needs a ratio tail, got {tail!r}")
    _require_admissible(r, tail)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"slack must be positive and finite, got {eps!r}")
    s = 1.0 - r
    denom = 1.0 - tail.q**s
    limit = model.max_index() if model.max_index() is not None else TRUNCATION_CAP
    m = tail.k0
    while True:
        if math.exp(s * _log_mass_upper(model, tail, m + 1)) / denom <= eps:
            break
        m += 1
        if m > limit:
            if model.max_index() is not None:
                raise ModelError(
                    f"slack {eps:g} at r={r:g} is unreachable with only "
                    f"{model.max_index()} listed masses"
                )
            raise ResourceCapError(
                f"slack {eps:g} at r={r:g} needs partial sums beyond the cap of {TRUNCATION_CAP}"
            )
    partial = power_sum_partial(model, r, m)
    return MomentCertificate(
        r=r, C_r=partial + eps, slack=eps, truncation_index=m, provenance="ratio"
    )


def certify_moment(
    model: PmfModel,
    r: float | None = None,
    eps: float = DEFAULT_SLACK,
) -> MomentCertificate:
    """Certify C_r, dispatching on the model's own tail certificate.

    When ``r`` is omitted the default order rule applies.
    """
    tail = model.tail_certificate()
    if r is None:
        r = default_r(tail)
    if isinstance(tail, PowerLawTail):
        return certify_moment_powerlaw(model, r, eps, tail=tail)
    return certify_moment_ratio(model, r, eps, tail=tail)


def _entropy_term(model: PmfModel):
    def term(ks: np.ndarray) -> np.ndarray:
        lp = model.log_pmf_array(ks)
        return -np.exp(lp) * lp

    return term


def entropy_interval(model: PmfModel, certificate: MomentCertificate, tol: float) -> EntropyInterval:
    """Enclose the entropy H = -sum p_k log p_k in an interval of width <= tol.

    The lower endpoint is an exact partial sum (every term is nonnegative,
    so truncation can only undershoot). The upper endpoint adds the
    certified tail remainder of the power sum at order ``certificate.r``,
    scaled by 1/(e*r): pointwise, -p log p <= p**(1-r) / (e*r).
    """
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError(f"tolerance must be positive and finite, got {tol!r}")
    r = certificate.r
    scale = 1.0 / (math.e * r)
    table_end = model.max_index()

    if table_end is not None and getattr(model, "missing", 0.0) <= NORMALIZATION_TOL:
        # A complete table has no tail to bound; the sum is exact.
        exact = indexed_chunk_sum(_entropy_term(model), 1, table_end)
        return EntropyInterval(lower=exact, upper=exact, tolerance=tol)

    tail = model.tail_certificate()
    k_cut = max(64, tail.k0)
    if table_end is not None:
        k_cut = min(k_cut, table_end)
    while True:
        remainder = tail_power_sum_bound(model, tail, k_cut, 1.0 - r) * scale
        if remainder <= tol:
            break
        if table_end is not None and k_cut >= table_end:
            raise ResourceCapError(
                f"entropy tolerance {tol:g} is unreachable with {table_end} listed masses"
            )
        k_cut *= 2
        if k_cut > TRUNCATION_CAP:
            raise ResourceCapError(
                f"entropy tolerance {tol:g} at r={r:g} needs partial sums beyond "
                f"the cap of {TRUNCATION_CAP}"
            )
        if table_end is not None:
            k_cut = min(k_cut, table_end)
    lower = indexed_chunk_sum(_entropy_term(model), 1, k_cut)
    return EntropyInterval(lower=lower, upper=lower + remainder, tolerance=tol)


def entropy_upper_coarse(certificate: MomentCertificate) -> float:
    """One-line entropy cap C_r / (e * r), no extra summation required."""
    return certificate.C_r / (math.e * certificate.r)
