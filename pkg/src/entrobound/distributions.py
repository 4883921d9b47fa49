"""Discrete distributions on the 1-based positive integers with tail control.

Every model exposes exact log-probabilities, reproducible inverse-CDF
sampling, and a tail certificate describing how fast its masses decay.
Certificates come in two shapes: a power-law cap on individual masses,
and a geometric cap on successive mass ratios. They are the entry point
for everything else in this package; moment certification, entropy
intervals, and deviation bounds all consume them.

Outcomes are indexed k = 1, 2, 3, ... throughout. Families that are
conventionally supported on counts starting at zero (Poisson, negative
binomial) are shifted so that outcome k carries the mass of count k - 1.
"""

from __future__ import annotations

import abc
import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln
from scipy.special import zeta as _riemann_zeta

from .errors import MissingCertificateError, ModelError, ResourceCapError
from .summation import compensated_sum

__all__ = [
    "PowerLawTail",
    "GeometricRatioTail",
    "PmfModel",
    "Poisson",
    "Geometric",
    "NegativeBinomial",
    "Zeta",
    "Tabulated",
    "NORMALIZATION_TOL",
]

NORMALIZATION_TOL = 1e-12

# Inverse-CDF caches refuse to grow past this many entries. The cap is
# a memory guard (float64 entries), not a correctness limit, so it is
# deliberately far below the truncation cap used for certified sums.
_CDF_INDEX_CAP = 2**27

# Absolute slack, on the log scale, granted when spot-checking certificate
# inequalities that the model satisfies with equality up to rounding.
_SPOT_CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class PowerLawTail:
    """Asserts p_k <= c0 * k**(-alpha) for every k > k0."""

    k0: int
    c0: float
    alpha: float

    def __post_init__(self) -> None:
        if not (isinstance(self.k0, int) and self.k0 >= 0):
            raise ModelError(f"power-law tail start must be an integer >= 0, got {self.k0!r}")
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ModelError(f"power-law tail constant must be positive and finite, got {self.c0!r}")
        if not (self.alpha > 1 and math.isfinite(self.alpha)):
            raise ModelError(f"power-law tail exponent must exceed 1, got {self.alpha!r}")

    def spot_check(self, model: "PmfModel", probes: int = 100, span: int = 10**6, seed: int = 0) -> None:
        """Probe pseudo-random indices beyond k0 and verify the mass cap."""
        hi = self.k0 + span
        if model.max_index() is not None:
            hi = min(hi, model.max_index())
        if hi <= self.k0:
            return
        rng = np.random.default_rng(seed)
        ks = rng.integers(self.k0 + 1, hi + 1, size=probes, dtype=np.int64)
        log_cap = math.log(self.c0) - self.alpha * np.log(ks.astype(np.float64))
        log_p = model.log_pmf_array(ks)
        bad = np.nonzero(log_p > log_cap + _SPOT_CHECK_SLACK)[0]
        if bad.size:
            k = int(ks[bad[0]])
            raise ModelError(
                f"power-law tail certificate violated at k={k}: "
                f"log p = {float(log_p[bad[0]]):.6g} exceeds cap {float(log_cap[bad[0]]):.6g}"
            )

    def to_dict(self) -> dict:
        return {"type": "powerlaw", "k0": self.k0, "c0": self.c0, "alpha": self.alpha}


@dataclass(frozen=True)
class GeometricRatioTail:
    """Asserts p_{k+1} / p_k <= q for every k >= k0."""

    k0: int
    q: float

    def __post_init__(self) -> None:
        if not (isinstance(self.k0, int) and self.k0 >= 1):
            raise ModelError(f"ratio tail start must be an integer >= 1, got {self.k0!r}")
        if not (0.0 < self.q < 1.0):
            raise ModelError(f"ratio tail factor must lie in (0, 1), got {self.q!r}")

    def spot_check(self, model: "PmfModel", probes: int = 100, span: int = 10**6, seed: int = 0) -> None:
        """Probe pseudo-random indices at or beyond k0 and verify the ratio cap."""
        hi = self.k0 + span - 1
        if model.max_index() is not None:
            hi = min(hi, model.max_index() - 1)
        if hi < self.k0:
            return
        rng = np.random.default_rng(seed)
        ks = rng.integers(self.k0, hi + 1, size=probes, dtype=np.int64)
        ratios = model.log_pmf_array(ks + 1) - model.log_pmf_array(ks)
        bad = np.nonzero(ratios > math.log(self.q) + _SPOT_CHECK_SLACK)[0]
        if bad.size:
            k = int(ks[bad[0]])
            raise ModelError(
                f"ratio tail certificate violated at k={k}: "
                f"log ratio {float(ratios[bad[0]]):.6g} exceeds log q = {math.log(self.q):.6g}"
            )

    def to_dict(self) -> dict:
        return {"type": "ratio", "k0": self.k0, "q": self.q}


def tail_from_dict(payload: dict) -> PowerLawTail | GeometricRatioTail:
    """Inverse of ``to_dict`` on either tail certificate shape."""
    kind = payload.get("type")
    if kind == "powerlaw":
        return PowerLawTail(k0=int(payload["k0"]), c0=float(payload["c0"]), alpha=float(payload["alpha"]))
    if kind == "ratio":
        return GeometricRatioTail(k0=int(payload["k0"]), q=float(payload["q"]))
    raise ModelError(f"unknown tail certificate type {kind!r}")


class PmfModel(abc.ABC):
    """A probability mass function on {1, 2, 3, ...}.

    Subclasses define the log-pmf and a tail certificate; this base class
    supplies scalar lookups, equality on parameters, and inverse-CDF
    sampling backed by a lazily extended cache of cumulative sums. The
    cache is protected by a lock so concurrent samplers observe a
    consistent view; it never affects sampled values, only speed.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._cdf: np.ndarray | None = None
        self._cdf_exhausted = False

    # -- identity ----------------------------------------------------------

    @abc.abstractmethod
    def _params(self) -> tuple:
        """Hashable parameter tuple used for equality and repr."""

    @abc.abstractmethod
    def describe(self) -> str:
        """Canonical ``family:params`` text form, as accepted by the CLI."""

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self._params() == other._params()

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._params()))

    def __repr__(self) -> str:
        args = ", ".join(repr(p) for p in self._params())
        return f"{type(self).__name__}({args})"

    # -- pmf ----------------------------------------------------------------

    @abc.abstractmethod
    def log_pmf_array(self, ks: np.ndarray) -> np.ndarray:
        """Vectorised natural-log pmf at integer outcomes ``ks`` (each >= 1)."""

    def log_pmf(self, k: int) -> float:
        """log p_k for a single outcome k >= 1."""
        return float(self.log_pmf_array(np.asarray([k], dtype=np.int64))[0])

    def _check_indices(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        if ks.size and int(ks.min()) < 1:
            raise ModelError(f"outcomes are 1-based, got index {int(ks.min())}")
        return ks

    @abc.abstractmethod
    def tail_certificate(self) -> PowerLawTail | GeometricRatioTail:
        """Tail decay certificate for this model."""

    def max_index(self) -> int | None:
        """Largest outcome with a listed mass, or None when unbounded."""
        return None

    # -- sampling -----------------------------------------------------------

    def sample(self, seed: int, count: int) -> np.ndarray:
        """Draw ``count`` outcomes reproducibly from ``seed``.

        Uses inverse-transform sampling against cached cumulative sums, so
        the sampled law matches the stored pmf exactly up to float64
        rounding of the partial sums.
        """
        if count < 0:
            raise ValueError(f"count must be nonnegative, got {count}")
        rng = np.random.default_rng(seed)
        return self.draw(rng, count)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Like ``sample`` but consuming an existing generator stream."""
        u = rng.random(count)
        return self._invert(u)

    def _invert(self, u: np.ndarray) -> np.ndarray:
        if u.size == 0:
            return np.zeros(0, dtype=np.int64)
        cdf = self._ensure_cdf_covers(float(u.max()))
        idx = np.searchsorted(cdf, u, side="right")
        # A draw can only land past the cached mass when the remaining tail
        # is below float resolution; fold it onto the last cached outcome.
        np.minimum(idx, cdf.size - 1, out=idx)
        return (idx + 1).astype(np.int64)

    def _sampling_guard(self) -> None:
        """Hook for subclasses that cannot serve tail draws."""

    def _ensure_cdf_covers(self, target: float) -> np.ndarray:
        self._sampling_guard()
        with self._lock:
            while self._cdf is None or (self._cdf[-1] <= target and not self._cdf_exhausted):
                self._extend_cdf()
            return self._cdf

    def _extend_cdf(self) -> None:
        have = 0 if self._cdf is None else self._cdf.size
        cap = self.max_index() if self.max_index() is not None else _CDF_INDEX_CAP
        if have >= cap:
            if self.max_index() is not None:
                self._cdf_exhausted = True
                return
            raise ResourceCapError(
                f"inverse-CDF cache would exceed {cap} entries; the requested draw "
                "lies too deep in the tail"
            )
        want = min(cap, max(1024, 2 * have))
        ks = np.arange(have + 1, want + 1, dtype=np.int64)
        masses = np.exp(self.log_pmf_array(ks))
        base = 0.0 if self._cdf is None else float(self._cdf[-1])
        grown = base + np.cumsum(masses)
        if grown[-1] <= base:
            # Tail mass fell below float resolution; further growth is futile.
            self._cdf_exhausted = True
            return
        self._cdf = grown if self._cdf is None else np.concatenate([self._cdf, grown])

    # -- pickling (drop the lock and any cache) ------------------------------

    def __getstate__(self) -> dict:
        state = dict(self.__dict__)
        state.pop("_lock", None)
        state.pop("_cdf", None)
        state.pop("_cdf_exhausted", None)
        return state

    def __setstate__(self, state: dict) -> None:
        self.__dict__.update(state)
        self._lock = threading.Lock()
        self._cdf = None
        self._cdf_exhausted = False


class Poisson(PmfModel):
    """Poisson counts, shifted so outcome k carries the mass of count k - 1."""

    def __init__(self, rate: float):
        if not (isinstance(rate, (int, float)) and math.isfinite(rate) and rate > 0):
            raise ModelError(f"poisson rate must be positive and finite, got {rate!r}")
        super().__init__()
        self.rate = float(rate)

    def _params(self) -> tuple:
        return (self.rate,)

    def describe(self) -> str:
        return f"poisson:{self.rate!r}"

    def log_pmf_array(self, ks: np.ndarray) -> np.ndarray:
        counts = self._check_indices(ks).astype(np.float64) - 1.0
        return -self.rate + counts * math.log(self.rate) - gammaln(counts + 1.0)

    def tail_certificate(self) -> GeometricRatioTail:
        # Successive masses shrink by rate/k, which is at most one half for
        # every outcome index k >= ceil(2 * rate).
        return GeometricRatioTail(k0=math.ceil(2.0 * self.rate), q=0.5)


class Geometric(PmfModel):
    """p_k = (1 - prob)**(k - 1) * prob on k = 1, 2, ..."""

    def __init__(self, prob: float):
        if not (isinstance(prob, (int, float)) and 0.0 < prob < 1.0):
            raise ModelError(f"geometric success probability must lie in (0, 1), got {prob!r}")
        super().__init__()
        self.prob = float(prob)

    def _params(self) -> tuple:
        return (self.prob,)

    def describe(self) -> str:
        return f"geometric:{self.prob!r}"

    def log_pmf_array(self, ks: np.ndarray) -> np.ndarray:
        ks = self._check_indices(ks).astype(np.float64)
        return (ks - 1.0) * math.log1p(-self.prob) + math.log(self.prob)

    def tail_certificate(self) -> GeometricRatioTail:
        return GeometricRatioTail(k0=1, q=1.0 - self.prob)


class NegativeBinomial(PmfModel):
    """Negative binomial counts, shifted so outcome k carries count k - 1.

    Parametrised so that ``prob`` is the geometric decay rate of the
    masses: count c has mass C(c + size - 1, c) * (1 - prob)**size *
    prob**c, and the successive-mass ratio tends to ``prob`` from
    whichever side ``size`` dictates. ``size`` may be any positive real.
    """

    def __init__(self, size: float, prob: float):
        if not (isinstance(size, (int, float)) and math.isfinite(size) and size > 0):
            raise ModelError(f"negative binomial size must be positive and finite, got {size!r}")
        if not (isinstance(prob, (int, float)) and 0.0 < prob < 1.0):
            raise ModelError(f"negative binomial prob must lie in (0, 1), got {prob!r}")
        super().__init__()
        self.size = float(size)
        self.prob = float(prob)

    def _params(self) -> tuple:
        return (self.size, self.prob)

    def describe(self) -> str:
        return f"negbinomial:{self.size!r},{self.prob!r}"

    def log_pmf_array(self, ks: np.ndarray) -> np.ndarray:
        counts = self._check_indices(ks).astype(np.float64) - 1.0
        return (
            gammaln(counts + self.size)
            - gammaln(self.size)
            - gammaln(counts + 1.0)
            + self.size * math.log1p(-self.prob)
            + counts * math.log(self.prob)
        )

    def _mass_ratio(self, k: int) -> float:
        # p_{k+1} / p_k with count c = k - 1 equals (c + size) / (c + 1) * prob.
        return (k - 1.0 + self.size) / k * self.prob

    def tail_certificate(self) -> GeometricRatioTail:
        q = (1.0 + self.prob) / 2.0
        # The ratio is monotone in k with limit prob < q, so the first index
        # satisfying the cap starts a run that never ends. Closed form first,
        # then nudge to the exact boundary.
        if self.size <= 1.0:
            return GeometricRatioTail(k0=1, q=q)
        k0 = max(1, math.ceil(2.0 * self.prob * (self.size - 1.0) / (1.0 - self.prob)))
        while k0 > 1 and self._mass_ratio(k0 - 1) <= q:
            k0 -= 1
        while self._mass_ratio(k0) > q:
            k0 += 1
        return GeometricRatioTail(k0=k0, q=q)


class Zeta(PmfModel):
    """p_k proportional to k**(-exponent), normalised by the zeta function."""

    def __init__(self, exponent: float):
        if not (isinstance(exponent, (int, float)) and math.isfinite(exponent) and exponent > 1):
            raise ModelError(f"zeta exponent must exceed 1, got {exponent!r}")
        super().__init__()
        self.exponent = float(exponent)
        self._zeta_value = float(_riemann_zeta(self.exponent))

    def _params(self) -> tuple:
        return (self.exponent,)

    def describe(self) -> str:
        return f"zeta:{self.exponent!r}"

    def log_pmf_array(self, ks: np.ndarray) -> np.ndarray:
        ks = self._check_indices(ks).astype(np.float64)
        return -self.exponent * np.log(ks) - math.log(self._zeta_value)

    def tail_certificate(self) -> PowerLawTail:
        return PowerLawTail(k0=1, c0=1.0 / self._zeta_value, alpha=self.exponent)


class Tabulated(PmfModel):
    """An explicit finite mass table, optionally extended by a tail certificate.

    When the listed masses fall short of total mass 1 by more than the
    normalisation tolerance, a tail certificate is mandatory and is checked
    for consistency: the certified cap on the unlisted mass must cover what
    is missing. Certificates bound the unlisted masses but do not define
    them, so exact mass lookups beyond the table and tail sampling are
    refused.
    """

    def __init__(
        self,
        masses,
        tail: PowerLawTail | GeometricRatioTail | None = None,
        label: str | None = None,
    ):
        arr = np.asarray(masses, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ModelError("tabulated masses must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise ModelError("tabulated masses must all lie in (0, 1]")
        total = compensated_sum(arr)
        if total > 1.0 + NORMALIZATION_TOL:
            raise ModelError(f"tabulated masses sum to {total:.17g}, exceeding 1")
        super().__init__()
        self.masses = arr
        self.masses.setflags(write=False)
        self.total = total
        self.missing = max(0.0, 1.0 - total)
        self.tail = tail
        self.label = label
        self._log_masses = np.log(arr)
        if self.missing > NORMALIZATION_TOL:
            if tail is None:
                raise MissingCertificateError(
                    f"listed masses sum to {total:.17g}; a tail certificate is required "
                    "to account for the remaining mass"
                )
            self._check_tail_consistency()

    def _check_tail_consistency(self) -> None:
        n = self.masses.size
        if isinstance(self.tail, PowerLawTail):
            start = max(self.tail.k0, n)
            cap = self.tail.c0 * start ** (1.0 - self.tail.alpha) / (self.tail.alpha - 1.0)
        else:
            if self.tail.k0 > n:
                raise ModelError(
                    f"ratio tail certificate starts at k0={self.tail.k0}, beyond the "
                    f"{n} listed masses; it cannot bound the unlisted mass"
                )
            cap = float(self.masses[-1]) * self.tail.q / (1.0 - self.tail.q)
        if cap < self.missing - 1e-15:
            raise ModelError(
                f"tail certificate caps the unlisted mass at {cap:.6g} but "
                f"{self.missing:.6g} is missing; certificate rejected as inconsistent"
            )

    def _params(self) -> tuple:
        return (self.masses.tobytes(), self.tail)

    def describe(self) -> str:
        if self.label:
            return f"tabulated:{self.label}"
        return f"tabulated:<{self.masses.size} masses>"

    def __repr__(self) -> str:
        return f"Tabulated(<{self.masses.size} masses>, tail={self.tail!r})"

    def max_index(self) -> int:
        return int(self.masses.size)

    def log_pmf_array(self, ks: np.ndarray) -> np.ndarray:
        ks = self._check_indices(ks)
        if ks.size and int(ks.max()) > self.masses.size:
            raise ModelError(
                f"mass unknown: outcome {int(ks.max())} lies beyond the "
                f"{self.masses.size} listed masses and no exact tail is available"
            )
        return self._log_masses[ks - 1]

    def tail_certificate(self) -> PowerLawTail | GeometricRatioTail:
        if self.tail is None:
            raise MissingCertificateError(
                "no certificate available: the tabulated model was built without one"
            )
        return self.tail

    def _sampling_guard(self) -> None:
        if self.missing > NORMALIZATION_TOL:
            raise ModelError(
                f"cannot sample tail: {self.missing:.6g} of the mass is unlisted and "
                "a certificate only bounds it"
            )

    @classmethod
    def from_dict(cls, payload: dict, label: str | None = None) -> "Tabulated":
        if "probs" not in payload:
            raise ModelError('tabulated JSON must contain a "probs" array')
        tail = tail_from_dict(payload["tail"]) if payload.get("tail") is not None else None
        return cls(payload["probs"], tail=tail, label=label)

    @classmethod
    def load(cls, path: str | Path) -> "Tabulated":
        path = Path(path)
        with path.open() as fh:
            payload = json.load(fh)
        return cls.from_dict(payload, label=str(path))

    def to_dict(self) -> dict:
        payload: dict = {"probs": [float(m) for m in self.masses]}
        if self.tail is not None:
            payload["tail"] = self.tail.to_dict()
        return payload
