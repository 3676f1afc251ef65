"""Base-space data model: signature, translation direction, profiles of xi, problem specs.

The base is R^n with the diagonal metric g_ij = delta_ij * eps_i, conformally
rescaled to g/phi^2, and every function of interest depends on the single
invariant xi = sum_i alpha_i x_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InvalidDirectionError, SpecError

# |sum eps_i alpha_i^2| below this fraction of sum alpha_i^2 counts as a null direction.
NULL_CLASS_RTOL = 1e-12

FD_RTOL = 1e-6


@dataclass(frozen=True)
class Signature:
    eps: tuple[int, ...]

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        if any(e not in (1, -1) for e in eps) or any(
            float(e0) != float(e) for e0, e in zip(self.eps, eps)
        ):
            raise SpecError(f"signature entries must be +1 or -1, got {list(self.eps)}")
        if len(eps) < 3:
            raise SpecError(f"base dimension must be >= 3, got n={len(eps)}")
        object.__setattr__(self, "eps", eps)

    @property
    def n(self) -> int:
        return len(self.eps)

    def as_array(self) -> np.ndarray:
        return np.array(self.eps, dtype=float)


def causal_class(signature: Signature, alpha: Sequence[float]) -> tuple[int, np.ndarray]:
    """Normalize alpha so that sum eps_i alpha_i^2 is -1, 0 or +1.

    Returns ``(class, alpha)``. Null directions are returned unchanged.
    """
    a = np.asarray(alpha, dtype=float)
    if a.shape != (signature.n,):
        raise DimensionError(f"alpha has length {a.size}, expected n={signature.n}")
    if not np.all(np.isfinite(a)) or not np.any(a != 0.0):
        raise InvalidDirectionError("direction alpha must be a finite nonzero vector")
    eps = signature.as_array()
    q = float(np.sum(eps * a * a))
    if abs(q) <= NULL_CLASS_RTOL * float(np.sum(a * a)):
        return 0, a.copy()
    # an already-normalized alpha is returned as is so normalization is idempotent
    if abs(abs(q) - 1.0) > 1e-14:
        a = a / math.sqrt(abs(q))
    return (1 if q > 0 else -1), a


@dataclass(frozen=True)
class Direction:
    """Translation-invariant direction; ``alpha`` is stored normalized."""

    alpha: tuple[float, ...]
    causal_class: int

    @classmethod
    def from_alpha(cls, signature: Signature, alpha: Sequence[float]) -> "Direction":
        cls_, a = causal_class(signature, alpha)
        return cls(tuple(float(v) for v in a), cls_)

    @property
    def n(self) -> int:
        return len(self.alpha)

    def as_array(self) -> np.ndarray:
        return np.array(self.alpha, dtype=float)

    def quadratic_form(self, signature: Signature) -> float:
        a = self.as_array()
        return float(np.sum(signature.as_array() * a * a))


def xi_at(direction: Direction, point: Sequence[float]) -> float:
    p = np.asarray(point, dtype=float)
    if p.shape != (direction.n,):
        raise DimensionError(f"point has length {p.size}, expected n={direction.n}")
    return float(np.dot(direction.as_array(), p))


ScalarFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Profile:
    """A scalar function of xi with its first two derivatives.

    The callables accept numpy arrays. ``domain`` is an open interval (bounds may
    be infinite); evaluation outside it raises DomainError. ``window`` is the
    finite interval used for default sampling.
    """

    value: ScalarFn
    d1: ScalarFn
    d2: ScalarFn
    domain: tuple[float, float] = (-math.inf, math.inf)
    name: str = "profile"
    window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        lo, hi = (float(v) for v in self.domain)
        if not lo < hi:
            raise SpecError(f"empty domain {self.domain} for profile {self.name}")
        object.__setattr__(self, "domain", (lo, hi))

    def contains(self, xi) -> np.ndarray:
        x = np.asarray(xi, dtype=float)
        lo, hi = self.domain
        return (x > lo) & (x < hi)

    def _check(self, xi) -> np.ndarray:
        x = np.asarray(xi, dtype=float)
        if not np.all(self.contains(x)):
            bad = x[~self.contains(x)] if x.ndim else x
            raise DomainError(
                f"{self.name}: xi={np.atleast_1d(bad)[0]!r} outside open domain {self.domain}"
            )
        return x

    def __call__(self, xi):
        return self.value(self._check(xi))

    def eval(self, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self._check(xi)
        return (
            np.asarray(self.value(x), dtype=float),
            np.asarray(self.d1(x), dtype=float),
            np.asarray(self.d2(x), dtype=float),
        )

    # --- constructors / algebra -------------------------------------------------

    @classmethod
    def constant(cls, c: float, name: str = "const") -> "Profile":
        c = float(c)
        return cls(
            value=lambda x: np.full(np.shape(x), c),
            d1=lambda x: np.zeros(np.shape(x)),
            d2=lambda x: np.zeros(np.shape(x)),
            name=name,
        )

    def scaled(self, c: float) -> "Profile":
        c = float(c)
        return replace(
            self,
            value=lambda x: c * self.value(x),
            d1=lambda x: c * self.d1(x),
            d2=lambda x: c * self.d2(x),
            name=f"{c!r}*{self.name}",
        )

    def times(self, other: "Profile") -> "Profile":
        """Pointwise product, with the Leibniz rule for the derivatives."""

        def d1(x):
            return self.d1(x) * other.value(x) + self.value(x) * other.d1(x)

        def d2(x):
            return (
                self.d2(x) * other.value(x)
                + 2.0 * self.d1(x) * other.d1(x)
                + self.value(x) * other.d2(x)
            )

        lo = max(self.domain[0], other.domain[0])
        hi = min(self.domain[1], other.domain[1])
        return replace(
            self,
            value=lambda x: self.value(x) * other.value(x),
            d1=d1,
            d2=d2,
            domain=(lo, hi),
            name=f"{self.name}*{other.name}",
        )


@dataclass(frozen=True)
class ConsistencyResult:
    passed: bool
    worst_rel_error: float
    worst_xi: float
    worst_derivative: str


def profile_consistency_check(
    p: Profile, samples: Sequence[float], rtol: float = FD_RTOL
) -> ConsistencyResult:
    """Compare analytic d1, d2 with central differences (d2 is differenced from d1)."""
    xs = np.atleast_1d(np.asarray(samples, dtype=float))
    worst = (-1.0, float("nan"), "")
    for xi in xs:
        s = 1e-5 * max(1.0, abs(xi))
        if not (p.contains(xi - s) and p.contains(xi + s)):
            raise DomainError(f"{p.name}: sample {xi!r} not interior to domain {p.domain}")
        v, d1, d2 = (float(t) for t in p.eval(xi))
        fd1 = (float(p.value(np.float64(xi + s))) - float(p.value(np.float64(xi - s)))) / (2 * s)
        fd2 = (float(p.d1(np.float64(xi + s))) - float(p.d1(np.float64(xi - s)))) / (2 * s)
        for label, fd, an in (("d1", fd1, d1), ("d2", fd2, d2)):
            err = abs(fd - an) / max(1.0, abs(an))
            if not math.isfinite(err):
                err = math.inf
            if err > worst[0]:
                worst = (err, float(xi), label)
    return ConsistencyResult(worst[0] <= rtol, worst[0], worst[1], worst[2])


@dataclass(frozen=True)
class WarpedSpec:
    """One problem instance: base R^n with g/phi^2, fiber F^m with Ric_F = lambda_F g_F."""

    n: int
    m: int
    r: float
    rho: float
    lambda_F: float
    signature: Signature
    direction: Direction
    f: Profile
    phi: Profile
    h: Profile
    family: Optional[dict] = field(default=None, compare=False)
    window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise SpecError(f"n must be an integer >= 3, got {self.n}")
        if int(self.m) != self.m or self.m < 1:
            raise SpecError(f"m must be an integer >= 1, got {self.m}")
        if not (math.isfinite(self.r) and self.r > 0):
            raise SpecError(f"r must be a positive real, got {self.r}")
        if self.signature.n != self.n or self.direction.n != self.n:
            raise DimensionError("signature/direction length does not match n")
        q = self.direction.quadratic_form(self.signature)
        if abs(q - self.direction.causal_class) > 1e-12 * max(1.0, float(np.sum(self.direction.as_array() ** 2))):
            raise SpecError(f"direction is not normalized: quadratic form {q!r}")
        if self.direction.causal_class == 0 and (self.rho != 0 or self.lambda_F != 0):
            raise SpecError("a null direction forces rho = lambda_F = 0")
        if self.m == 1 and self.lambda_F != 0:
            raise SpecError("a one-dimensional fiber is Ricci-flat; lambda_F must be 0 when m = 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "lambda_F", float(self.lambda_F))

    @property
    def is_integral(self) -> bool:
        return float(self.r).is_integer()

    @property
    def eps(self) -> np.ndarray:
        return self.signature.as_array()

    @property
    def alpha(self) -> np.ndarray:
        return self.direction.as_array()

    @property
    def causal_class(self) -> int:
        return self.direction.causal_class

    @property
    def domain(self) -> tuple[float, float]:
        lo = max(p.domain[0] for p in (self.f, self.phi, self.h))
        hi = min(p.domain[1] for p in (self.f, self.phi, self.h))
        return lo, hi

    def sampling_window(self) -> tuple[float, float]:
        if self.window is not None:
            return self.window
        for p in (self.f, self.phi, self.h):
            if p.window is not None:
                return p.window
        lo, hi = self.domain
        if math.isfinite(lo) and math.isfinite(hi):
            return lo, hi
        if math.isfinite(lo):
            return lo, lo + 10.0
        if math.isfinite(hi):
            return hi - 10.0, hi
        return -5.0, 5.0

    def sample_xis(self, samples: int = 101) -> np.ndarray:
        """Evenly spaced xi over the central 80% of the sampling window."""
        if samples < 1:
            raise SpecError("samples must be positive")
        lo, hi = self.sampling_window()
        span = hi - lo
        return np.linspace(lo + 0.1 * span, hi - 0.1 * span, samples)

    def point_for_xi(self, xi: float) -> np.ndarray:
        """A base point with the given xi, off the alpha axis by a fixed transverse offset."""
        a = self.alpha
        offset = np.cos(1.0 + 2.0 * np.arange(self.n))
        offset = offset - a * np.dot(offset, a) / np.dot(a, a)
        return xi * a / np.dot(a, a) + offset

    def with_(self, **changes) -> "WarpedSpec":
        return replace(self, **changes)
