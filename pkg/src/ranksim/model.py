"""Parameters and elementary state operations for rank-routed parallel queues.

The system has K parallel single-server queues, each serving at rate n.
Jobs arrive at total rate n*K - upsilon*sqrt(n) and each job is sent to the
j-th shortest queue with probability proportional to 1 - a_tilde_j / sqrt(n),
ties in the ranking broken by label. The skew vector a_tilde is the only
free scheme parameter; upsilon is its sum.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SystemParams",
    "SchemeSpec",
    "ValidationResult",
    "validate_params",
    "routing_probabilities",
    "rank_map",
    "drift_vector",
    "params_to_json",
    "params_from_json",
]


@dataclass(frozen=True)
class SystemParams:
    """A concrete finite-n system: K queues, skew vector, scale parameter n."""

    K: int
    a_tilde: tuple[float, ...]
    n: int

    @property
    def upsilon(self) -> float:
        """Sum of the skew entries (correctly rounded)."""
        return math.fsum(self.a_tilde)

    @property
    def a_star(self) -> float:
        return max(self.a_tilde)

    @property
    def n_star(self) -> float:
        """Scale threshold: n must exceed max(a_tilde_i vee 0)^2 so every
        rank-dependent arrival rate n - a_tilde_j*sqrt(n) stays positive."""
        return max(max(a, 0.0) for a in self.a_tilde) ** 2 if self.a_tilde else 0.0


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate_params(p: SystemParams) -> ValidationResult:
    """Check the admissibility conditions, reporting every violated one."""
    violations = []
    if not isinstance(p.K, int) or p.K < 1:
        violations.append(f"K must be a positive integer, got {p.K!r}")
    if len(p.a_tilde) != p.K:
        violations.append(
            f"a_tilde has length {len(p.a_tilde)}, expected K={p.K}"
        )
    if not isinstance(p.n, int) or p.n < 1:
        violations.append(f"n must be a positive integer, got {p.n!r}")
    elif p.a_tilde and not p.n > p.n_star:
        violations.append(
            f"n={p.n} must exceed the threshold max(a_tilde vee 0)^2 = {p.n_star}"
        )
    return ValidationResult(ok=not violations, violations=violations)


def require_valid(p: SystemParams) -> None:
    res = validate_params(p)
    if not res.ok:
        raise ValueError("invalid parameters: " + "; ".join(res.violations))


def routing_probabilities(p: SystemParams) -> np.ndarray:
    """P(route to rank j) = (1 - a_tilde_j/sqrt(n)) / (K - upsilon/sqrt(n))."""
    require_valid(p)
    inv_sqrt = 1.0 / math.sqrt(p.n)
    num = 1.0 - np.asarray(p.a_tilde, dtype=float) * inv_sqrt
    return num / (p.K - p.upsilon * inv_sqrt)


def rank_map(q: np.ndarray) -> np.ndarray:
    """Labels in ascending order of queue length, ties to the lower label.

    Entry j is the (0-based) label holding rank j, so q[rank_map(q)] is
    sorted and tied blocks keep label order.
    """
    return np.argsort(np.asarray(q), kind="stable")


def drift_vector(a_tilde) -> np.ndarray:
    """Drift of the gap-process diffusion limit: (-a_1, -(a_2-a_1), ...)."""
    a = np.asarray(a_tilde, dtype=float)
    rho = np.empty_like(a)
    rho[0] = -a[0]
    rho[1:] = -(a[1:] - a[:-1])
    return rho


@dataclass(frozen=True)
class SchemeSpec:
    """A named family of skew vectors.

    kind "d_scheme": route-to-one-of-the-d-shortest with tilt b, i.e.
    a_tilde_i = a - b/d for i <= d and a_tilde_i = a otherwise. d=1 is
    join-the-shortest-queue with tilt, d=K is the fully symmetric scheme.
    kind "general": an explicit skew vector.
    """

    kind: str
    K: int
    a: float | None = None
    b: float | None = None
    d: int | None = None
    a_tilde: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "d_scheme":
            if self.a is None or self.b is None or self.d is None:
                raise ValueError("d_scheme needs a, b, d")
            if not (isinstance(self.d, int) and 1 <= self.d <= self.K):
                raise ValueError(f"d must be an integer in [1, K], got {self.d!r}")
            if not self.a >= 0.0:
                raise ValueError(f"d_scheme needs a >= 0, got {self.a}")
        elif self.kind == "general":
            if self.a_tilde is None or len(self.a_tilde) != self.K:
                raise ValueError("general scheme needs a_tilde of length K")
        else:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if not (isinstance(self.K, int) and self.K >= 1):
            raise ValueError(f"K must be a positive integer, got {self.K!r}")

    @classmethod
    def d_scheme(cls, a: float, b: float, d: int, K: int) -> "SchemeSpec":
        return cls(kind="d_scheme", K=K, a=float(a), b=float(b), d=d)

    @classmethod
    def general(cls, a_tilde, K: int | None = None) -> "SchemeSpec":
        a_tilde = tuple(float(v) for v in a_tilde)
        if K is None:
            K = len(a_tilde)
        return cls(kind="general", K=K, a_tilde=a_tilde)

    def expand(self) -> tuple[float, ...]:
        """The skew vector; for d_scheme the low entry a - b/d is computed
        once so expansion is bitwise reproducible."""
        if self.kind == "general":
            return self.a_tilde
        low = self.a - self.b / self.d
        return tuple(low if i < self.d else self.a for i in range(self.K))

    def to_params(self, n: int) -> SystemParams:
        return SystemParams(K=self.K, a_tilde=self.expand(), n=n)


def params_to_json(p: SystemParams) -> str:
    return json.dumps({"K": p.K, "a_tilde": list(p.a_tilde), "n": p.n})


def params_from_json(src) -> SystemParams:
    """Accept either raw form {"K","a_tilde","n"} or {"scheme":{...},"n"}."""
    doc = json.loads(src) if isinstance(src, (str, bytes)) else src
    if not isinstance(doc, dict):
        raise ValueError(f"parameter document must be an object, got {type(doc).__name__}")
    if "scheme" in doc:
        sch = doc["scheme"]
        missing = {"a", "b", "d", "K"} - set(sch)
        if missing:
            raise ValueError(f"scheme form missing keys {sorted(missing)}")
        spec = SchemeSpec.d_scheme(a=sch["a"], b=sch["b"], d=sch["d"], K=sch["K"])
        return spec.to_params(int(doc["n"]))
    missing = {"K", "a_tilde", "n"} - set(doc)
    if missing:
        raise ValueError(f"raw form missing keys {sorted(missing)}")
    return SystemParams(
        K=int(doc["K"]),
        a_tilde=tuple(float(v) for v in doc["a_tilde"]),
        n=int(doc["n"]),
    )
