"""Central tolerance and truncation record.

Every numeric knob lives here so that the CLI, the library and the tests
agree on defaults.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace


@dataclass(frozen=True)
class Tolerances:
    gamma_rel: float = 1e-12
    hyp2f1_rel: float = 1e-10
    legendre_rel: float = 1e-10
    dirichlet_rel: float = 1e-10
    sym2_rel: float = 1e-8
    orbital_finite: float = 1e-9
    orbital_arch: float = 1e-6
    residue_zero: float = 1e-12
    trace_abs: float = 1e-4
    # switch to the rearranged form when |q^{z/2} - 1| drops below this
    removable_switch: float = 1e-4


@dataclass(frozen=True)
class TruncationPolicy:
    """Tail-bound parameters for the infinite geometric sums."""

    height: float = 0.0          # |t|/sqrt|n| cutoff; 0 means choose from eps
    eps: float = 1e-13           # target tail size for geometric sums
    nu_max: int = 12             # raw-s mode: largest S-exponent considered
    padic_depth: int = 8
    quad_budget: int = 100_000
    afe_safety: float = 3.0
    max_height: float = 5000.0

    def with_(self, **kw) -> "TruncationPolicy":
        return replace(self, **kw)


@dataclass(frozen=True)
class Config:
    tol: Tolerances = field(default_factory=Tolerances)
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)

    def snapshot(self) -> dict:
        return {"tol": asdict(self.tol), "policy": asdict(self.policy)}


DEFAULT = Config()
