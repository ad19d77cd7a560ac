"""
Public-message allocation for a fixed secret allocation.

Finds the cheapest (Ps0, PR0, phi_u) that carries the public message at
rate R0 to every relay and to the destination (and, in the eve-decode
variant, to every eavesdropper) within the power left over by the secret
message. Relays always treat the secret signal as interference.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from . import cone
from .config import Config
from .logger import get_logger
from .scenario import ChannelScenario, SolveConfig

logger = get_logger(__name__)


class PublicVariant(str, Enum):
    DEST_ONLY = "dest_only"
    EVE_DECODE = "eve_decode"


@dataclass(frozen=True)
class PublicAllocation:
    feasible: bool
    Ps0: float
    PR0: float
    phi_u: np.ndarray
    variant: PublicVariant
    budget: float = 0.0
    reason: str = ""
    suboptimal_rank_defect: float = 0.0
    certificate: Optional[np.ndarray] = None

    @property
    def total(self) -> float:
        return self.Ps0 + self.PR0

    @property
    def phi(self) -> np.ndarray:
        return math.sqrt(max(self.PR0, 0.0)) * self.phi_u

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "variant": self.variant.value,
            "Ps0": self.Ps0,
            "PR0": self.PR0,
            "total": self.total,
            "budget": self.budget,
            "phi_u": [[float(v.real), float(v.imag)] for v in self.phi_u],
            "reason": self.reason,
            "suboptimal_rank_defect": self.suboptimal_rank_defect,
        }


def required_snr(public_rate: float) -> float:
    """g = 2^(2 R0) - 1, the SNR every public receiver needs."""
    return 2.0 ** (2.0 * public_rate) - 1.0


def alpha_direction(sc: ChannelScenario) -> np.ndarray:
    """alpha^* / |alpha|, or the first basis vector if alpha vanishes."""
    norm = math.sqrt(sc.alpha_norm2)
    if norm == 0.0:
        u = np.zeros(sc.n_relays, dtype=complex)
        u[0] = 1.0
        return u
    return sc.alpha.conj() / norm


def relay_floor(sc: ChannelScenario, public_rate: float, Ps1: float) -> Optional[float]:
    """Smallest Ps0 every relay can decode at, None if some relay is cut off."""
    gains = sc.relay_gains2
    if np.any(gains == 0.0):
        return None
    g = required_snr(public_rate)
    return g * float(np.max(sc.noise_power / gains + Ps1))


def vertex_minimum(halfplanes, tol: float = 1e-10) -> Optional[tuple[float, float]]:
    """
    Minimize x + y over x, y >= 0 and rows (a1, a2, b): a1 x + a2 y >= b.

    Enumerates every pairwise intersection of the boundary lines (axes
    included) and keeps the feasible one with the smallest total; ties go
    to the earliest pair. Returns None if no vertex is feasible.
    """
    rows = [tuple(map(float, h)) for h in halfplanes]
    lines = rows + [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)]

    def feasible(x, y):
        if x < -tol or y < -tol:
            return False
        for a1, a2, b in rows:
            if a1 * x + a2 * y < b - tol * (1.0 + abs(b)):
                return False
        return True

    best = None
    for k in range(len(lines)):
        for l in range(k + 1, len(lines)):
            a1, a2, b = lines[k]
            c1, c2, d = lines[l]
            det = a1 * c2 - a2 * c1
            if det == 0.0:
                continue
            x = (b * c2 - a2 * d) / det
            y = (a1 * d - b * c1) / det
            if not feasible(x, y):
                continue
            x, y = max(x, 0.0), max(y, 0.0)
            if best is None or x + y < best[0] + best[1] - 1e-15:
                best = (x, y)
    return best


def _zero_public(sc, variant, budget, phi_u=None) -> PublicAllocation:
    return PublicAllocation(
        feasible=True,
        Ps0=0.0,
        PR0=0.0,
        phi_u=alpha_direction(sc) if phi_u is None else phi_u,
        variant=variant,
        budget=budget,
    )


def _infeasible(sc, variant, budget, reason, Ps0=0.0, PR0=0.0, phi_u=None, **extra):
    logger.debug(f"Public message infeasible ({variant.value}): {reason}")
    return PublicAllocation(
        feasible=False,
        Ps0=Ps0,
        PR0=PR0,
        phi_u=alpha_direction(sc) if phi_u is None else phi_u,
        variant=variant,
        budget=budget,
        reason=reason,
        **extra,
    )


def _within_budget(total: float, budget: float) -> bool:
    return total <= budget + Config.power_tol


def solve_problem2_dest(
    sc: ChannelScenario, cfg: SolveConfig, Ps1: float, psi, budget: float
) -> PublicAllocation:
    """
    Minimum-power public allocation with the relays beamforming along alpha^*.

    With that direction the problem is a two-variable LP whose optimum is
    one of two vertices: relay floor plus relay top-up, or source only.
    """
    variant = PublicVariant.DEST_ONLY
    budget = max(float(budget), 0.0)
    if cfg.public_rate == 0.0:
        return _zero_public(sc, variant, budget)

    psi = np.asarray(psi, dtype=complex)
    L = relay_floor(sc, cfg.public_rate, Ps1)
    if L is None:
        return _infeasible(sc, variant, budget, "a relay has no channel from the source")

    g = required_snr(cfg.public_rate)
    n0 = sc.noise_power
    e = sc.direct_gain2 / (n0 + Ps1 * sc.direct_gain2)
    f = sc.alpha_norm2 / (n0 + sc.dest_quadratic(psi))

    candidates = []
    if f > 0.0:
        candidates.append((L, max(0.0, (g - e * L) / f)))
    elif e * L >= g:
        candidates.append((L, 0.0))
    if e > 0.0:
        candidates.append((max(L, g / e), 0.0))
    if not candidates:
        return _infeasible(sc, variant, budget, "the destination cannot be reached")

    Ps0, PR0 = min(candidates, key=lambda c: c[0] + c[1])
    if not _within_budget(Ps0 + PR0, budget):
        return _infeasible(
            sc,
            variant,
            budget,
            f"needs {Ps0 + PR0:.6g}, only {budget:.6g} left",
            Ps0=Ps0,
            PR0=PR0,
        )
    return PublicAllocation(
        feasible=True,
        Ps0=Ps0,
        PR0=PR0,
        phi_u=alpha_direction(sc),
        variant=variant,
        budget=budget,
    )


def _coverage_terms(sc: ChannelScenario, Ps1: float, psi: np.ndarray):
    """(direct gain, relay-beam matrix) per public receiver: destination first, then eavesdroppers."""
    n0 = sc.noise_power
    terms = [
        (
            sc.direct_gain2 / (n0 + Ps1 * sc.direct_gain2),
            sc.alpha_gram() / (n0 + sc.dest_quadratic(psi)),
        )
    ]
    for j in range(sc.n_eves):
        e_j = sc.eve_direct_power(j)
        terms.append(
            (
                e_j / (n0 + Ps1 * e_j),
                sc.eve_gram(j) / (n0 + sc.eve_quadratic(j, psi)),
            )
        )
    return terms


def min_trace_program(
    terms, L: float, g: float, budget: float, n: int
) -> cone.ConeProgram:
    """Relaxed minimum-power public beamforming, powers in units of the budget."""
    prog = cone.ConeProgram(
        psd_dim=n, n_scalars=1, C=np.eye(n), c=np.array([1.0])
    )
    prog.add_constraint(a=[1.0], sense=cone.Sense.GE, b=L / budget)
    for direct, beam in terms:
        prog.add_constraint(
            A=beam * budget, a=[direct * budget], sense=cone.Sense.GE, b=g
        )
    prog.add_constraint(A=np.eye(n), a=[1.0], sense=cone.Sense.LE, b=1.0)
    return prog


def solve_problem2_eve(
    sc: ChannelScenario, cfg: SolveConfig, Ps1: float, psi, budget: float
) -> PublicAllocation:
    """
    Public allocation that every eavesdropper must also decode.

    The relay direction comes from the largest eigenvector of a relaxed
    minimum-power beamforming matrix; powers are then re-optimized for that
    direction by vertex enumeration.

    Raises:
        ValueError: under statistical eavesdropper CSI.
        KernelError: if the relaxation could not be solved.
    """
    variant = PublicVariant.EVE_DECODE
    if sc.statistical:
        raise ValueError("eavesdropper decoding of the public message needs perfect CSI")
    budget = max(float(budget), 0.0)
    if sc.n_eves == 0:
        dest = solve_problem2_dest(sc, cfg, Ps1, psi, budget)
        return replace(dest, variant=variant)
    if cfg.public_rate == 0.0:
        return _zero_public(sc, variant, budget)

    psi = np.asarray(psi, dtype=complex)
    L = relay_floor(sc, cfg.public_rate, Ps1)
    if L is None:
        return _infeasible(sc, variant, budget, "a relay has no channel from the source")
    if budget <= 0.0:
        return _infeasible(sc, variant, budget, "no power left for the public message")

    g = required_snr(cfg.public_rate)
    terms = _coverage_terms(sc, Ps1, psi)

    # Stage A: relaxed beam design
    prog = min_trace_program(terms, L, g, budget, sc.n_relays)
    sol = cone.solve_certified(prog, cfg.sdp_tol, "public beam design", allow_infeasible=True)
    if sol.status is cone.ConeStatus.INFEASIBLE:
        return _infeasible(
            sc,
            variant,
            budget,
            "relaxed public beam design infeasible within budget",
            certificate=sol.certificate,
        )

    # Stage B: principal direction
    Phi = sol.psd_matrix * budget
    u, lam1, defect = cone.principal_direction(Phi)
    if lam1 <= 1e-12 * max(1.0, budget):
        u, defect = alpha_direction(sc), 0.0
    if defect > Config.rank_one_threshold:
        logger.debug(f"Public beam relaxation not rank one (defect {defect:.2e})")

    # Stage C: powers for the fixed direction
    halfplanes = [(1.0, 0.0, L)]
    for direct, beam in terms:
        gain = float(np.vdot(u, beam @ u).real)
        halfplanes.append((direct, gain, g))
    vertex = vertex_minimum(halfplanes)
    if vertex is None:
        return _infeasible(
            sc, variant, budget, "no power split reaches every receiver along the chosen direction",
            phi_u=u, suboptimal_rank_defect=defect,
        )
    Ps0, PR0 = vertex
    if not _within_budget(Ps0 + PR0, budget):
        return _infeasible(
            sc, variant, budget, f"needs {Ps0 + PR0:.6g}, only {budget:.6g} left",
            Ps0=Ps0, PR0=PR0, phi_u=u, suboptimal_rank_defect=defect,
        )
    return PublicAllocation(
        feasible=True,
        Ps0=Ps0,
        PR0=PR0,
        phi_u=u,
        variant=variant,
        budget=budget,
        suboptimal_rank_defect=defect,
    )


def solve_problem2(
    sc: ChannelScenario, cfg: SolveConfig, Ps1: float, psi, budget: float
) -> PublicAllocation:
    """Dispatch on ``cfg.eve_must_decode_public``."""
    if cfg.eve_must_decode_public:
        return solve_problem2_eve(sc, cfg, Ps1, psi, budget)
    return solve_problem2_dest(sc, cfg, Ps1, psi, budget)
