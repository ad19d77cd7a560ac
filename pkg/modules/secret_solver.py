"""
Secret-message allocation at a fixed power budget P_m.

Maximizes the worst-case secrecy rate over (Ps1, psi) subject to the relay
bottleneck (every relay must decode X1 at least as well as the destination)
and Ps1 + |psi|^2 <= P_m. The max-min ratio is handled by bisection on the
target ratio t = 2^(2 Rs); each step is one semidefinite relaxation in
Psi = psi psi^H solved by the cone kernel. A rank-one beamformer is then
recovered and the reported rate is always re-evaluated from it.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import cone
from .config import Config
from .logger import get_logger
from .rates import secrecy_margin
from .scenario import ChannelScenario, SolveConfig

logger = get_logger(__name__)


@dataclass(frozen=True)
class SecretAllocation:
    Ps1: float
    psi: np.ndarray
    secrecy_rate: float
    rank1_defect: float = 0.0
    bisect_iters: int = 0
    relaxation_bound: float = 0.0
    clamped: bool = False
    rounded: bool = False

    @property
    def psi_norm2(self) -> float:
        return float(np.vdot(self.psi, self.psi).real)

    @property
    def power(self) -> float:
        return self.Ps1 + self.psi_norm2

    def to_dict(self) -> dict:
        return {
            "Ps1": self.Ps1,
            "psi": [[float(v.real), float(v.imag)] for v in self.psi],
            "psi_norm2": self.psi_norm2,
            "secrecy_rate": self.secrecy_rate,
            "rank1_defect": self.rank1_defect,
            "bisect_iters": self.bisect_iters,
            "relaxation_bound": self.relaxation_bound,
            "clamped": self.clamped,
            "rounded": self.rounded,
        }


def zero_allocation(n_relays: int) -> SecretAllocation:
    return SecretAllocation(Ps1=0.0, psi=np.zeros(n_relays, dtype=complex), secrecy_rate=0.0)


def t_upper_bound(sc: ChannelScenario, P_m: float) -> float:
    """Bracket for the achievable SNR ratio: 1 + P_m max(|alpha0|^2, |alpha|^2) / N0."""
    return 1.0 + P_m * max(sc.direct_gain2, sc.alpha_norm2) / sc.noise_power


@dataclass(frozen=True)
class _Normalized:
    """Problem data divided by N0 and with powers measured in units of P_m."""

    a0: float
    A: np.ndarray
    g: np.ndarray
    e: np.ndarray
    B: list

    @classmethod
    def build(cls, sc: ChannelScenario, P_m: float) -> "_Normalized":
        k = P_m / sc.noise_power
        return cls(
            a0=sc.direct_gain2 * k,
            A=sc.alpha_gram() * k,
            g=sc.relay_gains2 * k,
            e=np.array([sc.eve_direct_power(j) for j in range(sc.n_eves)]) * k,
            B=[sc.eve_gram(j) * k for j in range(sc.n_eves)],
        )

    def ratio(self, p: float, Psi: np.ndarray) -> float:
        """Destination SNR+1 over the worst eavesdropper SNR+1 for a relaxed point."""
        num = 1.0 + self.a0 * p + float(np.trace(self.A @ Psi).real)
        if not self.B:
            return num
        den = max(
            1.0 + e * p + float(np.trace(B @ Psi).real) for e, B in zip(self.e, self.B)
        )
        return num / den


def _relay_rows(prog: cone.ConeProgram, data: _Normalized, n_scalars: int):
    for g_i in data.g:
        a = np.zeros(n_scalars)
        a[0] = g_i - data.a0
        prog.add_constraint(A=-data.A, a=a, sense=cone.Sense.GE, b=0.0)
    a = np.zeros(n_scalars)
    a[0] = 1.0
    n = data.A.shape[0]
    prog.add_constraint(A=np.eye(n), a=a, sense=cone.Sense.LE, b=1.0)


def fixed_ratio_program(data: _Normalized, t: float) -> cone.ConeProgram:
    """
    Phase-1 program at target ratio t.

    Variables Psi and scalars (p, slack). Maximizes the slack by which the
    weakest eavesdropper constraint exceeds zero; t is achievable iff the
    optimal slack is at least t - 1.
    """
    n = data.A.shape[0]
    prog = cone.ConeProgram(psd_dim=n, n_scalars=2, c=np.array([0.0, 1.0]), maximize=True)
    for e_j, B_j in zip(data.e, data.B):
        prog.add_constraint(
            A=data.A - t * B_j,
            a=np.array([data.a0 - t * e_j, -1.0]),
            sense=cone.Sense.GE,
            b=0.0,
        )
    _relay_rows(prog, data, 2)
    return prog


def max_destination_program(data: _Normalized) -> cone.ConeProgram:
    """Without eavesdroppers: maximize the destination SNR directly."""
    n = data.A.shape[0]
    prog = cone.ConeProgram(
        psd_dim=n, n_scalars=1, C=data.A, c=np.array([data.a0]), maximize=True
    )
    _relay_rows(prog, data, 1)
    return prog


def _hermitian_basis(r: int) -> list:
    basis = []
    for k in range(r):
        E = np.zeros((r, r), dtype=complex)
        E[k, k] = 1.0
        basis.append(E)
    for k in range(r):
        for l in range(k + 1, r):
            S = np.zeros((r, r), dtype=complex)
            S[k, l] = S[l, k] = 1.0
            basis.append(S)
            H = np.zeros((r, r), dtype=complex)
            H[k, l], H[l, k] = 1j, -1j
            basis.append(H)
    return basis


def purify_rank(Psi: np.ndarray, functionals: list, rel_tol: float = 1e-9) -> np.ndarray:
    """
    Lower the rank of a PSD solution without changing tr(F Psi) for any F.

    With Psi = V V^H of rank r, any Hermitian r x r direction D with
    tr(V^H F V D) = 0 for all F keeps every functional fixed; stepping along
    D until an eigenvalue of I + eps D hits zero drops the rank. Repeats
    while r^2 exceeds the number of functionals.
    """
    Psi = 0.5 * (Psi + Psi.conj().T)
    for _ in range(Psi.shape[0]):
        w, U = linalg.eigh(Psi)
        keep = w > rel_tol * max(w[-1], 0.0)
        r = int(np.count_nonzero(keep))
        if r <= 1 or r * r <= len(functionals):
            break
        V = U[:, keep] * np.sqrt(w[keep])
        basis = _hermitian_basis(r)
        reduced = [V.conj().T @ F @ V for F in functionals]
        system = np.array(
            [[float(np.trace(R @ D).real) for D in basis] for R in reduced]
        )
        null = linalg.null_space(system)
        if null.shape[1] == 0:
            break
        D = sum(coef * E for coef, E in zip(null[:, 0], basis))
        lam = linalg.eigvalsh(D)
        step = lam[-1] if abs(lam[-1]) >= abs(lam[0]) else lam[0]
        if step == 0.0:
            break
        Psi = V @ (np.eye(r) - D / step) @ V.conj().T
        Psi = 0.5 * (Psi + Psi.conj().T)
    return Psi


def _repair(sc: ChannelScenario, P_m: float, p: float, psi: np.ndarray):
    """Scale a candidate into the power budget and the relay-decode region."""
    p = max(float(p), 0.0)
    total = p + float(np.vdot(psi, psi).real)
    if total > P_m:
        s = P_m / total if total > 0 else 0.0
        p *= s
        psi = psi * math.sqrt(s)

    headroom = sc.relay_gains2.min() - sc.direct_gain2
    dest_relay = sc.dest_quadratic(psi)
    if headroom < 0:
        p = 0.0
    if dest_relay > p * max(headroom, 0.0):
        if headroom > 0 and p > 0:
            psi = psi * math.sqrt(p * headroom / dest_relay)
        elif sc.alpha_norm2 > 0:
            psi = psi - sc.alpha.conj() * (sc.alpha @ psi) / sc.alpha_norm2
    return p, psi


def _finish(sc, p, psi, **extra) -> SecretAllocation:
    margin = secrecy_margin(sc, p, psi)
    clamped = margin < 0.0
    if clamped:
        logger.debug(f"Secrecy margin {margin:.3e} clamped at zero")
    return SecretAllocation(
        Ps1=p, psi=psi, secrecy_rate=max(margin, 0.0), clamped=clamped, **extra
    )


def recover_beamformer(
    sc: ChannelScenario,
    P_m: float,
    p: float,
    Psi: np.ndarray,
    cfg: SolveConfig,
    step_index: int = 0,
) -> tuple[float, np.ndarray, float, bool]:
    """
    Rank-one (Ps1, psi) from a relaxed (Ps1, Psi).

    Returns (Ps1, psi, rank1_defect, rounded). Uses the principal direction
    when the relaxed matrix is numerically rank one, otherwise Gaussian
    randomization seeded from (rng_seed, step_index).
    """
    functionals = [sc.alpha_gram(), np.eye(sc.n_relays)]
    functionals += [sc.eve_gram(j) for j in range(sc.n_eves)]
    Psi = purify_rank(Psi, functionals)

    u, _, defect = cone.principal_direction(Psi)
    trace = max(float(np.trace(Psi).real), 0.0)
    p0, psi0 = _repair(sc, P_m, p, math.sqrt(trace) * u)
    if defect <= Config.rank_one_threshold or cfg.rounding_samples == 0:
        return p0, psi0, defect, False

    logger.debug(f"Relaxed beamformer has rank defect {defect:.2e}, randomizing")
    rng = np.random.default_rng([cfg.rng_seed, step_index])
    w, U = linalg.eigh(0.5 * (Psi + Psi.conj().T))
    root = U * np.sqrt(np.maximum(w, 0.0))

    best_p, best_psi = p0, psi0
    best_rate = secrecy_margin(sc, p0, psi0)
    for _ in range(cfg.rounding_samples):
        draw = (rng.standard_normal(sc.n_relays) + 1j * rng.standard_normal(sc.n_relays))
        xi = root @ (draw / math.sqrt(2.0))
        norm2 = float(np.vdot(xi, xi).real)
        if norm2 <= 0:
            continue
        xi = xi * math.sqrt(trace / norm2)
        cand_p, cand_psi = _repair(sc, P_m, p, xi)
        rate = secrecy_margin(sc, cand_p, cand_psi)
        if rate > best_rate:
            best_p, best_psi, best_rate = cand_p, cand_psi, rate
    return best_p, best_psi, defect, True


def solve_problem1(
    sc: ChannelScenario,
    P_m: float,
    cfg: SolveConfig,
    step_index: int = 0,
) -> SecretAllocation:
    """
    Best secret-message allocation within power P_m.

    ``step_index`` identifies the power step of the outer search; it only
    seeds the randomization so results do not depend on execution order.

    Raises:
        ValueError: if P_m is negative.
        KernelError: if a relaxation could not be solved.
    """
    if P_m < 0 or not math.isfinite(P_m):
        raise ValueError(f"power budget must be finite and nonnegative, got {P_m}")
    if P_m == 0:
        return zero_allocation(sc.n_relays)
    if sc.relay_gains2.min() < sc.direct_gain2:
        logger.debug("Weakest relay hears the source worse than the destination: no secret rate")
        return zero_allocation(sc.n_relays)

    data = _Normalized.build(sc, P_m)
    tol = cfg.sdp_tol

    if sc.n_eves == 0:
        sol = cone.solve_certified(max_destination_program(data), tol, "destination rate")
        p_hat, Psi_hat = float(sol.scalars[0]), sol.psd_matrix
        bound = 0.5 * math.log2(1.0 + max(sol.objective_value, 0.0))
        iters = 0
    else:
        lo, hi = 0.0, 0.5 * math.log2(t_upper_bound(sc, P_m))
        p_hat, Psi_hat = 0.0, np.zeros((sc.n_relays, sc.n_relays), dtype=complex)
        iters = 0
        while hi - lo > cfg.secrecy_bisect_tol and iters < Config.max_bisect_iters:
            iters += 1
            mid = 0.5 * (lo + hi)
            t = 2.0 ** (2.0 * mid)
            sol = cone.solve_certified(
                fixed_ratio_program(data, t), tol, f"secrecy ratio t={t:.6g}"
            )
            slack = sol.objective_value
            if slack >= (t - 1.0) - 10.0 * tol * (1.0 + t):
                p_hat, Psi_hat = float(sol.scalars[0]), sol.psd_matrix
                achieved = 0.5 * math.log2(max(data.ratio(p_hat, Psi_hat), 1.0))
                lo = min(max(mid, achieved), hi)
            else:
                hi = mid
            logger.debug(f"Bisection step {iters}: Rs in [{lo:.8f}, {hi:.8f}]")
        bound = hi

    p, psi, defect, rounded = recover_beamformer(
        sc, P_m, P_m * p_hat, P_m * Psi_hat, cfg, step_index
    )
    allocation = _finish(
        sc,
        p,
        psi,
        rank1_defect=defect,
        bisect_iters=iters,
        relaxation_bound=bound,
        rounded=rounded,
    )
    if allocation.secrecy_rate > bound + cfg.secrecy_bisect_tol:
        logger.warning(
            f"Recovered rate {allocation.secrecy_rate:.6f} above relaxation bound {bound:.6f}"
        )
    logger.debug(
        f"P_m={P_m:.6g}: Rs={allocation.secrecy_rate:.6f} (bound {bound:.6f}, "
        f"defect {defect:.1e}, {iters} bisection steps)"
    )
    return allocation
