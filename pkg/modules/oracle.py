"""
Brute-force reference solvers for small networks (at most two relays).

These share no code path with the optimizing solvers beyond the rate
formulas: the secret allocation is found by exhaustive grid search, the
public allocation by a dense grid and by an off-the-shelf LP, and the
ergodic eavesdropper rate under statistical CSI by Monte-Carlo sampling.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .config import Config
from .logger import ProgressBar, get_logger
from .public_solver import (
    PublicAllocation,
    PublicVariant,
    alpha_direction,
    relay_floor,
    required_snr,
    solve_problem2_dest,
)
from .rates import dest_secret_rate, secrecy_margin, secrecy_objective
from .scenario import ChannelScenario, EveCsi, SolveConfig
from .secret_solver import SecretAllocation, solve_problem1, zero_allocation

logger = get_logger(__name__)


def _guard(sc: ChannelScenario):
    if sc.n_relays > Config.oracle_max_relays:
        raise ValueError(
            f"grid oracles support at most {Config.oracle_max_relays} relays, "
            f"got {sc.n_relays}"
        )


def beam_directions(sc: ChannelScenario, theta_points: int, phase_points: int) -> np.ndarray:
    """
    Unit vectors cos(theta) u1 + e^(i phase) sin(theta) u2, one per row.

    u1 is the alpha^* direction and u2 its orthogonal complement in C^2;
    up to a global phase this covers every unit vector.
    """
    u1 = alpha_direction(sc)
    if sc.n_relays == 1:
        return u1[None, :]
    u2 = np.array([-np.conj(u1[1]), np.conj(u1[0])])
    theta = np.linspace(0.0, 0.5 * math.pi, theta_points)
    phase = np.linspace(0.0, 2.0 * math.pi, phase_points, endpoint=False)
    T, P = np.meshgrid(theta, phase, indexing="ij")
    T, P = T.reshape(-1), P.reshape(-1)
    return np.cos(T)[:, None] * u1[None, :] + (np.exp(1j * P) * np.sin(T))[:, None] * u2[None, :]


def _eve_gains(sc: ChannelScenario, dirs: np.ndarray) -> np.ndarray:
    """(J, D) array of eavesdropper beam gains per unit direction."""
    if sc.n_eves == 0:
        return np.zeros((0, dirs.shape[0]))
    if sc.statistical:
        return sc.sigma2_beta @ (np.abs(dirs) ** 2).T
    return np.abs(sc.beta @ dirs.T) ** 2


def grid_problem1(
    sc: ChannelScenario,
    P_m: float,
    power_points: int = 200,
    theta_points: int = 61,
    phase_points: int = 360,
    split_points: int = 51,
) -> SecretAllocation:
    """
    Exhaustive search for the secret allocation.

    Ps1 runs over P_m/power_points steps; for every direction the beam power
    runs over fractions of the largest value the power budget and the relay
    bottleneck allow, so the constraint boundary is always on the grid.
    """
    _guard(sc)
    if P_m <= 0:
        return zero_allocation(sc.n_relays)

    n0 = sc.noise_power
    a0 = sc.direct_gain2
    headroom = float(sc.relay_gains2.min()) - a0
    e = np.array([sc.eve_direct_power(j) for j in range(sc.n_eves)])

    dirs = beam_directions(sc, theta_points, phase_points)
    qa = np.abs(dirs @ sc.alpha) ** 2
    qb = _eve_gains(sc, dirs)
    fractions = np.linspace(0.0, 1.0, split_points)[:, None]

    best_rate, best = -math.inf, (0.0, 0, 0.0)
    for p in np.linspace(0.0, P_m, power_points + 1):
        if headroom < 0 and p > 0:
            break
        cap = np.full(qa.shape, P_m - p)
        with np.errstate(divide="ignore"):
            relay_cap = np.where(qa > 0, p * max(headroom, 0.0) / np.where(qa > 0, qa, 1.0), np.inf)
        r2 = fractions * np.minimum(cap, relay_cap)[None, :]

        dest = 1.0 + (p * a0 + r2 * qa[None, :]) / n0
        if sc.n_eves:
            eve = 1.0 + (p * e[:, None, None] + r2[None, :, :] * qb[:, None, :]) / n0
            rate = 0.5 * np.log2(dest / eve.max(axis=0))
        else:
            rate = 0.5 * np.log2(dest)

        idx = int(np.argmax(rate))
        if rate.flat[idx] > best_rate:
            s, d = np.unravel_index(idx, rate.shape)
            best_rate, best = float(rate.flat[idx]), (float(p), int(d), float(r2[s, d]))

    p, d, r2 = best
    psi = math.sqrt(r2) * dirs[d]
    return SecretAllocation(Ps1=p, psi=psi, secrecy_rate=secrecy_objective(sc, p, psi))


def _public_gains(sc: ChannelScenario, cfg: SolveConfig, Ps1: float, psi, phi_u, eve_decode: bool):
    """Rows (direct, beam) of every public coverage constraint for a fixed direction."""
    n0 = sc.noise_power
    psi = np.asarray(psi, dtype=complex)
    rows = [
        (
            sc.direct_gain2 / (n0 + Ps1 * sc.direct_gain2),
            sc.dest_quadratic(phi_u) / (n0 + sc.dest_quadratic(psi)),
        )
    ]
    if eve_decode:
        for j in range(sc.n_eves):
            e_j = sc.eve_direct_power(j)
            rows.append(
                (
                    e_j / (n0 + Ps1 * e_j),
                    sc.eve_quadratic(j, phi_u) / (n0 + sc.eve_quadratic(j, psi)),
                )
            )
    return rows


def _min_relay_power(rows, g: float, Ps0: np.ndarray) -> np.ndarray:
    """Smallest PR0 meeting every coverage row, per Ps0 value (inf if none)."""
    need = np.zeros_like(Ps0)
    for direct, beam in rows:
        deficit = g - direct * Ps0
        if beam > 0:
            need = np.maximum(need, deficit / beam)
        else:
            need = np.where(deficit > 0, np.inf, need)
    return np.maximum(need, 0.0)


def grid_problem2(
    sc: ChannelScenario,
    cfg: SolveConfig,
    Ps1: float,
    psi,
    budget: float,
    variant=PublicVariant.DEST_ONLY,
    phi_u=None,
    resolution: int = 2000,
) -> PublicAllocation:
    """
    Dense (Ps0, PR0) grid at step budget/resolution, followed by one
    refinement pass around the best cell.

    The relay direction is alpha^* for the destination-only variant; for
    the eve-decode variant the direction under test is passed as phi_u.
    """
    _guard(sc)
    variant = PublicVariant(variant)
    phi_u = alpha_direction(sc) if phi_u is None else np.asarray(phi_u, dtype=complex)
    budget = max(float(budget), 0.0)

    def result(feasible, Ps0=0.0, PR0=0.0, reason=""):
        return PublicAllocation(feasible, Ps0, PR0, phi_u, variant, budget, reason)

    if cfg.public_rate == 0.0:
        return result(True)
    L = relay_floor(sc, cfg.public_rate, Ps1)
    if L is None or budget <= 0:
        return result(False, reason="no grid point is feasible")

    g = required_snr(cfg.public_rate)
    rows = _public_gains(sc, cfg, Ps1, psi, phi_u, variant is PublicVariant.EVE_DECODE)

    def search(lo, hi, step):
        Ps0 = np.arange(lo, hi + 0.5 * step, step)
        Ps0 = Ps0[(Ps0 >= L - 1e-12) & (Ps0 <= budget + 1e-12)]
        if Ps0.size == 0:
            return None
        PR0 = np.ceil(_min_relay_power(rows, g, Ps0) / step - 1e-9) * step
        total = Ps0 + PR0
        total[~np.isfinite(total) | (total > budget + 1e-12)] = np.inf
        idx = int(np.argmin(total))
        if not np.isfinite(total[idx]):
            return None
        return float(Ps0[idx]), float(PR0[idx])

    step = budget / resolution
    coarse = search(0.0, budget, step)
    if coarse is None:
        return result(False, reason="no grid point is feasible")
    fine_step = step / resolution
    fine = search(max(coarse[0] - step, 0.0), min(coarse[0] + step, budget), fine_step)
    Ps0, PR0 = fine if fine is not None and sum(fine) <= sum(coarse) else coarse
    return result(True, Ps0, PR0)


def lp_problem2(
    sc: ChannelScenario,
    cfg: SolveConfig,
    Ps1: float,
    psi,
    budget: float,
    phi_u=None,
    eve_decode: bool = False,
) -> PublicAllocation:
    """
    Minimum-total public powers for a fixed direction via scipy's HiGHS LP.

    The budget is not a constraint of the LP; the returned point is the
    unconstrained minimum and ``feasible`` says whether it fits.
    """
    variant = PublicVariant.EVE_DECODE if eve_decode else PublicVariant.DEST_ONLY
    phi_u = alpha_direction(sc) if phi_u is None else np.asarray(phi_u, dtype=complex)
    budget = max(float(budget), 0.0)
    if cfg.public_rate == 0.0:
        return PublicAllocation(True, 0.0, 0.0, phi_u, variant, budget)

    L = relay_floor(sc, cfg.public_rate, Ps1)
    if L is None:
        return PublicAllocation(False, math.inf, 0.0, phi_u, variant, budget, "relay cut off")

    g = required_snr(cfg.public_rate)
    rows = _public_gains(sc, cfg, Ps1, psi, phi_u, eve_decode)
    A_ub = [[-direct, -beam] for direct, beam in rows]
    b_ub = [-g] * len(rows)
    res = linprog(
        c=[1.0, 1.0],
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(L, None), (0.0, None)],
        method="highs",
    )
    if res.status != 0:
        return PublicAllocation(False, math.inf, 0.0, phi_u, variant, budget, res.message)
    Ps0, PR0 = float(res.x[0]), float(res.x[1])
    feasible = Ps0 + PR0 <= budget + Config.power_tol
    return PublicAllocation(feasible, Ps0, PR0, phi_u, variant, budget)


def mc_ergodic_objective(
    sc: ChannelScenario,
    Ps1: float,
    psi,
    samples: int = Config.mc_samples,
    seed: int = Config.rng_seed,
) -> tuple[float, float]:
    """
    Monte-Carlo estimate of the ergodic secrecy objective under statistical CSI.

    Eavesdropper gains are drawn iid CN(0, sigma^2) with the configured
    variances. The objective is the destination rate minus the largest
    per-eavesdropper mean rate, clamped at zero; the standard error is that
    of the maximizing eavesdropper's mean.

    Raises:
        ValueError: if the scenario carries no eavesdropper variances.
    """
    if sc.n_eves and (sc.sigma2_beta0 is None or sc.sigma2_beta is None):
        raise ValueError("Monte-Carlo ergodic rate needs eavesdropper variances")
    if samples < 1000:
        logger.warning(f"Only {samples} Monte-Carlo samples, standard error will be large")

    psi = np.asarray(psi, dtype=complex)
    dest = dest_secret_rate(sc, Ps1, psi)
    if sc.n_eves == 0:
        return dest, 0.0

    rng = np.random.default_rng(seed)
    n0 = sc.noise_power
    means, errors = [], []
    for j in range(sc.n_eves):
        beta0 = np.sqrt(sc.sigma2_beta0[j] / 2.0) * (
            rng.standard_normal(samples) + 1j * rng.standard_normal(samples)
        )
        scale = np.sqrt(sc.sigma2_beta[j] / 2.0)
        beta = scale * (
            rng.standard_normal((samples, sc.n_relays))
            + 1j * rng.standard_normal((samples, sc.n_relays))
        )
        snr = (Ps1 * np.abs(beta0) ** 2 + np.abs(beta @ psi) ** 2) / n0
        rate = 0.5 * np.log2(1.0 + snr)
        means.append(float(rate.mean()))
        errors.append(float(rate.std(ddof=1) / math.sqrt(samples)))

    worst = int(np.argmax(means))
    return max(dest - means[worst], 0.0), errors[worst]


RANDOM_DRAWS = 200


def has_secrecy_room(sc: ChannelScenario, Ps1: float = 1.0) -> bool:
    """
    True when a secret rate above zero is reachable.

    The weakest relay must hear the source better than the destination does,
    with enough slack to carry a beam along alpha^*, and that beam must give
    the destination an edge over every eavesdropper.
    """
    beam = 0.5 * alpha_direction(sc)
    headroom = Ps1 * (float(sc.relay_gains2.min()) - sc.direct_gain2) - sc.dest_quadratic(beam)
    return headroom > 0 and secrecy_margin(sc, Ps1, beam) > 0


def random_scenario(
    rng: np.random.Generator,
    n_eves: int,
    csi=EveCsi.PERFECT,
    n_relays: int = 2,
    noise_power: float = 1.0,
) -> ChannelScenario:
    """
    Random N-relay network with Rayleigh gains and a non-trivial secret rate.

    Source-to-relay links get twice the variance of the others. Draws are
    repeated until has_secrecy_room holds in the requested CSI mode. Both
    instantaneous gains and variances are filled in, so the result can be
    switched between CSI modes.

    Raises:
        RuntimeError: if no draw qualifies within RANDOM_DRAWS attempts.
    """

    def cn(shape, var=1.0):
        return np.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    for attempt in range(1, RANDOM_DRAWS + 1):
        sc = ChannelScenario(
            n_relays=n_relays,
            n_eves=n_eves,
            alpha0=complex(cn(()) * 0.7),
            gamma=cn(n_relays, 2.0),
            alpha=cn(n_relays),
            beta0=cn(n_eves, 0.5),
            beta=cn((n_eves, n_relays), 0.5),
            noise_power=noise_power,
            eve_csi=EveCsi(csi),
            sigma2_beta0=rng.uniform(0.01, 0.1, n_eves),
            sigma2_beta=rng.uniform(0.05, 0.5, (n_eves, n_relays)),
        )
        if has_secrecy_room(sc):
            logger.debug(f"Random scenario accepted after {attempt} draw(s)")
            return sc
    raise RuntimeError(f"no random scenario with secrecy room in {RANDOM_DRAWS} draws")


@dataclass(frozen=True)
class OracleTrial:
    index: int
    n_eves: int
    eve_csi: str
    secret_solver: float
    secret_oracle: float
    public_closed_form: float
    public_lp: float
    secret_tol: float
    public_tol: float

    @property
    def secret_dev(self) -> float:
        return abs(self.secret_solver - self.secret_oracle)

    @property
    def public_dev(self) -> float:
        if math.isinf(self.public_closed_form) and math.isinf(self.public_lp):
            return 0.0
        return abs(self.public_closed_form - self.public_lp)

    @property
    def passed(self) -> bool:
        return self.secret_dev < self.secret_tol and self.public_dev < self.public_tol


def _unconstrained_total(pub: PublicAllocation) -> float:
    if not pub.feasible and pub.total == 0.0 and pub.reason:
        return math.inf
    return pub.total


def run_oracle_check(
    sc: ChannelScenario,
    cfg: SolveConfig,
    trials: int,
    seed: int,
    secret_tol: float = Config.oracle_secret_tol,
    public_tol: float = Config.oracle_public_tol,
    grid: Optional[dict] = None,
    show_progress: bool = False,
) -> list[OracleTrial]:
    """
    Compare the solvers against the oracles on seeded trials.

    Trial 0 uses the given scenario when it is small enough; the rest are
    random two-relay networks with 1..3 eavesdroppers, alternating CSI modes.
    Each trial uses the full budget P_T for the secret problem and the
    solver's own (Ps1, psi) for the public comparison.
    """
    rng = np.random.default_rng(seed)
    grid = grid or {}
    results = []
    progress = ProgressBar(trials, "Oracle check", enabled=None if show_progress else False)
    modes = (EveCsi.PERFECT, EveCsi.STATISTICAL)

    for k in range(trials):
        if k == 0 and sc.n_relays <= Config.oracle_max_relays:
            trial_sc = sc
        else:
            trial_sc = random_scenario(rng, 1 + k % 3, modes[k % 2])

        P_m = cfg.total_power
        solved = solve_problem1(trial_sc, P_m, cfg, step_index=k)
        brute = grid_problem1(trial_sc, P_m, **grid)
        closed = solve_problem2_dest(trial_sc, cfg, solved.Ps1, solved.psi, cfg.total_power)
        lp = lp_problem2(trial_sc, cfg, solved.Ps1, solved.psi, cfg.total_power)

        trial = OracleTrial(
            index=k,
            n_eves=trial_sc.n_eves,
            eve_csi=trial_sc.eve_csi.value,
            secret_solver=solved.secrecy_rate,
            secret_oracle=brute.secrecy_rate,
            public_closed_form=_unconstrained_total(closed),
            public_lp=lp.total,
            secret_tol=secret_tol,
            public_tol=public_tol,
        )
        logger.debug(
            f"Trial {k}: Rs solver {trial.secret_solver:.6f} vs grid {trial.secret_oracle:.6f}, "
            f"public {trial.public_closed_form:.10g} vs LP {trial.public_lp:.10g}"
        )
        results.append(trial)
        progress.update(1, f"trial {k}", failed=not trial.passed)

    progress.finish()
    return results
