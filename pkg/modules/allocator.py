"""
Outer power-split search and parameter sweeps.

The total budget P_T is cut into M steps. Starting from the largest secret
share P_m, the secret allocation is solved and the public message gets the
remainder; the first m whose public problem is feasible wins.
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .config import Config
from .logger import ProgressBar, get_logger
from .public_solver import PublicAllocation, solve_problem2
from .rates import RateReport, check_constraints, rate_report
from .scenario import ChannelScenario, SolveConfig
from .secret_solver import SecretAllocation, solve_problem1

logger = get_logger(__name__)


class SolveStatus(str, Enum):
    SOLVED = "solved"
    PUBLIC_INFEASIBLE = "public_infeasible"


class MonotonicityError(RuntimeError):
    """Secrecy rate decreased with a larger secret budget (verify mode)."""


@dataclass(frozen=True)
class SearchStep:
    m: int
    P_m: float
    secrecy_rate: float
    public_feasible: bool
    public_total: float

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "P_m": self.P_m,
            "secrecy_rate": self.secrecy_rate,
            "public_feasible": self.public_feasible,
            "public_total": self.public_total,
        }


@dataclass(frozen=True)
class FullSolution:
    status: SolveStatus
    m_star: Optional[int]
    P_m: float
    secret: SecretAllocation
    public: PublicAllocation
    rates: RateReport
    total_power: float
    trace: tuple = ()

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED

    @property
    def secrecy_rate(self) -> float:
        return self.secret.secrecy_rate if self.solved else 0.0

    @property
    def consumed_power(self) -> float:
        return self.secret.power + self.public.total

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "m_star": self.m_star,
            "P_m": self.P_m,
            "total_power": self.total_power,
            "consumed_power": self.consumed_power,
            "secret": self.secret.to_dict(),
            "public": self.public.to_dict(),
            "rates": self.rates.to_dict(),
            "trace": [step.to_dict() for step in self.trace],
        }


def power_levels(cfg: SolveConfig) -> list[tuple[int, float]]:
    """(m, P_m) pairs in search order, largest secret share first."""
    delta = cfg.total_power / cfg.power_steps
    top = cfg.power_steps if cfg.include_m_equals_m else cfg.power_steps - 1
    return [(m, m * delta) for m in range(top, -1, -1)]


def _check_monotone(trace: list[SearchStep], tol: float):
    ordered = sorted(trace, key=lambda step: step.m)
    for lower, upper in zip(ordered, ordered[1:]):
        if upper.secrecy_rate < lower.secrecy_rate - tol:
            raise MonotonicityError(
                f"secrecy rate drops from {lower.secrecy_rate:.8f} at m={lower.m} "
                f"to {upper.secrecy_rate:.8f} at m={upper.m}"
            )


def allocate(sc: ChannelScenario, cfg: SolveConfig) -> FullSolution:
    """
    Largest secret share whose leftover power still carries the public message.

    Raises:
        MonotonicityError: in verify_monotone mode, if R_s^m decreases in m.
        KernelError: propagated from the solvers.
    """
    P_T = cfg.total_power
    trace = []
    found = None
    last = None

    for m, P_m in power_levels(cfg):
        secret = solve_problem1(sc, P_m, cfg, step_index=m)
        public = solve_problem2(sc, cfg, secret.Ps1, secret.psi, max(P_T - P_m, 0.0))
        trace.append(
            SearchStep(m, P_m, secret.secrecy_rate, public.feasible, public.total)
        )
        logger.debug(
            f"m={m}: Rs={secret.secrecy_rate:.6f}, public "
            f"{'feasible' if public.feasible else 'infeasible'} (needs {public.total:.6g})"
        )
        last = (m, P_m, secret, public)
        if public.feasible and found is None:
            found = last
            if not cfg.verify_monotone:
                break

    if cfg.verify_monotone:
        _check_monotone(trace, 2.0 * cfg.secrecy_bisect_tol)

    if found is None:
        _, P_m, secret, public = last
        logger.info(f"Public rate {cfg.public_rate} unreachable at P_T={P_T:.6g}")
        return FullSolution(
            status=SolveStatus.PUBLIC_INFEASIBLE,
            m_star=None,
            P_m=P_m,
            secret=secret,
            public=public,
            rates=rate_report(sc, public.Ps0, secret.Ps1, public.phi, secret.psi),
            total_power=P_T,
            trace=tuple(trace),
        )

    m, P_m, secret, public = found
    solution = FullSolution(
        status=SolveStatus.SOLVED,
        m_star=m,
        P_m=P_m,
        secret=secret,
        public=public,
        rates=rate_report(sc, public.Ps0, secret.Ps1, public.phi, secret.psi),
        total_power=P_T,
        trace=tuple(trace),
    )
    violations = check_constraints(sc, cfg, solution)
    for record in violations:
        logger.warning(f"Constraint {record.label} violated by {-record.slack:.3e} {record.unit}")
    logger.info(
        f"Solved: m*={m}, Rs={secret.secrecy_rate:.6f} bits/use, "
        f"power {solution.consumed_power:.6g}/{P_T:.6g}"
    )
    return solution


class SweepAxis(str, Enum):
    TOTAL_POWER_DB = "power_db"
    PUBLIC_RATE = "public_rate"


@dataclass(frozen=True)
class SweepRow:
    axis: SweepAxis
    value: float
    secrecy_rate: float
    m_star: Optional[int]
    feasible: bool
    Ps0: float = 0.0
    Ps1: float = 0.0
    PR0: float = 0.0
    psi_norm2: float = 0.0
    error: str = ""


def point_config(cfg: SolveConfig, axis: SweepAxis, value: float) -> SolveConfig:
    if axis is SweepAxis.TOTAL_POWER_DB:
        return cfg.with_total_power_db(value)
    return cfg.with_public_rate(value)


def sweep_point(sc: ChannelScenario, cfg: SolveConfig, axis: SweepAxis, value: float) -> SweepRow:
    """One allocate call, failures folded into the row."""
    try:
        sol = allocate(sc, point_config(cfg, axis, value))
    except Exception as e:
        logger.error(f"Sweep point {axis.value}={value} failed: {e}")
        return SweepRow(axis, value, 0.0, None, False, error=str(e))
    return SweepRow(
        axis=axis,
        value=value,
        secrecy_rate=sol.secrecy_rate,
        m_star=sol.m_star,
        feasible=sol.solved,
        Ps0=sol.public.Ps0 if sol.solved else 0.0,
        Ps1=sol.secret.Ps1 if sol.solved else 0.0,
        PR0=sol.public.PR0 if sol.solved else 0.0,
        psi_norm2=sol.secret.psi_norm2 if sol.solved else 0.0,
    )


def sweep(
    sc: ChannelScenario,
    cfg: SolveConfig,
    axis,
    grid,
    jobs: Optional[int] = None,
    show_progress: bool = False,
) -> list[SweepRow]:
    """
    allocate() at every grid value, rows in grid order.

    Points run in worker processes when jobs > 1; the result does not
    depend on the number of workers.

    Raises:
        ValueError: if the grid is empty or not sorted.
    """
    axis = SweepAxis(axis)
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be sorted in increasing order")

    jobs = Config.max_workers if jobs is None else jobs
    jobs = max(1, min(jobs, len(grid)))
    progress = ProgressBar(len(grid), f"Sweep {axis.value}", enabled=None if show_progress else False)
    rows: list[Optional[SweepRow]] = [None] * len(grid)

    if jobs == 1:
        for idx, value in enumerate(grid):
            rows[idx] = sweep_point(sc, cfg, axis, value)
            progress.update(1, f"{axis.value}={value:g}", failed=bool(rows[idx].error))
    else:
        logger.info(f"Sweeping {len(grid)} points with {jobs} workers")
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            future_to_index = {
                executor.submit(sweep_point, sc, cfg, axis, value): idx
                for idx, value in enumerate(grid)
            }

            for future in as_completed(future_to_index):
                idx = future_to_index[future]
                try:
                    rows[idx] = future.result()
                except Exception as e:
                    logger.error(f"Sweep worker failed at {axis.value}={grid[idx]}: {e}")
                    rows[idx] = SweepRow(axis, grid[idx], 0.0, None, False, error=str(e))
                progress.update(1, f"{axis.value}={grid[idx]:g}", failed=bool(rows[idx].error))

    progress.finish()
    return rows
