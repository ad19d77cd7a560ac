"""
Human-readable solve, sweep and oracle-check summaries.
"""

import math
from typing import Optional

from .scenario import linear_to_db


def _power(x: float) -> str:
    db = linear_to_db(x) if x > 0 else -math.inf
    db_text = "-inf dB" if math.isinf(db) else f"{db:.2f} dB"
    return f"{x:.6g} ({db_text})"


def _vector(v) -> str:
    return "[" + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in v) + "]"


def format_solution(solution, slacks, no_public_rate: Optional[float] = None, public_rate: float = 0.0) -> str:
    """Multi-line summary of a FullSolution and its constraint slacks."""
    secret, public, rates = solution.secret, solution.public, solution.rates
    lines = [
        "=" * 60,
        "RELAY SECRECY SOLUTION",
        "=" * 60,
        f"Status:          {solution.status.value}",
        f"Secrecy rate:    {solution.secrecy_rate:.6f} bits/use",
        f"m*:              {'-' if solution.m_star is None else solution.m_star}",
        f"P_T:             {_power(solution.total_power)}",
        f"P_m (secret):    {_power(solution.P_m)}",
        f"Consumed:        {_power(solution.consumed_power)}",
        "",
        "--- Powers ---",
        f"  Ps0:           {_power(public.Ps0)}",
        f"  PR0:           {_power(public.PR0)}",
        f"  Ps1:           {_power(secret.Ps1)}",
        f"  |psi|^2:       {_power(secret.psi_norm2)}",
        f"  phi_u:         {_vector(public.phi_u)}",
        f"  psi:           {_vector(secret.psi)}",
    ]
    if secret.rank1_defect > 0:
        lines.append(f"  rank-one defect {secret.rank1_defect:.3e} (rounded: {secret.rounded})")
    if public.reason:
        lines.append(f"  public: {public.reason}")

    lines += ["", "--- Rates (bits/use) ---"]
    for i, r in enumerate(rates.relay_public_rates):
        lines.append(f"  relay {i} public:  {r:.6f}")
    lines.append(f"  dest public:     {rates.dest_public_rate:.6f}")
    for i, r in enumerate(rates.relay_secret_rates):
        lines.append(f"  relay {i} secret:  {r:.6f}")
    lines.append(f"  dest secret:     {rates.dest_secret_rate:.6f}")
    for j, r in enumerate(rates.eve_secret_rates):
        lines.append(f"  eve {j} secret:    {r:.6f}")
    for j, r in enumerate(rates.eve_public_rates):
        lines.append(f"  eve {j} public:    {r:.6f}")

    lines += ["", "--- Constraint slacks ---"]
    for record in slacks:
        flag = "" if record.slack >= 0 else "  VIOLATED"
        lines.append(f"  {record.label:<24} {record.slack:+.3e} {record.unit}{flag}")

    if no_public_rate is not None:
        lines += [
            "",
            "--- Without public message ---",
            f"  R_s' (R0 = 0):   {no_public_rate:.6f} bits/use",
        ]
        if public_rate <= no_public_rate:
            lines.append(f"  R0 = {public_rate:g} <= R_s', the public message fits in the secret rate")
        else:
            lines.append(f"  R0 = {public_rate:g} > R_s'")
    lines.append("=" * 60)
    return "\n".join(lines)


def format_sweep(rows) -> str:
    """Aligned table of sweep rows."""
    lines = [f"{'value':>10} {'Rs':>10} {'m*':>4} {'feasible':>8}"]
    for row in rows:
        m = "-" if row.m_star is None else str(row.m_star)
        line = f"{row.value:>10.4g} {row.secrecy_rate:>10.6f} {m:>4} {str(row.feasible).lower():>8}"
        if row.error:
            line += f"  error: {row.error}"
        lines.append(line)
    return "\n".join(lines)


def format_oracle_check(trials) -> str:
    """Per-trial deviations and the pass count."""
    lines = [
        f"{'trial':>5} {'J':>2} {'csi':>11} {'Rs solver':>10} {'Rs grid':>10} "
        f"{'dev':>9} {'public dev':>10} {'ok':>4}"
    ]
    for t in trials:
        lines.append(
            f"{t.index:>5} {t.n_eves:>2} {t.eve_csi:>11} {t.secret_solver:>10.6f} "
            f"{t.secret_oracle:>10.6f} {t.secret_dev:>9.2e} {t.public_dev:>10.2e} "
            f"{'yes' if t.passed else 'NO':>4}"
        )
    passed = sum(t.passed for t in trials)
    lines.append(f"{passed}/{len(trials)} trials within tolerance")
    return "\n".join(lines)
