"""
Information rates and decode constraints of the two-hop DF relay network.

All rates are in bits per channel use and include the 1/2 pre-log of the
two-hop scheme. Perfect-CSI quadratic forms are evaluated as |row . v|^2 on
the channel rows; nothing here forms an N x N matrix except the statistical
eavesdropper surrogate, which is diagonal anyway.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import Config
from .scenario import ChannelScenario, SolveConfig


def half_log2(snr):
    """1/2 log2(1 + snr), broadcasting over arrays."""
    return 0.5 * np.log2(1.0 + np.maximum(snr, 0.0))


def _check_relay(sc: ChannelScenario, i: int):
    if not 0 <= i < sc.n_relays:
        raise IndexError(f"relay index {i} out of range for {sc.n_relays} relays")


def _check_eve(sc: ChannelScenario, j: int):
    if not 0 <= j < sc.n_eves:
        raise IndexError(f"eavesdropper index {j} out of range for {sc.n_eves}")


def as_weights(sc: ChannelScenario, v, name: str = "weights") -> np.ndarray:
    """Coerce a beamforming vector, rejecting the wrong length."""
    if v is None:
        return np.zeros(sc.n_relays, dtype=complex)
    arr = np.asarray(v, dtype=complex).reshape(-1)
    if arr.shape[0] != sc.n_relays:
        raise ValueError(
            f"{name} must have {sc.n_relays} entries, got {arr.shape[0]}"
        )
    return arr


def relay_public_rate(sc: ChannelScenario, i: int, Ps0: float, Ps1: float) -> float:
    """Rate of X0 at relay i, with X1 treated as noise."""
    _check_relay(sc, i)
    g = sc.relay_gains2[i]
    return float(half_log2(Ps0 * g / (sc.noise_power + Ps1 * g)))


def dest_public_rate(
    sc: ChannelScenario, Ps0: float, Ps1: float, phi, psi
) -> float:
    """Rate of X0 at the destination over both hops, X1 treated as noise."""
    phi = as_weights(sc, phi, "phi")
    psi = as_weights(sc, psi, "psi")
    n0 = sc.noise_power
    direct = Ps0 * sc.direct_gain2 / (n0 + Ps1 * sc.direct_gain2)
    relayed = sc.dest_quadratic(phi) / (n0 + sc.dest_quadratic(psi))
    return float(half_log2(direct + relayed))


def relay_secret_rate(sc: ChannelScenario, i: int, Ps1: float) -> float:
    """Rate of X1 at relay i given X0."""
    _check_relay(sc, i)
    return float(half_log2(Ps1 * sc.relay_gains2[i] / sc.noise_power))


def dest_secret_rate(sc: ChannelScenario, Ps1: float, psi) -> float:
    psi = as_weights(sc, psi, "psi")
    signal = Ps1 * sc.direct_gain2 + sc.dest_quadratic(psi)
    return float(half_log2(signal / sc.noise_power))


def eve_secret_rate(sc: ChannelScenario, j: int, Ps1: float, psi) -> float:
    """
    Rate of X1 at eavesdropper j, assuming it already knows X0.

    Under statistical CSI this is the Jensen surrogate built from the
    channel variances, an upper bound on the ergodic eavesdropper rate.
    """
    _check_eve(sc, j)
    psi = as_weights(sc, psi, "psi")
    signal = Ps1 * sc.eve_direct_power(j) + sc.eve_quadratic(j, psi)
    return float(half_log2(signal / sc.noise_power))


def eve_public_rate(
    sc: ChannelScenario, j: int, Ps0: float, Ps1: float, phi, psi
) -> float:
    """Rate of X0 at eavesdropper j with X1 treated as noise."""
    _check_eve(sc, j)
    phi = as_weights(sc, phi, "phi")
    psi = as_weights(sc, psi, "psi")
    n0 = sc.noise_power
    e = sc.eve_direct_power(j)
    direct = Ps0 * e / (n0 + Ps1 * e)
    relayed = sc.eve_quadratic(j, phi) / (n0 + sc.eve_quadratic(j, psi))
    return float(half_log2(direct + relayed))


def secrecy_margin(sc: ChannelScenario, Ps1: float, psi) -> float:
    """Destination rate minus the strongest eavesdropper rate, unclamped."""
    dest = dest_secret_rate(sc, Ps1, psi)
    if sc.n_eves == 0:
        return dest
    worst = max(eve_secret_rate(sc, j, Ps1, psi) for j in range(sc.n_eves))
    return dest - worst


def secrecy_objective(sc: ChannelScenario, Ps1: float, psi) -> float:
    """Worst-case secrecy rate over the eavesdroppers, clamped at zero."""
    return max(0.0, secrecy_margin(sc, Ps1, psi))


@dataclass(frozen=True)
class RateReport:
    relay_public_rates: list[float]
    dest_public_rate: float
    relay_secret_rates: list[float]
    dest_secret_rate: float
    eve_secret_rates: list[float]
    eve_public_rates: list[float]
    secrecy_rate: float

    def to_dict(self) -> dict:
        return {
            "relay_public_rates": list(self.relay_public_rates),
            "dest_public_rate": self.dest_public_rate,
            "relay_secret_rates": list(self.relay_secret_rates),
            "dest_secret_rate": self.dest_secret_rate,
            "eve_secret_rates": list(self.eve_secret_rates),
            "eve_public_rates": list(self.eve_public_rates),
            "secrecy_rate": self.secrecy_rate,
        }


def rate_report(
    sc: ChannelScenario, Ps0: float, Ps1: float, phi, psi
) -> RateReport:
    """Evaluate every rate of the network at one operating point."""
    phi = as_weights(sc, phi, "phi")
    psi = as_weights(sc, psi, "psi")
    relays = range(sc.n_relays)
    eves = range(sc.n_eves)
    return RateReport(
        relay_public_rates=[relay_public_rate(sc, i, Ps0, Ps1) for i in relays],
        dest_public_rate=dest_public_rate(sc, Ps0, Ps1, phi, psi),
        relay_secret_rates=[relay_secret_rate(sc, i, Ps1) for i in relays],
        dest_secret_rate=dest_secret_rate(sc, Ps1, psi),
        eve_secret_rates=[eve_secret_rate(sc, j, Ps1, psi) for j in eves],
        eve_public_rates=[eve_public_rate(sc, j, Ps0, Ps1, phi, psi) for j in eves],
        secrecy_rate=secrecy_objective(sc, Ps1, psi),
    )


@dataclass(frozen=True)
class ConstraintRecord:
    """
    One constraint evaluated at an operating point.

    slack >= 0 means satisfied. Rate constraints are measured in bits per
    channel use, power constraints in linear power units.
    """

    name: str
    slack: float
    index: Optional[int] = None
    unit: str = "bits"

    @property
    def label(self) -> str:
        return self.name if self.index is None else f"{self.name}[{self.index}]"

    def to_dict(self) -> dict:
        return {"name": self.name, "index": self.index, "slack": self.slack, "unit": self.unit}


def constraint_slacks(
    sc: ChannelScenario,
    cfg: SolveConfig,
    Ps0: float,
    Ps1: float,
    phi,
    psi,
    eve_decode: Optional[bool] = None,
) -> list[ConstraintRecord]:
    """
    Slack of every constraint of the joint problem.

    Covers public decoding at the relays and at the destination, secret
    decoding at the relays (the relay bottleneck), the total power budget
    and nonnegative source powers. When eavesdroppers must decode the
    public message their public-rate constraints are added.
    """
    phi = as_weights(sc, phi, "phi")
    psi = as_weights(sc, psi, "psi")
    if eve_decode is None:
        eve_decode = cfg.eve_must_decode_public
    r0 = cfg.public_rate
    records = []

    for i in range(sc.n_relays):
        records.append(
            ConstraintRecord("relay_public", relay_public_rate(sc, i, Ps0, Ps1) - r0, i)
        )
    records.append(
        ConstraintRecord("dest_public", dest_public_rate(sc, Ps0, Ps1, phi, psi) - r0)
    )

    dest_secret = dest_secret_rate(sc, Ps1, psi)
    for i in range(sc.n_relays):
        records.append(
            ConstraintRecord(
                "relay_secret_decode", relay_secret_rate(sc, i, Ps1) - dest_secret, i
            )
        )

    total = Ps0 + Ps1 + float(np.vdot(phi, phi).real) + float(np.vdot(psi, psi).real)
    records.append(ConstraintRecord("total_power", cfg.total_power - total, unit="power"))
    records.append(ConstraintRecord("nonnegative_Ps0", Ps0, unit="power"))
    records.append(ConstraintRecord("nonnegative_Ps1", Ps1, unit="power"))

    if eve_decode:
        for j in range(sc.n_eves):
            records.append(
                ConstraintRecord(
                    "eve_public", eve_public_rate(sc, j, Ps0, Ps1, phi, psi) - r0, j
                )
            )
    return records


def check_constraints(
    sc: ChannelScenario,
    cfg: SolveConfig,
    sol,
    tol: float = Config.constraint_tol,
) -> list[ConstraintRecord]:
    """
    Violated constraints of a full solution (empty when every slack >= -tol).

    ``sol`` carries ``secret`` (Ps1, psi) and ``public`` (Ps0, PR0, phi_u);
    the public beamformer is sqrt(PR0) * phi_u.
    """
    secret, public = sol.secret, sol.public
    phi = np.sqrt(max(public.PR0, 0.0)) * as_weights(sc, public.phi_u, "phi_u")
    records = constraint_slacks(sc, cfg, public.Ps0, secret.Ps1, phi, secret.psi)
    return [record for record in records if record.slack < -tol]
