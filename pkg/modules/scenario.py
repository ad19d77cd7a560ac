"""
Network description and solve configuration.

A scenario document is JSON with two sections, ``scenario`` (channel gains,
noise power, eavesdropper CSI mode) and ``solve`` (power budget, public rate,
tolerances). Complex gains are ``[re, im]`` arrays. The total power is given
in dB relative to the noise power and converted to linear units at load.
"""

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .config import Config
from .logger import get_logger
from .validation import (
    validate_channel_scenario,
    validate_scenario_document,
    validate_solve_config,
)

logger = get_logger(__name__)


class ScenarioError(ValueError):
    """Raised when a scenario document cannot be parsed or is invalid."""


class EveCsi(str, Enum):
    PERFECT = "perfect"
    STATISTICAL = "statistical"


def db_to_linear(x_db: float) -> float:
    """Convert a power ratio in dB to linear units."""
    if not math.isfinite(x_db):
        raise ValueError(f"dB value must be finite, got {x_db}")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a linear power ratio to dB (-inf for zero)."""
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


def _frozen(values, dtype):
    if values is None:
        return None
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _as_matrix(values, rows, cols, dtype):
    """J x N view of a flat or nested array; wrong sizes are left for validation."""
    if values is None:
        return None
    arr = np.array(values, dtype=dtype)
    if arr.size == rows * cols:
        return arr.reshape(rows, cols)
    return arr


@dataclass(frozen=True, eq=False)
class ChannelScenario:
    """
    Complex channel gains of a two-hop DF relay network.

    gamma: source to relay i, alpha: relay i to destination,
    beta0: source to eavesdropper j, beta: relay i to eavesdropper j (J x N).
    With statistical CSI only the variances sigma2_beta0 / sigma2_beta are
    used; the instantaneous eavesdropper gains may be absent.
    """

    n_relays: int
    n_eves: int
    alpha0: complex
    gamma: np.ndarray
    alpha: np.ndarray
    beta0: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    noise_power: float = Config.noise_power
    eve_csi: EveCsi = EveCsi.PERFECT
    sigma2_beta0: Optional[np.ndarray] = None
    sigma2_beta: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        object.__setattr__(self, "noise_power", float(self.noise_power))
        object.__setattr__(self, "eve_csi", EveCsi(self.eve_csi))
        object.__setattr__(self, "gamma", _frozen(self.gamma, complex))
        object.__setattr__(self, "alpha", _frozen(self.alpha, complex))
        object.__setattr__(self, "beta0", _frozen(self.beta0, complex))
        beta = _as_matrix(self.beta, self.n_eves, self.n_relays, complex)
        object.__setattr__(self, "beta", _frozen(beta, complex))
        object.__setattr__(self, "sigma2_beta0", _frozen(self.sigma2_beta0, float))
        sigma2 = _as_matrix(self.sigma2_beta, self.n_eves, self.n_relays, float)
        object.__setattr__(self, "sigma2_beta", _frozen(sigma2, float))

        issues = validate_channel_scenario(self)
        if issues:
            raise ScenarioError("; ".join(issues))

    @property
    def statistical(self) -> bool:
        return self.eve_csi is EveCsi.STATISTICAL

    @property
    def direct_gain2(self) -> float:
        """|alpha0|^2"""
        return abs(self.alpha0) ** 2

    @property
    def relay_gains2(self) -> np.ndarray:
        """|gamma_i|^2 per relay"""
        return np.abs(self.gamma) ** 2

    @property
    def alpha_norm2(self) -> float:
        return float(np.sum(np.abs(self.alpha) ** 2))

    def alpha_gram(self) -> np.ndarray:
        """The rank-one matrix alpha^* alpha (N x N)."""
        return np.outer(self.alpha.conj(), self.alpha)

    def dest_quadratic(self, v: np.ndarray) -> float:
        """v^* alpha^* alpha v = |alpha v|^2"""
        return float(abs(self.alpha @ v) ** 2)

    def eve_direct_power(self, j: int) -> float:
        """|beta0j|^2, or its variance under statistical CSI."""
        if self.statistical:
            return float(self.sigma2_beta0[j])
        return float(abs(self.beta0[j]) ** 2)

    def eve_gram(self, j: int) -> np.ndarray:
        """beta_j^* beta_j, or the diagonal variance matrix under statistical CSI."""
        if self.statistical:
            return np.diag(self.sigma2_beta[j]).astype(complex)
        return np.outer(self.beta[j].conj(), self.beta[j])

    def eve_quadratic(self, j: int, v: np.ndarray) -> float:
        if self.statistical:
            return float(np.sum(self.sigma2_beta[j] * np.abs(v) ** 2))
        return float(abs(self.beta[j] @ v) ** 2)

    def with_eves(self, k: int) -> "ChannelScenario":
        """Keep only the first k eavesdroppers."""
        if not 0 <= k <= self.n_eves:
            raise ScenarioError(f"cannot keep {k} of {self.n_eves} eavesdroppers")

        def head(arr):
            return None if arr is None else arr[:k]

        return replace(
            self,
            n_eves=k,
            beta0=head(self.beta0),
            beta=None if self.beta is None else self.beta[:k, :],
            sigma2_beta0=head(self.sigma2_beta0),
            sigma2_beta=None if self.sigma2_beta is None else self.sigma2_beta[:k, :],
        )

    def with_csi(self, mode) -> "ChannelScenario":
        return replace(self, eve_csi=EveCsi(mode))

    def with_noise_power(self, noise_power: float) -> "ChannelScenario":
        return replace(self, noise_power=noise_power)


@dataclass(frozen=True)
class SolveConfig:
    """
    Optimization settings for one allocation.

    The power budget is kept in dB (as configured) together with the power
    reference N0 it is relative to; ``total_power`` is the linear value.
    """

    total_power_db: float = Config.total_power_db
    public_rate: float = Config.public_rate
    power_steps: int = Config.power_steps
    secrecy_bisect_tol: float = Config.secrecy_bisect_tol
    sdp_tol: float = Config.sdp_tol
    eve_must_decode_public: bool = False
    mc_samples: int = Config.mc_samples
    rng_seed: int = Config.rng_seed
    power_reference: float = Config.noise_power
    include_m_equals_m: bool = Config.include_m_equals_m
    verify_monotone: bool = Config.verify_monotone
    rounding_samples: int = Config.rounding_samples

    def __post_init__(self):
        issues = validate_solve_config(self)
        if issues:
            raise ScenarioError("; ".join(issues))

    @property
    def total_power(self) -> float:
        """P_T in linear units."""
        return self.power_reference * db_to_linear(self.total_power_db)

    def with_total_power_db(self, total_power_db: float) -> "SolveConfig":
        return replace(self, total_power_db=float(total_power_db))

    def with_public_rate(self, public_rate: float) -> "SolveConfig":
        return replace(self, public_rate=float(public_rate))


def _complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def _pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def parse_scenario_document(doc: dict) -> tuple[ChannelScenario, SolveConfig]:
    """Build validated objects from an already-parsed document."""
    is_valid, errors, warnings = validate_scenario_document(doc)
    for warning in warnings:
        logger.debug(f"Scenario warning: {warning}")
    if not is_valid:
        raise ScenarioError("; ".join(errors))

    s = doc["scenario"]
    n_eves = s.get("n_eves", 0)

    def complex_list(key):
        return [_complex(v) for v in s[key]] if key in s else None

    def complex_matrix(key):
        if key not in s:
            return None
        return np.array(
            [[_complex(v) for v in row] for row in s[key]], dtype=complex
        ).reshape(n_eves, s["n_relays"])

    sigma2_beta = None
    if "sigma2_beta" in s:
        sigma2_beta = np.array(s["sigma2_beta"], dtype=float).reshape(
            n_eves, s["n_relays"]
        )

    scenario = ChannelScenario(
        n_relays=s["n_relays"],
        n_eves=n_eves,
        alpha0=_complex(s["alpha0"]),
        gamma=complex_list("gamma"),
        alpha=complex_list("alpha"),
        beta0=complex_list("beta0"),
        beta=complex_matrix("beta"),
        noise_power=float(s.get("noise_power", Config.noise_power)),
        eve_csi=EveCsi(s.get("eve_csi", EveCsi.PERFECT.value)),
        sigma2_beta0=s.get("sigma2_beta0"),
        sigma2_beta=sigma2_beta,
    )

    solve = doc.get("solve", {})
    config = SolveConfig(
        total_power_db=float(solve.get("total_power_db", Config.total_power_db)),
        public_rate=float(solve.get("public_rate", Config.public_rate)),
        power_steps=int(solve.get("power_steps", Config.power_steps)),
        secrecy_bisect_tol=float(
            solve.get("secrecy_bisect_tol", Config.secrecy_bisect_tol)
        ),
        sdp_tol=float(solve.get("sdp_tol", Config.sdp_tol)),
        eve_must_decode_public=bool(solve.get("eve_must_decode_public", False)),
        mc_samples=int(solve.get("mc_samples", Config.mc_samples)),
        rng_seed=int(solve.get("rng_seed", Config.rng_seed)),
        power_reference=scenario.noise_power,
        include_m_equals_m=bool(
            solve.get("include_m_equals_m", Config.include_m_equals_m)
        ),
        verify_monotone=bool(solve.get("verify_monotone", Config.verify_monotone)),
        rounding_samples=int(solve.get("rounding_samples", Config.rounding_samples)),
    )
    return scenario, config


def load_scenario(text: str) -> tuple[ChannelScenario, SolveConfig]:
    """
    Parse and validate a scenario document.

    Raises:
        ScenarioError: on JSON syntax errors (with line/column) or on any
            violated invariant (all issues joined).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(
            f"parse error at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from err
    return parse_scenario_document(doc)


def load_scenario_file(path) -> tuple[ChannelScenario, SolveConfig]:
    """Read a scenario document from disk (OSError propagates)."""
    text = Path(path).read_text(encoding="utf-8")
    logger.debug(f"Loaded scenario document {path} ({len(text)} bytes)")
    return load_scenario(text)


def scenario_to_document(sc: ChannelScenario, cfg: SolveConfig) -> dict:
    """Inverse of parse_scenario_document."""
    s = {
        "n_relays": sc.n_relays,
        "n_eves": sc.n_eves,
        "alpha0": _pair(sc.alpha0),
        "gamma": [_pair(v) for v in sc.gamma],
        "alpha": [_pair(v) for v in sc.alpha],
        "noise_power": sc.noise_power,
        "eve_csi": sc.eve_csi.value,
    }
    if sc.beta0 is not None:
        s["beta0"] = [_pair(v) for v in sc.beta0]
    if sc.beta is not None:
        s["beta"] = [[_pair(v) for v in row] for row in sc.beta]
    if sc.sigma2_beta0 is not None:
        s["sigma2_beta0"] = [float(v) for v in sc.sigma2_beta0]
    if sc.sigma2_beta is not None:
        s["sigma2_beta"] = [[float(v) for v in row] for row in sc.sigma2_beta]

    solve = {
        "total_power_db": cfg.total_power_db,
        "public_rate": cfg.public_rate,
        "power_steps": cfg.power_steps,
        "secrecy_bisect_tol": cfg.secrecy_bisect_tol,
        "sdp_tol": cfg.sdp_tol,
        "eve_must_decode_public": cfg.eve_must_decode_public,
        "mc_samples": cfg.mc_samples,
        "rng_seed": cfg.rng_seed,
        "include_m_equals_m": cfg.include_m_equals_m,
        "verify_monotone": cfg.verify_monotone,
        "rounding_samples": cfg.rounding_samples,
    }
    return {"scenario": s, "solve": solve}


def dump_scenario(sc: ChannelScenario, cfg: SolveConfig) -> str:
    """Serialize to the JSON document format (floats round-trip exactly)."""
    return json.dumps(scenario_to_document(sc, cfg), indent=2) + "\n"
