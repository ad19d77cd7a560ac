from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from modules.scenario import ChannelScenario, EveCsi, SolveConfig, load_scenario_file

BUNDLED_SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "paper_n2j3.json"


@pytest.fixture
def bundled_path() -> Path:
    return BUNDLED_SCENARIO


@pytest.fixture
def bundled():
    """The bundled two-relay, three-eavesdropper network and its solve settings."""
    return load_scenario_file(BUNDLED_SCENARIO)


@pytest.fixture
def bundled_scenario(bundled) -> ChannelScenario:
    return bundled[0]


@pytest.fixture
def fast_config() -> SolveConfig:
    """Coarse settings that keep full allocations quick."""
    return SolveConfig(
        total_power_db=6.0,
        public_rate=0.2,
        power_steps=8,
        secrecy_bisect_tol=1e-4,
        rounding_samples=50,
    )


def single_relay(
    alpha0: complex = 0.5,
    gamma: complex = 2.0,
    alpha: complex = 1.0,
    beta0=(),
    beta=(),
    noise_power: float = 1.0,
) -> ChannelScenario:
    """One relay with real gains, eavesdroppers given as (beta0_j, beta_j) lists."""
    n_eves = len(beta0)
    return ChannelScenario(
        n_relays=1,
        n_eves=n_eves,
        alpha0=alpha0,
        gamma=[gamma],
        alpha=[alpha],
        beta0=list(beta0),
        beta=np.array(beta, dtype=complex).reshape(n_eves, 1),
        noise_power=noise_power,
    )


def statistical(sc: ChannelScenario, sigma2_beta0, sigma2_beta) -> ChannelScenario:
    return ChannelScenario(
        n_relays=sc.n_relays,
        n_eves=sc.n_eves,
        alpha0=sc.alpha0,
        gamma=sc.gamma,
        alpha=sc.alpha,
        noise_power=sc.noise_power,
        eve_csi=EveCsi.STATISTICAL,
        sigma2_beta0=sigma2_beta0,
        sigma2_beta=sigma2_beta,
    )
