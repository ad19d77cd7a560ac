"""
Unified configuration module for the relay secrecy solver.

This module consolidates all runtime defaults in one place:
- Environment variables (.env)
- Solver tolerances and iteration caps
- Performance settings (sweep workers)
- Default scenario and output paths
"""

import os
from pathlib import Path

# Load environment variables from .env file

try:
    from dotenv import load_dotenv

    # Load .env from the project root directory
    PROJECT_ROOT = Path(__file__).parent.parent
    env_path = PROJECT_ROOT / ".env"
    load_dotenv(dotenv_path=env_path)
except ImportError:
    # dotenv not installed, rely on system environment variables
    PROJECT_ROOT = Path(__file__).parent.parent


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "")
    try:
        return int(raw) if raw else default
    except ValueError:
        return default


class Config:
    """
    Unified global configuration for the solver.

    Scenario documents and CLI flags override these values per run;
    the class attributes are the last fallback.
    """

    # === Environment Variables (from .env) ===
    default_config_path: str = os.getenv(
        "RELAY_SECRECY_CONFIG", str(PROJECT_ROOT / "scenarios" / "paper_n2j3.json")
    )
    log_level: str = os.getenv("RELAY_SECRECY_LOG_LEVEL", "INFO")

    # === Scenario Defaults ===
    noise_power: float = 1.0  # N0, linear
    total_power_db: float = 6.0  # P_T in dB relative to N0
    public_rate: float = 0.2  # R0, bits per channel use

    # === Power Split ===
    power_steps: int = 50  # M
    include_m_equals_m: bool = False  # allow P_m = P_T
    verify_monotone: bool = False  # solve every m and assert R_s^m is monotone

    # === Secret Solver ===
    secrecy_bisect_tol: float = 1e-6  # bits
    max_bisect_iters: int = 60
    rank_one_threshold: float = 1e-6  # lambda2/lambda1 accepted as rank one
    rounding_samples: int = 200

    # === Cone Kernel ===
    sdp_tol: float = 1e-8
    kernel_max_iters: int = 150
    kernel_step_fraction: float = 0.95
    max_psd_dim: int = 32
    max_constraints: int = 64

    # === Feasibility Audit ===
    constraint_tol: float = 1e-7  # absolute, on rates and powers
    power_tol: float = 1e-9

    # === Monte-Carlo ===
    mc_samples: int = _env_int("RELAY_SECRECY_MC_SAMPLES", 100_000)
    rng_seed: int = 0

    # === Oracle Check ===
    oracle_secret_tol: float = 0.02  # bits
    oracle_public_tol: float = 1e-8  # power units
    oracle_max_relays: int = 2

    # === Performance Settings ===
    max_workers: int = _env_int("RELAY_SECRECY_JOBS", os.cpu_count() or 1)

    # === Output Paths (derived from project root) ===
    exports_folder: str = os.getenv(
        "RELAY_SECRECY_EXPORTS_FOLDER", str(PROJECT_ROOT / "outputs")
    )

    @classmethod
    def validate(cls) -> list[str]:
        """
        Validate configuration and return list of issues.

        Returns:
            list[str]: List of validation error messages (empty if valid)
        """
        issues = []

        if cls.noise_power <= 0:
            issues.append(f"noise_power must be positive, got {cls.noise_power}")

        if cls.power_steps < 1:
            issues.append(f"power_steps must be >= 1, got {cls.power_steps}")

        if cls.secrecy_bisect_tol <= 0:
            issues.append(
                f"secrecy_bisect_tol must be positive, got {cls.secrecy_bisect_tol}"
            )

        if cls.sdp_tol <= 0:
            issues.append(f"sdp_tol must be positive, got {cls.sdp_tol}")

        if cls.max_workers < 1:
            issues.append(f"max_workers must be >= 1, got {cls.max_workers}")

        if cls.rounding_samples < 0:
            issues.append(
                f"rounding_samples must be >= 0, got {cls.rounding_samples}"
            )

        if cls.mc_samples < 1:
            issues.append(f"mc_samples must be >= 1, got {cls.mc_samples}")

        return issues
