"""
Data validation module for scenario documents and constructed scenarios.

Validators never raise: they return lists of human-readable issues so the
loader can report every problem in a document at once.
"""

import math
from numbers import Real

import numpy as np

SCENARIO_KEYS = {
    "n_relays",
    "n_eves",
    "alpha0",
    "beta0",
    "gamma",
    "alpha",
    "beta",
    "noise_power",
    "eve_csi",
    "sigma2_beta0",
    "sigma2_beta",
}

SOLVE_KEYS = {
    "total_power_db",
    "public_rate",
    "power_steps",
    "secrecy_bisect_tol",
    "sdp_tol",
    "eve_must_decode_public",
    "mc_samples",
    "rng_seed",
    "include_m_equals_m",
    "verify_monotone",
    "rounding_samples",
}

EVE_CSI_MODES = ("perfect", "statistical")


def _is_number(value):
    return isinstance(value, Real) and not isinstance(value, bool)


def validate_complex(value, field):
    """
    Validate a complex gain encoded as a two-element [re, im] array
    Returns tuple: (is_valid, error_message)
    """
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        return False, f"{field}: complex gains must be [re, im] arrays"
    if not all(_is_number(part) for part in value):
        return False, f"{field}: complex gain parts must be numbers"
    if not all(math.isfinite(float(part)) for part in value):
        return False, f"{field}: complex gain must be finite"
    return True, None


def _check_complex_list(doc, key, length, errors):
    values = doc.get(key)
    field = f"scenario.{key}"
    if not isinstance(values, list):
        errors.append(f"{field}: expected a list of {length} [re, im] gains")
        return
    if len(values) != length:
        errors.append(f"{field}: expected {length} entries, got {len(values)}")
        return
    for idx, value in enumerate(values):
        ok, error = validate_complex(value, f"{field}[{idx}]")
        if not ok:
            errors.append(error)


def _check_matrix(doc, key, rows, cols, errors, entry_check):
    values = doc.get(key)
    field = f"scenario.{key}"
    if not isinstance(values, list) or len(values) != rows:
        errors.append(f"{field}: expected {rows} rows (one per eavesdropper)")
        return
    for j, row in enumerate(values):
        if not isinstance(row, list) or len(row) != cols:
            errors.append(f"{field}[{j}]: expected {cols} entries (one per relay)")
            continue
        for i, value in enumerate(row):
            error = entry_check(value, f"{field}[{j}][{i}]")
            if error:
                errors.append(error)


def _positive_number_error(value, field):
    if not _is_number(value) or not math.isfinite(float(value)):
        return f"{field}: expected a finite number"
    if value <= 0:
        return f"{field}: variances must be positive"
    return None


def _complex_error(value, field):
    ok, error = validate_complex(value, field)
    return None if ok else error


def validate_scenario_document(doc):
    """
    Validate a parsed scenario document (the JSON object)
    Returns tuple: (is_valid, errors, warnings)
    """
    errors = []
    warnings = []

    if not isinstance(doc, dict):
        return False, ["document: top level must be an object"], []

    for key in sorted(set(doc) - {"scenario", "solve"}):
        warnings.append(f"document: unknown top-level key '{key}' ignored")

    scenario = doc.get("scenario")
    if not isinstance(scenario, dict):
        errors.append("scenario: missing or not an object")
        return False, errors, warnings

    for key in sorted(set(scenario) - SCENARIO_KEYS):
        warnings.append(f"scenario.{key}: unknown key ignored")

    # Dimensions first; every list length depends on them
    n_relays = scenario.get("n_relays")
    n_eves = scenario.get("n_eves", 0)
    if not isinstance(n_relays, int) or isinstance(n_relays, bool) or n_relays < 1:
        errors.append("scenario.n_relays: must be a positive integer")
        return False, errors, warnings
    if not isinstance(n_eves, int) or isinstance(n_eves, bool) or n_eves < 0:
        errors.append("scenario.n_eves: must be a nonnegative integer")
        return False, errors, warnings

    mode = scenario.get("eve_csi", "perfect")
    if mode not in EVE_CSI_MODES:
        errors.append(f"scenario.eve_csi: must be one of {', '.join(EVE_CSI_MODES)}")
        return False, errors, warnings

    ok, error = validate_complex(scenario.get("alpha0"), "scenario.alpha0")
    if not ok:
        errors.append(error)
    _check_complex_list(scenario, "gamma", n_relays, errors)
    _check_complex_list(scenario, "alpha", n_relays, errors)

    noise_power = scenario.get("noise_power", 1.0)
    if not _is_number(noise_power) or not math.isfinite(float(noise_power)):
        errors.append("scenario.noise_power: expected a finite number")
    elif noise_power <= 0:
        errors.append("scenario.noise_power: noise_power must be positive")

    needs_gains = mode == "perfect" and n_eves > 0
    if needs_gains or "beta0" in scenario:
        _check_complex_list(scenario, "beta0", n_eves, errors)
    if needs_gains or "beta" in scenario:
        _check_matrix(scenario, "beta", n_eves, n_relays, errors, _complex_error)

    needs_variances = mode == "statistical" and n_eves > 0
    if needs_variances or "sigma2_beta0" in scenario:
        values = scenario.get("sigma2_beta0")
        if not isinstance(values, list) or len(values) != n_eves:
            errors.append(f"scenario.sigma2_beta0: expected {n_eves} variances")
        else:
            for j, value in enumerate(values):
                error = _positive_number_error(value, f"scenario.sigma2_beta0[{j}]")
                if error:
                    errors.append(error)
    if needs_variances or "sigma2_beta" in scenario:
        _check_matrix(
            scenario, "sigma2_beta", n_eves, n_relays, errors, _positive_number_error
        )

    if mode == "statistical" and ("beta0" in scenario or "beta" in scenario):
        warnings.append("scenario: instantaneous eavesdropper gains unused in statistical mode")
    if n_eves == 0:
        warnings.append("scenario: no eavesdroppers, secrecy rate equals destination rate")

    solve = doc.get("solve", {})
    if not isinstance(solve, dict):
        errors.append("solve: must be an object")
    else:
        errors.extend(_validate_solve_section(solve, warnings))

    is_valid = len(errors) == 0
    return is_valid, errors, warnings


def _validate_solve_section(solve, warnings):
    errors = []
    for key in sorted(set(solve) - SOLVE_KEYS):
        warnings.append(f"solve.{key}: unknown key ignored")

    for key in ("total_power_db", "public_rate", "secrecy_bisect_tol", "sdp_tol"):
        if key in solve and (
            not _is_number(solve[key]) or not math.isfinite(float(solve[key]))
        ):
            errors.append(f"solve.{key}: expected a finite number")
    for key in ("power_steps", "mc_samples", "rng_seed", "rounding_samples"):
        if key in solve and (not isinstance(solve[key], int) or isinstance(solve[key], bool)):
            errors.append(f"solve.{key}: expected an integer")
    for key in ("eve_must_decode_public", "include_m_equals_m", "verify_monotone"):
        if key in solve and not isinstance(solve[key], bool):
            errors.append(f"solve.{key}: expected true or false")
    return errors


def validate_channel_scenario(sc):
    """
    Check the invariants of a constructed ChannelScenario
    Returns list of issues (empty if valid)
    """
    issues = []
    n, j = sc.n_relays, sc.n_eves

    if n < 1:
        issues.append("n_relays must be >= 1")
    if j < 0:
        issues.append("n_eves must be >= 0")
    if not (sc.noise_power > 0) or not math.isfinite(sc.noise_power):
        issues.append("noise_power must be positive")

    if not np.isfinite(sc.alpha0):
        issues.append("alpha0 must be finite")
    for name, arr, shape in (("gamma", sc.gamma, (n,)), ("alpha", sc.alpha, (n,))):
        if arr.shape != shape:
            issues.append(f"{name} must have {n} entries, got {arr.shape[0] if arr.ndim else 0}")
        elif not np.all(np.isfinite(arr)):
            issues.append(f"{name} must be finite")

    statistical = sc.eve_csi.value == "statistical"
    if not statistical and j > 0 and (sc.beta0 is None or sc.beta is None):
        issues.append("beta0 and beta are required with perfect eavesdropper CSI")
    for name, arr, shape in (("beta0", sc.beta0, (j,)), ("beta", sc.beta, (j, n))):
        if arr is None:
            continue
        if arr.shape != shape:
            issues.append(f"{name} must have shape {shape}, got {arr.shape}")
        elif not np.all(np.isfinite(arr)):
            issues.append(f"{name} must be finite")

    if statistical and j > 0 and (sc.sigma2_beta0 is None or sc.sigma2_beta is None):
        issues.append("sigma2_beta0 and sigma2_beta are required with statistical CSI")
    for name, arr, shape in (
        ("sigma2_beta0", sc.sigma2_beta0, (j,)),
        ("sigma2_beta", sc.sigma2_beta, (j, n)),
    ):
        if arr is None:
            continue
        if arr.shape != shape:
            issues.append(f"{name} must have shape {shape}, got {arr.shape}")
        elif not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            issues.append(f"{name}: all variances must be positive")

    return issues


def validate_solve_config(cfg):
    """Check SolveConfig invariants, returns list of issues"""
    issues = []
    if not math.isfinite(cfg.total_power_db):
        issues.append("total_power_db must be finite")
    if not (cfg.power_reference > 0):
        issues.append("power reference (N0) must be positive")
    if not math.isfinite(cfg.public_rate) or cfg.public_rate < 0:
        issues.append("public_rate must be nonnegative")
    if cfg.power_steps < 1:
        issues.append("power_steps must be >= 1")
    if not (cfg.secrecy_bisect_tol > 0):
        issues.append("secrecy_bisect_tol must be positive")
    if not (cfg.sdp_tol > 0):
        issues.append("sdp_tol must be positive")
    if cfg.mc_samples < 1:
        issues.append("mc_samples must be positive")
    if cfg.rounding_samples < 0:
        issues.append("rounding_samples must be >= 0")
    return issues
