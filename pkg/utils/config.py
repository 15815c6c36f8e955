"""
Simulation defaults, numerical tolerances and configuration loading.
"""

import os
import logging

import yaml

from utils.errors import ValidationError

logger = logging.getLogger("Config")

VERSION = "0.1.0"

# Dense amplitude arrays are capped at 2**DEFAULT_MAX_QUBITS entries
DEFAULT_MAX_QUBITS = 26
MAX_QUBITS_ENV = "INEQPREP_MAX_QUBITS"

# Block layouts address amplitudes with int64 global indices
BLOCK_INDEX_QUBITS = 62

UNITARY_TOL = 1e-12
REDUCTION_TOL = 1e-9
REPORT_TOL = 1e-10
SUPPORT_TOL = 1e-12
PRUNE_TOL = 1e-15

SIMULATION_DEFAULTS = {
    'backend': 'dense',
    'aa_rounds': 'auto',
    'seed': 42,
}


def get_max_qubits():
    """
    Resolve the dense qubit budget.

    Returns:
        The value of INEQPREP_MAX_QUBITS if set, else DEFAULT_MAX_QUBITS
    """
    raw = os.environ.get(MAX_QUBITS_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_QUBITS

    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{MAX_QUBITS_ENV} must be an integer, got {raw!r}")

    if not 1 <= value <= BLOCK_INDEX_QUBITS:
        raise ValidationError(
            f"{MAX_QUBITS_ENV} must lie in [1, {BLOCK_INDEX_QUBITS}], got {value}"
        )
    return value


def load_yaml_config(path):
    """
    Load a mapping of experiment options from a YAML file.

    Args:
        path: Path to the YAML document

    Returns:
        Dictionary of options (empty if the document is empty)
    """
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")

    with open(path, 'r', encoding='utf-8') as fh:
        try:
            content = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ValidationError(f"malformed YAML in {path}: {e}")

    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ValidationError(f"config file {path} must hold a mapping at top level")

    logger.debug(f"Loaded {len(content)} options from {path}")
    return content
