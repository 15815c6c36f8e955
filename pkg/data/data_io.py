"""
Reading oracle data and function tables, writing amplitude tables.

Oracle data files hold one integer per line (alpha), with an optional second
column (beta) for division. Function table files hold label,value pairs where
value is an exact number such as 3, 0.25 or 1/3. Lines starting with '#' are
comments. Files ending in .json or .yaml hold {"alphas": [...], "betas": [...]}
or a bare list of alphas.
"""

import logging
import os

import pandas as pd
import sympy
import yaml

from utils.errors import ValidationError
from utils.quantum_arithmetic import OracleData

logger = logging.getLogger("DataIO")


def _read_columns(path, max_columns):
    if not os.path.exists(path):
        raise ValidationError(f"data file not found: {path}")
    try:
        df = pd.read_csv(path, header=None, comment='#', dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ValidationError(f"{path} holds no data")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ValidationError(f"malformed data file {path}: {e}")

    if df.shape[1] > max_columns:
        raise ValidationError(f"{path}: expected at most {max_columns} columns, got {df.shape[1]}")
    if df.isnull().any().any():
        row = int(df.isnull().any(axis=1).to_numpy().nonzero()[0][0]) + 1
        raise ValidationError(f"{path}: missing value on data row {row}")
    return df


def _parse_int(text, path, row):
    try:
        return int(str(text).strip())
    except ValueError:
        raise ValidationError(f"{path}: data row {row} holds {text!r}, expected an integer")


def _load_structured(path):
    with open(path, 'r', encoding='utf-8') as fh:
        try:
            content = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ValidationError(f"malformed document {path}: {e}")
    if isinstance(content, list):
        return content, None
    if isinstance(content, dict) and 'alphas' in content:
        return content['alphas'], content.get('betas')
    raise ValidationError(f"{path} must hold a list of alphas or a mapping with 'alphas'")


def load_oracle_data(path, n=None, allow_zero=False):
    """
    Load oracle values (and optional betas) from a file.

    Args:
        path: CSV/JSON/YAML file
        n: Bit width override
        allow_zero: Accept zero values (general preparation only)

    Returns:
        (OracleData, tuple of betas or None)
    """
    if path.endswith(('.json', '.yaml', '.yml')):
        if not os.path.exists(path):
            raise ValidationError(f"data file not found: {path}")
        alphas, betas = _load_structured(path)
        alphas = [_parse_int(a, path, k + 1) for k, a in enumerate(alphas)]
        if betas is not None:
            betas = tuple(_parse_int(b, path, k + 1) for k, b in enumerate(betas))
    else:
        df = _read_columns(path, max_columns=2)
        alphas = [_parse_int(a, path, k + 1) for k, a in enumerate(df[0])]
        betas = None
        if df.shape[1] == 2:
            betas = tuple(_parse_int(b, path, k + 1) for k, b in enumerate(df[1]))

    data = OracleData(tuple(alphas), n=n, allow_zero=allow_zero)
    logger.info(f"Loaded d={data.d} oracle values from {path}")
    return data, betas


def load_table_values(path, size):
    """
    Load a total table label -> exact value over range(size).

    Args:
        path: Two-column CSV file
        size: Number of labels the table must cover

    Returns:
        List of sympy Rationals indexed by label
    """
    df = _read_columns(path, max_columns=2)
    if df.shape[1] != 2:
        raise ValidationError(f"{path}: table files need label,value columns")

    values = {}
    for k, (label, text) in enumerate(zip(df[0], df[1])):
        label = _parse_int(label, path, k + 1)
        if label in values:
            raise ValidationError(f"{path}: label {label} appears twice")
        try:
            values[label] = sympy.Rational(str(text).strip())
        except (TypeError, ValueError, sympy.SympifyError):
            raise ValidationError(f"{path}: value {text!r} for label {label} is not a number")

    missing = sorted(set(range(size)) - set(values))
    extra = sorted(set(values) - set(range(size)))
    if missing or extra:
        raise ValidationError(
            f"{path}: table must cover labels 0..{size - 1} exactly "
            f"(missing {missing[:5]}, unexpected {extra[:5]})"
        )
    return [values[k] for k in range(size)]


def write_amplitude_table(path, report):
    """
    Write index, amplitude, target and count columns of a report.

    Returns:
        The written DataFrame
    """
    d = len(report.post_selected_amplitudes)
    df = pd.DataFrame({
        'index': range(d),
        'amplitude': report.post_selected_amplitudes,
        'target': report.target_amplitudes or [None] * d,
        'count': report.counts or [None] * d,
    })
    df.to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Amplitude table saved to {path}")
    return df
