"""
Command-line experiment runner.

Runs one preparation (or the cost comparison) from flags and/or a YAML
config file and writes a YAML report; --sweep runs a parameter grid and
writes one CSV row per grid point.

Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.
"""

import argparse
import itertools
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, fields, replace

import pandas as pd
import yaml
from tqdm import tqdm

from data.data_io import load_oracle_data, load_table_values, write_amplitude_table
from models.prep_algorithms import (
    InversePrepConfig,
    prepare_division,
    prepare_general,
    prepare_inverse,
    prepare_uniform,
)
from models.resource_estimator import compare_methods
from utils.config import SIMULATION_DEFAULTS, VERSION, load_yaml_config
from utils.errors import PrepError, ValidationError
from utils.quantum_arithmetic import FunctionTablePair, PredicateMode, builtin_function_tables
from utils.statevector import get_backend, sample_outcomes

logger = logging.getLogger("ExperimentRunner")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

MODES = ('inverse', 'division', 'general', 'uniform', 'estimate')
METRIC_COLUMNS = ['max_componentwise_error', 'fidelity', 'p_raw', 'rounds']


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one run."""

    mode: str = 'inverse'
    data_path: str = None
    const_c: int = 1
    m: int = 4
    n: int = None
    aa: object = SIMULATION_DEFAULTS['aa_rounds']
    backend: str = SIMULATION_DEFAULTS['backend']
    d: int = None
    epsilon: float = 2.0 ** -16
    f_name: str = None
    f_expr: str = None
    g_table: str = None
    h_table: str = None
    predicate: str = PredicateMode.PRODUCT.value
    seed: int = SIMULATION_DEFAULTS['seed']
    shots: int = 0
    output_path: str = None
    csv_path: str = None

    @classmethod
    def from_mapping(cls, options):
        """Build a config from a mapping, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        options = {k.replace('-', '_'): v for k, v in options.items()}
        unknown = sorted(set(options) - known)
        if unknown:
            raise ValidationError(f"unknown config options: {unknown}")
        return cls(**options)

    INTEGER_OPTIONS = ('const_c', 'm', 'n', 'd', 'seed', 'shots')
    REAL_OPTIONS = ('epsilon',)
    REQUIRED_OPTIONS = ('const_c', 'm', 'shots', 'epsilon')

    def _coerce(self, name, cast):
        """Convert a numeric option in place; YAML reads e.g. 1e-5 as a string."""
        value = getattr(self, name)
        if value is None:
            return
        what = "an integer" if cast is int else "a number"
        if isinstance(value, bool):
            raise ValidationError(f"{name} must be {what}, got {value!r}")
        try:
            converted = cast(value)
        except (TypeError, ValueError):
            raise ValidationError(f"{name} must be {what}, got {value!r}")
        if cast is int and isinstance(value, float) and converted != value:
            raise ValidationError(f"{name} must be {what}, got {value!r}")
        setattr(self, name, converted)

    def validate(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        get_backend(self.backend)
        for name in self.REQUIRED_OPTIONS:
            if getattr(self, name) is None:
                raise ValidationError(f"option {name} must be set")
        for name in self.INTEGER_OPTIONS:
            self._coerce(name, int)
        for name in self.REAL_OPTIONS:
            self._coerce(name, float)
        if self.aa != 'auto' and (isinstance(self.aa, bool) or not isinstance(self.aa, int) or self.aa < 0):
            raise ValidationError(f"aa must be 'auto' or an integer >= 0, got {self.aa!r}")
        if self.m < 1:
            raise ValidationError(f"m must be an integer >= 1, got {self.m!r}")
        if self.shots < 0:
            raise ValidationError(f"shots must be >= 0, got {self.shots}")

        if self.mode in ('inverse', 'division', 'general') and not self.data_path:
            raise ValidationError(f"mode {self.mode} requires --data")
        if self.mode == 'uniform' and self.d is None:
            raise ValidationError("mode uniform requires --d")
        if self.mode == 'general' and not self.f_name:
            if not (self.f_expr and self.g_table and self.h_table):
                raise ValidationError(
                    "mode general requires --f-name, or --f-expr with --g-table and --h-table"
                )
        if self.mode == 'estimate' and not 0.0 < self.epsilon < 0.5:
            raise ValidationError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        return self

    def to_dict(self):
        return asdict(self)


def _represent_float(dumper, value):
    if value != value:
        text = '.nan'
    elif value in (float('inf'), float('-inf')):
        text = '.inf' if value > 0 else '-.inf'
    else:
        # 17 significant digits always round-trip a double
        text = format(value, '#.17g')
    return dumper.represent_scalar('tag:yaml.org,2002:float', text)


class ReportDumper(yaml.SafeDumper):
    pass


ReportDumper.add_representer(float, _represent_float)


@dataclass
class ReportFile:
    """Serialized report plus config echo, library version and wall-clock time."""

    report: dict
    config: dict
    version: str = VERSION
    wall_clock_seconds: float = 0.0

    def to_yaml(self):
        return yaml.dump(asdict(self), Dumper=ReportDumper, sort_keys=False,
                         default_flow_style=False)

    @classmethod
    def from_yaml(cls, text):
        try:
            content = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ValidationError(f"malformed report: {e}")
        if not isinstance(content, dict):
            raise ValidationError("a report document must be a mapping")
        return cls(**content)

    @classmethod
    def read(cls, path):
        with open(path, 'r', encoding='utf-8') as fh:
            return cls.from_yaml(fh.read())

    def write(self, path):
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(self.to_yaml())
        logger.info(f"Report saved to {path}")


def _load_tables(config, n):
    if config.f_name:
        return builtin_function_tables(config.f_name, n, config.m)
    g_values = load_table_values(config.g_table, 1 << n)
    h_values = load_table_values(config.h_table, 1 << config.m)
    return FunctionTablePair.from_values(g_values, h_values, config.predicate, config.f_expr,
                                         n, config.m, name="file")


def _run_preparation(config):
    if config.mode == 'uniform':
        return prepare_uniform(config.d, backend=config.backend)

    if config.mode == 'inverse':
        data, _ = load_oracle_data(config.data_path, n=config.n)
        prep = InversePrepConfig(data=data, C=config.const_c, m=config.m,
                                 aa_rounds=config.aa, backend=config.backend)
        return prepare_inverse(prep)

    if config.mode == 'division':
        data, betas = load_oracle_data(config.data_path, n=config.n)
        if betas is None:
            raise ValidationError(f"division mode needs a beta column in {config.data_path}")
        return prepare_division(data, betas, config.m, config.aa, config.backend)

    data, _ = load_oracle_data(config.data_path, n=config.n, allow_zero=True)
    tables = _load_tables(config, data.n)
    return prepare_general(data, tables, config.m, config.aa, config.backend)


def run(config):
    """
    Execute one experiment.

    Args:
        config: ExperimentConfig

    Returns:
        ReportFile (also written to config.output_path when set)
    """
    start = time.perf_counter()
    config.validate()

    if config.mode == 'estimate':
        for option in ('shots', 'csv_path'):
            if getattr(config, option):
                logger.warning(f"--{option.split('_')[0]} is ignored in estimate mode")
        data = load_oracle_data(config.data_path, n=config.n)[0] if config.data_path else None
        methods = compare_methods(config.epsilon, data, config.const_c,
                                  config.m if data is not None else None)
        report = {
            'mode': 'estimate',
            'epsilon': float(config.epsilon),
            'multiplications': {name: cost['multiplications'] for name, cost in methods.items()},
            'methods': methods,
        }
    else:
        state, prep_report = _run_preparation(config)
        report = prep_report.to_dict()
        if config.shots:
            records = sample_outcomes(state, ('I',), config.shots, seed=config.seed)
            report['samples'] = [{'label': int(k[0]), 'count': v} for k, v in sorted(records.items())]
        if config.csv_path:
            write_amplitude_table(config.csv_path, prep_report)

    report_file = ReportFile(report=report, config=config.to_dict(), version=VERSION,
                             wall_clock_seconds=time.perf_counter() - start)
    if config.output_path:
        report_file.write(config.output_path)
    return report_file


def _sweep_row(config, point):
    report = run(config).report
    row = dict(point)
    row.update({
        'max_componentwise_error': report.get('max_componentwise_error'),
        'fidelity': report.get('fidelity_vs_target'),
        'p_raw': report.get('success_probability_raw'),
        'rounds': report.get('aa_rounds_used'),
    })
    return row


def batch_sweep(config_template, sweep, workers=1, output_path=None):
    """
    Run every point of a parameter grid.

    Args:
        config_template: ExperimentConfig supplying the fixed options
        sweep: Mapping option name -> list of values
        workers: Number of worker threads
        output_path: CSV destination (optional)

    Returns:
        DataFrame with one row per grid point, in grid order
    """
    names = list(sweep)
    columns = names + METRIC_COLUMNS
    known = {f.name for f in fields(ExperimentConfig)}
    for name in names:
        if name not in known:
            raise ValidationError(f"cannot sweep unknown option {name!r}")

    points = []
    if names and all(len(sweep[name]) for name in names):
        points = [dict(zip(names, values)) for values in itertools.product(*(sweep[n] for n in names))]

    configs = [replace(config_template, output_path=None, csv_path=None, **point) for point in points]
    for config in configs:
        config.validate()

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(tqdm(pool.map(_sweep_row, configs, points), total=len(points),
                         desc="sweep", disable=not points))

    df = pd.DataFrame(rows, columns=columns)
    if output_path:
        df.to_csv(output_path, index=False, float_format='%.17g')
        logger.info(f"Sweep with {len(rows)} points saved to {output_path}")
    return df


def _parse_scalar(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_sweep(spec):
    """
    Parse 'name=lo:hi' (inclusive integer range) or 'name=v1,v2,...'.

    Returns:
        (name, list of values)
    """
    if '=' not in spec:
        raise ValidationError(f"sweep must look like name=lo:hi or name=a,b,c, got {spec!r}")
    name, values = spec.split('=', 1)
    name = name.strip().replace('-', '_')
    values = values.strip()
    if not values:
        return name, []
    if ':' in values:
        lo, hi = values.split(':', 1)
        try:
            return name, list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ValidationError(f"sweep range bounds must be integers, got {values!r}")
    return name, [_parse_scalar(v.strip()) for v in values.split(',') if v.strip()]


def _parse_rounds(text):
    if text == 'auto':
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser():
    p = _Parser(description="Black-box state preparation by inequality test")
    p.add_argument("--config", type=str, default=None, help="YAML file of options")
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--data", dest="data_path", type=str, default=None,
                   help="Oracle values, one integer per line (beta as second column)")
    p.add_argument("--const-c", dest="const_c", type=int, default=None)
    p.add_argument("--m", type=int, default=None, help="Grid bits")
    p.add_argument("--n", type=int, default=None, help="Oracle value bits")
    p.add_argument("--aa", type=_parse_rounds, default=None, help="'auto' or a round count")
    p.add_argument("--backend", choices=["dense", "block"], default=None)
    p.add_argument("--d", type=int, default=None, help="Dimension for uniform mode")
    p.add_argument("--epsilon", type=float, default=None, help="Precision for estimate mode")
    p.add_argument("--f-name", dest="f_name", type=str, default=None,
                   help="Builtin function: inv_sqrt_1p, inverse, linear")
    p.add_argument("--f-expr", dest="f_expr", type=str, default=None,
                   help="Target f(x) as a sympy expression")
    p.add_argument("--g-table", dest="g_table", type=str, default=None)
    p.add_argument("--h-table", dest="h_table", type=str, default=None)
    p.add_argument("--predicate", choices=[mode.value for mode in PredicateMode], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shots", type=int, default=None, help="Sampled measurement records (demo)")
    p.add_argument("--out", dest="output_path", type=str, default=None)
    p.add_argument("--csv", dest="csv_path", type=str, default=None, help="Amplitude table CSV")
    p.add_argument("--sweep", action="append", default=None,
                   help="name=lo:hi or name=a,b,c (repeatable)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return p


def main(argv=None):
    """
    Parse arguments, run and report.

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        options = load_yaml_config(args.config) if args.config else {}
        cli_options = {k: v for k, v in vars(args).items()
                       if k not in ('config', 'sweep', 'workers', 'log_level') and v is not None}
        options.update(cli_options)
        config = ExperimentConfig.from_mapping(options)

        if args.sweep:
            sweep = dict(parse_sweep(spec) for spec in args.sweep)
            df = batch_sweep(replace(config, output_path=None), sweep,
                             workers=args.workers, output_path=config.output_path)
            if not config.output_path:
                sys.stdout.write(df.to_csv(index=False, float_format='%.17g'))
        else:
            report_file = run(config)
            if not config.output_path:
                sys.stdout.write(report_file.to_yaml())
    except ValidationError as e:
        logger.error(f"invalid input: {e}")
        return EXIT_VALIDATION
    except OSError as e:
        # unreadable inputs and unwritable --out/--csv paths
        logger.error(f"file access failed: {e}")
        return EXIT_VALIDATION
    except PrepError as e:
        logger.error(f"run failed: {e}")
        return EXIT_RUNTIME

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
