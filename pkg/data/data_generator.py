import logging

import numpy as np
import pandas as pd

from models.prep_algorithms import InversePrepConfig
from utils.quantum_arithmetic import OracleData

logger = logging.getLogger("DataGenerator")


class OracleDataGenerator:
    """
    Generate seeded random oracle data for preparation experiments.

    Every draw comes from one numpy Generator, so a given seed always
    reproduces the same suite.
    """

    def __init__(self, seed=42):
        """
        Initialize the data generator.

        Args:
            seed: Random seed for reproducibility
        """
        self.seed = seed
        self.rng = np.random.default_rng(seed)

        # Default parameter ranges (inclusive)
        self.parameter_ranges = {
            'd': (2, 8),  # Number of amplitudes
            'n': (2, 4),  # Bits per oracle value
            'm': (2, 6),  # Grid bits
        }

    def set_parameter_ranges(self, param_dict):
        """
        Set custom parameter ranges.

        Args:
            param_dict: Dictionary of parameter ranges {param_name: (min_val, max_val)}
        """
        for param, range_vals in param_dict.items():
            if param in self.parameter_ranges:
                self.parameter_ranges[param] = range_vals

    def _draw(self, param):
        low, high = self.parameter_ranges[param]
        return int(self.rng.integers(low, high + 1))

    def sample_alphas(self, d, n, allow_zero=False):
        """
        Draw d oracle values below 2**n.

        Args:
            d: Number of values
            n: Bit width
            allow_zero: Include 0 in the range

        Returns:
            OracleData of width n
        """
        low = 0 if allow_zero else 1
        alphas = self.rng.integers(low, 1 << n, size=d)
        return OracleData(tuple(int(a) for a in alphas), n=n, allow_zero=allow_zero)

    def sample_inverse_config(self, aa_rounds=0, backend='block'):
        """Random InversePrepConfig with C drawn from [1, min(alpha)]."""
        d, n, m = self._draw('d'), self._draw('n'), self._draw('m')
        data = self.sample_alphas(d, n)
        C = int(self.rng.integers(1, min(data.alphas) + 1))
        return InversePrepConfig(data=data, C=C, m=m, aa_rounds=aa_rounds, backend=backend)

    def sample_division(self):
        """
        Random division instance.

        Returns:
            (OracleData, betas with 1 <= beta_i <= alpha_i, m)
        """
        d, n, m = self._draw('d'), self._draw('n'), self._draw('m')
        data = self.sample_alphas(d, n)
        betas = tuple(int(self.rng.integers(1, a + 1)) for a in data.alphas)
        return data, betas, m

    def generate_inverse_suite(self, num_configs=200, aa_rounds=0, backend='block'):
        return [self.sample_inverse_config(aa_rounds, backend) for _ in range(num_configs)]

    def generate_division_suite(self, num_configs=50):
        return [self.sample_division() for _ in range(num_configs)]

    def save_dataset(self, filename, num_configs=200):
        """
        Generate an inverse-coefficient suite and save it to a CSV file.

        Args:
            filename: Output filename
            num_configs: Number of configurations

        Returns:
            DataFrame with one row per configuration
        """
        rows = []
        for k, config in enumerate(self.generate_inverse_suite(num_configs)):
            rows.append({
                'config_id': k,
                'd': config.data.d,
                'n': config.data.n,
                'm': config.m,
                'C': config.C,
                'alphas': " ".join(str(a) for a in config.data.alphas),
            })

        df = pd.DataFrame(rows, columns=['config_id', 'd', 'n', 'm', 'C', 'alphas'])
        df.to_csv(filename, index=False)
        logger.info(f"Dataset saved to {filename}")
        return df
