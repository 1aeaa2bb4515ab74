"""Measured system constants.

Units: cavity decay rates in 1/ms, dispersive shifts and Kerrs as angular
frequencies in rad/us (so ``2*pi*0.514`` means 0.514 MHz), round duration
in us.
"""

from dataclasses import dataclass
import math

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class SystemParams:
    kappa_a: float = 4.454
    kappa_b: float = 3.339
    chi_aq: float = -TWO_PI * 0.514
    chi_bq: float = -TWO_PI * 0.251
    K_qq: float = -TWO_PI * 251.0
    n_th_a: float = 0.0053
    n_th_b: float = 0.0086
    round_duration: float = 12.0

    def __post_init__(self):
        # zero decay is allowed for noiseless simulations
        if not (self.kappa_a >= 0 and self.kappa_b >= 0):
            raise ValueError("cavity decay rates must be non-negative")
        for name in ("n_th_a", "n_th_b"):
            if not 0 <= getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        if not self.round_duration > 0:
            raise ValueError("round_duration must be positive")

    @property
    def delta_kappa(self):
        """kappa_a - kappa_b in 1/ms."""
        return self.kappa_a - self.kappa_b

    @property
    def round_duration_ms(self):
        return self.round_duration * 1e-3


# Measured device values.
DEVICE = SystemParams()
