"""Run configuration for the command-line tools.

Config files are YAML with one mapping per section. Every physical quantity
carries its unit in the key name; frequencies are ordinary frequencies in
MHz and are multiplied by 2 pi when converted to model parameters.
"""

from dataclasses import MISSING, asdict, dataclass, field, fields
import math

import yaml

from .codespace import CARDINAL_STATES
from .erasure import DetectorModel, SimConfig
from .hmm import HmmModel
from .params import TWO_PI, SystemParams


class ConfigError(ValueError):
    pass


@dataclass
class SystemSection:
    kappa_a_per_ms: float = 4.454
    kappa_b_per_ms: float = 3.339
    chi_aq_mhz: float = -0.514
    chi_bq_mhz: float = -0.251
    anharmonicity_mhz: float = -251.0
    n_th_a: float = 0.0053
    n_th_b: float = 0.0086
    round_duration_us: float = 12.0

    def validate(self):
        for key in ("kappa_a_per_ms", "kappa_b_per_ms", "round_duration_us"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"system.{key} must be positive")
        for key in ("n_th_a", "n_th_b"):
            if not 0 <= getattr(self, key) < 1:
                raise ConfigError(f"system.{key} must lie in [0, 1)")


@dataclass
class DetectorSection:
    p_e_given_C: float = 0.0
    p_g_given_E: float = 0.0
    p_higher_given_heated: float = 1.0
    collapses: bool = True

    def validate(self):
        for key in ("p_e_given_C", "p_g_given_E", "p_higher_given_heated"):
            if not 0 <= getattr(self, key) <= 1:
                raise ConfigError(f"detector.{key} must be a probability")


@dataclass
class SimulateSection:
    n_rounds: int = 167
    n_trajectories: int = 10_000
    master_seed: int = 0
    states: list = field(default_factory=lambda: list(CARDINAL_STATES))

    def validate(self):
        if self.n_rounds < 1:
            raise ConfigError("simulate.n_rounds must be >= 1")
        if self.n_trajectories < 1:
            raise ConfigError("simulate.n_trajectories must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("simulate.master_seed must be non-negative")
        bad = [s for s in self.states if s not in CARDINAL_STATES]
        if bad or not self.states:
            raise ConfigError(f"simulate.states: expected labels from {CARDINAL_STATES}, got {self.states}")


@dataclass
class HmmSection:
    transition_init: list = field(default_factory=lambda: [[0.96, 0.04], [0.04, 0.96]])
    emission_init: list = field(default_factory=lambda: [[0.99, 0.01], [0.1, 0.9]])
    max_iter: int = 200
    tol: float = 1e-6
    h_mode: str = "as_e"

    def validate(self):
        if self.h_mode not in ("as_e", "drop"):
            raise ConfigError("hmm.h_mode must be 'as_e' or 'drop'")
        if self.max_iter < 1 or not self.tol > 0:
            raise ConfigError("hmm.max_iter must be >= 1 and hmm.tol positive")
        try:
            self.model()
        except ValueError as exc:
            raise ConfigError(f"hmm initial model: {exc}") from exc

    def model(self):
        return HmmModel(self.transition_init, self.emission_init)


@dataclass
class ChevronSection:
    omega_mhz: float = 0.98
    delta_center_mhz: float = None  # None: centre on the chi_bq resonance
    delta_span_mhz: float = 4.0
    n_delta: int = 41
    t_max_us: float = 3.0
    n_t: int = 121
    n_b_max: int = 3
    include_dropped: bool = False

    def validate(self):
        if self.omega_mhz < 0:
            raise ConfigError("chevron.omega_mhz must be non-negative")
        if self.n_delta < 2 or self.n_t < 2:
            raise ConfigError("chevron grids need at least two points")
        if not self.delta_span_mhz > 0 or not self.t_max_us > 0:
            raise ConfigError("chevron.delta_span_mhz and chevron.t_max_us must be positive")
        if self.n_b_max < 2:
            raise ConfigError("chevron.n_b_max must be >= 2")


@dataclass
class TomographySection:
    method: str = "truncated"
    dim: int = 20

    def validate(self):
        if self.method not in ("truncated", "analytic"):
            raise ConfigError("tomography.method must be 'truncated' or 'analytic'")
        if self.dim < 2:
            raise ConfigError("tomography.dim must be >= 2")


@dataclass
class DecaySection:
    postselect: bool = True
    min_survivors: int = 100

    def validate(self):
        if self.min_survivors < 2:
            raise ConfigError("decay.min_survivors must be >= 2")


_SECTIONS = {
    "system": SystemSection,
    "detector": DetectorSection,
    "simulate": SimulateSection,
    "hmm": HmmSection,
    "chevron": ChevronSection,
    "tomography": TomographySection,
    "decay": DecaySection,
}


@dataclass
class RunConfig:
    system: SystemSection = field(default_factory=SystemSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    hmm: HmmSection = field(default_factory=HmmSection)
    chevron: ChevronSection = field(default_factory=ChevronSection)
    tomography: TomographySection = field(default_factory=TomographySection)
    decay: DecaySection = field(default_factory=DecaySection)

    @classmethod
    def from_dict(cls, data):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping of sections")
        cfg = cls()
        for name, section in data.items():
            if name not in _SECTIONS:
                raise ConfigError(f"unknown config section {name!r}")
            if section is None:
                continue
            if not isinstance(section, dict):
                raise ConfigError(f"section {name!r} must be a mapping")
            for key, value in section.items():
                cfg.set(f"{name}.{key}", value)
        cfg.validate()
        return cfg

    def to_dict(self):
        return asdict(self)

    def validate(self):
        for name in _SECTIONS:
            getattr(self, name).validate()

    def set(self, dotted, value):
        """Assign ``section.key``, coercing ``value`` to the field's type."""
        name, _, key = dotted.partition(".")
        if name not in _SECTIONS:
            raise ConfigError(f"unknown config section {name!r}")
        section = getattr(self, name)
        ftypes = {f.name: f for f in fields(section)}
        if key not in ftypes:
            raise ConfigError(f"unknown config key {dotted!r}")
        setattr(section, key, _coerce(dotted, ftypes[key], value))

    # conversions to model objects

    def system_params(self):
        s = self.system
        return SystemParams(
            kappa_a=s.kappa_a_per_ms,
            kappa_b=s.kappa_b_per_ms,
            chi_aq=TWO_PI * s.chi_aq_mhz,
            chi_bq=TWO_PI * s.chi_bq_mhz,
            K_qq=TWO_PI * s.anharmonicity_mhz,
            n_th_a=s.n_th_a,
            n_th_b=s.n_th_b,
            round_duration=s.round_duration_us,
        )

    def detector_model(self):
        d = self.detector
        return DetectorModel(d.p_e_given_C, d.p_g_given_E, d.p_higher_given_heated, d.collapses)

    def sim_config(self):
        s = self.simulate
        return SimConfig(self.system_params(), self.detector_model(), s.n_rounds, s.n_trajectories, s.master_seed)


def _coerce(dotted, f, value):
    default = f.default if f.default_factory is MISSING else f.default_factory()
    if isinstance(value, str) and not isinstance(default, str):
        # flag overrides arrive as text
        try:
            value = yaml.safe_load(value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{dotted}: cannot parse {value!r}") from exc
    if default is None:
        if value is None:
            return None
        if isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value):
            return float(value)
        raise ConfigError(f"{dotted}: expected a number or null, got {value!r}")
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{dotted}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{dotted}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{dotted}: expected a finite number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{dotted}: expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{dotted}: expected a list, got {value!r}")
        return value
    raise ConfigError(f"{dotted}: unsupported value {value!r}")


def load_config(path=None, overrides=()):
    """Parse a YAML file (or defaults) and apply ``section.key=value`` overrides."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    cfg = RunConfig.from_dict(data)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        cfg.set(key.strip(), value.strip())
    cfg.validate()
    return cfg


def dump_config(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)
