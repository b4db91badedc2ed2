"""``key = value`` run configuration.

Lines are ``key = value``; ``#`` starts a comment; keys are dot-namespaced
(``solver.uzawa.rho``). Every key except ``mode`` has a default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .assembly import ProblemSpec
from .expr import ExpressionError, parse_expression

__all__ = ["ConfigError", "RunConfig", "MODES", "parse_config", "load_config", "KEYS"]

MODES = ("vi", "uzawa", "pdas", "compare", "verify", "converge")


class ConfigError(ValueError):
    pass


def _positive_int(v):
    n = int(v)
    if n < 1:
        raise ValueError("must be a positive integer")
    return n


def _float(v):
    return float(v)


def _optional_float(v):
    return None if v.lower() in ("auto", "none", "") else float(v)


def _bool(v):
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected true or false")


def _expr(v):
    parse_expression(v)
    return v


def _choice(*options):
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v
    return parse


@dataclass
class RunConfig:
    mode: str
    n: int | None = None
    mesh: str | None = None
    xi: float = 1.0
    g: float = 1.0
    f0: str = "0"
    f2: str = "0"
    out: str = "out"
    levels: int = 4
    vtk: bool = False
    uzawa_rho: float | None = None
    uzawa_tol: float = 1e-11
    uzawa_max_iter: int = 50000
    pdas_c: float | None = None
    pdas_tol: float = 1e-10
    pdas_max_iter: int = 100
    vi_eps_start: float | None = None
    vi_eps_factor: float = 0.1
    vi_eps_min: float = 1e-8
    vi_newton_tol: float = 1e-12
    vi_max_newton_iter: int = 100
    compare_u_tol: float | None = None
    compare_multiplier_tol: float | None = None
    compare_kernel_tol: float | None = None
    compare_complementarity_tol: float = 1e-8
    verify_solver: str = "pdas"
    verify_kkt_tol: float | None = None
    verify_residual_tol: float | None = None
    verify_tol_u: float | None = None
    converge_reference: str = "auto"
    converge_min_l2_rate: float | None = None
    converge_min_energy_rate: float | None = None

    def problem(self):
        return ProblemSpec(self.xi, self.g, self.f0, self.f2)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r} (expected one of {', '.join(MODES)})")
        if self.n is not None and self.mesh is not None:
            raise ConfigError("give either n or mesh, not both")
        if self.mesh is None and self.n is None:
            self.n = 16
        if self.mesh is not None and not os.path.isfile(self.mesh):
            raise ConfigError(f"mesh file not found: {self.mesh}")
        if self.xi <= 0:
            raise ConfigError("xi must be positive")
        if self.g < 0:
            raise ConfigError("g must be positive")
        for name in ("uzawa_tol", "pdas_tol", "vi_newton_tol", "vi_eps_min", "compare_complementarity_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{_KEY_OF[name]} must be positive")
        for name in ("uzawa_rho", "pdas_c", "vi_eps_start", "compare_u_tol", "compare_multiplier_tol",
                     "compare_kernel_tol", "verify_kkt_tol", "verify_residual_tol", "verify_tol_u"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{_KEY_OF[name]} must be positive")
        if not 0 < self.vi_eps_factor < 1:
            raise ConfigError("solver.vi.eps_factor must lie in (0, 1)")
        if self.mode == "converge" and self.levels < 3:
            raise ConfigError("levels must be at least 3 for a convergence study")
        return self


# config key -> (RunConfig attribute, parser)
KEYS = {
    "mode": ("mode", str),
    "n": ("n", _positive_int),
    "mesh": ("mesh", str),
    "xi": ("xi", _float),
    "g": ("g", _float),
    "f0": ("f0", _expr),
    "f2": ("f2", _expr),
    "out": ("out", str),
    "levels": ("levels", _positive_int),
    "vtk": ("vtk", _bool),
    "solver.uzawa.rho": ("uzawa_rho", _optional_float),
    "solver.uzawa.tol": ("uzawa_tol", _float),
    "solver.uzawa.max_iter": ("uzawa_max_iter", _positive_int),
    "solver.pdas.c": ("pdas_c", _optional_float),
    "solver.pdas.tol": ("pdas_tol", _float),
    "solver.pdas.max_iter": ("pdas_max_iter", _positive_int),
    "solver.vi.eps_start": ("vi_eps_start", _optional_float),
    "solver.vi.eps_factor": ("vi_eps_factor", _float),
    "solver.vi.eps_min": ("vi_eps_min", _float),
    "solver.vi.newton_tol": ("vi_newton_tol", _float),
    "solver.vi.max_newton_iter": ("vi_max_newton_iter", _positive_int),
    "compare.u_tol": ("compare_u_tol", _optional_float),
    "compare.multiplier_tol": ("compare_multiplier_tol", _optional_float),
    "compare.kernel_tol": ("compare_kernel_tol", _optional_float),
    "compare.complementarity_tol": ("compare_complementarity_tol", _float),
    "verify.solver": ("verify_solver", _choice("pdas", "uzawa", "vi")),
    "verify.kkt_tol": ("verify_kkt_tol", _optional_float),
    "verify.residual_tol": ("verify_residual_tol", _optional_float),
    "verify.tol_u": ("verify_tol_u", _optional_float),
    "converge.reference": ("converge_reference", _choice("auto", "exact", "finest")),
    "converge.min_l2_rate": ("converge_min_l2_rate", _optional_float),
    "converge.min_energy_rate": ("converge_min_energy_rate", _optional_float),
}
_KEY_OF = {attr: key for key, (attr, _) in KEYS.items()}


def parse_config(text, overrides=None, base_dir=None):
    """Parse config text into a validated :class:`RunConfig`.

    ``overrides`` maps config keys to raw string values and wins over the file.
    A relative ``mesh`` path from the file is resolved against ``base_dir``.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key: {key}")
        values[key] = (value, lineno)
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown key: {key}")
        values[key] = (str(value), None)
    if "mode" not in values:
        raise ConfigError("missing required key: mode")

    kwargs = {}
    for key, (value, lineno) in values.items():
        attr, parse = KEYS[key]
        where = f"line {lineno}: " if lineno else ""
        try:
            kwargs[attr] = parse(value)
        except (ValueError, ExpressionError) as exc:
            raise ConfigError(f"{where}cannot parse {key} = {value!r}: {exc}") from None
    cfg = RunConfig(**kwargs)
    if cfg.mesh is not None and base_dir is not None and values["mesh"][1] is not None:
        cfg.mesh = os.path.join(base_dir, cfg.mesh)
    return cfg.validate()


def load_config(path, overrides=None):
    with open(path) as fh:
        return parse_config(fh.read(), overrides, base_dir=os.path.dirname(os.path.abspath(path)))
