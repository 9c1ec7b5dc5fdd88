"""Flat ``key = value`` run configuration.

One pair per line, ``#`` starts a comment. Kernel parameters use keys of the
form ``kernel_param.<name>``. The values ``auto`` are accepted for ``tau``
(phi-norm of the unit-variance driving law), ``n_max_search`` (the table
order) and ``n_ref`` (4 N + 64).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from . import phi as phi_mod
from .basis import BasisId
from .bounds import BoundMethod
from .errors import DomainError, ParseError, UnknownKernel, ValidationError
from .expansion import REGISTRY, ApproxScheme, KernelSpec
from .montecarlo import DISTRIBUTIONS
from .numerics import QuadSpec, TimeGrid

KERNEL_PARAM_PREFIX = "kernel_param."


@dataclass(frozen=True)
class RunConfig:
    basis: str = "hermite"
    kernel: str = "gauss-cos"
    kernel_params: tuple[tuple[str, float], ...] = ()
    T: float = 1.0
    t_grid_points: int = 513
    p: float = 2.0
    gamma: float = 3.0
    tau: float | None = None
    omega: float = 1.0
    alpha: float = 0.05
    delta: float = 0.1
    n_max: int = 1024
    approx_scheme: str = "exact"
    approx_tol: float = 1e-3
    approx_digits: int = 3
    approx_seed: int = 0
    approx_amplitude: float = 1e-4
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    truncation_radius: float = 12.0
    method: str = "hermite-tail"
    n_min: int = 0
    n_max_search: int | None = None
    seed: int = 0
    paths: int = 10_000
    n_ref: int | None = None
    distribution: str = "standard-normal"
    output_dir: str = "out"
    _lines: dict = field(default_factory=dict, compare=False, repr=False)

    # -- derived objects -------------------------------------------------
    def basis_id(self) -> BasisId:
        return BasisId.parse(self.basis)

    def bound_method(self) -> BoundMethod:
        return BoundMethod(self.method)

    def quad_spec(self) -> QuadSpec:
        return QuadSpec(rel_tol=self.rel_tol, abs_tol=self.abs_tol, truncation_radius=self.truncation_radius)

    def time_grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.T, self.t_grid_points)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, dict(self.kernel_params), horizon_T=self.T)

    def resolved_tau(self) -> float:
        return phi_mod.gaussian_tau(self.gamma) if self.tau is None else self.tau

    def phi_params(self) -> phi_mod.PhiParams:
        return phi_mod.PhiParams(self.gamma, self.resolved_tau(), self.omega)

    def accuracy(self) -> phi_mod.AccuracySpec:
        return phi_mod.AccuracySpec(self.p, self.delta, self.alpha)

    def approx(self) -> ApproxScheme:
        return ApproxScheme(self.approx_scheme, self.approx_tol, self.approx_digits,
                            self.approx_seed, self.approx_amplitude)

    def search_limit(self) -> int:
        return self.n_max if self.n_max_search is None else self.n_max_search

    # -- serialisation ---------------------------------------------------
    def items(self):
        """(key, text) pairs in a fixed order; parses back to an equal config."""
        for f in _FIELDS:
            value = getattr(self, f.name)
            if f.name == "kernel_params":
                for name, v in value:
                    yield KERNEL_PARAM_PREFIX + name, repr(float(v))
                continue
            yield f.name, _format(value)


def _format(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, float):
        return repr(value)
    return str(value)


_FIELDS = [f for f in dataclasses.fields(RunConfig) if not f.name.startswith("_")]
_TYPES = {
    "basis": str, "kernel": str, "T": float, "t_grid_points": int, "p": float, "gamma": float,
    "tau": "float?", "omega": float, "alpha": float, "delta": float, "n_max": int,
    "approx_scheme": str, "approx_tol": float, "approx_digits": int, "approx_seed": int,
    "approx_amplitude": float, "rel_tol": float, "abs_tol": float, "truncation_radius": float,
    "method": str, "n_min": int, "n_max_search": "int?", "seed": int, "paths": int,
    "n_ref": "int?", "distribution": str, "output_dir": str,
}


def _convert(key: str, text: str, line: int | None):
    kind = _TYPES[key]
    if isinstance(kind, str):
        if text.lower() == "auto":
            return None
        kind = float if kind == "float?" else int
    try:
        if kind is int:
            return int(text, 0) if text.lower().startswith("0x") else int(text)
        return kind(text)
    except ValueError:
        raise ValidationError(key, f"expected {kind.__name__}, got {text!r}", line) from None


def parse_pairs(text: str, comment_prefix: str | None = None) -> list[tuple[int, str, str]]:
    """``(line, key, value)`` triples from ``key = value`` text.

    With ``comment_prefix`` only lines starting with it are read (the prefix
    is stripped), which recovers the config echoed into CSV headers.
    """
    out, seen = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if comment_prefix is not None:
            if not line.startswith(comment_prefix):
                continue
            line = line[len(comment_prefix):].strip()
        else:
            line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError(lineno, "empty key")
        if key in seen:
            raise ParseError(lineno, f"duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        out.append((lineno, key, value))
    return out


def config_from_pairs(pairs, overrides: dict | None = None) -> RunConfig:
    values, params, lines = {}, {}, {}
    for lineno, key, text in pairs:
        if key.startswith(KERNEL_PARAM_PREFIX):
            name = key[len(KERNEL_PARAM_PREFIX):]
            try:
                params[name] = float(text)
            except ValueError:
                raise ValidationError(key, f"expected float, got {text!r}", lineno) from None
            lines[key] = lineno
            continue
        if key not in _TYPES:
            raise ValidationError(key, "unknown key", lineno)
        values[key] = _convert(key, text, lineno)
        lines[key] = lineno
    values.update(overrides or {})
    cfg = RunConfig(kernel_params=tuple(sorted(params.items())), _lines=lines, **values)
    validate(cfg)
    return cfg


def parse_config_text(text: str, overrides: dict | None = None) -> RunConfig:
    return config_from_pairs(parse_pairs(text), overrides)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read and validate a config file; ``None`` gives the defaults."""
    text = "" if path is None else Path(path).read_text(encoding="utf-8")
    return parse_config_text(text, overrides)


def config_from_csv(path: str | Path) -> RunConfig:
    """Recover the config echoed in a CSV output header."""
    text = Path(path).read_text(encoding="utf-8")
    return config_from_pairs(parse_pairs(text, comment_prefix="# config."))


def validate(cfg: RunConfig) -> None:
    def fail(key, reason):
        line = cfg._lines.get(key)
        raise ValidationError(key, reason, line)

    try:
        basis = cfg.basis_id()
    except ValueError:
        fail("basis", f"unknown basis {cfg.basis!r}; use hermite, cheb1 or cheb2")
    if cfg.kernel not in REGISTRY:
        fail("kernel", f"unknown kernel {cfg.kernel!r}")
    try:
        method = cfg.bound_method()
    except ValueError:
        fail("method", f"unknown method {cfg.method!r}; use one of {[m.value for m in BoundMethod]}")
    if not cfg.gamma > 2:
        fail("gamma", "must exceed 2")
    if method.uses_generating_function:
        if not 0 < cfg.omega < 1:
            fail("omega", "must lie in (0,1)")
    elif not 0 < cfg.omega <= 1:
        fail("omega", f"must lie in (0,1); omega = 1 is also accepted by {method.value}")
    if cfg.tau is not None and not cfg.tau > 0:
        fail("tau", "must be positive")
    if not cfg.p >= 1:
        fail("p", "must be >= 1")
    if not cfg.delta > 0:
        fail("delta", "must be positive")
    if not 0 < cfg.alpha < 1:
        fail("alpha", "must lie in (0,1)")
    if not cfg.T > 0:
        fail("T", "must be positive")
    if cfg.t_grid_points < 2:
        fail("t_grid_points", "must be >= 2")
    if cfg.n_max < 1:
        fail("n_max", "must be >= 1")
    if not 0 <= cfg.n_min <= cfg.search_limit() <= cfg.n_max:
        key = "n_max_search" if cfg.n_max_search is not None else "n_min"
        fail(key, "need 0 <= n_min <= n_max_search <= n_max")
    if cfg.paths < 1:
        fail("paths", "must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        fail("seed", "must be a 64-bit unsigned integer")
    if cfg.n_ref is not None and cfg.n_ref < 1:
        fail("n_ref", "must be >= 1")
    if cfg.distribution not in DISTRIBUTIONS:
        fail("distribution", f"must be one of {list(DISTRIBUTIONS)}")
    need = method.required_basis
    if need is not None and need is not basis:
        fail("method", f"{method.value} requires basis {need.value}")
    # owning modules re-check their own invariants
    for key, build in [
        ("rel_tol", cfg.quad_spec),
        ("approx_scheme", cfg.approx),
        ("kernel", cfg.kernel_spec),
    ]:
        try:
            build()
        except (ValueError, DomainError, UnknownKernel) as exc:
            fail(key, str(exc))
    try:
        cfg.kernel_spec().check_basis(basis)
    except ValueError as exc:
        fail("kernel", str(exc))
