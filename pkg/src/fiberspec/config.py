"""JSON configuration loading and materialization.

A configuration declares the grids, one kernel, and named sections,
threshold fields, and partitions.  Expressions are parsed eagerly so
syntax problems surface with their offsets at load time; every error
raised while loading or materializing is wrapped in ConfigError.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import expr
from .calculus import DEFAULT_EPSILON, DEFAULT_TIE_TOL, ThresholdField
from .errors import ConfigError, FiberspecError
from .fiber import (
    DEFAULT_EIG_TOL,
    DEFAULT_RANK_TOL,
    FiberDecomposition,
    decompose_all_fibers,
)
from .grid import (
    OmegaGrid,
    SQuadrature,
    Section,
    build_omega_grid,
    build_s_quadrature,
    sample_field,
    sample_section,
)
from .kernel import KernelSpec, SeparableKernel, sample_kernel
from .spectrum import Partition

DEFAULT_OMEGA_N = 64
DEFAULT_S_N = 64
DEFAULT_S_RULE = "gauss_legendre"
DEFAULT_MEMBER_TOL = 1e-8


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = DEFAULT_RANK_TOL
    tie_tol: float = DEFAULT_TIE_TOL
    eig_tol: float = DEFAULT_EIG_TOL
    member_tol: float = DEFAULT_MEMBER_TOL


@dataclass(frozen=True)
class Config:
    ogrid: OmegaGrid
    squad: SQuadrature
    kernel: KernelSpec
    sections: dict
    thresholds: dict
    partitions: dict  # name -> tuple of (label, lo, hi)
    tolerances: Tolerances = field(default_factory=Tolerances)
    epsilon: float = DEFAULT_EPSILON
    threads: int = 1


def _expect(condition, message):
    if not condition:
        raise ConfigError(message)


def _parse_named(raw, where):
    try:
        return expr.parse(raw)
    except FiberspecError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _positive(raw, where):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a real number, got {raw!r}") from None
    _expect(value > 0.0, f"{where} must be positive, got {value!r}")
    return value


def _build_kernel(raw, ogrid, squad):
    _expect(isinstance(raw, dict), "kernel must be an object")
    kind = raw.get("type")
    if kind == "separable":
        terms_raw = raw.get("terms")
        _expect(
            isinstance(terms_raw, list) and terms_raw,
            "separable kernel needs a non-empty terms list",
        )
        terms = []
        for idx, term in enumerate(terms_raw):
            _expect(
                isinstance(term, dict) and "curve" in term and "basis" in term,
                f"kernel term {idx} must declare curve and basis",
            )
            curve = _parse_named(term["curve"], f"kernel terms[{idx}].curve")
            basis = _parse_named(term["basis"], f"kernel terms[{idx}].basis")
            terms.append((curve, basis))
        try:
            return SeparableKernel(tuple(terms))
        except FiberspecError as exc:
            raise ConfigError(f"kernel: {exc}") from exc
    if kind == "sampled":
        _expect(
            isinstance(raw.get("expression"), str),
            "sampled kernel needs an expression string",
        )
        e = _parse_named(raw["expression"], "kernel expression")
        try:
            return sample_kernel(e, ogrid, squad, symmetrize=True)
        except FiberspecError as exc:
            raise ConfigError(f"kernel: {exc}") from exc
    raise ConfigError(f"kernel type must be separable or sampled, got {kind!r}")


def load_config(
    path,
    omega_n: int | None = None,
    quad_n: int | None = None,
    rank_tol: float | None = None,
    tie_tol: float | None = None,
    member_tol: float | None = None,
    epsilon: float | None = None,
    threads: int | None = None,
) -> Config:
    """Load and materialize a configuration file.

    Keyword arguments override the corresponding file entries; they mirror
    the command line flags.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    _expect(isinstance(raw, dict), "config root must be an object")

    grid_raw = raw.get("omega_grid", {})
    _expect(isinstance(grid_raw, dict), "omega_grid must be an object")
    n_omega = omega_n if omega_n is not None else grid_raw.get("n", DEFAULT_OMEGA_N)
    _expect(
        isinstance(n_omega, int) and not isinstance(n_omega, bool),
        "omega_grid.n must be an integer",
    )

    squad_raw = raw.get("s_quadrature", {})
    _expect(isinstance(squad_raw, dict), "s_quadrature must be an object")
    rule = squad_raw.get("rule", DEFAULT_S_RULE)
    n_s = quad_n if quad_n is not None else squad_raw.get("n", DEFAULT_S_N)
    _expect(
        isinstance(n_s, int) and not isinstance(n_s, bool),
        "s_quadrature.n must be an integer",
    )

    try:
        ogrid = build_omega_grid(n_omega)
        squad = build_s_quadrature(rule, n_s)
    except FiberspecError as exc:
        raise ConfigError(f"grids: {exc}") from exc

    _expect("kernel" in raw, "config must declare a kernel")
    kspec = _build_kernel(raw["kernel"], ogrid, squad)

    sections = {}
    sections_raw = raw.get("sections", {})
    _expect(isinstance(sections_raw, dict), "sections must be an object")
    for name, text in sections_raw.items():
        sections[str(name)] = _parse_named(text, f"sections[{name}]")

    thresholds = {}
    thresholds_raw = raw.get("thresholds", {})
    _expect(isinstance(thresholds_raw, dict), "thresholds must be an object")
    for name, text in thresholds_raw.items():
        thresholds[str(name)] = _parse_named(text, f"thresholds[{name}]")

    partitions = {}
    partitions_raw = raw.get("partitions", {})
    _expect(isinstance(partitions_raw, dict), "partitions must be an object")
    for name, entries in partitions_raw.items():
        _expect(
            isinstance(entries, list) and entries,
            f"partitions[{name}] must be a non-empty list",
        )
        rows = []
        for idx, entry in enumerate(entries):
            where = f"partitions[{name}][{idx}]"
            _expect(
                isinstance(entry, dict)
                and "label" in entry
                and "omega_range" in entry,
                f"{where} must declare label and omega_range",
            )
            label = entry["label"]
            _expect(
                isinstance(label, int) and not isinstance(label, bool) and label >= 0,
                f"{where}.label must be a non-negative integer",
            )
            rng = entry["omega_range"]
            _expect(
                isinstance(rng, list) and len(rng) == 2,
                f"{where}.omega_range must be [lo, hi]",
            )
            lo, hi = float(rng[0]), float(rng[1])
            _expect(lo < hi, f"{where}.omega_range must have lo < hi")
            rows.append((label, lo, hi))
        partitions[str(name)] = tuple(rows)

    tol_raw = raw.get("tolerances", {})
    _expect(isinstance(tol_raw, dict), "tolerances must be an object")
    known = {"rank_tol", "tie_tol", "eig_tol", "member_tol"}
    for key in tol_raw:
        _expect(key in known, f"unknown tolerance {key!r}")
    tolerances = Tolerances(
        rank_tol=_positive(tol_raw.get("rank_tol", DEFAULT_RANK_TOL), "rank_tol"),
        tie_tol=_positive(tol_raw.get("tie_tol", DEFAULT_TIE_TOL), "tie_tol"),
        eig_tol=_positive(tol_raw.get("eig_tol", DEFAULT_EIG_TOL), "eig_tol"),
        member_tol=_positive(
            tol_raw.get("member_tol", DEFAULT_MEMBER_TOL), "member_tol"
        ),
    )
    if rank_tol is not None:
        tolerances = replace(tolerances, rank_tol=_positive(rank_tol, "rank_tol"))
    if tie_tol is not None:
        tolerances = replace(tolerances, tie_tol=_positive(tie_tol, "tie_tol"))
    if member_tol is not None:
        tolerances = replace(
            tolerances, member_tol=_positive(member_tol, "member_tol")
        )

    eps = _positive(
        epsilon if epsilon is not None else raw.get("epsilon", DEFAULT_EPSILON),
        "epsilon",
    )
    n_threads = threads if threads is not None else 1
    _expect(
        isinstance(n_threads, int) and n_threads >= 1,
        "threads must be a positive integer",
    )

    return Config(
        ogrid=ogrid,
        squad=squad,
        kernel=kspec,
        sections=sections,
        thresholds=thresholds,
        partitions=partitions,
        tolerances=tolerances,
        epsilon=eps,
        threads=n_threads,
    )


def section_by_name(cfg: Config, name: str) -> Section:
    if name not in cfg.sections:
        raise ConfigError(f"unknown section {name!r}")
    try:
        return sample_section(cfg.sections[name], cfg.ogrid, cfg.squad)
    except FiberspecError as exc:
        raise ConfigError(f"sections[{name}]: {exc}") from exc


def threshold_by_name(cfg: Config, name: str) -> ThresholdField:
    if name not in cfg.thresholds:
        raise ConfigError(f"unknown threshold {name!r}")
    try:
        field_ = sample_field(cfg.thresholds[name], cfg.ogrid)
    except FiberspecError as exc:
        raise ConfigError(f"thresholds[{name}]: {exc}") from exc
    return ThresholdField(field_, cfg.tolerances.tie_tol)


def partition_by_name(cfg: Config, name: str) -> Partition:
    if name not in cfg.partitions:
        raise ConfigError(f"unknown partition {name!r}")
    try:
        return Partition.from_ranges(cfg.ogrid, cfg.partitions[name])
    except FiberspecError as exc:
        raise ConfigError(f"partitions[{name}]: {exc}") from exc


def decompose(cfg: Config) -> FiberDecomposition:
    return decompose_all_fibers(
        cfg.kernel,
        cfg.ogrid,
        cfg.squad,
        rank_tol=cfg.tolerances.rank_tol,
        eig_tol=cfg.tolerances.eig_tol,
        threads=cfg.threads,
    )
