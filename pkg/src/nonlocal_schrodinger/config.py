"""Line-based run configuration.

Grammar, one entry per line::

    section.key = value        # trailing comments allowed

Blank lines and lines starting with '#' are ignored. Keys are strict:
unknown keys are rejected, and every key except ``nonlocal.term`` may
appear once. Complex numbers are written ``a``, ``bi``, ``a+bi`` or
``a-bi`` (``j`` is accepted for ``i``). Lists are comma separated.
"""

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contour import DS_FLOOR, SpectralEnvelope
from .errors import ConfigError
from .nonlocal_cond import NonlocalCondition, PotentialDescriptor
from .operators import MAX_SMOOTHNESS, DiagonalOperator, fd_build
from .oracles import eigensystem
from .solver import NonlocalProblem, SolverConfig

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(
    rf"^(?:(?P<re>{_NUM})(?P<im>[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij]"
    rf"|(?P<only_re>{_NUM})"
    rf"|(?P<only_im>[+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij])$"
)
_FLOAT = re.compile(rf"^{_NUM}$")
_INT = re.compile(r"^[+-]?\d+$")


def parse_float(text):
    text = text.strip()
    if not _FLOAT.match(text):
        raise ValueError(f"expected a decimal number, got {text!r}")
    return float(text)


def parse_int(text):
    text = text.strip()
    if not _INT.match(text):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(text)


def _imag_part(text):
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_complex(text):
    """Parse 'a', 'bi', 'a+bi' or 'a-bi'."""
    s = text.strip().replace(" ", "")
    m = _COMPLEX.match(s)
    if not m:
        raise ValueError(f"expected a complex number like 0.5+0.2i, got {text!r}")
    if m.group("only_re") is not None:
        return complex(float(m.group("only_re")), 0.0)
    if m.group("re") is not None:
        return complex(float(m.group("re")), _imag_part(m.group("im")))
    return complex(0.0, _imag_part(m.group("only_im")))


def parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _list(item):
    def parse(text):
        parts = [p for p in text.split(",")]
        if any(not p.strip() for p in parts):
            raise ValueError(f"empty entry in list {text!r}")
        return [item(p) for p in parts]
    return parse


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t
    return parse


def _text(text):
    t = text.strip()
    if not t:
        raise ValueError("empty value")
    return t


def parse_term(text):
    """'alpha @ t' -> (alpha, t)."""
    if text.count("@") != 1:
        raise ValueError(f"expected 'alpha @ t', got {text!r}")
    a, t = text.split("@")
    return parse_complex(a), parse_float(t)


def parse_potential(text):
    """Potential text -> tuple ('none',) | ('constant', c) | ('cosine', a, f, phase) | ('separable', a, f, path)."""
    words = text.split()
    if not words:
        raise ValueError("empty potential specification")
    kind, args = words[0], words[1:]
    if kind == "none" and not args:
        return ("none",)
    if kind == "constant" and len(args) == 1:
        return ("constant", parse_complex(args[0]))
    if kind == "cosine" and len(args) == 3:
        return ("cosine", parse_complex(args[0]), parse_float(args[1]), parse_float(args[2]))
    if kind == "separable" and len(args) == 3:
        return ("separable", parse_complex(args[0]), parse_float(args[1]), args[2])
    raise ValueError(
        "expected 'none', 'constant c', 'cosine a f phase' or 'separable a f profile-file', "
        f"got {text!r}")


# key -> (parser, range check or None, constraint text)
_SCHEMA = {
    "operator.type": (_choice("diagonal", "fd"), None, ""),
    "operator.eigenvalues": (_list(parse_complex), None, ""),
    "operator.L": (parse_float, lambda v: v > 0, "L > 0"),
    "operator.nx": (parse_int, lambda v: v >= 1, "nx >= 1"),
    "operator.U": (parse_float, math.isfinite, "U finite"),
    "operator.U_file": (_text, None, ""),
    "operator.b_s": (parse_float, math.isfinite, "b_s finite"),
    "operator.d_s": (parse_float, lambda v: v >= 0, "d_s >= 0"),
    "operator.smoothness": (parse_int, lambda v: 0 <= v <= MAX_SMOOTHNESS,
                            f"0 <= smoothness <= {MAX_SMOOTHNESS}"),
    "potential.V": (parse_potential, None, ""),
    "nonlocal.T": (parse_float, lambda v: v > 0, "T > 0"),
    "nonlocal.term": (parse_term, lambda v: v[1] > 0, "t > 0"),
    "psi0.values": (_list(parse_complex), None, ""),
    "psi0.eigenvector": (parse_int, lambda v: v >= 0, "eigenvector >= 0"),
    "psi0.constant": (parse_complex, None, ""),
    "solver.N": (parse_int, lambda v: v >= 1, "N >= 1"),
    "solver.n": (parse_int, lambda v: v >= 1, "n >= 1"),
    "solver.delta": (parse_float, lambda v: 2 <= v <= MAX_SMOOTHNESS + 1,
                     f"2 <= delta <= {MAX_SMOOTHNESS + 1}"),
    "solver.err_tol": (parse_float, lambda v: v > 0, "err_tol > 0"),
    "solver.max_it": (parse_int, lambda v: v >= 1, "max_it >= 1"),
    "solver.panels": (parse_int, lambda v: v >= 1, "panels >= 1"),
    "solver.workers": (parse_int, lambda v: v >= 1, "workers >= 1"),
    "solver.strict_alg1": (parse_bool, None, ""),
    "solver.zero_box": (_list(parse_float), lambda v: len(v) == 4 and v[0] < v[1] and v[2] < v[3],
                        "zero_box = xmin, xmax, ymin, ymax with xmin < xmax and ymin < ymax"),
    "solver.ds_floor": (parse_float, lambda v: v > 0, "ds_floor > 0"),
    "propagate.s": (_list(parse_float), lambda v: min(v) >= 0, "s >= 0"),
    "propagate.oracle": (parse_bool, None, ""),
    "converge.N": (_list(parse_int), lambda v: min(v) >= 1, "N >= 1"),
    "converge.n": (_list(parse_int), lambda v: min(v) >= 1, "n >= 1"),
    "converge.mode": (_choice("propagate", "solve"), None, ""),
    "output.dir": (_text, None, ""),
}
_REPEATABLE = {"nonlocal.term"}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __contains__(self, key):
        return key in self.values

    def require(self, *keys):
        missing = [k for k in keys if k not in self.values]
        if missing:
            raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    def line_of(self, key):
        ln = self.lines.get(key)
        return ln[0] if isinstance(ln, list) else ln

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def parse_config(text, base_dir=None):
    cfg = RunConfig(base_dir=Path(base_dir) if base_dir is not None else Path.cwd())
    cfg.values["nonlocal.term"] = []
    cfg.lines["nonlocal.term"] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if not value:
            raise ConfigError(f"{key}: missing value", lineno)
        parser, check, rule = _SCHEMA[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        if check is not None and not check(parsed):
            raise ConfigError(f"{key} = {value} violates {rule}", lineno)
        if key in _REPEATABLE:
            cfg.values[key].append(parsed)
            cfg.lines[key].append(lineno)
            continue
        if key in cfg.values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {cfg.lines[key]})", lineno)
        cfg.values[key] = parsed
        cfg.lines[key] = lineno
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)


def _read_samples(cfg, key, path, count):
    try:
        data = np.loadtxt(cfg.resolve(path), dtype=float, ndmin=1)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot read samples from {path}: {exc}", cfg.line_of(key)) from None
    if data.shape != (count,):
        raise ConfigError(f"{key}: expected {count} samples in {path}, found {data.size}",
                          cfg.line_of(key))
    return data


def _envelope(cfg, default):
    if "operator.b_s" not in cfg and "operator.d_s" not in cfg:
        return None
    return SpectralEnvelope(cfg.get("operator.b_s", default[0]), cfg.get("operator.d_s", default[1]))


def build_operator(cfg):
    cfg.require("operator.type")
    smooth = cfg.get("operator.smoothness", MAX_SMOOTHNESS)
    if cfg.get("operator.type") == "diagonal":
        cfg.require("operator.eigenvalues")
        lam = np.array(cfg.get("operator.eigenvalues"), dtype=complex)
        env = _envelope(cfg, (float(lam.real.min()), float(np.abs(lam.imag).max())))
        try:
            return DiagonalOperator(lam, envelope=env, smoothness_order=smooth)
        except ValueError as exc:
            raise ConfigError(str(exc), cfg.line_of("operator.eigenvalues")) from None
    cfg.require("operator.L", "operator.nx")
    nx = cfg.get("operator.nx")
    if "operator.U" in cfg and "operator.U_file" in cfg:
        raise ConfigError("give operator.U or operator.U_file, not both", cfg.line_of("operator.U_file"))
    if "operator.U_file" in cfg:
        U = _read_samples(cfg, "operator.U_file", cfg.get("operator.U_file"), nx)
    else:
        U = np.full(nx, cfg.get("operator.U", 0.0))
    op = fd_build(cfg.get("operator.L"), nx, U, smoothness_order=smooth)
    env = _envelope(cfg, (op.envelope.b_s, op.envelope.d_s))
    if env is not None:
        op = fd_build(cfg.get("operator.L"), nx, U, envelope=env, smoothness_order=smooth)
    return op


def build_potential(cfg, dim):
    spec = cfg.get("potential.V", ("none",))
    kind = spec[0]
    if kind == "none":
        return PotentialDescriptor.zero()
    if kind == "constant":
        c = spec[1]
        return PotentialDescriptor(lambda t: c, 0.0, abs(c), is_zero=(c == 0))
    if kind == "cosine":
        a, f, ph = spec[1:]
        return PotentialDescriptor(lambda t: a * math.cos(f * t + ph), abs(a * f), abs(a),
                                   is_zero=(a == 0))
    a, f, path = spec[1:]
    u = _read_samples(cfg, "potential.V", path, dim)
    umax = float(np.abs(u).max())
    return PotentialDescriptor(lambda t: a * math.cos(f * t) * u, abs(a * f) * umax, abs(a) * umax,
                               is_zero=(a == 0 or umax == 0))


def build_condition(cfg):
    cfg.require("nonlocal.T")
    T = cfg.get("nonlocal.T")
    for (a, t), ln in zip(cfg.get("nonlocal.term"), cfg.lines["nonlocal.term"]):
        if t > T:
            raise ConfigError(f"nonlocal.term time {t} violates 0 < t <= T = {T}", ln)
    return NonlocalCondition(tuple(cfg.get("nonlocal.term")), T)


def build_psi0(cfg, op):
    given = [k for k in ("psi0.values", "psi0.eigenvector", "psi0.constant") if k in cfg]
    if len(given) != 1:
        raise ConfigError("give exactly one of psi0.values, psi0.eigenvector, psi0.constant")
    key = given[0]
    if key == "psi0.values":
        v = np.array(cfg.get(key), dtype=complex)
        if v.size != op.dim:
            raise ConfigError(f"psi0.values has {v.size} entries, operator dimension is {op.dim}",
                              cfg.line_of(key))
        return v
    if key == "psi0.constant":
        return np.full(op.dim, cfg.get(key), dtype=complex)
    k = cfg.get(key)
    if k >= op.dim:
        raise ConfigError(f"psi0.eigenvector = {k} violates eigenvector < dim = {op.dim}",
                          cfg.line_of(key))
    lam, vec = eigensystem(op)
    order = np.lexsort((lam.imag, lam.real))
    v = vec[:, order[k]]
    return v / np.linalg.norm(v)


def build_solver_config(cfg, workers=None):
    kw = {}
    for name in ("N", "n", "delta", "err_tol", "max_it", "panels", "workers", "strict_alg1", "ds_floor"):
        key = f"solver.{name}"
        if key in cfg:
            kw[name] = cfg.get(key)
    if "solver.zero_box" in cfg:
        kw["zero_box_override"] = tuple(cfg.get("solver.zero_box"))
    if workers is not None:
        kw["workers"] = workers
    kw.setdefault("ds_floor", DS_FLOOR)
    return SolverConfig(**kw)


def build_problem(cfg):
    op = build_operator(cfg)
    cond = build_condition(cfg)
    return NonlocalProblem(op, cond, build_potential(cfg, op.dim), build_psi0(cfg, op), cond.T)
