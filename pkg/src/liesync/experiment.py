"""Simulation orchestration: config files, runs, records, CSV output.

Config files are line-oriented ``key = value`` text with ``#`` comments.
Recognized keys (defaults in brackets):

    group         = SO3 | SE3
    agents        = m                         (>= 2)
    edges         = complete | "0-1 0-2 ..."  [complete]
    mode          = extremum_seeking | gradient_flow   [extremum_seeking]
    integrator    = lie_euler | rk_mk2        [lie_euler]
    omega         = base dither frequency     [40]
    multipliers   = auto | m*n integers       [auto]
    amplitudes    = 1, n, or m*n positive reals (uniform / per-direction / full)  [0.1]
    amplitude_cap = per-agent amplitude row norm bound  [0.5]
    t_final       = final time                (required)
    dt            = auto | step               [auto: 2*pi / (50 * omega_max)]
    record_every  = auto | steps per sample   [auto: max(1, floor((2*pi/omega)/dt))]
    gain          = scalar on the already-negated field  [1.0]
    tail_fraction = trailing fraction for the ultimate bound  [0.2]
    record_states = true | false              [true]
    initial       = path to a matrix fixture file (one matrix per ``---`` block)
    seed          = unsigned int (random initial configuration near consensus)
    initial_spread = algebra-ball radius for seeded initials  [0.2]

Exactly one of ``initial`` / ``seed`` must be set.  Initial matrices are
reprojected when their rotation blocks are within 1e-3 of orthogonal and
rejected otherwise.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cost import (Configuration, NetworkConfig, cost_states, dispersion_states)
from .dither import DitherSchedule, generate_frequencies, validate_frequencies
from .dynamics import advance_states, es_coeffs_states, gradient_coeffs_states
from .groups import (GroupTag, IntegrityError, exp_many, random_element,
                     reproject, so3_membership_error)

INITIAL_REPROJECT_TOL = 1e-3
RUN_DRIFT_LIMIT = 1e-8
DT_HARD_LIMIT = 2.0 * math.pi / 20.0   # dt * omega_max above this is rejected
DT_WARN_LIMIT = 2.0 * math.pi / 50.0   # ... above this is warned about

MODES = ("extremum_seeking", "gradient_flow")
INTEGRATORS = ("lie_euler", "rk_mk2")


class ConfigError(ValueError):
    """Config text rejected; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ExperimentConfig:
    net: NetworkConfig
    schedule: DitherSchedule
    mode: str
    integrator: str
    t_final: float
    dt: float
    record_every: int
    initial: Configuration | None
    seed: int | None
    initial_spread: float
    gain: float
    tail_fraction: float
    record_states: bool

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}")
        if not self.dt > 0.0:
            raise ConfigError("dt must be positive")
        if self.t_final < self.dt:
            raise ConfigError("t_final must be at least dt")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not 0.0 < self.tail_fraction <= 1.0:
            raise ConfigError("tail_fraction must be in (0, 1]")
        if (self.initial is None) == (self.seed is None):
            raise ConfigError("exactly one of initial matrices / seed must be given")
        if self.mode == "gradient_flow" and self.net.tag is not GroupTag.SO3:
            raise ConfigError("gradient_flow mode is defined on SO3 only")
        if self.schedule.m != self.net.m:
            raise ConfigError("schedule agent count does not match the network")
        if self.schedule.n != self.net.tag.algebra_dim:
            raise ConfigError("schedule direction count does not match the group")
        # dither resolution only constrains runs that integrate the dither
        if self.mode == "extremum_seeking":
            res = self.dt * self.schedule.max_omega
            if res > DT_HARD_LIMIT:
                raise ConfigError(
                    f"dt * omega_max = {res:.4g} exceeds {DT_HARD_LIMIT:.4g} "
                    "(fewer than 20 steps per fastest dither cycle)")
            if res > DT_WARN_LIMIT * (1.0 + 1e-12):
                warnings.warn(
                    f"dt * omega_max = {res:.4g} resolves the fastest dither "
                    "cycle with fewer than 50 steps", stacklevel=2)


@dataclass
class SimulationRecord:
    """Time series produced by run(): equal-length, strictly increasing times."""

    times: np.ndarray
    costs: np.ndarray
    dispersions: np.ndarray
    states: list[Configuration] | None = None

    def __len__(self) -> int:
        return len(self.times)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _parse_keyvals(text: str) -> dict[str, tuple[str, int]]:
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = line.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        out[key] = (value, lineno)
    return out


def read_matrix_blocks(text: str, dim: int) -> list[np.ndarray]:
    """Parse ``---``-separated blocks of whitespace-separated row-major numbers."""
    blocks = []
    for chunk in text.split("---"):
        body = "\n".join(
            line.split("#", 1)[0] for line in chunk.splitlines())
        values = [float(tok) for tok in body.split()]
        if not values:
            continue
        if len(values) != dim * dim:
            raise ConfigError(
                f"matrix block has {len(values)} values, expected {dim * dim}")
        blocks.append(np.array(values).reshape(dim, dim))
    return blocks


def _parse_edges(value: str, m: int) -> tuple[tuple[int, int], ...]:
    if value.lower() == "complete":
        return tuple((i, j) for i in range(m) for j in range(i + 1, m))
    edges = []
    for token in value.replace(",", " ").split():
        parts = token.split("-")
        if len(parts) != 2:
            raise ValueError(f"edge token {token!r} is not of the form i-j")
        edges.append((int(parts[0]), int(parts[1])))
    return tuple(edges)


def _parse_amplitudes(value: str, m: int, n: int) -> np.ndarray:
    vals = [float(tok) for tok in value.replace(",", " ").split()]
    if len(vals) == 1:
        return np.full((m, n), vals[0])
    if len(vals) == n:
        return np.tile(np.array(vals), (m, 1))
    if len(vals) == m * n:
        return np.array(vals).reshape(m, n)
    raise ValueError(f"amplitudes must have 1, {n}, or {m * n} entries, got {len(vals)}")


def _load_initial(path: Path, tag: GroupTag, m: int) -> Configuration:
    if not path.exists():
        raise ConfigError(f"initial matrix file not found: {path}")
    blocks = read_matrix_blocks(path.read_text(), tag.matrix_dim)
    if len(blocks) != m:
        raise ConfigError(f"{path} has {len(blocks)} matrix blocks, expected {m}")
    states = []
    for idx, mat in enumerate(blocks):
        err = so3_membership_error(mat)
        if err > INITIAL_REPROJECT_TOL:
            raise ConfigError(
                f"initial matrix {idx} is too far from the group to reproject "
                f"(||R^T R - I||_F = {err:.3e} > {INITIAL_REPROJECT_TOL:g})")
        if tag is GroupTag.SE3:
            if np.max(np.abs(mat[3] - [0.0, 0.0, 0.0, 1.0])) > INITIAL_REPROJECT_TOL:
                raise ConfigError(
                    f"initial matrix {idx} bottom row is not [0, 0, 0, 1]")
            mat = mat.copy()
            mat[3] = [0.0, 0.0, 0.0, 1.0]
        states.append(reproject(mat, tag))
    return Configuration(tuple(states))


def load_config(text: str, base_dir: str | Path | None = None,
                overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Parse and fully validate config text.

    ``overrides`` replaces raw key values before validation (CLI flags win over
    file values); an override of ``seed`` drops a file-supplied ``initial`` and
    vice versa.
    """
    kv = _parse_keyvals(text)
    if overrides:
        for key, value in overrides.items():
            key = key.lower()
            if key == "seed":
                kv.pop("initial", None)
            if key == "initial":
                kv.pop("seed", None)
            kv[key] = (str(value), 0)

    def take(key: str, default: str | None = None) -> tuple[str, int] | None:
        if key in kv:
            return kv.pop(key)
        if default is not None:
            return (default, 0)
        return None

    def fail(entry, message):
        raise ConfigError(message, entry[1] if entry[1] else None)

    entry = take("group")
    if entry is None:
        raise ConfigError("missing required key 'group'")
    try:
        tag = GroupTag(entry[0].upper())
    except ValueError:
        fail(entry, f"group must be SO3 or SE3, got {entry[0]!r}")

    entry = take("agents")
    if entry is None:
        raise ConfigError("missing required key 'agents'")
    try:
        m = int(entry[0])
    except ValueError:
        fail(entry, f"agents must be an integer, got {entry[0]!r}")
    n = tag.algebra_dim

    entry = take("edges", "complete")
    try:
        net = NetworkConfig(tag, m, _parse_edges(entry[0], m))
    except ValueError as exc:
        fail(entry, f"invalid edges: {exc}")

    entry = take("mode", "extremum_seeking")
    mode = entry[0].lower()

    entry = take("integrator", "lie_euler")
    integrator = entry[0].lower()

    entry = take("omega", "40")
    try:
        omega = float(entry[0])
    except ValueError:
        fail(entry, f"omega must be a number, got {entry[0]!r}")
    if omega <= 0:
        fail(entry, "omega must be positive")

    entry = take("multipliers", "auto")
    if entry[0].lower() == "auto":
        multipliers = np.array(generate_frequencies(m * n)).reshape(m, n)
    else:
        try:
            vals = [int(tok) for tok in entry[0].replace(",", " ").split()]
        except ValueError:
            fail(entry, f"multipliers must be integers, got {entry[0]!r}")
        if len(vals) != m * n:
            fail(entry, f"need {m * n} multipliers, got {len(vals)}")
        report = validate_frequencies(vals)
        if not report.ok:
            fail(entry, "invalid frequency multipliers:\n" + report.describe())
        multipliers = np.array(vals).reshape(m, n)

    entry = take("amplitude_cap", "0.5")
    amplitude_cap = float(entry[0])

    entry = take("amplitudes", "0.1")
    try:
        amplitudes = _parse_amplitudes(entry[0], m, n)
    except ValueError as exc:
        fail(entry, str(exc))

    try:
        schedule = DitherSchedule(amplitudes, omega, multipliers, amplitude_cap)
    except ValueError as exc:
        raise ConfigError(str(exc))

    entry = take("t_final")
    if entry is None:
        raise ConfigError("missing required key 't_final'")
    t_final = float(entry[0])

    entry = take("dt", "auto")
    if entry[0].lower() == "auto":
        dt = 2.0 * math.pi / (50.0 * schedule.max_omega)
    else:
        dt = float(entry[0])

    entry = take("record_every", "auto")
    if entry[0].lower() == "auto":
        record_every = max(1, int((2.0 * math.pi / omega) / dt))
    else:
        record_every = int(entry[0])

    gain = float(take("gain", "1")[0])
    tail_fraction = float(take("tail_fraction", "0.2")[0])
    entry = take("record_states", "true")
    if entry[0].lower() not in ("true", "false", "yes", "no", "1", "0"):
        fail(entry, f"record_states must be a boolean, got {entry[0]!r}")
    record_states = entry[0].lower() in ("true", "yes", "1")
    initial_spread = float(take("initial_spread", "0.2")[0])

    initial_entry = take("initial")
    seed_entry = take("seed")
    if kv:
        key, (_, lineno) = next(iter(kv.items()))
        raise ConfigError(f"unknown key {key!r}", lineno)

    initial = None
    seed = None
    if initial_entry is not None and seed_entry is not None:
        raise ConfigError("give either 'initial' or 'seed', not both")
    if initial_entry is not None:
        base = Path(base_dir) if base_dir is not None else Path.cwd()
        initial = _load_initial(base / initial_entry[0], tag, m)
    elif seed_entry is not None:
        seed = int(seed_entry[0])
        if seed < 0:
            fail(seed_entry, "seed must be non-negative")

    return ExperimentConfig(
        net=net, schedule=schedule, mode=mode, integrator=integrator,
        t_final=t_final, dt=dt, record_every=record_every,
        initial=initial, seed=seed, initial_spread=initial_spread,
        gain=gain, tail_fraction=tail_fraction, record_states=record_states)


def load_config_file(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return load_config(path.read_text(), base_dir=path.parent)


def initial_configuration(cfg: ExperimentConfig) -> Configuration:
    """Explicit matrices, or a seeded random configuration near consensus."""
    if cfg.initial is not None:
        return cfg.initial
    rng = np.random.default_rng(cfg.seed)
    tag = cfg.net.tag
    base = random_element(tag, rng)
    offsets = rng.normal(scale=cfg.initial_spread,
                         size=(cfg.net.m, tag.algebra_dim))
    states = base.mat @ exp_many(offsets, tag)
    return Configuration.from_array(tag, states)


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------

def _plan(cfg: ExperimentConfig) -> tuple[int, int]:
    nsteps = int(round(cfg.t_final / cfg.dt))
    nsteps = max(nsteps, 1)
    n_rec = 1 + nsteps // cfg.record_every
    if nsteps % cfg.record_every != 0:
        n_rec += 1
    return nsteps, n_rec


def _run_python(cfg: ExperimentConfig, states: np.ndarray, workers: int):
    """Reference engine: plain numpy loop mirroring _kernels.run_loop."""
    tag = cfg.net.tag
    edges = cfg.net.edge_array()
    amp = cfg.schedule.amplitudes
    omg = cfg.schedule.omegas
    dt = cfg.dt
    es_mode = cfg.mode == "extremum_seeking"
    midpoint = cfg.integrator == "rk_mk2"
    nsteps, n_rec = _plan(cfg)

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def field(st: np.ndarray, t: float) -> np.ndarray:
        if es_mode:
            return es_coeffs_states(st, edges, tag, amp, omg, t, cfg.gain)
        return gradient_coeffs_states(st, edges)

    def advance(st: np.ndarray, coeffs: np.ndarray, h: float) -> np.ndarray:
        if pool is None:
            return advance_states(st, coeffs, h, tag)
        # independent per-agent updates, computed in parallel chunks
        out = np.empty_like(st)
        chunks = np.array_split(np.arange(st.shape[0]), workers)
        def work(idx):
            out[idx] = advance_states(st[idx], coeffs[idx], h, tag)
        list(pool.map(work, [c for c in chunks if len(c)]))
        return out

    times = np.zeros(n_rec)
    costs = np.zeros(n_rec)
    disps = np.zeros(n_rec)
    drifts = np.zeros(n_rec)
    recorded = np.zeros((n_rec,) + states.shape)

    def record(r: int, t: float) -> None:
        times[r] = t
        costs[r] = cost_states(states, edges, tag)
        disps[r] = dispersion_states(states)
        drifts[r] = max(so3_membership_error(s) for s in states)
        recorded[r] = states

    record(0, 0.0)
    r = 1
    try:
        for k in range(nsteps):
            t = k * dt
            coeffs = field(states, t)
            if midpoint:
                mid = advance(states, coeffs, 0.5 * dt)
                coeffs = field(mid, t + 0.5 * dt)
            states = advance(states, coeffs, dt)
            if (k + 1) % cfg.record_every == 0 or (k + 1) == nsteps:
                record(r, (k + 1) * dt)
                r += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return times[:r], costs[:r], disps[:r], drifts[:r], recorded[:r]


def _run_kernel(cfg: ExperimentConfig, states: np.ndarray):
    from . import _kernels
    edges = cfg.net.edge_array()
    nsteps, n_rec = _plan(cfg)
    times = np.zeros(n_rec)
    costs = np.zeros(n_rec)
    disps = np.zeros(n_rec)
    drifts = np.zeros(n_rec)
    recorded = np.zeros((n_rec,) + states.shape)
    r = _kernels.run_loop(
        states.copy(), edges,
        np.ascontiguousarray(cfg.schedule.amplitudes),
        np.ascontiguousarray(cfg.schedule.omegas),
        cfg.gain, cfg.dt, nsteps, cfg.record_every,
        0 if cfg.mode == "extremum_seeking" else 1,
        0 if cfg.integrator == "lie_euler" else 1,
        times, costs, disps, drifts, recorded)
    return times[:r], costs[:r], disps[:r], drifts[:r], recorded[:r]


def run(cfg: ExperimentConfig, engine: str = "auto", workers: int = 1) -> SimulationRecord:
    """Integrate the configured system from t = 0 to t_final.

    engine: "kernel" (JIT loop), "python" (numpy reference), or "auto" (kernel
    when importable).  Runs are deterministic given the config; workers > 1
    parallelizes the per-agent exponential updates in the python engine without
    changing results.
    """
    states = initial_configuration(cfg).as_array()
    if engine not in ("auto", "kernel", "python"):
        raise ValueError("engine must be 'auto', 'kernel', or 'python'")
    use_kernel = engine == "kernel"
    if engine == "auto":
        try:
            from . import _kernels  # noqa: F401
            use_kernel = True
        except ImportError:
            use_kernel = False
    if use_kernel:
        times, costs, disps, drifts, recorded = _run_kernel(cfg, states)
    else:
        times, costs, disps, drifts, recorded = _run_python(cfg, states, workers)

    worst = float(np.max(drifts))
    if worst > RUN_DRIFT_LIMIT:
        raise IntegrityError(
            f"state drifted off the group: max ||R^T R - I||_F = {worst:.3e} "
            f"> {RUN_DRIFT_LIMIT:g}")
    record = SimulationRecord(times=times, costs=costs, dispersions=disps)
    if cfg.record_states:
        record.states = [Configuration.from_array(cfg.net.tag, s) for s in recorded]
    return record


# ---------------------------------------------------------------------------
# record output
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(record: SimulationRecord, path: str | Path) -> None:
    """Header ``t,J,dispersion[,g<j>_<r><c>...]``; 17-significant-digit decimals."""
    header = ["t", "J", "dispersion"]
    include_states = bool(record.states)
    if include_states:
        m = record.states[0].m
        d = record.states[0].tag.matrix_dim
        header += [f"g{j}_{r}{c}" for j in range(m) for r in range(d) for c in range(d)]
    lines = [",".join(header)]
    for idx in range(len(record)):
        row = [_fmt(record.times[idx]), _fmt(record.costs[idx]),
               _fmt(record.dispersions[idx])]
        if include_states:
            row += [_fmt(x) for x in record.states[idx].as_array().reshape(-1)]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> SimulationRecord:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    state_cols = len(header) - 3
    times, costs, disps, states = [], [], [], []
    if state_cols:
        agents = sorted({name.split("_")[0] for name in header[3:]})
        per_agent = state_cols // len(agents)
        dim = int(round(math.sqrt(per_agent)))
        tag = GroupTag.SO3 if dim == 3 else GroupTag.SE3
    for line in lines[1:]:
        vals = [float(tok) for tok in line.split(",")]
        times.append(vals[0])
        costs.append(vals[1])
        disps.append(vals[2])
        if state_cols:
            arr = np.array(vals[3:]).reshape(len(agents), dim, dim)
            states.append(Configuration.from_array(tag, arr))
    return SimulationRecord(
        times=np.array(times), costs=np.array(costs),
        dispersions=np.array(disps), states=states if state_cols else None)


def ultimate_bound(record: SimulationRecord, tail_fraction: float = 0.2) -> float:
    """Max dispersion over the trailing ceil(tail_fraction * len) samples."""
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must be in (0, 1]")
    if len(record) == 0:
        raise ValueError("record is empty")
    tail = math.ceil(tail_fraction * len(record))
    return float(np.max(record.dispersions[-tail:]))
