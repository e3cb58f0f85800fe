"""Experiment configuration: YAML schema, validation, presets, and the
built-in benchmark runs.

A configuration file is a YAML mapping with blocks ``plant``, ``cost``,
``learning``, ``simulation``, ``output``; matrices are row-major nested
lists. Presets expand to explicit values before validation, so reports and
dumps always show concrete numbers. Validation collects every problem
before failing, and unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .certificates import gain_bound
from .costs import BasisExpansion, CompositeCost, pack_quadratic, quadratic_basis
from .errors import ConfigError, GradflowError
from .plant import PlantModel, lyapunov_certificate
from .simulate import (
    ConstantDisturbance,
    DisturbanceSignal,
    ESTIMATORS,
    PiecewiseLinearDisturbance,
    SimulationConfig,
    SinusoidalDisturbance,
)

# Benchmark plant and cost used by the bundled presets. The state matrix is
# stored so that the packaged Lyapunov pair (lyapunov_q below together with
# its solved P) certifies it under A'P + PA = -Q.
_BENCH_A = [
    [-2.7527, 1.2008, -0.2198, -2.8886],
    [-0.6944, -4.3397, -1.0665, 1.9220],
    [-2.8952, -1.7097, -5.1494, 2.7361],
    [-0.7989, -0.6025, 0.3043, -3.8897],
]
_BENCH_Q = [
    [3.9940, -1.1602, -0.1978, -0.9408],
    [-1.1602, 4.0145, -0.3114, -0.8189],
    [-0.1978, -0.3114, 5.9914, -1.8039],
    [-0.9408, -0.8189, -1.8039, 5.3419],
]
_BENCH_UPSILON = [
    [6.0950, 0.6234, 0.1468, -0.9387],
    [0.6234, 6.4595, -1.0145, 1.0203],
    [0.1468, -1.0145, 7.0719, 0.7042],
    [-0.9387, 1.0203, 0.7042, 4.5038],
]
_BENCH_UPSILON_LIN = [0.0201, 1.4908, 1.2373, 1.8092]
_BENCH_OFFSET = -0.1504
_BENCH_REFERENCE = [1.0, 0.5, -0.5, 1.0]
_BENCH_SEED_POINTS = [
    [0.8, -0.3, 0.5, -0.6],
    [-0.4, 0.7, -0.2, 0.3],
    [0.1, 0.9, 0.6, -0.8],
    [-0.7, -0.5, -0.9, 0.2],
]
_BENCH_W = [0.5, 0.5, 0.5, 0.5]

_EYE4 = [[1.0 if i == j else 0.0 for j in range(4)] for i in range(4)]

PRESET_NAME = "appendix-c"

_PLANT_KEYS = {"preset", "a", "b", "c", "d", "e", "lyapunov_q"}
_COST_KEYS = {"preset", "quadratic", "reference", "psi_quadratic", "phi_tail", "psi_tail"}
_QUAD_KEYS = {"matrix", "linear", "offset"}
_LEARNING_KEYS = {
    "estimator",
    "lam",
    "rls_cov_scale",
    "learn_phi",
    "learn_psi",
    "phi_seed_points",
    "psi_seed_points",
    "phi_seed_values",
    "psi_seed_values",
    "noise_std_phi",
    "noise_std_psi",
}
_SIMULATION_KEYS = {
    "eta",
    "s",
    "step",
    "horizon",
    "phi_rate",
    "psi_rate",
    "seed",
    "x0",
    "u0",
    "disturbance",
}
_DISTURBANCE_KEYS = {"kind", "offset", "amplitude", "omega", "phase", "times", "values"}
_OUTPUT_KEYS = {"dir", "log_decimation", "restart_policy", "figures"}
_TOP_KEYS = {"preset", "plant", "cost", "learning", "simulation", "output"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment: constructed objects plus the canonical
    (preset-expanded) dictionary used for dumping and round-trips."""

    plant: PlantModel
    lyapunov_q: np.ndarray
    cost: CompositeCost
    sim: SimulationConfig
    disturbance: DisturbanceSignal
    s: float
    out_dir: str
    restart_policy: str
    figures: bool
    canonical: dict

    def to_dict(self) -> dict:
        return self.canonical


def _check_unknown(block: dict, allowed: set, prefix: str, problems: list):
    for key in block:
        if key not in allowed:
            problems.append(f"{prefix}{key}: unknown key")


def _matrix(value, label, problems, rows=None, cols=None):
    if value is None:
        return None
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        problems.append(f"{label}: not a numeric matrix")
        return None
    if arr.ndim != 2:
        problems.append(f"{label}: expected a matrix (nested lists), got ndim {arr.ndim}")
        return None
    if (rows is not None and arr.shape[0] != rows) or (cols is not None and arr.shape[1] != cols):
        problems.append(f"{label}: expected shape ({rows}, {cols}), got {arr.shape}")
        return None
    return arr


def _vector(value, label, problems, size=None):
    if value is None:
        return None
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        problems.append(f"{label}: not a numeric vector")
        return None
    if arr.ndim != 1:
        problems.append(f"{label}: expected a flat list, got ndim {arr.ndim}")
        return None
    if size is not None and arr.size != size:
        problems.append(f"{label}: expected {size} entries, got {arr.size}")
        return None
    return arr


def _scalar(value, label, problems, default=None, kind=float):
    if value is None:
        return default
    if kind is bool:
        if not isinstance(value, bool):
            problems.append(f"{label}: expected true/false, got {value!r}")
            return default
        return value
    try:
        if kind is int and not float(value).is_integer():
            problems.append(f"{label}: expected an integer, got {value!r}")
            return default
        return kind(value)
    except (TypeError, ValueError):
        problems.append(f"{label}: expected a number, got {value!r}")
        return default


def _preset_plant() -> dict:
    return {
        "a": [row[:] for row in _BENCH_A],
        "b": [row[:] for row in _EYE4],
        "c": [row[:] for row in _EYE4],
        "d": [row[:] for row in _EYE4],
        "e": [row[:] for row in _EYE4],
        "lyapunov_q": [row[:] for row in _BENCH_Q],
    }


def _preset_cost() -> dict:
    return {
        "quadratic": {
            "matrix": [row[:] for row in _BENCH_UPSILON],
            "linear": _BENCH_UPSILON_LIN[:],
            "offset": _BENCH_OFFSET,
        },
        "reference": _BENCH_REFERENCE[:],
    }


def _expand_presets(data: dict, problems: list) -> dict:
    data = dict(data)
    top_preset = data.pop("preset", None)
    if top_preset is not None and top_preset != PRESET_NAME:
        problems.append(f"preset: unknown preset {top_preset!r}")
        top_preset = None
    for block_name, builder in (("plant", _preset_plant), ("cost", _preset_cost)):
        block = dict(data.get(block_name) or {})
        block_preset = block.pop("preset", None)
        if block_preset is not None and block_preset != PRESET_NAME:
            problems.append(f"{block_name}.preset: unknown preset {block_preset!r}")
            block_preset = None
        if top_preset or block_preset:
            expanded = builder()
            expanded.update(block)  # explicit keys win over the preset
            block = expanded
        data[block_name] = block
    return data


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a configuration mapping and build the experiment objects.

    Raises ConfigError carrying the full list of problems found, not just
    the first one.
    """
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a mapping"])
    _check_unknown(data, _TOP_KEYS, "", problems)
    data = _expand_presets(data, problems)

    plant_block = data.get("plant") or {}
    cost_block = data.get("cost") or {}
    learning_block = data.get("learning") or {}
    sim_block = data.get("simulation") or {}
    output_block = data.get("output") or {}
    for name, block, allowed in (
        ("plant", plant_block, _PLANT_KEYS),
        ("cost", cost_block, _COST_KEYS),
        ("learning", learning_block, _LEARNING_KEYS),
        ("simulation", sim_block, _SIMULATION_KEYS),
        ("output", output_block, _OUTPUT_KEYS),
    ):
        if not isinstance(block, dict):
            problems.append(f"{name}: must be a mapping")
            raise ConfigError(problems)
        _check_unknown(block, allowed, f"{name}.", problems)

    a = _matrix(plant_block.get("a"), "plant.a", problems)
    if a is None and "a" not in plant_block:
        problems.append("plant.a: required (give matrices or a preset)")
    n = a.shape[0] if a is not None else 0
    if a is not None and a.shape[0] != a.shape[1]:
        problems.append(f"plant.a: must be square, got {a.shape}")
    b = _matrix(plant_block.get("b"), "plant.b", problems, rows=n or None)
    if b is None and "b" not in plant_block:
        problems.append("plant.b: required")
    c = _matrix(plant_block.get("c"), "plant.c", problems, cols=n or None)
    if c is None and "c" not in plant_block:
        problems.append("plant.c: required")
    m = b.shape[1] if b is not None else 0
    p = c.shape[0] if c is not None else 0
    e = _matrix(plant_block.get("e"), "plant.e", problems, rows=n or None)
    q_dim = e.shape[1] if e is not None else 0
    if e is None and "e" not in plant_block:
        problems.append("plant.e: required")
    d = _matrix(plant_block.get("d"), "plant.d", problems, rows=p or None, cols=q_dim or None)
    if d is None and "d" not in plant_block:
        problems.append("plant.d: required")
    lyap_q = _matrix(
        plant_block.get("lyapunov_q"), "plant.lyapunov_q", problems, rows=n or None, cols=n or None
    )
    if lyap_q is None and n:
        lyap_q = np.eye(n)

    def _quadratic(block, prefix, dim):
        if block is None:
            return None
        if not isinstance(block, dict):
            problems.append(f"{prefix}: must be a mapping with matrix/linear/offset")
            return None
        _check_unknown(block, _QUAD_KEYS, f"{prefix}.", problems)
        mat = _matrix(block.get("matrix"), f"{prefix}.matrix", problems, rows=dim, cols=dim)
        lin = _vector(block.get("linear"), f"{prefix}.linear", problems, size=dim)
        off = _scalar(block.get("offset"), f"{prefix}.offset", problems, default=0.0)
        if mat is None:
            if "matrix" not in block:
                problems.append(f"{prefix}.matrix: required")
            return None
        if lin is None:
            lin = np.zeros(dim)
        return mat, lin, off

    phi_quad = _quadratic(cost_block.get("quadratic"), "cost.quadratic", m or None)
    if phi_quad is None and "quadratic" not in cost_block:
        problems.append("cost.quadratic: required (give the input loss or a preset)")
    reference = _vector(cost_block.get("reference"), "cost.reference", problems, size=p or None)
    psi_quad = _quadratic(cost_block.get("psi_quadratic"), "cost.psi_quadratic", p or None)
    phi_tail = _quadratic(cost_block.get("phi_tail"), "cost.phi_tail", m or None)
    psi_tail = _quadratic(cost_block.get("psi_tail"), "cost.psi_tail", p or None)

    estimator = learning_block.get("estimator", "ls")
    if estimator not in ESTIMATORS:
        problems.append(f"learning.estimator: must be one of {ESTIMATORS}, got {estimator!r}")
    lam = _scalar(learning_block.get("lam"), "learning.lam", problems, default=1e-3)
    rls_cov_scale = _scalar(
        learning_block.get("rls_cov_scale"), "learning.rls_cov_scale", problems, default=1e6
    )
    learn_phi = _scalar(
        learning_block.get("learn_phi"), "learning.learn_phi", problems, default=False, kind=bool
    )
    learn_psi = _scalar(
        learning_block.get("learn_psi"), "learning.learn_psi", problems, default=False, kind=bool
    )
    noise_std_phi = _scalar(
        learning_block.get("noise_std_phi"), "learning.noise_std_phi", problems, default=0.0
    )
    noise_std_psi = _scalar(
        learning_block.get("noise_std_psi"), "learning.noise_std_psi", problems, default=0.0
    )

    def _points(key, dim):
        raw = learning_block.get(key)
        if raw is None:
            return []
        if not isinstance(raw, list):
            problems.append(f"learning.{key}: must be a list of points")
            return []
        points = []
        for idx, entry in enumerate(raw):
            vec = _vector(entry, f"learning.{key}[{idx}]", problems, size=dim)
            if vec is not None:
                points.append(vec.tolist())
        return points

    phi_seed_points = _points("phi_seed_points", m or None)
    psi_seed_points = _points("psi_seed_points", p or None)

    def _values(key, points):
        raw = learning_block.get(key)
        if raw is None:
            return None
        vec = _vector(raw, f"learning.{key}", problems)
        if vec is None:
            return None
        if vec.size != len(points):
            problems.append(
                f"learning.{key}: expected one value per seed point ({len(points)}), got {vec.size}"
            )
            return None
        return [float(v) for v in vec]

    phi_seed_values = _values("phi_seed_values", phi_seed_points)
    psi_seed_values = _values("psi_seed_values", psi_seed_points)

    eta = _scalar(sim_block.get("eta"), "simulation.eta", problems, default=None)
    s = _scalar(sim_block.get("s"), "simulation.s", problems, default=0.5)
    step = _scalar(sim_block.get("step"), "simulation.step", problems, default=1e-3)
    horizon = _scalar(sim_block.get("horizon"), "simulation.horizon", problems, default=40.0)
    phi_rate = _scalar(sim_block.get("phi_rate"), "simulation.phi_rate", problems, default=0.25)
    psi_rate = _scalar(sim_block.get("psi_rate"), "simulation.psi_rate", problems, default=0.0)
    seed = _scalar(sim_block.get("seed"), "simulation.seed", problems, default=20250810, kind=int)
    x0 = _vector(sim_block.get("x0"), "simulation.x0", problems, size=n or None)
    u0 = _vector(sim_block.get("u0"), "simulation.u0", problems, size=m or None)
    if x0 is None and n:
        x0 = np.zeros(n)
    if u0 is None and m:
        u0 = np.zeros(m)

    dist_block = sim_block.get("disturbance")
    if dist_block is None and q_dim:
        dist_block = {"kind": "constant", "offset": [0.0] * q_dim}
    disturbance = None
    if isinstance(dist_block, dict):
        _check_unknown(dist_block, _DISTURBANCE_KEYS, "simulation.disturbance.", problems)
        kind = dist_block.get("kind", "constant")
        offset = _vector(
            dist_block.get("offset"), "simulation.disturbance.offset", problems, size=q_dim or None
        )
        if kind == "constant":
            if offset is not None:
                disturbance = ConstantDisturbance(offset)
            else:
                problems.append("simulation.disturbance.offset: required")
        elif kind == "sinusoidal":
            amplitude = _vector(
                dist_block.get("amplitude"),
                "simulation.disturbance.amplitude",
                problems,
                size=q_dim or None,
            )
            omega = _scalar(dist_block.get("omega"), "simulation.disturbance.omega", problems)
            phase = _scalar(
                dist_block.get("phase"), "simulation.disturbance.phase", problems, default=0.0
            )
            if offset is None or amplitude is None or omega is None:
                problems.append(
                    "simulation.disturbance: sinusoidal needs offset, amplitude, omega"
                )
            else:
                disturbance = SinusoidalDisturbance(offset, amplitude, omega, phase)
        elif kind == "piecewise-linear":
            knot_times = _vector(
                dist_block.get("times"), "simulation.disturbance.times", problems
            )
            knot_values = _matrix(
                dist_block.get("values"),
                "simulation.disturbance.values",
                problems,
                cols=q_dim or None,
            )
            if knot_times is None or knot_values is None:
                problems.append("simulation.disturbance: piecewise-linear needs times and values")
            else:
                try:
                    disturbance = PiecewiseLinearDisturbance(knot_times, knot_values)
                except GradflowError as exc:
                    problems.append(f"simulation.disturbance: {exc}")
        else:
            problems.append(f"simulation.disturbance.kind: unknown kind {kind!r}")
    elif dist_block is not None:
        problems.append("simulation.disturbance: must be a mapping")

    out_dir = output_block.get("dir", "out")
    log_decimation = _scalar(
        output_block.get("log_decimation"), "output.log_decimation", problems, default=10, kind=int
    )
    restart_policy = output_block.get("restart_policy", "per-arrival")
    if restart_policy not in ("per-arrival", "global"):
        problems.append(
            f"output.restart_policy: must be per-arrival or global, got {restart_policy!r}"
        )
    figures = _scalar(output_block.get("figures"), "output.figures", problems, default=True, kind=bool)

    if problems:
        raise ConfigError(problems)

    # construct the objects; constructor errors become config problems too
    try:
        plant = PlantModel(a=a, b=b, c=c, d=d, e=e)
    except GradflowError as exc:
        raise ConfigError([f"plant: {exc}"]) from exc

    try:
        phi_basis = quadratic_basis(m)
        psi_basis = quadratic_basis(p)
        alpha = pack_quadratic(*phi_quad)
        if psi_quad is not None:
            rho = pack_quadratic(*psi_quad)
        else:
            xi = reference if reference is not None else np.zeros(p)
            rho = pack_quadratic(np.eye(p), -xi, 0.5 * float(xi @ xi))

        def _tail(parts, dim):
            if parts is None:
                return None
            return BasisExpansion(basis=quadratic_basis(dim), coeffs=pack_quadratic(*parts))

        cost = CompositeCost(
            phi=BasisExpansion(basis=phi_basis, coeffs=alpha),
            psi=BasisExpansion(basis=psi_basis, coeffs=rho),
            g=plant.maps.g,
            h=plant.maps.h,
            phi_tail=_tail(phi_tail, m),
            psi_tail=_tail(psi_tail, p),
        )
    except GradflowError as exc:
        raise ConfigError([f"cost: {exc}"]) from exc

    if eta is None:
        eta = default_gain(plant, lyap_q, cost, s)

    try:
        sim = SimulationConfig(
            eta=eta,
            step=step,
            horizon=horizon,
            seed=seed,
            x0=x0,
            u0=u0,
            phi_rate=phi_rate,
            psi_rate=psi_rate,
            noise_std_phi=noise_std_phi,
            noise_std_psi=noise_std_psi,
            estimator=estimator,
            lam=lam,
            rls_cov_scale=rls_cov_scale,
            learn_phi=learn_phi,
            learn_psi=learn_psi,
            phi_seed_points=tuple(phi_seed_points),
            psi_seed_points=tuple(psi_seed_points),
            phi_seed_values=tuple(phi_seed_values) if phi_seed_values is not None else None,
            psi_seed_values=tuple(psi_seed_values) if psi_seed_values is not None else None,
            log_decimation=log_decimation,
        )
    except GradflowError as exc:
        raise ConfigError([f"simulation: {exc}"]) from exc

    canonical = _canonical_dict(
        plant,
        lyap_q,
        phi_quad,
        reference,
        psi_quad,
        phi_tail,
        psi_tail,
        sim,
        s,
        dist_block,
        out_dir,
        log_decimation,
        restart_policy,
        figures,
    )
    return ExperimentConfig(
        plant=plant,
        lyapunov_q=lyap_q,
        cost=cost,
        sim=sim,
        disturbance=disturbance,
        s=s,
        out_dir=str(out_dir),
        restart_policy=restart_policy,
        figures=figures,
        canonical=canonical,
    )


def default_gain(plant: PlantModel, lyap_q: np.ndarray, cost: CompositeCost, s: float) -> float:
    """Default controller gain: 95 percent of the admissible-gain bound."""
    from .costs import smoothness_constants

    lyap = lyapunov_certificate(plant, lyap_q)
    smooth = smoothness_constants(cost)
    pab = float(np.linalg.norm(lyap.p @ plant.maps.a_inv @ plant.b, 2))
    bound = gain_bound(
        s,
        float(np.linalg.eigvalsh(lyap.q).min()),
        pab,
        smooth.ell_y,
        float(np.linalg.norm(plant.maps.g, 2)),
        float(np.linalg.norm(plant.c, 2)),
    )
    return 0.95 * bound


def _listify(arr) -> list:
    return np.asarray(arr, dtype=float).tolist()


def _learning_dict(sim) -> dict:
    out = {
        "estimator": sim.estimator,
        "lam": float(sim.lam),
        "rls_cov_scale": float(sim.rls_cov_scale),
        "learn_phi": bool(sim.learn_phi),
        "learn_psi": bool(sim.learn_psi),
        "phi_seed_points": [_listify(pt) for pt in sim.phi_seed_points],
        "psi_seed_points": [_listify(pt) for pt in sim.psi_seed_points],
        "noise_std_phi": float(sim.noise_std_phi),
        "noise_std_psi": float(sim.noise_std_psi),
    }
    if sim.phi_seed_values is not None:
        out["phi_seed_values"] = [float(v) for v in sim.phi_seed_values]
    if sim.psi_seed_values is not None:
        out["psi_seed_values"] = [float(v) for v in sim.psi_seed_values]
    return out


def _canonical_dict(
    plant,
    lyap_q,
    phi_quad,
    reference,
    psi_quad,
    phi_tail,
    psi_tail,
    sim,
    s,
    dist_block,
    out_dir,
    log_decimation,
    restart_policy,
    figures,
) -> dict:
    def _quad_dict(parts):
        if parts is None:
            return None
        mat, lin, off = parts
        return {"matrix": _listify(mat), "linear": _listify(lin), "offset": float(off)}

    cost_dict = {"quadratic": _quad_dict(phi_quad)}
    if reference is not None:
        cost_dict["reference"] = _listify(reference)
    if psi_quad is not None:
        cost_dict["psi_quadratic"] = _quad_dict(psi_quad)
    if phi_tail is not None:
        cost_dict["phi_tail"] = _quad_dict(phi_tail)
    if psi_tail is not None:
        cost_dict["psi_tail"] = _quad_dict(psi_tail)
    dist_dict = dict(dist_block) if isinstance(dist_block, dict) else {}
    dist_dict.setdefault("kind", "constant")
    for key in ("offset", "amplitude", "times"):
        if key in dist_dict:
            dist_dict[key] = _listify(dist_dict[key])
    if "values" in dist_dict:
        dist_dict["values"] = _listify(dist_dict["values"])
    for key in ("omega", "phase"):
        if key in dist_dict:
            dist_dict[key] = float(dist_dict[key])
    return {
        "plant": {
            "a": _listify(plant.a),
            "b": _listify(plant.b),
            "c": _listify(plant.c),
            "d": _listify(plant.d),
            "e": _listify(plant.e),
            "lyapunov_q": _listify(lyap_q),
        },
        "cost": cost_dict,
        "learning": _learning_dict(sim),
        "simulation": {
            "eta": float(sim.eta),
            "s": float(s),
            "step": float(sim.step),
            "horizon": float(sim.horizon),
            "phi_rate": float(sim.phi_rate),
            "psi_rate": float(sim.psi_rate),
            "seed": int(sim.seed),
            "x0": _listify(sim.x0),
            "u0": _listify(sim.u0),
            "disturbance": dist_dict,
        },
        "output": {
            "dir": str(out_dir),
            "log_decimation": int(log_decimation),
            "restart_policy": restart_policy,
            "figures": bool(figures),
        },
    }


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except FileNotFoundError as exc:
        raise ConfigError([f"file not found: {path}"]) from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1} column {mark.column + 1}" if mark else ""
        raise ConfigError([f"parse error{where}: {exc}"]) from exc
    if data is None:
        raise ConfigError(["file is empty"])
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical YAML text of a validated configuration (presets expanded)."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def _benchmark_dict(**simulation_overrides) -> dict:
    return {
        "preset": PRESET_NAME,
        "learning": {
            "estimator": "ls",
            "learn_phi": True,
            "phi_seed_points": [pt[:] for pt in _BENCH_SEED_POINTS],
        },
        "simulation": {
            "s": 0.5,
            "step": 1e-3,
            "seed": 20250810,
            "phi_rate": 0.5,
            **simulation_overrides,
        },
        "output": {"restart_policy": "per-arrival", "log_decimation": 10},
    }


def fig2a_config() -> ExperimentConfig:
    """Benchmark run with a constant disturbance: least-squares learning from
    four recorded points, Poisson evaluation arrivals, noiseless."""
    data = _benchmark_dict(
        horizon=40.0,
        phi_rate=0.8,
        disturbance={"kind": "constant", "offset": _BENCH_W[:]},
    )
    return config_from_dict(data)


def fig2b_config() -> ExperimentConfig:
    """Benchmark run with a sinusoidal disturbance over an 80 s horizon."""
    data = _benchmark_dict(
        horizon=80.0,
        disturbance={
            "kind": "sinusoidal",
            "offset": _BENCH_W[:],
            "amplitude": [0.1, 0.1, 0.1, 0.1],
            "omega": 0.2,
            "phase": 0.0,
        },
    )
    return config_from_dict(data)


def exact_parameter_config(horizon: float = 40.0) -> ExperimentConfig:
    """Benchmark run with learning disabled (exact coefficients); the
    regulation-sanity companion of the learning presets."""
    data = _benchmark_dict(
        horizon=horizon, disturbance={"kind": "constant", "offset": _BENCH_W[:]}
    )
    data["learning"] = {"learn_phi": False, "learn_psi": False}
    return config_from_dict(data)
