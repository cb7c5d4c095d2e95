"""Experiment configuration, families, exponent fits and output writing."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .algebra import NilpotentAlgebra, load_algebra
from .chains import PLChain, group_translate
from .distortion import LatticeSpec, distortion_fit, least_squares_slope
from .families import (
    commutator_loop,
    cross_polytope_boundary,
    linear_map_chain,
    cayley_rotation,
    random_point,
)
from .filling import fill_cycle
from .grid import GridSpec
from .metrics import cone_exponent
from .quadrature import QuadratureSpec

SCHEMA_VERSION = 1
FAMILIES = ("dehn_loops", "cycles_d", "distortion")


@dataclass
class ExperimentConfig:
    algebra: str
    family: str = "dehn_loops"
    scales: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    seed: int = 0
    d: int = 1
    radius: int = 12
    deform: bool = False
    quadrature: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    tolerance: float = 1e-3
    slope_window: list | None = None
    out_dir: str = "out"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly increasing")
        if self.family != "distortion" and len(self.scales) < 2:
            raise ValueError("need at least two scales for an exponent fit")

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def quad_spec(self) -> QuadratureSpec:
        return QuadratureSpec.from_dict(self.quadrature)

    def grid_spec(self) -> GridSpec:
        return GridSpec(**self.grid)


@dataclass
class ExponentFit:
    points: list
    slope: float
    intercept: float
    residual: float
    n_cone: int
    optimal: int | None
    label: str = "observed on family"

    def to_dict(self):
        return asdict(self)


def fit_exponent(xs, ys, n_cone=0, optimal=None, upper_half=True) -> ExponentFit:
    """Least-squares slope of log y against log x, by default on the upper half of the points."""
    pts = sorted(zip(xs, ys))
    if upper_half and len(pts) >= 4:
        pts = pts[len(pts) // 2 :]
    lx = [math.log(x) for x, _ in pts]
    ly = [math.log(y) for _, y in pts]
    slope, intercept, resid = least_squares_slope(lx, ly)
    return ExponentFit(points=[[a, b] for a, b in zip(lx, ly)], slope=slope, intercept=intercept,
                       residual=resid, n_cone=n_cone, optimal=optimal)


# -- families ----------------------------------------------------------------------


def _isometry_and_translator(rng, a: NilpotentAlgebra):
    Q = cayley_rotation(rng, a.n)
    g = random_point(rng, a.n, -2, 2, 4)
    return Q, g


def generate_family(config: ExperimentConfig, a: NilpotentAlgebra | None = None) -> list:
    """[(scale, cycle, info)] deterministic in the seed."""
    a = a or load_algebra(config.algebra)
    out = []
    if config.family == "dehn_loops":
        for lam in config.scales:
            loop, length, closure = commutator_loop(a, int(lam))
            out.append((lam, loop, {"word_length": length, "closure": closure}))
    elif config.family == "cycles_d":
        rng = random.Random(config.seed)
        Q, g = _isometry_and_translator(rng, a)
        for lam in config.scales:
            c = cross_polytope_boundary(a.n, config.d + 1, lam)
            c = linear_map_chain(c, Q)
            c = group_translate(a, g, c, config.tolerance, config.quad_spec())
            out.append((lam, c, {"word_length": None, "closure": "cross_polytope"}))
    else:
        raise ValueError("distortion family has no cycles")
    return out


def _fill_row(args):
    a, lam, cycle, info, config = args
    C, P, rep = fill_cycle(a, cycle, deform=config.deform, grid=config.grid_spec(),
                           quad=config.quad_spec(), tol=config.tolerance)
    comp = rep.components[0]
    row = {
        "scale": lam,
        "closure": info["closure"],
        "word_length": info["word_length"],
        "simplices": len(cycle),
        "input_mass": rep.input_mass,
        "input_mass_euclidean": rep.input_mass_euclidean,
        "fill_mass": rep.fill_mass,
        "fill_mass_euclidean": rep.fill_mass_euclidean,
        "rho": comp.rho,
        "R_top": comp.R_top,
        "R_d": comp.R_d,
        "bound_sandwich": comp.bound_sandwich,
        "bound_shape": comp.bound_shape,
        "K_measured": rep.K_measured,
        "boundary_level": rep.boundary_level,
        "certificate_ok": rep.passed,
    }
    if rep.deformation:
        row["grid_cells"] = rep.deformation["cell_count"]
        row["grid_mass_ratio"] = rep.deformation["mass_ratio"]
    return row


def default_window(config: ExperimentConfig, a: NilpotentAlgebra):
    if config.slope_window is not None:
        return list(config.slope_window)
    if config.family == "dehn_loops":
        if a.s == 1:
            return [1.8, 2.2]
        if a.name == "heisenberg(3)":
            return [2.5, 4.5]
    if config.family == "cycles_d" and a.s == 1:
        target = 1 + 1 / config.d
        return [target - 0.2, target + 0.2]
    return None


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> dict:
    """Run the family and return {"rows", "fit", "checks", ...}; see write_outputs."""
    a = load_algebra(config.algebra)
    if config.family == "distortion":
        fit = distortion_fit(LatticeSpec(a), config.radius)
        rows = [{"r": r, "ball_size": c} for r, c in enumerate(fit.counts)]
        checks = dict(fit.checks)
        checks["growth_slope_near_hom_dim"] = abs(fit.growth_slope - fit.homogeneous_dimension) <= 0.5
        if fit.central_exponent is not None:
            checks["central_exponent_window"] = abs(fit.central_exponent - 1 / a.s) <= 0.1
        return {"config": asdict(config), "algebra": a.name, "rows": rows,
                "fit": fit.to_dict(), "checks": checks, "passed": all(checks.values())}
    fam = generate_family(config, a)
    tasks = [(a, lam, c, info, config) for lam, c, info in fam]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_fill_row, tasks))
    else:
        rows = [_fill_row(t) for t in tasks]
    n_cone = cone_exponent(a)
    optimal = a.s + 1 if config.family == "dehn_loops" else None
    fit = fit_exponent([r["input_mass"] for r in rows], [r["fill_mass"] for r in rows], n_cone, optimal)
    checks = {
        "certificates": all(r["certificate_ok"] for r in rows),
        "slope_finite": math.isfinite(fit.slope),
        "slope_le_n_cone": fit.slope <= n_cone if a.s > 1 else True,
    }
    window = default_window(config, a)
    if window:
        checks["slope_window"] = window[0] <= fit.slope <= window[1]
    return {"config": asdict(config), "algebra": a.name, "rows": rows, "fit": fit.to_dict(),
            "slope_window": window, "checks": checks, "passed": all(checks.values())}


# -- outputs --------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def results_csv(result: dict) -> str:
    rows = result["rows"]
    cols = ["schema_version"] + list(rows[0].keys()) if rows else ["schema_version"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([SCHEMA_VERSION] + [_fmt(r.get(c)) for c in cols[1:]])
    return buf.getvalue()


def report_json(result: dict) -> str:
    rep = {k: v for k, v in result.items() if k != "rows"}
    rep["schema_version"] = SCHEMA_VERSION
    return json.dumps(rep, sort_keys=True, indent=2) + "\n"


def plot_svg(result: dict, path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "nilfill"
    fig, ax = plt.subplots(figsize=(5, 4))
    rows = result["rows"]
    if "fill_mass" in (rows[0] if rows else {}):
        x = np.array([r["input_mass"] for r in rows])
        y = np.array([r["fill_mass"] for r in rows])
        ax.loglog(x, y, "o", label="filling mass")
        fit = result["fit"]
        xs = np.array([x.min(), x.max()])
        ax.loglog(xs, np.exp(fit["intercept"]) * xs ** fit["slope"], "-",
                  label=f"slope {fit['slope']:.2f} (observed on family)")
        ax.set_xlabel("cycle mass")
        ax.set_ylabel("filling mass")
    else:
        r = np.array([row["r"] for row in rows[1:]])
        b = np.array([row["ball_size"] for row in rows[1:]])
        ax.loglog(r, b, "o", label="|B(r)|")
        ax.set_xlabel("r")
        ax.set_ylabel("ball size")
    ax.set_title(result["algebra"])
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_outputs(result: dict, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "results.csv"), "w") as fh:
        fh.write(results_csv(result))
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(report_json(result))
    plot_svg(result, os.path.join(out_dir, "plot.svg"))
