"""
Body generators, experiment configuration and report emission.

Body specs and experiment configs are UTF-8 JSON objects::

    {"id": "cube4", "kind": "cube", "dimension": 4, "scale": 1.0}
    {"id": "r", "kind": "random-polytope", "dimension": 4, "count": 40, "seed": 7}
    {"id": "e", "kind": "ellipsoid", "dimension": 2, "shape": [[1, 0], [0, 4]]}
    {"id": "p", "kind": "v-polytope", "dimension": 2, "vertices": [[0, 0], ...]}
    {"id": "l3", "kind": "lp-ball", "dimension": 4, "p": 3}

    {"bodies": [...], "dimensions": [2, 4, 6], "samples": 1000000,
     "seed": 0, "tolerances": {"check": 1e-9}, "output": "report.csv",
     "dump_stages": ["K3"]}

An lp-ball with 1 < p < inf is the V-polytope on ``count`` grid directions
(default ``grid_size(d, LP_BALL_EPS)``) scaled onto the unit p-sphere; p may
be given as the string "inf".  Matrices are row-major nested lists.  A body without ``dimension`` is
expanded over the config's ``dimensions``.  A random polytope without a
``seed`` gets ``derive_seed(master_seed, body_index, 0)``.

Reports are CSV (RFC 4180, LF line endings, 17 significant digits), one
row per body in config order, written atomically.
"""

from concurrent.futures import ThreadPoolExecutor
import csv
import io
import itertools
import json
import math
import os
from dataclasses import dataclass, field
import tempfile

import numpy as np

from .bodies import (Ellipsoid, HPolytope, VPolytope, is_i_invariant,
                     sphere_directions, grid_size)
from .exceptions import DomainError, SymcapError
from .pipeline import rogers_shephard_ratio, tmt_upper_bound, viterbo_ratio
from .positions import m_proxy
from .volume import DEFAULT_SAMPLES, volume

SCHEMA_VERSION = 1
# lp-balls are cut from a coarser grid than the ellipsoid default: their
# pairwise Minkowski sums in the pipeline grow with the square of the count
LP_BALL_EPS = 0.2
KINDS = ("ball", "lp-ball", "cube", "cross-polytope", "simplex", "ellipsoid",
         "v-polytope", "random-polytope")
STAGES = ("K", "K1", "K2", "K3")
COLUMNS = (
    "schema_version", "body_id", "kind", "dimension", "seed",
    "volume", "volume_method", "volume_stderr", "volume_term",
    "lower", "upper", "r", "r_approximate", "gamma", "rs_ratio", "a2",
    "m_source", "m_quality_sum", "m_quality_intersection",
    "checks_passed", "error",
)


class ConfigError(SymcapError, ValueError):
    """Invalid body spec or experiment config."""


def derive_seed(master, *counters):
    """64-bit seed for stream ``counters`` under ``master``."""
    ss = np.random.SeedSequence([int(master), *map(int, counters)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class BodySpec:
    id: str
    kind: str
    dimension: int | None = None
    scale: float = 1.0
    p: float | None = None
    shape: list | None = None
    vertices: list | None = None
    count: int | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown body spec fields: {sorted(unknown)}")
        try:
            spec = cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        spec.validate(require_dimension=False)
        return spec

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def validate(self, require_dimension=True, even=False):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown body kind {self.kind!r}")
        if self.dimension is None:
            if self.kind == "v-polytope" and self.vertices:
                self.dimension = len(self.vertices[0])
            elif self.kind == "ellipsoid" and self.shape:
                self.dimension = len(self.shape)
            elif require_dimension:
                raise ConfigError(f"body {self.id!r} has no dimension")
        if self.dimension is not None:
            if int(self.dimension) < 1:
                raise ConfigError(f"body {self.id!r}: dimension must be positive")
            if even and int(self.dimension) % 2:
                raise ConfigError(
                    f"body {self.id!r}: capacity experiments need an even "
                    f"dimension, got {self.dimension}")
        if isinstance(self.p, str):
            try:
                self.p = float(self.p)
            except ValueError:
                raise ConfigError(f"body {self.id!r}: bad p {self.p!r}") from None
        if not self.scale > 0:
            raise ConfigError(f"body {self.id!r}: scale must be positive")
        if self.kind == "lp-ball" and (self.p is None or self.p < 1):
            raise ConfigError(f"body {self.id!r}: lp-ball needs p >= 1")
        if self.kind == "random-polytope" and self.count is None:
            raise ConfigError(f"body {self.id!r}: random-polytope needs count")
        if self.kind == "ellipsoid" and self.shape is None:
            raise ConfigError(f"body {self.id!r}: ellipsoid needs shape")
        if self.kind == "v-polytope" and self.vertices is None:
            raise ConfigError(f"body {self.id!r}: v-polytope needs vertices")


def generate_body(spec):
    """Deterministic body for a spec."""
    if isinstance(spec, dict):
        spec = BodySpec.from_dict(spec)
    spec.validate()
    d, s = int(spec.dimension), float(spec.scale)
    kind = spec.kind
    if kind == "ball":
        return Ellipsoid.ball(d, s)
    if kind == "ellipsoid":
        A = np.asarray(spec.shape, dtype=float)
        if A.shape != (d, d):
            raise ConfigError(f"body {spec.id!r}: shape must be {d}x{d}")
        return Ellipsoid(np.zeros(d), A / s**2)
    if kind == "cube" or (kind == "lp-ball" and math.isinf(spec.p)):
        return VPolytope(s * np.array(list(itertools.product([-1.0, 1.0], repeat=d))))
    if kind == "cross-polytope" or (kind == "lp-ball" and spec.p == 1):
        return VPolytope(s * np.vstack([np.eye(d), -np.eye(d)]))
    if kind == "simplex":
        return VPolytope(s * np.vstack([np.zeros(d), np.eye(d)]))
    if kind == "lp-ball":
        if spec.p == 2:
            return Ellipsoid.ball(d, s)
        m = spec.count if spec.count is not None else grid_size(d, LP_BALL_EPS)
        G = sphere_directions(d, (int(m) + 1) // 2, seed=0)
        U = np.vstack([np.eye(d), -np.eye(d), G, -G])
        U = U / np.linalg.norm(U, ord=spec.p, axis=1, keepdims=True)
        return VPolytope(s * U).reduced()
    if kind == "v-polytope":
        V = np.asarray(spec.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != d:
            raise ConfigError(f"body {spec.id!r}: vertices must be points in R^{d}")
        return VPolytope(s * V).reduced()
    if kind == "random-polytope":
        if spec.seed is None:
            raise ConfigError(f"body {spec.id!r}: random-polytope needs a seed")
        rng = np.random.Generator(np.random.Philox(key=int(spec.seed)))
        pts = rng.standard_normal((int(spec.count), d))
        return VPolytope(s * pts).reduced()
    raise ConfigError(f"unknown body kind {kind!r}")


def body_to_spec(K, body_id):
    """Body-spec dict describing K exactly (v-polytope or ellipsoid)."""
    if isinstance(K, HPolytope):
        K = K.to_vpolytope()
    if isinstance(K, Ellipsoid):
        if np.any(K.center):
            raise DomainError("only centred ellipsoids have a body-spec form")
        return {"id": body_id, "kind": "ellipsoid", "dimension": K.dim,
                "shape": K.shape.tolist()}
    return {"id": body_id, "kind": "v-polytope", "dimension": K.dim,
            "vertices": K.vertices.tolist()}


@dataclass
class ExperimentConfig:
    bodies: list
    dimensions: list = field(default_factory=list)
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    dump_stages: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "bodies" not in d or not d["bodies"]:
            raise ConfigError("config lists no bodies")
        cfg = cls(**d)
        cfg.bodies = [b if isinstance(b, BodySpec) else BodySpec.from_dict(b)
                      for b in cfg.bodies]
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None

    def validate(self):
        for d in self.dimensions:
            if int(d) < 2 or int(d) % 2:
                raise ConfigError(f"config dimension {d} is not even")
        bad = set(self.dump_stages) - set(STAGES)
        if bad:
            raise ConfigError(f"unknown stages {sorted(bad)}; choose from {STAGES}")
        if int(self.samples) < 10_000:
            raise ConfigError("samples must be at least 10000")
        for spec in self.expanded():
            spec.validate(even=True)

    def expanded(self):
        """Concrete specs, one per (body, dimension), with seeds filled in."""
        out = []
        for i, spec in enumerate(self.bodies):
            dims = [spec.dimension] if spec.dimension is not None else self.dimensions
            if not dims:
                raise ConfigError(f"body {spec.id!r} has no dimension")
            for d in dims:
                s = BodySpec(**spec.__dict__)
                if spec.dimension is None:
                    s.dimension = int(d)
                    s.id = f"{spec.id}-d{d}"
                if s.kind == "random-polytope" and s.seed is None:
                    s.seed = derive_seed(self.seed, i, 0)
                out.append(s)
        return out


@dataclass
class ExperimentReport:
    rows: list
    passed: bool

    def to_csv(self):
        return rows_to_csv(self.rows)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in COLUMNS])
    return buf.getvalue()


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def body_row(spec, samples, seed, check_tol=1e-9):
    """Run every measurement on one body; errors land in the row."""
    row = {"schema_version": SCHEMA_VERSION, "body_id": spec.id,
           "kind": spec.kind, "dimension": int(spec.dimension),
           "seed": int(seed), "error": "", "checks_passed": False}
    stages = {}
    try:
        K = generate_body(spec)
        stages["K"] = K
        vol = volume(K, samples, seed)
        bound = tmt_upper_bound(K, samples=samples, seed=seed)
        tr = bound.trace
        stages.update(K1=tr.K1, K2=tr.K2, K3=tr.K3)
        rep = viterbo_ratio(K, spec.id, bound, samples, seed)
        rs = rogers_shephard_ratio(K, samples, seed)
        proxy = m_proxy(tr.K1, samples=min(samples, 200_000), seed=seed)
        row.update(
            volume=vol.value, volume_method=vol.method, volume_stderr=vol.stderr,
            volume_term=rep.volume_term, lower=bound.lower, upper=bound.upper,
            r=tr.r, r_approximate=tr.r_approximate, gamma=rep.gamma,
            rs_ratio=rs, a2=tr.a2, m_source=proxy.source,
            m_quality_sum=proxy.quality_sum,
            m_quality_intersection=proxy.quality_intersection)
        d = K.dim
        checks = [
            bound.lower <= bound.upper + check_tol,
            abs(rep.gamma - bound.upper / math.pi / rep.volume_term)
            <= check_tol * max(1.0, rep.gamma),
            rs <= 4.0**d * (1 + check_tol),
            all(t >= 1 - check_tol for t in tr.theta_ratios),
            is_i_invariant(tr.K3),
        ]
        row["checks_passed"] = all(checks)
    except SymcapError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row, stages


def run_experiment(config, workers=1, write=True, check_tol=None):
    """Run every body of the config and emit the CSV report.

    Returns an ``ExperimentReport``; ``passed`` is true iff every row ran
    without error and passed its invariant checks.
    """
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    specs = config.expanded()
    tol = check_tol if check_tol is not None else config.tolerances.get("check", 1e-9)

    def job(item):
        k, spec = item
        return body_row(spec, int(config.samples), derive_seed(config.seed, k, 1), tol)

    items = list(enumerate(specs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, items))
    else:
        results = [job(it) for it in items]
    rows = [r for r, _ in results]
    report = ExperimentReport(rows, all(r["checks_passed"] and not r["error"]
                                        for r in rows))
    if write and config.output:
        write_atomic(config.output, report.to_csv())
        if config.dump_stages:
            base = os.path.splitext(config.output)[0]
            for (row, stages) in results:
                for st in config.dump_stages:
                    if st in stages:
                        write_atomic(f"{base}.{row['body_id']}.{st}.json", json.dumps(
                            body_to_spec(stages[st], f"{row['body_id']}.{st}")) + "\n")
    return report


def gamma_svg(rows, width=480, height=320):
    """Scatter plot of gamma against dimension as a standalone SVG string."""
    pts = [(r["dimension"], r["gamma"]) for r in rows
           if isinstance(r.get("gamma"), float) and math.isfinite(r["gamma"])]
    pad = 40
    dims = sorted({p[0] for p in pts}) or [2]
    gmax = max([p[1] for p in pts] + [1.0]) * 1.1
    x0, x1 = min(dims) - 1, max(dims) + 1

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - y / gmax * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
           f'y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" '
           f'font-size="12">dimension 2n</text>',
           f'<text x="12" y="{height / 2:.1f}" font-size="12" '
           f'transform="rotate(-90 12 {height / 2:.1f})" text-anchor="middle">gamma</text>']
    for d in dims:
        out.append(f'<text x="{sx(d):.1f}" y="{height - pad + 14}" '
                   f'text-anchor="middle" font-size="10">{d}</text>')
    for d, g in pts:
        out.append(f'<circle cx="{sx(d):.2f}" cy="{sy(g):.2f}" r="3" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
