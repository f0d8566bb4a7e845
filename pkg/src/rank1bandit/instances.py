"""Problem instances, hardness metrics, and the simulation environment.

An instance is a pair of mean vectors (u_bar, v_bar) with entries in
[0, 1].  Pulling the pair (i, j) returns the product of two independent
Bernoulli draws, one per factor, so the expected-reward matrix is the
rank-one outer product u_bar v_bar^T.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Rank1Instance:
    """Mean vectors of a rank-one Bernoulli reward model."""

    u_bar: np.ndarray
    v_bar: np.ndarray

    def __post_init__(self):
        try:
            self.u_bar = np.asarray(self.u_bar, dtype=np.float64)
            self.v_bar = np.asarray(self.v_bar, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"mean vectors must be numeric: {exc}") from exc
        for name, arr in (("u_bar", self.u_bar), ("v_bar", self.v_bar)):
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"{name} must be a nonempty 1-d array")
            if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError(f"{name} entries must lie in [0, 1]")

    @property
    def K(self) -> int:
        return self.u_bar.size

    @property
    def L(self) -> int:
        return self.v_bar.size


@dataclass
class StepOutcome:
    reward: int
    pseudo_regret: float
    stochastic_regret: float


@dataclass
class HardnessMetrics:
    """Gap structure and scale parameters of an instance.

    mu is the smaller of the two mean-vector averages, p_max the largest
    single entry, and gamma = max(mu, 1 - p_max).  Minimum gaps are taken
    over strictly positive gaps only and are +inf when every row (column)
    shares the best mean.
    """

    best_row: int
    best_col: int
    best_value: float
    row_gaps: np.ndarray = field(repr=False)
    col_gaps: np.ndarray = field(repr=False)
    min_row_gap: float
    min_col_gap: float
    mu: float
    p_max: float
    gamma: float


def needle_instance(
    K: int, L: int, p_u: float, p_v: float, delta_u: float, delta_v: float
) -> Rank1Instance:
    """One bumped row and column: u_bar = (p_u+delta_u, p_u, ..., p_u)."""
    for name, dim in (("K", K), ("L", L)):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"{name} must be a positive integer, got {dim!r}")
    for name, p, d in (("u", p_u, delta_u), ("v", p_v, delta_v)):
        if d <= 0.0:
            raise ValueError(f"delta_{name} must be positive, got {d!r}")
        if p < 0.0 or p + d > 1.0:
            raise ValueError(f"need 0 <= p_{name} and p_{name} + delta_{name} <= 1")
    u = np.full(int(K), p_u, dtype=np.float64)
    u[0] = p_u + delta_u
    v = np.full(int(L), p_v, dtype=np.float64)
    v[0] = p_v + delta_v
    return Rank1Instance(u_bar=u, v_bar=v)


def pbm_like_instance(
    K: int, L: int, head_mass: float, decay: float, seed: int | None = None
) -> Rank1Instance:
    """Geometric-decay means head_mass * decay^(i-1), clipped to [0, 1].

    Both vectors use the same scheme, giving a click-model-like profile
    with a few strong entries and a long weak tail.  The result is fully
    determined by the shape arguments; ``seed`` is accepted only so
    generator specs can carry one uniformly.
    """
    for name, dim in (("K", K), ("L", L)):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"{name} must be a positive integer, got {dim!r}")
    if head_mass < 0.0:
        raise ValueError(f"head_mass must be >= 0, got {head_mass!r}")
    if not 0.0 <= decay <= 1.0:
        raise ValueError(f"decay must lie in [0, 1], got {decay!r}")
    u = np.clip(head_mass * decay ** np.arange(int(K), dtype=np.float64), 0.0, 1.0)
    v = np.clip(head_mass * decay ** np.arange(int(L), dtype=np.float64), 0.0, 1.0)
    return Rank1Instance(u_bar=u, v_bar=v)


def compute_metrics(inst: Rank1Instance) -> HardnessMetrics:
    """Hardness summary of an instance; pure, ties break to lowest index."""
    u, v = inst.u_bar, inst.v_bar
    best_row = int(np.argmax(u))
    best_col = int(np.argmax(v))
    row_gaps = u[best_row] - u
    col_gaps = v[best_col] - v
    pos_r = row_gaps[row_gaps > 0.0]
    pos_c = col_gaps[col_gaps > 0.0]
    mu = float(min(u.mean(), v.mean()))
    p_max = float(max(u[best_row], v[best_col]))
    return HardnessMetrics(
        best_row=best_row,
        best_col=best_col,
        best_value=float(u[best_row] * v[best_col]),
        row_gaps=row_gaps,
        col_gaps=col_gaps,
        min_row_gap=float(pos_r.min()) if pos_r.size else math.inf,
        min_col_gap=float(pos_c.min()) if pos_c.size else math.inf,
        mu=mu,
        p_max=p_max,
        gamma=float(max(mu, 1.0 - p_max)),
    )


def env_step(inst: Rank1Instance, i: int, j: int, rng: np.random.Generator) -> StepOutcome:
    """Play pair (i, j) for one step and report reward and regrets.

    Consumes exactly K + L uniform draws from ``rng`` in a fixed order
    (row coordinates first, then column coordinates), realizing the full
    Bernoulli vectors u_t and v_t.  The stochastic regret compares the
    played pair against the best pair on the same draws; the pseudo
    regret compares expected values.
    """
    K, L = inst.K, inst.L
    if not 0 <= i < K:
        raise IndexError(f"row index {i} outside [0, {K})")
    if not 0 <= j < L:
        raise IndexError(f"column index {j} outside [0, {L})")
    z = rng.random(K + L)
    u_t = z[:K] < inst.u_bar
    v_t = z[K:] < inst.v_bar
    best_row = int(np.argmax(inst.u_bar))
    best_col = int(np.argmax(inst.v_bar))
    reward = int(u_t[i] and v_t[j])
    best_reward = int(u_t[best_row] and v_t[best_col])
    pseudo = float(inst.u_bar[best_row] * inst.v_bar[best_col] - inst.u_bar[i] * inst.v_bar[j])
    return StepOutcome(
        reward=reward,
        pseudo_regret=pseudo,
        stochastic_regret=float(best_reward - reward),
    )


class Environment:
    """Stateful wrapper around ``env_step`` for long simulation loops.

    Pre-draws uniforms in blocks (the batched stream is identical to the
    per-step stream) and evaluates only the coordinates a step actually
    touches, which keeps the per-step cost flat while preserving the
    exact K + L draws-per-step accounting.  Accumulates both regret
    notions so the run loop can read them at checkpoints.
    """

    def __init__(self, inst: Rank1Instance, rng: np.random.Generator):
        self.inst = inst
        self._rng = rng
        self._u = inst.u_bar.tolist()
        self._v = inst.v_bar.tolist()
        self._K = inst.K
        self._span = inst.K + inst.L
        self._best_row = int(np.argmax(inst.u_bar))
        self._best_col = int(np.argmax(inst.v_bar))
        best_value = float(inst.u_bar[self._best_row] * inst.v_bar[self._best_col])
        self._gap = (best_value - np.outer(inst.u_bar, inst.v_bar)).tolist()
        self._block_steps = max(1, 32768 // self._span)
        self._buf: list[float] = []
        self._pos = 0
        self.steps = 0
        self.cum_pseudo_regret = 0.0
        self.cum_stochastic_regret = 0.0

    def step(self, i: int, j: int) -> int:
        K = self._K
        if i < 0 or i >= K:
            raise IndexError(f"row index {i} outside [0, {K})")
        if j < 0 or j >= self._span - K:
            raise IndexError(f"column index {j} outside [0, {self._span - K})")
        pos = self._pos
        buf = self._buf
        if pos >= len(buf):
            buf = self._buf = self._rng.random(self._block_steps * self._span).tolist()
            pos = 0
        u_i = buf[pos + i] < self._u[i]
        v_j = buf[pos + K + j] < self._v[j]
        reward = 1 if (u_i and v_j) else 0
        br, bc = self._best_row, self._best_col
        if (buf[pos + br] < self._u[br]) and (buf[pos + K + bc] < self._v[bc]):
            self.cum_stochastic_regret += 1 - reward
        else:
            self.cum_stochastic_regret -= reward
        self.cum_pseudo_regret += self._gap[i][j]
        self._pos = pos + self._span
        self.steps += 1
        return reward


def save_instance(inst: Rank1Instance, path) -> None:
    """Write an instance as a JSON object {"u": [...], "v": [...]}."""
    payload = {"u": [float(x) for x in inst.u_bar], "v": [float(x) for x in inst.v_bar]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_instance(path) -> Rank1Instance:
    """Read an instance written by ``save_instance``.

    Distinguishes the failure modes: a missing file raises
    FileNotFoundError, malformed JSON raises ValueError mentioning JSON,
    and structural problems (missing keys, empty arrays, out-of-range
    entries) raise ValueError describing the field.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: expected a JSON object with arrays \"u\" and \"v\"")
    for key in ("u", "v"):
        if key not in obj:
            raise ValueError(f'{path}: missing "{key}" array')
        if not isinstance(obj[key], list) or len(obj[key]) == 0:
            raise ValueError(f'{path}: "{key}" must be a nonempty array')
    return Rank1Instance(u_bar=obj["u"], v_bar=obj["v"])


_NEEDLE_KEYS = {"K", "L", "p", "gap", "p_u", "p_v", "delta_u", "delta_v"}
_PBM_KEYS = {"K", "L", "head_mass", "decay", "seed"}


def _parse_kv(body: str, allowed: set[str], kind: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for part in body.split(","):
        if "=" not in part:
            raise ValueError(f"bad {kind} spec field {part!r}, expected key=value")
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in allowed:
            raise ValueError(f"unknown {kind} spec key {key!r} (allowed: {sorted(allowed)})")
        out[key] = value.strip()
    return out


def _need_int(kv: dict[str, str], key: str, kind: str) -> int:
    if key not in kv:
        raise ValueError(f"{kind} spec requires {key}=<int>")
    try:
        return int(kv[key])
    except ValueError as exc:
        raise ValueError(f"{kind} spec: {key} must be an integer, got {kv[key]!r}") from exc


def _need_float(kv: dict[str, str], key: str, kind: str) -> float:
    if key not in kv:
        raise ValueError(f"{kind} spec requires {key}=<number>")
    try:
        return float(kv[key])
    except ValueError as exc:
        raise ValueError(f"{kind} spec: {key} must be a number, got {kv[key]!r}") from exc


def parse_instance_spec(spec: str) -> Rank1Instance:
    """Build an instance from an inline generator spec or a file path.

    Formats: ``needle:K=8,L=8,p=0.25,gap=0.5`` (p/gap may be split into
    p_u/p_v and delta_u/delta_v), ``pbm-like:K=16,L=16,head_mass=0.85,
    decay=0.6``, or anything else is treated as a path to an instance
    file.
    """
    if spec.startswith("needle:"):
        kv = _parse_kv(spec[len("needle:"):], _NEEDLE_KEYS, "needle")
        if "p" in kv:
            kv.setdefault("p_u", kv["p"])
            kv.setdefault("p_v", kv["p"])
        if "gap" in kv:
            kv.setdefault("delta_u", kv["gap"])
            kv.setdefault("delta_v", kv["gap"])
        return needle_instance(
            _need_int(kv, "K", "needle"),
            _need_int(kv, "L", "needle"),
            _need_float(kv, "p_u", "needle"),
            _need_float(kv, "p_v", "needle"),
            _need_float(kv, "delta_u", "needle"),
            _need_float(kv, "delta_v", "needle"),
        )
    if spec.startswith("pbm-like:"):
        kv = _parse_kv(spec[len("pbm-like:"):], _PBM_KEYS, "pbm-like")
        seed = _need_int(kv, "seed", "pbm-like") if "seed" in kv else None
        return pbm_like_instance(
            _need_int(kv, "K", "pbm-like"),
            _need_int(kv, "L", "pbm-like"),
            _need_float(kv, "head_mass", "pbm-like"),
            _need_float(kv, "decay", "pbm-like"),
            seed=seed,
        )
    return load_instance(spec)
