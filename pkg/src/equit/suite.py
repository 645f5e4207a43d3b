"""Synthetic noisy functional relationships.

The 22-function test suite, the six sampling/noise models, noise-width
calibration against target R^2 values, and the two-block ``D_alpha`` family.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import r_squared_vs_function

#: Segments in the polyline used for arc-length sampling.
ARC_SEGMENTS = 100_000


@dataclass(frozen=True)
class Piece:
    """One branch of a piecewise definition, used for ``x < upper`` (or ``<=``)."""

    upper: float
    fn: Callable[[np.ndarray], np.ndarray]
    closed: bool = False


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    slug: str
    pieces: tuple[Piece, ...]
    domain: tuple[float, float]
    is_random: bool = False

    def clamp(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), *self.domain)

    def evaluate(self, x) -> np.ndarray:
        """Evaluate the function; ``x`` must lie in the domain."""
        if self.is_random:
            raise ValueError("the Random relationship has no closed form")
        xa = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any((xa < lo) | (xa > hi)) or np.any(np.isnan(xa)):
            raise ValueError(f"{self.name}: x outside domain [{lo}, {hi}]")
        out = np.empty_like(xa)
        todo = np.ones(xa.shape, dtype=bool)
        for p in self.pieces:
            sel = todo & ((xa <= p.upper) if p.closed else (xa < p.upper))
            if p is self.pieces[-1]:
                sel = todo
            out[sel] = p.fn(xa[sel])
            todo &= ~sel
        return out

    def __call__(self, x):
        return self.evaluate(x)

    def __reduce__(self):
        # pieces hold lambdas; pickle as a table lookup so specs reach worker processes
        return (_spec_by_slug, (self.slug, self.domain))


def _smooth(name, slug, fn, domain=(0.0, 1.0)) -> FunctionSpec:
    return FunctionSpec(name, slug, (Piece(math.inf, fn, True),), domain)


FUNCTIONS: tuple[FunctionSpec, ...] = (
    _smooth("Linear+Periodic, Low Freq", "lp_low",
            lambda x: np.sin(4 * (2 * x - 1)) / 5 + 1.1 * (2 * x - 1)),
    _smooth("Linear+Periodic, Medium Freq", "lp_medium",
            lambda x: np.sin(10 * np.pi * x) + x),
    _smooth("Linear+Periodic, High Freq", "lp_high",
            lambda x: np.sin(10.6 * (2 * x - 1)) / 10 + 1.1 * (2 * x - 1)),
    _smooth("Linear+Periodic, High Freq 2", "lp_high2",
            lambda x: np.sin(10.6 * (2 * x - 1)) / 5 + 1.1 * (2 * x - 1)),
    _smooth("Non-Fourier Freq [Low] Cosine", "nf_cosine", lambda x: np.cos(7 * np.pi * x)),
    _smooth("Cosine, High Freq", "cosine_high", lambda x: np.cos(14 * np.pi * x)),
    _smooth("Cubic", "cubic", lambda x: 4 * x ** 3 + x ** 2 - 4 * x, (-1.3, 1.1)),
    _smooth("Cubic, Y-stretched", "cubic_ystretched",
            lambda x: 41 * (4 * x ** 3 + x ** 2 - 4 * x), (-1.3, 1.1)),
    FunctionSpec("L-shaped", "l_shaped", (
        Piece(99 / 100, lambda x: x / 99, closed=True),
        Piece(math.inf, lambda x: np.ones_like(x)),
    ), (0.0, 1.0)),
    _smooth("Exponential [2^x]", "exp2", lambda x: 2.0 ** x, (0.0, 10.0)),
    _smooth("Exponential [10^x]", "exp10", lambda x: 10.0 ** x, (0.0, 10.0)),
    _smooth("Line", "line", lambda x: x),
    _smooth("Parabola", "parabola", lambda x: 4 * x ** 2, (-0.5, 0.5)),
    FunctionSpec("Random", "random", (), (0.0, 1.0), is_random=True),
    _smooth("Non-Fourier Freq [Low] Sine", "nf_sine", lambda x: np.sin(9 * np.pi * x)),
    _smooth("Sine, Low Freq", "sine_low", lambda x: np.sin(8 * np.pi * x)),
    _smooth("Sine, High Freq", "sine_high", lambda x: np.sin(16 * np.pi * x)),
    FunctionSpec("Sigmoid", "sigmoid", (
        Piece(49 / 100, lambda x: np.zeros_like(x), closed=True),
        Piece(51 / 100, lambda x: 50 * (x - 0.5) + 0.5, closed=True),
        Piece(math.inf, lambda x: np.ones_like(x)),
    ), (0.0, 1.0)),
    _smooth("Varying Freq [Medium] Cosine", "vf_cosine",
            lambda x: np.sin(5 * np.pi * x * (1 + x))),
    _smooth("Varying Freq [Medium] Sine", "vf_sine",
            lambda x: np.sin(6 * np.pi * x * (1 + x))),
    FunctionSpec("Spike", "spike", (
        Piece(1 / 20, lambda x: np.full_like(x, 20.0)),
        Piece(1 / 10, lambda x: -18 * x + 19 / 10),
        Piece(math.inf, lambda x: -x / 9 + 1 / 9),
    ), (0.0, 1.0)),
    FunctionSpec("Lopsided L-shaped", "lopsided_l_shaped", (
        Piece(1 / 200, lambda x: 200 * x),
        Piece(1 / 100, lambda x: -198 * x + 199 / 100),
        Piece(math.inf, lambda x: -x / 99 + 1 / 99),
    ), (0.0, 1.0)),
)

#: Functions with near-vertical or discontinuous stretches, left out of the
#: suite for noise models 2-6.
STEEP_FUNCTIONS = frozenset({
    "Exponential [10^x]", "L-shaped", "Lopsided L-shaped", "Sigmoid", "Spike",
    "Cubic, Y-stretched",
})


def _spec_by_slug(slug: str, domain: tuple[float, float]) -> FunctionSpec:
    spec = get_function(slug)
    return spec if spec.domain == domain else replace(spec, domain=domain)


def get_function(key: str) -> FunctionSpec:
    """Look up a suite function by slug or by its full name."""
    for spec in FUNCTIONS:
        if key in (spec.slug, spec.name):
            return spec
    raise KeyError(key)


class Placement(str, enum.Enum):
    ALONG_CURVE = "along_curve"
    ALONG_X_RANGE = "along_x_range"


class NoiseAxes(str, enum.Enum):
    Y_ONLY = "y_only"
    BOTH = "both"
    X_ONLY = "x_only"


@dataclass(frozen=True)
class NoiseModel:
    id: int
    placement: Placement
    noise_axes: NoiseAxes

    @classmethod
    def from_id(cls, model_id: int) -> "NoiseModel":
        try:
            return NOISE_MODELS[int(model_id)]
        except KeyError:
            raise ValueError(f"noise model must be 1..6, got {model_id}") from None

    @property
    def noisy_x(self) -> bool:
        return self.noise_axes in (NoiseAxes.X_ONLY, NoiseAxes.BOTH)

    @property
    def noisy_y(self) -> bool:
        return self.noise_axes in (NoiseAxes.Y_ONLY, NoiseAxes.BOTH)


NOISE_MODELS = {
    1: NoiseModel(1, Placement.ALONG_CURVE, NoiseAxes.Y_ONLY),
    2: NoiseModel(2, Placement.ALONG_CURVE, NoiseAxes.BOTH),
    3: NoiseModel(3, Placement.ALONG_CURVE, NoiseAxes.X_ONLY),
    4: NoiseModel(4, Placement.ALONG_X_RANGE, NoiseAxes.Y_ONLY),
    5: NoiseModel(5, Placement.ALONG_X_RANGE, NoiseAxes.BOTH),
    6: NoiseModel(6, Placement.ALONG_X_RANGE, NoiseAxes.X_ONLY),
}


def function_suite(model: NoiseModel | int,
                   exclude: Sequence[str] | None = None) -> list[FunctionSpec]:
    """The test suite used under a noise model.

    Model 1 gets all 22 functions. Models 2-6 drop the steep functions
    (``exclude`` overrides the default set) and restrict Exponential [2^x]
    to ``[0, 2]``.
    """
    model = model if isinstance(model, NoiseModel) else NoiseModel.from_id(model)
    if model.id == 1:
        return list(FUNCTIONS)
    excluded = STEEP_FUNCTIONS if exclude is None else frozenset(exclude)
    suite = []
    for spec in FUNCTIONS:
        if spec.name in excluded:
            continue
        if spec.slug == "exp2":
            spec = replace(spec, domain=(0.0, 2.0))
        suite.append(spec)
    return suite


def evaluate_function(spec: FunctionSpec, x):
    out = spec.evaluate(x)
    return float(out) if np.ndim(out) == 0 else out


@functools.lru_cache(maxsize=256)
def _xs_cached(spec: FunctionSpec, n: int, placement: Placement) -> np.ndarray:
    lo, hi = spec.domain
    if placement is Placement.ALONG_X_RANGE or spec.is_random:
        return np.linspace(lo, hi, n)
    grid = np.linspace(lo, hi, ARC_SEGMENTS + 1)
    f = spec.evaluate(grid)
    seg = np.hypot(np.diff(grid), np.diff(f))
    arc = np.concatenate(([0.0], np.cumsum(seg)))
    targets = np.linspace(0.0, arc[-1], n)
    xs = np.interp(targets, arc, grid)
    xs[0], xs[-1] = lo, hi
    return xs


def sample_xs(spec: FunctionSpec, n: int, placement: Placement | str) -> np.ndarray:
    """Deterministic x positions for ``n`` points.

    ``along_x_range`` spaces points evenly in x. ``along_curve`` spaces them
    evenly in arc length along a dense polyline of the graph; a jump in the
    function contributes its height to the length.
    """
    if n < 2:
        raise ValueError("need at least 2 points")
    xs = _xs_cached(spec, int(n), Placement(placement))
    xs.flags.writeable = False
    return xs


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def apply_noise(xs, ys, model: NoiseModel | int, width: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Add independent ``U[-width, width]`` noise to the model's noisy axes."""
    model = model if isinstance(model, NoiseModel) else NoiseModel.from_id(model)
    if width < 0:
        raise ValueError("noise width must be non-negative")
    xs = np.array(xs, dtype=float)
    ys = np.array(ys, dtype=float)
    if width == 0:
        return xs, ys
    rng = _rng(seed)
    # draw both streams regardless of model so x/y noise is aligned across models
    dx = rng.uniform(-width, width, xs.size)
    dy = rng.uniform(-width, width, ys.size)
    if model.noisy_x:
        xs = xs + dx
    if model.noisy_y:
        ys = ys + dy
    return xs, ys


def generate(spec: FunctionSpec, model: NoiseModel | int, n: int, width: float,
             seed) -> tuple[np.ndarray, np.ndarray]:
    """One noisy sample of a suite relationship."""
    model = model if isinstance(model, NoiseModel) else NoiseModel.from_id(model)
    rng = _rng(seed)
    xs = sample_xs(spec, n, model.placement)
    if spec.is_random:
        ys = rng.uniform(0.0, 1.0, n)
    else:
        ys = spec.evaluate(xs)
    return apply_noise(xs, ys, model, width, rng)


@dataclass
class NoiseSchedule:
    """Calibrated noise half-widths, one per level."""

    widths: list[float]
    targets: list[float]
    achieved: list[float]
    flags: list[str]

    def __len__(self):
        return len(self.widths)

    def __iter__(self):
        return iter(self.widths)

    def __getitem__(self, i):
        return self.widths[i]


def _pilot_r2(spec, model, n, width, seeds) -> float:
    vals = [r_squared_vs_function(*generate(spec, model, n, width, s), spec) for s in seeds]
    return float(np.mean(vals))


def calibrate_width(spec: FunctionSpec, model: NoiseModel | int, n: int, target: float,
                    pilot_reps: int = 3, seed: int = 0, lo: float = 0.0,
                    tol: float = 0.002) -> tuple[float, float, str]:
    """Noise half-width whose pilot mean R^2 is closest to ``target``.

    Returns ``(width, achieved_r2, flag)``; the flag is empty on success and
    ``"unreached"`` when the target could not be bracketed.
    """
    model = model if isinstance(model, NoiseModel) else NoiseModel.from_id(model)
    seeds = [np.random.SeedSequence([seed, rep]).generate_state(1, np.uint64)[0]
             for rep in range(pilot_reps)]
    r2 = functools.partial(_pilot_r2, spec, model, n, seeds=seeds)
    at_lo = r2(lo)
    if at_lo <= target:
        return lo, at_lo, ("" if abs(at_lo - target) <= 0.03 else "unreached")
    xs = sample_xs(spec, n, model.placement)
    scale = float(np.ptp(xs)) if model.noisy_x else 0.0
    if model.noisy_y:
        scale = max(scale, float(np.ptp(spec.evaluate(xs))))
    hi = max(lo, 0.0) + (scale or 1.0) / 8
    seen = [(lo, at_lo)]
    at_hi = r2(hi)
    seen.append((hi, at_hi))
    for _ in range(60):
        if at_hi <= target:
            break
        lo, hi = hi, hi * 2
        at_hi = r2(hi)
        seen.append((hi, at_hi))
    else:
        w, got = min(seen, key=lambda p: abs(p[1] - target))
        return w, got, "unreached"
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        at_mid = r2(mid)
        seen.append((mid, at_mid))
        if abs(at_mid - target) <= tol:
            break
        if at_mid > target:
            lo = mid
        else:
            hi = mid
    w, got = min(seen, key=lambda p: abs(p[1] - target))
    return w, got, ("" if abs(got - target) <= 0.03 else "unreached")


def noise_schedule(spec: FunctionSpec, model: NoiseModel | int, n: int, levels: int = 10,
                   pilot_reps: int = 3, seed: int = 0) -> NoiseSchedule:
    """Half-widths hitting R^2 targets 1, 1 - 1/levels, ..., 1/levels.

    The first width is always 0. Later widths are found by bisection on the
    pilot mean R^2 and forced to be non-decreasing. The Random relationship
    has R^2 = 0 at every width, so its widths are all 0 and flagged.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    targets = [1.0 - i / levels for i in range(levels)]
    if spec.is_random:
        return NoiseSchedule([0.0] * levels, targets, [0.0] * levels,
                             [""] + ["random"] * (levels - 1))
    widths, achieved, flags = [0.0], [1.0], [""]
    for target in targets[1:]:
        w, got, flag = calibrate_width(spec, model, n, target, pilot_reps, seed, lo=widths[-1])
        widths.append(max(w, widths[-1]))
        achieved.append(got)
        flags.append(flag)
    return NoiseSchedule(widths, targets, achieved, flags)


def sample_d_alpha(alpha: float, n: int, seed, weighting: str = "mass") -> tuple[np.ndarray, np.ndarray]:
    """Sample the two-block distribution on ``[0,a]^2 U [a,1]^2``.

    Points are uniform within their block. With ``weighting="mass"`` the
    lower block carries probability ``alpha``, which is what gives the
    distribution mutual information ``H(alpha)``; ``weighting="area"`` makes
    the density uniform over the union instead (lower-block probability
    ``alpha^2 / (alpha^2 + (1 - alpha)^2)``).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if weighting == "mass":
        p_low = alpha
    elif weighting == "area":
        p_low = alpha ** 2 / (alpha ** 2 + (1 - alpha) ** 2)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    rng = _rng(seed)
    low = rng.random(n) < p_low
    u = rng.random((2, n))
    x = np.where(low, alpha * u[0], alpha + (1 - alpha) * u[0])
    y = np.where(low, alpha * u[1], alpha + (1 - alpha) * u[1])
    return x, y
