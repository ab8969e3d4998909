"""Experiments run on the hardware model: associative recall, image recall, max-cut.

Also holds the small amount of I/O those experiments need: Biq Mac graph
files, the best-known-optimum sidecar and 10x10 image grids.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .device import DeviceParams, ParameterError
from .network import (
    NumericFault,
    SimConfig,
    TrialReport,
    as_bits,
    run_trial,
    set_weights_maxcut,
    train_hebbian,
)

log = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for i, j, _ in self.edges:
            if not (0 <= i < j < self.n_nodes):
                raise ParameterError(f"edge ({i}, {j}) must satisfy 0 <= i < j < n_nodes")
            if (i, j) in seen:
                raise ParameterError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @classmethod
    def from_pairs(cls, n_nodes: int, pairs: Iterable[tuple[int, int]], weight: int = 1) -> "Graph":
        return cls(n_nodes, tuple((min(i, j), max(i, j), weight) for i, j in pairs))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=np.int64)
        for i, j, w in self.edges:
            a[i, j] = a[j, i] = w
        return a


def parse_biqmac(text: str) -> Graph:
    """Parse an ``n m`` header followed by ``m`` lines of 1-based ``i j w``."""
    lines = [(no, ln.split()) for no, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise ParseError("empty graph file")
    no, head = lines[0]
    try:
        n, m = (int(x) for x in head)
    except ValueError:
        raise ParseError(f"expected header 'n m', got {' '.join(head)!r}", no) from None
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"header announces {m} edges but {len(body)} lines follow", no)
    edges = []
    seen = set()
    for no, parts in body:
        try:
            i, j, w = (int(x) for x in parts)
        except ValueError:
            raise ParseError(f"expected 'i j w', got {' '.join(parts)!r}", no) from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"node index out of range 1..{n}", no)
        if i == j:
            raise ParseError(f"self-loop on node {i}", no)
        a, b = sorted((i - 1, j - 1))
        if (a, b) in seen:
            raise ParseError(f"duplicate edge {i} {j}", no)
        seen.add((a, b))
        edges.append((a, b, w))
    return Graph(n, tuple(edges))


def load_biqmac(path: str | Path) -> Graph:
    return parse_biqmac(Path(path).read_text())


def format_biqmac(graph: Graph) -> str:
    lines = [f"{graph.n_nodes} {len(graph.edges)}"]
    lines += [f"{i + 1} {j + 1} {w}" for i, j, w in graph.edges]
    return "\n".join(lines) + "\n"


def load_best_known(path: str | Path | None = None) -> dict[str, int]:
    """Read ``instance_name optimum`` lines; ``#`` starts a comment."""
    if path is None:
        text = resources.files("spinhop.data").joinpath("biqmac_best_known.txt").read_text()
    else:
        text = Path(path).read_text()
    out = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected 'instance_name optimum'", no)
        try:
            out[parts[0]] = int(parts[1])
        except ValueError:
            raise ParseError(f"optimum {parts[1]!r} is not an integer", no) from None
    return out


def cut_value(graph: Graph, partition: Sequence[int]) -> int:
    p = np.asarray(partition)
    if p.shape != (graph.n_nodes,):
        raise ParameterError("partition length must equal the node count")
    return int(sum(w for i, j, w in graph.edges if p[i] != p[j]))


def brute_force_maxcut(graph: Graph) -> tuple[int, np.ndarray]:
    """Exact maximum cut by enumerating every partition with node 0 fixed on side 0."""
    n = graph.n_nodes
    if n > 24:
        raise ParameterError("exhaustive search is limited to 24 nodes")
    if n == 1 or not graph.edges:
        return 0, np.zeros(n, dtype=np.int8)
    codes = np.arange(2 ** (n - 1), dtype=np.int64)
    sides = (codes[:, None] >> np.arange(n - 1)) & 1
    sides = np.hstack([np.zeros((len(codes), 1), dtype=np.int64), sides])
    e = np.array(graph.edges)
    cuts = ((sides[:, e[:, 0]] != sides[:, e[:, 1]]) * e[:, 2]).sum(axis=1)
    best = int(np.argmax(cuts))
    return int(cuts[best]), sides[best].astype(np.int8)


def random_graph(n: int, density: float = 0.5, seed=None) -> Graph:
    """Unweighted G(n, p) graph."""
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < density]
    return Graph.from_pairs(n, pairs)


def distort(pattern, fraction: float, seed=None) -> np.ndarray:
    """Flip exactly round(fraction*len) distinct positions chosen by ``seed``."""
    if not 0.0 <= fraction <= 0.5:
        raise ParameterError("distortion fraction must lie in [0, 0.5]")
    bits = as_bits(pattern).copy()
    count = int(np.floor(fraction * len(bits) + 0.5))
    idx = np.random.default_rng(seed).choice(len(bits), size=count, replace=False)
    bits[idx] ^= 1
    return bits


def bitwise_accuracy(output, stored_patterns) -> float:
    """Best fraction of matching bits over every stored pattern and its inverse."""
    out = as_bits(output)
    best = 0.0
    for p in stored_patterns:
        match = float(np.mean(out == as_bits(p)))
        best = max(best, match, 1.0 - match)
    return best


def full_recall(output, stored_patterns) -> bool:
    return bitwise_accuracy(output, stored_patterns) == 1.0


def random_patterns(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` random patterns with no duplicate or complementary pair."""
    if count > 2 ** (n - 1):
        raise ParameterError("too many patterns for this size")
    pats: list[np.ndarray] = []
    while len(pats) < count:
        p = rng.integers(0, 2, n)
        if any(np.array_equal(p, q) or np.array_equal(p, 1 - q) for q in pats):
            continue
        pats.append(p)
    return np.array(pats)


@dataclass
class TrialRecord:
    """One simulated trial, flattened for JSON/CSV output."""

    trial: int
    stored: list[str]
    input_bits: str
    report: TrialReport
    accuracy: float | None = None
    full_recall: bool | None = None
    pixel_error: int | None = None
    level: float | None = None
    cut: int | None = None
    ratio: float | None = None
    instance: str | None = None

    def row(self) -> dict:
        r = self.report
        return {
            "trial": self.trial,
            "instance": self.instance or "",
            "level": "" if self.level is None else self.level,
            "converged": int(r.converged),
            "t_converge_ns": r.t_converge * 1e9,
            "chargeup_ns": r.chargeup_duration * 1e9,
            "energy_nJ": r.energy_total * 1e9,
            "chargeup_energy_nJ": r.chargeup_energy * 1e9,
            "avg_power_mW": r.avg_power * 1e3,
            "accuracy": "" if self.accuracy is None else self.accuracy,
            "full_recall": "" if self.full_recall is None else int(self.full_recall),
            "pixel_error": "" if self.pixel_error is None else self.pixel_error,
            "cut": "" if self.cut is None else self.cut,
            "ratio": "" if self.ratio is None else self.ratio,
            "final_bits": "".join(map(str, r.final_bits)),
        }

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "report"}
        d["report"] = self.report.to_dict()
        return d


CSV_COLUMNS = [
    "trial", "instance", "level", "converged", "t_converge_ns", "chargeup_ns", "energy_nJ",
    "chargeup_energy_nJ", "avg_power_mW", "accuracy", "full_recall", "pixel_error", "cut", "ratio",
    "final_bits",
]  # fmt: skip


@dataclass
class RecallStats:
    n: int
    n_patterns: int
    trials: int
    full_recall_rate: float
    bitwise_accuracy: float
    mean_t_converge: float
    mean_energy: float
    faults: int = 0
    records: list[TrialRecord] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "records"}


def _bits_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def _recall_job(job):
    idx, stored, x, params, config = job
    w = train_hebbian(stored, config.w_mag, config.normalize_patterns)
    try:
        rep = run_trial(w, x, params, config)
    except NumericFault:
        return None
    return TrialRecord(
        trial=idx,
        stored=[_bits_str(p) for p in stored],
        input_bits=_bits_str(x),
        report=rep,
        accuracy=bitwise_accuracy(rep.final_bits, stored),
        full_recall=full_recall(rep.final_bits, stored),
    )


def run_jobs(fn: Callable, jobs: Sequence, workers: int = 1) -> list:
    """Map ``fn`` over ``jobs`` serially or on a process pool, preserving order."""
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def recall_experiment(
    n: int,
    patterns: Sequence | None = None,
    pattern_count: int = 1,
    trials: int = 100,
    distortion: float | None = None,
    seed=0,
    config: SimConfig | None = None,
    params: DeviceParams | None = None,
    exhaustive: bool = False,
    workers: int = 1,
) -> RecallStats:
    """Associative-recall accuracy of the hardware model.

    With ``exhaustive`` every stored pattern (or each given pattern set) is
    presented with every one of the 2^n inputs.  Otherwise each trial draws a
    fresh stored set (unless ``patterns`` is given) and an input that is
    uniformly random, or a ``distortion``-flipped copy of a stored pattern.
    """
    if n < 3 or trials < 1:
        raise ParameterError("need n >= 3 and trials >= 1")
    config = config or SimConfig()
    params = params or DeviceParams()
    rng = np.random.default_rng(seed)
    fixed = None if patterns is None else np.array([as_bits(p) for p in patterns])
    if fixed is not None and fixed.shape[1] != n:
        raise ParameterError("pattern length does not match n")
    jobs = []
    if exhaustive:
        if n > 12:
            raise ParameterError("exhaustive sweeps are limited to n <= 12")
        inputs = list(itertools.product((0, 1), repeat=n))
        if fixed is not None:
            stored_sets = [fixed]
        elif pattern_count == 1:
            stored_sets = [np.array([p]) for p in inputs]
        else:
            raise ParameterError("exhaustive multi-pattern sweeps need explicit patterns")
        for stored in stored_sets:
            for x in inputs:
                jobs.append((len(jobs), stored, np.array(x), params, config))
    else:
        for t in range(trials):
            stored = fixed if fixed is not None else random_patterns(n, pattern_count, rng)
            if distortion is None:
                x = rng.integers(0, 2, n)
            else:
                src = stored[rng.integers(len(stored))]
                x = distort(src, distortion, rng.integers(2**63))
            jobs.append((t, stored, x, params, config))
    records = run_jobs(_recall_job, jobs, workers)
    done = [r for r in records if r is not None]
    faults = len(records) - len(done)
    if faults:
        log.warning("%d trial(s) aborted on a numeric fault", faults)
    count = len(fixed) if fixed is not None else pattern_count
    return RecallStats(
        n=n,
        n_patterns=count,
        trials=len(records),
        full_recall_rate=float(np.mean([r.full_recall for r in done])) if done else 0.0,
        bitwise_accuracy=float(np.mean([r.accuracy for r in done])) if done else 0.0,
        mean_t_converge=float(np.mean([r.report.t_converge for r in done])) if done else float("nan"),
        mean_energy=float(np.mean([r.report.energy_total for r in done])) if done else float("nan"),
        faults=faults,
        records=done,
    )


def load_image_grid(path_or_text: str | Path) -> np.ndarray:
    """Read a grid of '0'/'1' characters (one row per line) into a 2-D int array."""
    p = Path(path_or_text) if not isinstance(path_or_text, str) or "\n" not in path_or_text else None
    text = p.read_text() if p is not None else path_or_text
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len({len(r) for r in rows}) != 1 or any(set(r) - {"0", "1"} for r in rows):
        raise ParseError("image grid must be rectangular and contain only '0' and '1'")
    return np.array([[int(c) for c in r] for r in rows], dtype=np.int64)


def fixture_images() -> list[np.ndarray]:
    """The three bundled 10x10 glyphs."""
    pkg = resources.files("spinhop.data")
    return [load_image_grid(pkg.joinpath(f"glyph_{c}.txt").read_text()) for c in "HTX"]


def pixel_error(output, true_image) -> int:
    """Pixels differing from the true image, or from its inverse if that is closer."""
    out = as_bits(np.ravel(output))
    true = as_bits(np.ravel(true_image))
    d = int(np.sum(out != true))
    return min(d, len(true) - d)


def _image_job(job):
    idx, level, img_idx, images, x, params, config = job
    w = train_hebbian(images, config.w_mag, config.normalize_patterns)
    try:
        rep = run_trial(w, x, params, config)
    except NumericFault:
        return None
    return TrialRecord(
        trial=idx,
        stored=[_bits_str(p) for p in images],
        input_bits=_bits_str(x),
        report=rep,
        pixel_error=pixel_error(rep.final_bits, images[img_idx]),
        level=level,
        instance=f"image{img_idx}",
    )


@dataclass
class ImageStats:
    levels: list[float]
    mean_pixel_error: dict[float, float]
    records: list[TrialRecord] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {"levels": self.levels, "mean_pixel_error": {str(k): v for k, v in self.mean_pixel_error.items()}}


def image_experiment(
    images: Sequence[np.ndarray] | None = None,
    distortion_levels: Sequence[float] = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5),
    trials_per_level: int = 50,
    seed=0,
    config: SimConfig | None = None,
    params: DeviceParams | None = None,
    workers: int = 1,
) -> ImageStats:
    """Recall of distorted images from one network trained on all of them.

    Trial ``t`` at each level distorts image ``t % len(images)``.
    """
    images = fixture_images() if images is None else list(images)
    flat = [as_bits(np.ravel(im)) for im in images]
    if len({len(f) for f in flat}) != 1:
        raise ParameterError("all images must have the same number of pixels")
    for lv in distortion_levels:
        if not 0.0 <= lv <= 0.5:
            raise ParameterError("distortion levels must lie in [0, 0.5]")
    config = config or SimConfig()
    params = params or DeviceParams()
    rng = np.random.default_rng(seed)
    stored = np.array(flat)
    jobs = []
    for lv in distortion_levels:
        for t in range(trials_per_level):
            k = t % len(flat)
            x = distort(flat[k], lv, rng.integers(2**63))
            jobs.append((len(jobs), float(lv), k, stored, x, params, config))
    records = [r for r in run_jobs(_image_job, jobs, workers) if r is not None]
    means = {}
    for lv in distortion_levels:
        errs = [r.pixel_error for r in records if r.level == float(lv)]
        means[float(lv)] = float(np.mean(errs)) if errs else float("nan")
    return ImageStats([float(v) for v in distortion_levels], means, records)


@dataclass
class MaxCutResult:
    partition: np.ndarray
    cut: int
    cut_ratio: float | None
    report: TrialReport

    @property
    def t_converge(self) -> float:
        return self.report.t_converge

    @property
    def energy(self) -> float:
        return self.report.energy_total

    @property
    def avg_power(self) -> float:
        return self.report.avg_power


def maxcut_experiment(
    graph: Graph,
    config: SimConfig | None = None,
    params: DeviceParams | None = None,
    best_known: int | None = None,
) -> MaxCutResult:
    """Solve max-cut by free-running from the all-antiparallel state.

    ``cut_ratio`` is cut/best_known; an edgeless graph has ratio 1 by
    convention, and the ratio is None when no optimum is known.
    """
    config = config or SimConfig()
    w = set_weights_maxcut(graph, config.w_mag, config.maxcut_penalty)
    rep = run_trial(w, None, params, config)
    if not rep.converged:
        log.warning("max-cut run did not converge within t_max; reporting the partition at t_max")
    cut = cut_value(graph, rep.final_bits)
    if not graph.edges:
        ratio = 1.0
    elif best_known:
        ratio = cut / best_known
    else:
        ratio = None
    return MaxCutResult(rep.final_bits, cut, ratio, rep)
