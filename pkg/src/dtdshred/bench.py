"""Timing sweep over generated documents and a linearity verdict.

The timed section is DOM loading plus shredding into a counting sink.
Document generation and all file I/O are outside the timer.
"""

from __future__ import annotations

import gc
import json
import re
import statistics
import time
from dataclasses import asdict, dataclass, field

from .dom import load_document, node_count
from .dtd import DTDGraph
from .emitters import CountingSink
from .engine import check_lemmas, xinsert
from .generator import generate_document
from .schema import Strategy, map_schema

R2_MIN = 0.98
RATIO_MAX = 2.0
DEFAULT_SIZES = (1 << 20, 2 << 20, 4 << 20, 8 << 20, 16 << 20)

_SIZE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([kmg]?)b?\s*$", re.I)
_UNITS = {"": 1, "k": 1 << 10, "m": 1 << 20, "g": 1 << 30}


def parse_size(text):
    """``'512k'`` -> 524288; units are binary (k, m, g)."""
    m = _SIZE_RE.match(text)
    if not m:
        raise ValueError(f"bad size {text!r}")
    return int(float(m.group(1)) * _UNITS[m.group(2).lower()])


@dataclass
class BenchConfig:
    graph: DTDGraph
    sizes: tuple = DEFAULT_SIZES
    repetitions: int = 5
    strategies: tuple = (Strategy.DTDMAP,)
    seed: int = 0
    dtd_path: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")


@dataclass
class Cell:
    strategy: str
    target_size: int
    doc_bytes: int
    elements: int
    attributes: int
    reps: list
    stats: dict
    lemmas_ok: bool

    @property
    def n(self):
        return self.elements + self.attributes

    @property
    def mean(self):
        return statistics.fmean(self.reps)


@dataclass
class Fit:
    strategy: str
    slope: float | None = None
    intercept: float | None = None
    r2: float | None = None
    ratio: float | None = None
    verdict: str = "N/A"


@dataclass
class BenchReport:
    cells: list = field(default_factory=list)
    fits: list = field(default_factory=list)

    @property
    def verdict(self):
        verdicts = {f.verdict for f in self.fits}
        if "FAIL" in verdicts:
            return "FAIL"
        return "PASS" if verdicts == {"PASS"} else "N/A"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "criteria": {"r2_min": R2_MIN, "time_per_n_ratio_max": RATIO_MAX},
            "cells": [dict(asdict(c), n=c.n, mean=c.mean) for c in self.cells],
            "fits": [asdict(f) for f in self.fits],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def linear_fit(xs, ys):
    """Least-squares line through (xs, ys): ``(slope, intercept, r2)``."""
    slope, intercept = statistics.linear_regression(xs, ys)
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    return slope, intercept, r2


def judge(strategy, cells):
    fit = Fit(strategy)
    if len(cells) < 2:
        return fit
    xs = [c.n for c in cells]
    ys = [c.mean for c in cells]
    fit.slope, fit.intercept, fit.r2 = linear_fit(xs, ys)
    per_n = [y / x for x, y in zip(xs, ys)]
    fit.ratio = max(per_n) / min(per_n)
    fit.verdict = "PASS" if fit.r2 >= R2_MIN and fit.ratio <= RATIO_MAX else "FAIL"
    return fit


def time_once(data, g, schema):
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter()
        tree = load_document(data)
        stats = xinsert(tree, g, schema, CountingSink(schema))
        elapsed = time.perf_counter() - t0
    finally:
        gc.enable()
    return elapsed, tree, stats


def run_bench(cfg: BenchConfig, progress=None):
    g = cfg.graph
    report = BenchReport()
    for strategy in cfg.strategies:
        strategy = Strategy(strategy)
        schema = map_schema(g, strategy)
        cells = []
        for size in cfg.sizes:
            data = generate_document(g, size, cfg.seed).encode("utf-8")
            _, tree, stats = time_once(data, g, schema)  # warm-up, discarded
            lemmas = check_lemmas(stats, tree, schema)
            elements, attributes = node_count(tree)
            del tree
            reps = [time_once(data, g, schema)[0] for _ in range(cfg.repetitions)]
            cell = Cell(strategy.value, size, len(data), elements, attributes, reps,
                        stats.as_dict(), all(ok for _, _, ok in lemmas.values()))
            cells.append(cell)
            if progress:
                progress(cell)
        report.cells.extend(cells)
        report.fits.append(judge(strategy.value, cells))
    return report


def format_summary(report: BenchReport):
    lines = [f"{'strategy':<8} {'size':>10} {'n':>10} {'mean s':>9} {'us/n':>7} lemmas"]
    for c in report.cells:
        lines.append(
            f"{c.strategy:<8} {c.target_size:>10} {c.n:>10} {c.mean:>9.4f} "
            f"{1e6 * c.mean / c.n:>7.3f} {'PASS' if c.lemmas_ok else 'FAIL'}")
    for f in report.fits:
        if f.r2 is None:
            lines.append(f"{f.strategy}: single size, fit skipped, verdict N/A")
        else:
            lines.append(f"{f.strategy}: R^2={f.r2:.4f} (>= {R2_MIN}) "
                         f"time/n max/min={f.ratio:.3f} (<= {RATIO_MAX}) -> {f.verdict}")
    return "\n".join(lines) + "\n"
