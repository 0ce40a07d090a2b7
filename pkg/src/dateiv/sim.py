"""Ancestral sampling of a trial from the IV net, and the sample Wald estimator.

Random stream rule
------------------
Uniforms come from a Philox4x64 counter-based generator keyed by the seed
(``numpy.random.Philox(key=seed)``). Sample ``j`` of a net with ``K`` variables
owns outputs ``[j*S, j*S + K)`` of that stream, where ``S = 4*ceil(K/4)``;
its first uniform sits at Philox counter ``j*S/4``. Any block of samples can
therefore be produced independently by starting the counter there, and chunked
or threaded generation is bit-identical to one serial pass. Within a sample,
uniforms are consumed one per variable in topological order and mapped to a
value by inverse CDF over the variable's ordered domain.
"""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterator, Sequence

import numpy as np

from . import iv
from .cbn import CausalBayesNet
from .errors import EmptyArm, ZeroSampleDenominator
from .population import Population, date
from .iv import ASSIGN, CURE, INDIV, TAKE, Conditionals, IvNetConfig

DEFAULT_BOOTSTRAP = 200


def _stride(n_vars: int) -> int:
    return 4 * math.ceil(n_vars / 4)


def _uniforms(seed: int, start: int, count: int, n_vars: int) -> np.ndarray:
    stride = _stride(n_vars)
    bitgen = np.random.Philox(key=seed, counter=start * stride // 4)
    block = np.random.Generator(bitgen).random(count * stride)
    return block.reshape(count, stride)[:, :n_vars]


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**128:
        raise ValueError(f"seed must be an integer in [0, 2**128), got {seed!r}")
    return int(seed)


def _draw(net: CausalBayesNet, seed: int, start: int, count: int) -> np.ndarray:
    comp = net.compiled
    n_vars = len(comp.names)
    u = _uniforms(seed, start, count, n_vars)
    out = np.zeros((count, n_vars), dtype=np.int64)
    for pos, k in enumerate(comp.order):
        d = comp.dims[k]
        cum = np.cumsum(comp.cpt[k].reshape(-1, d), axis=1)
        pa = comp.parent_idx[k]
        if pa:
            rows = np.ravel_multi_index(tuple(out[:, j] for j in pa), tuple(comp.dims[j] for j in pa))
        else:
            rows = np.zeros(count, dtype=np.int64)
        vals = (cum[rows] <= u[:, pos, None]).sum(axis=1)
        out[:, k] = np.minimum(vals, d - 1)
    return out


def ancestral_sample(net: CausalBayesNet, seed: int, n: int, *, start: int = 0,
                     chunk_size: int | None = None, workers: int = 1) -> np.ndarray:
    """Draw samples ``start .. start+n-1`` as an ``(n, n_vars)`` array of domain indices.

    Columns follow the net's declaration order.
    """
    seed = _check_seed(seed)
    if n < 0 or start < 0:
        raise ValueError("n and start must be non-negative")
    net.compiled
    if chunk_size is None or chunk_size >= n:
        return _draw(net, seed, start, n)
    bounds = [(s, min(chunk_size, n - (s - start))) for s in range(start, start + n, chunk_size)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _draw(net, seed, *b), bounds))
    else:
        parts = [_draw(net, seed, *b) for b in bounds]
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class TrialSample:
    indiv_id: str
    assign: int
    take: int
    cure: int


class TrialSamples(Sequence[TrialSample]):
    """Column-stored draws of (Indiv, Assign, Take, Cure)."""

    def __init__(self, indiv_labels: Sequence[str], indiv, assign, take, cure):
        self.indiv_labels = tuple(indiv_labels)
        self.indiv = np.asarray(indiv, dtype=np.int64)
        self.assign = np.asarray(assign, dtype=np.int64)
        self.take = np.asarray(take, dtype=np.int64)
        self.cure = np.asarray(cure, dtype=np.int64)

    @classmethod
    def from_rows(cls, rows: Sequence[TrialSample]) -> "TrialSamples":
        labels = list(dict.fromkeys(r.indiv_id for r in rows))
        pos = {lab: k for k, lab in enumerate(labels)}
        return cls(
            labels,
            [pos[r.indiv_id] for r in rows],
            [r.assign for r in rows],
            [r.take for r in rows],
            [r.cure for r in rows],
        )

    def __len__(self):
        return len(self.assign)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return TrialSamples(self.indiv_labels, self.indiv[k], self.assign[k], self.take[k], self.cure[k])
        return TrialSample(self.indiv_labels[self.indiv[k]], int(self.assign[k]),
                           int(self.take[k]), int(self.cure[k]))

    def __iter__(self) -> Iterator[TrialSample]:
        for k in range(len(self)):
            yield self[k]

    def __eq__(self, other):
        if not isinstance(other, TrialSamples):
            return NotImplemented
        return (len(self) == len(other)
                and [self.indiv_labels[i] for i in self.indiv] == [other.indiv_labels[i] for i in other.indiv]
                and all(np.array_equal(getattr(self, c), getattr(other, c)) for c in ("assign", "take", "cure")))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["indiv_id", "assign", "take", "cure"])
        labels = self.indiv_labels
        for i, a, t, c in zip(self.indiv.tolist(), self.assign.tolist(), self.take.tolist(), self.cure.tolist()):
            w.writerow([labels[i], a, t, c])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def sample(net: CausalBayesNet, rng_seed: int, n: int, **kwargs) -> TrialSamples:
    """Ancestral draws from an IV net (see :func:`dateiv.iv.build_iv_net`)."""
    draws = ancestral_sample(net, rng_seed, n, **kwargs)
    col = net.compiled.index
    binary = net.variable(ASSIGN).domain
    if binary != ("0", "1"):
        raise ValueError("Assign must have domain ('0', '1')")
    return TrialSamples(
        net.variable(INDIV).domain,
        draws[:, col[INDIV]],
        draws[:, col[ASSIGN]],
        draws[:, col[TAKE]],
        draws[:, col[CURE]],
    )


def arm_conditionals(assign, take, cure, weight) -> Conditionals:
    """Weighted arm-wise means of Cure and Take; shared by sample and exact paths."""
    assign = np.asarray(assign)
    take = np.asarray(take, dtype=float)
    cure = np.asarray(cure, dtype=float)
    weight = np.asarray(weight, dtype=float)
    out = {}
    for a in (1, 0):
        w = weight[assign == a]
        total = w.sum()
        if total == 0:
            raise EmptyArm(f"no samples with Assign={a}")
        out[f"cure_a{a}"] = float((w * cure[assign == a]).sum() / total)
        out[f"take_a{a}"] = float((w * take[assign == a]).sum() / total)
    return Conditionals(**out)


def exact_wald(net: CausalBayesNet) -> float:
    """The Wald ratio with the sample replaced by the exact joint over (Assign, Take, Cure)."""
    comp = net.compiled
    axes = [comp.index[v] for v in (ASSIGN, TAKE, CURE)]
    others = tuple(k for k in range(len(comp.names)) if k not in axes)
    marg = comp.joint.sum(axis=others) if others else comp.joint
    # summed array keeps remaining axes in declaration order
    kept = sorted(axes)
    a, t, c = np.meshgrid(*(np.arange(2),) * 3, indexing="ij")
    cells = {ASSIGN: a.ravel(), TAKE: t.ravel(), CURE: c.ravel()}
    names = [comp.names[k] for k in kept]
    grid = np.stack([cells[n] for n in names])
    w = marg[tuple(grid)]
    return iv.wald_ratio(arm_conditionals(cells[ASSIGN], cells[TAKE], cells[CURE], w))


@dataclass
class TrialResult:
    n: int
    wald_estimate: float
    empirical_se: float | None
    exact_date: float | None
    numerator: float
    denominator: float
    bootstrap_resamples: int
    bootstrap_seed: int

    @property
    def abs_error(self) -> float | None:
        return None if self.exact_date is None else abs(self.wald_estimate - self.exact_date)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["abs_error"] = self.abs_error
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        d = self.to_dict()
        keys = sorted(d)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        w.writerow(["" if d[k] is None else repr(d[k]) if isinstance(d[k], float) else d[k] for k in keys])
        return buf.getvalue()


def _cell_ratio(counts: np.ndarray) -> np.ndarray:
    """Wald ratios for rows of (a, t, c)-cell counts shaped (..., 2, 2, 2); nan when undefined."""
    arm = counts.sum(axis=(-1, -2))
    take = counts[..., 1, :].sum(axis=-1)
    cure = counts[..., :, 1].sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = cure[..., 1] / arm[..., 1] - cure[..., 0] / arm[..., 0]
        den = take[..., 1] / arm[..., 1] - take[..., 0] / arm[..., 0]
        return np.where(den != 0, num / den, np.nan)


def wald_estimate(samples: TrialSamples | Sequence[TrialSample], *, exact_date: float | None = None,
                  n_bootstrap: int = DEFAULT_BOOTSTRAP, bootstrap_seed: int = 0) -> TrialResult:
    """Sample Wald ratio with a nonparametric bootstrap standard error.

    The ratio depends on the sample only through the eight (Assign, Take, Cure)
    cell counts, so a resample-with-replacement of the n draws is generated
    directly as a multinomial draw of those counts.
    """
    if not isinstance(samples, TrialSamples):
        samples = TrialSamples.from_rows(list(samples))
    n = len(samples)
    c = arm_conditionals(samples.assign, samples.take, samples.cure, np.ones(n))
    num = c.cure_a1 - c.cure_a0
    den = c.take_a1 - c.take_a0
    if den == 0:
        raise ZeroSampleDenominator("sample uptake contrast is zero")
    est = num / den

    se = None
    if n_bootstrap > 0:
        cell = samples.assign * 4 + samples.take * 2 + samples.cure
        freq = np.bincount(cell, minlength=8) / n
        rng = np.random.default_rng(bootstrap_seed)
        counts = rng.multinomial(n, freq, size=n_bootstrap).reshape(n_bootstrap, 2, 2, 2)
        ratios = _cell_ratio(counts)
        ratios = ratios[np.isfinite(ratios)]
        if len(ratios) >= 2:
            se = float(np.std(ratios, ddof=1))
    return TrialResult(
        n=n,
        wald_estimate=est,
        empirical_se=se,
        exact_date=exact_date,
        numerator=num,
        denominator=den,
        bootstrap_resamples=n_bootstrap,
        bootstrap_seed=bootstrap_seed,
    )


def run_trial(pop: Population, cfg: IvNetConfig, seed: int, n: int, **kwargs) -> tuple[TrialSamples, TrialResult]:
    net = iv.build_iv_net(pop, cfg)
    s = sample(net, seed, n)
    return s, wald_estimate(s, exact_date=date(pop), **kwargs)


@dataclass
class ConvergenceReport:
    rows: list[dict]
    median_error: dict[int, float | None]
    nonincreasing: bool

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "median_error": {str(k): v for k, v in self.median_error.items()},
            "nonincreasing": self.nonincreasing,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "seed", "wald_estimate", "abs_error"])
        for r in self.rows:
            w.writerow([r["n"], r["seed"],
                        "" if r["wald_estimate"] is None else repr(r["wald_estimate"]),
                        "" if r["abs_error"] is None else repr(r["abs_error"])])
        return buf.getvalue()


def convergence_report(pop: Population, cfg: IvNetConfig, seeds: Sequence[int], ns: Sequence[int]) -> ConvergenceReport:
    """Grid of sample Wald estimates over sample sizes and seeds.

    Runs whose estimator is undefined (empty arm, zero uptake contrast) are
    kept with ``None`` entries. The median error across seeds is expected to
    shrink along ``ns``; that is reported in ``nonincreasing``, not enforced.
    """
    net = iv.build_iv_net(pop, cfg)
    truth = date(pop)
    rows = []
    for n in ns:
        for seed in seeds:
            try:
                res = wald_estimate(sample(net, seed, int(n)), exact_date=truth, n_bootstrap=0)
                est, err = res.wald_estimate, res.abs_error
            except (EmptyArm, ZeroSampleDenominator):
                est = err = None
            rows.append({"n": int(n), "seed": int(seed), "wald_estimate": est, "abs_error": err})
    medians = {}
    for n in ns:
        errs = [r["abs_error"] for r in rows if r["n"] == int(n) and r["abs_error"] is not None]
        medians[int(n)] = statistics.median(errs) if errs else None
    seq = [m for m in medians.values() if m is not None]
    return ConvergenceReport(rows, medians, all(b <= a for a, b in zip(seq, seq[1:])))
