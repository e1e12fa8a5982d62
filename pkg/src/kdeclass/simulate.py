"""Simulation studies: bandwidth-selection rate experiments, heavy-tail
misclassification growth, and the cross-validation negative control.

Every study is deterministic given its seed: each (sample size, replicate)
cell derives its own generator from SeedSequence((seed, n_index, rep)), so
results are independent of evaluation order and of the number of worker
threads, and reruns produce byte-identical CSV files.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import FROM_G, classify_ahat, decision_segments, fit_classifier
from .densities import DensityPair, make_pair
from .errors import DegenerateRegressionError, ParameterError
from .selector import SelectorConfig, sample_scale, select_bandwidths, cv_err

__all__ = [
    "DEFAULT_N_LIST",
    "ExperimentConfig",
    "SlopeFit",
    "StudyRow",
    "StudyResult",
    "TailStudyResult",
    "CvComparisonResult",
    "fit_slope",
    "run_study",
    "run_tail_study",
    "run_cv_comparison",
]

#: Ten log-spaced sample sizes from 20 to 200: round(20 * 10^(k/9)).
DEFAULT_N_LIST = tuple(round(20 * 10 ** (k / 9)) for k in range(10))

#: Reference rate exponents drawn next to the fitted slope.
REFERENCE_SLOPES = (0.2, 1.0 / 9.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one rate study."""

    pair_id: str
    n_list: tuple[int, ...] = DEFAULT_N_LIST
    reps: int = 100
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    seed: int = 0
    out_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        n_list = tuple(int(n) for n in self.n_list)
        object.__setattr__(self, "n_list", n_list)
        if len(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ParameterError(
                "n_list must be strictly increasing with at least two sizes "
                "(the study fits a rate over log n)")
        if any(n < 2 for n in n_list):
            raise ParameterError("sample sizes must be at least 2")
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if self.threads < 1:
            raise ParameterError("threads must be at least 1")


@dataclass(frozen=True)
class SlopeFit:
    """Ordinary least-squares line through (log n, mean -log bandwidth)."""

    slope: float
    intercept: float
    points: tuple[tuple[float, float], ...]
    which: str = "h1"

    def predict(self, x: float) -> float:
        return self.intercept + self.slope * x


@dataclass(frozen=True)
class StudyRow:
    pair: str
    n: int
    rep: int
    h1: float
    h2: float
    err_boot_min: float
    seed: int


@dataclass(frozen=True)
class StudyResult:
    pair_id: str
    rows: tuple[StudyRow, ...]
    summary: tuple[dict, ...]
    slope_h1: SlopeFit
    slope_h2: SlopeFit


def fit_slope(points, which: str = "h1") -> SlopeFit:
    """Closed-form least squares of y on x for a sequence of (x, y) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise DegenerateRegressionError("need at least two points")
    xs = np.array([x for x, _ in pts])
    ys = np.array([y for _, y in pts])
    sxx = float(np.sum((xs - xs.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateRegressionError("all x values are equal")
    slope = float(np.sum((xs - xs.mean()) * (ys - ys.mean())) / sxx)
    intercept = float(ys.mean() - slope * xs.mean())
    return SlopeFit(slope=slope, intercept=intercept, points=tuple(pts), which=which)


def _study_cell(pair: DensityPair, pair_id: str, n_index: int, n: int, rep: int,
                cfg: ExperimentConfig) -> StudyRow:
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((cfg.seed, n_index, rep))))
    x = pair.sample("f", n, rng)
    y = pair.sample("g", n, rng)
    sel = select_bandwidths(x, y, pair.p, cfg.selector, rng=rng)
    return StudyRow(pair=pair_id, n=n, rep=rep, h1=sel.h1, h2=sel.h2,
                    err_boot_min=sel.err_min, seed=cfg.seed)


def _map_cells(fn, cells, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, cells))
    return [fn(c) for c in cells]


def run_study(cfg: ExperimentConfig) -> StudyResult:
    """Replicated bandwidth selection across sample sizes, with equal sample
    sizes m = n and p = 1/2, followed by the log-log rate regression of the
    per-n mean of -log(selected bandwidth) on log n."""
    pair = make_pair(cfg.pair_id)
    cells = [(i, n, rep) for i, n in enumerate(cfg.n_list)
             for rep in range(cfg.reps)]
    rows = _map_cells(
        lambda c: _study_cell(pair, cfg.pair_id, c[0], c[1], c[2], cfg),
        cells, cfg.threads)
    rows = tuple(sorted(rows, key=lambda r: (r.n, r.rep)))

    summary = []
    pts1, pts2 = [], []
    for n in cfg.n_list:
        h1s = np.array([r.h1 for r in rows if r.n == n])
        h2s = np.array([r.h2 for r in rows if r.n == n])
        m1, m2 = float(np.mean(-np.log(h1s))), float(np.mean(-np.log(h2s)))
        s1 = float(np.std(-np.log(h1s), ddof=1)) if h1s.size > 1 else 0.0
        s2 = float(np.std(-np.log(h2s), ddof=1)) if h2s.size > 1 else 0.0
        summary.append({"pair": cfg.pair_id, "n": n,
                        "mean_neglog_h1": m1, "mean_neglog_h2": m2,
                        "sd_neglog_h1": s1, "sd_neglog_h2": s2})
        pts1.append((np.log(n), m1))
        pts2.append((np.log(n), m2))

    slope_h1 = fit_slope(pts1, "h1")
    slope_h2 = fit_slope(pts2, "h2")
    result = StudyResult(pair_id=cfg.pair_id, rows=rows, summary=tuple(summary),
                         slope_h1=slope_h1, slope_h2=slope_h2)
    if cfg.out_dir is not None:
        _write_study(result, cfg.out_dir)
    return result


def _write_study(result: StudyResult, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pair = result.pair_id

    with open(out / f"{pair}_replicates.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair", "n", "rep", "h1", "h2", "err_boot_min", "seed"])
        for r in result.rows:
            w.writerow([r.pair, r.n, r.rep, repr(r.h1), repr(r.h2),
                        repr(r.err_boot_min), r.seed])

    with open(out / f"{pair}_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair", "n", "mean_neglog_h1", "mean_neglog_h2",
                    "sd_neglog_h1", "sd_neglog_h2"])
        for row in result.summary:
            w.writerow([row["pair"], row["n"], repr(row["mean_neglog_h1"]),
                        repr(row["mean_neglog_h2"]), repr(row["sd_neglog_h1"]),
                        repr(row["sd_neglog_h2"])])

    with open(out / f"{pair}_slopes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair", "which", "slope", "intercept"])
        for fit in (result.slope_h1, result.slope_h2):
            w.writerow([pair, fit.which, repr(fit.slope), repr(fit.intercept)])

    # gnuplot-compatible plot data; the reference lines with the two rate
    # exponents pass through the center of the h1 regression line.
    xs = np.array([x for x, _ in result.slope_h1.points])
    fitted1 = np.array([result.slope_h1.predict(x) for x in xs])
    fitted2 = np.array([result.slope_h2.predict(x) for x in xs])
    cx, cy = float(xs.mean()), float(fitted1.mean())
    with open(out / f"{pair}_plotdata.dat", "w") as fh:
        fh.write("# logn mean_neglog_h1 mean_neglog_h2 fit_h1 fit_h2 "
                 "ref_slope_1_5 ref_slope_1_9\n")
        for k, x in enumerate(xs):
            y1 = result.slope_h1.points[k][1]
            y2 = result.slope_h2.points[k][1]
            refs = [cy + s * (x - cx) for s in REFERENCE_SLOPES]
            fh.write(" ".join(repr(float(v)) for v in
                              (x, y1, y2, fitted1[k], fitted2[k], *refs)) + "\n")


# ----------------------------------------------------------------------
# heavy-tail study
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TailStudyResult:
    """Replicate table of the scaled tail misclassification integral plus
    the light-tailed contrast fractions."""

    alpha: float
    beta: float
    x0: float
    rows: tuple[dict, ...]           # n, rep, tail_integral, scaled
    scaled_by_n: tuple[tuple[int, float], ...]
    contrast_n: int
    contrast_rows: tuple[dict, ...]  # rep, frac_from_f
    contrast_fraction: float


def _tail_integral(pair: DensityPair, n: int, rep_seed, x0: float) -> float:
    """One replicate of the integral over (x0, inf) of f at points the
    trained composite rule assigns to the second population; the integral
    is a sum of cdf differences over the rule's decision segments."""
    rng = np.random.Generator(np.random.PCG64(rep_seed))
    x = pair.sample("f", n, rng)
    y = pair.sample("g", n, rng)
    rate = float(n) ** -0.2
    h1 = sample_scale(x, "iqr") * rate
    h2 = sample_scale(y, "iqr") * rate
    clf = fit_classifier(x, y, h1, h2, pair.p)
    segs = decision_segments(clf, x0, np.inf, "ahat")
    return float(sum(pair.f.cdf(b) - pair.f.cdf(a)
                     for a, b, lab in segs if lab == FROM_G))


def _contrast_fraction(pair: DensityPair, n: int, rep_seed,
                       grid: np.ndarray) -> float:
    """Fraction of far-tail grid points the trained composite rule assigns
    to the heavy(er)-tailed first population."""
    rng = np.random.Generator(np.random.PCG64(rep_seed))
    x = pair.sample("f", n, rng)
    y = pair.sample("g", n, rng)
    rate = float(n) ** -0.2
    h1 = sample_scale(x, "iqr") * rate
    h2 = sample_scale(y, "iqr") * rate
    clf = fit_classifier(x, y, h1, h2, pair.p)
    hits = sum(1 for t in grid if classify_ahat(clf, float(t)).population == "f")
    return hits / grid.size


def run_tail_study(alpha: float = 2.0, beta: float = 2.5,
                   n_list: tuple[int, ...] = (100, 400, 1600),
                   reps: int = 200, seed: int = 0,
                   x0: float | None = None,
                   contrast_n: int = 500,
                   contrast_grid: tuple[float, float, int] = (3.0, 6.0, 301),
                   out_dir: str | None = None,
                   threads: int = 1) -> TailStudyResult:
    """Tail misclassification for the heavy-tailed pair, scaled by n*h.

    For each replicate the rule is trained on equal samples with the simple
    rate bandwidths h_j = (normalized-IQR scale) * n^(-1/5); the tail
    integral of f beyond x0 (default: the 0.99 quantile of f) over the
    region assigned to the second population is averaged over replicates
    and multiplied by n * n^(-1/5) = n^(4/5).

    The light-tailed contrast trains on a unit normal against a normal with
    variance 1/9 and reports the fraction of grid points in the far tail
    assigned to the first (heavier-tailed, and there correct) population.
    """
    if reps < 1:
        raise ParameterError("reps must be at least 1")
    pair = make_pair("pareto", alpha=alpha, beta=beta)
    if x0 is None:
        x0 = float(pair.f.ppf(0.99))

    cells = [(i, n, rep) for i, n in enumerate(n_list) for rep in range(int(reps))]
    vals = _map_cells(
        lambda c: (c[1], c[2], _tail_integral(
            pair, c[1], np.random.SeedSequence((int(seed), c[0], c[2])), x0)),
        cells, threads)
    rows = []
    for n, rep, integral in sorted(vals, key=lambda t: (t[0], t[1])):
        rows.append({"n": n, "rep": rep, "tail_integral": integral,
                     "scaled": integral * float(n) ** 0.8})
    scaled_by_n = tuple(
        (n, float(np.mean([r["scaled"] for r in rows if r["n"] == n])))
        for n in n_list)

    contrast_pair = make_pair("contrast")
    grid = np.linspace(*contrast_grid)
    cons = _map_cells(
        lambda rep: (rep, _contrast_fraction(
            contrast_pair, contrast_n,
            np.random.SeedSequence((int(seed), len(n_list), rep)), grid)),
        list(range(int(reps))), threads)
    contrast_rows = tuple({"rep": rep, "frac_from_f": frac}
                          for rep, frac in sorted(cons))
    contrast_fraction = float(np.mean([r["frac_from_f"] for r in contrast_rows]))

    result = TailStudyResult(
        alpha=float(alpha), beta=float(beta), x0=x0, rows=tuple(rows),
        scaled_by_n=scaled_by_n, contrast_n=int(contrast_n),
        contrast_rows=contrast_rows, contrast_fraction=contrast_fraction)
    if out_dir is not None:
        _write_tail(result, out_dir)
    return result


def _write_tail(result: TailStudyResult, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "tail_replicates.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "rep", "tail_integral", "scaled"])
        for r in result.rows:
            w.writerow([r["n"], r["rep"], repr(r["tail_integral"]),
                        repr(r["scaled"])])
    with open(out / "tail_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "mean_scaled"])
        for n, v in result.scaled_by_n:
            w.writerow([n, repr(v)])
    with open(out / "tail_contrast.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rep", "frac_from_f"])
        for r in result.contrast_rows:
            w.writerow([r["rep"], repr(r["frac_from_f"])])


# ----------------------------------------------------------------------
# cross-validation negative control
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CvComparisonResult:
    """Spread comparison between the bootstrap selector and the
    cross-validation argmin over the same candidate grid."""

    pair_id: str
    n: int
    rows: tuple[dict, ...]  # rep, h1_boot, h2_boot, h1_cv, h2_cv
    iqr_log_h1_boot: float
    iqr_log_h1_cv: float

    @property
    def spread_ratio(self) -> float:
        if self.iqr_log_h1_boot == 0.0:
            return 1.0 if self.iqr_log_h1_cv == 0.0 else float("inf")
        return self.iqr_log_h1_cv / self.iqr_log_h1_boot


def _cv_argmin(x: np.ndarray, y: np.ndarray, p: float,
               grid_h1: np.ndarray, grid_h2: np.ndarray, kernel) -> tuple[float, float]:
    """Argmin of the leave-one-out error over the grid; ties go to the
    smaller h1, then the smaller h2 (row-major first minimum)."""
    surface = np.empty((grid_h1.size, grid_h2.size))
    for i, h1 in enumerate(grid_h1):
        for j, h2 in enumerate(grid_h2):
            surface[i, j] = cv_err(x, y, float(h1), float(h2), p, kernel)
    flat = int(np.argmin(surface))
    i, j = divmod(flat, grid_h2.size)
    return float(grid_h1[i]), float(grid_h2[j])


def _cv_cell(pair: DensityPair, n: int, rep: int, seed: int,
             config: SelectorConfig) -> dict:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, rep))))
    x = pair.sample("f", n, rng)
    y = pair.sample("g", n, rng)
    sel = select_bandwidths(x, y, pair.p, config, rng=rng)
    h1_cv, h2_cv = _cv_argmin(x, y, pair.p, sel.grid_h1, sel.grid_h2,
                              config.kernel)
    return {"rep": rep, "h1_boot": sel.h1, "h2_boot": sel.h2,
            "h1_cv": h1_cv, "h2_cv": h2_cv}


def run_cv_comparison(pair_id: str = "class1a", n: int = 100, reps: int = 50,
                      seed: int = 0, config: SelectorConfig | None = None,
                      out_dir: str | None = None,
                      threads: int = 1) -> CvComparisonResult:
    """Replicated head-to-head of the bootstrap selector against the
    leave-one-out argmin on the same grid and data; reports interquartile
    ranges of log selected h1 and their CV/bootstrap ratio."""
    if reps < 1:
        raise ParameterError("reps must be at least 1")
    if config is None:
        config = SelectorConfig()
    pair = make_pair(pair_id)
    rows = _map_cells(lambda rep: _cv_cell(pair, n, rep, int(seed), config),
                      list(range(int(reps))), threads)
    rows = tuple(sorted(rows, key=lambda r: r["rep"]))

    def iqr(vals):
        q75, q25 = np.percentile(vals, [75.0, 25.0])
        return float(q75 - q25)

    result = CvComparisonResult(
        pair_id=pair_id, n=int(n), rows=rows,
        iqr_log_h1_boot=iqr(np.log([r["h1_boot"] for r in rows])),
        iqr_log_h1_cv=iqr(np.log([r["h1_cv"] for r in rows])),
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{pair_id}_cv_comparison.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rep", "h1_boot", "h2_boot", "h1_cv", "h2_cv"])
            for r in rows:
                w.writerow([r["rep"], repr(r["h1_boot"]), repr(r["h2_boot"]),
                            repr(r["h1_cv"]), repr(r["h2_cv"])])
    return result
