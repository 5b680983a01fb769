"""Monte Carlo oracle for the association and capacity closed forms.

Work is cut into fixed-size chunks. Chunk ``j`` of purpose ``s`` draws from
``RandomStream(seed, s).generator(j)`` and the per-chunk partial sums are
merged in chunk order, so results are bit-identical for any worker count.

Interference fields are built once per sample index and shared by every
(case, role) link evaluated at that index. Links are therefore positively
correlated, which tightens estimated differences between them.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels, streams
from .association import AssociationSubcase, DistanceTriple, classify_array, classify_by_inequalities
from .distance import DEFINED_PAIRS, RayleighDist, sample_case_distances
from .params import NetworkParams
from .streams import RandomStream, as_generator

__all__ = [
    "ConfigurationError",
    "ScenarioSample",
    "FrequencyStats",
    "LinkStats",
    "PPPReport",
    "sample_triple_model",
    "sample_triple_ppp",
    "sample_triples_model",
    "sample_triples_ppp",
    "sample_scenario",
    "estimate_subcase_frequencies",
    "default_cutoff_radius",
    "interference_tail_bound",
    "empirical_sir_capacity",
    "empirical_case_capacities",
    "ppp_vs_model_report",
    "total_variation",
]

Z99 = 2.5758293035489004  # two-sided 99% normal quantile
FREQ_CHUNK = 1 << 17
LINK_CHUNK = 2000
TAIL_LIMIT = 1e-3
EXCLUSION_RADIUS_FACTOR = 3.0


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSample:
    triple: DistanceTriple
    subcase: AssociationSubcase
    origin: str


# --- triple samplers --------------------------------------------------------------


def sample_triples_model(params: NetworkParams, rng, n: int):
    """``(x_m, x_1, x_2)`` arrays from the independent-Rayleigh model."""
    g = as_generator(rng)
    xm = RayleighDist(params.lambda_m).sample(g, n)
    x1 = RayleighDist(params.lambda_s).sample(g, n)
    x2 = RayleighDist(params.lambda_s).sample(g, n)
    return xm, x1, x2


def sample_triple_model(params: NetworkParams, rng) -> DistanceTriple:
    xm, x1, x2 = sample_triples_model(params, rng, 1)
    return DistanceTriple(float(xm[0]), float(x1[0]), float(x2[0]))


def check_window(params: NetworkParams, level: float = 1e-6) -> None:
    """The nearest-point laws must fit inside the window with probability ``1 - level``."""
    half = params.window_side_m / 2.0
    worst = RayleighDist(min(params.lambda_m, params.lambda_s)).quantile(1.0 - level)
    if not worst < half:
        raise ConfigurationError(
            f"window side {params.window_side_m} m is too small: the 1-{level:g} nearest-point "
            f"quantile {worst:.1f} m exceeds the half side {half:.1f} m"
        )


def _nearest_in_window(g, lam, side, n, k):
    """Smallest ``k`` squared distances from the centre among Poisson points per draw.

    Draws with fewer than ``k`` points return ``inf`` in the missing slots.
    """
    counts = g.poisson(lam * side * side, n)
    total = int(counts.sum())
    xy = (g.random((total, 2)) - 0.5) * side
    r2 = np.einsum("ij,ij->i", xy, xy)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    out = np.full((k, n), np.inf)
    r2 = np.append(r2, np.inf)  # reduceat needs in-range starts for empty draws
    seg = np.repeat(np.arange(n), counts)
    for j in range(k):
        mins = np.minimum.reduceat(r2, np.minimum(starts, total))
        ok = counts > j
        out[j, ok] = mins[ok]
        if j + 1 < k:
            # drop one occurrence of each minimum
            first = np.flatnonzero(r2[:-1] == mins[seg])
            keep = np.ones(total, dtype=bool)
            _, idx = np.unique(seg[first], return_index=True)
            keep[first[idx]] = False
            r2 = np.where(np.append(keep, True), r2, np.inf)
    return out


def sample_triples_ppp(params: NetworkParams, rng, n: int):
    """Nearest MCell and two nearest SCells of homogeneous PPPs on the window.

    Returns ``(x_m, x_1, x_2, resampled)`` with ``x_1 <= x_2`` and
    ``resampled`` the number of degenerate draws that were redrawn.
    """
    check_window(params)
    g = as_generator(rng)
    side = params.window_side_m
    out = [np.empty(0)] * 3
    resampled = 0
    need = n
    while need:
        m = _nearest_in_window(g, params.lambda_m, side, need, 1)[0]
        s = _nearest_in_window(g, params.lambda_s, side, need, 2)
        good = np.isfinite(m) & np.isfinite(s[1])
        resampled += int((~good).sum())
        for i, arr in enumerate((m, s[0], s[1])):
            out[i] = np.concatenate((out[i], np.sqrt(arr[good])))
        need = n - out[0].size
    return out[0], out[1], out[2], resampled


def sample_triple_ppp(params: NetworkParams, rng) -> DistanceTriple:
    xm, x1, x2, _ = sample_triples_ppp(params, rng, 1)
    return DistanceTriple(float(xm[0]), float(x1[0]), float(x2[0]))


def sample_scenario(params: NetworkParams, rng, origin: str = "model") -> ScenarioSample:
    if origin == "model":
        t = sample_triple_model(params, rng)
    elif origin == "ppp":
        t = sample_triple_ppp(params, rng)
    else:
        raise ValueError(f"origin must be 'model' or 'ppp', got {origin!r}")
    return ScenarioSample(t, classify_by_inequalities(t, params), origin)


# --- subcase frequencies ------------------------------------------------------------


def _wilson_half_width(k, n, z=Z99):
    p = k / n
    return z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)


@dataclass(frozen=True)
class FrequencyStats:
    """Subcase counts with 99% confidence half-widths per case."""

    n: int
    subcase_counts: np.ndarray  # 12 entries, index = subcase code
    origin: str
    resampled: int = 0

    @property
    def case_counts(self) -> np.ndarray:
        return self.subcase_counts.reshape(6, 2).sum(axis=1)

    @property
    def case_freq(self) -> np.ndarray:
        return self.case_counts / self.n

    @property
    def subcase_freq(self) -> np.ndarray:
        return self.subcase_counts / self.n

    def binomial_sigma(self, p) -> np.ndarray:
        """Standard deviation of a frequency whose true probability is ``p``."""
        p = np.asarray(p, dtype=float)
        return np.sqrt(p * (1 - p) / self.n)

    @property
    def half_width_99(self) -> np.ndarray:
        return _wilson_half_width(self.case_counts, self.n)

    def aggregate(self, cases) -> tuple:
        """``(frequency, 99% half-width)`` of a union of cases."""
        k = int(sum(self.case_counts[c - 1] for c in cases))
        return k / self.n, float(_wilson_half_width(k, self.n))


def _freq_chunk(args):
    params, seed, stream_id, j, m, origin = args
    g = RandomStream(seed, stream_id).generator(j)
    if origin == "model":
        xm, x1, x2 = sample_triples_model(params, g, m)
        resampled = 0
    else:
        xm, x1, x2, resampled = sample_triples_ppp(params, g, m)
    codes = classify_array(xm, x1, x2, params.root_eta)
    if np.any(codes < 0):
        bad = int(np.flatnonzero(codes < 0)[0])
        raise RuntimeError(f"unclassifiable triple ({xm[bad]}, {x1[bad]}, {x2[bad]})")
    return np.bincount(codes, minlength=12).astype(np.int64), resampled


def _chunk_sizes(n, chunk):
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _map(fn, jobs, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _stream(rng) -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomStream(int(rng))
    raise TypeError("chunked estimators need a RandomStream or an integer seed")


def estimate_subcase_frequencies(params: NetworkParams, n: int, origin: str = "model", rng=0,
                                 workers: int = 1, chunk: int = FREQ_CHUNK) -> FrequencyStats:
    if n < 10**4:
        raise ValueError(f"sample count must be at least 10^4, got {n}")
    if origin not in ("model", "ppp"):
        raise ValueError(f"origin must be 'model' or 'ppp', got {origin!r}")
    s = _stream(rng)
    sid = streams.TRIPLES if origin == "model" else streams.PPP
    jobs = [(params, s.seed, sid, j, m, origin) for j, m in enumerate(_chunk_sizes(n, chunk))]
    parts = _map(_freq_chunk, jobs, workers)
    counts = np.zeros(12, dtype=np.int64)
    resampled = 0
    for c, r in parts:
        counts += c
        resampled += r
    return FrequencyStats(n, counts, origin, resampled)


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"distributions differ in shape: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


# --- empirical SIR and spectral efficiency ------------------------------------------


def interference_tail_bound(intensity_id: float, alpha: float, r_cut: float) -> float:
    """Expected interference from beyond ``r_cut`` at unit transmit power."""
    return 2.0 * math.pi * intensity_id * r_cut ** (2.0 - alpha) / (alpha - 2.0)


def default_cutoff_radius(intensity_id: float, alpha: float, ratio: float = TAIL_LIMIT) -> float:
    """Radius where the tail bound is ``ratio`` times the interference beyond a
    typical nearest-interferer distance ``1 / (2 sqrt(lambda_id))``."""
    d = 0.5 / math.sqrt(intensity_id)
    return d * ratio ** (-1.0 / (alpha - 2.0))


@dataclass(frozen=True)
class LinkStats:
    """Empirical SIR and spectral efficiency of one (case, role) link."""

    case_id: int
    role: object
    n: int
    mean_se: float
    se_half_width: float
    mean_sir_db: float
    sir_db_half_width: float
    mean_interference: float
    tail_bound: float
    r_cut: float
    exclusion: bool = False
    sir_db_samples: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def tail_fraction(self) -> float:
        return self.tail_bound / self.mean_interference


class _Moments:
    __slots__ = ("n", "s", "ss")

    def __init__(self):
        self.n, self.s, self.ss = 0, 0.0, 0.0

    def add(self, n, s, ss):
        self.n += n
        self.s += s
        self.ss += ss

    def mean_hw(self):
        mean = self.s / self.n
        var = max(self.ss / self.n - mean * mean, 0.0) * self.n / max(self.n - 1, 1)
        return mean, Z99 * math.sqrt(var / self.n)


def _interference_bank(g, m, intensity_id, r_cut):
    counts = g.poisson(intensity_id * math.pi * r_cut * r_cut, m).astype(np.int64)
    total = int(counts.sum())
    u = 1.0 - g.random(total)  # (0, 1]
    h = g.standard_exponential(total)
    return counts, u, h


def _link_chunk(args):
    (params, pairs, seed, j, m, r_cut, exclusion, keep) = args
    s = RandomStream(seed)
    half_alpha = params.alpha / 2.0
    lam_i = params.lambda_m + params.lambda_s
    g_int = s.child(streams.INTERFERENCE).generator(j)
    counts, u, h = _interference_bank(g_int, m, lam_i, r_cut)
    h_serv = g_int.standard_exponential(m)
    r2_cut = r_cut * r_cut
    shared = None if exclusion else _kernels.aggregate_interference(counts, u, h, r2_cut, half_alpha)
    out = {}
    by_case = {}
    for case_id, role in pairs:
        if case_id not in by_case:
            g = s.child(streams.CONDITIONAL).generator(case_id, j)
            by_case[case_id] = sample_case_distances(case_id, params, g, m).values
        x = by_case[case_id][role]
        if exclusion:
            interference = _kernels.aggregate_interference(counts, u, h, r2_cut, half_alpha, x * x)
        else:
            interference = shared
        sir = h_serv * x ** (-params.alpha) / interference
        se = np.log2(1.0 + sir)
        db = 10.0 * np.log10(sir)
        out[(case_id, role)] = (
            (m, float(se.sum()), float((se * se).sum())),
            (m, float(db.sum()), float((db * db).sum())),
            (m, float(interference.sum()), 0.0),
            db if keep else None,
        )
    return out


def empirical_case_capacities(params: NetworkParams, n: int, rng=0, pairs=DEFINED_PAIRS,
                              r_cut: float | None = None, exclusion: bool = False,
                              workers: int = 1, chunk: int = LINK_CHUNK,
                              keep_samples: bool = False) -> dict:
    """Empirical SIR statistics for several (case, role) links on shared interference fields.

    Interferers are uniform on a disc of radius ``r_cut`` around the receiver
    with unit-mean exponential fading. With ``exclusion`` set, interferers not
    farther than the serving distance are dropped.
    """
    for pair in pairs:
        if pair not in DEFINED_PAIRS:
            raise ValueError(f"no conditional law for case {pair[0]} / role {pair[1]}")
    lam_i = params.lambda_m + params.lambda_s
    if r_cut is None:
        r_cut = default_cutoff_radius(lam_i, params.alpha)
        if exclusion:
            # excluding near interferers shrinks the mean; 3x the radius cuts the tail 9x
            r_cut *= EXCLUSION_RADIUS_FACTOR
    d = 0.5 / math.sqrt(lam_i)
    if (d / r_cut) ** (params.alpha - 2.0) > TAIL_LIMIT * (1 + 1e-9):
        raise ConfigurationError(
            f"cutoff radius {r_cut:.1f} m leaves more than {TAIL_LIMIT:g} of the interference "
            f"beyond {d:.1f} m outside the disc"
        )
    s = _stream(rng)
    jobs = [(params, tuple(pairs), s.seed, j, m, r_cut, exclusion, keep_samples)
            for j, m in enumerate(_chunk_sizes(n, chunk))]
    parts = _map(_link_chunk, jobs, workers)
    tail = interference_tail_bound(lam_i, params.alpha, r_cut)
    result = {}
    for pair in pairs:
        se_m, db_m, i_m = _Moments(), _Moments(), _Moments()
        samples = []
        for part in parts:
            se, db, inter, raw = part[pair]
            se_m.add(*se)
            db_m.add(*db)
            i_m.add(*inter)
            if keep_samples:
                samples.append(raw)
        mean_se, se_hw = se_m.mean_hw()
        mean_db, db_hw = db_m.mean_hw()
        mean_i = i_m.s / i_m.n
        if tail > TAIL_LIMIT * mean_i:
            raise ConfigurationError(
                f"interference tail bound {tail:.3g} exceeds {TAIL_LIMIT:g} of the mean {mean_i:.3g}"
            )
        result[pair] = LinkStats(
            pair[0], pair[1], n, mean_se, se_hw, mean_db, db_hw, mean_i, tail, r_cut, exclusion,
            np.concatenate(samples) if keep_samples else None,
        )
    return result


def empirical_sir_capacity(case_id: int, role, params: NetworkParams, n: int, rng=0, **kwargs) -> LinkStats:
    return empirical_case_capacities(params, n, rng, pairs=((case_id, role),), **kwargs)[(case_id, role)]


# --- PPP versus model ----------------------------------------------------------------


@dataclass(frozen=True)
class PPPReport:
    n: int
    ks_mcell: object
    ks_scell: object
    tv_cases: float
    model: FrequencyStats
    ppp: FrequencyStats
    resampled: int


def ppp_vs_model_report(params: NetworkParams, n: int, rng=0, n_ks: int = 10**5) -> PPPReport:
    """KS tests of the PPP nearest-point marginals and the case-frequency TV distance."""
    s = _stream(rng)
    g = s.child(streams.PPP).generator(10**6)
    xm, x1, _, resampled = sample_triples_ppp(params, g, n_ks)
    ks_m = stats.kstest(xm, RayleighDist(params.lambda_m).cdf)
    ks_s = stats.kstest(x1, RayleighDist(params.lambda_s).cdf)
    model = estimate_subcase_frequencies(params, n, "model", s)
    ppp = estimate_subcase_frequencies(params, n, "ppp", s)
    tv = total_variation(model.case_freq, ppp.case_freq)
    return PPPReport(n, ks_m, ks_s, tv, model, ppp, resampled + ppp.resampled)

