"""Order and domination of group entries, s-properness, matrix coefficient
search, and the sample-level verdicts WU / GP / GP+ / Tr / TRe."""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .lp import LPError, linprog
from .numeric import QuadSqrt2, format_scalar, inverse, scalar_kind, to_float

CERTIFIED = "certified_on_sample"
REFUTED = "refuted_on_sample"
INCONCLUSIVE = "inconclusive"
STATUSES = (CERTIFIED, REFUTED, INCONCLUSIVE)
CONDITIONS = ("WU", "GP", "GP+", "Tr", "TRe")

DOMINATED_BELOW = 0.1
DOMINATING_ABOVE = 0.5
TOP_BUCKETS = 3
GROWTH_THRESHOLD = 0.75
ETA = 1e-3
DELTA_MIN = 1e-3
B_SCAN = (1.0, 10.0, 100.0, 1000.0)
MAX_ROUNDS = 20


@dataclass
class ConditionVerdict:
    condition: str
    status: str
    certificate: dict = field(default_factory=dict)
    sample: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.status == REFUTED

    def to_json(self) -> dict:
        return {"condition": self.condition, "status": self.status, "witness": _jsonable(self.certificate),
                "sample": _jsonable(self.sample), "evidence": _jsonable(self.evidence)}

    @classmethod
    def from_json(cls, d: dict) -> "ConditionVerdict":
        return cls(d["condition"], d["status"], d.get("witness", {}), d.get("sample", {}), d.get("evidence", {}))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, (Fraction, QuadSqrt2)):
        return format_scalar(obj, scalar_kind(obj))
    return obj


# ---------------------------------------------------------------- samples


def as_float_stack(samples) -> np.ndarray:
    """(N, n, n) float array from WordSamples or matrices."""
    mats = [getattr(s, "element", s) for s in samples]
    return np.array([to_float(np.asarray(M)) for M in mats], dtype=float)


def dyadic_buckets(norms: np.ndarray) -> np.ndarray:
    """floor(log2(norm)) per sample; norms below 1 go to bucket -inf (-10**9)."""
    norms = np.asarray(norms, dtype=float)
    out = np.full(norms.shape, -10 ** 9, dtype=np.int64)
    pos = norms >= 1.0
    out[pos] = np.floor(np.log2(norms[pos])).astype(np.int64)
    return out


def _top_buckets(norms: np.ndarray, k: int = TOP_BUCKETS) -> list[int]:
    b = dyadic_buckets(norms)
    levels = sorted({int(v) for v in b if v > -10 ** 9})
    return levels[-k:]


# ---------------------------------------------------------------- order


@dataclass
class OrderReport:
    n: int
    buckets: list[int]
    classes: dict[tuple[int, int], str]  # 1-based (i, j)
    evidence: dict[tuple[int, int], list[float]]

    def entries(self, cls: str) -> set[tuple[int, int]]:
        return {ij for ij, c in self.classes.items() if c == cls}

    @property
    def dominating(self) -> set[tuple[int, int]]:
        return self.entries("dominating")

    @property
    def dominated(self) -> set[tuple[int, int]]:
        return self.entries("dominated")

    @property
    def indeterminate(self) -> set[tuple[int, int]]:
        return self.entries("indeterminate")

    def to_json(self) -> dict:
        return {
            "buckets": self.buckets,
            "dominating": sorted(map(list, self.dominating)),
            "dominated": sorted(map(list, self.dominated)),
            "indeterminate": sorted(map(list, self.indeterminate)),
            "ratios": {f"{i},{j}": v for (i, j), v in sorted(self.evidence.items())},
        }


def domination_analysis(samples) -> OrderReport:
    """Classify entries by their ratio to the max entry across the top dyadic norm buckets."""
    G = samples if isinstance(samples, np.ndarray) and samples.ndim == 3 else as_float_stack(samples)
    N, n, _ = G.shape
    A = np.abs(G)
    norms = A.reshape(N, -1).max(axis=1)
    top = _top_buckets(norms)
    ij = [(i + 1, j + 1) for i in range(n) for j in range(n)]
    if len(top) < TOP_BUCKETS:
        return OrderReport(n, top, {e: "indeterminate" for e in ij}, {e: [] for e in ij})
    b = dyadic_buckets(norms)
    ratios = np.zeros((len(top), n, n))
    for k, lev in enumerate(top):
        sel = b == lev
        ratios[k] = (A[sel] / norms[sel, None, None]).max(axis=0)
    classes, evidence = {}, {}
    for i in range(n):
        for j in range(n):
            r = ratios[:, i, j]
            evidence[(i + 1, j + 1)] = [float(v) for v in r]
            if np.any(r > DOMINATING_ABOVE):
                classes[(i + 1, j + 1)] = "dominating"
            elif np.all(np.diff(r) <= 1e-12) and r[-1] < DOMINATED_BELOW:
                classes[(i + 1, j + 1)] = "dominated"
            else:
                classes[(i + 1, j + 1)] = "indeterminate"
    return OrderReport(n, top, classes, evidence)


def sproper_test(values, sizes) -> str:
    """s-properness of a sampled function, bucketing samples by ``sizes``."""
    values = np.asarray(values, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    top = _top_buckets(sizes)
    if not top:
        return INCONCLUSIVE
    b = dyadic_buckets(sizes)
    last = values[b == top[-1]]
    if np.any(last > 0) and np.any(last < 0):
        return "not_s_proper"
    if len(top) < TOP_BUCKETS:
        return INCONCLUSIVE
    mins = [values[b == lev].min() for lev in top]
    maxs = [values[b == lev].max() for lev in top]
    if np.all(last > 0) and all(y > x for x, y in zip(mins, mins[1:])):
        return "s_proper_up"
    if np.all(last < 0) and all(y < x for x, y in zip(maxs, maxs[1:])):
        return "s_proper_down"
    return INCONCLUSIVE


# ---------------------------------------------------------------- witnesses


@dataclass
class CoefficientWitness:
    alpha: np.ndarray
    x: np.ndarray
    delta: float
    epsilon: float
    eta: float
    B: float

    def to_json(self) -> dict:
        d = asdict(self)
        d["alpha"] = np.asarray(self.alpha, dtype=float).tolist()
        d["x"] = np.asarray(self.x, dtype=float).tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "CoefficientWitness":
        return cls(np.asarray(d["alpha"], float), np.asarray(d["x"], float),
                   float(d["delta"]), float(d["epsilon"]), float(d["eta"]), float(d["B"]))


def robustness(G: np.ndarray, alpha, x, eta: float = ETA) -> np.ndarray:
    """Bound on |change of alpha(gamma x)| when alpha, x move by eta times their max entry."""
    scale = float(np.max(np.abs(alpha))) * float(np.max(np.abs(x)))
    return (2 * eta + eta ** 2) * scale * np.abs(G).sum(axis=(1, 2))


def validate_witness(alpha, x, samples, require_positive: bool = True, eta: float = ETA) -> dict:
    """Replay a matrix coefficient on samples and compute its margins.

    delta and epsilon are measured after subtracting the eta-robustness
    term; epsilon is normalized by max|alpha| * max|x| and uses the top
    dyadic bucket of sample norms.
    """
    G = samples if isinstance(samples, np.ndarray) and samples.ndim == 3 else as_float_stack(samples)
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    vals = np.einsum("i,nij,j->n", alpha, G, x)
    r = robustness(G, alpha, x, eta)
    norms = np.abs(G).reshape(len(G), -1).max(axis=1)
    scale = float(np.max(np.abs(alpha))) * float(np.max(np.abs(x)))
    top = _top_buckets(norms, 1)
    far = dyadic_buckets(norms) == top[-1] if top else np.zeros(len(G), bool)
    net = vals - r
    delta = float(net.min())
    eps = float(np.min(net[far] / (scale * norms[far]))) if far.any() else float("nan")
    B = float(max(0.0, np.max(eps * scale * norms - net))) if math.isfinite(eps) else float("nan")
    ok = (delta > 0 if require_positive else True) and math.isfinite(eps) and eps > 0
    return {"values": vals, "delta": delta, "epsilon": eps, "B": B, "eta": eta, "valid": bool(ok),
            "min_value": float(vals.min())}


def _solve_growth(V: np.ndarray, r: np.ndarray, norms: np.ndarray, far: np.ndarray,
                  rng: np.random.Generator, cap: float = 10.0):
    """max eps s.t. V z - r >= DELTA_MIN, (V z - r) >= eps * norm on far rows, |z| <= 1.

    Rows are scaled by max(1, norm). Solved by constraint generation.
    Returns (z, eps) or None when the positivity constraints are infeasible.
    """
    N, m = V.shape
    scale = np.maximum(1.0, norms)
    Vs, rs, ns = V / scale[:, None], r / scale, norms / scale
    pos_rhs = (DELTA_MIN + r) / scale
    far_idx = np.flatnonzero(far)
    init = set(rng.choice(N, size=min(N, 64), replace=False).tolist())
    init |= set(far_idx[np.argsort(-norms[far_idx])[:32]].tolist())
    init |= {int(np.argmin(norms))}
    active = sorted(init)
    for _ in range(200):
        act = np.array(active)
        act_far = act[far[act]]
        A = np.vstack([np.hstack([-Vs[act], np.zeros((len(act), 1))]),
                       np.hstack([-Vs[act_far], ns[act_far, None]])])
        b = np.concatenate([-pos_rhs[act], -rs[act_far]])
        c = np.zeros(m + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=A, b_ub=b, bounds=[(-1.0, 1.0)] * m + [(None, cap)])
        if res.status != "optimal":
            return None
        z, eps = res.x[:m], res.x[-1]
        val = Vs @ z
        viol_pos = pos_rhs - val
        viol_far = np.where(far, eps * ns + rs - val, -np.inf)
        viol = np.maximum(viol_pos, viol_far)
        bad = np.flatnonzero(viol > 1e-9)
        bad = [i for i in bad[np.argsort(-viol[bad])] if i not in init][:128]
        if not bad:
            return z, float(eps)
        init.update(bad)
        active = sorted(init)
    return None


def _relaxation_feasible(G: np.ndarray, norms: np.ndarray, far: np.ndarray, B: float,
                         rng: np.random.Generator) -> bool:
    """Is there M in [-1,1]^{n x n} with <M,g> >= -B for all g and >= GROWTH_THRESHOLD |g| on far g?"""
    N, n, _ = G.shape
    F = G.reshape(N, -1)
    scale = np.maximum(1.0, norms)
    Fs = F / scale[:, None]
    rhs = np.where(far, GROWTH_THRESHOLD * norms, -B) / scale
    far_idx = np.flatnonzero(far)
    init = set(far_idx.tolist()[:256]) | set(rng.choice(N, size=min(N, 64), replace=False).tolist())
    for _ in range(200):
        act = np.array(sorted(init))
        res = linprog(np.zeros(n * n), A_ub=-Fs[act], b_ub=-rhs[act], bounds=[(-1.0, 1.0)] * (n * n))
        if res.status == "infeasible":
            return False
        viol = rhs - Fs @ res.x
        bad = np.flatnonzero(viol > 1e-9)
        bad = [i for i in bad[np.argsort(-viol[bad])] if i not in init][:128]
        if not bad:
            return True
        init.update(bad)
    return True


def find_positive_generic_coefficient(samples, basis=None, seed: int = 0,
                                      eta: float = ETA, meta: dict | None = None) -> ConditionVerdict:
    """(GP+) search on the sample.

    With ``basis`` (columns, first vector the fixed point p from a certified
    (Tr)) the search first fixes alpha = e_1^* in that basis and solves for
    x; otherwise, or if that fails, alternating LPs over (alpha, x).
    """
    rng = np.random.default_rng(seed)
    G = as_float_stack(samples)
    meta = dict(meta or {}, count=len(G))
    N, n, _ = G.shape
    norms = np.abs(G).reshape(N, -1).max(axis=1)
    top = _top_buckets(norms)
    if len(top) < TOP_BUCKETS:
        return ConditionVerdict("GP+", INCONCLUSIVE, {"reason": "samples do not reach three dyadic norm buckets"}, meta)
    far = dyadic_buckets(norms) == top[-1]
    r = (2 * eta + eta ** 2) * np.abs(G).sum(axis=(1, 2))
    tried = []
    best = None

    def consider(alpha, x, route):
        nonlocal best
        v = validate_witness(alpha, x, G, True, eta)
        tried.append({"route": route, "epsilon": v["epsilon"], "delta": v["delta"]})
        if best is None or v["epsilon"] > best[2]["epsilon"]:
            best = (alpha, x, v, route)
        return v["delta"] > 0 and v["epsilon"] >= GROWTH_THRESHOLD

    try:
        if basis is not None:
            Bf = to_float(basis)
            Binv = to_float(inverse(basis))
            Gb = Binv[None] @ G @ Bf[None]
            sol = _solve_growth(Gb[:, 0, :], r_basis(Gb, eta), norms_of(Gb), far_of(Gb), rng)
            if sol is not None:
                alpha, x = Binv[0], Bf @ sol[0]
                if consider(alpha, x, "top-row shortcut"):
                    return _certified(best, meta, tried)
        starts = [np.eye(n)[i] for i in range(n)] + [np.ones(n)]
        for a0 in starts:
            alpha = a0
            prev = -np.inf
            for _ in range(MAX_ROUNDS):
                sol = _solve_growth(np.einsum("i,nij->nj", alpha, G), r, norms, far, rng)
                if sol is None:
                    break
                x = sol[0]
                sol = _solve_growth(np.einsum("nij,j->ni", G, x), r, norms, far, rng)
                if sol is None:
                    break
                alpha, eps = sol
                if consider(alpha, x, "alternating"):
                    return _certified(best, meta, tried)
                if eps <= prev + 1e-6:
                    break
                prev = eps
    except LPError as exc:
        return ConditionVerdict("GP+", INCONCLUSIVE, {"reason": f"LP budget exceeded: {exc}"}, meta,
                                {"attempts": tried})
    scanned = []
    for B in B_SCAN:
        feas = _relaxation_feasible(G, norms, far, B, rng)
        scanned.append({"B": B, "feasible": feas})
        if feas:
            ev = {"attempts": tried, "relaxation": scanned}
            if best is not None:
                ev["best_epsilon"] = best[2]["epsilon"]
            return ConditionVerdict("GP+", INCONCLUSIVE, {"reason": "no witness reached the growth threshold"},
                                    meta, ev)
    cert = {
        "relaxation": "M in [-1,1]^(n x n): <M,g> >= -B on all samples, <M,g> >= "
                      f"{GROWTH_THRESHOLD} max|g| on the top norm bucket",
        "B_scanned": list(B_SCAN),
        "infeasible": True,
        "far_bucket": int(top[-1]),
        "far_count": int(far.sum()),
        "note": "nonexistence is proven only for witnesses normalized to max|alpha|*max|x| = 1 "
                "meeting these sampled constraints",
    }
    return ConditionVerdict("GP+", REFUTED, cert, meta, {"attempts": tried, "relaxation": scanned})


def norms_of(G: np.ndarray) -> np.ndarray:
    return np.abs(G).reshape(len(G), -1).max(axis=1)


def far_of(G: np.ndarray) -> np.ndarray:
    nrm = norms_of(G)
    return dyadic_buckets(nrm) == _top_buckets(nrm, 1)[-1]


def r_basis(G: np.ndarray, eta: float) -> np.ndarray:
    return (2 * eta + eta ** 2) * np.abs(G).sum(axis=(1, 2))


def _certified(best, meta, tried) -> ConditionVerdict:
    alpha, x, v, route = best
    w = CoefficientWitness(alpha, x, v["delta"], v["epsilon"], v["eta"], v["B"])
    return ConditionVerdict("GP+", CERTIFIED, {"witness": w.to_json(), "route": route}, meta,
                            {"attempts": tried, "growth_threshold": GROWTH_THRESHOLD})


# ---------------------------------------------------------------- Tr / TRe


def _fixed_data(G):
    from .groups import FixedSpaces, fixed_pair

    fp = fixed_pair(G)
    if fp is None:
        return None, []
    if isinstance(fp, FixedSpaces):
        return fp, fp.candidate_pairs()
    return fp, [(fp.p_vec, fp.phi_vec)]


def _no_pair_verdict(cond: str, G, fp, meta) -> ConditionVerdict:
    if G.exact:
        reason = ("no common fixed vector and covector with phi(p) = 0"
                  if fp is None else "fixed subspaces contain no incident pair")
        return ConditionVerdict(cond, REFUTED, {"reason": reason, "exact": True}, meta)
    return ConditionVerdict(cond, INCONCLUSIVE, {"reason": "no fixed pair found in floating point"}, meta)


def _in_basis(samples, B) -> np.ndarray:
    G = as_float_stack(samples)
    Bf = to_float(B)
    return np.linalg.inv(Bf)[None] @ G @ Bf[None]


def _pair_json(p, phi) -> dict:
    return {"p": to_float(p).tolist(), "phi": to_float(phi).tolist()}


def check_condition_Tr(G, samples, meta: dict | None = None) -> ConditionVerdict:
    """All dominating entries in the top row of a basis starting with p."""
    from .groups import adapted_basis

    meta = dict(meta or {}, count=len(samples))
    fp, pairs = _fixed_data(G)
    if not pairs:
        return _no_pair_verdict("Tr", G, fp, meta)
    choices = []
    for p, phi in pairs:
        B = adapted_basis(p)
        rep = domination_analysis(_in_basis(samples, B))
        dom = rep.dominating
        off = sorted(e for e in dom if e[0] != 1)
        ok = bool(dom) and not off
        choices.append((ok, p, phi, B, rep, off))
    good = [c for c in choices if c[0]]
    if good:
        _, p, phi, B, rep, _ = good[0]
        cert = {**_pair_json(p, phi), "basis": to_float(B).tolist(),
                "dominating": sorted(map(list, rep.dominating)),
                "compatible_choices": [_pair_json(c[1], c[2]) for c in good]}
        return ConditionVerdict("Tr", CERTIFIED, cert, meta, {"order": rep.to_json()})
    _, p, phi, B, rep, off = choices[0]
    if all(len(c[4].buckets) < TOP_BUCKETS for c in choices):
        return ConditionVerdict("Tr", INCONCLUSIVE, {"reason": "samples do not reach three dyadic norm buckets"},
                                meta, {"order": rep.to_json()})
    cert = {**_pair_json(p, phi), "basis": to_float(B).tolist(),
            "offending": [list(e) for e in off],
            "row1_dominating": sorted(list(e) for e in rep.dominating if e[0] == 1)}
    return ConditionVerdict("Tr", REFUTED, cert, meta, {"order": rep.to_json()})


def check_condition_TRe(G, samples, meta: dict | None = None) -> ConditionVerdict:
    """Top-right entry is the only dominating one and has constant sign far out."""
    from .groups import adapted_basis

    meta = dict(meta or {}, count=len(samples))
    fp, pairs = _fixed_data(G)
    if not pairs:
        return _no_pair_verdict("TRe", G, fp, meta)
    results = []
    for p, phi in pairs:
        B = adapted_basis(p, phi)
        Gb = _in_basis(samples, B)
        rep = domination_analysis(Gb)
        n = rep.n
        if len(rep.buckets) < TOP_BUCKETS:
            results.append((INCONCLUSIVE, p, phi, B, rep, {"reason": "samples do not reach three dyadic norm buckets"}))
            continue
        norms = norms_of(Gb)
        top = dyadic_buckets(norms) == rep.buckets[-1]
        corner = Gb[top, 0, n - 1]
        signs = sorted({int(s) for s in np.sign(corner)})
        sole = rep.dominating == {(1, n)}
        constant = signs in ([1], [-1])
        info = {**_pair_json(p, phi), "basis": to_float(B).tolist(),
                "dominating": sorted(map(list, rep.dominating)), "corner_signs": signs}
        results.append((CERTIFIED if sole and constant else REFUTED, p, phi, B, rep, info))
    for status in (CERTIFIED, REFUTED, INCONCLUSIVE):
        for st, p, phi, B, rep, info in results:
            if st == status:
                return ConditionVerdict("TRe", st, info, meta, {"order": rep.to_json()})
    raise AssertionError("unreachable")


# ---------------------------------------------------------------- summary


@dataclass
class HolonomyVerdict:
    summary: str
    verdicts: dict[str, ConditionVerdict]
    sample: dict

    def to_json(self) -> dict:
        return {"summary": self.summary, "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
                "sample": self.sample}


def summarize(verdicts: dict[str, ConditionVerdict]) -> str:
    """Combine statuses; weak unipotence gates every positive summary."""
    st = {k: v.status for k, v in verdicts.items()}
    if st["WU"] == REFUTED:
        return "none"
    if st["TRe"] == CERTIFIED:
        return "round_candidate"
    if st["GP"] == CERTIFIED and st["Tr"] == CERTIFIED:
        return "strictly_convex_candidate"
    if st["GP+"] == CERTIFIED and st["WU"] == CERTIFIED:
        return "preserves_domain_candidate"
    return "none"


def condition_verdicts(G, samples, seed: int = 0, meta: dict | None = None) -> dict[str, ConditionVerdict]:
    from .groups import weakly_unipotent_check

    meta = dict(meta or {})
    wu = weakly_unipotent_check(samples, group=G)
    wu.sample.update(meta)
    tr = check_condition_Tr(G, samples, meta)
    tre = check_condition_TRe(G, samples, meta)
    basis = None
    if tr.certified:
        basis = np.array(tr.certificate["basis"], dtype=float)
    gpp = find_positive_generic_coefficient(samples, basis=basis, seed=seed, meta=meta)
    if gpp.certified:
        gp = ConditionVerdict("GP", CERTIFIED, {"via": "GP+", **gpp.certificate}, gpp.sample)
    elif gpp.refuted:
        gp = ConditionVerdict("GP", REFUTED, {"via": "GP+ relaxation (sign-symmetric box)", **gpp.certificate},
                              gpp.sample)
    else:
        gp = ConditionVerdict("GP", INCONCLUSIVE, {"via": "GP+", "reason": "only checked through GP+"}, gpp.sample)
    return {"WU": wu, "GP": gp, "GP+": gpp, "Tr": tr, "TRe": tre}


def cusp_holonomy_verdict(G, L: int, seed: int = 0, samples=None) -> HolonomyVerdict:
    from .groups import enumerate_words

    samples = enumerate_words(G, L) if samples is None else samples
    meta = {"L": L, "count": len(samples)}
    verdicts = condition_verdicts(G, samples, seed, meta)
    return HolonomyVerdict(summarize(verdicts), verdicts, meta)
