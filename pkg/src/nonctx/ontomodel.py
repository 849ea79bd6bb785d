"""Finite ontological models over finite operational scenarios.

A scenario fixes the operational data: a Hilbert space dimension, declared
preparations (optionally as convex mixtures of other declared preparations),
measurements, optional transformations, and the probability table they
generate.  A model supplies an ontic space Lambda, one probability measure
per preparation, one response function per measurement and one stochastic
kernel per transformation, and is judged by whether

    Pr(k | P, T, M) = sum_{l, l'} mu_P(l) Gamma_T(l' | l) xi_M(k | l')

holds for every table entry.

Supports use an absolute threshold (default 1e-12): possibilistic claims are
claims about exact zeros, and the threshold only absorbs float dust.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    MAX_DIM,
    TOL_PROB,
    Channel,
    DensityMatrix,
    Measurement,
    born_probability,
)

SUPPORT_THRESHOLD = 1e-12

__all__ = [
    "SUPPORT_THRESHOLD",
    "OnticSpace",
    "PreparationMeasure",
    "ResponseFunction",
    "TransformationKernel",
    "SupportSet",
    "Scenario",
    "OntologicalModel",
    "ReproductionReport",
    "FaithfulnessReport",
    "predict",
    "reproduces",
    "validate_binding",
    "support_of",
    "response_sets",
    "transformation_support",
    "beltrametti_bugajski",
    "epsilon_bb_model",
    "is_faithful",
]


class OnticSpace:
    """Finite set of ontic states, addressed by index and by label."""

    def __init__(self, labels):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise ValueError("ontic space must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValueError("ontic labels must be distinct")
        self.labels = labels

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __repr__(self) -> str:
        return "OnticSpace(size=%d)" % self.size


class PreparationMeasure:
    """Probability measure over an ontic space."""

    def __init__(self, weights, *, tol: float = TOL_PROB):
        w = np.array(weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise ValueError("measure needs at least one weight")
        if float(w.min()) < -tol:
            raise ValueError("measure has a negative weight: %.3e" % w.min())
        total = float(w.sum())
        if abs(total - 1.0) > tol:
            raise ValueError("measure weights sum to %.12f, expected 1" % total)
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        self.weights = w

    @property
    def size(self) -> int:
        return self.weights.size

    def __repr__(self) -> str:
        return "PreparationMeasure(size=%d)" % self.size


class ResponseFunction:
    """Row-stochastic table xi[l, k] = Pr(outcome k | ontic state l)."""

    def __init__(self, table, labels=None, *, tol: float = TOL_PROB):
        t = np.array(table, dtype=float)
        if t.ndim != 2:
            raise ValueError("response table must be 2-d (ontic x outcomes)")
        if float(t.min()) < -tol or float(t.max()) > 1.0 + tol:
            raise ValueError("response values must lie in [0, 1]")
        sums = t.sum(axis=1)
        if float(np.max(np.abs(sums - 1.0))) > tol * t.shape[1]:
            raise ValueError("each ontic state must assign total probability 1")
        t = np.clip(t, 0.0, 1.0)
        t.setflags(write=False)
        self.table = t
        if labels is None:
            labels = tuple(str(k) for k in range(t.shape[1]))
        self.labels = tuple(str(x) for x in labels)
        if len(self.labels) != t.shape[1]:
            raise ValueError("outcome labels must match the table width")

    @property
    def n_outcomes(self) -> int:
        return self.table.shape[1]

    def __repr__(self) -> str:
        return "ResponseFunction(%dx%d)" % self.table.shape


class TransformationKernel:
    """Column-stochastic kernel Gamma[l', l] = Pr(l' | l)."""

    def __init__(self, matrix, *, tol: float = TOL_PROB):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("kernel must be square (target x source)")
        if float(m.min()) < -tol:
            raise ValueError("kernel has a negative entry")
        sums = m.sum(axis=0)
        if float(np.max(np.abs(sums - 1.0))) > tol * m.shape[0]:
            raise ValueError("each source column must sum to 1")
        m = np.clip(m, 0.0, None)
        m.setflags(write=False)
        self.matrix = m

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return "TransformationKernel(size=%d)" % self.size


@dataclass(frozen=True)
class SupportSet:
    """Thresholded support: which ontic states carry weight."""

    flags: tuple
    threshold: float

    @property
    def size(self) -> int:
        return len(self.flags)

    def indices(self) -> tuple:
        return tuple(i for i, f in enumerate(self.flags) if f)

    def labels(self, space: OnticSpace) -> tuple:
        return tuple(space.labels[i] for i in self.indices())

    def is_empty(self) -> bool:
        return not any(self.flags)

    def __contains__(self, index: int) -> bool:
        return bool(self.flags[index])

    def _check(self, other: "SupportSet") -> None:
        if len(self.flags) != len(other.flags):
            raise ValueError("support sets live on different ontic spaces")

    def union(self, other: "SupportSet") -> "SupportSet":
        self._check(other)
        return SupportSet(tuple(a or b for a, b in zip(self.flags, other.flags)),
                          self.threshold)

    def intersection(self, other: "SupportSet") -> "SupportSet":
        self._check(other)
        return SupportSet(tuple(a and b for a, b in zip(self.flags, other.flags)),
                          self.threshold)

    def issubset(self, other: "SupportSet") -> bool:
        self._check(other)
        return all(b or not a for a, b in zip(self.flags, other.flags))

    def isdisjoint(self, other: "SupportSet") -> bool:
        self._check(other)
        return not any(a and b for a, b in zip(self.flags, other.flags))

    def same_set(self, other: "SupportSet") -> bool:
        self._check(other)
        return self.flags == other.flags


def support_of(measure: PreparationMeasure,
               threshold: float = SUPPORT_THRESHOLD) -> SupportSet:
    return SupportSet(tuple(bool(w > threshold) for w in measure.weights),
                      threshold)


def response_sets(xi: ResponseFunction, k: int,
                  threshold: float = SUPPORT_THRESHOLD):
    """Certainty set R and possibility set T for outcome k.

    R collects ontic states where the outcome fires with probability one
    (within threshold), T those where it fires with any nonzero probability.
    """
    col = xi.table[:, k]
    r = SupportSet(tuple(bool(v >= 1.0 - threshold) for v in col), threshold)
    t = SupportSet(tuple(bool(v > threshold) for v in col), threshold)
    return r, t


def transformation_support(kernel: TransformationKernel,
                           threshold: float = SUPPORT_THRESHOLD) -> frozenset:
    """Set of (source, target) index pairs the kernel can traverse."""
    m = kernel.matrix
    return frozenset((l, lp) for l in range(m.shape[1])
                     for lp in range(m.shape[0]) if m[lp, l] > threshold)


class Scenario:
    """Finite operational scenario backed by quantum objects.

    Parameters
    ----------
    d : Hilbert space dimension (capped at 64).
    preparations : ordered mapping id -> DensityMatrix, or id -> (DensityMatrix,
        mixture) where mixture is a sequence of (component id, weight) pairs
        declaring the preparation as a convex mixture of other declared
        preparations.
    measurements : ordered mapping id -> Measurement.
    transformations : optional ordered mapping id -> Channel (square, same d).
    table : optional explicit probability table {(prep, trans|None, meas):
        probs}; when omitted it is derived from the Born rule.  An explicit
        table must agree with the Born rule within tol_prob.
    factors : optional mapping meas_id -> list of factor label groups for
        product measurements; outcome j corresponds to the row-major tuple of
        factor labels.  Used by the feasibility search.
    """

    def __init__(self, d: int, preparations, measurements, transformations=None,
                 table=None, factors=None, *, tol_prob: float = TOL_PROB):
        if not 1 <= d <= MAX_DIM:
            raise ValueError("dimension must lie in [1, %d]" % MAX_DIM)
        self.d = d
        self.tol_prob = tol_prob

        self.preparations = {}
        self.mixtures = {}
        for pid, value in dict(preparations).items():
            pid = str(pid)
            if isinstance(value, tuple) and len(value) == 2 and not isinstance(
                    value[0], (int, float)):
                density, mixture = value
            else:
                density, mixture = value, None
            if not isinstance(density, DensityMatrix):
                density = DensityMatrix(density)
            if density.d != d:
                raise ValueError("preparation %r has wrong dimension" % pid)
            self.preparations[pid] = density
            if mixture is not None:
                mix = tuple((str(cid), float(w)) for cid, w in mixture)
                if not mix:
                    raise ValueError("empty mixture for %r" % pid)
                self.mixtures[pid] = mix

        if not self.preparations:
            raise ValueError("scenario needs at least one preparation")

        for pid, mix in self.mixtures.items():
            weights = [w for _, w in mix]
            if any(w < -tol_prob for w in weights):
                raise ValueError("mixture %r has a negative weight" % pid)
            if abs(sum(weights) - 1.0) > tol_prob:
                raise ValueError("mixture %r weights do not sum to 1" % pid)
            for cid, _ in mix:
                if cid not in self.preparations:
                    raise ValueError(
                        "mixture %r references unknown preparation %r" % (pid, cid))
            blend = sum(w * self.preparations[cid].mat for cid, w in mix)
            if float(np.max(np.abs(blend - self.preparations[pid].mat))) > tol_prob:
                raise ValueError(
                    "mixture %r density does not match its declared components"
                    % pid)
        self._check_mixture_acyclic()

        self.measurements = {}
        for mid, meas in dict(measurements).items():
            if not isinstance(meas, Measurement):
                meas = Measurement(meas)
            if meas.d != d:
                raise ValueError("measurement %r has wrong dimension" % mid)
            self.measurements[str(mid)] = meas
        if not self.measurements:
            raise ValueError("scenario needs at least one measurement")

        self.transformations = {}
        for tid, ch in dict(transformations or {}).items():
            if not isinstance(ch, Channel):
                ch = Channel(ch)
            if ch.d_in != d or ch.d_out != d:
                raise ValueError("transformation %r must be %dx%d" % (tid, d, d))
            self.transformations[str(tid)] = ch

        self.factors = {}
        for mid, groups in dict(factors or {}).items():
            mid = str(mid)
            if mid not in self.measurements:
                raise ValueError("factors declared for unknown measurement %r" % mid)
            groups = tuple(tuple(str(x) for x in g) for g in groups)
            if any(len(set(g)) != len(g) or not g for g in groups):
                raise ValueError("factor groups must be nonempty and distinct")
            n = 1
            for g in groups:
                n *= len(g)
            if n != self.measurements[mid].n_outcomes:
                raise ValueError(
                    "factor product size %d does not match outcomes of %r"
                    % (n, mid))
            self.factors[mid] = groups
        self._check_factor_groups()

        derived = self._derive_table()
        if table is None:
            self.table = derived
        else:
            self.table = {}
            for key, probs in table.items():
                pid, tid, mid = key
                key = (str(pid), None if tid is None else str(tid), str(mid))
                if key not in derived:
                    raise ValueError("table key %r does not match the scenario"
                                     % (key,))
                probs = tuple(float(p) for p in probs)
                if len(probs) != len(derived[key]):
                    raise ValueError("table row %r has wrong width" % (key,))
                dev = max(abs(a - b) for a, b in zip(probs, derived[key]))
                if dev > tol_prob:
                    raise ValueError(
                        "explicit table deviates from the Born rule by %.3e "
                        "at %r" % (dev, key))
                self.table[key] = probs
            if set(self.table) != set(derived):
                raise ValueError("explicit table must cover every context")

    def _check_mixture_acyclic(self) -> None:
        state = {}

        def visit(pid):
            if state.get(pid) == 1:
                raise ValueError("mixture declarations contain a cycle at %r" % pid)
            if state.get(pid) == 2:
                return
            state[pid] = 1
            for cid, _ in self.mixtures.get(pid, ()):
                visit(cid)
            state[pid] = 2

        for pid in self.mixtures:
            visit(pid)

    def _check_factor_groups(self) -> None:
        seen = {}
        for mid, groups in self.factors.items():
            for pos, g in enumerate(groups):
                for label in g:
                    group = frozenset(g)
                    if label in seen and seen[label] != group:
                        raise ValueError(
                            "factor label %r appears with inconsistent groups"
                            % label)
                    seen[label] = group

    def _derive_table(self):
        table = {}
        trans_ids = [None] + list(self.transformations)
        for pid, rho in self.preparations.items():
            for tid in trans_ids:
                state = rho.mat if tid is None else \
                    self.transformations[tid].apply(rho.mat)
                for mid, meas in self.measurements.items():
                    table[(pid, tid, mid)] = tuple(
                        born_probability(state, e.mat) for e in meas.effects)
        return table

    # -- mixture helpers -------------------------------------------------

    def is_mixture(self, pid: str) -> bool:
        return pid in self.mixtures

    def atomic_preparations(self) -> tuple:
        return tuple(p for p in self.preparations if p not in self.mixtures)

    def atomic_components(self, pid: str) -> dict:
        """Flatten nested mixture declarations to atomic id -> weight."""
        if pid not in self.preparations:
            raise ValueError("unknown preparation %r" % pid)
        if pid not in self.mixtures:
            return {pid: 1.0}
        out: dict = {}
        for cid, w in self.mixtures[pid]:
            for aid, aw in self.atomic_components(cid).items():
                out[aid] = out.get(aid, 0.0) + w * aw
        return out

    def __repr__(self) -> str:
        return "Scenario(d=%d, preps=%d, meas=%d, trans=%d)" % (
            self.d, len(self.preparations), len(self.measurements),
            len(self.transformations))


class OntologicalModel:
    """Measures, responses and kernels over a shared finite ontic space."""

    def __init__(self, space: OnticSpace, preps, responses, kernels=None):
        self.space = space
        n = space.size
        self.preps = {}
        for pid, mu in dict(preps).items():
            if not isinstance(mu, PreparationMeasure):
                mu = PreparationMeasure(mu)
            if mu.size != n:
                raise ValueError("measure for %r has wrong size" % pid)
            self.preps[str(pid)] = mu
        self.responses = {}
        for mid, xi in dict(responses).items():
            if not isinstance(xi, ResponseFunction):
                xi = ResponseFunction(xi)
            if xi.table.shape[0] != n:
                raise ValueError("response for %r has wrong size" % mid)
            self.responses[str(mid)] = xi
        self.kernels = {}
        for tid, ker in dict(kernels or {}).items():
            if not isinstance(ker, TransformationKernel):
                ker = TransformationKernel(ker)
            if ker.size != n:
                raise ValueError("kernel for %r has wrong size" % tid)
            self.kernels[str(tid)] = ker

    def __repr__(self) -> str:
        return "OntologicalModel(|Lambda|=%d, preps=%d, meas=%d, trans=%d)" % (
            self.space.size, len(self.preps), len(self.responses),
            len(self.kernels))


@dataclass(frozen=True)
class ReproductionReport:
    ok: bool
    worst_deviation: float
    offending: tuple | None


@dataclass(frozen=True)
class FaithfulnessReport:
    ok: bool
    offending: tuple | None


def validate_binding(model: OntologicalModel, scenario: Scenario,
                     *, tol_prob: float = TOL_PROB) -> None:
    """Structural fit of a model to a scenario.

    Checks id coverage and that every declared mixture's measure is the
    declared convex mixture of its components' measures (the convexity
    assumption).  Raises ValueError on the first problem.
    """
    for pid in scenario.preparations:
        if pid not in model.preps:
            raise ValueError("model lacks a measure for preparation %r" % pid)
    for mid in scenario.measurements:
        if mid not in model.responses:
            raise ValueError("model lacks a response function for %r" % mid)
        if model.responses[mid].n_outcomes != \
                scenario.measurements[mid].n_outcomes:
            raise ValueError("response for %r has wrong outcome count" % mid)
    for tid in scenario.transformations:
        if tid not in model.kernels:
            raise ValueError("model lacks a kernel for transformation %r" % tid)
    for pid, mix in scenario.mixtures.items():
        blend = np.zeros(model.space.size)
        for cid, w in mix:
            blend = blend + w * model.preps[cid].weights
        dev = float(np.max(np.abs(blend - model.preps[pid].weights)))
        if dev > tol_prob * max(1, len(mix)):
            raise ValueError(
                "measure for mixture %r deviates from the convex mixture of "
                "its components by %.3e" % (pid, dev))


def predict(model: OntologicalModel, prep_id: str, trans_id, meas_id: str,
            k: int) -> float:
    """Model probability for one outcome of one context."""
    mu = model.preps[prep_id].weights
    if trans_id is not None:
        mu = model.kernels[trans_id].matrix @ mu
    xi = model.responses[meas_id].table
    return float(xi[:, k] @ mu)


def reproduces(model: OntologicalModel, scenario: Scenario,
               tol: float = 1e-9) -> ReproductionReport:
    """Check the reproduction condition on every table entry."""
    validate_binding(model, scenario)
    worst = 0.0
    offender = None
    for (pid, tid, mid), probs in scenario.table.items():
        mu = model.preps[pid].weights
        if tid is not None:
            mu = model.kernels[tid].matrix @ mu
        got = model.responses[mid].table.T @ mu
        for k, want in enumerate(probs):
            dev = abs(float(got[k]) - want)
            if dev > worst:
                worst = dev
                offender = (pid, tid, mid, scenario.measurements[mid].labels[k])
    return ReproductionReport(ok=worst <= tol, worst_deviation=worst,
                              offending=offender)


def _distinct_pure_states(scenario: Scenario, tol: float = 1e-9):
    """Group atomic preparation densities into distinct pure states.

    Returns (labels, projectors, assignment) where assignment maps each
    atomic prep id to its state index.  Raises if any atomic preparation is
    mixed.
    """
    from .qcore import kernel_basis

    labels = []
    projs = []
    assignment = {}
    for pid in scenario.atomic_preparations():
        rho = scenario.preparations[pid].mat
        kb = kernel_basis(rho)
        if kb.rank != 1:
            raise ValueError(
                "preparation %r is not pure (rank %d); the point-measure "
                "model needs pure atomic preparations" % (pid, kb.rank))
        hit = None
        for idx, p in enumerate(projs):
            if float(np.max(np.abs(p - rho))) <= tol:
                hit = idx
                break
        if hit is None:
            projs.append(rho)
            labels.append("state:%s" % pid)
            hit = len(projs) - 1
        assignment[pid] = hit
    return labels, projs, assignment


def beltrametti_bugajski(scenario: Scenario) -> OntologicalModel:
    """Point-measure model: ontic states are the scenario's pure states.

    Atomic preparations get point measures, mixtures their declared convex
    combinations, and responses follow the Born rule at each ontic state.
    Transformations are supported only when each channel permutes the
    scenario's pure states; anything else cannot be written as a kernel over
    this ontic space and raises.
    """
    labels, projs, assignment = _distinct_pure_states(scenario)
    space = OnticSpace(labels)
    n = space.size

    preps = {}
    for pid in scenario.preparations:
        comps = scenario.atomic_components(pid)
        w = np.zeros(n)
        for aid, weight in comps.items():
            w[assignment[aid]] += weight
        preps[pid] = PreparationMeasure(w)

    responses = {}
    for mid, meas in scenario.measurements.items():
        t = np.zeros((n, meas.n_outcomes))
        for l, p in enumerate(projs):
            for k, e in enumerate(meas.effects):
                t[l, k] = born_probability(p, e.mat)
        responses[mid] = ResponseFunction(t, meas.labels)

    kernels = {}
    for tid, ch in scenario.transformations.items():
        m = np.zeros((n, n))
        for l, p in enumerate(projs):
            image = ch.apply(p)
            hit = None
            for idx, q in enumerate(projs):
                if float(np.max(np.abs(image - q))) <= 1e-9:
                    hit = idx
                    break
            if hit is None:
                raise ValueError(
                    "transformation %r does not map the scenario's pure "
                    "states onto themselves; the point-measure model cannot "
                    "represent it" % tid)
            m[hit, l] = 1.0
        kernels[tid] = TransformationKernel(m)

    return OntologicalModel(space, preps, responses, kernels)


def epsilon_bb_model(scenario: Scenario, eps: float):
    """Noise-smoothed point-measure model.

    Every atomic preparation rho is replaced by (1 - eps) rho + eps tau with
    tau the uniform mixture of the scenario's pure states, and every measure
    by (1 - eps) point + eps uniform.  The smoothed scenario is reproduced
    exactly, every preparation's support is all of Lambda, and responses
    depend only on the effect, so every noncontextuality assumption built on
    supports holds while probabilities move by at most eps.

    Returns (smoothed_scenario, model).  Scenarios with transformations are
    rejected: smoothing is defined here for preparations and measurements.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie strictly between 0 and 1")
    if scenario.transformations:
        raise ValueError("epsilon smoothing does not support transformations")

    labels, projs, assignment = _distinct_pure_states(scenario)
    n = len(projs)
    tau = sum(projs) / n
    from .qcore import kernel_basis, smooth_state
    if kernel_basis(tau).kernel_dim != 0:
        raise ValueError(
            "the uniform mixture of the scenario's pure states is rank "
            "deficient; smoothing needs a full-rank noise state")

    smoothed_preps = {}
    for pid in scenario.preparations:
        if scenario.is_mixture(pid):
            continue
        smoothed_preps[pid] = smooth_state(
            scenario.preparations[pid].mat, eps, tau)
    ordered = {}
    for pid in scenario.preparations:
        if scenario.is_mixture(pid):
            mix = scenario.mixtures[pid]
            blend = sum(w * _resolve_smoothed(ordered, cid).mat
                        for cid, w in mix)
            ordered[pid] = (DensityMatrix(blend), mix)
        else:
            ordered[pid] = smoothed_preps[pid]
    smoothed = Scenario(scenario.d, ordered, scenario.measurements,
                        factors=scenario.factors)

    space = OnticSpace(labels)
    uniform = np.full(n, 1.0 / n)
    preps = {}
    for pid in smoothed.preparations:
        comps = scenario.atomic_components(pid)
        w = np.zeros(n)
        for aid, weight in comps.items():
            w[assignment[aid]] += weight
        preps[pid] = PreparationMeasure((1.0 - eps) * w + eps * uniform)

    responses = {}
    for mid, meas in scenario.measurements.items():
        t = np.zeros((n, meas.n_outcomes))
        for l, p in enumerate(projs):
            for k, e in enumerate(meas.effects):
                t[l, k] = born_probability(p, e.mat)
        responses[mid] = ResponseFunction(t, meas.labels)

    return smoothed, OntologicalModel(space, preps, responses)


def _resolve_smoothed(ordered: dict, cid: str):
    value = ordered[cid]
    return value[0] if isinstance(value, tuple) else value


def is_faithful(model: OntologicalModel, scenario: Scenario,
                tol: float = 1e-9,
                threshold: float = SUPPORT_THRESHOLD) -> FaithfulnessReport:
    """Do certainty and possibility sets depend only on the effect matrix?

    Scans all outcome slot pairs across measurements whose effects are equal
    matrices within tol and compares their R and T sets.  Returns the first
    offending pair if any.
    """
    slots = []
    for mid, meas in scenario.measurements.items():
        for k in range(meas.n_outcomes):
            slots.append((mid, k, meas.effects[k].mat))
    for i in range(len(slots)):
        mid1, k1, e1 = slots[i]
        for j in range(i + 1, len(slots)):
            mid2, k2, e2 = slots[j]
            if float(np.max(np.abs(e1 - e2))) > tol:
                continue
            r1, t1 = response_sets(model.responses[mid1], k1, threshold)
            r2, t2 = response_sets(model.responses[mid2], k2, threshold)
            if not (r1.same_set(r2) and t1.same_set(t2)):
                return FaithfulnessReport(False, ((mid1, k1), (mid2, k2)))
    return FaithfulnessReport(True, None)
