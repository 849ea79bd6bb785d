"""Operational and ontological relations, and the assumption checker.

An operational relation ties together declared procedures (preparations,
measurement outcomes, transformations) by their statistics; an ontological
relation ties together their representations in a model.  A noncontextuality
assumption is a pair of the two: operationally related procedures must have
ontologically related representations.  check_assumption enumerates every
related pair and reports the ones whose representations violate the
ontological side.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ontomodel import (
    SUPPORT_THRESHOLD,
    reproduces,
    response_sets,
    support_of,
    transformation_support,
)
from .qcore import TOL_KERNEL, choi_state, same_kernel, trace_distance

TOL_OPERATIONAL = 1e-9
TOL_ONTOLOGICAL = 1e-12

OP_KINDS = ("prob", "poss", "eps")
ONT_KINDS = ("prob", "poss", "trichotomy", "eps")
TARGETS = ("prep", "meas", "trans", "all")


def f_identity(eps):
    return eps


def f_sqrt(eps):
    return math.sqrt(eps)


NAMED_BOUNDS = {"id": f_identity, "sqrt": f_sqrt}


@dataclass(frozen=True)
class OperationalRelationSpec:
    kind: str
    target: str = "prep"
    eps: Optional[float] = None

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ValueError("unknown operational relation kind %r" % (self.kind,))
        if self.target not in TARGETS:
            raise ValueError("unknown target %r" % (self.target,))
        if self.kind == "eps":
            if self.eps is None or not self.eps >= 0:
                raise ValueError("eps relation requires a nonnegative eps")
        elif self.eps is not None:
            raise ValueError("eps only applies to the eps kind")


@dataclass(frozen=True)
class OntologicalRelationSpec:
    kind: str
    f: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in ONT_KINDS:
            raise ValueError("unknown ontological relation kind %r" % (self.kind,))
        if self.kind == "eps":
            if self.f is None:
                object.__setattr__(self, "f", f_identity)
        elif self.f is not None:
            raise ValueError("a bound map only applies to the eps kind")


@dataclass(frozen=True)
class AssumptionReport:
    op_spec: OperationalRelationSpec
    ont_spec: OntologicalRelationSpec
    examined: tuple = ()
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations


# ------------------------------------------------- operational, preparations

def prob_op_equiv(scenario, prep_a, prep_b, tol=TOL_OPERATIONAL):
    """Same density matrix: indistinguishable by any measurement statistics."""
    ra = scenario.preparations[prep_a].mat
    rb = scenario.preparations[prep_b].mat
    return float(np.max(np.abs(ra - rb))) <= tol


def poss_op_equiv(scenario, prep_a, prep_b, tol_kernel=TOL_KERNEL):
    """Same density kernel: the same outcomes are impossible."""
    ra = scenario.preparations[prep_a].mat
    rb = scenario.preparations[prep_b].mat
    return same_kernel(ra, rb, tol_kernel)


def eps_op_related(scenario, prep_a, prep_b, eps):
    """Distinguishable with advantage at most eps (boundary inclusive)."""
    ra = scenario.preparations[prep_a].mat
    rb = scenario.preparations[prep_b].mat
    return trace_distance(ra, rb) <= eps + 1e-12


# ------------------------------------------------- operational, measurements

def _effect_mat(effect):
    return effect.mat if hasattr(effect, "mat") else np.asarray(effect)


def meas_prob_op_equiv(effect_a, effect_b, tol=TOL_OPERATIONAL):
    """Equal effect matrices: same statistics on every preparation."""
    return float(np.max(np.abs(_effect_mat(effect_a) - _effect_mat(effect_b)))) <= tol


def meas_poss_op_equiv(effect_a, effect_b, tol_kernel=TOL_KERNEL):
    """Equal effect kernels: impossible on the same preparations."""
    return same_kernel(_effect_mat(effect_a), _effect_mat(effect_b), tol_kernel)


# ----------------------------------------------- operational, transformations

def trans_prob_op_equiv(ch_a, ch_b, tol=TOL_OPERATIONAL):
    """Equal Choi states: the channels are tomographically identical."""
    ja = choi_state(ch_a).mat
    jb = choi_state(ch_b).mat
    return float(np.max(np.abs(ja - jb))) <= tol


def trans_poss_op_equiv(ch_a, ch_b, tol_kernel=TOL_KERNEL):
    """Equal Choi kernels: zero statistics agree on all bipartite probes."""
    return same_kernel(choi_state(ch_a), choi_state(ch_b), tol_kernel)


# --------------------------------------------------------------- ontological

def prob_ont_equiv(mu_a, mu_b, tol=TOL_ONTOLOGICAL):
    return float(np.max(np.abs(mu_a.weights - mu_b.weights))) <= tol


def poss_ont_equiv(mu_a, mu_b, threshold=SUPPORT_THRESHOLD):
    return support_of(mu_a, threshold).same_set(support_of(mu_b, threshold))


def eps_ont_related(mu_a, mu_b, eps, f=f_identity):
    l1 = float(np.sum(np.abs(mu_a.weights - mu_b.weights)))
    return l1 <= f(eps) + 1e-12


def meas_prob_ont_equiv(col_a, col_b, tol=TOL_ONTOLOGICAL):
    return float(np.max(np.abs(np.asarray(col_a) - np.asarray(col_b)))) <= tol


def trichotomy_class(xi, k, lam, tol=TOL_ONTOLOGICAL):
    """Classify a response value as impossible, possible, or certain."""
    value = xi.table[lam, k]
    if value <= tol:
        return 0.0
    if value >= 1.0 - tol:
        return 1.0
    return 0.5


# ----------------------------------------------------------------- checker

def _prep_pairs(scenario):
    ids = sorted(scenario.preparations)
    return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]


def _meas_slots(scenario):
    slots = []
    for mid in sorted(scenario.measurements):
        meas = scenario.measurements[mid]
        for k in range(len(meas.effects)):
            slots.append((mid, k))
    return slots


def _trans_pairs(scenario):
    ids = sorted(scenario.transformations)
    return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]


def _check_preps(model, scenario, op_spec, ont_spec, tol, threshold,
                 examined, violations):
    for pa, pb in _prep_pairs(scenario):
        if op_spec.kind == "prob":
            related = prob_op_equiv(scenario, pa, pb, tol)
        elif op_spec.kind == "poss":
            related = poss_op_equiv(scenario, pa, pb)
        else:
            related = eps_op_related(scenario, pa, pb, op_spec.eps)
        if not related:
            continue
        pair = ("prep", pa, pb)
        examined.append(pair)
        mu_a = model.preps[pa]
        mu_b = model.preps[pb]
        if ont_spec.kind == "prob":
            if not prob_ont_equiv(mu_a, mu_b, threshold):
                lam = int(np.argmax(np.abs(mu_a.weights - mu_b.weights)))
                violations.append((pair, "weights differ at %s"
                                   % model.space.labels[lam]))
        elif ont_spec.kind == "poss":
            sa = support_of(mu_a, threshold)
            sb = support_of(mu_b, threshold)
            if not sa.same_set(sb):
                diff = sorted(set(sa.indices()) ^ set(sb.indices()))
                violations.append((pair, "supports differ at %s"
                                   % model.space.labels[diff[0]]))
        else:
            l1 = float(np.sum(np.abs(mu_a.weights - mu_b.weights)))
            bound = ont_spec.f(op_spec.eps)
            if l1 > bound + 1e-12:
                violations.append((pair, "total variation %.6g exceeds %.6g"
                                   % (l1, bound)))


def _check_meas(model, scenario, op_spec, ont_spec, tol, threshold,
                coarse_ok, examined, violations):
    slots = _meas_slots(scenario)
    effects = {(mid, k): scenario.measurements[mid].effects[k].mat
               for mid, k in slots}
    for i, sa in enumerate(slots):
        for sb in slots[i + 1:]:
            ea, eb = effects[sa], effects[sb]
            prob_related = float(np.max(np.abs(ea - eb))) <= tol
            if op_spec.kind == "prob":
                related = prob_related
            else:
                related = same_kernel(ea, eb)
            if not related:
                continue
            la = scenario.measurements[sa[0]].labels[sa[1]]
            lb = scenario.measurements[sb[0]].labels[sb[1]]
            pair = ("meas", (sa[0], la), (sb[0], lb))
            examined.append(pair)
            xi_a = model.responses[sa[0]]
            xi_b = model.responses[sb[0]]
            col_a = xi_a.table[:, sa[1]]
            col_b = xi_b.table[:, sb[1]]
            if ont_spec.kind == "prob":
                if not meas_prob_ont_equiv(col_a, col_b, threshold):
                    lam = int(np.argmax(np.abs(col_a - col_b)))
                    violations.append((pair, "responses differ at %s"
                                       % model.space.labels[lam]))
            elif ont_spec.kind == "poss":
                ra, ta = response_sets(xi_a, sa[1], threshold)
                rb, tb = response_sets(xi_b, sb[1], threshold)
                if not ta.same_set(tb):
                    diff = sorted(set(ta.indices()) ^ set(tb.indices()))
                    violations.append((pair, "possibility differs at %s"
                                       % model.space.labels[diff[0]]))
                elif coarse_ok and prob_related and not ra.same_set(rb):
                    diff = sorted(set(ra.indices()) ^ set(rb.indices()))
                    violations.append((pair, "certainty differs at %s"
                                       % model.space.labels[diff[0]]))
            else:
                for lam in range(model.space.size):
                    ca = trichotomy_class(xi_a, sa[1], lam, threshold)
                    cb = trichotomy_class(xi_b, sb[1], lam, threshold)
                    if ca != cb:
                        violations.append((pair, "class differs at %s"
                                           % model.space.labels[lam]))
                        break


def _check_trans(model, scenario, op_spec, ont_spec, tol, threshold,
                 examined, violations):
    chois = {tid: choi_state(ch).mat
             for tid, ch in scenario.transformations.items()}
    for ta, tb in _trans_pairs(scenario):
        if op_spec.kind == "prob":
            related = float(np.max(np.abs(chois[ta] - chois[tb]))) <= tol
        else:
            related = same_kernel(chois[ta], chois[tb])
        if not related:
            continue
        pair = ("trans", ta, tb)
        examined.append(pair)
        ka = model.kernels[ta]
        kb = model.kernels[tb]
        if ont_spec.kind == "prob":
            if float(np.max(np.abs(ka.matrix - kb.matrix))) > threshold:
                idx = np.unravel_index(
                    np.argmax(np.abs(ka.matrix - kb.matrix)), ka.matrix.shape)
                violations.append((pair, "kernels differ at (%s, %s)"
                                   % (model.space.labels[idx[1]],
                                      model.space.labels[idx[0]])))
        else:
            su_a = transformation_support(ka, threshold)
            su_b = transformation_support(kb, threshold)
            if su_a != su_b:
                s, t = sorted(su_a ^ su_b)[0]
                violations.append((pair, "supports differ at (%s, %s)"
                                   % (model.space.labels[s],
                                      model.space.labels[t])))


def check_assumption(model, scenario, op_spec, ont_spec, *,
                     assume_coarse_grainings_equivalent=True,
                     tol=TOL_OPERATIONAL, threshold=SUPPORT_THRESHOLD):
    """Verify a noncontextuality assumption on a reproducing model.

    Enumerates every pair of declared procedures of the target kind that the
    operational relation ties together, and records each pair whose
    ontological representations fail the ontological relation.  Models that
    do not reproduce the scenario are refused: the assumption is a statement
    about representations of the operational statistics.

    With assume_coarse_grainings_equivalent (the default), possibilistic
    equivalence of measurement outcomes additionally transfers certainty
    between contexts that assign the outcome equal effects; without it, only
    the possibility pattern must match.
    """
    targets = ("prep", "meas", "trans") if op_spec.target == "all" \
        else (op_spec.target,)
    if ont_spec.kind == "trichotomy" and targets != ("meas",):
        raise ValueError("trichotomy applies to measurement outcomes only")
    if (op_spec.kind == "eps" or ont_spec.kind == "eps") \
            and targets != ("prep",):
        raise ValueError("eps relations are defined for preparations only")
    if ont_spec.kind == "eps" and op_spec.kind != "eps":
        raise ValueError("an eps bound needs an eps operational relation")
    rep = reproduces(model, scenario, tol=tol)
    if not rep.ok:
        raise ValueError("model does not reproduce the scenario "
                         "(worst deviation %.3g at %s)"
                         % (rep.worst_deviation, rep.offending))
    examined = []
    violations = []
    for target in targets:
        if target == "prep":
            _check_preps(model, scenario, op_spec, ont_spec, tol, threshold,
                         examined, violations)
        elif target == "meas":
            _check_meas(model, scenario, op_spec, ont_spec, tol, threshold,
                        assume_coarse_grainings_equivalent,
                        examined, violations)
        else:
            _check_trans(model, scenario, op_spec, ont_spec, tol, threshold,
                         examined, violations)
    return AssumptionReport(op_spec, ont_spec,
                            tuple(examined), tuple(violations))


# ----------------------------------------------------------------- parsing

def parse_assumption(text):
    """Parse an assumption name into its relation pair.

    Accepted forms: "prob", "poss", "hardy", "trichotomy", and
    "eps:<value>" with an optional ":f=id" or ":f=sqrt" bound map.  Any form
    may carry a target suffix ":prep", ":meas", ":trans", or ":all";
    without one the target is "prep" ("meas" for trichotomy).
    """
    parts = text.split(":")
    name = parts[0]
    rest = parts[1:]
    target = None
    if rest and rest[-1] in TARGETS:
        target = rest[-1]
        rest = rest[:-1]
    if name == "eps":
        if not rest:
            raise ValueError("eps requires a value, e.g. eps:0.1")
        try:
            value = float(rest[0])
        except ValueError:
            raise ValueError("bad eps value %r" % (rest[0],)) from None
        f = f_identity
        for extra in rest[1:]:
            if extra.startswith("f="):
                key = extra[2:]
                if key not in NAMED_BOUNDS:
                    raise ValueError("unknown bound map %r (use id or sqrt)"
                                     % (key,))
                f = NAMED_BOUNDS[key]
            else:
                raise ValueError("unrecognized assumption part %r" % (extra,))
        return (OperationalRelationSpec("eps", target or "prep", eps=value),
                OntologicalRelationSpec("eps", f=f))
    if rest:
        raise ValueError("unrecognized assumption %r" % (text,))
    pairs = {
        "prob": ("prob", "prob"),
        "poss": ("poss", "poss"),
        "hardy": ("prob", "poss"),
        "trichotomy": ("prob", "trichotomy"),
    }
    if name not in pairs:
        raise ValueError("unknown assumption %r" % (name,))
    op_kind, ont_kind = pairs[name]
    default_target = "meas" if name == "trichotomy" else "prep"
    return (OperationalRelationSpec(op_kind, target or default_target),
            OntologicalRelationSpec(ont_kind))
