import math

import numpy as np
import pytest

from nonctx.ontomodel import (
    OnticSpace,
    OntologicalModel,
    PreparationMeasure,
    ResponseFunction,
    Scenario,
    beltrametti_bugajski,
    epsilon_bb_model,
)
from nonctx.qcore import (
    Measurement,
    basis_measurement,
    bloch_projector,
    bloch_state,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
)
from nonctx.relations import (
    AssumptionReport,
    OntologicalRelationSpec,
    OperationalRelationSpec,
    check_assumption,
    eps_ont_related,
    eps_op_related,
    f_sqrt,
    meas_prob_ont_equiv,
    meas_prob_op_equiv,
    meas_poss_op_equiv,
    parse_assumption,
    poss_ont_equiv,
    poss_op_equiv,
    prob_ont_equiv,
    prob_op_equiv,
    trans_poss_op_equiv,
    trans_prob_op_equiv,
    trichotomy_class,
)

Z_BASIS = [bloch_state(0.0), bloch_state(math.pi)]


def two_recipe_scenario():
    """Maximally mixed state prepared by a Z-mixture and by an X-mixture."""
    z0, z1 = bloch_projector(0.0), bloch_projector(math.pi)
    x0, x1 = bloch_projector(math.pi / 2), bloch_projector(-math.pi / 2)
    return Scenario(2, {
        "z0": z0, "z1": z1, "x0": x0, "x1": x1,
        "mix_z": (0.5 * z0 + 0.5 * z1, (("z0", 0.5), ("z1", 0.5))),
        "mix_x": (0.5 * x0 + 0.5 * x1, (("x0", 0.5), ("x1", 0.5))),
    }, {"m": basis_measurement(Z_BASIS, ["+", "-"])})


# -------------------------------------------------------- operational, preps

def test_prob_op_equiv_two_recipes():
    sc = two_recipe_scenario()
    assert prob_op_equiv(sc, "mix_z", "mix_x")
    assert prob_op_equiv(sc, "z0", "z0")
    assert not prob_op_equiv(sc, "z0", "z1")


def test_prob_op_equiv_diag_pair():
    sc = Scenario(2, {"a": np.diag([0.75, 0.25]), "b": np.diag([0.25, 0.75])},
                  {"m": basis_measurement(Z_BASIS)})
    assert not prob_op_equiv(sc, "a", "b")


def test_poss_op_equiv_interior_diagonals():
    sc = Scenario(2, {
        "a": np.diag([0.3, 0.7]),
        "b": np.diag([0.9, 0.1]),
        "pure": bloch_projector(0.0),
        "mixed": np.eye(2) / 2,
    }, {"m": basis_measurement(Z_BASIS)})
    assert poss_op_equiv(sc, "a", "b")
    assert not poss_op_equiv(sc, "pure", "mixed")


def test_poss_op_equiv_four_state_mixtures():
    phi = math.pi / 4
    a = 0.5 * bloch_projector(phi) + 0.5 * bloch_projector(-math.pi / 2)
    b = 0.5 * bloch_projector(-phi) + 0.5 * bloch_projector(math.pi / 2)
    sc = Scenario(2, {"mixA": a, "mixB": b},
                  {"m": basis_measurement(Z_BASIS)})
    assert poss_op_equiv(sc, "mixA", "mixB")


def test_eps_op_related():
    sc = Scenario(2, {
        "zero": bloch_projector(0.0),
        "one": bloch_projector(math.pi),
        "tilted": np.diag([0.75, 0.25]),
        "mixed": np.eye(2) / 2,
    }, {"m": basis_measurement(Z_BASIS)})
    assert eps_op_related(sc, "zero", "zero", 0.0)
    assert not eps_op_related(sc, "zero", "one", 1.9)
    # distance is exactly one half; the boundary is inclusive
    assert eps_op_related(sc, "tilted", "mixed", 0.5)
    assert not eps_op_related(sc, "tilted", "mixed", 0.49)


# ------------------------------------------------------- ontological, preps

def test_prob_ont_equiv():
    assert prob_ont_equiv(PreparationMeasure([0.5, 0.5]),
                          PreparationMeasure([0.5, 0.5]))
    assert not prob_ont_equiv(PreparationMeasure([0.4, 0.6]),
                              PreparationMeasure([0.5, 0.5]))


def test_prob_ont_equiv_point_model_recipes_differ():
    sc = two_recipe_scenario()
    model = beltrametti_bugajski(sc)
    assert not prob_ont_equiv(model.preps["mix_z"], model.preps["mix_x"])


def test_poss_ont_equiv():
    assert poss_ont_equiv(PreparationMeasure([0.5, 0.5, 0.0]),
                          PreparationMeasure([0.9, 0.1, 0.0]))
    assert not poss_ont_equiv(PreparationMeasure([1.0, 0.0]),
                              PreparationMeasure([0.5, 0.5]))


def test_eps_ont_related():
    mu = PreparationMeasure([0.3, 0.7])
    assert eps_ont_related(mu, mu, 0.0)
    a = PreparationMeasure([1.0, 0.0])
    b = PreparationMeasure([0.0, 1.0])
    assert not eps_ont_related(a, b, 1.9)       # L1 distance is 2
    assert eps_ont_related(a, b, 2.0)
    assert eps_ont_related(a, b, 0.04, f=lambda e: 50 * e)


# ------------------------------------------------- measurements and channels

def test_meas_op_relations():
    p0 = bloch_projector(0.0)
    assert meas_prob_op_equiv(p0, p0.copy())
    assert not meas_prob_op_equiv(p0, 0.5 * p0)
    assert meas_poss_op_equiv(p0, 0.5 * p0)     # scaling keeps the kernel
    assert not meas_poss_op_equiv(p0, bloch_projector(math.pi))


def test_meas_prob_ont_equiv():
    assert meas_prob_ont_equiv([0.2, 0.8], [0.2, 0.8])
    assert not meas_prob_ont_equiv([0.2, 0.8], [0.2, 0.7])


def test_trichotomy_class_values():
    xi = ResponseFunction([[0.0, 1.0], [0.3, 0.7], [1.0, 0.0]])
    assert trichotomy_class(xi, 0, 0) == 0.0
    assert trichotomy_class(xi, 0, 1) == 0.5
    assert trichotomy_class(xi, 0, 2) == 1.0


def test_trichotomy_class_matches_response_sets():
    from nonctx.ontomodel import response_sets
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, m = int(rng.integers(1, 5)), int(rng.integers(2, 4))
        raw = rng.dirichlet(np.ones(m), size=n)
        raw[rng.random(size=raw.shape) < 0.3] = 0.0
        raw[:, -1] = 0.0
        raw[:, -1] = 1.0 - raw.sum(axis=1)
        xi = ResponseFunction(raw)
        for k in range(m):
            r, t = response_sets(xi, k)
            for lam in range(n):
                c = trichotomy_class(xi, k, lam)
                assert (c == 1.0) == (lam in r)
                assert (c == 0.0) == (lam not in t)


def test_trans_relations():
    deph_a = dephasing_channel(0.3)
    deph_b = dephasing_channel(0.7)
    assert trans_poss_op_equiv(deph_a, deph_b)
    assert not trans_prob_op_equiv(deph_a, deph_b)
    assert trans_prob_op_equiv(deph_a, dephasing_channel(0.3))
    assert not trans_poss_op_equiv(identity_channel(2),
                                   depolarizing_channel(1.0))
    assert trans_poss_op_equiv(deph_a, deph_a)


# ---------------------------------------------------------- symmetry checks

def test_relations_symmetric_and_reflexive():
    rng = np.random.default_rng(13)
    for _ in range(30):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        rho_a = np.outer(v, v.conj())
        rho_b = np.diag(rng.dirichlet([1.0, 1.0]))
        sc = Scenario(2, {"a": rho_a, "b": rho_b},
                      {"m": basis_measurement(Z_BASIS)})
        mu_a = PreparationMeasure(rng.dirichlet([1.0, 1.0, 1.0]))
        mu_b = PreparationMeasure(rng.dirichlet([1.0, 1.0, 1.0]))
        eps = float(rng.uniform(0, 2))
        for rel in (prob_op_equiv, poss_op_equiv):
            assert rel(sc, "a", "b") == rel(sc, "b", "a")
            assert rel(sc, "a", "a")
        assert eps_op_related(sc, "a", "b", eps) == eps_op_related(
            sc, "b", "a", eps)
        assert eps_op_related(sc, "a", "a", 0.0)
        for rel in (prob_ont_equiv, poss_ont_equiv):
            assert rel(mu_a, mu_b) == rel(mu_b, mu_a)
            assert rel(mu_a, mu_a)
        assert eps_ont_related(mu_a, mu_b, eps) == eps_ont_related(
            mu_b, mu_a, eps)
        assert eps_ont_related(mu_a, mu_a, 0.0)


def test_prob_refines_poss_on_random_pairs():
    rng = np.random.default_rng(17)
    mats = []
    for _ in range(40):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = g @ g.conj().T
        mats.append(rho / np.trace(rho).real)
    mats += [m.copy() for m in mats[:10]]
    checked = 0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            sc = Scenario(2, {"a": mats[i], "b": mats[j]},
                          {"m": basis_measurement(Z_BASIS)})
            if prob_op_equiv(sc, "a", "b"):
                assert poss_op_equiv(sc, "a", "b")
            checked += 1
    assert checked >= 500


# ------------------------------------------------------------- the checker

def test_checker_flags_preparation_contextual_point_model():
    sc = two_recipe_scenario()
    model = beltrametti_bugajski(sc)
    report = check_assumption(model, sc,
                              OperationalRelationSpec("prob", "prep"),
                              OntologicalRelationSpec("prob"))
    assert not report.ok
    assert ("prep", "mix_x", "mix_z") in [v[0] for v in report.violations]
    assert set(v[0] for v in report.violations) <= set(report.examined)


def test_checker_universal_poss_on_smoothed_model():
    sc = two_recipe_scenario()
    smoothed, model = epsilon_bb_model(sc, 0.05)
    report = check_assumption(model, smoothed,
                              OperationalRelationSpec("poss", "all"),
                              OntologicalRelationSpec("poss"))
    assert report.ok
    assert len(report.examined) > 0


def test_checker_vacuous_when_nothing_related():
    sc = Scenario(2, {"a": bloch_projector(0.1), "b": bloch_projector(2.0)},
                  {"m": basis_measurement(Z_BASIS)})
    model = beltrametti_bugajski(sc)
    report = check_assumption(model, sc,
                              OperationalRelationSpec("prob", "prep"),
                              OntologicalRelationSpec("prob"))
    assert report.ok
    assert report.examined == ()


def test_checker_refuses_non_reproducing_model():
    sc = Scenario(2, {"a": bloch_projector(0.0)},
                  {"m": basis_measurement(Z_BASIS)})
    bad = OntologicalModel(OnticSpace(["x"]), {"a": [1.0]},
                           {"m": [[0.5, 0.5]]})
    with pytest.raises(ValueError):
        check_assumption(bad, sc, OperationalRelationSpec("prob", "prep"),
                         OntologicalRelationSpec("prob"))


def certainty_transfer_fixture():
    """Equal effects share their possibility pattern but not certainty.

    One context refines the complement of the shared effect, the other
    coarse-grains it, so no other effect pair is related and only the
    certainty transfer distinguishes the two readings.
    """
    e = np.diag([1.0, 0.0, 0.0])
    f = np.diag([0.0, 1.0, 0.0])
    g = np.diag([0.0, 0.0, 1.0])
    sc = Scenario(3, {"p": np.diag([0.5, 0.25, 0.25])},
                  {"fine": Measurement([e, f, g], ["e", "f", "g"]),
                   "coarse": Measurement([e, f + g], ["e", "rest"])})
    model = OntologicalModel(
        OnticSpace(["a", "b"]),
        {"p": [0.25, 0.75]},
        {"fine": ResponseFunction([[1.0, 0.0, 0.0],
                                   [1 / 3, 1 / 3, 1 / 3]], ("e", "f", "g")),
         "coarse": ResponseFunction([[0.5, 0.5], [0.5, 0.5]], ("e", "rest"))})
    return sc, model


def test_checker_certainty_transfer_flag():
    sc, model = certainty_transfer_fixture()
    op = OperationalRelationSpec("poss", "meas")
    ont = OntologicalRelationSpec("poss")
    strict = check_assumption(model, sc, op, ont)
    assert not strict.ok
    assert "certainty" in strict.violations[0][1]
    lax = check_assumption(model, sc, op, ont,
                           assume_coarse_grainings_equivalent=False)
    assert lax.ok


def test_checker_trichotomy_on_measurements():
    sc, model = certainty_transfer_fixture()
    report = check_assumption(model, sc,
                              OperationalRelationSpec("prob", "meas"),
                              OntologicalRelationSpec("trichotomy"))
    assert not report.ok
    faithful = beltrametti_bugajski(
        Scenario(2, {"q": bloch_projector(0.3)},
                 {"m0": basis_measurement(Z_BASIS), "m1": basis_measurement(Z_BASIS)}))
    report2 = check_assumption(
        faithful,
        Scenario(2, {"q": bloch_projector(0.3)},
                 {"m0": basis_measurement(Z_BASIS), "m1": basis_measurement(Z_BASIS)}),
        OperationalRelationSpec("prob", "meas"),
        OntologicalRelationSpec("trichotomy"))
    assert report2.ok


def test_checker_rejects_undefined_combinations():
    sc = Scenario(2, {"a": bloch_projector(0.0)},
                  {"m": basis_measurement(Z_BASIS)})
    model = beltrametti_bugajski(sc)
    with pytest.raises(ValueError):
        check_assumption(model, sc,
                         OperationalRelationSpec("prob", "prep"),
                         OntologicalRelationSpec("trichotomy"))
    with pytest.raises(ValueError):
        check_assumption(model, sc,
                         OperationalRelationSpec("eps", "meas", eps=0.1),
                         OntologicalRelationSpec("eps"))


def test_implication_lattice_on_corpus():
    corpus = []
    sc1 = Scenario(2, {"a": bloch_projector(0.1), "b": bloch_projector(2.0)},
                   {"m": basis_measurement(Z_BASIS)})
    corpus.append((beltrametti_bugajski(sc1), sc1))
    sc2 = two_recipe_scenario()
    corpus.append((beltrametti_bugajski(sc2), sc2))
    smoothed, smodel = epsilon_bb_model(sc2, 0.1)
    corpus.append((smodel, smoothed))
    for model, sc in corpus:
        passes = {}
        for key, (opk, ontk) in {
            "pp": ("prob", "prob"), "ss": ("poss", "poss"),
            "ps": ("prob", "poss"),
        }.items():
            passes[key] = check_assumption(
                model, sc, OperationalRelationSpec(opk, "prep"),
                OntologicalRelationSpec(ontk)).ok
        if passes["pp"]:
            assert passes["ps"]
        if passes["ss"]:
            assert passes["ps"]


# ----------------------------------------------------------------- parsing

def test_parse_assumption_names():
    op, ont = parse_assumption("prob")
    assert (op.kind, op.target, ont.kind) == ("prob", "prep", "prob")
    op, ont = parse_assumption("poss:all")
    assert (op.kind, op.target, ont.kind) == ("poss", "all", "poss")
    op, ont = parse_assumption("hardy")
    assert (op.kind, op.target, ont.kind) == ("prob", "prep", "poss")
    op, ont = parse_assumption("trichotomy")
    assert (op.kind, op.target, ont.kind) == ("prob", "meas", "trichotomy")


def test_parse_assumption_eps():
    op, ont = parse_assumption("eps:0.1")
    assert op.kind == "eps" and op.eps == 0.1 and op.target == "prep"
    assert ont.f(0.25) == 0.25
    op, ont = parse_assumption("eps:0.25:f=sqrt:prep")
    assert ont.f is f_sqrt
    assert ont.f(0.25) == 0.5


def test_parse_assumption_errors():
    for bad in ("bogus", "eps", "eps:x", "prob:bogus", "eps:0.1:f=cube",
                "prob:0.1"):
        with pytest.raises(ValueError):
            parse_assumption(bad)


def test_spec_validation():
    with pytest.raises(ValueError):
        OperationalRelationSpec("eps", "prep")          # missing eps
    with pytest.raises(ValueError):
        OperationalRelationSpec("eps", "prep", eps=-1.0)
    with pytest.raises(ValueError):
        OperationalRelationSpec("prob", "prep", eps=0.5)
    with pytest.raises(ValueError):
        OntologicalRelationSpec("prob", f=f_sqrt)
    report = AssumptionReport(OperationalRelationSpec("prob", "prep"),
                              OntologicalRelationSpec("prob"))
    assert report.ok
