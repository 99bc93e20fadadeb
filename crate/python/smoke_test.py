"""Smoke test for the rankmetric extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

from fractions import Fraction

import rankmetric as rm


def check_fields():
    f = rm.Field(9)
    assert (f.order, f.characteristic, f.degree) == (9, 3, 2)
    for a in f.elements()[1:]:
        assert f.mul(a, f.inv(a)) == 1
    assert f.parse(f.format(5)) == 5
    try:
        f.inv(0)
    except ValueError:
        pass
    else:
        raise AssertionError("inverting zero should fail")


def check_matrices():
    f = rm.Field(2)
    g = rm.random_sl(8, f, seed=1)
    assert g.det() == 1
    assert (g @ g.inverse()) == rm.Matrix.identity(8, f)
    assert g.distance(g) == 0
    assert rm.Matrix.parse(g.to_text()) == g
    shear = rm.Matrix(f, [[1, 1], [0, 1]])
    assert shear.distance(rm.Matrix.identity(2, f)) == Fraction(1, 2)
    assert rm.limit_distance(shear, rm.Matrix.identity(4, f)) == Fraction(1, 2)


def check_tower():
    t = rm.Tower(2, 2)
    top = t.field(2)
    assert top.order == 16
    g = rm.random_sl(2, top, seed=3)
    h = t.embed(g, 2)
    assert (h.rows, h.field.order) == (8, 2)
    assert h.det() == 1
    report = rm.verify_embedding(2, 1, 2, trials=100, seed=0)
    assert report["failures"] == 0


def check_groups():
    g = rm.SpecialLinearGroup(2, 5)
    assert g.order == 120
    assert sum(g.class_sizes()) == 120
    assert len(g.center()) == 2
    table = g.character_table(seed=0)
    assert len(table["degrees"]) == g.class_count
    assert sum(d * d for d in table["degrees"]) == 120
    gluck = g.gluck(seed=0)
    assert gluck["passed"] and gluck["max_ratio"] < 1.6
    covering = g.covering_numbers()
    assert covering.count(None) == 2
    try:
        rm.SpecialLinearGroup(2, 5, cap=100)
    except rm.ResourceCapError:
        pass
    else:
        raise AssertionError("cap should be enforced")


def check_concentration():
    assert abs(rm.levy_bound(0.5, 64) - 2 * 2.718281828459045 ** -0.25) < 1e-9
    report = rm.concentration(16, 2, radii=["1/4", 0.5], samples=2000, certificate_pairs=100, seed=7)
    assert [row["empirical"] <= 1 for row in report["rows"]] == [True, True]
    again = rm.concentration(16, 2, radii=["1/4", 0.5], samples=2000, certificate_pairs=100, seed=7)
    assert report == again
    f = rm.Field(2)
    points = [rm.Matrix.identity(8, f), rm.random_sl(8, f, seed=2)]
    r = rm.ramsey(8, 2, "1/20", points, trials=10)
    assert r["trials"] == 10


def check_folner():
    z = rm.FolnerSets("z:1")
    assert z.size(4) == 16
    f = rm.Field(2)
    rep = z.representation("(1)", 4, f)
    assert rep.rank() == 15 == z.domain_size(4, ["(1)"])
    assert z.normalized_rank("(0)+(1)", 4, f) == Fraction(15, 16)
    profile = z.discreteness_profile([1], [2], [1, 2, 3], f)
    assert profile == [Fraction(1, 2), Fraction(3, 4), Fraction(7, 8)]
    h = rm.FolnerSets("heisenberg")
    assert h.size(1) == 16
    assert h.representation((1, 0, 0), 1, f).rank() == 7


if __name__ == "__main__":
    for check in [check_fields, check_matrices, check_tower, check_groups, check_concentration, check_folner]:
        check()
        print(f"{check.__name__}: ok")
