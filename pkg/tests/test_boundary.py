import numpy as np
import pytest

from dcone import formats
from dcone.boundary import harmonic_term, parse_builtin, resolve_boundary
from dcone.exception import NonCanonicalPairError, UnknownBoundaryError


@pytest.mark.parametrize(
    "boundary_id, expected",
    [
        ("p1", ("p1", ())),
        ("john", ("john", ())),
        ("harmonic", ("harmonic", (0.0, 1.0))),
        ("harmonic:0.2,-0.1", ("harmonic", (0.2, -0.1))),
        ("mu:1.0,2.0", ("mu", (1.0, 2.0, "id"))),
        ("mu:1.0,2.0,rot90", ("mu", (1.0, 2.0, "rot90"))),
        ("halfspace:lower:-1", ("halfspace", ("lower", -1.0, "+", 1))),
        ("halfspace:upper:0.5:-:-1", ("halfspace", ("upper", 0.5, "-", -1))),
        ("double_cone:2", ("double_cone", (2,))),
        ("double_cone:0:0.1:-0.2", ("double_cone", (0, 0.1, -0.2))),
        ("field.csv", None),
    ],
)
def test_parse_builtin(boundary_id, expected):
    assert parse_builtin(boundary_id) == expected


@pytest.mark.parametrize("boundary_id", ["mu:1.0", "p1:3", "harmonic:1", "double_cone:x"])
def test_parse_builtin_malformed(boundary_id):
    with pytest.raises(UnknownBoundaryError):
        parse_builtin(boundary_id)


def test_harmonic_terms_are_harmonic():
    x1, x2 = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9))
    # r³ cos 3θ and r⁴ cos 4θ at θ = 0
    assert harmonic_term(3)(2.0, 0.0) == 8.0
    assert harmonic_term(4)(0.0, 2.0) == 16.0
    with pytest.raises(ValueError):
        harmonic_term(5)
    assert harmonic_term(3)(x1, x2).shape == x1.shape


def test_resolve_closed_form(canonical_pair, mu_right):
    data = resolve_boundary("mu:1.5707963267948966,1.5707963267948966", canonical_pair)
    assert data.solution is not None
    assert data.solution.family == "double_cone"
    x1, x2 = np.array([0.3, -0.5]), np.array([0.1, 0.4])
    assert data(x1, x2) == pytest.approx(mu_right.value(x1, x2))


def test_resolve_perturbed(canonical_pair):
    data = resolve_boundary("john+0.5*h3", canonical_pair)
    assert data.solution is None
    x1, x2 = np.linspace(-1, 1, 21), np.full(21, 0.7)
    values = data(x1, x2)
    assert np.all(values >= canonical_pair.lower(x1, x2))
    assert np.all(values <= canonical_pair.upper(x1, x2))


def test_resolve_rejects_non_canonical(case2_pair):
    with pytest.raises(NonCanonicalPairError):
        resolve_boundary("john", case2_pair)


def test_resolve_unknown(canonical_pair):
    with pytest.raises(UnknownBoundaryError):
        resolve_boundary("no_such_thing", canonical_pair)


def test_resolve_double_cone_index(case2_pair):
    assert resolve_boundary("double_cone:3", case2_pair).solution.family == "double_cone"
    with pytest.raises(ValueError, match="outside"):
        resolve_boundary("double_cone:4", case2_pair)


def test_resolve_field_csv(tmp_path, canonical_pair, mu_field):
    path = formats.write_field_csv(tmp_path / "field.csv", mu_field)
    data = resolve_boundary(str(path), canonical_pair)
    assert data.solution is None
    x1, x2 = mu_field.grid.mesh()
    assert data(x1, x2) == pytest.approx(np.asarray(mu_field.u), abs=1e-12)
