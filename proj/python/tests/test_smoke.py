import numpy as np
import pytest

import snowbranch as sb


def test_grid_counts():
    assert [len(sb.build_grid(l)) for l in (1, 2, 3)] == [1, 13, 133]
    g = sb.build_grid(2)
    assert g.spacing == pytest.approx(2.0 / 9.0)
    pts = g.points()
    assert pts.shape == (13, 2)
    # the grid is symmetric under x -> -x
    mirrored = {(round(-x, 9), round(y, 9)) for x, y in pts}
    assert mirrored == {(round(x, 9), round(y, 9)) for x, y in pts}


def test_bad_level_raises():
    with pytest.raises(sb.ConfigError):
        sb.build_grid(0)


def test_digraph_summary():
    assert len(sb.symmetry_type_names()) == 23
    assert sb.bifurcation_kind_count() == 59
    edges = sb.digraph_edges()
    assert len(edges) == 65
    assert (1, 5, "D3", "dashed", 2) in edges


def test_basis_and_calculus(tmp_path):
    basis = sb.compute_basis(3, 20)
    lam = basis.eigenvalues
    assert np.all(np.diff(lam) >= -1e-8)
    w = basis.weight
    gram = w * basis.modes.T @ basis.modes
    assert np.allclose(gram, np.eye(basis.size), atol=1e-10)

    path = tmp_path / "b.bin"
    basis.save(str(path))
    again = sb.load_basis(str(path))
    assert np.array_equal(again.eigenvalues, basis.eigenvalues)
    assert np.array_equal(again.modes, basis.modes)

    prob = sb.Problem(basis)
    rng = np.random.default_rng(3)
    a = rng.normal(size=basis.size)
    g = prob.gradient(30.0, a)
    eps = 1e-6
    fd = np.array([(prob.energy(30.0, a + eps * e) - prob.energy(30.0, a - eps * e)) / (2 * eps)
                   for e in np.eye(basis.size)])
    assert np.linalg.norm(fd - g) <= 1e-5 * np.linalg.norm(g)


def test_newton_on_one_mode_branch():
    basis = sb.compute_basis(3, 20)
    prob = sb.Problem(basis)
    a0 = np.zeros(basis.size)
    a0[0] = 1.0
    res = prob.newton(20.0, a0, type=1)
    assert res["status"] == "converged"
    assert res["gradient_norm"] <= 1e-8
    assert prob.symmetry_type(res["a"]) == 1


def test_small_run():
    out = sb.run({"level": 3, "modes": 20, "lambda_min": 0, "lambda_max": 40, "max_generation": 1, "threads": 1})
    ids = [b["id"] for b in out["branches"]]
    assert ids[0] == "b0"
    assert any(b["symmetry_type"] == 1 for b in out["branches"])
    assert out["records"][0]["center_dim"] == 1
