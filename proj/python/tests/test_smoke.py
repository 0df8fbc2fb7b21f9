import math

import pytest

import thin_epi


def test_lambda_and_kappa():
    assert thin_epi.lambda_of(1.5, 1) == pytest.approx(2.25)
    assert thin_epi.kappa_of(1.5, 1.0, 1) == pytest.approx(0.2)
    assert thin_epi.mode_count_ell(1, 1) == 3


def test_catalog_profile():
    p = thin_epi.catalog_profile(0, 1)
    assert p.degree() == 1
    assert p.is_admissible()
    assert p([0.3, 0.4]) <= 0.0
    assert p([0.5, 0.0]) == 0.0


def test_weiss_spectral_first_mode():
    # Single mode of degree 1 at mu = 1: (1 + 1)/2 - 1 = 0.
    assert abs(thin_epi.weiss_spectral([1.0], 1, 1.0)) < 1e-12
    # Mode with lambda = 4 extended with degree 1: (1 + 4)/2 - 1.
    assert thin_epi.weiss_spectral([0.0, 1.0], 1, 1.0) == pytest.approx(1.5)
    # ... and with degree 3/2: (9/4 + 4)/3 - 1.
    assert thin_epi.weiss_spectral([0.0, 1.0], 1, 1.0, alpha=1.5) == pytest.approx(13.0 / 12.0)


def test_epi_check_is_deterministic():
    a = thin_epi.epi_check(0, 1, trials=5, seed=3)
    b = thin_epi.epi_check(0, 1, trials=5, seed=3)
    assert a == b
    for row in a:
        assert row["slack"] >= -1e-8
        assert row["admissible"]


def test_gap_demo():
    g = thin_epi.gap_demo(0, 1, [0.01, -0.01])
    assert g["all_contradict"]
    assert g["a1_in_window"] == []
    assert 1.5 in thin_epi.a1_members(2.0)


def test_solve_and_frequency():
    problem = {"n": 1, "N": 32, "boundary": [{"kind": "halfspace", "mu": 1.5}]}
    sol = thin_epi.solve(problem)
    assert sol.converged
    assert sol.complementarity_residual <= 1e-9
    # u = r^{3/2} cos(3 theta / 2) at theta = 0, r = 0.5.
    assert sol.value([0.5, 0.0]) == pytest.approx(0.5**1.5, abs=2e-2)
    assert all(x[0] <= 0.0 for x in sol.contact_points())
    prof = sol.frequency([0.0, 0.0])
    assert prof["plateau"] == pytest.approx(1.5, abs=0.05)


def test_errors_are_raised():
    with pytest.raises(thin_epi.ThinEpiError):
        thin_epi.solve({"n": 1})
    with pytest.raises(thin_epi.ThinEpiError):
        thin_epi.run({})


def test_run_writes_manifest(tmp_path):
    man = thin_epi.run({"subcommand": "gap-demo", "output_dir": str(tmp_path), "m": 0, "n": 1})
    assert all(c["passed"] for c in man["checks"])
    assert (tmp_path / "manifest.json").exists()
    assert math.isfinite(man["summary"]["C"])
