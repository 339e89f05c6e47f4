import json
import os
import pathlib

import numpy as np
import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

import squirrels as sq

SCHEMAS = pathlib.Path(__file__).resolve().parents[2] / "schemas"


def validator(name):
    resources = [
        (p.name, Resource.from_contents(json.loads(p.read_text())))
        for p in SCHEMAS.glob("*.schema.json")
    ]
    schema = json.loads((SCHEMAS / name).read_text())
    return Draft202012Validator(schema, registry=Registry().with_resources(resources))


@pytest.fixture(scope="module")
def grid():
    cfg = sq.Coupling(1.0)
    return cfg, sq.Discretization(6, cfg)


def test_forward_matches_direct_and_adjoint(grid):
    cfg, disc = grid
    rho = sq.make_random_density(6, 3).matrix
    op = sq.ForwardOperator(cfg, disc)
    y = op.apply(rho)
    assert y.p.shape == (disc.out_dim, disc.m_theta)
    direct = sq.apply_direct(rho, cfg, disc).p
    assert np.linalg.norm(y.p - direct) <= 1e-12 * np.linalg.norm(direct)
    w = np.random.default_rng(0).standard_normal(y.p.shape)
    z = sq.Spectrogram(w, disc.n_half, disc.buffer)
    lhs = np.sum(y.p * w) * 2 * np.pi / disc.m_theta
    rhs = np.real(np.vdot(rho, op.adjoint(z)))
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_multiplier_identity():
    cfg = sq.Coupling(0.7)
    for k in range(4):
        a = sq.multiplier(0.3, k, cfg)
        b = sq.multiplier_series(0.3, k, cfg)
        assert abs(a - b) < 1e-13


def test_discrepancy_reconstruction(grid):
    cfg, disc = grid
    rho = sq.make_band_limited(6, 1, 7).matrix
    clean = sq.ForwardOperator(cfg, disc).apply(rho)
    noise = np.random.default_rng(1).standard_normal(clean.p.shape)
    delta = 1e-2
    noise *= 0.999 * delta / (np.linalg.norm(noise) * np.sqrt(2 * np.pi / disc.m_theta))
    y = sq.Spectrogram(clean.p + noise, disc.n_half, disc.buffer)
    solver = sq.TikhonovSolver(y, cfg, disc)
    for method in (sq.SolverMethod.apg, sq.SolverMethod.admm):
        rep = sq.solve_discrepancy(solver, delta, 1.5, sq.SolverOptions(method=method))
        assert rep.bracket_satisfied
        assert delta <= rep.residual_norm <= 1.5 * delta
        assert np.linalg.norm(rep.rho_hat - rho) < 0.1
        eig = np.linalg.eigvalsh(rep.rho_hat)
        assert eig.min() >= -1e-12
        assert abs(np.trace(rep.rho_hat) - 1) <= 1e-12
        validator("report.schema.json").validate(rep.to_json(delta, 1.5))


def test_projection_and_errors():
    h = np.diag([0.7, 0.5, -0.2]).astype(complex)
    p = sq.project_to_constraint(h).matrix
    assert np.allclose(np.diag(p).real, [0.6, 0.4, 0.0])
    with pytest.raises(sq.InvalidInput):
        sq.DensityMatrix(np.array([[1, 1], [0, 0]], dtype=complex))
    with pytest.raises(sq.Error):
        sq.parse_prior("gauss:1")
    assert sq.parse_prior("exp:0.25") == "exp:0.25"


def test_dataset_sidecars_validate(tmp_path):
    cfg = {"n": 4, "deltas": [1e-2, 1e-3], "seeds": [5], "out": str(tmp_path)}
    man = sq.generate_dataset(cfg)
    assert len(man["entries"]) == 2
    meta_validator = validator("spectrogram_meta.schema.json")
    for entry in man["entries"]:
        y, meta = sq.read_spectrogram(entry["path"])
        meta_validator.validate(meta)
        meta_validator.validate(json.loads(pathlib.Path(entry["path"][:-4] + ".json").read_text()))
        assert meta["noise_level"] == entry["delta"]
        assert y.n_half == 4
    validator("manifest.schema.json").validate(json.loads((tmp_path / "manifest.json").read_text()))
    rho = sq.read_matrix(man["rho_path"])
    assert np.allclose(rho, sq.true_state(cfg))


def test_rate_sweep_summary(tmp_path):
    summary = sq.run_rate_sweep(
        {"n": 4, "deltas": [1e-1, 1e-2, 1e-3], "seeds": [1], "out": str(tmp_path)}
    )
    validator("summary.schema.json").validate(summary)
    validator("summary.schema.json").validate(json.loads((tmp_path / "summary.json").read_text()))
    assert summary["all_brackets"]
    assert summary["slope"] > 0


def test_certificate_and_spectrum(grid):
    cfg, disc = grid
    rho = sq.make_band_limited(6, 1, 7).matrix
    cert = sq.vsc_certificate(rho, "band:1", cfg, disc)
    assert cert["kappa_monotone"] and cert["psi_concave"]
    sv = sq.singular_values(cfg, disc)
    assert len(sv) == disc.dim**2
    assert sv[0] == pytest.approx(sq.operator_norm(cfg, disc), rel=1e-6)


def test_cli_roundtrip(tmp_path):
    code, _, _ = sq.cli(["simulate", "--g", "1", "--n", "4", "--delta", "1e-2", "--seed", "2",
                         "--out", str(tmp_path)])
    assert code == 0
    code, out, _ = sq.cli(["reconstruct", "--g", "1", "--delta", "1e-2", "--input",
                           str(tmp_path / "y_obs_d0_s2.csv")])
    assert code == 0
    validator("report.schema.json").validate(json.loads(out))
    assert sq.cli(["simulate"])[0] == 1


def test_module_location():
    build_dir = os.environ.get("SQUIRRELS_PYTHON_DIR")
    if build_dir:
        assert pathlib.Path(sq._core.__file__).parent == pathlib.Path(build_dir) / "squirrels"
