import json
import math

import numpy as np
import pytest

from app.errors import IngestionError
from app.numerics.grids import Field, XFunction, make_t_grid, make_theta_grid
from app.numerics.pipeline import SectorSamples
from app.numerics.serialization import (
    FieldMeta,
    dumps_report,
    meta_path,
    read_field_csv,
    read_field_meta,
    read_rhs_csv,
    read_theta_csv,
    to_jsonable,
    write_contour_csv,
    write_field_csv,
    write_sector_csv,
    write_theta_csv,
)
from app.numerics.sum_inverter import ray_contour


def test_field_csv(tmp_path, theta_grid, t_grid):
    V = Field.from_function(
        theta_grid, t_grid,
        lambda t, th: np.exp(-t) * np.sin(th) * (1 + 2j),
        lambda t, th: t * np.cos(th),
    )
    path = tmp_path / "field.csv"
    write_field_csv(path, V)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,theta,psi1_re,psi1_im,psi2_re,psi2_im"
    assert len(lines) == 1 + t_grid.n * theta_grid.n
    back = read_field_csv(path, theta_grid, t_grid)
    assert np.array_equal(back.psi1, V.psi1)
    assert np.array_equal(back.psi2, V.psi2)


def test_field_csv_other_grid(tmp_path, theta_grid, t_grid):
    path = tmp_path / "field.csv"
    write_field_csv(path, Field.zeros(theta_grid, t_grid))
    with pytest.raises(IngestionError):
        read_field_csv(path, theta_grid, make_t_grid(14.0, t_grid.n))
    with pytest.raises(IngestionError):
        read_field_csv(path, make_theta_grid(theta_grid.omega, 16), t_grid)


def test_field_csv_missing_columns(tmp_path, theta_grid, t_grid):
    path = tmp_path / "bad.csv"
    path.write_text("t,theta,psi1_re\n0,0,0\n")
    with pytest.raises(IngestionError) as info:
        read_field_csv(path, theta_grid, t_grid)
    assert "expected" in info.value.details


def test_field_csv_sidecar_reloads_grid(tmp_path):
    theta_grid = make_theta_grid(1.2, 12)
    t_grid = make_t_grid(20.0, 18, "exponential", gamma=3.0)
    V = Field.from_function(theta_grid, t_grid, lambda t, th: np.exp(-t) * th, lambda t, th: 1j * t * th)
    path = tmp_path / "V.csv"
    write_field_csv(path, V, mu=2.0)

    assert meta_path(path).name == "V.csv.json"
    meta = json.loads(meta_path(path).read_text())
    assert meta == {
        "schema": 1, "n_theta": 12, "n_t": 18, "t_max": 20.0, "omega": 1.2,
        "mu": 2.0, "grading": "exponential", "gamma": 3.0,
    }
    back = read_field_csv(path)
    assert back.theta_grid.omega == 1.2 and back.t_grid.gamma == 3.0
    assert np.array_equal(back.t_grid.nodes, t_grid.nodes)
    assert np.array_equal(back.psi2, V.psi2)


def test_field_csv_without_sidecar(tmp_path, theta_grid, t_grid):
    path = tmp_path / "V.csv"
    write_field_csv(path, Field.zeros(theta_grid, t_grid))
    meta_path(path).unlink()
    assert read_field_csv(path, theta_grid, t_grid).psi1.shape == (t_grid.n, theta_grid.n)
    with pytest.raises(IngestionError):
        read_field_csv(path)


def test_field_meta_rejects_bad_grading(tmp_path, theta_grid, t_grid):
    path = tmp_path / "V.csv"
    write_field_csv(path, Field.zeros(theta_grid, t_grid))
    meta = FieldMeta.of(Field.zeros(theta_grid, t_grid)).model_dump(by_alias=True)
    meta_path(path).write_text(json.dumps({**meta, "grading": "geometric"}))
    with pytest.raises(IngestionError) as info:
        read_field_meta(path)
    assert "errors" in info.value.details


def test_theta_csv(tmp_path, theta_grid):
    th = theta_grid.nodes
    w = XFunction(th**2 * (theta_grid.omega - th) ** 2 * (1 - 1j), np.cos(th) + 0j)
    path = tmp_path / "F.csv"
    write_theta_csv(path, w, theta_grid)
    assert path.read_text().splitlines()[0] == "theta,psi1_re,psi1_im,psi2_re,psi2_im"
    back = read_theta_csv(path, theta_grid)
    assert np.array_equal(back.psi1, w.psi1)
    assert np.array_equal(back.psi2, w.psi2)
    with pytest.raises(IngestionError):
        read_theta_csv(path, make_theta_grid(theta_grid.omega, 16))


def test_to_jsonable():
    payload = to_jsonable({
        "inf": math.inf,
        "ninf": -math.inf,
        "nan": math.nan,
        "z": 1 - 2j,
        "arr": np.array([1.5, 2.5]),
        "n": np.int64(3),
        1: (True, None),
    })
    assert payload == {
        "inf": "inf", "ninf": "-inf", "nan": None, "z": [1.0, -2.0],
        "arr": [1.5, 2.5], "n": 3, "1": [True, None],
    }


def test_dumps_report_sorted():
    text = dumps_report({"b": 1, "a": {"d": 2, "c": 3}})
    assert list(json.loads(text)) == ["a", "b"]
    assert text.index('"c"') < text.index('"d"')


def test_rhs_csv(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("x,y,f\n0,0,1\n1,0,3\n0,1,5\n1,1,7\n")
    f = read_rhs_csv(path)
    # f = 1 + 2x + 4y
    assert f(np.array([0.5]), np.array([0.25]))[0] == pytest.approx(3.0)
    assert np.isnan(f(np.array([2.0]), np.array([2.0]))[0])


def test_rhs_csv_too_few_points(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("x,y,f\n0,0,1\n1,0,3\n")
    with pytest.raises(IngestionError):
        read_rhs_csv(path)


def test_sector_and_contour_csv(tmp_path):
    radii, thetas = np.array([0.5, 1.0]), np.array([0.0, 0.5, 1.0])
    u = np.outer(radii, thetas)
    samples = SectorSamples(radii=radii, thetas=thetas, u=u, mask=np.zeros_like(u, dtype=bool))
    sector = tmp_path / "u.csv"
    write_sector_csv(sector, samples)
    rows = np.loadtxt(sector, delimiter=",", skiprows=1)
    assert rows.shape == (6, 4)
    assert rows[-1].tolist() == [1.0, 1.0, 1.0, 0.0]

    contour = ray_contour(1.0, 0.3, panels=2, nodes_per_panel=4)
    path = tmp_path / "contour.csv"
    write_contour_csv(path, contour)
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert table.shape == (contour.size, 5)
    assert np.allclose(table[:, 1] + 1j * table[:, 2], contour.quad_nodes)
