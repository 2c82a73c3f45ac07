import io
import json

import pytest

from cptsim import cli
from cptsim.errors import ConfigError, EmptySweep, MissingStage
from cptsim.pipeline import (
    CSV_COLUMNS,
    analytic_row,
    config_from_dict,
    emit_csv,
    emit_figure_data,
    format_csv,
    parse_distances,
    run,
)

HEADER = ("medium,distance_m,source,c13_f,c24_f,c12_f,c34_f,c14_f,c23_f,"
          "c_p_f,c_s_f,c_m_f,k_c,f_res_hz,feasible,p_out_w")


def small_config(**over):
    data = {
        "media": ["air", "water"],
        "distances": {"start_m": 0.001, "stop_m": 0.2, "points": 4, "spacing": "log"},
        "geometry": {"refinement": 3},
    }
    data.update(over)
    return data


@pytest.fixture(scope="module")
def result(registry):
    return run(config_from_dict(small_config(), registry), registry)


def test_parse_distances():
    assert parse_distances([0.01, 0.02]) == (0.01, 0.02)
    log = parse_distances("0.001:0.20:25:log")
    assert len(log) == 25 and log[0] == pytest.approx(0.001) and log[-1] == pytest.approx(0.2)
    lin = parse_distances({"start_m": 0.01, "stop_m": 0.03, "points": 3})
    assert lin == pytest.approx((0.01, 0.02, 0.03))


@pytest.mark.parametrize("bad", ["1:2", "a:b:3", [], [0.01, -1], {"start_m": 1}, 5,
                                 {"start_m": 0.1, "stop_m": 1, "points": 3, "spacing": "cubic"}])
def test_parse_distances_rejects(bad):
    with pytest.raises(ConfigError):
        parse_distances(bad)


def test_default_distances(registry):
    cfg = config_from_dict({"media": ["air"]}, registry)
    assert len(cfg.distances) == 25
    assert cfg.distances[0] == pytest.approx(0.001) and cfg.distances[-1] == pytest.approx(0.2)
    assert config_from_dict({"media": ["air"], "geometry": {"gap_m": 0.01}}).distances == (0.01,)


@pytest.mark.parametrize("data", [
    {},
    {"media": []},
    {"media": ["plasma"]},
    {"media": ["air"], "geometry": {"colour": 1}},
    {"media": ["air"], "geometry": {"plate_side_m": -1}},
    {"media": ["air"], "geometry": {"refinement": 0}},
    {"media": ["air"], "circuit": {"v_in_v": -5}},
    {"media": ["air"], "circuit": {"watts": 5}},
    {"media": ["air"], "stages": ["analytic", "magic"]},
    {"media": ["air"], "output": {"figures": ["fig6"]}},
    {"media": ["air"], "workers": 0},
])
def test_config_rejects(registry, data):
    with pytest.raises(ConfigError):
        config_from_dict(data, registry)


def test_row_order_and_counts(result):
    rows = result.rows
    assert len(rows) == 2 * 4 * 2
    keys = [(r.medium, r.source) for r in rows[:4]]
    assert keys == [("air", "analytic"), ("air", "field")] * 2
    ds = [r.distance_m for r in rows if r.medium == "air" and r.source == "field"]
    assert ds == sorted(ds)
    assert all(r.f_res_hz is not None for r in rows)


def test_analytic_row_invariants(result):
    for r in result.rows:
        if r.source == "analytic":
            assert (r.c12_f, r.c34_f, r.c14_f, r.c23_f) == (0.0,) * 4 and r.k_c == 1.0
        else:
            assert all(getattr(r, c) is not None for c in ("c12_f", "c34_f", "c14_f", "c23_f"))
            assert 0 <= r.k_c <= 1


def test_summary(result):
    for name in ("air", "water"):
        for source in ("analytic", "field"):
            info = result.summary["media"][name][source]
            sel = [r for r in result.rows if r.medium == name and r.source == source]
            assert info["peak_p_out_w"] == max(r.p_out_w for r in sel)
    assert result.summary["media"]["air"]["analytic"]["max_feasible_distance_m"] == pytest.approx(
        3.165e-3, abs=5e-6)
    assert result.summary["media"]["water"]["analytic"]["max_feasible_distance_m"] == 0.2


def test_csv_format(air):
    text = format_csv([analytic_row(air, 0.3, 0.01)])
    lines = text.splitlines()
    assert lines[0] == HEADER == ",".join(CSV_COLUMNS)
    cells = lines[1].split(",")
    assert cells[CSV_COLUMNS.index("c_m_f")].startswith("4.0078")
    assert cells[CSV_COLUMNS.index("c_m_f")].endswith("e-11")
    assert len(cells[CSV_COLUMNS.index("c_m_f")].split("e")[0].replace(".", "")) == 9


def test_csv_booleans(result):
    text = format_csv(result.rows)
    feas = {line.split(",")[14] for line in text.splitlines()[1:]}
    assert feas <= {"true", "false"} and feas == {"true", "false"}


def test_empty_sweep(tmp_path):
    with pytest.raises(EmptySweep):
        emit_csv([], tmp_path / "x.csv")


def test_error_column_only_on_failure(registry, result):
    assert "error" not in format_csv(result.rows).splitlines()[0]
    cfg = config_from_dict(small_config(media=["air"], geometry={"refinement": 3, "plate_side_m": 0.3}),
                           registry)
    bad = run(cfg, registry)
    bad.rows[1].error = "SingularSystem: forced"
    text = format_csv(bad.rows)
    assert text.splitlines()[0].endswith(",error")
    assert text.splitlines()[2].endswith("SingularSystem: forced")


def test_determinism(registry, tmp_path):
    cfg = config_from_dict(small_config(), registry)
    a = emit_csv(run(cfg, registry).rows, tmp_path / "a.csv").read_bytes()
    b = emit_csv(run(cfg, registry).rows, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_parallel_matches_serial(registry):
    cfg = config_from_dict(small_config(), registry)
    par = config_from_dict(small_config(workers=2), registry)
    assert format_csv(run(cfg, registry).rows) == format_csv(run(par, registry).rows)


def test_figure_files(result, tmp_path):
    paths = emit_figure_data(result.rows, "fig5", tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["fig5_air_analytic.csv", "fig5_air_field.csv",
                     "fig5_water_analytic.csv", "fig5_water_field.csv"]
    for p in emit_figure_data(result.rows, "fig7", tmp_path):
        lines = p.read_text().splitlines()
        assert lines[0] == "distance_m,k_c"
        assert all(0 <= float(x.split(",")[1]) <= 1 for x in lines[1:])


def test_missing_stage(registry, tmp_path):
    cfg = config_from_dict(small_config(stages=["analytic"]), registry)
    rows = run(cfg, registry).rows
    with pytest.raises(MissingStage):
        emit_figure_data(rows, "fig9", tmp_path)
    with pytest.raises(MissingStage):
        emit_figure_data(rows, "fig7", tmp_path)
    with pytest.raises(ValueError):
        emit_figure_data(rows, "fig6", tmp_path)


# ------------------------------------------------------------ CLI


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "sweep.json"
    p.write_text(json.dumps(small_config()))
    return p


def call(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), stdout=out)
    return code, out.getvalue()


def test_cli_materials(tmp_path):
    code, out = call("materials", "list")
    assert code == 0 and "water\t80.103" in out
    extra = tmp_path / "extra.json"
    extra.write_text('[{"name": "oil", "eps_r": 2.2}]')
    code, out = call("materials", "list", "--materials", str(extra))
    assert "oil\t2.2" in out


def test_cli_analytic():
    code, out = call("analytic", "--medium", "air", "--plate-side", "0.30",
                     "--distances", "0.001:0.20:25:log")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == HEADER and len(lines) == 26


def test_cli_unknown_medium(capsys):
    assert call("analytic", "--medium", "plasma")[0] == 1
    assert "plasma" in capsys.readouterr().err


def test_cli_extract_and_circuit(config_file):
    code, out = call("extract", "--config", str(config_file))
    assert code == 0 and out.splitlines()[0] == HEADER
    assert out.splitlines()[1].split(",")[13] == ""  # no circuit columns
    code, out = call("circuit", "--config", str(config_file))
    assert code == 0 and out.splitlines()[1].split(",")[13] != ""


def test_cli_pipeline(config_file, tmp_path):
    out_dir = tmp_path / "out"
    code, out = call("pipeline", "--config", str(config_file), "--out", str(out_dir),
                     "--figures", "fig5,fig7,fig9", "--dump-matrices")
    assert code == 0
    assert json.loads(out)["rows"] == 16
    files = {p.name for p in out_dir.iterdir()}
    assert {"sweep.csv", "summary.json", "matrices.json", "fig7_water_field.csv"} <= files
    mats = json.loads((out_dir / "matrices.json").read_text())
    assert len(mats) == 8 and len(mats[0]["maxwell"]) == 16


def test_cli_partial_failure(tmp_path):
    # a mesh far over budget fails every field row but not the analytic rows
    p = tmp_path / "big.json"
    p.write_text(json.dumps(small_config(geometry={"refinement": 80})))
    code, _ = call("pipeline", "--config", str(p), "--out", str(tmp_path / "o"))
    assert code == 2
    header = (tmp_path / "o" / "sweep.csv").read_text().splitlines()[0]
    assert header.endswith(",error")


def test_cli_config_errors(tmp_path):
    assert call("extract", "--config", str(tmp_path / "missing.json"))[0] == 1
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert call("pipeline", "--config", str(p), "--out", str(tmp_path))[0] == 1
    good = tmp_path / "good.json"
    good.write_text(json.dumps(small_config()))
    assert call("pipeline", "--config", str(good), "--out", str(tmp_path), "--figures", "fig8")[0] == 1
    assert call("pipeline", "--config", str(good))[0] == 1  # no output dir
