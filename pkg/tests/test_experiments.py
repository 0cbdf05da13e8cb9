import numpy as np
import pytest

from lsts_sparse import experiments as E
from lsts_sparse.charts import chart_name, emit_charts


def _cfg(tmp_path, **kw):
    base = dict(d_grid=[8], T_grid=[40, 60], eta_grid=[0.8, 1.5], n_reps=2,
                csv_path=str(tmp_path / "out.csv"), record_timing=False)
    base.update(kw)
    return E.ExperimentConfig(**base)


def test_row_count_and_header(tmp_path):
    cfg = _cfg(tmp_path)
    rows = list(E.run_experiment(cfg))
    assert len(rows) == cfg.expected_rows() == 2 * 2 * 2 * 2
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == E.CSV_HEADER_COMMENT
    assert lines[1] == ",".join(E.CSV_COLUMNS)
    assert all(r.gen_error >= 0 for r in rows)


def test_resume_and_determinism(tmp_path):
    cfg = _cfg(tmp_path)
    list(E.run_experiment(cfg))
    first = (tmp_path / "out.csv").read_bytes()
    assert list(E.run_experiment(cfg)) == []
    assert (tmp_path / "out.csv").read_bytes() == first
    cfg2 = _cfg(tmp_path, csv_path=str(tmp_path / "again.csv"))
    list(E.run_experiment(cfg2))
    assert (tmp_path / "again.csv").read_bytes() == first


def test_resume_after_truncation(tmp_path):
    cfg = _cfg(tmp_path)
    list(E.run_experiment(cfg))
    full = (tmp_path / "out.csv").read_text().splitlines(keepends=True)
    (tmp_path / "out.csv").write_text("".join(full[:7]))
    new = list(E.run_experiment(cfg))
    assert len(new) == len(full) - 7
    assert len(E.read_rows(tmp_path / "out.csv")) == cfg.expected_rows()


def test_workers_do_not_change_output(tmp_path):
    list(E.run_experiment(_cfg(tmp_path)))
    list(E.run_experiment(_cfg(tmp_path, csv_path=str(tmp_path / "par.csv"), workers=2)))
    assert (tmp_path / "par.csv").read_bytes() == (tmp_path / "out.csv").read_bytes()


def test_axes_are_independent(tmp_path):
    a = {r.key(): r for r in E.run_experiment(_cfg(tmp_path, csv_path=None))}
    b = {r.key(): r for r in E.run_experiment(
        _cfg(tmp_path, csv_path=None, eta_grid=[1.5, 2.0], T_grid=[60], penalties=["wtv"]))}
    shared = set(a) & set(b)
    assert shared
    for k in shared:
        assert a[k] == b[k]


def test_t0_rule_and_grid():
    assert E.t0_rule(50, "subweibull") == 100
    assert E.t0_rule(50, "pareto") == 400
    cfg = E.ExperimentConfig(d_grid=[50], noise="pareto", t_steps=3)
    assert E.t_grid(cfg, 50) == [400, 500, 600]


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        E.ExperimentConfig.from_dict({"d_grid": [5], "lambda": 1})
    with pytest.raises(ValueError):
        E.ExperimentConfig(penalties=["ridge"])


def test_read_rows_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text(E.CSV_HEADER_COMMENT + "\n" + ",".join(E.CSV_COLUMNS) + "\n1,2,x\n")
    with pytest.raises(E.CsvFormatError, match=":3:"):
        E.read_rows(p)


def test_support_stats():
    th = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 2.0, 2.0]])
    s = E.support_stats(th)
    assert s.lasso_supports == [set(), {1, 2}, {2, 3}]
    assert s.tv_supports == [set(), {3}, {2}]
    assert s.block_sparsity == 2 and s.check_inequality()


def test_support_inequality_on_fitted(tmp_path):
    from lsts_sparse import design, dgp, penalty as pen, solver
    from lsts_sparse.noise import SubWeibullSpec, split
    model = dgp.draw_covariate_model(10, 80, split(0, 0))
    ds = dgp.gen_dataset(model, dgp.gen_surface(10, 80), SubWeibullSpec(1.5), split(0, 1))
    op = design.build(ds.X, 0.15, 0.15)
    for spec in (pen.Lasso(0.01), pen.WeightedTV(np.r_[0.0, np.full(9, 0.01)])):
        th = solver.solve(op, ds.Y, spec).theta_hat
        assert E.support_stats(th).check_inequality()


def test_charts(tmp_path):
    cfg = _cfg(tmp_path)
    list(E.run_experiment(cfg))
    paths = emit_charts(cfg.csv_path, tmp_path / "c1")
    names = sorted(p.name for p in paths)
    assert names == [chart_name("subweibull", "lasso", 8), chart_name("subweibull", "wtv", 8)]
    assert names[0] == "subweibull_lasso_d8.svg"
    again = emit_charts(cfg.csv_path, tmp_path / "c2")
    for a, b in zip(sorted(paths), sorted(again)):
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().lstrip().startswith("<?xml")


def test_charts_empty_csv(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text(E.CSV_HEADER_COMMENT + "\n" + ",".join(E.CSV_COLUMNS) + "\n")
    assert emit_charts(p, tmp_path / "none") == []


def test_lambda_scale_multiplies_schedule():
    base = E.ExperimentConfig()
    half = E.ExperimentConfig(lambda_scale=0.5)
    assert half.penalty_spec("lasso", 50, 400).lam == pytest.approx(
        0.5 * base.penalty_spec("lasso", 50, 400).lam)
    assert np.allclose(half.penalty_spec("wtv", 50, 400).weights,
                       0.5 * base.penalty_spec("wtv", 50, 400).weights)
    with pytest.raises(ValueError):
        E.ExperimentConfig(lambda_scale=0.0)
