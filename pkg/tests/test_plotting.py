import numpy as np

from poissonkit.experiments import CheckRecord, Report, Table, check_bernoulli
from poissonkit.plotting import render_report


def test_render_report_writes_pngs(tmp_path):
    tables = {}
    records = check_bernoulli(np.random.default_rng(0), 2, tables=tables)
    records.append(CheckRecord.bound("failing", 2.0, 1.0))
    rep = Report("bernoulli", 0, records, tables)
    paths = render_report(rep, tmp_path)
    assert [p.name for p in paths] == ["bernoulli_residuals.png", "bernoulli_ladder.png"]
    for p in paths:
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_unknown_tables_are_skipped(tmp_path):
    rep = Report("x", 0, [CheckRecord.bound("ok", 0.0, 1.0)], {"other": Table(["a"], [[1]])})
    assert len(render_report(rep, tmp_path)) == 1
