import io as stdio

import numpy as np
import pytest

from bernoulli_ensembles import io
from bernoulli_ensembles.ensemble import CanonicalSpec, sample_exact
from bernoulli_ensembles.llt import WeightedSumModel, exact_pmf
from bernoulli_ensembles.profile import ProfileParams
from bernoulli_ensembles.young import limit_curve


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, np.nextafter(1.0, 2.0)):
        assert float(io.fmt(x)) == x


def test_config_stream_round_trip():
    configs = sample_exact(CanonicalSpec(5, 4, 3), 1, 10)
    buf = stdio.StringIO()
    io.write_configs(configs, buf)
    buf.seek(0)
    assert io.read_configs(buf) == configs


def test_pmf_binary_round_trip():
    model = WeightedSumModel.from_profile(30, ProfileParams(0.4, 1.0), frozenset({1, 15}))
    pmf = exact_pmf(model)
    buf = stdio.BytesIO()
    io.write_pmf_binary(pmf, buf)
    raw = buf.getvalue()
    assert len(raw) == 8 * (8 + pmf.table.size + 2)
    header = np.frombuffer(raw[:64], dtype="<f8")
    assert header[0] == io.PMF_MAGIC and header[2] == 30 and header[5] == 2
    back = io.read_pmf_binary(stdio.BytesIO(raw))
    np.testing.assert_array_equal(back.table, pmf.table)
    assert back.defects == pmf.defects and back.n == 30


def test_pmf_binary_rejects_garbage():
    with pytest.raises(ValueError):
        io.read_pmf_binary(stdio.BytesIO(b"\0" * 64))


def test_pmf_csv():
    model = WeightedSumModel.constant(6, 0.5)
    pmf = exact_pmf(model)
    buf = stdio.StringIO()
    io.write_pmf_csv(model, pmf, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "K,L,P,q0,error"
    assert len(lines) - 1 == pmf.support.sum()
    total = sum(float(line.split(",")[2]) for line in lines[1:])
    assert total == pytest.approx(1.0, abs=1e-14)


def test_curve_csv_round_trip():
    c = limit_curve(ProfileParams(0.3, 2.0), 33)
    buf = stdio.StringIO()
    io.write_curve_csv(c, buf)
    buf.seek(0)
    back = io.read_curve_csv(buf)
    np.testing.assert_array_equal(back.grid, c.grid)
    np.testing.assert_array_equal(back.values, c.values)
